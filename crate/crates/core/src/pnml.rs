//! Reading and writing nets: the P/T subset of PNML and a line-oriented
//! textual format.
//!
//! Textual grammar, one declaration per line, `#` starts a comment:
//!
//! ```text
//! net <id>                      # optional, defaults to "net"
//! place <name> [= <nat>]
//! trans <name>
//! arc <src> -> <dst> [* <weight>]
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::net::{ArcKey, NetBuilder, NetError, PetriNet};

const PTNET_TYPE: &str = "http://www.pnml.org/version-2009/grammar/ptnet";
const PNML_NS: &str = "http://www.pnml.org/version-2009/grammar/pnml";

#[derive(Debug, Error)]
pub enum PnmlError {
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("line {line}, column {column}: {message}")]
    Text {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported net format: {0}")]
    Unsupported(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    Pnml,
    Text,
}

/// A parsed net together with its identifier and display labels.
#[derive(Debug, Clone)]
pub struct NetDocument {
    pub net_id: String,
    pub net: PetriNet,
    pub source_format: SourceFormat,
    /// `name/text` labels keyed by node id; display metadata only.
    pub labels: BTreeMap<String, String>,
}

impl NetDocument {
    pub fn new(net_id: impl Into<String>, net: PetriNet, source_format: SourceFormat) -> Self {
        NetDocument {
            net_id: net_id.into(),
            net,
            source_format,
            labels: BTreeMap::new(),
        }
    }

    /// Structural equality: same id and same net, ignoring format and labels.
    pub fn structurally_eq(&self, other: &NetDocument) -> bool {
        self.net_id == other.net_id && self.net == other.net
    }
}

/// Reads a net file, choosing the format by extension (`.pnml`/`.xml` is
/// PNML, anything else the textual format).
pub fn read_net_file(path: &Path) -> Result<NetDocument, PnmlError> {
    let bytes = std::fs::read(path)?;
    if is_pnml_path(path) {
        parse_pnml(&bytes)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|e| PnmlError::Unsupported(format!("input is not UTF-8: {e}")))?;
        parse_textnet(&text)
    }
}

pub fn is_pnml_path(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("pnml") | Some("xml")
    )
}

fn parse_nat(text: &str) -> Option<u64> {
    let t = text.trim();
    if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    t.parse().ok()
}

fn describe_nat_error(text: &str) -> String {
    let t = text.trim();
    if t.starts_with('-') && t[1..].bytes().all(|b| b.is_ascii_digit()) && t.len() > 1 {
        format!("negative value `{t}`")
    } else {
        format!("expected a natural number, found `{t}`")
    }
}

struct PnmlReader {
    builder: NetBuilder,
    ids: HashSet<String>,
    labels: BTreeMap<String, String>,
    // (path, source, target, weight), resolved after all nodes are known
    arcs: Vec<(String, String, String, u64)>,
}

fn child<'a, 'i>(node: roxmltree::Node<'a, 'i>, name: &str) -> Option<roxmltree::Node<'a, 'i>> {
    node.children()
        .find(|c| c.is_element() && c.tag_name().name() == name)
}

fn text_of(node: roxmltree::Node) -> Option<String> {
    child(node, "text").map(|t| t.text().unwrap_or("").to_string())
}

fn element_path(node: roxmltree::Node) -> String {
    let mut parts: Vec<String> = node
        .ancestors()
        .filter(|n| n.is_element())
        .map(|n| match n.attribute("id") {
            Some(id) => format!("{}[{}]", n.tag_name().name(), id),
            None => n.tag_name().name().to_string(),
        })
        .collect();
    parts.reverse();
    parts.join("/")
}

fn perr(node: roxmltree::Node, message: impl Into<String>) -> PnmlError {
    PnmlError::Parse {
        path: element_path(node),
        message: message.into(),
    }
}

impl PnmlReader {
    fn node_id(&mut self, node: roxmltree::Node) -> Result<String, PnmlError> {
        let id = node
            .attribute("id")
            .ok_or_else(|| perr(node, "missing id attribute"))?;
        if id.is_empty() {
            return Err(perr(node, "empty id attribute"));
        }
        if !self.ids.insert(id.to_string()) {
            return Err(perr(node, format!("duplicate id `{id}`")));
        }
        if let Some(label) = child(node, "name").and_then(text_of) {
            self.labels.insert(id.to_string(), label.trim().to_string());
        }
        Ok(id.to_string())
    }

    fn visit_page(&mut self, page: roxmltree::Node) -> Result<(), PnmlError> {
        for node in page.children().filter(|c| c.is_element()) {
            match node.tag_name().name() {
                "page" => {
                    self.node_id(node)?;
                    self.visit_page(node)?;
                }
                "place" => {
                    if child(node, "hlinitialMarking").is_some() || child(node, "type").is_some() {
                        return Err(PnmlError::Unsupported(format!(
                            "{}: colored place declarations are not supported",
                            element_path(node)
                        )));
                    }
                    let id = self.node_id(node)?;
                    let tokens = match child(node, "initialMarking") {
                        None => 0,
                        Some(im) => {
                            let raw = text_of(im).unwrap_or_default();
                            parse_nat(&raw).ok_or_else(|| perr(im, describe_nat_error(&raw)))?
                        }
                    };
                    self.builder
                        .place(&id, tokens)
                        .map_err(|e| perr(node, e.to_string()))?;
                }
                "transition" => {
                    let id = self.node_id(node)?;
                    self.builder
                        .transition(&id)
                        .map_err(|e| perr(node, e.to_string()))?;
                }
                "arc" => {
                    if child(node, "hlinscription").is_some() {
                        return Err(PnmlError::Unsupported(format!(
                            "{}: colored arc inscriptions are not supported",
                            element_path(node)
                        )));
                    }
                    self.node_id(node)?;
                    let source = node
                        .attribute("source")
                        .ok_or_else(|| perr(node, "missing source attribute"))?;
                    let target = node
                        .attribute("target")
                        .ok_or_else(|| perr(node, "missing target attribute"))?;
                    let weight = match child(node, "inscription") {
                        None => 1,
                        Some(ins) => {
                            let raw = text_of(ins).unwrap_or_default();
                            let w = parse_nat(&raw)
                                .ok_or_else(|| perr(ins, describe_nat_error(&raw)))?;
                            if w == 0 {
                                return Err(perr(ins, "arc weight must be at least 1"));
                            }
                            w
                        }
                    };
                    self.arcs.push((
                        element_path(node),
                        source.to_string(),
                        target.to_string(),
                        weight,
                    ));
                }
                // graphics, toolspecific, name and anything else unknown
                _ => {}
            }
        }
        Ok(())
    }
}

/// Parses a P/T-net PNML document. Nested pages are flattened.
pub fn parse_pnml(input: &[u8]) -> Result<NetDocument, PnmlError> {
    let text = std::str::from_utf8(input).map_err(|e| PnmlError::Xml(e.to_string()))?;
    let doc = roxmltree::Document::parse(text).map_err(|e| PnmlError::Xml(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "pnml" {
        return Err(perr(root, "root element must be <pnml>"));
    }
    let net = child(root, "net").ok_or_else(|| perr(root, "no <net> element"))?;
    if let Some(ty) = net.attribute("type") {
        if !ty.trim_end_matches('/').ends_with("ptnet") {
            return Err(PnmlError::Unsupported(format!(
                "net type `{ty}` is not a place/transition net"
            )));
        }
    }
    let mut reader = PnmlReader {
        builder: NetBuilder::new(),
        ids: HashSet::new(),
        labels: BTreeMap::new(),
        arcs: Vec::new(),
    };
    let net_id = reader.node_id(net)?;
    reader.visit_page(net)?;
    for (path, source, target, weight) in std::mem::take(&mut reader.arcs) {
        reader
            .builder
            .arc(&source, &target, weight)
            .map_err(|e| PnmlError::Parse {
                path: path.clone(),
                message: e.to_string(),
            })?;
    }
    let built = reader.builder.build().map_err(|e| PnmlError::Parse {
        path: element_path(net),
        message: e.to_string(),
    })?;
    Ok(NetDocument {
        net_id,
        net: built,
        source_format: SourceFormat::Pnml,
        labels: reader.labels,
    })
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Deterministic PNML: places, transitions, then arcs, each in net order.
pub fn write_pnml(doc: &NetDocument) -> Vec<u8> {
    let net = &doc.net;
    let mut taken: HashSet<String> = net
        .places()
        .iter()
        .chain(net.transitions())
        .cloned()
        .collect();
    taken.insert(doc.net_id.clone());
    let mut fresh = |base: String| {
        let mut id = base.clone();
        let mut n = 1;
        while taken.contains(&id) {
            id = format!("{base}_{n}");
            n += 1;
        }
        taken.insert(id.clone());
        id
    };
    let page_id = fresh("page0".to_string());

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, "<pnml xmlns=\"{PNML_NS}\">");
    let _ = writeln!(
        out,
        "  <net id=\"{}\" type=\"{PTNET_TYPE}\">",
        xml_escape(&doc.net_id)
    );
    let _ = writeln!(out, "    <page id=\"{}\">", xml_escape(&page_id));
    let name_elem = |id: &str| match doc.labels.get(id) {
        Some(l) => format!("<name><text>{}</text></name>", xml_escape(l)),
        None => String::new(),
    };
    for (i, p) in net.places().iter().enumerate() {
        let tokens = net.initial_marking().get(i);
        let marking = if tokens > 0 {
            format!("<initialMarking><text>{tokens}</text></initialMarking>")
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "      <place id=\"{}\">{}{}</place>",
            xml_escape(p),
            name_elem(p),
            marking
        );
    }
    for t in net.transitions() {
        let _ = writeln!(
            out,
            "      <transition id=\"{}\">{}</transition>",
            xml_escape(t),
            name_elem(t)
        );
    }
    for (&key, &w) in net.arcs() {
        let (src, dst) = arc_endpoints(net, key);
        let id = fresh(format!("a_{src}_{dst}"));
        let ins = if w != 1 {
            format!("<inscription><text>{w}</text></inscription>")
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "      <arc id=\"{}\" source=\"{}\" target=\"{}\">{}</arc>",
            xml_escape(&id),
            xml_escape(src),
            xml_escape(dst),
            ins
        );
    }
    out.push_str("    </page>\n  </net>\n</pnml>\n");
    out.into_bytes()
}

fn arc_endpoints(net: &PetriNet, key: ArcKey) -> (&str, &str) {
    match key {
        ArcKey::Input(p, t) => (&net.places()[p], &net.transitions()[t]),
        ArcKey::Output(t, p) => (&net.transitions()[t], &net.places()[p]),
    }
}

fn is_text_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '.' | '-' | '\'' | ':'))
        && !s.starts_with('-')
}

/// Parses the textual net format.
pub fn parse_textnet(input: &str) -> Result<NetDocument, PnmlError> {
    let mut builder = NetBuilder::new();
    let mut net_id: Option<String> = None;
    // arcs resolved after all nodes are declared, so declaration order is free
    let mut arcs: Vec<(usize, usize, String, String, u64)> = Vec::new();

    for (lineno, raw) in input.lines().enumerate() {
        let line_no = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        // tokens with their 1-based columns
        let mut tokens: Vec<(usize, &str)> = Vec::new();
        let mut start = None;
        for (i, c) in content.char_indices() {
            if c.is_whitespace() {
                if let Some(s) = start.take() {
                    tokens.push((s, &content[s..i]));
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
        if let Some(s) = start {
            tokens.push((s, &content[s..]));
        }
        let Some(&(kw_col, kw)) = tokens.first() else {
            continue;
        };
        let err = |col: usize, message: String| PnmlError::Text {
            line: line_no,
            column: col + 1,
            message,
        };
        let name_at = |idx: usize, what: &str| -> Result<(usize, String), PnmlError> {
            match tokens.get(idx) {
                Some(&(c, n)) if is_text_name(n) => Ok((c, n.to_string())),
                Some(&(c, n)) => Err(err(c, format!("invalid {what} name `{n}`"))),
                None => Err(err(content.len(), format!("expected {what} name"))),
            }
        };
        match kw {
            "net" => {
                let (c, id) = name_at(1, "net")?;
                if tokens.len() > 2 {
                    return Err(err(tokens[2].0, "unexpected trailing input".into()));
                }
                if net_id.is_some() {
                    return Err(err(c, "net id declared twice".into()));
                }
                net_id = Some(id);
            }
            "place" => {
                let (c, name) = name_at(1, "place")?;
                let tokens_init = match tokens.get(2) {
                    None => 0,
                    Some(&(ec, "=")) => match tokens.get(3) {
                        Some(&(vc, v)) => {
                            if tokens.len() > 4 {
                                return Err(err(tokens[4].0, "unexpected trailing input".into()));
                            }
                            parse_nat(v).ok_or_else(|| err(vc, describe_nat_error(v)))?
                        }
                        None => return Err(err(ec, "expected token count after `=`".into())),
                    },
                    Some(&(oc, o)) => return Err(err(oc, format!("expected `=`, found `{o}`"))),
                };
                builder
                    .place(&name, tokens_init)
                    .map_err(|e| err(c, e.to_string()))?;
            }
            "trans" => {
                let (c, name) = name_at(1, "transition")?;
                if tokens.len() > 2 {
                    return Err(err(tokens[2].0, "unexpected trailing input".into()));
                }
                builder
                    .transition(&name)
                    .map_err(|e| err(c, e.to_string()))?;
            }
            "arc" => {
                let (sc, src) = name_at(1, "source")?;
                match tokens.get(2) {
                    Some(&(_, "->")) => {}
                    Some(&(c, o)) => return Err(err(c, format!("expected `->`, found `{o}`"))),
                    None => return Err(err(content.len(), "expected `->`".into())),
                }
                let (_, dst) = name_at(3, "target")?;
                let weight = match tokens.get(4) {
                    None => 1,
                    Some(&(sc2, "*")) => match tokens.get(5) {
                        Some(&(wc, w)) => {
                            if tokens.len() > 6 {
                                return Err(err(tokens[6].0, "unexpected trailing input".into()));
                            }
                            let v = parse_nat(w).ok_or_else(|| err(wc, describe_nat_error(w)))?;
                            if v == 0 {
                                return Err(err(wc, "arc weight must be at least 1".into()));
                            }
                            v
                        }
                        None => return Err(err(sc2, "expected weight after `*`".into())),
                    },
                    Some(&(c, o)) => return Err(err(c, format!("expected `*`, found `{o}`"))),
                };
                arcs.push((line_no, sc, src, dst, weight));
            }
            other => {
                return Err(err(kw_col, format!("unknown declaration `{other}`")));
            }
        }
    }
    for (line, col, src, dst, w) in arcs {
        builder.arc(&src, &dst, w).map_err(|e| PnmlError::Text {
            line,
            column: col + 1,
            message: match e {
                NetError::NotBipartite(..) => "arc must connect a place and a transition".into(),
                other => other.to_string(),
            },
        })?;
    }
    let net = builder.build().map_err(|e| PnmlError::Text {
        line: 0,
        column: 0,
        message: e.to_string(),
    })?;
    Ok(NetDocument {
        net_id: net_id.unwrap_or_else(|| "net".to_string()),
        net,
        source_format: SourceFormat::Text,
        labels: BTreeMap::new(),
    })
}

/// Deterministic textual rendering. Names that are not valid textual
/// identifiers cannot be represented and are written as-is.
pub fn write_textnet(doc: &NetDocument) -> String {
    let net = &doc.net;
    let mut out = String::new();
    let _ = writeln!(out, "net {}", doc.net_id);
    for (i, p) in net.places().iter().enumerate() {
        let tokens = net.initial_marking().get(i);
        if tokens > 0 {
            let _ = writeln!(out, "place {p} = {tokens}");
        } else {
            let _ = writeln!(out, "place {p}");
        }
    }
    for t in net.transitions() {
        let _ = writeln!(out, "trans {t}");
    }
    for (&key, &w) in net.arcs() {
        let (src, dst) = arc_endpoints(net, key);
        if w != 1 {
            let _ = writeln!(out, "arc {src} -> {dst} * {w}");
        } else {
            let _ = writeln!(out, "arc {src} -> {dst}");
        }
    }
    out
}
