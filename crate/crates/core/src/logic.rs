//! Counting temporal logic: formulas over transition propositions and
//! token-counting atoms, with the usual LTL modalities.
//!
//! Surface grammar, loosest binding first:
//!
//! ```text
//! formula ::= disj [ "U" formula ]                (right associative)
//! disj    ::= conj { "|" conj }
//! conj    ::= unary { "&" unary }
//! unary   ::= ("X" | "F" | "G" | "!") unary | primary
//! primary ::= "(" formula ")" | IDENT
//!           | "(#x" CMP NAT ")" IDENT "(x)"
//!           | "(#x)" IDENT "(x)" CMP IDENT "(x)" { CMP IDENT "(x)" }
//! CMP     ::= ">" | "<="
//! ```
//!
//! A bare identifier is a transition proposition. A comparison chain
//! `a <= b <= c` means `a <= b & b <= c`; chains must not mix directions.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Counting atom over the number of tokens (clients) in places.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClientAtom {
    /// more than `c` tokens in the place
    CountGt(String, u64),
    /// at most `c` tokens in the place
    CountLe(String, u64),
    /// strictly more tokens in the first place than in the second
    CmpGt(String, String),
    /// at most as many tokens in the first place as in the second
    CmpLe(String, String),
}

impl ClientAtom {
    pub fn complement(&self) -> ClientAtom {
        match self {
            ClientAtom::CountGt(p, c) => ClientAtom::CountLe(p.clone(), *c),
            ClientAtom::CountLe(p, c) => ClientAtom::CountGt(p.clone(), *c),
            ClientAtom::CmpGt(p, q) => ClientAtom::CmpLe(p.clone(), q.clone()),
            ClientAtom::CmpLe(p, q) => ClientAtom::CmpGt(p.clone(), q.clone()),
        }
    }

    pub fn places(&self) -> Vec<&str> {
        match self {
            ClientAtom::CountGt(p, _) | ClientAtom::CountLe(p, _) => vec![p],
            ClientAtom::CmpGt(p, q) | ClientAtom::CmpLe(p, q) => vec![p, q],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LcFormula {
    Prop(String),
    NegProp(String),
    Client(ClientAtom),
    Not(Box<LcFormula>),
    And(Box<LcFormula>, Box<LcFormula>),
    Or(Box<LcFormula>, Box<LcFormula>),
    Next(Box<LcFormula>),
    Finally(Box<LcFormula>),
    Globally(Box<LcFormula>),
    Until(Box<LcFormula>, Box<LcFormula>),
    /// Dual of until; produced by [`to_nnf`], never parsed.
    Release(Box<LcFormula>, Box<LcFormula>),
}

impl LcFormula {
    pub fn prop(name: &str) -> Self {
        LcFormula::Prop(name.to_string())
    }

    pub fn client(atom: ClientAtom) -> Self {
        LcFormula::Client(atom)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: LcFormula) -> Self {
        LcFormula::Not(Box::new(f))
    }

    pub fn and(a: LcFormula, b: LcFormula) -> Self {
        LcFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: LcFormula, b: LcFormula) -> Self {
        LcFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn next(f: LcFormula) -> Self {
        LcFormula::Next(Box::new(f))
    }

    pub fn finally(f: LcFormula) -> Self {
        LcFormula::Finally(Box::new(f))
    }

    pub fn globally(f: LcFormula) -> Self {
        LcFormula::Globally(Box::new(f))
    }

    pub fn until(a: LcFormula, b: LcFormula) -> Self {
        LcFormula::Until(Box::new(a), Box::new(b))
    }

    pub fn release(a: LcFormula, b: LcFormula) -> Self {
        LcFormula::Release(Box::new(a), Box::new(b))
    }

    pub fn is_nnf(&self) -> bool {
        use LcFormula::*;
        match self {
            Prop(_) | NegProp(_) | Client(_) => true,
            Not(_) => false,
            Next(a) | Finally(a) | Globally(a) => a.is_nnf(),
            And(a, b) | Or(a, b) | Until(a, b) | Release(a, b) => a.is_nnf() && b.is_nnf(),
        }
    }

    pub fn depth(&self) -> usize {
        use LcFormula::*;
        match self {
            Prop(_) | NegProp(_) | Client(_) => 1,
            Not(a) | Next(a) | Finally(a) | Globally(a) => 1 + a.depth(),
            And(a, b) | Or(a, b) | Until(a, b) | Release(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Transition names used as propositions.
    pub fn transition_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut out, &mut BTreeSet::new());
        out
    }

    /// Place names used by counting atoms.
    pub fn place_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut BTreeSet::new(), &mut out);
        out
    }

    fn collect(&self, trans: &mut BTreeSet<String>, places: &mut BTreeSet<String>) {
        use LcFormula::*;
        match self {
            Prop(t) | NegProp(t) => {
                trans.insert(t.clone());
            }
            Client(a) => places.extend(a.places().into_iter().map(str::to_string)),
            Not(a) | Next(a) | Finally(a) | Globally(a) => a.collect(trans, places),
            And(a, b) | Or(a, b) | Until(a, b) | Release(a, b) => {
                a.collect(trans, places);
                b.collect(trans, places);
            }
        }
    }

    fn precedence(&self) -> u8 {
        use LcFormula::*;
        match self {
            Until(..) | Release(..) => 1,
            Or(..) => 2,
            And(..) => 3,
            Not(_) | Next(_) | Finally(_) | Globally(_) => 4,
            Prop(_) | NegProp(_) | Client(_) => 5,
        }
    }
}

impl fmt::Display for ClientAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClientAtom::CountGt(p, c) => write!(f, "(#x>{c}){p}(x)"),
            ClientAtom::CountLe(p, c) => write!(f, "(#x<={c}){p}(x)"),
            ClientAtom::CmpGt(p, q) => write!(f, "(#x){p}(x)>{q}(x)"),
            ClientAtom::CmpLe(p, q) => write!(f, "(#x){p}(x)<={q}(x)"),
        }
    }
}

impl fmt::Display for LcFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use LcFormula::*;
        let wrap = |f: &mut fmt::Formatter<'_>, child: &LcFormula, parens: bool| {
            if parens {
                write!(f, "({child})")
            } else {
                write!(f, "{child}")
            }
        };
        let prec = self.precedence();
        match self {
            Prop(t) => write!(f, "{t}"),
            NegProp(t) => write!(f, "!{t}"),
            Client(a) => write!(f, "{a}"),
            Not(a) | Next(a) | Finally(a) | Globally(a) => {
                let op = match self {
                    Not(_) => "!",
                    Next(_) => "X ",
                    Finally(_) => "F ",
                    _ => "G ",
                };
                write!(f, "{op}")?;
                wrap(f, a, a.precedence() < prec)
            }
            And(a, b) | Or(a, b) | Until(a, b) | Release(a, b) => {
                let op = match self {
                    And(..) => " & ",
                    Or(..) => " | ",
                    Until(..) => " U ",
                    _ => " R ",
                };
                // binary operators associate to the right
                wrap(f, a, a.precedence() <= prec)?;
                write!(f, "{op}")?;
                wrap(f, b, b.precedence() < prec)
            }
        }
    }
}

/// A property as read from the user, with the names it references.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedProperty {
    pub text: String,
    pub formula: LcFormula,
    pub places: BTreeSet<String>,
    pub transitions: BTreeSet<String>,
}

impl ParsedProperty {
    pub fn from_formula(formula: LcFormula) -> Self {
        ParsedProperty {
            text: formula.to_string(),
            places: formula.place_names(),
            transitions: formula.transition_names(),
            formula,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at column {column}: {message}")]
pub struct LcParseError {
    /// 1-based character column
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    Hash,
    Amp,
    Bar,
    Bang,
    Gt,
    Le,
    Nat(u64),
    Ident(String),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Hash => write!(f, "`#`"),
            Tok::Amp => write!(f, "`&`"),
            Tok::Bar => write!(f, "`|`"),
            Tok::Bang => write!(f, "`!`"),
            Tok::Gt => write!(f, "`>`"),
            Tok::Le => write!(f, "`<=`"),
            Tok::Nat(n) => write!(f, "number `{n}`"),
            Tok::Ident(s) => write!(f, "`{s}`"),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '-' | '\'')
}

fn lex(input: &str) -> Result<Vec<(usize, Tok)>, LcParseError> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '#' => Some(Tok::Hash),
            '&' => Some(Tok::Amp),
            '|' => Some(Tok::Bar),
            '!' => Some(Tok::Bang),
            '>' => Some(Tok::Gt),
            _ => None,
        };
        if let Some(t) = single {
            out.push((col, t));
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c == '<' {
            if chars.get(i + 1) == Some(&'=') {
                out.push((col, Tok::Le));
                i += 2;
            } else {
                return Err(LcParseError {
                    column: col,
                    message: "expected `<=`".into(),
                });
            }
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| LcParseError {
                column: col,
                message: format!("number `{s}` out of range"),
            })?;
            out.push((col, Tok::Nat(n)));
        } else if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_continue(chars[i]) {
                i += 1;
            }
            out.push((col, Tok::Ident(chars[start..i].iter().collect())));
        } else {
            return Err(LcParseError {
                column: col,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Cmp {
    Gt,
    Le,
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(c, _)| *c)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, LcParseError> {
        Err(LcParseError {
            column: self.col(),
            message: message.into(),
        })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, LcParseError> {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {t}")),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), LcParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.unexpected(&tok.to_string())
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn ident(&mut self, what: &str) -> Result<String, LcParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !matches!(s.as_str(), "X" | "F" | "G" | "U") => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.unexpected(what),
        }
    }

    fn formula(&mut self) -> Result<LcFormula, LcParseError> {
        let left = self.disj()?;
        if self.is_keyword("U") {
            self.pos += 1;
            let right = self.formula()?;
            return Ok(LcFormula::until(left, right));
        }
        Ok(left)
    }

    fn disj(&mut self) -> Result<LcFormula, LcParseError> {
        let mut items = vec![self.conj()?];
        while self.peek() == Some(&Tok::Bar) {
            self.pos += 1;
            items.push(self.conj()?);
        }
        Ok(fold_right(items, LcFormula::or))
    }

    fn conj(&mut self) -> Result<LcFormula, LcParseError> {
        let mut items = vec![self.unary()?];
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            items.push(self.unary()?);
        }
        Ok(fold_right(items, LcFormula::and))
    }

    fn unary(&mut self) -> Result<LcFormula, LcParseError> {
        let ctor: Option<fn(LcFormula) -> LcFormula> = match self.peek() {
            Some(Tok::Bang) => Some(LcFormula::not),
            Some(Tok::Ident(s)) if s == "X" => Some(LcFormula::next),
            Some(Tok::Ident(s)) if s == "F" => Some(LcFormula::finally),
            Some(Tok::Ident(s)) if s == "G" => Some(LcFormula::globally),
            _ => None,
        };
        match ctor {
            Some(make) => {
                self.pos += 1;
                Ok(make(self.unary()?))
            }
            None => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<LcFormula, LcParseError> {
        match self.peek() {
            Some(Tok::LParen) if self.peek_at(1) == Some(&Tok::Hash) => self.counting(),
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::Ident(_)) => Ok(LcFormula::Prop(self.ident("a proposition")?)),
            _ => self.unexpected("a formula"),
        }
    }

    fn cmp(&mut self) -> Option<Cmp> {
        let c = match self.peek() {
            Some(Tok::Gt) => Cmp::Gt,
            Some(Tok::Le) => Cmp::Le,
            _ => return None,
        };
        self.pos += 1;
        Some(c)
    }

    /// `IDENT "(" var ")"`
    fn applied(&mut self, var: &str) -> Result<String, LcParseError> {
        let name = self.ident("a place name")?;
        self.expect(Tok::LParen)?;
        let col = self.col();
        let v = self.ident("the bound variable")?;
        if v != var {
            return Err(LcParseError {
                column: col,
                message: format!("expected bound variable `{var}`, found `{v}`"),
            });
        }
        self.expect(Tok::RParen)?;
        Ok(name)
    }

    fn counting(&mut self) -> Result<LcFormula, LcParseError> {
        self.expect(Tok::LParen)?;
        self.expect(Tok::Hash)?;
        let var = self.ident("a bound variable")?;
        if let Some(cmp) = self.cmp() {
            let c = match self.peek() {
                Some(Tok::Nat(n)) => *n,
                _ => return self.unexpected("a natural number"),
            };
            self.pos += 1;
            self.expect(Tok::RParen)?;
            let place = self.applied(&var)?;
            let atom = match cmp {
                Cmp::Gt => ClientAtom::CountGt(place, c),
                Cmp::Le => ClientAtom::CountLe(place, c),
            };
            return Ok(LcFormula::Client(atom));
        }
        self.expect(Tok::RParen)?;
        let mut names = vec![self.applied(&var)?];
        let dir_col = self.col();
        let Some(dir) = self.cmp() else {
            return self.unexpected("`>` or `<=`");
        };
        names.push(self.applied(&var)?);
        loop {
            let col = self.col();
            match self.cmp() {
                None => break,
                Some(c) if c != dir => {
                    return Err(LcParseError {
                        column: col,
                        message: format!(
                        "comparison chain mixes `>` and `<=` (chain started at column {dir_col})"
                    ),
                    })
                }
                Some(_) => names.push(self.applied(&var)?),
            }
        }
        let atoms: Vec<LcFormula> = names
            .windows(2)
            .map(|w| {
                let (p, q) = (w[0].clone(), w[1].clone());
                LcFormula::Client(match dir {
                    Cmp::Gt => ClientAtom::CmpGt(p, q),
                    Cmp::Le => ClientAtom::CmpLe(p, q),
                })
            })
            .collect();
        Ok(fold_right(atoms, LcFormula::and))
    }
}

fn fold_right(mut items: Vec<LcFormula>, op: fn(LcFormula, LcFormula) -> LcFormula) -> LcFormula {
    let mut acc = items.pop().expect("at least one operand");
    while let Some(prev) = items.pop() {
        acc = op(prev, acc);
    }
    acc
}

/// Parses a property in the surface syntax.
pub fn parse_lc(input: &str) -> Result<ParsedProperty, LcParseError> {
    let toks = lex(input)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end_col: input.chars().count() + 1,
    };
    let formula = p.formula()?;
    if p.peek().is_some() {
        return p.unexpected("end of input");
    }
    Ok(ParsedProperty {
        text: input.to_string(),
        places: formula.place_names(),
        transitions: formula.transition_names(),
        formula,
    })
}

pub fn negate(f: LcFormula) -> LcFormula {
    LcFormula::not(f)
}

/// Pushes every negation down to the atoms. The result contains no `Not`.
pub fn to_nnf(f: &LcFormula) -> LcFormula {
    nnf(f, false)
}

fn nnf(f: &LcFormula, neg: bool) -> LcFormula {
    use LcFormula::*;
    match (f, neg) {
        (Prop(t), false) => Prop(t.clone()),
        (Prop(t), true) => NegProp(t.clone()),
        (NegProp(t), false) => NegProp(t.clone()),
        (NegProp(t), true) => Prop(t.clone()),
        (Client(a), false) => Client(a.clone()),
        (Client(a), true) => Client(a.complement()),
        (Not(a), _) => nnf(a, !neg),
        (And(a, b), false) => LcFormula::and(nnf(a, false), nnf(b, false)),
        (And(a, b), true) => LcFormula::or(nnf(a, true), nnf(b, true)),
        (Or(a, b), false) => LcFormula::or(nnf(a, false), nnf(b, false)),
        (Or(a, b), true) => LcFormula::and(nnf(a, true), nnf(b, true)),
        (Next(a), _) => LcFormula::next(nnf(a, neg)),
        (Finally(a), false) => LcFormula::finally(nnf(a, false)),
        (Finally(a), true) => LcFormula::globally(nnf(a, true)),
        (Globally(a), false) => LcFormula::globally(nnf(a, false)),
        (Globally(a), true) => LcFormula::finally(nnf(a, true)),
        (Until(a, b), false) => LcFormula::until(nnf(a, false), nnf(b, false)),
        (Until(a, b), true) => LcFormula::release(nnf(a, true), nnf(b, true)),
        (Release(a, b), false) => LcFormula::release(nnf(a, false), nnf(b, false)),
        (Release(a, b), true) => LcFormula::until(nnf(a, true), nnf(b, true)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> LcFormula {
        parse_lc(s).unwrap().formula
    }

    fn cmp_gt(a: &str, b: &str) -> LcFormula {
        LcFormula::Client(ClientAtom::CmpGt(a.into(), b.into()))
    }

    #[test]
    fn finally_comparison() {
        assert_eq!(
            p("F(#x)p1(x)>p0(x)"),
            LcFormula::finally(cmp_gt("p1", "p0"))
        );
    }

    #[test]
    fn globally_conjunction_is_right_nested() {
        let expected = LcFormula::globally(LcFormula::and(
            LcFormula::prop("t0"),
            LcFormula::and(LcFormula::prop("t1"), LcFormula::prop("t7")),
        ));
        assert_eq!(p("G (t0 & t1 & t7)"), expected);
    }

    #[test]
    fn until_binds_loosest() {
        let expected = LcFormula::until(
            LcFormula::prop("a"),
            LcFormula::or(LcFormula::prop("b"), LcFormula::prop("c")),
        );
        assert_eq!(p("a U b | c"), expected);
        // right associative
        assert_eq!(
            p("a U b U c"),
            LcFormula::until(
                LcFormula::prop("a"),
                LcFormula::until(LcFormula::prop("b"), LcFormula::prop("c"))
            )
        );
    }

    #[test]
    fn chains_desugar_to_conjunctions() {
        let f = p("G(#x)p2(x)<=p1(x)<=p0(x)");
        let le = |a: &str, b: &str| LcFormula::Client(ClientAtom::CmpLe(a.into(), b.into()));
        assert_eq!(
            f,
            LcFormula::globally(LcFormula::and(le("p2", "p1"), le("p1", "p0")))
        );
        let err = parse_lc("(#x)a(x)<=b(x)>c(x)").unwrap_err();
        assert!(err.message.contains("mixes"), "{err}");
        assert_eq!(err.column, 15);
    }

    #[test]
    fn counting_sentences() {
        let f = p("F(#x<=1)p_2(x)& (#x > 3) p_1(x)");
        assert_eq!(
            f,
            LcFormula::and(
                LcFormula::finally(LcFormula::Client(ClientAtom::CountLe("p_2".into(), 1))),
                LcFormula::Client(ClientAtom::CountGt("p_1".into(), 3)),
            )
        );
        let prop = parse_lc("F(#x<=1)p_2(x)& t_0").unwrap();
        assert_eq!(prop.places, BTreeSet::from(["p_2".to_string()]));
        assert_eq!(prop.transitions, BTreeSet::from(["t_0".to_string()]));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_lc("F (t0 &").unwrap_err();
        assert_eq!(err.column, 8);
        let err = parse_lc("t0 t1").unwrap_err();
        assert_eq!(err.column, 4);
        let err = parse_lc("(#x>1)p(y)").unwrap_err();
        assert_eq!(err.column, 9);
        assert!(parse_lc("(#x<1)p(x)").is_err());
        assert!(parse_lc("").is_err());
        assert!(parse_lc("U").is_err());
    }

    #[test]
    fn negate_wraps() {
        let q = LcFormula::prop("q");
        assert_eq!(negate(q.clone()), LcFormula::not(q.clone()));
        assert_eq!(
            negate(LcFormula::not(q.clone())),
            LcFormula::not(LcFormula::not(q.clone()))
        );
        let fx = LcFormula::finally(q);
        assert_eq!(negate(fx.clone()), LcFormula::not(fx));
    }

    #[test]
    fn nnf_dualities() {
        let le = LcFormula::Client(ClientAtom::CmpLe("p1".into(), "p0".into()));
        assert_eq!(
            to_nnf(&negate(LcFormula::finally(cmp_gt("p1", "p0")))),
            LcFormula::globally(le)
        );
        let until = LcFormula::until(LcFormula::prop("a"), LcFormula::prop("b"));
        assert_eq!(
            to_nnf(&negate(until)),
            LcFormula::release(
                LcFormula::NegProp("a".into()),
                LcFormula::NegProp("b".into())
            )
        );
        assert_eq!(
            to_nnf(&negate(LcFormula::Client(ClientAtom::CountLe(
                "p2".into(),
                1
            )))),
            LcFormula::Client(ClientAtom::CountGt("p2".into(), 1))
        );
        assert_eq!(
            to_nnf(&negate(LcFormula::next(LcFormula::prop("a")))),
            LcFormula::next(LcFormula::NegProp("a".into()))
        );
    }

    pub(crate) fn arb_formula() -> impl Strategy<Value = LcFormula> {
        let leaf = prop_oneof![
            prop::sample::select(vec!["t0", "t1", "t2"]).prop_map(LcFormula::prop),
            (prop::sample::select(vec!["p0", "p1", "p2"]), 0u64..3)
                .prop_map(|(p, c)| LcFormula::Client(ClientAtom::CountGt(p.into(), c))),
            (prop::sample::select(vec!["p0", "p1", "p2"]), 0u64..3)
                .prop_map(|(p, c)| LcFormula::Client(ClientAtom::CountLe(p.into(), c))),
            (
                prop::sample::select(vec!["p0", "p1", "p2"]),
                prop::sample::select(vec!["p0", "p1", "p2"])
            )
                .prop_map(|(p, q)| LcFormula::Client(ClientAtom::CmpGt(p.into(), q.into()))),
            (
                prop::sample::select(vec!["p0", "p1", "p2"]),
                prop::sample::select(vec!["p0", "p1", "p2"])
            )
                .prop_map(|(p, q)| LcFormula::Client(ClientAtom::CmpLe(p.into(), q.into()))),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(LcFormula::not),
                inner.clone().prop_map(LcFormula::next),
                inner.clone().prop_map(LcFormula::finally),
                inner.clone().prop_map(LcFormula::globally),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| LcFormula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| LcFormula::or(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| LcFormula::until(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn nnf_has_no_negation(f in arb_formula()) {
            prop_assert!(to_nnf(&f).is_nnf());
        }

        #[test]
        fn double_negation_is_involutive(f in arb_formula()) {
            prop_assert_eq!(to_nnf(&negate(negate(f.clone()))), to_nnf(&f));
        }

        #[test]
        fn printing_is_a_parse_fixed_point(f in arb_formula()) {
            let printed = f.to_string();
            let reparsed = parse_lc(&printed).unwrap().formula;
            prop_assert_eq!(&reparsed, &f);
            prop_assert_eq!(reparsed.to_string(), printed);
        }
    }
}
