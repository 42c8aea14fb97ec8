//! Bounded encoding of a net and a property for one micro-step (λ, κ).
//!
//! The script asserts the κ-capped unrolling of the net over λ steps and the
//! property under every run shape: either no loop, or a back edge from the
//! last state s_λ to some s_l. Each run shape gets a selector boolean so the
//! decoder can tell which disjunct the model satisfies.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{ClientAtom, LcFormula};
use crate::net::PetriNet;
use crate::smt::{escape_name, Step, Term, Var};

/// How `G` is read on a run without a back edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GNoLoop {
    /// conjunction over the remaining prefix
    #[default]
    Prefix,
    /// never holds
    False,
}

/// How transition propositions are read at the last instant λ, where no
/// step-λ transition exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trailing {
    /// `t` is false and `!t` is true
    #[default]
    #[serde(rename = "strict")]
    StrictFalse,
    /// `t` is a free boolean per transition
    Unconstrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct EncodeOptions {
    pub g_noloop: GNoLoop,
    pub trailing: Trailing,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("unknown place `{name}` (known places: {candidates})")]
    UnknownPlace { name: String, candidates: String },
    #[error("unknown transition `{name}` (known transitions: {candidates})")]
    UnknownTransition { name: String, candidates: String },
    #[error("internal error: formula is not in negation normal form")]
    NotNnf,
    #[error("position {i} is beyond the horizon {lambda}")]
    OutOfRange { i: usize, lambda: usize },
}

/// Checks that every name a formula mentions exists in the net.
pub fn resolve_names(net: &PetriNet, f: &LcFormula) -> Result<(), EncodeError> {
    for p in f.place_names() {
        if net.place_index(&p).is_none() {
            return Err(EncodeError::UnknownPlace {
                name: p,
                candidates: net.places().join(", "),
            });
        }
    }
    for t in f.transition_names() {
        if net.transition_index(&t).is_none() {
            return Err(EncodeError::UnknownTransition {
                name: t,
                candidates: net.transitions().join(", "),
            });
        }
    }
    Ok(())
}

/// Bidirectional map between solver symbols and net variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    by_symbol: BTreeMap<String, Var>,
    by_var: BTreeMap<Var, String>,
}

impl SymbolTable {
    pub fn symbol(&self, v: &Var) -> Option<&str> {
        self.by_var.get(v).map(String::as_str)
    }

    pub fn var(&self, symbol: &str) -> Option<Var> {
        self.by_symbol.get(symbol).copied()
    }

    pub fn len(&self) -> usize {
        self.by_var.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_var.is_empty()
    }

    fn insert(&mut self, v: Var, s: String) {
        self.by_symbol.insert(s.clone(), v);
        self.by_var.insert(v, s);
    }
}

pub fn symbol_name(net: &PetriNet, v: &Var) -> String {
    match *v {
        Var::Place { place, step } => format!("p_{}_{step}", escape_name(&net.places()[place])),
        Var::Trans { transition, step } => {
            format!("t_{}_{step}", escape_name(&net.transitions()[transition]))
        }
        Var::SelectNoLoop => "sel_noloop".to_string(),
        Var::SelectLoop(l) => format!("sel_loop_{l}"),
    }
}

/// A complete solver script for one micro-step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmtScript {
    pub logic: String,
    pub lambda: usize,
    pub kappa: u64,
    /// declared symbols in canonical order
    pub declarations: Vec<(String, Var)>,
    pub assertions: Vec<Term>,
    pub symbols: SymbolTable,
}

impl SmtScript {
    /// Symbols requested with `get-value`, in declaration order.
    pub fn tracked(&self) -> impl Iterator<Item = &str> {
        self.declarations.iter().map(|(s, _)| s.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "; lambda={} kappa={}", self.lambda, self.kappa);
        out.push_str("(set-option :produce-models true)\n");
        let _ = writeln!(out, "(set-logic {})", self.logic);
        for (s, v) in &self.declarations {
            let sort = if v.is_int() { "Int" } else { "Bool" };
            let _ = writeln!(out, "(declare-const {s} {sort})");
        }
        let name = |v: &Var| {
            self.symbols
                .symbol(v)
                .expect("every variable is declared")
                .to_string()
        };
        for a in &self.assertions {
            out.push_str("(assert ");
            a.render(&name, &mut out);
            out.push_str(")\n");
        }
        out.push_str("(check-sat)\n");
        if !self.declarations.is_empty() {
            out.push_str("(get-value (");
            for (i, (s, _)) in self.declarations.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(s);
            }
            out.push_str("))\n");
        }
        out
    }
}

fn kappa_term(kappa: u64) -> Term {
    Term::int(i64::try_from(kappa).unwrap_or(i64::MAX))
}

fn nat_term(n: u64) -> Term {
    Term::int(i64::try_from(n).unwrap_or(i64::MAX))
}

/// `p@0 = M₀(p)` and `0 <= p@0 <= κ` for every place.
pub fn encode_init(net: &PetriNet, kappa: u64) -> Vec<Term> {
    let mut out: Vec<Term> = (0..net.places().len())
        .map(|p| Term::eq(Term::place(p, 0), nat_term(net.initial_marking().get(p))))
        .collect();
    out.extend(encode_kappa(net, 0, kappa));
    out
}

/// `0 <= p@i` and `p@i <= κ` for every place.
pub fn encode_kappa(net: &PetriNet, i: usize, kappa: u64) -> Vec<Term> {
    (0..net.places().len())
        .flat_map(|p| {
            [
                Term::ge(Term::place(p, i), Term::int(0)),
                Term::le(Term::place(p, i), kappa_term(kappa)),
            ]
        })
        .collect()
}

fn pre_condition(net: &PetriNet, t: usize, from: usize) -> Term {
    Term::and(
        net.pre_set(t)
            .iter()
            .map(|&(p, w)| Term::ge(Term::place(p, from), nat_term(w))),
    )
}

fn post_condition(effect: &[i64], from: usize, to: usize) -> Term {
    Term::and(
        effect
            .iter()
            .enumerate()
            .map(|(p, &d)| Term::eq(Term::place(p, to), Term::add(Term::place(p, from), d))),
    )
}

/// The three conjuncts of T(s_from, s_to) over transition bank `bank`:
/// enabledness, firability and the one-hot choice of the fired transition.
pub fn transition_relation(net: &PetriNet, from: usize, to: usize, bank: Step) -> [Term; 3] {
    let n = net.transitions().len();
    let effects: Vec<Vec<i64>> = (0..n).map(|t| net.effect(t)).collect();
    let pre: Vec<Term> = (0..n).map(|t| pre_condition(net, t, from)).collect();
    let post: Vec<Term> = (0..n)
        .map(|t| post_condition(&effects[t], from, to))
        .collect();

    let enabled = Term::or(pre.iter().cloned());
    let firability = Term::and((0..n).map(|t| Term::implies(Term::trans(t, bank), pre[t].clone())));
    let next = Term::or((0..n).map(|t| {
        let mut conj = Vec::with_capacity(2 * n);
        for u in 0..n {
            let selector = Term::trans(u, bank);
            conj.push(if u == t {
                selector
            } else {
                Term::not(selector)
            });
        }
        conj.push(post[t].clone());
        // other transitions' updates are excluded unless they coincide with t's
        for u in (0..n).filter(|&u| u != t && effects[u] != effects[t]) {
            conj.push(Term::not(post[u].clone()));
        }
        Term::and(conj)
    }));
    [enabled, firability, next]
}

/// T(s_i, s_{i+1}) using the step-i transition variables.
pub fn encode_transition_relation(net: &PetriNet, i: usize) -> Vec<Term> {
    transition_relation(net, i, i + 1, Step::At(i)).into()
}

/// The back-edge condition lL = T(s_λ, s_l) over the loop bank.
pub fn encode_loop_condition(net: &PetriNet, l: usize, lambda: usize) -> Term {
    Term::and(transition_relation(net, lambda, l, Step::Loop))
}

struct Translator<'a> {
    net: &'a PetriNet,
    lambda: usize,
    loop_to: Option<usize>,
    opts: EncodeOptions,
}

impl Translator<'_> {
    fn place(&self, name: &str) -> Result<usize, EncodeError> {
        self.net
            .place_index(name)
            .ok_or_else(|| EncodeError::UnknownPlace {
                name: name.to_string(),
                candidates: self.net.places().join(", "),
            })
    }

    fn transition(&self, name: &str) -> Result<usize, EncodeError> {
        self.net
            .transition_index(name)
            .ok_or_else(|| EncodeError::UnknownTransition {
                name: name.to_string(),
                candidates: self.net.transitions().join(", "),
            })
    }

    fn prop(&self, name: &str, i: usize) -> Result<Term, EncodeError> {
        let t = self.transition(name)?;
        Ok(if i < self.lambda {
            Term::trans(t, Step::At(i))
        } else {
            match self.opts.trailing {
                Trailing::StrictFalse => Term::FALSE,
                Trailing::Unconstrained => Term::trans(t, Step::At(self.lambda)),
            }
        })
    }

    fn client(&self, a: &ClientAtom, i: usize) -> Result<Term, EncodeError> {
        Ok(match a {
            ClientAtom::CountGt(p, c) => Term::gt(Term::place(self.place(p)?, i), nat_term(*c)),
            ClientAtom::CountLe(p, c) => Term::le(Term::place(self.place(p)?, i), nat_term(*c)),
            ClientAtom::CmpGt(p, q) => Term::gt(
                Term::place(self.place(p)?, i),
                Term::place(self.place(q)?, i),
            ),
            ClientAtom::CmpLe(p, q) => Term::le(
                Term::place(self.place(p)?, i),
                Term::place(self.place(q)?, i),
            ),
        })
    }

    /// First index a future-looking operator at `i` can reach.
    fn horizon_start(&self, i: usize) -> usize {
        self.loop_to.map_or(i, |l| l.min(i))
    }

    fn all(&self, f: &LcFormula, range: impl Iterator<Item = usize>) -> Result<Term, EncodeError> {
        Ok(Term::and(
            range
                .map(|j| self.tr(f, j))
                .collect::<Result<Vec<_>, _>>()?,
        ))
    }

    fn globally_noloop(&self, f: &LcFormula, i: usize) -> Result<Term, EncodeError> {
        match self.opts.g_noloop {
            GNoLoop::Prefix => self.all(f, i..=self.lambda),
            GNoLoop::False => Ok(Term::FALSE),
        }
    }

    fn tr(&self, f: &LcFormula, i: usize) -> Result<Term, EncodeError> {
        use LcFormula::*;
        let lambda = self.lambda;
        Ok(match f {
            Prop(t) => self.prop(t, i)?,
            NegProp(t) => Term::not(self.prop(t, i)?),
            Client(a) => self.client(a, i)?,
            Not(_) => return Err(EncodeError::NotNnf),
            And(a, b) => Term::and([self.tr(a, i)?, self.tr(b, i)?]),
            Or(a, b) => Term::or([self.tr(a, i)?, self.tr(b, i)?]),
            Next(a) => {
                if i < lambda {
                    self.tr(a, i + 1)?
                } else {
                    match self.loop_to {
                        Some(l) => self.tr(a, l)?,
                        None => Term::FALSE,
                    }
                }
            }
            Finally(a) => Term::or(
                (self.horizon_start(i)..=lambda)
                    .map(|j| self.tr(a, j))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            Globally(a) => match self.loop_to {
                Some(_) => self.all(a, self.horizon_start(i)..=lambda)?,
                None => self.globally_noloop(a, i)?,
            },
            Until(a, b) => {
                let mut disj = Vec::new();
                for j in i..=lambda {
                    disj.push(Term::and([self.tr(b, j)?, self.all(a, i..j)?]));
                }
                if let Some(l) = self.loop_to {
                    for j in l..i {
                        disj.push(Term::and([
                            self.tr(b, j)?,
                            self.all(a, i..=lambda)?,
                            self.all(a, l..j)?,
                        ]));
                    }
                }
                Term::or(disj)
            }
            Release(a, b) => {
                let mut disj = vec![match self.loop_to {
                    Some(_) => self.all(b, self.horizon_start(i)..=lambda)?,
                    None => self.globally_noloop(b, i)?,
                }];
                for j in i..=lambda {
                    disj.push(Term::and([self.tr(a, j)?, self.all(b, i..=j)?]));
                }
                if let Some(l) = self.loop_to {
                    for j in l..i {
                        disj.push(Term::and([
                            self.tr(a, j)?,
                            self.all(b, i..=lambda)?,
                            self.all(b, l..=j)?,
                        ]));
                    }
                }
                Term::or(disj)
            }
        })
    }
}

/// Bounded translation of an NNF formula at instant `i`, for a run without a
/// back edge (`loop_to = None`) or with a back edge to `l`.
pub fn translate(
    net: &PetriNet,
    psi: &LcFormula,
    i: usize,
    lambda: usize,
    loop_to: Option<usize>,
    opts: EncodeOptions,
) -> Result<Term, EncodeError> {
    if i > lambda {
        return Err(EncodeError::OutOfRange { i, lambda });
    }
    if let Some(l) = loop_to {
        if l > lambda {
            return Err(EncodeError::OutOfRange { i: l, lambda });
        }
    }
    Translator {
        net,
        lambda,
        loop_to,
        opts,
    }
    .tr(psi, i)
}

/// The unrolled net: initial state, then one transition and one κ cap per step.
pub fn encode_unrolling(net: &PetriNet, lambda: usize, kappa: u64) -> Vec<Term> {
    let mut out = encode_init(net, kappa);
    for i in 0..lambda {
        out.extend(encode_transition_relation(net, i));
        out.extend(encode_kappa(net, i + 1, kappa));
    }
    out
}

fn declaration_key(net: &PetriNet, v: &Var) -> (u8, String, u8, usize) {
    match *v {
        Var::Place { place, step } => (0, net.places()[place].clone(), 0, step),
        Var::Trans { transition, step } => {
            let (s, n) = match step {
                Step::At(i) => (0, i),
                Step::Loop => (1, 0),
            };
            (1, net.transitions()[transition].clone(), s, n)
        }
        Var::SelectNoLoop => (2, String::new(), 0, 0),
        Var::SelectLoop(l) => (2, String::new(), 1, l),
    }
}

/// Builds the full script for micro-step (λ, κ). `psi` must be in NNF.
pub fn assemble(
    net: &PetriNet,
    psi: &LcFormula,
    lambda: usize,
    kappa: u64,
    opts: EncodeOptions,
) -> Result<SmtScript, EncodeError> {
    resolve_names(net, psi)?;
    if !psi.is_nnf() {
        return Err(EncodeError::NotNnf);
    }
    let mut assertions = encode_unrolling(net, lambda, kappa);

    let loops: Vec<Term> = (0..=lambda)
        .map(|l| encode_loop_condition(net, l, lambda))
        .collect();
    let no_loop = Term::and([
        Term::not(Term::or(loops.iter().cloned())),
        translate(net, psi, 0, lambda, None, opts)?,
    ]);
    assertions.push(Term::implies(Term::var(Var::SelectNoLoop), no_loop));
    for (l, cond) in loops.into_iter().enumerate() {
        let with_loop = Term::and([cond, translate(net, psi, 0, lambda, Some(l), opts)?]);
        assertions.push(Term::implies(Term::var(Var::SelectLoop(l)), with_loop));
    }
    assertions.push(Term::or(
        std::iter::once(Term::var(Var::SelectNoLoop))
            .chain((0..=lambda).map(|l| Term::var(Var::SelectLoop(l)))),
    ));

    let mut vars = Vec::new();
    for a in &assertions {
        a.collect_vars(&mut vars);
    }
    vars.sort_by_cached_key(|v| declaration_key(net, v));
    vars.dedup();
    let mut symbols = SymbolTable::default();
    let declarations = vars
        .into_iter()
        .map(|v| {
            let s = symbol_name(net, &v);
            symbols.insert(v, s.clone());
            (s, v)
        })
        .collect();
    Ok(SmtScript {
        logic: "QF_LIA".to_string(),
        lambda,
        kappa,
        declarations,
        assertions,
        symbols,
    })
}
