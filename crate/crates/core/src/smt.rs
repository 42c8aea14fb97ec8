//! Boolean/linear-integer terms and SMT-LIB 2 rendering.

use std::fmt;

/// Which step a transition variable belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    At(usize),
    /// the bank used by the loop-back condition
    Loop,
}

/// A solver variable, identified by net indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// tokens in place at an instant (Int)
    Place { place: usize, step: usize },
    /// transition fires at a step (Bool)
    Trans { transition: usize, step: Step },
    /// selects the no-loop disjunct (Bool)
    SelectNoLoop,
    /// selects the loop-back-to-`l` disjunct (Bool)
    SelectLoop(usize),
}

impl Var {
    pub fn is_int(&self) -> bool {
        matches!(self, Var::Place { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Const(bool),
    Var(Var),
    Int(i64),
    Not(Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
    Implies(Box<Term>, Box<Term>),
    Eq(Box<Term>, Box<Term>),
    Le(Box<Term>, Box<Term>),
    Ge(Box<Term>, Box<Term>),
    Gt(Box<Term>, Box<Term>),
    Add(Box<Term>, i64),
}

impl Term {
    pub const TRUE: Term = Term::Const(true);
    pub const FALSE: Term = Term::Const(false);

    pub fn var(v: Var) -> Term {
        Term::Var(v)
    }

    pub fn place(place: usize, step: usize) -> Term {
        Term::Var(Var::Place { place, step })
    }

    pub fn trans(transition: usize, step: Step) -> Term {
        Term::Var(Var::Trans { transition, step })
    }

    pub fn int(n: i64) -> Term {
        Term::Int(n)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(t: Term) -> Term {
        match t {
            Term::Const(b) => Term::Const(!b),
            Term::Not(inner) => *inner,
            other => Term::Not(Box::new(other)),
        }
    }

    /// Conjunction with constant folding and flattening.
    pub fn and(items: impl IntoIterator<Item = Term>) -> Term {
        let mut out = Vec::new();
        for t in items {
            match t {
                Term::Const(true) => {}
                Term::Const(false) => return Term::FALSE,
                Term::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Term::TRUE,
            1 => out.pop().expect("one item"),
            _ => Term::And(out),
        }
    }

    /// Disjunction with constant folding and flattening.
    pub fn or(items: impl IntoIterator<Item = Term>) -> Term {
        let mut out = Vec::new();
        for t in items {
            match t {
                Term::Const(false) => {}
                Term::Const(true) => return Term::TRUE,
                Term::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Term::FALSE,
            1 => out.pop().expect("one item"),
            _ => Term::Or(out),
        }
    }

    pub fn implies(a: Term, b: Term) -> Term {
        match (a, b) {
            (Term::Const(false), _) | (_, Term::Const(true)) => Term::TRUE,
            (Term::Const(true), b) => b,
            (a, Term::Const(false)) => Term::not(a),
            (a, b) => Term::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn eq(a: Term, b: Term) -> Term {
        Term::Eq(Box::new(a), Box::new(b))
    }

    pub fn le(a: Term, b: Term) -> Term {
        Term::Le(Box::new(a), Box::new(b))
    }

    pub fn ge(a: Term, b: Term) -> Term {
        Term::Ge(Box::new(a), Box::new(b))
    }

    pub fn gt(a: Term, b: Term) -> Term {
        Term::Gt(Box::new(a), Box::new(b))
    }

    /// `a + delta`; a zero delta returns `a` unchanged.
    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Term, delta: i64) -> Term {
        if delta == 0 {
            a
        } else {
            Term::Add(Box::new(a), delta)
        }
    }

    /// Every variable occurring in the term, in first-occurrence order.
    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Const(_) | Term::Int(_) => {}
            Term::Var(v) => out.push(*v),
            Term::Not(a) | Term::Add(a, _) => a.collect_vars(out),
            Term::And(xs) | Term::Or(xs) => xs.iter().for_each(|x| x.collect_vars(out)),
            Term::Implies(a, b)
            | Term::Eq(a, b)
            | Term::Le(a, b)
            | Term::Ge(a, b)
            | Term::Gt(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Renders the term with `name` resolving variables to solver symbols.
    pub fn render(&self, name: &dyn Fn(&Var) -> String, out: &mut String) {
        use std::fmt::Write as _;
        let bin = |op: &str, a: &Term, b: &Term, out: &mut String| {
            out.push('(');
            out.push_str(op);
            out.push(' ');
            a.render(name, out);
            out.push(' ');
            b.render(name, out);
            out.push(')');
        };
        match self {
            Term::Const(true) => out.push_str("true"),
            Term::Const(false) => out.push_str("false"),
            Term::Var(v) => out.push_str(&name(v)),
            Term::Int(n) if *n < 0 => {
                let _ = write!(out, "(- {})", n.unsigned_abs());
            }
            Term::Int(n) => {
                let _ = write!(out, "{n}");
            }
            Term::Not(a) => {
                out.push_str("(not ");
                a.render(name, out);
                out.push(')');
            }
            Term::And(xs) | Term::Or(xs) => {
                out.push_str(if matches!(self, Term::And(_)) {
                    "(and"
                } else {
                    "(or"
                });
                for x in xs {
                    out.push(' ');
                    x.render(name, out);
                }
                out.push(')');
            }
            Term::Implies(a, b) => bin("=>", a, b, out),
            Term::Eq(a, b) => bin("=", a, b, out),
            Term::Le(a, b) => bin("<=", a, b, out),
            Term::Ge(a, b) => bin(">=", a, b, out),
            Term::Gt(a, b) => bin(">", a, b, out),
            Term::Add(a, d) => {
                let op = if *d < 0 { "(- " } else { "(+ " };
                out.push_str(op);
                a.render(name, out);
                let _ = write!(out, " {})", d.unsigned_abs());
            }
        }
    }
}

/// Maps a net name into the SMT-LIB simple-symbol alphabet. ASCII letters and
/// digits are kept; every other character `c` becomes `_<hex(c)>_`. The code
/// is prefix-free, so distinct names never collide.
pub fn escape_name(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c);
        } else {
            out.push_str(&format!("_{:x}_", c as u32));
        }
    }
    out
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::At(i) => write!(f, "{i}"),
            Step::Loop => write!(f, "loop"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding() {
        assert_eq!(Term::and([Term::TRUE, Term::TRUE]), Term::TRUE);
        assert_eq!(Term::or([]), Term::FALSE);
        assert_eq!(Term::and([Term::TRUE, Term::FALSE]), Term::FALSE);
        let x = Term::trans(0, Step::At(0));
        assert_eq!(Term::or([Term::FALSE, x.clone()]), x);
        assert_eq!(Term::not(Term::not(x.clone())), x);
        assert_eq!(Term::implies(Term::TRUE, x.clone()), x);
    }

    #[test]
    fn escape_is_injective_on_tricky_names() {
        let names = ["t_0", "t0", "t_5f_0", "t-0", "t.0", "é", "_", "__"];
        let escaped: std::collections::HashSet<_> = names.iter().map(|n| escape_name(n)).collect();
        assert_eq!(escaped.len(), names.len());
        assert_eq!(escape_name("t_0"), "t_5f_0");
        assert_eq!(escape_name("p1"), "p1");
    }

    #[test]
    fn renders_negative_literals_and_offsets() {
        let name = |v: &Var| format!("{v:?}").len().to_string();
        let mut s = String::new();
        Term::int(-3).render(&name, &mut s);
        assert_eq!(s, "(- 3)");
        let mut s = String::new();
        Term::add(Term::int(1), -2).render(&name, &mut s);
        assert_eq!(s, "(- 1 2)");
    }
}
