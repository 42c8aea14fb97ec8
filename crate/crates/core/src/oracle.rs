//! Explicit-state reference: enumerates every bounded run of a micro-step and
//! evaluates the bounded semantics on it directly.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use thiserror::Error;

use crate::encode::{resolve_names, EncodeError, EncodeOptions, GNoLoop, Trailing};
use crate::engine::{schedule, search_formula, BmcVerdict, Mode, Outcome, StepStat};
use crate::logic::{ClientAtom, LcFormula};
use crate::net::{Marking, PetriNet};
use crate::solver::SolverStatus;
use crate::trace::{LoopBack, Trace};

/// Runs and lassos are the same object as engine traces.
pub type BoundedRun = Trace;

/// Ceiling on the `|P|·(κ+1)^|P|` state-space estimate.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;
/// Ceiling on the number of runs actually enumerated.
pub const DEFAULT_MAX_RUNS: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("enumeration for (λ={lambda}, κ={kappa}) exceeds the budget of {budget} (estimate {estimate})")]
    Budget {
        lambda: usize,
        kappa: u64,
        estimate: u64,
        budget: u64,
    },
    #[error("enumeration for (λ={lambda}, κ={kappa}) produces more than {max_runs} runs")]
    TooManyRuns {
        lambda: usize,
        kappa: u64,
        max_runs: u64,
    },
    #[error(transparent)]
    Names(#[from] EncodeError),
}

#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub k_max: usize,
    pub mode: Mode,
    pub encode: EncodeOptions,
    pub budget: u64,
    pub max_runs: u64,
}

impl OracleConfig {
    pub fn new(k_max: usize) -> Self {
        OracleConfig {
            k_max,
            mode: Mode::Witness,
            encode: EncodeOptions::default(),
            budget: DEFAULT_BUDGET,
            max_runs: DEFAULT_MAX_RUNS,
        }
    }
}

fn state_estimate(net: &PetriNet, kappa: u64) -> u64 {
    let places = net.places().len() as u32;
    (kappa + 1)
        .checked_pow(places)
        .and_then(|s| s.checked_mul(places.max(1) as u64))
        .unwrap_or(u64::MAX)
}

/// Every κ-capped firing sequence of length λ from M₀, each paired with no
/// loop and with every valid back edge.
pub fn enumerate_runs(
    net: &PetriNet,
    lambda: usize,
    kappa: u64,
    budget: u64,
    max_runs: u64,
) -> Result<Vec<BoundedRun>, OracleError> {
    let estimate = state_estimate(net, kappa);
    if estimate > budget {
        return Err(OracleError::Budget {
            lambda,
            kappa,
            estimate,
            budget,
        });
    }
    let too_many = OracleError::TooManyRuns {
        lambda,
        kappa,
        max_runs,
    };
    let mut prefixes = Vec::new();
    let mut markings = vec![net.initial_marking().clone()];
    let mut fired = Vec::new();
    if markings[0].within_cap(kappa) {
        dfs(
            net,
            lambda,
            kappa,
            max_runs,
            &mut markings,
            &mut fired,
            &mut prefixes,
        )
        .map_err(|_| too_many.clone())?;
    }

    let mut runs = Vec::new();
    for (markings, fired) in prefixes {
        let last = markings.last().expect("non-empty");
        let mut backs: BTreeMap<usize, String> = BTreeMap::new();
        for t in net.enabled_indices(last).expect("well-sized marking") {
            let next = net.fire_idx(last, t).expect("enabled");
            for (l, m) in markings.iter().enumerate() {
                if *m == next {
                    backs
                        .entry(l)
                        .or_insert_with(|| net.transitions()[t].clone());
                }
            }
        }
        let loops = std::iter::once(None).chain(
            backs
                .into_iter()
                .map(|(to, transition)| Some(LoopBack { to, transition })),
        );
        for loop_back in loops {
            if runs.len() as u64 >= max_runs {
                return Err(too_many.clone());
            }
            runs.push(Trace {
                kappa,
                markings: markings.clone(),
                fired: fired.clone(),
                loop_back,
            });
        }
    }
    Ok(runs)
}

struct OverBudget;

fn dfs(
    net: &PetriNet,
    lambda: usize,
    kappa: u64,
    max_runs: u64,
    markings: &mut Vec<Marking>,
    fired: &mut Vec<String>,
    out: &mut Vec<(Vec<Marking>, Vec<String>)>,
) -> Result<(), OverBudget> {
    if fired.len() == lambda {
        if out.len() as u64 >= max_runs {
            return Err(OverBudget);
        }
        out.push((markings.clone(), fired.clone()));
        return Ok(());
    }
    let current = markings.last().expect("non-empty").clone();
    for t in net.enabled_indices(&current).expect("well-sized marking") {
        let next = net.fire_idx(&current, t).expect("enabled");
        if !next.within_cap(kappa) {
            continue;
        }
        markings.push(next);
        fired.push(net.transitions()[t].clone());
        dfs(net, lambda, kappa, max_runs, markings, fired, out)?;
        markings.pop();
        fired.pop();
    }
    Ok(())
}

struct Evaluator<'a> {
    net: &'a PetriNet,
    run: &'a BoundedRun,
    opts: EncodeOptions,
    /// truth of each transition proposition at the horizon
    trailing: &'a BTreeMap<String, bool>,
}

impl Evaluator<'_> {
    fn lambda(&self) -> usize {
        self.run.lambda()
    }

    fn loop_to(&self) -> Option<usize> {
        self.run.loop_back.as_ref().map(|lb| lb.to)
    }

    fn tokens(&self, place: &str, i: usize) -> u64 {
        let p = self.net.place_index(place).expect("names resolved");
        self.run.markings[i].get(p)
    }

    fn prop(&self, t: &str, i: usize) -> bool {
        if i < self.lambda() {
            self.run.fired[i] == t
        } else {
            match self.opts.trailing {
                Trailing::StrictFalse => false,
                Trailing::Unconstrained => self.trailing.get(t).copied().unwrap_or(false),
            }
        }
    }

    fn client(&self, a: &ClientAtom, i: usize) -> bool {
        match a {
            ClientAtom::CountGt(p, c) => self.tokens(p, i) > *c,
            ClientAtom::CountLe(p, c) => self.tokens(p, i) <= *c,
            ClientAtom::CmpGt(p, q) => self.tokens(p, i) > self.tokens(q, i),
            ClientAtom::CmpLe(p, q) => self.tokens(p, i) <= self.tokens(q, i),
        }
    }

    fn all(&self, f: &LcFormula, mut range: impl Iterator<Item = usize>) -> bool {
        range.all(|j| self.eval(f, j))
    }

    fn start(&self, i: usize) -> usize {
        self.loop_to().map_or(i, |l| l.min(i))
    }

    fn globally(&self, f: &LcFormula, i: usize) -> bool {
        let lambda = self.lambda();
        match (self.loop_to(), self.opts.g_noloop) {
            (Some(_), _) => self.all(f, self.start(i)..=lambda),
            (None, GNoLoop::Prefix) => self.all(f, i..=lambda),
            (None, GNoLoop::False) => false,
        }
    }

    fn eval(&self, f: &LcFormula, i: usize) -> bool {
        use LcFormula::*;
        let lambda = self.lambda();
        match f {
            Prop(t) => self.prop(t, i),
            NegProp(t) => !self.prop(t, i),
            Client(a) => self.client(a, i),
            Not(a) => !self.eval(a, i),
            And(a, b) => self.eval(a, i) && self.eval(b, i),
            Or(a, b) => self.eval(a, i) || self.eval(b, i),
            Next(a) => {
                if i < lambda {
                    self.eval(a, i + 1)
                } else {
                    self.loop_to().is_some_and(|l| self.eval(a, l))
                }
            }
            Finally(a) => (self.start(i)..=lambda).any(|j| self.eval(a, j)),
            Globally(a) => self.globally(a, i),
            Until(a, b) => {
                (i..=lambda).any(|j| self.eval(b, j) && self.all(a, i..j))
                    || self.loop_to().is_some_and(|l| {
                        (l..i).any(|j| {
                            self.eval(b, j) && self.all(a, i..=lambda) && self.all(a, l..j)
                        })
                    })
            }
            Release(a, b) => {
                self.globally(b, i)
                    || (i..=lambda).any(|j| self.eval(a, j) && self.all(b, i..=j))
                    || self.loop_to().is_some_and(|l| {
                        (l..i).any(|j| {
                            self.eval(a, j) && self.all(b, i..=lambda) && self.all(b, l..=j)
                        })
                    })
            }
        }
    }
}

/// Bounded truth of `psi` at instant `i` of `run`. Under unconstrained
/// trailing the horizon propositions are chosen angelically: the result is
/// true if some assignment to them makes `psi` hold.
pub fn eval_bounded(
    net: &PetriNet,
    psi: &LcFormula,
    run: &BoundedRun,
    i: usize,
    opts: EncodeOptions,
) -> bool {
    assert!(
        i <= run.lambda(),
        "position {i} beyond horizon {}",
        run.lambda()
    );
    let names: Vec<String> = match opts.trailing {
        Trailing::StrictFalse => Vec::new(),
        Trailing::Unconstrained => psi.transition_names().into_iter().collect(),
    };
    assert!(
        names.len() < 24,
        "too many horizon propositions to enumerate"
    );
    (0u32..1 << names.len()).any(|bits| {
        let trailing: BTreeMap<String, bool> = names
            .iter()
            .enumerate()
            .map(|(n, t)| (t.clone(), bits & (1 << n) != 0))
            .collect();
        Evaluator {
            net,
            run,
            opts,
            trailing: &trailing,
        }
        .eval(psi, i)
    })
}

/// A run of micro-step (λ, κ) satisfying `psi` at 0, if any.
pub fn decide_micro_step(
    net: &PetriNet,
    psi: &LcFormula,
    lambda: usize,
    kappa: u64,
    opts: EncodeOptions,
    budget: u64,
    max_runs: u64,
) -> Result<Option<BoundedRun>, OracleError> {
    Ok(enumerate_runs(net, lambda, kappa, budget, max_runs)?
        .into_iter()
        .find(|run| eval_bounded(net, psi, run, 0, opts)))
}

/// Same search as the engine, decided by enumeration.
pub fn oracle_check(
    net: &PetriNet,
    property: &LcFormula,
    cfg: &OracleConfig,
) -> Result<BmcVerdict, OracleError> {
    resolve_names(net, property)?;
    let psi = search_formula(property, cfg.mode);
    let mut steps = Vec::new();
    for (lambda, kappa) in schedule(cfg.k_max) {
        let start = Instant::now();
        let found = decide_micro_step(
            net,
            &psi,
            lambda,
            kappa,
            cfg.encode,
            cfg.budget,
            cfg.max_runs,
        )?;
        steps.push(StepStat {
            lambda,
            kappa,
            status: if found.is_some() {
                SolverStatus::Sat
            } else {
                SolverStatus::Unsat
            },
            millis: start.elapsed().as_millis() as u64,
        });
        if let Some(trace) = found {
            return Ok(BmcVerdict {
                outcome: Outcome::Sat {
                    lambda,
                    kappa,
                    trace,
                },
                steps,
            });
        }
    }
    Ok(BmcVerdict {
        outcome: Outcome::UnsatUpTo { k_max: cfg.k_max },
        steps,
    })
}

/// Markings reachable from M₀ in at most `depth` steps without exceeding κ.
pub fn reachable_markings(net: &PetriNet, depth: usize, kappa: u64) -> BTreeSet<Marking> {
    let mut seen = BTreeSet::new();
    if !net.initial_marking().within_cap(kappa) {
        return seen;
    }
    seen.insert(net.initial_marking().clone());
    let mut frontier = vec![net.initial_marking().clone()];
    for _ in 0..depth {
        let mut next_frontier = Vec::new();
        for m in &frontier {
            for t in net.enabled_indices(m).expect("well-sized marking") {
                let next = net.fire_idx(m, t).expect("enabled");
                if next.within_cap(kappa) && seen.insert(next.clone()) {
                    next_frontier.push(next);
                }
            }
        }
        frontier = next_frontier;
    }
    seen
}
