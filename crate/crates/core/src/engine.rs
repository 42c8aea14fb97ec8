//! The two-dimensional search over micro-steps (λ, κ).

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encode::{assemble, resolve_names, EncodeError, EncodeOptions, SmtScript};
use crate::logic::{negate, to_nnf, LcFormula};
use crate::net::{Marking, PetriNet};
use crate::smt::{Step, Var};
use crate::solver::{solve, SolverAnswer, SolverConfig, SolverStatus, Value};
use crate::trace::{LoopBack, Trace, TraceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// search for a run satisfying the property
    #[default]
    Witness,
    /// search for a run satisfying the negated property (a counterexample)
    Refute,
}

/// The formula actually searched for: the property in witness mode, its
/// negation in refute mode, always in negation normal form.
pub fn search_formula(property: &LcFormula, mode: Mode) -> LcFormula {
    match mode {
        Mode::Witness => to_nnf(property),
        Mode::Refute => to_nnf(&negate(property.clone())),
    }
}

/// Micro-steps in search order: k = λ+κ ascending, and within one k, λ
/// ascending (κ descending).
pub fn schedule(k_max: usize) -> Vec<(usize, u64)> {
    (0..=k_max)
        .flat_map(|k| (0..=k).map(move |lambda| (lambda, (k - lambda) as u64)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub k_max: usize,
    pub mode: Mode,
    pub encode: EncodeOptions,
    pub solver: SolverConfig,
    /// micro-steps of one macro-step solved concurrently; 1 is sequential
    pub jobs: usize,
    /// write every micro-step's script here
    pub emit_dir: Option<PathBuf>,
}

impl SearchConfig {
    pub fn new(k_max: usize, solver: SolverConfig) -> Self {
        SearchConfig {
            k_max,
            mode: Mode::Witness,
            encode: EncodeOptions::default(),
            solver,
            jobs: 1,
            emit_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStat {
    pub lambda: usize,
    pub kappa: u64,
    pub status: SolverStatus,
    pub millis: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Sat {
        lambda: usize,
        kappa: u64,
        trace: Trace,
    },
    UnsatUpTo {
        k_max: usize,
    },
    Inconclusive {
        lambda: usize,
        kappa: u64,
        status: SolverStatus,
        transcript: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BmcVerdict {
    pub outcome: Outcome,
    pub steps: Vec<StepStat>,
}

impl BmcVerdict {
    pub fn is_sat(&self) -> bool {
        matches!(self.outcome, Outcome::Sat { .. })
    }

    /// (λ, κ) of a Sat verdict.
    pub fn sat_at(&self) -> Option<(usize, u64)> {
        match self.outcome {
            Outcome::Sat { lambda, kappa, .. } => Some((lambda, kappa)),
            _ => None,
        }
    }

    pub fn trace(&self) -> Option<&Trace> {
        match &self.outcome {
            Outcome::Sat { trace, .. } => Some(trace),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("internal soundness error at (λ={lambda}, κ={kappa}): {source}")]
    Soundness {
        lambda: usize,
        kappa: u64,
        source: DecodeError,
    },
    #[error("cannot write script to {path}: {source}")]
    Emit {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("solver answer is {0:?}, not sat")]
    NotSat(SolverStatus),
    #[error("model has no value for `{0}`")]
    MissingSymbol(String),
    #[error("model gives `{symbol}` the wrong sort")]
    Sort { symbol: String },
    #[error("model gives `{symbol}` the negative value {value}")]
    Negative { symbol: String, value: i64 },
    #[error("{count} transitions fire at step {step}, expected exactly one")]
    OneHot { step: String, count: usize },
    #[error("no run-shape selector is true")]
    NoSelector,
    #[error("decoded trace is invalid: {0}")]
    Trace(#[from] TraceError),
}

fn lookup(script: &SmtScript, answer: &SolverAnswer, v: Var) -> Result<Option<Value>, DecodeError> {
    let Some(sym) = script.symbols.symbol(&v) else {
        return Ok(None);
    };
    let model = answer
        .model
        .as_ref()
        .ok_or(DecodeError::NotSat(answer.status))?;
    model
        .get(sym)
        .copied()
        .map(Some)
        .ok_or_else(|| DecodeError::MissingSymbol(sym.to_string()))
}

fn bool_of(script: &SmtScript, answer: &SolverAnswer, v: Var) -> Result<bool, DecodeError> {
    match lookup(script, answer, v)? {
        None => Ok(false),
        Some(Value::Bool(b)) => Ok(b),
        Some(Value::Int(_)) => Err(DecodeError::Sort {
            symbol: script.symbols.symbol(&v).unwrap_or_default().to_string(),
        }),
    }
}

fn fired_at(
    net: &PetriNet,
    script: &SmtScript,
    answer: &SolverAnswer,
    step: Step,
) -> Result<String, DecodeError> {
    let mut chosen = Vec::new();
    for t in 0..net.transitions().len() {
        if bool_of(
            script,
            answer,
            Var::Trans {
                transition: t,
                step,
            },
        )? {
            chosen.push(t);
        }
    }
    match chosen.as_slice() {
        [t] => Ok(net.transitions()[*t].clone()),
        _ => Err(DecodeError::OneHot {
            step: step.to_string(),
            count: chosen.len(),
        }),
    }
}

/// Reads a trace out of a sat answer and checks it against the net.
pub fn decode_trace(
    net: &PetriNet,
    script: &SmtScript,
    answer: &SolverAnswer,
) -> Result<Trace, DecodeError> {
    if answer.status != SolverStatus::Sat {
        return Err(DecodeError::NotSat(answer.status));
    }
    let lambda = script.lambda;
    let mut markings = Vec::with_capacity(lambda + 1);
    for i in 0..=lambda {
        let mut tokens = Vec::with_capacity(net.places().len());
        for p in 0..net.places().len() {
            let v = Var::Place { place: p, step: i };
            let sym = script.symbols.symbol(&v).unwrap_or_default().to_string();
            match lookup(script, answer, v)? {
                Some(Value::Int(n)) if n >= 0 => tokens.push(n as u64),
                Some(Value::Int(n)) => {
                    return Err(DecodeError::Negative {
                        symbol: sym,
                        value: n,
                    })
                }
                Some(Value::Bool(_)) => return Err(DecodeError::Sort { symbol: sym }),
                None => return Err(DecodeError::MissingSymbol(sym)),
            }
        }
        markings.push(Marking::new(tokens));
    }
    let fired = (0..lambda)
        .map(|i| fired_at(net, script, answer, Step::At(i)))
        .collect::<Result<Vec<_>, _>>()?;

    let loop_back = if bool_of(script, answer, Var::SelectNoLoop)? {
        None
    } else {
        let l = (0..=lambda)
            .find_map(|l| match bool_of(script, answer, Var::SelectLoop(l)) {
                Ok(true) => Some(Ok(l)),
                Ok(false) => None,
                Err(e) => Some(Err(e)),
            })
            .ok_or(DecodeError::NoSelector)??;
        Some(LoopBack {
            to: l,
            transition: fired_at(net, script, answer, Step::Loop)?,
        })
    };
    let trace = Trace {
        kappa: script.kappa,
        markings,
        fired,
        loop_back,
    };
    trace.validate(net)?;
    Ok(trace)
}

/// Result of one micro-step.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub lambda: usize,
    pub kappa: u64,
    pub status: SolverStatus,
    pub millis: u64,
    pub trace: Option<Trace>,
    pub transcript: String,
}

/// Encodes, solves and (when sat) decodes a single micro-step.
pub fn run_micro_step(
    net: &PetriNet,
    psi: &LcFormula,
    lambda: usize,
    kappa: u64,
    cfg: &SearchConfig,
) -> Result<StepResult, EngineError> {
    let start = Instant::now();
    let script = assemble(net, psi, lambda, kappa, cfg.encode)?;
    if let Some(dir) = &cfg.emit_dir {
        let path = dir.join(format!(
            "k{}_lambda{lambda}_kappa{kappa}.smt2",
            lambda as u64 + kappa
        ));
        std::fs::create_dir_all(dir)
            .and_then(|_| std::fs::write(&path, script.render()))
            .map_err(|source| EngineError::Emit { path, source })?;
    }
    let answer = solve(&script, &cfg.solver);
    let trace = if answer.status == SolverStatus::Sat {
        Some(
            decode_trace(net, &script, &answer).map_err(|source| EngineError::Soundness {
                lambda,
                kappa,
                source,
            })?,
        )
    } else {
        None
    };
    Ok(StepResult {
        lambda,
        kappa,
        status: answer.status,
        millis: start.elapsed().as_millis() as u64,
        trace,
        transcript: answer.transcript,
    })
}

/// Runs the micro-steps of one macro-step, `jobs` at a time, returning
/// results in schedule order.
fn run_macro_step(
    net: &PetriNet,
    psi: &LcFormula,
    steps: &[(usize, u64)],
    cfg: &SearchConfig,
) -> Vec<Result<StepResult, EngineError>> {
    if cfg.jobs <= 1 {
        let mut out = Vec::new();
        for &(lambda, kappa) in steps {
            let r = run_micro_step(net, psi, lambda, kappa, cfg);
            let stop = !matches!(&r, Ok(s) if s.status == SolverStatus::Unsat);
            out.push(r);
            if stop {
                break;
            }
        }
        return out;
    }
    let mut out = Vec::new();
    for chunk in steps.chunks(cfg.jobs) {
        let results: Vec<_> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&(lambda, kappa)| {
                    scope.spawn(move || run_micro_step(net, psi, lambda, kappa, cfg))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("micro-step worker panicked"))
                .collect()
        });
        let decided = results
            .iter()
            .any(|r| !matches!(r, Ok(s) if s.status == SolverStatus::Unsat));
        out.extend(results);
        if decided {
            break;
        }
    }
    out
}

/// Runs the search for `property` on `net`.
pub fn check(
    net: &PetriNet,
    property: &LcFormula,
    cfg: &SearchConfig,
) -> Result<BmcVerdict, EngineError> {
    resolve_names(net, property)?;
    let psi = search_formula(property, cfg.mode);
    let plan = schedule(cfg.k_max);
    let mut steps = Vec::new();
    let mut start = 0;
    for k in 0..=cfg.k_max {
        let macro_steps = &plan[start..start + k + 1];
        start += k + 1;
        for result in run_macro_step(net, &psi, macro_steps, cfg) {
            let r = result?;
            steps.push(StepStat {
                lambda: r.lambda,
                kappa: r.kappa,
                status: r.status,
                millis: r.millis,
            });
            match r.status {
                SolverStatus::Unsat => {}
                SolverStatus::Sat => {
                    return Ok(BmcVerdict {
                        outcome: Outcome::Sat {
                            lambda: r.lambda,
                            kappa: r.kappa,
                            trace: r.trace.expect("sat steps carry a trace"),
                        },
                        steps,
                    })
                }
                status => {
                    return Ok(BmcVerdict {
                        outcome: Outcome::Inconclusive {
                            lambda: r.lambda,
                            kappa: r.kappa,
                            status,
                            transcript: r.transcript,
                        },
                        steps,
                    })
                }
            }
        }
    }
    Ok(BmcVerdict {
        outcome: Outcome::UnsatUpTo { k_max: cfg.k_max },
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::EncodeOptions;
    use crate::logic::parse_lc;
    use crate::models;
    use std::collections::BTreeMap;
    use std::time::Duration;

    #[test]
    fn schedule_orders() {
        assert_eq!(schedule(0), vec![(0, 0)]);
        assert_eq!(schedule(1), vec![(0, 0), (0, 1), (1, 0)]);
        assert_eq!(
            schedule(2),
            vec![(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]
        );
    }

    #[test]
    fn schedule_covers_triangle_once() {
        for k_max in 0..8 {
            let s = schedule(k_max);
            let set: std::collections::BTreeSet<_> = s.iter().copied().collect();
            assert_eq!(set.len(), s.len());
            assert_eq!(s.len(), (k_max + 1) * (k_max + 2) / 2);
            assert!(s.iter().all(|&(l, c)| l + c as usize <= k_max));
            let ks: Vec<usize> = s.iter().map(|&(l, c)| l + c as usize).collect();
            assert!(ks.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    fn script(lambda: usize, kappa: u64) -> SmtScript {
        let f = parse_lc("F(#x)p1(x)>p0(x)").unwrap().formula;
        assemble(&models::ups(), &f, lambda, kappa, EncodeOptions::default()).unwrap()
    }

    fn fake_answer(script: &SmtScript, set: &[(&str, Value)]) -> SolverAnswer {
        let mut model = BTreeMap::new();
        for sym in script.tracked() {
            let v = if sym.starts_with("p_") {
                Value::Int(0)
            } else {
                Value::Bool(false)
            };
            model.insert(sym.to_string(), v);
        }
        for (k, v) in set {
            model.insert(k.to_string(), *v);
        }
        SolverAnswer {
            status: SolverStatus::Sat,
            model: Some(model),
            transcript: String::new(),
        }
    }

    #[test]
    fn decodes_witness_model() {
        let s = script(2, 1);
        let ans = fake_answer(
            &s,
            &[
                ("p_p0_1", Value::Int(1)),
                ("p_p1_2", Value::Int(1)),
                ("t_t0_0", Value::Bool(true)),
                ("t_t1_1", Value::Bool(true)),
                ("sel_noloop", Value::Bool(true)),
            ],
        );
        let trace = decode_trace(&models::ups(), &s, &ans).unwrap();
        assert_eq!(trace.fired, ["t0", "t1"]);
        assert_eq!(trace.markings[2], Marking::new(vec![0, 1, 0, 0, 0]));
        assert!(trace.loop_back.is_none());
    }

    #[test]
    fn decodes_single_state() {
        let s = script(0, 0);
        let ans = fake_answer(&s, &[("sel_noloop", Value::Bool(true))]);
        let trace = decode_trace(&models::ups(), &s, &ans).unwrap();
        assert_eq!(trace.markings.len(), 1);
        assert!(trace.fired.is_empty());
    }

    #[test]
    fn two_true_transitions_is_a_soundness_error() {
        let s = script(1, 1);
        let ans = fake_answer(
            &s,
            &[
                ("p_p0_1", Value::Int(1)),
                ("t_t0_0", Value::Bool(true)),
                ("t_t1_0", Value::Bool(true)),
                ("sel_noloop", Value::Bool(true)),
            ],
        );
        assert_eq!(
            decode_trace(&models::ups(), &s, &ans),
            Err(DecodeError::OneHot {
                step: "0".into(),
                count: 2
            })
        );
    }

    #[test]
    fn replay_mismatch_is_reported() {
        let s = script(1, 1);
        let ans = fake_answer(
            &s,
            &[
                ("t_t0_0", Value::Bool(true)),
                ("sel_noloop", Value::Bool(true)),
            ],
        );
        assert!(matches!(
            decode_trace(&models::ups(), &s, &ans),
            Err(DecodeError::Trace(TraceError::Replay { step: 0, .. }))
        ));
    }

    #[test]
    fn unresolved_names_fail_before_solving() {
        let cfg = SearchConfig::new(
            1,
            SolverConfig::new("/nonexistent", Duration::from_secs(1)).unwrap(),
        );
        let f = parse_lc("F (#x>0)nowhere(x)").unwrap().formula;
        assert!(matches!(
            check(&models::ups(), &f, &cfg),
            Err(EngineError::Encode(EncodeError::UnknownPlace { .. }))
        ));
    }

    #[test]
    fn crashed_solver_is_inconclusive() {
        let cfg = SearchConfig::new(
            3,
            SolverConfig::new("/nonexistent", Duration::from_secs(1)).unwrap(),
        );
        let f = parse_lc("F t0").unwrap().formula;
        let v = check(&models::ups(), &f, &cfg).unwrap();
        assert!(matches!(
            v.outcome,
            Outcome::Inconclusive {
                lambda: 0,
                kappa: 0,
                status: SolverStatus::Crashed,
                ..
            }
        ));
        assert_eq!(v.steps.len(), 1);
    }
}
