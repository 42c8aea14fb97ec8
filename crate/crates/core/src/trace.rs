use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{Marking, PetriNet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopBack {
    /// index l of the state the back edge returns to
    pub to: usize,
    /// transition that fires from s_λ into s_l
    pub transition: String,
}

/// A bounded run: markings s_0..s_λ, the transitions fired between them and an
/// optional back edge from s_λ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub kappa: u64,
    pub markings: Vec<Marking>,
    pub fired: Vec<String>,
    pub loop_back: Option<LoopBack>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("trace has no markings")]
    Empty,
    #[error("first marking {found} differs from the initial marking {expected}")]
    WrongStart { expected: Marking, found: Marking },
    #[error("{markings} markings but {fired} fired transitions")]
    Shape { markings: usize, fired: usize },
    #[error("step {step}: {reason}")]
    Replay { step: usize, reason: String },
    #[error("marking {step} = {marking} exceeds the cap {kappa}")]
    Cap {
        step: usize,
        marking: Marking,
        kappa: u64,
    },
    #[error("loop back to {to}: {reason}")]
    Loop { to: usize, reason: String },
}

impl Trace {
    /// Number of steps λ.
    pub fn lambda(&self) -> usize {
        self.fired.len()
    }

    pub fn last(&self) -> &Marking {
        self.markings
            .last()
            .expect("validated traces are non-empty")
    }

    /// Checks replay from M₀, the κ cap and the back edge.
    pub fn validate(&self, net: &PetriNet) -> Result<(), TraceError> {
        let first = self.markings.first().ok_or(TraceError::Empty)?;
        if first != net.initial_marking() {
            return Err(TraceError::WrongStart {
                expected: net.initial_marking().clone(),
                found: first.clone(),
            });
        }
        if self.markings.len() != self.fired.len() + 1 {
            return Err(TraceError::Shape {
                markings: self.markings.len(),
                fired: self.fired.len(),
            });
        }
        for (step, m) in self.markings.iter().enumerate() {
            if !m.within_cap(self.kappa) {
                return Err(TraceError::Cap {
                    step,
                    marking: m.clone(),
                    kappa: self.kappa,
                });
            }
        }
        for (step, t) in self.fired.iter().enumerate() {
            let next = net
                .fire(&self.markings[step], t)
                .map_err(|e| TraceError::Replay {
                    step,
                    reason: e.to_string(),
                })?;
            if next != self.markings[step + 1] {
                return Err(TraceError::Replay {
                    step,
                    reason: format!(
                        "firing {t} gives {next}, trace has {}",
                        self.markings[step + 1]
                    ),
                });
            }
        }
        if let Some(lb) = &self.loop_back {
            let target = self.markings.get(lb.to).ok_or_else(|| TraceError::Loop {
                to: lb.to,
                reason: "index beyond the last state".into(),
            })?;
            let next = net
                .fire(self.last(), &lb.transition)
                .map_err(|e| TraceError::Loop {
                    to: lb.to,
                    reason: e.to_string(),
                })?;
            if &next != target {
                return Err(TraceError::Loop {
                    to: lb.to,
                    reason: format!("firing {} gives {next}, not {target}", lb.transition),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    fn witness() -> Trace {
        Trace {
            kappa: 1,
            markings: vec![
                Marking::new(vec![0, 0, 0, 0, 0]),
                Marking::new(vec![1, 0, 0, 0, 0]),
                Marking::new(vec![0, 1, 0, 0, 0]),
            ],
            fired: vec!["t0".into(), "t1".into()],
            loop_back: None,
        }
    }

    #[test]
    fn valid_witness() {
        witness().validate(&models::ups()).unwrap();
    }

    #[test]
    fn detects_violations() {
        let net = models::ups();
        let mut t = witness();
        t.kappa = 0;
        assert!(matches!(
            t.validate(&net),
            Err(TraceError::Cap { step: 1, .. })
        ));
        let mut t = witness();
        t.fired[1] = "t2".into();
        assert!(matches!(
            t.validate(&net),
            Err(TraceError::Replay { step: 1, .. })
        ));
        let mut t = witness();
        t.loop_back = Some(LoopBack {
            to: 0,
            transition: "t2".into(),
        });
        assert!(matches!(
            t.validate(&net),
            Err(TraceError::Loop { to: 0, .. })
        ));
    }
}
