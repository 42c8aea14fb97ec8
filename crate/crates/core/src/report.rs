//! Run reports: human-readable text and a stable JSON form.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::encode::{EncodeOptions, GNoLoop, Trailing};
use crate::engine::{BmcVerdict, Mode, Outcome, StepStat};
use crate::net::PetriNet;
use crate::solver::SolverStatus;
use crate::trace::{LoopBack, Trace};

pub const EXIT_SAT: i32 = 10;
pub const EXIT_UNSAT_UP_TO: i32 = 20;
pub const EXIT_INCONCLUSIVE: i32 = 30;
pub const EXIT_ERROR: i32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Smt,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub k_max: usize,
    pub mode: Mode,
    pub g_noloop: GNoLoop,
    pub trailing: Trailing,
    pub backend: Backend,
    /// solver command line, absent for the oracle
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<String>,
}

impl ConfigEcho {
    pub fn encode_options(&self) -> EncodeOptions {
        EncodeOptions {
            g_noloop: self.g_noloop,
            trailing: self.trailing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerdictReport {
    Sat {
        k: usize,
        lambda: usize,
        kappa: u64,
    },
    UnsatUpTo {
        k_max: usize,
    },
    Inconclusive {
        k: usize,
        lambda: usize,
        kappa: u64,
        status: SolverStatus,
        transcript: String,
    },
}

impl VerdictReport {
    pub fn exit_code(&self) -> i32 {
        match self {
            VerdictReport::Sat { .. } => EXIT_SAT,
            VerdictReport::UnsatUpTo { .. } => EXIT_UNSAT_UP_TO,
            VerdictReport::Inconclusive { .. } => EXIT_INCONCLUSIVE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceReport {
    pub kappa: u64,
    pub places: Vec<String>,
    pub markings: Vec<Vec<u64>>,
    pub fired: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loop_back: Option<LoopBack>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepReport {
    pub lambda: usize,
    pub kappa: u64,
    pub status: SolverStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub millis: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub net_file: String,
    pub net_id: String,
    pub property: String,
    pub config: ConfigEcho,
    pub verdict: VerdictReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceReport>,
    pub steps: Vec<StepReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_millis: Option<u64>,
}

impl RunReport {
    pub fn new(
        net_file: &str,
        net_id: &str,
        net: &PetriNet,
        property: &str,
        config: ConfigEcho,
        verdict: &BmcVerdict,
    ) -> Self {
        let (verdict_report, trace) = match &verdict.outcome {
            Outcome::Sat {
                lambda,
                kappa,
                trace,
            } => (
                VerdictReport::Sat {
                    k: lambda + *kappa as usize,
                    lambda: *lambda,
                    kappa: *kappa,
                },
                Some(trace_report(net, trace)),
            ),
            Outcome::UnsatUpTo { k_max } => (VerdictReport::UnsatUpTo { k_max: *k_max }, None),
            Outcome::Inconclusive {
                lambda,
                kappa,
                status,
                transcript,
            } => (
                VerdictReport::Inconclusive {
                    k: lambda + *kappa as usize,
                    lambda: *lambda,
                    kappa: *kappa,
                    status: *status,
                    transcript: transcript.clone(),
                },
                None,
            ),
        };
        RunReport {
            net_file: net_file.to_string(),
            net_id: net_id.to_string(),
            property: property.to_string(),
            config,
            verdict: verdict_report,
            trace,
            steps: verdict.steps.iter().map(step_report).collect(),
            total_millis: Some(verdict.steps.iter().map(|s| s.millis).sum()),
        }
    }

    /// Drops every wall-clock field so output is reproducible.
    pub fn without_timings(mut self) -> Self {
        self.total_millis = None;
        for s in &mut self.steps {
            s.millis = None;
        }
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(out, "net:      {} ({})", self.net_id, self.net_file);
        let _ = writeln!(out, "property: {}", self.property);
        let backend = match (&c.backend, &c.solver) {
            (Backend::Smt, Some(cmd)) => format!("smt ({cmd})"),
            (Backend::Smt, None) => "smt".to_string(),
            (Backend::Oracle, _) => "oracle".to_string(),
        };
        let _ = writeln!(
            out,
            "config:   k_max={} mode={} g_noloop={} trailing={} backend={}",
            c.k_max,
            mode_name(c.mode),
            g_noloop_name(c.g_noloop),
            trailing_name(c.trailing),
            backend
        );
        let _ = writeln!(out, "verdict:  {}", verdict_line(&self.verdict));
        if let VerdictReport::Inconclusive { transcript, .. } = &self.verdict {
            if !transcript.trim().is_empty() {
                out.push_str("solver transcript:\n");
                for line in transcript.lines() {
                    let _ = writeln!(out, "  {line}");
                }
            }
        }
        if let Some(t) = &self.trace {
            out.push_str(&render_trace_report(t));
        }
        out.push_str("micro-steps:\n");
        for s in &self.steps {
            let _ = write!(
                out,
                "  λ={} κ={} {}",
                s.lambda,
                s.kappa,
                status_name(s.status)
            );
            if let Some(ms) = s.millis {
                let _ = write!(out, " {ms} ms");
            }
            out.push('\n');
        }
        if let Some(ms) = self.total_millis {
            let _ = writeln!(out, "total: {ms} ms");
        }
        out
    }
}

fn step_report(s: &StepStat) -> StepReport {
    StepReport {
        lambda: s.lambda,
        kappa: s.kappa,
        status: s.status,
        millis: Some(s.millis),
    }
}

pub fn trace_report(net: &PetriNet, trace: &Trace) -> TraceReport {
    TraceReport {
        kappa: trace.kappa,
        places: net.places().to_vec(),
        markings: trace.markings.iter().map(|m| m.tokens().to_vec()).collect(),
        fired: trace.fired.clone(),
        loop_back: trace.loop_back.clone(),
    }
}

pub fn verdict_line(v: &VerdictReport) -> String {
    match v {
        VerdictReport::Sat { k, lambda, kappa } => format!("SAT at k={k} (λ={lambda}, κ={kappa})"),
        VerdictReport::UnsatUpTo { k_max } => {
            format!("UNSAT up to k={k_max} (external termination bound reached)")
        }
        VerdictReport::Inconclusive {
            k,
            lambda,
            kappa,
            status,
            ..
        } => format!(
            "INCONCLUSIVE at k={k} (λ={lambda}, κ={kappa}): solver {}",
            status_name(*status)
        ),
    }
}

pub fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Witness => "witness",
        Mode::Refute => "refute",
    }
}

pub fn g_noloop_name(g: GNoLoop) -> &'static str {
    match g {
        GNoLoop::Prefix => "prefix",
        GNoLoop::False => "false",
    }
}

pub fn trailing_name(t: Trailing) -> &'static str {
    match t {
        Trailing::StrictFalse => "strict",
        Trailing::Unconstrained => "unconstrained",
    }
}

pub fn status_name(s: SolverStatus) -> &'static str {
    match s {
        SolverStatus::Sat => "sat",
        SolverStatus::Unsat => "unsat",
        SolverStatus::Unknown => "unknown",
        SolverStatus::Timeout => "timeout",
        SolverStatus::Crashed => "crashed",
    }
}

fn marking_text(tokens: &[u64]) -> String {
    let parts: Vec<String> = tokens.iter().map(u64::to_string).collect();
    format!("({})", parts.join(","))
}

fn render_trace_report(t: &TraceReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "trace (κ={}, places {}):", t.kappa, t.places.join(","));
    let last = t.markings.len().saturating_sub(1);
    for (i, m) in t.markings.iter().enumerate() {
        let _ = write!(out, "  s{i} {}", marking_text(m));
        if let Some(name) = t.fired.get(i) {
            let _ = write!(out, "  fires {name}");
        }
        if i == last {
            if let Some(lb) = &t.loop_back {
                let _ = write!(out, "  fires {} → loops to step {}", lb.transition, lb.to);
            }
        }
        out.push('\n');
    }
    out
}

/// One line per instant: marking, then the transition fired from it.
pub fn render_trace(trace: &Trace, net: &PetriNet) -> String {
    render_trace_report(&trace_report(net, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::net::Marking;

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
    fn renders_witness() {
        let text = render_trace(&witness(), &models::ups());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "trace (κ=1, places p0,p1,p2,p3,p4):");
        assert_eq!(lines[1], "  s0 (0,0,0,0,0)  fires t0");
        assert_eq!(lines[3], "  s2 (0,1,0,0,0)");
    }

    #[test]
    fn renders_empty_and_lasso() {
        let net = models::ups();
        let t = Trace {
            kappa: 0,
            markings: vec![Marking::zeros(5)],
            fired: vec![],
            loop_back: None,
        };
        assert_eq!(render_trace(&t, &net).lines().count(), 2);

        let mut t = witness();
        t.fired.extend(["t2", "t6", "t7"].map(String::from));
        t.markings.extend([
            Marking::new(vec![0, 0, 1, 0, 0]),
            Marking::new(vec![0, 0, 0, 0, 1]),
            Marking::zeros(5),
        ]);
        t.loop_back = Some(LoopBack {
            to: 1,
            transition: "t0".into(),
        });
        t.validate(&net).unwrap();
        let text = render_trace(&t, &net);
        assert!(text
            .lines()
            .last()
            .unwrap()
            .ends_with("fires t0 → loops to step 1"));
    }

    #[test]
    fn json_round_trips() {
        let net = models::ups();
        let verdict = BmcVerdict {
            outcome: Outcome::Sat {
                lambda: 2,
                kappa: 1,
                trace: witness(),
            },
            steps: vec![StepStat {
                lambda: 2,
                kappa: 1,
                status: SolverStatus::Sat,
                millis: 3,
            }],
        };
        let config = ConfigEcho {
            k_max: 5,
            mode: Mode::Witness,
            g_noloop: GNoLoop::Prefix,
            trailing: Trailing::StrictFalse,
            backend: Backend::Smt,
            solver: Some("z3 -in".into()),
        };
        let r = RunReport::new(
            "ups.pnml",
            "ups",
            &net,
            "F (#x)p1(x)>p0(x)",
            config,
            &verdict,
        );
        assert_eq!(r.exit_code(), EXIT_SAT);
        assert_eq!(RunReport::from_json(&r.to_json()).unwrap(), r);
        let quiet = r.without_timings();
        assert!(!quiet.to_json().contains("millis"));
        assert_eq!(RunReport::from_json(&quiet.to_json()).unwrap(), quiet);
    }
}
