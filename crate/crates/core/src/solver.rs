//! External SMT-LIB 2 solver processes.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use wait_timeout::ChildExt;

use crate::encode::SmtScript;

/// Environment variable holding the default solver command line.
pub const SOLVER_ENV: &str = "COUNTBMC_SOLVER";
pub const DEFAULT_SOLVER: &str = "z3 -in";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverConfigError {
    #[error("solver command line is empty")]
    Empty,
    #[error("solver command line `{0}` has unbalanced quotes")]
    Quoting(String),
    #[error("solver timeout must be positive")]
    Timeout,
}

/// How to launch the solver. When an argument contains `{file}` the script is
/// written to a temporary file and the placeholder replaced by its path;
/// otherwise the script goes to standard input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub program: String,
    pub args: Vec<String>,
    pub timeout: Duration,
}

impl SolverConfig {
    pub fn new(command_line: &str, timeout: Duration) -> Result<Self, SolverConfigError> {
        let mut parts = shlex::split(command_line)
            .ok_or_else(|| SolverConfigError::Quoting(command_line.to_string()))?
            .into_iter();
        let program = parts.next().ok_or(SolverConfigError::Empty)?;
        if program.is_empty() {
            return Err(SolverConfigError::Empty);
        }
        if timeout.is_zero() {
            return Err(SolverConfigError::Timeout);
        }
        Ok(SolverConfig {
            program,
            args: parts.collect(),
            timeout,
        })
    }

    /// `$COUNTBMC_SOLVER`, falling back to `z3 -in`.
    pub fn from_env(timeout: Duration) -> Result<Self, SolverConfigError> {
        let line = std::env::var(SOLVER_ENV).unwrap_or_else(|_| DEFAULT_SOLVER.to_string());
        Self::new(&line, timeout)
    }

    pub fn command_line(&self) -> String {
        let mut parts = vec![self.program.clone()];
        parts.extend(self.args.iter().cloned());
        shlex::try_join(parts.iter().map(String::as_str)).unwrap_or_else(|_| parts.join(" "))
    }

    fn uses_file(&self) -> bool {
        self.args.iter().any(|a| a.contains("{file}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Sat,
    Unsat,
    Unknown,
    Timeout,
    Crashed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverAnswer {
    pub status: SolverStatus,
    /// present iff `status` is `Sat`
    pub model: Option<BTreeMap<String, Value>>,
    /// stdout followed by stderr, plus diagnostics for crashes
    pub transcript: String,
}

impl SolverAnswer {
    fn crashed(transcript: String) -> Self {
        SolverAnswer {
            status: SolverStatus::Crashed,
            model: None,
            transcript,
        }
    }
}

/// Minimal s-expression tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("s-expression syntax error at byte {offset}: {message}")]
pub struct SexpError {
    pub offset: usize,
    pub message: String,
}

/// Reads every s-expression in `input`. Comments (`;`), string literals and
/// `|quoted|` symbols are understood.
pub fn parse_sexps(input: &str) -> Result<Vec<Sexp>, SexpError> {
    let bytes = input.as_bytes();
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' => {
                stack.push(Vec::new());
                i += 1;
            }
            b')' => {
                if stack.len() < 2 {
                    return Err(SexpError {
                        offset: i,
                        message: "unbalanced `)`".into(),
                    });
                }
                let done = stack.pop().expect("checked depth");
                stack
                    .last_mut()
                    .expect("checked depth")
                    .push(Sexp::List(done));
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            b'"' | b'|' => {
                let start = i;
                i += 1;
                loop {
                    if i >= bytes.len() {
                        return Err(SexpError {
                            offset: start,
                            message: "unterminated literal".into(),
                        });
                    }
                    if bytes[i] == c {
                        // SMT-LIB escapes a quote inside a string by doubling it
                        if c == b'"' && bytes.get(i + 1) == Some(&b'"') {
                            i += 2;
                            continue;
                        }
                        i += 1;
                        break;
                    }
                    i += 1;
                }
                let mut text = input[start..i].to_string();
                if c == b'|' {
                    text = text[1..text.len() - 1].to_string();
                }
                stack.last_mut().expect("root").push(Sexp::Atom(text));
            }
            _ => {
                let start = i;
                while i < bytes.len()
                    && !bytes[i].is_ascii_whitespace()
                    && !matches!(bytes[i], b'(' | b')' | b';' | b'"' | b'|')
                {
                    i += 1;
                }
                stack
                    .last_mut()
                    .expect("root")
                    .push(Sexp::Atom(input[start..i].to_string()));
            }
        }
    }
    if stack.len() != 1 {
        return Err(SexpError {
            offset: bytes.len(),
            message: "unbalanced `(`".into(),
        });
    }
    Ok(stack.pop().expect("root"))
}

fn parse_value(s: &Sexp) -> Option<Value> {
    match s {
        Sexp::Atom(a) if a == "true" => Some(Value::Bool(true)),
        Sexp::Atom(a) if a == "false" => Some(Value::Bool(false)),
        Sexp::Atom(a) => a.parse().ok().map(Value::Int),
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(op), inner] if op == "-" => match parse_value(inner)? {
                Value::Int(n) => Some(Value::Int(-n)),
                Value::Bool(_) => None,
            },
            _ => None,
        },
    }
}

/// Interprets solver output for a script whose `get-value` asks for
/// `tracked`. Never fails: anything unexpected becomes `Crashed`.
pub fn interpret_output<'a>(
    stdout: &str,
    tracked: impl IntoIterator<Item = &'a str>,
    transcript: String,
) -> SolverAnswer {
    let sexps = match parse_sexps(stdout) {
        Ok(s) => s,
        Err(e) => return SolverAnswer::crashed(format!("{transcript}\n[countbmc] {e}")),
    };
    let mut items = sexps.iter();
    let status = match items.next() {
        Some(Sexp::Atom(s)) if s == "sat" => SolverStatus::Sat,
        Some(Sexp::Atom(s)) if s == "unsat" => SolverStatus::Unsat,
        Some(Sexp::Atom(s)) if s == "unknown" => SolverStatus::Unknown,
        _ => {
            return SolverAnswer::crashed(format!(
                "{transcript}\n[countbmc] no check-sat answer in solver output"
            ))
        }
    };
    if status != SolverStatus::Sat {
        // get-value after unsat/unknown legitimately produces errors
        return SolverAnswer {
            status,
            model: None,
            transcript,
        };
    }
    let mut model = BTreeMap::new();
    for item in items {
        match item {
            Sexp::List(pairs) if !matches!(pairs.first(), Some(Sexp::Atom(a)) if a == "error") => {
                for pair in pairs {
                    let Sexp::List(kv) = pair else {
                        return SolverAnswer::crashed(format!(
                            "{transcript}\n[countbmc] malformed get-value entry"
                        ));
                    };
                    match kv.as_slice() {
                        [Sexp::Atom(k), v] => match parse_value(v) {
                            Some(val) => {
                                model.insert(k.clone(), val);
                            }
                            None => {
                                return SolverAnswer::crashed(format!(
                                    "{transcript}\n[countbmc] unreadable value for `{k}`"
                                ))
                            }
                        },
                        _ => {
                            return SolverAnswer::crashed(format!(
                                "{transcript}\n[countbmc] malformed get-value entry"
                            ))
                        }
                    }
                }
            }
            _ => {
                return SolverAnswer::crashed(format!(
                    "{transcript}\n[countbmc] solver reported an error after sat"
                ))
            }
        }
    }
    for sym in tracked {
        if !model.contains_key(sym) {
            return SolverAnswer::crashed(format!(
                "{transcript}\n[countbmc] model is missing symbol `{sym}`"
            ));
        }
    }
    SolverAnswer {
        status,
        model: Some(model),
        transcript,
    }
}

/// Runs the solver on `script` and reads its answer.
pub fn solve(script: &SmtScript, cfg: &SolverConfig) -> SolverAnswer {
    solve_text(&script.render(), script.tracked(), cfg)
}

/// Runs the solver on raw SMT-LIB text.
pub fn solve_text<'a>(
    text: &str,
    tracked: impl IntoIterator<Item = &'a str>,
    cfg: &SolverConfig,
) -> SolverAnswer {
    let mut file = None;
    let args: Vec<String> = if cfg.uses_file() {
        let tmp = match tempfile::Builder::new().suffix(".smt2").tempfile() {
            Ok(mut f) => {
                if let Err(e) = f.write_all(text.as_bytes()) {
                    return SolverAnswer::crashed(format!("[countbmc] cannot write script: {e}"));
                }
                f
            }
            Err(e) => {
                return SolverAnswer::crashed(format!("[countbmc] cannot create script file: {e}"))
            }
        };
        let path = tmp.path().display().to_string();
        file = Some(tmp);
        cfg.args
            .iter()
            .map(|a| a.replace("{file}", &path))
            .collect()
    } else {
        cfg.args.clone()
    };

    let mut child = match Command::new(&cfg.program)
        .args(&args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => {
            return SolverAnswer::crashed(format!(
                "[countbmc] cannot launch `{}`: {e}",
                cfg.command_line()
            ))
        }
    };

    let mut stdin = child.stdin.take().expect("piped stdin");
    let input = if file.is_some() {
        String::new()
    } else {
        text.to_string()
    };
    let writer = std::thread::spawn(move || {
        // the solver may exit before reading everything; that shows up in its output
        let _ = stdin.write_all(input.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let mut stderr = child.stderr.take().expect("piped stderr");
    let out_reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let err_reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });

    let waited = child.wait_timeout(cfg.timeout);
    let exit = match waited {
        Ok(Some(status)) => Some(status),
        Ok(None) => {
            let _ = child.kill();
            let _ = child.wait();
            None
        }
        Err(e) => {
            let _ = child.kill();
            let _ = child.wait();
            let _ = writer.join();
            return SolverAnswer::crashed(format!("[countbmc] waiting for solver failed: {e}"));
        }
    };
    let _ = writer.join();
    let out = out_reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();
    drop(file);
    let mut transcript = out.clone();
    if !err.is_empty() {
        transcript.push_str("\n[stderr]\n");
        transcript.push_str(&err);
    }

    let Some(status) = exit else {
        return SolverAnswer {
            status: SolverStatus::Timeout,
            model: None,
            transcript: format!(
                "{transcript}\n[countbmc] solver exceeded {:?} and was terminated",
                cfg.timeout
            ),
        };
    };
    let answer = interpret_output(&out, tracked, transcript);
    // z3 exits non-zero when get-value follows unsat; only a sat answer needs a clean exit
    if answer.status == SolverStatus::Sat && !status.success() {
        return SolverAnswer::crashed(format!(
            "{}\n[countbmc] solver exited with {status}",
            answer.transcript
        ));
    }
    if answer.status == SolverStatus::Crashed && !status.success() {
        return SolverAnswer::crashed(format!(
            "{}\n[countbmc] solver exited with {status}",
            answer.transcript
        ));
    }
    answer
}
