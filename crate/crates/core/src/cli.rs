//! Command-line front end: `check`, `bench` and `convert`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::encode::{EncodeOptions, GNoLoop, Trailing};
use crate::engine::{check, EngineError, Mode, SearchConfig};
use crate::logic::{parse_lc, LcParseError};
use crate::oracle::{oracle_check, OracleConfig, OracleError, DEFAULT_BUDGET, DEFAULT_MAX_RUNS};
use crate::pnml::{is_pnml_path, read_net_file, write_pnml, write_textnet, NetDocument, PnmlError};
use crate::report::{
    mode_name, trailing_name, verdict_line, Backend, ConfigEcho, RunReport, VerdictReport,
    EXIT_ERROR, EXIT_INCONCLUSIVE,
};
use crate::solver::{SolverConfig, SolverConfigError, DEFAULT_SOLVER, SOLVER_ENV};

#[derive(Debug, Parser)]
#[command(
    name = "countbmc",
    version,
    about = "2D bounded model checking for Petri nets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check one property against one net
    Check(CheckArgs),
    /// Run every property of every net in a directory
    Bench(BenchArgs),
    /// Convert between PNML and the textual net format
    Convert(ConvertArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Witness,
    Refute,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GNoLoopArg {
    Prefix,
    False,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TrailingArg {
    /// transition propositions are false at the last instant
    Strict,
    /// transition propositions are free at the last instant
    #[value(alias = "paper")]
    Unconstrained,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// external termination bound on k = λ+κ
    #[arg(long = "kmax")]
    k_max: usize,
    #[arg(long, value_enum, default_value = "witness")]
    mode: ModeArg,
    #[arg(long = "g-noloop", value_enum, default_value = "prefix")]
    g_noloop: GNoLoopArg,
    #[arg(long, value_enum, default_value = "strict")]
    trailing: TrailingArg,
    /// decide by explicit enumeration instead of the SMT solver
    #[arg(long)]
    oracle: bool,
    /// solver command line (default: $COUNTBMC_SOLVER, then `z3 -in`)
    #[arg(long)]
    solver: Option<String>,
    /// per-query solver timeout in seconds
    #[arg(long, default_value_t = 60)]
    timeout: u64,
    /// micro-steps solved concurrently within one macro-step
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// oracle ceiling on the estimated state space
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// oracle ceiling on enumerated runs per micro-step
    #[arg(long = "max-runs", default_value_t = DEFAULT_MAX_RUNS)]
    max_runs: u64,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(
        long,
        conflicts_with = "formula_file",
        required_unless_present = "formula_file"
    )]
    formula: Option<String>,
    #[arg(long = "formula-file")]
    formula_file: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
    /// write every micro-step's SMT-LIB script into this directory
    #[arg(long = "emit-smt")]
    emit_smt: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    /// leave wall-clock times out of the report
    #[arg(long = "omit-timings")]
    omit_timings: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    dir: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Net { path: PathBuf, source: PnmlError },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{origin}: column {column}: {message}", column = .source.column, message = .source.message)]
    Formula {
        origin: String,
        source: LcParseError,
    },
    #[error("--solver: {0}")]
    Solver(#[from] SolverConfigError),
    #[error("--jobs must be at least 1")]
    Jobs,
    #[error("{path}: {source}")]
    Engine { path: PathBuf, source: EngineError },
    #[error("{path}: {source}")]
    Oracle { path: PathBuf, source: OracleError },
    #[error("{path}:{line}: {message}")]
    Props {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{0}: no net files found")]
    EmptyDir(PathBuf),
}

/// Search settings shared by `check` and `bench`.
#[derive(Debug, Clone)]
struct Settings {
    k_max: usize,
    mode: Mode,
    encode: EncodeOptions,
    backend: Backend,
    solver: Option<SolverConfig>,
    jobs: usize,
    budget: u64,
    max_runs: u64,
}

impl Settings {
    fn from_args(a: &SearchArgs) -> Result<Self, CliError> {
        if a.jobs == 0 {
            return Err(CliError::Jobs);
        }
        let timeout = Duration::from_secs(a.timeout);
        let solver = if a.oracle {
            None
        } else {
            Some(match &a.solver {
                Some(line) => SolverConfig::new(line, timeout)?,
                None => SolverConfig::from_env(timeout)?,
            })
        };
        Ok(Settings {
            k_max: a.k_max,
            mode: match a.mode {
                ModeArg::Witness => Mode::Witness,
                ModeArg::Refute => Mode::Refute,
            },
            encode: EncodeOptions {
                g_noloop: match a.g_noloop {
                    GNoLoopArg::Prefix => GNoLoop::Prefix,
                    GNoLoopArg::False => GNoLoop::False,
                },
                trailing: match a.trailing {
                    TrailingArg::Strict => Trailing::StrictFalse,
                    TrailingArg::Unconstrained => Trailing::Unconstrained,
                },
            },
            backend: if a.oracle {
                Backend::Oracle
            } else {
                Backend::Smt
            },
            solver,
            jobs: a.jobs,
            budget: a.budget,
            max_runs: a.max_runs,
        })
    }

    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            k_max: self.k_max,
            mode: self.mode,
            g_noloop: self.encode.g_noloop,
            trailing: self.encode.trailing,
            backend: self.backend,
            solver: self.solver.as_ref().map(SolverConfig::command_line),
        }
    }
}

fn load_net(path: &Path) -> Result<NetDocument, CliError> {
    read_net_file(path).map_err(|source| CliError::Net {
        path: path.to_path_buf(),
        source,
    })
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run_one(
    doc: &NetDocument,
    net_path: &Path,
    property: &str,
    origin: &str,
    s: &Settings,
    emit_dir: Option<PathBuf>,
) -> Result<RunReport, CliError> {
    let parsed = parse_lc(property).map_err(|source| CliError::Formula {
        origin: origin.to_string(),
        source,
    })?;
    let verdict = match &s.solver {
        None => {
            let cfg = OracleConfig {
                k_max: s.k_max,
                mode: s.mode,
                encode: s.encode,
                budget: s.budget,
                max_runs: s.max_runs,
            };
            oracle_check(&doc.net, &parsed.formula, &cfg).map_err(|source| CliError::Oracle {
                path: net_path.to_path_buf(),
                source,
            })?
        }
        Some(solver) => {
            let cfg = SearchConfig {
                k_max: s.k_max,
                mode: s.mode,
                encode: s.encode,
                solver: solver.clone(),
                jobs: s.jobs,
                emit_dir,
            };
            check(&doc.net, &parsed.formula, &cfg).map_err(|source| CliError::Engine {
                path: net_path.to_path_buf(),
                source,
            })?
        }
    };
    Ok(RunReport::new(
        &net_path.display().to_string(),
        &doc.net_id,
        &doc.net,
        &parsed.formula.to_string(),
        s.echo(),
        &verdict,
    ))
}

fn formula_from_file(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .collect::<Vec<_>>()
        .join(" ")
        .trim()
        .to_string()
}

fn cmd_check(a: CheckArgs) -> Result<i32, CliError> {
    let settings = Settings::from_args(&a.search)?;
    let doc = load_net(&a.net)?;
    let (property, origin) = match (&a.formula, &a.formula_file) {
        (Some(f), _) => (f.clone(), "--formula".to_string()),
        (None, Some(path)) => (
            formula_from_file(&read_text(path)?),
            path.display().to_string(),
        ),
        (None, None) => unreachable!("clap requires one of the formula flags"),
    };
    let mut report = run_one(&doc, &a.net, &property, &origin, &settings, a.emit_smt)?;
    if a.omit_timings {
        report = report.without_timings();
    }
    if a.json {
        print!("{}", report.to_json());
    } else {
        print!("{}", report.to_text());
    }
    Ok(report.exit_code())
}

/// One entry of a `.props` file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropLine {
    pub line: usize,
    pub mode: Option<Mode>,
    pub trailing: Option<Trailing>,
    pub g_noloop: Option<GNoLoop>,
    pub formula: String,
}

/// Parses a properties file: one formula per line, `#` comments, and leading
/// `@key=value` directives (`mode`, `trailing`, `g_noloop`) overriding the
/// command-line settings for that line.
pub fn parse_props(text: &str) -> Result<Vec<PropLine>, (usize, String)> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let mut rest = raw.trim();
        if rest.is_empty() || rest.starts_with('#') {
            continue;
        }
        let mut entry = PropLine {
            line,
            mode: None,
            trailing: None,
            g_noloop: None,
            formula: String::new(),
        };
        while let Some(d) = rest.strip_prefix('@') {
            let end = d.find(char::is_whitespace).unwrap_or(d.len());
            let (key, value) = d[..end]
                .split_once('=')
                .ok_or_else(|| (line, format!("directive `@{}` has no value", &d[..end])))?;
            match (key, value) {
                ("mode", "witness") => entry.mode = Some(Mode::Witness),
                ("mode", "refute") => entry.mode = Some(Mode::Refute),
                ("trailing", "strict") => entry.trailing = Some(Trailing::StrictFalse),
                ("trailing", "unconstrained" | "paper") => {
                    entry.trailing = Some(Trailing::Unconstrained)
                }
                ("g_noloop" | "g-noloop", "prefix") => entry.g_noloop = Some(GNoLoop::Prefix),
                ("g_noloop" | "g-noloop", "false") => entry.g_noloop = Some(GNoLoop::False),
                _ => return Err((line, format!("unknown directive `@{key}={value}`"))),
            }
            rest = d[end..].trim_start();
        }
        if rest.is_empty() {
            return Err((line, "directive without a formula".into()));
        }
        entry.formula = rest.to_string();
        out.push(entry);
    }
    Ok(out)
}

/// Net files of a directory, one per stem, PNML preferred over text.
fn bench_nets(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut by_stem: BTreeMap<String, PathBuf> = BTreeMap::new();
    for e in entries {
        let path = e
            .map_err(|source| CliError::Io {
                path: dir.to_path_buf(),
                source,
            })?
            .path();
        let ext = path.extension().and_then(|x| x.to_str()).unwrap_or("");
        if !matches!(ext, "pnml" | "xml" | "net") {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()).map(String::from) else {
            continue;
        };
        match by_stem.get(&stem) {
            Some(existing) if is_pnml_path(existing) => {}
            _ => {
                by_stem.insert(stem, path);
            }
        }
    }
    if by_stem.is_empty() {
        return Err(CliError::EmptyDir(dir.to_path_buf()));
    }
    Ok(by_stem.into_values().collect())
}

fn result_cell(v: &VerdictReport) -> String {
    match v {
        VerdictReport::Sat { k, lambda, kappa } => format!("SAT k={k} λ={lambda} κ={kappa}"),
        VerdictReport::UnsatUpTo { k_max } => format!("UNSAT up to k={k_max}"),
        other => verdict_line(other),
    }
}

/// Runs a directory of nets and returns the summary table.
fn bench_table(a: &BenchArgs) -> Result<(String, bool), CliError> {
    let base = Settings::from_args(&a.search)?;
    let mut out = String::new();
    let mut inconclusive = false;
    for net_path in bench_nets(&a.dir)? {
        let props_path = net_path.with_extension("props");
        if !props_path.exists() {
            continue;
        }
        let doc = load_net(&net_path)?;
        let props =
            parse_props(&read_text(&props_path)?).map_err(|(line, message)| CliError::Props {
                path: props_path.clone(),
                line,
                message,
            })?;
        let file = net_path.file_name().unwrap_or_default().to_string_lossy();
        let _ = writeln!(out, "{} ({file}), k_max={}", doc.net_id, base.k_max);
        let mut rows = vec![[
            "#".to_string(),
            "property".to_string(),
            "mode".to_string(),
            "trailing".to_string(),
            "result".to_string(),
        ]];
        for (n, p) in props.iter().enumerate() {
            let mut s = base.clone();
            s.mode = p.mode.unwrap_or(s.mode);
            s.encode.trailing = p.trailing.unwrap_or(s.encode.trailing);
            s.encode.g_noloop = p.g_noloop.unwrap_or(s.encode.g_noloop);
            let origin = format!("{}:{}", props_path.display(), p.line);
            let report = run_one(&doc, &net_path, &p.formula, &origin, &s, None)?;
            inconclusive |= report.exit_code() == EXIT_INCONCLUSIVE;
            rows.push([
                (n + 1).to_string(),
                report.property.clone(),
                mode_name(s.mode).to_string(),
                trailing_name(s.encode.trailing).to_string(),
                result_cell(&report.verdict),
            ]);
        }
        let widths: Vec<usize> = (0..5)
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        for r in &rows {
            let mut line = String::new();
            for (c, cell) in r.iter().enumerate() {
                if c + 1 == r.len() {
                    line.push_str(cell);
                } else {
                    let pad = widths[c] - cell.chars().count();
                    let _ = write!(line, "{cell}{}  ", " ".repeat(pad));
                }
            }
            let _ = writeln!(out, "{}", line.trim_end());
        }
        out.push('\n');
    }
    Ok((out, inconclusive))
}

fn cmd_bench(a: BenchArgs) -> Result<i32, CliError> {
    let (table, inconclusive) = bench_table(&a)?;
    print!("{table}");
    Ok(if inconclusive { EXIT_INCONCLUSIVE } else { 0 })
}

fn cmd_convert(a: ConvertArgs) -> Result<i32, CliError> {
    let doc = load_net(&a.input)?;
    let bytes = if is_pnml_path(&a.output) {
        write_pnml(&doc)
    } else {
        write_textnet(&doc).into_bytes()
    };
    std::fs::write(&a.output, bytes).map_err(|source| CliError::Io {
        path: a.output.clone(),
        source,
    })?;
    Ok(0)
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Convert(a) => cmd_convert(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Engine { .. }) {
                eprintln!("(solver: ${SOLVER_ENV} or `{DEFAULT_SOLVER}`)");
            }
            EXIT_ERROR
        }
    }
}
