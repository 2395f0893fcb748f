//! Command-line front end for the selection procedures.

pub mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rankselect_core::harness::{evaluate, verdict, CSV_HEADER};
use rankselect_core::numerics::{bechhofer_h_solved, kn_eta, rinott_h_solved};
use rankselect_core::parallel::Endpoint;
use rankselect_core::Termination;

pub use config::ConfigFile;

pub const EXIT_DECISION: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_DECISION: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: String, reason: String },
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error(transparent)]
    Core(rankselect_core::Error),
}

#[derive(Debug, Parser)]
#[command(name = "rankselect", version, about = "Ranking and selection of the best simulated system")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ConstantName {
    BechhoferH,
    RinottH,
    KnEta,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one selection and print the outcome.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `harness.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Print elimination, allocation and message logs as CSV.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Estimate PCS, PGS, EOC and mean sample size over replications.
    Eval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Maximum concurrent replications.
        #[arg(long)]
        jobs: Option<usize>,
        /// Report destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Print a procedure constant.
    Constants {
        #[arg(value_enum)]
        name: ConstantName,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n0: Option<u64>,
    },
}

/// Parses `args` (including the program name) and executes. Returns the
/// process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_DECISION };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn io_err(path: &str) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.to_string(),
        reason: e.to_string(),
    }
}

fn core_err(e: rankselect_core::Error) -> CliError {
    match e {
        rankselect_core::Error::InvalidConfig { key, reason } => CliError::Config { key, reason },
        other => CliError::Core(other),
    }
}

fn endpoint(e: Endpoint) -> String {
    match e {
        Endpoint::Master => "master".into(),
        Endpoint::Worker(w) => format!("worker{w}"),
    }
}

pub fn execute(cmd: &Command, out: &mut dyn Write) -> Result<i32, CliError> {
    let stdout = io_err("<stdout>");
    match cmd {
        Command::Run { config, seed, trace, jobs: _ } => {
            let file = ConfigFile::load(config)?;
            let seed = file.resolve_seed(*seed)?;
            let record = match file.procedure.run_traced(&file.instance, seed) {
                Ok(r) => r,
                Err(rankselect_core::Error::Pool(reason)) => {
                    writeln!(out, "procedure: {}", file.procedure.name()).map_err(&stdout)?;
                    writeln!(out, "aborted: worker pool failure: {reason}").map_err(&stdout)?;
                    return Ok(EXIT_NO_DECISION);
                }
                Err(e) => return Err(core_err(e)),
            };
            let r = &record.result;
            let counts: Vec<String> = r.per_alt_samples.iter().map(u64::to_string).collect();
            let term = match r.terminated_by {
                Termination::Decision => "decision",
                Termination::BudgetCap => "budget_cap",
            };
            writeln!(out, "procedure: {}", file.procedure.name()).map_err(&stdout)?;
            writeln!(out, "k: {}", file.instance.k()).map_err(&stdout)?;
            writeln!(out, "seed: {seed}").map_err(&stdout)?;
            writeln!(out, "selected: {}", r.selected).map_err(&stdout)?;
            writeln!(out, "samples: {}", counts.join(" ")).map_err(&stdout)?;
            writeln!(out, "total: {}", r.total_samples).map_err(&stdout)?;
            writeln!(out, "terminated_by: {term}").map_err(&stdout)?;
            if *trace {
                if !r.elimination_log.is_empty() {
                    writeln!(out, "\nstage,eliminated_index").map_err(&stdout)?;
                    for e in &r.elimination_log {
                        writeln!(out, "{},{}", e.stage, e.index).map_err(&stdout)?;
                    }
                }
                if !r.allocation_trace.is_empty() {
                    writeln!(out, "\nstage,alternative,target,granted").map_err(&stdout)?;
                    for a in &r.allocation_trace {
                        writeln!(out, "{},{},{},{}", a.stage, a.alternative, a.target, a.granted).map_err(&stdout)?;
                    }
                }
                if !record.matches.is_empty() {
                    writeln!(out, "\nworker,round,alpha,members,winner,samples").map_err(&stdout)?;
                    for m in &record.matches {
                        let members: Vec<String> = m.members.iter().map(usize::to_string).collect();
                        writeln!(out, "{},{},{},{},{},{}", m.worker, m.round, m.alpha, members.join(" "), m.winner, m.samples)
                            .map_err(&stdout)?;
                    }
                }
                if !record.messages.is_empty() {
                    writeln!(out, "\nfrom,to,job,phantom").map_err(&stdout)?;
                    for m in &record.messages {
                        writeln!(out, "{},{},{},{}", endpoint(m.from), endpoint(m.to), m.job, m.phantom)
                            .map_err(&stdout)?;
                    }
                }
            }
            Ok(if r.decided() { EXIT_DECISION } else { EXIT_NO_DECISION })
        }
        Command::Eval { config, seed, jobs, out: dest, format } => {
            let file = ConfigFile::load(config)?;
            let exp = file.experiment(*seed, *jobs)?;
            let report = evaluate(&exp).map_err(core_err)?;
            let body = match format {
                Format::Csv => format!("{CSV_HEADER}\n{}\n", report.csv_row()),
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&report.to_json(&exp)).expect("report serializes");
                    s.push('\n');
                    s
                }
            };
            match dest {
                Some(p) => std::fs::write(p, body).map_err(io_err(&p.display().to_string()))?,
                None => out.write_all(body.as_bytes()).map_err(&stdout)?,
            }
            let v = verdict(&report, file.procedure.alpha());
            match file.procedure.alpha() {
                Some(a) => writeln!(
                    out,
                    "verdict: {v} (pcs_hat = {:.4}, target 1 - alpha = {:.4}, 2*SE = {:.4}, R = {})",
                    report.pcs_hat,
                    1.0 - a,
                    2.0 * report.pcs_se,
                    report.replications
                ),
                None => writeln!(out, "verdict: {v} (pcs_hat = {:.4}, R = {})", report.pcs_hat, report.replications),
            }
            .map_err(&stdout)?;
            Ok(EXIT_DECISION)
        }
        Command::Constants { name, k, alpha, n0 } => {
            let need_n0 = || {
                n0.ok_or_else(|| CliError::Config {
                    key: "n0".into(),
                    reason: "required for this constant".into(),
                })
            };
            match name {
                ConstantName::BechhoferH => {
                    if n0.is_some() {
                        return Err(CliError::Config { key: "n0".into(), reason: "not used by bechhofer_h".into() });
                    }
                    let s = bechhofer_h_solved(*k, *alpha).map_err(core_err)?;
                    writeln!(out, "bechhofer_h = {} (residual {:.3e})", s.value, s.residual)
                }
                ConstantName::RinottH => {
                    let s = rinott_h_solved(*k, need_n0()?, *alpha).map_err(core_err)?;
                    writeln!(out, "rinott_h = {} (residual {:.3e})", s.value, s.residual)
                }
                ConstantName::KnEta => {
                    let v = kn_eta(*k, need_n0()?, *alpha).map_err(core_err)?;
                    writeln!(out, "kn_eta = {v} (closed form)")
                }
            }
            .map_err(&stdout)?;
            Ok(EXIT_DECISION)
        }
    }
}
