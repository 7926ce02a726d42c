//! `mobicache` command-line tool.

mod commands;
mod config;
mod error;
mod output;
mod verify;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use error::CliError;
use output::{sha256_hex, Report, RunManifest};

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "mobicache",
    version,
    about = "Mobility-aware coded caching for small-cell networks"
)]
#[command(args_override_self = true, propagate_version = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Print the result as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the CSV form of the result to PATH (`-` for stdout).
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<String>,
    /// Worker threads for the parallel kernels.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Write a run manifest (arguments, version, output hashes) to PATH.
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,
    /// Read `key=value` defaults from PATH; explicit flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Delivery rate, caching level and sub-file count of one scheme.
    Rate(commands::SchemeArgs),
    /// Sub-file counts of one scheme, or of all schemes when none is given.
    Subfiles(commands::SchemeArgs),
    /// Color a grid so every mobility path of T cells meets T colors.
    Color(commands::ColorArgs),
    /// Placement, delivery and decoding round trip with byte-level checks.
    DeliverVerify(commands::DeliverArgs),
    /// Popularity-aware choice of the number of cached files.
    CachePlan(commands::CachePlanArgs),
    /// Offloading rate under random mobility, swept over user density.
    SimulateMobility(commands::SimArgs),
    /// Sub-files and rates for K in {24, 48} and M/N in {1/8, 1/4}.
    Table1,
    /// Sub-files and rates for K = 60 and M/N = 1/5.
    Table2,
    /// Run the built-in consistency checks.
    VerifyAll(verify::VerifyArgs),
    /// Split a file into L coded fragment files.
    MdsEncode(commands::MdsEncodeArgs),
    /// Rebuild a file from any T fragment files.
    MdsDecode(commands::MdsDecodeArgs),
    /// Re-run a manifest and compare output hashes.
    Replay(commands::ReplayArgs),
}

const SUBCOMMANDS: &[&str] = &[
    "rate",
    "subfiles",
    "color",
    "deliver-verify",
    "cache-plan",
    "simulate-mobility",
    "table1",
    "table2",
    "verify-all",
    "mds-encode",
    "mds-decode",
    "replay",
];

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Rate(_) => "rate",
            Command::Subfiles(_) => "subfiles",
            Command::Color(_) => "color",
            Command::DeliverVerify(_) => "deliver-verify",
            Command::CachePlan(_) => "cache-plan",
            Command::SimulateMobility(_) => "simulate-mobility",
            Command::Table1 => "table1",
            Command::Table2 => "table2",
            Command::VerifyAll(_) => "verify-all",
            Command::MdsEncode(_) => "mds-encode",
            Command::MdsDecode(_) => "mds-decode",
            Command::Replay(_) => "replay",
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Command::DeliverVerify(a) => Some(a.seed),
            Command::CachePlan(a) => Some(a.seed),
            Command::SimulateMobility(a) => Some(a.seed),
            _ => None,
        }
    }
}

/// Bytes bound for stdout and for the CSV file.
pub struct Rendered {
    pub stdout: String,
    pub csv_file: Option<(String, String)>,
}

pub fn render(global: &GlobalArgs, report: &Report) -> Result<Rendered, CliError> {
    let csv_to_stdout = global.csv.as_deref() == Some("-");
    if global.json && csv_to_stdout {
        return Err(CliError::Validation(
            "--json and --csv - both claim stdout".into(),
        ));
    }
    let need_csv = || {
        report
            .csv
            .clone()
            .ok_or_else(|| CliError::Validation("this command has no CSV output".into()))
    };
    let stdout = if global.json {
        let mut s = serde_json::to_string_pretty(&report.json).expect("JSON values serialize");
        s.push('\n');
        s
    } else if csv_to_stdout {
        need_csv()?
    } else {
        report.text.clone()
    };
    let csv_file = match global.csv.as_deref() {
        Some(path) if path != "-" => Some((path.to_string(), need_csv()?)),
        _ => None,
    };
    Ok(Rendered { stdout, csv_file })
}

fn output_hashes(r: &Rendered) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    out.insert("stdout".to_string(), sha256_hex(r.stdout.as_bytes()));
    if let Some((path, body)) = &r.csv_file {
        out.insert(format!("csv:{path}"), sha256_hex(body.as_bytes()));
    }
    out
}

/// Arguments worth recording: everything except the manifest target.
fn recorded_args(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--manifest" {
            it.next();
        } else if !a.starts_with("--manifest=") {
            out.push(a.clone());
        }
    }
    out
}

fn parse(args: &[String]) -> Result<Cli, clap::Error> {
    Cli::try_parse_from(args)
}

fn set_threads(threads: Option<usize>) -> Result<(), CliError> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Validation("--threads must be positive".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    Ok(())
}

/// Runs a parsed command and renders it without touching the filesystem
/// outputs. Used directly by `replay`.
pub fn execute(cli: &Cli) -> Result<(Report, Rendered), CliError> {
    let report = match &cli.command {
        Command::Rate(a) => commands::rate(a)?,
        Command::Subfiles(a) => commands::subfiles(a)?,
        Command::Color(a) => commands::color(a)?,
        Command::DeliverVerify(a) => commands::deliver_verify(a)?,
        Command::CachePlan(a) => commands::cache_plan(a)?,
        Command::SimulateMobility(a) => commands::simulate_mobility(a)?,
        Command::Table1 => commands::table(1)?,
        Command::Table2 => commands::table(2)?,
        Command::VerifyAll(a) => verify::verify_all(a)?,
        Command::MdsEncode(a) => commands::mds_encode(a)?,
        Command::MdsDecode(a) => commands::mds_decode(a)?,
        Command::Replay(a) => commands::replay(a)?,
    };
    let rendered = render(&cli.global, &report)?;
    Ok((report, rendered))
}

fn run(args: Vec<String>) -> Result<Option<String>, CliError> {
    let args = config::expand_args(&args, SUBCOMMANDS)?;
    let cli = match parse(&args) {
        Ok(c) => c,
        Err(e) => {
            let usage_error = e.use_stderr();
            e.print()?;
            return if usage_error {
                Err(CliError::Validation("invalid arguments".into()))
            } else {
                Ok(None)
            };
        }
    };
    set_threads(cli.global.threads)?;
    let (report, rendered) = execute(&cli)?;

    print!("{}", rendered.stdout);
    if let Some((path, body)) = &rendered.csv_file {
        fs::write(path, body)?;
    }
    if let Some(path) = &cli.global.manifest {
        let manifest = RunManifest {
            command: cli.command.name().to_string(),
            args: recorded_args(&args),
            params: serde_json::to_value(&cli.command).expect("arguments serialize"),
            seed: cli.command.seed(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: output_hashes(&rendered),
        };
        let mut body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        body.push('\n');
        fs::write(path, body)?;
    }
    Ok(report.failure)
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(failure)) => {
            eprintln!("verification failed: {failure}");
            ExitCode::from(3)
        }
        Err(e) => {
            if !matches!(&e, CliError::Validation(m) if m == "invalid arguments") {
                eprintln!("{e}");
            }
            e.exit_code()
        }
    }
}
