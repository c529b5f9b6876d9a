use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use nanovib_bench::config::CaseConfig;
use nanovib_bench::report::{write_csv, ReportRow, Summary};
use nanovib_bench::run::{convergence_study, run_case, run_sweep};
use nanovib_bench::tables::reproduce_table;

#[derive(Parser)]
#[command(name = "nanovib", version, about = "Nonlocal rod, beam and plate free-vibration runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Case file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination; the JSON summary goes next to it. Stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the number of modes in the case file.
    #[arg(long)]
    modes: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the base case of a config file.
    Run(Common),
    /// Solve every cell of the config's sweep axes.
    Sweep(Common),
    /// Mesh-convergence study over the config's mesh axis.
    Converge(Common),
    /// Reproduce a reference table; exits nonzero if any cell is out of tolerance.
    Table {
        #[command(flatten)]
        common: Common,
        /// Table id, 1 to 6. Falls back to the `table` key of `--config`.
        #[arg(long)]
        table: Option<u8>,
    },
}

fn load(common: &Common) -> anyhow::Result<CaseConfig> {
    let Some(path) = &common.config else {
        bail!("--config is required for this subcommand");
    };
    let mut cfg = CaseConfig::load(path)?;
    if let Some(m) = common.modes {
        if m == 0 {
            bail!("--modes must be at least 1");
        }
        cfg.modes = m;
    }
    Ok(cfg)
}

fn emit(rows: &[ReportRow], summary: &Summary, out: Option<&Path>, json: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(p) => write_csv(rows, BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?))?,
        None => write_csv(rows, io::stdout().lock())?,
    }
    let json_path = json.map(Path::to_path_buf).or_else(|| out.map(|p| p.with_extension("json")));
    let text = serde_json::to_string_pretty(summary)?;
    match json_path {
        Some(p) => std::fs::write(&p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => writeln!(io::stderr(), "{text}")?,
    }
    Ok(())
}

fn execute(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Run(c) => {
            let cfg = load(&c)?;
            let rows = run_case(&cfg)?;
            let s = Summary::new("run", None, &rows, Vec::new(), Vec::new());
            emit(&rows, &s, c.out.as_deref().or(cfg.output.csv.as_deref()), cfg.output.json.as_deref())?;
            Ok(true)
        }
        Command::Sweep(c) => {
            let cfg = load(&c)?;
            let rows = run_sweep(&cfg)?;
            let s = Summary::new("sweep", None, &rows, Vec::new(), Vec::new());
            emit(&rows, &s, c.out.as_deref().or(cfg.output.csv.as_deref()), cfg.output.json.as_deref())?;
            Ok(true)
        }
        Command::Converge(c) => {
            let cfg = load(&c)?;
            let report = convergence_study(&cfg)?;
            let s = Summary::new("converge", None, &report.rows, report.criteria(), Vec::new());
            emit(&report.rows, &s, c.out.as_deref().or(cfg.output.csv.as_deref()), cfg.output.json.as_deref())?;
            Ok(true)
        }
        Command::Table { common, table } => {
            let cfg = match &common.config {
                Some(_) => Some(load(&common)?),
                None => None,
            };
            let id = match (table, cfg.as_ref().and_then(|c| c.table)) {
                (Some(t), _) | (None, Some(t)) => t,
                (None, None) => bail!("give --table <1..6> or a config with a `table` key"),
            };
            let report = reproduce_table(id)?;
            let s = Summary::new("table", Some(id), &report.rows, Vec::new(), report.flags.clone());
            let out = common.out.as_deref().or(cfg.as_ref().and_then(|c| c.output.csv.as_deref()));
            let json = cfg.as_ref().and_then(|c| c.output.json.as_deref());
            emit(&report.rows, &s, out, json)?;
            Ok(s.pass)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
