use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use contspec::bench::{self, SweepKind};
use contspec::config::{write_csv, ModelConfigFile, ResultsFile};
use contspec::oracle::check_distribution;
use contspec::scenarios;
use contspec::specdec::{run_replicates, RunStats};
use contspec::{Error, Result};

/// Continuous speculative decoding on toy diffusion models.
///
/// Exit codes: 0 ok, 1 distribution check failed, 2 usage or config error,
/// 3 numerical failure.
#[derive(Parser)]
#[command(name = "contspec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run speculative generation and write per-run statistics.
    Generate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare speculative and target-only outputs position by position.
    CheckDist {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 0.01)]
        significance: f64,
        /// Also write the per-position report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one parameter and write a CSV row per axis value.
    Sweep {
        #[arg(value_enum)]
        kind: SweepArg,
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated axis values (defaults depend on the kind).
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the expected walltime improvement for (alpha, gamma, c).
    Formula {
        #[arg(allow_negative_numbers = true)]
        alpha: f64,
        gamma: usize,
        #[arg(allow_negative_numbers = true)]
        c: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepArg {
    Gamma,
    Prefill,
    Temperature,
    Trials,
}

#[derive(Args)]
struct RunArgs {
    /// Model config JSON; the built-in standard pair when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    gamma: Option<usize>,
    /// Expected denoising step count; a mismatch with the config is an error.
    #[arg(long)]
    steps: Option<usize>,
    /// Expected token dimension; a mismatch with the config is an error.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    len: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    temp: Option<f64>,
    #[arg(long)]
    replicates: Option<u64>,
    #[arg(long)]
    max_trials: Option<u32>,
    /// Draw independent noise for draft and target.
    #[arg(long)]
    no_align: bool,
    /// Drop the variance-product term from the acceptance ratio.
    #[arg(long)]
    no_sigma: bool,
}

impl RunArgs {
    fn resolve(&self) -> Result<ModelConfigFile> {
        let mut cfg = match &self.config {
            Some(path) => ModelConfigFile::load(path)?,
            None => scenarios::standard_pair(),
        };
        if let Some(t) = self.steps.filter(|&t| t != cfg.steps) {
            return Err(Error::Config(format!(
                "--steps {t} but the config has steps = {}",
                cfg.steps
            )));
        }
        if let Some(d) = self.dim.filter(|&d| d != cfg.dim) {
            return Err(Error::Config(format!("--dim {d} but the config has dim = {}", cfg.dim)));
        }
        let run = &mut cfg.run;
        if let Some(v) = self.seed {
            run.seed = v;
        }
        if let Some(v) = self.gamma {
            run.gamma = v;
        }
        if let Some(v) = self.len {
            run.len = v;
        }
        if let Some(v) = self.rho {
            run.rho = v;
        }
        if let Some(v) = self.temp {
            run.temperature = v;
        }
        if let Some(v) = self.replicates {
            run.replicates = v;
        }
        if let Some(v) = self.max_trials {
            run.max_resample_trials = v;
        }
        if self.no_align {
            run.shared_noise = false;
        }
        if self.no_sigma {
            run.sigma_term = false;
        }
        if run.replicates == 0 {
            return Err(Error::usage("--replicates must be at least 1"));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Config(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_err(e: io::Error) -> Error {
    Error::Config(format!("write failed: {e}"))
}

fn generate(run: &RunArgs, format: Format, out: &Option<PathBuf>) -> Result<()> {
    let cfg = run.resolve()?;
    let runs = run_replicates(&cfg.target, &cfg.draft, &cfg.run.decode_config(), cfg.run.replicates)?;
    let mut w = open_out(out)?;
    match format {
        Format::Json => ResultsFile::new(cfg, &runs).write_json(&mut w),
        Format::Csv => {
            let stats: Vec<RunStats> = runs.into_iter().map(|(_, s)| s).collect();
            write_csv(&stats, &mut w)
        }
    }
    .and_then(|_| w.flush())
    .map_err(io_err)
}

const MIN_CHECK_RUNS: u64 = 1000;

fn check_dist(run: &RunArgs, significance: f64, out: &Option<PathBuf>) -> Result<bool> {
    let cfg = run.resolve()?;
    let runs = run.replicates.unwrap_or(MIN_CHECK_RUNS);
    if runs < MIN_CHECK_RUNS {
        return Err(Error::usage(format!(
            "check-dist needs at least {MIN_CHECK_RUNS} runs, got {runs}"
        )));
    }
    let report = check_distribution(&cfg.target, &cfg.draft, &cfg.run.decode_config(), runs, significance)?;
    let mut stdout = io::stdout().lock();
    let mut print = || -> io::Result<()> {
        writeln!(stdout, "position,coord,ks_statistic,p_value,result")?;
        for p in &report.positions {
            let verdict = if p.pass { "pass" } else { "fail" };
            writeln!(
                stdout,
                "{},{},{:.6},{:.6},{verdict}",
                p.position, p.coord, p.statistic, p.p_value
            )?;
        }
        writeln!(
            stdout,
            "# runs={} significance={} per-test threshold={:.3e} max_ks={:.6} => {}",
            report.runs,
            report.significance,
            report.threshold,
            report.max_statistic(),
            if report.pass() { "PASS" } else { "FAIL" }
        )?;
        stdout.flush()
    };
    print().map_err(io_err)?;
    if out.is_some() {
        let mut w = open_out(out)?;
        serde_json::to_writer_pretty(&mut w, &report)
            .map_err(io::Error::from)
            .and_then(|_| writeln!(w))
            .and_then(|_| w.flush())
            .map_err(io_err)?;
    }
    Ok(report.pass())
}

fn sweep(
    kind: SweepArg,
    run: &RunArgs,
    values: &Option<Vec<f64>>,
    format: Format,
    out: &Option<PathBuf>,
) -> Result<()> {
    let cfg = run.resolve()?;
    let template = cfg.run.decode_config();
    let replicates = cfg.run.replicates;
    let kind = match kind {
        SweepArg::Gamma => SweepKind::Gamma,
        SweepArg::Prefill => SweepKind::Prefill,
        SweepArg::Temperature => SweepKind::Temperature,
        SweepArg::Trials => {
            if values.is_some() {
                return Err(Error::usage("the trials sweep takes no --values"));
            }
            let stats: Vec<RunStats> = run_replicates(&cfg.target, &cfg.draft, &template, replicates)?
                .into_iter()
                .map(|(_, s)| s)
                .collect();
            let hist = bench::trials_histogram(&stats);
            if hist.is_empty() {
                eprintln!("warning: no rejection events recorded; histogram is empty");
            }
            let mut w = open_out(out)?;
            return match format {
                Format::Csv => hist.write_csv(&mut w),
                Format::Json => serde_json::to_writer_pretty(&mut w, &hist)
                    .map_err(io::Error::from)
                    .and_then(|_| writeln!(w)),
            }
            .and_then(|_| w.flush())
            .map_err(io_err);
        }
    };
    let values = match values {
        Some(v) if v.is_empty() => return Err(Error::usage("--values is empty")),
        Some(v) => v.clone(),
        None => match kind {
            SweepKind::Gamma => vec![4.0, 8.0, 16.0, 32.0],
            SweepKind::Prefill => bench::DEFAULT_PREFILL_RATIOS.to_vec(),
            SweepKind::Temperature => vec![0.7, 1.0, 1.3],
        },
    };
    let result = bench::sweep(kind, &cfg.target, &cfg.draft, &template, &values, replicates)?;
    let mut w = open_out(out)?;
    match format {
        Format::Csv => bench::write_sweep_csv(&result, &mut w),
        Format::Json => serde_json::to_writer_pretty(&mut w, &result)
            .map_err(io::Error::from)
            .and_then(|_| writeln!(w)),
    }
    .and_then(|_| w.flush())
    .map_err(io_err)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate { run, format, out } => generate(&run, format, &out)?,
        Command::CheckDist { run, significance, out } => {
            if !check_dist(&run, significance, &out)? {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Sweep {
            kind,
            run,
            values,
            format,
            out,
        } => sweep(kind, &run, &values, format, &out)?,
        Command::Formula { alpha, gamma, c } => {
            println!("{:.6}", bench::theoretical_improvement(alpha, gamma, c)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
