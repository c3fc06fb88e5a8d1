//! `immerse`: verify immersions into products of space forms.
//!
//! Exit codes: 0 all checks pass, 1 some check failed, 2 usage, config or
//! evaluation error. `IMMERSE_THREADS` caps the worker pool.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use immerse_core::catalog::list_entries;
use immerse_core::checks::Verdict;
use immerse_core::config::{Format, RunConfig};
use immerse_core::report::Report;
use immerse_core::runner::{convergence, run};

#[derive(Parser)]
#[command(
    name = "immerse",
    version,
    about = "Numerical checks for immersions into Q^n1_c1 x Q^n2_c2"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// List catalog entries.
    List,
    /// Run checks on a catalog entry or a TOML config file.
    Check {
        /// Entry name, or path to a `.toml` config.
        target: String,
        /// Comma-separated check names, or `all`.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        #[arg(long)]
        h: Option<f64>,
        /// Points per chart axis, e.g. `9,9`.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Evaluate samples on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Observed order of a residual check under step refinement.
    Convergence {
        target: String,
        #[arg(long)]
        check: String,
        /// Strictly decreasing steps, e.g. `1e-2,5e-3,2.5e-3`.
        #[arg(long, value_delimiter = ',', required = true)]
        h: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Self(e.to_string())
    }
}

fn load(target: &str) -> Result<RunConfig, Failure> {
    let path = Path::new(target);
    if target.ends_with(".toml") || path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| Failure(format!("{target}: {e}")))?;
        RunConfig::parse(&text).map_err(|e| Failure(format!("{target}: {e}")))
    } else {
        Ok(RunConfig::from_entry(target)?)
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("IMMERSE_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure(format!(
            "IMMERSE_THREADS must be a positive integer, got `{v}`"
        ))
    })?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<(), Failure> {
    let bytes = match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv()?,
    };
    match out {
        Some(p) => fs::write(p, bytes).map_err(|e| Failure(format!("{}: {e}", p.display())))?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
        }
    }
    Ok(())
}

fn pick_format(arg: Option<FormatArg>, config: Format) -> Format {
    match arg {
        Some(FormatArg::Json) => Format::Json,
        Some(FormatArg::Csv) => Format::Csv,
        None => config,
    }
}

fn execute(cli: Cli) -> Result<Verdict, Failure> {
    configure_threads()?;
    match cli.command {
        Command::List => {
            let mut text = String::new();
            for e in list_entries() {
                let t = &e.target;
                text += &format!(
                    "{:<32} Q^{}_{} x Q^{}_{}  grid {:?}  {}\n",
                    e.name(),
                    t.factor1.dim(),
                    t.c1(),
                    t.factor2.dim(),
                    t.c2(),
                    e.grid,
                    e.summary
                );
            }
            use std::io::Write;
            // a closed pipe (`immerse list | head`) is not an error
            let _ = std::io::stdout().write_all(text.as_bytes());
            Ok(Verdict::Pass)
        }
        Command::Check {
            target,
            checks,
            h,
            grid,
            out,
            format,
            sequential,
        } => {
            let mut cfg = load(&target)?;
            if let Some(names) = checks {
                let names: Vec<String> =
                    names.into_iter().filter(|n| !n.trim().is_empty()).collect();
                cfg.spec.select_checks(&names)?;
            }
            if let Some(h) = h {
                cfg.spec.h = h;
            }
            if let Some(g) = grid {
                cfg.spec.grid = g;
            }
            if sequential {
                cfg.spec.execution = immerse_core::par::Execution::Sequential;
            }
            let format = pick_format(format, cfg.format);
            let out = out.or(cfg.output.clone());
            let start = Instant::now();
            let outcome = run(&cfg.spec)?;
            eprintln!(
                "{}: {} samples, {} errors, verdict {} ({:.3} s)",
                cfg.source,
                outcome.samples.len(),
                outcome.errors.len(),
                outcome.verdict(),
                start.elapsed().as_secs_f64()
            );
            for a in outcome
                .aggregates
                .iter()
                .filter(|a| a.verdict == Verdict::Fail)
            {
                eprintln!(
                    "  FAIL {} max |value| {:.3e} ({} of {} samples)",
                    a.name,
                    a.max_abs,
                    a.fail,
                    a.pass + a.fail
                );
            }
            let report = Report::for_run(&cfg.source, &cfg.spec, outcome);
            emit(&report, format, out.as_deref())?;
            Ok(report.verdict())
        }
        Command::Convergence {
            target,
            check,
            h,
            out,
            format,
        } => {
            let cfg = load(&target)?;
            let start = Instant::now();
            let table = convergence(&cfg.spec, &check, &h)?;
            for (i, r) in table.rows.iter().enumerate() {
                let order = if i == 0 {
                    String::new()
                } else {
                    format!("order {:.3}", table.orders[i - 1])
                };
                eprintln!("  h {:<10e} {:.6e}  {order}", r.h, r.value);
            }
            eprintln!(
                "{}: {check} verdict {} ({:.3} s)",
                cfg.source,
                table.verdict,
                start.elapsed().as_secs_f64()
            );
            let report = Report::for_convergence(&cfg.source, &cfg.spec, table);
            emit(
                &report,
                pick_format(format, cfg.format),
                out.or(cfg.output.clone()).as_deref(),
            )?;
            Ok(report.verdict())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(Verdict::Fail) => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
