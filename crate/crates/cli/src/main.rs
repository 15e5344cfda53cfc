use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use phasevar_cli::check::run_checks;
use phasevar_cli::compare::{pair_up, write_deltas};
use phasevar_cli::config::{log_grid, CommonArgs, Settings};
use phasevar_cli::output::{emit_csv, emit_plot};
use phasevar_cli::sweep::{run_sweep, SweepRecord};

/// Minimum measured phase variance: optimal states, squeezed states and
/// reference laws under canonical, heterodyne and adaptive measurements.
#[derive(Parser)]
#[command(name = "phasevar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimized variance over a log-spaced n̄ grid
    Sweep(CommonArgs),
    /// Optimum under a photon-number cap N (the grid is over N)
    Truncated(CommonArgs),
    /// Best squeezed state at each n̄
    Squeezed(CommonArgs),
    /// Sum-identity and invariant self-checks
    Check(CommonArgs),
    /// Relative deltas of each method against the first one listed
    Compare(CommonArgs),
}

const OK: u8 = 0;
const PARTIAL: u8 = 1;
const CONFIG: u8 = 2;

fn settings(args: &CommonArgs, methods: &str) -> Result<Settings, ExitCode> {
    Settings::resolve(args, methods, (10.0, 1e4)).map_err(|e| {
        eprintln!("phasevar: {e:#}");
        ExitCode::from(CONFIG)
    })
}

fn write_outputs(s: &Settings, records: &[SweepRecord]) -> Result<()> {
    emit_csv(records, s.out_path().as_deref())?;
    for &kind in &s.plots {
        emit_plot(records, &s.plot_path(kind), kind)?;
    }
    Ok(())
}

fn sweep_like(args: &CommonArgs, methods: &str) -> ExitCode {
    let s = match settings(args, methods) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let records = match run_sweep(&s) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("phasevar: {e:#}");
            return ExitCode::from(CONFIG);
        }
    };
    if let Err(e) = write_outputs(&s, &records) {
        eprintln!("phasevar: {e:#}");
        return ExitCode::from(CONFIG);
    }
    let failed = records.iter().filter(|r| r.failed()).count();
    if failed > 0 {
        eprintln!("phasevar: {failed} of {} points failed", records.len());
        ExitCode::from(PARTIAL)
    } else {
        ExitCode::from(OK)
    }
}

fn compare(args: &CommonArgs) -> ExitCode {
    let s = match settings(args, "exact,continuum,squeezed,asymptotic") {
        Ok(s) => s,
        Err(code) => return code,
    };
    let records = match run_sweep(&s) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("phasevar: {e:#}");
            return ExitCode::from(CONFIG);
        }
    };
    let grid_len = log_grid(s.nbar_min, s.nbar_max, s.points_per_decade).len();
    let names: Vec<String> = s.methods.iter().map(|m| m.name()).collect();
    let deltas = pair_up(&records, &names, grid_len);
    let written = (|| -> Result<()> {
        match s.out_path() {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir)?;
                }
                write_deltas(&deltas, std::io::BufWriter::new(std::fs::File::create(&p)?))?
            }
            None => write_deltas(&deltas, std::io::stdout().lock())?,
        }
        for &kind in &s.plots {
            emit_plot(&records, &s.plot_path(kind), kind)?;
        }
        Ok(())
    })();
    if let Err(e) = written {
        eprintln!("phasevar: {e:#}");
        return ExitCode::from(CONFIG);
    }
    if records.iter().any(|r| r.failed()) {
        ExitCode::from(PARTIAL)
    } else {
        ExitCode::from(OK)
    }
}

fn check(args: &CommonArgs) -> ExitCode {
    let mut args = args.clone();
    if args.scheme.is_none() {
        args.scheme = Some("canonical,heterodyne,markI,markII".into());
    }
    let s = match settings(&args, "exact") {
        Ok(s) => s,
        Err(code) => return code,
    };
    let results = run_checks(&s.schemes);
    for r in &results {
        println!("{} {}: {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    if results.iter().all(|r| r.pass) {
        ExitCode::from(OK)
    } else {
        ExitCode::from(PARTIAL)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Sweep(a) => sweep_like(a, "exact"),
        Command::Truncated(a) => sweep_like(a, "truncated"),
        Command::Squeezed(a) => sweep_like(a, "squeezed"),
        Command::Check(a) => check(a),
        Command::Compare(a) => compare(a),
    }
}
