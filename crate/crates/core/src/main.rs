use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ffpluq::bench::{append_csv, run, write_plot_script, BenchConfig, Mode};
use ffpluq::Algorithm;

#[derive(Parser)]
#[command(name = "ffpluq", about = "PLUQ factorization over Z/pZ: benchmarks, checks and reduction counts")]
struct Cli {
    #[command(subcommand)]
    mode: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Time one factorization and append a CSV row.
    Bench(Args),
    /// Factor, then verify the factors and rank profiles against the oracle.
    Check(Args),
    /// Compare measured modular reductions with the closed-form count.
    Count(Args),
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(clap::Args)]
struct Args {
    /// base, slab-recursive, tile-recursive, slab-iterative, tile-iterative,
    /// right-looking, left-looking or crout
    #[arg(long, value_parser = parse_variant)]
    variant: Algorithm,
    /// Rows.
    #[arg(long)]
    n: usize,
    /// Columns (defaults to n).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    p: u64,
    /// Target rank (defaults to full).
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, default_value_t = 64)]
    k: usize,
    #[arg(long, default_value_t = 64)]
    threshold: usize,
    #[arg(long, env = "FFPLUQ_WORKERS", default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "on")]
    winograd: Switch,
    /// Factor this .zpm file instead of a generated matrix.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// CSV file to append to.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a plotting script for the CSV.
    #[arg(long, requires = "out")]
    plot: Option<PathBuf>,
}

fn parse_variant(s: &str) -> Result<Algorithm, String> {
    Algorithm::from_name(s).ok_or_else(|| format!("unknown variant {s:?}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match cli.mode {
        Cmd::Bench(a) => (Mode::Bench, a),
        Cmd::Check(a) => (Mode::Check, a),
        Cmd::Count(a) => (Mode::Count, a),
    };
    let cfg = BenchConfig {
        variant: args.variant,
        n: args.n,
        m: args.m.unwrap_or(args.n),
        p: args.p,
        rank: args.rank,
        k: args.k,
        threshold: args.threshold,
        workers: args.workers,
        seed: args.seed,
        winograd: matches!(args.winograd, Switch::On),
        mode,
        input: args.input,
    };
    let result = run(&cfg).and_then(|report| {
        if let Some(out) = &args.out {
            append_csv(out, &report)?;
            if let Some(script) = &args.plot {
                write_plot_script(out, script)?;
            }
        }
        Ok(report)
    });
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    println!(
        "{} {}x{} p={} rank={} {:.4}s {:.3} Gflops checksum={} reductions={}",
        report.variant,
        report.n,
        report.m,
        report.p,
        report.rank_found,
        report.seconds,
        report.gflops(),
        report.checksum,
        report.red_total,
    );
    match mode {
        Mode::Count => match report.predicted {
            Some(p) => println!("measured {} predicted {} diff {}", report.red_total, p, report.red_total as i128 - p),
            None => println!("measured {} (no closed form for this variant or shape)", report.red_total),
        },
        Mode::Check => println!("{}", report.status),
        Mode::Bench => {}
    }
    match report.check() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
