//! Programmatic use of the harness: a small worker sweep written to CSV.

use ffpluq::bench::{append_csv, run, write_plot_script, BenchConfig, Mode};
use ffpluq::Algorithm;

fn main() -> ffpluq::Result<()> {
    let dir = std::env::temp_dir().join("ffpluq-bench");
    std::fs::create_dir_all(&dir)?;
    let csv = dir.join("sweep.csv");
    let cores = std::thread::available_parallelism().map_or(1, |w| w.get());

    for algo in [Algorithm::TileRecursive, Algorithm::SlabIterative] {
        for workers in [1, 2, cores.max(4)] {
            let mut cfg = BenchConfig::new(algo, 512, 131071);
            cfg.rank = Some(496);
            cfg.k = 64;
            cfg.workers = workers;
            cfg.seed = 1;
            let r = run(&cfg)?;
            println!("{:<15} workers {workers}: {:.3}s {:.2} Gflops {}", r.variant, r.seconds, r.gflops(), r.checksum);
            append_csv(&csv, &r)?;
        }
    }

    let mut cfg = BenchConfig::new(Algorithm::TileIterative, 128, 65521);
    cfg.mode = Mode::Check;
    cfg.rank = Some(100);
    cfg.k = 16;
    run(&cfg)?.check()?;

    write_plot_script(&csv, &dir.join("plot.py"))?;
    println!("wrote {} and plot.py", csv.display());
    Ok(())
}
