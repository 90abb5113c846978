//! Tile recursive and slab recursive PLUQ, sequential and parallel.

use std::time::Instant;

use ffpluq::bench::{checksum, generate_matrix};
use ffpluq::pluq::{pluq_slab_recursive, pluq_tile_recursive};
use ffpluq::{GemmPolicy, PrimeField, RedLedger};

fn main() -> ffpluq::Result<()> {
    let f = PrimeField::new(131071)?;
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let (a, _) = generate_matrix(n, n, n * 31 / 32, &f, 3)?;
    let policy = GemmPolicy::default();
    let cores = std::thread::available_parallelism().map_or(1, |w| w.get());

    for workers in [1, cores] {
        let mut lu = a.clone();
        let mut led = RedLedger::new();
        let t = Instant::now();
        let pl = pluq_tile_recursive(&f, lu.as_mut(), 64, &policy, workers, &mut led)?;
        let secs = t.elapsed().as_secs_f64();
        let sum = checksum(&pl.clone().into_result(lu));
        println!("tile recursive, {workers} workers: rank {} in {secs:.3}s, checksum {sum}", pl.rank);
    }

    let mut lu = a.clone();
    let t = Instant::now();
    let pl = pluq_slab_recursive(&f, lu.as_mut(), 64, &policy, cores, &mut RedLedger::new())?;
    println!("slab recursive: rank {} in {:.3}s", pl.rank, t.elapsed().as_secs_f64());
    Ok(())
}
