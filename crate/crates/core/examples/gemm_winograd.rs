//! Classical and Winograd multiplication agree; only the work differs.

use std::time::Instant;

use ffpluq::blas::{fgemm, fgemm_classical, pfgemm};
use ffpluq::{GemmPolicy, Mat, PrimeField, RedLedger};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> ffpluq::Result<()> {
    let f = PrimeField::new(65521)?;
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1025);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = Mat::from_fn(n, n, |_, _| rng.random_range(0..f.p()));
    let b = Mat::from_fn(n, n, |_, _| rng.random_range(0..f.p()));

    let mut c1 = Mat::zeros(n, n);
    let mut led = RedLedger::new();
    let t = Instant::now();
    fgemm_classical(&f, 1, a.as_ref(), b.as_ref(), 0, c1.as_mut(), &mut led)?;
    println!("classical   {:>8.3}s  {}", t.elapsed().as_secs_f64(), led);

    for levels in 1..=3 {
        let mut c = Mat::zeros(n, n);
        let mut led = RedLedger::new();
        let t = Instant::now();
        fgemm(&f, 1, a.as_ref(), b.as_ref(), 0, c.as_mut(), &GemmPolicy::winograd(levels, 128), &mut led)?;
        println!("winograd x{levels} {:>8.3}s  {}  same: {}", t.elapsed().as_secs_f64(), led, c == c1);
    }

    let mut c = Mat::zeros(n, n);
    let workers = std::thread::available_parallelism().map_or(1, |w| w.get());
    pfgemm(&f, 1, a.as_ref(), b.as_ref(), 0, c.as_mut(), &GemmPolicy::classical(), workers, &mut RedLedger::new())?;
    println!("parallel on {workers} workers, same: {}", c == c1);
    Ok(())
}
