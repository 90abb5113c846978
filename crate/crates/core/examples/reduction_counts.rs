//! Measured modular reductions against the closed-form counts.

use ffpluq::bench::generate_matrix;
use ffpluq::ledger::{count_session, model_count, predicted_count_int, CountedVariant};
use ffpluq::{factor, Algorithm, FactorOptions, GemmPolicy, PrimeField};

fn main() -> ffpluq::Result<()> {
    let f = PrimeField::new(131071)?;
    let rows = [
        (Algorithm::RightLooking, CountedVariant::RightLooking),
        (Algorithm::Crout, CountedVariant::Crout),
        (Algorithm::LeftLooking, CountedVariant::LeftLooking),
        (Algorithm::TileRecursive, CountedVariant::TileRecursive),
        (Algorithm::SlabRecursive, CountedVariant::SlabRecursive),
    ];
    println!("{:<15} {:>4} {:>3} {:>8} {:>8} {:>8}", "variant", "n", "k", "measured", "table", "model");
    for (n, k) in [(4, 1), (8, 2), (16, 4), (64, 8)] {
        let (a, _) = generate_matrix(n, n, n, &f, n as u64)?;
        for (algo, cv) in rows {
            let opts = FactorOptions { k, threshold: 1, policy: GemmPolicy::classical(), workers: 1 };
            let (res, led) = count_session(|led| factor(&f, a.clone(), algo, &opts, led));
            res?;
            println!(
                "{:<15} {n:>4} {k:>3} {:>8} {:>8} {:>8}",
                algo.name(),
                led.total(),
                predicted_count_int(cv, n, k)?,
                model_count(cv, n, k)?
            );
        }
    }
    Ok(())
}
