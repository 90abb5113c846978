//! Block LU of a generic matrix with the three looking variants.

use ffpluq::ledger::{predicted_count_int, CountedVariant};
use ffpluq::pluq::{variant_task_graph, LoopKind};
use ffpluq::bench::generate_matrix;
use ffpluq::oracle::reconstruct;
use ffpluq::{factor, Algorithm, FactorOptions, GemmPolicy, KernelKind, PrimeField, RedLedger};

fn main() -> ffpluq::Result<()> {
    let f = PrimeField::new(131071)?;
    let (n, k) = (32, 8);
    let (a, _) = generate_matrix(n, n, n, &f, 42)?;
    let opts = FactorOptions { k, policy: GemmPolicy::classical(), ..FactorOptions::default() };

    for (algo, cv) in [
        (Algorithm::RightLooking, CountedVariant::RightLooking),
        (Algorithm::Crout, CountedVariant::Crout),
        (Algorithm::LeftLooking, CountedVariant::LeftLooking),
    ] {
        let mut led = RedLedger::new();
        let res = factor(&f, a.clone(), algo, &opts, &mut led)?;
        assert_eq!(reconstruct(&f, &res), a);
        println!(
            "{:<13} reductions {:>5} (table {:>5})  {}",
            algo.name(),
            led.total(),
            predicted_count_int(cv, n, k)?,
            led
        );
    }

    for kind in [LoopKind::RightLooking, LoopKind::Crout, LoopKind::LeftLooking] {
        let graph = variant_task_graph(kind, n, k)?;
        let it = &graph[1];
        println!(
            "{kind:?} iteration 2: {} tasks, {} gemm, gemms independent: {}",
            it.tasks.len(),
            it.count(KernelKind::Gemm),
            it.independent(KernelKind::Gemm)
        );
    }
    Ok(())
}
