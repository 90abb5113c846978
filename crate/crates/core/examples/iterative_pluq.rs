//! Slab iterative and tile iterative PLUQ on a matrix with low rank deficiency.

use ffpluq::bench::generate_matrix;
use ffpluq::oracle::reconstruct;
use ffpluq::pluq::{extract_profiles, pluq_slab_iterative, pluq_tile_iterative};
use ffpluq::{GemmPolicy, PrimeField, RedLedger};

fn main() -> ffpluq::Result<()> {
    let f = PrimeField::new(131071)?;
    let (a, intended) = generate_matrix(160, 160, 155, &f, 16)?;
    let policy = GemmPolicy::default();

    let mut lu = a.clone();
    let mut led = RedLedger::new();
    let pl = pluq_slab_iterative(&f, lu.as_mut(), 16, &policy, 2, &mut led)?;
    let res = pl.into_result(lu);
    assert_eq!(reconstruct(&f, &res), a);
    println!("slab iterative: rank {}, {}", res.rank, led);

    let mut lu = a.clone();
    let mut led = RedLedger::new();
    let pl = pluq_tile_iterative(&f, lu.as_mut(), 16, &policy, 2, &mut led)?;
    let res = pl.into_result(lu);
    let pr = extract_profiles(&res)?;
    println!("tile iterative: rank {}, {}", res.rank, led);
    println!("missing rows {:?}", (0..160).filter(|i| !pr.rows.contains(i)).collect::<Vec<_>>());
    assert_eq!(pr, intended);
    Ok(())
}
