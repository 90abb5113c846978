//! Rank profiles of a rank-deficient matrix from every rank-revealing variant.

use ffpluq::bench::generate_matrix;
use ffpluq::oracle::{naive_rank_profiles, reconstruct};
use ffpluq::pluq::extract_profiles;
use ffpluq::{factor, Algorithm, FactorOptions, Mat, PrimeField, RedLedger};

fn main() -> ffpluq::Result<()> {
    let f = PrimeField::new(5)?;
    let a = Mat::from_rows(&f, &[[0, 1, 2], [0, 2, 4], [1, 0, 0]]);
    let res = factor(&f, a.clone(), Algorithm::BaseCrout, &FactorOptions::default(), &mut RedLedger::new())?;
    let pr = extract_profiles(&res)?;
    println!("rank {} rows {:?} cols {:?}", pr.rank, pr.rows, pr.cols);
    println!("P = {:?}\nQ = {:?}", res.p.moves(), res.q.moves());

    let f = PrimeField::new(65521)?;
    let (a, intended) = generate_matrix(40, 30, 17, &f, 7)?;
    assert_eq!(naive_rank_profiles(&f, &a), intended);
    println!("intended rows {:?}", intended.rows);
    let opts = FactorOptions { k: 8, threshold: 4, ..FactorOptions::default() };
    for algo in Algorithm::RANK_REVEALING {
        let res = factor(&f, a.clone(), algo, &opts, &mut RedLedger::new())?;
        assert_eq!(reconstruct(&f, &res), a);
        let pr = extract_profiles(&res)?;
        println!(
            "{:<15} rank {} rows ok {} cols ok {}",
            algo.name(),
            pr.rank,
            pr.rows == intended.rows,
            pr.cols == intended.cols
        );
    }
    Ok(())
}
