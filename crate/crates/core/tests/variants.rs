use ffpluq::bench::generate_matrix;
use ffpluq::oracle::{naive_rank_profiles, prefix_rank_row_profile, reconstruct};
use ffpluq::pluq::extract_profiles;
use ffpluq::{factor, Algorithm, FactorOptions, GemmPolicy, Mat, PrimeField, RedLedger};
use proptest::prelude::*;

const PRIMES: [u64; 5] = [2, 3, 5, 65521, 131071];

fn opts(k: usize, threshold: usize, workers: usize) -> FactorOptions {
    FactorOptions { k, threshold, policy: GemmPolicy::classical(), workers }
}

fn shape() -> impl Strategy<Value = (PrimeField, Mat)> {
    (0usize..5, 1usize..24, 1usize..24, 0usize..=100, any::<u64>()).prop_map(|(pi, m, n, pct, seed)| {
        let f = PrimeField::new(PRIMES[pi]).unwrap();
        let rank = m.min(n) * pct / 100;
        (f, generate_matrix(m, n, rank, &f, seed).unwrap().0)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_revealing_variants_agree((f, a) in shape(), k in 1usize..9, thr in 1usize..9) {
        let want = naive_rank_profiles(&f, &a);
        for algo in Algorithm::RANK_REVEALING {
            let res = factor(&f, a.clone(), algo, &opts(k, thr, 1), &mut RedLedger::new()).unwrap();
            prop_assert!(res.p.is_rot_only() && res.q.is_rot_only());
            prop_assert_eq!(&reconstruct(&f, &res), &a);
            let got = extract_profiles(&res).unwrap();
            prop_assert_eq!(got.rank, want.rank);
            prop_assert_eq!(&got.rows, &want.rows);
            if algo != Algorithm::SlabRecursive {
                prop_assert_eq!(&got.cols, &want.cols);
            }
        }
    }

    #[test]
    fn tile_recursive_is_threshold_invariant((f, a) in shape()) {
        let profiles: Vec<_> = [1, 2, 5, 64]
            .into_iter()
            .map(|thr| {
                let res = factor(&f, a.clone(), Algorithm::TileRecursive, &opts(1, thr, 1), &mut RedLedger::new()).unwrap();
                extract_profiles(&res).unwrap()
            })
            .collect();
        prop_assert!(profiles.windows(2).all(|w| w[0] == w[1]));
    }
}

#[test]
fn oracle_profiles_match_the_prefix_definition() {
    for (i, p) in PRIMES.into_iter().enumerate() {
        let f = PrimeField::new(p).unwrap();
        let (a, _) = generate_matrix(20, 14, 9, &f, i as u64).unwrap();
        let fast = naive_rank_profiles(&f, &a);
        assert_eq!(fast.rows, prefix_rank_row_profile(&f, &a));
        assert_eq!(fast.cols, prefix_rank_row_profile(&f, &a.transpose()));
    }
}

#[test]
fn full_rank_variants_share_one_factorization() {
    let f = PrimeField::new(131071).unwrap();
    let (a, _) = generate_matrix(45, 45, 45, &f, 5).unwrap();
    let mut outputs = Vec::new();
    for algo in [Algorithm::RightLooking, Algorithm::LeftLooking, Algorithm::Crout] {
        for k in [1, 4, 7, 45] {
            for workers in [1, 3] {
                let res = factor(&f, a.clone(), algo, &opts(k, 1, workers), &mut RedLedger::new()).unwrap();
                assert_eq!(reconstruct(&f, &res), a);
                outputs.push(res.lu);
            }
        }
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn slab_variants_also_reveal_profiles_of_tall_and_wide_inputs() {
    let f = PrimeField::new(65521).unwrap();
    for (m, n, r) in [(64, 20, 17), (20, 64, 19), (60, 60, 1)] {
        let (a, want) = generate_matrix(m, n, r, &f, (m * n) as u64).unwrap();
        for algo in Algorithm::RANK_REVEALING {
            let res = factor(&f, a.clone(), algo, &opts(6, 3, 2), &mut RedLedger::new()).unwrap();
            let got = extract_profiles(&res).unwrap();
            assert_eq!(got.rows, want.rows, "{} {m}x{n}", algo.name());
            if algo != Algorithm::SlabRecursive {
                assert_eq!(got.cols, want.cols, "{} {m}x{n}", algo.name());
            }
        }
    }
}
