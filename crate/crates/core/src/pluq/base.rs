//! Unblocked base cases.

use super::{Pivoting, Pluq};
use crate::error::{Error, Result};
use crate::field::{Elem, PrimeField};
use crate::ledger::{KernelKind, RedLedger};
use crate::matrix::MatMut;
use crate::perm::PermSeq;

// init - sum x*y, folded once per n_star products.
fn dot_sub(
    f: &PrimeField,
    init: Elem,
    pairs: impl Iterator<Item = (Elem, Elem)>,
    count: &mut u64,
) -> Elem {
    let chunk = f.chunk().max(1);
    let mut acc = init as u64;
    let mut terms = 0;
    for (x, y) in pairs {
        if terms == chunk {
            acc = f.fold_u64(acc) as u64;
            *count += 1;
            terms = 0;
        }
        acc += f.neg(x) as u64 * y as u64;
        terms += 1;
    }
    *count += 1;
    f.fold_u64(acc)
}

/// Unblocked Crout LU of a square block with a generic rank profile.
///
/// Step 0 only divides the column below the pivot. Each later step reduces
/// the new diagonal entry and the column below it once, divides that column
/// (one more reduction per entry), and reduces the row to the right once per
/// entry: `(k-1)(3k-2)/2` reductions in total.
pub fn crout_base(f: &PrimeField, mut a: MatMut<'_>, ledger: &mut RedLedger) -> Result<Pluq> {
    let k = a.rows();
    if a.cols() != k {
        return Err(Error::DimMismatch(format!("crout base on a {}x{} block", k, a.cols())));
    }
    let mut count = 0u64;
    for i in 0..k {
        let d = if i == 0 {
            a.get(0, 0)
        } else {
            let pairs = (0..i).map(|l| (a.get(i, l), a.get(l, i)));
            let d = dot_sub(f, a.get(i, i), pairs.collect::<Vec<_>>().into_iter(), &mut count);
            a.set(i, i, d);
            d
        };
        let inv = f.inv_raw(d).map_err(|_| Error::ZeroPivot(i))?;
        for r in i + 1..k {
            let v = if i == 0 {
                a.get(r, 0)
            } else {
                let pairs: Vec<_> = (0..i).map(|l| (a.get(r, l), a.get(l, i))).collect();
                dot_sub(f, a.get(r, i), pairs.into_iter(), &mut count)
            };
            a.set(r, i, f.mul_raw(v, inv));
            count += 1;
        }
        if i > 0 {
            for j in i + 1..k {
                let pairs: Vec<_> = (0..i).map(|l| (a.get(i, l), a.get(l, j))).collect();
                let v = dot_sub(f, a.get(i, j), pairs.into_iter(), &mut count);
                a.set(i, j, v);
            }
        }
    }
    ledger.record(KernelKind::PluqBase, count);
    Ok(Pluq::identity(k, k, k, Pivoting::Generic))
}

fn rotate_rows(a: &mut MatMut<'_>, t: usize, i: usize) {
    let saved = a.row(i).to_vec();
    for r in (t..i).rev() {
        let (dst, src) = a.two_rows_mut(r + 1, r);
        dst.copy_from_slice(src);
    }
    a.row_mut(t).copy_from_slice(&saved);
}

/// Rank-revealing elimination of any matrix.
///
/// The pivot is the first nonzero entry of the first nonzero row of the
/// remaining submatrix; it is moved to the diagonal by rotating whole rows
/// and whole columns, so non-pivot rows and columns keep their order.
pub fn rr_base(f: &PrimeField, mut a: MatMut<'_>, ledger: &mut RedLedger) -> Pluq {
    let (m, n) = (a.rows(), a.cols());
    let mut p = PermSeq::identity(m);
    let mut q = PermSeq::identity(n);
    let mut count = 0u64;
    let mut t = 0;
    // rows before `scan` (and at or past t) are zero in the trailing columns
    let mut scan = 0;
    while t < m.min(n) {
        let mut pivot = None;
        for i in scan.max(t)..m {
            if let Some(off) = a.row(i)[t..].iter().position(|&x| x != 0) {
                pivot = Some((i, t + off));
                break;
            }
        }
        let Some((i, j)) = pivot else { break };
        if i > t {
            rotate_rows(&mut a, t, i);
            p.rot(t, i);
        }
        if j > t {
            for r in 0..m {
                a.row_mut(r)[t..=j].rotate_right(1);
            }
            q.rot(t, j);
        }
        scan = i + 1;
        let inv = f.inv_raw(a.get(t, t)).expect("nonzero pivot");
        let urow = a.row(t)[t + 1..].to_vec();
        for r in i + 1..m {
            let x = a.get(r, t);
            if x == 0 {
                continue;
            }
            let l = f.mul_raw(x, inv);
            a.set(r, t, l);
            let nl = f.neg(l) as u64;
            for (y, &u) in a.row_mut(r)[t + 1..].iter_mut().zip(&urow) {
                *y = f.fold_u64(*y as u64 + nl * u as u64);
            }
            count += 1 + urow.len() as u64;
        }
        t += 1;
    }
    ledger.record(KernelKind::PluqBase, count);
    Pluq {
        p,
        q,
        rank: t,
        pivoting: Pivoting::RankRevealing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::crout_base_count;
    use crate::matrix::Mat;
    use crate::oracle::{naive_rank_profiles, reconstruct};
    use crate::pluq::extract_profiles;

    #[test]
    fn crout_base_small_cases() {
        let f = PrimeField::new(131071).unwrap();
        let a = Mat::from_rows(&f, &[[5, 7], [11, 13]]);
        let mut lu = a.clone();
        let mut led = RedLedger::new();
        let pl = crout_base(&f, lu.as_mut(), &mut led).unwrap();
        assert_eq!(led.total(), 2);
        assert_eq!(led.pluq_base, 2);
        assert_eq!(reconstruct(&f, &pl.into_result(lu)), a);

        let mut id = Mat::identity(5);
        let mut led = RedLedger::new();
        crout_base(&f, id.as_mut(), &mut led).unwrap();
        assert_eq!(id, Mat::identity(5));
        assert_eq!(led.total(), crout_base_count(5));

        let mut anti = Mat::from_rows(&f, &[[0, 1], [1, 0]]);
        assert_eq!(crout_base(&f, anti.as_mut(), &mut led), Err(Error::ZeroPivot(0)));
    }

    #[test]
    fn crout_base_count_formula() {
        let f = PrimeField::new(65521).unwrap();
        for k in 1..=12usize {
            // unit lower times upper with nonzero diagonal: generic rank profile
            let l = Mat::from_fn(k, k, |i, j| if i > j { ((i * 7 + j * 3) % 11) as Elem } else { (i == j) as Elem });
            let u = Mat::from_fn(k, k, |i, j| if j >= i { ((i + 2 * j) % 13 + (i == j) as usize) as Elem } else { 0 });
            let a = crate::oracle::naive_gemm(&f, &l, &u).unwrap();
            let mut lu = a.clone();
            let mut led = RedLedger::new();
            crout_base(&f, lu.as_mut(), &mut led).unwrap();
            assert_eq!(led.total(), ((k - 1) * (3 * k - 2) / 2) as u64, "k={k}");
            for i in 0..k {
                for j in 0..k {
                    let want = if i > j { l[(i, j)] } else { u[(i, j)] };
                    assert_eq!(lu[(i, j)], want);
                }
            }
        }
    }

    #[test]
    fn rr_base_examples() {
        let f = PrimeField::new(5).unwrap();
        let a = Mat::from_rows(&f, &[[0, 1, 2], [0, 2, 4], [1, 0, 0]]);
        let mut lu = a.clone();
        let res = rr_base(&f, lu.as_mut(), &mut RedLedger::new()).into_result(lu);
        assert_eq!(res.rank, 2);
        assert_eq!(reconstruct(&f, &res), a);
        let pr = extract_profiles(&res).unwrap();
        assert_eq!((pr.rows, pr.cols), (vec![0, 2], vec![0, 1]));
        assert!(res.p.is_rot_only() && res.q.is_rot_only());

        let mut z = Mat::zeros(3, 4);
        let res = rr_base(&f, z.as_mut(), &mut RedLedger::new());
        assert_eq!(res.rank, 0);
        assert!(res.p.is_identity() && res.q.is_identity());

        let mut id = Mat::identity(4);
        let res = rr_base(&f, id.as_mut(), &mut RedLedger::new()).into_result(id);
        assert_eq!(extract_profiles(&res).unwrap().rows, vec![0, 1, 2, 3]);
    }

    #[test]
    fn rr_base_matches_oracle_on_structured_inputs() {
        let f = PrimeField::new(7).unwrap();
        let mut seed = 12345u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 33) as usize
        };
        for _ in 0..200 {
            let (m, n) = (1 + next() % 9, 1 + next() % 9);
            // sparse entries and repeated rows give plenty of rank deficiency
            let mut a = Mat::from_fn(m, n, |_, _| 0);
            for i in 0..m {
                for j in 0..n {
                    if next() % 3 == 0 {
                        a[(i, j)] = (next() % 7) as Elem;
                    }
                }
            }
            if m > 2 {
                let (s, d) = (next() % m, next() % m);
                for j in 0..n {
                    a[(d, j)] = a[(s, j)];
                }
            }
            let mut lu = a.clone();
            let res = rr_base(&f, lu.as_mut(), &mut RedLedger::new()).into_result(lu);
            assert_eq!(reconstruct(&f, &res), a);
            let want = naive_rank_profiles(&f, &a);
            let got = extract_profiles(&res).unwrap();
            assert_eq!(got, want, "{a:?}");
        }
    }
}
