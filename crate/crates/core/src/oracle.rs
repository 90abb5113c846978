//! Slow reference implementations used by the tests.
//!
//! Nothing here calls the optimized kernels: products are reduced after
//! every multiply-add and permutations are replayed move by move on vectors
//! of rows.

use crate::error::{Error, Result};
use crate::field::{Elem, PrimeField};
use crate::matrix::Mat;
use crate::perm::Move;
use crate::pluq::{PluqResult, RankProfiles};

/// Triple-loop product, reducing after every multiply-add.
pub fn naive_gemm(f: &PrimeField, a: &Mat, b: &Mat) -> Result<Mat> {
    if a.cols() != b.rows() {
        return Err(Error::DimMismatch(format!(
            "{}x{} * {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let p = f.p() as u64;
    let mut c = Mat::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut s = 0u64;
            for l in 0..a.cols() {
                s = (s + a[(i, l)] as u64 * b[(l, j)] as u64) % p;
            }
            c[(i, j)] = s as Elem;
        }
    }
    Ok(c)
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % p;
        }
        a = a * a % p;
        e >>= 1;
    }
    r
}

// Indices of the rows that are independent of all earlier rows.
fn independent_rows(f: &PrimeField, a: &Mat) -> Vec<usize> {
    let p = f.p() as u64;
    // reduced basis: (pivot column, row normalised to 1 at the pivot)
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut picked = Vec::new();
    for i in 0..a.rows() {
        let mut v: Vec<u64> = a.row(i).iter().map(|&x| x as u64).collect();
        for (c, b) in &basis {
            let t = v[*c];
            if t != 0 {
                for (x, y) in v.iter_mut().zip(b) {
                    *x = (*x + (p - t) * y) % p;
                }
            }
        }
        if let Some(c) = v.iter().position(|&x| x != 0) {
            let s = pow_mod(v[c], p - 2, p);
            for x in &mut v {
                *x = *x * s % p;
            }
            basis.push((c, v));
            picked.push(i);
        }
    }
    picked
}

/// Row and column rank profiles by incremental elimination: row `i` is in
/// the row profile iff it is not in the span of rows `0..i`.
pub fn naive_rank_profiles(f: &PrimeField, a: &Mat) -> RankProfiles {
    let rows = independent_rows(f, a);
    let cols = independent_rows(f, &a.transpose());
    debug_assert_eq!(rows.len(), cols.len());
    RankProfiles { rank: rows.len(), rows, cols }
}

/// Rank by a fresh elimination.
pub fn naive_rank(f: &PrimeField, a: &Mat) -> usize {
    independent_rows(f, a).len()
}

/// Definitional row profile: `i` is selected iff the rank of rows `0..=i`
/// exceeds the rank of rows `0..i`. Cost grows like `m` eliminations.
pub fn prefix_rank_row_profile(f: &PrimeField, a: &Mat) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prev = 0;
    for i in 0..a.rows() {
        let prefix = Mat::from_fn(i + 1, a.cols(), |r, c| a[(r, c)]);
        let r = naive_rank(f, &prefix);
        if r > prev {
            out.push(i);
        }
        prev = r;
    }
    out
}

// Undoes one move on a list of lines.
fn undo<T>(v: &mut Vec<T>, m: Move) {
    match m {
        Move::Swap(i, j) => v.swap(i, j),
        Move::Rot(i, j) => {
            let x = v.remove(i);
            v.insert(j, x);
        }
    }
}

/// Expands `L` (unit lower, `m x r`) and `U` (upper, `r x n`) from the packed
/// factors, multiplies them and undoes the recorded permutations.
pub fn reconstruct(f: &PrimeField, res: &PluqResult) -> Mat {
    let lu = &res.lu;
    let (m, n, r) = (lu.rows(), lu.cols(), res.rank);
    let l = Mat::from_fn(m, r, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Greater => lu[(i, j)],
        std::cmp::Ordering::Equal => 1,
        std::cmp::Ordering::Less => 0,
    });
    let u = Mat::from_fn(r, n, |i, j| if j >= i { lu[(i, j)] } else { 0 });
    let prod = naive_gemm(f, &l, &u).expect("conforming factors");

    let mut rows: Vec<Vec<Elem>> = (0..m).map(|i| prod.row(i).to_vec()).collect();
    for &mv in res.p.moves().iter().rev() {
        undo(&mut rows, mv);
    }
    let mut cols: Vec<usize> = (0..n).collect();
    for &mv in res.q.moves().iter().rev() {
        undo(&mut cols, mv);
    }
    // cols[t] = position in the product of original column t
    Mat::from_fn(m, n, |i, t| rows[i][cols[t]])
}
