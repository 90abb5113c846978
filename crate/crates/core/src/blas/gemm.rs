//! Matrix multiplication `C <- alpha A B + beta C` over Z/pZ.

use rayon::prelude::*;

use super::kernel::{axpy, axpy4, four_rows};
use super::GemmPolicy;
use crate::error::{Error, Result};
use crate::field::{Elem, PrimeField};
use crate::ledger::{KernelKind, RedLedger};
use crate::matrix::{even_parts, Mat, MatMut, MatRef};
use crate::par;

const JB: usize = 256;
const KB: usize = 256;

fn check_shapes(a: &MatRef<'_>, b: &MatRef<'_>, c: &MatMut<'_>) -> Result<()> {
    if a.cols() != b.rows() || a.rows() != c.rows() || b.cols() != c.cols() {
        return Err(Error::DimMismatch(format!(
            "gemm {}x{} * {}x{} into {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            c.rows(),
            c.cols()
        )));
    }
    Ok(())
}

/// `C <- (neg ? -AB : AB) + (accumulate ? C : 0)`, chunking the inner
/// dimension by `n_star`. Returns the number of reductions performed.
pub(crate) fn classical_core(
    f: &PrimeField,
    neg: bool,
    a: MatRef<'_>,
    b: MatRef<'_>,
    accumulate: bool,
    mut c: MatMut<'_>,
) -> u64 {
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    if m == 0 || n == 0 {
        return 0;
    }
    if k == 0 {
        if !accumulate {
            c.fill(0);
        }
        return 0;
    }
    let chunk = f.chunk().max(1);
    let w = n.min(JB);
    let mut acc = vec![0u64; m * w];
    let mut count = 0;
    for jc in (0..n).step_by(JB) {
        let nb = JB.min(n - jc);
        for (ci, l0) in (0..k).step_by(chunk).enumerate() {
            let l1 = (l0 + chunk).min(k);
            acc.fill(0);
            for pc in (l0..l1).step_by(KB) {
                let pe = (pc + KB).min(l1);
                let mut r = 0;
                while r + 4 <= m {
                    let (a0, a1, a2, a3) = (a.row(r), a.row(r + 1), a.row(r + 2), a.row(r + 3));
                    for l in pc..pe {
                        let brow = &b.row(l)[jc..jc + nb];
                        let coef = [a0[l] as u64, a1[l] as u64, a2[l] as u64, a3[l] as u64];
                        axpy4(four_rows(&mut acc, r, w), coef, brow);
                    }
                    r += 4;
                }
                for r in r..m {
                    let ar = a.row(r);
                    for l in pc..pe {
                        axpy(&mut acc[r * w..r * w + nb], ar[l] as u64, &b.row(l)[jc..jc + nb]);
                    }
                }
            }
            let fresh = ci == 0 && !accumulate;
            for r in 0..m {
                let crow = &mut c.row_mut(r)[jc..jc + nb];
                let arow = &acc[r * w..r * w + nb];
                match (fresh, neg) {
                    (true, false) => {
                        for (x, &s) in crow.iter_mut().zip(arow) {
                            *x = f.fold_u64(s);
                        }
                    }
                    (true, true) => {
                        for (x, &s) in crow.iter_mut().zip(arow) {
                            *x = f.neg(f.fold_u64(s));
                        }
                    }
                    (false, false) => {
                        for (x, &s) in crow.iter_mut().zip(arow) {
                            *x = f.fold_u64(s + *x as u64);
                        }
                    }
                    (false, true) => {
                        for (x, &s) in crow.iter_mut().zip(arow) {
                            *x = f.fold_i64(*x as i64 - s as i64);
                        }
                    }
                }
            }
            count += (m * nb) as u64;
        }
    }
    count
}

fn scale(f: &PrimeField, beta: Elem, c: &mut MatMut<'_>, ledger: &mut RedLedger) {
    match beta {
        1 => {}
        0 => c.fill(0),
        _ => {
            for r in 0..c.rows() {
                for x in c.row_mut(r) {
                    *x = f.mul_raw(beta, *x);
                }
            }
            ledger.record(KernelKind::Gemm, (c.rows() * c.cols()) as u64);
        }
    }
}

// C <- alpha T + beta C for a canonical product T.
fn combine(
    f: &PrimeField,
    alpha: Elem,
    t: &Mat,
    beta: Elem,
    mut c: MatMut<'_>,
    ledger: &mut RedLedger,
) {
    let keep = beta != 0;
    scale(f, beta, &mut c, ledger);
    let neg = alpha != 1 && alpha == f.p() - 1;
    if alpha != 1 && !neg {
        for r in 0..c.rows() {
            for (x, &y) in c.row_mut(r).iter_mut().zip(t.row(r)) {
                *x = f.fold_u64(alpha as u64 * y as u64 + *x as u64);
            }
        }
        ledger.record(KernelKind::Gemm, (c.rows() * c.cols()) as u64);
        return;
    }
    for r in 0..c.rows() {
        for (x, &y) in c.row_mut(r).iter_mut().zip(t.row(r)) {
            *x = match (keep, neg) {
                (false, false) => y,
                (false, true) => f.neg(y),
                (true, false) => f.add(*x, y),
                (true, true) => f.sub(*x, y),
            };
        }
    }
}

/// Classical multiplication with delayed reduction.
///
/// With `alpha` in `{1, p-1}` and `beta` in `{0, 1}` every entry of `C` is
/// reduced once per `n_star`-long chunk of the inner dimension. Other scalars
/// cost one extra pass each.
pub fn fgemm_classical(
    f: &PrimeField,
    alpha: Elem,
    a: MatRef<'_>,
    b: MatRef<'_>,
    beta: Elem,
    mut c: MatMut<'_>,
    ledger: &mut RedLedger,
) -> Result<()> {
    check_shapes(&a, &b, &c)?;
    if alpha == 0 {
        scale(f, beta, &mut c, ledger);
        return Ok(());
    }
    let neg = alpha != 1 && alpha == f.p() - 1;
    if alpha == 1 || neg {
        let accumulate = beta != 0;
        scale(f, beta, &mut c, ledger);
        let n = classical_core(f, neg, a, b, accumulate, c);
        ledger.record(KernelKind::Gemm, n);
    } else {
        let mut t = Mat::zeros(c.rows(), c.cols());
        let n = classical_core(f, false, a, b, false, t.as_mut());
        ledger.record(KernelKind::Gemm, n);
        combine(f, alpha, &t, beta, c, ledger);
    }
    Ok(())
}

fn add(f: &PrimeField, x: MatRef<'_>, y: MatRef<'_>) -> Mat {
    Mat::from_fn(x.rows(), x.cols(), |i, j| f.add(x.get(i, j), y.get(i, j)))
}

fn sub(f: &PrimeField, x: MatRef<'_>, y: MatRef<'_>) -> Mat {
    Mat::from_fn(x.rows(), x.cols(), |i, j| f.sub(x.get(i, j), y.get(i, j)))
}

// Writes x + y (or x - y) into dst.
fn store(f: &PrimeField, mut dst: MatMut<'_>, x: &Mat, y: &Mat, minus: bool) {
    for i in 0..dst.rows() {
        let (xr, yr) = (x.row(i), y.row(i));
        for (j, d) in dst.row_mut(i).iter_mut().enumerate() {
            *d = if minus { f.sub(xr[j], yr[j]) } else { f.add(xr[j], yr[j]) };
        }
    }
}

// C <- A B with canonical operands at every level.
fn winograd(
    f: &PrimeField,
    a: MatRef<'_>,
    b: MatRef<'_>,
    c: MatMut<'_>,
    levels: usize,
    threshold: usize,
    ledger: &mut RedLedger,
) {
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    if levels == 0 || m.min(k).min(n) < threshold.max(2) {
        ledger.record(KernelKind::Gemm, classical_core(f, false, a, b, false, c));
        return;
    }
    let (me, ke, ne) = (m & !1, k & !1, n & !1);
    let (mh, kh, nh) = (me / 2, ke / 2, ne / 2);
    let (a11, a12) = (a.submatrix(0, 0, mh, kh), a.submatrix(0, kh, mh, kh));
    let (a21, a22) = (a.submatrix(mh, 0, mh, kh), a.submatrix(mh, kh, mh, kh));
    let (b11, b12) = (b.submatrix(0, 0, kh, nh), b.submatrix(0, nh, kh, nh));
    let (b21, b22) = (b.submatrix(kh, 0, kh, nh), b.submatrix(kh, nh, kh, nh));

    let s1 = add(f, a21, a22);
    let s2 = sub(f, s1.as_ref(), a11);
    let s3 = sub(f, a11, a21);
    let s4 = sub(f, a12, s2.as_ref());
    let t1 = sub(f, b12, b11);
    let t2 = sub(f, b22, t1.as_ref());
    let t3 = sub(f, b22, b12);
    let t4 = sub(f, t2.as_ref(), b21);

    let mut rec = |x: MatRef<'_>, y: MatRef<'_>| {
        let mut p = Mat::zeros(mh, nh);
        winograd(f, x, y, p.as_mut(), levels - 1, threshold, ledger);
        p
    };
    let p1 = rec(a11, b11);
    let p2 = rec(a12, b21);
    let p3 = rec(s4.as_ref(), b22);
    let p4 = rec(a22, t4.as_ref());
    let p5 = rec(s1.as_ref(), t1.as_ref());
    let p6 = rec(s2.as_ref(), t2.as_ref());
    let p7 = rec(s3.as_ref(), t3.as_ref());

    let u2 = add(f, p1.as_ref(), p6.as_ref());
    let u3 = add(f, u2.as_ref(), p7.as_ref());
    let u4 = add(f, u2.as_ref(), p5.as_ref());

    let mut c = c;
    {
        let (c11, c12, c21, c22) = c.submatrix_mut(0, 0, me, ne).split_at(mh, nh);
        store(f, c11, &p1, &p2, false);
        store(f, c12, &u4, &p3, false);
        store(f, c21, &u3, &p4, true);
        store(f, c22, &u3, &p5, false);
    }

    // peel odd dimensions with classical fix-ups
    let mut fix = 0;
    if ke < k {
        let (x, y) = (a.submatrix(0, ke, me, 1), b.submatrix(ke, 0, 1, ne));
        fix += classical_core(f, false, x, y, true, c.submatrix_mut(0, 0, me, ne));
    }
    if ne < n {
        fix += classical_core(f, false, a, b.cols_range(ne, n), false, c.submatrix_mut(0, ne, m, 1));
    }
    if me < m {
        let x = a.rows_range(me, m);
        fix += classical_core(f, false, x, b.cols_range(0, ne), false, c.submatrix_mut(me, 0, 1, ne));
    }
    ledger.record(KernelKind::Gemm, fix);
}

/// Multiplication applying up to `policy.winograd_levels` recursive Winograd
/// steps before falling back to the classical kernel. The result is the
/// same as [`fgemm_classical`] for every policy.
pub fn fgemm(
    f: &PrimeField,
    alpha: Elem,
    a: MatRef<'_>,
    b: MatRef<'_>,
    beta: Elem,
    mut c: MatMut<'_>,
    policy: &GemmPolicy,
    ledger: &mut RedLedger,
) -> Result<()> {
    check_shapes(&a, &b, &c)?;
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    if alpha == 0
        || policy.winograd_levels == 0
        || m.min(k).min(n) < policy.winograd_threshold.max(2)
    {
        return fgemm_classical(f, alpha, a, b, beta, c, ledger);
    }
    let mut t = Mat::zeros(m, n);
    winograd(f, a, b, t.as_mut(), policy.winograd_levels, policy.winograd_threshold, ledger);
    combine(f, alpha, &t, beta, c.rb_mut(), ledger);
    Ok(())
}

/// Parallel multiplication: the rows of `A` and the columns of `B` are each
/// split into `grain` parts and the `grain^2` tiles of `C` are computed by
/// independent tasks.
#[allow(clippy::too_many_arguments)]
pub fn pfgemm(
    f: &PrimeField,
    alpha: Elem,
    a: MatRef<'_>,
    b: MatRef<'_>,
    beta: Elem,
    c: MatMut<'_>,
    policy: &GemmPolicy,
    workers: usize,
    ledger: &mut RedLedger,
) -> Result<()> {
    check_shapes(&a, &b, &c)?;
    let grain = policy.grain(workers);
    if grain == 1 {
        return fgemm(f, alpha, a, b, beta, c, policy, ledger);
    }
    let rows = even_parts(a.rows(), grain);
    let cols = even_parts(b.cols(), grain);
    let mut tasks = Vec::with_capacity(rows.len() * cols.len());
    let mut r0 = 0;
    for slab in c.split_rows_by(&rows) {
        let mut c0 = 0;
        let nr = slab.rows();
        for tile in slab.split_cols_by(&cols) {
            let nc = tile.cols();
            tasks.push((a.rows_range(r0, r0 + nr), b.cols_range(c0, c0 + nc), tile));
            c0 += nc;
        }
        r0 += nr;
    }
    let ledgers = par::install(workers, || {
        tasks
            .into_par_iter()
            .map(|(ai, bj, cij)| {
                let mut l = RedLedger::new();
                fgemm(f, alpha, ai, bj, beta, cij, policy, &mut l).map(|_| l)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    *ledger += ledgers.into_iter().sum();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::naive_gemm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PRIMES: [u64; 5] = [2, 3, 5, 65521, 131071];

    fn random(rng: &mut ChaCha8Rng, f: &PrimeField, m: usize, n: usize) -> Mat {
        Mat::from_fn(m, n, |_, _| rng.random_range(0..f.p()))
    }

    #[test]
    fn examples() {
        let f = PrimeField::new(5).unwrap();
        let a = Mat::from_rows(&f, &[[1, 2], [3, 4]]);
        let b = Mat::from_rows(&f, &[[0, 1], [1, 0]]);
        let mut c = Mat::zeros(2, 2);
        fgemm_classical(&f, 1, a.as_ref(), b.as_ref(), 0, c.as_mut(), &mut RedLedger::new()).unwrap();
        assert_eq!(c, Mat::from_rows(&f, &[[2, 1], [4, 3]]));
        fgemm_classical(&f, 1, Mat::identity(2).as_ref(), b.as_ref(), 0, c.as_mut(), &mut RedLedger::new()).unwrap();
        assert_eq!(c, b);

        let mut led = RedLedger::new();
        let mut c = Mat::zeros(2, 3);
        fgemm_classical(&f, 1, Mat::zeros(2, 4).as_ref(), Mat::zeros(4, 3).as_ref(), 1, c.as_mut(), &mut led).unwrap();
        assert_eq!((led.total(), led.gemm), (6, 6));
        assert!(fgemm_classical(&f, 1, a.as_ref(), a.as_ref(), 0, c.as_mut(), &mut led).is_err());
    }

    #[test]
    fn scalars_match_the_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in PRIMES {
            let f = PrimeField::new(p).unwrap();
            let (a, b, c0) = (random(&mut rng, &f, 7, 9), random(&mut rng, &f, 9, 5), random(&mut rng, &f, 7, 5));
            let ab = naive_gemm(&f, &a, &b).unwrap();
            for alpha in [0, 1, f.p() - 1, 2 % f.p()] {
                for beta in [0, 1, f.p() - 1, 3 % f.p()] {
                    let mut c = c0.clone();
                    fgemm_classical(&f, alpha, a.as_ref(), b.as_ref(), beta, c.as_mut(), &mut RedLedger::new()).unwrap();
                    let want = Mat::from_fn(7, 5, |i, j| {
                        let x = alpha as u64 * ab[(i, j)] as u64 + beta as u64 * c0[(i, j)] as u64;
                        (x % p) as Elem
                    });
                    assert_eq!(c, want, "p={p} alpha={alpha} beta={beta}");
                }
            }
        }
    }

    #[test]
    fn chunked_accumulation_counts() {
        // 8-bit accumulator mod 5 holds 16 products of 4*4 minus headroom
        let f = PrimeField::with_acc_bits(5, 8).unwrap();
        let ns = f.n_star() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for k in [1, ns, ns + 1, 3 * ns + 2] {
            let (a, b) = (random(&mut rng, &f, 3, k), random(&mut rng, &f, k, 4));
            let mut c = Mat::zeros(3, 4);
            let mut led = RedLedger::new();
            fgemm_classical(&f, 1, a.as_ref(), b.as_ref(), 0, c.as_mut(), &mut led).unwrap();
            assert_eq!(c, naive_gemm(&f, &a, &b).unwrap());
            assert_eq!(led.total(), (12 * k.div_ceil(ns)) as u64, "k={k} n_star={ns}");
        }
    }

    #[test]
    fn winograd_matches_classical() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f5 = PrimeField::new(5).unwrap();
        let cases = [(f5, 8, 8, 8, 2, 3), (f5, 5, 5, 5, 2, 1), (PrimeField::new(131071).unwrap(), 33, 17, 41, 4, 2)];
        for (f, m, k, n, thr, levels) in cases {
            let (a, b, c0) = (random(&mut rng, &f, m, k), random(&mut rng, &f, k, n), random(&mut rng, &f, m, n));
            let mut want = c0.clone();
            fgemm_classical(&f, 1, a.as_ref(), b.as_ref(), 1, want.as_mut(), &mut RedLedger::new()).unwrap();
            let mut c = c0.clone();
            let pol = GemmPolicy::winograd(levels, thr);
            fgemm(&f, 1, a.as_ref(), b.as_ref(), 1, c.as_mut(), &pol, &mut RedLedger::new()).unwrap();
            assert_eq!(c, want, "{m}x{k}x{n}");
        }
    }

    #[test]
    fn disabled_cascade_counts_like_classical() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = PrimeField::new(65521).unwrap();
        let (a, b) = (random(&mut rng, &f, 40, 40), random(&mut rng, &f, 40, 40));
        let (mut c1, mut c2) = (Mat::zeros(40, 40), Mat::zeros(40, 40));
        let (mut l1, mut l2) = (RedLedger::new(), RedLedger::new());
        fgemm_classical(&f, 1, a.as_ref(), b.as_ref(), 0, c1.as_mut(), &mut l1).unwrap();
        fgemm(&f, 1, a.as_ref(), b.as_ref(), 0, c2.as_mut(), &GemmPolicy::classical(), &mut l2).unwrap();
        assert_eq!((c1, l1), (c2, l2));
    }

    #[test]
    fn parallel_tiles_are_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = PrimeField::new(131071).unwrap();
        let (a, b, c0) = (random(&mut rng, &f, 64, 64), random(&mut rng, &f, 64, 64), random(&mut rng, &f, 64, 64));
        let pol = GemmPolicy::winograd(2, 8);
        let mut base = c0.clone();
        let mut lbase = RedLedger::new();
        fgemm(&f, f.p() - 1, a.as_ref(), b.as_ref(), 1, base.as_mut(), &pol, &mut lbase).unwrap();
        let mut c = c0.clone();
        let mut led = RedLedger::new();
        pfgemm(&f, f.p() - 1, a.as_ref(), b.as_ref(), 1, c.as_mut(), &pol, 1, &mut led).unwrap();
        assert_eq!((&c, led), (&base, lbase));
        for grain in [2, 4] {
            let mut first = None;
            for workers in [2, 4, 8] {
                let mut c = c0.clone();
                let mut led = RedLedger::new();
                let pol = pol.with_grain(grain);
                pfgemm(&f, f.p() - 1, a.as_ref(), b.as_ref(), 1, c.as_mut(), &pol, workers, &mut led).unwrap();
                assert_eq!(c, base);
                match &first {
                    None => first = Some(led),
                    Some(l) => assert_eq!(*l, led),
                }
            }
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(200))]
        #[test]
        fn any_policy_matches_the_oracle(
            pi in 0usize..5, m in 1usize..66, k in 1usize..66, n in 1usize..66,
            levels in 0usize..4, thr in 2usize..20, seed: u64,
        ) {
            let f = PrimeField::new(PRIMES[pi]).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b) = (random(&mut rng, &f, m, k), random(&mut rng, &f, k, n));
            let mut c = Mat::zeros(m, n);
            fgemm(&f, 1, a.as_ref(), b.as_ref(), 0, c.as_mut(), &GemmPolicy::winograd(levels, thr), &mut RedLedger::new()).unwrap();
            proptest::prop_assert_eq!(c, naive_gemm(&f, &a, &b).unwrap());
        }
    }
}
