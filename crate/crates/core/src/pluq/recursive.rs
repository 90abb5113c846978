//! Recursive rank-revealing PLUQ: quadrant splitting and row-slab splitting.

use super::base::rr_base;
use super::{Pivoting, Pluq};
use crate::blas::{pfgemm, pflaswp, pftrsm, Diag, GemmPolicy, Side, Uplo};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::ledger::RedLedger;
use crate::matrix::{MatMut, MatRef};
use crate::par;
use crate::perm::{self, Dir, PermSeq};

struct Ctx<'a> {
    f: &'a PrimeField,
    threshold: usize,
    policy: &'a GemmPolicy,
    workers: usize,
}

impl Ctx<'_> {
    fn grain(&self) -> usize {
        self.policy.grain(self.workers)
    }

    fn rows(&self, p: &PermSeq, a: MatMut<'_>) -> Result<()> {
        pflaswp(p, a, perm::Side::Rows, Dir::Forward, self.grain(), self.workers)
    }

    fn cols(&self, q: &PermSeq, a: MatMut<'_>) -> Result<()> {
        pflaswp(q, a, perm::Side::Cols, Dir::Forward, self.grain(), self.workers)
    }

    // c <- c - x y
    fn gemm(&self, x: MatRef<'_>, y: MatRef<'_>, c: MatMut<'_>, led: &mut RedLedger) -> Result<()> {
        if x.cols() == 0 {
            return Ok(());
        }
        pfgemm(self.f, self.f.p() - 1, x, y, 1, c, self.policy, self.workers, led)
    }

    // b <- l^-1 b, l unit lower
    fn utrsm(&self, l: MatRef<'_>, b: MatMut<'_>, led: &mut RedLedger) -> Result<()> {
        pftrsm(self.f, Side::Left, Uplo::Lower, Diag::Unit, l, b, self.grain(), self.workers, led)
    }

    // b <- b u^-1, u upper
    fn trsm(&self, u: MatRef<'_>, b: MatMut<'_>, led: &mut RedLedger) -> Result<()> {
        pftrsm(self.f, Side::Right, Uplo::Upper, Diag::NonUnit, u, b, self.grain(), self.workers, led)
    }
}

fn check_threshold(threshold: usize) -> Result<()> {
    if threshold == 0 {
        return Err(Error::Config("recursion threshold must be at least 1".into()));
    }
    Ok(())
}

/// Rank-revealing PLUQ by recursive splitting into four quadrants.
///
/// After factoring the top-left quadrant the off-diagonal quadrants are
/// eliminated against it and factored in parallel; the Schur complement of
/// all three is factored last. Pivots end up ordered as top-left, top-right,
/// bottom-left, bottom-right, gathered by order-preserving rotations, so
/// both rank profiles are revealed. Blocks with `min(m, n) <= threshold` use
/// [`rr_base`](super::rr_base).
pub fn pluq_tile_recursive(
    f: &PrimeField,
    a: MatMut<'_>,
    threshold: usize,
    policy: &GemmPolicy,
    workers: usize,
    ledger: &mut RedLedger,
) -> Result<Pluq> {
    check_threshold(threshold)?;
    let ctx = Ctx { f, threshold, policy, workers };
    par::install(workers, || tile_rec(&ctx, a, ledger))
}

fn tile_rec(ctx: &Ctx<'_>, mut a: MatMut<'_>, ledger: &mut RedLedger) -> Result<Pluq> {
    let (m, n) = (a.rows(), a.cols());
    if m == 0 || n == 0 {
        return Ok(Pluq::identity(m, n, 0, Pivoting::RankRevealing));
    }
    if m.min(n) <= ctx.threshold {
        return Ok(rr_base(ctx.f, a, ledger));
    }
    let (m1, n1) = (m.div_ceil(2), n.div_ceil(2));

    let pl1 = tile_rec(ctx, a.submatrix_mut(0, 0, m1, n1), ledger)?;
    let r1 = pl1.rank;
    ctx.rows(&pl1.p, a.submatrix_mut(0, n1, m1, n - n1))?;
    ctx.cols(&pl1.q, a.submatrix_mut(m1, 0, m - m1, n1))?;

    let (pl2, pl3) = {
        let (a1, a2, a3, mut h) = a.rb_mut().split_at(m1, n1);
        let (lu1, v1, m1blk, _) = a1.split_at(r1, r1);
        let (mut d, mut e) = a2.split_at_row(r1);
        let (mut fb, mut g) = a3.split_at_col(r1);
        let (lu1, v1, m1blk) = (lu1.into_ref(), v1.into_ref(), m1blk.into_ref());
        if r1 > 0 {
            let mut l2 = RedLedger::new();
            let (x, y) = rayon::join(
                || ctx.utrsm(lu1, d.rb_mut(), ledger),
                || ctx.trsm(lu1, fb.rb_mut(), &mut l2),
            );
            x?;
            y?;
            *ledger += l2;
            let (d, fb) = (d.rb(), fb.rb());
            let (mut l2, mut l3) = (RedLedger::new(), RedLedger::new());
            let (x, (y, z)) = rayon::join(
                || ctx.gemm(m1blk, d, e.rb_mut(), ledger),
                || {
                    rayon::join(
                        || ctx.gemm(fb, v1, g.rb_mut(), &mut l2),
                        || ctx.gemm(fb, d, h.rb_mut(), &mut l3),
                    )
                },
            );
            x?;
            y?;
            z?;
            *ledger += l2 + l3;
        }
        let mut l3 = RedLedger::new();
        let (x, y) = rayon::join(|| tile_rec(ctx, e, ledger), || tile_rec(ctx, g, &mut l3));
        *ledger += l3;
        (x?, y?)
    };
    let (r2, r3) = (pl2.rank, pl3.rank);

    ctx.rows(&pl2.p, a.submatrix_mut(r1, 0, m1 - r1, r1))?;
    ctx.cols(&pl2.q, a.submatrix_mut(0, n1, r1, n - n1))?;
    ctx.cols(&pl2.q, a.submatrix_mut(m1, n1, m - m1, n - n1))?;
    ctx.rows(&pl3.p, a.submatrix_mut(m1, 0, m - m1, r1))?;
    ctx.rows(&pl3.p, a.submatrix_mut(m1, n1, m - m1, n - n1))?;
    ctx.cols(&pl3.q, a.submatrix_mut(0, r1, r1, n1 - r1))?;

    {
        let (_, a2, a3, h) = a.rb_mut().split_at(m1, n1);
        let e = a2.split_at_row(r1).1.into_ref();
        let g = a3.split_at_col(r1).1.into_ref();
        let (u2, v2) = (e.submatrix(0, 0, r2, r2), e.submatrix(0, r2, r2, e.cols() - r2));
        let (l3, m3) = (g.submatrix(0, 0, r3, r3), g.submatrix(r3, 0, g.rows() - r3, r3));
        let (mut h1, mut h2, mut h3, mut h4) = h.split_at(r3, r2);
        if r2 > 0 {
            ctx.trsm(u2, h1.rb_mut(), ledger)?;
            ctx.trsm(u2, h3.rb_mut(), ledger)?;
            ctx.gemm(h1.rb(), v2, h2.rb_mut(), ledger)?;
            ctx.gemm(h3.rb(), v2, h4.rb_mut(), ledger)?;
        }
        if r3 > 0 {
            ctx.utrsm(l3, h2.rb_mut(), ledger)?;
            ctx.gemm(m3, h2.rb(), h4.rb_mut(), ledger)?;
        }
    }

    let pl4 = tile_rec(ctx, a.submatrix_mut(m1 + r3, n1 + r2, m - m1 - r3, n - n1 - r2), ledger)?;
    let r4 = pl4.rank;
    ctx.rows(&pl4.p, a.submatrix_mut(m1 + r3, 0, m - m1 - r3, n1 + r2))?;
    ctx.cols(&pl4.q, a.submatrix_mut(0, n1 + r2, m1 + r3, n - n1 - r2))?;

    let mut gather_rows = PermSeq::identity(m);
    for t in 0..r3 {
        gather_rows.rot(r1 + r2 + t, m1 + t);
    }
    for t in 0..r4 {
        gather_rows.rot(r1 + r2 + r3 + t, m1 + r3 + t);
    }
    let mut gather_cols = PermSeq::identity(n);
    for t in 0..r2 {
        gather_cols.rot(r1 + t, n1 + t);
    }
    for t in 0..r4 {
        gather_cols.rot(r1 + r2 + r3 + t, n1 + r2 + t);
    }
    ctx.rows(&gather_rows, a.rb_mut())?;
    ctx.cols(&gather_cols, a.rb_mut())?;

    let mut p = PermSeq::identity(m);
    p.extend_embedded(&pl1.p, 0)?;
    p.extend_embedded(&pl2.p, r1)?;
    p.extend_embedded(&pl3.p, m1)?;
    p.extend_embedded(&pl4.p, m1 + r3)?;
    p.extend_embedded(&gather_rows, 0)?;
    let mut q = PermSeq::identity(n);
    q.extend_embedded(&pl1.q, 0)?;
    q.extend_embedded(&pl2.q, n1)?;
    q.extend_embedded(&pl3.q, r1)?;
    q.extend_embedded(&pl4.q, n1 + r2)?;
    q.extend_embedded(&gather_cols, 0)?;
    Ok(Pluq {
        p,
        q,
        rank: r1 + r2 + r3 + r4,
        pivoting: Pivoting::RankRevealing,
    })
}

/// Rank-revealing PLUQ by recursive halving of the row dimension.
///
/// The top slab is factored, the bottom slab is eliminated against it and
/// its Schur complement is factored recursively. Reveals the rank and the
/// row rank profile.
pub fn pluq_slab_recursive(
    f: &PrimeField,
    a: MatMut<'_>,
    threshold: usize,
    policy: &GemmPolicy,
    workers: usize,
    ledger: &mut RedLedger,
) -> Result<Pluq> {
    check_threshold(threshold)?;
    let ctx = Ctx { f, threshold, policy, workers };
    par::install(workers, || slab_rec(&ctx, a, ledger))
}

fn slab_rec(ctx: &Ctx<'_>, mut a: MatMut<'_>, ledger: &mut RedLedger) -> Result<Pluq> {
    let (m, n) = (a.rows(), a.cols());
    if m == 0 || n == 0 {
        return Ok(Pluq::identity(m, n, 0, Pivoting::RankRevealing));
    }
    if m <= ctx.threshold {
        return Ok(rr_base(ctx.f, a, ledger));
    }
    let m1 = m.div_ceil(2);
    let pl1 = slab_rec(ctx, a.submatrix_mut(0, 0, m1, n), ledger)?;
    let r1 = pl1.rank;
    ctx.cols(&pl1.q, a.submatrix_mut(m1, 0, m - m1, n))?;
    {
        let (top, bottom) = a.rb_mut().split_at_row(m1);
        let top = top.into_ref();
        let (u1, v1) = (top.submatrix(0, 0, r1, r1), top.submatrix(0, r1, r1, n - r1));
        let (mut fb, h) = bottom.split_at_col(r1);
        if r1 > 0 {
            ctx.trsm(u1, fb.rb_mut(), ledger)?;
            ctx.gemm(fb.rb(), v1, h, ledger)?;
        }
    }
    let pl2 = slab_rec(ctx, a.submatrix_mut(m1, r1, m - m1, n - r1), ledger)?;
    let r2 = pl2.rank;
    ctx.rows(&pl2.p, a.submatrix_mut(m1, 0, m - m1, r1))?;
    ctx.cols(&pl2.q, a.submatrix_mut(0, r1, m1, n - r1))?;

    let mut gather = PermSeq::identity(m);
    for t in 0..r2 {
        gather.rot(r1 + t, m1 + t);
    }
    ctx.rows(&gather, a.rb_mut())?;

    let mut p = PermSeq::identity(m);
    p.extend_embedded(&pl1.p, 0)?;
    p.extend_embedded(&pl2.p, m1)?;
    p.extend_embedded(&gather, 0)?;
    let mut q = PermSeq::identity(n);
    q.extend_embedded(&pl1.q, 0)?;
    q.extend_embedded(&pl2.q, r1)?;
    Ok(Pluq {
        p,
        q,
        rank: r1 + r2,
        pivoting: Pivoting::RankRevealing,
    })
}
