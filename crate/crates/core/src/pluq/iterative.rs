//! Iterative rank-revealing PLUQ over row slabs of height `k`.
//!
//! Slabs are processed left-looking: when a slab becomes current it is
//! solved against the pivots found so far and updated, then its panel is
//! factored sequentially. The panel starts at the column given by the rank
//! found so far.

use super::base::rr_base;
use super::fullrank::{gemm_task, run_tasks, trsm_task, utrsm_task, Task};
use super::{Pivoting, Pluq};
use crate::blas::{pflaswp, GemmPolicy};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::ledger::RedLedger;
use crate::matrix::{block_sizes, MatMut};
use crate::perm::{Dir, PermSeq, Side};

struct Ctx<'a> {
    f: &'a PrimeField,
    k: usize,
    policy: &'a GemmPolicy,
    workers: usize,
}

impl Ctx<'_> {
    fn permute(&self, perm: &PermSeq, a: MatMut<'_>, side: Side) -> Result<()> {
        pflaswp(perm, a, side, Dir::Forward, self.policy.grain(self.workers), self.workers)
    }
}

/// Slab iterative PLUQ: each `k`-row panel is factored by [`rr_base`].
pub fn pluq_slab_iterative(
    f: &PrimeField,
    a: MatMut<'_>,
    k: usize,
    policy: &GemmPolicy,
    workers: usize,
    ledger: &mut RedLedger,
) -> Result<Pluq> {
    let ctx = Ctx { f, k, policy, workers };
    slabs(&ctx, a, ledger, |pan, led| Ok(rr_base(f, pan, led)))
}

/// Tile iterative PLUQ: each `k`-row panel is itself factored by a loop over
/// `k`-column tiles, with the remaining tiles of the panel updated in
/// parallel after every tile.
pub fn pluq_tile_iterative(
    f: &PrimeField,
    a: MatMut<'_>,
    k: usize,
    policy: &GemmPolicy,
    workers: usize,
    ledger: &mut RedLedger,
) -> Result<Pluq> {
    let ctx = Ctx { f, k, policy, workers };
    slabs(&ctx, a, ledger, |pan, led| panel_tiles(&ctx, pan, led))
}

fn slabs(
    ctx: &Ctx<'_>,
    mut a: MatMut<'_>,
    ledger: &mut RedLedger,
    mut panel: impl FnMut(MatMut<'_>, &mut RedLedger) -> Result<Pluq>,
) -> Result<Pluq> {
    let (m, n) = (a.rows(), a.cols());
    if ctx.k == 0 {
        return Err(Error::InvalidBlock { n: m, k: 0 });
    }
    let mut p = PermSeq::identity(m);
    let mut q = PermSeq::identity(n);
    let mut r = 0;
    let mut s0 = 0;
    while s0 < m {
        let s1 = (s0 + ctx.k).min(m);
        let h = s1 - s0;
        update_slab(ctx, a.rb_mut(), r, s0, s1, ledger)?;
        let pl = panel(a.submatrix_mut(s0, r, h, n - r), ledger)?;

        ctx.permute(&pl.p, a.submatrix_mut(s0, 0, h, r), Side::Rows)?;
        ctx.permute(&pl.q, a.submatrix_mut(0, r, s0, n - r), Side::Cols)?;
        ctx.permute(&pl.q, a.submatrix_mut(s1, r, m - s1, n - r), Side::Cols)?;
        let mut gather = PermSeq::identity(m);
        for t in 0..pl.rank {
            gather.rot(r + t, s0 + t);
        }
        ctx.permute(&gather, a.rb_mut(), Side::Rows)?;

        p.extend_embedded(&pl.p, s0)?;
        p.extend_embedded(&gather, 0)?;
        q.extend_embedded(&pl.q, r)?;
        r += pl.rank;
        s0 = s1;
    }
    Ok(Pluq {
        p,
        q,
        rank: r,
        pivoting: Pivoting::RankRevealing,
    })
}

// Brings rows s0..s1 up to date with the r pivots stored in rows 0..r.
fn update_slab(
    ctx: &Ctx<'_>,
    a: MatMut<'_>,
    r: usize,
    s0: usize,
    s1: usize,
    ledger: &mut RedLedger,
) -> Result<()> {
    if r == 0 {
        return Ok(());
    }
    let n = a.cols();
    let (top, rest) = a.split_at_row(s0);
    let top = top.into_ref();
    let (u, v) = (top.submatrix(0, 0, r, r), top.submatrix(0, r, r, n - r));
    let slab = rest.split_at_row(s1 - s0).0;
    let (mut left, right) = slab.split_at_col(r);
    trsm_task(ctx.f, u, left.rb_mut())(ledger)?;
    let left = left.into_ref();
    let widths = block_sizes(n - r, ctx.k);
    let mut c = 0;
    let mut tasks: Vec<Task<'_>> = Vec::new();
    for tile in right.split_cols_by(&widths) {
        let w = tile.cols();
        tasks.push(gemm_task(ctx.f, left, v.submatrix(0, c, r, w), tile, ctx.policy));
        c += w;
    }
    run_tasks(tasks, ctx.workers, ledger)
}

// Factors an h x w panel by k-column tiles. Permutations stay inside the
// panel; the caller extends them to the rest of the matrix.
fn panel_tiles(ctx: &Ctx<'_>, mut pan: MatMut<'_>, ledger: &mut RedLedger) -> Result<Pluq> {
    let (h, w) = (pan.rows(), pan.cols());
    let mut ps = PermSeq::identity(h);
    let mut qs = PermSeq::identity(w);
    let mut rp = 0;
    let mut cstart = 0;
    while cstart < w && rp < h {
        let cend = (cstart + ctx.k).min(w);
        let pt = rr_base(ctx.f, pan.submatrix_mut(rp, cstart, h - rp, cend - cstart), ledger);
        let rt = pt.rank;
        ctx.permute(&pt.p, pan.submatrix_mut(rp, 0, h - rp, cstart), Side::Rows)?;
        ctx.permute(&pt.p, pan.submatrix_mut(rp, cend, h - rp, w - cend), Side::Rows)?;
        ctx.permute(&pt.q, pan.submatrix_mut(0, cstart, rp, cend - cstart), Side::Cols)?;
        let mut gather = PermSeq::identity(w);
        for t in 0..rt {
            gather.rot(rp + t, cstart + t);
        }
        ctx.permute(&gather, pan.rb_mut(), Side::Cols)?;
        ps.extend_embedded(&pt.p, rp)?;
        qs.extend_embedded(&pt.q, cstart)?;
        qs.extend_embedded(&gather, 0)?;

        if rt > 0 && cend < w {
            let (left, right) = pan.rb_mut().split_at_col(cend);
            let left = left.into_ref();
            let l = left.submatrix(rp, rp, rt, rt);
            let below = left.submatrix(rp + rt, rp, h - rp - rt, rt);
            let (top, bottom) = right.split_at_row(rp + rt);
            let top = top.split_at_row(rp).1;
            let widths = block_sizes(w - cend, ctx.k);
            let f = ctx.f;
            let policy = ctx.policy;
            let tasks: Vec<Task<'_>> = top
                .split_cols_by(&widths)
                .into_iter()
                .zip(bottom.split_cols_by(&widths))
                .map(|(mut u, c)| -> Task<'_> {
                    Box::new(move |led: &mut RedLedger| {
                        utrsm_task(f, l, u.rb_mut())(led)?;
                        gemm_task(f, below, u.into_ref(), c, policy)(led)
                    })
                })
                .collect();
            run_tasks(tasks, ctx.workers, ledger)?;
        }
        rp += rt;
        cstart = cend;
    }
    Ok(Pluq {
        p: ps,
        q: qs,
        rank: rp,
        pivoting: Pivoting::RankRevealing,
    })
}
