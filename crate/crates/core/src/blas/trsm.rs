//! Triangular solves with one reduction per solved entry (plus one for the
//! division when the diagonal is not unit).

use rayon::prelude::*;

use super::kernel::{axpy, axpy4, four_rows};
use super::{Diag, Side, Uplo};
use crate::error::{Error, Result};
use crate::field::{Elem, PrimeField};
use crate::ledger::{KernelKind, RedLedger};
use crate::matrix::{even_parts, MatMut, MatRef};
use crate::par;

const JB: usize = 256;

// Solves A X = B in place where row ord[s] of X depends on rows ord[..s].
// `a` is read only at (ord[s], ord[q]) for q < s and on the diagonal.
fn solve_core(
    f: &PrimeField,
    a: MatRef<'_>,
    ord: &[usize],
    inv_diag: Option<&[Elem]>,
    b: &mut MatMut<'_>,
) -> u64 {
    let (t, n) = (ord.len(), b.cols());
    if t == 0 || n == 0 {
        return 0;
    }
    let chunk = f.chunk().max(1);
    let w = n.min(JB);
    let mut acc = vec![0u64; 4 * w];
    let mut count = 0u64;
    // negated multipliers, so every update is an addition
    let coef = |i: usize, l: usize| f.neg(a.get(i, l)) as u64;
    for jc in (0..n).step_by(JB) {
        let nb = JB.min(n - jc);
        for s0 in (0..t).step_by(4) {
            let g = 4.min(t - s0);
            for r in 0..g {
                let src = &b.row(ord[s0 + r])[jc..jc + nb];
                for (x, &y) in acc[r * w..r * w + nb].iter_mut().zip(src) {
                    *x = y as u64;
                }
            }
            // contributions of the rows solved before this group
            let mut terms = 0usize;
            let mut q = 0;
            while q < s0 {
                if terms == chunk {
                    for x in &mut acc[..g * w] {
                        *x = f.fold_u64(*x) as u64;
                    }
                    count += (g * nb) as u64;
                    terms = 0;
                }
                let qe = s0.min(q + (chunk - terms));
                for qq in q..qe {
                    let l = ord[qq];
                    let xrow = &b.row(l)[jc..jc + nb];
                    if g == 4 {
                        let cf = [
                            coef(ord[s0], l),
                            coef(ord[s0 + 1], l),
                            coef(ord[s0 + 2], l),
                            coef(ord[s0 + 3], l),
                        ];
                        axpy4(four_rows(&mut acc, 0, w), cf, xrow);
                    } else {
                        for r in 0..g {
                            axpy(&mut acc[r * w..r * w + nb], coef(ord[s0 + r], l), xrow);
                        }
                    }
                }
                terms += qe - q;
                q = qe;
            }
            // the triangle inside the group, row by row
            for r in 0..g {
                let i = ord[s0 + r];
                let mut rterms = terms;
                for rr in 0..r {
                    if rterms == chunk {
                        for x in &mut acc[r * w..r * w + nb] {
                            *x = f.fold_u64(*x) as u64;
                        }
                        count += nb as u64;
                        rterms = 0;
                    }
                    let l = ord[s0 + rr];
                    let xrow = &b.row(l)[jc..jc + nb];
                    axpy(&mut acc[r * w..r * w + nb], coef(i, l), xrow);
                    rterms += 1;
                }
                let first = s0 + r == 0;
                let out = &mut b.row_mut(i)[jc..jc + nb];
                let arow = &acc[r * w..r * w + nb];
                match inv_diag {
                    None => {
                        if !first {
                            for (x, &v) in out.iter_mut().zip(arow) {
                                *x = f.fold_u64(v);
                            }
                            count += nb as u64;
                        }
                    }
                    Some(inv) => {
                        let d = inv[s0 + r] as u64;
                        for (x, &v) in out.iter_mut().zip(arow) {
                            let v = if first { v } else { f.fold_u64(v) as u64 };
                            *x = f.fold_u64(d * v);
                        }
                        count += if first { nb as u64 } else { 2 * nb as u64 };
                    }
                }
            }
        }
    }
    count
}

fn check(side: Side, a: &MatRef<'_>, b: &MatMut<'_>) -> Result<usize> {
    let t = a.rows();
    let need = match side {
        Side::Left => b.rows(),
        Side::Right => b.cols(),
    };
    if a.cols() != t || need != t {
        return Err(Error::DimMismatch(format!(
            "triangular {}x{} against {}x{} ({side:?})",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(t)
}

fn inverse_diagonal(f: &PrimeField, a: &MatRef<'_>, ord: &[usize]) -> Result<Vec<Elem>> {
    ord.iter()
        .map(|&i| f.inv_raw(a.get(i, i)).map_err(|_| Error::SingularDiagonal(i)))
        .collect()
}

/// Overwrites `B` with the solution of `A X = B` (left) or `X A = B` (right),
/// `A` triangular. Only the selected triangle of `A` is read, and with a unit
/// diagonal the diagonal itself is ignored, so `A` may be a packed `L\U` block.
pub fn ftrsm(
    f: &PrimeField,
    side: Side,
    uplo: Uplo,
    diag: Diag,
    a: MatRef<'_>,
    mut b: MatMut<'_>,
    ledger: &mut RedLedger,
) -> Result<()> {
    let t = check(side, &a, &b)?;
    let ord: Vec<usize> = match (side, uplo) {
        (Side::Left, Uplo::Lower) | (Side::Right, Uplo::Upper) => (0..t).collect(),
        _ => (0..t).rev().collect(),
    };
    let inv = match diag {
        Diag::Unit => None,
        Diag::NonUnit => Some(inverse_diagonal(f, &a, &ord)?),
    };
    let kind = match diag {
        Diag::Unit => KernelKind::Utrsm,
        Diag::NonUnit => KernelKind::Trsm,
    };
    let count = match side {
        Side::Left => solve_core(f, a, &ord, inv.as_deref(), &mut b),
        Side::Right => {
            // X A = B  <=>  A^T X^T = B^T
            let at = a.to_owned().transpose();
            let mut bt = b.to_owned().transpose();
            let c = solve_core(f, at.as_ref(), &ord, inv.as_deref(), &mut bt.as_mut());
            b.copy_from(bt.transpose().as_ref());
            c
        }
    };
    ledger.record(kind, count);
    Ok(())
}

/// Parallel [`ftrsm`]: the free dimension of `B` is split into `grain`
/// blocks solved independently.
#[allow(clippy::too_many_arguments)]
pub fn pftrsm(
    f: &PrimeField,
    side: Side,
    uplo: Uplo,
    diag: Diag,
    a: MatRef<'_>,
    b: MatMut<'_>,
    grain: usize,
    workers: usize,
    ledger: &mut RedLedger,
) -> Result<()> {
    check(side, &a, &b)?;
    let grain = grain.max(1);
    if grain == 1 {
        return ftrsm(f, side, uplo, diag, a, b, ledger);
    }
    let blocks = match side {
        Side::Left => {
            let parts = even_parts(b.cols(), grain);
            b.split_cols_by(&parts)
        }
        Side::Right => {
            let parts = even_parts(b.rows(), grain);
            b.split_rows_by(&parts)
        }
    };
    let ledgers = par::install(workers, || {
        blocks
            .into_par_iter()
            .map(|blk| {
                let mut l = RedLedger::new();
                ftrsm(f, side, uplo, diag, a, blk, &mut l).map(|_| l)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    *ledger += ledgers.into_iter().sum();
    Ok(())
}
