use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{even_parts, MatMut};
use crate::par;
use crate::perm::{Dir, PermSeq, Side};

/// Applies `perm` to the rows (or columns) of `a`, splitting the other
/// dimension into `grain` blocks handled in parallel.
pub fn pflaswp(
    perm: &PermSeq,
    a: MatMut<'_>,
    side: Side,
    dir: Dir,
    grain: usize,
    workers: usize,
) -> Result<()> {
    let dim = match side {
        Side::Rows => a.rows(),
        Side::Cols => a.cols(),
    };
    if dim != perm.size() {
        return Err(Error::DimMismatch(format!(
            "permutation of size {} applied to dimension {dim}",
            perm.size()
        )));
    }
    if perm.is_identity() {
        return Ok(());
    }
    let grain = grain.max(1);
    if grain == 1 {
        return perm.apply(a, side, dir);
    }
    let blocks = match side {
        Side::Rows => {
            let parts = even_parts(a.cols(), grain);
            a.split_cols_by(&parts)
        }
        Side::Cols => {
            let parts = even_parts(a.rows(), grain);
            a.split_rows_by(&parts)
        }
    };
    par::install(workers, || {
        blocks
            .into_par_iter()
            .try_for_each(|blk| perm.apply(blk, side, dir))
    })
}
