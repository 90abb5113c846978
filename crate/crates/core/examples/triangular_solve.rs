//! Triangular solves on packed factors, and row permutations.

use ffpluq::blas::{ftrsm, pflaswp, Diag, Side, Uplo};
use ffpluq::oracle::naive_gemm;
use ffpluq::perm::{self, Dir};
use ffpluq::{Mat, PermSeq, PrimeField, RedLedger};

fn main() -> ffpluq::Result<()> {
    let f = PrimeField::new(5)?;
    let l = Mat::from_rows(&f, &[[1, 0], [2, 1]]);
    let mut x = Mat::from_rows(&f, &[[1], [0]]);
    let mut led = RedLedger::new();
    ftrsm(&f, Side::Left, Uplo::Lower, Diag::Unit, l.as_ref(), x.as_mut(), &mut led)?;
    println!("L^-1 b = {:?}", x);

    let u = Mat::from_rows(&f, &[[2, 1], [0, 3]]);
    let mut y = Mat::from_rows(&f, &[[2, 1]]);
    ftrsm(&f, Side::Right, Uplo::Upper, Diag::NonUnit, u.as_ref(), y.as_mut(), &mut led)?;
    println!("b U^-1 = {:?}, check {:?}", y, naive_gemm(&f, &y, &u)?);

    // a packed L\U block: the unit solve never reads the upper triangle
    let f = PrimeField::new(131071)?;
    let packed = Mat::from_rows(&f, &[[4, 9, 9], [3, 5, 9], [7, 1, 6]]);
    let b = Mat::from_rows(&f, &[[1, 2, 3, 4], [5, 6, 7, 8], [9, 10, 11, 12]]);
    let mut z = b.clone();
    let mut led = RedLedger::new();
    ftrsm(&f, Side::Left, Uplo::Lower, Diag::Unit, packed.as_ref(), z.as_mut(), &mut led)?;
    println!("unit solve with t=3 on 4 columns: {} reductions", led.total());

    let mut p = PermSeq::identity(3);
    p.rot(0, 2);
    let mut w = b.clone();
    pflaswp(&p, w.as_mut(), perm::Side::Rows, Dir::Forward, 2, 2)?;
    println!("rows rotated: {:?}", w);
    pflaswp(&p, w.as_mut(), perm::Side::Rows, Dir::Inverse, 2, 2)?;
    assert_eq!(w, b);
    Ok(())
}
