//! Exact multiply-accumulate loops on 64-bit accumulators.
//!
//! Callers keep the number of accumulated products under `n_star`, so the
//! sums never leave the accumulator range and no reduction happens here.

use crate::field::Elem;

macro_rules! kernels {
    ($($attr:meta)?; $axpy:ident, $axpy4:ident) => {
        $(#[$attr])?
        unsafe fn $axpy(acc: &mut [u64], a: u64, b: &[Elem]) {
            for (x, &y) in acc.iter_mut().zip(b) {
                *x += a * y as u64;
            }
        }

        $(#[$attr])?
        unsafe fn $axpy4(acc: [&mut [u64]; 4], a: [u64; 4], b: &[Elem]) {
            let [c0, c1, c2, c3] = acc;
            let n = b.len();
            let (c0, c1, c2, c3) = (&mut c0[..n], &mut c1[..n], &mut c2[..n], &mut c3[..n]);
            for j in 0..n {
                let y = b[j] as u64;
                c0[j] += a[0] * y;
                c1[j] += a[1] * y;
                c2[j] += a[2] * y;
                c3[j] += a[3] * y;
            }
        }
    };
}

kernels!(; axpy_generic, axpy4_generic);
#[cfg(target_arch = "x86_64")]
kernels!(target_feature(enable = "avx2"); axpy_avx2, axpy4_avx2);

#[cfg(target_arch = "x86_64")]
fn has_avx2() -> bool {
    std::arch::is_x86_feature_detected!("avx2")
}

/// `acc[j] += a * b[j]`.
#[inline]
pub(crate) fn axpy(acc: &mut [u64], a: u64, b: &[Elem]) {
    debug_assert!(acc.len() >= b.len());
    #[cfg(target_arch = "x86_64")]
    if has_avx2() {
        // SAFETY: the CPU supports AVX2.
        return unsafe { axpy_avx2(acc, a, b) };
    }
    // SAFETY: plain scalar code.
    unsafe { axpy_generic(acc, a, b) }
}

/// Four simultaneous `axpy` updates sharing the same `b` row.
#[inline]
pub(crate) fn axpy4(acc: [&mut [u64]; 4], a: [u64; 4], b: &[Elem]) {
    #[cfg(target_arch = "x86_64")]
    if has_avx2() {
        // SAFETY: the CPU supports AVX2.
        return unsafe { axpy4_avx2(acc, a, b) };
    }
    // SAFETY: plain scalar code.
    unsafe { axpy4_generic(acc, a, b) }
}

/// Splits a row-major buffer with row length `w` into four consecutive rows
/// starting at row `r`.
pub(crate) fn four_rows(buf: &mut [u64], r: usize, w: usize) -> [&mut [u64]; 4] {
    let (c0, rest) = buf[r * w..(r + 4) * w].split_at_mut(w);
    let (c1, rest) = rest.split_at_mut(w);
    let (c2, c3) = rest.split_at_mut(w);
    [c0, c1, c2, c3]
}
