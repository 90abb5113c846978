//! Arithmetic in Z/pZ with canonical residues.
//!
//! Elements are `u32` values in `[0, p)`. Products are accumulated exactly in
//! 64-bit integers and folded back only when needed; the number of products
//! that may be summed before a fold is `n_star`, the largest `n` with
//! `n (p-1)^2 <= 2^acc_bits - 1`.
//!
//! Additions, subtractions and negations use a conditional correction and
//! are free. Folding an accumulator and inverting an element each count as
//! one reduction.

use crate::error::{Error, Result};
use crate::ledger::{KernelKind, RedLedger};

/// A canonical residue.
pub type Elem = u32;

/// Default accumulator width: the mantissa of an IEEE double.
pub const DEFAULT_ACC_BITS: u32 = 53;

const MAX_MODULUS: u64 = 1 << 26;

/// Largest accumulation length `n` with `n (p-1)^2 <= 2^acc_bits - 1`.
pub fn max_delay(p: u64, acc_bits: u32) -> Result<u64> {
    if p < 2 {
        return Err(Error::InvalidModulus(p));
    }
    if acc_bits == 0 || acc_bits > 127 {
        return Err(Error::InvalidAccBits(acc_bits));
    }
    let cap = (1u128 << acc_bits) - 1;
    let sq = ((p - 1) as u128) * ((p - 1) as u128);
    let n = cap / sq;
    if n == 0 {
        return Err(Error::Capacity { p, acc_bits });
    }
    Ok(u64::try_from(n).unwrap_or(u64::MAX))
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// The prime field Z/pZ together with its delayed-reduction capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u32,
    acc_bits: u32,
    n_star: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        Self::with_acc_bits(p, DEFAULT_ACC_BITS)
    }

    /// Builds a field whose accumulators hold `acc_bits` bits. The kernels
    /// accumulate in 64-bit words, so widths above 62 are rejected.
    pub fn with_acc_bits(p: u64, acc_bits: u32) -> Result<Self> {
        if !(2..MAX_MODULUS).contains(&p) || !is_prime(p) {
            return Err(Error::InvalidModulus(p));
        }
        if !(2..=62).contains(&acc_bits) {
            return Err(Error::InvalidAccBits(acc_bits));
        }
        let n_star = max_delay(p, acc_bits)?;
        Ok(Self {
            p: p as u32,
            acc_bits,
            n_star,
        })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn acc_bits(&self) -> u32 {
        self.acc_bits
    }

    /// Maximum number of products that may be accumulated between folds.
    #[inline]
    pub fn n_star(&self) -> u64 {
        self.n_star
    }

    /// Inner-dimension chunk length used by the kernels.
    #[inline]
    pub(crate) fn chunk(&self) -> usize {
        usize::try_from(self.n_star).unwrap_or(usize::MAX)
    }

    #[inline]
    pub fn is_canonical(&self, a: Elem) -> bool {
        a < self.p
    }

    /// Canonical residue of an arbitrary integer (no ledger entry).
    #[inline]
    pub fn from_i64(&self, v: i64) -> Elem {
        v.rem_euclid(self.p as i64) as Elem
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    /// Product of two residues; one reduction.
    pub fn mul(&self, a: Elem, b: Elem, ledger: &mut RedLedger) -> Elem {
        ledger.record(KernelKind::Other, 1);
        self.mul_raw(a, b)
    }

    /// Multiplicative inverse; one reduction.
    pub fn inv(&self, a: Elem, ledger: &mut RedLedger) -> Result<Elem> {
        let r = self.inv_raw(a)?;
        ledger.record(KernelKind::Other, 1);
        Ok(r)
    }

    /// Folds an accumulator into `[0, p)`; one reduction.
    pub fn reduce(&self, acc: &mut Accumulator, ledger: &mut RedLedger) -> Elem {
        ledger.record(KernelKind::Other, 1);
        let r = self.fold_i64(acc.value);
        acc.value = 0;
        acc.terms = 0;
        r
    }

    pub fn accumulator(&self) -> Accumulator {
        Accumulator::default()
    }

    // Uncounted primitives for kernels, which record their reductions in bulk.

    #[inline]
    pub(crate) fn mul_raw(&self, a: Elem, b: Elem) -> Elem {
        ((a as u64 * b as u64) % self.p as u64) as Elem
    }

    #[inline]
    pub(crate) fn fold_u64(&self, v: u64) -> Elem {
        (v % self.p as u64) as Elem
    }

    #[inline]
    pub(crate) fn fold_i64(&self, v: i64) -> Elem {
        v.rem_euclid(self.p as i64) as Elem
    }

    pub(crate) fn inv_raw(&self, a: Elem) -> Result<Elem> {
        if a == 0 {
            return Err(Error::ZeroDivision);
        }
        // extended Euclid on (a, p)
        let (mut r0, mut r1) = (self.p as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let qt = r0 / r1;
            (r0, r1) = (r1, r0 - qt * r1);
            (t0, t1) = (t1, t0 - qt * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.fold_i64(t0))
    }
}

/// Exact signed accumulator of products of canonical residues.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Accumulator {
    value: i64,
    terms: u64,
}

impl Accumulator {
    pub fn value(&self) -> i64 {
        self.value
    }

    pub fn terms(&self) -> u64 {
        self.terms
    }

    /// Adds `a * b`. Fails once `n_star` products have been accumulated.
    pub fn mul_add(&mut self, field: &PrimeField, a: Elem, b: Elem) -> Result<()> {
        self.push(field, (a as u64 * b as u64) as i64)
    }

    /// Subtracts `a * b`. Fails once `n_star` products have been accumulated.
    pub fn mul_sub(&mut self, field: &PrimeField, a: Elem, b: Elem) -> Result<()> {
        self.push(field, -((a as u64 * b as u64) as i64))
    }

    fn push(&mut self, field: &PrimeField, v: i64) -> Result<()> {
        if self.terms >= field.n_star() {
            return Err(Error::Capacity {
                p: field.p() as u64,
                acc_bits: field.acc_bits(),
            });
        }
        self.terms += 1;
        self.value += v;
        debug_assert!(self.value.unsigned_abs() < 1u64 << field.acc_bits());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn small_examples() {
        let f5 = f(5);
        let mut led = RedLedger::new();
        assert_eq!(f5.add(3, 4), 2);
        assert_eq!(f5.neg(0), 0);
        assert_eq!(f5.sub(1, 3), 3);
        for x in 0..5 {
            assert_eq!(f5.mul(0, x, &mut led), 0);
        }
        assert_eq!(led.total(), 5);
        assert_eq!(f5.inv(1, &mut led).unwrap(), 1);
        assert_eq!(f5.inv(3, &mut led).unwrap(), 2);
        assert_eq!(f5.inv(0, &mut led), Err(Error::ZeroDivision));
    }

    #[test]
    fn reduce_examples() {
        let f5 = f(5);
        let mut led = RedLedger::new();
        for (v, want) in [(23i64, 3u32), (-1, 4), (0, 0)] {
            let mut acc = Accumulator { value: v, terms: 1 };
            assert_eq!(f5.reduce(&mut acc, &mut led), want);
            assert_eq!(acc.terms(), 0);
        }
        assert_eq!(led.total(), 3);
        assert_eq!(led.other, 3);
    }

    #[test]
    fn max_delay_examples() {
        assert_eq!(max_delay(2, 53).unwrap(), (1u64 << 53) - 1);
        // floor((2^53 - 1) / 131070^2), evaluated independently in u128
        let want = (((1u128 << 53) - 1) / (131070u128 * 131070)) as u64;
        assert_eq!(want, 524304);
        assert_eq!(max_delay(131071, 53).unwrap(), want);
        assert!(matches!(max_delay(3, 2), Err(Error::Capacity { .. })));
    }

    #[test]
    fn n_star_bound_is_tight() {
        for p in [2u64, 3, 5, 65521, 131071, 67108859] {
            let fl = f(p);
            let n = fl.n_star() as u128;
            let sq = ((p - 1) as u128).pow(2);
            let cap = 1u128 << 53;
            assert!(n * sq < cap);
            assert!((n + 1) * sq >= cap);
        }
    }

    #[test]
    fn rejects_composites_and_out_of_range() {
        for p in [0u64, 1, 4, 9, 65536, 1 << 26, 131073 * 3] {
            assert!(PrimeField::new(p).is_err(), "{p}");
        }
        assert!(PrimeField::with_acc_bits(5, 63).is_err());
    }

    #[test]
    fn inverse_is_an_involution() {
        for p in [2u64, 3, 5, 7, 11, 13, 31, 61, 97, 101] {
            let fl = f(p);
            for a in 1..p as Elem {
                let ia = fl.inv_raw(a).unwrap();
                assert_eq!(fl.mul_raw(a, ia), 1);
                assert_eq!(fl.inv_raw(ia).unwrap(), a);
            }
        }
    }

    #[test]
    fn accumulation_exhaustive_small_p() {
        // All length-3 sequences over p = 3 with n_star large enough.
        let fl = f(3);
        let mut led = RedLedger::new();
        for code in 0..3u32.pow(6) {
            let digits: Vec<Elem> = (0..6).map(|i| (code / 3u32.pow(i)) % 3).collect();
            let mut acc = fl.accumulator();
            let mut slow = 0;
            for pair in digits.chunks(2) {
                acc.mul_add(&fl, pair[0], pair[1]).unwrap();
                slow = fl.add(slow, fl.mul_raw(pair[0], pair[1]));
            }
            assert_eq!(fl.reduce(&mut acc, &mut led), slow);
        }
    }

    #[test]
    fn accumulator_rejects_overflowing_lengths() {
        let fl = PrimeField::with_acc_bits(5, 5).unwrap(); // (p-1)^2 = 16, n_star = 1
        assert_eq!(fl.n_star(), 1);
        let mut acc = fl.accumulator();
        acc.mul_add(&fl, 4, 4).unwrap();
        assert!(acc.mul_add(&fl, 4, 4).is_err());
    }

    proptest! {
        #[test]
        fn ops_are_closed(p in prop::sample::select(vec![2u64, 3, 5, 65521, 131071]), a in any::<u32>(), b in any::<u32>()) {
            let fl = f(p);
            let (a, b) = (a % fl.p(), b % fl.p());
            let mut led = RedLedger::new();
            prop_assert!(fl.is_canonical(fl.add(a, b)));
            prop_assert!(fl.is_canonical(fl.sub(a, b)));
            prop_assert!(fl.is_canonical(fl.neg(a)));
            prop_assert!(fl.is_canonical(fl.mul(a, b, &mut led)));
            prop_assert_eq!(fl.add(fl.sub(a, b), b), a);
            prop_assert_eq!(fl.add(a, fl.neg(a)), 0);
        }

        #[test]
        fn delayed_sum_matches_termwise(seed in any::<u64>(), len in 1usize..2000) {
            let fl = f(131071);
            let mut x = seed | 1;
            let mut next = || { x ^= x << 13; x ^= x >> 7; x ^= x << 17; (x % 131071) as Elem };
            let mut acc = fl.accumulator();
            let mut slow = 0;
            for _ in 0..len {
                let (a, b) = (next(), next());
                if len % 2 == 0 { acc.mul_add(&fl, a, b).unwrap(); slow = fl.add(slow, fl.mul_raw(a, b)); }
                else { acc.mul_sub(&fl, a, b).unwrap(); slow = fl.sub(slow, fl.mul_raw(a, b)); }
            }
            let mut led = RedLedger::new();
            prop_assert_eq!(fl.reduce(&mut acc, &mut led), slow);
        }
    }
}
