//! Arithmetic in prime fields `F_q = Z/qZ`.
//!
//! Elements are stored as their least non-negative residue in a `u16`, so
//! `q` is limited to primes below 2^16. Products of two residues always fit in
//! a `u32`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus for which the fused multiply-add kernel uses a
/// multiply-high reduction instead of `%`. Needs `q^3 < 2^16`.
const FAST_REDUCE_MAX_Q: u32 = 31;

/// An element of `F_q`, always the canonical residue in `[0, q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
#[repr(transparent)]
pub struct FieldElement(pub(crate) u16);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn value(self) -> u16 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

struct FieldInner {
    q: u16,
    inverse: Vec<u16>,
    // ceil(2^16 / q), used by `axpy` when q <= FAST_REDUCE_MAX_Q
    magic: u32,
}

/// Handle to the prime field `F_q`. Cheap to clone; all clones share one
/// inverse table.
#[derive(Clone)]
pub struct PrimeField {
    inner: Arc<FieldInner>,
}

impl PartialEq for PrimeField {
    fn eq(&self, other: &Self) -> bool {
        self.inner.q == other.inner.q
    }
}

impl Eq for PrimeField {}

impl fmt::Debug for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.inner.q)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeField {
    /// Builds `F_q`. Fails with [`Error::NotPrime`] for composite or
    /// out-of-range `q` (prime powers such as 9 are not fields over `Z/qZ`).
    pub fn new(q: u64) -> Result<Self> {
        if q > u16::MAX as u64 || !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        let q16 = q as u16;
        let mut inverse = vec![0u16; q as usize];
        for a in 1..q {
            // a^(q-2) by Fermat; q is at most 16 bits so this is cheap
            inverse[a as usize] = pow_mod(a, q - 2, q) as u16;
        }
        let magic = (1u32 << 16).div_ceil(q as u32);
        Ok(PrimeField {
            inner: Arc::new(FieldInner { q: q16, inverse, magic }),
        })
    }

    pub fn q(&self) -> u16 {
        self.inner.q
    }

    /// Element from any integer, reduced to the canonical residue.
    pub fn elem(&self, v: i64) -> FieldElement {
        FieldElement(v.rem_euclid(self.inner.q as i64) as u16)
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::ZERO
    }

    pub fn one(&self) -> FieldElement {
        FieldElement(1 % self.inner.q)
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.add_raw(a.0, b.0))
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.sub_raw(a.0, b.0))
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.neg_raw(a.0))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.mul_raw(a.0, b.0))
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(FieldElement(self.inner.inverse[a.0 as usize]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e` for a signed exponent; negative exponents need `a != 0`.
    pub fn pow(&self, a: FieldElement, e: i64) -> Result<FieldElement> {
        let base = if e < 0 { self.inv(a)? } else { a };
        let q = self.inner.q as u64;
        Ok(FieldElement(pow_mod(base.0 as u64, e.unsigned_abs(), q) as u16))
    }

    /// Iterator over the nonzero elements `1..q`.
    pub fn units(&self) -> impl Iterator<Item = FieldElement> {
        (1..self.inner.q).map(FieldElement)
    }

    // Raw-residue helpers used by the dense kernels.

    #[inline]
    pub(crate) fn add_raw(&self, a: u16, b: u16) -> u16 {
        let s = a as u32 + b as u32;
        let q = self.inner.q as u32;
        (if s >= q { s - q } else { s }) as u16
    }

    #[inline]
    pub(crate) fn sub_raw(&self, a: u16, b: u16) -> u16 {
        if a >= b {
            a - b
        } else {
            (a as u32 + self.inner.q as u32 - b as u32) as u16
        }
    }

    #[inline]
    pub(crate) fn neg_raw(&self, a: u16) -> u16 {
        if a == 0 {
            0
        } else {
            self.inner.q - a
        }
    }

    #[inline]
    pub(crate) fn mul_raw(&self, a: u16, b: u16) -> u16 {
        ((a as u32 * b as u32) % self.inner.q as u32) as u16
    }

    /// `dst[i] <- dst[i] + c * src[i]` over the whole slice.
    pub(crate) fn axpy(&self, dst: &mut [FieldElement], src: &[FieldElement], c: FieldElement) {
        debug_assert_eq!(dst.len(), src.len());
        if c.0 == 0 {
            return;
        }
        let q = self.inner.q as u32;
        let c = c.0 as u32;
        if q <= FAST_REDUCE_MAX_Q {
            // t < q^2, and q^3 < 2^16 makes (t * ceil(2^16/q)) >> 16 == t / q
            let magic = self.inner.magic;
            for (d, s) in dst.iter_mut().zip(src) {
                let t = d.0 as u32 + c * s.0 as u32;
                let quot = (t * magic) >> 16;
                d.0 = (t - quot * q) as u16;
            }
        } else {
            for (d, s) in dst.iter_mut().zip(src) {
                d.0 = ((d.0 as u32 + c * s.0 as u32) % q) as u16;
            }
        }
    }

    /// `row[i] <- c * row[i]`.
    pub(crate) fn scale_slice(&self, row: &mut [FieldElement], c: FieldElement) {
        let q = self.inner.q as u32;
        let c = c.0 as u32;
        for v in row.iter_mut() {
            v.0 = ((v.0 as u32 * c) % q) as u16;
        }
    }
}

fn pow_mod(mut base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_fields_and_inverses() {
        let f3 = PrimeField::new(3).unwrap();
        assert_eq!(f3.inv(f3.elem(1)).unwrap(), f3.elem(1));
        assert_eq!(f3.inv(f3.elem(2)).unwrap(), f3.elem(2));
        let f7 = PrimeField::new(7).unwrap();
        assert_eq!(f7.inv(f7.elem(3)).unwrap().value(), 5);
        assert!(PrimeField::new(2).is_ok());
    }

    #[test]
    fn rejects_composites() {
        assert!(matches!(PrimeField::new(9), Err(Error::NotPrime(9))));
        assert!(matches!(PrimeField::new(1), Err(Error::NotPrime(1))));
        assert!(matches!(PrimeField::new(65536), Err(Error::NotPrime(_))));
        assert!(PrimeField::new(65521).is_ok());
    }

    #[test]
    fn worked_operations() {
        let f5 = PrimeField::new(5).unwrap();
        assert_eq!(f5.inv(f5.elem(3)).unwrap().value(), 2);
        assert_eq!(f5.pow(f5.elem(2), 4).unwrap().value(), 1);
        assert_eq!(f5.pow(f5.elem(2), -1).unwrap().value(), 3);
        let f3 = PrimeField::new(3).unwrap();
        assert_eq!(f3.neg(f3.elem(1)).value(), 2);
        assert_eq!(f3.elem(-1).value(), 2);
        assert!(matches!(f3.inv(f3.zero()), Err(Error::DivisionByZero)));
    }

    #[test]
    fn inverse_table_is_correct() {
        for q in [2u64, 3, 5, 7, 11, 31, 257, 65521] {
            let f = PrimeField::new(q).unwrap();
            for a in f.units() {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
            }
        }
    }

    #[test]
    fn axpy_matches_naive_reduction() {
        for q in [2u64, 3, 5, 7, 11, 13, 29, 31, 37, 101] {
            let f = PrimeField::new(q).unwrap();
            let src: Vec<FieldElement> = (0..q as u16).map(FieldElement).collect();
            for c in 0..q as u16 {
                for d0 in 0..q as u16 {
                    let mut dst = vec![FieldElement(d0); src.len()];
                    f.axpy(&mut dst, &src, FieldElement(c));
                    for (i, s) in src.iter().enumerate() {
                        let want = (d0 as u32 + c as u32 * s.0 as u32) % q as u32;
                        assert_eq!(dst[i].0 as u32, want, "q={q} c={c} d={d0} s={s}");
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn field_axioms(qi in 0usize..5, a in 0i64..1000, b in 0i64..1000, c in 0i64..1000) {
            let q = [2u64, 3, 5, 7, 65521][qi];
            let f = PrimeField::new(q).unwrap();
            let (a, b, c) = (f.elem(a), f.elem(b), f.elem(c));
            prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.add(a, b), f.add(b, a));
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.add(a, f.neg(a)), f.zero());
            prop_assert_eq!(f.sub(a, b), f.add(a, f.neg(b)));
            if !a.is_zero() {
                prop_assert_eq!(f.inv(f.inv(a).unwrap()).unwrap(), a);
                prop_assert_eq!(f.pow(a, q as i64 - 1).unwrap(), f.one());
            }
        }
    }
}
