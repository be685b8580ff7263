use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::dyadic::Dyadic;
use super::rational::{format_rational, parse_rational, Rational};
use crate::error::{Error, Result};

/// Certified enclosure [lo, hi] of a real number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalReal {
    pub lo: Dyadic,
    pub hi: Dyadic,
    pub bits: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertifiedOrdering {
    Less,
    Greater,
    Unknown,
}

impl IntervalReal {
    pub fn new(lo: Dyadic, hi: Dyadic, bits: u32) -> Self {
        debug_assert!(lo <= hi);
        IntervalReal { lo, hi, bits }
    }

    pub fn point(d: Dyadic, bits: u32) -> Self {
        IntervalReal { lo: d.clone(), hi: d, bits }
    }

    pub fn zero(bits: u32) -> Self {
        Self::point(Dyadic::zero(), bits)
    }

    pub fn from_int(n: i64, bits: u32) -> Self {
        Self::point(Dyadic::from_int(n), bits)
    }

    pub fn from_rational(x: &Rational, bits: u32) -> Self {
        IntervalReal {
            lo: Dyadic::from_rational_floor(x, bits),
            hi: Dyadic::from_rational_ceil(x, bits),
            bits,
        }
    }

    /// Enclosure of the convex hull of two rationals.
    pub fn from_rational_bounds(lo: &Rational, hi: &Rational, bits: u32) -> Self {
        IntervalReal {
            lo: Dyadic::from_rational_floor(lo, bits),
            hi: Dyadic::from_rational_ceil(hi, bits),
            bits,
        }
    }

    pub fn lo_rational(&self) -> Rational {
        self.lo.to_rational()
    }

    pub fn hi_rational(&self) -> Rational {
        self.hi.to_rational()
    }

    pub fn width(&self) -> Rational {
        self.hi.sub(&self.lo).to_rational()
    }

    pub fn width_f64(&self) -> f64 {
        self.hi.sub(&self.lo).to_f64()
    }

    pub fn mid_f64(&self) -> f64 {
        0.5 * (self.lo.to_f64() + self.hi.to_f64())
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64()
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64()
    }

    pub fn contains_rational(&self, x: &Rational) -> bool {
        self.lo_rational() <= *x && *x <= self.hi_rational()
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.sign() != num_bigint::Sign::Plus && self.hi.sign() != num_bigint::Sign::Minus
    }

    pub fn intersects(&self, other: &IntervalReal) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn is_subset_of(&self, other: &IntervalReal) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    fn tidy(lo: Dyadic, hi: Dyadic, bits: u32) -> Self {
        IntervalReal { lo: lo.round_down(bits + 8), hi: hi.round_up(bits + 8), bits }
    }

    pub fn add(&self, o: &IntervalReal) -> IntervalReal {
        Self::tidy(self.lo.add(&o.lo), self.hi.add(&o.hi), self.bits.min(o.bits))
    }

    pub fn sub(&self, o: &IntervalReal) -> IntervalReal {
        Self::tidy(self.lo.sub(&o.hi), self.hi.sub(&o.lo), self.bits.min(o.bits))
    }

    pub fn neg(&self) -> IntervalReal {
        IntervalReal { lo: self.hi.neg(), hi: self.lo.neg(), bits: self.bits }
    }

    pub fn mul(&self, o: &IntervalReal) -> IntervalReal {
        let c = [self.lo.mul(&o.lo), self.lo.mul(&o.hi), self.hi.mul(&o.lo), self.hi.mul(&o.hi)];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Self::tidy(lo, hi, self.bits.min(o.bits))
    }

    pub fn square(&self) -> IntervalReal {
        let a = self.lo.mul(&self.lo);
        let b = self.hi.mul(&self.hi);
        let (mn, mx) = if a <= b { (a, b) } else { (b, a) };
        let lo = if self.contains_zero() { Dyadic::zero() } else { mn };
        Self::tidy(lo, mx, self.bits)
    }

    pub fn abs(&self) -> IntervalReal {
        if self.lo.sign() != num_bigint::Sign::Minus {
            self.clone()
        } else if self.hi.sign() != num_bigint::Sign::Plus {
            self.neg()
        } else {
            let hi = std::cmp::max(self.lo.abs(), self.hi.abs());
            IntervalReal { lo: Dyadic::zero(), hi, bits: self.bits }
        }
    }

    /// Lower bound of |x|.
    pub fn mag_lower(&self) -> Dyadic {
        if self.contains_zero() {
            Dyadic::zero()
        } else {
            std::cmp::min(self.lo.abs(), self.hi.abs())
        }
    }

    pub fn mag_upper(&self) -> Dyadic {
        std::cmp::max(self.lo.abs(), self.hi.abs())
    }

    pub fn mul_rational(&self, r: &Rational) -> IntervalReal {
        self.mul(&IntervalReal::from_rational(r, self.bits))
    }

    pub fn add_rational(&self, r: &Rational) -> IntervalReal {
        self.add(&IntervalReal::from_rational(r, self.bits))
    }

    pub fn mul_pow2(&self, k: i64) -> IntervalReal {
        IntervalReal { lo: self.lo.mul_pow2(k), hi: self.hi.mul_pow2(k), bits: self.bits }
    }

    /// `None` when the divisor encloses zero.
    pub fn div(&self, o: &IntervalReal) -> Option<IntervalReal> {
        if o.contains_zero() {
            return None;
        }
        let bits = self.bits.min(o.bits);
        let (olo, ohi) = (o.lo.to_rational(), o.hi.to_rational());
        let (slo, shi) = (self.lo.to_rational(), self.hi.to_rational());
        let c = [&slo / &olo, &slo / &ohi, &shi / &olo, &shi / &ohi];
        let lo = c.iter().min().unwrap();
        let hi = c.iter().max().unwrap();
        Some(IntervalReal {
            lo: Dyadic::from_rational_floor(lo, bits + 8),
            hi: Dyadic::from_rational_ceil(hi, bits + 8),
            bits,
        })
    }

    pub fn recip(&self) -> Option<IntervalReal> {
        IntervalReal::from_int(1, self.bits).div(self)
    }

    pub fn hull(&self, o: &IntervalReal) -> IntervalReal {
        IntervalReal {
            lo: std::cmp::min(self.lo.clone(), o.lo.clone()),
            hi: std::cmp::max(self.hi.clone(), o.hi.clone()),
            bits: self.bits.min(o.bits),
        }
    }

    pub fn max(&self, o: &IntervalReal) -> IntervalReal {
        IntervalReal {
            lo: std::cmp::max(self.lo.clone(), o.lo.clone()),
            hi: std::cmp::max(self.hi.clone(), o.hi.clone()),
            bits: self.bits.min(o.bits),
        }
    }

    /// Square root; negative parts of the enclosure are clipped to 0.
    pub fn sqrt(&self) -> IntervalReal {
        let bits = self.bits;
        let lo = if self.lo.sign() == num_bigint::Sign::Plus { dyadic_sqrt(&self.lo, bits, false) } else { Dyadic::zero() };
        let hi = if self.hi.sign() == num_bigint::Sign::Plus { dyadic_sqrt(&self.hi, bits, true) } else { Dyadic::zero() };
        IntervalReal { lo, hi, bits }
    }

    /// Positive p-th root for p ≥ 1.
    pub fn nth_root(&self, p: u32) -> IntervalReal {
        if p == 1 {
            return self.clone();
        }
        let bits = self.bits;
        let lo = if self.lo.sign() == num_bigint::Sign::Plus { dyadic_root(&self.lo, p, bits, false) } else { Dyadic::zero() };
        let hi = if self.hi.sign() == num_bigint::Sign::Plus { dyadic_root(&self.hi, p, bits, true) } else { Dyadic::zero() };
        IntervalReal { lo, hi, bits }
    }

    pub fn powi(&self, p: u32) -> IntervalReal {
        let mut acc = IntervalReal::from_int(1, self.bits);
        for _ in 0..p {
            acc = acc.mul(self);
        }
        if p % 2 == 0 && self.contains_zero() {
            acc.lo = Dyadic::zero();
        }
        acc
    }

    pub fn with_bits(mut self, bits: u32) -> Self {
        self.bits = bits;
        self
    }
}

fn dyadic_sqrt(x: &Dyadic, bits: u32, up: bool) -> Dyadic {
    dyadic_root(x, 2, bits, up)
}

fn dyadic_root(x: &Dyadic, p: u32, bits: u32, up: bool) -> Dyadic {
    // Scale so the mantissa has at least p·(bits+4) bits and the exponent divides by p.
    let want = (p as i64) * (bits as i64 + 4);
    let mut shift = (want - x.mant.bits() as i64).max(0);
    let mut e = x.exp - shift;
    let r = e.rem_euclid(p as i64);
    shift += r;
    e -= r;
    let m: BigInt = &x.mant << shift as usize;
    let root = m.nth_root(p);
    let exact = num_traits::pow(root.clone(), p as usize) == m;
    let root = if up && !exact { root + 1 } else { root };
    Dyadic::new(root, e / p as i64)
}

/// Decide `a` against `b` from the enclosure alone.
pub fn certified_compare(a: &IntervalReal, b: &Rational) -> CertifiedOrdering {
    if a.hi_rational() < *b {
        CertifiedOrdering::Less
    } else if a.lo_rational() > *b {
        CertifiedOrdering::Greater
    } else {
        CertifiedOrdering::Unknown
    }
}

/// Refine `f(bits)` from 64 bits, doubling up to `cap`, until `done` accepts.
pub fn refine<T>(
    cap: u32,
    mut f: impl FnMut(u32) -> Result<T>,
    mut done: impl FnMut(&T) -> bool,
) -> Result<T> {
    let mut bits = 64u32;
    loop {
        let v = f(bits)?;
        if done(&v) {
            return Ok(v);
        }
        if bits >= cap {
            return Err(Error::PrecisionExhausted { cap });
        }
        bits = (bits * 2).min(cap);
    }
}

/// Sign of a value known to be nonzero, refining precision as needed.
pub fn certified_sign(cap: u32, f: impl FnMut(u32) -> Result<IntervalReal>) -> Result<Ordering> {
    let v = refine(cap, f, |v| !v.contains_zero())?;
    Ok(if v.lo.sign() == num_bigint::Sign::Plus { Ordering::Greater } else { Ordering::Less })
}

impl fmt::Display for IntervalReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.17e}, {:.17e}]", self.lo.to_f64(), self.hi.to_f64())
    }
}

#[derive(Serialize, Deserialize)]
struct IntervalJson {
    lo: String,
    hi: String,
    bits: u32,
}

impl Serialize for IntervalReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        IntervalJson {
            lo: format_rational(&self.lo_rational()),
            hi: format_rational(&self.hi_rational()),
            bits: self.bits,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntervalReal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = IntervalJson::deserialize(d)?;
        let lo = parse_rational(&j.lo).map_err(serde::de::Error::custom)?;
        let hi = parse_rational(&j.hi).map_err(serde::de::Error::custom)?;
        if lo > hi {
            return Err(serde::de::Error::custom("interval with lo > hi"));
        }
        let bits = j.bits;
        let lo = Dyadic::from_dyadic_rational(&lo).unwrap_or_else(|| Dyadic::from_rational_floor(&lo, bits + 64));
        let hi = Dyadic::from_dyadic_rational(&hi).unwrap_or_else(|| Dyadic::from_rational_ceil(&hi, bits + 64));
        Ok(IntervalReal { lo, hi, bits })
    }
}

impl IntervalReal {
    pub fn is_nonneg(&self) -> bool {
        self.lo.sign() != num_bigint::Sign::Minus
    }

    pub fn is_positive(&self) -> bool {
        self.lo.sign() == num_bigint::Sign::Plus
    }

    pub fn exact_zero(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }

    pub fn lower_abs_rational(&self) -> Rational {
        self.mag_lower().to_rational()
    }

    pub fn upper_abs_rational(&self) -> Rational {
        self.mag_upper().to_rational().abs()
    }

    pub fn is_point_zero_width(&self) -> bool {
        (self.hi.sub(&self.lo)).mant.is_zero()
    }
}
