use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::rational::Rational;

/// mant · 2^exp, exact.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    pub mant: BigInt,
    pub exp: i64,
}

pub(crate) fn shr_floor(x: &BigInt, s: u64) -> BigInt {
    if s == 0 {
        return x.clone();
    }
    let d = BigInt::one() << s as usize;
    x.div_floor(&d)
}

pub(crate) fn shr_ceil(x: &BigInt, s: u64) -> BigInt {
    -shr_floor(&-x, s)
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn new(mant: BigInt, exp: i64) -> Self {
        Dyadic { mant, exp }
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic { mant: BigInt::from(n), exp: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn sign(&self) -> Sign {
        self.mant.sign()
    }

    /// Exact conversion when the denominator is a power of two.
    pub fn from_dyadic_rational(x: &Rational) -> Option<Dyadic> {
        let d = x.denom();
        let tz = d.trailing_zeros().unwrap_or(0);
        if (d >> tz as usize).is_one() {
            Some(Dyadic::new(x.numer().clone(), -(tz as i64)))
        } else {
            None
        }
    }

    pub fn to_rational(&self) -> Rational {
        if self.exp >= 0 {
            Rational::from_integer(&self.mant << self.exp as usize)
        } else {
            Rational::new(self.mant.clone(), BigInt::one() << (-self.exp) as usize)
        }
    }

    /// Exact value of a finite double.
    pub fn from_f64(x: f64) -> Dyadic {
        assert!(x.is_finite(), "non-finite double");
        if x == 0.0 {
            return Dyadic::zero();
        }
        let b = x.to_bits();
        let sign = if b >> 63 == 1 { -1i64 } else { 1 };
        let e = ((b >> 52) & 0x7ff) as i64;
        let frac = (b & ((1u64 << 52) - 1)) as i64;
        let (m, ex) = if e == 0 { (frac, -1074) } else { (frac | (1i64 << 52), e - 1075) };
        Dyadic::new(BigInt::from(sign * m), ex)
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        let bits = self.mant.bits() as i64;
        if bits <= 60 {
            let m = self.mant.to_f64().unwrap_or(0.0);
            return m * 2f64.powi(self.exp.clamp(-2000, 2000) as i32);
        }
        let s = bits - 60;
        let m = shr_floor(&self.mant, s as u64).to_f64().unwrap_or(0.0);
        m * 2f64.powi((self.exp + s).clamp(-2000, 2000) as i32)
    }

    /// Rough log2 of the magnitude, `None` for zero.
    pub fn log2_floor(&self) -> Option<i64> {
        if self.mant.is_zero() {
            None
        } else {
            Some(self.mant.bits() as i64 - 1 + self.exp)
        }
    }

    fn align(&self, other: &Dyadic) -> (BigInt, BigInt, i64) {
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &other.mant << (other.exp - e) as usize;
        (a, b, e)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (a, b, e) = self.align(other);
        Dyadic::new(a + b, e)
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic::new(-&self.mant, self.exp)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    pub fn mul_pow2(&self, k: i64) -> Dyadic {
        Dyadic::new(self.mant.clone(), self.exp + k)
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic::new(self.mant.abs(), self.exp)
    }

    /// Keep at most `bits` significant bits, rounding toward −∞.
    pub fn round_down(&self, bits: u32) -> Dyadic {
        let len = self.mant.bits();
        if len <= bits as u64 {
            return self.clone();
        }
        let s = len - bits as u64;
        Dyadic::new(shr_floor(&self.mant, s), self.exp + s as i64)
    }

    /// Keep at most `bits` significant bits, rounding toward +∞.
    pub fn round_up(&self, bits: u32) -> Dyadic {
        let len = self.mant.bits();
        if len <= bits as u64 {
            return self.clone();
        }
        let s = len - bits as u64;
        Dyadic::new(shr_ceil(&self.mant, s), self.exp + s as i64)
    }

    fn rational_exp(x: &Rational, bits: u32) -> i64 {
        let est = x.numer().bits() as i64 - x.denom().bits() as i64;
        est - bits as i64 - 2
    }

    /// Largest dyadic with about `bits` significant bits that is ≤ x.
    pub fn from_rational_floor(x: &Rational, bits: u32) -> Dyadic {
        if x.is_zero() {
            return Dyadic::zero();
        }
        if x.denom().is_one() {
            return Dyadic::new(x.numer().clone(), 0).round_down(bits);
        }
        let e = Self::rational_exp(x, bits);
        let (n, d) = if e >= 0 {
            (x.numer().clone(), x.denom() << e as usize)
        } else {
            (x.numer() << (-e) as usize, x.denom().clone())
        };
        Dyadic::new(n.div_floor(&d), e)
    }

    pub fn from_rational_ceil(x: &Rational, bits: u32) -> Dyadic {
        Self::from_rational_floor(&-x, bits).neg()
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.mant.sign(), other.mant.sign());
        if sa != sb || sa == Sign::NoSign {
            return sa.cmp(&sb);
        }
        // Same nonzero sign: compare magnitudes via leading-bit position first.
        let la = self.mant.bits() as i64 + self.exp;
        let lb = other.mant.bits() as i64 + other.exp;
        let mag = if la != lb {
            la.cmp(&lb)
        } else {
            let (a, b, _) = self.align(other);
            a.abs().cmp(&b.abs())
        };
        if sa == Sign::Minus {
            mag.reverse()
        } else {
            mag
        }
    }
}
