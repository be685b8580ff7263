use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::dyadic::{shr_ceil, shr_floor, Dyadic};
use super::interval::IntervalReal;
use super::rational::{rat, rem_euclid, Rational};
use crate::error::{Error, Result};

const PI_CACHE_BITS: u64 = 8448;

fn atan_inv_fixed(k: u64, w: u64) -> (BigInt, u64) {
    // Σ (−1)^i / ((2i+1) k^(2i+1)) scaled by 2^w; returns value and error bound in ulps.
    let k = BigInt::from(k);
    let k2 = &k * &k;
    let mut t = (BigInt::one() << w as usize) / &k;
    let mut sum = BigInt::zero();
    let mut i: u64 = 0;
    while !t.is_zero() {
        let term = &t / BigInt::from(2 * i + 1);
        if i % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        t /= &k2;
        i += 1;
    }
    (sum, 2 * i + 2)
}

fn compute_pi(w: u64) -> (BigInt, BigInt) {
    let g = 24;
    let ww = w + g;
    let (a, ea) = atan_inv_fixed(5, ww);
    let (b, eb) = atan_inv_fixed(239, ww);
    let p = a * 16 - b * 4;
    let err = BigInt::from(16 * ea + 4 * eb);
    (shr_floor(&(&p - &err), g), shr_ceil(&(&p + &err), g))
}

/// Fixed-point bounds lo ≤ π·2^w ≤ hi.
pub fn pi_fixed(w: u64) -> (BigInt, BigInt) {
    static CACHE: OnceLock<(BigInt, BigInt)> = OnceLock::new();
    if w > PI_CACHE_BITS {
        return compute_pi(w);
    }
    let (lo, hi) = CACHE.get_or_init(|| compute_pi(PI_CACHE_BITS));
    let s = PI_CACHE_BITS - w;
    (shr_floor(lo, s), shr_ceil(hi, s))
}

pub fn pi_enclosure(bits: u32) -> IntervalReal {
    let w = bits as u64 + 8;
    let (lo, hi) = pi_fixed(w);
    IntervalReal::new(Dyadic::new(lo, -(w as i64)), Dyadic::new(hi, -(w as i64)), bits)
}

/// Taylor series for sin (odd = true) or cos at fixed-point y ∈ [0, 1], scale 2^w.
/// Returns (value, error bound in ulps) for the exact input y.
fn taylor_fixed(y: &BigInt, w: u64, odd: bool) -> (BigInt, u64) {
    let y2 = (y * y) >> w as usize;
    let mut term = if odd { y.clone() } else { BigInt::one() << w as usize };
    let mut sum = term.clone();
    let mut k: u64 = if odd { 2 } else { 1 };
    let mut n = 0u64;
    loop {
        term = (&term * &y2) >> w as usize;
        term /= BigInt::from(k * (k + 1));
        if term.is_zero() {
            break;
        }
        n += 1;
        if n % 2 == 1 {
            sum -= &term;
        } else {
            sum += &term;
        }
        k += 2;
    }
    (sum, 2 * n + 6)
}

/// Error policy: how many extra bits below the requested precision to carry.
const GUARD: u64 = 20;

/// Certified enclosure of sin(π·u) for exact rational u.
pub fn sin_pi(u: &Rational, bits: u32) -> IntervalReal {
    let mut r = rem_euclid(u, &Rational::from_integer(BigInt::from(2)));
    let mut neg = false;
    if r >= Rational::one() {
        r -= Rational::one();
        neg = true;
    }
    let half = rat(1, 2);
    if r > half {
        r = Rational::one() - r;
    }
    let v = if r.is_zero() {
        IntervalReal::zero(bits)
    } else if r == half {
        IntervalReal::from_int(1, bits)
    } else if r == rat(1, 6) {
        IntervalReal::point(Dyadic::new(BigInt::one(), -1), bits)
    } else if r <= rat(1, 4) {
        eval_trig_pi(&r, bits, true)
    } else {
        eval_trig_pi(&(half - r), bits, false)
    };
    if neg {
        v.neg()
    } else {
        v
    }
}

pub fn cos_pi(u: &Rational, bits: u32) -> IntervalReal {
    sin_pi(&(u + rat(1, 2)), bits)
}

/// sin or cos of π·r for r ∈ (0, 1/4].
fn eval_trig_pi(r: &Rational, bits: u32, odd: bool) -> IntervalReal {
    // Small arguments need extra absolute precision for relative accuracy.
    let extra = if odd {
        (r.denom().bits() as i64 - r.numer().bits() as i64).max(0) as u64
    } else {
        0
    };
    let w = bits as u64 + GUARD + extra;
    let (plo, phi) = pi_fixed(w + 4);
    let ylo = shr_floor(&((plo * r.numer()).div_floor(r.denom())), 4);
    let yhi = shr_ceil(&(-((-(phi * r.numer())).div_floor(r.denom()))), 4);
    let (v, e) = taylor_fixed(&ylo, w, odd);
    let spread = &yhi - &ylo;
    let e = BigInt::from(e);
    let (lo, hi) = if odd { (&v - &e, &v + &e + spread) } else { (&v - &e - spread, &v + &e) };
    let one = BigInt::one() << w as usize;
    let lo = if lo.is_negative() { BigInt::zero() } else { lo };
    let hi = if hi > one { one } else { hi };
    let ex = -(w as i64);
    IntervalReal::new(Dyadic::new(lo, ex).round_down(bits + 8), Dyadic::new(hi, ex).round_up(bits + 8), bits)
}

/// Enclosure of the range of sin(π·t) for t ∈ [lo, hi].
pub fn sin_pi_range(lo: &Rational, hi: &Rational, bits: u32) -> IntervalReal {
    if hi - lo >= Rational::from_integer(BigInt::from(2)) {
        return IntervalReal::new(Dyadic::from_int(-1), Dyadic::from_int(1), bits);
    }
    let mut acc = sin_pi(lo, bits).hull(&sin_pi(hi, bits));
    if lo == hi {
        return acc;
    }
    // Critical points k + 1/2 in [lo, hi].
    let half = rat(1, 2);
    let kmin = (lo - &half).ceil().to_integer();
    let kmax = (hi - &half).floor().to_integer();
    let mut k = kmin;
    while k <= kmax {
        let v = if k.is_even() { 1 } else { -1 };
        acc = acc.hull(&IntervalReal::from_int(v, bits));
        k += 1;
    }
    acc
}

/// Range of cos(π·t) for t ∈ [lo, hi].
pub fn cos_pi_range(lo: &Rational, hi: &Rational, bits: u32) -> IntervalReal {
    let h = rat(1, 2);
    sin_pi_range(&(lo + &h), &(hi + &h), bits)
}

/// Certified sin(x) for a rational x that is not a π-multiple.
pub fn sin_enclosure(x: &Rational, bits: u32) -> IntervalReal {
    if x.is_zero() {
        return IntervalReal::zero(bits);
    }
    let mag = (x.numer().bits() as i64 - x.denom().bits() as i64).max(0) as u32;
    let pb = bits + mag + 16;
    let pi = pi_enclosure(pb);
    let (plo, phi) = (pi.lo_rational(), pi.hi_rational());
    let (a, b) = (x / &phi, x / &plo);
    let (t_lo, t_hi) = if a <= b { (a, b) } else { (b, a) };
    // Round the reduced endpoints outward to keep rationals small.
    let t_lo = Dyadic::from_rational_floor(&t_lo, pb + 8).to_rational();
    let t_hi = Dyadic::from_rational_ceil(&t_hi, pb + 8).to_rational();
    sin_pi_range(&t_lo, &t_hi, bits)
}

pub fn cos_enclosure(x: &Rational, bits: u32) -> IntervalReal {
    let mag = (x.numer().bits() as i64 - x.denom().bits() as i64).max(0) as u32;
    let pb = bits + mag + 16;
    let pi = pi_enclosure(pb);
    let (plo, phi) = (pi.lo_rational(), pi.hi_rational());
    let (a, b) = (x / &phi, x / &plo);
    let (t_lo, t_hi) = if a <= b { (a, b) } else { (b, a) };
    let t_lo = Dyadic::from_rational_floor(&t_lo, pb + 8).to_rational();
    let t_hi = Dyadic::from_rational_ceil(&t_hi, pb + 8).to_rational();
    cos_pi_range(&t_lo, &t_hi, bits)
}

/// Fixed-point atanh(z) for z = num/den ∈ [0, 1/3], scale 2^w, with ulp error bound.
fn atanh_fixed(num: &BigInt, den: &BigInt, w: u64) -> (BigInt, u64) {
    let z = (num << w as usize).div_floor(den);
    let z2 = (&z * &z) >> w as usize;
    let mut p = z.clone();
    let mut sum = z;
    let mut k = 1u64;
    loop {
        p = (&p * &z2) >> w as usize;
        let t = &p / BigInt::from(2 * k + 1);
        if t.is_zero() {
            break;
        }
        sum += t;
        k += 1;
    }
    (sum, 3 * k + 8)
}

/// Certified natural logarithm of a positive rational.
pub fn ln_enclosure(x: &Rational, bits: u32) -> Result<IntervalReal> {
    if !x.is_positive() {
        return Err(Error::InvalidInput("logarithm of a non-positive number".into()));
    }
    let w = bits as u64 + GUARD + 8;
    // x = 2^k · y with y ∈ [2/3, 4/3).
    let mut k = x.numer().bits() as i64 - x.denom().bits() as i64;
    let mut y = x * super::rational::pow2(-k);
    while y >= rat(4, 3) {
        y /= Rational::from_integer(BigInt::from(2));
        k += 1;
    }
    while y < rat(2, 3) {
        y *= Rational::from_integer(BigInt::from(2));
        k -= 1;
    }
    // ln y = 2 atanh((y−1)/(y+1)), |(y−1)/(y+1)| ≤ 1/5.
    let z = (&y - Rational::one()) / (&y + Rational::one());
    let (zn, zs) = (z.numer().abs(), z.numer().is_negative());
    let (ly, ely) = atanh_fixed(&zn, z.denom(), w);
    let ly = if zs { -ly } else { ly };
    let (l2, el2) = atanh_fixed(&BigInt::one(), &BigInt::from(3), w);
    let kk = BigInt::from(k);
    let v = (&ly + &kk * &l2) * 2;
    let e = BigInt::from(2 * (ely + 2)) + kk.abs() * BigInt::from(2 * (el2 + 2));
    let ex = -(w as i64);
    Ok(IntervalReal::new(
        Dyadic::new(&v - &e, ex).round_down(bits + 8),
        Dyadic::new(&v + &e, ex).round_up(bits + 8),
        bits,
    ))
}

/// Enclosure of π^(1/p).
pub fn pi_root(p: u32, bits: u32) -> IntervalReal {
    pi_enclosure(bits + 8).nth_root(p).with_bits(bits)
}
