//! Double-precision intervals with one-ulp outward rounding after every
//! operation. Used for bulk O(n²) arithmetic on enclosures that were
//! produced by the multiprecision routines.

use serde::{Deserialize, Serialize};

use super::dyadic::Dyadic;
use super::interval::IntervalReal;
use super::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fi {
    pub lo: f64,
    pub hi: f64,
}

#[inline]
fn down(x: f64) -> f64 {
    x.next_down()
}

#[inline]
fn up(x: f64) -> f64 {
    x.next_up()
}

// Conversions may round twice and lose subnormals: widen by two ulps and a
// tiny absolute pad.
const TINY: f64 = 1e-300;

fn lower(x: f64) -> f64 {
    let d = down(down(x));
    if x.abs() < TINY {
        d.min(-TINY)
    } else {
        d
    }
}

fn upper(x: f64) -> f64 {
    let u = up(up(x));
    if x.abs() < TINY {
        u.max(TINY)
    } else {
        u
    }
}

impl Fi {
    pub const ZERO: Fi = Fi { lo: 0.0, hi: 0.0 };

    pub fn point(x: f64) -> Fi {
        Fi { lo: x, hi: x }
    }

    pub fn new(lo: f64, hi: f64) -> Fi {
        debug_assert!(lo <= hi);
        Fi { lo, hi }
    }

    pub fn from_interval(x: &IntervalReal) -> Fi {
        Fi { lo: lower(x.lo.to_f64()), hi: upper(x.hi.to_f64()) }
    }

    pub fn from_rational(x: &Rational) -> Fi {
        let v = super::rational::to_f64(x);
        Fi { lo: lower(v), hi: upper(v) }
    }

    pub fn to_interval(self, bits: u32) -> IntervalReal {
        IntervalReal::new(Dyadic::from_f64(self.lo), Dyadic::from_f64(self.hi), bits)
    }

    pub fn add(self, o: Fi) -> Fi {
        Fi { lo: down(self.lo + o.lo), hi: up(self.hi + o.hi) }
    }

    pub fn sub(self, o: Fi) -> Fi {
        Fi { lo: down(self.lo - o.hi), hi: up(self.hi - o.lo) }
    }

    pub fn neg(self) -> Fi {
        Fi { lo: -self.hi, hi: -self.lo }
    }

    pub fn mul(self, o: Fi) -> Fi {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Fi { lo: down(lo), hi: up(hi) }
    }

    pub fn scale(self, k: f64) -> Fi {
        self.mul(Fi::point(k))
    }

    pub fn square(self) -> Fi {
        if self.lo >= 0.0 {
            Fi { lo: down(self.lo * self.lo), hi: up(self.hi * self.hi) }
        } else if self.hi <= 0.0 {
            Fi { lo: down(self.hi * self.hi), hi: up(self.lo * self.lo) }
        } else {
            let m = self.lo.abs().max(self.hi.abs());
            Fi { lo: 0.0, hi: up(m * m) }
        }
    }

    pub fn contains_zero(self) -> bool {
        self.lo <= 0.0 && 0.0 <= self.hi
    }

    /// None when the divisor straddles zero.
    pub fn div(self, o: Fi) -> Option<Fi> {
        if o.contains_zero() {
            return None;
        }
        let c = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Some(Fi { lo: down(lo), hi: up(hi) })
    }

    pub fn abs(self) -> Fi {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            self.neg()
        } else {
            Fi { lo: 0.0, hi: self.hi.max(-self.lo) }
        }
    }

    pub fn mag_lower(self) -> f64 {
        self.abs().lo
    }

    pub fn mag_upper(self) -> f64 {
        self.abs().hi
    }

    pub fn hull(self, o: Fi) -> Fi {
        Fi { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }

    pub fn width(self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn intersects(self, o: Fi) -> bool {
        self.lo <= o.hi && o.lo <= self.hi
    }
}

/// π as a double interval.
pub fn pi_fi() -> Fi {
    // 3.141592653589793 is the double nearest π, which lies above it
    let p = std::f64::consts::PI;
    Fi { lo: down(p), hi: up(p) }
}

fn u64_fi(x: u128) -> Fi {
    let v = x as f64;
    if (v as u128) == x {
        Fi::point(v)
    } else {
        Fi { lo: down(v), hi: up(v) }
    }
}

// sin y / y and cos y by Taylor series for y ∈ [0, π/4]; the first omitted
// term bounds the alternating tail.
fn sin_taylor(y: Fi) -> Fi {
    let y2 = y.square();
    let mut acc = Fi::point(1.0);
    for k in (1..=10).rev() {
        let d = (2 * k * (2 * k + 1)) as f64;
        acc = Fi::point(1.0).sub(y2.mul(acc).div(Fi::point(d)).expect("nonzero"));
    }
    let r = 0.785_398_163_397_448_4f64.powi(22) / 1.124_000_727_777_607_7e21;
    y.mul(acc.add(Fi::new(-r, r)))
}

fn cos_taylor(y: Fi) -> Fi {
    let y2 = y.square();
    let mut acc = Fi::point(1.0);
    for k in (1..=10).rev() {
        let d = ((2 * k - 1) * (2 * k)) as f64;
        acc = Fi::point(1.0).sub(y2.mul(acc).div(Fi::point(d)).expect("nonzero"));
    }
    let r = 0.785_398_163_397_448_4f64.powi(22) / 1.124_000_727_777_607_7e21;
    acc.add(Fi::new(-r, r))
}

/// (sin πt, cos πt) for t = w·num/den, reduced exactly in integers.
/// Requires den < 2^60.
pub fn sin_cos_pi_scaled(w: u128, num: i128, den: u64) -> (Fi, Fi) {
    assert!(den > 0 && den < 1 << 60);
    let m = 8 * den as u128;
    // t·4 = 4·w·num/den, work modulo 8 (period 2 of t scaled by 4)
    let a = w % m;
    let b = num.rem_euclid(m as i128) as u128;
    let t4 = (a * b % m) * 4 % m; // numerator of 4t over den, in [0, 8den)
    let d = den as u128;
    // quadrant q: 4t ∈ [q·den, (q+1)·den)
    let q = t4 / d;
    let r = t4 % d; // t = (q·den + r)/(4den)
    let half = |x: u128| u64_fi(x).mul(pi_fi()).div(u64_fi(4 * d)).expect("positive");
    // θ = q·π/4 + φ with φ = π·r/(4den); past π/8 go from the next octant down
    let y = if 2 * r <= d { half(r) } else { half(d - r) };
    let (s0, c0) = (sin_taylor(y), cos_taylor(y));
    let rt = Fi { lo: down(std::f64::consts::FRAC_1_SQRT_2), hi: up(std::f64::consts::FRAC_1_SQRT_2) };
    let (base, phi_sign) = if 2 * r <= d { (q, 1.0) } else { ((q + 1) % 8, -1.0) };
    let (sb, cb): (Fi, Fi) = match base {
        0 => (Fi::ZERO, Fi::point(1.0)),
        1 => (rt, rt),
        2 => (Fi::point(1.0), Fi::ZERO),
        3 => (rt, rt.neg()),
        4 => (Fi::ZERO, Fi::point(-1.0)),
        5 => (rt.neg(), rt.neg()),
        6 => (Fi::point(-1.0), Fi::ZERO),
        _ => (rt.neg(), rt),
    };
    let sp = s0.scale(phi_sign);
    let s = sb.mul(c0).add(cb.mul(sp));
    let c = cb.mul(c0).sub(sb.mul(sp));
    (clamp_unit(s), clamp_unit(c))
}

fn clamp_unit(x: Fi) -> Fi {
    Fi { lo: x.lo.max(-1.0), hi: x.hi.min(1.0) }
}
