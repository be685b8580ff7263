//! Rational balls in L^p and approximation schemes for L^p-computable functions.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::interval::{refine, IntervalReal};
use crate::exact::rational::{format_rational, parse_rational, pow2, rat_pow, Rational};
use crate::exact::transcendental::{pi_enclosure, pi_root};
use crate::step::{lp_distance_pow, RationalStepFunction};

pub const DEFAULT_PRECISION_CAP: u32 = 4096;

/// Sign of a + (b − D^{1/p})·π^{1/p} for rationals a, b and D ≥ 0.
///
/// Zero is detected exactly; otherwise the value is nonzero (π^{1/p} is
/// transcendental) and its sign is found by refining enclosures.
pub fn sign_pi_affine(a: &Rational, b: &Rational, d: &Rational, p: u32) -> Result<Ordering> {
    let c_sign = if !b.is_positive() {
        if b.is_zero() && d.is_zero() {
            Ordering::Equal
        } else {
            Ordering::Less
        }
    } else {
        rat_pow(b, p).cmp(d)
    };
    let a_sign = a.cmp(&Rational::zero());
    if a_sign == Ordering::Equal {
        return Ok(c_sign);
    }
    if c_sign == Ordering::Equal || c_sign == a_sign {
        return Ok(a_sign);
    }
    let v = refine(
        DEFAULT_PRECISION_CAP,
        |bits| {
            let pr = pi_root(p, bits);
            let dp = pi_enclosure(bits + 8).mul_rational(d).nth_root(p);
            Ok(IntervalReal::from_rational(a, bits).add(&pr.mul_rational(b)).sub(&dp))
        },
        |v| !v.contains_zero(),
    )?;
    Ok(if v.is_positive() { Ordering::Greater } else { Ordering::Less })
}

/// A radius a + b·π^{1/p}; b = 0 is an ordinary rational radius.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Radius {
    pub rational: Rational,
    pub pi_root: Rational,
}

impl Radius {
    pub fn rational(a: Rational) -> Self {
        Radius { rational: a, pi_root: Rational::zero() }
    }

    /// b·π^{1/p}.
    pub fn pi_root(b: Rational) -> Self {
        Radius { rational: Rational::zero(), pi_root: b }
    }

    pub fn is_plain(&self) -> bool {
        self.pi_root.is_zero()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Radius { rational: &self.rational * c, pi_root: &self.pi_root * c }
    }

    pub fn add(&self, o: &Radius) -> Self {
        Radius { rational: &self.rational + &o.rational, pi_root: &self.pi_root + &o.pi_root }
    }

    pub fn sub(&self, o: &Radius) -> Self {
        Radius { rational: &self.rational - &o.rational, pi_root: &self.pi_root - &o.pi_root }
    }

    /// Exact comparison under exponent p.
    pub fn cmp_p(&self, o: &Radius, p: u32) -> Result<Ordering> {
        let d = self.sub(o);
        sign_pi_affine(&d.rational, &d.pi_root, &Rational::zero(), p)
    }

    pub fn is_positive(&self, p: u32) -> Result<bool> {
        Ok(sign_pi_affine(&self.rational, &self.pi_root, &Rational::zero(), p)? == Ordering::Greater)
    }

    pub fn min_p(&self, o: &Radius, p: u32) -> Result<Radius> {
        Ok(if self.cmp_p(o, p)? == Ordering::Greater { o.clone() } else { self.clone() })
    }

    pub fn enclosure(&self, p: u32, bits: u32) -> IntervalReal {
        IntervalReal::from_rational(&self.rational, bits).add(&pi_root(p, bits).mul_rational(&self.pi_root))
    }

    pub fn to_f64(&self, p: u32) -> f64 {
        self.enclosure(p, 64).mid_f64()
    }

    /// A positive rational not exceeding this radius.
    pub fn rational_lower_bound(&self, p: u32) -> Result<Rational> {
        if self.is_plain() {
            return Ok(self.rational.clone());
        }
        let v = refine(DEFAULT_PRECISION_CAP, |bits| Ok(self.enclosure(p, bits)), |v| v.is_positive())?;
        Ok(v.lo_rational())
    }
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_plain() {
            write!(f, "{}", format_rational(&self.rational))
        } else {
            write!(f, "{} + {}·π^(1/p)", format_rational(&self.rational), format_rational(&self.pi_root))
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RadiusJson {
    Plain(String),
    Affine { rational: String, pi_root: String },
}

impl Serialize for Radius {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_plain() {
            RadiusJson::Plain(format_rational(&self.rational)).serialize(s)
        } else {
            RadiusJson::Affine { rational: format_rational(&self.rational), pi_root: format_rational(&self.pi_root) }
                .serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for Radius {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let e = serde::de::Error::custom;
        Ok(match RadiusJson::deserialize(d)? {
            RadiusJson::Plain(s) => Radius::rational(parse_rational(&s).map_err(e)?),
            RadiusJson::Affine { rational, pi_root } => Radius {
                rational: parse_rational(&rational).map_err(e)?,
                pi_root: parse_rational(&pi_root).map_err(e)?,
            },
        })
    }
}

/// Open ball B(center, radius) in L^p.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct RationalBall {
    pub center: RationalStepFunction,
    pub radius: Radius,
    pub p: u32,
}

#[derive(Deserialize)]
struct BallJson {
    center: RationalStepFunction,
    radius: Radius,
    p: u32,
}

impl<'de> Deserialize<'de> for RationalBall {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = BallJson::deserialize(d)?;
        RationalBall::with_radius(j.center, j.radius, j.p).map_err(serde::de::Error::custom)
    }
}

impl RationalBall {
    pub fn new(center: RationalStepFunction, radius: Rational, p: u32) -> Result<Self> {
        Self::with_radius(center, Radius::rational(radius), p)
    }

    pub fn with_radius(center: RationalStepFunction, radius: Radius, p: u32) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidInput("p must be ≥ 1".into()));
        }
        if !radius.is_positive(p)? {
            return Err(Error::InvalidInput("radius must be positive".into()));
        }
        Ok(RationalBall { center, radius, p })
    }

    pub fn radius_f64(&self) -> f64 {
        self.radius.to_f64(self.p)
    }
}

pub fn ball_contains_step(b: &RationalBall, g: &RationalStepFunction) -> Result<bool> {
    let d = lp_distance_pow(&b.center, g, b.p);
    Ok(sign_pi_affine(&b.radius.rational, &b.radius.pi_root, &d, b.p)? == Ordering::Greater)
}

/// B1 ⊆ B2 iff ‖c1 − c2‖ + r1 ≤ r2.
pub fn ball_subset(b1: &RationalBall, b2: &RationalBall) -> Result<bool> {
    if b1.p != b2.p {
        return Err(Error::MixedP(b1.p, b2.p));
    }
    let d = lp_distance_pow(&b1.center, &b2.center, b1.p);
    let r = b2.radius.sub(&b1.radius);
    Ok(sign_pi_affine(&r.rational, &r.pi_root, &d, b1.p)? != Ordering::Less)
}

/// Certified verdict of ‖f − center‖ against the radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Inside,
    Outside,
    BoundaryUnknown,
}

type ApproxFn = dyn Fn(u32) -> Result<RationalStepFunction> + Send + Sync;

/// m ↦ ψ_m with ‖ψ_m − f‖_p < 2^-m, memoized.
#[derive(Clone)]
pub struct ApproximationScheme {
    pub p: u32,
    pub name: String,
    f: Arc<ApproxFn>,
    memo: Arc<RwLock<HashMap<u32, RationalStepFunction>>>,
}

impl fmt::Debug for ApproximationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ApproximationScheme({}, p={})", self.name, self.p)
    }
}

impl ApproximationScheme {
    pub fn new(
        name: impl Into<String>,
        p: u32,
        f: impl Fn(u32) -> Result<RationalStepFunction> + Send + Sync + 'static,
    ) -> Self {
        ApproximationScheme { p, name: name.into(), f: Arc::new(f), memo: Arc::new(RwLock::new(HashMap::new())) }
    }

    /// The scheme of a step function: every approximant is the function itself.
    pub fn constant(g: RationalStepFunction, p: u32) -> Self {
        Self::new("step", p, move |_| Ok(g.clone()))
    }

    pub fn approximant(&self, m: u32) -> Result<RationalStepFunction> {
        if let Some(v) = self.memo.read().expect("memo lock").get(&m) {
            return Ok(v.clone());
        }
        let v = (self.f)(m)?;
        // Concurrent first calls compute the same value; whichever lands first is kept.
        Ok(self.memo.write().expect("memo lock").entry(m).or_insert(v).clone())
    }

    /// ‖ψ_m − ψ_{m'}‖_p ≤ 2^-m + 2^-m'.
    pub fn consistent(&self, m: u32, m2: u32) -> Result<bool> {
        let d = lp_distance_pow(&self.approximant(m)?, &self.approximant(m2)?, self.p);
        let bound = pow2(-(m as i64)) + pow2(-(m2 as i64));
        Ok(sign_pi_affine(&bound, &Rational::zero(), &d, self.p)? != Ordering::Less)
    }

    pub fn check_consistency(&self, m: u32, m2: u32) -> Result<()> {
        if self.consistent(m, m2)? {
            Ok(())
        } else {
            Err(Error::SchemeInconsistent { m, m2 })
        }
    }
}

pub fn scheme_in_ball(f: &ApproximationScheme, b: &RationalBall, m_max: u32) -> Result<Membership> {
    if f.p != b.p {
        return Err(Error::MixedP(f.p, b.p));
    }
    for m in 0..=m_max {
        let psi = f.approximant(m)?;
        let d = lp_distance_pow(&psi, &b.center, b.p);
        let e = pow2(-(m as i64));
        // Inside: r − 2^-m − ‖ψ_m − c‖ > 0.
        if sign_pi_affine(&(&b.radius.rational - &e), &b.radius.pi_root, &d, b.p)? == Ordering::Greater {
            return Ok(Membership::Inside);
        }
        // Outside: r + 2^-m − ‖ψ_m − c‖ < 0.
        if sign_pi_affine(&(&b.radius.rational + &e), &b.radius.pi_root, &d, b.p)? == Ordering::Less {
            return Ok(Membership::Outside);
        }
    }
    Ok(Membership::BoundaryUnknown)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    fn c(v: Rational) -> RationalStepFunction {
        RationalStepFunction::constant(v)
    }

    #[test]
    fn containment_examples() {
        let b = RationalBall::new(c(int(0)), int(1), 1).unwrap();
        assert!(ball_contains_step(&b, &c(rat(1, 25))).unwrap());
        assert!(ball_contains_step(&b, &c(int(0))).unwrap());
        assert!(!ball_contains_step(&b, &c(int(1))).unwrap());
        // Exactly on the boundary: ‖1/(2π)·π... ‖ with a π-scaled radius.
        let bp = RationalBall::with_radius(c(int(0)), Radius::pi_root(int(2)), 1).unwrap();
        assert!(!ball_contains_step(&bp, &c(int(1))).unwrap());
        assert!(ball_contains_step(&bp, &c(rat(99, 100))).unwrap());
    }

    #[test]
    fn subset_examples() {
        let psi = c(rat(1, 3));
        let big = RationalBall::new(psi.clone(), rat(1, 2), 1).unwrap();
        let small = RationalBall::new(psi, rat(1, 4), 1).unwrap();
        assert!(ball_subset(&small, &big).unwrap());
        let b = RationalBall::new(c(int(0)), int(1), 1).unwrap();
        let inner = RationalBall::with_radius(c(rat(1, 8)), Radius::rational(rat(1, 4)).add(&Radius::pi_root(int(0))), 1).unwrap();
        // 2π/8 + 1/4 ≈ 1.035 > 1
        assert!(!ball_subset(&inner, &b).unwrap());
        let inner = RationalBall::new(c(rat(1, 25)), rat(1, 4), 1).unwrap();
        assert!(ball_subset(&inner, &b).unwrap());
        let far = RationalBall::new(c(int(1)), int(1), 1).unwrap();
        assert!(!ball_subset(&far, &b).unwrap());
        // Tight containment decided exactly: ‖1/8‖₁ = π/4, radius π/4 + 1/2 inside π/2 + 1/2.
        let outer = RationalBall::with_radius(c(int(0)), Radius { rational: rat(1, 2), pi_root: rat(1, 2) }, 1).unwrap();
        let tight = RationalBall::with_radius(c(rat(1, 8)), Radius { rational: rat(1, 2), pi_root: rat(1, 4) }, 1).unwrap();
        assert!(ball_subset(&tight, &outer).unwrap());
        let q = RationalBall::new(c(int(0)), int(1), 2).unwrap();
        assert_eq!(ball_subset(&q, &b), Err(Error::MixedP(2, 1)));
    }

    #[test]
    fn scheme_membership() {
        let b = RationalBall::new(c(int(0)), int(1), 1).unwrap();
        assert_eq!(scheme_in_ball(&ApproximationScheme::constant(c(int(0)), 1), &b, 10).unwrap(), Membership::Inside);
        assert_eq!(scheme_in_ball(&ApproximationScheme::constant(c(int(1)), 1), &b, 10).unwrap(), Membership::Outside);
        // ψ_m = 1/(2π)·... can't be rational; use a π-radius ball and a scheme converging to its boundary.
        let bp = RationalBall::with_radius(c(int(0)), Radius::pi_root(int(2)), 1).unwrap();
        let s = ApproximationScheme::new("to-boundary", 1, |m| {
            Ok(RationalStepFunction::constant(int(1) - pow2(-(m as i64) - 3)))
        });
        assert_eq!(scheme_in_ball(&s, &bp, 12).unwrap(), Membership::BoundaryUnknown);
    }

    #[test]
    fn radius_json() {
        let r = Radius::rational(rat(3, 4));
        assert_eq!(serde_json::to_string(&r).unwrap(), "\"3/4\"");
        let r2 = Radius::pi_root(rat(1, 2));
        let s = serde_json::to_string(&r2).unwrap();
        assert_eq!(serde_json::from_str::<Radius>(&s).unwrap(), r2);
    }
}
