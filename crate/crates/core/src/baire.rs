//! Constructors, meagerness witnesses, singleton avoidance and meager unions.

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::interval::IntervalReal;
use crate::exact::rational::{dyadic_ceil, int, pow2, rat, Rational};
use crate::exact::transcendental::pi_enclosure;
use crate::lp::{ball_subset, sign_pi_affine, ApproximationScheme, RationalBall};
use crate::step::{lp_distance_pow, RationalStepFunction};

/// A move plus optional structured notes recorded in transcripts.
#[derive(Debug, Clone)]
pub struct StrategyMove {
    pub ball: RationalBall,
    pub annotation: Option<serde_json::Value>,
}

type MoveFn = dyn Fn(&RationalBall, u64) -> Result<StrategyMove> + Send + Sync;

/// α : 𝓑 × ℕ → 𝓑 with α(B, i) ⊆ B.
#[derive(Clone)]
pub struct IndexedStrategy {
    pub name: String,
    pub shrinking: bool,
    f: Arc<MoveFn>,
}

impl fmt::Debug for IndexedStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IndexedStrategy({}, shrinking={})", self.name, self.shrinking)
    }
}

impl IndexedStrategy {
    pub fn new(
        name: impl Into<String>,
        shrinking: bool,
        f: impl Fn(&RationalBall, u64) -> Result<RationalBall> + Send + Sync + 'static,
    ) -> Self {
        IndexedStrategy {
            name: name.into(),
            shrinking,
            f: Arc::new(move |b, i| Ok(StrategyMove { ball: f(b, i)?, annotation: None })),
        }
    }

    pub fn annotated(
        name: impl Into<String>,
        shrinking: bool,
        f: impl Fn(&RationalBall, u64) -> Result<StrategyMove> + Send + Sync + 'static,
    ) -> Self {
        IndexedStrategy { name: name.into(), shrinking, f: Arc::new(f) }
    }

    pub fn apply(&self, b: &RationalBall, i: u64) -> Result<RationalBall> {
        Ok((self.f)(b, i)?.ball)
    }

    pub fn apply_annotated(&self, b: &RationalBall, i: u64) -> Result<StrategyMove> {
        (self.f)(b, i)
    }
}

/// Unindexed constructor α : 𝓑 → 𝓑.
#[derive(Clone)]
pub struct Strategy {
    pub name: String,
    f: Arc<dyn Fn(&RationalBall) -> Result<RationalBall> + Send + Sync>,
}

impl Strategy {
    pub fn new(name: impl Into<String>, f: impl Fn(&RationalBall) -> Result<RationalBall> + Send + Sync + 'static) -> Self {
        Strategy { name: name.into(), f: Arc::new(f) }
    }

    pub fn apply(&self, b: &RationalBall) -> Result<RationalBall> {
        (self.f)(b)
    }

    /// View as an indexed strategy ignoring the index.
    pub fn indexed(&self, shrinking: bool) -> IndexedStrategy {
        let s = self.clone();
        IndexedStrategy::new(self.name.clone(), shrinking, move |b, _| s.apply(b))
    }
}

pub fn identity_strategy() -> IndexedStrategy {
    IndexedStrategy::new("identity", false, |b, _| Ok(b.clone()))
}

/// Same centre, radius scaled by `factor` ∈ (0, 1].
pub fn shrink_strategy(factor: Rational) -> IndexedStrategy {
    let shrinking = factor < rat(1, 2);
    let name = format!("shrink-{}", crate::exact::format_rational(&factor));
    IndexedStrategy::new(name, shrinking, move |b, _| {
        RationalBall::with_radius(b.center.clone(), b.radius.scale(&factor), b.p)
    })
}

fn mix(seed: u64, b: &RationalBall, i: u64) -> u64 {
    let mut h = DefaultHasher::new();
    seed.hash(&mut h);
    b.hash(&mut h);
    i.hash(&mut h);
    splitmix(h.finish())
}

pub(crate) fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Moves the centre by a bump on a pseudo-random sub-interval, then shrinks.
/// Deterministic in (seed, ball, index); `wild` uses most of the available room.
pub fn recenter_strategy(seed: u64, wild: bool, shrinking: bool) -> IndexedStrategy {
    let name = format!("{}-{seed}", if wild { "recenter-wild" } else { "recenter" });
    IndexedStrategy::new(name, shrinking, move |b, i| {
        let h = mix(seed, b, i);
        let r = b.radius.rational_lower_bound(b.p)?;
        let new_r = if shrinking { &r / int(3) } else { &r * rat(1, 3) };
        let k = 1 + (h % 5) as i64;
        let width = pow2(-k);
        let start_slots = 1u64 << k;
        let start = Rational::from_integer(((h >> 8) % start_slots).into()) * &width;
        let end = &start + &width;
        let sign = if (h >> 20) & 1 == 0 { int(1) } else { int(-1) };
        let mut amp = if wild { r.clone() * int(4) } else { r.clone() / int(2) };
        // Halve until the moved ball fits.
        for _ in 0..200 {
            let bump = RationalStepFunction::from_cells(
                vec![Rational::zero(), start.clone(), end.clone(), int(2)],
                vec![Rational::zero(), &sign * &amp, Rational::zero()],
            )?;
            let c = crate::step::pointwise_add(&b.center, &bump).simplify();
            let cand = RationalBall::new(c, new_r.clone(), b.p)?;
            if ball_subset(&cand, b)? {
                return Ok(cand);
            }
            amp /= int(2);
        }
        RationalBall::new(b.center.clone(), new_r, b.p)
    })
}

/// Result of `avoid_singleton` with the data behind its certificate.
#[derive(Debug, Clone)]
pub struct Avoidance {
    pub ball: RationalBall,
    pub n: u32,
    pub approximant: RationalStepFunction,
}

/// An upper bound u of (2π)^{1/p}, dyadic with 16 fractional bits.
fn two_pi_root_upper(p: u32) -> Rational {
    let v = pi_enclosure(80).mul(&IntervalReal::from_int(2, 80)).nth_root(p);
    dyadic_ceil(&v.hi_rational(), 16)
}

/// Sub-ball of B certified to exclude the function represented by `f`.
pub fn avoid_singleton(b: &RationalBall, f: &ApproximationScheme) -> Result<RationalBall> {
    Ok(avoid_singleton_certified(b, f)?.ball)
}

pub fn avoid_singleton_certified(b: &RationalBall, f: &ApproximationScheme) -> Result<Avoidance> {
    if b.p != f.p {
        return Err(Error::MixedP(b.p, f.p));
    }
    let p = b.p;
    let eps = b.radius.rational_lower_bound(p)?;
    // Minimal n with δ = 2^-n < ε/8.
    let mut n: u32 = 0;
    while pow2(-(n as i64)) >= &eps / int(8) {
        n += 1;
    }
    let delta = pow2(-(n as i64));
    f.check_consistency(n, n + 1)?;
    let s = f.approximant(n)?;
    let w = &delta * int(4) / two_pi_root_upper(p);
    let center = b.center.zip_with(&s, |psi, sv| {
        let d = psi - sv;
        if d.abs() >= w {
            psi.clone()
        } else if d.is_negative() {
            sv - &w
        } else {
            sv + &w
        }
    });
    let center = center.simplify();
    let new_r = &delta / int(26);
    let out = RationalBall::new(center, new_r.clone(), p)?;
    if !ball_subset(&out, b)? {
        return Err(Error::StrategyContractViolation {
            round: 0,
            player: "avoid_singleton".into(),
            reason: "constructed ball not contained in input".into(),
        });
    }
    // ‖s_n − c'‖ > δ + ε'.
    let dpow = lp_distance_pow(&s, &out.center, p);
    if sign_pi_affine(&(&delta + &new_r), &Rational::zero(), &dpow, p)? != Ordering::Less {
        return Err(Error::StrategyContractViolation {
            round: 0,
            player: "avoid_singleton".into(),
            reason: "exclusion margin not certified".into(),
        });
    }
    Ok(Avoidance { ball: out, n, approximant: s })
}

/// Verdict of a piece membership probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PieceMembership {
    In,
    Out,
    Unknown,
}

type MembershipFn = dyn Fn(&ApproximationScheme, u64) -> Result<PieceMembership> + Send + Sync;

/// Certificate that X = ∪ X_i is meager: α(B, i) ∩ X_i = ∅.
#[derive(Clone)]
pub struct MeagerWitness {
    pub pieces: String,
    pub avoider: IndexedStrategy,
    pub membership_test: Option<Arc<MembershipFn>>,
}

impl fmt::Debug for MeagerWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MeagerWitness({})", self.pieces)
    }
}

/// Certified ‖g − f‖ > 0 from approximants, else Unknown.
pub fn certify_distinct(g: &ApproximationScheme, f: &ApproximationScheme, m_max: u32) -> Result<bool> {
    for m in 0..=m_max {
        let d = lp_distance_pow(&g.approximant(m)?, &f.approximant(m)?, f.p);
        let slack = pow2(1 - m as i64);
        if sign_pi_affine(&slack, &Rational::zero(), &d, f.p)? == Ordering::Less {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Witness for the meagerness of {f}: every piece is {f}.
pub fn singleton_witness(f: ApproximationScheme) -> MeagerWitness {
    let fa = f.clone();
    let avoider = IndexedStrategy::new(format!("avoid-{}", f.name), false, move |b, _| avoid_singleton(b, &fa));
    let fm = f.clone();
    MeagerWitness {
        pieces: format!("{{{}}}", f.name),
        avoider,
        membership_test: Some(Arc::new(move |g, _| {
            Ok(if certify_distinct(g, &fm, 12)? { PieceMembership::Out } else { PieceMembership::Unknown })
        })),
    }
}

/// Cantor pairing ⟨k, i⟩ = (k + i)(k + i + 1)/2 + i.
pub fn cantor_pair(k: u64, i: u64) -> u64 {
    let s = k + i;
    s * (s + 1) / 2 + i
}

pub fn cantor_unpair(z: u64) -> (u64, u64) {
    // w = ⌊(√(8z + 1) − 1)/2⌋ with exact integer square root.
    let t = 8u128 * z as u128 + 1;
    let mut r = (t as f64).sqrt() as u128;
    while r * r > t {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= t {
        r += 1;
    }
    let w = ((r - 1) / 2) as u64;
    let tri = w * (w + 1) / 2;
    let i = z - tri;
    (w - i, i)
}

/// Witness for ∪ X over a finite list; part k is reused for every k ≡ j mod len.
pub fn union_witness(parts: Vec<MeagerWitness>) -> Result<MeagerWitness> {
    if parts.is_empty() {
        return Err(Error::InvalidInput("union of no witnesses".into()));
    }
    let parts = Arc::new(parts);
    let len = parts.len() as u64;
    Ok(union_witness_indexed(format!("union of {len}"), move |k| parts[(k % len) as usize].clone()))
}

/// Witness for ∪_k X^(k) given k ↦ witness of X^(k).
pub fn union_witness_indexed(
    name: impl Into<String>,
    family: impl Fn(u64) -> MeagerWitness + Send + Sync + 'static,
) -> MeagerWitness {
    let family = Arc::new(family);
    let fam = family.clone();
    let avoider = IndexedStrategy::new("union", false, move |b, j| {
        let (k, i) = cantor_unpair(j);
        fam(k).avoider.apply(b, i)
    });
    let fam2 = family.clone();
    MeagerWitness {
        pieces: name.into(),
        avoider,
        membership_test: Some(Arc::new(move |g, j| {
            let (k, i) = cantor_unpair(j);
            match &fam2(k).membership_test {
                Some(t) => t(g, i),
                None => Ok(PieceMembership::Unknown),
            }
        })),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub ball: usize,
    pub index: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub strategy: String,
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks one move against the constructor contract; `None` when it holds.
pub fn check_move(s: &IndexedStrategy, b: &RationalBall, out: &RationalBall) -> Result<Option<String>> {
    if out.p != b.p {
        return Ok(Some(format!("exponent changed from {} to {}", b.p, out.p)));
    }
    if !ball_subset(out, b)? {
        return Ok(Some("move is not a sub-ball".into()));
    }
    if s.shrinking && out.radius.scale(&int(2)).cmp_p(&b.radius, b.p)? != Ordering::Less {
        return Ok(Some("radius not below half".into()));
    }
    Ok(None)
}

pub fn validate_strategy(s: &IndexedStrategy, sample_balls: &[RationalBall], indices: &[u64]) -> ValidationReport {
    let mut violations = Vec::new();
    let mut checked = 0;
    for (bi, b) in sample_balls.iter().enumerate() {
        for &i in indices {
            checked += 1;
            let verdict = s.apply(b, i).and_then(|out| check_move(s, b, &out));
            match verdict {
                Ok(None) => {}
                Ok(Some(reason)) => violations.push(Violation { ball: bi, index: i, reason }),
                Err(e) => violations.push(Violation { ball: bi, index: i, reason: e.to_string() }),
            }
        }
    }
    ValidationReport { strategy: s.name.clone(), checked, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{scheme_in_ball, Membership};

    fn c(v: Rational) -> RationalStepFunction {
        RationalStepFunction::constant(v)
    }

    #[test]
    fn avoid_zero_from_unit_ball() {
        let b = RationalBall::new(c(int(0)), int(1), 1).unwrap();
        let f = ApproximationScheme::constant(c(int(0)), 1);
        let a = avoid_singleton_certified(&b, &f).unwrap();
        assert!(ball_subset(&a.ball, &b).unwrap());
        assert_eq!(scheme_in_ball(&f, &a.ball, 4).unwrap(), Membership::Outside);
        // repeated application keeps nesting and exclusion
        let mut cur = a.ball;
        for _ in 0..5 {
            let nxt = avoid_singleton(&cur, &f).unwrap();
            assert!(ball_subset(&nxt, &cur).unwrap());
            assert_eq!(scheme_in_ball(&f, &nxt, 4).unwrap(), Membership::Outside);
            cur = nxt;
        }
    }

    #[test]
    fn avoid_works_for_p2_and_far_functions() {
        let b = RationalBall::new(c(rat(1, 3)), rat(1, 2), 2).unwrap();
        let f = ApproximationScheme::constant(c(int(5)), 2);
        let out = avoid_singleton(&b, &f).unwrap();
        assert!(ball_subset(&out, &b).unwrap());
        let g = ApproximationScheme::constant(c(rat(1, 3)), 2);
        let out = avoid_singleton(&b, &g).unwrap();
        assert_eq!(scheme_in_ball(&g, &out, 6).unwrap(), Membership::Outside);
    }

    #[test]
    fn pairing_round_trip() {
        for i in 0..1000 {
            for j in (0..1000).step_by(7) {
                assert_eq!(cantor_unpair(cantor_pair(i, j)), (i, j));
            }
        }
        assert_eq!(cantor_pair(0, 0), 0);
        assert_eq!(cantor_pair(1, 0), 1);
        assert_eq!(cantor_pair(0, 1), 2);
    }

    #[test]
    fn validation_flags_bad_moves() {
        let balls: Vec<_> = (1..5).map(|k| RationalBall::new(c(rat(k, 7)), rat(1, k), 1).unwrap()).collect();
        let good = shrink_strategy(rat(1, 4));
        let r = validate_strategy(&good, &balls, &[0, 1, 2]);
        assert!(r.valid() && good.shrinking);
        let bad = IndexedStrategy::new("escape", false, |b: &RationalBall, _| {
            RationalBall::with_radius(crate::step::scale_shift(&b.center, &int(3)), b.radius.clone(), b.p)
        });
        let r = validate_strategy(&bad, &balls, &[0]);
        assert_eq!(r.violations.len(), balls.len());
        let rc = recenter_strategy(7, true, false);
        assert!(validate_strategy(&rc, &balls, &[0, 1, 2, 3]).valid());
    }

    #[test]
    fn union_avoids_each_piece() {
        let f1 = ApproximationScheme::constant(c(int(0)), 1);
        let f2 = ApproximationScheme::constant(c(rat(1, 50)), 1);
        let w = union_witness(vec![singleton_witness(f1.clone()), singleton_witness(f2.clone())]).unwrap();
        let b = RationalBall::new(c(rat(1, 100)), rat(1, 2), 1).unwrap();
        for i in 0..4 {
            let out = w.avoider.apply(&b, cantor_pair(0, i)).unwrap();
            assert_eq!(scheme_in_ball(&f1, &out, 8).unwrap(), Membership::Outside);
            let out = w.avoider.apply(&b, cantor_pair(1, i)).unwrap();
            assert_eq!(scheme_in_ball(&f2, &out, 8).unwrap(), Membership::Outside);
        }
    }
}
