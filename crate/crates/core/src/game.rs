//! Banach-Mazur games between indexed strategies, result extraction and the
//! strategy/witness transformers.

use std::cmp::Ordering;
use std::sync::{Arc, Mutex};

use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::baire::{cantor_unpair, check_move, IndexedStrategy, MeagerWitness, PieceMembership};
use crate::error::{Error, Result};
use crate::exact::interval::{refine, IntervalReal};
use crate::exact::rational::{dyadic_ceil, int, pow2, Rational};
use crate::exact::transcendental::pi_enclosure;
use crate::lp::{ball_subset, sign_pi_affine, ApproximationScheme, Radius, RationalBall, DEFAULT_PRECISION_CAP};
use crate::step::{lp_distance_pow, RationalStepFunction};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameRound {
    pub index: u64,
    pub alpha_move: RationalBall,
    pub beta_move: RationalBall,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_note: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_note: Option<serde_json::Value>,
    pub alpha_contained: bool,
    pub beta_contained: bool,
    pub beta_shrinks: bool,
    pub radius_bound_holds: bool,
}

/// R_0 = β(α(B, 0), 0), R_i = β(α(R_{i−1}, i), i).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameTranscript {
    pub alpha: String,
    pub beta: String,
    pub initial: RationalBall,
    pub rounds: Vec<GameRound>,
    pub radii: Vec<Radius>,
}

impl GameTranscript {
    pub fn final_ball(&self) -> &RationalBall {
        self.rounds.last().map(|r| &r.beta_move).unwrap_or(&self.initial)
    }

    /// Re-checks nesting and the radius bound with exact arithmetic.
    pub fn verify(&self) -> Result<bool> {
        let mut prev = &self.initial;
        let r = &self.initial.radius;
        for (i, rd) in self.rounds.iter().enumerate() {
            if !ball_subset(&rd.alpha_move, prev)? || !ball_subset(&rd.beta_move, &rd.alpha_move)? {
                return Ok(false);
            }
            let bound = r.scale(&pow2(-(i as i64) - 1));
            if rd.beta_move.radius.cmp_p(&bound, r_p(&self.initial))? != Ordering::Less {
                return Ok(false);
            }
            prev = &rd.beta_move;
        }
        Ok(true)
    }
}

fn r_p(b: &RationalBall) -> u32 {
    b.p
}

fn violation(round: usize, player: &str, reason: impl Into<String>) -> Error {
    Error::StrategyContractViolation { round, player: player.into(), reason: reason.into() }
}

/// Plays one round from `prev`, validating both moves.
pub fn play_round(alpha: &IndexedStrategy, beta: &IndexedStrategy, prev: &RationalBall, initial: &RationalBall, i: u64) -> Result<GameRound> {
    let round = i as usize;
    let a = alpha.apply_annotated(prev, i)?;
    if let Some(reason) = check_move(&alpha_contract(alpha), prev, &a.ball)? {
        return Err(violation(round, "alpha", reason));
    }
    let b = beta.apply_annotated(&a.ball, i)?;
    if let Some(reason) = check_move(beta, &a.ball, &b.ball)? {
        return Err(violation(round, "beta", reason));
    }
    let bound = initial.radius.scale(&pow2(-(i as i64) - 1));
    let radius_ok = b.ball.radius.cmp_p(&bound, initial.p)? == Ordering::Less;
    if !radius_ok {
        return Err(violation(round, "beta", "radius bound r·2^-(i+1) violated"));
    }
    Ok(GameRound {
        index: i,
        alpha_move: a.ball,
        beta_move: b.ball,
        alpha_note: a.annotation,
        beta_note: b.annotation,
        alpha_contained: true,
        beta_contained: true,
        beta_shrinks: true,
        radius_bound_holds: true,
    })
}

// α is checked for containment only, whatever it claims about shrinking.
fn alpha_contract(alpha: &IndexedStrategy) -> IndexedStrategy {
    let mut a = alpha.clone();
    a.shrinking = false;
    a
}

pub fn run_game(alpha: &IndexedStrategy, beta: &IndexedStrategy, b: &RationalBall, rounds: usize) -> Result<GameTranscript> {
    if !beta.shrinking {
        return Err(violation(0, "beta", "strategy is not shrinking"));
    }
    let mut out = Vec::with_capacity(rounds);
    let mut radii = Vec::with_capacity(rounds);
    let mut prev = b.clone();
    for i in 0..rounds {
        let rd = play_round(alpha, beta, &prev, b, i as u64)?;
        prev = rd.beta_move.clone();
        radii.push(prev.radius.clone());
        out.push(rd);
    }
    Ok(GameTranscript { alpha: alpha.name.clone(), beta: beta.name.clone(), initial: b.clone(), rounds: out, radii })
}

/// k(n) = min{k : r·2^-(k+1) ≤ 2^-(n+1)}.
pub fn result_round_index(r: &Radius, p: u32, n: u32) -> Result<u64> {
    let mut k: u64 = 0;
    loop {
        let lhs = r.scale(&pow2(-(k as i64) - 1));
        if lhs.cmp_p(&Radius::rational(pow2(-(n as i64) - 1)), p)? != Ordering::Greater {
            return Ok(k);
        }
        k += 1;
    }
}

struct LazyGame {
    alpha: IndexedStrategy,
    beta: IndexedStrategy,
    initial: RationalBall,
    rounds: Mutex<Vec<RationalBall>>,
}

impl LazyGame {
    fn round(&self, k: u64) -> Result<RationalBall> {
        let mut rs = self.rounds.lock().expect("game lock");
        while rs.len() as u64 <= k {
            let prev = rs.last().cloned().unwrap_or_else(|| self.initial.clone());
            let i = rs.len() as u64;
            let rd = play_round(&self.alpha, &self.beta, &prev, &self.initial, i)?;
            rs.push(rd.beta_move);
        }
        Ok(rs[k as usize].clone())
    }
}

/// The game's result as a lazy approximation scheme: ψ_n = centre of R_{k(n)}.
pub fn result_scheme(alpha: &IndexedStrategy, beta: &IndexedStrategy, b: &RationalBall) -> Result<ApproximationScheme> {
    if !beta.shrinking {
        return Err(violation(0, "beta", "strategy is not shrinking"));
    }
    let game = Arc::new(LazyGame {
        alpha: alpha.clone(),
        beta: beta.clone(),
        initial: b.clone(),
        rounds: Mutex::new(Vec::new()),
    });
    let (r, p) = (b.radius.clone(), b.p);
    let name = format!("result({}, {})", alpha.name, beta.name);
    Ok(ApproximationScheme::new(name, p, move |n| {
        let k = result_round_index(&r, p, n)?;
        Ok(game.round(k)?.center)
    }))
}

/// Result scheme restricted to an already played transcript.
pub fn transcript_scheme(t: &GameTranscript) -> ApproximationScheme {
    let balls: Vec<RationalBall> = t.rounds.iter().map(|r| r.beta_move.clone()).collect();
    let (r, p) = (t.initial.radius.clone(), t.initial.p);
    let available = balls.len() as u64;
    ApproximationScheme::new("transcript", p, move |n| {
        let k = result_round_index(&r, p, n)?;
        if k >= available {
            return Err(Error::InvalidInput(format!("approximant {n} needs round {k}, only {available} played")));
        }
        Ok(balls[k as usize].center.clone())
    })
}

/// β(A, i) = B(centre of γ(A, i), min{ε/2, r/3}).
pub fn winning_from_witness(w: &MeagerWitness) -> IndexedStrategy {
    let gamma = w.avoider.clone();
    IndexedStrategy::new(format!("win({})", w.avoider.name), true, move |a, i| {
        let g = gamma.apply(a, i)?;
        let half = g.radius.scale(&Rational::new(1.into(), 2.into()));
        let third = a.radius.scale(&Rational::new(1.into(), 3.into()));
        let r = half.min_p(&third, a.p)?;
        RationalBall::with_radius(g.center, r, a.p)
    })
}

/// Enumeration of rational balls for a fixed p, ordered by encoding size.
///
/// A ball with interior breakpoints c_1 < … < c_k (reduced a/b in (0, 2)), values
/// v_0 … v_k (reduced a/b) and radius x + y·π^{1/p} (x, y ≥ 0 not both zero) has
/// size 1 + k + Σ(|a| + b) over every rational, counting 0 as 0/1. Within one size,
/// balls appear in the order: radius x, radius y, v_0, c_1, v_1, …, each component
/// ranging over its candidates by increasing size, then denominator, then numerator.
pub struct BallEnumeration {
    pub p: u32,
    cache: Mutex<(usize, Vec<RationalBall>)>,
}

#[derive(Clone, Copy)]
enum Kind {
    Value,
    Breakpoint,
    NonNeg,
}

fn rationals_of_size(s: u64, kind: Kind) -> Vec<Rational> {
    let mut out = Vec::new();
    for b in 1..=s {
        let rest = s - b;
        let nums: Vec<i64> = match kind {
            Kind::Value if rest == 0 => vec![0],
            Kind::Value => vec![-(rest as i64), rest as i64],
            _ => vec![rest as i64],
        };
        for a in nums {
            let ua = a.unsigned_abs();
            if a == 0 && b != 1 {
                continue;
            }
            if a != 0 && ua.gcd(&b) != 1 {
                continue;
            }
            let q = Rational::new(a.into(), (b as i64).into());
            let ok = match kind {
                Kind::Value => true,
                Kind::Breakpoint => q > Rational::zero() && q < int(2),
                Kind::NonNeg => q >= Rational::zero(),
            };
            if ok {
                out.push(q);
            }
        }
    }
    out
}

impl BallEnumeration {
    pub fn new(p: u32) -> Self {
        BallEnumeration { p, cache: Mutex::new((0, Vec::new())) }
    }

    fn balls_of_size(&self, s: usize) -> Vec<RationalBall> {
        let mut out = Vec::new();
        let s = s as u64;
        // radius (x, y) sizes ≥ 1 each, values ≥ 1, breakpoints ≥ 2.
        let mut k = 0u64;
        while 1 + k + 2 + (k + 1) + 2 * k <= s {
            let budget = s - 1 - k;
            let mut parts: Vec<Rational> = Vec::new();
            self.fill(&mut out, &mut parts, k, budget);
            k += 1;
        }
        out
    }

    // Component order: x, y, v_0, (c_1, v_1), …
    fn fill(&self, out: &mut Vec<RationalBall>, parts: &mut Vec<Rational>, k: u64, budget: u64) {
        let total = 3 + 2 * k as usize;
        let idx = parts.len();
        if idx == total {
            if budget == 0 {
                if let Some(b) = self.assemble(parts, k) {
                    out.push(b);
                }
            }
            return;
        }
        let kind = match idx {
            0 | 1 => Kind::NonNeg,
            i if i % 2 == 0 => Kind::Value,
            _ => Kind::Breakpoint,
        };
        // Remaining components each need at least 1 (values, radius) or 2 (breakpoints).
        let remaining_min: u64 = (idx + 1..total)
            .map(|j| if j >= 3 && j % 2 == 1 { 2 } else { 1 })
            .sum();
        if budget < remaining_min {
            return;
        }
        for sz in 1..=budget - remaining_min {
            for q in rationals_of_size(sz, kind) {
                if let Kind::Breakpoint = kind {
                    if idx >= 5 && q <= parts[idx - 2] {
                        continue;
                    }
                }
                parts.push(q);
                self.fill(out, parts, k, budget - sz);
                parts.pop();
            }
        }
    }

    fn assemble(&self, parts: &[Rational], k: u64) -> Option<RationalBall> {
        let radius = Radius { rational: parts[0].clone(), pi_root: parts[1].clone() };
        if radius.rational.is_zero() && radius.pi_root.is_zero() {
            return None;
        }
        let mut bp = vec![Rational::zero()];
        let mut vs = vec![parts[2].clone()];
        for j in 0..k as usize {
            bp.push(parts[3 + 2 * j].clone());
            vs.push(parts[4 + 2 * j].clone());
        }
        bp.push(int(2));
        let f = RationalStepFunction::new(bp, vs).ok()?;
        Some(RationalBall { center: f, radius, p: self.p })
    }

    /// The j-th ball.
    pub fn ball(&self, j: u64) -> RationalBall {
        let mut c = self.cache.lock().expect("enumeration lock");
        while c.1.len() as u64 <= j {
            c.0 += 1;
            let s = c.0;
            let more = self.balls_of_size(s);
            c.1.extend(more);
        }
        c.1[j as usize].clone()
    }
}

/// A positive radius ≤ (Dπ)^{1/p} − R, which must be positive.
fn gap_below(d: &Rational, r: &Radius, p: u32) -> Result<Radius> {
    if p == 1 {
        return Ok(Radius { rational: -&r.rational, pi_root: d - &r.pi_root });
    }
    let v = refine(
        DEFAULT_PRECISION_CAP,
        |bits| Ok(pi_enclosure(bits + 8).mul_rational(d).nth_root(p).sub(&r.enclosure(p, bits))),
        |v: &IntervalReal| v.is_positive(),
    )?;
    Ok(Radius::rational(crate::exact::rational::dyadic_floor(&v.lo_rational(), 64 + v.bits)))
}

/// A positive radius ≤ R − (Dπ)^{1/p}, which must be positive.
fn gap_above(r: &Radius, d: &Rational, p: u32) -> Result<Radius> {
    if p == 1 {
        return Ok(Radius { rational: r.rational.clone(), pi_root: &r.pi_root - d });
    }
    let v = refine(
        DEFAULT_PRECISION_CAP,
        |bits| Ok(r.enclosure(p, bits).sub(&pi_enclosure(bits + 8).mul_rational(d).nth_root(p))),
        |v: &IntervalReal| v.is_positive(),
    )?;
    Ok(Radius::rational(crate::exact::rational::dyadic_floor(&v.lo_rational(), 64 + v.bits)))
}

/// Which branch of the case analysis produced γ(O, i).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GammaCase {
    Disjoint,
    Inside,
    Boundary,
}

#[derive(Debug, Clone)]
pub struct GammaMove {
    pub ball: RationalBall,
    pub case: GammaCase,
    pub target: RationalBall,
}

/// γ(O, i) for the witness built from a shrinking winning strategy β.
pub fn gamma_move(beta: &IndexedStrategy, enumeration: &BallEnumeration, o: &RationalBall, i: u64) -> Result<GammaMove> {
    let p = o.p;
    if enumeration.p != p {
        return Err(Error::MixedP(p, enumeration.p));
    }
    let (bi, bprime) = cantor_unpair(i);
    let oi = enumeration.ball(bi);
    let d = lp_distance_pow(&o.center, &oi.center, p);
    let eps = &o.radius;
    let eps_i = &oi.radius;
    let quarter = Rational::new(1.into(), 4.into());
    // ε_i − d as a sign: Greater means d < ε_i.
    let s = sign_pi_affine(&eps_i.rational, &eps_i.pi_root, &d, p)?;
    let (ball, case) = match s {
        Ordering::Less => {
            let nu = gap_below(&d, eps_i, p)?;
            let r = eps.min_p(&nu, p)?;
            (RationalBall::with_radius(o.center.clone(), r, p)?, GammaCase::Disjoint)
        }
        Ordering::Greater => {
            let nu = gap_above(eps_i, &d, p)?;
            let r = eps.scale(&quarter).min_p(&nu, p)?;
            let sball = RationalBall::with_radius(o.center.clone(), r, p)?;
            (beta.apply(&sball, bprime)?, GammaCase::Inside)
        }
        Ordering::Equal => {
            // Shift ψ_O away from ψ_i by w on every cell.
            let w = if p == 1 && eps.rational.is_zero() {
                &eps.pi_root / int(4)
            } else {
                let u = two_pi_root_upper(p);
                eps.rational_lower_bound(p)? / (u * int(2))
            };
            let ws = w.clone();
            let psi_s = o.center.zip_with(&oi.center, move |a, b| if a >= b { a + &ws } else { a - &ws }).simplify();
            let ds = lp_distance_pow(&psi_s, &oi.center, p);
            let sep = gap_below(&ds, eps_i, p)?;
            let r = eps.scale(&quarter).min_p(&sep, p)?;
            (RationalBall::with_radius(psi_s, r, p)?, GammaCase::Boundary)
        }
    };
    if !ball_subset(&ball, o)? {
        return Err(violation(i as usize, "gamma", "case construction left the ball"));
    }
    Ok(GammaMove { ball, case, target: oi })
}

fn two_pi_root_upper(p: u32) -> Rational {
    let v = pi_enclosure(80).mul(&IntervalReal::from_int(2, 80)).nth_root(p);
    dyadic_ceil(&v.hi_rational(), 16)
}

/// Witness for the set of results β can be forced away from.
pub fn witness_from_winning(beta: &IndexedStrategy, enumeration: Arc<BallEnumeration>) -> MeagerWitness {
    let b2 = beta.clone();
    let en = enumeration.clone();
    let avoider = IndexedStrategy::new(format!("gamma({})", beta.name), false, move |o, i| {
        Ok(gamma_move(&b2, &en, o, i)?.ball)
    });
    MeagerWitness {
        pieces: format!("X_i from {} over enumerated balls", beta.name),
        avoider,
        membership_test: Some(Arc::new(|_, _| Ok(PieceMembership::Unknown))),
    }
}
