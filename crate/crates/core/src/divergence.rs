//! Strategy for the Banach-Mazur game in L¹ that drives the opponent towards
//! functions with large Fourier partial sums: rescaled Kolmogorov blocks
//! c·(f_n(q·x) − ½) are added round by round with spectrally separated q.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::baire::IndexedStrategy;
use crate::error::{Error, Result};
use crate::exact::fint::pi_fi;
use crate::exact::rational::{dyadic_floor, format_rational, int, pow2, rat, to_f64, Rational};
use crate::exact::{Fi, IntervalReal};
use crate::fourier::{grid_partial_sums_fast, step_coeffs_fast};
use crate::game::{result_round_index, run_game, transcript_scheme, GameTranscript};
use crate::kolmogorov::{build_poly, grid_point, measure_exceptional_set, threshold, Evaluator, KolmogorovPoly};
use crate::lp::{sign_pi_affine, RationalBall, Radius};
use crate::step::{lp_distance_pow, lp_norm_pow, pointwise_add, RationalStepFunction};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivergenceSchedule {
    /// n_k
    pub blocks: Vec<u32>,
    /// q_0 = 1, q_{k+1} = q_k·m_max(n_k) + 1
    pub q: Vec<u128>,
    #[serde(with = "crate::exact::rational")]
    pub a_const: Rational,
    /// A_{n_k} = (log n_k)^{1/2} − A
    pub a_n: Vec<IntervalReal>,
    /// Why the default sequence stopped early, if it did.
    pub truncated: Option<String>,
    pub polys: Vec<KolmogorovPoly>,
}

impl DivergenceSchedule {
    /// Explicit block sequence.
    pub fn from_blocks(blocks: &[u32], a: Rational) -> Result<Self> {
        let mut s = Self::empty(a);
        for &n in blocks {
            s.push(n)?;
        }
        Ok(s)
    }

    /// n_k = 2^(2^k) while n_k ≤ cap and the block is representable.
    pub fn default_capped(cap: u32, a: Rational) -> Result<Self> {
        let mut s = Self::empty(a);
        let mut k = 0u32;
        loop {
            let n = match 1u64.checked_shl(1 << k) {
                Some(n) if n <= cap as u64 => n as u32,
                _ => break,
            };
            if let Err(e) = s.push(n) {
                s.truncated = Some(format!("block n = {n}: {e}"));
                break;
            }
            k += 1;
        }
        if s.blocks.is_empty() {
            return Err(Error::InvalidInput(format!("schedule cap {cap} admits no block")));
        }
        Ok(s)
    }

    fn empty(a: Rational) -> Self {
        DivergenceSchedule { blocks: vec![], q: vec![], a_const: a, a_n: vec![], truncated: None, polys: vec![] }
    }

    fn push(&mut self, n: u32) -> Result<()> {
        let poly = build_poly(n)?;
        let q = match (self.q.last(), self.polys.last()) {
            (Some(q), Some(p)) => q
                .checked_mul(p.max_freq())
                .and_then(|v| v.checked_add(1))
                .ok_or_else(|| Error::InvalidInput(format!("dilation factor overflows at n = {n}")))?,
            _ => 1,
        };
        q.checked_mul(poly.max_freq())
            .ok_or_else(|| Error::InvalidInput(format!("block order overflows at n = {n}")))?;
        self.a_n.push(threshold(n, &IntervalReal::from_rational(&self.a_const, 96))?);
        self.blocks.push(n);
        self.q.push(q);
        self.polys.push(poly);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Violated invariants on the computed prefix, empty when all hold.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut out = vec![];
        for (k, a) in self.a_n.iter().enumerate() {
            if !a.is_positive() {
                out.push(format!("A_n{k} is not certified positive"));
            }
        }
        for k in 1..self.len() {
            // A_n^{-1/2} non-increasing ⇔ n_k non-decreasing
            if self.blocks[k] < self.blocks[k - 1] {
                out.push(format!("A_n^(-1/2) increases at block {k}"));
            }
            if self.q[k] <= self.q[k - 1] * self.polys[k - 1].max_freq() {
                out.push(format!("blocks {} and {k} overlap in frequency", k - 1));
            }
        }
        out
    }

    pub fn a_inv_sqrt(&self, k: usize) -> Option<IntervalReal> {
        self.a_n[k].sqrt().recip()
    }
}

/// F_k(x) = A_{n_k}^{-1/2}(f_{n_k}(q_k x) − ½) at x = u·π.
pub fn rescaled_block(k: usize, sched: &DivergenceSchedule, u: &Rational) -> Result<IntervalReal> {
    if k >= sched.len() {
        return Err(Error::ScheduleExhausted { round: k, reason: format!("schedule has {} blocks", sched.len()) });
    }
    let scale = sched
        .a_inv_sqrt(k)
        .ok_or_else(|| Error::ScheduleExhausted { round: k, reason: "A_n is not positive".into() })?;
    let qu = u * Rational::from_integer(BigInt::from(sched.q[k]));
    let v = Evaluator::new(&sched.polys[k]).value(&qu).sub(Fi::point(0.5));
    Ok(v.to_interval(64).mul(&scale))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AmplitudePolicy {
    /// Amplitude A_n^{-1/2}; rounds whose largeness conditions fail raise ScheduleExhausted.
    Literal,
    /// Largest power of two c ≤ A_n^{-1/2} with 2πc < ε_m/2.
    Damped,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApproxPolicy {
    pub amplitude: AmplitudePolicy,
    /// Refinement stops once the discretization error is below this fraction of its budget.
    #[serde(with = "crate::exact::rational")]
    pub target_fraction: Rational,
    /// Cap on the cells of one dilated block.
    pub max_cells: usize,
    /// Grid used for exceedance fractions.
    pub grid: usize,
}

impl Default for ApproxPolicy {
    fn default() -> Self {
        ApproxPolicy { amplitude: AmplitudePolicy::Damped, target_fraction: rat(1, 16), max_cells: 1 << 19, grid: 2048 }
    }
}

/// Step approximant s of f_n on one period with ∫₀^{2π} |f_n − s| ≤ error.
#[derive(Debug, Clone)]
pub struct BlockDiscretization {
    pub base: RationalStepFunction,
    pub error: f64,
}

struct Cell {
    k: u64,
    d: u32,
    val: Rational,
    err: f64,
}

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Cell {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

// Degree limit for exact cell integrals.
const INTEGRAL_DEGREE: u128 = 1 << 14;

fn eval_cell(ev: &Evaluator, k: u64, d: u32) -> Cell {
    let w = pow2(1 - d as i64);
    let lo = &w * int(k as i64);
    let hi = &lo + &w;
    let r = ev.range(&lo, &hi);
    let len = Fi::from_rational(&w).mul(pi_fi());
    let mid = dyadic_floor(&Rational::from_float(r.mid()).unwrap_or_else(Rational::zero), 24);
    let v = Fi::from_rational(&mid);
    let dev = r.sub(v).mag_upper().max(v.sub(r).mag_upper());
    let mut best = Cell { k, d, err: len.mul(Fi::point(dev)).hi, val: mid };
    if let Some(int_f) = ev.integral(&lo, &hi, INTEGRAL_DEGREE) {
        // f ≥ v on the cell gives ∫|f − v| = ∫f − v·len, and symmetrically below
        let below = dyadic_floor(&Rational::from_float(r.lo).unwrap_or_else(Rational::zero), 24);
        let e = int_f.sub(len.mul(Fi::from_rational(&below))).hi;
        if e < best.err {
            best = Cell { k, d, err: e, val: below };
        }
        let above = crate::exact::rational::dyadic_ceil(&Rational::from_float(r.hi).unwrap_or_else(Rational::zero), 24);
        let e = len.mul(Fi::from_rational(&above)).sub(int_f).hi;
        if e < best.err {
            best = Cell { k, d, err: e, val: above };
        }
    }
    best
}

/// Adaptive dyadic bisection of one period until the certified error is ≤ target
/// or `max_cells` is reached.
pub fn discretize_block(poly: &KolmogorovPoly, target: f64, max_cells: usize) -> Result<BlockDiscretization> {
    if max_cells == 0 {
        return Err(Error::InvalidInput("cell budget is zero".into()));
    }
    let ev = Evaluator::new(poly);
    let mut d0 = 0u32;
    while d0 < 6 && (2usize << d0) <= max_cells {
        d0 += 1;
    }
    let mut heap: BinaryHeap<Cell> = (0..1u64 << d0).map(|k| eval_cell(&ev, k, d0)).collect();
    let mut total: f64 = heap.iter().map(|c| c.err).sum();
    while total > target && heap.len() < max_cells {
        let c = heap.pop().expect("nonempty");
        if c.d >= 60 {
            heap.push(c);
            break;
        }
        let (a, b) = (eval_cell(&ev, 2 * c.k, c.d + 1), eval_cell(&ev, 2 * c.k + 1, c.d + 1));
        total += a.err + b.err - c.err;
        heap.push(a);
        heap.push(b);
    }
    let mut cells = heap.into_vec();
    cells.sort_by(|x, y| (Rational::new(BigInt::from(x.k), BigInt::from(1u64) << x.d as usize))
        .cmp(&Rational::new(BigInt::from(y.k), BigInt::from(1u64) << y.d as usize)));
    let error = cells.iter().fold(Fi::ZERO, |acc, c| acc.add(Fi::new(0.0, c.err))).hi;
    let mut bp = vec![Rational::zero()];
    let mut vs = vec![];
    for c in cells {
        bp.push(pow2(1 - c.d as i64) * int(c.k as i64 + 1));
        vs.push(c.val);
    }
    Ok(BlockDiscretization { base: RationalStepFunction::new(bp, vs)?.simplify(), error })
}

/// Per-round record carried in the strategy's annotations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameRoundState {
    pub m: u64,
    pub eps_m: Radius,
    /// α(m+1): the block index used.
    pub alpha_param: usize,
    pub n: u32,
    pub q: String,
    #[serde(with = "crate::exact::rational")]
    pub amplitude: Rational,
    /// β(m+1)
    #[serde(with = "crate::exact::rational")]
    pub beta_param: Rational,
    pub eps_next: Radius,
    pub base_cells: usize,
    pub total_cells: usize,
    /// Certified bound on ‖ψ_{m+1} − e_{m+1}‖₁ and its budget ε_m/4.
    pub discretization_error: f64,
    pub discretization_budget: f64,
    /// ‖ψ_{m+1} − ψ_m‖₁ + ε_{m+1} < ε_m, decided exactly.
    pub containment_certified: bool,
    /// max_j q·m_j·β(m+1) < (m+1)/2, exact.
    pub persistence_certified: bool,
    /// Mean of the added block, exact.
    #[serde(with = "crate::exact::rational")]
    pub block_mean: Rational,
    /// Grid fraction of x with q·x in the measured exceptional set of f_n.
    pub exceedance_fraction: f64,
}

fn exhausted(round: u64, reason: impl Into<String>) -> Error {
    Error::ScheduleExhausted { round: round as usize, reason: reason.into() }
}

type ExceedanceCache = Arc<Mutex<HashMap<u32, Arc<Vec<bool>>>>>;

fn exceptional_flags(cache: &ExceedanceCache, sched: &DivergenceSchedule, k: usize, grid: usize) -> Result<Arc<Vec<bool>>> {
    let n = sched.blocks[k];
    if let Some(v) = cache.lock().expect("cache lock").get(&n) {
        return Ok(v.clone());
    }
    let a = IntervalReal::from_rational(&sched.a_const, 96);
    let rep = measure_exceptional_set(&sched.polys[k], &a, grid)?;
    let flags = Arc::new(rep.rows.iter().map(|r| r.exceptional).collect::<Vec<_>>());
    cache.lock().expect("cache lock").insert(n, flags.clone());
    Ok(flags)
}

/// Largest 2^-t with l·2^-t < bound.
fn largest_pow2_below(l: &Rational, bound: &Rational) -> Rational {
    let mut t = 0i64;
    while l * pow2(-t) >= *bound {
        t += 1;
    }
    pow2(-t)
}

/// g(O_m, m): adds the m-th rescaled block to the centre and shrinks the radius.
pub fn divergence_strategy(sched: Arc<DivergenceSchedule>, policy: ApproxPolicy) -> IndexedStrategy {
    let cache: ExceedanceCache = Arc::new(Mutex::new(HashMap::new()));
    let name = format!("divergence-{:?}", policy.amplitude).to_lowercase();
    IndexedStrategy::annotated(name, true, move |ball, m| {
        let k = m as usize;
        if ball.p != 1 {
            return Err(Error::InvalidInput("divergence strategy plays in L¹".into()));
        }
        if k >= sched.len() {
            return Err(exhausted(m, format!("schedule has {} blocks", sched.len())));
        }
        let (n, q, poly) = (sched.blocks[k], sched.q[k], &sched.polys[k]);
        let eps = &ball.radius;
        let a_inv = sched.a_inv_sqrt(k).ok_or_else(|| exhausted(m, format!("A_n ≤ 0 for n = {n}")))?;
        let c = match policy.amplitude {
            AmplitudePolicy::Literal => {
                let lhs = a_inv.mul(&crate::exact::pi_enclosure(64)).mul_pow2(2);
                if lhs.hi_rational() >= eps.rational_lower_bound(1)? {
                    return Err(exhausted(m, format!("2π·A_n^(-1/2) < ε/2 fails for n = {n}")));
                }
                let need = Rational::from_integer(BigInt::from(m + 1)) + ball.center.max_abs_value();
                if a_inv.recip().map(|s| s.lo_rational() <= need).unwrap_or(true) {
                    return Err(exhausted(m, format!("A_n^(1/2) − max|b| > m + 1 fails for n = {n}")));
                }
                dyadic_floor(&a_inv.lo_rational(), 60)
            }
            AmplitudePolicy::Damped => {
                let cap = a_inv.lo_rational();
                let mut t = 0i64;
                loop {
                    let c = pow2(-t);
                    if c <= cap && Radius::pi_root(&c * int(4)).cmp_p(eps, 1)? == Ordering::Less {
                        break c;
                    }
                    t += 1;
                    if t > 4096 {
                        return Err(exhausted(m, "no admissible amplitude"));
                    }
                }
            }
        };
        // ‖c·(s − f)(q·)‖₁ = c·∫|s − f| over one period
        let budget_r = eps.rational_lower_bound(1)? / (&c * int(4));
        let budget = to_f64(&budget_r).next_down();
        let target = budget * to_f64(&policy.target_fraction);
        let qn = usize::try_from(q).ok().filter(|&v| v <= policy.max_cells);
        let max_base = qn.map(|v| policy.max_cells / v).unwrap_or(0);
        if max_base == 0 {
            return Err(exhausted(m, format!("q = {q} exceeds the cell budget {}", policy.max_cells)));
        }
        let disc = discretize_block(poly, target, max_base)?;
        if disc.error >= budget {
            return Err(exhausted(
                m,
                format!("cell budget: error {:.3e} ≥ {:.3e} with {} base cells", disc.error, budget, disc.base.num_cells()),
            ));
        }
        let pattern = disc.base.map_values(|v| &c * (v - rat(1, 2)));
        let block = pattern.dilate(q as u64);
        let block_mean = pattern.mean();
        let center = pointwise_add(&ball.center, &block).simplify();
        let l_max = Rational::from_integer(BigInt::from(q) * BigInt::from(poly.max_freq()));
        let half_m = Rational::new(BigInt::from(m + 1), BigInt::from(2));
        let beta = largest_pow2_below(&l_max, &half_m);
        let persistence = &l_max * &beta < half_m;
        let eps_next = eps.scale(&rat(1, 4)).min_p(&Radius::rational(beta.clone()), 1)?;
        // ‖block‖₁ + ε_{m+1} < ε_m
        let shift = lp_norm_pow(&pattern, 1);
        let room = eps.sub(&eps_next);
        let containment = sign_pi_affine(&room.rational, &room.pi_root, &shift, 1)? == Ordering::Greater;
        let flags = exceptional_flags(&cache, &sched, k, policy.grid)?;
        let g = policy.grid as u128;
        let hits = (0..g).filter(|&i| flags[((i * (q % g)) % g) as usize]).count();
        let state = GameRoundState {
            m,
            eps_m: eps.clone(),
            alpha_param: k,
            n,
            q: q.to_string(),
            amplitude: c.clone(),
            beta_param: beta,
            eps_next: eps_next.clone(),
            base_cells: disc.base.num_cells(),
            total_cells: center.num_cells(),
            discretization_error: disc.error * to_f64(&c),
            discretization_budget: to_f64(&eps.rational_lower_bound(1)?) / 4.0,
            containment_certified: containment,
            persistence_certified: persistence,
            block_mean,
            exceedance_fraction: hits as f64 / policy.grid as f64,
        };
        let ball = RationalBall::with_radius(center, eps_next, 1)?;
        Ok(crate::baire::StrategyMove { ball, annotation: Some(serde_json::to_value(&state).expect("serializable")) })
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinalRow {
    pub x_over_pi: String,
    pub lo: f64,
    pub hi: f64,
    /// Witnessing j (1-based) of the round-0 block.
    pub j: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DemoReport {
    pub alpha: String,
    pub rounds: Vec<GameRoundState>,
    pub radii: Vec<Radius>,
    pub containment_certified: bool,
    pub fractions_non_decreasing: bool,
    /// Orders q_0·m_j of the round-0 block at which the final approximant is certified.
    pub orders: Vec<String>,
    /// Σ ‖α-move centre − previous centre‖₁ / π over rounds ≥ 1.
    #[serde(with = "crate::exact::rational")]
    pub drift_pi: Rational,
    pub grid: usize,
    pub final_rows: Vec<FinalRow>,
    /// Fraction of grid points with certified max_j S > threshold.
    #[serde(with = "crate::exact::rational")]
    pub threshold: Rational,
    pub fraction_above_threshold: f64,
    /// Fraction with certified max_j S > 1/2 (the round-0 persistence level).
    pub persistence_fraction: f64,
    pub max_partial_sum_lower: f64,
    pub consistency_pairs: usize,
    pub scheme_consistent: bool,
}

/// Plays `rounds` rounds of α against the divergence strategy and certifies
/// the final approximant's partial sums at the round-0 block orders.
pub fn divergence_demo(
    alpha: &IndexedStrategy,
    rounds: usize,
    sched: Arc<DivergenceSchedule>,
    b0: &RationalBall,
    policy: ApproxPolicy,
    threshold: Rational,
) -> Result<(DemoReport, GameTranscript)> {
    if rounds < 2 {
        return Err(Error::InvalidInput("need at least 2 rounds".into()));
    }
    let g = divergence_strategy(sched.clone(), policy.clone());
    let t = run_game(alpha, &g, b0, rounds)?;
    let states: Vec<GameRoundState> = t
        .rounds
        .iter()
        .map(|r| serde_json::from_value(r.beta_note.clone().expect("annotated")).expect("round state"))
        .collect();
    let containment = t.rounds.iter().all(|r| r.alpha_contained && r.beta_contained) && states.iter().all(|s| s.containment_certified);
    let fractions_non_decreasing = states.windows(2).all(|w| w[1].exceedance_fraction >= w[0].exceedance_fraction - 0.05);

    // S_L(ψ_M) = S_L(ψ_1) + Σ_{k≥1} mean(block_k) + S_L(drift)
    let psi1 = &t.rounds[0].beta_move.center;
    let q0 = sched.q[0];
    let orders: Vec<u128> = sched.polys[0].freqs.iter().map(|m| q0 * m).collect();
    let lmax = usize::try_from(*orders.last().unwrap())
        .ok()
        .filter(|&l| l <= 1 << 16)
        .ok_or_else(|| Error::InvalidInput("round-0 orders too large to certify".into()))?;
    let mut shift = Rational::zero();
    for s in &states[1..] {
        shift += &s.block_mean;
    }
    let mut drift_pi = Rational::zero();
    for i in 1..t.rounds.len() {
        let (a, prev) = (&t.rounds[i].alpha_move.center, &t.rounds[i - 1].beta_move.center);
        if a != prev {
            drift_pi += lp_distance_pow(a, prev, 1);
        }
    }
    let (a0, a, b) = step_coeffs_fast(psi1, lmax);
    let ord_usize: Vec<usize> = orders.iter().map(|&o| o as usize).collect();
    let sums = grid_partial_sums_fast(a0, &a, &b, &ord_usize, policy.grid);
    let shift_fi = Fi::from_rational(&shift);
    let drift_fi = Fi::from_rational(&drift_pi);
    let thr = to_f64(&threshold);
    let mut final_rows = Vec::with_capacity(policy.grid);
    let (mut above, mut persist, mut best) = (0usize, 0usize, f64::NEG_INFINITY);
    for (k, row) in sums.iter().enumerate() {
        let mut pick = (0usize, Fi::point(f64::NEG_INFINITY));
        for (j, s) in row.iter().enumerate() {
            let bound = drift_fi.mul(Fi::point(ord_usize[j] as f64 + 0.5));
            let v = s.add(shift_fi).add(Fi::new(-bound.hi, bound.hi));
            if v.lo > pick.1.lo {
                pick = (j + 1, v);
            }
        }
        let v = pick.1;
        if v.lo > thr && Fi::from_rational(&threshold).hi < v.lo {
            above += 1;
        }
        if v.lo > 0.5 {
            persist += 1;
        }
        best = best.max(v.lo);
        final_rows.push(FinalRow { x_over_pi: format_rational(&grid_point(k, policy.grid)), lo: v.lo, hi: v.hi, j: pick.0 });
    }

    let scheme = transcript_scheme(&t);
    let mut n_max = 0u32;
    while result_round_index(&b0.radius, 1, n_max + 1)? < rounds as u64 {
        n_max += 1;
    }
    let mut pairs = 0;
    let mut consistent = true;
    for n in 0..=n_max {
        for n2 in n + 1..=n_max {
            consistent &= scheme.consistent(n, n2)?;
            pairs += 1;
        }
    }
    let report = DemoReport {
        alpha: alpha.name.clone(),
        rounds: states,
        radii: t.radii.clone(),
        containment_certified: containment,
        fractions_non_decreasing,
        orders: orders.iter().map(|o| o.to_string()).collect(),
        drift_pi,
        grid: policy.grid,
        final_rows,
        threshold,
        fraction_above_threshold: above as f64 / policy.grid as f64,
        persistence_fraction: persist as f64 / policy.grid as f64,
        max_partial_sum_lower: best,
        consistency_pairs: pairs,
        scheme_consistent: consistent,
    };
    Ok((report, t))
}

pub fn parse_schedule_blocks(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|x| x.trim().parse::<u32>().map_err(|e| Error::InvalidInput(format!("bad block {x:?}: {e}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baire::identity_strategy;

    fn a() -> Rational {
        rat(11, 40)
    }

    #[test]
    fn separated_schedule() {
        let s = DivergenceSchedule::from_blocks(&[2, 2, 2, 2], a()).unwrap();
        assert_eq!(s.q, vec![1, 38, 1407, 52060]);
        assert!(s.check_invariants().is_empty());
        let d = DivergenceSchedule::default_capped(256, a()).unwrap();
        assert_eq!(d.blocks, vec![2, 4, 16]);
        assert!(d.truncated.is_some());
        assert_eq!(parse_schedule_blocks("2, 4,16").unwrap(), vec![2, 4, 16]);
        assert!(parse_schedule_blocks("2,x").is_err());
    }

    #[test]
    fn discretization_error_is_certified() {
        let p = build_poly(2).unwrap();
        let d = discretize_block(&p, 0.05, 1 << 14).unwrap();
        assert!(d.error < 0.05);
        // f64 midpoint check of ∫|f − s| on a fine grid
        let ev = Evaluator::new(&p);
        let n = 20000;
        let mut acc = 0.0;
        for k in 0..n {
            let u = Rational::new(BigInt::from(2 * k + 1), BigInt::from(n));
            let s = to_f64(d.base.value_at(&u));
            acc += (ev.value(&u).mid() - s).abs() * 2.0 * std::f64::consts::PI / n as f64;
        }
        assert!(acc <= d.error * 1.01 + 1e-3, "{acc} vs {}", d.error);
    }

    #[test]
    fn first_round_contains_and_literal_policy_refuses() {
        let s = Arc::new(DivergenceSchedule::from_blocks(&[2, 2], a()).unwrap());
        let b = RationalBall::new(RationalStepFunction::zero(), int(1), 1).unwrap();
        let damped = divergence_strategy(s.clone(), ApproxPolicy::default());
        let mv = damped.apply_annotated(&b, 0).unwrap();
        assert!(crate::lp::ball_subset(&mv.ball, &b).unwrap());
        let literal = divergence_strategy(s.clone(), ApproxPolicy { amplitude: AmplitudePolicy::Literal, ..ApproxPolicy::default() });
        assert!(matches!(literal.apply(&b, 0), Err(Error::ScheduleExhausted { .. })));
        assert!(matches!(damped.apply(&b, 5), Err(Error::ScheduleExhausted { .. })));
    }

    #[test]
    fn two_round_demo() {
        let s = Arc::new(DivergenceSchedule::from_blocks(&[2, 2], a()).unwrap());
        let b = RationalBall::new(RationalStepFunction::zero(), int(1), 1).unwrap();
        let policy = ApproxPolicy { grid: 256, ..ApproxPolicy::default() };
        let (r, t) = divergence_demo(&identity_strategy(), 2, s, &b, policy, int(2)).unwrap();
        assert!(t.verify().unwrap());
        assert!(r.containment_certified && r.scheme_consistent);
        assert_eq!(r.rounds.len(), 2);
        assert!(r.max_partial_sum_lower > 0.0);
    }
}
