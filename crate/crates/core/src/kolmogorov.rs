//! Kolmogorov's family of positive trigonometric polynomials
//! f_n(x) = (1/n) Σ K_{m_i}(x − a_i), their partial sums at the orders m_j,
//! and grid measurements of the sets where those partial sums are large.
//!
//! Points are π-coefficients: x = u·π with u rational.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::rational::{dyadic_ceil, int, rat, rem_euclid, Rational};
use crate::exact::transcendental::{cos_pi, ln_enclosure, pi_enclosure, sin_pi};
use crate::exact::fint::{pi_fi, sin_cos_pi_scaled};
use crate::exact::{Fi, IntervalReal};

const TRIG_BITS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KolmogorovPoly {
    pub n: u32,
    /// a_j / π = 4j/(2n+1), j = 1..n.
    #[serde(rename = "nodes_pi", with = "crate::exact::rational::vec")]
    pub nodes: Vec<Rational>,
    pub freqs: Vec<u128>,
    /// Half-width of the guard intervals around each node, in radians.
    #[serde(with = "crate::exact::rational")]
    pub guard_halfwidth: Rational,
}

/// m₁ = n⁴, then each m_{j+1} is the least m > 2m_j with 2m + 1 ≡ 0 (mod 2n + 1).
pub fn build_poly(n: u32) -> Result<KolmogorovPoly> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("n must be ≥ 2, got {n}")));
    }
    let modulus = 2 * n as u128 + 1;
    let overflow = || Error::InvalidInput(format!("frequencies overflow for n = {n}"));
    let mut freqs = vec![(n as u128).pow(4)];
    while freqs.len() < n as usize {
        let prev = *freqs.last().unwrap();
        // keep 4m within u128 for the evaluator's argument scaling
        let mut m = prev.checked_mul(2).and_then(|v| v.checked_add(1)).filter(|&v| v < u128::MAX / 8).ok_or_else(overflow)?;
        while (2 * m + 1) % modulus != 0 {
            m += 1;
        }
        freqs.push(m);
    }
    let nodes = (1..=n as i64).map(|j| rat(4 * j, 2 * n as i64 + 1)).collect();
    Ok(KolmogorovPoly { n, nodes, freqs, guard_halfwidth: rat(1, (n as i64).pow(2)) })
}

impl KolmogorovPoly {
    /// Checks the three defining constraints exactly.
    pub fn check_constraints(&self) -> std::result::Result<(), String> {
        let n = self.n as u128;
        if self.freqs.len() != self.n as usize || self.freqs[0] != n.pow(4) {
            return Err("m₁ must equal n⁴".into());
        }
        for w in self.freqs.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= 2 * a {
                return Err(format!("{b} ≤ 2·{a}"));
            }
            if (2 * b + 1) % (2 * n + 1) != 0 {
                return Err(format!("2·{b}+1 not divisible by {}", 2 * n + 1));
            }
            if (2 * a + 1..b).any(|m| (2 * m + 1) % (2 * n + 1) == 0) {
                return Err(format!("{b} is not minimal"));
            }
        }
        Ok(())
    }

    pub fn max_freq(&self) -> u128 {
        *self.freqs.last().unwrap()
    }

    fn freq_rat(&self, j: usize) -> Rational {
        Rational::from_integer(BigInt::from(self.freqs[j]))
    }

    /// True when x lies within the guard half-width of some node (circular distance).
    pub fn in_guard(&self, u: &Rational) -> bool {
        let pi = pi_enclosure(64);
        // inside iff dist·π < g; use π's upper bound so borderline points count as inside
        let limit = &self.guard_halfwidth / pi.lo_rational();
        self.nodes.iter().any(|a| {
            let d = rem_euclid(&(u - a), &int(2));
            let d = if d > int(1) { int(2) - d } else { d };
            d <= limit
        })
    }
}

/// Precomputed coefficient tables for O(n²) double-interval arithmetic per point.
pub struct Evaluator<'a> {
    pub poly: &'a KolmogorovPoly,
    inv_n: Fi,
    m1: Vec<Fi>,
    /// (m_j + 1)/(m_i + 1) and (m_i − m_j)/(m_i + 1), indexed [i·n + j] for i > j.
    r_fejer: Vec<Fi>,
    r_dir: Vec<Fi>,
    /// 2m_j + 1 divisible by 2n + 1
    modular: Vec<bool>,
    peak_k: Vec<Fi>,
    peak_d: Vec<Fi>,
}

/// Trigonometric data at one point.
struct PointTrig {
    sin_th: Vec<Fi>,
    cos_th: Vec<Fi>,
    at_node: Vec<bool>,
    // (cos, sin) of (m_j + ½)x for modular j
    cs_j: Vec<Option<(Fi, Fi)>>,
    // (cos, sin) of (2m_j + 1)θ_i for the remaining j, indexed [i·n + j]
    cs_ij: Vec<Option<(Fi, Fi)>>,
}

/// Per-point kernel-sum decomposition for every j.
#[derive(Debug, Clone)]
pub struct PointSums {
    /// S_{m_j}(f_n, x)
    pub sums: Vec<Fi>,
    /// First two decomposition terms (the Fejér parts).
    pub fejer_part: Vec<Fi>,
    /// f_n(x)
    pub value: Fi,
}

impl<'a> Evaluator<'a> {
    pub fn new(poly: &'a KolmogorovPoly) -> Self {
        let n = poly.n as usize;
        let m1: Vec<Fi> = (0..n).map(|j| Fi::from_rational(&(poly.freq_rat(j) + int(1)))).collect();
        let mut r_fejer = vec![Fi::ZERO; n * n];
        let mut r_dir = vec![Fi::ZERO; n * n];
        for i in 0..n {
            for j in 0..i {
                let mi1 = poly.freq_rat(i) + int(1);
                r_fejer[i * n + j] = Fi::from_rational(&((poly.freq_rat(j) + int(1)) / &mi1));
                r_dir[i * n + j] = Fi::from_rational(&((poly.freq_rat(i) - poly.freq_rat(j)) / &mi1));
            }
        }
        let modulus = 2 * poly.n as u128 + 1;
        let modular = poly.freqs.iter().map(|m| (2 * m + 1) % modulus == 0).collect();
        let peak_k = (0..n).map(|j| Fi::from_rational(&((poly.freq_rat(j) + int(1)) / int(2)))).collect();
        let peak_d = (0..n).map(|j| Fi::from_rational(&(poly.freq_rat(j) + rat(1, 2)))).collect();
        Evaluator { poly, inv_n: Fi::from_rational(&rat(1, n as i64)), m1, r_fejer, r_dir, modular, peak_k, peak_d }
    }

    fn trig(&self, u: &Rational, full: bool) -> PointTrig {
        let p = self.poly;
        let n = p.n as usize;
        let m = BigInt::from(2 * p.n + 1);
        // θ_i = π·(u − a_i)/2 = π·num_i/den with den = 2·den(u)·(2n + 1)
        let den = BigInt::from(2) * u.denom() * &m;
        let mut sin_th = Vec::with_capacity(n);
        let mut cos_th = Vec::with_capacity(n);
        let mut at_node = Vec::with_capacity(n);
        let mut nums = Vec::with_capacity(n);
        for i in 1..=n {
            let num = u.numer() * &m - BigInt::from(4 * i as i64) * u.denom();
            at_node.push((&num % &den).is_zero());
            let (s, c) = trig_at(1, &num, &den);
            sin_th.push(s);
            cos_th.push(c);
            nums.push(num);
        }
        let mut cs_j = vec![None; n];
        let mut cs_ij = vec![None; n * n];
        let den_u = u.denom() * 2u32;
        for j in 0..n {
            let w = 2 * p.freqs[j] + 1;
            if self.modular[j] {
                let (s, c) = trig_at(w, u.numer(), &den_u);
                cs_j[j] = Some((c, s));
            } else {
                // only pairs i ≥ j are needed, all i when the full value is wanted
                for i in 0..n {
                    if i >= j || full {
                        let (s, c) = trig_at(w, &nums[i], &den);
                        cs_ij[i * n + j] = Some((c, s));
                    }
                }
            }
        }
        PointTrig { sin_th, cos_th, at_node, cs_j, cs_ij }
    }

    fn cs(&self, t: &PointTrig, i: usize, j: usize) -> (Fi, Fi) {
        let n = self.poly.n as usize;
        t.cs_j[j].or(t.cs_ij[i * n + j]).expect("trig data for pair")
    }

    /// (m_j + 1)·K_{m_j}(x − a_i) and D_{m_j}(x − a_i).
    fn pair(&self, t: &PointTrig, i: usize, j: usize) -> (Fi, Fi) {
        if t.at_node[i] {
            return (self.peak_k[j].mul(self.m1[j]), self.peak_d[j]);
        }
        let (c, s) = self.cs(t, i, j);
        let (sn, cn) = (t.sin_th[i], t.cos_th[i]);
        let cos2 = c.mul(cn).sub(s.mul(sn));
        let one_minus = Fi::point(1.0).sub(cos2);
        let den4 = sn.square().scale(4.0);
        let k = one_minus.div(den4);
        let d = s.div(sn.scale(2.0));
        let kb = Fi::new(0.0, self.peak_k[j].mul(self.m1[j]).hi);
        let db = Fi::new(-self.peak_d[j].hi, self.peak_d[j].hi);
        let k = k.map(|v| Fi::new(v.lo.max(0.0), v.hi.min(kb.hi))).unwrap_or(kb);
        (k, d.unwrap_or(db))
    }

    fn fejer(&self, t: &PointTrig, i: usize, j: usize) -> Fi {
        let (k, _) = self.pair(t, i, j);
        k.div(self.m1[j]).expect("m + 1 > 0")
    }

    /// f_n(x).
    pub fn value(&self, u: &Rational) -> Fi {
        let t = self.trig(u, true);
        self.value_from(&t)
    }

    fn value_from(&self, t: &PointTrig) -> Fi {
        let n = self.poly.n as usize;
        (0..n).fold(Fi::ZERO, |acc, i| acc.add(self.fejer(t, i, i))).mul(self.inv_n)
    }

    /// Partial sums S_{m_j}(f_n, x) for every j via the three-term decomposition.
    pub fn sums(&self, u: &Rational) -> PointSums {
        let n = self.poly.n as usize;
        let t = self.trig(u, false);
        let diag: Vec<Fi> = (0..n).map(|i| self.fejer(&t, i, i)).collect();
        let mut prefix = Vec::with_capacity(n);
        let mut acc = Fi::ZERO;
        for d in &diag {
            acc = acc.add(*d);
            prefix.push(acc);
        }
        let mut sums = Vec::with_capacity(n);
        let mut fejer_part = Vec::with_capacity(n);
        for j in 0..n {
            let mut t2 = Fi::ZERO;
            let mut t3 = Fi::ZERO;
            for i in j + 1..n {
                let (k, d) = self.pair(&t, i, j);
                // (m_j+1)/(m_i+1)·K_{m_j} = (m_j+1)K_{m_j}/(m_i+1)
                t2 = t2.add(k.div(self.m1[i]).expect("positive"));
                t3 = t3.add(self.r_dir[i * n + j].mul(d));
            }
            let f = prefix[j].add(t2).mul(self.inv_n);
            fejer_part.push(f);
            sums.push(f.add(t3.mul(self.inv_n)));
        }
        let value = prefix[n - 1].mul(self.inv_n);
        PointSums { sums, fejer_part, value }
    }

    /// Ratio table entry, exposed for tests of the decomposition.
    pub fn fejer_ratio(&self, i: usize, j: usize) -> Fi {
        self.r_fejer[i * self.poly.n as usize + j]
    }
}

impl Evaluator<'_> {
    /// Enclosure of the range of f_n over u ∈ [lo, hi] (π-coefficients).
    pub fn range(&self, lo: &Rational, hi: &Rational) -> Fi {
        let p = self.poly;
        let n = p.n as usize;
        let mut acc = Fi::ZERO;
        for i in 0..n {
            // θ = π·v with v = (u − a_i)/2
            let v0 = (lo - &p.nodes[i]) / int(2);
            let v1 = (hi - &p.nodes[i]) / int(2);
            let cap = self.peak_k[i].hi;
            if v1.floor() >= v0.ceil() || &v1 - &v0 >= int(1) {
                acc = acc.add(Fi::new(0.0, cap));
                continue;
            }
            let w = Rational::from_integer(BigInt::from(p.freqs[i] + 1));
            let num = sin_range(&(&w * &v0), &(&w * &v1)).square();
            let d0 = rat_trig(&v0).0.abs();
            let d1 = rat_trig(&v1).0.abs();
            let den_lo = d0.lo.min(d1.lo);
            let den = Fi::new(den_lo, 1.0).square().scale(2.0).mul(self.m1[i]);
            let k = num.div(den).map(|k| Fi::new(k.lo.max(0.0), k.hi.min(cap))).unwrap_or(Fi::new(0.0, cap));
            acc = acc.add(k);
        }
        acc.mul(self.inv_n)
    }
}

impl Evaluator<'_> {
    /// ∫ f_n(y) dy over y ∈ [lo·π, hi·π], from the coefficient form; None when
    /// the total degree exceeds `max_degree`.
    pub fn integral(&self, lo: &Rational, hi: &Rational, max_degree: u128) -> Option<Fi> {
        let p = self.poly;
        if p.freqs.iter().sum::<u128>() > max_degree {
            return None;
        }
        let pi = pi_fi();
        let mut acc = Fi::ZERO;
        for (i, a) in p.nodes.iter().enumerate() {
            let m = p.freqs[i];
            let (t0, t1) = (lo - a, hi - a);
            let mut s = pi.mul(Fi::from_rational(&(hi - lo))).scale(0.5);
            for nu in 1..=m {
                let w = Fi::from_rational(&Rational::new(BigInt::from(m + 1 - nu), BigInt::from((m + 1) * nu)));
                let (s1, _) = trig_at(nu, t1.numer(), t1.denom());
                let (s0, _) = trig_at(nu, t0.numer(), t0.denom());
                s = s.add(w.mul(s1.sub(s0)));
            }
            acc = acc.add(s);
        }
        Some(acc.mul(self.inv_n))
    }
}

fn rat_trig(t: &Rational) -> (Fi, Fi) {
    trig_at(1, t.numer(), t.denom())
}

/// Enclosure of {sin πt : t ∈ [a, b]}.
pub fn sin_range(a: &Rational, b: &Rational) -> Fi {
    if b - a >= int(2) {
        return Fi::new(-1.0, 1.0);
    }
    let (sa, _) = rat_trig(a);
    let (sb, _) = rat_trig(b);
    let mut r = sa.hull(sb);
    // critical points t = k + ½: maxima at even k, minima at odd k
    let half = rat(1, 2);
    let k0 = (a - &half).ceil().to_integer();
    let k1 = (b - &half).floor().to_integer();
    let mut k = k0;
    while k <= k1 {
        if k.is_even() {
            r = r.hull(Fi::point(1.0));
        } else {
            r = r.hull(Fi::point(-1.0));
        }
        k += 1;
    }
    Fi::new(r.lo.max(-1.0), r.hi.min(1.0))
}

/// (sin πt, cos πt) for t = w·num/den.
fn trig_at(w: u128, num: &BigInt, den: &BigInt) -> (Fi, Fi) {
    if let (Some(a), Some(d)) = (num.to_i128(), den.to_u64()) {
        if d < 1 << 59 {
            return sin_cos_pi_scaled(w, a, d);
        }
    }
    let t = Rational::new(BigInt::from(w) * num, den.clone());
    (Fi::from_interval(&sin_pi(&t, TRIG_BITS)), Fi::from_interval(&cos_pi(&t, TRIG_BITS)))
}

pub fn eval_poly(p: &KolmogorovPoly, u: &Rational) -> IntervalReal {
    Evaluator::new(p).value(u).to_interval(TRIG_BITS)
}

/// S_{m_j}(f_n, x), j in 1..=n.
pub fn partial_sum_at_mj(p: &KolmogorovPoly, j: usize, u: &Rational) -> Result<IntervalReal> {
    if j == 0 || j > p.n as usize {
        return Err(Error::InvalidInput(format!("j must be in 1..={}, got {j}", p.n)));
    }
    Ok(Evaluator::new(p).sums(u).sums[j - 1].to_interval(TRIG_BITS))
}

/// (log n)^{1/2} − A.
pub fn threshold(n: u32, a: &IntervalReal) -> Result<IntervalReal> {
    Ok(ln_enclosure(&int(n as i64), 96)?.sqrt().sub(a))
}

pub fn grid_point(k: usize, g: usize) -> Rational {
    rat(2 * k as i64, g as i64)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExceedanceRow {
    pub x_over_pi: String,
    /// Enclosure of max_j |S_{m_j}(f_n, x)| at the witnessing j.
    pub max_abs_lo: f64,
    pub max_abs_hi: f64,
    pub j: usize,
    pub exceptional: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyticTerms {
    pub inv_sqrt_log_n: f64,
    pub inv_n: f64,
    pub inv_sqrt_n: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub n: u32,
    pub a_used: IntervalReal,
    pub threshold: IntervalReal,
    pub grid_size: usize,
    pub rows: Vec<ExceedanceRow>,
    pub exceptional: usize,
    pub fraction: f64,
    pub analytic: AnalyticTerms,
}

/// Marks grid points where some certified |S_{m_j}(f_n, x)| exceeds (log n)^{1/2} − A.
pub fn measure_exceptional_set(p: &KolmogorovPoly, a: &IntervalReal, grid_size: usize) -> Result<DivergenceReport> {
    if grid_size < 256 {
        return Err(Error::InvalidInput(format!("grid size must be ≥ 256, got {grid_size}")));
    }
    let thr = threshold(p.n, a)?;
    let thr_hi = thr.hi_f64().next_up();
    let ev = Evaluator::new(p);
    let rows: Vec<ExceedanceRow> = crate::par::map_range(grid_size, |k| {
        let u = grid_point(k, grid_size);
        let s = ev.sums(&u);
        let (j, best) = s
            .sums
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.mag_lower().total_cmp(&b.1.mag_lower()))
            .map(|(j, v)| (j + 1, *v))
            .unwrap();
        let lo = best.mag_lower();
        ExceedanceRow {
            x_over_pi: crate::exact::format_rational(&u),
            max_abs_lo: lo,
            max_abs_hi: best.mag_upper(),
            j,
            exceptional: lo > thr_hi,
        }
    });
    let exceptional = rows.iter().filter(|r| r.exceptional).count();
    let nf = p.n as f64;
    Ok(DivergenceReport {
        n: p.n,
        a_used: a.clone(),
        threshold: thr,
        grid_size,
        fraction: exceptional as f64 / grid_size as f64,
        exceptional,
        rows,
        analytic: AnalyticTerms { inv_sqrt_log_n: 1.0 / nf.ln().sqrt(), inv_n: 1.0 / nf, inv_sqrt_n: 1.0 / nf.sqrt() },
    })
}

/// Largest certified value of the Fejér part of the decomposition over grid
/// points (optionally skipping guard intervals), for every n listed.
pub fn fejer_part_max(n_list: &[u32], grid_size: usize, include_guards: bool) -> Result<f64> {
    let mut best = 0.0f64;
    for &n in n_list {
        let p = build_poly(n)?;
        let ev = Evaluator::new(&p);
        let maxes = crate::par::map_range(grid_size, |k| {
            let u = grid_point(k, grid_size);
            if !include_guards && p.in_guard(&u) {
                return 0.0;
            }
            ev.sums(&u).fejer_part.iter().map(|f| f.mag_upper()).fold(0.0, f64::max)
        });
        best = maxes.into_iter().fold(best, f64::max);
    }
    Ok(best)
}

impl Evaluator<'_> {
    /// Upper bound of the Fejér part for every j with sin²((m+1)θ) replaced by 1.
    /// The bound varies on the scale of θ rather than 1/m, so sampling it is stable.
    pub fn fejer_envelope(&self, u: &Rational) -> f64 {
        let t = self.trig(u, false);
        let n = self.poly.n as usize;
        // 1/(2 sin²θ_i)
        let inv: Vec<Fi> = t
            .sin_th
            .iter()
            .map(|s| Fi::point(1.0).div(s.square().scale(2.0)).unwrap_or(Fi::point(f64::INFINITY)))
            .collect();
        let mut best = 0.0f64;
        let mut prefix = Fi::ZERO;
        for j in 0..n {
            // K_{m_j}(x − a_j) ≤ min((m_j+1)/2, 1/(2(m_j+1) sin²θ_j))
            let kj = inv[j].div(self.m1[j]).expect("positive");
            prefix = prefix.add(Fi::new(0.0, kj.hi.min(self.peak_k[j].hi)));
            let mut tail = Fi::ZERO;
            let cap = self.peak_k[j].mul(self.m1[j]);
            for i in j + 1..n {
                let v = Fi::new(0.0, inv[i].hi.min(cap.hi));
                tail = tail.add(v.div(self.m1[i]).expect("positive"));
            }
            best = best.max(prefix.add(tail).mul(self.inv_n).hi);
        }
        best
    }
}

/// Points just outside each guard interval, as dyadic π-coefficients.
pub fn guard_edges(p: &KolmogorovPoly) -> Vec<Rational> {
    let pi = pi_enclosure(64);
    let g = dyadic_ceil(&(&p.guard_halfwidth / pi.lo_rational()), 40) + rat(1, 1 << 40);
    p.nodes.iter().flat_map(|a| [a - &g, a + &g]).collect()
}

/// Sup of the envelope over grid points outside the guards and the guard edges.
pub fn fejer_envelope_max(n_list: &[u32], grid_size: usize, include_guards: bool) -> Result<f64> {
    let mut best = 0.0f64;
    for &n in n_list {
        let p = build_poly(n)?;
        let ev = Evaluator::new(&p);
        let mut pts: Vec<Rational> = (0..grid_size)
            .map(|k| grid_point(k, grid_size))
            .filter(|u| include_guards || !p.in_guard(u))
            .collect();
        pts.extend(guard_edges(&p));
        let v = crate::par::map_slice(&pts, |u| ev.fejer_envelope(u));
        best = v.into_iter().fold(best, f64::max);
    }
    Ok(best)
}

/// The constant A: 10% above the sup of the Fejér part outside the guards,
/// rounded up to a multiple of 2^-16.
pub fn estimate_a(n_list: &[u32], grid_size: usize) -> Result<Rational> {
    estimate_a_with(n_list, grid_size, false)
}

pub fn estimate_a_with(n_list: &[u32], grid_size: usize, include_guards: bool) -> Result<Rational> {
    let m = fejer_envelope_max(n_list, grid_size, include_guards)?;
    let r = Rational::from_float(m * 1.1).ok_or_else(|| Error::InvalidInput("non-finite estimate".into()))?;
    Ok(dyadic_ceil(&r, 16))
}

/// Exact modular property used by the Dirichlet terms.
pub fn modular_property(p: &KolmogorovPoly, j: usize) -> bool {
    (2 * p.freqs[j] + 1) % (2 * p.n as u128 + 1) == 0
}
