//! Fourier coefficients and partial sums of step functions, Dirichlet and
//! Fejér kernels, and the partial-sum perturbation bound.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::interval::{refine, IntervalReal};
use crate::exact::rational::{int, rat, Rational};
use crate::exact::fint::{pi_fi, sin_cos_pi_scaled};
use crate::exact::transcendental::{cos_pi, pi_enclosure, sin_pi};
use crate::exact::Fi;
use crate::step::{lp_norm_pow, pointwise_sub, RationalStepFunction};

/// a_n = (1/π)∫ f cos nt, b_n = (1/π)∫ f sin nt, n ≤ order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FourierCoeffs {
    pub a0: IntervalReal,
    pub a: Vec<IntervalReal>,
    pub b: Vec<IntervalReal>,
    pub order: usize,
}

fn jumps(f: &RationalStepFunction) -> Vec<(Rational, Rational)> {
    // (c_j, v_j − v_{j−1}) at interior breakpoints
    let bp = f.breakpoints();
    let vs = f.values();
    (1..vs.len()).map(|j| (bp[j].clone(), &vs[j] - &vs[j - 1])).collect()
}

fn coeffs_at(f: &RationalStepFunction, order: usize, bits: u32) -> FourierCoeffs {
    let js = jumps(f);
    let vs = f.values();
    let ends = &vs[0] - vs.last().unwrap();
    let inv_pi = pi_enclosure(bits + 8).recip().expect("π is positive");
    let a0 = IntervalReal::from_rational(&(f.mean() * int(2)), bits);
    let mut a = Vec::with_capacity(order);
    let mut b = Vec::with_capacity(order);
    for n in 1..=order {
        let nr = int(n as i64);
        let mut sa = IntervalReal::zero(bits);
        let mut sb = IntervalReal::from_rational(&ends, bits);
        for (c, jmp) in &js {
            let arg = c * &nr;
            sa = sa.sub(&sin_pi(&arg, bits).mul_rational(jmp));
            sb = sb.add(&cos_pi(&arg, bits).mul_rational(jmp));
        }
        let scale = inv_pi.mul_rational(&Rational::new(BigInt::one(), BigInt::from(n)));
        a.push(sa.mul(&scale));
        b.push(sb.mul(&scale));
    }
    FourierCoeffs { a0, a, b, order }
}

impl FourierCoeffs {
    pub fn max_width(&self) -> f64 {
        std::iter::once(&self.a0).chain(&self.a).chain(&self.b).map(|x| x.width_f64()).fold(0.0, f64::max)
    }
}

/// Closed-form coefficients up to `order`, every width ≤ tol.
pub fn step_fourier_coeffs(f: &RationalStepFunction, order: usize, tol: f64, cap: u32) -> Result<FourierCoeffs> {
    refine(cap, |bits| Ok(coeffs_at(f, order, bits)), |c| c.max_width() <= tol)
}

/// S_l(x) = a₀/2 + Σ_{n≤l} a_n cos nx + b_n sin nx at x = u·π.
pub fn partial_sum(c: &FourierCoeffs, l: usize, u: &Rational) -> Result<IntervalReal> {
    if l > c.order {
        return Err(Error::InvalidInput(format!("order {l} exceeds computed {}", c.order)));
    }
    let bits = c.a0.bits;
    let mut s = c.a0.mul_pow2(-1);
    for n in 1..=l {
        let arg = u * int(n as i64);
        s = s.add(&c.a[n - 1].mul(&cos_pi(&arg, bits))).add(&c.b[n - 1].mul(&sin_pi(&arg, bits)));
    }
    Ok(s)
}

/// Partial sum of a step function at one point, target width `tol`.
pub fn partial_sum_step(f: &RationalStepFunction, l: usize, u: &Rational, tol: f64, cap: u32) -> Result<IntervalReal> {
    refine(
        cap,
        |bits| partial_sum(&coeffs_at(f, l, bits), l, u),
        |s| s.width_f64() <= tol,
    )
}

/// Sine/cosine of 2πr/G for r < G, shared by equispaced grid evaluations.
pub struct GridTrig {
    pub g: usize,
    sin: Vec<IntervalReal>,
    cos: Vec<IntervalReal>,
}

impl GridTrig {
    pub fn new(g: usize, bits: u32) -> Self {
        let gi = g as i64;
        let sin: Vec<_> = (0..g).map(|r| sin_pi(&rat(2 * r as i64, gi), bits)).collect();
        let cos: Vec<_> = (0..g).map(|r| cos_pi(&rat(2 * r as i64, gi), bits)).collect();
        GridTrig { g, sin, cos }
    }

    /// S_l at x_k = 2πk/G for every k.
    pub fn partial_sums(&self, c: &FourierCoeffs, l: usize) -> Vec<IntervalReal> {
        let g = self.g;
        let eval = |k: usize| {
            let mut s = c.a0.mul_pow2(-1);
            for n in 1..=l {
                let r = (n * k) % g;
                s = s.add(&c.a[n - 1].mul(&self.cos[r])).add(&c.b[n - 1].mul(&self.sin[r]));
            }
            s
        };
        crate::par::map_range(g, eval)
    }
}

/// Grid of sample points (π-coefficients): equispaced plus seeded pseudo-random.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    pub equispaced: usize,
    pub random: usize,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { equispaced: 2048, random: 64, seed: 1 }
    }
}

impl GridSpec {
    pub fn random_points(&self) -> Vec<Rational> {
        let mut z = self.seed;
        (0..self.random)
            .map(|_| {
                z = crate::baire::splitmix(z);
                Rational::new(BigInt::from(z >> 33), BigInt::from(1u64 << 30))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    Dirichlet,
    Fejer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub order: BigInt,
}

impl KernelSpec {
    pub fn dirichlet(l: impl Into<BigInt>) -> Self {
        KernelSpec { kind: KernelKind::Dirichlet, order: l.into() }
    }

    pub fn fejer(l: impl Into<BigInt>) -> Self {
        KernelSpec { kind: KernelKind::Fejer, order: l.into() }
    }
}

const GUARD_ORDER: u64 = 4096;

/// Value at t ≡ 0: D_l(0) = l + ½, K_l(0) = (l + 1)/2.
fn kernel_at_zero(k: &KernelSpec) -> Rational {
    let l = Rational::from_integer(k.order.clone());
    match k.kind {
        KernelKind::Dirichlet => l + rat(1, 2),
        KernelKind::Fejer => (l + int(1)) / int(2),
    }
}

/// Coefficient form ½ + Σ w_ν cos νt, O(l).
pub fn kernel_coeff_sum(k: &KernelSpec, u: &Rational, bits: u32) -> Result<IntervalReal> {
    let l = k.order.to_u64().ok_or_else(|| Error::InvalidInput("order too large for coefficient sum".into()))?;
    let mut s = IntervalReal::from_rational(&rat(1, 2), bits);
    for nu in 1..=l {
        let c = cos_pi(&(u * int(nu as i64)), bits);
        s = match k.kind {
            KernelKind::Dirichlet => s.add(&c),
            KernelKind::Fejer => s.add(&c.mul_rational(&(int(1) - rat(nu as i64, 1) / int(l as i64 + 1)))),
        };
    }
    Ok(s)
}

/// Closed form at t = u·π, at working precision `bits`.
pub fn kernel_eval_at(k: &KernelSpec, u: &Rational, bits: u32) -> Result<IntervalReal> {
    let two = int(2);
    if crate::exact::rational::rem_euclid(u, &two).is_zero() {
        return Ok(IntervalReal::from_rational(&kernel_at_zero(k), bits));
    }
    let half_u = u / &two;
    let den = sin_pi(&half_u, bits);
    let small = den.mag_lower() < crate::exact::Dyadic::new(BigInt::one(), -20);
    if small && k.order <= BigInt::from(GUARD_ORDER) {
        return kernel_coeff_sum(k, u, bits);
    }
    let lr = Rational::from_integer(k.order.clone());
    match k.kind {
        KernelKind::Dirichlet => {
            let num = sin_pi(&((&lr + rat(1, 2)) * u), bits);
            Ok(num.div(&den.mul_pow2(1)).unwrap_or_else(|| dirichlet_bound(k, bits)))
        }
        KernelKind::Fejer => {
            let num = sin_pi(&((&lr + int(1)) * &half_u), bits);
            let ratio = num.div(&den.mul_pow2(1));
            Ok(match ratio {
                Some(r) => r.square().mul_rational(&(int(2) / (lr + int(1)))),
                None => fejer_bound(k, bits),
            })
        }
    }
}

fn dirichlet_bound(k: &KernelSpec, bits: u32) -> IntervalReal {
    let m = kernel_at_zero(k);
    IntervalReal::from_rational_bounds(&-m.clone(), &m, bits)
}

fn fejer_bound(k: &KernelSpec, bits: u32) -> IntervalReal {
    IntervalReal::from_rational_bounds(&Rational::zero(), &kernel_at_zero(k), bits)
}

/// Kernel value with width ≤ tol.
pub fn kernel_eval(k: &KernelSpec, u: &Rational, tol: f64, cap: u32) -> Result<IntervalReal> {
    refine(cap, |bits| kernel_eval_at(k, u, bits), |v| v.width_f64() <= tol)
}

/// Outcome of the perturbation check on a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub l: usize,
    /// ε = ‖p − q‖₁ = eps_pi·π.
    #[serde(with = "crate::exact::rational")]
    pub eps_pi: Rational,
    pub bound: IntervalReal,
    pub max_diff_upper: f64,
    pub margin: f64,
    pub points: usize,
    pub holds: bool,
}

/// Certifies max_x |S_l(p, x) − S_l(q, x)| ≤ l·‖p − q‖₁ on the grid.
pub fn partial_sum_perturbation_bound(
    p: &RationalStepFunction,
    q: &RationalStepFunction,
    l: usize,
    grid: &GridSpec,
    trig: Option<&GridTrig>,
) -> Result<PerturbationReport> {
    if l == 0 {
        return Err(Error::InvalidInput("order must be ≥ 1".into()));
    }
    let bits = 64;
    let d = pointwise_sub(p, q);
    let eps_pi = lp_norm_pow(&d, 1);
    let bound = pi_enclosure(bits).mul_rational(&(&eps_pi * int(l as i64)));
    let c = coeffs_at(&d, l, bits);
    let mut sums = match trig {
        Some(t) if t.g == grid.equispaced => t.partial_sums(&c, l),
        _ => {
            let g = grid.equispaced as i64;
            crate::par::map_range(grid.equispaced, |k| partial_sum(&c, l, &rat(2 * k as i64, g)).expect("order in range"))
        }
    };
    for u in grid.random_points() {
        sums.push(partial_sum(&c, l, &u)?);
    }
    let max_upper = sums.iter().map(|s| s.mag_upper()).max().unwrap_or_else(crate::exact::Dyadic::zero);
    let holds = max_upper <= bound.lo;
    let margin = bound.lo.to_f64() - max_upper.to_f64();
    Ok(PerturbationReport {
        l,
        eps_pi,
        bound,
        max_diff_upper: max_upper.to_f64(),
        margin,
        points: sums.len(),
        holds,
    })
}

/// |a_n(p) − a_n(q)|, |b_n(p) − b_n(q)| ≤ (1/π)‖p − q‖₁ for n ≤ order.
pub fn coefficient_perturbation_holds(p: &RationalStepFunction, q: &RationalStepFunction, order: usize) -> bool {
    let d = pointwise_sub(p, q);
    let eps_pi = lp_norm_pow(&d, 1);
    let c = coeffs_at(&d, order, 64);
    c.a.iter().chain(&c.b).all(|x| x.mag_upper().to_rational() <= eps_pi)
        && num_traits::Signed::abs(&(d.mean() * int(2))) <= eps_pi
}

/// Coefficients up to `order` as double intervals: (a₀, [a_n], [b_n]).
pub fn step_coeffs_fast(f: &RationalStepFunction, order: usize) -> (Fi, Vec<Fi>, Vec<Fi>) {
    let js: Vec<(Rational, Fi)> = jumps(f).into_iter().map(|(c, j)| (c, Fi::from_rational(&j))).collect();
    let vs = f.values();
    let ends = Fi::from_rational(&(&vs[0] - vs.last().unwrap()));
    let a0 = Fi::from_rational(&(f.mean() * int(2)));
    let pi = pi_fi();
    let per_n = |n: usize| {
        let mut sa = Fi::ZERO;
        let mut sb = ends;
        for (c, jmp) in &js {
            let (sn, cs) = trig_scaled(n as u128, c);
            sa = sa.sub(sn.mul(*jmp));
            sb = sb.add(cs.mul(*jmp));
        }
        let scale = pi.scale(n as f64);
        (sa.div(scale).expect("positive"), sb.div(scale).expect("positive"))
    };
    let ab: Vec<(Fi, Fi)> = crate::par::map_range(order, |k| per_n(k + 1));
    (a0, ab.iter().map(|x| x.0).collect(), ab.iter().map(|x| x.1).collect())
}

/// (sin, cos) of π·w·c.
fn trig_scaled(w: u128, c: &Rational) -> (Fi, Fi) {
    if let (Some(n), Some(d)) = (c.numer().to_i128(), c.denom().to_u64()) {
        if d < 1 << 59 {
            return sin_cos_pi_scaled(w, n, d);
        }
    }
    let t = c * Rational::from_integer(BigInt::from(w));
    (Fi::from_interval(&sin_pi(&t, 64)), Fi::from_interval(&cos_pi(&t, 64)))
}

/// S_l at x_k = 2πk/G for each requested order, from coefficients of order ≥ max(orders).
/// Returns one row per grid point, one entry per order.
pub fn grid_partial_sums_fast(a0: Fi, a: &[Fi], b: &[Fi], orders: &[usize], g: usize) -> Vec<Vec<Fi>> {
    let lmax = orders.iter().copied().max().unwrap_or(0);
    assert!(lmax <= a.len());
    crate::par::map_range(g, |k| {
        let mut s = a0.scale(0.5);
        let mut out = vec![Fi::ZERO; orders.len()];
        for (oi, &o) in orders.iter().enumerate() {
            if o == 0 {
                out[oi] = s;
            }
        }
        for nu in 1..=lmax {
            let (sn, cs) = sin_cos_pi_scaled(nu as u128, 2 * k as i128, g as u64);
            s = s.add(a[nu - 1].mul(cs)).add(b[nu - 1].mul(sn));
            for (oi, &o) in orders.iter().enumerate() {
                if o == nu {
                    out[oi] = s;
                }
            }
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> RationalStepFunction {
        RationalStepFunction::new(vec![int(0), int(1), int(2)], vec![int(1), int(0)]).unwrap()
    }

    #[test]
    fn square_wave_coefficients() {
        let c = step_fourier_coeffs(&square(), 6, 1e-12, 4096).unwrap();
        assert!(c.a0.contains_rational(&int(1)));
        for n in 1..=6usize {
            assert!(c.a[n - 1].contains_rational(&Rational::zero()));
            let expect = if n % 2 == 1 { 2.0 / (n as f64 * std::f64::consts::PI) } else { 0.0 };
            assert!((c.b[n - 1].mid_f64() - expect).abs() < 1e-12, "b_{n}");
        }
    }

    #[test]
    fn kernels_at_zero_and_closed_form() {
        let d = kernel_eval(&KernelSpec::dirichlet(5), &int(0), 1e-10, 4096).unwrap();
        assert!(d.contains_rational(&rat(11, 2)));
        let f = kernel_eval(&KernelSpec::fejer(5), &int(2), 1e-10, 4096).unwrap();
        assert!(f.contains_rational(&int(3)));
        let u = rat(1, 3);
        let t = std::f64::consts::PI / 3.0;
        let d = kernel_eval(&KernelSpec::dirichlet(7), &u, 1e-12, 4096).unwrap();
        let want = (7.5 * t).sin() / (2.0 * (t / 2.0).sin());
        assert!((d.mid_f64() - want).abs() < 1e-10);
        let s = kernel_coeff_sum(&KernelSpec::fejer(7), &u, 80).unwrap();
        let k = kernel_eval(&KernelSpec::fejer(7), &u, 1e-12, 4096).unwrap();
        assert!(s.intersects(&k));
    }

    #[test]
    fn guard_band_uses_coefficient_sum() {
        let u = rat(1, 1 << 24);
        let k = kernel_eval(&KernelSpec::dirichlet(10), &u, 1e-9, 4096).unwrap();
        assert!((k.mid_f64() - 10.5).abs() < 1e-6);
    }

    #[test]
    fn perturbation_bound_holds() {
        let p = square();
        let q = RationalStepFunction::new(vec![int(0), rat(1, 2), int(2)], vec![rat(1, 3), int(-1)]).unwrap();
        let g = GridSpec { equispaced: 64, random: 8, seed: 3 };
        let r = partial_sum_perturbation_bound(&p, &q, 4, &g, None).unwrap();
        assert!(r.holds && r.margin > 0.0);
        assert_eq!(r.points, 72);
        let t = GridTrig::new(64, 64);
        let r2 = partial_sum_perturbation_bound(&p, &q, 4, &g, Some(&t)).unwrap();
        assert!((r.max_diff_upper - r2.max_diff_upper).abs() < 1e-9);
        assert!(coefficient_perturbation_holds(&p, &q, 8));
    }

    #[test]
    fn fast_path_agrees() {
        let f = RationalStepFunction::new(vec![int(0), rat(1, 3), rat(5, 4), int(2)], vec![int(2), rat(-1, 2), rat(3, 7)]).unwrap();
        let c = step_fourier_coeffs(&f, 12, 1e-12, 4096).unwrap();
        let (a0, a, b) = step_coeffs_fast(&f, 12);
        assert!(a0.intersects(Fi::from_interval(&c.a0)));
        for n in 0..12 {
            assert!(a[n].intersects(Fi::from_interval(&c.a[n])) && b[n].intersects(Fi::from_interval(&c.b[n])));
        }
        let rows = grid_partial_sums_fast(a0, &a, &b, &[0, 5, 12], 16);
        for (k, row) in rows.iter().enumerate() {
            let u = rat(2 * k as i64, 16);
            assert!(row[0].intersects(Fi::from_rational(&f.mean())));
            let s5 = partial_sum(&c, 5, &u).unwrap();
            assert!(row[1].intersects(Fi::from_interval(&s5)));
            assert!(row[2].intersects(Fi::from_interval(&partial_sum(&c, 12, &u).unwrap())));
        }
    }
}
