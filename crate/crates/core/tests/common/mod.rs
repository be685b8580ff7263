#![allow(dead_code)]

use std::f64::consts::PI;

use baire_core::exact::{int, rat, Rational};
use baire_core::exact::cos_pi;
use baire_core::lp::{ApproximationScheme, Radius, RationalBall};
use baire_core::step::RationalStepFunction;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_rational(r: &mut impl Rng, num: i64, den: i64) -> Rational {
    rat(r.gen_range(-num..=num), r.gen_range(1..=den))
}

pub fn random_step(r: &mut impl Rng, max_cells: usize) -> RationalStepFunction {
    let k = r.gen_range(1..=max_cells);
    let mut bp: Vec<Rational> = (1..k).map(|_| rat(r.gen_range(1..64), 32)).collect();
    bp.sort();
    bp.dedup();
    bp.insert(0, Rational::zero());
    bp.push(int(2));
    let vals = (0..bp.len() - 1).map(|_| small_rational(r, 8, 6)).collect();
    RationalStepFunction::new(bp, vals).unwrap()
}

pub fn random_ball(r: &mut impl Rng, p: u32) -> RationalBall {
    let c = random_step(r, 5);
    if r.gen_bool(0.3) {
        RationalBall::with_radius(c, Radius::pi_root(rat(r.gen_range(1..8), r.gen_range(1..8))), p).unwrap()
    } else {
        RationalBall::new(c, rat(r.gen_range(1..16), r.gen_range(1..8)), p).unwrap()
    }
}

pub fn f(x: &Rational) -> f64 {
    x.to_f64().unwrap()
}

/// [lo, hi] of f over each of `n` equal cells of [0, 2) in units of π.
pub fn cell_ranges(g: &RationalStepFunction, n: usize) -> Vec<(f64, f64)> {
    let bp: Vec<f64> = g.breakpoints().iter().map(f).collect();
    let vs: Vec<f64> = g.values().iter().map(f).collect();
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for k in 0..n {
        let (a, b) = (2.0 * k as f64 / n as f64, 2.0 * (k + 1) as f64 / n as f64);
        while j + 1 < vs.len() && bp[j + 1] <= a - 1e-12 {
            j += 1;
        }
        let (mut lo, mut hi) = (vs[j], vs[j]);
        let mut i = j;
        while i + 1 < vs.len() && bp[i + 1] < b + 1e-12 {
            i += 1;
            lo = lo.min(vs[i]);
            hi = hi.max(vs[i]);
        }
        out.push((lo, hi));
    }
    out
}

fn prod_range(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let c = [a.0 * b.0, a.0 * b.1, a.1 * b.0, a.1 * b.1];
    (c.iter().cloned().fold(f64::INFINITY, f64::min), c.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}

/// Riemann enclosures of a_0..a_L and b_1..b_L with the 1/π normalisation.
pub fn riemann_coeffs(g: &RationalStepFunction, order: usize, cells: usize) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let ranges = cell_ranges(g, cells);
    let table: Vec<(f64, f64)> = (0..cells).map(|j| (2.0 * PI * j as f64 / cells as f64).sin_cos()).collect();
    let n64 = cells as u64;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for n in 0..=order as u64 {
        let (mut alo, mut ahi, mut blo, mut bhi, mut mag) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (k, &fr) in ranges.iter().enumerate() {
            let k = k as u64;
            let (s0, c0) = table[((n * k) % n64) as usize];
            let (s1, c1) = table[((n * (k + 1)) % n64) as usize];
            // extrema of cos at nu ∈ Z, of sin at nu ∈ Z + 1/2, with u ∈ [2k/N, 2(k+1)/N]
            let (mut cl, mut ch) = (c0.min(c1), c0.max(c1));
            let (mut sl, mut sh) = (s0.min(s1), s0.max(s1));
            let lo2 = 2 * n * k;
            let hi2 = 2 * n * (k + 1);
            let first = lo2.div_ceil(n64);
            if first * n64 <= hi2 {
                for j in first..=hi2 / n64 {
                    if j % 2 == 0 { ch = 1.0 } else { cl = -1.0 }
                }
            }
            let first = (2 * lo2).div_ceil(n64);
            for j in first..=(2 * hi2) / n64 {
                if j % 2 == 1 {
                    if (j / 2) % 2 == 0 { sh = 1.0 } else { sl = -1.0 }
                }
            }
            let pad = 1e-15;
            let pa = prod_range(fr, (cl - pad, ch + pad));
            let pb = prod_range(fr, (sl - pad, sh + pad));
            alo += pa.0;
            ahi += pa.1;
            blo += pb.0;
            bhi += pb.1;
            mag += fr.0.abs().max(fr.1.abs());
        }
        let h = 2.0 / cells as f64;
        // summation error of N terms
        let slack = 1e-12 + mag * h * cells as f64 * 2.3e-16;
        a.push((alo * h - slack, ahi * h + slack));
        if n > 0 {
            b.push((blo * h - slack, bhi * h + slack));
        }
    }
    (a, b)
}

/// Enclosure of ∫|f − g|^p over [0, 2π] by midpoint-cell ranges.
pub fn riemann_distance_pow(f1: &RationalStepFunction, g: &RationalStepFunction, p: u32, cells: usize) -> (f64, f64) {
    let d = baire_core::step::pointwise_sub(f1, g);
    let r = cell_ranges(&d, cells);
    let h = 2.0 * PI / cells as f64;
    let (mut lo, mut hi) = (0.0, 0.0);
    for (a, b) in r {
        let (ma, mb) = (a.abs().powi(p as i32), b.abs().powi(p as i32));
        let min = if a <= 0.0 && b >= 0.0 { 0.0 } else { ma.min(mb) };
        lo += min * h;
        hi += ma.max(mb) * h;
    }
    let slack = 1e-12 + hi * cells as f64 * 2.3e-16;
    (lo - slack, hi + slack)
}

/// Fejér kernel K_m(t) = ½ + Σ_{ν ≤ m} (1 − ν/(m+1)) cos νt by direct summation.
/// The angle is reduced exactly as ν·u mod 2 before leaving the rationals.
pub fn fejer_sum(m: u64, u: &Rational, upto: u64) -> (f64, f64) {
    let mut s = 0.5;
    let two = int(2);
    for nu in 1..=m.min(upto) {
        let a = (u * int(nu as i64)) % &two;
        let a = if a.is_negative() { a + &two } else { a };
        s += (1.0 - nu as f64 / (m + 1) as f64) * (PI * f(&a)).cos();
    }
    let terms = m.min(upto) as f64;
    let pad = 4e-16 * (terms + 1.0) * (terms.max(1.0)).sqrt().max(1.0) + 1e-14;
    (s - pad, s + pad)
}

/// Dirichlet kernel ½ + Σ_{ν ≤ l} cos(νπu).
pub fn dirichlet_sum(l: u64, u: &Rational) -> (f64, f64) {
    let mut s = 0.5;
    let two = int(2);
    for nu in 1..=l {
        let a = (u * int(nu as i64)) % &two;
        s += (PI * f(&a)).cos();
    }
    let pad = 1e-15 * (l as f64 + 1.0) + 1e-14;
    (s - pad, s + pad)
}

/// Partial sum of order L of f_n from its coefficient form.
pub fn kolmogorov_partial_sum(nodes: &[Rational], freqs: &[u128], l: u64, u: &Rational) -> (f64, f64) {
    let n = nodes.len() as f64;
    let (mut lo, mut hi) = (0.0, 0.0);
    for (a, &m) in nodes.iter().zip(freqs) {
        let (x, y) = fejer_sum(m as u64, &(u - a), l);
        lo += x;
        hi += y;
    }
    (lo / n, hi / n)
}

pub fn overlaps(a: (f64, f64), lo: f64, hi: f64) -> bool {
    a.0 <= hi && lo <= a.1
}

/// sin(π·r/(2d)) for an integer r, reduced exactly into the first quadrant.
fn sin_quarter(r: i128, d: i128) -> f64 {
    let mut r = r.rem_euclid(4 * d);
    let mut sign = 1.0;
    if r >= 2 * d {
        r -= 2 * d;
        sign = -1.0;
    }
    if r > d {
        r = 2 * d - r;
    }
    sign * (PI * r as f64 / (2 * d) as f64).sin()
}

/// K_m(πw) = (1/(2(m+1)))·(sin((m+1)πw/2)/sin(πw/2))² at w = num/den ≠ 0 mod 2, with
/// a relative error bound.
pub fn fejer_closed(m: u128, num: i128, den: i128) -> (f64, f64) {
    let s1 = sin_quarter(((m as i128 + 1) * num).rem_euclid(4 * den), den);
    let s0 = sin_quarter(num, den);
    let v = (s1 / s0).powi(2) / (2.0 * (m + 1) as f64);
    (v, v * 1e-14 + 1e-300)
}

/// Equispaced N-point mean of f_n (exact for N > max frequency), evaluated with
/// `fejer_closed`.
pub fn kolmogorov_mean_equispaced(n: u32, freqs: &[u128], big_n: i128) -> (f64, f64) {
    let q = 2 * n as i128 + 1;
    let den = big_n * q;
    let (mut s, mut e) = (0.0, 0.0);
    for k in 0..big_n {
        for (i, &m) in freqs.iter().enumerate() {
            // u − a_i = 2k/N − 4(i+1)/(2n+1)
            let num = 2 * k * q - 4 * (i as i128 + 1) * big_n;
            let (v, err) = fejer_closed(m, num, den);
            s += v;
            e += err;
        }
    }
    let scale = 1.0 / (big_n as f64 * n as f64);
    let pad = s * scale * 1e-12;
    ((s - e) * scale - pad, (s + e) * scale + pad)
}

pub fn schemes(r: &mut impl Rng) -> ApproximationScheme {
    match r.gen_range(0..3) {
        0 => ApproximationScheme::constant(RationalStepFunction::constant(small_rational(r, 4, 4)), 1),
        1 => {
            // a step function approached by shrinking constant offsets
            let g = random_step(r, 4);
            ApproximationScheme::new("offset", 1, move |m| {
                Ok(g.map_values(|v| v + baire_core::exact::rational::pow2(-(m as i64) - 3)))
            })
        }
        _ => {
            let c = rat(r.gen_range(1..5), 2);
            ApproximationScheme::new("cos", 1, move |m| Ok(cos_steps(&c, m)))
        }
    }
}

/// c·cos(x) sampled at cell midpoints on 2^(m+5) cells: L¹ error ≤ 2π²c/2^(m+5) < 2^-m for c ≤ 2.
pub fn cos_steps(c: &Rational, m: u32) -> RationalStepFunction {
    let n = 1i64 << (m + 5);
    let bp: Vec<Rational> = (0..=n).map(|k| rat(2 * k, n)).collect();
    let vals = (0..n)
        .map(|k| {
            let mid = rat(2 * k + 1, n);
            let v = cos_pi(&mid, 64).lo_rational();
            baire_core::exact::rational::dyadic_floor(&(v * c), 40)
        })
        .collect();
    RationalStepFunction::new(bp, vals).unwrap().simplify()
}
