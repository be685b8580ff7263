//! Rational step functions on [0, 2π] with breakpoints stored as coefficients of π.

use std::cmp::Ordering;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::rational::{self, int, rat_pow, Rational};
use crate::lp::{sign_pi_affine, Radius};

/// Coordinate coefficient·π with coefficient in [0, 2].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScaledCoord(#[serde(with = "crate::exact::rational")] pub Rational);

impl ScaledCoord {
    pub fn new(c: Rational) -> Result<Self> {
        if c.is_negative() || c > int(2) {
            return Err(Error::InvalidInput(format!("coordinate {}π outside [0, 2π]", rational::format_rational(&c))));
        }
        Ok(ScaledCoord(c))
    }

    pub fn coefficient(&self) -> &Rational {
        &self.0
    }
}

/// Piecewise constant function: `values[i]` on [breakpoints[i]π, breakpoints[i+1]π).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct RationalStepFunction {
    #[serde(rename = "breakpoints_pi", with = "crate::exact::rational::vec")]
    breakpoints: Arc<[Rational]>,
    #[serde(with = "crate::exact::rational::vec")]
    values: Arc<[Rational]>,
}

#[derive(Deserialize)]
struct StepJson {
    #[serde(with = "crate::exact::rational::vec")]
    breakpoints_pi: Vec<Rational>,
    #[serde(with = "crate::exact::rational::vec")]
    values: Vec<Rational>,
}

impl<'de> Deserialize<'de> for RationalStepFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = StepJson::deserialize(d)?;
        RationalStepFunction::new(j.breakpoints_pi, j.values).map_err(serde::de::Error::custom)
    }
}

impl RationalStepFunction {
    /// Validating constructor; zero-length cells are rejected, use `from_cells` to drop them.
    pub fn new(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        if breakpoints.len() < 2 || values.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidInput("need n+1 breakpoints for n values".into()));
        }
        if !breakpoints[0].is_zero() || *breakpoints.last().unwrap() != int(2) {
            return Err(Error::InvalidInput("breakpoints must start at 0 and end at 2π".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("breakpoints must be strictly ascending".into()));
        }
        Ok(RationalStepFunction { breakpoints: breakpoints.into(), values: values.into() })
    }

    /// Builds from possibly degenerate cells, dropping zero-length ones.
    pub fn from_cells(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        let mut bp = vec![breakpoints[0].clone()];
        let mut vs = Vec::with_capacity(values.len());
        for (i, v) in values.into_iter().enumerate() {
            let b = &breakpoints[i + 1];
            if b > bp.last().unwrap() {
                bp.push(b.clone());
                vs.push(v);
            }
        }
        Self::new(bp, vs)
    }

    pub fn constant(c: Rational) -> Self {
        RationalStepFunction { breakpoints: vec![Rational::zero(), int(2)].into(), values: vec![c].into() }
    }

    pub fn zero() -> Self {
        Self::constant(Rational::zero())
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn num_cells(&self) -> usize {
        self.values.len()
    }

    /// (left, right, value) per cell, coordinates as π-coefficients.
    pub fn cells(&self) -> impl Iterator<Item = (&Rational, &Rational, &Rational)> {
        self.values.iter().enumerate().map(move |(i, v)| (&self.breakpoints[i], &self.breakpoints[i + 1], v))
    }

    /// Value at coordinate u·π (last cell closed at 2π).
    pub fn value_at(&self, u: &Rational) -> &Rational {
        let i = match self.breakpoints.binary_search(u) {
            Ok(i) => i.min(self.values.len() - 1),
            Err(i) => i.saturating_sub(1).min(self.values.len() - 1),
        };
        &self.values[i]
    }

    pub fn max_abs_value(&self) -> Rational {
        self.values.iter().map(|v| v.abs()).max().unwrap_or_else(Rational::zero)
    }

    /// Mean value (1/2π)∫f.
    pub fn mean(&self) -> Rational {
        let s: Rational = self.cells().map(|(a, b, v)| v * (b - a)).sum();
        s / int(2)
    }

    /// Merge two functions on the union of their grids, combining values with `op`.
    pub fn zip_with(&self, other: &Self, op: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        let (a, b) = (&self.breakpoints, &other.breakpoints);
        let mut bp = Vec::with_capacity(a.len() + b.len());
        let mut vs = Vec::with_capacity(a.len() + b.len());
        bp.push(Rational::zero());
        let (mut i, mut j) = (0usize, 0usize);
        while i < self.values.len() && j < other.values.len() {
            vs.push(op(&self.values[i], &other.values[j]));
            match a[i + 1].cmp(&b[j + 1]) {
                Ordering::Less => {
                    bp.push(a[i + 1].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    bp.push(b[j + 1].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    bp.push(a[i + 1].clone());
                    i += 1;
                    j += 1;
                }
            }
        }
        RationalStepFunction { breakpoints: bp.into(), values: vs.into() }
    }

    pub fn map_values(&self, f: impl Fn(&Rational) -> Rational) -> Self {
        RationalStepFunction { breakpoints: self.breakpoints.clone(), values: self.values.iter().map(f).collect::<Vec<_>>().into() }
    }

    /// Same function on a grid refined by the given extra breakpoints.
    pub fn refine_to(&self, grid: &[Rational]) -> Self {
        let g = RationalStepFunction {
            breakpoints: grid.to_vec().into(),
            values: vec![Rational::zero(); grid.len() - 1].into(),
        };
        self.zip_with(&g, |a, _| a.clone())
    }

    /// Merge adjacent cells with equal values.
    pub fn simplify(&self) -> Self {
        let mut bp = vec![self.breakpoints[0].clone()];
        let mut vs: Vec<Rational> = Vec::new();
        for (_, b, v) in self.cells() {
            if vs.last() == Some(v) {
                *bp.last_mut().unwrap() = b.clone();
            } else {
                vs.push(v.clone());
                bp.push(b.clone());
            }
        }
        RationalStepFunction { breakpoints: bp.into(), values: vs.into() }
    }

    /// g(x) = f(q·x), an integer dilation (2π-periodic extension).
    pub fn dilate(&self, q: u64) -> Self {
        let qr = int(q as i64);
        let mut bp = Vec::with_capacity(self.values.len() * q as usize + 1);
        let mut vs = Vec::with_capacity(self.values.len() * q as usize);
        bp.push(Rational::zero());
        for r in 0..q {
            let off = int(2 * r as i64);
            for (_, b, v) in self.cells() {
                bp.push((b + &off) / &qr);
                vs.push(v.clone());
            }
        }
        RationalStepFunction { breakpoints: bp.into(), values: vs.into() }
    }
}

pub fn common_refinement(f: &RationalStepFunction, g: &RationalStepFunction) -> (RationalStepFunction, RationalStepFunction) {
    let fr = f.zip_with(g, |a, _| a.clone());
    let gr = f.zip_with(g, |_, b| b.clone());
    (fr, gr)
}

/// ‖f − g‖_p^p as the coefficient of π.
pub fn lp_distance_pow(f: &RationalStepFunction, g: &RationalStepFunction, p: u32) -> Rational {
    if f == g {
        return Rational::zero();
    }
    let (a, b) = (f.breakpoints(), g.breakpoints());
    let (fv, gv) = (f.values(), g.values());
    let mut acc = SumAcc::default();
    let (mut i, mut j) = (0usize, 0usize);
    let mut left = Rational::zero();
    while i < fv.len() && j < gv.len() {
        let ord = a[i + 1].cmp(&b[j + 1]);
        let right = if ord == Ordering::Greater { &b[j + 1] } else { &a[i + 1] };
        let d = &fv[i] - &gv[j];
        if !d.is_zero() {
            acc.add(rat_pow(&d.abs(), p) * (right - &left));
        }
        left = right.clone();
        match ord {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    acc.total()
}

/// Sum of many rationals, grouped by denominator to avoid a gcd per term.
#[derive(Default)]
struct SumAcc {
    groups: std::collections::HashMap<num_bigint::BigInt, num_bigint::BigInt>,
}

impl SumAcc {
    fn add(&mut self, x: Rational) {
        if x.is_zero() {
            return;
        }
        let (n, d) = x.into_raw();
        *self.groups.entry(d).or_default() += n;
    }

    fn total(self) -> Rational {
        self.groups.into_iter().map(|(d, n)| Rational::new(n, d)).sum()
    }
}

/// ‖f‖_p^p as the coefficient of π.
pub fn lp_norm_pow(f: &RationalStepFunction, p: u32) -> Rational {
    let mut acc = SumAcc::default();
    for (a, b, v) in f.cells() {
        acc.add(rat_pow(&v.abs(), p) * (b - a));
    }
    acc.total()
}

pub fn scale_shift(f: &RationalStepFunction, add: &Rational) -> RationalStepFunction {
    f.map_values(|v| v + add)
}

pub fn scale(f: &RationalStepFunction, c: &Rational) -> RationalStepFunction {
    f.map_values(|v| v * c)
}

pub fn pointwise_sub(f: &RationalStepFunction, g: &RationalStepFunction) -> RationalStepFunction {
    f.zip_with(g, |a, b| a - b)
}

pub fn pointwise_add(f: &RationalStepFunction, g: &RationalStepFunction) -> RationalStepFunction {
    f.zip_with(g, |a, b| a + b)
}

/// Exact trichotomy of ‖f − g‖_p against a nonnegative threshold.
pub fn norm_compare(f: &RationalStepFunction, g: &RationalStepFunction, p: u32, threshold: &Radius) -> Result<Ordering> {
    if threshold.rational.is_negative() && threshold.pi_root.is_negative() {
        return Err(Error::InvalidInput("negative threshold".into()));
    }
    let d = lp_distance_pow(f, g, p);
    // threshold − ‖f−g‖ = a + (b − D^{1/p})·π^{1/p}
    Ok(sign_pi_affine(&threshold.rational, &threshold.pi_root, &d, p)?.reverse())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn two_step(a: Rational, b: Rational) -> RationalStepFunction {
        RationalStepFunction::new(vec![int(0), int(1), int(2)], vec![a, b]).unwrap()
    }

    #[test]
    fn refinement_examples() {
        let f = two_step(int(1), int(2));
        let g = RationalStepFunction::constant(int(5));
        let (fr, gr) = common_refinement(&f, &g);
        assert_eq!(fr.breakpoints(), &[int(0), int(1), int(2)]);
        assert_eq!(gr.values(), &[int(5), int(5)]);
        let (ff, _) = common_refinement(&f, &f);
        assert_eq!(ff, f);
        let a = RationalStepFunction::new(vec![int(0), rat(2, 3), int(2)], vec![int(1), int(0)]).unwrap();
        let (ar, _) = common_refinement(&a, &f);
        assert_eq!(ar.breakpoints(), &[int(0), rat(2, 3), int(1), int(2)]);
    }

    #[test]
    fn distance_examples() {
        let one = RationalStepFunction::constant(int(1));
        let zero = RationalStepFunction::zero();
        assert_eq!(lp_distance_pow(&one, &zero, 1), int(2));
        assert_eq!(lp_distance_pow(&one, &one, 3), int(0));
        let f = two_step(int(3), int(0));
        assert_eq!(lp_distance_pow(&f, &one, 2), int(5));
    }

    #[test]
    fn norm_compare_examples() {
        let one = RationalStepFunction::constant(int(1));
        let zero = RationalStepFunction::zero();
        assert_eq!(norm_compare(&one, &zero, 1, &Radius::pi_root(int(2))).unwrap(), Ordering::Equal);
        assert_eq!(norm_compare(&one, &zero, 1, &Radius::rational(int(7))).unwrap(), Ordering::Less);
        assert_eq!(norm_compare(&one, &zero, 1, &Radius::rational(int(6))).unwrap(), Ordering::Greater);
        let f = two_step(int(3), int(0));
        assert_eq!(norm_compare(&f, &one, 2, &Radius::pi_root(int(2))).unwrap(), Ordering::Greater);
        assert_eq!(norm_compare(&f, &one, 2, &Radius::pi_root(int(3))).unwrap(), Ordering::Less);
    }

    #[test]
    fn algebra_examples() {
        let one = RationalStepFunction::constant(int(1));
        assert_eq!(scale_shift(&one, &int(2)), RationalStepFunction::constant(int(3)));
        assert!(pointwise_sub(&one, &one).values().iter().all(|v| v.is_zero()));
        let d = pointwise_sub(&two_step(int(1), int(0)), &two_step(int(0), int(1)));
        assert_eq!(d.values(), &[int(1), int(-1)]);
    }

    #[test]
    fn json_round_trip() {
        let f = RationalStepFunction::new(vec![int(0), rat(4, 9), int(2)], vec![rat(1, 2), rat(-3, 7)]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"breakpoints_pi":["0","4/9","2"],"values":["1/2","-3/7"]}"#);
        let back: RationalStepFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn dilation_preserves_norm() {
        let f = two_step(int(3), rat(-1, 2));
        let g = f.dilate(5);
        assert_eq!(g.num_cells(), 10);
        assert_eq!(lp_norm_pow(&g, 2), lp_norm_pow(&f, 2));
        assert_eq!(g.value_at(&rat(1, 10)), &int(3));
        assert_eq!(g.value_at(&rat(1, 4)), &rat(-1, 2));
    }
}
