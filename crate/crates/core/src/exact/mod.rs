//! Exact rationals, dyadic intervals and certified transcendental enclosures.

pub mod dyadic;
pub mod fint;
pub mod interval;
pub mod rational;
pub mod transcendental;

pub use dyadic::Dyadic;
pub use fint::Fi;
pub use interval::{certified_compare, certified_sign, refine, CertifiedOrdering, IntervalReal};
pub use rational::{format_rational, int, parse_rational, rat, rat_arith, RatOp, Rational};
pub use transcendental::{
    cos_enclosure, cos_pi, cos_pi_range, ln_enclosure, pi_enclosure, pi_root, sin_enclosure, sin_pi,
    sin_pi_range,
};
