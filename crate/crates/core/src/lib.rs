//! Effective Baire category on L^p-computable functions over [0, 2π].
//!
//! Step functions with breakpoints at rational multiples of π are the
//! countable skeleton; everything transcendental is evaluated as a certified
//! interval enclosure.

pub mod baire;
pub mod divergence;
pub mod error;
pub mod exact;
pub mod fourier;
pub mod game;
pub mod kolmogorov;
pub mod lp;
pub mod par;
pub mod step;

pub use error::{Error, Result};
