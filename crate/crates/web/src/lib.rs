//! wasm-bindgen entry points for `www/index.html`.
//!
//! Every function returns a JSON string so the page needs no glue beyond
//! `JSON.parse`.

use baire_core::baire::{recenter_strategy, shrink_strategy, singleton_witness, IndexedStrategy};
use baire_core::exact::{format_rational, rat, Rational};
use baire_core::fourier::{kernel_eval_at, KernelSpec};
use baire_core::game::{run_game, winning_from_witness};
use baire_core::kolmogorov::{build_poly, grid_point, Evaluator};
use baire_core::lp::{ApproximationScheme, RationalBall};
use baire_core::step::RationalStepFunction;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn grid(samples: usize) -> Result<usize, JsError> {
    if (2..=1 << 14).contains(&samples) {
        Ok(samples)
    } else {
        Err(err("samples must lie in 2..=16384"))
    }
}

/// Certified enclosures of D_l or F_l on a grid of x/π in [0, 2).
#[wasm_bindgen]
pub fn kernel_samples(kind: &str, l: u32, samples: usize) -> Result<String, JsError> {
    let g = grid(samples)?;
    let k = match kind {
        "dirichlet" => KernelSpec::dirichlet(l),
        "fejer" => KernelSpec::fejer(l),
        _ => return Err(err(format!("unknown kernel {kind:?}"))),
    };
    let rows: Vec<Value> = (0..g)
        .map(|i| {
            let u = grid_point(i, g);
            let v = kernel_eval_at(&k, &u, 64).map_err(err)?;
            Ok(json!([i as f64 * 2.0 / g as f64, v.lo_f64(), v.hi_f64()]))
        })
        .collect::<Result<_, JsError>>()?;
    Ok(json!({ "kind": kind, "l": l, "rows": rows }).to_string())
}

/// Frequencies of f_n and its enclosure on a grid.
#[wasm_bindgen]
pub fn kolmogorov_samples(n: u32, samples: usize) -> Result<String, JsError> {
    if !(2..=64).contains(&n) {
        return Err(err("n must lie in 2..=64"));
    }
    let g = grid(samples)?;
    let p = build_poly(n).map_err(err)?;
    let ev = Evaluator::new(&p);
    let rows: Vec<Value> = (0..g)
        .map(|i| {
            let v = ev.value(&grid_point(i, g));
            json!([i as f64 * 2.0 / g as f64, v.lo, v.hi])
        })
        .collect();
    let nodes: Vec<String> = p.nodes.iter().map(format_rational).collect();
    let freqs: Vec<String> = p.freqs.iter().map(|m| m.to_string()).collect();
    Ok(json!({ "n": n, "nodes": nodes, "freqs": freqs, "rows": rows }).to_string())
}

/// Plays `rounds` rounds from B(c, 1) in L¹, where c is the constant `centre`.
#[wasm_bindgen]
pub fn play_game(alpha: &str, beta: &str, centre: &str, rounds: usize, seed: u64) -> Result<String, JsError> {
    if rounds == 0 || rounds > 24 {
        return Err(err("rounds must lie in 1..=24"));
    }
    let c: Rational = baire_core::exact::parse_rational(centre).map_err(err)?;
    let strat = |name: &str, s: u64| -> Result<IndexedStrategy, JsError> {
        Ok(match name {
            "recenter" => recenter_strategy(s, false, false),
            "recenter-wild" => recenter_strategy(s, true, false),
            "shrink" => shrink_strategy(rat(1, 3)),
            "avoid-zero" => winning_from_witness(&singleton_witness(ApproximationScheme::constant(
                RationalStepFunction::zero(),
                1,
            ))),
            "identity" => baire_core::baire::identity_strategy(),
            _ => return Err(err(format!("unknown strategy {name:?}"))),
        })
    };
    let b = RationalBall::new(RationalStepFunction::constant(c), rat(1, 1), 1).map_err(err)?;
    let t = run_game(&strat(alpha, seed)?, &strat(beta, seed ^ 0x9e37)?, &b, rounds).map_err(err)?;
    let ok = t.verify().map_err(err)?;
    let rows: Vec<Value> = t
        .rounds
        .iter()
        .map(|r| {
            json!({
                "i": r.index,
                "alpha_radius": r.alpha_move.radius.to_f64(1),
                "beta_radius": r.beta_move.radius.to_f64(1),
                "beta_radius_exact": format_rational(&r.beta_move.radius.rational),
                "pieces": r.beta_move.center.values().len(),
                "nested": r.alpha_contained && r.beta_contained,
            })
        })
        .collect();
    Ok(json!({ "verified": ok, "rounds": rows }).to_string())
}
