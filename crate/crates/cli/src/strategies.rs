use anyhow::{Context, Result};
use baire_core::baire::{identity_strategy, recenter_strategy, shrink_strategy, singleton_witness, IndexedStrategy};
use baire_core::exact::parse_rational;
use baire_core::game::winning_from_witness;
use baire_core::lp::ApproximationScheme;
use baire_core::step::RationalStepFunction;
use baire_core::Error;

fn step_scheme(path: &str) -> Result<ApproximationScheme> {
    let s = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    let g: RationalStepFunction = serde_json::from_str(&s).with_context(|| format!("parsing {path}"))?;
    Ok(ApproximationScheme::constant(g, 1))
}

pub fn parse(name: &str) -> Result<IndexedStrategy> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    let need = || arg.ok_or_else(|| Error::InvalidInput(format!("strategy {head} needs an argument")));
    let seed = |a: &str| a.parse::<u64>().map_err(|e| Error::InvalidInput(format!("bad seed {a:?}: {e}")));
    Ok(match head {
        "identity" => identity_strategy(),
        "shrink" => shrink_strategy(parse_rational(need()?)?),
        "recenter" => recenter_strategy(seed(need()?)?, false, false),
        "recenter-wild" => recenter_strategy(seed(need()?)?, true, false),
        "recenter-shrinking" => recenter_strategy(seed(need()?)?, false, true),
        "avoid" => singleton_witness(step_scheme(need()?)?).avoider,
        "win" => winning_from_witness(&singleton_witness(step_scheme(need()?)?)),
        _ => return Err(Error::InvalidInput(format!("unknown strategy {name:?}")).into()),
    })
}
