//! Input handling shared by subcommands.

use std::collections::BTreeMap;

use homothetic::expr::{free_identifiers, parse_with_constants};
use homothetic::geometry::FlatnessThresholds;
use homothetic::sampling::{quasi_random, DEFAULT_HI, DEFAULT_LO};
use homothetic::{Expr, VarSpec};

use crate::failure::Failure;
use crate::Global;

pub fn constants(global: &Global) -> Result<BTreeMap<String, f64>, Failure> {
    let mut out = BTreeMap::new();
    for c in &global.constants {
        let (name, value) = c
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("--const `{c}` is not NAME=VALUE")))?;
        let v: f64 = value
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| {
                Failure::usage(format!("--const `{c}`: `{value}` is not a finite number"))
            })?;
        out.insert(name.trim().to_string(), v);
    }
    Ok(out)
}

/// Splits `x12` into `("x", 12)`.
fn indexed_name(name: &str) -> Option<(&str, u64)> {
    let cut = name.find(|c: char| c.is_ascii_digit())?;
    let (prefix, digits) = name.split_at(cut);
    if prefix.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    Some((prefix, digits.parse().ok()?))
}

/// Explicit `--vars`, or the free identifiers of `text` in order of first
/// appearance; names sharing one prefix with numeric suffixes (`x1`, `x2`,
/// …) are sorted numerically instead.
pub fn variables(
    global: &Global,
    text: &str,
    consts: &BTreeMap<String, f64>,
) -> Result<VarSpec, Failure> {
    if let Some(v) = &global.vars {
        return VarSpec::new(v.iter().map(|s| s.trim().to_string()))
            .map_err(|e| Failure::usage(e.to_string()));
    }
    let mut names =
        free_identifiers(text, consts).map_err(|e| Failure::from(homothetic::Error::from(e)))?;
    let indexed: Option<Vec<(&str, u64)>> = names.iter().map(|n| indexed_name(n)).collect();
    if let Some(ix) = indexed {
        if ix.windows(2).all(|w| w[0].0 == w[1].0) {
            let mut pairs: Vec<(u64, String)> =
                ix.iter().map(|(_, k)| *k).zip(names.clone()).collect();
            pairs.sort();
            names = pairs.into_iter().map(|(_, n)| n).collect();
        }
    }
    if names.is_empty() {
        return Err(Failure::usage("expression has no variables; pass --vars"));
    }
    VarSpec::new(names).map_err(|e| Failure::usage(e.to_string()))
}

pub fn expression(global: &Global, text: &str) -> Result<(Expr, VarSpec), Failure> {
    let consts = constants(global)?;
    let vars = variables(global, text, &consts)?;
    let e = parse_with_constants(text, &vars, &consts).map_err(homothetic::Error::from)?;
    Ok((e, vars))
}

pub fn samples(global: &Global, n: usize) -> Result<Vec<Vec<f64>>, Failure> {
    if n > 16 {
        return Err(Failure::usage(format!(
            "at most 16 variables are supported, got {n}"
        )));
    }
    Ok(quasi_random(
        n,
        global.samples,
        global.seed,
        DEFAULT_LO,
        DEFAULT_HI,
    ))
}

pub fn thresholds(global: &Global) -> FlatnessThresholds {
    FlatnessThresholds {
        flat: global.tol_flat,
        reject: global.tol_reject,
    }
}
