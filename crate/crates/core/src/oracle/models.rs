//! Hand-built binary model pairs for the smallest non-transportable
//! diagrams. In each pair the source model is the equation system with the
//! selection indicator at 0 and the target model the same system at 1.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::diagram::SelectionDiagram;
use crate::error::OracleError;
use crate::examples;
use crate::oracle::scm::{DiscreteScm, Inputs, ScmPair};

fn xor(a: usize, b: usize) -> usize {
    a ^ b
}

fn or(a: usize, b: usize) -> usize {
    a | b
}

fn and(a: usize, b: usize) -> usize {
    a & b
}

/// Binary model of `d` at selection value `s`. A node listed in `coins`
/// gets a uniform exclusive noise over that many bits, every latent is a
/// fair coin.
pub(crate) fn binary_model<F>(
    d: &SelectionDiagram,
    coins: &BTreeMap<String, u32>,
    s: usize,
    f: F,
) -> Result<DiscreteScm, OracleError>
where
    F: Fn(&str, &Inputs, usize) -> usize,
{
    let cards = d.observables().iter().map(|v| (v.clone(), 2)).collect();
    let latents = vec![vec![1, 1]; d.bidirected_edges().len()];
    let noise: BTreeMap<String, Vec<u64>> = d
        .observables()
        .iter()
        .map(|v| (v.clone(), vec![1; 1 << coins.get(v).copied().unwrap_or(0)]))
        .collect();
    DiscreteScm::from_fn(d.clone(), cards, latents, noise, |v, i| f(v, i, s))
}

pub(crate) fn binary_pair<F>(d: &SelectionDiagram, coins: &BTreeMap<String, u32>, f: F) -> Result<ScmPair, OracleError>
where
    F: Fn(&str, &Inputs, usize) -> usize,
{
    ScmPair::new(binary_model(d, coins, 0, &f)?, binary_model(d, coins, 1, &f)?)
}

fn coins(names: &[&str]) -> BTreeMap<String, u32> {
    names.iter().map(|s| (s.to_string(), 1)).collect()
}

/// The two s-bow models: X = U in both; Y = (X ⊕ U) ⊕ S in the first,
/// Y = S ∨ (X ⊕ U) in the second.
pub fn sbow_models() -> Result<(ScmPair, ScmPair), OracleError> {
    let d = examples::diagram("sbow").expect("bundled");
    let none = BTreeMap::new();
    let m1 = binary_pair(&d, &none, |v, i, s| {
        let u = i.latent("X", "Y");
        match v {
            "X" => u,
            _ => xor(xor(i.parent("X"), u), s),
        }
    })?;
    let m2 = binary_pair(&d, &none, |v, i, s| {
        let u = i.latent("X", "Y");
        match v {
            "X" => u,
            _ => or(s, xor(i.parent("X"), u)),
        }
    })?;
    Ok((m1, m2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TruthRow {
    pub x: usize,
    pub s: usize,
    pub u: usize,
    pub y1: usize,
    pub y2: usize,
}

/// Values of Y in both s-bow models for every (X, S, U).
pub fn theorem1_truth_table() -> Vec<TruthRow> {
    let mut rows = Vec::with_capacity(8);
    for x in 0..2 {
        for s in 0..2 {
            for u in 0..2 {
                rows.push(TruthRow {
                    x,
                    s,
                    u,
                    y1: xor(xor(x, u), s),
                    y2: or(s, xor(x, u)),
                });
            }
        }
    }
    rows
}

/// Models for X → Z → Y with X ↔ Y (U1), Z ↔ Y (U2) and a selection node
/// on Z, whose exclusive noise is U3.
pub fn sp_models() -> Result<(ScmPair, ScmPair), OracleError> {
    let d = examples::diagram("sp").expect("bundled");
    let z_noise = coins(&["Z"]);
    let u1 = |i: &Inputs| i.latent("X", "Y");
    let u2 = |i: &Inputs| i.latent("Y", "Z");
    let m1 = binary_pair(&d, &z_noise, |v, i, s| match v {
        "X" => u1(i),
        "Z" => {
            let x = i.parent("X");
            xor(
                or(xor(xor(xor(x, u2(i)), 1), i.noise()), s),
                and(s, xor(x, u2(i))),
            )
        }
        _ => xor(xor(i.parent("Z"), u1(i)), u2(i)),
    })?;
    let m2 = binary_pair(&d, &z_noise, |v, i, s| match v {
        "X" => u1(i),
        "Z" => xor(or(xor(xor(u2(i), 1), i.noise()), s), and(s, u2(i))),
        _ => xor(i.parent("Z"), u2(i)),
    })?;
    Ok((m1, m2))
}

/// Models for X → Y ← Z with X ↔ Y (U1), Z ↔ Y (U2) and a selection node
/// on Z, whose exclusive noise is U3.
pub fn sb_models() -> Result<(ScmPair, ScmPair), OracleError> {
    let d = examples::diagram("sb").expect("bundled");
    let z_noise = coins(&["Z"]);
    let u1 = |i: &Inputs| i.latent("X", "Y");
    let u2 = |i: &Inputs| i.latent("Y", "Z");
    let z = move |i: &Inputs, s: usize| xor(or(xor(xor(i.noise(), u2(i)), 1), s), and(s, u2(i)));
    let m1 = binary_pair(&d, &z_noise, |v, i, s| match v {
        "X" => u1(i),
        "Z" => z(i, s),
        _ => xor(i.parent("Z"), u2(i)),
    })?;
    let m2 = binary_pair(&d, &z_noise, |v, i, s| match v {
        "X" => u1(i),
        "Z" => z(i, s),
        _ => xor(xor(xor(i.parent("X"), i.parent("Z")), u1(i)), u2(i)),
    })?;
    Ok((m1, m2))
}
