//! Two-model counterexamples built from an s-hedge.
//!
//! Both models are binary. Every node of F computes the parity of its
//! parents in F and of the latents on a bidirected spanning tree of F. In
//! the second model the nodes of F′ ignore every input coming from F \ F′.
//! Selection targets inside F′ additionally XOR a private fair coin in the
//! source population only. Each root is wired to an outcome by a directed
//! path outside F whose nodes copy the parity of their path predecessors;
//! every other node is an independent fair coin.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_rational::BigRational;
use serde::Serialize;

use crate::components::{validate_s_hedge, SHedge};
use crate::diagram::{NodeSet, Query, SelectionDiagram};
use crate::error::OracleError;
use crate::oracle::models::binary_model;
use crate::oracle::scm::ScmPair;
use crate::oracle::verify::{agree_on_p_pstar_i, effect_disagreement};

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

fn spanning_tree(h: &SHedge) -> BTreeSet<(String, String)> {
    let mut tree = BTreeSet::new();
    let mut seen = NodeSet::new();
    if let Some(start) = h.f_prime.observables().iter().next() {
        seen.insert(start.clone());
        let mut queue = VecDeque::from([start.clone()]);
        while let Some(v) = queue.pop_front() {
            for s in h.f_prime.spouses(&v) {
                if seen.insert(s.clone()) {
                    tree.insert(ordered(&v, &s));
                    queue.push_back(s);
                }
            }
        }
    }
    let mut queue: VecDeque<String> = seen.iter().cloned().collect();
    while let Some(v) = queue.pop_front() {
        for s in h.f.spouses(&v) {
            if seen.insert(s.clone()) {
                tree.insert(ordered(&v, &s));
                queue.push_back(s);
            }
        }
    }
    tree
}

/// Directed edges of paths from each root outside the outcomes to some
/// outcome, avoiding F and never entering a treatment.
fn root_paths(h: &SHedge, d: &SelectionDiagram) -> Result<BTreeSet<(String, String)>, OracleError> {
    let f = h.f.observables();
    let y = h.query.y();
    let g = d.mutilate(h.query.x(), &NodeSet::new())?;
    let mut next: BTreeMap<String, String> = BTreeMap::new();
    let mut seen: NodeSet = y.iter().filter(|v| !f.contains(*v)).cloned().collect();
    let mut queue: VecDeque<String> = seen.iter().cloned().collect();
    while let Some(u) = queue.pop_front() {
        for p in g.parents(&u) {
            if f.contains(&p) {
                if h.roots.contains(&p) && !y.contains(&p) {
                    next.entry(p).or_insert_with(|| u.clone());
                }
            } else if seen.insert(p.clone()) {
                next.insert(p.clone(), u.clone());
                queue.push_back(p);
            }
        }
    }
    let mut edges = BTreeSet::new();
    for r in h.roots.iter().filter(|r| !y.contains(*r)) {
        let mut v = r.clone();
        while !y.contains(&v) {
            let n = next.get(&v).ok_or_else(|| {
                OracleError::Construction(format!("root `{r}` has no path to an outcome outside F"))
            })?;
            edges.insert((v.clone(), n.clone()));
            v = n.clone();
        }
    }
    Ok(edges)
}

/// Builds the two model pairs. With `positive`, every outcome is
/// additionally ANDed with a private fair coin so that all observational
/// distributions stay strictly positive.
pub fn build_counterexample(
    h: &SHedge,
    d: &SelectionDiagram,
    positive: bool,
) -> Result<(ScmPair, ScmPair), OracleError> {
    if !validate_s_hedge(h, d) {
        return Err(OracleError::InvalidHedge("does not validate against the diagram".into()));
    }
    let f = h.f.observables().clone();
    let fp = h.f_prime.observables().clone();
    let w = h.f_prime.selection_targets().clone();
    let tree = spanning_tree(h);
    let paths = root_paths(h, d)?;
    let on_path: NodeSet = paths.iter().map(|(_, b)| b.clone()).collect();
    let y = h.query.y().clone();

    // bit 0 of the noise feeds selection targets in F′ or plain coins,
    // the last bit the positivity coin of an outcome
    let mut bits = BTreeMap::new();
    for v in d.observables() {
        let coin = w.contains(v) || !(f.contains(v) || on_path.contains(v));
        let patch = positive && y.contains(v);
        let n = u32::from(coin) + u32::from(patch);
        if n > 0 {
            bits.insert(v.clone(), n);
        }
    }

    let build = |second: bool, s: usize| {
        binary_model(d, &bits, s, |v, i, s| {
            let noise = i.noise();
            let patched = positive && y.contains(v);
            let (coin, patch) = match (bits.get(v), patched) {
                (Some(2), _) => (noise & 1, noise >> 1),
                (_, true) => (0, noise),
                _ => (noise, 1),
            };
            let mut value;
            if f.contains(v) {
                let restrict = second && fp.contains(v);
                let keep = |u: &str| !restrict || fp.contains(u);
                value = 0;
                for p in h.f.parents(v) {
                    if keep(&p) {
                        value ^= i.parent(&p);
                    }
                }
                for (a, b) in &tree {
                    let other = if a == v {
                        b
                    } else if b == v {
                        a
                    } else {
                        continue;
                    };
                    if keep(other) {
                        value ^= i.latent(a, b);
                    }
                }
                if w.contains(v) && s == 0 {
                    value ^= coin;
                }
            } else if on_path.contains(v) {
                value = paths
                    .iter()
                    .filter(|(_, b)| b == v)
                    .fold(0, |acc, (a, _)| acc ^ i.parent(a));
            } else {
                return coin;
            }
            if patched {
                value &= patch;
            }
            value
        })
    };
    let pair = |second: bool| ScmPair::new(build(second, 0)?, build(second, 1)?);
    Ok((pair(false)?, pair(true)?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    /// The pairs agree on P, P* and every source intervention.
    pub agree: bool,
    /// First treatment/outcome assignment where the target effects differ.
    pub disagreement: Option<(BTreeMap<String, usize>, String, String)>,
}

impl Certificate {
    pub fn is_valid(&self) -> bool {
        self.agree && self.disagreement.is_some()
    }
}

/// Checks agreement on all observable data and disagreement on the query.
pub fn certify_counterexample(m1: &ScmPair, m2: &ScmPair, q: &Query) -> Result<Certificate, OracleError> {
    let agree = agree_on_p_pstar_i(m1, m2, None)?;
    let disagreement = effect_disagreement(m1, m2, q)?
        .map(|(a, p1, p2): (_, BigRational, BigRational)| (a, p1.to_string(), p2.to_string()));
    Ok(Certificate { agree, disagreement })
}
