//! Seeded generation of selection diagrams, queries and model pairs.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagram::{NodeSet, Query, SelectionDiagram};
use crate::error::OracleError;
use crate::formula::advance;
use crate::oracle::scm::{DiscreteScm, Latent, Mechanism, ScmPair};

const MAX_WEIGHT: u64 = 9;

fn weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<u64> {
    (0..n).map(|_| rng.gen_range(1..=MAX_WEIGHT)).collect()
}

/// Per-node draw: a value table over (parents, latents, one random bit)
/// and the weights of an exclusive noise with twice the node's
/// cardinality. Noise value `n` contributes bit `n / card` to the table
/// lookup and shifts the result by `n % card`, so every value keeps
/// positive probability under every parent configuration.
struct Draw {
    g: Vec<usize>,
    noise: Vec<u64>,
}

fn draw(rng: &mut ChaCha8Rng, rows: usize, card: usize) -> Draw {
    Draw {
        g: (0..rows * 2).map(|_| rng.gen_range(0..card)).collect(),
        noise: weights(rng, 2 * card),
    }
}

fn mechanism(parents: Vec<String>, latents: Vec<usize>, rows: usize, card: usize, d: &Draw) -> Mechanism {
    let mut table = Vec::with_capacity(rows * 2 * card);
    for row in 0..rows {
        for n in 0..2 * card {
            table.push((d.g[row * 2 + n / card] + n % card) % card);
        }
    }
    Mechanism {
        parents,
        latents,
        noise: d.noise.clone(),
        table,
    }
}

/// Draws a pair of strictly positive models inducing `d`. Selection targets
/// get fresh tables and noise in the target model; a latent is redrawn only
/// when both of its children are selection targets.
pub fn random_scm_pair(d: &SelectionDiagram, seed: u64, max_card: usize) -> Result<ScmPair, OracleError> {
    let max_card = max_card.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cards: BTreeMap<String, usize> = d
        .observables()
        .iter()
        .map(|v| (v.clone(), rng.gen_range(2..=max_card)))
        .collect();
    let edges: Vec<(String, String)> = d.bidirected_edges().iter().cloned().collect();
    let latents: Vec<Latent> = edges
        .iter()
        .map(|e| {
            let c = rng.gen_range(2..=max_card);
            Latent {
                endpoints: e.clone(),
                weights: weights(&mut rng, c),
            }
        })
        .collect();
    let mut source_mech = BTreeMap::new();
    let mut target_mech = BTreeMap::new();
    for v in d.observables() {
        let parents: Vec<String> = d.parents(v).into_iter().collect();
        let lat: Vec<usize> = (0..edges.len())
            .filter(|&i| edges[i].0 == *v || edges[i].1 == *v)
            .collect();
        let rows = parents.iter().map(|p| cards[p]).product::<usize>()
            * lat.iter().map(|&i| latents[i].weights.len()).product::<usize>();
        let card = cards[v];
        let first = draw(&mut rng, rows, card);
        let m = mechanism(parents.clone(), lat.clone(), rows, card, &first);
        let t = if d.is_selection_target(v) {
            mechanism(parents, lat, rows, card, &draw(&mut rng, rows, card))
        } else {
            m.clone()
        };
        source_mech.insert(v.clone(), m);
        target_mech.insert(v.clone(), t);
    }
    let target_latents: Vec<Latent> = latents
        .iter()
        .map(|l| {
            let (a, b) = &l.endpoints;
            if d.is_selection_target(a) && d.is_selection_target(b) {
                Latent {
                    endpoints: l.endpoints.clone(),
                    weights: weights(&mut rng, l.weights.len()),
                }
            } else {
                l.clone()
            }
        })
        .collect();
    let source = DiscreteScm::new(d.clone(), cards.clone(), latents, source_mech)?;
    let target = DiscreteScm::new(d.clone(), cards, target_latents, target_mech)?;
    ScmPair::new(source, target)
}

/// Shape limits for random diagrams.
#[derive(Clone, Copy, Debug)]
pub struct DiagramShape {
    pub max_nodes: usize,
    pub max_bidirected: usize,
    pub max_selection: usize,
    pub edge_probability: f64,
}

impl Default for DiagramShape {
    fn default() -> DiagramShape {
        DiagramShape {
            max_nodes: 6,
            max_bidirected: 4,
            max_selection: 2,
            edge_probability: 0.4,
        }
    }
}

const NAMES: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "H"];

/// Random acyclic selection diagram with 2 to `max_nodes` observables.
pub fn random_diagram(rng: &mut ChaCha8Rng, shape: &DiagramShape) -> SelectionDiagram {
    let n = rng.gen_range(2..=shape.max_nodes.clamp(2, NAMES.len()));
    let names: Vec<&str> = NAMES[..n].to_vec();
    let mut order = names.clone();
    order.shuffle(rng);
    let mut directed = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(shape.edge_probability) {
                directed.push((order[i], order[j]));
            }
        }
    }
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((names[i], names[j]));
        }
    }
    pairs.shuffle(rng);
    let k = rng.gen_range(0..=shape.max_bidirected.min(pairs.len()));
    let bidirected: Vec<(&str, &str)> = pairs.into_iter().take(k).collect();
    let mut pool = names.clone();
    pool.shuffle(rng);
    let s = rng.gen_range(0..=shape.max_selection.min(n));
    let selection: Vec<&str> = pool.into_iter().take(s).collect();
    SelectionDiagram::new(names, directed, bidirected, selection).expect("random diagrams are valid")
}

/// Random query with one or two outcomes and up to two treatments.
pub fn random_query(rng: &mut ChaCha8Rng, d: &SelectionDiagram) -> Query {
    let mut pool: Vec<String> = d.observables().iter().cloned().collect();
    pool.shuffle(rng);
    let ny = if pool.len() > 2 && rng.gen_bool(0.25) { 2 } else { 1 };
    let y: NodeSet = pool.drain(..ny).collect();
    let nx = rng.gen_range(1..=2usize.min(pool.len()).max(1)).min(pool.len());
    let x: NodeSet = pool.into_iter().take(nx).collect();
    Query::new(x, y).expect("disjoint by construction")
}

/// Every assignment of the listed variables.
pub fn assignments(vars: &[String], cards: &BTreeMap<String, usize>) -> Vec<BTreeMap<String, usize>> {
    let radix: Vec<usize> = vars.iter().map(|v| cards[v]).collect();
    let mut digits = vec![0; vars.len()];
    let mut out = Vec::new();
    loop {
        out.push(vars.iter().cloned().zip(digits.iter().copied()).collect());
        if !advance(&mut digits, &radix) {
            return out;
        }
    }
}
