//! Discrete structural causal models and exact enumeration of their
//! observational and interventional distributions.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::diagram::SelectionDiagram;
use crate::error::{FormulaError, OracleError};
use crate::formula::{advance, Population, Term, TermOracle};

/// Largest number of (shared latent × observable) states enumerated.
pub const ENUMERATION_CAP: u128 = 1 << 24;

/// An exogenous variable shared by the two endpoints of a bidirected edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Latent {
    pub endpoints: (String, String),
    /// Unnormalized weights of each value.
    pub weights: Vec<u64>,
}

/// Structural equation of one observable as a total function table over
/// (observed parents, shared latents, exclusive noise).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mechanism {
    /// Observed parents in lexicographic order.
    pub parents: Vec<String>,
    /// Indices of the shared latents pointing at this node, ascending.
    pub latents: Vec<usize>,
    /// Unnormalized weights of the exclusive noise values.
    pub noise: Vec<u64>,
    /// Row-major over parents, then latents, then noise.
    pub table: Vec<usize>,
}

/// Named access to the inputs of a mechanism while building its table.
pub struct Inputs<'a> {
    parents: &'a [String],
    parent_values: &'a [usize],
    latents: &'a [(String, String)],
    latent_values: &'a [usize],
    noise: usize,
}

impl Inputs<'_> {
    pub fn parent(&self, name: &str) -> usize {
        let i = self
            .parents
            .iter()
            .position(|p| p == name)
            .unwrap_or_else(|| panic!("`{name}` is not a parent"));
        self.parent_values[i]
    }

    /// Value of the latent behind the bidirected edge `a <-> b`.
    pub fn latent(&self, a: &str, b: &str) -> usize {
        let i = self
            .latents
            .iter()
            .position(|(x, y)| (x == a && y == b) || (x == b && y == a))
            .unwrap_or_else(|| panic!("no latent between `{a}` and `{b}`"));
        self.latent_values[i]
    }

    pub fn noise(&self) -> usize {
        self.noise
    }

    /// Parity of every observed parent and shared latent.
    pub fn parity_of_all(&self) -> usize {
        (self.parent_values.iter().sum::<usize>() + self.latent_values.iter().sum::<usize>()) % 2
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteScm {
    diagram: SelectionDiagram,
    cards: BTreeMap<String, usize>,
    latents: Vec<Latent>,
    mechanisms: BTreeMap<String, Mechanism>,
}

fn mixed_radix(values: &[usize], cards: &[usize]) -> usize {
    values.iter().zip(cards).fold(0, |acc, (v, c)| acc * c + v)
}

impl DiscreteScm {
    /// Validates and assembles a model. Latent `i` belongs to the `i`-th
    /// bidirected edge of `diagram` in its canonical order.
    pub fn new(
        diagram: SelectionDiagram,
        cards: BTreeMap<String, usize>,
        latents: Vec<Latent>,
        mechanisms: BTreeMap<String, Mechanism>,
    ) -> Result<DiscreteScm, OracleError> {
        let bad = |m: String| Err(OracleError::Malformed(m));
        if cards.keys().ne(diagram.observables().iter()) || mechanisms.keys().ne(diagram.observables().iter()) {
            return bad("cardinalities and mechanisms must cover exactly the observables".into());
        }
        if let Some((v, _)) = cards.iter().find(|(_, &c)| c < 2) {
            return bad(format!("`{v}` needs at least two values"));
        }
        if latents.len() != diagram.bidirected_edges().len() {
            return bad("one latent per bidirected edge".into());
        }
        for (l, e) in latents.iter().zip(diagram.bidirected_edges()) {
            if &l.endpoints != e {
                return bad(format!("latent order does not match edge {}<->{}", e.0, e.1));
            }
            if l.weights.iter().sum::<u64>() == 0 {
                return bad(format!("latent {}<->{} has zero mass", e.0, e.1));
            }
        }
        for (v, m) in &mechanisms {
            let parents: Vec<String> = diagram.parents(v).into_iter().collect();
            if m.parents != parents {
                return bad(format!("parents of `{v}` do not match the diagram"));
            }
            let expected: Vec<usize> = latents
                .iter()
                .enumerate()
                .filter(|(_, l)| l.endpoints.0 == *v || l.endpoints.1 == *v)
                .map(|(i, _)| i)
                .collect();
            if m.latents != expected {
                return bad(format!("latents of `{v}` do not match the diagram"));
            }
            if m.noise.is_empty() || m.noise.iter().sum::<u64>() == 0 {
                return bad(format!("noise of `{v}` has zero mass"));
            }
            let rows: usize = m.parents.iter().map(|p| cards[p]).product::<usize>()
                * m.latents.iter().map(|&i| latents[i].weights.len()).product::<usize>()
                * m.noise.len();
            if m.table.len() != rows {
                return bad(format!("table of `{v}` has {} rows, expected {rows}", m.table.len()));
            }
            if m.table.iter().any(|&x| x >= cards[v]) {
                return bad(format!("table of `{v}` leaves the value range"));
            }
        }
        Ok(DiscreteScm {
            diagram,
            cards,
            latents,
            mechanisms,
        })
    }

    /// Builds every table by calling `f(node, inputs)`.
    pub fn from_fn<F>(
        diagram: SelectionDiagram,
        cards: BTreeMap<String, usize>,
        latent_weights: Vec<Vec<u64>>,
        noise: BTreeMap<String, Vec<u64>>,
        f: F,
    ) -> Result<DiscreteScm, OracleError>
    where
        F: Fn(&str, &Inputs) -> usize,
    {
        let edges: Vec<(String, String)> = diagram.bidirected_edges().iter().cloned().collect();
        if latent_weights.len() != edges.len() {
            return Err(OracleError::Malformed("one latent per bidirected edge".into()));
        }
        let latents: Vec<Latent> = edges
            .iter()
            .zip(latent_weights)
            .map(|(e, w)| Latent {
                endpoints: e.clone(),
                weights: w,
            })
            .collect();
        let mut mechanisms = BTreeMap::new();
        for v in diagram.observables() {
            let parents: Vec<String> = diagram.parents(v).into_iter().collect();
            let lat: Vec<usize> = (0..latents.len())
                .filter(|&i| edges[i].0 == *v || edges[i].1 == *v)
                .collect();
            let lat_edges: Vec<(String, String)> = lat.iter().map(|&i| edges[i].clone()).collect();
            let own = noise.get(v).cloned().unwrap_or_else(|| vec![1]);
            let mut radix: Vec<usize> = parents
                .iter()
                .map(|p| cards.get(p).copied().unwrap_or(2))
                .collect();
            radix.extend(lat.iter().map(|&i| latents[i].weights.len()));
            radix.push(own.len());
            let mut digits = vec![0; radix.len()];
            let mut table = Vec::new();
            loop {
                let np = parents.len();
                let nl = lat.len();
                let inputs = Inputs {
                    parents: &parents,
                    parent_values: &digits[..np],
                    latents: &lat_edges,
                    latent_values: &digits[np..np + nl],
                    noise: digits[np + nl],
                };
                table.push(f(v, &inputs));
                if !advance(&mut digits, &radix) {
                    break;
                }
            }
            mechanisms.insert(
                v.clone(),
                Mechanism {
                    parents,
                    latents: lat,
                    noise: own,
                    table,
                },
            );
        }
        DiscreteScm::new(diagram, cards, latents, mechanisms)
    }

    pub fn diagram(&self) -> &SelectionDiagram {
        &self.diagram
    }

    pub fn cardinalities(&self) -> &BTreeMap<String, usize> {
        &self.cards
    }

    pub fn latents(&self) -> &[Latent] {
        &self.latents
    }

    pub fn mechanisms(&self) -> &BTreeMap<String, Mechanism> {
        &self.mechanisms
    }

    /// Function tables and normalized exogenous distributions. Each table
    /// is row-major over `parents`, then `latents` (indices into the
    /// `latents` list), then the exclusive noise.
    pub fn to_json(&self) -> serde_json::Value {
        let dist = |w: &[u64]| -> Vec<String> {
            let total: u128 = w.iter().map(|&x| x as u128).sum();
            w.iter().map(|&x| ratio(x as u128, total).to_string()).collect()
        };
        let latents: Vec<serde_json::Value> = self
            .latents
            .iter()
            .map(|l| serde_json::json!({ "endpoints": [l.endpoints.0, l.endpoints.1], "distribution": dist(&l.weights) }))
            .collect();
        let mechanisms: serde_json::Map<String, serde_json::Value> = self
            .mechanisms
            .iter()
            .map(|(v, m)| {
                let value = serde_json::json!({
                    "parents": m.parents,
                    "latents": m.latents,
                    "noise": dist(&m.noise),
                    "table": m.table,
                });
                (v.clone(), value)
            })
            .collect();
        serde_json::json!({
            "cardinalities": self.cards,
            "latents": latents,
            "mechanisms": mechanisms,
        })
    }

    /// Observational joint distribution.
    pub fn joint_dist(&self) -> Result<Joint, OracleError> {
        self.interventional_dist(&BTreeMap::new())
    }

    /// Joint distribution after replacing the mechanisms of the intervened
    /// nodes by constants. Intervened nodes stay in the table as point
    /// masses.
    pub fn interventional_dist(&self, intervention: &BTreeMap<String, usize>) -> Result<Joint, OracleError> {
        for (v, &x) in intervention {
            match self.cards.get(v) {
                None => return Err(OracleError::Malformed(format!("unknown node `{v}`"))),
                Some(&c) if x >= c => {
                    return Err(OracleError::Malformed(format!("value {x} out of range for `{v}`")))
                }
                _ => {}
            }
        }
        let vars: Vec<String> = self.cards.keys().cloned().collect();
        let cards: Vec<usize> = vars.iter().map(|v| self.cards[v]).collect();
        let pos: HashMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let lat_cards: Vec<usize> = self.latents.iter().map(|l| l.weights.len()).collect();

        let free_states: u128 = vars
            .iter()
            .filter(|v| !intervention.contains_key(*v))
            .map(|v| self.cards[v] as u128)
            .product::<u128>()
            .saturating_mul(lat_cards.iter().map(|&c| c as u128).product());
        if free_states > ENUMERATION_CAP {
            return Err(OracleError::TooLarge {
                states: free_states,
                cap: ENUMERATION_CAP,
            });
        }

        let order: Vec<usize> = self.diagram.topological_order().iter().map(|v| pos[v.as_str()]).collect();
        // per node: conditional weight of each value given (parents, latents)
        let nodes: Vec<NodePlan> = vars
            .iter()
            .map(|v| {
                let m = &self.mechanisms[v];
                let card = self.cards[v];
                let mut radix: Vec<usize> = m.parents.iter().map(|p| self.cards[p]).collect();
                radix.extend(m.latents.iter().map(|&i| lat_cards[i]));
                let rows = radix.iter().product::<usize>();
                let mut cond = vec![0u128; rows * card];
                for row in 0..rows {
                    for (n, &w) in m.noise.iter().enumerate() {
                        let value = m.table[row * m.noise.len() + n];
                        cond[row * card + value] += w as u128;
                    }
                }
                NodePlan {
                    parents: m.parents.iter().map(|p| pos[p.as_str()]).collect(),
                    latents: m.latents.clone(),
                    radix,
                    card,
                    cond,
                    fixed: intervention.get(v).copied(),
                }
            })
            .collect();

        let size: usize = cards.iter().product();
        let mut weights = vec![0u128; size];
        let mut lat_values = vec![0usize; lat_cards.len()];
        let mut values = vec![0usize; vars.len()];
        loop {
            let mut lw: u128 = 1;
            for (i, &x) in lat_values.iter().enumerate() {
                lw = lw
                    .checked_mul(self.latents[i].weights[x] as u128)
                    .ok_or(OracleError::Overflow)?;
            }
            if lw > 0 {
                let walk = Walk {
                    nodes: &nodes,
                    order: &order,
                    cards: &cards,
                    lat_values: &lat_values,
                };
                walk.run(0, lw, &mut values, &mut weights)?;
            }
            if !advance(&mut lat_values, &lat_cards) {
                break;
            }
        }
        let total = weights
            .iter()
            .try_fold(0u128, |acc, &w| acc.checked_add(w))
            .ok_or(OracleError::Overflow)?;
        Ok(Joint::new(vars, cards, weights, total))
    }
}

struct NodePlan {
    parents: Vec<usize>,
    latents: Vec<usize>,
    radix: Vec<usize>,
    card: usize,
    cond: Vec<u128>,
    fixed: Option<usize>,
}

struct Walk<'a> {
    nodes: &'a [NodePlan],
    order: &'a [usize],
    cards: &'a [usize],
    lat_values: &'a [usize],
}

impl Walk<'_> {
    fn run(&self, depth: usize, acc: u128, values: &mut [usize], weights: &mut [u128]) -> Result<(), OracleError> {
        if depth == self.order.len() {
            let i = mixed_radix(values, self.cards);
            weights[i] = weights[i].checked_add(acc).ok_or(OracleError::Overflow)?;
            return Ok(());
        }
        let v = self.order[depth];
        let plan = &self.nodes[v];
        if let Some(x) = plan.fixed {
            values[v] = x;
            return self.run(depth + 1, acc, values, weights);
        }
        let mut row_digits: Vec<usize> = plan.parents.iter().map(|&p| values[p]).collect();
        row_digits.extend(plan.latents.iter().map(|&l| self.lat_values[l]));
        let row = mixed_radix(&row_digits, &plan.radix);
        for x in 0..plan.card {
            let w = plan.cond[row * plan.card + x];
            if w == 0 {
                continue;
            }
            values[v] = x;
            let next = acc.checked_mul(w).ok_or(OracleError::Overflow)?;
            self.run(depth + 1, next, values, weights)?;
        }
        Ok(())
    }
}

/// Exact joint distribution over all observables as integer weights with a
/// common denominator.
#[derive(Clone, Debug)]
pub struct Joint {
    vars: Vec<String>,
    cards: Vec<usize>,
    weights: Vec<u128>,
    total: u128,
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Joint {
    fn new(vars: Vec<String>, cards: Vec<usize>, mut weights: Vec<u128>, mut total: u128) -> Joint {
        let g = weights.iter().fold(total, |g, &w| gcd(g, w));
        if g > 1 {
            weights.iter_mut().for_each(|w| *w /= g);
            total /= g;
        }
        Joint {
            vars,
            cards,
            weights,
            total,
        }
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    pub fn total(&self) -> u128 {
        self.total
    }

    /// Iterates over (assignment, probability) pairs in mixed-radix order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, BigRational)> + '_ {
        let mut digits = vec![0usize; self.vars.len()];
        let mut first = true;
        self.weights.iter().map(move |&w| {
            if !first {
                advance(&mut digits, &self.cards);
            }
            first = false;
            (digits.clone(), ratio(w, self.total))
        })
    }

    /// Sum of all probabilities; exactly one for every joint built here.
    pub fn mass(&self) -> BigRational {
        let sum: u128 = self.weights.iter().sum();
        ratio(sum, self.total)
    }

    /// Marginal weights over `vars`, keyed by their values in the given order.
    pub fn marginal_weights(&self, vars: &[String]) -> HashMap<Vec<usize>, u128> {
        let idx: Vec<usize> = vars
            .iter()
            .map(|v| self.vars.iter().position(|x| x == v).expect("known variable"))
            .collect();
        let mut out = HashMap::new();
        let mut digits = vec![0usize; self.vars.len()];
        for &w in &self.weights {
            if w > 0 {
                let key: Vec<usize> = idx.iter().map(|&i| digits[i]).collect();
                *out.entry(key).or_insert(0) += w;
            }
            advance(&mut digits, &self.cards);
        }
        out
    }

    /// Probability of the event that every listed variable takes its value.
    pub fn probability(&self, event: &BTreeMap<String, usize>) -> BigRational {
        let vars: Vec<String> = event.keys().cloned().collect();
        let key: Vec<usize> = event.values().copied().collect();
        let w = self.marginal_weights(&vars).get(&key).copied().unwrap_or(0);
        ratio(w, self.total)
    }
}

impl PartialEq for Joint {
    fn eq(&self, other: &Joint) -> bool {
        // weights are reduced by their gcd, so equal distributions have
        // identical representations
        self.vars == other.vars && self.cards == other.cards && self.total == other.total && self.weights == other.weights
    }
}

impl Eq for Joint {}

pub(crate) fn ratio(num: u128, den: u128) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Two models over one selection diagram: the source population and the
/// target population. They differ only in the mechanisms of selection
/// targets and in latents whose two children are both selection targets.
#[derive(Debug)]
pub struct ScmPair {
    source: DiscreteScm,
    target: DiscreteScm,
    cache: RefCell<HashMap<CacheKey, Joint>>,
    marginals: RefCell<HashMap<(CacheKey, Vec<String>), HashMap<Vec<usize>, u128>>>,
}

type CacheKey = (Population, Vec<(String, usize)>);

impl Clone for ScmPair {
    fn clone(&self) -> ScmPair {
        ScmPair::new(self.source.clone(), self.target.clone()).expect("already validated")
    }
}

impl PartialEq for ScmPair {
    fn eq(&self, other: &ScmPair) -> bool {
        self.source == other.source && self.target == other.target
    }
}

impl ScmPair {
    pub fn new(source: DiscreteScm, target: DiscreteScm) -> Result<ScmPair, OracleError> {
        let bad = |m: String| Err(OracleError::Malformed(m));
        if source.diagram != target.diagram || source.cards != target.cards {
            return bad("source and target must share diagram and cardinalities".into());
        }
        let d = &source.diagram;
        for (v, m) in &source.mechanisms {
            if !d.is_selection_target(v) && *m != target.mechanisms[v] {
                return bad(format!("`{v}` differs between populations without a selection node"));
            }
        }
        for (a, b) in source.latents.iter().zip(&target.latents) {
            let (x, y) = &a.endpoints;
            let both = d.is_selection_target(x) && d.is_selection_target(y);
            if a.weights.len() != b.weights.len() || (!both && a != b) {
                return bad(format!("latent {x}<->{y} differs between populations"));
            }
        }
        Ok(ScmPair {
            source,
            target,
            cache: RefCell::new(HashMap::new()),
            marginals: RefCell::new(HashMap::new()),
        })
    }

    /// A pair whose populations coincide.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "source": self.source.to_json(), "target": self.target.to_json() })
    }

    pub fn identical(model: DiscreteScm) -> ScmPair {
        ScmPair::new(model.clone(), model).expect("identical models")
    }

    pub fn source(&self) -> &DiscreteScm {
        &self.source
    }

    pub fn target(&self) -> &DiscreteScm {
        &self.target
    }

    pub fn model(&self, population: Population) -> &DiscreteScm {
        match population {
            Population::Source => &self.source,
            Population::Target => &self.target,
        }
    }

    /// Cached interventional distribution of one population.
    pub fn distribution(
        &self,
        population: Population,
        intervention: &BTreeMap<String, usize>,
    ) -> Result<Joint, OracleError> {
        let key = (population, intervention.iter().map(|(k, v)| (k.clone(), *v)).collect());
        if let Some(j) = self.cache.borrow().get(&key) {
            return Ok(j.clone());
        }
        let j = self.model(population).interventional_dist(intervention)?;
        self.cache.borrow_mut().insert(key, j.clone());
        Ok(j)
    }

    fn marginal_weight(
        &self,
        population: Population,
        intervention: &BTreeMap<String, usize>,
        event: &BTreeMap<String, usize>,
    ) -> Result<(u128, u128), OracleError> {
        let key: CacheKey = (population, intervention.iter().map(|(k, v)| (k.clone(), *v)).collect());
        let vars: Vec<String> = event.keys().cloned().collect();
        let values: Vec<usize> = event.values().copied().collect();
        let joint = self.distribution(population, intervention)?;
        let mkey = (key, vars);
        let mut cache = self.marginals.borrow_mut();
        let table = cache
            .entry(mkey)
            .or_insert_with_key(|(_, vars)| joint.marginal_weights(vars));
        Ok((table.get(&values).copied().unwrap_or(0), joint.total()))
    }
}

impl TermOracle for ScmPair {
    fn cardinality(&self, var: &str) -> Option<usize> {
        self.source.cards.get(var).copied()
    }

    fn probability(
        &self,
        term: &Term,
        values: &BTreeMap<String, usize>,
    ) -> Result<Option<BigRational>, FormulaError> {
        let pick = |set: &crate::diagram::NodeSet| -> Result<BTreeMap<String, usize>, FormulaError> {
            set.iter()
                .map(|v| {
                    values
                        .get(v)
                        .map(|&x| (v.clone(), x))
                        .ok_or_else(|| FormulaError::MissingAssignment(v.clone()))
                })
                .collect()
        };
        for v in term.variables() {
            if !self.source.cards.contains_key(&v) {
                return Err(FormulaError::UnknownVariable(v));
            }
        }
        let intervention = pick(term.do_set())?;
        let given = pick(term.given())?;
        let mut joint_event = pick(term.outcome())?;
        joint_event.extend(given.clone());
        let pop = term.population();
        let (num, total) = self.marginal_weight(pop, &intervention, &joint_event)?;
        let den = if given.is_empty() {
            total
        } else {
            self.marginal_weight(pop, &intervention, &given)?.0
        };
        if den == 0 {
            return Ok(None);
        }
        if num == 0 {
            return Ok(Some(BigRational::zero()));
        }
        Ok(Some(ratio(num, den)))
    }
}
