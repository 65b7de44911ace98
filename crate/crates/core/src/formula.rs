//! Symbolic probability expressions over population-tagged terms.
//!
//! Terms name variables, not values. [`evaluate`] binds values and computes
//! the expression exactly against a [`TermOracle`], typically an
//! [`crate::oracle::ScmPair`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::diagram::NodeSet;
use crate::error::FormulaError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    /// The experimental population; terms may carry interventions.
    Source,
    /// The population of interest; only observational terms.
    Target,
}

/// `P(outcome | do(do_set), given)` in one population.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    population: Population,
    outcome: NodeSet,
    do_set: NodeSet,
    given: NodeSet,
}

impl Term {
    pub fn new(
        population: Population,
        outcome: NodeSet,
        do_set: NodeSet,
        given: NodeSet,
    ) -> Result<Term, FormulaError> {
        if outcome.is_empty() {
            return Err(FormulaError::InvalidTerm("empty outcome".into()));
        }
        if population == Population::Target && !do_set.is_empty() {
            return Err(FormulaError::InvalidTerm(
                "target terms are observational".into(),
            ));
        }
        let overlap = outcome
            .intersection(&do_set)
            .chain(outcome.intersection(&given))
            .chain(do_set.intersection(&given))
            .next();
        if let Some(v) = overlap {
            return Err(FormulaError::InvalidTerm(format!("`{v}` appears twice")));
        }
        Ok(Term {
            population,
            outcome,
            do_set,
            given,
        })
    }

    /// Observational term in the target population.
    pub fn target(outcome: NodeSet, given: NodeSet) -> Result<Term, FormulaError> {
        Term::new(Population::Target, outcome, NodeSet::new(), given)
    }

    /// Term in the source population.
    pub fn source(outcome: NodeSet, do_set: NodeSet, given: NodeSet) -> Result<Term, FormulaError> {
        Term::new(Population::Source, outcome, do_set, given)
    }

    pub fn population(&self) -> Population {
        self.population
    }

    pub fn outcome(&self) -> &NodeSet {
        &self.outcome
    }

    pub fn do_set(&self) -> &NodeSet {
        &self.do_set
    }

    pub fn given(&self) -> &NodeSet {
        &self.given
    }

    pub fn variables(&self) -> NodeSet {
        let mut out = self.outcome.clone();
        out.extend(self.do_set.iter().cloned());
        out.extend(self.given.iter().cloned());
        out
    }

    fn map_names(&self, f: &dyn Fn(&str) -> String) -> Term {
        let m = |s: &NodeSet| s.iter().map(|v| f(v)).collect();
        Term {
            population: self.population,
            outcome: m(&self.outcome),
            do_set: m(&self.do_set),
            given: m(&self.given),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Term(Term),
    Sum { over: NodeSet, body: Box<Expr> },
    Product(Vec<Expr>),
    Quotient { num: Box<Expr>, den: Box<Expr> },
}

/// Name of the model variable behind a possibly primed bound variable.
pub fn base_name(v: &str) -> &str {
    v.trim_end_matches('\'')
}

impl Expr {
    pub fn product(factors: Vec<Expr>) -> Result<Expr, FormulaError> {
        match factors.len() {
            0 => Err(FormulaError::EmptyProduct),
            1 => Ok(factors.into_iter().next().unwrap()),
            _ => Ok(Expr::Product(factors)),
        }
    }

    pub fn quotient(num: Expr, den: Expr) -> Expr {
        Expr::Quotient {
            num: Box::new(num),
            den: Box::new(den),
        }
    }

    pub fn free_variables(&self) -> NodeSet {
        match self {
            Expr::Term(t) => t.variables(),
            Expr::Sum { over, body } => body.free_variables().difference(over).cloned().collect(),
            Expr::Product(fs) => fs.iter().flat_map(|f| f.free_variables()).collect(),
            Expr::Quotient { num, den } => {
                let mut out = num.free_variables();
                out.extend(den.free_variables());
                out
            }
        }
    }

    /// Every term in the expression, in left-to-right order.
    pub fn terms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        self.collect_terms(&mut out);
        out
    }

    fn collect_terms<'a>(&'a self, out: &mut Vec<&'a Term>) {
        match self {
            Expr::Term(t) => out.push(t),
            Expr::Sum { body, .. } => body.collect_terms(out),
            Expr::Product(fs) => fs.iter().for_each(|f| f.collect_terms(out)),
            Expr::Quotient { num, den } => {
                num.collect_terms(out);
                den.collect_terms(out);
            }
        }
    }

    /// Renames shadowing bound variables with primes so that every binder in
    /// scope has a distinct name. Evaluation is unchanged.
    pub fn alpha_renamed(&self) -> Expr {
        let free = self.free_variables();
        let mut in_use: BTreeSet<String> = free.clone();
        let scope: BTreeMap<String, String> = free.iter().map(|v| (v.clone(), v.clone())).collect();
        rename(self, &scope, &mut in_use)
    }

    pub fn render(&self, format: Format) -> String {
        let e = self.alpha_renamed();
        match format {
            Format::Text => text(&e),
            Format::Latex => latex(&e),
            Format::Json => e.to_json().to_string(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Expr::Term(t) => json!({
                "kind": "term",
                "pop": t.population,
                "y": t.outcome,
                "do": t.do_set,
                "given": t.given,
            }),
            Expr::Sum { over, body } => json!({"kind": "sum", "over": over, "body": body.to_json()}),
            Expr::Product(fs) => json!({
                "kind": "product",
                "factors": fs.iter().map(Expr::to_json).collect::<Vec<_>>(),
            }),
            Expr::Quotient { num, den } => {
                json!({"kind": "quotient", "num": num.to_json(), "den": den.to_json()})
            }
        }
    }
}

fn rename(e: &Expr, scope: &BTreeMap<String, String>, in_use: &mut BTreeSet<String>) -> Expr {
    match e {
        Expr::Term(t) => Expr::Term(t.map_names(&|v| scope.get(v).cloned().unwrap_or_else(|| v.to_string()))),
        Expr::Sum { over, body } => {
            let mut inner = scope.clone();
            let mut added = Vec::new();
            let mut new_over = NodeSet::new();
            for v in over {
                let mut name = v.clone();
                while in_use.contains(&name) {
                    name.push('\'');
                }
                in_use.insert(name.clone());
                added.push(name.clone());
                inner.insert(v.clone(), name.clone());
                new_over.insert(name);
            }
            let body = rename(body, &inner, in_use);
            for name in added {
                in_use.remove(&name);
            }
            Expr::Sum {
                over: new_over,
                body: Box::new(body),
            }
        }
        Expr::Product(fs) => Expr::Product(fs.iter().map(|f| rename(f, scope, in_use)).collect()),
        Expr::Quotient { num, den } => {
            Expr::quotient(rename(num, scope, in_use), rename(den, scope, in_use))
        }
    }
}

/// Wraps `e` in a sum over `vars`, merging with an outer sum of `e` when
/// the index sets are disjoint.
pub fn marginalize(e: Expr, vars: &NodeSet) -> Expr {
    if vars.is_empty() {
        return e;
    }
    match e {
        Expr::Sum { over, body } if over.is_disjoint(vars) => Expr::Sum {
            over: over.union(vars).cloned().collect(),
            body,
        },
        other => Expr::Sum {
            over: vars.clone(),
            body: Box::new(other),
        },
    }
}

/// `Π_{v ∈ subset} P(v | predecessors of v in order)` in one population.
pub fn conditional_chain(
    population: Population,
    order: &[String],
    subset: &NodeSet,
) -> Result<Expr, FormulaError> {
    let mut factors = Vec::new();
    let mut before = NodeSet::new();
    for v in order {
        if subset.contains(v) {
            let term = Term::new(
                population,
                NodeSet::from([v.clone()]),
                NodeSet::new(),
                before.clone(),
            )?;
            factors.push(Expr::Term(term));
        }
        before.insert(v.clone());
    }
    if let Some(v) = subset.iter().find(|v| !order.contains(v)) {
        return Err(FormulaError::UnknownVariable(v.clone()));
    }
    Expr::product(factors)
}

/// Sound local rewrites: unused sum indices are dropped, products are
/// flattened, and identical numerator/denominator factors cancel unless that
/// removes the last occurrence of an enclosing sum's index.
pub fn simplify(e: &Expr) -> Expr {
    simplify_under(e, &NodeSet::new())
}

fn simplify_under(e: &Expr, bound: &NodeSet) -> Expr {
    match e {
        Expr::Term(_) => e.clone(),
        Expr::Sum { over, body } => {
            let inner: NodeSet = bound.union(over).cloned().collect();
            let body = simplify_under(body, &inner);
            let used: NodeSet = over.intersection(&body.free_variables()).cloned().collect();
            if used.is_empty() {
                body
            } else {
                Expr::Sum {
                    over: used,
                    body: Box::new(body),
                }
            }
        }
        Expr::Product(fs) => {
            let mut flat = Vec::new();
            for f in fs {
                match simplify_under(f, bound) {
                    Expr::Product(inner) => flat.extend(inner),
                    other => flat.push(other),
                }
            }
            Expr::product(flat).expect("products are never empty")
        }
        Expr::Quotient { num, den } => {
            let factors = |e: Expr| match e {
                Expr::Product(fs) => fs,
                other => vec![other],
            };
            let mut num = factors(simplify_under(num, bound));
            let mut den = factors(simplify_under(den, bound));
            let free = |num: &[Expr], den: &[Expr]| -> NodeSet {
                num.iter()
                    .chain(den)
                    .flat_map(|f| f.free_variables())
                    .filter(|v| bound.contains(v))
                    .collect()
            };
            let before = free(&num, &den);
            let mut i = 0;
            while i < den.len() {
                match num.iter().position(|f| *f == den[i]) {
                    Some(j) if num.len() > 1 => {
                        let (mut n, mut d) = (num.clone(), den.clone());
                        n.remove(j);
                        d.remove(i);
                        if free(&n, &d) == before {
                            num = n;
                            den = d;
                        } else {
                            i += 1;
                        }
                    }
                    _ => i += 1,
                }
            }
            let num = Expr::product(num).expect("numerator keeps a factor");
            match Expr::product(den) {
                Ok(den) => Expr::quotient(num, den),
                Err(_) => num,
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Latex,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Format, String> {
        match s {
            "text" => Ok(Format::Text),
            "latex" => Ok(Format::Latex),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

fn lower(vars: &NodeSet) -> String {
    vars.iter().map(|v| v.to_lowercase()).collect::<Vec<_>>().join(",")
}

fn text_term(t: &Term) -> String {
    let mut parts = Vec::new();
    if !t.do_set.is_empty() {
        parts.push(format!("do({})", lower(&t.do_set)));
    }
    if !t.given.is_empty() {
        parts.push(lower(&t.given));
    }
    let p = match t.population {
        Population::Source => "P",
        Population::Target => "P*",
    };
    if parts.is_empty() {
        format!("{p}({})", lower(&t.outcome))
    } else {
        format!("{p}({}|{})", lower(&t.outcome), parts.join(","))
    }
}

fn text(e: &Expr) -> String {
    match e {
        Expr::Term(t) => text_term(t),
        Expr::Sum { over, body } => {
            if over.len() == 1 {
                format!("Σ_{} {}", lower(over), text(body))
            } else {
                format!("Σ_{{{}}} {}", lower(over), text(body))
            }
        }
        Expr::Product(fs) => {
            let last = fs.len() - 1;
            fs.iter()
                .enumerate()
                .map(|(i, f)| match f {
                    Expr::Sum { .. } if i < last => format!("({})", text(f)),
                    Expr::Quotient { .. } => format!("({})", text(f)),
                    _ => text(f),
                })
                .collect::<Vec<_>>()
                .join(" ")
        }
        Expr::Quotient { num, den } => {
            let side = |e: &Expr| match e {
                Expr::Term(_) => text(e),
                _ => format!("[{}]", text(e)),
            };
            format!("{} / {}", side(num), side(den))
        }
    }
}

fn latex_vars(vars: &NodeSet) -> String {
    vars.iter()
        .map(|v| v.to_lowercase())
        .collect::<Vec<_>>()
        .join(", ")
}

fn latex(e: &Expr) -> String {
    match e {
        Expr::Term(t) => {
            let mut parts = Vec::new();
            if !t.do_set.is_empty() {
                parts.push(format!("do({})", latex_vars(&t.do_set)));
            }
            if !t.given.is_empty() {
                parts.push(latex_vars(&t.given));
            }
            let p = match t.population {
                Population::Source => "P",
                Population::Target => "P^*",
            };
            if parts.is_empty() {
                format!("{p}({})", latex_vars(&t.outcome))
            } else {
                format!("{p}({} \\mid {})", latex_vars(&t.outcome), parts.join(", "))
            }
        }
        Expr::Sum { over, body } => format!("\\sum_{{{}}} {}", latex_vars(over), latex(body)),
        Expr::Product(fs) => {
            let last = fs.len() - 1;
            fs.iter()
                .enumerate()
                .map(|(i, f)| match f {
                    Expr::Sum { .. } if i < last => format!("\\left({}\\right)", latex(f)),
                    _ => latex(f),
                })
                .collect::<Vec<_>>()
                .join(" ")
        }
        Expr::Quotient { num, den } => format!("\\frac{{{}}}{{{}}}", latex(num), latex(den)),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text_term(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(Format::Text))
    }
}

/// Supplies the numbers behind terms.
pub trait TermOracle {
    /// Number of values of a model variable, or `None` if unknown.
    fn cardinality(&self, var: &str) -> Option<usize>;

    /// Exact value of `term` under `values` (which cover the term's
    /// variables). `Ok(None)` means the conditioning event has probability
    /// zero.
    fn probability(
        &self,
        term: &Term,
        values: &BTreeMap<String, usize>,
    ) -> Result<Option<BigRational>, FormulaError>;
}

enum Node<'a> {
    Term(&'a Term),
    Sum(Vec<String>, usize),
    Product(Vec<usize>),
    Quotient(usize, usize, &'a Expr),
}

struct Compiled<'a> {
    nodes: Vec<Node<'a>>,
    free: Vec<Vec<String>>,
}

impl<'a> Compiled<'a> {
    fn compile(&mut self, e: &'a Expr) -> usize {
        let (node, free) = match e {
            Expr::Term(t) => (Node::Term(t), t.variables()),
            Expr::Sum { over, body } => {
                let b = self.compile(body);
                let body_free: NodeSet = self.free[b].iter().cloned().collect();
                let index = over.intersection(&body_free).cloned().collect();
                (Node::Sum(index, b), body_free.difference(over).cloned().collect())
            }
            Expr::Product(fs) => {
                let ids: Vec<usize> = fs.iter().map(|f| self.compile(f)).collect();
                let free = ids.iter().flat_map(|&i| self.free[i].iter().cloned()).collect();
                (Node::Product(ids), free)
            }
            Expr::Quotient { num, den } => {
                let n = self.compile(num);
                let d = self.compile(den);
                let free = self.free[n].iter().chain(&self.free[d]).cloned().collect();
                (Node::Quotient(n, d, e), free)
            }
        };
        self.nodes.push(node);
        self.free.push(free.into_iter().collect());
        self.nodes.len() - 1
    }
}

struct Evaluator<'a, O: TermOracle> {
    program: Compiled<'a>,
    oracle: &'a O,
    memo: Vec<HashMap<Vec<usize>, Result<BigRational, FormulaError>>>,
}

impl<'a, O: TermOracle> Evaluator<'a, O> {
    fn card(&self, var: &str) -> Result<usize, FormulaError> {
        self.oracle
            .cardinality(base_name(var))
            .ok_or_else(|| FormulaError::UnknownVariable(var.to_string()))
    }

    fn eval(&mut self, id: usize, env: &mut HashMap<String, usize>) -> Result<BigRational, FormulaError> {
        let key: Vec<usize> = self.program.free[id].iter().map(|v| env[v]).collect();
        if let Some(hit) = self.memo[id].get(&key) {
            return hit.clone();
        }
        let value = self.compute(id, env);
        self.memo[id].insert(key, value.clone());
        value
    }

    fn compute(&mut self, id: usize, env: &mut HashMap<String, usize>) -> Result<BigRational, FormulaError> {
        match &self.program.nodes[id] {
            Node::Term(t) => {
                let t: &Term = t;
                let values = t
                    .variables()
                    .into_iter()
                    .map(|v| {
                        let x = env[&v];
                        (base_name(&v).to_string(), x)
                    })
                    .collect();
                let base = t.map_names(&|v| base_name(v).to_string());
                self.oracle
                    .probability(&base, &values)?
                    .ok_or_else(|| FormulaError::UndefinedConditional {
                        term: text_term(t),
                    })
            }
            Node::Sum(index, body) => {
                let (index, body) = (index.clone(), *body);
                let cards = index
                    .iter()
                    .map(|v| self.card(v))
                    .collect::<Result<Vec<_>, _>>()?;
                let saved: Vec<Option<usize>> = index.iter().map(|v| env.get(v).copied()).collect();
                let mut digits = vec![0usize; index.len()];
                let mut total = BigRational::zero();
                let result = loop {
                    for (v, &d) in index.iter().zip(&digits) {
                        env.insert(v.clone(), d);
                    }
                    match self.eval(body, env) {
                        Ok(x) => total += x,
                        Err(e) => break Err(e),
                    }
                    if !advance(&mut digits, &cards) {
                        break Ok(total);
                    }
                };
                for (v, old) in index.iter().zip(saved) {
                    match old {
                        Some(x) => env.insert(v.clone(), x),
                        None => env.remove(v),
                    };
                }
                result
            }
            Node::Product(ids) => {
                let ids = ids.clone();
                let mut acc = BigRational::one();
                for f in ids {
                    acc *= self.eval(f, env)?;
                    if acc.is_zero() {
                        break;
                    }
                }
                Ok(acc)
            }
            Node::Quotient(n, d, e) => {
                let (n, d, e) = (*n, *d, *e);
                let den = self.eval(d, env)?;
                if den.is_zero() {
                    return Err(FormulaError::UndefinedConditional { term: text(e) });
                }
                Ok(self.eval(n, env)? / den)
            }
        }
    }
}

/// Odometer increment; false after the last combination.
pub(crate) fn advance(digits: &mut [usize], cards: &[usize]) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < cards[i] {
            return true;
        }
        digits[i] = 0;
    }
    false
}

/// Exact value of `e` with its free variables bound by `assignment`.
pub fn evaluate<O: TermOracle>(
    e: &Expr,
    oracle: &O,
    assignment: &BTreeMap<String, usize>,
) -> Result<BigRational, FormulaError> {
    evaluate_many(e, oracle, std::slice::from_ref(assignment)).map(|mut v| v.remove(0))
}

/// Evaluates `e` under several assignments, sharing intermediate results.
pub fn evaluate_many<O: TermOracle>(
    e: &Expr,
    oracle: &O,
    assignments: &[BTreeMap<String, usize>],
) -> Result<Vec<BigRational>, FormulaError> {
    let mut program = Compiled {
        nodes: Vec::new(),
        free: Vec::new(),
    };
    let root = program.compile(e);
    let memo = (0..program.nodes.len()).map(|_| HashMap::new()).collect();
    let mut ev = Evaluator { program, oracle, memo };
    let mut out = Vec::with_capacity(assignments.len());
    for assignment in assignments {
        let mut env = HashMap::new();
        for v in &ev.program.free[root] {
            let x = *assignment
                .get(v)
                .ok_or_else(|| FormulaError::MissingAssignment(v.clone()))?;
            let card = ev.card(v)?;
            if x >= card {
                return Err(FormulaError::ValueOutOfRange { var: v.clone(), value: x });
            }
            env.insert(v.clone(), x);
        }
        out.push(ev.eval(root, &mut env)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::node_set;

    fn t(pop: Population, y: &[&str], d: &[&str], g: &[&str]) -> Expr {
        Expr::Term(Term::new(pop, node_set(y), node_set(d), node_set(g)).unwrap())
    }

    fn eq1() -> Expr {
        marginalize(
            Expr::product(vec![
                t(Population::Source, &["Y"], &["X"], &["Z"]),
                t(Population::Target, &["Z"], &[], &[]),
            ])
            .unwrap(),
            &node_set(["Z"]),
        )
    }

    #[test]
    fn renders_the_standard_formulas() {
        assert_eq!(eq1().to_string(), "Σ_z P(y|do(x),z) P*(z)");
        assert_eq!(t(Population::Source, &["Y"], &["X"], &[]).to_string(), "P(y|do(x))");
        let eq3 = marginalize(
            Expr::product(vec![
                t(Population::Source, &["Y"], &["X"], &["Z"]),
                t(Population::Target, &["Z"], &[], &["X"]),
            ])
            .unwrap(),
            &node_set(["Z"]),
        );
        assert_eq!(eq3.to_string(), "Σ_z P(y|do(x),z) P*(z|x)");
        assert_eq!(
            eq1().render(Format::Latex),
            "\\sum_{z} P(y \\mid do(x), z) P^*(z)"
        );
    }

    #[test]
    fn json_layout() {
        let v: Value = serde_json::from_str(&eq1().render(Format::Json)).unwrap();
        assert_eq!(v["kind"], "sum");
        assert_eq!(v["over"], json!(["Z"]));
        assert_eq!(v["body"]["factors"][0]["pop"], "source");
        assert_eq!(v["body"]["factors"][0]["do"], json!(["X"]));
    }

    #[test]
    fn target_terms_reject_interventions() {
        assert!(Term::new(Population::Target, node_set(["Y"]), node_set(["X"]), NodeSet::new()).is_err());
        assert!(Term::new(Population::Source, NodeSet::new(), NodeSet::new(), NodeSet::new()).is_err());
    }

    #[test]
    fn chains() {
        let order: Vec<String> = ["X", "Z", "Y"].iter().map(|s| s.to_string()).collect();
        let e = conditional_chain(Population::Target, &order, &node_set(["Z"])).unwrap();
        assert_eq!(e.to_string(), "P*(z|x)");
        assert_eq!(
            conditional_chain(Population::Target, &order, &NodeSet::new()),
            Err(FormulaError::EmptyProduct)
        );
        let e = conditional_chain(Population::Target, &order[..1], &node_set(["X"])).unwrap();
        assert_eq!(e.to_string(), "P*(x)");
    }

    #[test]
    fn marginalization_merges_disjoint_sums() {
        let e = marginalize(marginalize(t(Population::Target, &["A", "B", "C"], &[], &[]), &node_set(["A"])), &node_set(["B"]));
        assert_eq!(e.to_string(), "Σ_{a,b} P*(a,b,c)");
        let same = t(Population::Target, &["A"], &[], &[]);
        assert_eq!(marginalize(same.clone(), &NodeSet::new()), same);
    }

    #[test]
    fn simplification() {
        let body = t(Population::Target, &["Y"], &[], &["X"]);
        let e = Expr::Sum {
            over: node_set(["T"]),
            body: Box::new(body.clone()),
        };
        assert_eq!(simplify(&e), body);
        assert_eq!(simplify(&Expr::Product(vec![body.clone()])), body);
        let a = t(Population::Target, &["A"], &[], &[]);
        let q = Expr::quotient(
            Expr::Product(vec![a.clone(), body.clone()]),
            Expr::Product(vec![a.clone(), t(Population::Target, &["X"], &[], &[])]),
        );
        assert_eq!(simplify(&q).to_string(), "P*(y|x) / P*(x)");
    }

    #[test]
    fn shadowed_binders_get_primes() {
        let inner = marginalize(t(Population::Target, &["Z", "X"], &[], &[]), &node_set(["Z"]));
        let e = marginalize(
            Expr::product(vec![inner, t(Population::Target, &["Z"], &[], &[])]).unwrap(),
            &node_set(["Z"]),
        );
        assert_eq!(e.to_string(), "Σ_z (Σ_z' P*(x,z')) P*(z)");
    }
}
