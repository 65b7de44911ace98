//! The transportability decision procedure.
//!
//! [`transport`] recursively decomposes `P*(y|do(x))` along c-components.
//! Each factor is either identified from target observations, carried over
//! unchanged from a source experiment when the selection nodes are
//! separated from it, or the call fails on a local diagram that contains an
//! s-hedge.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::components::{c_components, SHedge};
use crate::diagram::{NodeSet, Query, SelectionDiagram};
use crate::error::TransportError;
use crate::formula::{marginalize, simplify, Expr, Population, Term};
use crate::separation::direct_transport_test;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// Only target observational terms.
    Trivial,
    /// A single source experimental term.
    Direct,
    General,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TransportResult {
    Formula {
        expr: Expr,
        classification: Classification,
    },
    Failure {
        local: SelectionDiagram,
        component: NodeSet,
        hedge: SHedge,
    },
}

impl TransportResult {
    pub fn formula(&self) -> Option<&Expr> {
        match self {
            TransportResult::Formula { expr, .. } => Some(expr),
            TransportResult::Failure { .. } => None,
        }
    }

    pub fn hedge(&self) -> Option<&SHedge> {
        match self {
            TransportResult::Formula { .. } => None,
            TransportResult::Failure { hedge, .. } => Some(hedge),
        }
    }

    pub fn is_transportable(&self) -> bool {
        self.formula().is_some()
    }
}

/// The distribution a recursive call works with: the target observational
/// distribution marginalized to the local nodes, or an explicit expression
/// over them.
#[derive(Clone)]
enum Dist {
    Observational,
    Modified(Expr),
}

struct Fail {
    local: SelectionDiagram,
    component: NodeSet,
}

fn diff(a: &NodeSet, b: &NodeSet) -> NodeSet {
    a.difference(b).cloned().collect()
}

fn union(a: &NodeSet, b: &NodeSet) -> NodeSet {
    a.union(b).cloned().collect()
}

fn internal<E: std::fmt::Display>(e: E) -> TransportError {
    TransportError::Internal(e.to_string())
}

impl Dist {
    fn marginal(&self, local: &NodeSet, keep: &NodeSet) -> Result<Expr, TransportError> {
        Ok(match self {
            Dist::Observational => {
                Expr::Term(Term::target(keep.clone(), NodeSet::new()).map_err(internal)?)
            }
            Dist::Modified(e) => marginalize(e.clone(), &diff(local, keep)),
        })
    }

    fn restrict(&self, dropped: &NodeSet) -> Dist {
        match self {
            Dist::Observational => Dist::Observational,
            Dist::Modified(e) => Dist::Modified(marginalize(e.clone(), dropped)),
        }
    }

    /// `P(v | given)` under this distribution over `local`.
    fn conditional(&self, local: &NodeSet, v: &str, given: &NodeSet) -> Result<Expr, TransportError> {
        let outcome = NodeSet::from([v.to_string()]);
        Ok(match self {
            Dist::Observational => {
                Expr::Term(Term::target(outcome, given.clone()).map_err(internal)?)
            }
            Dist::Modified(e) => {
                let num = marginalize(e.clone(), &diff(local, &union(given, &outcome)));
                if given.is_empty() {
                    num
                } else {
                    Expr::quotient(num, marginalize(e.clone(), &diff(local, given)))
                }
            }
        })
    }

    /// Product of `P(v | predecessors)` over the members of `subset`, in
    /// the local topological order.
    fn chain(&self, d: &SelectionDiagram, subset: &NodeSet) -> Result<Expr, TransportError> {
        let local = d.observables();
        let mut before = NodeSet::new();
        let mut factors = Vec::new();
        for v in d.topological_order() {
            if subset.contains(&v) {
                factors.push(self.conditional(local, &v, &before)?);
            }
            before.insert(v);
        }
        Expr::product(factors).map_err(internal)
    }
}

struct Solver {
    budget: usize,
}

impl Solver {
    fn sid(
        &mut self,
        y: &NodeSet,
        x: &NodeSet,
        context: &NodeSet,
        p: &Dist,
        d: &SelectionDiagram,
    ) -> Result<Result<Expr, Fail>, TransportError> {
        if self.budget == 0 {
            return Err(TransportError::Internal("recursion did not terminate".into()));
        }
        self.budget -= 1;
        let v = d.observables();

        if x.is_empty() {
            return Ok(Ok(p.marginal(v, y)?));
        }

        let anc = d.ancestors(y)?;
        if anc.len() < v.len() {
            let p = p.restrict(&diff(v, &anc));
            let x = x.intersection(&anc).cloned().collect();
            return self.sid(y, &x, context, &p, &d.induced_subgraph(&anc)?);
        }

        let anc_cut = d.mutilate(x, &NodeSet::new())?.ancestors(y)?;
        let w = diff(&diff(v, x), &anc_cut);
        if !w.is_empty() {
            return self.sid(y, &union(x, &w), context, p, d);
        }

        let rest = d.induced_subgraph(&diff(v, x))?;
        let parts = c_components(&rest);
        if parts.len() > 1 {
            let mut factors = Vec::with_capacity(parts.len());
            for c in &parts {
                match self.sid(c, &diff(v, c), context, p, d)? {
                    Ok(e) => factors.push(e),
                    Err(fail) => return Ok(Err(fail)),
                }
            }
            let e = Expr::product(factors).map_err(internal)?;
            return Ok(Ok(marginalize(e, &diff(v, &union(y, x)))));
        }
        let c0 = parts.into_iter().next().ok_or_else(|| internal("empty component set"))?;

        let whole = c_components(d);
        if whole.len() > 1 {
            if whole.contains(&c0) {
                let e = p.chain(d, &c0)?;
                return Ok(Ok(marginalize(e, &diff(&c0, y))));
            }
            let c1 = whole
                .into_iter()
                .find(|c| c0.is_subset(c))
                .ok_or_else(|| internal("component not nested in a c-component"))?;
            let q = Dist::Modified(p.chain(d, &c1)?);
            let x1 = x.intersection(&c1).cloned().collect();
            let context = union(context, &diff(v, &c1));
            return self.sid(y, &x1, &context, &q, &d.induced_subgraph(&c1)?);
        }

        let query = Query::new(x.clone(), y.clone())?;
        let separated = direct_transport_test(d, &query, &NodeSet::new())
            .map_err(|e| internal(format!("direct-transport test: {e}")))?;
        if separated {
            let term = Term::source(y.clone(), union(x, context), NodeSet::new()).map_err(internal)?;
            return Ok(Ok(Expr::Term(term)));
        }
        Ok(Err(Fail {
            local: d.clone(),
            component: c0,
        }))
    }
}

fn classify(e: &Expr) -> Classification {
    let terms = e.terms();
    if terms.iter().all(|t| t.population() == Population::Target) {
        Classification::Trivial
    } else if matches!(e, Expr::Term(t) if t.given().is_empty()) {
        Classification::Direct
    } else {
        Classification::General
    }
}

/// Variables added as null interventions can stay free in the result, which
/// is then constant in them; averaging under their target marginal binds
/// them without changing the value.
fn close_over_query(e: Expr, q: &Query) -> Result<Expr, TransportError> {
    let stray = diff(&e.free_variables(), &union(q.x(), q.y()));
    if stray.is_empty() {
        return Ok(e);
    }
    let weight = Expr::Term(Term::target(stray.clone(), NodeSet::new()).map_err(internal)?);
    Ok(marginalize(Expr::product(vec![weight, e]).map_err(internal)?, &stray))
}

/// Decides whether `P*(y|do(x))` is transportable in `d` and returns either
/// the simplified transport formula or a failure with its s-hedge.
pub fn transport(q: &Query, d: &SelectionDiagram) -> Result<TransportResult, TransportError> {
    q.check_against(d)?;
    let mut solver = Solver {
        budget: 64 * (d.len() + 1) * (d.len() + 1),
    };
    match solver.sid(q.y(), q.x(), &NodeSet::new(), &Dist::Observational, d)? {
        Ok(e) => {
            let expr = simplify(&close_over_query(e, q)?);
            let classification = classify(&expr);
            Ok(TransportResult::Formula {
                expr,
                classification,
            })
        }
        Err(fail) => {
            let hedge = extract_hedge(&fail.local, &fail.component, q);
            Ok(TransportResult::Failure {
                local: fail.local,
                component: fail.component,
                hedge,
            })
        }
    }
}

/// Identifiability from target observations alone: every mechanism is
/// marked as possibly different, so no source experiment can be reused.
pub fn identify(q: &Query, g: &SelectionDiagram) -> Result<TransportResult, TransportError> {
    if !g.selection_targets().is_empty() {
        let list: Vec<_> = g.selection_targets().iter().cloned().collect();
        return Err(TransportError::HasSelection(list.join(", ")));
    }
    let d = g.with_selection(g.observables())?;
    transport(q, &d)
}

/// Builds an s-hedge from the local diagram and component of a failed call.
///
/// The roots are the childless nodes of the component. Component nodes keep
/// one out-edge inside the component and the remaining nodes one out-edge
/// towards it, both chosen by breadth-first search backwards from the roots.
/// The bidirected edges are cut down to a spanning tree of the component
/// extended to the whole local diagram.
pub fn extract_hedge(local: &SelectionDiagram, c0: &NodeSet, q: &Query) -> SHedge {
    let inner = local
        .induced_subgraph(c0)
        .expect("failure component lies in the local diagram");
    let roots: NodeSet = c0
        .iter()
        .filter(|v| inner.children(v).is_empty())
        .cloned()
        .collect();

    let mut keep_directed = BTreeSet::new();
    let mut reached = roots.clone();
    let mut queue: VecDeque<String> = roots.iter().cloned().collect();
    while let Some(v) = queue.pop_front() {
        for p in inner.parents(&v) {
            if reached.insert(p.clone()) {
                keep_directed.insert((p.clone(), v.clone()));
                queue.push_back(p);
            }
        }
    }
    let mut queue: VecDeque<String> = reached.iter().cloned().collect();
    while let Some(v) = queue.pop_front() {
        for p in local.parents(&v) {
            if reached.insert(p.clone()) {
                keep_directed.insert((p.clone(), v.clone()));
                queue.push_back(p);
            }
        }
    }

    let mut keep_bidirected = BTreeSet::new();
    let mut spanned = NodeSet::new();
    if let Some(start) = c0.iter().next() {
        spanned.insert(start.clone());
        let mut queue = VecDeque::from([start.clone()]);
        while let Some(v) = queue.pop_front() {
            for s in inner.spouses(&v) {
                if spanned.insert(s.clone()) {
                    keep_bidirected.insert(ordered(&v, &s));
                    queue.push_back(s);
                }
            }
        }
    }
    let mut queue: VecDeque<String> = spanned.iter().cloned().collect();
    while let Some(v) = queue.pop_front() {
        for s in local.spouses(&v) {
            if spanned.insert(s.clone()) {
                keep_bidirected.insert(ordered(&v, &s));
                queue.push_back(s);
            }
        }
    }

    let drop_directed = local.directed_edges().difference(&keep_directed).cloned().collect();
    let drop_bidirected = local.bidirected_edges().difference(&keep_bidirected).cloned().collect();
    let f = local.without_edges(&drop_directed, &drop_bidirected);
    let f_prime = f.induced_subgraph(c0).expect("component lies in F");
    SHedge {
        f,
        f_prime,
        roots,
        query: q.clone(),
    }
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}
