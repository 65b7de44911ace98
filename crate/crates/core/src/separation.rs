//! d-separation over selection diagrams and the graphical side conditions of
//! the three do-calculus rules.
//!
//! Internally every bidirected edge becomes an explicit latent vertex with two
//! children and every selection target gets its own parentless selection
//! vertex, so the test runs on an ordinary DAG.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::diagram::{NodeSet, Query, SelectionDiagram};
use crate::error::SeparationError;

/// One side of a separation query: a set of observables, optionally joined
/// by the whole bloc of selection nodes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexSet {
    pub nodes: NodeSet,
    pub selection: bool,
}

impl VertexSet {
    pub fn nodes(nodes: NodeSet) -> VertexSet {
        VertexSet {
            nodes,
            selection: false,
        }
    }

    pub fn selection() -> VertexSet {
        VertexSet {
            nodes: NodeSet::new(),
            selection: true,
        }
    }

    fn is_empty(&self) -> bool {
        self.nodes.is_empty() && !self.selection
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Observable,
    Latent,
    Selection,
}

struct Dag {
    labels: Vec<String>,
    kinds: Vec<Kind>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    index: HashMap<String, usize>,
}

impl Dag {
    fn build(d: &SelectionDiagram) -> Dag {
        let mut dag = Dag {
            labels: Vec::new(),
            kinds: Vec::new(),
            parents: Vec::new(),
            children: Vec::new(),
            index: HashMap::new(),
        };
        for v in d.observables() {
            dag.push(v.clone(), Kind::Observable);
        }
        for (a, b) in d.directed_edges() {
            let (ia, ib) = (dag.index[a], dag.index[b]);
            dag.link(ia, ib);
        }
        for (a, b) in d.bidirected_edges() {
            let u = dag.push(format!("U[{a},{b}]"), Kind::Latent);
            let (ia, ib) = (dag.index[a], dag.index[b]);
            dag.link(u, ia);
            dag.link(u, ib);
        }
        for t in d.selection_targets() {
            let s = dag.push(format!("S[{t}]"), Kind::Selection);
            let it = dag.index[t];
            dag.link(s, it);
        }
        dag
    }

    fn push(&mut self, label: String, kind: Kind) -> usize {
        let i = self.labels.len();
        if kind == Kind::Observable {
            self.index.insert(label.clone(), i);
        }
        self.labels.push(label);
        self.kinds.push(kind);
        self.parents.push(Vec::new());
        self.children.push(Vec::new());
        i
    }

    fn link(&mut self, from: usize, to: usize) {
        self.children[from].push(to);
        self.parents[to].push(from);
    }

    fn members(&self, set: &VertexSet) -> Vec<usize> {
        let mut out: Vec<usize> = set.nodes.iter().map(|v| self.index[v]).collect();
        if set.selection {
            out.extend((0..self.labels.len()).filter(|&i| self.kinds[i] == Kind::Selection));
        }
        out
    }

    fn ancestors_of(&self, set: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.labels.len()];
        let mut queue: VecDeque<usize> = set.iter().copied().collect();
        for &v in set {
            seen[v] = true;
        }
        while let Some(v) = queue.pop_front() {
            for &p in &self.parents[v] {
                if !seen[p] {
                    seen[p] = true;
                    queue.push_back(p);
                }
            }
        }
        seen
    }

    /// Reachability over (vertex, direction) states. Returns an active trail
    /// from `a` to `b` given `z`, if one exists.
    fn active_trail(&self, a: &[usize], b: &[usize], z: &[usize]) -> Option<Vec<usize>> {
        const UP: usize = 0; // entered from a child, or a start vertex
        const DOWN: usize = 1; // entered from a parent
        let n = self.labels.len();
        let mut in_z = vec![false; n];
        for &v in z {
            in_z[v] = true;
        }
        let mut in_b = vec![false; n];
        for &v in b {
            in_b[v] = true;
        }
        let anc_z = self.ancestors_of(z);
        let mut pred: Vec<[Option<Option<(usize, usize)>>; 2]> = vec![[None, None]; n];
        let mut queue = VecDeque::new();
        for &s in a {
            if pred[s][UP].is_none() {
                pred[s][UP] = Some(None);
                queue.push_back((s, UP));
            }
        }
        while let Some((v, dir)) = queue.pop_front() {
            if in_b[v] && !in_z[v] {
                let mut trail = vec![v];
                let mut state = (v, dir);
                while let Some(Some(prev)) = pred[state.0][state.1] {
                    trail.push(prev.0);
                    state = prev;
                }
                trail.reverse();
                return Some(trail);
            }
            let mut next = Vec::new();
            if dir == UP && !in_z[v] {
                next.extend(self.parents[v].iter().map(|&p| (p, UP)));
                next.extend(self.children[v].iter().map(|&c| (c, DOWN)));
            } else if dir == DOWN {
                if !in_z[v] {
                    next.extend(self.children[v].iter().map(|&c| (c, DOWN)));
                }
                if anc_z[v] {
                    next.extend(self.parents[v].iter().map(|&p| (p, UP)));
                }
            }
            for (w, d) in next {
                if pred[w][d].is_none() {
                    pred[w][d] = Some(Some((v, dir)));
                    queue.push_back((w, d));
                }
            }
        }
        None
    }
}

fn check_disjoint(sets: &[&NodeSet]) -> Result<(), SeparationError> {
    let mut seen = BTreeSet::new();
    for s in sets {
        for v in s.iter() {
            if !seen.insert(v) {
                return Err(SeparationError::Overlap(v.clone()));
            }
        }
    }
    Ok(())
}

fn check_known(d: &SelectionDiagram, sets: &[&NodeSet]) -> Result<(), SeparationError> {
    for s in sets {
        d.ancestors(s)?;
    }
    Ok(())
}

/// Finds one open path between `a` and `b` given `given`, rendered as vertex
/// labels. Latent confounders appear as `U[a,b]`, selection nodes as `S[v]`.
pub fn open_path(
    d: &SelectionDiagram,
    a: &VertexSet,
    b: &VertexSet,
    given: &NodeSet,
) -> Result<Option<Vec<String>>, SeparationError> {
    check_known(d, &[&a.nodes, &b.nodes, given])?;
    check_disjoint(&[&a.nodes, &b.nodes, given])?;
    if a.selection && b.selection {
        return Err(SeparationError::Overlap("S".to_string()));
    }
    if a.is_empty() || b.is_empty() {
        return Ok(None);
    }
    let dag = Dag::build(d);
    let am = dag.members(a);
    let bm = dag.members(b);
    let zm: Vec<usize> = given.iter().map(|v| dag.index[v]).collect();
    Ok(dag
        .active_trail(&am, &bm, &zm)
        .map(|t| t.into_iter().map(|i| dag.labels[i].clone()).collect()))
}

/// True iff `given` blocks every path between `a` and `b`.
pub fn d_separated_sets(
    d: &SelectionDiagram,
    a: &VertexSet,
    b: &VertexSet,
    given: &NodeSet,
) -> Result<bool, SeparationError> {
    Ok(open_path(d, a, b, given)?.is_none())
}

/// d-separation between sets of observables.
pub fn d_separated(
    d: &SelectionDiagram,
    a: &NodeSet,
    b: &NodeSet,
    given: &NodeSet,
) -> Result<bool, SeparationError> {
    d_separated_sets(
        d,
        &VertexSet::nodes(a.clone()),
        &VertexSet::nodes(b.clone()),
        given,
    )
}

/// d-separation between the bloc of all selection nodes and `b`.
pub fn selection_separated(
    d: &SelectionDiagram,
    b: &NodeSet,
    given: &NodeSet,
) -> Result<bool, SeparationError> {
    d_separated_sets(d, &VertexSet::selection(), &VertexSet::nodes(b.clone()), given)
}

fn union(a: &NodeSet, b: &NodeSet) -> NodeSet {
    a.union(b).cloned().collect()
}

/// Insertion/deletion of observations: (Y ⊥ Z | X, W) in the graph with
/// arrows into X removed.
pub fn rule1_applies(
    d: &SelectionDiagram,
    y: &NodeSet,
    z: &NodeSet,
    x: &NodeSet,
    w: &NodeSet,
) -> Result<bool, SeparationError> {
    check_disjoint(&[y, z, x, w])?;
    let g = d.mutilate(x, &NodeSet::new())?;
    d_separated(&g, y, z, &union(x, w))
}

/// Action/observation exchange: (Y ⊥ Z | X, W) with arrows into X and out of
/// Z removed.
pub fn rule2_applies(
    d: &SelectionDiagram,
    y: &NodeSet,
    z: &NodeSet,
    x: &NodeSet,
    w: &NodeSet,
) -> Result<bool, SeparationError> {
    check_disjoint(&[y, z, x, w])?;
    let g = d.mutilate(x, z)?;
    d_separated(&g, y, z, &union(x, w))
}

/// Insertion/deletion of actions: (Y ⊥ Z | X, W) with arrows into X and into
/// Z(W) removed, where Z(W) are the Z-nodes that are not ancestors of any
/// W-node once arrows into X are removed.
pub fn rule3_applies(
    d: &SelectionDiagram,
    y: &NodeSet,
    z: &NodeSet,
    x: &NodeSet,
    w: &NodeSet,
) -> Result<bool, SeparationError> {
    check_disjoint(&[y, z, x, w])?;
    let gx = d.mutilate(x, &NodeSet::new())?;
    let anc_w = gx.ancestors(w)?;
    let z_w: NodeSet = z.difference(&anc_w).cloned().collect();
    let g = d.mutilate(&union(x, &z_w), &NodeSet::new())?;
    d_separated(&g, y, z, &union(x, w))
}

/// (S ⊥ Y | X, cond) in the diagram with arrows into X removed. A diagram
/// without selection targets passes trivially.
pub fn direct_transport_test(
    d: &SelectionDiagram,
    q: &Query,
    cond: &NodeSet,
) -> Result<bool, SeparationError> {
    q.check_against(d)?;
    check_disjoint(&[q.x(), q.y(), cond])?;
    if d.selection_targets().is_empty() {
        return Ok(true);
    }
    let g = d.mutilate(q.x(), &NodeSet::new())?;
    selection_separated(&g, q.y(), &union(q.x(), cond))
}
