//! C-components and the confounded structures that block transport:
//! sC-components, sC-trees, sC-forests and s-hedges.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::diagram::{NodeSet, Query, SelectionDiagram};
use crate::error::DiagramError;

/// Partitions the observables into the connected components of the
/// bidirected graph, ordered by least member.
pub fn c_components(d: &SelectionDiagram) -> Vec<NodeSet> {
    let mut seen = NodeSet::new();
    let mut blocks = Vec::new();
    for v in d.observables() {
        if seen.contains(v) {
            continue;
        }
        let block = bidirected_closure(d, v);
        seen.extend(block.iter().cloned());
        blocks.push(block);
    }
    blocks
}

fn bidirected_closure(d: &SelectionDiagram, start: &str) -> NodeSet {
    let mut block = NodeSet::new();
    block.insert(start.to_string());
    let mut queue = VecDeque::from([start.to_string()]);
    while let Some(v) = queue.pop_front() {
        for s in d.spouses(&v) {
            if block.insert(s.clone()) {
                queue.push_back(s);
            }
        }
    }
    block
}

/// True when the bidirected edges connect every observable.
pub fn is_sc_component(d: &SelectionDiagram) -> bool {
    c_components(d).len() <= 1
}

fn childless(d: &SelectionDiagram) -> NodeSet {
    d.observables()
        .iter()
        .filter(|v| d.children(v).is_empty())
        .cloned()
        .collect()
}

fn at_most_one_child(d: &SelectionDiagram) -> bool {
    d.observables().iter().all(|v| d.children(v).len() <= 1)
}

/// Keeps, for every node outside `roots`, the first out-edge found by a
/// breadth-first search backwards from `roots`, and a breadth-first spanning
/// tree of the bidirected edges. Every node must reach `roots` and the
/// bidirected graph must be connected.
pub(crate) fn forest_normal_form(d: &SelectionDiagram, roots: &NodeSet) -> SelectionDiagram {
    let mut keep_directed = BTreeSet::new();
    let mut reached: NodeSet = roots.clone();
    let mut queue: VecDeque<String> = roots.iter().cloned().collect();
    while let Some(v) = queue.pop_front() {
        for p in d.parents(&v) {
            if reached.insert(p.clone()) {
                keep_directed.insert((p.clone(), v.clone()));
                queue.push_back(p);
            }
        }
    }
    let mut keep_bidirected = BTreeSet::new();
    if let Some(start) = roots.iter().next().or_else(|| d.observables().iter().next()) {
        let mut seen = NodeSet::from([start.clone()]);
        let mut queue = VecDeque::from([start.clone()]);
        while let Some(v) = queue.pop_front() {
            for s in d.spouses(&v) {
                if seen.insert(s.clone()) {
                    let edge = if v < s { (v.clone(), s.clone()) } else { (s.clone(), v.clone()) };
                    keep_bidirected.insert(edge);
                    queue.push_back(s);
                }
            }
        }
    }
    let drop_directed = d.directed_edges().difference(&keep_directed).cloned().collect();
    let drop_bidirected = d.bidirected_edges().difference(&keep_bidirected).cloned().collect();
    d.without_edges(&drop_directed, &drop_bidirected)
}

/// Searches for a `y`-rooted sC-tree among the edge subgraphs of `d`.
///
/// The largest candidate vertex set is the fixpoint of intersecting the
/// ancestors of `y` with the bidirected component of `y`; any sC-tree lives
/// inside it, and within it one child edge per node and a bidirected
/// spanning tree always exist.
pub fn find_sc_tree(d: &SelectionDiagram, y: &str) -> Result<Option<SelectionDiagram>, DiagramError> {
    let root = NodeSet::from([y.to_string()]);
    d.ancestors(&root)?;
    if !d.is_selection_target(y) {
        return Ok(None);
    }
    let mut vertices = d.observables().clone();
    loop {
        let sub = d.induced_subgraph(&vertices)?;
        let anc = sub.ancestors(&root)?;
        let sub = sub.induced_subgraph(&anc)?;
        let next = bidirected_closure(&sub, y);
        if next == vertices {
            break;
        }
        vertices = next;
    }
    let sub = d.induced_subgraph(&vertices)?;
    Ok(Some(forest_normal_form(&sub, &root)))
}

/// Checks that `d` is a `roots`-rooted sC-forest: one sC-component, at most
/// one child per node, some selection target, and `roots` exactly the
/// childless nodes.
pub fn is_sc_forest(d: &SelectionDiagram, roots: &NodeSet) -> bool {
    !d.is_empty()
        && is_sc_component(d)
        && at_most_one_child(d)
        && !d.selection_targets().is_empty()
        && childless(d) == *roots
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CdeVerdict {
    TransportableByTheorem2,
    TransportableByCorollary1,
    Unknown,
}

/// Sufficient criteria for transporting the effect of Pa(y) on y.
pub fn cde_transportable(d: &SelectionDiagram, y: &str) -> Result<CdeVerdict, DiagramError> {
    d.ancestors(&NodeSet::from([y.to_string()]))?;
    if !d.is_selection_target(y) {
        return Ok(CdeVerdict::TransportableByCorollary1);
    }
    Ok(match find_sc_tree(d, y)? {
        None => CdeVerdict::TransportableByTheorem2,
        Some(_) => CdeVerdict::Unknown,
    })
}

/// Looks for an ancestor `w` of some outcome that roots an sC-tree
/// containing a treatment. Returns the root and the tree.
pub fn ancestor_sc_tree(
    d: &SelectionDiagram,
    q: &Query,
) -> Result<Option<(String, SelectionDiagram)>, DiagramError> {
    q.check_against(d)?;
    for w in d.ancestors(q.y())? {
        if let Some(tree) = find_sc_tree(d, &w)? {
            if tree.observables().iter().any(|v| q.x().contains(v)) {
                return Ok(Some((w, tree)));
            }
        }
    }
    Ok(None)
}

/// Witness of non-transportability: nested sC-forests `f_prime ⊆ f`
/// sharing the root set, straddling the treatments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SHedge {
    pub f: SelectionDiagram,
    pub f_prime: SelectionDiagram,
    pub roots: NodeSet,
    pub query: Query,
}

impl SHedge {
    /// Renders both forests in the diagram text format.
    pub fn render(&self) -> String {
        let list = |s: &NodeSet| s.iter().cloned().collect::<Vec<_>>().join(" ");
        format!(
            "# s-hedge for do({}) on {}\n# roots {}\n# F\n{}# F'\n{}",
            list(self.query.x()),
            list(self.query.y()),
            list(&self.roots),
            self.f.render(),
            self.f_prime.render()
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        fn forest(d: &SelectionDiagram) -> serde_json::Value {
            serde_json::json!({
                "nodes": d.observables(),
                "edges": d.directed_edges().iter().map(|(a, b)| [a, b]).collect::<Vec<_>>(),
                "bidirected": d.bidirected_edges().iter().map(|(a, b)| [a, b]).collect::<Vec<_>>(),
                "sel": d.selection_targets(),
            })
        }
        serde_json::json!({
            "do": self.query.x(),
            "on": self.query.y(),
            "roots": self.roots,
            "F": forest(&self.f),
            "F_prime": forest(&self.f_prime),
        })
    }
}

/// Re-derives every s-hedge condition against `d`.
pub fn validate_s_hedge(h: &SHedge, d: &SelectionDiagram) -> bool {
    let x = h.query.x();
    if h.query.check_against(d).is_err()
        || !h.f.is_edge_subgraph_of(d)
        || !h.f_prime.is_edge_subgraph_of(&h.f)
        || !h.f.observables().iter().any(|v| x.contains(v))
        || h.f_prime.observables().iter().any(|v| x.contains(v))
        || h.f_prime.selection_targets().is_empty()
        || !is_sc_forest(&h.f, &h.roots)
        || !is_sc_forest(&h.f_prime, &h.roots)
    {
        return false;
    }
    let Ok(gx) = d.mutilate(x, &NodeSet::new()) else {
        return false;
    };
    match gx.ancestors(h.query.y()) {
        Ok(anc) => h.roots.is_subset(&anc),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::node_set;

    fn parse(s: &str) -> SelectionDiagram {
        SelectionDiagram::parse(s).unwrap()
    }

    fn sbow() -> SelectionDiagram {
        parse("nodes X Y\nedge X Y\nbidir X Y\nsel Y")
    }

    fn fig4() -> SelectionDiagram {
        parse(
            "nodes A B C X Y\nedge B A\nedge A X\nedge X Y\nedge C Y\n\
             bidir C Y\nbidir X Y\nbidir A C\nbidir B X\nsel C",
        )
    }

    fn fig4_hedge() -> SHedge {
        let d = fig4();
        let f_prime = d.induced_subgraph(&node_set(["C", "Y"])).unwrap();
        SHedge {
            f: d,
            f_prime,
            roots: node_set(["Y"]),
            query: Query::new(node_set(["X"]), node_set(["Y"])).unwrap(),
        }
    }

    #[test]
    fn components_of_small_diagrams() {
        assert_eq!(c_components(&sbow()), vec![node_set(["X", "Y"])]);
        let chain = parse("nodes X Z Y\nedge X Z\nedge Z Y\nsel Z");
        assert_eq!(
            c_components(&chain),
            vec![node_set(["X"]), node_set(["Y"]), node_set(["Z"])]
        );
        assert!(!is_sc_component(&chain));
        assert!(is_sc_component(&sbow()));
        assert!(is_sc_component(&parse("nodes A")));
    }

    #[test]
    fn sc_trees() {
        assert_eq!(find_sc_tree(&sbow(), "Y").unwrap(), Some(sbow()));
        let fig1a = parse("nodes X Y Z\nedge Z X\nedge Z Y\nedge X Y\nsel Z");
        assert_eq!(find_sc_tree(&fig1a, "Y").unwrap(), None);
        let fig3b = parse("nodes X W Y\nedge X W\nedge W Y\nbidir X W\nsel W");
        let tree = find_sc_tree(&fig3b, "W").unwrap().unwrap();
        assert_eq!(tree.observables(), &node_set(["W", "X"]));
        assert!(is_sc_forest(&tree, &node_set(["W"])));
    }

    #[test]
    fn cde_criteria() {
        let fig1a = parse("nodes X Y Z\nedge Z X\nedge Z Y\nedge X Y\nsel Z");
        assert_eq!(cde_transportable(&fig1a, "Y").unwrap(), CdeVerdict::TransportableByCorollary1);
        assert_eq!(cde_transportable(&sbow(), "Y").unwrap(), CdeVerdict::Unknown);
    }

    #[test]
    fn fig4_forests_and_hedge() {
        let h = fig4_hedge();
        assert!(is_sc_forest(&h.f_prime, &node_set(["Y"])));
        assert!(is_sc_forest(&h.f, &node_set(["Y"])));
        assert!(validate_s_hedge(&h, &fig4()));
        let swapped = SHedge {
            f: h.f_prime.clone(),
            f_prime: h.f.clone(),
            ..h.clone()
        };
        assert!(!validate_s_hedge(&swapped, &fig4()));
        let treated = SHedge {
            query: Query::new(node_set(["C"]), node_set(["Y"])).unwrap(),
            ..h
        };
        assert!(!validate_s_hedge(&treated, &fig4()));
    }

    #[test]
    fn chain_is_not_a_forest() {
        let chain = parse("nodes X Z Y\nedge X Z\nedge Z Y\nsel Z");
        assert!(!is_sc_forest(&chain, &node_set(["Y"])));
    }

    #[test]
    fn ancestor_tree_in_fig3b() {
        let fig3b = parse("nodes X W Y\nedge X W\nedge W Y\nbidir X W\nsel W");
        let q = Query::new(node_set(["X"]), node_set(["Y"])).unwrap();
        let (w, _) = ancestor_sc_tree(&fig3b, &q).unwrap().unwrap();
        assert_eq!(w, "W");
    }
}
