//! Selection diagrams: observables, directed edges, bidirected (latent
//! confounder) edges and the set of mechanisms targeted by selection nodes.
//!
//! Selection nodes are never materialized as vertices. A selection target
//! `v` stands for an edge `S_v -> v` from a parentless square node.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{DiagramError, Location};

/// Ordered set of node names. Lexicographic order is the canonical order
/// used for rendering and every tie-break.
pub type NodeSet = BTreeSet<String>;

/// Builds a [`NodeSet`] from string slices.
pub fn node_set<I, S>(names: I) -> NodeSet
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    names.into_iter().map(|s| s.as_ref().to_string()).collect()
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SelectionDiagram {
    observables: NodeSet,
    directed: BTreeSet<(String, String)>,
    /// Stored with the lexicographically smaller endpoint first.
    bidirected: BTreeSet<(String, String)>,
    selection: NodeSet,
}

fn ordered_pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl SelectionDiagram {
    /// Builds and validates a diagram.
    pub fn new<N, E, B, S>(
        nodes: N,
        directed: E,
        bidirected: B,
        selection: S,
    ) -> Result<Self, DiagramError>
    where
        N: IntoIterator,
        N::Item: AsRef<str>,
        E: IntoIterator<Item = (N::Item, N::Item)>,
        B: IntoIterator<Item = (N::Item, N::Item)>,
        S: IntoIterator<Item = N::Item>,
    {
        let mut d = SelectionDiagram::default();
        for n in nodes {
            d.add_node(n.as_ref(), Location::none())?;
        }
        for (a, b) in directed {
            d.add_directed(a.as_ref(), b.as_ref(), Location::none())?;
        }
        for (a, b) in bidirected {
            d.add_bidirected(a.as_ref(), b.as_ref(), Location::none())?;
        }
        for t in selection {
            d.add_selection(t.as_ref(), Location::none())?;
        }
        d.check_acyclic()?;
        Ok(d)
    }

    fn add_node(&mut self, name: &str, at: Location) -> Result<(), DiagramError> {
        if !is_identifier(name) {
            return Err(DiagramError::InvalidName {
                name: name.to_string(),
                at,
            });
        }
        if !self.observables.insert(name.to_string()) {
            return Err(DiagramError::DuplicateNode {
                name: name.to_string(),
                at,
            });
        }
        Ok(())
    }

    fn require(&self, name: &str, at: Location) -> Result<(), DiagramError> {
        if self.observables.contains(name) {
            Ok(())
        } else {
            Err(DiagramError::UnknownNode {
                name: name.to_string(),
                at,
            })
        }
    }

    fn add_directed(&mut self, a: &str, b: &str, at: Location) -> Result<(), DiagramError> {
        self.require(a, at)?;
        self.require(b, at)?;
        if a == b {
            return Err(DiagramError::SelfLoop {
                name: a.to_string(),
                at,
            });
        }
        if !self.directed.insert((a.to_string(), b.to_string())) {
            return Err(DiagramError::DuplicateEdge {
                edge: format!("{a} -> {b}"),
                at,
            });
        }
        Ok(())
    }

    fn add_bidirected(&mut self, a: &str, b: &str, at: Location) -> Result<(), DiagramError> {
        self.require(a, at)?;
        self.require(b, at)?;
        if a == b {
            return Err(DiagramError::SelfLoop {
                name: a.to_string(),
                at,
            });
        }
        if !self.bidirected.insert(ordered_pair(a, b)) {
            return Err(DiagramError::DuplicateEdge {
                edge: format!("{a} <-> {b}"),
                at,
            });
        }
        Ok(())
    }

    fn add_selection(&mut self, t: &str, at: Location) -> Result<(), DiagramError> {
        self.require(t, at)?;
        if !self.selection.insert(t.to_string()) {
            return Err(DiagramError::DuplicateEdge {
                edge: format!("S -> {t}"),
                at,
            });
        }
        Ok(())
    }

    fn check_acyclic(&self) -> Result<(), DiagramError> {
        // Colour-marking DFS; the grey stack holds the cycle when one is hit.
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            White,
            Grey,
            Black,
        }
        let mut mark: BTreeMap<&str, Mark> =
            self.observables.iter().map(|n| (n.as_str(), Mark::White)).collect();
        for root in &self.observables {
            if mark[root.as_str()] != Mark::White {
                continue;
            }
            let mut stack: Vec<(&str, Vec<&str>)> = vec![(root, self.children_of(root))];
            mark.insert(root, Mark::Grey);
            while let Some((node, pending)) = stack.last_mut() {
                match pending.pop() {
                    Some(next) => match mark[next] {
                        Mark::White => {
                            mark.insert(next, Mark::Grey);
                            let kids = self.children_of(next);
                            stack.push((next, kids));
                        }
                        Mark::Grey => {
                            let start = stack.iter().position(|(n, _)| *n == next).unwrap();
                            let mut cycle: Vec<String> =
                                stack[start..].iter().map(|(n, _)| n.to_string()).collect();
                            cycle.push(next.to_string());
                            return Err(DiagramError::Cycle { cycle });
                        }
                        Mark::Black => {}
                    },
                    None => {
                        let done = *node;
                        mark.insert(done, Mark::Black);
                        stack.pop();
                    }
                }
            }
        }
        Ok(())
    }

    fn children_of(&self, v: &str) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .directed
            .iter()
            .filter(|(a, _)| a == v)
            .map(|(_, b)| b.as_str())
            .collect();
        // popped from the back, so reverse to visit in lexicographic order
        out.reverse();
        out
    }

    pub fn observables(&self) -> &NodeSet {
        &self.observables
    }

    pub fn directed_edges(&self) -> &BTreeSet<(String, String)> {
        &self.directed
    }

    pub fn bidirected_edges(&self) -> &BTreeSet<(String, String)> {
        &self.bidirected
    }

    pub fn selection_targets(&self) -> &NodeSet {
        &self.selection
    }

    pub fn contains(&self, v: &str) -> bool {
        self.observables.contains(v)
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn has_directed(&self, a: &str, b: &str) -> bool {
        self.directed.contains(&(a.to_string(), b.to_string()))
    }

    pub fn has_bidirected(&self, a: &str, b: &str) -> bool {
        self.bidirected.contains(&ordered_pair(a, b))
    }

    pub fn is_selection_target(&self, v: &str) -> bool {
        self.selection.contains(v)
    }

    pub fn parents(&self, v: &str) -> NodeSet {
        self.directed
            .iter()
            .filter(|(_, b)| b == v)
            .map(|(a, _)| a.clone())
            .collect()
    }

    pub fn children(&self, v: &str) -> NodeSet {
        self.directed
            .iter()
            .filter(|(a, _)| a == v)
            .map(|(_, b)| b.clone())
            .collect()
    }

    /// Nodes joined to `v` by a bidirected edge.
    pub fn spouses(&self, v: &str) -> NodeSet {
        self.bidirected
            .iter()
            .filter_map(|(a, b)| {
                if a == v {
                    Some(b.clone())
                } else if b == v {
                    Some(a.clone())
                } else {
                    None
                }
            })
            .collect()
    }

    fn check_known(&self, set: &NodeSet) -> Result<(), DiagramError> {
        match set.iter().find(|v| !self.observables.contains(*v)) {
            Some(v) => Err(DiagramError::UnknownNode {
                name: v.clone(),
                at: Location::none(),
            }),
            None => Ok(()),
        }
    }

    /// Reflexive-transitive closure over reversed directed edges.
    pub fn ancestors(&self, set: &NodeSet) -> Result<NodeSet, DiagramError> {
        self.check_known(set)?;
        Ok(self.closure(set, |v| self.parents(v)))
    }

    /// Reflexive-transitive closure over directed edges.
    pub fn descendants(&self, set: &NodeSet) -> Result<NodeSet, DiagramError> {
        self.check_known(set)?;
        Ok(self.closure(set, |v| self.children(v)))
    }

    fn closure<F>(&self, set: &NodeSet, step: F) -> NodeSet
    where
        F: Fn(&str) -> NodeSet,
    {
        let mut seen = set.clone();
        let mut queue: VecDeque<String> = set.iter().cloned().collect();
        while let Some(v) = queue.pop_front() {
            for n in step(&v) {
                if seen.insert(n.clone()) {
                    queue.push_back(n);
                }
            }
        }
        seen
    }

    /// Keeps the nodes in `keep` and every edge with both endpoints in it.
    /// Selection targets survive only with their target.
    pub fn induced_subgraph(&self, keep: &NodeSet) -> Result<SelectionDiagram, DiagramError> {
        self.check_known(keep)?;
        Ok(SelectionDiagram {
            observables: keep.clone(),
            directed: self
                .directed
                .iter()
                .filter(|(a, b)| keep.contains(a) && keep.contains(b))
                .cloned()
                .collect(),
            bidirected: self
                .bidirected
                .iter()
                .filter(|(a, b)| keep.contains(a) && keep.contains(b))
                .cloned()
                .collect(),
            selection: self.selection.intersection(keep).cloned().collect(),
        })
    }

    /// Removes directed edges into `cut_incoming` and out of `cut_outgoing`,
    /// and every bidirected edge touching `cut_incoming`. Selection edges are
    /// left in place.
    pub fn mutilate(
        &self,
        cut_incoming: &NodeSet,
        cut_outgoing: &NodeSet,
    ) -> Result<SelectionDiagram, DiagramError> {
        self.check_known(cut_incoming)?;
        self.check_known(cut_outgoing)?;
        Ok(SelectionDiagram {
            observables: self.observables.clone(),
            directed: self
                .directed
                .iter()
                .filter(|(a, b)| !cut_incoming.contains(b) && !cut_outgoing.contains(a))
                .cloned()
                .collect(),
            bidirected: self
                .bidirected
                .iter()
                .filter(|(a, b)| !cut_incoming.contains(a) && !cut_incoming.contains(b))
                .cloned()
                .collect(),
            selection: self.selection.clone(),
        })
    }

    /// Kahn's algorithm with a lexicographic ready queue.
    pub fn topological_order(&self) -> Vec<String> {
        let mut indegree: BTreeMap<&str, usize> =
            self.observables.iter().map(|v| (v.as_str(), 0)).collect();
        for (_, b) in &self.directed {
            *indegree.get_mut(b.as_str()).unwrap() += 1;
        }
        let mut ready: BTreeSet<&str> = indegree
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(v, _)| *v)
            .collect();
        let mut order = Vec::with_capacity(self.observables.len());
        while let Some(v) = ready.pop_first() {
            order.push(v.to_string());
            for (a, b) in &self.directed {
                if a == v {
                    let d = indegree.get_mut(b.as_str()).unwrap();
                    *d -= 1;
                    if *d == 0 {
                        ready.insert(b.as_str());
                    }
                }
            }
        }
        order
    }

    /// Returns a copy with the given selection targets.
    pub fn with_selection(&self, targets: &NodeSet) -> Result<SelectionDiagram, DiagramError> {
        self.check_known(targets)?;
        let mut d = self.clone();
        d.selection = targets.clone();
        Ok(d)
    }

    /// Returns a copy with the given directed and bidirected edges removed.
    pub(crate) fn without_edges(
        &self,
        directed: &BTreeSet<(String, String)>,
        bidirected: &BTreeSet<(String, String)>,
    ) -> SelectionDiagram {
        let mut d = self.clone();
        d.directed.retain(|e| !directed.contains(e));
        d.bidirected.retain(|e| !bidirected.contains(e));
        d
    }

    /// True when every node, edge and selection target of `self` is in `other`.
    pub fn is_edge_subgraph_of(&self, other: &SelectionDiagram) -> bool {
        self.observables.is_subset(&other.observables)
            && self.directed.is_subset(&other.directed)
            && self.bidirected.is_subset(&other.bidirected)
            && self.selection.is_subset(&other.selection)
    }

    /// Parses the line-oriented diagram format.
    pub fn parse(text: &str) -> Result<SelectionDiagram, DiagramError> {
        let mut d = SelectionDiagram::default();
        // Edges may only name declared nodes, but declarations may come on
        // any line, so statements are collected first and applied in order
        // of kind.
        let mut edges: Vec<(&str, Vec<(&str, Location)>)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let tokens = tokenize(content, line_no);
            let Some(((keyword, kw_at), args)) = tokens.split_first().map(|(a, b)| (*a, b)) else {
                continue;
            };
            let arity = match keyword {
                "nodes" => None,
                "edge" | "bidir" => Some(2),
                "sel" => Some(1),
                other => {
                    return Err(DiagramError::Syntax {
                        at: kw_at,
                        message: format!("unknown statement `{other}`"),
                    })
                }
            };
            if let Some(n) = arity {
                if args.len() != n {
                    let at = args.get(n).map(|(_, at)| *at).unwrap_or(Location::at(
                        line_no,
                        content.trim_end().chars().count() + 1,
                    ));
                    return Err(DiagramError::Syntax {
                        at,
                        message: format!("`{keyword}` takes {n} node name(s), found {}", args.len()),
                    });
                }
            } else if args.is_empty() {
                return Err(DiagramError::Syntax {
                    at: kw_at,
                    message: "`nodes` needs at least one node name".to_string(),
                });
            }
            for (name, at) in args {
                if !is_identifier(name) {
                    return Err(DiagramError::Syntax {
                        at: *at,
                        message: format!("`{name}` is not a valid node name"),
                    });
                }
            }
            if keyword == "nodes" {
                for (name, at) in args {
                    d.add_node(name, *at)?;
                }
            } else {
                edges.push((keyword, args.to_vec()));
            }
        }
        for (keyword, args) in &edges {
            match *keyword {
                "edge" => d.add_directed(args[0].0, args[1].0, args[0].1)?,
                "bidir" => d.add_bidirected(args[0].0, args[1].0, args[0].1)?,
                _ => d.add_selection(args[0].0, args[0].1)?,
            }
        }
        d.check_acyclic()?;
        Ok(d)
    }

    /// Canonical text rendering: nodes, edges, bidirected edges, selection
    /// targets, each sorted.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if !self.observables.is_empty() {
            out.push_str("nodes");
            for v in &self.observables {
                out.push(' ');
                out.push_str(v);
            }
            out.push('\n');
        }
        for (a, b) in &self.directed {
            out.push_str(&format!("edge {a} {b}\n"));
        }
        for (a, b) in &self.bidirected {
            out.push_str(&format!("bidir {a} {b}\n"));
        }
        for t in &self.selection {
            out.push_str(&format!("sel {t}\n"));
        }
        out
    }
}

fn tokenize(content: &str, line: usize) -> Vec<(&str, Location)> {
    let mut out = Vec::new();
    // (byte offset, 1-based column) of the token being read
    let mut start: Option<(usize, usize)> = None;
    for (col, (i, c)) in content.char_indices().enumerate() {
        if c.is_whitespace() {
            if let Some((s, sc)) = start.take() {
                out.push((&content[s..i], Location::at(line, sc)));
            }
        } else if start.is_none() {
            start = Some((i, col + 1));
        }
    }
    if let Some((s, sc)) = start {
        out.push((&content[s..], Location::at(line, sc)));
    }
    out
}

impl fmt::Display for SelectionDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl std::str::FromStr for SelectionDiagram {
    type Err = DiagramError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SelectionDiagram::parse(s)
    }
}

/// A causal query: the effect of do(x) on y.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Query {
    x: NodeSet,
    y: NodeSet,
}

impl Query {
    pub fn new(x: NodeSet, y: NodeSet) -> Result<Query, DiagramError> {
        if y.is_empty() {
            return Err(DiagramError::InvalidQuery(
                "the outcome set must not be empty".to_string(),
            ));
        }
        if let Some(v) = x.intersection(&y).next() {
            return Err(DiagramError::InvalidQuery(format!(
                "`{v}` is both a treatment and an outcome"
            )));
        }
        Ok(Query { x, y })
    }

    /// Builds a query and checks that every variable is in `d`.
    pub fn for_diagram(d: &SelectionDiagram, x: NodeSet, y: NodeSet) -> Result<Query, DiagramError> {
        let q = Query::new(x, y)?;
        q.check_against(d)?;
        Ok(q)
    }

    pub fn check_against(&self, d: &SelectionDiagram) -> Result<(), DiagramError> {
        d.check_known(&self.x)?;
        d.check_known(&self.y)
    }

    pub fn x(&self) -> &NodeSet {
        &self.x
    }

    pub fn y(&self) -> &NodeSet {
        &self.y
    }
}
