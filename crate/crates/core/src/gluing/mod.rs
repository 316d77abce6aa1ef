//! Gluing data: the scheme hypergraph `H`, connecting graphs with roots,
//! attaching maps and the labeling map `Φ`.
//!
//! [`GluingData`] is the plain file form and may be inconsistent; [`validate`]
//! lists everything wrong with it. [`Gluing`] is the checked, index-based view
//! every other module works with, and can only be built from valid data.
//!
//! Copy indices and labels are 1-based in [`GluingData`] (matching the file
//! format) and 0-based in [`Gluing`].

mod catalog;
mod labels;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{MarkedGraph, MultiGraph};

pub use catalog::{catalog, CatalogEntry, CATALOG_NAMES};
pub use labels::{
    Classification, CollisionTable, FmNormalization, LabelDynamics, Portrait, PortraitArc,
};

/// An edge of the gluing scheme: the copies it joins and the label of the marks it joins.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperEdge {
    pub id: String,
    pub members: BTreeSet<usize>,
    pub label: usize,
}

/// A connecting graph in file form: vertex count, edge list and root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectingGraph {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub root: usize,
}

impl ConnectingGraph {
    pub fn singleton() -> Self {
        ConnectingGraph {
            vertices: 1,
            edges: Vec::new(),
            root: 0,
        }
    }

    pub fn from_graph(g: &MultiGraph, root: usize) -> Self {
        ConnectingGraph {
            vertices: g.vertex_count(),
            edges: g.edges().to_vec(),
            root,
        }
    }

    pub fn is_singleton(&self) -> bool {
        self.vertices == 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluingData {
    pub m: usize,
    pub k: usize,
    pub edges: Vec<HyperEdge>,
    /// Edge id → connecting graph.
    pub connecting: BTreeMap<String, ConnectingGraph>,
    /// Edge id → (member copy index → connector vertex).
    pub attach: BTreeMap<String, BTreeMap<usize, usize>>,
    /// Label → edge id.
    pub phi: BTreeMap<usize, String>,
}

impl GluingData {
    /// Pretty JSON with sorted keys; identical data always gives identical bytes.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("gluing data serializes");
        let mut s = serde_json::to_string_pretty(&value).expect("json value serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// One way in which a [`GluingData`] fails the definition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    ParameterTooSmall { name: &'static str, value: usize },
    DuplicateEdgeId(String),
    EmptyEdge(String),
    MemberOutOfRange { edge: String, member: usize },
    LabelOutOfRange { edge: String, label: usize },
    /// Copy `copy` lies in `count` edges labeled `label` instead of exactly one.
    BadPartition { label: usize, copy: usize, count: usize },
    MissingConnector(String),
    UnknownConnector(String),
    EmptyConnector(String),
    ConnectorEdgeOutOfRange { edge: String, endpoint: usize },
    DisconnectedConnector(String),
    RootOutOfRange { edge: String, root: usize },
    MissingAttach { edge: String, member: usize },
    DanglingAttach { edge: String, member: usize },
    AttachOutOfRange { edge: String, member: usize, vertex: usize },
    PhiMissing(usize),
    PhiLabelOutOfRange(usize),
    PhiUnknownEdge { label: usize, edge: String },
    PhiNotInjective { labels: (usize, usize), edge: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            ParameterTooSmall { name, value } => write!(f, "parameter {name} = {value} must be at least 2"),
            DuplicateEdgeId(id) => write!(f, "edge id {id:?} is used twice"),
            EmptyEdge(id) => write!(f, "edge {id:?} has no members"),
            MemberOutOfRange { edge, member } => write!(f, "edge {edge:?} has member {member} outside 1..=m"),
            LabelOutOfRange { edge, label } => write!(f, "edge {edge:?} has label {label} outside 1..=k"),
            BadPartition { label, copy, count } => write!(
                f,
                "label {label} edges do not partition the copies: copy {copy} lies in {count} of them"
            ),
            MissingConnector(id) => write!(f, "edge {id:?} has no connecting graph"),
            UnknownConnector(id) => write!(f, "connecting graph {id:?} belongs to no edge"),
            EmptyConnector(id) => write!(f, "connecting graph of {id:?} is empty"),
            ConnectorEdgeOutOfRange { edge, endpoint } => {
                write!(f, "connecting graph of {edge:?} has an edge endpoint {endpoint} out of range")
            }
            DisconnectedConnector(id) => write!(f, "connecting graph of {id:?} is disconnected"),
            RootOutOfRange { edge, root } => write!(f, "connecting graph of {edge:?} has root {root} out of range"),
            MissingAttach { edge, member } => write!(f, "attaching map of {edge:?} misses member {member}"),
            DanglingAttach { edge, member } => {
                write!(f, "attaching map of {edge:?} has entry {member}, which is not a member")
            }
            AttachOutOfRange { edge, member, vertex } => write!(
                f,
                "attaching map of {edge:?} sends member {member} to vertex {vertex}, outside the connecting graph"
            ),
            PhiMissing(label) => write!(f, "phi does not assign label {label}"),
            PhiLabelOutOfRange(label) => write!(f, "phi assigns label {label} outside 1..=k"),
            PhiUnknownEdge { label, edge } => write!(f, "phi sends label {label} to unknown edge {edge:?}"),
            PhiNotInjective { labels, edge } => write!(
                f,
                "phi is not injective: labels {} and {} both map to edge {edge:?}",
                labels.0, labels.1
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return writeln!(f, "valid");
        }
        for v in &self.violations {
            writeln!(f, "- {v}")?;
        }
        Ok(())
    }
}

pub fn validate(d: &GluingData) -> ValidationReport {
    use Violation::*;
    let mut out = Vec::new();
    if d.m < 2 {
        out.push(ParameterTooSmall { name: "m", value: d.m });
    }
    if d.k < 2 {
        out.push(ParameterTooSmall { name: "k", value: d.k });
    }

    let mut ids = BTreeSet::new();
    for e in &d.edges {
        if !ids.insert(e.id.as_str()) {
            out.push(DuplicateEdgeId(e.id.clone()));
        }
        if e.members.is_empty() {
            out.push(EmptyEdge(e.id.clone()));
        }
        for &w in &e.members {
            if w == 0 || w > d.m {
                out.push(MemberOutOfRange { edge: e.id.clone(), member: w });
            }
        }
        if e.label == 0 || e.label > d.k {
            out.push(LabelOutOfRange { edge: e.id.clone(), label: e.label });
        }
    }

    for label in 1..=d.k {
        for copy in 1..=d.m {
            let count = d
                .edges
                .iter()
                .filter(|e| e.label == label && e.members.contains(&copy))
                .count();
            if count != 1 {
                out.push(BadPartition { label, copy, count });
            }
        }
    }

    for e in &d.edges {
        let Some(c) = d.connecting.get(&e.id) else {
            out.push(MissingConnector(e.id.clone()));
            continue;
        };
        if c.vertices == 0 {
            out.push(EmptyConnector(e.id.clone()));
            continue;
        }
        let bad_endpoint = c
            .edges
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .find(|&v| v >= c.vertices);
        match bad_endpoint {
            Some(endpoint) => out.push(ConnectorEdgeOutOfRange { edge: e.id.clone(), endpoint }),
            None => {
                let g = MultiGraph::new(c.vertices, c.edges.iter().copied()).unwrap();
                if !g.is_connected() {
                    out.push(DisconnectedConnector(e.id.clone()));
                }
            }
        }
        if c.root >= c.vertices {
            out.push(RootOutOfRange { edge: e.id.clone(), root: c.root });
        }
        let attach = d.attach.get(&e.id);
        for &w in &e.members {
            match attach.and_then(|a| a.get(&w)) {
                None => out.push(MissingAttach { edge: e.id.clone(), member: w }),
                Some(&v) if v >= c.vertices => out.push(AttachOutOfRange {
                    edge: e.id.clone(),
                    member: w,
                    vertex: v,
                }),
                Some(_) => {}
            }
        }
        for &w in attach.into_iter().flat_map(|a| a.keys()) {
            if !e.members.contains(&w) {
                out.push(DanglingAttach { edge: e.id.clone(), member: w });
            }
        }
    }
    for id in d.connecting.keys() {
        if !ids.contains(id.as_str()) {
            out.push(UnknownConnector(id.clone()));
        }
    }
    for (id, a) in &d.attach {
        if !ids.contains(id.as_str()) {
            for &w in a.keys() {
                out.push(DanglingAttach { edge: id.clone(), member: w });
            }
        }
    }

    for label in 1..=d.k {
        if !d.phi.contains_key(&label) {
            out.push(PhiMissing(label));
        }
    }
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for (&label, id) in &d.phi {
        if label == 0 || label > d.k {
            out.push(PhiLabelOutOfRange(label));
        }
        if !ids.contains(id.as_str()) {
            out.push(PhiUnknownEdge { label, edge: id.clone() });
        }
        if let Some(&other) = seen.get(id.as_str()) {
            out.push(PhiNotInjective { labels: (other, label), edge: id.clone() });
        } else {
            seen.insert(id, label);
        }
    }

    ValidationReport { violations: out }
}

/// A validated edge in index form: copies and label are 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub members: Vec<usize>,
    pub label: usize,
    pub connector: MultiGraph,
    pub root: usize,
    /// `attach[t]` is the connector vertex glued to the mark of copy `members[t]`.
    pub attach: Vec<usize>,
}

/// Gluing data that passed [`validate`], indexed for fast lookup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gluing {
    data: GluingData,
    edges: Vec<Edge>,
    phi: Vec<usize>,
    phi_inverse: Vec<Option<usize>>,
    edge_at: Vec<Vec<usize>>,
}

impl Gluing {
    pub fn new(data: GluingData) -> Result<Self> {
        let report = validate(&data);
        if !report.is_valid() {
            return Err(Error::InvalidGluing(report));
        }
        let index_of: BTreeMap<&str, usize> = data
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.as_str(), i))
            .collect();
        let edges: Vec<Edge> = data
            .edges
            .iter()
            .map(|e| {
                let c = &data.connecting[&e.id];
                let a = &data.attach[&e.id];
                Edge {
                    id: e.id.clone(),
                    members: e.members.iter().map(|w| w - 1).collect(),
                    label: e.label - 1,
                    connector: MultiGraph::new(c.vertices, c.edges.iter().copied()).unwrap(),
                    root: c.root,
                    attach: e.members.iter().map(|w| a[w]).collect(),
                }
            })
            .collect();
        let phi: Vec<usize> = (1..=data.k).map(|j| index_of[data.phi[&j].as_str()]).collect();
        let mut phi_inverse = vec![None; edges.len()];
        for (j, &e) in phi.iter().enumerate() {
            phi_inverse[e] = Some(j);
        }
        let mut edge_at = vec![vec![usize::MAX; data.k]; data.m];
        for (i, e) in edges.iter().enumerate() {
            for &w in &e.members {
                edge_at[w][e.label] = i;
            }
        }
        Ok(Gluing {
            data,
            edges,
            phi,
            phi_inverse,
            edge_at,
        })
    }

    pub fn data(&self) -> &GluingData {
        &self.data
    }

    pub fn m(&self) -> usize {
        self.data.m
    }

    pub fn k(&self) -> usize {
        self.data.k
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Index of the edge `Φ(j)` for the 0-based label `j`.
    pub fn phi(&self, label: usize) -> usize {
        self.phi[label]
    }

    /// The 0-based label whose new mark sits at the root of edge `e`, if any.
    pub fn root_label(&self, edge: usize) -> Option<usize> {
        self.phi_inverse[edge]
    }

    /// The unique edge with the given label containing the given copy.
    pub fn edge_at(&self, copy: usize, label: usize) -> usize {
        self.edge_at[copy][label]
    }

    /// Every connecting graph replaced by a single vertex; `H` and `Φ` unchanged.
    pub fn simplify(&self) -> Gluing {
        let mut data = self.data.clone();
        for c in data.connecting.values_mut() {
            *c = ConnectingGraph::singleton();
        }
        for a in data.attach.values_mut() {
            for v in a.values_mut() {
                *v = 0;
            }
        }
        Gluing::new(data).expect("simplified data stays valid")
    }

    /// Pairwise mark distances in `G_n` built from the simplified data.
    pub fn separation_distances(
        &self,
        g0: &MarkedGraph,
        n: usize,
        vertex_budget: u128,
    ) -> Result<Vec<Vec<Option<usize>>>> {
        let g = crate::recursion::iterate(&self.simplify(), g0, n, vertex_budget)?;
        Ok(g.mark_distances())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sierpinski() -> GluingData {
        catalog("sierpinski").unwrap().data
    }

    #[test]
    fn catalog_entries_validate() {
        for name in CATALOG_NAMES {
            let entry = catalog(name).unwrap();
            assert!(validate(&entry.data).is_valid(), "{name}: {}", validate(&entry.data));
        }
    }

    #[test]
    fn deleting_a_label_one_edge_breaks_the_partition() {
        let mut d = sierpinski();
        let pos = d.edges.iter().position(|e| e.label == 1).unwrap();
        let removed = d.edges.remove(pos);
        d.connecting.remove(&removed.id);
        d.attach.remove(&removed.id);
        let report = validate(&d);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::BadPartition { label: 1, count: 0, .. })));
        assert!(matches!(Gluing::new(d), Err(Error::InvalidGluing(_))));
    }

    #[test]
    fn non_injective_phi_is_rejected() {
        let mut d = sierpinski();
        let target = d.phi[&1].clone();
        d.phi.insert(2, target);
        let report = validate(&d);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::PhiNotInjective { labels: (1, 2), .. })));
    }

    /// Each mutation named in the violation list, applied to a valid datum.
    #[test]
    fn single_field_mutations_are_rejected() {
        let base = catalog("hanoi").unwrap().data;
        let id = base.edges[0].id.clone();
        let mutations: Vec<(&str, Box<dyn Fn(&mut GluingData)>)> = vec![
            ("disconnected connector", Box::new(|d: &mut GluingData| {
                d.connecting.get_mut(&id).unwrap().edges.clear();
            })),
            ("root out of range", Box::new(|d: &mut GluingData| {
                d.connecting.get_mut(&id).unwrap().root = 7;
            })),
            ("dangling attach", Box::new(|d: &mut GluingData| {
                d.attach.get_mut(&id).unwrap().insert(3, 0);
            })),
            ("missing attach", Box::new(|d: &mut GluingData| {
                let first = *d.edges[0].members.iter().next().unwrap();
                d.attach.get_mut(&id).unwrap().remove(&first);
            })),
            ("attach out of range", Box::new(|d: &mut GluingData| {
                let first = *d.edges[0].members.iter().next().unwrap();
                d.attach.get_mut(&id).unwrap().insert(first, 9);
            })),
            ("label out of range", Box::new(|d: &mut GluingData| d.edges[0].label = 4)),
            ("empty edge", Box::new(|d: &mut GluingData| d.edges[0].members.clear())),
            ("phi unknown edge", Box::new(|d: &mut GluingData| {
                d.phi.insert(1, "nope".into());
            })),
            ("phi missing", Box::new(|d: &mut GluingData| {
                d.phi.remove(&3);
            })),
            ("k too small", Box::new(|d: &mut GluingData| d.k = 1)),
            ("empty connector", Box::new(|d: &mut GluingData| {
                *d.connecting.get_mut(&id).unwrap() = ConnectingGraph { vertices: 0, edges: vec![], root: 0 };
            })),
        ];
        for (what, mutate) in mutations {
            let mut d = base.clone();
            mutate(&mut d);
            assert!(!validate(&d).is_valid(), "{what} was accepted");
        }
    }

    #[test]
    fn json_is_sorted_and_round_trips() {
        let d = catalog("hanoi").unwrap().data;
        let json = d.to_json();
        assert_eq!(GluingData::from_json(&json).unwrap(), d);
        assert_eq!(GluingData::from_json(&json).unwrap().to_json(), json);
        let keys: Vec<usize> = ["\"attach\"", "\"connecting\"", "\"edges\"", "\"k\"", "\"m\"", "\"phi\""]
            .iter()
            .map(|k| json.find(k).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn simplify_maps_hanoi_to_sierpinski() {
        let hanoi = Gluing::new(catalog("hanoi").unwrap().data).unwrap();
        let sierpinski = Gluing::new(sierpinski()).unwrap();
        assert_eq!(hanoi.simplify(), sierpinski);
        assert_eq!(sierpinski.simplify(), sierpinski);
        let cheb = Gluing::new(catalog("chebyshev").unwrap().data).unwrap();
        assert_eq!(cheb.simplify(), cheb);
    }

    #[test]
    fn separation_distances_grow() {
        let entry = catalog("sierpinski").unwrap();
        let g = Gluing::new(entry.data).unwrap();
        let d1 = g.separation_distances(&entry.start, 1, 1 << 20).unwrap();
        let d2 = g.separation_distances(&entry.start, 2, 1 << 20).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let (e1, e2) = if a == b { (0, 0) } else { (2, 4) };
                assert_eq!(d1[a][b], Some(e1));
                assert_eq!(d2[a][b], Some(e2));
            }
        }
        let entry = catalog("chebyshev").unwrap();
        let g = Gluing::new(entry.data).unwrap();
        assert_eq!(g.separation_distances(&entry.start, 3, 1 << 20).unwrap()[0][1], Some(8));
        assert!(matches!(
            g.separation_distances(&entry.start, 30, 1000),
            Err(Error::VertexBudget { .. })
        ));
    }

    #[test]
    fn expanding_data_separates_marks() {
        for name in CATALOG_NAMES {
            let entry = catalog(name).unwrap();
            let g = Gluing::new(entry.data).unwrap();
            if !g.classify().expanding {
                continue;
            }
            let dists: Vec<_> = (1..=3)
                .map(|n| g.separation_distances(&entry.start, n, 1 << 20).unwrap())
                .collect();
            for a in 0..g.k() {
                for b in (0..g.k()).filter(|&b| b != a) {
                    let seq: Vec<usize> = dists.iter().map(|d| d[a][b].unwrap()).collect();
                    assert!(seq.windows(2).all(|w| w[0] < w[1]), "{name}: {seq:?}");
                }
            }
        }
    }
}
