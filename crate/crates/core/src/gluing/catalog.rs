//! Built-in gluing data with their default starting graphs.

use std::collections::BTreeMap;

use super::{ConnectingGraph, GluingData, HyperEdge};
use crate::error::{Error, Result};
use crate::graph::{MarkedGraph, MultiGraph};

pub const CATALOG_NAMES: [&str; 6] = [
    "sierpinski",
    "hanoi",
    "chebyshev",
    "chebyshev-tripod",
    "spod-star",
    "degenerate-demo",
];

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub data: GluingData,
    pub start: MarkedGraph,
}

pub fn catalog(name: &str) -> Result<CatalogEntry> {
    let (name, data, start) = match name {
        "sierpinski" => ("sierpinski", triangle(false), triangle_start()),
        "hanoi" => ("hanoi", triangle(true), triangle_start()),
        "chebyshev" => ("chebyshev", chebyshev(), edge_start()),
        "chebyshev-tripod" => ("chebyshev-tripod", chebyshev(), double_tripod()),
        "spod-star" => ("spod-star", spod_star(), edge_start()),
        "degenerate-demo" => ("degenerate-demo", degenerate(), edge_start()),
        _ => {
            return Err(Error::UnknownCatalog {
                name: name.to_string(),
                known: CATALOG_NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    Ok(CatalogEntry { name, data, start })
}

struct Builder {
    data: GluingData,
}

impl Builder {
    fn new(m: usize, k: usize) -> Self {
        Builder {
            data: GluingData {
                m,
                k,
                edges: Vec::new(),
                connecting: BTreeMap::new(),
                attach: BTreeMap::new(),
                phi: BTreeMap::new(),
            },
        }
    }

    /// Adds an edge whose members attach to the listed connector vertices, in member order.
    fn edge(mut self, id: &str, label: usize, members: &[usize], connector: ConnectingGraph, attach: &[usize]) -> Self {
        self.data.edges.push(HyperEdge {
            id: id.to_string(),
            members: members.iter().copied().collect(),
            label,
        });
        self.data.connecting.insert(id.to_string(), connector);
        self.data
            .attach
            .insert(id.to_string(), members.iter().copied().zip(attach.iter().copied()).collect());
        self
    }

    fn point(self, id: &str, label: usize, members: &[usize]) -> Self {
        let attach = vec![0; members.len()];
        self.edge(id, label, members, ConnectingGraph::singleton(), &attach)
    }

    fn phi(mut self, label: usize, id: &str) -> Self {
        self.data.phi.insert(label, id.to_string());
        self
    }
}

fn triangle(long_connectors: bool) -> GluingData {
    let mut b = Builder::new(3, 3);
    for (id, label, members) in [("e12", 3, [1, 2]), ("e23", 1, [2, 3]), ("e13", 2, [1, 3])] {
        b = if long_connectors {
            b.edge(id, label, &members, ConnectingGraph::from_graph(&MultiGraph::complete(2), 0), &[0, 1])
        } else {
            b.point(id, label, &members)
        };
    }
    b.point("e1", 1, &[1])
        .point("e2", 2, &[2])
        .point("e3", 3, &[3])
        .phi(1, "e1")
        .phi(2, "e2")
        .phi(3, "e3")
        .data
}

fn chebyshev() -> GluingData {
    Builder::new(2, 2)
        .point("a1", 1, &[1])
        .point("a2", 1, &[2])
        .point("b12", 2, &[1, 2])
        .phi(1, "a1")
        .phi(2, "a2")
        .data
}

fn spod_star() -> GluingData {
    let pod = ConnectingGraph::from_graph(&MultiGraph::star(3), 0);
    Builder::new(3, 2)
        .point("a1", 1, &[1])
        .point("a2", 1, &[2])
        .point("a3", 1, &[3])
        .edge("pod", 2, &[1, 2, 3], pod, &[1, 2, 3])
        .phi(1, "a1")
        .phi(2, "a2")
        .data
}

fn degenerate() -> GluingData {
    Builder::new(2, 2)
        .point("a12", 1, &[1, 2])
        .point("b1", 2, &[1])
        .point("b2", 2, &[2])
        .phi(1, "a12")
        .phi(2, "b1")
        .data
}

fn triangle_start() -> MarkedGraph {
    MarkedGraph::new(MultiGraph::complete(3), vec![0, 1, 2]).unwrap()
}

fn edge_start() -> MarkedGraph {
    MarkedGraph::new(MultiGraph::complete(2), vec![0, 1]).unwrap()
}

/// Two tripods whose centers are joined through a shared leaf; marks on one free leaf of each.
pub(crate) fn double_tripod() -> MarkedGraph {
    let g = MultiGraph::new(7, [(0, 1), (0, 2), (0, 3), (4, 3), (4, 5), (4, 6)]).unwrap();
    MarkedGraph::new(g, vec![1, 5]).unwrap()
}
