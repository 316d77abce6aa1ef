//! The graph recursion: `m` copies of `G_n` glued along the connecting graphs.

use crate::error::{Error, Result};
use crate::gluing::Gluing;
use crate::graph::{MarkedGraph, MultiGraph};

pub const DEFAULT_VERTEX_BUDGET: u128 = 1_000_000;

/// Where each piece of the disjoint union went in the glued graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CopyAddressing {
    /// Vertex `v` of copy `i` is union index `copy_offsets[i] + v`.
    pub copy_offsets: Vec<usize>,
    /// Vertex `u` of the connector of edge `e` is union index `connector_offsets[e] + u`.
    pub connector_offsets: Vec<usize>,
    /// Union index → vertex of the glued graph.
    pub final_id: Vec<usize>,
}

impl CopyAddressing {
    pub fn copy_vertex(&self, copy: usize, v: usize) -> usize {
        self.final_id[self.copy_offsets[copy] + v]
    }

    pub fn connector_vertex(&self, edge: usize, u: usize) -> usize {
        self.final_id[self.connector_offsets[edge] + u]
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// The smaller root survives, so every class is represented by its least element.
    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            self.parent[hi] = lo;
        }
    }
}

pub fn apply(d: &Gluing, g: &MarkedGraph) -> Result<MarkedGraph> {
    apply_with_addressing(d, g).map(|(g, _)| g)
}

pub fn apply_with_addressing(d: &Gluing, g: &MarkedGraph) -> Result<(MarkedGraph, CopyAddressing)> {
    if g.k() != d.k() {
        return Err(Error::InvalidArgument(format!(
            "graph has {} marks but the gluing data has k = {}",
            g.k(),
            d.k()
        )));
    }
    let n = g.vertex_count();
    let copy_offsets: Vec<usize> = (0..d.m()).map(|i| i * n).collect();
    let mut connector_offsets = Vec::with_capacity(d.edges().len());
    let mut total = d.m() * n;
    for e in d.edges() {
        connector_offsets.push(total);
        total += e.connector.vertex_count();
    }

    let mut uf = UnionFind::new(total);
    for (ei, e) in d.edges().iter().enumerate() {
        for (&copy, &u) in e.members.iter().zip(&e.attach) {
            uf.union(copy_offsets[copy] + g.marks()[e.label], connector_offsets[ei] + u);
        }
    }

    let mut final_id = vec![usize::MAX; total];
    let mut classes = 0;
    for x in 0..total {
        let r = uf.find(x);
        if r == x {
            final_id[x] = classes;
            classes += 1;
        } else {
            final_id[x] = final_id[r];
        }
    }

    let mut edges = Vec::with_capacity(d.m() * g.graph().edge_count());
    for &off in &copy_offsets {
        edges.extend(g.graph().edges().iter().map(|&(a, b)| (final_id[off + a], final_id[off + b])));
    }
    for (e, &off) in d.edges().iter().zip(&connector_offsets) {
        edges.extend(e.connector.edges().iter().map(|&(a, b)| (final_id[off + a], final_id[off + b])));
    }
    let graph = MultiGraph::new(classes, edges)?;

    let marks: Vec<usize> = (0..d.k())
        .map(|j| {
            let e = d.phi(j);
            final_id[connector_offsets[e] + d.edges()[e].root]
        })
        .collect();
    for a in 0..marks.len() {
        for b in a + 1..marks.len() {
            if marks[a] == marks[b] {
                return Err(Error::MarkCollision(a + 1, b + 1));
            }
        }
    }
    let addressing = CopyAddressing {
        copy_offsets,
        connector_offsets,
        final_id,
    };
    Ok((MarkedGraph::new(graph, marks)?, addressing))
}

/// `|V(G_{n+1})|` from `|V(G_n)|` without building anything.
pub fn next_vertex_count(d: &Gluing, vertices: u128) -> u128 {
    let glue: i128 = d
        .edges()
        .iter()
        .map(|e| e.connector.vertex_count() as i128 - e.members.len() as i128)
        .sum();
    (d.m() as i128 * vertices as i128 + glue) as u128
}

pub fn vertex_counts(d: &Gluing, start: usize, n: usize) -> Vec<u128> {
    let mut out = vec![start as u128];
    for _ in 0..n {
        out.push(next_vertex_count(d, *out.last().unwrap()));
    }
    out
}

pub fn iterate(d: &Gluing, g0: &MarkedGraph, n: usize, vertex_budget: u128) -> Result<MarkedGraph> {
    let counts = vertex_counts(d, g0.vertex_count(), n);
    if let Some(level) = counts.iter().position(|&c| c > vertex_budget) {
        return Err(Error::VertexBudget {
            level,
            projected: counts[level],
            naive: (d.m() as u128).saturating_pow(level as u32) * g0.vertex_count() as u128,
            budget: vertex_budget,
        });
    }
    let mut g = g0.clone();
    for _ in 0..n {
        g = apply(d, &g)?;
    }
    Ok(g)
}
