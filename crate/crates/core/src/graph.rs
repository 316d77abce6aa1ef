//! Multigraphs, marked graphs and mark assignments, with the plain-text and DOT formats.

use std::collections::VecDeque;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite multigraph on vertices `0..vertex_count`.
///
/// Edges are stored as `(a, b)` with `a <= b`, sorted, so that equality does not
/// depend on insertion order. Parallel edges and loops are kept.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl MultiGraph {
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut normalized = Vec::new();
        for (a, b) in edges {
            if a >= vertex_count || b >= vertex_count {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) has an endpoint outside 0..{vertex_count}"
                )));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        Ok(MultiGraph {
            vertex_count,
            edges: normalized,
        })
    }

    pub fn edgeless(vertex_count: usize) -> Self {
        MultiGraph {
            vertex_count,
            edges: Vec::new(),
        }
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
        MultiGraph::new(n, edges).expect("complete graph edges are in range")
    }

    pub fn path(n: usize) -> Self {
        MultiGraph::new(n, (1..n).map(|v| (v - 1, v))).expect("path edges are in range")
    }

    /// `K_{1,s}` with the center at vertex 0 and leaves `1..=s`.
    pub fn star(leaves: usize) -> Self {
        MultiGraph::new(leaves + 1, (1..=leaves).map(|v| (0, v))).expect("star edges are in range")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_loop(&self, v: usize) -> bool {
        self.edges.iter().any(|&(a, b)| a == v && b == v)
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).is_ok()
    }

    /// Sorted, deduplicated neighbor lists; a loop lists the vertex as its own neighbor.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            if a != b {
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Vertex degree counting edge multiplicity (a loop counts twice).
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|&(a, b)| usize::from(a == v) + usize::from(b == v))
            .sum()
    }

    /// BFS distances from `source`; `None` for unreachable vertices.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let adj = self.adjacency();
        let mut dist = vec![None; self.vertex_count];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &w in &adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count == 0 || self.distances_from(0).iter().all(Option::is_some)
    }

    /// The induced subgraph on the vertices not in `removed`, reindexed in increasing order.
    pub fn without_vertices(&self, removed: &[usize]) -> MultiGraph {
        let mut new_index = vec![None; self.vertex_count];
        let mut next = 0;
        for (v, slot) in new_index.iter_mut().enumerate() {
            if !removed.contains(&v) {
                *slot = Some(next);
                next += 1;
            }
        }
        let edges = self
            .edges
            .iter()
            .filter_map(|&(a, b)| Some((new_index[a]?, new_index[b]?)));
        MultiGraph::new(next, edges).expect("reindexed edges are in range")
    }

    /// Same graph with vertex `v` renamed to `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> MultiGraph {
        MultiGraph::new(
            self.vertex_count,
            self.edges.iter().map(|&(a, b)| (perm[a], perm[b])),
        )
        .expect("permutation stays in range")
    }
}

/// A 0/1 value on each of the `k` marks; bit `j` is the value at the mark labeled `j + 1`.
///
/// Assignments are ordered by reading the bits as a binary number with label 1
/// as the least significant bit, which is also the storage order of
/// [`PolyVector`](crate::polyengine::PolyVector) entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    k: usize,
    index: usize,
}

impl Assignment {
    pub fn from_index(k: usize, index: usize) -> Self {
        assert!(k < usize::BITS as usize && index < (1 << k), "assignment index out of range");
        Assignment { k, index }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let index = bits
            .iter()
            .enumerate()
            .map(|(j, &b)| usize::from(b) << j)
            .sum();
        Assignment { k: bits.len(), index }
    }

    pub fn zeros(k: usize) -> Self {
        Assignment { k, index: 0 }
    }

    pub fn ones(k: usize) -> Self {
        Assignment {
            k,
            index: (1 << k) - 1,
        }
    }

    /// All `2^k` assignments in increasing order.
    pub fn all(k: usize) -> impl Iterator<Item = Assignment> {
        (0..1usize << k).map(move |index| Assignment { k, index })
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn bit(&self, j: usize) -> bool {
        self.index >> j & 1 == 1
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.k).map(|j| self.bit(j)).collect()
    }

    /// Number of marks set to 1.
    pub fn weight(&self) -> usize {
        self.index.count_ones() as usize
    }

    pub fn with_bit(&self, j: usize, value: bool) -> Assignment {
        let index = if value {
            self.index | 1 << j
        } else {
            self.index & !(1 << j)
        };
        Assignment { k: self.k, index }
    }
}

impl fmt::Display for Assignment {
    /// Character `j` is the bit of label `j + 1`, e.g. `10` sets mark 1 only.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.k {
            f.write_char(if self.bit(j) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl FromStr for Assignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidArgument(format!("bad assignment bit {c:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Assignment::from_bits(&bits))
    }
}

/// A multigraph with `k >= 2` distinct marked vertices; `marks[j]` carries label `j + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MarkedGraph {
    graph: MultiGraph,
    marks: Vec<usize>,
}

impl MarkedGraph {
    pub fn new(graph: MultiGraph, marks: Vec<usize>) -> Result<Self> {
        if marks.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a marked graph needs at least 2 marks, got {}",
                marks.len()
            )));
        }
        for (j, &v) in marks.iter().enumerate() {
            if v >= graph.vertex_count() {
                return Err(Error::InvalidArgument(format!(
                    "mark {} sits on vertex {v}, outside 0..{}",
                    j + 1,
                    graph.vertex_count()
                )));
            }
            if marks[..j].contains(&v) {
                return Err(Error::InvalidArgument(format!(
                    "marks are not distinct: vertex {v} carries two labels"
                )));
            }
        }
        Ok(MarkedGraph { graph, marks })
    }

    pub fn graph(&self) -> &MultiGraph {
        &self.graph
    }

    pub fn marks(&self) -> &[usize] {
        &self.marks
    }

    pub fn k(&self) -> usize {
        self.marks.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    /// Graph distance between every pair of marks.
    pub fn mark_distances(&self) -> Vec<Vec<Option<usize>>> {
        self.marks
            .iter()
            .map(|&s| {
                let dist = self.graph.distances_from(s);
                self.marks.iter().map(|&t| dist[t]).collect()
            })
            .collect()
    }

    /// Graphviz rendering; marked vertices carry `label="j"`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph G {\n");
        for v in 0..self.vertex_count() {
            match self.marks.iter().position(|&m| m == v) {
                Some(j) => writeln!(out, "  {v} [label=\"{}\"];", j + 1).unwrap(),
                None => writeln!(out, "  {v};").unwrap(),
            }
        }
        for &(a, b) in self.graph.edges() {
            writeln!(out, "  {a} -- {b};").unwrap();
        }
        out.push_str("}\n");
        out
    }
}

impl fmt::Display for MarkedGraph {
    /// `n <vertex_count> k <mark_count>`, then `e a b` per edge, then `marks i1 … ik`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n {} k {}", self.vertex_count(), self.k())?;
        for &(a, b) in self.graph.edges() {
            writeln!(f, "e {a} {b}")?;
        }
        write!(f, "marks")?;
        for m in &self.marks {
            write!(f, " {m}")?;
        }
        writeln!(f)
    }
}

impl FromStr for MarkedGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut header = None;
        let mut edges = Vec::new();
        let mut marks = None;
        for (lineno, line) in s.lines().enumerate() {
            let line_no = lineno + 1;
            let bad = |message: String| Error::Parse { line: line_no, message };
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let num = |t: &str| -> Result<usize> {
                t.parse().map_err(|_| bad(format!("expected a nonnegative integer, got {t:?}")))
            };
            match tokens[0] {
                "n" => {
                    if header.is_some() {
                        return Err(bad("duplicate header".into()));
                    }
                    if tokens.len() != 4 || tokens[2] != "k" {
                        return Err(bad("header must read `n <count> k <count>`".into()));
                    }
                    header = Some((num(tokens[1])?, num(tokens[3])?));
                }
                "e" => {
                    if tokens.len() != 3 {
                        return Err(bad("edge line must read `e <a> <b>`".into()));
                    }
                    edges.push((num(tokens[1])?, num(tokens[2])?));
                }
                "marks" => {
                    if marks.is_some() {
                        return Err(bad("duplicate marks line".into()));
                    }
                    marks = Some(tokens[1..].iter().map(|t| num(t)).collect::<Result<Vec<_>>>()?);
                }
                other => return Err(bad(format!("unknown line type {other:?}"))),
            }
        }
        let (n, k) = header.ok_or(Error::Parse {
            line: 0,
            message: "missing `n … k …` header".into(),
        })?;
        let marks = marks.ok_or(Error::Parse {
            line: 0,
            message: "missing `marks` line".into(),
        })?;
        if marks.len() != k {
            return Err(Error::Parse {
                line: 0,
                message: format!("header declares k = {k} but {} marks are listed", marks.len()),
            });
        }
        MarkedGraph::new(MultiGraph::new(n, edges)?, marks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_multiset_is_order_independent() {
        let a = MultiGraph::new(3, [(0, 1), (2, 1), (0, 1)]).unwrap();
        let b = MultiGraph::new(3, [(1, 2), (1, 0), (1, 0)]).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, MultiGraph::new(3, [(0, 1), (1, 2)]).unwrap());
        assert!(MultiGraph::new(2, [(0, 2)]).is_err());
    }

    #[test]
    fn marked_graph_rejects_bad_marks() {
        assert!(MarkedGraph::new(MultiGraph::complete(2), vec![0]).is_err());
        assert!(MarkedGraph::new(MultiGraph::complete(2), vec![0, 0]).is_err());
        assert!(MarkedGraph::new(MultiGraph::complete(2), vec![0, 2]).is_err());
        assert!(MarkedGraph::new(MultiGraph::complete(2), vec![1, 0]).is_ok());
    }

    #[test]
    fn assignment_order_puts_label_one_lowest() {
        let a: Assignment = "10".parse().unwrap();
        assert_eq!(a.index(), 1);
        assert!(a.bit(0) && !a.bit(1));
        assert_eq!(a.to_string(), "10");
        let order: Vec<String> = Assignment::all(2).map(|a| a.to_string()).collect();
        assert_eq!(order, ["00", "10", "01", "11"]);
        assert_eq!(Assignment::ones(3).weight(), 3);
    }

    #[test]
    fn text_format_round_trips_with_comments() {
        let text = "# path\nn 3 k 2\ne 1 0\ne 2 1\nmarks 0 2\n";
        let g: MarkedGraph = text.parse().unwrap();
        assert_eq!(g.to_string(), "n 3 k 2\ne 0 1\ne 1 2\nmarks 0 2\n");
        assert_eq!(g.to_string().parse::<MarkedGraph>().unwrap(), g);
        assert!("n 3 k 2\ne 0 1\nmarks 0\n".parse::<MarkedGraph>().is_err());
        assert!("n 3 k 2\nx 0 1\nmarks 0 1\n".parse::<MarkedGraph>().is_err());
    }

    #[test]
    fn dot_annotates_marks() {
        let g = MarkedGraph::new(MultiGraph::path(3), vec![2, 0]).unwrap();
        let dot = g.to_dot();
        assert!(dot.contains("2 [label=\"1\"];"));
        assert!(dot.contains("0 [label=\"2\"];"));
        assert!(dot.contains("  1;\n"));
        assert!(dot.contains("0 -- 1;"));
    }

    #[test]
    fn distances_and_vertex_removal() {
        let g = MultiGraph::path(5);
        assert_eq!(g.distances_from(0)[4], Some(4));
        let h = g.without_vertices(&[2]);
        assert_eq!(h.vertex_count(), 4);
        assert_eq!(h.edges(), &[(0, 1), (2, 3)]);
        assert!(!h.is_connected());
        assert_eq!(h.distances_from(0)[3], None);
    }
}
