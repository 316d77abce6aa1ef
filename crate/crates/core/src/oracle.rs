//! Exhaustive independent-set enumeration: the reference every faster path is checked against.
//!
//! Enumeration is a depth-first branch over vertices in index order, so the cost
//! is proportional to the number of independent sets rather than `2^n`. Graphs
//! are limited to [`DEFAULT_BRUTE_FORCE_LIMIT`] vertices unless the caller
//! raises the limit (never past 64, the width of the vertex bitsets).

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::graph::{Assignment, MarkedGraph, MultiGraph};
use crate::poly::Polynomial;

pub const DEFAULT_BRUTE_FORCE_LIMIT: usize = 25;
pub const MAX_BRUTE_FORCE_LIMIT: usize = 64;

/// A set of vertices of a graph with at most 64 vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet(pub u64);

impl VertexSet {
    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0 >> v & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..64).filter(|&v| self.contains(v))
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

/// Lazily yields every independent set of a graph, the empty set included.
#[derive(Clone, Debug)]
pub struct IndependentSets {
    n: usize,
    closed_nbhd: Vec<u64>,
    looped: u64,
    stack: Vec<(usize, u64, u64)>,
}

impl Iterator for IndependentSets {
    type Item = VertexSet;

    fn next(&mut self) -> Option<VertexSet> {
        while let Some((v, chosen, blocked)) = self.stack.pop() {
            if v == self.n {
                return Some(VertexSet(chosen));
            }
            self.stack.push((v + 1, chosen, blocked));
            let bit = 1u64 << v;
            if (blocked | self.looped) & bit == 0 {
                self.stack
                    .push((v + 1, chosen | bit, blocked | self.closed_nbhd[v]));
            }
        }
        None
    }
}

/// Largest agreeing independent sets for one assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxAgreeing {
    pub size: usize,
    pub count: u128,
    pub witness: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxIndependenceReport {
    pub maximally_independent: bool,
    /// `(assignment, Some((max size, number of maximizers)))`, or `None` when nothing agrees.
    pub entries: Vec<(Assignment, Option<(usize, u128)>)>,
    /// `#I(1,…,1) − #I(0,…,0)` when both exist.
    pub gap: Option<i64>,
}

/// Brute-force evaluator with a configurable vertex limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Oracle {
    max_vertices: usize,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            max_vertices: DEFAULT_BRUTE_FORCE_LIMIT,
        }
    }
}

impl Oracle {
    pub fn with_limit(max_vertices: usize) -> Result<Self> {
        if max_vertices > MAX_BRUTE_FORCE_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "brute-force limit {max_vertices} exceeds the hard maximum {MAX_BRUTE_FORCE_LIMIT}"
            )));
        }
        Ok(Oracle { max_vertices })
    }

    pub fn limit(&self) -> usize {
        self.max_vertices
    }

    fn check(&self, g: &MultiGraph) -> Result<()> {
        if g.vertex_count() > self.max_vertices {
            return Err(Error::BruteForceLimit {
                vertices: g.vertex_count(),
                limit: self.max_vertices,
            });
        }
        Ok(())
    }

    pub fn independent_sets(&self, g: &MultiGraph) -> Result<IndependentSets> {
        self.check(g)?;
        let n = g.vertex_count();
        let mut closed_nbhd: Vec<u64> = (0..n).map(|v| 1u64 << v).collect();
        let mut looped = 0u64;
        for &(a, b) in g.edges() {
            if a == b {
                looped |= 1 << a;
            }
            closed_nbhd[a] |= 1 << b;
            closed_nbhd[b] |= 1 << a;
        }
        Ok(IndependentSets {
            n,
            closed_nbhd,
            looped,
            stack: vec![(0, 0, 0)],
        })
    }

    pub fn indep_poly(&self, g: &MultiGraph) -> Result<Polynomial> {
        let mut counts = vec![0u128; g.vertex_count() + 1];
        for s in self.independent_sets(g)? {
            counts[s.len()] += 1;
        }
        Ok(from_counts(&counts))
    }

    /// All `2^k` conditioned polynomials from a single enumeration, in assignment order.
    pub fn conditioned_polys(&self, g: &MarkedGraph) -> Result<Vec<Polynomial>> {
        let k = g.k();
        let mut counts = vec![vec![0u128; g.vertex_count() + 1]; 1 << k];
        for s in self.independent_sets(g.graph())? {
            counts[pattern(g, s)][s.len()] += 1;
        }
        Ok(counts.iter().map(|c| from_counts(c)).collect())
    }

    pub fn conditioned_poly(&self, g: &MarkedGraph, t: &Assignment) -> Result<Polynomial> {
        check_len(g, t)?;
        let mut counts = vec![0u128; g.vertex_count() + 1];
        for s in self.independent_sets(g.graph())? {
            if pattern(g, s) == t.index() {
                counts[s.len()] += 1;
            }
        }
        Ok(from_counts(&counts))
    }

    pub fn sum_over_assignments(&self, g: &MarkedGraph) -> Result<Polynomial> {
        Ok(self
            .conditioned_polys(g)?
            .iter()
            .fold(Polynomial::zero(), |acc, p| &acc + p))
    }

    pub fn max_agreeing_sets(&self, g: &MarkedGraph, t: &Assignment) -> Result<Option<MaxAgreeing>> {
        check_len(g, t)?;
        let mut best: Option<(usize, u128, VertexSet)> = None;
        for s in self.independent_sets(g.graph())? {
            if pattern(g, s) != t.index() {
                continue;
            }
            best = match best {
                Some((size, count, w)) if s.len() == size => Some((size, count + 1, w)),
                Some((size, _, _)) if s.len() < size => best,
                _ => Some((s.len(), 1, s)),
            };
        }
        Ok(best.map(|(size, count, w)| MaxAgreeing {
            size,
            count,
            witness: w.to_vec(),
        }))
    }

    pub fn is_maximally_independent(&self, g: &MarkedGraph) -> Result<MaxIndependenceReport> {
        let k = g.k();
        let mut best: Vec<Option<(usize, u128)>> = vec![None; 1 << k];
        for s in self.independent_sets(g.graph())? {
            let slot = &mut best[pattern(g, s)];
            *slot = match *slot {
                Some((size, count)) if s.len() == size => Some((size, count + 1)),
                Some((size, _)) if s.len() < size => *slot,
                _ => Some((s.len(), 1)),
            };
        }
        let gap = match (best[(1 << k) - 1], best[0]) {
            (Some((ones, _)), Some((zeros, _))) => Some(ones as i64 - zeros as i64),
            _ => None,
        };
        let unique = best.iter().all(|b| matches!(b, Some((_, 1))));
        Ok(MaxIndependenceReport {
            maximally_independent: unique && gap == Some(k as i64),
            entries: Assignment::all(k).zip(best).collect(),
            gap,
        })
    }
}

fn check_len(g: &MarkedGraph, t: &Assignment) -> Result<()> {
    if t.len() != g.k() {
        return Err(Error::InvalidArgument(format!(
            "assignment has {} bits but the graph has {} marks",
            t.len(),
            g.k()
        )));
    }
    Ok(())
}

fn pattern(g: &MarkedGraph, s: VertexSet) -> usize {
    g.marks()
        .iter()
        .enumerate()
        .map(|(j, &v)| usize::from(s.contains(v)) << j)
        .sum()
}

fn from_counts(counts: &[u128]) -> Polynomial {
    Polynomial::from_coeffs(counts.iter().map(|&c| BigInt::from(c)).collect())
}

pub fn independent_sets(g: &MultiGraph) -> Result<IndependentSets> {
    Oracle::default().independent_sets(g)
}

pub fn indep_poly(g: &MultiGraph) -> Result<Polynomial> {
    Oracle::default().indep_poly(g)
}

pub fn conditioned_poly(g: &MarkedGraph, t: &Assignment) -> Result<Polynomial> {
    Oracle::default().conditioned_poly(g, t)
}

pub fn sum_over_assignments(g: &MarkedGraph) -> Result<Polynomial> {
    Oracle::default().sum_over_assignments(g)
}

pub fn max_agreeing_sets(g: &MarkedGraph, t: &Assignment) -> Result<Option<MaxAgreeing>> {
    Oracle::default().max_agreeing_sets(g, t)
}

pub fn is_maximally_independent(g: &MarkedGraph) -> Result<MaxIndependenceReport> {
    Oracle::default().is_maximally_independent(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_i64s(c)
    }

    fn marked(g: MultiGraph, marks: &[usize]) -> MarkedGraph {
        MarkedGraph::new(g, marks.to_vec()).unwrap()
    }

    fn sets(g: &MultiGraph) -> Vec<Vec<usize>> {
        let mut v: Vec<_> = independent_sets(g).unwrap().map(|s| s.to_vec()).collect();
        v.sort();
        v
    }

    /// The tripod with marks on two leaves, glued once by the Chebyshev rule
    /// (identify the label-2 leaves, relabel the two former label-1 leaves).
    fn double_tripod() -> MarkedGraph {
        // copy 1: c1=0, a1=1, d1=2; shared b=3; copy 2: c2=4, a2=5, d2=6
        let g = MultiGraph::new(7, [(0, 1), (0, 2), (0, 3), (4, 3), (4, 5), (4, 6)]).unwrap();
        marked(g, &[1, 5])
    }

    #[test]
    fn enumerates_small_graphs() {
        assert_eq!(sets(&MultiGraph::complete(3)), vec![vec![], vec![0], vec![1], vec![2]]);
        assert_eq!(sets(&MultiGraph::edgeless(2)).len(), 4);
        assert_eq!(
            sets(&MultiGraph::path(3)),
            vec![vec![], vec![0], vec![0, 2], vec![1], vec![2]]
        );
    }

    #[test]
    fn loops_forbid_and_parallel_edges_collapse() {
        let looped = MultiGraph::new(2, [(0, 0)]).unwrap();
        assert_eq!(sets(&looped), vec![vec![], vec![1]]);
        let doubled = MultiGraph::new(2, [(0, 1), (0, 1)]).unwrap();
        assert_eq!(indep_poly(&doubled).unwrap(), p(&[1, 2]));
    }

    #[test]
    fn independence_polynomials() {
        assert_eq!(indep_poly(&MultiGraph::complete(3)).unwrap(), p(&[1, 3]));
        assert_eq!(indep_poly(&MultiGraph::complete(1)).unwrap(), p(&[1, 1]));
        assert_eq!(indep_poly(&MultiGraph::path(3)).unwrap(), p(&[1, 3, 1]));
        assert_eq!(indep_poly(&MultiGraph::edgeless(0)).unwrap(), p(&[1]));
    }

    #[test]
    fn conditioned_polynomials() {
        let k2 = marked(MultiGraph::complete(2), &[0, 1]);
        let t = |s: &str| s.parse::<Assignment>().unwrap();
        assert!(conditioned_poly(&k2, &t("11")).unwrap().is_zero());
        assert_eq!(conditioned_poly(&k2, &t("00")).unwrap(), p(&[1]));
        assert_eq!(conditioned_poly(&k2, &t("10")).unwrap(), p(&[0, 1]));
        let path = marked(MultiGraph::path(3), &[0, 2]);
        assert_eq!(conditioned_poly(&path, &t("11")).unwrap(), p(&[0, 0, 1]));
        assert!(matches!(
            conditioned_poly(&path, &t("101")),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn sums_over_assignments() {
        let k2 = marked(MultiGraph::complete(2), &[0, 1]);
        assert_eq!(sum_over_assignments(&k2).unwrap(), p(&[1, 2]));
        let path = marked(MultiGraph::path(3), &[0, 2]);
        assert_eq!(sum_over_assignments(&path).unwrap(), p(&[1, 3, 1]));
        let k3 = marked(MultiGraph::complete(3), &[0, 1, 2]);
        assert_eq!(sum_over_assignments(&k3).unwrap(), p(&[1, 3]));
    }

    #[test]
    fn max_agreeing() {
        let k2 = marked(MultiGraph::complete(2), &[0, 1]);
        assert_eq!(max_agreeing_sets(&k2, &Assignment::ones(2)).unwrap(), None);
        let tripod = marked(MultiGraph::star(3), &[1, 2]);
        let r = max_agreeing_sets(&tripod, &Assignment::zeros(2)).unwrap().unwrap();
        assert_eq!((r.size, r.count), (1, 2));
        let r = max_agreeing_sets(&double_tripod(), &Assignment::ones(2))
            .unwrap()
            .unwrap();
        assert_eq!((r.size, r.count), (5, 1));
        assert_eq!(r.witness, vec![1, 2, 3, 5, 6]);
    }

    #[test]
    fn maximal_independence() {
        let k2 = marked(MultiGraph::complete(2), &[0, 1]);
        assert!(!is_maximally_independent(&k2).unwrap().maximally_independent);
        let report = is_maximally_independent(&double_tripod()).unwrap();
        assert!(report.maximally_independent);
        assert_eq!(report.gap, Some(2));
        let path = marked(MultiGraph::path(3), &[0, 2]);
        let report = is_maximally_independent(&path).unwrap();
        assert!(!report.maximally_independent);
        assert_eq!(report.gap, Some(1));
    }

    #[test]
    fn refuses_oversized_graphs() {
        let g = MultiGraph::edgeless(26);
        assert!(matches!(
            indep_poly(&g),
            Err(Error::BruteForceLimit { vertices: 26, limit: 25 })
        ));
        assert!(Oracle::with_limit(30).unwrap().indep_poly(&MultiGraph::path(26)).is_ok());
        assert!(Oracle::with_limit(65).is_err());
    }

    fn arb_graph() -> impl Strategy<Value = MultiGraph> {
        (1usize..12).prop_flat_map(|n| {
            prop::collection::vec((0..n, 0..n), 0..2 * n)
                .prop_map(move |edges| MultiGraph::new(n, edges).unwrap())
        })
    }

    fn arb_marked() -> impl Strategy<Value = MarkedGraph> {
        (3usize..11).prop_flat_map(|n| {
            (
                prop::collection::vec((0..n, 0..n), 0..2 * n),
                Just(n),
                prop::sample::subsequence((0..n).collect::<Vec<_>>(), 2..4),
                any::<prop::sample::Index>(),
            )
                .prop_map(|(edges, n, marks, rot)| {
                    let mut marks = marks;
                    let r = rot.index(marks.len());
                    marks.rotate_left(r);
                    MarkedGraph::new(MultiGraph::new(n, edges).unwrap(), marks).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn value_at_one_counts_sets(g in arb_graph()) {
            let count = independent_sets(&g).unwrap().count();
            prop_assert_eq!(indep_poly(&g).unwrap().sum_coeffs(), BigInt::from(count));
        }

        #[test]
        fn conditioned_polys_sum_to_total(g in arb_marked()) {
            prop_assert_eq!(sum_over_assignments(&g).unwrap(), indep_poly(g.graph()).unwrap());
        }

        #[test]
        fn vertex_deletion_recurrence(g in arb_graph(), v in any::<prop::sample::Index>()) {
            let v = v.index(g.vertex_count());
            let without_v = g.without_vertices(&[v]);
            let mut closed: Vec<usize> = g.adjacency()[v].clone();
            closed.push(v);
            let without_nbhd = g.without_vertices(&closed);
            // a looped vertex can never be occupied, so only the first term survives
            let expected = if g.has_loop(v) {
                indep_poly(&without_v).unwrap()
            } else {
                &indep_poly(&without_v).unwrap()
                    + &(&Polynomial::lambda() * &indep_poly(&without_nbhd).unwrap())
            };
            prop_assert_eq!(indep_poly(&g).unwrap(), expected);
        }

        #[test]
        fn max_size_grows_by_at_most_one_per_flip(g in arb_marked(), idx in any::<prop::sample::Index>()) {
            let k = g.k();
            let t = Assignment::from_index(k, idx.index(1 << k));
            for j in (0..k).filter(|&j| !t.bit(j)) {
                let before = max_agreeing_sets(&g, &t).unwrap();
                let after = max_agreeing_sets(&g, &t.with_bit(j, true)).unwrap();
                if let (Some(b), Some(a)) = (before, after) {
                    prop_assert!(a.size <= b.size + 1);
                }
            }
        }
    }
}
