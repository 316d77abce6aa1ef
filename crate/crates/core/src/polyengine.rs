//! The exact recursion for the conditioned independence polynomials `(x)_n`.
//!
//! For each assignment `x` of the new marks, `(x)_{n+1}` is a sum over
//! assignments `Y` of all copy marks of the product of the copies' entries and
//! the connecting-graph weights, divided by `λ^{||Y||}` to undo the double
//! counting of glued marks. The division is done copy by copy: every entry
//! `(y)` is divisible by `λ^{||y||}` because an occupied mark contributes a factor
//! `λ`. The sum is organised as a [`StepPlan`] listing, per multiset of copy
//! assignments, the total connecting weight for each `x`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gluing::Gluing;
use crate::graph::{Assignment, MarkedGraph, MultiGraph};
use crate::numeric::ExtPoly;
use crate::oracle::{Oracle, MAX_BRUTE_FORCE_LIMIT};
use crate::poly::Polynomial;
use crate::recursion::vertex_counts;

pub const DEFAULT_DEGREE_BUDGET: u128 = 200_000;

/// Conditioned partition functions of one connecting graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeWeights {
    members: usize,
    root_constrained: bool,
    table: Vec<Polynomial>,
}

impl EdgeWeights {
    /// Weight for member occupation bits (bit `t` for the `t`-th member) and the root bit.
    ///
    /// The root bit is ignored when the edge carries no new label.
    pub fn get(&self, member_bits: usize, root: bool) -> &Polynomial {
        let root = if self.root_constrained { (root as usize) << self.members } else { 0 };
        &self.table[member_bits | root]
    }

    pub fn members(&self) -> usize {
        self.members
    }

    pub fn root_constrained(&self) -> bool {
        self.root_constrained
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalWeightTable {
    pub edges: Vec<EdgeWeights>,
}

pub fn local_weights(d: &Gluing) -> Result<LocalWeightTable> {
    let oracle = Oracle::with_limit(MAX_BRUTE_FORCE_LIMIT)?;
    let edges = d
        .edges()
        .iter()
        .enumerate()
        .map(|(ei, e)| {
            let s = e.members.len();
            let root_constrained = d.root_label(ei).is_some();
            let mut table = vec![Polynomial::zero(); 1 << (s + root_constrained as usize)];
            for set in oracle.independent_sets(&e.connector)? {
                let mut key = 0;
                for (t, &u) in e.attach.iter().enumerate() {
                    if set.contains(u) {
                        key |= 1 << t;
                    }
                }
                if root_constrained && set.contains(e.root) {
                    key |= 1 << s;
                }
                table[key] += &Polynomial::monomial(1.into(), set.len());
            }
            Ok(EdgeWeights {
                members: s,
                root_constrained,
                table,
            })
        })
        .collect::<Result<_>>()?;
    Ok(LocalWeightTable { edges })
}

/// One group of terms of the recursion sharing the same multiset of copy assignments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanTerm {
    /// Sorted assignment indices, one per copy.
    pub copies: Vec<usize>,
    /// `(x, product of connecting weights)` for every `x` the term contributes to.
    pub weights: Vec<(usize, Polynomial)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepPlan {
    m: usize,
    k: usize,
    terms: Vec<PlanTerm>,
}

impl StepPlan {
    pub fn new(d: &Gluing, w: &LocalWeightTable) -> Self {
        let (m, k) = (d.m(), d.k());
        let mut groups: BTreeMap<Vec<usize>, BTreeMap<usize, Polynomial>> = BTreeMap::new();
        for x in 0..1usize << k {
            let mut y = vec![0usize; m];
            expand(d, w, x, 0, &mut y, Polynomial::one(), &mut |y, weight| {
                let mut key = y.to_vec();
                key.sort_unstable();
                *groups.entry(key).or_default().entry(x).or_default() += &weight;
            });
        }
        let terms = groups
            .into_iter()
            .map(|(copies, ws)| PlanTerm {
                copies,
                weights: ws.into_iter().filter(|(_, p)| !p.is_zero()).collect(),
            })
            .filter(|t| !t.weights.is_empty())
            .collect();
        StepPlan { m, k, terms }
    }

    pub fn from_gluing(d: &Gluing) -> Result<Self> {
        Ok(Self::new(d, &local_weights(d)?))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn terms(&self) -> &[PlanTerm] {
        &self.terms
    }
}

/// Depth-first over edges; each edge fixes the bits of its label on all its members.
fn expand(
    d: &Gluing,
    w: &LocalWeightTable,
    x: usize,
    edge: usize,
    y: &mut [usize],
    acc: Polynomial,
    emit: &mut dyn FnMut(&[usize], Polynomial),
) {
    if edge == d.edges().len() {
        emit(y, acc);
        return;
    }
    let e = &d.edges()[edge];
    let root = d.root_label(edge).is_some_and(|j| x >> j & 1 == 1);
    for bits in 0..1usize << e.members.len() {
        let weight = w.edges[edge].get(bits, root);
        if weight.is_zero() {
            continue;
        }
        for (t, &copy) in e.members.iter().enumerate() {
            y[copy] |= (bits >> t & 1) << e.label;
        }
        expand(d, w, x, edge + 1, y, &acc * weight, emit);
        for &copy in &e.members {
            y[copy] &= !(1 << e.label);
        }
    }
}

/// The `2^k` conditioned polynomials of one level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyVector {
    pub entries: Vec<Polynomial>,
    pub level: usize,
}

impl PolyVector {
    pub fn k(&self) -> usize {
        self.entries.len().trailing_zeros() as usize
    }

    pub fn entry(&self, x: &Assignment) -> &Polynomial {
        &self.entries[x.index()]
    }

    /// The independence polynomial of the whole graph.
    pub fn total(&self) -> Polynomial {
        self.entries.iter().fold(Polynomial::zero(), |acc, p| acc + p.clone())
    }

    pub fn eval(&self, lambda: Complex64) -> Vec<Complex64> {
        self.entries.iter().map(|p| ExtPoly::new(p).eval(lambda).to_complex()).collect()
    }
}

pub fn total(v: &PolyVector) -> Polynomial {
    v.total()
}

pub fn initial_vector(g0: &MarkedGraph, oracle: &Oracle) -> Result<PolyVector> {
    Ok(PolyVector {
        entries: oracle.conditioned_polys(g0)?,
        level: 0,
    })
}

fn reduced_entries(v: &PolyVector, used: &[bool]) -> Result<Vec<Polynomial>> {
    v.entries
        .iter()
        .enumerate()
        .map(|(y, p)| {
            let power = y.count_ones() as usize;
            if !used[y] {
                return Ok(Polynomial::zero());
            }
            p.shift_down(power).ok_or_else(|| Error::InexactDivision {
                power,
                term: format!("entry {} at level {}", Assignment::from_index(v.k(), y), v.level),
            })
        })
        .collect()
}

pub fn step(plan: &StepPlan, v: &PolyVector) -> Result<PolyVector> {
    if v.entries.len() != 1 << plan.k {
        return Err(Error::InvalidArgument(format!(
            "vector has {} entries, expected {}",
            v.entries.len(),
            1usize << plan.k
        )));
    }
    let mut used = vec![false; v.entries.len()];
    for t in &plan.terms {
        for &c in &t.copies {
            used[c] = true;
        }
    }
    let reduced = reduced_entries(v, &used)?;
    let products: Vec<Polynomial> = plan
        .terms
        .par_iter()
        .map(|t| {
            t.copies[1..]
                .iter()
                .fold(reduced[t.copies[0]].clone(), |acc, &c| &acc * &reduced[c])
        })
        .collect();
    let entries = (0..1usize << plan.k)
        .into_par_iter()
        .map(|x| {
            let mut out = Polynomial::zero();
            for (t, prod) in plan.terms.iter().zip(&products) {
                if let Some((_, w)) = t.weights.iter().find(|(xi, _)| *xi == x) {
                    out += &(w * prod);
                }
            }
            out
        })
        .collect();
    Ok(PolyVector {
        entries,
        level: v.level + 1,
    })
}

/// The defining sum over every `Y ∈ {0,1}^{mk}`, without any factorisation.
pub fn step_naive(d: &Gluing, w: &LocalWeightTable, v: &PolyVector) -> Result<PolyVector> {
    let (m, k) = (d.m(), d.k());
    if m * k > 24 {
        return Err(Error::InvalidArgument(format!("naive step over 2^{} terms refused", m * k)));
    }
    let mask = (1usize << k) - 1;
    let entries = (0..1usize << k)
        .map(|x| {
            let mut out = Polynomial::zero();
            for big_y in 0..1usize << (m * k) {
                let y: Vec<usize> = (0..m).map(|i| big_y >> (i * k) & mask).collect();
                let mut term = Polynomial::one();
                for (ei, e) in d.edges().iter().enumerate() {
                    let bits = e
                        .members
                        .iter()
                        .enumerate()
                        .fold(0, |b, (t, &c)| b | (y[c] >> e.label & 1) << t);
                    let root = d.root_label(ei).is_some_and(|j| x >> j & 1 == 1);
                    term = &term * w.edges[ei].get(bits, root);
                    if term.is_zero() {
                        break;
                    }
                }
                if term.is_zero() {
                    continue;
                }
                for &yi in &y {
                    term = &term * &v.entries[yi];
                }
                let power: usize = y.iter().map(|yi| yi.count_ones() as usize).sum();
                out += &term.shift_down(power).ok_or_else(|| Error::InexactDivision {
                    power,
                    term: format!("x = {}, Y = {y:?}", Assignment::from_index(k, x)),
                })?;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(PolyVector {
        entries,
        level: v.level + 1,
    })
}

/// Levels `0..=n_max`, or fewer with the budget error that stopped the run.
#[derive(Debug)]
pub struct Sequence {
    pub levels: Vec<PolyVector>,
    pub truncated: Option<Error>,
}

pub fn sequence(d: &Gluing, g0: &MarkedGraph, n_max: usize, degree_budget: u128, oracle: &Oracle) -> Result<Sequence> {
    let plan = StepPlan::from_gluing(d)?;
    let counts = vertex_counts(d, g0.vertex_count(), n_max);
    let mut levels = vec![initial_vector(g0, oracle)?];
    for n in 1..=n_max {
        if counts[n] > degree_budget {
            return Ok(Sequence {
                levels,
                truncated: Some(Error::DegreeBudget {
                    level: n,
                    projected: counts[n],
                    budget: degree_budget,
                }),
            });
        }
        let next = step(&plan, levels.last().unwrap())?;
        levels.push(next);
    }
    Ok(Sequence { levels, truncated: None })
}

/// `log|Z_{G_n}(λ)| / |V(G_n)|` per level; `None` where `Z_{G_n}(λ)` vanishes to working precision.
pub fn free_energy_sequence(
    d: &Gluing,
    g0: &MarkedGraph,
    n_max: usize,
    lambda: Complex64,
    degree_budget: u128,
    oracle: &Oracle,
) -> Result<Vec<Option<f64>>> {
    let seq = sequence(d, g0, n_max, degree_budget, oracle)?;
    if let Some(e) = seq.truncated {
        return Err(e);
    }
    let counts = vertex_counts(d, g0.vertex_count(), n_max);
    Ok(seq
        .levels
        .iter()
        .zip(counts)
        .map(|(v, count)| {
            let z = ExtPoly::new(&v.total());
            let value = z.eval(lambda);
            if value.abs_ratio(z.abs_sum(lambda.norm())) <= 1e-14 {
                None
            } else {
                Some(value.ln_abs() / count as f64)
            }
        })
        .collect())
}

/// Independence polynomial of a connecting graph, exposed for diagnostics.
pub fn connector_poly(g: &MultiGraph) -> Result<Polynomial> {
    Oracle::with_limit(MAX_BRUTE_FORCE_LIMIT)?.indep_poly(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gluing::{catalog, ConnectingGraph, CATALOG_NAMES};
    use crate::recursion::{iterate, DEFAULT_VERTEX_BUDGET};

    fn load(name: &str) -> (Gluing, MarkedGraph) {
        let e = catalog(name).unwrap();
        (Gluing::new(e.data).unwrap(), e.start)
    }

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_i64s(c)
    }

    #[test]
    fn singleton_unrooted_weights() {
        let (d, _) = load("sierpinski");
        let w = local_weights(&d).unwrap();
        let e = d.edges().iter().position(|e| e.members.len() == 2).unwrap();
        let t = &w.edges[e];
        assert!(!t.root_constrained());
        assert_eq!(t.get(0b11, false), &p(&[0, 1]));
        assert_eq!(t.get(0b01, false), &Polynomial::zero());
        assert_eq!(t.get(0b10, true), &Polynomial::zero());
        assert_eq!(t.get(0b00, false), &Polynomial::one());
    }

    #[test]
    fn tripod_connector_weights() {
        let (d, _) = load("spod-star");
        let w = local_weights(&d).unwrap();
        let e = d.edges().iter().position(|e| e.members.len() == 3).unwrap();
        assert!(!w.edges[e].root_constrained());
        assert_eq!(w.edges[e].get(0b001, false), &p(&[0, 1]));
        assert_eq!(w.edges[e].get(0b000, false), &p(&[1, 1]));
        assert_eq!(w.edges[e].get(0b111, false), &p(&[0, 0, 0, 1]));

        // The same connector carrying a new label at its center.
        let mut data = catalog("spod-star").unwrap().data;
        data.phi.insert(2, "pod".into());
        let d = Gluing::new(data).unwrap();
        let w = local_weights(&d).unwrap();
        let e = d.edges().iter().position(|e| e.id == "pod").unwrap();
        let t = &w.edges[e];
        assert!(t.root_constrained());
        assert_eq!(t.get(0b000, true), &p(&[0, 1]));
        assert_eq!(t.get(0b000, false), &Polynomial::one());
        assert_eq!(t.get(0b101, false), &p(&[0, 0, 1]));
        for bits in 1..8 {
            assert!(t.get(bits, true).is_zero());
        }
    }

    #[test]
    fn conflicting_attachments_give_zero() {
        let mut data = catalog("chebyshev").unwrap().data;
        data.connecting.insert("b12".into(), ConnectingGraph::from_graph(&MultiGraph::path(2), 0));
        data.attach.get_mut("b12").unwrap().insert(2, 0);
        let d = Gluing::new(data).unwrap();
        let w = local_weights(&d).unwrap();
        let e = d.edges().iter().position(|e| e.id == "b12").unwrap();
        assert!(w.edges[e].get(0b01, false).is_zero());
        assert_eq!(w.edges[e].get(0b11, false), &p(&[0, 1]));
        assert_eq!(w.edges[e].get(0b00, false), &p(&[1, 1]));
    }

    #[test]
    fn chebyshev_first_step() {
        let (d, g0) = load("chebyshev");
        let plan = StepPlan::from_gluing(&d).unwrap();
        let v0 = initial_vector(&g0, &Oracle::default()).unwrap();
        assert_eq!(v0.entries, vec![p(&[1]), p(&[0, 1]), p(&[0, 1]), Polynomial::zero()]);
        let v1 = step(&plan, &v0).unwrap();
        assert_eq!(v1.entries, vec![p(&[1, 1]), p(&[0, 1]), p(&[0, 1]), p(&[0, 0, 1])]);
        assert_eq!(v1.total(), p(&[1, 3, 1]));
        let v2 = step(&plan, &v1).unwrap();
        assert_eq!(v2.entries[0], p(&[1, 3, 1]));
    }

    #[test]
    fn sierpinski_first_step() {
        let (d, g0) = load("sierpinski");
        let plan = StepPlan::from_gluing(&d).unwrap();
        let v0 = initial_vector(&g0, &Oracle::default()).unwrap();
        assert_eq!(v0.total(), p(&[1, 3]));
        let v1 = step(&plan, &v0).unwrap();
        assert_eq!(v1.entries[0], p(&[1, 3]));
        assert_eq!(v1.total(), p(&[1, 6, 6, 1]));
    }

    #[test]
    fn tripod_start_vector() {
        let (_, g0) = load("chebyshev-tripod");
        let v0 = initial_vector(&g0, &Oracle::default()).unwrap();
        assert_eq!(v0.entries[0], p(&[1, 5, 6, 1]));
        assert_eq!(v0.entries[1], p(&[0, 1, 4, 4, 1]));
        assert_eq!(v0.entries[2], p(&[0, 1, 4, 4, 1]));
        assert_eq!(v0.entries[3], p(&[0, 0, 1, 3, 3, 1]));
        assert_eq!(v0.total().eval(&1.into()), 41.into());
    }

    #[test]
    fn unit_vector_sees_only_empty_assignment() {
        for name in CATALOG_NAMES {
            let (d, _) = load(name);
            let w = local_weights(&d).unwrap();
            let plan = StepPlan::new(&d, &w);
            let mut entries = vec![Polynomial::zero(); 1 << d.k()];
            entries[0] = Polynomial::one();
            let v = PolyVector { entries, level: 0 };
            let out = step(&plan, &v).unwrap();
            for x in 0..1 << d.k() {
                let expected = d.edges().iter().enumerate().fold(Polynomial::one(), |acc, (ei, _)| {
                    let root = d.root_label(ei).is_some_and(|j| x >> j & 1 == 1);
                    &acc * w.edges[ei].get(0, root)
                });
                assert_eq!(out.entries[x], expected, "{name} x = {x}");
            }
        }
    }

    #[test]
    fn planned_step_matches_naive_sum() {
        for name in CATALOG_NAMES {
            let (d, g0) = load(name);
            let w = local_weights(&d).unwrap();
            let plan = StepPlan::new(&d, &w);
            let mut v = initial_vector(&g0, &Oracle::default()).unwrap();
            for _ in 0..2 {
                let fast = step(&plan, &v).unwrap();
                assert_eq!(fast, step_naive(&d, &w, &v).unwrap(), "{name}");
                v = fast;
            }
        }
    }

    #[test]
    fn matches_brute_force_on_small_levels() {
        let oracle = Oracle::default();
        for name in CATALOG_NAMES {
            let (d, g0) = load(name);
            let seq = sequence(&d, &g0, 3, DEFAULT_DEGREE_BUDGET, &oracle).unwrap();
            for v in &seq.levels {
                let g = iterate(&d, &g0, v.level, DEFAULT_VERTEX_BUDGET).unwrap();
                if g.vertex_count() > 20 {
                    break;
                }
                assert_eq!(v.entries, oracle.conditioned_polys(&g).unwrap(), "{name} level {}", v.level);
            }
        }
    }

    #[test]
    fn degree_budget_truncates() {
        let (d, g0) = load("chebyshev");
        let seq = sequence(&d, &g0, 10, 100, &Oracle::default()).unwrap();
        assert_eq!(seq.levels.len(), 7);
        assert!(matches!(seq.truncated, Some(Error::DegreeBudget { level: 7, .. })));
    }

    #[test]
    fn inexact_division_is_reported() {
        let (d, _) = load("chebyshev");
        let plan = StepPlan::from_gluing(&d).unwrap();
        let v = PolyVector {
            entries: vec![p(&[1]), p(&[1]), p(&[0, 1]), Polynomial::zero()],
            level: 0,
        };
        assert!(matches!(step(&plan, &v), Err(Error::InexactDivision { power: 1, .. })));
    }

    #[test]
    fn free_energy_examples() {
        let oracle = Oracle::default();
        let (d, g0) = load("sierpinski");
        let f = free_energy_sequence(&d, &g0, 2, Complex64::new(1.0, 0.0), 1000, &oracle).unwrap();
        assert!((f[0].unwrap() - 4f64.ln() / 3.0).abs() < 1e-14);
        assert!((f[1].unwrap() - 14f64.ln() / 6.0).abs() < 1e-14);
        let (d, g0) = load("chebyshev");
        let f = free_energy_sequence(&d, &g0, 3, Complex64::new(0.0, 0.0), 1000, &oracle).unwrap();
        assert!(f.iter().all(|x| *x == Some(0.0)));
        // Z of the 3-path vanishes at a root of 1 + 3λ + λ².
        let root = Complex64::new((-3.0 + 5f64.sqrt()) / 2.0, 0.0);
        let f = free_energy_sequence(&d, &g0, 1, root, 1000, &oracle).unwrap();
        assert_eq!(f[1], None);
    }

    #[test]
    fn homogeneity_of_degree_m() {
        let (d, g0) = load("sierpinski");
        let plan = StepPlan::from_gluing(&d).unwrap();
        let v = initial_vector(&g0, &Oracle::default()).unwrap();
        let c: num_bigint::BigInt = 5.into();
        let scaled = PolyVector {
            entries: v.entries.iter().map(|e| e.scale(&c)).collect(),
            level: 0,
        };
        let a = step(&plan, &v).unwrap();
        let b = step(&plan, &scaled).unwrap();
        let c3 = num_bigint::BigInt::from(125);
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert_eq!(&x.scale(&c3), y);
        }
    }
}
