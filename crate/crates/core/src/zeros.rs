//! Zeros of the independence polynomials: a simultaneous root finder, per-level
//! atlases, and a plateau-versus-growth verdict on the largest root modulus.

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gluing::Gluing;
use crate::graph::MarkedGraph;
use crate::numeric::{eval_with_derivative_big, pow2, BigFloat, ExtComplex, ExtPoly};
use crate::oracle::Oracle;
use crate::poly::Polynomial;
use crate::polyengine::{sequence, PolyVector, StepPlan};
use crate::recursion::vertex_counts;

type C = Complex64;

pub const REAL_SNAP: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct RootOptions {
    pub max_iterations: usize,
    /// Relative update size below which a root is frozen.
    pub tolerance: f64,
    /// Largest backward error accepted for a reported root.
    pub residual_bound: f64,
    /// Working precisions in bits; the first rung is double precision.
    pub precision_ladder: Vec<u32>,
    pub seed: u64,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            max_iterations: 1000,
            tolerance: 1e-13,
            residual_bound: 1e-8,
            precision_ladder: vec![53, 106, 212],
            seed: 0,
        }
    }
}

impl RootOptions {
    /// The default ladder cut off above `bits`.
    pub fn with_max_precision(mut self, bits: u32) -> Self {
        self.precision_ladder.retain(|&b| b <= bits.max(53));
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Roots {
    pub roots: Vec<C>,
    /// Backward error `|p(r)| / Σ |c_i| |r|^i` of each root.
    pub residuals: Vec<f64>,
    /// Precision in bits at which each root was last refined.
    pub precision: Vec<u32>,
}

/// Starting points spread over circles whose radii are read off the Newton polygon of `|c_i|`.
fn initial_guesses(p: &ExtPoly, seed: u64) -> Vec<C> {
    let pts: Vec<(f64, f64)> = (0..=p.degree())
        .filter(|&i| !p.coeff(i).is_zero())
        .map(|i| (i as f64, p.coeff(i).log2_abs()))
        .collect();
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &q in &pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) * (q.1 - a.1) - (b.1 - a.1) * (q.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(q);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(p.degree());
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let count = (b.0 - a.0) as usize;
        let radius = ((a.1 - b.1) / (b.0 - a.0)).exp2();
        let offset: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        for j in 0..count {
            let angle = offset + std::f64::consts::TAU * j as f64 / count as f64;
            out.push(C::from_polar(radius, angle));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Active,
    /// Update fell below the relative tolerance.
    Converged,
    /// Residual reached the evaluation noise before the update became small.
    AtFloor,
}

type Evaluation = (ExtComplex, ExtComplex, ExtComplex);
type EvalFn<'a> = Box<dyn Fn(C) -> Evaluation + Sync + 'a>;
type ResidualFn<'a> = Box<dyn Fn(C) -> f64 + Sync + 'a>;
type NumTerm = (Vec<usize>, Vec<(usize, Vec<f64>)>);

/// One rung of refinement.
struct Tier<'a> {
    bits: u32,
    /// `(p(z), p'(z), s)` with `s` the magnitude against which rounding in `p(z)` is measured.
    eval: EvalFn<'a>,
    residual: ResidualFn<'a>,
    floor: f64,
    /// Whether roots stopped by noise count as found on this rung.
    accept_floor: bool,
}

/// `d` starting points clustered around earlier roots, each reused in turn with growing jitter.
fn seeded_guesses(prev: &[C], d: usize, seed: u64) -> Vec<C> {
    let prev: Vec<C> = prev.iter().copied().filter(|r| r.norm() > 0.0).collect();
    let spacing: Vec<f64> = prev
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let near = prev
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &b)| (a - b).norm())
                .fold(f64::INFINITY, f64::min);
            near.min(0.1 * a.norm())
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..d)
        .map(|i| {
            let j = i % prev.len();
            let round = i / prev.len();
            let radius = spacing[j] * if round == 0 { 1e-3 } else { 0.4 * round as f64 };
            prev[j] + C::from_polar(radius, rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect()
}

/// Jacobi-style Aberth–Ehrlich sweeps over the active roots.
fn aberth(z: &mut [C], state: &mut [State], tier: &Tier, opts: &RootOptions) {
    for _ in 0..opts.max_iterations {
        let current: Vec<C> = z.to_vec();
        let updates: Vec<Option<(C, State)>> = (0..z.len())
            .into_par_iter()
            .map(|i| {
                if state[i] != State::Active {
                    return None;
                }
                let zi = current[i];
                let (v, dv, noise) = (tier.eval)(zi);
                if v.is_zero() {
                    return Some((C::new(0.0, 0.0), State::Converged));
                }
                let at_floor = v.abs_ratio(noise) <= tier.floor;
                let ratio = dv.div(v).to_complex();
                let repulsion: C = current
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &zj)| 1.0 / (zi - zj))
                    .sum();
                let denom = ratio - repulsion;
                let w = if denom.is_finite() && denom.norm() > 0.0 {
                    1.0 / denom
                } else if !ratio.is_finite() {
                    C::new(0.0, 0.0)
                } else {
                    C::from_polar(1e-8 * (1.0 + zi.norm()), i as f64)
                };
                let next = if w.norm() < opts.tolerance * (1.0 + zi.norm()) {
                    State::Converged
                } else if at_floor {
                    State::AtFloor
                } else {
                    State::Active
                };
                Some((w, next))
            })
            .collect();
        let mut any_active = false;
        for (i, u) in updates.into_iter().enumerate() {
            if let Some((w, next)) = u {
                z[i] -= w;
                state[i] = next;
                any_active |= next == State::Active;
            }
        }
        if !any_active {
            return;
        }
    }
}

/// Runs the tiers in order, each on the roots the earlier ones left unresolved.
/// Returns residuals and precisions, or the indices still unresolved at the end.
fn refine(
    z: &mut [C],
    tiers: &[Tier],
    opts: &RootOptions,
) -> std::result::Result<(Vec<f64>, Vec<u32>), Vec<usize>> {
    let d = z.len();
    let mut failing = vec![true; d];
    let mut residuals = vec![f64::INFINITY; d];
    let mut precision = vec![0; d];
    for tier in tiers {
        if !failing.contains(&true) {
            break;
        }
        let mut state: Vec<State> = failing
            .iter()
            .map(|&f| if f { State::Active } else { State::Converged })
            .collect();
        aberth(z, &mut state, tier, opts);
        let fresh: Vec<(usize, f64)> = (0..d)
            .into_par_iter()
            .filter(|&i| failing[i])
            .map(|i| (i, (tier.residual)(z[i])))
            .collect();
        for (i, r) in fresh {
            precision[i] = tier.bits;
            residuals[i] = r;
            failing[i] = state[i] == State::Active
                || (state[i] == State::AtFloor && !tier.accept_floor)
                || r.is_nan()
                || r >= opts.residual_bound;
        }
    }
    let stuck: Vec<usize> = (0..d).filter(|&i| failing[i]).collect();
    if stuck.is_empty() {
        Ok((residuals, precision))
    } else {
        Err(stuck)
    }
}

/// Horner tiers on the coefficients, one per rung of the ladder from `skip` on.
fn polynomial_tiers<'a>(q: &Polynomial, ext: &Arc<ExtPoly>, opts: &RootOptions, skip: usize) -> Vec<Tier<'a>> {
    let d = ext.degree();
    let ladder: Vec<u32> = if opts.precision_ladder.is_empty() { vec![53] } else { opts.precision_ladder.clone() };
    let last = ladder.len() - 1;
    ladder
        .iter()
        .enumerate()
        .skip(skip)
        .map(|(t, &bits)| {
            let floor = (d + 1) as f64 * 2f64.powi(-(bits as i32));
            let (e1, e2) = (ext.clone(), ext.clone());
            let (eval, residual): (EvalFn<'a>, ResidualFn<'a>) = if bits <= 53 {
                (
                    Box::new(move |x: C| {
                        let (v, dv) = e1.eval_with_derivative(x);
                        (v, dv, e1.abs_sum(x.norm()))
                    }),
                    Box::new(move |x: C| e2.backward_error(x)),
                )
            } else {
                let coeffs: Arc<Vec<BigFloat>> =
                    Arc::new(q.coeffs().iter().map(|c| BigFloat::from_bigint(c, bits)).collect());
                let c2 = coeffs.clone();
                (
                    Box::new(move |x: C| {
                        let (v, dv) = eval_with_derivative_big(&coeffs, x, bits);
                        (v, dv, e1.abs_sum(x.norm()))
                    }),
                    Box::new(move |x: C| eval_with_derivative_big(&c2, x, bits).0.abs_ratio(e2.abs_sum(x.norm()))),
                )
            };
            Tier {
                bits,
                eval,
                residual,
                floor,
                accept_floor: t == last,
            }
        })
        .collect()
}

/// Shared driver: deflates `λ^t`, seeds, and refines with `tiers_for(deflated, ext)`.
fn solve<'e, F>(p: &Polynomial, opts: &RootOptions, seeds: Option<&[C]>, tiers_for: F) -> Result<Roots>
where
    F: Fn(&Polynomial, &Arc<ExtPoly>) -> Vec<Tier<'e>>,
{
    let zeros = p.valuation().ok_or(Error::ZeroPolynomial)?;
    let q = p.shift_down(zeros).expect("valuation divides");
    let d = q.degree().unwrap();
    let ext = Arc::new(ExtPoly::new(&q));
    let base = *opts.precision_ladder.first().unwrap_or(&53);

    let (z, residuals, precision) = match d {
        0 => (Vec::new(), Vec::new(), Vec::new()),
        1 => {
            let r = ext.coeff(0).div(ext.coeff(1)).neg().to_complex();
            (vec![r], vec![ext.backward_error(r)], vec![base])
        }
        _ => {
            let mut z = match seeds {
                Some(prev) if prev.iter().any(|r| r.norm() > 0.0) => seeded_guesses(prev, d, opts.seed),
                _ => initial_guesses(&ext, opts.seed),
            };
            let tiers = tiers_for(&q, &ext);
            let (res, prec) = refine(&mut z, &tiers, opts)
                .map_err(|stuck| Error::RootsStuck(stuck.into_iter().map(|i| i + zeros).collect()))?;
            (z, res, prec)
        }
    };

    let mut all = vec![C::new(0.0, 0.0); zeros];
    all.extend(z);
    let mut res = vec![0.0; zeros];
    res.extend(residuals);
    let mut prec = vec![base; zeros];
    prec.extend(precision);
    assert_eq!(all.len(), p.degree().unwrap());
    Ok(Roots {
        roots: all,
        residuals: res,
        precision: prec,
    })
}

pub fn roots(p: &Polynomial, opts: &RootOptions) -> Result<Roots> {
    solve(p, opts, None, |q, ext| polynomial_tiers(q, ext, opts, 0))
}

fn horner_with_derivative(coeffs: &[f64], z: C) -> (C, C) {
    let mut p = C::new(0.0, 0.0);
    let mut dp = C::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn to_f64s(p: &Polynomial) -> Vec<f64> {
    p.coeffs().iter().map(|c| c.to_f64().unwrap_or(f64::INFINITY)).collect()
}

/// Evaluates `Z_{G_n}` and `dZ_{G_n}/dλ` by running the recursion itself in floating point,
/// rescaling by a power of two at every level.
#[derive(Clone, Debug)]
pub struct RecursiveEvaluator {
    levels: usize,
    start: Vec<Vec<f64>>,
    terms: Vec<NumTerm>,
    weights: Vec<i32>,
}

impl RecursiveEvaluator {
    pub fn new(plan: &StepPlan, start: &PolyVector, levels: usize) -> Self {
        let terms = plan
            .terms()
            .iter()
            .map(|t| {
                let w = t.weights.iter().map(|(x, p)| (*x, to_f64s(p))).collect();
                (t.copies.clone(), w)
            })
            .collect();
        RecursiveEvaluator {
            levels,
            start: start.entries.iter().map(to_f64s).collect(),
            terms,
            weights: (0..start.entries.len()).map(|x| x.count_ones() as i32).collect(),
        }
    }

    fn rescale(v: &mut [(C, C)], exp: &mut i64) {
        let top = v.iter().map(|(a, b)| a.norm().max(b.norm())).fold(0.0, f64::max);
        if top == 0.0 || !top.is_finite() {
            return;
        }
        let e = top.log2().floor() as i64;
        let s = pow2(-e);
        for (a, b) in v.iter_mut() {
            *a *= s;
            *b *= s;
        }
        *exp += e;
    }

    /// `(Z(λ), Z'(λ), Σ_x |v_x(λ)|)`.
    pub fn eval(&self, lambda: C) -> (ExtComplex, ExtComplex, ExtComplex) {
        let lambda = if lambda == C::new(0.0, 0.0) { C::new(1e-30, 0.0) } else { lambda };
        let mut v: Vec<(C, C)> = self.start.iter().map(|c| horner_with_derivative(c, lambda)).collect();
        let mut exp = 0i64;
        Self::rescale(&mut v, &mut exp);
        let inv = 1.0 / lambda;
        let mut m = 0;
        for _ in 0..self.levels {
            // u_y = v_y λ^{-|y|} and its derivative.
            let u: Vec<(C, C)> = v
                .iter()
                .zip(&self.weights)
                .map(|(&(a, da), &w)| {
                    let s = inv.powi(w);
                    (a * s, da * s - a * s * inv * w as f64)
                })
                .collect();
            let mut out = vec![(C::new(0.0, 0.0), C::new(0.0, 0.0)); v.len()];
            for (copies, weights) in &self.terms {
                m = copies.len();
                let (mut prod, mut dprod) = (C::new(1.0, 0.0), C::new(0.0, 0.0));
                for &c in copies {
                    let (a, da) = u[c];
                    dprod = dprod * a + prod * da;
                    prod *= a;
                }
                for (x, w) in weights {
                    let (wv, wd) = horner_with_derivative(w, lambda);
                    out[*x].0 += wv * prod;
                    out[*x].1 += wd * prod + wv * dprod;
                }
            }
            v = out;
            exp *= m as i64;
            Self::rescale(&mut v, &mut exp);
        }
        let z: C = v.iter().map(|p| p.0).sum();
        let dz: C = v.iter().map(|p| p.1).sum();
        let noise: f64 = v.iter().map(|p| p.0.norm()).sum();
        (
            ExtComplex::from_parts(z.re, exp, z.im, exp),
            ExtComplex::from_parts(dz.re, exp, dz.im, exp),
            ExtComplex::from_parts(noise, exp, 0.0, exp),
        )
    }

    /// `|Z(λ)| / Z(|λ|)`, the backward error for nonnegative coefficients.
    pub fn backward_error(&self, lambda: C) -> f64 {
        let (v, _, _) = self.eval(lambda);
        let (a, _, _) = self.eval(C::new(lambda.norm(), 0.0));
        v.abs_ratio(a)
    }
}

/// Roots of `Z_{G_n}` refined against the recursive evaluator first, then against the
/// coefficients at the higher rungs of the ladder.
///
/// `previous`, the roots of an earlier level, seed the iteration when given.
pub fn level_roots(
    eval: &RecursiveEvaluator,
    p: &Polynomial,
    opts: &RootOptions,
    previous: Option<&[C]>,
) -> Result<Roots> {
    if p.valuation() != Some(0) || !p.is_nonnegative() {
        return roots(p, opts);
    }
    let floor = 1024.0 * (eval.levels + 1) as f64 * f64::EPSILON;
    solve(p, opts, previous, |q, ext| {
        let mut tiers = vec![Tier {
            bits: 53,
            eval: Box::new(|x: C| eval.eval(x)),
            residual: Box::new(|x: C| eval.backward_error(x)),
            floor,
            accept_floor: true,
        }];
        tiers.extend(polynomial_tiers(q, ext, opts, 1));
        tiers
    })
}

fn snap_real(z: C) -> C {
    if z.im.abs() < REAL_SNAP * (1.0 + z.norm()) {
        C::new(z.re, 0.0)
    } else {
        z
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AtlasLevel {
    pub n: usize,
    pub degree: usize,
    pub vertices: u128,
    pub roots: Vec<C>,
    pub residuals: Vec<f64>,
    pub max_modulus: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroAtlas {
    pub levels: Vec<AtlasLevel>,
}

impl ZeroAtlas {
    pub fn max_moduli(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.max_modulus).collect()
    }

    pub fn level(&self, n: usize) -> Option<&AtlasLevel> {
        self.levels.iter().find(|l| l.n == n)
    }
}

/// Atlas of explicitly given polynomials, `(n, |V(G_n)|, Z_{G_n})`.
pub fn atlas_from_polys(polys: &[(usize, u128, Polynomial)], opts: &RootOptions) -> Result<ZeroAtlas> {
    let levels = polys
        .iter()
        .map(|(n, vertices, p)| Ok(atlas_level(*n, *vertices, p, roots(p, opts)?, opts)))
        .collect::<Result<_>>()?;
    Ok(ZeroAtlas { levels })
}

fn atlas_level(n: usize, vertices: u128, p: &Polynomial, r: Roots, opts: &RootOptions) -> AtlasLevel {
    let roots: Vec<C> = r.roots.into_iter().map(snap_real).collect();
    let degree = p.degree().unwrap_or(0);
    assert_eq!(roots.len(), degree);
    assert!(r.residuals.iter().all(|&e| e < opts.residual_bound));
    AtlasLevel {
        n,
        degree,
        vertices,
        max_modulus: roots.iter().map(|z| z.norm()).fold(0.0, f64::max),
        residuals: r.residuals,
        roots,
    }
}

pub fn atlas(
    d: &Gluing,
    g0: &MarkedGraph,
    n_max: usize,
    degree_budget: u128,
    opts: &RootOptions,
    oracle: &Oracle,
) -> Result<ZeroAtlas> {
    let seq = sequence(d, g0, n_max, degree_budget, oracle)?;
    if let Some(e) = seq.truncated {
        return Err(e);
    }
    let plan = StepPlan::from_gluing(d)?;
    let counts = vertex_counts(d, g0.vertex_count(), n_max);
    let mut levels: Vec<AtlasLevel> = Vec::with_capacity(seq.levels.len());
    for v in &seq.levels {
        let p = v.total();
        let eval = RecursiveEvaluator::new(&plan, &seq.levels[0], v.level);
        let previous = levels.last().map(|l| l.roots.as_slice());
        let r = level_roots(&eval, &p, opts, previous)?;
        levels.push(atlas_level(v.level, counts[v.level], &p, r, opts));
    }
    Ok(ZeroAtlas { levels })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlateauConfig {
    /// Late maximum may exceed the early maximum by at most this factor.
    pub plateau_factor: f64,
    /// Successive ratio counted as growth.
    pub growth_ratio: f64,
}

impl Default for PlateauConfig {
    fn default() -> Self {
        PlateauConfig {
            plateau_factor: 1.2,
            growth_ratio: 1.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    BoundedPlateau,
    Growing,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::BoundedPlateau => "bounded-plateau",
            Verdict::Growing => "growing",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundednessReport {
    pub verdict: Verdict,
    /// `M(n) / M(n-1)` for consecutive levels.
    pub ratios: Vec<f64>,
    pub early_levels: Vec<usize>,
    pub late_levels: Vec<usize>,
    pub early_max: f64,
    pub late_max: f64,
}

/// Compares the last three levels with three levels around the middle of the run.
pub fn boundedness_report(a: &ZeroAtlas, cfg: &PlateauConfig) -> BoundednessReport {
    let moduli = a.max_moduli();
    let ratios: Vec<f64> = moduli.windows(2).map(|w| w[1] / w[0]).collect();
    let len = moduli.len();
    if len < 6 {
        return BoundednessReport {
            verdict: Verdict::Inconclusive,
            ratios,
            early_levels: Vec::new(),
            late_levels: Vec::new(),
            early_max: f64::NAN,
            late_max: f64::NAN,
        };
    }
    let last = len - 1;
    let mid = last / 2 + 1;
    let early: Vec<usize> = (mid - 2..=mid).collect();
    let late: Vec<usize> = (last - 2..=last).collect();
    let window_max = |idx: &[usize]| idx.iter().map(|&i| moduli[i]).fold(0.0, f64::max);
    let (early_max, late_max) = (window_max(&early), window_max(&late));
    let growing = ratios[ratios.len() - 3..].iter().all(|&r| r >= cfg.growth_ratio);
    let verdict = if growing {
        Verdict::Growing
    } else if late_max <= cfg.plateau_factor * early_max {
        Verdict::BoundedPlateau
    } else {
        Verdict::Inconclusive
    };
    BoundednessReport {
        verdict,
        ratios,
        early_levels: early.iter().map(|&i| a.levels[i].n).collect(),
        late_levels: late.iter().map(|&i| a.levels[i].n).collect(),
        early_max,
        late_max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gluing::catalog;
    use proptest::prelude::*;

    fn sorted(mut v: Vec<C>) -> Vec<C> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    fn find(p: &[i64]) -> Vec<C> {
        sorted(roots(&Polynomial::from_i64s(p), &RootOptions::default()).unwrap().roots)
    }

    #[test]
    fn small_examples() {
        let r = find(&[1, 3]);
        assert!((r[0] - C::new(-1.0 / 3.0, 0.0)).norm() < 1e-15);
        let r = find(&[1, 3, 1]);
        assert!((r[0].re + (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-13);
        assert!((r[1].re + (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-13);
        let r = find(&[0, 0, 1, 1]);
        assert_eq!(r.len(), 3);
        assert!((r[0] + 1.0).norm() < 1e-13);
        assert_eq!(r[1], C::new(0.0, 0.0));
        assert_eq!(r[2], C::new(0.0, 0.0));
        assert!(find(&[7]).is_empty());
        assert!(matches!(roots(&Polynomial::zero(), &RootOptions::default()), Err(Error::ZeroPolynomial)));
    }

    #[test]
    fn roots_of_unity_and_multiple_roots() {
        let mut c = vec![0i64; 13];
        c[0] = -1;
        c[12] = 1;
        let r = find(&c);
        assert_eq!(r.len(), 12);
        for z in &r {
            assert!((z.norm() - 1.0).abs() < 1e-12);
        }
        // (λ + 1)^6 is badly conditioned; backward error is what is guaranteed.
        let p = Polynomial::from_i64s(&[1, 6, 15, 20, 15, 6, 1]);
        let r = roots(&p, &RootOptions::default()).unwrap();
        assert!(r.residuals.iter().all(|&e| e < 1e-8));
        for z in r.roots {
            assert!((z + 1.0).norm() < 1e-2);
        }
    }

    #[test]
    fn huge_coefficients() {
        // (λ + 10^100)(λ + 1)(λ + 10^-3 scaled) with exact integers.
        let a = Polynomial::from_coeffs(vec![num_bigint::BigInt::from(10).pow(100), 1.into()]);
        let b = Polynomial::from_i64s(&[1, 1]);
        let c = Polynomial::from_i64s(&[1, 1000]);
        let r = sorted(roots(&(&(&a * &b) * &c), &RootOptions::default()).unwrap().roots);
        assert!((r[0].re / -1e100 - 1.0).abs() < 1e-12);
        assert!((r[1].re + 1.0).abs() < 1e-12);
        assert!((r[2].re + 1e-3).abs() < 1e-15);
    }

    #[test]
    fn path_roots_are_real_and_below_a_quarter() {
        let e = catalog("chebyshev").unwrap();
        let d = Gluing::new(e.data).unwrap();
        let a = atlas(&d, &e.start, 6, 1 << 20, &RootOptions::default(), &Oracle::default()).unwrap();
        for level in &a.levels {
            for z in &level.roots {
                assert_eq!(z.im, 0.0);
                assert!(z.re < -0.25);
            }
        }
        // The path on N vertices has roots -1 / (4 cos²(jπ / (N + 2))).
        let n = 65.0f64;
        let j = (n / 2.0).ceil();
        let expected = 1.0 / (4.0 * (j * std::f64::consts::PI / (n + 2.0)).cos().powi(2));
        assert!((a.max_moduli()[6] / expected - 1.0).abs() < 1e-9);
    }

    #[test]
    fn recursive_evaluation_matches_the_coefficients() {
        let e = catalog("chebyshev-tripod").unwrap();
        let d = Gluing::new(e.data).unwrap();
        let seq = sequence(&d, &e.start, 3, 1 << 20, &Oracle::default()).unwrap();
        let plan = StepPlan::from_gluing(&d).unwrap();
        let ev = RecursiveEvaluator::new(&plan, &seq.levels[0], 3);
        let ext = ExtPoly::new(&seq.levels[3].total());
        for z in [C::new(0.7, 0.2), C::new(-0.1, 1.3), C::new(4.0, -2.0)] {
            let (a, da) = ext.eval_with_derivative(z);
            let (b, db, _) = ev.eval(z);
            assert!(a.sub(b).abs_ratio(a) < 1e-12);
            assert!(da.sub(db).abs_ratio(da) < 1e-12);
        }
    }

    #[test]
    fn tripod_levels_plateau() {
        let e = catalog("chebyshev-tripod").unwrap();
        let d = Gluing::new(e.data).unwrap();
        let a = atlas(&d, &e.start, 6, 1 << 20, &RootOptions::default(), &Oracle::default()).unwrap();
        // Independent high-precision reference for the largest modulus at n = 6.
        assert!((a.max_moduli()[6] - 2.593809047987442).abs() < 1e-9);
        for l in &a.levels {
            for z in &l.roots {
                assert!(l.roots.iter().any(|w| (w - z.conj()).norm() < 1e-10 * (1.0 + z.norm())));
            }
        }
    }

    #[test]
    fn constant_atlas_is_a_plateau() {
        let p = Polynomial::from_i64s(&[1, 4, 2]);
        let polys: Vec<(usize, u128, Polynomial)> = (0..7).map(|n| (n, 3, p.clone())).collect();
        let a = atlas_from_polys(&polys, &RootOptions::default()).unwrap();
        let r = boundedness_report(&a, &PlateauConfig::default());
        assert_eq!(r.verdict, Verdict::BoundedPlateau);
        assert_eq!(r.early_levels, vec![2, 3, 4]);
        assert_eq!(r.late_levels, vec![4, 5, 6]);
        let short = ZeroAtlas { levels: a.levels[..4].to_vec() };
        assert_eq!(boundedness_report(&short, &PlateauConfig::default()).verdict, Verdict::Inconclusive);
    }

    #[test]
    fn ladder_can_be_cut() {
        let o = RootOptions::default().with_max_precision(106);
        assert_eq!(o.precision_ladder, vec![53, 106]);
        let o = RootOptions::default().with_max_precision(10);
        assert_eq!(o.precision_ladder, vec![53]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn conjugate_closed_and_scale_invariant(coeffs in prop::collection::vec(-20i64..20, 2..9), scale in 1i64..1000, seed in any::<u64>()) {
            let p = Polynomial::from_i64s(&coeffs);
            prop_assume!(p.degree().unwrap_or(0) >= 1);
            let opts = RootOptions { seed, ..RootOptions::default() };
            let r = roots(&p, &opts).unwrap();
            prop_assert_eq!(r.roots.len(), p.degree().unwrap());
            prop_assert!(r.residuals.iter().all(|&e| e < 1e-8));
            // Only simple, well separated roots have accurate locations.
            let sep = r.roots.iter().enumerate().flat_map(|(i, a)| r.roots.iter().skip(i + 1).map(move |b| (a - b).norm())).fold(f64::INFINITY, f64::min);
            prop_assume!(sep > 1e-2);
            let snapped: Vec<C> = r.roots.iter().map(|&z| snap_real(z)).collect();
            for z in &snapped {
                prop_assert!(snapped.iter().any(|w| (w - z.conj()).norm() < 1e-10 * (1.0 + z.norm())));
            }
            let scaled = roots(&p.scale(&scale.into()), &opts).unwrap();
            for x in &r.roots {
                prop_assert!(scaled.roots.iter().any(|y| (x - y).norm() < 1e-10 * (1.0 + x.norm())));
            }
        }
    }
}
