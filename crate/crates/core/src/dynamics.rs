//! The recursion at a fixed complex activity `λ` as a rational self-map of
//! projective space, and the numerical checks built on it.
//!
//! Homogeneous coordinates are indexed by assignments `x ∈ {0,1}^k`. The chart
//! `(0) ≠ 0` uses `[x] = (x)/(0)` for `x ≠ 0`, stored at index `x - 1`. The
//! invariant manifold is the locus `[x] = ∏_{j: x_j = 1} [e_j]`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gluing::{Classification, Gluing, LabelDynamics};
use crate::polyengine::StepPlan;

pub const CHART_THRESHOLD: f64 = 1e-14;
pub const INDETERMINACY_THRESHOLD: f64 = 1e-300;
pub const RANK_TOLERANCE: f64 = 1e-8;
pub const CONVERGENCE_TOLERANCE: f64 = 1e-10;
pub const RESIDUAL_FLOOR: f64 = 1e-14;

type C = Complex64;

fn max_modulus(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A point of projective space in homogeneous coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct NumVector {
    pub entries: Vec<C>,
    pub lambda: C,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    pub coords: Vec<C>,
    pub lambda: C,
}

impl ChartPoint {
    /// Homogeneous coordinates `(1, [x]...)`.
    pub fn lift(&self) -> NumVector {
        let mut entries = Vec::with_capacity(self.coords.len() + 1);
        entries.push(C::new(1.0, 0.0));
        entries.extend_from_slice(&self.coords);
        NumVector { entries, lambda: self.lambda }
    }

    pub fn k(&self) -> usize {
        (self.coords.len() + 1).trailing_zeros() as usize
    }

    /// The manifold values `[e_j]`.
    pub fn unit_coords(&self) -> Vec<C> {
        (0..self.k()).map(|j| self.coords[(1 << j) - 1]).collect()
    }
}

/// The point of the invariant manifold with the given values of `[e_j]`.
pub fn manifold_point(lambda: C, free: &[C]) -> ChartPoint {
    let k = free.len();
    let coords = (1..1usize << k)
        .map(|x| (0..k).filter(|&j| x >> j & 1 == 1).map(|j| free[j]).product())
        .collect();
    ChartPoint { coords, lambda }
}

pub fn to_chart(v: &NumVector) -> Result<ChartPoint> {
    let scale = max_modulus(&v.entries);
    let base = v.entries[0];
    if scale == 0.0 || base.norm() <= CHART_THRESHOLD * scale {
        return Err(Error::ChartBreakdown {
            modulus: if scale == 0.0 { 0.0 } else { base.norm() / scale },
        });
    }
    Ok(ChartPoint {
        coords: v.entries[1..].iter().map(|z| z / base).collect(),
        lambda: v.lambda,
    })
}

/// Largest deviation from the manifold relations, relative to the size of the point.
pub fn manifold_residual(p: &ChartPoint) -> f64 {
    let k = p.k();
    let units = p.unit_coords();
    let scale = max_modulus(&p.coords).max(1.0);
    (1..1usize << k)
        .filter(|x| x.count_ones() >= 2)
        .map(|x| {
            let prod: C = (0..k).filter(|&j| x >> j & 1 == 1).map(|j| units[j]).product();
            (p.coords[x - 1] - prod).norm()
        })
        .fold(0.0, f64::max)
        / scale
}

/// Fubini–Study distance, in `[0, π/2]`.
pub fn fs_distance(u: &[C], v: &[C]) -> f64 {
    let nu = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let inner: C = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum::<C>() / (nu * nv);
    if inner.norm() == 0.0 {
        return std::f64::consts::FRAC_PI_2;
    }
    let phase = (inner / inner.norm()).conj();
    let gap = u
        .iter()
        .zip(v)
        .map(|(a, b)| (a / nu - b * phase / nv).norm_sqr())
        .sum::<f64>()
        .sqrt();
    2.0 * (gap / 2.0).min(1.0).asin()
}

#[derive(Clone, Debug)]
struct NumTerm {
    copies: Vec<usize>,
    weights: Vec<(usize, C)>,
}

/// The homogeneous polynomial map `F` of the recursion at a fixed `λ`.
#[derive(Clone, Debug)]
pub struct NumericMap {
    k: usize,
    m: usize,
    lambda: C,
    terms: Vec<NumTerm>,
    inv_pow: Vec<C>,
}

impl NumericMap {
    pub fn new(plan: &StepPlan, lambda: C) -> Result<Self> {
        if lambda == C::new(0.0, 0.0) {
            return Err(Error::ZeroLambda);
        }
        let terms = plan
            .terms()
            .iter()
            .map(|t| NumTerm {
                copies: t.copies.clone(),
                weights: t
                    .weights
                    .iter()
                    .map(|(x, w)| {
                        let value = w
                            .coeffs()
                            .iter()
                            .rev()
                            .fold(C::new(0.0, 0.0), |acc, c| acc * lambda + crate::numeric::ExtComplex::from_bigint(c).to_complex());
                        (*x, value)
                    })
                    .collect(),
            })
            .collect();
        let inv = 1.0 / lambda;
        let inv_pow = (0..1usize << plan.k()).map(|y| inv.powi(y.count_ones() as i32)).collect();
        Ok(NumericMap {
            k: plan.k(),
            m: plan.m(),
            lambda,
            terms,
            inv_pow,
        })
    }

    pub fn from_gluing(d: &Gluing, lambda: C) -> Result<Self> {
        Self::new(&StepPlan::from_gluing(d)?, lambda)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn lambda(&self) -> C {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        1 << self.k
    }

    fn check_len(&self, v: &[C]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "vector has {} entries, expected {}",
                v.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// `F(v)` with no normalisation or checks.
    pub fn raw(&self, v: &[C]) -> Vec<C> {
        let u: Vec<C> = v.iter().zip(&self.inv_pow).map(|(a, b)| a * b).collect();
        let mut out = vec![C::new(0.0, 0.0); self.dim()];
        for t in &self.terms {
            let prod: C = t.copies.iter().map(|&c| u[c]).product();
            for &(x, w) in &t.weights {
                out[x] += w * prod;
            }
        }
        out
    }

    /// `F(v)` together with its full matrix of partial derivatives `∂F_x / ∂v_u`.
    pub fn raw_with_jacobian(&self, v: &[C]) -> (Vec<C>, DMatrix<C>) {
        let n = self.dim();
        let u: Vec<C> = v.iter().zip(&self.inv_pow).map(|(a, b)| a * b).collect();
        let mut out = vec![C::new(0.0, 0.0); n];
        let mut jac = DMatrix::from_element(n, n, C::new(0.0, 0.0));
        let one = C::new(1.0, 0.0);
        for t in &self.terms {
            let vals: Vec<C> = t.copies.iter().map(|&c| u[c]).collect();
            let mut prefix = vec![one; vals.len() + 1];
            for i in 0..vals.len() {
                prefix[i + 1] = prefix[i] * vals[i];
            }
            let mut suffix = one;
            let mut partial = vec![one; vals.len()];
            for i in (0..vals.len()).rev() {
                partial[i] = prefix[i] * suffix;
                suffix *= vals[i];
            }
            for &(x, w) in &t.weights {
                out[x] += w * prefix[vals.len()];
                for (i, &c) in t.copies.iter().enumerate() {
                    jac[(x, c)] += w * partial[i] * self.inv_pow[c];
                }
            }
        }
        (out, jac)
    }

    /// Homogeneous image of degree `m`, refusing points sent to zero.
    pub fn eval(&self, v: &NumVector) -> Result<NumVector> {
        self.check_len(&v.entries)?;
        let s = max_modulus(&v.entries);
        if s == 0.0 {
            return Err(Error::Indeterminacy);
        }
        let scaled: Vec<C> = v.entries.iter().map(|z| z / s).collect();
        let image = self.raw(&scaled);
        if max_modulus(&image) < INDETERMINACY_THRESHOLD {
            return Err(Error::Indeterminacy);
        }
        let back = s.powi(self.m as i32);
        Ok(NumVector {
            entries: image.into_iter().map(|z| z * back).collect(),
            lambda: self.lambda,
        })
    }

    /// Image rescaled to unit max modulus.
    pub fn eval_projective(&self, v: &[C]) -> Result<Vec<C>> {
        self.check_len(v)?;
        let s = max_modulus(v);
        if s == 0.0 {
            return Err(Error::Indeterminacy);
        }
        let scaled: Vec<C> = v.iter().map(|z| z / s).collect();
        let image = self.raw(&scaled);
        let t = max_modulus(&image);
        if t < INDETERMINACY_THRESHOLD {
            return Err(Error::Indeterminacy);
        }
        Ok(image.into_iter().map(|z| z / t).collect())
    }

    pub fn rescale(&self, v: &NumVector) -> NumVector {
        NumVector {
            entries: v.entries.iter().zip(&self.inv_pow).map(|(a, b)| a * b).collect(),
            lambda: v.lambda,
        }
    }

    pub fn unrescale(&self, v: &NumVector) -> NumVector {
        NumVector {
            entries: v.entries.iter().zip(&self.inv_pow).map(|(a, b)| a / b).collect(),
            lambda: v.lambda,
        }
    }

    /// The recursion written directly in rescaled coordinates `λ^{-||x||}(x)`.
    pub fn eval_rescaled(&self, w: &[C]) -> Vec<C> {
        let mut out = vec![C::new(0.0, 0.0); self.dim()];
        for t in &self.terms {
            let prod: C = t.copies.iter().map(|&c| w[c]).product();
            for &(x, wt) in &t.weights {
                out[x] += wt * prod;
            }
        }
        out.iter().zip(&self.inv_pow).map(|(a, b)| a * b).collect()
    }

    pub fn step_chart(&self, p: &ChartPoint) -> Result<ChartPoint> {
        to_chart(&self.eval(&p.lift())?)
    }

    /// Jacobian of the chart map at `p`, as a `(2^k - 1)`-square matrix.
    pub fn jacobian(&self, p: &ChartPoint) -> Result<DMatrix<C>> {
        let v = p.lift();
        let (f, df) = self.raw_with_jacobian(&v.entries);
        let scale = max_modulus(&f);
        if scale < INDETERMINACY_THRESHOLD {
            return Err(Error::Indeterminacy);
        }
        if f[0].norm() <= CHART_THRESHOLD * scale {
            return Err(Error::ChartBreakdown { modulus: f[0].norm() / scale });
        }
        let d = self.dim() - 1;
        let f0 = f[0];
        let f0sq = f0 * f0;
        Ok(DMatrix::from_fn(d, d, |r, c| {
            (df[(r + 1, c + 1)] * f0 - f[r + 1] * df[(0, c + 1)]) / f0sq
        }))
    }

    /// Jacobian of the `iterations`-fold chart map, by the chain rule along the orbit.
    pub fn jacobian_iterate(&self, p: &ChartPoint, iterations: usize) -> Result<DMatrix<C>> {
        let d = self.dim() - 1;
        let mut acc = DMatrix::identity(d, d);
        let mut point = p.clone();
        for _ in 0..iterations {
            acc = self.jacobian(&point)? * acc;
            point = self.step_chart(&point)?;
        }
        Ok(acc)
    }
}

/// Rank by Gaussian elimination with complete pivoting; pivots at or below `threshold` count as zero.
pub fn numeric_rank(a: &DMatrix<C>, threshold: f64) -> usize {
    let mut m = a.clone();
    let (rows, cols) = m.shape();
    let mut rank = 0;
    for step in 0..rows.min(cols) {
        let mut best = (step, step, 0.0);
        for r in step..rows {
            for c in step..cols {
                let v = m[(r, c)].norm();
                if v > best.2 {
                    best = (r, c, v);
                }
            }
        }
        if best.2 <= threshold {
            break;
        }
        m.swap_rows(step, best.0);
        m.swap_columns(step, best.1);
        let pivot = m[(step, step)];
        for r in step + 1..rows {
            let factor = m[(r, step)] / pivot;
            for c in step..cols {
                let sub = factor * m[(step, c)];
                m[(r, c)] -= sub;
            }
        }
        rank += 1;
    }
    rank
}

fn frobenius(a: &DMatrix<C>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn matrix_power(a: &DMatrix<C>, e: usize) -> DMatrix<C> {
    let mut acc = DMatrix::identity(a.nrows(), a.ncols());
    for _ in 0..e {
        acc = &acc * a;
    }
    acc
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport {
    pub dimension: usize,
    pub expected_rank: usize,
    pub jacobian_norm: f64,
    /// `‖J^D (J − I)^D‖`, zero exactly when the spectrum lies in `{0, 1}`.
    pub nu1: f64,
    pub nu1_normalized: f64,
    pub rank_of_power: usize,
    pub kernel_dimension: usize,
}

impl SpectralReport {
    pub fn holds(&self) -> bool {
        self.nu1_normalized < 1e-8
            && self.rank_of_power == self.expected_rank
            && self.kernel_dimension == self.dimension - self.expected_rank
    }
}

impl std::fmt::Display for SpectralReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "dimension: {}", self.dimension)?;
        writeln!(f, "expected_rank: {}", self.expected_rank)?;
        writeln!(f, "jacobian_norm: {:e}", self.jacobian_norm)?;
        writeln!(f, "nu1: {:e}", self.nu1)?;
        writeln!(f, "nu1_normalized: {:e}", self.nu1_normalized)?;
        writeln!(f, "rank_of_power: {}", self.rank_of_power)?;
        writeln!(f, "kernel_dimension: {}", self.kernel_dimension)?;
        writeln!(f, "holds: {}", self.holds())
    }
}

pub fn spectral_check(j: &DMatrix<C>, expected_rank: usize) -> SpectralReport {
    spectral_check_with(j, expected_rank, RANK_TOLERANCE)
}

pub fn spectral_check_with(j: &DMatrix<C>, expected_rank: usize, tolerance: f64) -> SpectralReport {
    let d = j.nrows();
    let identity = DMatrix::<C>::identity(d, d);
    let power = matrix_power(j, d);
    let shifted = matrix_power(&(j - &identity), d);
    let nu1 = frobenius(&(&power * &shifted));
    let norm = frobenius(j);
    SpectralReport {
        dimension: d,
        expected_rank,
        jacobian_norm: norm,
        nu1,
        nu1_normalized: nu1 / (1.0 + norm).powi(2 * d as i32),
        rank_of_power: numeric_rank(&power, tolerance * frobenius(&power)),
        kernel_dimension: d - numeric_rank(j, tolerance * norm),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContractionFit {
    pub slope: f64,
    /// `(ε, residual before, residual after)` for every ε kept in the fit.
    pub points: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitStep {
    pub iter: usize,
    /// Homogeneous coordinates with unit max modulus.
    pub point: Vec<C>,
    pub chart: Option<Vec<C>>,
    pub residual: Option<f64>,
    /// Distance from the previous point.
    pub step_distance: Option<f64>,
    /// Distance from the point one label period earlier.
    pub period_distance: Option<f64>,
    /// Distance to the point with all mass on the all-ones coordinate.
    pub dist_to_ones_mass: f64,
    /// Distance from the rescaled point to `[1 : … : 1]`.
    pub rescaled_dist_to_ones: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitSummary {
    pub steps: Vec<OrbitStep>,
    pub period: usize,
    pub converged_at: Option<usize>,
    pub indeterminate_at: Option<usize>,
}

impl OrbitSummary {
    pub fn converged(&self) -> bool {
        self.converged_at.is_some()
    }

    pub fn last(&self) -> &OrbitStep {
        self.steps.last().expect("orbit has its starting point")
    }
}

/// A gluing datum at a fixed activity: the map together with its label dynamics.
#[derive(Clone, Debug)]
pub struct System {
    map: NumericMap,
    labels: LabelDynamics,
    class: Classification,
}

impl System {
    pub fn new(d: &Gluing, lambda: C) -> Result<Self> {
        Ok(System {
            map: NumericMap::from_gluing(d, lambda)?,
            labels: d.label_dynamics(),
            class: d.classify(),
        })
    }

    pub fn map(&self) -> &NumericMap {
        &self.map
    }

    pub fn labels(&self) -> &LabelDynamics {
        &self.labels
    }

    pub fn periodic_count(&self) -> usize {
        self.labels.periodic_labels().len()
    }

    /// A point of the periodic submanifold with the periodic labels' values set to `free`.
    pub fn fixed_manifold_point(&self, free: &[C]) -> Result<ChartPoint> {
        if !self.class.stable {
            return Err(Error::Refused("gluing data is not stable".into()));
        }
        let periodic = self.labels.periodic_labels();
        if free.len() != periodic.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} free coordinates (one per periodic label), got {}",
                periodic.len(),
                free.len()
            )));
        }
        let mut units = vec![C::new(1.0, 0.0); self.map.k()];
        for (&j, &z) in periodic.iter().zip(free) {
            units[j] = z;
        }
        let mut p = manifold_point(self.map.lambda(), &units);
        for _ in 0..self.labels.preperiod {
            p = self.map.step_chart(&p)?;
        }
        Ok(p)
    }

    /// Jacobian of the `p`-fold map at `point` checked against the predicted spectrum.
    pub fn spectral_report(&self, point: &ChartPoint, p: usize) -> Result<SpectralReport> {
        let j = self.map.jacobian_iterate(point, p)?;
        Ok(spectral_check(&j, self.periodic_count()))
    }

    /// Order with which the distance to the manifold shrinks under one step.
    pub fn contraction_order(&self, base: &ChartPoint, ladder: &[f64], seed: u64) -> Result<ContractionFit> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dir: Vec<C> = (0..base.coords.len())
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = dir.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        dir.iter_mut().for_each(|z| *z /= norm);
        let mut points = Vec::new();
        for &eps in ladder {
            let perturbed = ChartPoint {
                coords: base.coords.iter().zip(&dir).map(|(a, b)| a + b * eps).collect(),
                lambda: base.lambda,
            };
            let before = manifold_residual(&perturbed);
            let after = manifold_residual(&self.map.step_chart(&perturbed)?);
            if before >= RESIDUAL_FLOOR && after >= RESIDUAL_FLOOR {
                points.push((eps, before, after));
            }
        }
        if points.len() < 3 {
            return Err(Error::TooFewPoints { needed: 3, got: points.len() });
        }
        let xs: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.2.ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        Ok(ContractionFit { slope: sxy / sxx, points })
    }

    /// Iterates the projective map from `start`, renormalising every step.
    pub fn orbit(&self, start: &NumVector, n_max: usize) -> Result<OrbitSummary> {
        let dim = self.map.dim();
        if start.entries.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "start has {} entries, expected {dim}",
                start.entries.len()
            )));
        }
        let s = max_modulus(&start.entries);
        if s == 0.0 {
            return Err(Error::Indeterminacy);
        }
        let period = self.labels.period;
        let mut ones_mass = vec![C::new(0.0, 0.0); dim];
        ones_mass[dim - 1] = C::new(1.0, 0.0);
        let ones = vec![C::new(1.0, 0.0); dim];
        let record = |iter: usize, point: Vec<C>, history: &[OrbitStep]| {
            let chart = to_chart(&NumVector { entries: point.clone(), lambda: self.map.lambda() }).ok();
            let residual = chart.as_ref().map(manifold_residual);
            let rescaled = self.map.rescale(&NumVector { entries: point.clone(), lambda: self.map.lambda() });
            OrbitStep {
                iter,
                step_distance: history.last().map(|prev| fs_distance(&prev.point, &point)),
                period_distance: (iter >= period).then(|| fs_distance(&history[iter - period].point, &point)),
                dist_to_ones_mass: fs_distance(&point, &ones_mass),
                rescaled_dist_to_ones: fs_distance(&rescaled.entries, &ones),
                chart: chart.map(|c| c.coords),
                residual,
                point,
            }
        };
        let mut steps: Vec<OrbitStep> = Vec::with_capacity(n_max + 1);
        let first = record(0, start.entries.iter().map(|z| z / s).collect(), &steps);
        steps.push(first);
        let mut indeterminate_at = None;
        for iter in 1..=n_max {
            match self.map.eval_projective(&steps.last().unwrap().point) {
                Ok(next) => {
                    let step = record(iter, next, &steps);
                    steps.push(step);
                }
                Err(Error::Indeterminacy) => {
                    indeterminate_at = Some(iter);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        let converged_at = steps
            .iter()
            .find(|s| s.period_distance.is_some_and(|d| d < CONVERGENCE_TOLERANCE))
            .map(|s| s.iter - period);
        Ok(OrbitSummary {
            steps,
            period,
            converged_at,
            indeterminate_at,
        })
    }
}
