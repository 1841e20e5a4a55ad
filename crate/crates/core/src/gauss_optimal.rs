//! Gauss rules from moments and worst-case optimal node placement in 1-D.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cubature::optimal_rule_given_llk;
use crate::error::{Error, Result};
use crate::functionals::FunctionalSpec;
use crate::kernels::KernelSpec;
use crate::linalg::{condition_estimate, Cholesky, Matrix};
use crate::multi_index::MultiIndex;
use crate::points::{CubatureRule, PointSet};
use crate::precision::PrecisionConfig;
use crate::scalar::{Precision, Scalar};

/// `N`-point rule exact on polynomials of degree `2N - 1`.
#[derive(Clone, Debug)]
pub struct GaussRule<S = f64> {
    pub rule: CubatureRule<S>,
    /// Nodes at working precision; `rule` holds them rounded to `f64`.
    pub nodes: Vec<S>,
    pub degree_of_exactness: usize,
}

impl<S: Scalar> GaussRule<S> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes_f64(&self) -> Vec<f64> {
        self.nodes.iter().map(Scalar::to_f64).collect()
    }

    pub fn weights(&self) -> &[S] {
        self.rule.weights()
    }

    /// `Q[x^k]` at working precision.
    pub fn apply_monomial(&self, k: u32) -> S {
        let p = self.nodes[0].precision();
        self.nodes
            .iter()
            .zip(self.weights())
            .fold(S::zero(p), |acc, (x, w)| acc + w.clone() * x.powi(k))
    }
}

fn one_dim_moments<S: Scalar>(functional: &FunctionalSpec, count: u32, p: Precision) -> Result<Vec<S>> {
    (0..count)
        .map(|k| functional.moment_at::<S>(&MultiIndex::new(vec![k]), p))
        .collect()
}

/// Builds the `N`-point Gauss rule of a positive 1-D functional from its
/// moments: Hankel Cholesky, recurrence coefficients, then the Jacobi
/// eigenproblem.
pub fn gauss_rule_from_moments<S: Scalar>(functional: &FunctionalSpec, n: usize, prec: &PrecisionConfig) -> Result<GaussRule<S>> {
    if functional.dimension() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: functional.dimension(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("Gauss rule needs at least one node".into()));
    }
    if !S::supports(prec.precision) {
        return Err(Error::PrecisionMismatch(prec.precision));
    }
    let p = prec.precision;
    let moments = one_dim_moments::<S>(functional, 2 * n as u32 + 1, p)?;
    let hankel = Matrix::from_fn(n + 1, n + 1, |i, j| moments[i + j].clone())?;
    let chol = Cholesky::factor(&hankel).map_err(|e| match e {
        Error::NumericallyIndefinite { .. } => Error::HankelIndefinite { precision: p },
        other => other,
    })?;
    // upper factor R = L^T
    let r = |i: usize, j: usize| chol.factor_entry(j, i).clone();

    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n);
    for j in 0..n {
        let mut a = r(j, j + 1) / r(j, j);
        if j > 0 {
            a = a - r(j - 1, j) / r(j - 1, j - 1);
        }
        diag.push(a);
        off.push(if j + 1 < n { r(j + 1, j + 1) / r(j, j) } else { S::zero(p) });
    }
    let (values, first) = tridiagonal_eigen(diag, off, prec)?;

    let mut pairs: Vec<(S, S)> = values
        .into_iter()
        .zip(first)
        .map(|(x, z)| (x, moments[0].clone() * z.square()))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let (nodes, weights): (Vec<S>, Vec<S>) = pairs.into_iter().unzip();

    let nodes_f64: Vec<f64> = nodes.iter().map(Scalar::to_f64).collect();
    for (i, w) in weights.iter().enumerate() {
        if !(*w > S::zero(p)) {
            return Err(Error::Internal(format!("Gauss weight {i} is not positive: {}", w.to_f64())));
        }
    }
    if let Some((a, b)) = functional.interval_bounds() {
        if nodes_f64.iter().any(|&x| !(x > a && x < b)) {
            return Err(Error::Internal(format!("Gauss nodes {nodes_f64:?} leave ({a}, {b})")));
        }
    }
    let points = PointSet::from_nodes(&nodes_f64)
        .map_err(|e| Error::Internal(format!("Gauss nodes are not distinct: {e}")))?;
    if points.len() != n {
        return Err(Error::Internal("Gauss nodes collapsed".into()));
    }
    let rule = GaussRule {
        rule: CubatureRule::new(points, weights)?,
        nodes,
        degree_of_exactness: 2 * n - 1,
    };

    let kappa = condition_estimate(&hankel, prec)?;
    let tol = (1e3 * prec.unit_roundoff() * kappa).max(1e3 * prec.unit_roundoff());
    for k in 0..2 * n {
        let m = &moments[k];
        let err = (rule.apply_monomial(k as u32) - m.clone()).abs().to_f64();
        if err > tol * m.abs().to_f64().max(1.0) {
            return Err(Error::Internal(format!(
                "Gauss rule misses moment {k} by {err:e} (tolerance {tol:e})"
            )));
        }
    }
    Ok(rule)
}

fn pythag<S: Scalar>(a: &S, b: &S) -> S {
    (a.square() + b.square()).sqrt()
}

/// Implicit QL on a symmetric tridiagonal matrix. `off[i]` couples `i` and
/// `i + 1`. Returns the eigenvalues and the first component of each
/// normalised eigenvector.
fn tridiagonal_eigen<S: Scalar>(mut d: Vec<S>, mut e: Vec<S>, prec: &PrecisionConfig) -> Result<(Vec<S>, Vec<S>)> {
    let n = d.len();
    let p = prec.precision;
    let u = prec.unit_roundoff();
    let mut z: Vec<S> = (0..n).map(|i| if i == 0 { S::one(p) } else { S::zero(p) }).collect();
    let two = S::from_i64(2, p);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs().to_f64() + d[m + 1].abs().to_f64();
                if e[m].abs().to_f64() <= u * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 + prec.precision.bits() as usize / 8 {
                return Err(Error::Internal("tridiagonal QL iteration did not converge".into()));
            }
            let mut g = (d[l + 1].clone() - d[l].clone()) / (two.clone() * e[l].clone());
            let mut r = pythag(&g, &S::one(p));
            let signed = if g.is_negative() { -r.clone() } else { r.clone() };
            g = d[m].clone() - d[l].clone() + e[l].clone() / (g + signed);
            let (mut s, mut c, mut pp) = (S::one(p), S::one(p), S::zero(p));
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s.clone() * e[i].clone();
                let b = c.clone() * e[i].clone();
                r = pythag(&f, &g);
                e[i + 1] = r.clone();
                if r.is_zero() {
                    d[i + 1] = d[i + 1].clone() - pp.clone();
                    e[m] = S::zero(p);
                    underflow = true;
                    break;
                }
                s = f / r.clone();
                c = g.clone() / r.clone();
                g = d[i + 1].clone() - pp.clone();
                r = (d[i].clone() - g.clone()) * s.clone() + two.clone() * c.clone() * b.clone();
                pp = s.clone() * r.clone();
                d[i + 1] = g + pp.clone();
                g = c.clone() * r.clone() - b;
                let f = z[i + 1].clone();
                z[i + 1] = s.clone() * z[i].clone() + c.clone() * f.clone();
                z[i] = c.clone() * z[i].clone() - s.clone() * f;
            }
            if underflow {
                continue;
            }
            d[l] = d[l].clone() - pp;
            e[l] = g;
            e[m] = S::zero(p);
        }
    }
    Ok((d, z))
}

/// Settings of the multi-start simplex search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerOptions {
    /// Random restarts in addition to the Gauss-rule start.
    pub restarts: usize,
    pub seed: u64,
    pub max_evaluations: usize,
    /// Simplex diameter tolerance, relative to the search box width.
    pub point_tolerance: f64,
    /// Relative spread of the simplex values.
    pub wce_tolerance: f64,
    /// Permit the unbounded Gaussian measure, searched on `[-R, R]`.
    pub experimental_unbounded: bool,
    pub search_radius: f64,
    pub gauss_start: bool,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            restarts: 8,
            seed: 0,
            max_evaluations: 10_000,
            point_tolerance: 1e-10,
            wce_tolerance: 1e-12,
            experimental_unbounded: false,
            search_radius: 10.0,
            gauss_start: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub wce: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub index: usize,
    pub gauss_start: bool,
    pub start: Vec<f64>,
    pub points: Vec<f64>,
    pub wce: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    /// Improvements of the best vertex in the winning restart.
    pub iterations: Vec<TraceEntry>,
    pub converged: bool,
    pub restarts_used: usize,
    pub restarts: Vec<RestartSummary>,
    pub best_restart: usize,
    /// Largest node distance between the best rule and any other converged
    /// restart reaching the same error to 1e-6 relative. Small values are
    /// evidence, not proof, of uniqueness.
    pub multistart_spread: f64,
}

struct Vertex {
    y: Vec<f64>,
    f: f64,
    weights: Vec<f64>,
}

struct Objective<'a, S: Scalar> {
    k: &'a KernelSpec,
    functional: &'a FunctionalSpec,
    prec: &'a PrecisionConfig,
    llk: S,
    lo: f64,
    hi: f64,
}

impl<S: Scalar> Objective<'_, S> {
    fn map(&self, y: &[f64]) -> Vec<f64> {
        let mut x: Vec<f64> = y.iter().map(|v| v.clamp(self.lo, self.hi)).collect();
        x.sort_by(f64::total_cmp);
        x
    }

    fn solve(&self, x: &[f64]) -> Result<(CubatureRule<S>, f64)> {
        let points = PointSet::from_nodes(x)?;
        let (sol, rep) = optimal_rule_given_llk(self.k, self.functional, &points, self.llk.clone(), self.prec)?;
        Ok((sol.rule, rep.wce_f64()))
    }

    /// Values closer than this are indistinguishable: the requested relative
    /// tolerance, floored at the rounding noise of `sqrt(LLK - 2 w^T z + w^T G w)`.
    fn value_tolerance(&self, wce: f64, rel: f64) -> f64 {
        let noise = 10.0 * self.prec.unit_roundoff() * 4.0 * self.llk.abs().to_f64() / (2.0 * wce);
        (rel * wce).max(noise)
    }

    fn vertex(&self, y: Vec<f64>) -> Vertex {
        // Clamping alone leaves the objective flat outside the box.
        let outside: f64 = y.iter().map(|v| (self.lo - v).max(v - self.hi).max(0.0)).sum();
        match self.solve(&self.map(&y)) {
            Ok((rule, wce)) if wce.is_finite() => Vertex {
                weights: rule.weights_f64(),
                y,
                f: wce * (1.0 + outside / (self.hi - self.lo)),
            },
            _ => Vertex {
                y,
                f: f64::INFINITY,
                weights: Vec::new(),
            },
        }
    }
}

struct RestartOutcome {
    summary: RestartSummary,
    trace: Vec<TraceEntry>,
}

fn nelder_mead<S: Scalar>(obj: &Objective<'_, S>, start: Vec<f64>, opts: &OptimizerOptions) -> (Vec<f64>, f64, usize, bool, Vec<TraceEntry>) {
    let n = start.len();
    let width = obj.hi - obj.lo;
    let step = 0.05 * width;
    let mut evals = 0usize;
    let eval = |y: Vec<f64>, evals: &mut usize| {
        *evals += 1;
        obj.vertex(y)
    };
    let mut simplex: Vec<Vertex> = Vec::with_capacity(n + 1);
    simplex.push(eval(start.clone(), &mut evals));
    for i in 0..n {
        let mut y = start.clone();
        y[i] += if y[i] + step <= obj.hi { step } else { -step };
        simplex.push(eval(y, &mut evals));
    }
    let mut trace: Vec<TraceEntry> = Vec::new();
    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.f.total_cmp(&b.f));
        let best = &simplex[0];
        if best.f.is_finite() && trace.last().map_or(true, |t| best.f < t.wce) {
            trace.push(TraceEntry {
                points: obj.map(&best.y),
                weights: best.weights.clone(),
                wce: best.f,
            });
        }
        let best_x = obj.map(&best.y);
        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| obj.map(&v.y).into_iter().zip(&best_x).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let spread = simplex[n].f - best.f;
        if best.f.is_finite()
            && diameter <= opts.point_tolerance * width
            && (spread <= obj.value_tolerance(best.f, opts.wce_tolerance) || spread == 0.0)
        {
            converged = true;
            break;
        }
        if evals >= opts.max_evaluations {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v.y[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].y)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let reflected = eval(along(1.0), &mut evals);
        if reflected.f < simplex[0].f {
            let expanded = eval(along(2.0), &mut evals);
            simplex[n] = if expanded.f < reflected.f { expanded } else { reflected };
        } else if reflected.f < simplex[n - 1].f {
            simplex[n] = reflected;
        } else {
            let outside = reflected.f < simplex[n].f;
            let contracted = eval(along(if outside { 0.5 } else { -0.5 }), &mut evals);
            let target = if outside { reflected.f } else { simplex[n].f };
            if contracted.f < target || (contracted.f <= target && contracted.f.is_finite()) {
                simplex[n] = contracted;
            } else {
                let anchor = simplex[0].y.clone();
                for v in simplex.iter_mut().skip(1) {
                    let y: Vec<f64> = v.y.iter().zip(&anchor).map(|(a, b)| b + 0.5 * (a - b)).collect();
                    *v = eval(y, &mut evals);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.f.total_cmp(&b.f));
    let best = &simplex[0];
    (obj.map(&best.y), best.f, evals, converged, trace)
}

fn search_box(functional: &FunctionalSpec, opts: &OptimizerOptions) -> Result<((f64, f64), (f64, f64))> {
    match functional {
        FunctionalSpec::GaussianMeasure { dimension: 1 } => {
            if !opts.experimental_unbounded {
                return Err(Error::Unsupported(
                    "point optimisation on the Gaussian measure is experimental; enable experimental_unbounded".into(),
                ));
            }
            let r = opts.search_radius;
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidArgument(format!("search radius must be positive, got {r}")));
            }
            Ok(((-r, r), (-3.0f64.min(r), 3.0f64.min(r))))
        }
        _ if functional.dimension() != 1 => Err(Error::DimensionMismatch {
            expected: 1,
            got: functional.dimension(),
        }),
        _ => match functional.interval_bounds() {
            Some(ab) => Ok((ab, ab)),
            None => Err(Error::InvalidArgument(format!(
                "point optimisation needs an interval functional, got {}",
                functional.kind_name()
            ))),
        },
    }
}

fn stratified(n: usize, (lo, hi): (f64, f64), jitter: impl Fn(usize) -> f64) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * (i as f64 + jitter(i)) / n as f64).collect()
}

/// Jointly optimises `N` nodes and their weights for the worst-case error.
/// Each candidate node set gets its optimal weights from the kernel system.
pub fn optimize_points<S: Scalar>(
    k: &KernelSpec,
    functional: &FunctionalSpec,
    n: usize,
    prec: &PrecisionConfig,
    opts: &OptimizerOptions,
) -> Result<(CubatureRule<S>, OptimizationTrace)> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one point".into()));
    }
    if !S::supports(prec.precision) {
        return Err(Error::PrecisionMismatch(prec.precision));
    }
    k.check_dimension(1)?;
    let ((lo, hi), init) = search_box(functional, opts)?;
    let obj = Objective {
        k,
        functional,
        prec,
        llk: functional.double_embedding_at::<S>(k, prec.precision)?,
        lo,
        hi,
    };

    let mut starts: Vec<(bool, Vec<f64>)> = Vec::new();
    if opts.gauss_start {
        if let Ok(g) = gauss_rule_from_moments::<S>(functional, n, prec) {
            starts.push((true, g.nodes_f64()));
        }
    }
    for r in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64));
        let draws: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        starts.push((false, stratified(n, init, |i| draws[i])));
    }
    if starts.is_empty() {
        return Err(Error::InvalidArgument("no optimizer starts requested".into()));
    }

    let run = |(index, (gauss, start)): (usize, &(bool, Vec<f64>))| {
        let (points, wce, evaluations, converged, trace) = nelder_mead(&obj, start.clone(), opts);
        RestartOutcome {
            summary: RestartSummary {
                index,
                gauss_start: *gauss,
                start: start.clone(),
                points,
                wce,
                evaluations,
                converged,
            },
            trace,
        }
    };
    #[cfg(feature = "parallel")]
    let outcomes: Vec<RestartOutcome> = {
        use rayon::prelude::*;
        starts.par_iter().enumerate().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<RestartOutcome> = starts.iter().enumerate().map(run).collect();

    let pick = |only_converged: bool| {
        outcomes
            .iter()
            .filter(|o| o.summary.wce.is_finite() && (o.summary.converged || !only_converged))
            .min_by(|a, b| a.summary.wce.total_cmp(&b.summary.wce).then(a.summary.index.cmp(&b.summary.index)))
    };
    let any_converged = pick(true).is_some();
    let best = pick(false).ok_or_else(|| Error::Internal("every optimizer restart failed to evaluate".into()))?;

    // Never do worse than the symmetric equispaced rule.
    let baseline = stratified(n, init, |_| 0.5);
    let (mut rule, mut wce) = obj.solve(&best.summary.points)?;
    if let Ok((base_rule, base_wce)) = obj.solve(&baseline) {
        if base_wce < wce {
            rule = base_rule;
            wce = base_wce;
        }
    }

    if !any_converged {
        return Err(Error::NotConverged {
            restarts: outcomes.len(),
            best_wce: wce,
            points: rule.points().nodes(),
            weights: rule.weights_f64(),
        });
    }

    let best_nodes = rule.points().nodes();
    let multistart_spread = outcomes
        .iter()
        .filter(|o| o.summary.converged && o.summary.wce <= wce * (1.0 + 1e-6))
        .map(|o| {
            o.summary
                .points
                .iter()
                .zip(&best_nodes)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let trace = OptimizationTrace {
        iterations: best.trace.clone(),
        converged: true,
        restarts_used: outcomes.len(),
        best_restart: best.summary.index,
        restarts: outcomes.into_iter().map(|o| o.summary).collect(),
        multistart_spread,
    };
    Ok((rule, trace))
}

/// Sign changes of `sum_n c_n phi_n(x)`, `phi_n(x) = exp(-x^2/(2 l^2)) x^n`,
/// on `grid` equispaced points of `[a, b]`. A lower bound on the zero count.
pub fn chebyshev_system_zero_count(length_scale: f64, coefficients: &[f64], grid: usize, (a, b): (f64, f64)) -> Result<usize> {
    if coefficients.iter().all(|c| *c == 0.0) {
        return Err(Error::InvalidArgument("coefficients must not all vanish".into()));
    }
    if grid < 2 || !(a < b) {
        return Err(Error::InvalidArgument(format!("need grid >= 2 on a proper interval, got {grid} on [{a}, {b}]")));
    }
    if !(length_scale > 0.0 && length_scale.is_finite()) {
        return Err(Error::InvalidArgument(format!("length scale must be positive, got {length_scale}")));
    }
    let mut last = 0.0f64;
    let mut changes = 0;
    for i in 0..grid {
        let x = a + (b - a) * i as f64 / (grid - 1) as f64;
        let poly = coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let v = (-x * x / (2.0 * length_scale * length_scale)).exp() * poly;
        if v != 0.0 {
            if last != 0.0 && v.signum() != last.signum() {
                changes += 1;
            }
            last = v;
        }
    }
    Ok(changes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::BigReal;
    use proptest::prelude::*;

    fn ext(bits: u32) -> PrecisionConfig {
        PrecisionConfig::extended(bits).unwrap()
    }

    #[test]
    fn small_gauss_rules() {
        let leb = FunctionalSpec::interval(-1.0, 1.0).unwrap();
        let g = gauss_rule_from_moments::<f64>(&leb, 1, &PrecisionConfig::machine()).unwrap();
        assert!(g.nodes[0].abs() < 1e-15 && (g.weights()[0] - 2.0).abs() < 1e-15);
        let g = gauss_rule_from_moments::<f64>(&leb, 2, &PrecisionConfig::machine()).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((g.nodes[0] + s).abs() < 1e-14 && (g.nodes[1] - s).abs() < 1e-14);
        assert!((g.weights()[0] - 1.0).abs() < 1e-14 && (g.weights()[1] - 1.0).abs() < 1e-14);
        let gm = FunctionalSpec::gaussian_measure(1).unwrap();
        let g = gauss_rule_from_moments::<f64>(&gm, 2, &PrecisionConfig::machine()).unwrap();
        assert!((g.nodes[0] + 1.0).abs() < 1e-14 && (g.nodes[1] - 1.0).abs() < 1e-14);
        assert!((g.weights()[0] - 0.5).abs() < 1e-14);
        assert_eq!(g.degree_of_exactness, 3);
    }

    // Hermite_e roots for N = 3 are 0, +-sqrt(3) with weights 1/6, 2/3, 1/6.
    #[test]
    fn three_point_hermite() {
        let gm = FunctionalSpec::gaussian_measure(1).unwrap();
        let g = gauss_rule_from_moments::<BigReal>(&gm, 3, &ext(128)).unwrap();
        let x = g.nodes_f64();
        let w = g.rule.weights_f64();
        assert!((x[0] + 3f64.sqrt()).abs() < 1e-15 && x[1].abs() < 1e-15);
        assert!((w[0] - 1.0 / 6.0).abs() < 1e-15 && (w[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exactness_and_maximal_degree() {
        let prec = ext(192);
        for f in [FunctionalSpec::interval(-1.0, 1.0).unwrap(), FunctionalSpec::gaussian_measure(1).unwrap()] {
            for n in 1..=8 {
                let g = gauss_rule_from_moments::<BigReal>(&f, n, &prec).unwrap();
                for k in 0..=2 * n as u32 {
                    let m: BigReal = f.moment_at(&MultiIndex::new(vec![k]), prec.precision).unwrap();
                    let err = (g.apply_monomial(k) - m.clone()).abs().to_f64();
                    if k < 2 * n as u32 {
                        assert!(err <= 1e-12 * m.abs().to_f64().max(1.0), "n={n} k={k}");
                    } else {
                        assert!(err > 1e-6, "n={n}");
                    }
                }
                let x = g.nodes_f64();
                assert!(x.windows(2).all(|p| p[0] < p[1]));
                assert!(g.rule.weights_f64().iter().all(|w| *w > 0.0));
            }
        }
    }

    #[test]
    fn machine_precision_rules_up_to_eight_nodes() {
        let leb = FunctionalSpec::interval(-1.0, 1.0).unwrap();
        for n in 1..=8 {
            let g = gauss_rule_from_moments::<f64>(&leb, n, &PrecisionConfig::machine()).unwrap();
            assert!(g.nodes.iter().all(|x| x.abs() < 1.0));
        }
    }

    #[test]
    fn non_positive_functional_is_rejected() {
        let p = FunctionalSpec::point_eval(vec![0.3]).unwrap();
        assert!(matches!(
            gauss_rule_from_moments::<f64>(&p, 2, &PrecisionConfig::machine()),
            Err(Error::HankelIndefinite { .. })
        ));
    }

    #[test]
    fn jacobi_eigen_of_known_matrix() {
        // tridiag(1, 2, 1) of size 3: eigenvalues 2 - sqrt2, 2, 2 + sqrt2
        let prec = PrecisionConfig::machine();
        let (mut vals, z) = tridiagonal_eigen(vec![2.0; 3], vec![1.0, 1.0, 0.0], &prec).unwrap();
        vals.sort_by(f64::total_cmp);
        let r2 = 2f64.sqrt();
        for (v, e) in vals.iter().zip([2.0 - r2, 2.0, 2.0 + r2]) {
            assert!((v - e).abs() < 1e-14);
        }
        assert!((z.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn one_point_gaussian_optimum_is_origin() {
        let gm = FunctionalSpec::gaussian_measure(1).unwrap();
        let opts = OptimizerOptions {
            experimental_unbounded: true,
            restarts: 3,
            ..Default::default()
        };
        for &l in &[0.7, 3.0] {
            let k = KernelSpec::gaussian(l).unwrap();
            let (rule, trace) = optimize_points::<f64>(&k, &gm, 1, &PrecisionConfig::machine(), &opts).unwrap();
            assert!(rule.points().get(0)[0].abs() < 1e-8, "l={l}");
            assert!(trace.converged);
            assert!(trace.iterations.windows(2).all(|w| w[1].wce <= w[0].wce));
        }
    }

    #[test]
    fn unbounded_needs_flag() {
        let gm = FunctionalSpec::gaussian_measure(1).unwrap();
        let k = KernelSpec::gaussian(1.0).unwrap();
        let r = optimize_points::<f64>(&k, &gm, 2, &PrecisionConfig::machine(), &OptimizerOptions::default());
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn optimum_beats_equispaced_and_is_symmetric() {
        let leb = FunctionalSpec::interval(-1.0, 1.0).unwrap();
        let k = KernelSpec::gaussian(0.5).unwrap();
        let prec = PrecisionConfig::machine();
        let opts = OptimizerOptions { restarts: 4, ..Default::default() };
        let (rule, trace) = optimize_points::<f64>(&k, &leb, 3, &prec, &opts).unwrap();
        let x = rule.points().nodes();
        assert!((x[0] + x[2]).abs() < 1e-6 && x[1].abs() < 1e-6, "{x:?}");
        let eq = PointSet::from_nodes(&[-2.0 / 3.0, 0.0, 2.0 / 3.0]).unwrap();
        let (_, base) = crate::cubature::optimal_rule_with_error::<f64>(&k, &leb, &eq, &prec).unwrap();
        let best = trace.iterations.last().unwrap().wce;
        assert!(best <= base.wce);
        assert!(trace.restarts_used == 5);
    }

    #[test]
    fn zero_count_examples() {
        assert_eq!(chebyshev_system_zero_count(1.0, &[1.0], 1000, (-1.0, 1.0)).unwrap(), 0);
        assert_eq!(chebyshev_system_zero_count(2.0, &[-0.25, 0.0, 1.0], 10001, (-1.0, 1.0)).unwrap(), 2);
        assert!(chebyshev_system_zero_count(2.0, &[0.0, 0.0], 100, (-1.0, 1.0)).is_err());
    }

    proptest! {
        #[test]
        fn zero_count_bounded_by_system_size(c in prop::collection::vec(-1.0f64..1.0, 6), l in 0.1f64..100.0) {
            prop_assume!(c.iter().any(|v| *v != 0.0));
            prop_assert!(chebyshev_system_zero_count(l, &c, 2000, (-1.0, 1.0)).unwrap() <= 5);
        }
    }
}
