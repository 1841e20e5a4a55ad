//! Flat-limit sweeps over a grid of length scales, rate fits and optimal
//! node studies.

use serde::{Deserialize, Serialize};

use crate::cubature::{optimal_rule_with_error, phi_weights, polynomial_weights, unisolvency_check, Unisolvency};
use crate::error::{Error, Result};
use crate::functionals::FunctionalSpec;
use crate::gauss_optimal::{gauss_rule_from_moments, optimize_points, OptimizerOptions};
use crate::kernels::KernelSpec;
use crate::points::PointSet;
use crate::precision::PrecisionConfig;
use crate::scalar::{BigReal, Precision, Scalar};

/// Length scales to visit, in increasing order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LengthScaleGrid {
    Log { min: f64, max: f64, count: usize },
    List(Vec<f64>),
}

impl LengthScaleGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        let values = match self {
            LengthScaleGrid::Log { min, max, count } => {
                if *count < 2 {
                    return Err(Error::InvalidArgument(format!("length-scale grid needs at least 2 points, got {count}")));
                }
                if !(*min > 0.0 && max > min && max.is_finite()) {
                    return Err(Error::InvalidArgument(format!("length-scale grid needs 0 < min < max, got [{min}, {max}]")));
                }
                let (a, b) = (min.ln(), max.ln());
                (0..*count)
                    .map(|i| match i {
                        0 => *min,
                        _ if i + 1 == *count => *max,
                        _ => (a + (b - a) * i as f64 / (*count - 1) as f64).exp(),
                    })
                    .collect()
            }
            LengthScaleGrid::List(v) => v.clone(),
        };
        if values.len() < 2 {
            return Err(Error::InvalidArgument("length-scale grid needs at least 2 points".into()));
        }
        if values.iter().any(|l| !(*l > 0.0 && l.is_finite())) || values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "length scales must be positive and strictly increasing: {values:?}"
            )));
        }
        Ok(values)
    }
}

/// How the working precision is chosen for each length scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionPolicy {
    /// `max(64, 64 + ceil(2 N log2 l))` bits.
    Auto,
    Machine,
    Bits(u32),
}

impl PrecisionPolicy {
    pub fn resolve(&self, n: usize, length_scale: f64) -> Result<PrecisionConfig> {
        match self {
            PrecisionPolicy::Auto => Ok(PrecisionConfig::auto(n, length_scale)),
            PrecisionPolicy::Machine => Ok(PrecisionConfig::machine()),
            PrecisionPolicy::Bits(b) => PrecisionConfig::extended(*b),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub kernel: KernelSpec,
    pub functional: FunctionalSpec,
    pub points: PointSet,
    pub degree: u32,
    pub grid: LengthScaleGrid,
    pub precision: PrecisionPolicy,
    /// Inclusive length-scale range for the rate fit; defaults to the middle
    /// two thirds of the grid.
    pub fit_window: Option<(f64, f64)>,
}

/// Working-precision decimal renderings of a record's computed columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordDecimals {
    pub weights: Vec<String>,
    pub wce: String,
    pub optimal_to_polynomial: String,
    pub phi_to_polynomial: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub length_scale: f64,
    pub weights: Vec<f64>,
    pub wce: f64,
    /// `||w* - w_pol||_inf`
    pub optimal_to_polynomial: f64,
    /// `||w_phi - w_pol||_inf`
    pub phi_to_polynomial: f64,
    pub condition: f64,
    pub bits: u32,
    pub decimals: RecordDecimals,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub length_scale: f64,
    pub bits: u32,
    pub message: String,
}

/// Least-squares fit of `log wce` against `log l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// `None` with only two points.
    pub std_error: Option<f64>,
    pub window: (f64, f64),
    pub points_used: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    pub failures: Vec<SweepFailure>,
    pub fit: Option<RateFit>,
    pub unisolvency: Unisolvency,
    pub polynomial_weights: Vec<f64>,
}

/// Digits printed for a quantity computed at `prec`.
pub fn output_digits(prec: Precision) -> usize {
    prec.decimal_digits()
}

fn max_abs_diff<S: Scalar>(a: &[S], b: &[S]) -> S {
    let p = a[0].precision();
    a.iter()
        .zip(b)
        .fold(S::zero(p), |m, (x, y)| m.max_of((x.clone() - y.clone()).abs()))
}

fn sweep_point<S: Scalar>(cfg: &SweepConfig, length_scale: f64, prec: &PrecisionConfig) -> Result<SweepRecord> {
    let k = cfg.kernel.with_length_scale(length_scale)?;
    let (sol, rep) = optimal_rule_with_error::<S>(&k, &cfg.functional, &cfg.points, prec)?;
    let pol = polynomial_weights::<S>(&cfg.functional, &cfg.points, cfg.degree, prec)?;
    let phi = phi_weights::<S>(&cfg.functional, length_scale, &cfg.points, cfg.degree, prec)?;
    let opt_pol = max_abs_diff(sol.weights(), pol.weights());
    let phi_pol = max_abs_diff(phi.weights(), pol.weights());
    let digits = output_digits(prec.precision);
    Ok(SweepRecord {
        length_scale,
        weights: sol.rule.weights_f64(),
        wce: rep.wce_f64(),
        optimal_to_polynomial: opt_pol.to_f64(),
        phi_to_polynomial: phi_pol.to_f64(),
        condition: sol.condition_estimate,
        bits: prec.precision.bits(),
        decimals: RecordDecimals {
            weights: sol.weights().iter().map(|w| w.to_decimal_string(digits)).collect(),
            wce: rep.wce.to_decimal_string(digits),
            optimal_to_polynomial: opt_pol.to_decimal_string(digits),
            phi_to_polynomial: phi_pol.to_decimal_string(digits),
        },
    })
}

fn window_indices(grid: &[f64], window: Option<(f64, f64)>) -> (Vec<usize>, (f64, f64)) {
    match window {
        Some((lo, hi)) => {
            let idx = (0..grid.len()).filter(|&i| grid[i] >= lo && grid[i] <= hi).collect();
            (idx, (lo, hi))
        }
        None => {
            let drop = grid.len() / 6;
            let idx: Vec<usize> = (drop..grid.len() - drop).collect();
            let window = (grid[idx[0]], grid[*idx.last().unwrap()]);
            (idx, window)
        }
    }
}

/// Least-squares slope of `ln y` on `ln x` over positive pairs.
pub fn fit_rate(xs: &[f64], ys: &[f64], window: (f64, f64)) -> Option<RateFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len();
    if n < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let std_error = (n > 2).then(|| {
        let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        (ssr / (n - 2) as f64 / sxx).sqrt()
    });
    Some(RateFit {
        slope,
        intercept,
        std_error,
        window,
        points_used: n,
    })
}

fn map_grid<T: Send>(grid: &[f64], f: impl Fn(f64) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        grid.par_iter().map(|l| f(*l)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        grid.iter().map(|l| f(*l)).collect()
    }
}

/// Runs the configured sweep. Per-length-scale solver failures are recorded
/// and the sweep continues; a non-unisolvent point set aborts.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    let grid = cfg.grid.values()?;
    cfg.kernel.check_dimension(cfg.points.dimension())?;
    if cfg.functional.dimension() != cfg.points.dimension() {
        return Err(Error::DimensionMismatch {
            expected: cfg.functional.dimension(),
            got: cfg.points.dimension(),
        });
    }
    // Classify in 128 bits so that an exactly singular Vandermonde matrix is
    // not confused with a merely ill-conditioned one.
    let check = PrecisionConfig::extended(128)?;
    let unisolvency = unisolvency_check::<BigReal>(&cfg.points, cfg.degree, &check)?;
    if unisolvency == Unisolvency::NotUnisolvent {
        return Err(Error::NotUnisolvent {
            degree: cfg.degree as usize,
        });
    }
    let pol = polynomial_weights::<BigReal>(&cfg.functional, &cfg.points, cfg.degree, &check)?;

    let n = cfg.points.len();
    let outcomes = map_grid(&grid, |l| {
        let prec = cfg.precision.resolve(n, l)?;
        let r = match prec.precision {
            Precision::Machine => sweep_point::<f64>(cfg, l, &prec),
            Precision::Extended(_) => sweep_point::<BigReal>(cfg, l, &prec),
        };
        Ok::<_, Error>(r.map_err(|e| SweepFailure {
            length_scale: l,
            bits: prec.precision.bits(),
            message: e.to_string(),
        }))
    });

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o? {
            Ok(r) => records.push(r),
            Err(f) => failures.push(f),
        }
    }
    let (idx, window) = window_indices(&grid, cfg.fit_window);
    let in_window: Vec<&SweepRecord> = records
        .iter()
        .filter(|r| idx.iter().any(|&i| grid[i] == r.length_scale))
        .collect();
    let xs: Vec<f64> = in_window.iter().map(|r| r.length_scale).collect();
    let ys: Vec<f64> = in_window.iter().map(|r| r.wce).collect();
    Ok(SweepResult {
        fit: fit_rate(&xs, &ys, window),
        records,
        failures,
        unisolvency,
        polynomial_weights: pol.rule.weights_f64(),
    })
}

#[derive(Clone, Debug)]
pub struct OptimalStudyConfig {
    pub kernel: KernelSpec,
    pub functional: FunctionalSpec,
    pub nodes: usize,
    pub grid: LengthScaleGrid,
    pub precision: PrecisionPolicy,
    pub optimizer: OptimizerOptions,
    pub fit_window: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalRecord {
    pub length_scale: f64,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub wce: f64,
    /// `||X* - X_G||_inf` against the Gauss rule.
    pub node_distance: f64,
    /// `||w* - w_G||_inf`
    pub weight_distance: f64,
    pub bits: u32,
    pub restarts: usize,
    pub multistart_spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalStudy {
    pub gauss_nodes: Vec<f64>,
    pub gauss_weights: Vec<f64>,
    pub records: Vec<OptimalRecord>,
    pub failures: Vec<SweepFailure>,
    pub fit: Option<RateFit>,
}

fn optimal_point<S: Scalar>(cfg: &OptimalStudyConfig, l: f64, prec: &PrecisionConfig, gauss: &(Vec<f64>, Vec<f64>)) -> Result<OptimalRecord> {
    let k = cfg.kernel.with_length_scale(l)?;
    let (rule, trace) = optimize_points::<S>(&k, &cfg.functional, cfg.nodes, prec, &cfg.optimizer)?;
    let points = rule.points().nodes();
    let weights = rule.weights_f64();
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let wce = crate::cubature::worst_case_error(&k, &cfg.functional, &rule, prec)?.wce_f64();
    Ok(OptimalRecord {
        length_scale: l,
        node_distance: dist(&points, &gauss.0),
        weight_distance: dist(&weights, &gauss.1),
        points,
        weights,
        wce,
        bits: prec.precision.bits(),
        restarts: trace.restarts_used,
        multistart_spread: trace.multistart_spread,
    })
}

/// Optimises `N` nodes at each length scale and compares with the Gauss rule.
pub fn run_optimal_study(cfg: &OptimalStudyConfig) -> Result<OptimalStudy> {
    let grid = cfg.grid.values()?;
    if cfg.functional.dimension() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: cfg.functional.dimension(),
        });
    }
    let gauss = gauss_rule_from_moments::<BigReal>(&cfg.functional, cfg.nodes, &PrecisionConfig::extended(256)?)?;
    let gauss = (gauss.nodes_f64(), gauss.rule.weights_f64());

    let outcomes = map_grid(&grid, |l| {
        let prec = cfg.precision.resolve(cfg.nodes, l)?;
        let r = match prec.precision {
            Precision::Machine => optimal_point::<f64>(cfg, l, &prec, &gauss),
            Precision::Extended(_) => optimal_point::<BigReal>(cfg, l, &prec, &gauss),
        };
        Ok::<_, Error>(r.map_err(|e| SweepFailure {
            length_scale: l,
            bits: prec.precision.bits(),
            message: e.to_string(),
        }))
    });
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o? {
            Ok(r) => records.push(r),
            Err(f) => failures.push(f),
        }
    }
    let window = cfg.fit_window.unwrap_or((grid[0], *grid.last().unwrap()));
    let (xs, ys): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| r.length_scale >= window.0 && r.length_scale <= window.1)
        .map(|r| (r.length_scale, r.wce))
        .unzip();
    Ok(OptimalStudy {
        gauss_nodes: gauss.0,
        gauss_weights: gauss.1,
        fit: fit_rate(&xs, &ys, window),
        records,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_endpoints_and_validation() {
        let g = LengthScaleGrid::Log { min: 10.0, max: 100.0, count: 9 }.values().unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!((g[0], g[8]), (10.0, 100.0));
        assert!((g[4] - 10f64.powf(1.5)).abs() < 1e-12);
        assert!(LengthScaleGrid::Log { min: 10.0, max: 10.0, count: 1 }.values().is_err());
        assert!(LengthScaleGrid::List(vec![10.0]).values().is_err());
        assert!(LengthScaleGrid::List(vec![10.0, 5.0]).values().is_err());
    }

    #[test]
    fn regression_recovers_a_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-2.5)).collect();
        let fit = fit_rate(&xs, &ys, (1.0, 8.0)).unwrap();
        assert!((fit.slope + 2.5).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(fit.std_error.unwrap() < 1e-12);
        let two = fit_rate(&xs[..2], &ys[..2], (1.0, 2.0)).unwrap();
        assert!(two.std_error.is_none());
    }

    #[test]
    fn default_window_is_middle_two_thirds() {
        let grid: Vec<f64> = (1..=12).map(|i| i as f64).collect();
        let (idx, w) = window_indices(&grid, None);
        assert_eq!(idx, (2..10).collect::<Vec<_>>());
        assert_eq!(w, (3.0, 10.0));
    }

    #[test]
    fn small_sweep_records_every_length_scale() {
        let cfg = SweepConfig {
            kernel: KernelSpec::gaussian(1.0).unwrap(),
            functional: FunctionalSpec::interval(-1.0, 1.0).unwrap(),
            points: PointSet::from_nodes(&[-1.0, 0.2, 1.0]).unwrap(),
            degree: 2,
            grid: LengthScaleGrid::Log { min: 10.0, max: 40.0, count: 4 },
            precision: PrecisionPolicy::Auto,
            fit_window: Some((10.0, 40.0)),
        };
        let out = run_sweep(&cfg).unwrap();
        assert_eq!(out.records.len(), 4);
        assert!(out.failures.is_empty());
        for r in &out.records {
            assert!(r.wce >= 0.0 && r.optimal_to_polynomial >= 0.0 && r.phi_to_polynomial >= 0.0);
            assert_eq!(r.bits, crate::precision::auto_bits(3, r.length_scale));
        }
        let fit = out.fit.unwrap();
        assert!((fit.slope + 3.0).abs() < 0.2, "{fit:?}");
    }

    #[test]
    fn collinear_points_abort() {
        let cfg = SweepConfig {
            kernel: KernelSpec::gaussian(1.0).unwrap(),
            functional: FunctionalSpec::gaussian_measure(2).unwrap(),
            points: PointSet::new(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap(),
            degree: 1,
            grid: LengthScaleGrid::Log { min: 1.0, max: 2.0, count: 2 },
            precision: PrecisionPolicy::Machine,
            fit_window: None,
        };
        assert!(matches!(run_sweep(&cfg), Err(Error::NotUnisolvent { degree: 1 })));
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        // At machine precision the flat-limit Gram matrix stops being
        // numerically positive definite.
        let cfg = SweepConfig {
            kernel: KernelSpec::gaussian(1.0).unwrap(),
            functional: FunctionalSpec::interval(-1.0, 1.0).unwrap(),
            points: PointSet::from_nodes(&[-1.0, -0.5, 0.0, 0.5, 1.0]).unwrap(),
            degree: 4,
            grid: LengthScaleGrid::List(vec![1.0, 1e4]),
            precision: PrecisionPolicy::Machine,
            fit_window: None,
        };
        let out = run_sweep(&cfg).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].length_scale, 1e4);
    }
}
