//! Plain-Rust side of the demo, also usable natively.

use flatlimit::experiments::{run_sweep, LengthScaleGrid, PrecisionPolicy, RateFit, SweepConfig};
use flatlimit::functionals::FunctionalSpec;
use flatlimit::gauss_optimal::{gauss_rule_from_moments, optimize_points, OptimizerOptions};
use flatlimit::kernels::KernelSpec;
use flatlimit::points::PointSet;
use flatlimit::precision::PrecisionConfig;
use flatlimit::BigReal;
use serde::Serialize;

/// Demo sizes are capped so a click never hangs the page.
pub const MAX_NODES: usize = 8;
pub const MAX_GRID: usize = 60;

#[derive(Debug, Serialize)]
pub struct SweepPoint {
    pub length_scale: f64,
    pub weights: Vec<f64>,
    pub wce: f64,
    pub optimal_to_polynomial: f64,
    pub bits: u32,
}

#[derive(Debug, Serialize)]
pub struct SweepOutput {
    pub points: Vec<SweepPoint>,
    pub polynomial_weights: Vec<f64>,
    pub fit: Option<RateFit>,
    pub failures: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct RuleOutput {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub wce: Option<f64>,
    pub gauss_nodes: Vec<f64>,
    pub gauss_weights: Vec<f64>,
}

fn functional(name: &str) -> Result<FunctionalSpec, String> {
    match name {
        "lebesgue" => FunctionalSpec::interval(-1.0, 1.0),
        "gaussian" => FunctionalSpec::gaussian_measure(1),
        other => return Err(format!("unknown functional {other:?}; use lebesgue or gaussian")),
    }
    .map_err(|e| e.to_string())
}

fn check_nodes(n: usize) -> Result<(), String> {
    if n == 0 || n > MAX_NODES {
        return Err(format!("between 1 and {MAX_NODES} nodes, got {n}"));
    }
    Ok(())
}

pub fn weights_sweep(name: &str, nodes: &[f64], l_min: f64, l_max: f64, count: usize) -> Result<SweepOutput, String> {
    check_nodes(nodes.len())?;
    if count > MAX_GRID {
        return Err(format!("at most {MAX_GRID} grid points"));
    }
    let cfg = SweepConfig {
        kernel: KernelSpec::gaussian(1.0).map_err(|e| e.to_string())?,
        functional: functional(name)?,
        points: PointSet::from_nodes(nodes).map_err(|e| e.to_string())?,
        degree: nodes.len() as u32 - 1,
        grid: LengthScaleGrid::Log { min: l_min, max: l_max, count },
        precision: PrecisionPolicy::Auto,
        fit_window: None,
    };
    let out = run_sweep(&cfg).map_err(|e| e.to_string())?;
    Ok(SweepOutput {
        points: out
            .records
            .into_iter()
            .map(|r| SweepPoint {
                length_scale: r.length_scale,
                weights: r.weights,
                wce: r.wce,
                optimal_to_polynomial: r.optimal_to_polynomial,
                bits: r.bits,
            })
            .collect(),
        polynomial_weights: out.polynomial_weights,
        fit: out.fit,
        failures: out.failures.into_iter().map(|f| format!("l = {}: {}", f.length_scale, f.message)).collect(),
    })
}

fn gauss_pair(f: &FunctionalSpec, n: usize) -> Result<(Vec<f64>, Vec<f64>), String> {
    let prec = PrecisionConfig::extended(128 + 8 * n as u32).map_err(|e| e.to_string())?;
    let g = gauss_rule_from_moments::<BigReal>(f, n, &prec).map_err(|e| e.to_string())?;
    Ok((g.nodes_f64(), g.rule.weights_f64()))
}

pub fn optimal_rule(name: &str, n: usize, length_scale: f64, restarts: usize, seed: u64) -> Result<RuleOutput, String> {
    check_nodes(n)?;
    let f = functional(name)?;
    let k = KernelSpec::gaussian(length_scale).map_err(|e| e.to_string())?;
    let prec = PrecisionConfig::auto(n, length_scale);
    let opts = OptimizerOptions {
        restarts: restarts.min(16),
        seed,
        experimental_unbounded: true,
        ..Default::default()
    };
    let (rule, _) = optimize_points::<BigReal>(&k, &f, n, &prec, &opts).map_err(|e| e.to_string())?;
    let wce = flatlimit::cubature::worst_case_error(&k, &f, &rule, &prec)
        .map_err(|e| e.to_string())?
        .wce_f64();
    let (gauss_nodes, gauss_weights) = gauss_pair(&f, n)?;
    Ok(RuleOutput {
        nodes: rule.points().nodes(),
        weights: rule.weights_f64(),
        wce: Some(wce),
        gauss_nodes,
        gauss_weights,
    })
}

pub fn gauss_rule(name: &str, n: usize) -> Result<RuleOutput, String> {
    check_nodes(n)?;
    let f = functional(name)?;
    let (nodes, weights) = gauss_pair(&f, n)?;
    Ok(RuleOutput {
        gauss_nodes: nodes.clone(),
        gauss_weights: weights.clone(),
        nodes,
        weights,
        wce: None,
    })
}
