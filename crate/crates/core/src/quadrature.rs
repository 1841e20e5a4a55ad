//! Adaptive Gauss–Legendre quadrature at working precision.
//!
//! Each panel is integrated with an `n`-point Gauss–Legendre rule and with the
//! same rule on its two halves; the difference is the panel's error estimate.
//! The panel with the largest estimate is split until the total estimate meets
//! the tolerance or the evaluation budget runs out.

use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Precision, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum integrand evaluations per one-dimensional integral.
    pub max_evals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_evals: 200_000,
        }
    }
}

impl QuadratureOptions {
    /// Tolerances tied to the working precision (a few guard digits short of it).
    pub fn for_precision(prec: Precision) -> Self {
        match prec {
            Precision::Machine => Self {
                rel_tol: 1e-13,
                ..Self::default()
            },
            Precision::Extended(_) => Self {
                rel_tol: (prec.unit_roundoff() * 1e4).max(1e-290),
                ..Self::default()
            },
        }
    }
}

type NodeCache = Mutex<HashMap<(TypeId, usize, u32), Arc<dyn Any + Send + Sync>>>;

fn node_cache() -> &'static NodeCache {
    static CACHE: OnceLock<NodeCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Points per panel: more for longer mantissas.
fn panel_order(prec: Precision) -> usize {
    match prec {
        Precision::Machine => 20,
        Precision::Extended(bits) => (bits as usize / 4).clamp(20, 200),
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre<S: Scalar>(n: usize, prec: Precision) -> Arc<Vec<(S, S)>> {
    let key = (TypeId::of::<S>(), n, prec.bits());
    if let Some(hit) = node_cache().lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        if let Ok(v) = Arc::clone(hit).downcast::<Vec<(S, S)>>() {
            return v;
        }
    }
    let rule = Arc::new(compute_gauss_legendre::<S>(n, prec));
    node_cache()
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert(key, rule.clone() as Arc<dyn Any + Send + Sync>);
    rule
}

/// Legendre `P_n(x)` and `P_n'(x)`.
fn legendre_with_derivative<S: Scalar>(n: usize, x: &S, prec: Precision) -> (S, S) {
    let one = S::one(prec);
    let mut p_prev = one.clone();
    let mut p = x.clone();
    for k in 2..=n {
        let kf = S::from_i64(k as i64, prec);
        let next = (S::from_i64(2 * k as i64 - 1, prec) * x.clone() * p.clone()
            - S::from_i64(k as i64 - 1, prec) * p_prev.clone())
            / kf;
        p_prev = p;
        p = next;
    }
    let dp = S::from_i64(n as i64, prec) * (x.clone() * p.clone() - p_prev) / (x.square() - one);
    (p, dp)
}

fn compute_gauss_legendre<S: Scalar>(n: usize, prec: Precision) -> Vec<(S, S)> {
    assert!(n >= 2);
    let tol = prec.unit_roundoff() * 4.0;
    let mut half = Vec::with_capacity(n / 2 + 1);
    for i in 0..n.div_ceil(2) {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut x = S::from_f64(guess, prec);
        let mut dp = S::one(prec);
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, &x, prec);
            let step = p / d.clone();
            x = x - step.clone();
            dp = d;
            if step.abs().to_f64() <= tol {
                let (_, d) = legendre_with_derivative(n, &x, prec);
                dp = d;
                break;
            }
        }
        let w = S::from_i64(2, prec) / ((S::one(prec) - x.square()) * dp.square());
        half.push((x, w));
    }
    let mut rule: Vec<(S, S)> = half.iter().map(|(x, w)| (-x.clone(), w.clone())).collect();
    let middle = if n % 2 == 1 { half.pop() } else { None };
    if middle.is_some() {
        rule.pop();
    }
    rule.extend(middle);
    rule.extend(half.into_iter().rev());
    rule
}

/// Gauss–Legendre estimate of `int_a^b f` and of `int_a^b |f|`.
fn panel<S, F>(f: &mut F, a: &S, b: &S, rule: &[(S, S)], prec: Precision) -> Result<(S, f64)>
where
    S: Scalar,
    F: FnMut(&S) -> Result<S>,
{
    let two = S::from_i64(2, prec);
    let mid = (a.clone() + b.clone()) / two.clone();
    let half = (b.clone() - a.clone()) / two;
    let mut sum = S::zero(prec);
    let mut abs_sum = 0.0;
    for (x, w) in rule {
        let term = w.clone() * f(&(mid.clone() + half.clone() * x.clone()))?;
        abs_sum += term.abs().to_f64();
        sum = sum + term;
    }
    let h = half.abs().to_f64();
    Ok((sum * half, abs_sum * h))
}

struct Panel<S> {
    a: S,
    b: S,
    coarse: S,
    left: S,
    right: S,
    error: f64,
    magnitude: f64,
}

/// `int_a^b f(x) dx` to `max(abs_tol, rel_tol int_a^b |f|)`.
pub fn integrate<S, F>(mut f: F, a: &S, b: &S, opts: &QuadratureOptions, prec: Precision) -> Result<S>
where
    S: Scalar,
    F: FnMut(&S) -> Result<S>,
{
    let n = panel_order(prec);
    let rule = gauss_legendre::<S>(n, prec);
    let mut evals = 0usize;
    let two = S::from_i64(2, prec);

    let make = |f: &mut F, a: S, b: S, coarse: S, evals: &mut usize| -> Result<Panel<S>> {
        let m = (a.clone() + b.clone()) / two.clone();
        let (left, abs_left) = panel(f, &a, &m, &rule, prec)?;
        let (right, abs_right) = panel(f, &m, &b, &rule, prec)?;
        *evals += 2 * n;
        let error = (coarse.clone() - left.clone() - right.clone()).abs().to_f64();
        Ok(Panel {
            a,
            b,
            coarse,
            left,
            right,
            error,
            magnitude: abs_left + abs_right,
        })
    };

    let (whole, _) = panel(&mut f, a, b, &rule, prec)?;
    evals += n;
    let mut panels = vec![make(&mut f, a.clone(), b.clone(), whole, &mut evals)?];
    loop {
        let total = panels
            .iter()
            .fold(S::zero(prec), |acc, p| acc + p.left.clone() + p.right.clone());
        let err: f64 = panels.iter().map(|p| p.error).sum();
        // Relative to int |f| so that integrals that cancel to zero terminate.
        let magnitude: f64 = panels.iter().map(|p| p.magnitude).sum();
        let target = opts.abs_tol.max(opts.rel_tol * magnitude.max(total.abs().to_f64()));
        if err <= target {
            return Ok(total);
        }
        if evals + 4 * n > opts.max_evals {
            return Err(Error::QuadratureBudget {
                tolerance: opts.rel_tol,
                budget: opts.max_evals,
                estimate: err,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let m = (p.a.clone() + p.b.clone()) / two.clone();
        panels.push(make(&mut f, p.a, m.clone(), p.left, &mut evals)?);
        panels.push(make(&mut f, m, p.b, p.right, &mut evals)?);
        let _ = p.coarse;
    }
}

/// Integral over an axis-aligned box by nested one-dimensional integration.
pub fn integrate_box<S, F>(f: &F, lower: &[f64], upper: &[f64], opts: &QuadratureOptions, prec: Precision) -> Result<S>
where
    S: Scalar,
    F: Fn(&[S]) -> Result<S>,
{
    if lower.len() != upper.len() {
        return Err(Error::DimensionMismatch {
            expected: lower.len(),
            got: upper.len(),
        });
    }
    let mut prefix = Vec::with_capacity(lower.len());
    integrate_axes(f, lower, upper, opts, prec, &mut prefix)
}

fn integrate_axes<S, F>(
    f: &F,
    lower: &[f64],
    upper: &[f64],
    opts: &QuadratureOptions,
    prec: Precision,
    prefix: &mut Vec<S>,
) -> Result<S>
where
    S: Scalar,
    F: Fn(&[S]) -> Result<S>,
{
    let axis = prefix.len();
    let a = S::from_f64(lower[axis], prec);
    let b = S::from_f64(upper[axis], prec);
    if axis + 1 == lower.len() {
        return integrate(
            |x: &S| {
                let mut p = prefix.clone();
                p.push(x.clone());
                f(&p)
            },
            &a,
            &b,
            opts,
            prec,
        );
    }
    let inner_prefix = prefix.clone();
    integrate(
        |x: &S| {
            let mut p = inner_prefix.clone();
            p.push(x.clone());
            integrate_axes(f, lower, upper, opts, prec, &mut p)
        },
        &a,
        &b,
        opts,
        prec,
    )
}

/// Half-width of the interval carrying all but `u` of the standard normal
/// mass, with room for polynomial growth of the integrand.
pub fn gaussian_truncation_radius(prec: Precision) -> f64 {
    (2.0 * (prec.bits() as f64 + 20.0) * std::f64::consts::LN_2).sqrt() + 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::BigReal;

    #[test]
    fn legendre_rule_weights_sum_to_two() {
        for n in [2, 5, 20, 21] {
            let r = gauss_legendre::<f64>(n, Precision::Machine);
            let s: f64 = r.iter().map(|(_, w)| w).sum();
            assert!((s - 2.0).abs() < 1e-14, "n={n}");
            assert!(r.windows(2).all(|w| w[0].0 < w[1].0));
        }
        let r = gauss_legendre::<f64>(2, Precision::Machine);
        assert!((r[1].0 - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn integrates_polynomials_and_smooth_functions() {
        let opts = QuadratureOptions::default();
        let v: f64 = integrate(|x: &f64| Ok(x * x), &-1.0, &1.0, &opts, Precision::Machine).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
        let v: f64 = integrate(|x: &f64| Ok((-x * x / 2.0).exp()), &-1.0, &1.0, &opts, Precision::Machine).unwrap();
        assert!((v - 1.7112487837842968).abs() < 1e-13);
        // sqrt has an endpoint singularity in its derivative; adaptivity copes.
        let v: f64 = integrate(|x: &f64| Ok(x.sqrt()), &0.0, &1.0, &opts, Precision::Machine).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn extended_precision_integral() {
        let prec = Precision::Extended(192);
        let opts = QuadratureOptions::for_precision(prec);
        let a = BigReal::from_i64(0, prec);
        let b = BigReal::from_i64(1, prec);
        let v = integrate(|x: &BigReal| Ok(x.exp()), &a, &b, &opts, prec).unwrap();
        let exact = BigReal::one(prec).exp() - BigReal::one(prec);
        assert!((v - exact).abs().to_f64() < 1e-50);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = QuadratureOptions {
            rel_tol: 1e-15,
            abs_tol: 0.0,
            max_evals: 200,
        };
        let r: Result<f64> = integrate(|x: &f64| Ok(x.abs().sqrt()), &-1.0, &1.0, &opts, Precision::Machine);
        assert!(matches!(r, Err(Error::QuadratureBudget { .. })));
    }

    #[test]
    fn box_integral() {
        let opts = QuadratureOptions::default();
        let v: f64 = integrate_box(&|p: &[f64]| Ok(p[0] * p[0] * p[1].exp()), &[-1.0, 0.0], &[1.0, 1.0], &opts, Precision::Machine).unwrap();
        assert!((v - 2.0 / 3.0 * (1f64.exp() - 1.0)).abs() < 1e-12);
    }
}
