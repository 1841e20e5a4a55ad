//! Positive-definite kernels with a length-scale parameter.
//!
//! The Gaussian, exponential and Szegő kernels are evaluated in closed form.
//! General damped power series kernels
//! `K(x,y) = G(|x|/l) G(|y|/l) sum_alpha w_alpha / (alpha!)^2 / l^(q|alpha|) x^alpha y^alpha`
//! are summed shell by shell (all `alpha` of one degree at a time) until a
//! geometric tail bound drops below the truncation tolerance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::multi_index::{indices_of_degree, MultiIndex};
use crate::points::PointSet;
use crate::precision::PrecisionConfig;
use crate::scalar::{Precision, Scalar};

/// Hard cap on the number of degree shells summed for a damped power series.
const MAX_SERIES_SHELLS: u32 = 20_000;

/// Damping function `G` of a damped power series kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Damping {
    /// `G(u) = exp(-|u|^2 / 2)`.
    Gaussian,
    /// `G = 1`; gives the Taylor-space kernels.
    Identity,
}

/// Weight sequence `w_alpha` of a damped power series kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesWeights {
    /// `w_alpha = alpha!`
    Factorial,
    /// `w_alpha = (alpha!)^2`
    FactorialSquared,
    /// `w_alpha = 1`
    Unit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DampedSeries {
    pub damping: Damping,
    /// Exponent `q > 0` of the length-scale.
    pub exponent: f64,
    pub weights: SeriesWeights,
    /// Relative truncation tolerance; `None` picks `1e-14` at machine
    /// precision and `2^(-bits/2)` in extended precision.
    pub tolerance: Option<f64>,
}

impl DampedSeries {
    /// Parameters that reproduce the Gaussian kernel.
    pub fn gaussian() -> Self {
        DampedSeries {
            damping: Damping::Gaussian,
            exponent: 2.0,
            weights: SeriesWeights::Factorial,
            tolerance: None,
        }
    }

    fn tolerance_for(&self, prec: Precision) -> f64 {
        self.tolerance.unwrap_or(match prec {
            Precision::Machine => 1e-14,
            Precision::Extended(bits) => 2f64.powi(-(bits as i32) / 2),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelFamily {
    /// `exp(-|x-y|^2 / (2 l^2))`
    Gaussian,
    /// `exp(x y / l)`, one-dimensional.
    Exponential,
    /// `l^2 / (l^2 - x y)`, one-dimensional, requires `|x y| < l^2`.
    Szego,
    DampedPowerSeries(DampedSeries),
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Exponential => "exponential",
            KernelFamily::Szego => "szego",
            KernelFamily::DampedPowerSeries(_) => "damped_power_series",
        }
    }
}

/// A kernel family together with its length-scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    family: KernelFamily,
    length_scale: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, length_scale: f64) -> Result<Self> {
        if !(length_scale > 0.0 && length_scale.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "length-scale must be positive and finite, got {length_scale}"
            )));
        }
        if let KernelFamily::DampedPowerSeries(p) = &family {
            if !(p.exponent > 0.0 && p.exponent.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "series exponent must be positive, got {}",
                    p.exponent
                )));
            }
            if let Some(t) = p.tolerance {
                if !(t > 0.0) {
                    return Err(Error::InvalidArgument(format!("series tolerance must be positive, got {t}")));
                }
            }
        }
        Ok(KernelSpec { family, length_scale })
    }

    pub fn gaussian(length_scale: f64) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, length_scale)
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    pub fn with_length_scale(&self, length_scale: f64) -> Result<Self> {
        Self::new(self.family, length_scale)
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.family, KernelFamily::Gaussian)
    }

    /// Largest dimension the family is defined for.
    pub fn max_dimension(&self) -> Option<usize> {
        match self.family {
            KernelFamily::Exponential | KernelFamily::Szego => Some(1),
            _ => None,
        }
    }

    pub fn check_dimension(&self, d: usize) -> Result<()> {
        match self.max_dimension() {
            Some(max) if d > max => Err(Error::InvalidArgument(format!(
                "{} kernel is only defined in dimension {max}, got {d}",
                self.family.name()
            ))),
            _ => Ok(()),
        }
    }

    /// `K_l(x, y)` at machine precision.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.eval_at(x, y, Precision::Machine)
    }

    /// `K_l(x, y)` at working precision `prec`.
    pub fn eval_at<S: Scalar>(&self, x: &[f64], y: &[f64], prec: Precision) -> Result<S> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        self.check_dimension(x.len())?;
        let ell = S::from_f64(self.length_scale, prec);
        match &self.family {
            KernelFamily::Gaussian => {
                let r2 = squared_distance::<S>(x, y, prec);
                Ok((-(r2 / (S::from_i64(2, prec) * ell.square()))).exp())
            }
            KernelFamily::Exponential => {
                let xy = S::from_f64(x[0], prec) * S::from_f64(y[0], prec);
                Ok((xy / ell).exp())
            }
            KernelFamily::Szego => {
                let xy = S::from_f64(x[0], prec) * S::from_f64(y[0], prec);
                let l2 = ell.square();
                if !(xy.abs() < l2) {
                    return Err(Error::SzegoPole {
                        product: xy.to_f64(),
                        limit: l2.to_f64(),
                    });
                }
                Ok(l2.clone() / (l2 - xy))
            }
            KernelFamily::DampedPowerSeries(p) => damped_series_eval(p, self.length_scale, x, y, prec),
        }
    }
}

fn squared_distance<S: Scalar>(x: &[f64], y: &[f64], prec: Precision) -> S {
    x.iter().zip(y).fold(S::zero(prec), |acc, (&a, &b)| {
        let d = S::from_f64(a, prec) - S::from_f64(b, prec);
        acc + d.square()
    })
}

fn squared_norm<S: Scalar>(x: &[f64], prec: Precision) -> S {
    x.iter().fold(S::zero(prec), |acc, &a| acc + S::from_f64(a, prec).square())
}

/// `G(|x|/l)` for the whitelisted damping functions.
fn damping_factor<S: Scalar>(damping: Damping, ell: f64, x: &[f64], prec: Precision) -> S {
    match damping {
        Damping::Identity => S::one(prec),
        Damping::Gaussian => {
            let l = S::from_f64(ell, prec);
            (-(squared_norm::<S>(x, prec) / (S::from_i64(2, prec) * l.square()))).exp()
        }
    }
}

/// `w_alpha / (alpha!)^2`.
fn series_coefficient<S: Scalar>(weights: SeriesWeights, alpha: &MultiIndex, prec: Precision) -> S {
    let power = match weights {
        SeriesWeights::Factorial => 1,
        SeriesWeights::FactorialSquared => return S::one(prec),
        SeriesWeights::Unit => 2,
    };
    let mut c = S::one(prec);
    for &a in alpha.entries() {
        for k in 2..=a {
            let k = S::from_i64(k as i64, prec);
            c = c / if power == 1 { k } else { k.square() };
        }
    }
    c
}

/// Tracks the absolute-value bound `B_n` on the degree-`n` shell and the
/// ratio bound for the next shells (valid because the bounds decrease in `n`).
struct TailBound {
    weights: SeriesWeights,
    dim: f64,
    sum_abs: f64,
    max_abs: f64,
    scale: f64,
}

impl TailBound {
    /// Bound on `B_{n+1} / B_n`.
    fn ratio(&self, n: u32) -> f64 {
        let n = n as f64;
        match self.weights {
            SeriesWeights::Factorial | SeriesWeights::Unit => self.sum_abs / ((n + 1.0) * self.scale),
            SeriesWeights::FactorialSquared => self.max_abs / self.scale * (n + self.dim) / (n + 1.0),
        }
    }

    fn limit_ratio(&self) -> f64 {
        match self.weights {
            SeriesWeights::Factorial | SeriesWeights::Unit => 0.0,
            SeriesWeights::FactorialSquared => self.max_abs / self.scale,
        }
    }
}

fn damped_series_eval<S: Scalar>(
    params: &DampedSeries,
    ell: f64,
    x: &[f64],
    y: &[f64],
    prec: Precision,
) -> Result<S> {
    let tol = params.tolerance_for(prec);
    let d = x.len();
    let products: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let bound = TailBound {
        weights: params.weights,
        dim: d as f64,
        sum_abs: products.iter().map(|p| p.abs()).sum(),
        max_abs: products.iter().fold(0.0, |m, p| m.max(p.abs())),
        scale: ell.powf(params.exponent),
    };
    if bound.limit_ratio() >= 1.0 {
        return Err(Error::SeriesNotConvergent {
            tolerance: tol,
            ratio: bound.limit_ratio(),
        });
    }
    let xs: Vec<S> = x.iter().map(|&v| S::from_f64(v, prec)).collect();
    let ys: Vec<S> = y.iter().map(|&v| S::from_f64(v, prec)).collect();
    let xy: Vec<S> = xs.iter().zip(&ys).map(|(a, b)| a.clone() * b.clone()).collect();
    let inv_scale = S::one(prec)
        / (S::from_f64(params.exponent, prec) * S::from_f64(ell, prec).ln()).exp();

    let mut sum = S::zero(prec);
    let mut level = S::one(prec); // l^(-q n)
    let mut shell_bound = 1.0f64; // B_n
    let mut total_bound = 0.0f64;
    for n in 0..MAX_SERIES_SHELLS {
        let mut shell = S::zero(prec);
        for alpha in indices_of_degree(d, n) {
            let c: S = series_coefficient(params.weights, &alpha, prec);
            let mono = alpha.eval(&xy).expect("dimension checked");
            shell = shell + c * mono;
        }
        sum = sum + shell * level.clone();
        total_bound += shell_bound;
        let r = bound.ratio(n + 1);
        let next = shell_bound * bound.ratio(n);
        if r < 1.0 && next / (1.0 - r) <= tol * total_bound.max(f64::MIN_POSITIVE) {
            let damp = damping_factor::<S>(params.damping, ell, x, prec)
                * damping_factor::<S>(params.damping, ell, y, prec);
            return Ok(damp * sum);
        }
        shell_bound = next;
        level = level * inv_scale.clone();
    }
    Err(Error::SeriesNotConvergent {
        tolerance: tol,
        ratio: bound.ratio(MAX_SERIES_SHELLS),
    })
}

/// `G[i][j] = K_l(x_i, x_j)`: the upper triangle is computed, then mirrored.
pub fn gram_matrix<S: Scalar>(k: &KernelSpec, points: &PointSet, prec: &PrecisionConfig) -> Result<Matrix<S>> {
    if !S::supports(prec.precision) {
        return Err(Error::PrecisionMismatch(prec.precision));
    }
    let n = points.len();
    let p = prec.precision;
    let row = |i: usize| -> Result<Vec<S>> {
        (i..n).map(|j| k.eval_at::<S>(points.get(i), points.get(j), p)).collect()
    };
    #[cfg(feature = "parallel")]
    let upper: Vec<Vec<S>> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(row).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let upper: Vec<Vec<S>> = (0..n).map(row).collect::<Result<_>>()?;
    Matrix::from_fn(n, n, |i, j| {
        if j >= i {
            upper[i][j - i].clone()
        } else {
            upper[j][i - j].clone()
        }
    })
}

/// `phi_alpha(x) = exp(-|x|^2 / (2 l^2)) x^alpha`.
pub fn phi_basis_eval(length_scale: f64, alpha: &MultiIndex, x: &[f64]) -> Result<f64> {
    phi_basis_eval_at(length_scale, alpha, x, Precision::Machine)
}

pub fn phi_basis_eval_at<S: Scalar>(length_scale: f64, alpha: &MultiIndex, x: &[f64], prec: Precision) -> Result<S> {
    let xs: Vec<S> = x.iter().map(|&v| S::from_f64(v, prec)).collect();
    let mono = alpha.eval(&xs)?;
    Ok(damping_factor::<S>(Damping::Gaussian, length_scale, x, prec) * mono)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multi_index::enumerate_multi_indices;
    use crate::scalar::BigReal;
    use proptest::prelude::*;

    fn dps(damping: Damping, exponent: f64, weights: SeriesWeights) -> KernelFamily {
        KernelFamily::DampedPowerSeries(DampedSeries {
            damping,
            exponent,
            weights,
            tolerance: None,
        })
    }

    #[test]
    fn closed_form_examples() {
        let g = KernelSpec::gaussian(1.0).unwrap();
        assert!((g.eval(&[0.0], &[1.0]).unwrap() - 0.6065306597126334).abs() < 1e-15);
        let s = KernelSpec::new(KernelFamily::Szego, 1.0).unwrap();
        assert!((s.eval(&[0.5], &[0.5]).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let e = KernelSpec::new(KernelFamily::Exponential, 2.0).unwrap();
        assert!((e.eval(&[1.0], &[1.0]).unwrap() - 1.6487212707001282).abs() < 1e-15);
    }

    #[test]
    fn invalid_inputs() {
        assert!(KernelSpec::gaussian(0.0).is_err());
        assert!(KernelSpec::gaussian(-1.0).is_err());
        let s = KernelSpec::new(KernelFamily::Szego, 1.0).unwrap();
        assert!(matches!(s.eval(&[1.0], &[1.0]), Err(Error::SzegoPole { .. })));
        assert!(s.eval(&[0.1, 0.1], &[0.1, 0.1]).is_err());
        let g = KernelSpec::gaussian(1.0).unwrap();
        assert!(matches!(g.eval(&[0.0], &[0.0, 1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn gram_examples() {
        let prec = PrecisionConfig::machine();
        let g = KernelSpec::gaussian(1.0).unwrap();
        let one = gram_matrix::<f64>(&g, &PointSet::from_nodes(&[0.3]).unwrap(), &prec).unwrap();
        assert_eq!(*one.get(0, 0), 1.0);
        let two = gram_matrix::<f64>(&g, &PointSet::from_nodes(&[0.0, 1.0]).unwrap(), &prec).unwrap();
        let e = (-0.5f64).exp();
        assert_eq!(*two.get(0, 1), e);
        assert_eq!(*two.get(1, 0), e);
        assert!(two.is_symmetric());
    }

    #[test]
    fn phi_examples() {
        let a0 = MultiIndex::new(vec![0]);
        assert_eq!(phi_basis_eval(1.0, &a0, &[0.0]).unwrap(), 1.0);
        let a2 = MultiIndex::new(vec![2]);
        assert!((phi_basis_eval(1.0, &a2, &[1.0]).unwrap() - 0.6065306597126334).abs() < 1e-15);
        let a3 = MultiIndex::new(vec![3]);
        assert!((phi_basis_eval(1e6, &a3, &[2.0]).unwrap() - 8.0).abs() < 1e-9);
    }

    // Gaussian factorisation identity, truncated series against the closed form.
    #[test]
    fn gaussian_series_identity() {
        let pts = [[0.0, 0.0], [1.2, -0.7], [-2.0 / 2f64.sqrt(), 1.4], [0.3, 1.9]];
        for &ell in &[1.0, 1.7, 5.0] {
            for x in &pts {
                for y in &pts {
                    let closed = KernelSpec::gaussian(ell).unwrap().eval(x, y).unwrap();
                    let mut series = 0.0;
                    for alpha in &enumerate_multi_indices(2, 40) {
                        let term = alpha.eval(x).unwrap() * alpha.eval(y).unwrap()
                            / (alpha.factorial_f64() * ell.powi(2 * alpha.degree() as i32));
                        series += term;
                    }
                    let damp = (-(x[0] * x[0] + x[1] * x[1] + y[0] * y[0] + y[1] * y[1]) / (2.0 * ell * ell)).exp();
                    assert!((damp * series - closed).abs() < 1e-10, "{x:?} {y:?} {ell}");
                }
            }
        }
    }

    #[test]
    fn damped_series_with_gaussian_parameters_matches_gaussian() {
        let points = PointSet::new(vec![vec![-1.0, 0.5], vec![0.0, 0.0], vec![1.5, -0.2], vec![0.7, 0.9]]).unwrap();
        let prec = PrecisionConfig::machine();
        for &ell in &[0.7, 1.0, 3.0] {
            let a = gram_matrix::<f64>(&KernelSpec::gaussian(ell).unwrap(), &points, &prec).unwrap();
            let k = KernelSpec::new(KernelFamily::DampedPowerSeries(DampedSeries::gaussian()), ell).unwrap();
            let b = gram_matrix::<f64>(&k, &points, &prec).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    assert!((a.get(i, j) - b.get(i, j)).abs() < 1e-13, "{ell} {i} {j}");
                }
            }
        }
    }

    #[test]
    fn taylor_space_series_match_closed_forms() {
        let exp_series = KernelSpec::new(dps(Damping::Identity, 1.0, SeriesWeights::Factorial), 2.0).unwrap();
        let exp_closed = KernelSpec::new(KernelFamily::Exponential, 2.0).unwrap();
        let szego_series = KernelSpec::new(dps(Damping::Identity, 2.0, SeriesWeights::FactorialSquared), 1.5).unwrap();
        let szego_closed = KernelSpec::new(KernelFamily::Szego, 1.5).unwrap();
        for &(x, y) in &[(0.5, 0.5), (-1.0, 0.8), (1.0, 1.0), (0.0, 2.0)] {
            let a = exp_series.eval(&[x], &[y]).unwrap();
            let b = exp_closed.eval(&[x], &[y]).unwrap();
            assert!((a - b).abs() <= 1e-13 * b.abs(), "exp {x} {y}");
            let a = szego_series.eval(&[x], &[y]).unwrap();
            let b = szego_closed.eval(&[x], &[y]).unwrap();
            assert!((a - b).abs() <= 1e-12 * b.abs(), "szego {x} {y}");
        }
    }

    #[test]
    fn divergent_series_is_an_error() {
        let k = KernelSpec::new(dps(Damping::Identity, 2.0, SeriesWeights::FactorialSquared), 1.0).unwrap();
        assert!(matches!(k.eval(&[1.0], &[1.5]), Err(Error::SeriesNotConvergent { .. })));
    }

    #[test]
    fn extended_series_meets_extended_tolerance() {
        let prec = Precision::Extended(200);
        let k = KernelSpec::new(KernelFamily::DampedPowerSeries(DampedSeries::gaussian()), 1.3).unwrap();
        let g = KernelSpec::gaussian(1.3).unwrap();
        let a: BigReal = k.eval_at(&[0.4, -1.1], &[1.0, 0.2], prec).unwrap();
        let b: BigReal = g.eval_at(&[0.4, -1.1], &[1.0, 0.2], prec).unwrap();
        assert!((a - b).abs().to_f64() < 1e-29);
    }

    #[test]
    fn gram_is_positive_definite_at_extended_precision() {
        let prec = PrecisionConfig::extended(256).unwrap();
        let points = PointSet::from_nodes(&[-1.0, -0.5, 0.1, 0.2, 0.8, 1.0]).unwrap();
        for &ell in &[0.5, 2.0, 20.0] {
            let g = gram_matrix::<BigReal>(&KernelSpec::gaussian(ell).unwrap(), &points, &prec).unwrap();
            assert!(crate::linalg::Cholesky::factor(&g).is_ok(), "ell={ell}");
        }
    }

    proptest! {
        #[test]
        fn kernels_are_symmetric(x in -0.9f64..0.9, y in -0.9f64..0.9, ell in 1.0f64..5.0) {
            for fam in [KernelFamily::Gaussian, KernelFamily::Exponential, KernelFamily::Szego,
                        dps(Damping::Gaussian, 2.0, SeriesWeights::Unit)] {
                let k = KernelSpec::new(fam, ell).unwrap();
                let a = k.eval(&[x], &[y]).unwrap();
                let b = k.eval(&[y], &[x]).unwrap();
                prop_assert!((a - b).abs() <= 1e-15 * a.abs());
                prop_assert!(k.eval(&[x], &[x]).unwrap() > 0.0);
            }
        }
    }
}
