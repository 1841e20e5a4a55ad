//! Positive linear functionals `L` and the quantities the weight systems need
//! from them: polynomial moments `L[x^alpha]`, damped moments `L[phi_alpha]`,
//! kernel embeddings `L[K(., x)]` and the double embedding `L (x) L [K]`.
//!
//! Closed forms are used where they exist (point evaluation, the Gaussian
//! kernel against the standard Gaussian measure or a box); every other
//! combination falls back to adaptive quadrature.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernels::{phi_basis_eval_at, KernelSpec};
use crate::multi_index::MultiIndex;
use crate::quadrature::{gaussian_truncation_radius, integrate, integrate_box, QuadratureOptions};
use crate::scalar::{Precision, Scalar};

/// Weight function of a [`NumericOracle`].
#[derive(Clone)]
pub enum Density {
    Uniform,
    /// `prod_i exp(-x_i^2/2) / sqrt(2 pi)` restricted to the box.
    StandardNormal,
    /// A user-supplied non-negative weight, evaluated in f64.
    Custom(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Uniform => write!(f, "Uniform"),
            Density::StandardNormal => write!(f, "StandardNormal"),
            Density::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// `L[f] = int_box f(x) rho(x) dx`, computed by adaptive quadrature.
#[derive(Clone, Debug)]
pub struct NumericOracle {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub density: Density,
    pub options: QuadratureOptions,
}

#[derive(Clone, Debug)]
pub enum FunctionalSpec {
    /// `L[f] = f(x0)`.
    PointEval { point: Vec<f64> },
    /// Lebesgue integral over `prod_i [a_i, b_i]`.
    LebesgueBox { lower: Vec<f64>, upper: Vec<f64> },
    /// Integral against the standard Gaussian measure on `R^d`.
    GaussianMeasure { dimension: usize },
    NumericOracle(NumericOracle),
}

fn check_box(lower: &[f64], upper: &[f64]) -> Result<()> {
    if lower.is_empty() || lower.len() != upper.len() {
        return Err(Error::InvalidArgument(format!(
            "box bounds must be non-empty and of equal length ({} vs {})",
            lower.len(),
            upper.len()
        )));
    }
    for (a, b) in lower.iter().zip(upper) {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidArgument(format!("invalid box side [{a}, {b}]")));
        }
    }
    Ok(())
}

impl FunctionalSpec {
    pub fn point_eval(point: Vec<f64>) -> Result<Self> {
        if point.is_empty() || point.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid evaluation point {point:?}")));
        }
        Ok(FunctionalSpec::PointEval { point })
    }

    pub fn lebesgue_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_box(&lower, &upper)?;
        Ok(FunctionalSpec::LebesgueBox { lower, upper })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::lebesgue_box(vec![a], vec![b])
    }

    pub fn gaussian_measure(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        Ok(FunctionalSpec::GaussianMeasure { dimension })
    }

    pub fn numeric_oracle(lower: Vec<f64>, upper: Vec<f64>, density: Density, options: QuadratureOptions) -> Result<Self> {
        check_box(&lower, &upper)?;
        Ok(FunctionalSpec::NumericOracle(NumericOracle {
            lower,
            upper,
            density,
            options,
        }))
    }

    pub fn dimension(&self) -> usize {
        match self {
            FunctionalSpec::PointEval { point } => point.len(),
            FunctionalSpec::LebesgueBox { lower, .. } => lower.len(),
            FunctionalSpec::GaussianMeasure { dimension } => *dimension,
            FunctionalSpec::NumericOracle(o) => o.lower.len(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            FunctionalSpec::PointEval { .. } => "point_eval",
            FunctionalSpec::LebesgueBox { .. } => "lebesgue_box",
            FunctionalSpec::GaussianMeasure { .. } => "gaussian_measure",
            FunctionalSpec::NumericOracle(_) => "numeric_oracle",
        }
    }

    /// Bounded interval `[a, b]` of a one-dimensional box functional.
    pub fn interval_bounds(&self) -> Option<(f64, f64)> {
        match self {
            FunctionalSpec::LebesgueBox { lower, upper } if lower.len() == 1 => Some((lower[0], upper[0])),
            FunctionalSpec::NumericOracle(o) if o.lower.len() == 1 => Some((o.lower[0], o.upper[0])),
            _ => None,
        }
    }

    /// Whether the growth condition behind the flat-limit results has been
    /// checked analytically for this functional. User-supplied densities are
    /// not checked.
    pub fn flat_limit_hypothesis_verified(&self) -> bool {
        match self {
            FunctionalSpec::NumericOracle(o) => !matches!(o.density, Density::Custom(_)),
            _ => true,
        }
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: d,
            });
        }
        Ok(())
    }

    fn options(&self, prec: Precision) -> QuadratureOptions {
        match self {
            FunctionalSpec::NumericOracle(o) => o.options,
            _ => QuadratureOptions::for_precision(prec),
        }
    }

    /// `L[f]` by quadrature for functionals with an integral representation.
    pub fn integrate_at<S, F>(&self, f: F, prec: Precision) -> Result<S>
    where
        S: Scalar,
        F: Fn(&[S]) -> Result<S>,
    {
        let opts = self.options(prec);
        match self {
            FunctionalSpec::PointEval { point } => {
                let x: Vec<S> = point.iter().map(|&c| S::from_f64(c, prec)).collect();
                f(&x)
            }
            FunctionalSpec::LebesgueBox { lower, upper } => integrate_box(&f, lower, upper, &opts, prec),
            FunctionalSpec::GaussianMeasure { dimension } => {
                let r = gaussian_truncation_radius(prec);
                let lower = vec![-r; *dimension];
                let upper = vec![r; *dimension];
                let norm = (S::from_i64(2, prec) * S::pi(prec)).sqrt();
                let g = |x: &[S]| -> Result<S> {
                    let mut w = f(x)?;
                    for xi in x {
                        w = w * (-(xi.square()) / S::from_i64(2, prec)).exp() / norm.clone();
                    }
                    Ok(w)
                };
                integrate_box(&g, &lower, &upper, &opts, prec)
            }
            FunctionalSpec::NumericOracle(o) => {
                let norm = (S::from_i64(2, prec) * S::pi(prec)).sqrt();
                let g = |x: &[S]| -> Result<S> {
                    let v = f(x)?;
                    Ok(match &o.density {
                        Density::Uniform => v,
                        Density::StandardNormal => x.iter().fold(v, |acc, xi| {
                            acc * (-(xi.square()) / S::from_i64(2, prec)).exp() / norm.clone()
                        }),
                        Density::Custom(rho) => {
                            let xf: Vec<f64> = x.iter().map(Scalar::to_f64).collect();
                            v * S::from_f64(rho(&xf), prec)
                        }
                    })
                };
                integrate_box(&g, &o.lower, &o.upper, &opts, prec)
            }
        }
    }

    /// `L[x^alpha]` at machine precision.
    pub fn moment(&self, alpha: &MultiIndex) -> Result<f64> {
        self.moment_at(alpha, Precision::Machine)
    }

    pub fn moment_at<S: Scalar>(&self, alpha: &MultiIndex, prec: Precision) -> Result<S> {
        self.check_dim(alpha.dimension())?;
        match self {
            FunctionalSpec::PointEval { point } => {
                let x: Vec<S> = point.iter().map(|&c| S::from_f64(c, prec)).collect();
                alpha.eval(&x)
            }
            FunctionalSpec::LebesgueBox { lower, upper } => {
                let mut m = S::one(prec);
                for ((&a, &b), &k) in lower.iter().zip(upper).zip(alpha.entries()) {
                    let a = S::from_f64(a, prec);
                    let b = S::from_f64(b, prec);
                    m = m * (b.powi(k + 1) - a.powi(k + 1)) / S::from_i64(k as i64 + 1, prec);
                }
                Ok(m)
            }
            FunctionalSpec::GaussianMeasure { .. } => {
                if alpha.has_odd_entry() {
                    return Ok(S::zero(prec));
                }
                Ok(alpha
                    .entries()
                    .iter()
                    .fold(S::one(prec), |acc, &k| acc * double_factorial::<S>(k, prec)))
            }
            FunctionalSpec::NumericOracle(_) => self.integrate_at(|x: &[S]| alpha.eval(x), prec),
        }
    }

    /// `L[phi_alpha]` with `phi_alpha(x) = exp(-|x|^2/(2 l^2)) x^alpha`, machine precision.
    pub fn damped_moment(&self, length_scale: f64, alpha: &MultiIndex) -> Result<f64> {
        self.damped_moment_at(length_scale, alpha, Precision::Machine)
    }

    pub fn damped_moment_at<S: Scalar>(&self, length_scale: f64, alpha: &MultiIndex, prec: Precision) -> Result<S> {
        self.check_dim(alpha.dimension())?;
        match self {
            FunctionalSpec::PointEval { point } => phi_basis_eval_at(length_scale, alpha, point, prec),
            FunctionalSpec::GaussianMeasure { .. } => {
                if alpha.has_odd_entry() {
                    return Ok(S::zero(prec));
                }
                // Per axis: v^(1/2) v^(n/2) (n-1)!!, v = l^2/(1+l^2).
                let l2 = S::from_f64(length_scale, prec).square();
                let v = l2.clone() / (S::one(prec) + l2);
                let root = v.sqrt();
                Ok(alpha.entries().iter().fold(S::one(prec), |acc, &n| {
                    acc * root.clone() * v.powi(n / 2) * double_factorial::<S>(n, prec)
                }))
            }
            FunctionalSpec::LebesgueBox { lower, upper } => {
                let opts = self.options(prec);
                let mut m = S::one(prec);
                for ((&a, &b), &n) in lower.iter().zip(upper).zip(alpha.entries()) {
                    m = m * damped_interval_moment::<S>(length_scale, n, a, b, &opts, prec)?;
                }
                Ok(m)
            }
            FunctionalSpec::NumericOracle(_) => {
                self.integrate_at(|x: &[S]| damped_monomial(length_scale, alpha, x, prec), prec)
            }
        }
    }

    /// `L[K(., x)]` at machine precision.
    pub fn kernel_embedding(&self, k: &KernelSpec, x: &[f64]) -> Result<f64> {
        self.kernel_embedding_at(k, x, Precision::Machine)
    }

    pub fn kernel_embedding_at<S: Scalar>(&self, k: &KernelSpec, x: &[f64], prec: Precision) -> Result<S> {
        self.check_dim(x.len())?;
        k.check_dimension(x.len())?;
        let ell = k.length_scale();
        match (self, k.is_gaussian()) {
            (FunctionalSpec::PointEval { point }, _) => k.eval_at(point, x, prec),
            (FunctionalSpec::GaussianMeasure { dimension }, true) => {
                // (l^2/(1+l^2))^(d/2) exp(-|x|^2 / (2(1+l^2)))
                let l2 = S::from_f64(ell, prec).square();
                let one_plus = S::one(prec) + l2.clone();
                let ratio = (l2 / one_plus.clone()).sqrt();
                let r2 = x.iter().fold(S::zero(prec), |acc, &c| acc + S::from_f64(c, prec).square());
                let front = ratio.powi(*dimension as u32);
                Ok(front * (-(r2 / (S::from_i64(2, prec) * one_plus))).exp())
            }
            (FunctionalSpec::LebesgueBox { lower, upper }, true) => {
                // prod_i l sqrt(pi/2) [erf((b-x)/(sqrt2 l)) - erf((a-x)/(sqrt2 l))]
                let l = S::from_f64(ell, prec);
                let two = S::from_i64(2, prec);
                let front = l.clone() * (S::pi(prec) / two.clone()).sqrt();
                let scale = two.sqrt() * l;
                let mut out = S::one(prec);
                for ((&a, &b), &xi) in lower.iter().zip(upper).zip(x) {
                    let xi = S::from_f64(xi, prec);
                    let hi = ((S::from_f64(b, prec) - xi.clone()) / scale.clone()).erf();
                    let lo = ((S::from_f64(a, prec) - xi) / scale.clone()).erf();
                    out = out * front.clone() * (hi - lo);
                }
                Ok(out)
            }
            (FunctionalSpec::GaussianMeasure { .. }, false) if matches!(k.family(), crate::kernels::KernelFamily::Szego) => {
                Err(Error::Unsupported(
                    "the Szego kernel is not defined on the support of the Gaussian measure".into(),
                ))
            }
            _ => self.integrate_at(
                |t: &[S]| {
                    let tf: Vec<f64> = t.iter().map(Scalar::to_f64).collect();
                    kernel_at_lifted(k, t, &tf, x, prec)
                },
                prec,
            ),
        }
    }

    /// `L (x) L [K]` at machine precision.
    pub fn double_embedding(&self, k: &KernelSpec) -> Result<f64> {
        self.double_embedding_at(k, Precision::Machine)
    }

    pub fn double_embedding_at<S: Scalar>(&self, k: &KernelSpec, prec: Precision) -> Result<S> {
        k.check_dimension(self.dimension())?;
        let ell = k.length_scale();
        match (self, k.is_gaussian()) {
            (FunctionalSpec::PointEval { point }, _) => k.eval_at(point, point, prec),
            (FunctionalSpec::GaussianMeasure { dimension }, true) => {
                let l2 = S::from_f64(ell, prec).square();
                let ratio = (l2.clone() / (S::from_i64(2, prec) + l2)).sqrt();
                Ok(ratio.powi(*dimension as u32))
            }
            (FunctionalSpec::LebesgueBox { lower, upper }, true) => {
                // per side of length h: 2 [h l sqrt(pi/2) erf(h/(sqrt2 l)) - l^2 (1 - exp(-h^2/(2 l^2)))]
                let l = S::from_f64(ell, prec);
                let two = S::from_i64(2, prec);
                let mut out = S::one(prec);
                for (&a, &b) in lower.iter().zip(upper) {
                    let h = S::from_f64(b, prec) - S::from_f64(a, prec);
                    let erf_term = h.clone()
                        * l.clone()
                        * (S::pi(prec) / two.clone()).sqrt()
                        * (h.clone() / (two.sqrt() * l.clone())).erf();
                    let exp_term = l.square()
                        * (S::one(prec) - (-(h.square()) / (two.clone() * l.square())).exp());
                    out = out * two.clone() * (erf_term - exp_term);
                }
                Ok(out)
            }
            _ => self.integrate_at(
                |t: &[S]| {
                    let tf: Vec<f64> = t.iter().map(Scalar::to_f64).collect();
                    self.kernel_embedding_at::<S>(k, &tf, prec)
                },
                prec,
            ),
        }
    }
}

/// Kernel value where the first argument is already at working precision.
/// Gaussian kernels use the lifted coordinates directly so that quadrature
/// nodes keep their full precision; other families go through f64.
fn kernel_at_lifted<S: Scalar>(k: &KernelSpec, t: &[S], tf: &[f64], x: &[f64], prec: Precision) -> Result<S> {
    if k.is_gaussian() {
        let l = S::from_f64(k.length_scale(), prec);
        let r2 = t.iter().zip(x).fold(S::zero(prec), |acc, (ti, &xi)| {
            acc + (ti.clone() - S::from_f64(xi, prec)).square()
        });
        return Ok((-(r2 / (S::from_i64(2, prec) * l.square()))).exp());
    }
    k.eval_at(tf, x, prec)
}

fn damped_monomial<S: Scalar>(length_scale: f64, alpha: &MultiIndex, x: &[S], prec: Precision) -> Result<S> {
    let l = S::from_f64(length_scale, prec);
    let r2 = x.iter().fold(S::zero(prec), |acc, v| acc + v.square());
    Ok((-(r2 / (S::from_i64(2, prec) * l.square()))).exp() * alpha.eval(x)?)
}

/// `(n-1)!!` for even `n` (with `(-1)!! = 1`); the `n`-th standard normal moment.
fn double_factorial<S: Scalar>(n: u32, prec: Precision) -> S {
    let mut acc = S::one(prec);
    let mut k = n as i64 - 1;
    while k > 1 {
        acc = acc * S::from_i64(k, prec);
        k -= 2;
    }
    acc
}

/// `int_a^b exp(-t^2/(2 l^2)) t^n dt`.
///
/// When `c^2/(2 l^2) <= 1` with `c = max(|a|, |b|)` the exponential is
/// expanded and integrated term by term (the alternating series loses at most
/// a couple of bits); otherwise adaptive quadrature is used.
fn damped_interval_moment<S: Scalar>(
    length_scale: f64,
    n: u32,
    a: f64,
    b: f64,
    opts: &QuadratureOptions,
    prec: Precision,
) -> Result<S> {
    let c = a.abs().max(b.abs());
    let rho = c * c / (2.0 * length_scale * length_scale);
    if rho > 1.0 {
        let l = S::from_f64(length_scale, prec);
        let denom = S::from_i64(2, prec) * l.square();
        return integrate(
            |t: &S| Ok((-(t.square()) / denom.clone()).exp() * t.powi(n)),
            &S::from_f64(a, prec),
            &S::from_f64(b, prec),
            opts,
            prec,
        );
    }
    let sa = S::from_f64(a, prec);
    let sb = S::from_f64(b, prec);
    let l = S::from_f64(length_scale, prec);
    let inv = -(S::one(prec) / (S::from_i64(2, prec) * l.square()));
    let a2 = sa.square();
    let b2 = sb.square();
    let mut pa = sa.powi(n + 1);
    let mut pb = sb.powi(n + 1);
    let mut coef = S::one(prec); // (-1/(2 l^2))^k / k!
    let mut sum = S::zero(prec);
    let eps = prec.unit_roundoff() / 16.0;
    for k in 0..10_000u32 {
        let term = coef.clone() * (pb.clone() - pa.clone()) / S::from_i64((n + 2 * k + 1) as i64, prec);
        sum = sum + term.clone();
        let scale = sum.abs().to_f64().max(f64::MIN_POSITIVE);
        // Remaining terms shrink geometrically with ratio <= rho / (k+1).
        if k > 0 && term.abs().to_f64() <= eps * scale {
            return Ok(sum);
        }
        pa = pa * a2.clone();
        pb = pb * b2.clone();
        coef = coef * inv.clone() / S::from_i64(k as i64 + 1, prec);
    }
    Err(Error::Internal("damped moment series failed to converge".into()))
}
