//! Weight families on a fixed point set and the worst-case error.
//!
//! * worst-case optimal weights `w*` solve `G w = z` with the kernel Gram
//!   matrix `G` and embeddings `z_n = L[K(., x_n)]`;
//! * polynomial weights `w_pol` solve `P^T w = (L[x^alpha])_alpha` with the
//!   Vandermonde matrix `P`;
//! * damped weights `w_phi` solve the same system with the monomials replaced
//!   by `phi_alpha(x) = exp(-|x|^2/(2 l^2)) x^alpha`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::FunctionalSpec;
use crate::kernels::{gram_matrix, phi_basis_eval_at, KernelSpec};
use crate::linalg::{condition_estimate, dot, solve_general, solve_spd, ConditionWarning, LinearSolve, Matrix};
use crate::multi_index::{enumerate_multi_indices, polynomial_space_dim, MultiIndexSet};
use crate::points::{CubatureRule, PointSet};
use crate::precision::PrecisionConfig;
use crate::scalar::Scalar;

/// Weights together with the diagnostics of the linear solve that produced them.
#[derive(Clone, Debug)]
pub struct WeightSolution<S> {
    pub rule: CubatureRule<S>,
    pub residual: f64,
    pub condition_estimate: f64,
    pub precision_used: PrecisionConfig,
    pub warning: Option<ConditionWarning>,
}

impl<S: Scalar> WeightSolution<S> {
    fn from_solve(points: &PointSet, solve: LinearSolve<S>, prec: &PrecisionConfig) -> Result<Self> {
        Ok(WeightSolution {
            rule: CubatureRule::new(points.clone(), solve.x)?,
            residual: solve.residual,
            condition_estimate: solve.condition.max(1.0),
            precision_used: *prec,
            warning: solve.warning,
        })
    }

    pub fn weights(&self) -> &[S] {
        self.rule.weights()
    }
}

/// Worst-case error and the terms it was assembled from.
#[derive(Clone, Debug)]
pub struct WorstCaseReport<S> {
    pub wce: S,
    /// `LLK - 2 w^T z + w^T G w` before clamping.
    pub radicand: S,
    pub double_embedding: S,
    pub embeddings: Vec<S>,
    pub quadratic_form: S,
    pub linear_term: S,
    /// `LLK - w^T z`, only computed for optimal weights.
    pub simplified_radicand: Option<S>,
}

impl<S: Scalar> WorstCaseReport<S> {
    pub fn wce_f64(&self) -> f64 {
        self.wce.to_f64()
    }
}

fn check_scalar<S: Scalar>(prec: &PrecisionConfig) -> Result<()> {
    if S::supports(prec.precision) {
        Ok(())
    } else {
        Err(Error::PrecisionMismatch(prec.precision))
    }
}

fn check_dims(k: Option<&KernelSpec>, functional: &FunctionalSpec, points: &PointSet) -> Result<()> {
    if functional.dimension() != points.dimension() {
        return Err(Error::DimensionMismatch {
            expected: functional.dimension(),
            got: points.dimension(),
        });
    }
    if let Some(k) = k {
        k.check_dimension(points.dimension())?;
    }
    Ok(())
}

fn embeddings<S: Scalar>(k: &KernelSpec, functional: &FunctionalSpec, points: &PointSet, prec: &PrecisionConfig) -> Result<Vec<S>> {
    points
        .iter()
        .map(|x| functional.kernel_embedding_at::<S>(k, x, prec.precision))
        .collect()
}

/// Worst-case optimal weights: the solution of `G w = z`.
pub fn optimal_weights<S: Scalar>(
    k: &KernelSpec,
    functional: &FunctionalSpec,
    points: &PointSet,
    prec: &PrecisionConfig,
) -> Result<WeightSolution<S>> {
    optimal_system(k, functional, points, prec).map(|(sol, _, _)| sol)
}

fn optimal_system<S: Scalar>(
    k: &KernelSpec,
    functional: &FunctionalSpec,
    points: &PointSet,
    prec: &PrecisionConfig,
) -> Result<(WeightSolution<S>, Matrix<S>, Vec<S>)> {
    check_scalar::<S>(prec)?;
    check_dims(Some(k), functional, points)?;
    let gram = gram_matrix::<S>(k, points, prec)?;
    let z = embeddings::<S>(k, functional, points, prec)?;
    let solve = solve_spd(&gram, &z, prec)?;
    Ok((WeightSolution::from_solve(points, solve, prec)?, gram, z))
}

/// Roundoff budget for a radicand built from terms of size `scale`.
fn roundoff_budget(condition: f64, prec: &PrecisionConfig, scale: f64) -> f64 {
    condition.max(1.0) * prec.unit_roundoff() * scale
}

fn finish_radicand<S: Scalar>(radicand: S, budget: impl FnOnce() -> f64) -> Result<S> {
    if radicand.is_negative() {
        let budget = budget();
        if radicand.abs().to_f64() > budget {
            return Err(Error::InconsistentWorstCase {
                radicand: radicand.to_f64(),
                budget,
            });
        }
        return Ok(S::zero(radicand.precision()));
    }
    Ok(radicand)
}

/// `e(Q) = sqrt(LLK - 2 w^T z + w^T G w)` for arbitrary weights.
pub fn worst_case_error<S: Scalar>(
    k: &KernelSpec,
    functional: &FunctionalSpec,
    rule: &CubatureRule<S>,
    prec: &PrecisionConfig,
) -> Result<WorstCaseReport<S>> {
    check_scalar::<S>(prec)?;
    check_dims(Some(k), functional, rule.points())?;
    let gram = gram_matrix::<S>(k, rule.points(), prec)?;
    let z = embeddings::<S>(k, functional, rule.points(), prec)?;
    let llk = functional.double_embedding_at::<S>(k, prec.precision)?;
    report(&gram, z, llk, rule.weights(), None, prec)
}

fn report<S: Scalar>(
    gram: &Matrix<S>,
    z: Vec<S>,
    llk: S,
    w: &[S],
    optimal_residual: Option<f64>,
    prec: &PrecisionConfig,
) -> Result<WorstCaseReport<S>> {
    let p = prec.precision;
    let gw = gram.mul_vec(w)?;
    let quad = dot(w, &gw);
    let lin = dot(w, &z);
    let radicand = llk.clone() - S::from_i64(2, p) * lin.clone() + quad.clone();
    let scale = llk.abs().to_f64() + 2.0 * lin.abs().to_f64() + quad.abs().to_f64();
    let budget = || {
        let kappa = condition_estimate(gram, prec).unwrap_or(f64::INFINITY);
        roundoff_budget(kappa, prec, scale)
    };
    let clamped = finish_radicand(radicand.clone(), budget)?;

    let simplified = match optimal_residual {
        Some(residual) => {
            let simple = llk.clone() - lin.clone();
            // The two forms differ by w^T (G w - z).
            let w1: f64 = w.iter().map(|v| v.abs().to_f64()).sum();
            let kappa = condition_estimate(gram, prec).unwrap_or(f64::INFINITY);
            let tol = 10.0 * (w1 * residual + roundoff_budget(kappa, prec, scale));
            let gap = (simple.clone() - radicand.clone()).abs().to_f64();
            if gap > tol {
                return Err(Error::Internal(format!(
                    "worst-case error forms disagree: full {} vs simplified {} (gap {gap:e}, tolerance {tol:e})",
                    radicand.to_f64(),
                    simple.to_f64()
                )));
            }
            Some(simple)
        }
        None => None,
    };

    Ok(WorstCaseReport {
        wce: clamped.sqrt(),
        radicand,
        double_embedding: llk,
        embeddings: z,
        quadratic_form: quad,
        linear_term: lin,
        simplified_radicand: simplified,
    })
}

/// Optimal weights and their worst-case error, with both algebraic forms of
/// the error cross-checked.
pub fn optimal_rule_with_error<S: Scalar>(
    k: &KernelSpec,
    functional: &FunctionalSpec,
    points: &PointSet,
    prec: &PrecisionConfig,
) -> Result<(WeightSolution<S>, WorstCaseReport<S>)> {
    let llk = functional.double_embedding_at::<S>(k, prec.precision)?;
    optimal_rule_given_llk(k, functional, points, llk, prec)
}

/// As [`optimal_rule_with_error`] with `LLK` supplied by the caller.
pub(crate) fn optimal_rule_given_llk<S: Scalar>(
    k: &KernelSpec,
    functional: &FunctionalSpec,
    points: &PointSet,
    llk: S,
    prec: &PrecisionConfig,
) -> Result<(WeightSolution<S>, WorstCaseReport<S>)> {
    let (sol, gram, z) = optimal_system::<S>(k, functional, points, prec)?;
    let rep = report(&gram, z, llk, sol.weights(), Some(sol.residual), prec)?;
    Ok((sol, rep))
}

fn basis_for(points: &PointSet, degree: u32) -> Result<MultiIndexSet> {
    let basis = enumerate_multi_indices(points.dimension(), degree);
    let n = polynomial_space_dim(points.dimension(), degree);
    if points.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} points given but dim Pi_{degree} = {n} in dimension {}",
            points.len(),
            points.dimension()
        )));
    }
    Ok(basis)
}

fn vandermonde<S: Scalar>(points: &PointSet, basis: &MultiIndexSet, prec: &PrecisionConfig) -> Result<Matrix<S>> {
    let p = prec.precision;
    let lifted: Vec<Vec<S>> = points
        .iter()
        .map(|x| x.iter().map(|&c| S::from_f64(c, p)).collect())
        .collect();
    let mut entries = Vec::with_capacity(points.len() * basis.len());
    for x in &lifted {
        for alpha in basis {
            entries.push(alpha.eval(x)?);
        }
    }
    Matrix::from_vec(points.len(), basis.len(), entries)
}

fn transposed_solve<S: Scalar>(
    matrix: &Matrix<S>,
    rhs: &[S],
    degree: u32,
    points: &PointSet,
    prec: &PrecisionConfig,
) -> Result<WeightSolution<S>> {
    let solve = solve_general(&matrix.transpose(), rhs, prec).map_err(|e| match e {
        Error::Singular { .. } => Error::NotUnisolvent { degree: degree as usize },
        other => other,
    })?;
    WeightSolution::from_solve(points, solve, prec)
}

/// Weights of the polynomial cubature rule exact on `Pi_m`.
pub fn polynomial_weights<S: Scalar>(
    functional: &FunctionalSpec,
    points: &PointSet,
    degree: u32,
    prec: &PrecisionConfig,
) -> Result<WeightSolution<S>> {
    check_scalar::<S>(prec)?;
    check_dims(None, functional, points)?;
    let basis = basis_for(points, degree)?;
    let p = vandermonde::<S>(points, &basis, prec)?;
    let moments = basis
        .iter()
        .map(|a| functional.moment_at::<S>(a, prec.precision))
        .collect::<Result<Vec<_>>>()?;
    transposed_solve(&p, &moments, degree, points, prec)
}

/// Weights exact on the damped monomials `phi_alpha`, `|alpha| <= m`.
pub fn phi_weights<S: Scalar>(
    functional: &FunctionalSpec,
    length_scale: f64,
    points: &PointSet,
    degree: u32,
    prec: &PrecisionConfig,
) -> Result<WeightSolution<S>> {
    check_scalar::<S>(prec)?;
    check_dims(None, functional, points)?;
    let basis = basis_for(points, degree)?;
    let p = prec.precision;
    let mut entries = Vec::with_capacity(points.len() * basis.len());
    for x in points.iter() {
        for alpha in &basis {
            entries.push(phi_basis_eval_at::<S>(length_scale, alpha, x, p)?);
        }
    }
    let matrix = Matrix::from_vec(points.len(), basis.len(), entries)?;
    let moments = basis
        .iter()
        .map(|a| functional.damped_moment_at::<S>(length_scale, a, p))
        .collect::<Result<Vec<_>>>()?;
    transposed_solve(&matrix, &moments, degree, points, prec)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Unisolvency {
    Unisolvent { condition: f64 },
    NotUnisolvent,
    /// Factorisation succeeds but `kappa >= 1/(100 u)`.
    IllConditioned { condition: f64 },
}

/// Classifies `X` through the condition of its Vandermonde matrix.
pub fn unisolvency_check<S: Scalar>(points: &PointSet, degree: u32, prec: &PrecisionConfig) -> Result<Unisolvency> {
    check_scalar::<S>(prec)?;
    let basis = basis_for(points, degree)?;
    let p = vandermonde::<S>(points, &basis, prec)?;
    let kappa = condition_estimate(&p, prec)?;
    let threshold = 1.0 / (100.0 * prec.unit_roundoff());
    Ok(if !kappa.is_finite() {
        Unisolvency::NotUnisolvent
    } else if kappa >= threshold {
        Unisolvency::IllConditioned { condition: kappa }
    } else {
        Unisolvency::Unisolvent { condition: kappa }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{BigReal, Precision};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn simpson() -> PointSet {
        PointSet::from_nodes(&[-1.0, 0.0, 1.0]).unwrap()
    }

    fn ext(bits: u32) -> PrecisionConfig {
        PrecisionConfig::extended(bits).unwrap()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn point_evaluation_at_a_node_gives_delta_weights() {
        let x = PointSet::from_nodes(&[-1.0, -0.3, 0.4, 1.0]).unwrap();
        let prec = ext(128);
        for (j, xj) in x.nodes().into_iter().enumerate() {
            let f = FunctionalSpec::point_eval(vec![xj]).unwrap();
            let k = KernelSpec::gaussian(1.0).unwrap();
            let (sol, rep) = optimal_rule_with_error::<BigReal>(&k, &f, &x, &prec).unwrap();
            for (i, w) in sol.rule.weights_f64().iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((w - expect).abs() < 1e-12);
            }
            assert!(rep.wce_f64() < 1e-10);
        }
    }

    #[test]
    fn single_point_gaussian_measure() {
        let k = KernelSpec::gaussian(1.0).unwrap();
        let g = FunctionalSpec::gaussian_measure(1).unwrap();
        let x = PointSet::from_nodes(&[0.0]).unwrap();
        let prec = PrecisionConfig::machine();
        let (sol, rep) = optimal_rule_with_error::<f64>(&k, &g, &x, &prec).unwrap();
        assert!((sol.weights()[0] - 0.5f64.sqrt()).abs() < 1e-15);
        let expect = ((1.0f64 / 3.0).sqrt() - 0.5).sqrt();
        assert!((rep.wce - expect).abs() < 1e-12);
        assert!((rep.wce - 0.27812).abs() < 1e-5);
    }

    #[test]
    fn zero_weights_give_root_double_embedding() {
        let k = KernelSpec::gaussian(0.8).unwrap();
        for f in [FunctionalSpec::interval(-1.0, 1.0).unwrap(), FunctionalSpec::gaussian_measure(1).unwrap()] {
            let rule = CubatureRule::new(simpson(), vec![0.0; 3]).unwrap();
            let rep = worst_case_error(&k, &f, &rule, &PrecisionConfig::machine()).unwrap();
            assert!((rep.wce - f.double_embedding(&k).unwrap().sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn simpson_flat_limit() {
        let leb = FunctionalSpec::interval(-1.0, 1.0).unwrap();
        let prec = ext(512);
        let k = KernelSpec::gaussian(1000.0).unwrap();
        let w = optimal_weights::<BigReal>(&k, &leb, &simpson(), &prec).unwrap();
        assert!(max_diff(&w.rule.weights_f64(), &[1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]) < 1e-4);
    }

    #[test]
    fn polynomial_weight_examples() {
        let prec = PrecisionConfig::machine();
        let leb = FunctionalSpec::interval(-1.0, 1.0).unwrap();
        let w = polynomial_weights::<f64>(&leb, &simpson(), 2, &prec).unwrap();
        assert!(max_diff(w.weights(), &[1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]) < 1e-15);
        let g = FunctionalSpec::gaussian_measure(1).unwrap();
        let w = polynomial_weights::<f64>(&g, &simpson(), 2, &prec).unwrap();
        assert!(max_diff(w.weights(), &[0.5, 0.0, 0.5]) < 1e-15);
        // Lagrange polynomials of {-1, 0, 1} at 0.5: (-1/8, 3/4, 3/8)
        let p = FunctionalSpec::point_eval(vec![0.5]).unwrap();
        let w = polynomial_weights::<f64>(&p, &simpson(), 2, &prec).unwrap();
        assert!(max_diff(w.weights(), &[-0.125, 0.75, 0.375]) < 1e-15);
        let p = FunctionalSpec::point_eval(vec![0.0]).unwrap();
        let w = polynomial_weights::<f64>(&p, &simpson(), 2, &prec).unwrap();
        assert!(max_diff(w.weights(), &[0.0, 1.0, 0.0]) < 1e-15);
    }

    #[test]
    fn size_mismatch_and_singular_vandermonde() {
        let prec = PrecisionConfig::machine();
        let leb = FunctionalSpec::interval(-1.0, 1.0).unwrap();
        assert!(matches!(
            polynomial_weights::<f64>(&leb, &simpson(), 1, &prec),
            Err(Error::InvalidArgument(_))
        ));
        let line = PointSet::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let sq = FunctionalSpec::lebesgue_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            polynomial_weights::<f64>(&sq, &line, 1, &prec),
            Err(Error::NotUnisolvent { degree: 1 })
        ));
    }

    #[test]
    fn phi_weight_examples() {
        let leb = FunctionalSpec::interval(-1.0, 1.0).unwrap();
        let w = phi_weights::<f64>(&leb, 1e6, &simpson(), 2, &PrecisionConfig::machine()).unwrap();
        assert!(max_diff(w.weights(), &[1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]) < 1e-6);
        for &l in &[0.5, 3.0, 40.0] {
            let p = FunctionalSpec::point_eval(vec![-1.0]).unwrap();
            let w = phi_weights::<f64>(&p, l, &simpson(), 2, &PrecisionConfig::machine()).unwrap();
            assert!(max_diff(w.weights(), &[1.0, 0.0, 0.0]) < 1e-12, "l={l}");
        }
    }

    // Independent dense solve of the 3x3 phi system from quadrature moments.
    #[test]
    fn phi_weights_match_brute_force() {
        let g = FunctionalSpec::gaussian_measure(1).unwrap();
        let w = phi_weights::<f64>(&g, 1.0, &simpson(), 2, &PrecisionConfig::machine()).unwrap();
        let nodes = [-1.0f64, 0.0, 1.0];
        let mut a = [[0.0f64; 3]; 3];
        let mut b = [0.0f64; 3];
        for n in 0..3 {
            for (j, &x) in nodes.iter().enumerate() {
                a[n][j] = (-x * x / 2.0).exp() * x.powi(n as i32);
            }
            b[n] = g
                .integrate_at(|t: &[f64]| Ok((-t[0] * t[0] / 2.0).exp() * t[0].powi(n as i32)), Precision::Machine)
                .unwrap();
        }
        // Cramer's rule
        let det = |m: &[[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let d = det(&a);
        for j in 0..3 {
            let mut aj = a;
            for n in 0..3 {
                aj[n][j] = b[n];
            }
            assert!((det(&aj) / d - w.weights()[j]).abs() < 1e-12, "j={j}");
        }
    }

    #[test]
    fn unisolvency_examples() {
        let prec = PrecisionConfig::machine();
        assert!(matches!(unisolvency_check::<f64>(&simpson(), 2, &prec).unwrap(), Unisolvency::Unisolvent { .. }));
        let line = PointSet::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(unisolvency_check::<f64>(&line, 1, &prec).unwrap(), Unisolvency::NotUnisolvent);
        let thin = PointSet::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1e-14]]).unwrap();
        assert!(matches!(unisolvency_check::<f64>(&thin, 1, &prec).unwrap(), Unisolvency::IllConditioned { .. }));
        assert!(unisolvency_check::<f64>(&thin, 2, &prec).is_err());
        // more bits resolve the thin triangle
        assert!(matches!(
            unisolvency_check::<BigReal>(&thin, 1, &ext(128)).unwrap(),
            Unisolvency::Unisolvent { .. }
        ));
    }

    #[test]
    fn optimal_weights_minimise_the_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = PointSet::from_nodes(&[-0.9, -0.2, 0.5, 1.0]).unwrap();
        let prec = ext(128);
        for f in [FunctionalSpec::interval(-1.0, 1.0).unwrap(), FunctionalSpec::gaussian_measure(1).unwrap()] {
            for &l in &[0.5, 2.0] {
                let k = KernelSpec::gaussian(l).unwrap();
                let (sol, rep) = optimal_rule_with_error::<BigReal>(&k, &f, &x, &prec).unwrap();
                let best = rep.wce_f64();
                let slack = sol.condition_estimate * prec.unit_roundoff() * 10.0;
                for _ in 0..25 {
                    let w: Vec<BigReal> = sol
                        .weights()
                        .iter()
                        .map(|w| w.clone() + BigReal::from_f64(rng.gen_range(-0.1..0.1), prec.precision))
                        .collect();
                    let rule = CubatureRule::new(x.clone(), w).unwrap();
                    let e = worst_case_error(&k, &f, &rule, &prec).unwrap().wce_f64();
                    assert!(e >= best - slack);
                }
            }
        }
    }

    #[test]
    fn lower_bound_and_sandwich_inequalities() {
        let leb = FunctionalSpec::interval(-1.0, 1.0).unwrap();
        let x = PointSet::from_nodes(&[-1.0, 0.2, 1.0]).unwrap();
        let basis = enumerate_multi_indices(1, 2);
        let mut phi_errors = Vec::new();
        let ells = [10.0, 20.0, 40.0, 100.0];
        for &l in &ells {
            let prec = PrecisionConfig::auto(3, l);
            let k = KernelSpec::gaussian(l).unwrap();
            let (sol, rep) = optimal_rule_with_error::<BigReal>(&k, &leb, &x, &prec).unwrap();
            let wce = rep.wce_f64();
            for alpha in &basis {
                let lhs: BigReal = leb.damped_moment_at::<BigReal>(l, alpha, prec.precision).unwrap()
                    - sol.rule.apply(|p| phi_basis_eval_at::<BigReal>(l, alpha, p, prec.precision).unwrap());
                let bound = l.powi(alpha.degree() as i32) * alpha.factorial_f64().sqrt() * wce;
                assert!(lhs.abs().to_f64() <= bound * (1.0 + 1e-9), "l={l} alpha={alpha}");
            }
            let wphi = phi_weights::<BigReal>(&leb, l, &x, 2, &prec).unwrap();
            let e_phi = worst_case_error(&k, &leb, &wphi.rule, &prec).unwrap().wce_f64();
            assert!(wce <= e_phi * (1.0 + 1e-12));
            phi_errors.push(e_phi);
        }
        let slope = (phi_errors[3] / phi_errors[0]).ln() / (ells[3] / ells[0]).ln();
        assert!(slope <= -3.0 + 0.2, "slope {slope}");
    }

    #[test]
    fn phi_weights_stay_bounded() {
        let leb = FunctionalSpec::interval(-1.0, 1.0).unwrap();
        let mut sums = Vec::new();
        for e in 0..=12 {
            let l = 10f64.powf(e as f64 / 2.0);
            let w = phi_weights::<f64>(&leb, l, &simpson(), 2, &PrecisionConfig::machine()).unwrap();
            sums.push(w.weights().iter().map(|v| v.abs()).sum::<f64>());
        }
        assert!(sums.iter().all(|s| *s < 3.0), "{sums:?}");
    }

    #[test]
    fn scalar_must_match_precision() {
        let leb = FunctionalSpec::interval(-1.0, 1.0).unwrap();
        let k = KernelSpec::gaussian(1.0).unwrap();
        assert!(matches!(
            optimal_weights::<f64>(&k, &leb, &simpson(), &ext(128)),
            Err(Error::PrecisionMismatch(_))
        ));
    }
}
