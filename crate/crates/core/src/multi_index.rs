//! Multi-indices and the monomial basis of `Pi_m`.

use std::fmt;

use dashu_int::UBig;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exponent vector `alpha` of a monomial `x^alpha`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// `|alpha|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `alpha!` as an exact integer.
    pub fn factorial(&self) -> UBig {
        self.0.iter().fold(UBig::ONE, |acc, &a| acc * factorial(a))
    }

    /// `alpha!` rounded to f64.
    pub fn factorial_f64(&self) -> f64 {
        self.0
            .iter()
            .map(|&a| (1..=a).map(f64::from).product::<f64>())
            .product()
    }

    /// `x^alpha` with the convention `0^0 = 1`.
    pub fn eval<S: Scalar>(&self, x: &[S]) -> Result<S> {
        if x.len() != self.0.len() {
            return Err(Error::DimensionMismatch {
                expected: self.0.len(),
                got: x.len(),
            });
        }
        let prec = match x.first() {
            Some(v) => v.precision(),
            None => return Ok(S::from_i64(1, crate::Precision::Machine)),
        };
        Ok(x
            .iter()
            .zip(&self.0)
            .fold(S::one(prec), |acc, (xi, &a)| acc * xi.powi(a)))
    }

    /// True if any coordinate exponent is odd.
    pub fn has_odd_entry(&self) -> bool {
        self.0.iter().any(|a| a % 2 == 1)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

fn factorial(n: u32) -> UBig {
    (2..=n).fold(UBig::ONE, |acc, k| acc * UBig::from(k))
}

/// The ordered basis `{alpha : |alpha| <= m}` of `Pi_m` in `d` variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiIndexSet {
    dimension: usize,
    max_degree: u32,
    indices: Vec<MultiIndex>,
}

impl MultiIndexSet {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.indices.iter()
    }
}

impl<'a> IntoIterator for &'a MultiIndexSet {
    type Item = &'a MultiIndex;
    type IntoIter = std::slice::Iter<'a, MultiIndex>;
    fn into_iter(self) -> Self::IntoIter {
        self.indices.iter()
    }
}

/// All multi-indices of exact degree `n` in `d` variables, larger leading
/// exponents first: `(2,0), (1,1), (0,2)`.
pub fn indices_of_degree(d: usize, n: u32) -> Vec<MultiIndex> {
    fn rec(d: usize, n: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if d == 1 {
            prefix.push(n);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in (0..=n).rev() {
            prefix.push(first);
            rec(d - 1, n - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if d == 0 {
        return out;
    }
    rec(d, n, &mut Vec::with_capacity(d), &mut out);
    out
}

/// Graded-lexicographic enumeration of all `alpha` with `|alpha| <= m`.
///
/// Panics if `d == 0`.
pub fn enumerate_multi_indices(d: usize, m: u32) -> MultiIndexSet {
    assert!(d >= 1, "dimension must be at least 1");
    let indices = (0..=m).flat_map(|n| indices_of_degree(d, n)).collect();
    MultiIndexSet {
        dimension: d,
        max_degree: m,
        indices,
    }
}

/// `dim Pi_m = C(m + d, d)`.
pub fn polynomial_space_dim(d: usize, m: u32) -> usize {
    let mut num: u128 = 1;
    for k in 1..=d as u128 {
        num = num * (m as u128 + k) / k;
    }
    num as usize
}

/// `x^alpha` for real vectors.
pub fn monomial_eval(x: &[f64], alpha: &MultiIndex) -> Result<f64> {
    alpha.eval(x)
}
