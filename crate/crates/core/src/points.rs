//! Point sets and cubature rules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `N` pairwise distinct points in `R^d`. One-dimensional sets are kept in
/// ascending order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    dimension: usize,
    points: Vec<Vec<f64>>,
}

impl PointSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dimension = match points.first() {
            Some(p) => p.len(),
            None => return Err(Error::InvalidArgument("point set is empty".into())),
        };
        if dimension == 0 {
            return Err(Error::InvalidArgument("points must have at least one coordinate".into()));
        }
        for p in &points {
            if p.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: p.len(),
                });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidArgument(format!("non-finite coordinate in {p:?}")));
            }
        }
        let mut points = points;
        if dimension == 1 {
            points.sort_by(|a, b| a[0].total_cmp(&b[0]));
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i] == points[j] {
                    return Err(Error::DuplicatePoints { first: i, second: j });
                }
            }
        }
        Ok(PointSet { dimension, points })
    }

    /// One-dimensional point set from scalar nodes.
    pub fn from_nodes(nodes: &[f64]) -> Result<Self> {
        Self::new(nodes.iter().map(|&x| vec![x]).collect())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    /// First coordinates; the nodes of a one-dimensional set.
    pub fn nodes(&self) -> Vec<f64> {
        self.points.iter().map(|p| p[0]).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.iter().map(Vec::as_slice)
    }

    /// Smallest Euclidean distance between two points (infinite for one point).
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                let d: f64 = self.points[i]
                    .iter()
                    .zip(&self.points[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                best = best.min(d);
            }
        }
        best
    }
}

/// Points and weights, `Q[f] = sum_n w_n f(x_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CubatureRule<S = f64> {
    points: PointSet,
    weights: Vec<S>,
}

impl<S: Scalar> CubatureRule<S> {
    pub fn new(points: PointSet, weights: Vec<S>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: weights.len(),
            });
        }
        Ok(CubatureRule { points, weights })
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `sum_n w_n f(x_n)`, summed in point order.
    pub fn apply<F>(&self, mut f: F) -> S
    where
        F: FnMut(&[f64]) -> S,
    {
        let mut terms = self
            .points
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w.clone() * f(x));
        let first = terms.next().expect("cubature rules are non-empty");
        terms.fold(first, |acc, t| acc + t)
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights.iter().map(Scalar::to_f64).collect()
    }

    /// The same rule with weights rounded to f64.
    pub fn to_f64(&self) -> CubatureRule<f64> {
        CubatureRule {
            points: self.points.clone(),
            weights: self.weights_f64(),
        }
    }
}
