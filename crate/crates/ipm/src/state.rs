//! Configuration-space vectors.

use crate::error::{IpmError, Result};
use serde::{Deserialize, Serialize};

/// A point in configuration space: plain coordinates for ODE problems,
/// grid samples of a field for the PDE problems.
///
/// Construction rejects empty and non-finite data; everything downstream
/// may assume entries are finite real numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    values: Vec<f64>,
}

impl StateVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(IpmError::InvalidParameter {
                name: "values",
                message: "state vector must have dimension >= 1".into(),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(IpmError::NonFinite {
                context: "StateVector::new".into(),
            });
        }
        Ok(Self { values })
    }

    /// Construct without the finiteness check. Used by the solver for
    /// transient iterates that may legitimately blow up before the
    /// divergence guard fires.
    pub(crate) fn new_unchecked(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

impl std::ops::Index<usize> for StateVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Euclidean dot product of raw coordinate slices.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += c * x`
pub(crate) fn axpy(c: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(IpmError::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(StateVector::new(vec![]).is_err());
        assert!(StateVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(StateVector::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(StateVector::new(vec![1.0, -2.0]).is_ok());
    }

    #[test]
    fn dim_matches_length() {
        let x = StateVector::new(vec![0.5, 0.8]).unwrap();
        assert_eq!(x.dim(), 2);
        assert_eq!(x[1], 0.8);
    }
}
