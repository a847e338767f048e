//! Metric abstraction: L² (with quadrature weight) and H⁻¹ on mean-zero
//! fields of a periodic grid.
//!
//! Gradients everywhere in this crate are stored in their L² field
//! representation (the variational derivative δF/δφ; for the toy problem
//! this is the plain Euclidean gradient, `h = 1`). The metric enters
//! through inner products, through the norm used for the stopping error,
//! and through the flow map of the inner iteration.

use crate::error::{IpmError, Result};
use crate::fourier::SpectralGrid;
use crate::state::{check_dim, dot};
use serde::{Deserialize, Serialize};

/// Largest mean magnitude silently removed (with a warning) before an
/// H⁻¹ inner product; larger means are a hard error.
pub const HM1_MEAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MetricKind {
    /// ⟨u,v⟩ = h·Σ uᵢvᵢ. With `h = 1` this is the Euclidean inner product.
    L2 { h: f64 },
    /// ⟨u,v⟩ = h·Σ ((-Δ)⁻¹u)ᵢ vᵢ on mean-zero fields of a periodic grid of
    /// spacing `h` and total length `length`.
    Hminus1 { h: f64, length: f64 },
}

impl MetricKind {
    /// Euclidean metric for ODE problems.
    pub fn euclidean() -> Self {
        MetricKind::L2 { h: 1.0 }
    }

    /// L² on the unit periodic grid with `n` points.
    pub fn l2_unit_grid(n: usize) -> Self {
        MetricKind::L2 { h: 1.0 / n as f64 }
    }

    /// H⁻¹ on the unit periodic grid with `n` points.
    pub fn hminus1_unit_grid(n: usize) -> Self {
        MetricKind::Hminus1 { h: 1.0 / n as f64, length: 1.0 }
    }

    pub fn h(&self) -> f64 {
        match self {
            MetricKind::L2 { h } | MetricKind::Hminus1 { h, .. } => *h,
        }
    }

    pub fn is_hminus1(&self) -> bool {
        matches!(self, MetricKind::Hminus1 { .. })
    }

    pub(crate) fn grid_for(&self, n: usize) -> Result<SpectralGrid> {
        match self {
            MetricKind::L2 { h } => Ok(SpectralGrid::new(n, *h)),
            MetricKind::Hminus1 { h, length } => {
                let expect = n as f64 * h;
                if (expect - length).abs() > 1e-9 * length.max(1.0) {
                    return Err(IpmError::MetricIncompatible {
                        metric: format!("{self:?}"),
                        message: format!("n*h = {expect} does not match domain length {length}"),
                    });
                }
                Ok(SpectralGrid::new(n, *h))
            }
        }
    }
}

/// Inner product in the given metric. For H⁻¹ both arguments must be
/// mean-zero; a mean below [`HM1_MEAN_TOL`] is removed with a warning,
/// anything larger is an error.
pub fn metric_inner(metric: &MetricKind, u: &[f64], v: &[f64]) -> Result<f64> {
    check_dim(u.len(), v.len())?;
    match metric {
        MetricKind::L2 { h } => Ok(h * dot(u, v)),
        MetricKind::Hminus1 { h, .. } => {
            let n = u.len() as f64;
            let mu = u.iter().sum::<f64>() / n;
            let mv = v.iter().sum::<f64>() / n;
            for m in [mu, mv] {
                if m.abs() > HM1_MEAN_TOL {
                    return Err(IpmError::NonZeroMean { mean: m });
                }
                if m != 0.0 {
                    log::warn!("removing residual mean {m:.3e} before H^-1 inner product");
                }
            }
            let grid = metric.grid_for(u.len())?;
            let mut gu = vec![0.0; u.len()];
            // (-Δ)⁻¹ annihilates the k=0 mode, which also removes the
            // residual means.
            grid.inv_neg_laplacian(u, &mut gu);
            Ok(h * dot(&gu, v))
        }
    }
}

/// Metric norm ‖u‖ = √⟨u,u⟩.
pub fn metric_norm(metric: &MetricKind, u: &[f64]) -> Result<f64> {
    Ok(metric_inner(metric, u, u)?.max(0.0).sqrt())
}

/// Norm of an energy gradient `g` (stored in L² representation) in the
/// convention used for the stopping error of the outer iteration:
/// the L² norm of the flow representation. For L² flows that is ‖g‖_{L²};
/// for H⁻¹ flows it is ‖Δg‖_{L²}, matching the error measure reported for
/// the conserved-order-parameter experiments.
pub fn flow_grad_norm(metric: &MetricKind, g: &[f64]) -> Result<f64> {
    match metric {
        MetricKind::L2 { h } => Ok((h * dot(g, g)).max(0.0).sqrt()),
        MetricKind::Hminus1 { h, .. } => {
            let grid = metric.grid_for(g.len())?;
            let mut lg = vec![0.0; g.len()];
            grid.laplacian(g, &mut lg);
            Ok((h * dot(&lg, &lg)).max(0.0).sqrt())
        }
    }
}

/// The L² representation of the functional `u ↦ ⟨v, u⟩_m`: `v` itself for
/// L², `(-Δ)⁻¹ v` for H⁻¹. Coefficients of metric projections are plain
/// L² inner products against this dual field.
pub fn dual_field(metric: &MetricKind, v: &[f64]) -> Result<Vec<f64>> {
    match metric {
        MetricKind::L2 { .. } => Ok(v.to_vec()),
        MetricKind::Hminus1 { .. } => {
            let grid = metric.grid_for(v.len())?;
            let mut gv = vec![0.0; v.len()];
            grid.inv_neg_laplacian(v, &mut gv);
            Ok(gv)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sin_grid(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 / n as f64).sin())
            .collect()
    }

    #[test]
    fn l2_inner_of_sine_is_half() {
        // h·Σ sin² over a full period ≈ ∫ sin² = 1/2.
        let n = 100;
        let m = MetricKind::l2_unit_grid(n);
        let u = sin_grid(n);
        let v = metric_inner(&m, &u, &u).unwrap();
        assert_relative_eq!(v, 0.5, epsilon = 1e-3);
    }

    #[test]
    fn hminus1_inner_of_sine() {
        // (-Δ)⁻¹ sin(2πx) = sin(2πx)/(2π)², so the inner product is 0.5/(2π)².
        let n = 100;
        let m = MetricKind::hminus1_unit_grid(n);
        let u = sin_grid(n);
        let v = metric_inner(&m, &u, &u).unwrap();
        let expect = 0.5 / (2.0 * std::f64::consts::PI).powi(2);
        assert_relative_eq!(v, expect, epsilon = 1e-3);
    }

    #[test]
    fn hminus1_rejects_non_mean_zero() {
        let n = 50;
        let m = MetricKind::hminus1_unit_grid(n);
        let u = vec![0.6; n];
        let v = sin_grid(n);
        assert!(matches!(
            metric_inner(&m, &u, &v),
            Err(IpmError::NonZeroMean { .. })
        ));
    }

    #[test]
    fn inner_is_symmetric() {
        let n = 64;
        for m in [MetricKind::l2_unit_grid(n), MetricKind::hminus1_unit_grid(n)] {
            let u: Vec<f64> = (0..n).map(|i| ((i * 7 % 13) as f64 - 6.0) / 6.0).collect();
            let u: Vec<f64> = {
                let mean = u.iter().sum::<f64>() / n as f64;
                u.iter().map(|x| x - mean).collect()
            };
            let v = sin_grid(n);
            let a = metric_inner(&m, &u, &v).unwrap();
            let b = metric_inner(&m, &v, &u).unwrap();
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }
}
