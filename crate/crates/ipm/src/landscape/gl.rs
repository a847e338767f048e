//! 1-d Ginzburg-Landau free energy on the unit periodic grid:
//!
//!   F(φ) = ∫₀¹ (κ²/2)|∇φ|² + (φ²-1)²/4 dx
//!
//! discretized with spectral differentiation and the rectangle rule
//! h·Σ on N uniform points. Under the H⁻¹ metric the gradient flow is
//! the conserved (Cahn-Hilliard type) dynamics; under L² it is the
//! non-conserved (Allen-Cahn type) dynamics.
//!
//! The inner steppers use a Lipschitz truncation of the double well
//! outside |φ| ≤ `trunc`: the cubic is continued linearly with slope
//! 3·trunc²-1. Truncation is a stability device for transients only;
//! every reported quantity (energy, gradient, Hessian, eigenvalues) uses
//! the exact double well, and states on convergent runs stay well inside
//! the truncation radius.

use super::PotentialModel;
use crate::error::{IpmError, Result};
use crate::fourier::SpectralGrid;
use crate::metric::MetricKind;

#[derive(Debug, Clone)]
pub struct GinzburgLandau1D {
    kappa: f64,
    n: usize,
    mass: f64,
    metric: MetricKind,
    grid: SpectralGrid,
    trunc: f64,
    stabilization: f64,
}

impl GinzburgLandau1D {
    /// Interface parameter `kappa`, grid size `n`, target mass ∫φ dx, and
    /// the metric of the gradient flow (unit domain).
    pub fn new(kappa: f64, n: usize, mass: f64, metric: MetricKind) -> Result<Self> {
        if kappa <= 0.0 {
            return Err(IpmError::InvalidParameter {
                name: "kappa",
                message: format!("must be positive, got {kappa}"),
            });
        }
        if n < 4 {
            return Err(IpmError::InvalidParameter {
                name: "n_grid",
                message: format!("need at least 4 grid points, got {n}"),
            });
        }
        let h = 1.0 / n as f64;
        if (metric.h() - h).abs() > 1e-12 {
            return Err(IpmError::MetricIncompatible {
                metric: format!("{metric:?}"),
                message: format!("metric spacing {} does not match grid h = {h}", metric.h()),
            });
        }
        let grid = SpectralGrid::new(n, h);
        Ok(Self { kappa, n, mass, metric, grid, trunc: 1.5, stabilization: 3.0 })
    }

    /// Cahn-Hilliard setup of the experiments: κ = 0.04, H⁻¹ metric.
    pub fn cahn_hilliard(n: usize, mass: f64) -> Result<Self> {
        Self::new(0.04, n, mass, MetricKind::hminus1_unit_grid(n))
    }

    /// Allen-Cahn setup of the experiments: κ = 0.1, L² metric.
    pub fn allen_cahn(n: usize, mass: f64) -> Result<Self> {
        Self::new(0.1, n, mass, MetricKind::l2_unit_grid(n))
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn n_grid(&self) -> usize {
        self.n
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Truncation radius of the stabilized double well.
    pub fn trunc(&self) -> f64 {
        self.trunc
    }

    /// Linear stabilization constant of the semi-implicit stepper.
    pub fn stabilization(&self) -> f64 {
        self.stabilization
    }

    /// φ³ - φ truncated to linear growth outside |φ| ≤ trunc (C¹ match).
    fn fprime_trunc(&self, p: f64) -> f64 {
        let t = self.trunc;
        let c = p.clamp(-t, t);
        c * c * c - c + (3.0 * t * t - 1.0) * (p - c)
    }

    fn fsecond_trunc(&self, p: f64) -> f64 {
        let c = p.clamp(-self.trunc, self.trunc);
        3.0 * c * c - 1.0
    }

    /// Grid samples of `mean + amp·sin(2πk x)`; the grid mean equals
    /// `mean` exactly for 0 < k < n.
    pub fn sin_state(&self, amp: f64, k: usize, mean: f64) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let x = i as f64 / self.n as f64;
                mean + amp * (2.0 * std::f64::consts::PI * k as f64 * x).sin()
            })
            .collect()
    }
}

impl PotentialModel for GinzburgLandau1D {
    fn dim(&self) -> usize {
        self.n
    }

    fn metric(&self) -> MetricKind {
        self.metric
    }

    fn energy(&self, p: &[f64]) -> f64 {
        let mut dp = vec![0.0; self.n];
        self.grid.derivative(p, &mut dp);
        let h = self.h();
        let k2 = self.kappa * self.kappa;
        p.iter()
            .zip(&dp)
            .map(|(phi, d)| {
                let w = phi * phi - 1.0;
                0.5 * k2 * d * d + 0.25 * w * w
            })
            .sum::<f64>()
            * h
    }

    fn gradient_into(&self, p: &[f64], out: &mut [f64]) {
        self.grid.laplacian(p, out);
        let k2 = self.kappa * self.kappa;
        for (o, phi) in out.iter_mut().zip(p) {
            *o = -k2 * *o + (phi * phi * phi - phi);
        }
    }

    fn hessian_vp_into(&self, p: &[f64], v: &[f64], out: &mut [f64]) {
        self.grid.laplacian(v, out);
        let k2 = self.kappa * self.kappa;
        for ((o, phi), vi) in out.iter_mut().zip(p).zip(v) {
            *o = -k2 * *o + (3.0 * phi * phi - 1.0) * vi;
        }
    }

    fn stiff_coefficient(&self) -> f64 {
        self.kappa * self.kappa
    }

    fn stabilization_constant(&self) -> f64 {
        self.stabilization
    }

    fn smooth_gradient_into(&self, p: &[f64], out: &mut [f64]) {
        for (o, phi) in out.iter_mut().zip(p) {
            *o = self.fprime_trunc(*phi);
        }
    }

    fn stabilized_gradient_into(&self, p: &[f64], out: &mut [f64]) {
        self.grid.laplacian(p, out);
        let k2 = self.kappa * self.kappa;
        for (o, phi) in out.iter_mut().zip(p) {
            *o = -k2 * *o + self.fprime_trunc(*phi);
        }
    }

    fn stabilized_hessian_vp_into(&self, p: &[f64], v: &[f64], out: &mut [f64]) {
        self.grid.laplacian(v, out);
        let k2 = self.kappa * self.kappa;
        for ((o, phi), vi) in out.iter_mut().zip(p).zip(v) {
            *o = -k2 * *o + self.fsecond_trunc(*phi) * vi;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn energy_zero_at_uniform_one() {
        let gl = GinzburgLandau1D::cahn_hilliard(100, 0.6).unwrap();
        let phi = vec![1.0; 100];
        assert!(gl.energy(&phi).abs() < 1e-14);
    }

    #[test]
    fn gradient_zero_at_uniform_one() {
        let gl = GinzburgLandau1D::allen_cahn(100, 0.6).unwrap();
        let phi = vec![1.0; 100];
        let mut g = vec![0.0; 100];
        gl.gradient_into(&phi, &mut g);
        assert!(g.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let n = 32;
        let gl = GinzburgLandau1D::new(0.1, n, 0.6, MetricKind::l2_unit_grid(n)).unwrap();
        let phi = gl.sin_state(0.4, 1, 0.3);
        let mut g = vec![0.0; n];
        gl.gradient_into(&phi, &mut g);
        let h = 1.0 / n as f64;
        let eps = 1e-6;
        for i in (0..n).step_by(5) {
            let mut pp = phi.clone();
            let mut pm = phi.clone();
            pp[i] += eps;
            pm[i] -= eps;
            // d/dφ_i of the discrete energy is h times the L² field value.
            let fd = (gl.energy(&pp) - gl.energy(&pm)) / (2.0 * eps);
            assert_relative_eq!(h * g[i], fd, epsilon = 1e-8, max_relative = 1e-5);
        }
    }

    #[test]
    fn hessian_vp_fourier_symbol() {
        // At φ ≡ 0 the linearization is -κ²Δ - 1, so a Fourier mode is an
        // eigenvector with eigenvalue κ²ξ_k² - 1.
        let n = 100;
        let kappa = 0.1;
        let gl = GinzburgLandau1D::new(kappa, n, 0.0, MetricKind::l2_unit_grid(n)).unwrap();
        let phi = vec![0.0; n];
        for k in [1usize, 3, 7] {
            let v: Vec<f64> = (0..n)
                .map(|i| (2.0 * std::f64::consts::PI * k as f64 * i as f64 / n as f64).cos())
                .collect();
            let mut hv = vec![0.0; n];
            gl.hessian_vp_into(&phi, &v, &mut hv);
            let xi2 = (2.0 * std::f64::consts::PI * k as f64).powi(2);
            let lam = kappa * kappa * xi2 - 1.0;
            for (hvi, vi) in hv.iter().zip(&v) {
                assert_relative_eq!(*hvi, lam * vi, epsilon = 1e-8, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn truncation_is_c1_and_matches_inside() {
        let gl = GinzburgLandau1D::cahn_hilliard(16, 0.0).unwrap();
        for p in [-1.2, -0.5, 0.0, 0.9, 1.4999] {
            assert_relative_eq!(gl.fprime_trunc(p), p * p * p - p, epsilon = 1e-12);
        }
        let t = gl.trunc();
        let eps = 1e-7;
        let slope = (gl.fprime_trunc(t + eps) - gl.fprime_trunc(t - eps)) / (2.0 * eps);
        assert_relative_eq!(slope, 3.0 * t * t - 1.0, epsilon = 1e-5);
    }

    #[test]
    fn rejects_mismatched_metric_spacing() {
        assert!(GinzburgLandau1D::new(0.1, 100, 0.6, MetricKind::l2_unit_grid(50)).is_err());
        assert!(GinzburgLandau1D::new(-0.1, 100, 0.6, MetricKind::l2_unit_grid(100)).is_err());
    }
}
