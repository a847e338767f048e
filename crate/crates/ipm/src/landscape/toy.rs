//! The 2-d toy potential with three index-1 saddles.
//!
//! V(x,y) = 3e^{-x²}(e^{-(y-1/3)²} - e^{-(y-5/3)²})
//!          - 5e^{-y²}(e^{-(x-1)²} + e^{-(x+1)²})
//!          + x⁴/5 + (y-1/3)⁴/5
//!
//! The energy is even in x; its three saddles sit at (±0.61727, 1.10273)
//! and (0, -0.31582), with local minima near (±1, 0) and (0, 1.5).

use super::PotentialModel;
use crate::metric::MetricKind;

#[derive(Debug, Clone, Copy, Default)]
pub struct ToyPotential2D;

/// The three saddle coordinates, refined to full precision from the
/// published 5-decimal values.
pub const TOY_SADDLES: [[f64; 2]; 3] = [
    [0.61727231, 1.10273452],
    [-0.61727231, 1.10273452],
    [0.0, -0.31582655],
];

impl ToyPotential2D {
    /// Analytic 2x2 Hessian.
    pub fn hessian(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        let (a, ap, app) = gauss(x);
        let e1 = (-(y - 1.0 / 3.0) * (y - 1.0 / 3.0)).exp();
        let e2 = (-(y - 5.0 / 3.0) * (y - 5.0 / 3.0)).exp();
        let b = e1 - e2;
        let bp = -2.0 * (y - 1.0 / 3.0) * e1 + 2.0 * (y - 5.0 / 3.0) * e2;
        let bpp = (4.0 * (y - 1.0 / 3.0).powi(2) - 2.0) * e1
            - (4.0 * (y - 5.0 / 3.0).powi(2) - 2.0) * e2;
        let (c, cp, cpp) = gauss(y);
        let f1 = (-(x - 1.0) * (x - 1.0)).exp();
        let f2 = (-(x + 1.0) * (x + 1.0)).exp();
        let d = f1 + f2;
        let dp = -2.0 * (x - 1.0) * f1 - 2.0 * (x + 1.0) * f2;
        let dpp =
            (4.0 * (x - 1.0).powi(2) - 2.0) * f1 + (4.0 * (x + 1.0).powi(2) - 2.0) * f2;
        let vxx = 3.0 * app * b - 5.0 * c * dpp + 2.4 * x * x;
        let vyy = 3.0 * a * bpp - 5.0 * cpp * d + 2.4 * (y - 1.0 / 3.0).powi(2);
        let vxy = 3.0 * ap * bp - 5.0 * cp * dp;
        [[vxx, vxy], [vxy, vyy]]
    }
}

/// e^{-t²} with first and second derivatives.
fn gauss(t: f64) -> (f64, f64, f64) {
    let g = (-t * t).exp();
    (g, -2.0 * t * g, (4.0 * t * t - 2.0) * g)
}

impl PotentialModel for ToyPotential2D {
    fn dim(&self) -> usize {
        2
    }

    fn metric(&self) -> MetricKind {
        MetricKind::euclidean()
    }

    fn energy(&self, p: &[f64]) -> f64 {
        let (x, y) = (p[0], p[1]);
        let a = (-x * x).exp();
        let b = (-(y - 1.0 / 3.0) * (y - 1.0 / 3.0)).exp()
            - (-(y - 5.0 / 3.0) * (y - 5.0 / 3.0)).exp();
        let c = (-y * y).exp();
        let d = (-(x - 1.0) * (x - 1.0)).exp() + (-(x + 1.0) * (x + 1.0)).exp();
        3.0 * a * b - 5.0 * c * d + 0.2 * x.powi(4) + 0.2 * (y - 1.0 / 3.0).powi(4)
    }

    fn gradient_into(&self, p: &[f64], out: &mut [f64]) {
        let (x, y) = (p[0], p[1]);
        let (a, ap, _) = gauss(x);
        let e1 = (-(y - 1.0 / 3.0) * (y - 1.0 / 3.0)).exp();
        let e2 = (-(y - 5.0 / 3.0) * (y - 5.0 / 3.0)).exp();
        let b = e1 - e2;
        let bp = -2.0 * (y - 1.0 / 3.0) * e1 + 2.0 * (y - 5.0 / 3.0) * e2;
        let (c, cp, _) = gauss(y);
        let f1 = (-(x - 1.0) * (x - 1.0)).exp();
        let f2 = (-(x + 1.0) * (x + 1.0)).exp();
        let d = f1 + f2;
        let dp = -2.0 * (x - 1.0) * f1 - 2.0 * (x + 1.0) * f2;
        out[0] = 3.0 * ap * b - 5.0 * c * dp + 0.8 * x.powi(3);
        out[1] = 3.0 * a * bp - 5.0 * cp * d + 0.8 * (y - 1.0 / 3.0).powi(3);
    }

    fn hessian_vp_into(&self, p: &[f64], v: &[f64], out: &mut [f64]) {
        let h = self.hessian(p[0], p[1]);
        out[0] = h[0][0] * v[0] + h[0][1] * v[1];
        out[1] = h[1][0] * v[0] + h[1][1] * v[1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::StateVector;
    use approx::assert_relative_eq;

    #[test]
    fn even_in_x() {
        let m = ToyPotential2D;
        for (x, y) in [(0.5, 0.8), (1.3, -0.4), (0.2, 2.1)] {
            assert_eq!(m.energy(&[x, y]), m.energy(&[-x, y]));
        }
    }

    #[test]
    fn value_at_origin_matches_direct_evaluation() {
        // Independently evaluated from the closed form.
        let m = ToyPotential2D;
        assert_relative_eq!(m.energy(&[0.0, 0.0]), -1.1783368975351938, epsilon = 1e-14);
    }

    #[test]
    fn gradient_vanishes_at_published_saddles() {
        let m = ToyPotential2D;
        for s in TOY_SADDLES {
            let mut g = [0.0; 2];
            m.gradient_into(&s, &mut g);
            let norm = (g[0] * g[0] + g[1] * g[1]).sqrt();
            assert!(norm < 1e-6, "|grad| = {norm} at {s:?}");
        }
    }

    #[test]
    fn axis_gradient_has_no_x_component() {
        let m = ToyPotential2D;
        for y in [-0.8, -0.3, 0.0, 0.5, 1.1, 2.0] {
            let mut g = [0.0; 2];
            m.gradient_into(&[0.0, y], &mut g);
            assert_eq!(g[0], 0.0);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = ToyPotential2D;
        let pts = [[0.5, 0.8], [-1.2, 0.3], [0.0, -0.31], [1.4, 1.9]];
        for p in pts {
            let mut g = [0.0; 2];
            m.gradient_into(&p, &mut g);
            for i in 0..2 {
                let h = 1e-6;
                let mut pp = p;
                let mut pm = p;
                pp[i] += h;
                pm[i] -= h;
                let fd = (m.energy(&pp) - m.energy(&pm)) / (2.0 * h);
                assert_relative_eq!(g[i], fd, epsilon = 1e-6, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn hessian_matches_finite_differences_of_gradient() {
        let m = ToyPotential2D;
        let p = [0.7, -0.2];
        let h = m.hessian(p[0], p[1]);
        let step = 1e-5;
        for i in 0..2 {
            let mut pp = p;
            let mut pm = p;
            pp[i] += step;
            pm[i] -= step;
            let mut gp = [0.0; 2];
            let mut gm = [0.0; 2];
            m.gradient_into(&pp, &mut gp);
            m.gradient_into(&pm, &mut gm);
            for j in 0..2 {
                let fd = (gp[j] - gm[j]) / (2.0 * step);
                assert_relative_eq!(h[j][i], fd, epsilon = 1e-6, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn metric_validation_rejects_hminus1() {
        let m = ToyPotential2D;
        let x = StateVector::new(vec![0.1, 0.2]).unwrap();
        let bad = MetricKind::hminus1_unit_grid(2);
        assert!(crate::landscape::eval_gradient(&m, &x, &bad).is_err());
    }
}
