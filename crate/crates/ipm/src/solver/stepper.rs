//! Inner-iteration steppers for the proximal subproblem.
//!
//! Each outer cycle runs M steps of nominal size Δt on the gradient flow
//! of W̃_ρ(·; xᵗ, vᵗ) in the model's metric. Three integrators are
//! provided; all share the same fixed points (stationarity of W̃ up to an
//! additive constant field):
//!
//! * `ExplicitDescent` — the literal descent step y ← y - Δt·∇W̃,
//!   optionally protected by backtracking halving on W̃ increase. Suitable
//!   for non-stiff (ODE) problems.
//! * `StabilizedImex` — first-order semi-implicit step for grid problems:
//!   the stiff linear diffusion is implicit in Fourier space, the
//!   truncated remainder explicit with a linear stabilization shift that
//!   adapts to the current penalty curvature. Fast constant-coefficient
//!   solves; used for the non-conserved (L²) flow.
//! * `PreconditionedDescent` — descent preconditioned by the absolute
//!   value of the W̃ Hessian frozen at the anchor (dense eigensolve once
//!   per cycle). Handles the conserved (H⁻¹) flow, whose wrapped operator
//!   makes every explicit treatment of the reflected term unstable at the
//!   nominal step size.

use crate::auxiliary::{
    eval_w_tilde_stabilized, grad_w_tilde_stabilized, penalty_curvature_bound, AuxParams,
};
use crate::error::Result;
use crate::landscape::PotentialModel;
use crate::spectral::SpectralInfo;
use crate::state::{axpy, dot};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InnerScheme {
    /// y ← y - Δt·∇W̃ (plain gradient descent, Euclidean representation).
    ExplicitDescent,
    /// Semi-implicit step with implicit stiff diffusion, for grid models.
    StabilizedImex,
    /// Anchored |Hessian|-preconditioned descent, for stiff metrics.
    PreconditionedDescent,
}

/// Iterates above this magnitude terminate the inner loop as divergent.
pub(crate) const BLOWUP_LIMIT: f64 = 1e9;

/// Eigenvalue floor of the absolute-Hessian preconditioner.
const PRECOND_FLOOR: f64 = 1.0;

/// Safety factor on the penalty-curvature estimate folded into the
/// preconditioner and the IMEX stabilization.
const PENALTY_SAFETY: f64 = 1.5;

pub(crate) struct StepOutcome {
    pub accepted: usize,
    pub halvings: usize,
    pub blew_up: bool,
}

/// One cycle's worth of inner iteration: M steps from y = x.
pub(crate) struct InnerCycle<'a> {
    model: &'a dyn PotentialModel,
    params: AuxParams,
    modes: &'a SpectralInfo,
    anchor: &'a [f64],
    dt: f64,
    scheme: InnerScheme,
    guard: bool,
    precond: Option<Preconditioner>,
}

impl<'a> InnerCycle<'a> {
    pub fn new(
        model: &'a dyn PotentialModel,
        params: AuxParams,
        modes: &'a SpectralInfo,
        anchor: &'a [f64],
        dt: f64,
        scheme: InnerScheme,
        guard: bool,
        grad_l2_norm: f64,
    ) -> Result<Self> {
        let precond = if scheme == InnerScheme::PreconditionedDescent {
            Some(Preconditioner::build(model, &params, modes, anchor, grad_l2_norm)?)
        } else {
            None
        };
        Ok(Self { model, params, modes, anchor, dt, scheme, guard, precond })
    }

    /// Run `m` steps in place. Returns accepted-step and halving counts.
    pub fn run(&self, y: &mut Vec<f64>, m: usize) -> Result<StepOutcome> {
        let mut halvings = 0;
        for step in 0..m {
            let ok = match self.scheme {
                InnerScheme::ExplicitDescent => self.explicit_step(y, &mut halvings)?,
                InnerScheme::StabilizedImex => self.imex_step(y)?,
                InnerScheme::PreconditionedDescent => self.precond_step(y)?,
            };
            if !ok {
                return Ok(StepOutcome { accepted: step, halvings, blew_up: true });
            }
        }
        Ok(StepOutcome { accepted: m, halvings, blew_up: false })
    }

    fn finite(y: &[f64]) -> bool {
        y.iter().all(|v| v.is_finite() && v.abs() < BLOWUP_LIMIT)
    }

    fn explicit_step(&self, y: &mut Vec<f64>, halvings: &mut usize) -> Result<bool> {
        let (g, _) = grad_w_tilde_stabilized(&self.params, self.model, y, self.anchor, self.modes)?;
        if self.guard {
            let w0 = eval_w_tilde_stabilized(&self.params, self.model, y, self.anchor, self.modes)?;
            let mut dt = self.dt;
            let mut trial = y.clone();
            for attempt in 0..=20 {
                trial.copy_from_slice(y);
                axpy(-dt, &g, &mut trial);
                if Self::finite(&trial) {
                    let w1 = eval_w_tilde_stabilized(
                        &self.params,
                        self.model,
                        &trial,
                        self.anchor,
                        self.modes,
                    )?;
                    if w1 <= w0 + 1e-12 {
                        break;
                    }
                }
                if attempt == 20 {
                    break;
                }
                dt *= 0.5;
                *halvings += 1;
            }
            *y = trial;
        } else {
            axpy(-self.dt, &g, y);
        }
        Ok(Self::finite(y))
    }

    fn imex_step(&self, y: &mut Vec<f64>) -> Result<bool> {
        let n = self.model.dim();
        let metric = self.model.metric();
        let grid = metric.grid_for(n)?;
        let dt = self.dt;
        let kap2 = self.model.stiff_coefficient();
        let implicit_coeff = (1.0 - self.params.alpha) * kap2;
        let s0 = self.model.stabilization_constant();
        let delta_max =
            y.iter().zip(self.anchor).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        let s_step =
            s0 + 0.5 * penalty_curvature_bound(&self.params.penalty, delta_max);

        // Explicit remainder: full stabilized gradient minus the implicit
        // -c·Δy part.
        let (mut rest, _) =
            grad_w_tilde_stabilized(&self.params, self.model, y, self.anchor, self.modes)?;
        if implicit_coeff != 0.0 {
            let mut lap_y = vec![0.0; n];
            grid.laplacian(y, &mut lap_y);
            axpy(implicit_coeff, &lap_y, &mut rest);
        }

        let yf = grid.forward_spectrum(y);
        let rf = grid.forward_spectrum(&rest);
        let hm1 = metric.is_hminus1();
        let mut out = vec![Complex64::default(); n];
        for (k, o) in out.iter_mut().enumerate() {
            let xi2 = grid.xi2()[k];
            let (num, den) = if hm1 {
                (
                    yf[k] * (1.0 + dt * s_step * xi2) - rf[k] * (dt * xi2),
                    1.0 + dt * implicit_coeff * xi2 * xi2 + dt * s_step * xi2,
                )
            } else {
                (
                    yf[k] * (1.0 + dt * s_step) - rf[k] * dt,
                    1.0 + dt * implicit_coeff * xi2 + dt * s_step,
                )
            };
            *o = num / den;
        }
        grid.inverse_spectrum(&out, y);
        Ok(Self::finite(y))
    }

    fn precond_step(&self, y: &mut Vec<f64>) -> Result<bool> {
        let pre = self.precond.as_ref().expect("preconditioner built in new()");
        let (mut g, _) =
            grad_w_tilde_stabilized(&self.params, self.model, y, self.anchor, self.modes)?;
        if self.model.conserves_mass() {
            remove_mean(&mut g);
        }
        let step = pre.apply(&g);
        axpy(-self.dt, &step, y);
        Ok(Self::finite(y))
    }
}

fn remove_mean(u: &mut [f64]) {
    let m = u.iter().sum::<f64>() / u.len() as f64;
    for v in u.iter_mut() {
        *v -= m;
    }
}

/// Absolute value of the W̃ Hessian at the anchor, eigendecomposed once
/// per cycle. Requires L²-normalized modes.
struct Preconditioner {
    basis: DMatrix<f64>,
    inv_abs: Vec<f64>,
    mean_zero: bool,
}

impl Preconditioner {
    fn build(
        model: &dyn PotentialModel,
        params: &AuxParams,
        modes: &SpectralInfo,
        anchor: &[f64],
        grad_l2_norm: f64,
    ) -> Result<Self> {
        let n = model.dim();
        let h = modes.metric.h();
        let mean_zero = model.conserves_mass();

        // Dense truncated Hessian of V at the anchor.
        let mut l = DMatrix::<f64>::zeros(n, n);
        {
            let mut e = vec![0.0; n];
            let mut col = vec![0.0; n];
            for j in 0..n {
                e[j] = 1.0;
                model.stabilized_hessian_vp_into(anchor, &e, &mut col);
                e[j] = 0.0;
                for i in 0..n {
                    l[(i, j)] = col[i];
                }
            }
        }

        // W̃ Hessian at y = x: (1-α)L + α(I-Π)L(I-Π) - β Σ λ̃ᵢ vᵢ(h vᵢ)ᵀ.
        let alpha = params.alpha;
        let beta = params.beta;
        let mut ht = l.clone() * (1.0 - alpha);
        if alpha != 0.0 {
            let mut proj = DMatrix::<f64>::identity(n, n);
            for v in modes.eigenvectors.iter().take(params.k) {
                for i in 0..n {
                    for j in 0..n {
                        proj[(i, j)] -= v.values()[i] * h * v.values()[j];
                    }
                }
            }
            ht += (&proj * &l * &proj) * alpha;
        }
        for v in modes.eigenvectors.iter().take(params.k) {
            let vv = v.values();
            let mut lv = vec![0.0; n];
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += l[(i, j)] * vv[j];
                }
                lv[i] = acc;
            }
            let lam = h * dot(vv, &lv);
            for i in 0..n {
                for j in 0..n {
                    ht[(i, j)] -= beta * lam * vv[i] * h * vv[j];
                }
            }
        }

        // Penalty curvature estimate at the expected proximal offset.
        let rho = params.penalty.rho;
        let s_pen = if rho > 0.0 {
            let b = params.penalty.exponent() as f64;
            let d_hat = (grad_l2_norm.max(1e-300) / (b * rho)).powf(1.0 / (b - 1.0));
            PENALTY_SAFETY * penalty_curvature_bound(&params.penalty, d_hat)
        } else {
            0.0
        };

        // Symmetrize, restrict to mean-zero if conserved, add the penalty
        // shift and deflate the constant mode.
        let mut sym = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                sym[(i, j)] = 0.5 * (ht[(i, j)] + ht[(j, i)]);
            }
        }
        if mean_zero {
            let mz = DMatrix::<f64>::from_fn(n, n, |i, j| {
                (if i == j { 1.0 } else { 0.0 }) - 1.0 / n as f64
            });
            sym = &mz * sym * &mz;
        }
        for i in 0..n {
            sym[(i, i)] += s_pen;
        }
        if mean_zero {
            let shift = 10.0 * sym.abs().max() * n as f64 + 1.0;
            for i in 0..n {
                for j in 0..n {
                    sym[(i, j)] += shift / n as f64;
                }
            }
        }

        let eig = sym.symmetric_eigen();
        let inv_abs: Vec<f64> =
            eig.eigenvalues.iter().map(|m| 1.0 / m.abs().max(PRECOND_FLOOR)).collect();
        Ok(Self { basis: eig.eigenvectors, inv_abs, mean_zero })
    }

    /// W·diag(1/max(|μ|, floor))·Wᵀ g
    fn apply(&self, g: &[f64]) -> Vec<f64> {
        let n = g.len();
        let mut coeffs = vec![0.0; n];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..n {
                acc += self.basis[(i, j)] * g[i];
            }
            *c = acc * self.inv_abs[j];
        }
        let mut out = vec![0.0; n];
        for j in 0..n {
            let c = coeffs[j];
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.basis[(i, j)] * c;
            }
        }
        if self.mean_zero {
            remove_mean(&mut out);
        }
        out
    }
}
