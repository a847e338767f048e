//! The outer iteration: alternate a min-mode solve with M inner steps on
//! the proximal auxiliary function, until the energy-gradient norm drops
//! below tolerance or the run diverges.

mod stepper;

pub use stepper::InnerScheme;

use crate::auxiliary::{grad_w_tilde, AuxParams};
use crate::error::{IpmError, Result};
use crate::landscape::PotentialModel;
use crate::metric::{flow_grad_norm, MetricKind};
use crate::spectral::{full_spectrum, lowest_k_modes, SpectralInfo};
use crate::state::{check_dim, dot, StateVector};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Eigenvalues below this are counted as negative directions when
/// certifying the Morse index; zero modes of translation families sit
/// around ±1e-7 on the experiment grids.
pub const NEG_EIG_TOL: f64 = -1e-6;

/// Relative threshold of the mode-inertia guard: a reflected mode whose
/// overlap with the gradient is below this (and with a further negative
/// direction behind it) is exchanged for the next mode. This only fires
/// on measure-zero symmetric configurations, where the lowest mode is
/// exactly orthogonal to the gradient and reflecting it cannot move the
/// iteration off the symmetric slice.
const MODE_INERTIA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IpmConfig {
    pub aux: AuxParams,
    /// Inner gradient steps per outer cycle (M).
    pub inner_steps: usize,
    /// Nominal inner step size Δt.
    pub inner_dt: f64,
    /// Stopping tolerance on the metric gradient norm of V.
    pub tol: f64,
    pub max_outer: usize,
    /// Error magnitude treated as divergence.
    pub divergence_cap: f64,
    /// Residual tolerance of the iterative eigensolver.
    pub eig_tol: f64,
    /// Inner integrator.
    pub scheme: InnerScheme,
    /// Backtracking halving on inner W̃ increase (explicit scheme only).
    /// Disable for strict reproduction of the plain descent iteration.
    pub descent_guard: bool,
    /// Metric of the min-mode eigenproblem; `None` uses the model's flow
    /// metric.
    pub mode_metric: Option<MetricKind>,
    /// Optional geometric decay ρ_t = ρ·γ^t of the proximal weight.
    pub rho_decay: Option<f64>,
}

impl IpmConfig {
    pub fn new(aux: AuxParams) -> Self {
        Self {
            aux,
            inner_steps: 100,
            inner_dt: 1e-3,
            tol: 1e-8,
            max_outer: 2000,
            divergence_cap: 1e6,
            eig_tol: 1e-8,
            scheme: InnerScheme::ExplicitDescent,
            descent_guard: true,
            mode_metric: None,
            rho_decay: None,
        }
    }

    pub fn validate(&self, model: &dyn PotentialModel) -> Result<()> {
        if self.inner_steps == 0 {
            return Err(IpmError::InvalidParameter {
                name: "M",
                message: "need at least one inner step".into(),
            });
        }
        if !(self.inner_dt > 0.0) {
            return Err(IpmError::InvalidParameter {
                name: "inner_dt",
                message: format!("must be positive, got {}", self.inner_dt),
            });
        }
        if !(self.tol > 0.0) {
            return Err(IpmError::InvalidParameter {
                name: "tol",
                message: format!("must be positive, got {}", self.tol),
            });
        }
        if self.aux.k >= model.dim() {
            return Err(IpmError::InvalidParameter {
                name: "k",
                message: format!("index target {} must be below dim {}", self.aux.k, model.dim()),
            });
        }
        if let Some(g) = self.rho_decay {
            if !(g > 0.0 && g <= 1.0) {
                return Err(IpmError::InvalidParameter {
                    name: "rho_decay",
                    message: format!("decay factor must be in (0, 1], got {g}"),
                });
            }
        }
        Ok(())
    }

    fn mode_metric(&self, model: &dyn PotentialModel) -> MetricKind {
        self.mode_metric.unwrap_or_else(|| model.metric())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminalStatus {
    Converged,
    Diverged,
    MaxOuterReached,
    EigFailure,
}

/// One row per outer cycle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OuterRecord {
    pub outer: usize,
    pub iterate: StateVector,
    /// e_t = metric gradient norm of V at the iterate.
    pub error: f64,
    /// λ₁ … (k+1 values where the problem allows).
    pub eigenvalues: Vec<f64>,
    /// Penalty distance d(xᵗ, xᵗ⁺¹); zero on the terminal row.
    pub penalty_distance: f64,
    /// Accepted inner steps this cycle (zero on the terminal row).
    pub inner_steps: usize,
    /// Backtracking halvings this cycle.
    pub halvings: usize,
    /// Seconds since the start of the run.
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationTrace {
    pub records: Vec<OuterRecord>,
    pub status: TerminalStatus,
    /// Converged, but the terminal point does not have exactly k negative
    /// Hessian eigenvalues.
    pub wrong_index: bool,
    /// Number of negative eigenvalues at the terminal point (when
    /// certified).
    pub negative_eigenvalues: Option<usize>,
    /// A near-degenerate min-mode block was seen at some cycle.
    pub degenerate_seen: bool,
    /// Cycles on which the mode-inertia guard exchanged the reflected
    /// block.
    pub guard_events: usize,
}

impl IterationTrace {
    pub fn outer_cycles(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn final_iterate(&self) -> Option<&StateVector> {
        self.records.last().map(|r| &r.iterate)
    }

    pub fn final_error(&self) -> Option<f64> {
        self.records.last().map(|r| r.error)
    }

    pub fn errors(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.error).collect()
    }
}

/// Effective dimension of the mode problem (mean-zero subspaces lose the
/// constant direction).
fn effective_mode_dim(model: &dyn PotentialModel, metric: &MetricKind) -> usize {
    if metric.is_hminus1() || model.conserves_mass() {
        model.dim() - 1
    } else {
        model.dim()
    }
}

struct ModeSolve {
    solved: SpectralInfo,
    reflected: SpectralInfo,
    guard_shift: usize,
}

/// Solve for the first k(+extra) modes, then apply the mode-inertia
/// guard: while the leading reflected mode is orthogonal to the gradient
/// within working precision and a further negative direction exists
/// behind the block, advance the block by one mode.
fn solve_modes(
    model: &dyn PotentialModel,
    x: &StateVector,
    cfg: &IpmConfig,
    grad_l2: &[f64],
    warm: Option<&SpectralInfo>,
) -> Result<ModeSolve> {
    let metric = cfg.mode_metric(model);
    let k = cfg.aux.k;
    let eff = effective_mode_dim(model, &metric);
    let solve_k = (k + 2).min(eff);
    let solved = lowest_k_modes(model, x, solve_k, &metric, cfg.eig_tol, warm)?;
    let h = metric.h();
    let gnorm = (h * dot(grad_l2, grad_l2)).sqrt();
    let mut shift = 0usize;
    while shift + k < solved.k()
        && solved.eigenvalues[shift + k] < -1e-10
        && (h * dot(solved.eigenvectors[shift].values(), grad_l2)).abs()
            < MODE_INERTIA_TOL * gnorm.max(1.0)
    {
        shift += 1;
    }
    let reflected = SpectralInfo {
        eigenvalues: solved.eigenvalues[shift..shift + k].to_vec(),
        eigenvectors: solved.eigenvectors[shift..shift + k].to_vec(),
        metric: solved.metric,
        residuals: solved.residuals[shift..shift + k].to_vec(),
        degenerate: solved.degenerate,
    };
    Ok(ModeSolve { solved, reflected, guard_shift: shift })
}

/// Run the outer iteration from `x0`.
///
/// Deterministic: identical inputs give identical traces (wall-clock
/// stamps aside).
pub fn run_ipm(
    model: &dyn PotentialModel,
    x0: &StateVector,
    cfg: &IpmConfig,
) -> Result<IterationTrace> {
    check_dim(model.dim(), x0.dim())?;
    cfg.validate(model)?;
    if !x0.is_finite() {
        return Err(IpmError::NonFinite { context: "run_ipm x0".into() });
    }

    let start = Instant::now();
    let n = model.dim();
    let flow_metric = model.metric();
    let mut records: Vec<OuterRecord> = Vec::new();
    let mut x = x0.values().to_vec();
    let mut warm: Option<SpectralInfo> = None;
    let mut degenerate_seen = false;
    let mut guard_events = 0usize;
    let mut status = TerminalStatus::MaxOuterReached;

    let mut grad = vec![0.0; n];
    for outer in 0..=cfg.max_outer {
        model.gradient_into(&x, &mut grad);
        let finite = x.iter().all(|v| v.is_finite()) && grad.iter().all(|v| v.is_finite());
        let error = if finite {
            flow_grad_norm(&flow_metric, &grad)?
        } else {
            f64::INFINITY
        };

        if !error.is_finite() || error > cfg.divergence_cap {
            records.push(OuterRecord {
                outer,
                iterate: StateVector::new_unchecked(x.clone()),
                error,
                eigenvalues: Vec::new(),
                penalty_distance: 0.0,
                inner_steps: 0,
                halvings: 0,
                elapsed_s: start.elapsed().as_secs_f64(),
            });
            status = TerminalStatus::Diverged;
            break;
        }

        let modes = match solve_modes(model, &StateVector::new_unchecked(x.clone()), cfg, &grad, warm.as_ref())
        {
            Ok(m) => m,
            Err(IpmError::EigenFailure { .. }) => {
                records.push(OuterRecord {
                    outer,
                    iterate: StateVector::new_unchecked(x.clone()),
                    error,
                    eigenvalues: Vec::new(),
                    penalty_distance: 0.0,
                    inner_steps: 0,
                    halvings: 0,
                    elapsed_s: start.elapsed().as_secs_f64(),
                });
                status = TerminalStatus::EigFailure;
                break;
            }
            Err(e) => return Err(e),
        };
        degenerate_seen |= modes.solved.degenerate;
        guard_events += modes.guard_shift;

        if error <= cfg.tol {
            records.push(OuterRecord {
                outer,
                iterate: StateVector::new_unchecked(x.clone()),
                error,
                eigenvalues: modes.solved.eigenvalues.clone(),
                penalty_distance: 0.0,
                inner_steps: 0,
                halvings: 0,
                elapsed_s: start.elapsed().as_secs_f64(),
            });
            status = TerminalStatus::Converged;
            break;
        }
        if outer == cfg.max_outer {
            records.push(OuterRecord {
                outer,
                iterate: StateVector::new_unchecked(x.clone()),
                error,
                eigenvalues: modes.solved.eigenvalues.clone(),
                penalty_distance: 0.0,
                inner_steps: 0,
                halvings: 0,
                elapsed_s: start.elapsed().as_secs_f64(),
            });
            status = TerminalStatus::MaxOuterReached;
            break;
        }

        // Per-cycle proximal weight (optional geometric decay).
        let mut params = cfg.aux;
        if let Some(g) = cfg.rho_decay {
            params.penalty.rho *= g.powi(outer as i32);
        }

        let mode_h = modes.reflected.metric.h();
        let grad_l2_norm = (mode_h * dot(&grad, &grad)).sqrt();
        let cycle = stepper::InnerCycle::new(
            model,
            params,
            &modes.reflected,
            &x,
            cfg.inner_dt,
            cfg.scheme,
            cfg.descent_guard,
            grad_l2_norm,
        )?;
        let mut y = x.clone();
        let outcome = cycle.run(&mut y, cfg.inner_steps)?;

        let penalty_distance = if outcome.blew_up {
            f64::NAN
        } else {
            let delta: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
            crate::auxiliary::penalty_value(&params.penalty, &modes.reflected.metric, &delta)
                .unwrap_or(f64::NAN)
        };
        records.push(OuterRecord {
            outer,
            iterate: StateVector::new_unchecked(x.clone()),
            error,
            eigenvalues: modes.solved.eigenvalues.clone(),
            penalty_distance,
            inner_steps: outcome.accepted,
            halvings: outcome.halvings,
            elapsed_s: start.elapsed().as_secs_f64(),
        });

        if outcome.blew_up {
            records.push(OuterRecord {
                outer: outer + 1,
                iterate: StateVector::new_unchecked(y.clone()),
                error: f64::INFINITY,
                eigenvalues: Vec::new(),
                penalty_distance: 0.0,
                inner_steps: 0,
                halvings: 0,
                elapsed_s: start.elapsed().as_secs_f64(),
            });
            status = TerminalStatus::Diverged;
            break;
        }

        x = y;
        warm = Some(modes.solved);
    }

    // Index certification at a converged terminal point.
    let mut wrong_index = false;
    let mut negative_eigenvalues = None;
    if status == TerminalStatus::Converged {
        let metric = cfg.mode_metric(model);
        let terminal = StateVector::new_unchecked(x.clone());
        let spectrum = full_spectrum(model, &terminal, &metric)?;
        let neg = spectrum.iter().filter(|l| **l < NEG_EIG_TOL).count();
        negative_eigenvalues = Some(neg);
        wrong_index = neg != cfg.aux.k;
    }

    Ok(IterationTrace {
        records,
        status,
        wrong_index,
        negative_eigenvalues,
        degenerate_seen,
        guard_events,
    })
}

/// First-order residuals of the three-agent equilibrium at `x`:
/// the anchored auxiliary gradient (agent acting on y), the anchor
/// consistency (zero by construction at y = x), and the eigenpair
/// residual (agent acting on the unit sphere).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NashReport {
    /// ‖∇_y W̃_ρ(y; x, v₁)|_{y=x}‖ in the flow norm.
    pub auxiliary_residual: f64,
    /// ½‖x-y‖² stationarity at y = x; identically zero.
    pub anchor_residual: f64,
    /// max_i ‖H vᵢ - λᵢ vᵢ‖ over the reflected block.
    pub eigen_residual: f64,
    /// Solved eigenvalues (k+1 where available).
    pub eigenvalues: Vec<f64>,
    /// Negative count of the full spectrum.
    pub negative_count: usize,
    /// Negative count equals the target index.
    pub index_matches: bool,
    pub tolerance: f64,
    /// All residuals at or below tolerance.
    pub passes: bool,
}

pub fn verify_nash_residuals(
    model: &dyn PotentialModel,
    x: &StateVector,
    cfg: &IpmConfig,
) -> Result<NashReport> {
    check_dim(model.dim(), x.dim())?;
    cfg.validate(model)?;
    if !x.is_finite() {
        return Err(IpmError::NonFinite { context: "verify_nash_residuals".into() });
    }
    let mut grad = vec![0.0; model.dim()];
    model.gradient_into(x.values(), &mut grad);
    let modes = solve_modes(model, x, cfg, &grad, None)?;
    let g = grad_w_tilde(&cfg.aux, model, x, x, &modes.reflected)?;
    let auxiliary_residual = flow_grad_norm(&model.metric(), g.values())?;
    let eigen_residual = modes
        .reflected
        .residuals
        .iter()
        .fold(0.0f64, |m, r| m.max(*r));
    let metric = cfg.mode_metric(model);
    let spectrum = full_spectrum(model, x, &metric)?;
    let negative_count = spectrum.iter().filter(|l| **l < NEG_EIG_TOL).count();
    let tolerance = cfg.tol;
    Ok(NashReport {
        auxiliary_residual,
        anchor_residual: 0.0,
        eigen_residual,
        eigenvalues: modes.solved.eigenvalues,
        negative_count,
        index_matches: negative_count == cfg.aux.k,
        tolerance,
        passes: auxiliary_residual <= tolerance && eigen_residual <= tolerance,
    })
}

/// Least-squares slope of log e_{t+1} against log e_t over the
/// convergent tail (all consecutive pairs with both errors positive and
/// below 1e-2). Near 2 indicates quadratic convergence, near 1 linear.
pub fn estimate_convergence_order(trace: &IterationTrace) -> Result<f64> {
    if trace.status != TerminalStatus::Converged {
        return Err(IpmError::InsufficientData {
            message: "convergence order requires a converged trace".into(),
        });
    }
    let errs = trace.errors();
    let below: Vec<f64> = errs.iter().copied().filter(|e| *e > 0.0 && *e < 1e-2).collect();
    if below.len() < 4 {
        return Err(IpmError::InsufficientData {
            message: format!("need at least 4 errors below 1e-2, got {}", below.len()),
        });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for pair in errs.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a > 0.0 && a < 1e-2 && b > 0.0 && b < 1e-2 {
            xs.push(a.ln());
            ys.push(b.ln());
        }
    }
    if xs.len() < 2 {
        return Err(IpmError::InsufficientData {
            message: "need at least 2 consecutive tail pairs".into(),
        });
    }
    let nf = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        return Err(IpmError::InsufficientData {
            message: "tail errors are constant; slope undefined".into(),
        });
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auxiliary::PenaltyForm;
    use crate::landscape::{ToyPotential2D, TOY_SADDLES};
    use approx::assert_relative_eq;

    fn toy_cfg(rho: f64, m: usize) -> IpmConfig {
        let penalty = PenaltyForm::separable(4, rho).unwrap();
        let aux = AuxParams::new(1.0, 1.0, penalty, 1).unwrap();
        let mut cfg = IpmConfig::new(aux);
        cfg.inner_steps = m;
        cfg
    }

    fn synthetic_trace(errors: &[f64]) -> IterationTrace {
        let records = errors
            .iter()
            .enumerate()
            .map(|(i, e)| OuterRecord {
                outer: i,
                iterate: StateVector::new(vec![0.0, 0.0]).unwrap(),
                error: *e,
                eigenvalues: vec![],
                penalty_distance: 0.0,
                inner_steps: 0,
                halvings: 0,
                elapsed_s: 0.0,
            })
            .collect();
        IterationTrace {
            records,
            status: TerminalStatus::Converged,
            wrong_index: false,
            negative_eigenvalues: Some(1),
            degenerate_seen: false,
            guard_events: 0,
        }
    }

    #[test]
    fn toy_converges_to_first_saddle() {
        let model = ToyPotential2D;
        let x0 = StateVector::new(vec![0.5, 0.8]).unwrap();
        for rho in [5.0, 100.0] {
            let cfg = toy_cfg(rho, 100);
            let trace = run_ipm(&model, &x0, &cfg).unwrap();
            assert_eq!(trace.status, TerminalStatus::Converged, "rho = {rho}");
            let xf = trace.final_iterate().unwrap();
            assert_relative_eq!(xf[0], TOY_SADDLES[0][0], epsilon = 1e-5);
            assert_relative_eq!(xf[1], TOY_SADDLES[0][1], epsilon = 1e-5);
            assert!(!trace.wrong_index);
        }
    }

    #[test]
    fn toy_norm_penalty_converges() {
        let model = ToyPotential2D;
        let penalty = PenaltyForm::norm(4, 5.0).unwrap();
        let aux = AuxParams::new(1.0, 1.0, penalty, 1).unwrap();
        let mut cfg = IpmConfig::new(aux);
        cfg.inner_steps = 100;
        let x0 = StateVector::new(vec![0.5, 0.8]).unwrap();
        let trace = run_ipm(&model, &x0, &cfg).unwrap();
        assert_eq!(trace.status, TerminalStatus::Converged);
        let xf = trace.final_iterate().unwrap();
        assert_relative_eq!(xf[0], 0.61727231, epsilon = 1e-4);
    }

    #[test]
    fn exact_saddle_start_is_fixed_point() {
        let model = ToyPotential2D;
        let x0 = StateVector::new(TOY_SADDLES[2].to_vec()).unwrap();
        let cfg = toy_cfg(5.0, 100);
        let trace = run_ipm(&model, &x0, &cfg).unwrap();
        assert_eq!(trace.status, TerminalStatus::Converged);
        // Converges within at most one cycle and barely moves.
        assert!(trace.outer_cycles() <= 1);
        let xf = trace.final_iterate().unwrap();
        let d = ((xf[0] - x0[0]).powi(2) + (xf[1] - x0[1]).powi(2)).sqrt();
        assert!(d < 1e-6, "moved {d}");
    }

    #[test]
    fn bad_start_without_penalty_diverges() {
        let model = ToyPotential2D;
        let x0 = StateVector::new(vec![1.5, 1.2]).unwrap();
        let mut cfg = toy_cfg(0.0, 1000);
        cfg.descent_guard = false;
        let trace = run_ipm(&model, &x0, &cfg).unwrap();
        assert_eq!(trace.status, TerminalStatus::Diverged);
    }

    #[test]
    fn traces_are_deterministic() {
        let model = ToyPotential2D;
        let x0 = StateVector::new(vec![0.5, 0.8]).unwrap();
        let cfg = toy_cfg(5.0, 50);
        let a = run_ipm(&model, &x0, &cfg).unwrap();
        let b = run_ipm(&model, &x0, &cfg).unwrap();
        assert_eq!(a.records.len(), b.records.len());
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.error.to_bits(), rb.error.to_bits());
            assert_eq!(ra.iterate, rb.iterate);
        }
    }

    #[test]
    fn order_estimator_on_geometric_sequence() {
        let errors: Vec<f64> = (0..12).map(|t| 10f64.powi(-t)).collect();
        let trace = synthetic_trace(&errors);
        let order = estimate_convergence_order(&trace).unwrap();
        assert_relative_eq!(order, 1.0, epsilon = 0.05);
    }

    #[test]
    fn order_estimator_on_doubly_exponential_sequence() {
        let errors: Vec<f64> = (0..7).map(|t| 10f64.powf(-(2f64.powi(t)))).collect();
        let trace = synthetic_trace(&errors);
        let order = estimate_convergence_order(&trace).unwrap();
        assert_relative_eq!(order, 2.0, epsilon = 0.05);
    }

    #[test]
    fn order_estimator_requires_enough_data() {
        let trace = synthetic_trace(&[1.0, 0.5, 1e-3, 1e-6]);
        assert!(matches!(
            estimate_convergence_order(&trace),
            Err(IpmError::InsufficientData { .. })
        ));
    }

    #[test]
    fn nash_residuals_at_converged_saddle() {
        let model = ToyPotential2D;
        let x0 = StateVector::new(vec![0.5, 0.8]).unwrap();
        let cfg = toy_cfg(5.0, 100);
        let trace = run_ipm(&model, &x0, &cfg).unwrap();
        let xf = trace.final_iterate().unwrap().clone();
        let mut vcfg = cfg.clone();
        vcfg.tol = 1e-6;
        let report = verify_nash_residuals(&model, &xf, &vcfg).unwrap();
        assert!(report.passes, "{report:?}");
        assert!(report.index_matches);
        assert_eq!(report.anchor_residual, 0.0);
    }

    #[test]
    fn nash_residuals_flag_minimum() {
        // Near the local minimum the gradient residual is small but the
        // index check must fail (λ₁ > 0).
        let model = ToyPotential2D;
        let min = StateVector::new(vec![1.04805499, -0.04209367]).unwrap();
        let mut cfg = toy_cfg(5.0, 100);
        cfg.tol = 1e-4;
        let report = verify_nash_residuals(&model, &min, &cfg).unwrap();
        assert!(report.auxiliary_residual < 1e-4);
        assert!(!report.index_matches);
        assert_eq!(report.negative_count, 0);
    }

    #[test]
    fn nash_residual_matches_reflected_gradient_oracle() {
        // At a non-critical point the agent-(-1) residual equals
        // ‖[I - (α+β)Π₁]∇V‖ computed directly.
        let model = ToyPotential2D;
        let x = StateVector::new(vec![0.3, 0.9]).unwrap();
        let cfg = toy_cfg(7.0, 10);
        let report = verify_nash_residuals(&model, &x, &cfg).unwrap();
        let modes =
            lowest_k_modes(&model, &x, 1, &MetricKind::euclidean(), 1e-10, None).unwrap();
        let mut g = vec![0.0; 2];
        model.gradient_into(x.values(), &mut g);
        let v = modes.eigenvectors[0].values();
        let c = v[0] * g[0] + v[1] * g[1];
        let r = [g[0] - 2.0 * c * v[0], g[1] - 2.0 * c * v[1]];
        let expect = (r[0] * r[0] + r[1] * r[1]).sqrt();
        assert_relative_eq!(report.auxiliary_residual, expect, epsilon = 1e-10);
        assert!(report.auxiliary_residual > 0.0);
    }

    #[test]
    fn rejects_invalid_config() {
        let model = ToyPotential2D;
        let x0 = StateVector::new(vec![0.5, 0.8]).unwrap();
        let mut cfg = toy_cfg(1.0, 100);
        cfg.inner_steps = 0;
        assert!(run_ipm(&model, &x0, &cfg).is_err());
        let mut cfg = toy_cfg(1.0, 100);
        cfg.aux.k = 2;
        assert!(run_ipm(&model, &x0, &cfg).is_err());
    }
}
