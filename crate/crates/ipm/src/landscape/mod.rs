//! Potential landscapes: the model interface plus the two concrete
//! energies used by the experiments (a 2-d toy potential and the 1-d
//! Ginzburg-Landau free energy on a periodic grid).

mod gl;
mod toy;

pub use gl::GinzburgLandau1D;
pub use toy::{ToyPotential2D, TOY_SADDLES};

use crate::error::{IpmError, Result};
use crate::metric::MetricKind;
use crate::state::{check_dim, StateVector};

/// An evaluable energy with gradient and Hessian-vector product.
///
/// Gradients and Hessian products are returned in the L² field
/// representation (the variational derivative for grid problems, the
/// plain Euclidean gradient for ODE problems); the metric enters through
/// inner products and the inner-iteration flow map, not through the
/// stored representation.
///
/// Implementations are immutable after construction and safe to share
/// across threads.
pub trait PotentialModel: Send + Sync {
    fn dim(&self) -> usize;

    /// The metric the model's gradient flow is posed in.
    fn metric(&self) -> MetricKind;

    fn energy(&self, x: &[f64]) -> f64;

    /// L² representation of the energy gradient.
    fn gradient_into(&self, x: &[f64], out: &mut [f64]);

    /// L² representation of H(x)·v.
    fn hessian_vp_into(&self, x: &[f64], v: &[f64], out: &mut [f64]);

    /// Whether the flow conserves the grid mean (true for conserved-order
    /// -parameter dynamics, i.e. the H⁻¹ metric).
    fn conserves_mass(&self) -> bool {
        self.metric().is_hminus1()
    }

    /// Coefficient of the stiff linear term `-c·Δ` inside the gradient,
    /// handled implicitly by the semi-implicit inner stepper. Zero for
    /// ODE problems.
    fn stiff_coefficient(&self) -> f64 {
        0.0
    }

    /// Linear stabilization constant of the semi-implicit stepper; should
    /// bound half the Lipschitz constant of the truncated smooth part.
    fn stabilization_constant(&self) -> f64 {
        0.0
    }

    /// The gradient with the stiff linear part removed, in the globally
    /// Lipschitz (truncated) form used by the inner steppers. For models
    /// without a stiff part this is the full gradient.
    fn smooth_gradient_into(&self, x: &[f64], out: &mut [f64]) {
        self.gradient_into(x, out);
    }

    /// Truncated gradient: stiff part plus [`smooth_gradient_into`].
    /// Coincides with the exact gradient wherever truncation is inactive.
    fn stabilized_gradient_into(&self, x: &[f64], out: &mut [f64]) {
        self.gradient_into(x, out);
    }

    /// Hessian-vector product of the truncated energy (used only to build
    /// inner-step preconditioners; the exact Hessian is used everywhere a
    /// result is reported).
    fn stabilized_hessian_vp_into(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        self.hessian_vp_into(x, v, out);
    }
}

fn validate_metric(model: &dyn PotentialModel, metric: &MetricKind) -> Result<()> {
    if metric.is_hminus1() && !model.metric().is_hminus1() {
        return Err(IpmError::MetricIncompatible {
            metric: format!("{metric:?}"),
            message: "H^-1 requested on a model without a periodic mass-conserving discretization"
                .into(),
        });
    }
    Ok(())
}

/// Energy value at `x`.
pub fn eval_potential(model: &dyn PotentialModel, x: &StateVector) -> Result<f64> {
    check_dim(model.dim(), x.dim())?;
    Ok(model.energy(x.values()))
}

/// Energy gradient at `x` in its L² field representation. The metric
/// argument is validated against the model; it does not change the
/// representation (see the module docs).
pub fn eval_gradient(
    model: &dyn PotentialModel,
    x: &StateVector,
    metric: &MetricKind,
) -> Result<StateVector> {
    check_dim(model.dim(), x.dim())?;
    validate_metric(model, metric)?;
    let mut out = vec![0.0; x.dim()];
    model.gradient_into(x.values(), &mut out);
    Ok(StateVector::new_unchecked(out))
}

/// H(x)·v in the L² field representation.
pub fn hessian_vector_product(
    model: &dyn PotentialModel,
    x: &StateVector,
    v: &StateVector,
    metric: &MetricKind,
) -> Result<StateVector> {
    check_dim(model.dim(), x.dim())?;
    check_dim(model.dim(), v.dim())?;
    validate_metric(model, metric)?;
    let mut out = vec![0.0; x.dim()];
    model.hessian_vp_into(x.values(), v.values(), &mut out);
    Ok(StateVector::new_unchecked(out))
}

/// A potential defined by numeric callbacks, for user-supplied energies.
/// The Hessian-vector product falls back to central differences of the
/// gradient when no callback is given.
pub struct FnPotential<F, G>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    dim: usize,
    metric: MetricKind,
    energy: F,
    gradient: G,
    fd_step: f64,
}

impl<F, G> FnPotential<F, G>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(dim: usize, metric: MetricKind, energy: F, gradient: G) -> Self {
        Self { dim, metric, energy, gradient, fd_step: 1e-5 }
    }
}

impl<F, G> PotentialModel for FnPotential<F, G>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn metric(&self) -> MetricKind {
        self.metric
    }

    fn energy(&self, x: &[f64]) -> f64 {
        (self.energy)(x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        (self.gradient)(x, out);
    }

    fn hessian_vp_into(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        // Central difference of the gradient along v.
        let vnorm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            out.fill(0.0);
            return;
        }
        let eps = self.fd_step / vnorm;
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        for i in 0..x.len() {
            xp[i] += eps * v[i];
            xm[i] -= eps * v[i];
        }
        let mut gp = vec![0.0; x.len()];
        let mut gm = vec![0.0; x.len()];
        (self.gradient)(&xp, &mut gp);
        (self.gradient)(&xm, &mut gm);
        for ((o, p), m) in out.iter_mut().zip(&gp).zip(&gm) {
            *o = (p - m) / (2.0 * eps);
        }
    }
}
