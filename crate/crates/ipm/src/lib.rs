//! Saddle-point search by iterative proximal minimization.
//!
//! The solver alternates a min-mode eigensolve with a fixed number of
//! inner steps on a proximal auxiliary function built from the potential:
//! the lowest k Hessian directions are reflected, and a penalty growing
//! faster than quadratically anchors each subproblem at the current
//! iterate. Fixed points of the outer map are exactly the index-k saddle
//! points; the penalty extends the basin of attraction far beyond the
//! plain reflected iteration without changing those fixed points.
//!
//! The crate ships two concrete landscapes — a 2-d test potential with
//! three saddles, and the 1-d Ginzburg-Landau free energy on a periodic
//! grid under either the L² (non-conserved) or H⁻¹ (conserved) metric —
//! plus experiment drivers that map attraction basins and reproduce the
//! convergence/divergence and cost tables of the accompanying studies.

pub mod auxiliary;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod landscape;
pub mod metric;
pub mod solver;
pub mod spectral;
pub mod state;

pub use auxiliary::{AuxParams, PenaltyForm, PenaltyKind};
pub use error::{IpmError, Result};
pub use landscape::{GinzburgLandau1D, PotentialModel, ToyPotential2D};
pub use metric::MetricKind;
pub use solver::{
    estimate_convergence_order, run_ipm, verify_nash_residuals, InnerScheme, IpmConfig,
    IterationTrace, NashReport, OuterRecord, TerminalStatus,
};
pub use spectral::{lowest_k_modes, projector, SpectralInfo};
pub use state::StateVector;
