//! Min-mode computation: lowest eigenpairs of the Hessian at a point,
//! in the L² or H⁻¹ metric.
//!
//! The L² problem is the ordinary symmetric eigenproblem of the Hessian
//! operator; for mass-conserving models it is restricted to the mean-zero
//! subspace. The H⁻¹ problem is the generalized problem
//! `H v = λ (-Δ)⁻¹ v`, symmetrized with `D = (-Δ)^{1/2}` into the
//! ordinary problem `(D H D) w = λ w` on mean-zero fields, with
//! `v = D w / √h` giving ⟨v,v⟩_{H⁻¹} = 1.
//!
//! Problems up to [`DENSE_LIMIT`] unknowns are solved by dense assembly
//! and direct symmetric eigendecomposition (both experiment grids fall in
//! this range); larger problems use a blocked LOBPCG-style iteration with
//! warm starts.

use crate::error::{IpmError, Result};
use crate::landscape::PotentialModel;
use crate::metric::MetricKind;
use crate::state::{axpy, check_dim, dot, StateVector};
use nalgebra::{DMatrix, DVector};

/// Above this dimension `lowest_k_modes` switches to the iterative solver.
pub const DENSE_LIMIT: usize = 200;

/// Eigenvalue gap below which the spectrum is flagged degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;

/// The lowest eigenpairs of the Hessian at a point.
#[derive(Debug, Clone)]
pub struct SpectralInfo {
    /// Ascending eigenvalues λ₁ ≤ … ≤ λ_k.
    pub eigenvalues: Vec<f64>,
    /// Metric-normalized eigenvectors (⟨vᵢ,vᵢ⟩_m = 1), pairwise
    /// metric-orthogonal, sign fixed so the first non-negligible
    /// component is positive.
    pub eigenvectors: Vec<StateVector>,
    pub metric: MetricKind,
    /// Residual of the symmetrized problem per pair, in the L² norm.
    pub residuals: Vec<f64>,
    /// Set when consecutive returned eigenvalues are closer than
    /// [`DEGENERACY_GAP`]; the non-degeneracy assumption of the local
    /// theory is violated there.
    pub degenerate: bool,
}

impl SpectralInfo {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Coordinate transform between the metric problem and the symmetric
/// w-space problem in which both solvers run.
struct Symmetrized<'a> {
    model: &'a dyn PotentialModel,
    x: &'a [f64],
    metric: MetricKind,
    mean_zero: bool,
    /// Use the truncated Hessian (for preconditioner construction).
    stabilized: bool,
}

impl<'a> Symmetrized<'a> {
    fn n(&self) -> usize {
        self.model.dim()
    }

    /// Effective dimension of the eigenproblem.
    fn effective_dim(&self) -> usize {
        if self.mean_zero {
            self.n() - 1
        } else {
            self.n()
        }
    }

    fn remove_mean(&self, u: &mut [f64]) {
        if self.mean_zero {
            let m = u.iter().sum::<f64>() / u.len() as f64;
            for v in u.iter_mut() {
                *v -= m;
            }
        }
    }

    /// w ↦ A w, the symmetric operator of the w-space problem.
    fn apply(&self, w: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.n();
        match self.metric {
            MetricKind::L2 { .. } => {
                if self.stabilized {
                    self.model.stabilized_hessian_vp_into(self.x, w, out);
                } else {
                    self.model.hessian_vp_into(self.x, w, out);
                }
                self.remove_mean(out);
            }
            MetricKind::Hminus1 { .. } => {
                let grid = self.metric.grid_for(n)?;
                let mut dw = vec![0.0; n];
                grid.sqrt_neg_laplacian(w, &mut dw);
                let mut hdw = vec![0.0; n];
                if self.stabilized {
                    self.model.stabilized_hessian_vp_into(self.x, &dw, &mut hdw);
                } else {
                    self.model.hessian_vp_into(self.x, &dw, &mut hdw);
                }
                grid.sqrt_neg_laplacian(&hdw, out);
            }
        }
        Ok(())
    }

    /// w-space vector to the metric-normalized eigenvector.
    fn to_eigenvector(&self, w: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        let h = self.metric.h();
        let mut v = match self.metric {
            MetricKind::L2 { .. } => w.to_vec(),
            MetricKind::Hminus1 { .. } => {
                let grid = self.metric.grid_for(n)?;
                let mut dv = vec![0.0; n];
                grid.sqrt_neg_laplacian(w, &mut dv);
                dv
            }
        };
        // |w| = 1 Euclidean corresponds to metric norm √h.
        let wnorm = dot(w, w).sqrt();
        let scale = 1.0 / (wnorm * h.sqrt());
        for c in v.iter_mut() {
            *c *= scale;
        }
        Ok(v)
    }

    /// Fourier-diagonal preconditioner for the iterative solver, built
    /// from the model's stiff coefficient: approximately inverts the
    /// dominant constant-coefficient part of the operator so the lowest
    /// modes converge at a spread-independent rate. Identity for models
    /// without a stiff part.
    fn precondition(&self, r: &[f64], out: &mut [f64]) -> Result<()> {
        let c = self.model.stiff_coefficient();
        if c == 0.0 {
            out.copy_from_slice(r);
            return Ok(());
        }
        let grid = self.metric.grid_for(self.n())?;
        let spec = grid.forward_spectrum(r);
        let hm1 = self.metric.is_hminus1();
        let mut scaled = spec;
        for (k, s) in scaled.iter_mut().enumerate() {
            let xi2 = grid.xi2()[k];
            let den = if hm1 { 1.0 + c * xi2 * xi2 + xi2 } else { 1.0 + c * xi2 };
            *s /= den;
        }
        grid.inverse_spectrum(&scaled, out);
        self.remove_mean(out);
        Ok(())
    }

    /// Metric eigenvector to a unit w-space vector (for warm starts).
    fn from_eigenvector(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        let mut w = match self.metric {
            MetricKind::L2 { .. } => v.to_vec(),
            MetricKind::Hminus1 { .. } => {
                let grid = self.metric.grid_for(n)?;
                let mut out = vec![0.0; n];
                grid.inv_sqrt_neg_laplacian(v, &mut out);
                out
            }
        };
        self.remove_mean(&mut w);
        let norm = dot(&w, &w).sqrt();
        if norm > 0.0 {
            for c in w.iter_mut() {
                *c /= norm;
            }
        }
        Ok(w)
    }
}

fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if max == 0.0 {
        return;
    }
    if let Some(first) = v.iter().find(|c| c.abs() > 1e-8 * max) {
        if *first < 0.0 {
            for c in v.iter_mut() {
                *c = -*c;
            }
        }
    }
}

fn validate_k(k: usize, effective_dim: usize, dim: usize) -> Result<()> {
    if k == 0 || k > effective_dim {
        return Err(IpmError::InvalidParameter {
            name: "k",
            message: format!("need 1 <= k <= {effective_dim} (dim {dim}), got {k}"),
        });
    }
    Ok(())
}

fn build_info(
    sym: &Symmetrized<'_>,
    pairs: Vec<(f64, Vec<f64>)>,
) -> Result<SpectralInfo> {
    let n = sym.n();
    let mut eigenvalues = Vec::with_capacity(pairs.len());
    let mut eigenvectors = Vec::with_capacity(pairs.len());
    let mut residuals = Vec::with_capacity(pairs.len());
    let h = sym.metric.h();
    for (lam, w) in &pairs {
        let mut aw = vec![0.0; n];
        sym.apply(w, &mut aw)?;
        let wnorm = dot(w, w).sqrt();
        let mut r2 = 0.0;
        for (a, wi) in aw.iter().zip(w) {
            let r = a - lam * wi;
            r2 += r * r;
        }
        residuals.push((h * r2).sqrt() / wnorm);
        let mut v = sym.to_eigenvector(w)?;
        fix_sign(&mut v);
        eigenvalues.push(*lam);
        eigenvectors.push(StateVector::new_unchecked(v));
    }
    let degenerate = eigenvalues.windows(2).any(|p| (p[1] - p[0]).abs() < DEGENERACY_GAP);
    Ok(SpectralInfo { eigenvalues, eigenvectors, metric: sym.metric, residuals, degenerate })
}

fn assemble_dense(sym: &Symmetrized<'_>) -> Result<DMatrix<f64>> {
    let n = sym.n();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        sym.apply(&e, &mut col)?;
        e[j] = 0.0;
        for i in 0..n {
            a[(i, j)] = col[i];
        }
    }
    // Symmetrize rounding noise.
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = s;
            a[(j, i)] = s;
        }
    }
    if sym.mean_zero {
        // Push the constant mode far above the spectrum of interest.
        let shift = 10.0 * a.abs().max() * n as f64 + 1.0;
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] += shift / n as f64;
            }
        }
    }
    Ok(a)
}

fn dense_pairs(sym: &Symmetrized<'_>, k: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    let a = assemble_dense(sym)?;
    let eig = a.symmetric_eigen();
    let n = sym.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let mut pairs = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let w: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        pairs.push((eig.eigenvalues[idx], w));
    }
    Ok(pairs)
}

/// All eigenvalues of the Hessian at `x` in the stated metric (ascending;
/// mean-zero-restricted problems return `dim - 1` values). Dense solve;
/// intended for index certification and small-problem checks.
pub fn full_spectrum(
    model: &dyn PotentialModel,
    x: &StateVector,
    metric: &MetricKind,
) -> Result<Vec<f64>> {
    check_dim(model.dim(), x.dim())?;
    let sym = Symmetrized {
        model,
        x: x.values(),
        metric: *metric,
        mean_zero: metric.is_hminus1() || (model.conserves_mass() && !metric.is_hminus1()),
        stabilized: false,
    };
    let a = assemble_dense(&sym)?;
    let mut vals: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
    vals.sort_by(|p, q| p.partial_cmp(q).unwrap());
    vals.truncate(sym.effective_dim());
    Ok(vals)
}

/// The `k` smallest eigenpairs of the Hessian at `x` in the given metric.
///
/// `warm_start` seeds the iterative solver; the dense path ignores it.
pub fn lowest_k_modes(
    model: &dyn PotentialModel,
    x: &StateVector,
    k: usize,
    metric: &MetricKind,
    tol: f64,
    warm_start: Option<&SpectralInfo>,
) -> Result<SpectralInfo> {
    if model.dim() <= DENSE_LIMIT {
        lowest_k_modes_dense(model, x, k, metric)
    } else {
        lowest_k_modes_lobpcg(model, x, k, metric, tol, warm_start)
    }
}

fn make_symmetrized<'a>(
    model: &'a dyn PotentialModel,
    x: &'a StateVector,
    metric: &MetricKind,
) -> Symmetrized<'a> {
    Symmetrized {
        model,
        x: x.values(),
        metric: *metric,
        mean_zero: metric.is_hminus1() || (model.conserves_mass() && !metric.is_hminus1()),
        stabilized: false,
    }
}

/// Dense direct path of [`lowest_k_modes`].
pub fn lowest_k_modes_dense(
    model: &dyn PotentialModel,
    x: &StateVector,
    k: usize,
    metric: &MetricKind,
) -> Result<SpectralInfo> {
    check_dim(model.dim(), x.dim())?;
    if !x.is_finite() {
        return Err(IpmError::NonFinite { context: "lowest_k_modes".into() });
    }
    let sym = make_symmetrized(model, x, metric);
    validate_k(k, sym.effective_dim(), model.dim())?;
    let pairs = dense_pairs(&sym, k)?;
    build_info(&sym, pairs)
}

/// Blocked LOBPCG-style path of [`lowest_k_modes`], for problems above
/// [`DENSE_LIMIT`] unknowns.
pub fn lowest_k_modes_lobpcg(
    model: &dyn PotentialModel,
    x: &StateVector,
    k: usize,
    metric: &MetricKind,
    tol: f64,
    warm_start: Option<&SpectralInfo>,
) -> Result<SpectralInfo> {
    check_dim(model.dim(), x.dim())?;
    if !x.is_finite() {
        return Err(IpmError::NonFinite { context: "lowest_k_modes".into() });
    }
    if tol <= 0.0 {
        return Err(IpmError::InvalidParameter {
            name: "tol",
            message: format!("must be positive, got {tol}"),
        });
    }
    let sym = make_symmetrized(model, x, metric);
    validate_k(k, sym.effective_dim(), model.dim())?;
    let n = sym.n();
    let m = k;

    // Seed block: warm start when available, deterministic ramps otherwise.
    let mut xblock: Vec<Vec<f64>> = Vec::with_capacity(m);
    if let Some(ws) = warm_start {
        for v in ws.eigenvectors.iter().take(m) {
            xblock.push(sym.from_eigenvector(v.values())?);
        }
    }
    let mut seed = 0usize;
    while xblock.len() < m {
        let mut w: Vec<f64> = (0..n)
            .map(|i| {
                let t = (i * (seed + 1)) as f64 * 2.399963 + 0.7 * seed as f64;
                t.sin()
            })
            .collect();
        sym.remove_mean(&mut w);
        xblock.push(w);
        seed += 1;
    }
    orthonormalize(&mut xblock);

    let max_iter = 500;
    let mut prev: Vec<Vec<f64>> = Vec::new();
    let mut best_res = f64::INFINITY;
    for _ in 0..max_iter {
        // Rayleigh-Ritz in span[X, R, P].
        let mut basis: Vec<Vec<f64>> = xblock.clone();
        let mut ax: Vec<Vec<f64>> = Vec::with_capacity(m);
        for w in &xblock {
            let mut aw = vec![0.0; n];
            sym.apply(w, &mut aw)?;
            ax.push(aw);
        }
        let thetas: Vec<f64> = xblock.iter().zip(&ax).map(|(w, aw)| dot(w, aw)).collect();
        let mut converged = true;
        best_res = 0.0f64;
        for ((w, aw), th) in xblock.iter().zip(&ax).zip(&thetas) {
            let r: Vec<f64> = aw.iter().zip(w).map(|(a, wi)| a - th * wi).collect();
            let rnorm = dot(&r, &r).sqrt();
            best_res = best_res.max(rnorm);
            if rnorm > tol * th.abs().max(1.0) {
                converged = false;
            }
            let mut pr = vec![0.0; n];
            sym.precondition(&r, &mut pr)?;
            sym.remove_mean(&mut pr);
            basis.push(pr);
        }
        if converged {
            let pairs: Vec<(f64, Vec<f64>)> =
                thetas.into_iter().zip(xblock.into_iter()).collect();
            let mut pairs = pairs;
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            return build_info(&sym, pairs);
        }
        for p in &prev {
            basis.push(p.clone());
        }
        orthonormalize(&mut basis);
        // Small projected problem.
        let b = basis.len();
        let mut t = DMatrix::<f64>::zeros(b, b);
        let mut abasis: Vec<Vec<f64>> = Vec::with_capacity(b);
        for w in &basis {
            let mut aw = vec![0.0; n];
            sym.apply(w, &mut aw)?;
            abasis.push(aw);
        }
        for i in 0..b {
            for j in i..b {
                let v = dot(&basis[i], &abasis[j]);
                t[(i, j)] = v;
                t[(j, i)] = v;
            }
        }
        let eig = t.symmetric_eigen();
        let mut order: Vec<usize> = (0..b).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
        let mut xnew: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut pnew: Vec<Vec<f64>> = Vec::with_capacity(m);
        for &idx in order.iter().take(m) {
            let c: DVector<f64> = eig.eigenvectors.column(idx).into();
            let mut w = vec![0.0; n];
            let mut p = vec![0.0; n];
            for (bi, (base, coeff)) in basis.iter().zip(c.iter()).enumerate() {
                axpy(*coeff, base, &mut w);
                // The P block: contribution from outside the current X block.
                if bi >= m {
                    axpy(*coeff, base, &mut p);
                }
            }
            xnew.push(w);
            pnew.push(p);
        }
        orthonormalize(&mut xnew);
        let mut pn = pnew;
        orthonormalize(&mut pn);
        xblock = xnew;
        prev = pn;
    }
    Err(IpmError::EigenFailure { residual: best_res, iterations: max_iter })
}

/// Modified Gram-Schmidt with one reorthogonalization pass; drops
/// near-dependent columns.
fn orthonormalize(cols: &mut Vec<Vec<f64>>) {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    for mut v in cols.drain(..) {
        for _ in 0..2 {
            for q in &out {
                let c = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-10 {
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            out.push(v);
        }
    }
    *cols = out;
}

/// The metric-orthogonal projector onto the span of the computed modes:
/// v ↦ Σᵢ ⟨vᵢ, v⟩_m vᵢ. Idempotent and invariant under eigenvector sign
/// flips.
pub struct ModeProjector {
    metric: MetricKind,
    modes: Vec<Vec<f64>>,
    /// L² fields representing ⟨vᵢ, ·⟩_m.
    duals: Vec<Vec<f64>>,
}

pub fn projector(modes: &SpectralInfo) -> Result<ModeProjector> {
    let mut duals = Vec::with_capacity(modes.eigenvectors.len());
    for v in &modes.eigenvectors {
        duals.push(crate::metric::dual_field(&modes.metric, v.values())?);
    }
    Ok(ModeProjector {
        metric: modes.metric,
        modes: modes.eigenvectors.iter().map(|v| v.values().to_vec()).collect(),
        duals,
    })
}

impl ModeProjector {
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let h = self.metric.h();
        let mut out = vec![0.0; v.len()];
        for (mode, dual) in self.modes.iter().zip(&self.duals) {
            let c = h * dot(dual, v);
            axpy(c, mode, &mut out);
        }
        out
    }

    pub fn rank(&self) -> usize {
        self.modes.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::{GinzburgLandau1D, ToyPotential2D};
    use approx::assert_relative_eq;
    use crate::metric::metric_inner;

    fn toy_modes(x: [f64; 2], k: usize) -> SpectralInfo {
        let m = ToyPotential2D;
        let xv = StateVector::new(x.to_vec()).unwrap();
        lowest_k_modes(&m, &xv, k, &MetricKind::euclidean(), 1e-10, None).unwrap()
    }

    #[test]
    fn toy_2x2_matches_closed_form() {
        // Closed-form symmetric 2x2 eigendecomposition as the oracle.
        let m = ToyPotential2D;
        let p = [0.4, -0.7];
        let h = m.hessian(p[0], p[1]);
        let tr = h[0][0] + h[1][1];
        let det = h[0][0] * h[1][1] - h[0][1] * h[0][1];
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        let l1 = tr / 2.0 - disc;
        let l2 = tr / 2.0 + disc;
        let info = toy_modes(p, 2);
        assert_relative_eq!(info.eigenvalues[0], l1, epsilon = 1e-10);
        assert_relative_eq!(info.eigenvalues[1], l2, epsilon = 1e-10);
        // Unit metric norm and orthogonality.
        for v in &info.eigenvectors {
            let n = metric_inner(&info.metric, v.values(), v.values()).unwrap();
            assert_relative_eq!(n, 1.0, epsilon = 1e-10);
        }
        let c = metric_inner(
            &info.metric,
            info.eigenvectors[0].values(),
            info.eigenvectors[1].values(),
        )
        .unwrap();
        assert!(c.abs() < 1e-8);
    }

    #[test]
    fn toy_axis_saddle_is_index_one() {
        let info = toy_modes([0.0, -0.31582655], 2);
        assert!(info.eigenvalues[0] < 0.0);
        assert!(info.eigenvalues[1] > 0.0);
    }

    #[test]
    fn gl_l2_mean_zero_spectrum_at_zero_state() {
        // Mean-zero L² problem at φ ≡ 0: the constant mode is excluded and
        // the lowest pair is the k = 1 Fourier pair with λ = κ²(2π)² - 1.
        let n = 100;
        let gl = GinzburgLandau1D::cahn_hilliard(n, 0.0).unwrap();
        let x = StateVector::new(vec![0.0; n]).unwrap();
        let info =
            lowest_k_modes(&gl, &x, 2, &MetricKind::l2_unit_grid(n), 1e-10, None).unwrap();
        let kappa: f64 = 0.04;
        let expect = kappa * kappa * (2.0 * std::f64::consts::PI).powi(2) - 1.0;
        assert_relative_eq!(info.eigenvalues[0], expect, epsilon = 1e-10);
        assert_relative_eq!(info.eigenvalues[1], expect, epsilon = 1e-10);
        assert!(info.degenerate);
        // The eigenvector lives in the k = 1 Fourier pair: applying the
        // Hessian reproduces λ v.
        let v = &info.eigenvectors[0];
        let mut hv = vec![0.0; n];
        gl.hessian_vp_into(x.values(), v.values(), &mut hv);
        for (a, b) in hv.iter().zip(v.values()) {
            assert_relative_eq!(*a, expect * b, epsilon = 1e-8);
        }
    }

    #[test]
    fn gl_l2_full_space_lowest_is_constant_mode() {
        // Without mass conservation (Allen-Cahn setup) the constant mode
        // with λ = -1 is the true minimum at φ ≡ 0.
        let n = 100;
        let gl = GinzburgLandau1D::allen_cahn(n, 0.0).unwrap();
        let x = StateVector::new(vec![0.0; n]).unwrap();
        let info =
            lowest_k_modes(&gl, &x, 1, &MetricKind::l2_unit_grid(n), 1e-10, None).unwrap();
        assert_relative_eq!(info.eigenvalues[0], -1.0, epsilon = 1e-10);
    }

    #[test]
    fn gl_hminus1_generalized_spectrum_at_zero_state() {
        // H⁻¹ eigenvalues at φ ≡ 0 are ξ²(κ²ξ² - 1); for κ = 0.04 the
        // minimum over modes is attained at k = 3.
        let n = 100;
        let gl = GinzburgLandau1D::cahn_hilliard(n, 0.0).unwrap();
        let x = StateVector::new(vec![0.0; n]).unwrap();
        let m = MetricKind::hminus1_unit_grid(n);
        let info = lowest_k_modes(&gl, &x, 1, &m, 1e-10, None).unwrap();
        let lam = |k: f64| {
            let xi2 = (2.0 * std::f64::consts::PI * k).powi(2);
            xi2 * (0.04f64.powi(2) * xi2 - 1.0)
        };
        assert_relative_eq!(info.eigenvalues[0], lam(3.0), epsilon = 1e-8, max_relative = 1e-9);
        // Unit H⁻¹ norm.
        let v = &info.eigenvectors[0];
        let norm = metric_inner(&m, v.values(), v.values()).unwrap();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn projector_is_idempotent_and_sign_invariant() {
        let n = 64;
        let gl = GinzburgLandau1D::cahn_hilliard(n, 0.0).unwrap();
        let x = StateVector::new(gl.sin_state(0.3, 1, 0.0)).unwrap();
        let m = MetricKind::hminus1_unit_grid(n);
        let mut info = lowest_k_modes(&gl, &x, 2, &m, 1e-10, None).unwrap();
        let proj = projector(&info).unwrap();
        let v: Vec<f64> = {
            let raw: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.711).sin()).collect();
            let mean = raw.iter().sum::<f64>() / n as f64;
            raw.iter().map(|c| c - mean).collect()
        };
        let once = proj.apply(&v);
        let twice = proj.apply(&once);
        for (a, b) in once.iter().zip(&twice) {
            assert_relative_eq!(*a, *b, epsilon = 1e-10);
        }
        // Sign flip of a mode leaves the projector unchanged.
        let flipped: Vec<f64> = info.eigenvectors[0].values().iter().map(|c| -c).collect();
        info.eigenvectors[0] = StateVector::new_unchecked(flipped);
        let proj2 = projector(&info).unwrap();
        let again = proj2.apply(&v);
        for (a, b) in once.iter().zip(&again) {
            assert_relative_eq!(*a, *b, epsilon = 1e-12);
        }
        // Applying the projector to one of its own modes returns the mode.
        let v0 = info.eigenvectors[1].values();
        let back = proj.apply(v0);
        for (a, b) in back.iter().zip(v0) {
            assert_relative_eq!(*a, *b, epsilon = 1e-8);
        }
    }

    #[test]
    fn rank_two_projector_in_2d_is_identity() {
        let info = toy_modes([0.3, 1.2], 2);
        let proj = projector(&info).unwrap();
        for v in [[1.0, 0.0], [0.3, -0.7]] {
            let out = proj.apply(&v);
            for (a, b) in out.iter().zip(&v) {
                assert_relative_eq!(*a, *b, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn k_out_of_range_is_rejected() {
        let m = ToyPotential2D;
        let x = StateVector::new(vec![0.2, 0.3]).unwrap();
        assert!(lowest_k_modes(&m, &x, 0, &MetricKind::euclidean(), 1e-8, None).is_err());
        assert!(lowest_k_modes(&m, &x, 2, &MetricKind::euclidean(), 1e-8, None).is_ok());
        assert!(lowest_k_modes(&m, &x, 3, &MetricKind::euclidean(), 1e-8, None).is_err());
    }

    #[test]
    fn lobpcg_agrees_with_dense() {
        let n = 120;
        let gl = GinzburgLandau1D::new(0.05, n, 0.3, MetricKind::l2_unit_grid(n)).unwrap();
        let x = StateVector::new(gl.sin_state(0.5, 1, 0.3)).unwrap();
        for m in [MetricKind::l2_unit_grid(n), MetricKind::hminus1_unit_grid(n)] {
            let dense = lowest_k_modes_dense(&gl, &x, 3, &m).unwrap();
            let iter = lowest_k_modes_lobpcg(&gl, &x, 3, &m, 1e-6, None).unwrap();
            for (a, b) in dense.eigenvalues.iter().zip(&iter.eigenvalues) {
                assert_relative_eq!(a, b, epsilon = 1e-6, max_relative = 1e-6);
            }
            // Warm-started solve reproduces the same pairs.
            let warm = lowest_k_modes_lobpcg(&gl, &x, 3, &m, 1e-6, Some(&dense)).unwrap();
            for (a, b) in dense.eigenvalues.iter().zip(&warm.eigenvalues) {
                assert_relative_eq!(a, b, epsilon = 1e-7, max_relative = 1e-7);
            }
        }
    }
}
