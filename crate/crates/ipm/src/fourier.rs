//! Spectral differentiation on a uniform periodic grid.
//!
//! All periodic-grid differential operators in the crate go through this
//! module: the Laplacian, its inverse on mean-zero fields, and the square
//! root `(-Δ)^{1/2}` used to symmetrize the H⁻¹ eigenproblem. Derivatives
//! are exact for resolvable Fourier modes, so the discrete Laplacian
//! annihilates constants to rounding accuracy and mass is conserved
//! exactly by any flow that is wrapped in `Δ`.

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

static PLANNER: Lazy<Mutex<FftPlanner<f64>>> = Lazy::new(|| Mutex::new(FftPlanner::new()));

thread_local! {
    static SCRATCH: RefCell<HashMap<usize, Vec<Complex64>>> = RefCell::new(HashMap::new());
}

/// FFT plans plus wavenumber tables for one grid size.
#[derive(Clone)]
pub struct SpectralGrid {
    n: usize,
    h: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Squared wavenumbers ξ_k² = (2π k̃ / L)², k̃ the signed mode index.
    xi2: Vec<f64>,
    /// Signed wavenumbers ξ_k (for first derivatives).
    xi: Vec<f64>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("n", &self.n)
            .field("h", &self.h)
            .finish()
    }
}

impl SpectralGrid {
    /// Grid of `n` points with spacing `h` on a periodic domain of length `n*h`.
    pub fn new(n: usize, h: f64) -> Self {
        let (forward, inverse) = {
            let mut planner = PLANNER.lock().unwrap();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        };
        let length = n as f64 * h;
        let mut xi = vec![0.0; n];
        let mut xi2 = vec![0.0; n];
        for (k, (x, x2)) in xi.iter_mut().zip(xi2.iter_mut()).enumerate() {
            let signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            let w = 2.0 * std::f64::consts::PI * signed / length;
            *x = w;
            *x2 = w * w;
        }
        Self { n, h, forward, inverse, xi2, xi }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    fn with_buffers<R>(&self, f: impl FnOnce(&mut [Complex64]) -> R, input: &[f64]) -> R {
        assert_eq!(input.len(), self.n);
        SCRATCH.with(|s| {
            let mut map = s.borrow_mut();
            let buf = map.entry(self.n).or_insert_with(|| vec![Complex64::default(); self.n]);
            for (b, v) in buf.iter_mut().zip(input) {
                *b = Complex64::new(*v, 0.0);
            }
            f(buf)
        })
    }

    /// Apply a Fourier multiplier `m(k)` to `u` and write the real part to `out`.
    fn apply_multiplier(&self, u: &[f64], out: &mut [f64], m: impl Fn(usize) -> Complex64) {
        let scale = 1.0 / self.n as f64;
        self.with_buffers(
            |buf| {
                self.forward.process(buf);
                for (k, b) in buf.iter_mut().enumerate() {
                    *b *= m(k) * scale;
                }
                self.inverse.process(buf);
                for (o, b) in out.iter_mut().zip(buf.iter()) {
                    *o = b.re;
                }
            },
            u,
        );
    }

    /// Δu (periodic, spectral).
    pub fn laplacian(&self, u: &[f64], out: &mut [f64]) {
        self.apply_multiplier(u, out, |k| Complex64::new(-self.xi2[k], 0.0));
    }

    /// du/dx (periodic, spectral).
    pub fn derivative(&self, u: &[f64], out: &mut [f64]) {
        let n = self.n;
        self.apply_multiplier(u, out, |k| {
            // Zero the unpaired Nyquist mode so the derivative of a real
            // field stays real.
            if n % 2 == 0 && k == n / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, self.xi[k])
            }
        });
    }

    /// (-Δ)⁻¹ u on mean-zero fields; the k=0 mode is annihilated.
    pub fn inv_neg_laplacian(&self, u: &[f64], out: &mut [f64]) {
        self.apply_multiplier(u, out, |k| {
            if k == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0 / self.xi2[k], 0.0)
            }
        });
    }

    /// (-Δ)^{1/2} u; the k=0 mode is annihilated.
    pub fn sqrt_neg_laplacian(&self, u: &[f64], out: &mut [f64]) {
        self.apply_multiplier(u, out, |k| Complex64::new(self.xi2[k].sqrt(), 0.0));
    }

    /// (-Δ)^{-1/2} u on mean-zero fields; the k=0 mode is annihilated.
    pub fn inv_sqrt_neg_laplacian(&self, u: &[f64], out: &mut [f64]) {
        self.apply_multiplier(u, out, |k| {
            if k == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0 / self.xi2[k].sqrt(), 0.0)
            }
        });
    }

    pub fn xi2(&self) -> &[f64] {
        &self.xi2
    }

    /// Forward DFT of a real field (unnormalized rustfft convention).
    pub fn forward_spectrum(&self, u: &[f64]) -> Vec<Complex64> {
        assert_eq!(u.len(), self.n);
        let mut buf: Vec<Complex64> = u.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse DFT, real part, with the 1/n normalization.
    pub fn inverse_spectrum(&self, spec: &[Complex64], out: &mut [f64]) {
        assert_eq!(spec.len(), self.n);
        let mut buf = spec.to_vec();
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        for (o, b) in out.iter_mut().zip(&buf) {
            *o = b.re * scale;
        }
    }
}
