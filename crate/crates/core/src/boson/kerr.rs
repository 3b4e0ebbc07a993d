//! Single-mode Kerr oscillator `H = ω a†a + χ a†a†aa` in the positive-P
//! representation.
//!
//! With `χ = ½` (the default) time is measured in units where the
//! equations read
//!
//! ```text
//!  i dα/dτ = [βα + ω + √i ζ₁] α
//! −i dβ/dτ = [βα + ω + √−i ζ₂] β
//! ```
//!
//! The [`KerrGauge::RealPart`] preset replaces `βα` by `Re[βα]` in the
//! drift and compensates through the weight `dΩ = Ω (g₁ζ₁ + g₂ζ₂)`.

use std::fmt;
use std::sync::Arc;

use crate::ensemble::{Ensemble, PhasePoint, C64};
use crate::error::{invalid, Result};
use crate::sde::SdeProblem;

const I: C64 = C64::new(0.0, 1.0);

pub type GaugeFn = dyn Fn(C64, C64) -> [C64; 2] + Send + Sync;

/// Stochastic gauge for the Kerr oscillator.
#[derive(Clone, Default)]
pub enum KerrGauge {
    /// `g₁ = g₂ = 0`.
    #[default]
    None,
    /// The drift gauge that turns `βα` into `Re[βα]` in the drift.
    RealPart,
    /// User-supplied `(α, β) → [g₁, g₂]`.
    Custom(Arc<GaugeFn>),
}

impl fmt::Debug for KerrGauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KerrGauge::None => f.write_str("None"),
            KerrGauge::RealPart => f.write_str("RealPart"),
            KerrGauge::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Gauge pair that replaces `n = βα` by `Re n` in the nonlinear drift,
/// for noise coefficients `√(−2iχ) α` and `√(2iχ) β`.
pub(crate) fn real_part_gauge(chi: f64, n: C64) -> [C64; 2] {
    if chi == 0.0 {
        return [C64::new(0.0, 0.0); 2];
    }
    let im = n.im;
    [
        2.0 * chi * im / (-2.0 * I * chi).sqrt(),
        -2.0 * chi * im / (2.0 * I * chi).sqrt(),
    ]
}

#[derive(Clone, Debug)]
pub struct KerrProblem {
    pub omega: f64,
    pub chi: f64,
    pub n_mean: f64,
    pub gauge: KerrGauge,
    /// When `false` only the linear rotation `ω` remains (no `βα` drift
    /// and no noise).
    pub nonlinear: bool,
}

impl KerrProblem {
    pub fn new(omega: f64, n_mean: f64, gauge: KerrGauge) -> Result<Self> {
        if !(n_mean > 0.0) || !n_mean.is_finite() {
            return Err(invalid(format!("n_mean must be positive, got {n_mean}")));
        }
        Ok(Self {
            omega,
            chi: 0.5,
            n_mean,
            gauge,
            nonlinear: true,
        })
    }

    pub fn with_chi(mut self, chi: f64) -> Self {
        self.chi = chi;
        self
    }

    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn initial_point(&self) -> PhasePoint {
        PhasePoint::coherent(&[C64::new(self.n_mean.sqrt(), 0.0)])
    }

    pub fn initial_ensemble(&self, count: usize, seed: u64) -> Result<Ensemble<PhasePoint>> {
        Ensemble::replicate(self.initial_point(), count, seed)
    }

    /// Exact `⟨â(t)⟩ = α e^{−iωt} exp(|α|²(e^{−2iχt} − 1))` for the coherent start.
    pub fn exact_mean_amplitude(&self, t: f64) -> C64 {
        let alpha = self.n_mean.sqrt();
        let kerr = if self.nonlinear {
            (self.n_mean * ((-2.0 * I * self.chi * t).exp() - 1.0)).exp()
        } else {
            C64::new(1.0, 0.0)
        };
        alpha * (-I * self.omega * t).exp() * kerr
    }

    fn gauge_pair(&self, alpha: C64, beta: C64) -> Option<[C64; 2]> {
        match &self.gauge {
            KerrGauge::None => None,
            KerrGauge::RealPart => Some(real_part_gauge(self.chi, beta * alpha)),
            KerrGauge::Custom(f) => Some(f(alpha, beta)),
        }
    }
}

/// Builds an initial-ensemble-ready Kerr problem.
pub fn kerr_problem(omega: f64, n_mean: f64, gauge: KerrGauge) -> Result<KerrProblem> {
    KerrProblem::new(omega, n_mean, gauge)
}

impl SdeProblem for KerrProblem {
    fn dimension(&self) -> usize {
        2
    }

    fn noise_count(&self) -> usize {
        2
    }

    fn drift(&self, s: &[C64], out: &mut [C64]) {
        let (a, b) = (s[0], s[1]);
        let nl = if self.nonlinear { 2.0 * self.chi * b * a } else { C64::new(0.0, 0.0) };
        out[0] = -I * (self.omega + nl) * a;
        out[1] = I * (self.omega + nl) * b;
    }

    fn diffusion(&self, s: &[C64], v: &[C64], out: &mut [C64]) {
        if !self.nonlinear {
            out[0] = C64::new(0.0, 0.0);
            out[1] = C64::new(0.0, 0.0);
            return;
        }
        out[0] = (-2.0 * I * self.chi).sqrt() * s[0] * v[0];
        out[1] = (2.0 * I * self.chi).sqrt() * s[1] * v[1];
    }

    fn gauge(&self, s: &[C64], out: &mut [C64]) -> bool {
        if !self.nonlinear {
            return false;
        }
        match self.gauge_pair(s[0], s[1]) {
            Some(g) => {
                out[..2].copy_from_slice(&g);
                true
            }
            None => false,
        }
    }
}
