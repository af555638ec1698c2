//! Closed-form V-model relaxation curves, quasi-equilibrium plateaus, and
//! the timescale bookkeeping behind them.

use crate::error::{Error, Result};
use crate::generator::ReducedState;
use crate::lepe::LepeSpectrum;
use crate::model::Rates;

/// Which preparation a closed form describes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticKind {
    GroundStatePrep,
    MpembaPrep { c2: f64 },
}

/// A directly evaluable two-mode solution with its parameters and the two
/// relevant timescales.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticSolution {
    pub kind: AnalyticKind,
    pub rates: Rates,
    pub delta: f64,
    /// 1/|lambda_1|: the slow coherence-decay time.
    pub tau1: f64,
    /// 1/|lambda_2| = 1/(phi + k): the fast dissipative time.
    pub tau2: f64,
}

impl AnalyticSolution {
    pub fn ground_prep(rates: Rates, delta: f64) -> Result<Self> {
        Self::build(AnalyticKind::GroundStatePrep, rates, delta)
    }

    pub fn mpemba_prep(rates: Rates, delta: f64, c2: f64) -> Result<Self> {
        Self::build(AnalyticKind::MpembaPrep { c2 }, rates, delta)
    }

    fn build(kind: AnalyticKind, rates: Rates, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter("splitting must be positive".into()));
        }
        let Rates { k, phi } = rates;
        let (tau1, tau2, _) = timescale_values(k, phi, delta);
        Ok(Self { kind, rates, delta, tau1, tau2 })
    }

    /// Evaluates the reduced state at time t.
    pub fn eval(&self, t: f64) -> ReducedState {
        let Rates { k, phi } = self.rates;
        match self.kind {
            AnalyticKind::GroundStatePrep => ReducedState::new(
                population_ground_prep(t, k, phi, self.delta),
                coherence_ground_prep(t, k, phi, self.delta),
                0.0,
            ),
            AnalyticKind::MpembaPrep { c2 } => mpemba_trajectory(t, c2, k, phi),
        }
    }
}

/// sigma32_R(t) after ground-state preparation:
/// (phi-k)/(2(phi+k)) [exp(lambda_1 t) - exp(-(phi+k) t)].
pub fn coherence_ground_prep(t: f64, k: f64, phi: f64, delta: f64) -> f64 {
    let lambda1 = -phi * delta * delta / (k * (k + phi));
    (phi - k) / (2.0 * (phi + k)) * ((lambda1 * t).exp() - (-(phi + k) * t).exp())
}

/// P(t) after ground-state preparation:
/// (phi-k)/(2 phi) - (phi-k)/(2(phi+k)) [(k/phi) exp(lambda_1 t) + exp(-(phi+k) t)].
pub fn population_ground_prep(t: f64, k: f64, phi: f64, delta: f64) -> f64 {
    let lambda1 = -phi * delta * delta / (k * (k + phi));
    (phi - k) / (2.0 * phi)
        - (phi - k) / (2.0 * (phi + k))
            * ((k / phi) * (lambda1 * t).exp() + (-(phi + k) * t).exp())
}

/// Single-mode Mpemba relaxation: the entire transient decays at (phi + k).
pub fn mpemba_trajectory(t: f64, c2: f64, k: f64, phi: f64) -> ReducedState {
    let fast = c2 * (-(phi + k) * t).exp();
    ReducedState::new(fast + (phi - k) / (2.0 * phi), fast, 0.0)
}

/// Height of the quasi-equilibrium plateau shared by the ground-prep
/// coherence and the prethermalized population excess:
/// (phi-k)/(2(phi+k)) = e^{-nu/T} / (2(1 + e^{-nu/T})).
pub fn plateau_value(k: f64, phi: f64) -> f64 {
    (phi - k) / (2.0 * (phi + k))
}

/// Same plateau straight from the temperature.
pub fn plateau_value_thermal(nu: f64, temperature: f64) -> f64 {
    let b = (-nu / temperature).exp();
    b / (2.0 * (1.0 + b))
}

/// Geometric midpoint of the window tau2 << t << tau1, the concrete sampling
/// rule for plateau measurements: sqrt(10 tau2 * tau1/10) = sqrt(tau1 tau2).
pub fn plateau_window(tau1: f64, tau2: f64) -> (f64, f64, f64) {
    let lo = 10.0 * tau2;
    let hi = tau1 / 10.0;
    (lo, hi, (lo * hi).sqrt())
}

/// (tau1, tau2, acceleration factor tau1/tau2).
pub fn timescale_values(k: f64, phi: f64, delta: f64) -> (f64, f64, f64) {
    let tau1 = k * (k + phi) / (phi * delta * delta);
    let tau2 = 1.0 / (k + phi);
    (tau1, tau2, tau1 / tau2)
}

/// Timescales read off a computed spectrum, including the third one
/// (1/k) that never appears in the closed forms.
pub struct Timescales {
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub acceleration: f64,
}

pub fn timescales(spectrum: &LepeSpectrum) -> Timescales {
    let tau1 = spectrum.timescale(0);
    let tau2 = spectrum.timescale(1);
    let tau3 = spectrum.timescale(2);
    Timescales { tau1, tau2, tau3, acceleration: tau1 / tau2 }
}
