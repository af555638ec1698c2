//! System and bath specifications, and the bath-induced rate constants for
//! the V model, the Lambda model, and their multi-bath extensions.
//!
//! Natural units throughout: hbar = k_B = 1 and all energies are quoted
//! relative to the gap frequency `nu`.

use faer::Mat;

use crate::error::{Error, Result};

/// Below this ratio of `delta / nu` the quasi-degenerate approximation is
/// considered well inside its validity regime.
pub const DEFAULT_VALIDITY_THRESHOLD: f64 = 1e-2;

/// Weak-coupling warning threshold on the dimensionless Ohmic prefactor.
pub const WEAK_COUPLING_THRESHOLD: f64 = 0.05;

/// Level energies and bath-coupling operators of an N-level system.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    /// Level energies, sorted non-decreasing; the ground level may sit at zero.
    pub energies: Vec<f64>,
    /// One real symmetric coupling operator per bath, in the energy basis.
    pub couplings: Vec<Mat<f64>>,
    pub labels: Vec<String>,
}

impl SystemSpec {
    pub fn new(energies: Vec<f64>, couplings: Vec<Mat<f64>>, labels: Vec<String>) -> Result<Self> {
        let n = energies.len();
        if n < 2 {
            return Err(Error::InvalidParameter("need at least two levels".into()));
        }
        if energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter(
                "energies must be sorted non-decreasing".into(),
            ));
        }
        if labels.len() != n {
            return Err(Error::InvalidParameter("one label per level".into()));
        }
        for s in &couplings {
            if s.nrows() != n || s.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "coupling operator must be {n}x{n}"
                )));
            }
            for i in 0..n {
                for j in 0..i {
                    if (s[(i, j)] - s[(j, i)]).abs() > 1e-14 {
                        return Err(Error::InvalidParameter(
                            "coupling operator must be symmetric".into(),
                        ));
                    }
                }
            }
        }
        Ok(Self { energies, couplings, labels })
    }

    /// Ground state plus two quasi-degenerate excited levels, both coupled to
    /// the ground state through each of `n_baths` identical channels.
    pub fn v_model(params: &VModelParams, n_baths: usize) -> Self {
        let mut s = Mat::<f64>::zeros(3, 3);
        s[(0, 1)] = 1.0;
        s[(1, 0)] = 1.0;
        s[(0, 2)] = 1.0;
        s[(2, 0)] = 1.0;
        Self {
            energies: vec![0.0, params.nu - params.delta, params.nu],
            couplings: vec![s; n_baths.max(1)],
            labels: vec!["1".into(), "2".into(), "3".into()],
        }
    }

    /// Mirror configuration: two quasi-degenerate low levels and a single
    /// excited level reachable from both.
    pub fn lambda_model(params: &VModelParams, n_baths: usize) -> Self {
        let mut s = Mat::<f64>::zeros(3, 3);
        s[(0, 2)] = 1.0;
        s[(2, 0)] = 1.0;
        s[(1, 2)] = 1.0;
        s[(2, 1)] = 1.0;
        Self {
            energies: vec![0.0, params.delta, params.nu],
            couplings: vec![s; n_baths.max(1)],
            labels: vec!["1".into(), "2".into(), "3".into()],
        }
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }
}

/// Parameters of the quasi-degenerate excited manifold.
#[derive(Debug, Clone, Copy)]
pub struct VModelParams {
    /// Excited-manifold energy.
    pub nu: f64,
    /// Splitting between the two excited levels; must stay well below `nu`.
    pub delta: f64,
}

impl VModelParams {
    pub fn new(nu: f64, delta: f64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::InvalidParameter("nu must be positive".into()));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(
                "delta must be strictly positive (L is singular at delta = 0)".into(),
            ));
        }
        if delta >= nu {
            return Err(Error::InvalidParameter("delta must be below nu".into()));
        }
        Ok(Self { nu, delta })
    }

    /// True when `delta / nu` exceeds the quasi-degeneracy threshold, i.e.
    /// the perturbative treatment is leaving its validity regime.
    pub fn validity_warning(&self, threshold: f64) -> bool {
        self.delta / self.nu > threshold
    }
}

/// Ohmic bath at a fixed temperature.
#[derive(Debug, Clone, Copy)]
pub struct BathSpec {
    /// Bath temperature (k_B = 1).
    pub temperature: f64,
    /// Dimensionless Ohmic prefactor.
    pub gamma: f64,
    /// High-frequency cutoff; infinite by default.
    pub omega_c: f64,
}

impl BathSpec {
    pub fn new(temperature: f64, gamma: f64) -> Result<Self> {
        Self::with_cutoff(temperature, gamma, f64::INFINITY)
    }

    pub fn with_cutoff(temperature: f64, gamma: f64, omega_c: f64) -> Result<Self> {
        if !(temperature > 0.0) {
            return Err(Error::InvalidParameter("temperature must be positive".into()));
        }
        if !(gamma > 0.0) {
            return Err(Error::InvalidParameter("gamma must be positive".into()));
        }
        if !(omega_c > 0.0) {
            return Err(Error::InvalidParameter("omega_c must be positive".into()));
        }
        Ok(Self { temperature, gamma, omega_c })
    }

    /// True when the coupling is too strong for the weak-coupling treatment.
    pub fn weak_coupling_warning(&self) -> bool {
        self.gamma > WEAK_COUPLING_THRESHOLD
    }
}

/// Ohmic spectral density J(omega) = gamma * omega * exp(-omega / omega_c).
pub fn spectral_density(omega: f64, bath: &BathSpec) -> Result<f64> {
    if omega < 0.0 {
        return Err(Error::Domain(format!(
            "spectral density requires omega >= 0, got {omega}"
        )));
    }
    if omega == 0.0 {
        return Ok(0.0);
    }
    Ok(bath.gamma * omega * (-omega / bath.omega_c).exp())
}

/// Bose-Einstein occupation 1 / (exp(omega / T) - 1).
pub fn bose_einstein(omega: f64, temperature: f64) -> Result<f64> {
    if omega <= 0.0 {
        return Err(Error::Domain(format!(
            "Bose-Einstein occupation diverges for omega <= 0, got {omega}"
        )));
    }
    if temperature <= 0.0 {
        return Err(Error::Domain(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    Ok(1.0 / ((omega / temperature).exp_m1()))
}

/// Downhill rate constant k(omega) = 2 J(omega) [n_B(omega) + 1], evaluated
/// at the clustered manifold frequency `nu`.
pub fn rate_k(params: &VModelParams, bath: &BathSpec) -> Result<f64> {
    let j = spectral_density(params.nu, bath)?;
    let n = bose_einstein(params.nu, bath.temperature)?;
    Ok(2.0 * j * (n + 1.0))
}

/// phi = (1 + 2 exp(-nu / T)) k, the composite relaxation rate of the
/// symmetric excited sector.
pub fn phi_rate(k: f64, nu: f64, temperature: f64) -> f64 {
    (1.0 + 2.0 * (-nu / temperature).exp()) * k
}

/// The (k, phi) pair that fully parametrizes the reduced dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub k: f64,
    pub phi: f64,
}

impl Rates {
    pub fn new(k: f64, phi: f64) -> Result<Self> {
        if !(k > 0.0) || !(phi > 0.0) {
            return Err(Error::InvalidParameter("rates must be positive".into()));
        }
        Ok(Self { k, phi })
    }
}

/// Reduced rates of the V model for a single bath.
pub fn v_rates(params: &VModelParams, bath: &BathSpec) -> Result<Rates> {
    let k = rate_k(params, bath)?;
    Ok(Rates { k, phi: phi_rate(k, params.nu, bath.temperature) })
}

/// Reduced rates of the Lambda model: the V-model engine runs unchanged
/// under k -> k exp(-nu/T) and phi -> (2 + exp(-nu/T)) k, with the coherence
/// slot reinterpreted as sigma_12 and P as (sigma_11 + sigma_22)/2.
pub fn lambda_rates(params: &VModelParams, bath: &BathSpec) -> Result<Rates> {
    let k = rate_k(params, bath)?;
    let boltzmann = (-params.nu / bath.temperature).exp();
    Ok(Rates { k: k * boltzmann, phi: (2.0 + boltzmann) * k })
}

/// Multi-bath rates: the Redfield dissipators add, so (k, phi) are plain sums
/// over the per-bath contributions and the single-bath reduced form carries
/// over unchanged.
pub fn aggregate_baths(params: &VModelParams, baths: &[BathSpec]) -> Result<Rates> {
    aggregate_with(params, baths, v_rates)
}

/// Same additivity for the Lambda model.
pub fn aggregate_lambda_baths(params: &VModelParams, baths: &[BathSpec]) -> Result<Rates> {
    aggregate_with(params, baths, lambda_rates)
}

fn aggregate_with(
    params: &VModelParams,
    baths: &[BathSpec],
    per_bath: impl Fn(&VModelParams, &BathSpec) -> Result<Rates>,
) -> Result<Rates> {
    if baths.is_empty() {
        return Err(Error::InvalidParameter("need at least one bath".into()));
    }
    let mut k = 0.0;
    let mut phi = 0.0;
    for bath in baths {
        let r = per_bath(params, bath)?;
        k += r.k;
        phi += r.phi;
    }
    Ok(Rates { k, phi })
}
