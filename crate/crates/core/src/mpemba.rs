//! Construction, validation, and perturbation of Mpemba initial states:
//! density matrices with zero weight on the slow decay mode.

use faer::{Mat, c64};

use crate::error::{Error, Result};
use crate::generator::ReducedState;

/// Eigenvalue-negativity tolerance: boundary states are exactly rank
/// deficient, so a strict zero would reject them.
pub const PSD_TOLERANCE: f64 = 1e-12;

/// Default perturbation strength for near-Mpemba states.
pub const DEFAULT_PERTURBATION: f64 = 0.001;

/// A Mpemba initial state: the free mode-2 weight and the full matrix
/// diag(1 - 2(P_inf + c2), P_inf + c2, P_inf + c2) with real 23-entries c2.
#[derive(Debug, Clone)]
pub struct MpembaState {
    pub c2: f64,
    pub rho0: Mat<c64>,
}

impl MpembaState {
    pub fn reduced(&self) -> ReducedState {
        ReducedState::project_v(&self.rho0)
    }
}

/// Admissible interval for the free coefficient, distilled from the
/// normalization, purity, and ground-population constraints:
/// c2_min = (3k - phi - sqrt((5phi - 3k)(phi + k))) / (8 phi), c2_max = k/(2 phi).
pub fn c2_bounds(k: f64, phi: f64) -> (f64, f64) {
    let c2_min = (3.0 * k - phi - ((5.0 * phi - 3.0 * k) * (phi + k)).sqrt()) / (8.0 * phi);
    let c2_max = k / (2.0 * phi);
    (c2_min, c2_max)
}

/// Builds the Mpemba state for a weight inside the admissible interval.
pub fn make_mpemba_state(c2: f64, k: f64, phi: f64) -> Result<MpembaState> {
    let (lo, hi) = c2_bounds(k, phi);
    if c2 < lo {
        return Err(Error::Unphysical(format!(
            "c2 = {c2} below the purity bound {lo}: Tr(rho^2) would exceed 1"
        )));
    }
    if c2 > hi {
        return Err(Error::Unphysical(format!(
            "c2 = {c2} above the positivity bound {hi}: ground population would go negative"
        )));
    }
    let p = (phi - k) / (2.0 * phi) + c2;
    let mut rho0 = Mat::<c64>::zeros(3, 3);
    rho0[(0, 0)] = c64::new(1.0 - 2.0 * p, 0.0);
    rho0[(1, 1)] = c64::new(p, 0.0);
    rho0[(2, 2)] = c64::new(p, 0.0);
    rho0[(1, 2)] = c64::new(c2, 0.0);
    rho0[(2, 1)] = c64::new(c2, 0.0);
    Ok(MpembaState { c2, rho0 })
}

/// sigma_N(0) = sigma_M(0) + eps * c2 (|2><3| + |3><2|): the near-Mpemba
/// state with a small residual weight on the slow mode.
pub fn perturb_state(state: &MpembaState, epsilon: f64) -> Result<Mat<c64>> {
    let mut rho = state.rho0.clone();
    let bump = c64::new(epsilon * state.c2, 0.0);
    rho[(1, 2)] += bump;
    rho[(2, 1)] += bump;
    let report = check_physical(&rho)?;
    if !report.trace_ok() || !report.hermitian_ok() || !report.purity_ok() {
        return Err(Error::Unphysical(format!(
            "perturbed state fails physicality: {report:?}"
        )));
    }
    Ok(rho)
}

/// Report-style physicality check: normalization, Hermiticity, positivity,
/// and purity, each with its measured deviation.
#[derive(Debug, Clone, Copy)]
pub struct PhysicalityReport {
    pub trace_deviation: f64,
    pub hermiticity_deviation: f64,
    pub min_eigenvalue: f64,
    pub purity: f64,
}

impl PhysicalityReport {
    pub fn trace_ok(&self) -> bool {
        self.trace_deviation < 1e-9
    }
    pub fn hermitian_ok(&self) -> bool {
        self.hermiticity_deviation < 1e-9
    }
    pub fn positive_ok(&self) -> bool {
        self.min_eigenvalue >= -PSD_TOLERANCE
    }
    pub fn purity_ok(&self) -> bool {
        self.purity <= 1.0 + 1e-12
    }
    pub fn all_ok(&self) -> bool {
        self.trace_ok() && self.hermitian_ok() && self.positive_ok() && self.purity_ok()
    }
}

pub fn check_physical(rho: &Mat<c64>) -> Result<PhysicalityReport> {
    let n = rho.nrows();
    if rho.ncols() != n {
        return Err(Error::DimensionMismatch("density matrix must be square".into()));
    }
    let mut trace = c64::new(0.0, 0.0);
    let mut herm_dev = 0.0f64;
    for i in 0..n {
        trace += rho[(i, i)];
        for j in 0..n {
            herm_dev = herm_dev.max((rho[(i, j)] - rho[(j, i)].conj()).norm());
        }
    }
    // eigenvalues of the Hermitian part
    let herm = Mat::<c64>::from_fn(n, n, |i, j| (rho[(i, j)] + rho[(j, i)].conj()) * 0.5);
    let evd = herm
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Eigendecomposition(format!("{e:?}")))?;
    let min_eigenvalue = (0..n).map(|i| evd.S()[i].re).fold(f64::INFINITY, f64::min);
    let purity: f64 = (0..n).map(|i| evd.S()[i].re * evd.S()[i].re).sum();
    Ok(PhysicalityReport {
        trace_deviation: (trace - c64::new(1.0, 0.0)).norm(),
        hermiticity_deviation: herm_dev,
        min_eigenvalue,
        purity,
    })
}

/// Plain-text export: one row per line, each entry as "re im", 17
/// significant digits.
pub fn matrix_to_text(m: &Mat<c64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:.16e} {:.16e}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parses the `matrix_to_text` format (comment lines starting with '#' are
/// skipped). The matrix must be square.
pub fn matrix_from_text(text: &str) -> Result<Mat<c64>> {
    let mut rows: Vec<Vec<c64>> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| Error::InvalidParameter(format!("bad matrix entry {t:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        if nums.len() % 2 != 0 {
            return Err(Error::InvalidParameter(
                "matrix rows need an even count of numbers (re im pairs)".into(),
            ));
        }
        rows.push(nums.chunks(2).map(|p| c64::new(p[0], p[1])).collect());
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("matrix text must be square and nonempty".into()));
    }
    Ok(Mat::from_fn(n, n, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{build_reduced, gibbs_state};
    use crate::lepe::{SolveMode, build_coefficient_system, lepe_spectrum, solve_coefficients};
    use crate::model::{BathSpec, Rates, SystemSpec, VModelParams, v_rates};
    use approx::assert_relative_eq;

    fn canonical() -> Rates {
        let params = VModelParams::new(1.0, 1e-4).unwrap();
        let bath = BathSpec::new(2.0, 0.005).unwrap();
        v_rates(&params, &bath).unwrap()
    }

    #[test]
    fn bounds_canonical_values() {
        let Rates { k, phi } = canonical();
        let (lo, hi) = c2_bounds(k, phi);
        assert_relative_eq!(lo, -0.2431, epsilon = 5e-5);
        assert_relative_eq!(hi, 0.2259, epsilon = 5e-5);
        assert!(lo < 0.0 && 0.0 < hi);
    }

    #[test]
    fn bound_limits() {
        // phi -> k (T -> 0): c2_max -> 1/2
        let k = 0.01;
        let (_, hi) = c2_bounds(k, k * (1.0 + 1e-12));
        assert_relative_eq!(hi, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn state_construction_and_projection() {
        let Rates { k, phi } = canonical();
        let s = make_mpemba_state(-0.24, k, phi).unwrap();
        assert_relative_eq!(s.rho0[(0, 0)].re, 0.9318510, epsilon = 2e-5);
        assert_relative_eq!(s.rho0[(1, 1)].re, 0.0340745, epsilon = 1e-5);
        assert_relative_eq!(s.rho0[(2, 2)].re, 0.0340745, epsilon = 1e-5);
        assert_relative_eq!(s.rho0[(1, 2)].re, -0.24);
        // storage relation: sigma32_R(0) = P(0) - P_inf
        let red = s.reduced();
        let p_inf = (phi - k) / (2.0 * phi);
        assert_relative_eq!(red.coh_re, red.p - p_inf, max_relative = 1e-12);
        // c2 = 0: the clustered equilibrium, dynamics constant
        let eq = make_mpemba_state(0.0, k, phi).unwrap();
        let gen = build_reduced(1e-4, canonical());
        let ss = gen.steady_state().unwrap();
        assert_relative_eq!(eq.reduced().p, ss.p, max_relative = 1e-7);
    }

    #[test]
    fn out_of_bounds_rejected_with_named_condition() {
        let Rates { k, phi } = canonical();
        let (lo, hi) = c2_bounds(k, phi);
        match make_mpemba_state(lo - 1e-3, k, phi) {
            Err(Error::Unphysical(msg)) => assert!(msg.contains("purity"), "{msg}"),
            other => panic!("expected purity rejection, got {other:?}"),
        }
        match make_mpemba_state(hi + 1e-3, k, phi) {
            Err(Error::Unphysical(msg)) => assert!(msg.contains("positivity"), "{msg}"),
            other => panic!("expected positivity rejection, got {other:?}"),
        }
    }

    #[test]
    fn bounds_saturate_their_constraints() {
        let Rates { k, phi } = canonical();
        let (lo, hi) = c2_bounds(k, phi);
        // upper bound: ground population hits zero exactly
        let s = make_mpemba_state(hi, k, phi).unwrap();
        let r = check_physical(&s.rho0).unwrap();
        assert!(s.rho0[(0, 0)].re.abs() < 1e-12);
        assert!(r.purity <= 1.0 + 1e-12);
        // lower bound: purity hits one exactly
        let s = make_mpemba_state(lo, k, phi).unwrap();
        let r = check_physical(&s.rho0).unwrap();
        assert_relative_eq!(r.purity, 1.0, epsilon = 1e-10);
        // just beyond the upper bound, positivity is the (single) failure
        let p = (phi - k) / (2.0 * phi) + hi + 1e-3;
        let mut rho = Mat::<c64>::zeros(3, 3);
        rho[(0, 0)] = c64::new(1.0 - 2.0 * p, 0.0);
        rho[(1, 1)] = c64::new(p, 0.0);
        rho[(2, 2)] = c64::new(p, 0.0);
        rho[(1, 2)] = c64::new(hi + 1e-3, 0.0);
        rho[(2, 1)] = c64::new(hi + 1e-3, 0.0);
        let r = check_physical(&rho).unwrap();
        assert!(!r.positive_ok());
        assert!(r.trace_ok() && r.hermitian_ok() && r.purity_ok());
    }

    #[test]
    fn mpemba_states_have_no_slow_component() {
        let rates = canonical();
        let gen = build_reduced(1e-4, rates);
        let spectrum = lepe_spectrum(&gen).unwrap();
        let (lo, hi) = c2_bounds(rates.k, rates.phi);
        for frac in [0.1, 0.5, 0.9] {
            let c2 = lo + frac * (hi - lo);
            let state = make_mpemba_state(c2, rates.k, rates.phi).unwrap();
            let red = state.reduced();
            for i in 0..3 {
                let sys =
                    build_coefficient_system(&gen, &spectrum, i, SolveMode::DeltaZeroLimit).unwrap();
                let c = solve_coefficients(&sys, &red).unwrap();
                assert!(c[0].abs() < 10.0 * gen.delta, "c2={c2} element {i}: {}", c[0]);
            }
        }
    }

    #[test]
    fn perturbation_behaviour() {
        let Rates { k, phi } = canonical();
        let s = make_mpemba_state(-0.24, k, phi).unwrap();
        // eps = 0 is the identity
        let same = perturb_state(&s, 0.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(same[(i, j)], s.rho0[(i, j)]);
            }
        }
        // default strength shifts the 23-entry to -0.24024
        let p = perturb_state(&s, DEFAULT_PERTURBATION).unwrap();
        assert_relative_eq!(p[(1, 2)].re, -0.24024, epsilon = 1e-12);
        // the perturbed state regains a small slow-mode weight ~ eps * c2
        let gen = build_reduced(1e-4, canonical());
        let spectrum = lepe_spectrum(&gen).unwrap();
        let sys = build_coefficient_system(&gen, &spectrum, 1, SolveMode::DeltaZeroLimit).unwrap();
        let c = solve_coefficients(&sys, &ReducedState::project_v(&p)).unwrap();
        let scale = (DEFAULT_PERTURBATION * 0.24).abs();
        assert!(c[0].abs() > 0.01 * scale && c[0].abs() < 10.0 * scale, "c1 = {}", c[0]);
    }

    #[test]
    fn physicality_report_cases() {
        let params = VModelParams::new(1.0, 1e-4).unwrap();
        let system = SystemSpec::v_model(&params, 1);
        let gibbs = gibbs_state(&system, 2.0).unwrap();
        assert!(check_physical(&gibbs).unwrap().all_ok());
        let mut bad = Mat::<c64>::zeros(3, 3);
        bad[(0, 0)] = c64::new(1.2, 0.0);
        bad[(1, 1)] = c64::new(-0.1, 0.0);
        bad[(2, 2)] = c64::new(-0.1, 0.0);
        let r = check_physical(&bad).unwrap();
        assert!(!r.positive_ok());
        assert!(r.trace_ok());
    }

    #[test]
    fn text_round_trip() {
        let Rates { k, phi } = canonical();
        let s = make_mpemba_state(0.1, k, phi).unwrap();
        let text = matrix_to_text(&s.rho0);
        let back = matrix_from_text(&text).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(back[(i, j)], s.rho0[(i, j)]);
            }
        }
        assert!(matrix_from_text("1 0 2 0\n").is_err());
        assert!(matrix_from_text("").is_err());
        assert!(matrix_from_text("x y\n").is_err());
    }
}
