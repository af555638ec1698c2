//! Dynamical generators: the reduced 3-dimensional affine system for the
//! quasi-degenerate excited sector, and the full nonsecular Redfield
//! superoperator used as the numerical oracle.

use faer::linalg::solvers::Solve;
use faer::{Mat, c64};

use crate::error::{Error, Result};
use crate::model::{BathSpec, Rates, SystemSpec, bose_einstein, spectral_density};

/// Reduced state of the V model: mean excited population and the 3-2
/// coherence, in the basis (P, sigma32_R, sigma32_I).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub p: f64,
    pub coh_re: f64,
    pub coh_im: f64,
}

impl ReducedState {
    pub fn new(p: f64, coh_re: f64, coh_im: f64) -> Self {
        Self { p, coh_re, coh_im }
    }

    /// Ground-state preparation: empty excited manifold, no coherence.
    pub fn ground() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    /// Maximally mixed preparation (1/3 population in each level).
    pub fn maximally_mixed() -> Self {
        Self::new(1.0 / 3.0, 0.0, 0.0)
    }

    pub fn to_vector(&self) -> [f64; 3] {
        [self.p, self.coh_re, self.coh_im]
    }

    pub fn from_vector(x: [f64; 3]) -> Self {
        Self::new(x[0], x[1], x[2])
    }

    /// Lift to a full 3x3 density matrix, assuming the symmetric excited
    /// sector (sigma_22 = sigma_33 = P) the reduction is valid for.
    pub fn lift(&self) -> Mat<c64> {
        let mut rho = Mat::<c64>::zeros(3, 3);
        rho[(0, 0)] = c64::new(1.0 - 2.0 * self.p, 0.0);
        rho[(1, 1)] = c64::new(self.p, 0.0);
        rho[(2, 2)] = c64::new(self.p, 0.0);
        rho[(2, 1)] = c64::new(self.coh_re, self.coh_im);
        rho[(1, 2)] = c64::new(self.coh_re, -self.coh_im);
        rho
    }

    /// Project a full V-model density matrix onto the reduced basis.
    pub fn project_v(rho: &Mat<c64>) -> Self {
        Self::new(
            0.5 * (rho[(1, 1)].re + rho[(2, 2)].re),
            rho[(2, 1)].re,
            rho[(2, 1)].im,
        )
    }

    /// Project a full Lambda-model density matrix: the quasi-degenerate pair
    /// is the low doublet and the tracked coherence is sigma_12.
    pub fn project_lambda(rho: &Mat<c64>) -> Self {
        Self::new(
            0.5 * (rho[(0, 0)].re + rho[(1, 1)].re),
            rho[(0, 1)].re,
            rho[(0, 1)].im,
        )
    }
}

/// The reduced affine generator dx/dt = L x + d with its split into the
/// degenerate part L0 and the splitting-proportional part L1.
#[derive(Debug, Clone)]
pub struct ReducedGenerator {
    pub l: Mat<f64>,
    pub l0: Mat<f64>,
    pub l1: Mat<f64>,
    pub d: [f64; 3],
    pub rates: Rates,
    pub delta: f64,
    /// Ordered labels of the reduced basis.
    pub basis: [&'static str; 3],
}

/// Assembles the reduced V-model generator for given rates and splitting.
///
/// Rows encode
///   dP/dt       = -phi P - k sR             + (phi-k)/2
///   dsR/dt      = -phi P - k sR + Delta sI  + (phi-k)/2
///   dsI/dt      =        - Delta sR - k sI.
pub fn build_reduced(delta: f64, rates: Rates) -> ReducedGenerator {
    let Rates { k, phi } = rates;
    let mut l0 = Mat::<f64>::zeros(3, 3);
    l0[(0, 0)] = -phi;
    l0[(0, 1)] = -k;
    l0[(1, 0)] = -phi;
    l0[(1, 1)] = -k;
    l0[(2, 2)] = -k;
    let mut l1 = Mat::<f64>::zeros(3, 3);
    l1[(1, 2)] = delta;
    l1[(2, 1)] = -delta;
    let l = &l0 + &l1;
    let half = 0.5 * (phi - k);
    ReducedGenerator {
        l,
        l0,
        l1,
        d: [half, half, 0.0],
        rates,
        delta,
        basis: ["P", "sigma32_R", "sigma32_I"],
    }
}

impl ReducedGenerator {
    /// Steady state x_inf = -L^{-1} d; equals the Gibbs values
    /// ((phi-k)/(2 phi), 0, 0) of the clustered model.
    pub fn steady_state(&self) -> Result<ReducedState> {
        if self.delta == 0.0 {
            return Err(Error::SingularGenerator);
        }
        let rhs = Mat::<f64>::from_fn(3, 1, |i, _| -self.d[i]);
        let x = self.l.partial_piv_lu().solve(&rhs);
        Ok(ReducedState::new(x[(0, 0)], x[(1, 0)], x[(2, 0)]))
    }

    /// Row-major full-precision dump for debugging.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str("# L (row-major)\n");
        out.push_str(&dump_matrix(&self.l));
        out.push_str("# L0\n");
        out.push_str(&dump_matrix(&self.l0));
        out.push_str("# L1\n");
        out.push_str(&dump_matrix(&self.l1));
        out.push_str("# d\n");
        let row: Vec<String> = self.d.iter().map(|x| format!("{x:.17e}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
        out
    }
}

pub fn dump_matrix(m: &Mat<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.17e}", m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Full Redfield superoperator acting on the vectorized density matrix
/// (row-major: index a*N + b for sigma_ab).
#[derive(Debug, Clone)]
pub struct FullGenerator {
    pub dim: usize,
    pub matrix: Mat<c64>,
}

/// Half Fourier transform of the bath correlation function (real part only;
/// Lamb shifts are dropped). `omega > 0` is a downhill transition.
fn half_rate(omega: f64, bath: &BathSpec) -> Result<f64> {
    // intra-manifold frequencies can hit zero exactly; the Ohmic limit of
    // J(w) n(w) and J(w)(n(w)+1) as w -> 0 is gamma*T either way
    let tol = 1e-13;
    if omega.abs() <= tol {
        return Ok(bath.gamma * bath.temperature);
    }
    let j = spectral_density(omega.abs(), bath)?;
    let n = bose_einstein(omega.abs(), bath.temperature)?;
    if omega > 0.0 { Ok(j * (n + 1.0)) } else { Ok(j * n) }
}

/// Builds the nonsecular Born-Markov Redfield generator by direct index
/// transcription of the Redfield tensor, with rates evaluated at the exact
/// Bohr frequencies of the system Hamiltonian. No secular approximation is
/// applied; imaginary (Lamb-shift) parts are omitted.
pub fn build_full_redfield(system: &SystemSpec, baths: &[BathSpec]) -> Result<FullGenerator> {
    let n = system.dim();
    if baths.len() != system.couplings.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} baths but {} coupling operators",
            baths.len(),
            system.couplings.len()
        )));
    }
    let e = &system.energies;
    let idx = |a: usize, b: usize| a * n + b;
    let mut m = Mat::<c64>::zeros(n * n, n * n);

    // unitary part: -i [H_S, sigma] for a diagonal Hamiltonian
    for a in 0..n {
        for b in 0..n {
            m[(idx(a, b), idx(a, b))] += c64::new(0.0, -(e[a] - e[b]));
        }
    }

    for (s, bath) in system.couplings.iter().zip(baths) {
        // r(ab, cd, w) = S_ab S_cd * half_rate(w), real by construction
        let r = |a: usize, b: usize, c: usize, d: usize, w: f64| -> Result<f64> {
            Ok(s[(a, b)] * s[(c, d)] * half_rate(w, bath)?)
        };
        for a in 0..n {
            for b in 0..n {
                let row = idx(a, b);
                // sum_{c,d} R_{ac,cd}(w_dc) sigma_db
                for d in 0..n {
                    let mut coeff = 0.0;
                    for c in 0..n {
                        coeff += r(a, c, c, d, e[d] - e[c])?;
                    }
                    m[(row, idx(d, b))] -= c64::new(coeff, 0.0);
                }
                // sum_{c,d} R*_{bd,dc}(w_cd) sigma_ac
                for c in 0..n {
                    let mut coeff = 0.0;
                    for d in 0..n {
                        coeff += r(b, d, d, c, e[c] - e[d])?;
                    }
                    m[(row, idx(a, c))] -= c64::new(coeff, 0.0);
                }
                // + sum_{c,d} [R_{db,ac}(w_ca) + R*_{ca,bd}(w_db)] sigma_cd
                for c in 0..n {
                    for d in 0..n {
                        let coeff =
                            r(d, b, a, c, e[c] - e[a])? + r(c, a, b, d, e[d] - e[b])?;
                        m[(row, idx(c, d))] += c64::new(coeff, 0.0);
                    }
                }
            }
        }
    }
    Ok(FullGenerator { dim: n, matrix: m })
}

impl FullGenerator {
    /// Fixed point of the generator: the null eigenvector normalized to unit
    /// trace.
    pub fn steady_state(&self) -> Result<Mat<c64>> {
        let n = self.dim;
        let evd = self
            .matrix
            .eigen()
            .map_err(|e| Error::Eigendecomposition(format!("{e:?}")))?;
        let s = evd.S();
        let u = evd.U();
        let mut best = 0;
        for i in 1..n * n {
            if s[i].norm() < s[best].norm() {
                best = i;
            }
        }
        let mut rho = Mat::<c64>::zeros(n, n);
        let mut trace = c64::new(0.0, 0.0);
        for a in 0..n {
            trace += u[(a * n + a, best)];
        }
        if trace.norm() < 1e-12 {
            return Err(Error::NoSolution("null eigenvector has zero trace".into()));
        }
        for a in 0..n {
            for b in 0..n {
                rho[(a, b)] = u[(a * n + b, best)] / trace;
            }
        }
        Ok(rho)
    }

    /// Row-major full-precision dump for debugging.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for i in 0..self.matrix.nrows() {
            let row: Vec<String> = (0..self.matrix.ncols())
                .map(|j| {
                    let z = self.matrix[(i, j)];
                    format!("{:.17e}{:+.17e}i", z.re, z.im)
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Canonical equilibrium state exp(-H_S/T)/Z, diagonal in the energy basis.
pub fn gibbs_state(system: &SystemSpec, temperature: f64) -> Result<Mat<c64>> {
    if !(temperature > 0.0) {
        return Err(Error::InvalidParameter("temperature must be positive".into()));
    }
    let n = system.dim();
    // shift by the ground energy so the weights stay well-scaled
    let e0 = system.energies[0];
    let weights: Vec<f64> = system
        .energies
        .iter()
        .map(|e| (-(e - e0) / temperature).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let mut rho = Mat::<c64>::zeros(n, n);
    for a in 0..n {
        rho[(a, a)] = c64::new(weights[a] / z, 0.0);
    }
    Ok(rho)
}
