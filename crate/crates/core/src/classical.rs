//! The fully secular (incoherent) three-level limit: exact two-mode
//! relaxation of the populations, the classical Mpemba construction, and its
//! much more modest acceleration.

use faer::{Mat, c64};

use crate::error::{Error, Result};
use crate::model::{BathSpec, bose_einstein, spectral_density};

/// Rate-equation generator over (p2, p3) after eliminating p1 by
/// normalization: dp/dt = L p + affine.
#[derive(Debug, Clone)]
pub struct ClassicalGenerator {
    /// Downhill decay rate of level 2 (at frequency nu - delta).
    pub k21: f64,
    /// Downhill decay rate of level 3 (at frequency nu).
    pub k31: f64,
    pub beta: f64,
    pub nu: f64,
    pub delta: f64,
    pub l: Mat<f64>,
    pub affine: [f64; 2],
}

impl ClassicalGenerator {
    /// Assembles the 2x2 system from explicit downhill rates; uphill rates
    /// follow from detailed balance.
    pub fn from_rates(k21: f64, k31: f64, nu: f64, delta: f64, temperature: f64) -> Result<Self> {
        if !(k21 > 0.0 && k31 > 0.0) {
            return Err(Error::InvalidParameter("decay rates must be positive".into()));
        }
        if !(temperature > 0.0) {
            return Err(Error::InvalidParameter("temperature must be positive".into()));
        }
        if !(delta >= 0.0 && delta < nu) {
            return Err(Error::InvalidParameter("need 0 <= delta < nu".into()));
        }
        let beta = 1.0 / temperature;
        let b2 = (-(nu - delta) * beta).exp();
        let b3 = (-nu * beta).exp();
        let mut l = Mat::<f64>::zeros(2, 2);
        l[(0, 0)] = -k21 * (1.0 + b2);
        l[(0, 1)] = -k21 * b2;
        l[(1, 0)] = -k31 * b3;
        l[(1, 1)] = -k31 * (1.0 + b3);
        Ok(Self { k21, k31, beta, nu, delta, l, affine: [k21 * b2, k31 * b3] })
    }

    fn boltzmann(&self) -> (f64, f64) {
        (
            (-(self.nu - self.delta) * self.beta).exp(),
            (-self.nu * self.beta).exp(),
        )
    }
}

/// Builds the classical generator with both downhill rates drawn from the
/// same Ohmic bath, evaluated at the distinct level frequencies.
pub fn build_classical(nu: f64, delta: f64, bath: &BathSpec) -> Result<ClassicalGenerator> {
    if !(delta >= 0.0 && delta < nu) {
        return Err(Error::InvalidParameter("need 0 <= delta < nu".into()));
    }
    let downhill = |w: f64| -> Result<f64> {
        Ok(2.0 * spectral_density(w, bath)? * (bose_einstein(w, bath.temperature)? + 1.0))
    };
    ClassicalGenerator::from_rates(
        downhill(nu - delta)?,
        downhill(nu)?,
        nu,
        delta,
        bath.temperature,
    )
}

/// Exact eigenvalues of the 2x2 generator via the quadratic formula, ordered
/// so that |lambda2| > |lambda1|.
pub fn classical_eigenvalues(gen: &ClassicalGenerator) -> (f64, f64) {
    let (b2, b3) = gen.boltzmann();
    let s = gen.k21 * (1.0 + b2) + gen.k31 * (1.0 + b3);
    let z = 1.0 + b2 + b3;
    let disc = s * s - 4.0 * gen.k21 * gen.k31 * z;
    // the symmetrizable rate matrix keeps this nonnegative; clamp rounding
    let root = disc.max(0.0).sqrt();
    (0.5 * (-s + root), 0.5 * (-s - root))
}

/// Boltzmann equilibrium populations (p_inf2, p_inf3).
pub fn classical_equilibrium(gen: &ClassicalGenerator) -> (f64, f64) {
    let (b2, b3) = gen.boltzmann();
    let z = 1.0 + b2 + b3;
    (b2 / z, b3 / z)
}

/// Mode coefficients of both levels: rows are (c_{1,j}, c_{2,j}) for j=2,3.
pub fn classical_coefficients(gen: &ClassicalGenerator, p0: [f64; 2]) -> Result<[[f64; 2]; 2]> {
    if p0[0] < 0.0 || p0[1] < 0.0 || p0[0] + p0[1] > 1.0 {
        return Err(Error::Unphysical(format!("initial populations {p0:?} out of the simplex")));
    }
    let (l1, l2) = classical_eigenvalues(gen);
    let scale = l1.abs().max(l2.abs());
    if (l1 - l2).abs() < 1e-12 * scale {
        return Err(Error::IllConditioned { gap: (l1 - l2).abs(), scale });
    }
    let (pi2, pi3) = classical_equilibrium(gen);
    let pinf = [pi2, pi3];
    let mut out = [[0.0; 2]; 2];
    for j in 0..2 {
        // c1 + c2 = p_j(0) - p_inf,j; l1 c1 + l2 c2 = dp_j/dt(0)
        let dev = p0[j] - pinf[j];
        let rate = gen.l[(j, 0)] * p0[0] + gen.l[(j, 1)] * p0[1] + gen.affine[j];
        let c2 = (rate - l1 * dev) / (l2 - l1);
        out[j] = [dev - c2, c2];
    }
    Ok(out)
}

/// p3(0) implied by the Mpemba constraint c_{1,2} = 0 at a given c_{2,2}:
/// a linear function of the free coefficient.
pub fn p3_of_c22(gen: &ClassicalGenerator, c22: f64) -> f64 {
    let (b2, _) = gen.boltzmann();
    let (_, l2) = classical_eigenvalues(gen);
    let (pi2, _) = classical_equilibrium(gen);
    let a = gen.k21 * (1.0 + b2);
    -(b2.recip() / gen.k21) * ((l2 + a) * c22 - gen.k21 * b2 + a * pi2)
}

/// Admissible interval for c_{2,2}: the intersection of the box constraint
/// on p2(0), the pair from p3(0), and the joint normalization. `None` when
/// the intersection is empty.
pub fn classical_mpemba_bounds(gen: &ClassicalGenerator) -> Option<(f64, f64)> {
    let (pi2, _) = classical_equilibrium(gen);
    // p3(0) = alpha + slope * c22
    let alpha = p3_of_c22(gen, 0.0);
    let slope = p3_of_c22(gen, 1.0) - alpha;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    // each physicality condition is linear in c22: a*c <= b
    let mut apply = |a: f64, b: f64| {
        if a > 0.0 {
            hi = hi.min(b / a);
        } else if a < 0.0 {
            lo = lo.max(b / a);
        }
    };
    // 0 <= p2(0) <= 1
    apply(-1.0, pi2);
    apply(1.0, 1.0 - pi2);
    // 0 <= p3(0) <= 1
    apply(-slope, alpha);
    apply(slope, 1.0 - alpha);
    // p2(0) + p3(0) <= 1
    apply(1.0 + slope, 1.0 - pi2 - alpha);
    (lo <= hi).then_some((lo, hi))
}

/// Classical Mpemba initial populations for a weight inside the bounds.
pub fn classical_mpemba_state(gen: &ClassicalGenerator, c22: f64) -> Result<[f64; 2]> {
    let (lo, hi) = classical_mpemba_bounds(gen)
        .ok_or_else(|| Error::NoSolution("no classical Mpemba state for these parameters".into()))?;
    if c22 < lo || c22 > hi {
        return Err(Error::Unphysical(format!(
            "c22 = {c22} outside the admissible interval [{lo}, {hi}]"
        )));
    }
    let (pi2, _) = classical_equilibrium(gen);
    Ok([pi2 + c22, p3_of_c22(gen, c22)])
}

/// Evaluates the two-mode solution p_j(t) = p_inf,j + c1j e^{l1 t} + c2j e^{l2 t}.
pub fn classical_trajectory(
    gen: &ClassicalGenerator,
    coeffs: &[[f64; 2]; 2],
    times: &[f64],
) -> Vec<[f64; 2]> {
    let (l1, l2) = classical_eigenvalues(gen);
    let (pi2, pi3) = classical_equilibrium(gen);
    let pinf = [pi2, pi3];
    times
        .iter()
        .map(|&t| {
            let (e1, e2) = ((l1 * t).exp(), (l2 * t).exp());
            [
                pinf[0] + coeffs[0][0] * e1 + coeffs[0][1] * e2,
                pinf[1] + coeffs[1][0] * e1 + coeffs[1][1] * e2,
            ]
        })
        .collect()
}

/// Diagonal density matrix diag(1 - p2 - p3, p2, p3) for trace-distance
/// bookkeeping through the common entry point.
pub fn classical_density(p: [f64; 2]) -> Mat<c64> {
    let mut rho = Mat::<c64>::zeros(3, 3);
    rho[(0, 0)] = c64::new(1.0 - p[0] - p[1], 0.0);
    rho[(1, 1)] = c64::new(p[0], 0.0);
    rho[(2, 2)] = c64::new(p[1], 0.0);
    rho
}
