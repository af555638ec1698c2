//! Perturbative eigenvalue estimation for L = L0 + L1 and the linear
//! machinery relating initial conditions to mode coefficients, in both
//! directions.
//!
//! Zeroth-order eigenvalues come from the block-diagonal L0 in closed form;
//! each is then corrected with a single Newton step on the exact
//! characteristic polynomial of L, which reproduces the leading order in the
//! splitting without any symbolic expansion.

use faer::Mat;
use faer::linalg::solvers::Solve;

use crate::error::{Error, Result};
use crate::generator::{ReducedGenerator, ReducedState};

/// Fraction of |lambda0| the correction may reach before the single-step
/// estimate is flagged as out of regime.
pub const CORRECTION_VALIDITY_FRACTION: f64 = 0.1;

/// Perturbative spectrum: zeroth-order eigenvalues, Newton corrections, and
/// their sums, with the slowest mode listed first.
#[derive(Debug, Clone)]
pub struct LepeSpectrum {
    pub lambda0: Vec<f64>,
    pub delta_corr: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Per-mode flag: correction small relative to the zeroth eigenvalue.
    pub valid: Vec<bool>,
}

impl LepeSpectrum {
    pub fn is_valid(&self) -> bool {
        self.valid.iter().all(|&v| v)
    }

    /// 1/|lambda_n| for every mode.
    pub fn timescale(&self, n: usize) -> f64 {
        1.0 / self.lambda[n].abs()
    }
}

/// Monic characteristic polynomial det(lambda I - M), coefficients by
/// ascending power (coeffs[m] multiplies lambda^m, leading coefficient 1).
#[derive(Debug, Clone)]
pub struct CharPoly {
    pub coeffs: Vec<f64>,
}

impl CharPoly {
    /// Faddeev–LeVerrier recursion; exact up to rounding for small matrices.
    pub fn of(m: &Mat<f64>) -> Self {
        let n = m.nrows();
        assert_eq!(n, m.ncols(), "characteristic polynomial needs a square matrix");
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = 1.0;
        let mut aux = Mat::<f64>::identity(n, n);
        for k in 1..=n {
            aux = m * &aux;
            let c = -(0..n).map(|i| aux[(i, i)]).sum::<f64>() / k as f64;
            coeffs[n - k] = c;
            for i in 0..n {
                aux[(i, i)] += c;
            }
        }
        Self { coeffs }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_deriv(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (m, &c)| acc * x + m as f64 * c)
    }

    /// Magnitude scale of the roots, from the coefficient sizes.
    fn root_scale(&self) -> f64 {
        let n = self.coeffs.len() - 1;
        (0..n)
            .map(|m| self.coeffs[m].abs().powf(1.0 / (n - m) as f64))
            .fold(f64::MIN_POSITIVE, f64::max)
    }
}

/// Exact eigenvalues of L0 by connected-component block solves: 1x1 blocks
/// directly, 2x2 blocks by the quadratic formula, larger blocks numerically.
/// Components are enumerated by smallest row index; inside a block the less
/// negative root comes first.
pub fn zeroth_eigenvalues(gen: &ReducedGenerator) -> Result<Vec<f64>> {
    block_eigenvalues(&gen.l0)
}

pub fn block_eigenvalues(l0: &Mat<f64>) -> Result<Vec<f64>> {
    let n = l0.nrows();
    let scale = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| l0[(i, j)].abs())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let tol = 1e-14 * scale;

    // union-find over the symmetrized sparsity pattern
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && (l0[(i, j)].abs() > tol || l0[(j, i)].abs() > tol) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match blocks.iter_mut().find(|b| find(&mut parent, b[0]) == r) {
            Some(b) => b.push(i),
            None => blocks.push(vec![i]),
        }
    }

    let mut eigs = Vec::with_capacity(n);
    for block in &blocks {
        match block.as_slice() {
            [i] => eigs.push(l0[(*i, *i)]),
            [i, j] => {
                let (a, b, c, d) = (l0[(*i, *i)], l0[(*i, *j)], l0[(*j, *i)], l0[(*j, *j)]);
                let tr = a + d;
                let disc = (a - d) * (a - d) + 4.0 * b * c;
                if disc < 0.0 {
                    return Err(Error::Domain(format!(
                        "complex zeroth-order pair in block {block:?} (discriminant {disc:e})"
                    )));
                }
                let root = disc.sqrt();
                eigs.push(0.5 * (tr + root));
                eigs.push(0.5 * (tr - root));
            }
            _ => {
                let sub = Mat::<f64>::from_fn(block.len(), block.len(), |r, c| {
                    l0[(block[r], block[c])]
                });
                let evd = sub
                    .eigen()
                    .map_err(|e| Error::Eigendecomposition(format!("{e:?}")))?;
                let mut vals: Vec<f64> = Vec::new();
                for idx in 0..block.len() {
                    let z = evd.S()[idx];
                    if z.im.abs() > 1e-9 * scale {
                        return Err(Error::Domain(format!(
                            "complex zeroth-order eigenvalue {z:?} in block {block:?}"
                        )));
                    }
                    vals.push(z.re);
                }
                vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
                eigs.extend(vals);
            }
        }
    }
    Ok(eigs)
}

/// Single Newton step -f/f' at the zeroth eigenvalue: the leading-order
/// correction in the splitting.
pub fn correct_eigenvalue(f: &CharPoly, lambda0: f64) -> Result<f64> {
    let fp = f.eval_deriv(lambda0);
    let n = f.coeffs.len() - 1;
    let scale = f.root_scale().powi(n as i32 - 1);
    if fp.abs() <= 1e-10 * scale {
        return Err(Error::DegenerateRoot { lambda0 });
    }
    Ok(-f.eval(lambda0) / fp)
}

/// Assembles the perturbative spectrum of a reduced generator. The corrected
/// eigenvalue of smallest magnitude (the slow mode) is listed first; the
/// remaining modes keep the block-enumeration order of L0.
pub fn lepe_spectrum(gen: &ReducedGenerator) -> Result<LepeSpectrum> {
    let lambda0 = zeroth_eigenvalues(gen)?;
    let f = CharPoly::of(&gen.l);
    let scale = lambda0.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    // repeated zeroth eigenvalues make the single-root correction ill-defined
    for (i, &a) in lambda0.iter().enumerate() {
        for &b in &lambda0[i + 1..] {
            if (a - b).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::DegenerateRoot { lambda0: a });
            }
        }
    }
    let min_nonzero = lambda0
        .iter()
        .map(|x| x.abs())
        .filter(|&x| x > 1e-12 * scale)
        .fold(f64::INFINITY, f64::min);
    let mut modes = Vec::with_capacity(lambda0.len());
    for &l0 in &lambda0 {
        let d = correct_eigenvalue(&f, l0)?;
        let reference = if l0.abs() > 1e-12 * scale { l0.abs() } else { min_nonzero };
        let valid = d.abs() < CORRECTION_VALIDITY_FRACTION * reference;
        modes.push((l0, d, l0 + d, valid));
    }
    // slowest mode first; the rest keep their enumeration order
    let slow = (0..modes.len())
        .min_by(|&a, &b| modes[a].2.abs().partial_cmp(&modes[b].2.abs()).unwrap())
        .unwrap();
    let first = modes.remove(slow);
    modes.insert(0, first);
    Ok(LepeSpectrum {
        lambda0: modes.iter().map(|m| m.0).collect(),
        delta_corr: modes.iter().map(|m| m.1).collect(),
        lambda: modes.iter().map(|m| m.2).collect(),
        valid: modes.iter().map(|m| m.3).collect(),
    })
}

/// Exact eigenvalues of the full reduced generator, ordered like
/// `lepe_spectrum` (slowest first, then by proximity to the zeroth set).
pub fn exact_eigenvalues(gen: &ReducedGenerator) -> Result<Vec<f64>> {
    let evd = gen
        .l
        .eigen()
        .map_err(|e| Error::Eigendecomposition(format!("{e:?}")))?;
    let n = gen.l.nrows();
    let scale = (0..n).map(|i| evd.S()[i].norm()).fold(0.0, f64::max);
    let mut vals = Vec::with_capacity(n);
    for i in 0..n {
        let z = evd.S()[i];
        if z.im.abs() > 1e-9 * scale {
            return Err(Error::Domain(format!("complex eigenvalue {z:?}")));
        }
        vals.push(z.re);
    }
    // pair each exact root with its nearest zeroth-order label
    let spectrum = lepe_spectrum(gen)?;
    let mut ordered = Vec::with_capacity(n);
    let mut used = vec![false; n];
    for &target in &spectrum.lambda {
        let j = (0..n)
            .filter(|&j| !used[j])
            .min_by(|&a, &b| {
                (vals[a] - target)
                    .abs()
                    .partial_cmp(&(vals[b] - target).abs())
                    .unwrap()
            })
            .unwrap();
        used[j] = true;
        ordered.push(vals[j]);
    }
    Ok(ordered)
}

/// Slow-mode eigenvalue in temperature form,
/// -Delta^2 (1 + 2 e^{-nu/T}) / (2 k (1 + e^{-nu/T})).
pub fn lambda1_temperature_form(delta: f64, k: f64, nu: f64, temperature: f64) -> f64 {
    let b = (-nu / temperature).exp();
    -delta * delta * (1.0 + 2.0 * b) / (2.0 * k * (1.0 + b))
}

/// Closed forms of the corrections, kept as independent cross-checks of
/// the Newton step.
pub fn delta1_closed_form(delta: f64, k: f64, phi: f64) -> f64 {
    -phi * delta * delta / (k * (k + phi))
}

pub fn delta_fast_closed_form(delta: f64, k: f64, phi: f64) -> f64 {
    k * delta * delta / (phi * (phi + k))
}

pub fn delta_slow_decay_closed_form(delta: f64, k: f64, phi: f64) -> f64 {
    delta * delta * (phi - k) / (phi * k)
}

/// Whether the coefficient system is assembled from the working generator or
/// from its zero-splitting reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    AtDelta,
    DeltaZeroLimit,
}

/// The linear system B x(0) + v = Lambda c + (x_inf, 0, 0) for one reduced
/// element: row m equates the m-th time derivative at t = 0.
#[derive(Debug, Clone)]
pub struct CoefficientSystem {
    pub element: usize,
    /// Vandermonde in the mode eigenvalues: Lambda[(m, n)] = lambda_n^m.
    pub lambda_mat: Mat<f64>,
    /// Row m = row `element` of L^m.
    pub b: Mat<f64>,
    /// (0, d_i, (L d)_i, ...).
    pub v: Vec<f64>,
    pub x_inf: f64,
    pub mode: SolveMode,
}

/// Builds the derivative-chain system for element `i`. Depth equals the
/// reduced dimension; higher derivatives are redundant by Cayley–Hamilton.
pub fn build_coefficient_system(
    gen: &ReducedGenerator,
    spectrum: &LepeSpectrum,
    i: usize,
    mode: SolveMode,
) -> Result<CoefficientSystem> {
    let n = gen.l.nrows();
    if i >= n {
        return Err(Error::DimensionMismatch(format!("element index {i} out of range for dim {n}")));
    }
    let (l, lambdas, x_inf): (Mat<f64>, Vec<f64>, [f64; 3]) = match mode {
        SolveMode::AtDelta => {
            let ss = gen.steady_state()?;
            (gen.l.clone(), spectrum.lambda.clone(), ss.to_vector())
        }
        SolveMode::DeltaZeroLimit => {
            // the Delta -> 0 steady state is the clustered Gibbs point
            let crate::model::Rates { k, phi } = gen.rates;
            (
                gen.l0.clone(),
                spectrum.lambda0.clone(),
                [(phi - k) / (2.0 * phi), 0.0, 0.0],
            )
        }
    };
    let mut b = Mat::<f64>::zeros(n, n);
    let mut v = vec![0.0; n];
    let mut row = Mat::<f64>::from_fn(1, n, |_, j| if j == i { 1.0 } else { 0.0 });
    for m in 0..n {
        for j in 0..n {
            b[(m, j)] = row[(0, j)];
        }
        if m >= 1 {
            // v_m = (L^{m-1} d)_i = (row m-1 of B) . d
            v[m] = (0..n).map(|j| b[(m - 1, j)] * gen.d[j]).sum();
        }
        row = &row * &l;
    }
    let lambda_mat = Mat::<f64>::from_fn(n, n, |m, j| lambdas[j].powi(m as i32));
    Ok(CoefficientSystem { element: i, lambda_mat, b, v, x_inf: x_inf[i], mode })
}

/// Coefficients of element `i` in the mode expansion
/// x_i(t) = x_inf,i + sum_n c_{n,i} exp(lambda_n t).
pub fn solve_coefficients(sys: &CoefficientSystem, x0: &ReducedState) -> Result<Vec<f64>> {
    let n = sys.b.nrows();
    // conditioning guard: the Vandermonde degenerates when eigenvalues collide
    let lambdas: Vec<f64> = (0..n).map(|j| sys.lambda_mat[(1, j)]).collect();
    let scale = lambdas.iter().fold(f64::MIN_POSITIVE, |m, &x| m.max(x.abs()));
    let mut gap = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            gap = gap.min((lambdas[i] - lambdas[j]).abs());
        }
    }
    if gap < 1e-10 * scale {
        return Err(Error::IllConditioned { gap, scale });
    }
    let x0v = x0.to_vector();
    let mut rhs = Mat::<f64>::zeros(n, 1);
    for m in 0..n {
        rhs[(m, 0)] = (0..n).map(|j| sys.b[(m, j)] * x0v[j]).sum::<f64>() + sys.v[m];
    }
    rhs[(0, 0)] -= sys.x_inf;
    let c = sys.lambda_mat.partial_piv_lu().solve(&rhs);
    Ok((0..n).map(|m| c[(m, 0)]).collect())
}

/// Per-element coefficients solved both at the working splitting and in its
/// zero limit.
#[derive(Debug, Clone)]
pub struct ElementCoefficients {
    pub element: usize,
    pub at_delta: Vec<f64>,
    pub delta_zero: Vec<f64>,
}

pub fn solve_coefficients_both(
    gen: &ReducedGenerator,
    spectrum: &LepeSpectrum,
    i: usize,
    x0: &ReducedState,
) -> Result<ElementCoefficients> {
    let sys_d = build_coefficient_system(gen, spectrum, i, SolveMode::AtDelta)?;
    let sys_0 = build_coefficient_system(gen, spectrum, i, SolveMode::DeltaZeroLimit)?;
    Ok(ElementCoefficients {
        element: i,
        at_delta: solve_coefficients(&sys_d, x0)?,
        delta_zero: solve_coefficients(&sys_0, x0)?,
    })
}

/// Inverts the coefficient relation under the constraints c_{1,i} = 0 for
/// every element, c_{3,2} = 0, and a chosen mode-2 coherence weight c2:
/// the initial states with no projection on the slow mode.
pub fn invert_to_initial(
    gen: &ReducedGenerator,
    spectrum: &LepeSpectrum,
    c2: f64,
    mode: SolveMode,
) -> Result<ReducedState> {
    match mode {
        SolveMode::DeltaZeroLimit => {
            let crate::model::Rates { k, phi } = gen.rates;
            let p_inf = (phi - k) / (2.0 * phi);
            Ok(ReducedState::new(p_inf + c2, c2, 0.0))
        }
        SolveMode::AtDelta => {
            // x0 = B^{-1} (Lambda c + (x_inf,0,0) - v) for the coherence element
            let sys = build_coefficient_system(gen, spectrum, 1, SolveMode::AtDelta)?;
            let n = sys.b.nrows();
            let c = [0.0, c2, 0.0];
            let mut rhs = Mat::<f64>::zeros(n, 1);
            for m in 0..n {
                rhs[(m, 0)] = (0..n).map(|j| sys.lambda_mat[(m, j)] * c[j]).sum::<f64>() - sys.v[m];
            }
            rhs[(0, 0)] += sys.x_inf;
            if sys.b.determinant().abs() < 1e-14 {
                return Err(Error::NoSolution(
                    "derivative-chain matrix is singular; constraints are inconsistent".into(),
                ));
            }
            let x0 = sys.b.partial_piv_lu().solve(&rhs);
            Ok(ReducedState::new(x0[(0, 0)], x0[(1, 0)], x0[(2, 0)]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::build_reduced;
    use crate::model::{BathSpec, Rates, VModelParams, v_rates};
    use approx::assert_relative_eq;

    fn canonical_gen() -> ReducedGenerator {
        let params = VModelParams::new(1.0, 1e-4).unwrap();
        let bath = BathSpec::new(2.0, 0.005).unwrap();
        build_reduced(params.delta, v_rates(&params, &bath).unwrap())
    }

    #[test]
    fn charpoly_matches_expanded_cubic() {
        // det(lambda I - L) = lambda^3 + (2k+phi) lambda^2
        //                     + (k(k+phi) + Delta^2) lambda + Delta^2 phi
        let gen = canonical_gen();
        let Rates { k, phi } = gen.rates;
        let d = gen.delta;
        let f = CharPoly::of(&gen.l);
        assert_eq!(f.coeffs.len(), 4);
        assert_relative_eq!(f.coeffs[3], 1.0);
        assert_relative_eq!(f.coeffs[2], 2.0 * k + phi, max_relative = 1e-12);
        assert_relative_eq!(f.coeffs[1], k * (k + phi) + d * d, max_relative = 1e-12);
        assert_relative_eq!(f.coeffs[0], d * d * phi, max_relative = 1e-12);
        // Horner evaluation against the factored form
        for x in [-0.1, -0.01, 0.0, 0.02] {
            let factored = d * d * (phi + x) + x * (k + x) * (k + phi + x);
            assert_relative_eq!(f.eval(x), factored, max_relative = 1e-12, epsilon = 1e-18);
        }
        // derivative against a central difference
        let h = 1e-7;
        let x = -0.03;
        assert_relative_eq!(
            f.eval_deriv(x),
            (f.eval(x + h) - f.eval(x - h)) / (2.0 * h),
            max_relative = 1e-6
        );
    }

    #[test]
    fn zeroth_eigenvalues_v_model() {
        let gen = canonical_gen();
        let Rates { k, phi } = gen.rates;
        let z = zeroth_eigenvalues(&gen).unwrap();
        assert_eq!(z.len(), 3);
        assert_relative_eq!(z[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(z[1], -(phi + k), max_relative = 1e-12);
        assert_relative_eq!(z[2], -k, max_relative = 1e-12);
        assert_relative_eq!(z[1], -0.0816609, epsilon = 2e-6);
        assert_relative_eq!(z[2], -0.0254149, epsilon = 1e-7);
    }

    #[test]
    fn zeroth_eigenvalues_high_temperature() {
        // phi -> 3k, so the set approaches {0, -4k, -k}
        let params = VModelParams::new(1.0, 1e-4).unwrap();
        let bath = BathSpec::new(1e9, 0.005).unwrap();
        let rates = v_rates(&params, &bath).unwrap();
        let gen = build_reduced(params.delta, rates);
        let z = zeroth_eigenvalues(&gen).unwrap();
        assert_relative_eq!(z[1], -4.0 * rates.k, max_relative = 1e-6);
        assert_relative_eq!(z[2], -rates.k, max_relative = 1e-12);
    }

    #[test]
    fn one_by_one_block_is_its_diagonal() {
        let mut m = Mat::<f64>::zeros(1, 1);
        m[(0, 0)] = -0.7;
        assert_eq!(block_eigenvalues(&m).unwrap(), vec![-0.7]);
    }

    #[test]
    fn newton_corrections_match_closed_forms() {
        let gen = canonical_gen();
        let Rates { k, phi } = gen.rates;
        let d = gen.delta;
        let f = CharPoly::of(&gen.l);
        let d1 = correct_eigenvalue(&f, 0.0).unwrap();
        assert_relative_eq!(d1, delta1_closed_form(d, k, phi), max_relative = 1e-5);
        assert_relative_eq!(d1, -2.7101e-7, max_relative = 1e-4);
        let d2 = correct_eigenvalue(&f, -(phi + k)).unwrap();
        assert_relative_eq!(d2, delta_fast_closed_form(d, k, phi), max_relative = 1e-5);
        // the closed form for the -k correction carries an O(Delta^2/(k phi))
        // relative remainder; match to that accuracy, not tighter
        let d3 = correct_eigenvalue(&f, -k).unwrap();
        assert_relative_eq!(d3, delta_slow_decay_closed_form(d, k, phi), max_relative = 2e-5);
    }

    #[test]
    fn zero_splitting_gives_zero_corrections() {
        let gen = build_reduced(0.0, canonical_gen().rates);
        let f = CharPoly::of(&gen.l);
        for &l0 in &zeroth_eigenvalues(&gen).unwrap() {
            assert_relative_eq!(correct_eigenvalue(&f, l0).unwrap(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn degenerate_root_is_reported() {
        // equal diagonal entries in two decoupled blocks: repeated lambda0
        let mut l0 = Mat::<f64>::zeros(3, 3);
        l0[(0, 0)] = -0.5;
        l0[(1, 1)] = -0.5;
        l0[(2, 2)] = -0.1;
        let gen = ReducedGenerator {
            l: l0.clone(),
            l0,
            l1: Mat::zeros(3, 3),
            d: [0.0, 0.0, 0.0],
            rates: Rates { k: 0.1, phi: 0.5 },
            delta: 0.0,
            basis: ["a", "b", "c"],
        };
        assert!(matches!(
            lepe_spectrum(&gen),
            Err(Error::DegenerateRoot { .. })
        ));
    }

    #[test]
    fn spectrum_ordering_and_values() {
        let gen = canonical_gen();
        let Rates { k, phi } = gen.rates;
        let s = lepe_spectrum(&gen).unwrap();
        assert_relative_eq!(s.lambda[0], -2.7101e-7, max_relative = 1e-4);
        assert_relative_eq!(s.lambda[1], -0.0816609, epsilon = 3e-6);
        assert_relative_eq!(s.lambda[2], -0.0254149, epsilon = 1e-6);
        assert!(s.is_valid());
        assert!(s.lambda.iter().all(|&l| l < 0.0));
        // both forms of the slow eigenvalue agree
        let temp_form = lambda1_temperature_form(gen.delta, k, 1.0, 2.0);
        assert_relative_eq!(s.lambda[0], temp_form, max_relative = 1e-4);
        let _ = phi;
    }

    #[test]
    fn temperature_form_limits() {
        let nu = 1.0;
        let delta = 1e-4;
        let params = VModelParams::new(nu, delta).unwrap();
        // T -> 0: lambda1 -> -Delta^2 / (2k)
        let cold = BathSpec::new(0.01, 0.005).unwrap();
        let rc = v_rates(&params, &cold).unwrap();
        let s = lepe_spectrum(&build_reduced(delta, rc)).unwrap();
        assert_relative_eq!(s.lambda[0], -delta * delta / (2.0 * rc.k), max_relative = 1e-3);
        // T >> nu: lambda1 -> -3 Delta^2 / (4k); keep T moderate so the
        // constant coefficient of the characteristic polynomial stays
        // resolvable in double precision next to the k^3-scale terms.
        let hot = BathSpec::new(100.0, 0.005).unwrap();
        let rh = v_rates(&params, &hot).unwrap();
        let s = lepe_spectrum(&build_reduced(delta, rh)).unwrap();
        assert_relative_eq!(
            s.lambda[0],
            -3.0 * delta * delta / (4.0 * rh.k),
            max_relative = 5e-3
        );
    }

    #[test]
    fn validity_flag_raised_out_of_regime() {
        let params = VModelParams::new(1.0, 5e-2).unwrap();
        let bath = BathSpec::new(2.0, 0.005).unwrap();
        let gen = build_reduced(params.delta, v_rates(&params, &bath).unwrap());
        let s = lepe_spectrum(&gen).unwrap();
        assert!(!s.is_valid());
    }

    #[test]
    fn b_matrix_rows_are_powers_of_l() {
        let gen = canonical_gen();
        let s = lepe_spectrum(&gen).unwrap();
        for i in 0..3 {
            let sys = build_coefficient_system(&gen, &s, i, SolveMode::AtDelta).unwrap();
            let mut power = Mat::<f64>::identity(3, 3);
            for m in 0..3 {
                for j in 0..3 {
                    assert_eq!(sys.b[(m, j)], power[(i, j)], "i={i} m={m} j={j}");
                }
                power = &power * &gen.l;
            }
            // v = (0, d_i, (L d)_i)
            assert_eq!(sys.v[0], 0.0);
            assert_eq!(sys.v[1], gen.d[i]);
            let ld: f64 = (0..3).map(|j| gen.l[(i, j)] * gen.d[j]).sum();
            assert_relative_eq!(sys.v[2], ld, max_relative = 1e-14);
        }
    }

    #[test]
    fn appendix_matrices_for_coherence_element() {
        let gen = canonical_gen();
        let Rates { k, phi } = gen.rates;
        let d = gen.delta;
        let s = lepe_spectrum(&gen).unwrap();
        let sys = build_coefficient_system(&gen, &s, 1, SolveMode::AtDelta).unwrap();
        let expected_b = [
            [0.0, 1.0, 0.0],
            [-phi, -k, d],
            [phi * (k + phi), k * (k + phi) - d * d, -2.0 * d * k],
        ];
        for m in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(sys.b[(m, j)], expected_b[m][j], max_relative = 1e-12, epsilon = 1e-18);
            }
        }
        let expected_v = [0.0, (phi - k) / 2.0, (k * k - phi * phi) / 2.0];
        for m in 0..3 {
            assert_relative_eq!(sys.v[m], expected_v[m], max_relative = 1e-12, epsilon = 1e-18);
        }
        assert_relative_eq!(sys.v[1], 0.0154155, epsilon = 1e-6);
        assert_relative_eq!(sys.v[2], -0.0012588, epsilon = 1e-6);
    }

    #[test]
    fn ground_prep_coefficients() {
        let gen = canonical_gen();
        let Rates { k, phi } = gen.rates;
        let s = lepe_spectrum(&gen).unwrap();
        let x0 = ReducedState::ground();
        // coherence element
        let c = solve_coefficients_both(&gen, &s, 1, &x0).unwrap();
        let expected = (phi - k) / (2.0 * (phi + k));
        assert_relative_eq!(c.delta_zero[0], expected, max_relative = 1e-12);
        assert_relative_eq!(c.delta_zero[0], 0.1887758, epsilon = 1e-5);
        assert_relative_eq!(c.delta_zero[1], -expected, max_relative = 1e-12);
        assert!(c.delta_zero[2].abs() < 1e-12);
        assert_relative_eq!(c.at_delta[0], expected, max_relative = 1e-4);
        assert!(c.at_delta[2].abs() < 1e-4);
        // population element
        let c = solve_coefficients_both(&gen, &s, 0, &x0).unwrap();
        assert_relative_eq!(
            c.delta_zero[0],
            -k * (phi - k) / (2.0 * phi * (phi + k)),
            max_relative = 1e-12
        );
        assert_relative_eq!(c.delta_zero[1], -expected, max_relative = 1e-12);
        assert!(c.delta_zero[2].abs() < 1e-12);
        // imaginary-coherence element: every amplitude is O(Delta/k)
        let c = solve_coefficients_both(&gen, &s, 2, &x0).unwrap();
        for v in &c.at_delta {
            assert!(v.abs() < gen.delta / k, "{v}");
        }
    }

    #[test]
    fn steady_state_start_has_no_transient() {
        let gen = canonical_gen();
        let s = lepe_spectrum(&gen).unwrap();
        let ss = gen.steady_state().unwrap();
        for i in 0..3 {
            let sys = build_coefficient_system(&gen, &s, i, SolveMode::AtDelta).unwrap();
            for c in solve_coefficients(&sys, &ss).unwrap() {
                assert!(c.abs() < 1e-12, "element {i}: {c}");
            }
        }
    }

    #[test]
    fn coefficient_completeness() {
        let gen = canonical_gen();
        let s = lepe_spectrum(&gen).unwrap();
        let x0 = ReducedState::new(0.2, -0.1, 0.05);
        for i in 0..3 {
            let sys = build_coefficient_system(&gen, &s, i, SolveMode::AtDelta).unwrap();
            let c = solve_coefficients(&sys, &x0).unwrap();
            let total: f64 = c.iter().sum::<f64>() + sys.x_inf;
            assert_relative_eq!(total, x0.to_vector()[i], max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn ill_conditioned_system_rejected() {
        let gen = canonical_gen();
        let s = lepe_spectrum(&gen).unwrap();
        let mut sys = build_coefficient_system(&gen, &s, 1, SolveMode::AtDelta).unwrap();
        // collapse two eigenvalues in the Vandermonde
        for m in 0..3 {
            let v = sys.lambda_mat[(m, 1)];
            sys.lambda_mat[(m, 2)] = v;
        }
        assert!(matches!(
            solve_coefficients(&sys, &ReducedState::ground()),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn invert_to_initial_matches_mpemba_relations() {
        let gen = canonical_gen();
        let Rates { k, phi } = gen.rates;
        let s = lepe_spectrum(&gen).unwrap();
        let c2 = -0.24;
        let x0 = invert_to_initial(&gen, &s, c2, SolveMode::DeltaZeroLimit).unwrap();
        let p_inf = (phi - k) / (2.0 * phi);
        assert_relative_eq!(x0.p, p_inf + c2, max_relative = 1e-12);
        assert_relative_eq!(x0.p, 0.0340745, epsilon = 1e-5);
        assert_relative_eq!(x0.coh_re, c2);
        assert_eq!(x0.coh_im, 0.0);
        // c2 = 0 is exactly the clustered steady state
        let x0 = invert_to_initial(&gen, &s, 0.0, SolveMode::DeltaZeroLimit).unwrap();
        assert_relative_eq!(x0.p, p_inf);
        assert_eq!(x0.coh_re, 0.0);
    }

    #[test]
    fn invert_solve_round_trip() {
        let gen = canonical_gen();
        let s = lepe_spectrum(&gen).unwrap();
        let a = -0.1;
        for mode in [SolveMode::AtDelta, SolveMode::DeltaZeroLimit] {
            let x0 = invert_to_initial(&gen, &s, a, mode).unwrap();
            let sys = build_coefficient_system(&gen, &s, 1, mode).unwrap();
            let c = solve_coefficients(&sys, &x0).unwrap();
            let tol = match mode {
                SolveMode::AtDelta => 1e-10,
                SolveMode::DeltaZeroLimit => 1e-10,
            };
            assert!(c[0].abs() < tol, "{mode:?}: c1 = {}", c[0]);
            assert_relative_eq!(c[1], a, max_relative = 1e-8);
        }
    }

    #[test]
    fn lepe_matches_exact_roots() {
        let gen = canonical_gen();
        let s = lepe_spectrum(&gen).unwrap();
        let exact = exact_eigenvalues(&gen).unwrap();
        for (l, e) in s.lambda.iter().zip(&exact) {
            assert_relative_eq!(l, e, max_relative = 1e-3);
        }
        assert_relative_eq!(s.lambda[0], exact[0], max_relative = 1e-4);
    }

    #[test]
    fn slow_eigenvalue_error_scales_quadratically() {
        // relative error of lambda1 against the exact root falls as (Delta/k)^2:
        // the log-log slope across a Delta sweep is 2 +/- 0.1
        let bath = BathSpec::new(2.0, 0.005).unwrap();
        let deltas = [1e-5, 1e-4, 1e-3];
        let mut errs = Vec::new();
        for &d in &deltas {
            let params = VModelParams::new(1.0, d).unwrap();
            let gen = build_reduced(d, v_rates(&params, &bath).unwrap());
            let s = lepe_spectrum(&gen).unwrap();
            let exact = exact_eigenvalues(&gen).unwrap();
            errs.push(((s.lambda[0] - exact[0]) / exact[0]).abs());
        }
        let slope = (errs[2].ln() - errs[0].ln()) / (deltas[2].ln() - deltas[0].ln());
        assert!((slope - 2.0).abs() < 0.1, "slope {slope}");
    }
}
