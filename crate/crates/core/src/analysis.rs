//! Exact propagation, trace distance, equilibration-time extraction, and
//! crossing detection.
//!
//! Propagation goes through the eigendecomposition of the generator rather
//! than a time stepper: the spread between the slow coherence mode and the
//! fast dissipative modes reaches seven decades, which no stepper handles at
//! acceptable cost.

use faer::linalg::solvers::Solve;
use faer::{Mat, c64};

use crate::error::{Error, Result};
use crate::generator::{FullGenerator, ReducedGenerator, ReducedState};

/// How a trajectory was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Closed-form evaluation.
    Analytic,
    /// Eigendecomposition of the reduced generator.
    OracleReduced,
    /// Eigendecomposition of the full Redfield generator.
    OracleRedfield,
    /// Matrix-exponential fallback (defective generator).
    OracleExpm,
}

/// Time grid plus reduced-state samples.
#[derive(Debug, Clone)]
pub struct ReducedTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<ReducedState>,
    pub provenance: Provenance,
}

/// Time grid plus full density-matrix samples.
#[derive(Debug, Clone)]
pub struct FullTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Mat<c64>>,
    pub provenance: Provenance,
}

/// Trace distance to a fixed reference state along a trajectory.
#[derive(Debug, Clone)]
pub struct DistanceCurve {
    pub times: Vec<f64>,
    pub d: Vec<f64>,
}

/// Logarithmic time grid covering `[t_min, t_max]` with roughly
/// `points_per_decade` samples per decade. Both endpoints are included.
pub fn log_grid(t_min: f64, t_max: f64, points_per_decade: usize) -> Vec<f64> {
    assert!(t_min > 0.0 && t_max > t_min);
    let decades = (t_max / t_min).log10();
    let n = ((decades * points_per_decade as f64).ceil() as usize).max(1);
    (0..=n)
        .map(|i| t_min * 10f64.powf(decades * i as f64 / n as f64))
        .collect()
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) || times[0] < 0.0 {
        return Err(Error::InvalidParameter(
            "time grid must be nonnegative and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Propagates the reduced affine system exactly:
/// x(t) = x_inf + sum_n y_n u_n exp(lambda_n t) with U y = x(0) - x_inf.
pub fn propagate_reduced(
    gen: &ReducedGenerator,
    x0: &ReducedState,
    times: &[f64],
) -> Result<ReducedTrajectory> {
    check_times(times)?;
    let x_inf = gen.steady_state()?;
    let dev = Mat::<c64>::from_fn(3, 1, |i, _| {
        c64::new(x0.to_vector()[i] - x_inf.to_vector()[i], 0.0)
    });
    match eigen_modes(&complexify(&gen.l), &dev) {
        Ok((lambdas, modes)) => {
            let states = times
                .iter()
                .map(|&t| {
                    let mut x = x_inf.to_vector();
                    for (lam, col) in lambdas.iter().zip(modes.iter()) {
                        let w = (lam * t).exp();
                        for i in 0..3 {
                            x[i] += (col[i] * w).re;
                        }
                    }
                    ReducedState::from_vector(x)
                })
                .collect();
            Ok(ReducedTrajectory { times: times.to_vec(), states, provenance: Provenance::OracleReduced })
        }
        Err(_) => {
            // defective generator: fall back to the matrix exponential
            let states = times
                .iter()
                .map(|&t| {
                    let e = expm(&scale(&complexify(&gen.l), t));
                    let xt = &e * &dev;
                    let mut x = x_inf.to_vector();
                    for i in 0..3 {
                        x[i] += xt[(i, 0)].re;
                    }
                    ReducedState::from_vector(x)
                })
                .collect();
            Ok(ReducedTrajectory { times: times.to_vec(), states, provenance: Provenance::OracleExpm })
        }
    }
}

/// Propagates the full superoperator exactly via its eigendecomposition.
pub fn propagate_full(
    gen: &FullGenerator,
    rho0: &Mat<c64>,
    times: &[f64],
) -> Result<FullTrajectory> {
    check_times(times)?;
    let n = gen.dim;
    if rho0.nrows() != n || rho0.ncols() != n {
        return Err(Error::DimensionMismatch(format!("initial state must be {n}x{n}")));
    }
    let x0 = Mat::<c64>::from_fn(n * n, 1, |i, _| rho0[(i / n, i % n)]);
    match eigen_modes(&gen.matrix, &x0) {
        Ok((lambdas, modes)) => {
            let states = times
                .iter()
                .map(|&t| {
                    let mut rho = Mat::<c64>::zeros(n, n);
                    for (lam, col) in lambdas.iter().zip(modes.iter()) {
                        let w = (lam * t).exp();
                        for (i, v) in col.iter().enumerate() {
                            rho[(i / n, i % n)] += v * w;
                        }
                    }
                    rho
                })
                .collect();
            Ok(FullTrajectory { times: times.to_vec(), states, provenance: Provenance::OracleRedfield })
        }
        Err(_) => {
            let states = times
                .iter()
                .map(|&t| {
                    let e = expm(&scale(&gen.matrix, t));
                    let xt = &e * &x0;
                    Mat::<c64>::from_fn(n, n, |a, b| xt[(a * n + b, 0)])
                })
                .collect();
            Ok(FullTrajectory { times: times.to_vec(), states, provenance: Provenance::OracleExpm })
        }
    }
}

/// Eigen-expands `x0` over the modes of `m`: returns the eigenvalues and the
/// per-mode columns y_n u_n. Errors if `m` is (numerically) defective.
fn eigen_modes(m: &Mat<c64>, x0: &Mat<c64>) -> Result<(Vec<c64>, Vec<Vec<c64>>)> {
    let n = m.nrows();
    let evd = m
        .eigen()
        .map_err(|e| Error::Eigendecomposition(format!("{e:?}")))?;
    let u = evd.U().to_owned();
    let lu = u.full_piv_lu();
    // faer normalizes eigenvector columns, so a tiny determinant means a
    // (numerically) defective eigenbasis
    if u.determinant().norm() < 1e-10 {
        return Err(Error::Eigendecomposition("defective eigenbasis".into()));
    }
    let y = lu.solve(x0);
    let mut lambdas = Vec::with_capacity(n);
    let mut modes = Vec::with_capacity(n);
    for j in 0..n {
        lambdas.push(evd.S()[j]);
        modes.push((0..n).map(|i| u[(i, j)] * y[(j, 0)]).collect());
    }
    Ok((lambdas, modes))
}

fn complexify(m: &Mat<f64>) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0))
}

fn scale(m: &Mat<c64>, s: f64) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm(m: &Mat<c64>) -> Mat<c64> {
    let n = m.nrows();
    let norm: f64 = (0..n)
        .map(|j| (0..n).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let a = scale(m, 0.5f64.powi(s as i32));
    let mut result = Mat::<c64>::identity(n, n);
    let mut term = Mat::<c64>::identity(n, n);
    for k in 1..=24 {
        term = &term * &a;
        term = scale(&term, 1.0 / k as f64);
        result += &term;
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// Trace distance D = (1/2) Tr |a - b| between two density matrices.
pub fn trace_distance(a: &Mat<c64>, b: &Mat<c64>) -> Result<f64> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::DimensionMismatch("trace distance needs equal square matrices".into()));
    }
    let diff = a - b;
    for i in 0..n {
        for j in 0..n {
            if (diff[(i, j)] - diff[(j, i)].conj()).norm() > 1e-8 {
                return Err(Error::InvalidParameter("trace distance requires Hermitian inputs".into()));
            }
        }
    }
    let evd = diff
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Eigendecomposition(format!("{e:?}")))?;
    Ok(0.5 * (0..n).map(|i| evd.S()[i].re.abs()).sum::<f64>())
}

/// Distance-to-reference curve for a reduced trajectory (states lifted to
/// full 3x3 matrices first).
pub fn distance_curve_reduced(traj: &ReducedTrajectory, reference: &Mat<c64>) -> Result<DistanceCurve> {
    let d = traj
        .states
        .iter()
        .map(|s| trace_distance(&s.lift(), reference))
        .collect::<Result<Vec<_>>>()?;
    Ok(DistanceCurve { times: traj.times.clone(), d })
}

/// Distance-to-reference curve for a full trajectory.
pub fn distance_curve_full(traj: &FullTrajectory, reference: &Mat<c64>) -> Result<DistanceCurve> {
    let d = traj
        .states
        .iter()
        .map(|s| trace_distance(s, reference))
        .collect::<Result<Vec<_>>>()?;
    Ok(DistanceCurve { times: traj.times.clone(), d })
}

/// Result of a threshold-crossing search on a distance curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EquilibrationOutcome {
    /// First time the curve drops below the threshold (log-linear
    /// interpolation between the bracketing samples).
    CrossedAt(f64),
    /// The curve never reached the threshold within the grid.
    HorizonExceeded { final_distance: f64 },
}

impl EquilibrationOutcome {
    pub fn time(&self) -> Option<f64> {
        match self {
            Self::CrossedAt(t) => Some(*t),
            Self::HorizonExceeded { .. } => None,
        }
    }
}

/// First time the distance curve drops below `epsilon`.
pub fn equilibration_time(curve: &DistanceCurve, epsilon: f64) -> EquilibrationOutcome {
    for (i, (&t, &d)) in curve.times.iter().zip(&curve.d).enumerate() {
        if d < epsilon {
            if i == 0 {
                return EquilibrationOutcome::CrossedAt(t);
            }
            let (t0, d0) = (curve.times[i - 1], curve.d[i - 1]);
            if d0 <= 0.0 || d <= 0.0 {
                return EquilibrationOutcome::CrossedAt(t);
            }
            // log-linear refinement between the bracketing samples
            let f = (d0.ln() - epsilon.ln()) / (d0.ln() - d.ln());
            return EquilibrationOutcome::CrossedAt(t0 + f * (t - t0));
        }
    }
    EquilibrationOutcome::HorizonExceeded {
        final_distance: *curve.d.last().unwrap_or(&f64::NAN),
    }
}

/// Earliest time where sign(D_A - D_B) flips, linearly interpolated.
/// Returns `None` when the curves never cross (identical curves included).
pub fn detect_crossing(a: &DistanceCurve, b: &DistanceCurve) -> Option<f64> {
    assert_eq!(a.times.len(), b.times.len(), "curves must share a grid");
    let zero_tol = 1e-15;
    let sgn = |x: f64| if x.abs() <= zero_tol { 0 } else if x > 0.0 { 1 } else { -1 };
    let mut prev: Option<(f64, f64, i32)> = None;
    for ((&t, &da), &db) in a.times.iter().zip(&a.d).zip(&b.d) {
        let f = da - db;
        let s = sgn(f);
        if let Some((t0, f0, s0)) = prev {
            if s != 0 && s0 != 0 && s != s0 {
                let frac = f0 / (f0 - f);
                return Some(t0 + frac * (t - t0));
            }
        }
        if s != 0 {
            prev = Some((t, f, s));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{build_reduced, gibbs_state};
    use crate::model::{BathSpec, VModelParams, SystemSpec, v_rates};
    use approx::assert_relative_eq;

    fn canonical() -> (VModelParams, BathSpec) {
        (
            VModelParams::new(1.0, 1e-4).unwrap(),
            BathSpec::new(2.0, 0.005).unwrap(),
        )
    }

    #[test]
    fn steady_state_stays_constant() {
        let (params, bath) = canonical();
        let gen = build_reduced(params.delta, v_rates(&params, &bath).unwrap());
        let ss = gen.steady_state().unwrap();
        let times = log_grid(0.1, 1e7, 10);
        let traj = propagate_reduced(&gen, &ss, &times).unwrap();
        for s in &traj.states {
            assert_relative_eq!(s.p, ss.p, epsilon = 1e-12);
            assert!(s.coh_re.abs() < 1e-12);
        }
    }

    #[test]
    fn expm_matches_eigenpropagation() {
        let (params, bath) = canonical();
        let gen = build_reduced(params.delta, v_rates(&params, &bath).unwrap());
        let t = 37.0;
        let e = expm(&scale(&complexify(&gen.l), t));
        // compare against the eigendecomposition route
        let x0 = ReducedState::ground();
        let traj = propagate_reduced(&gen, &x0, &[t]).unwrap();
        let ss = gen.steady_state().unwrap();
        let dev = Mat::<c64>::from_fn(3, 1, |i, _| {
            c64::new(x0.to_vector()[i] - ss.to_vector()[i], 0.0)
        });
        let xt = &e * &dev;
        for i in 0..3 {
            assert_relative_eq!(
                xt[(i, 0)].re + ss.to_vector()[i],
                traj.states[0].to_vector()[i],
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn semigroup_restart_consistency() {
        let (params, bath) = canonical();
        let gen = build_reduced(params.delta, v_rates(&params, &bath).unwrap());
        let x0 = ReducedState::ground();
        let t1 = 50.0;
        let s = 200.0;
        let one_shot = propagate_reduced(&gen, &x0, &[t1, t1 + s]).unwrap();
        let restart = propagate_reduced(&gen, &one_shot.states[0], &[s]).unwrap();
        for i in 0..3 {
            assert_relative_eq!(
                one_shot.states[1].to_vector()[i],
                restart.states[0].to_vector()[i],
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn trace_distance_basics() {
        let a = Mat::<c64>::from_fn(2, 2, |i, j| {
            if i == j && i == 0 { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) }
        });
        let b = Mat::<c64>::from_fn(2, 2, |i, j| {
            if i == j && i == 1 { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) }
        });
        assert_relative_eq!(trace_distance(&a, &a).unwrap(), 0.0);
        assert_relative_eq!(trace_distance(&a, &b).unwrap(), 1.0, epsilon = 1e-14);
        let c = Mat::<c64>::zeros(3, 3);
        assert!(trace_distance(&a, &c).is_err());
    }

    #[test]
    fn trace_distance_mixed_vs_gibbs() {
        let params = VModelParams::new(1.0, 1e-9).unwrap();
        let system = SystemSpec::v_model(&params, 1);
        let gibbs = gibbs_state(&system, 2.0).unwrap();
        let mixed = Mat::<c64>::from_fn(3, 3, |i, j| {
            if i == j { c64::new(1.0 / 3.0, 0.0) } else { c64::new(0.0, 0.0) }
        });
        let d = trace_distance(&mixed, &gibbs).unwrap();
        assert_relative_eq!(d, 0.1185, epsilon = 1e-4);
    }

    #[test]
    fn equilibration_time_on_exponential() {
        let times = log_grid(0.1, 1e4, 40);
        let rate = 0.05;
        let d: Vec<f64> = times.iter().map(|t| 0.3 * (-rate * t).exp()).collect();
        let curve = DistanceCurve { times: times.clone(), d };
        let eps = 1e-4;
        match equilibration_time(&curve, eps) {
            EquilibrationOutcome::CrossedAt(t) => {
                let exact = (0.3f64 / eps).ln() / rate;
                assert_relative_eq!(t, exact, max_relative = 0.02);
            }
            other => panic!("expected crossing, got {other:?}"),
        }
        // constant-at-zero curve crosses at the first grid point
        let zero = DistanceCurve { times: times.clone(), d: vec![0.0; times.len()] };
        assert_eq!(equilibration_time(&zero, eps), EquilibrationOutcome::CrossedAt(times[0]));
        // a curve that never crosses reports the final distance
        let flat = DistanceCurve { times: times.clone(), d: vec![0.5; times.len()] };
        assert!(matches!(
            equilibration_time(&flat, eps),
            EquilibrationOutcome::HorizonExceeded { final_distance } if final_distance == 0.5
        ));
    }

    #[test]
    fn crossing_detection() {
        let times: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let a = DistanceCurve {
            times: times.clone(),
            d: times.iter().map(|t| 0.5 * (-0.1 * t).exp()).collect(),
        };
        let b = DistanceCurve {
            times: times.clone(),
            d: times.iter().map(|t| 0.1 * (-0.01 * t).exp()).collect(),
        };
        // a starts above b, decays faster: exactly one crossing
        let t = detect_crossing(&a, &b).expect("crossing");
        // analytic crossing of the two exponentials
        let exact = (0.5f64 / 0.1).ln() / (0.1 - 0.01);
        assert_relative_eq!(t, exact, max_relative = 0.05);
        assert_eq!(detect_crossing(&a, &a), None);
    }
}
