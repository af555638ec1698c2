//! The five experiment drivers behind the subcommands.

use std::path::Path;

use faer::c64;
use faer::Mat;
use mpemba_core::analysis::{
    detect_crossing, distance_curve_reduced, equilibration_time, log_grid, propagate_full,
    trace_distance, DistanceCurve, EquilibrationOutcome,
};
use mpemba_core::classical::{
    build_classical, classical_coefficients, classical_density, classical_eigenvalues,
    classical_equilibrium, classical_mpemba_bounds, classical_mpemba_state, classical_trajectory,
};
use mpemba_core::closedform::timescale_values;
use mpemba_core::generator::{
    build_full_redfield, build_reduced, ReducedGenerator, ReducedState,
};
use mpemba_core::lepe::{
    build_coefficient_system, exact_eigenvalues, lepe_spectrum, solve_coefficients, LepeSpectrum,
    SolveMode,
};
use mpemba_core::model::{
    aggregate_baths, lambda_rates, v_rates, BathSpec, Rates, SystemSpec, VModelParams,
    DEFAULT_VALIDITY_THRESHOLD,
};
use mpemba_core::mpemba::{c2_bounds, check_physical, make_mpemba_state, matrix_from_text, perturb_state};
use mpemba_core::validation::{run_invariant_suite, Verdict};
use rayon::prelude::*;

use crate::config::{expand_range, ExperimentConfig, ModelKind, PreparationKind, RangeSection};
use crate::output::{num, Csv};

/// Failure modes mapped to process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Exit 1: the configuration is invalid.
    Config(String),
    /// Exit 2: a state or parameter set is physically inadmissible.
    Physicality(String),
    /// Exit 3: a validity-regime warning promoted by --strict.
    Validity(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Physicality(_) => 2,
            Self::Validity(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Self::Config(m) | Self::Physicality(m) | Self::Validity(m) => m,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn config_err<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}

impl From<String> for CliError {
    fn from(msg: String) -> Self {
        // bare strings bubble up from filesystem-level output failures
        Self::Config(msg)
    }
}

const DEFAULT_EQ_THRESHOLD: f64 = 1e-4;

/// Everything the quantum commands need, resolved once from the config.
struct QuantumSetup {
    params: VModelParams,
    baths: Vec<BathSpec>,
    rates: Rates,
    gen: ReducedGenerator,
    spectrum: LepeSpectrum,
    system: SystemSpec,
    kind: ModelKind,
}

impl QuantumSetup {
    fn resolve(cfg: &ExperimentConfig) -> CliResult<Self> {
        let kind = cfg.model.kind;
        if kind == ModelKind::Classical {
            return config_err("model.kind = \"classical\": use the `classical` subcommand");
        }
        let params = cfg.params().map_err(CliError::Config)?;
        let baths = cfg.all_baths().map_err(CliError::Config)?;
        if kind != ModelKind::Multibath && baths.len() > 1 {
            return config_err("extra [[baths]] sections require model.kind = \"multibath\"");
        }
        let rates = match kind {
            ModelKind::V => v_rates(&params, &baths[0]),
            ModelKind::Lambda => lambda_rates(&params, &baths[0]),
            ModelKind::Multibath => aggregate_baths(&params, &baths),
            ModelKind::Classical => unreachable!(),
        }
        .map_err(|e| CliError::Config(e.to_string()))?;
        let gen = build_reduced(params.delta, rates);
        let spectrum = lepe_spectrum(&gen).map_err(|e| CliError::Physicality(e.to_string()))?;
        let system = match kind {
            ModelKind::Lambda => SystemSpec::lambda_model(&params, baths.len()),
            _ => SystemSpec::v_model(&params, baths.len()),
        };
        Ok(Self { params, baths, rates, gen, spectrum, system, kind })
    }

    fn project(&self, rho: &Mat<c64>) -> ReducedState {
        match self.kind {
            ModelKind::Lambda => ReducedState::project_lambda(rho),
            _ => ReducedState::project_v(rho),
        }
    }

    /// Maps a density matrix laid out as (singleton, doublet, doublet) into
    /// this model's level ordering.
    fn layout(&self, rho_v: Mat<c64>) -> Mat<c64> {
        match self.kind {
            ModelKind::Lambda => {
                // Lambda ordering: (doublet, doublet, singleton)
                let q = [1usize, 2, 0];
                Mat::<c64>::from_fn(3, 3, |i, j| rho_v[(q[i], q[j])])
            }
            _ => rho_v,
        }
    }

    fn timescales(&self) -> (f64, f64, f64) {
        timescale_values(self.rates.k, self.rates.phi, self.params.delta)
    }

    fn time_grid(&self, cfg: &ExperimentConfig) -> Vec<f64> {
        let (tau1, _, _) = self.timescales();
        let t_min = cfg.grid.t_min.unwrap_or(0.1 / self.params.nu);
        let t_max = cfg.grid.t_max.unwrap_or(10.0 * tau1);
        log_grid(t_min, t_max, cfg.grid.points_per_decade)
    }

    /// The configured initial state as a full density matrix.
    fn prepare(&self, cfg: &ExperimentConfig) -> CliResult<Mat<c64>> {
        let prep = &cfg.preparation;
        let rho = match prep.kind {
            PreparationKind::Ground => {
                let mut rho = Mat::<c64>::zeros(3, 3);
                rho[(0, 0)] = c64::new(1.0, 0.0);
                self.layout(rho)
            }
            PreparationKind::MaximallyMixed => {
                Mat::<c64>::from_fn(3, 3, |i, j| {
                    if i == j { c64::new(1.0 / 3.0, 0.0) } else { c64::new(0.0, 0.0) }
                })
            }
            PreparationKind::Mpemba | PreparationKind::PerturbedMpemba => {
                let c2 = prep.c2.unwrap_or(-0.24);
                let m = make_mpemba_state(c2, self.rates.k, self.rates.phi)
                    .map_err(|e| CliError::Physicality(self.echo_bounds(&e.to_string())))?;
                let rho = if matches!(prep.kind, PreparationKind::PerturbedMpemba) {
                    perturb_state(&m, prep.epsilon)
                        .map_err(|e| CliError::Physicality(e.to_string()))?
                } else {
                    m.rho0
                };
                self.layout(rho)
            }
            PreparationKind::ExplicitMatrix => {
                let path = prep.path.as_ref().ok_or_else(|| {
                    CliError::Config("preparation.kind = \"explicit-matrix\" needs preparation.path".into())
                })?;
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("cannot read state file {}: {e}", path.display()))
                })?;
                let rho = matrix_from_text(&text).map_err(|e| CliError::Config(e.to_string()))?;
                let report = check_physical(&rho).map_err(|e| CliError::Physicality(e.to_string()))?;
                if !report.all_ok() {
                    return Err(CliError::Physicality(format!(
                        "state file {} is not a physical density matrix: \
                         trace deviation {:.3e}, hermiticity deviation {:.3e}, min eigenvalue {:.3e}",
                        path.display(),
                        report.trace_deviation,
                        report.hermiticity_deviation,
                        report.min_eigenvalue
                    )));
                }
                rho
            }
        };
        Ok(rho)
    }

    fn echo_bounds(&self, detail: &str) -> String {
        let (lo, hi) = c2_bounds(self.rates.k, self.rates.phi);
        format!("{detail}; admissible c2 interval: [{}, {}]", num(lo), num(hi))
    }

    /// LEPE mode reconstruction x_i(t) for one element.
    fn analytic_element(&self, i: usize, x0: &ReducedState, times: &[f64]) -> CliResult<Vec<f64>> {
        let sys = build_coefficient_system(&self.gen, &self.spectrum, i, SolveMode::AtDelta)
            .map_err(|e| CliError::Physicality(e.to_string()))?;
        let c = solve_coefficients(&sys, x0).map_err(|e| CliError::Physicality(e.to_string()))?;
        Ok(times
            .iter()
            .map(|&t| {
                sys.x_inf
                    + c.iter()
                        .zip(&self.spectrum.lambda)
                        .map(|(cn, &l)| cn * (l * t).exp())
                        .sum::<f64>()
            })
            .collect())
    }

    fn stamp(&self, csv: &mut Csv) {
        csv.meta("nu", self.params.nu);
        csv.meta("delta", self.params.delta);
        csv.meta("temperature", self.baths[0].temperature);
        csv.meta("gamma", self.baths[0].gamma);
        csv.meta("k", self.rates.k);
        csv.meta("phi", self.rates.phi);
        for (n, l) in self.spectrum.lambda.iter().enumerate() {
            csv.meta(&format!("lambda{}", n + 1), *l);
        }
    }

    /// Returns the warning text if the splitting is outside the
    /// perturbative regime.
    fn validity_breach(&self) -> Option<String> {
        if self.params.validity_warning(DEFAULT_VALIDITY_THRESHOLD) {
            Some(format!(
                "delta/nu = {:.3e} exceeds the perturbative-regime threshold {DEFAULT_VALIDITY_THRESHOLD}; \
                 LEPE corrections are not reliable here",
                self.params.delta / self.params.nu
            ))
        } else {
            None
        }
    }
}

fn report_time(label: &str, outcome: &EquilibrationOutcome) {
    match outcome {
        EquilibrationOutcome::CrossedAt(t) => println!("{label} = {}", num(*t)),
        EquilibrationOutcome::HorizonExceeded { final_distance } => {
            println!("{label}: horizon exceeded (final distance {})", num(*final_distance))
        }
    }
}

fn finish(strict: bool, warnings: Vec<String>) -> CliResult<()> {
    for w in &warnings {
        println!("warning: {w}");
    }
    if strict {
        if let Some(w) = warnings.into_iter().next() {
            return Err(CliError::Validity(w));
        }
    }
    Ok(())
}

/// `simulate`: analytic (LEPE) trajectory against the Redfield oracle.
pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path, strict: bool) -> CliResult<()> {
    let q = QuantumSetup::resolve(cfg)?;
    let rho0 = q.prepare(cfg)?;
    let x0 = q.project(&rho0);
    let times = q.time_grid(cfg);
    let mut warnings = Vec::new();
    if let Some(w) = q.validity_breach() {
        warnings.push(w);
    }
    if q.baths.iter().any(|b| b.weak_coupling_warning()) {
        warnings.push("bath coupling gamma is outside the weak-coupling regime".into());
    }
    let (tau1, tau2, acceleration) = q.timescales();
    if *times.last().unwrap_or(&0.0) < 5.0 * tau1 {
        warnings.push(format!(
            "horizon {} is shorter than 5*tau1 = {}; the slow mode will not fully decay",
            num(*times.last().unwrap_or(&0.0)),
            num(5.0 * tau1)
        ));
    }

    // analytic columns from the LEPE mode expansion
    let p_analytic = q.analytic_element(0, &x0, &times)?;
    let coh_analytic = q.analytic_element(1, &x0, &times)?;

    // oracle columns from the full Redfield propagation
    let full = build_full_redfield(&q.system, &q.baths)
        .map_err(|e| CliError::Physicality(e.to_string()))?;
    let traj = propagate_full(&full, &rho0, &times)
        .map_err(|e| CliError::Physicality(e.to_string()))?;
    let oracle: Vec<ReducedState> = traj.states.iter().map(|s| q.project(s)).collect();

    let mut csv = Csv::new(&[
        "nu_t",
        "P_analytic",
        "sigma32R_analytic",
        "P_oracle",
        "sigma32R_oracle",
        "sigma32I_oracle",
        "abs_err_P",
        "abs_err_sigma32R",
    ]);
    q.stamp(&mut csv);
    for (i, &t) in times.iter().enumerate() {
        let o = &oracle[i];
        csv.row(vec![
            q.params.nu * t,
            p_analytic[i],
            coh_analytic[i],
            o.p,
            o.coh_re,
            o.coh_im,
            (p_analytic[i] - o.p).abs(),
            (coh_analytic[i] - o.coh_re).abs(),
        ]);
    }
    let path = csv.write(out, "simulate.csv")?;

    // run report
    println!("model = {:?}", q.kind);
    println!("k = {}", num(q.rates.k));
    println!("phi = {}", num(q.rates.phi));
    for n in 0..3 {
        println!(
            "lambda{} = {} (zeroth {}, correction {}, valid = {})",
            n + 1,
            num(q.spectrum.lambda[n]),
            num(q.spectrum.lambda0[n]),
            num(q.spectrum.delta_corr[n]),
            q.spectrum.valid[n]
        );
    }
    for i in 0..3 {
        let sys = build_coefficient_system(&q.gen, &q.spectrum, i, SolveMode::AtDelta)
            .map_err(|e| CliError::Physicality(e.to_string()))?;
        let c = solve_coefficients(&sys, &x0).map_err(|e| CliError::Physicality(e.to_string()))?;
        println!(
            "coefficients[element {i}] = {}",
            c.iter().map(|&v| num(v)).collect::<Vec<_>>().join(", ")
        );
    }
    println!("tau1 = {}", num(tau1));
    println!("tau2 = {}", num(tau2));
    println!("acceleration = {}", num(acceleration));
    let steady = q
        .gen
        .steady_state()
        .map_err(|e| CliError::Physicality(e.to_string()))?;
    let curve = DistanceCurve {
        times: times.clone(),
        d: oracle
            .iter()
            .map(|s| trace_distance(&s.lift(), &steady.lift()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Physicality(e.to_string()))?,
    };
    report_time("t_eq(oracle)", &equilibration_time(&curve, DEFAULT_EQ_THRESHOLD));
    println!("wrote {}", path.display());
    finish(strict, warnings)
}

/// `mpemba`: distance curves for the four canonical preparations.
pub fn cmd_mpemba(cfg: &ExperimentConfig, out: &Path, strict: bool) -> CliResult<()> {
    let q = QuantumSetup::resolve(cfg)?;
    let mut warnings = Vec::new();
    if let Some(w) = q.validity_breach() {
        warnings.push(w);
    }
    let c2 = cfg.preparation.c2.unwrap_or(-0.24);
    let m = make_mpemba_state(c2, q.rates.k, q.rates.phi)
        .map_err(|e| CliError::Physicality(q.echo_bounds(&e.to_string())))?;
    let n = perturb_state(&m, cfg.preparation.epsilon)
        .map_err(|e| CliError::Physicality(e.to_string()))?;
    let preparations: Vec<(&str, ReducedState)> = vec![
        ("M", m.reduced()),
        ("N", ReducedState::project_v(&n)),
        ("G", ReducedState::ground()),
        ("E", ReducedState::maximally_mixed()),
    ];
    let reference = q
        .gen
        .steady_state()
        .map_err(|e| CliError::Physicality(e.to_string()))?
        .lift();
    let times = q.time_grid(cfg);
    let mut curves = Vec::new();
    for (label, x0) in &preparations {
        let traj = mpemba_core::analysis::propagate_reduced(&q.gen, x0, &times)
            .map_err(|e| CliError::Physicality(e.to_string()))?;
        let curve = distance_curve_reduced(&traj, &reference)
            .map_err(|e| CliError::Physicality(e.to_string()))?;
        curves.push((*label, curve));
    }

    let mut csv = Csv::new(&["nu_t", "D_M", "D_N", "D_G", "D_E"]);
    q.stamp(&mut csv);
    csv.meta("c2", c2);
    csv.meta("epsilon", cfg.preparation.epsilon);
    for (i, &t) in times.iter().enumerate() {
        csv.row(vec![
            q.params.nu * t,
            curves[0].1.d[i],
            curves[1].1.d[i],
            curves[2].1.d[i],
            curves[3].1.d[i],
        ]);
    }
    let path = csv.write(out, "mpemba.csv")?;

    println!("c2 = {}", num(c2));
    let (lo, hi) = c2_bounds(q.rates.k, q.rates.phi);
    println!("c2_bounds = [{}, {}]", num(lo), num(hi));
    let mut t_eq = Vec::new();
    for (label, curve) in &curves {
        let outcome = equilibration_time(curve, DEFAULT_EQ_THRESHOLD);
        report_time(&format!("t_eq({label})"), &outcome);
        t_eq.push(outcome.time());
    }
    if let (Some(tm), Some(tg)) = (t_eq[0], t_eq[2]) {
        println!("t_eq(M)/t_eq(G) = {}", num(tm / tg));
    }
    if let (Some(tm), Some(te)) = (t_eq[0], t_eq[3]) {
        println!("t_eq(M)/t_eq(E) = {}", num(tm / te));
    }
    for (a, b) in [(0usize, 2usize), (0, 3), (1, 2), (1, 3), (0, 1)] {
        let (la, ca) = &curves[a];
        let (lb, cb) = &curves[b];
        match detect_crossing(ca, cb) {
            Some(t) => println!("crossing({la}, {lb}) = {}", num(t)),
            None => println!("crossing({la}, {lb}): none"),
        }
    }
    println!("wrote {}", path.display());
    finish(strict, warnings)
}

/// `classical`: the incoherent three-level chain under the same bath.
pub fn cmd_classical(cfg: &ExperimentConfig, out: &Path, strict: bool) -> CliResult<()> {
    if cfg.model.kind != ModelKind::Classical && cfg.model.kind != ModelKind::V {
        return config_err("the classical command expects model.kind = \"classical\"");
    }
    let bath = cfg.bath_spec(&cfg.bath).map_err(CliError::Config)?;
    let gen = build_classical(cfg.model.nu, cfg.model.delta, &bath)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let (l1, l2) = classical_eigenvalues(&gen);
    let (pi2, pi3) = classical_equilibrium(&gen);
    let bounds = classical_mpemba_bounds(&gen);
    let c22 = match (cfg.preparation.c2, bounds) {
        (Some(c), _) => c,
        (None, Some((lo, _))) => 0.8 * lo,
        (None, None) => {
            return Err(CliError::Physicality(
                "no admissible classical Mpemba interval at these parameters".into(),
            ))
        }
    };
    let p_m = classical_mpemba_state(&gen, c22).map_err(|e| {
        let echo = match bounds {
            Some((lo, hi)) => format!("{e}; admissible c22 interval: [{}, {}]", num(lo), num(hi)),
            None => e.to_string(),
        };
        CliError::Physicality(echo)
    })?;
    let p_e = [1.0 / 3.0, 1.0 / 3.0];
    let t_min = cfg.grid.t_min.unwrap_or(0.1 / cfg.model.nu);
    let t_max = cfg.grid.t_max.unwrap_or(100.0 / l1.abs().min(l2.abs()));
    let times = log_grid(t_min, t_max, cfg.grid.points_per_decade);
    let eq = classical_density([pi2, pi3]);

    let make_curve = |p0: [f64; 2]| -> CliResult<(DistanceCurve, Vec<[f64; 2]>)> {
        let coeffs =
            classical_coefficients(&gen, p0).map_err(|e| CliError::Physicality(e.to_string()))?;
        let traj = classical_trajectory(&gen, &coeffs, &times);
        let d = traj
            .iter()
            .map(|&p| trace_distance(&classical_density(p), &eq))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Physicality(e.to_string()))?;
        Ok((DistanceCurve { times: times.clone(), d }, traj))
    };
    let (curve_m, traj_m) = make_curve(p_m)?;
    let (curve_e, traj_e) = make_curve(p_e)?;

    let mut csv = Csv::new(&["nu_t", "D_M", "D_E", "p2_M", "p3_M", "p2_E", "p3_E"]);
    csv.meta("nu", cfg.model.nu);
    csv.meta("delta", cfg.model.delta);
    csv.meta("temperature", bath.temperature);
    csv.meta("gamma", bath.gamma);
    csv.meta("k21", gen.k21);
    csv.meta("k31", gen.k31);
    csv.meta("lambda1", l1);
    csv.meta("lambda2", l2);
    csv.meta("c22", c22);
    for (i, &t) in times.iter().enumerate() {
        csv.row(vec![
            cfg.model.nu * t,
            curve_m.d[i],
            curve_e.d[i],
            traj_m[i][0],
            traj_m[i][1],
            traj_e[i][0],
            traj_e[i][1],
        ]);
    }
    let path = csv.write(out, "classical.csv")?;

    println!("k21 = {}", num(gen.k21));
    println!("k31 = {}", num(gen.k31));
    println!("lambda1 = {}", num(l1));
    println!("lambda2 = {}", num(l2));
    println!("equilibrium = ({}, {})", num(pi2), num(pi3));
    if let Some((lo, hi)) = bounds {
        println!("c22_bounds = [{}, {}]", num(lo), num(hi));
    }
    println!("c22 = {}", num(c22));
    report_time("t_eq(M)", &equilibration_time(&curve_m, DEFAULT_EQ_THRESHOLD));
    report_time("t_eq(E)", &equilibration_time(&curve_e, DEFAULT_EQ_THRESHOLD));
    match detect_crossing(&curve_m, &curve_e) {
        Some(t) => println!("crossing(M, E) = {}", num(t)),
        None => println!("crossing(M, E): none"),
    }
    println!("wrote {}", path.display());
    finish(strict, Vec::new())
}

/// `sweep`: lambda1 exact-vs-perturbative scan over (Delta, T, gamma).
pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path, strict: bool) -> CliResult<()> {
    if cfg.model.kind == ModelKind::Classical {
        return config_err("sweep covers the quantum models only");
    }
    let default_delta = RangeSection {
        min: 1e-5,
        max: 1e-3,
        points: 21,
        scale: "log".into(),
    };
    let deltas = expand_range(cfg.sweep.delta.as_ref().unwrap_or(&default_delta), "delta")
        .map_err(CliError::Config)?;
    let temperatures = match &cfg.sweep.temperature {
        Some(r) => expand_range(r, "temperature").map_err(CliError::Config)?,
        None => vec![cfg.bath.temperature],
    };
    let gammas = match &cfg.sweep.gamma {
        Some(r) => expand_range(r, "gamma").map_err(CliError::Config)?,
        None => vec![cfg.bath.gamma],
    };
    let total = deltas.len() * temperatures.len() * gammas.len();
    if total > 1_000_000 {
        return config_err(format!("sweep grid has {total} points; the guard allows at most 1e6"));
    }
    let nu = cfg.model.nu;
    let lambda_model = cfg.model.kind == ModelKind::Lambda;
    let mut points = Vec::with_capacity(total);
    for &d in &deltas {
        for &t in &temperatures {
            for &g in &gammas {
                points.push((d, t, g));
            }
        }
    }
    let rows: Vec<Result<Vec<f64>, String>> = points
        .par_iter()
        .map(|&(delta, temperature, gamma)| {
            let params = VModelParams::new(nu, delta).map_err(|e| e.to_string())?;
            let bath = BathSpec::new(temperature, gamma).map_err(|e| e.to_string())?;
            let rates = if lambda_model {
                lambda_rates(&params, &bath)
            } else {
                v_rates(&params, &bath)
            }
            .map_err(|e| e.to_string())?;
            let gen = build_reduced(delta, rates);
            let spectrum = lepe_spectrum(&gen).map_err(|e| e.to_string())?;
            let exact = exact_eigenvalues(&gen).map_err(|e| e.to_string())?;
            let (_, _, acceleration) = timescale_values(rates.k, rates.phi, delta);
            let rel = ((spectrum.lambda[0] - exact[0]) / exact[0]).abs();
            Ok(vec![
                delta,
                temperature,
                gamma,
                rates.k,
                rates.phi,
                exact[0],
                spectrum.lambda[0],
                rel,
                acceleration,
            ])
        })
        .collect();

    let mut csv = Csv::new(&[
        "delta",
        "temperature",
        "gamma",
        "k",
        "phi",
        "lambda1_exact",
        "lambda1_lepe",
        "rel_err",
        "acceleration",
    ]);
    csv.meta("nu", nu);
    csv.meta_text("model", if lambda_model { "lambda" } else { "v" });
    for r in rows {
        csv.row(r.map_err(CliError::Physicality)?);
    }
    let path = csv.write(out, "sweep.csv")?;
    println!("points = {total}");
    println!("wrote {}", path.display());
    finish(strict, Vec::new())
}

/// `validate`: the full invariant battery; failures are results, not errors.
pub fn cmd_validate(cfg: &ExperimentConfig) -> CliResult<()> {
    let results = run_invariant_suite(cfg.model.delta);
    let mut failed = 0usize;
    for r in &results {
        match &r.verdict {
            Verdict::Pass => println!("PASS {}", r.name),
            Verdict::Skipped(why) => println!("SKIP {}: {why}", r.name),
            Verdict::Fail(why) => {
                failed += 1;
                println!("FAIL {}: {why}", r.name);
            }
        }
    }
    println!("{} checks, {} failed", results.len(), failed);
    Ok(())
}

