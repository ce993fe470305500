use crate::config::RunConfig;
use crate::output::Sink;
use crate::CliError;
use lorentz_core::diffusion::{self, ChartTransition, DiffusionConfig, Termination};
use lorentz_core::fiber_analysis::{
    check_lemma11, check_lemma7, check_theorem12, check_theorem8, green_h3, lemma9_residual, poisson_residual,
    sample_frames, vertical_identity_residual, CriterionReport, FiberFunctional, FrameSample,
};
use lorentz_core::frame_bundle::FrameRecord;
use lorentz_core::geometry::{Catalog, MetricData, Spacetime};
use lorentz_core::montecarlo::{
    estimate_explosion, exponential_moment, tube_test, MonteCarloError, TubeCore, TubeSpec,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const THEOREMS: [&str; 4] = ["lemma7", "lemma11", "thm8", "thm12"];

impl From<MonteCarloError> for CliError {
    fn from(e: MonteCarloError) -> Self {
        match e {
            MonteCarloError::Invalid(_) | MonteCarloError::TubeTooWide(_) | MonteCarloError::ThreadPool(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Run(other.to_string()),
        }
    }
}

fn run_err(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub spacetime: String,
    pub parameters: BTreeMap<String, f64>,
    pub config: DiffusionConfig,
    pub initial_frame: FrameRecord,
    pub termination: Termination,
    /// Explosion time, absent for paths that did not explode.
    pub zeta: Option<f64>,
    pub final_frame: FrameRecord,
    pub n_samples: usize,
    pub transitions: Vec<ChartTransition>,
}

pub fn simulate(cfg: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let st = cfg.catalog()?;
    let f0 = cfg.initial_frame(&st)?;
    let traj = diffusion::simulate(&st, &cfg.diffusion, &f0).map_err(|e| CliError::Config(e.to_string()))?;
    let (_, last) = traj.samples.last().ok_or_else(|| run_err("empty trajectory"))?;
    let summary = SimulateSummary {
        spacetime: st.id().to_string(),
        parameters: st.parameters().into_iter().collect(),
        config: cfg.diffusion.clone(),
        initial_frame: f0.to_record(&st),
        termination: traj.termination,
        zeta: traj.termination.is_exploded().then(|| traj.termination.zeta()),
        final_frame: last.to_record(&st),
        n_samples: traj.samples.len(),
        transitions: traj.transitions.clone(),
    };
    if sink.has_dir() {
        let mut csv = Vec::new();
        diffusion::write_csv(&st, &traj, &mut csv).map_err(run_err)?;
        sink.write_file("trajectory.csv", &csv)?;
    } else {
        eprintln!("no output directory; trajectory CSV not written");
    }
    sink.emit_json("summary.json", &summary)
}

pub fn estimate(cfg: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let st = cfg.catalog()?;
    let f0 = cfg.initial_frame(&st)?;
    let n = cfg.experiment.n_paths;
    eprintln!("estimate: {n} paths on {} to s_max = {}", st.id(), cfg.diffusion.s_max);
    let report = estimate_explosion(&st, &cfg.diffusion, &f0, n)?;
    eprintln!("estimate: {} of {n} exploded", report.n_exploded);
    sink.emit_json("estimate.json", &report)
}

pub fn moments(cfg: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let st = cfg.catalog()?;
    let f0 = cfg.initial_frame(&st)?;
    let func = FiberFunctional::from_name(&cfg.experiment.functional, cfg.quadrature)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let curve = exponential_moment(&st, &func, &cfg.diffusion, &f0, cfg.experiment.n_paths, &cfg.experiment.times)?;
    if sink.has_dir() {
        let mut csv = Vec::new();
        curve.write_csv(&mut csv).map_err(run_err)?;
        sink.write_file("moments.csv", &csv)?;
    }
    sink.emit_json("moments.json", &curve)
}

pub fn tube(cfg: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let st = cfg.catalog()?;
    let f0 = cfg.initial_frame(&st)?;
    let x = &cfg.experiment;
    let spec = TubeSpec {
        frame0: f0,
        core: TubeCore::Geodesic,
        length: x.tube_length,
        radius: x.tube_radius,
        core_step: x.core_step,
    };
    let report = tube_test(&st, &spec, &cfg.diffusion, x.n_paths)?;
    sink.emit_json("tube.json", &report)
}

fn checker_sample(st: &Catalog, cfg: &RunConfig) -> Result<FrameSample, CliError> {
    let x = &cfg.experiment;
    sample_frames(st, &st.probe_points(x.n_points), x.frames_per_point, x.rapidity_max, cfg.diffusion.seed)
        .map_err(|e| CliError::Config(e.to_string()))
}

pub fn check_report(cfg: &RunConfig, theorem: &str) -> Result<CriterionReport, CliError> {
    if !THEOREMS.contains(&theorem) {
        return Err(CliError::Config(format!("unknown theorem `{theorem}`; expected one of {THEOREMS:?}")));
    }
    let st = cfg.catalog()?;
    let sample = checker_sample(&st, cfg)?;
    let x = &cfg.experiment;
    let sigma = cfg.diffusion.sigma;
    let named = |n: &str| FiberFunctional::from_name(n, cfg.quadrature).map_err(|e| CliError::Config(e.to_string()));
    Ok(match theorem {
        "lemma7" => {
            let f0 = cfg.initial_frame(&st)?;
            check_lemma7(&st, &named(&x.functional)?, &f0, sigma, x.big_c, &sample)
        }
        "lemma11" => check_lemma11(&st, &named(&x.f)?, &named(&x.h)?, x.c, x.c_prime, sigma, &sample),
        "thm8" => check_theorem8(&st, sigma, x.big_c, &sample),
        _ => check_theorem12(&st, sigma, x.alpha, x.c, x.c_prime, &sample, &cfg.quadrature),
    })
}

pub fn check(cfg: &RunConfig, theorem: &str, sink: &Sink) -> Result<(), CliError> {
    let report = check_report(cfg, theorem)?;
    eprintln!("check {theorem}: {:?}", report.verdict);
    sink.emit_json(&format!("check_{theorem}.json"), &report)
}

/// Largest residual of one identity on one spacetime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyEntry {
    pub spacetime: String,
    pub identity: String,
    pub n_frames: usize,
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub entries: Vec<VerifyEntry>,
    pub failures: Vec<String>,
    pub passed: bool,
}

/// Default tolerances; residuals are scaled by 1 + |R̃IC| + |T̃|.
pub const TOL_ORACLE: f64 = 1e-5;
pub const TOL_LEMMA9: f64 = 1e-4;
pub const TOL_VERTICAL: f64 = 1e-4;
pub const TOL_POISSON: f64 = 1e-3;
pub const TOL_HARMONIC: f64 = 1e-8;

/// Worst |a − b| / max(1, max|b|) over every curvature tensor.
fn oracle_gap(a: &MetricData, b: &MetricData) -> f64 {
    fn gap<'a>(xs: impl Iterator<Item = &'a f64> + Clone, ys: impl Iterator<Item = &'a f64> + Clone) -> f64 {
        let scale = ys.clone().fold(1.0f64, |m, y| m.max(y.abs()));
        xs.zip(ys).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
    }
    let g3 = |g: &[[[f64; 4]; 4]; 4]| g.iter().flatten().flatten().copied().collect::<Vec<_>>();
    let r4 = |r: &[[[[f64; 4]; 4]; 4]; 4]| r.iter().flatten().flatten().flatten().copied().collect::<Vec<_>>();
    let (ga, gb) = (g3(&a.gamma), g3(&b.gamma));
    let (ra, rb) = (r4(&a.riemann), r4(&b.riemann));
    [
        gap(ga.iter(), gb.iter()),
        gap(ra.iter(), rb.iter()),
        gap(a.ricci.iter(), b.ricci.iter()),
        gap(a.energy_momentum.iter(), b.energy_momentum.iter()),
        gap([a.scalar].iter(), [b.scalar].iter()),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Relative residual of ½(G'' + 2 coth ρ G') on a grid in [0.5, 10].
pub fn green_harmonicity() -> Result<f64, CliError> {
    let g = |r: f64| green_h3(r).map_err(run_err);
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    for k in 0..=95 {
        let rho = 0.5 + 0.1 * k as f64;
        let (m2, m1, c, p1, p2) = (g(rho - 2.0 * h)?, g(rho - h)?, g(rho)?, g(rho + h)?, g(rho + 2.0 * h)?);
        let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
        let d2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h);
        let scale = 0.5 * (d2.abs() + 2.0 * d1.abs() / rho.tanh());
        worst = worst.max((0.5 * (d2 + 2.0 * d1 / rho.tanh())).abs() / scale);
    }
    Ok(worst)
}

struct Sweep {
    entries: Vec<VerifyEntry>,
    override_tol: Option<f64>,
}

impl Sweep {
    fn push(&mut self, spacetime: &str, identity: &str, default_tol: f64, values: Vec<Result<f64, String>>) {
        let tolerance = self.override_tol.unwrap_or(default_tol);
        let n_frames = values.len();
        let error = values.iter().find_map(|v| v.as_ref().err().cloned());
        let max_residual = values.iter().filter_map(|v| v.as_ref().ok().copied()).reduce(f64::max);
        let passed = error.is_none() && max_residual.is_some_and(|r| r < tolerance);
        self.entries.push(VerifyEntry {
            spacetime: spacetime.into(),
            identity: identity.into(),
            n_frames,
            max_residual,
            tolerance,
            passed,
            error,
        });
    }
}

pub fn verify_report(cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    let x = &cfg.experiment;
    let sigma = cfg.diffusion.sigma;
    let mut sweep = Sweep { entries: Vec::new(), override_tol: x.tolerance };
    for id in &x.verify_spacetimes {
        let st = Catalog::from_id(id, &BTreeMap::new()).map_err(|e| CliError::Config(e.to_string()))?;
        let points = st.probe_points(x.verify_frames.div_ceil(2));
        let oracle = points
            .iter()
            .map(|p| {
                let a = st.curvature(p).map_err(|e| e.to_string())?;
                let b = st.curvature_oracle(p).map_err(|e| e.to_string())?;
                Ok(oracle_gap(&a, &b))
            })
            .collect();
        sweep.push(id, "curvature_oracle", TOL_ORACLE, oracle);

        let mut frames = sample_frames(&st, &points, 2, x.rapidity_max, cfg.diffusion.seed)
            .map_err(|e| CliError::Config(e.to_string()))?
            .frames;
        frames.truncate(x.verify_frames);
        let lemma9 = frames
            .iter()
            .map(|f| {
                lemma9_residual(&st, f, sigma).map(|r| r.residual / (1.0 + r.ric.abs() + r.t.abs())).map_err(|e| e.to_string())
            })
            .collect();
        sweep.push(id, "lemma9", TOL_LEMMA9, lemma9);
        let vertical = frames
            .iter()
            .map(|f| {
                vertical_identity_residual(&st, f)
                    .map(|r| r.residual / (1.0 + r.ric.abs() + r.t.abs()))
                    .map_err(|e| e.to_string())
            })
            .collect();
        sweep.push(id, "vertical_identity", TOL_VERTICAL, vertical);
        if x.verify_poisson_frames > 0 {
            let poisson = frames
                .iter()
                .take(x.verify_poisson_frames)
                .map(|f| {
                    poisson_residual(&st, f, &cfg.quadrature)
                        .map(|r| r.residual / (1.0 + r.ric.abs()))
                        .map_err(|e| e.to_string())
                })
                .collect();
            sweep.push(id, "poisson", TOL_POISSON, poisson);
        }
    }
    sweep.push("hyperbolic_space", "green_harmonicity", TOL_HARMONIC, vec![green_harmonicity().map_err(|e| e.to_string())]);

    let failures: Vec<String> = sweep
        .entries
        .iter()
        .filter(|e| !e.passed)
        .map(|e| match (&e.error, e.max_residual) {
            (Some(err), _) => format!("{}/{}: {err}", e.spacetime, e.identity),
            (None, Some(r)) => format!("{}/{}: residual {r:.3e} >= tolerance {:.3e}", e.spacetime, e.identity, e.tolerance),
            (None, None) => format!("{}/{}: no residuals", e.spacetime, e.identity),
        })
        .collect();
    Ok(VerifyReport { passed: failures.is_empty(), failures, entries: sweep.entries })
}

pub fn verify(cfg: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let report = verify_report(cfg)?;
    sink.emit_json("verify.json", &report)?;
    if report.passed {
        Ok(())
    } else {
        for f in &report.failures {
            eprintln!("FAIL {f}");
        }
        Err(CliError::VerifyFailed(report.failures.len()))
    }
}
