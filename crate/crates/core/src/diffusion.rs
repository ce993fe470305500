//! Stochastic integration of the basic relativistic diffusion
//! ∘dΦ = H₀(Φ) ds + σ Σ_j V_j(Φ) ∘ dw^j on the frame bundle.
//!
//! Each step is a symmetric splitting: half a Brownian boost, one geodesic
//! step, the other half of the same boost. Boosts are exact matrix
//! exponentials, so the fiber part never leaves SO₀(1,3).
//!
//! Explosion is not observable directly. A path is declared exploded when it
//! leaves one of a family of nested regions: coordinates beyond
//! `coord_bound`, Kretschmann scalar beyond `curvature_bound`, a chart's
//! terminal boundary, or a step that cannot be completed above `min_step`.

use crate::frame_bundle::{
    geodesic_step_checked, normalized_defect, reorthonormalize, vertical_flow, Frame, FrameError,
};
use crate::geometry::{ChartId, Minkowski, Spacetime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{self, Write};
use thiserror::Error;

/// u64 draws consumed per step; ChaCha counts positions in 32-bit words.
const DRAWS_PER_STEP: u128 = 4;

/// Frames whose normalized defect exceeds this are never recorded.
pub const SAMPLE_DEFECT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DiffusionError {
    #[error("invalid `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error("invalid initial frame: {0}")]
    InitialFrame(#[from] FrameError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExplosionThresholds {
    /// Largest admissible |x^μ| in any chart.
    pub coord_bound: f64,
    /// Largest admissible Kretschmann scalar.
    pub curvature_bound: f64,
    /// Smallest sub-step before a step counts as collapsed.
    pub min_step: f64,
    /// Largest normalized frame defect accepted from a raw geodesic step.
    pub max_step_defect: f64,
}

impl Default for ExplosionThresholds {
    fn default() -> Self {
        ExplosionThresholds {
            coord_bound: 1e300,
            curvature_bound: 1e12,
            min_step: 1e-12,
            max_step_defect: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiffusionConfig {
    pub sigma: f64,
    pub ds: f64,
    pub s_max: f64,
    pub explosion: ExplosionThresholds,
    pub seed: u64,
    pub trajectory_index: u64,
    /// Record every `output_stride`-th step.
    pub output_stride: usize,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        DiffusionConfig {
            sigma: 1.0,
            ds: 1e-2,
            s_max: 10.0,
            explosion: ExplosionThresholds::default(),
            seed: 0,
            trajectory_index: 0,
            output_stride: 1,
        }
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> DiffusionError {
    DiffusionError::InvalidConfig {
        field: field.to_string(),
        reason: reason.into(),
    }
}

impl DiffusionConfig {
    pub fn validate(&self) -> Result<(), DiffusionError> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(invalid("sigma", format!("must be finite and >= 0, got {}", self.sigma)));
        }
        if !(self.ds > 0.0 && self.ds.is_finite()) {
            return Err(invalid("ds", format!("must be finite and > 0, got {}", self.ds)));
        }
        if !(self.s_max > 0.0 && self.s_max.is_finite()) {
            return Err(invalid("s_max", format!("must be finite and > 0, got {}", self.s_max)));
        }
        if self.ds > self.s_max {
            return Err(invalid("ds", format!("must not exceed s_max = {}", self.s_max)));
        }
        let t = &self.explosion;
        for (name, v) in [
            ("explosion.coord_bound", t.coord_bound),
            ("explosion.curvature_bound", t.curvature_bound),
            ("explosion.min_step", t.min_step),
            ("explosion.max_step_defect", t.max_step_defect),
        ] {
            if !(v > 0.0) || v.is_nan() {
                return Err(invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if t.min_step > self.ds {
            return Err(invalid("explosion.min_step", "must not exceed ds"));
        }
        if self.output_stride == 0 {
            return Err(invalid("output_stride", "must be >= 1"));
        }
        Ok(())
    }

    /// Number of nominal steps to reach `s_max`; the last one may be short.
    pub fn n_steps(&self) -> u64 {
        let n = (self.s_max / self.ds).ceil();
        // guard against s_max/ds landing one ulp above an integer
        if (n - 1.0) * self.ds >= self.s_max {
            (n - 1.0) as u64
        } else {
            n as u64
        }
    }

    /// Proper time at the end of nominal step `k` (k = 0 is the start).
    pub fn time_of(&self, k: u64) -> f64 {
        (k as f64 * self.ds).min(self.s_max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExplosionReason {
    CoordBound,
    CurvatureBound,
    StepCollapse,
    ChartExit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum Termination {
    BudgetExhausted { s: f64 },
    Exploded { reason: ExplosionReason, zeta: f64 },
    /// An observer asked to stop.
    Stopped { s: f64 },
}

impl Termination {
    pub fn is_exploded(&self) -> bool {
        matches!(self, Termination::Exploded { .. })
    }

    /// ζ̂ for exploded paths, +∞ otherwise.
    pub fn zeta(&self) -> f64 {
        match self {
            Termination::Exploded { zeta, .. } => *zeta,
            _ => f64::INFINITY,
        }
    }

    /// Proper time at which the run ended.
    pub fn end(&self) -> f64 {
        match *self {
            Termination::BudgetExhausted { s } | Termination::Stopped { s } => s,
            Termination::Exploded { zeta, .. } => zeta,
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::BudgetExhausted { .. } => write!(f, "BudgetExhausted"),
            Termination::Exploded { reason, .. } => write!(f, "Exploded({reason:?})"),
            Termination::Stopped { .. } => write!(f, "Stopped"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartTransition {
    pub s: f64,
    pub from: ChartId,
    pub to: ChartId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<(f64, Frame)>,
    pub transitions: Vec<ChartTransition>,
    pub termination: Termination,
}

/// What a run reports when samples are consumed by an observer.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub termination: Termination,
    pub transitions: Vec<ChartTransition>,
    pub final_frame: Frame,
    pub steps: u64,
}

fn box_muller(rng: &mut ChaCha8Rng) -> [f64; 4] {
    // open-interval uniforms from the top 53 bits
    let mut u = || ((rng.random::<u64>() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64);
    let (u1, u2, u3, u4) = (u(), u(), u(), u());
    let r1 = (-2.0 * u1.ln()).sqrt();
    let r2 = (-2.0 * u3.ln()).sqrt();
    let (s1, c1) = (std::f64::consts::TAU * u2).sin_cos();
    let (s2, c2) = (std::f64::consts::TAU * u4).sin_cos();
    [r1 * c1, r1 * s1, r2 * c2, r2 * s2]
}

fn keyed_rng(seed: u64, trajectory: u64, step: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trajectory);
    rng.set_word_pos(step as u128 * DRAWS_PER_STEP * 2);
    rng
}

/// Three independent N(0, 1) variates keyed by (seed, trajectory, step).
pub fn standard_normals(seed: u64, trajectory: u64, step: u64) -> [f64; 3] {
    let z = box_muller(&mut keyed_rng(seed, trajectory, step));
    [z[0], z[1], z[2]]
}

/// Brownian increment over a step of length `ds`, keyed by (seed, trajectory, step).
pub fn noise_increment(seed: u64, trajectory: u64, step: u64, ds: f64) -> [f64; 3] {
    standard_normals(seed, trajectory, step).map(|z| z * ds.sqrt())
}

/// Sequential reader of the keyed noise for one trajectory. Produces exactly
/// the values of [`standard_normals`] without re-seeking every step.
pub struct NoiseStream {
    rng: ChaCha8Rng,
    next_step: u64,
    seed: u64,
    trajectory: u64,
}

impl NoiseStream {
    pub fn new(seed: u64, trajectory: u64) -> Self {
        NoiseStream {
            rng: keyed_rng(seed, trajectory, 0),
            next_step: 0,
            seed,
            trajectory,
        }
    }

    pub fn normals(&mut self, step: u64) -> [f64; 3] {
        if step != self.next_step {
            self.rng = keyed_rng(self.seed, self.trajectory, step);
        }
        self.next_step = step + 1;
        let z = box_muller(&mut self.rng);
        [z[0], z[1], z[2]]
    }
}

/// One splitting step: boost by σΔW/2, geodesic step of `ds`, boost by σΔW/2.
pub fn step(st: &dyn Spacetime, f: &Frame, sigma: f64, ds: f64, dw: [f64; 3]) -> Result<Frame, FrameError> {
    split_step(st, f, sigma, ds, dw).map(|(g, _)| g)
}

fn split_step(st: &dyn Spacetime, f: &Frame, sigma: f64, ds: f64, dw: [f64; 3]) -> Result<(Frame, f64), FrameError> {
    let half = dw.map(|w| 0.5 * sigma * w);
    let a = vertical_flow(f, half);
    let (b, defect) = geodesic_step_checked(st, &a, ds)?;
    if half == [0.0; 3] {
        return Ok((b, defect));
    }
    // boosts are exact only in exact arithmetic; repair the rounding
    Ok((reorthonormalize(st, &vertical_flow(&b, half))?, defect))
}

fn explosion_check(st: &dyn Spacetime, f: &Frame, t: &ExplosionThresholds) -> Option<ExplosionReason> {
    if st.terminal(&f.point) {
        return Some(ExplosionReason::ChartExit);
    }
    if f.point.coords.iter().any(|x| !(x.abs() <= t.coord_bound)) || f.e.iter().any(|x| !x.is_finite()) {
        return Some(ExplosionReason::CoordBound);
    }
    if !st.is_flat() {
        match st.kretschmann(&f.point) {
            Ok(k) if k.abs() <= t.curvature_bound => {}
            _ => return Some(ExplosionReason::CurvatureBound),
        }
    }
    None
}

/// Advance across one nominal step of length `h` with increment `dw`,
/// halving on rejection. Sub-steps use the matching fraction of `dw`.
fn advance(
    st: &dyn Spacetime,
    cfg: &DiffusionConfig,
    f: Frame,
    s0: f64,
    h: f64,
    dw: [f64; 3],
    transitions: &mut Vec<ChartTransition>,
) -> Result<Frame, (Frame, ExplosionReason, f64)> {
    let t = &cfg.explosion;
    let mut f = f;
    let mut done = 0.0;
    let mut chunk = 1.0;
    while done < 1.0 {
        chunk = f64::min(chunk, 1.0 - done);
        let sub = chunk * h;
        let s_here = s0 + done * h;
        if sub < t.min_step {
            return Err((f, ExplosionReason::StepCollapse, s_here));
        }
        let attempt = split_step(st, &f, cfg.sigma, sub, dw.map(|w| w * chunk));
        match attempt {
            Ok((g, defect)) if defect <= t.max_step_defect => {
                if g.point.chart != f.point.chart {
                    transitions.push(ChartTransition {
                        s: s0 + (done + chunk) * h,
                        from: f.point.chart,
                        to: g.point.chart,
                    });
                }
                f = g;
                done += chunk;
                if let Some(reason) = explosion_check(st, &f, t) {
                    return Err((f, reason, s0 + done.min(1.0) * h));
                }
                chunk *= 2.0;
            }
            // too inaccurate, out of domain, or degenerate: retry shorter
            Ok(_) | Err(_) => chunk *= 0.5,
        }
    }
    Ok(f)
}

/// Run one path, handing every completed nominal step to `observer`
/// (including the start, with k = 0). The observer returns `false` to stop.
pub fn simulate_observed(
    st: &dyn Spacetime,
    cfg: &DiffusionConfig,
    f0: &Frame,
    observer: &mut dyn FnMut(u64, f64, &Frame) -> bool,
) -> Result<Outcome, DiffusionError> {
    cfg.validate()?;
    f0.validate(st, SAMPLE_DEFECT_TOL)?;
    let mut transitions = Vec::new();
    let n = cfg.n_steps();
    let mut f = *f0;
    if let Some(reason) = explosion_check(st, &f, &cfg.explosion) {
        return Ok(Outcome {
            termination: Termination::Exploded { reason, zeta: 0.0 },
            transitions,
            final_frame: f,
            steps: 0,
        });
    }
    if !observer(0, 0.0, &f) {
        return Ok(Outcome {
            termination: Termination::Stopped { s: 0.0 },
            transitions,
            final_frame: f,
            steps: 0,
        });
    }
    let mut noise = NoiseStream::new(cfg.seed, cfg.trajectory_index);
    for k in 0..n {
        let (s0, s1) = (cfg.time_of(k), cfg.time_of(k + 1));
        let z = noise.normals(k);
        let h = s1 - s0;
        let dw = z.map(|x| x * h.sqrt());
        match advance(st, cfg, f, s0, h, dw, &mut transitions) {
            Ok(g) => f = g,
            Err((g, reason, zeta)) => {
                observer(k + 1, zeta, &g);
                return Ok(Outcome {
                    termination: Termination::Exploded { reason, zeta },
                    transitions,
                    final_frame: g,
                    steps: k + 1,
                });
            }
        }
        if !observer(k + 1, s1, &f) {
            return Ok(Outcome {
                termination: Termination::Stopped { s: s1 },
                transitions,
                final_frame: f,
                steps: k + 1,
            });
        }
    }
    Ok(Outcome {
        termination: Termination::BudgetExhausted { s: cfg.s_max },
        transitions,
        final_frame: f,
        steps: n,
    })
}

/// Run one path, recording every `output_stride`-th step and the final state.
pub fn simulate(st: &dyn Spacetime, cfg: &DiffusionConfig, f0: &Frame) -> Result<Trajectory, DiffusionError> {
    let stride = cfg.output_stride as u64;
    let mut samples: Vec<(f64, Frame)> = Vec::new();
    let mut last_k = None;
    let out = simulate_observed(st, cfg, f0, &mut |k, s, f| {
        if k % stride == 0 {
            samples.push((s, *f));
            last_k = Some(k);
        }
        true
    })?;
    // always end on the terminal state
    let end = out.termination.end();
    match samples.last() {
        Some(&(s, _)) if last_k == Some(out.steps) && s == end => {
            let n = samples.len();
            samples[n - 1] = (end, out.final_frame);
        }
        _ => samples.push((end, out.final_frame)),
    }
    Ok(Trajectory {
        samples,
        transitions: out.transitions,
        termination: out.termination,
    })
}

/// Dudley's diffusion in Minkowski space: Γ ≡ 0, so the geodesic part is
/// m += ds·e₀ and the fiber part is the product of Brownian boosts.
pub fn dudley_simulate(cfg: &DiffusionConfig, f0: &Frame) -> Result<Trajectory, DiffusionError> {
    simulate(&Minkowski, cfg, f0)
}

/// Write a trajectory as CSV: one row per sample, then the termination line.
pub fn write_csv(st: &dyn Spacetime, traj: &Trajectory, w: &mut dyn Write) -> io::Result<()> {
    let mut header = String::from("s,chart,x0,x1,x2,x3");
    for i in 0..4 {
        for j in 0..4 {
            header.push_str(&format!(",e{i}{j}"));
        }
    }
    header.push_str(",defect");
    writeln!(w, "{header}")?;
    for (s, f) in &traj.samples {
        let mut line = format!("{s:.16e},{}", f.point.chart.0);
        for x in f.point.coords {
            line.push_str(&format!(",{x:.16e}"));
        }
        for i in 0..4 {
            for j in 0..4 {
                line.push_str(&format!(",{:.16e}", f.e[(i, j)]));
            }
        }
        let d = normalized_defect(st, f).unwrap_or(f64::NAN);
        line.push_str(&format!(",{d:.16e}"));
        writeln!(w, "{line}")?;
    }
    writeln!(w, "# termination={} zeta={:.16e}", traj.termination, traj.termination.zeta())
}
