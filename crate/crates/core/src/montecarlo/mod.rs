//! Ensemble estimates over independent diffusion paths.
//!
//! Path `i` of an ensemble always uses `trajectory_index = i`, so its noise
//! is fixed by `(seed, i)`. Paths run in parallel and are reduced in index
//! order, which makes every report independent of the worker count.

mod tube;

pub use tube::{tube_test, TubeCore, TubeReport, TubeSpec};

use crate::diffusion::{simulate_observed, DiffusionConfig, DiffusionError, ExplosionReason, Termination};
use crate::fiber_analysis::{FiberError, FiberFunctional};
use crate::frame_bundle::{Frame, FrameError, FrameRecord};
use crate::geometry::Spacetime;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;
use thiserror::Error;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MonteCarloError {
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error(transparent)]
    Fiber(#[from] FiberError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("tube too wide: {0}")]
    TubeTooWide(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Wilson score interval for k successes in n trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Run `f` on a dedicated pool of `threads` workers (`None`: the global pool).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, MonteCarloError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(MonteCarloError::Invalid("thread count must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| MonteCarloError::ThreadPool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn check_paths(n_paths: u64) -> Result<(), MonteCarloError> {
    if n_paths == 0 {
        return Err(MonteCarloError::Invalid("n_paths must be at least 1".into()));
    }
    Ok(())
}

/// Validate once, then run path `i` for every i < n in parallel, in order.
fn ensemble<T: Send>(
    st: &dyn Spacetime,
    cfg: &DiffusionConfig,
    f0: &Frame,
    n_paths: u64,
    run: impl Fn(&DiffusionConfig) -> Result<T, DiffusionError> + Sync,
) -> Result<Vec<T>, MonteCarloError> {
    check_paths(n_paths)?;
    cfg.validate()?;
    f0.validate(st, crate::diffusion::SAMPLE_DEFECT_TOL).map_err(DiffusionError::from)?;
    let n = usize::try_from(n_paths).map_err(|_| MonteCarloError::Invalid("n_paths too large".into()))?;
    let out: Result<Vec<T>, DiffusionError> = (0..n)
        .into_par_iter()
        .map(|i| {
            let c = DiffusionConfig { trajectory_index: i as u64, ..cfg.clone() };
            run(&c)
        })
        .collect();
    Ok(out?)
}

fn reason_name(r: ExplosionReason) -> String {
    format!("{r:?}")
}

/// Explosion counts at a smaller budget, read off the same paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub s_max: f64,
    pub n_exploded: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplosionReport {
    pub spacetime: String,
    pub n_paths: u64,
    pub n_exploded: u64,
    pub n_completed: u64,
    /// ζ for the exploded paths, in trajectory order.
    pub zeta_samples: Vec<f64>,
    pub reasons: BTreeMap<String, u64>,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub s_max: f64,
    pub sweep: Vec<SweepPoint>,
    pub config: DiffusionConfig,
    pub initial_frame: FrameRecord,
    pub note: String,
}

impl ExplosionReport {
    /// Counts for ζ ≤ s at each requested budget s ≤ s_max.
    pub fn sweep_at(&self, budgets: &[f64]) -> Vec<SweepPoint> {
        budgets
            .iter()
            .filter(|&&s| s <= self.s_max)
            .map(|&s| {
                let k = self.zeta_samples.iter().filter(|&&z| z <= s).count() as u64;
                let (ci_low, ci_high) = wilson_interval(k, self.n_paths, Z95);
                SweepPoint { s_max: s, n_exploded: k, p_hat: k as f64 / self.n_paths as f64, ci_low, ci_high }
            })
            .collect()
    }
}

/// Estimate P(ζ ≤ s_max) from `n_paths` independent paths.
pub fn estimate_explosion(
    st: &dyn Spacetime,
    cfg: &DiffusionConfig,
    f0: &Frame,
    n_paths: u64,
) -> Result<ExplosionReport, MonteCarloError> {
    let outcomes = ensemble(st, cfg, f0, n_paths, |c| {
        simulate_observed(st, c, f0, &mut |_, _, _| true).map(|o| o.termination)
    })?;
    let mut zeta_samples = Vec::new();
    let mut reasons = BTreeMap::new();
    for t in &outcomes {
        if let Termination::Exploded { reason, zeta } = t {
            zeta_samples.push(*zeta);
            *reasons.entry(reason_name(*reason)).or_insert(0) += 1;
        }
    }
    let n_exploded = zeta_samples.len() as u64;
    let (ci_low, ci_high) = wilson_interval(n_exploded, n_paths, Z95);
    let mut report = ExplosionReport {
        spacetime: st.id().to_string(),
        n_paths,
        n_exploded,
        n_completed: n_paths - n_exploded,
        zeta_samples,
        reasons,
        p_hat: n_exploded as f64 / n_paths as f64,
        ci_low,
        ci_high,
        s_max: cfg.s_max,
        sweep: Vec::new(),
        config: cfg.clone(),
        initial_frame: f0.to_record(st),
        note: "estimates P(zeta <= s_max), a lower bound on P(zeta < inf); explosion mass may sit at small times, \
               see the sweep"
            .into(),
    };
    let budgets: Vec<f64> = [0.125, 0.25, 0.5, 1.0].iter().map(|q| q * cfg.s_max).collect();
    report.sweep = report.sweep_at(&budgets);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentCurve {
    pub functional: String,
    /// Sample times on the step grid.
    pub times: Vec<f64>,
    /// None where every path is censored.
    pub means: Vec<Option<f64>>,
    pub std_errors: Vec<f64>,
    pub n_alive: Vec<u64>,
    /// Paths terminated before each time.
    pub n_censored: Vec<u64>,
    pub n_paths: u64,
}

impl MomentCurve {
    /// CSV with header `t,mean,se,n_alive`.
    pub fn write_csv(&self, w: &mut dyn Write) -> io::Result<()> {
        writeln!(w, "t,mean,se,n_alive")?;
        for i in 0..self.times.len() {
            let mean = self.means[i].map_or("nan".to_string(), |m| format!("{m:.16e}"));
            writeln!(w, "{:.16e},{mean},{:.16e},{}", self.times[i], self.std_errors[i], self.n_alive[i])?;
        }
        Ok(())
    }
}

/// Step index of each requested time on the grid of `cfg`.
fn grid_steps(cfg: &DiffusionConfig, times: &[f64]) -> Result<Vec<u64>, MonteCarloError> {
    let n = cfg.n_steps();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if !(t >= 0.0 && t <= cfg.s_max) {
            return Err(MonteCarloError::Invalid(format!("time {t} outside [0, s_max = {}]", cfg.s_max)));
        }
        let k = ((t / cfg.ds).round() as u64).min(n);
        out.push(k);
    }
    if out.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MonteCarloError::Invalid("times must be increasing and at least one step apart".into()));
    }
    Ok(out)
}

/// Monte Carlo mean of F(Φ_t) with standard errors; paths that terminate
/// before t are counted as censored, not imputed.
pub fn exponential_moment(
    st: &dyn Spacetime,
    func: &FiberFunctional,
    cfg: &DiffusionConfig,
    f0: &Frame,
    n_paths: u64,
    times: &[f64],
) -> Result<MomentCurve, MonteCarloError> {
    let steps = grid_steps(cfg, times)?;
    let last = *steps.last().ok_or_else(|| MonteCarloError::Invalid("no sample times".into()))?;
    let run_cfg = DiffusionConfig { s_max: cfg.time_of(last).min(cfg.s_max), ..cfg.clone() };
    let per_path = ensemble(st, &run_cfg, f0, n_paths, |c| {
        let mut vals: Vec<Option<Result<f64, FiberError>>> = vec![None; steps.len()];
        let mut next = 0;
        let out = simulate_observed(st, c, f0, &mut |k, _, f| {
            while next < steps.len() && steps[next] == k {
                vals[next] = Some(func.eval(st, f));
                next += 1;
            }
            next < steps.len()
        })?;
        // an explosion frame at step k is not a live sample at k
        if out.termination.is_exploded() {
            if let Some(i) = steps.iter().position(|&s| s == out.steps) {
                vals[i] = None;
            }
        }
        Ok(vals)
    })?;
    let mut curve = MomentCurve {
        functional: func.name().to_string(),
        times: steps.iter().map(|&k| run_cfg.time_of(k)).collect(),
        means: Vec::new(),
        std_errors: Vec::new(),
        n_alive: Vec::new(),
        n_censored: Vec::new(),
        n_paths,
    };
    for i in 0..steps.len() {
        // Welford, in trajectory order
        let (mut n, mut mean, mut m2) = (0u64, 0.0, 0.0);
        for p in &per_path {
            if let Some(r) = &p[i] {
                let v = r.clone()?;
                n += 1;
                let d = v - mean;
                mean += d / n as f64;
                m2 += d * (v - mean);
            }
        }
        let se = if n > 1 { (m2 / (n - 1) as f64 / n as f64).sqrt() } else { 0.0 };
        curve.means.push((n > 0).then_some(mean));
        curve.std_errors.push(se);
        curve.n_alive.push(n);
        curve.n_censored.push(n_paths - n);
    }
    Ok(curve)
}

type RegionFn = dyn Fn(&dyn Spacetime, &Frame) -> bool + Send + Sync;

/// A named predicate on frames.
#[derive(Clone)]
pub struct Region {
    name: String,
    pred: Arc<RegionFn>,
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Region({})", self.name)
    }
}

impl Region {
    pub fn new(name: impl Into<String>, pred: impl Fn(&dyn Spacetime, &Frame) -> bool + Send + Sync + 'static) -> Self {
        Region { name: name.into(), pred: Arc::new(pred) }
    }

    /// {r ≤ radius} in a chart whose second coordinate is an areal radius.
    pub fn radius_below(radius: f64) -> Self {
        Region::new(format!("r <= {radius}"), move |_, f| f.point.coords[1] <= radius)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn contains(&self, st: &dyn Spacetime, f: &Frame) -> bool {
        (self.pred)(st, f)
    }
}

/// First-hitting times of several regions along one path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathHits {
    pub index: u64,
    pub termination: Termination,
    pub first_hits: Vec<Option<f64>>,
}

/// Per path, the first sample time in each region. A path stops once it
/// has entered every region.
pub fn first_hits(
    st: &dyn Spacetime,
    cfg: &DiffusionConfig,
    f0: &Frame,
    n_paths: u64,
    regions: &[Region],
) -> Result<Vec<PathHits>, MonteCarloError> {
    if regions.is_empty() {
        return Err(MonteCarloError::Invalid("at least one region is required".into()));
    }
    ensemble(st, cfg, f0, n_paths, |c| {
        let mut hits = vec![None; regions.len()];
        let out = simulate_observed(st, c, f0, &mut |_, s, f| {
            for (h, r) in hits.iter_mut().zip(regions) {
                if h.is_none() && r.contains(st, f) {
                    *h = Some(s);
                }
            }
            hits.iter().any(|h| h.is_none())
        })?;
        Ok(PathHits { index: c.trajectory_index, termination: out.termination, first_hits: hits })
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingReport {
    pub region: String,
    pub n_paths: u64,
    pub n_hit: u64,
    /// Exploded before entering the region.
    pub n_exploded: u64,
    /// Reached s_max without entering the region.
    pub n_completed: u64,
    pub p_hit: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// (level, hitting time) for levels 0.1, 0.25, 0.5, 0.75, 0.9, 1.
    pub quantiles: Vec<(f64, f64)>,
    pub hitting_times: Vec<f64>,
    pub s_max: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    // lower empirical quantile
    let n = sorted.len();
    let i = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
    sorted[i]
}

/// Probability and timing of entering `region`, detected at sample resolution.
pub fn hitting_stats(
    st: &dyn Spacetime,
    cfg: &DiffusionConfig,
    f0: &Frame,
    n_paths: u64,
    region: &Region,
) -> Result<HittingReport, MonteCarloError> {
    let paths = first_hits(st, cfg, f0, n_paths, std::slice::from_ref(region))?;
    let hitting_times: Vec<f64> = paths.iter().filter_map(|p| p.first_hits[0]).collect();
    let n_hit = hitting_times.len() as u64;
    let n_exploded = paths.iter().filter(|p| p.first_hits[0].is_none() && p.termination.is_exploded()).count() as u64;
    let (ci_low, ci_high) = wilson_interval(n_hit, n_paths, Z95);
    let mut sorted = hitting_times.clone();
    sorted.sort_by(f64::total_cmp);
    let quantiles = if sorted.is_empty() {
        Vec::new()
    } else {
        [0.1, 0.25, 0.5, 0.75, 0.9, 1.0].iter().map(|&q| (q, quantile(&sorted, q))).collect()
    };
    Ok(HittingReport {
        region: region.name().to_string(),
        n_paths,
        n_hit,
        n_exploded,
        n_completed: n_paths - n_hit - n_exploded,
        p_hit: n_hit as f64 / n_paths as f64,
        ci_low,
        ci_high,
        quantiles,
        hitting_times,
        s_max: cfg.s_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_edge_cases() {
        let (lo, hi) = wilson_interval(0, 1000, Z95);
        assert_eq!(lo, 0.0);
        // z² / (n + z²)
        assert!((hi - Z95 * Z95 / (1000.0 + Z95 * Z95)).abs() < 1e-15);
        assert!(hi < 0.004);
        let (lo, hi) = wilson_interval(1000, 1000, Z95);
        assert_eq!(hi, 1.0);
        assert!(lo > 0.996);
        assert_eq!(wilson_interval(0, 0, Z95), (0.0, 1.0));
    }

    #[test]
    fn quantiles_are_lower_empirical() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&v, 0.1), 1.0);
    }
}
