//! Exit of the diffusion from a thin tube around a timelike core.
//!
//! The tube is {F(s, x) : 0 ≤ s ≤ T, |x| < u} for the chart
//! F(s, x) = exp_{γ(s)}(Σ x^j e_j(s)) built on the developed core frame
//! field. Sample points are pulled back by Newton's method and classified
//! as leaving through the far cap (s ≥ T), the lateral wall (|x| ≥ u) or
//! the near cap (s < 0).

use super::{ensemble, wilson_interval, MonteCarloError, Z95};
use crate::diffusion::{simulate_observed, DiffusionConfig};
use crate::frame_bundle::{develop, geodesic_step, reorthonormalize, Controls, Frame, FrameRecord};
use crate::geometry::{Mat4, Spacetime, SpacetimePoint, Vec4};
use serde::{Deserialize, Serialize};

/// The controls that define the core path.
#[derive(Clone, Debug)]
pub enum TubeCore {
    /// The geodesic through the initial frame.
    Geodesic,
    /// A developed path; controls must cover [0, length].
    Controls(Controls),
}

#[derive(Clone, Debug)]
pub struct TubeSpec {
    pub frame0: Frame,
    pub core: TubeCore,
    pub length: f64,
    pub radius: f64,
    /// Spacing of the stored core frames.
    pub core_step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeReport {
    pub n_paths: u64,
    pub n_far_cap: u64,
    pub n_lateral: u64,
    pub n_near_cap: u64,
    /// Exploded, out of budget, or not pulled back, before leaving the tube.
    pub n_unresolved: u64,
    pub p_far_cap: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub length: f64,
    pub radius: f64,
    pub config: DiffusionConfig,
    pub initial_frame: FrameRecord,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Exit {
    FarCap,
    Lateral,
    NearCap,
    Unresolved,
}

/// Core frames on a uniform grid covering [−margin, T + margin].
struct Core {
    s0: f64,
    h: f64,
    frames: Vec<Frame>,
}

impl Core {
    fn build(st: &dyn Spacetime, spec: &TubeSpec) -> Result<Core, MonteCarloError> {
        let h = spec.core_step;
        let margin = 4.0 * h + 0.25 * spec.length;
        let n_fwd = ((spec.length + margin) / h).ceil() as usize;
        let n_back = (margin / h).ceil() as usize;
        let controls = match &spec.core {
            TubeCore::Geodesic => Controls::constant(n_fwd as f64 * h, [0.0; 3])?,
            TubeCore::Controls(c) => {
                if c.start() != 0.0 || c.horizon() < spec.length {
                    return Err(MonteCarloError::Invalid("core controls must cover [0, length]".into()));
                }
                c.clone()
            }
        };
        let grid = Controls::from_fn(n_fwd as f64 * h, n_fwd, |s| controls.eval(s))?;
        let fwd = develop(st, &grid, &spec.frame0, h)?;
        // behind the start the core continues as a geodesic
        let mut back = Vec::with_capacity(n_back);
        let mut f = spec.frame0;
        for _ in 0..n_back {
            f = geodesic_step(st, &f, -h)?;
            back.push(f);
        }
        back.reverse();
        let mut frames = back;
        frames.extend(fwd.into_iter().map(|(_, f)| f));
        if frames.iter().any(|f| f.point.chart != spec.frame0.point.chart) {
            return Err(MonteCarloError::TubeTooWide("core leaves the starting chart".into()));
        }
        Ok(Core { s0: -(n_back as f64) * h, h, frames })
    }

    fn span(&self) -> (f64, f64) {
        (self.s0, self.s0 + (self.frames.len() - 1) as f64 * self.h)
    }

    /// Catmull–Rom interpolation of position and frame, then repair.
    fn frame_at(&self, st: &dyn Spacetime, s: f64) -> Result<Frame, MonteCarloError> {
        let n = self.frames.len();
        let t = (s - self.s0) / self.h;
        let i = (t.floor() as isize).clamp(1, n as isize - 3) as usize;
        let u = t - i as f64;
        let w = [
            0.5 * (-u * u * u + 2.0 * u * u - u),
            0.5 * (3.0 * u * u * u - 5.0 * u * u + 2.0),
            0.5 * (-3.0 * u * u * u + 4.0 * u * u + u),
            0.5 * (u * u * u - u * u),
        ];
        let mut x = [0.0; 4];
        let mut e = Mat4::zeros();
        for (k, wk) in w.iter().enumerate() {
            let f = &self.frames[i - 1 + k];
            for (m, xm) in x.iter_mut().enumerate() {
                *xm += wk * f.point.coords[m];
            }
            e += f.e * *wk;
        }
        Ok(reorthonormalize(st, &Frame::new(SpacetimePoint::new(self.frames[0].point.chart, x), e))?)
    }
}

/// exp_p(v) by RK4 on the geodesic equation over unit parameter.
fn exp_map(st: &dyn Spacetime, p: &SpacetimePoint, v: &Vec4) -> Result<[f64; 4], MonteCarloError> {
    const N: usize = 8;
    let h = 1.0 / N as f64;
    let rate = |x: &[f64; 4], u: &Vec4| -> Result<(Vec4, Vec4), MonteCarloError> {
        let g = st.christoffel(&SpacetimePoint::new(p.chart, *x)).map_err(crate::frame_bundle::FrameError::from)?;
        let mut a = Vec4::zeros();
        for m in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    a[m] -= g[m][b][c] * u[b] * u[c];
                }
            }
        }
        Ok((*u, a))
    };
    let add = |x: &[f64; 4], d: &Vec4, k: f64| -> [f64; 4] { std::array::from_fn(|m| x[m] + k * d[m]) };
    let (mut x, mut u) = (p.coords, *v);
    for _ in 0..N {
        let (k1x, k1u) = rate(&x, &u)?;
        let (k2x, k2u) = rate(&add(&x, &k1x, 0.5 * h), &(u + k1u * (0.5 * h)))?;
        let (k3x, k3u) = rate(&add(&x, &k2x, 0.5 * h), &(u + k2u * (0.5 * h)))?;
        let (k4x, k4u) = rate(&add(&x, &k3x, h), &(u + k3u * h))?;
        x = add(&x, &(k1x + (k2x + k3x) * 2.0 + k4x), h / 6.0);
        u += (k1u + (k2u + k3u) * 2.0 + k4u) * (h / 6.0);
    }
    Ok(x)
}

struct TubeChart<'a> {
    st: &'a dyn Spacetime,
    core: Core,
}

impl TubeChart<'_> {
    fn map(&self, y: &[f64; 4]) -> Result<[f64; 4], MonteCarloError> {
        let f = self.core.frame_at(self.st, y[0])?;
        let v = f.e * Vec4::new(0.0, y[1], y[2], y[3]);
        exp_map(self.st, &f.point, &v)
    }

    fn jacobian(&self, y: &[f64; 4]) -> Result<Mat4, MonteCarloError> {
        let mut j = Mat4::zeros();
        for c in 0..4 {
            let h = 1e-6;
            let (mut a, mut b) = (*y, *y);
            a[c] += h;
            b[c] -= h;
            let (fa, fb) = (self.map(&a)?, self.map(&b)?);
            for r in 0..4 {
                j[(r, c)] = (fa[r] - fb[r]) / (2.0 * h);
            }
        }
        Ok(j)
    }

    /// Newton for F(y) = target from `guess`; None when it does not converge
    /// inside the stored core span.
    fn pull_back(&self, target: &[f64; 4], guess: [f64; 4]) -> Option<[f64; 4]> {
        let (lo, hi) = self.core.span();
        let mut y = guess;
        let scale = 1.0 + target.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for _ in 0..30 {
            let fy = self.map(&y).ok()?;
            let r = Vec4::from_fn(|m, _| fy[m] - target[m]);
            if r.amax() < 1e-12 * scale {
                return Some(y);
            }
            let dy = self.jacobian(&y).ok()?.lu().solve(&r)?;
            for m in 0..4 {
                y[m] -= dy[m];
            }
            if !(y[0] > lo && y[0] < hi) || y.iter().any(|v| !v.is_finite()) {
                return None;
            }
        }
        let fy = self.map(&y).ok()?;
        let err = (0..4).fold(0.0f64, |m, k| m.max((fy[k] - target[k]).abs()));
        (err < 1e-9 * scale).then_some(y)
    }

    /// Sampled necessary conditions for the chart to be a diffeomorphism on
    /// the closed tube: a Jacobian of fixed sign and away from zero, and
    /// Newton round trips from the core.
    fn check_injective(&self, length: f64, radius: f64) -> Result<(), MonteCarloError> {
        let dirs: Vec<[f64; 3]> = {
            let mut d = vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]];
            let c = 1.0 / 3f64.sqrt();
            for sx in [-c, c] {
                for sy in [-c, c] {
                    for sz in [-c, c] {
                        d.push([sx, sy, sz]);
                    }
                }
            }
            d
        };
        let det0 = self.jacobian(&[0.0; 4])?.determinant();
        if !(det0.abs() > 0.0) {
            return Err(MonteCarloError::TubeTooWide("chart is singular on the core".into()));
        }
        for k in 0..=8 {
            let s = length * k as f64 / 8.0;
            for rf in [0.5, 1.0] {
                for d in &dirs {
                    let y = [s, rf * radius * d[0], rf * radius * d[1], rf * radius * d[2]];
                    let det = self.jacobian(&y)?.determinant();
                    if !(det / det0 > 1e-3) {
                        return Err(MonteCarloError::TubeTooWide(format!(
                            "chart Jacobian degenerates at s = {s}, x = {:?} (ratio {:.3e})",
                            &y[1..],
                            det / det0
                        )));
                    }
                    let p = self.map(&y)?;
                    match self.pull_back(&p, [s, 0.0, 0.0, 0.0]) {
                        Some(z) if (0..4).all(|m| (z[m] - y[m]).abs() < 1e-7 * (1.0 + length)) => {}
                        _ => {
                            return Err(MonteCarloError::TubeTooWide(format!(
                                "chart is not invertible from the core at s = {s}, x = {:?}",
                                &y[1..]
                            )))
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Fraction of paths started on the core frame that leave the tube through
/// the far cap.
pub fn tube_test(
    st: &dyn Spacetime,
    spec: &TubeSpec,
    cfg: &DiffusionConfig,
    n_paths: u64,
) -> Result<TubeReport, MonteCarloError> {
    if !(spec.length > 0.0 && spec.radius > 0.0 && spec.core_step > 0.0) {
        return Err(MonteCarloError::Invalid("tube length, radius and core_step must be positive".into()));
    }
    if spec.core_step > 0.25 * spec.length {
        return Err(MonteCarloError::Invalid("core_step must resolve the tube length".into()));
    }
    let chart = TubeChart { st, core: Core::build(st, spec)? };
    chart.check_injective(spec.length, spec.radius)?;
    let f0 = spec.frame0;
    let exits = ensemble(st, cfg, &f0, n_paths, |c| {
        let mut exit = Exit::Unresolved;
        let mut y = [0.0; 4];
        simulate_observed(st, c, &f0, &mut |k, _, f| {
            if k == 0 {
                return true;
            }
            if f.point.chart != f0.point.chart {
                return false;
            }
            match chart.pull_back(&f.point.coords, y) {
                Some(z) => {
                    y = z;
                    let r = (z[1] * z[1] + z[2] * z[2] + z[3] * z[3]).sqrt();
                    exit = if r >= spec.radius {
                        Exit::Lateral
                    } else if z[0] >= spec.length {
                        Exit::FarCap
                    } else if z[0] < 0.0 {
                        Exit::NearCap
                    } else {
                        Exit::Unresolved
                    };
                    exit == Exit::Unresolved
                }
                None => false,
            }
        })?;
        Ok(exit)
    })?;
    let count = |e: Exit| exits.iter().filter(|&&x| x == e).count() as u64;
    let n_far_cap = count(Exit::FarCap);
    let (ci_low, ci_high) = wilson_interval(n_far_cap, n_paths, Z95);
    Ok(TubeReport {
        n_paths,
        n_far_cap,
        n_lateral: count(Exit::Lateral),
        n_near_cap: count(Exit::NearCap),
        n_unresolved: count(Exit::Unresolved),
        p_far_cap: n_far_cap as f64 / n_paths as f64,
        ci_low,
        ci_high,
        length: spec.length,
        radius: spec.radius,
        config: cfg.clone(),
        initial_frame: f0.to_record(st),
    })
}
