//! Development of control paths into frame-bundle paths, and the inverse.

use super::{finish_step, h0, reorthonormalize, rk4_frame, Frame, FrameError, FrameTangent};
use crate::geometry::{Mat4, Spacetime, SpacetimePoint, Vec4};

/// Three C¹ controls h¹, h², h³ on [s₀, s₀ + T], stored as cubic Hermite
/// interpolants on a sample grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Controls {
    grid: Vec<f64>,
    values: Vec<[f64; 3]>,
    slopes: Vec<[f64; 3]>,
}

impl Controls {
    /// Interpolate samples; slopes come from second-order differences.
    pub fn new(grid: Vec<f64>, values: Vec<[f64; 3]>) -> Result<Self, FrameError> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(FrameError::Invalid("controls need at least two samples, one per grid point".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|x| !x.is_finite()) {
            return Err(FrameError::Invalid("control grid must be finite and strictly increasing".into()));
        }
        let slopes = node_slopes(&grid, &values);
        Ok(Controls { grid, values, slopes })
    }

    pub fn constant(horizon: f64, h: [f64; 3]) -> Result<Self, FrameError> {
        Controls::new(vec![0.0, horizon], vec![h, h])
    }

    pub fn from_fn(horizon: f64, n: usize, f: impl Fn(f64) -> [f64; 3]) -> Result<Self, FrameError> {
        let n = n.max(1);
        let grid: Vec<f64> = (0..=n).map(|i| horizon * i as f64 / n as f64).collect();
        let values = grid.iter().map(|&s| f(s)).collect();
        Controls::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[[f64; 3]] {
        &self.values
    }

    pub fn start(&self) -> f64 {
        self.grid[0]
    }

    pub fn horizon(&self) -> f64 {
        self.grid[self.grid.len() - 1] - self.grid[0]
    }

    /// Evaluate at `s`, clamped to the grid.
    pub fn eval(&self, s: f64) -> [f64; 3] {
        let n = self.grid.len();
        let s = s.clamp(self.grid[0], self.grid[n - 1]);
        let i = match self.grid.partition_point(|&x| x <= s) {
            0 => 0,
            k => (k - 1).min(n - 2),
        };
        hermite(
            self.grid[i],
            self.grid[i + 1],
            &self.values[i],
            &self.values[i + 1],
            &self.slopes[i],
            &self.slopes[i + 1],
            s,
        )
    }
}

fn node_slopes<const N: usize>(x: &[f64], y: &[[f64; N]]) -> Vec<[f64; N]> {
    // derivative of the local Lagrange interpolant through up to five nodes
    let n = x.len();
    let m = n.min(5);
    (0..n)
        .map(|i| {
            let i0 = i.saturating_sub(m / 2).min(n - m);
            let w = lagrange_derivative_weights(&x[i0..i0 + m], x[i]);
            let mut d = [0.0; N];
            for (k, wk) in w.iter().enumerate() {
                for c in 0..N {
                    d[c] += wk * y[i0 + k][c];
                }
            }
            d
        })
        .collect()
}

/// Weights w with p'(t) = Σ w_i y_i for the interpolant through (x_i, y_i).
fn lagrange_derivative_weights(x: &[f64], t: f64) -> Vec<f64> {
    let m = x.len();
    (0..m)
        .map(|i| {
            let mut sum = 0.0;
            for k in (0..m).filter(|&k| k != i) {
                let mut prod = 1.0 / (x[i] - x[k]);
                for j in (0..m).filter(|&j| j != i && j != k) {
                    prod *= (t - x[j]) / (x[i] - x[j]);
                }
                sum += prod;
            }
            sum
        })
        .collect()
}

fn hermite<const N: usize>(
    x0: f64,
    x1: f64,
    y0: &[f64; N],
    y1: &[f64; N],
    m0: &[f64; N],
    m1: &[f64; N],
    s: f64,
) -> [f64; N] {
    let h = x1 - x0;
    let t = (s - x0) / h;
    let (t2, t3) = (t * t, t * t * t);
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let mut out = [0.0; N];
    for k in 0..N {
        out[k] = h00 * y0[k] + h10 * h * m0[k] + h01 * y1[k] + h11 * h * m1[k];
    }
    out
}

fn hermite_derivative<const N: usize>(
    x0: f64,
    x1: f64,
    y0: &[f64; N],
    y1: &[f64; N],
    m0: &[f64; N],
    m1: &[f64; N],
    s: f64,
) -> [f64; N] {
    let h = x1 - x0;
    let t = (s - x0) / h;
    let t2 = t * t;
    let d00 = (6.0 * t2 - 6.0 * t) / h;
    let d10 = 3.0 * t2 - 4.0 * t + 1.0;
    let d01 = (-6.0 * t2 + 6.0 * t) / h;
    let d11 = 3.0 * t2 - 2.0 * t;
    let mut out = [0.0; N];
    for k in 0..N {
        out[k] = d00 * y0[k] + d10 * m0[k] + d01 * y1[k] + d11 * m1[k];
    }
    out
}

/// Vertical field Σ h^j V_j at `f`: de = e · Σ h^j E_j.
fn vertical_tangent(f: &Frame, h: [f64; 3]) -> Mat4 {
    let mut de = Mat4::zeros();
    for j in 0..3 {
        let ej = f.e.column(j + 1);
        let e0 = f.e.column(0);
        let mut c0 = de.column_mut(0);
        c0 += ej * h[j];
        de.set_column(j + 1, &(e0 * h[j]));
    }
    de
}

/// Integrate Ψ' = H₀(Ψ) + Σ h^j(s) V_j(Ψ) from `f0` with RK4 substeps of at
/// most `ds`, returning the frame at every control grid point.
pub fn develop(st: &dyn Spacetime, c: &Controls, f0: &Frame, ds: f64) -> Result<Vec<(f64, Frame)>, FrameError> {
    if !(ds > 0.0 && ds.is_finite()) {
        return Err(FrameError::Invalid(format!("ds must be positive, got {ds}")));
    }
    let mut out = Vec::with_capacity(c.grid.len());
    let mut f = *f0;
    out.push((c.grid[0], f));
    for w in c.grid.windows(2) {
        let span = w[1] - w[0];
        let n = (span / ds).ceil().max(1.0) as usize;
        let h = span / n as f64;
        for k in 0..n {
            let s0 = w[0] + k as f64 * h;
            let next = rk4_frame(&f, h, |stage, frac, fr| {
                let base = h0(st, fr).map_err(|e| match e {
                    FrameError::Geometry(source) => FrameError::StepRejected { stage, source },
                    other => other,
                })?;
                let ctl = c.eval(s0 + frac * h);
                Ok(FrameTangent {
                    dm: base.dm,
                    de: base.de + vertical_tangent(fr, ctl),
                })
            })?;
            st.check_domain(&next.point)
                .map_err(|source| FrameError::StepRejected { stage: 4, source })?;
            f = finish_step(st, next)?;
        }
        out.push((w[1], f));
    }
    Ok(out)
}

/// A sampled timelike path: proper time, position, unit velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathSample {
    pub s: f64,
    pub point: SpacetimePoint,
    pub velocity: Vec4,
}

/// Recover the controls whose development from `f0` is the given path.
///
/// The spatial frame is Fermi–Walker transported along the path (the lift
/// with no rotational part); the controls are the acceleration components
/// in that frame, h^j = −g(Dγ̇/ds, e_j).
pub fn anti_develop(st: &dyn Spacetime, path: &[PathSample], f0: &Frame) -> Result<Controls, FrameError> {
    let n = path.len();
    if n < 3 {
        return Err(FrameError::Invalid("path needs at least three samples".into()));
    }
    let chart = path[0].point.chart;
    for (i, p) in path.iter().enumerate() {
        if p.point.chart != chart {
            return Err(FrameError::Invalid("path must stay in one chart".into()));
        }
        if i > 0 && !(p.s > path[i - 1].s) {
            return Err(FrameError::Invalid("path proper times must increase".into()));
        }
        let g = st.metric(&p.point)?;
        let q = (p.velocity.transpose() * g * p.velocity)[0];
        if !((q - 1.0).abs() < 1e-6) {
            return Err(FrameError::Invalid(format!("path is not unit-speed timelike at s = {}: g(v,v) = {q}", p.s)));
        }
        if st.time_orientation(&p.point, &p.velocity) <= 0.0 {
            return Err(FrameError::Invalid(format!("path is past-directed at s = {}", p.s)));
        }
    }
    let x0 = path[0].point.coords;
    let same_point = f0.point.chart == chart
        && (0..4).all(|i| (f0.point.coords[i] - x0[i]).abs() <= 1e-9 * (1.0 + x0[i].abs()));
    let e0_err = (f0.e0() - path[0].velocity).amax() / (1.0 + path[0].velocity.amax());
    if !same_point || e0_err > 1e-6 {
        return Err(FrameError::Invalid("initial frame does not project onto the path start".into()));
    }

    let s: Vec<f64> = path.iter().map(|p| p.s).collect();
    let xs: Vec<[f64; 4]> = path.iter().map(|p| p.point.coords).collect();
    let us: Vec<[f64; 4]> = path.iter().map(|p| p.velocity.into()).collect();
    let udot = node_slopes(&s, &us);

    let accel = |x: &[f64; 4], u: &[f64; 4], du: &[f64; 4]| -> Result<Vec4, FrameError> {
        let gam = st.christoffel(&SpacetimePoint::new(chart, *x))?;
        let mut a = Vec4::from(*du);
        for mu in 0..4 {
            for nu in 0..4 {
                for la in 0..4 {
                    a[mu] += gam[mu][nu][la] * u[nu] * u[la];
                }
            }
        }
        Ok(a)
    };
    let controls_at = |x: &[f64; 4], a: &Vec4, e: &Mat4| -> Result<[f64; 3], FrameError> {
        let g = st.metric(&SpacetimePoint::new(chart, *x))?;
        let mut h = [0.0; 3];
        for j in 0..3 {
            h[j] = -(a.transpose() * g * e.column(j + 1))[0];
        }
        Ok(h)
    };

    let mut e = f0.e;
    let mut values = Vec::with_capacity(n);
    values.push(controls_at(&xs[0], &accel(&xs[0], &us[0], &udot[0])?, &e)?);

    for i in 0..n - 1 {
        let (s0, s1) = (s[i], s[i + 1]);
        let state = |t: f64| -> Result<([f64; 4], Vec4, Vec4), FrameError> {
            let x = hermite(s0, s1, &xs[i], &xs[i + 1], &us[i], &us[i + 1], t);
            let u = hermite(s0, s1, &us[i], &us[i + 1], &udot[i], &udot[i + 1], t);
            let du = hermite_derivative(s0, s1, &us[i], &us[i + 1], &udot[i], &udot[i + 1], t);
            Ok((x, Vec4::from(u), accel(&x, &u, &du)?))
        };
        // Fermi–Walker transport of the spatial legs, de_j = −Γ(u, e_j) + h^j u
        let rate = |t: f64, e: &Mat4| -> Result<Mat4, FrameError> {
            let (x, u, a) = state(t)?;
            let p = SpacetimePoint::new(chart, x);
            let gam = st.christoffel(&p)?;
            let g = st.metric(&p)?;
            let mut de = Mat4::zeros();
            for j in 1..4 {
                let ej = e.column(j);
                let hj = -(a.transpose() * g * ej)[0];
                for mu in 0..4 {
                    let mut v = hj * u[mu];
                    for nu in 0..4 {
                        for la in 0..4 {
                            v -= gam[mu][nu][la] * u[nu] * ej[la];
                        }
                    }
                    de[(mu, j)] = v;
                }
            }
            Ok(de)
        };
        let h = s1 - s0;
        let k1 = rate(s0, &e)?;
        let k2 = rate(s0 + 0.5 * h, &(e + k1 * (0.5 * h)))?;
        let k3 = rate(s0 + 0.5 * h, &(e + k2 * (0.5 * h)))?;
        let k4 = rate(s1, &(e + k3 * h))?;
        e += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
        e.set_column(0, &path[i + 1].velocity);
        let fr = reorthonormalize(st, &Frame::new(path[i + 1].point, e))?;
        e = fr.e;
        let a = accel(&xs[i + 1], &us[i + 1], &udot[i + 1])?;
        values.push(controls_at(&xs[i + 1], &a, &e)?);
    }
    Controls::new(s, values)
}
