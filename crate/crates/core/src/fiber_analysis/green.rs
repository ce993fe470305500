//! Green function of ½Δ on ℍ³ and fiber potentials.
//!
//! The fiber over a base point is identified with the unit hyperboloid in
//! ℝ^{1,3} through the frame itself: y = Σ yᵃ e_a. Integrals over ℍ³ are
//! taken in geodesic polar coordinates about the evaluation point, with
//! Gauss–Legendre nodes in ρ ∈ [0, ρ_cut] and a product rule on S²
//! (Gauss–Legendre in cos θ, uniform in φ).
//!
//! G(ρ) sinh²ρ = (1 − e^{−2ρ})/(4π) tends to a constant, so a source only
//! has a finite potential when its spherical means are integrable in ρ.
//! Sources that do not decay are rejected with [`FiberError::Divergent`].

use super::{ric_tilde, vertical_flow, FiberError, Frame, GeneratorSteps};
use crate::frame_bundle::boost_along;
use crate::geometry::{Mat4, Spacetime, Vec4};
use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// G(ρ) = (coth ρ − 1)/(2π), the kernel with ½Δ(∫G f) = −f.
pub fn green_h3(rho: f64) -> Result<f64, FiberError> {
    if !(rho > 0.0) {
        return Err(FiberError::Invalid(format!("green function needs rho > 0, got {rho}")));
    }
    Ok(1.0 / (PI * (2.0 * rho).exp_m1()))
}

/// G(ρ) sinh²ρ without cancellation.
fn green_shell_weight(rho: f64) -> f64 {
    -(-2.0 * rho).exp_m1() / (4.0 * PI)
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// P_n(z) and P_n'(z) by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub n_rho: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub rho_cut: f64,
    /// Largest accepted tail estimate, relative to the integral.
    pub tail_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { n_rho: 64, n_theta: 16, n_phi: 32, rho_cut: 12.0, tail_tol: 1e-8 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), FiberError> {
        if self.n_rho < 4 || self.n_theta < 2 || self.n_phi < 3 {
            return Err(FiberError::Invalid(format!(
                "quadrature needs n_rho ≥ 4, n_theta ≥ 2, n_phi ≥ 3 (got {}, {}, {})",
                self.n_rho, self.n_theta, self.n_phi
            )));
        }
        if !(self.rho_cut > 0.0 && self.rho_cut.is_finite()) {
            return Err(FiberError::Invalid(format!("rho_cut must be positive, got {}", self.rho_cut)));
        }
        if !(self.tail_tol > 0.0) {
            return Err(FiberError::Invalid(format!("tail_tol must be positive, got {}", self.tail_tol)));
        }
        Ok(())
    }

    /// Same cutoff, twice the nodes in every direction.
    pub fn refined(&self) -> Self {
        QuadratureSpec { n_rho: 2 * self.n_rho, n_theta: 2 * self.n_theta, n_phi: 2 * self.n_phi, ..*self }
    }
}

/// A truncated fiber integral with its tail diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenIntegral {
    pub value: f64,
    /// Estimated mass beyond ρ_cut (0 when the shells vanish).
    pub tail: f64,
    /// Fitted exponential rate of the shell means over [ρ_cut/2, ρ_cut].
    pub growth_rate: f64,
}

struct Rule {
    rho: Vec<f64>,
    rho_w: Vec<f64>,
    dirs: Vec<Vector3<f64>>,
    dir_w: Vec<f64>,
}

impl Rule {
    fn new(spec: &QuadratureSpec) -> Self {
        let (x, w) = gauss_legendre(spec.n_rho);
        let half = 0.5 * spec.rho_cut;
        let rho = x.iter().map(|t| half * (t + 1.0)).collect();
        let rho_w = w.iter().map(|wi| half * wi).collect();
        let (ct, wt) = gauss_legendre(spec.n_theta);
        let dphi = 2.0 * PI / spec.n_phi as f64;
        let mut dirs = Vec::with_capacity(spec.n_theta * spec.n_phi);
        let mut dir_w = Vec::with_capacity(spec.n_theta * spec.n_phi);
        for (c, wc) in ct.iter().zip(&wt) {
            let s = (1.0 - c * c).sqrt();
            for k in 0..spec.n_phi {
                // half-step offset keeps the poles' azimuths staggered
                let phi = (k as f64 + 0.5) * dphi;
                dirs.push(Vector3::new(s * phi.cos(), s * phi.sin(), *c));
                dir_w.push(wc * dphi);
            }
        }
        Rule { rho, rho_w, dirs, dir_w }
    }
}

/// ∫_{ℍ³} G(x, y) q(y) dy for a source on the unit hyperboloid of ℝ^{1,3}.
pub fn green_potential(
    source: &(dyn Fn(&Vec4) -> f64 + Sync),
    x: &Vec4,
    spec: &QuadratureSpec,
) -> Result<GreenIntegral, FiberError> {
    spec.validate()?;
    let q = x[0] * x[0] - x.fixed_rows::<3>(1).norm_squared();
    if !((q - 1.0).abs() < 1e-9 && x[0] > 0.0) {
        return Err(FiberError::Invalid("evaluation point is not on the future unit hyperboloid".into()));
    }
    let v = Vector3::new(x[1], x[2], x[3]);
    let s = v.norm();
    let b = if s > 0.0 { boost_along(s.asinh(), &(v / s)) } else { Mat4::identity() };
    let rule = Rule::new(spec);
    // shell means ∫_{S²} q dω · G sinh²ρ, in node order
    let shells: Vec<f64> = rule
        .rho
        .par_iter()
        .map(|&r| {
            let (sh, ch) = (r.sinh(), r.cosh());
            let mut acc = 0.0;
            for (d, w) in rule.dirs.iter().zip(&rule.dir_w) {
                let y = b * Vec4::new(ch, sh * d[0], sh * d[1], sh * d[2]);
                acc += w * source(&y);
            }
            acc * green_shell_weight(r)
        })
        .collect();
    let value: f64 = shells.iter().zip(&rule.rho_w).map(|(s, w)| s * w).sum();
    let (tail, growth_rate) = tail_estimate(&rule.rho, &shells, spec.rho_cut);
    if growth_rate > -0.25 && tail > 0.0 {
        return Err(FiberError::Divergent { rate: growth_rate, rho_cut: spec.rho_cut });
    }
    let tol = spec.tail_tol * value.abs().max(f64::MIN_POSITIVE);
    if tail > tol {
        return Err(FiberError::TailTooLarge { tail, tol });
    }
    Ok(GreenIntegral { value, tail, growth_rate })
}

/// Least-squares fit of ln|shell| over the outer half of the radial nodes,
/// extrapolated past ρ_cut. Shells below 1e−14 of the largest count as zero.
fn tail_estimate(rho: &[f64], shells: &[f64], rho_cut: f64) -> (f64, f64) {
    let peak = shells.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let floor = 1e-14 * peak;
    let pts: Vec<(f64, f64)> = rho
        .iter()
        .zip(shells)
        .filter(|(r, s)| **r >= 0.5 * rho_cut && s.abs() > floor)
        .map(|(r, s)| (*r, s.abs().ln()))
        .collect();
    if pts.len() < 3 {
        return (0.0, f64::NEG_INFINITY);
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let rate = sxy / sxx;
    let at_cut = (my + rate * (rho_cut - mx)).exp();
    if rate >= 0.0 {
        return (f64::INFINITY, rate);
    }
    (at_cut / -rate, rate)
}

/// The Ricci tensor in the frame basis, eᵀ Ric e, with entries below the
/// numerical noise floor of the curvature kernel set to zero.
pub fn frame_ricci(st: &dyn Spacetime, f: &Frame) -> Result<Mat4, FiberError> {
    let data = st.curvature(&f.point)?;
    let mut a = f.e.transpose() * data.ricci * f.e;
    let k = st.kretschmann(&f.point)?.abs().sqrt();
    let scale = f.e.amax().powi(2) * (1.0 + k);
    a.apply(|x| {
        if x.abs() <= 1e-12 * scale {
            *x = 0.0
        }
    });
    Ok(a)
}

/// U(Φ) = 2 ∫ G(e₀, y) Ric(y, y) dy over the fiber at Φ.
pub fn compute_u(st: &dyn Spacetime, f: &Frame, spec: &QuadratureSpec) -> Result<GreenIntegral, FiberError> {
    let a = frame_ricci(st, f)?;
    if a.iter().all(|x| *x == 0.0) {
        spec.validate()?;
        return Ok(GreenIntegral { value: 0.0, tail: 0.0, growth_rate: f64::NEG_INFINITY });
    }
    let source = move |y: &Vec4| (y.transpose() * a * y)[0];
    let g = green_potential(&source, &Vec4::new(1.0, 0.0, 0.0, 0.0), spec)?;
    Ok(GreenIntegral { value: 2.0 * g.value, tail: 2.0 * g.tail, growth_rate: g.growth_rate })
}

/// ½ Σ V_j² U against −2R̃IC at one frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonResidual {
    pub half_laplacian: f64,
    pub ric: f64,
    pub residual: f64,
    /// residual / max(|R̃IC|, 1e−6)
    pub relative: f64,
}

fn half_fiber_laplacian(
    u: impl Fn([f64; 3]) -> Result<f64, FiberError>,
    steps: &GeneratorSteps,
) -> Result<f64, FiberError> {
    let center = u([0.0; 3])?;
    let d = |h: f64| -> Result<f64, FiberError> {
        let mut sum = 0.0;
        for j in 0..3 {
            let mut b = [0.0; 3];
            b[j] = h;
            let fwd = u(b)?;
            b[j] = -h;
            let bwd = u(b)?;
            sum += (fwd - 2.0 * center + bwd) / (h * h);
        }
        Ok(0.5 * sum)
    };
    let h = steps.vertical;
    let coarse = d(h)?;
    if !steps.richardson {
        return Ok(coarse);
    }
    Ok((4.0 * d(0.5 * h)? - coarse) / 3.0)
}

/// |½ΣV_j²U + 2R̃IC| with V_j² by central differences on recomputed U.
pub fn poisson_residual(st: &dyn Spacetime, f: &Frame, spec: &QuadratureSpec) -> Result<PoissonResidual, FiberError> {
    let half_laplacian = half_fiber_laplacian(
        |b| compute_u(st, &vertical_flow(f, b), spec).map(|g| g.value),
        &GeneratorSteps::default(),
    )?;
    let ric = ric_tilde(st, f)?;
    let residual = (half_laplacian + 2.0 * ric).abs();
    Ok(PoissonResidual { half_laplacian, ric, residual, relative: residual / ric.abs().max(1e-6) })
}

/// ½Δ of x ↦ ∫G(x, y) q(y) dy at the hyperboloid origin, and q there.
pub fn green_poisson_residual(
    source: &(dyn Fn(&Vec4) -> f64 + Sync),
    spec: &QuadratureSpec,
) -> Result<(f64, f64), FiberError> {
    let e0 = Vec4::new(1.0, 0.0, 0.0, 0.0);
    let lap = half_fiber_laplacian(
        |b| {
            let x = crate::frame_bundle::boost_matrix(b) * e0;
            green_potential(source, &x, spec).map(|g| g.value)
        },
        &GeneratorSteps::default(),
    )?;
    Ok((lap, source(&e0)))
}
