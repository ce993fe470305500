//! The orthonormal frame bundle: frames, boosts, parallel transport along
//! the frame's own time direction, and geodesic integration.
//!
//! A frame stores its vectors as the columns of a 4×4 matrix in the chart's
//! coordinate basis. Every frame is also written as `e = θ Λ`, with θ the
//! spacetime's reference tetrad and Λ ∈ SO₀(1,3); repairs act on Λ, which
//! keeps them well conditioned at large rapidity.

mod develop;

pub use develop::{anti_develop, develop, Controls, PathSample};

use crate::geometry::{eta, ChartId, GeometryError, Mat4, Spacetime, SpacetimePoint, Vec4};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FrameError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("step rejected at stage {stage}: {source}")]
    StepRejected { stage: usize, source: GeometryError },
    #[error("degenerate frame: {0}")]
    Degenerate(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// A point of the frame bundle: base point plus frame vectors as columns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub point: SpacetimePoint,
    pub e: Mat4,
}

/// Derivative of a frame along a vector field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameTangent {
    pub dm: Vec4,
    pub de: Mat4,
}

/// Flat serialization of a frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub spacetime: String,
    pub chart: String,
    pub coords: [f64; 4],
    /// Row-major entries e^μ_a.
    pub e: [f64; 16],
    /// Normalized orthonormality defect.
    pub defect: f64,
}

impl FrameRecord {
    /// Rebuild the frame, resolving the chart by name.
    pub fn to_frame(&self, st: &dyn Spacetime) -> Result<Frame, FrameError> {
        let chart = (0..=u8::MAX)
            .map(ChartId)
            .find(|c| st.chart_name(*c) == self.chart)
            .ok_or_else(|| FrameError::Invalid(format!("unknown chart `{}`", self.chart)))?;
        if st.id() != self.spacetime {
            return Err(FrameError::Invalid(format!("record belongs to `{}`, not `{}`", self.spacetime, st.id())));
        }
        let mut e = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                e[(i, j)] = self.e[4 * i + j];
            }
        }
        Ok(Frame::new(SpacetimePoint::new(chart, self.coords), e))
    }
}

impl Frame {
    pub fn new(point: SpacetimePoint, e: Mat4) -> Self {
        Frame { point, e }
    }

    /// The spacetime's reference tetrad at `point`.
    pub fn reference(st: &dyn Spacetime, point: SpacetimePoint) -> Result<Frame, FrameError> {
        Ok(Frame::new(point, st.reference_tetrad(&point)?))
    }

    /// A frame with e₀ = `u` obtained by a pure boost of the reference tetrad.
    pub fn with_velocity(st: &dyn Spacetime, point: SpacetimePoint, u: &Vec4) -> Result<Frame, FrameError> {
        let theta = st.reference_tetrad(&point)?;
        let g = st.metric(&point)?;
        let lam0 = tetrad_inverse(&theta, &g) * u;
        let n2 = lam0[0] * lam0[0] - lam0.fixed_rows::<3>(1).norm_squared();
        if !(n2 > 0.0) || lam0[0] <= 0.0 {
            return Err(FrameError::Degenerate("velocity is not future timelike".into()));
        }
        let lam0 = lam0 / n2.sqrt();
        let v = Vector3::new(lam0[1], lam0[2], lam0[3]);
        let s = v.norm();
        let rho = s.asinh();
        let n = if s > 0.0 { v / s } else { Vector3::x() };
        Ok(Frame::new(point, theta * boost_along(rho, &n)))
    }

    pub fn e0(&self) -> Vec4 {
        self.e.column(0).into_owned()
    }

    pub fn to_record(&self, st: &dyn Spacetime) -> FrameRecord {
        let mut e = [0.0; 16];
        for i in 0..4 {
            for j in 0..4 {
                e[4 * i + j] = self.e[(i, j)];
            }
        }
        FrameRecord {
            spacetime: st.id().to_string(),
            chart: st.chart_name(self.point.chart),
            coords: self.point.coords,
            e,
            defect: normalized_defect(st, self).unwrap_or(f64::NAN),
        }
    }

    /// Check domain, normalized orthonormality defect (to `tol`), time
    /// orientation and handedness.
    pub fn validate(&self, st: &dyn Spacetime, tol: f64) -> Result<(), FrameError> {
        let d = normalized_defect(st, self)?;
        if !(d <= tol) {
            return Err(FrameError::Degenerate(format!("orthonormality defect {d:e} exceeds {tol:e}")));
        }
        if st.time_orientation(&self.point, &self.e0()) <= 0.0 {
            return Err(FrameError::Degenerate("e0 is not future-oriented".into()));
        }
        let det = (st.reference_tetrad(&self.point)?.try_inverse())
            .map(|t| (t * self.e).determinant())
            .unwrap_or(f64::NAN);
        if !(det > 0.0) {
            return Err(FrameError::Degenerate("frame is not direct".into()));
        }
        Ok(())
    }
}

/// θ⁻¹ = η θᵀ g for an orthonormal tetrad θ.
fn tetrad_inverse(theta: &Mat4, g: &Mat4) -> Mat4 {
    eta() * theta.transpose() * g
}

/// max |eᵀ g e − η|.
pub fn orthonormality_defect(st: &dyn Spacetime, f: &Frame) -> Result<f64, FrameError> {
    let g = st.metric(&f.point)?;
    Ok((f.e.transpose() * g * f.e - eta()).amax())
}

/// Orthonormality defect measured against the floating-point scale of each
/// inner product, Σ |e^μ_a| |g_μν| |e^ν_b|. O(ε) at any rapidity in charts
/// without null coordinate directions; where g_μμ = 0 (ingoing
/// Eddington–Finkelstein) boosted components arise by cancellation and the
/// floor grows like ε cosh²β.
pub fn normalized_defect(st: &dyn Spacetime, f: &Frame) -> Result<f64, FrameError> {
    let g = st.metric(&f.point)?;
    Ok(normalized_defect_with(&g, &f.e))
}

fn normalized_defect_with(g: &Mat4, e: &Mat4) -> f64 {
    // columns scaled to unit max so that huge boosts cannot overflow
    let c: [f64; 4] = std::array::from_fn(|a| e.column(a).amax().max(f64::MIN_POSITIVE));
    let es = Mat4::from_fn(|i, a| e[(i, a)] / c[a]);
    let d = es.transpose() * g * es;
    let ea = es.abs();
    let s = ea.transpose() * g.abs() * ea;
    let eta = eta();
    let mut worst: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let num = d[(a, b)] - eta[(a, b)] / c[a] / c[b];
            worst = worst.max(num.abs() / s[(a, b)].max(f64::MIN_POSITIVE));
        }
    }
    if worst.is_nan() {
        f64::INFINITY
    } else {
        worst
    }
}

/// Pure boost of rapidity `rho` along unit direction `n`.
pub fn boost_along(rho: f64, n: &Vector3<f64>) -> Mat4 {
    let (s, c) = (rho.sinh(), rho.cosh());
    // cosh ρ − 1 without cancellation
    let cm1 = 2.0 * (0.5 * rho).sinh().powi(2);
    let mut b = Mat4::identity();
    b[(0, 0)] = c;
    for i in 0..3 {
        b[(0, i + 1)] = s * n[i];
        b[(i + 1, 0)] = s * n[i];
        for k in 0..3 {
            b[(i + 1, k + 1)] += cm1 * n[i] * n[k];
        }
    }
    b
}

/// exp(Σ b_j E_j) with E_j = ε₀⊗ε_j* + ε_j⊗ε₀*.
pub fn boost_matrix(b: [f64; 3]) -> Mat4 {
    let v = Vector3::from(b);
    let rho = v.norm();
    if rho == 0.0 {
        return Mat4::identity();
    }
    boost_along(rho, &(v / rho))
}

/// Flow of Σ b_j V_j: right multiplication by the boost exponential.
pub fn vertical_flow(f: &Frame, b: [f64; 3]) -> Frame {
    Frame::new(f.point, f.e * boost_matrix(b))
}

/// Rotate the spatial frame vectors: e ← e · diag(1, R).
pub fn fiber_rotation(f: &Frame, r: &Matrix3<f64>) -> Frame {
    let mut m = Mat4::identity();
    m.fixed_view_mut::<3, 3>(1, 1).copy_from(r);
    Frame::new(f.point, f.e * m)
}

/// Project Λ back onto SO₀(1,3).
///
/// Column 0 is normalized keeping its direction (or keeping its spatial part
/// when the time component is too large for c² − |v|² to be accurate). The
/// spatial columns are carried to the rest frame of column 0 with the exact
/// inverse boost, orthonormalized there by Gram–Schmidt, and boosted back.
fn repair_lorentz(lam: &Mat4) -> Result<Mat4, FrameError> {
    let c0 = lam[(0, 0)];
    let v0 = Vector3::new(lam[(1, 0)], lam[(2, 0)], lam[(3, 0)]);
    if !(c0 > 0.0) {
        return Err(FrameError::Degenerate("e0 is not future-oriented".into()));
    }
    let v = if c0 * c0 < 1e4 {
        let q = c0 * c0 - v0.norm_squared();
        if !(q > 0.0) {
            return Err(FrameError::Degenerate("e0 is null or spacelike".into()));
        }
        v0 / q.sqrt()
    } else {
        if v0.norm() > c0 * (1.0 + 1e-10) {
            return Err(FrameError::Degenerate("e0 is null or spacelike".into()));
        }
        v0
    };
    let sh = v.norm();
    let ch = sh.hypot(1.0);
    let n = if sh > 0.0 { v / sh } else { Vector3::x() };

    let mut r = Matrix3::zeros();
    let mut along = Vector3::zeros();
    for k in 0..3 {
        let sp = Vector3::new(lam[(1, k + 1)], lam[(2, k + 1)], lam[(3, k + 1)]);
        let par = n.dot(&sp);
        along[k] = par / ch;
        let rk = sp - n * par + n * along[k];
        r.set_column(k, &rk);
    }
    // Beyond sh ~ 1e8 the rest-frame parts of the spatial columns are below
    // the rounding of their boosted entries; any orthonormal completion is as
    // good as another, so handedness is imposed rather than checked, and a
    // collapsed triad is replaced by the minimal rotation matching `along`.
    let huge = sh > 1e8;
    let mut q = match gram_schmidt3(&r, huge) {
        Ok(q) => q,
        Err(_) if huge => rotation_taking(&along.normalize(), &n),
        Err(e) => return Err(e),
    };
    // Gram–Schmidt mixes columns and so perturbs their components along n,
    // which the boost back amplifies by ch. Those components are accurate in
    // r, so rotate q to restore them.
    if sh > 1.0 {
        let want = along.normalize();
        let have = q.transpose() * n;
        q *= rotation_taking(&want, &have);
    }

    let mut out = Mat4::zeros();
    out[(0, 0)] = ch;
    for i in 0..3 {
        out[(i + 1, 0)] = sh * n[i];
    }
    let cm1 = sh * (sh / (ch + 1.0));
    for k in 0..3 {
        let rk = q.column(k);
        let p = n.dot(&rk);
        out[(0, k + 1)] = sh * p;
        for i in 0..3 {
            out[(i + 1, k + 1)] = rk[i] + cm1 * p * n[i];
        }
    }
    Ok(out)
}

/// Minimal rotation W with W a = b for unit vectors.
fn rotation_taking(a: &Vector3<f64>, b: &Vector3<f64>) -> Matrix3<f64> {
    let k = a.cross(b);
    let c = a.dot(b);
    if c < -0.5 {
        // half turn about an axis orthogonal to a, then the short rotation
        let axis = if a.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let u = (axis - a * a.dot(&axis)).normalize();
        let half = u * u.transpose() * 2.0 - Matrix3::identity();
        return rotation_taking(&(half * a), b) * half;
    }
    let kx = k.cross_matrix();
    Matrix3::identity() + kx + kx * kx / (1.0 + c)
}

fn gram_schmidt3(r: &Matrix3<f64>, impose_handedness: bool) -> Result<Matrix3<f64>, FrameError> {
    let mut q = Matrix3::zeros();
    for k in 0..3 {
        let mut w: Vector3<f64> = r.column(k).into_owned();
        // two passes for stability
        for _ in 0..2 {
            for j in 0..k {
                let qj: Vector3<f64> = q.column(j).into_owned();
                w -= qj * qj.dot(&w);
            }
        }
        let nw = w.norm();
        if !(nw > 1e-8) {
            return Err(FrameError::Degenerate("spatial frame vectors are dependent".into()));
        }
        q.set_column(k, &(w / nw));
    }
    if q.determinant() <= 0.0 {
        if !impose_handedness {
            return Err(FrameError::Degenerate("frame orientation flipped".into()));
        }
        let c = -q.column(2);
        q.set_column(2, &c);
    }
    Ok(q)
}

/// Normalized defect below which a frame counts as exact and is left as is.
const EXACT_DEFECT: f64 = 8.0 * f64::EPSILON;

/// Project a nearly orthonormal frame back onto the bundle.
pub fn reorthonormalize(st: &dyn Spacetime, f: &Frame) -> Result<Frame, FrameError> {
    let theta = st.reference_tetrad(&f.point)?;
    let g = st.metric(&f.point)?;
    if normalized_defect_with(&g, &f.e) <= EXACT_DEFECT {
        if !(st.time_orientation(&f.point, &f.e0()) > 0.0) {
            return Err(FrameError::Degenerate("e0 is not future-oriented".into()));
        }
        return Ok(*f);
    }
    let lam = tetrad_inverse(&theta, &g) * f.e;
    let fixed = repair_lorentz(&lam)?;
    Ok(Frame::new(f.point, theta * fixed))
}

/// Geodesic spray lifted to frames: dm = e₀, de_a = −Γ(e₀, e_a).
pub fn h0(st: &dyn Spacetime, f: &Frame) -> Result<FrameTangent, FrameError> {
    let gam = st.christoffel(&f.point)?;
    Ok(FrameTangent {
        dm: f.e0(),
        de: transport_rate(&gam, &f.e0(), &f.e),
    })
}

/// −Γ^μ_{νλ} u^ν e^λ_a for every column a.
fn transport_rate(gam: &crate::geometry::Christoffel, u: &Vec4, e: &Mat4) -> Mat4 {
    let mut m = Mat4::zeros();
    for mu in 0..4 {
        for lam in 0..4 {
            let mut s = 0.0;
            for nu in 0..4 {
                s += gam[mu][nu][lam] * u[nu];
            }
            m[(mu, lam)] = -s;
        }
    }
    m * e
}

/// Generic RK4 step of a frame vector field; `field(stage, frame)`.
pub(crate) fn rk4_frame<F>(f: &Frame, ds: f64, mut field: F) -> Result<Frame, FrameError>
where
    F: FnMut(usize, f64, &Frame) -> Result<FrameTangent, FrameError>,
{
    let shift = |f: &Frame, k: &FrameTangent, h: f64| {
        let mut p = f.point;
        for i in 0..4 {
            p.coords[i] += h * k.dm[i];
        }
        Frame::new(p, f.e + k.de * h)
    };
    let k1 = field(0, 0.0, f)?;
    let k2 = field(1, 0.5, &shift(f, &k1, 0.5 * ds))?;
    let k3 = field(2, 0.5, &shift(f, &k2, 0.5 * ds))?;
    let k4 = field(3, 1.0, &shift(f, &k3, ds))?;
    let mut p = f.point;
    for i in 0..4 {
        p.coords[i] += ds / 6.0 * (k1.dm[i] + 2.0 * k2.dm[i] + 2.0 * k3.dm[i] + k4.dm[i]);
    }
    let e = f.e + (k1.de + (k2.de + k3.de) * 2.0 + k4.de) * (ds / 6.0);
    Ok(Frame::new(p, e))
}

/// One RK4 step of the geodesic flow without repair or chart handling.
pub fn geodesic_step_raw(st: &dyn Spacetime, f: &Frame, ds: f64) -> Result<Frame, FrameError> {
    let out = rk4_frame(f, ds, |stage, _, fr| {
        h0(st, fr).map_err(|e| match e {
            FrameError::Geometry(source) => FrameError::StepRejected { stage, source },
            other => other,
        })
    })?;
    st.check_domain(&out.point)
        .map_err(|source| FrameError::StepRejected { stage: 4, source })?;
    Ok(out)
}

/// Switch chart if the spacetime asks for it; frame vectors follow the Jacobian.
pub(crate) fn apply_chart_transition(st: &dyn Spacetime, f: Frame) -> Frame {
    match st.chart_transition(&f.point) {
        Some((p, jac)) => Frame::new(p, jac * f.e),
        None => f,
    }
}

/// Finish a raw step: chart hand-over then projection onto the bundle.
pub(crate) fn finish_step(st: &dyn Spacetime, f: Frame) -> Result<Frame, FrameError> {
    let f = apply_chart_transition(st, f);
    reorthonormalize(st, &f)
}

/// One classical RK4 step of Φ' = H₀(Φ), then chart hand-over and repair.
/// A negative `ds` runs the flow backwards.
pub fn geodesic_step(st: &dyn Spacetime, f: &Frame, ds: f64) -> Result<Frame, FrameError> {
    geodesic_step_checked(st, f, ds).map(|(g, _)| g)
}

/// `geodesic_step` that also returns the normalized defect of the raw RK4
/// output, before repair. Flat spacetimes move on straight lines exactly.
pub(crate) fn geodesic_step_checked(st: &dyn Spacetime, f: &Frame, ds: f64) -> Result<(Frame, f64), FrameError> {
    if !(ds.is_finite() && ds != 0.0) {
        return Err(FrameError::Invalid(format!("step size must be finite and nonzero, got {ds}")));
    }
    if st.is_flat() {
        st.check_domain(&f.point)?;
        let mut p = f.point;
        for i in 0..4 {
            p.coords[i] += ds * f.e[(i, 0)];
        }
        return Ok((reorthonormalize(st, &Frame::new(p, f.e))?, 0.0));
    }
    let raw = geodesic_step_raw(st, f, ds)?;
    let defect = normalized_defect(st, &raw)?;
    Ok((finish_step(st, raw)?, defect))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boost_matches_series_exponential() {
        let b = [0.3, -0.2, 0.5];
        let mut gen = Mat4::zeros();
        for j in 0..3 {
            gen[(0, j + 1)] = b[j];
            gen[(j + 1, 0)] = b[j];
        }
        let mut term = Mat4::identity();
        let mut sum = Mat4::identity();
        for k in 1..30 {
            term = term * gen / k as f64;
            sum += term;
        }
        assert!((sum - boost_matrix(b)).amax() < 1e-14);
    }

    #[test]
    fn repair_is_stable_at_high_rapidity() {
        let b = boost_along(20.0, &Vector3::new(0.6, 0.0, 0.8));
        let rot = nalgebra::Rotation3::from_euler_angles(0.3, -0.4, 1.1).into_inner();
        let mut r4 = Mat4::identity();
        r4.fixed_view_mut::<3, 3>(1, 1).copy_from(&rot);
        let lam = b * r4;
        let fixed = repair_lorentz(&lam).unwrap();
        assert!(normalized_defect_with(&eta(), &fixed) < 1e-14);
        // entrywise change relative to the column scale
        let d = fixed - lam;
        for k in 0..4 {
            let scale = lam.column(k).amax();
            assert!(d.column(k).amax() / scale < 1e-15, "column {k}: {}", d.column(k).amax() / scale);
        }
        // components along the boost direction are kept to full precision
        assert!((fixed.row(0) - lam.row(0)).component_div(&lam.row(0).abs()).amax() < 1e-13);
    }

    #[test]
    fn repair_survives_extreme_rapidity() {
        for rho in [40.0, 98.0, 300.0] {
            let b = boost_along(rho, &Vector3::new(0.6, 0.0, 0.8));
            let lam = b * boost_along(0.3, &Vector3::new(0.0, 1.0, 0.0));
            let fixed = repair_lorentz(&lam).unwrap();
            assert!(normalized_defect_with(&eta(), &fixed) < 1e-14, "{rho}");
            let rel = (fixed.column(0) - lam.column(0)).amax() / lam.column(0).amax();
            assert!(rel < 1e-14, "{rho}: {rel:e}");
        }
    }
}
