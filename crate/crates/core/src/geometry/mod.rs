//! Spacetime catalog and curvature kernel.
//!
//! Signature is (+,−,−,−): unit future timelike vectors satisfy g(u,u) = 1.
//! Riemann follows R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} − Γ^a_{de} Γ^e_{cb},
//! Ricci is R_{bd} = R^a_{bad}, and T = Ric − ½ R g.
//!
//! A metric is supplied by implementing [`MetricField`], whose components are
//! written once over any [`Scalar`]. Every `MetricField` is automatically a
//! [`Spacetime`], the object-safe interface the rest of the crate consumes.

mod catalog;
mod curvature;
mod oracle;

pub use catalog::{Catalog, DeSitter, Minkowski, PowerLawFlrw, Schwarzschild};
pub use curvature::{boosted_velocity, kretschmann_from, EnergyConditionReport};
pub use oracle::{curvature_oracle_with, christoffel_oracle_with};

use crate::jet::{Jet2, Scalar};
use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vec4 = Vector4<f64>;
pub type Mat4 = Matrix4<f64>;
/// Γ^a_{bc} stored as `gamma[a][b][c]`.
pub type Christoffel = [[[f64; 4]; 4]; 4];
/// R^a_{bcd} stored as `riemann[a][b][c][d]`.
pub type Riemann = [[[[f64; 4]; 4]; 4]; 4];

/// Minkowski metric components in an orthonormal basis.
pub fn eta() -> Mat4 {
    Mat4::from_diagonal(&Vec4::new(1.0, -1.0, -1.0, -1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChartId(pub u8);

/// A base point: chart plus four chart coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub chart: ChartId,
    pub coords: [f64; 4],
}

impl SpacetimePoint {
    pub fn new(chart: ChartId, coords: [f64; 4]) -> Self {
        SpacetimePoint { chart, coords }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricData {
    pub g: Mat4,
    pub gamma: Christoffel,
    pub riemann: Riemann,
    pub ricci: Mat4,
    pub scalar: f64,
    pub energy_momentum: Mat4,
}

impl MetricData {
    /// Ric(u, u).
    pub fn ricci_on(&self, u: &Vec4) -> f64 {
        (u.transpose() * self.ricci * u)[0]
    }

    /// T(u, u).
    pub fn energy_momentum_on(&self, u: &Vec4) -> f64 {
        (u.transpose() * self.energy_momentum * u)[0]
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeometryError {
    #[error("point outside the domain of {spacetime}: {violation}")]
    OutOfDomain { spacetime: String, violation: String },
    #[error("unknown chart {0:?}")]
    UnknownChart(ChartId),
    #[error("finite-difference stencil leaves the chart domain: {0}")]
    StencilLeavesDomain(String),
    #[error("metric is degenerate at {0:?}")]
    DegenerateMetric([f64; 4]),
    #[error("unknown spacetime id `{0}`")]
    UnknownSpacetime(String),
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: f64,
        reason: String,
    },
}

/// A Lorentzian metric given by closed-form components.
///
/// Only `id`, `check_domain` and `components` are required. Catalog entries
/// override the closed-form hooks for speed; the defaults derive everything
/// from the components by automatic differentiation.
pub trait MetricField: Send + Sync {
    fn id(&self) -> &str;

    fn parameters(&self) -> Vec<(String, f64)> {
        Vec::new()
    }

    fn chart_name(&self, chart: ChartId) -> String {
        format!("chart{}", chart.0)
    }

    fn check_domain(&self, p: &SpacetimePoint) -> Result<(), GeometryError>;

    /// Metric components g_{ab} at chart coordinates `x`.
    fn components<S: Scalar>(&self, chart: ChartId, x: &[S; 4]) -> [[S; 4]; 4];

    fn christoffel_closed_form(&self, _p: &SpacetimePoint) -> Option<Christoffel> {
        None
    }

    fn kretschmann_closed_form(&self, _p: &SpacetimePoint) -> Option<f64> {
        None
    }

    /// An orthonormal, future-oriented, direct frame at `p`.
    fn reference_tetrad(&self, p: &SpacetimePoint) -> Result<Mat4, GeometryError> {
        let x = p.coords;
        let g = to_mat4(&self.components::<f64>(p.chart, &x));
        gram_schmidt_tetrad(&g, |v| self.time_orientation(p, v)).ok_or(GeometryError::DegenerateMetric(x))
    }

    /// Positive on future-directed timelike vectors.
    fn time_orientation(&self, _p: &SpacetimePoint, v: &Vec4) -> f64 {
        v[0]
    }

    /// Points where the chart is abandoned as a terminal boundary.
    fn terminal(&self, _p: &SpacetimePoint) -> bool {
        false
    }

    /// Switch to a better-conditioned chart. Returns the new point and the
    /// Jacobian ∂x'/∂x used to map tangent vectors.
    fn chart_transition(&self, _p: &SpacetimePoint) -> Option<(SpacetimePoint, Mat4)> {
        None
    }

    fn is_flat(&self) -> bool {
        false
    }
}

/// Object-safe view of a spacetime, implemented for every [`MetricField`].
pub trait Spacetime: Send + Sync {
    fn id(&self) -> &str;
    fn parameters(&self) -> Vec<(String, f64)>;
    fn chart_name(&self, chart: ChartId) -> String;
    fn check_domain(&self, p: &SpacetimePoint) -> Result<(), GeometryError>;
    fn metric(&self, p: &SpacetimePoint) -> Result<Mat4, GeometryError>;
    fn christoffel(&self, p: &SpacetimePoint) -> Result<Christoffel, GeometryError>;
    fn curvature(&self, p: &SpacetimePoint) -> Result<MetricData, GeometryError>;
    /// Curvature from nested central differences of `metric` alone.
    fn curvature_oracle(&self, p: &SpacetimePoint) -> Result<MetricData, GeometryError>;
    fn kretschmann(&self, p: &SpacetimePoint) -> Result<f64, GeometryError>;
    fn reference_tetrad(&self, p: &SpacetimePoint) -> Result<Mat4, GeometryError>;
    fn time_orientation(&self, p: &SpacetimePoint, v: &Vec4) -> f64;
    fn terminal(&self, p: &SpacetimePoint) -> bool;
    fn chart_transition(&self, p: &SpacetimePoint) -> Option<(SpacetimePoint, Mat4)>;
    fn is_flat(&self) -> bool;

    /// Extremes of T(u,u) and Ric(u,u) over sampled unit future timelike `u`
    /// with rapidity uniform on [0, rho_max] relative to the reference tetrad.
    fn energy_condition_report(
        &self,
        p: &SpacetimePoint,
        n_samples: usize,
        seed: u64,
        rho_max: f64,
    ) -> Result<EnergyConditionReport, GeometryError> {
        let data = self.curvature(p)?;
        let tetrad = self.reference_tetrad(p)?;
        Ok(curvature::energy_condition_sample(&data, &tetrad, n_samples, seed, rho_max))
    }
}

impl<T: MetricField> Spacetime for T {
    fn id(&self) -> &str {
        MetricField::id(self)
    }
    fn parameters(&self) -> Vec<(String, f64)> {
        MetricField::parameters(self)
    }
    fn chart_name(&self, chart: ChartId) -> String {
        MetricField::chart_name(self, chart)
    }
    fn check_domain(&self, p: &SpacetimePoint) -> Result<(), GeometryError> {
        MetricField::check_domain(self, p)
    }
    fn metric(&self, p: &SpacetimePoint) -> Result<Mat4, GeometryError> {
        MetricField::check_domain(self, p)?;
        Ok(to_mat4(&self.components::<f64>(p.chart, &p.coords)))
    }
    fn christoffel(&self, p: &SpacetimePoint) -> Result<Christoffel, GeometryError> {
        MetricField::check_domain(self, p)?;
        if let Some(c) = self.christoffel_closed_form(p) {
            return Ok(c);
        }
        let gj = self.components(p.chart, &Jet2::seed(p.coords));
        curvature::christoffel_from_jets(&gj, p.coords)
    }
    fn curvature(&self, p: &SpacetimePoint) -> Result<MetricData, GeometryError> {
        MetricField::check_domain(self, p)?;
        let gj = self.components(p.chart, &Jet2::seed(p.coords));
        curvature::curvature_from_jets(&gj, p.coords)
    }
    fn curvature_oracle(&self, p: &SpacetimePoint) -> Result<MetricData, GeometryError> {
        MetricField::check_domain(self, p)?;
        let chart = p.chart;
        curvature_oracle_with(&|x: &[f64; 4]| Spacetime::metric(self, &SpacetimePoint::new(chart, *x)), p.coords)
    }
    fn kretschmann(&self, p: &SpacetimePoint) -> Result<f64, GeometryError> {
        MetricField::check_domain(self, p)?;
        if let Some(k) = self.kretschmann_closed_form(p) {
            return Ok(k);
        }
        let d = Spacetime::curvature(self, p)?;
        Ok(kretschmann_from(&d.riemann, &d.g))
    }
    fn reference_tetrad(&self, p: &SpacetimePoint) -> Result<Mat4, GeometryError> {
        MetricField::check_domain(self, p)?;
        MetricField::reference_tetrad(self, p)
    }
    fn time_orientation(&self, p: &SpacetimePoint, v: &Vec4) -> f64 {
        MetricField::time_orientation(self, p, v)
    }
    fn terminal(&self, p: &SpacetimePoint) -> bool {
        MetricField::terminal(self, p)
    }
    fn chart_transition(&self, p: &SpacetimePoint) -> Option<(SpacetimePoint, Mat4)> {
        MetricField::chart_transition(self, p)
    }
    fn is_flat(&self) -> bool {
        MetricField::is_flat(self)
    }
}

pub(crate) fn to_mat4(g: &[[f64; 4]; 4]) -> Mat4 {
    Mat4::from_fn(|i, j| g[i][j])
}

/// Lorentzian Gram–Schmidt on the coordinate basis, then fix time
/// orientation and handedness.
pub(crate) fn gram_schmidt_tetrad(g: &Mat4, orient: impl Fn(&Vec4) -> f64) -> Option<Mat4> {
    let ip = |a: &Vec4, b: &Vec4| (a.transpose() * g * b)[0];
    let mut basis: Vec<Vec4> = (0..4).map(|i| Vec4::ith(i, 1.0)).collect();
    // pick the most timelike coordinate direction first
    let t = (0..4).max_by(|&a, &b| ip(&basis[a], &basis[a]).total_cmp(&ip(&basis[b], &basis[b])))?;
    basis.swap(0, t);
    let mut out: Vec<Vec4> = Vec::with_capacity(4);
    for (k, v) in basis.iter().enumerate() {
        let mut w = *v;
        for (j, e) in out.iter().enumerate() {
            let s = if j == 0 { 1.0 } else { -1.0 };
            w -= e * (s * ip(e, v));
        }
        let n = ip(&w, &w);
        let want_positive = k == 0;
        if !(n.is_finite()) || (want_positive && n <= 0.0) || (!want_positive && n >= 0.0) {
            return None;
        }
        out.push(w / n.abs().sqrt());
    }
    if orient(&out[0]) < 0.0 {
        out[0] = -out[0];
    }
    let mut e = Mat4::from_columns(&out);
    if e.determinant() < 0.0 {
        e.set_column(3, &(-out[3]));
    }
    Some(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_schmidt_gives_orthonormal_direct_frame() {
        let g = Mat4::new(
            0.5, -1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, -16.0, 0.0, 0.0, 0.0, 0.0, -9.0,
        );
        let e = gram_schmidt_tetrad(&g, |v| v[0]).unwrap();
        let d = e.transpose() * g * e - eta();
        assert!(d.amax() < 1e-14);
        assert!(e.determinant() > 0.0);
        assert!(e[(0, 0)] > 0.0);
    }
}
