//! Built-in spacetimes.

use super::{ChartId, Christoffel, GeometryError, Mat4, MetricField, SpacetimePoint, Vec4};
use crate::jet::Scalar;
use std::collections::BTreeMap;

fn out_of_domain(id: &str, violation: String) -> GeometryError {
    GeometryError::OutOfDomain {
        spacetime: id.to_string(),
        violation,
    }
}

fn check_finite(id: &str, p: &SpacetimePoint) -> Result<(), GeometryError> {
    if p.coords.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(out_of_domain(id, format!("non-finite coordinates {:?}", p.coords)))
    }
}

fn positive(name: &str, value: f64) -> Result<f64, GeometryError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(GeometryError::InvalidParameter {
            name: name.to_string(),
            value,
            reason: "must be finite and > 0".into(),
        })
    }
}

/// Flat spacetime in cartesian coordinates (t, x, y, z).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Minkowski;

impl MetricField for Minkowski {
    fn id(&self) -> &str {
        "minkowski"
    }
    fn chart_name(&self, _chart: ChartId) -> String {
        "cartesian".into()
    }
    fn check_domain(&self, p: &SpacetimePoint) -> Result<(), GeometryError> {
        if p.chart != ChartId(0) {
            return Err(GeometryError::UnknownChart(p.chart));
        }
        check_finite("minkowski", p)
    }
    fn components<S: Scalar>(&self, _chart: ChartId, _x: &[S; 4]) -> [[S; 4]; 4] {
        let z = S::cst(0.0);
        let mut g = [[z; 4]; 4];
        g[0][0] = S::cst(1.0);
        for (i, row) in g.iter_mut().enumerate().skip(1) {
            row[i] = S::cst(-1.0);
        }
        g
    }
    fn christoffel_closed_form(&self, _p: &SpacetimePoint) -> Option<Christoffel> {
        Some([[[0.0; 4]; 4]; 4])
    }
    fn kretschmann_closed_form(&self, _p: &SpacetimePoint) -> Option<f64> {
        Some(0.0)
    }
    fn reference_tetrad(&self, _p: &SpacetimePoint) -> Result<Mat4, GeometryError> {
        Ok(Mat4::identity())
    }
    fn is_flat(&self) -> bool {
        true
    }
}

/// Schwarzschild in ingoing Eddington–Finkelstein coordinates (v, r, θ, φ),
/// regular across the horizon down to r → 0.
///
/// Chart 0 uses the usual polar angles, chart 1 the same metric in angles
/// about a rotated axis. Frames near either chart's poles are handed over
/// to the other chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schwarzschild {
    mass: f64,
    r_exit: f64,
}

/// Chart switch threshold on sin θ.
const POLE_SIN: f64 = 0.05;

impl Schwarzschild {
    pub fn new(mass: f64) -> Result<Self, GeometryError> {
        let mass = positive("M", mass)?;
        Ok(Schwarzschild {
            mass,
            r_exit: 1e-3 * mass,
        })
    }

    /// Terminal radius below which trajectories are stopped.
    pub fn with_exit_radius(mut self, r_exit: f64) -> Result<Self, GeometryError> {
        self.r_exit = positive("r_exit", r_exit)?;
        Ok(self)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn exit_radius(&self) -> f64 {
        self.r_exit
    }

    /// Static observer frame at (v, r, θ, φ); requires r > 2M.
    pub fn static_frame(&self, p: &SpacetimePoint) -> Result<Mat4, GeometryError> {
        self.check_domain(p)?;
        let [_, r, th, _] = p.coords;
        let f = 1.0 - 2.0 * self.mass / r;
        if f <= 0.0 {
            return Err(out_of_domain(
                "schwarzschild",
                format!("static observers need r > 2M, got r = {r}"),
            ));
        }
        let sf = f.sqrt();
        let mut e = Mat4::zeros();
        e[(0, 0)] = 1.0 / sf;
        e[(0, 1)] = 1.0 / sf;
        e[(1, 1)] = sf;
        e[(2, 2)] = 1.0 / r;
        e[(3, 3)] = 1.0 / (r * th.sin());
        Ok(e)
    }

    /// Unit direction on the sphere for angles of `chart`, in the frame of chart 0.
    fn rotation(chart: ChartId) -> [[f64; 3]; 3] {
        match chart.0 {
            // n1 = P n0 with P(x, y, z) = (y, z, x)
            0 => [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]],
            _ => [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        }
    }
}

impl MetricField for Schwarzschild {
    fn id(&self) -> &str {
        "schwarzschild"
    }
    fn parameters(&self) -> Vec<(String, f64)> {
        vec![("M".into(), self.mass)]
    }
    fn chart_name(&self, chart: ChartId) -> String {
        match chart.0 {
            0 => "ef".into(),
            _ => "ef_rotated".into(),
        }
    }
    fn check_domain(&self, p: &SpacetimePoint) -> Result<(), GeometryError> {
        if p.chart.0 > 1 {
            return Err(GeometryError::UnknownChart(p.chart));
        }
        check_finite("schwarzschild", p)?;
        let [_, r, th, _] = p.coords;
        if r <= 0.0 {
            return Err(out_of_domain("schwarzschild", format!("r = {r} violates r > 0")));
        }
        if th <= 0.0 || th >= std::f64::consts::PI {
            return Err(out_of_domain(
                "schwarzschild",
                format!("theta = {th} violates 0 < theta < pi"),
            ));
        }
        Ok(())
    }
    fn components<S: Scalar>(&self, _chart: ChartId, x: &[S; 4]) -> [[S; 4]; 4] {
        let r = x[1];
        let s = x[2].sin();
        let z = S::cst(0.0);
        let mut g = [[z; 4]; 4];
        g[0][0] = S::cst(1.0) - r.recip().scale(2.0 * self.mass);
        g[0][1] = S::cst(-1.0);
        g[1][0] = S::cst(-1.0);
        g[2][2] = -(r * r);
        g[3][3] = -(r * r * s * s);
        g
    }
    fn christoffel_closed_form(&self, p: &SpacetimePoint) -> Option<Christoffel> {
        let m = self.mass;
        let [_, r, th, _] = p.coords;
        let f = 1.0 - 2.0 * m / r;
        let (s, c) = th.sin_cos();
        let mut g = [[[0.0; 4]; 4]; 4];
        let m_r2 = m / (r * r);
        g[0][0][0] = m_r2;
        g[0][2][2] = -r;
        g[0][3][3] = -r * s * s;
        g[1][0][0] = f * m_r2;
        g[1][0][1] = -m_r2;
        g[1][1][0] = -m_r2;
        g[1][2][2] = -r * f;
        g[1][3][3] = -r * f * s * s;
        g[2][1][2] = 1.0 / r;
        g[2][2][1] = 1.0 / r;
        g[2][3][3] = -s * c;
        g[3][1][3] = 1.0 / r;
        g[3][3][1] = 1.0 / r;
        g[3][2][3] = c / s;
        g[3][3][2] = c / s;
        Some(g)
    }
    fn kretschmann_closed_form(&self, p: &SpacetimePoint) -> Option<f64> {
        let r = p.coords[1];
        Some(48.0 * self.mass * self.mass / r.powi(6))
    }
    /// Free-fall (Painlevé–Gullstrand) observers, regular for all r > 0.
    fn reference_tetrad(&self, p: &SpacetimePoint) -> Result<Mat4, GeometryError> {
        let [_, r, th, _] = p.coords;
        let beta = (2.0 * self.mass / r).sqrt();
        let mut e = Mat4::zeros();
        e[(0, 0)] = 1.0 / (1.0 + beta);
        e[(1, 0)] = -beta;
        e[(0, 1)] = 1.0 / (1.0 + beta);
        e[(1, 1)] = 1.0;
        e[(2, 2)] = 1.0 / r;
        e[(3, 3)] = 1.0 / (r * th.sin());
        Ok(e)
    }
    fn terminal(&self, p: &SpacetimePoint) -> bool {
        p.coords[1] <= self.r_exit
    }
    fn chart_transition(&self, p: &SpacetimePoint) -> Option<(SpacetimePoint, Mat4)> {
        let [v, r, th, ph] = p.coords;
        let (s, c) = th.sin_cos();
        if s >= POLE_SIN {
            return None;
        }
        let rot = Self::rotation(p.chart);
        let apply = |a: [f64; 3]| -> [f64; 3] {
            let mut o = [0.0; 3];
            for (i, oi) in o.iter_mut().enumerate() {
                *oi = (0..3).map(|k| rot[i][k] * a[k]).sum();
            }
            o
        };
        let (sp, cp) = ph.sin_cos();
        let n = apply([s * cp, s * sp, c]);
        let dth = apply([c * cp, c * sp, -s]);
        let dph = apply([-s * sp, s * cp, 0.0]);
        let th2 = n[2].clamp(-1.0, 1.0).acos();
        let ph2 = n[1].atan2(n[0]);
        let (s2, c2) = th2.sin_cos();
        let (sp2, cp2) = ph2.sin_cos();
        let e_th = [c2 * cp2, c2 * sp2, -s2];
        let e_ph = [-sp2, cp2, 0.0];
        let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let mut jac = Mat4::identity();
        jac[(2, 2)] = dot(e_th, dth);
        jac[(2, 3)] = dot(e_th, dph);
        jac[(3, 2)] = dot(e_ph, dth) / s2;
        jac[(3, 3)] = dot(e_ph, dph) / s2;
        let chart = ChartId(1 - p.chart.0.min(1));
        Some((SpacetimePoint::new(chart, [v, r, th2, ph2]), jac))
    }
    /// Future-directed vectors have positive v-component.
    fn time_orientation(&self, _p: &SpacetimePoint, v: &Vec4) -> f64 {
        v[0]
    }
}

/// Spatially flat FLRW with a(t) = t^p in comoving cartesian coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawFlrw {
    p: f64,
}

impl PowerLawFlrw {
    pub fn new(p: f64) -> Result<Self, GeometryError> {
        Ok(PowerLawFlrw { p: positive("p", p)? })
    }

    /// Matter-dominated universe, a(t) = t^{2/3}.
    pub fn einstein_de_sitter() -> Self {
        PowerLawFlrw { p: 2.0 / 3.0 }
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    pub fn scale_factor(&self, t: f64) -> f64 {
        t.powf(self.p)
    }
}

impl MetricField for PowerLawFlrw {
    fn id(&self) -> &str {
        "flrw_power"
    }
    fn parameters(&self) -> Vec<(String, f64)> {
        vec![("p".into(), self.p)]
    }
    fn chart_name(&self, _chart: ChartId) -> String {
        "comoving".into()
    }
    fn check_domain(&self, p: &SpacetimePoint) -> Result<(), GeometryError> {
        if p.chart != ChartId(0) {
            return Err(GeometryError::UnknownChart(p.chart));
        }
        check_finite("flrw_power", p)?;
        let t = p.coords[0];
        if t <= 0.0 {
            return Err(out_of_domain("flrw_power", format!("t = {t} violates t > 0")));
        }
        Ok(())
    }
    fn components<S: Scalar>(&self, _chart: ChartId, x: &[S; 4]) -> [[S; 4]; 4] {
        let a2 = x[0].powf(2.0 * self.p);
        let z = S::cst(0.0);
        let mut g = [[z; 4]; 4];
        g[0][0] = S::cst(1.0);
        for (i, row) in g.iter_mut().enumerate().skip(1) {
            row[i] = -a2;
        }
        g
    }
    fn christoffel_closed_form(&self, p: &SpacetimePoint) -> Option<Christoffel> {
        let t = p.coords[0];
        let aadot = self.p * t.powf(2.0 * self.p - 1.0);
        let hub = self.p / t;
        let mut g = [[[0.0; 4]; 4]; 4];
        for i in 1..4 {
            g[0][i][i] = aadot;
            g[i][0][i] = hub;
            g[i][i][0] = hub;
        }
        Some(g)
    }
    fn kretschmann_closed_form(&self, p: &SpacetimePoint) -> Option<f64> {
        let t = p.coords[0];
        let q = self.p;
        Some(12.0 * (q * q * (q - 1.0) * (q - 1.0) + q.powi(4)) / t.powi(4))
    }
    fn reference_tetrad(&self, p: &SpacetimePoint) -> Result<Mat4, GeometryError> {
        let ia = 1.0 / self.scale_factor(p.coords[0]);
        Ok(Mat4::from_diagonal(&Vec4::new(1.0, ia, ia, ia)))
    }
}

/// Flat de Sitter slicing, a(t) = e^{Ht}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeSitter {
    h: f64,
}

impl DeSitter {
    pub fn new(h: f64) -> Result<Self, GeometryError> {
        Ok(DeSitter { h: positive("H", h)? })
    }

    pub fn hubble(&self) -> f64 {
        self.h
    }
}

impl MetricField for DeSitter {
    fn id(&self) -> &str {
        "de_sitter"
    }
    fn parameters(&self) -> Vec<(String, f64)> {
        vec![("H".into(), self.h)]
    }
    fn chart_name(&self, _chart: ChartId) -> String {
        "comoving".into()
    }
    fn check_domain(&self, p: &SpacetimePoint) -> Result<(), GeometryError> {
        if p.chart != ChartId(0) {
            return Err(GeometryError::UnknownChart(p.chart));
        }
        check_finite("de_sitter", p)?;
        let t = p.coords[0];
        if (2.0 * self.h * t).abs() > 700.0 {
            return Err(out_of_domain("de_sitter", format!("t = {t} overflows the scale factor")));
        }
        Ok(())
    }
    fn components<S: Scalar>(&self, _chart: ChartId, x: &[S; 4]) -> [[S; 4]; 4] {
        let a2 = x[0].scale(2.0 * self.h).exp();
        let z = S::cst(0.0);
        let mut g = [[z; 4]; 4];
        g[0][0] = S::cst(1.0);
        for (i, row) in g.iter_mut().enumerate().skip(1) {
            row[i] = -a2;
        }
        g
    }
    fn christoffel_closed_form(&self, p: &SpacetimePoint) -> Option<Christoffel> {
        let t = p.coords[0];
        let aadot = self.h * (2.0 * self.h * t).exp();
        let mut g = [[[0.0; 4]; 4]; 4];
        for i in 1..4 {
            g[0][i][i] = aadot;
            g[i][0][i] = self.h;
            g[i][i][0] = self.h;
        }
        Some(g)
    }
    fn kretschmann_closed_form(&self, _p: &SpacetimePoint) -> Option<f64> {
        Some(24.0 * self.h.powi(4))
    }
    fn reference_tetrad(&self, p: &SpacetimePoint) -> Result<Mat4, GeometryError> {
        let ia = (-self.h * p.coords[0]).exp();
        Ok(Mat4::from_diagonal(&Vec4::new(1.0, ia, ia, ia)))
    }
}

/// Any catalog spacetime, addressable by string id.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Catalog {
    Minkowski(Minkowski),
    Schwarzschild(Schwarzschild),
    PowerLawFlrw(PowerLawFlrw),
    DeSitter(DeSitter),
}

macro_rules! dispatch {
    ($self:ident, $s:ident => $e:expr) => {
        match $self {
            Catalog::Minkowski($s) => $e,
            Catalog::Schwarzschild($s) => $e,
            Catalog::PowerLawFlrw($s) => $e,
            Catalog::DeSitter($s) => $e,
        }
    };
}

impl Catalog {
    pub const IDS: [&'static str; 5] = [
        "minkowski",
        "schwarzschild",
        "flrw_power",
        "einstein_de_sitter",
        "de_sitter",
    ];

    /// Build from an id and named parameters. Unknown parameter names are rejected.
    pub fn from_id(id: &str, params: &BTreeMap<String, f64>) -> Result<Catalog, GeometryError> {
        let allowed: &[&str] = match id {
            "minkowski" | "einstein_de_sitter" => &[],
            "schwarzschild" => &["M", "r_exit"],
            "flrw_power" => &["p"],
            "de_sitter" => &["H"],
            other => return Err(GeometryError::UnknownSpacetime(other.to_string())),
        };
        if let Some((k, v)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(GeometryError::InvalidParameter {
                name: k.clone(),
                value: *v,
                reason: format!("not a parameter of `{id}`"),
            });
        }
        let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
        Ok(match id {
            "minkowski" => Catalog::Minkowski(Minkowski),
            "schwarzschild" => {
                let s = Schwarzschild::new(get("M", 1.0))?;
                let r_exit = get("r_exit", s.exit_radius());
                Catalog::Schwarzschild(s.with_exit_radius(r_exit)?)
            }
            "flrw_power" => Catalog::PowerLawFlrw(PowerLawFlrw::new(get("p", 2.0 / 3.0))?),
            "einstein_de_sitter" => Catalog::PowerLawFlrw(PowerLawFlrw::einstein_de_sitter()),
            _ => Catalog::DeSitter(DeSitter::new(get("H", 1.0))?),
        })
    }
}

impl Catalog {
    /// Quasi-random (Halton) points in a fixed region of each catalog
    /// spacetime, used as default base points for sampled checks.
    pub fn probe_points(&self, n: usize) -> Vec<SpacetimePoint> {
        let lerp = |u: f64, a: f64, b: f64| a + u * (b - a);
        (1..=n)
            .map(|i| {
                let u = [2, 3, 5, 7].map(|b| radical_inverse(i, b));
                let c = match self {
                    Catalog::Minkowski(_) => u.map(|x| lerp(x, -5.0, 5.0)),
                    Catalog::Schwarzschild(s) => {
                        let m = s.mass();
                        [
                            lerp(u[0], -10.0 * m, 10.0 * m),
                            lerp(u[1], 2.5 * m, 20.0 * m),
                            lerp(u[2], 0.3, std::f64::consts::PI - 0.3),
                            lerp(u[3], -3.0, 3.0),
                        ]
                    }
                    Catalog::PowerLawFlrw(_) => [
                        lerp(u[0], 0.5, 3.0),
                        lerp(u[1], -5.0, 5.0),
                        lerp(u[2], -5.0, 5.0),
                        lerp(u[3], -5.0, 5.0),
                    ],
                    Catalog::DeSitter(_) => [
                        lerp(u[0], -1.0, 1.0),
                        lerp(u[1], -5.0, 5.0),
                        lerp(u[2], -5.0, 5.0),
                        lerp(u[3], -5.0, 5.0),
                    ],
                };
                SpacetimePoint::new(ChartId(0), c)
            })
            .collect()
    }
}

fn radical_inverse(i: usize, base: usize) -> f64 {
    let (mut f, mut r, mut n) = (1.0, 0.0, i);
    while n > 0 {
        f /= base as f64;
        r += f * (n % base) as f64;
        n /= base;
    }
    r
}

impl MetricField for Catalog {
    fn id(&self) -> &str {
        dispatch!(self, s => s.id())
    }
    fn parameters(&self) -> Vec<(String, f64)> {
        dispatch!(self, s => s.parameters())
    }
    fn chart_name(&self, chart: ChartId) -> String {
        dispatch!(self, s => s.chart_name(chart))
    }
    fn check_domain(&self, p: &SpacetimePoint) -> Result<(), GeometryError> {
        dispatch!(self, s => s.check_domain(p))
    }
    fn components<S: Scalar>(&self, chart: ChartId, x: &[S; 4]) -> [[S; 4]; 4] {
        dispatch!(self, s => s.components(chart, x))
    }
    fn christoffel_closed_form(&self, p: &SpacetimePoint) -> Option<Christoffel> {
        dispatch!(self, s => s.christoffel_closed_form(p))
    }
    fn kretschmann_closed_form(&self, p: &SpacetimePoint) -> Option<f64> {
        dispatch!(self, s => s.kretschmann_closed_form(p))
    }
    fn reference_tetrad(&self, p: &SpacetimePoint) -> Result<Mat4, GeometryError> {
        dispatch!(self, s => MetricField::reference_tetrad(s, p))
    }
    fn time_orientation(&self, p: &SpacetimePoint, v: &Vec4) -> f64 {
        dispatch!(self, s => MetricField::time_orientation(s, p, v))
    }
    fn terminal(&self, p: &SpacetimePoint) -> bool {
        dispatch!(self, s => MetricField::terminal(s, p))
    }
    fn chart_transition(&self, p: &SpacetimePoint) -> Option<(SpacetimePoint, Mat4)> {
        dispatch!(self, s => MetricField::chart_transition(s, p))
    }
    fn is_flat(&self) -> bool {
        dispatch!(self, s => MetricField::is_flat(s))
    }
}
