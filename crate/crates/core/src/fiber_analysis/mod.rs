//! Curvature functionals on the frame bundle and the generator 𝒢.
//!
//! A [`FiberFunctional`] is a named scalar function of a frame. The generator
//! 𝒢 = H₀ + (σ²/2) Σ V_j² is applied by finite differences along the flows:
//! central differences along [`geodesic_step`] for H₀, central second
//! differences along [`vertical_flow`] for V_j², each Richardson-extrapolated
//! once. The Green-function construction of U lives in [`green`], and the
//! hypothesis checkers in [`checks`].

mod checks;
mod green;

pub use checks::{
    check_lemma11, check_lemma7, check_theorem12, check_theorem8, exp_bound_fit, sample_frames, ConditionReport,
    CriterionReport, ExpBoundFit, FrameSample, SamplingEnvelope, Verdict, Witness,
};
pub use green::{
    compute_u, frame_ricci, gauss_legendre, green_h3, green_poisson_residual, green_potential, poisson_residual,
    GreenIntegral, PoissonResidual, QuadratureSpec,
};

use crate::frame_bundle::{geodesic_step, vertical_flow, Frame, FrameError};
use crate::geometry::{GeometryError, Spacetime, SpacetimePoint};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FiberError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("fiber integral diverges: shell mass grows like exp({rate:.3} ρ) up to ρ = {rho_cut}")]
    Divergent { rate: f64, rho_cut: f64 },
    #[error("fiber integral tail {tail:e} exceeds tolerance {tol:e}; raise rho_cut")]
    TailTooLarge { tail: f64, tol: f64 },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

type EvalFn = dyn Fn(&dyn Spacetime, &Frame) -> Result<f64, FiberError> + Send + Sync;

#[derive(Clone)]
enum Kind {
    RicTilde,
    TTilde,
    U(QuadratureSpec),
    RicTildePlusU(QuadratureSpec),
    TimeComponent,
    Constant(f64),
    Custom(Arc<EvalFn>),
}

/// A named scalar function on the frame bundle.
#[derive(Clone)]
pub struct FiberFunctional {
    name: String,
    kind: Kind,
}

impl fmt::Debug for FiberFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiberFunctional({})", self.name)
    }
}

impl FiberFunctional {
    pub const CATALOG: [&'static str; 6] = ["RIC_TILDE", "T_TILDE", "U", "RIC_TILDE_PLUS_U", "M_DOT_0", "ONE"];

    /// Ric(e₀, e₀).
    pub fn ric_tilde() -> Self {
        FiberFunctional { name: "RIC_TILDE".into(), kind: Kind::RicTilde }
    }

    /// T(e₀, e₀).
    pub fn t_tilde() -> Self {
        FiberFunctional { name: "T_TILDE".into(), kind: Kind::TTilde }
    }

    /// The fiber potential U of [`compute_u`].
    pub fn u(spec: QuadratureSpec) -> Self {
        FiberFunctional { name: "U".into(), kind: Kind::U(spec) }
    }

    pub fn ric_tilde_plus_u(spec: QuadratureSpec) -> Self {
        FiberFunctional { name: "RIC_TILDE_PLUS_U".into(), kind: Kind::RicTildePlusU(spec) }
    }

    /// ṁ⁰: the first chart component of e₀.
    pub fn time_component() -> Self {
        FiberFunctional { name: "M_DOT_0".into(), kind: Kind::TimeComponent }
    }

    pub fn constant(c: f64) -> Self {
        FiberFunctional { name: format!("CONST({c})"), kind: Kind::Constant(c) }
    }

    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(&dyn Spacetime, &Frame) -> Result<f64, FiberError> + Send + Sync + 'static,
    ) -> Self {
        FiberFunctional { name: name.into(), kind: Kind::Custom(Arc::new(f)) }
    }

    /// Look up a catalog entry by name.
    pub fn from_name(name: &str, spec: QuadratureSpec) -> Result<Self, FiberError> {
        Ok(match name {
            "RIC_TILDE" => Self::ric_tilde(),
            "T_TILDE" => Self::t_tilde(),
            "U" => Self::u(spec),
            "RIC_TILDE_PLUS_U" => Self::ric_tilde_plus_u(spec),
            "M_DOT_0" => Self::time_component(),
            "ONE" => Self::constant(1.0),
            other => {
                return Err(FiberError::Invalid(format!(
                    "unknown functional `{other}` (expected one of {:?})",
                    Self::CATALOG
                )))
            }
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, st: &dyn Spacetime, f: &Frame) -> Result<f64, FiberError> {
        match &self.kind {
            Kind::RicTilde => ric_tilde(st, f),
            Kind::TTilde => t_tilde(st, f),
            Kind::U(spec) => compute_u(st, f, spec).map(|u| u.value),
            Kind::RicTildePlusU(spec) => Ok(ric_tilde(st, f)? + compute_u(st, f, spec)?.value),
            Kind::TimeComponent => Ok(f.e[(0, 0)]),
            Kind::Constant(c) => Ok(*c),
            Kind::Custom(g) => g(st, f),
        }
    }
}

/// R̃IC = Ric(e₀, e₀) at the base point.
pub fn ric_tilde(st: &dyn Spacetime, f: &Frame) -> Result<f64, FiberError> {
    Ok(st.curvature(&f.point)?.ricci_on(&f.e0()))
}

/// T̃ = T(e₀, e₀) with T = Ric − ½Rg.
pub fn t_tilde(st: &dyn Spacetime, f: &Frame) -> Result<f64, FiberError> {
    Ok(st.curvature(&f.point)?.energy_momentum_on(&f.e0()))
}

/// Finite-difference steps for the generator probes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorSteps {
    pub horizontal: f64,
    pub vertical: f64,
    pub richardson: bool,
}

impl Default for GeneratorSteps {
    fn default() -> Self {
        GeneratorSteps { horizontal: 1e-3, vertical: 1e-2, richardson: true }
    }
}

impl GeneratorSteps {
    fn validate(&self) -> Result<(), FiberError> {
        for (name, h) in [("horizontal", self.horizontal), ("vertical", self.vertical)] {
            if !(h > 0.0 && h.is_finite()) {
                return Err(FiberError::Invalid(format!("{name} step must be positive, got {h}")));
            }
        }
        Ok(())
    }
}

/// The pieces of 𝒢F at one frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorTerms {
    pub value: f64,
    pub h0: f64,
    /// V_j² F for j = 1, 2, 3.
    pub vertical: [f64; 3],
    pub sigma: f64,
}

impl GeneratorTerms {
    /// Σ_j V_j² F.
    pub fn fiber_laplacian(&self) -> f64 {
        self.vertical.iter().sum()
    }

    /// H₀F + (σ²/2) Σ_j V_j² F.
    pub fn total(&self) -> f64 {
        self.h0 + 0.5 * self.sigma * self.sigma * self.fiber_laplacian()
    }
}

fn richardson(d: impl Fn(f64) -> Result<f64, FiberError>, h: f64, on: bool) -> Result<f64, FiberError> {
    let coarse = d(h)?;
    if !on {
        return Ok(coarse);
    }
    let fine = d(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// H₀F by central differences along the geodesic flow.
pub fn horizontal_derivative(
    st: &dyn Spacetime,
    func: &FiberFunctional,
    f: &Frame,
    steps: &GeneratorSteps,
) -> Result<f64, FiberError> {
    steps.validate()?;
    let d = |h: f64| -> Result<f64, FiberError> {
        let fwd = func.eval(st, &geodesic_step(st, f, h)?)?;
        let bwd = func.eval(st, &geodesic_step(st, f, -h)?)?;
        Ok((fwd - bwd) / (2.0 * h))
    };
    richardson(d, steps.horizontal, steps.richardson)
}

/// V_j²F by central second differences along the boost flow, j ∈ {0, 1, 2}.
pub fn vertical_second_derivative(
    st: &dyn Spacetime,
    func: &FiberFunctional,
    f: &Frame,
    j: usize,
    steps: &GeneratorSteps,
) -> Result<f64, FiberError> {
    let center = func.eval(st, f)?;
    vertical_second_difference(st, func, f, j, steps, center)
}

fn vertical_second_difference(
    st: &dyn Spacetime,
    func: &FiberFunctional,
    f: &Frame,
    j: usize,
    steps: &GeneratorSteps,
    center: f64,
) -> Result<f64, FiberError> {
    if j > 2 {
        return Err(FiberError::Invalid(format!("vertical direction index {j} out of range")));
    }
    steps.validate()?;
    let d = |h: f64| -> Result<f64, FiberError> {
        let mut b = [0.0; 3];
        b[j] = h;
        let fwd = func.eval(st, &vertical_flow(f, b))?;
        b[j] = -h;
        let bwd = func.eval(st, &vertical_flow(f, b))?;
        Ok((fwd - 2.0 * center + bwd) / (h * h))
    };
    richardson(d, steps.vertical, steps.richardson)
}

/// All terms of 𝒢F at `f`.
pub fn generator_terms(
    st: &dyn Spacetime,
    func: &FiberFunctional,
    f: &Frame,
    sigma: f64,
    steps: &GeneratorSteps,
) -> Result<GeneratorTerms, FiberError> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(FiberError::Invalid(format!("sigma must be finite and non-negative, got {sigma}")));
    }
    let value = func.eval(st, f)?;
    let h0 = horizontal_derivative(st, func, f, steps)?;
    let mut vertical = [0.0; 3];
    for (j, v) in vertical.iter_mut().enumerate() {
        *v = vertical_second_difference(st, func, f, j, steps, value)?;
    }
    Ok(GeneratorTerms { value, h0, vertical, sigma })
}

/// 𝒢F at `f` with the default probe steps.
pub fn apply_generator(st: &dyn Spacetime, func: &FiberFunctional, f: &Frame, sigma: f64) -> Result<f64, FiberError> {
    apply_generator_with(st, func, f, sigma, &GeneratorSteps::default())
}

pub fn apply_generator_with(
    st: &dyn Spacetime,
    func: &FiberFunctional,
    f: &Frame,
    sigma: f64,
    steps: &GeneratorSteps,
) -> Result<f64, FiberError> {
    Ok(generator_terms(st, func, f, sigma, steps)?.total())
}

/// H₀R̃IC through the covariant derivative, u^a u^b u^c ∇_a R_bc, with
/// ∂Ric from fourth-order coordinate differences of the analytic Ricci
/// tensor. Independent of the flow-based probes.
pub fn ricci_derivative_along(st: &dyn Spacetime, f: &Frame) -> Result<f64, FiberError> {
    let p = f.point;
    let u = f.e0();
    let data = st.curvature(&p)?;
    let gam = data.gamma;
    let ric = data.ricci;
    // ∂_a R_bc u^a as a matrix
    let mut dric = crate::geometry::Mat4::zeros();
    for a in 0..4 {
        if u[a] == 0.0 {
            continue;
        }
        let h = 1e-3 * (1.0 + p.coords[a].abs());
        let at = |k: f64| -> Result<crate::geometry::Mat4, FiberError> {
            let mut c = p.coords;
            c[a] += k * h;
            Ok(st.curvature(&SpacetimePoint::new(p.chart, c))?.ricci)
        };
        let d = (at(-2.0)? - at(2.0)? + (at(1.0)? - at(-1.0)?) * 8.0) / (12.0 * h);
        dric += d * u[a];
    }
    let mut out = (u.transpose() * dric * u)[0];
    // − 2 Γ^d_ab u^a u^b R_dc u^c
    let ric_u = ric * u;
    for d in 0..4 {
        let mut acc = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                acc += gam[d][a][b] * u[a] * u[b];
            }
        }
        out -= 2.0 * acc * ric_u[d];
    }
    Ok(out)
}

/// Both sides of 𝒢R̃IC = H₀R̃IC + 2σ²R̃IC + 2σ²T̃ at one frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma9Residual {
    pub sigma: f64,
    /// 𝒢R̃IC from the flow probes.
    pub generator: f64,
    /// H₀R̃IC from the covariant derivative.
    pub h0_ric: f64,
    pub ric: f64,
    pub t: f64,
    pub residual: f64,
    /// residual / max(|R̃IC|, 1e−6)
    pub relative: f64,
}

pub fn lemma9_residual(st: &dyn Spacetime, f: &Frame, sigma: f64) -> Result<Lemma9Residual, FiberError> {
    let generator = apply_generator(st, &FiberFunctional::ric_tilde(), f, sigma)?;
    let h0_ric = ricci_derivative_along(st, f)?;
    let ric = ric_tilde(st, f)?;
    let t = t_tilde(st, f)?;
    let s2 = sigma * sigma;
    let residual = (generator - (h0_ric + 2.0 * s2 * ric + 2.0 * s2 * t)).abs();
    Ok(Lemma9Residual { sigma, generator, h0_ric, ric, t, residual, relative: residual / ric.abs().max(1e-6) })
}

/// Both sides of Σ V_j² R̃IC = 4R̃IC + 4T̃ at one frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerticalIdentityResidual {
    pub vertical: f64,
    pub ric: f64,
    pub t: f64,
    pub residual: f64,
    pub relative: f64,
}

pub fn vertical_identity_residual(st: &dyn Spacetime, f: &Frame) -> Result<VerticalIdentityResidual, FiberError> {
    let func = FiberFunctional::ric_tilde();
    let ric = func.eval(st, f)?;
    let steps = GeneratorSteps::default();
    let mut vertical = 0.0;
    for j in 0..3 {
        vertical += vertical_second_difference(st, &func, f, j, &steps, ric)?;
    }
    let t = t_tilde(st, f)?;
    let residual = (vertical - 4.0 * (ric + t)).abs();
    Ok(VerticalIdentityResidual { vertical, ric, t, residual, relative: residual / ric.abs().max(1e-6) })
}
