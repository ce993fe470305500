//! Sampled hypothesis checkers.
//!
//! Every "for all frames" clause is evaluated on a finite sample of frames
//! with bounded rapidity; reports carry the sampling envelope. A violated
//! condition always names at least one witness frame at which re-evaluation
//! reproduces the failure.

use super::{
    compute_u, horizontal_derivative, ric_tilde, t_tilde, FiberError, FiberFunctional, GeneratorSteps,
    GeneratorTerms, QuadratureSpec,
};
use crate::frame_bundle::{boost_along, fiber_rotation, vertical_flow, Frame, FrameRecord};
use crate::geometry::{Spacetime, SpacetimePoint};
use nalgebra::{UnitQuaternion, Quaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// Pointwise inequalities tolerate this much relative slack, the noise
/// floor of the finite-difference probes.
const PROBE_TOL: f64 = 1e-7;
const MAX_WITNESSES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub frame: FrameRecord,
    pub values: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub name: String,
    pub statement: String,
    pub verdict: Verdict,
    /// Smallest lhs − rhs over the samples (negative when violated).
    pub margin: Option<f64>,
    pub detail: String,
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingEnvelope {
    pub n_frames: usize,
    pub n_points: usize,
    pub rapidity_max: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: String,
    pub spacetime: String,
    pub verdict: Verdict,
    pub constants: BTreeMap<String, f64>,
    pub conditions: Vec<ConditionReport>,
    pub sampling: SamplingEnvelope,
    pub witnesses: Vec<Witness>,
}

impl CriterionReport {
    fn assemble(
        criterion: &str,
        st: &dyn Spacetime,
        constants: BTreeMap<String, f64>,
        conditions: Vec<ConditionReport>,
        sampling: SamplingEnvelope,
    ) -> Self {
        let verdict = if conditions.iter().any(|c| c.verdict == Verdict::Violated) {
            Verdict::Violated
        } else if conditions.iter().any(|c| c.verdict == Verdict::Inconclusive) {
            Verdict::Inconclusive
        } else {
            Verdict::Satisfied
        };
        let witnesses = conditions
            .iter()
            .filter(|c| c.verdict == Verdict::Violated)
            .flat_map(|c| c.witnesses.iter().take(1).cloned())
            .collect();
        let constants = constants.into_iter().filter(|(_, v)| v.is_finite()).collect();
        CriterionReport { criterion: criterion.into(), spacetime: st.id().into(), verdict, constants, conditions, sampling, witnesses }
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionReport> {
        self.conditions.iter().find(|c| c.name == name)
    }

    /// Names of the violated conditions.
    pub fn failing(&self) -> Vec<&str> {
        self.conditions.iter().filter(|c| c.verdict == Verdict::Violated).map(|c| c.name.as_str()).collect()
    }
}

/// Sample frames plus the envelope they cover.
#[derive(Clone, Debug)]
pub struct FrameSample {
    pub frames: Vec<Frame>,
    pub envelope: SamplingEnvelope,
}

/// At each point: the reference tetrad, then `per_point − 1` frames boosted
/// by a uniform rapidity in [0, rapidity_max] in a uniform direction and
/// spatially rotated by a uniform rotation.
pub fn sample_frames(
    st: &dyn Spacetime,
    points: &[SpacetimePoint],
    per_point: usize,
    rapidity_max: f64,
    seed: u64,
) -> Result<FrameSample, FiberError> {
    if points.is_empty() || per_point == 0 {
        return Err(FiberError::Invalid("frame sample needs at least one point and one frame per point".into()));
    }
    if !(rapidity_max >= 0.0 && rapidity_max.is_finite()) {
        return Err(FiberError::Invalid(format!("rapidity_max must be finite and non-negative, got {rapidity_max}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frames = Vec::with_capacity(points.len() * per_point);
    for p in points {
        let base = Frame::reference(st, *p)?;
        frames.push(base);
        for _ in 1..per_point {
            let rho = rapidity_max * rng.random::<f64>();
            let n = unit_vector(&mut rng);
            let q = random_rotation(&mut rng);
            let f = Frame::new(base.point, base.e * boost_along(rho, &n));
            frames.push(fiber_rotation(&f, &q));
        }
    }
    let envelope = SamplingEnvelope { n_frames: frames.len(), n_points: points.len(), rapidity_max, seed };
    Ok(FrameSample { frames, envelope })
}

fn unit_vector(rng: &mut impl Rng) -> Vector3<f64> {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    Vector3::new(s * phi.cos(), s * phi.sin(), z)
}

/// Uniform rotation from a uniform unit quaternion.
fn random_rotation(rng: &mut impl Rng) -> nalgebra::Matrix3<f64> {
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let q = Quaternion::new(a * (TAU * u2).sin(), a * (TAU * u2).cos(), b * (TAU * u3).sin(), b * (TAU * u3).cos());
    UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner()
}

fn witness(st: &dyn Spacetime, f: &Frame, values: &[(&str, f64)]) -> Witness {
    Witness {
        frame: f.to_record(st),
        values: values.iter().filter(|(_, v)| v.is_finite()).map(|(k, v)| (k.to_string(), *v)).collect(),
    }
}

fn condition(name: &str, statement: &str, verdict: Verdict, margin: Option<f64>, detail: String, witnesses: Vec<Witness>) -> ConditionReport {
    ConditionReport { name: name.into(), statement: statement.into(), verdict, margin: margin.filter(|m| m.is_finite()), detail, witnesses }
}

/// One sampled evaluation of lhs ≥ rhs.
struct Probe {
    lhs: f64,
    rhs: f64,
    values: Vec<(&'static str, f64)>,
}

/// lhs(f) ≥ rhs(f) on every sample, up to the probe tolerance.
fn pointwise(
    name: &str,
    statement: &str,
    st: &dyn Spacetime,
    frames: &[Frame],
    mut probe: impl FnMut(&Frame) -> Result<Probe, FiberError>,
) -> ConditionReport {
    let mut margin = f64::INFINITY;
    let mut bad: Vec<(f64, Witness)> = Vec::new();
    let mut failures = 0usize;
    let mut first_error = None;
    for f in frames {
        match probe(f) {
            Ok(p) => {
                let m = p.lhs - p.rhs;
                margin = margin.min(m);
                if m < -PROBE_TOL * (1.0 + p.lhs.abs() + p.rhs.abs()) {
                    let mut vals = p.values.clone();
                    vals.extend([("lhs", p.lhs), ("rhs", p.rhs)]);
                    bad.push((m, witness(st, f, &vals)));
                }
            }
            Err(e) => {
                failures += 1;
                first_error.get_or_insert(e.to_string());
            }
        }
    }
    let evaluated = frames.len() - failures;
    bad.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n_bad = bad.len();
    let witnesses: Vec<Witness> = bad.into_iter().take(MAX_WITNESSES).map(|(_, w)| w).collect();
    let (verdict, detail) = if n_bad > 0 {
        (Verdict::Violated, format!("fails at {n_bad} of {evaluated} evaluated frames"))
    } else if evaluated == 0 {
        (Verdict::Inconclusive, format!("no frame could be evaluated: {}", first_error.unwrap_or_default()))
    } else if failures > 0 {
        (
            Verdict::Inconclusive,
            format!("holds on {evaluated} frames; {failures} evaluations failed: {}", first_error.unwrap_or_default()),
        )
    } else {
        (Verdict::Satisfied, format!("holds on all {evaluated} frames"))
    };
    condition(name, statement, verdict, Some(margin), detail, witnesses)
}

fn values_of(st: &dyn Spacetime, func: &FiberFunctional, frames: &[Frame]) -> Vec<Option<f64>> {
    frames.iter().map(|f| func.eval(st, f).ok()).collect()
}

fn sampled_sup(name: &str, st: &dyn Spacetime, frames: &[Frame], vals: &[Option<f64>]) -> (ConditionReport, f64) {
    let mut sup = f64::NEG_INFINITY;
    let mut arg = None;
    for (f, v) in frames.iter().zip(vals) {
        if let Some(v) = v {
            if *v > sup {
                sup = *v;
                arg = Some(f);
            }
        }
    }
    let c = match arg {
        Some(f) => condition(
            name,
            "bounded above (sampled supremum)",
            Verdict::Satisfied,
            None,
            format!("sampled supremum {sup:.6e}; boundedness beyond the sampled envelope is not established"),
            vec![witness(st, f, &[("sup", sup)])],
        ),
        None => condition(name, "bounded above (sampled supremum)", Verdict::Inconclusive, None, "no evaluations".into(), vec![]),
    };
    (c, sup)
}

/// Largest k with g ≥ k·F on all samples, and the smallest k allowed by
/// samples where F < 0: g ≥ kF means k ≤ g/F for F > 0 and k ≥ g/F for F < 0.
fn admissible_range(pairs: &[(f64, f64)]) -> (f64, f64) {
    let scale = pairs.iter().fold(0.0f64, |m, (_, f)| m.max(f.abs()));
    let tiny = 1e-12 * scale.max(1e-300);
    let mut hi = f64::INFINITY;
    let mut lo = f64::NEG_INFINITY;
    for &(g, f) in pairs {
        if f > tiny {
            hi = hi.min(g / f);
        } else if f < -tiny {
            lo = lo.max(g / f);
        }
    }
    (lo, hi)
}

fn generator_of(
    st: &dyn Spacetime,
    func: &FiberFunctional,
    f: &Frame,
    sigma: f64,
) -> Result<GeneratorTerms, FiberError> {
    super::generator_terms(st, func, f, sigma, &GeneratorSteps::default())
}

fn first_frame_witness(st: &dyn Spacetime, frames: &[Frame], values: &[(&str, f64)]) -> Vec<Witness> {
    frames.first().map(|f| witness(st, f, values)).into_iter().collect()
}

/// Hypotheses of the positive-explosion-probability lemma: F(Φ₀) > 0, F
/// bounded above, and 𝒢F ≥ C·F.
pub fn check_lemma7(
    st: &dyn Spacetime,
    func: &FiberFunctional,
    f0: &Frame,
    sigma: f64,
    c_const: f64,
    sample: &FrameSample,
) -> CriterionReport {
    let frames = &sample.frames;
    let mut conditions = Vec::new();
    let mut constants = BTreeMap::from([("C".to_string(), c_const), ("sigma".to_string(), sigma)]);

    if !(c_const > 0.0) {
        conditions.push(condition(
            "C_positive",
            "C > 0",
            Verdict::Violated,
            Some(c_const),
            format!("C = {c_const}"),
            vec![witness(st, f0, &[("C", c_const)])],
        ));
    }
    match func.eval(st, f0) {
        Ok(v) => {
            constants.insert("F_at_start".into(), v);
            let verdict = if v > 0.0 { Verdict::Satisfied } else { Verdict::Inconclusive };
            let detail = if v > 0.0 {
                format!("F(Φ₀) = {v:.6e}")
            } else {
                format!("precondition F(Φ₀) > 0 fails (F(Φ₀) = {v:.6e}); the lemma does not apply")
            };
            conditions.push(condition("start_positive", "F(Φ₀) > 0", verdict, Some(v), detail, vec![witness(st, f0, &[("F", v)])]));
        }
        Err(e) => conditions.push(condition("start_positive", "F(Φ₀) > 0", Verdict::Inconclusive, None, e.to_string(), vec![])),
    }

    let vals = values_of(st, func, frames);
    let (bounded, sup) = sampled_sup("bounded_above", st, frames, &vals);
    constants.insert("F_sup".into(), sup);
    conditions.push(bounded);

    let mut pairs = Vec::new();
    conditions.push(pointwise("generator_lower_bound", "𝒢F ≥ C·F", st, frames, |f| {
        let g = generator_of(st, func, f, sigma)?;
        pairs.push((g.total(), g.value));
        Ok(Probe { lhs: g.total(), rhs: c_const * g.value, values: vec![("F", g.value), ("GF", g.total())] })
    }));
    let (lo, hi) = admissible_range(&pairs);
    constants.insert("C_max_on_samples".into(), hi);
    constants.insert("C_min_on_samples".into(), lo);

    CriterionReport::assemble("lemma7", st, constants, conditions, sample.envelope.clone())
}

/// Hypotheses of the two-functional comparison lemma: 0 ≤ c′ < c, F ≤ H,
/// 𝒢F ≥ cF, 𝒢H ≤ c′H, with F and H non-negative and not identically zero.
pub fn check_lemma11(
    st: &dyn Spacetime,
    f_func: &FiberFunctional,
    h_func: &FiberFunctional,
    c: f64,
    c_prime: f64,
    sigma: f64,
    sample: &FrameSample,
) -> CriterionReport {
    let frames = &sample.frames;
    let constants = BTreeMap::from([("c".to_string(), c), ("c_prime".to_string(), c_prime), ("sigma".to_string(), sigma)]);
    let mut conditions = Vec::new();

    let ok = 0.0 <= c_prime && c_prime < c;
    conditions.push(condition(
        "constants",
        "0 ≤ c′ < c",
        if ok { Verdict::Satisfied } else { Verdict::Violated },
        Some(c - c_prime),
        format!("c = {c}, c′ = {c_prime}"),
        if ok { vec![] } else { first_frame_witness(st, frames, &[("c", c), ("c_prime", c_prime)]) },
    ));

    let fv = values_of(st, f_func, frames);
    let hv = values_of(st, h_func, frames);
    let scale = fv.iter().chain(&hv).flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let null_tol = 1e-12 * (1.0 + scale);
    let f_nonnull = fv.iter().flatten().any(|v| v.abs() > null_tol);
    let h_nonnull = hv.iter().flatten().any(|v| v.abs() > null_tol);
    conditions.push(condition(
        "non_null",
        "F and H not identically zero",
        if f_nonnull && h_nonnull { Verdict::Satisfied } else { Verdict::Inconclusive },
        None,
        if f_nonnull && h_nonnull {
            "both functionals are nonzero somewhere on the samples".into()
        } else {
            "a functional vanishes on every sample; the lemma requires non-null functionals".into()
        },
        vec![],
    ));

    conditions.push(pointwise("F_non_negative", "F ≥ 0", st, frames, |f| {
        let v = f_func.eval(st, f)?;
        Ok(Probe { lhs: v, rhs: 0.0, values: vec![("F", v)] })
    }));
    conditions.push(pointwise("F_below_H", "F ≤ H", st, frames, |f| {
        let (a, b) = (f_func.eval(st, f)?, h_func.eval(st, f)?);
        Ok(Probe { lhs: b, rhs: a, values: vec![("F", a), ("H", b)] })
    }));
    conditions.push(pointwise("F_growth", "𝒢F ≥ c·F", st, frames, |f| {
        let g = generator_of(st, f_func, f, sigma)?;
        Ok(Probe { lhs: g.total(), rhs: c * g.value, values: vec![("F", g.value), ("GF", g.total())] })
    }));
    conditions.push(pointwise("H_growth", "𝒢H ≤ c′·H", st, frames, |f| {
        let g = generator_of(st, h_func, f, sigma)?;
        Ok(Probe { lhs: c_prime * g.value, rhs: g.total(), values: vec![("H", g.value), ("GH", g.total())] })
    }));

    // F = H with F > 0 somewhere cannot satisfy both growth bounds when c′ < c
    let coincide = fv.iter().zip(&hv).all(|(a, b)| match (a, b) {
        (Some(a), Some(b)) => (a - b).abs() <= null_tol,
        _ => false,
    });
    if coincide && ok {
        if let Some((i, v)) = fv.iter().enumerate().filter_map(|(i, v)| v.map(|v| (i, v))).find(|(_, v)| *v > null_tol) {
            conditions.push(condition(
                "clash",
                "𝒢F ≥ cF and 𝒢H ≤ c′H with c′ < c are incompatible where F = H > 0",
                Verdict::Violated,
                Some(c_prime - c),
                "F and H coincide on every sample".into(),
                vec![witness(st, &frames[i], &[("F", v), ("H", v), ("c", c), ("c_prime", c_prime)])],
            ));
        }
    }

    CriterionReport::assemble("lemma11", st, constants, conditions, sample.envelope.clone())
}

/// Conditions of the first explosion theorem: (1) T̃ ≥ 0; (2) R̃IC positive
/// somewhere, bounded above and non-constant; (3) H₀R̃IC ≥ c·R̃IC with
/// c = C − 2σ². Both readings of the constants are reported: `c` derived
/// from the given C, and the largest C the samples admit.
pub fn check_theorem8(st: &dyn Spacetime, sigma: f64, c_const: f64, sample: &FrameSample) -> CriterionReport {
    let frames = &sample.frames;
    let c = c_const - 2.0 * sigma * sigma;
    let mut constants = BTreeMap::from([
        ("C".to_string(), c_const),
        ("sigma".to_string(), sigma),
        ("c".to_string(), c),
    ]);
    let mut conditions = Vec::new();

    conditions.push(pointwise("1_energy", "T̃ ≥ 0", st, frames, |f| {
        let t = t_tilde(st, f)?;
        Ok(Probe { lhs: t, rhs: 0.0, values: vec![("T_tilde", t)] })
    }));

    let ric = values_of(st, &FiberFunctional::ric_tilde(), frames);
    let scale = ric.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let pos_tol = 1e-9 * (1.0 + scale);
    let (mut max, mut arg_max) = (f64::NEG_INFINITY, None);
    for (i, v) in ric.iter().enumerate() {
        if let Some(v) = v {
            if *v > max {
                max = *v;
                arg_max = Some(i);
            }
        }
    }
    match arg_max {
        Some(i) => {
            let positive = max > pos_tol;
            conditions.push(condition(
                "2_positive_somewhere",
                "R̃IC > 0 somewhere",
                if positive { Verdict::Satisfied } else { Verdict::Violated },
                Some(max),
                format!("largest sampled R̃IC = {max:.6e}"),
                vec![witness(st, &frames[i], &[("ric_tilde", max)])],
            ));
        }
        None => conditions.push(condition("2_positive_somewhere", "R̃IC > 0 somewhere", Verdict::Inconclusive, None, "no evaluations".into(), vec![])),
    }
    let (bounded, sup) = sampled_sup("2_bounded_above", st, frames, &ric);
    constants.insert("ric_tilde_sup".into(), sup);
    conditions.push(bounded);

    let vals: Vec<(usize, f64)> = ric.iter().enumerate().filter_map(|(i, v)| v.map(|v| (i, v))).collect();
    if vals.len() >= 2 {
        let n = vals.len() as f64;
        let mean = vals.iter().map(|v| v.1).sum::<f64>() / n;
        let var = vals.iter().map(|v| (v.1 - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let spread = var.sqrt();
        let nonconst = spread > 1e-9 * (1.0 + mean.abs());
        let (lo, hi) = vals.iter().fold((vals[0], vals[0]), |(lo, hi), v| {
            (if v.1 < lo.1 { *v } else { lo }, if v.1 > hi.1 { *v } else { hi })
        });
        conditions.push(condition(
            "2_non_constant",
            "R̃IC not constant",
            if nonconst { Verdict::Satisfied } else { Verdict::Violated },
            Some(spread),
            format!("sampled standard deviation {spread:.3e} around mean {mean:.6e}"),
            if nonconst {
                vec![]
            } else {
                vec![witness(st, &frames[lo.0], &[("ric_tilde", lo.1)]), witness(st, &frames[hi.0], &[("ric_tilde", hi.1)])]
            },
        ));
    } else {
        conditions.push(condition("2_non_constant", "R̃IC not constant", Verdict::Inconclusive, None, "fewer than two evaluations".into(), vec![]));
    }

    let mut pairs = Vec::new();
    let steps = GeneratorSteps::default();
    conditions.push(pointwise("3_dynamics", "H₀R̃IC ≥ (C − 2σ²)·R̃IC", st, frames, |f| {
        let r = ric_tilde(st, f)?;
        let d = horizontal_derivative(st, &FiberFunctional::ric_tilde(), f, &steps)?;
        pairs.push((d, r));
        Ok(Probe { lhs: d, rhs: c * r, values: vec![("ric_tilde", r), ("H0_ric_tilde", d)] })
    }));
    let (lo, hi) = admissible_range(&pairs);
    constants.insert("c_max_on_samples".into(), hi);
    constants.insert("c_min_on_samples".into(), lo);
    constants.insert("C_max_on_samples".into(), hi + 2.0 * sigma * sigma);

    CriterionReport::assemble("theorem8", st, constants, conditions, sample.envelope.clone())
}

/// Quadratic fit of ln|F| against rapidity along boosted frames.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpBoundFit {
    pub intercept: f64,
    pub linear: f64,
    /// Coefficient of ρ²; exp-bounded functions have no positive ρ² growth.
    pub quadratic: f64,
    pub n_points: usize,
}

/// Fit ln|F(Φ·exp(ρ E_n))| = a + bρ + qρ² over ρ in `rapidities`, averaging
/// the three coordinate boost directions. `None` when F vanishes.
pub fn exp_bound_fit(
    st: &dyn Spacetime,
    func: &FiberFunctional,
    f: &Frame,
    rapidities: &[f64],
) -> Result<Option<ExpBoundFit>, FiberError> {
    let mut pts = Vec::new();
    for &r in rapidities {
        let mut acc = 0.0;
        for j in 0..3 {
            let mut b = [0.0; 3];
            b[j] = r;
            acc += func.eval(st, &vertical_flow(f, b))?.abs();
        }
        if acc > 0.0 {
            pts.push((r, (acc / 3.0).ln()));
        }
    }
    if pts.len() < 3 {
        return Ok(None);
    }
    // normal equations for 1, ρ, ρ²
    let mut m = nalgebra::Matrix3::<f64>::zeros();
    let mut rhs = nalgebra::Vector3::<f64>::zeros();
    for (x, y) in &pts {
        let v = nalgebra::Vector3::new(1.0, *x, x * x);
        m += v * v.transpose();
        rhs += v * *y;
    }
    let sol = m.lu().solve(&rhs).ok_or_else(|| FiberError::Invalid("degenerate rapidity grid".into()))?;
    Ok(Some(ExpBoundFit { intercept: sol[0], linear: sol[1], quadratic: sol[2], n_points: pts.len() }))
}

/// Conditions of the second explosion theorem, with the σ-window
/// √(c/2) < σ < √(c′/(2α)) checked for feasibility first.
pub fn check_theorem12(
    st: &dyn Spacetime,
    sigma: f64,
    alpha: f64,
    c: f64,
    c_prime: f64,
    sample: &FrameSample,
    quad: &QuadratureSpec,
) -> CriterionReport {
    let frames = &sample.frames;
    let low = (c / 2.0).sqrt();
    let high = (c_prime / (2.0 * alpha)).sqrt();
    let mut constants = BTreeMap::from([
        ("sigma".to_string(), sigma),
        ("alpha".to_string(), alpha),
        ("c".to_string(), c),
        ("c_prime".to_string(), c_prime),
        ("sigma_window_low".to_string(), low),
        ("sigma_window_high".to_string(), high),
    ]);
    let mut conditions = Vec::new();
    let s2 = sigma * sigma;

    let params_ok = 0.0 < alpha && alpha < 1.0 && 0.0 <= c_prime && c_prime < c;
    conditions.push(condition(
        "constants",
        "0 < α < 1 and 0 ≤ c′ < c",
        if params_ok { Verdict::Satisfied } else { Verdict::Violated },
        None,
        format!("α = {alpha}, c = {c}, c′ = {c_prime}"),
        if params_ok { vec![] } else { first_frame_witness(st, frames, &[("alpha", alpha), ("c", c), ("c_prime", c_prime)]) },
    ));
    let feasible = low < high;
    let inside = low < sigma && sigma < high;
    constants.insert("sigma_window_feasible".into(), if feasible { 1.0 } else { 0.0 });
    conditions.push(condition(
        "sigma_window",
        "√(c/2) < σ < √(c′/(2α))",
        if feasible && inside { Verdict::Satisfied } else { Verdict::Violated },
        Some((sigma - low).min(high - sigma)),
        if !feasible {
            format!("window ({low:.6}, {high:.6}) is empty: needs c′ > αc")
        } else {
            format!("window ({low:.6}, {high:.6}); σ = {sigma} {}", if inside { "inside" } else { "outside" })
        },
        if feasible && inside { vec![] } else { first_frame_witness(st, frames, &[("sigma", sigma), ("low", low), ("high", high)]) },
    ));

    // (1′)
    conditions.push(pointwise("1_ric_non_negative", "R̃IC ≥ 0", st, frames, |f| {
        let r = ric_tilde(st, f)?;
        Ok(Probe { lhs: r, rhs: 0.0, values: vec![("ric_tilde", r)] })
    }));
    let ric = values_of(st, &FiberFunctional::ric_tilde(), frames);
    let scale = ric.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let nonnull = ric.iter().flatten().any(|v| v.abs() > 1e-9 * (1.0 + scale));
    conditions.push(condition(
        "1_non_null",
        "R̃IC not identically zero",
        if nonnull { Verdict::Satisfied } else { Verdict::Violated },
        Some(scale),
        format!("largest sampled |R̃IC| = {scale:.3e}"),
        if nonnull { vec![] } else { first_frame_witness(st, frames, &[("ric_tilde_max_abs", scale)]) },
    ));
    conditions.push(pointwise("1_scalar_non_positive", "R ≤ 0", st, frames, |f| {
        let r = st.curvature(&f.point)?.scalar;
        Ok(Probe { lhs: 0.0, rhs: r, values: vec![("scalar", r)] })
    }));

    // (2′) exp-boundedness: no ρ² growth in ln|R̃IC| along boosts
    let grid: Vec<f64> = (0..=12).map(|k| 2.0 + 0.5 * k as f64).collect();
    let mut worst: Option<(f64, usize)> = None;
    let mut fit_errors = 0;
    for (i, f) in frames.iter().enumerate().step_by((frames.len() / 8).max(1)) {
        match exp_bound_fit(st, &FiberFunctional::ric_tilde(), f, &grid) {
            Ok(Some(fit)) => {
                if worst.is_none_or(|(q, _)| fit.quadratic > q) {
                    worst = Some((fit.quadratic, i));
                }
            }
            Ok(None) => {}
            Err(_) => fit_errors += 1,
        }
    }
    let q_tol = 1e-2;
    conditions.push(match worst {
        Some((q, i)) => {
            constants.insert("exp_fit_quadratic_max".into(), q);
            let ok = q <= q_tol;
            condition(
                "2_exp_bounded",
                "R̃IC exp-bounded on each fiber",
                if ok { Verdict::Satisfied } else { Verdict::Violated },
                Some(q_tol - q),
                format!("largest fitted ρ² coefficient of ln|R̃IC| over ρ ∈ [2, 8]: {q:.3e}"),
                if ok { vec![] } else { vec![witness(st, &frames[i], &[("quadratic", q)])] },
            )
        }
        None if fit_errors == 0 => condition(
            "2_exp_bounded",
            "R̃IC exp-bounded on each fiber",
            Verdict::Satisfied,
            None,
            "R̃IC vanishes along every probed boost".into(),
            vec![],
        ),
        None => condition("2_exp_bounded", "R̃IC exp-bounded on each fiber", Verdict::Inconclusive, None, "fit failed".into(), vec![]),
    });

    let ratio = (1.0 - alpha) / alpha;
    conditions.push(pointwise("2_potential_bound", "((1−α)/α)·R̃IC ≤ U", st, frames, |f| {
        let u = compute_u(st, f, quad)?.value;
        let r = ric_tilde(st, f)?;
        Ok(Probe { lhs: u, rhs: ratio * r, values: vec![("U", u), ("ric_tilde", r)] })
    }));

    // (3′)
    let steps = GeneratorSteps::default();
    conditions.push(pointwise("3_ric_growth", "H₀R̃IC ≥ (c − 2σ²)·R̃IC", st, frames, |f| {
        let r = ric_tilde(st, f)?;
        let d = horizontal_derivative(st, &FiberFunctional::ric_tilde(), f, &steps)?;
        Ok(Probe { lhs: d, rhs: (c - 2.0 * s2) * r, values: vec![("ric_tilde", r), ("H0_ric_tilde", d)] })
    }));
    let sum = FiberFunctional::ric_tilde_plus_u(*quad);
    conditions.push(pointwise("3_potential_growth", "H₀(R̃IC + U) ≤ (c′ − 2ασ²)·(R̃IC + U)", st, frames, |f| {
        let v = sum.eval(st, f)?;
        let d = horizontal_derivative(st, &sum, f, &steps)?;
        Ok(Probe { lhs: (c_prime - 2.0 * alpha * s2) * v, rhs: d, values: vec![("ric_tilde_plus_u", v), ("H0", d)] })
    }));

    CriterionReport::assemble("theorem12", st, constants, conditions, sample.envelope.clone())
}
