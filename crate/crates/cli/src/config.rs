//! Run configuration: a TOML file with one table per concern.
//!
//! ```toml
//! [spacetime]
//! id = "schwarzschild"
//! params = { M = 1.0 }
//!
//! [frame]
//! coords = [0.0, 10.0, 1.5707963267948966, 0.0]
//! preset = "static-observer"
//!
//! [diffusion]
//! sigma = 1.0
//! ds = 0.01
//! s_max = 50.0
//! seed = 7
//!
//! [experiment]
//! n_paths = 1000
//! ```

use crate::CliError;
use lorentz_core::diffusion::DiffusionConfig;
use lorentz_core::fiber_analysis::{FiberFunctional, QuadratureSpec};
use lorentz_core::frame_bundle::Frame;
use lorentz_core::geometry::{Catalog, ChartId, Mat4, SpacetimePoint};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub spacetime: SpacetimeSection,
    pub frame: Option<FrameSection>,
    #[serde(default)]
    pub diffusion: DiffusionConfig,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpacetimeSection {
    pub id: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSection {
    #[serde(default)]
    pub chart: u8,
    pub coords: [f64; 4],
    /// "reference", "static-observer" or "comoving"; ignored when `matrix` is set.
    pub preset: Option<String>,
    /// Row-major e^μ_a.
    pub matrix: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub n_paths: u64,
    /// Sample times for `moments`.
    pub times: Vec<f64>,
    /// Functional for `moments` and `check lemma7`.
    pub functional: String,
    /// Theorem for `check` when not given on the command line.
    pub theorem: Option<String>,
    /// Lower bound constant C (lemma7, thm8).
    pub big_c: f64,
    pub alpha: f64,
    pub c: f64,
    pub c_prime: f64,
    /// Functional pair for `check lemma11`.
    pub f: String,
    pub h: String,
    pub n_points: usize,
    pub frames_per_point: usize,
    pub rapidity_max: f64,
    pub tube_length: f64,
    pub tube_radius: f64,
    pub core_step: f64,
    /// Spacetime ids swept by `verify`; each uses its default parameters.
    pub verify_spacetimes: Vec<String>,
    pub verify_frames: usize,
    pub verify_poisson_frames: usize,
    /// Overrides every default verification tolerance.
    pub tolerance: Option<f64>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            n_paths: 100,
            times: vec![0.5, 1.0],
            functional: "M_DOT_0".into(),
            theorem: None,
            big_c: 1.0,
            alpha: 0.5,
            c: 1.0,
            c_prime: 0.75,
            f: "RIC_TILDE".into(),
            h: "RIC_TILDE_PLUS_U".into(),
            n_points: 5,
            frames_per_point: 4,
            rapidity_max: 2.0,
            tube_length: 1.0,
            tube_radius: 0.5,
            core_step: 0.01,
            verify_spacetimes: vec![
                "minkowski".into(),
                "schwarzschild".into(),
                "einstein_de_sitter".into(),
                "de_sitter".into(),
            ],
            verify_frames: 20,
            verify_poisson_frames: 2,
            tolerance: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

/// 1-based line of `key` inside `[section]`, if it appears literally.
fn locate(src: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in src.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        let here = if section.is_empty() { current.is_empty() } else { current == section };
        if here {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

/// A diagnostic naming the key and, when found, its line.
fn bad(src: &str, path: &str, reason: impl std::fmt::Display) -> CliError {
    let (section, key) = path.rsplit_once('.').unwrap_or(("", path));
    match locate(src, section, key) {
        Some(line) => CliError::Config(format!("line {line}: invalid `{path}`: {reason}")),
        None => CliError::Config(format!("invalid `{path}`: {reason}")),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::parse(&src)
    }

    pub fn parse(src: &str) -> Result<RunConfig, CliError> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate(src)?;
        Ok(cfg)
    }

    fn validate(&self, src: &str) -> Result<(), CliError> {
        self.catalog().map_err(|e| bad(src, "spacetime.id", e))?;
        self.diffusion.validate().map_err(|e| match e {
            lorentz_core::diffusion::DiffusionError::InvalidConfig { field, reason } => {
                bad(src, &format!("diffusion.{field}"), reason)
            }
            other => CliError::Config(other.to_string()),
        })?;
        self.quadrature.validate().map_err(|e| bad(src, "quadrature", e))?;
        let x = &self.experiment;
        let positive = [
            ("experiment.rapidity_max", x.rapidity_max, true),
            ("experiment.tube_length", x.tube_length, false),
            ("experiment.tube_radius", x.tube_radius, false),
            ("experiment.core_step", x.core_step, false),
        ];
        for (name, v, zero_ok) in positive {
            let ok = v.is_finite() && (v > 0.0 || (zero_ok && v == 0.0));
            if !ok {
                return Err(bad(src, name, format!("must be finite and {}, got {v}", if zero_ok { ">= 0" } else { "> 0" })));
            }
        }
        for (name, v) in [
            ("experiment.big_c", x.big_c),
            ("experiment.alpha", x.alpha),
            ("experiment.c", x.c),
            ("experiment.c_prime", x.c_prime),
        ] {
            if !v.is_finite() {
                return Err(bad(src, name, format!("must be finite, got {v}")));
            }
        }
        for (name, v) in [
            ("experiment.n_paths", x.n_paths as usize),
            ("experiment.n_points", x.n_points),
            ("experiment.frames_per_point", x.frames_per_point),
            ("experiment.verify_frames", x.verify_frames),
        ] {
            if v == 0 {
                return Err(bad(src, name, "must be >= 1"));
            }
        }
        if x.core_step > 0.25 * x.tube_length {
            return Err(bad(src, "experiment.core_step", "must not exceed tube_length / 4"));
        }
        if let Some(t) = x.tolerance {
            if !(t >= 0.0) {
                return Err(bad(src, "experiment.tolerance", format!("must be >= 0, got {t}")));
            }
        }
        if x.times.iter().any(|t| !(t.is_finite() && *t >= 0.0 && *t <= self.diffusion.s_max)) {
            return Err(bad(src, "experiment.times", format!("must lie in [0, s_max = {}]", self.diffusion.s_max)));
        }
        if x.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad(src, "experiment.times", "must be strictly increasing"));
        }
        for (name, v) in [("experiment.functional", &x.functional), ("experiment.f", &x.f), ("experiment.h", &x.h)] {
            FiberFunctional::from_name(v, self.quadrature).map_err(|e| bad(src, name, e))?;
        }
        for id in &x.verify_spacetimes {
            Catalog::from_id(id, &BTreeMap::new()).map_err(|e| bad(src, "experiment.verify_spacetimes", e))?;
        }
        if let Some(th) = &x.theorem {
            if !crate::commands::THEOREMS.contains(&th.as_str()) {
                return Err(bad(src, "experiment.theorem", format!("unknown theorem `{th}`")));
            }
        }
        let st = self.catalog().expect("checked above");
        self.initial_frame(&st).map_err(|e| match e {
            CliError::Config(m) => bad(src, "frame.coords", m),
            other => other,
        })?;
        Ok(())
    }

    pub fn catalog(&self) -> Result<Catalog, CliError> {
        Catalog::from_id(&self.spacetime.id, &self.spacetime.params).map_err(|e| CliError::Config(e.to_string()))
    }

    /// The configured initial frame, or a default observer per spacetime.
    pub fn initial_frame(&self, st: &Catalog) -> Result<Frame, CliError> {
        let cfg = |e: &dyn std::fmt::Display| CliError::Config(e.to_string());
        let default = match st {
            Catalog::Schwarzschild(s) => FrameSection {
                chart: 0,
                coords: [0.0, 10.0 * s.mass(), std::f64::consts::FRAC_PI_2, 0.0],
                preset: Some("static-observer".into()),
                matrix: None,
            },
            Catalog::PowerLawFlrw(_) => {
                FrameSection { chart: 0, coords: [1.0, 0.0, 0.0, 0.0], preset: Some("comoving".into()), matrix: None }
            }
            _ => FrameSection { chart: 0, coords: [0.0; 4], preset: None, matrix: None },
        };
        let sec = self.frame.as_ref().unwrap_or(&default);
        let p = SpacetimePoint::new(ChartId(sec.chart), sec.coords);
        let frame = if let Some(m) = &sec.matrix {
            if m.len() != 16 {
                return Err(CliError::Config(format!("frame.matrix needs 16 entries, got {}", m.len())));
            }
            Frame::new(p, Mat4::from_row_slice(m))
        } else {
            match (sec.preset.as_deref().unwrap_or("reference"), st) {
                ("reference", _) => Frame::reference(st, p).map_err(|e| cfg(&e))?,
                ("static-observer", Catalog::Schwarzschild(s)) => Frame::new(p, s.static_frame(&p).map_err(|e| cfg(&e))?),
                ("static-observer", Catalog::Minkowski(_)) => Frame::reference(st, p).map_err(|e| cfg(&e))?,
                ("comoving", Catalog::PowerLawFlrw(_) | Catalog::DeSitter(_) | Catalog::Minkowski(_)) => {
                    Frame::reference(st, p).map_err(|e| cfg(&e))?
                }
                (other, _) => {
                    return Err(CliError::Config(format!(
                        "frame.preset `{other}` is not available on `{}`",
                        self.spacetime.id
                    )))
                }
            }
        };
        frame.validate(st, 1e-9).map_err(|e| cfg(&e))?;
        Ok(frame)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locate_finds_keys_in_sections() {
        let src = "[spacetime]\nid = \"minkowski\"\n\n[diffusion]\nsigma = -1\n";
        assert_eq!(locate(src, "diffusion", "sigma"), Some(5));
        assert_eq!(locate(src, "spacetime", "sigma"), None);
    }

    #[test]
    fn negative_sigma_names_field_and_line() {
        let src = "[spacetime]\nid = \"minkowski\"\n[diffusion]\nsigma = -1.0\n";
        let err = RunConfig::parse(src).unwrap_err().to_string();
        assert!(err.contains("line 4") && err.contains("diffusion.sigma"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = RunConfig::parse("[spacetime]\nid = \"minkowski\"\nmass = 2\n").unwrap_err().to_string();
        assert!(err.contains("mass"), "{err}");
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = RunConfig::parse("[spacetime]\nid = \"de_sitter\"\nparams = { H = 0.5 }\n").unwrap();
        let back = RunConfig::parse(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
