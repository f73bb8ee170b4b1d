//! JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use serde::Deserialize;

use quatham::dynamics::IntegratorConfig;
use quatham::quaternion::axis_angle_to_quat;
use quatham::{BodyParams, Chart, InertiaTensor, PhasePoint, PotentialSpec, Quaternion, RenormPolicy, Vec3};

use crate::CliError;

/// Deviation of the initial `|q|` from one above which loading warns.
pub const NORMALIZE_WARN: f64 = 1e-6;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub body: BodyConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    pub initial: InitialConfig,
    pub integrator: IntegratorSection,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyConfig {
    pub mass: f64,
    pub inertia: InertiaConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InertiaConfig {
    #[serde(rename = "I1")]
    pub i1: f64,
    #[serde(rename = "I2")]
    pub i2: f64,
    #[serde(rename = "I3")]
    pub i3: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    #[default]
    Free,
    LinearGravity {
        g: f64,
    },
    HeavyTop {
        g: f64,
        l: f64,
    },
    Harmonic {
        k: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisAngle {
    pub axis: [f64; 3],
    pub angle: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default)]
    pub x: [f64; 3],
    #[serde(default)]
    pub p: [f64; 3],
    /// Scalar-first `(q0, q1, q2, q3)`.
    pub q: Option<[f64; 4]>,
    pub axis_angle: Option<AxisAngle>,
    #[serde(rename = "M", default)]
    pub m: [f64; 3],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RenormConfig {
    /// `"none"`, `"every_step"` or `"threshold"` (default threshold).
    Named(String),
    Threshold { threshold: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub h: f64,
    pub n_steps: usize,
    pub renorm: Option<RenormConfig>,
    #[serde(default = "one")]
    pub sample_stride: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: PathBuf,
    pub summary: Option<PathBuf>,
}

/// A validated configuration ready to run.
#[derive(Debug, Clone)]
pub struct Run {
    pub params: BodyParams,
    pub state0: PhasePoint,
    pub integrator: IntegratorConfig,
    pub csv: PathBuf,
    pub summary: Option<PathBuf>,
}

fn field_error(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {msg}"))
}

fn finite(field: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(field_error(field, format!("must be finite, got {v}")))
    }
}

fn finite3(field: &str, v: [f64; 3]) -> Result<Vec3, CliError> {
    for (k, c) in v.iter().enumerate() {
        finite(&format!("{field}[{k}]"), *c)?;
    }
    Ok(Vec3(v))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Validates parameters and resolves output paths against `base`.
    pub fn resolve(&self, base: &Path) -> Result<Run, CliError> {
        let mass = self.body.mass;
        if !(mass.is_finite() && mass > 0.0) {
            return Err(field_error("body.mass", format!("must be positive, got {mass}")));
        }
        let ic = &self.body.inertia;
        for (name, v) in [("I1", ic.i1), ("I2", ic.i2), ("I3", ic.i3)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(field_error(
                    &format!("body.inertia.{name}"),
                    format!("must be positive, got {v}"),
                ));
            }
        }
        let inertia = InertiaTensor::new(ic.i1, ic.i2, ic.i3)
            .map_err(|e| field_error("body.inertia", e))?;

        let potential = match self.potential {
            PotentialConfig::Free => PotentialSpec::free(),
            PotentialConfig::LinearGravity { g } => {
                PotentialSpec::linear_gravity(mass, finite("potential.g", g)?)
            }
            PotentialConfig::HeavyTop { g, l } => {
                let l = finite("potential.l", l)?;
                if l < 0.0 {
                    return Err(field_error("potential.l", "must be non-negative"));
                }
                PotentialSpec::heavy_top(mass, finite("potential.g", g)?, l)
            }
            PotentialConfig::Harmonic { k } => {
                let k = finite("potential.k", k)?;
                if k < 0.0 {
                    return Err(field_error("potential.k", "must be non-negative"));
                }
                PotentialSpec::harmonic(k)
            }
        };
        let params = BodyParams::new(mass, inertia, potential).map_err(|e| field_error("body", e))?;

        let init = &self.initial;
        let q = match (&init.q, &init.axis_angle) {
            (Some(_), Some(_)) => {
                return Err(field_error("initial", "give either `q` or `axis_angle`, not both"))
            }
            (None, None) => Quaternion::IDENTITY,
            (Some(q), None) => {
                for (k, c) in q.iter().enumerate() {
                    finite(&format!("initial.q[{k}]"), *c)?;
                }
                let q = Quaternion::from_array(*q);
                let deviation = (q.norm() - 1.0).abs();
                let unit = q.normalize().map_err(|e| field_error("initial.q", e))?;
                if deviation > NORMALIZE_WARN {
                    warn!("initial.q has |q| - 1 = {deviation:e}; normalized to unit length");
                }
                unit
            }
            (None, Some(aa)) => {
                let axis = finite3("initial.axis_angle.axis", aa.axis)?;
                let angle = finite("initial.axis_angle.angle", aa.angle)?;
                axis_angle_to_quat(axis, angle).map_err(|e| field_error("initial.axis_angle.axis", e))?
            }
        };
        let state0 = PhasePoint::new(
            finite3("initial.x", init.x)?,
            finite3("initial.p", init.p)?,
            q,
            finite3("initial.M", init.m)?,
            Chart::MixedM,
        )
        .map_err(|e| field_error("initial.q", e))?;

        let it = &self.integrator;
        if !(it.h.is_finite() && it.h > 0.0) {
            return Err(field_error("integrator.h", format!("must be positive, got {}", it.h)));
        }
        if it.n_steps == 0 {
            return Err(field_error("integrator.n_steps", "must be at least 1"));
        }
        if it.sample_stride == 0 {
            return Err(field_error("integrator.sample_stride", "must be at least 1"));
        }
        let renorm = match &it.renorm {
            None => RenormPolicy::default(),
            Some(RenormConfig::Named(name)) => match name.as_str() {
                "none" => RenormPolicy::Never,
                "every_step" => RenormPolicy::EveryStep,
                "threshold" => RenormPolicy::default(),
                other => {
                    return Err(field_error(
                        "integrator.renorm",
                        format!("unknown policy `{other}` (expected none, every_step, threshold or {{\"threshold\": eps}})"),
                    ))
                }
            },
            Some(RenormConfig::Threshold { threshold }) => {
                if !(threshold.is_finite() && *threshold >= 0.0) {
                    return Err(field_error("integrator.renorm.threshold", "must be non-negative"));
                }
                RenormPolicy::Threshold(*threshold)
            }
        };
        let integrator = IntegratorConfig::new(it.h, it.n_steps)
            .with_renorm(renorm)
            .with_stride(it.sample_stride);

        Ok(Run {
            params,
            state0,
            integrator,
            csv: base.join(&self.output.csv),
            summary: self.output.summary.as_ref().map(|p| base.join(p)),
        })
    }
}
