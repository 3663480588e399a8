//! JSON job configuration and the `problem.json` metadata file.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::constructor::{ConstructedProblem, ProblemSpec, R0Mode, TailKind};
use crate::linalg::C64;
use crate::model::{
    validate_curve, CurveVariant, RestartSchedule, SpectrumSpec, VariantConfig, VariantKind,
};
use crate::verify::Tolerances;

/// A fixed restart length or one length per cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Restart {
    Fixed(usize),
    Variable(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub n: usize,
    pub restart: Restart,
    pub curve: Vec<f64>,
    pub spectrum: Vec<[f64; 2]>,
    pub variant: VariantKind,
    #[serde(default = "default_gamma")]
    pub gamma: [f64; 2],
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub r0_mode: R0Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn default_gamma() -> [f64; 2] {
    [1.0, 0.0]
}

/// A rejected configuration, naming the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn field_err(field: &'static str) -> impl Fn(crate::Error) -> ConfigError {
    move |e| ConfigError {
        field,
        message: e.to_string(),
    }
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_problem_spec(&self) -> Result<ProblemSpec, ConfigError> {
        let curve = validate_curve(&self.curve).map_err(field_err("curve"))?;
        let schedule = match &self.restart {
            Restart::Fixed(m) => RestartSchedule::uniform(*m, curve.q(), self.n),
            Restart::Variable(ms) => RestartSchedule::new(ms.clone(), self.n),
        }
        .map_err(field_err("restart"))?;
        if schedule.len() != curve.q() {
            return Err(ConfigError {
                field: "restart",
                message: format!(
                    "{} restart lengths for a curve of {} cycles",
                    schedule.len(),
                    curve.q()
                ),
            });
        }
        let eigenvalues = self
            .spectrum
            .iter()
            .map(|&[re, im]| C64::new(re, im))
            .collect();
        let spectrum = SpectrumSpec::new(eigenvalues, self.n).map_err(field_err("spectrum"))?;
        let [gre, gim] = self.gamma;
        let variant =
            VariantConfig::new(self.variant, C64::new(gre, gim)).map_err(field_err("gamma"))?;
        crate::constructor::BlockLayout::for_problem(&curve, &schedule, &variant)
            .map_err(field_err("variant"))?;
        Ok(ProblemSpec {
            schedule,
            curve,
            spectrum,
            variant,
            seed: self.seed,
            r0_mode: self.r0_mode,
        })
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.unwrap_or_default()
    }
}

/// Construction metadata recorded next to the matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaffoldMeta {
    pub curve_variant: CurveVariant,
    pub shaped_cycles: usize,
    pub block_sizes: Vec<usize>,
    pub completion_size: usize,
    pub tail: String,
    /// Angles between `r_{k-1}` and the last Krylov direction, in radians.
    pub angles: Vec<f64>,
}

impl ScaffoldMeta {
    pub fn from_problem(p: &ConstructedProblem) -> Self {
        let tail = match p.scaffold.tail_kind {
            TailKind::Residual => "residual",
            TailKind::StagnationSum => "stagnation-sum",
            TailKind::GammaShifted(_) => "gamma-shifted",
            TailKind::Fresh => "fresh",
        };
        ScaffoldMeta {
            curve_variant: p.spec.curve.variant(),
            shaped_cycles: p.scaffold.cycle_blocks.len(),
            block_sizes: p.assembly.layout.block_sizes(),
            completion_size: p.assembly.t,
            tail: tail.to_string(),
            angles: p.scaffold.angles.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub format: String,
    pub version: u32,
    pub config: JobConfig,
    pub scaffold: ScaffoldMeta,
    pub files: ProblemFiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFiles {
    pub matrix: String,
    pub rhs: String,
    pub basis: String,
    pub operator_in_basis: String,
}

impl Default for ProblemFiles {
    fn default() -> Self {
        ProblemFiles {
            matrix: "A.mtx".into(),
            rhs: "b.mtx".into(),
            basis: "basisS.mtx".into(),
            operator_in_basis: "opInS.mtx".into(),
        }
    }
}

pub const PROBLEM_FORMAT: &str = "anycurve-problem";

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "n": 5,
        "restart": 2,
        "curve": [1.0, 0.5, 0.25],
        "spectrum": [[1,0],[2,0],[3,0],[4,0],[5,0]],
        "variant": "standard",
        "seed": 3
    }"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = JobConfig::from_json(BASE).unwrap();
        assert_eq!(cfg.restart, Restart::Fixed(2));
        assert_eq!(cfg.gamma, [1.0, 0.0]);
        assert_eq!(cfg.r0_mode, R0Mode::FirstCanonical);
        let spec = cfg.to_problem_spec().unwrap();
        assert_eq!(spec.schedule.cycles(), &[2, 2]);
    }

    #[test]
    fn variable_restart_and_random_r0() {
        let text = BASE
            .replace("\"restart\": 2", "\"restart\": [1, 3]")
            .replace("\"seed\": 3", "\"seed\": 3, \"r0_mode\": \"random\"");
        let cfg = JobConfig::from_json(&text).unwrap();
        assert_eq!(cfg.restart, Restart::Variable(vec![1, 3]));
        assert_eq!(cfg.r0_mode, R0Mode::RandomUnit);
        assert!(cfg.to_problem_spec().is_ok());
    }

    #[test]
    fn names_the_offending_field() {
        let bad_curve = BASE.replace("[1.0, 0.5, 0.25]", "[1.0, 0.5, 0.7]");
        let err = JobConfig::from_json(&bad_curve)
            .unwrap()
            .to_problem_spec()
            .unwrap_err();
        assert_eq!(err.field, "curve");
        assert!(err.message.contains("index 2"));

        let too_long = BASE.replace("\"restart\": 2", "\"restart\": 3");
        let err = JobConfig::from_json(&too_long)
            .unwrap()
            .to_problem_spec()
            .unwrap_err();
        assert_eq!(err.field, "restart");
        assert!(err.to_string().contains("schedule exceeds order"));
    }

    #[test]
    fn unknown_fields_are_rejected_with_position() {
        let text = BASE.replace("\"seed\": 3", "\"seed\": 3, \"colour\": 1");
        let err = JobConfig::from_json(&text).unwrap_err();
        assert!(err.line() > 0);
        assert!(err.to_string().contains("colour"));
    }
}
