//! Canned configurations, one per construction variant.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use crate::constructor::R0Mode;
use crate::model::VariantKind;
use crate::verify::VerificationReport;

use super::config::{JobConfig, Restart};
use super::{cmd_verify, construct_and_write, CliError};

pub const PRESETS: [&str; 5] = [
    "superlinear",
    "stagnation",
    "nonconvergent",
    "variable-restart",
    "zerotail",
];

/// `n` points on the circle of radius `radius` around `center`, placed at
/// golden-angle steps so that every run of consecutive points is spread
/// around the circle.
fn circle(n: usize, center: f64, radius: f64) -> Vec<[f64; 2]> {
    let golden = TAU * (1.0 - (5f64.sqrt() - 1.0) / 2.0);
    (0..n)
        .map(|j| {
            let theta = golden * j as f64;
            [center + radius * theta.cos(), radius * theta.sin()]
        })
        .collect()
}

pub fn preset(name: &str) -> Option<JobConfig> {
    let base = |n: usize, restart: Restart, curve: Vec<f64>, variant: VariantKind| JobConfig {
        n,
        restart,
        curve,
        spectrum: circle(n, 1.0, 0.5),
        variant,
        gamma: [1.0, 0.0],
        seed: 2024,
        r0_mode: R0Mode::FirstCanonical,
        tolerances: None,
        output_dir: None,
    };
    let cfg = match name {
        // log-concave decay: every cycle reduces more than the one before
        "superlinear" => base(
            32,
            Restart::Fixed(4),
            (0..=7)
                .map(|k| 10f64.powf(-((k * k) as f64) / 16.0))
                .collect(),
            VariantKind::Standard,
        ),
        "stagnation" => base(
            20,
            Restart::Fixed(3),
            vec![1.0, 0.5, 0.25, 0.25, 0.25, 0.25],
            VariantKind::Stagnation,
        ),
        "nonconvergent" => base(
            16,
            Restart::Fixed(3),
            vec![1.0, 0.6, 0.3, 0.1],
            VariantKind::NonConvergent,
        ),
        "variable-restart" => base(
            20,
            Restart::Variable(vec![2, 5, 3, 1, 4]),
            (0..=5).map(|k| 10f64.powf(-0.6 * k as f64)).collect(),
            VariantKind::Standard,
        ),
        "zerotail" => base(
            10,
            Restart::Fixed(2),
            vec![1.0, 0.5, 0.2, 0.0],
            VariantKind::Standard,
        ),
        _ => return None,
    };
    Some(cfg)
}

pub fn cmd_demo(
    name: &str,
    out: Option<&Path>,
    seed: Option<u64>,
) -> Result<VerificationReport, CliError> {
    let mut config = preset(name).ok_or_else(|| {
        CliError::Validation(format!(
            "unknown preset `{name}` (expected one of: {})",
            PRESETS.join(", ")
        ))
    })?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(format!("demo-{name}")));
    construct_and_write(&config, &dir)?;
    cmd_verify(&dir, None)
}
