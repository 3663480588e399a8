//! Restarted GMRES can be made to follow any admissible cycle-convergence
//! curve on a matrix with any prescribed nonzero spectrum. This crate builds
//! such matrices and checks them by running an instrumented GMRES(m).
//!
//! ```
//! use anycurve::{construct_problem, verify_problem, ProblemSpec, R0Mode, Tolerances};
//! use anycurve::model::{validate_curve, RestartSchedule, SpectrumSpec, VariantConfig};
//! use num_complex::Complex64;
//!
//! let n = 3;
//! let spec = ProblemSpec {
//!     schedule: RestartSchedule::uniform(1, 2, n).unwrap(),
//!     curve: validate_curve(&[1.0, 0.5, 0.25]).unwrap(),
//!     spectrum: SpectrumSpec::new(
//!         (1..=3).map(|k| Complex64::new(k as f64, 0.0)).collect(),
//!         n,
//!     )
//!     .unwrap(),
//!     variant: VariantConfig::standard(),
//!     seed: 7,
//!     r0_mode: R0Mode::FirstCanonical,
//! };
//! let problem = construct_problem(&spec).unwrap();
//! let report = verify_problem(&problem, &Tolerances::default());
//! assert!(report.pass);
//! ```

pub mod cli;
pub mod constructor;
pub mod error;
pub mod gmres;
pub mod linalg;
pub mod model;
pub mod verify;

pub use constructor::{construct_problem, ConstructedProblem, ProblemSpec, R0Mode};
pub use error::{Error, Result};
pub use verify::{verify_problem, Tolerances, VerificationReport};
