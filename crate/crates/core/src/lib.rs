//! Steady-state photon statistics of a spinning two-mode Kerr
//! whispering-gallery resonator.
//!
//! The pipeline runs in one direction:
//!
//! ```text
//! PhysicalParams --derive--> DerivedParams --model--> Liouvillian
//!        --steadystate--> DensityMatrix --observables--> CorrelationResult
//! ```
//!
//! with [`analytic`] providing an independent weak-drive solution built from
//! the non-Hermitian Hamiltonian, and [`sweep`] running grids of independent
//! solves for figure data.

pub mod analytic;
pub mod banded;
pub mod fock;
pub mod model;
pub mod observables;
pub mod params;
pub mod presets;
pub mod steadystate;
pub mod sweep;

use serde::{Deserialize, Serialize};

pub use fock::{FockSpace, SparseMatrix};
pub use num_complex::Complex64 as C64;
pub use params::{DerivedParams, PhysicalParams};
pub use steadystate::DensityMatrix;

/// One of the two counter-propagating whispering-gallery modes.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Cw,
    Ccw,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::Cw, Mode::Ccw];

    pub fn other(self) -> Mode {
        match self {
            Mode::Cw => Mode::Ccw,
            Mode::Ccw => Mode::Cw,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::Cw => "cw",
            Mode::Ccw => "ccw",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cw" => Ok(Mode::Cw),
            "ccw" => Ok(Mode::Ccw),
            other => Err(format!("unknown mode `{other}` (expected cw or ccw)")),
        }
    }
}
