//! Named numerical scales.
//!
//! `Paper` matches the laboratory geometry (Ø150 µm beam on a 327.68 µm window).
//! `Test` keeps the same gratings and wavelengths on a 25.6 µm window so whole
//! carpets run in seconds; the beam shrinks with the window.

use crate::coherence::GsmBeam;
use crate::error::{config, Result};
use crate::physics::ScanSpec;
use crate::wavefield::TransverseGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Paper,
    Test,
}

impl Preset {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "paper" => Ok(Self::Paper),
            "test" => Ok(Self::Test),
            other => config(format!(
                "unknown preset `{other}` (expected `paper` or `test`)"
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Paper => "paper",
            Self::Test => "test",
        }
    }

    pub fn grid(self) -> TransverseGrid {
        match self {
            Self::Paper => TransverseGrid::paper(),
            Self::Test => TransverseGrid::test_scale(),
        }
    }

    pub fn beam(self) -> GsmBeam {
        match self {
            Self::Paper => GsmBeam::collimated_default(),
            Self::Test => GsmBeam::collimated_default().with_width(8e-6),
        }
    }

    /// Ensemble size.
    pub fn members(self) -> usize {
        match self {
            Self::Paper => 15,
            Self::Test => 7,
        }
    }

    /// G2 shift step and count for carpets and moiré scans.
    pub fn shifts(self) -> (f64, usize) {
        match self {
            Self::Paper => (5e-9, 96),
            Self::Test => (10e-9, 24),
        }
    }

    pub fn scan(self) -> ScanSpec {
        let (step, count) = self.shifts();
        ScanSpec::measured_z_range(step, count).expect("preset scan is valid")
    }
}
