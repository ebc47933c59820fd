//! Physical constants, beam energy and wavelength, and the closed-form
//! relations of free-space electron optics used everywhere else.
//!
//! Everything inside the crate is SI. Kilo-electron-volts, picometres and
//! nanometres only appear in the constructors and accessors named after them.

use crate::error::{config, domain, Result};

/// CODATA 2018 values. The first four are exact by definition of the SI.
pub mod constants {
    /// Planck constant, J s (exact).
    pub const PLANCK: f64 = 6.626_070_15e-34;
    /// Speed of light in vacuum, m/s (exact).
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    /// Elementary charge, C (exact).
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    /// Electron rest mass, kg (CODATA 2018, relative uncertainty 3.0e-10).
    pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
    /// Electron rest energy m_e c^2, J.
    pub const ELECTRON_REST_ENERGY: f64 = ELECTRON_MASS * SPEED_OF_LIGHT * SPEED_OF_LIGHT;
}

use constants::*;

/// Kinetic energy of the electron beam.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BeamEnergy(f64);

impl BeamEnergy {
    pub fn from_kev(kev: f64) -> Result<Self> {
        if !(kev.is_finite() && kev > 0.0) {
            return domain(format!("beam energy must be positive, got {kev} keV"));
        }
        Ok(Self(kev * 1e3 * ELEMENTARY_CHARGE))
    }

    pub fn joules(self) -> f64 {
        self.0
    }

    pub fn kev(self) -> f64 {
        self.0 / (1e3 * ELEMENTARY_CHARGE)
    }
}

/// A de Broglie wavelength, stored in metres.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Wavelength(f64);

impl Wavelength {
    pub fn from_metres(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return domain(format!("wavelength must be positive, got {lambda} m"));
        }
        Ok(Self(lambda))
    }

    pub fn from_picometres(pm: f64) -> Result<Self> {
        Self::from_metres(pm * 1e-12)
    }

    pub fn metres(self) -> f64 {
        self.0
    }

    pub fn picometres(self) -> f64 {
        self.0 * 1e12
    }

    /// Free-space wavenumber 2π/λ.
    pub fn wavenumber(self) -> f64 {
        2.0 * std::f64::consts::PI / self.0
    }
}

/// Relativistic de Broglie wavelength λ = hc / sqrt(E (E + 2 m_e c²)).
pub fn de_broglie_wavelength(energy: BeamEnergy) -> Wavelength {
    let e = energy.joules();
    let pc = (e * (e + 2.0 * ELECTRON_REST_ENERGY)).sqrt();
    Wavelength(PLANCK * SPEED_OF_LIGHT / pc)
}

/// Non-relativistic λ = h / sqrt(2 m_e E), kept for comparison only.
pub fn de_broglie_wavelength_nonrelativistic(energy: BeamEnergy) -> Wavelength {
    Wavelength(PLANCK / (2.0 * ELECTRON_MASS * energy.joules()).sqrt())
}

/// Talbot distance L_T = 2 d² / λ.
pub fn talbot_distance(period: f64, wavelength: Wavelength) -> Result<f64> {
    if !(period.is_finite() && period > 0.0) {
        return domain(format!("grating period must be positive, got {period} m"));
    }
    Ok(2.0 * period * period / wavelength.metres())
}

/// Grating separation and detector distance of the two-grating setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetupGeometry {
    /// G1 to G2 separation, m.
    pub z_sep: f64,
    /// G2 to detector distance, m.
    pub z_det: f64,
}

impl SetupGeometry {
    pub const DEFAULT_DETECTOR_DISTANCE: f64 = 1.0;

    pub fn new(z_sep: f64, z_det: f64) -> Result<Self> {
        if !(z_sep.is_finite() && z_sep > 0.0) {
            return config(format!(
                "grating separation must be positive, got {z_sep} m"
            ));
        }
        if !(z_det.is_finite() && z_det > 0.0) {
            return config(format!("detector distance must be positive, got {z_det} m"));
        }
        if z_det < 100.0 * z_sep {
            return config(format!(
                "detector at {z_det} m is not far from the gratings (separation {z_sep} m); need z_det >= 100 z_sep"
            ));
        }
        Ok(Self { z_sep, z_det })
    }
}

/// Separation and lateral-shift sampling of a carpet scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSpec {
    pub z_min: f64,
    pub z_max: f64,
    pub z_step: f64,
    pub x_step: f64,
    pub x_count: usize,
}

impl ScanSpec {
    /// Separation range and step used for the measured carpets: 0.1 to 1.7 mm in 30 µm steps.
    pub fn measured_z_range(x_step: f64, x_count: usize) -> Result<Self> {
        Self::new(0.1e-3, 1.7e-3, 30e-6, x_step, x_count)
    }

    pub fn new(z_min: f64, z_max: f64, z_step: f64, x_step: f64, x_count: usize) -> Result<Self> {
        if !(z_min.is_finite() && z_max.is_finite() && z_min > 0.0 && z_min < z_max) {
            return config(format!(
                "scan needs 0 < z_min < z_max, got [{z_min}, {z_max}] m"
            ));
        }
        if !(z_step.is_finite() && z_step > 0.0) {
            return config(format!("scan z step must be positive, got {z_step} m"));
        }
        if !(x_step.is_finite() && x_step > 0.0) {
            return config(format!("scan x step must be positive, got {x_step} m"));
        }
        if x_count < 2 {
            return config(format!(
                "scan needs at least 2 lateral positions, got {x_count}"
            ));
        }
        Ok(Self {
            z_min,
            z_max,
            z_step,
            x_step,
            x_count,
        })
    }

    /// Row separations z_min, z_min + step, ... up to and including z_max.
    pub fn z_values(&self) -> Vec<f64> {
        let rows = ((self.z_max - self.z_min) / self.z_step + 1e-9).floor() as usize + 1;
        (0..rows)
            .map(|i| self.z_min + i as f64 * self.z_step)
            .collect()
    }

    /// Column shifts 0, x_step, ..., (x_count - 1) x_step.
    pub fn x_values(&self) -> Vec<f64> {
        (0..self.x_count).map(|i| i as f64 * self.x_step).collect()
    }
}
