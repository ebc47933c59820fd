//! Gaussian Schell-model beams as incoherent ensembles of tilted coherent
//! Gaussian beams.
//!
//! A tilt θ shifts a near-field pattern by θz, so averaging intensities over a
//! Gaussian distribution of tilts reproduces the Gaussian degree of coherence
//! μ(Δx) = exp(-2 Δx² / ℓc²) for tilt standard deviation σθ = λ / (π ℓc).

use num_complex::Complex64;

use crate::error::{config, Error, Result};
use crate::physics::Wavelength;
use crate::wavefield::{TransverseGrid, WaveField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsmBeam {
    /// 1/e² intensity diameter at G1, m.
    pub width: f64,
    /// Transverse coherence width ℓc, m.
    pub coherence_width: f64,
    /// Wavefront radius of curvature at G1, m. Positive converges, infinite is collimated.
    pub radius: f64,
    /// Beam axis offset along x, m.
    pub center: f64,
}

impl GsmBeam {
    pub fn new(width: f64, coherence_width: f64) -> Result<Self> {
        let beam = Self {
            width,
            coherence_width,
            radius: f64::INFINITY,
            center: 0.0,
        };
        beam.validate()?;
        Ok(beam)
    }

    /// Ø150 µm collimated beam with 2 µm coherence width.
    pub fn collimated_default() -> Self {
        Self::new(150e-6, 2e-6).expect("default beam is valid")
    }

    pub fn with_width(mut self, width: f64) -> Self {
        self.width = width;
        self
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn with_center(mut self, center: f64) -> Self {
        self.center = center;
        self
    }

    pub fn with_coherence_width(mut self, coherence_width: f64) -> Self {
        self.coherence_width = coherence_width;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width.is_finite() && self.width > 0.0) {
            return config(format!("beam width must be positive, got {} m", self.width));
        }
        if !(self.coherence_width > 0.0) {
            return config(format!(
                "coherence width must be positive, got {} m",
                self.coherence_width
            ));
        }
        if self.radius == 0.0 || self.radius.is_nan() {
            return config("radius of curvature must be non-zero (use inf for a collimated beam)");
        }
        if !self.center.is_finite() {
            return config("beam centre must be finite");
        }
        Ok(())
    }

    /// Standard deviation of the tilt distribution, λ / (π ℓc), rad.
    pub fn angular_spread(&self, wavelength: Wavelength) -> f64 {
        wavelength.metres() / (std::f64::consts::PI * self.coherence_width)
    }

    /// Full convergence angle, width / R, rad.
    pub fn convergence_angle(&self) -> f64 {
        self.width / self.radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMember {
    pub weight: f64,
    /// Tilt angle of this member, rad.
    pub tilt: f64,
    pub field: WaveField,
}

/// Weighted incoherent ensemble; all members share one grid and wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<EnsembleMember>,
}

impl Ensemble {
    pub fn new(members: Vec<EnsembleMember>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::Config("ensemble needs at least one member".into()))?;
        let (grid, lambda) = (*first.field.grid(), first.field.wavelength());
        if members
            .iter()
            .any(|m| *m.field.grid() != grid || m.field.wavelength() != lambda)
        {
            return config("ensemble members must share one grid and wavelength");
        }
        if members
            .iter()
            .any(|m| !(m.weight >= 0.0 && m.weight.is_finite()))
        {
            return config("ensemble weights must be finite and non-negative");
        }
        let total: f64 = members.iter().map(|m| m.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return config(format!("ensemble weights must sum to 1, got {total}"));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[EnsembleMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The untilted member, present whenever the ensemble size is odd.
    pub fn central(&self) -> &EnsembleMember {
        &self.members[self.members.len() / 2]
    }

    /// Applies `f` to every member field, keeping weights.
    pub fn map_fields(&self, f: impl Fn(&WaveField) -> Result<WaveField>) -> Result<Self> {
        let members = self
            .members
            .iter()
            .map(|m| {
                Ok(EnsembleMember {
                    weight: m.weight,
                    tilt: m.tilt,
                    field: f(&m.field)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { members })
    }

    /// Σ weight · flux.
    pub fn flux(&self) -> f64 {
        self.members.iter().map(|m| m.weight * m.field.flux()).sum()
    }

    /// Weighted sum of member intensities.
    pub fn intensity(&self) -> Vec<f64> {
        let profiles: Vec<(f64, Vec<f64>)> = self
            .members
            .iter()
            .map(|m| (m.weight, m.field.intensity()))
            .collect();
        incoherent_intensity(&profiles).expect("members share a grid")
    }
}

/// Builds an `m`-member tilted-beam ensemble for `beam`.
///
/// Tilts are evenly spaced over ±2σθ with trapezoid-rule Gaussian weights
/// renormalized to one; every member is a unit-flux Gaussian of 1/e² diameter `beam.width`
/// carrying the beam's wavefront curvature. `m = 1` is a single coherent beam.
pub fn gsm_ensemble(
    beam: &GsmBeam,
    grid: &TransverseGrid,
    wavelength: Wavelength,
    m: usize,
) -> Result<Ensemble> {
    beam.validate()?;
    if m < 1 || m.is_multiple_of(2) {
        return config(format!("ensemble size must be odd and >= 1, got {m}"));
    }
    if grid.window() < 2.0 * beam.width {
        return config(format!(
            "grid window {:.3e} m must be at least twice the beam width {:.3e} m",
            grid.window(),
            beam.width
        ));
    }
    let sigma = beam.angular_spread(wavelength);
    let tilts: Vec<f64> = if m == 1 {
        vec![0.0]
    } else {
        // Symmetric in j so the central member has exactly zero tilt.
        let half = (m - 1) as f64;
        (0..m)
            .map(|j| (2.0 * j as f64 - half) * 2.0 * sigma / half)
            .collect()
    };
    // Trapezoid weights: the two end tilts get half weight, which makes the
    // ensemble a second-order quadrature of the truncated Gaussian.
    let raw: Vec<f64> = tilts
        .iter()
        .enumerate()
        .map(|(j, t)| {
            let end = m > 1 && (j == 0 || j == m - 1);
            (-0.5 * (t / sigma).powi(2)).exp() * if end { 0.5 } else { 1.0 }
        })
        .collect();
    let norm: f64 = raw.iter().sum();

    let base = WaveField::gaussian(*grid, wavelength, 0.5 * beam.width, beam.center)
        .apply_curvature_about(beam.radius, beam.center)?
        .normalized();
    let k = wavelength.wavenumber();
    let members = tilts
        .iter()
        .zip(&raw)
        .map(|(&tilt, &w)| {
            let field = if tilt == 0.0 {
                base.clone()
            } else {
                base.map_amplitudes(|j, a| a * Complex64::cis(k * tilt * (grid.x(j) - beam.center)))
            };
            EnsembleMember {
                weight: w / norm,
                tilt,
                field,
            }
        })
        .collect();
    Ensemble::new(members)
}

/// Pointwise Σ weight · intensity. Intensities add; amplitudes never do.
pub fn incoherent_intensity(results: &[(f64, Vec<f64>)]) -> Result<Vec<f64>> {
    let len = results.first().map(|(_, p)| p.len()).unwrap_or(0);
    let mut out = vec![0.0; len];
    for (weight, profile) in results {
        if profile.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                actual: profile.len(),
            });
        }
        if !(*weight >= 0.0) {
            return config(format!(
                "incoherent weights must be non-negative, got {weight}"
            ));
        }
        for (o, p) in out.iter_mut().zip(profile) {
            *o += weight * p;
        }
    }
    Ok(out)
}
