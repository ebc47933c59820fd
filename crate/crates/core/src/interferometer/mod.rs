//! The two-grating interferometer: beam, G1, free space, G2, detector.
//!
//! Scan observables (moiré curves, carpets) use the flux just after G2. By
//! Parseval this is the integral of the detector image, so no far field has
//! to be rendered for them. Far-field frames are rendered only for the
//! demagnified-Talbot series and the curvature fit.

mod carpet;
mod demag;
mod fit;

pub use carpet::{align_carpet_rows, CarpetImage, CarpetMetadata, CarpetSetup, RowFundamental};
pub use demag::{
    demagnified_period, demagnified_revival_plane, moire_beat_period, null_positions, DemagSeries,
};
pub use fit::{fit_wavefront_curvature, frame_objective, FitResult};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::coherence::{gsm_ensemble, incoherent_intensity, Ensemble, GsmBeam};
use crate::error::{config, Result};
use crate::grating::{build_transmission, open_mask, GratingSpec};
use crate::physics::{de_broglie_wavelength, talbot_distance, BeamEnergy, Wavelength};
use crate::wavefield::{FresnelPropagator, TransverseGrid, WaveField};

/// Grid, wavelength and ensemble size shared by every simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimContext {
    pub energy: BeamEnergy,
    pub wavelength: Wavelength,
    pub grid: TransverseGrid,
    /// Ensemble size (odd).
    pub members: usize,
}

impl SimContext {
    pub fn new(energy: BeamEnergy, grid: TransverseGrid, members: usize) -> Result<Self> {
        if members < 1 || members.is_multiple_of(2) {
            return config(format!("ensemble size must be odd and >= 1, got {members}"));
        }
        Ok(Self {
            energy,
            wavelength: de_broglie_wavelength(energy),
            grid,
            members,
        })
    }

    pub fn with_members(mut self, members: usize) -> Result<Self> {
        Self::new(self.energy, self.grid, members).map(|c| {
            self = c;
            self
        })
    }
}

/// Field just after G2: G1 transmission, free space over `z_sep`, G2 transmission.
pub fn transmitted_field(
    member: &WaveField,
    g1: &GratingSpec,
    z_sep: f64,
    g2: &GratingSpec,
) -> Result<WaveField> {
    let grid = member.grid();
    let t1 = build_transmission(g1, grid)?;
    let t2 = build_transmission(g2, grid)?;
    member.transmit(&t1)?.propagate(z_sep)?.transmit(&t2)
}

/// Flux through G2 at each lateral shift.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionCurve {
    pub z_sep: f64,
    pub shifts: Vec<f64>,
    pub flux: Vec<f64>,
}

impl TransmissionCurve {
    /// Flux divided by the curve maximum.
    pub fn normalized(&self) -> Vec<f64> {
        let max = self.flux.iter().cloned().fold(f64::MIN, f64::max);
        if max <= 0.0 {
            return vec![0.0; self.flux.len()];
        }
        self.flux.iter().map(|f| f / max).collect()
    }

    /// (max - min) / max.
    pub fn contrast(&self) -> f64 {
        let max = self.flux.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.flux.iter().cloned().fold(f64::MAX, f64::min);
        if max <= 0.0 {
            0.0
        } else {
            (max - min) / max
        }
    }

    pub fn argmax(&self) -> usize {
        argmax(&self.flux)
    }

    pub fn argmin(&self) -> usize {
        argmax(&self.flux.iter().map(|f| -f).collect::<Vec<_>>())
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold(
            (0, f64::MIN),
            |best, (i, &x)| if x > best.1 { (i, x) } else { best },
        )
        .0
}

/// Beam, gratings and numerical context of one interferometer configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interferometer {
    pub beam: GsmBeam,
    pub g1: GratingSpec,
    pub g2: GratingSpec,
    pub context: SimContext,
}

impl Interferometer {
    pub fn new(
        beam: GsmBeam,
        g1: GratingSpec,
        g2: GratingSpec,
        context: SimContext,
    ) -> Result<Self> {
        beam.validate()?;
        g1.validate()?;
        g2.validate()?;
        context.grid.require_resolution(g1.period)?;
        context.grid.require_resolution(g2.period)?;
        Ok(Self {
            beam,
            g1,
            g2,
            context,
        })
    }

    pub fn with_beam(mut self, beam: GsmBeam) -> Self {
        self.beam = beam;
        self
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.beam.radius = radius;
        self
    }

    pub fn wavelength(&self) -> Wavelength {
        self.context.wavelength
    }

    /// L_T of G1.
    pub fn talbot_distance(&self) -> f64 {
        talbot_distance(self.g1.period, self.context.wavelength).expect("validated period")
    }

    pub fn ensemble(&self) -> Result<Ensemble> {
        gsm_ensemble(
            &self.beam,
            &self.context.grid,
            self.context.wavelength,
            self.context.members,
        )
    }

    /// Per-member spectra just after G1, with their weights.
    fn after_g1(&self) -> Result<Vec<(f64, FresnelPropagator)>> {
        let ensemble = self.ensemble()?;
        let t1 = build_transmission(&self.g1, &self.context.grid)?;
        ensemble
            .members()
            .par_iter()
            .map(|m| Ok((m.weight, FresnelPropagator::new(&m.field.transmit(&t1)?))))
            .collect()
    }

    /// Ensemble-weighted near-field intensity behind G1 at each separation.
    /// Members are reduced in a fixed order, so the result does not depend on
    /// the thread count.
    pub fn near_field_intensities(&self, z_values: &[f64]) -> Result<Vec<Vec<f64>>> {
        let spectra = self.after_g1()?;
        z_values
            .par_iter()
            .map(|&z| {
                let profiles = spectra
                    .iter()
                    .map(|(w, p)| Ok((*w, p.field_at(z)?.intensity())))
                    .collect::<Result<Vec<_>>>()?;
                incoherent_intensity(&profiles)
            })
            .collect()
    }

    /// Matrix of fluxes through G2, rows indexed by separation and columns by G2 shift.
    pub(crate) fn flux_matrix(&self, z_values: &[f64], shifts: &[f64]) -> Result<Vec<Vec<f64>>> {
        let rows = self.near_field_intensities(z_values)?;
        let dx = self.context.grid.spacing();
        let columns: Vec<Vec<f64>> = shifts
            .par_iter()
            .map(|&shift| {
                let mask = open_mask(&self.g2.with_offset(shift), &self.context.grid)?;
                Ok(rows.iter().map(|row| dot(row, &mask) * dx).collect())
            })
            .collect::<Result<_>>()?;
        Ok((0..z_values.len())
            .map(|r| columns.iter().map(|c| c[r]).collect())
            .collect())
    }

    /// Ensemble flux just after G2 with G2 offset by `shift`.
    pub fn total_flux(&self, z_sep: f64, shift: f64) -> Result<f64> {
        Ok(self.flux_matrix(&[z_sep], &[shift])?[0][0])
    }

    /// Flux through G2 for each shift at one separation.
    pub fn moire_scan(&self, z_sep: f64, shifts: &[f64]) -> Result<TransmissionCurve> {
        if shifts.len() < 2 {
            return config("a moire scan needs at least two shifts");
        }
        let flux = self.flux_matrix(&[z_sep], shifts)?.remove(0);
        Ok(TransmissionCurve {
            z_sep,
            shifts: shifts.to_vec(),
            flux,
        })
    }

    /// Per-member fields just before G2 (after G1 and `z_sep` of free space).
    pub(crate) fn fields_at_g2(&self, z_sep: f64) -> Result<Vec<(f64, WaveField)>> {
        self.after_g1()?
            .par_iter()
            .map(|(w, p)| Ok((*w, p.field_at(z_sep)?)))
            .collect()
    }

    /// G2 transmission for a lateral shift.
    pub(crate) fn g2_transmission(&self, shift: f64) -> Result<Vec<Complex64>> {
        build_transmission(&self.g2.with_offset(shift), &self.context.grid)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
