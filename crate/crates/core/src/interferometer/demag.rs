use num_complex::Complex64;
use rayon::prelude::*;

use super::Interferometer;
use crate::coherence::gsm_ensemble;
use crate::error::{config, domain, Error, Result};
use crate::fft;
use crate::grating::build_transmission;
use crate::wavefield::{FarFieldFrame, FresnelPropagator};

/// Fringe visibility below this fraction of the mean intensity counts as no
/// revival at the plane.
const VISIBILITY_FLOOR: f64 = 5e-2;

/// Far-field frames recorded while G2 is stepped laterally.
#[derive(Debug, Clone, PartialEq)]
pub struct DemagSeries {
    pub z_sep: f64,
    pub z_det: f64,
    pub shifts: Vec<f64>,
    pub frames: Vec<FarFieldFrame>,
}

impl DemagSeries {
    pub fn new(
        z_sep: f64,
        z_det: f64,
        shifts: Vec<f64>,
        frames: Vec<FarFieldFrame>,
    ) -> Result<Self> {
        if shifts.len() != frames.len() {
            return Err(Error::LengthMismatch {
                expected: shifts.len(),
                actual: frames.len(),
            });
        }
        Ok(Self {
            z_sep,
            z_det,
            shifts,
            frames,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Every frame rebinned by `factor`.
    pub fn rebin(&self, factor: usize) -> Self {
        Self {
            frames: self.frames.iter().map(|f| f.rebin(factor)).collect(),
            ..self.clone()
        }
    }

    /// Every frame cropped to |x| <= half_width.
    pub fn cropped(&self, half_width: f64) -> Self {
        Self {
            frames: self.frames.iter().map(|f| f.cropped(half_width)).collect(),
            ..self.clone()
        }
    }
}

/// Period of the G1 revival at distance `z` behind G1 for wavefront radius `r`.
pub fn demagnified_period(period: f64, r: f64, z: f64) -> f64 {
    if r.is_infinite() {
        period
    } else {
        period * (r - z) / r
    }
}

/// Beat between the demagnified revival and an identical G2: d·(R − z)/z.
pub fn moire_beat_period(period: f64, r: f64, z: f64) -> f64 {
    if r.is_infinite() {
        f64::INFINITY
    } else {
        period * (r - z) / z
    }
}

/// Plane where the revival that sits at `collimated_distance` for a plane
/// wave appears when the wavefront radius is `r`.
pub fn demagnified_revival_plane(collimated_distance: f64, r: f64) -> f64 {
    if r.is_infinite() {
        collimated_distance
    } else {
        collimated_distance * r / (r + collimated_distance)
    }
}

impl Interferometer {
    /// Ensemble far-field intensity behind G2 for each lateral shift.
    pub fn farfield_series(&self, z_sep: f64, shifts: &[f64], z_det: f64) -> Result<DemagSeries> {
        if shifts.is_empty() {
            return config("a far-field series needs at least one shift");
        }
        let fields = self.fields_at_g2(z_sep)?;
        let frames = shifts
            .par_iter()
            .map(|&shift| {
                let t2 = self.g2_transmission(shift)?;
                let mut coordinates = Vec::new();
                let mut total: Vec<f64> = Vec::new();
                for (w, field) in &fields {
                    let frame = field.transmit(&t2)?.far_field(z_det)?;
                    if total.is_empty() {
                        total = vec![0.0; frame.len()];
                        coordinates = frame.coordinates;
                    }
                    for (t, v) in total.iter_mut().zip(&frame.intensity) {
                        *t += w * v;
                    }
                }
                Ok(FarFieldFrame::new(coordinates, total))
            })
            .collect::<Result<Vec<_>>>()?;
        DemagSeries::new(z_sep, z_det, shifts.to_vec(), frames)
    }

    /// [`Interferometer::farfield_series`] for a curved wavefront.
    pub fn demag_farfield_series(
        &self,
        z_sep: f64,
        shifts: &[f64],
        z_det: f64,
    ) -> Result<DemagSeries> {
        if !self.beam.radius.is_finite() {
            return domain("demagnified series needs a finite wavefront radius");
        }
        self.farfield_series(z_sep, shifts, z_det)
    }

    /// Local fringe period of the coherent near field at `z_sep` behind G1,
    /// measured near the beam centre.
    ///
    /// The intensity is Gaussian-windowed, so the fundamental peak of its
    /// spectrum is Gaussian and a parabola through the log magnitudes of the
    /// three highest bins locates it to well below one bin.
    pub fn revival_period(&self, z_sep: f64) -> Result<f64> {
        let grid = self.context.grid;
        let coherent = gsm_ensemble(&self.beam, &grid, self.context.wavelength, 1)?;
        let t1 = build_transmission(&self.g1, &grid)?;
        let near =
            FresnelPropagator::new(&coherent.central().field.transmit(&t1)?).field_at(z_sep)?;
        let window_radius = self.beam.width / 2.0;
        let mut buf: Vec<Complex64> = near
            .intensity()
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let u = (grid.x(j) - self.beam.center) / window_radius;
                Complex64::new(v * (-2.0 * u * u).exp(), 0.0)
            })
            .collect();
        fft::forward(&mut buf);
        let n = grid.len();
        let w = grid.window();
        let nominal = w / self.g1.period;
        let lo = ((0.5 * nominal).floor() as usize).max(2);
        let hi = ((1.5 * nominal).ceil() as usize).min(n / 2 - 2);
        let mag = |k: usize| buf[k].norm();
        let k = (lo..=hi)
            .max_by(|&a, &b| mag(a).total_cmp(&mag(b)))
            .expect("non-empty band");
        let visibility = 2.0 * mag(k) / buf[0].norm();
        if !(visibility >= VISIBILITY_FLOOR) {
            return Err(Error::NoRevival {
                z: z_sep,
                ratio: visibility / VISIBILITY_FLOOR,
            });
        }
        let (a, b, c) = (mag(k - 1).ln(), mag(k).ln(), mag(k + 1).ln());
        let denom = a - 2.0 * b + c;
        let offset = if denom < 0.0 {
            0.5 * (a - c) / denom
        } else {
            0.0
        };
        Ok(w / (k as f64 + offset))
    }
}

/// Position and depth of the intensity null inside one diffraction order, per frame.
///
/// Each frame is divided by the series mean so the beam envelope drops out;
/// the null is the sub-pixel minimum of that ratio over pixels within
/// `half_width` of `center` whose mean intensity exceeds `min_fraction` of the
/// window maximum. Frames whose minimum sits on the edge of that region have
/// no null inside the order and give `None`.
pub fn null_positions(
    series: &DemagSeries,
    center: f64,
    half_width: f64,
    min_fraction: f64,
) -> Vec<Option<(f64, f64)>> {
    let Some(first) = series.frames.first() else {
        return Vec::new();
    };
    let n = series.len() as f64;
    let idx: Vec<usize> = (0..first.len())
        .filter(|&i| (first.coordinates[i] - center).abs() <= half_width)
        .collect();
    let mean: Vec<f64> = idx
        .iter()
        .map(|&i| series.frames.iter().map(|f| f.intensity[i]).sum::<f64>() / n)
        .collect();
    let peak = mean.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..idx.len())
        .filter(|&j| mean[j] > min_fraction * peak)
        .collect();
    if keep.len() < 5 {
        return vec![None; series.len()];
    }
    // Bright region must be contiguous for edge detection to make sense.
    let (start, end) = (keep[0], keep[keep.len() - 1]);
    series
        .frames
        .iter()
        .map(|frame| {
            let ratio: Vec<f64> = (start..=end)
                .map(|j| frame.intensity[idx[j]] / mean[j].max(f64::MIN_POSITIVE))
                .collect();
            let m = (0..ratio.len()).min_by(|&a, &b| ratio[a].total_cmp(&ratio[b]))?;
            if m < 2 || m + 2 >= ratio.len() {
                return None;
            }
            let (a, b, c) = (ratio[m - 1], ratio[m], ratio[m + 1]);
            let denom = a - 2.0 * b + c;
            let offset = if denom > 0.0 {
                0.5 * (a - c) / denom
            } else {
                0.0
            };
            let x0 = first.coordinates[idx[start + m]];
            Some((x0 + offset * first.pitch(), b))
        })
        .collect()
}
