//! One-dimensional sampled wave fields and the operators that move them
//! between planes: paraxial free-space propagation, spherical curvature,
//! and the single-transform mapping onto a distant detector.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{config, domain, Error, Result};
use crate::fft;
use crate::physics::Wavelength;

/// Periodic transverse sampling grid. Sample `j` sits at `x_j = (j - n/2) * spacing`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseGrid {
    window: f64,
    n: usize,
    spacing: f64,
}

impl TransverseGrid {
    pub const MIN_SAMPLES: usize = 1024;

    pub fn new(window: f64, n: usize) -> Result<Self> {
        if !(window.is_finite() && window > 0.0) {
            return config(format!("grid window must be positive, got {window} m"));
        }
        if !n.is_power_of_two() {
            return config(format!("grid sample count must be a power of two, got {n}"));
        }
        if n < Self::MIN_SAMPLES {
            return config(format!(
                "grid needs at least {} samples, got {n}",
                Self::MIN_SAMPLES
            ));
        }
        Ok(Self {
            window,
            n,
            spacing: window / n as f64,
        })
    }

    /// 327.68 µm window, 2^16 samples: 5 nm spacing, 20 samples per 100 nm period.
    pub fn paper() -> Self {
        Self::new(327.68e-6, 1 << 16).expect("paper grid preset is valid")
    }

    /// 25.6 µm window, 2^13 samples: 3.125 nm spacing, 32 samples per 100 nm period.
    ///
    /// Whole samples per period keep point-sampled slits identical from one
    /// period to the next; a 20 µm window (40.96 samples per period) aliases
    /// enough to leak about 1.5% of the flux into the moiré minimum.
    pub fn test_scale() -> Self {
        Self::new(25.6e-6, 1 << 13).expect("test grid preset is valid")
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.spacing
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Signed spatial frequency of FFT bin `k`, in 1/m.
    pub fn frequency(&self, k: usize) -> f64 {
        fft::signed_index(k, self.n) as f64 / self.window
    }

    /// Checks that a structure of the given period is sampled at least 16 times per period.
    pub fn require_resolution(&self, period: f64) -> Result<()> {
        if self.spacing > period / 16.0 {
            return config(format!(
                "grid spacing {:.4e} m is too coarse for period {period:.4e} m (need <= period/16)",
                self.spacing
            ));
        }
        Ok(())
    }
}

/// Complex transverse amplitude on a grid at a given propagation plane.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    grid: TransverseGrid,
    amplitudes: Vec<Complex64>,
    wavelength: Wavelength,
    z: f64,
}

impl WaveField {
    pub fn new(
        grid: TransverseGrid,
        amplitudes: Vec<Complex64>,
        wavelength: Wavelength,
        z: f64,
    ) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: amplitudes.len(),
            });
        }
        if amplitudes
            .iter()
            .any(|a| !(a.re.is_finite() && a.im.is_finite()))
        {
            return domain("field amplitudes must be finite");
        }
        Ok(Self {
            grid,
            amplitudes,
            wavelength,
            z,
        })
    }

    /// Unit-amplitude plane wave at normal incidence.
    pub fn plane_wave(grid: TransverseGrid, wavelength: Wavelength) -> Self {
        Self {
            grid,
            amplitudes: vec![Complex64::new(1.0, 0.0); grid.len()],
            wavelength,
            z: 0.0,
        }
    }

    /// Gaussian beam with the given 1/e² intensity radius, centred at `center`.
    pub fn gaussian(
        grid: TransverseGrid,
        wavelength: Wavelength,
        radius: f64,
        center: f64,
    ) -> Self {
        let amplitudes = (0..grid.len())
            .map(|j| {
                let u = (grid.x(j) - center) / radius;
                Complex64::new((-u * u).exp(), 0.0)
            })
            .collect();
        Self {
            grid,
            amplitudes,
            wavelength,
            z: 0.0,
        }
    }

    pub fn grid(&self) -> &TransverseGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn wavelength(&self) -> Wavelength {
        self.wavelength
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Σ |a|² · spacing.
    pub fn flux(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.spacing
    }

    /// Scales the amplitudes so the flux is one. A zero field is returned unchanged.
    pub fn normalized(&self) -> Self {
        let flux = self.flux();
        if flux == 0.0 {
            return self.clone();
        }
        let s = flux.sqrt().recip();
        self.map_amplitudes(|_, a| a * s)
    }

    /// Pointwise product with a transmission profile on the same grid.
    pub fn transmit(&self, transmission: &[Complex64]) -> Result<Self> {
        if transmission.len() != self.grid.len() {
            return Err(Error::LengthMismatch {
                expected: self.grid.len(),
                actual: transmission.len(),
            });
        }
        Ok(self.map_amplitudes(|j, a| a * transmission[j]))
    }

    pub(crate) fn map_amplitudes(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(j, &a)| f(j, a))
            .collect();
        Self {
            grid: self.grid,
            amplitudes,
            wavelength: self.wavelength,
            z: self.z,
        }
    }

    /// Paraxial free-space propagation by `dz >= 0`.
    pub fn propagate(&self, dz: f64) -> Result<Self> {
        FresnelPropagator::new(self).field_at(dz)
    }

    /// Multiplies by exp(-i k x² / 2r). `r > 0` converges towards a focus `r`
    /// downstream, `r < 0` diverges, `r = ±inf` is the identity.
    pub fn apply_curvature(&self, r: f64) -> Result<Self> {
        self.apply_curvature_about(r, 0.0)
    }

    /// As [`WaveField::apply_curvature`], with the sphere centred on `x = center`.
    pub fn apply_curvature_about(&self, r: f64, center: f64) -> Result<Self> {
        if r == 0.0 || r.is_nan() {
            return domain("radius of curvature must be non-zero");
        }
        if r.is_infinite() {
            return Ok(self.clone());
        }
        let k = self.wavelength.wavenumber();
        let grid = self.grid;
        Ok(self.map_amplitudes(|j, a| {
            let x = grid.x(j) - center;
            a * Complex64::cis(-k * x * x / (2.0 * r))
        }))
    }

    /// Intensity on a detector `z_det` downstream.
    ///
    /// Uses the single-transform Fresnel integral: multiply by the quadratic
    /// phase exp(iπx²/λz), Fourier transform, and map frequency f to
    /// x_det = λ z f. Each diffraction order therefore lands as a spot of the
    /// geometric beam size rather than as a pixel-limited peak. The result is
    /// normalized so that Σ intensity · pitch equals the field flux.
    pub fn far_field(&self, z_det: f64) -> Result<FarFieldFrame> {
        if !(z_det.is_finite() && z_det > 0.0) {
            return domain(format!("detector distance must be positive, got {z_det} m"));
        }
        let lambda = self.wavelength.metres();
        // The quadratic phase must be sampled below Nyquist at the window edge.
        let min_distance = self.grid.window * self.grid.spacing / lambda;
        if z_det < min_distance {
            return config(format!(
                "detector distance {z_det} m is below the single-transform limit {min_distance:.3e} m for this grid"
            ));
        }
        let chirp = PI / (lambda * z_det);
        let grid = self.grid;
        let buf: Vec<Complex64> = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(j, &a)| {
                let x = grid.x(j);
                a * Complex64::cis(chirp * x * x)
            })
            .collect();
        Ok(self.detector_frame(buf, z_det))
    }

    /// Fraunhofer limit of [`WaveField::far_field`]: no quadratic phase, the
    /// detector intensity is the scaled power spectrum of the amplitudes.
    pub fn fraunhofer(&self, z_det: f64) -> Result<FarFieldFrame> {
        if !(z_det.is_finite() && z_det > 0.0) {
            return domain(format!("detector distance must be positive, got {z_det} m"));
        }
        Ok(self.detector_frame(self.amplitudes.clone(), z_det))
    }

    fn detector_frame(&self, mut buf: Vec<Complex64>, z_det: f64) -> FarFieldFrame {
        fft::forward(&mut buf);
        let n = self.grid.len();
        let lambda = self.wavelength.metres();
        let pitch = lambda * z_det / self.grid.window;
        let scale = self.grid.spacing * self.grid.spacing / (lambda * z_det);
        // Reorder from wrap-around to ascending frequency.
        let half = n / 2;
        let mut coordinates = Vec::with_capacity(n);
        let mut intensity = Vec::with_capacity(n);
        for i in 0..n {
            let k = (i + half) % n;
            coordinates.push((i as f64 - half as f64) * pitch);
            intensity.push(buf[k].norm_sqr() * scale);
        }
        FarFieldFrame::new(coordinates, intensity)
    }
}

/// Holds the spectrum of a field so it can be evaluated at many distances
/// for the cost of one inverse transform each.
#[derive(Debug, Clone)]
pub struct FresnelPropagator {
    grid: TransverseGrid,
    wavelength: Wavelength,
    z0: f64,
    spectrum: Vec<Complex64>,
}

impl FresnelPropagator {
    pub fn new(field: &WaveField) -> Self {
        let mut spectrum = field.amplitudes.clone();
        fft::forward(&mut spectrum);
        Self {
            grid: field.grid,
            wavelength: field.wavelength,
            z0: field.z,
            spectrum,
        }
    }

    /// Field `dz` downstream of the source plane. Each frequency component is
    /// multiplied by exp(-iπ λ dz f²); the piston exp(ik dz) is dropped.
    pub fn field_at(&self, dz: f64) -> Result<WaveField> {
        if !(dz >= 0.0 && dz.is_finite()) {
            return domain(format!(
                "propagation distance must be finite and non-negative, got {dz} m"
            ));
        }
        let mut buf = self.spectrum.clone();
        if dz > 0.0 {
            let a = -PI * self.wavelength.metres() * dz;
            for (k, v) in buf.iter_mut().enumerate() {
                let f = self.grid.frequency(k);
                *v *= Complex64::cis(a * f * f);
            }
        }
        fft::inverse(&mut buf);
        Ok(WaveField {
            grid: self.grid,
            amplitudes: buf,
            wavelength: self.wavelength,
            z: self.z0 + dz,
        })
    }
}

/// Detector-plane intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldFrame {
    /// Detector positions, ascending, m.
    pub coordinates: Vec<f64>,
    /// Intensity per unit detector length.
    pub intensity: Vec<f64>,
    /// Σ intensity · pitch.
    pub total: f64,
}

impl FarFieldFrame {
    pub fn new(coordinates: Vec<f64>, intensity: Vec<f64>) -> Self {
        let pitch = pitch_of(&coordinates);
        let total = intensity.iter().sum::<f64>() * pitch;
        Self {
            coordinates,
            intensity,
            total,
        }
    }

    pub fn len(&self) -> usize {
        self.intensity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensity.is_empty()
    }

    pub fn pitch(&self) -> f64 {
        pitch_of(&self.coordinates)
    }

    /// Sums groups of `factor` adjacent pixels into one, preserving `total`.
    /// Trailing pixels that do not fill a group are dropped.
    pub fn rebin(&self, factor: usize) -> Self {
        assert!(factor >= 1, "rebin factor must be at least 1");
        if factor == 1 {
            return self.clone();
        }
        let groups = self.len() / factor;
        let mut coordinates = Vec::with_capacity(groups);
        let mut intensity = Vec::with_capacity(groups);
        for g in 0..groups {
            let span = g * factor..(g + 1) * factor;
            coordinates.push(self.coordinates[span.clone()].iter().sum::<f64>() / factor as f64);
            intensity.push(self.intensity[span].iter().sum::<f64>() / factor as f64);
        }
        Self::new(coordinates, intensity)
    }

    /// Keeps only pixels with |x| <= half_width.
    pub fn cropped(&self, half_width: f64) -> Self {
        let (c, i): (Vec<f64>, Vec<f64>) = self
            .coordinates
            .iter()
            .zip(&self.intensity)
            .filter(|(x, _)| x.abs() <= half_width)
            .map(|(&x, &v)| (x, v))
            .unzip();
        Self::new(c, i)
    }

    /// Intensity rescaled to unit integral. A zero frame is returned unchanged.
    pub fn normalized_intensity(&self) -> Vec<f64> {
        if self.total == 0.0 {
            return self.intensity.clone();
        }
        self.intensity.iter().map(|v| v / self.total).collect()
    }

    /// Linear interpolation of the intensity at `x`; zero outside the frame.
    pub fn intensity_at(&self, x: f64) -> f64 {
        let c = &self.coordinates;
        if c.is_empty() || x < c[0] || x > c[c.len() - 1] {
            return 0.0;
        }
        let i = c.partition_point(|&v| v <= x).min(c.len() - 1).max(1);
        let (x0, x1) = (c[i - 1], c[i]);
        let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
        self.intensity[i - 1] * (1.0 - t) + self.intensity[i] * t
    }

    /// Integrated intensity over detector positions below `-half_gap`,
    /// between `±half_gap`, and above `+half_gap`.
    pub fn split_sums(&self, half_gap: f64) -> (f64, f64, f64) {
        let pitch = self.pitch();
        let (mut neg, mut mid, mut pos) = (0.0, 0.0, 0.0);
        for (&x, &v) in self.coordinates.iter().zip(&self.intensity) {
            if x < -half_gap {
                neg += v;
            } else if x > half_gap {
                pos += v;
            } else {
                mid += v;
            }
        }
        (neg * pitch, mid * pitch, pos * pitch)
    }
}

fn pitch_of(coordinates: &[f64]) -> f64 {
    match coordinates {
        [] | [_] => 1.0,
        [first, .., last] => (last - first) / (coordinates.len() - 1) as f64,
    }
}
