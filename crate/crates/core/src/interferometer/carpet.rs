use super::Interferometer;
use crate::coherence::GsmBeam;
use crate::error::{config, Result};
use crate::grating::GratingSpec;
use crate::physics::{BeamEnergy, ScanSpec, Wavelength};

/// Physical setup a carpet was simulated with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarpetSetup {
    pub energy: BeamEnergy,
    pub wavelength: Wavelength,
    pub g1: GratingSpec,
    pub g2: GratingSpec,
    pub beam: GsmBeam,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CarpetMetadata {
    /// `None` for carpets that did not come from a simulation.
    pub setup: Option<CarpetSetup>,
    /// Circular shift in samples applied to each row by alignment.
    pub row_shifts: Vec<i64>,
    /// Rows alignment skipped because they had no variance.
    pub flagged_rows: Vec<usize>,
}

/// Flux through G2 versus G1–G2 separation (rows) and G2 shift (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct CarpetImage {
    pub z_values: Vec<f64>,
    pub x_values: Vec<f64>,
    flux: Vec<f64>,
    pub metadata: CarpetMetadata,
}

/// Mean, amplitude and phase of the period-`d` Fourier component of a row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowFundamental {
    pub mean: f64,
    pub amplitude: f64,
    /// Phase in radians; the row is approximately mean + amplitude·cos(2πx/d − phase).
    pub phase: f64,
}

impl RowFundamental {
    /// amplitude / mean, zero for a dark row.
    pub fn contrast(&self) -> f64 {
        if self.mean > 0.0 {
            self.amplitude / self.mean
        } else {
            0.0
        }
    }
}

impl CarpetImage {
    pub fn new(z_values: Vec<f64>, x_values: Vec<f64>, flux: Vec<f64>) -> Result<Self> {
        if flux.len() != z_values.len() * x_values.len() {
            return config(format!(
                "carpet has {} values for {} rows x {} columns",
                flux.len(),
                z_values.len(),
                x_values.len()
            ));
        }
        if flux.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return config("carpet flux must be finite and non-negative");
        }
        Ok(Self {
            z_values,
            x_values,
            flux,
            metadata: CarpetMetadata::default(),
        })
    }

    pub fn rows(&self) -> usize {
        self.z_values.len()
    }

    pub fn cols(&self) -> usize {
        self.x_values.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.flux[r * c..(r + 1) * c]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.flux[r * self.cols() + c]
    }

    pub fn flux(&self) -> &[f64] {
        &self.flux
    }

    /// Least-squares fit of the period-`d` component of a row.
    pub fn row_fundamental(&self, r: usize, period: f64) -> RowFundamental {
        fit_fundamental(&self.x_values, self.row(r), period)
    }

    pub fn row_contrasts(&self, period: f64) -> Vec<f64> {
        (0..self.rows())
            .map(|r| self.row_fundamental(r, period).contrast())
            .collect()
    }
}

/// Fits y ≈ a + b cos(kx) + c sin(kx) with k = 2π/period.
fn fit_fundamental(x: &[f64], y: &[f64], period: f64) -> RowFundamental {
    let k = 2.0 * std::f64::consts::PI / period;
    // Normal equations of the 3-parameter linear model.
    let mut m = [[0.0; 3]; 3];
    let mut v = [0.0; 3];
    for (&xi, &yi) in x.iter().zip(y) {
        let basis = [1.0, (k * xi).cos(), (k * xi).sin()];
        for i in 0..3 {
            v[i] += basis[i] * yi;
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
        }
    }
    let [a, b, c] = solve3(m, v);
    RowFundamental {
        mean: a,
        amplitude: b.hypot(c),
        phase: c.atan2(b),
    }
}

fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        v.swap(col, pivot);
        if m[col][col] == 0.0 {
            return [0.0; 3];
        }
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            let pivot_row = m[col];
            for (j, value) in m[row].iter_mut().enumerate().skip(col) {
                *value -= f * pivot_row[j];
            }
            v[row] -= f * v[col];
        }
    }
    let mut out = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|j| m[i][j] * out[j]).sum();
        out[i] = (v[i] - s) / m[i][i];
    }
    out
}

impl Interferometer {
    /// Flux through G2 over every (separation, shift) point of the scan.
    pub fn talbot_carpet(&self, scan: &ScanSpec) -> Result<CarpetImage> {
        let z_values = scan.z_values();
        let x_values = scan.x_values();
        let matrix = self.flux_matrix(&z_values, &x_values)?;
        let mut carpet =
            CarpetImage::new(z_values, x_values, matrix.into_iter().flatten().collect())?;
        carpet.metadata.setup = Some(CarpetSetup {
            energy: self.context.energy,
            wavelength: self.context.wavelength,
            g1: self.g1,
            g2: self.g2,
            beam: self.beam,
        });
        Ok(carpet)
    }
}

/// Circular shift: out[j] = row[j - lag].
fn roll(row: &[f64], lag: i64) -> Vec<f64> {
    let n = row.len() as i64;
    (0..n)
        .map(|j| row[(j - lag).rem_euclid(n) as usize])
        .collect()
}

fn centered(row: &[f64]) -> Option<Vec<f64>> {
    let mean = row.iter().sum::<f64>() / row.len() as f64;
    let c: Vec<f64> = row.iter().map(|v| v - mean).collect();
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= 1e-14 * mean.abs().max(f64::MIN_POSITIVE) || norm == 0.0 {
        None
    } else {
        Some(c.into_iter().map(|v| v / norm).collect())
    }
}

/// Lag in [-n/2, n/2) maximizing normalized cross-correlation of `row` rolled
/// onto `reference`. Ties resolve to the smallest |lag|.
fn best_lag(reference: &[f64], row: &[f64]) -> i64 {
    let n = row.len() as i64;
    let mut best = (0i64, f64::MIN);
    let mut lags: Vec<i64> = (-n / 2..n - n / 2).collect();
    lags.sort_by_key(|l| (l.abs(), *l));
    for lag in lags {
        let score: f64 = (0..n)
            .map(|j| reference[j as usize] * row[(j - lag).rem_euclid(n) as usize])
            .sum();
        if score > best.1 + 1e-12 {
            best = (lag, score);
        }
    }
    best.0
}

/// Lines up each row with the previous aligned row by whole-sample circular shifts.
pub fn align_carpet_rows(raw: &CarpetImage) -> Result<CarpetImage> {
    if raw.rows() < 2 {
        return config("alignment needs at least two rows");
    }
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(raw.rows());
    let mut shifts = vec![0i64; raw.rows()];
    let mut flagged = Vec::new();
    let mut reference: Option<Vec<f64>> = None;
    for (r, shift) in shifts.iter_mut().enumerate() {
        let row = raw.row(r);
        match centered(row) {
            None => {
                flagged.push(r);
                rows.push(row.to_vec());
            }
            Some(normed) => {
                let lag = reference
                    .as_ref()
                    .map_or(0, |reference| best_lag(reference, &normed));
                *shift = lag;
                reference = Some(roll(&normed, lag));
                rows.push(roll(row, lag));
            }
        }
    }
    let mut out = CarpetImage::new(raw.z_values.clone(), raw.x_values.clone(), rows.concat())?;
    out.metadata = CarpetMetadata {
        setup: raw.metadata.setup,
        row_shifts: shifts,
        flagged_rows: flagged,
    };
    Ok(out)
}
