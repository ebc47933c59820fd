use rayon::prelude::*;

use super::{DemagSeries, Interferometer};
use crate::error::{config, Error, Result};
use crate::wavefield::FarFieldFrame;

const COARSE_CANDIDATES: usize = 25;
/// Golden-section refinement stops when the bracket is this narrow relative to R.
const RELATIVE_WIDTH: f64 = 1e-3;
/// Objective level, relative to the minimum, that bounds the uncertainty interval.
const UNCERTAINTY_LEVEL: f64 = 1.05;

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub r_hat: f64,
    pub r_uncertainty: f64,
    /// Every (R, objective) pair evaluated, sorted by R.
    pub objective_curve: Vec<(f64, f64)>,
    /// False when the minimum sits on an end of the search interval.
    pub converged: bool,
}

/// Σ over frames of squared pointwise differences between unit-integral
/// measured frames and the simulated frames sampled at the measured pixels.
pub fn frame_objective(measured: &[FarFieldFrame], simulated: &[FarFieldFrame]) -> Result<f64> {
    if measured.len() != simulated.len() {
        return Err(Error::LengthMismatch {
            expected: measured.len(),
            actual: simulated.len(),
        });
    }
    let mut total = 0.0;
    for (m, s) in measured.iter().zip(simulated) {
        let factor = ((m.pitch() / s.pitch()).round() as usize).max(1);
        let s = s.rebin(factor);
        let sampled = FarFieldFrame::new(
            m.coordinates.clone(),
            m.coordinates.iter().map(|&x| s.intensity_at(x)).collect(),
        );
        let mn = m.normalized_intensity();
        let sn = sampled.normalized_intensity();
        total += mn
            .iter()
            .zip(&sn)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    Ok(total)
}

impl Interferometer {
    /// Objective of the measured series against a simulation at radius `r`.
    pub fn curvature_objective(&self, measured: &DemagSeries, r: f64) -> Result<f64> {
        let simulated = self.with_radius(r).farfield_series(
            measured.z_sep,
            &measured.shifts,
            measured.z_det,
        )?;
        let value = frame_objective(&measured.frames, &simulated.frames)?;
        if !value.is_finite() {
            return Err(Error::NonFiniteObjective { radius: r });
        }
        Ok(value)
    }
}

/// Fits the wavefront radius of `model`'s beam to a measured frame series.
///
/// A log-spaced coarse grid locates the basin, golden-section search in ln R
/// refines it, and the uncertainty is the half-width of the interval where
/// the objective stays below 1.05 times its minimum.
pub fn fit_wavefront_curvature(
    measured: &DemagSeries,
    model: &Interferometer,
    r_min: f64,
    r_max: f64,
) -> Result<FitResult> {
    if measured.len() < 3 {
        return config(format!(
            "curvature fit needs at least 3 frames, got {}",
            measured.len()
        ));
    }
    if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
        return config(format!(
            "search interval must satisfy 0 < r_min < r_max, got ({r_min}, {r_max})"
        ));
    }
    let (lo, hi) = (r_min.ln(), r_max.ln());
    let step = (hi - lo) / (COARSE_CANDIDATES - 1) as f64;
    let objective = |ln_r: f64| model.curvature_objective(measured, ln_r.exp());

    let coarse: Vec<(f64, f64)> = (0..COARSE_CANDIDATES)
        .into_par_iter()
        .map(|i| {
            let t = lo + step * i as f64;
            objective(t).map(|v| (t, v))
        })
        .collect::<Result<_>>()?;
    let mut curve = coarse.clone();
    let best = (0..coarse.len())
        .min_by(|&a, &b| coarse[a].1.total_cmp(&coarse[b].1))
        .unwrap();

    let converged = best != 0 && best != coarse.len() - 1;
    let (t_hat, f_hat) = if converged {
        golden_section(
            coarse[best - 1].0,
            coarse[best + 1].0,
            &objective,
            &mut curve,
        )?
    } else {
        coarse[best]
    };

    let threshold = UNCERTAINTY_LEVEL * f_hat;
    let left = crossing(t_hat, lo, threshold, &objective, &mut curve, -1.0)?;
    let right = crossing(t_hat, hi, threshold, &objective, &mut curve, 1.0)?;

    curve.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(FitResult {
        r_hat: t_hat.exp(),
        r_uncertainty: 0.5 * (right.exp() - left.exp()),
        objective_curve: curve.into_iter().map(|(t, v)| (t.exp(), v)).collect(),
        converged,
    })
}

fn golden_section(
    mut a: f64,
    mut b: f64,
    f: &impl Fn(f64) -> Result<f64>,
    curve: &mut Vec<(f64, f64)>,
) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let eval = |t: f64, curve: &mut Vec<(f64, f64)>| -> Result<f64> {
        let v = f(t)?;
        curve.push((t, v));
        Ok(v)
    };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c, curve)?;
    let mut fd = eval(d, curve)?;
    // In ln R, a bracket width w is a relative width of about w.
    while b - a > RELATIVE_WIDTH {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c, curve)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d, curve)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// ln R where the objective climbs through `threshold` on one side of the
/// minimum, or the search edge when it never does.
fn crossing(
    t_hat: f64,
    edge: f64,
    threshold: f64,
    f: &impl Fn(f64) -> Result<f64>,
    curve: &mut Vec<(f64, f64)>,
    direction: f64,
) -> Result<f64> {
    // Nearest evaluated point on this side that is already above threshold.
    let outside = curve
        .iter()
        .filter(|(t, v)| (t - t_hat) * direction > 0.0 && *v > threshold)
        .min_by(|a, b| ((a.0 - t_hat).abs()).total_cmp(&(b.0 - t_hat).abs()))
        .map(|p| p.0);
    let Some(mut outer) = outside else {
        return Ok(edge);
    };
    // Start from the closest point known to be inside.
    let mut inner = curve
        .iter()
        .filter(|(t, v)| {
            (t - t_hat) * direction >= 0.0 && (t - outer) * direction < 0.0 && *v <= threshold
        })
        .max_by(|a, b| ((a.0 - t_hat).abs()).total_cmp(&(b.0 - t_hat).abs()))
        .map_or(t_hat, |p| p.0);
    while (outer - inner).abs() > RELATIVE_WIDTH {
        let mid = 0.5 * (inner + outer);
        let v = f(mid)?;
        curve.push((mid, v));
        if v > threshold {
            outer = mid;
        } else {
            inner = mid;
        }
    }
    Ok(0.5 * (inner + outer))
}
