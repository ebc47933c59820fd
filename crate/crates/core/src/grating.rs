//! Nanograting transmission functions and their Fourier orders.
//!
//! A grating is a thin amplitude mask: zero under the bars, unit modulus in
//! the slits. An optional one-wall phase imprints the asymmetric image-charge
//! interaction that makes negative diffraction orders brighter than positive
//! ones.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{config, Result};
use crate::wavefield::TransverseGrid;

/// Phase imprinted inside each slit: φ(ξ) = min(β / (w/2 - ξ), φ_max),
/// applied as a delay, t = exp(-iφ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitPhaseModel {
    /// Strength β of the inverse-distance phase, rad·m.
    pub beta: f64,
    /// Clamp near the wall, rad.
    pub phi_max: f64,
    pub enabled: bool,
}

impl SlitPhaseModel {
    pub const DEFAULT_PHI_MAX: f64 = 4.0 * PI;

    /// β that makes |c₋₁|²/|c₊₁|² ≈ 1.5 for the 100 nm / 50 nm grating.
    pub const ASYMMETRY_BETA: f64 = 1.26e-9;

    pub fn disabled() -> Self {
        Self {
            beta: 0.0,
            phi_max: Self::DEFAULT_PHI_MAX,
            enabled: false,
        }
    }

    pub fn new(beta: f64, phi_max: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return config(format!(
                "image-charge strength must be >= 0, got {beta} rad m"
            ));
        }
        if !(phi_max.is_finite() && phi_max > 0.0) {
            return config(format!("phase clamp must be positive, got {phi_max} rad"));
        }
        Ok(Self {
            beta,
            phi_max,
            enabled: beta > 0.0,
        })
    }

    /// Phase at local slit coordinate `xi`, for a slit of half-width `half`.
    pub fn phase(&self, xi: f64, half: f64) -> f64 {
        if !self.enabled || self.beta == 0.0 {
            return 0.0;
        }
        let gap = half - xi;
        if gap <= 0.0 {
            return self.phi_max;
        }
        (self.beta / gap).min(self.phi_max)
    }

    fn is_active(&self) -> bool {
        self.enabled && self.beta > 0.0
    }
}

impl Default for SlitPhaseModel {
    fn default() -> Self {
        Self::disabled()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingSpec {
    /// Period d, m.
    pub period: f64,
    /// Slit width w, m.
    pub open_width: f64,
    /// Membrane thickness, m. Not used by the thin-mask model.
    pub thickness: f64,
    pub phase: SlitPhaseModel,
    /// Lateral translation of the whole grating along x, m.
    pub lateral_offset: f64,
}

impl GratingSpec {
    pub fn new(period: f64, open_width: f64) -> Result<Self> {
        let spec = Self {
            period,
            open_width,
            thickness: 150e-9,
            phase: SlitPhaseModel::disabled(),
            lateral_offset: 0.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// 100 nm period, 50 nm slits, 150 nm membrane.
    pub fn nanograting() -> Self {
        Self::new(100e-9, 50e-9).expect("default grating is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period.is_finite() && self.period > 0.0) {
            return config(format!(
                "grating period must be positive, got {} m",
                self.period
            ));
        }
        if !(self.open_width > 0.0 && self.open_width < self.period) {
            return config(format!(
                "slit width must satisfy 0 < w < d, got w = {} m, d = {} m",
                self.open_width, self.period
            ));
        }
        if !self.lateral_offset.is_finite() {
            return config("grating offset must be finite");
        }
        SlitPhaseModel::new(self.phase.beta, self.phase.phi_max).map(|_| ())
    }

    pub fn with_phase(mut self, phase: SlitPhaseModel) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.lateral_offset = offset;
        self
    }

    pub fn open_fraction(&self) -> f64 {
        self.open_width / self.period
    }

    /// Period mean of |t|².
    pub fn mean_transmitted_intensity(&self) -> f64 {
        self.open_fraction()
    }

    /// Slit-local coordinate ξ of `x`, or `None` under a bar.
    ///
    /// Positions are snapped to a 2⁻³⁰ lattice in units of the period so that
    /// a sample lying on a slit edge is classified the same way for every
    /// offset that differs by whole periods.
    fn slit_coordinate(&self, x: f64) -> Option<f64> {
        const Q: f64 = (1u64 << 30) as f64;
        let u = (x - self.lateral_offset) / self.period;
        let frac = ((u - u.round()) * Q).round() / Q;
        let half = (0.5 * self.open_fraction() * Q).round() / Q;
        (frac >= -half && frac < half).then_some(frac * self.period)
    }

    /// Transmission at a single position.
    pub fn transmission_at(&self, x: f64) -> Complex64 {
        match self.slit_coordinate(x) {
            None => Complex64::new(0.0, 0.0),
            Some(xi) => Complex64::cis(-self.phase.phase(xi, 0.5 * self.open_width)),
        }
    }

    /// |t|² at a single position: 1 in a slit, 0 under a bar.
    pub fn is_open(&self, x: f64) -> bool {
        self.slit_coordinate(x).is_some()
    }
}

/// Samples the transmission of `spec` at every grid point.
pub fn build_transmission(spec: &GratingSpec, grid: &TransverseGrid) -> Result<Vec<Complex64>> {
    spec.validate()?;
    if grid.spacing() > spec.open_width / 8.0 {
        return config(format!(
            "grid spacing {:.4e} m does not resolve {:.4e} m slits (need <= w/8)",
            grid.spacing(),
            spec.open_width
        ));
    }
    Ok((0..grid.len())
        .map(|j| spec.transmission_at(grid.x(j)))
        .collect())
}

/// |t|² sampled on the grid, for flux calculations where the slit phase drops out.
pub fn open_mask(spec: &GratingSpec, grid: &TransverseGrid) -> Result<Vec<f64>> {
    Ok(build_transmission(spec, grid)?
        .iter()
        .map(|t| t.norm_sqr())
        .collect())
}

/// Fourier coefficients c_n, n = -n_max..=n_max.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierOrders {
    n_max: usize,
    coefficients: Vec<Complex64>,
}

impl FourierOrders {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn get(&self, n: i64) -> Complex64 {
        assert!(
            n.unsigned_abs() as usize <= self.n_max,
            "order {n} outside ±{}",
            self.n_max
        );
        self.coefficients[(n + self.n_max as i64) as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n_max = self.n_max as i64;
        self.coefficients
            .iter()
            .enumerate()
            .map(move |(i, &c)| (i as i64 - n_max, c))
    }

    /// Σ |c_n|² over the stored orders.
    pub fn power(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }
}

// 8-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// c_n = (1/d) ∫ t(ξ) exp(-2πi n ξ / d) dξ over one period.
///
/// Composite 8-point Gauss-Legendre over the slit, on panels no wider than
/// d / max(256, 4 n_max) (at least 2048 nodes per period), refined
/// geometrically towards the phase wall when the slit phase is active.
pub fn fourier_orders(spec: &GratingSpec, n_max: usize) -> Result<FourierOrders> {
    spec.validate()?;
    if n_max < 1 {
        return config("need at least one order on each side");
    }
    let d = spec.period;
    let half = 0.5 * spec.open_width;
    let panels_per_period = 256.max(4 * n_max);
    let step = d / panels_per_period as f64;

    let mut breaks: Vec<f64> = Vec::new();
    let uniform = (spec.open_width / step).ceil() as usize;
    for i in 0..=uniform {
        breaks.push((-half + i as f64 * step).min(half));
    }
    if spec.phase.is_active() {
        // Distances from the +w/2 wall: clamp point, then ratio-1.15 growth.
        let clamp = spec.phase.beta / spec.phase.phi_max;
        let mut u = clamp.min(spec.open_width);
        breaks.push(half - u);
        while u < spec.open_width {
            u *= 1.15;
            breaks.push(half - u.min(spec.open_width));
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-18 * d);

    // Quadrature nodes with weight · t(ξ) / d folded in.
    let mut nodes: Vec<(f64, Complex64)> = Vec::with_capacity(8 * breaks.len());
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (mid, rad) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
            let xi = mid + rad * x;
            let t = Complex64::cis(-spec.phase.phase(xi, half));
            nodes.push((xi, t * (w * rad / d)));
        }
    }

    let n_max_i = n_max as i64;
    let mut coefficients = vec![Complex64::new(0.0, 0.0); 2 * n_max + 1];
    for &(xi, wt) in &nodes {
        let step = Complex64::cis(-2.0 * PI * xi / d);
        let mut phasor = Complex64::cis(2.0 * PI * n_max_i as f64 * xi / d);
        for c in coefficients.iter_mut() {
            *c += wt * phasor;
            phasor *= step;
        }
    }
    // Translate from slit-centred coordinates to the grating offset.
    for (i, c) in coefficients.iter_mut().enumerate() {
        let n = i as i64 - n_max_i;
        *c *= Complex64::cis(-2.0 * PI * n as f64 * spec.lateral_offset / d);
    }
    Ok(FourierOrders {
        n_max,
        coefficients,
    })
}
