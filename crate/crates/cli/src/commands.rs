//! The subcommands. Each reads a resolved config, runs the simulation inside
//! a dedicated thread pool, and writes its files after the parallel work has
//! been reduced.

use std::fs;
use std::path::{Path, PathBuf};

use talbot_core::{
    demagnified_period, demagnified_revival_plane, fit_wavefront_curvature, moire_beat_period,
    DemagSeries, Interferometer, SetupGeometry,
};

use crate::config::RunConfig;
use crate::error::{io_err, CliError, Result};
use crate::noise::{apply_noise, GENERATOR};
use crate::output::{
    num, read_frames, write_carpet_pgm, write_curve_csv, write_frames, write_table, Metadata,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Carpet,
    Moire,
    Farfield,
    Demag,
    Fit { frames: PathBuf },
    RevivalPeriod,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Carpet => "carpet",
            Self::Moire => "moire",
            Self::Farfield => "farfield",
            Self::Demag => "demag",
            Self::Fit { .. } => "fit",
            Self::RevivalPeriod => "revival-period",
        }
    }
}

/// Runs `command` with `threads` workers (rayon's default when `None`) and
/// returns a one-line summary.
pub fn run(
    command: &Command,
    config: &RunConfig,
    out: &Path,
    threads: Option<usize>,
) -> Result<String> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    fs::write(out.join("config.echo"), config.echo()).map_err(io_err(out.join("config.echo")))?;
    pool.install(|| match command {
        Command::Carpet => carpet(config, out),
        Command::Moire => moire(config, out),
        Command::Farfield => farfield(config, out),
        Command::Demag => demag(config, out),
        Command::Fit { frames } => fit(config, frames, out),
        Command::RevivalPeriod => revival_period(config, out),
    })
}

fn metadata(kind: &str, config: &RunConfig, ifm: &Interferometer) -> Metadata {
    Metadata::new(kind, &config.digest())
        .with("energy_kev", config.energy_kev)
        .with("wavelength_m", num(ifm.wavelength().metres()))
        .with("talbot_distance_m", num(ifm.talbot_distance()))
}

fn moire(config: &RunConfig, out: &Path) -> Result<String> {
    let ifm = config.interferometer()?;
    let z = config.z_sep(&ifm);
    let curve = ifm.moire_scan(z, &config.shifts())?;
    let meta = metadata("moire", config, &ifm)
        .with("z_sep_m", num(z))
        .with("contrast", num(curve.contrast()));
    write_curve_csv(&curve, &meta, &out.join("moire.csv"))?;
    Ok(format!(
        "moire: z_sep = {:.4} mm, contrast = {:.4}",
        z * 1e3,
        curve.contrast()
    ))
}

fn carpet(config: &RunConfig, out: &Path) -> Result<String> {
    let ifm = config.interferometer()?;
    let carpet = ifm.talbot_carpet(&config.scan_spec()?)?;
    let meta = metadata("carpet", config, &ifm);
    write_carpet_pgm(&carpet, &meta, &out.join("carpet.pgm"))?;
    let period = ifm.g2.period;
    let rows: Vec<Vec<f64>> = (0..carpet.rows())
        .map(|r| {
            let f = carpet.row_fundamental(r, period);
            vec![carpet.z_values[r], f.mean, f.contrast(), f.phase]
        })
        .collect();
    write_table(
        &out.join("carpet_rows.csv"),
        &meta,
        "z_m,mean_flux,contrast,phase_rad",
        &rows,
    )?;
    let cols: Vec<Vec<f64>> = carpet.x_values.iter().map(|x| vec![*x]).collect();
    write_table(&out.join("carpet_columns.csv"), &meta, "shift_m", &cols)?;
    let flux: Vec<Vec<f64>> = (0..carpet.rows())
        .flat_map(|r| {
            let carpet = &carpet;
            (0..carpet.cols())
                .map(move |c| vec![carpet.z_values[r], carpet.x_values[c], carpet.get(r, c)])
        })
        .collect();
    write_table(
        &out.join("carpet_flux.csv"),
        &meta,
        "z_m,shift_m,flux_fraction",
        &flux,
    )?;
    Ok(format!(
        "carpet: {} rows x {} columns",
        carpet.rows(),
        carpet.cols()
    ))
}

/// Rebins a series to the configured detector pixel and applies configured noise.
fn detector(config: &RunConfig, series: &DemagSeries) -> Result<(DemagSeries, usize)> {
    let pitch = series.frames[0].pitch();
    let factor = ((config.detector.pixel_um * 1e-6 / pitch).round() as usize).max(1);
    let binned = series.rebin(factor);
    Ok((
        apply_noise(&binned, config.noise.sigma_rel, config.noise.seed)?,
        factor,
    ))
}

fn detector_meta(meta: Metadata, config: &RunConfig, factor: usize, pitch: f64) -> Metadata {
    let meta = meta
        .with("pixel_m", num(pitch * factor as f64))
        .with("rebin_factor", factor);
    if config.noise.sigma_rel > 0.0 {
        meta.with("noise_sigma_rel", num(config.noise.sigma_rel))
            .with("noise_seed", config.noise.seed)
            .with("noise_generator", GENERATOR)
    } else {
        meta.with("noise_sigma_rel", "0")
    }
}

fn farfield(config: &RunConfig, out: &Path) -> Result<String> {
    let ifm = config.interferometer()?;
    let z = config.z_sep(&ifm);
    let geometry = SetupGeometry::new(z, config.detector.z_m)?;
    let series = ifm.farfield_series(
        geometry.z_sep,
        &[config.setup.shift_nm * 1e-9],
        geometry.z_det,
    )?;
    let pitch = series.frames[0].pitch();
    let (series, factor) = detector(config, &series)?;
    let meta = detector_meta(metadata("farfield", config, &ifm), config, factor, pitch)
        .with("z_sep_m", num(z))
        .with("z_det_m", num(geometry.z_det))
        .with("shift_m", num(series.shifts[0]));
    let frame = &series.frames[0];
    let rows: Vec<Vec<f64>> = frame
        .coordinates
        .iter()
        .zip(&frame.intensity)
        .map(|(x, v)| vec![*x, *v])
        .collect();
    write_table(
        &out.join("farfield.csv"),
        &meta,
        "x_m,intensity_per_m",
        &rows,
    )?;
    Ok(format!(
        "farfield: {} pixels, total flux {:.6}",
        frame.len(),
        frame.total
    ))
}

fn demag(config: &RunConfig, out: &Path) -> Result<String> {
    let ifm = config.interferometer()?;
    let z = config.z_sep(&ifm);
    let geometry = SetupGeometry::new(z, config.detector.z_m)?;
    let series =
        ifm.demag_farfield_series(geometry.z_sep, &config.demag_shifts(), geometry.z_det)?;
    let pitch = series.frames[0].pitch();
    let (series, factor) = detector(config, &series)?;
    let beat = moire_beat_period(ifm.g1.period, ifm.beam.radius, z);
    let meta = detector_meta(metadata("demag", config, &ifm), config, factor, pitch)
        .with("radius_m", num(ifm.beam.radius))
        .with("moire_beat_m", num(beat));
    let index = write_frames(&series, &meta, &out.join("frames"))?;
    Ok(format!(
        "demag: {} frames, moire beat {:.1} um, index {}",
        series.len(),
        beat * 1e6,
        index.display()
    ))
}

fn fit(config: &RunConfig, frames: &Path, out: &Path) -> Result<String> {
    let measured = read_frames(frames)?;
    if measured.len() < 3 {
        return Err(CliError::Usage(format!(
            "fit needs at least 3 frames, {} has {}",
            frames.display(),
            measured.len()
        )));
    }
    let ifm = config.interferometer()?;
    let result = fit_wavefront_curvature(&measured, &ifm, config.fit.r_min_m, config.fit.r_max_m)?;
    let meta = metadata("fit", config, &ifm)
        .with("frames", frames.display())
        .with(
            "search_m",
            format!("{} .. {}", num(config.fit.r_min_m), num(config.fit.r_max_m)),
        );
    write_table(
        &out.join("fit.csv"),
        &meta,
        "r_hat_m,r_uncertainty_m,converged",
        &[vec![
            result.r_hat,
            result.r_uncertainty,
            if result.converged { 1.0 } else { 0.0 },
        ]],
    )?;
    let curve: Vec<Vec<f64>> = result
        .objective_curve
        .iter()
        .map(|(r, v)| vec![*r, *v])
        .collect();
    write_table(&out.join("objective.csv"), &meta, "r_m,objective", &curve)?;
    Ok(format!(
        "fit: R = {:.4} +/- {:.4} m ({})",
        result.r_hat,
        result.r_uncertainty,
        if result.converged {
            "converged"
        } else {
            "minimum on search boundary"
        }
    ))
}

fn revival_period(config: &RunConfig, out: &Path) -> Result<String> {
    let ifm = config.interferometer()?;
    let r = ifm.beam.radius;
    let z = config.setup.z_sep_mm.map_or_else(
        || demagnified_revival_plane(ifm.talbot_distance(), r),
        |z| z * 1e-3,
    );
    let measured = ifm.revival_period(z)?;
    let predicted = demagnified_period(ifm.g1.period, r, z);
    let meta = metadata("revival-period", config, &ifm);
    write_table(
        &out.join("revival.csv"),
        &meta,
        "z_sep_m,radius_m,measured_period_m,predicted_period_m,relative_difference",
        &[vec![
            z,
            if r.is_finite() { r } else { 0.0 },
            measured,
            predicted,
            measured / predicted - 1.0,
        ]],
    )?;
    Ok(format!(
        "revival-period: measured {:.6} nm, predicted {:.6} nm at z = {:.5} mm",
        measured * 1e9,
        predicted * 1e9,
        z * 1e3
    ))
}
