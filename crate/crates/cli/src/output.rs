//! Deterministic CSV and plain PGM output, and the frame-stack reader.
//!
//! Numbers are written with `{:e}`, Rust's shortest exponent form that parses
//! back to the identical `f64`. Nothing time- or host-dependent is recorded,
//! so identical inputs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use talbot_core::{CarpetImage, DemagSeries, FarFieldFrame, TransmissionCurve};

use crate::error::{io_err, CliError, Result};

/// `# key = value` lines written at the top of every file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(kind: &str, config_digest: &str) -> Self {
        Self::default()
            .with("output", kind)
            .with("config_sha256", config_digest)
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn render(&self, out: &mut String) {
        for (k, v) in &self.entries {
            let _ = writeln!(out, "# {k} = {v}");
        }
    }
}

pub fn num(v: f64) -> String {
    format!("{v:e}")
}

fn ensure_finite(path: &Path, what: &str, values: impl IntoIterator<Item = f64>) -> Result<()> {
    for (i, v) in values.into_iter().enumerate() {
        if !v.is_finite() {
            return Err(CliError::NonFinite {
                path: path.to_path_buf(),
                what: format!("{what} at index {i}"),
            });
        }
    }
    Ok(())
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, content).map_err(io_err(path))
}

/// Writes a table of numbers under a header such as `z_m,flux`.
pub fn write_table(path: &Path, meta: &Metadata, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    let columns: Vec<&str> = header.split(',').collect();
    for (r, row) in rows.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            if !v.is_finite() {
                let name = columns.get(c).copied().unwrap_or("?");
                return Err(CliError::NonFinite {
                    path: path.to_path_buf(),
                    what: format!("column {name}, row {r}"),
                });
            }
        }
    }
    let mut out = String::new();
    meta.render(&mut out);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| num(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    write_file(path, &out)
}

/// Moiré transmission curve: shift in nm, raw flux, flux normalized to the maximum.
pub fn write_curve_csv(curve: &TransmissionCurve, meta: &Metadata, path: &Path) -> Result<()> {
    let normalized = curve.normalized();
    let rows: Vec<Vec<f64>> = curve
        .shifts
        .iter()
        .zip(&curve.flux)
        .zip(&normalized)
        .map(|((s, f), n)| vec![s * 1e9, *f, *n])
        .collect();
    write_table(path, meta, "shift_nm,flux_fraction,normalized_flux", &rows)
}

fn write_frame(frame: &FarFieldFrame, meta: &Metadata, path: &Path) -> Result<()> {
    let rows: Vec<Vec<f64>> = frame
        .coordinates
        .iter()
        .zip(&frame.intensity)
        .map(|(x, v)| vec![*x, *v])
        .collect();
    write_table(path, meta, "x_m,intensity_per_m", &rows)
}

/// One CSV per frame plus `index.csv` listing shifts and file names.
/// Returns the path of the index.
pub fn write_frames(series: &DemagSeries, meta: &Metadata, dir: &Path) -> Result<PathBuf> {
    for (i, frame) in series.frames.iter().enumerate() {
        ensure_finite(
            dir,
            &format!("frame {i} intensity"),
            frame.intensity.iter().copied(),
        )?;
    }
    let mut index = String::new();
    meta.clone()
        .with("z_sep_m", num(series.z_sep))
        .with("z_det_m", num(series.z_det))
        .with("frames", series.len())
        .render(&mut index);
    index.push_str("index,shift_m,file\n");
    for (i, (frame, shift)) in series.frames.iter().zip(&series.shifts).enumerate() {
        let name = format!("frame_{i:03}.csv");
        let frame_meta = meta.clone().with("frame", i).with("shift_m", num(*shift));
        write_frame(frame, &frame_meta, &dir.join(&name))?;
        let _ = writeln!(index, "{i},{},{name}", num(*shift));
    }
    let path = dir.join("index.csv");
    write_file(&path, &index)?;
    Ok(path)
}

struct Csv {
    meta: Metadata,
    rows: Vec<(usize, Vec<String>)>,
}

fn read_csv(path: &Path) -> Result<Csv> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut meta = Metadata::default();
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (i, line) in text.lines().enumerate() {
        if let Some(m) = line.strip_prefix('#') {
            if let Some((k, v)) = m.split_once('=') {
                meta = meta.with(k.trim(), v.trim());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if !header_seen {
            header_seen = true;
            continue;
        }
        rows.push((
            i + 1,
            line.split(',').map(|s| s.trim().to_string()).collect(),
        ));
    }
    Ok(Csv { meta, rows })
}

fn parse_num(path: &Path, line: usize, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Malformed {
            path: path.to_path_buf(),
            line,
            message: format!("`{s}` is not a finite number"),
        })
}

fn meta_num(path: &Path, meta: &Metadata, key: &str) -> Result<f64> {
    let v = meta.get(key).ok_or_else(|| CliError::Malformed {
        path: path.to_path_buf(),
        line: 0,
        message: format!("missing `# {key} = ...`"),
    })?;
    parse_num(path, 0, v)
}

/// Reads a frame stack written by [`write_frames`].
pub fn read_frames(index: &Path) -> Result<DemagSeries> {
    let csv = read_csv(index)?;
    let dir = index.parent().unwrap_or(Path::new("."));
    let z_sep = meta_num(index, &csv.meta, "z_sep_m")?;
    let z_det = meta_num(index, &csv.meta, "z_det_m")?;
    let mut shifts = Vec::new();
    let mut frames = Vec::new();
    for (line, cells) in &csv.rows {
        let [_, shift, file] = cells.as_slice() else {
            return Err(CliError::Malformed {
                path: index.to_path_buf(),
                line: *line,
                message: "expected index,shift_m,file".into(),
            });
        };
        shifts.push(parse_num(index, *line, shift)?);
        let frame_path = dir.join(file);
        let frame_csv = read_csv(&frame_path)?;
        let mut x = Vec::with_capacity(frame_csv.rows.len());
        let mut v = Vec::with_capacity(frame_csv.rows.len());
        for (fl, cells) in &frame_csv.rows {
            let [a, b] = cells.as_slice() else {
                return Err(CliError::Malformed {
                    path: frame_path.clone(),
                    line: *fl,
                    message: "expected x_m,intensity_per_m".into(),
                });
            };
            x.push(parse_num(&frame_path, *fl, a)?);
            v.push(parse_num(&frame_path, *fl, b)?);
        }
        frames.push(FarFieldFrame::new(x, v));
    }
    Ok(DemagSeries::new(z_sep, z_det, shifts, frames)?)
}

/// Plain P2 graymap, maxval 65535, rows top to bottom in increasing z.
/// The flux range maps linearly onto 0..=65535; a constant carpet is all 0.
pub fn write_carpet_pgm(carpet: &CarpetImage, meta: &Metadata, path: &Path) -> Result<()> {
    ensure_finite(path, "carpet flux", carpet.flux().iter().copied())?;
    let min = carpet.flux().iter().cloned().fold(f64::INFINITY, f64::min);
    let max = carpet
        .flux()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let level = |v: f64| -> u32 {
        if max > min {
            ((v - min) / (max - min) * 65535.0).round() as u32
        } else {
            0
        }
    };
    let mut out = String::from("P2\n");
    let calibration = meta
        .clone()
        .with("rows", "z_m increasing downward")
        .with(
            "z_first_m",
            num(carpet.z_values.first().copied().unwrap_or(0.0)),
        )
        .with(
            "z_last_m",
            num(carpet.z_values.last().copied().unwrap_or(0.0)),
        )
        .with("columns", "G2 shift_m increasing rightward")
        .with(
            "x_first_m",
            num(carpet.x_values.first().copied().unwrap_or(0.0)),
        )
        .with(
            "x_last_m",
            num(carpet.x_values.last().copied().unwrap_or(0.0)),
        )
        .with("flux_min", num(if min.is_finite() { min } else { 0.0 }))
        .with("flux_max", num(if max.is_finite() { max } else { 0.0 }));
    calibration.render(&mut out);
    let _ = writeln!(out, "{} {}", carpet.cols(), carpet.rows());
    out.push_str("65535\n");
    for r in 0..carpet.rows() {
        let line: Vec<String> = carpet
            .row(r)
            .iter()
            .map(|v| level(*v).to_string())
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    write_file(path, &out)
}

/// Reads the pixel values of a P2 file written by [`write_carpet_pgm`].
pub fn read_pgm(path: &Path) -> Result<(usize, usize, Vec<u32>)> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let bad = |message: &str| CliError::Malformed {
        path: path.to_path_buf(),
        line: 0,
        message: message.into(),
    };
    let mut tokens = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .flat_map(str::split_whitespace);
    if tokens.next() != Some("P2") {
        return Err(bad("not a plain PGM (P2) file"));
    }
    let mut next = || -> Result<u32> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("truncated or malformed PGM"))
    };
    let (cols, rows, _max) = (next()? as usize, next()? as usize, next()?);
    let pixels = (0..cols * rows)
        .map(|_| next())
        .collect::<Result<Vec<_>>>()?;
    Ok((cols, rows, pixels))
}
