//! Line-oriented run configuration: `section.key = value`, `#` comments.
//!
//! Every key except `energy_kev` has a default. The grid preset supplies the
//! defaults that depend on numerical scale (grid, beam width, ensemble size,
//! shift sampling); keys set explicitly always win over the preset.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};
use talbot_core::{
    BeamEnergy, GratingSpec, GsmBeam, Interferometer, Preset, ScanSpec, SimContext, SlitPhaseModel,
    TransverseGrid,
};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    /// Finite real number.
    Real,
    /// Finite real or `inf`/`-inf`.
    Radius,
    /// Finite real or `auto`.
    Auto,
    Count,
    Seed,
    Preset,
}

const KEYS: &[(&str, Kind)] = &[
    ("energy_kev", Kind::Real),
    ("grating1.period_nm", Kind::Real),
    ("grating1.open_nm", Kind::Real),
    ("grating1.beta_rad_nm", Kind::Real),
    ("grating1.phi_max", Kind::Real),
    ("grating2.period_nm", Kind::Real),
    ("grating2.open_nm", Kind::Real),
    ("grating2.beta_rad_nm", Kind::Real),
    ("grating2.phi_max", Kind::Real),
    ("beam.width_um", Kind::Real),
    ("beam.coherence_um", Kind::Real),
    ("beam.radius_m", Kind::Radius),
    ("beam.center_um", Kind::Real),
    ("grid.preset", Kind::Preset),
    ("grid.window_um", Kind::Real),
    ("grid.n", Kind::Count),
    ("scan.z_min_mm", Kind::Real),
    ("scan.z_max_mm", Kind::Real),
    ("scan.z_step_um", Kind::Real),
    ("scan.x_step_nm", Kind::Real),
    ("scan.x_count", Kind::Count),
    ("detector.z_m", Kind::Real),
    ("detector.pixel_um", Kind::Real),
    ("ensemble.m", Kind::Count),
    ("fit.r_min_m", Kind::Real),
    ("fit.r_max_m", Kind::Real),
    ("noise.sigma_rel", Kind::Real),
    ("noise.seed", Kind::Seed),
    ("setup.z_sep_mm", Kind::Auto),
    ("setup.shift_nm", Kind::Real),
    ("demag.shift_count", Kind::Count),
];

#[derive(Debug, Clone, Copy, PartialEq)]
enum Value {
    Real(f64),
    Auto,
    Count(usize),
    Seed(u64),
    Preset(Preset),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingConfig {
    pub period_nm: f64,
    pub open_nm: f64,
    pub beta_rad_nm: f64,
    pub phi_max: f64,
}

impl Default for GratingConfig {
    fn default() -> Self {
        Self {
            period_nm: 100.0,
            open_nm: 50.0,
            beta_rad_nm: 0.0,
            phi_max: SlitPhaseModel::DEFAULT_PHI_MAX,
        }
    }
}

impl GratingConfig {
    pub fn spec(&self) -> talbot_core::Result<GratingSpec> {
        let spec = GratingSpec::new(self.period_nm * 1e-9, self.open_nm * 1e-9)?;
        Ok(if self.beta_rad_nm > 0.0 {
            spec.with_phase(SlitPhaseModel::new(self.beta_rad_nm * 1e-9, self.phi_max)?)
        } else {
            spec
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamConfig {
    pub width_um: f64,
    pub coherence_um: f64,
    pub radius_m: f64,
    pub center_um: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub preset: Preset,
    pub window_um: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub z_min_mm: f64,
    pub z_max_mm: f64,
    pub z_step_um: f64,
    pub x_step_nm: f64,
    pub x_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub z_m: f64,
    pub pixel_um: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub r_min_m: f64,
    pub r_max_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub sigma_rel: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetupConfig {
    /// `None` picks the Talbot distance (or its demagnified plane for revival-period).
    pub z_sep_mm: Option<f64>,
    pub shift_nm: f64,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub energy_kev: f64,
    pub grating1: GratingConfig,
    pub grating2: GratingConfig,
    pub beam: BeamConfig,
    pub grid: GridConfig,
    pub scan: ScanConfig,
    pub detector: DetectorConfig,
    pub ensemble_m: usize,
    pub fit: FitConfig,
    pub noise: NoiseConfig,
    pub setup: SetupConfig,
    pub demag_shift_count: usize,
}

fn parse_value(kind: Kind, raw: &str) -> std::result::Result<Value, String> {
    let real = |s: &str| -> std::result::Result<f64, String> {
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(format!("`{s}` is not a finite number")),
        }
    };
    match kind {
        Kind::Real => real(raw).map(Value::Real),
        Kind::Radius => match raw {
            "inf" | "+inf" => Ok(Value::Real(f64::INFINITY)),
            "-inf" => Ok(Value::Real(f64::NEG_INFINITY)),
            _ => real(raw).map(Value::Real),
        },
        Kind::Auto => match raw {
            "auto" => Ok(Value::Auto),
            _ => real(raw).map(Value::Real),
        },
        Kind::Count => raw
            .parse::<usize>()
            .map(Value::Count)
            .map_err(|_| format!("`{raw}` is not a non-negative integer")),
        Kind::Seed => raw
            .parse::<u64>()
            .map(Value::Seed)
            .map_err(|_| format!("`{raw}` is not a valid seed")),
        Kind::Preset => Preset::parse(raw)
            .map(Value::Preset)
            .map_err(|e| e.to_string()),
    }
}

struct Entries {
    values: BTreeMap<&'static str, (Value, usize)>,
}

impl Entries {
    fn real(&self, key: &str, default: f64) -> f64 {
        match self.values.get(key) {
            Some((Value::Real(v), _)) => *v,
            _ => default,
        }
    }

    fn count(&self, key: &str, default: usize) -> usize {
        match self.values.get(key) {
            Some((Value::Count(v), _)) => *v,
            _ => default,
        }
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.values.get(key).map(|(_, l)| *l)
    }

    /// Error attributed to the first of `keys` that appears in the file.
    fn fail(&self, keys: &[&str], message: impl Into<String>) -> CliError {
        let message = message.into();
        match keys.iter().find_map(|k| self.line(k)) {
            Some(line) => CliError::Parse { line, message },
            None => CliError::Config(message),
        }
    }
}

/// Parses and validates a configuration. `preset` overrides `grid.preset`.
pub fn parse_config(text: &str, preset: Option<Preset>) -> Result<RunConfig> {
    let mut values = BTreeMap::new();
    for (index, raw_line) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(CliError::Parse {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(&(name, kind)) = KEYS.iter().find(|(k, _)| *k == key) else {
            return Err(CliError::Parse {
                line,
                message: format!("unknown key `{key}`"),
            });
        };
        if values.contains_key(name) {
            return Err(CliError::Parse {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
        let parsed = parse_value(kind, value).map_err(|message| CliError::Parse {
            line,
            message: format!("{key}: {message}"),
        })?;
        values.insert(name, (parsed, line));
    }
    let e = Entries { values };
    resolve(&e, preset)
}

fn resolve(e: &Entries, preset_override: Option<Preset>) -> Result<RunConfig> {
    let energy_kev = match e.values.get("energy_kev") {
        Some((Value::Real(v), _)) => *v,
        _ => return Err(CliError::Config("missing required key `energy_kev`".into())),
    };
    let preset = preset_override.unwrap_or(match e.values.get("grid.preset") {
        Some((Value::Preset(p), _)) => *p,
        _ => Preset::Paper,
    });
    let grid = preset.grid();
    let beam = preset.beam();
    let (x_step, x_count) = preset.shifts();
    let default_scan = preset.scan();
    let grating = |prefix: &str| {
        let d = GratingConfig::default();
        GratingConfig {
            period_nm: e.real(&format!("{prefix}.period_nm"), d.period_nm),
            open_nm: e.real(&format!("{prefix}.open_nm"), d.open_nm),
            beta_rad_nm: e.real(&format!("{prefix}.beta_rad_nm"), d.beta_rad_nm),
            phi_max: e.real(&format!("{prefix}.phi_max"), d.phi_max),
        }
    };
    let cfg = RunConfig {
        energy_kev,
        grating1: grating("grating1"),
        grating2: grating("grating2"),
        beam: BeamConfig {
            width_um: e.real("beam.width_um", beam.width * 1e6),
            coherence_um: e.real("beam.coherence_um", beam.coherence_width * 1e6),
            radius_m: e.real("beam.radius_m", f64::INFINITY),
            center_um: e.real("beam.center_um", 0.0),
        },
        grid: GridConfig {
            preset,
            window_um: e.real("grid.window_um", grid.window() * 1e6),
            n: e.count("grid.n", grid.len()),
        },
        scan: ScanConfig {
            z_min_mm: e.real("scan.z_min_mm", default_scan.z_min * 1e3),
            z_max_mm: e.real("scan.z_max_mm", default_scan.z_max * 1e3),
            z_step_um: e.real("scan.z_step_um", default_scan.z_step * 1e6),
            x_step_nm: e.real("scan.x_step_nm", x_step * 1e9),
            x_count: e.count("scan.x_count", x_count),
        },
        detector: DetectorConfig {
            z_m: e.real("detector.z_m", 1.0),
            pixel_um: e.real("detector.pixel_um", 1.0),
        },
        ensemble_m: e.count("ensemble.m", preset.members()),
        fit: FitConfig {
            r_min_m: e.real("fit.r_min_m", 0.5),
            r_max_m: e.real("fit.r_max_m", 20.0),
        },
        noise: NoiseConfig {
            sigma_rel: e.real("noise.sigma_rel", 0.0),
            seed: match e.values.get("noise.seed") {
                Some((Value::Seed(s), _)) => *s,
                _ => 0,
            },
        },
        setup: SetupConfig {
            z_sep_mm: match e.values.get("setup.z_sep_mm") {
                Some((Value::Real(v), _)) => Some(*v),
                _ => None,
            },
            shift_nm: e.real("setup.shift_nm", 0.0),
        },
        demag_shift_count: e.count("demag.shift_count", 16),
    };
    validate(&cfg, e)?;
    Ok(cfg)
}

fn validate(c: &RunConfig, e: &Entries) -> Result<()> {
    let check =
        |ok: bool, keys: &[&str], msg: String| if ok { Ok(()) } else { Err(e.fail(keys, msg)) };
    check(
        c.energy_kev > 0.0,
        &["energy_kev"],
        format!("energy_kev must be positive, got {}", c.energy_kev),
    )?;
    for (name, g) in [("grating1", c.grating1), ("grating2", c.grating2)] {
        let key = |k: &str| format!("{name}.{k}");
        let (period, open, beta, phi) = (
            key("period_nm"),
            key("open_nm"),
            key("beta_rad_nm"),
            key("phi_max"),
        );
        check(
            g.period_nm > 0.0,
            &[&period],
            format!("{period} must be positive"),
        )?;
        check(
            g.open_nm > 0.0 && g.open_nm < g.period_nm,
            &[&open, &period],
            format!(
                "{open} = {} must lie strictly between 0 and the period {}",
                g.open_nm, g.period_nm
            ),
        )?;
        check(
            g.beta_rad_nm >= 0.0,
            &[&beta],
            format!("{beta} must be non-negative"),
        )?;
        check(g.phi_max > 0.0, &[&phi], format!("{phi} must be positive"))?;
    }
    let b = c.beam;
    check(
        b.width_um > 0.0,
        &["beam.width_um"],
        "beam.width_um must be positive".into(),
    )?;
    check(
        b.coherence_um > 0.0,
        &["beam.coherence_um"],
        "beam.coherence_um must be positive".into(),
    )?;
    check(
        b.radius_m != 0.0,
        &["beam.radius_m"],
        "beam.radius_m must be non-zero (use inf for a collimated beam)".into(),
    )?;
    check(
        c.grid.window_um > 0.0,
        &["grid.window_um"],
        "grid.window_um must be positive".into(),
    )?;
    check(
        c.grid.n >= TransverseGrid::MIN_SAMPLES && c.grid.n.is_power_of_two(),
        &["grid.n"],
        format!(
            "grid.n must be a power of two >= {}, got {}",
            TransverseGrid::MIN_SAMPLES,
            c.grid.n
        ),
    )?;
    check(
        c.grid.window_um >= 2.0 * b.width_um,
        &["grid.window_um", "beam.width_um", "grid.preset"],
        format!(
            "grid window {} um must be at least twice the beam width {} um",
            c.grid.window_um, b.width_um
        ),
    )?;
    let spacing_nm = c.grid.window_um * 1e3 / c.grid.n as f64;
    for g in [c.grating1, c.grating2] {
        check(
            spacing_nm <= g.period_nm / 16.0 && spacing_nm <= g.open_nm / 8.0,
            &["grid.n", "grid.window_um"],
            format!("grid spacing {spacing_nm:.4} nm does not resolve the gratings (need <= period/16 and <= open/8)"),
        )?;
    }
    let s = c.scan;
    check(
        s.z_min_mm >= 0.0,
        &["scan.z_min_mm"],
        "scan.z_min_mm must be non-negative".into(),
    )?;
    check(
        s.z_max_mm >= s.z_min_mm,
        &["scan.z_max_mm", "scan.z_min_mm"],
        "scan.z_max_mm must not be below scan.z_min_mm".into(),
    )?;
    check(
        s.z_step_um > 0.0,
        &["scan.z_step_um"],
        "scan.z_step_um must be positive".into(),
    )?;
    check(
        s.x_step_nm > 0.0,
        &["scan.x_step_nm"],
        "scan.x_step_nm must be positive".into(),
    )?;
    check(
        s.x_count >= 2,
        &["scan.x_count"],
        "scan.x_count must be at least 2".into(),
    )?;
    check(
        c.detector.z_m > 0.0,
        &["detector.z_m"],
        "detector.z_m must be positive".into(),
    )?;
    check(
        c.detector.pixel_um > 0.0,
        &["detector.pixel_um"],
        "detector.pixel_um must be positive".into(),
    )?;
    check(
        c.ensemble_m >= 1 && c.ensemble_m % 2 == 1,
        &["ensemble.m"],
        format!("ensemble.m must be odd and >= 1, got {}", c.ensemble_m),
    )?;
    check(
        c.fit.r_min_m > 0.0 && c.fit.r_max_m > c.fit.r_min_m,
        &["fit.r_min_m", "fit.r_max_m"],
        "fit interval must satisfy 0 < r_min_m < r_max_m".into(),
    )?;
    check(
        c.noise.sigma_rel >= 0.0,
        &["noise.sigma_rel"],
        "noise.sigma_rel must be non-negative".into(),
    )?;
    check(
        c.setup.z_sep_mm.is_none_or(|z| z > 0.0),
        &["setup.z_sep_mm"],
        "setup.z_sep_mm must be positive".into(),
    )?;
    check(
        c.demag_shift_count >= 1,
        &["demag.shift_count"],
        "demag.shift_count must be at least 1".into(),
    )?;
    Ok(())
}

fn fmt_value(v: f64) -> String {
    format!("{v}")
}

impl RunConfig {
    /// Canonical text with every key set; parsing it yields `self` again.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("energy_kev", fmt_value(self.energy_kev));
        for (name, g) in [("grating1", self.grating1), ("grating2", self.grating2)] {
            put(&format!("{name}.period_nm"), fmt_value(g.period_nm));
            put(&format!("{name}.open_nm"), fmt_value(g.open_nm));
            put(&format!("{name}.beta_rad_nm"), fmt_value(g.beta_rad_nm));
            put(&format!("{name}.phi_max"), fmt_value(g.phi_max));
        }
        put("beam.width_um", fmt_value(self.beam.width_um));
        put("beam.coherence_um", fmt_value(self.beam.coherence_um));
        put("beam.radius_m", fmt_value(self.beam.radius_m));
        put("beam.center_um", fmt_value(self.beam.center_um));
        put("grid.preset", self.grid.preset.name().to_string());
        put("grid.window_um", fmt_value(self.grid.window_um));
        put("grid.n", self.grid.n.to_string());
        put("scan.z_min_mm", fmt_value(self.scan.z_min_mm));
        put("scan.z_max_mm", fmt_value(self.scan.z_max_mm));
        put("scan.z_step_um", fmt_value(self.scan.z_step_um));
        put("scan.x_step_nm", fmt_value(self.scan.x_step_nm));
        put("scan.x_count", self.scan.x_count.to_string());
        put("detector.z_m", fmt_value(self.detector.z_m));
        put("detector.pixel_um", fmt_value(self.detector.pixel_um));
        put("ensemble.m", self.ensemble_m.to_string());
        put("fit.r_min_m", fmt_value(self.fit.r_min_m));
        put("fit.r_max_m", fmt_value(self.fit.r_max_m));
        put("noise.sigma_rel", fmt_value(self.noise.sigma_rel));
        put("noise.seed", self.noise.seed.to_string());
        put(
            "setup.z_sep_mm",
            self.setup.z_sep_mm.map_or("auto".into(), fmt_value),
        );
        put("setup.shift_nm", fmt_value(self.setup.shift_nm));
        put("demag.shift_count", self.demag_shift_count.to_string());
        out
    }

    /// SHA-256 of [`RunConfig::echo`], lowercase hex.
    pub fn digest(&self) -> String {
        Sha256::digest(self.echo().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn energy(&self) -> talbot_core::Result<BeamEnergy> {
        BeamEnergy::from_kev(self.energy_kev)
    }

    pub fn transverse_grid(&self) -> talbot_core::Result<TransverseGrid> {
        TransverseGrid::new(self.grid.window_um * 1e-6, self.grid.n)
    }

    pub fn gsm_beam(&self) -> talbot_core::Result<GsmBeam> {
        Ok(
            GsmBeam::new(self.beam.width_um * 1e-6, self.beam.coherence_um * 1e-6)?
                .with_radius(self.beam.radius_m)
                .with_center(self.beam.center_um * 1e-6),
        )
    }

    pub fn interferometer(&self) -> talbot_core::Result<Interferometer> {
        let context = SimContext::new(self.energy()?, self.transverse_grid()?, self.ensemble_m)?;
        Interferometer::new(
            self.gsm_beam()?,
            self.grating1.spec()?,
            self.grating2.spec()?,
            context,
        )
    }

    pub fn scan_spec(&self) -> talbot_core::Result<ScanSpec> {
        let s = self.scan;
        ScanSpec::new(
            s.z_min_mm * 1e-3,
            s.z_max_mm * 1e-3,
            s.z_step_um * 1e-6,
            s.x_step_nm * 1e-9,
            s.x_count,
        )
    }

    /// Shifts of the moiré scan, m.
    pub fn shifts(&self) -> Vec<f64> {
        (0..self.scan.x_count)
            .map(|i| i as f64 * self.scan.x_step_nm * 1e-9)
            .collect()
    }

    /// `demag.shift_count` equal steps over one G2 period, plus the shift one
    /// full period on so the return to the starting frame is recorded.
    pub fn demag_shifts(&self) -> Vec<f64> {
        let d = self.grating2.period_nm * 1e-9;
        let n = self.demag_shift_count;
        (0..=n).map(|k| k as f64 * d / n as f64).collect()
    }

    /// Explicit separation, or the Talbot distance of G1.
    pub fn z_sep(&self, ifm: &Interferometer) -> f64 {
        self.setup
            .z_sep_mm
            .map_or_else(|| ifm.talbot_distance(), |z| z * 1e-3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn energy_alone_gives_defaults() {
        let c = parse_config("energy_kev = 2.8\n", None).unwrap();
        assert_eq!(c.energy_kev, 2.8);
        assert_eq!(c.grating1, GratingConfig::default());
        assert_eq!(c.grating2, GratingConfig::default());
        assert_eq!(c.beam.width_um, 150.0);
        assert_eq!(c.beam.coherence_um, 2.0);
        assert!(c.beam.radius_m.is_infinite());
        assert_eq!(c.grid.preset, Preset::Paper);
        assert_eq!(c.grid.n, 1 << 16);
        assert_eq!(c.ensemble_m, 15);
        assert_relative_eq!(c.scan.z_min_mm, 0.1, max_relative = 1e-12);
        assert_relative_eq!(c.scan.z_max_mm, 1.7, max_relative = 1e-12);
        assert_relative_eq!(c.scan.z_step_um, 30.0, max_relative = 1e-12);
        assert_eq!(c.detector.z_m, 1.0);
        assert_eq!(c.setup.z_sep_mm, None);
        c.interferometer().unwrap();
    }

    #[test]
    fn test_preset_changes_scale_defaults() {
        let c = parse_config("energy_kev = 2.8\ngrid.preset = test\n", None).unwrap();
        assert_eq!(c.grid.n, 8192);
        assert_eq!(c.beam.width_um, 8.0);
        assert_eq!(c.ensemble_m, 7);
        let flag = parse_config("energy_kev = 2.8\n", Some(Preset::Test)).unwrap();
        assert_eq!(flag, c);
        let explicit =
            parse_config("energy_kev = 2.8\nbeam.width_um = 5\n", Some(Preset::Test)).unwrap();
        assert_eq!(explicit.beam.width_um, 5.0);
    }

    #[test]
    fn infinite_radius_token() {
        let c = parse_config("energy_kev = 2.8\nbeam.radius_m = inf\n", None).unwrap();
        assert!(c.gsm_beam().unwrap().radius.is_infinite());
        let c = parse_config(
            "energy_kev = 2.8\nbeam.radius_m = 2.15  # converging\n",
            None,
        )
        .unwrap();
        assert_eq!(c.beam.radius_m, 2.15);
    }

    #[test]
    fn open_width_at_or_above_period_names_the_line() {
        let err = parse_config(
            "energy_kev = 2.8\n\n# gratings\ngrating1.open_nm = 120\n",
            None,
        )
        .unwrap_err();
        match err {
            CliError::Parse { line, message } => {
                assert_eq!(line, 4);
                assert!(message.contains("grating1.open_nm"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        let line_of = |text: &str| match parse_config(text, None).unwrap_err() {
            CliError::Parse { line, .. } => line,
            other => panic!("unexpected {other:?}"),
        };
        assert_eq!(line_of("energy_kev = 2.8\nbeam.colour = red\n"), 2);
        assert_eq!(line_of("energy_kev = 2.8x\n"), 1);
        assert_eq!(line_of("energy_kev = nan\n"), 1);
        assert_eq!(line_of("energy_kev = 2.8\nenergy_kev = 3\n"), 2);
        assert_eq!(line_of("energy_kev 2.8\n"), 1);
        assert_eq!(line_of("energy_kev = 2.8\nensemble.m = 4\n"), 2);
        assert_eq!(line_of("energy_kev = 2.8\ngrid.preset = huge\n"), 2);
        assert_eq!(line_of("energy_kev = 2.8\nbeam.radius_m = 0\n"), 2);
        assert!(matches!(
            parse_config("beam.radius_m = inf\n", None),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn echo_round_trips() {
        let text = "energy_kev = 2.0\nbeam.radius_m = 2.15\ngrating1.beta_rad_nm = 1.26\nsetup.z_sep_mm = 0.73\nnoise.sigma_rel = 0.01\nnoise.seed = 9\n";
        let c = parse_config(text, Some(Preset::Test)).unwrap();
        let again = parse_config(&c.echo(), None).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.digest(), c.digest());
        assert_eq!(c.digest().len(), 64);
        let other = parse_config("energy_kev = 2.1\n", Some(Preset::Test)).unwrap();
        assert_ne!(other.digest(), c.digest());
    }

    #[test]
    fn demag_shifts_close_one_period() {
        let c = parse_config("energy_kev = 2.8\ndemag.shift_count = 4\n", None).unwrap();
        let s = c.demag_shifts();
        assert_eq!(s.len(), 5);
        assert_relative_eq!(s[4], 100e-9, max_relative = 1e-15);
    }
}
