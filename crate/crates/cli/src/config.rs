//! Run configuration: a line-oriented `key = value` file with `[section]`
//! headers.
//!
//! Blank lines and text after `#` are ignored. Numbers accept a trailing
//! `ppm` (scaled by 1e-6). `[mode]` and `[ancillary]` may repeat. Unknown
//! sections and keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use optomech_core::calibration::SpringModel;
use optomech_core::cavity::finesse_and_linewidth;
use optomech_core::cross_correlation::LoopModel;
use optomech_core::noise_budget::NoiseReference;
use optomech_core::spectrum::{linear_grid, log_grid};
use optomech_core::{CavityConfig, Damping, InjectionSide, MechanicalMode, Port};

use crate::error::{CliError, Result};

const SECTIONS: &[(&str, &[&str])] = &[
    (
        "cavity",
        &[
            "length",
            "t_in",
            "t_end",
            "loss_rt",
            "detuning",
            "detuning_units",
            "detuning_sigma",
            "wavelength",
            "p_in",
            "injection_side",
        ],
    ),
    (
        "reflection_cavity",
        &[
            "length",
            "t_in",
            "t_end",
            "loss_rt",
            "detuning",
            "detuning_units",
            "detuning_sigma",
            "wavelength",
            "p_in",
            "injection_side",
        ],
    ),
    ("mode", &["mass", "f_m", "q", "temperature", "damping"]),
    ("grid", &["f_min", "f_max", "points", "spacing"]),
    ("readout", &["port", "angle_deg", "freq_hz"]),
    ("ancillary", &["label", "file", "reference"]),
    ("loop", &["model", "gain", "dc_gain", "pole_hz", "unity_hz"]),
    (
        "mc",
        &[
            "seed",
            "sample_rate",
            "segment_length",
            "segments",
            "band_lo",
            "band_hi",
            "split",
            "power_factors",
        ],
    ),
    ("calibration", &["f_os", "spring_model", "quoted_detuning"]),
];

const REPEATABLE: &[&str] = &["mode", "ancillary"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub f_min: f64,
    pub f_max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            f_min: 100.0,
            f_max: 100e3,
            points: 1000,
            spacing: Spacing::Log,
        }
    }
}

impl GridSpec {
    pub fn frequencies(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Log => log_grid(self.f_min, self.f_max, self.points),
            Spacing::Linear => linear_grid(self.f_min, self.f_max, self.points),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutSpec {
    pub port: Port,
    pub angle_deg: f64,
    /// Frequency of the readout-angle sweep, Hz.
    pub freq_hz: f64,
}

impl Default for ReadoutSpec {
    fn default() -> Self {
        Self {
            port: Port::TransmittedD,
            angle_deg: 0.0,
            freq_hz: 20e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AncillarySpec {
    pub label: String,
    /// Path as written in the config.
    pub file: PathBuf,
    /// `file` resolved against the config directory.
    pub path: PathBuf,
    pub reference: NoiseReference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSpec {
    pub seed: u64,
    pub sample_rate: f64,
    pub segment_length: usize,
    pub segments: usize,
    pub band_lo: f64,
    pub band_hi: f64,
    /// Fraction of the beam on each detector.
    pub split: f64,
    /// Input-power multipliers for a power sweep; empty disables it.
    pub power_factors: Vec<f64>,
}

impl Default for McSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            sample_rate: 262_144.0,
            segment_length: 4096,
            segments: 256,
            band_lo: 1e3,
            band_hi: 50e3,
            split: 0.5,
            power_factors: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationSpec {
    /// Measured spring frequency, Hz.
    pub f_os: Option<f64>,
    pub spring_model: SpringModel,
    /// Detuning reported by the experiment, for the optimum check.
    pub quoted_detuning: Option<f64>,
}

impl Default for CalibrationSpec {
    fn default() -> Self {
        Self {
            f_os: None,
            spring_model: SpringModel::QuasiStatic,
            quoted_detuning: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CavitySpec {
    pub config: CavityConfig,
    /// One-sigma detuning uncertainty, linewidths.
    pub detuning_sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub cavity: CavitySpec,
    /// Second cavity read out in reflection, used by `compare`.
    pub reflection_cavity: Option<CavitySpec>,
    pub modes: Vec<MechanicalMode>,
    pub grid: GridSpec,
    pub readout: ReadoutSpec,
    pub ancillary: Vec<AncillarySpec>,
    pub loop_model: LoopModel,
    pub mc: McSpec,
    pub calibration: CalibrationSpec,
}

struct Entry {
    value: String,
    line: usize,
}

struct RawSection {
    name: String,
    line: usize,
    entries: BTreeMap<String, Entry>,
}

struct Reader<'a> {
    path: &'a Path,
    section: RawSection,
}

impl Reader<'_> {
    fn err(&self, line: usize, message: impl Into<String>) -> CliError {
        CliError::Parse {
            path: self.path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    fn take(&mut self, key: &str) -> Option<Entry> {
        self.section.entries.remove(key)
    }

    fn f64_opt(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => parse_number(&e.value)
                .map(Some)
                .ok_or_else(|| self.err(e.line, format!("`{key}` expects a number, got `{}`", e.value))),
        }
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    fn f64_req(&mut self, key: &str) -> Result<f64> {
        self.f64_opt(key)?.ok_or_else(|| {
            self.err(
                self.section.line,
                format!("[{}] is missing required key `{key}`", self.section.name),
            )
        })
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.take(key) {
            None => Ok(default),
            Some(e) => e
                .value
                .parse()
                .map_err(|_| self.err(e.line, format!("`{key}` expects a non-negative integer, got `{}`", e.value))),
        }
    }

    fn word_or<T>(&mut self, key: &str, default: T, choices: &[(&str, T)]) -> Result<T>
    where
        T: Copy,
    {
        match self.take(key) {
            None => Ok(default),
            Some(e) => choices
                .iter()
                .find(|(name, _)| name.eq_ignore_ascii_case(&e.value))
                .map(|(_, v)| *v)
                .ok_or_else(|| {
                    let names: Vec<&str> = choices.iter().map(|(n, _)| *n).collect();
                    self.err(e.line, format!("`{key}` must be one of {}, got `{}`", names.join(", "), e.value))
                }),
        }
    }
}

fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    let (num, scale) = match s.strip_suffix("ppm") {
        Some(rest) => (rest.trim(), 1e6),
        None => (s, 1.0),
    };
    // divide by an exact power of ten so "50ppm" parses to the same f64 as 50e-6
    num.parse::<f64>().ok().filter(|v| v.is_finite()).map(|v| v / scale)
}

fn nearest<'a>(word: &str, candidates: &[&'a str]) -> Option<&'a str> {
    candidates
        .iter()
        .map(|c| (strsim::damerau_levenshtein(word, c), *c))
        .filter(|(d, c)| *d <= (c.len() / 2).max(2))
        .min_by_key(|(d, _)| *d)
        .map(|(_, c)| c)
}

fn allowed_keys(section: &str) -> Option<&'static [&'static str]> {
    SECTIONS.iter().find(|(n, _)| *n == section).map(|(_, k)| *k)
}

fn tokenize(path: &Path, text: &str) -> Result<Vec<RawSection>> {
    let err = |line: usize, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut sections: Vec<RawSection> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(inner) = content.strip_prefix('[') {
            let name = inner
                .strip_suffix(']')
                .ok_or_else(|| err(line, format!("unterminated section header `{content}`")))?
                .trim()
                .to_string();
            if allowed_keys(&name).is_none() {
                let names: Vec<&str> = SECTIONS.iter().map(|(n, _)| *n).collect();
                let hint = nearest(&name, &names)
                    .map(|n| format!("; did you mean `[{n}]`?"))
                    .unwrap_or_default();
                return Err(err(line, format!("unknown section `[{name}]`{hint}")));
            }
            if !REPEATABLE.contains(&name.as_str()) && sections.iter().any(|s| s.name == name) {
                return Err(err(line, format!("section `[{name}]` appears twice")));
            }
            sections.push(RawSection {
                name,
                line,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected `key = value`, got `{content}`")))?;
        let key = key.trim();
        let value = value.trim();
        let section = sections
            .last_mut()
            .ok_or_else(|| err(line, format!("`{key}` appears before any [section] header")))?;
        let keys = allowed_keys(&section.name).unwrap_or(&[]);
        if !keys.contains(&key) {
            let hint = nearest(key, keys)
                .map(|k| format!("; nearest valid key is `{k}`"))
                .unwrap_or_default();
            return Err(err(line, format!("unknown key `{key}` in [{}]{hint}", section.name)));
        }
        if value.is_empty() {
            return Err(err(line, format!("`{key}` has no value")));
        }
        if section.entries.contains_key(key) {
            return Err(err(line, format!("`{key}` is set twice in [{}]", section.name)));
        }
        section.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line,
            },
        );
    }
    Ok(sections)
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_str(&text, path)
}

/// Parses config text. Relative ancillary paths resolve against the
/// directory of `path`.
pub fn parse_config_str(text: &str, path: &Path) -> Result<RunConfig> {
    let base = path.parent().unwrap_or(Path::new("."));
    let mut cavity = None;
    let mut reflection_cavity = None;
    let mut modes = Vec::new();
    let mut grid = GridSpec::default();
    let mut readout = ReadoutSpec::default();
    let mut ancillary = Vec::new();
    let mut loop_model = LoopModel::default();
    let mut mc = McSpec::default();
    let mut calibration = CalibrationSpec::default();

    for section in tokenize(path, text)? {
        let mut r = Reader { path, section };
        match r.section.name.as_str() {
            "cavity" => cavity = Some(read_cavity(&mut r)?),
            "reflection_cavity" => reflection_cavity = Some(read_cavity(&mut r)?),
            "mode" => modes.push(read_mode(&mut r)?),
            "grid" => grid = read_grid(&mut r)?,
            "readout" => readout = read_readout(&mut r)?,
            "ancillary" => ancillary.push(read_ancillary(&mut r, base)?),
            "loop" => loop_model = read_loop(&mut r)?,
            "mc" => mc = read_mc(&mut r)?,
            "calibration" => calibration = read_calibration(&mut r)?,
            _ => unreachable!("section names are checked while tokenizing"),
        }
    }
    let cavity = cavity.ok_or_else(|| CliError::Validation("missing [cavity] section".into()))?;
    if modes.is_empty() {
        return Err(CliError::Validation("at least one [mode] section is required".into()));
    }
    Ok(RunConfig {
        cavity,
        reflection_cavity,
        modes,
        grid,
        readout,
        ancillary,
        loop_model,
        mc,
        calibration,
    })
}

fn read_cavity(r: &mut Reader) -> Result<CavitySpec> {
    let header = r.section.line;
    let mut config = CavityConfig {
        length: r.f64_req("length")?,
        t_in: r.f64_req("t_in")?,
        t_end: r.f64_req("t_end")?,
        loss_rt: r.f64_req("loss_rt")?,
        detuning: r.f64_req("detuning")?,
        wavelength: r.f64_or("wavelength", 1064e-9)?,
        p_in: r.f64_req("p_in")?,
        injection_side: r.word_or(
            "injection_side",
            InjectionSide::ThroughMacroMirror,
            &[
                ("macro", InjectionSide::ThroughMacroMirror),
                ("micro", InjectionSide::ThroughMicroresonator),
            ],
        )?,
    };
    let mut detuning_sigma = r.f64_or("detuning_sigma", 0.05)?;
    let in_hz = r.word_or("detuning_units", false, &[("linewidths", false), ("hz", true)])?;
    config.validate().map_err(|e| r.err(header, e.to_string()))?;
    if in_hz {
        let hwhm = finesse_and_linewidth(&config)?.hwhm;
        config.detuning /= hwhm;
        detuning_sigma /= hwhm;
    }
    if !(detuning_sigma >= 0.0) {
        return Err(r.err(header, "`detuning_sigma` must be >= 0"));
    }
    Ok(CavitySpec { config, detuning_sigma })
}

fn read_mode(r: &mut Reader) -> Result<MechanicalMode> {
    let mode = MechanicalMode {
        mass: r.f64_req("mass")?,
        f_m: r.f64_req("f_m")?,
        q: r.f64_req("q")?,
        temperature: r.f64_or("temperature", 295.0)?,
        damping: r.word_or(
            "damping",
            Damping::Structural,
            &[("structural", Damping::Structural), ("viscous", Damping::Viscous)],
        )?,
    };
    mode.validate().map_err(|e| r.err(r.section.line, e.to_string()))?;
    Ok(mode)
}

fn read_grid(r: &mut Reader) -> Result<GridSpec> {
    let d = GridSpec::default();
    let g = GridSpec {
        f_min: r.f64_or("f_min", d.f_min)?,
        f_max: r.f64_or("f_max", d.f_max)?,
        points: r.usize_or("points", d.points)?,
        spacing: r.word_or("spacing", d.spacing, &[("log", Spacing::Log), ("linear", Spacing::Linear)])?,
    };
    let line = r.section.line;
    if !(g.f_min > 0.0) {
        return Err(r.err(line, "grid requires f_min > 0"));
    }
    if !(g.f_max > g.f_min) {
        return Err(r.err(line, "grid requires f_max > f_min"));
    }
    if g.points < 2 {
        return Err(r.err(line, "grid requires points >= 2"));
    }
    Ok(g)
}

fn read_readout(r: &mut Reader) -> Result<ReadoutSpec> {
    let d = ReadoutSpec::default();
    let s = ReadoutSpec {
        port: r.word_or(
            "port",
            d.port,
            &[("transmission", Port::TransmittedD), ("reflection", Port::ReflectedB)],
        )?,
        angle_deg: r.f64_or("angle_deg", d.angle_deg)?,
        freq_hz: r.f64_or("freq_hz", d.freq_hz)?,
    };
    if !(s.freq_hz > 0.0) {
        return Err(r.err(r.section.line, "readout freq_hz must be > 0"));
    }
    Ok(s)
}

fn read_ancillary(r: &mut Reader, base: &Path) -> Result<AncillarySpec> {
    let line = r.section.line;
    let label = r
        .take("label")
        .ok_or_else(|| r.err(line, "[ancillary] is missing required key `label`"))?
        .value;
    let file = r
        .take("file")
        .ok_or_else(|| r.err(line, "[ancillary] is missing required key `file`"))?;
    let path = base.join(&file.value);
    if !path.is_file() {
        return Err(r.err(file.line, format!("ancillary file `{}` does not exist", path.display())));
    }
    let reference = r.word_or(
        "reference",
        NoiseReference::ShotNoiseRelative,
        &[
            ("shot_noise", NoiseReference::ShotNoiseRelative),
            ("displacement", NoiseReference::DisplacementReferred),
        ],
    )?;
    Ok(AncillarySpec {
        label,
        file: PathBuf::from(&file.value),
        path,
        reference,
    })
}

#[derive(Clone, Copy)]
enum LoopKind {
    Open,
    Flat,
    SinglePole,
}

fn read_loop(r: &mut Reader) -> Result<LoopModel> {
    let line = r.section.line;
    let kind = r.word_or(
        "model",
        LoopKind::SinglePole,
        &[("open", LoopKind::Open), ("flat", LoopKind::Flat), ("single_pole", LoopKind::SinglePole)],
    )?;
    let m = match kind {
        LoopKind::Open => LoopModel::OPEN,
        LoopKind::Flat => LoopModel::Flat {
            gain: r.f64_req("gain")?,
        },
        LoopKind::SinglePole => {
            let dc_gain = r.f64_or("dc_gain", 10.0)?;
            match (r.f64_opt("pole_hz")?, r.f64_opt("unity_hz")?) {
                (Some(_), Some(_)) => return Err(r.err(line, "set either `pole_hz` or `unity_hz`, not both")),
                (Some(pole_hz), None) => LoopModel::SinglePole { dc_gain, pole_hz },
                (None, u) => {
                    if dc_gain.abs() <= 1.0 {
                        return Err(r.err(line, "`unity_hz` needs |dc_gain| > 1; use `pole_hz`"));
                    }
                    LoopModel::from_unity_gain(dc_gain, u.unwrap_or(100.0))
                }
            }
        }
    };
    if let Some((key, e)) = r.section.entries.iter().next() {
        return Err(r.err(e.line, format!("`{key}` does not apply to this loop model")));
    }
    m.check_stable().map_err(|e| r.err(line, e.to_string()))?;
    Ok(m)
}

fn read_mc(r: &mut Reader) -> Result<McSpec> {
    let d = McSpec::default();
    let line = r.section.line;
    let power_factors = match r.take("power_factors") {
        None => d.power_factors,
        Some(e) => e
            .value
            .split(',')
            .map(|v| parse_number(v).filter(|x| *x > 0.0))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| r.err(e.line, "`power_factors` expects comma-separated positive numbers"))?,
    };
    let seed = match r.take("seed") {
        None => d.seed,
        Some(e) => e
            .value
            .parse()
            .map_err(|_| r.err(e.line, format!("`seed` expects an unsigned integer, got `{}`", e.value)))?,
    };
    let mc = McSpec {
        seed,
        sample_rate: r.f64_or("sample_rate", d.sample_rate)?,
        segment_length: r.usize_or("segment_length", d.segment_length)?,
        segments: r.usize_or("segments", d.segments)?,
        band_lo: r.f64_or("band_lo", d.band_lo)?,
        band_hi: r.f64_or("band_hi", d.band_hi)?,
        split: r.f64_or("split", d.split)?,
        power_factors,
    };
    if !mc.segment_length.is_power_of_two() {
        return Err(r.err(line, "`segment_length` must be a power of two"));
    }
    if mc.segments < 8 {
        return Err(r.err(line, "`segments` must be at least 8"));
    }
    if !(mc.band_lo > 0.0 && mc.band_hi > mc.band_lo && mc.sample_rate > 2.0 * mc.band_hi) {
        return Err(r.err(line, "need 0 < band_lo < band_hi < sample_rate / 2"));
    }
    if !(mc.split > 0.0 && mc.split <= 1.0) {
        return Err(r.err(line, "`split` must lie in (0, 1]"));
    }
    Ok(mc)
}

fn read_calibration(r: &mut Reader) -> Result<CalibrationSpec> {
    let c = CalibrationSpec {
        f_os: r.f64_opt("f_os")?,
        spring_model: r.word_or(
            "spring_model",
            SpringModel::QuasiStatic,
            &[("quasi_static", SpringModel::QuasiStatic), ("dynamic", SpringModel::Dynamic)],
        )?,
        quoted_detuning: r.f64_opt("quoted_detuning")?,
    };
    if let Some(f) = c.f_os {
        if !(f > 0.0) {
            return Err(r.err(r.section.line, "`f_os` must be > 0"));
        }
    }
    Ok(c)
}

impl RunConfig {
    /// Canonical text form. Parsing it yields an identical config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        write_cavity(&mut s, "cavity", &self.cavity);
        if let Some(c) = &self.reflection_cavity {
            write_cavity(&mut s, "reflection_cavity", c);
        }
        for m in &self.modes {
            let damping = match m.damping {
                Damping::Structural => "structural",
                Damping::Viscous => "viscous",
            };
            let _ = writeln!(
                s,
                "\n[mode]\nmass = {:?}\nf_m = {:?}\nq = {:?}\ntemperature = {:?}\ndamping = {damping}",
                m.mass, m.f_m, m.q, m.temperature
            );
        }
        let spacing = match self.grid.spacing {
            Spacing::Log => "log",
            Spacing::Linear => "linear",
        };
        let _ = writeln!(
            s,
            "\n[grid]\nf_min = {:?}\nf_max = {:?}\npoints = {}\nspacing = {spacing}",
            self.grid.f_min, self.grid.f_max, self.grid.points
        );
        let _ = writeln!(
            s,
            "\n[readout]\nport = {}\nangle_deg = {:?}\nfreq_hz = {:?}",
            port_name(self.readout.port),
            self.readout.angle_deg,
            self.readout.freq_hz
        );
        for a in &self.ancillary {
            let reference = match a.reference {
                NoiseReference::ShotNoiseRelative => "shot_noise",
                NoiseReference::DisplacementReferred => "displacement",
            };
            let _ = writeln!(
                s,
                "\n[ancillary]\nlabel = {}\nfile = {}\nreference = {reference}",
                a.label,
                a.file.display()
            );
        }
        match self.loop_model {
            LoopModel::Flat { gain } if gain == 0.0 => s.push_str("\n[loop]\nmodel = open\n"),
            LoopModel::Flat { gain } => {
                let _ = writeln!(s, "\n[loop]\nmodel = flat\ngain = {gain:?}");
            }
            LoopModel::SinglePole { dc_gain, pole_hz } => {
                let _ = writeln!(s, "\n[loop]\nmodel = single_pole\ndc_gain = {dc_gain:?}\npole_hz = {pole_hz:?}");
            }
        }
        let mc = &self.mc;
        let _ = writeln!(
            s,
            "\n[mc]\nseed = {}\nsample_rate = {:?}\nsegment_length = {}\nsegments = {}\nband_lo = {:?}\nband_hi = {:?}\nsplit = {:?}",
            mc.seed, mc.sample_rate, mc.segment_length, mc.segments, mc.band_lo, mc.band_hi, mc.split
        );
        if !mc.power_factors.is_empty() {
            let list: Vec<String> = mc.power_factors.iter().map(|p| format!("{p:?}")).collect();
            let _ = writeln!(s, "power_factors = {}", list.join(", "));
        }
        let c = &self.calibration;
        let model = match c.spring_model {
            SpringModel::QuasiStatic => "quasi_static",
            SpringModel::Dynamic => "dynamic",
        };
        let _ = writeln!(s, "\n[calibration]\nspring_model = {model}");
        if let Some(f) = c.f_os {
            let _ = writeln!(s, "f_os = {f:?}");
        }
        if let Some(d) = c.quoted_detuning {
            let _ = writeln!(s, "quoted_detuning = {d:?}");
        }
        s.trim_start().to_string()
    }
}

pub fn port_name(port: Port) -> &'static str {
    match port {
        Port::ReflectedB => "reflection",
        Port::TransmittedD => "transmission",
        _ => "internal",
    }
}

fn write_cavity(s: &mut String, name: &str, c: &CavitySpec) {
    let k = &c.config;
    let side = match k.injection_side {
        InjectionSide::ThroughMacroMirror => "macro",
        InjectionSide::ThroughMicroresonator => "micro",
    };
    let _ = writeln!(
        s,
        "\n[{name}]\nlength = {:?}\nt_in = {:?}\nt_end = {:?}\nloss_rt = {:?}\ndetuning = {:?}\ndetuning_units = linewidths\ndetuning_sigma = {:?}\nwavelength = {:?}\np_in = {:?}\ninjection_side = {side}",
        k.length, k.t_in, k.t_end, k.loss_rt, k.detuning, c.detuning_sigma, k.wavelength, k.p_in
    );
}
