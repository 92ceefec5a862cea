use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use optomech_core::calibration::{infer_with_model, optimal_detuning, KnownParameters, SpringMeasurement};
use optomech_core::cavity::{circulating_power, finesse_and_linewidth, optical_spring_constant};
use optomech_core::cross_correlation::{
    analytic_csd, fit_sqrt_power, power_sweep, synthesize_timeseries, welch_csd, SplitDetectionModel,
    SweepSettings, Window,
};
use optomech_core::noise_budget::{assemble_budget, compare_orientations, thermal_psd_at, AncillaryNoise, Budget, NoiseReference};
use optomech_core::quantum_noise::{default_angles, sweep_readout_angle, ShotNoiseCrossings};
use optomech_core::spectrum::log_grid;
use optomech_core::{build_io_model, Port, SpectrumUnits};

use crate::config::{port_name, CavitySpec, RunConfig};
use crate::error::{CliError, Result};
use crate::spectrum_file::{params_hash, SpectrumFile, TableFile};

/// Largest tolerated distance between the spring-maximizing detuning and
/// the quoted operating detuning before the report flags it.
pub const DETUNING_FLAG_THRESHOLD: f64 = 0.08;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Statics,
    Budget,
    SweepAngle,
    Calibrate,
    McCsd,
    Compare,
    ShowConfig,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Statics => "statics",
            Command::Budget => "budget",
            Command::SweepAngle => "sweep-angle",
            Command::Calibrate => "calibrate",
            Command::McCsd => "mc-csd",
            Command::Compare => "compare",
            Command::ShowConfig => "show-config",
        }
    }
}

/// Command-line overrides of config values.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub port: Option<Port>,
    pub angle_deg: Option<f64>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &RunConfig) -> RunConfig {
        let mut c = cfg.clone();
        if let Some(p) = self.port {
            c.readout.port = p;
        }
        if let Some(a) = self.angle_deg {
            c.readout.angle_deg = a;
        }
        if let Some(s) = self.seed {
            c.mc.seed = s;
        }
        c
    }
}

#[derive(Debug, Default)]
pub struct Report {
    /// Human-readable summary for standard output.
    pub text: String,
    pub files: Vec<PathBuf>,
}

struct Ctx<'a> {
    cfg: RunConfig,
    out: &'a Path,
    hash: String,
    command: &'static str,
    report: Report,
}

impl Ctx<'_> {
    fn ensure_out(&self) -> Result<()> {
        std::fs::create_dir_all(self.out).map_err(|e| CliError::io(self.out, e))
    }

    fn spectrum(&mut self, file: &str, label: &str, s: &optomech_core::NoiseSpectrum) -> Result<()> {
        self.ensure_out()?;
        let path = self.out.join(file);
        SpectrumFile::from_spectrum(label, self.command, &self.hash, s).write(&path)?;
        self.report.files.push(path);
        Ok(())
    }

    fn table(&mut self, file: &str, t: &TableFile) -> Result<()> {
        self.ensure_out()?;
        let path = self.out.join(file);
        t.write(&path)?;
        self.report.files.push(path);
        Ok(())
    }

    fn new_table(&self, label: &str, columns: &[&str]) -> TableFile {
        TableFile::new(label, self.command, &self.hash, columns)
    }

    fn say(&mut self, line: impl AsRef<str>) {
        self.report.text.push_str(line.as_ref());
        self.report.text.push('\n');
    }

    fn cavities(&self) -> Vec<(&'static str, CavitySpec)> {
        let mut v = vec![("cavity", self.cfg.cavity.clone())];
        if let Some(r) = &self.cfg.reflection_cavity {
            v.push(("reflection_cavity", r.clone()));
        }
        v
    }
}

pub fn run_command(cmd: Command, cfg: &RunConfig, out_dir: &Path, overrides: &Overrides) -> Result<Report> {
    let cfg = overrides.apply(cfg);
    let hash = params_hash(&cfg.to_text());
    let mut ctx = Ctx {
        cfg,
        out: out_dir,
        hash,
        command: cmd.name(),
        report: Report::default(),
    };
    match cmd {
        Command::Statics => statics(&mut ctx)?,
        Command::Budget => budget(&mut ctx)?,
        Command::SweepAngle => sweep_angle(&mut ctx)?,
        Command::Calibrate => calibrate(&mut ctx)?,
        Command::McCsd => mc_csd(&mut ctx)?,
        Command::Compare => compare(&mut ctx)?,
        Command::ShowConfig => {
            let text = ctx.cfg.to_text();
            ctx.report.text = text;
        }
    }
    Ok(ctx.report)
}

fn statics(ctx: &mut Ctx) -> Result<()> {
    let mass = ctx.cfg.modes[0].mass;
    let mut table = ctx.new_table(
        "statics",
        &["finesse", "fsr_hz", "hwhm_hz", "p_circ_w", "k_os_n_per_m", "f_os_hz", "delta_star", "f_os_max_hz"],
    );
    ctx.say(format!(
        "{:<18} {:>10} {:>12} {:>11} {:>11} {:>11} {:>10} {:>8} {:>12}",
        "cavity", "finesse", "FSR (GHz)", "HWHM (kHz)", "P_circ (mW)", "k_os (N/m)", "f_os (kHz)", "delta*", "f_max (kHz)"
    ));
    for (name, spec) in ctx.cavities() {
        let c = &spec.config;
        let s = finesse_and_linewidth(c)?;
        let p = circulating_power(c)?;
        let k = optical_spring_constant(c, &ctx.cfg.modes[0])?;
        let opt = optimal_detuning(c, mass)?;
        table.notes.push(format!("row {}: [{name}]", table.rows.len() + 1));
        table.push(vec![s.finesse, s.fsr, s.hwhm, p, k.k_os, k.f_os, opt.delta_star, opt.f_os_max]);
        ctx.say(format!(
            "{:<18} {:>10.1} {:>12.4} {:>11.2} {:>11.2} {:>11.3} {:>10.2} {:>8.4} {:>12.2}",
            name,
            s.finesse,
            s.fsr / 1e9,
            s.hwhm / 1e3,
            p * 1e3,
            k.k_os,
            k.f_os / 1e3,
            opt.delta_star,
            opt.f_os_max / 1e3
        ));
    }
    ctx.table("statics.csv", &table)
}

fn load_ancillary(cfg: &RunConfig) -> Result<Vec<AncillaryNoise>> {
    cfg.ancillary
        .iter()
        .map(|a| {
            let units = match a.reference {
                NoiseReference::ShotNoiseRelative => SpectrumUnits::ShotNoiseRelative,
                NoiseReference::DisplacementReferred => SpectrumUnits::DisplacementPsd,
            };
            let s = SpectrumFile::read(&a.path)?.to_spectrum(units)?;
            Ok(AncillaryNoise::new(a.label.clone(), s, a.reference)?)
        })
        .collect()
}

fn build_budget(cfg: &RunConfig, cavity: &CavitySpec, port: Port) -> Result<Budget> {
    let model = build_io_model(&cavity.config, &cfg.modes, &cfg.grid.frequencies())?;
    let anc = load_ancillary(cfg)?;
    Ok(assemble_budget(&model, &anc, port, cfg.readout.angle_deg.to_radians())?)
}

fn file_safe(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn budget(ctx: &mut Ctx) -> Result<()> {
    let port = ctx.cfg.readout.port;
    let b = build_budget(&ctx.cfg, &ctx.cfg.cavity, port)?;
    for s in &b.sources {
        ctx.spectrum(&format!("budget_{}.csv", file_safe(&s.label)), &s.label, &s.spectrum)?;
    }
    ctx.spectrum("budget_total.csv", "total", &b.total)?;

    ctx.say(format!(
        "{} readout at {} deg, amplitude spectral densities in m/rtHz",
        port_name(port),
        ctx.cfg.readout.angle_deg
    ));
    let mut header = format!("{:>12} {:>11}", "f (Hz)", "total");
    for s in &b.sources {
        let _ = write!(header, " {:>11}", s.label);
    }
    ctx.say(header);
    for f in [100.0, 1e3, 2e3, 5e3, 1e4, 2e4, 5e4, 1e5] {
        if f < b.total.freqs[0] || f > b.total.freqs[b.total.len() - 1] {
            continue;
        }
        let mut row = format!("{:>12.0} {:>11.3e}", f, b.total.interpolate(f).sqrt());
        for s in &b.sources {
            let _ = write!(row, " {:>11.3e}", s.spectrum.interpolate(f).sqrt());
        }
        ctx.say(row);
    }
    Ok(())
}

fn sweep_angle(ctx: &mut Ctx) -> Result<()> {
    let r = ctx.cfg.readout;
    let c = &ctx.cfg.cavity.config;
    let model = build_io_model(c, &ctx.cfg.modes, &[r.freq_hz])?;
    let th = thermal_psd_at(c, &ctx.cfg.modes, r.freq_hz)?;
    let sweep = sweep_readout_angle(&model, r.port, r.freq_hz, th, &default_angles())?;
    let mut table = ctx.new_table("sweep-angle", &["angle_deg", "quantum", "thermal", "total"]);
    table.notes.push(format!("port: {}", port_name(r.port)));
    table.notes.push(format!("frequency_hz: {:.16e}", r.freq_hz));
    let roots = match &sweep.crossings {
        ShotNoiseCrossings::Roots(v) => v.iter().map(|a| format!("{a:.2}")).collect::<Vec<_>>().join(", "),
        ShotNoiseCrossings::Degenerate => "degenerate (no back action)".to_string(),
    };
    table.notes.push(format!("shot_noise_crossings_deg: {roots}"));
    table.notes.push(format!("thermal_dip_deg: {:.2}", sweep.thermal_dip_deg));
    for row in &sweep.rows {
        table.push(vec![row.angle_deg, row.quantum, row.thermal, row.total]);
    }
    ctx.table("sweep_angle.csv", &table)?;
    ctx.say(format!(
        "{} readout at {:.1} kHz: quantum noise equals shot noise at [{roots}] deg, thermal noise minimum at {:.2} deg",
        port_name(r.port),
        r.freq_hz / 1e3,
        sweep.thermal_dip_deg
    ));
    Ok(())
}

fn calibrate(ctx: &mut Ctx) -> Result<()> {
    let cal = ctx.cfg.calibration;
    let f_os = cal
        .f_os
        .ok_or_else(|| CliError::Validation("calibrate needs `f_os` in [calibration]".into()))?;
    let mass = ctx.cfg.modes[0].mass;
    let mut table = ctx.new_table(
        "calibration",
        &[
            "p_circ_w",
            "p_circ_sigma_w",
            "loss_rt",
            "loss_rt_sigma",
            "residual",
            "delta_star",
            "f_os_max_hz",
            "detuning_discrepancy",
        ],
    );
    table.notes.push(format!("f_os_hz: {f_os:.16e}"));
    for (name, spec) in ctx.cavities() {
        let c = spec.config;
        let meas = SpringMeasurement {
            f_os,
            p_in: c.p_in,
            detuning: c.detuning,
            detuning_sigma: spec.detuning_sigma,
            injection_side: c.injection_side,
        };
        let known = KnownParameters {
            t_in: c.t_in,
            t_end: c.t_end,
            length: c.length,
            wavelength: c.wavelength,
            mass,
        };
        let r = infer_with_model(&meas, &known, cal.spring_model)?;
        let opt = optimal_detuning(&c.with_loss(r.loss_rt), mass)?;
        let quoted = cal.quoted_detuning.unwrap_or(c.detuning);
        let (gap, flagged) = opt.discrepancy(quoted, DETUNING_FLAG_THRESHOLD);
        table.notes.push(format!("row {}: [{name}]", table.rows.len() + 1));
        table.push(vec![r.p_circ, r.p_circ_sigma, r.loss_rt, r.loss_rt_sigma, r.residual, opt.delta_star, opt.f_os_max, gap]);
        ctx.say(format!(
            "[{name}] P_circ = {:.1} +- {:.1} mW, loss = {:.1} +- {:.1} ppm, residual {:.1e}",
            r.p_circ * 1e3,
            r.p_circ_sigma * 1e3,
            r.loss_rt * 1e6,
            r.loss_rt_sigma * 1e6,
            r.residual
        ));
        ctx.say(format!(
            "[{name}] spring frequency peaks at detuning {:.4} ({:.1} kHz); quoted {quoted:.2} differs by {gap:.3}{}",
            opt.delta_star,
            opt.f_os_max / 1e3,
            if flagged { " -- DISCREPANCY FLAGGED" } else { "" }
        ));
    }
    ctx.table("calibration.csv", &table)
}

fn mc_csd(ctx: &mut Ctx) -> Result<()> {
    let mc = ctx.cfg.mc.clone();
    let r = ctx.cfg.readout;
    let zeta = r.angle_deg.to_radians();
    let grid = log_grid(10.0, mc.sample_rate / 2.0, 2000);
    let cavity = ctx.cfg.cavity.config;
    let modes = ctx.cfg.modes.clone();
    let loop_model = ctx.cfg.loop_model;
    let split_model = |p_scale: f64| -> Result<SplitDetectionModel> {
        let c = cavity.with_input_power(cavity.p_in * p_scale);
        let io = build_io_model(&c, &modes, &grid)?;
        Ok(SplitDetectionModel::from_io_model(&io, r.port, zeta, mc.split, loop_model)?)
    };
    let model = split_model(1.0)?;
    let duration = (mc.segment_length * mc.segments) as f64 / mc.sample_rate;
    let pair = synthesize_timeseries(&model, duration, mc.sample_rate, mc.seed)?;
    let est = welch_csd(&pair, mc.segment_length, 0.0, Window::Hann)?;
    let bins: Vec<usize> = (1..est.freqs.len()).collect();
    let freqs: Vec<f64> = bins.iter().map(|&k| est.freqs[k]).collect();
    let a = analytic_csd(&model, &freqs)?;

    let mut table = ctx.new_table(
        "mc-csd",
        &[
            "frequency_hz",
            "csd_re",
            "csd_im",
            "psd1",
            "psd2",
            "analytic_open",
            "analytic_closed_re",
            "analytic_closed_im",
            "printed_closed_re",
            "printed_closed_im",
        ],
    );
    table.notes.push(format!("seed: {}", mc.seed));
    table.notes.push(format!("segments: {}", est.n_segments));
    table.notes.push("units: shot-noise-relative".into());
    for (i, &k) in bins.iter().enumerate() {
        table.push(vec![
            est.freqs[k],
            est.csd[k].re,
            est.csd[k].im,
            est.psd1[k],
            est.psd2[k],
            a.open_loop[i].re,
            a.closed_loop[i].re,
            a.closed_loop[i].im,
            a.printed_closed_loop[i].re,
            a.printed_closed_loop[i].im,
        ]);
    }
    ctx.table("mc_csd.csv", &table)?;

    let stat = est
        .band_statistic(mc.band_lo, mc.band_hi)
        .ok_or_else(|| CliError::Validation("no FFT bins inside the [mc] band".into()))?;
    let band: Vec<usize> = (0..freqs.len()).filter(|&i| freqs[i] >= mc.band_lo && freqs[i] <= mc.band_hi).collect();
    let mean = |v: &[num_complex::Complex64]| band.iter().map(|&i| v[i].re).sum::<f64>() / band.len() as f64;
    let derived = mean(&a.closed_loop);
    let printed = mean(&a.printed_closed_loop);
    ctx.say(format!(
        "{} segments of {} samples at {} Hz, band {}-{} Hz",
        est.n_segments, mc.segment_length, mc.sample_rate, mc.band_lo, mc.band_hi
    ));
    ctx.say(format!("Monte Carlo Re CSD     {:.6e} +- {:.2e}", stat.mean.re, stat.sigma_re));
    ctx.say(format!(
        "derived closed loop    {derived:.6e} ({:+.2} sigma)",
        (stat.mean.re - derived) / stat.sigma_re
    ));
    ctx.say(format!(
        "printed closed loop    {printed:.6e} ({:+.2} sigma, comparison only)",
        (stat.mean.re - printed) / stat.sigma_re
    ));

    if !mc.power_factors.is_empty() {
        let p0 = circulating_power(&cavity)?;
        let models = mc
            .power_factors
            .iter()
            .map(|&x| Ok((p0 * x, split_model(x)?)))
            .collect::<Result<Vec<_>>>()?;
        let settings = SweepSettings {
            sample_rate: mc.sample_rate,
            segment_length: mc.segment_length,
            n_segments: mc.segments,
            band: (mc.band_lo, mc.band_hi),
        };
        let points = power_sweep(&models, &settings, mc.seed)?;
        let mut t = ctx.new_table(
            "power-sweep",
            &["p_circ_w", "raw", "raw_sigma", "recovered_m2_per_hz", "recovered_sigma", "expected_m2_per_hz"],
        );
        for p in &points {
            t.push(vec![p.power, p.raw, p.raw_sigma, p.recovered, p.recovered_sigma, p.expected]);
            ctx.say(format!(
                "P_circ {:7.2} mW: recovered thermal {:.4e} +- {:.1e} m^2/Hz (model {:.4e})",
                p.power * 1e3,
                p.recovered,
                p.recovered_sigma,
                p.expected
            ));
        }
        if points.len() >= 3 {
            let fit = fit_sqrt_power(&points)?;
            t.notes.push(format!("sqrt_power_fit: a={:e} b={:e} sigma_b={:e}", fit.a, fit.b, fit.sigma_b));
            ctx.say(format!(
                "sqrt(P) component: b = {:.3e} +- {:.3e} ({:.2} sigma)",
                fit.b,
                fit.sigma_b,
                fit.b / fit.sigma_b
            ));
        }
        ctx.table("power_sweep.csv", &t)?;
    }
    Ok(())
}

fn compare(ctx: &mut Ctx) -> Result<()> {
    let refl = ctx
        .cfg
        .reflection_cavity
        .clone()
        .ok_or_else(|| CliError::Validation("compare needs a [reflection_cavity] section".into()))?;
    let bt = build_budget(&ctx.cfg, &ctx.cfg.cavity, Port::TransmittedD)?;
    let br = build_budget(&ctx.cfg, &refl, Port::ReflectedB)?;
    let cmp = compare_orientations(&bt, &br)?;
    ctx.spectrum("compare_transmission_total.csv", "transmission total", &bt.total)?;
    ctx.spectrum("compare_reflection_total.csv", "reflection total", &br.total)?;
    ctx.spectrum("compare_ratio.csv", "reflection/transmission amplitude ratio", &cmp.ratio)?;
    if let Some(e) = cmp.band_extrema(10e3, 40e3) {
        ctx.say(format!(
            "10-40 kHz: ratio max {:.2} dB at {:.1} kHz, min {:.2} dB at {:.1} kHz",
            20.0 * e.max_ratio.log10(),
            e.f_at_max / 1e3,
            20.0 * e.min_ratio.log10(),
            e.f_at_min / 1e3
        ));
    }
    let f = &cmp.ratio.freqs;
    if f[0] <= 20e3 && f[f.len() - 1] >= 20e3 {
        ctx.say(format!("at 20 kHz: {:.2} dB", 20.0 * cmp.ratio.interpolate(20e3).log10()));
    }
    let lower = f
        .iter()
        .zip(&cmp.ratio.values)
        .filter(|(f, _)| **f >= 2e3 && **f <= 50e3)
        .all(|(_, r)| *r > 1.0);
    ctx.say(format!("transmission total below reflection total over 2-50 kHz: {lower}"));
    Ok(())
}
