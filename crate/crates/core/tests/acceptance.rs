//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fail.

use std::f64::consts::PI;
use std::process::ExitCode;

use num_complex::Complex64;
use optomech_core::calibration::{infer_power_and_loss, spring_frequency, KnownParameters, SpringMeasurement};
use optomech_core::cavity::{circulating_power, finesse_and_linewidth, optical_spring_constant, CavityConfig, InjectionSide};
use optomech_core::cross_correlation::{
    analytic_csd, fit_sqrt_power, power_sweep, synthesize_timeseries, welch_csd, LoopModel,
    SplitDetectionModel, SweepSettings, Window,
};
use optomech_core::dynamics::{ideal, RadiationPressureCoupling};
use optomech_core::noise_budget::{assemble_budget, compare_orientations, thermal_psd_at, AncillaryNoise, NoiseReference};
use optomech_core::presets;
use optomech_core::quantum_noise::{build_io_model, default_angles, sweep_readout_angle, ShotNoiseCrossings};
use optomech_core::spectrum::{default_grid, log_grid, NoiseSpectrum, SpectrumUnits};
use optomech_core::{Port, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FS: f64 = 262_144.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x / target - 1.0).abs() <= rel
}

fn statics() -> Result<Outcome> {
    let s = finesse_and_linewidth(&presets::reflection_experiment())?;
    let ok = within(s.finesse, presets::QUOTED_FINESSE, 0.08) && within(s.hwhm, presets::QUOTED_HWHM, 0.08);
    outcome(ok, format!("finesse {:.0}, HWHM {:.1} kHz", s.finesse, s.hwhm / 1e3))
}

fn circulating() -> Result<Outcome> {
    let r = circulating_power(&presets::reflection_experiment())?;
    let t = circulating_power(&presets::transmission_experiment())?;
    let ok = [r, t]
        .iter()
        .all(|p| (p - presets::CIRCULATING_POWER).abs() <= presets::CIRCULATING_POWER_UNCERTAINTY);
    outcome(ok, format!("reflection {:.1} mW, transmission {:.1} mW", r * 1e3, t * 1e3))
}

fn spring() -> Result<Outcome> {
    let m = presets::microresonator();
    let r = optical_spring_constant(&presets::reflection_experiment(), &m)?.f_os;
    let t = optical_spring_constant(&presets::transmission_experiment(), &m)?.f_os;
    let ok = within(r, presets::SPRING_FREQUENCY, 0.10) && within(t, presets::SPRING_FREQUENCY, 0.10);
    outcome(ok, format!("f_os reflection {:.1} kHz, transmission {:.1} kHz", r / 1e3, t / 1e3))
}

fn band(lo: f64, hi: f64) -> Vec<f64> {
    default_grid().into_iter().filter(|f| *f >= lo && *f <= hi).collect()
}

fn cancellation() -> Result<Outcome> {
    // The cavity of the readout-angle figure: one set of mirrors with both
    // the reflected and transmitted beams available.
    let cfg = presets::reflection_experiment();
    let mode = presets::microresonator();
    let grid = band(1e3, 50e3);
    let model = build_io_model(&cfg, &[mode], &grid)?;
    let w_os = optical_spring_constant(&cfg, &mode)?.omega_os();
    let d = model.quantum_noise_psd(Port::TransmittedD, 0.0)?;
    let r = model.quantum_noise_psd(Port::ReflectedB, 0.0)?;
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for (i, &f) in grid.iter().enumerate() {
        let tol = (2.0 * PI * f / w_os).powi(2) + 0.01;
        let excess = (d.values[i] - 1.0).abs();
        worst = worst.max(excess / tol);
        ok &= excess <= tol;
        ok &= r.values[i] > 1.0;
    }
    let r_min = r.values.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        ok,
        format!("transmission |S-1| up to {worst:.2} of tolerance, reflection min {r_min:.2}"),
    )
}

fn geometry() -> Result<Outcome> {
    let cfg = presets::reflection_experiment();
    let mode = presets::microresonator();
    let f = 20e3;
    let model = build_io_model(&cfg, &[mode], &[f])?;
    let th = thermal_psd_at(&cfg, &[mode], f)?;
    let sweep = sweep_readout_angle(&model, Port::ReflectedB, f, th, &default_angles())?;
    let ShotNoiseCrossings::Roots(roots) = &sweep.crossings else {
        return outcome(false, "no back action at 20 kHz");
    };
    let dip = sweep.thermal_dip_deg;
    let near_90 = roots.iter().any(|r| (r.abs() - 90.0).abs() <= 3.0);
    let near_dip = roots.iter().any(|r| (r - dip).abs() <= 5.0);
    let ok = roots.len() == 2 && near_90 && near_dip && (dip + 60.0).abs() <= 10.0;
    outcome(ok, format!("roots {roots:.1?} deg, thermal dip {dip:.1} deg"))
}

fn orientation() -> Result<Outcome> {
    let grid = default_grid();
    let modes = [presets::microresonator()];
    let t = build_io_model(&presets::transmission_experiment(), &modes, &grid)?;
    let r = build_io_model(&presets::reflection_experiment(), &modes, &grid)?;
    let bt = assemble_budget(&t, &[], Port::TransmittedD, 0.0)?;
    let br = assemble_budget(&r, &[], Port::ReflectedB, 0.0)?;
    let cmp = compare_orientations(&bt, &br)?;
    let Some(ext) = cmp.band_extrema(10e3, 40e3) else {
        return outcome(false, "empty band");
    };
    let peak_db = 20.0 * ext.max_ratio.log10();
    let lower = cmp
        .ratio
        .freqs
        .iter()
        .zip(&cmp.ratio.values)
        .filter(|(f, _)| **f >= 2e3 && **f <= 50e3)
        .all(|(_, r)| *r > 1.0);
    // "Near 20 kHz": within 0.15 decade.
    let located = (ext.f_at_max / 20e3).log10().abs() <= 0.15;
    let at20 = 20.0 * cmp.ratio.interpolate(20e3).log10();
    let ok = (peak_db - 2.0).abs() <= 1.0 && located && lower;
    outcome(
        ok,
        format!(
            "band max {peak_db:.2} dB at {:.1} kHz, {at20:.2} dB at 20 kHz, transmission lower 2-50 kHz: {lower}",
            ext.f_at_max / 1e3
        ),
    )
}

fn suppression() -> Result<Outcome> {
    let c = RadiationPressureCoupling::at_operating_point(&presets::transmission_experiment(), &presets::microresonator())?;
    let f = c.omega_os / (2.0 * PI) / 10.0;
    let r = ideal::power_fluctuation_response(&c, &[f])?[0];
    let factor = r.dp_from_a1.re / c.dp_da1;
    let err = (factor.abs() * 99.0 - 1.0).abs();
    outcome(err <= 1e-9, format!("factor {factor:.12} at Omega_os/10, relative error {err:.1e}"))
}

fn reference_split_model(cfg: &CavityConfig) -> Result<SplitDetectionModel> {
    let grid = log_grid(10.0, FS / 2.0, 4000);
    let model = build_io_model(cfg, &[presets::microresonator()], &grid)?;
    SplitDetectionModel::from_io_model(&model, Port::TransmittedD, 0.0, 0.5, LoopModel::OPEN)
}

fn open_loop_mc() -> Result<Outcome> {
    let model = reference_split_model(&presets::transmission_experiment())?;
    let seg = 4096;
    let n_seg = 256;
    let pair = synthesize_timeseries(&model, (seg * n_seg) as f64 / FS, FS, 11)?;
    let est = welch_csd(&pair, seg, 0.0, Window::Hann)?;
    let edges = log_grid(1e3, 50e3, 11);
    let mut worst: f64 = 0.0;
    for w in edges.windows(2) {
        let stat = est.band_statistic(w[0], w[1]).expect("band has bins");
        let bins = est.band_bins(w[0], w[1]);
        let grid: Vec<f64> = bins.map(|k| est.freqs[k]).collect();
        let a = analytic_csd(&model, &grid)?;
        let want = a.open_loop.iter().map(|z| z.re).sum::<f64>() / grid.len() as f64;
        worst = worst.max((stat.mean.re - want).abs() / stat.sigma_re);
    }
    // Independent vacua only.
    let silent = model.clone().scale_alpha(0.0);
    let pair = synthesize_timeseries(&silent, (seg * n_seg) as f64 / FS, FS, 12)?;
    let est = welch_csd(&pair, seg, 0.0, Window::Hann)?;
    let limit = 5.0 / (est.n_segments as f64).sqrt();
    let coh = est.coherence();
    let max_coh = est
        .band_bins(1e3, 50e3)
        .map(|k| coh[k].sqrt())
        .fold(0.0, f64::max);
    outcome(
        worst <= 3.0 && max_coh < limit,
        format!("worst band deviation {worst:.2} sigma, max |coherence| {max_coh:.3} < {limit:.3}"),
    )
}

fn sweep() -> Result<Outcome> {
    let base = presets::transmission_experiment();
    let p0 = circulating_power(&base)?;
    let models = [1.0 / 12.0, 0.25, 0.5, 1.0]
        .iter()
        .map(|&x| {
            let cfg = base.with_input_power(base.p_in * x);
            Ok((p0 * x, reference_split_model(&cfg)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let points = power_sweep(&models, &SweepSettings::default(), 21)?;
    let rec: Vec<f64> = points.iter().map(|p| p.recovered).collect();
    let mean = rec.iter().sum::<f64>() / rec.len() as f64;
    let spread = rec.iter().map(|r| (r / mean - 1.0).abs()).fold(0.0, f64::max);
    let fit = fit_sqrt_power(&points)?;
    let ok = spread <= 0.10 && fit.b.abs() < 2.0 * fit.sigma_b;
    outcome(
        ok,
        format!(
            "max deviation from mean {:.1}%, sqrt(P) coefficient {:.2} sigma",
            spread * 100.0,
            fit.b / fit.sigma_b
        ),
    )
}

fn closed_loop() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, g) in [0.1, 1.0, 10.0].into_iter().enumerate() {
        let model = SplitDetectionModel::new(
            vec![1.0, FS],
            vec![Complex64::new(1.0, 0.0); 2],
            vec![1.0; 2],
            LoopModel::Flat { gain: g },
        )?;
        let seg = 256;
        let n_seg = 10_240;
        let pair = synthesize_timeseries(&model, (seg * n_seg) as f64 / FS, FS, 31 + i as u64)?;
        let est = welch_csd(&pair, seg, 0.0, Window::Hann)?;
        let stat = est.band_statistic(1e3, 50e3).expect("band has bins");
        let a = analytic_csd(&model, &[20e3])?;
        let derived = a.closed_loop[0].re;
        let printed = a.printed_closed_loop[0].re;
        let z = (stat.mean.re - derived) / stat.sigma_re;
        let z_printed = (stat.mean.re - printed) / stat.sigma_re;
        ok &= z.abs() <= 3.0;
        parts.push(format!(
            "G={g}: MC {:.4}, derived {derived:.4} ({z:+.1} sigma), printed {printed:.4} ({z_printed:+.1} sigma)",
            stat.mean.re
        ));
    }
    outcome(ok, parts.join("; "))
}

fn calibration() -> Result<Outcome> {
    let mass = presets::microresonator().mass;
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let cfg = CavityConfig {
            length: rng.random_range(1e-3..1.0),
            t_in: rng.random_range(1e-5..2e-3),
            t_end: rng.random_range(1e-5..2e-3),
            loss_rt: rng.random_range(1e-6..2e-3),
            detuning: rng.random_range(0.05..3.0),
            wavelength: rng.random_range(500e-9..2000e-9),
            p_in: rng.random_range(1e-6..1e-2),
            injection_side: InjectionSide::ThroughMacroMirror,
        };
        let meas = SpringMeasurement {
            f_os: spring_frequency(&cfg, mass)?,
            p_in: cfg.p_in,
            detuning: cfg.detuning,
            detuning_sigma: 0.0,
            injection_side: cfg.injection_side,
        };
        let known = KnownParameters {
            t_in: cfg.t_in,
            t_end: cfg.t_end,
            length: cfg.length,
            wavelength: cfg.wavelength,
            mass,
        };
        let r = infer_power_and_loss(&meas, &known)?;
        worst = worst
            .max((r.loss_rt / cfg.loss_rt - 1.0).abs())
            .max((r.p_circ / circulating_power(&cfg)? - 1.0).abs());
    }
    let infer_preset = |cfg: CavityConfig, loss: f64| -> Result<(bool, String)> {
        let meas = SpringMeasurement {
            f_os: presets::SPRING_FREQUENCY,
            p_in: cfg.p_in,
            detuning: cfg.detuning,
            detuning_sigma: presets::DETUNING_UNCERTAINTY,
            injection_side: cfg.injection_side,
        };
        let known = KnownParameters {
            t_in: cfg.t_in,
            t_end: cfg.t_end,
            length: cfg.length,
            wavelength: cfg.wavelength,
            mass,
        };
        let r = infer_power_and_loss(&meas, &known)?;
        let ok = (r.p_circ - presets::CIRCULATING_POWER).abs() <= presets::CIRCULATING_POWER_UNCERTAINTY
            && (r.loss_rt - loss).abs() <= 10e-6;
        Ok((
            ok,
            format!(
                "{:.1}+-{:.1} mW, {:.0}+-{:.0} ppm",
                r.p_circ * 1e3,
                r.p_circ_sigma * 1e3,
                r.loss_rt * 1e6,
                r.loss_rt_sigma * 1e6
            ),
        ))
    };
    let (ok_r, d_r) = infer_preset(presets::reflection_experiment(), 200e-6)?;
    let (ok_t, d_t) = infer_preset(presets::transmission_experiment(), 180e-6)?;
    outcome(
        worst <= 1e-6 && ok_r && ok_t,
        format!("round trip worst {worst:.1e}; reflection {d_r}; transmission {d_t}"),
    )
}

fn properties() -> Result<Outcome> {
    let mut notes = Vec::new();

    // Lossless frozen cavity: each output is a unitary mix of the inputs.
    let mut unit_err: f64 = 0.0;
    for d in [-1.3, 0.0, 0.55, 2.0] {
        let cfg = presets::reflection_experiment().with_loss(0.0).with_detuning(d);
        let m = build_io_model(&cfg, &[], &log_grid(100.0, 1e7, 40))?;
        for i in 0..m.grid.len() {
            for port in [Port::ReflectedB, Port::TransmittedD] {
                let g = m.vacuum_gram(i, port)?;
                for r in 0..2 {
                    for c in 0..2 {
                        let want = if r == c { 1.0 } else { 0.0 };
                        unit_err = unit_err.max((g[(r, c)] - want).norm());
                    }
                }
            }
        }
    }
    let vacuum_ok = unit_err <= 1e-9;
    notes.push(format!("vacuum {unit_err:.1e}"));

    // Quadrature sum with an ancillary source.
    let grid = default_grid();
    let m = build_io_model(&presets::transmission_experiment(), &[presets::microresonator()], &grid)?;
    let dark = NoiseSpectrum::new(vec![100.0, 1e5], vec![0.2, 0.05], SpectrumUnits::ShotNoiseRelative)?;
    let b = assemble_budget(
        &m,
        &[AncillaryNoise::new("dark", dark, NoiseReference::ShotNoiseRelative)?],
        Port::TransmittedD,
        0.0,
    )?;
    let mut sum_err: f64 = 0.0;
    for i in 0..grid.len() {
        let s: f64 = b.sources.iter().map(|s| s.spectrum.values[i]).sum();
        sum_err = sum_err.max((b.total.values[i] - s).abs() / s);
    }
    let sum_ok = sum_err <= 1e-12;
    notes.push(format!("budget sum {sum_err:.1e}"));

    // Hermitian CSD and seeded determinism.
    let model = SplitDetectionModel::new(
        vec![1.0, FS],
        vec![Complex64::new(0.7, 0.2); 2],
        vec![2.0; 2],
        LoopModel::default(),
    )?;
    let a = synthesize_timeseries(&model, 65_536.0 / FS, FS, 5)?;
    let again = synthesize_timeseries(&model, 65_536.0 / FS, FS, 5)?;
    let other = synthesize_timeseries(&model, 65_536.0 / FS, FS, 6)?;
    let det_ok = a == again && a.channels != other.channels;
    let e12 = welch_csd(&a, 1024, 0.5, Window::Hann)?;
    let e21 = welch_csd(&a.swapped(), 1024, 0.5, Window::Hann)?;
    let herm_ok = e12.csd.iter().zip(&e21.csd).all(|(x, y)| *x == y.conj());
    notes.push(format!("hermitian {herm_ok}, deterministic {det_ok}"));

    outcome(vacuum_ok && sum_ok && herm_ok && det_ok, notes.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 12] = [
        ("statics regression", statics),
        ("circulating power, both orientations", circulating),
        ("optical spring frequency", spring),
        ("back-action cancellation", cancellation),
        ("readout-angle geometry at 20 kHz", geometry),
        ("orientation comparison", orientation),
        ("power-fluctuation suppression law", suppression),
        ("open-loop cross-correlation", open_loop_mc),
        ("power sweep", sweep),
        ("closed-loop oracle", closed_loop),
        ("calibration", calibration),
        ("property suite", properties),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({detail})",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
