use std::path::{Path, PathBuf};
use std::process::Command as Proc;

use optomech_cli::spectrum_file::SpectrumFile;
use optomech_cli::{parse_config, parse_config_str, run_command, CliError, Command, Overrides};
use optomech_core::{NoiseSpectrum, SpectrumUnits};

fn example() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/experiment.cfg")
}

fn bin() -> Proc {
    Proc::new(env!("CARGO_BIN_EXE_optomech"))
}

/// Example config with a small Monte Carlo so debug-profile runs stay quick.
fn quick_config(dir: &Path) -> PathBuf {
    let text = std::fs::read_to_string(example()).unwrap();
    let text = text.replace("sample_rate = 262144", "sample_rate = 65536").replace("segments = 256", "segments = 16");
    let path = dir.join("quick.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn misspelled_key_reports_line_and_suggestion() {
    let text = "[cavity]\nlength = 0.01\nt_in = 50e-6\ndetunning = 0.5\n";
    let err = parse_config_str(text, Path::new("typo.cfg")).unwrap_err();
    match &err {
        CliError::Parse { line, message, .. } => {
            assert_eq!(*line, 4);
            assert!(message.contains("detuning"), "{message}");
        }
        other => panic!("unexpected error {other:?}"),
    }
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn canonical_text_round_trips() {
    let cfg = parse_config(&example()).unwrap();
    let text = cfg.to_text();
    let again = parse_config_str(&text, &example()).unwrap();
    assert_eq!(cfg, again);
    assert_eq!(text, again.to_text());
}

#[test]
fn detuning_in_hz_is_converted_to_linewidths() {
    let base = std::fs::read_to_string(example()).unwrap();
    let cfg = parse_config_str(&base, &example()).unwrap();
    assert_eq!(cfg.reflection_cavity.as_ref().unwrap().config.detuning, 0.55);
    let hwhm = optomech_core::cavity::finesse_and_linewidth(&cfg.cavity.config).unwrap().hwhm;
    let hz = base.replacen(
        "detuning = 0.50\ndetuning_sigma = 0.05",
        &format!("detuning = {}\ndetuning_sigma = {}\ndetuning_units = hz", 0.5 * hwhm, 0.05 * hwhm),
        1,
    );
    assert_ne!(hz, base);
    let c2 = parse_config_str(&hz, &example()).unwrap();
    assert!((c2.cavity.config.detuning - 0.5).abs() < 1e-12);
    assert!((c2.cavity.detuning_sigma - 0.05).abs() < 1e-12);
}

#[test]
fn spectrum_file_round_trip_is_lossless() {
    let dir = tempfile::tempdir().unwrap();
    let freqs: Vec<f64> = (1..50).map(|i| 10.0 * 1.13f64.powi(i)).collect();
    let values: Vec<f64> = freqs.iter().map(|f| 1.0 / 3.0 * f.ln() * 1e-35).collect();
    let s = NoiseSpectrum::new(freqs, values, SpectrumUnits::DisplacementPsd).unwrap();
    let path = dir.path().join("s.csv");
    SpectrumFile::from_spectrum("x", "test", "h", &s).write(&path).unwrap();
    let back = SpectrumFile::read(&path).unwrap();
    assert_eq!(back.freqs, s.freqs);
    assert_eq!(back.values, s.values);
    assert_eq!(back.units, SpectrumUnits::DisplacementPsd.label());
}

#[test]
fn budget_without_ancillary_sums_sources() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(&example()).unwrap();
    assert!(cfg.ancillary.is_empty());
    let rep = run_command(Command::Budget, &cfg, dir.path(), &Overrides::default()).unwrap();
    assert_eq!(rep.files.len(), 3);
    let read = |n: &str| SpectrumFile::read(&dir.path().join(n)).unwrap();
    let (q, t, tot) = (read("budget_quantum.csv"), read("budget_thermal.csv"), read("budget_total.csv"));
    for i in 0..tot.values.len() {
        let sum = q.values[i] + t.values[i];
        assert!((tot.values[i] - sum).abs() <= 1e-12 * sum);
    }
    assert_eq!(q.params_hash, tot.params_hash);
    assert_eq!(tot.params_hash.len(), 64);
}

#[test]
fn ancillary_noise_enters_the_budget() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("dark.csv"), "frequency_hz,value\n10,0.1\n1e6,0.1\n").unwrap();
    let text = std::fs::read_to_string(example()).unwrap()
        + "\n[ancillary]\nlabel = dark\nfile = dark.csv\nreference = shot_noise\n";
    let cfg_path = dir.path().join("with_dark.cfg");
    std::fs::write(&cfg_path, text).unwrap();
    let cfg = parse_config(&cfg_path).unwrap();
    let out = dir.path().join("out");
    let rep = run_command(Command::Budget, &cfg, &out, &Overrides::default()).unwrap();
    assert_eq!(rep.files.len(), 4);
    let dark = SpectrumFile::read(&out.join("budget_dark.csv")).unwrap();
    assert!(dark.values.iter().all(|v| *v > 0.0));
    let reparsed = parse_config_str(&cfg.to_text(), &cfg_path).unwrap();
    assert_eq!(reparsed, cfg);
}

#[test]
fn statics_matches_reference_operating_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["statics", "--config"])
        .arg(example())
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("statics.csv")).unwrap();
    let row: Vec<f64> = text
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    let (p_circ, f_os) = (row[3], row[5]);
    assert!((p_circ - 0.153).abs() < 0.005, "{p_circ}");
    assert!((f_os / 142e3 - 1.0).abs() < 0.1, "{f_os}");
}

#[test]
fn mc_csd_is_bit_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    let run = |sub: &str| {
        let o = dir.path().join(sub);
        let status = bin()
            .args(["mc-csd", "--seed", "11", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&o)
            .output()
            .unwrap();
        assert!(status.status.success());
        std::fs::read(o.join("mc_csd.csv")).unwrap()
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    let single = bin()
        .env("RAYON_NUM_THREADS", "1")
        .args(["mc-csd", "--seed", "11", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("c"))
        .output()
        .unwrap();
    assert!(single.status.success());
    assert_eq!(a, std::fs::read(dir.path().join("c/mc_csd.csv")).unwrap());
}

#[test]
fn exit_codes_distinguish_input_and_numerical_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "[cavity]\nlenght = 0.01\n").unwrap();
    let out = bin().args(["statics", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error[parse]"), "{err}");
    assert!(err.contains(":2:") && err.contains("`length`"), "{err}");

    let missing = bin().args(["statics", "--config", "/nonexistent/x.cfg"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));

    // a spring target above what the lossless cavity can reach has no solution
    let text = std::fs::read_to_string(example()).unwrap().replace("f_os = 142e3", "f_os = 900e3");
    let cfg = dir.path().join("unreachable.cfg");
    std::fs::write(&cfg, text).unwrap();
    let out = bin()
        .args(["calibrate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[numerical]"));
}

#[test]
fn overrides_change_the_hash() {
    let cfg = parse_config(&example()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let a = run_command(Command::ShowConfig, &cfg, dir.path(), &Overrides::default()).unwrap();
    let b = run_command(
        Command::ShowConfig,
        &cfg,
        dir.path(),
        &Overrides {
            angle_deg: Some(30.0),
            ..Default::default()
        },
    )
    .unwrap();
    assert!(b.text.contains("angle_deg = 30.0"));
    assert_ne!(a.text, b.text);
    assert!(a.files.is_empty());
}
