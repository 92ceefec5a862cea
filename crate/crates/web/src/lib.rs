//! wasm-bindgen exports for the static demo page in `www/`.
//!
//! Each export returns a [`Series`]: a shared x axis, one or more y traces
//! and a short list of scalar markers the page annotates.

use optomech_core::calibration::{optimal_detuning, spring_frequency};
use optomech_core::noise_budget::{assemble_budget, compare_orientations, thermal_psd_at};
use optomech_core::presets::{microresonator, reflection_experiment, transmission_experiment};
use optomech_core::quantum_noise::{default_angles, sweep_readout_angle, ShotNoiseCrossings};
use optomech_core::spectrum::log_grid;
use optomech_core::{build_io_model, CavityConfig, Port};
use wasm_bindgen::prelude::*;

#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    x: Vec<f64>,
    ys: Vec<Vec<f64>>,
    markers: Vec<f64>,
}

#[wasm_bindgen]
impl Series {
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    pub fn y(&self, i: usize) -> Vec<f64> {
        self.ys.get(i).cloned().unwrap_or_default()
    }

    #[wasm_bindgen(js_name = traceCount)]
    pub fn trace_count(&self) -> usize {
        self.ys.len()
    }

    pub fn markers(&self) -> Vec<f64> {
        self.markers.clone()
    }
}

fn preset(transmission: bool, power_scale: f64) -> CavityConfig {
    let c = if transmission {
        transmission_experiment()
    } else {
        reflection_experiment()
    };
    c.with_input_power(c.p_in * power_scale)
}

fn port(transmission: bool) -> Port {
    if transmission {
        Port::TransmittedD
    } else {
        Port::ReflectedB
    }
}

/// Quantum, thermal and total noise (shot-noise units) against readout
/// angle. Markers: shot-noise crossing angles followed by the thermal dip.
pub fn angle_sweep_series(transmission: bool, freq_hz: f64, power_scale: f64) -> optomech_core::Result<Series> {
    let cfg = preset(transmission, power_scale);
    let modes = [microresonator()];
    let model = build_io_model(&cfg, &modes, &[freq_hz])?;
    let th = thermal_psd_at(&cfg, &modes, freq_hz)?;
    let sweep = sweep_readout_angle(&model, port(transmission), freq_hz, th, &default_angles())?;
    let mut markers = match sweep.crossings {
        ShotNoiseCrossings::Roots(r) => r,
        ShotNoiseCrossings::Degenerate => Vec::new(),
    };
    markers.push(sweep.thermal_dip_deg);
    Ok(Series {
        x: sweep.rows.iter().map(|r| r.angle_deg).collect(),
        ys: vec![
            sweep.rows.iter().map(|r| r.quantum).collect(),
            sweep.rows.iter().map(|r| r.thermal).collect(),
            sweep.rows.iter().map(|r| r.total).collect(),
        ],
        markers,
    })
}

/// Total displacement noise ASD for transmission and reflection readout
/// and their ratio in dB. Markers: peak ratio (dB) and its frequency
/// within 10-40 kHz.
pub fn orientation_series(angle_deg: f64, power_scale: f64) -> optomech_core::Result<Series> {
    let grid = log_grid(1e3, 100e3, 300);
    let modes = [microresonator()];
    let budget = |transmission: bool| {
        let m = build_io_model(&preset(transmission, power_scale), &modes, &grid)?;
        assemble_budget(&m, &[], port(transmission), angle_deg.to_radians())
    };
    let bt = budget(true)?;
    let br = budget(false)?;
    let cmp = compare_orientations(&bt, &br)?;
    let markers = cmp
        .band_extrema(10e3, 40e3)
        .map(|e| vec![20.0 * e.max_ratio.log10(), e.f_at_max])
        .unwrap_or_default();
    Ok(Series {
        x: grid,
        ys: vec![
            bt.total.values.iter().map(|v| v.sqrt()).collect(),
            br.total.values.iter().map(|v| v.sqrt()).collect(),
            cmp.ratio_db(),
        ],
        markers,
    })
}

/// Signed optical spring frequency (Hz) against detuning in linewidths.
/// Markers: spring-maximizing detuning and the peak frequency.
pub fn spring_series(transmission: bool, power_scale: f64, loss_ppm: f64) -> optomech_core::Result<Series> {
    let cfg = preset(transmission, power_scale).with_loss(loss_ppm * 1e-6);
    let mass = microresonator().mass;
    let x: Vec<f64> = (0..=400).map(|i| -3.0 + 6.0 * i as f64 / 400.0).collect();
    let f = x
        .iter()
        .map(|&d| spring_frequency(&cfg.with_detuning(d), mass))
        .collect::<optomech_core::Result<Vec<_>>>()?;
    let opt = optimal_detuning(&cfg, mass)?;
    Ok(Series {
        x,
        ys: vec![f],
        markers: vec![opt.delta_star, opt.f_os_max],
    })
}

fn js(e: optomech_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = angleSweep)]
pub fn angle_sweep(transmission: bool, freq_hz: f64, power_scale: f64) -> Result<Series, JsError> {
    angle_sweep_series(transmission, freq_hz, power_scale).map_err(js)
}

#[wasm_bindgen(js_name = orientationComparison)]
pub fn orientation_comparison(angle_deg: f64, power_scale: f64) -> Result<Series, JsError> {
    orientation_series(angle_deg, power_scale).map_err(js)
}

#[wasm_bindgen(js_name = springVsDetuning)]
pub fn spring_vs_detuning(transmission: bool, power_scale: f64, loss_ppm: f64) -> Result<Series, JsError> {
    spring_series(transmission, power_scale, loss_ppm).map_err(js)
}
