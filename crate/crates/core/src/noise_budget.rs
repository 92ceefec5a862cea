//! Displacement-referred noise budgets.
//!
//! Every source is converted to a one-sided displacement PSD (m^2/Hz) and the
//! total is the sum of the PSDs, i.e. the amplitude spectra add in
//! quadrature. Shot-noise-relative inputs are referred to displacement by
//! dividing by the squared readout signal transfer at the chosen port and
//! quadrature.

use std::f64::consts::PI;

use crate::cavity::{CavityConfig, MechanicalMode};
use crate::dynamics::{effective_susceptibility, EffectiveSusceptibility};
use crate::error::{Error, Result};
use crate::quantum_noise::{IoModel, Port};
use crate::spectrum::{NoiseSpectrum, SpectrumUnits};

pub const QUANTUM_LABEL: &str = "quantum";
pub const THERMAL_LABEL: &str = "thermal";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseReference {
    DisplacementReferred,
    ShotNoiseRelative,
}

/// A measured noise curve (dark noise, classical laser noise, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct AncillaryNoise {
    pub label: String,
    pub spectrum: NoiseSpectrum,
    pub reference: NoiseReference,
}

impl AncillaryNoise {
    pub fn new(label: impl Into<String>, spectrum: NoiseSpectrum, reference: NoiseReference) -> Result<Self> {
        if spectrum.values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("ancillary", "noise values must be finite and >= 0"));
        }
        crate::spectrum::check_grid(&spectrum.freqs)?;
        Ok(Self {
            label: label.into(),
            spectrum,
            reference,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetSource {
    pub label: String,
    /// Displacement PSD, m^2/Hz.
    pub spectrum: NoiseSpectrum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Budget {
    pub port: Port,
    /// Readout angle, radians from the port's amplitude quadrature.
    pub zeta: f64,
    pub sources: Vec<BudgetSource>,
    pub total: NoiseSpectrum,
}

impl Budget {
    pub fn source(&self, label: &str) -> Option<&NoiseSpectrum> {
        self.sources.iter().find(|s| s.label == label).map(|s| &s.spectrum)
    }

    /// Adds a displacement-referred source on the budget grid and updates the
    /// total.
    pub fn with_source(mut self, label: impl Into<String>, spectrum: NoiseSpectrum) -> Result<Self> {
        if spectrum.freqs != self.total.freqs {
            return Err(Error::GridMismatch("source grid differs from budget grid".into()));
        }
        for (t, v) in self.total.values.iter_mut().zip(&spectrum.values) {
            *t += v;
        }
        self.sources.push(BudgetSource {
            label: label.into(),
            spectrum,
        });
        Ok(self)
    }
}

/// Thermal displacement PSD of the mirror including the optical spring,
/// m^2/Hz. Modes are independent, so each mode's free thermal motion adds in
/// power before the spring feedback `1 / (1 + K chi_m)` is applied.
pub fn thermal_displacement_psd(
    modes: &[MechanicalMode],
    chi: &EffectiveSusceptibility,
) -> Result<NoiseSpectrum> {
    let values = chi
        .freqs
        .iter()
        .enumerate()
        .map(|(i, &f)| free_thermal_psd(modes, f).map(|s| s * feedback_factor(chi.mechanical[i], chi.spring[i])))
        .collect::<Result<Vec<_>>>()?;
    NoiseSpectrum::new(chi.freqs.clone(), values, SpectrumUnits::DisplacementPsd)
}

/// |1 / (1 + K chi_m)|^2.
fn feedback_factor(chi_m: num_complex::Complex64, spring: num_complex::Complex64) -> f64 {
    (1.0 + spring * chi_m).inv().norm_sqr()
}

/// Thermal displacement PSD without the optical spring, m^2/Hz.
pub fn free_thermal_psd(modes: &[MechanicalMode], f: f64) -> Result<f64> {
    let w = 2.0 * PI * f;
    modes
        .iter()
        .map(|m| Ok(m.thermal_force_psd(w)? * m.susceptibility(w).norm_sqr()))
        .sum()
}

/// Thermal displacement PSD at a single frequency, m^2/Hz.
pub fn thermal_psd_at(cfg: &CavityConfig, modes: &[MechanicalMode], f: f64) -> Result<f64> {
    let chi = effective_susceptibility(cfg, modes, &[f])?;
    Ok(thermal_displacement_psd(modes, &chi)?.values[0])
}

fn model_thermal(model: &IoModel) -> Result<NoiseSpectrum> {
    let values = model
        .grid
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            free_thermal_psd(&model.modes, f)
                .map(|s| s * feedback_factor(model.chi_mech[i], model.spring[i]))
        })
        .collect::<Result<Vec<_>>>()?;
    NoiseSpectrum::new(model.grid.clone(), values, SpectrumUnits::DisplacementPsd)
}

/// Builds the displacement-referred budget for one readout.
pub fn assemble_budget(
    model: &IoModel,
    ancillary: &[AncillaryNoise],
    port: Port,
    zeta: f64,
) -> Result<Budget> {
    let grid = &model.grid;
    let signal = model.signal_transfer(port, zeta)?;
    let refer = |label: &str, i: usize, v: f64| -> Result<f64> {
        let s = signal[i];
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::UnitMismatch {
                label: label.to_string(),
                reason: format!("readout has no displacement response at {} Hz", grid[i]),
            });
        }
        Ok(v / (s * s))
    };

    let quantum = model.quantum_noise_psd(port, zeta)?;
    let quantum_disp = quantum
        .values
        .iter()
        .enumerate()
        .map(|(i, &q)| refer(QUANTUM_LABEL, i, q))
        .collect::<Result<Vec<_>>>()?;

    let mut sources = vec![
        BudgetSource {
            label: QUANTUM_LABEL.into(),
            spectrum: NoiseSpectrum::new(grid.clone(), quantum_disp, SpectrumUnits::DisplacementPsd)?,
        },
        BudgetSource {
            label: THERMAL_LABEL.into(),
            spectrum: model_thermal(model)?,
        },
    ];
    for a in ancillary {
        let resampled = a.spectrum.resample(grid);
        let values = match a.reference {
            NoiseReference::DisplacementReferred => resampled.values,
            NoiseReference::ShotNoiseRelative => resampled
                .values
                .iter()
                .enumerate()
                .map(|(i, &v)| refer(&a.label, i, v))
                .collect::<Result<Vec<_>>>()?,
        };
        sources.push(BudgetSource {
            label: a.label.clone(),
            spectrum: NoiseSpectrum::new(grid.clone(), values, SpectrumUnits::DisplacementPsd)?,
        });
    }
    let total = (0..grid.len())
        .map(|i| sources.iter().map(|s| s.spectrum.values[i]).sum())
        .collect();
    Ok(Budget {
        port,
        zeta,
        sources,
        total: NoiseSpectrum::new(grid.clone(), total, SpectrumUnits::DisplacementPsd)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandExtrema {
    pub max_ratio: f64,
    pub f_at_max: f64,
    pub min_ratio: f64,
    pub f_at_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrientationComparison {
    /// Amplitude ratio total_R / total_T per frequency.
    pub ratio: NoiseSpectrum,
}

impl OrientationComparison {
    pub fn ratio_db(&self) -> Vec<f64> {
        self.ratio.values.iter().map(|r| 20.0 * r.log10()).collect()
    }

    pub fn band_extrema(&self, f_lo: f64, f_hi: f64) -> Option<BandExtrema> {
        let inside = || {
            self.ratio
                .freqs
                .iter()
                .zip(&self.ratio.values)
                .filter(|(f, _)| **f >= f_lo && **f <= f_hi)
        };
        let max = inside().max_by(|a, b| a.1.total_cmp(b.1))?;
        let min = inside().min_by(|a, b| a.1.total_cmp(b.1))?;
        Some(BandExtrema {
            max_ratio: *max.1,
            f_at_max: *max.0,
            min_ratio: *min.1,
            f_at_min: *min.0,
        })
    }
}

/// Per-frequency amplitude ratio of the reflection total to the
/// transmission total.
pub fn compare_orientations(transmission: &Budget, reflection: &Budget) -> Result<OrientationComparison> {
    if transmission.total.freqs != reflection.total.freqs {
        return Err(Error::GridMismatch("budgets were built on different grids".into()));
    }
    let values = transmission
        .total
        .values
        .iter()
        .zip(&reflection.total.values)
        .map(|(t, r)| (r / t).sqrt())
        .collect();
    Ok(OrientationComparison {
        ratio: NoiseSpectrum::new(transmission.total.freqs.clone(), values, SpectrumUnits::Dimensionless)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::Damping;
    use crate::presets;
    use crate::quantum_noise::build_io_model;

    fn budget(grid: &[f64]) -> Budget {
        let m = build_io_model(&presets::transmission_experiment(), &[presets::microresonator()], grid).unwrap();
        assemble_budget(&m, &[], Port::TransmittedD, 0.0).unwrap()
    }

    #[test]
    fn two_source_total() {
        let b = budget(&[1e3, 2e4]);
        let (q, t) = (b.source(QUANTUM_LABEL).unwrap(), b.source(THERMAL_LABEL).unwrap());
        for i in 0..2 {
            let want = q.values[i] + t.values[i];
            assert!((b.total.values[i] - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn thermal_scales_with_temperature() {
        let cfg = presets::transmission_experiment();
        let mut m = presets::microresonator();
        let a = thermal_psd_at(&cfg, &[m], 2e4).unwrap();
        m.temperature *= 2.0;
        let b = thermal_psd_at(&cfg, &[m], 2e4).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
        m.damping = Damping::Viscous;
        assert!(thermal_psd_at(&cfg, &[m], 2e4).unwrap() > b);
    }

    #[test]
    fn identical_budgets_have_unit_ratio() {
        let b = budget(&[1e3, 2e4, 5e4]);
        let c = compare_orientations(&b, &b).unwrap();
        assert!(c.ratio.values.iter().all(|r| *r == 1.0));
        let other = budget(&[1e3, 2e4]);
        assert!(matches!(compare_orientations(&b, &other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn shot_relative_source_needs_signal() {
        let m = build_io_model(&presets::transmission_experiment(), &[], &[1e3]).unwrap();
        let s = NoiseSpectrum::new(vec![1e3], vec![1.0], SpectrumUnits::ShotNoiseRelative).unwrap();
        let a = AncillaryNoise::new("dark", s, NoiseReference::ShotNoiseRelative).unwrap();
        // A frozen mirror still has a displacement response, so this refers fine.
        let b = assemble_budget(&m, &[a.clone()], Port::TransmittedD, 0.0).unwrap();
        assert!(b.source("dark").unwrap().values[0] > 0.0);
        let dark = build_io_model(&presets::transmission_experiment().with_input_power(0.0), &[], &[1e3]).unwrap();
        assert!(matches!(
            assemble_budget(&dark, &[a], Port::TransmittedD, 0.0),
            Err(Error::UnitMismatch { .. })
        ));
    }

    #[test]
    fn negative_ancillary_rejected() {
        let s = NoiseSpectrum::new(vec![1.0, 2.0], vec![1.0, -1.0], SpectrumUnits::DisplacementPsd).unwrap();
        assert!(AncillaryNoise::new("x", s, NoiseReference::DisplacementReferred).is_err());
    }
}
