//! Frequency grids and one-sided spectra.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectrumUnits {
    /// Displacement PSD, m^2/Hz.
    DisplacementPsd,
    /// PSD relative to shot noise (vacuum = 1).
    ShotNoiseRelative,
    /// Plain ratio.
    Dimensionless,
}

impl SpectrumUnits {
    pub fn label(&self) -> &'static str {
        match self {
            SpectrumUnits::DisplacementPsd => "m^2/Hz",
            SpectrumUnits::ShotNoiseRelative => "shot-noise-relative",
            SpectrumUnits::Dimensionless => "dimensionless",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpectrum {
    pub freqs: Vec<f64>,
    pub values: Vec<f64>,
    pub units: SpectrumUnits,
}

impl NoiseSpectrum {
    pub fn new(freqs: Vec<f64>, values: Vec<f64>, units: SpectrumUnits) -> Result<Self> {
        if freqs.len() != values.len() {
            return Err(Error::GridMismatch(format!(
                "{} frequencies but {} values",
                freqs.len(),
                values.len()
            )));
        }
        check_grid(&freqs)?;
        Ok(Self { freqs, values, units })
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Amplitude spectral density (square root of each value).
    pub fn asd(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.sqrt()).collect()
    }

    /// Linear interpolation in log-log space. Points outside the sampled
    /// range take the nearest end value. Zero samples fall back to linear
    /// interpolation on that interval.
    pub fn interpolate(&self, f: f64) -> f64 {
        let n = self.freqs.len();
        if n == 0 {
            return 0.0;
        }
        if f <= self.freqs[0] {
            return self.values[0];
        }
        if f >= self.freqs[n - 1] {
            return self.values[n - 1];
        }
        let hi = self.freqs.partition_point(|&x| x < f);
        let lo = hi - 1;
        let (f0, f1) = (self.freqs[lo], self.freqs[hi]);
        let (v0, v1) = (self.values[lo], self.values[hi]);
        if v0 > 0.0 && v1 > 0.0 && f0 > 0.0 {
            let t = (f / f0).ln() / (f1 / f0).ln();
            (v0.ln() + t * (v1 / v0).ln()).exp()
        } else {
            let t = (f - f0) / (f1 - f0);
            v0 + t * (v1 - v0)
        }
    }

    pub fn resample(&self, grid: &[f64]) -> NoiseSpectrum {
        NoiseSpectrum {
            freqs: grid.to_vec(),
            values: grid.iter().map(|&f| self.interpolate(f)).collect(),
            units: self.units,
        }
    }

    /// Mean value over bins with f_lo <= f <= f_hi.
    pub fn band_mean(&self, f_lo: f64, f_hi: f64) -> Option<f64> {
        let (sum, n) = self
            .freqs
            .iter()
            .zip(&self.values)
            .filter(|(f, _)| **f >= f_lo && **f <= f_hi)
            .fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
        (n > 0).then(|| sum / n as f64)
    }
}

/// Requires a non-empty, strictly increasing, strictly positive grid.
pub fn check_grid(freqs: &[f64]) -> Result<()> {
    if freqs.is_empty() {
        return Err(Error::invalid("grid", "frequency grid is empty"));
    }
    if freqs.iter().any(|f| !f.is_finite() || *f <= 0.0) {
        return Err(Error::invalid("grid", "frequencies must be finite and > 0"));
    }
    if freqs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid", "frequencies must be strictly increasing"));
    }
    Ok(())
}

pub fn log_grid(f_min: f64, f_max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![f_min];
    }
    let (a, b) = (f_min.ln(), f_max.ln());
    (0..points)
        .map(|i| {
            if i == 0 {
                f_min
            } else if i == points - 1 {
                f_max
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

pub fn linear_grid(f_min: f64, f_max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![f_min];
    }
    (0..points)
        .map(|i| f_min + (f_max - f_min) * i as f64 / (points - 1) as f64)
        .collect()
}

/// The default analysis grid: 1000 log-spaced points from 100 Hz to 100 kHz.
pub fn default_grid() -> Vec<f64> {
    log_grid(100.0, 100e3, 1000)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_interpolation_is_exact_for_power_laws() {
        let f = log_grid(10.0, 1e4, 7);
        let v: Vec<f64> = f.iter().map(|x| 3.0 / x).collect();
        let s = NoiseSpectrum::new(f, v, SpectrumUnits::DisplacementPsd).unwrap();
        let got = s.interpolate(123.4);
        assert!((got - 3.0 / 123.4).abs() < 1e-12 * got);
        assert_eq!(s.interpolate(1.0), s.values[0]);
    }

    #[test]
    fn grid_validation() {
        assert!(check_grid(&[1.0, 2.0, 3.0]).is_ok());
        assert!(check_grid(&[0.0, 2.0]).is_err());
        assert!(check_grid(&[2.0, 2.0]).is_err());
        assert!(check_grid(&[]).is_err());
        let g = default_grid();
        assert_eq!(g.len(), 1000);
        assert_eq!(g[0], 100.0);
        assert_eq!(g[999], 100e3);
        check_grid(&g).unwrap();
    }
}
