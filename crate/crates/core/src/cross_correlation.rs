//! Split-detector cross-correlation with an optional intensity servo.
//!
//! Two detectors each see half of the transmitted beam. With `v1`, `v2` the
//! independent vacuum entering at the splitter and `a x_th` the thermal
//! signal, the in-loop fields are
//!
//! ```text
//! a1 = (v1 + a x_th) / (1 + G)
//! b1 = v2 + a x_th / (1 + G) - G v1 / (1 + G)
//! ```
//!
//! Open loop (G = 0) their cross spectrum is |a|^2 S_th with no vacuum
//! contribution. Closed loop, direct expansion gives
//! (|a|^2 S_th - G) / |1 + G|^2. The commonly quoted closed form
//! |a|^2 S_th / (1 + G) + G / (1 + G)^2 is computed alongside for comparison
//! only.
//!
//! Spectra are one-sided and normalized to shot noise. Cross spectra use
//! `conj(X1) X2`. Fourier transforms use `exp(-i 2 pi f t)`, so a causal
//! single-pole low-pass is `1 / (1 + i f / f_p)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::noise_budget::free_thermal_psd;
use crate::quantum_noise::{IoModel, Port};
use crate::spectrum::check_grid;

/// Samples per independently synthesized block.
pub const CHUNK_LEN: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoopModel {
    /// Frequency-independent gain.
    Flat { gain: f64 },
    /// `dc_gain / (1 + i f / pole_hz)`.
    SinglePole { dc_gain: f64, pole_hz: f64 },
}

impl Default for LoopModel {
    fn default() -> Self {
        LoopModel::from_unity_gain(10.0, 100.0)
    }
}

impl LoopModel {
    pub const OPEN: LoopModel = LoopModel::Flat { gain: 0.0 };

    /// Single pole placed so that |G| = 1 at `unity_hz`.
    pub fn from_unity_gain(dc_gain: f64, unity_hz: f64) -> Self {
        let pole_hz = unity_hz / (dc_gain * dc_gain - 1.0).max(f64::MIN_POSITIVE).sqrt();
        LoopModel::SinglePole { dc_gain, pole_hz }
    }

    pub fn gain(&self, f: f64) -> Complex64 {
        match *self {
            LoopModel::Flat { gain } => Complex64::new(gain, 0.0),
            LoopModel::SinglePole { dc_gain, pole_hz } => {
                dc_gain / Complex64::new(1.0, f / pole_hz)
            }
        }
    }

    /// Rejects loops whose closed-loop pole sits in the right half plane.
    pub fn check_stable(&self) -> Result<()> {
        match *self {
            LoopModel::Flat { gain } => {
                if !gain.is_finite() {
                    return Err(Error::invalid("loop.gain", "must be finite"));
                }
                if 1.0 + gain <= 0.0 {
                    return Err(Error::UnstableLoop(format!("1 + G = {} with flat gain", 1.0 + gain)));
                }
            }
            LoopModel::SinglePole { dc_gain, pole_hz } => {
                if !dc_gain.is_finite() {
                    return Err(Error::invalid("loop.dc_gain", "must be finite"));
                }
                if !(pole_hz.is_finite() && pole_hz > 0.0) {
                    return Err(Error::invalid("loop.pole_hz", "must be > 0"));
                }
                if 1.0 + dc_gain <= 0.0 {
                    return Err(Error::UnstableLoop(format!(
                        "closed-loop pole at s = {:e} rad/s",
                        -2.0 * PI * pole_hz * (1.0 + dc_gain)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-frequency thermal coupling and servo for the split readout.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDetectionModel {
    pub freqs: Vec<f64>,
    /// Readout per meter of thermal motion at each detector.
    pub alpha: Vec<Complex64>,
    /// Thermal displacement PSD, m^2/Hz.
    pub s_th: Vec<f64>,
    pub loop_model: LoopModel,
}

impl SplitDetectionModel {
    pub fn new(freqs: Vec<f64>, alpha: Vec<Complex64>, s_th: Vec<f64>, loop_model: LoopModel) -> Result<Self> {
        check_grid(&freqs)?;
        if alpha.len() != freqs.len() || s_th.len() != freqs.len() {
            return Err(Error::GridMismatch("alpha, s_th and grid lengths differ".into()));
        }
        if s_th.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::invalid("s_th", "must be finite and >= 0"));
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("alpha", "must be finite"));
        }
        if freqs.iter().any(|&f| !loop_model.gain(f).is_finite()) {
            return Err(Error::invalid("loop", "gain is not finite on the grid"));
        }
        Ok(Self {
            freqs,
            alpha,
            s_th,
            loop_model,
        })
    }

    /// Couples the free thermal motion of the mirror to each half of the
    /// beam at `port`. The thermal spectrum is the spring-free motion, so it
    /// does not depend on optical power. The spring is carried by `alpha`.
    pub fn from_io_model(
        model: &IoModel,
        port: Port,
        zeta: f64,
        split: f64,
        loop_model: LoopModel,
    ) -> Result<Self> {
        if !(split > 0.0 && split <= 1.0) {
            return Err(Error::invalid("split", "must lie in (0, 1]"));
        }
        if !model.has_mechanics() {
            return Err(Error::invalid("modes", "split detection needs at least one mechanical mode"));
        }
        let mut alpha = Vec::with_capacity(model.grid.len());
        let mut s_th = Vec::with_capacity(model.grid.len());
        for (i, &f) in model.grid.iter().enumerate() {
            let response = model.chi_eff[i] / model.chi_mech[i];
            alpha.push(model.signal_at(i, port, zeta)? * response * split.sqrt());
            s_th.push(free_thermal_psd(&model.modes, f)?);
        }
        Self::new(model.grid.clone(), alpha, s_th, loop_model)
    }

    pub fn with_loop(self, loop_model: LoopModel) -> Self {
        Self { loop_model, ..self }
    }

    pub fn scale_alpha(mut self, factor: f64) -> Self {
        for a in &mut self.alpha {
            *a *= factor;
        }
        self
    }

    /// alpha at `f`, interpolated in log-magnitude and phase.
    pub fn alpha_at(&self, f: f64) -> Complex64 {
        interp_complex(&self.freqs, &self.alpha, f)
    }

    /// Thermal displacement PSD at `f`, log-log interpolated.
    pub fn s_th_at(&self, f: f64) -> f64 {
        interp_loglog(&self.freqs, &self.s_th, f)
    }

    /// alpha sqrt(S_th): the thermal amplitude in shot-noise units.
    pub fn thermal_amplitude_at(&self, f: f64) -> Complex64 {
        self.alpha_at(f) * self.s_th_at(f).sqrt()
    }
}

fn bracket(freqs: &[f64], f: f64) -> Option<(usize, f64)> {
    let n = freqs.len();
    if f <= freqs[0] || n == 1 {
        return None;
    }
    if f >= freqs[n - 1] {
        return None;
    }
    let hi = freqs.partition_point(|&x| x < f);
    let lo = hi - 1;
    Some((lo, (f / freqs[lo]).ln() / (freqs[hi] / freqs[lo]).ln()))
}

fn interp_loglog(freqs: &[f64], v: &[f64], f: f64) -> f64 {
    match bracket(freqs, f) {
        None if f <= freqs[0] => v[0],
        None => v[v.len() - 1],
        Some((i, t)) => {
            let (a, b) = (v[i], v[i + 1]);
            if a > 0.0 && b > 0.0 {
                (a.ln() + t * (b / a).ln()).exp()
            } else {
                a + t * (b - a)
            }
        }
    }
}

fn interp_complex(freqs: &[f64], v: &[Complex64], f: f64) -> Complex64 {
    match bracket(freqs, f) {
        None if f <= freqs[0] => v[0],
        None => v[v.len() - 1],
        Some((i, t)) => {
            let (a, b) = (v[i], v[i + 1]);
            if a.norm() == 0.0 || b.norm() == 0.0 {
                return a + t * (b - a);
            }
            let mut dphi = b.arg() - a.arg();
            if dphi > PI {
                dphi -= 2.0 * PI;
            } else if dphi < -PI {
                dphi += 2.0 * PI;
            }
            let mag = (a.norm().ln() + t * (b.norm() / a.norm()).ln()).exp();
            Complex64::from_polar(mag, a.arg() + t * dphi)
        }
    }
}

/// Analytic spectra on an arbitrary grid, shot-noise units.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticCsd {
    pub freqs: Vec<f64>,
    /// |alpha|^2 S_th.
    pub open_loop: Vec<Complex64>,
    /// (|alpha|^2 S_th - G) / |1 + G|^2.
    pub closed_loop: Vec<Complex64>,
    /// |alpha|^2 S_th / (1 + G) + G / (1 + G)^2, reported for comparison.
    pub printed_closed_loop: Vec<Complex64>,
    /// Channel 1 auto spectrum in loop, (1 + |alpha|^2 S_th) / |1 + G|^2.
    pub psd1_closed: Vec<f64>,
    /// Channel 2 auto spectrum in loop.
    pub psd2_closed: Vec<f64>,
}

pub fn analytic_csd(model: &SplitDetectionModel, grid: &[f64]) -> Result<AnalyticCsd> {
    check_grid(grid)?;
    model.loop_model.check_stable()?;
    let n = grid.len();
    let mut out = AnalyticCsd {
        freqs: grid.to_vec(),
        open_loop: Vec::with_capacity(n),
        closed_loop: Vec::with_capacity(n),
        printed_closed_loop: Vec::with_capacity(n),
        psd1_closed: Vec::with_capacity(n),
        psd2_closed: Vec::with_capacity(n),
    };
    for &f in grid {
        let th = model.thermal_amplitude_at(f).norm_sqr();
        let g = model.loop_model.gain(f);
        let one_g = 1.0 + g;
        let d = one_g.norm_sqr();
        out.open_loop.push(Complex64::new(th, 0.0));
        out.closed_loop.push((th - g) / d);
        out.printed_closed_loop.push(th / one_g + g / (one_g * one_g));
        out.psd1_closed.push((1.0 + th) / d);
        out.psd2_closed.push(1.0 + (th + g.norm_sqr()) / d);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesPair {
    /// Hz.
    pub sample_rate: f64,
    pub channels: [Vec<f64>; 2],
    pub seed: u64,
}

impl TimeSeriesPair {
    pub fn new(sample_rate: f64, ch1: Vec<f64>, ch2: Vec<f64>, seed: u64) -> Result<Self> {
        if ch1.len() != ch2.len() {
            return Err(Error::GridMismatch(format!(
                "channel lengths differ: {} vs {}",
                ch1.len(),
                ch2.len()
            )));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::invalid("sample_rate", "must be > 0"));
        }
        Ok(Self {
            sample_rate,
            channels: [ch1, ch2],
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels[0].is_empty()
    }

    pub fn swapped(&self) -> Self {
        Self {
            sample_rate: self.sample_rate,
            channels: [self.channels[1].clone(), self.channels[0].clone()],
            seed: self.seed,
        }
    }
}

/// Generates the two in-loop photocurrents. Shaping and loop filters are
/// applied as exact frequency responses on blocks of [`CHUNK_LEN`] samples,
/// each with its own random stream, so output is identical for any thread
/// count.
pub fn synthesize_timeseries(
    model: &SplitDetectionModel,
    duration: f64,
    sample_rate: f64,
    seed: u64,
) -> Result<TimeSeriesPair> {
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::invalid("sample_rate", "must be > 0"));
    }
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::invalid("duration", "must be > 0"));
    }
    model.loop_model.check_stable()?;
    let samples = (duration * sample_rate).round() as usize;
    if samples < 1 << 16 {
        return Err(Error::InsufficientData(format!(
            "{samples} samples requested, need at least 65536"
        )));
    }
    let n_chunks = samples.div_ceil(CHUNK_LEN);
    let filters = ChunkFilters::new(model, sample_rate);
    let blocks = map_chunks(n_chunks, |c| filters.chunk(seed, c as u64));
    let mut ch1 = Vec::with_capacity(n_chunks * CHUNK_LEN);
    let mut ch2 = Vec::with_capacity(n_chunks * CHUNK_LEN);
    for (a, b) in blocks {
        ch1.extend(a);
        ch2.extend(b);
    }
    ch1.truncate(samples);
    ch2.truncate(samples);
    TimeSeriesPair::new(sample_rate, ch1, ch2, seed)
}

#[cfg(feature = "parallel")]
fn map_chunks<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_chunks<T>(n: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..n).map(f).collect()
}

struct ChunkFilters {
    /// alpha sqrt(S_th) per FFT bin, 0..=N/2.
    thermal: Vec<Complex64>,
    /// 1 / (1 + G) per bin.
    loop_in: Vec<Complex64>,
    /// G / (1 + G) per bin.
    loop_cross: Vec<Complex64>,
    sigma: f64,
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    ifft: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl ChunkFilters {
    fn new(model: &SplitDetectionModel, fs: f64) -> Self {
        let n = CHUNK_LEN;
        let half = n / 2;
        let mut thermal = Vec::with_capacity(half + 1);
        let mut loop_in = Vec::with_capacity(half + 1);
        let mut loop_cross = Vec::with_capacity(half + 1);
        for k in 0..=half {
            let f = k as f64 * fs / n as f64;
            let g = model.loop_model.gain(f);
            loop_in.push(1.0 / (1.0 + g));
            loop_cross.push(g / (1.0 + g));
            // No thermal drive at DC or Nyquist so the output stays real.
            thermal.push(if k == 0 || k == half {
                Complex64::new(0.0, 0.0)
            } else {
                model.thermal_amplitude_at(f)
            });
        }
        let mut planner = FftPlanner::new();
        Self {
            thermal,
            loop_in,
            loop_cross,
            // Unit one-sided PSD: variance fs / 2.
            sigma: (fs / 2.0).sqrt(),
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
        }
    }

    fn white(&self, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = (0..CHUNK_LEN)
            .map(|_| {
                let x: f64 = StandardNormal.sample(rng);
                Complex64::new(self.sigma * x, 0.0)
            })
            .collect();
        self.fft.process(&mut v);
        v
    }

    fn chunk(&self, seed: u64, index: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let v1 = self.white(&mut rng);
        let v2 = self.white(&mut rng);
        let w = self.white(&mut rng);
        let n = CHUNK_LEN;
        let half = n / 2;
        let mut a1 = vec![Complex64::new(0.0, 0.0); n];
        let mut b1 = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            // Negative-frequency bins take the conjugate response.
            let (j, conj) = if k <= half { (k, false) } else { (n - k, true) };
            let pick = |z: Complex64| if conj { z.conj() } else { z };
            let th = pick(self.thermal[j]) * w[k];
            let li = pick(self.loop_in[j]);
            let lc = pick(self.loop_cross[j]);
            a1[k] = (v1[k] + th) * li;
            b1[k] = v2[k] + th * li - lc * v1[k];
        }
        self.ifft.process(&mut a1);
        self.ifft.process(&mut b1);
        let scale = 1.0 / n as f64;
        (
            a1.iter().map(|z| z.re * scale).collect(),
            b1.iter().map(|z| z.re * scale).collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Window {
    /// Periodic Hann.
    #[default]
    Hann,
}

impl Window {
    fn coefficients(&self, n: usize) -> Vec<f64> {
        match self {
            Window::Hann => (0..n)
                .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos()))
                .collect(),
        }
    }
}

/// Welch estimate with per-segment cross spectra kept for error bars.
#[derive(Debug, Clone, PartialEq)]
pub struct WelchEstimate {
    /// Bin frequencies from DC to Nyquist, Hz.
    pub freqs: Vec<f64>,
    pub csd: Vec<Complex64>,
    pub psd1: Vec<f64>,
    pub psd2: Vec<f64>,
    pub n_segments: usize,
    pub segment_csd: Vec<Vec<Complex64>>,
}

/// Mean and standard error of a band-averaged quantity over segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandStatistic {
    pub f_lo: f64,
    pub f_hi: f64,
    pub mean: Complex64,
    /// Standard error of the real part.
    pub sigma_re: f64,
    /// Standard error of the imaginary part.
    pub sigma_im: f64,
    pub n_bins: usize,
}

impl WelchEstimate {
    pub fn band_bins(&self, f_lo: f64, f_hi: f64) -> std::ops::Range<usize> {
        let lo = self.freqs.partition_point(|&f| f < f_lo);
        let hi = self.freqs.partition_point(|&f| f <= f_hi);
        lo..hi.max(lo)
    }

    /// Band statistics of `weight(f) * CSD` from the per-segment spread.
    pub fn band_statistic_weighted(&self, f_lo: f64, f_hi: f64, weight: impl Fn(f64) -> f64) -> Option<BandStatistic> {
        let bins = self.band_bins(f_lo, f_hi);
        if bins.is_empty() || self.n_segments < 2 {
            return None;
        }
        let w: Vec<f64> = bins.clone().map(|k| weight(self.freqs[k])).collect();
        let nb = bins.len() as f64;
        let per_seg: Vec<Complex64> = self
            .segment_csd
            .iter()
            .map(|s| bins.clone().zip(&w).map(|(k, w)| s[k] * w).sum::<Complex64>() / nb)
            .collect();
        let n = per_seg.len() as f64;
        let mean = per_seg.iter().sum::<Complex64>() / n;
        let (vr, vi) = per_seg.iter().fold((0.0, 0.0), |(r, i), z| {
            (r + (z.re - mean.re).powi(2), i + (z.im - mean.im).powi(2))
        });
        Some(BandStatistic {
            f_lo,
            f_hi,
            mean,
            sigma_re: (vr / (n - 1.0) / n).sqrt(),
            sigma_im: (vi / (n - 1.0) / n).sqrt(),
            n_bins: bins.len(),
        })
    }

    pub fn band_statistic(&self, f_lo: f64, f_hi: f64) -> Option<BandStatistic> {
        self.band_statistic_weighted(f_lo, f_hi, |_| 1.0)
    }

    /// Magnitude-squared coherence per bin.
    pub fn coherence(&self) -> Vec<f64> {
        self.csd
            .iter()
            .zip(self.psd1.iter().zip(&self.psd2))
            .map(|(c, (a, b))| c.norm_sqr() / (a * b))
            .collect()
    }

    /// Mean PSD of channel 1 over a band.
    pub fn band_mean_psd1(&self, f_lo: f64, f_hi: f64) -> Option<f64> {
        let bins = self.band_bins(f_lo, f_hi);
        (!bins.is_empty()).then(|| bins.clone().map(|k| self.psd1[k]).sum::<f64>() / bins.len() as f64)
    }
}

pub fn welch_csd(
    pair: &TimeSeriesPair,
    segment_length: usize,
    overlap_fraction: f64,
    window: Window,
) -> Result<WelchEstimate> {
    if !segment_length.is_power_of_two() || segment_length < 2 {
        return Err(Error::invalid("segment_length", "must be a power of two"));
    }
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(Error::invalid("overlap_fraction", "must lie in [0, 1)"));
    }
    let n = segment_length;
    let step = ((n as f64) * (1.0 - overlap_fraction)).round().max(1.0) as usize;
    let total = pair.len();
    let n_segments = if total >= n { (total - n) / step + 1 } else { 0 };
    if n_segments < 8 {
        return Err(Error::InsufficientData(format!(
            "{n_segments} segments of {n} samples, need at least 8"
        )));
    }
    let w = window.coefficients(n);
    let fs = pair.sample_rate;
    let norm = 2.0 / (fs * w.iter().map(|x| x * x).sum::<f64>());
    let half = n / 2;
    let fft = FftPlanner::new().plan_fft_forward(n);
    let one_sided = |k: usize| if k == 0 || k == half { norm / 2.0 } else { norm };

    let segments = map_chunks(n_segments, |s| {
        let start = s * step;
        let spectrum = |ch: &[f64]| {
            let mut buf: Vec<Complex64> = ch[start..start + n]
                .iter()
                .zip(&w)
                .map(|(x, w)| Complex64::new(x * w, 0.0))
                .collect();
            fft.process(&mut buf);
            buf.truncate(half + 1);
            buf
        };
        let x1 = spectrum(&pair.channels[0]);
        let x2 = spectrum(&pair.channels[1]);
        let mut c = Vec::with_capacity(half + 1);
        let mut p1 = Vec::with_capacity(half + 1);
        let mut p2 = Vec::with_capacity(half + 1);
        for k in 0..=half {
            let s = one_sided(k);
            c.push(x1[k].conj() * x2[k] * s);
            p1.push(x1[k].norm_sqr() * s);
            p2.push(x2[k].norm_sqr() * s);
        }
        (c, p1, p2)
    });

    let mut csd = vec![Complex64::new(0.0, 0.0); half + 1];
    let mut psd1 = vec![0.0; half + 1];
    let mut psd2 = vec![0.0; half + 1];
    let mut segment_csd = Vec::with_capacity(n_segments);
    for (c, p1, p2) in segments {
        for k in 0..=half {
            csd[k] += c[k];
            psd1[k] += p1[k];
            psd2[k] += p2[k];
        }
        segment_csd.push(c);
    }
    let inv = 1.0 / n_segments as f64;
    csd.iter_mut().for_each(|x| *x *= inv);
    psd1.iter_mut().for_each(|x| *x *= inv);
    psd2.iter_mut().for_each(|x| *x *= inv);
    Ok(WelchEstimate {
        freqs: (0..=half).map(|k| k as f64 * fs / n as f64).collect(),
        csd,
        psd1,
        psd2,
        n_segments,
        segment_csd,
    })
}

/// Monte Carlo settings for [`power_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub sample_rate: f64,
    pub segment_length: usize,
    pub n_segments: usize,
    pub band: (f64, f64),
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            sample_rate: 262_144.0,
            segment_length: 4096,
            n_segments: 1024,
            band: (2e3, 20e3),
        }
    }
}

impl SweepSettings {
    pub fn duration(&self) -> f64 {
        (self.segment_length * self.n_segments) as f64 / self.sample_rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    /// Circulating power label, W.
    pub power: f64,
    /// Band-averaged Re CSD, shot-noise units.
    pub raw: f64,
    pub raw_sigma: f64,
    /// Band-averaged Re CSD / |alpha|^2, m^2/Hz.
    pub recovered: f64,
    pub recovered_sigma: f64,
    /// Band average of the model thermal spectrum, m^2/Hz.
    pub expected: f64,
}

/// Recovers the displacement-referred thermal spectrum at each power.
pub fn power_sweep(models: &[(f64, SplitDetectionModel)], settings: &SweepSettings, seed: u64) -> Result<Vec<SweepPoint>> {
    if models.is_empty() {
        return Err(Error::InsufficientData("no models to sweep".into()));
    }
    let (lo, hi) = settings.band;
    if !(lo > 0.0 && hi > lo && settings.sample_rate > 2.0 * hi) {
        return Err(Error::invalid(
            "band",
            format!("need 0 < f_lo < f_hi < sample_rate / 2, got {lo}..{hi} Hz"),
        ));
    }
    models
        .iter()
        .enumerate()
        .map(|(i, (power, model))| {
            let pair = synthesize_timeseries(
                model,
                settings.duration(),
                settings.sample_rate,
                seed.wrapping_add(i as u64),
            )?;
            let est = welch_csd(&pair, settings.segment_length, 0.0, Window::Hann)?;
            let raw = est
                .band_statistic(lo, hi)
                .ok_or_else(|| Error::InsufficientData("no bins in sweep band".into()))?;
            let rec = est
                .band_statistic_weighted(lo, hi, |f| 1.0 / model.alpha_at(f).norm_sqr())
                .ok_or_else(|| Error::InsufficientData("no bins in sweep band".into()))?;
            let bins = est.band_bins(lo, hi);
            let expected =
                bins.clone().map(|k| model.s_th_at(est.freqs[k])).sum::<f64>() / bins.len() as f64;
            Ok(SweepPoint {
                power: *power,
                raw: raw.mean.re,
                raw_sigma: raw.sigma_re,
                recovered: rec.mean.re,
                recovered_sigma: rec.sigma_re,
                expected,
            })
        })
        .collect()
}

/// Weighted least-squares fit `y = a + b sqrt(P)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtPowerFit {
    pub a: f64,
    pub b: f64,
    pub sigma_a: f64,
    pub sigma_b: f64,
}

pub fn fit_sqrt_power(points: &[SweepPoint]) -> Result<SqrtPowerFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData("need at least three powers".into()));
    }
    let (mut s, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        if !(p.recovered_sigma > 0.0) {
            return Err(Error::InsufficientData("zero uncertainty on a sweep point".into()));
        }
        let w = 1.0 / (p.recovered_sigma * p.recovered_sigma);
        let x = p.power.sqrt();
        s += w;
        sx += w * x;
        sxx += w * x * x;
        sy += w * p.recovered;
        sxy += w * x * p.recovered;
    }
    let det = s * sxx - sx * sx;
    if det <= 0.0 {
        return Err(Error::InsufficientData("powers are not distinct".into()));
    }
    Ok(SqrtPowerFit {
        a: (sxx * sy - sx * sxy) / det,
        b: (s * sxy - sx * sy) / det,
        sigma_a: (sxx / det).sqrt(),
        sigma_b: (s / det).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(th: f64, g: f64) -> SplitDetectionModel {
        SplitDetectionModel::new(
            vec![10.0, 1e6],
            vec![Complex64::new(1.0, 0.0); 2],
            vec![th; 2],
            LoopModel::Flat { gain: g },
        )
        .unwrap()
    }

    #[test]
    fn open_loop_has_no_vacuum_term() {
        let a = analytic_csd(&flat(0.3, 0.0), &[1e3, 2e4]).unwrap();
        assert_eq!(a.open_loop, a.closed_loop);
        assert!((a.open_loop[0].re - 0.3).abs() < 1e-15);
    }

    #[test]
    fn derived_and_printed_closed_loop_differ() {
        let a = analytic_csd(&flat(1.0, 1.0), &[1e3]).unwrap();
        assert!(a.closed_loop[0].norm() < 1e-15);
        assert!((a.printed_closed_loop[0].re - 0.75).abs() < 1e-15);
    }

    #[test]
    fn unstable_loops_rejected() {
        assert!(matches!(LoopModel::Flat { gain: -2.0 }.check_stable(), Err(Error::UnstableLoop(_))));
        let m = flat(1.0, -1.5);
        assert!(matches!(synthesize_timeseries(&m, 1.0, 2.0e5, 1), Err(Error::UnstableLoop(_))));
        let g = LoopModel::from_unity_gain(10.0, 100.0);
        assert!((g.gain(100.0).norm() - 1.0).abs() < 1e-12);
        g.check_stable().unwrap();
    }

    #[test]
    fn identical_and_inverted_channels() {
        let x: Vec<f64> = (0..4096).map(|i| ((i * 7919) % 101) as f64 - 50.0).collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let same = TimeSeriesPair::new(1e3, x.clone(), x.clone(), 0).unwrap();
        let e = welch_csd(&same, 256, 0.5, Window::Hann).unwrap();
        for k in 0..e.freqs.len() {
            assert_eq!(e.csd[k].re, e.psd1[k]);
            assert_eq!(e.csd[k].im, 0.0);
            assert_eq!(e.psd1[k], e.psd2[k]);
        }
        let inv = TimeSeriesPair::new(1e3, x, neg, 0).unwrap();
        let e = welch_csd(&inv, 256, 0.0, Window::Hann).unwrap();
        for k in 0..e.freqs.len() {
            assert_eq!(e.csd[k].re, -e.psd1[k]);
        }
    }

    #[test]
    fn too_few_segments() {
        let p = TimeSeriesPair::new(1e3, vec![0.0; 1000], vec![0.0; 1000], 0).unwrap();
        assert!(matches!(welch_csd(&p, 256, 0.0, Window::Hann), Err(Error::InsufficientData(_))));
        assert!(welch_csd(&p, 100, 0.0, Window::Hann).is_err());
    }

    #[test]
    fn sqrt_fit_recovers_line() {
        let pts: Vec<SweepPoint> = [1.0, 4.0, 9.0]
            .iter()
            .map(|&p: &f64| SweepPoint {
                power: p,
                raw: 0.0,
                raw_sigma: 0.0,
                recovered: 2.0 + 0.5 * p.sqrt(),
                recovered_sigma: 0.1,
                expected: 0.0,
            })
            .collect();
        let f = fit_sqrt_power(&pts).unwrap();
        assert!((f.a - 2.0).abs() < 1e-12 && (f.b - 0.5).abs() < 1e-12);
    }
}
