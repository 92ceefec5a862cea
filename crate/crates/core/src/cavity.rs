//! Cavity and mechanical parameter types and the static (DC) cavity quantities.
//!
//! All formulas assume the high-finesse regime: power buildup is linear in the
//! mirror transmissions and the detuning response is Lorentzian.
//!
//! Detuning is measured in units of the cavity half-width at half maximum.
//! Positive detuning means the laser is blue of the cavity resonance, which
//! gives a positive (restoring) optical spring. Plots that label the same
//! operating point "-0.55 linewidths" use the opposite sign convention.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::constants::{C, HBAR, K_B};
use crate::error::{Error, Result};

/// Which mirror the laser enters through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InjectionSide {
    /// Light enters through the macroscopic mirror and leaves through the
    /// microresonator (transmission readout).
    ThroughMacroMirror,
    /// Light enters through the microresonator and is detected in reflection.
    ThroughMicroresonator,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityConfig {
    /// Cavity length, m.
    pub length: f64,
    /// Power transmission of the injection-side mirror.
    pub t_in: f64,
    /// Power transmission of the far mirror.
    pub t_end: f64,
    /// Excess round-trip power loss.
    pub loss_rt: f64,
    /// Detuning in HWHM linewidths (signed).
    pub detuning: f64,
    /// Laser wavelength, m.
    pub wavelength: f64,
    /// Input power, W.
    pub p_in: f64,
    pub injection_side: InjectionSide,
}

impl CavityConfig {
    pub fn validate(&self) -> Result<()> {
        positive("length", self.length)?;
        positive("wavelength", self.wavelength)?;
        if !self.p_in.is_finite() || self.p_in < 0.0 {
            return Err(Error::invalid("p_in", format!("must be >= 0, got {}", self.p_in)));
        }
        unit_open("t_in", self.t_in)?;
        unit_open("t_end", self.t_end)?;
        if !self.loss_rt.is_finite() || !(0.0..1.0).contains(&self.loss_rt) {
            return Err(Error::invalid(
                "loss_rt",
                format!("must lie in [0, 1), got {}", self.loss_rt),
            ));
        }
        if self.total_loss() >= 1.0 {
            return Err(Error::invalid(
                "t_in + t_end + loss_rt",
                format!("must be < 1, got {}", self.total_loss()),
            ));
        }
        if !self.detuning.is_finite() {
            return Err(Error::invalid("detuning", "must be finite"));
        }
        Ok(())
    }

    /// Total round-trip power loss including both mirror transmissions.
    pub fn total_loss(&self) -> f64 {
        self.t_in + self.t_end + self.loss_rt
    }

    pub fn with_detuning(self, detuning: f64) -> Self {
        Self { detuning, ..self }
    }

    pub fn with_input_power(self, p_in: f64) -> Self {
        Self { p_in, ..self }
    }

    pub fn with_loss(self, loss_rt: f64) -> Self {
        Self { loss_rt, ..self }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be > 0, got {v}")))
    }
}

fn unit_open(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in (0, 1), got {v}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Damping {
    /// Frequency-independent loss angle 1/Q.
    Structural,
    /// Velocity-proportional damping.
    Viscous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicalMode {
    /// Effective mass, kg.
    pub mass: f64,
    /// Natural resonance frequency, Hz.
    pub f_m: f64,
    pub q: f64,
    /// Bath temperature, K.
    pub temperature: f64,
    pub damping: Damping,
}

impl MechanicalMode {
    pub fn validate(&self) -> Result<()> {
        positive("mass", self.mass)?;
        positive("f_m", self.f_m)?;
        if !(self.q > 0.0) {
            return Err(Error::invalid("q", format!("must be > 0, got {}", self.q)));
        }
        positive("temperature", self.temperature)
    }

    pub fn omega_m(&self) -> f64 {
        2.0 * PI * self.f_m
    }

    /// Bare mechanical susceptibility x/F in m/N at angular frequency `omega`,
    /// using the exp(-i omega t) convention (damping shows up as a negative
    /// imaginary part of the inverse).
    pub fn susceptibility(&self, omega: f64) -> Complex64 {
        let wm = self.omega_m();
        let inv = match self.damping {
            Damping::Structural => {
                Complex64::new(self.mass * (wm * wm - omega * omega), -self.mass * wm * wm / self.q)
            }
            Damping::Viscous => Complex64::new(
                self.mass * (wm * wm - omega * omega),
                -self.mass * wm * omega / self.q,
            ),
        };
        inv.inv()
    }

    /// One-sided thermal force PSD in N^2/Hz from the fluctuation-dissipation
    /// theorem. `omega` must be strictly positive.
    pub fn thermal_force_psd(&self, omega: f64) -> Result<f64> {
        if !(omega > 0.0) {
            return Err(Error::invalid(
                "frequency",
                "thermal force noise is undefined at or below DC",
            ));
        }
        let wm = self.omega_m();
        let base = 4.0 * K_B * self.temperature * self.mass;
        Ok(match self.damping {
            Damping::Structural => base * wm * wm / (self.q * omega),
            Damping::Viscous => base * wm / self.q,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityStatics {
    pub finesse: f64,
    /// Free spectral range, Hz.
    pub fsr: f64,
    /// Half width at half maximum, Hz.
    pub hwhm: f64,
}

pub fn finesse_and_linewidth(cfg: &CavityConfig) -> Result<CavityStatics> {
    cfg.validate()?;
    let finesse = 2.0 * PI / cfg.total_loss();
    let fsr = C / (2.0 * cfg.length);
    Ok(CavityStatics {
        finesse,
        fsr,
        hwhm: fsr / (2.0 * finesse),
    })
}

/// Circulating power in watts at the configured detuning.
pub fn circulating_power(cfg: &CavityConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(resonant_power(cfg) / (1.0 + cfg.detuning * cfg.detuning))
}

fn resonant_power(cfg: &CavityConfig) -> f64 {
    let t = cfg.total_loss();
    cfg.p_in * 4.0 * cfg.t_in / (t * t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalSpring {
    /// Spring constant, N/m. Positive is restoring.
    pub k_os: f64,
    /// Spring resonance sqrt(k/m)/2pi, Hz, carrying the sign of `k_os`.
    pub f_os: f64,
}

impl OpticalSpring {
    pub fn omega_os(&self) -> f64 {
        2.0 * PI * self.f_os
    }
}

/// Quasi-static optical spring. Only the mode's mass is used.
pub fn optical_spring_constant(cfg: &CavityConfig, mode: &MechanicalMode) -> Result<OpticalSpring> {
    mode.validate()?;
    let k_os = quasi_static_spring(cfg)?;
    Ok(OpticalSpring {
        k_os,
        f_os: k_os.signum() * (k_os.abs() / mode.mass).sqrt() / (2.0 * PI),
    })
}

/// Quasi-static spring constant in N/m.
pub fn quasi_static_spring(cfg: &CavityConfig) -> Result<f64> {
    let statics = finesse_and_linewidth(cfg)?;
    let d = cfg.detuning;
    let onep = 1.0 + d * d;
    Ok((2.0 * resonant_power(cfg) / C) * (8.0 * statics.finesse * d / cfg.wavelength) / (onep * onep))
}

/// Frequency-dependent optical spring K(omega) in N/m. Reduces to the
/// quasi-static value at omega = 0; its positive imaginary part for blue
/// detuning is the optical anti-damping.
pub fn dynamic_spring(cfg: &CavityConfig, omega: f64) -> Result<Complex64> {
    let k0 = quasi_static_spring(cfg)?;
    let op = OperatingPoint::new(cfg)?;
    let kappa = Complex64::new(op.kappa, -omega);
    let delta2 = op.delta * op.delta;
    Ok(k0 * (op.kappa * op.kappa + delta2) / (kappa * kappa + delta2))
}

/// Carrier amplitudes and coupling rates at the operating point.
///
/// Field amplitudes are normalized to photon flux (sqrt(photons/s)) outside
/// the cavity and photon number (sqrt(photons)) inside. The input carrier is
/// real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    /// Amplitude decay rates (angular HWHM contribution) of the injection
    /// mirror, far mirror, and lumped loss, rad/s.
    pub kappa_in: f64,
    pub kappa_end: f64,
    pub kappa_loss: f64,
    /// Total HWHM, rad/s.
    pub kappa: f64,
    /// Laser minus cavity angular frequency, rad/s.
    pub delta: f64,
    /// Optical angular frequency, rad/s.
    pub omega0: f64,
    /// Frequency pull per unit mirror displacement, omega0 / length.
    pub pull: f64,
    pub input_amplitude: f64,
    pub intracavity: Complex64,
    pub length: f64,
}

impl OperatingPoint {
    pub fn new(cfg: &CavityConfig) -> Result<Self> {
        cfg.validate()?;
        let rate = |t: f64| C * t / (4.0 * cfg.length);
        let kappa_in = rate(cfg.t_in);
        let kappa_end = rate(cfg.t_end);
        let kappa_loss = rate(cfg.loss_rt);
        let kappa = kappa_in + kappa_end + kappa_loss;
        let delta = cfg.detuning * kappa;
        let omega0 = 2.0 * PI * C / cfg.wavelength;
        let input_amplitude = (cfg.p_in / (HBAR * omega0)).sqrt();
        let intracavity = (2.0 * kappa_in).sqrt() * input_amplitude / Complex64::new(kappa, -delta);
        Ok(Self {
            kappa_in,
            kappa_end,
            kappa_loss,
            kappa,
            delta,
            omega0,
            pull: omega0 / cfg.length,
            input_amplitude,
            intracavity,
            length: cfg.length,
        })
    }

    /// Circulating power, W.
    pub fn circulating_power(&self) -> f64 {
        HBAR * self.omega0 * self.intracavity.norm_sqr() * C / (2.0 * self.length)
    }

    /// Promptly reflected plus leaked carrier at the injection port.
    pub fn reflected_carrier(&self) -> Complex64 {
        (2.0 * self.kappa_in).sqrt() * self.intracavity - self.input_amplitude
    }

    pub fn transmitted_carrier(&self) -> Complex64 {
        (2.0 * self.kappa_end).sqrt() * self.intracavity
    }

    pub fn loss_carrier(&self) -> Complex64 {
        (2.0 * self.kappa_loss).sqrt() * self.intracavity
    }
}
