//! Parameter sets of the 1 cm GaAs microresonator cavity.
//!
//! `reflection_experiment` injects through the 250 ppm microresonator and
//! detects in reflection; `transmission_experiment` injects through the
//! 50 ppm macroscopic mirror and detects the light transmitted by the
//! microresonator. Both run at about 155 mW circulating power.

use crate::cavity::{CavityConfig, Damping, InjectionSide, MechanicalMode};

pub const LENGTH: f64 = 0.01;
pub const WAVELENGTH: f64 = 1064e-9;
pub const T_MACRO: f64 = 50e-6;
pub const T_MICRO: f64 = 250e-6;

/// Measured optical spring frequency in both orientations, Hz.
pub const SPRING_FREQUENCY: f64 = 142e3;
/// Circulating power inferred from the spring measurement, W.
pub const CIRCULATING_POWER: f64 = 0.155;
pub const CIRCULATING_POWER_UNCERTAINTY: f64 = 0.010;
pub const DETUNING_UNCERTAINTY: f64 = 0.05;
/// Quoted finesse and HWHM linewidth (Hz).
pub const QUOTED_FINESSE: f64 = 13_000.0;
pub const QUOTED_HWHM: f64 = 580e3;

pub fn microresonator() -> MechanicalMode {
    MechanicalMode {
        mass: 50e-12,
        f_m: 876.0,
        q: 16_000.0,
        temperature: 295.0,
        damping: Damping::Structural,
    }
}

pub fn reflection_experiment() -> CavityConfig {
    CavityConfig {
        length: LENGTH,
        t_in: T_MICRO,
        t_end: T_MACRO,
        loss_rt: 200e-6,
        detuning: 0.55,
        wavelength: WAVELENGTH,
        p_in: 50e-6,
        injection_side: InjectionSide::ThroughMicroresonator,
    }
}

pub fn transmission_experiment() -> CavityConfig {
    CavityConfig {
        length: LENGTH,
        t_in: T_MACRO,
        t_end: T_MICRO,
        loss_rt: 180e-6,
        detuning: 0.50,
        wavelength: WAVELENGTH,
        p_in: 220e-6,
        injection_side: InjectionSide::ThroughMacroMirror,
    }
}
