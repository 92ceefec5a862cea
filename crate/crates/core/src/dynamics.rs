//! Mirror motion and intracavity power fluctuations under radiation pressure.
//!
//! Sign convention: positive displacement points against the radiation
//! pressure force, so the mirror obeys
//!
//! ```text
//! m x'' = -(2/c) [ (dP/da1)_x a1 + (dP/dx)_a1 x ] + F_ext
//! ```
//!
//! with `(2/c) (dP/dx)_a1 = m Omega_os^2`. The `ideal` forms drop the
//! mechanical resonance and damping and use the quasi-static spring. The full
//! forms keep the bare mechanical susceptibility (all modes summed) and the
//! frequency-dependent optical spring.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cavity::{
    dynamic_spring, optical_spring_constant, CavityConfig, MechanicalMode, OperatingPoint,
};
use crate::constants::{C, HBAR};
use crate::error::{Error, Result};
use crate::spectrum::check_grid;

/// Radiation pressure coupling at the operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiationPressureCoupling {
    /// Intracavity power per unit injection-port amplitude-quadrature
    /// fluctuation at fixed mirror position, W.
    pub dp_da1: f64,
    /// Intracavity power change per unit displacement at fixed input, W/m.
    pub dp_dx: f64,
    pub mass: f64,
    /// Quasi-static optical spring angular frequency, rad/s.
    pub omega_os: f64,
}

impl RadiationPressureCoupling {
    /// Builds the coupling and checks `(2/c) dp_dx = m Omega_os^2`.
    pub fn new(dp_da1: f64, dp_dx: f64, mass: f64, omega_os: f64) -> Result<Self> {
        let lhs = 2.0 / C * dp_dx;
        let rhs = mass * omega_os * omega_os;
        if !((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(f64::MIN_POSITIVE)) {
            return Err(Error::invalid(
                "dp_dx",
                format!("(2/c) dP/dx = {lhs:e} but m Omega_os^2 = {rhs:e}"),
            ));
        }
        Ok(Self {
            dp_da1,
            dp_dx,
            mass,
            omega_os,
        })
    }

    pub fn at_operating_point(cfg: &CavityConfig, mode: &MechanicalMode) -> Result<Self> {
        let spring = optical_spring_constant(cfg, mode)?;
        let op = OperatingPoint::new(cfg)?;
        let dp_da1 = open_loop_power_response(&op, 0.0).re;
        let dp_dx = C / 2.0 * spring.k_os;
        if spring.k_os >= 0.0 {
            Self::new(dp_da1, dp_dx, mode.mass, (spring.k_os / mode.mass).sqrt())
        } else {
            // Anti-restoring spring: there is no real spring resonance.
            Ok(Self {
                dp_da1,
                dp_dx,
                mass: mode.mass,
                omega_os: f64::NAN,
            })
        }
    }
}

/// Open-loop intracavity power response to the injection-port amplitude
/// quadrature at angular frequency `omega`, W per unit quadrature.
pub fn open_loop_power_response(op: &OperatingPoint, omega: f64) -> Complex64 {
    let amp = op.intracavity.norm();
    if amp == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let phi = op.intracavity.arg();
    let pref = HBAR * op.omega0 * C / (2.0 * op.length)
        * std::f64::consts::SQRT_2
        * amp
        * (2.0 * op.kappa_in).sqrt();
    let k = Complex64::new(op.kappa, -omega);
    pref * (k * phi.cos() + op.delta * phi.sin()) / (k * k + op.delta * op.delta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveSusceptibility {
    pub freqs: Vec<f64>,
    /// Displacement per external force including the optical spring, m/N.
    pub values: Vec<Complex64>,
    /// Bare mechanical susceptibility summed over modes, m/N.
    pub mechanical: Vec<Complex64>,
    /// Frequency-dependent optical spring, N/m.
    pub spring: Vec<Complex64>,
}

pub fn effective_susceptibility(
    cfg: &CavityConfig,
    modes: &[MechanicalMode],
    grid: &[f64],
) -> Result<EffectiveSusceptibility> {
    check_grid(grid)?;
    for m in modes {
        m.validate()?;
    }
    let mut values = Vec::with_capacity(grid.len());
    let mut mechanical = Vec::with_capacity(grid.len());
    let mut spring = Vec::with_capacity(grid.len());
    for &f in grid {
        let w = 2.0 * PI * f;
        let chi_m: Complex64 = modes.iter().map(|m| m.susceptibility(w)).sum();
        let k = dynamic_spring(cfg, w)?;
        let denom = 1.0 + k * chi_m;
        let chi = chi_m / denom;
        if denom.norm() == 0.0 || !chi.is_finite() {
            return Err(Error::DegenerateResonance { freq_hz: f });
        }
        values.push(chi);
        mechanical.push(chi_m);
        spring.push(k);
    }
    Ok(EffectiveSusceptibility {
        freqs: grid.to_vec(),
        values,
        mechanical,
        spring,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementResponse {
    pub freq: f64,
    /// m per unit injection amplitude-quadrature fluctuation.
    pub x_per_a1: Complex64,
    /// m/N.
    pub x_per_fext: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerResponse {
    pub freq: f64,
    /// W per unit injection amplitude-quadrature fluctuation.
    pub dp_from_a1: Complex64,
    /// W/N.
    pub dp_from_fext: Complex64,
}

pub fn displacement_response(
    cfg: &CavityConfig,
    modes: &[MechanicalMode],
    grid: &[f64],
) -> Result<Vec<DisplacementResponse>> {
    let chi = effective_susceptibility(cfg, modes, grid)?;
    let op = OperatingPoint::new(cfg)?;
    Ok(grid
        .iter()
        .zip(&chi.values)
        .map(|(&f, &chi_eff)| {
            let pa = open_loop_power_response(&op, 2.0 * PI * f);
            DisplacementResponse {
                freq: f,
                x_per_a1: -2.0 / C * chi_eff * pa,
                x_per_fext: chi_eff,
            }
        })
        .collect())
}

pub fn power_fluctuation_response(
    cfg: &CavityConfig,
    modes: &[MechanicalMode],
    grid: &[f64],
) -> Result<Vec<PowerResponse>> {
    let chi = effective_susceptibility(cfg, modes, grid)?;
    let op = OperatingPoint::new(cfg)?;
    Ok((0..grid.len())
        .map(|i| {
            let f = grid[i];
            let loop_gain = chi.spring[i] * chi.mechanical[i];
            let pa = open_loop_power_response(&op, 2.0 * PI * f);
            PowerResponse {
                freq: f,
                dp_from_a1: pa / (1.0 + loop_gain),
                dp_from_fext: C / 2.0 * loop_gain / (1.0 + loop_gain),
            }
        })
        .collect())
}

/// Free-mass forms with a quasi-static spring and no mechanical damping.
pub mod ideal {
    use super::*;

    fn denominator(c: &RadiationPressureCoupling, f: f64) -> Result<f64> {
        let w = 2.0 * PI * f;
        let d = c.mass * (w * w - c.omega_os * c.omega_os);
        if d == 0.0 || !d.is_finite() {
            return Err(Error::DegenerateResonance { freq_hz: f });
        }
        Ok(d)
    }

    pub fn displacement_response(
        c: &RadiationPressureCoupling,
        grid: &[f64],
    ) -> Result<Vec<DisplacementResponse>> {
        check_grid(grid)?;
        grid.iter()
            .map(|&f| {
                let d = denominator(c, f)?;
                Ok(DisplacementResponse {
                    freq: f,
                    x_per_a1: Complex64::new(2.0 / C * c.dp_da1 / d, 0.0),
                    x_per_fext: Complex64::new(-1.0 / d, 0.0),
                })
            })
            .collect()
    }

    pub fn power_fluctuation_response(
        c: &RadiationPressureCoupling,
        grid: &[f64],
    ) -> Result<Vec<PowerResponse>> {
        check_grid(grid)?;
        grid.iter()
            .map(|&f| {
                denominator(c, f)?;
                let w2 = (2.0 * PI * f).powi(2);
                let os2 = c.omega_os * c.omega_os;
                Ok(PowerResponse {
                    freq: f,
                    dp_from_a1: Complex64::new(w2 / (w2 - os2) * c.dp_da1, 0.0),
                    dp_from_fext: Complex64::new(-C / 2.0 * os2 / (w2 - os2), 0.0),
                })
            })
            .collect()
    }
}
