//! Two-photon quadrature input-output model of a detuned cavity with one
//! movable mirror.
//!
//! Per sideband frequency Omega the intracavity quadrature fluctuations `v`
//! and the mirror displacement `x` solve
//!
//! ```text
//! [(kappa - i Omega) I + Delta J] v - g x = sum_j sqrt(2 kappa_j) in_j
//!                     -chi_m h . v  + x   = chi_m F_ext
//! ```
//!
//! where `J = [[0, 1], [-1, 0]]`, `g` is the phase-quadrature drive from
//! cavity length changes and `h . v` is the radiation pressure force. Each
//! output port returns `sqrt(2 kappa_j) v - in_j`. Quadratures are
//! normalized so that vacuum has a one-sided PSD of 1.
//!
//! Three vacuum inputs are propagated: the injection port (A), the far mirror
//! (C) and a lumped intracavity loss. Displacement is positive when the
//! cavity lengthens, i.e. along the radiation pressure force.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{Matrix2, Matrix3, SMatrix, Vector2};
use num_complex::Complex64;

use crate::cavity::{CavityConfig, MechanicalMode, OperatingPoint};
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::spectrum::{check_grid, NoiseSpectrum, SpectrumUnits};

/// Largest acceptable condition number of the equilibrated per-frequency
/// system.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Port {
    /// Carrier plus vacuum entering through the injection mirror.
    InputA,
    /// Field leaving through the injection mirror.
    ReflectedB,
    /// Vacuum entering through the far mirror.
    EndVacuumC,
    /// Field leaving through the far mirror.
    TransmittedD,
    /// Lumped intracavity loss, both as a vacuum input and as an output.
    LossPort,
}

/// Vacuum inputs in the column order used by [`PortField::transfer`].
pub const INPUT_PORTS: [Port; 3] = [Port::InputA, Port::EndVacuumC, Port::LossPort];
/// Output ports in the order stored in [`IoModel::fields`].
pub const OUTPUT_PORTS: [Port; 3] = [Port::ReflectedB, Port::TransmittedD, Port::LossPort];

impl Port {
    fn output_index(self) -> Result<usize> {
        match self {
            Port::ReflectedB => Ok(0),
            Port::TransmittedD => Ok(1),
            Port::LossPort => Ok(2),
            other => Err(Error::invalid("port", format!("{other:?} is not an output port"))),
        }
    }
}

/// 2x2 complex map from an input quadrature pair to an output pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureTransfer(pub Matrix2<Complex64>);

#[derive(Debug, Clone, PartialEq)]
pub struct PortField {
    pub port: Port,
    /// Per frequency: transfer from each vacuum input, ordered as
    /// [`INPUT_PORTS`].
    pub transfer: Vec<[QuadratureTransfer; 3]>,
    /// Per frequency: output quadratures per meter of mirror displacement.
    pub signal_row: Vec<Vector2<Complex64>>,
    /// Per frequency: output quadratures per newton of external force.
    pub force_row: Vec<Vector2<Complex64>>,
    /// Output carrier; its phase defines the amplitude quadrature (angle 0).
    pub carrier: Complex64,
}

impl PortField {
    /// Phase of the amplitude quadrature in the fixed quadrature basis.
    pub fn reference_phase(&self, fallback: f64) -> f64 {
        if self.carrier.norm() > 0.0 {
            self.carrier.arg()
        } else {
            fallback
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IoModel {
    pub cavity: CavityConfig,
    pub modes: Vec<MechanicalMode>,
    pub grid: Vec<f64>,
    pub operating_point: OperatingPoint,
    /// Output ports ordered as [`OUTPUT_PORTS`].
    pub fields: Vec<PortField>,
    /// Displacement per external force including radiation pressure, m/N.
    pub chi_eff: Vec<Complex64>,
    /// Bare mechanical susceptibility summed over modes, m/N.
    pub chi_mech: Vec<Complex64>,
    /// Optical spring -dF/dx from the linear system, N/m.
    pub spring: Vec<Complex64>,
    /// Radiation pressure force per input vacuum quadrature with the mirror
    /// held fixed, N, ordered as [`INPUT_PORTS`].
    pub back_action: Vec<[Vector2<Complex64>; 3]>,
}

struct PointSolution {
    transfers: [[QuadratureTransfer; 3]; 3],
    signal: [Vector2<Complex64>; 3],
    force: [Vector2<Complex64>; 3],
    chi_eff: Complex64,
    chi_mech: Complex64,
    spring: Complex64,
    back_action: [Vector2<Complex64>; 3],
}

/// Solves the quadrature input-output system at every grid frequency.
/// An empty `modes` slice freezes the mirror.
pub fn build_io_model(cfg: &CavityConfig, modes: &[MechanicalMode], grid: &[f64]) -> Result<IoModel> {
    check_grid(grid)?;
    for m in modes {
        m.validate()?;
    }
    let op = OperatingPoint::new(cfg)?;
    let solve = |f: f64| solve_point(&op, modes, f);
    #[cfg(feature = "parallel")]
    let points: Vec<PointSolution> = {
        use rayon::prelude::*;
        grid.par_iter().map(|&f| solve(f)).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let points: Vec<PointSolution> = grid.iter().map(|&f| solve(f)).collect::<Result<_>>()?;

    let carriers = [op.reflected_carrier(), op.transmitted_carrier(), op.loss_carrier()];
    let fields = OUTPUT_PORTS
        .iter()
        .enumerate()
        .map(|(j, &port)| PortField {
            port,
            transfer: points.iter().map(|p| p.transfers[j]).collect(),
            signal_row: points.iter().map(|p| p.signal[j]).collect(),
            force_row: points.iter().map(|p| p.force[j]).collect(),
            carrier: carriers[j],
        })
        .collect();
    Ok(IoModel {
        cavity: *cfg,
        modes: modes.to_vec(),
        grid: grid.to_vec(),
        operating_point: op,
        fields,
        chi_eff: points.iter().map(|p| p.chi_eff).collect(),
        chi_mech: points.iter().map(|p| p.chi_mech).collect(),
        spring: points.iter().map(|p| p.spring).collect(),
        back_action: points.iter().map(|p| p.back_action).collect(),
    })
}

fn solve_point(op: &OperatingPoint, modes: &[MechanicalMode], f: f64) -> Result<PointSolution> {
    let c = |re: f64| Complex64::new(re, 0.0);
    let w = 2.0 * PI * f;
    let k = Complex64::new(op.kappa, -w);
    let cavity = Matrix2::new(k, c(op.delta), c(-op.delta), k);

    let a = op.intracavity;
    // Phase-quadrature drive per meter and force per unit quadrature.
    let g = Vector2::new(c(-SQRT_2 * op.pull * a.im), c(SQRT_2 * op.pull * a.re));
    let h = Vector2::new(c(SQRT_2 * HBAR * op.pull * a.re), c(SQRT_2 * HBAR * op.pull * a.im));
    let chi_m: Complex64 = modes.iter().map(|m| m.susceptibility(w)).sum();

    // Equilibrate: rows of the cavity block by 1/kappa, displacement in units
    // of x0 so that the drive column is O(1).
    let x0 = if g.norm() > 0.0 { op.kappa / g.norm() } else { 1.0 };
    let mut s = Matrix3::<Complex64>::zeros();
    for r in 0..2 {
        for col in 0..2 {
            s[(r, col)] = cavity[(r, col)] / op.kappa;
        }
        s[(r, 2)] = -g[r] * x0 / op.kappa;
        s[(2, r)] = -chi_m * h[r] / x0;
    }
    s[(2, 2)] = c(1.0);

    let rates = [op.kappa_in, op.kappa_end, op.kappa_loss];
    let mut rhs = SMatrix::<Complex64, 3, 7>::zeros();
    for (j, &kj) in rates.iter().enumerate() {
        let amp = (2.0 * kj).sqrt() / op.kappa;
        rhs[(0, 2 * j)] = c(amp);
        rhs[(1, 2 * j + 1)] = c(amp);
    }
    rhs[(2, 6)] = chi_m / x0;

    let sv = s.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularSystem { freq_hz: f, condition });
    }
    let sol = s
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularSystem { freq_hz: f, condition })?;

    let cavity_inv = cavity
        .try_inverse()
        .ok_or(Error::SingularSystem { freq_hz: f, condition: f64::INFINITY })?;
    let v_per_x = cavity_inv * g;

    let mut transfers = [[QuadratureTransfer(Matrix2::zeros()); 3]; 3];
    let mut signal = [Vector2::zeros(); 3];
    let mut force = [Vector2::zeros(); 3];
    let mut back_action = [Vector2::zeros(); 3];
    let h_row = h.transpose();
    for (p, &kp) in rates.iter().enumerate() {
        let leak = c((2.0 * kp).sqrt());
        for (j, t) in transfers[p].iter_mut().enumerate() {
            let mut m = Matrix2::new(
                sol[(0, 2 * j)],
                sol[(0, 2 * j + 1)],
                sol[(1, 2 * j)],
                sol[(1, 2 * j + 1)],
            ) * leak;
            if p == j {
                m -= Matrix2::identity();
            }
            *t = QuadratureTransfer(m);
        }
        signal[p] = v_per_x * leak;
        force[p] = Vector2::new(sol[(0, 6)], sol[(1, 6)]) * leak;
        let cols = cavity_inv * c((2.0 * kp).sqrt());
        let ba = h_row * cols;
        back_action[p] = Vector2::new(ba[(0, 0)], ba[(0, 1)]);
    }
    let spring = -(h_row * v_per_x)[(0, 0)];
    Ok(PointSolution {
        transfers,
        signal,
        force,
        chi_eff: sol[(2, 6)] * x0,
        chi_mech: chi_m,
        spring,
        back_action,
    })
}

/// Unit readout vector at `zeta` radians from the port's amplitude quadrature.
fn readout_vector(phase: f64, zeta: f64) -> Vector2<Complex64> {
    let t = phase + zeta;
    Vector2::new(Complex64::new(t.cos(), 0.0), Complex64::new(t.sin(), 0.0))
}

fn project(e: &Vector2<Complex64>, v: &Vector2<Complex64>) -> Complex64 {
    e[0] * v[0] + e[1] * v[1]
}

impl IoModel {
    pub fn field(&self, port: Port) -> Result<&PortField> {
        Ok(&self.fields[port.output_index()?])
    }

    fn phase(&self, port: Port) -> Result<f64> {
        Ok(self.field(port)?.reference_phase(self.operating_point.intracavity.arg()))
    }

    /// Angle of `other`'s amplitude quadrature measured in `port`'s readout
    /// frame, radians in (-pi/2, pi/2].
    pub fn quadrature_offset(&self, port: Port, other: Port) -> Result<f64> {
        Ok(wrap_half_turn(self.phase(other)? - self.phase(port)?))
    }

    pub fn has_mechanics(&self) -> bool {
        !self.modes.is_empty()
    }

    /// Quantum noise (shot noise plus back action) at grid index `i`,
    /// relative to shot noise.
    pub fn quantum_psd_at(&self, i: usize, port: Port, zeta: f64) -> Result<f64> {
        let field = self.field(port)?;
        let e = readout_vector(self.phase(port)?, zeta);
        Ok(field.transfer[i]
            .iter()
            .map(|t| {
                let row = t.0.transpose() * e;
                row[0].norm_sqr() + row[1].norm_sqr()
            })
            .sum())
    }

    pub fn quantum_noise_psd(&self, port: Port, zeta: f64) -> Result<NoiseSpectrum> {
        let values = (0..self.grid.len())
            .map(|i| self.quantum_psd_at(i, port, zeta))
            .collect::<Result<Vec<_>>>()?;
        NoiseSpectrum::new(self.grid.clone(), values, SpectrumUnits::ShotNoiseRelative)
    }

    /// Readout response to mirror displacement at grid index `i`.
    pub fn signal_at(&self, i: usize, port: Port, zeta: f64) -> Result<Complex64> {
        let e = readout_vector(self.phase(port)?, zeta);
        Ok(project(&e, &self.field(port)?.signal_row[i]))
    }

    /// |signal| in quadrature units per meter on the model grid.
    pub fn signal_transfer(&self, port: Port, zeta: f64) -> Result<Vec<f64>> {
        (0..self.grid.len())
            .map(|i| self.signal_at(i, port, zeta).map(|s| s.norm()))
            .collect()
    }

    /// Rebuilds the model on a single frequency.
    pub fn at_frequency(&self, freq: f64) -> Result<IoModel> {
        build_io_model(&self.cavity, &self.modes, &[freq])
    }

    /// Sum over inputs of the stacked transfer T T^H into `port` (2x2).
    pub fn vacuum_gram(&self, i: usize, port: Port) -> Result<Matrix2<Complex64>> {
        let field = self.field(port)?;
        Ok(field.transfer[i]
            .iter()
            .fold(Matrix2::zeros(), |acc, t| acc + t.0 * t.0.adjoint()))
    }

    /// One-sided radiation pressure force PSD with the mirror held fixed,
    /// N^2/Hz.
    pub fn back_action_force_psd(&self, i: usize) -> f64 {
        self.back_action[i]
            .iter()
            .map(|v| v[0].norm_sqr() + v[1].norm_sqr())
            .sum()
    }
}

/// Wraps an angle into (-pi/2, pi/2].
pub fn wrap_half_turn(a: f64) -> f64 {
    let mut r = a.rem_euclid(PI);
    if r > PI / 2.0 {
        r -= PI;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub angle_deg: f64,
    pub quantum: f64,
    pub thermal: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShotNoiseCrossings {
    /// Angles in degrees, in (-90, 90], where quantum noise equals shot noise.
    Roots(Vec<f64>),
    /// Quantum noise equals shot noise at every angle (no back action).
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutSweep {
    pub port: Port,
    pub freq: f64,
    pub rows: Vec<SweepRow>,
    pub crossings: ShotNoiseCrossings,
    /// Angle of minimum thermal noise, degrees in (-90, 90].
    pub thermal_dip_deg: f64,
}

/// Default angle grid: 0.5 degree steps over one period, [-90, 90).
pub fn default_angles() -> Vec<f64> {
    (0..360).map(|i| -90.0 + 0.5 * i as f64).collect()
}

/// Quantum, thermal and total noise relative to shot noise versus readout
/// angle at one frequency. `thermal_psd` is the mirror's thermal
/// displacement PSD (m^2/Hz) at `freq`. Angles are in degrees and must cover
/// one period in increasing order.
pub fn sweep_readout_angle(
    model: &IoModel,
    port: Port,
    freq: f64,
    thermal_psd: f64,
    angles_deg: &[f64],
) -> Result<ReadoutSweep> {
    if angles_deg.len() < 3 || angles_deg.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("angles", "need at least 3 increasing angles"));
    }
    if angles_deg[angles_deg.len() - 1] - angles_deg[0] >= 180.0 {
        return Err(Error::invalid("angles", "angle grid must span less than one period"));
    }
    let single = model.at_frequency(freq)?;
    let quantum = |deg: f64| single.quantum_psd_at(0, port, deg.to_radians());
    let thermal = |deg: f64| -> Result<f64> {
        Ok(single.signal_at(0, port, deg.to_radians())?.norm_sqr() * thermal_psd)
    };
    let rows = angles_deg
        .iter()
        .map(|&a| {
            let q = quantum(a)?;
            let t = thermal(a)?;
            Ok(SweepRow {
                angle_deg: a,
                quantum: q,
                thermal: t,
                total: q + t,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let crossings = if rows.iter().all(|r| (r.quantum - 1.0).abs() < 1e-9) {
        ShotNoiseCrossings::Degenerate
    } else {
        let mut roots = Vec::new();
        let n = rows.len();
        for i in 0..n {
            let (a0, q0) = (rows[i].angle_deg, rows[i].quantum - 1.0);
            let (a1, q1) = if i + 1 < n {
                (rows[i + 1].angle_deg, rows[i + 1].quantum - 1.0)
            } else {
                (rows[0].angle_deg + 180.0, rows[0].quantum - 1.0)
            };
            if q0 == 0.0 {
                roots.push(wrap_deg(a0));
            } else if q0 * q1 < 0.0 {
                roots.push(wrap_deg(bisect(|a| quantum(a).map(|q| q - 1.0), a0, a1, 0.01)?));
            }
        }
        if roots.is_empty() {
            return Err(Error::RootNotBracketed(format!(
                "quantum noise never crosses shot noise at {freq} Hz"
            )));
        }
        roots.sort_by(|a, b| a.total_cmp(b));
        ShotNoiseCrossings::Roots(roots)
    };

    let imin = rows
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.thermal.total_cmp(&b.1.thermal))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let thermal_dip_deg = wrap_deg(refine_minimum(&rows, imin, |a| thermal(a))?);

    Ok(ReadoutSweep {
        port,
        freq,
        rows,
        crossings,
        thermal_dip_deg,
    })
}

fn wrap_deg(a: f64) -> f64 {
    wrap_half_turn(a.to_radians()).to_degrees()
}

fn bisect<F: Fn(f64) -> Result<f64>>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo)?;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section refinement of a grid minimum between its neighbours.
fn refine_minimum<F: Fn(f64) -> Result<f64>>(rows: &[SweepRow], i: usize, f: F) -> Result<f64> {
    let n = rows.len();
    let step = rows[1].angle_deg - rows[0].angle_deg;
    let centre = rows[i % n].angle_deg;
    let (mut a, mut b) = (centre - step, centre + step);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > 1e-4 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn frozen_lossless() -> IoModel {
        let cfg = presets::reflection_experiment().with_loss(0.0);
        build_io_model(&cfg, &[], &[100.0, 2e4, 3e5]).unwrap()
    }

    #[test]
    fn frozen_lossless_is_shot_noise_everywhere() {
        let m = frozen_lossless();
        for port in [Port::ReflectedB, Port::TransmittedD] {
            for i in 0..m.grid.len() {
                for deg in [-80.0, -33.0, 0.0, 45.0, 90.0] {
                    let q = m.quantum_psd_at(i, port, f64::to_radians(deg)).unwrap();
                    assert!((q - 1.0).abs() < 1e-12, "{port:?} {deg} {q}");
                }
            }
        }
    }

    #[test]
    fn resonant_frozen_reflection_does_not_mix_quadratures() {
        let cfg = presets::reflection_experiment().with_detuning(0.0);
        let m = build_io_model(&cfg, &[], &[1e3, 2e5]).unwrap();
        let b = m.field(Port::ReflectedB).unwrap();
        for t in &b.transfer {
            let a = t[0].0;
            assert!(a[(0, 1)].norm() < 1e-12 && a[(1, 0)].norm() < 1e-12);
            assert!((a[(0, 0)] - a[(1, 1)]).norm() < 1e-12);
        }
    }

    #[test]
    fn homodyne_period_is_half_turn() {
        let m = build_io_model(&presets::reflection_experiment(), &[presets::microresonator()], &[2e4]).unwrap();
        for deg in [-70.0, 10.0, 33.0] {
            let a = m.quantum_psd_at(0, Port::ReflectedB, f64::to_radians(deg)).unwrap();
            let b = m.quantum_psd_at(0, Port::ReflectedB, f64::to_radians(deg + 180.0)).unwrap();
            assert!((a - b).abs() < 1e-12 * a);
            let sa = m.signal_at(0, Port::TransmittedD, f64::to_radians(deg)).unwrap().norm();
            let sb = m.signal_at(0, Port::TransmittedD, f64::to_radians(deg + 180.0)).unwrap().norm();
            assert!((sa - sb).abs() < 1e-12 * sa);
        }
    }

    #[test]
    fn non_output_port_is_rejected() {
        let m = frozen_lossless();
        assert!(m.quantum_noise_psd(Port::InputA, 0.0).is_err());
    }

    #[test]
    fn frozen_sweep_is_degenerate() {
        let m = frozen_lossless();
        let s = sweep_readout_angle(&m, Port::ReflectedB, 2e4, 0.0, &default_angles()).unwrap();
        assert_eq!(s.crossings, ShotNoiseCrossings::Degenerate);
    }

    #[test]
    fn wrap_is_half_open() {
        assert!((wrap_half_turn(-PI / 2.0) - PI / 2.0).abs() < 1e-15);
        assert!((wrap_half_turn(PI / 2.0) - PI / 2.0).abs() < 1e-15);
        assert!((wrap_half_turn(3.0 * PI / 4.0) + PI / 4.0).abs() < 1e-15);
    }
}
