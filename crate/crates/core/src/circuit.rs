//! SQUID-loop resonator: equilibrium phase shift, tunable frequency,
//! TLS coupling and drive bound.
//!
//! Quantities here are SI (rad/s, farads, henries, webers, amperes) with
//! E_J given as an angular frequency (ℏ = 1 for the energy scale only).
//! Use [`crate::units::rad_per_s_to_mhz`] to feed the results into a
//! [`crate::hamiltonian::SystemConfig`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{ELEMENTARY_CHARGE, HBAR};

const MAX_ITERATIONS: usize = 200;
const RESIDUAL_TOL: f64 = 1e-12;
/// Largest admissible |2e δΦ_d / ℏ| for a drive to stay perturbative.
pub const DRIVE_PHASE_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitParams {
    /// Josephson energy as angular frequency, rad/s.
    pub e_j: f64,
    /// Total capacitance, F.
    pub c0: f64,
    /// Loop inductance, H.
    pub l: f64,
    /// External flux, Wb.
    pub phi_ex: f64,
    /// Drive current amplitude, A.
    #[serde(default)]
    pub delta_ic: f64,
    /// Dimensionless coupling polarizations, one per TLS.
    #[serde(default)]
    pub j_x: Vec<f64>,
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("e_j", self.e_j), ("c0", self.c0), ("l", self.l)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be positive and finite"));
            }
        }
        if !self.phi_ex.is_finite() || !self.delta_ic.is_finite() {
            return Err(Error::invalid("phi_ex", "must be finite"));
        }
        if let Some(j) = self.j_x.iter().find(|j| !(**j >= 0.0)) {
            return Err(Error::invalid("j_x", format!("{j} is negative")));
        }
        Ok(())
    }

    /// Loop inductance satisfying 1/L = 4e²E_J/ℏ².
    pub fn matched_inductance(e_j: f64) -> f64 {
        HBAR / (4.0 * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE * e_j)
    }

    /// Dimensionless screening 2eL·(ℏE_J)·(2e/ℏ)/ℏ = 4e²L E_J/ℏ. The flux
    /// relation is single valued when this is below one.
    pub fn screening(&self) -> f64 {
        4.0 * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE * self.l * self.e_j / HBAR
    }
}

/// Phase 2eΦ/ℏ of a flux Φ.
#[inline]
pub fn flux_phase(phi: f64) -> f64 {
    2.0 * ELEMENTARY_CHARGE * phi / HBAR
}

/// Flux whose phase 2eΦ/ℏ equals `phase`.
#[inline]
pub fn phase_flux(phase: f64) -> f64 {
    phase * HBAR / (2.0 * ELEMENTARY_CHARGE)
}

/// Residual of the flux relation, divided by its dominant term:
/// (Φ_s + 2eL(ℏE_J) sin(2eΦ_s/ℏ)/ℏ + Φ_ex) / max(|Φ_s|, |Φ_ex|, …).
pub fn phase_shift_residual(p: &CircuitParams, phi_s: f64) -> f64 {
    let k = 2.0 * ELEMENTARY_CHARGE * p.l * p.e_j;
    let nonlinear = k * flux_phase(phi_s).sin();
    let r = phi_s + nonlinear + p.phi_ex;
    let scale = phi_s.abs().max(nonlinear.abs()).max(p.phi_ex.abs());
    if scale == 0.0 {
        0.0
    } else {
        r / scale
    }
}

/// Equilibrium flux Φ_s solving ℏΦ_s + 2eL(ℏE_J) sin(2eΦ_s/ℏ) = −ℏΦ_ex.
///
/// Damped Newton iteration from Φ_s = −Φ_ex. The step is halved whenever
/// it would increase the residual.
pub fn solve_phase_shift(p: &CircuitParams) -> Result<f64> {
    p.validate()?;
    if p.phi_ex == 0.0 {
        return Ok(0.0);
    }
    let k = 2.0 * ELEMENTARY_CHARGE * p.l * p.e_j;
    let f = |x: f64| x + k * flux_phase(x).sin() + p.phi_ex;
    let screening = p.screening();
    let df = |x: f64| 1.0 + screening * flux_phase(x).cos();

    let mut x = -p.phi_ex;
    let mut fx = f(x);
    for _ in 0..MAX_ITERATIONS {
        if phase_shift_residual(p, x).abs() < RESIDUAL_TOL {
            return Ok(x);
        }
        let slope = df(x);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let full = -fx / slope;
        let mut step = full;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = x + step;
            let ft = f(trial);
            if ft.abs() < fx.abs() {
                x = trial;
                fx = ft;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let residual = phase_shift_residual(p, x);
    if residual.abs() < RESIDUAL_TOL {
        return Ok(x);
    }
    Err(Error::PhaseShiftDivergence {
        iterations: MAX_ITERATIONS,
        screening: p.screening(),
        residual,
    })
}

/// ω_c = √(1/(LC₀) + 4e²(ℏE_J) cos(2eΦ_s/ℏ)/(ℏ²C₀)), rad/s.
pub fn resonator_frequency(p: &CircuitParams, phi_s: f64) -> Result<f64> {
    p.validate()?;
    let radicand = 1.0 / (p.l * p.c0)
        + 4.0 * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE * p.e_j * flux_phase(phi_s).cos()
            / (HBAR * p.c0);
    if radicand <= 0.0 {
        return Err(Error::UnstableResonator { radicand });
    }
    Ok(radicand.sqrt())
}

/// Zero-point flux √(ℏ/(2C₀ω_c)).
pub fn zero_point_flux(p: &CircuitParams, omega_c: f64) -> f64 {
    (HBAR / (2.0 * p.c0 * omega_c)).sqrt()
}

/// TLS–resonator coupling g_n in rad/s.
///
/// The zero-point flux is converted to a junction phase with 2e/ℏ, so
/// g_n = E_J j_xn (2e/ℏ) √(ℏ/(2C₀ω_c)) sin(2eΦ_s/ℏ).
pub fn coupling_constant(p: &CircuitParams, omega_c: f64, phi_s: f64, site: usize) -> Result<f64> {
    let j = *p.j_x.get(site).ok_or(Error::SiteOutOfRange {
        site,
        n_tls: p.j_x.len(),
    })?;
    if !(omega_c > 0.0) {
        return Err(Error::invalid("omega_c", "must be positive"));
    }
    Ok(p.e_j * j * flux_phase(zero_point_flux(p, omega_c)) * flux_phase(phi_s).sin())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveAmplitude {
    /// ε = δI_c √(ℏ/(2C₀ω_c))/ℏ, rad/s.
    pub epsilon: f64,
    /// Flux excursion δΦ_d = δI_c/(C₀ω_c²), Wb.
    pub flux_excursion: f64,
    /// |2e δΦ_d/ℏ|.
    pub phase_excursion: f64,
    pub bound_ok: bool,
}

pub fn drive_amplitude_and_bound(p: &CircuitParams, omega_c: f64) -> Result<DriveAmplitude> {
    if !(omega_c > 0.0) {
        return Err(Error::invalid("omega_c", "must be positive"));
    }
    let epsilon = p.delta_ic * zero_point_flux(p, omega_c) / HBAR;
    let flux_excursion = p.delta_ic / (p.c0 * omega_c * omega_c);
    let phase_excursion = flux_phase(flux_excursion).abs();
    Ok(DriveAmplitude {
        epsilon,
        flux_excursion,
        phase_excursion,
        bound_ok: phase_excursion < DRIVE_PHASE_LIMIT,
    })
}

/// Largest drive amplitude (rad/s) with |2e δΦ_d/ℏ| at the limit.
pub fn max_drive_amplitude(p: &CircuitParams, omega_c: f64) -> Result<f64> {
    let limit_current = phase_flux(DRIVE_PHASE_LIMIT) * p.c0 * omega_c * omega_c;
    let probe = CircuitParams {
        delta_ic: limit_current,
        ..p.clone()
    };
    Ok(drive_amplitude_and_bound(&probe, omega_c)?.epsilon)
}

/// Frequency, coupling and drive bound at the operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitSolution {
    pub phi_s: f64,
    pub omega_c: f64,
    pub couplings: Vec<f64>,
    pub drive: DriveAmplitude,
    pub max_epsilon: f64,
}

pub fn solve_circuit(p: &CircuitParams) -> Result<CircuitSolution> {
    let phi_s = solve_phase_shift(p)?;
    let omega_c = resonator_frequency(p, phi_s)?;
    let couplings = (0..p.j_x.len())
        .map(|n| coupling_constant(p, omega_c, phi_s, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(CircuitSolution {
        phi_s,
        omega_c,
        couplings,
        drive: drive_amplitude_and_bound(p, omega_c)?,
        max_epsilon: max_drive_amplitude(p, omega_c)?,
    })
}
