//! Closed-form dispersive-regime quantities. Inputs and outputs are linear
//! frequencies in MHz.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::SystemConfig;

/// Relative tolerance on |E₁ − E₂| for the two-qubit coefficients.
pub const RESONANCE_TOLERANCE: f64 = 5e-3;
/// Real-transition warning when |E_i − Δ_c| < this multiple of |λ|.
pub const REAL_TRANSITION_FACTOR: f64 = 10.0;

fn nonzero(value: f64, quantity: &'static str, denominator: &'static str) -> Result<f64> {
    if value == 0.0 || !value.is_finite() {
        Err(Error::Singular {
            quantity,
            denominator,
        })
    } else {
        Ok(value)
    }
}

fn tls(cfg: &SystemConfig, n: usize) -> Result<&crate::hamiltonian::Tls> {
    cfg.tls.get(n).ok_or(Error::SiteOutOfRange {
        site: n,
        n_tls: cfg.tls.len(),
    })
}

/// Δ_nc = Δ_n − Δ_c.
pub fn detuning_from_resonator(cfg: &SystemConfig, n: usize) -> Result<f64> {
    Ok(tls(cfg, n)?.delta - cfg.delta_c)
}

/// Dispersive shift g_n²/Δ_nc.
pub fn stark_shift(cfg: &SystemConfig, n: usize) -> Result<f64> {
    let t = tls(cfg, n)?;
    let dnc = nonzero(t.delta - cfg.delta_c, "dispersive shift", "Delta_nc")?;
    Ok(t.g * t.g / dnc)
}

/// Δ̃_n = Δ_n + (g_n²/Δ_nc)(1 − 2ε/Δ_c).
pub fn effective_detuning(cfg: &SystemConfig, n: usize) -> Result<f64> {
    let t = tls(cfg, n)?;
    let dnc = nonzero(t.delta - cfg.delta_c, "effective detuning", "Delta_nc")?;
    let dc = nonzero(cfg.delta_c, "effective detuning", "Delta_c")?;
    Ok(t.delta + t.g * t.g / dnc * (1.0 - 2.0 * cfg.epsilon / dc))
}

/// Ω_nx = 2εg_n/Δ_nc.
pub fn rabi_frequency(cfg: &SystemConfig, n: usize) -> Result<f64> {
    let t = tls(cfg, n)?;
    let dnc = nonzero(t.delta - cfg.delta_c, "Rabi frequency", "Delta_nc")?;
    Ok(2.0 * cfg.epsilon * t.g / dnc)
}

/// λ_mn = g_m g_n (Δ_mc + Δ_nc)/(Δ_mc Δ_nc).
pub fn exchange_coupling(cfg: &SystemConfig, m: usize, n: usize) -> Result<f64> {
    let (a, b) = (tls(cfg, m)?, tls(cfg, n)?);
    let dmc = nonzero(a.delta - cfg.delta_c, "exchange coupling", "Delta_mc")?;
    let dnc = nonzero(b.delta - cfg.delta_c, "exchange coupling", "Delta_nc")?;
    Ok(a.g * b.g * (dmc + dnc) / (dmc * dnc))
}

/// Coefficient f_n of the residual σ_nz(a + a†) coupling:
/// (g_n²/Δ_nc)·ε(Δ_c − 2Δ_nc)/(2Δ_ncΔ_c).
pub fn residual_drive_coefficient(cfg: &SystemConfig, n: usize) -> Result<f64> {
    let t = tls(cfg, n)?;
    let dnc = nonzero(
        t.delta - cfg.delta_c,
        "residual drive coefficient",
        "Delta_nc",
    )?;
    let dc = nonzero(cfg.delta_c, "residual drive coefficient", "Delta_c")?;
    Ok(t.g * t.g / dnc * cfg.epsilon * (dc - 2.0 * dnc) / (2.0 * dnc * dc))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dressed {
    /// E_n = √(Δ̃_n² + Ω_nx²) ≥ 0.
    pub energy: f64,
    /// Mixing angle with cos θ = Δ̃/E, sin θ = Ω/E.
    pub theta: f64,
    /// E_n = 0, θ set to zero by convention.
    pub degenerate: bool,
}

pub fn dressed_energy(cfg: &SystemConfig, n: usize) -> Result<Dressed> {
    let dt = effective_detuning(cfg, n)?;
    let om = rabi_frequency(cfg, n)?;
    Ok(dressed_from(dt, om))
}

fn dressed_from(delta_tilde: f64, omega: f64) -> Dressed {
    let energy = delta_tilde.hypot(omega);
    if energy == 0.0 {
        Dressed {
            energy,
            theta: 0.0,
            degenerate: true,
        }
    } else {
        Dressed {
            energy,
            theta: omega.atan2(delta_tilde),
            degenerate: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitCoefficients {
    pub e1: f64,
    pub e2: f64,
    pub lambda: f64,
    pub beta_1: f64,
    pub beta_2: f64,
    /// β₂′ − β₂, the contribution of the residual drive couplings.
    pub correction: f64,
    pub beta_2_prime: f64,
    /// Some |E_i − Δ_c| is within ten exchange couplings of the resonator.
    pub real_transition_warning: bool,
}

pub fn two_qubit_coefficients(
    cfg: &SystemConfig,
    pair: (usize, usize),
) -> Result<TwoQubitCoefficients> {
    two_qubit_coefficients_with_tolerance(cfg, pair, RESONANCE_TOLERANCE)
}

/// β₁ = λΩ₁Ω₂/(4E₁²), β₂ = (λ/4)(1 + Δ̃₁Δ̃₂/E₁²) and
/// β₂′ = β₂ + f₁f₂(E₁ + E₂ − 2Δ_c)/(2(E₁ − Δ_c)(E₂ − Δ_c)).
pub fn two_qubit_coefficients_with_tolerance(
    cfg: &SystemConfig,
    (m, n): (usize, usize),
    tolerance: f64,
) -> Result<TwoQubitCoefficients> {
    if m == n {
        return Err(Error::invalid("pair", "the two TLS indices must differ"));
    }
    let (d1, d2) = (effective_detuning(cfg, m)?, effective_detuning(cfg, n)?);
    let (o1, o2) = (rabi_frequency(cfg, m)?, rabi_frequency(cfg, n)?);
    let (e1, e2) = (d1.hypot(o1), d2.hypot(o2));
    let scale = e1.max(e2);
    if scale == 0.0 {
        return Err(Error::Singular {
            quantity: "two-qubit coefficients",
            denominator: "E_1",
        });
    }
    if (e1 - e2).abs() > tolerance * scale {
        return Err(Error::NotResonant { e1, e2, tolerance });
    }
    let lambda = exchange_coupling(cfg, m, n)?;
    let e1sq = e1 * e1;
    let beta_1 = lambda * o1 * o2 / (4.0 * e1sq);
    let beta_2 = lambda / 4.0 * (1.0 + d1 * d2 / e1sq);
    let (f1, f2) = (
        residual_drive_coefficient(cfg, m)?,
        residual_drive_coefficient(cfg, n)?,
    );
    let denom = 2.0 * (e1 - cfg.delta_c) * (e2 - cfg.delta_c);
    let correction = if f1 * f2 == 0.0 {
        0.0
    } else {
        f1 * f2 * (e1 + e2 - 2.0 * cfg.delta_c) / nonzero(denom, "beta_2'", "E_i - Delta_c")?
    };
    let guard = REAL_TRANSITION_FACTOR * lambda.abs();
    let real_transition_warning =
        (e1 - cfg.delta_c).abs() < guard || (e2 - cfg.delta_c).abs() < guard;
    if real_transition_warning {
        log::warn!(
            "dressed energies ({e1:.3}, {e2:.3}) MHz lie within {guard:.3} MHz of the resonator"
        );
    }
    Ok(TwoQubitCoefficients {
        e1,
        e2,
        lambda,
        beta_1,
        beta_2,
        correction,
        beta_2_prime: beta_2 + correction,
        real_transition_warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlsEffective {
    pub delta_tilde: f64,
    pub omega_x: f64,
    pub energy: f64,
    pub theta: f64,
    pub f: f64,
    /// g_n²/Δ_nc.
    pub stark: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub tls: Vec<TlsEffective>,
    /// Symmetric exchange matrix, zero on the diagonal.
    pub lambda: Vec<Vec<f64>>,
}

impl EffectiveParams {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        let n = cfg.tls.len();
        let tls = (0..n)
            .map(|k| {
                let delta_tilde = effective_detuning(cfg, k)?;
                let omega_x = rabi_frequency(cfg, k)?;
                let d = dressed_from(delta_tilde, omega_x);
                Ok(TlsEffective {
                    delta_tilde,
                    omega_x,
                    energy: d.energy,
                    theta: d.theta,
                    f: residual_drive_coefficient(cfg, k)?,
                    stark: stark_shift(cfg, k)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut lambda = vec![vec![0.0; n]; n];
        for a in 0..n {
            for b in a + 1..n {
                let l = exchange_coupling(cfg, a, b)?;
                lambda[a][b] = l;
                lambda[b][a] = l;
            }
        }
        Ok(EffectiveParams { tls, lambda })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Tls;

    fn single(delta: f64, g: f64, delta_c: f64, epsilon: f64) -> SystemConfig {
        SystemConfig::new(vec![Tls { delta, g }], delta_c, epsilon)
    }

    fn swap_point(epsilon: f64) -> SystemConfig {
        SystemConfig::new(
            vec![
                Tls {
                    delta: 0.0,
                    g: 40.0,
                },
                Tls {
                    delta: -60.0,
                    g: 30.0,
                },
            ],
            300.0,
            epsilon,
        )
    }

    #[test]
    fn table_one_values() {
        let x = single(40.0, 40.0, 120.0, -60.0);
        assert!(effective_detuning(&x, 0).unwrap().abs() < 1e-12);
        assert!((rabi_frequency(&x, 0).unwrap() - 60.0).abs() < 1e-12);

        let h = single(40.0, 40.0, 160.0, -32.0);
        let dt = effective_detuning(&h, 0).unwrap();
        let om = rabi_frequency(&h, 0).unwrap();
        assert!((dt - 64.0 / 3.0).abs() < 1e-12);
        assert!((om - 64.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_limits() {
        let c = single(25.0, 0.0, 90.0, 50.0);
        assert_eq!(effective_detuning(&c, 0).unwrap(), 25.0);
        assert_eq!(rabi_frequency(&c, 0).unwrap(), 0.0);
        let c = single(25.0, 10.0, 90.0, 0.0);
        assert_eq!(rabi_frequency(&c, 0).unwrap(), 0.0);
        assert_eq!(residual_drive_coefficient(&c, 0).unwrap(), 0.0);
    }

    #[test]
    fn singular_denominators() {
        let c = single(90.0, 10.0, 90.0, 5.0);
        assert!(matches!(
            effective_detuning(&c, 0),
            Err(Error::Singular { .. })
        ));
        assert!(matches!(rabi_frequency(&c, 0), Err(Error::Singular { .. })));
        let c = single(10.0, 10.0, 0.0, 5.0);
        assert!(matches!(
            effective_detuning(&c, 0),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn exchange_coupling_at_swap_point() {
        let c = swap_point(0.0);
        let l = exchange_coupling(&c, 0, 1).unwrap();
        assert!((l - 1200.0 * -660.0 / 108000.0).abs() < 1e-12);
        assert_eq!(l, exchange_coupling(&c, 1, 0).unwrap());
    }

    #[test]
    fn swap_point_coefficients() {
        let c = swap_point(277.196_7);
        let f1 = residual_drive_coefficient(&c, 0).unwrap();
        let f2 = residual_drive_coefficient(&c, 1).unwrap();
        assert!((f1 - 7.39).abs() < 0.01);
        assert!((f2 - 3.27).abs() < 0.01);
        let e1 = dressed_energy(&c, 0).unwrap().energy;
        assert!((e1 - 74.0).abs() < 0.1);
        let b = two_qubit_coefficients(&c, (0, 1)).unwrap();
        assert!((b.beta_2 - -1.75).abs() < 0.005);
        assert!((b.correction - -0.107).abs() < 0.001);
        assert!((b.beta_2_prime - -1.85).abs() < 0.01);
        assert!(!b.real_transition_warning);
    }

    #[test]
    fn not_resonant_is_rejected() {
        let c = swap_point(100.0);
        assert!(matches!(
            two_qubit_coefficients(&c, (0, 1)),
            Err(Error::NotResonant { .. })
        ));
    }

    #[test]
    fn dressed_angle_conventions() {
        let d = dressed_from(3.0, 0.0);
        assert_eq!((d.energy, d.theta), (3.0, 0.0));
        let d = dressed_from(0.0, 2.0);
        assert!((d.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let d = dressed_from(0.0, -2.0);
        assert!((d.theta + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(dressed_from(0.0, 0.0).degenerate);
    }

    #[test]
    fn effective_detuning_slope() {
        let c = single(40.0, 40.0, 120.0, -60.0);
        let h = 1e-3;
        let up = effective_detuning(&c.with_epsilon(-60.0 + h), 0).unwrap();
        let dn = effective_detuning(&c.with_epsilon(-60.0 - h), 0).unwrap();
        let fd = (up - dn) / (2.0 * h);
        let exact = -2.0 * 1600.0 / (-80.0 * 120.0);
        assert!((fd / exact - 1.0).abs() < 1e-6);
    }

    #[test]
    fn effective_params_invariants() {
        let c = swap_point(150.0);
        let p = EffectiveParams::new(&c).unwrap();
        for t in &p.tls {
            let e2 = t.delta_tilde.powi(2) + t.omega_x.powi(2);
            assert!((t.energy.powi(2) / e2 - 1.0).abs() < 1e-10);
            assert!((t.theta.cos() * t.energy - t.delta_tilde).abs() < 1e-10);
            assert!((t.theta.sin() * t.energy - t.omega_x).abs() < 1e-10);
        }
        assert_eq!(p.lambda[0][1], p.lambda[1][0]);
    }
}
