//! System configuration and Hamiltonian assembly.
//!
//! Both Hamiltonians are in the frame rotating at the drive frequency and
//! are returned in rad/ns.

use serde::{Deserialize, Serialize};

use crate::dispersive::EffectiveParams;
use crate::error::{Error, Result};
use crate::operator::{
    annihilation, c, coherent_state, pauli, DensityMatrix, HilbertSpace, Operator, PauliAxis,
};
use crate::units::{angular, rate_per_ns};

/// g/|Δ_nc| above which a warning is logged.
pub const DISPERSIVE_WARN: f64 = 0.25;
/// g/|Δ_nc| above which the transformed frame is refused.
pub const DISPERSIVE_LIMIT: f64 = 0.5;

fn default_fock_cutoff() -> usize {
    10
}

fn default_drive_limit() -> f64 {
    1000.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tls {
    /// Detuning ω_n − ω_d, MHz.
    pub delta: f64,
    /// Coupling to the resonator, MHz.
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub tls: Vec<Tls>,
    /// Resonator detuning ω_c − ω_d, MHz.
    pub delta_c: f64,
    /// Drive amplitude, MHz. Calibrations overwrite it.
    pub epsilon: f64,
    /// Resonator decay rate, μs⁻¹.
    pub kappa: f64,
    #[serde(default = "default_fock_cutoff")]
    pub fock_cutoff: usize,
    /// Largest admissible |ε|, MHz.
    #[serde(default = "default_drive_limit")]
    pub drive_limit: f64,
}

/// Which Hamiltonian a simulation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Dispersive frame, resonator starting in vacuum.
    #[default]
    Transformed,
    /// Drive-rotating lab frame, resonator starting in the coherent state −ε/Δ_c.
    Lab,
}

impl std::str::FromStr for Frame {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transformed" => Ok(Frame::Transformed),
            "lab" => Ok(Frame::Lab),
            other => Err(Error::invalid("frame", format!("unknown frame `{other}`"))),
        }
    }
}

impl SystemConfig {
    pub fn new(tls: Vec<Tls>, delta_c: f64, epsilon: f64) -> Self {
        SystemConfig {
            tls,
            delta_c,
            epsilon,
            kappa: 0.0,
            fock_cutoff: default_fock_cutoff(),
            drive_limit: default_drive_limit(),
        }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        SystemConfig {
            epsilon,
            ..self.clone()
        }
    }

    pub fn with_delta_c(&self, delta_c: f64) -> Self {
        SystemConfig {
            delta_c,
            ..self.clone()
        }
    }

    pub fn with_kappa(&self, kappa: f64) -> Self {
        SystemConfig {
            kappa,
            ..self.clone()
        }
    }

    pub fn with_fock_cutoff(&self, fock_cutoff: usize) -> Self {
        SystemConfig {
            fock_cutoff,
            ..self.clone()
        }
    }

    pub fn n_tls(&self) -> usize {
        self.tls.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.tls.is_empty() {
            return Err(Error::invalid("tls", "at least one TLS is required"));
        }
        let finite = self
            .tls
            .iter()
            .all(|t| t.delta.is_finite() && t.g.is_finite())
            && self.delta_c.is_finite()
            && self.epsilon.is_finite();
        if !finite {
            return Err(Error::invalid("config", "frequencies must be finite"));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::invalid("kappa", "must be non-negative"));
        }
        if !(self.drive_limit > 0.0) {
            return Err(Error::invalid("drive_limit", "must be positive"));
        }
        HilbertSpace::new(self.tls.len(), self.fock_cutoff)?;
        Ok(())
    }

    pub fn space(&self) -> Result<HilbertSpace> {
        HilbertSpace::new(self.tls.len(), self.fock_cutoff)
    }

    /// g_n/|Δ_nc| for every TLS (infinite on resonance).
    pub fn dispersive_ratios(&self) -> Vec<f64> {
        self.tls
            .iter()
            .map(|t| {
                let dnc = (t.delta - self.delta_c).abs();
                if dnc == 0.0 {
                    if t.g == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    t.g.abs() / dnc
                }
            })
            .collect()
    }

    /// Errors above [`DISPERSIVE_LIMIT`], warns above [`DISPERSIVE_WARN`].
    pub fn check_dispersive(&self) -> Result<Vec<f64>> {
        let ratios = self.dispersive_ratios();
        for (site, &ratio) in ratios.iter().enumerate() {
            if ratio > DISPERSIVE_LIMIT {
                return Err(Error::DispersiveValidity {
                    site,
                    ratio,
                    limit: DISPERSIVE_LIMIT,
                });
            }
            if ratio > DISPERSIVE_WARN {
                log::warn!(
                    "TLS {site}: g/|Delta_nc| = {ratio:.3} weakens the dispersive approximation"
                );
            }
        }
        Ok(ratios)
    }

    fn check_space(&self, space: &HilbertSpace) -> Result<()> {
        self.validate()?;
        if space.n_tls() != self.tls.len() {
            return Err(Error::DimensionMismatch {
                expected: self.tls.len(),
                found: space.n_tls(),
            });
        }
        if space.fock_cutoff() != self.fock_cutoff {
            return Err(Error::DimensionMismatch {
                expected: self.fock_cutoff,
                found: space.fock_cutoff(),
            });
        }
        Ok(())
    }
}

/// Δ_c a†a + ε(a + a†) + Σ_n [(Δ_n/2)σ_nz + g_n(aσ_n+ + a†σ_n−)].
pub fn build_full_hamiltonian(cfg: &SystemConfig, space: &HilbertSpace) -> Result<Operator> {
    cfg.check_space(space)?;
    let a = annihilation(space);
    let ad = a.dagger();
    let mut h = (&ad * &a).scale_real(angular(cfg.delta_c));
    h = &h + &(&a + &ad).scale_real(angular(cfg.epsilon));
    for (n, t) in cfg.tls.iter().enumerate() {
        let sz = pauli(PauliAxis::Z, n, space)?;
        let sp = pauli(PauliAxis::Plus, n, space)?;
        let sm = pauli(PauliAxis::Minus, n, space)?;
        h = &h + &sz.scale_real(angular(t.delta) / 2.0);
        let exchange = &(&a * &sp) + &(&ad * &sm);
        h = &h + &exchange.scale_real(angular(t.g));
    }
    Ok(h)
}

/// Dispersive-frame Hamiltonian
/// Δ_c a†a + Σ_n [(Δ̃_n/2)σ_nz + (Ω_nx/2)σ_nx + (g_n²/Δ_nc)σ_nz a†a + f_n σ_nz(a + a†)]
/// + Σ_{m<n} (λ_mn/2)(σ_n+σ_m− + h.c.).
///
/// The drive ε(a + a†) is removed by the displacement that defines the frame.
pub fn build_transformed_hamiltonian(cfg: &SystemConfig, space: &HilbertSpace) -> Result<Operator> {
    cfg.check_space(space)?;
    cfg.check_dispersive()?;
    let eff = EffectiveParams::new(cfg)?;
    let a = annihilation(space);
    let ad = a.dagger();
    let num = &ad * &a;
    let quad = &a + &ad;
    let mut h = num.scale_real(angular(cfg.delta_c));
    let mut sp = Vec::with_capacity(cfg.n_tls());
    let mut sm = Vec::with_capacity(cfg.n_tls());
    for (n, e) in eff.tls.iter().enumerate() {
        let sz = pauli(PauliAxis::Z, n, space)?;
        let sx = pauli(PauliAxis::X, n, space)?;
        h = &h + &sz.scale_real(angular(e.delta_tilde) / 2.0);
        h = &h + &sx.scale_real(angular(e.omega_x) / 2.0);
        h = &h + &(&sz * &num).scale_real(angular(e.stark));
        h = &h + &(&sz * &quad).scale_real(angular(e.f));
        sp.push(pauli(PauliAxis::Plus, n, space)?);
        sm.push(pauli(PauliAxis::Minus, n, space)?);
    }
    for n in 0..cfg.n_tls() {
        for m in 0..n {
            let hop = &sp[n] * &sm[m];
            let pair = &hop + &hop.dagger();
            h = &h + &pair.scale_real(angular(eff.lambda[m][n]) / 2.0);
        }
    }
    Ok(h)
}

pub fn build_hamiltonian(
    cfg: &SystemConfig,
    space: &HilbertSpace,
    frame: Frame,
) -> Result<Operator> {
    match frame {
        Frame::Transformed => build_transformed_hamiltonian(cfg, space),
        Frame::Lab => build_full_hamiltonian(cfg, space),
    }
}

/// √κ·a with κ in ns⁻¹; empty when κ = 0.
pub fn collapse_operators(cfg: &SystemConfig, space: &HilbertSpace) -> Result<Vec<Operator>> {
    if !(cfg.kappa >= 0.0) {
        return Err(Error::invalid("kappa", "must be non-negative"));
    }
    if cfg.kappa == 0.0 {
        return Ok(Vec::new());
    }
    Ok(vec![
        annihilation(space).scale_real(rate_per_ns(cfg.kappa).sqrt())
    ])
}

/// Coherent amplitude −ε/Δ_c of the driven resonator.
pub fn displacement(cfg: &SystemConfig) -> Result<f64> {
    if cfg.epsilon == 0.0 {
        return Ok(0.0);
    }
    if cfg.delta_c == 0.0 {
        return Err(Error::Singular {
            quantity: "resonator displacement",
            denominator: "Delta_c",
        });
    }
    Ok(-cfg.epsilon / cfg.delta_c)
}

/// Smallest Fock cutoff that holds the coherent state −ε/Δ_c with margin.
pub fn lab_fock_cutoff(cfg: &SystemConfig) -> Result<usize> {
    let alpha = displacement(cfg)?.abs();
    let needed = (alpha * alpha + 5.0 * alpha + 1.0).ceil() as usize + 1;
    Ok(cfg.fock_cutoff.max(needed))
}

/// Initial resonator state for a simulation frame.
pub fn initial_resonator_state(cfg: &SystemConfig, frame: Frame) -> Result<DensityMatrix> {
    let psi = match frame {
        Frame::Transformed => {
            let mut v = vec![c(0.0); cfg.fock_cutoff];
            v[0] = c(1.0);
            v
        }
        Frame::Lab => coherent_state(c(displacement(cfg)?), cfg.fock_cutoff),
    };
    DensityMatrix::pure(&psi)
}
