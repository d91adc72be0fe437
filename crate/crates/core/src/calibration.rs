//! Gate calibration: drive amplitudes, durations, target unitaries and
//! closed-form decoherence estimates.
//!
//! Frequencies are linear MHz and durations ns throughout; a duration of
//! `π/Ω` with Ω in MHz is `500/Ω` ns.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use roots::{find_root_brent, Convergency};
use serde::{Deserialize, Serialize};

use crate::dispersive::{
    dressed_energy, effective_detuning, exchange_coupling, rabi_frequency, two_qubit_coefficients,
    Dressed, TwoQubitCoefficients,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{Frame, SystemConfig, DISPERSIVE_LIMIT, DISPERSIVE_WARN};
use crate::operator::{
    c, embed_register, expm_hermitian, kron, pauli_matrix, y_rotation, Operator, PauliAxis,
};
use crate::units::angular;

/// Grid spacing of the ε scan that brackets E₁ = E₂, MHz.
pub const SCAN_STEP: f64 = 1.0;
/// Closure tolerance on |E₁ − E₂| at the returned root, MHz.
pub const ROOT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateKind {
    X,
    Hadamard,
    Swap,
    CiracZoller,
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Hadamard => "hadamard",
            GateKind::Swap => "swap",
            GateKind::CiracZoller => "cirac-zoller",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentKind {
    /// Far-detuned drive; the resonator is only virtually populated.
    Dispersive,
    /// TLS and resonator on resonance, exchanging an excitation.
    ResonantSwap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Resonator detuning, MHz.
    pub delta_c: f64,
    /// Drive amplitude, MHz.
    pub epsilon: f64,
    /// ns.
    pub duration: f64,
    pub kind: SegmentKind,
}

/// Frame in which the target unitary is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetFrame {
    LabRotating,
    DressedInteraction,
}

/// A single-qubit rotation freedom allowed before comparison with the
/// target: rotation about the axis (sin θ, 0, cos θ) of TLS `site`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompensationAxis {
    pub site: usize,
    pub theta: f64,
}

/// Phases of the two-qubit target in the dressed basis: the target equals
/// diag(e^{−iφ}, −is·e^{iφ}, −is·e^{iφ}, e^{−iφ})·SWAP with φ = β₁τ (rad)
/// and s = sign β₂′.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapPhases {
    pub beta_1_phase: f64,
    pub exchange_sign: f64,
}

/// Protection of a non-participating TLS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectatorReport {
    pub site: usize,
    /// |Ω_mx|/|Δ̃_m|; small when the spectator only picks up a phase.
    pub transverse_ratio: f64,
    /// max over participants n of |λ_nm|/|Δ̃_n − Δ̃_m|.
    pub exchange_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GatePlan {
    pub kind: GateKind,
    pub participants: Vec<usize>,
    pub segments: Vec<Segment>,
    /// Target on the full TLS register.
    pub target: Operator,
    pub target_frame: TargetFrame,
    /// Frame the plan is meant to be simulated in.
    pub simulation_frame: Frame,
    pub compensation: Vec<CompensationAxis>,
    pub phase_factors: Option<SwapPhases>,
    pub coefficients: Option<TwoQubitCoefficients>,
    pub spectators: Vec<SpectatorReport>,
    pub flags: Vec<String>,
}

impl GatePlan {
    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Drive amplitude of the first segment.
    pub fn epsilon(&self) -> f64 {
        self.segments.first().map_or(0.0, |s| s.epsilon)
    }

    /// Config of segment `k`: base config with the segment's Δ_c and ε.
    pub fn segment_config(&self, cfg: &SystemConfig, k: usize) -> SystemConfig {
        let s = &self.segments[k];
        SystemConfig {
            delta_c: s.delta_c,
            epsilon: s.epsilon,
            ..cfg.clone()
        }
    }
}

fn check_drive(cfg: &SystemConfig, epsilon: f64) -> Result<()> {
    if !epsilon.is_finite() || epsilon.abs() > cfg.drive_limit {
        return Err(Error::DriveBound {
            epsilon,
            limit: cfg.drive_limit,
        });
    }
    Ok(())
}

fn check_site(cfg: &SystemConfig, site: usize) -> Result<()> {
    cfg.validate()?;
    if site >= cfg.n_tls() {
        return Err(Error::SiteOutOfRange {
            site,
            n_tls: cfg.n_tls(),
        });
    }
    Ok(())
}

fn register_operator(op: &Operator, site: usize, n_tls: usize) -> Result<Operator> {
    embed_register(op, site, n_tls)
}

fn spectator_reports(cfg: &SystemConfig, participants: &[usize]) -> Result<Vec<SpectatorReport>> {
    (0..cfg.n_tls())
        .filter(|m| !participants.contains(m))
        .map(|m| {
            let dm = effective_detuning(cfg, m)?;
            let om = rabi_frequency(cfg, m)?;
            let mut exchange_ratio: f64 = 0.0;
            for &n in participants {
                let gap = (effective_detuning(cfg, n)? - dm).abs();
                let l = exchange_coupling(cfg, n, m)?.abs();
                exchange_ratio =
                    exchange_ratio.max(if gap == 0.0 { f64::INFINITY } else { l / gap });
            }
            Ok(SpectatorReport {
                site: m,
                transverse_ratio: if dm == 0.0 {
                    f64::INFINITY
                } else {
                    om.abs() / dm.abs()
                },
                exchange_ratio,
            })
        })
        .collect()
}

fn spectator_axes(cfg: &SystemConfig, participants: &[usize]) -> Result<Vec<CompensationAxis>> {
    (0..cfg.n_tls())
        .filter(|m| !participants.contains(m))
        .map(|m| {
            Ok(CompensationAxis {
                site: m,
                theta: dressed_energy(cfg, m)?.theta,
            })
        })
        .collect()
}

fn single_qubit_plan(
    cfg: &SystemConfig,
    site: usize,
    kind: GateKind,
    epsilon: f64,
    duration: f64,
    local: Operator,
) -> Result<GatePlan> {
    let calibrated = cfg.with_epsilon(epsilon);
    let mut flags = Vec::new();
    let spectators = spectator_reports(&calibrated, &[site])?;
    for s in &spectators {
        if s.transverse_ratio > 0.1 || s.exchange_ratio > 0.1 {
            flags.push(format!(
                "spectator {} weakly protected (transverse {:.3}, exchange {:.3})",
                s.site, s.transverse_ratio, s.exchange_ratio
            ));
        }
    }
    Ok(GatePlan {
        kind,
        participants: vec![site],
        segments: vec![Segment {
            delta_c: cfg.delta_c,
            epsilon,
            duration,
            kind: SegmentKind::Dispersive,
        }],
        target: register_operator(&local, site, cfg.n_tls())?,
        target_frame: TargetFrame::LabRotating,
        simulation_frame: Frame::Transformed,
        compensation: spectator_axes(&calibrated, &[site])?,
        phase_factors: None,
        coefficients: None,
        spectators,
        flags,
    })
}

/// ε below round-off of the frequencies that produced it.
fn negligible_drive(cfg: &SystemConfig, epsilon: f64) -> bool {
    let scale = cfg.delta_c.abs()
        + cfg
            .tls
            .iter()
            .map(|t| t.delta.abs() + t.g.abs())
            .sum::<f64>();
    epsilon.abs() <= 1e-9 * scale
}

fn tls_denominators(
    cfg: &SystemConfig,
    site: usize,
    what: &'static str,
) -> Result<(f64, f64, f64)> {
    let t = cfg.tls[site];
    let dnc = t.delta - cfg.delta_c;
    if dnc == 0.0 {
        return Err(Error::Singular {
            quantity: what,
            denominator: "Delta_nc",
        });
    }
    if t.g == 0.0 {
        return Err(Error::UnreachableGate {
            reason: format!("TLS {site} is uncoupled (g = 0)"),
        });
    }
    Ok((t.delta, t.g, dnc))
}

/// Spin flip: ε solving Δ̃ = 0, duration π/|Ω_x|.
pub fn calibrate_x(cfg: &SystemConfig, site: usize) -> Result<GatePlan> {
    check_site(cfg, site)?;
    let (delta, g, dnc) = tls_denominators(cfg, site, "X calibration")?;
    let epsilon = (delta * dnc + g * g) * cfg.delta_c / (2.0 * g * g);
    check_drive(cfg, epsilon)?;
    let omega = rabi_frequency(&cfg.with_epsilon(epsilon), site)?;
    if negligible_drive(cfg, epsilon) {
        return Err(Error::UnreachableGate {
            reason: format!("TLS {site} already has zero effective detuning without drive, so the Rabi frequency vanishes"),
        });
    }
    let duration = 500.0 / omega.abs();
    single_qubit_plan(
        cfg,
        site,
        GateKind::X,
        epsilon,
        duration,
        pauli_matrix(PauliAxis::X),
    )
}

/// Hadamard: ε solving Δ̃ = Ω_x, duration π/(√2|Ω_x|).
pub fn calibrate_hadamard(cfg: &SystemConfig, site: usize) -> Result<GatePlan> {
    check_site(cfg, site)?;
    let (delta, g, dnc) = tls_denominators(cfg, site, "Hadamard calibration")?;
    let denom = 2.0 * g * (cfg.delta_c + g);
    if denom == 0.0 {
        return Err(Error::Singular {
            quantity: "Hadamard calibration",
            denominator: "Delta_c + g_n",
        });
    }
    let epsilon = (delta * dnc + g * g) * cfg.delta_c / denom;
    check_drive(cfg, epsilon)?;
    let omega = rabi_frequency(&cfg.with_epsilon(epsilon), site)?;
    if negligible_drive(cfg, epsilon) {
        return Err(Error::UnreachableGate {
            reason: format!("Rabi frequency of TLS {site} vanishes at the Hadamard point"),
        });
    }
    let duration = 500.0 / (2f64.sqrt() * omega.abs());
    let h = (&pauli_matrix(PauliAxis::X) + &pauli_matrix(PauliAxis::Z)).scale_real(FRAC_1_SQRT_2);
    single_qubit_plan(cfg, site, GateKind::Hadamard, epsilon, duration, h)
}

struct Closure {
    max_iter: usize,
}

impl Convergency<f64> for Closure {
    fn is_root_found(&mut self, y: f64) -> bool {
        y.abs() < ROOT_TOLERANCE * 1e-2
    }
    fn is_converged(&mut self, x1: f64, x2: f64) -> bool {
        (x1 - x2).abs() <= 4.0 * f64::EPSILON * x1.abs().max(1.0)
    }
    fn is_iteration_limit_reached(&mut self, iter: usize) -> bool {
        iter >= self.max_iter
    }
}

/// Roots of E₁(ε) − E₂(ε) on [0, drive_limit].
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingSearch {
    pub roots: Vec<f64>,
}

pub fn find_energy_crossings(cfg: &SystemConfig, (m, n): (usize, usize)) -> Result<CrossingSearch> {
    let gap = |eps: f64| -> Result<f64> {
        let c = cfg.with_epsilon(eps);
        Ok(dressed_energy(&c, m)?.energy - dressed_energy(&c, n)?.energy)
    };
    let steps = (cfg.drive_limit / SCAN_STEP).ceil() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|k| (k as f64 * SCAN_STEP).min(cfg.drive_limit))
        .collect();
    let values = grid.iter().map(|&e| gap(e)).collect::<Result<Vec<_>>>()?;

    let scale = grid
        .iter()
        .map(|&e| {
            let c = cfg.with_epsilon(e);
            dressed_energy(&c, m).map(|d| d.energy).unwrap_or(0.0)
        })
        .fold(1.0, f64::max);
    if values.iter().all(|v| v.abs() <= 1e-12 * scale) {
        return Err(Error::AlwaysResonant {
            first: m,
            second: n,
        });
    }

    let mut roots = Vec::new();
    for k in 0..grid.len() {
        if values[k] == 0.0 {
            roots.push(grid[k]);
            continue;
        }
        if k + 1 < grid.len() && values[k] * values[k + 1] < 0.0 {
            let f = |e: f64| gap(e).unwrap_or(f64::NAN);
            let root = find_root_brent(grid[k], grid[k + 1], f, &mut Closure { max_iter: 200 })
                .map_err(|_| Error::NoRoot {
                    first: m,
                    second: n,
                    limit: cfg.drive_limit,
                })?;
            roots.push(root);
        }
    }
    Ok(CrossingSearch { roots })
}

/// Pauli operator `axis` of TLS `site` in its dressed basis, on an `n`-TLS register.
fn dressed_op(axis: PauliAxis, theta: f64, site: usize, n: usize) -> Result<Operator> {
    let r = y_rotation(theta);
    register_operator(&(&(&r * &pauli_matrix(axis)) * &r.dagger()), site, n)
}

/// Exchange gate between dressed TLSs m and n:
/// ε* with E_m = E_n, duration π/(2|β₂′|), target exp(−iτ(β₁ Z̄Z̄ + β₂′(σ̄₊σ̄₋ + h.c.))).
pub fn calibrate_two_qubit(cfg: &SystemConfig, pair: (usize, usize)) -> Result<GatePlan> {
    let (m, n) = pair;
    check_site(cfg, m)?;
    check_site(cfg, n)?;
    if m == n {
        return Err(Error::invalid("pair", "the two TLS indices must differ"));
    }
    let search = find_energy_crossings(cfg, pair)?;
    let mut flags = Vec::new();
    let epsilon = match search.roots.as_slice() {
        [] => {
            return Err(Error::NoRoot {
                first: m,
                second: n,
                limit: cfg.drive_limit,
            })
        }
        [only] => *only,
        many => {
            flags.push(format!(
                "{} energy crossings in [0, {}] MHz: {:?}; using the smallest",
                many.len(),
                cfg.drive_limit,
                many
            ));
            many[0]
        }
    };
    let calibrated = cfg.with_epsilon(epsilon);
    let (dm, dn) = (
        dressed_energy(&calibrated, m)?,
        dressed_energy(&calibrated, n)?,
    );
    if (dm.energy - dn.energy).abs() > ROOT_TOLERANCE {
        return Err(Error::NotResonant {
            e1: dm.energy,
            e2: dn.energy,
            tolerance: ROOT_TOLERANCE,
        });
    }
    let coeffs = two_qubit_coefficients(&calibrated, pair)?;
    if coeffs.real_transition_warning {
        flags.push(
            "dressed energies close to the resonator: real photon transitions possible".into(),
        );
    }
    if coeffs.beta_2_prime == 0.0 {
        return Err(Error::UnreachableGate {
            reason: "effective exchange coupling vanishes at the crossing".into(),
        });
    }
    let duration = 250.0 / coeffs.beta_2_prime.abs();
    let target = swap_target(cfg.n_tls(), pair, (dm, dn), &coeffs, duration)?;
    let spectators = spectator_reports(&calibrated, &[m, n])?;
    let mut compensation = vec![
        CompensationAxis {
            site: m,
            theta: dm.theta,
        },
        CompensationAxis {
            site: n,
            theta: dn.theta,
        },
    ];
    compensation.extend(spectator_axes(&calibrated, &[m, n])?);
    compensation.sort_by_key(|a| a.site);
    Ok(GatePlan {
        kind: GateKind::Swap,
        participants: vec![m, n],
        segments: vec![Segment {
            delta_c: cfg.delta_c,
            epsilon,
            duration,
            kind: SegmentKind::Dispersive,
        }],
        target,
        target_frame: TargetFrame::DressedInteraction,
        simulation_frame: Frame::Transformed,
        compensation,
        phase_factors: Some(SwapPhases {
            beta_1_phase: angular(coeffs.beta_1) * duration,
            exchange_sign: coeffs.beta_2_prime.signum(),
        }),
        coefficients: Some(coeffs),
        spectators,
        flags,
    })
}

fn swap_target(
    n_tls: usize,
    (m, n): (usize, usize),
    (dm, dn): (Dressed, Dressed),
    coeffs: &TwoQubitCoefficients,
    duration: f64,
) -> Result<Operator> {
    let hop = &dressed_op(PauliAxis::Plus, dm.theta, m, n_tls)?
        * &dressed_op(PauliAxis::Minus, dn.theta, n, n_tls)?;
    let zz = &dressed_op(PauliAxis::Z, dm.theta, m, n_tls)?
        * &dressed_op(PauliAxis::Z, dn.theta, n, n_tls)?;
    let h = &zz.scale_real(angular(coeffs.beta_1))
        + &(&hop + &hop.dagger()).scale_real(angular(coeffs.beta_2_prime));
    expm_hermitian(&h, duration)
}

/// Resonator-bus controlled-phase gate: swap TLS m into the resonator,
/// accumulate a Stark phase on TLS n with detuning `delta_nc` from the
/// resonator, swap back.
pub fn cirac_zoller_plan(
    cfg: &SystemConfig,
    (m, n): (usize, usize),
    delta_nc: f64,
) -> Result<GatePlan> {
    check_site(cfg, m)?;
    check_site(cfg, n)?;
    if m == n {
        return Err(Error::invalid("pair", "the two TLS indices must differ"));
    }
    let (t1, t2) = (cfg.tls[m], cfg.tls[n]);
    if t1.g == 0.0 || t2.g == 0.0 {
        return Err(Error::UnreachableGate {
            reason: "both TLSs must couple to the resonator".into(),
        });
    }
    if delta_nc == 0.0 || !delta_nc.is_finite() {
        return Err(Error::Singular {
            quantity: "conditional phase time",
            denominator: "Delta_2c",
        });
    }
    let ratio = t2.g.abs() / delta_nc.abs();
    if ratio > DISPERSIVE_LIMIT {
        return Err(Error::DispersiveValidity {
            site: n,
            ratio,
            limit: DISPERSIVE_LIMIT,
        });
    }
    let mut flags = Vec::new();
    if ratio > DISPERSIVE_WARN {
        flags.push(format!("phase segment g/|Delta_2c| = {ratio:.3}"));
    }
    let swap = Segment {
        delta_c: t1.delta,
        epsilon: 0.0,
        duration: 250.0 / t1.g.abs(),
        kind: SegmentKind::ResonantSwap,
    };
    let phase = Segment {
        delta_c: t2.delta - delta_nc,
        epsilon: 0.0,
        duration: delta_nc.abs() * 1e3 / (4.0 * t2.g * t2.g),
        kind: SegmentKind::Dispersive,
    };
    let d = 1 << cfg.n_tls();
    let mut diag = vec![1.0; d];
    let (bm, bn) = (cfg.n_tls() - 1 - m, cfg.n_tls() - 1 - n);
    for (k, v) in diag.iter_mut().enumerate() {
        // index bit 0 is the excited state
        if (k >> bm) & 1 == 0 && (k >> bn) & 1 == 0 {
            *v = -1.0;
        }
    }
    let compensation = (0..cfg.n_tls())
        .map(|site| CompensationAxis { site, theta: 0.0 })
        .collect();
    Ok(GatePlan {
        kind: GateKind::CiracZoller,
        participants: vec![m, n],
        segments: vec![swap, phase, swap],
        target: Operator::diagonal(&diag),
        target_frame: TargetFrame::LabRotating,
        simulation_frame: Frame::Lab,
        compensation,
        phase_factors: None,
        coefficients: None,
        spectators: Vec::new(),
        flags,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentDecoherence {
    pub duration: f64,
    /// μs⁻¹.
    pub rate: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceEstimate {
    /// ns.
    pub tau_g: f64,
    /// Duration-weighted decoherence rate, μs⁻¹.
    pub tau_d_inverse: f64,
    pub ratio: f64,
    pub fidelity_estimate: f64,
    pub segments: Vec<SegmentDecoherence>,
}

/// Purcell-type rate g²κ/Δ_nc² (max over participants) for dispersive
/// segments, κ/2 for resonant swap segments.
pub fn decoherence_estimate(plan: &GatePlan, cfg: &SystemConfig) -> Result<DecoherenceEstimate> {
    if !(cfg.kappa >= 0.0) {
        return Err(Error::invalid("kappa", "must be non-negative"));
    }
    let mut segments = Vec::with_capacity(plan.segments.len());
    for s in &plan.segments {
        let rate = match s.kind {
            SegmentKind::ResonantSwap => cfg.kappa / 2.0,
            SegmentKind::Dispersive => {
                let mut worst: f64 = 0.0;
                for &p in &plan.participants {
                    let t = cfg.tls[p];
                    let dnc = t.delta - s.delta_c;
                    if dnc == 0.0 {
                        return Err(Error::Singular {
                            quantity: "Purcell rate",
                            denominator: "Delta_nc",
                        });
                    }
                    worst = worst.max(t.g * t.g * cfg.kappa / (dnc * dnc));
                }
                worst
            }
        };
        segments.push(SegmentDecoherence {
            duration: s.duration,
            rate,
            ratio: s.duration * rate * 1e-3,
        });
    }
    let tau_g = plan.duration();
    let ratio: f64 = segments.iter().map(|s| s.ratio).sum();
    Ok(DecoherenceEstimate {
        tau_g,
        tau_d_inverse: if tau_g > 0.0 {
            ratio / tau_g * 1e3
        } else {
            0.0
        },
        ratio,
        fidelity_estimate: (-ratio).exp(),
        segments,
    })
}

/// Dephasing rate ε²g⁴κ/Δ_nc⁶ from drive-induced photon-number
/// fluctuations, μs⁻¹ (multiply by 10⁶ for s⁻¹).
pub fn residual_dephasing_rate(cfg: &SystemConfig, site: usize) -> Result<f64> {
    check_site(cfg, site)?;
    let t = cfg.tls[site];
    let dnc = t.delta - cfg.delta_c;
    if dnc == 0.0 {
        return Err(Error::Singular {
            quantity: "residual dephasing",
            denominator: "Delta_nc",
        });
    }
    Ok(cfg.epsilon.powi(2) * t.g.powi(4) * cfg.kappa / dnc.powi(6))
}

/// Resonator fluctuation spectrum κ/((ω − ω_c)² + κ²/4).
pub fn lorentzian_spectrum(omega: f64, omega_c: f64, kappa: f64) -> f64 {
    kappa / ((omega - omega_c).powi(2) + kappa * kappa / 4.0)
}

/// Target unitary of the two-qubit plan in its own 4×4 dressed basis:
/// diag(e^{−iφ}, −is·e^{iφ}, −is·e^{iφ}, e^{−iφ})·SWAP.
pub fn swap_phase_form(phases: &SwapPhases) -> Operator {
    let a = (-crate::operator::I * phases.beta_1_phase).exp();
    let b = -crate::operator::I
        * phases.exchange_sign
        * (crate::operator::I * phases.beta_1_phase).exp();
    let z = c(0.0);
    Operator::from_rows(4, &[a, z, z, z, z, z, b, z, z, b, z, z, z, z, z, a])
}

/// Dressed-basis change ⊗_k R_y(θ_k) over the register.
pub fn dressed_basis(cfg: &SystemConfig, sites: &[usize]) -> Result<Operator> {
    let mut u = Operator::identity(1);
    for k in 0..cfg.n_tls() {
        let local = if sites.contains(&k) {
            y_rotation(dressed_energy(cfg, k)?.theta)
        } else {
            Operator::identity(2)
        };
        u = kron(&u, &local);
    }
    Ok(u)
}

/// Stark phase accumulated by the phase segment with one photon:
/// 2(g²/Δ_nc)·t, in rad.
pub fn conditional_phase(g: f64, delta_nc: f64, duration: f64) -> f64 {
    2.0 * angular(g * g / delta_nc) * duration
}

pub fn rotation_half_period(omega_mhz: f64) -> f64 {
    PI / angular(omega_mhz)
}
