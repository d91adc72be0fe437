//! Lindblad master-equation propagation with fixed-step RK4.
//!
//! dρ/dt = −i[H, ρ] + Σ_k (C_k ρ C_k† − ½{C_k†C_k, ρ}), H in rad/ns, t in ns.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::GatePlan;
use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::hamiltonian::{
    build_hamiltonian, collapse_operators, initial_resonator_state, lab_fock_cutoff, Frame,
    SystemConfig,
};
use crate::operator::{
    c, hermitian_eigenvalues, hermiticity_deviation, trace_out_fock, CMatrix, DensityMatrix,
    HilbertSpace, Operator, C64, I,
};

/// Trace drift that aborts an evolution.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;
/// Most negative eigenvalue tolerated.
pub const NEGATIVITY_LIMIT: f64 = -1e-6;
/// Steps per period of the fastest frequency in the automatic step.
pub const AUTO_STEP_FRACTION: f64 = 0.05;

/// Dense reference implementation of the Lindblad right-hand side.
pub fn lindblad_rhs(h: &Operator, collapse: &[Operator], rho: &DensityMatrix) -> Result<CMatrix> {
    let d = rho.dim();
    for op in std::iter::once(h).chain(collapse) {
        if op.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: op.dim(),
            });
        }
    }
    let r = rho.matrix();
    let hm = h.matrix();
    let mut out = (hm * r - r * hm) * (-I);
    for op in collapse {
        let cm = op.matrix();
        let cd = cm.adjoint();
        let cdc = &cd * cm;
        out += cm * r * &cd - (&cdc * r + r * &cdc) * c(0.5);
    }
    Ok(out)
}

type Triplets = Vec<(usize, usize, C64)>;

fn triplets(m: &CMatrix) -> Triplets {
    let mut t = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != c(0.0) {
                t.push((i, j, v));
            }
        }
    }
    t
}

/// Sparse form of the generator: ρ̇ = −i(Kρ − ρK†) + Σ_k C_k ρ C_k†
/// with K = H − (i/2)Σ_k C_k†C_k.
#[derive(Debug, Clone)]
pub struct Generator {
    d: usize,
    k: Triplets,
    collapse: Vec<Triplets>,
    spread: f64,
}

impl Generator {
    pub fn new(h: &Operator, collapse: &[Operator]) -> Result<Self> {
        let d = h.dim();
        for op in collapse {
            if op.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: op.dim(),
                });
            }
        }
        let ev = h.eigenvalues_hermitian()?;
        let spread = ev[ev.len() - 1] - ev[0];
        let mut k = h.matrix().clone();
        for op in collapse {
            let cm = op.matrix();
            k -= cm.adjoint() * cm * (I * 0.5);
        }
        Ok(Generator {
            d,
            k: triplets(&k),
            collapse: collapse.iter().map(|op| triplets(op.matrix())).collect(),
            spread,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Largest transition frequency of H, rad/ns.
    pub fn spectral_spread(&self) -> f64 {
        self.spread
    }

    /// 0.05 / f_max with f_max = spread/2π in GHz, ns.
    pub fn auto_step(&self) -> f64 {
        let f_max = self.spread / (2.0 * std::f64::consts::PI);
        if f_max > 0.0 {
            AUTO_STEP_FRACTION / f_max
        } else {
            f64::INFINITY
        }
    }

    /// Writes ρ̇ into `out`; `scratch` is overwritten.
    pub fn apply(&self, rho: &CMatrix, out: &mut CMatrix, scratch: &mut CMatrix) {
        let d = self.d;
        let r = rho.as_slice();
        {
            // M = −iKρ; −i(Kρ − ρK†) = M + M†
            let o = out.as_mut_slice();
            o.fill(c(0.0));
            for &(a, col, v) in &self.k {
                let w = v * -I;
                for b in 0..d {
                    o[a + b * d] += w * r[col + b * d];
                }
            }
            for i in 0..d {
                for j in i..d {
                    let x = o[i + j * d] + o[j + i * d].conj();
                    o[i + j * d] = x;
                    o[j + i * d] = x.conj();
                }
            }
        }
        for cop in &self.collapse {
            let s = scratch.as_mut_slice();
            s.fill(c(0.0));
            for &(a, col, v) in cop {
                for b in 0..d {
                    s[a + b * d] += v * r[col + b * d];
                }
            }
            // (Cρ)C†: column b of the result gathers conj(C_bc) × column c of Cρ
            let o = out.as_mut_slice();
            for &(b, col, v) in cop {
                let w = v.conj();
                for a in 0..d {
                    o[a + b * d] += s[a + col * d] * w;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Fixed step in ns; `None` uses [`Generator::auto_step`].
    pub step: Option<f64>,
    /// Keep every n-th state in the trace (0 keeps only the endpoints).
    pub record_every: usize,
    /// Check the minimum eigenvalue every n-th step (0: endpoints only).
    pub eigen_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub step: f64,
    pub steps: usize,
    /// |tr ρ − tr ρ₀| after every step.
    pub trace_deviation: Vec<f64>,
    /// max |ρ − ρ†| after every step, before re-symmetrisation.
    pub hermiticity_deviation: Vec<f64>,
    /// (time, minimum eigenvalue) at sampled steps.
    pub min_eigenvalue: Vec<(f64, f64)>,
}

impl SimulationTrace {
    pub fn final_state(&self) -> &DensityMatrix {
        self.states
            .last()
            .expect("trace holds at least the initial state")
    }

    pub fn max_trace_deviation(&self) -> f64 {
        self.trace_deviation.iter().copied().fold(0.0, f64::max)
    }

    pub fn worst_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
            .iter()
            .map(|p| p.1)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Number of steps and the adjusted step that divides `duration` exactly.
pub fn step_grid(duration: f64, step: f64) -> (usize, f64) {
    if duration <= 0.0 {
        return (0, 0.0);
    }
    let n = (duration / step).ceil().max(1.0) as usize;
    (n, duration / n as f64)
}

// out = x + a·k
fn shifted(out: &mut CMatrix, x: &CMatrix, a: C64, k: &CMatrix) {
    for ((o, xv), kv) in out
        .as_mut_slice()
        .iter_mut()
        .zip(x.as_slice())
        .zip(k.as_slice())
    {
        *o = xv + a * kv;
    }
}

/// Integrates the master equation for `duration` ns from `rho0`.
pub fn evolve(
    gen: &Generator,
    rho0: &DensityMatrix,
    duration: f64,
    opts: &EvolveOptions,
) -> Result<SimulationTrace> {
    if rho0.dim() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            found: rho0.dim(),
        });
    }
    if !(duration >= 0.0) {
        return Err(Error::invalid("duration", "must be non-negative"));
    }
    let requested = opts.step.unwrap_or_else(|| gen.auto_step());
    if !(requested > 0.0) {
        return Err(Error::invalid("step", "must be positive"));
    }
    let (steps, h) = step_grid(duration, requested);
    let d = gen.dim();
    let mut rho = rho0.matrix().clone();
    let tr0 = rho.trace();
    let mut trace = SimulationTrace {
        times: vec![0.0],
        states: vec![rho0.clone()],
        step: h,
        steps,
        trace_deviation: Vec::with_capacity(steps),
        hermiticity_deviation: Vec::with_capacity(steps),
        min_eigenvalue: vec![(0.0, hermitian_eigenvalues(&rho)[0])],
    };
    let mut k1 = CMatrix::zeros(d, d);
    let mut k2 = CMatrix::zeros(d, d);
    let mut k3 = CMatrix::zeros(d, d);
    let mut k4 = CMatrix::zeros(d, d);
    let mut tmp = CMatrix::zeros(d, d);
    let mut scratch = CMatrix::zeros(d, d);
    let half = c(h / 2.0);
    let full = c(h);
    let sixth = c(h / 6.0);
    for n in 1..=steps {
        gen.apply(&rho, &mut k1, &mut scratch);
        shifted(&mut tmp, &rho, half, &k1);
        gen.apply(&tmp, &mut k2, &mut scratch);
        shifted(&mut tmp, &rho, half, &k2);
        gen.apply(&tmp, &mut k3, &mut scratch);
        shifted(&mut tmp, &rho, full, &k3);
        gen.apply(&tmp, &mut k4, &mut scratch);
        for (((r, a), b), (c3, d4)) in rho
            .as_mut_slice()
            .iter_mut()
            .zip(k1.as_slice())
            .zip(k2.as_slice())
            .zip(k3.as_slice().iter().zip(k4.as_slice()))
        {
            *r += sixth * (a + (b + c3) * 2.0 + d4);
        }

        let t = n as f64 * h;
        let herm = hermiticity_deviation(&rho);
        tmp.copy_from(&rho.adjoint());
        rho += &tmp;
        rho *= c(0.5);
        let drift = (rho.trace() - tr0).norm();
        trace.trace_deviation.push(drift);
        trace.hermiticity_deviation.push(herm);
        if drift > TRACE_DRIFT_LIMIT || !drift.is_finite() {
            return Err(Error::Diagnostic {
                time: t,
                what: "trace drift",
                value: drift,
                advisory_step: h / 2.0,
            });
        }
        let last = n == steps;
        if last || (opts.eigen_every > 0 && n % opts.eigen_every == 0) {
            let min = hermitian_eigenvalues(&rho)[0];
            trace.min_eigenvalue.push((t, min));
            if min < NEGATIVITY_LIMIT {
                return Err(Error::Diagnostic {
                    time: t,
                    what: "minimum eigenvalue",
                    value: min,
                    advisory_step: h / 2.0,
                });
            }
        }
        if last || (opts.record_every > 0 && n % opts.record_every == 0) {
            trace.times.push(t);
            trace.states.push(DensityMatrix::new_unchecked(rho.clone()));
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ChannelOptions {
    /// Overrides the plan's simulation frame.
    pub frame: Option<Frame>,
    /// Fixed step in ns; `None` picks one per segment.
    pub step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRun {
    pub channel: Channel,
    pub frame: Frame,
    pub fock_cutoff: usize,
    /// Step actually used per segment, ns.
    pub steps: Vec<f64>,
    pub max_trace_deviation: f64,
    pub min_eigenvalue: f64,
}

/// Register inputs whose images determine the channel: |i⟩⟨i|, and for
/// i < j the projectors onto (|i⟩ + |j⟩)/√2 and (|i⟩ + i|j⟩)/√2.
fn probe_states(d: usize) -> Vec<(usize, usize, u8, CMatrix)> {
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut m = CMatrix::zeros(d, d);
        m[(i, i)] = c(1.0);
        out.push((i, i, 0, m));
    }
    for i in 0..d {
        for j in i + 1..d {
            for (kind, phase) in [(1u8, c(1.0)), (2u8, I)] {
                let mut psi = vec![c(0.0); d];
                psi[i] = c(1.0 / 2f64.sqrt());
                psi[j] = phase / 2f64.sqrt();
                let m = CMatrix::from_fn(d, d, |a, b| psi[a] * psi[b].conj());
                out.push((i, j, kind, m));
            }
        }
    }
    out
}

/// Times the automatic step is halved after a diagnostic failure.
pub const MAX_AUTO_HALVINGS: usize = 3;

fn run_probes(
    runs: &[SegmentRun],
    resonator: &DensityMatrix,
    space: &HilbertSpace,
) -> Result<Vec<(CMatrix, f64, f64)>> {
    probe_states(space.register_dim())
        .into_par_iter()
        .map(|(_, _, _, reg)| {
            let mut rho = DensityMatrix::new_unchecked(reg.kronecker(resonator.matrix()));
            let mut drift: f64 = 0.0;
            let mut min_ev = f64::INFINITY;
            for run in runs {
                let opts = EvolveOptions {
                    step: Some(run.step),
                    ..Default::default()
                };
                let tr = evolve(&run.gen, &rho, run.duration, &opts)?;
                drift = drift.max(tr.max_trace_deviation());
                min_ev = min_ev.min(tr.worst_eigenvalue());
                rho = tr.final_state().clone();
            }
            Ok((trace_out_fock(rho.matrix(), space)?, drift, min_ev))
        })
        .collect()
}

struct SegmentRun {
    gen: Generator,
    duration: f64,
    step: f64,
}

/// Evolves a complete set of register inputs through every plan segment
/// and reconstructs the reduced channel on the TLS register.
pub fn simulate_gate_channel(
    plan: &GatePlan,
    cfg: &SystemConfig,
    opts: &ChannelOptions,
) -> Result<ChannelRun> {
    let frame = opts.frame.unwrap_or(plan.simulation_frame);
    let seg_cfgs: Vec<SystemConfig> = (0..plan.segments.len())
        .map(|k| plan.segment_config(cfg, k))
        .collect();
    if frame == Frame::Transformed {
        if let Some(first) = seg_cfgs.first() {
            if seg_cfgs
                .iter()
                .any(|s| s.epsilon != first.epsilon || s.delta_c != first.delta_c)
            {
                return Err(Error::invalid(
                    "frame",
                    "segments with different drive or resonator detuning need the lab frame",
                ));
            }
        }
    }
    let mut fock = cfg.fock_cutoff;
    if frame == Frame::Lab {
        for s in &seg_cfgs {
            fock = fock.max(lab_fock_cutoff(s)?);
        }
    }
    let space = HilbertSpace::new(cfg.n_tls(), fock)?;
    let d = space.register_dim();
    let mut runs = Vec::with_capacity(seg_cfgs.len());
    for (seg, scfg) in plan.segments.iter().zip(&seg_cfgs) {
        let scfg = scfg.with_fock_cutoff(fock);
        let h = build_hamiltonian(&scfg, &space, frame)?;
        let gen = Generator::new(&h, &collapse_operators(&scfg, &space)?)?;
        let step = opts.step.unwrap_or_else(|| gen.auto_step());
        runs.push(SegmentRun {
            gen,
            duration: seg.duration,
            step,
        });
    }
    let first = seg_cfgs
        .first()
        .map(|s| s.with_fock_cutoff(fock))
        .unwrap_or_else(|| cfg.with_fock_cutoff(fock));
    let resonator = initial_resonator_state(&first, frame)?;

    let mut halvings = 0;
    let outputs = loop {
        match run_probes(&runs, &resonator, &space) {
            Err(Error::Diagnostic { .. })
                if opts.step.is_none() && halvings < MAX_AUTO_HALVINGS =>
            {
                halvings += 1;
                log::warn!("diagnostic failure at the automatic step, halving ({halvings})");
                for r in &mut runs {
                    r.step /= 2.0;
                }
            }
            other => break other?,
        }
    };

    let probes = probe_states(d);
    let mut images = vec![CMatrix::zeros(d, d); d * d];
    let mut diag = vec![CMatrix::zeros(d, d); d];
    let mut plus = std::collections::HashMap::new();
    let mut ypr = std::collections::HashMap::new();
    let mut max_drift: f64 = 0.0;
    let mut min_ev = f64::INFINITY;
    for ((i, j, kind, _), (m, drift, ev)) in probes.into_iter().zip(outputs) {
        max_drift = max_drift.max(drift);
        min_ev = min_ev.min(ev);
        match kind {
            0 => diag[i] = m,
            1 => {
                plus.insert((i, j), m);
            }
            _ => {
                ypr.insert((i, j), m);
            }
        }
    }
    for i in 0..d {
        images[i * d + i] = diag[i].clone();
        for j in i + 1..d {
            let base = (&diag[i] + &diag[j]) * c(0.5);
            let a = &plus[&(i, j)] - &base;
            let b = &ypr[&(i, j)] - &base;
            images[i * d + j] = &a + &b * I;
            images[j * d + i] = &a - &b * I;
        }
    }
    Ok(ChannelRun {
        channel: Channel::from_images(d, images)?,
        frame,
        fock_cutoff: fock,
        steps: runs
            .iter()
            .map(|r| step_grid(r.duration, r.step).1)
            .collect(),
        max_trace_deviation: max_drift,
        min_eigenvalue: min_ev,
    })
}

/// Closed-system evolution of one TLS in both frames: the lab frame starts
/// from |ψ⟩ ⊗ |−ε/Δ_c⟩, the transformed frame from |ψ⟩ ⊗ |0⟩. Returns
/// the largest deviation of ⟨σ_z⟩ over `samples` equally spaced times in
/// [0, duration].
pub fn frame_sigma_z_deviation(
    cfg: &SystemConfig,
    tls_state: &[C64; 2],
    duration: f64,
    samples: usize,
) -> Result<f64> {
    if cfg.n_tls() != 1 {
        return Err(Error::invalid(
            "tls",
            "frame comparison is defined for one TLS",
        ));
    }
    let lab_cfg = cfg.with_fock_cutoff(lab_fock_cutoff(cfg)?.max(cfg.fock_cutoff));
    let z_expect = |c_: &SystemConfig, frame: Frame| -> Result<Vec<f64>> {
        let space = c_.space()?;
        let h = build_hamiltonian(c_, &space, frame)?;
        let res = initial_resonator_state(c_, frame)?;
        let tls = DensityMatrix::pure(tls_state)?;
        let rho0 = DensityMatrix::product(&tls, &res);
        let sz = crate::operator::pauli(crate::operator::PauliAxis::Z, 0, &space)?;
        let eig = (h.matrix() + h.matrix().adjoint())
            .scale(0.5)
            .symmetric_eigen();
        let v = &eig.eigenvectors;
        let rot = v.adjoint() * rho0.matrix() * v;
        let szr = v.adjoint() * sz.matrix() * v;
        let dim = space.dim();
        (0..=samples)
            .map(|k| {
                let t = duration * k as f64 / samples as f64;
                let ph: Vec<C64> = eig
                    .eigenvalues
                    .iter()
                    .map(|l| (-I * (l * t)).exp())
                    .collect();
                let mut s = c(0.0);
                for a in 0..dim {
                    for b in 0..dim {
                        s += ph[a] * rot[(a, b)] * ph[b].conj() * szr[(b, a)];
                    }
                }
                Ok(s.re)
            })
            .collect()
    };
    let lab = z_expect(&lab_cfg, Frame::Lab)?;
    let tr = z_expect(cfg, Frame::Transformed)?;
    Ok(lab
        .iter()
        .zip(&tr)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Frame comparison over one Rabi period 1/|Ω| of a single driven TLS,
/// starting from the excited state.
pub fn dispersive_oracle_deviation(cfg: &SystemConfig, samples: usize) -> Result<f64> {
    let omega = crate::dispersive::rabi_frequency(cfg, 0)?;
    if omega == 0.0 {
        return Err(Error::invalid(
            "epsilon",
            "no Rabi oscillation without drive",
        ));
    }
    frame_sigma_z_deviation(cfg, &[c(1.0), c(0.0)], 1e3 / omega.abs(), samples)
}

/// Fidelity difference between cutoffs N_F and N_F + 4 above which a run is
/// flagged as cutoff-limited.
pub const CUTOFF_TOLERANCE: f64 = 1e-4;
