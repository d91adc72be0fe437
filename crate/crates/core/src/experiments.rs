//! Experiment specifications, runners and table output.
//!
//! A run produces long-format rows `param,quantity,value,unit`. The `param`
//! field is a `key=value;...` string naming every input that varies between
//! rows; everything else is in the echoed spec.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{
    calibrate_hadamard, calibrate_two_qubit, calibrate_x, cirac_zoller_plan, conditional_phase,
    decoherence_estimate, find_energy_crossings, residual_dephasing_rate, GateKind, GatePlan,
};
use crate::circuit::{solve_circuit, CircuitParams};
use crate::dispersive::{dressed_energy, rabi_frequency};
use crate::error::{Error, ErrorKind, Result};
use crate::fidelity::plan_fidelity;
use crate::hamiltonian::{Frame, SystemConfig, Tls};
use crate::lindblad::{simulate_gate_channel, ChannelOptions, ChannelRun, CUTOFF_TOLERANCE};
use crate::units::rad_per_s_to_mhz;

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    Table1,
    Fig2Gatetimes,
    Fig2Beta,
    Fig2Energies,
    SwapPoint,
    Fig3Sweep,
    CzPlan,
    Custom,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 8] = [
        ExperimentName::Table1,
        ExperimentName::Fig2Gatetimes,
        ExperimentName::Fig2Beta,
        ExperimentName::Fig2Energies,
        ExperimentName::SwapPoint,
        ExperimentName::Fig3Sweep,
        ExperimentName::CzPlan,
        ExperimentName::Custom,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentName::Table1 => "table1",
            ExperimentName::Fig2Gatetimes => "fig2-gatetimes",
            ExperimentName::Fig2Beta => "fig2-beta",
            ExperimentName::Fig2Energies => "fig2-energies",
            ExperimentName::SwapPoint => "swap-point",
            ExperimentName::Fig3Sweep => "fig3-sweep",
            ExperimentName::CzPlan => "cz-plan",
            ExperimentName::Custom => "custom",
        }
    }

    fn default_sweep(&self) -> Option<Sweep> {
        let s = |parameter, start, stop, steps| {
            Some(Sweep {
                parameter,
                start,
                stop,
                steps,
            })
        };
        match self {
            ExperimentName::Fig2Gatetimes | ExperimentName::Fig2Beta => {
                s(SweepParameter::DeltaC, 80.0, 400.0, 33)
            }
            ExperimentName::Fig2Energies => s(SweepParameter::Epsilon, 0.0, 400.0, 401),
            ExperimentName::Fig3Sweep => s(SweepParameter::Kappa, 0.0, 10.0, 11),
            _ => None,
        }
    }
}

impl std::str::FromStr for ExperimentName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ExperimentName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::invalid("name", format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Kappa,
    DeltaC,
    Epsilon,
}

impl SweepParameter {
    fn key(&self) -> &'static str {
        match self {
            SweepParameter::Kappa => "kappa",
            SweepParameter::DeltaC => "delta_c",
            SweepParameter::Epsilon => "epsilon",
        }
    }

    fn apply(&self, cfg: &SystemConfig, v: f64) -> SystemConfig {
        match self {
            SweepParameter::Kappa => cfg.with_kappa(v),
            SweepParameter::DeltaC => cfg.with_delta_c(v),
            SweepParameter::Epsilon => cfg.with_epsilon(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn validate(&self) -> Result<()> {
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::invalid("sweep", "bounds must be finite"));
        }
        if self.steps < 2 {
            return Err(Error::invalid("sweep.steps", "must be at least 2"));
        }
        Ok(())
    }

    /// Evenly spaced points including both ends.
    pub fn points(&self) -> Vec<f64> {
        let n = self.steps - 1;
        (0..self.steps)
            .map(|k| {
                if k == n {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * k as f64 / n as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::invalid(
                "format",
                format!("unknown format `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Missing: standard output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// Overrides `system.fock_cutoff`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock_cutoff: Option<usize>,
    /// Fixed RK4 step in ps; automatic when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_ps: Option<f64>,
    /// Overrides the frame each gate plan asks for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Frame>,
    /// Repeat every simulation at fock_cutoff + 4 and flag changes above 1e-4.
    #[serde(default)]
    pub check_cutoff: bool,
}

/// One gate to calibrate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSpec {
    pub kind: GateKind,
    pub sites: Vec<usize>,
    /// Resonator detuning for this gate, MHz; defaults to `system.delta_c`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_c: Option<f64>,
    /// Conditional-phase detuning of the Cirac–Zoller gate, MHz.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_nc: Option<f64>,
}

impl GateSpec {
    pub fn single(kind: GateKind, site: usize) -> Self {
        GateSpec {
            kind,
            sites: vec![site],
            delta_c: None,
            delta_nc: None,
        }
    }

    pub fn pair(kind: GateKind, m: usize, n: usize) -> Self {
        GateSpec {
            kind,
            sites: vec![m, n],
            delta_c: None,
            delta_nc: None,
        }
    }

    fn two_qubit(&self) -> bool {
        matches!(self.kind, GateKind::Swap | GateKind::CiracZoller)
    }

    fn validate(&self, n_tls: usize) -> Result<()> {
        let want = if self.two_qubit() { 2 } else { 1 };
        if self.sites.len() != want {
            return Err(Error::invalid(
                "gates.sites",
                format!("{} gate needs {want} site(s)", self.kind.name()),
            ));
        }
        if let Some(&s) = self.sites.iter().find(|&&s| s >= n_tls) {
            return Err(Error::SiteOutOfRange { site: s, n_tls });
        }
        if want == 2 && self.sites[0] == self.sites[1] {
            return Err(Error::invalid("gates.sites", "sites must differ"));
        }
        if self.kind == GateKind::CiracZoller && self.delta_nc.is_none() {
            return Err(Error::invalid(
                "gates.delta_nc",
                "required for the cirac-zoller gate",
            ));
        }
        Ok(())
    }

    fn label(&self) -> String {
        let sites: Vec<String> = self.sites.iter().map(|s| s.to_string()).collect();
        let mut s = format!("gate={};sites={}", self.kind.name(), sites.join("-"));
        if let Some(d) = self.delta_c {
            write!(s, ";delta_c={d}").unwrap();
        }
        if let Some(d) = self.delta_nc {
            write!(s, ";delta_nc={d}").unwrap();
        }
        s
    }

    pub fn calibrate(&self, cfg: &SystemConfig) -> Result<GatePlan> {
        let cfg = match self.delta_c {
            Some(d) => cfg.with_delta_c(d),
            None => cfg.clone(),
        };
        let s = &self.sites;
        match self.kind {
            GateKind::X => calibrate_x(&cfg, s[0]),
            GateKind::Hadamard => calibrate_hadamard(&cfg, s[0]),
            GateKind::Swap => calibrate_two_qubit(&cfg, (s[0], s[1])),
            GateKind::CiracZoller => {
                cirac_zoller_plan(&cfg, (s[0], s[1]), self.delta_nc.unwrap_or(0.0))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<CircuitParams>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gates: Vec<GateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub numerics: Numerics,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ExperimentSpec =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    /// The sweep that will run: the explicit one or the experiment default.
    pub fn effective_sweep(&self) -> Option<Sweep> {
        self.sweep.or_else(|| self.name.default_sweep())
    }

    /// System config with numerical overrides applied.
    pub fn effective_system(&self) -> Result<SystemConfig> {
        let cfg = self.system.as_ref().ok_or_else(|| {
            Error::invalid("system", format!("required by `{}`", self.name.as_str()))
        })?;
        Ok(match self.numerics.fock_cutoff {
            Some(n) => cfg.with_fock_cutoff(n),
            None => cfg.clone(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        if let Some(n) = self.numerics.fock_cutoff {
            if n < 2 {
                return Err(Error::invalid("numerics.fock_cutoff", "must be at least 2"));
            }
        }
        if let Some(step) = self.numerics.step_ps {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::invalid("numerics.step_ps", "must be positive"));
            }
        }
        if let Some(c) = &self.circuit {
            c.validate()?;
        }
        match &self.system {
            Some(cfg) => {
                cfg.validate()?;
                self.effective_system()?.validate()?;
                for g in &self.gates {
                    g.validate(cfg.n_tls())?;
                }
            }
            None if self.name != ExperimentName::Custom || self.circuit.is_none() => {
                return Err(Error::invalid(
                    "system",
                    format!("required by `{}`", self.name.as_str()),
                ));
            }
            None => {}
        }
        let kinds = |ok: &dyn Fn(GateKind) -> bool, what: &str| -> Result<()> {
            if self.gates.is_empty() {
                return Err(Error::invalid(
                    "gates",
                    format!("`{}` needs at least one {what} gate", self.name.as_str()),
                ));
            }
            match self.gates.iter().find(|g| !ok(g.kind)) {
                Some(g) => Err(Error::invalid(
                    "gates.kind",
                    format!("`{}` does not accept {}", self.name.as_str(), g.kind.name()),
                )),
                None => Ok(()),
            }
        };
        let single = |k: GateKind| matches!(k, GateKind::X | GateKind::Hadamard);
        match self.name {
            ExperimentName::Table1 | ExperimentName::Fig2Gatetimes => {
                kinds(&single, "single-qubit")?
            }
            ExperimentName::Fig2Beta | ExperimentName::SwapPoint => {
                kinds(&|k| k == GateKind::Swap, "swap")?
            }
            ExperimentName::CzPlan => kinds(&|k| k == GateKind::CiracZoller, "cirac-zoller")?,
            ExperimentName::Fig3Sweep => kinds(&|_| true, "")?,
            ExperimentName::Fig2Energies => {
                if self.gates.iter().any(|g| g.kind != GateKind::Swap) {
                    return Err(Error::invalid(
                        "gates.kind",
                        "`fig2-energies` only accepts swap gates",
                    ));
                }
            }
            ExperimentName::Custom => {}
        }
        Ok(())
    }
}

/// Ready-to-run specs reproducing the reference operating points.
pub fn preset(name: ExperimentName) -> ExperimentSpec {
    let single = SystemConfig::new(
        vec![Tls {
            delta: 40.0,
            g: 40.0,
        }],
        120.0,
        0.0,
    );
    let pair = SystemConfig::new(
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
        0.0,
    );
    let hadamard_pair = SystemConfig::new(
        vec![
            Tls {
                delta: 40.0,
                g: 40.0,
            },
            Tls {
                delta: -80.0,
                g: 30.0,
            },
        ],
        160.0,
        0.0,
    );
    let (system, gates) = match name {
        ExperimentName::Table1 => (
            single.with_kappa(4.0),
            vec![
                GateSpec {
                    delta_c: Some(120.0),
                    ..GateSpec::single(GateKind::X, 0)
                },
                GateSpec {
                    delta_c: Some(160.0),
                    ..GateSpec::single(GateKind::Hadamard, 0)
                },
            ],
        ),
        ExperimentName::Fig2Gatetimes => (
            single,
            vec![
                GateSpec::single(GateKind::Hadamard, 0),
                GateSpec::single(GateKind::X, 0),
            ],
        ),
        ExperimentName::Fig2Beta | ExperimentName::Fig2Energies | ExperimentName::SwapPoint => (
            pair.with_kappa(4.0),
            vec![GateSpec::pair(GateKind::Swap, 0, 1)],
        ),
        ExperimentName::Fig3Sweep => (hadamard_pair, vec![GateSpec::single(GateKind::Hadamard, 0)]),
        ExperimentName::CzPlan => (
            pair.with_kappa(4.0),
            vec![GateSpec {
                delta_nc: Some(120.0),
                ..GateSpec::pair(GateKind::CiracZoller, 0, 1)
            }],
        ),
        ExperimentName::Custom => (pair, vec![GateSpec::pair(GateKind::Swap, 0, 1)]),
    };
    ExperimentSpec {
        name,
        system: Some(system),
        circuit: None,
        gates,
        sweep: None,
        output: OutputSpec::default(),
        numerics: Numerics::default(),
    }
}

/// The SWAP variant of the fidelity-versus-κ sweep.
pub fn preset_fig3_swap() -> ExperimentSpec {
    let mut spec = preset(ExperimentName::Fig3Sweep);
    spec.system = preset(ExperimentName::SwapPoint)
        .system
        .map(|c| c.with_kappa(0.0));
    spec.gates = vec![GateSpec::pair(GateKind::Swap, 0, 1)];
    spec
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub param: String,
    pub quantity: String,
    pub value: f64,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub param: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationInfo {
    pub param: String,
    pub frame: Frame,
    pub fock_cutoff: usize,
    /// Per segment, ns.
    pub steps_ns: Vec<f64>,
    pub max_trace_deviation: f64,
    pub min_eigenvalue: f64,
    /// |F(N_F + 4) − F(N_F)| when checked.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff_delta: Option<f64>,
    pub cutoff_limited: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub experiment: String,
    pub fock_cutoff: Option<usize>,
    pub step_ps: Option<f64>,
    pub simulations: Vec<SimulationInfo>,
    /// Sweep points whose calibration failed; their rows carry NaN.
    pub failures: Vec<Failure>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<Row>,
    pub provenance: Provenance,
}

#[derive(Default)]
struct PointOut {
    rows: Vec<Row>,
    sims: Vec<SimulationInfo>,
    flags: Vec<String>,
}

impl PointOut {
    fn push(&mut self, param: &str, quantity: impl Into<String>, value: f64, unit: &str) {
        self.rows.push(Row {
            param: param.to_string(),
            quantity: quantity.into(),
            value,
            unit: unit.to_string(),
        });
    }

    fn plan_flags(&mut self, param: &str, plan: &GatePlan) {
        for f in &plan.flags {
            self.flags.push(format!("{param}: {f}"));
        }
    }
}

fn join(a: &str, b: &str) -> String {
    match (a.is_empty(), b.is_empty()) {
        (true, _) => b.to_string(),
        (_, true) => a.to_string(),
        _ => format!("{a};{b}"),
    }
}

fn calibration_rows(
    out: &mut PointOut,
    param: &str,
    plan: &GatePlan,
    cfg: &SystemConfig,
) -> Result<()> {
    out.push(param, "epsilon", plan.epsilon(), "MHz");
    out.push(param, "tau_g", plan.duration(), "ns");
    let est = decoherence_estimate(plan, cfg)?;
    out.push(param, "tau_d_inverse", est.tau_d_inverse, "1/us");
    out.push(param, "decoherence_ratio", est.ratio, "1");
    out.push(param, "fidelity_estimate", est.fidelity_estimate, "1");
    out.plan_flags(param, plan);
    Ok(())
}

fn simulate(
    out: &mut PointOut,
    param: &str,
    plan: &GatePlan,
    cfg: &SystemConfig,
    numerics: &Numerics,
) -> Result<()> {
    let opts = ChannelOptions {
        frame: numerics.frame,
        step: numerics.step_ps.map(|p| p * 1e-3),
    };
    let run: ChannelRun = simulate_gate_channel(plan, cfg, &opts)?;
    let report = plan_fidelity(plan, &run.channel)?;
    out.push(param, "raw_fidelity", report.raw_fidelity, "1");
    out.push(
        param,
        "compensated_fidelity",
        report.compensated_fidelity,
        "1",
    );
    for (axis, angle) in report.axes.iter().zip(&report.compensation) {
        out.push(
            param,
            format!("compensation_site{}", axis.site),
            *angle,
            "rad",
        );
    }
    let cutoff_delta = if numerics.check_cutoff {
        let bigger = cfg.with_fock_cutoff(cfg.fock_cutoff + 4);
        let run2 = simulate_gate_channel(plan, &bigger, &opts)?;
        let f2 = plan_fidelity(plan, &run2.channel)?;
        let delta = (f2.compensated_fidelity - report.compensated_fidelity)
            .abs()
            .max((f2.raw_fidelity - report.raw_fidelity).abs());
        out.push(param, "cutoff_delta", delta, "1");
        Some(delta)
    } else {
        None
    };
    let limited = cutoff_delta.is_some_and(|d| d > CUTOFF_TOLERANCE);
    if limited {
        out.flags.push(format!("{param}: cutoff-limited"));
    }
    out.sims.push(SimulationInfo {
        param: param.to_string(),
        frame: run.frame,
        fock_cutoff: run.fock_cutoff,
        steps_ns: run.steps,
        max_trace_deviation: run.max_trace_deviation,
        min_eigenvalue: run.min_eigenvalue,
        cutoff_delta,
        cutoff_limited: limited,
    });
    Ok(())
}

fn point(
    spec: &ExperimentSpec,
    cfg: &SystemConfig,
    gate: Option<&GateSpec>,
    param: &str,
) -> Result<PointOut> {
    let mut out = PointOut::default();
    let Some(gate) = gate else {
        // fig2-energies: dressed energies of every TLS at this drive.
        for n in 0..cfg.n_tls() {
            out.push(
                param,
                format!("energy_site{n}"),
                dressed_energy(cfg, n)?.energy,
                "MHz",
            );
        }
        return Ok(out);
    };
    let param = join(param, &gate.label());
    let param = param.as_str();
    let plan = gate.calibrate(cfg)?;
    let gate_cfg = match gate.delta_c {
        Some(d) => cfg.with_delta_c(d),
        None => cfg.clone(),
    };
    match spec.name {
        ExperimentName::Table1 | ExperimentName::Fig2Gatetimes => {
            let at = gate_cfg.with_epsilon(plan.epsilon());
            out.push(
                param,
                "omega_x",
                rabi_frequency(&at, gate.sites[0])?.abs(),
                "MHz",
            );
            calibration_rows(&mut out, param, &plan, &gate_cfg)?;
        }
        ExperimentName::Fig2Beta | ExperimentName::SwapPoint => {
            let c = plan.coefficients.ok_or(Error::UnreachableGate {
                reason: "plan carries no exchange coefficients".into(),
            })?;
            out.push(param, "energy_1", c.e1, "MHz");
            out.push(param, "energy_2", c.e2, "MHz");
            out.push(param, "lambda", c.lambda, "MHz");
            out.push(param, "beta_1", c.beta_1, "MHz");
            out.push(param, "beta_2", c.beta_2, "MHz");
            out.push(param, "beta_2_correction", c.correction, "MHz");
            out.push(param, "beta_2_prime", c.beta_2_prime, "MHz");
            calibration_rows(&mut out, param, &plan, &gate_cfg)?;
            if spec.name == ExperimentName::SwapPoint {
                let at = gate_cfg.with_epsilon(plan.epsilon());
                for &s in &plan.participants {
                    out.push(
                        param,
                        format!("dephasing_rate_site{s}"),
                        residual_dephasing_rate(&at, s)? * 1e6,
                        "Hz",
                    );
                }
            }
        }
        ExperimentName::Fig2Energies => unreachable!("energies are handled without a gate"),
        ExperimentName::CzPlan => {
            let est = decoherence_estimate(&plan, &gate_cfg)?;
            for (k, (seg, d)) in plan.segments.iter().zip(&est.segments).enumerate() {
                let p = format!("{param};segment={k}");
                out.push(&p, "delta_c", seg.delta_c, "MHz");
                out.push(&p, "epsilon", seg.epsilon, "MHz");
                out.push(&p, "duration", seg.duration, "ns");
                out.push(&p, "decay_rate", d.rate, "1/us");
                out.push(&p, "decoherence_ratio", d.ratio, "1");
            }
            let n = plan.participants[1];
            let phase_seg = plan.segments[1];
            let phi = conditional_phase(
                gate_cfg.tls[n].g,
                gate.delta_nc.unwrap_or(0.0),
                phase_seg.duration,
            );
            out.push(param, "conditional_phase", phi, "rad");
            calibration_rows(&mut out, param, &plan, &gate_cfg)?;
        }
        ExperimentName::Fig3Sweep | ExperimentName::Custom => {
            calibration_rows(&mut out, param, &plan, &gate_cfg)?;
            simulate(&mut out, param, &plan, &gate_cfg, &spec.numerics)?;
        }
    }
    Ok(out)
}

fn circuit_rows(p: &CircuitParams) -> Result<PointOut> {
    let sol = solve_circuit(p)?;
    let mut out = PointOut::default();
    let param = "circuit";
    out.push(param, "phi_s", sol.phi_s, "Wb");
    out.push(param, "omega_c", rad_per_s_to_mhz(sol.omega_c), "MHz");
    for (n, g) in sol.couplings.iter().enumerate() {
        out.push(param, format!("g_site{n}"), rad_per_s_to_mhz(*g), "MHz");
    }
    out.push(
        param,
        "drive_epsilon",
        rad_per_s_to_mhz(sol.drive.epsilon),
        "MHz",
    );
    out.push(
        param,
        "drive_phase_excursion",
        sol.drive.phase_excursion,
        "rad",
    );
    out.push(
        param,
        "drive_bound_ok",
        if sol.drive.bound_ok { 1.0 } else { 0.0 },
        "1",
    );
    out.push(
        param,
        "max_epsilon",
        rad_per_s_to_mhz(sol.max_epsilon),
        "MHz",
    );
    Ok(out)
}

/// Runs every (sweep point, gate) pair concurrently and assembles rows in
/// sweep-major, gate-minor order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let mut provenance = Provenance {
        version: VERSION.to_string(),
        experiment: spec.name.as_str().to_string(),
        fock_cutoff: None,
        step_ps: spec.numerics.step_ps,
        simulations: Vec::new(),
        failures: Vec::new(),
        flags: Vec::new(),
    };
    let mut rows = Vec::new();
    if let Some(c) = &spec.circuit {
        rows.extend(circuit_rows(c)?.rows);
    }
    if spec.system.is_none() {
        return Ok(ExperimentResult { rows, provenance });
    }
    let base = spec.effective_system()?;
    provenance.fock_cutoff = Some(base.fock_cutoff);
    let sweep = spec.effective_sweep();
    if let Some(s) = &sweep {
        s.validate()?;
    }
    let points: Vec<(String, SystemConfig)> = match &sweep {
        Some(s) => s
            .points()
            .into_iter()
            .map(|v| {
                (
                    format!("{}={v}", s.parameter.key()),
                    s.parameter.apply(&base, v),
                )
            })
            .collect(),
        None => vec![(String::new(), base.clone())],
    };
    let gates: Vec<Option<&GateSpec>> = if spec.name == ExperimentName::Fig2Energies {
        vec![None]
    } else {
        spec.gates.iter().map(Some).collect()
    };
    let jobs: Vec<(&str, &SystemConfig, Option<&GateSpec>)> = points
        .iter()
        .flat_map(|(p, c)| gates.iter().map(move |g| (p.as_str(), c, *g)))
        .collect();
    let results: Vec<Result<PointOut>> = jobs
        .par_iter()
        .map(|(p, c, g)| point(spec, c, *g, p))
        .collect();
    let swept = sweep.is_some();
    let mut first_err = None;
    let mut ok_count = 0;
    for ((p, _, g), res) in jobs.iter().zip(results) {
        match res {
            Ok(out) => {
                ok_count += 1;
                rows.extend(out.rows);
                provenance.simulations.extend(out.sims);
                provenance.flags.extend(out.flags);
            }
            Err(e) if swept && e.kind() == ErrorKind::Calibration => {
                let param = join(p, &g.map(|g| g.label()).unwrap_or_default());
                log::warn!("{param}: {e}");
                rows.push(Row {
                    param: param.clone(),
                    quantity: "failed".into(),
                    value: f64::NAN,
                    unit: "1".into(),
                });
                provenance.failures.push(Failure {
                    param,
                    error: e.to_string(),
                });
                first_err.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    if ok_count == 0 {
        if let Some(e) = first_err {
            return Err(e);
        }
    }
    if spec.name == ExperimentName::Fig2Energies {
        for g in &spec.gates {
            let cfg = match g.delta_c {
                Some(d) => base.with_delta_c(d),
                None => base.clone(),
            };
            let search = find_energy_crossings(&cfg, (g.sites[0], g.sites[1]))?;
            for (k, eps) in search.roots.iter().enumerate() {
                rows.push(Row {
                    param: join(&g.label(), &format!("root={k}")),
                    quantity: "epsilon_star".into(),
                    value: *eps,
                    unit: "MHz".into(),
                });
            }
        }
    }
    Ok(ExperimentResult { rows, provenance })
}

fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn render_csv(rows: &[Row]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(["param", "quantity", "value", "unit"])
        .map_err(io)?;
    for r in rows {
        w.write_record([
            r.param.as_str(),
            r.quantity.as_str(),
            &fmt_value(r.value),
            r.unit.as_str(),
        ])
        .map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Config(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
}

#[derive(Serialize)]
struct JsonRow<'a> {
    param: &'a str,
    quantity: &'a str,
    /// Full-precision decimal string; "NaN" for failed points.
    value: String,
    unit: &'a str,
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    spec: &'a ExperimentSpec,
    provenance: &'a Provenance,
    rows: Vec<JsonRow<'a>>,
}

pub fn render_json(spec: &ExperimentSpec, result: &ExperimentResult) -> Result<String> {
    let doc = JsonDoc {
        spec,
        provenance: &result.provenance,
        rows: result
            .rows
            .iter()
            .map(|r| JsonRow {
                param: &r.param,
                quantity: &r.quantity,
                value: fmt_value(r.value),
                unit: &r.unit,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct ProvenanceDoc<'a> {
    spec: &'a ExperimentSpec,
    provenance: &'a Provenance,
}

pub fn render_provenance(spec: &ExperimentSpec, result: &ExperimentResult) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&ProvenanceDoc {
        spec,
        provenance: &result.provenance,
    })
    .map_err(|e| Error::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Sidecar file holding the provenance of a CSV table.
pub fn provenance_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".provenance.json");
    PathBuf::from(name)
}

/// Writes the result where `spec.output` says. Returns the files written;
/// empty when the table went to standard output, in which case the
/// provenance goes to standard error.
pub fn write_result(spec: &ExperimentSpec, result: &ExperimentResult) -> Result<Vec<PathBuf>> {
    let body = match spec.output.format {
        OutputFormat::Csv => render_csv(&result.rows)?,
        OutputFormat::Json => render_json(spec, result)?,
    };
    match &spec.output.path {
        Some(p) => {
            std::fs::write(p, body)?;
            let mut written = vec![p.clone()];
            if spec.output.format == OutputFormat::Csv {
                let side = provenance_path(p);
                std::fs::write(&side, render_provenance(spec, result)?)?;
                written.push(side);
            }
            Ok(written)
        }
        None => {
            use std::io::Write;
            std::io::stdout().write_all(body.as_bytes())?;
            if spec.output.format == OutputFormat::Csv {
                std::io::stderr().write_all(render_provenance(spec, result)?.as_bytes())?;
            }
            Ok(Vec::new())
        }
    }
}
