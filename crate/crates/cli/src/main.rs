use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tlsgate::experiments::{
    preset, preset_fig3_swap, run_experiment, write_result, ExperimentName, ExperimentSpec,
    OutputFormat,
};
use tlsgate::hamiltonian::Frame;
use tlsgate::{Error, ErrorKind};

#[derive(Parser)]
#[command(
    name = "tlsgate",
    version,
    about = "Gate calibration and open-system simulation for resonator-coupled TLS qubits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// X and Hadamard operating points.
    Table1(Common),
    /// Single-qubit gate times versus resonator detuning.
    #[command(name = "fig2-gatetimes")]
    Fig2Gatetimes(Common),
    /// Exchange coefficients versus resonator detuning.
    #[command(name = "fig2-beta")]
    Fig2Beta(Common),
    /// Dressed energies versus drive amplitude.
    #[command(name = "fig2-energies")]
    Fig2Energies(Common),
    /// Two-qubit SWAP operating point and decoherence estimates.
    #[command(name = "swap-point")]
    SwapPoint(Common),
    /// Simulated gate fidelity versus resonator decay rate.
    #[command(name = "fig3-sweep")]
    Fig3Sweep {
        #[command(flatten)]
        common: Common,
        /// Preset gate when no config is given.
        #[arg(long, value_enum, default_value_t = Fig3Gate::Hadamard)]
        gate: Fig3Gate,
    },
    /// Cirac–Zoller schedule and per-segment decoherence.
    #[command(name = "cz-plan")]
    CzPlan(Common),
    /// Arbitrary gates and sweeps from a config file.
    Custom(Common),
    /// Print the built-in spec of an experiment as TOML.
    Preset { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Fig3Gate {
    Hadamard,
    Swap,
}

#[derive(Clone, Copy, ValueEnum)]
enum FrameArg {
    Transformed,
    Lab,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Experiment spec (TOML). Defaults to the built-in preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    fock_cutoff: Option<usize>,
    /// Fixed integration step in picoseconds.
    #[arg(long)]
    step_ps: Option<f64>,
    #[arg(long, value_enum)]
    frame: Option<FrameArg>,
}

impl Common {
    fn spec(
        &self,
        name: ExperimentName,
        fallback: impl FnOnce() -> ExperimentSpec,
    ) -> Result<ExperimentSpec, Error> {
        let mut spec = match &self.config {
            Some(path) => {
                let spec = ExperimentSpec::load(path)?;
                if spec.name != name {
                    return Err(Error::Config(format!(
                        "{} describes `{}`, not `{}`",
                        path.display(),
                        spec.name.as_str(),
                        name.as_str()
                    )));
                }
                spec
            }
            None if name == ExperimentName::Custom => {
                return Err(Error::Config("`custom` needs --config".into()));
            }
            None => fallback(),
        };
        if let Some(p) = &self.out {
            spec.output.path = Some(p.clone());
        }
        if let Some(f) = self.format {
            spec.output.format = match f {
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Json => OutputFormat::Json,
            };
        }
        if let Some(n) = self.fock_cutoff {
            spec.numerics.fock_cutoff = Some(n);
        }
        if let Some(s) = self.step_ps {
            spec.numerics.step_ps = Some(s);
        }
        if let Some(f) = self.frame {
            spec.numerics.frame = Some(match f {
                FrameArg::Transformed => Frame::Transformed,
                FrameArg::Lab => Frame::Lab,
            });
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let (name, common, fallback): (ExperimentName, Common, Box<dyn FnOnce() -> ExperimentSpec>) =
        match cli.command {
            Command::Preset { name } => {
                let name: ExperimentName = name.parse()?;
                print!("{}", preset(name).to_toml()?);
                return Ok(());
            }
            Command::Fig3Sweep { common, gate } => {
                let f: Box<dyn FnOnce() -> ExperimentSpec> = match gate {
                    Fig3Gate::Hadamard => Box::new(|| preset(ExperimentName::Fig3Sweep)),
                    Fig3Gate::Swap => Box::new(preset_fig3_swap),
                };
                (ExperimentName::Fig3Sweep, common, f)
            }
            Command::Table1(c) => (
                ExperimentName::Table1,
                c,
                Box::new(|| preset(ExperimentName::Table1)),
            ),
            Command::Fig2Gatetimes(c) => (
                ExperimentName::Fig2Gatetimes,
                c,
                Box::new(|| preset(ExperimentName::Fig2Gatetimes)),
            ),
            Command::Fig2Beta(c) => (
                ExperimentName::Fig2Beta,
                c,
                Box::new(|| preset(ExperimentName::Fig2Beta)),
            ),
            Command::Fig2Energies(c) => (
                ExperimentName::Fig2Energies,
                c,
                Box::new(|| preset(ExperimentName::Fig2Energies)),
            ),
            Command::SwapPoint(c) => (
                ExperimentName::SwapPoint,
                c,
                Box::new(|| preset(ExperimentName::SwapPoint)),
            ),
            Command::CzPlan(c) => (
                ExperimentName::CzPlan,
                c,
                Box::new(|| preset(ExperimentName::CzPlan)),
            ),
            Command::Custom(c) => (
                ExperimentName::Custom,
                c,
                Box::new(|| preset(ExperimentName::Custom)),
            ),
        };
    let spec = common.spec(name, fallback)?;
    let result = run_experiment(&spec)?;
    for f in &result.provenance.failures {
        log::warn!("{}: {}", f.param, f.error);
    }
    for path in write_result(&spec, &result)? {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Config | ErrorKind::Input => 2,
        ErrorKind::Calibration => 3,
        ErrorKind::Simulation => 4,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
