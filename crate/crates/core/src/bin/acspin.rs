use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use anticoherent::dd::Strategy;
use anticoherent::experiments::grid::SequenceFiles;
use anticoherent::experiments::{
    control_error_grid, generate, multipole_trace, noise_grid, powerlaw, ControlErrorConfig,
    ControlErrorType, GenerateConfig, GridProtocol, NoiseGridConfig, NoiseRegime, PowerLawConfig,
    ProtocolFile, Table,
};
use anticoherent::Result;

#[derive(Parser)]
#[command(
    name = "acspin",
    version,
    about = "Anticoherent spin-state generation and protection experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find or evaluate protocol parameters and write a parameter file.
    Generate(GenerateArgs),
    /// Refine the order-2 squeezing over a range of j and fit power laws.
    Powerlaw(PowerLawArgs),
    /// Multipole power after every pulse of a parameter file.
    MultipoleTrace(TraceArgs),
    /// Distance and infidelity over a (δ/χ, Δ/χ) grid.
    NoiseGrid(NoiseGridArgs),
    /// Distance over (‖H_err‖/χ, ε) with flip-angle errors.
    ControlErrorGrid(ControlErrorArgs),
}

#[derive(Args)]
struct Common {
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Read the full configuration from a JSON file; other flags are ignored.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the effective configuration as JSON and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    j: f64,
    #[arg(long)]
    t: u32,
    /// Number of cycles n_C.
    #[arg(long)]
    nc: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Closed-form parameters instead of the optimizer.
    #[arg(long)]
    analytic: bool,
    /// Among converged solutions keep the one with least total squeezing.
    #[arg(long)]
    min_squeezing: bool,
    #[arg(long, default_value_t = 32)]
    max_starts: usize,
    #[arg(long, default_value_t = 1e-10)]
    target: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PowerLawArgs {
    #[arg(long, default_value_t = 20)]
    j_min: u32,
    #[arg(long, default_value_t = 200)]
    j_max: u32,
    #[arg(long, default_value_t = 11)]
    points: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TraceArgs {
    /// Parameter file written by `generate`.
    #[arg(long)]
    params: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolKind {
    /// Least-squeezing optimized protocol.
    Optimized,
    /// Closed-form protocol.
    Analytic,
    /// Cat state from +z.
    Ghz,
}

#[derive(Args)]
struct GridArgs {
    /// Number of spin-1/2 particles.
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, value_enum)]
    protocol: ProtocolKind,
    /// Anticoherence order of the protocol.
    #[arg(long, default_value_t = 2)]
    t: u32,
    /// Cycles of the optimized protocol; t by default.
    #[arg(long)]
    nc: Option<usize>,
    /// Seed of the protocol optimizer.
    #[arg(long, default_value_t = 1)]
    protocol_seed: u64,
    #[arg(long, default_value_t = 20)]
    instances: usize,
    #[arg(long, value_delimiter = ',', default_values_t = ["nodd".to_string(), "dcg_per_pulse".to_string(), "dcg_per_cycle".to_string()])]
    strategies: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Noise without the rotating-wave approximation.
    #[arg(long)]
    no_rwa: bool,
    /// Sequence file protecting rotations and cycles.
    #[arg(long)]
    full_sequence: Option<PathBuf>,
    /// Sequence file protecting squeezing pulses.
    #[arg(long)]
    rwa_sequence: Option<PathBuf>,
}

impl GridArgs {
    fn protocol(&self) -> GridProtocol {
        match self.protocol {
            ProtocolKind::Analytic => GridProtocol::Anticoherent { t: self.t },
            ProtocolKind::Ghz => GridProtocol::Ghz,
            ProtocolKind::Optimized => GridProtocol::Optimized {
                t: self.t,
                n_c: self.nc.unwrap_or(self.t as usize),
                seed: self.protocol_seed,
            },
        }
    }

    fn strategies(&self) -> Result<Vec<Strategy>> {
        self.strategies.iter().map(|s| s.parse()).collect()
    }

    fn sequences(&self) -> SequenceFiles {
        SequenceFiles {
            full: self.full_sequence.clone(),
            rwa: self.rwa_sequence.clone(),
        }
    }
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected lo:hi")?;
    Ok((
        a.trim().parse().map_err(|e| format!("{e}"))?,
        b.trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

#[derive(Args)]
struct NoiseGridArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// log10 range of δ/χ as lo:hi.
    #[arg(long, value_parser = parse_range, default_value = "-3:-1", allow_hyphen_values = true)]
    delta_exp: (f64, f64),
    /// log10 range of Δ/χ as lo:hi.
    #[arg(long, value_parser = parse_range, default_value = "-3:-1", allow_hyphen_values = true)]
    dipolar_exp: (f64, f64),
    /// Points per axis.
    #[arg(long, default_value_t = 8)]
    points: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ControlErrorArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_parser = parse_error_type)]
    error_type: ControlErrorType,
    #[arg(long, value_parser = parse_regime, default_value = "disorder")]
    regime: NoiseRegime,
    /// Subdominant-to-dominant noise norm ratio.
    #[arg(long, default_value_t = 0.1)]
    ratio: f64,
    /// log10 range of the dominant noise norm over χ, as lo:hi.
    #[arg(long, value_parser = parse_range, default_value = "-4:-2", allow_hyphen_values = true)]
    h_exp: (f64, f64),
    #[arg(long, default_value_t = 8)]
    h_points: usize,
    /// log10 range of ε as lo:hi; ε = 0 is always included.
    #[arg(long, value_parser = parse_range, default_value = "-8:-0.5", allow_hyphen_values = true)]
    eps_exp: (f64, f64),
    #[arg(long, default_value_t = 16)]
    eps_points: usize,
    #[command(flatten)]
    common: Common,
}

fn parse_error_type(s: &str) -> std::result::Result<ControlErrorType, String> {
    s.parse().map_err(|e: anticoherent::Error| e.to_string())
}

fn parse_regime(s: &str) -> std::result::Result<NoiseRegime, String> {
    s.parse().map_err(|e: anticoherent::Error| e.to_string())
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_table(t: &Table, out: Option<&Path>) -> Result<()> {
    emit(&t.to_csv_string()?, out)
}

/// Config from `--config` if given, else from flags. `None` when only printing it.
fn resolve<T: Serialize + DeserializeOwned>(
    common: &Common,
    from_flags: impl FnOnce() -> Result<T>,
) -> Result<Option<T>> {
    let cfg = match &common.config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => from_flags()?,
    };
    if common.print_config {
        println!("{}", serde_json::to_string_pretty(&cfg)?);
        return Ok(None);
    }
    Ok(Some(cfg))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate(a) => {
            let Some(cfg) = resolve(&a.common, || {
                Ok(GenerateConfig {
                    j: a.j,
                    t: a.t,
                    n_c: a.nc,
                    seed: a.seed,
                    analytic: a.analytic,
                    min_squeezing: a.min_squeezing,
                    max_starts: a.max_starts,
                    target: a.target,
                })
            })?
            else {
                return Ok(ExitCode::SUCCESS);
            };
            let f: ProtocolFile = generate(&cfg)?;
            emit(
                &(serde_json::to_string_pretty(&f)? + "\n"),
                a.common.out.as_deref(),
            )?;
            eprintln!(
                "j = {}, t = {}, n_C = {}: 1 - A_t = {:e} ({})",
                f.j,
                f.t,
                f.n_c,
                f.deviation,
                if f.converged {
                    "converged"
                } else {
                    "NOT converged"
                }
            );
            Ok(if f.converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Powerlaw(a) => {
            let Some(cfg) = resolve(&a.common, || {
                PowerLawConfig::range(a.j_min, a.j_max, a.points)
            })?
            else {
                return Ok(ExitCode::SUCCESS);
            };
            let r = powerlaw(&cfg)?;
            emit_table(&r.table, a.common.out.as_deref())?;
            for (name, f) in [("eta2", r.eta2_fit), ("eta3", r.eta3_fit)] {
                if let Some(f) = f {
                    eprintln!(
                        "{name}: slope {:.4}, prefactor 10^{:.4}",
                        f.slope, f.intercept
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::MultipoleTrace(a) => {
            let params = ProtocolFile::load(&a.params)?;
            emit_table(&multipole_trace(&params)?, a.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::NoiseGrid(a) => {
            let Some(cfg) = resolve(&a.common, || {
                Ok(NoiseGridConfig {
                    n: a.grid.n,
                    protocol: a.grid.protocol(),
                    delta_exp: a.delta_exp,
                    dipolar_exp: a.dipolar_exp,
                    points: a.points,
                    instances: a.grid.instances,
                    strategies: a.grid.strategies()?,
                    seed: a.grid.seed,
                    rwa: !a.grid.no_rwa,
                    sequences: a.grid.sequences(),
                })
            })?
            else {
                return Ok(ExitCode::SUCCESS);
            };
            let g = noise_grid(&cfg)?;
            emit_table(&g.table, a.common.out.as_deref())?;
            for c in &g.disorder_crossovers {
                eprintln!(
                    "disorder edge: {} beats NoDD below δ/χ = 10^{:.2}",
                    c.strategy,
                    c.at.log10()
                );
            }
            for c in &g.dipolar_crossovers {
                eprintln!(
                    "dipolar edge: {} beats NoDD below Δ/χ = 10^{:.2}",
                    c.strategy,
                    c.at.log10()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ControlErrorGrid(a) => {
            let Some(cfg) = resolve(&a.common, || {
                Ok(ControlErrorConfig {
                    n: a.grid.n,
                    protocol: a.grid.protocol(),
                    error_type: a.error_type,
                    regime: a.regime,
                    ratio: a.ratio,
                    h_exp: a.h_exp,
                    h_points: a.h_points,
                    eps_exp: a.eps_exp,
                    eps_points: a.eps_points,
                    instances: a.grid.instances,
                    strategies: a.grid.strategies()?,
                    seed: a.grid.seed,
                    rwa: !a.grid.no_rwa,
                    sequences: a.grid.sequences(),
                })
            })?
            else {
                return Ok(ExitCode::SUCCESS);
            };
            let g = control_error_grid(&cfg)?;
            emit_table(&g.table, a.common.out.as_deref())?;
            if let Some(f) = g.boundary_fit {
                eprintln!(
                    "advantage boundary: ε* ≈ 10^{:.2} h^{:.3}",
                    f.intercept, f.slope
                );
            }
            if let Some(f) = g.limit_fit {
                eprintln!(
                    "control-error limit: ε ≈ 10^{:.2} h^{:.3}",
                    f.intercept, f.slope
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
