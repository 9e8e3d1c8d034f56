use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use docksim::dynamics::Mode;
use docksim::linear::DdeCoefficients;
use docksim::stability::BoundaryAxis;
use docksim_cli::commands::{self, SimulateArgs, StabilityArgs, StabilityInput};
use docksim_cli::CliError;

/// Hybrid docking contact simulator: delayed contact dynamics, delay
/// stability analysis and passivity checks. All quantities are SI
/// (kg, m, s, N, rad) unless a flag says otherwise.
#[derive(Parser)]
#[command(name = "docksim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trajectory CSV, events JSON and a metadata sidecar.
    Simulate(SimulateCmd),
    /// Critical delays and verdict for the penetration equation.
    Stability(StabilityCmd),
    /// Critical delay swept along one coefficient of the penetration equation.
    Boundary(BoundaryCmd),
    /// Linearised planar matrices of a scenario as JSON.
    Linearize(LinearizeCmd),
    /// Per-channel observed energy from measured and commanded port records.
    Energy(EnergyCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(name = "2d")]
    Planar,
    #[value(name = "3d")]
    Spatial,
}

#[derive(Args)]
struct SimulateCmd {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Planar (4 states) or full rigid-body (12 states) model.
    #[arg(long, value_enum, default_value = "2d")]
    mode: ModeArg,
    /// Output prefix; writes <prefix>.traj.csv, <prefix>.events.json, <prefix>.meta.json.
    #[arg(long, default_value = "docksim")]
    out: PathBuf,
    /// Override the virtual damping b_v [N s/m].
    #[arg(long = "b-v")]
    b_v: Option<f64>,
    /// Override the loop delay h [s].
    #[arg(long)]
    delay: Option<f64>,
}

#[derive(Args)]
struct StabilityCmd {
    /// Effective mass mu [kg].
    #[arg(long, required_unless_present = "from_scenario", conflicts_with = "from_scenario")]
    mu: Option<f64>,
    /// Damping beta [N s/m]. With --from-scenario it overrides b_v.
    #[arg(long)]
    beta: Option<f64>,
    /// Stiffness kappa [N/m].
    #[arg(long, required_unless_present = "from_scenario", conflicts_with = "from_scenario")]
    kappa: Option<f64>,
    /// Take mu, beta, kappa and h from a scenario file and use the four-state verdict.
    #[arg(long)]
    from_scenario: Option<PathBuf>,
    /// Delay h [s] to classify.
    #[arg(long)]
    h: Option<f64>,
    /// Number of critical delays h_0..h_{n-1} to list.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Relative neutrality band around h_c.
    #[arg(long)]
    band: Option<f64>,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Beta,
    Kappa,
    Mu,
}

#[derive(Args)]
struct BoundaryCmd {
    /// Coefficient to sweep.
    #[arg(long, value_enum)]
    axis: AxisArg,
    /// Mass mu [kg] (ignored when sweeping mu).
    #[arg(long, default_value_t = 60.0)]
    mu: f64,
    /// Damping beta [N s/m] (ignored when sweeping beta).
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Stiffness kappa [N/m] (ignored when sweeping kappa).
    #[arg(long, default_value_t = 1000.0)]
    kappa: f64,
    /// Sweep values: start:stop:count or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    /// CSV output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the sweep.
    #[arg(long, env = "DOCKSIM_THREADS")]
    threads: Option<usize>,
}

#[derive(Args)]
struct LinearizeCmd {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Override the virtual damping b_v [N s/m].
    #[arg(long = "b-v")]
    b_v: Option<f64>,
    /// JSON output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnergyCmd {
    /// Measured port CSV (columns f_x..f_z, tau_x..tau_z, v_x..v_z, omega_x..omega_z, optional t).
    #[arg(long)]
    measured: PathBuf,
    /// Commanded port CSV with the same columns.
    #[arg(long)]
    commanded: PathBuf,
    /// Observer sample time [s].
    #[arg(long, default_value_t = docksim::analysis::DEFAULT_SAMPLE_TIME)]
    dt: f64,
    /// Energy magnitude [J] treated as lossless.
    #[arg(long, default_value_t = docksim::analysis::DEFAULT_ENERGY_TOLERANCE)]
    tolerance: f64,
    /// CSV output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(c) => {
            let events = commands::simulate(&SimulateArgs {
                scenario: c.scenario,
                mode: match c.mode {
                    ModeArg::Planar => Mode::Planar,
                    ModeArg::Spatial => Mode::Spatial,
                },
                out: c.out,
                damping: c.b_v,
                delay: c.delay,
            })?;
            for e in &events {
                match e.epsilon {
                    Some(eps) => println!("contact {:.4}-{:.4} s: epsilon = {eps:.6}", e.event.t_in, e.event.t_out),
                    None => println!("contact {:.4}-{:.4} s: epsilon undefined", e.event.t_in, e.event.t_out),
                }
            }
            if events.is_empty() {
                println!("no contact events");
            }
            Ok(())
        }
        Command::Stability(c) => {
            let input = match (c.from_scenario, c.mu, c.kappa) {
                (Some(path), _, _) => StabilityInput::Scenario { path, beta: c.beta },
                (None, Some(mu), Some(kappa)) => StabilityInput::Direct {
                    mu,
                    beta: c.beta.unwrap_or(0.0),
                    kappa,
                },
                _ => return Err(CliError::Input("give --mu and --kappa, or --from-scenario".into())),
            };
            let report = commands::stability(&StabilityArgs {
                input,
                delay: c.h,
                count: c.n,
                band: c.band,
            })?;
            if c.json {
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                print!("{}", report.to_text());
            }
            Ok(())
        }
        Command::Boundary(c) => {
            if let Some(n) = c.threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| CliError::Input(e.to_string()))?;
            }
            let axis = match c.axis {
                AxisArg::Beta => BoundaryAxis::Damping,
                AxisArg::Kappa => BoundaryAxis::Stiffness,
                AxisArg::Mu => BoundaryAxis::Mass,
            };
            let grid = commands::parse_grid(&c.grid)?;
            let (csv, failures) = commands::boundary(axis, DdeCoefficients::new(c.mu, c.beta, c.kappa), &grid);
            for f in failures {
                eprintln!("docksim: {f}");
            }
            emit(c.out.as_ref(), &csv)
        }
        Command::Linearize(c) => emit(c.out.as_ref(), &commands::linearize(&c.scenario, c.b_v)?),
        Command::Energy(c) => emit(
            c.out.as_ref(),
            &commands::energy(&c.measured, &c.commanded, c.dt, c.tolerance)?,
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("docksim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
