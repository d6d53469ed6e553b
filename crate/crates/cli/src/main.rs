use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use qnc::characteristic::char_surface;
use qnc::entanglement::{entanglement_e, entanglement_es, OptimizerConfig};
use qnc::io::{
    charfunc_csv, entanglement_json, entropy_json, number, parse_state, state_json, steering_csv,
    strength_json, to_json_string, verdict_json,
};
use qnc::linalg::trace_norm;
use qnc::states::{bell_mixture, classical_correlated, pure_two_qubit};
use qnc::steering::{
    main_normal_constancy, polytope_state, steering_samples, steering_surface, DEFAULT_NORMAL_TOL,
};
use qnc::strength::{strength, strength_default, strength_directed};
use qnc::tomography::{oracle_from_state, reconstruct_bipartite, reconstruct_state};
use qnc::{DensityMatrix, Direction, IntegratorConfig, QncError};

/// Characteristic function, strength and entanglement of bipartite states.
#[derive(Parser, Debug)]
#[command(name = "qnc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Strength G of a state (JSON).
    Strength {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum, default_value_t = DirectionArg::Sym)]
        direction: DirectionArg,
        /// Gauss-Legendre nodes per axis.
        #[arg(long, conflicts_with = "mc")]
        grid: Option<usize>,
        /// Monte Carlo sample count.
        #[arg(long)]
        mc: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Characteristic function on a closed grid (CSV).
    Charfunc {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Steering surface (CSV). A measured side larger than a qubit is
    /// sampled instead, grid^2 points.
    Steering {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Main-normal verdict for two-qubit states (JSON).
    Separability {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = DEFAULT_NORMAL_TOL)]
        tol: f64,
    },
    /// Entanglement E, or the entropy variant (JSON).
    Entanglement {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long)]
        m_max: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Variant::G)]
        variant: Variant,
    },
    /// Rebuilds a state from its simulated measurement statistics and
    /// reports the trace-norm error (state file JSON).
    Reconstruct {
        #[arg(long)]
        state: PathBuf,
        /// Use the conditional (operator-valued) statistics of side A.
        #[arg(long)]
        bipartite: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes a canonical state file.
    Example {
        #[command(subcommand)]
        which: ExampleCmd,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum ExampleCmd {
    /// cos(alpha)|00> + sin(alpha) e^{i gamma}|11>.
    Pure {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        gamma: f64,
    },
    /// (|00><00| + |11><11|) / 2.
    Classical,
    /// Equal mixture of the two Phi Bell states.
    Bellmix,
    /// m-vertex steering polytope state on m x 2.
    Polytope {
        #[arg(long)]
        m: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DirectionArg {
    Ab,
    Ba,
    Sym,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Variant {
    G,
    Entropy,
}

enum Failure {
    Input(String),
    Numerical(String),
    Output(String),
}

impl From<QncError> for Failure {
    fn from(e: QncError) -> Self {
        if e.is_invalid_input() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn load(path: &Path) -> Result<DensityMatrix, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_state(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::Output(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn integrator(grid: Option<usize>, mc: Option<usize>, seed: u64) -> Option<IntegratorConfig> {
    match (grid, mc) {
        (Some(k), _) => Some(IntegratorConfig::quadrature(k)),
        (None, Some(n)) => Some(IntegratorConfig::monte_carlo(n, seed)),
        (None, None) => None,
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Strength {
            state,
            direction,
            grid,
            mc,
            seed,
        } => {
            let rho = load(&state)?;
            let (n_a, n_b) = rho.require_split()?;
            let cfg = integrator(grid, mc, seed);
            let result = match (direction, cfg) {
                (DirectionArg::Ab, Some(c)) => strength_directed(&rho, Direction::AtoB, &c)?,
                (DirectionArg::Ba, Some(c)) => strength_directed(&rho, Direction::BtoA, &c)?,
                (DirectionArg::Sym, Some(c)) => strength(&rho, &c)?,
                (DirectionArg::Ab, None) => strength_directed(
                    &rho,
                    Direction::AtoB,
                    &IntegratorConfig::default_for(n_a, seed),
                )?,
                (DirectionArg::Ba, None) => strength_directed(
                    &rho,
                    Direction::BtoA,
                    &IntegratorConfig::default_for(n_b, seed),
                )?,
                (DirectionArg::Sym, None) => strength_default(&rho, seed)?,
            };
            emit(None, &to_json_string(&strength_json(&result)))
        }
        Command::Charfunc { state, grid, out } => {
            let rho = load(&state)?;
            let (n_a, _) = rho.require_split()?;
            let samples = char_surface(&rho, &vec![grid; 2 * (n_a - 1)])?;
            emit(Some(&out), &charfunc_csv(&samples))
        }
        Command::Steering {
            state,
            grid,
            out,
            seed,
        } => {
            let rho = load(&state)?;
            let (n_a, _) = rho.require_split()?;
            let points = if n_a == 2 {
                steering_surface(&rho, grid)?.points
            } else {
                steering_samples(&rho, grid * grid, seed)?
            };
            emit(Some(&out), &steering_csv(&points))
        }
        Command::Separability { state, grid, tol } => {
            let rho = load(&state)?;
            if !(tol >= 0.0) {
                return Err(Failure::Input(format!("tolerance must be nonnegative, got {tol}")));
            }
            let verdict = main_normal_constancy(&steering_surface(&rho, grid)?, tol);
            emit(None, &to_json_string(&verdict_json(&verdict)))
        }
        Command::Entanglement {
            state,
            restarts,
            m_max,
            seed,
            variant,
        } => {
            let rho = load(&state)?;
            let cfg = OptimizerConfig {
                restarts,
                m_max,
                seed,
                ..OptimizerConfig::default()
            };
            let report = match variant {
                Variant::G => entanglement_json(&entanglement_e(&rho, &cfg)?),
                Variant::Entropy => entropy_json(&entanglement_es(&rho, &cfg)?),
            };
            emit(None, &to_json_string(&report))
        }
        Command::Reconstruct {
            state,
            bipartite,
            out,
        } => {
            let rho = load(&state)?;
            let (n_a, n_b) = rho.require_split()?;
            let oracle = oracle_from_state(&rho);
            let rebuilt = if bipartite {
                reconstruct_bipartite(&oracle, n_a, n_b)?
            } else {
                reconstruct_state(&oracle, n_a * n_b)?.with_split(n_a, n_b)?
            };
            let error = trace_norm(&(rebuilt.matrix() - rho.matrix()))?;
            let mut doc = state_json(&rebuilt)?;
            if let Value::Object(map) = &mut doc {
                map.insert("trace_norm_error".into(), number(error));
            }
            emit(out.as_deref(), &to_json_string(&doc))
        }
        Command::Example { which, out } => {
            let rho = match which {
                ExampleCmd::Pure { alpha, gamma } => {
                    if !alpha.is_finite() || !gamma.is_finite() {
                        return Err(Failure::Input("angles must be finite".into()));
                    }
                    pure_two_qubit(alpha, gamma)
                }
                ExampleCmd::Classical => classical_correlated(),
                ExampleCmd::Bellmix => bell_mixture(),
                ExampleCmd::Polytope { m } => polytope_state(m)?,
            };
            emit(out.as_deref(), &to_json_string(&state_json(&rho)?))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical contract violated: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Output(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
