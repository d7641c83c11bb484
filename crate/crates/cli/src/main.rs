//! Command-line front end: Fisher reports, likelihood profiles, annealing
//! runs, scaling sweeps, state engineering, and simulated measurement
//! sequences. Every run validates its parameters up front, writes its
//! resolved configuration next to its outputs as `config.json`, and is
//! deterministic given its full flag set including `--seed`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use mzsim::analysis::{
    engineer_gaussian, fit_power_law, sweep_error_propagation, sweep_fisher, write_sweep_csv,
    StateFamily,
};
use mzsim::annealer::{self, AnnealerConfig, ProposalScheme};
use mzsim::estimation::{
    default_grid_size, fisher_information, likelihood_profile, posterior_from_outcomes,
    sample_outcomes,
};
use mzsim::states::{AmplitudeField, Parity};

#[derive(Parser)]
#[command(name = "mzsim", version, about = "Two-mode Fock-basis Mach-Zehnder interferometer simulator")]
struct Cli {
    /// Cap the worker-thread count for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory (default: $MZSIM_OUT_DIR or the working directory).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fisher information and 1/sqrt(F) for a state family at a phase.
    Fisher(FisherArgs),
    /// Likelihood profile P_M(phi|theta) on the phase grid, written as CSV.
    Likelihood(LikelihoodArgs),
    /// Population simulated-annealing search for high-Fisher input states.
    Anneal(AnnealArgs),
    /// N-sweep of an uncertainty metric plus its power-law fit.
    Scale(ScaleArgs),
    /// Engineer the gaussian input state by twist-and-align dynamics.
    Engineer(EngineerArgs),
    /// Sample a measurement sequence and form the Bayesian posterior.
    Simulate(SimulateArgs),
    /// Re-execute a run from its resolved config.json.
    Rerun(RerunArgs),
}

#[derive(Args)]
struct FisherArgs {
    /// State family spec, e.g. twin_fock, gaussian:sigma=1.7, di_fock:q=1.
    #[arg(long)]
    state: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LikelihoodArgs {
    #[arg(long)]
    state: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Measurement count M; fractional values are allowed.
    #[arg(long)]
    m_count: f64,
    /// Grid size (default max(4096, 64 N)).
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProposalArg {
    Multiplicative,
    Hypersphere,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Real,
    Complex,
}

#[derive(Clone, Copy, ValueEnum)]
enum SymmetryArg {
    None,
    Symmetric,
    Antisymmetric,
}

#[derive(Args)]
struct AnnealArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 64)]
    population: usize,
    #[arg(long, value_enum, default_value_t = ProposalArg::Hypersphere)]
    proposal: ProposalArg,
    #[arg(long, value_enum, default_value_t = FieldArg::Real)]
    field: FieldArg,
    #[arg(long, value_enum, default_value_t = SymmetryArg::None)]
    symmetry: SymmetryArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5000)]
    max_iter: usize,
    /// Phase at which the Fisher objective is evaluated.
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Fisher,
    ErrorProp,
}

#[derive(Args)]
struct ScaleArgs {
    #[arg(long)]
    family: String,
    #[arg(long, value_enum, default_value_t = MetricArg::Fisher)]
    metric: MetricArg,
    /// Comma-separated particle numbers, e.g. 50,100,200,400.
    #[arg(long)]
    n_list: String,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
}

#[derive(Args)]
struct EngineerArgs {
    #[arg(long)]
    n: usize,
    /// Also sweep the error-propagation uncertainty over an N list.
    #[arg(long)]
    sweep: bool,
    /// N list for the sweep (default 50,100,200,400).
    #[arg(long)]
    n_list: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    state: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Number of sampled measurements (integer).
    #[arg(long)]
    m_count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args)]
struct RerunArgs {
    /// Path to a config.json written by a previous run.
    config: PathBuf,
}

/// Resolved run parameters, serialized next to the outputs.
#[derive(Serialize, Deserialize, Clone)]
#[serde(tag = "command", rename_all = "snake_case")]
enum RunConfig {
    Fisher { state: String, n: usize, theta: f64, out: Option<String> },
    Likelihood { state: String, n: usize, theta: f64, m_count: f64, grid: usize },
    Anneal {
        n: usize,
        population: usize,
        proposal: String,
        field: String,
        symmetry: String,
        seed: u64,
        max_iter: usize,
        theta: f64,
    },
    Scale { family: String, metric: String, n_list: Vec<usize>, theta: f64 },
    Engineer { n: usize, sweep: bool, n_list: Vec<usize> },
    Simulate { state: String, n: usize, theta: f64, m_count: usize, seed: u64, grid: usize },
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

fn usage<T>(err: impl Into<anyhow::Error>) -> Result<T, Failure> {
    Err(Failure::Usage(err.into()))
}

trait RuntimeCtx<T> {
    fn runtime(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> RuntimeCtx<T> for Result<T, E> {
    fn runtime(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // a second pool build (e.g. in tests) is harmless to ignore
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let out_dir = cli
        .out_dir
        .or_else(|| std::env::var_os("MZSIM_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    let result = match cli.command {
        Command::Rerun(args) => rerun(&args, &out_dir),
        other => match resolve(other) {
            Ok(config) => execute(&config, &out_dir),
            Err(failure) => Err(failure),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn parse_n_list(text: &str) -> Result<Vec<usize>, Failure> {
    let list: Result<Vec<usize>, _> =
        text.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse()).collect();
    match list {
        Ok(list) if !list.is_empty() => Ok(list),
        Ok(_) => usage(anyhow!("--n-list must name at least one particle number")),
        Err(e) => usage(anyhow!("bad --n-list: {e}")),
    }
}

/// Validate arguments into a resolved config without computing anything.
fn resolve(command: Command) -> Result<RunConfig, Failure> {
    match command {
        Command::Fisher(args) => {
            validate_family(&args.state, args.n)?;
            Ok(RunConfig::Fisher {
                state: args.state,
                n: args.n,
                theta: args.theta,
                out: args.out.map(|p| p.to_string_lossy().into_owned()),
            })
        }
        Command::Likelihood(args) => {
            validate_family(&args.state, args.n)?;
            if args.m_count < 0.0 {
                return usage(anyhow!("--m-count must be >= 0"));
            }
            let grid = args.grid.unwrap_or_else(|| default_grid_size(args.n));
            if grid < 2 {
                return usage(anyhow!("--grid must be >= 2"));
            }
            Ok(RunConfig::Likelihood {
                state: args.state,
                n: args.n,
                theta: args.theta,
                m_count: args.m_count,
                grid,
            })
        }
        Command::Anneal(args) => {
            let config = RunConfig::Anneal {
                n: args.n,
                population: args.population,
                proposal: match args.proposal {
                    ProposalArg::Multiplicative => "multiplicative".into(),
                    ProposalArg::Hypersphere => "hypersphere".into(),
                },
                field: match args.field {
                    FieldArg::Real => "real".into(),
                    FieldArg::Complex => "complex".into(),
                },
                symmetry: match args.symmetry {
                    SymmetryArg::None => "none".into(),
                    SymmetryArg::Symmetric => "symmetric".into(),
                    SymmetryArg::Antisymmetric => "antisymmetric".into(),
                },
                seed: args.seed,
                max_iter: args.max_iter,
                theta: args.theta,
            };
            annealer_config(&config)?.validate().map_err(|e| Failure::Usage(e.into()))?;
            Ok(config)
        }
        Command::Scale(args) => {
            let n_list = parse_n_list(&args.n_list)?;
            for &n in &n_list {
                validate_family(&args.family, n)?;
            }
            Ok(RunConfig::Scale {
                family: args.family,
                metric: match args.metric {
                    MetricArg::Fisher => "fisher".into(),
                    MetricArg::ErrorProp => "error-prop".into(),
                },
                n_list,
                theta: args.theta,
            })
        }
        Command::Engineer(args) => {
            if args.n == 0 || args.n % 2 != 0 {
                return usage(anyhow!("--n must be a positive even integer"));
            }
            let n_list = match args.n_list {
                Some(text) => parse_n_list(&text)?,
                None => vec![50, 100, 200, 400],
            };
            Ok(RunConfig::Engineer { n: args.n, sweep: args.sweep, n_list })
        }
        Command::Simulate(args) => {
            validate_family(&args.state, args.n)?;
            let grid = args.grid.unwrap_or_else(|| default_grid_size(args.n));
            if grid < 2 {
                return usage(anyhow!("--grid must be >= 2"));
            }
            Ok(RunConfig::Simulate {
                state: args.state,
                n: args.n,
                theta: args.theta,
                m_count: args.m_count,
                seed: args.seed,
                grid,
            })
        }
        Command::Rerun(_) => unreachable!("handled by caller"),
    }
}

fn validate_family(spec: &str, n: usize) -> Result<StateFamily, Failure> {
    let family = StateFamily::from_str(spec).map_err(|e| Failure::Usage(e.into()))?;
    family.construct(n).map_err(|e| Failure::Usage(e.into()))?;
    Ok(family)
}

fn annealer_config(config: &RunConfig) -> Result<AnnealerConfig, Failure> {
    let RunConfig::Anneal { n, population, proposal, field, symmetry, seed, max_iter, theta } =
        config
    else {
        return usage(anyhow!("not an anneal config"));
    };
    let mut out = AnnealerConfig::new(*n, *seed);
    out.population = *population;
    out.step_halving_threshold = (*population / 10).max(1);
    out.max_iterations = *max_iter;
    out.theta = *theta;
    out.proposal = match proposal.as_str() {
        "multiplicative" => ProposalScheme::Multiplicative,
        "hypersphere" => ProposalScheme::Hypersphere,
        other => return usage(anyhow!("unknown proposal '{other}'")),
    };
    out.field = match field.as_str() {
        "real" => AmplitudeField::Real,
        "complex" => AmplitudeField::Complex,
        other => return usage(anyhow!("unknown field '{other}'")),
    };
    out.symmetry = match symmetry.as_str() {
        "none" => None,
        "symmetric" => Some(Parity::Symmetric),
        "antisymmetric" => Some(Parity::Antisymmetric),
        other => return usage(anyhow!("unknown symmetry '{other}'")),
    };
    Ok(out)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .runtime()
}

fn write_config(config: &RunConfig, out_dir: &Path) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(config).runtime()?;
    write_file(&out_dir.join("config.json"), &(text + "\n"))
}

fn execute(config: &RunConfig, out_dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))
        .runtime()?;
    write_config(config, out_dir)?;
    match config {
        RunConfig::Fisher { state, n, theta, out } => {
            let family = validate_family(state, *n)?;
            let input = family.construct(*n).runtime()?;
            let report = fisher_information(&input, *theta);
            let text = report.to_json_text();
            println!("{text}");
            if let Some(out) = out {
                let path = PathBuf::from(out);
                let path =
                    if path.is_absolute() { path } else { out_dir.join(path) };
                write_file(&path, &(text.clone() + "\n"))?;
            }
            Ok(())
        }
        RunConfig::Likelihood { state, n, theta, m_count, grid } => {
            let family = validate_family(state, *n)?;
            let input = family.construct(*n).runtime()?;
            let profile = likelihood_profile(&input, *theta, *m_count, *grid).runtime()?;
            let mut buf = Vec::new();
            profile.write_csv(&mut buf).runtime()?;
            write_file(&out_dir.join("likelihood.csv"), &String::from_utf8(buf).runtime()?)?;
            println!(
                "likelihood profile: argmax {} variance {}",
                profile.argmax(),
                profile.variance()
            );
            Ok(())
        }
        RunConfig::Anneal { .. } => {
            let anneal_config = annealer_config(config)?;
            let outcome = annealer::run(anneal_config).runtime()?;
            let mut buf = Vec::new();
            outcome.trace.write_csv(&mut buf).runtime()?;
            write_file(&out_dir.join("anneal_trace.csv"), &String::from_utf8(buf).runtime()?)?;
            write_file(&out_dir.join("best_state.txt"), &outcome.best.vector.to_text())?;
            println!(
                "anneal: best energy {} after {} iterations",
                outcome.best.energy,
                outcome.trace.rows.len()
            );
            Ok(())
        }
        RunConfig::Scale { family, metric, n_list, theta } => {
            let family = validate_family(family, n_list[0])?;
            let (points, fit) = match metric.as_str() {
                "fisher" => {
                    let points = sweep_fisher(&family, n_list, *theta).runtime()?;
                    let fit = fit_power_law(&points).runtime()?;
                    (points, fit)
                }
                "error-prop" => sweep_error_propagation(&family, n_list).runtime()?,
                other => return usage(anyhow!("unknown metric '{other}'")),
            };
            let mut buf = Vec::new();
            write_sweep_csv(&points, &mut buf).runtime()?;
            write_file(&out_dir.join("sweep.csv"), &String::from_utf8(buf).runtime()?)?;
            write_file(&out_dir.join("fit.json"), &(fit.to_json_text() + "\n"))?;
            println!("{}", fit.to_json_text());
            Ok(())
        }
        RunConfig::Engineer { n, sweep, n_list } => {
            let state = engineer_gaussian(*n).runtime()?;
            write_file(&out_dir.join("engineered_state.txt"), &state.to_text())?;
            if *sweep {
                let (points, fit) =
                    sweep_error_propagation(&StateFamily::Engineered, n_list).runtime()?;
                let mut buf = Vec::new();
                write_sweep_csv(&points, &mut buf).runtime()?;
                write_file(&out_dir.join("engineer_sweep.csv"), &String::from_utf8(buf).runtime()?)?;
                write_file(&out_dir.join("engineer_fit.json"), &(fit.to_json_text() + "\n"))?;
                println!("{}", fit.to_json_text());
            } else {
                println!("engineered state written for N = {n}");
            }
            Ok(())
        }
        RunConfig::Simulate { state, n, theta, m_count, seed, grid } => {
            let family = validate_family(state, *n)?;
            let input = family.construct(*n).runtime()?;
            let record = sample_outcomes(&input, *theta, *m_count, *seed);
            let mut buf = Vec::new();
            record.write_histogram_csv(&mut buf).runtime()?;
            write_file(&out_dir.join("outcomes.csv"), &String::from_utf8(buf).runtime()?)?;
            let posterior = posterior_from_outcomes(&input, &record, None, *grid).runtime()?;
            let mut buf = Vec::new();
            posterior.write_csv(&mut buf).runtime()?;
            write_file(&out_dir.join("posterior.csv"), &String::from_utf8(buf).runtime()?)?;
            let estimate = posterior.argmax();
            let sigma = posterior.variance().sqrt();
            let summary = format!(
                "{{\"theta\": {theta}, \"estimate\": {estimate}, \"posterior_sigma\": {sigma}, \"m_count\": {m_count}}}"
            );
            write_file(&out_dir.join("estimate.json"), &(summary.clone() + "\n"))?;
            println!("{summary}");
            Ok(())
        }
    }
}

fn rerun(args: &RerunArgs, out_dir: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))
        .runtime()?;
    let config: RunConfig =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(anyhow!("bad config: {e}")))?;
    execute(&config, out_dir)
}
