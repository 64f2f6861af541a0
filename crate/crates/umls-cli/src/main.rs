use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;

use umls_cli::experiments::{run_experiment, write_result, ExperimentConfig, Figure};
use umls_core::analysis::{
    eta_max, hessian_eigen_range, optimal_step, rate_report, StationaryAnalysis,
};
use umls_core::instances::{generate_synthetic, initial_point_near};
use umls_core::io::{
    fmt_float, rate_report_to_csv_row, rate_report_to_kv, read_instance, read_meta, trace_to_csv,
    write_instance_with_meta, RATE_REPORT_CSV_HEADER,
};
use umls_core::problem::{RealProblem, UnitModulusPoint};
use umls_core::projection::project;
use umls_core::solvers::{
    arnapgd_run, backtracking_pgd_run, pgd_run, SolverConfig, Termination,
};

const USAGE_EXIT: u8 = 1;
const NUMERICAL_EXIT: u8 = 2;

#[derive(Parser)]
#[command(
    name = "umls",
    version,
    about = "Unit-modulus least squares: projected gradient solvers, rate analysis, experiments"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic instance with a planted stationary point.
    Gen {
        #[arg(long, default_value_t = 50)]
        m: usize,
        #[arg(long, default_value_t = 40)]
        n: usize,
        #[arg(long, default_value_t = umls_cli::DEFAULT_SEED)]
        seed: u64,
        /// Noise level of the planting vector v.
        #[arg(long, default_value_t = 0.1)]
        sigma_v: f64,
        /// Instance file path; a `.meta` sidecar is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one solver on an instance file and write the trace CSV.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = SolverKind::Pgd)]
        solver: SolverKind,
        /// Fixed step size (required for pgd).
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value_t = 0.8)]
        alpha: f64,
        #[arg(long, default_value_t = 0.8)]
        beta: f64,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        #[arg(long, default_value_t = 0.0)]
        stop_tol: f64,
        /// Noise level for the start near the sidecar point (when present).
        #[arg(long, default_value_t = 1e-3)]
        x0_sigma: f64,
        #[arg(long, default_value_t = 1)]
        x0_seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rate report, optimal step, and step ceiling at a stationary point.
    Analyze {
        instance: PathBuf,
        #[arg(long)]
        eta: f64,
        /// File with the 2N point coordinates; defaults to the sidecar.
        #[arg(long)]
        point: Option<PathBuf>,
        /// Also sweep this many steps over (0, eta] and print one
        /// rate-report CSV row per step.
        #[arg(long)]
        sweep: Option<usize>,
    },
    /// Run an experiment preset (fig1, fig2a, fig2b, fig3, fig4, fig5).
    Fig {
        name: String,
        #[arg(long, default_value_t = umls_cli::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        /// Grid size of the rate sweep (fig2a).
        #[arg(long)]
        sweep: Option<usize>,
        /// Number of circle starts (fig5).
        #[arg(long)]
        angles: Option<usize>,
        #[arg(long, default_value = "umls-out")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverKind {
    Pgd,
    Bt,
    Arnapgd,
}

enum CliError {
    Usage(String),
    Numerical(String),
}

impl From<umls_core::Error> for CliError {
    fn from(e: umls_core::Error) -> Self {
        use umls_core::Error::*;
        match e {
            IterationLimit(_) | NotStationary { .. } | ConditionFailed(_)
            | SingularScaling { .. } | RetriesExhausted { .. } | RootCount { .. }
            | DegenerateStationaryPoint { .. } | OutsideRegion { .. }
            | StepOutOfRange { .. } | NotOnManifold { .. } => {
                CliError::Numerical(e.to_string())
            }
            Dimension(_) | InvalidConfig(_) | InvalidInput(_) | Parse(_) | Io(_) => {
                CliError::Usage(e.to_string())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => USAGE_EXIT,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE_EXIT)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(NUMERICAL_EXIT)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Gen {
            m,
            n,
            seed,
            sigma_v,
            out,
        } => {
            let inst = generate_synthetic(m, n, seed, sigma_v, 100)?;
            write_instance_with_meta(&inst, &out)?;
            println!(
                "wrote {} ({}x{} pairs, seed {}, retries {})",
                out.display(),
                m,
                n,
                seed,
                inst.retries_used
            );
            Ok(())
        }
        Cmd::Solve {
            instance,
            solver,
            eta,
            alpha,
            beta,
            iters,
            stop_tol,
            x0_sigma,
            x0_seed,
            out,
        } => {
            let problem = read_instance(&instance)?;
            let meta = read_meta(&instance).ok();
            let reference = match &meta {
                Some(m) => Some(m.x_star_point()?),
                None => None,
            };
            let x0 = match &reference {
                Some(x_star) => initial_point_near(x_star, x0_sigma, x0_seed),
                None => default_start(&problem),
            };

            let mut cfg = match solver {
                SolverKind::Pgd => {
                    let eta = eta.ok_or_else(|| {
                        CliError::Usage("pgd needs --eta <step size>".into())
                    })?;
                    SolverConfig::fixed_step(eta, iters)
                }
                SolverKind::Bt | SolverKind::Arnapgd => {
                    SolverConfig::backtracking(alpha, beta, iters)
                }
            }
            .with_stop_tol(stop_tol);
            if let Some(r) = reference {
                cfg = cfg.with_reference(r);
            }

            let trace = match solver {
                SolverKind::Pgd => pgd_run(&problem, &x0, &cfg)?,
                SolverKind::Bt => backtracking_pgd_run(&problem, &x0, &cfg)?,
                SolverKind::Arnapgd => arnapgd_run(&problem, &x0, &cfg)?,
            };
            std::fs::write(&out, trace_to_csv(&trace)).map_err(umls_core::Error::from)?;

            let last = trace.records.last().expect("trace is nonempty");
            println!(
                "wrote {} ({} records, f_final={}, gg_norm={})",
                out.display(),
                trace.len(),
                fmt_float(last.f),
                fmt_float(last.gen_grad_norm)
            );
            match trace.termination {
                Termination::NumericalFailure => Err(CliError::Numerical(
                    "solver terminated on a numerical failure (trace written)".into(),
                )),
                _ => Ok(()),
            }
        }
        Cmd::Analyze {
            instance,
            eta,
            point,
            sweep,
        } => {
            let problem = read_instance(&instance)?;
            let x = match point {
                Some(path) => read_point(&path, problem.dim())?,
                None => read_meta(&instance)
                    .map_err(|_| {
                        CliError::Usage(
                            "no --point given and no .meta sidecar next to the instance".into(),
                        )
                    })?
                    .x_star_point()?,
            };
            let report = rate_report(&problem, &x, eta)?;
            print!("{}", rate_report_to_kv(&report));
            let sa = StationaryAnalysis::at(&problem, &x);
            println!("stationarity_residual={}", fmt_float(sa.stationarity_residual));
            let (lambda_min_h, lambda_max_h) = hessian_eigen_range(&sa.h)?;
            println!("lambda_min_h={}", fmt_float(lambda_min_h));
            println!("lambda_max_h={}", fmt_float(lambda_max_h));
            let (eta_star, rho_star) = optimal_step(&sa.h, &sa.gamma)?;
            println!("eta_star={}", fmt_float(eta_star));
            println!("rho_star={}", fmt_float(rho_star));
            println!("eta_max={}", fmt_float(eta_max(&sa.h, &sa.gamma)?));
            if let Some(count) = sweep {
                if count < 2 {
                    return Err(CliError::Usage(
                        "--sweep needs at least 2 grid points".into(),
                    ));
                }
                println!("{RATE_REPORT_CSV_HEADER}");
                for j in 1..=count {
                    let e = eta * j as f64 / count as f64;
                    let row = rate_report(&problem, &x, e)?;
                    println!("{}", rate_report_to_csv_row(&row));
                }
            }
            Ok(())
        }
        Cmd::Fig {
            name,
            seed,
            m,
            n,
            iters,
            alpha,
            beta,
            eta,
            sweep,
            angles,
            out,
        } => {
            let figure = Figure::parse(&name).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown figure {name:?}; expected one of fig1, fig2a, fig2b, fig3, fig4, fig5"
                ))
            })?;
            let mut cfg = ExperimentConfig::preset(figure, seed);
            if let Some(v) = m {
                cfg.m = v;
            }
            if let Some(v) = n {
                cfg.n = v;
            }
            if let Some(v) = iters {
                cfg.max_iters = v;
            }
            if let Some(v) = alpha {
                cfg.alpha = v;
            }
            if let Some(v) = beta {
                cfg.beta = v;
            }
            if let Some(v) = eta {
                cfg.eta = Some(v);
            }
            if let Some(v) = sweep {
                cfg.sweep_count = v;
            }
            if let Some(v) = angles {
                cfg.angles = v;
            }
            let result = run_experiment(&cfg)?;
            let written = write_result(&result, figure, &out)?;
            for path in written {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

/// Start used when an instance has no sidecar point: every pair at the
/// tie-break vector [1, 0].
fn default_start(p: &RealProblem) -> UnitModulusPoint {
    let mut x = DVector::<f64>::zeros(p.dim());
    for i in 0..p.n() {
        x[2 * i] = 1.0;
    }
    project(&x)
}

fn read_point(path: &Path, dim: usize) -> Result<UnitModulusPoint, CliError> {
    let text = std::fs::read_to_string(path).map_err(umls_core::Error::from)?;
    let vals = text
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| umls_core::Error::Parse(format!("bad float {t:?} in point file")))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    if vals.len() != dim {
        return Err(CliError::Usage(format!(
            "point file has {} values, instance needs {dim}",
            vals.len()
        )));
    }
    Ok(UnitModulusPoint::new(DVector::from_vec(vals))?)
}
