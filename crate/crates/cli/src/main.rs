use std::path::PathBuf;
use std::process::ExitCode;

use cayley_cli::commands::{self, IndexArgs, PlaneOptions};
use cayley_cli::config::{BackendArg, Suite, SuiteConfig, DEFAULT_SEED, DEFAULT_TOL};
use cayley_cli::suites::torus::{self, TorusOptions};
use cayley_cli::{exit, CliError, Report};
use cayley_core::torus::ChernNumbers;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "cayley", version, about = "Verify Cayley and complex deformation theory at desk scale")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Coefficient field for checks that can run exactly.
    #[arg(long, value_enum, default_value = "exact", global = true)]
    backend: BackendArg,
    /// Base tolerance for float residuals (must be positive).
    #[arg(long, default_value_t = DEFAULT_TOL, global = true)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_SEED, global = true)]
    seed: u64,
    /// Override the main sample count of the suite.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH", global = true)]
    json: Option<PathBuf>,
    /// Suppress the per-check summary on stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a named suite.
    Run {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Every suite; the acceptance gate.
    All,
    /// Cayley form, Λ² splitting, Calabi–Yau normalizations, bundle isomorphisms.
    VerifyStructure,
    /// Classify a plane file: 4×8 (Cayley mode) or 2p×2m (complex mode).
    ClassifyPlane {
        file: PathBuf,
        /// Phase of Ω in radians (complex mode).
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        phase: f64,
        /// Fail on non-orthonormal rows instead of orthonormalizing with a warning.
        #[arg(long)]
        strict: bool,
    },
    /// Canonical angles of a plane file, or the angle and detector suite without one.
    Angles {
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        phase: f64,
        #[arg(long)]
        strict: bool,
    },
    /// Check a λ file (4×4) or complex graph file, or run the graph suite without one.
    GraphVerify { file: Option<PathBuf> },
    /// Newton-solve the four τ equations from a 4×4 λ seed file.
    GraphSolve { file: PathBuf },
    /// Torus-model kernels, adjointness and the finite-difference test.
    Torus {
        /// Single Fourier truncation for the kernel and finite-difference checks.
        #[arg(long = "K", value_name = "K")]
        truncation: Option<usize>,
        /// Strictly decreasing comma-separated step sizes.
        #[arg(long, value_delimiter = ',')]
        t_ladder: Option<Vec<f64>>,
    },
    /// Index from topological data or Chern numbers; the index suite without flags.
    Index {
        #[arg(long, allow_hyphen_values = true, requires_all = ["euler", "self_int"])]
        sign: Option<i64>,
        #[arg(long, allow_hyphen_values = true, requires_all = ["sign", "self_int"])]
        euler: Option<i64>,
        #[arg(long, allow_hyphen_values = true, requires_all = ["sign", "euler"])]
        self_int: Option<i64>,
        #[arg(long, allow_hyphen_values = true, requires_all = ["c2", "c2nu"])]
        c1sq: Option<i64>,
        #[arg(long, allow_hyphen_values = true, requires_all = ["c1sq", "c2nu"])]
        c2: Option<i64>,
        #[arg(long, allow_hyphen_values = true, requires_all = ["c1sq", "c2"])]
        c2nu: Option<i64>,
    },
}

fn config(g: &GlobalArgs, suite: Suite) -> SuiteConfig {
    SuiteConfig {
        suite,
        backend: g.backend.into(),
        tol: g.tol,
        seed: g.seed,
        samples: g.samples,
        output: g.json.clone(),
    }
}

fn suite_report(cfg: SuiteConfig) -> cayley_cli::Result<Report> {
    cayley_cli::run_suite(&cfg)
}

fn execute(cli: &Cli) -> cayley_cli::Result<Report> {
    let g = &cli.global;
    match &cli.command {
        Command::Run { suite } => suite_report(config(g, *suite)),
        Command::All => suite_report(config(g, Suite::All)),
        Command::VerifyStructure => suite_report(config(g, Suite::Structure)),
        Command::ClassifyPlane { file, phase, strict } => {
            let cfg = config(g, Suite::Planes);
            cfg.validate()?;
            commands::classify_plane(&cfg, file, PlaneOptions { phase: *phase, reject_nonorthonormal: *strict })
        }
        Command::Angles { file: None, .. } => suite_report(config(g, Suite::Angles)),
        Command::Angles { file: Some(file), phase, strict } => {
            let cfg = config(g, Suite::Angles);
            cfg.validate()?;
            commands::classify_plane(&cfg, file, PlaneOptions { phase: *phase, reject_nonorthonormal: *strict })
        }
        Command::GraphVerify { file: None } => suite_report(config(g, Suite::Graphs)),
        Command::GraphVerify { file: Some(file) } => {
            let cfg = config(g, Suite::Graphs);
            cfg.validate()?;
            commands::graph_verify(&cfg, file)
        }
        Command::GraphSolve { file } => {
            let cfg = config(g, Suite::Graphs);
            cfg.validate()?;
            commands::graph_solve(&cfg, file)
        }
        Command::Torus { truncation, t_ladder } => {
            let cfg = config(g, Suite::Torus);
            cfg.validate()?;
            let mut opts = TorusOptions::default();
            if let Some(k) = truncation {
                opts.truncations = vec![*k];
                opts.fd_truncation = *k;
            }
            if let Some(ladder) = t_ladder {
                opts.ladder = ladder.clone();
            }
            let mut report = Report::new(cfg.clone());
            report.input("truncations", opts.truncations.clone());
            report.input("t_ladder", opts.ladder.clone());
            report.extend(torus::run(&cfg, &opts)?);
            Ok(report.finish())
        }
        Command::Index { sign, euler, self_int, c1sq, c2, c2nu } => {
            let topology = sign.zip(*euler).zip(*self_int).map(|((s, e), n)| (s, e, n));
            let chern = c1sq.zip(*c2).zip(*c2nu).map(|((c1_sq, c2), c2_nu)| ChernNumbers { c1_sq, c2, c2_nu });
            if topology.is_none() && chern.is_none() {
                return suite_report(config(g, Suite::Index));
            }
            let cfg = config(g, Suite::Index);
            cfg.validate()?;
            commands::index(&cfg, IndexArgs { topology, chern })
        }
    }
}

fn emit(report: &Report, g: &GlobalArgs) -> Result<(), CliError> {
    let json = report.to_json_string();
    match &g.json {
        Some(path) => {
            std::fs::write(path, &json).map_err(|source| CliError::Unwritable { path: path.clone(), source })?
        }
        None => print!("{json}"),
    }
    if !g.quiet {
        eprint!("{}", report.human());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(&cli).and_then(|r| emit(&r, &cli.global).map(|_| r.exit_code())) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    debug_assert!((exit::OK..=exit::COMPUTATION).contains(&code));
    ExitCode::from(code as u8)
}
