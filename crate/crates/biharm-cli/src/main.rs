//! Command-line driver: clamped/free plate spectra, eigenvalue-inequality
//! verdicts, trial-family construction, refinement studies, and kernel
//! audits on rectilinear domains.
//!
//! Exit codes: 0 success (and all verdicts pass), 2 a verification verdict
//! failed, 3 the numerical method failed, 4 bad input. Reports go to stdout
//! and to `--report`/`--csv` files; diagnostics go to stderr. The domain
//! file is only ever read.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{classify, execute, EXIT_INPUT, EXIT_OK};
use config::{
    parse_ladder, parse_seed_dir, BcChoice, CommandKind, FamilyChoice, Ladder, ReplayChoice,
    RunConfig, THREADS_ENV,
};

#[derive(Parser)]
#[command(
    name = "biharm",
    version,
    about = "Biharmonic (plate) eigenvalue computations on rectilinear domains",
    after_help = format!(
        "Environment:\n  {THREADS_ENV}  worker threads (default 1; >= 2 runs independent \
         solves concurrently, results are identical)\n\nExit codes:\n  0 success / all \
         verdicts pass\n  2 a verification verdict failed\n  3 numerical method failure\n  \
         4 input error"
    )
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct CommonArgs {
    /// Domain file (JSON: dim, cell_size, origin, cells). Never modified.
    #[arg(long)]
    domain: PathBuf,
    /// Elements per cell edge.
    #[arg(long, default_value_t = 8)]
    refine: u32,
    /// Write the resolved run configuration (JSON) here and exit without
    /// running; `run-config` executes such a file.
    #[arg(long)]
    emit_config: Option<PathBuf>,
    /// Write a structured JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Eigensolver relative residual target.
    #[arg(long, default_value_t = 1e-10)]
    solver_tol: f64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lowest eigenvalues of one boundary condition on one mesh
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        /// Boundary condition: clamped (dirichlet) or free (neumann).
        #[arg(long, value_enum, default_value_t = BcChoice::Dirichlet)]
        bc: BcChoice,
        /// How many eigenvalues.
        #[arg(long, default_value_t = 6)]
        count: usize,
        /// Write index,eigenvalue,residual rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check mu_{k+shift} <= lambda_k for k = 1..kmax, with margins,
    /// kernel audit, and trial-subspace replays
    Inequality {
        #[command(flatten)]
        common: CommonArgs,
        /// Which inequality: thm1 | thm2 | provenzano.
        #[arg(long)]
        theorem: String,
        /// Largest clamped index checked.
        #[arg(long, default_value_t = 5)]
        kmax: usize,
        /// Accept margins down to -tol * |lambda_k| (fp slack, not a
        /// weakening of the inequality).
        #[arg(long, default_value_t = 1e-9)]
        margin_tol: f64,
        /// Seed direction for the sine construction, e.g. "1,0,0".
        #[arg(long, default_value = "1,0,0", value_parser = parse_seed_dir)]
        seed_dir: [f64; 3],
        /// Which k get the subspace replay.
        #[arg(long, value_enum, default_value_t = ReplayChoice::Endpoints)]
        replay: ReplayChoice,
        /// Write k,lambda_k,mu_k_plus_shift,margin,verdict rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Build a trial family at a reference eigenvalue and verify its
    /// orthogonality and analytic identities
    Construct {
        #[command(flatten)]
        common: CommonArgs,
        /// Family kind: borsuk (sine, any domain) or symmetric (needs the
        /// reflection frame).
        #[arg(long, value_enum, default_value_t = FamilyChoice::Borsuk)]
        family: FamilyChoice,
        /// Reference index: lambda = k-th clamped eigenvalue.
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Explicit reference eigenvalue (skips the clamped solve).
        #[arg(long)]
        lambda: Option<f64>,
        /// Seed direction for the sine construction.
        #[arg(long, default_value = "1,0,0", value_parser = parse_seed_dir)]
        seed_dir: [f64; 3],
    },
    /// Track one eigenvalue across a refinement ladder and fit the order
    Converge {
        #[command(flatten)]
        common: CommonArgs,
        /// Boundary condition.
        #[arg(long, value_enum, default_value_t = BcChoice::Dirichlet)]
        bc: BcChoice,
        /// 1-based eigenvalue index to track.
        #[arg(long, default_value_t = 1)]
        index: usize,
        /// Strictly increasing refinements, e.g. "8,16,32" (>= 3 levels).
        #[arg(long, default_value = "4,8,16", value_parser = parse_ladder)]
        ladder: Ladder,
        /// Write refinement,value rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Audit the free-plate kernel: d+1 near-zero eigenvalues of the raw
    /// pencil and stiffness annihilation of the rigid-mode interpolants
    Kernel {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Execute a run configuration written by --emit-config
    RunConfig {
        /// Path to the configuration JSON.
        config: PathBuf,
    },
}

/// Resolved config plus where to write it instead of running, if requested.
fn resolve(cmd: Cmd) -> Result<(RunConfig, Option<PathBuf>), biharm::Error> {
    let out = match cmd {
        Cmd::Spectrum {
            common,
            bc,
            count,
            csv,
        } => {
            let mut c = RunConfig::base(CommandKind::Spectrum, common.domain);
            c.refinement = common.refine;
            c.solver_tol = common.solver_tol;
            c.report_path = common.report;
            c.bc = bc;
            c.k_max = count;
            c.csv_path = csv;
            (c, common.emit_config)
        }
        Cmd::Inequality {
            common,
            theorem,
            kmax,
            margin_tol,
            seed_dir,
            replay,
            csv,
        } => {
            let mut c = RunConfig::base(CommandKind::Inequality, common.domain);
            c.refinement = common.refine;
            c.solver_tol = common.solver_tol;
            c.report_path = common.report;
            c.theorem = Some(theorem);
            c.k_max = kmax;
            c.margin_tol = margin_tol;
            c.seed_dir = seed_dir;
            c.replay = replay;
            c.csv_path = csv;
            (c, common.emit_config)
        }
        Cmd::Construct {
            common,
            family,
            k,
            lambda,
            seed_dir,
        } => {
            let mut c = RunConfig::base(CommandKind::Construct, common.domain);
            c.refinement = common.refine;
            c.solver_tol = common.solver_tol;
            c.report_path = common.report;
            c.family = family;
            c.k_max = k;
            c.lambda = lambda;
            c.seed_dir = seed_dir;
            (c, common.emit_config)
        }
        Cmd::Converge {
            common,
            bc,
            index,
            ladder,
            csv,
        } => {
            let mut c = RunConfig::base(CommandKind::Converge, common.domain);
            c.refinement = common.refine;
            c.solver_tol = common.solver_tol;
            c.report_path = common.report;
            c.bc = bc;
            c.k_max = index;
            c.ladder = ladder.0;
            c.csv_path = csv;
            (c, common.emit_config)
        }
        Cmd::Kernel { common } => {
            let mut c = RunConfig::base(CommandKind::Kernel, common.domain);
            c.refinement = common.refine;
            c.solver_tol = common.solver_tol;
            c.report_path = common.report;
            (c, common.emit_config)
        }
        Cmd::RunConfig { config } => {
            let text = std::fs::read_to_string(&config).map_err(|e| {
                biharm::Error::Input(format!("cannot read config {}: {e}", config.display()))
            })?;
            (RunConfig::parse(&text)?, None)
        }
    };
    Ok(out)
}

fn run() -> u8 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
            let _ = e.print();
            return code;
        }
    };
    let (cfg, emit_to) = match resolve(cli.cmd) {
        Ok(pair) => pair,
        Err(e) => {
            eprintln!("error: {e}");
            return classify(&e);
        }
    };
    if let Some(path) = emit_to {
        if let Err(e) = cfg.validate() {
            eprintln!("error: {e}");
            return classify(&e);
        }
        if let Err(e) = std::fs::write(&path, cfg.emit()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_INPUT;
        }
        return EXIT_OK;
    }
    match execute(&cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            classify(&e)
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run())
}
