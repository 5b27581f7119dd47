//! Run configuration and domain-file loading.
//!
//! A `RunConfig` is the fully resolved description of one invocation: the
//! same struct is produced by flag parsing, written by `--emit-config`, and
//! read back by the `run-config` command, so a run is reproducible from the
//! config file alone. Serialization must round-trip exactly and unknown
//! keys are rejected.

use std::path::{Path, PathBuf};

use biharm::domain::RectilinearDomain;
use biharm::fem::mesh::Bc;
use biharm::verify::ReplayMode;
use biharm::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Spectrum,
    Inequality,
    Construct,
    Converge,
    Kernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BcChoice {
    Dirichlet,
    Neumann,
}

impl From<BcChoice> for Bc {
    fn from(c: BcChoice) -> Bc {
        match c {
            BcChoice::Dirichlet => Bc::Dirichlet,
            BcChoice::Neumann => Bc::Neumann,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReplayChoice {
    None,
    Endpoints,
    Full,
}

impl From<ReplayChoice> for ReplayMode {
    fn from(c: ReplayChoice) -> ReplayMode {
        match c {
            ReplayChoice::None => ReplayMode::None,
            ReplayChoice::Endpoints => ReplayMode::Endpoints,
            ReplayChoice::Full => ReplayMode::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FamilyChoice {
    Borsuk,
    Symmetric,
}

/// One resolved invocation. `k_max` doubles as the eigenvalue count for
/// `spectrum`, the reference index for `construct`, and the tracked index
/// for `converge`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    pub domain_file: PathBuf,
    pub refinement: u32,
    pub k_max: usize,
    /// Inequality selector: thm1 | thm2 | provenzano.
    pub theorem: Option<String>,
    /// Structured (JSON) report destination.
    pub report_path: Option<PathBuf>,
    /// Plot-data (CSV) destination.
    pub csv_path: Option<PathBuf>,
    pub margin_tol: f64,
    pub solver_tol: f64,
    pub seed_dir: [f64; 3],
    pub replay: ReplayChoice,
    pub bc: BcChoice,
    pub ladder: Vec<u32>,
    pub family: FamilyChoice,
    /// Explicit reference eigenvalue for `construct`; when absent the
    /// k_max-th clamped eigenvalue is computed first.
    pub lambda: Option<f64>,
}

impl RunConfig {
    /// Baseline with library defaults; command resolvers override fields.
    pub fn base(command: CommandKind, domain_file: PathBuf) -> Self {
        Self {
            command,
            domain_file,
            refinement: 8,
            k_max: 1,
            theorem: None,
            report_path: None,
            csv_path: None,
            margin_tol: 1e-9,
            solver_tol: 1e-10,
            seed_dir: [1.0, 0.0, 0.0],
            replay: ReplayChoice::Endpoints,
            bc: BcChoice::Dirichlet,
            ladder: vec![4, 8, 16],
            family: FamilyChoice::Borsuk,
            lambda: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| {
            Err(Error::Input(msg))
        };
        if self.refinement == 0 {
            return fail("refinement must be >= 1".into());
        }
        if self.k_max == 0 {
            return fail("count/index must be >= 1".into());
        }
        if !(self.margin_tol > 0.0) || !self.margin_tol.is_finite() {
            return fail(format!("margin tolerance must be positive, got {}", self.margin_tol));
        }
        if !(self.solver_tol > 0.0) || !self.solver_tol.is_finite() {
            return fail(format!("solver tolerance must be positive, got {}", self.solver_tol));
        }
        if !self.seed_dir.iter().all(|c| c.is_finite())
            || self.seed_dir.iter().all(|c| *c == 0.0)
        {
            return fail("seed direction must be finite and nonzero".into());
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0) || !l.is_finite() {
                return fail(format!("lambda must be positive, got {l}"));
            }
        }
        match self.command {
            CommandKind::Inequality => {
                let id = self.theorem.as_deref().unwrap_or("");
                if biharm::verify::theorem::lookup_theorem(id).is_none() {
                    let known: Vec<&str> = biharm::verify::theorem::registry()
                        .iter()
                        .map(|t| t.id())
                        .collect();
                    return fail(format!(
                        "unknown theorem '{id}'; expected one of {}",
                        known.join(", ")
                    ));
                }
            }
            CommandKind::Converge => {
                if self.ladder.iter().any(|r| *r == 0) {
                    return fail("ladder refinements must be >= 1".into());
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn emit(&self) -> String {
        // pretty JSON; to_string cannot fail for this struct
        serde_json::to_string_pretty(self).expect("config serialization")
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: format!("run config: {e}"),
        })
    }
}

/// On-disk domain description. Deliberately a mirror of the library
/// constructor arguments so every validation rule (connectedness, overlap,
/// dimension) runs on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub dim: usize,
    pub cell_size: f64,
    pub origin: [f64; 3],
    pub cells: Vec<[i64; 3]>,
}

pub fn load_domain(path: &Path) -> Result<RectilinearDomain> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read domain file {}: {e}", path.display())))?;
    let spec: DomainSpec = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: format!("domain file {}: {e}", path.display()),
    })?;
    RectilinearDomain::new(spec.dim, spec.cell_size, spec.origin, spec.cells)
}

pub fn parse_seed_dir(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 && parts.len() != 3 {
        return Err(format!("expected 2 or 3 comma-separated numbers, got '{s}'"));
    }
    let mut out = [0.0f64; 3];
    for (slot, p) in out.iter_mut().zip(&parts) {
        *slot = p
            .trim()
            .parse::<f64>()
            .map_err(|e| format!("bad component '{p}': {e}"))?;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Ladder(pub Vec<u32>);

pub fn parse_ladder(s: &str) -> std::result::Result<Ladder, String> {
    let mut out = Vec::new();
    for p in s.split(',') {
        out.push(
            p.trim()
                .parse::<u32>()
                .map_err(|e| format!("bad refinement '{p}': {e}"))?,
        );
    }
    if out.is_empty() {
        return Err("ladder must not be empty".into());
    }
    Ok(Ladder(out))
}

/// Worker count from the environment; >= 2 enables concurrent independent
/// solves. Unset means 1 (fully sequential). Results are identical either
/// way; the knob only trades wall time.
pub const THREADS_ENV: &str = "BIHARM_THREADS";

pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(1),
        Err(e) => Err(Error::Input(format!("{THREADS_ENV}: {e}"))),
        Ok(v) => v.trim().parse::<usize>().ok().filter(|n| *n >= 1).ok_or_else(|| {
            Error::Input(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))
        }),
    }
}
