//! Command execution: wire a resolved `RunConfig` to the library, print the
//! human rendering on stdout, write report/CSV files, and return the exit
//! code. All diagnostics go to stderr in `main`; nothing here writes to the
//! domain file.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use biharm::domain::RectilinearDomain;
use biharm::eigen::{SolveOptions, SpectrumResult};
use biharm::fem::mesh::Bc;
use biharm::trial::{borsuk_family, check_identities, symmetric_family};
use biharm::verify::report::{
    render_convergence_csv, render_convergence_text, render_csv, render_kernel_text,
    render_spectrum_csv, render_spectrum_text, render_text,
};
use biharm::verify::theorem::lookup_theorem;
use biharm::verify::{
    check_inequality, compute_spectrum_with, convergence_study, kernel_check, InequalityOptions,
};
use biharm::{Error, Result};
use serde::Serialize;

use crate::config::{thread_count, CommandKind, FamilyChoice, RunConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERDICT: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;
pub const EXIT_INPUT: u8 = 4;

/// Outcome class per error kind: bad inputs are 4, numerical method
/// failures are 3, and a failed verification verdict is 2 (kernel audits
/// report failure through `KernelDefect`).
pub fn classify(err: &Error) -> u8 {
    match err {
        Error::BadDimension(_)
        | Error::OverlappingCells(_)
        | Error::DisconnectedDomain(_)
        | Error::Parse { .. }
        | Error::Input(_)
        | Error::RefinementOverflow { .. }
        | Error::BadMultiIndex(_)
        | Error::CountTooLarge { .. }
        | Error::ZeroVector
        | Error::BadLambda(_)
        | Error::SymmetryMissing { .. }
        | Error::MeshMismatch(_)
        | Error::NonMonotoneLadder
        | Error::Io(_) => EXIT_INPUT,
        Error::NonFiniteValue { .. }
        | Error::MassNotPd(_)
        | Error::FactorizationFailed(_)
        | Error::ConvergenceFailure { .. }
        | Error::NoZeroFound { .. }
        | Error::OrthogonalityDefect { .. }
        | Error::NotOdd { .. }
        | Error::RankDeficientSubspace { .. } => EXIT_SOLVER,
        Error::KernelDefect(_) => EXIT_VERDICT,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)
        .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Input(format!("report serialization: {e}")))?;
    write_file(path, &text)
}

fn solve_options(cfg: &RunConfig) -> SolveOptions {
    let mut opts = SolveOptions::default();
    opts.tol = cfg.solver_tol;
    opts
}

pub fn execute(cfg: &RunConfig) -> Result<u8> {
    cfg.validate()?;
    // a malformed BIHARM_THREADS is an input error for every command, not
    // just the ones that spawn workers
    thread_count()?;
    let dom = crate::config::load_domain(&cfg.domain_file)?;
    match cfg.command {
        CommandKind::Spectrum => run_spectrum(cfg, &dom),
        CommandKind::Inequality => run_inequality(cfg, &dom),
        CommandKind::Construct => run_construct(cfg, &dom),
        CommandKind::Converge => run_converge(cfg, &dom),
        CommandKind::Kernel => run_kernel(cfg, &dom),
    }
}

/// Flat, serializable view of a spectrum (coefficient vectors omitted).
#[derive(Debug, Serialize)]
struct SpectrumSummary {
    bc: String,
    mesh_id: String,
    path: String,
    sweeps: usize,
    eigenvalues: Vec<f64>,
    residual_norms: Vec<f64>,
    next_gap: Option<f64>,
}

impl SpectrumSummary {
    fn new(s: &SpectrumResult) -> Self {
        Self {
            bc: s.bc.to_string(),
            mesh_id: s.mesh_id.clone(),
            path: s.path.to_string(),
            sweeps: s.sweeps,
            eigenvalues: s.eigenvalues.clone(),
            residual_norms: s.residual_norms.clone(),
            next_gap: s.next_gap,
        }
    }
}

fn run_spectrum(cfg: &RunConfig, dom: &RectilinearDomain) -> Result<u8> {
    let spec = compute_spectrum_with(
        dom,
        cfg.refinement,
        cfg.bc.into(),
        cfg.k_max,
        &solve_options(cfg),
    )?;
    print!("{}", render_spectrum_text(&spec));
    if let Some(p) = &cfg.csv_path {
        write_file(p, &render_spectrum_csv(&spec))?;
    }
    if let Some(p) = &cfg.report_path {
        write_json(p, &SpectrumSummary::new(&spec))?;
    }
    Ok(EXIT_OK)
}

fn run_inequality(cfg: &RunConfig, dom: &RectilinearDomain) -> Result<u8> {
    let id = cfg.theorem.as_deref().unwrap_or("");
    let thm =
        lookup_theorem(id).ok_or_else(|| Error::Input(format!("unknown theorem '{id}'")))?;
    let opts = InequalityOptions {
        tol_margin_rel: cfg.margin_tol,
        replay: cfg.replay.into(),
        seed_dir: cfg.seed_dir,
        solve: solve_options(cfg),
        concurrent_solves: thread_count()? >= 2,
    };
    let report = check_inequality(dom, cfg.refinement, cfg.k_max, thm, &opts)?;
    print!("{}", render_text(&report));
    if let Some(p) = &cfg.csv_path {
        write_file(p, &render_csv(&report))?;
    }
    if let Some(p) = &cfg.report_path {
        write_json(p, &report)?;
    }
    Ok(if report.all_pass { EXIT_OK } else { EXIT_VERDICT })
}

#[derive(Debug, Serialize)]
struct ConstructReport {
    domain: String,
    lambda_source: String,
    family: biharm::trial::TrialFamily,
    identities: biharm::trial::IdentityReport,
}

fn render_family_text(rep: &ConstructReport, dim: usize) -> String {
    let fam = &rep.family;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "trial family: {:?} | lambda = {:e} ({}) | {} members on {}",
        fam.kind,
        fam.lambda,
        rep.lambda_source,
        fam.len(),
        rep.domain
    );
    for (l, m) in fam.members.iter().enumerate() {
        let w: Vec<String> = m.omega[..dim].iter().map(|c| format!("{c:.6}")).collect();
        let c: Vec<String> = m.center[..dim].iter().map(|c| format!("{c:.6}")).collect();
        let quartic = m.omega.iter().map(|c| c * c).sum::<f64>().powi(2);
        let _ = writeln!(
            out,
            "  v{}: {:?}(w.(x-c)), w = [{}], c = [{}], |w|^4/lambda - 1 = {:.3e}, |v| = {:.6e}",
            l + 1,
            m.phase,
            w.join(", "),
            c.join(", "),
            quartic / fam.lambda - 1.0,
            fam.member_norms[l],
        );
    }
    let pairs: Vec<String> = fam
        .required_pairs
        .iter()
        .map(|(i, j)| format!("(v{},v{})", i + 1, j + 1))
        .collect();
    let _ = writeln!(
        out,
        "required orthogonal: {} | worst residual {:.3e} (bound {:.0e} relative)",
        pairs.join(" "),
        fam.worst_required_residual(),
        biharm::trial::ORTHO_REL_BOUND,
    );
    let _ = writeln!(
        out,
        "identities over {} sample points: max |bilaplacian(v) - lambda v| = {:.3e} \
         (lambda = {:e}); worst energy-combo residual = {:.3e} relative",
        rep.identities.sample_points,
        rep.identities.worst_pointwise(),
        fam.lambda,
        rep.identities.worst_combo(),
    );
    out
}

fn run_construct(cfg: &RunConfig, dom: &RectilinearDomain) -> Result<u8> {
    let (lambda, lambda_source) = match cfg.lambda {
        Some(l) => (l, "given".to_string()),
        None => {
            let spec = compute_spectrum_with(
                dom,
                cfg.refinement,
                Bc::Dirichlet,
                cfg.k_max,
                &solve_options(cfg),
            )?;
            (
                spec.eigenvalues[cfg.k_max - 1],
                format!("clamped eigenvalue {} at refinement {}", cfg.k_max, cfg.refinement),
            )
        }
    };
    let family = match cfg.family {
        FamilyChoice::Borsuk => borsuk_family(dom, lambda, cfg.seed_dir)?,
        FamilyChoice::Symmetric => symmetric_family(dom, lambda, &dom.symmetry_frame())?,
    };
    let identities = check_identities(&family, dom)?;
    let rep = ConstructReport {
        domain: dom.descriptor(),
        lambda_source,
        family,
        identities,
    };
    print!("{}", render_family_text(&rep, dom.dim()));
    if let Some(p) = &cfg.report_path {
        write_json(p, &rep)?;
    }
    Ok(EXIT_OK)
}

fn run_converge(cfg: &RunConfig, dom: &RectilinearDomain) -> Result<u8> {
    let rec = convergence_study(
        dom,
        cfg.bc.into(),
        cfg.k_max,
        &cfg.ladder,
        &solve_options(cfg),
    )?;
    print!("{}", render_convergence_text(&rec));
    if let Some(p) = &cfg.csv_path {
        write_file(p, &render_convergence_csv(&rec))?;
    }
    if let Some(p) = &cfg.report_path {
        write_json(p, &rec)?;
    }
    Ok(EXIT_OK)
}

fn run_kernel(cfg: &RunConfig, dom: &RectilinearDomain) -> Result<u8> {
    let summary = kernel_check(dom, cfg.refinement)?;
    print!(
        "{}",
        render_kernel_text(&summary, &dom.descriptor(), cfg.refinement)
    );
    if let Some(p) = &cfg.report_path {
        write_json(p, &summary)?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_error_kind_maps_to_the_contracted_exit_code() {
        assert_eq!(
            classify(&Error::Parse {
                line: 1,
                msg: "x".into()
            }),
            EXIT_INPUT
        );
        assert_eq!(classify(&Error::Input("x".into())), EXIT_INPUT);
        assert_eq!(classify(&Error::BadDimension(5)), EXIT_INPUT);
        assert_eq!(classify(&Error::NonMonotoneLadder), EXIT_INPUT);
        assert_eq!(classify(&Error::SymmetryMissing { axis: 2 }), EXIT_INPUT);
        assert_eq!(
            classify(&Error::ConvergenceFailure {
                residual: 1.0,
                tol: 1e-10,
                sweeps: 500
            }),
            EXIT_SOLVER
        );
        assert_eq!(
            classify(&Error::NoZeroFound {
                best: 1.0,
                tol: 1e-11
            }),
            EXIT_SOLVER
        );
        assert_eq!(
            classify(&Error::RankDeficientSubspace {
                rank: 2,
                expected: 3
            }),
            EXIT_SOLVER
        );
        assert_eq!(classify(&Error::KernelDefect("x".into())), EXIT_VERDICT);
    }
}
