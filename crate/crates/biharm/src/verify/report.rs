//! Plain-text and CSV renderings of the verification reports.
//!
//! CSV output is the plot-facing format and must be byte-identical across
//! runs for identical reports: fields are printed with Rust's shortest
//! round-tripping float notation, no locale, no timestamps. The aligned
//! text rendering is for humans and carries the upper-bound caveat; the
//! full machine-readable structure is the serde serialization of the report
//! types themselves.

use std::fmt::Write as _;

use crate::eigen::SpectrumResult;
use crate::verify::{ConvergenceRecord, InequalityReport, KernelSummary};

/// Caveat printed at the top of every verdict rendering.
pub const UPPER_BOUND_CAVEAT: &str = "note: both eigenvalue columns are conforming Rayleigh-Ritz \
     upper bounds for the continuum eigenvalues; a discrete pass is evidence for the continuum \
     inequality, not a proof of it.";

fn fmt_f(v: f64) -> String {
    format!("{v:e}")
}

pub fn render_csv(report: &InequalityReport) -> String {
    let mut out = String::new();
    out.push_str("k,lambda_k,mu_k_plus_shift,margin,verdict\n");
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.k,
            fmt_f(row.lambda),
            fmt_f(row.mu_shifted),
            fmt_f(row.margin),
            if row.pass { "pass" } else { "fail" },
        );
    }
    out
}

pub fn render_text(report: &InequalityReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "inequality check: {} ({})",
        report.theorem, report.statement
    );
    let _ = writeln!(
        out,
        "domain {} | dim {} | refinement {} | shift {} | k_max {}",
        report.domain, report.dim, report.refinement, report.shift, report.k_max
    );
    out.push_str(UPPER_BOUND_CAVEAT);
    out.push('\n');
    if !report.symmetry_frame.is_empty() {
        let planes: Vec<String> = report
            .symmetry_frame
            .iter()
            .map(|m| format!("axis {} at {}", m.axis + 1, m.plane_offset))
            .collect();
        let _ = writeln!(out, "reflection frame: {}", planes.join(", "));
    }
    let _ = writeln!(
        out,
        "{:>4}  {:>24}  {:>24}  {:>24}  verdict",
        "k",
        "lambda_k",
        format!("mu_k+{}", report.shift),
        "margin"
    );
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{:>4}  {:>24}  {:>24}  {:>24}  {}",
            row.k,
            fmt_f(row.lambda),
            fmt_f(row.mu_shifted),
            fmt_f(row.margin),
            if row.pass { "pass" } else { "FAIL" },
        );
    }
    let _ = writeln!(
        out,
        "nesting mu_k <= lambda_k (k = 1..{}): {}",
        report.k_max,
        if report.nesting_ok { "ok" } else { "VIOLATED" }
    );
    out.push_str(&kernel_line(&report.kernel));
    for rec in &report.replays {
        let _ = writeln!(
            out,
            "replay k={}: {:?} family of {}, gram rank {}/{}, sup {} = lambda_k(1 + {:.3e}), \
             worst required ortho {:.3e}",
            rec.k,
            rec.family_kind,
            rec.family_size,
            rec.gram_rank,
            rec.expected_rank,
            fmt_f(rec.sup_rayleigh),
            rec.excess,
            rec.worst_ortho,
        );
    }
    let _ = writeln!(
        out,
        "solves: clamped {} ({} sweeps, worst residual {:.3e}); free {} ({} sweeps, worst residual {:.3e})",
        report.dirichlet_solve.path,
        report.dirichlet_solve.sweeps,
        report.dirichlet_solve.worst_residual,
        report.neumann_solve.path,
        report.neumann_solve.sweeps,
        report.neumann_solve.worst_residual,
    );
    let _ = writeln!(
        out,
        "timings: clamped {} ms, free {} ms, replay {} ms, total {} ms",
        report.timings.dirichlet_ms,
        report.timings.neumann_ms,
        report.timings.replay_ms,
        report.timings.total_ms
    );
    let _ = writeln!(
        out,
        "overall: {}",
        if report.all_pass { "PASS" } else { "FAIL" }
    );
    out
}

fn kernel_line(kernel: &KernelSummary) -> String {
    let mut out = String::new();
    let worst_stiff = kernel
        .stiffness_norms
        .iter()
        .fold(0.0f64, |a, &b| a.max(b));
    let worst_rel = kernel
        .stiffness_rels
        .iter()
        .fold(0.0f64, |a, &b| a.max(b));
    let _ = writeln!(
        out,
        "kernel: {} ({} rigid modes {}, mu_d+2 = {}, |mu|/mu_d+2 = {:.3e}, \
         worst |A k| = {:.3e} = {:.3e} |A| |k|)",
        if kernel.pass { "ok" } else { "DEFECT" },
        kernel.zero_eigs.len(),
        if kernel.deflated {
            "deflated to exact zeros"
        } else {
            "from the raw pencil"
        },
        fmt_f(kernel.first_positive),
        kernel.ratio,
        worst_stiff,
        worst_rel,
    );
    out
}

pub fn render_kernel_text(kernel: &KernelSummary, domain: &str, refinement: u32) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "kernel audit: domain {domain} | refinement {refinement}");
    for (i, v) in kernel.zero_eigs.iter().enumerate() {
        let _ = writeln!(out, "  mu_{} = {}", i + 1, fmt_f(*v));
    }
    let _ = writeln!(
        out,
        "  mu_{} = {} (first positive)",
        kernel.zero_eigs.len() + 1,
        fmt_f(kernel.first_positive)
    );
    for (i, (n, rel)) in kernel
        .stiffness_norms
        .iter()
        .zip(&kernel.stiffness_rels)
        .enumerate()
    {
        let _ = writeln!(out, "  |A k_{}| = {:.3e} = {:.3e} |A| |k|", i + 1, n, rel);
    }
    out.push_str(&kernel_line(kernel));
    out
}

pub fn render_convergence_csv(rec: &ConvergenceRecord) -> String {
    let mut out = String::new();
    out.push_str("refinement,value\n");
    for (r, v) in rec.ladder.iter().zip(&rec.values) {
        let _ = writeln!(out, "{},{}", r, fmt_f(*v));
    }
    out
}

pub fn render_convergence_text(rec: &ConvergenceRecord) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "convergence study: domain {} | {} | eigenvalue #{}",
        rec.domain, rec.bc, rec.index
    );
    for (r, v) in rec.ladder.iter().zip(&rec.values) {
        let _ = writeln!(out, "  r = {:>4}: {}", r, fmt_f(*v));
    }
    let _ = writeln!(
        out,
        "observed order {:.4} (fit spread {:.2e}), non-increasing: {}",
        rec.order,
        rec.order_fit_residual,
        if rec.monotone_nonincreasing {
            "yes"
        } else {
            "NO"
        }
    );
    let _ = writeln!(
        out,
        "extrapolated limit {} (previous pair {})",
        fmt_f(rec.richardson),
        fmt_f(rec.richardson_prev)
    );
    out
}

pub fn render_spectrum_csv(spec: &SpectrumResult) -> String {
    let mut out = String::new();
    out.push_str("index,eigenvalue,residual\n");
    for (i, (v, r)) in spec.eigenvalues.iter().zip(&spec.residual_norms).enumerate() {
        let _ = writeln!(out, "{},{},{}", i + 1, fmt_f(*v), fmt_f(*r));
    }
    out
}

pub fn render_spectrum_text(spec: &SpectrumResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "spectrum: mesh {} | path {} | {} sweeps",
        spec.mesh_id, spec.path, spec.sweeps
    );
    for (i, (v, r)) in spec.eigenvalues.iter().zip(&spec.residual_norms).enumerate() {
        let _ = writeln!(out, "  #{:<3} {:>24}  residual {:.3e}", i + 1, fmt_f(*v), r);
    }
    if let Some(gap) = spec.next_gap {
        let _ = writeln!(out, "gap to next eigenvalue: {}", fmt_f(gap));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{
        InequalityOptions, InequalityRow, KernelSummary, ReplayMode, SolveSummary, Timings,
    };

    fn sample_report() -> InequalityReport {
        InequalityReport {
            theorem: "thm2".into(),
            statement: "statement".into(),
            domain: "cells[(0,0)]".into(),
            dim: 2,
            refinement: 8,
            shift: 3,
            k_max: 2,
            tol_margin_rel: 1e-9,
            symmetry_frame: vec![],
            rows: vec![
                InequalityRow {
                    k: 1,
                    lambda: 1295.25,
                    mu_shifted: 250.75,
                    margin: 1044.5,
                    pass: true,
                    lambda_residual: 1e-12,
                    mu_residual: 2e-12,
                },
                InequalityRow {
                    k: 2,
                    lambda: 5392.5,
                    mu_shifted: 501.25,
                    margin: 4891.25,
                    pass: true,
                    lambda_residual: 1e-12,
                    mu_residual: 2e-12,
                },
            ],
            nesting_ok: true,
            kernel: KernelSummary {
                zero_eigs: vec![0.0, 0.0, 0.0],
                first_positive: 250.75,
                ratio: 0.0,
                stiffness_norms: vec![1e-13, 2e-13, 3e-13],
                stiffness_rels: vec![1e-16, 2e-16, 3e-16],
                deflated: true,
                pass: true,
            },
            replays: vec![],
            dirichlet_solve: SolveSummary {
                path: "dense".into(),
                sweeps: 0,
                count: 2,
                worst_residual: 1e-12,
            },
            neumann_solve: SolveSummary {
                path: "dense".into(),
                sweeps: 0,
                count: 5,
                worst_residual: 2e-12,
            },
            timings: Timings::default(),
            all_pass: true,
        }
    }

    #[test]
    fn csv_is_deterministic_and_shaped() {
        let report = sample_report();
        let a = render_csv(&report);
        let b = render_csv(&report);
        assert_eq!(a, b);
        let lines: Vec<&str> = a.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "k,lambda_k,mu_k_plus_shift,margin,verdict");
        assert!(lines[1].starts_with("1,"));
        assert!(lines[1].ends_with(",pass"));
    }

    #[test]
    fn text_carries_the_caveat_and_verdict() {
        let report = sample_report();
        let text = render_text(&report);
        assert!(text.contains(UPPER_BOUND_CAVEAT));
        assert!(text.contains("overall: PASS"));
        assert!(text.contains("nesting"));
    }

    #[test]
    fn failed_rows_render_as_fail() {
        let mut report = sample_report();
        report.rows[1].pass = false;
        report.all_pass = false;
        let text = render_text(&report);
        assert!(text.contains("FAIL"));
        let csv = render_csv(&report);
        assert!(csv.lines().nth(2).unwrap().ends_with(",fail"));
    }

    #[test]
    fn report_json_round_trips() {
        let report = sample_report();
        let json = serde_json::to_string_pretty(&report).unwrap();
        let back: InequalityReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.rows.len(), report.rows.len());
        assert_eq!(back.theorem, "thm2");
        // options enums serialize for config round-trips too
        let mode_json = serde_json::to_string(&ReplayMode::Endpoints).unwrap();
        let mode: ReplayMode = serde_json::from_str(&mode_json).unwrap();
        assert_eq!(mode, ReplayMode::Endpoints);
        let _ = InequalityOptions::default();
    }

    #[test]
    fn convergence_renderings_cover_the_ladder() {
        let rec = ConvergenceRecord {
            domain: "cells[(0,0)]".into(),
            bc: "dirichlet".into(),
            index: 1,
            ladder: vec![8, 16, 32],
            values: vec![1296.0, 1295.1, 1295.04],
            order: 3.9,
            order_fit_residual: 0.0,
            richardson: 1295.035,
            richardson_prev: 1295.03,
            monotone_nonincreasing: true,
        };
        let csv = render_convergence_csv(&rec);
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv.lines().next().unwrap(), "refinement,value");
        let text = render_convergence_text(&rec);
        assert!(text.contains("observed order 3.9"));
        assert_eq!(render_convergence_csv(&rec), csv);
    }
}
