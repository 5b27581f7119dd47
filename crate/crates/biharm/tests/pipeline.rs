//! End-to-end checks through the public API: discretization accuracy against
//! an external reference value, route agreement, and the inequality pipeline
//! on randomized lattice domains.

use biharm::domain::RectilinearDomain;
use biharm::eigen::{solve_lowest_with, SolveOptions, SolvePath};
use biharm::fem::mesh::{build_mesh, Bc};
use biharm::verify::report::render_csv;
use biharm::verify::theorem::lookup_theorem;
use biharm::verify::{check_inequality, convergence_study, InequalityOptions, ReplayMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_square() -> RectilinearDomain {
    RectilinearDomain::new(2, 1.0, [0.0; 3], vec![[0, 0, 0]]).unwrap()
}

/// Clamped unit square: the discrete first eigenvalue must converge at the
/// element's fourth-order rate toward the established reference value
/// 1294.934 (bilaplacian with value and gradient pinned on the boundary).
#[test]
fn clamped_square_converges_to_the_reference_constant() {
    let rec = convergence_study(
        &unit_square(),
        Bc::Dirichlet,
        1,
        &[4, 8, 16],
        &SolveOptions::default(),
    )
    .unwrap();
    assert!(
        rec.monotone_nonincreasing,
        "nested refinements must tighten the upper bound: {:?}",
        rec.values
    );
    assert!(
        rec.order > 3.5 && rec.order < 4.5,
        "observed order {} outside the quartic window",
        rec.order
    );
    let reference = 1294.934;
    assert!(
        (rec.richardson - reference).abs() < 0.05,
        "extrapolated limit {} too far from {}",
        rec.richardson,
        reference
    );
    // every level is an upper bound for the limit
    for v in &rec.values {
        assert!(*v > reference);
    }
}

/// Free unit square: after the three exact rigid zeros, the first positive
/// eigenvalue converges at the same quartic rate.
#[test]
fn free_square_first_positive_converges_at_fourth_order() {
    let rec = convergence_study(
        &unit_square(),
        Bc::Neumann,
        4,
        &[4, 8, 16],
        &SolveOptions::default(),
    )
    .unwrap();
    assert!(rec.monotone_nonincreasing);
    assert!(
        rec.order > 3.0 && rec.order < 4.8,
        "observed order {}",
        rec.order
    );
    assert!(rec.richardson > 0.0 && rec.richardson < rec.values[2]);
}

/// The dense and banded routes are two implementations of the same pencil
/// solve and must agree to solver tolerance, including the deflated zeros.
#[test]
fn solver_routes_agree_on_a_rectangle() {
    let rect = RectilinearDomain::new(2, 1.0, [0.0; 3], vec![[0, 0, 0], [1, 0, 0]]).unwrap();
    for bc in [Bc::Dirichlet, Bc::Neumann] {
        let mesh = build_mesh(&rect, 8, bc).unwrap();
        let mut opts = SolveOptions::default();
        opts.force_path = Some(SolvePath::Dense);
        let dense = solve_lowest_with(&mesh, 6, &opts).unwrap();
        opts.force_path = Some(SolvePath::Banded);
        let banded = solve_lowest_with(&mesh, 6, &opts).unwrap();
        assert_eq!(dense.path, SolvePath::Dense);
        assert_eq!(banded.path, SolvePath::Banded);
        for (a, b) in dense.eigenvalues.iter().zip(&banded.eigenvalues) {
            if *a == 0.0 {
                assert_eq!(*b, 0.0, "deflated zeros must match exactly");
            } else {
                assert!(
                    (a - b).abs() <= 1e-8 * a.abs(),
                    "routes disagree: {a} vs {b}"
                );
            }
        }
    }
}

fn random_polyomino(rng: &mut ChaCha8Rng, max_cells: usize) -> RectilinearDomain {
    let mut cells: Vec<[i64; 3]> = vec![[0, 0, 0]];
    let target = rng.gen_range(1..=max_cells);
    while cells.len() < target {
        let base = cells[rng.gen_range(0..cells.len())];
        let step: [i64; 3] = match rng.gen_range(0..4u8) {
            0 => [1, 0, 0],
            1 => [-1, 0, 0],
            2 => [0, 1, 0],
            _ => [0, -1, 0],
        };
        let cand = [base[0] + step[0], base[1] + step[1], 0];
        if !cells.contains(&cand) {
            cells.push(cand);
        }
    }
    RectilinearDomain::new(2, 1.0, [0.0; 3], cells).unwrap()
}

/// Seeded sweep over random connected lattice domains: the dimension-shift
/// inequality with the sine construction must come out clean on every one,
/// including the rigid-mode audit embedded in the report.
#[test]
fn random_polyominoes_pass_the_baseline_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9031);
    let thm = lookup_theorem("thm1").unwrap();
    let opts = InequalityOptions {
        replay: ReplayMode::None,
        ..Default::default()
    };
    for round in 0..6 {
        let dom = random_polyomino(&mut rng, 4);
        let report = check_inequality(&dom, 3, 2, thm, &opts).unwrap();
        assert_eq!(report.shift, 2);
        assert!(
            report.all_pass,
            "round {round}: report failed on {}",
            report.domain
        );
        assert!(report.nesting_ok);
        assert!(report.kernel.pass);
        for row in &report.rows {
            assert!(row.margin > 0.0, "round {round}: k={} margin {}", row.k, row.margin);
        }
    }
}

/// Full replay on a symmetric domain: every k gets a hybrid subspace of the
/// expected rank whose Rayleigh sup reproduces lambda_k up to quadrature.
#[test]
fn full_replay_reproduces_every_level() {
    let thm = lookup_theorem("thm2").unwrap();
    let opts = InequalityOptions {
        replay: ReplayMode::Full,
        ..Default::default()
    };
    let report = check_inequality(&unit_square(), 6, 4, thm, &opts).unwrap();
    assert_eq!(report.shift, 3);
    assert!(report.all_pass);
    assert_eq!(report.replays.len(), 4);
    for rec in &report.replays {
        assert_eq!(rec.family_size, 3);
        assert_eq!(rec.expected_rank, rec.k + 3);
        assert!(rec.rank_ok, "k={}: rank {}/{}", rec.k, rec.gram_rank, rec.expected_rank);
        assert!(
            rec.excess >= -1e-9 && rec.excess <= 1e-5,
            "k={}: excess {}",
            rec.k,
            rec.excess
        );
        assert!(rec.worst_ortho <= 1e-10);
    }
}

/// Two identical runs must emit byte-identical CSV (fixed seeds, fixed
/// quadrature, no timing data in the table).
#[test]
fn repeated_runs_emit_identical_csv() {
    let thm = lookup_theorem("provenzano").unwrap();
    let dom = RectilinearDomain::new(
        2,
        1.0,
        [0.0; 3],
        vec![[0, 0, 0], [1, 0, 0], [0, 1, 0]],
    )
    .unwrap();
    let opts = InequalityOptions::default();
    let a = check_inequality(&dom, 4, 3, thm, &opts).unwrap();
    let b = check_inequality(&dom, 4, 3, thm, &opts).unwrap();
    let csv_a = render_csv(&a);
    let csv_b = render_csv(&b);
    assert_eq!(csv_a, csv_b);
    assert_eq!(csv_a.lines().count(), 4);
}
