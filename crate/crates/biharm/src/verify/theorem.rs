//! Registry of the eigenvalue inequalities this library can check.
//!
//! Each entry states one inequality of the form mu_{k+s} <= lambda_k between
//! the free (mu) and clamped (lambda) spectra, knows its index shift s, and
//! can build the trial family whose span replays the upper-bound argument
//! behind it. Checks are driven through the trait object, so adding an
//! inequality means adding one impl and one registry line.

use crate::domain::RectilinearDomain;
use crate::error::Result;
use crate::trial::{borsuk_family, symmetric_family, TrialFamily};

pub trait TheoremSpec: Sync {
    /// Selector used on the command line and in report files.
    fn id(&self) -> &'static str;

    /// One-line statement of the inequality for report headers.
    fn statement(&self) -> &'static str;

    /// The index shift s in mu_{k+s} <= lambda_k for the given dimension.
    fn shift(&self, dim: usize) -> usize;

    /// Whether the check requires reflection symmetries of the domain.
    fn needs_symmetry(&self) -> bool {
        false
    }

    /// The trial family whose span (together with the first k clamped
    /// eigenvectors) replays the subspace argument for this inequality.
    fn build_family(
        &self,
        dom: &RectilinearDomain,
        lambda: f64,
        seed_dir: [f64; 3],
    ) -> Result<TrialFamily>;
}

/// Shift by the dimension (degrades to 2 in d = 2, where only two
/// orthogonal sine members exist and the argument gives the weaker shift).
pub struct ShiftByDimension;

impl TheoremSpec for ShiftByDimension {
    fn id(&self) -> &'static str {
        "thm1"
    }

    fn statement(&self) -> &'static str {
        "mu_{k+d} <= lambda_k for d >= 3; mu_{k+2} <= lambda_k when d = 2"
    }

    fn shift(&self, dim: usize) -> usize {
        if dim == 2 {
            2
        } else {
            dim
        }
    }

    fn build_family(
        &self,
        dom: &RectilinearDomain,
        lambda: f64,
        seed_dir: [f64; 3],
    ) -> Result<TrialFamily> {
        borsuk_family(dom, lambda, seed_dir)
    }
}

/// Shift by dimension plus one, available on domains with reflection
/// symmetry across d - 1 coordinate hyperplanes.
pub struct ShiftByDimensionPlusOne;

impl TheoremSpec for ShiftByDimensionPlusOne {
    fn id(&self) -> &'static str {
        "thm2"
    }

    fn statement(&self) -> &'static str {
        "mu_{k+d+1} <= lambda_k on domains with d-1 reflection symmetries"
    }

    fn shift(&self, dim: usize) -> usize {
        dim + 1
    }

    fn needs_symmetry(&self) -> bool {
        true
    }

    fn build_family(
        &self,
        dom: &RectilinearDomain,
        lambda: f64,
        _seed_dir: [f64; 3],
    ) -> Result<TrialFamily> {
        symmetric_family(dom, lambda, &dom.symmetry_frame())
    }
}

/// The dimension-independent shift-2 baseline.
pub struct ShiftByTwo;

impl TheoremSpec for ShiftByTwo {
    fn id(&self) -> &'static str {
        "provenzano"
    }

    fn statement(&self) -> &'static str {
        "mu_{k+2} <= lambda_k in any dimension"
    }

    fn shift(&self, _dim: usize) -> usize {
        2
    }

    fn build_family(
        &self,
        dom: &RectilinearDomain,
        lambda: f64,
        seed_dir: [f64; 3],
    ) -> Result<TrialFamily> {
        borsuk_family(dom, lambda, seed_dir)
    }
}

static THM1: ShiftByDimension = ShiftByDimension;
static THM2: ShiftByDimensionPlusOne = ShiftByDimensionPlusOne;
static PROVENZANO: ShiftByTwo = ShiftByTwo;

pub fn registry() -> Vec<&'static dyn TheoremSpec> {
    vec![&THM1, &THM2, &PROVENZANO]
}

pub fn lookup_theorem(id: &str) -> Option<&'static dyn TheoremSpec> {
    registry().into_iter().find(|t| t.id() == id)
}
