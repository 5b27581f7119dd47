//! Clamped (Dirichlet) and free (Neumann) plate spectra of the biharmonic
//! operator on rectilinear domains.
//!
//! Both eigenvalue problems share the Hessian energy
//! `h[u] = sum_{i,j} ||d_i d_j u||^2_{L2}`; only the form domain differs
//! (clamped: value and gradient pinned on the boundary; free: unconstrained).
//! Discretization uses C1-conforming tensor cubic Hermite elements on
//! uniformly refined lattice cells, so every discrete eigenvalue is a
//! conforming (Rayleigh-Ritz) upper bound for its continuum counterpart.
//!
//! Modules:
//! - [`domain`]: lattice-cell domains, reflection symmetry, quadrature driver
//! - [`quadrature`]: tensor Gauss-Legendre rules
//! - [`fem`]: mesh/dof bookkeeping, shape functions, assembly, interpolation
//! - [`eigen`]: generalized symmetric eigensolvers with kernel deflation
//! - [`trial`]: explicit trigonometric trial families and hybrid subspaces
//! - [`verify`]: eigenvalue-inequality reports, kernel and convergence checks

pub mod domain;
pub mod eigen;
pub mod error;
pub mod fem;
pub mod quadrature;
pub mod trial;
pub mod verify;

pub use error::{Error, Result};
