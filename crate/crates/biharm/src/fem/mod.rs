//! C1 tensor-product cubic Hermite discretization: reference shape functions,
//! mesh and dof bookkeeping, and assembly of the Hessian-energy and mass forms.

pub mod assemble;
pub mod hermite;
pub mod mesh;

pub use assemble::{assemble_hessian, assemble_mass, interpolate, SparseSymMatrix};
pub use mesh::{build_mesh, build_mesh_capped, Bc, MeshDofSystem, DEFAULT_DOF_CAP};

use crate::domain::Point;

/// Scalar field with analytic mixed partial derivatives, the input for nodal
/// interpolation (orders up to 1 per axis) and identity checks (higher orders).
pub trait ScalarField {
    /// Mixed partial derivative `d^alpha f (x)`, `alpha` = order per axis.
    fn deriv(&self, x: &Point, alpha: &[usize; 3]) -> f64;

    fn value(&self, x: &Point) -> f64 {
        self.deriv(x, &[0, 0, 0])
    }
}

/// Constant field; all derivatives vanish.
pub struct ConstField(pub f64);

impl ScalarField for ConstField {
    fn deriv(&self, _x: &Point, alpha: &[usize; 3]) -> f64 {
        if alpha.iter().all(|&a| a == 0) {
            self.0
        } else {
            0.0
        }
    }
}

/// The coordinate function `f(x) = x_axis`.
pub struct CoordField(pub usize);

impl ScalarField for CoordField {
    fn deriv(&self, x: &Point, alpha: &[usize; 3]) -> f64 {
        let total: usize = alpha.iter().sum();
        match total {
            0 => x[self.0],
            1 if alpha[self.0] == 1 => 1.0,
            _ => 0.0,
        }
    }
}
