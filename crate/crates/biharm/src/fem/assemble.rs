//! Assembly of the Hessian-energy (stiffness) and L2 (mass) bilinear forms.
//!
//! All refined cells are congruent cubes, so the local matrices are computed
//! once per mesh from one-dimensional Gauss-exact Gram tables and scattered in
//! deterministic cell order. Local matrices are exactly symmetric, hence the
//! assembled matrices satisfy A[p,q] = A[q,p] bitwise.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::fem::hermite::hermite1d_scaled;
use crate::fem::mesh::MeshDofSystem;
use crate::fem::ScalarField;
use crate::quadrature::QuadratureRule;

/// Symmetric sparse matrix in CSR layout storing both triangles.
#[derive(Debug, Clone)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymMatrix {
    /// Build from one sorted column map per row. The caller is responsible
    /// for symmetry; assembly produces it exactly.
    pub fn from_row_maps(rows: Vec<BTreeMap<usize, f64>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                col_idx.push(c);
                vals.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.n);
        self.matvec_into(x.as_slice(), y.as_mut_slice());
        y
    }

    /// Quadratic/bilinear form x^T A y.
    pub fn quad_form(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let mut acc = 0.0;
        for i in 0..self.n {
            let mut row = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row += self.vals[k] * y[self.col_idx[k]];
            }
            acc += x[i] * row;
        }
        acc
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col_idx[k])] = self.vals[k];
            }
        }
        m
    }

    /// Max absolute row sum (the operator infinity norm).
    pub fn inf_norm(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let mut row = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row += self.vals[k].abs();
            }
            worst = worst.max(row);
        }
        worst
    }

    /// Largest |i - j| over stored entries (semi-bandwidth).
    pub fn band_width(&self) -> usize {
        let mut b = 0usize;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                b = b.max(self.col_idx[k].abs_diff(i));
            }
        }
        b
    }

    pub fn diag(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[k] == i {
                    d[i] = self.vals[k];
                }
            }
        }
        d
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1])
                .map(move |k| (i, self.col_idx[k], self.vals[k]))
        })
    }

    /// Coordinate-format text export (1-based indices, lower triangle),
    /// matrix-market style, for debugging.
    pub fn write_matrix_market<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        let lower = self
            .entries()
            .filter(|(i, j, _)| j <= i)
            .collect::<Vec<_>>();
        writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
        writeln!(w, "{} {} {}", self.n, self.n, lower.len())?;
        for (i, j, v) in lower {
            writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
        }
        Ok(())
    }
}

/// One-dimensional Gram tables g_k[a][b] = int_cell D^k f_a D^k f_b dx for
/// derivative orders k = 0, 1, 2, with the physical h-scaling baked in.
/// 4-point Gauss is exact here (integrands have degree <= 6).
fn grams_1d(h: f64) -> [DMatrix<f64>; 3] {
    let rule = QuadratureRule::poly_default();
    let mut grams = [
        DMatrix::zeros(4, 4),
        DMatrix::zeros(4, 4),
        DMatrix::zeros(4, 4),
    ];
    for (k, gram) in grams.iter_mut().enumerate() {
        // fill a <= b and mirror so the table is symmetric to the last bit
        for a in 0..4 {
            for b in a..4 {
                let mut acc = 0.0;
                for (q, &xi) in rule.nodes().iter().enumerate() {
                    let w = rule.weights()[q];
                    acc += w
                        * hermite1d_scaled(a, k, xi, h)
                        * hermite1d_scaled(b, k, xi, h);
                }
                gram[(a, b)] = h * acc;
                gram[(b, a)] = h * acc;
            }
        }
    }
    grams
}

fn axis_dof(local: usize, axis: usize, dofs_per_node: usize) -> usize {
    let corner = local / dofs_per_node;
    let kind = local % dofs_per_node;
    2 * ((corner >> axis) & 1) + ((kind >> axis) & 1)
}

/// Local mass matrix: tensor product of the order-0 Gram per axis.
fn local_mass(d: usize, h: f64) -> DMatrix<f64> {
    let grams = grams_1d(h);
    let dpn = 1usize << d;
    let nloc = dpn * dpn;
    let mut m = DMatrix::zeros(nloc, nloc);
    for a in 0..nloc {
        for b in 0..nloc {
            let mut v = 1.0;
            for axis in 0..d {
                v *= grams[0][(axis_dof(a, axis, dpn), axis_dof(b, axis, dpn))];
            }
            m[(a, b)] = v;
        }
    }
    m
}

/// Local Hessian-energy matrix: sum over derivative pairs (i, j) of tensor
/// products where axis i and axis j carry one derivative each (two if i = j).
fn local_hessian(d: usize, h: f64) -> DMatrix<f64> {
    let grams = grams_1d(h);
    let dpn = 1usize << d;
    let nloc = dpn * dpn;
    let mut kmat = DMatrix::zeros(nloc, nloc);
    for i in 0..d {
        for j in 0..d {
            for a in 0..nloc {
                for b in 0..nloc {
                    let mut v = 1.0;
                    for axis in 0..d {
                        let ord = (axis == i) as usize + (axis == j) as usize;
                        v *= grams[ord][(axis_dof(a, axis, dpn), axis_dof(b, axis, dpn))];
                    }
                    kmat[(a, b)] += v;
                }
            }
        }
    }
    kmat
}

fn scatter(mesh: &MeshDofSystem, local: &DMatrix<f64>) -> SparseSymMatrix {
    let nfree = mesh.free_dofs();
    let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); nfree];
    let nloc = mesh.local_dofs();
    for cell in &mesh.cells {
        let globals = mesh.cell_global_dofs(cell);
        for a in 0..nloc {
            let Some(fa) = mesh.free_of_global[globals[a]] else {
                continue;
            };
            let row = &mut rows[fa];
            for b in 0..nloc {
                let Some(fb) = mesh.free_of_global[globals[b]] else {
                    continue;
                };
                *row.entry(fb).or_insert(0.0) += local[(a, b)];
            }
        }
    }
    SparseSymMatrix::from_row_maps(rows)
}

/// Hessian-energy matrix A[p,q] = sum_{i,j} int d_i d_j phi_p d_i d_j phi_q
/// on the free dofs. Positive semidefinite; positive definite under clamping.
pub fn assemble_hessian(mesh: &MeshDofSystem) -> SparseSymMatrix {
    scatter(mesh, &local_hessian(mesh.dim(), mesh.h))
}

/// Mass matrix M[p,q] = int phi_p phi_q on the free dofs; positive definite.
pub fn assemble_mass(mesh: &MeshDofSystem) -> SparseSymMatrix {
    scatter(mesh, &local_mass(mesh.dim(), mesh.h))
}

/// Nodal interpolant: the free-dof coefficients are the field's value and
/// mixed first derivatives at each node (masked dofs are dropped, i.e. the
/// interpolant is taken in the constrained space).
pub fn interpolate<F: ScalarField>(mesh: &MeshDofSystem, field: &F) -> DVector<f64> {
    let dpn = mesh.dofs_per_node;
    let mut free = DVector::zeros(mesh.free_dofs());
    for (rank, node) in mesh.nodes.iter().enumerate() {
        let x = mesh.node_coord(node);
        for t in 0..dpn {
            let g = rank * dpn + t;
            if let Some(f) = mesh.free_of_global[g] {
                free[f] = field.deriv(&x, &mesh.alpha_of_kind(t));
            }
        }
    }
    free
}

/// Convenience: assemble both matrices.
pub fn assemble_pair(mesh: &MeshDofSystem) -> (SparseSymMatrix, SparseSymMatrix) {
    (assemble_hessian(mesh), assemble_mass(mesh))
}
