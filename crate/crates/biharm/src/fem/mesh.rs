//! Mesh and dof bookkeeping for the tensor Hermite element.
//!
//! Each node carries one dof per derivative multi-index in {0,1}^d (value,
//! first derivatives, mixed derivatives), i.e. 4 dofs per node in 2D and 8 in
//! 3D. Global dof id = node rank * dofs_per_node + dof kind, nodes ranked in
//! lattice order, which keeps assembled matrices banded.

use std::collections::{HashMap, HashSet};

use nalgebra::DVector;

use crate::domain::{lattice_key, LatticeCell, Point, RectilinearDomain};
use crate::error::{Error, Result};
use crate::fem::hermite::hermite1d_scaled;

/// Boundary conditions of the plate problem: `Dirichlet` clamps value and
/// gradient on the boundary, `Neumann` leaves the space unconstrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Bc {
    Dirichlet,
    Neumann,
}

impl std::fmt::Display for Bc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bc::Dirichlet => write!(f, "dirichlet"),
            Bc::Neumann => write!(f, "neumann"),
        }
    }
}

/// Default cap on the total (pre-elimination) dof count.
pub const DEFAULT_DOF_CAP: usize = 200_000;

#[derive(Debug, Clone)]
pub struct MeshDofSystem {
    pub domain: RectilinearDomain,
    pub refinement: u32,
    pub bc: Bc,
    /// Refined cell width `cell_size / refinement`, equal on all axes.
    pub h: f64,
    /// Refined cells in lattice order (refined lattice units).
    pub cells: Vec<LatticeCell>,
    cell_set: HashSet<LatticeCell>,
    /// Nodes (refined lattice coordinates) in lattice order.
    pub nodes: Vec<LatticeCell>,
    node_index: HashMap<LatticeCell, usize>,
    pub dofs_per_node: usize,
    /// `true` entries are eliminated by the essential (clamped) conditions.
    pub dirichlet_mask: Vec<bool>,
    pub free_of_global: Vec<Option<usize>>,
    pub global_of_free: Vec<usize>,
}

/// Build with the default dof cap.
pub fn build_mesh(dom: &RectilinearDomain, refinement: u32, bc: Bc) -> Result<MeshDofSystem> {
    build_mesh_capped(dom, refinement, bc, DEFAULT_DOF_CAP)
}

pub fn build_mesh_capped(
    dom: &RectilinearDomain,
    refinement: u32,
    bc: Bc,
    dof_cap: usize,
) -> Result<MeshDofSystem> {
    if refinement < 1 {
        return Err(Error::MeshMismatch("refinement must be >= 1".into()));
    }
    let d = dom.dim();
    let r = refinement as i64;
    let dofs_per_node = 1usize << d;

    // Refined cells: each base cell splits into refinement^d lattice cells.
    let mut cells = Vec::new();
    let sub_count = (refinement as usize).pow(d as u32);
    for base in dom.cells() {
        for flat in 0..sub_count {
            let mut idx = flat;
            let mut c = [0i64; 3];
            for axis in 0..d {
                c[axis] = base[axis] * r + (idx % refinement as usize) as i64;
                idx /= refinement as usize;
            }
            cells.push(c);
        }
    }
    cells.sort_by_key(lattice_key);
    let cell_set: HashSet<LatticeCell> = cells.iter().copied().collect();

    // Nodes are the refined-cell corners, deduplicated.
    let mut node_set = HashSet::new();
    for c in &cells {
        for corner in 0..dofs_per_node {
            let mut n = *c;
            for axis in 0..d {
                n[axis] += ((corner >> axis) & 1) as i64;
            }
            node_set.insert(n);
        }
    }
    let mut nodes: Vec<LatticeCell> = node_set.into_iter().collect();
    nodes.sort_by_key(lattice_key);

    let total_dofs = nodes.len() * dofs_per_node;
    if total_dofs > dof_cap {
        return Err(Error::RefinementOverflow {
            dofs: total_dofs,
            cap: dof_cap,
        });
    }

    let node_index: HashMap<LatticeCell, usize> =
        nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();

    // Clamped conditions: u = 0 and grad u = 0 along the boundary force every
    // nodal dof at a boundary node to vanish (each remaining mixed dof is a
    // tangential derivative of data already zero along an adjacent boundary
    // face), so the mask is exactly "all dofs at boundary nodes".
    let mut dirichlet_mask = vec![false; total_dofs];
    if bc == Bc::Dirichlet {
        for (rank, n) in nodes.iter().enumerate() {
            let interior = (0..dofs_per_node).all(|corner| {
                let mut c = *n;
                for axis in 0..d {
                    c[axis] -= ((corner >> axis) & 1) as i64;
                }
                cell_set.contains(&c)
            });
            if !interior {
                for t in 0..dofs_per_node {
                    dirichlet_mask[rank * dofs_per_node + t] = true;
                }
            }
        }
    }

    let mut free_of_global = vec![None; total_dofs];
    let mut global_of_free = Vec::new();
    for (g, masked) in dirichlet_mask.iter().enumerate() {
        if !masked {
            free_of_global[g] = Some(global_of_free.len());
            global_of_free.push(g);
        }
    }

    Ok(MeshDofSystem {
        domain: dom.clone(),
        refinement,
        bc,
        h: dom.cell_size() / refinement as f64,
        cells,
        cell_set,
        nodes,
        node_index,
        dofs_per_node,
        dirichlet_mask,
        free_of_global,
        global_of_free,
    })
}

impl MeshDofSystem {
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn total_dofs(&self) -> usize {
        self.nodes.len() * self.dofs_per_node
    }

    pub fn free_dofs(&self) -> usize {
        self.global_of_free.len()
    }

    pub fn node_rank(&self, n: &LatticeCell) -> Option<usize> {
        self.node_index.get(n).copied()
    }

    /// Real coordinates of a refined-lattice node.
    pub fn node_coord(&self, n: &LatticeCell) -> Point {
        let origin = self.domain.origin();
        let mut p = [0.0; 3];
        for axis in 0..self.dim() {
            p[axis] = origin[axis] + self.h * n[axis] as f64;
        }
        p
    }

    /// Global dof id for (node, derivative kind). Kind `t` encodes the
    /// derivative multi-index bitwise: bit i set = first derivative on axis i.
    pub fn dof_index(&self, node: &LatticeCell, t: usize) -> Option<usize> {
        self.node_rank(node)
            .map(|r| r * self.dofs_per_node + t)
    }

    /// Derivative multi-index of dof kind `t`.
    pub fn alpha_of_kind(&self, t: usize) -> [usize; 3] {
        let mut alpha = [0usize; 3];
        for axis in 0..self.dim() {
            alpha[axis] = (t >> axis) & 1;
        }
        alpha
    }

    pub fn contains_refined_cell(&self, c: &LatticeCell) -> bool {
        self.cell_set.contains(c)
    }

    /// Number of local dofs per cell: (2 corners * 2 kinds)^d.
    pub fn local_dofs(&self) -> usize {
        self.dofs_per_node * self.dofs_per_node
    }

    /// Global dof ids of a cell's local dofs, local index = corner * 2^d + kind.
    pub fn cell_global_dofs(&self, cell: &LatticeCell) -> Vec<usize> {
        let d = self.dim();
        let dpn = self.dofs_per_node;
        let mut out = Vec::with_capacity(dpn * dpn);
        for corner in 0..dpn {
            let mut n = *cell;
            for axis in 0..d {
                n[axis] += ((corner >> axis) & 1) as i64;
            }
            let rank = self.node_index[&n];
            for t in 0..dpn {
                out.push(rank * dpn + t);
            }
        }
        out
    }

    /// Shape function (or derivative up to total order 2) of a local dof of
    /// `cell` at a point `x` inside that cell.
    pub fn shape_eval(
        &self,
        cell: &LatticeCell,
        local: usize,
        x: &Point,
        alpha: &[usize; 3],
    ) -> Result<f64> {
        let total: usize = alpha.iter().sum();
        if total > 2 {
            return Err(Error::BadMultiIndex(format!(
                "({}, {}, {})",
                alpha[0], alpha[1], alpha[2]
            )));
        }
        let d = self.dim();
        let dpn = self.dofs_per_node;
        let corner = local / dpn;
        let kind = local % dpn;
        let origin = self.domain.origin();
        let mut v = 1.0;
        for axis in 0..d {
            let low = origin[axis] + self.h * cell[axis] as f64;
            let xi = (x[axis] - low) / self.h;
            let idx = 2 * ((corner >> axis) & 1) + ((kind >> axis) & 1);
            v *= hermite1d_scaled(idx, alpha[axis], xi, self.h);
        }
        Ok(v)
    }

    /// Expand free-dof coefficients to the full dof vector (masked dofs zero).
    pub fn to_global(&self, free: &DVector<f64>) -> DVector<f64> {
        assert_eq!(free.len(), self.free_dofs(), "coefficient length mismatch");
        let mut out = DVector::zeros(self.total_dofs());
        for (f, &g) in self.global_of_free.iter().enumerate() {
            out[g] = free[f];
        }
        out
    }

    /// Restrict a full dof vector to the free dofs.
    pub fn to_free(&self, global: &DVector<f64>) -> DVector<f64> {
        assert_eq!(global.len(), self.total_dofs());
        DVector::from_iterator(
            self.free_dofs(),
            self.global_of_free.iter().map(|&g| global[g]),
        )
    }

    /// Refined cell containing `x`, preferring lower cells on shared faces.
    pub fn locate_cell(&self, x: &Point) -> Option<LatticeCell> {
        let d = self.dim();
        let origin = self.domain.origin();
        let mut base = [0i64; 3];
        let mut on_face = [false; 3];
        for axis in 0..d {
            let t = (x[axis] - origin[axis]) / self.h;
            let fl = t.floor();
            base[axis] = fl as i64;
            on_face[axis] = (t - fl).abs() < 1e-12 || (t - fl - 1.0).abs() < 1e-12;
            if (t - fl - 1.0).abs() < 1e-12 {
                base[axis] += 1;
            }
        }
        // Try the cell itself, then lower neighbors across touched faces.
        let combos = 1usize << d;
        for mask in 0..combos {
            let mut c = base;
            let mut valid = true;
            for axis in 0..d {
                if (mask >> axis) & 1 == 1 {
                    if !on_face[axis] {
                        valid = false;
                        break;
                    }
                    c[axis] -= 1;
                }
            }
            if valid && self.cell_set.contains(&c) {
                return Some(c);
            }
        }
        None
    }

    /// Point evaluation of the element function with the given free-dof
    /// coefficients: derivative `alpha`, total order <= 2.
    pub fn eval(&self, free: &DVector<f64>, x: &Point, alpha: &[usize; 3]) -> Result<f64> {
        let cell = self.locate_cell(x).ok_or_else(|| {
            Error::MeshMismatch(format!("point ({}, {}, {}) outside mesh", x[0], x[1], x[2]))
        })?;
        let globals = self.cell_global_dofs(&cell);
        let mut acc = 0.0;
        for (local, &g) in globals.iter().enumerate() {
            let coeff = match self.free_of_global[g] {
                Some(f) => free[f],
                None => 0.0,
            };
            if coeff != 0.0 {
                acc += coeff * self.shape_eval(&cell, local, x, alpha)?;
            }
        }
        Ok(acc)
    }

    pub fn mesh_id(&self) -> String {
        format!("{}|r={}|{}", self.domain.descriptor(), self.refinement, self.bc)
    }
}
