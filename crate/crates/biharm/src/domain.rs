//! Rectilinear domains: finite unions of equal-size axis-aligned lattice
//! cells, with reflection-symmetry detection and tensor-product quadrature.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;

/// Points are padded to three components; axes past `dim` are zero.
pub type Point = [f64; 3];

/// Integer lattice coordinates of a cell's low corner.
pub type LatticeCell = [i64; 3];

/// Reflection `x_axis -> 2 * plane_offset - x_axis` about an axis-aligned
/// plane. `axis` is zero-based. Applying the map twice is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionMap {
    pub axis: usize,
    pub plane_offset: f64,
}

impl ReflectionMap {
    pub fn reflect_point(&self, mut p: Point) -> Point {
        p[self.axis] = 2.0 * self.plane_offset - p[self.axis];
        p
    }
}

/// Union of `cells.len()` closed cubes of side `cell_size`; the cell with
/// lattice coordinates `c` occupies `origin + cell_size * [c, c + 1]`.
///
/// Invariants established by the constructor: dimension 2 or 3, at least one
/// cell, no duplicate cells (equal lattice cells are the only way same-size
/// lattice boxes can overlap), and face-connectivity of the cell set.
#[derive(Debug, Clone)]
pub struct RectilinearDomain {
    dim: usize,
    cell_size: f64,
    origin: Point,
    cells: Vec<LatticeCell>,
    cell_set: HashSet<LatticeCell>,
}

/// Deterministic cell/node ordering: lexicographic by (z, y, x), so the first
/// axis varies fastest.
pub fn lattice_key(c: &LatticeCell) -> (i64, i64, i64) {
    (c[2], c[1], c[0])
}

impl RectilinearDomain {
    pub fn new(
        dim: usize,
        cell_size: f64,
        origin: Point,
        mut cells: Vec<LatticeCell>,
    ) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::BadDimension(dim));
        }
        if !(cell_size > 0.0) || !cell_size.is_finite() {
            return Err(Error::Input(format!(
                "cell_size must be positive and finite, got {cell_size}"
            )));
        }
        if cells.is_empty() {
            return Err(Error::Input("domain needs at least one cell".into()));
        }
        let mut origin = origin;
        for c in cells.iter_mut() {
            if dim == 2 {
                c[2] = 0;
            }
        }
        if dim == 2 {
            origin[2] = 0.0;
        }
        cells.sort_by_key(lattice_key);
        for w in cells.windows(2) {
            if w[0] == w[1] {
                return Err(Error::OverlappingCells(format_cell(&w[0], dim)));
            }
        }
        let cell_set: HashSet<LatticeCell> = cells.iter().copied().collect();

        // Face-connectivity: breadth-first search over +-1 neighbors per axis.
        let mut seen = HashSet::new();
        let mut queue = vec![cells[0]];
        seen.insert(cells[0]);
        while let Some(c) = queue.pop() {
            for axis in 0..dim {
                for step in [-1i64, 1] {
                    let mut n = c;
                    n[axis] += step;
                    if cell_set.contains(&n) && seen.insert(n) {
                        queue.push(n);
                    }
                }
            }
        }
        if seen.len() != cells.len() {
            let missing = cells
                .iter()
                .find(|c| !seen.contains(*c))
                .expect("some cell unreachable");
            return Err(Error::DisconnectedDomain(format_cell(missing, dim)));
        }

        Ok(Self {
            dim,
            cell_size,
            origin,
            cells,
            cell_set,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    /// Cells in deterministic lattice order.
    pub fn cells(&self) -> &[LatticeCell] {
        &self.cells
    }

    pub fn contains_cell(&self, c: &LatticeCell) -> bool {
        self.cell_set.contains(c)
    }

    pub fn volume(&self) -> f64 {
        self.cells.len() as f64 * self.cell_size.powi(self.dim as i32)
    }

    /// Real coordinates of a cell's low corner.
    pub fn cell_low(&self, c: &LatticeCell) -> Point {
        let mut p = [0.0; 3];
        for axis in 0..self.dim {
            p[axis] = self.origin[axis] + self.cell_size * c[axis] as f64;
        }
        p
    }

    /// Lattice bounding box: per axis the half-open range [lo, hi) of cell
    /// indices, with hi one past the last occupied cell.
    pub fn bounding_box(&self) -> ([i64; 3], [i64; 3]) {
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for c in &self.cells {
            for axis in 0..self.dim {
                lo[axis] = lo[axis].min(c[axis]);
                hi[axis] = hi[axis].max(c[axis] + 1);
            }
        }
        for axis in self.dim..3 {
            lo[axis] = 0;
            hi[axis] = 1;
        }
        (lo, hi)
    }

    /// True when the reflected cell set equals the original (exact integer
    /// set arithmetic; the plane must sit on a half-lattice position).
    pub fn is_symmetric(&self, map: &ReflectionMap) -> bool {
        if map.axis >= self.dim {
            return false;
        }
        // Plane position in lattice units; a lattice-preserving reflection
        // needs 2 * t integral.
        let t = (map.plane_offset - self.origin[map.axis]) / self.cell_size;
        let s = 2.0 * t;
        let s_round = s.round();
        if (s - s_round).abs() > 1e-9 * s.abs().max(1.0) {
            return false;
        }
        let s = s_round as i64;
        self.cells.iter().all(|c| {
            let mut r = *c;
            r[map.axis] = s - 1 - c[map.axis];
            self.cell_set.contains(&r)
        })
    }

    /// Reflection maps the domain actually has, trying per axis the midpoint
    /// of the lattice bounding box (the only possible symmetry plane).
    pub fn symmetry_frame(&self) -> Vec<ReflectionMap> {
        let (lo, hi) = self.bounding_box();
        let mut maps = Vec::new();
        for axis in 0..self.dim {
            let mid = 0.5 * (lo[axis] + hi[axis]) as f64;
            let map = ReflectionMap {
                axis,
                plane_offset: self.origin[axis] + self.cell_size * mid,
            };
            if self.is_symmetric(&map) {
                maps.push(map);
            }
        }
        maps
    }

    /// Integrate `f` over the domain with the tensor Gauss rule applied per
    /// cell. Summation order is deterministic: cells in lattice order, quadrature
    /// nodes in tensor order (axis 0 fastest).
    pub fn integrate<F: Fn(&Point) -> f64>(&self, rule: &QuadratureRule, f: F) -> Result<f64> {
        let n = rule.points_per_axis();
        let nodes = rule.nodes();
        let weights = rule.weights();
        let h = self.cell_size;
        let vol_scale = h.powi(self.dim as i32);
        let total_pts = n.pow(self.dim as u32);
        let mut acc = 0.0;
        for cell in &self.cells {
            let low = self.cell_low(cell);
            let mut cell_acc = 0.0;
            for flat in 0..total_pts {
                let mut idx = flat;
                let mut x = [0.0f64; 3];
                let mut w = 1.0;
                for axis in 0..self.dim {
                    let i = idx % n;
                    idx /= n;
                    x[axis] = low[axis] + h * nodes[i];
                    w *= weights[i];
                }
                let v = f(&x);
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue {
                        at: format!("({:.6}, {:.6}, {:.6})", x[0], x[1], x[2]),
                    });
                }
                cell_acc += w * v;
            }
            acc += vol_scale * cell_acc;
        }
        Ok(acc)
    }

    /// Short descriptor used in reports and mesh ids.
    pub fn descriptor(&self) -> String {
        format!(
            "{}d:{}cells:h0={}:origin=({},{},{})",
            self.dim,
            self.cells.len(),
            self.cell_size,
            self.origin[0],
            self.origin[1],
            self.origin[2]
        )
    }

    /// Parse the text format documented in the README:
    ///
    /// ```text
    /// # comment
    /// dimension = 2
    /// cell_size = 1.0
    /// offset = (-0.5, -0.5)
    /// cells = (0,0) (1,0)
    /// cells = (0,1)
    /// ```
    ///
    /// `offset` is optional (defaults to the lattice origin at zero);
    /// repeated `cells` lines accumulate. Unknown keys are rejected.
    pub fn from_spec_str(text: &str) -> Result<Self> {
        let mut dimension: Option<usize> = None;
        let mut cell_size: Option<f64> = None;
        let mut offset: Option<Vec<f64>> = None;
        let mut cells: Vec<Vec<i64>> = Vec::new();
        let mut cells_line = 0usize;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "dimension" => {
                    let d: usize = value.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        msg: format!("dimension must be an integer, got `{value}`"),
                    })?;
                    dimension = Some(d);
                }
                "cell_size" => {
                    let h: f64 = value.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        msg: format!("cell_size must be a number, got `{value}`"),
                    })?;
                    cell_size = Some(h);
                }
                "offset" => {
                    let nums = parse_number_list(value, line_no)?;
                    offset = Some(nums);
                }
                "cells" => {
                    cells_line = line_no;
                    for tuple in parse_tuple_list(value, line_no)? {
                        cells.push(tuple);
                    }
                }
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("unknown key `{other}`"),
                    });
                }
            }
        }

        let dim = dimension.ok_or_else(|| Error::Input("missing `dimension`".into()))?;
        if dim != 2 && dim != 3 {
            return Err(Error::BadDimension(dim));
        }
        let h = cell_size.ok_or_else(|| Error::Input("missing `cell_size`".into()))?;
        let mut origin = [0.0f64; 3];
        if let Some(off) = offset {
            if off.len() != dim {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("offset has {} components, expected {dim}", off.len()),
                });
            }
            for (axis, v) in off.iter().enumerate() {
                origin[axis] = *v;
            }
        }
        let mut lattice = Vec::with_capacity(cells.len());
        for tuple in cells {
            if tuple.len() != dim {
                return Err(Error::Parse {
                    line: cells_line,
                    msg: format!("cell tuple has {} components, expected {dim}", tuple.len()),
                });
            }
            let mut c = [0i64; 3];
            for (axis, v) in tuple.iter().enumerate() {
                c[axis] = *v;
            }
            lattice.push(c);
        }
        Self::new(dim, h, origin, lattice)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_spec_str(&text)
    }
}

fn format_cell(c: &LatticeCell, dim: usize) -> String {
    if dim == 2 {
        format!("({}, {})", c[0], c[1])
    } else {
        format!("({}, {}, {})", c[0], c[1], c[2])
    }
}

/// Numbers separated by commas or whitespace, parentheses optional.
fn parse_number_list(value: &str, line: usize) -> Result<Vec<f64>> {
    let cleaned = value.replace(['(', ')'], " ");
    let mut out = Vec::new();
    for tok in cleaned.split([',', ' ', '\t']).filter(|t| !t.is_empty()) {
        let v: f64 = tok.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("expected a number, got `{tok}`"),
        })?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::Parse {
            line,
            msg: "empty value".into(),
        });
    }
    Ok(out)
}

/// Integer tuples like `(0,0) (1,0)`; a bare `0,0` single tuple also parses.
fn parse_tuple_list(value: &str, line: usize) -> Result<Vec<Vec<i64>>> {
    let mut out = Vec::new();
    if value.contains('(') {
        let mut rest = value;
        while let Some(start) = rest.find('(') {
            let end = rest[start..].find(')').ok_or_else(|| Error::Parse {
                line,
                msg: "unclosed `(` in cell list".into(),
            })? + start;
            let inner = &rest[start + 1..end];
            out.push(parse_int_tuple(inner, line)?);
            rest = &rest[end + 1..];
        }
        let leftover = rest.replace([',', ' ', '\t'], "");
        if !leftover.is_empty() {
            return Err(Error::Parse {
                line,
                msg: format!("trailing tokens `{}` after cell tuples", leftover.trim()),
            });
        }
    } else {
        out.push(parse_int_tuple(value, line)?);
    }
    Ok(out)
}

fn parse_int_tuple(inner: &str, line: usize) -> Result<Vec<i64>> {
    let mut tuple = Vec::new();
    for tok in inner.split([',', ' ', '\t']).filter(|t| !t.is_empty()) {
        let v: i64 = tok.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("expected an integer, got `{tok}`"),
        })?;
        tuple.push(v);
    }
    if tuple.is_empty() {
        return Err(Error::Parse {
            line,
            msg: "empty cell tuple".into(),
        });
    }
    Ok(tuple)
}
