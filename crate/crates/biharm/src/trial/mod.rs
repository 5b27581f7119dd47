//! Analytic trig trial families and the hybrid subspaces built from them.
//!
//! Two constructions produce small families of plane waves tied to a
//! reference eigenvalue lambda (so each member satisfies the fourth-order
//! eigenfunction identity pointwise):
//! * an orthogonal sine family of d members whose directions are zeros of
//!   odd sphere maps (existence by Borsuk-Ulam, search in [`sphere`]);
//! * a d+1 member sin/cos family that trades the zero search for domain
//!   reflection symmetries.
//!
//! Trig members stay analytic throughout: mixed element-trig inner products
//! are evaluated by per-cell quadrature with the trig factor exact, never by
//! interpolating the wave onto the element space, so the only error in the
//! verification chain is quadrature, and it is measured.

pub mod sphere;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Point, RectilinearDomain, ReflectionMap};
use crate::eigen::{sym_eigen_ascending, SpectrumResult};
use crate::error::{Error, Result};
use crate::fem::assemble::assemble_pair;
use crate::fem::hermite::hermite1d_scaled;
use crate::fem::mesh::MeshDofSystem;
use crate::fem::ScalarField;
use crate::quadrature::QuadratureRule;
pub use sphere::find_odd_zero;

/// Points per axis for element-times-trig quadrature on refined cells. The
/// element factor has degree 3 per axis and the wave is slowly varying at
/// cell scale, so 8 Gauss points leave the product at the rounding floor.
pub const MIXED_POINTS: usize = 8;

/// Relative bound each required-orthogonal pair must meet.
pub const ORTHO_REL_BOUND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Sin,
    Cos,
}

/// One plane wave trig(omega . (x - center)). Derivatives of any order are
/// quarter-turn phase rotations, so they are evaluated exactly rather than
/// by finite differences.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrigMember {
    pub omega: [f64; 3],
    pub center: [f64; 3],
    pub phase: Phase,
}

impl TrigMember {
    pub fn new(omega: [f64; 3], center: [f64; 3], phase: Phase) -> Self {
        Self {
            omega,
            center,
            phase,
        }
    }

    /// The wave's profile differentiated `order` times.
    fn wave(&self, s: f64, order: usize) -> f64 {
        match (self.phase, order % 4) {
            (Phase::Sin, 0) => s.sin(),
            (Phase::Sin, 1) => s.cos(),
            (Phase::Sin, 2) => -s.sin(),
            (Phase::Sin, 3) => -s.cos(),
            (Phase::Cos, 0) => s.cos(),
            (Phase::Cos, 1) => -s.sin(),
            (Phase::Cos, 2) => -s.cos(),
            (Phase::Cos, 3) => s.sin(),
            _ => unreachable!(),
        }
    }

    /// |omega|^4, the eigenvalue this member realizes under the squared
    /// Laplacian.
    pub fn omega_mag4(&self) -> f64 {
        let q = self.omega.iter().map(|w| w * w).sum::<f64>();
        q * q
    }

    /// Sum of all fourth derivatives paired (i, i, j, j): the squared
    /// Laplacian, evaluated analytically.
    pub fn bilaplacian(&self, x: &Point, dim: usize) -> f64 {
        let mut acc = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let mut alpha = [0usize; 3];
                alpha[i] += 2;
                alpha[j] += 2;
                acc += self.deriv(x, &alpha);
            }
        }
        acc
    }
}

impl ScalarField for TrigMember {
    fn deriv(&self, x: &Point, alpha: &[usize; 3]) -> f64 {
        let mut s = 0.0;
        let mut coef = 1.0;
        let mut total = 0usize;
        for i in 0..3 {
            s += self.omega[i] * (x[i] - self.center[i]);
            for _ in 0..alpha[i] {
                coef *= self.omega[i];
            }
            total += alpha[i];
        }
        if coef == 0.0 {
            return 0.0;
        }
        coef * self.wave(s, total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    BorsukSine,
    SymmetricTrig,
}

/// A constructed trial family with its measured L2 inner products.
///
/// `ortho_residuals[i][j]` holds |(v_i, v_j)| for every pair (the diagonal
/// is the squared norm); `required_pairs` lists the pairs the construction
/// promises orthogonal, each verified against
/// `ORTHO_REL_BOUND * |v_i| * |v_j|` before the family is returned.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialFamily {
    pub kind: FamilyKind,
    pub lambda: f64,
    pub members: Vec<TrigMember>,
    pub member_norms: Vec<f64>,
    pub ortho_residuals: Vec<Vec<f64>>,
    pub required_pairs: Vec<(usize, usize)>,
}

impl TrialFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Family with no members; restricting the hybrid machinery to the
    /// element part alone.
    pub fn empty(lambda: f64) -> Self {
        Self {
            kind: FamilyKind::BorsukSine,
            lambda,
            members: Vec::new(),
            member_norms: Vec::new(),
            ortho_residuals: Vec::new(),
            required_pairs: Vec::new(),
        }
    }

    /// Worst required-pair residual relative to the norm product.
    pub fn worst_required_residual(&self) -> f64 {
        self.required_pairs
            .iter()
            .map(|&(i, j)| {
                let scale = self.member_norms[i] * self.member_norms[j];
                self.ortho_residuals[i][j] / scale.max(f64::MIN_POSITIVE)
            })
            .fold(0.0f64, f64::max)
    }
}

fn check_lambda(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::BadLambda(lambda));
    }
    // |omega| = lambda^(1/4) by construction, so |omega|^4 = lambda to a
    // couple of ulps; the family invariant asserts 1e-12 relative.
    Ok(lambda.sqrt().sqrt())
}

/// Measure all pairwise L2 products, then enforce the required ones.
fn finish_family(
    kind: FamilyKind,
    lambda: f64,
    members: Vec<TrigMember>,
    required_pairs: Vec<(usize, usize)>,
    dom: &RectilinearDomain,
) -> Result<TrialFamily> {
    let rule = QuadratureRule::trig_default();
    let m = members.len();
    let mut prods = vec![vec![0.0f64; m]; m];
    for i in 0..m {
        for j in i..m {
            let (vi, vj) = (&members[i], &members[j]);
            let p = dom.integrate(&rule, |x| vi.value(x) * vj.value(x))?;
            prods[i][j] = p;
            prods[j][i] = p;
        }
    }
    let member_norms: Vec<f64> = (0..m).map(|i| prods[i][i].max(0.0).sqrt()).collect();
    let ortho_residuals: Vec<Vec<f64>> = prods
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).collect())
        .collect();
    for &(i, j) in &required_pairs {
        let bound = ORTHO_REL_BOUND * member_norms[i] * member_norms[j];
        if ortho_residuals[i][j] > bound {
            return Err(Error::OrthogonalityDefect {
                residual: ortho_residuals[i][j],
                bound,
            });
        }
    }
    Ok(TrialFamily {
        kind,
        lambda,
        members,
        member_norms,
        ortho_residuals,
        required_pairs,
    })
}

/// d mutually L2-orthogonal sine waves sin(omega_l . x) with |omega_l|^4 =
/// lambda. The first direction is the (normalized) seed; each later one is
/// a zero of the odd sphere map collecting inner products against the
/// members built so far, so orthogonality is by construction.
pub fn borsuk_family(
    dom: &RectilinearDomain,
    lambda: f64,
    seed_dir: [f64; 3],
) -> Result<TrialFamily> {
    let scale = check_lambda(lambda)?;
    let d = dom.dim();
    let mut seed = seed_dir;
    if d == 2 {
        seed[2] = 0.0;
    }
    let norm = seed.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    for c in &mut seed {
        *c /= norm;
    }

    let member_at = |theta: &[f64; 3]| {
        TrigMember::new(
            [theta[0] * scale, theta[1] * scale, theta[2] * scale],
            [0.0; 3],
            Phase::Sin,
        )
    };
    let rule = QuadratureRule::trig_default();
    let mut members = vec![member_at(&seed)];
    let zero_tol = 1e-11 * dom.volume();
    for _ in 1..d {
        let built = members.clone();
        let g = |theta: &[f64; 3]| -> Vec<f64> {
            let cand = member_at(theta);
            built
                .iter()
                .map(|v| {
                    dom.integrate(&rule, |x| v.value(x) * cand.value(x))
                        .unwrap_or(f64::NAN)
                })
                .collect()
        };
        let theta = find_odd_zero(&g, d, zero_tol)?;
        members.push(member_at(&theta));
    }
    let mut required = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            required.push((i, j));
        }
    }
    finish_family(FamilyKind::BorsukSine, lambda, members, required, dom)
}

/// The d+1 member family sin/cos along a distinguished axis plus one sine
/// per remaining axis, each odd across that axis's reflection plane. The
/// distinguished axis is the one the frame leaves uncovered (any axis when
/// the frame covers all of them); sines on covered axes take coordinates
/// relative to the plane offset so the required pairs vanish by symmetry.
pub fn symmetric_family(
    dom: &RectilinearDomain,
    lambda: f64,
    frame: &[ReflectionMap],
) -> Result<TrialFamily> {
    let scale = check_lambda(lambda)?;
    let d = dom.dim();
    let mut plane: Vec<Option<f64>> = vec![None; d];
    for map in frame {
        if map.axis >= d {
            return Err(Error::SymmetryMissing { axis: map.axis + 1 });
        }
        if !dom.is_symmetric(map) {
            return Err(Error::SymmetryMissing { axis: map.axis + 1 });
        }
        if plane[map.axis].is_none() {
            plane[map.axis] = Some(map.plane_offset);
        }
    }
    let uncovered: Vec<usize> = (0..d).filter(|&i| plane[i].is_none()).collect();
    let distinguished = match uncovered.len() {
        0 => 0,
        1 => uncovered[0],
        _ => return Err(Error::SymmetryMissing { axis: uncovered[1] + 1 }),
    };

    let axis_member = |axis: usize, phase: Phase, offset: f64| {
        let mut omega = [0.0; 3];
        omega[axis] = scale;
        let mut center = [0.0; 3];
        center[axis] = offset;
        TrigMember::new(omega, center, phase)
    };
    let mut members = vec![
        axis_member(distinguished, Phase::Sin, 0.0),
        axis_member(distinguished, Phase::Cos, 0.0),
    ];
    for axis in 0..d {
        if axis != distinguished {
            members.push(axis_member(axis, Phase::Sin, plane[axis].unwrap()));
        }
    }

    // the sin/cos pair on the distinguished axis is exempt by design
    let m = members.len();
    let mut required = Vec::new();
    for j in 2..m {
        required.push((0, j));
        required.push((1, j));
    }
    for i in 2..m {
        for j in (i + 1)..m {
            required.push((i, j));
        }
    }
    finish_family(FamilyKind::SymmetricTrig, lambda, members, required, dom)
}

/// Residuals of the two identities every member satisfies analytically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityReport {
    /// max over sample points of |bilaplacian(v) - lambda v|, per member.
    pub pointwise_max: Vec<f64>,
    pub sample_points: usize,
    /// relative Hessian-energy identity residual per random combination.
    pub combo_rel: Vec<f64>,
}

impl IdentityReport {
    pub fn worst_pointwise(&self) -> f64 {
        self.pointwise_max.iter().fold(0.0f64, |a, &b| a.max(b))
    }

    pub fn worst_combo(&self) -> f64 {
        self.combo_rel.iter().fold(0.0f64, |a, &b| a.max(b))
    }
}

fn sample_point(dom: &RectilinearDomain, rng: &mut ChaCha8Rng) -> Point {
    let cells = dom.cells();
    let cell = cells[rng.gen_range(0..cells.len())];
    let low = dom.cell_low(&cell);
    let h = dom.cell_size();
    let mut x = [0.0; 3];
    for i in 0..dom.dim() {
        x[i] = low[i] + rng.gen::<f64>() * h;
    }
    x
}

/// Checks, at fixed seeded samples, that each member solves the fourth-order
/// eigenvalue equation pointwise, and that random combinations satisfy the
/// Hessian-energy identity energy = lambda * mass in quadrature.
pub fn check_identities(fam: &TrialFamily, dom: &RectilinearDomain) -> Result<IdentityReport> {
    let lambda = fam.lambda;
    let d = dom.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1dc5);
    let n_points = 100;

    let mut pointwise_max = vec![0.0f64; fam.len()];
    for _ in 0..n_points {
        let x = sample_point(dom, &mut rng);
        for (l, v) in fam.members.iter().enumerate() {
            let res = (v.bilaplacian(&x, d) - lambda * v.value(&x)).abs();
            pointwise_max[l] = pointwise_max[l].max(res);
        }
    }

    let rule = QuadratureRule::trig_default();
    let pairs = second_derivative_pairs(d);
    let mut combo_rel = Vec::with_capacity(20);
    for _ in 0..20 {
        let mut c: Vec<f64> = (0..fam.len()).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let nrm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nrm < 1e-3 {
            combo_rel.push(0.0);
            continue;
        }
        for v in &mut c {
            *v /= nrm;
        }
        let energy = dom.integrate(&rule, |x| {
            let mut acc = 0.0;
            for &(alpha, w) in &pairs {
                let dd: f64 = fam
                    .members
                    .iter()
                    .zip(&c)
                    .map(|(v, &cl)| cl * v.deriv(x, &alpha))
                    .sum();
                acc += w * dd * dd;
            }
            acc
        })?;
        let mass = dom.integrate(&rule, |x| {
            let v: f64 = fam
                .members
                .iter()
                .zip(&c)
                .map(|(v, &cl)| cl * v.value(x))
                .sum();
            v * v
        })?;
        combo_rel.push((energy - lambda * mass).abs() / (lambda * mass));
    }

    Ok(IdentityReport {
        pointwise_max,
        sample_points: n_points,
        combo_rel,
    })
}

/// Second-derivative multi-indices with their multiplicity in the Hessian
/// sum (off-diagonal pairs count twice).
fn second_derivative_pairs(d: usize) -> Vec<([usize; 3], f64)> {
    let mut out = Vec::new();
    for i in 0..d {
        for j in i..d {
            let mut alpha = [0usize; 3];
            alpha[i] += 1;
            alpha[j] += 1;
            out.push((alpha, if i == j { 1.0 } else { 2.0 }));
        }
    }
    out
}

/// A member of the hybrid space: element coefficients plus trig weights.
#[derive(Debug, Clone)]
pub struct HybridVector {
    pub fem: DVector<f64>,
    pub trig: Vec<f64>,
}

impl HybridVector {
    pub fn is_zero(&self) -> bool {
        self.fem.iter().all(|&v| v == 0.0) && self.trig.iter().all(|&v| v == 0.0)
    }

    /// Pointwise derivative (total order <= 2 on the element part).
    pub fn eval(
        &self,
        mesh: &MeshDofSystem,
        fam: &TrialFamily,
        x: &Point,
        alpha: &[usize; 3],
    ) -> Result<f64> {
        let mut acc = mesh.eval(&self.fem, x, alpha)?;
        for (v, &c) in fam.members.iter().zip(&self.trig) {
            acc += c * v.deriv(x, alpha);
        }
        Ok(acc)
    }
}

/// Restrictions of the Hessian-energy form and of the L2 form to the span
/// of `vectors` (free-dof coefficient lists on `mesh`) and the family's
/// members. Element-element blocks come from the assembled matrices (exact
/// for element functions); element-trig blocks from per-refined-cell
/// quadrature; trig-trig blocks from per-base-cell quadrature.
pub fn hybrid_pencil(
    mesh: &MeshDofSystem,
    vectors: &[DVector<f64>],
    fam: &TrialFamily,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let k = vectors.len();
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != mesh.free_dofs() {
            return Err(Error::MeshMismatch(format!(
                "vector {i} has {} coefficients, mesh has {} free dofs",
                v.len(),
                mesh.free_dofs()
            )));
        }
    }
    let mfam = fam.len();
    let n = k + mfam;
    let mut hmat = DMatrix::zeros(n, n);
    let mut gmat = DMatrix::zeros(n, n);

    let (a, mass) = assemble_pair(mesh);
    for i in 0..k {
        for j in i..k {
            let hv = a.quad_form(&vectors[i], &vectors[j]);
            let gv = mass.quad_form(&vectors[i], &vectors[j]);
            hmat[(i, j)] = hv;
            hmat[(j, i)] = hv;
            gmat[(i, j)] = gv;
            gmat[(j, i)] = gv;
        }
    }

    if mfam > 0 {
        let d = mesh.dim();
        let pairs = second_derivative_pairs(d);
        let dom = &mesh.domain;

        if k > 0 {
            mixed_blocks(mesh, vectors, fam, &pairs, &mut hmat, &mut gmat)?;
        }

        let rule = QuadratureRule::trig_default();
        for i in 0..mfam {
            for j in i..mfam {
                let (vi, vj) = (&fam.members[i], &fam.members[j]);
                let gv = dom.integrate(&rule, |x| vi.value(x) * vj.value(x))?;
                let hv = dom.integrate(&rule, |x| {
                    pairs
                        .iter()
                        .map(|&(alpha, w)| w * vi.deriv(x, &alpha) * vj.deriv(x, &alpha))
                        .sum()
                })?;
                gmat[(k + i, k + j)] = gv;
                gmat[(k + j, k + i)] = gv;
                hmat[(k + i, k + j)] = hv;
                hmat[(k + j, k + i)] = hv;
            }
        }
    }
    Ok((hmat, gmat))
}

/// Element-trig inner products by tensor quadrature over every refined cell.
///
/// All refined cells are congruent, so the element shape values on the
/// quadrature grid depend only on the in-cell offset; they are tabulated
/// once and the per-cell work reduces to coefficient gathers and dot
/// products. Only the trig factor is re-evaluated at every global point.
fn mixed_blocks(
    mesh: &MeshDofSystem,
    vectors: &[DVector<f64>],
    fam: &TrialFamily,
    pairs: &[([usize; 3], f64)],
    hmat: &mut DMatrix<f64>,
    gmat: &mut DMatrix<f64>,
) -> Result<()> {
    let k = vectors.len();
    let mfam = fam.len();
    let d = mesh.dim();
    let h = mesh.h;
    let dpn = mesh.dofs_per_node;
    let rule = QuadratureRule::new(MIXED_POINTS);
    let nq = rule.points_per_axis();
    let globals: Vec<DVector<f64>> = vectors.iter().map(|v| mesh.to_global(v)).collect();
    let nloc = mesh.local_dofs();
    let nalpha = pairs.len() + 1; // value first, then second derivatives

    // axis1d[idx][ord][q]: one-dimensional factor per axis dof and order.
    let mut axis1d = [[[0.0f64; MIXED_POINTS]; 3]; 4];
    for (idx, by_ord) in axis1d.iter_mut().enumerate() {
        for (ord, row) in by_ord.iter_mut().enumerate() {
            for (q, slot) in row.iter_mut().enumerate() {
                *slot = hermite1d_scaled(idx, ord, rule.nodes()[q], h);
            }
        }
    }

    // flatten the tensor grid; axis 0 varies fastest
    let npts = nq.pow(d as u32);
    let mut qdigits = vec![[0usize; 3]; npts];
    for (lin, digits) in qdigits.iter_mut().enumerate() {
        let mut rest = lin;
        for axis in 0..d {
            digits[axis] = rest % nq;
            rest /= nq;
        }
    }
    let mut offsets = vec![[0.0f64; 3]; npts];
    let mut wq = vec![0.0f64; npts];
    let cell_weight = h.powi(d as i32);
    for lin in 0..npts {
        let mut w = cell_weight;
        for axis in 0..d {
            offsets[lin][axis] = rule.nodes()[qdigits[lin][axis]] * h;
            w *= rule.weights()[qdigits[lin][axis]];
        }
        wq[lin] = w;
    }
    // shp[(lin * nloc + local) * nalpha + a], a = 0 the value, then `pairs`
    let mut shp = vec![0.0f64; npts * nloc * nalpha];
    for lin in 0..npts {
        for local in 0..nloc {
            let corner = local / dpn;
            let kind = local % dpn;
            let base = (lin * nloc + local) * nalpha;
            for a in 0..nalpha {
                let alpha = if a == 0 { [0usize; 3] } else { pairs[a - 1].0 };
                let mut v = 1.0;
                for axis in 0..d {
                    let idx = 2 * ((corner >> axis) & 1) + ((kind >> axis) & 1);
                    v *= axis1d[idx][alpha[axis]][qdigits[lin][axis]];
                }
                shp[base + a] = v;
            }
        }
    }

    let mut coefs = vec![0.0f64; k * nloc];
    let mut uvals = vec![0.0f64; k * nalpha];
    for cell in &mesh.cells {
        let gdofs = mesh.cell_global_dofs(cell);
        for (vi, global) in globals.iter().enumerate() {
            for (local, &g) in gdofs.iter().enumerate() {
                coefs[vi * nloc + local] = global[g];
            }
        }
        let low = mesh.node_coord(cell);
        for lin in 0..npts {
            let mut x = [0.0; 3];
            for axis in 0..d {
                x[axis] = low[axis] + offsets[lin][axis];
            }
            let w = wq[lin];
            let pt = &shp[lin * nloc * nalpha..(lin + 1) * nloc * nalpha];
            for vi in 0..k {
                for a in 0..nalpha {
                    let mut acc = 0.0;
                    for local in 0..nloc {
                        acc += coefs[vi * nloc + local] * pt[local * nalpha + a];
                    }
                    uvals[vi * nalpha + a] = acc;
                }
            }
            for (mj, member) in fam.members.iter().enumerate() {
                let tval = member.value(&x);
                for vi in 0..k {
                    gmat[(vi, k + mj)] += w * uvals[vi * nalpha] * tval;
                    let mut energy = 0.0;
                    for (p, &(alpha, pw)) in pairs.iter().enumerate() {
                        energy += pw * uvals[vi * nalpha + p + 1] * member.deriv(&x, &alpha);
                    }
                    hmat[(vi, k + mj)] += w * energy;
                }
            }
        }
    }
    for vi in 0..k {
        for mj in 0..mfam {
            gmat[(k + mj, vi)] = gmat[(vi, k + mj)];
            hmat[(k + mj, vi)] = hmat[(vi, k + mj)];
        }
    }
    Ok(())
}

/// L2 Gram matrix of the hybrid set (element vectors then trig members).
pub fn hybrid_gram(
    vectors: &[DVector<f64>],
    fam: &TrialFamily,
    mesh: &MeshDofSystem,
) -> Result<DMatrix<f64>> {
    Ok(hybrid_pencil(mesh, vectors, fam)?.1)
}

/// Largest Rayleigh quotient of the Hessian form over the hybrid span,
/// computed as the top eigenvalue of the restricted pencil after whitening
/// by the Gram matrix. Rank deficiency (at the 1e-8 relative threshold) is
/// an error: the span must have full dimension for the bound to count.
pub fn sup_over_vectors(
    mesh: &MeshDofSystem,
    vectors: &[DVector<f64>],
    fam: &TrialFamily,
) -> Result<f64> {
    let (hmat, gmat) = hybrid_pencil(mesh, vectors, fam)?;
    sup_of_pencil(&hmat, &gmat)
}

pub fn sup_of_pencil(hmat: &DMatrix<f64>, gmat: &DMatrix<f64>) -> Result<f64> {
    let n = gmat.nrows();
    if n == 0 {
        return Err(Error::RankDeficientSubspace {
            rank: 0,
            expected: 0,
        });
    }
    let (svals, svecs) = sym_eigen_ascending(gmat);
    let smax = svals.last().copied().unwrap_or(0.0);
    let rank = svals.iter().filter(|&&s| s > 1e-8 * smax).count();
    if rank < n {
        return Err(Error::RankDeficientSubspace { rank, expected: n });
    }
    let mut white = svecs;
    for j in 0..n {
        let inv = 1.0 / svals[j].sqrt();
        for i in 0..n {
            white[(i, j)] *= inv;
        }
    }
    let reduced = white.transpose() * hmat * &white;
    let sym = 0.5 * (&reduced + reduced.transpose());
    let (vals, _) = sym_eigen_ascending(&sym);
    Ok(*vals.last().unwrap())
}

/// Sup of the Rayleigh quotient over the span of the first k eigenvectors
/// of a clamped spectrum plus the family members.
pub fn subspace_sup_rayleigh(
    spectrum: &SpectrumResult,
    fam: &TrialFamily,
    mesh: &MeshDofSystem,
    k: usize,
) -> Result<f64> {
    if spectrum.mesh_id != mesh.mesh_id() {
        return Err(Error::MeshMismatch(format!(
            "spectrum from '{}' used with mesh '{}'",
            spectrum.mesh_id,
            mesh.mesh_id()
        )));
    }
    if spectrum.eigenvectors.len() < k {
        return Err(Error::CountTooLarge {
            count: k,
            free: spectrum.eigenvectors.len(),
        });
    }
    sup_over_vectors(mesh, &spectrum.eigenvectors[..k], fam)
}
