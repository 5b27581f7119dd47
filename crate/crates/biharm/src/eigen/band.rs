//! Banded Cholesky factorization. Lattice meshes numbered lexicographically
//! give stiffness/mass matrices with small semi-bandwidth, so an in-band
//! LL^T factor is cheap (O(n b^2)) and fill-free.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::fem::assemble::SparseSymMatrix;

/// Symmetric matrix stored by rows within a fixed semi-bandwidth.
/// Row i holds columns i-hb ..= i at data[i*(hb+1) + (j - i + hb)].
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    hb: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn from_sparse(a: &SparseSymMatrix) -> Self {
        let n = a.n();
        let hb = a.band_width();
        let mut data = vec![0.0; n * (hb + 1)];
        for (i, j, v) in a.entries() {
            if j <= i {
                data[i * (hb + 1) + (j + hb - i)] = v;
            }
        }
        Self { n, hb, data }
    }

    /// self += tau * m. Requires band(m) <= band(self).
    pub fn axpy_sparse(&mut self, tau: f64, m: &SparseSymMatrix) {
        assert_eq!(self.n, m.n());
        assert!(m.band_width() <= self.hb, "shift target has wider band");
        for (i, j, v) in m.entries() {
            if j <= i {
                self.data[i * (self.hb + 1) + (j + self.hb - i)] += tau * v;
            }
        }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(j <= i && i - j <= self.hb);
        self.data[i * (self.hb + 1) + (j + self.hb - i)]
    }

    pub fn semi_bandwidth(&self) -> usize {
        self.hb
    }
}

/// In-place banded LL^T factor of a positive definite band matrix.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    hb: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn factor(a: &BandMatrix) -> Result<Self> {
        let (n, hb) = (a.n, a.hb);
        let w = hb + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            let jmin = i.saturating_sub(hb);
            for j in jmin..=i {
                let kmin = jmin.max(j.saturating_sub(hb));
                let mut s = a.get(i, j);
                for k in kmin..j {
                    s -= l[i * w + (k + hb - i)] * l[j * w + (k + hb - j)];
                }
                if j < i {
                    let piv = l[j * w + hb];
                    l[i * w + (j + hb - i)] = s / piv;
                } else {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::FactorizationFailed(format!(
                            "nonpositive pivot {s:.3e} at row {i} of {n}"
                        )));
                    }
                    l[i * w + hb] = s.sqrt();
                }
            }
        }
        Ok(Self { n, hb, l })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let (n, hb, w) = (self.n, self.hb, self.hb + 1);
        // forward: L y = b
        for i in 0..n {
            let jmin = i.saturating_sub(hb);
            let mut s = b[i];
            for j in jmin..i {
                s -= self.l[i * w + (j + hb - i)] * b[j];
            }
            b[i] = s / self.l[i * w + hb];
        }
        // backward: L^T x = y
        for i in (0..n).rev() {
            let jmax = (i + hb).min(n - 1);
            let mut s = b[i];
            for j in (i + 1)..=jmax {
                s -= self.l[j * w + (i + hb - j)] * b[j];
            }
            b[i] = s / self.l[i * w + hb];
        }
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = b.clone();
        self.solve_in_place(x.as_mut_slice());
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn sparse_from_dense(d: &DMatrix<f64>) -> SparseSymMatrix {
        let rows: Vec<BTreeMap<usize, f64>> = (0..d.nrows())
            .map(|i| {
                (0..d.ncols())
                    .filter(|&j| d[(i, j)] != 0.0)
                    .map(|j| (j, d[(i, j)]))
                    .collect()
            })
            .collect();
        SparseSymMatrix::from_row_maps(rows)
    }

    fn random_banded_spd(n: usize, hb: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(hb)..=i {
                let v = rng.gen::<f64>() - 0.5;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
            m[(i, i)] += hb as f64 + 2.0; // diagonal dominance
        }
        m
    }

    #[test]
    fn banded_solve_matches_dense_solve() {
        for (n, hb, seed) in [(12usize, 2usize, 1u64), (40, 5, 2), (25, 7, 3)] {
            let dense = random_banded_spd(n, hb, seed);
            let sp = sparse_from_dense(&dense);
            let band = BandMatrix::from_sparse(&sp);
            assert_eq!(band.semi_bandwidth(), hb);
            let chol = BandCholesky::factor(&band).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
            let b = DVector::from_fn(n, |_, _| rng.gen::<f64>());
            let x = chol.solve(&b);
            let x_ref = nalgebra::Cholesky::new(dense.clone()).unwrap().solve(&b);
            let err = (&x - &x_ref).norm() / x_ref.norm();
            assert!(err < 1e-12, "n={n} hb={hb}: rel err {err}");
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let mut d = DMatrix::identity(5, 5);
        d[(3, 3)] = -1.0;
        let band = BandMatrix::from_sparse(&sparse_from_dense(&d));
        match BandCholesky::factor(&band) {
            Err(Error::FactorizationFailed(_)) => {}
            other => panic!("expected factorization failure, got {other:?}"),
        }
    }

    #[test]
    fn shift_changes_only_the_scaled_entries() {
        let d = random_banded_spd(10, 3, 9);
        let sp = sparse_from_dense(&d);
        let mut band = BandMatrix::from_sparse(&sp);
        band.axpy_sparse(0.5, &sp);
        for i in 0..10usize {
            for j in i.saturating_sub(3)..=i {
                assert!((band.get(i, j) - 1.5 * d[(i, j)]).abs() < 1e-14);
            }
        }
    }
}
