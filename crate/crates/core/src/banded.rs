//! Banded Cholesky and a cyclic-banded solver.
//!
//! A symmetric circulant with half-bandwidth `k` splits as `G = G̃ + U S Uᵀ`
//! where `G̃` keeps the band `|i - j| <= k` and the low-rank term carries the
//! wrap-around corners. Solving through the band factorization keeps small
//! solution entries accurate relative to their own size, which a DFT solve
//! (absolute accuracy `ε max|x|`) cannot.

use nalgebra::{DMatrix, DVector};

use crate::circulant::CirculantMatrix;
use crate::error::{Error, Result};

/// `L Lᵀ` factorization of a symmetric positive definite band matrix.
#[derive(Debug, Clone)]
pub(crate) struct BandCholesky {
    n: usize,
    bw: usize,
    // row i holds L[i][i - bw ..= i] at offsets 0..=bw
    l: Vec<f64>,
}

impl BandCholesky {
    pub(crate) fn factor(n: usize, bw: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        let at = |i: usize, j: usize| i * w + (j + bw - i);
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let mut s = entry(i, j);
                let k0 = j0.max(j.saturating_sub(bw));
                for k in k0..j {
                    s -= l[at(i, k)] * l[at(j, k)];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite { lambda_min: s });
                    }
                    l[at(i, i)] = s.sqrt();
                } else {
                    l[at(i, j)] = s / l[at(j, j)];
                }
            }
        }
        Ok(Self { n, bw, l })
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.l[i * (self.bw + 1) + (j + self.bw - i)]
    }

    pub(crate) fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(self.bw)..i {
                s -= self.get(i, k) * b[k];
            }
            b[i] = s / self.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..(i + 1 + self.bw).min(n) {
                s -= self.get(k, i) * b[k];
            }
            b[i] = s / self.get(i, i);
        }
    }
}

/// Solver for a symmetric positive definite circulant with half-bandwidth
/// `bw`, with `n > 2 bw`.
#[derive(Debug, Clone)]
pub(crate) struct CyclicBandSolver {
    n: usize,
    band: BandCholesky,
    // indices carried by the corner correction
    idx: Vec<usize>,
    // S restricted to idx
    s: DMatrix<f64>,
    // G̃^{-1} U
    y: Vec<Vec<f64>>,
    // (I + S Uᵀ G̃^{-1} U), LU-factored
    m: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl CyclicBandSolver {
    pub(crate) fn new(matrix: &CirculantMatrix, bw: usize) -> Result<Self> {
        let n = matrix.dim();
        if n <= 2 * bw {
            return Err(Error::StencilOverlap { lags: bw, dim: n });
        }
        let band = BandCholesky::factor(n, bw, |i, j| matrix.entry(i, j))?;
        let idx: Vec<usize> = (0..bw).chain(n - bw..n).collect();
        let k = idx.len();
        let s = DMatrix::from_fn(k, k, |a, b| {
            let (i, j) = (idx[a], idx[b]);
            if i.abs_diff(j) > bw {
                matrix.entry(i, j)
            } else {
                0.0
            }
        });
        let y: Vec<Vec<f64>> = idx
            .iter()
            .map(|&i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                band.solve_in_place(&mut e);
                e
            })
            .collect();
        let uty = DMatrix::from_fn(k, k, |a, b| y[b][idx[a]]);
        let m = (DMatrix::identity(k, k) + &s * uty).lu();
        Ok(Self {
            n,
            band,
            idx,
            s,
            y,
            m,
        })
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: b.len(),
            });
        }
        let mut z = b.to_vec();
        self.band.solve_in_place(&mut z);
        if self.idx.is_empty() {
            return Ok(z);
        }
        let utz = DVector::from_iterator(self.idx.len(), self.idx.iter().map(|&i| z[i]));
        let w = self
            .m
            .solve(&(&self.s * utz))
            .ok_or(Error::Singular {
                min_abs_eigenvalue: 0.0,
            })?;
        for (col, wk) in self.y.iter().zip(w.iter()) {
            for (zi, yi) in z.iter_mut().zip(col) {
                *zi -= yi * wk;
            }
        }
        Ok(z)
    }
}
