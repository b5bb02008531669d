//! Cyclic (circulant) matrices stored by their first row.
//!
//! Row `i`, column `k` (0-based) holds `c[(k - i) mod n]`, so
//! `C = Σ_d c_d P^d` with the shift `(P^d V)_i = V_{i+d}`. The discrete
//! Fourier transform diagonalizes every such matrix: `λ_m = Σ_d c_d ω^{dm}`
//! with `ω = exp(2πi/n)`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Default relative residual accepted by [`CirculantMatrix::solve`].
pub const DEFAULT_SOLVE_TOL: f64 = 1e-12;

/// Imaginary DFT residue tolerated when a real spectrum is expected.
const IMAG_RESIDUE_TOL: f64 = 1e-12;

/// `(P^k V)_i = V_{i+k}` with indices mod `n`.
pub fn shift_apply(k: i64, v: &[f64]) -> Vec<f64> {
    let n = v.len() as i64;
    if n == 0 {
        return Vec::new();
    }
    let k = k.rem_euclid(n) as usize;
    let mut out = Vec::with_capacity(v.len());
    out.extend_from_slice(&v[k..]);
    out.extend_from_slice(&v[..k]);
    out
}

struct Dft {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Dft {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    fn forward(&self, v: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Unnormalized `Σ_d v_d exp(+2πi dm/n)`.
    fn backward(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut buf = v.to_vec();
        self.inverse.process(&mut buf);
        buf
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CirculantMatrix {
    first_row: Vec<f64>,
}

impl CirculantMatrix {
    pub fn new(first_row: Vec<f64>) -> Result<Self> {
        if first_row.is_empty() {
            return Err(Error::InvalidParameter(
                "circulant dimension must be positive".into(),
            ));
        }
        Ok(Self { first_row })
    }

    pub fn identity(n: usize) -> Self {
        let mut first_row = vec![0.0; n.max(1)];
        first_row[0] = 1.0;
        Self { first_row }
    }

    /// `P^k` as a circulant.
    pub fn shift(n: usize, k: i64) -> Self {
        let mut first_row = vec![0.0; n.max(1)];
        first_row[k.rem_euclid(n.max(1) as i64) as usize] = 1.0;
        Self { first_row }
    }

    pub fn dim(&self) -> usize {
        self.first_row.len()
    }

    pub fn first_row(&self) -> &[f64] {
        &self.first_row
    }

    /// First column, `c[(-i) mod n]`.
    pub fn first_column(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| self.first_row[(n - i) % n]).collect()
    }

    /// Entry at row `i`, column `k`, 0-based.
    pub fn entry(&self, i: usize, k: usize) -> f64 {
        let n = self.dim();
        self.first_row[(k % n + n - i % n) % n]
    }

    pub fn transpose(&self) -> Self {
        Self {
            first_row: self.first_column(),
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: len,
            });
        }
        Ok(())
    }

    /// `C V`, summing only over the nonzero lags of the first row.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v.len())?;
        let n = self.dim();
        let mut out = vec![0.0; n];
        for (d, &c) in self.first_row.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                let k = if i + d >= n { i + d - n } else { i + d };
                *o += c * v[k];
            }
        }
        Ok(out)
    }

    /// `C V` through the DFT, `O(n log n)`.
    pub fn matvec_fft(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v.len())?;
        let dft = Dft::new(self.dim());
        let lambda = self.spectrum_with(&dft);
        let vh = dft.forward(v);
        let prod: Vec<Complex64> = vh.iter().zip(&lambda).map(|(a, b)| a * b).collect();
        Ok(real_part(&dft.backward(&prod), self.dim()))
    }

    /// `A B`; the first row is the circular convolution of the first rows.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_len(other.dim())?;
        let n = self.dim();
        let mut row = vec![0.0; n];
        for (d, &a) in self.first_row.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (e, &b) in other.first_row.iter().enumerate() {
                row[(d + e) % n] += a * b;
            }
        }
        Ok(Self { first_row: row })
    }

    fn spectrum_with(&self, dft: &Dft) -> Vec<Complex64> {
        let c: Vec<Complex64> = self
            .first_row
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        dft.backward(&c)
    }

    /// Complex eigenvalues `λ_m = Σ_d c_d exp(2πi dm/n)`, `m = 0..n`.
    pub fn spectrum(&self) -> Vec<Complex64> {
        self.spectrum_with(&Dft::new(self.dim()))
    }

    /// Real eigenvalues of a symmetric circulant, ordered by `θ_m = 2πm/n`.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let spec = self.spectrum();
        let scale = spec.iter().map(|z| z.re.abs()).fold(1.0, f64::max);
        let residue = spec.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if residue > IMAG_RESIDUE_TOL * scale {
            return Err(Error::NotSymmetric { residue });
        }
        Ok(spec.into_iter().map(|z| z.re).collect())
    }

    /// Solve `C x = b` by diagonalization.
    ///
    /// Fails with [`Error::Singular`] when `min |λ| <= 1e3 ε max |λ|`, and with
    /// [`Error::ResidualTolerance`] if one step of refinement cannot bring the
    /// relative residual below `tol`.
    pub fn solve(&self, b: &[f64], tol: f64) -> Result<Vec<f64>> {
        self.check_len(b.len())?;
        let n = self.dim();
        let dft = Dft::new(n);
        let lambda = self.spectrum_with(&dft);
        let max_abs = lambda.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let min_abs = lambda.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        if !(min_abs > 1e3 * f64::EPSILON * max_abs) {
            return Err(Error::Singular {
                min_abs_eigenvalue: min_abs,
            });
        }
        let apply_inverse = |rhs: &[f64]| -> Vec<f64> {
            let bh = dft.forward(rhs);
            let q: Vec<Complex64> = bh.iter().zip(&lambda).map(|(a, l)| a / l).collect();
            real_part(&dft.backward(&q), n)
        };
        let bnorm = norm2(b);
        if bnorm == 0.0 {
            return Ok(vec![0.0; n]);
        }
        let mut x = apply_inverse(b);
        let mut residual = self.relative_residual(&x, b, bnorm)?;
        if residual > tol {
            let r: Vec<f64> = {
                let cx = self.matvec(&x)?;
                b.iter().zip(&cx).map(|(bi, ci)| bi - ci).collect()
            };
            let dx = apply_inverse(&r);
            x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += di);
            residual = self.relative_residual(&x, b, bnorm)?;
        }
        if residual > tol {
            return Err(Error::ResidualTolerance { residual, tol });
        }
        Ok(x)
    }

    fn relative_residual(&self, x: &[f64], b: &[f64], bnorm: f64) -> Result<f64> {
        let cx = self.matvec(x)?;
        let r: f64 = cx
            .iter()
            .zip(b)
            .map(|(c, b)| (c - b) * (c - b))
            .sum::<f64>()
            .sqrt();
        Ok(r / bnorm)
    }

    /// `C^{-1}`, itself circulant; its first row solves `Cᵀ x = e_1`.
    pub fn inverse(&self) -> Result<Self> {
        let mut e1 = vec![0.0; self.dim()];
        e1[0] = 1.0;
        let row = self.transpose().solve(&e1, DEFAULT_SOLVE_TOL)?;
        Ok(Self { first_row: row })
    }
}

fn real_part(v: &[Complex64], n: usize) -> Vec<f64> {
    let inv = 1.0 / n as f64;
    v.iter().map(|z| z.re * inv).collect()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `c_1 I + Σ_{m≥1} c_{m+1} (P^m + P^{-m})`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricStencil {
    pub dim: usize,
    pub diag: f64,
    /// Coefficients at lags `1, 2, ...`.
    pub offsets: Vec<f64>,
}

/// `Σ_{m≥1} c_{m+1} (P^m - P^{-m})`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntisymmetricStencil {
    pub dim: usize,
    pub offsets: Vec<f64>,
}

/// First row `(c_1, c_2, .., c_k, 0, .., 0, c_k, .., c_2)`.
///
/// A lag equal to `n/2` (even `n`) occupies a single slot, matching the
/// `c_{n/2+1} P^{n/2}` term of the even-dimension form.
pub fn assemble_symmetric(stencil: &SymmetricStencil) -> Result<CirculantMatrix> {
    let n = stencil.dim;
    let lags = stencil.offsets.len();
    if n == 0 || lags > n / 2 {
        return Err(Error::StencilOverlap { lags, dim: n });
    }
    let mut row = vec![0.0; n];
    row[0] = stencil.diag;
    for (m, &c) in stencil.offsets.iter().enumerate() {
        let lag = m + 1;
        row[lag] = c;
        row[n - lag] = c;
    }
    CirculantMatrix::new(row)
}

/// First row `(0, c_2, .., c_k, 0, .., 0, -c_k, .., -c_2)`; lags must stay
/// below `n/2`.
pub fn assemble_antisymmetric(stencil: &AntisymmetricStencil) -> Result<CirculantMatrix> {
    let n = stencil.dim;
    let lags = stencil.offsets.len();
    if n == 0 || 2 * lags >= n {
        return Err(Error::StencilOverlap { lags, dim: n });
    }
    let mut row = vec![0.0; n];
    for (m, &c) in stencil.offsets.iter().enumerate() {
        let lag = m + 1;
        row[lag] = c;
        row[n - lag] = -c;
    }
    CirculantMatrix::new(row)
}

/// Off-diagonal decay bound `|(B^{-1})_{ij}| <= constant · rate^{-|i-j|}` for
/// a symmetric positive definite matrix of half-bandwidth `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemkoBound {
    pub constant: f64,
    pub rate: f64,
}

impl DemkoBound {
    pub fn at(&self, distance: usize) -> f64 {
        self.constant * self.rate.powf(-(distance as f64))
    }
}

/// Decay constants from the extreme eigenvalues and the bandwidth.
///
/// With `a = sqrt(λ_min)`, `b = sqrt(λ_max)`:
/// `constant = max(1, (a + b)^2 / (2 b^2)) / a^2`,
/// `rate = ((b + a) / (b - a))^{1/k}`.
pub fn demko_bound(lambda_min: f64, lambda_max: f64, bandwidth: usize) -> Result<DemkoBound> {
    if !(lambda_min > 0.0) {
        return Err(Error::NotPositiveDefinite { lambda_min });
    }
    if !(lambda_min < lambda_max) {
        return Err(Error::DegenerateSpectrum {
            lambda_min,
            lambda_max,
        });
    }
    if bandwidth == 0 {
        return Err(Error::InvalidParameter("bandwidth must be >= 1".into()));
    }
    let a = lambda_min.sqrt();
    let b = lambda_max.sqrt();
    let constant = (1.0f64).max((a + b) * (a + b) / (2.0 * b * b)) / (a * a);
    let rate = ((b + a) / (b - a)).powf(1.0 / bandwidth as f64);
    Ok(DemkoBound { constant, rate })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_examples() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(shift_apply(0, &v), v.to_vec());
        assert_eq!(shift_apply(4, &v), v.to_vec());
        assert_eq!(shift_apply(1, &v), vec![2.0, 3.0, 4.0, 1.0]);
        assert_eq!(shift_apply(-1, &v), vec![4.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn symmetric_assembly() {
        let c = assemble_symmetric(&SymmetricStencil {
            dim: 8,
            diag: 2.0 / 3.0,
            offsets: vec![1.0 / 6.0],
        })
        .unwrap();
        assert_eq!(
            c.first_row(),
            &[2.0 / 3.0, 1.0 / 6.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0 / 6.0]
        );
        assert_eq!(c.first_row(), c.first_column().as_slice());
    }

    #[test]
    fn antisymmetric_assembly() {
        let c = assemble_antisymmetric(&AntisymmetricStencil {
            dim: 8,
            offsets: vec![1.0],
        })
        .unwrap();
        assert_eq!(
            c.first_row(),
            &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0]
        );
    }

    #[test]
    fn wide_stencil_rejected() {
        let too_wide = SymmetricStencil {
            dim: 6,
            diag: 1.0,
            offsets: vec![0.1; 4],
        };
        assert!(matches!(
            assemble_symmetric(&too_wide),
            Err(Error::StencilOverlap { .. })
        ));
        // lag n/2 is allowed and stored once
        let half = SymmetricStencil {
            dim: 6,
            diag: 1.0,
            offsets: vec![0.0, 0.0, 0.25],
        };
        let c = assemble_symmetric(&half).unwrap();
        assert_eq!(c.first_row(), &[1.0, 0.0, 0.0, 0.25, 0.0, 0.0]);
        assert!(assemble_antisymmetric(&AntisymmetricStencil {
            dim: 6,
            offsets: vec![1.0, 1.0, 1.0]
        })
        .is_err());
    }

    #[test]
    fn identity_eigenvalues_and_solve() {
        let id = CirculantMatrix::identity(5);
        assert!(id.eigenvalues().unwrap().iter().all(|&l| (l - 1.0).abs() < 1e-15));
        let b = [1.0, -2.0, 3.0, 0.5, 7.0];
        let x = id.solve(&b, DEFAULT_SOLVE_TOL).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-15);
        }
        assert_eq!(id.matvec(&b).unwrap(), b.to_vec());
    }

    #[test]
    fn small_symmetric_spectrum() {
        let c = assemble_symmetric(&SymmetricStencil {
            dim: 4,
            diag: 2.0,
            offsets: vec![1.0],
        })
        .unwrap();
        let ev = c.eigenvalues().unwrap();
        let expected = [4.0, 2.0, 0.0, 2.0];
        for (a, b) in ev.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-14, "{ev:?}");
        }
    }

    #[test]
    fn asymmetric_eigenvalues_rejected() {
        let c = CirculantMatrix::new(vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(c.eigenvalues(), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn singular_detected() {
        let c = assemble_symmetric(&SymmetricStencil {
            dim: 4,
            diag: 2.0,
            offsets: vec![1.0],
        })
        .unwrap();
        assert!(matches!(
            c.solve(&[1.0, 0.0, 0.0, 0.0], DEFAULT_SOLVE_TOL),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn length_mismatch() {
        let c = CirculantMatrix::identity(4);
        assert!(matches!(
            c.matvec(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn demko_hat_pair() {
        let s3 = 3.0f64.sqrt();
        let d = demko_bound(1.0 / 3.0, 1.0, 1).unwrap();
        assert!((d.constant - (2.0 + s3)).abs() < 1e-12);
        assert!((d.rate - (2.0 + s3)).abs() < 1e-12);
        let d2 = demko_bound(1.0 / 3.0, 1.0, 2).unwrap();
        assert!(d2.rate < d.rate);
    }

    #[test]
    fn demko_errors() {
        assert!(matches!(
            demko_bound(1.0, 1.0, 1),
            Err(Error::DegenerateSpectrum { .. })
        ));
        assert!(matches!(
            demko_bound(0.0, 1.0, 1),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            demko_bound(-1.0, 1.0, 1),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn inverse_is_circulant_inverse() {
        let c = CirculantMatrix::new(vec![4.0, 1.0, 0.5, 0.0, 0.0, 0.2]).unwrap();
        let inv = c.inverse().unwrap();
        let prod = c.mul(&inv).unwrap();
        for (k, v) in prod.first_row().iter().enumerate() {
            let want = if k == 0 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-14);
        }
    }
}
