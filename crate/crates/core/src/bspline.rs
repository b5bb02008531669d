//! Cardinal B-splines and the periodic standard basis on a uniform mesh.
//!
//! The reference B-spline `v_r` of order `r` is centered at the origin with
//! support `[-r/2, r/2]`. The periodic basis function `Φ_j` on the mesh
//! `x_i = i/N` is the periodization of `v_r(N x - j - (r-2)/2)`, so that in
//! `[0, 1]` its support is `[x_{j-1}, x_{j+r-1}]` (wrapped).
//!
//! Basis indices are 1-based and taken modulo `N`.

use crate::error::{Error, Result};

/// Largest spline order accepted by [`SplineSpace`].
pub const MAX_ORDER: usize = 12;

/// Values `N_r(frac + s)`, `s = 0..r`, of the uncentered uniform B-spline of
/// order `r` (support `[0, r]`) for `frac` in `[0, 1)`.
///
/// Cox-de Boor on integer knots; `O(r^2)`.
pub(crate) fn uniform_pieces(order: usize, frac: f64) -> Vec<f64> {
    let mut vals = vec![0.0; order];
    vals[0] = 1.0;
    for k in 2..=order {
        let kf = k as f64;
        let inv = 1.0 / (kf - 1.0);
        // N_k(frac + s) from N_{k-1}(frac + s) and N_{k-1}(frac + s - 1);
        // descend so that vals[s - 1] is still the order k-1 value.
        for s in (0..k).rev() {
            let t = frac + s as f64;
            let left = if s + 1 < k { vals[s] } else { 0.0 };
            let right = if s > 0 { vals[s - 1] } else { 0.0 };
            vals[s] = (t * left + (kf - t) * right) * inv;
        }
    }
    vals
}

/// Centered cardinal B-spline `v_r(x)`.
///
/// `v_1` is the indicator of `[-1/2, 1/2)`.
pub fn cardinal_bspline_eval(order: usize, x: f64) -> Result<f64> {
    if order < 1 {
        return Err(Error::InvalidOrder { order });
    }
    let t = x + 0.5 * order as f64;
    if !(t >= 0.0 && t < order as f64) {
        return Ok(0.0);
    }
    let cell = t.floor();
    let pieces = uniform_pieces(order, t - cell);
    Ok(pieces[cell as usize])
}

/// Fourier transform `(2 sin(x/2) / x)^r` of the centered B-spline.
pub fn cardinal_bspline_fourier(order: usize, x: f64) -> f64 {
    let base = if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 24.0 + x2 * x2 / 1920.0 - x2 * x2 * x2 / 322_560.0
    } else {
        2.0 * (0.5 * x).sin() / x
    };
    base.powi(order as i32)
}

/// The periodic spline space `S_h^r`: order `r`, `N` cells, mesh width `1/N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SplineSpace {
    order: usize,
    cells: usize,
}

impl SplineSpace {
    /// Requires `1 <= r <= 12` and `N >= 4r`.
    pub fn new(order: usize, cells: usize) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(Error::InvalidOrder { order });
        }
        if cells < 4 * order {
            return Err(Error::InvalidSpace {
                order,
                cells,
                reason: "need N >= 4r",
            });
        }
        Ok(Self { order, cells })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dim(&self) -> usize {
        self.cells
    }

    pub fn h(&self) -> f64 {
        1.0 / self.cells as f64
    }

    /// Node `x_i = i/N`.
    pub fn node(&self, i: i64) -> f64 {
        i as f64 / self.cells as f64
    }

    /// The space of order `r - l` on the same mesh.
    pub fn lowered(&self, l: usize) -> Result<Self> {
        if l >= self.order {
            return Err(Error::OrderUnderflow {
                derivative: l,
                order: self.order,
            });
        }
        Ok(Self {
            order: self.order - l,
            cells: self.cells,
        })
    }

    /// Reduce a 1-based basis index into `1..=N`.
    pub fn wrap_index(&self, j: i64) -> usize {
        (j - 1).rem_euclid(self.cells as i64) as usize + 1
    }

    /// Cell containing `x` (after reduction mod 1) and the local coordinate
    /// in `[0, 1)`.
    pub(crate) fn locate(&self, x: f64) -> (usize, f64) {
        let y = x.rem_euclid(1.0) * self.cells as f64;
        let cell = (y.floor().max(0.0) as usize).min(self.cells - 1);
        (cell, (y - cell as f64).clamp(0.0, 1.0))
    }

    /// Local basis values in cell `cell` at local coordinate `frac`.
    ///
    /// Entry `s` is `Φ_j` with `j = cell + 1 - s` (1-based, before wrapping).
    pub(crate) fn local_basis(&self, frac: f64) -> Vec<f64> {
        uniform_pieces(self.order, frac)
    }

    /// 0-based coefficient index of the `s`-th local basis function in `cell`.
    pub(crate) fn local_index(&self, cell: usize, s: usize) -> usize {
        (cell + self.cells - s) % self.cells
    }
}

/// `Φ_j(x)`; `j` is reduced mod `N` and `x` mod 1.
pub fn periodic_basis_eval(space: &SplineSpace, j: i64, x: f64) -> f64 {
    let n = space.cells as f64;
    let r = space.order;
    let j = space.wrap_index(j) as f64;
    let half = 0.5 * r as f64;
    let t = x.rem_euclid(1.0) * n - j - 0.5 * (r as f64 - 2.0);
    // lattice images t - lN with |t - lN| < r/2
    let lo = ((t - half) / n).floor() as i64;
    let hi = ((t + half) / n).ceil() as i64;
    (lo..=hi)
        .map(|l| cardinal_bspline_eval(r, t - l as f64 * n).unwrap_or(0.0))
        .sum()
}

/// A spline `Σ_j V_j Φ_j` in a [`SplineSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSpline {
    space: SplineSpace,
    coeffs: Vec<f64>,
}

impl PeriodicSpline {
    /// `coeffs[j - 1]` multiplies `Φ_j`.
    pub fn new(space: SplineSpace, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: coeffs.len(),
            });
        }
        Ok(Self { space, coeffs })
    }

    pub fn constant(space: SplineSpace, value: f64) -> Self {
        Self {
            space,
            coeffs: vec![value; space.dim()],
        }
    }

    /// The basis function `Φ_j` itself.
    pub fn basis(space: SplineSpace, j: i64) -> Self {
        let mut coeffs = vec![0.0; space.dim()];
        coeffs[space.wrap_index(j) - 1] = 1.0;
        Self { space, coeffs }
    }

    pub fn space(&self) -> &SplineSpace {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// `Σ_j V_j Φ_j(x)` over the at most `r` basis functions alive at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let (cell, frac) = self.space.locate(x);
        self.eval_local(cell, frac)
    }

    pub(crate) fn eval_local(&self, cell: usize, frac: f64) -> f64 {
        let basis = self.space.local_basis(frac);
        basis
            .iter()
            .enumerate()
            .map(|(s, b)| self.coeffs[self.space.local_index(cell, s)] * b)
            .sum()
    }

    /// Derivative as a spline of order `r - 1`: `W_j = N (V_j - V_{j-1})`.
    pub fn derivative(&self) -> Result<Self> {
        if self.space.order < 2 {
            return Err(Error::CannotDifferentiate);
        }
        let n = self.space.cells;
        let scale = n as f64;
        let coeffs = (0..n)
            .map(|j| scale * (self.coeffs[j] - self.coeffs[(j + n - 1) % n]))
            .collect();
        Ok(Self {
            space: self.space.lowered(1)?,
            coeffs,
        })
    }
}
