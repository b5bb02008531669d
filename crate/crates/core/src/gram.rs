//! The Gram system of the periodic standard basis.
//!
//! `G_ij = N (Φ_j, Φ_i)` is a symmetric circulant with first row
//! `(g_1, .., g_r, 0, .., 0, g_r, .., g_2)` where `g_j = v_{2r}(j - 1)`
//! does not depend on `N`. Its eigenvalues are samples `g(2πm/N)` of the
//! symbol `g(θ) = Σ_l v̂_r(θ + 2πl)^2 = g_1 + 2 Σ_{j≥2} g_j cos((j-1)θ)`,
//! which ranges over `[g_lower, 1]`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::banded::CyclicBandSolver;
use crate::bspline::{cardinal_bspline_eval, cardinal_bspline_fourier, SplineSpace};
use crate::circulant::{assemble_symmetric, demko_bound, CirculantMatrix, DemkoBound, SymmetricStencil};
use crate::error::{Error, Result};
use crate::quadrature::CellRule;

/// Default lattice tail tolerance of [`SymbolEvaluator`].
pub const DEFAULT_TAIL_TOL: f64 = 1e-14;

/// Largest lattice cutoff a [`SymbolEvaluator`] will use.
pub const MAX_LATTICE_CUTOFF: usize = 1 << 20;

/// Largest dimension accepted by [`banded_truncation_inverse`].
pub const MAX_DENSE_DIM: usize = 1024;

/// Default initial grid size for [`spectral_bounds`].
pub const DEFAULT_SYMBOL_SAMPLES: usize = 1024;

/// `(g_1, .., g_r)` with `g_j = v_{2r}(j - 1)`.
pub fn gram_stencil(order: usize) -> Result<Vec<f64>> {
    if order < 1 {
        return Err(Error::InvalidOrder { order });
    }
    (0..order)
        .map(|lag| cardinal_bspline_eval(2 * order, lag as f64))
        .collect()
}

/// `g_j = N ∫ Φ_j Φ_1` by per-cell Gauss quadrature, exact for the
/// degree `2r - 2` integrands.
pub fn gram_stencil_quadrature(space: &SplineSpace) -> Vec<f64> {
    let r = space.order();
    let n = space.cells();
    let rule = CellRule::new(r).expect("order >= 1");
    let mut g = vec![0.0; r];
    for cell in 0..n {
        for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
            let basis = space.local_basis(x);
            // Φ_1 is active in this cell iff local slot s1 maps to index 0
            let Some(s1) = (0..r).find(|&s| space.local_index(cell, s) == 0) else {
                continue;
            };
            for (s, b) in basis.iter().enumerate() {
                let j = space.local_index(cell, s);
                // lag j (0-based) for j < r
                if j < r {
                    g[j] += w * b * basis[s1];
                }
            }
        }
    }
    g
}

/// The Gram matrix as a circulant.
pub fn gram_matrix(space: &SplineSpace) -> Result<CirculantMatrix> {
    gram_circulant(space.order(), space.cells())
}

/// The order-`r` Gram circulant in any dimension holding the stencil
/// without aliasing (`dim >= 2r - 2`), including meshes coarser than `4r`.
pub fn gram_circulant(order: usize, dim: usize) -> Result<CirculantMatrix> {
    let stencil = gram_stencil(order)?;
    assemble_symmetric(&SymmetricStencil {
        dim,
        diag: stencil[0],
        offsets: stencil[1..].to_vec(),
    })
}

/// `g_1 + 2 Σ_{j≥2} g_j cos((j-1)θ)`.
pub fn cosine_symbol(stencil: &[f64], theta: f64) -> f64 {
    stencil
        .iter()
        .enumerate()
        .skip(1)
        .fold(stencil[0], |acc, (m, g)| acc + 2.0 * g * (m as f64 * theta).cos())
}

/// Truncated lattice sum `Σ_{|l|<=L} v̂_r(θ + 2πl)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolEvaluator {
    order: usize,
    cutoff: usize,
    tail_tol: f64,
}

impl SymbolEvaluator {
    pub fn new(order: usize) -> Result<Self> {
        Self::with_tolerance(order, DEFAULT_TAIL_TOL)
    }

    /// Picks the smallest cutoff `L` whose tail envelope
    /// `2 Σ_{m≥L} (πm)^{-2r}` is below `tail_tol`.
    pub fn with_tolerance(order: usize, tail_tol: f64) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidOrder { order });
        }
        let mut cutoff = 1usize;
        while tail_envelope(order, cutoff) > tail_tol {
            if cutoff >= MAX_LATTICE_CUTOFF {
                return Err(Error::TailTolerance {
                    order,
                    tail_tol,
                    max_terms: MAX_LATTICE_CUTOFF,
                });
            }
            cutoff = (cutoff * 2).min(MAX_LATTICE_CUTOFF);
        }
        // bisect down to the smallest admissible cutoff
        let (mut lo, mut hi) = (cutoff / 2, cutoff);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if tail_envelope(order, mid) > tail_tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Self {
            order,
            cutoff: hi.max(1),
            tail_tol,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    /// Rigorous bound on the discarded terms.
    pub fn tail_bound(&self) -> f64 {
        tail_envelope(self.order, self.cutoff)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let theta = theta.rem_euclid(2.0 * PI);
        let r2 = 2 * self.order as i32;
        // sin^2((θ + 2πl)/2) does not depend on l
        let numer = (2.0 * (0.5 * theta).sin()).powi(r2);
        let term = |l: i64| {
            let x = theta + 2.0 * PI * l as f64;
            if x.abs() < 1e-4 {
                cardinal_bspline_fourier(self.order, x).powi(2)
            } else {
                numer / x.powi(r2)
            }
        };
        let l_max = self.cutoff as i64;
        let mut sum = 0.0;
        for l in (1..=l_max).rev() {
            sum += term(l) + term(-l);
        }
        sum + term(0)
    }
}

fn tail_envelope(order: usize, cutoff: usize) -> f64 {
    let l = cutoff as f64;
    let p = 2.0 * order as f64;
    2.0 * (PI * l).powf(-p) * (1.0 + l / (p - 1.0))
}

/// Extremes of the symbol over a full period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub lower: f64,
    pub upper: f64,
    /// Where the minimum was found, in `[0, 2π)`.
    pub argmin: f64,
    /// Final grid size.
    pub samples: usize,
}

/// Min and max of the cosine-series symbol of order `r`.
///
/// Scans a uniform grid over `[0, 2π)`, doubling it until both extremes move
/// by less than `1e-10`, then polishes the minimum by golden-section search
/// in the bracketing grid cells.
pub fn spectral_bounds(order: usize, samples: usize) -> Result<SpectralBounds> {
    if samples < DEFAULT_SYMBOL_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "spectral_bounds needs at least {DEFAULT_SYMBOL_SAMPLES} samples, got {samples}"
        )));
    }
    let stencil = gram_stencil(order)?;
    let scan = |m: usize| {
        let mut lo = (f64::INFINITY, 0.0);
        let mut hi = f64::NEG_INFINITY;
        for k in 0..m {
            let t = 2.0 * PI * k as f64 / m as f64;
            let v = cosine_symbol(&stencil, t);
            if v < lo.0 {
                lo = (v, t);
            }
            hi = hi.max(v);
        }
        (lo, hi)
    };
    let mut m = samples;
    let (mut lo, mut hi) = scan(m);
    loop {
        let next = m * 2;
        let (lo2, hi2) = scan(next);
        let settled = (lo2.0 - lo.0).abs() < 1e-10 && (hi2 - hi).abs() < 1e-10;
        m = next;
        lo = lo2;
        hi = hi2;
        if settled || m >= 1 << 24 {
            break;
        }
    }
    let step = 2.0 * PI / m as f64;
    let (argmin, polished) = golden_min(|t| cosine_symbol(&stencil, t), lo.1 - step, lo.1 + step);
    let (lower, argmin) = if polished < lo.0 {
        (polished, argmin.rem_euclid(2.0 * PI))
    } else {
        lo
    };
    Ok(SpectralBounds {
        lower,
        upper: hi,
        argmin,
        samples: m,
    })
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let ratio = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-15 {
            break;
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

/// Gram system of a spline space together with its spectral bounds.
#[derive(Debug, Clone)]
pub struct GramSystem {
    space: SplineSpace,
    stencil: Vec<f64>,
    matrix: CirculantMatrix,
    g_lower: f64,
    g_upper: f64,
}

impl GramSystem {
    pub fn new(space: SplineSpace) -> Result<Self> {
        let stencil = gram_stencil(space.order())?;
        let matrix = gram_matrix(&space)?;
        let bounds = spectral_bounds(space.order(), DEFAULT_SYMBOL_SAMPLES)?;
        Ok(Self {
            space,
            stencil,
            matrix,
            g_lower: bounds.lower,
            g_upper: bounds.upper,
        })
    }

    pub fn space(&self) -> &SplineSpace {
        &self.space
    }

    pub fn stencil(&self) -> &[f64] {
        &self.stencil
    }

    pub fn matrix(&self) -> &CirculantMatrix {
        &self.matrix
    }

    pub fn g_lower(&self) -> f64 {
        self.g_lower
    }

    pub fn g_upper(&self) -> f64 {
        self.g_upper
    }

    /// First row `γ` of `G^{-1}`.
    ///
    /// Solved through the band factorization plus a corner correction so that
    /// the exponentially small entries far from the diagonal keep their
    /// relative accuracy.
    pub fn inverse_first_row(&self) -> Result<Vec<f64>> {
        let n = self.space.cells();
        let solver = CyclicBandSolver::new(&self.matrix, self.space.order() - 1)?;
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        solver.solve(&e1)
    }

    /// Dense inverse of the band truncation `G̃` (corner entries dropped).
    pub fn banded_truncation_inverse(&self) -> Result<BandedTruncation> {
        banded_truncation_inverse(self)
    }
}

/// `G̃^{-1}` with the extreme eigenvalues of `G̃`.
#[derive(Debug, Clone)]
pub struct BandedTruncation {
    pub truncated: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub bandwidth: usize,
}

impl BandedTruncation {
    /// Demko constants from the computed spectrum of `G̃`.
    pub fn demko(&self) -> Result<DemkoBound> {
        demko_bound(self.lambda_min, self.lambda_max, self.bandwidth)
    }

    /// Number of entries of `G̃^{-1}` above `bound` and the largest ratio
    /// `|entry| / bound`.
    pub fn bound_violations(&self, bound: &DemkoBound) -> (usize, f64) {
        let n = self.inverse.nrows();
        let mut count = 0;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let b = bound.at(i.abs_diff(j));
                let v = self.inverse[(i, j)].abs();
                worst = worst.max(v / b);
                if v > b {
                    count += 1;
                }
            }
        }
        (count, worst)
    }
}

/// Build `G̃`, check `λ_min(G̃) >= g_lower`, and invert it densely.
pub fn banded_truncation_inverse(gs: &GramSystem) -> Result<BandedTruncation> {
    let n = gs.space.cells();
    if n > MAX_DENSE_DIM {
        return Err(Error::SizeLimit {
            dim: n,
            max: MAX_DENSE_DIM,
        });
    }
    let bw = gs.space.order() - 1;
    let truncated = DMatrix::from_fn(n, n, |i, j| {
        if i.abs_diff(j) <= bw {
            gs.matrix.entry(i, j)
        } else {
            0.0
        }
    });
    let eig = truncated.clone().symmetric_eigen();
    let lambda_min = eig.eigenvalues.min();
    let lambda_max = eig.eigenvalues.max();
    if lambda_min < gs.g_lower - 1e-12 {
        return Err(Error::NotPositiveDefinite { lambda_min });
    }
    let inverse = truncated
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { lambda_min })?
        .inverse();
    Ok(BandedTruncation {
        truncated,
        inverse,
        lambda_min,
        lambda_max,
        bandwidth: bw.max(1),
    })
}

/// Outcome of checking `|γ_i| <= C_1 q^{-(i-1)} + C_2 q^{-(N-i)}` for
/// `i = r ..= ⌊N/2⌋ + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayCertificate {
    pub c1: f64,
    pub c2: f64,
    pub q: f64,
    /// Constants came from [`fit_decay`] rather than being supplied.
    pub fitted: bool,
    /// `max_i (|γ_i| - bound_i)`; nonpositive when certified.
    pub max_slack: f64,
    pub valid: bool,
}

fn decay_profile(gamma: &[f64], order: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
    let n = gamma.len();
    let last = (n / 2 + 1).min(n);
    (order.max(1)..=last).map(move |i| (i, gamma[i - 1].abs()))
}

fn decay_shape(q: f64, n: usize, i: usize) -> (f64, f64) {
    let ln_q = q.ln();
    (
        (-(i as f64 - 1.0) * ln_q).exp(),
        (-(n as f64 - i as f64) * ln_q).exp(),
    )
}

/// Check the two-sided exponential decay bound with given constants.
pub fn certify_decay(gamma: &[f64], order: usize, c1: f64, c2: f64, q: f64) -> Result<DecayCertificate> {
    if !(q > 1.0) || !(c1 >= 0.0) || !(c2 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "decay certificate needs q > 1 and nonnegative constants (q = {q}, C1 = {c1}, C2 = {c2})"
        )));
    }
    let n = gamma.len();
    let mut max_slack = f64::NEG_INFINITY;
    let mut valid = true;
    for (i, g) in decay_profile(gamma, order) {
        let (a, b) = decay_shape(q, n, i);
        let bound = c1 * a + c2 * b;
        max_slack = max_slack.max(g - bound);
        if g > bound * (1.0 + 1e-12) {
            valid = false;
        }
    }
    if max_slack == f64::NEG_INFINITY {
        max_slack = 0.0;
    }
    Ok(DecayCertificate {
        c1,
        c2,
        q,
        fitted: false,
        max_slack,
        valid,
    })
}

/// Least `C = C_1 = C_2` for which the decay bound holds at rate `q`.
pub fn fit_decay(gamma: &[f64], order: usize, q: f64) -> Result<DecayCertificate> {
    if !(q > 1.0) {
        return Err(Error::InvalidParameter(format!("decay rate must exceed 1, got {q}")));
    }
    let n = gamma.len();
    let c = decay_profile(gamma, order)
        .map(|(i, g)| {
            let (a, b) = decay_shape(q, n, i);
            g / (a + b)
        })
        .fold(0.0, f64::max);
    let mut cert = certify_decay(gamma, order, c, c, q)?;
    cert.fitted = true;
    Ok(cert)
}

/// Explicit `(C_1, C_2, q)` for the decay of `γ` obtained from the Demko
/// bound of `G̃` (constant `C`, rate `q`), using `|γ_j| <= 1/g_lower`:
///
/// `C_1 = (1 + (q^{r-1} - q) / (g_lower (q - 1))) C`,
/// `C_2 = (q^{r-2} + (q^{r-2} - 1) / (g_lower (q - 1))) C`.
pub fn decay_constants_from_band(order: usize, g_lower: f64, band: &DemkoBound) -> (f64, f64, f64) {
    let q = band.rate;
    let c = band.constant;
    if order < 2 {
        return (c, c, q);
    }
    let r = order as i32;
    let c1 = (1.0 + (q.powi(r - 1) - q) / (g_lower * (q - 1.0))) * c;
    let c2 = (q.powi(r - 2) + (q.powi(r - 2) - 1.0) / (g_lower * (q - 1.0))) * c;
    (c1, c2, q)
}

/// `Σ_{i=1}^{⌊N/2⌋+1} (1 + i) |γ_i|`.
pub fn weighted_gamma_sum(gamma: &[f64]) -> f64 {
    weighted_gamma_tail(gamma, 1)
}

/// `Σ_{i=start}^{⌊N/2⌋+1} (1 + i) |γ_i|`.
pub fn weighted_gamma_tail(gamma: &[f64], start: usize) -> f64 {
    let last = (gamma.len() / 2 + 1).min(gamma.len());
    (start.max(1)..=last)
        .map(|i| (1.0 + i as f64) * gamma[i - 1].abs())
        .sum()
}
