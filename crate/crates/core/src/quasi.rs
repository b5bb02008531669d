//! Quasiinterpolants `Q_h u = Σ_j (Q ũ)_j Φ_j` built from a symmetric stencil
//! `Q = q_0 I + Σ_m q_m (P^m + P^{-m})`, with the Thomée–Wendroff stencils
//! generated exactly from the series of `(arcsin τ / τ)^r`.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::bspline::{PeriodicSpline, SplineSpace, MAX_ORDER};
use crate::error::{Error, Result};
use crate::projection::{derivative_power_binomial, ratios, NormOptions, StabilityReport, TestFunction};

/// Coefficients of `(arcsin τ / τ)^r` in powers of `τ^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSeries {
    pub order: usize,
    pub coefficients: Vec<BigRational>,
}

impl DeltaSeries {
    /// `Σ_j δ_j sin^{2j}(ξ/2)`.
    pub fn symbol(&self, xi: f64) -> f64 {
        let s2 = (0.5 * xi).sin().powi(2);
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, d| acc * s2 + to_f64(d))
    }

    /// `Σ_j δ_j`, the symbol at `ξ = π`.
    pub fn sum(&self) -> BigRational {
        self.coefficients.iter().fold(BigRational::zero(), |a, d| a + d)
    }
}

/// A symmetric stencil `(q_0, .., q_{r-1})`, with exact values when it was
/// generated in rational arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiCoefficients {
    order: usize,
    stencil: Vec<f64>,
    exact: Option<Vec<BigRational>>,
}

impl QuasiCoefficients {
    /// A user stencil; at most `r` entries (lags `0..=r-1`), zero-padded.
    pub fn new(order: usize, stencil: Vec<f64>) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidOrder { order });
        }
        if stencil.is_empty() || stencil.len() > order {
            return Err(Error::InvalidParameter(format!(
                "stencil for order {order} needs 1..={order} entries, got {}",
                stencil.len()
            )));
        }
        let mut stencil = stencil;
        stencil.resize(order, 0.0);
        Ok(Self {
            order,
            stencil,
            exact: None,
        })
    }

    /// The Thomée–Wendroff stencil of order `r`.
    pub fn thomee_wendroff(order: usize) -> Result<Self> {
        Ok(delta_to_stencil(&tw_delta(order)?))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn stencil(&self) -> &[f64] {
        &self.stencil
    }

    pub fn exact(&self) -> Option<&[BigRational]> {
        self.exact.as_deref()
    }

    /// `q(ξ) = q_0 + 2 Σ_m q_m cos(mξ)`.
    pub fn symbol(&self, xi: f64) -> f64 {
        self.stencil
            .iter()
            .enumerate()
            .skip(1)
            .fold(self.stencil[0], |acc, (m, q)| acc + 2.0 * q * (m as f64 * xi).cos())
    }

    /// `q(0)` and `q(π)` in exact arithmetic.
    pub fn exact_symbol_at_zero_and_pi(&self) -> Option<(BigRational, BigRational)> {
        let q = self.exact.as_ref()?;
        let two = BigRational::from_integer(BigInt::from(2));
        let mut at_zero = q[0].clone();
        let mut at_pi = q[0].clone();
        for (m, qm) in q.iter().enumerate().skip(1) {
            at_zero += &two * qm;
            if m % 2 == 0 {
                at_pi += &two * qm;
            } else {
                at_pi -= &two * qm;
            }
        }
        Some((at_zero, at_pi))
    }

    /// `C_0 = |q_0| + 2 Σ_m |q_m|`, bounding `‖Q_h u‖_∞ / ‖u‖_∞`.
    pub fn sup_constant(&self) -> f64 {
        self.stencil[0].abs() + 2.0 * self.stencil[1..].iter().map(|q| q.abs()).sum::<f64>()
    }
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().expect("finite rational")
}

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Product of two series truncated after `terms` coefficients.
fn series_mul(a: &[BigRational], b: &[BigRational], terms: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); terms];
    for (i, ai) in a.iter().enumerate().take(terms) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(terms - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// `arcsin τ / τ = Σ_n C(2n, n) τ^{2n} / (4^n (2n + 1))`, first `terms`
/// coefficients in powers of `τ^2`.
pub fn arcsin_series(terms: usize) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(terms);
    // c_n = C(2n,n) / 4^n, c_{n+1} = c_n (2n+1) / (2n+2)
    let mut c = BigRational::one();
    for n in 0..terms as i64 {
        out.push(&c / BigRational::from_integer(BigInt::from(2 * n + 1)));
        c *= rational(2 * n + 1, 2 * n + 2);
    }
    out
}

/// `(arcsin τ / τ)^r` to `terms` coefficients, by repeated truncated
/// multiplication.
pub fn arcsin_power_series(order: usize, terms: usize) -> Vec<BigRational> {
    let base = arcsin_series(terms);
    let mut acc = vec![BigRational::zero(); terms];
    if terms > 0 {
        acc[0] = BigRational::one();
    }
    for _ in 0..order {
        acc = series_mul(&acc, &base, terms);
    }
    acc
}

/// `δ_0, .., δ_{r-1}` for `2 <= r <= 12`.
pub fn tw_delta(order: usize) -> Result<DeltaSeries> {
    if !(2..=MAX_ORDER).contains(&order) {
        return Err(Error::InvalidOrder { order });
    }
    Ok(DeltaSeries {
        order,
        coefficients: arcsin_power_series(order, order),
    })
}

/// Expand `Σ_j δ_j ((2 - z - z^{-1}) / 4)^j` and collect the coefficients of
/// `z^0, .., z^{r-1}`.
pub fn delta_to_stencil(delta: &DeltaSeries) -> QuasiCoefficients {
    let r = delta.order.max(delta.coefficients.len());
    let width = 2 * r - 1;
    let center = r - 1;
    // Laurent coefficients of z^{k - center}
    let base = [rational(-1, 4), rational(1, 2), rational(-1, 4)];
    let mut power = vec![BigRational::zero(); width];
    power[center] = BigRational::one();
    let mut total = vec![BigRational::zero(); width];
    for (j, d) in delta.coefficients.iter().enumerate() {
        if j > 0 {
            let mut next = vec![BigRational::zero(); width];
            for (k, p) in power.iter().enumerate() {
                if p.is_zero() {
                    continue;
                }
                for (o, b) in base.iter().enumerate() {
                    let idx = k + o;
                    if (1..=width).contains(&idx) {
                        next[idx - 1] += p * b;
                    }
                }
            }
            power = next;
        }
        for (t, p) in total.iter_mut().zip(&power) {
            *t += d * p;
        }
    }
    let exact: Vec<BigRational> = total[center..].to_vec();
    QuasiCoefficients {
        order: delta.order,
        stencil: exact.iter().map(to_f64).collect(),
        exact: Some(exact),
    }
}

/// Where the samples `ũ_j` are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleAlignment {
    /// `ũ_j = u(jh)`.
    #[default]
    Nodes,
    /// `ũ_j = u(jh + (r - 2) h / 2)`, the center of the support of `Φ_j`.
    BasisCenters,
}

impl SampleAlignment {
    fn offset(self, space: &SplineSpace) -> f64 {
        match self {
            Self::Nodes => 0.0,
            Self::BasisCenters => 0.5 * (space.order() as f64 - 2.0) * space.h(),
        }
    }
}

/// Samples `ũ_j`, 0-based.
pub fn samples(space: &SplineSpace, u: &TestFunction, alignment: SampleAlignment) -> Vec<f64> {
    let h = space.h();
    let off = alignment.offset(space);
    (1..=space.cells())
        .map(|j| u.value(j as f64 * h + off))
        .collect()
}

/// `(Q ũ)_j = q_0 ũ_j + Σ_m q_m (ũ_{j+m} + ũ_{j-m})`.
pub fn apply_stencil(qc: &QuasiCoefficients, values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|j| {
            qc.stencil
                .iter()
                .enumerate()
                .skip(1)
                .fold(qc.stencil[0] * values[j], |acc, (m, q)| {
                    let m = m % n;
                    acc + q * (values[(j + m) % n] + values[(j + n - m) % n])
                })
        })
        .collect()
}

/// `Q_h u` with node samples `u(jh)`.
pub fn quasi_interpolate(space: &SplineSpace, qc: &QuasiCoefficients, u: &TestFunction) -> Result<PeriodicSpline> {
    quasi_interpolate_aligned(space, qc, u, SampleAlignment::Nodes)
}

pub fn quasi_interpolate_aligned(
    space: &SplineSpace,
    qc: &QuasiCoefficients,
    u: &TestFunction,
    alignment: SampleAlignment,
) -> Result<PeriodicSpline> {
    if qc.order != space.order() {
        return Err(Error::OrderMismatch {
            coefficients: qc.order,
            space: space.order(),
        });
    }
    PeriodicSpline::new(*space, apply_stencil(qc, &samples(space, u, alignment)))
}

/// `∂ˡ(Q_h u)` with coefficients `h^{-l} (I - P^{-1})^l (Q ũ)`.
pub fn quasi_derivative(
    space: &SplineSpace,
    qc: &QuasiCoefficients,
    u: &TestFunction,
    l: usize,
    alignment: SampleAlignment,
) -> Result<PeriodicSpline> {
    derivative_power_binomial(&quasi_interpolate_aligned(space, qc, u, alignment)?, l)
}

/// Stability ratios of the quasiinterpolant.
pub fn quasi_stability_report(
    space: &SplineSpace,
    qc: &QuasiCoefficients,
    u: &TestFunction,
    l: usize,
    opts: NormOptions,
    alignment: SampleAlignment,
) -> Result<StabilityReport> {
    if l >= space.order() {
        return Err(Error::OrderUnderflow {
            derivative: l,
            order: space.order(),
        });
    }
    u.derivative(l, 0.0)?;
    let q = quasi_interpolate_aligned(space, qc, u, alignment)?;
    ratios(&q, u, l, opts)
}

/// Largest `|q(ξ) - Σ δ_j sin^{2j}(ξ/2)|` over `ξ_k = 2πk/samples`.
pub fn symbol_mismatch(qc: &QuasiCoefficients, delta: &DeltaSeries, samples: usize) -> f64 {
    (0..samples)
        .map(|k| {
            let xi = 2.0 * PI * k as f64 / samples as f64;
            (qc.symbol(xi) - delta.symbol(xi)).abs()
        })
        .fold(0.0, f64::max)
}

/// `true` when every exact coefficient is positive.
pub fn all_positive(delta: &DeltaSeries) -> bool {
    delta.coefficients.iter().all(|d| d.is_positive())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arcsin_head() {
        let a = arcsin_series(3);
        assert_eq!(a, vec![rational(1, 1), rational(1, 6), rational(3, 40)]);
    }

    #[test]
    fn square_of_arcsin() {
        let s = arcsin_power_series(2, 3);
        assert_eq!(s, vec![rational(1, 1), rational(1, 3), rational(8, 45)]);
    }

    #[test]
    fn hat_stencil() {
        let d = tw_delta(2).unwrap();
        assert_eq!(d.coefficients, vec![rational(1, 1), rational(1, 3)]);
        let q = delta_to_stencil(&d);
        assert_eq!(q.exact().unwrap(), &[rational(7, 6), rational(-1, 12)]);
        let (z, p) = q.exact_symbol_at_zero_and_pi().unwrap();
        assert_eq!(z, BigRational::one());
        assert_eq!(p, d.sum());
        assert!((q.sup_constant() - (7.0 / 6.0 + 1.0 / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn order_range() {
        assert!(tw_delta(1).is_err());
        assert!(tw_delta(13).is_err());
        assert!(tw_delta(12).is_ok());
    }

    #[test]
    fn user_stencil_checks() {
        assert!(QuasiCoefficients::new(2, vec![1.0, 0.0, 0.0]).is_err());
        assert!(QuasiCoefficients::new(2, vec![]).is_err());
        let q = QuasiCoefficients::new(3, vec![1.0]).unwrap();
        assert_eq!(q.stencil(), &[1.0, 0.0, 0.0]);
        assert!(q.exact().is_none());
    }

    #[test]
    fn order_mismatch() {
        let space = SplineSpace::new(3, 16).unwrap();
        let q = QuasiCoefficients::thomee_wendroff(2).unwrap();
        assert!(matches!(
            quasi_interpolate(&space, &q, &TestFunction::sin(1)),
            Err(Error::OrderMismatch { .. })
        ));
    }

    #[test]
    fn reproduces_constants() {
        for r in 2..=8 {
            let space = SplineSpace::new(r, 8 * r).unwrap();
            let q = QuasiCoefficients::thomee_wendroff(r).unwrap();
            let s = quasi_interpolate(&space, &q, &TestFunction::constant(1.0)).unwrap();
            for k in 0..100 {
                assert!((s.eval(k as f64 / 100.0) - 1.0).abs() < 1e-13, "r = {r}");
            }
        }
    }
}
