//! L² projection onto a periodic spline space, spline derivatives and norms,
//! and the stability measurements built on them.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bspline::{PeriodicSpline, SplineSpace};
use crate::circulant::DEFAULT_SOLVE_TOL;
use crate::error::{Error, Result};
use crate::gram::{cosine_symbol, gram_matrix, gram_stencil};
use crate::quadrature::CellRule;

/// Default sample points per cell for sup norms.
pub const DEFAULT_SAMPLES_PER_CELL: usize = 32;

/// Smallest accepted sample density for sup norms.
pub const MIN_SAMPLES_PER_CELL: usize = 8;

/// Endpoint mismatch above which a test function is rejected as non-periodic.
pub const PERIODICITY_TOL: f64 = 1e-10;

/// Default Gauss points per cell for moments: `max(2r, 10)`.
pub fn default_nodes_per_cell(order: usize) -> usize {
    (2 * order).max(10)
}

type Eval = dyn Fn(f64, usize) -> f64 + Send + Sync;

/// A 1-periodic function with analytic derivatives up to `max_derivative`.
#[derive(Clone)]
pub struct TestFunction {
    label: String,
    max_derivative: usize,
    eval: Arc<Eval>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("label", &self.label)
            .field("max_derivative", &self.max_derivative)
            .finish_non_exhaustive()
    }
}

impl TestFunction {
    /// `eval(x, l)` must return `∂ˡu(x)` for every `l <= max_derivative`.
    pub fn new(
        label: impl Into<String>,
        max_derivative: usize,
        eval: impl Fn(f64, usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            max_derivative,
            eval: Arc::new(eval),
        }
    }

    /// `sin(2πkx)`, labelled `sin{k}`.
    pub fn sin(k: u32) -> Self {
        let w = 2.0 * PI * k as f64;
        Self::new(format!("sin{k}"), usize::MAX, move |x, l| {
            w.powi(l as i32) * (w * x + 0.5 * PI * (l % 4) as f64).sin()
        })
    }

    /// `cos(2πkx)`, labelled `cos{k}`.
    pub fn cos(k: u32) -> Self {
        let w = 2.0 * PI * k as f64;
        Self::new(format!("cos{k}"), usize::MAX, move |x, l| {
            w.powi(l as i32) * (w * x + 0.5 * PI * (l % 4) as f64).cos()
        })
    }

    /// `exp(sin 2πx)`, labelled `expsin`.
    ///
    /// Derivatives are `e^g Y_l(g', .., g^(l))` with the complete Bell
    /// polynomials `Y_{n+1} = Σ_k C(n,k) Y_{n-k} g^(k+1)`.
    pub fn exp_sin() -> Self {
        Self::new("expsin", usize::MAX, |x, l| {
            let w = 2.0 * PI;
            let g = |k: usize| w.powi(k as i32) * (w * x + 0.5 * PI * (k % 4) as f64).sin();
            let mut y = vec![1.0];
            for n in 0..l {
                let mut binom = 1.0;
                let mut next = 0.0;
                for k in 0..=n {
                    next += binom * y[n - k] * g(k + 1);
                    binom = binom * (n - k) as f64 / (k + 1) as f64;
                }
                y.push(next);
            }
            g(0).exp() * y[l]
        })
    }

    /// The constant `value`, labelled `const`.
    pub fn constant(value: f64) -> Self {
        Self::new("const", usize::MAX, move |_, l| if l == 0 { value } else { 0.0 })
    }

    /// `a_0 + Σ_{k=1}^{degree} (a_k cos 2πkx + b_k sin 2πkx)` with
    /// coefficients uniform in `[-1, 1]` drawn from a ChaCha8 stream seeded by
    /// `seed`. Labelled `randtrig`.
    pub fn random_trig(seed: u64, degree: u32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a0: f64 = rng.random_range(-1.0..=1.0);
        let terms: Vec<(f64, f64, f64)> = (1..=degree)
            .map(|k| {
                let a: f64 = rng.random_range(-1.0..=1.0);
                let b: f64 = rng.random_range(-1.0..=1.0);
                (2.0 * PI * k as f64, a, b)
            })
            .collect();
        Self::new("randtrig", usize::MAX, move |x, l| {
            let phase = 0.5 * PI * (l % 4) as f64;
            let mut s = if l == 0 { a0 } else { 0.0 };
            for &(w, a, b) in &terms {
                s += w.powi(l as i32) * (a * (w * x + phase).cos() + b * (w * x + phase).sin());
            }
            s
        })
    }

    /// The spline itself, with derivatives through order `r - 1`.
    pub fn from_spline(spline: &PeriodicSpline, label: impl Into<String>) -> Self {
        let r = spline.space().order();
        let derivs: Vec<PeriodicSpline> = (0..r)
            .map(|l| derivative_power(spline, l).expect("l < r"))
            .collect();
        Self::new(label, r - 1, move |x, l| derivs[l].eval(x))
    }

    /// `x ↦ u(x - delta)`, keeping the label.
    pub fn shifted(&self, delta: f64) -> Self {
        let eval = Arc::clone(&self.eval);
        Self {
            label: self.label.clone(),
            max_derivative: self.max_derivative,
            eval: Arc::new(move |x, l| eval(x - delta, l)),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn max_derivative(&self) -> usize {
        self.max_derivative
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.eval)(x, 0)
    }

    pub fn derivative(&self, l: usize, x: f64) -> Result<f64> {
        if l > self.max_derivative {
            return Err(Error::MissingDerivative {
                label: self.label.clone(),
                derivative: l,
            });
        }
        Ok((self.eval)(x, l))
    }

    /// Largest `|∂ˡu(0) - ∂ˡu(1)|` over `l <= min(max_derivative, up_to)`.
    pub fn periodicity_mismatch(&self, up_to: usize) -> f64 {
        (0..=self.max_derivative.min(up_to))
            .map(|l| ((self.eval)(0.0, l) - (self.eval)(1.0, l)).abs())
            .fold(0.0, f64::max)
    }

    fn check_periodic(&self) -> Result<()> {
        let mismatch = self.periodicity_mismatch(0);
        if mismatch > PERIODICITY_TOL * self.value(0.0).abs().max(1.0) {
            return Err(Error::NonPeriodic {
                label: self.label.clone(),
                mismatch,
            });
        }
        Ok(())
    }
}

/// The smooth corpus: `sin/cos(2πkx)` for `k ∈ {1, 2, 5}`, `exp(sin 2πx)`
/// and a seeded random trigonometric polynomial of degree 4.
pub fn smooth_corpus(seed: u64) -> Vec<TestFunction> {
    let mut corpus: Vec<TestFunction> = [1, 2, 5]
        .into_iter()
        .flat_map(|k| [TestFunction::sin(k), TestFunction::cos(k)])
        .collect();
    corpus.push(TestFunction::exp_sin());
    corpus.push(TestFunction::random_trig(seed, 4));
    corpus
}

/// Look up a corpus entry by label (`sin{k}`, `cos{k}`, `expsin`, `const`,
/// `randtrig`).
pub fn corpus_function(label: &str, seed: u64) -> Option<TestFunction> {
    match label {
        "expsin" => Some(TestFunction::exp_sin()),
        "const" => Some(TestFunction::constant(1.0)),
        "randtrig" => Some(TestFunction::random_trig(seed, 4)),
        _ => {
            let parse = |prefix: &str| {
                label
                    .strip_prefix(prefix)
                    .and_then(|k| k.parse::<u32>().ok())
                    .filter(|&k| k > 0)
            };
            parse("sin")
                .map(TestFunction::sin)
                .or_else(|| parse("cos").map(TestFunction::cos))
        }
    }
}

/// Moments `b_i = (u, Φ_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsMoments {
    pub values: Vec<f64>,
    pub nodes_per_cell: usize,
    /// `max_i |b_i(2n) - b_i(n)|` when refinement was requested.
    pub refinement_change: Option<f64>,
}

fn moments(space: &SplineSpace, f: impl Fn(f64) -> f64, nodes_per_cell: usize) -> Vec<f64> {
    let n = space.cells();
    let h = space.h();
    let rule = CellRule::new(nodes_per_cell).expect("nodes_per_cell >= 1");
    let mut b = vec![0.0; n];
    for cell in 0..n {
        for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
            let fx = w * h * f((cell as f64 + t) * h);
            for (s, phi) in space.local_basis(t).iter().enumerate() {
                b[space.local_index(cell, s)] += fx * phi;
            }
        }
    }
    b
}

/// `b_i = ∫_0^1 u Φ_i` by composite Gauss-Legendre with `nodes_per_cell`
/// points, optionally repeated at twice the density.
pub fn rhs_moments(
    space: &SplineSpace,
    u: &TestFunction,
    nodes_per_cell: usize,
    check_refinement: bool,
) -> Result<RhsMoments> {
    if nodes_per_cell < space.order() {
        return Err(Error::TooFewNodes {
            got: nodes_per_cell,
            min: space.order(),
        });
    }
    u.check_periodic()?;
    let values = moments(space, |x| u.value(x), nodes_per_cell);
    let refinement_change = check_refinement.then(|| {
        let fine = moments(space, |x| u.value(x), 2 * nodes_per_cell);
        fine.iter()
            .zip(&values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    });
    Ok(RhsMoments {
        values,
        nodes_per_cell,
        refinement_change,
    })
}

/// `P_h u` together with the system data `h G c = b`.
#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub spline: PeriodicSpline,
    pub rhs: Vec<f64>,
    pub coeffs: Vec<f64>,
    pub nodes_per_cell: usize,
}

impl ProjectionResult {
    /// `max_i |h (G c)_i - b_i|`.
    pub fn system_residual(&self) -> Result<f64> {
        let space = self.spline.space();
        let gc = gram_matrix(space)?.matvec(&self.coeffs)?;
        Ok(gc
            .iter()
            .zip(&self.rhs)
            .map(|(g, b)| (space.h() * g - b).abs())
            .fold(0.0, f64::max))
    }
}

pub fn project(space: &SplineSpace, u: &TestFunction) -> Result<ProjectionResult> {
    project_with(space, u, default_nodes_per_cell(space.order()))
}

pub fn project_with(space: &SplineSpace, u: &TestFunction, nodes_per_cell: usize) -> Result<ProjectionResult> {
    let rhs = rhs_moments(space, u, nodes_per_cell, false)?.values;
    let scaled: Vec<f64> = rhs.iter().map(|b| b / space.h()).collect();
    let coeffs = gram_matrix(space)?.solve(&scaled, DEFAULT_SOLVE_TOL)?;
    Ok(ProjectionResult {
        spline: PeriodicSpline::new(*space, coeffs.clone())?,
        rhs,
        coeffs,
        nodes_per_cell,
    })
}

/// `max_i |(u - P_h u, Φ_i)|`, both inner products by quadrature.
pub fn orthogonality_residual(result: &ProjectionResult, u: &TestFunction) -> Result<f64> {
    let space = result.spline.space();
    let npc = result.nodes_per_cell;
    let bu = rhs_moments(space, u, npc, false)?.values;
    let bs = moments(space, |x| result.spline.eval(x), npc);
    Ok(bu
        .iter()
        .zip(&bs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// `∂ˡs` by `l` applications of the spline derivative.
pub fn derivative_power(s: &PeriodicSpline, l: usize) -> Result<PeriodicSpline> {
    let r = s.space().order();
    if l >= r {
        return Err(Error::OrderUnderflow { derivative: l, order: r });
    }
    let mut out = s.clone();
    for _ in 0..l {
        out = out.derivative()?;
    }
    Ok(out)
}

/// `∂ˡs` with coefficients `h^{-l} Σ_m C(l,m) (-1)^m P^{-m} c`.
pub fn derivative_power_binomial(s: &PeriodicSpline, l: usize) -> Result<PeriodicSpline> {
    let space = s.space();
    let r = space.order();
    if l >= r {
        return Err(Error::OrderUnderflow { derivative: l, order: r });
    }
    let n = space.cells();
    let c = s.coeffs();
    let scale = (n as f64).powi(l as i32);
    let mut w = vec![0.0; n];
    let mut binom = 1.0;
    for m in 0..=l {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        for (j, wj) in w.iter_mut().enumerate() {
            *wj += sign * binom * c[(j + n - m % n) % n];
        }
        binom = binom * (l - m) as f64 / (m + 1) as f64;
    }
    for wj in &mut w {
        *wj *= scale;
    }
    PeriodicSpline::new(space.lowered(l)?, w)
}

/// `‖∂ˡs‖ = sqrt(h ⟨G W, W⟩)` with the Gram matrix of order `r - l`.
pub fn sobolev_seminorm(s: &PeriodicSpline, l: usize) -> Result<f64> {
    let d = derivative_power(s, l)?;
    let space = d.space();
    let w = d.coeffs();
    let gw = gram_matrix(space)?.matvec(w)?;
    let q: f64 = gw.iter().zip(w).map(|(a, b)| a * b).sum();
    Ok((space.h() * q).max(0.0).sqrt())
}

/// `‖∂ˡs‖` by per-cell Gauss quadrature of `(∂ˡs)^2`.
pub fn sobolev_seminorm_quadrature(s: &PeriodicSpline, l: usize) -> Result<f64> {
    let d = derivative_power(s, l)?;
    let space = d.space();
    let rule = CellRule::new(space.order())?;
    let mut total = 0.0;
    for cell in 0..space.cells() {
        for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
            total += w * d.eval_local(cell, t).powi(2);
        }
    }
    Ok((total * space.h()).sqrt())
}

/// `max |s|` over the `N · samples_per_cell` uniform points `k / (N spc)`.
///
/// A lower bound on the true sup norm.
pub fn sup_norm(s: &PeriodicSpline, samples_per_cell: usize) -> Result<f64> {
    check_samples(samples_per_cell)?;
    let mut m: f64 = 0.0;
    for cell in 0..s.space().cells() {
        for k in 0..samples_per_cell {
            m = m.max(s.eval_local(cell, k as f64 / samples_per_cell as f64).abs());
        }
    }
    Ok(m)
}

fn check_samples(samples_per_cell: usize) -> Result<()> {
    if samples_per_cell < MIN_SAMPLES_PER_CELL {
        return Err(Error::TooFewSamples {
            got: samples_per_cell,
            min: MIN_SAMPLES_PER_CELL,
        });
    }
    Ok(())
}

/// `‖∂ˡu‖` by composite Gauss-Legendre on `cells` cells.
pub fn function_l2_norm(u: &TestFunction, l: usize, cells: usize, nodes_per_cell: usize) -> Result<f64> {
    u.derivative(l, 0.0)?;
    let rule = CellRule::new(nodes_per_cell)?;
    Ok(rule
        .integrate_composite(cells, |x| (u.eval)(x, l).powi(2))
        .sqrt())
}

/// `max |∂ˡu|` over the same grid [`sup_norm`] uses.
pub fn function_sup_norm(u: &TestFunction, l: usize, cells: usize, samples_per_cell: usize) -> Result<f64> {
    check_samples(samples_per_cell)?;
    u.derivative(l, 0.0)?;
    let total = cells * samples_per_cell;
    Ok((0..total)
        .map(|k| (u.eval)(k as f64 / total as f64, l).abs())
        .fold(0.0, f64::max))
}

/// `‖u - s‖` by composite Gauss-Legendre over the spline's cells.
pub fn l2_error(u: &TestFunction, s: &PeriodicSpline, nodes_per_cell: usize) -> Result<f64> {
    let space = s.space();
    let rule = CellRule::new(nodes_per_cell)?;
    let h = space.h();
    let mut total = 0.0;
    for cell in 0..space.cells() {
        for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
            let x = (cell as f64 + t) * h;
            total += w * (u.value(x) - s.eval_local(cell, t)).powi(2);
        }
    }
    Ok((total * h).sqrt())
}

/// Least-squares slope of `log e` against `log(1/N)`.
pub fn observed_order(cells: &[usize], errors: &[f64]) -> Result<f64> {
    if cells.len() != errors.len() {
        return Err(Error::DimensionMismatch {
            expected: cells.len(),
            found: errors.len(),
        });
    }
    if cells.len() < 2 || errors.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidParameter(
            "observed order needs at least two positive errors".into(),
        ));
    }
    let xs: Vec<f64> = cells.iter().map(|&n| -(n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Norm settings shared by the stability measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormOptions {
    pub nodes_per_cell: usize,
    pub samples_per_cell: usize,
}

impl NormOptions {
    pub fn for_order(order: usize) -> Self {
        Self {
            nodes_per_cell: default_nodes_per_cell(order),
            samples_per_cell: DEFAULT_SAMPLES_PER_CELL,
        }
    }
}

/// `‖∂ˡ(A u)‖ / ‖∂ˡu‖` in L² and sup norm for an approximation `A u`.
///
/// A ratio is `None` when `∂ˡu` vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub order: usize,
    pub cells: usize,
    pub l: usize,
    pub label: String,
    pub ratio_l2: Option<f64>,
    pub ratio_sup: Option<f64>,
}

/// Denominators below this are treated as `∂ˡu ≡ 0`.
const ZERO_NORM: f64 = 1e-13;

pub(crate) fn ratios(
    approx: &PeriodicSpline,
    u: &TestFunction,
    l: usize,
    opts: NormOptions,
) -> Result<StabilityReport> {
    let space = approx.space();
    let d = derivative_power(approx, l)?;
    let num_l2 = sobolev_seminorm(approx, l)?;
    let num_sup = sup_norm(&d, opts.samples_per_cell)?;
    let den_l2 = function_l2_norm(u, l, space.cells(), opts.nodes_per_cell)?;
    let den_sup = function_sup_norm(u, l, space.cells(), opts.samples_per_cell)?;
    let ratio = |num: f64, den: f64| (den > ZERO_NORM).then(|| num / den);
    Ok(StabilityReport {
        order: space.order(),
        cells: space.cells(),
        l,
        label: u.label().to_string(),
        ratio_l2: ratio(num_l2, den_l2),
        ratio_sup: ratio(num_sup, den_sup),
    })
}

/// Stability ratios of the L² projection.
pub fn stability_report(space: &SplineSpace, u: &TestFunction, l: usize, opts: NormOptions) -> Result<StabilityReport> {
    if l >= space.order() {
        return Err(Error::OrderUnderflow {
            derivative: l,
            order: space.order(),
        });
    }
    u.derivative(l, 0.0)?;
    let p = project_with(space, u, opts.nodes_per_cell)?;
    ratios(&p.spline, u, l, opts)
}

/// `Σ_{m=0}^{l} C(l,m) (shift - m)^k (-1)^m` in exact integer arithmetic.
pub fn binomial_alternating_sum(l: i64, k: i64, shift: i64) -> Result<BigInt> {
    if l < 0 {
        return Err(Error::NegativeArgument("l"));
    }
    if k < 0 {
        return Err(Error::NegativeArgument("k"));
    }
    let mut sum = BigInt::zero();
    let mut binom = BigInt::one();
    for m in 0..=l {
        // 0^0 = 1
        let term = &binom * num_traits::pow(BigInt::from(shift - m), k as usize);
        if m % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        binom = binom * BigInt::from(l - m) / BigInt::from(m + 1);
    }
    Ok(sum)
}

/// `a_k = Σ_{m=0}^{l} C(l,m) m^k (-1)^m`, equal to `(-1)^k` times the
/// unshifted [`binomial_alternating_sum`].
pub fn binomial_moment(l: i64, k: i64) -> Result<BigInt> {
    let s = binomial_alternating_sum(l, k, 0)?;
    Ok(if k % 2 == 0 { s } else { -s })
}

/// Best constant `C` in `‖v'‖ <= C h^{-1} ‖v‖` on the space:
/// `max_m sqrt(4 sin^2(θ_m/2) g_{r-1}(θ_m) / g_r(θ_m))`, `θ_m = 2πm/N`.
pub fn inverse_inequality_constant(space: &SplineSpace) -> Result<f64> {
    let r = space.order();
    if r < 2 {
        return Err(Error::CannotDifferentiate);
    }
    let lower = gram_stencil(r - 1)?;
    let upper = gram_stencil(r)?;
    let n = space.cells();
    Ok((0..n)
        .map(|m| {
            let t = 2.0 * PI * m as f64 / n as f64;
            let s = 2.0 * (0.5 * t).sin();
            (s * s * cosine_symbol(&lower, t) / cosine_symbol(&upper, t)).sqrt()
        })
        .fold(0.0, f64::max))
}

/// `h ‖v'‖ / ‖v‖`, or 0 for `v = 0`.
pub fn inverse_inequality_ratio(v: &PeriodicSpline) -> Result<f64> {
    let den = sobolev_seminorm(v, 0)?;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(v.space().h() * sobolev_seminorm(v, 1)? / den)
}
