use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use perispline::gram::{gram_circulant, weighted_gamma_tail};
use perispline::{
    assemble_antisymmetric, assemble_symmetric, cardinal_bspline_eval, cardinal_bspline_fourier, certify_decay,
    cosine_symbol, decay_constants_from_band, demko_bound, gram_stencil, periodic_basis_eval, shift_apply,
    spectral_bounds, weighted_gamma_sum, AntisymmetricStencil, CirculantMatrix, GramSystem, PeriodicSpline,
    SplineSpace, SymbolEvaluator, SymmetricStencil, DEFAULT_SOLVE_TOL,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binom(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Truncated-power form of the centered cardinal B-spline.
fn truncated_power_bspline(r: usize, x: f64) -> f64 {
    let t = x + 0.5 * r as f64;
    let s: f64 = (0..=r)
        .map(|k| {
            let y = t - k as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            if y > 0.0 {
                sign * binom(r, k) * y.powi(r as i32 - 1)
            } else {
                0.0
            }
        })
        .sum();
    s / factorial(r - 1)
}

fn dense(c: &CirculantMatrix) -> DMatrix<f64> {
    let n = c.dim();
    DMatrix::from_fn(n, n, |i, k| c.first_row()[(k + n - i) % n])
}

#[test]
fn bspline_matches_truncated_powers() {
    for r in 1..=8 {
        for k in 0..=400 {
            // offset keeps the grid off the integer and half-integer breakpoints
            let x = -0.5 * r as f64 - 0.3 + (k as f64 + 0.137) * (r as f64 + 0.6) / 400.0;
            let got = cardinal_bspline_eval(r, x).unwrap();
            let want = truncated_power_bspline(r, x);
            assert!((got - want).abs() < 1e-12, "r={r} x={x}: {got} vs {want}");
        }
    }
}

#[test]
fn cubic_bspline_values() {
    assert!((cardinal_bspline_eval(4, 0.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    assert!((cardinal_bspline_eval(4, 1.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    assert!((cardinal_bspline_eval(4, 2.0).unwrap()).abs() < 1e-15);
    assert!(cardinal_bspline_eval(0, 0.0).is_err());
}

#[test]
fn bspline_self_convolution() {
    // v_{r+1}(x) = ∫ v_r(x - t) dt over [-1/2, 1/2], midpoint rule on each
    // polynomial piece
    let pts = 2000;
    for r in 1..=6 {
        for &x in &[0.0, 0.37, 1.1, -0.8] {
            let conv: f64 = (0..pts)
                .map(|k| {
                    let t = -0.5 + (k as f64 + 0.5) / pts as f64;
                    cardinal_bspline_eval(r, x - t).unwrap()
                })
                .sum::<f64>()
                / pts as f64;
            let want = cardinal_bspline_eval(r + 1, x).unwrap();
            assert!((conv - want).abs() < 1e-6, "r={r} x={x}");
        }
    }
}

#[test]
fn fourier_transform_by_quadrature() {
    for r in 1..=5 {
        let half = 0.5 * r as f64;
        let pts = 20000;
        for &xi in &[0.0, 0.5, 2.0, 7.3] {
            let ft: f64 = (0..pts)
                .map(|k| {
                    let x = -half + (k as f64 + 0.5) * 2.0 * half / pts as f64;
                    cardinal_bspline_eval(r, x).unwrap() * (xi * x).cos()
                })
                .sum::<f64>()
                * 2.0
                * half
                / pts as f64;
            assert!((ft - cardinal_bspline_fourier(r, xi)).abs() < 1e-6, "r={r} xi={xi}");
        }
    }
    assert_eq!(cardinal_bspline_fourier(3, 0.0), 1.0);
}

#[test]
fn spline_eval_against_naive_basis_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for r in 1..=6 {
        let space = SplineSpace::new(r, 4 * r + 3).unwrap();
        let coeffs: Vec<f64> = (0..space.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = PeriodicSpline::new(space, coeffs.clone()).unwrap();
        for _ in 0..50 {
            let x: f64 = rng.random_range(-1.0..2.0);
            let naive: f64 = (0..space.dim())
                .map(|j| coeffs[j] * periodic_basis_eval(&space, j as i64 + 1, x))
                .sum();
            assert!((s.eval(x) - naive).abs() < 1e-13, "r={r} x={x}");
        }
    }
}

#[test]
fn spline_derivative_by_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for r in 3..=6 {
        let space = SplineSpace::new(r, 24).unwrap();
        let coeffs: Vec<f64> = (0..space.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = PeriodicSpline::new(space, coeffs).unwrap();
        let ds = s.derivative().unwrap();
        let eps = 1e-6;
        for _ in 0..40 {
            let x: f64 = rng.random_range(0.0..1.0);
            let fd = (s.eval(x + eps) - s.eval(x - eps)) / (2.0 * eps);
            assert!((fd - ds.eval(x)).abs() < 1e-5 * (1.0 + fd.abs()), "r={r} x={x}");
        }
    }
}

#[test]
fn shift_examples() {
    assert_eq!(shift_apply(1, &[1.0, 2.0, 3.0, 4.0]), vec![2.0, 3.0, 4.0, 1.0]);
    assert_eq!(shift_apply(-1, &[1.0, 2.0, 3.0, 4.0]), vec![4.0, 1.0, 2.0, 3.0]);
    assert_eq!(shift_apply(4, &[1.0, 2.0, 3.0, 4.0]), vec![1.0, 2.0, 3.0, 4.0]);
    let p = CirculantMatrix::shift(4, 1);
    assert_eq!(p.matvec(&[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![2.0, 3.0, 4.0, 1.0]);
}

#[test]
fn circulant_against_dense_linear_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for n in [1, 2, 5, 16, 33] {
        let mut row: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        row[0] += 2.0 * n as f64;
        let c = CirculantMatrix::new(row).unwrap();
        let a = dense(&c);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let want = &a * DVector::from_column_slice(&v);
        for (x, y) in c.matvec(&v).unwrap().iter().zip(want.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
        for (x, y) in c.matvec_fft(&v).unwrap().iter().zip(want.iter()) {
            assert!((x - y).abs() < 1e-11);
        }
        let sol = a.clone().lu().solve(&DVector::from_column_slice(&v)).unwrap();
        for (x, y) in c.solve(&v, DEFAULT_SOLVE_TOL).unwrap().iter().zip(sol.iter()) {
            assert!((x - y).abs() < 1e-12 * (1.0 + y.abs()));
        }
        let other = CirculantMatrix::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let prod = dense(&c.mul(&other).unwrap());
        let want = &a * dense(&other);
        assert!((prod - want).amax() < 1e-11);
    }
}

#[test]
fn stencil_assembly_layout() {
    let s = assemble_symmetric(&SymmetricStencil {
        dim: 6,
        diag: 4.0,
        offsets: vec![1.0, 0.5, 0.25],
    })
    .unwrap();
    assert_eq!(s.first_row(), &[4.0, 1.0, 0.5, 0.25, 0.5, 1.0]);
    let a = assemble_antisymmetric(&AntisymmetricStencil {
        dim: 5,
        offsets: vec![1.0, 2.0],
    })
    .unwrap();
    assert_eq!(a.first_row(), &[0.0, 1.0, 2.0, -2.0, -1.0]);
    assert_eq!(a.transpose().first_row(), &[0.0, -1.0, -2.0, 2.0, 1.0]);
    assert!(assemble_antisymmetric(&AntisymmetricStencil {
        dim: 4,
        offsets: vec![1.0, 2.0],
    })
    .is_err());
}

#[test]
fn demko_constants_for_tridiagonal_band() {
    let d = demko_bound(1.0 / 3.0, 1.0, 1).unwrap();
    let want = 2.0 + 3f64.sqrt();
    assert!((d.rate - want).abs() < 1e-12);
    assert!((d.constant - want).abs() < 1e-12);
    assert!(demko_bound(0.0, 1.0, 1).is_err());
    assert!(demko_bound(1.0, 1.0, 1).is_err());
}

#[test]
fn gram_inverse_first_row_identities() {
    for r in 2..=6 {
        let gs = GramSystem::new(SplineSpace::new(r, 128).unwrap()).unwrap();
        let gamma = gs.inverse_first_row().unwrap();
        let g = gs.stencil();
        let first = g[0] * gamma[0] + 2.0 * (1..r).map(|j| g[j] * gamma[j]).sum::<f64>();
        assert!((first - 1.0).abs() < 1e-12, "r={r}: {first}");
        let inv = CirculantMatrix::new(gamma).unwrap();
        let prod = dense(gs.matrix()) * dense(&inv);
        let resid = (prod - DMatrix::identity(128, 128)).amax();
        assert!(resid <= 1e-12, "r={r}: {resid}");
    }
}

#[test]
fn weighted_sums_stable_in_dimension() {
    let sums: Vec<f64> = [64, 128, 256, 512, 1024]
        .iter()
        .map(|&n| {
            let gs = GramSystem::new(SplineSpace::new(2, n).unwrap()).unwrap();
            weighted_gamma_sum(&gs.inverse_first_row().unwrap())
        })
        .collect();
    for a in &sums {
        for b in &sums {
            assert!((a - b).abs() < 1e-8, "{sums:?}");
        }
    }
}

#[test]
fn gamma_decays_at_closed_form_rate_for_linear_splines() {
    let gs = GramSystem::new(SplineSpace::new(2, 64).unwrap()).unwrap();
    let gamma = gs.inverse_first_row().unwrap();
    let rate = 2.0 - 3f64.sqrt();
    for i in 2..=16 {
        let ratio = (gamma[i] / gamma[i - 1]).abs();
        assert!((ratio - rate).abs() < 1e-6, "i={i}: {ratio}");
    }
    // tail sum beyond i = 8 is geometric
    let tail = weighted_gamma_tail(&gamma, 8);
    let est: f64 = (8..=33).map(|i| (1.0 + i as f64) * gamma[i - 1].abs()).sum();
    assert!((tail - est).abs() < 1e-15);
}

#[test]
fn band_certificate_bounds_gamma() {
    for r in 2..=5 {
        let gs = GramSystem::new(SplineSpace::new(r, 128).unwrap()).unwrap();
        let gamma = gs.inverse_first_row().unwrap();
        let band = gs.banded_truncation_inverse().unwrap();
        let d = demko_bound(gs.g_lower(), band.lambda_max, r - 1).unwrap();
        let (c1, c2, q) = decay_constants_from_band(r, gs.g_lower(), &d);
        let cert = certify_decay(&gamma, r, c1, c2, q).unwrap();
        assert!(cert.valid, "r={r}: slack {}", cert.max_slack);
        let (count, _) = band.bound_violations(&band.demko().unwrap());
        assert_eq!(count, 0, "r={r}");
    }
}

#[test]
fn gram_lower_bound_decreases_with_order() {
    let lows: Vec<f64> = (1..=8).map(|r| spectral_bounds(r, 1024).unwrap().lower).collect();
    assert!((lows[0] - 1.0).abs() < 1e-12);
    assert!((lows[1] - 1.0 / 3.0).abs() < 1e-12);
    assert!((lows[2] - 2.0 / 15.0).abs() < 1e-12);
    for w in lows.windows(2) {
        assert!(w[1] < w[0], "{lows:?}");
    }
    for r in 1..=8 {
        let b = spectral_bounds(r, 1024).unwrap();
        assert!((b.upper - 1.0).abs() < 1e-12);
        if r > 1 {
            assert!((b.argmin - PI).abs() < 1e-6);
        }
    }
}

#[test]
fn lattice_symbol_matches_cosine_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for r in 2..=6 {
        let stencil = gram_stencil(r).unwrap();
        let sym = SymbolEvaluator::new(r).unwrap();
        for _ in 0..100 {
            let t: f64 = rng.random_range(0.0..2.0 * PI);
            let d = (sym.eval(t) - cosine_symbol(&stencil, t)).abs();
            assert!(d < 1e-10, "r={r} θ={t}: {d}");
        }
    }
    assert!(SymbolEvaluator::new(1).is_err());
}

#[test]
fn gram_eigenvalues_sample_the_symbol() {
    for r in 2..=6 {
        let n = 16;
        let g = gram_circulant(r, n).unwrap();
        let stencil = gram_stencil(r).unwrap();
        let mut eig = g.eigenvalues().unwrap();
        let mut sym: Vec<f64> = (0..n)
            .map(|m| cosine_symbol(&stencil, 2.0 * PI * m as f64 / n as f64))
            .collect();
        eig.sort_by(f64::total_cmp);
        sym.sort_by(f64::total_cmp);
        let dense_eig = dense(&g).symmetric_eigenvalues();
        let mut dense_eig: Vec<f64> = dense_eig.iter().copied().collect();
        dense_eig.sort_by(f64::total_cmp);
        for ((a, b), c) in eig.iter().zip(&sym).zip(&dense_eig) {
            assert!((a - b).abs() < 1e-13);
            assert!((c - b).abs() < 1e-12);
        }
    }
}
