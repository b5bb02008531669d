use proptest::prelude::*;

use perispline::projection::{derivative_power, sobolev_seminorm, sobolev_seminorm_quadrature};
use perispline::quasi::{apply_stencil, QuasiCoefficients};
use perispline::{
    cardinal_bspline_eval, cardinal_bspline_fourier, cosine_symbol, gram_matrix, gram_stencil, periodic_basis_eval,
    shift_apply, CirculantMatrix, PeriodicSpline, SplineSpace, DEFAULT_SOLVE_TOL,
};

fn space() -> impl Strategy<Value = SplineSpace> {
    (1usize..=8).prop_flat_map(|r| (Just(r), 4 * r..4 * r + 40)).prop_map(|(r, n)| SplineSpace::new(r, n).unwrap())
}

fn spline() -> impl Strategy<Value = PeriodicSpline> {
    space().prop_flat_map(|s| {
        prop::collection::vec(-1.0f64..1.0, s.dim()).prop_map(move |c| PeriodicSpline::new(s, c).unwrap())
    })
}

fn circulant(n: usize) -> impl Strategy<Value = CirculantMatrix> {
    prop::collection::vec(-1.0f64..1.0, n).prop_map(|c| CirculantMatrix::new(c).unwrap())
}

fn dominant(n: usize) -> impl Strategy<Value = CirculantMatrix> {
    prop::collection::vec(-1.0f64..1.0, n).prop_map(move |mut c| {
        c[0] = c[0].abs() + n as f64 + 1.0;
        CirculantMatrix::new(c).unwrap()
    })
}

proptest! {
    #[test]
    fn basis_partitions_unity(s in space(), x in -1.0f64..2.0) {
        let total: f64 = (1..=s.dim() as i64).map(|j| periodic_basis_eval(&s, j, x)).sum();
        prop_assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn basis_bounded_and_supported(s in space(), j in 1i64..40, x in 0.0f64..1.0) {
        let v = periodic_basis_eval(&s, j, x);
        prop_assert!((-1e-15..=1.0 + 1e-15).contains(&v));
        // distance from the support center, measured in cells on the circle
        let n = s.cells() as f64;
        let center = j as f64 + 0.5 * (s.order() as f64 - 2.0);
        let d = (x * n - center).rem_euclid(n);
        let d = d.min(n - d);
        if d > 0.5 * s.order() as f64 + 1e-9 {
            prop_assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn cardinal_bspline_is_even(r in 1usize..=12, x in -7.0f64..7.0) {
        let a = cardinal_bspline_eval(r, x).unwrap();
        let b = cardinal_bspline_eval(r, -x).unwrap();
        prop_assert!((a - b).abs() < 1e-14);
        prop_assert!(a >= 0.0);
        if x.abs() >= 0.5 * r as f64 {
            prop_assert_eq!(a, 0.0);
        }
    }

    #[test]
    fn fourier_transform_bounded(r in 1usize..=12, x in -50.0f64..50.0) {
        let f = cardinal_bspline_fourier(r, x);
        prop_assert!(f.abs() <= 1.0 + 1e-15);
        prop_assert!((f - cardinal_bspline_fourier(r, -x)).abs() < 1e-15);
    }

    #[test]
    fn spline_periodic(s in spline(), x in 0.0f64..1.0) {
        prop_assert!((s.eval(x) - s.eval(x + 1.0)).abs() < 1e-12);
        prop_assert!((s.eval(x) - s.eval(x - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn shifts_compose_and_invert(
        v in prop::collection::vec(-1.0f64..1.0, 1..30),
        a in -50i64..50,
        b in -50i64..50,
    ) {
        prop_assert_eq!(shift_apply(-a, &shift_apply(a, &v)), v.clone());
        prop_assert_eq!(shift_apply(b, &shift_apply(a, &v)), shift_apply(a + b, &v));
    }

    #[test]
    fn circulant_products_commute((a, b) in (1usize..24).prop_flat_map(|n| (circulant(n), circulant(n)))) {
        let ab = a.mul(&b).unwrap();
        let ba = b.mul(&a).unwrap();
        for (x, y) in ab.first_row().iter().zip(ba.first_row()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        // first row of AB is the first row of A times B
        let row = b.transpose().matvec(a.first_row()).unwrap();
        for (x, y) in ab.first_row().iter().zip(&row) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn solve_inverts_matvec((c, v) in (1usize..40).prop_flat_map(|n| (dominant(n), prop::collection::vec(-1.0f64..1.0, n)))) {
        let b = c.matvec(&v).unwrap();
        let x = c.solve(&b, DEFAULT_SOLVE_TOL).unwrap();
        for (p, q) in x.iter().zip(&v) {
            prop_assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn gram_rayleigh_quotient_within_symbol_bounds(s in spline()) {
        let g = gram_matrix(s.space()).unwrap();
        let v = s.coeffs();
        let gv = g.matvec(v).unwrap();
        let num: f64 = v.iter().zip(&gv).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().map(|a| a * a).sum();
        let stencil = gram_stencil(s.space().order()).unwrap();
        let lower = cosine_symbol(&stencil, std::f64::consts::PI);
        prop_assert!(num / den >= lower - 1e-12);
        prop_assert!(num / den <= 1.0 + 1e-12);
    }

    #[test]
    fn gram_norm_matches_quadrature(s in spline()) {
        let a = sobolev_seminorm(&s, 0).unwrap();
        let b = sobolev_seminorm_quadrature(&s, 0).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
    }

    #[test]
    fn derivative_annihilates_constants(s in space(), c in -5.0f64..5.0) {
        prop_assume!(s.order() >= 2);
        let d = derivative_power(&PeriodicSpline::constant(s, c), 1).unwrap();
        prop_assert!(d.coeffs().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn quasi_stencil_reproduces_constants(r in 2usize..=12, n in 1usize..64, c in -5.0f64..5.0) {
        let qc = QuasiCoefficients::thomee_wendroff(r).unwrap();
        let out = apply_stencil(&qc, &vec![c; n]);
        let sum: f64 = qc.stencil()[0] + 2.0 * qc.stencil()[1..].iter().sum::<f64>();
        for x in out {
            prop_assert!((x - c * sum).abs() < 1e-12 * (1.0 + c.abs()));
        }
        prop_assert!((sum - 1.0).abs() < 1e-12);
    }
}
