//! The sweep subcommands. Each returns a sorted [`Report`].

use std::f64::consts::PI;

use perispline::gram::{
    certify_decay, cosine_symbol, decay_constants_from_band, fit_decay, gram_circulant, gram_stencil,
    gram_stencil_quadrature, spectral_bounds, weighted_gamma_sum, GramSystem, SymbolEvaluator,
    DEFAULT_SYMBOL_SAMPLES, MAX_DENSE_DIM,
};
use perispline::projection::{
    corpus_function, default_nodes_per_cell, inverse_inequality_constant, l2_error, observed_order,
    orthogonality_residual, project_with, stability_report, NormOptions, StabilityReport, TestFunction,
};
use perispline::quasi::{quasi_interpolate_aligned, quasi_stability_report, QuasiCoefficients, SampleAlignment};
use perispline::{demko_bound, SplineSpace, DEFAULT_SOLVE_TOL};

use crate::config::SweepConfig;
use crate::report::{Report, ReportRow, Value};

/// Tolerance on the spread `max/min` of a plateau.
pub const PLATEAU_TOL: f64 = 1.05;

/// Allowed distance of an observed convergence order from `r`.
pub const ORDER_TOL: f64 = 0.2;

/// Decay rate used for `r = 1`, where `γ = e_1` and any rate certifies.
const TRIVIAL_RATE: f64 = 2.0;

pub type CommandResult = Result<Report, perispline::Error>;

/// `max / min` of the finite entries, or `None` if fewer than two or any
/// entry is nonpositive.
pub fn spread(values: &[f64]) -> Option<f64> {
    if values.len() < 2 || values.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    let min = values.iter().copied().fold(f64::MAX, f64::min);
    Some(max / min)
}

fn space(r: usize, n: usize) -> Result<SplineSpace, perispline::Error> {
    SplineSpace::new(r, n)
}

fn corpus(cfg: &SweepConfig) -> Vec<TestFunction> {
    cfg.corpus
        .iter()
        .map(|label| corpus_function(label, cfg.seed).expect("validated corpus"))
        .collect()
}

fn norm_options(cfg: &SweepConfig, r: usize) -> NormOptions {
    NormOptions {
        nodes_per_cell: cfg.nodes_per_cell.unwrap_or_else(|| default_nodes_per_cell(r)),
        samples_per_cell: cfg.samples_per_cell,
    }
}

/// Stencils, spectral bounds and eigenvalue/symbol consistency.
pub fn gram(cfg: &SweepConfig) -> CommandResult {
    const EXP: &str = "gram";
    let mut rep = Report::new(EXP, cfg.seed);
    for &r in &cfg.r_list {
        let g = gram_stencil(r)?;
        for (j, gj) in g.iter().enumerate() {
            rep.push(ReportRow::new(EXP, format!("g_{}", j + 1), *gj).r(r));
        }
        let row_sum = g[0] + 2.0 * g[1..].iter().sum::<f64>();
        rep.push(ReportRow::new(EXP, "row_sum_residual", (row_sum - 1.0).abs()).r(r).check((row_sum - 1.0).abs() <= 1e-13));
        let quad = gram_stencil_quadrature(&space(r, 4 * r)?);
        let dev = g.iter().zip(&quad).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        rep.push(ReportRow::new(EXP, "quadrature_deviation", dev).r(r).check(dev <= 1e-13));
        let bounds = spectral_bounds(r, DEFAULT_SYMBOL_SAMPLES)?;
        rep.push(ReportRow::new(EXP, "g_lower", bounds.lower).r(r));
        rep.push(ReportRow::new(EXP, "g_upper", bounds.upper).r(r).check((bounds.upper - 1.0).abs() <= 1e-10));
        let lattice = SymbolEvaluator::new(r).ok();
        rep.push(ReportRow::new(EXP, "lattice_cutoff", lattice.map_or(Value::Missing, |s| Value::Count(s.cutoff() as u64))).r(r));
        for &n in &cfg.n_list {
            let eig = gram_circulant(r, n)?.eigenvalues()?;
            let theta = |m: usize| 2.0 * PI * m as f64 / n as f64;
            let cos_res = eig
                .iter()
                .enumerate()
                .map(|(m, l)| (l - cosine_symbol(&g, theta(m))).abs())
                .fold(0.0, f64::max);
            rep.push(ReportRow::new(EXP, "eig_vs_cosine_symbol", cos_res).r(r).n(n).check(cos_res < 1e-10));
            let lat_res = lattice.map(|s| {
                eig.iter()
                    .enumerate()
                    .map(|(m, l)| (l - s.eval(theta(m))).abs())
                    .fold(0.0, f64::max)
            });
            let mut row = ReportRow::new(EXP, "eig_vs_lattice_symbol", Value::from(lat_res)).r(r).n(n);
            if let Some(res) = lat_res {
                row = row.check(res < 1e-10);
            }
            rep.push(row);
            let lmin = eig.iter().copied().fold(f64::MAX, f64::min);
            let lmax = eig.iter().copied().fold(f64::MIN, f64::max);
            rep.push(ReportRow::new(EXP, "lambda_min", lmin).r(r).n(n).check(lmin >= bounds.lower - 1e-12));
            rep.push(ReportRow::new(EXP, "lambda_max", lmax).r(r).n(n).check((lmax - 1.0).abs() <= 1e-10));
        }
    }
    rep.sort();
    Ok(rep)
}

/// Decay of the inverse Gram row, weighted sums and the Demko check of the
/// band truncation.
pub fn decay(cfg: &SweepConfig) -> CommandResult {
    const EXP: &str = "decay";
    let mut rep = Report::new(EXP, cfg.seed);
    for &r in &cfg.r_list {
        let g_lower = spectral_bounds(r, DEFAULT_SYMBOL_SAMPLES)?.lower;
        let q_fit = if r == 1 {
            TRIVIAL_RATE
        } else {
            demko_bound(g_lower, 1.0, r - 1)?.rate
        };
        rep.push(ReportRow::new(EXP, "fit_rate", q_fit).r(r));
        let mut sums = Vec::new();
        let mut fits = Vec::new();
        for &n in &cfg.n_list {
            let gs = GramSystem::new(space(r, n)?)?;
            let gamma = gs.inverse_first_row()?;
            for (i, gi) in gamma.iter().take(n / 2 + 1).enumerate() {
                rep.push(ReportRow::new(EXP, format!("gamma_{}", i + 1), *gi).r(r).n(n));
            }
            let mut e1 = vec![0.0; n];
            e1[0] = 1.0;
            let fft = gs.matrix().solve(&e1, DEFAULT_SOLVE_TOL)?;
            let dev = gamma.iter().zip(&fft).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            rep.push(ReportRow::new(EXP, "gamma_fft_deviation", dev).r(r).n(n).check(dev <= 1e-12));
            let fit = fit_decay(&gamma, r, q_fit)?;
            fits.push(fit.c1);
            rep.push(ReportRow::new(EXP, "fit_constant", fit.c1).r(r).n(n));
            let ws = weighted_gamma_sum(&gamma);
            sums.push(ws);
            rep.push(ReportRow::new(EXP, "weighted_sum", ws).r(r).n(n));
            if r == 1 {
                let cert = certify_decay(&gamma, r, 1.0, 1.0, TRIVIAL_RATE)?;
                rep.push(ReportRow::new(EXP, "certificate", Value::Count(cert.valid as u64)).r(r).n(n).check(cert.valid));
            } else if n <= MAX_DENSE_DIM {
                let band = gs.banded_truncation_inverse()?;
                let demko = band.demko()?;
                let (violations, worst) = band.bound_violations(&demko);
                rep.push(ReportRow::new(EXP, "demko_constant", demko.constant).r(r).n(n));
                rep.push(ReportRow::new(EXP, "demko_rate", demko.rate).r(r).n(n));
                rep.push(ReportRow::new(EXP, "demko_violations", Value::Count(violations as u64)).r(r).n(n).check(violations == 0));
                rep.push(ReportRow::new(EXP, "demko_worst_ratio", worst).r(r).n(n));
                let (c1, c2, q) = decay_constants_from_band(r, gs.g_lower(), &demko);
                let cert = certify_decay(&gamma, r, c1, c2, q)?;
                rep.push(ReportRow::new(EXP, "certificate_c1", c1).r(r).n(n));
                rep.push(ReportRow::new(EXP, "certificate_c2", c2).r(r).n(n));
                rep.push(ReportRow::new(EXP, "certificate", Value::Count(cert.valid as u64)).r(r).n(n).check(cert.valid));
            } else {
                rep.push(ReportRow::new(EXP, "certificate", Value::Count(fit.valid as u64)).r(r).n(n).check(fit.valid));
            }
        }
        let ws_tol = if r <= 2 { 1.01 } else { PLATEAU_TOL };
        let ws_spread = spread(&sums);
        let mut row = ReportRow::new(EXP, "weighted_sum_spread", Value::from(ws_spread)).r(r);
        if let Some(s) = ws_spread {
            row = row.check(s <= ws_tol);
        }
        rep.push(row);
        let fit_spread = spread(&fits);
        let mut row = ReportRow::new(EXP, "fit_constant_spread", Value::from(fit_spread)).r(r);
        if let Some(s) = fit_spread {
            row = row.check(s <= PLATEAU_TOL);
        }
        rep.push(row);
    }
    rep.sort();
    Ok(rep)
}

fn stability_rows(exp: &str, reports: &[StabilityReport], l_zero_bound: Option<f64>) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for s in reports {
        let base = |metric: &str, v: Option<f64>| {
            ReportRow::new(exp, metric, Value::from(v))
                .r(s.order)
                .n(s.cells)
                .l(s.l)
                .function(&s.label)
        };
        let mut l2 = base("ratio_l2", s.ratio_l2);
        let mut sup = base("ratio_sup", s.ratio_sup);
        if s.l == 0 {
            if let (Some(bound), Some(v)) = (l_zero_bound, s.ratio_l2) {
                if exp == "project" {
                    l2 = l2.check(v <= bound);
                }
            }
            if let (Some(bound), Some(v)) = (l_zero_bound, s.ratio_sup) {
                if exp == "quasi" {
                    sup = sup.check(v <= bound);
                }
            }
        }
        rows.push(l2);
        rows.push(sup);
    }
    rows
}

fn plateau_rows(exp: &str, r: usize, label: &str, l: usize, reports: &[StabilityReport]) -> Vec<ReportRow> {
    let pick = |f: fn(&StabilityReport) -> Option<f64>| reports.iter().map(f).collect::<Option<Vec<f64>>>();
    let mut rows = Vec::new();
    for (metric, values) in [
        ("ratio_l2_spread", pick(|s| s.ratio_l2)),
        ("ratio_sup_spread", pick(|s| s.ratio_sup)),
    ] {
        let sp = values.as_deref().and_then(spread);
        let mut row = ReportRow::new(exp, metric, Value::from(sp)).r(r).l(l).function(label);
        if let Some(s) = sp {
            row = row.check(s <= PLATEAU_TOL);
        }
        rows.push(row);
    }
    rows
}

fn order_row(exp: &str, metric: &str, r: usize, label: &str, cells: &[usize], errors: &[f64], checked: bool) -> ReportRow {
    // errors at roundoff level carry no rate
    let usable = errors.iter().all(|&e| e > 1e-13);
    let p = if usable { observed_order(cells, errors).ok() } else { None };
    let mut row = ReportRow::new(exp, metric, Value::from(p)).r(r).function(label);
    if let (true, Some(p)) = (checked, p) {
        row = row.check((p - r as f64).abs() <= ORDER_TOL);
    }
    row
}

fn inverse_inequality_rows(exp: &str, cfg: &SweepConfig, r: usize) -> Result<Vec<ReportRow>, perispline::Error> {
    let mut rows = Vec::new();
    let mut cs = Vec::new();
    for &n in &cfg.n_list {
        let c = inverse_inequality_constant(&space(r, n)?)?;
        cs.push(c);
        rows.push(ReportRow::new(exp, "inverse_inequality_constant", c).r(r).n(n));
    }
    let sp = spread(&cs);
    let mut row = ReportRow::new(exp, "inverse_inequality_spread", Value::from(sp)).r(r);
    if let Some(s) = sp {
        row = row.check(s <= 1.01);
    }
    rows.push(row);
    Ok(rows)
}

/// Projection stability ratios, orthogonality, errors and rates.
pub fn project(cfg: &SweepConfig) -> CommandResult {
    const EXP: &str = "project";
    let mut rep = Report::new(EXP, cfg.seed);
    for &r in &cfg.r_list {
        let opts = norm_options(cfg, r);
        let ls: Vec<usize> = cfg.l_values(r).into_iter().filter(|&l| l < r).collect();
        for u in corpus(cfg) {
            let mut errors = Vec::new();
            let mut by_l: Vec<Vec<StabilityReport>> = vec![Vec::new(); ls.len()];
            for &n in &cfg.n_list {
                let sp = space(r, n)?;
                let p = project_with(&sp, &u, opts.nodes_per_cell)?;
                let orth = orthogonality_residual(&p, &u)?;
                rep.push(ReportRow::new(EXP, "orthogonality_residual", orth).r(r).n(n).function(u.label()).check(orth <= 1e-10));
                let err = l2_error(&u, &p.spline, opts.nodes_per_cell)?;
                errors.push(err);
                rep.push(ReportRow::new(EXP, "l2_error", err).r(r).n(n).function(u.label()));
                for (k, &l) in ls.iter().enumerate() {
                    by_l[k].push(stability_report(&sp, &u, l, opts)?);
                }
            }
            for (k, &l) in ls.iter().enumerate() {
                rep.extend(stability_rows(EXP, &by_l[k], Some(1.0 + 1e-12)));
                rep.extend(plateau_rows(EXP, r, u.label(), l, &by_l[k]));
            }
            rep.push(order_row(EXP, "observed_order", r, u.label(), &cfg.n_list, &errors, true));
        }
        rep.extend(inverse_inequality_rows(EXP, cfg, r)?);
    }
    rep.sort();
    Ok(rep)
}

/// Thomée–Wendroff quasiinterpolant: stencils, stability ratios against
/// the explicit sup constant, errors and rates.
pub fn quasi(cfg: &SweepConfig) -> CommandResult {
    const EXP: &str = "quasi";
    let mut rep = Report::new(EXP, cfg.seed);
    for &r in &cfg.r_list {
        let qc = QuasiCoefficients::thomee_wendroff(r)?;
        for (m, q) in qc.stencil().iter().enumerate() {
            rep.push(ReportRow::new(EXP, format!("q_{m}"), *q).r(r));
        }
        let exact_one = qc
            .exact_symbol_at_zero_and_pi()
            .is_some_and(|(z, _)| z == num_rational::BigRational::from_integer(1.into()));
        rep.push(ReportRow::new(EXP, "symbol_at_zero_is_one", Value::Count(exact_one as u64)).r(r).check(exact_one));
        let c0 = qc.sup_constant();
        rep.push(ReportRow::new(EXP, "sup_constant", c0).r(r));
        let opts = norm_options(cfg, r);
        let ls: Vec<usize> = cfg.l_values(r).into_iter().filter(|&l| l < r).collect();
        for u in corpus(cfg) {
            let mut centered = Vec::new();
            let mut nodal = Vec::new();
            let mut by_l: Vec<Vec<StabilityReport>> = vec![Vec::new(); ls.len()];
            for &n in &cfg.n_list {
                let sp = space(r, n)?;
                let qc_err = |align| -> Result<f64, perispline::Error> {
                    l2_error(&u, &quasi_interpolate_aligned(&sp, &qc, &u, align)?, opts.nodes_per_cell)
                };
                let ec = qc_err(SampleAlignment::BasisCenters)?;
                let en = qc_err(SampleAlignment::Nodes)?;
                centered.push(ec);
                nodal.push(en);
                rep.push(ReportRow::new(EXP, "l2_error_centered", ec).r(r).n(n).function(u.label()));
                rep.push(ReportRow::new(EXP, "l2_error_nodes", en).r(r).n(n).function(u.label()));
                for (k, &l) in ls.iter().enumerate() {
                    by_l[k].push(quasi_stability_report(&sp, &qc, &u, l, opts, SampleAlignment::Nodes)?);
                }
            }
            for (k, &l) in ls.iter().enumerate() {
                rep.extend(stability_rows(EXP, &by_l[k], Some(c0 + 1e-12)));
                rep.extend(plateau_rows(EXP, r, u.label(), l, &by_l[k]));
            }
            rep.push(order_row(EXP, "observed_order_centered", r, u.label(), &cfg.n_list, &centered, true));
            rep.push(order_row(EXP, "observed_order_nodes", r, u.label(), &cfg.n_list, &nodal, false));
        }
        rep.extend(inverse_inequality_rows(EXP, cfg, r)?);
    }
    rep.sort();
    Ok(rep)
}
