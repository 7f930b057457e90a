//! Refinement studies against closed-form solutions.

use paralab::dnl::{dnl_weak_residual, explicit_borderline, explicit_critical, DNLProblem};
use paralab::fields::{steklov_average, CoefficientField, SpaceTimeField};
use paralab::geometry::Grid;
use paralab::plaplace::{solve_cauchy_dirichlet, PLaplaceProblem, SolverParams, Source};
use paralab::stats::loglog_slope;
use std::f64::consts::PI;

fn heat_error(n: usize) -> f64 {
    let g = Grid::new(&[(0.0, PI)], &[n], 0.0, 0.1, 1e-5).unwrap();
    let exact = |x: &[f64], t: f64| (-t).exp() * x[0].sin();
    let a = CoefficientField::constant(1.0, g.extents()).unwrap();
    let pb = PLaplaceProblem::new(2.0, 0.0, 1, a, g.clone(), Source::scalar(exact), Source::scalar(exact)).unwrap();
    let sol = solve_cauchy_dirichlet(&pb, &SolverParams::default()).unwrap();
    sol.field.max_abs_diff(&SpaceTimeField::from_scalar_fn(&g, exact)).unwrap()
}

#[test]
fn heat_solver_is_second_order_in_space() {
    let ns = [9, 17, 33];
    let hs: Vec<f64> = ns.iter().map(|n| PI / (*n - 1) as f64).collect();
    let errs: Vec<f64> = ns.iter().map(|&n| heat_error(n)).collect();
    let fit = loglog_slope(&hs, &errs).unwrap();
    assert!((fit.slope - 2.0).abs() < 0.2, "slope {} from {errs:?}", fit.slope);
}

/// `zeta = sin(pi y1) sin(pi y2) (T - t) / T` on the unit box around the origin.
fn test_function(g: &Grid, half: f64) -> SpaceTimeField {
    let t_end = g.t_end();
    let t0 = g.t0();
    SpaceTimeField::from_scalar_fn(g, move |x, t| {
        let s: f64 = x.iter().map(|v| (PI * (v + half) / (2.0 * half)).sin()).product();
        s * (t_end - t) / (t_end - t0)
    })
}

fn residual_rate(sample: impl Fn(&Grid) -> (SpaceTimeField, DNLProblem), grids: &[Grid]) -> f64 {
    let mut dts = Vec::new();
    let mut res = Vec::new();
    for g in grids {
        let (u, pb) = sample(g);
        let half = g.extents()[0].1;
        let r = dnl_weak_residual(&u, &pb, &test_function(g, half)).unwrap();
        dts.push(g.dt());
        res.push(r.abs());
    }
    loglog_slope(&dts, &res).unwrap().slope
}

#[test]
fn critical_solution_weak_residual_vanishes() {
    let c = explicit_critical(2, 1.5).unwrap();
    let grids: Vec<Grid> = [(17, 0.02), (33, 0.01), (65, 0.005)]
        .iter()
        .map(|&(n, dt)| Grid::new(&[(-0.5, 0.5), (-0.5, 0.5)], &[n, n], 0.0, 0.2, dt).unwrap())
        .collect();
    let rate = residual_rate(
        |g| {
            let f = move |x: &[f64], t: f64| c.value(x, t);
            let pb = DNLProblem::new(c.p, c.q, g.clone(), Source::scalar(f), Source::scalar(f)).unwrap();
            (SpaceTimeField::from_scalar_fn(g, f), pb)
        },
        &grids,
    );
    assert!(rate >= 0.9, "rate {rate}");
}

#[test]
fn borderline_solution_weak_residual_vanishes() {
    let b = explicit_borderline(1.0, 1, 1.5).unwrap();
    let grids: Vec<Grid> = [(33, 0.02), (65, 0.01), (129, 0.005)]
        .iter()
        .map(|&(n, dt)| Grid::new(&[(-1.0, 1.0)], &[n], 1.0, 1.4, dt).unwrap())
        .collect();
    let rate = residual_rate(
        |g| {
            let f = move |x: &[f64], t: f64| b.value(x, t).unwrap();
            let pb = DNLProblem::new(b.p, b.p - 1.0, g.clone(), Source::scalar(f), Source::scalar(f)).unwrap();
            (SpaceTimeField::from_scalar_fn(g, f), pb)
        },
        &grids,
    );
    assert!(rate >= 0.9, "rate {rate}");
}

#[test]
fn steklov_average_converges_at_first_order() {
    let g = Grid::new(&[(0.0, 1.0)], &[9], 0.0, 1.0, 1.0 / 512.0).unwrap();
    let v = SpaceTimeField::from_scalar_fn(&g, |x, t| (3.0 * t).sin() + x[0] * t * t);
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    for k in 2..6 {
        let h = 0.5f64.powi(k);
        let avg = steklov_average(&v, h).unwrap();
        // compare only where the average is defined
        let last = ((1.0 - 0.5) / g.dt()) as usize;
        let mut err: f64 = 0.0;
        for l in 0..=last {
            for (a, b) in avg.level(l).iter().zip(v.level(l)) {
                err = err.max((a - b).abs());
            }
        }
        hs.push(h);
        errs.push(err);
    }
    let fit = loglog_slope(&hs, &errs).unwrap();
    assert!(fit.slope >= 0.9, "slope {}", fit.slope);
}
