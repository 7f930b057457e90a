use super::*;
use crate::geometry::Grid;

fn line(n: usize, t_end: f64, dt: f64) -> Grid {
    Grid::new(&[(0.0, 1.0)], &[n], 0.0, t_end, dt).unwrap()
}

#[test]
fn zero_data_stays_zero() {
    let g = line(21, 0.1, 0.01);
    let pb = DNLProblem::new(1.5, 2.0, g, Source::constant(vec![0.0]), Source::constant(vec![0.0])).unwrap();
    let sol = solve_dnl(&pb, &SolverParams::default()).unwrap();
    assert_eq!(sol.field.max_abs(), 0.0);
}

#[test]
fn heat_case_matches_separable_solution() {
    let pi = std::f64::consts::PI;
    let g = Grid::new(&[(0.0, pi)], &[65], 0.0, 0.2, 1e-3).unwrap();
    let exact = |x: &[f64], t: f64| (-t).exp() * x[0].sin();
    let pb = DNLProblem::new(2.0, 1.0, g.clone(), Source::scalar(exact), Source::scalar(exact)).unwrap();
    let sol = solve_dnl(&pb, &SolverParams::default()).unwrap();
    let oracle = SpaceTimeField::from_scalar_fn(&g, exact);
    assert!(sol.field.max_abs_diff(&oracle).unwrap() < 2e-3);
}

#[test]
fn rejects_negative_data_and_bad_exponents() {
    let g = line(11, 0.1, 0.05);
    assert!(DNLProblem::new(2.0, 2.0, g.clone(), Source::constant(vec![-0.1]), Source::constant(vec![-0.1])).is_err());
    assert!(DNLProblem::new(2.0, 0.5, g, Source::constant(vec![0.0]), Source::constant(vec![0.0])).is_err());
}

#[test]
fn norm_decays_and_order_is_preserved() {
    let g = line(41, 0.1, 0.002);
    let pi = std::f64::consts::PI;
    let params = SolverParams::default();
    let low = DNLProblem::new(2.0, 2.0, g.clone(), Source::scalar(move |x, _| 0.5 * (pi * x[0]).sin()), Source::constant(vec![0.0])).unwrap();
    let high = DNLProblem::new(
        2.0,
        2.0,
        g.clone(),
        Source::scalar(move |x, _| (pi * x[0]).sin() + 0.2 * (2.0 * pi * x[0]).sin().abs()),
        Source::constant(vec![0.0]),
    )
    .unwrap();
    let a = solve_dnl(&low, &params).unwrap().field;
    let b = solve_dnl(&high, &params).unwrap().field;
    for l in 1..g.levels() {
        assert!(level_power_integral(&a, l, 3.0) <= level_power_integral(&a, l - 1, 3.0) * (1.0 + 1e-12));
    }
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!(*x <= *y + 1e-9);
        assert!(*x >= 0.0);
    }
}

#[test]
fn rescale_identity_and_constants() {
    let g = Grid::new(&[(-2.0, 2.0), (-2.0, 2.0)], &[41, 41], -2.0, 2.0, 0.1).unwrap();
    let u = SpaceTimeField::from_scalar_fn(&g, |x, t| 1.0 + 0.1 * x[0] - 0.05 * x[1] + 0.02 * t);
    let z = Point::new(&[0.0, 0.0], 0.0);
    let r = rescale(&u, &z, 1.0, 1.0, 1.5, 2.0, 21).unwrap();
    for l in 0..r.grid().levels() {
        for v in 0..r.grid().num_nodes() {
            let y = r.grid().coord(v);
            let want = 1.0 + 0.1 * y[0] - 0.05 * y[1] + 0.02 * r.grid().time(l);
            assert!((r.get(l, v, 0) - want).abs() < 1e-12);
        }
    }
    let c = SpaceTimeField::from_scalar_fn(&g, |_, _| 0.8);
    let r = rescale(&c, &Point::new(&[0.3, -0.2], 0.1), 0.5, 0.8, 1.5, 2.0, 11).unwrap();
    assert!(r.values().iter().all(|v| (v - 1.0).abs() < 1e-14));
    assert!(rescale(&c, &Point::new(&[1.8, 0.0], 0.0), 0.5, 0.8, 1.5, 2.0, 11).is_err());
}

#[test]
fn coefficient_form_bounds() {
    let g = Grid::new(&[(-1.0, 1.0)], &[21], -1.0, 1.0, 0.1).unwrap();
    let one = SpaceTimeField::from_scalar_fn(&g, |_, _| 1.0);
    let form = to_coefficient_form(&one, 1.5, 2.0).unwrap();
    assert!((form.a.eval(&[0.3], 0.2) - 0.5f64.powf(0.5)).abs() < 1e-15);
    assert!(form.v.values().iter().all(|v| *v == 1.0));

    let u = SpaceTimeField::from_scalar_fn(&g, |x, t| 1.0 + 0.5 * x[0] * (1.0 + 0.3 * t));
    for (p, q) in [(1.5, 2.0), (3.0, 2.5), (1.8, 0.9), (2.0, 1.0)] {
        let form = to_coefficient_form(&u, p, q).unwrap();
        for l in 0..g.levels() {
            for v in 0..g.num_nodes() {
                let a = form.a.eval(&g.coords(v), g.time(l));
                assert!(a >= form.a.c_lower * (1.0 - 1e-12) && a <= form.a.c_upper * (1.0 + 1e-12));
            }
        }
        if q == 1.0 {
            assert_eq!(form.a.c_lower, form.a.c_upper);
        }
    }
    let neg = SpaceTimeField::from_scalar_fn(&g, |x, _| x[0]);
    assert!(to_coefficient_form(&neg, 1.5, 2.0).is_err());
}
