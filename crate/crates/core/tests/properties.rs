use paralab::dnl::to_coefficient_form;
use paralab::fields::{gradient_field, lr_norm, mollify_coefficient, steklov_average, CoefficientField, SpaceTimeField};
use paralab::geometry::{intrinsic_cylinder, intrinsic_par_distance, par_distance, Grid, Point};
use paralab::plaplace::{flux_gap, PLaplaceProblem, SolverParams, Source};
use paralab::verify::{empirical_harnack, fit_holder_exponent};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Point> {
    (-2.0..2.0f64, -2.0..2.0f64, -1.0..1.0f64).prop_map(|(x, y, t)| Point::new(&[x, y], t))
}

fn random_field(grid: &Grid, seed: u64) -> SpaceTimeField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = grid.levels() * grid.num_nodes();
    SpaceTimeField::from_values(grid, 1, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

/// Envelope of the normalised flux ratios per `p`, from dense sampling over
/// random and collinear pairs with `mu` in {0, 0.1, 1}, widened by 2%.
pub fn flux_envelope(p: f64) -> (f64, f64) {
    let (lo, hi) = match p {
        p if p == 1.2 => (0.263_901_582, 1.489_018_968),
        p if p == 1.5 => (0.594_603_557, 1.218_515_944),
        p if p == 2.0 => (1.0, 1.0),
        p if p == 3.0 => (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::SQRT_2),
        p if p == 4.0 => (0.5, 1.5),
        _ => panic!("no frozen envelope for p = {p}"),
    };
    (lo * 0.98, hi * 1.02)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn par_distance_is_a_metric(a in point(), b in point(), c in point()) {
        let ab = par_distance(&a, &b);
        prop_assert_eq!(ab, par_distance(&b, &a));
        prop_assert_eq!(par_distance(&a, &a), 0.0);
        if a != b {
            prop_assert!(ab > 0.0);
        }
        prop_assert!(ab <= par_distance(&a, &c) + par_distance(&c, &b) + 1e-12);
    }

    #[test]
    fn intrinsic_distance_reduces(a in point(), b in point(), lambda in 0.1..10.0f64, p in 1.1..4.0f64) {
        prop_assert_eq!(intrinsic_par_distance(&a, &b, 1.0, p), par_distance(&a, &b));
        prop_assert_eq!(intrinsic_par_distance(&a, &b, lambda, 2.0), par_distance(&a, &b));
    }

    #[test]
    fn intrinsic_duration_is_monotone(l1 in 0.1..10.0f64, ratio in 1.01..5.0f64, rho in 0.05..1.0f64, p in prop_oneof![1.1..1.95f64, 2.05..4.0f64]) {
        let z = Point::new(&[0.0, 0.0], 0.0);
        let s1 = intrinsic_cylinder(&z, rho, l1, p).unwrap().duration;
        let s2 = intrinsic_cylinder(&z, rho, l1 * ratio, p).unwrap().duration;
        if p > 2.0 { prop_assert!(s2 < s1) } else { prop_assert!(s2 > s1) }
    }

    #[test]
    fn smaller_cylinders_have_fewer_nodes(r in 0.1..0.45f64, grow in 1.0..2.0f64, lambda in 0.5..2.0f64, p in 1.5..3.0f64) {
        let g = Grid::new(&[(-1.0, 1.0), (-1.0, 1.0)], &[41, 41], 0.0, 1.0, 0.01).unwrap();
        let z = Point::new(&[0.1, -0.05], 1.0);
        let small = intrinsic_cylinder(&z, r, lambda, p).unwrap();
        let big = intrinsic_cylinder(&z, (r * grow).min(0.85), lambda, p).unwrap();
        if let (Ok(a), Ok(b)) = (small.node_set(&g), big.node_set(&g)) {
            prop_assert!(a.first_level >= b.first_level && a.last_level <= b.last_level);
            prop_assert!(a.nodes.iter().all(|v| b.nodes.contains(v)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn steklov_contracts_lr_norms(seed in any::<u64>(), steps in 1usize..6, p in 1.1..4.0f64) {
        let g = Grid::new(&[(0.0, 1.0), (0.0, 1.0)], &[9, 8], 0.0, 1.0, 0.05).unwrap();
        let v = random_field(&g, seed);
        let avg = steklov_average(&v, steps as f64 * 0.05).unwrap();
        for r in [1.0, 2.0, p] {
            prop_assert!(lr_norm(&avg, r) <= lr_norm(&v, r) * (1.0 + 1e-12), "r = {}", r);
        }
    }

    #[test]
    fn steklov_commutes_with_gradient(seed in any::<u64>(), h in 0.01..0.6f64) {
        let g = Grid::new(&[(0.0, 1.0), (0.0, 2.0)], &[8, 11], 0.0, 1.0, 0.1).unwrap();
        let v = random_field(&g, seed);
        let a = gradient_field(&steklov_average(&v, h).unwrap());
        let b = steklov_average(&gradient_field(&v), h).unwrap();
        prop_assert!(a.max_abs_diff(&b).unwrap() <= 1e-12);
    }

    #[test]
    fn flux_ratios_stay_in_envelope(
        xi in prop::collection::vec(-10.0..10.0f64, 4),
        eta in prop::collection::vec(-10.0..10.0f64, 4),
        scale in -3.0..3.0f64,
        p in prop::sample::select(vec![1.2, 1.5, 2.0, 3.0, 4.0]),
        mu in prop::sample::select(vec![0.0, 0.1, 1.0]),
    ) {
        let s = 10f64.powf(scale);
        let a: Vec<f64> = xi.iter().map(|v| v * s).collect();
        let b: Vec<f64> = eta.iter().map(|v| v * s).collect();
        prop_assume!(a != b);
        let (lip, mono) = flux_gap(&a, &b, mu, p).unwrap();
        let (lo, hi) = flux_envelope(p);
        prop_assert!(mono > 0.0);
        prop_assert!(lo <= mono && mono <= hi, "mono {} outside [{}, {}]", mono, lo, hi);
        prop_assert!(lo <= lip && lip <= hi, "lip {} outside [{}, {}]", lip, lo, hi);
    }

    #[test]
    fn mollified_coefficient_keeps_its_bounds(alpha in 0.1..0.95f64, amp in 0.0..2.0f64, eps in 0.01..0.2f64, x in 0.25..0.75f64, y in 0.25..0.75f64) {
        let a = CoefficientField::holder_bump(alpha, &[0.4, 0.6], amp, vec![(0.0, 1.0), (0.0, 1.0)]).unwrap();
        let m = mollify_coefficient(&a, eps, &[(0.22, 0.78), (0.22, 0.78)]).unwrap();
        let v = m.eval(&[x, y], 0.0);
        prop_assert!(v >= m.c_lower - 1e-12 && v <= m.c_upper + 1e-12);
        // `|a_eps - a| <= [a]_alpha eps^alpha`
        prop_assert!((v - a.eval(&[x, y], 0.0)).abs() <= amp * eps.powf(alpha) + 1e-12);
    }

    #[test]
    fn harnack_ratio_is_at_least_one(seed in any::<u64>()) {
        let g = Grid::new(&[(-1.0, 1.0), (-1.0, 1.0)], &[21, 21], -1.0, 1.0, 0.05).unwrap();
        let u = random_field(&g, seed).map(|v| 1.5 + v);
        let r = empirical_harnack(&u, &Point::new(&[0.0, 0.0], 0.0), 0.3, 1.5, 2.0).unwrap();
        prop_assert!(r.implied_constant >= 1.0);
    }

    #[test]
    fn coefficient_form_stays_in_its_box(seed in any::<u64>(), p in 1.2..3.0f64, q in 0.6..3.0f64, x in 0.0..1.0f64, t in 0.0..1.0f64) {
        let g = Grid::new(&[(0.0, 1.0)], &[9], 0.0, 1.0, 0.125).unwrap();
        let u = random_field(&g, seed).map(|v| 1.2 + v);
        let form = to_coefficient_form(&u, p, q).unwrap();
        let a = form.a.eval(&[x], t);
        prop_assert!(a >= form.a.c_lower * (1.0 - 1e-12) && a <= form.a.c_upper * (1.0 + 1e-12));
    }

    #[test]
    fn holder_fit_is_deterministic_and_bounded(seed in any::<u64>(), beta in 0.2..0.9f64) {
        let g = Grid::new(&[(0.0, 1.0)], &[201], 0.0, 0.0 + 1e-3, 1e-3).unwrap();
        let du = SpaceTimeField::from_scalar_fn(&g, move |x, _| x[0].powf(beta));
        let set = paralab::geometry::NodeSet::whole(&g).at_level(0);
        let a = fit_holder_exponent(&du, &set, 1.0, 0.5, 2.0, seed).unwrap();
        let b = fit_holder_exponent(&du, &set, 1.0, 0.5, 2.0, seed).unwrap();
        prop_assert_eq!(a.report.to_json().unwrap(), b.report.to_json().unwrap());
        let alpha = a.alpha.unwrap();
        prop_assert!(alpha > 0.0 && alpha <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Homogeneous Dirichlet data and a time-independent coefficient: the
    /// discrete L^2 norm never grows from one step to the next.
    #[test]
    fn zero_dirichlet_solutions_dissipate(seed in any::<u64>(), p in 1.3..3.5f64, mu in 0.0..1.0f64) {
        let g = Grid::new(&[(0.0, 1.0), (0.0, 1.0)], &[9, 9], 0.0, 0.05, 0.01).unwrap();
        let init = random_field(&g, seed);
        let start: Vec<f64> = init.level(0).to_vec();
        let a = CoefficientField::holder_bump(0.5, &[0.3, 0.7], 0.5, g.extents()).unwrap();
        let data = SpaceTimeField::from_fn(&g, 1, |_, _, o| o[0] = 0.0);
        let mut first = data.clone();
        for (node, (v, s)) in first.level_mut(0).iter_mut().zip(&start).enumerate() {
            if !g.is_boundary(node) {
                *v = *s;
            }
        }
        let pb = PLaplaceProblem::new(p, mu, 1, a, g.clone(), Source::field(first), Source::constant(vec![0.0])).unwrap();
        let sol = paralab::plaplace::solve_cauchy_dirichlet(&pb, &SolverParams::default()).unwrap();
        let mut prev = f64::INFINITY;
        for l in 1..g.levels() {
            let norm: f64 = sol.field.level(l).iter().map(|v| v * v).sum();
            prop_assert!(norm <= prev * (1.0 + 1e-9));
            prev = norm;
        }
    }
}
