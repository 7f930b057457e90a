//! Checkers for non-negative solutions of the doubly non-linear equation.

use super::pairs::fit_pairs;
use super::report::{ratio, Budget, EstimateReport};
use super::{block_norm, level_gradients};
use crate::error::{invalid, Result};
use crate::fields::{gradient, SpaceTimeField};
use crate::geometry::{boundary_distance, dnl_intrinsic_cylinder, node_set_points, NodeSet, Point, SpatialRegion};

/// Default enlargement factor of the intrinsic cylinder that must fit in the domain.
pub const DEFAULT_GAMMA: f64 = 8.0;
/// Values of `u(z_o)` at or below this are treated as zero.
const POSITIVITY_TOL: f64 = 1e-12;

fn value_at(u: &SpaceTimeField, z: &Point) -> Result<f64> {
    if u.k() != 1 {
        return invalid("expected a scalar field");
    }
    let mut out = [0.0];
    u.interpolate(&z.x, z.t, &mut out)?;
    Ok(out[0])
}

fn positive_value(u: &SpaceTimeField, z: &Point) -> Result<f64> {
    let u0 = value_at(u, z)?;
    if !(u0 > POSITIVITY_TOL) {
        return invalid(format!("u(z_o) = {u0} is not positive"));
    }
    Ok(u0)
}

/// Harnack ratio `max(sup_Q u / u_o, u_o / inf_Q u)` on the intrinsic cube
/// cylinder of radius `rho` around `z_o`. Reported without a budget.
pub fn empirical_harnack(u: &SpaceTimeField, z_o: &Point, rho: f64, p: f64, q: f64) -> Result<EstimateReport> {
    let u0 = positive_value(u, z_o)?;
    let g = u.grid();
    let cyl = dnl_intrinsic_cylinder(z_o, rho, u0, p, q)?;
    if !cyl.inside(g) {
        return invalid("intrinsic cylinder is not inside the domain");
    }
    let set = cyl.node_set(g)?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for l in set.levels() {
        for &v in &set.nodes {
            let x = u.get(l, v, 0);
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    let gamma = (hi / u0).max(if lo > 0.0 { u0 / lo } else { f64::INFINITY });
    Ok(EstimateReport::new("harnack_ratio", "intrinsic Harnack ratio", gamma, 1.0, g.describe())
        .param("p", p)
        .param("q", q)
        .param("rho", rho)
        .param("u0", u0)
        .extra("sup", hi)
        .extra("inf", lo)
        .noted("report only"))
}

/// The three constants of the interior regularity estimates.
#[derive(Clone, Debug)]
pub struct RegularityReports {
    /// `sup_Q |grad u| rho / u_o`
    pub gradient: EstimateReport,
    /// `|u(z1) - u(z2)| / (u_o m(z1, z2))`
    pub lipschitz: EstimateReport,
    /// `|grad u(z1) - grad u(z2)| / ((u_o / rho) m^alpha)` with fitted `alpha`
    pub holder: EstimateReport,
}

impl RegularityReports {
    pub fn all(&self) -> [&EstimateReport; 3] {
        [&self.gradient, &self.lipschitz, &self.holder]
    }
}

/// Points `(level, node)` of a node set.
fn points(set: &NodeSet) -> Vec<(usize, usize)> {
    set.levels().flat_map(|l| set.nodes.iter().map(move |&v| (l, v))).collect()
}

/// Gradient bound, Lipschitz bound and gradient Hölder fit on the intrinsic
/// cube cylinder `Q_o` of radius `rho` around `z_o`, in the modulus
/// `m = |dx| / rho + sqrt(|dt| / (u_o^(q+1-p) rho^p))`. The cylinder enlarged
/// by `gamma` must fit in the domain.
#[allow(clippy::too_many_arguments)]
pub fn check_dnl_regularity(
    u: &SpaceTimeField,
    z_o: &Point,
    rho: f64,
    p: f64,
    q: f64,
    gamma: f64,
    seed: u64,
) -> Result<RegularityReports> {
    let u0 = positive_value(u, z_o)?;
    let g = u.grid();
    if !(gamma >= 1.0) {
        return invalid(format!("enlargement factor must be at least 1 (got {gamma})"));
    }
    if !dnl_intrinsic_cylinder(z_o, gamma * rho, u0, p, q)?.inside(g) {
        return invalid(format!("cylinder enlarged by {gamma} is not inside the domain"));
    }
    let set = dnl_intrinsic_cylinder(z_o, rho, u0, p, q)?.node_set(g)?;
    let d = g.dim();
    let grads = level_gradients(u, &set);
    let pts = points(&set);
    let coords: Vec<[f64; 2]> = pts.iter().map(|&(_, v)| g.coord(v)).collect();
    let times: Vec<f64> = pts.iter().map(|&(l, _)| g.time(l)).collect();
    let tscale = u0.powf(q + 1.0 - p) * rho.powf(p);
    let modulus = |i: usize, j: usize| -> f64 {
        let dx = ((coords[i][0] - coords[j][0]).powi(2) + (coords[i][1] - coords[j][1]).powi(2)).sqrt();
        dx / rho + ((times[i] - times[j]).abs() / tscale).sqrt()
    };
    let grad_of = |i: usize| -> &[f64] {
        let (l, v) = pts[i];
        &grads[l - set.first_level][v * d..(v + 1) * d]
    };
    let params = |r: EstimateReport| r.param("p", p).param("q", q).param("rho", rho).param("u0", u0).param("gamma", gamma);

    let sup = pts.iter().map(|&(l, v)| block_norm(&grads[l - set.first_level], v, d)).fold(0.0, f64::max);
    let gradient = params(EstimateReport::new("dnl_gradient", "intrinsic gradient bound", sup, u0 / rho, g.describe()));

    let mut lip = (0.0f64, 0.0, 1.0);
    for (i, j) in super::pairs::sample_pairs(pts.len(), seed) {
        let m = modulus(i, j);
        let du = (u.get(pts[i].0, pts[i].1, 0) - u.get(pts[j].0, pts[j].1, 0)).abs();
        let c = du / (u0 * m);
        if c > lip.0 {
            lip = (c, du, u0 * m);
        }
    }
    let lipschitz = params(EstimateReport::new("dnl_lipschitz", "intrinsic Lipschitz bound", lip.1, lip.2, g.describe()))
        .param("seed", seed as f64);

    let hmin = g.h().iter().cloned().fold(f64::INFINITY, f64::min);
    let floor = 2.0 * hmin / rho * (1.0 - 1e-9);
    let fit = fit_pairs(pts.len(), d, seed, |i, out| out.copy_from_slice(grad_of(i)), |i, j| {
        let m = modulus(i, j);
        (m >= floor).then_some(m)
    })?;
    let base = params(EstimateReport::new("dnl_holder", "intrinsic gradient Hölder bound", fit.max_diff, u0 / rho, g.describe()))
        .param("seed", seed as f64)
        .extra("pairs", fit.pairs as f64);
    let budget = Budget::ExponentIn { exponent: "alpha_o".into(), lo: 0.0, hi: 1.0 };
    let holder = match fit.alpha {
        None => base.with_budget(budget).skip("gradient is constant on the cylinder; no exponent"),
        Some(a) => {
            let mut r = base.exponent("alpha_o", a);
            r.implied_constant = ratio(fit.constant, u0 / rho);
            r.with_budget(budget)
        }
    };
    Ok(RegularityReports { gradient, lipschitz, holder })
}

/// Distance from `x` to the boundary of the grid's box.
fn box_distance(u: &SpaceTimeField, x: &[f64]) -> f64 {
    u.grid().extents().iter().zip(x).map(|((lo, hi), xi)| (xi - lo).min(hi - xi)).fold(f64::INFINITY, f64::min)
}

/// Decay near the extinction time `t_ext` at `(x_o, t_o)`, `t_o` in `(t_ext/2, t_ext)`.
///
/// With `d` the distance of `x_o` to the boundary and
/// `K = ((t_ext - t_o) / d^p)^(1/(q+1-p))` the four kernels are `K` for
/// `u`, `K/d` for `|grad u|`, `(r/d) K` for the oscillation of `u` over the
/// cube `K_r(x_o)` and `(1/d)(r/d)^alpha_o K` for the oscillation of `grad u`.
#[allow(clippy::too_many_arguments)]
pub fn check_extinction_decay(
    u: &SpaceTimeField,
    t_ext: f64,
    x_o: &[f64],
    t_o: f64,
    r: f64,
    alpha_o: f64,
    p: f64,
    q: f64,
) -> Result<Vec<EstimateReport>> {
    if u.k() != 1 {
        return invalid("expected a scalar field");
    }
    if !(t_o > 0.5 * t_ext && t_o < t_ext) {
        return invalid(format!("t_o = {t_o} must lie in ({}, {t_ext})", 0.5 * t_ext));
    }
    if !(q + 1.0 - p > 0.0) {
        return invalid("need q + 1 - p > 0");
    }
    let g = u.grid();
    let d = box_distance(u, x_o);
    if !(d > 0.0) {
        return invalid("x_o must lie inside the domain");
    }
    if !(r > 0.0 && r < d) {
        return invalid(format!("r = {r} must lie in (0, {d})"));
    }
    let level = g.level_of(t_o)?;
    let t = g.time(level);
    let node = g.nearest_node(x_o)?;
    let kernel = ((t_ext - t).max(0.0) / d.powf(p)).powf(1.0 / (q + 1.0 - p));
    let grad = gradient(u, level);
    let dim = g.dim();
    let cube = SpatialRegion::cube(x_o, r);
    let nodes = cube.nodes(g);
    if nodes.is_empty() {
        return invalid("cube contains no grid nodes");
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &nodes {
        lo = lo.min(u.get(level, v, 0));
        hi = hi.max(u.get(level, v, 0));
    }
    let mut grad_osc = 0.0f64;
    for (i, &a) in nodes.iter().enumerate() {
        for &b in &nodes[i + 1..] {
            let diff = (0..dim).map(|c| (grad[a * dim + c] - grad[b * dim + c]).powi(2)).sum::<f64>().sqrt();
            grad_osc = grad_osc.max(diff);
        }
    }
    let desc = g.describe();
    let tag = |rep: EstimateReport| {
        rep.param("p", p)
            .param("q", q)
            .param("t_ext", t_ext)
            .param("t_o", t)
            .param("r", r)
            .param("d", d)
            .param("alpha_o", alpha_o)
    };
    Ok(vec![
        tag(EstimateReport::new("extinction_value", "decay of u at extinction", u.get(level, node, 0).abs(), kernel, desc.clone())),
        tag(EstimateReport::new(
            "extinction_gradient",
            "decay of the gradient at extinction",
            block_norm(&grad, node, dim),
            kernel / d,
            desc.clone(),
        )),
        tag(EstimateReport::new("extinction_osc", "decay of the oscillation at extinction", hi - lo, r / d * kernel, desc.clone())),
        tag(EstimateReport::new(
            "extinction_gradient_osc",
            "decay of the gradient oscillation at extinction",
            grad_osc,
            (r / d).powf(alpha_o) / d * kernel,
            desc,
        )),
    ])
}

/// Gradient bound on a compact node set `K`:
/// `sup_K |grad u| <= C M^((q+1)/p) / rho_o` with `M = max(1, sup_K u)` and
/// `rho_o` the distance of `K` to the parabolic boundary measured as
/// `|x - y| + |t - s|^(1/p)`. The Hölder variant fits `alpha_1` in the
/// modulus `M^((q+1-p)/p) |dx| / rho_o + sqrt(|dt| / rho_o^p)`.
pub fn check_compact_bounds(u: &SpaceTimeField, k_set: &NodeSet, p: f64, q: f64, seed: u64) -> Result<EstimateReport> {
    if u.k() != 1 {
        return invalid("expected a scalar field");
    }
    if k_set.is_empty() {
        return invalid("empty set");
    }
    let g = u.grid();
    let rho_o = boundary_distance(&node_set_points(k_set, g), g, 1.0 / p)?;
    if !(rho_o > 0.0) {
        return invalid("the set touches the parabolic boundary");
    }
    let pts = points(k_set);
    let big_m = pts.iter().map(|&(l, v)| u.get(l, v, 0)).fold(1.0f64, f64::max);
    let d = g.dim();
    let grads = level_gradients(u, k_set);
    let sup = pts.iter().map(|&(l, v)| block_norm(&grads[l - k_set.first_level], v, d)).fold(0.0, f64::max);
    let scale = big_m.powf((q + 1.0) / p) / rho_o;
    let report = EstimateReport::new("compact_gradient", "gradient bound on a compact set", sup, scale, g.describe())
        .param("p", p)
        .param("q", q)
        .param("rho_o", rho_o)
        .param("M", big_m)
        .param("seed", seed as f64);

    let coords: Vec<[f64; 2]> = pts.iter().map(|&(_, v)| g.coord(v)).collect();
    let times: Vec<f64> = pts.iter().map(|&(l, _)| g.time(l)).collect();
    let space_w = big_m.powf((q + 1.0 - p) / p) / rho_o;
    let time_w = rho_o.powf(p);
    let hmin = g.h().iter().cloned().fold(f64::INFINITY, f64::min);
    let floor = 2.0 * hmin * space_w * (1.0 - 1e-9);
    let fit = fit_pairs(
        pts.len(),
        d,
        seed,
        |i, out| {
            let (l, v) = pts[i];
            out.copy_from_slice(&grads[l - k_set.first_level][v * d..(v + 1) * d]);
        },
        |i, j| {
            let dx = ((coords[i][0] - coords[j][0]).powi(2) + (coords[i][1] - coords[j][1]).powi(2)).sqrt();
            let m = space_w * dx + ((times[i] - times[j]).abs() / time_w).sqrt();
            (m >= floor).then_some(m)
        },
    );
    Ok(match fit {
        Ok(f) => match f.alpha {
            Some(a) => report.exponent("alpha_1", a).extra("holder_constant", ratio(f.constant, scale)),
            None => report.extra("holder_constant", 0.0).noted("gradient is constant on the set"),
        },
        Err(e) => report.noted(format!("Hölder variant unavailable: {e}")),
    })
}
