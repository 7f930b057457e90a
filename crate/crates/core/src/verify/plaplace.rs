//! Checkers for the p-Laplace system: energy, comparison, gluing,
//! oscillation, gradient bounds and decay rates.

use super::report::{ratio, Budget, EstimateReport};
use super::{block_norm, level_gradients, space_time_weight};
use crate::error::{invalid, Error, Result};
use crate::fields::{oscillation, SpaceTimeField};
use crate::geometry::{intrinsic_cylinder, CrossSection, Cylinder, NodeSet, Point, SpatialRegion, TimeKind};
use crate::plaplace::{freeze_coefficients, node_roles, solve_cauchy_dirichlet, NodeRole, PLaplaceProblem, SolverParams};
use crate::stats::loglog_slope;

/// Largest admissible componentwise violation in the comparison principle.
pub const COMPARISON_TOL: f64 = 1e-8;
/// Slack in `osc w <= sqrt(k) osc u`.
pub const OSC_COMPARISON_TOL: f64 = 1e-6;

/// Exponent of `R` in the frozen-coefficient comparison estimate:
/// `alpha` for `p < 2`, `alpha / (p - 1)` otherwise.
pub fn alpha_star(alpha: f64, p: f64) -> f64 {
    if p < 2.0 {
        alpha
    } else {
        alpha / (p - 1.0)
    }
}

/// `d = 2p / ((N + 2) p - 2N)`, defined for `p > 2N / (N + 2)`.
pub fn scaling_deficit(n: usize, p: f64) -> Result<f64> {
    let nf = n as f64;
    let den = (nf + 2.0) * p - 2.0 * nf;
    if !(den > 0.0) {
        return Err(Error::OutOfRange(format!("scaling deficit needs p > 2N/(N+2) = {} (got p = {p})", 2.0 * nf / (nf + 2.0))));
    }
    Ok(2.0 * p / den)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn vec_dist(a: &[f64], b: &[f64]) -> f64 {
    dist(a, b)
}

/// Largest gradient norm over a node set.
fn sup_gradient(u: &SpaceTimeField, set: &NodeSet) -> f64 {
    let width = u.k() * u.grid().dim();
    let grads = level_gradients(u, set);
    grads.iter().flat_map(|g| set.nodes.iter().map(move |&v| block_norm(g, v, width))).fold(0.0, f64::max)
}

/// Energy inequality between two concentric backward cylinders
/// `Q_{r,s} ⊂ Q_{R,S}`:
///
/// `sup_t int_{B_r} |u - xi|^2 + int int_{Q_{r,s}} (mu^2 + |Du|^2)^(p/2)`
/// against
/// `int int_{Q_{R,S}} |u - xi|^p / (R - r)^p + |u - xi|^2 / (S - s) + mu^p`.
pub fn check_energy_estimate(
    u: &SpaceTimeField,
    problem: &PLaplaceProblem,
    inner: &Cylinder,
    outer: &Cylinder,
    xi: &[f64],
) -> Result<EstimateReport> {
    let g = u.grid();
    let k = u.k();
    if xi.len() != k {
        return invalid(format!("xi has {} entries, field has {k} components", xi.len()));
    }
    if inner.time_kind != TimeKind::Backward || outer.time_kind != TimeKind::Backward {
        return invalid("energy estimate uses backward cylinders");
    }
    if dist(&inner.center.x, &outer.center.x) > 1e-12 || (inner.center.t - outer.center.t).abs() > 1e-12 {
        return invalid("cylinders are not concentric");
    }
    let (r, big_r, s, big_s) = (inner.radius, outer.radius, inner.duration, outer.duration);
    if !(r < big_r && s < big_s) {
        return invalid(format!("need r < R and s < S (got r = {r}, R = {big_r}, s = {s}, S = {big_s})"));
    }
    if !outer.inside(g) {
        return invalid("outer cylinder is not inside the domain");
    }
    let (p, mu) = (problem.p, problem.mu);
    let inner_set = inner.node_set(g)?;
    let outer_set = outer.node_set(g)?;
    let width = k * g.dim();
    let grads = level_gradients(u, &outer_set);
    let hd = g.cell_volume();
    let w = space_time_weight(u);

    let mut slice_sup: f64 = 0.0;
    let mut energy = 0.0;
    for l in inner_set.levels() {
        let gl = &grads[l - outer_set.first_level];
        let mut slice = 0.0;
        for &v in &inner_set.nodes {
            slice += hd * vec_dist(u.at(l, v), xi).powi(2);
            let du = block_norm(gl, v, width);
            energy += w * (mu * mu + du * du).powf(0.5 * p);
        }
        slice_sup = slice_sup.max(slice);
    }
    let mut rhs = 0.0;
    for l in outer_set.levels() {
        for &v in &outer_set.nodes {
            let e = vec_dist(u.at(l, v), xi);
            rhs += w * (e.powf(p) / (big_r - r).powf(p) + e * e / (big_s - s) + mu.powf(p));
        }
    }
    Ok(EstimateReport::new("energy_estimate", "zero-order energy inequality", slice_sup + energy, rhs, g.describe())
        .param("p", p)
        .param("mu", mu)
        .param("r", r)
        .param("R", big_r)
        .param("s", s)
        .param("S", big_s)
        .extra("slice_sup", slice_sup)
        .extra("energy", energy))
}

/// Nodes of the parabolic boundary of `set`: its first level plus the nodes
/// that are not interior to the set's node mask.
fn parabolic_boundary(u: &SpaceTimeField, set: &NodeSet) -> Vec<(usize, usize)> {
    let g = u.grid();
    let mut mask = vec![false; g.num_nodes()];
    for &v in &set.nodes {
        mask[v] = true;
    }
    let roles = node_roles(g, Some(&mask));
    let mut out: Vec<(usize, usize)> = set.nodes.iter().map(|&v| (set.first_level, v)).collect();
    for l in set.levels().skip(1) {
        out.extend(set.nodes.iter().filter(|&&v| roles[v] != NodeRole::Free).map(|&v| (l, v)));
    }
    out
}

fn comparison(w: &SpaceTimeField, q: &Cylinder, bound: &[f64], sign: f64, name: &str) -> Result<EstimateReport> {
    let k = w.k();
    if bound.len() != k {
        return invalid(format!("bound has {} entries, field has {k} components", bound.len()));
    }
    let set = q.node_set(w.grid())?;
    let excess = |l: usize, v: usize| -> f64 {
        w.at(l, v).iter().zip(bound).map(|(x, b)| sign * (x - b)).fold(f64::NEG_INFINITY, f64::max)
    };
    let scale = bound.iter().fold(1.0f64, |m, b| m.max(b.abs()));
    let hyp_tol = 1e-12 * scale;
    let on_boundary = parabolic_boundary(w, &set).into_iter().map(|(l, v)| excess(l, v)).fold(f64::NEG_INFINITY, f64::max);
    if on_boundary > hyp_tol {
        return Err(Error::HypothesisNotMet(format!(
            "data exceed the bound by {on_boundary:.3e} on the parabolic boundary"
        )));
    }
    let mut worst = 0.0f64;
    for l in set.levels() {
        for &v in &set.nodes {
            worst = worst.max(excess(l, v));
        }
    }
    Ok(EstimateReport::new(name, "componentwise comparison principle", worst, 1.0, w.grid().describe())
        .extra("boundary_excess", on_boundary.max(0.0))
        .with_budget(Budget::ConstantAtMost { bound: COMPARISON_TOL }))
}

/// Largest `max_i (w^i - xi^i)_+` over `q`, given `w^i <= xi^i` on the
/// parabolic boundary of `q`. Fails with [`Error::HypothesisNotMet`] when the
/// boundary data exceed `xi`.
pub fn check_comparison_principle(w: &SpaceTimeField, q: &Cylinder, xi: &[f64]) -> Result<EstimateReport> {
    comparison(w, q, xi, 1.0, "comparison_principle")
}

/// Lower-bound counterpart: largest `max_i (zeta^i - w^i)_+` given `w >= zeta` on the boundary.
pub fn check_comparison_principle_below(w: &SpaceTimeField, q: &Cylinder, zeta: &[f64]) -> Result<EstimateReport> {
    comparison(w, q, zeta, -1.0, "comparison_principle_below")
}

/// `osc_Q w <= sqrt(k) osc_Q u`, each field on its own grid.
pub fn check_osc_comparison(u: &SpaceTimeField, w: &SpaceTimeField, q: &Cylinder) -> Result<EstimateReport> {
    if u.k() != w.k() {
        return invalid("fields have different component counts");
    }
    let ow = oscillation(w, &q.node_set(w.grid())?)?;
    let ou = oscillation(u, &q.node_set(u.grid())?)?;
    let rhs = (u.k() as f64).sqrt() * ou;
    Ok(EstimateReport::new("osc_comparison", "oscillation of the comparison solution", ow, rhs, w.grid().describe())
        .param("k", u.k() as f64)
        .with_budget(Budget::ExcessAtMost { bound: OSC_COMPARISON_TOL }))
}

/// Frozen-coefficient comparison: for each radius `R` the comparison problem
/// on `Q_{R,R^2}(z_o)` is solved and
/// `D(R) = int int |Du - Dw|^p`, `E(R) = int int (mu^2 + |Du|^2)^(p/2)`
/// are measured. Reports `max_R D / (R^(alpha* p) E)` and the log-log slope of
/// `D / E` against `R`, gated at `alpha* p - 0.2`.
pub fn check_comparison_estimate(
    u: &SpaceTimeField,
    problem: &PLaplaceProblem,
    z_o: &Point,
    radii: &[f64],
    params: &SolverParams,
) -> Result<EstimateReport> {
    if radii.len() < 3 {
        return invalid(format!("need at least 3 radii (got {})", radii.len()));
    }
    if radii.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
        return invalid("radii must lie in (0, 1]");
    }
    let g = u.grid();
    let (p, mu) = (problem.p, problem.mu);
    let a_star = alpha_star(problem.coefficient.alpha, p);
    let width = u.k() * g.dim();
    let w = space_time_weight(u);
    let mut params = params.clone();
    params.save_every = 1;
    let mut ratios = Vec::with_capacity(radii.len());
    let mut best = (0.0f64, 0.0, 0.0);
    let mut report_extras = Vec::new();
    for (i, &r) in radii.iter().enumerate() {
        let q = Cylinder::backward(z_o.clone(), r, r * r, CrossSection::Ball)?;
        if !q.inside(g) {
            return invalid(format!("cylinder of radius {r} is not inside the domain"));
        }
        let frozen = freeze_coefficients(problem, u, &z_o.x, &q)?;
        let sol = solve_cauchy_dirichlet(&frozen, &params)?;
        let set = q.node_set(g)?;
        let du = level_gradients(u, &set);
        let wset = NodeSet { nodes: set.nodes.clone(), first_level: 0, last_level: set.num_levels() - 1 };
        let dw = level_gradients(&sol.field, &wset);
        let (mut d, mut e) = (0.0, 0.0);
        for li in 0..set.num_levels() {
            for &v in &set.nodes {
                let a = &du[li][v * width..(v + 1) * width];
                let b = &dw[li][v * width..(v + 1) * width];
                d += w * dist(a, b).powf(p);
                let n = block_norm(&du[li], v, width);
                e += w * (mu * mu + n * n).powf(0.5 * p);
            }
        }
        let rhs = r.powf(a_star * p) * e;
        let c = ratio(d, rhs);
        if c >= best.0 {
            best = (c, d, rhs);
        }
        ratios.push(ratio(d, e));
        report_extras.push((format!("D_{i}"), d));
        report_extras.push((format!("E_{i}"), e));
    }
    let mut report = EstimateReport::new("comparison_estimate", "frozen-coefficient comparison estimate", best.1, best.2, g.describe())
        .param("p", p)
        .param("mu", mu)
        .param("alpha", problem.coefficient.alpha)
        .param("alpha_star", a_star);
    for (i, r) in radii.iter().enumerate() {
        report = report.param(&format!("R_{i}"), *r);
    }
    for (k, v) in report_extras {
        report = report.extra(&k, v);
    }
    report.implied_constant = best.0;
    let budget = Budget::ExponentAtLeast { exponent: "slope".into(), bound: a_star * p - 0.2 };
    if ratios.iter().all(|&x| x <= 1e-12) {
        return Ok(report.with_budget(budget).skip("comparison solution coincides with u; slope not measured"));
    }
    let fit = loglog_slope(radii, &ratios)?;
    Ok(report.exponent("slope", fit.slope).with_budget(budget))
}

/// Normalised smooth bump `exp(-1/(1 - |y|^2))`, `y = (x - x_o)/R`, with unit node-sum integral.
fn bump_weights(u: &SpaceTimeField, region: &SpatialRegion) -> Result<Vec<(usize, f64)>> {
    let g = u.grid();
    let mut out = Vec::new();
    for v in region.nodes(g) {
        let x = g.coords(v);
        let y2 = x.iter().zip(&region.center).map(|(a, b)| ((a - b) / region.radius).powi(2)).sum::<f64>();
        if y2 < 1.0 {
            out.push((v, (-1.0 / (1.0 - y2)).exp()));
        }
    }
    let total: f64 = out.iter().map(|(_, w)| w).sum::<f64>() * g.cell_volume();
    if !(total > 0.0) {
        return invalid("bump has no support on the grid");
    }
    out.iter_mut().for_each(|(_, w)| *w /= total);
    Ok(out)
}

/// Change of the bump-weighted mean between two times against
/// `((t2 - t1) / R) (mu^2 + ||Du||_inf^2)^((p-1)/2)` on `B_R x [t1, t2]`.
pub fn check_gluing(u: &SpaceTimeField, problem: &PLaplaceProblem, ball: &SpatialRegion, t1: f64, t2: f64) -> Result<EstimateReport> {
    let g = u.grid();
    if !(t1 <= t2) {
        return invalid(format!("need t1 <= t2 (got {t1}, {t2})"));
    }
    let (l1, l2) = (g.level_of(t1)?, g.level_of(t2)?);
    let weights = bump_weights(u, ball)?;
    let hd = g.cell_volume();
    let k = u.k();
    let mut change = vec![0.0; k];
    for &(v, w) in &weights {
        for c in 0..k {
            change[c] += hd * w * (u.get(l2, v, c) - u.get(l1, v, c));
        }
    }
    let lhs = change.iter().map(|x| x * x).sum::<f64>().sqrt();
    let set = NodeSet { nodes: ball.nodes(g), first_level: l1, last_level: l2 };
    let sup = sup_gradient(u, &set);
    let (p, mu) = (problem.p, problem.mu);
    let rhs = (g.time(l2) - g.time(l1)) / ball.radius * (mu * mu + sup * sup).powf(0.5 * (p - 1.0));
    Ok(EstimateReport::new("gluing", "gluing of bump-weighted slice means", lhs, rhs, g.describe())
        .param("p", p)
        .param("mu", mu)
        .param("R", ball.radius)
        .param("t1", g.time(l1))
        .param("t2", g.time(l2))
        .extra("sup_gradient", sup))
}

/// Smallest `C` with `osc_Q u <= 4R ||Du||_inf + C ((tau2 - tau1)/R) (mu^2 + ||Du||_inf^2)^((p-1)/2)`.
///
/// The report's left side is the excess `max(0, osc - 4R ||Du||_inf)` and
/// its kernel the second term with `C = 1`.
pub fn check_oscillation_lemma(u: &SpaceTimeField, q: &Cylinder, mu: f64, p: f64) -> Result<EstimateReport> {
    let g = u.grid();
    let set = q.node_set(g)?;
    let osc = oscillation(u, &set)?;
    let sup = sup_gradient(u, &set);
    let first = 4.0 * q.radius * sup;
    let span = g.time(set.last_level) - g.time(set.first_level);
    let second = span / q.radius * (mu * mu + sup * sup).powf(0.5 * (p - 1.0));
    let excess = (osc - first).max(0.0);
    Ok(EstimateReport::new("oscillation_lemma", "oscillation bound for Lipschitz solutions", excess, second, g.describe())
        .param("p", p)
        .param("mu", mu)
        .param("R", q.radius)
        .extra("osc", osc)
        .extra("first_term", first)
        .extra("sup_gradient", sup))
}

/// `sup_K |Du| <= C lambda`, `lambda = osc u / rho + (osc u / rho)^(2/p) + mu`,
/// with the oscillation taken over the whole space-time grid.
pub fn check_gradient_sup_bound(u: &SpaceTimeField, k_set: &NodeSet, rho: f64, mu: f64, p: f64) -> Result<EstimateReport> {
    if !(rho > 0.0) {
        return invalid(format!("rho must be positive (got {rho})"));
    }
    let g = u.grid();
    let osc = oscillation(u, &NodeSet::whole(g))?;
    let lambda = osc / rho + (osc / rho).powf(2.0 / p) + mu;
    let sup = sup_gradient(u, k_set);
    Ok(EstimateReport::new("gradient_sup_bound", "local gradient sup bound", sup, lambda, g.describe())
        .param("p", p)
        .param("mu", mu)
        .param("rho", rho)
        .extra("osc", osc)
        .extra("lambda", lambda))
}

/// Mean gradient oscillation `Phi(tau) = mean_{Q_tau} |Dw - (Dw)_tau|^p` on
/// intrinsic cylinders `Q_tau^(lambda)(z_o)`; `beta p` is the log-log slope of
/// `Phi` in `tau` and the check passes when `beta > 0`.
pub fn check_campanato_decay(
    w: &SpaceTimeField,
    z_o: &Point,
    lambda: f64,
    big_r: f64,
    taus: &[f64],
    p: f64,
    mu: f64,
) -> Result<EstimateReport> {
    if taus.len() < 2 {
        return invalid("need at least two radii");
    }
    let g = w.grid();
    let outer = intrinsic_cylinder(z_o, 2.0 * big_r, lambda, p)?;
    if !outer.inside(g) {
        return invalid("cylinder of radius 2R is not inside the solve region");
    }
    let width = w.k() * g.dim();
    let outer_set = outer.node_set(g)?;
    let sup = sup_gradient(w, &outer_set);
    let mut phis = Vec::with_capacity(taus.len());
    for &tau in taus {
        if !(tau > 0.0 && tau <= big_r) {
            return invalid(format!("radius {tau} must lie in (0, R]"));
        }
        let set = intrinsic_cylinder(z_o, tau, lambda, p)?.node_set(g)?;
        let grads = level_gradients(w, &set);
        let mut mean = vec![0.0; width];
        for gl in &grads {
            for &v in &set.nodes {
                for (m, x) in mean.iter_mut().zip(&gl[v * width..(v + 1) * width]) {
                    *m += x;
                }
            }
        }
        let n = set.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        let mut phi = 0.0;
        for gl in &grads {
            for &v in &set.nodes {
                phi += dist(&gl[v * width..(v + 1) * width], &mean).powf(p);
            }
        }
        phis.push(phi / n);
    }
    let (i_min, i_max) = {
        let mut idx: Vec<usize> = (0..taus.len()).collect();
        idx.sort_by(|a, b| taus[*a].total_cmp(&taus[*b]));
        (idx[0], idx[idx.len() - 1])
    };
    let mut report = EstimateReport::new("campanato_decay", "Campanato decay of the gradient", phis[i_min], phis[i_max], g.describe())
        .param("p", p)
        .param("mu", mu)
        .param("lambda", lambda)
        .param("R", big_r)
        .extra("gradient_scale", (mu * mu + sup * sup).sqrt() / lambda);
    for (i, (t, f)) in taus.iter().zip(&phis).enumerate() {
        report = report.param(&format!("tau_{i}"), *t).extra(&format!("phi_{i}"), *f);
    }
    let budget = Budget::ExponentIn { exponent: "beta".into(), lo: 0.0, hi: f64::INFINITY };
    if phis.iter().all(|&f| f <= 1e-24) {
        return Ok(report.with_budget(budget).skip("gradient is constant; decay not measured"));
    }
    let fit = loglog_slope(taus, &phis)?;
    Ok(report.exponent("beta", fit.slope / p).with_budget(budget))
}

/// Gradient sup bound on `Q_{sigma R, sigma S}(z_o)` in terms of the mean of
/// `|Du|^p` over `Q_{R,S}(z_o)`, with scaling deficit `d`; see [`scaling_deficit`].
#[allow(clippy::too_many_arguments)]
pub fn check_moser_bound(
    u: &SpaceTimeField,
    z_o: &Point,
    big_r: f64,
    big_s: f64,
    sigma: f64,
    eps: f64,
    mu: f64,
    p: f64,
) -> Result<EstimateReport> {
    let g = u.grid();
    let n = g.dim();
    let d = scaling_deficit(n, p)?;
    if !(sigma > 0.0 && sigma < 1.0) {
        return invalid(format!("sigma must lie in (0, 1) (got {sigma})"));
    }
    if !(eps > 0.0) {
        return invalid("epsilon must be positive");
    }
    let outer = Cylinder::backward(z_o.clone(), big_r, big_s, CrossSection::Ball)?;
    if !outer.inside(g) {
        return invalid("cylinder is not inside the domain");
    }
    let inner = Cylinder::backward(z_o.clone(), sigma * big_r, sigma * big_s, CrossSection::Ball)?;
    let outer_set = outer.node_set(g)?;
    let inner_set = inner.node_set(g)?;
    let width = u.k() * n;
    let grads = level_gradients(u, &outer_set);
    let mut mean = 0.0;
    for gl in &grads {
        for &v in &outer_set.nodes {
            mean += block_norm(gl, v, width).powf(p);
        }
    }
    mean /= outer_set.len() as f64;
    let sup = sup_gradient(u, &inner_set);
    let nf = n as f64;
    let ratio_rs = big_r * big_r / big_s;
    let energy_term =
        (eps.powf(-(2.0 - p) * (nf + 2.0)) * ratio_rs.powf(0.5 * nf) * (1.0 - sigma).powf(-(nf + 2.0)) * mean).powf(d / p);
    let time_term = if p == 2.0 { 0.0 } else { eps * (1.0 / ratio_rs).powf(1.0 / (2.0 - p)) };
    let mu_term = eps * mu;
    let rhs = energy_term.max(time_term).max(mu_term);
    Ok(EstimateReport::new("moser_bound", "gradient sup bound with scaling deficit", sup, rhs, g.describe())
        .param("p", p)
        .param("mu", mu)
        .param("R", big_r)
        .param("S", big_s)
        .param("sigma", sigma)
        .param("eps", eps)
        .exponent("scaling_deficit", d)
        .extra("mean_gradient_p", mean)
        .extra("energy_term", energy_term)
        .extra("time_term", time_term))
}
