//! Doubly non-linear fast diffusion `d/dt u^q = div(|Du|^(p-2) Du)` with
//! `0 < p - 1 < q`: solver, rescaling to the unit cylinder, the substitution
//! `v = u^q`, closed-form solutions and extinction bounds.

mod explicit;
mod extinction;

use std::sync::Arc;

pub use explicit::{explicit_borderline, explicit_critical, Borderline, Critical};
pub use extinction::{
    default_extinction_tol, detect_extinction, extinction_bounds, extinction_q_limit, lambda_q1, level_power_integral,
    lq_envelope, sobolev_constant, ExtinctionRecord,
};

use crate::error::{invalid, Result};
use crate::fields::{CoefficientField, SpaceTimeField};
use crate::geometry::{dnl_intrinsic_cylinder, Grid, Point};
use crate::plaplace::engine::Storage;
use crate::plaplace::{check_compatible, weak_residual, March, Solution, SolverParams, Source};

/// Cauchy-Dirichlet problem for the doubly non-linear equation (scalar).
///
/// The solver accepts the borderline `q = p - 1` (the 1-homogeneous case,
/// which includes the heat equation) besides the fast-diffusion range.
#[derive(Clone, Debug)]
pub struct DNLProblem {
    pub p: f64,
    pub q: f64,
    pub grid: Grid,
    pub initial: Source,
    pub boundary: Source,
}

impl DNLProblem {
    pub fn new(p: f64, q: f64, grid: Grid, initial: Source, boundary: Source) -> Result<Self> {
        let pb = DNLProblem { p, q, grid, initial, boundary };
        pb.validate()?;
        Ok(pb)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.q >= self.p - 1.0) || !self.q.is_finite() {
            return invalid(format!("need 0 < p - 1 <= q (got p = {}, q = {})", self.p, self.q));
        }
        let nn = self.grid.num_nodes();
        let mut u0 = vec![0.0; nn];
        self.initial.fill(&self.grid, 1, self.grid.t0(), None, &mut u0)?;
        if let Some(v) = u0.iter().position(|&x| x < 0.0) {
            return invalid(format!("initial datum is negative at node {v}"));
        }
        check_compatible(&self.grid, 1, &self.initial, &self.boundary, None)
    }

    /// `q < N(p-1)/(N-p)_+`, the range of the time-insensitive Harnack inequality.
    pub fn supercritical(&self) -> bool {
        let n = self.grid.dim() as f64;
        n <= self.p || self.q < n * (self.p - 1.0) / (n - self.p)
    }
}

/// Backward Euler on `u^q`, Newton on `u` with `u >= 0` enforced after every iterate.
pub fn solve_dnl(problem: &DNLProblem, params: &SolverParams) -> Result<Solution> {
    problem.validate()?;
    March {
        grid: &problem.grid,
        k: 1,
        p: problem.p,
        mu_eff: params.effective_mu(0.0, problem.p, &problem.grid),
        storage: Storage::Power(problem.q),
        project: true,
        mask: None,
        initial: &problem.initial,
        boundary: &problem.boundary,
        coefficient: None,
    }
    .run(params)
}

/// Weak-form residual `int int (u_o^q - u^q) dzeta/dt + |Du|^(p-2) Du . Dzeta`.
pub fn dnl_weak_residual(u: &SpaceTimeField, problem: &DNLProblem, zeta: &SpaceTimeField) -> Result<f64> {
    let mut u_o = vec![0.0; u.grid().num_nodes()];
    problem.initial.fill(u.grid(), 1, u.grid().t0(), None, &mut u_o)?;
    weak_residual(u, zeta, &u_o, problem.p, 0.0, Storage::Power(problem.q), None)
}

/// `u(x_o + rho y, t_o + u0^(q+1-p) rho^p s) / u0` on `[-1, 1]^(d+1)` with
/// `n` nodes per spatial axis and `n` time levels.
pub fn rescale(u: &SpaceTimeField, z_o: &Point, rho: f64, u0: f64, p: f64, q: f64, n: usize) -> Result<SpaceTimeField> {
    let grid = u.grid();
    if u.k() != 1 {
        return invalid("rescaling expects a scalar field");
    }
    let cyl = dnl_intrinsic_cylinder(z_o, rho, u0, p, q)?;
    if !cyl.inside(grid) {
        return invalid("intrinsic cylinder is not inside the solved domain");
    }
    let d = grid.dim();
    let unit = Grid::new(&vec![(-1.0, 1.0); d], &vec![n; d], -1.0, 1.0, 2.0 / (n - 1) as f64)?;
    let tau = cyl.duration;
    let mut out = SpaceTimeField::zeros(&unit, 1);
    let mut x = vec![0.0; d];
    let mut val = [0.0];
    for l in 0..unit.levels() {
        let t = z_o.t + tau * unit.time(l);
        for v in 0..unit.num_nodes() {
            let y = unit.coord(v);
            for a in 0..d {
                x[a] = (z_o.x[a] + rho * y[a]).clamp(grid.extents()[a].0, grid.extents()[a].1);
            }
            u.interpolate(&x, t.clamp(grid.t0(), grid.t_end()), &mut val)?;
            out.at_mut(l, v)[0] = val[0] / u0;
        }
    }
    Ok(out)
}

/// Result of the substitution `v = u^q`.
#[derive(Clone, Debug)]
pub struct CoefficientForm {
    pub v: SpaceTimeField,
    pub a: CoefficientField,
    /// `max(sup u, 1 / inf u)`
    pub k_bound: f64,
}

/// `v = u^q` and `a = (1/q)^(p-1) u^((p-1)(1-q))`, so that `v` solves
/// `dv/dt = div(a |Dv|^(p-2) Dv)`. The coefficient is evaluated from the
/// multilinear interpolant of `u` and carries the bounds
/// `(1/q)^(p-1) k^(-+(p-1)|1-q|)` with `k = max(sup u, 1/inf u)`.
pub fn to_coefficient_form(u: &SpaceTimeField, p: f64, q: f64) -> Result<CoefficientForm> {
    if u.k() != 1 {
        return invalid("substitution expects a scalar field");
    }
    let lo = u.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = u.values().iter().cloned().fold(0.0, f64::max);
    if !(lo > 0.0) {
        return invalid(format!("field must be positive for the substitution (min {lo})"));
    }
    let k_bound = hi.max(1.0 / lo);
    let scale = (1.0 / q).powf(p - 1.0);
    let spread = k_bound.powf((p - 1.0) * (1.0 - q).abs());
    let v = u.map(|x| x.powf(q));
    let field = Arc::new(u.clone());
    let ext = u.grid().extents();
    let (t0, t1) = (u.grid().t0(), u.grid().t_end());
    let exponent = (p - 1.0) * (1.0 - q);
    let eval = move |y: &[f64], s: f64| {
        let mut yy = [0.0; 2];
        for (a, (lo, hi)) in ext.iter().enumerate().take(y.len()) {
            yy[a] = y[a].clamp(*lo, *hi);
        }
        let mut val = [0.0];
        field
            .interpolate(&yy[..y.len()], s.clamp(t0, t1), &mut val)
            .expect("point clamped into the field box");
        scale * val[0].powf(exponent)
    };
    let mut a = CoefficientField::new(eval, scale / spread, scale * spread, 0.5, u.grid().extents(), format!("substitution(p={p}, q={q})"))?;
    a.time_dependent = true;
    Ok(CoefficientForm { v, a, k_bound })
}

#[cfg(test)]
mod tests;
