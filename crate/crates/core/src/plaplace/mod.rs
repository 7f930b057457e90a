//! Implicit solver for the vector-valued parabolic p-Laplace system
//! `du/dt = div(a(x, t) (mu^2 + |Du|^2)^((p-2)/2) Du)` with Dirichlet data.

mod data;
pub(crate) mod engine;
pub(crate) mod mesh;

use std::sync::Arc;

pub use data::Source;
pub use mesh::{node_roles, NodeRole};

use crate::error::{invalid, Result};
use crate::fields::{CoefficientField, SpaceTimeField};
use crate::geometry::{Cylinder, Grid};
use engine::{Engine, Storage};
use mesh::Mesh;

/// Largest number of components a solve supports.
pub const MAX_COMPONENTS: usize = 8;

/// `(mu^2 + |xi|^2)^((p-2)/2) xi`, with `|xi|` the Frobenius norm of the
/// row-major `k x d` matrix `xi`.
pub fn flux(xi: &[f64], mu: f64, p: f64) -> Vec<f64> {
    let s = mu * mu + xi.iter().map(|v| v * v).sum::<f64>();
    if s == 0.0 {
        return vec![0.0; xi.len()];
    }
    let phi = s.powf(0.5 * (p - 2.0));
    xi.iter().map(|v| phi * v).collect()
}

/// Lipschitz and monotonicity ratios of the flux between `xi` and `eta`,
/// each normalised by `(mu^2 + |xi|^2 + |eta|^2)^((p-2)/2)` and the matching
/// power of `|xi - eta|`.
pub fn flux_gap(xi: &[f64], eta: &[f64], mu: f64, p: f64) -> Result<(f64, f64)> {
    if xi.len() != eta.len() {
        return invalid("flux_gap arguments have different shapes");
    }
    let diff: Vec<f64> = xi.iter().zip(eta).map(|(a, b)| a - b).collect();
    let gap2: f64 = diff.iter().map(|v| v * v).sum();
    if gap2 == 0.0 {
        return invalid("flux_gap needs two distinct matrices");
    }
    let fa = flux(xi, mu, p);
    let fb = flux(eta, mu, p);
    let df: Vec<f64> = fa.iter().zip(&fb).map(|(a, b)| a - b).collect();
    let s = mu * mu + xi.iter().map(|v| v * v).sum::<f64>() + eta.iter().map(|v| v * v).sum::<f64>();
    let weight = s.powf(0.5 * (p - 2.0));
    let lip = df.iter().map(|v| v * v).sum::<f64>().sqrt() / (weight * gap2.sqrt());
    let mono = df.iter().zip(&diff).map(|(a, b)| a * b).sum::<f64>() / (weight * gap2);
    Ok((lip, mono))
}

/// Newton and linear-solver controls.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverParams {
    /// Bound on `max |u+ - u - dt div(...)|` at convergence.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// First trial step length of each Newton iteration.
    pub damping: f64,
    pub picard_fallback: bool,
    pub max_picard_iters: usize,
    /// Regularization floor; `None` picks `h^2` when `mu = 0` and `p < 2`, else 0.
    pub eps_reg: Option<f64>,
    pub linear_tol: f64,
    /// Keep every `save_every`-th level in the returned field.
    pub save_every: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            newton_tol: 1e-10,
            max_newton_iters: 30,
            damping: 1.0,
            picard_fallback: true,
            max_picard_iters: 500,
            eps_reg: None,
            linear_tol: 1e-12,
            save_every: 1,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.newton_tol > 0.0) {
            return invalid("newton_tol must be positive");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return invalid(format!("damping must lie in (0, 1] (got {})", self.damping));
        }
        if let Some(e) = self.eps_reg {
            if !(e >= 0.0) {
                return invalid("eps_reg must be non-negative");
            }
        }
        if self.save_every == 0 {
            return invalid("save_every must be at least 1");
        }
        Ok(())
    }

    /// `max(mu, eps_reg)` for the given grid.
    pub fn effective_mu(&self, mu: f64, p: f64, grid: &Grid) -> f64 {
        let floor = self.eps_reg.unwrap_or_else(|| {
            if mu == 0.0 && p < 2.0 {
                let h = grid.h().iter().cloned().fold(f64::INFINITY, f64::min);
                h * h
            } else {
                0.0
            }
        });
        mu.max(floor)
    }
}

/// The Cauchy-Dirichlet problem for the p-Laplace system.
#[derive(Clone, Debug)]
pub struct PLaplaceProblem {
    pub p: f64,
    pub mu: f64,
    pub k: usize,
    pub coefficient: CoefficientField,
    pub grid: Grid,
    pub initial: Source,
    pub boundary: Source,
    /// Nodes taking part in the solve; the whole grid when `None`.
    pub mask: Option<Vec<bool>>,
}

/// Solver output.
#[derive(Clone, Debug)]
pub struct Solution {
    pub field: SpaceTimeField,
    /// Newton iterations per time step.
    pub newton_iterations: Vec<usize>,
    /// Steps that needed the lagged-coefficient fallback.
    pub picard_steps: usize,
}

impl PLaplaceProblem {
    pub fn new(
        p: f64,
        mu: f64,
        k: usize,
        coefficient: CoefficientField,
        grid: Grid,
        initial: Source,
        boundary: Source,
    ) -> Result<Self> {
        let pb = PLaplaceProblem { p, mu, k, coefficient, grid, initial, boundary, mask: None };
        pb.validate()?;
        Ok(pb)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) || !self.p.is_finite() {
            return invalid(format!("p must exceed 1 (got {})", self.p));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return invalid(format!("mu must lie in [0, 1] (got {})", self.mu));
        }
        if !(1..=MAX_COMPONENTS).contains(&self.k) {
            return invalid(format!("k must lie in 1..={MAX_COMPONENTS} (got {})", self.k));
        }
        if let Some(m) = &self.mask {
            if m.len() != self.grid.num_nodes() {
                return invalid("node mask length differs from node count");
            }
        }
        check_compatible(&self.grid, self.k, &self.initial, &self.boundary, self.mask.as_deref())
    }

    /// Roles of the grid nodes in this problem.
    pub fn roles(&self) -> Vec<NodeRole> {
        node_roles(&self.grid, self.mask.as_deref())
    }
}

/// Initial and boundary data must agree on the Dirichlet nodes at `t0`.
pub(crate) fn check_compatible(grid: &Grid, k: usize, initial: &Source, boundary: &Source, mask: Option<&[bool]>) -> Result<()> {
    let roles = node_roles(grid, mask);
    let fixed: Vec<usize> = (0..grid.num_nodes()).filter(|&v| roles[v] == NodeRole::Dirichlet).collect();
    let mut a = vec![0.0; grid.num_nodes() * k];
    let mut b = a.clone();
    initial.fill(grid, k, grid.t0(), Some(&fixed), &mut a)?;
    boundary.fill(grid, k, grid.t0(), Some(&fixed), &mut b)?;
    for &v in &fixed {
        for c in 0..k {
            let (x, y) = (a[v * k + c], b[v * k + c]);
            if (x - y).abs() > 1e-8 * (1.0 + x.abs().max(y.abs())) {
                return invalid(format!("initial value {x} and boundary value {y} disagree at node {v}, t = {}", grid.t0()));
            }
        }
    }
    Ok(())
}

/// `area * a(centroid, t)` for every element.
fn element_weights(mesh: &Mesh, a: &CoefficientField, t: f64) -> Vec<f64> {
    mesh.elems.iter().map(|e| mesh.area * a.eval(&e.centroid[..mesh.dim], t)).collect()
}

/// Everything the time-marching loop needs.
pub(crate) struct March<'a> {
    pub grid: &'a Grid,
    pub k: usize,
    pub p: f64,
    pub mu_eff: f64,
    pub storage: Storage,
    pub project: bool,
    pub mask: Option<&'a [bool]>,
    pub initial: &'a Source,
    pub boundary: &'a Source,
    pub coefficient: Option<&'a CoefficientField>,
}

impl March<'_> {
    pub fn run(&self, params: &SolverParams) -> Result<Solution> {
        params.validate()?;
        if self.p < 2.0 && self.mu_eff == 0.0 {
            return invalid("p < 2 with mu = 0 needs a positive regularization floor");
        }
        let grid = self.grid;
        let steps = grid.steps();
        if steps % params.save_every != 0 {
            return invalid(format!("{steps} steps is not a multiple of save_every = {}", params.save_every));
        }
        let out_grid = grid.with_time(grid.t0(), grid.t_end(), grid.dt() * params.save_every as f64)?;
        let k = self.k;
        let nn = grid.num_nodes();
        let mesh = Mesh::new(grid, self.mask);
        let fixed: Vec<usize> = (0..nn).filter(|&v| mesh.role[v] != NodeRole::Free).collect();
        let mut engine = Engine::new(&mesh, k, self.p, self.mu_eff, self.storage, self.project, params);

        let mut old = vec![0.0; nn * k];
        self.initial.fill(grid, k, grid.t0(), None, &mut old)?;
        if self.project && old.iter().any(|&v| v < 0.0) {
            return invalid("initial data must be non-negative");
        }
        let mut out = Vec::with_capacity(out_grid.levels() * nn * k);
        out.extend_from_slice(&old);
        let static_weights = match self.coefficient {
            Some(a) if a.time_dependent => None,
            Some(a) => Some(element_weights(&mesh, a, grid.t0())),
            None => Some(vec![mesh.area; mesh.elems.len()]),
        };
        let mut iterations = Vec::with_capacity(steps);
        let mut picard_steps = 0;
        let mut u = old.clone();
        let mut older = old.clone();
        let dt = grid.dt();
        for s in 0..steps {
            if s > 0 {
                // linear extrapolation as the Newton starting point
                for &v in &mesh.free {
                    for c in 0..k {
                        let i = v * k + c;
                        let guess = 2.0 * old[i] - older[i];
                        u[i] = if self.project { guess.max(0.0) } else { guess };
                    }
                }
            }
            let t_new = grid.time(s + 1);
            let weights = match &static_weights {
                Some(w) => std::borrow::Cow::Borrowed(w),
                None => std::borrow::Cow::Owned(element_weights(&mesh, self.coefficient.unwrap(), grid.time(s) + 0.5 * dt)),
            };
            self.boundary.fill(grid, k, t_new, Some(&fixed), &mut u)?;
            let info = engine.step(&old, &mut u, &weights, dt, t_new)?;
            iterations.push(info.newton + info.picard);
            if info.picard > 0 {
                picard_steps += 1;
            }
            if (s + 1) % params.save_every == 0 {
                out.extend_from_slice(&u);
            }
            older.copy_from_slice(&old);
            old.copy_from_slice(&u);
        }
        Ok(Solution { field: SpaceTimeField::from_values(&out_grid, k, out)?, newton_iterations: iterations, picard_steps })
    }
}

/// One backward-Euler step of length `dt` from `state` (all nodes, `k` per
/// node) at time `t`. Returns the new state and the iteration count.
pub fn step_implicit(problem: &PLaplaceProblem, state: &[f64], t: f64, dt: f64, params: &SolverParams) -> Result<(Vec<f64>, usize)> {
    problem.validate()?;
    params.validate()?;
    let k = problem.k;
    let nn = problem.grid.num_nodes();
    if state.len() != nn * k {
        return invalid(format!("state has {} values, expected {}", state.len(), nn * k));
    }
    if state.iter().any(|v| !v.is_finite()) {
        return invalid("state is not finite");
    }
    if !(dt > 0.0) {
        return invalid("dt must be positive");
    }
    let mu_eff = params.effective_mu(problem.mu, problem.p, &problem.grid);
    if problem.p < 2.0 && mu_eff == 0.0 {
        return invalid("p < 2 with mu = 0 needs a positive regularization floor");
    }
    let mesh = Mesh::new(&problem.grid, problem.mask.as_deref());
    let fixed: Vec<usize> = (0..nn).filter(|&v| mesh.role[v] != NodeRole::Free).collect();
    let mut u = state.to_vec();
    problem.boundary.fill(&problem.grid, k, t + dt, Some(&fixed), &mut u)?;
    let weights = element_weights(&mesh, &problem.coefficient, t + 0.5 * dt);
    let mut engine = Engine::new(&mesh, k, problem.p, mu_eff, Storage::Identity, false, params);
    let info = engine.step(state, &mut u, &weights, dt, t + dt)?;
    Ok((u, info.newton + info.picard))
}

/// Marches the problem from `t0` to `t_end`.
pub fn solve_cauchy_dirichlet(problem: &PLaplaceProblem, params: &SolverParams) -> Result<Solution> {
    problem.validate()?;
    March {
        grid: &problem.grid,
        k: problem.k,
        p: problem.p,
        mu_eff: params.effective_mu(problem.mu, problem.p, &problem.grid),
        storage: Storage::Identity,
        project: false,
        mask: problem.mask.as_deref(),
        initial: &problem.initial,
        boundary: &problem.boundary,
        coefficient: Some(&problem.coefficient),
    }
    .run(params)
}

/// The comparison problem on `q`: coefficient frozen at `x_o`, data taken
/// from the solution `u` on the parabolic boundary of `q`.
///
/// The returned problem lives on `u`'s spatial grid restricted to the nodes
/// of `q`, over the time levels of `q`.
pub fn freeze_coefficients(problem: &PLaplaceProblem, u: &SpaceTimeField, x_o: &[f64], q: &Cylinder) -> Result<PLaplaceProblem> {
    let grid = u.grid();
    if u.k() != problem.k {
        return invalid("solution and problem have different component counts");
    }
    if !q.inside(grid) {
        return invalid("cylinder is not contained in the solution domain");
    }
    if x_o.len() != grid.dim() || !q.spatial().contains(x_o, 0.0) {
        return invalid(format!("freezing point {x_o:?} is not in the cylinder cross-section"));
    }
    let set = q.node_set(grid)?;
    let sub_grid = grid.with_time(grid.time(set.first_level), grid.time(set.last_level), grid.dt())?;
    let w = grid.num_nodes() * u.k();
    let values = u.values()[set.first_level * w..(set.last_level + 1) * w].to_vec();
    let window = Arc::new(SpaceTimeField::from_values(&sub_grid, u.k(), values)?);
    let mut mask = vec![false; grid.num_nodes()];
    for &v in &set.nodes {
        mask[v] = true;
    }
    let frozen = PLaplaceProblem {
        p: problem.p,
        mu: problem.mu,
        k: problem.k,
        coefficient: problem.coefficient.frozen_at(x_o),
        grid: sub_grid,
        initial: Source::Field(window.clone()),
        boundary: Source::Field(window),
        mask: Some(mask),
    };
    frozen.validate()?;
    Ok(frozen)
}

/// Discrete value of
/// `int int (u_o - B(u)) dzeta/dt + a flux(Du) . Dzeta`
/// with trapezoid weights in time and element midpoints in space.
pub(crate) fn weak_residual(
    u: &SpaceTimeField,
    zeta: &SpaceTimeField,
    u_o: &[f64],
    p: f64,
    mu: f64,
    storage: Storage,
    coefficient: Option<&CoefficientField>,
) -> Result<f64> {
    let grid = u.grid();
    if zeta.grid() != grid || zeta.k() != u.k() {
        return invalid("test field must live on the solution grid with the same components");
    }
    let levels = grid.levels();
    if levels < 3 {
        return invalid("weak residual needs at least three time levels");
    }
    let k = u.k();
    let nn = grid.num_nodes();
    let scale = zeta.max_abs().max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale;
    for l in 0..levels {
        for v in 0..nn {
            let lateral = grid.is_boundary(v);
            if (lateral || l + 1 == levels) && zeta.at(l, v).iter().any(|z| z.abs() > tol) {
                return invalid(format!(
                    "test function does not vanish at node {v}, level {l} (lateral boundary or final time)"
                ));
            }
        }
    }
    let mesh = Mesh::new(grid, None);
    let dt = grid.dt();
    let expo = 0.5 * (p - 2.0);
    let mut total = 0.0;
    for l in 0..levels {
        let wt = if l == 0 || l + 1 == levels { 0.5 * dt } else { dt };
        let t = grid.time(l);
        let ul = u.level(l);
        let zl = zeta.level(l);
        let dz = |i: usize| -> f64 {
            let z = |m: usize| zeta.level(m)[i];
            if l == 0 {
                (-3.0 * z(0) + 4.0 * z(1) - z(2)) / (2.0 * dt)
            } else if l + 1 == levels {
                (3.0 * z(l) - 4.0 * z(l - 1) + z(l - 2)) / (2.0 * dt)
            } else {
                (z(l + 1) - z(l - 1)) / (2.0 * dt)
            }
        };
        let mut acc = 0.0;
        for v in 0..nn {
            for c in 0..k {
                let i = v * k + c;
                acc += mesh.mass[v] * (storage.value(u_o[i]) - storage.value(ul[i])) * dz(i);
            }
        }
        for e in &mesh.elems {
            let mut s = 0.0;
            let mut xi = [[0.0; 2]; MAX_COMPONENTS];
            for c in 0..k {
                xi[c] = mesh.element_gradient(e, ul, k, c);
                s += xi[c][0] * xi[c][0] + xi[c][1] * xi[c][1];
            }
            let base = mu * mu + s;
            let phi = if base == 0.0 { 0.0 } else { base.powf(expo) };
            let a = coefficient.map_or(1.0, |a| a.eval(&e.centroid[..mesh.dim], t));
            for c in 0..k {
                let gz = mesh.element_gradient(e, zl, k, c);
                acc += mesh.area * a * phi * (xi[c][0] * gz[0] + xi[c][1] * gz[1]);
            }
        }
        total += wt * acc;
    }
    Ok(total)
}

/// Weak-form residual of `u` against the test field `zeta`; `zeta` must vanish
/// on the lateral boundary and at the final time.
pub fn weak_form_residual(u: &SpaceTimeField, problem: &PLaplaceProblem, zeta: &SpaceTimeField) -> Result<f64> {
    let mut u_o = vec![0.0; u.grid().num_nodes() * u.k()];
    problem.initial.fill(u.grid(), u.k(), u.grid().t0(), None, &mut u_o)?;
    weak_residual(u, zeta, &u_o, problem.p, problem.mu, Storage::Identity, Some(&problem.coefficient))
}
