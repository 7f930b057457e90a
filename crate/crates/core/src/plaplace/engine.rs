//! Backward-Euler step for `d/dt B(u) = div(a (mu^2 + |Du|^2)^((p-2)/2) Du)`
//! solved by damped Newton with a lagged-coefficient fallback.

use super::mesh::Mesh;
use super::SolverParams;
use crate::error::{Error, Result};
use crate::linalg::{pcg, Csr, Preconditioner};

/// Function of `u` under the time derivative.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Storage {
    Identity,
    /// `u^q` on `u >= 0`.
    Power(f64),
}

/// Floor for `u` in the derivative of `u^q`.
const U_FLOOR: f64 = 1e-12;

impl Storage {
    #[inline]
    pub fn value(self, u: f64) -> f64 {
        match self {
            Storage::Identity => u,
            Storage::Power(q) => u.max(0.0).powf(q),
        }
    }
    #[inline]
    fn derivative(self, u: f64) -> f64 {
        match self {
            Storage::Identity => 1.0,
            Storage::Power(q) => q * u.max(U_FLOOR).powf(q - 1.0),
        }
    }
}

/// Outcome of one time step.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct StepInfo {
    pub newton: usize,
    pub picard: usize,
}

pub(crate) struct Engine<'a> {
    pub mesh: &'a Mesh,
    pub k: usize,
    pub p: f64,
    pub mu: f64,
    pub storage: Storage,
    pub project: bool,
    pub params: &'a SolverParams,
    jac: Csr,
    res: Vec<f64>,
    trial_res: Vec<f64>,
}

#[inline]
fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

impl<'a> Engine<'a> {
    pub fn new(mesh: &'a Mesh, k: usize, p: f64, mu: f64, storage: Storage, project: bool, params: &'a SolverParams) -> Self {
        let n = mesh.free.len() * k;
        Engine {
            mesh,
            k,
            p,
            mu,
            storage,
            project,
            params,
            jac: mesh.pattern(k),
            res: vec![0.0; n],
            trial_res: vec![0.0; n],
        }
    }

    fn unknowns(&self) -> usize {
        self.mesh.free.len() * self.k
    }

    /// Element gradients of all components and `|Du|^2`.
    #[inline]
    fn element_state(&self, ei: usize, u: &[f64], xi: &mut [[f64; 2]; 8]) -> f64 {
        let e = &self.mesh.elems[ei];
        let mut s = 0.0;
        for c in 0..self.k {
            xi[c] = self.mesh.element_gradient(e, u, self.k, c);
            s += dot2(xi[c], xi[c]);
        }
        s
    }

    /// Weak residual `F` on the free unknowns; `weights` holds `area * a` per element.
    fn residual(&self, u: &[f64], old: &[f64], weights: &[f64], dt: f64, out: &mut [f64]) {
        let k = self.k;
        let m = self.mesh;
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut xi = [[0.0; 2]; 8];
        let expo = 0.5 * (self.p - 2.0);
        for (ei, e) in m.elems.iter().enumerate() {
            let s = self.element_state(ei, u, &mut xi);
            let phi = (self.mu * self.mu + s).powf(expo);
            let w = weights[ei] * phi;
            let g = &m.shapes[e.shape];
            for a in 0..m.nv {
                let f = m.free_id[e.v[a]];
                if f == usize::MAX {
                    continue;
                }
                for c in 0..k {
                    out[f * k + c] += w * dot2(xi[c], g[a]);
                }
            }
        }
        for (f, &v) in m.free.iter().enumerate() {
            for c in 0..k {
                let i = v * k + c;
                out[f * k + c] += m.mass[v] * (self.storage.value(u[i]) - self.storage.value(old[i])) / dt;
            }
        }
    }

    /// `max |dt F / m|`, the residual of the update equation in units of `u`.
    fn scaled_norm(&self, f: &[f64], dt: f64) -> f64 {
        let k = self.k;
        let mut r: f64 = 0.0;
        for (fi, &v) in self.mesh.free.iter().enumerate() {
            for c in 0..k {
                r = r.max((dt * f[fi * k + c] / self.mesh.mass[v]).abs());
            }
        }
        r
    }

    fn assemble(&mut self, u: &[f64], weights: &[f64], dt: f64, full: bool) {
        let k = self.k;
        let m = self.mesh;
        self.jac.clear();
        let mut xi = [[0.0; 2]; 8];
        let expo = 0.5 * (self.p - 2.0);
        let with_cross = full && self.p != 2.0;
        for (ei, e) in m.elems.iter().enumerate() {
            let s = self.element_state(ei, u, &mut xi);
            let base = self.mu * self.mu + s;
            let phi = base.powf(expo);
            let w = weights[ei] * phi;
            let w2 = if with_cross { weights[ei] * 2.0 * expo * base.powf(expo - 1.0) } else { 0.0 };
            let g = &m.shapes[e.shape];
            let pos = &m.pair_pos[ei];
            for a in 0..m.nv {
                let fa = m.free_id[e.v[a]];
                if fa == usize::MAX {
                    continue;
                }
                for b in 0..m.nv {
                    let pb = pos[a * 3 + b];
                    if pb == usize::MAX {
                        continue;
                    }
                    let gg = dot2(g[a], g[b]);
                    for c in 0..k {
                        let row = fa * k + c;
                        let base_slot = self.jac.row_ptr[row] + pb * k;
                        self.jac.val[base_slot + c] += w * gg;
                        if w2 != 0.0 {
                            let xa = dot2(xi[c], g[a]);
                            for c2 in 0..k {
                                self.jac.val[base_slot + c2] += w2 * xa * dot2(xi[c2], g[b]);
                            }
                        }
                    }
                }
            }
        }
        for (f, &v) in m.free.iter().enumerate() {
            let nb = &m.neighbours[f];
            let pd = nb.binary_search(&f).unwrap();
            for c in 0..k {
                let row = f * k + c;
                let slot = self.jac.row_ptr[row] + pd * k + c;
                self.jac.val[slot] += m.mass[v] * self.storage.derivative(u[v * k + c]) / dt;
            }
        }
    }

    fn apply(&self, u: &mut [f64], delta: &[f64], theta: f64) {
        let k = self.k;
        for (f, &v) in self.mesh.free.iter().enumerate() {
            for c in 0..k {
                let i = v * k + c;
                u[i] += theta * delta[f * k + c];
                if self.project && u[i] < 0.0 {
                    u[i] = 0.0;
                }
            }
        }
    }

    fn direction(&mut self, delta: &mut [f64]) -> Result<()> {
        let rhs: Vec<f64> = self.res.iter().map(|r| -r).collect();
        delta.iter_mut().for_each(|d| *d = 0.0);
        let n = self.unknowns();
        let pre = Preconditioner::incomplete_cholesky(&self.jac).unwrap_or_else(|| Preconditioner::jacobi(&self.jac));
        let st = pcg(&self.jac, &pre, &rhs, delta, self.params.linear_tol, 50 * n + 1000);
        if !st.converged && st.relative_residual > 1e-6 {
            return Err(Error::SolverFailure { time: f64::NAN, iterations: st.iterations, residual: st.relative_residual });
        }
        Ok(())
    }

    /// Advances `u` (which holds the new Dirichlet values and an initial guess
    /// on free nodes) from `old` over `dt`.
    pub fn step(&mut self, old: &[f64], u: &mut [f64], weights: &[f64], dt: f64, t_new: f64) -> Result<StepInfo> {
        let n = self.unknowns();
        let mut info = StepInfo::default();
        if n == 0 {
            return Ok(info);
        }
        let tol = self.params.newton_tol;
        let mut delta = vec![0.0; n];
        let mut trial = u.to_vec();
        let mut res = std::mem::take(&mut self.res);
        self.residual(u, old, weights, dt, &mut res);
        self.res = res;
        let mut norm = self.scaled_norm(&self.res, dt);
        let fail = |it: usize, r: f64| Error::SolverFailure { time: t_new, iterations: it, residual: r };
        let mut newton_ok = true;
        while norm > tol {
            if info.newton >= self.params.max_newton_iters {
                newton_ok = false;
                break;
            }
            self.assemble(u, weights, dt, true);
            self.direction(&mut delta).map_err(|_| fail(info.newton, norm))?;
            let l2 = self.res.iter().map(|r| r * r).sum::<f64>().sqrt();
            let mut theta = self.params.damping;
            let mut accepted = false;
            for _ in 0..=20 {
                trial.copy_from_slice(u);
                self.apply(&mut trial, &delta, theta);
                let mut tr = std::mem::take(&mut self.trial_res);
                self.residual(&trial, old, weights, dt, &mut tr);
                self.trial_res = tr;
                let l2t = self.trial_res.iter().map(|r| r * r).sum::<f64>().sqrt();
                if l2t <= (1.0 - 1e-4 * theta) * l2 || self.scaled_norm(&self.trial_res, dt) <= tol {
                    accepted = true;
                    break;
                }
                theta *= 0.5;
            }
            info.newton += 1;
            if !accepted {
                newton_ok = false;
                break;
            }
            u.copy_from_slice(&trial);
            std::mem::swap(&mut self.res, &mut self.trial_res);
            norm = self.scaled_norm(&self.res, dt);
        }
        if newton_ok {
            return Ok(info);
        }
        if !self.params.picard_fallback {
            return Err(fail(info.newton, norm));
        }
        while norm > tol {
            if info.picard >= self.params.max_picard_iters {
                return Err(fail(info.newton + info.picard, norm));
            }
            self.assemble(u, weights, dt, false);
            self.direction(&mut delta).map_err(|_| fail(info.newton + info.picard, norm))?;
            self.apply(u, &delta, 1.0);
            let mut res = std::mem::take(&mut self.res);
            self.residual(u, old, weights, dt, &mut res);
            self.res = res;
            norm = self.scaled_norm(&self.res, dt);
            info.picard += 1;
        }
        Ok(info)
    }
}
