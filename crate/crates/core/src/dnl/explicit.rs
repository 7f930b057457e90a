//! Closed-form solutions of `d/dt u^q = div(|Du|^(p-2) Du)` on the whole space.

use crate::error::{invalid, Result};

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Self-similar solution for `q = p - 1`:
/// `C t^(-N/(p(p-1))) exp(-((p-1)/p) (|x|^p / (p t))^(1/(p-1)))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Borderline {
    pub amplitude: f64,
    pub n: usize,
    pub p: f64,
}

/// Builds the borderline solution with amplitude `c_amp` in `n` space dimensions.
pub fn explicit_borderline(c_amp: f64, n: usize, p: f64) -> Result<Borderline> {
    if !(p > 1.0) {
        return invalid(format!("p must exceed 1 (got {p})"));
    }
    if n == 0 {
        return invalid("space dimension must be positive");
    }
    Ok(Borderline { amplitude: c_amp, n, p })
}

impl Borderline {
    pub fn value(&self, x: &[f64], t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return invalid(format!("borderline solution needs t > 0 (got {t})"));
        }
        let p = self.p;
        let r = norm(x);
        let arg = (r.powf(p) / (p * t)).powf(1.0 / (p - 1.0));
        Ok(self.amplitude * t.powf(-(self.n as f64) / (p * (p - 1.0))) * (-(p - 1.0) / p * arg).exp())
    }
}

/// Solution at the critical exponent `q = N(p-1)/(N-p)`:
/// `u = (|x|^(N(q+1)/(q(N-1))) + e^(b t))^(-(N-1)/(q+1))`.
///
/// Substituting into the equation fixes the rate at
/// `b = N(q+1)/(q(N-1)) (N/q)^(p-1)`; for `N = 2`, `p = 3/2` this gives
/// `q = 2` and `b = 3`. The rate `(N/q)^q` leaves a non-zero defect.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Critical {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub b: f64,
}

pub fn explicit_critical(n: usize, p: f64) -> Result<Critical> {
    let nf = n as f64;
    if n < 2 {
        return invalid(format!("critical solution needs N >= 2 (got {n})"));
    }
    if !(p > 1.0) || !(nf > p) {
        return invalid(format!("critical solution needs 1 < p < N (got p = {p}, N = {n})"));
    }
    let q = nf * (p - 1.0) / (nf - p);
    let b = nf * (q + 1.0) / (q * (nf - 1.0)) * (nf / q).powf(p - 1.0);
    Ok(Critical { n, p, q, b })
}

impl Critical {
    fn exponents(&self) -> (f64, f64, f64) {
        let nf = self.n as f64;
        let q = self.q;
        let gamma = nf * (q + 1.0) / (q * (nf - 1.0));
        let outer = (nf - 1.0) / (q + 1.0);
        let grad_power = (nf + q) / (q * (nf - 1.0));
        (gamma, outer, grad_power)
    }

    /// `(u, |Du|)` at `(x, t)`.
    pub fn value_and_gradient(&self, x: &[f64], t: f64) -> (f64, f64) {
        let nf = self.n as f64;
        let q = self.q;
        let (gamma, outer, grad_power) = self.exponents();
        let r = norm(x);
        let base = r.powf(gamma) + (self.b * t).exp();
        let u = base.powf(-outer);
        let g = (nf / q) * r.powf(grad_power) / base.powf((nf + q) / (q + 1.0));
        (u, g)
    }

    pub fn value(&self, x: &[f64], t: f64) -> f64 {
        self.value_and_gradient(x, t).0
    }

    /// Gradient vector `-|Du| x / |x|` (zero at the origin).
    pub fn gradient(&self, x: &[f64], t: f64, out: &mut [f64]) {
        let r = norm(x);
        let (_, g) = self.value_and_gradient(x, t);
        for (o, xi) in out.iter_mut().zip(x) {
            *o = if r == 0.0 { 0.0 } else { -g * xi / r };
        }
    }
}
