//! Extinction-time bounds and the `L^(q+1)` envelope for zero boundary data.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fields::SpaceTimeField;

/// Detected extinction time together with the two bounds it should sit between.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionRecord {
    pub t_num: Option<f64>,
    pub t_upper: f64,
    pub t_lower: f64,
    pub sobolev_constant: f64,
    /// `N(p - q - 1) + p(q + 1)`
    pub lambda: f64,
    /// Decay rate of the envelope.
    pub envelope_rate: f64,
}

impl ExtinctionRecord {
    /// Whether `t_lower <= t_num <= t_upper`.
    pub fn sandwiched(&self) -> bool {
        self.t_num.is_some_and(|t| self.t_lower <= t && t <= self.t_upper)
    }
}

/// Upper end of the admissible `q` range, `(N(p-1) + p) / (N - p)_+`.
pub fn extinction_q_limit(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    if nf <= p {
        f64::INFINITY
    } else {
        (nf * (p - 1.0) + p) / (nf - p)
    }
}

pub fn lambda_q1(n: usize, p: f64, q: f64) -> f64 {
    let nf = n as f64;
    nf * (p - q - 1.0) + p * (q + 1.0)
}

/// A valid (not optimal) constant `C` with
/// `||u||_{q+1} <= C |E|^(lambda/(N p (q+1))) ||Du||_p` for `u` vanishing on the boundary.
///
/// In 1D, `|u(x)| <= (1/2) int |u'|`, so `C = 1/2` for every `p`. In 2D the
/// Gagliardo-Nirenberg argument gives `||u||_{s*} <= s/(2(2-s)) ||Du||_s` for
/// `1 <= s < 2`; for `p < 2` the exponent `s = p` is used, otherwise the
/// smallest admissible `s` with `s* > q + 1` (slightly enlarged).
pub fn sobolev_constant(n: usize, p: f64, q: f64) -> Result<f64> {
    match n {
        1 => Ok(0.5),
        2 => {
            let s = if p < 2.0 {
                p
            } else {
                let s_min = (2.0 * (q + 1.0) / (q + 3.0)).max(1.0);
                s_min + 1e-3 * (2.0 - s_min)
            };
            Ok(s / (2.0 * (2.0 - s)))
        }
        _ => invalid(format!("no Sobolev constant available for N = {n}")),
    }
}

/// Extinction bounds from the measure of the domain, `||u_o||_{q+1}` and `||Du_o||_p`.
pub fn extinction_bounds(
    measure: f64,
    norm_u0_q1: f64,
    grad_norm_u0_p: f64,
    n: usize,
    p: f64,
    q: f64,
    c_sob: f64,
) -> Result<ExtinctionRecord> {
    if !(p > 1.0 && q > p - 1.0) {
        return invalid(format!("need 0 < p - 1 < q (got p = {p}, q = {q})"));
    }
    let limit = extinction_q_limit(n, p);
    if !(q < limit) {
        return invalid(format!("q = {q} must be below (N(p-1)+p)/(N-p)_+ = {limit}"));
    }
    if !(measure > 0.0 && c_sob > 0.0) {
        return invalid("domain measure and Sobolev constant must be positive");
    }
    if !(norm_u0_q1 >= 0.0 && grad_norm_u0_p > 0.0) {
        return invalid("norms of the initial datum must be non-negative with a positive gradient norm");
    }
    let lambda = lambda_q1(n, p, q);
    let nf = n as f64;
    let e_pow = measure.powf(lambda / (nf * (q + 1.0)));
    let gap = q + 1.0 - p;
    let t_upper = q * c_sob.powf(p) / gap * e_pow * norm_u0_q1.powf(gap);
    let t_lower = q / gap * norm_u0_q1.powf(q + 1.0) / grad_norm_u0_p.powf(p);
    let envelope_rate = (q + 1.0) / (q * c_sob.powf(p) * e_pow);
    Ok(ExtinctionRecord { t_num: None, t_upper, t_lower, sobolev_constant: c_sob, lambda, envelope_rate })
}

/// `w(t) = v0 [1 - rate (q+1-p) t / ((q+1) v0^((q+1-p)/(q+1)))]_+^((q+1)/(q+1-p))`
pub fn lq_envelope(t: f64, v0: f64, rate: f64, p: f64, q: f64) -> f64 {
    if v0 <= 0.0 {
        return 0.0;
    }
    let gap = q + 1.0 - p;
    let bracket = 1.0 - rate * gap * t / ((q + 1.0) * v0.powf(gap / (q + 1.0)));
    v0 * bracket.max(0.0).powf((q + 1.0) / gap)
}

/// First time the nodal sup-norm drops to `tol`, linearly interpolated
/// between the bracketing levels.
pub fn detect_extinction(u: &SpaceTimeField, tol: f64) -> Option<f64> {
    let g = u.grid();
    let sup = |l: usize| u.level(l).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut prev = sup(0);
    if prev <= tol {
        return Some(g.t0());
    }
    for l in 1..g.levels() {
        let cur = sup(l);
        if cur <= tol {
            let frac = (prev - tol) / (prev - cur);
            return Some(g.time(l - 1) + frac * g.dt());
        }
        prev = cur;
    }
    None
}

/// Default extinction threshold `10 max(h^2, dt)`.
pub fn default_extinction_tol(h: f64, dt: f64) -> f64 {
    10.0 * (h * h).max(dt)
}

/// Node-quadrature `int |u(., t)|^r` at one level (all components).
pub fn level_power_integral(u: &SpaceTimeField, level: usize, r: f64) -> f64 {
    let w = u.grid().cell_volume();
    u.level(level).iter().map(|v| w * v.abs().powf(r)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Grid;

    #[test]
    fn lambda_example() {
        assert_eq!(lambda_q1(2, 2.0, 2.0), 4.0);
    }

    #[test]
    fn envelope_root_matches_upper_bound() {
        let rec = extinction_bounds(1.0, 0.8, 2.0, 1, 2.0, 2.0, 0.5).unwrap();
        let v0 = 0.8f64.powi(3);
        let w = |t: f64| lq_envelope(t, v0, rec.envelope_rate, 2.0, 2.0);
        assert_eq!(w(0.0), v0);
        assert!(w(rec.t_upper * (1.0 - 1e-9)) > 0.0);
        assert_eq!(w(rec.t_upper * (1.0 + 1e-9)), 0.0);
        assert_eq!(lq_envelope(0.3, 0.0, 1.0, 2.0, 2.0), 0.0);
    }

    #[test]
    fn homogeneity_of_bounds() {
        let a = extinction_bounds(2.0, 0.7, 1.3, 2, 1.5, 1.2, 1.0).unwrap();
        let b = extinction_bounds(2.0, 1.4, 2.6, 2, 1.5, 1.2, 1.0).unwrap();
        let f = 2f64.powf(1.2 + 1.0 - 1.5);
        assert!((b.t_upper / a.t_upper - f).abs() < 1e-12);
        assert!((b.t_lower / a.t_lower - f).abs() < 1e-12);
    }

    #[test]
    fn range_is_enforced() {
        assert!(extinction_bounds(1.0, 1.0, 1.0, 1, 2.0, 1.0, 0.5).is_err());
        assert!(extinction_bounds(1.0, 1.0, 1.0, 3, 2.0, 6.0, 0.5).is_err());
    }

    #[test]
    fn detection() {
        let g = Grid::new(&[(0.0, 1.0)], &[9], 0.0, 1.0, 0.25).unwrap();
        let zero = SpaceTimeField::zeros(&g, 1);
        assert_eq!(detect_extinction(&zero, 1e-3), Some(0.0));
        let decay = SpaceTimeField::from_scalar_fn(&g, |_, t| 1.0 - t);
        let t = detect_extinction(&decay, 0.1).unwrap();
        assert!((t - 0.9).abs() < 1e-12);
        let never = SpaceTimeField::from_scalar_fn(&g, |_, _| 1.0);
        assert_eq!(detect_extinction(&never, 0.1), None);
    }
}
