use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{invalid, Result};
use crate::geometry::Grid;

type Eval = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// A scalar coefficient `a(x, t)` with declared bounds `C_o <= a <= C_1` and a
/// declared spatial Hölder exponent `alpha`.
#[derive(Clone)]
pub struct CoefficientField {
    eval: Eval,
    pub c_lower: f64,
    pub c_upper: f64,
    pub alpha: f64,
    pub time_dependent: bool,
    /// Box on which the evaluator is meaningful.
    pub domain: Vec<(f64, f64)>,
    pub label: String,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientField")
            .field("label", &self.label)
            .field("c_lower", &self.c_lower)
            .field("c_upper", &self.c_upper)
            .field("alpha", &self.alpha)
            .finish()
    }
}

impl CoefficientField {
    pub fn new(
        eval: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
        c_lower: f64,
        c_upper: f64,
        alpha: f64,
        domain: Vec<(f64, f64)>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if !(c_lower > 0.0 && c_lower <= c_upper) {
            return invalid(format!("need 0 < C_o <= C_1 (got {c_lower}, {c_upper})"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return invalid(format!("Hölder exponent must lie in (0, 1) (got {alpha})"));
        }
        Ok(CoefficientField {
            eval: Arc::new(eval),
            c_lower,
            c_upper,
            alpha,
            time_dependent: false,
            domain,
            label: label.into(),
        })
    }

    pub fn constant(value: f64, domain: Vec<(f64, f64)>) -> Result<Self> {
        let mut a = CoefficientField::new(move |_, _| value, value, value, 0.5, domain, format!("constant({value})"))?;
        a.alpha = 0.5;
        Ok(a)
    }

    /// `a(x) = 1 + amplitude |x - x0|^alpha`.
    ///
    /// `C_o = 1`; `C_1` is the larger of the maximum over the domain and the
    /// Hölder constant `amplitude`.
    pub fn holder_bump(alpha: f64, x0: &[f64], amplitude: f64, domain: Vec<(f64, f64)>) -> Result<Self> {
        if x0.len() != domain.len() {
            return invalid("bump centre dimension differs from domain dimension");
        }
        if !(amplitude >= 0.0) {
            return invalid("bump amplitude must be non-negative");
        }
        let far: f64 = x0
            .iter()
            .zip(&domain)
            .map(|(c, (a, b))| (c - a).abs().max((b - c).abs()).powi(2))
            .sum::<f64>()
            .sqrt();
        let c_upper = (1.0 + amplitude * far.powf(alpha)).max(amplitude).max(1.0);
        let centre = x0.to_vec();
        CoefficientField::new(
            move |x, _| {
                let r: f64 = x.iter().zip(&centre).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                1.0 + amplitude * r.powf(alpha)
            },
            1.0,
            c_upper,
            alpha,
            domain,
            format!("holder_bump(alpha={alpha}, x0={x0:?}, amplitude={amplitude})"),
        )
    }

    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        (self.eval)(x, t)
    }

    /// `b(x, t) = a(x_o, t)`: the coefficient frozen at a spatial point.
    pub fn frozen_at(&self, x_o: &[f64]) -> CoefficientField {
        let inner = self.eval.clone();
        let xo = x_o.to_vec();
        CoefficientField {
            eval: Arc::new(move |_, t| inner(&xo, t)),
            label: format!("frozen({}, x_o={x_o:?})", self.label),
            ..self.clone()
        }
    }

    /// Checks the bound box on every node at the first and last level, and the
    /// spatial Hölder quotient on node pairs (all pairs up to 4096 nodes, a
    /// strided subset beyond).
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let tol = 1e-12 * self.c_upper;
        let times = [grid.t0(), grid.t_end()];
        let nn = grid.num_nodes();
        let stride = if nn <= 4096 { 1 } else { nn / 2048 + 1 };
        for &t in &times {
            let vals: Vec<f64> = (0..nn).map(|v| self.eval(&grid.coord(v)[..grid.dim()], t)).collect();
            for (v, &a) in vals.iter().enumerate() {
                if !(a >= self.c_lower - tol && a <= self.c_upper + tol) {
                    return invalid(format!(
                        "coefficient {a} at node {v} outside [{}, {}]",
                        self.c_lower, self.c_upper
                    ));
                }
            }
            let sample: Vec<usize> = (0..nn).step_by(stride).collect();
            for (i, &a) in sample.iter().enumerate() {
                let xa = grid.coord(a);
                for &b in &sample[i + 1..] {
                    let xb = grid.coord(b);
                    let gap = ((xa[0] - xb[0]).powi(2) + (xa[1] - xb[1]).powi(2)).sqrt();
                    let q = (vals[a] - vals[b]).abs() / gap.powf(self.alpha);
                    if q > self.c_upper * (1.0 + 1e-9) {
                        return invalid(format!("Hölder quotient {q} exceeds C_1 = {}", self.c_upper));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Quadrature of the standard bump `exp(-1/(1-|y|^2))` on the unit ball:
/// points of a 101^d grid over `[-1, 1]^d` with weights normalised to sum one.
fn mollifier_rule(d: usize) -> &'static [(Vec<f64>, f64)] {
    static RULES: [OnceLock<Vec<(Vec<f64>, f64)>>; 2] = [OnceLock::new(), OnceLock::new()];
    RULES[d - 1].get_or_init(|| {
        const M: usize = 101;
        let node = |i: usize| -1.0 + 2.0 * i as f64 / (M - 1) as f64;
        let mut pts = Vec::new();
        let total = if d == 1 { M } else { M * M };
        for idx in 0..total {
            let y: Vec<f64> = if d == 1 { vec![node(idx)] } else { vec![node(idx % M), node(idx / M)] };
            let r2: f64 = y.iter().map(|c| c * c).sum();
            if r2 < 1.0 {
                pts.push((y, (-1.0 / (1.0 - r2)).exp()));
            }
        }
        let sum: f64 = pts.iter().map(|p| p.1).sum();
        pts.iter_mut().for_each(|p| p.1 /= sum);
        pts
    })
}

/// `a_eps(x, t) = int a(x - y, t) phi_eps(y) dy`, evaluated with the cached
/// mollifier rule. `region` is the box where the result will be evaluated; it
/// must sit at least `eps` inside the coefficient's domain. The result keeps
/// the declared `C_o`, `C_1` and `alpha`.
pub fn mollify_coefficient(a: &CoefficientField, eps: f64, region: &[(f64, f64)]) -> Result<CoefficientField> {
    if region.len() != a.domain.len() {
        return invalid("region dimension differs from coefficient domain");
    }
    if !(eps > 0.0) {
        return invalid(format!("mollification radius must be positive (got {eps})"));
    }
    for (axis, ((lo, hi), (dlo, dhi))) in region.iter().zip(&a.domain).enumerate() {
        let inset = (lo - dlo).min(dhi - hi);
        if eps >= inset {
            return invalid(format!(
                "eps = {eps} not below the inset {inset} of the region along axis {axis}"
            ));
        }
    }
    let rule = mollifier_rule(region.len());
    let inner = a.eval.clone();
    let mut out = a.clone();
    out.eval = Arc::new(move |x: &[f64], t: f64| {
        let mut acc = 0.0;
        let mut z = [0.0; 2];
        for (y, w) in rule {
            for (i, (xi, yi)) in x.iter().zip(y).enumerate() {
                z[i] = xi - eps * yi;
            }
            acc += w * inner(&z[..x.len()], t);
        }
        acc
    });
    out.domain = region.to_vec();
    out.label = format!("mollified({}, eps={eps})", a.label);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mollifier_weights_sum_to_one() {
        for d in 1..=2 {
            let s: f64 = mollifier_rule(d).iter().map(|p| p.1).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_is_preserved() {
        let a = CoefficientField::constant(2.5, vec![(0.0, 1.0), (0.0, 1.0)]).unwrap();
        let m = mollify_coefficient(&a, 0.1, &[(0.2, 0.8), (0.2, 0.8)]).unwrap();
        assert!((m.eval(&[0.5, 0.4], 0.0) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_large_eps() {
        let a = CoefficientField::constant(1.0, vec![(0.0, 1.0)]).unwrap();
        assert!(mollify_coefficient(&a, 0.3, &[(0.2, 0.8)]).is_err());
        assert!(mollify_coefficient(&a, 0.1, &[(0.2, 0.8)]).is_ok());
    }

    #[test]
    fn bump_validates() {
        let g = Grid::new(&[(0.0, 1.0)], &[41], 0.0, 1.0, 0.5).unwrap();
        let a = CoefficientField::holder_bump(0.5, &[0.3], 0.5, vec![(0.0, 1.0)]).unwrap();
        a.validate(&g).unwrap();
        let frozen = a.frozen_at(&[0.3]);
        assert_eq!(frozen.eval(&[0.9], 0.0), 1.0);
    }

    #[test]
    fn bad_declared_bounds_fail_validation() {
        let g = Grid::new(&[(0.0, 1.0)], &[11], 0.0, 1.0, 0.5).unwrap();
        let a = CoefficientField::new(|x, _| 1.0 + x[0], 1.0, 1.5, 0.5, vec![(0.0, 1.0)], "ramp").unwrap();
        assert!(a.validate(&g).is_err());
    }
}
