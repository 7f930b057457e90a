//! Initial/boundary data for scenarios: named oracles, expressions, files.

use std::f64::consts::PI;
use std::sync::Arc;

use evalexpr::{build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value};
use paralab::dnl::{explicit_borderline, explicit_critical};
use paralab::fields::SpaceTimeField;
use paralab::plaplace::Source;

use crate::error::CliError;
use crate::scenario::{CoefficientSpec, DataSpec, ProblemKind, Scenario};

/// Known oracle names.
///
/// * `heat_sine`: `exp(-a d t) prod sin(x_i)` for `p = 2` and constant `a`, every component equal.
/// * `dnl_critical`: the closed-form solution at the critical exponent (2D).
/// * `dnl_borderline`: the self-similar solution for `q = p - 1`, amplitude 1, needs `t0 > 0`.
/// * `sine_hump`: zero boundary data, initial data `sin((c+1) pi s_1) prod_{i>1} sin(pi s_i)`
///   for component `c`, with `s` the coordinates rescaled to `[0, 1]`.
/// * `tilted_hump`: `sine_hump` plus `(c+1) s_1`, time-independent boundary data `(c+1) s_1`.
pub const NAMES: &[&str] = &["heat_sine", "dnl_critical", "dnl_borderline", "sine_hump", "tilted_hump"];

pub type PointFn = Arc<dyn Fn(&[f64], f64, &mut [f64]) + Send + Sync>;

/// Everything the runner needs from the data specification.
pub struct Data {
    pub initial: Source,
    pub boundary: Source,
    /// Closed form of the solution, when known.
    pub exact: Option<PointFn>,
    /// Exact solution of the time-discrete problem on the grid, `(x, step) -> value`,
    /// when the data are an eigenfunction of the discrete operator.
    pub time_discrete: Option<Arc<dyn Fn(&[f64], usize) -> f64 + Send + Sync>>,
}

/// Compiled expression in the variables `x`, `y`, `t` (and the constant `pi`).
#[derive(Clone)]
pub struct Expr(Arc<Node<DefaultNumericTypes>>);

impl Expr {
    pub fn eval(&self, x: &[f64], t: f64) -> Result<f64, String> {
        let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
        let vars = [("x", x.first().copied().unwrap_or(0.0)), ("y", x.get(1).copied().unwrap_or(0.0)), ("t", t), ("pi", PI)];
        for (name, v) in vars {
            ctx.set_value(name.into(), Value::from_float(v)).map_err(|e| e.to_string())?;
        }
        self.0.eval_number_with_context(&ctx).map_err(|e| e.to_string())
    }
}

pub fn compile(src: &str) -> Result<Expr, String> {
    let node = build_operator_tree::<DefaultNumericTypes>(src).map_err(|e| format!("cannot parse `{src}`: {e}"))?;
    let e = Expr(Arc::new(node));
    e.eval(&[0.25, 0.5], 0.125).map_err(|m| format!("cannot evaluate `{src}`: {m}"))?;
    Ok(e)
}

fn unit_coords(x: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    x.iter().zip(lo.iter().zip(hi)).map(|(v, (a, b))| (v - a) / (b - a)).collect()
}

fn scenario_err(s: &Scenario, message: impl Into<String>) -> CliError {
    CliError::Scenario { scenario: s.id.clone(), message: message.into() }
}

pub fn build(s: &Scenario) -> Result<Data, CliError> {
    let dim = s.grid.lo.len();
    let k = s.k;
    match &s.data {
        DataSpec::Expression { initial, boundary } => {
            let fi = compile(initial).map_err(|m| scenario_err(s, m))?;
            let fb = compile(boundary).map_err(|m| scenario_err(s, m))?;
            let scalar = |e: Expr| {
                Source::function(move |x, t, out| {
                    let v = e.eval(x, t).unwrap_or(f64::NAN);
                    out.iter_mut().for_each(|o| *o = v);
                })
            };
            Ok(Data { initial: scalar(fi), boundary: scalar(fb), exact: None, time_discrete: None })
        }
        DataSpec::File(path) => {
            let file = std::fs::File::open(path).map_err(|e| scenario_err(s, format!("cannot open {path}: {e}")))?;
            let u = SpaceTimeField::read_text(std::io::BufReader::new(file)).map_err(|e| scenario_err(s, format!("{path}: {e}")))?;
            if u.k() != k {
                return Err(scenario_err(s, format!("{path} has {} components, scenario has k = {k}", u.k())));
            }
            Ok(Data { initial: Source::field(u.clone()), boundary: Source::field(u), exact: None, time_discrete: None })
        }
        DataSpec::Oracle(name) => {
            let (lo, hi) = (s.grid.lo.clone(), s.grid.hi.clone());
            match name.as_str() {
                "heat_sine" => {
                    let CoefficientSpec::Constant(a) = s.coefficient else {
                        return Err(scenario_err(s, "heat_sine needs a constant coefficient"));
                    };
                    if s.kind != ProblemKind::PLaplace || s.p != 2.0 {
                        return Err(scenario_err(s, "heat_sine is a solution only for the p = 2 plaplace kind"));
                    }
                    let rate = a * dim as f64;
                    let f: PointFn = Arc::new(move |x, t, out| {
                        let v = (-rate * t).exp() * x.iter().map(|xi| xi.sin()).product::<f64>();
                        out.iter_mut().for_each(|o| *o = v);
                    });
                    // sin is an eigenfunction of the discrete Laplacian only with zero data on the box
                    let zero_edges = lo.iter().chain(&hi).all(|b| b.sin().abs() < 1e-12);
                    let (t0, dt) = (s.grid.t0, s.grid.dt);
                    let discrete = zero_edges.then(|| {
                        Arc::new(move |x: &[f64], step: usize| {
                            let decay = (-rate * t0).exp() * (1.0 + rate * dt).powi(-(step as i32));
                            decay * x.iter().map(|xi| xi.sin()).product::<f64>()
                        }) as Arc<dyn Fn(&[f64], usize) -> f64 + Send + Sync>
                    });
                    let g = f.clone();
                    let h = f.clone();
                    Ok(Data {
                        initial: Source::function(move |x, t, o| g(x, t, o)),
                        boundary: Source::function(move |x, t, o| h(x, t, o)),
                        exact: Some(f),
                        time_discrete: discrete,
                    })
                }
                "dnl_critical" => {
                    if s.kind != ProblemKind::Dnl || dim != 2 {
                        return Err(scenario_err(s, "dnl_critical needs a 2D dnl scenario"));
                    }
                    let c = explicit_critical(dim, s.p).map_err(|e| scenario_err(s, e.to_string()))?;
                    if (s.q.unwrap_or(f64::NAN) - c.q).abs() > 1e-12 {
                        return Err(scenario_err(s, format!("dnl_critical at p = {} needs q = {}", s.p, c.q)));
                    }
                    Ok(exact_data(Arc::new(move |x, t, out| out[0] = c.value(x, t))))
                }
                "dnl_borderline" => {
                    if s.kind != ProblemKind::Dnl || (s.q.unwrap_or(f64::NAN) - (s.p - 1.0)).abs() > 1e-12 {
                        return Err(scenario_err(s, "dnl_borderline needs a dnl scenario with q = p - 1"));
                    }
                    if !(s.grid.t0 > 0.0) {
                        return Err(scenario_err(s, "dnl_borderline needs grid.t0 > 0"));
                    }
                    let b = explicit_borderline(1.0, dim, s.p).map_err(|e| scenario_err(s, e.to_string()))?;
                    Ok(exact_data(Arc::new(move |x, t, out| out[0] = b.value(x, t).unwrap_or(f64::NAN))))
                }
                "sine_hump" | "tilted_hump" => {
                    let tilt = name == "tilted_hump";
                    let (lo2, hi2) = (lo.clone(), hi.clone());
                    let initial = Source::function(move |x, _, out| {
                        let s = unit_coords(x, &lo, &hi);
                        let rest: f64 = s[1..].iter().map(|v| (PI * v).sin()).product();
                        for (c, o) in out.iter_mut().enumerate() {
                            let m = (c + 1) as f64;
                            *o = (m * PI * s[0]).sin() * rest + if tilt { m * s[0] } else { 0.0 };
                        }
                    });
                    let boundary = Source::function(move |x, _, out| {
                        let s = unit_coords(x, &lo2, &hi2);
                        for (c, o) in out.iter_mut().enumerate() {
                            *o = if tilt { (c + 1) as f64 * s[0] } else { 0.0 };
                        }
                    });
                    Ok(Data { initial, boundary, exact: None, time_discrete: None })
                }
                other => Err(scenario_err(s, format!("unknown oracle `{other}`"))),
            }
        }
    }
}

fn exact_data(f: PointFn) -> Data {
    let g = f.clone();
    let h = f.clone();
    Data {
        initial: Source::function(move |x, t, o| g(x, t, o)),
        boundary: Source::function(move |x, t, o| h(x, t, o)),
        exact: Some(f),
        time_discrete: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expressions_evaluate() {
        let e = compile("math::sin(pi * x) * math::exp(-t) + y").unwrap();
        let v = e.eval(&[0.5, 2.0], 0.0).unwrap();
        assert!((v - 3.0).abs() < 1e-15);
        assert!(compile("x +").is_err());
        assert!(compile("z * 2").is_err());
    }
}
