//! Typed scenario built from a [`Config`], and its canonical echo.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use paralab::plaplace::SolverParams;

use crate::config::Config;
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Num,
    Int,
    Bool,
    Text,
    Nums,
    Texts,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Nums(Vec<f64>),
    Texts(Vec<String>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: Vec<String>| v.join(", ");
        match self {
            Value::Num(x) => write!(f, "{x}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Text(s) => write!(f, "{s}"),
            Value::Nums(v) => write!(f, "{}", join(v.iter().map(|x| x.to_string()).collect())),
            Value::Texts(v) => write!(f, "{}", join(v.clone())),
        }
    }
}

fn parse_num(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !x.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(x)
}

fn split_list(raw: &str) -> Vec<&str> {
    if raw.trim().is_empty() {
        Vec::new()
    } else {
        raw.split(',').map(str::trim).collect()
    }
}

impl Value {
    pub fn parse(kind: Kind, raw: &str) -> Result<Value, String> {
        Ok(match kind {
            Kind::Num => Value::Num(parse_num(raw)?),
            Kind::Int => Value::Int(raw.trim().parse().map_err(|_| format!("`{raw}` is not a non-negative integer"))?),
            Kind::Bool => match raw.trim() {
                "true" => Value::Bool(true),
                "false" => Value::Bool(false),
                other => return Err(format!("`{other}` is not `true` or `false`")),
            },
            Kind::Text => {
                if raw.is_empty() {
                    return Err("empty value".into());
                }
                Value::Text(raw.to_string())
            }
            Kind::Nums => Value::Nums(split_list(raw).into_iter().map(parse_num).collect::<Result<_, _>>()?),
            Kind::Texts => {
                let items: Vec<String> = split_list(raw).into_iter().map(String::from).collect();
                if items.iter().any(String::is_empty) {
                    return Err("empty list item".into());
                }
                Value::Texts(items)
            }
        })
    }

    pub fn num(&self) -> f64 {
        match self {
            Value::Num(x) => *x,
            Value::Int(n) => *n as f64,
            _ => f64::NAN,
        }
    }

    pub fn nums(&self) -> &[f64] {
        match self {
            Value::Nums(v) => v,
            _ => &[],
        }
    }
}

/// Parameter of a checker.
pub struct Param {
    pub name: &'static str,
    pub kind: Kind,
    pub required: bool,
}

const fn req(name: &'static str, kind: Kind) -> Param {
    Param { name, kind, required: true }
}

const fn opt(name: &'static str, kind: Kind) -> Param {
    Param { name, kind, required: false }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Applies {
    Both,
    PLaplace,
    Dnl,
}

pub struct CheckSchema {
    pub name: &'static str,
    pub applies: Applies,
    pub params: &'static [Param],
}

use Kind::*;

/// Every checker a scenario may list, with its parameters. Each checker also
/// accepts `budget` and `budget_<report name>` (numbers), which replace the
/// pass criterion of its reports by `implied_constant <= budget`.
pub const CHECKS: &[CheckSchema] = &[
    CheckSchema { name: "oracle_error", applies: Applies::Both, params: &[opt("relative", Bool)] },
    CheckSchema {
        name: "energy",
        applies: Applies::PLaplace,
        params: &[
            req("center", Nums),
            opt("time", Num),
            req("inner_radius", Num),
            req("inner_duration", Num),
            req("outer_radius", Num),
            req("outer_duration", Num),
            opt("xi", Nums),
        ],
    },
    CheckSchema {
        name: "comparison",
        applies: Applies::PLaplace,
        params: &[req("center", Nums), opt("time", Num), req("radius", Num), req("duration", Num)],
    },
    CheckSchema {
        name: "osc_comparison",
        applies: Applies::PLaplace,
        params: &[req("center", Nums), opt("time", Num), req("radius", Num), req("duration", Num)],
    },
    CheckSchema {
        name: "comparison_estimate",
        applies: Applies::PLaplace,
        params: &[req("center", Nums), opt("time", Num), req("radii", Nums)],
    },
    CheckSchema {
        name: "gluing",
        applies: Applies::PLaplace,
        params: &[req("center", Nums), req("radius", Num), req("t1", Num), req("t2", Num)],
    },
    CheckSchema {
        name: "oscillation_lemma",
        applies: Applies::PLaplace,
        params: &[req("center", Nums), req("radius", Num), req("t1", Num), req("t2", Num)],
    },
    CheckSchema {
        name: "gradient_sup_bound",
        applies: Applies::PLaplace,
        params: &[req("center", Nums), opt("time", Num), req("radius", Num), req("duration", Num)],
    },
    CheckSchema {
        name: "holder_fit",
        applies: Applies::PLaplace,
        params: &[req("center", Nums), opt("time", Num), req("radius", Num), req("duration", Num), opt("lambda", Num)],
    },
    CheckSchema {
        name: "campanato",
        applies: Applies::PLaplace,
        params: &[req("center", Nums), opt("time", Num), req("radius", Num), req("taus", Nums), opt("lambda", Num)],
    },
    CheckSchema {
        name: "moser",
        applies: Applies::PLaplace,
        params: &[
            req("center", Nums),
            opt("time", Num),
            req("radius", Num),
            req("duration", Num),
            req("sigma", Num),
            req("eps", Num),
        ],
    },
    CheckSchema { name: "harnack", applies: Applies::Dnl, params: &[req("center", Nums), opt("time", Num), req("rho", Num)] },
    CheckSchema {
        name: "dnl_regularity",
        applies: Applies::Dnl,
        params: &[req("center", Nums), opt("time", Num), req("rho", Num), opt("gamma", Num)],
    },
    CheckSchema {
        name: "compact_bounds",
        applies: Applies::Dnl,
        params: &[req("center", Nums), opt("time", Num), req("radius", Num), req("duration", Num)],
    },
    CheckSchema { name: "extinction", applies: Applies::Dnl, params: &[opt("sobolev", Num), opt("tol", Num)] },
    CheckSchema {
        name: "extinction_decay",
        applies: Applies::Dnl,
        params: &[req("center", Nums), opt("time_fraction", Num), req("radius", Num), opt("alpha_o", Num)],
    },
];

pub fn check_schema(name: &str) -> Option<&'static CheckSchema> {
    CHECKS.iter().find(|c| c.name == name)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    PLaplace,
    Dnl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Run the solver.
    Solve,
    /// Sample the oracle's closed form on the grid instead of solving.
    Sample,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            "both" => Some(Format::Both),
            _ => None,
        }
    }
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Both => "both",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub n: Vec<usize>,
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoefficientSpec {
    Constant(f64),
    HolderBump { alpha: f64, center: Vec<f64>, amplitude: f64 },
    Mollified { alpha: f64, center: Vec<f64>, amplitude: f64, eps: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataSpec {
    Oracle(String),
    /// Initial and boundary expressions in `x`, `y`, `t`.
    Expression { initial: String, boundary: String },
    /// Field file in the library's text format.
    File(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckSpec {
    pub name: String,
    pub params: BTreeMap<String, Value>,
}

impl CheckSpec {
    pub fn num(&self, key: &str) -> Option<f64> {
        self.params.get(key).map(Value::num)
    }
    pub fn nums(&self, key: &str) -> Option<&[f64]> {
        self.params.get(key).map(Value::nums)
    }
    pub fn flag(&self, key: &str) -> bool {
        matches!(self.params.get(key), Some(Value::Bool(true)))
    }
    /// Budget override for the report named `report`.
    pub fn budget(&self, report: &str) -> Option<f64> {
        self.num(&format!("budget_{report}")).or_else(|| self.num("budget"))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutputSpec {
    pub dir: Option<String>,
    pub format: Option<Format>,
    pub fields: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StudySpec {
    /// Accepted interval `(min, max]` for fitted convergence orders.
    pub order_min: Option<f64>,
    pub order_max: Option<f64>,
    /// Report names whose implied constants must be refinement-stable.
    pub stable: Vec<String>,
    /// Largest accepted ratio between consecutive levels (default 2).
    pub stability_budget: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub kind: ProblemKind,
    pub mode: Mode,
    pub seed: u64,
    pub p: f64,
    pub q: Option<f64>,
    pub mu: f64,
    pub k: usize,
    pub grid: GridSpec,
    pub coefficient: CoefficientSpec,
    pub data: DataSpec,
    pub solver: SolverParams,
    pub checks: Vec<CheckSpec>,
    pub output: OutputSpec,
    pub study: StudySpec,
}

/// Pulls typed values out of a config and remembers which keys were used.
struct Reader<'a> {
    cfg: &'a Config,
    used: BTreeSet<String>,
}

impl<'a> Reader<'a> {
    fn value(&mut self, key: &str, kind: Kind) -> Result<Option<Value>, CliError> {
        let Some(e) = self.cfg.get(key) else { return Ok(None) };
        self.used.insert(key.to_string());
        Value::parse(kind, &e.value).map(Some).map_err(|m| self.cfg.error(e.line, format!("{key}: {m}")))
    }

    fn line(&self, key: &str) -> usize {
        self.cfg.get(key).map_or(0, |e| e.line)
    }

    fn missing(&self, key: &str) -> CliError {
        self.cfg.error(0, format!("missing required key `{key}`"))
    }

    fn num(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        Ok(self.value(key, Num)?.map(|v| v.num()))
    }

    fn need_num(&mut self, key: &str) -> Result<f64, CliError> {
        self.num(key)?.ok_or_else(|| self.missing(key))
    }

    fn int(&mut self, key: &str) -> Result<Option<u64>, CliError> {
        Ok(self.value(key, Int)?.map(|v| match v {
            Value::Int(n) => n,
            _ => unreachable!(),
        }))
    }

    fn text(&mut self, key: &str) -> Result<Option<String>, CliError> {
        Ok(self.value(key, Text)?.map(|v| v.to_string()))
    }

    fn need_text(&mut self, key: &str) -> Result<String, CliError> {
        self.text(key)?.ok_or_else(|| self.missing(key))
    }

    fn nums(&mut self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        Ok(self.value(key, Nums)?.map(|v| v.nums().to_vec()))
    }

    fn need_nums(&mut self, key: &str) -> Result<Vec<f64>, CliError> {
        self.nums(key)?.ok_or_else(|| self.missing(key))
    }

    fn bool(&mut self, key: &str) -> Result<Option<bool>, CliError> {
        Ok(self.value(key, Bool)?.map(|v| v == Value::Bool(true)))
    }

    fn texts(&mut self, key: &str) -> Result<Option<Vec<String>>, CliError> {
        Ok(self.value(key, Texts)?.map(|v| match v {
            Value::Texts(t) => t,
            _ => unreachable!(),
        }))
    }

    fn choice(&mut self, key: &str, options: &[&str], default: Option<&str>) -> Result<String, CliError> {
        let got = match self.text(key)? {
            Some(v) => v,
            None => return default.map(String::from).ok_or_else(|| self.missing(key)),
        };
        if !options.contains(&got.as_str()) {
            return Err(self.cfg.error(self.line(key), format!("{key}: `{got}` is not one of {}", options.join(", "))));
        }
        Ok(got)
    }

    fn reject(&self, key: &str, why: &str) -> CliError {
        self.cfg.error(self.line(key), format!("{key}: {why}"))
    }
}

impl Scenario {
    pub fn from_config(cfg: &Config) -> Result<Scenario, CliError> {
        let mut r = Reader { cfg, used: BTreeSet::new() };
        let id = r.need_text("id")?;
        if !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(r.reject("id", "use letters, digits, `_` and `-` only"));
        }
        let kind = match r.choice("kind", &["plaplace", "dnl"], None)?.as_str() {
            "plaplace" => ProblemKind::PLaplace,
            _ => ProblemKind::Dnl,
        };
        let mode = match r.choice("mode", &["solve", "sample"], Some("solve"))?.as_str() {
            "solve" => Mode::Solve,
            _ => Mode::Sample,
        };
        let seed = r.int("seed")?.unwrap_or(1);
        let p = r.need_num("p")?;
        if !(p > 1.0) {
            return Err(r.reject("p", "must exceed 1"));
        }
        let q = r.num("q")?;
        if kind == ProblemKind::Dnl && q.is_none() {
            return Err(r.missing("q"));
        }
        if kind == ProblemKind::PLaplace && q.is_some() {
            return Err(r.reject("q", "only used by dnl scenarios"));
        }
        let mu = r.num("mu")?.unwrap_or(0.0);
        if !(0.0..=1.0).contains(&mu) {
            return Err(r.reject("mu", "must lie in [0, 1]"));
        }
        if kind == ProblemKind::Dnl && mu != 0.0 {
            return Err(r.reject("mu", "dnl scenarios have no regularization"));
        }
        let k = r.int("k")?.unwrap_or(1) as usize;
        if !(1..=paralab::plaplace::MAX_COMPONENTS).contains(&k) || (kind == ProblemKind::Dnl && k != 1) {
            return Err(r.reject("k", "component count out of range (dnl is scalar)"));
        }

        let lo = r.need_nums("grid.lo")?;
        let hi = r.need_nums("grid.hi")?;
        let n: Vec<usize> = r.need_nums("grid.n")?.iter().map(|&v| v as usize).collect();
        if lo.is_empty() || lo.len() > 2 || lo.len() != hi.len() || lo.len() != n.len() {
            return Err(r.reject("grid.n", "grid.lo, grid.hi and grid.n need one entry per axis (1 or 2 axes)"));
        }
        if r.cfg.get("grid.n").is_some_and(|e| e.value.contains('.')) {
            return Err(r.reject("grid.n", "node counts must be integers"));
        }
        let grid = GridSpec {
            lo,
            hi,
            n,
            t0: r.num("grid.t0")?.unwrap_or(0.0),
            t_end: r.need_num("grid.t_end")?,
            dt: r.need_num("grid.dt")?,
        };

        let coefficient = match r.choice("coefficient.kind", &["constant", "holder_bump", "mollified"], Some("constant"))?.as_str() {
            "constant" => CoefficientSpec::Constant(r.num("coefficient.value")?.unwrap_or(1.0)),
            other => {
                let alpha = r.need_num("coefficient.alpha")?;
                let center = r.need_nums("coefficient.center")?;
                let amplitude = r.need_num("coefficient.amplitude")?;
                if other == "holder_bump" {
                    CoefficientSpec::HolderBump { alpha, center, amplitude }
                } else {
                    let eps = r.need_num("coefficient.eps")?;
                    CoefficientSpec::Mollified { alpha, center, amplitude, eps }
                }
            }
        };
        if kind == ProblemKind::Dnl && coefficient != CoefficientSpec::Constant(1.0) {
            return Err(r.reject("coefficient.kind", "dnl scenarios use the unit coefficient"));
        }

        let data = match r.choice("data.kind", &["oracle", "expression", "file"], None)?.as_str() {
            "oracle" => {
                let name = r.need_text("data.oracle")?;
                if !crate::oracle::NAMES.contains(&name.as_str()) {
                    return Err(r.reject("data.oracle", &format!("unknown oracle `{name}` (known: {})", crate::oracle::NAMES.join(", "))));
                }
                DataSpec::Oracle(name)
            }
            "expression" => {
                let initial = r.need_text("data.initial")?;
                let boundary = r.text("data.boundary")?.unwrap_or_else(|| initial.clone());
                for (key, e) in [("data.initial", &initial), ("data.boundary", &boundary)] {
                    crate::oracle::compile(e).map_err(|m| r.reject(key, &m))?;
                }
                DataSpec::Expression { initial, boundary }
            }
            _ => DataSpec::File(r.need_text("data.file")?),
        };
        if mode == Mode::Sample && !matches!(data, DataSpec::Oracle(_)) {
            return Err(r.reject("mode", "sampling needs an oracle with a closed form"));
        }

        let d = SolverParams::default();
        let solver = SolverParams {
            newton_tol: r.num("solver.newton_tol")?.unwrap_or(d.newton_tol),
            max_newton_iters: r.int("solver.max_newton_iters")?.map_or(d.max_newton_iters, |v| v as usize),
            damping: r.num("solver.damping")?.unwrap_or(d.damping),
            picard_fallback: r.bool("solver.picard_fallback")?.unwrap_or(d.picard_fallback),
            max_picard_iters: r.int("solver.max_picard_iters")?.map_or(d.max_picard_iters, |v| v as usize),
            eps_reg: r.num("solver.eps_reg")?,
            linear_tol: r.num("solver.linear_tol")?.unwrap_or(d.linear_tol),
            save_every: r.int("solver.save_every")?.map_or(d.save_every, |v| v as usize),
        };
        solver.validate().map_err(|e| r.cfg.error(0, format!("solver: {e}")))?;

        let names = r.texts("checks")?.unwrap_or_default();
        let mut checks = Vec::new();
        for name in &names {
            let Some(schema) = check_schema(name) else {
                let known: Vec<&str> = CHECKS.iter().map(|c| c.name).collect();
                return Err(r.reject("checks", &format!("unknown checker `{name}` (known: {})", known.join(", "))));
            };
            let applies = match kind {
                ProblemKind::PLaplace => schema.applies != Applies::Dnl,
                ProblemKind::Dnl => schema.applies != Applies::PLaplace,
            };
            if !applies {
                return Err(r.reject("checks", &format!("checker `{name}` does not apply to this scenario kind")));
            }
            if checks.iter().any(|c: &CheckSpec| &c.name == name) {
                return Err(r.reject("checks", &format!("checker `{name}` listed twice")));
            }
            let mut params = BTreeMap::new();
            for param in schema.params {
                let key = format!("check.{name}.{}", param.name);
                match r.value(&key, param.kind)? {
                    Some(v) => {
                        params.insert(param.name.to_string(), v);
                    }
                    None if param.required => return Err(r.missing(&key)),
                    None => {}
                }
            }
            let budget_keys: Vec<String> = cfg
                .section(&format!("check.{name}"))
                .map(|(k, _)| k.to_string())
                .filter(|k| k == "budget" || k.starts_with("budget_"))
                .collect();
            for b in budget_keys {
                let v = r.value(&format!("check.{name}.{b}"), Num)?.expect("key present");
                params.insert(b, v);
            }
            checks.push(CheckSpec { name: name.clone(), params });
        }

        let output = OutputSpec {
            dir: r.text("output.dir")?,
            format: match r.text("output.format")? {
                None => None,
                Some(f) => Some(Format::parse(&f).ok_or_else(|| r.reject("output.format", "use csv, json or both"))?),
            },
            fields: r.bool("output.fields")?,
        };
        let study = StudySpec {
            order_min: r.num("study.order_min")?,
            order_max: r.num("study.order_max")?,
            stable: r.texts("study.stable")?.unwrap_or_default(),
            stability_budget: r.num("study.stability_budget")?,
        };

        for (key, e) in cfg.entries() {
            if !r.used.contains(key) {
                return Err(cfg.error(e.line, format!("unknown key `{key}`")));
            }
        }
        Ok(Scenario {
            id,
            kind,
            mode,
            seed,
            p,
            q,
            mu,
            k,
            grid,
            coefficient,
            data,
            solver,
            checks,
            output,
            study,
        })
    }

    /// Canonical config that parses back to `self`.
    pub fn to_config(&self) -> Config {
        let mut c = Config::default();
        let mut set = |k: &str, v: Value| c.set(k, v).expect("schema keys are well formed");
        set("id", Value::Text(self.id.clone()));
        set("kind", Value::Text(match self.kind {
            ProblemKind::PLaplace => "plaplace".into(),
            ProblemKind::Dnl => "dnl".into(),
        }));
        set("mode", Value::Text(match self.mode {
            Mode::Solve => "solve".into(),
            Mode::Sample => "sample".into(),
        }));
        set("seed", Value::Int(self.seed));
        set("p", Value::Num(self.p));
        if let Some(q) = self.q {
            set("q", Value::Num(q));
        }
        set("mu", Value::Num(self.mu));
        set("k", Value::Int(self.k as u64));
        set("grid.lo", Value::Nums(self.grid.lo.clone()));
        set("grid.hi", Value::Nums(self.grid.hi.clone()));
        set("grid.n", Value::Texts(self.grid.n.iter().map(|n| n.to_string()).collect()));
        set("grid.t0", Value::Num(self.grid.t0));
        set("grid.t_end", Value::Num(self.grid.t_end));
        set("grid.dt", Value::Num(self.grid.dt));
        match &self.coefficient {
            CoefficientSpec::Constant(v) => {
                set("coefficient.kind", Value::Text("constant".into()));
                set("coefficient.value", Value::Num(*v));
            }
            CoefficientSpec::HolderBump { alpha, center, amplitude } | CoefficientSpec::Mollified { alpha, center, amplitude, .. } => {
                set("coefficient.alpha", Value::Num(*alpha));
                set("coefficient.center", Value::Nums(center.clone()));
                set("coefficient.amplitude", Value::Num(*amplitude));
                if let CoefficientSpec::Mollified { eps, .. } = &self.coefficient {
                    set("coefficient.kind", Value::Text("mollified".into()));
                    set("coefficient.eps", Value::Num(*eps));
                } else {
                    set("coefficient.kind", Value::Text("holder_bump".into()));
                }
            }
        }
        match &self.data {
            DataSpec::Oracle(name) => {
                set("data.kind", Value::Text("oracle".into()));
                set("data.oracle", Value::Text(name.clone()));
            }
            DataSpec::Expression { initial, boundary } => {
                set("data.kind", Value::Text("expression".into()));
                set("data.initial", Value::Text(initial.clone()));
                set("data.boundary", Value::Text(boundary.clone()));
            }
            DataSpec::File(path) => {
                set("data.kind", Value::Text("file".into()));
                set("data.file", Value::Text(path.clone()));
            }
        }
        let s = &self.solver;
        set("solver.newton_tol", Value::Num(s.newton_tol));
        set("solver.max_newton_iters", Value::Int(s.max_newton_iters as u64));
        set("solver.damping", Value::Num(s.damping));
        set("solver.picard_fallback", Value::Bool(s.picard_fallback));
        set("solver.max_picard_iters", Value::Int(s.max_picard_iters as u64));
        if let Some(e) = s.eps_reg {
            set("solver.eps_reg", Value::Num(e));
        }
        set("solver.linear_tol", Value::Num(s.linear_tol));
        set("solver.save_every", Value::Int(s.save_every as u64));
        set("checks", Value::Texts(self.checks.iter().map(|c| c.name.clone()).collect()));
        for check in &self.checks {
            for (k, v) in &check.params {
                set(&format!("check.{}.{k}", check.name), v.clone());
            }
        }
        if let Some(d) = &self.output.dir {
            set("output.dir", Value::Text(d.clone()));
        }
        if let Some(f) = self.output.format {
            set("output.format", Value::Text(f.as_str().into()));
        }
        if let Some(f) = self.output.fields {
            set("output.fields", Value::Bool(f));
        }
        if let Some(v) = self.study.order_min {
            set("study.order_min", Value::Num(v));
        }
        if let Some(v) = self.study.order_max {
            set("study.order_max", Value::Num(v));
        }
        if !self.study.stable.is_empty() {
            set("study.stable", Value::Texts(self.study.stable.clone()));
        }
        if let Some(v) = self.study.stability_budget {
            set("study.stability_budget", Value::Num(v));
        }
        c.source = format!("<echo of {}>", self.id);
        c
    }

    pub fn parse(text: &str, source: &str) -> Result<Scenario, CliError> {
        Scenario::from_config(&Config::parse(text, source)?)
    }

    pub fn echo(&self) -> String {
        self.to_config().to_string()
    }
}
