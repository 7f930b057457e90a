//! Builds problems from a scenario, solves them and runs the listed checkers.

use std::time::Instant;

use paralab::dnl::{
    default_extinction_tol, detect_extinction, extinction_bounds, level_power_integral, lq_envelope, solve_dnl, sobolev_constant,
    DNLProblem,
};
use paralab::fields::{gradient_field, gradient_norms, mollify_coefficient, CoefficientField, SpaceTimeField};
use paralab::geometry::{
    intrinsic_cylinder, node_set_points, par_boundary_distance, CrossSection, Cylinder, Grid, NodeSet, Point, SpatialRegion,
};
use paralab::plaplace::{freeze_coefficients, node_roles, solve_cauchy_dirichlet, NodeRole, PLaplaceProblem, SolverParams};
use paralab::verify::{self, Budget, EstimateReport};

use crate::error::CliError;
use crate::oracle::{self, Data};
use crate::scenario::{CheckSpec, CoefficientSpec, Mode, ProblemKind, Scenario};

pub enum Problem {
    PLaplace(PLaplaceProblem),
    Dnl(DNLProblem),
}

/// Result of one scenario run.
pub struct Outcome {
    pub field: SpaceTimeField,
    pub reports: Vec<EstimateReport>,
    /// Newton plus Picard iterations summed over all steps (0 when sampled).
    pub iterations: usize,
    pub seconds: f64,
}

impl Outcome {
    /// Every report passes (hypothesis-not-met entries are marked passing).
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

fn scenario_err(s: &Scenario, message: impl Into<String>) -> CliError {
    CliError::Scenario { scenario: s.id.clone(), message: message.into() }
}

pub fn build_grid(s: &Scenario) -> Result<Grid, CliError> {
    let ext: Vec<(f64, f64)> = s.grid.lo.iter().cloned().zip(s.grid.hi.iter().cloned()).collect();
    Grid::new(&ext, &s.grid.n, s.grid.t0, s.grid.t_end, s.grid.dt).map_err(|e| scenario_err(s, format!("grid: {e}")))
}

pub fn build_coefficient(s: &Scenario, grid: &Grid) -> Result<CoefficientField, CliError> {
    let ext = grid.extents();
    let wrap = |e: paralab::Error| scenario_err(s, format!("coefficient: {e}"));
    match &s.coefficient {
        CoefficientSpec::Constant(v) => CoefficientField::constant(*v, ext).map_err(wrap),
        CoefficientSpec::HolderBump { alpha, center, amplitude } => {
            CoefficientField::holder_bump(*alpha, center, *amplitude, ext).map_err(wrap)
        }
        CoefficientSpec::Mollified { alpha, center, amplitude, eps } => {
            // the base lives on a box enlarged by 2 eps so the mollified field covers the grid
            let wide: Vec<(f64, f64)> = ext.iter().map(|(a, b)| (a - 2.0 * eps, b + 2.0 * eps)).collect();
            let base = CoefficientField::holder_bump(*alpha, center, *amplitude, wide).map_err(wrap)?;
            mollify_coefficient(&base, *eps, &ext).map_err(wrap)
        }
    }
}

pub fn build_problem(s: &Scenario, grid: &Grid, data: &Data) -> Result<Problem, CliError> {
    let wrap = |e: paralab::Error| scenario_err(s, format!("problem: {e}"));
    Ok(match s.kind {
        ProblemKind::PLaplace => {
            let a = build_coefficient(s, grid)?;
            Problem::PLaplace(
                PLaplaceProblem::new(s.p, s.mu, s.k, a, grid.clone(), data.initial.clone(), data.boundary.clone()).map_err(wrap)?,
            )
        }
        ProblemKind::Dnl => Problem::Dnl(
            DNLProblem::new(s.p, s.q.expect("dnl scenarios carry q"), grid.clone(), data.initial.clone(), data.boundary.clone())
                .map_err(wrap)?,
        ),
    })
}

fn solver_err(s: &Scenario, e: paralab::Error) -> CliError {
    match e {
        paralab::Error::SolverFailure { .. } => CliError::Solver { scenario: s.id.clone(), source: e },
        other => scenario_err(s, other.to_string()),
    }
}

/// Solves (or samples) the scenario without running checkers.
pub fn solve(s: &Scenario) -> Result<(SpaceTimeField, Problem, Data, usize), CliError> {
    let grid = build_grid(s)?;
    let data = oracle::build(s)?;
    let problem = build_problem(s, &grid, &data)?;
    if s.mode == Mode::Sample {
        let exact = data.exact.clone().ok_or_else(|| scenario_err(s, "sampling needs a closed form"))?;
        let coarse = grid
            .with_time(grid.t0(), grid.t_end(), grid.dt() * s.solver.save_every as f64)
            .map_err(|e| scenario_err(s, e.to_string()))?;
        let field = SpaceTimeField::from_fn(&coarse, s.k, |x, t, out| exact(x, t, out));
        return Ok((field, problem, data, 0));
    }
    let sol = match &problem {
        Problem::PLaplace(pb) => solve_cauchy_dirichlet(pb, &s.solver),
        Problem::Dnl(pb) => solve_dnl(pb, &s.solver),
    }
    .map_err(|e| solver_err(s, e))?;
    let its = sol.newton_iterations.iter().sum();
    Ok((sol.field, problem, data, its))
}

/// Solves the scenario and runs every listed checker.
pub fn execute(s: &Scenario) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let (field, problem, data, iterations) = solve(s)?;
    let ctx = Ctx { s, u: &field, problem: &problem, data: &data };
    let mut reports = Vec::new();
    for check in &s.checks {
        match ctx.run(check) {
            Ok(mut rs) => {
                for r in &mut rs {
                    if let Some(b) = check.budget(&r.name) {
                        *r = r.clone().with_budget(Budget::ConstantAtMost { bound: b });
                    }
                }
                reports.extend(rs);
            }
            Err(paralab::Error::HypothesisNotMet(m)) => {
                let r = EstimateReport::new(&check.name, "hypothesis not met", 0.0, 0.0, field.grid().describe())
                    .skip(format!("hypothesis not met: {m}"));
                reports.push(r);
            }
            Err(e @ paralab::Error::SolverFailure { .. }) => return Err(CliError::Solver { scenario: s.id.clone(), source: e }),
            Err(e) => return Err(scenario_err(s, format!("check `{}`: {e}", check.name))),
        }
    }
    Ok(Outcome { field, reports, iterations, seconds: start.elapsed().as_secs_f64() })
}

struct Ctx<'a> {
    s: &'a Scenario,
    u: &'a SpaceTimeField,
    problem: &'a Problem,
    data: &'a Data,
}

type CheckResult = paralab::Result<Vec<EstimateReport>>;

fn bad(msg: impl Into<String>) -> paralab::Error {
    paralab::Error::InvalidArgument(msg.into())
}

impl Ctx<'_> {
    fn grid(&self) -> &Grid {
        self.u.grid()
    }

    fn center(&self, c: &CheckSpec) -> paralab::Result<Point> {
        let x = c.nums("center").unwrap_or(&[]);
        if x.len() != self.grid().dim() {
            return Err(bad(format!("center has {} coordinates, grid has {} axes", x.len(), self.grid().dim())));
        }
        Ok(Point::new(x, c.num("time").unwrap_or(self.grid().t_end())))
    }

    fn plaplace(&self) -> paralab::Result<&PLaplaceProblem> {
        match self.problem {
            Problem::PLaplace(pb) => Ok(pb),
            Problem::Dnl(_) => Err(bad("checker needs a plaplace scenario")),
        }
    }

    fn q(&self) -> f64 {
        self.s.q.unwrap_or(f64::NAN)
    }

    fn solver(&self) -> SolverParams {
        SolverParams { save_every: 1, ..self.s.solver.clone() }
    }

    /// Comparison solution on `q`: coefficient frozen at the centre, data from `u`.
    fn frozen_solution(&self, q: &Cylinder) -> paralab::Result<SpaceTimeField> {
        let frozen = freeze_coefficients(self.plaplace()?, self.u, &q.center.x, q)?;
        Ok(solve_cauchy_dirichlet(&frozen, &self.solver())?.field)
    }

    fn cylinder(&self, c: &CheckSpec, shape: CrossSection) -> paralab::Result<Cylinder> {
        Cylinder::backward(self.center(c)?, c.num("radius").unwrap_or(0.0), c.num("duration").unwrap_or(0.0), shape)
    }

    fn run(&self, c: &CheckSpec) -> CheckResult {
        let s = self.s;
        let (p, mu) = (s.p, s.mu);
        let g = self.grid();
        match c.name.as_str() {
            "oracle_error" => self.oracle_error(c),
            "energy" => {
                let z = self.center(c)?;
                let inner = Cylinder::backward(z.clone(), c.num("inner_radius").unwrap(), c.num("inner_duration").unwrap(), CrossSection::Ball)?;
                let outer = Cylinder::backward(z.clone(), c.num("outer_radius").unwrap(), c.num("outer_duration").unwrap(), CrossSection::Ball)?;
                let xi = match c.nums("xi") {
                    Some(v) => v.to_vec(),
                    None => {
                        let mut v = vec![0.0; s.k];
                        self.u.interpolate(&z.x, z.t, &mut v)?;
                        v
                    }
                };
                Ok(vec![verify::check_energy_estimate(self.u, self.plaplace()?, &inner, &outer, &xi)?])
            }
            "comparison" => {
                let q = self.cylinder(c, CrossSection::Cube)?;
                let w = self.frozen_solution(&q)?;
                let set = q.node_set(w.grid())?;
                let (hi, lo) = boundary_range(&w, &set);
                Ok(vec![
                    verify::check_comparison_principle(&w, &q, &hi)?,
                    verify::check_comparison_principle_below(&w, &q, &lo)?,
                ])
            }
            "osc_comparison" => {
                let q = self.cylinder(c, CrossSection::Cube)?;
                let w = self.frozen_solution(&q)?;
                Ok(vec![verify::check_osc_comparison(self.u, &w, &q)?])
            }
            "comparison_estimate" => {
                let z = self.center(c)?;
                Ok(vec![verify::check_comparison_estimate(self.u, self.plaplace()?, &z, c.nums("radii").unwrap(), &self.solver())?])
            }
            "gluing" => {
                let ball = SpatialRegion::ball(c.nums("center").unwrap(), c.num("radius").unwrap());
                Ok(vec![verify::check_gluing(self.u, self.plaplace()?, &ball, c.num("t1").unwrap(), c.num("t2").unwrap())?])
            }
            "oscillation_lemma" => {
                let (t1, t2) = (c.num("t1").unwrap(), c.num("t2").unwrap());
                let z = Point::new(c.nums("center").unwrap(), t2);
                let q = Cylinder::backward(z, c.num("radius").unwrap(), t2 - t1, CrossSection::Ball)?;
                Ok(vec![verify::check_oscillation_lemma(self.u, &q, mu, p)?])
            }
            "gradient_sup_bound" => {
                let k_set = self.cylinder(c, CrossSection::Ball)?.node_set(g)?;
                let (_, rho) = par_boundary_distance(&node_set_points(&k_set, g), g)?;
                Ok(vec![verify::check_gradient_sup_bound(self.u, &k_set, rho, mu, p)?])
            }
            "holder_fit" => {
                let k_set = self.cylinder(c, CrossSection::Ball)?.node_set(g)?;
                let du = gradient_field(self.u);
                let lambda = c.num("lambda").unwrap_or_else(|| gradient_scale(&du, &k_set, mu));
                Ok(vec![verify::fit_holder_exponent(&du, &k_set, lambda, c.num("radius").unwrap(), p, s.seed)?.report])
            }
            "campanato" => {
                let z = self.center(c)?;
                let big_r = c.num("radius").unwrap();
                let lambda = match c.num("lambda") {
                    Some(l) => l,
                    None => {
                        let probe = Cylinder::backward(z.clone(), 2.0 * big_r, 2.0 * g.dt(), CrossSection::Ball)?;
                        gradient_scale(&gradient_field(self.u), &probe.node_set(g)?, mu)
                    }
                };
                let mut outer = intrinsic_cylinder(&z, 2.0 * big_r, lambda, p)?;
                outer.cross_section = CrossSection::Cube;
                // one extra step so the snapped window still covers the checker's cylinder
                outer.duration += g.dt();
                let w = self.frozen_solution(&outer)?;
                let taus = c.nums("taus").unwrap();
                Ok(vec![verify::check_campanato_decay(&w, &z, lambda, big_r, taus, p, mu)?.param("lambda", lambda)])
            }
            "moser" => {
                let z = self.center(c)?;
                Ok(vec![verify::check_moser_bound(
                    self.u,
                    &z,
                    c.num("radius").unwrap(),
                    c.num("duration").unwrap(),
                    c.num("sigma").unwrap(),
                    c.num("eps").unwrap(),
                    mu,
                    p,
                )?])
            }
            "harnack" => Ok(vec![verify::empirical_harnack(self.u, &self.center(c)?, c.num("rho").unwrap(), p, self.q())?]),
            "dnl_regularity" => {
                let gamma = c.num("gamma").unwrap_or(verify::DEFAULT_GAMMA);
                Ok(verify::check_dnl_regularity(self.u, &self.center(c)?, c.num("rho").unwrap(), p, self.q(), gamma, s.seed)?.all().into_iter().cloned().collect())
            }
            "compact_bounds" => {
                let k_set = self.cylinder(c, CrossSection::Cube)?.node_set(g)?;
                Ok(vec![verify::check_compact_bounds(self.u, &k_set, p, self.q(), s.seed)?])
            }
            "extinction" => self.extinction(c),
            "extinction_decay" => {
                let t_ext = self.extinction_time(c)?;
                let t_o = c.num("time_fraction").unwrap_or(0.75) * t_ext + (1.0 - c.num("time_fraction").unwrap_or(0.75)) * g.t0();
                let x_o = c.nums("center").unwrap();
                let r = c.num("radius").unwrap();
                let alpha = match c.num("alpha_o") {
                    Some(a) => a,
                    None => {
                        let near = Cylinder::backward(Point::new(x_o, t_o), r, (t_o - g.t0()) / 4.0, CrossSection::Ball)?;
                        let du = gradient_field(self.u);
                        let set = near.node_set(g)?;
                        let fit = verify::fit_holder_exponent(&du, &set, 1.0, r, 2.0, s.seed)?;
                        fit.alpha.ok_or_else(|| bad("gradient is flat near the centre; set alpha_o"))?.min(1.0)
                    }
                };
                verify::check_extinction_decay(self.u, t_ext, x_o, t_o, r, alpha, p, self.q())
            }
            other => Err(bad(format!("unknown checker `{other}`"))),
        }
    }

    fn oracle_error(&self, c: &CheckSpec) -> CheckResult {
        let exact = self.data.exact.as_ref().ok_or_else(|| bad("oracle_error needs data with a closed form"))?;
        let g = self.grid();
        let k = self.s.k;
        let mut buf = vec![0.0; k];
        let (mut err, mut scale) = (0.0f64, 0.0f64);
        let mut spatial = 0.0f64;
        let stride = self.s.solver.save_every;
        for l in 0..g.levels() {
            let t = g.time(l);
            for v in 0..g.num_nodes() {
                let x = g.coords(v);
                exact(&x, t, &mut buf);
                for (a, b) in self.u.at(l, v).iter().zip(&buf) {
                    err = err.max((a - b).abs());
                    scale = scale.max(b.abs());
                }
                if let Some(d) = &self.data.time_discrete {
                    let want = d(&x, l * stride);
                    for a in self.u.at(l, v) {
                        spatial = spatial.max((a - want).abs());
                    }
                }
            }
        }
        let h = g.h()[0];
        let relative = c.flag("relative");
        let rhs = if relative { scale } else { 1.0 };
        let what = if relative { "relative max nodal error against the closed form" } else { "max nodal error against the closed form" };
        let mut out = vec![EstimateReport::new("oracle_error", what, err, rhs, g.describe())
            .param("h", h)
            .param("dt", self.s.grid.dt)
            .extra("max_exact", scale)];
        if self.data.time_discrete.is_some() {
            out.push(
                EstimateReport::new("spatial_error", "max nodal error against the exact time-discrete solution", spatial, 1.0, g.describe())
                    .param("h", h)
                    .param("dt", self.s.grid.dt),
            );
        }
        Ok(out)
    }

    fn extinction_time(&self, c: &CheckSpec) -> paralab::Result<f64> {
        let g = self.grid();
        let tol = c.num("tol").unwrap_or_else(|| default_extinction_tol(g.h()[0], self.s.grid.dt));
        detect_extinction(self.u, tol).ok_or_else(|| bad(format!("no extinction detected before t = {}", g.t_end())))
    }

    fn extinction(&self, c: &CheckSpec) -> CheckResult {
        let g = self.grid();
        let (p, q) = (self.s.p, self.q());
        let n = g.dim();
        let t_num = self.extinction_time(c)?;
        let c_sob = match c.num("sobolev") {
            Some(v) => v,
            None => sobolev_constant(n, p, q)?,
        };
        let v0 = level_power_integral(self.u, 0, q + 1.0);
        let grad_p: f64 = gradient_norms(self.u, 0).iter().map(|d| g.cell_volume() * d.powf(p)).sum();
        let rec = extinction_bounds(g.measure(), v0.powf(1.0 / (q + 1.0)), grad_p.powf(1.0 / p), n, p, q, c_sob)?;
        let mut excess = 0.0f64;
        for l in 0..g.levels() {
            let env = lq_envelope(g.time(l) - g.t0(), v0, rec.envelope_rate, p, q);
            excess = excess.max(level_power_integral(self.u, l, q + 1.0) - env);
        }
        let d = g.describe();
        let tag = |r: EstimateReport| r.param("p", p).param("q", q).param("sobolev_constant", c_sob).extra("lambda", rec.lambda);
        Ok(vec![
            tag(EstimateReport::new("extinction_upper", "numerical extinction time below the upper bound", t_num - g.t0(), rec.t_upper, d.clone()))
                .with_budget(Budget::ConstantAtMost { bound: 1.0 }),
            tag(EstimateReport::new("extinction_lower", "lower bound below the numerical extinction time", rec.t_lower, t_num - g.t0(), d.clone()))
                .with_budget(Budget::ConstantAtMost { bound: 1.0 }),
            tag(EstimateReport::new("lq_envelope", "L^(q+1) norm below its decay envelope (excess)", excess.max(0.0), 1.0, d))
                .extra("envelope_rate", rec.envelope_rate)
                .with_budget(Budget::ConstantAtMost { bound: 1e-6 }),
        ])
    }
}

/// `max(sup |Du|, mu)` over the set, or 1 when both vanish.
fn gradient_scale(du: &SpaceTimeField, set: &NodeSet, mu: f64) -> f64 {
    let mut m = mu;
    for l in set.levels() {
        for &v in &set.nodes {
            m = m.max(du.norm_at(l, v));
        }
    }
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

/// Componentwise max and min of `w` over the parabolic boundary of `set`.
fn boundary_range(w: &SpaceTimeField, set: &NodeSet) -> (Vec<f64>, Vec<f64>) {
    let g = w.grid();
    let mut mask = vec![false; g.num_nodes()];
    for &v in &set.nodes {
        mask[v] = true;
    }
    let roles = node_roles(g, Some(&mask));
    let k = w.k();
    let (mut hi, mut lo) = (vec![f64::NEG_INFINITY; k], vec![f64::INFINITY; k]);
    for l in set.levels() {
        for &v in &set.nodes {
            if l == set.first_level || roles[v] != NodeRole::Free {
                for (c, x) in w.at(l, v).iter().enumerate() {
                    hi[c] = hi[c].max(*x);
                    lo[c] = lo[c].min(*x);
                }
            }
        }
    }
    (hi, lo)
}
