//! Refinement studies: rerun a scenario with `(h, dt) / 2^l` and fit rates.

use paralab::stats::loglog_slope;
use paralab::verify::{Budget, EstimateReport};

use crate::error::CliError;
use crate::run::{execute, Outcome};
use crate::scenario::Scenario;

/// Largest number of spatial nodes accepted on the finest level.
pub const MAX_NODES: usize = 1 << 20;

pub struct StudyOutcome {
    pub levels: Vec<Outcome>,
    /// Per-level reports (tagged with `level`, `h`, `dt` when there is more than one level)
    /// followed by the fitted slopes and stability ratios.
    pub reports: Vec<EstimateReport>,
}

impl StudyOutcome {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// Scenario at refinement level `level`: every axis goes from `n` to `2^l (n - 1) + 1`
/// nodes, `dt` is divided by `2^l`, and the saved time levels stay the same.
pub fn refine(s: &Scenario, level: u32) -> Scenario {
    let f = 1usize << level;
    let mut r = s.clone();
    r.grid.n = s.grid.n.iter().map(|&m| f * (m - 1) + 1).collect();
    r.grid.dt = s.grid.dt / f as f64;
    r.solver.save_every = s.solver.save_every * f;
    r
}

pub fn study(s: &Scenario, levels: u32) -> Result<StudyOutcome, CliError> {
    if levels == 0 {
        return Err(CliError::Scenario { scenario: s.id.clone(), message: "a study needs at least one level".into() });
    }
    let finest = refine(s, levels - 1);
    let nodes: usize = finest.grid.n.iter().product();
    if nodes > MAX_NODES {
        return Err(CliError::Scenario {
            scenario: s.id.clone(),
            message: format!("grid cannot be refined {} times: finest level has {nodes} nodes (limit {MAX_NODES})", levels - 1),
        });
    }
    let mut outs = Vec::new();
    let mut reports = Vec::new();
    for l in 0..levels {
        let sl = refine(s, l);
        let out = execute(&sl)?;
        let h = out.field.grid().h()[0];
        for r in &out.reports {
            let r = r.clone();
            reports.push(if levels > 1 { r.param("level", l as f64).param("h", h).param("dt", sl.grid.dt) } else { r });
        }
        outs.push(out);
    }
    if levels > 1 {
        let grid = outs.last().map(|o| o.field.grid().describe()).unwrap_or_default();
        reports.extend(convergence(s, &outs, &grid));
        reports.extend(stability(s, &outs, &grid));
    }
    Ok(StudyOutcome { levels: outs, reports })
}

fn lhs_of(o: &Outcome, name: &str) -> Option<f64> {
    o.reports.iter().find(|r| r.name == name).map(|r| r.lhs)
}

fn convergence(s: &Scenario, outs: &[Outcome], grid: &str) -> Vec<EstimateReport> {
    let Some(name) = ["spatial_error", "oracle_error"].into_iter().find(|n| outs.iter().all(|o| lhs_of(o, n).is_some())) else {
        return Vec::new();
    };
    let hs: Vec<f64> = outs.iter().map(|o| o.field.grid().h()[0]).collect();
    let es: Vec<f64> = outs.iter().map(|o| lhs_of(o, name).unwrap_or(f64::NAN)).collect();
    let estimate = format!("fitted order of {name} in h");
    let mut r = EstimateReport::new("convergence_order", &estimate, es[es.len() - 1], es[0], grid.to_string()).param("levels", outs.len() as f64);
    match loglog_slope(&hs, &es) {
        Ok(fit) => r = r.exponent("order", fit.slope),
        Err(e) => r = r.skip(format!("no slope: {e}")),
    }
    let (lo, hi) = (s.study.order_min.unwrap_or(f64::NEG_INFINITY), s.study.order_max.unwrap_or(f64::INFINITY));
    if s.study.order_min.is_some() || s.study.order_max.is_some() {
        r = r.with_budget(Budget::ExponentIn { exponent: "order".into(), lo, hi });
    }
    vec![r]
}

fn stability(s: &Scenario, outs: &[Outcome], grid: &str) -> Vec<EstimateReport> {
    let bound = s.study.stability_budget.unwrap_or(2.0);
    let mut out = Vec::new();
    for name in &s.study.stable {
        let cs: Vec<f64> = outs
            .iter()
            .map(|o| o.reports.iter().find(|r| &r.name == name).map(|r| r.implied_constant).unwrap_or(f64::NAN))
            .collect();
        let worst = cs.windows(2).map(|w| if w[0] == w[1] { 1.0 } else { (w[0] / w[1]).max(w[1] / w[0]) }).fold(1.0f64, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) });
        let mut r = EstimateReport::new(
            &format!("stability_{name}"),
            "largest ratio of implied constants between consecutive levels",
            worst,
            1.0,
            grid.to_string(),
        )
        .with_budget(Budget::ConstantAtMost { bound });
        for (l, c) in cs.iter().enumerate() {
            r = r.extra(&format!("constant_{l}"), *c);
        }
        out.push(r);
    }
    out
}
