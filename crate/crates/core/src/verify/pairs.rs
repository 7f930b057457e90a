//! Random pair sampling and Hölder-exponent fits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::report::{ratio, Budget, EstimateReport};
use crate::error::{invalid, Result};
use crate::fields::SpaceTimeField;
use crate::geometry::NodeSet;
use crate::stats::{loglog_slope, LineFit};

/// Pairs drawn per fit when the set has more pairs than this.
pub(crate) const MAX_PAIRS: usize = 200_000;
/// Minimum number of admissible pairs for a fit.
pub(crate) const MIN_PAIRS: usize = 30;
/// Gradient differences at or below this level count as a constant gradient.
pub(crate) const FLAT_LEVEL: f64 = 1e-10;
const BINS: usize = 12;

/// Index pairs `(i, j)`, `i < j`, over `n` points: all of them when there
/// are at most [`MAX_PAIRS`], otherwise a seeded random sample.
pub(crate) fn sample_pairs(n: usize, seed: u64) -> Vec<(usize, usize)> {
    let total = n * n.saturating_sub(1) / 2;
    if total <= MAX_PAIRS {
        let mut out = Vec::with_capacity(total);
        for i in 0..n {
            for j in i + 1..n {
                out.push((i, j));
            }
        }
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(MAX_PAIRS);
    while out.len() < MAX_PAIRS {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j {
            out.push((i.min(j), i.max(j)));
        }
    }
    out
}

/// Fits the upper envelope `diff <= C modulus^alpha`: pairs are binned by
/// `log modulus`, the largest difference per bin is kept, and a line is
/// fitted through the bin maxima in log-log coordinates.
pub(crate) fn envelope_fit(modulus: &[f64], diff: &[f64]) -> Result<LineFit> {
    let pts: Vec<(f64, f64)> =
        modulus.iter().zip(diff).filter(|(m, d)| **m > 0.0 && **d > 0.0).map(|(m, d)| (m.ln(), *d)).collect();
    if pts.len() < MIN_PAIRS {
        return invalid(format!("{} usable pairs, need at least {MIN_PAIRS}", pts.len()));
    }
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return invalid("all pairs have the same separation");
    }
    let width = (hi - lo) / BINS as f64;
    let mut best = [0.0f64; BINS];
    let mut count = [0usize; BINS];
    for (lm, d) in &pts {
        let b = (((lm - lo) / width) as usize).min(BINS - 1);
        best[b] = best[b].max(*d);
        count[b] += 1;
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..BINS)
        .filter(|&b| count[b] >= 3)
        .map(|b| ((lo + (b as f64 + 0.5) * width).exp(), best[b]))
        .unzip();
    if xs.len() < 3 {
        return invalid("fewer than three populated separation bins");
    }
    loglog_slope(&xs, &ys)
}

/// Outcome of a pair-based fit of a modulus of continuity.
#[derive(Clone, Debug)]
pub(crate) struct PairFit {
    /// `None` when the field is flat on the set.
    pub alpha: Option<f64>,
    pub max_diff: f64,
    /// `max diff / modulus^alpha` over the usable pairs.
    pub constant: f64,
    pub pairs: usize,
}

/// Generic pair fit. `point_value(i, out)` writes the vector at point `i`,
/// `modulus(i, j)` gives the normalised separation or `None` when the pair is
/// not admissible.
pub(crate) fn fit_pairs(
    n_points: usize,
    width: usize,
    seed: u64,
    point_value: impl Fn(usize, &mut [f64]),
    modulus: impl Fn(usize, usize) -> Option<f64>,
) -> Result<PairFit> {
    let mut values = vec![0.0; n_points * width];
    for i in 0..n_points {
        point_value(i, &mut values[i * width..(i + 1) * width]);
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let noise = 10.0 * f64::EPSILON * scale;
    let mut mods = Vec::new();
    let mut diffs = Vec::new();
    let mut admissible = 0;
    for (i, j) in sample_pairs(n_points, seed) {
        let Some(m) = modulus(i, j) else { continue };
        admissible += 1;
        let d = (0..width).map(|c| (values[i * width + c] - values[j * width + c]).powi(2)).sum::<f64>().sqrt();
        mods.push(m);
        diffs.push(d);
    }
    if admissible < MIN_PAIRS {
        return invalid(format!("{admissible} admissible pairs, need at least {MIN_PAIRS}"));
    }
    let max_diff = diffs.iter().cloned().fold(0.0, f64::max);
    if max_diff <= FLAT_LEVEL {
        return Ok(PairFit { alpha: None, max_diff, constant: 0.0, pairs: admissible });
    }
    let keep: Vec<usize> = (0..diffs.len()).filter(|&i| diffs[i] > noise).collect();
    let km: Vec<f64> = keep.iter().map(|&i| mods[i]).collect();
    let kd: Vec<f64> = keep.iter().map(|&i| diffs[i]).collect();
    let fit = envelope_fit(&km, &kd)?;
    let alpha = fit.slope;
    let constant = km.iter().zip(&kd).map(|(m, d)| d / m.powf(alpha)).fold(0.0, f64::max);
    Ok(PairFit { alpha: Some(alpha), max_diff, constant, pairs: admissible })
}

/// Result of [`fit_holder_exponent`]: the report plus the fitted exponent.
#[derive(Clone, Debug)]
pub struct HolderFit {
    pub report: EstimateReport,
    /// `None` when the gradient is constant on the set.
    pub alpha: Option<f64>,
}

/// Fits the Hölder exponent of a gradient field `du` (any number of
/// components, e.g. from [`gradient_field`](crate::fields::gradient_field))
/// on a node set, in the intrinsic metric `|dx| + sqrt(lambda^(p-2) |dt|)`
/// normalised by `min(1, lambda^((p-2)/2)) rho`.
///
/// Pairs closer than `2h min(1, lambda^((p-2)/2))` are discarded. The
/// implied constant is `max |du(z1) - du(z2)| / (lambda modulus^alpha)`.
pub fn fit_holder_exponent(du: &SpaceTimeField, set: &NodeSet, lambda: f64, rho: f64, p: f64, seed: u64) -> Result<HolderFit> {
    if !(lambda > 0.0 && rho > 0.0 && p > 1.0) {
        return invalid(format!("need lambda > 0, rho > 0, p > 1 (got {lambda}, {rho}, {p})"));
    }
    if set.is_empty() {
        return invalid("empty region");
    }
    let g = du.grid();
    let width = du.k();
    let points: Vec<(usize, usize)> = set.levels().flat_map(|l| set.nodes.iter().map(move |&v| (l, v))).collect();
    let coords: Vec<[f64; 2]> = points.iter().map(|&(_, v)| g.coord(v)).collect();
    let times: Vec<f64> = points.iter().map(|&(l, _)| g.time(l)).collect();
    let shrink = lambda.powf(0.5 * (p - 2.0)).min(1.0);
    let hmin = g.h().iter().cloned().fold(f64::INFINITY, f64::min);
    let floor = 2.0 * hmin * shrink * (1.0 - 1e-9);
    let tscale = lambda.powf(p - 2.0);
    let fit = fit_pairs(
        points.len(),
        width,
        seed,
        |i, out| {
            let (l, v) = points[i];
            out.copy_from_slice(du.at(l, v));
        },
        |i, j| {
            let dx = ((coords[i][0] - coords[j][0]).powi(2) + (coords[i][1] - coords[j][1]).powi(2)).sqrt();
            let d = dx + (tscale * (times[i] - times[j]).abs()).sqrt();
            (d >= floor).then(|| d / (shrink * rho))
        },
    )?;
    let sup = points.iter().map(|&(l, v)| du.norm_at(l, v)).fold(0.0, f64::max);
    let base = EstimateReport::new("holder_fit", "gradient Hölder estimate in the intrinsic metric", fit.max_diff, lambda, g.describe())
        .param("lambda", lambda)
        .param("rho", rho)
        .param("p", p)
        .param("seed", seed as f64)
        .extra("pairs", fit.pairs as f64)
        .extra("sup_gradient", sup);
    let budget = Budget::ExponentIn { exponent: "alpha_o".into(), lo: 0.0, hi: 1.0 };
    let report = match fit.alpha {
        None => base.with_budget(budget).skip("gradient is constant on the set; no exponent"),
        Some(a) => {
            let mut r = base.exponent("alpha_o", a);
            r.implied_constant = ratio(fit.constant, lambda);
            r.with_budget(budget)
        }
    };
    Ok(HolderFit { alpha: fit.alpha, report })
}
