use crate::error::{invalid, Result};
use crate::geometry::{Cylinder, Grid, NodeSet, SpatialRegion};

use super::SpaceTimeField;

/// Nodal gradient at one level: second-order central differences inside,
/// second-order one-sided differences on the boundary.
///
/// Layout: `out[(node * k + c) * d + axis]`.
pub fn gradient(u: &SpaceTimeField, level: usize) -> Vec<f64> {
    let g = u.grid();
    let (d, k, nn) = (g.dim(), u.k(), g.num_nodes());
    let vals = u.level(level);
    let mut out = vec![0.0; nn * k * d];
    for v in 0..nn {
        let ij = g.multi_index(v);
        for a in 0..d {
            let n = g.n()[a];
            let h = g.h()[a];
            let at = |off: isize| {
                let mut m = ij;
                m[a] = (ij[a] as isize + off) as usize;
                g.index(m)
            };
            let i = ij[a];
            for c in 0..k {
                let val = |node: usize| vals[node * k + c];
                let deriv = if i == 0 {
                    (-3.0 * val(v) + 4.0 * val(at(1)) - val(at(2))) / (2.0 * h)
                } else if i + 1 == n {
                    (3.0 * val(v) - 4.0 * val(at(-1)) + val(at(-2))) / (2.0 * h)
                } else {
                    (val(at(1)) - val(at(-1))) / (2.0 * h)
                };
                out[(v * k + c) * d + a] = deriv;
            }
        }
    }
    out
}

/// Gradient at every level as a field with `k * d` components.
pub fn gradient_field(u: &SpaceTimeField) -> SpaceTimeField {
    let g = u.grid();
    let kd = u.k() * g.dim();
    let mut out = SpaceTimeField::zeros(g, kd);
    for l in 0..g.levels() {
        out.level_mut(l).copy_from_slice(&gradient(u, l));
    }
    out
}

/// Frobenius norm of the nodal gradient at every node of one level.
pub fn gradient_norms(u: &SpaceTimeField, level: usize) -> Vec<f64> {
    let kd = u.k() * u.grid().dim();
    gradient(u, level).chunks(kd).map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect()
}

/// Node average of `u(., t_level)` over a ball or cube.
pub fn slicewise_mean(u: &SpaceTimeField, region: &SpatialRegion, level: usize) -> Result<Vec<f64>> {
    let nodes = region.nodes(u.grid());
    if nodes.is_empty() {
        return invalid("region contains no grid nodes");
    }
    let mut acc = vec![0.0; u.k()];
    for &v in &nodes {
        for (a, x) in acc.iter_mut().zip(u.at(level, v)) {
            *a += x;
        }
    }
    acc.iter_mut().for_each(|a| *a /= nodes.len() as f64);
    Ok(acc)
}

/// Average over all nodes and levels of a node set.
pub fn set_mean(u: &SpaceTimeField, set: &NodeSet) -> Result<Vec<f64>> {
    if set.is_empty() {
        return invalid("empty region");
    }
    let mut acc = vec![0.0; u.k()];
    for l in set.levels() {
        for &v in &set.nodes {
            for (a, x) in acc.iter_mut().zip(u.at(l, v)) {
                *a += x;
            }
        }
    }
    let n = set.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

/// Mean value over a cylinder's node set.
pub fn cylinder_mean(u: &SpaceTimeField, q: &Cylinder) -> Result<Vec<f64>> {
    set_mean(u, &q.node_set(u.grid())?)
}

/// Largest Euclidean distance between the k-vectors taken on the region.
pub fn oscillation(u: &SpaceTimeField, set: &NodeSet) -> Result<f64> {
    if set.is_empty() {
        return invalid("empty region");
    }
    let k = u.k();
    if k == 1 {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for l in set.levels() {
            for &v in &set.nodes {
                let x = u.get(l, v, 0);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        return Ok(hi - lo);
    }
    let mut pts: Vec<&[f64]> = Vec::with_capacity(set.len());
    for l in set.levels() {
        for &v in &set.nodes {
            pts.push(u.at(l, v));
        }
    }
    Ok(diameter(&pts))
}

/// Diameter of a point cloud. Points are sorted by distance from the centroid
/// so the pair search can stop once `r_i + r_j` cannot beat the best pair.
pub(crate) fn diameter(pts: &[&[f64]]) -> f64 {
    let k = pts[0].len();
    let mut centroid = vec![0.0; k];
    for p in pts {
        for (c, x) in centroid.iter_mut().zip(p.iter()) {
            *c += x;
        }
    }
    centroid.iter_mut().for_each(|c| *c /= pts.len() as f64);
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let mut order: Vec<(f64, &[f64])> = pts.iter().map(|p| (dist(p, &centroid), *p)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = 0.0f64;
    for i in 0..order.len() {
        if 2.0 * order[i].0 <= best {
            break;
        }
        for j in (i + 1)..order.len() {
            if order[i].0 + order[j].0 <= best {
                break;
            }
            best = best.max(dist(order[i].1, order[j].1));
        }
    }
    best
}

/// Average of `|u|^p` over a node set (Euclidean norm for vector fields).
pub fn set_lp_mean(u: &SpaceTimeField, set: &NodeSet, p: f64) -> Result<f64> {
    if set.is_empty() {
        return invalid("empty region");
    }
    let mut acc = 0.0;
    for l in set.levels() {
        for &v in &set.nodes {
            acc += u.norm_at(l, v).powf(p);
        }
    }
    Ok(acc / set.len() as f64)
}

/// Average of `|u|^p` over a cylinder.
pub fn lp_mean(u: &SpaceTimeField, q: &Cylinder, p: f64) -> Result<f64> {
    set_lp_mean(u, &q.node_set(u.grid())?, p)
}

/// Discrete `L^r` norm over the whole space-time grid, every node and level
/// weighted by `h^d * dt`.
pub fn lr_norm(u: &SpaceTimeField, r: f64) -> f64 {
    let g = u.grid();
    let w = g.cell_volume() * g.dt();
    let mut acc = 0.0;
    for l in 0..g.levels() {
        for v in 0..g.num_nodes() {
            acc += u.norm_at(l, v).powf(r);
        }
    }
    (w * acc).powf(1.0 / r)
}

/// Forward Steklov average `(1/h) int_t^{t+h} v(x, s) ds`, integrating the
/// piecewise-linear-in-time interpolant exactly (trapezoid rule when `h` is a
/// multiple of the step). Levels with `t > t_end - h` are set to zero.
pub fn steklov_average(u: &SpaceTimeField, h: f64) -> Result<SpaceTimeField> {
    let g = u.grid();
    let span = g.t_end() - g.t0();
    if !(h > 0.0 && h < span) {
        return invalid(format!("Steklov length {h} must lie in (0, {span})"));
    }
    let dt = g.dt();
    let width = g.num_nodes() * u.k();
    let mut out = SpaceTimeField::zeros(g, u.k());
    let tol = 1e-9 * dt;
    for l in 0..g.levels() {
        let a = g.time(l) - g.t0();
        let b = a + h;
        if b > span + tol {
            continue;
        }
        let b = b.min(span);
        // weights of each level's hat function integrated over [a, b]
        let mut weights: Vec<(usize, f64)> = Vec::new();
        let first = (a / dt).floor() as usize;
        let last = ((b / dt).ceil() as usize).min(g.steps());
        for j in first..last {
            let (s0, s1) = (j as f64 * dt, (j + 1) as f64 * dt);
            let lo = a.max(s0);
            let hi = b.min(s1);
            if hi <= lo {
                continue;
            }
            // linear interpolation between levels j and j+1 on [lo, hi]
            let (x0, x1) = ((lo - s0) / dt, (hi - s0) / dt);
            let len = hi - lo;
            let w_up = len * 0.5 * (x0 + x1);
            weights.push((j, len - w_up));
            weights.push((j + 1, w_up));
        }
        let dst = out.level_mut(l);
        for (j, w) in weights {
            let src = &u.values()[j * width..(j + 1) * width];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += w / h * s;
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HolderAxis {
    Space,
    Time,
}

/// Largest difference quotient `|u(z) - u(z')| / gap^alpha` over pairs in the
/// region separated along one axis only. Pairs closer than two grid cells
/// (resp. two time steps) are skipped.
pub fn holder_seminorm(u: &SpaceTimeField, alpha: f64, set: &NodeSet, axis: HolderAxis) -> Result<f64> {
    let g = u.grid();
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let mut best: Option<f64> = None;
    match axis {
        HolderAxis::Space => {
            let hmin = g.h().iter().cloned().fold(f64::INFINITY, f64::min);
            let coords: Vec<[f64; 2]> = set.nodes.iter().map(|&v| g.coord(v)).collect();
            for l in set.levels() {
                for (i, &a) in set.nodes.iter().enumerate() {
                    for (j, &b) in set.nodes.iter().enumerate().skip(i + 1) {
                        let gap = ((coords[i][0] - coords[j][0]).powi(2) + (coords[i][1] - coords[j][1]).powi(2)).sqrt();
                        if gap < 2.0 * hmin * (1.0 - 1e-9) {
                            continue;
                        }
                        let q = diff(u.at(l, a), u.at(l, b)) / gap.powf(alpha);
                        best = Some(best.map_or(q, |m: f64| m.max(q)));
                    }
                }
            }
        }
        HolderAxis::Time => {
            let levels: Vec<usize> = set.levels().collect();
            for &v in &set.nodes {
                for (i, &la) in levels.iter().enumerate() {
                    for &lb in levels.get(i + 2..).unwrap_or(&[]) {
                        let gap = (lb - la) as f64 * g.dt();
                        let q = diff(u.at(la, v), u.at(lb, v)) / gap.powf(alpha);
                        best = Some(best.map_or(q, |m: f64| m.max(q)));
                    }
                }
            }
        }
    }
    best.ok_or_else(|| crate::Error::InvalidArgument("region has no admissible pair".into()))
}

/// Node set of a spatial region at a single level.
pub fn slice_set(grid: &Grid, region: &SpatialRegion, level: usize) -> Result<NodeSet> {
    let nodes = region.nodes(grid);
    if nodes.is_empty() {
        return invalid("region contains no grid nodes");
    }
    Ok(NodeSet { nodes, first_level: level, last_level: level })
}
