//! Structured grids, space-time cylinders and parabolic distances.
//!
//! Every region used by the estimate checkers snaps to grid nodes: a cylinder
//! is turned into a [`NodeSet`] (spatial nodes inside the cross-section, time
//! levels inside the closed time interval) before anything is evaluated on it.

use crate::error::{invalid, Result};

/// Relative slack used when snapping continuous regions to nodes.
const SNAP: f64 = 1e-9;

/// A space-time point `z = (x, t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub x: Vec<f64>,
    pub t: f64,
}

impl Point {
    pub fn new(x: &[f64], t: f64) -> Self {
        Point { x: x.to_vec(), t }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

/// Uniform tensor grid in one or two space dimensions with a uniform time axis.
///
/// Node `(i, j)` has flat index `i + n[0] * j`, so the first axis varies fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    lo: [f64; 2],
    hi: [f64; 2],
    n: [usize; 2],
    h: [f64; 2],
    t0: f64,
    dt: f64,
    steps: usize,
}

impl Grid {
    /// Builds a grid over the box `extents` with `n[a]` nodes per axis and
    /// time levels `t0, t0 + dt, ..., t_end`.
    pub fn new(extents: &[(f64, f64)], n: &[usize], t0: f64, t_end: f64, dt: f64) -> Result<Self> {
        let dim = extents.len();
        if !(1..=2).contains(&dim) || n.len() != dim {
            return invalid(format!("grid dimension must be 1 or 2 (got {dim} extents, {} counts)", n.len()));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return invalid(format!("time step must be positive (got {dt})"));
        }
        if !(t_end > t0) {
            return invalid(format!("t_end = {t_end} must exceed t0 = {t0}"));
        }
        let ratio = (t_end - t0) / dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-6 * ratio.max(1.0) || steps < 1.0 {
            return invalid(format!("(t_end - t0) / dt = {ratio} is not a whole number of steps"));
        }
        let mut g = Grid {
            dim,
            lo: [0.0; 2],
            hi: [0.0; 2],
            n: [1, 1],
            h: [1.0, 1.0],
            t0,
            dt,
            steps: steps as usize,
        };
        for a in 0..dim {
            let (lo, hi) = extents[a];
            if !(hi > lo) {
                return invalid(format!("axis {a}: empty extent ({lo}, {hi})"));
            }
            if n[a] < 8 {
                return invalid(format!("axis {a}: need at least 8 nodes (got {})", n[a]));
            }
            g.lo[a] = lo;
            g.hi[a] = hi;
            g.n[a] = n[a];
            g.h[a] = (hi - lo) / (n[a] - 1) as f64;
        }
        Ok(g)
    }

    /// Same spatial layout, different time axis.
    pub fn with_time(&self, t0: f64, t_end: f64, dt: f64) -> Result<Self> {
        let ext = self.extents();
        Grid::new(&ext, &self.n[..self.dim], t0, t_end, dt)
    }

    /// Halves both the spacing and the time step.
    pub fn refined(&self) -> Result<Self> {
        let n: Vec<usize> = self.n[..self.dim].iter().map(|&m| 2 * m - 1).collect();
        Grid::new(&self.extents(), &n, self.t0, self.t_end(), self.dt / 2.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn n(&self) -> &[usize] {
        &self.n[..self.dim]
    }
    pub fn h(&self) -> &[f64] {
        &self.h[..self.dim]
    }
    pub fn extents(&self) -> Vec<(f64, f64)> {
        (0..self.dim).map(|a| (self.lo[a], self.hi[a])).collect()
    }
    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn steps(&self) -> usize {
        self.steps
    }
    pub fn t_end(&self) -> f64 {
        self.t0 + self.steps as f64 * self.dt
    }
    pub fn levels(&self) -> usize {
        self.steps + 1
    }
    pub fn time(&self, level: usize) -> f64 {
        self.t0 + level as f64 * self.dt
    }
    pub fn num_nodes(&self) -> usize {
        self.n[0] * self.n[1]
    }
    /// Product of the spacings: the volume a node represents.
    pub fn cell_volume(&self) -> f64 {
        self.h().iter().product()
    }
    /// Lebesgue measure of the spatial box.
    pub fn measure(&self) -> f64 {
        (0..self.dim).map(|a| self.hi[a] - self.lo[a]).product()
    }

    pub fn index(&self, ij: [usize; 2]) -> usize {
        ij[0] + self.n[0] * ij[1]
    }
    pub fn multi_index(&self, node: usize) -> [usize; 2] {
        [node % self.n[0], node / self.n[0]]
    }
    pub fn coord(&self, node: usize) -> [f64; 2] {
        let ij = self.multi_index(node);
        let mut x = [0.0; 2];
        for a in 0..self.dim {
            x[a] = self.lo[a] + ij[a] as f64 * self.h[a];
        }
        x
    }
    pub fn coords(&self, node: usize) -> Vec<f64> {
        self.coord(node)[..self.dim].to_vec()
    }
    pub fn is_boundary(&self, node: usize) -> bool {
        let ij = self.multi_index(node);
        (0..self.dim).any(|a| ij[a] == 0 || ij[a] + 1 == self.n[a])
    }

    /// Nearest time level to `t`, or an error if `t` is outside the axis.
    pub fn level_of(&self, t: f64) -> Result<usize> {
        let s = (t - self.t0) / self.dt;
        if s < -SNAP * 1e3 || s > self.steps as f64 + SNAP * 1e3 {
            return invalid(format!("time {t} outside [{}, {}]", self.t0, self.t_end()));
        }
        Ok(s.round().clamp(0.0, self.steps as f64) as usize)
    }

    /// Level index if `t` lies on the time axis (to rounding), otherwise `None`.
    pub fn exact_level(&self, t: f64) -> Option<usize> {
        let s = (t - self.t0) / self.dt;
        let r = s.round();
        if (s - r).abs() <= 1e-7 && r >= 0.0 && r <= self.steps as f64 {
            Some(r as usize)
        } else {
            None
        }
    }

    /// Node closest to `x`.
    pub fn nearest_node(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim {
            return invalid("point dimension differs from grid dimension");
        }
        let mut ij = [0usize; 2];
        for a in 0..self.dim {
            let s = (x[a] - self.lo[a]) / self.h[a];
            if s < -0.5 || s > (self.n[a] - 1) as f64 + 0.5 {
                return invalid(format!("coordinate {} outside axis {a}", x[a]));
            }
            ij[a] = s.round().clamp(0.0, (self.n[a] - 1) as f64) as usize;
        }
        Ok(self.index(ij))
    }

    /// Whether the spatial point lies in the closed box.
    pub fn contains_x(&self, x: &[f64]) -> bool {
        (0..self.dim).all(|a| {
            let tol = SNAP * self.h[a];
            x[a] >= self.lo[a] - tol && x[a] <= self.hi[a] + tol
        })
    }

    /// Grid neighbours along the axes (no diagonals).
    pub fn axis_neighbors(&self, node: usize) -> Vec<usize> {
        let ij = self.multi_index(node);
        let mut out = Vec::with_capacity(4);
        for a in 0..self.dim {
            if ij[a] > 0 {
                let mut m = ij;
                m[a] -= 1;
                out.push(self.index(m));
            }
            if ij[a] + 1 < self.n[a] {
                let mut m = ij;
                m[a] += 1;
                out.push(self.index(m));
            }
        }
        out
    }

    pub fn describe(&self) -> String {
        let n: Vec<String> = self.n().iter().map(|m| m.to_string()).collect();
        format!(
            "d={} n={} h={:.4e} t=[{},{}] dt={:.3e}",
            self.dim,
            n.join("x"),
            self.h[0],
            self.t0,
            self.t_end(),
            self.dt
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossSection {
    Ball,
    Cube,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeKind {
    /// `(t_o - S, t_o]`
    Backward,
    /// `(t_o - S, t_o + S)`
    Symmetric,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scaling {
    None,
    /// Time length `lambda^(2-p) rho^2`.
    Intrinsic { lambda: f64, p: f64 },
    /// Half time length `u0^(q+1-p) rho^p`.
    DnlIntrinsic { u0: f64, p: f64, q: f64 },
}

/// Spatial ball or cube around a centre.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialRegion {
    pub shape: CrossSection,
    pub center: Vec<f64>,
    pub radius: f64,
}

impl SpatialRegion {
    pub fn ball(center: &[f64], radius: f64) -> Self {
        SpatialRegion { shape: CrossSection::Ball, center: center.to_vec(), radius }
    }

    pub fn cube(center: &[f64], radius: f64) -> Self {
        SpatialRegion { shape: CrossSection::Cube, center: center.to_vec(), radius }
    }

    pub fn contains(&self, x: &[f64], h: f64) -> bool {
        let slack = self.radius + SNAP * h.max(self.radius);
        match self.shape {
            CrossSection::Ball => euclid(x, &self.center) <= slack,
            CrossSection::Cube => x.iter().zip(&self.center).all(|(a, b)| (a - b).abs() <= slack),
        }
    }

    /// Grid nodes inside the region (possibly empty).
    pub fn nodes(&self, grid: &Grid) -> Vec<usize> {
        let hmin = grid.h().iter().cloned().fold(f64::INFINITY, f64::min);
        (0..grid.num_nodes())
            .filter(|&v| self.contains(&grid.coord(v)[..grid.dim()], hmin))
            .collect()
    }
}

/// Nodes of a space-time region: spatial node list times a closed range of levels.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeSet {
    pub nodes: Vec<usize>,
    pub first_level: usize,
    pub last_level: usize,
}

impl NodeSet {
    pub fn levels(&self) -> std::ops::RangeInclusive<usize> {
        self.first_level..=self.last_level
    }
    pub fn num_levels(&self) -> usize {
        self.last_level - self.first_level + 1
    }
    pub fn len(&self) -> usize {
        self.nodes.len() * self.num_levels()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    /// Every node and level of the grid.
    pub fn whole(grid: &Grid) -> Self {
        NodeSet { nodes: (0..grid.num_nodes()).collect(), first_level: 0, last_level: grid.steps() }
    }
    /// Same spatial nodes at a single level.
    pub fn at_level(&self, level: usize) -> Self {
        NodeSet { nodes: self.nodes.clone(), first_level: level, last_level: level }
    }
}

/// A space-time cylinder `cross-section x time interval`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cylinder {
    pub center: Point,
    pub radius: f64,
    /// Backward: the full length `S`. Symmetric: the half length.
    pub duration: f64,
    pub cross_section: CrossSection,
    pub time_kind: TimeKind,
    pub scaling: Scaling,
}

impl Cylinder {
    /// General backward cylinder `Q_{R,S}(z_o)`.
    pub fn backward(center: Point, radius: f64, duration: f64, cross_section: CrossSection) -> Result<Self> {
        if !(radius > 0.0) || !(duration > 0.0) {
            return invalid(format!("cylinder needs positive radius and duration (got {radius}, {duration})"));
        }
        Ok(Cylinder {
            center,
            radius,
            duration,
            cross_section,
            time_kind: TimeKind::Backward,
            scaling: Scaling::None,
        })
    }

    /// Symmetric cylinder `(t_o - S, t_o + S)` with the given half length.
    pub fn symmetric(center: Point, radius: f64, half: f64, cross_section: CrossSection) -> Result<Self> {
        let mut c = Cylinder::backward(center, radius, half, cross_section)?;
        c.time_kind = TimeKind::Symmetric;
        Ok(c)
    }

    pub fn spatial(&self) -> SpatialRegion {
        SpatialRegion { shape: self.cross_section, center: self.center.x.clone(), radius: self.radius }
    }

    /// Closed time interval `[lo, hi]` spanned by the cylinder.
    pub fn time_interval(&self) -> (f64, f64) {
        match self.time_kind {
            TimeKind::Backward => (self.center.t - self.duration, self.center.t),
            TimeKind::Symmetric => (self.center.t - self.duration, self.center.t + self.duration),
        }
    }

    pub fn contains(&self, z: &Point) -> bool {
        let (lo, hi) = self.time_interval();
        let tol = SNAP * (hi - lo);
        z.t >= lo - tol && z.t <= hi + tol && self.spatial().contains(&z.x, self.radius)
    }

    /// Same centre and kind, radius scaled by `factor`; the duration follows the
    /// cylinder's scaling law.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let r = self.radius * factor;
        match self.scaling {
            Scaling::Intrinsic { lambda, p } => {
                let mut c = intrinsic_cylinder(&self.center, r, lambda, p)?;
                c.cross_section = self.cross_section;
                Ok(c)
            }
            Scaling::DnlIntrinsic { u0, p, q } => dnl_intrinsic_cylinder(&self.center, r, u0, p, q),
            Scaling::None => {
                let mut c = self.clone();
                c.radius = r;
                c.duration = self.duration * factor * factor;
                Ok(c)
            }
        }
    }

    /// Whether the closed cylinder fits inside the grid's space-time box.
    pub fn inside(&self, grid: &Grid) -> bool {
        let (lo, hi) = self.time_interval();
        let tol = SNAP * grid.dt() * 1e3;
        if lo < grid.t0() - tol || hi > grid.t_end() + tol {
            return false;
        }
        let ext = grid.extents();
        self.center.x.iter().zip(&ext).zip(grid.h()).all(|((c, (a, b)), h)| {
            let s = SNAP * h;
            c - self.radius >= a - s && c + self.radius <= b + s
        })
    }

    /// Snaps the cylinder to grid nodes. Rejects regions with fewer than three
    /// nodes along any spatial axis or fewer than three time levels.
    pub fn node_set(&self, grid: &Grid) -> Result<NodeSet> {
        if self.center.dim() != grid.dim() {
            return invalid("cylinder centre dimension differs from grid dimension");
        }
        let nodes = self.spatial().nodes(grid);
        for a in 0..grid.dim() {
            let mut ids: Vec<usize> = nodes.iter().map(|&v| grid.multi_index(v)[a]).collect();
            ids.sort_unstable();
            ids.dedup();
            if ids.len() < 3 {
                return invalid(format!(
                    "cylinder of radius {} has {} node(s) along axis {a}; need at least 3",
                    self.radius,
                    ids.len()
                ));
            }
        }
        let (lo, hi) = self.time_interval();
        let tol = 1e-9 * grid.dt();
        let first = ((lo - grid.t0() - tol) / grid.dt()).ceil().max(0.0) as usize;
        let last_f = ((hi - grid.t0() + tol) / grid.dt()).floor();
        if last_f < 0.0 {
            return invalid("cylinder lies before the time axis");
        }
        let last = (last_f as usize).min(grid.steps());
        if last < first || last - first + 1 < 3 {
            return invalid(format!(
                "cylinder time interval [{lo}, {hi}] covers fewer than 3 time levels"
            ));
        }
        Ok(NodeSet { nodes, first_level: first, last_level: last })
    }
}

/// Backward intrinsic cylinder `B_rho(x_o) x (t_o - lambda^(2-p) rho^2, t_o]`.
pub fn intrinsic_cylinder(z_o: &Point, rho: f64, lambda: f64, p: f64) -> Result<Cylinder> {
    if !(rho > 0.0) || !(lambda > 0.0) {
        return invalid(format!("intrinsic cylinder needs rho > 0 and lambda > 0 (got {rho}, {lambda})"));
    }
    if !(p > 1.0) {
        return invalid(format!("p must exceed 1 (got {p})"));
    }
    let s = lambda.powf(2.0 - p) * rho * rho;
    let mut c = Cylinder::backward(z_o.clone(), rho, s, CrossSection::Ball)?;
    c.scaling = Scaling::Intrinsic { lambda, p };
    Ok(c)
}

/// Symmetric cube cylinder `K_rho(x_o) x (t_o - u0^(q+1-p) rho^p, t_o + u0^(q+1-p) rho^p)`.
pub fn dnl_intrinsic_cylinder(z_o: &Point, rho: f64, u0: f64, p: f64, q: f64) -> Result<Cylinder> {
    if !(u0 > 0.0) {
        return invalid(format!("u0 must be positive (got {u0})"));
    }
    if !(rho > 0.0) {
        return invalid(format!("rho must be positive (got {rho})"));
    }
    if !(p > 1.0 && q > p - 1.0) {
        return invalid(format!("need q > p - 1 > 0 (got p = {p}, q = {q})"));
    }
    let half = u0.powf(q + 1.0 - p) * rho.powf(p);
    let mut c = Cylinder::symmetric(z_o.clone(), rho, half, CrossSection::Cube)?;
    c.scaling = Scaling::DnlIntrinsic { u0, p, q };
    Ok(c)
}

/// `|x1 - x2| + sqrt(|t1 - t2|)`
pub fn par_distance(z1: &Point, z2: &Point) -> f64 {
    euclid(&z1.x, &z2.x) + (z1.t - z2.t).abs().sqrt()
}

/// `|x1 - x2| + sqrt(lambda^(p-2) |t1 - t2|)`
pub fn intrinsic_par_distance(z1: &Point, z2: &Point, lambda: f64, p: f64) -> f64 {
    euclid(&z1.x, &z2.x) + (lambda.powf(p - 2.0) * (z1.t - z2.t).abs()).sqrt()
}

/// Distance from a set of space-time points to the parabolic boundary
/// (initial face plus lateral faces) of the grid's box, measured as
/// `|x - y| + |t - s|^time_exponent`.
///
/// Lateral faces are sampled at one point per boundary node. For a point at
/// time `t` the nearest lateral sample can be taken at the same time, so only
/// spatial distances enter there; the initial face contributes `(t - t0)^e`.
pub fn boundary_distance(points: &[Point], grid: &Grid, time_exponent: f64) -> Result<f64> {
    if points.is_empty() {
        return invalid("empty point set");
    }
    let lateral: Vec<Vec<f64>> = (0..grid.num_nodes())
        .filter(|&v| grid.is_boundary(v))
        .map(|v| grid.coords(v))
        .collect();
    let mut best = f64::INFINITY;
    for z in points {
        if z.dim() != grid.dim() {
            return invalid("point dimension differs from grid dimension");
        }
        let dt = z.t - grid.t0();
        if dt <= 0.0 || !grid.contains_x(&z.x) {
            return Ok(0.0);
        }
        best = best.min(dt.powf(time_exponent));
        for y in &lateral {
            best = best.min(euclid(&z.x, y));
        }
    }
    Ok(best)
}

/// `(dist_par(K, parabolic boundary), rho)` with `rho = min(1, dist) / 4`.
pub fn par_boundary_distance(k: &[Point], grid: &Grid) -> Result<(f64, f64)> {
    let d = boundary_distance(k, grid, 0.5)?;
    Ok((d, 0.25 * d.min(1.0)))
}

/// Space-time points of a node set.
pub fn node_set_points(set: &NodeSet, grid: &Grid) -> Vec<Point> {
    let mut out = Vec::with_capacity(set.len());
    for l in set.levels() {
        for &v in &set.nodes {
            out.push(Point { x: grid.coords(v), t: grid.time(l) });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid() -> Grid {
        Grid::new(&[(0.0, 1.0)], &[11], 0.0, 1.0, 0.1).unwrap()
    }

    #[test]
    fn intrinsic_durations() {
        let z = Point::new(&[0.0], 0.0);
        assert!((intrinsic_cylinder(&z, 0.5, 1.0, 3.0).unwrap().duration - 0.25).abs() < 1e-15);
        assert!((intrinsic_cylinder(&z, 0.5, 7.3, 2.0).unwrap().duration - 0.25).abs() < 1e-15);
        assert!((intrinsic_cylinder(&z, 1.0, 4.0, 3.0).unwrap().duration - 0.25).abs() < 1e-15);
        assert!(intrinsic_cylinder(&z, 0.0, 1.0, 3.0).is_err());
        assert!(intrinsic_cylinder(&z, 1.0, -1.0, 3.0).is_err());
    }

    #[test]
    fn dnl_durations() {
        let z = Point::new(&[0.0, 0.0], 0.0);
        let c = dnl_intrinsic_cylinder(&z, 0.3, 1.0, 1.5, 2.0).unwrap();
        assert!((c.duration - 0.3f64.powf(1.5)).abs() < 1e-15);
        let c = dnl_intrinsic_cylinder(&z, 1.0, 4.0, 2.0, 2.0).unwrap();
        assert!((c.duration - 4.0).abs() < 1e-14);
        let a = dnl_intrinsic_cylinder(&z, 0.2, 1.7, 1.5, 2.0).unwrap();
        let b = dnl_intrinsic_cylinder(&z, 0.6, 1.7, 1.5, 2.0).unwrap();
        assert!((b.duration / a.duration - 3f64.powf(1.5)).abs() < 1e-12);
        assert!(dnl_intrinsic_cylinder(&z, 1.0, 0.0, 2.0, 2.0).is_err());
        assert_eq!(a.cross_section, CrossSection::Cube);
        assert_eq!(a.time_kind, TimeKind::Symmetric);
    }

    #[test]
    fn distances() {
        let a = Point::new(&[0.0, 0.0], 0.0);
        assert_eq!(par_distance(&a, &a), 0.0);
        assert_eq!(par_distance(&a, &Point::new(&[0.0, 0.0], 1.0)), 1.0);
        assert_eq!(par_distance(&Point::new(&[1.0, 0.0], 0.0), &Point::new(&[0.0, 0.0], 4.0)), 3.0);
        let b = Point::new(&[0.0, 0.0], 1.0);
        assert!((intrinsic_par_distance(&a, &b, 4.0, 3.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_distance_examples() {
        let g = unit_grid();
        let (d, rho) = par_boundary_distance(&[Point::new(&[0.5], 0.5)], &g).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
        assert!((rho - 0.125).abs() < 1e-12);
        let (d, rho) = par_boundary_distance(&[Point::new(&[0.0], 0.5)], &g).unwrap();
        assert_eq!((d, rho), (0.0, 0.0));
    }

    #[test]
    fn snapping_rejects_coarse_cylinders() {
        let g = unit_grid();
        let c = Cylinder::backward(Point::new(&[0.5], 0.5), 0.05, 0.3, CrossSection::Ball).unwrap();
        assert!(c.node_set(&g).is_err());
        let c = Cylinder::backward(Point::new(&[0.5], 0.5), 0.2, 0.3, CrossSection::Ball).unwrap();
        let s = c.node_set(&g).unwrap();
        assert_eq!(s.nodes, vec![3, 4, 5, 6, 7]);
        assert_eq!((s.first_level, s.last_level), (2, 5));
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(Grid::new(&[(0.0, 1.0)], &[5], 0.0, 1.0, 0.1).is_err());
        assert!(Grid::new(&[(0.0, 1.0)], &[9], 0.0, 1.0, 0.3).is_err());
        assert!(Grid::new(&[(0.0, 1.0)], &[9], 0.0, 1.0, 0.0).is_err());
        let g = Grid::new(&[(0.0, 1.0), (0.0, 2.0)], &[11, 21], 0.0, 1.0, 0.25).unwrap();
        assert_eq!(g.levels(), 5);
        assert!((g.h()[1] - 0.1).abs() < 1e-15);
        let r = g.refined().unwrap();
        assert_eq!(r.n(), &[21, 41]);
        assert_eq!(r.levels(), 9);
    }
}
