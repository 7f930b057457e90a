use std::io::{BufRead, Read, Write};

use crate::error::{invalid, Error, Result};
use crate::geometry::Grid;

/// A `k`-component field sampled on every grid node at every time level.
///
/// Values are stored level by level, node by node, component by component:
/// `values[(level * num_nodes + node) * k + c]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    grid: Grid,
    k: usize,
    values: Vec<f64>,
}

impl SpaceTimeField {
    pub fn zeros(grid: &Grid, k: usize) -> Self {
        assert!(k >= 1, "field needs at least one component");
        SpaceTimeField { grid: grid.clone(), k, values: vec![0.0; grid.levels() * grid.num_nodes() * k] }
    }

    pub fn from_values(grid: &Grid, k: usize, values: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return invalid("field needs at least one component");
        }
        let want = grid.levels() * grid.num_nodes() * k;
        if values.len() != want {
            return invalid(format!("expected {want} values, got {}", values.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("non-finite value at flat index {i}"));
        }
        Ok(SpaceTimeField { grid: grid.clone(), k, values })
    }

    /// Samples `f(x, t, out)` at every node and level.
    pub fn from_fn(grid: &Grid, k: usize, f: impl Fn(&[f64], f64, &mut [f64])) -> Self {
        let mut field = SpaceTimeField::zeros(grid, k);
        let nn = grid.num_nodes();
        for l in 0..grid.levels() {
            let t = grid.time(l);
            for v in 0..nn {
                let x = grid.coord(v);
                let o = (l * nn + v) * k;
                f(&x[..grid.dim()], t, &mut field.values[o..o + k]);
            }
        }
        field
    }

    /// Scalar convenience wrapper around [`SpaceTimeField::from_fn`].
    pub fn from_scalar_fn(grid: &Grid, f: impl Fn(&[f64], f64) -> f64) -> Self {
        SpaceTimeField::from_fn(grid, 1, |x, t, out| out[0] = f(x, t))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, level: usize, node: usize) -> &[f64] {
        let o = (level * self.grid.num_nodes() + node) * self.k;
        &self.values[o..o + self.k]
    }

    pub fn at_mut(&mut self, level: usize, node: usize) -> &mut [f64] {
        let o = (level * self.grid.num_nodes() + node) * self.k;
        &mut self.values[o..o + self.k]
    }

    pub fn get(&self, level: usize, node: usize, c: usize) -> f64 {
        self.values[(level * self.grid.num_nodes() + node) * self.k + c]
    }

    /// All nodes and components at one level.
    pub fn level(&self, level: usize) -> &[f64] {
        let w = self.grid.num_nodes() * self.k;
        &self.values[level * w..(level + 1) * w]
    }

    pub fn level_mut(&mut self, level: usize) -> &mut [f64] {
        let w = self.grid.num_nodes() * self.k;
        &mut self.values[level * w..(level + 1) * w]
    }

    /// Euclidean norm of the k-vector at a node.
    pub fn norm_at(&self, level: usize, node: usize) -> f64 {
        self.at(level, node).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        SpaceTimeField { grid: self.grid.clone(), k: self.k, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Largest absolute nodal difference; fields must share grid and `k`.
    pub fn max_abs_diff(&self, other: &SpaceTimeField) -> Result<f64> {
        if self.grid != other.grid || self.k != other.k {
            return invalid("fields live on different grids");
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Value at an arbitrary space-time point by multilinear interpolation.
    pub fn interpolate(&self, x: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        let g = &self.grid;
        if x.len() != g.dim() || out.len() != self.k {
            return invalid("interpolation point has wrong dimension");
        }
        let ext = g.extents();
        // (lower index, weight of upper) per spatial axis
        let mut base = [(0usize, 0.0f64); 2];
        for a in 0..g.dim() {
            let s = (x[a] - ext[a].0) / g.h()[a];
            let top = (g.n()[a] - 1) as f64;
            if s < -1e-9 || s > top + 1e-9 {
                return invalid(format!("interpolation coordinate {} outside axis {a}", x[a]));
            }
            let s = s.clamp(0.0, top);
            let i = (s.floor() as usize).min(g.n()[a] - 2);
            base[a] = (i, s - i as f64);
        }
        let st = (t - g.t0()) / g.dt();
        if st < -1e-9 || st > g.steps() as f64 + 1e-9 {
            return invalid(format!("interpolation time {t} outside the time axis"));
        }
        let st = st.clamp(0.0, g.steps() as f64);
        let l = (st.floor() as usize).min(g.steps() - 1);
        let wt = st - l as f64;
        out.iter_mut().for_each(|o| *o = 0.0);
        let corners = 1usize << g.dim();
        for lt in 0..2 {
            let w_t = if lt == 0 { 1.0 - wt } else { wt };
            if w_t == 0.0 {
                continue;
            }
            for c in 0..corners {
                let mut ij = [0usize; 2];
                let mut w = w_t;
                for a in 0..g.dim() {
                    let up = (c >> a) & 1 == 1;
                    ij[a] = base[a].0 + up as usize;
                    w *= if up { base[a].1 } else { 1.0 - base[a].1 };
                }
                if w == 0.0 {
                    continue;
                }
                let vals = self.at(l + lt, g.index(ij));
                for (o, v) in out.iter_mut().zip(vals) {
                    *o += w * v;
                }
            }
        }
        Ok(())
    }

    /// Writes the text layout: header lines then one value per line.
    ///
    /// ```text
    /// paralab-field 1
    /// d <d>
    /// n <n_1> [<n_2>]
    /// k <k>
    /// nt <levels>
    /// extent <lo_1> <hi_1> [<lo_2> <hi_2>]
    /// time <t0> <dt>
    /// <values, level-major, then node (first axis fastest), then component>
    /// ```
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let g = &self.grid;
        writeln!(w, "paralab-field 1")?;
        writeln!(w, "d {}", g.dim())?;
        let n: Vec<String> = g.n().iter().map(|m| m.to_string()).collect();
        writeln!(w, "n {}", n.join(" "))?;
        writeln!(w, "k {}", self.k)?;
        writeln!(w, "nt {}", g.levels())?;
        let ext: Vec<String> = g.extents().iter().map(|(a, b)| format!("{a:e} {b:e}")).collect();
        writeln!(w, "extent {}", ext.join(" "))?;
        writeln!(w, "time {:e} {:e}", g.t0(), g.dt())?;
        for v in &self.values {
            writeln!(w, "{v:e}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = |key: &str| -> Result<Vec<String>> {
            let line = lines.next().ok_or_else(|| Error::Format(format!("missing `{key}` line")))??;
            let mut parts = line.split_whitespace().map(str::to_string);
            match parts.next() {
                Some(k) if k == key => Ok(parts.collect()),
                other => Err(Error::Format(format!("expected `{key}`, found {other:?}"))),
            }
        };
        let version = next("paralab-field")?;
        if version != ["1"] {
            return Err(Error::Format(format!("unsupported version {version:?}")));
        }
        let d: usize = parse_one(&next("d")?)?;
        let n: Vec<usize> = parse_all(&next("n")?)?;
        let k: usize = parse_one(&next("k")?)?;
        let nt: usize = parse_one(&next("nt")?)?;
        let ext: Vec<f64> = parse_all(&next("extent")?)?;
        let time: Vec<f64> = parse_all(&next("time")?)?;
        let grid = grid_from_header(d, &n, nt, &ext, &time)?;
        let mut values = Vec::with_capacity(grid.levels() * grid.num_nodes() * k);
        for line in lines {
            let line = line?;
            let s = line.trim();
            if s.is_empty() {
                continue;
            }
            values.push(s.parse::<f64>().map_err(|e| Error::Format(format!("bad value {s:?}: {e}")))?);
        }
        SpaceTimeField::from_values(&grid, k, values)
    }

    /// Binary layout: magic `PLFD`, then little-endian `u32` d, `u32` n per
    /// axis, `u32` k, `u32` nt, `f64` extents, `f64` t0 and dt, and the
    /// values in the same order as the text layout.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let g = &self.grid;
        w.write_all(b"PLFD")?;
        w.write_all(&(g.dim() as u32).to_le_bytes())?;
        for &m in g.n() {
            w.write_all(&(m as u32).to_le_bytes())?;
        }
        w.write_all(&(self.k as u32).to_le_bytes())?;
        w.write_all(&(g.levels() as u32).to_le_bytes())?;
        for (a, b) in g.extents() {
            w.write_all(&a.to_le_bytes())?;
            w.write_all(&b.to_le_bytes())?;
        }
        w.write_all(&g.t0().to_le_bytes())?;
        w.write_all(&g.dt().to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"PLFD" {
            return Err(Error::Format("bad magic".into()));
        }
        let mut u32s = |count: usize| -> Result<Vec<usize>> {
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let mut b = [0u8; 4];
                r.read_exact(&mut b)?;
                out.push(u32::from_le_bytes(b) as usize);
            }
            Ok(out)
        };
        let d = u32s(1)?[0];
        if !(1..=2).contains(&d) {
            return Err(Error::Format(format!("dimension {d}")));
        }
        let n = u32s(d)?;
        let k = u32s(1)?[0];
        let nt = u32s(1)?[0];
        let mut f64s = |count: usize| -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let mut b = [0u8; 8];
                r.read_exact(&mut b)?;
                out.push(f64::from_le_bytes(b));
            }
            Ok(out)
        };
        let ext = f64s(2 * d)?;
        let time = f64s(2)?;
        let grid = grid_from_header(d, &n, nt, &ext, &time)?;
        let values = f64s(grid.levels() * grid.num_nodes() * k)?;
        SpaceTimeField::from_values(&grid, k, values)
    }

    /// CSV of one time level: coordinates, time, then one column per component.
    pub fn write_slice_csv<W: Write>(&self, level: usize, mut w: W) -> Result<()> {
        let g = &self.grid;
        if level >= g.levels() {
            return invalid(format!("level {level} out of range"));
        }
        let axes = ["x", "y"];
        let mut head: Vec<String> = axes[..g.dim()].iter().map(|s| s.to_string()).collect();
        head.push("t".into());
        head.extend((0..self.k).map(|c| format!("u{c}")));
        writeln!(w, "{}", head.join(","))?;
        let t = g.time(level);
        for v in 0..g.num_nodes() {
            let x = g.coord(v);
            let mut row: Vec<String> = x[..g.dim()].iter().map(|c| format!("{c:e}")).collect();
            row.push(format!("{t:e}"));
            row.extend(self.at(level, v).iter().map(|c| format!("{c:e}")));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn parse_one<T: std::str::FromStr>(parts: &[String]) -> Result<T> {
    match parts {
        [s] => s.parse().map_err(|_| Error::Format(format!("bad number {s:?}"))),
        _ => Err(Error::Format(format!("expected one value, got {parts:?}"))),
    }
}

fn parse_all<T: std::str::FromStr>(parts: &[String]) -> Result<Vec<T>> {
    parts.iter().map(|s| s.parse().map_err(|_| Error::Format(format!("bad number {s:?}")))).collect()
}

fn grid_from_header(d: usize, n: &[usize], nt: usize, ext: &[f64], time: &[f64]) -> Result<Grid> {
    if n.len() != d || ext.len() != 2 * d || time.len() != 2 || nt < 2 {
        return Err(Error::Format("inconsistent header".into()));
    }
    let extents: Vec<(f64, f64)> = ext.chunks(2).map(|c| (c[0], c[1])).collect();
    let (t0, dt) = (time[0], time[1]);
    Grid::new(&extents, n, t0, t0 + (nt - 1) as f64 * dt, dt).map_err(|e| Error::Format(e.to_string()))
}
