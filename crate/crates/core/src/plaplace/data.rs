use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::fields::SpaceTimeField;
use crate::geometry::Grid;

type DataFn = Arc<dyn Fn(&[f64], f64, &mut [f64]) + Send + Sync>;

/// Initial or boundary data: a closed-form function or a stored field.
#[derive(Clone)]
pub enum Source {
    Function(DataFn),
    Field(Arc<SpaceTimeField>),
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Function(_) => write!(f, "Source::Function"),
            Source::Field(u) => write!(f, "Source::Field({})", u.grid().describe()),
        }
    }
}

fn same_space(a: &Grid, b: &Grid) -> bool {
    a.n() == b.n() && a.extents() == b.extents()
}

impl Source {
    pub fn function(f: impl Fn(&[f64], f64, &mut [f64]) + Send + Sync + 'static) -> Self {
        Source::Function(Arc::new(f))
    }

    pub fn scalar(f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static) -> Self {
        Source::function(move |x, t, out| out[0] = f(x, t))
    }

    pub fn constant(values: Vec<f64>) -> Self {
        Source::function(move |_, _, out| out.copy_from_slice(&values))
    }

    pub fn field(u: SpaceTimeField) -> Self {
        Source::Field(Arc::new(u))
    }

    /// Writes the data at time `t` into `out` (node-major, `k` per node) for
    /// the listed nodes, or for every node when `nodes` is `None`.
    pub fn fill(&self, grid: &Grid, k: usize, t: f64, nodes: Option<&[usize]>, out: &mut [f64]) -> Result<()> {
        let all: Vec<usize>;
        let nodes = match nodes {
            Some(n) => n,
            None => {
                all = (0..grid.num_nodes()).collect();
                &all
            }
        };
        match self {
            Source::Function(f) => {
                let d = grid.dim();
                for &v in nodes {
                    let x = grid.coord(v);
                    f(&x[..d], t, &mut out[v * k..(v + 1) * k]);
                }
            }
            Source::Field(u) => {
                if u.k() != k {
                    return invalid(format!("data field has {} components, problem has {k}", u.k()));
                }
                let direct = if same_space(u.grid(), grid) { u.grid().exact_level(t) } else { None };
                match direct {
                    Some(level) => {
                        for &v in nodes {
                            out[v * k..(v + 1) * k].copy_from_slice(u.at(level, v));
                        }
                    }
                    None => {
                        let d = grid.dim();
                        for &v in nodes {
                            let x = grid.coord(v);
                            u.interpolate(&x[..d], t, &mut out[v * k..(v + 1) * k])?;
                        }
                    }
                }
            }
        }
        if nodes.iter().any(|&v| out[v * k..(v + 1) * k].iter().any(|x| !x.is_finite())) {
            return invalid(format!("data is not finite at t = {t}"));
        }
        Ok(())
    }
}
