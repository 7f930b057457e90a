//! Linear finite elements on the structured grid.
//!
//! In 1D every cell is an element. In 2D each square is cut along its
//! `(i, j) - (i + 1, j + 1)` diagonal into two right triangles. The mass
//! matrix is lumped, so an interior node carries weight `h^d`.

use crate::geometry::Grid;
use crate::linalg::Csr;

/// How a node takes part in a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeRole {
    /// Unknown of the implicit system.
    Free,
    /// Value imposed from the boundary data.
    Dirichlet,
    /// Not part of the solve region; carries the boundary data untouched.
    Outside,
}

#[derive(Clone, Debug)]
pub(crate) struct Element {
    pub v: [usize; 3],
    pub shape: usize,
    pub centroid: [f64; 2],
}

#[derive(Clone, Debug)]
pub(crate) struct Mesh {
    pub dim: usize,
    /// Vertices per element.
    pub nv: usize,
    pub area: f64,
    /// Gradients of the hat functions per element shape and local vertex.
    pub shapes: Vec<[[f64; 2]; 3]>,
    pub elems: Vec<Element>,
    pub role: Vec<NodeRole>,
    pub free: Vec<usize>,
    pub free_id: Vec<usize>,
    /// Lumped mass of every node over the included elements.
    pub mass: Vec<f64>,
    /// Sorted free neighbours (including itself) of each free node.
    pub neighbours: Vec<Vec<usize>>,
    /// For each element and local pair `(a, b)`, the position of `b` among
    /// the neighbours of `a` (`usize::MAX` when either is not free).
    pub pair_pos: Vec<[usize; 9]>,
}

const NONE: usize = usize::MAX;

fn all_elements(grid: &Grid) -> (Vec<Element>, Vec<[[f64; 2]; 3]>, usize, f64) {
    let n = grid.n();
    let h = grid.h();
    let mut elems = Vec::new();
    if grid.dim() == 1 {
        for i in 0..n[0] - 1 {
            let c = grid.coord(i)[0] + 0.5 * h[0];
            elems.push(Element { v: [i, i + 1, NONE], shape: 0, centroid: [c, 0.0] });
        }
        let shapes = vec![[[-1.0 / h[0], 0.0], [1.0 / h[0], 0.0], [0.0, 0.0]]];
        (elems, shapes, 2, h[0])
    } else {
        let (hx, hy) = (h[0], h[1]);
        for j in 0..n[1] - 1 {
            for i in 0..n[0] - 1 {
                let v00 = grid.index([i, j]);
                let v10 = grid.index([i + 1, j]);
                let v01 = grid.index([i, j + 1]);
                let v11 = grid.index([i + 1, j + 1]);
                let o = grid.coord(v00);
                elems.push(Element {
                    v: [v00, v10, v11],
                    shape: 0,
                    centroid: [o[0] + 2.0 * hx / 3.0, o[1] + hy / 3.0],
                });
                elems.push(Element {
                    v: [v00, v11, v01],
                    shape: 1,
                    centroid: [o[0] + hx / 3.0, o[1] + 2.0 * hy / 3.0],
                });
            }
        }
        let shapes = vec![
            [[-1.0 / hx, 0.0], [1.0 / hx, -1.0 / hy], [0.0, 1.0 / hy]],
            [[0.0, -1.0 / hy], [1.0 / hx, 0.0], [-1.0 / hx, 1.0 / hy]],
        ];
        (elems, shapes, 3, 0.5 * hx * hy)
    }
}

/// Roles of all nodes for a solve restricted to `mask` (the whole grid when `None`).
///
/// An element takes part when all its vertices are in the mask. A masked node
/// is free when it is off the grid boundary and every element touching it
/// takes part; the remaining masked nodes carry Dirichlet data.
pub fn node_roles(grid: &Grid, mask: Option<&[bool]>) -> Vec<NodeRole> {
    Mesh::new(grid, mask).role
}

impl Mesh {
    pub fn new(grid: &Grid, mask: Option<&[bool]>) -> Mesh {
        let nn = grid.num_nodes();
        let active = |v: usize| mask.map_or(true, |m| m[v]);
        let (all, shapes, nv, area) = all_elements(grid);
        let mut touching = vec![0usize; nn];
        let mut kept_touching = vec![0usize; nn];
        let mut elems = Vec::new();
        for e in all {
            let vs = &e.v[..nv];
            let keep = vs.iter().all(|&v| active(v));
            for &v in vs {
                touching[v] += 1;
                if keep {
                    kept_touching[v] += 1;
                }
            }
            if keep {
                elems.push(e);
            }
        }
        let role: Vec<NodeRole> = (0..nn)
            .map(|v| {
                if !active(v) {
                    NodeRole::Outside
                } else if !grid.is_boundary(v) && kept_touching[v] == touching[v] {
                    NodeRole::Free
                } else {
                    NodeRole::Dirichlet
                }
            })
            .collect();
        let free: Vec<usize> = (0..nn).filter(|&v| role[v] == NodeRole::Free).collect();
        let mut free_id = vec![NONE; nn];
        for (f, &v) in free.iter().enumerate() {
            free_id[v] = f;
        }
        let mut mass = vec![0.0; nn];
        let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); free.len()];
        for e in &elems {
            for a in 0..nv {
                mass[e.v[a]] += area / nv as f64;
                let fa = free_id[e.v[a]];
                if fa == NONE {
                    continue;
                }
                for b in 0..nv {
                    let fb = free_id[e.v[b]];
                    if fb != NONE {
                        neighbours[fa].push(fb);
                    }
                }
            }
        }
        for nb in &mut neighbours {
            nb.sort_unstable();
            nb.dedup();
        }
        let pair_pos = elems
            .iter()
            .map(|e| {
                let mut pos = [NONE; 9];
                for a in 0..nv {
                    let fa = free_id[e.v[a]];
                    if fa == NONE {
                        continue;
                    }
                    for b in 0..nv {
                        let fb = free_id[e.v[b]];
                        if fb != NONE {
                            pos[a * 3 + b] = neighbours[fa].binary_search(&fb).unwrap();
                        }
                    }
                }
                pos
            })
            .collect();
        Mesh {
            dim: grid.dim(),
            nv,
            area,
            shapes,
            elems,
            role,
            free,
            free_id,
            mass,
            neighbours,
            pair_pos,
        }
    }

    /// Sparsity pattern for `k` components per free node, unknown `f * k + c`.
    pub fn pattern(&self, k: usize) -> Csr {
        let mut rows = Vec::with_capacity(self.free.len() * k);
        for nb in &self.neighbours {
            let cols: Vec<usize> = nb.iter().flat_map(|&g| (0..k).map(move |c| g * k + c)).collect();
            for _ in 0..k {
                rows.push(cols.clone());
            }
        }
        Csr::from_rows(&rows)
    }

    /// Element gradient of component `c` of a node-major field with `k` components.
    #[inline]
    pub fn element_gradient(&self, e: &Element, u: &[f64], k: usize, c: usize) -> [f64; 2] {
        let g = &self.shapes[e.shape];
        let mut out = [0.0; 2];
        for a in 0..self.nv {
            let val = u[e.v[a] * k + c];
            out[0] += val * g[a][0];
            out[1] += val * g[a][1];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_row(mesh: &Mesh, node: usize, probe: &[f64]) -> f64 {
        let mut acc = 0.0;
        for e in &mesh.elems {
            let g = mesh.element_gradient(e, probe, 1, 0);
            for a in 0..mesh.nv {
                if e.v[a] == node {
                    let ga = mesh.shapes[e.shape][a];
                    acc += mesh.area * (g[0] * ga[0] + g[1] * ga[1]);
                }
            }
        }
        acc
    }

    #[test]
    fn stiffness_is_five_point_laplacian() {
        let grid = Grid::new(&[(0.0, 1.0), (0.0, 2.0)], &[9, 9], 0.0, 1.0, 0.5).unwrap();
        let mesh = Mesh::new(&grid, None);
        let c = grid.index([4, 4]);
        let mut e = vec![0.0; grid.num_nodes()];
        e[c] = 1.0;
        let (hx, hy) = (grid.h()[0], grid.h()[1]);
        let diag = laplacian_row(&mesh, c, &e);
        assert!((diag - (2.0 / (hx * hx) + 2.0 / (hy * hy)) * hx * hy).abs() < 1e-10);
        e[c] = 0.0;
        let diag_nb = grid.index([5, 5]);
        e[diag_nb] = 1.0;
        assert!(laplacian_row(&mesh, c, &e).abs() < 1e-12);
        assert!((mesh.mass[c] - hx * hy).abs() < 1e-14);
    }

    #[test]
    fn masked_roles() {
        let grid = Grid::new(&[(0.0, 1.0)], &[11], 0.0, 1.0, 0.5).unwrap();
        let mask: Vec<bool> = (0..11).map(|i| (3..=7).contains(&i)).collect();
        let roles = node_roles(&grid, Some(&mask));
        assert_eq!(roles[2], NodeRole::Outside);
        assert_eq!(roles[3], NodeRole::Dirichlet);
        assert_eq!(roles[5], NodeRole::Free);
        assert_eq!(roles[7], NodeRole::Dirichlet);
    }
}
