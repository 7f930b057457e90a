//! Compressed sparse rows and preconditioned conjugate gradients.

/// Square sparse matrix in CSR layout with a fixed sparsity pattern.
#[derive(Clone, Debug)]
pub struct Csr {
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl Csr {
    /// Builds the pattern from per-row sorted, deduplicated column lists.
    pub fn from_rows(rows: &[Vec<usize>]) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let mut col = Vec::new();
        for r in rows {
            col.extend_from_slice(r);
            row_ptr.push(col.len());
        }
        let val = vec![0.0; col.len()];
        Csr { row_ptr, col, val }
    }

    pub fn n(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn clear(&mut self) {
        self.val.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Position of `(row, col)` in `val`, if the entry is in the pattern.
    pub fn slot(&self, row: usize, col: usize) -> Option<usize> {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        self.col[lo..hi].binary_search(&col).ok().map(|p| lo + p)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for s in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.val[s] * x[self.col[s]];
            }
            *yr = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|r| self.slot(r, r).map_or(0.0, |s| self.val[s])).collect()
    }
}

/// Outcome of [`cg`].
#[derive(Clone, Copy, Debug)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioner for [`cg`].
#[derive(Clone, Debug)]
pub enum Preconditioner {
    Jacobi(Vec<f64>),
    /// Zero fill-in incomplete Cholesky factor `L`, stored by rows on the
    /// lower-triangular part of the matrix pattern.
    IncompleteCholesky { row_ptr: Vec<usize>, col: Vec<usize>, val: Vec<f64> },
}

impl Preconditioner {
    pub fn jacobi(a: &Csr) -> Self {
        Preconditioner::Jacobi(a.diagonal().iter().map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 }).collect())
    }

    /// IC(0) of `a`, or `None` when a pivot is not positive.
    pub fn incomplete_cholesky(a: &Csr) -> Option<Self> {
        let n = a.n();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        row_ptr.push(0);
        for r in 0..n {
            for s in a.row_ptr[r]..a.row_ptr[r + 1] {
                if a.col[s] <= r {
                    col.push(a.col[s]);
                    val.push(a.val[s]);
                }
            }
            row_ptr.push(col.len());
        }
        for i in 0..n {
            let (ri0, ri1) = (row_ptr[i], row_ptr[i + 1]);
            for s in ri0..ri1 {
                let k = col[s];
                // sum over j < k present in both rows i and k
                let (rk0, rk1) = (row_ptr[k], row_ptr[k + 1]);
                let mut acc = 0.0;
                let (mut x, mut y) = (ri0, rk0);
                while x < s && y < rk1 {
                    let (cx, cy) = (col[x], col[y]);
                    if cx >= k || cy >= k {
                        break;
                    }
                    if cx == cy {
                        acc += val[x] * val[y];
                        x += 1;
                        y += 1;
                    } else if cx < cy {
                        x += 1;
                    } else {
                        y += 1;
                    }
                }
                if k < i {
                    let diag_k = val[rk1 - 1];
                    val[s] = (val[s] - acc) / diag_k;
                } else {
                    let d = val[s] - acc;
                    if !(d > 0.0) {
                        return None;
                    }
                    val[s] = d.sqrt();
                }
            }
        }
        Some(Preconditioner::IncompleteCholesky { row_ptr, col, val })
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self {
            Preconditioner::Jacobi(d) => {
                for i in 0..r.len() {
                    z[i] = r[i] * d[i];
                }
            }
            Preconditioner::IncompleteCholesky { row_ptr, col, val } => {
                let n = r.len();
                for i in 0..n {
                    let mut acc = r[i];
                    let end = row_ptr[i + 1] - 1;
                    for s in row_ptr[i]..end {
                        acc -= val[s] * z[col[s]];
                    }
                    z[i] = acc / val[end];
                }
                for i in (0..n).rev() {
                    let end = row_ptr[i + 1] - 1;
                    z[i] /= val[end];
                    let zi = z[i];
                    for s in row_ptr[i]..end {
                        z[col[s]] -= val[s] * zi;
                    }
                }
            }
        }
    }
}

/// Solves `A x = b` for symmetric positive definite `A`, starting from `x`.
pub fn cg(a: &Csr, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize) -> CgStats {
    pcg(a, &Preconditioner::jacobi(a), b, x, rel_tol, max_iter)
}

/// Preconditioned conjugate gradient.
pub fn pcg(a: &Csr, m: &Preconditioner, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize) -> CgStats {
    let n = a.n();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return CgStats { iterations: 0, relative_residual: 0.0, converged: true };
    }
    let mut r = vec![0.0; n];
    a.matvec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z = vec![0.0; n];
    m.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut res = dot(&r, &r).sqrt() / b_norm;
    for it in 0..max_iter {
        if res <= rel_tol {
            return CgStats { iterations: it, relative_residual: res, converged: true };
        }
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return CgStats { iterations: it, relative_residual: res, converged: false };
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = dot(&r, &r).sqrt() / b_norm;
        m.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgStats { iterations: max_iter, relative_residual: res, converged: res <= rel_tol }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal() {
        let n = 50;
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut r = vec![i];
                if i > 0 {
                    r.insert(0, i - 1);
                }
                if i + 1 < n {
                    r.push(i + 1);
                }
                r
            })
            .collect();
        let mut a = Csr::from_rows(&rows);
        for i in 0..n {
            let s = a.slot(i, i).unwrap();
            a.val[s] = 3.0;
            if i > 0 {
                let s = a.slot(i, i - 1).unwrap();
                a.val[s] = -1.0;
            }
            if i + 1 < n {
                let s = a.slot(i, i + 1).unwrap();
                a.val[s] = -1.0;
            }
        }
        let exact: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = vec![0.0; n];
        a.matvec(&exact, &mut b);
        let mut x = vec![0.0; n];
        let st = cg(&a, &b, &mut x, 1e-14, 500);
        assert!(st.converged);
        for i in 0..n {
            assert!((x[i] - exact[i]).abs() < 1e-12);
        }
        // IC(0) of a tridiagonal matrix is its exact Cholesky factor.
        let ic = Preconditioner::incomplete_cholesky(&a).unwrap();
        let mut y = vec![0.0; n];
        let st = pcg(&a, &ic, &b, &mut y, 1e-14, 500);
        assert!(st.iterations <= 2);
        for i in 0..n {
            assert!((y[i] - exact[i]).abs() < 1e-12);
        }
    }
}
