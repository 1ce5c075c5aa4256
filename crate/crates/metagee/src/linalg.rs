//! Small dense linear algebra over f64.
//!
//! Sized for frames of low-dimensional immersions (parameter count k ≤ 6,
//! ambient dimension n ≤ 16). Pure Rust, no BLAS; row-major storage.

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from column vectors; all columns must share a length.
    pub fn from_cols(cols: &[Vec<f64>]) -> Self {
        let nc = cols.len();
        let nr = if nc == 0 { 0 } else { cols[0].len() };
        Mat::from_fn(nr, nc, |i, j| cols[j][i])
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[f64]) {
        assert_eq!(v.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        Mat::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|t| self[(i, t)] * other[(t, j)]).sum()
        })
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|t| self[(i, t)] * v[t]).sum())
            .collect()
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| s * self[(i, j)])
    }

    /// Entrywise infinity norm.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Maximum |a_ij - a_ji| over the matrix.
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut m = 0.0f64;
        for i in 0..self.rows {
            for j in 0..i {
                m = m.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        m
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn vsub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vadd(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vscale(s: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| s * x).collect()
}

/// Cholesky factorization of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Mat,
}

impl Cholesky {
    /// Returns `None` when the matrix is not numerically positive definite.
    pub fn new(a: &Mat) -> Option<Cholesky> {
        assert_eq!(a.rows, a.cols);
        let n = a.rows;
        let mut l = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[(i, j)];
                for t in 0..j {
                    s -= l[(i, t)] * l[(j, t)];
                }
                if i == j {
                    if s <= 0.0 {
                        return None;
                    }
                    l[(i, j)] = s.sqrt();
                } else {
                    l[(i, j)] = s / l[(j, j)];
                }
            }
        }
        Some(Cholesky { l })
    }

    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows;
        assert_eq!(b.len(), n);
        // forward substitution L y = b
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for t in 0..i {
                s -= self.l[(i, t)] * y[t];
            }
            y[i] = s / self.l[(i, i)];
        }
        // back substitution Lᵀ x = y
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for t in i + 1..n {
                s -= self.l[(t, i)] * x[t];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    pub fn solve_mat(&self, b: &Mat) -> Mat {
        let mut out = Mat::zeros(b.rows, b.cols);
        for j in 0..b.cols {
            out.set_col(j, &self.solve_vec(&b.col(j)));
        }
        out
    }
}

/// Modified Gram-Schmidt on the columns of `a`; columns must be linearly
/// independent. Returns a matrix with orthonormal columns spanning the same
/// space, or `None` if a column drops below `tol` after projection.
pub fn gram_schmidt(a: &Mat, tol: f64) -> Option<Mat> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(a.cols);
    for j in 0..a.cols {
        let mut v = a.col(j);
        for u in &q {
            let c = dot(&v, u);
            axpy(-c, u, &mut v);
        }
        // second pass for numerical orthogonality
        for u in &q {
            let c = dot(&v, u);
            axpy(-c, u, &mut v);
        }
        let nv = norm(&v);
        if nv < tol {
            return None;
        }
        q.push(vscale(1.0 / nv, &v));
    }
    Some(Mat::from_cols(&q))
}

/// Complete the orthonormal columns of `q` to a full orthonormal basis of
/// ℝⁿ by sweeping canonical axes in index order, skipping near-dependent
/// candidates at `tol`. The result holds only the appended columns.
pub fn complete_basis(q: &Mat, tol: f64) -> Mat {
    let n = q.rows;
    let want = n - q.cols;
    let mut acc: Vec<Vec<f64>> = (0..q.cols).map(|j| q.col(j)).collect();
    let mut extra: Vec<Vec<f64>> = Vec::with_capacity(want);
    for axis in 0..n {
        if extra.len() == want {
            break;
        }
        let mut v = vec![0.0; n];
        v[axis] = 1.0;
        for u in &acc {
            let c = dot(&v, u);
            axpy(-c, u, &mut v);
        }
        for u in &acc {
            let c = dot(&v, u);
            axpy(-c, u, &mut v);
        }
        let nv = norm(&v);
        if nv > tol {
            let unit = vscale(1.0 / nv, &v);
            acc.push(unit.clone());
            extra.push(unit);
        }
    }
    assert_eq!(extra.len(), want, "failed to complete orthonormal basis");
    Mat::from_fn(n, want, |i, j| extra[j][i])
}

/// Smallest eigenvalue of a small symmetric matrix, by cyclic Jacobi sweeps.
pub fn sym_eig_min(a: &Mat) -> f64 {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    if n == 0 {
        return 0.0;
    }
    let mut m = a.clone();
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                off = off.max(m[(i, j)].abs());
            }
        }
        if off < 1e-14 * (1.0 + m.max_abs()) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[(i, i)]).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_spd_system() {
        let a = Mat::from_fn(3, 3, |i, j| if i == j { 4.0 } else { 1.0 });
        let ch = Cholesky::new(&a).unwrap();
        let x = ch.solve_vec(&[1.0, 2.0, 3.0]);
        let b = a.matvec(&x);
        assert!(norm_inf(&vsub(&b, &[1.0, 2.0, 3.0])) < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = Mat::identity(2);
        a[(1, 1)] = -1.0;
        assert!(Cholesky::new(&a).is_none());
    }

    #[test]
    fn gram_schmidt_orthonormalizes() {
        let a = Mat::from_cols(&[vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 1.0]]);
        let q = gram_schmidt(&a, 1e-12).unwrap();
        let g = q.transpose().matmul(&q);
        assert!(g.sub(&Mat::identity(2)).max_abs() < 1e-12);
    }

    #[test]
    fn complete_basis_spans_complement() {
        let a = Mat::from_cols(&[vec![1.0, 1.0, 0.0, 0.0]]);
        let q = gram_schmidt(&a, 1e-12).unwrap();
        let r = complete_basis(&q, 1e-8);
        assert_eq!(r.cols, 3);
        // orthogonal to q and orthonormal among themselves
        assert!(q.transpose().matmul(&r).max_abs() < 1e-12);
        assert!(r.transpose().matmul(&r).sub(&Mat::identity(3)).max_abs() < 1e-12);
    }

    #[test]
    fn jacobi_finds_min_eigenvalue() {
        // eigenvalues of [[2,1],[1,2]] are 1 and 3
        let a = Mat::from_fn(2, 2, |i, j| if i == j { 2.0 } else { 1.0 });
        assert!((sym_eig_min(&a) - 1.0).abs() < 1e-12);
    }
}
