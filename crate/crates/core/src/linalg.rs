//! Small dense linear algebra for regression: Householder QR and a
//! Cholesky solve. Matrices are row-major `Vec<f64>`.

use alloc::vec;
use alloc::vec::Vec;

/// Householder QR of an `rows x cols` matrix (`rows >= cols`).
pub(crate) struct Qr {
    rows: usize,
    cols: usize,
    /// Householder vectors below the diagonal, R on and above it.
    packed: Vec<f64>,
    /// Diagonal of R.
    diag: Vec<f64>,
    /// Euclidean norm of each original column.
    col_norms: Vec<f64>,
}

impl Qr {
    pub(crate) fn new(a: &[f64], rows: usize, cols: usize) -> Self {
        debug_assert!(rows >= cols && a.len() == rows * cols);
        let mut packed = a.to_vec();
        let col_norms = (0..cols)
            .map(|j| libm::sqrt((0..rows).map(|i| a[i * cols + j] * a[i * cols + j]).sum()))
            .collect();
        let mut diag = vec![0.0; cols];
        for k in 0..cols {
            let norm = libm::sqrt((k..rows).map(|i| packed[i * cols + k] * packed[i * cols + k]).sum());
            if norm == 0.0 {
                diag[k] = 0.0;
                continue;
            }
            let alpha = if packed[k * cols + k] > 0.0 { -norm } else { norm };
            // v = x - alpha e1, stored in place, scaled so v_k = x_k - alpha.
            packed[k * cols + k] -= alpha;
            let vnorm2: f64 = (k..rows).map(|i| packed[i * cols + k] * packed[i * cols + k]).sum();
            for j in k + 1..cols {
                let dot: f64 = (k..rows).map(|i| packed[i * cols + k] * packed[i * cols + j]).sum();
                let f = 2.0 * dot / vnorm2;
                for i in k..rows {
                    packed[i * cols + j] -= f * packed[i * cols + k];
                }
            }
            diag[k] = alpha;
        }
        Qr {
            rows,
            cols,
            packed,
            diag,
            col_norms,
        }
    }

    /// First column whose R diagonal is negligible against its own norm.
    pub(crate) fn deficient_column(&self, rel_tol: f64) -> Option<usize> {
        (0..self.cols).find(|&k| libm::fabs(self.diag[k]) <= rel_tol * self.col_norms[k].max(f64::MIN_POSITIVE))
    }

    /// Applies Q^T to `y` in place.
    pub(crate) fn apply_qt(&self, y: &mut [f64]) {
        let (rows, cols) = (self.rows, self.cols);
        for k in 0..cols {
            if self.diag[k] == 0.0 {
                continue;
            }
            let vnorm2: f64 = (k..rows).map(|i| self.packed[i * cols + k] * self.packed[i * cols + k]).sum();
            let dot: f64 = (k..rows).map(|i| self.packed[i * cols + k] * y[i]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..rows {
                y[i] -= f * self.packed[i * cols + k];
            }
        }
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else {
            self.packed[i * self.cols + j]
        }
    }

    /// Solves `R x = b` for the leading `cols` entries of `b`.
    pub(crate) fn solve_r(&self, b: &[f64]) -> Vec<f64> {
        let n = self.cols;
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.r(i, j) * x[j]).sum();
            x[i] = (b[i] - s) / self.r(i, i);
        }
        x
    }

    /// `(R^T R)^{-1} = R^{-1} R^{-T}`, i.e. `(X^T X)^{-1}`.
    pub(crate) fn xtx_inverse(&self) -> Vec<f64> {
        let n = self.cols;
        // Columns of R^{-1} by back substitution on unit vectors.
        let mut rinv = vec![0.0; n * n];
        for c in 0..n {
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            let col = self.solve_r(&e);
            for r in 0..n {
                rinv[r * n + c] = col[r];
            }
        }
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..n).map(|k| rinv[i * n + k] * rinv[j * n + k]).sum();
                out[i * n + j] = s;
                out[j * n + i] = s;
            }
        }
        out
    }
}

/// Solves `A x = b` for symmetric positive-definite `A` (`n x n`).
/// Returns `None` when a pivot is not clearly positive.
pub(crate) fn cholesky_solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let max_diag = (0..n).map(|i| libm::fabs(a[i * n + i])).fold(0.0, f64::max);
    if !(max_diag > 0.0 && max_diag.is_finite()) {
        return None;
    }
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
            if i == j {
                let d = a[i * n + i] - s;
                if d <= 1e-12 * max_diag {
                    return None;
                }
                l[i * n + i] = libm::sqrt(d);
            } else {
                l[i * n + j] = (a[i * n + j] - s) / l[j * n + j];
            }
        }
    }
    let mut z = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * z[k]).sum();
        z[i] = (b[i] - s) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k * n + i] * x[k]).sum();
        x[i] = (z[i] - s) / l[i * n + i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_solves_square_system() {
        let a = [2.0, 1.0, 1.0, 3.0];
        let qr = Qr::new(&a, 2, 2);
        let mut b = [3.0, 5.0];
        qr.apply_qt(&mut b);
        let x = qr.solve_r(&b);
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn qr_flags_dependent_column() {
        let a = [1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
        assert_eq!(Qr::new(&a, 3, 2).deficient_column(1e-10), Some(1));
    }

    #[test]
    fn cholesky_rejects_singular() {
        assert!(cholesky_solve(&[1.0, 1.0, 1.0, 1.0], &[1.0, 1.0], 2).is_none());
        let x = cholesky_solve(&[4.0, 2.0, 2.0, 3.0], &[2.0, 1.0], 2).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15 && x[1].abs() < 1e-15);
    }
}
