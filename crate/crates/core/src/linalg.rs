//! Small dense linear algebra on row-major `Vec<f64>` storage.

/// In-place Cholesky factorization of a symmetric positive-definite `n × n`
/// matrix. On success the lower triangle holds `L` with `L Lᵀ = A` and the
/// strict upper triangle is zeroed. Returns `false` if a pivot is not
/// strictly positive.
pub fn cholesky_in_place(a: &mut [f64], n: usize) -> bool {
    debug_assert_eq!(a.len(), n * n);
    for i in 0..n {
        for j in 0..=i {
            let (row_i, row_j) = (i * n, j * n);
            let dot = dot(&a[row_i..row_i + j], &a[row_j..row_j + j]);
            let value = a[row_i + j] - dot;
            if i == j {
                if value <= 0.0 || !value.is_finite() {
                    return false;
                }
                a[row_i + i] = value.sqrt();
            } else {
                a[row_i + j] = value / a[row_j + j];
            }
        }
        for j in i + 1..n {
            a[i * n + j] = 0.0;
        }
    }
    true
}

/// Solves `L x = b` in place for lower-triangular row-major `L`.
pub fn solve_lower_in_place(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let row = &l[i * n..i * n + i];
        let s = dot(row, &b[..i]);
        b[i] = (b[i] - s) / l[i * n + i];
    }
}

/// Solves `Lᵀ x = b` in place for lower-triangular row-major `L`.
pub fn solve_upper_transposed_in_place(l: &[f64], n: usize, b: &mut [f64]) {
    for i in (0..n).rev() {
        b[i] /= l[i * n + i];
        let bi = b[i];
        for (k, bk) in b.iter_mut().enumerate().take(i) {
            *bk -= l[i * n + k] * bi;
        }
    }
}

/// Four-way unrolled dot product; keeps the summation order fixed so
/// results are reproducible across platforms.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let k = c * 4;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut tail = 0.0;
    for k in chunks * 4..n {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `b - a·x` with error-free products and sums,
/// accurate to about twice the working precision.
pub fn residual_compensated(b: f64, a: &[f64], x: &[f64]) -> f64 {
    let (mut s, mut c) = (b, 0.0);
    for (ai, xi) in a.iter().zip(x) {
        let p = -ai * xi;
        let pe = (-ai).mul_add(*xi, -p);
        let t = s + p;
        let z = t - s;
        c += (s - (t - z)) + (p - z) + pe;
        s = t;
    }
    s + c
}

/// Gaussian elimination with partial pivoting for a square system.
/// Returns `None` when the matrix is numerically singular.
pub fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[pivot * n + col].abs() <= 1e-13 * scale {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        for row in col + 1..n {
            let factor = a[row * n + col] / a[col * n + col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row * n + k] * b[k]).sum();
        b[row] = (b[row] - s) / a[row * n + row];
    }
    b.iter().all(|v| v.is_finite()).then_some(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_reconstructs() {
        let a = vec![4.0, 2.0, 0.4, 2.0, 5.0, 1.0, 0.4, 1.0, 3.0];
        let mut l = a.clone();
        assert!(cholesky_in_place(&mut l, 3));
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| l[i * 3 + k] * l[j * 3 + k]).sum();
                assert!((v - a[i * 3 + j]).abs() < 1e-12);
            }
        }
        let mut b = vec![1.0, 2.0, 3.0];
        solve_lower_in_place(&l, 3, &mut b);
        solve_upper_transposed_in_place(&l, 3, &mut b);
        for i in 0..3 {
            let v: f64 = (0..3).map(|k| a[i * 3 + k] * b[k]).sum();
            assert!((v - [1.0, 2.0, 3.0][i]).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = vec![1.0, 2.0, 2.0, 1.0];
        assert!(!cholesky_in_place(&mut a, 2));
        let mut singular = vec![1.0, 1.0, 1.0, 1.0];
        assert!(!cholesky_in_place(&mut singular, 2));
    }

    #[test]
    fn dense_solve() {
        let a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 2.0, 0.0, 3.0];
        let x = solve_dense(a.clone(), vec![5.0, 3.0, 8.0]).unwrap();
        for i in 0..3 {
            let v: f64 = (0..3).map(|k| a[i * 3 + k] * x[k]).sum();
            assert!((v - [5.0, 3.0, 8.0][i]).abs() < 1e-12);
        }
        assert!(solve_dense(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 2.0]).is_none());
    }
}
