//! Small dense linear algebra on flat row-major slices.
//!
//! The state dimension is tiny (1-3 in every built-in model), so everything
//! here operates on `&[f64]` buffers without allocating.

/// In-place Cholesky of a symmetric `n x n` matrix (row-major). On success the
/// lower triangle holds `L` with `A = L L^T`; the strict upper triangle is
/// zeroed. Returns `false` if a pivot is not strictly positive.
pub fn chol_lower(n: usize, a: &mut [f64]) -> bool {
    debug_assert_eq!(a.len(), n * n);
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let l_jj = d.sqrt();
        a[j * n + j] = l_jj;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / l_jj;
        }
        for i in 0..j {
            a[i * n + j] = 0.0;
        }
    }
    true
}

/// Solve `L y = b` in place, `L` lower triangular.
pub fn solve_lower(n: usize, l: &[f64], x: &mut [f64]) {
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[i * n + k] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
}

/// Solve `L^T x = y` in place, `L` lower triangular.
pub fn solve_lower_t(n: usize, l: &[f64], x: &mut [f64]) {
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
}

/// `out = A x` for a row-major `n x n` matrix.
pub fn mat_vec(n: usize, a: &[f64], x: &[f64], out: &mut [f64]) {
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        out[i] = dot(row, x);
    }
}

/// `out = A^T x`.
pub fn mat_t_vec(n: usize, a: &[f64], x: &[f64], out: &mut [f64]) {
    for i in 0..n {
        out[i] = 0.0;
    }
    for k in 0..n {
        let xk = x[k];
        let row = &a[k * n..(k + 1) * n];
        for i in 0..n {
            out[i] += row[i] * xk;
        }
    }
}

/// `C = A B` for row-major `n x n` matrices.
pub fn mat_mul(n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += a[i * n + k] * b[k * n + j];
            }
            c[i * n + j] = s;
        }
    }
}

/// `C -= A A^T`.
pub fn sub_aat(n: usize, a: &[f64], c: &mut [f64]) {
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += a[i * n + k] * a[j * n + k];
            }
            c[i * n + j] -= s;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, &x| m.max(x.abs()))
}

/// `y += alpha * x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Stable `log(exp(a) + exp(b))`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}
