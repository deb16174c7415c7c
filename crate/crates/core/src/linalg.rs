//! Dense helpers: rational and floating null spaces, Gram-Schmidt,
//! determinants and small solves. Matrices are row-major `Vec`s.

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Signed, Zero};

use crate::scalar::{q_to_f64, Q};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `m` is `rows × cols`, row-major.
pub fn mat_vec(m: &[f64], cols: usize, x: &[f64]) -> Vec<f64> {
    m.chunks(cols).map(|row| dot(row, x)).collect()
}

pub fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

pub fn transpose(m: &[f64], n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = m[i * n + j];
        }
    }
    t
}

pub fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

pub fn det(m: &[f64], n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    DMatrix::from_row_slice(n, n, m).determinant()
}

/// Solves `m x = rhs`; `None` when LU finds the matrix singular.
pub fn solve(m: &[f64], n: usize, rhs: &[f64]) -> Option<Vec<f64>> {
    if n == 0 {
        return Some(Vec::new());
    }
    let lu = DMatrix::from_row_slice(n, n, m).lu();
    lu.solve(&DVector::from_column_slice(rhs))
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .map(|x| x.iter().copied().collect())
}

pub fn max_abs(m: &[f64]) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Null space of the `rows` (each of length `ncols`) over ℚ, one basis vector
/// per free column in increasing column order.
pub fn kernel_rational(rows: &[Vec<Q>], ncols: usize) -> Vec<Vec<Q>> {
    let mut a: Vec<Vec<Q>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = Q::one() / &a[r][c];
        for v in a[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..ncols {
                    let delta = &f * &a[r][j];
                    a[i][j] = &a[i][j] - delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == a.len() {
            break;
        }
    }
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Q::zero(); ncols];
            v[free] = Q::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][free].clone();
            }
            v
        })
        .collect()
}

/// Floating null space by Gauss-Jordan elimination with partial pivoting.
pub fn kernel_float(rows: &[Vec<f64>], ncols: usize, tol: f64) -> Vec<Vec<f64>> {
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == a.len() {
            break;
        }
        let (p, best) = (r..a.len())
            .map(|i| (i, a[i][c].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= tol {
            continue;
        }
        a.swap(r, p);
        let inv = 1.0 / a[r][c];
        for v in a[r].iter_mut() {
            *v *= inv;
        }
        for i in 0..a.len() {
            if i != r {
                let f = a[i][c];
                if f != 0.0 {
                    for j in 0..ncols {
                        a[i][j] -= f * a[r][j];
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![0.0; ncols];
            v[free] = 1.0;
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][free];
            }
            v
        })
        .collect()
}

/// Orthogonalizes without normalizing, so the result stays rational.
pub fn gram_schmidt_rational(vs: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let mut out: Vec<Vec<Q>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for u in &out {
            let uu = qdot(u, u);
            let coeff = qdot(&w, u) / uu;
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi = &*wi - &coeff * ui;
            }
        }
        if w.iter().any(|x| !x.is_zero()) {
            out.push(w);
        }
    }
    out
}

pub fn gram_schmidt_float(vs: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        // Two passes keep the basis orthonormal to working precision.
        for _ in 0..2 {
            for u in &out {
                let c = dot(&w, u);
                for (wi, ui) in w.iter_mut().zip(u) {
                    *wi -= c * ui;
                }
            }
        }
        let n = norm(&w);
        if n > tol {
            out.push(w.iter().map(|x| x / n).collect());
        }
    }
    out
}

pub fn qdot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

pub fn q_vec_to_f64(v: &[Q]) -> Vec<f64> {
    v.iter().map(q_to_f64).collect()
}

pub fn q_max_abs(v: &[Q]) -> Q {
    v.iter().fold(Q::zero(), |acc, x| if x.abs() > acc { x.abs() } else { acc })
}
