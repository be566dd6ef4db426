// SPDX-License-Identifier: Apache-2.0

//! Small dense linear algebra: a complex Jacobi eigensolver for 3×3 Hermitian
//! matrices and a pivoted Gaussian-elimination solver for the normal
//! equations used by the fitters.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 methods win when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

pub type Matrix3c = [[Complex64; 3]; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn identity3() -> Matrix3c {
    let mut m = [[ZERO; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    m
}

pub fn matmul3(a: &Matrix3c, b: &Matrix3c) -> Matrix3c {
    let mut c = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn adjoint3(a: &Matrix3c) -> Matrix3c {
    let mut c = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[j][i].conj();
        }
    }
    c
}

/// Frobenius norm.
pub fn frobenius3(a: &Matrix3c) -> f64 {
    a.iter().flat_map(|r| r.iter()).map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest elementwise deviation from Hermiticity, relative to the Frobenius norm.
pub fn hermiticity_deviation(a: &Matrix3c) -> f64 {
    let norm = frobenius3(a);
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in i..3 {
            worst = worst.max((a[i][j] - a[j][i].conj()).norm());
        }
    }
    if norm > 0.0 {
        worst / norm
    } else {
        worst
    }
}

/// Eigen-decomposition of a 3×3 Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns unsorted eigenvalues and the unitary whose columns are
/// the matching eigenvectors.
pub fn jacobi_hermitian3(h: &Matrix3c) -> Result<([f64; 3], Matrix3c)> {
    let dev = hermiticity_deviation(h);
    if dev > 1e-10 {
        return Err(Error::NonHermitianInput { deviation: dev });
    }
    let mut a = *h;
    // symmetrize away rounding noise
    for i in 0..3 {
        a[i][i] = Complex64::new(a[i][i].re, 0.0);
        for j in (i + 1)..3 {
            let avg = (a[i][j] + a[j][i].conj()) * 0.5;
            a[i][j] = avg;
            a[j][i] = avg.conj();
        }
    }
    let mut v = identity3();
    let scale = frobenius3(&a).max(f64::MIN_POSITIVE);

    for _sweep in 0..64 {
        let off: f64 =
            (0..3).flat_map(|i| ((i + 1)..3).map(move |j| (i, j))).map(|(i, j)| a[i][j].norm_sqr()).sum::<f64>().sqrt();
        if off <= 1e-17 * scale {
            break;
        }
        for p in 0..2 {
            for q in (p + 1)..3 {
                let apq = a[p][q];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[p][p].re;
                let aqq = a[q][q].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // rotation = diag-phase (makes a_pq real) followed by a real Givens rotation
                let mut rot = identity3();
                rot[p][p] = Complex64::new(c, 0.0);
                rot[p][q] = Complex64::new(s, 0.0);
                rot[q][p] = -phase.conj() * s;
                rot[q][q] = phase.conj() * c;
                a = matmul3(&adjoint3(&rot), &matmul3(&a, &rot));
                v = matmul3(&v, &rot);
                a[p][q] = ZERO;
                a[q][p] = ZERO;
            }
        }
    }
    Ok(([a[0][0].re, a[1][1].re, a[2][2].re], v))
}

/// Solve `A x = b` for a dense square system (row-major `a`, size n×n) by
/// Gaussian elimination with partial pivoting. Returns `None` when the
/// matrix is numerically singular.
pub fn solve_dense(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))?;
        if m[piv * n + col].abs() <= 1e-14 * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            x.swap(col, piv);
        }
        let d = m[col * n + col];
        for row in (col + 1)..n {
            let f = m[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[row * n + k] -= f * m[col * n + k];
            }
            x[row] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for k in (col + 1)..n {
            acc -= m[col * n + k] * x[k];
        }
        x[col] = acc / m[col * n + col];
    }
    Some(x)
}

/// Dense inverse via column-by-column solves.
pub fn invert_dense(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = solve_dense(a, &e, n)?;
        for i in 0..n {
            inv[i * n + j] = col[i];
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_matrix_is_its_own_decomposition() {
        let mut h = [[ZERO; 3]; 3];
        h[0][0] = c(3.0, 0.0);
        h[1][1] = c(-1.0, 0.0);
        h[2][2] = c(0.5, 0.0);
        let (vals, _) = jacobi_hermitian3(&h).unwrap();
        assert_eq!(vals, [3.0, -1.0, 0.5]);
    }

    #[test]
    fn reconstructs_complex_hermitian() {
        let h = [
            [c(1.0, 0.0), c(0.3, -2.0), c(-0.7, 0.4)],
            [c(0.3, 2.0), c(-2.0, 0.0), c(1.1, 0.9)],
            [c(-0.7, -0.4), c(1.1, -0.9), c(0.25, 0.0)],
        ];
        let (vals, v) = jacobi_hermitian3(&h).unwrap();
        let mut lam = [[ZERO; 3]; 3];
        for i in 0..3 {
            lam[i][i] = c(vals[i], 0.0);
        }
        let rec = matmul3(&v, &matmul3(&lam, &adjoint3(&v)));
        let mut diff = [[ZERO; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                diff[i][j] = rec[i][j] - h[i][j];
            }
        }
        assert!(frobenius3(&diff) < 1e-12 * frobenius3(&h));
        let gram = matmul3(&adjoint3(&v), &v);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i][j] - c(want, 0.0)).norm() < 1e-12);
            }
        }
        // trace preserved
        let tr: f64 = vals.iter().sum();
        assert!((tr - (1.0 - 2.0 + 0.25)).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut h = identity3();
        h[0][1] = c(1.0, 0.0);
        assert!(matches!(jacobi_hermitian3(&h), Err(Error::NonHermitianInput { .. })));
    }

    #[test]
    fn solves_and_inverts() {
        let a = [4.0, 1.0, 2.0, 1.0, 3.0, 0.0, 2.0, 0.0, 5.0];
        let x = solve_dense(&a, &[1.0, 2.0, 3.0], 3).unwrap();
        for i in 0..3 {
            let r: f64 = (0..3).map(|k| a[i * 3 + k] * x[k]).sum();
            assert!((r - [1.0, 2.0, 3.0][i]).abs() < 1e-12);
        }
        let inv = invert_dense(&a, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|k| a[i * 3 + k] * inv[k * 3 + j]).sum();
                assert!((r - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        assert!(solve_dense(&[1.0, 2.0, 2.0, 4.0], &[1.0, 1.0], 2).is_none());
    }
}
