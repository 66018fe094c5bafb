//! Dense eigen-solvers on top of nalgebra's decompositions.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_traits::{Float, Zero};

use crate::{Error, Result, C64};

/// Eigenvalues in ascending order with matching eigenvector columns. Each
/// eigenvector is signed so that its largest-magnitude component is positive.
///
/// nalgebra's QR iteration occasionally returns orthonormal vectors that are
/// not eigenvectors when the off-diagonal part is many orders below the
/// diagonal; such results are redone with cyclic Jacobi.
pub(crate) fn sorted_symmetric_eigen(h: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = h.nrows();
    let scale = h.amax();
    let eig = nalgebra::linalg::SymmetricEigen::new(h.clone());
    let residual = (&h * &eig.eigenvectors
        - &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues))
    .amax();
    let (raw_values, raw_vectors) = if residual <= 1e-11 * scale * (n.max(1) as f64).sqrt() {
        (eig.eigenvalues, eig.eigenvectors)
    } else {
        jacobi_eigen(h)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw_values[a].total_cmp(&raw_values[b]));
    let values = order.iter().map(|&i| raw_values[i]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = raw_vectors.column(src);
        let pivot = col
            .iter()
            .fold(0.0_f64, |m, &x| if x.abs() > m.abs() { x } else { m });
        let s = if pivot < 0.0 { -1.0 } else { 1.0 };
        vectors.column_mut(dst).copy_from(&(col * s));
    }
    (values, vectors)
}

/// Cyclic Jacobi rotations until the off-diagonal part is below rounding.
fn jacobi_eigen(mut a: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut v = DMatrix::<f64>::identity(n, n);
    let floor = f64::EPSILON * a.norm() * 1e-3;
    for _ in 0..100 {
        let mut off = 0.0_f64;
        for q in 1..n {
            for p in 0..q {
                off = off.max(a[(p, q)].abs());
            }
        }
        if off <= floor {
            break;
        }
        for q in 1..n {
            for p in 0..q {
                let apq = a[(p, q)];
                if apq.abs() <= floor {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    (a.diagonal(), v)
}

/// `Aᵀ diag(d) A` for real `A`.
pub(crate) fn congruence(a: &DMatrix<f64>, d: &[f64]) -> DMatrix<f64> {
    let mut scaled = a.clone();
    for (mut row, &w) in scaled.row_iter_mut().zip(d) {
        row *= w;
    }
    a.transpose() * scaled
}

/// Real matrix times complex matrix, using two real products.
pub(crate) fn real_times_complex(a: &DMatrix<f64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let re = a * b.map(|z| z.re);
    let im = a * b.map(|z| z.im);
    DMatrix::from_fn(a.nrows(), b.ncols(), |i, j| {
        C64::new(re[(i, j)], im[(i, j)])
    })
}

/// Right eigenpairs of a general complex matrix. Eigenvectors are normalised
/// to unit Euclidean norm. Fails if the Schur iteration does not converge or
/// the worst residual `|A v - λ v|` exceeds `tol · |A|`.
pub(crate) fn complex_eigen(a: &DMatrix<C64>, tol: f64) -> Result<(Vec<C64>, DMatrix<C64>)> {
    let n = a.nrows();
    let scale = a
        .iter()
        .fold(0.0_f64, |m, z| m.max(z.norm()))
        .max(f64::MIN_POSITIVE);
    let schur =
        nalgebra::linalg::Schur::try_new(a.clone(), 1e-15, 0).ok_or(Error::Eigensolver {
            residual: f64::INFINITY,
        })?;
    let (q, t) = schur.unpack();
    let lambda: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();

    // Back substitution for each eigenvector of the triangular factor.
    let smin = (f64::EPSILON * scale).max(f64::MIN_POSITIVE * 1e10);
    let mut y = DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        let lj = lambda[j];
        y[(j, j)] = C64::new(1.0, 0.0);
        for i in (0..j).rev() {
            let mut acc = C64::zero();
            for k in i + 1..=j {
                acc += t[(i, k)] * y[(k, j)];
            }
            let mut denom = t[(i, i)] - lj;
            if denom.norm() < smin {
                denom = C64::new(smin, 0.0);
            }
            y[(i, j)] = -acc / denom;
        }
        let norm = y.column(j).norm();
        if norm > 1e100 {
            y.column_mut(j).unscale_mut(norm);
        }
    }
    let mut v = q * y;
    for mut col in v.column_iter_mut() {
        let norm = col.norm();
        col.unscale_mut(norm);
    }

    let av = a * &v;
    let mut worst = 0.0_f64;
    for j in 0..n {
        let r = (av.column(j) - v.column(j) * lambda[j]).norm();
        worst = worst.max(r);
    }
    if !(worst <= tol * scale) {
        return Err(Error::Eigensolver { residual: worst });
    }
    Ok((lambda, v))
}

/// Solves `A x = b` by LU with partial pivoting.
pub(crate) fn solve(a: &DMatrix<C64>, b: &DVector<C64>) -> Result<DVector<C64>> {
    let x = a.clone().lu().solve(b).ok_or(Error::Eigensolver {
        residual: f64::INFINITY,
    })?;
    let residual = (a * &x - b).norm();
    if !residual.is_finite() {
        return Err(Error::Eigensolver { residual });
    }
    Ok(x)
}
