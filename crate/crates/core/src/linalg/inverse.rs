use num_complex::Complex64;

use super::{frobenius_norm, ComplexMatrix, ZERO};
use crate::error::{Error, Result};

const INVERSE_ITERATIONS: usize = 4;

/// LU factorization with partial pivoting; `None` on an exactly zero pivot.
fn lu_factor(mut a: ComplexMatrix) -> Option<(ComplexMatrix, Vec<usize>)> {
    let n = a.dim();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (piv, best) = (k..n)
            .map(|i| (i, a[(i, k)].norm()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == 0.0 {
            return None;
        }
        if piv != k {
            for j in 0..n {
                let t = a[(k, j)];
                a[(k, j)] = a[(piv, j)];
                a[(piv, j)] = t;
            }
            perm.swap(k, piv);
        }
        let pivot = a[(k, k)];
        for i in k + 1..n {
            let f = a[(i, k)] / pivot;
            a[(i, k)] = f;
            if f == ZERO {
                continue;
            }
            for j in k + 1..n {
                let akj = a[(k, j)];
                a[(i, j)] -= f * akj;
            }
        }
    }
    Some((a, perm))
}

fn lu_solve(lu: &ComplexMatrix, perm: &[usize], b: &[Complex64]) -> Vec<Complex64> {
    let n = lu.dim();
    let mut x: Vec<Complex64> = perm.iter().map(|&p| b[p]).collect();
    for i in 0..n {
        for j in 0..i {
            let t = lu[(i, j)] * x[j];
            x[i] -= t;
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            let t = lu[(i, j)] * x[j];
            x[i] -= t;
        }
        x[i] /= lu[(i, i)];
    }
    x
}

fn normalize(v: &mut [Complex64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|z| *z /= norm);
    }
}

/// Recovers an eigenvector for `eigenvalue` by shifted inverse iteration and
/// returns ‖Av − λv‖₂ / ‖A‖_F.
///
/// An exactly singular shift is moved by 1e-12·‖A‖_F once; if that is still
/// singular the result is [`Error::SingularShift`].
pub fn inverse_iteration_residual(a: &ComplexMatrix, eigenvalue: Complex64) -> Result<f64> {
    let n = a.dim();
    let norm = frobenius_norm(a);
    if norm == 0.0 {
        return Ok(0.0);
    }
    let factor = |shift: Complex64| lu_factor(a.shifted(-shift));
    let (lu, perm) = factor(eigenvalue)
        .or_else(|| factor(eigenvalue + Complex64::new(1e-12 * norm, 0.0)))
        .ok_or(Error::SingularShift)?;

    let mut v: Vec<Complex64> = (0..n)
        .map(|j| Complex64::new(1.0, 0.5 / (j as f64 + 1.0)))
        .collect();
    normalize(&mut v);
    for _ in 0..INVERSE_ITERATIONS {
        v = lu_solve(&lu, &perm, &v);
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::SingularShift);
        }
        normalize(&mut v);
    }
    let av = a.matvec(&v);
    let residual = av
        .iter()
        .zip(&v)
        .map(|(x, y)| (x - eigenvalue * y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(residual / norm)
}
