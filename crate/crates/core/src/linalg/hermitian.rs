//! Hermitian eigenvalues: Householder tridiagonalization followed by implicit
//! QL on the real symmetric tridiagonal core.

use super::qr::phase;
use super::{ComplexMatrix, Spectrum, ZERO};
use crate::error::{Error, Result};
use crate::operators::hermiticity_defect;
use num_complex::Complex64;

/// Largest hermiticity defect accepted by [`eig_hermitian`].
pub const HERMITIAN_PRECONDITION: f64 = 1e-10;

const MAX_QL_ITERATIONS: usize = 30;

/// Reduces a Hermitian matrix to real symmetric tridiagonal form.
///
/// Returns the diagonal and the (nonnegative) subdiagonal. Only the lower
/// triangle and diagonal of `a` are trusted; the result is unitarily similar to
/// the Hermitian matrix they define.
pub fn tridiagonalize(a: &ComplexMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.dim();
    let mut h = a.clone();
    // mirror the lower triangle so the working copy is exactly Hermitian
    for i in 0..n {
        h[(i, i)] = Complex64::new(h[(i, i)].re, 0.0);
        for j in 0..i {
            h[(j, i)] = h[(i, j)].conj();
        }
    }
    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let tail: f64 = (k + 2..n).map(|i| h[(i, k)].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let xnorm = (x0.norm_sqr() + tail).sqrt();
        let alpha = -phase(x0) * xnorm;
        let m = n - k - 1;
        let off = k + 1;
        let v = &mut v[..m];
        let p = &mut p[..m];
        v[0] = x0 - alpha;
        for i in 1..m {
            v[i] = h[(off + i, k)];
        }
        let tau = 2.0 / v.iter().map(|z| z.norm_sqr()).sum::<f64>();

        // p = tau * A22 * v
        for (i, pi) in p.iter_mut().enumerate() {
            let row = &h.row(off + i)[off..];
            let mut s = ZERO;
            for (aij, vj) in row.iter().zip(v.iter()) {
                s += aij * vj;
            }
            *pi = s * tau;
        }
        // w = p - (tau/2)(v^H p) v, with v^H p real
        let vhp: Complex64 = v.iter().zip(p.iter()).map(|(vi, pi)| vi.conj() * pi).sum();
        let kappa = 0.5 * tau * vhp.re;
        for i in 0..m {
            p[i] -= v[i] * kappa;
        }
        // A22 -= v w^H + w v^H
        for i in 0..m {
            let (vi, wi) = (v[i], p[i]);
            let row_start = (off + i) * n + off;
            for j in 0..m {
                h.data[row_start + j] -= vi * p[j].conj() + wi * v[j].conj();
            }
        }
        h[(off, k)] = alpha;
        h[(k, off)] = alpha.conj();
        for i in k + 2..n {
            h[(i, k)] = ZERO;
            h[(k, i)] = ZERO;
        }
    }
    let d = (0..n).map(|i| h[(i, i)].re).collect();
    // a diagonal phase similarity makes every subdiagonal real and nonnegative
    let e = (0..n.saturating_sub(1))
        .map(|i| h[(i + 1, i)].norm())
        .collect();
    (d, e)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix; eigenvalues only.
///
/// Returns whether every eigenvalue converged within the per-eigenvalue budget
/// and the total iteration count.
fn tridiagonal_ql(d: &mut [f64], sub: &[f64], tol: f64) -> (bool, usize) {
    let n = d.len();
    let mut e = vec![0.0; n];
    e[..sub.len()].copy_from_slice(sub);
    let mut converged = true;
    let mut total = 0usize;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= tol * dd || e[m].abs() <= f64::MIN_POSITIVE {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if iter == MAX_QL_ITERATIONS {
                converged = false;
                break;
            }
            iter += 1;
            total += 1;
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    (converged, total)
}

/// Eigenvalues of a Hermitian matrix, real-typed and ascending.
pub fn eig_hermitian(a: &ComplexMatrix, tol: f64) -> Result<Spectrum> {
    if !(tol > 0.0 && tol <= 1e-4) {
        return Err(Error::InvalidSolverArgument(format!(
            "tol must lie in (0, 1e-4], got {tol}"
        )));
    }
    if !a.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    let defect = hermiticity_defect(a);
    if defect > HERMITIAN_PRECONDITION {
        return Err(Error::NotHermitian {
            defect,
            limit: HERMITIAN_PRECONDITION,
        });
    }
    let (mut d, e) = tridiagonalize(a);
    let (converged, iterations) = tridiagonal_ql(&mut d, &e, tol);
    d.sort_by(f64::total_cmp);
    let eig = d.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
    Ok(Spectrum::assemble(a, eig, converged, iterations))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::{adjoint, DEFAULT_TOL};
    use super::*;

    fn real_eigs(a: &ComplexMatrix) -> Vec<f64> {
        eig_hermitian(a, DEFAULT_TOL)
            .unwrap()
            .eigenvalues
            .iter()
            .map(|z| z.re)
            .collect()
    }

    #[test]
    fn diagonal() {
        assert_eq!(
            real_eigs(&ComplexMatrix::from_real_diag(&[3.0, 1.0, 2.0])),
            vec![1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn two_by_two() {
        let a = ComplexMatrix::from_rows(&[vec![(2., 0.), (1., 0.)], vec![(1., 0.), (2., 0.)]])
            .unwrap();
        let e = real_eigs(&a);
        assert!((e[0] - 1.0).abs() < 1e-15 && (e[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn complex_off_diagonal() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2
        let a = ComplexMatrix::from_rows(&[vec![(1., 0.), (0., 1.)], vec![(0., -1.), (1., 0.)]])
            .unwrap();
        let e = real_eigs(&a);
        assert!(e[0].abs() < 1e-15 && (e[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = ComplexMatrix::from_rows(&[vec![(0., 0.), (1., 0.)], vec![(0., 0.), (0., 0.)]])
            .unwrap();
        assert!(matches!(
            eig_hermitian(&a, DEFAULT_TOL),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn output_is_sorted_real_and_traces_match() {
        for seed in 0..5 {
            let mut r = rng(300 + seed);
            let a = random_matrix(&mut r, 60);
            let h = a.add(&adjoint(&a)).unwrap();
            let s = eig_hermitian(&h, DEFAULT_TOL).unwrap();
            assert!(s.converged);
            assert!(s.eigenvalues.iter().all(|z| z.im == 0.0));
            assert!(s.eigenvalues.windows(2).all(|w| w[0].re <= w[1].re));
            assert!(s.trace_defect <= 10.0 * DEFAULT_TOL);
            assert!(s.trace2_defect <= 100.0 * DEFAULT_TOL);
        }
    }

    #[test]
    fn tridiagonal_input_takes_the_cheap_path() {
        // complex Hermitian tridiagonal: same spectrum as its |e| real counterpart
        let n = 300;
        let mut a = ComplexMatrix::zeros(n);
        let mut b = ComplexMatrix::zeros(n);
        for i in 0..n {
            a[(i, i)] = Complex64::new(i as f64 * 0.01, 0.0);
            b[(i, i)] = a[(i, i)];
            if i + 1 < n {
                let z = Complex64::from_polar(1.0 + 0.001 * i as f64, 0.3 * i as f64);
                a[(i + 1, i)] = z;
                a[(i, i + 1)] = z.conj();
                b[(i + 1, i)] = Complex64::new(z.norm(), 0.0);
                b[(i, i + 1)] = Complex64::new(z.norm(), 0.0);
            }
        }
        let ea = real_eigs(&a);
        let eb = real_eigs(&b);
        for (x, y) in ea.iter().zip(&eb) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
