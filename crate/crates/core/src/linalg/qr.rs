//! Householder reduction to Hessenberg form and the shifted complex QR
//! iteration on it.

use num_complex::Complex64;

use super::{default_max_sweeps, frobenius_norm, ComplexMatrix, Spectrum, DEFAULT_TOL, ZERO};
use crate::error::{Error, Result};

/// Unitary similarity to upper-Hessenberg form.
///
/// Columns whose entries below the first subdiagonal are already zero are
/// left untouched, so banded input costs O(n²).
pub fn hessenberg_reduce(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    let n = a.dim();
    let mut h = a.clone();
    if n < 3 {
        return Ok(h);
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        let tail: f64 = (k + 2..n).map(|i| h[(i, k)].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let xnorm = (x0.norm_sqr() + tail).sqrt();
        let alpha = -phase(x0) * xnorm;

        let m = n - k - 1;
        let v = &mut v[..m];
        v[0] = x0 - alpha;
        for i in 1..m {
            v[i] = h[(k + 1 + i, k)];
        }
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;

        // left: rows k+1.., columns k+1.. (column k is set explicitly below)
        for j in k + 1..n {
            let mut s = ZERO;
            for i in 0..m {
                s += v[i].conj() * h[(k + 1 + i, j)];
            }
            let s = s * tau;
            for i in 0..m {
                let vi = v[i];
                h[(k + 1 + i, j)] -= vi * s;
            }
        }
        // right: all rows, columns k+1..
        for i in 0..n {
            let row = &mut h.data[i * n + k + 1..(i + 1) * n];
            let mut s = ZERO;
            for (hij, vj) in row.iter().zip(v.iter()) {
                s += hij * vj;
            }
            let s = s * tau;
            for (hij, vj) in row.iter_mut().zip(v.iter()) {
                *hij -= s * vj.conj();
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    Ok(h)
}

/// Unit-modulus phase of `z`, with phase(0) = 1.
pub(crate) fn phase(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        z / r
    }
}

/// Rotation `[[c, s], [-conj(s), c]]` with real `c ≥ 0` mapping `(x, y)` to `(r, 0)`.
#[derive(Clone, Copy)]
struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    fn zeroing(x: Complex64, y: Complex64) -> Self {
        let ax = x.norm();
        let ay = y.norm();
        if ay == 0.0 {
            return Self { c: 1.0, s: ZERO };
        }
        if ax == 0.0 {
            return Self {
                c: 0.0,
                s: phase(y).conj(),
            };
        }
        let r = ax.hypot(ay);
        Self {
            c: ax / r,
            s: (x / ax) * y.conj() / r,
        }
    }

    /// G applied from the left to rows p, p+1 over columns `cols`.
    fn rows(&self, h: &mut ComplexMatrix, p: usize, cols: std::ops::RangeInclusive<usize>) {
        for j in cols {
            let a = h[(p, j)];
            let b = h[(p + 1, j)];
            h[(p, j)] = a * self.c + self.s * b;
            h[(p + 1, j)] = -self.s.conj() * a + b * self.c;
        }
    }

    /// G† applied from the right to columns p, p+1 over rows `rows`.
    fn cols(&self, h: &mut ComplexMatrix, p: usize, rows: std::ops::RangeInclusive<usize>) {
        for i in rows {
            let a = h[(i, p)];
            let b = h[(i, p + 1)];
            h[(i, p)] = a * self.c + b * self.s.conj();
            h[(i, p + 1)] = -a * self.s + b * self.c;
        }
    }
}

/// Eigenvalue of the trailing 2×2 block closest to its last diagonal entry.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let e1 = mid + disc;
    let e2 = mid - disc;
    if (e1 - d).norm() <= (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

/// All eigenvalues of a general complex matrix by single-shift QR with
/// Wilkinson shifts and deflation.
///
/// `converged` is false when `max_sweeps` QR sweeps were spent before every
/// subdiagonal deflated; the eigenvalues then hold the current diagonal.
pub fn eig_general(a: &ComplexMatrix, tol: f64, max_sweeps: usize) -> Result<Spectrum> {
    if !(tol > 0.0 && tol <= 1e-4) {
        return Err(Error::InvalidSolverArgument(format!(
            "tol must lie in (0, 1e-4], got {tol}"
        )));
    }
    if max_sweeps == 0 {
        return Err(Error::InvalidSolverArgument(
            "max_sweeps must be >= 1".into(),
        ));
    }
    let mut h = hessenberg_reduce(a)?;
    let n = h.dim();
    let fallback_scale = frobenius_norm(a);
    let mut eig = vec![ZERO; n];
    let mut sweeps = 0usize;
    let mut since_deflation = 0usize;
    let mut converged = true;
    let mut hi = n - 1;

    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        // locate the bottom of the unreduced block ending at `hi`
        let mut lo = 0;
        for k in (1..=hi).rev() {
            let sub = h[(k, k - 1)].norm();
            let mut scale = h[(k - 1, k - 1)].norm() + h[(k, k)].norm();
            if scale == 0.0 {
                scale = fallback_scale;
            }
            if sub <= tol * scale || sub <= f64::MIN_POSITIVE {
                h[(k, k - 1)] = ZERO;
                lo = k;
                break;
            }
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if sweeps >= max_sweeps {
            converged = false;
            for i in 0..=hi {
                eig[i] = h[(i, i)];
            }
            break;
        }

        let shift = if since_deflation > 0 && since_deflation.is_multiple_of(10) {
            // exceptional shift to break cycles
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        let g = Givens::zeroing(h[(lo, lo)] - shift, h[(lo + 1, lo)]);
        g.rows(&mut h, lo, lo..=hi);
        g.cols(&mut h, lo, lo..=(lo + 2).min(hi));
        for p in lo + 1..hi {
            let g = Givens::zeroing(h[(p, p - 1)], h[(p + 1, p - 1)]);
            g.rows(&mut h, p, p - 1..=hi);
            h[(p + 1, p - 1)] = ZERO;
            g.cols(&mut h, p, lo..=(p + 2).min(hi));
        }
        sweeps += 1;
        since_deflation += 1;
    }

    Ok(Spectrum::assemble(a, eig, converged, sweeps))
}

/// [`eig_general`] with the default tolerance and sweep budget.
pub fn eig_general_default(a: &ComplexMatrix) -> Result<Spectrum> {
    eig_general(a, DEFAULT_TOL, default_max_sweeps(a.dim()))
}
