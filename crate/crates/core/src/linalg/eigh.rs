//! Hermitian eigendecomposition.
//!
//! Householder reduction to a Hermitian tridiagonal matrix, a diagonal phase
//! change that makes the off-diagonal real, then implicit QL iterations on the
//! real symmetric tridiagonal (the EISPACK `tql2` scheme).

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{Matrix, C64};
use crate::error::{Error, Result};

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl Eigh {
    /// `V f(Λ) V†`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        let mut out = Matrix::zeros(n, n);
        for k in 0..n {
            if fv[k] == 0.0 {
                continue;
            }
            for i in 0..n {
                let a = v[(i, k)] * fv[k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Matrix {
        self.reconstruct_with(|l| l)
    }

    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

const MAX_QL_SWEEPS: usize = 60;

/// Eigendecomposition of a Hermitian matrix. Only the lower triangle is read
/// after symmetrization, so tiny Hermiticity defects are tolerated.
pub fn eigh(a: &Matrix) -> Result<Eigh> {
    if !a.is_square() {
        return Err(Error::Domain(alloc::format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Eigh { values: Vec::new(), vectors: Matrix::zeros(0, 0) });
    }
    let mut h = a.hermitian_part();
    let mut q = Matrix::identity(n);

    // Householder: zero column k below the subdiagonal.
    let mut p = vec![C64::new(0.0, 0.0); n];
    for k in 0..n.saturating_sub(2) {
        let norm_x = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
        let alpha = -phase * norm_x;
        let mut v = vec![C64::new(0.0, 0.0); n];
        for i in k + 1..n {
            v[i] = h[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H ← (I - 2vv†) H (I - 2vv†) = H - 2 v p† - 2 p v† + 4 (v†p) v v†, p = H v
        for i in 0..n {
            p[i] = (k + 1..n).map(|j| h[(i, j)] * v[j]).sum();
        }
        let vhp: f64 = (k + 1..n).map(|i| (v[i].conj() * p[i]).re).sum();
        for i in 0..n {
            for j in 0..n {
                let upd = v[i] * p[j].conj() * 2.0 + p[i] * v[j].conj() * 2.0
                    - v[i] * v[j].conj() * (4.0 * vhp);
                h[(i, j)] -= upd;
            }
        }
        // Q ← Q (I - 2vv†)
        for i in 0..n {
            let qv: C64 = (k + 1..n).map(|j| q[(i, j)] * v[j]).sum();
            for j in k + 1..n {
                q[(i, j)] -= qv * v[j].conj() * 2.0;
            }
        }
    }

    // Phase change D so that D† T D has a real, nonnegative subdiagonal.
    let mut diag = vec![0.0f64; n];
    let mut sub = vec![0.0f64; n];
    let mut phases = vec![C64::new(1.0, 0.0); n];
    for i in 0..n {
        diag[i] = h[(i, i)].re;
    }
    for i in 0..n - 1 {
        let e = h[(i + 1, i)];
        let mag = e.norm();
        sub[i] = mag;
        let ph = if mag > 0.0 { e / mag } else { C64::new(1.0, 0.0) };
        phases[i + 1] = phases[i] * ph;
    }
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] *= phases[j];
        }
    }

    let z = tql2(&mut diag, &mut sub)?;

    // eigenvectors = Q · Z with Z real
    let mut vectors = Matrix::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            let qik = q[(i, k)];
            if qik.re == 0.0 && qik.im == 0.0 {
                continue;
            }
            for j in 0..n {
                vectors[(i, j)] += qik * z[k * n + j];
            }
        }
    }
    Ok(Eigh { values: diag, vectors })
}

/// Implicit QL on the symmetric tridiagonal (`d` diagonal, `e[i] = T[i+1,i]`).
/// Returns the row-major orthogonal eigenvector matrix; `d` ends up sorted.
fn tql2(d: &mut [f64], e: &mut [f64]) -> Result<Vec<f64>> {
    let n = d.len();
    let mut v = vec![0.0f64; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(Error::Numeric(alloc::format!(
                        "QL iteration did not converge for eigenvalue {l}"
                    )));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[k * n + i + 1];
                        v[k * n + i + 1] = s * v[k * n + i] + c * h;
                        v[k * n + i] = c * v[k * n + i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for j in 0..n {
                v.swap(j * n + i, j * n + k);
            }
        }
    }
    Ok(v)
}
