use alloc::vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{Matrix, C64};

/// Householder QR of a square matrix: `a = q · r` with `q` unitary and `r`
/// upper triangular. The diagonal of `r` is not normalized to be positive.
pub fn qr(a: &Matrix) -> (Matrix, Matrix) {
    assert!(a.is_square(), "qr expects a square matrix");
    let n = a.rows();
    let mut r = a.clone();
    let mut q = Matrix::identity(n);
    for k in 0..n.saturating_sub(1) {
        let norm_x = (k..n).map(|i| r[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
        let mut v = vec![C64::new(0.0, 0.0); n];
        for i in k..n {
            v[i] = r[(i, k)];
        }
        v[k] += phase * norm_x;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // r ← (I - 2vv†) r
        for j in 0..n {
            let s: C64 = (k..n).map(|i| v[i].conj() * r[(i, j)]).sum();
            for i in k..n {
                r[(i, j)] -= v[i] * s * 2.0;
            }
        }
        // q ← q (I - 2vv†)
        for i in 0..n {
            let s: C64 = (k..n).map(|j| q[(i, j)] * v[j]).sum();
            for j in k..n {
                q[(i, j)] -= s * v[j].conj() * 2.0;
            }
        }
    }
    for i in 1..n {
        for j in 0..i {
            r[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    (q, r)
}
