//! Symmetric tridiagonal eigensolver: QL with implicit shifts.
//!
//! The rotation stream is exposed through a callback so callers can rotate
//! whatever sits in the columns (an identity to get eigenvectors of T itself,
//! or a Krylov basis to get Ritz vectors directly).

use crate::error::{Error, Result};

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` (len n)
/// and subdiagonal `e` (len n-1). On success `d` holds the eigenvalues in
/// ascending order. Every plane rotation is reported as `rot(i, c, s)` acting
/// on column pair (i, i+1):
///
///   z_{i+1} <- s z_i + c z_{i+1},   z_i <- c z_i - s z_{i+1}   (old values)
///
/// and the returned permutation gives, for each sorted position, the column
/// index after all rotations. Applying the rotations to an identity and then
/// permuting its columns reproduces the eigenvectors.
pub fn symmetric_tridiag_eigen(
    d: &mut [f64],
    e_in: &[f64],
    mut rot: impl FnMut(usize, f64, f64),
) -> Result<Vec<usize>> {
    let n = d.len();
    assert_eq!(e_in.len(), n.saturating_sub(1), "subdiagonal length");
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut e = vec![0.0f64; n];
    e[..n - 1].copy_from_slice(e_in);
    let eps = f64::EPSILON;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::EigenFailure("tridiagonal QL stalled".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
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
                rot(i, c, s);
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let sorted: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    d.copy_from_slice(&sorted);
    Ok(order)
}

/// Convenience wrapper returning eigenvalues ascending plus eigenvectors of T
/// as col-major columns.
pub fn eigen_with_vectors(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut z = vec![0.0f64; n * n];
    for i in 0..n {
        z[i + i * n] = 1.0;
    }
    let perm = symmetric_tridiag_eigen(&mut d, off, |i, c, s| {
        for k in 0..n {
            let f = z[k + (i + 1) * n];
            let g = z[k + i * n];
            z[k + (i + 1) * n] = s * g + c * f;
            z[k + i * n] = c * g - s * f;
        }
    })?;
    let mut vectors = vec![0.0f64; n * n];
    for (dst, &src) in perm.iter().enumerate() {
        vectors[dst * n..(dst + 1) * n].copy_from_slice(&z[src * n..(src + 1) * n]);
    }
    Ok((d, vectors))
}
