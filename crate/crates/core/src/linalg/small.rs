//! Small dense complex helpers for comparing eigenvector clusters: cross Gram
//! matrices, SVD by way of the Hermitian eigenproblem, principal angles, and
//! unitary (Procrustes) alignment.
//!
//! Everything here targets cluster dimensions of a handful, so the quadratic
//! conditioning of forming G^H G is irrelevant.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::dense;

/// Cross Gram matrix `G[a + b*k] = w * <u_a, v_b>` (conjugation on `u`).
pub fn cross_gram(u: &[Vec<C64>], v: &[Vec<C64>], w: f64) -> Vec<C64> {
    let k = u.len();
    let kv = v.len();
    let mut g = vec![C64::new(0.0, 0.0); k * kv];
    for (b, vb) in v.iter().enumerate() {
        for (a, ua) in u.iter().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for (x, y) in ua.iter().zip(vb) {
                s += x.conj() * y;
            }
            g[a + b * k] = s * w;
        }
    }
    g
}

/// Singular values of a square complex matrix, descending, via the Hermitian
/// eigenproblem of `G^H G`. Well-defined for singular input.
pub fn singular_values(g: &[C64], k: usize) -> Result<Vec<f64>> {
    let (mut evals, _) = dense::hermitian_eigen(&gram_of(g, k), k)?;
    evals.reverse();
    Ok(evals.into_iter().map(|l| l.max(0.0).sqrt()).collect())
}

fn gram_of(g: &[C64], k: usize) -> Vec<C64> {
    assert_eq!(g.len(), k * k);
    let mut gram = vec![C64::new(0.0, 0.0); k * k];
    for a in 0..k {
        for b in 0..k {
            let mut s = C64::new(0.0, 0.0);
            for i in 0..k {
                s += g[i + a * k].conj() * g[i + b * k];
            }
            gram[a + b * k] = s;
        }
    }
    gram
}

/// SVD of a square complex matrix `g` (col-major, k x k):
/// `g = U diag(sigma) V^H`, singular values descending. Fails on numerically
/// singular input (no left vectors to recover there).
pub fn svd_square(g: &[C64], k: usize) -> Result<(Vec<C64>, Vec<f64>, Vec<C64>)> {
    let (mut evals, mut evecs) = dense::hermitian_eigen(&gram_of(g, k), k)?;
    // descending singular values
    evals.reverse();
    let mut v = vec![C64::new(0.0, 0.0); k * k];
    for c in 0..k {
        v[c * k..(c + 1) * k].copy_from_slice(&evecs[(k - 1 - c) * k..(k - c) * k]);
    }
    evecs.clear();
    let sigma: Vec<f64> = evals.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let smax = sigma.first().copied().unwrap_or(0.0);
    let mut u = vec![C64::new(0.0, 0.0); k * k];
    for c in 0..k {
        if sigma[c] < 1e-12 * smax.max(1.0) {
            return Err(Error::EigenFailure(format!(
                "singular value {c} of cluster Gram is numerically zero ({})",
                sigma[c]
            )));
        }
        for i in 0..k {
            let mut s = C64::new(0.0, 0.0);
            for j in 0..k {
                s += g[i + j * k] * v[j + c * k];
            }
            u[i + c * k] = s / sigma[c];
        }
    }
    Ok((u, sigma, v))
}

/// Cosines of the principal angles between span(u) and span(v), descending.
/// Both families must be orthonormal under the weighted inner product whose
/// node weight is `w`.
pub fn principal_angle_cosines(u: &[Vec<C64>], v: &[Vec<C64>], w: f64) -> Result<Vec<f64>> {
    assert_eq!(u.len(), v.len(), "cluster dimensions differ");
    let k = u.len();
    let g = cross_gram(u, v, w);
    let sigma = singular_values(&g, k)?;
    Ok(sigma.into_iter().map(|s| s.min(1.0)).collect())
}

/// Unitary `W` (col-major k x k) minimizing `|| [u] W - [v] ||` over unitary
/// matrices; the classic Procrustes answer `W = U V^H` is computed from the
/// SVD of the cross Gram.
pub fn procrustes_align(u: &[Vec<C64>], v: &[Vec<C64>], w: f64) -> Result<Vec<C64>> {
    assert_eq!(u.len(), v.len(), "cluster dimensions differ");
    let k = u.len();
    let g = cross_gram(u, v, w);
    let (p, _, q) = svd_square(&g, k)?;
    let mut out = vec![C64::new(0.0, 0.0); k * k];
    for a in 0..k {
        for b in 0..k {
            let mut s = C64::new(0.0, 0.0);
            for c in 0..k {
                s += p[a + c * k] * q[b + c * k].conj();
            }
            out[a + b * k] = s;
        }
    }
    Ok(out)
}

/// `max_c || sum_a u_a W[a + c*k] - v_c ||`, the residual of an alignment.
pub fn alignment_residual(u: &[Vec<C64>], v: &[Vec<C64>], wmat: &[C64], w: f64) -> f64 {
    let k = u.len();
    let n = u[0].len();
    let mut worst = 0.0f64;
    for c in 0..k {
        let mut res = 0.0f64;
        for i in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for a in 0..k {
                s += u[a][i] * wmat[a + c * k];
            }
            res += (s - v[c][i]).norm_sqr();
        }
        worst = worst.max((res * w).sqrt());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[i] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn identical_bases_align_trivially() {
        let u = vec![e(4, 0), e(4, 2)];
        let cos = principal_angle_cosines(&u, &u, 1.0).unwrap();
        assert!(cos.iter().all(|c| (c - 1.0).abs() < 1e-14), "{cos:?}");
        let w = procrustes_align(&u, &u, 1.0).unwrap();
        assert!((w[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((w[3] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(w[1].norm() < 1e-12 && w[2].norm() < 1e-12);
    }

    #[test]
    fn rotated_equal_span_is_recovered() {
        let n = 5;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = vec![e(n, 0), e(n, 1)];
        let mut v0 = vec![C64::new(0.0, 0.0); n];
        v0[0] = C64::new(s, 0.0);
        v0[1] = C64::new(0.0, s);
        let mut v1 = vec![C64::new(0.0, 0.0); n];
        v1[0] = C64::new(0.0, s);
        v1[1] = C64::new(s, 0.0);
        let v = vec![v0, v1];
        let cos = principal_angle_cosines(&u, &v, 1.0).unwrap();
        assert!(cos.iter().all(|c| (c - 1.0).abs() < 1e-12), "{cos:?}");
        let w = procrustes_align(&u, &v, 1.0).unwrap();
        assert!(alignment_residual(&u, &v, &w, 1.0) < 1e-12);
    }

    #[test]
    fn orthogonal_direction_shows_zero_cosine() {
        let u = vec![e(4, 0), e(4, 1)];
        let v = vec![e(4, 0), e(4, 3)];
        let cos = principal_angle_cosines(&u, &v, 1.0).unwrap();
        assert!((cos[0] - 1.0).abs() < 1e-13);
        assert!(cos[1].abs() < 1e-13);
    }

    #[test]
    fn svd_of_scaled_phases() {
        // diag(3 e^{i pi/3}, 2i) has singular values 3, 2.
        let g = vec![
            C64::from_polar(3.0, std::f64::consts::FRAC_PI_3),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 2.0),
        ];
        let (u, s, v) = svd_square(&g, 2).unwrap();
        assert!((s[0] - 3.0).abs() < 1e-13 && (s[1] - 2.0).abs() < 1e-13, "{s:?}");
        // reconstruct
        for a in 0..2 {
            for b in 0..2 {
                let mut r = C64::new(0.0, 0.0);
                for c in 0..2 {
                    r += u[a + c * 2] * s[c] * v[b + c * 2].conj();
                }
                assert!((r - g[a + b * 2]).norm() < 1e-12);
            }
        }
    }
}
