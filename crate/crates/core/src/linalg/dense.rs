//! Dense complex Hermitian eigensolver: cyclic Jacobi with complex rotations.
//!
//! This is the reference path. It shares no code with the banded/Lanczos
//! production solvers, so agreement between the two is meaningful evidence.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Eigendecomposition of a Hermitian matrix stored col-major as `a[i + j*n]`.
/// Returns eigenvalues ascending and the matching eigenvectors as col-major
/// columns, orthonormal to machine precision. Only the Hermitian part of the
/// input is meaningful; the strictly lower triangle is trusted to mirror the
/// upper one.
pub fn hermitian_eigen(a_in: &[C64], n: usize) -> Result<(Vec<f64>, Vec<C64>)> {
    assert_eq!(a_in.len(), n * n, "matrix shape");
    let zero = C64::new(0.0, 0.0);
    let mut a = a_in.to_vec();
    let mut v = vec![zero; n * n];
    for i in 0..n {
        v[i + i * n] = C64::new(1.0, 0.0);
    }
    let fro: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if fro == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    let tol = 1e-14 * fro;
    let mut converged = false;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for q in 0..n {
            for p in 0..q {
                off += a[p + q * n].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p + q * n];
                let abs = apq.norm();
                if abs == 0.0 {
                    continue;
                }
                let app = a[p + p * n].re;
                let aqq = a[q + q * n].re;
                let phi = apq / abs;
                let tau = (aqq - app) / (2.0 * abs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sp = phi * (t * c); // s e^{i alpha}
                // A <- U^H A U and V <- V U with U = [[c, sp], [-conj(sp), c]]
                // acting on the (p, q) plane.
                for i in 0..n {
                    let aip = a[i + p * n];
                    let aiq = a[i + q * n];
                    a[i + p * n] = aip * c - aiq * sp.conj();
                    a[i + q * n] = aip * sp + aiq * c;
                    let vip = v[i + p * n];
                    let viq = v[i + q * n];
                    v[i + p * n] = vip * c - viq * sp.conj();
                    v[i + q * n] = vip * sp + viq * c;
                }
                for j in 0..n {
                    let apj = a[p + j * n];
                    let aqj = a[q + j * n];
                    a[p + j * n] = apj * c - aqj * sp;
                    a[q + j * n] = apj * sp.conj() + aqj * c;
                }
                a[p + q * n] = zero;
                a[q + p * n] = zero;
                a[p + p * n] = C64::new(a[p + p * n].re, 0.0);
                a[q + q * n] = C64::new(a[q + q * n].re, 0.0);
            }
        }
    }
    if !converged {
        return Err(Error::EigenFailure("Jacobi sweeps did not converge".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i + i * n].re.total_cmp(&a[j + j * n].re));
    let values = order.iter().map(|&i| a[i + i * n].re).collect();
    let mut vectors = vec![zero; n * n];
    for (dst, &src) in order.iter().enumerate() {
        vectors[dst * n..(dst + 1) * n].copy_from_slice(&v[src * n..(src + 1) * n]);
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_hermitian(n: usize, seed: u64) -> Vec<C64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut a = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            a[i + i * n] = C64::new(rng.gen::<f64>() * 2.0 - 1.0, 0.0);
            for j in (i + 1)..n {
                let z = C64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0);
                a[i + j * n] = z;
                a[j + i * n] = z.conj();
            }
        }
        a
    }

    #[test]
    fn diagonal_matrix_is_exact() {
        let n = 5;
        let mut a = vec![C64::new(0.0, 0.0); n * n];
        let diag = [3.0, -1.0, 0.5, 2.0, -4.0];
        for i in 0..n {
            a[i + i * n] = C64::new(diag[i], 0.0);
        }
        let (vals, _) = hermitian_eigen(&a, n).unwrap();
        assert_eq!(vals, vec![-4.0, -1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn random_hermitian_residual_and_orthonormality() {
        let n = 40;
        let a = random_hermitian(n, 7);
        let (vals, vecs) = hermitian_eigen(&a, n).unwrap();
        let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for k in 0..n {
            // residual ||A v - lambda v||
            let mut res = 0.0f64;
            for i in 0..n {
                let mut av = C64::new(0.0, 0.0);
                for j in 0..n {
                    av += a[i + j * n] * vecs[j + k * n];
                }
                res += (av - vecs[i + k * n] * vals[k]).norm_sqr();
            }
            assert!(res.sqrt() < 1e-12 * scale, "residual for pair {k}: {}", res.sqrt());
        }
        for k in 0..n {
            for l in k..n {
                let mut dot = C64::new(0.0, 0.0);
                for i in 0..n {
                    dot += vecs[i + k * n].conj() * vecs[i + l * n];
                }
                let expect = if k == l { 1.0 } else { 0.0 };
                assert!((dot - expect).norm() < 1e-12, "<v{k}, v{l}> = {dot}");
            }
        }
        // ascending order
        for k in 1..n {
            assert!(vals[k] >= vals[k - 1]);
        }
    }

    #[test]
    fn known_two_by_two_with_phase() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2.
        let a = vec![
            C64::new(1.0, 0.0),
            C64::new(0.0, -1.0),
            C64::new(0.0, 1.0),
            C64::new(1.0, 0.0),
        ];
        let (vals, _) = hermitian_eigen(&a, 2).unwrap();
        assert!((vals[0] - 0.0).abs() < 1e-14 && (vals[1] - 2.0).abs() < 1e-14, "{vals:?}");
    }
}
