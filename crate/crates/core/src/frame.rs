//! The complex-frequency probing frame: a Fourier target `xi`, a scale `tau`,
//! and the pair of near-unit directions whose plane-wave phases straddle `xi`.
//!
//! Everything here is exact algebra on the inputs; the invariants asserted in
//! the tests are identities of the construction, not approximations.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};

pub fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn norm(a: [f64; 2]) -> f64 {
    dot(a, a).sqrt()
}

/// Probing frame at scale `tau` for frequency `xi`.
///
/// `lambda = (tau + i)^2`, so `sqrt_lambda = tau + i` on the principal branch
/// and `Im lambda = 2 tau` exactly. The directions
///
///   eta1 = B eta - xi/(2 tau),   eta2 = B eta + xi/(2 tau),
///
/// with `B = sqrt(1 - |xi|^2/(4 tau^2))` and `eta` the left-hand unit normal
/// of `xi`, are exactly unit length, and `sqrt_lambda (eta1 - eta2)` equals
/// `-xi (1 + i/tau)`, which is how the frequency `xi` survives the
/// `tau -> infinity` limit of the phase products.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct IsozakiFrame {
    pub xi: [f64; 2],
    pub tau: f64,
    pub b_tau: f64,
    /// unit vector orthogonal to `xi` (left-hand normal)
    pub eta: [f64; 2],
    /// unit vector along `xi`
    pub y: [f64; 2],
    pub eta1: [f64; 2],
    pub eta2: [f64; 2],
    pub lambda: C64,
    pub sqrt_lambda: C64,
    /// `B tau xi - |xi|^2 eta / (2 tau)`; orthogonal to `eta2` by construction
    pub omega: [f64; 2],
    /// mollification scale tied to the frame, `tau^{-1/3}`
    pub delta: f64,
}

pub fn isozaki_params(xi: [f64; 2], tau: f64) -> Result<IsozakiFrame> {
    let r = norm(xi);
    if !(r.is_finite() && tau.is_finite()) || r == 0.0 {
        return Err(Error::InvalidFrame("xi must be a nonzero finite vector".into()));
    }
    if tau <= r {
        return Err(Error::InvalidFrame(format!(
            "frame scale tau = {tau} must exceed |xi| = {r}"
        )));
    }
    let eta = [xi[1] / r, -xi[0] / r];
    let y = [xi[0] / r, xi[1] / r];
    let b_tau = (1.0 - r * r / (4.0 * tau * tau)).sqrt();
    let half = [xi[0] / (2.0 * tau), xi[1] / (2.0 * tau)];
    let eta1 = [b_tau * eta[0] - half[0], b_tau * eta[1] - half[1]];
    let eta2 = [b_tau * eta[0] + half[0], b_tau * eta[1] + half[1]];
    let omega = [
        b_tau * xi[0] - r * r * eta[0] / (2.0 * tau),
        b_tau * xi[1] - r * r * eta[1] / (2.0 * tau),
    ];
    let sqrt_lambda = C64::new(tau, 1.0);
    Ok(IsozakiFrame {
        xi,
        tau,
        b_tau,
        eta,
        y,
        eta1,
        eta2,
        lambda: sqrt_lambda * sqrt_lambda,
        sqrt_lambda,
        omega,
        delta: tau.powf(-1.0 / 3.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let f = isozaki_params([1.0, 0.0], 2.0).unwrap();
        assert!((f.b_tau - 15.0f64.sqrt() / 4.0).abs() < 1e-15);

        let f = isozaki_params([0.6, -0.8], 3.0).unwrap();
        assert_eq!(f.lambda, C64::new(8.0, 6.0));
        assert_eq!(f.lambda.im, 2.0 * f.tau);
    }

    #[test]
    fn construction_identities() {
        for (xi, tau) in [([1.0, 0.0], 2.0), ([0.3, -1.7], 8.0), ([-2.0, 2.0], 100.0)] {
            let f = isozaki_params(xi, tau).unwrap();
            assert!((norm(f.eta1) - 1.0).abs() < 1e-14, "eta1 not unit");
            assert!((norm(f.eta2) - 1.0).abs() < 1e-14, "eta2 not unit");
            assert!(dot(f.eta, f.xi).abs() < 1e-14 * norm(xi), "eta not orthogonal");
            assert!(dot(f.omega, f.eta2).abs() < 1e-12 * norm(f.omega).max(1.0));
            let r2 = dot(xi, xi);
            assert!((dot(f.eta1, f.eta2) - (1.0 - r2 / (2.0 * tau * tau))).abs() < 1e-12);
            // sqrt_lambda (eta1 - eta2) = -xi (1 + i/tau)
            for i in 0..2 {
                let lhs = f.sqrt_lambda * (f.eta1[i] - f.eta2[i]);
                let rhs = -xi[i] * C64::new(1.0, 1.0 / tau);
                assert!((lhs - rhs).norm() < 1e-12 * norm(xi));
            }
        }
    }

    #[test]
    fn frequency_recovered_in_the_large_scale_limit() {
        let xi = [1.0, 2.0];
        let f = isozaki_params(xi, 100.0).unwrap();
        let drift = [
            f.sqrt_lambda * (f.eta1[0] - f.eta2[0]) + xi[0],
            f.sqrt_lambda * (f.eta1[1] - f.eta2[1]) + xi[1],
        ];
        let mag = (drift[0].norm_sqr() + drift[1].norm_sqr()).sqrt();
        assert!(mag <= norm(xi) * (1.0 / 100.0) * 2.0f64.sqrt() + 1e-15, "drift {mag}");
    }

    #[test]
    fn degenerate_frames_are_refused() {
        assert!(matches!(isozaki_params([0.0, 0.0], 5.0), Err(Error::InvalidFrame(_))));
        assert!(matches!(isozaki_params([3.0, 4.0], 5.0), Err(Error::InvalidFrame(_))));
        assert!(isozaki_params([3.0, 4.0], 5.0 + 1e-9).is_ok());
    }
}
