//! Smooth compactly supported building blocks for vector and electric
//! potentials, with exact derivatives.
//!
//! Everything is built from the radial profile `rho(u) = exp(1 - 1/(1-u^2))`
//! on `|u| < 1`, which vanishes to all orders at `u = 1`. Derivatives are
//! taken through the regular combinations `s(u) = rho'(u)/u` and
//! `t(u) = s'(u)/u` so nothing degenerates at the center.

use serde::{Deserialize, Serialize};

use crate::domain::Domain2D;
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField2D};

/// `rho(u) = exp(1 - 1/(1-u^2))` for `|u| < 1`, zero outside. Even in `u`.
pub fn bump(u: f64) -> f64 {
    let u2 = u * u;
    if u2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u2)).exp()
    }
}

/// `s(u) = rho'(u)/u = -2 rho(u)/(1-u^2)^2`, regular at 0 with `s(0) = -2`.
pub fn bump_s(u: f64) -> f64 {
    let u2 = u * u;
    if u2 >= 1.0 {
        0.0
    } else {
        let w = 1.0 - u2;
        -2.0 * bump(u) / (w * w)
    }
}

/// `rho''(u)`, via `rho'' = (g' + g^2) rho` with `g = -2u/(1-u^2)^2`.
pub fn bump_dd(u: f64) -> f64 {
    let u2 = u * u;
    if u2 >= 1.0 {
        0.0
    } else {
        let w = 1.0 - u2;
        let g = -2.0 * u / (w * w);
        let gp = -2.0 * (1.0 + 3.0 * u2) / (w * w * w);
        (gp + g * g) * bump(u)
    }
}

/// `t(u) = s'(u)/u = (rho''(u) - s(u))/u^2`, regular at 0 with `t(0) = -4`.
pub fn bump_t(u: f64) -> f64 {
    let u2 = u * u;
    if u2 >= 1.0 {
        return 0.0;
    }
    if u2 < 1e-6 {
        // The quotient below cancels catastrophically for tiny u; the Taylor
        // value is accurate to O(u^2) here.
        return -4.0;
    }
    (bump_dd(u) - bump_s(u)) / u2
}

/// C^2 ramp: 0 for `t <= 0`, 1 for `t >= 1`, `6t^5 - 15t^4 + 10t^3` between.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

/// One compactly supported piece of a vector potential.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum APrimitive {
    /// `A = grad^perp (amp rho(|x-c|/r))`: divergence-free rotational pocket.
    /// Its curl `amp (rho'' + rho'/u)/r^2` spikes near the support edge, so
    /// most of its energy sits at high frequency.
    StreamBump { center: [f64; 2], radius: f64, amplitude: f64 },
    /// `A = grad (amp rho(|x-c|/r))`: curl-free gradient pocket.
    GradBump { center: [f64; 2], radius: f64, amplitude: f64 },
    /// `A = amp rho(|x-c|/r) (x-c)^perp / r^2`: divergence-free swirl pocket.
    /// Its curl `amp (2 rho + u rho')/r^2` involves no second derivative of
    /// the profile, so it is as smooth (and as nearly band-limited) as the
    /// bump itself — the right rotational pocket when the field, not just the
    /// potential, must be well captured by a small Fourier window.
    SpinBump { center: [f64; 2], radius: f64, amplitude: f64 },
}

/// One piece of an electric potential.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum VPrimitive {
    VBump { center: [f64; 2], radius: f64, amplitude: f64 },
    VConst { amplitude: f64 },
}

impl APrimitive {
    pub fn eval(&self, x: [f64; 2]) -> [f64; 2] {
        match *self {
            APrimitive::StreamBump { center, radius, amplitude } => {
                let q = [x[0] - center[0], x[1] - center[1]];
                let u = (q[0] * q[0] + q[1] * q[1]).sqrt() / radius;
                let c = amplitude / (radius * radius) * bump_s(u);
                [-c * q[1], c * q[0]]
            }
            APrimitive::GradBump { center, radius, amplitude } => {
                let q = [x[0] - center[0], x[1] - center[1]];
                let u = (q[0] * q[0] + q[1] * q[1]).sqrt() / radius;
                let c = amplitude / (radius * radius) * bump_s(u);
                [c * q[0], c * q[1]]
            }
            APrimitive::SpinBump { center, radius, amplitude } => {
                let q = [x[0] - center[0], x[1] - center[1]];
                let u = (q[0] * q[0] + q[1] * q[1]).sqrt() / radius;
                let c = amplitude / (radius * radius) * bump(u);
                [-c * q[1], c * q[0]]
            }
        }
    }

    /// `J[i][j] = dA_i/dx_j`, exact.
    pub fn jacobian(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        match *self {
            APrimitive::StreamBump { center, radius, amplitude } => {
                let r2 = radius * radius;
                let q = [x[0] - center[0], x[1] - center[1]];
                let u = (q[0] * q[0] + q[1] * q[1]).sqrt() / radius;
                let (s, t) = (bump_s(u), bump_t(u));
                let c = amplitude / r2;
                let p = [-q[1], q[0]];
                [
                    [c * t * p[0] * q[0] / r2, c * (t * p[0] * q[1] / r2 - s)],
                    [c * (t * p[1] * q[0] / r2 + s), c * t * p[1] * q[1] / r2],
                ]
            }
            APrimitive::GradBump { center, radius, amplitude } => {
                let r2 = radius * radius;
                let q = [x[0] - center[0], x[1] - center[1]];
                let u = (q[0] * q[0] + q[1] * q[1]).sqrt() / radius;
                let (s, t) = (bump_s(u), bump_t(u));
                let c = amplitude / r2;
                [
                    [c * (t * q[0] * q[0] / r2 + s), c * t * q[0] * q[1] / r2],
                    [c * t * q[1] * q[0] / r2, c * (t * q[1] * q[1] / r2 + s)],
                ]
            }
            APrimitive::SpinBump { center, radius, amplitude } => {
                // Same shell as StreamBump one derivative down: rho plays the
                // role of s, and s the role of t.
                let r2 = radius * radius;
                let q = [x[0] - center[0], x[1] - center[1]];
                let u = (q[0] * q[0] + q[1] * q[1]).sqrt() / radius;
                let (rho, s) = (bump(u), bump_s(u));
                let c = amplitude / r2;
                let p = [-q[1], q[0]];
                [
                    [c * s * p[0] * q[0] / r2, c * (s * p[0] * q[1] / r2 - rho)],
                    [c * (s * p[1] * q[0] / r2 + rho), c * s * p[1] * q[1] / r2],
                ]
            }
        }
    }

    pub fn curl(&self, x: [f64; 2]) -> f64 {
        match *self {
            APrimitive::StreamBump { center, radius, amplitude } => {
                let q = [x[0] - center[0], x[1] - center[1]];
                let u = (q[0] * q[0] + q[1] * q[1]).sqrt() / radius;
                amplitude / (radius * radius) * (bump_dd(u) + bump_s(u))
            }
            APrimitive::GradBump { .. } => 0.0,
            APrimitive::SpinBump { center, radius, amplitude } => {
                let q = [x[0] - center[0], x[1] - center[1]];
                let u = (q[0] * q[0] + q[1] * q[1]).sqrt() / radius;
                amplitude / (radius * radius) * (2.0 * bump(u) + u * u * bump_s(u))
            }
        }
    }

    pub fn div(&self, x: [f64; 2]) -> f64 {
        match *self {
            APrimitive::StreamBump { .. } | APrimitive::SpinBump { .. } => 0.0,
            APrimitive::GradBump { center, radius, amplitude } => {
                let q = [x[0] - center[0], x[1] - center[1]];
                let u = (q[0] * q[0] + q[1] * q[1]).sqrt() / radius;
                amplitude / (radius * radius) * (bump_dd(u) + bump_s(u))
            }
        }
    }

    /// Closed disk outside of which the primitive vanishes identically.
    pub fn support(&self) -> ([f64; 2], f64) {
        match *self {
            APrimitive::StreamBump { center, radius, .. }
            | APrimitive::GradBump { center, radius, .. }
            | APrimitive::SpinBump { center, radius, .. } => (center, radius),
        }
    }

    /// The same pocket with its amplitude sign flipped; every derived field
    /// (value, jacobian, curl, div) negates with it.
    pub fn negated(&self) -> APrimitive {
        match *self {
            APrimitive::StreamBump { center, radius, amplitude } => {
                APrimitive::StreamBump { center, radius, amplitude: -amplitude }
            }
            APrimitive::GradBump { center, radius, amplitude } => {
                APrimitive::GradBump { center, radius, amplitude: -amplitude }
            }
            APrimitive::SpinBump { center, radius, amplitude } => {
                APrimitive::SpinBump { center, radius, amplitude: -amplitude }
            }
        }
    }
}

impl VPrimitive {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match *self {
            VPrimitive::VBump { center, radius, amplitude } => {
                let q = [x[0] - center[0], x[1] - center[1]];
                amplitude * bump((q[0] * q[0] + q[1] * q[1]).sqrt() / radius)
            }
            VPrimitive::VConst { amplitude } => amplitude,
        }
    }

    /// Support disk, or `None` for globally supported pieces.
    pub fn support(&self) -> Option<([f64; 2], f64)> {
        match *self {
            VPrimitive::VBump { center, radius, .. } => Some((center, radius)),
            VPrimitive::VConst { .. } => None,
        }
    }
}

/// Vector potential: a sum of primitives.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct APreset(pub Vec<APrimitive>);

/// Electric potential: a sum of primitives.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VPreset(pub Vec<VPrimitive>);

impl APreset {
    pub fn eval(&self, x: [f64; 2]) -> [f64; 2] {
        let mut a = [0.0, 0.0];
        for p in &self.0 {
            let v = p.eval(x);
            a[0] += v[0];
            a[1] += v[1];
        }
        a
    }

    pub fn jacobian(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let mut j = [[0.0; 2]; 2];
        for p in &self.0 {
            let pj = p.jacobian(x);
            for i in 0..2 {
                for k in 0..2 {
                    j[i][k] += pj[i][k];
                }
            }
        }
        j
    }

    pub fn curl(&self, x: [f64; 2]) -> f64 {
        self.0.iter().map(|p| p.curl(x)).sum()
    }

    pub fn div(&self, x: [f64; 2]) -> f64 {
        self.0.iter().map(|p| p.div(x)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// The preset whose fields evaluate to `self - other`, kept in closed
    /// form as the concatenation of `self` with `other` negated.
    pub fn minus(&self, other: &APreset) -> APreset {
        let mut prims = self.0.clone();
        prims.extend(other.0.iter().map(APrimitive::negated));
        APreset(prims)
    }

    pub fn sample(&self, domain: Domain2D) -> VectorField2D {
        VectorField2D::from_fn(domain, |x, y| {
            let a = self.eval([x, y]);
            (a[0], a[1])
        })
    }

    /// Every support disk must stay strictly inside the collar-free box
    /// `[-l/2 + collar, l/2 - collar]^2`; the whole pipeline (mollification by
    /// extension with zero, boundary-flat gauge functions) relies on it.
    pub fn validate_interior_support(&self, domain: &Domain2D) -> Result<()> {
        let bx = domain.l1 / 2.0 - domain.collar_width;
        let by = domain.l2 / 2.0 - domain.collar_width;
        for p in &self.0 {
            let (c, r) = p.support();
            if c[0].abs() + r >= bx || c[1].abs() + r >= by {
                return Err(Error::SupportTouchesCollar(format!(
                    "support disk at ({}, {}) radius {} reaches the collar (free box {} x {})",
                    c[0], c[1], r, bx, by
                )));
            }
        }
        Ok(())
    }
}

impl VPreset {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.0.iter().map(|p| p.eval(x)).sum()
    }

    pub fn sample(&self, domain: Domain2D) -> ScalarField {
        ScalarField::from_fn(domain, |x, y| self.eval([x, y]))
    }

    /// Interior-support rule for the bump pieces; constants are exempt (they
    /// cancel in pair differences, which is what the collar rule protects).
    pub fn validate_interior_support(&self, domain: &Domain2D) -> Result<()> {
        let bx = domain.l1 / 2.0 - domain.collar_width;
        let by = domain.l2 / 2.0 - domain.collar_width;
        for p in &self.0 {
            if let Some((c, r)) = p.support() {
                if c[0].abs() + r >= bx || c[1].abs() + r >= by {
                    return Err(Error::SupportTouchesCollar(format!(
                        "support disk at ({}, {}) radius {} reaches the collar (free box {} x {})",
                        c[0], c[1], r, bx, by
                    )));
                }
            }
        }
        Ok(())
    }
}
