//! The probing pair: oscillatory exponentials tied to a frame, decorated by
//! transport phases along the frame directions and a matched amplitude.
//!
//! Phases and amplitudes evaluate through the smoothed potentials' exact ray
//! integrals, so the only discretization in this module is the padded-lattice
//! sampling used for stencil derivatives.

use num_complex::Complex64 as C64;

use crate::domain::Domain2D;
use crate::field::{BoundaryFunction, ComplexField};
use crate::frame::{dot, IsozakiFrame};
use crate::mollify::MollifiedPotential;
use crate::preset::APreset;

/// Scalar samples on the grid plus one ghost ring, so centered first and
/// second differences exist at every standard node, boundary included.
pub struct PaddedScalar {
    pub domain: Domain2D,
    values: Vec<f64>,
}

/// 8-point Gauss-Legendre abscissae/weights on [-1, 1].
const GL_X: [f64; 8] = [
    -0.9602898564975363,
    -0.7966664774136267,
    -0.5255324099163290,
    -0.1834346424956498,
    0.1834346424956498,
    0.5255324099163290,
    0.7966664774136267,
    0.9602898564975363,
];
const GL_W: [f64; 8] = [
    0.1012285362903763,
    0.2223810344533745,
    0.3137066458778873,
    0.3626837833783620,
    0.3626837833783620,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];

/// Composite Gauss quadrature over [a, b] (smooth integrands only).
fn gauss_panels(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let width = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let (lo, hi) = (a + p as f64 * width, a + (p + 1) as f64 * width);
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (x, w) in GL_X.iter().zip(GL_W) {
            acc += w * f(mid + half * x) * half;
        }
    }
    acc
}

impl PaddedScalar {
    pub fn from_fn(domain: Domain2D, f: impl Fn([f64; 2]) -> f64) -> Self {
        let (w, h) = (domain.n1 + 2, domain.n2 + 2);
        let mut values = vec![0.0; w * h];
        for iy in -1..=domain.n2 as isize {
            for ix in -1..=domain.n1 as isize {
                let x = [
                    -domain.l1 / 2.0 + ix as f64 * domain.h1(),
                    -domain.l2 / 2.0 + iy as f64 * domain.h2(),
                ];
                values[(iy + 1) as usize * w + (ix + 1) as usize] = f(x);
            }
        }
        PaddedScalar { domain, values }
    }

    #[inline]
    fn idx(&self, ix: isize, iy: isize) -> usize {
        debug_assert!(ix >= -1 && ix <= self.domain.n1 as isize);
        debug_assert!(iy >= -1 && iy <= self.domain.n2 as isize);
        (iy + 1) as usize * (self.domain.n1 + 2) + (ix + 1) as usize
    }

    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.idx(ix as isize, iy as isize)]
    }

    pub fn grad(&self, ix: usize, iy: usize) -> [f64; 2] {
        let (i, j) = (ix as isize, iy as isize);
        [
            (self.values[self.idx(i + 1, j)] - self.values[self.idx(i - 1, j)])
                / (2.0 * self.domain.h1()),
            (self.values[self.idx(i, j + 1)] - self.values[self.idx(i, j - 1)])
                / (2.0 * self.domain.h2()),
        ]
    }

    pub fn laplacian(&self, ix: usize, iy: usize) -> f64 {
        let (i, j) = (ix as isize, iy as isize);
        let c = self.values[self.idx(i, j)];
        (self.values[self.idx(i + 1, j)] - 2.0 * c + self.values[self.idx(i - 1, j)])
            / (self.domain.h1() * self.domain.h1())
            + (self.values[self.idx(i, j + 1)] - 2.0 * c + self.values[self.idx(i, j - 1)])
                / (self.domain.h2() * self.domain.h2())
    }
}

/// Complex twin of [`PaddedScalar`].
pub struct PaddedComplex {
    pub domain: Domain2D,
    values: Vec<C64>,
}

impl PaddedComplex {
    pub fn from_fn(domain: Domain2D, f: impl Fn([f64; 2]) -> C64) -> Self {
        let (w, h) = (domain.n1 + 2, domain.n2 + 2);
        let mut values = vec![C64::new(0.0, 0.0); w * h];
        for iy in -1..=domain.n2 as isize {
            for ix in -1..=domain.n1 as isize {
                let x = [
                    -domain.l1 / 2.0 + ix as f64 * domain.h1(),
                    -domain.l2 / 2.0 + iy as f64 * domain.h2(),
                ];
                values[(iy + 1) as usize * w + (ix + 1) as usize] = f(x);
            }
        }
        PaddedComplex { domain, values }
    }

    #[inline]
    fn idx(&self, ix: isize, iy: isize) -> usize {
        debug_assert!(ix >= -1 && ix <= self.domain.n1 as isize);
        debug_assert!(iy >= -1 && iy <= self.domain.n2 as isize);
        (iy + 1) as usize * (self.domain.n1 + 2) + (ix + 1) as usize
    }

    pub fn value(&self, ix: usize, iy: usize) -> C64 {
        self.values[self.idx(ix as isize, iy as isize)]
    }

    pub fn grad(&self, ix: usize, iy: usize) -> [C64; 2] {
        let (i, j) = (ix as isize, iy as isize);
        [
            (self.values[self.idx(i + 1, j)] - self.values[self.idx(i - 1, j)])
                / (2.0 * self.domain.h1()),
            (self.values[self.idx(i, j + 1)] - self.values[self.idx(i, j - 1)])
                / (2.0 * self.domain.h2()),
        ]
    }

    pub fn laplacian(&self, ix: usize, iy: usize) -> C64 {
        let (i, j) = (ix as isize, iy as isize);
        let c = self.values[self.idx(i, j)];
        (self.values[self.idx(i + 1, j)] - 2.0 * c + self.values[self.idx(i - 1, j)])
            / (self.domain.h1() * self.domain.h1())
            + (self.values[self.idx(i, j + 1)] - 2.0 * c + self.values[self.idx(i, j - 1)])
                / (self.domain.h2() * self.domain.h2())
    }
}

/// The probing pair for one frame over two smoothed potentials. `electric`
/// replaces the matched amplitude by the constant 1 (the variant probing the
/// scalar potential once the magnetic parts agree).
pub struct Ansatz<'a> {
    pub frame: IsozakiFrame,
    pub moll1: &'a MollifiedPotential,
    pub moll2: &'a MollifiedPotential,
    pub electric: bool,
}

impl<'a> Ansatz<'a> {
    pub fn new(
        frame: IsozakiFrame,
        moll1: &'a MollifiedPotential,
        moll2: &'a MollifiedPotential,
        electric: bool,
    ) -> Self {
        assert_eq!(moll1.domain, moll2.domain, "potential domains differ");
        Ansatz { frame, moll1, moll2, electric }
    }

    /// Incoming transport phase: `-int_{-inf}^0 eta1 . A1#(x + s eta1) ds`.
    pub fn psi1_at(&self, x: [f64; 2]) -> f64 {
        let e = self.frame.eta1;
        -self.moll1.ray_integral(x, e, e, f64::NEG_INFINITY, 0.0)
    }

    /// Outgoing transport phase: `-int_{-inf}^0 eta2 . A2#(x + s eta2) ds`.
    pub fn psi2_at(&self, x: [f64; 2]) -> f64 {
        let e = self.frame.eta2;
        -self.moll2.ray_integral(x, e, e, f64::NEG_INFINITY, 0.0)
    }

    /// Matched amplitude
    ///
    ///   b2(x) = (-i w.y - i int_R eta2.(y . grad A#)(x+s eta2) ds)
    ///             * exp(-i int_R eta2 . A#(x+s eta2) ds),
    ///
    /// where `A# = A2# - A1#` (smoothing is linear, so the difference of the
    /// two ray integrals is the ray integral of the difference, exactly).
    pub fn b2_at(&self, x: [f64; 2]) -> C64 {
        if self.electric {
            return C64::new(1.0, 0.0);
        }
        let e2 = self.frame.eta2;
        let y = self.frame.y;
        let (neg, pos) = (f64::NEG_INFINITY, f64::INFINITY);
        let i1 = self.moll2.ray_integral(x, e2, e2, neg, pos)
            - self.moll1.ray_integral(x, e2, e2, neg, pos);
        let i2 = self.moll2.ray_integral_grad(x, e2, y, e2, neg, pos)
            - self.moll1.ray_integral_grad(x, e2, y, e2, neg, pos);
        C64::new(0.0, -(dot(self.frame.omega, y) + i2)) * C64::from_polar(1.0, -i1)
    }

    /// `Phi1(x) = e^{i sqrt(lambda) eta1.x} e^{i psi1}`; with
    /// `sqrt(lambda) = tau + i` the modulus is exactly `e^{-eta1.x}`.
    pub fn phi1_at(&self, x: [f64; 2]) -> C64 {
        let along = dot(self.frame.eta1, x);
        C64::from_polar((-along).exp(), self.frame.tau * along + self.psi1_at(x))
    }

    /// `Phi2(x) = e^{-i sqrt(lambda) eta2.x} b2(x) e^{-i psi2}`.
    pub fn phi2_at(&self, x: [f64; 2]) -> C64 {
        let along = dot(self.frame.eta2, x);
        C64::from_polar(along.exp(), -self.frame.tau * along - self.psi2_at(x)) * self.b2_at(x)
    }

    pub fn phi1_trace(&self) -> BoundaryFunction {
        BoundaryFunction::from_fn(self.moll1.domain, |x, y| self.phi1_at([x, y]))
    }

    pub fn phi2_trace(&self) -> BoundaryFunction {
        BoundaryFunction::from_fn(self.moll1.domain, |x, y| self.phi2_at([x, y]))
    }

    pub fn phi1_field(&self) -> ComplexField {
        let d = self.moll1.domain;
        let psi = self.psi1_field();
        let mut out = ComplexField::zeros(d);
        for iy in 0..d.n2 {
            for ix in 0..d.n1 {
                let along = dot(self.frame.eta1, d.pos(ix, iy));
                out.values[d.node_index(ix, iy)] = C64::from_polar(
                    (-along).exp(),
                    self.frame.tau * along + psi.value(ix, iy),
                );
            }
        }
        out
    }

    /// Grid samples go through the difference-lattice tables of the smoothed
    /// potentials, which match the pointwise `*_at` routines to roundoff.
    pub fn psi1_field(&self) -> PaddedScalar {
        let e = self.frame.eta1;
        let mut values = self.moll1.ray_field(e, e, f64::NEG_INFINITY, 0.0, 1);
        for v in &mut values {
            *v = -*v;
        }
        PaddedScalar { domain: self.moll1.domain, values }
    }

    pub fn psi2_field(&self) -> PaddedScalar {
        let e = self.frame.eta2;
        let mut values = self.moll2.ray_field(e, e, f64::NEG_INFINITY, 0.0, 1);
        for v in &mut values {
            *v = -*v;
        }
        PaddedScalar { domain: self.moll1.domain, values }
    }

    pub fn b2_field(&self) -> PaddedComplex {
        let d = self.moll1.domain;
        if self.electric {
            return PaddedComplex::from_fn(d, |_| C64::new(1.0, 0.0));
        }
        let e2 = self.frame.eta2;
        let y = self.frame.y;
        let (neg, pos) = (f64::NEG_INFINITY, f64::INFINITY);
        let i1b = self.moll2.ray_field(e2, e2, neg, pos, 1);
        let i1a = self.moll1.ray_field(e2, e2, neg, pos, 1);
        let i2b = self.moll2.ray_grad_field(e2, y, e2, neg, pos, 1);
        let i2a = self.moll1.ray_grad_field(e2, y, e2, neg, pos, 1);
        let wy = dot(self.frame.omega, y);
        let values = (0..i1b.len())
            .map(|k| {
                C64::new(0.0, -(wy + (i2b[k] - i2a[k])))
                    * C64::from_polar(1.0, -(i1b[k] - i1a[k]))
            })
            .collect();
        PaddedComplex { domain: d, values }
    }
}

/// Clip the ray `x + s dir` to a disk; `None` if it misses.
fn disk_window(x: [f64; 2], dir: [f64; 2], center: [f64; 2], radius: f64) -> Option<(f64, f64)> {
    let q = [center[0] - x[0], center[1] - x[1]];
    let m = dot(q, dir);
    let d2 = dot(q, q) - m * m;
    let rem = radius * radius - d2;
    if rem <= 0.0 {
        return None;
    }
    let half = rem.sqrt();
    Some((m - half, m + half))
}

/// Integrate a smooth directional density of the preset difference
/// `A = a2 - a1` along `{x + s dir : s in [s0, s1]}` by per-primitive
/// clipped Gauss panels.
fn preset_ray(
    a1: &APreset,
    a2: &APreset,
    x: [f64; 2],
    dir: [f64; 2],
    s0: f64,
    s1: f64,
    f: impl Fn(&APreset, [f64; 2]) -> f64 + Copy,
) -> f64 {
    let mut acc = 0.0;
    for (preset, sign) in [(a2, 1.0), (a1, -1.0)] {
        for prim in &preset.0 {
            let (c, r) = prim.support();
            if let Some((lo, hi)) = disk_window(x, dir, c, r) {
                let (lo, hi) = (lo.max(s0), hi.min(s1));
                if lo < hi {
                    let single = APreset(vec![prim.clone()]);
                    acc += sign
                        * gauss_panels(
                            |s| f(&single, [x[0] + s * dir[0], x[1] + s * dir[1]]),
                            lo,
                            hi,
                            16,
                        );
                }
            }
        }
    }
    acc
}

/// Large-scale limit of `psi1 - psi2`:
/// `psi(x) = int_{-inf}^0 eta . (A2 - A1)(x + s eta) ds`, unsmoothed.
pub fn limit_phase(a1: &APreset, a2: &APreset, eta: [f64; 2], x: [f64; 2]) -> f64 {
    preset_ray(a1, a2, x, eta, f64::NEG_INFINITY, 0.0, |p, z| dot(eta, p.eval(z)))
}

/// Full-line tangential integral `int_R eta . (A2 - A1)(x + s eta) ds`: the
/// log-holonomy of the difference along the whole ray through `x`. Constant
/// along each ray; identically zero when the difference is a gradient.
pub fn ray_holonomy(a1: &APreset, a2: &APreset, eta: [f64; 2], x: [f64; 2]) -> f64 {
    preset_ray(a1, a2, x, eta, f64::NEG_INFINITY, f64::INFINITY, |p, z| dot(eta, p.eval(z)))
}

/// Large-scale limit of the matched amplitude:
/// `b(x) = (-i |xi| - i int_R eta.(y . grad A)(x+s eta) ds) e^{-i int_R eta.A ds}`
/// with `A = A2 - A1` unsmoothed.
pub fn limit_amplitude(a1: &APreset, a2: &APreset, frame: &IsozakiFrame, x: [f64; 2]) -> C64 {
    let (eta, y) = (frame.eta, frame.y);
    let i1 = preset_ray(a1, a2, x, eta, f64::NEG_INFINITY, f64::INFINITY, |p, z| {
        dot(eta, p.eval(z))
    });
    let i2 = preset_ray(a1, a2, x, eta, f64::NEG_INFINITY, f64::INFINITY, |p, z| {
        let j = p.jacobian(z);
        eta[0] * (j[0][0] * y[0] + j[0][1] * y[1]) + eta[1] * (j[1][0] * y[0] + j[1][1] * y[1])
    });
    let xi_len = dot(frame.xi, y);
    C64::new(0.0, -(xi_len + i2)) * C64::from_polar(1.0, -i1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::isozaki_params;
    use crate::mollify::mollify;
    use crate::preset::APrimitive;

    fn gentle() -> APreset {
        APreset(vec![APrimitive::StreamBump {
            center: [0.04, -0.02],
            radius: 0.3,
            amplitude: 0.05,
        }])
    }

    fn steep() -> APreset {
        APreset(vec![APrimitive::StreamBump {
            center: [-0.06, 0.05],
            radius: 0.22,
            amplitude: 0.6,
        }])
    }

    fn domain() -> Domain2D {
        Domain2D::new(1.0, 1.0, 65, 65, 0.15).unwrap()
    }

    #[test]
    fn padded_stencils_are_exact_on_quadratics() {
        let d = domain();
        let p = PaddedScalar::from_fn(d, |x| 3.0 * x[0] * x[0] - 2.0 * x[1] * x[1] + x[0] * x[1]);
        for (ix, iy) in [(0, 0), (32, 32), (64, 10), (5, 64)] {
            let x = d.pos(ix, iy);
            let g = p.grad(ix, iy);
            assert!((g[0] - (6.0 * x[0] + x[1])).abs() < 1e-10);
            assert!((g[1] - (-4.0 * x[1] + x[0])).abs() < 1e-10);
            assert!((p.laplacian(ix, iy) - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn transport_relation_holds_pointwise() {
        let d = domain();
        let moll = mollify(&gentle().sample(d), 0.2).unwrap();
        let frame = isozaki_params([2.0, 1.0], 16.0).unwrap();
        let ansatz = Ansatz::new(frame, &moll, &moll, false);
        let eps = 1e-4;
        for x in [[0.0, 0.0], [0.1, -0.2], [-0.25, 0.15]] {
            let ahead = ansatz.psi1_at([x[0] + eps * frame.eta1[0], x[1] + eps * frame.eta1[1]]);
            let fd = (ahead - ansatz.psi1_at(x)) / eps;
            let a = moll.eval(x);
            let residual = (fd + dot(frame.eta1, a)).abs();
            assert!(residual < 1e-4, "transport residual {residual} at {x:?}");
        }
    }

    #[test]
    fn field_tables_match_pointwise_rays() {
        let d = Domain2D::new(1.0, 1.0, 33, 33, 0.15).unwrap();
        let m1 = mollify(&gentle().sample(d), 0.18).unwrap();
        let m2 = mollify(&steep().sample(d), 0.18).unwrap();
        let frame = isozaki_params([2.0, -1.0], 14.0).unwrap();
        let a = Ansatz::new(frame, &m1, &m2, false);
        let (p1, p2, b) = (a.psi1_field(), a.psi2_field(), a.b2_field());
        let phi1 = a.phi1_field();
        for (ix, iy) in [(0usize, 0usize), (1, 31), (16, 16), (32, 5), (7, 0)] {
            let x = d.pos(ix, iy);
            assert!((p1.value(ix, iy) - a.psi1_at(x)).abs() < 1e-11);
            assert!((p2.value(ix, iy) - a.psi2_at(x)).abs() < 1e-11);
            assert!((b.value(ix, iy) - a.b2_at(x)).norm() < 1e-11);
            assert!((phi1.at(ix, iy) - a.phi1_at(x)).norm() < 1e-11);
        }
        // the ghost ring feeds the edge stencils; check one against a
        // pointwise difference quotient straddling the boundary
        let h = d.h1();
        let x = d.pos(0, 12);
        let fd = (a.psi1_at([x[0] + h, x[1]]) - a.psi1_at([x[0] - h, x[1]])) / (2.0 * h);
        assert!((p1.grad(0, 12)[0] - fd).abs() < 1e-9);
    }

    #[test]
    fn ray_missing_the_support_gives_zero_exactly() {
        let d = domain();
        let moll = mollify(&steep().sample(d), 0.15).unwrap();
        let frame = isozaki_params([0.0, 3.0], 16.0).unwrap();
        let ansatz = Ansatz::new(frame, &moll, &moll, false);
        // support disk radius 0.22 + smoothing 0.15 around (-0.06, 0.05);
        // a ray through x with eta1 ~ (-1, 0) stays at x[1] = -0.45
        assert_eq!(ansatz.psi1_at([0.3, -0.45]), 0.0);
        assert_eq!(limit_phase(&APreset(vec![]), &steep(), frame.eta, [0.3, -0.45]), 0.0);
    }

    #[test]
    fn simpson_quadrature_converges_to_the_exact_phase() {
        let d = domain();
        let moll = mollify(&steep().sample(d), 0.15).unwrap();
        let frame = isozaki_params([1.0, -1.0], 12.0).unwrap();
        let ansatz = Ansatz::new(frame, &moll, &moll, false);
        let x = [0.05, 0.1];
        let exact = ansatz.psi1_at(x);
        let eta = frame.eta1;
        // clip the ray to where the smoothed field can live
        let span = 1.6;
        let simpson = |n: usize| {
            let h = span / n as f64;
            let f = |s: f64| -dot(eta, moll.eval([x[0] + s * eta[0], x[1] + s * eta[1]]));
            let mut acc = f(-span) + f(0.0);
            for i in 1..n {
                acc += f(-span + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc * h / 3.0
        };
        let step = d.h1().min(moll.kernel.delta / 4.0);
        let n1 = (span / step).ceil() as usize * 2;
        let (s1, s2) = (simpson(n1), simpson(2 * n1));
        assert!((s2 - s1).abs() < 1e-8, "quadrature not settled: {}", (s2 - s1).abs());
        assert!((s1 - exact).abs() < 1e-8, "exact {exact} vs simpson {s1}");
        assert!((s2 - exact).abs() <= (s1 - exact).abs() + 1e-15);
    }

    #[test]
    fn amplitude_collapses_when_potentials_agree() {
        let d = domain();
        let moll = mollify(&steep().sample(d), 0.15).unwrap();
        let frame = isozaki_params([2.0, 0.5], 20.0).unwrap();
        let ansatz = Ansatz::new(frame, &moll, &moll, false);
        let expect = C64::new(0.0, -dot(frame.omega, frame.y));
        for x in [[0.0, 0.0], [0.2, -0.1], [-0.3, 0.3]] {
            assert_eq!(ansatz.b2_at(x), expect);
        }
        // unsmoothed limit with equal presets: b = -i |xi|
        let b = limit_amplitude(&steep(), &steep(), &frame, [0.1, 0.0]);
        let xi_len = dot(frame.xi, frame.xi).sqrt();
        assert!((b - C64::new(0.0, -xi_len)).norm() < 1e-13);
    }

    #[test]
    fn probing_moduli_follow_the_frame_directions() {
        let d = domain();
        let moll1 = mollify(&steep().sample(d), 0.15).unwrap();
        let moll2 = mollify(&gentle().sample(d), 0.15).unwrap();
        let frame = isozaki_params([1.0, 2.0], 10.0).unwrap();
        let ansatz = Ansatz::new(frame, &moll1, &moll2, false);
        for x in [[0.3, -0.4], [-0.14, 0.02]] {
            let m1 = ansatz.phi1_at(x).norm();
            assert!((m1 - (-dot(frame.eta1, x)).exp()).abs() < 1e-13 * m1.max(1.0));
            let m2 = ansatz.phi2_at(x).norm();
            let want = dot(frame.eta2, x).exp() * ansatz.b2_at(x).norm();
            assert!((m2 - want).abs() < 1e-13 * m2.max(1.0));
        }
        // electric variant: unit amplitude
        let electric = Ansatz::new(frame, &moll1, &moll2, true);
        assert_eq!(electric.b2_at([0.1, 0.1]), C64::new(1.0, 0.0));
    }

    #[test]
    fn phase_difference_approaches_its_limit() {
        let d = domain();
        let a1 = APreset(vec![]);
        let a2 = steep();
        let s2 = a2.sample(d);
        let x = [0.12, -0.08];
        let mut errs = Vec::new();
        for tau in [8.0, 16.0, 32.0] {
            let frame = isozaki_params([2.0, 1.0], tau).unwrap();
            let m1 = mollify(&a1.sample(d), frame.delta).unwrap();
            let m2 = mollify(&s2, frame.delta).unwrap();
            let ansatz = Ansatz::new(frame, &m1, &m2, false);
            let lim = limit_phase(&a1, &a2, frame.eta, x);
            errs.push((ansatz.psi1_at(x) - ansatz.psi2_at(x) - lim).abs());
        }
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "no approach: {errs:?}");
    }
}
