//! Nodal fields on the rectangle lattice and the discrete calculus on them.
//!
//! All derivative stencils here are second order: centered differences where
//! both neighbors exist, one-sided three-point stencils on the boundary rows.

use num_complex::Complex64 as C64;

use crate::domain::Domain2D;
use crate::error::{Error, Result};

/// Real scalar samples on the full `n1 x n2` lattice, row-major by `iy`.
#[derive(Clone, Debug)]
pub struct ScalarField {
    pub domain: Domain2D,
    pub values: Vec<f64>,
}

/// Real vector field, component-wise on the full lattice.
#[derive(Clone, Debug)]
pub struct VectorField2D {
    pub domain: Domain2D,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
}

/// Complex scalar samples on the full lattice (solution fields, integrands).
#[derive(Clone, Debug)]
pub struct ComplexField {
    pub domain: Domain2D,
    pub values: Vec<C64>,
}

/// Complex samples along the canonical boundary walk.
#[derive(Clone, Debug)]
pub struct BoundaryFunction {
    pub domain: Domain2D,
    pub values: Vec<C64>,
}

impl ScalarField {
    pub fn zeros(domain: Domain2D) -> Self {
        ScalarField { domain, values: vec![0.0; domain.num_nodes()] }
    }

    pub fn from_fn(domain: Domain2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(domain.num_nodes());
        for iy in 0..domain.n2 {
            for ix in 0..domain.n1 {
                let p = domain.pos(ix, iy);
                values.push(f(p[0], p[1]));
            }
        }
        ScalarField { domain, values }
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.domain.node_index(ix, iy)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Trapezoid integral over the closed rectangle.
    pub fn integral(&self) -> f64 {
        let d = &self.domain;
        let mut total = 0.0;
        for iy in 0..d.n2 {
            for ix in 0..d.n1 {
                total += d.area_weight(ix, iy) * self.at(ix, iy);
            }
        }
        total
    }
}

impl VectorField2D {
    pub fn zeros(domain: Domain2D) -> Self {
        let n = domain.num_nodes();
        VectorField2D { domain, a1: vec![0.0; n], a2: vec![0.0; n] }
    }

    pub fn from_fn(domain: Domain2D, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let n = domain.num_nodes();
        let mut a1 = Vec::with_capacity(n);
        let mut a2 = Vec::with_capacity(n);
        for iy in 0..domain.n2 {
            for ix in 0..domain.n1 {
                let p = domain.pos(ix, iy);
                let (v1, v2) = f(p[0], p[1]);
                a1.push(v1);
                a2.push(v2);
            }
        }
        VectorField2D { domain, a1, a2 }
    }

    pub fn at(&self, ix: usize, iy: usize) -> (f64, f64) {
        let k = self.domain.node_index(ix, iy);
        (self.a1[k], self.a2[k])
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for k in 0..self.a1.len() {
            m = m.max((self.a1[k] * self.a1[k] + self.a2[k] * self.a2[k]).sqrt());
        }
        m
    }
}

impl ComplexField {
    pub fn zeros(domain: Domain2D) -> Self {
        ComplexField { domain, values: vec![C64::new(0.0, 0.0); domain.num_nodes()] }
    }

    pub fn from_fn(domain: Domain2D, f: impl Fn(f64, f64) -> C64) -> Self {
        let mut out = ComplexField::zeros(domain);
        for iy in 0..domain.n2 {
            for ix in 0..domain.n1 {
                let p = domain.pos(ix, iy);
                out.values[domain.node_index(ix, iy)] = f(p[0], p[1]);
            }
        }
        out
    }

    pub fn at(&self, ix: usize, iy: usize) -> C64 {
        self.values[self.domain.node_index(ix, iy)]
    }

    /// Interior L2 norm: `sqrt(h1 h2 sum_interior |u|^2)`. Boundary nodes are
    /// excluded, consistent with the interior inner product under which the
    /// eigenvectors are orthonormal.
    pub fn norm_l2_interior(&self) -> f64 {
        let d = &self.domain;
        let mut s = 0.0;
        for iy in 1..d.n2 - 1 {
            for ix in 1..d.n1 - 1 {
                s += self.at(ix, iy).norm_sqr();
            }
        }
        (s * d.cell_area()).sqrt()
    }
}

impl BoundaryFunction {
    pub fn zeros(domain: Domain2D) -> Self {
        BoundaryFunction { domain, values: vec![C64::new(0.0, 0.0); domain.num_boundary()] }
    }

    pub fn from_fn(domain: Domain2D, f: impl Fn(f64, f64) -> C64) -> Self {
        let values = domain
            .boundary_walk()
            .iter()
            .map(|b| {
                let p = domain.pos(b.ix, b.iy);
                f(p[0], p[1])
            })
            .collect();
        BoundaryFunction { domain, values }
    }

    /// L2(Gamma) norm with the trapezoid arc weights.
    pub fn norm_l2(&self) -> f64 {
        let walk = self.domain.boundary_walk();
        let mut s = 0.0;
        for (b, v) in walk.iter().zip(&self.values) {
            s += b.weight * v.norm_sqr();
        }
        s.sqrt()
    }

    /// Hermitian boundary pairing `<f, g> = int_Gamma f conj(g) dsigma`.
    pub fn inner(&self, other: &BoundaryFunction) -> C64 {
        let walk = self.domain.boundary_walk();
        let mut s = C64::new(0.0, 0.0);
        for ((b, f), g) in walk.iter().zip(&self.values).zip(&other.values) {
            s += b.weight * f * g.conj();
        }
        s
    }

    /// Unconjugated boundary integral `int_Gamma f g dsigma`.
    pub fn pair(&self, other: &BoundaryFunction) -> C64 {
        let walk = self.domain.boundary_walk();
        let mut s = C64::new(0.0, 0.0);
        for ((b, f), g) in walk.iter().zip(&self.values).zip(&other.values) {
            s += b.weight * f * g;
        }
        s
    }
}

/// Second-order partial derivative of real full-grid samples along one axis:
/// centered in the interior of the axis range, one-sided three-point at the
/// two extreme rows.
fn d_axis(domain: &Domain2D, values: &[f64], axis: usize, ix: usize, iy: usize) -> f64 {
    let (n, h) = if axis == 0 { (domain.n1, domain.h1()) } else { (domain.n2, domain.h2()) };
    let i = if axis == 0 { ix } else { iy };
    let v = |j: usize| {
        if axis == 0 {
            values[domain.node_index(j, iy)]
        } else {
            values[domain.node_index(ix, j)]
        }
    };
    if i >= 1 && i <= n - 2 {
        (v(i + 1) - v(i - 1)) / (2.0 * h)
    } else if i == 0 {
        (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h)
    } else {
        (3.0 * v(n - 1) - 4.0 * v(n - 2) + v(n - 3)) / (2.0 * h)
    }
}

/// Discrete curl `d1 a2 - d2 a1` on the full lattice.
pub fn curl(field: &VectorField2D) -> ScalarField {
    let d = field.domain;
    let mut out = ScalarField::zeros(d);
    for iy in 0..d.n2 {
        for ix in 0..d.n1 {
            let v = d_axis(&d, &field.a2, 0, ix, iy) - d_axis(&d, &field.a1, 1, ix, iy);
            out.values[d.node_index(ix, iy)] = v;
        }
    }
    out
}

/// Discrete gradient of real full-grid samples.
pub fn grad(field: &ScalarField) -> VectorField2D {
    let d = field.domain;
    let mut out = VectorField2D::zeros(d);
    for iy in 0..d.n2 {
        for ix in 0..d.n1 {
            let k = d.node_index(ix, iy);
            out.a1[k] = d_axis(&d, &field.values, 0, ix, iy);
            out.a2[k] = d_axis(&d, &field.values, 1, ix, iy);
        }
    }
    out
}

/// Discrete divergence `d1 a1 + d2 a2` on the full lattice.
pub fn div(field: &VectorField2D) -> ScalarField {
    let d = field.domain;
    let mut out = ScalarField::zeros(d);
    for iy in 0..d.n2 {
        for ix in 0..d.n1 {
            let v = d_axis(&d, &field.a1, 0, ix, iy) + d_axis(&d, &field.a2, 1, ix, iy);
            out.values[d.node_index(ix, iy)] = v;
        }
    }
    out
}

/// Verify that two vector potentials agree exactly on the closed collar
/// (collar nodes plus the boundary itself). Sampled presets either share the
/// identical arithmetic on the collar or vanish there, so the check demands
/// bit-exact equality; any nonzero gap is a configuration error.
pub fn check_collar(a1: &VectorField2D, a2: &VectorField2D) -> Result<()> {
    if a1.domain != a2.domain {
        return Err(Error::ShapeMismatch { expected: a1.a1.len(), got: a2.a1.len() });
    }
    let d = a1.domain;
    let mut worst = (0.0f64, 0usize, 0usize);
    for iy in 0..d.n2 {
        for ix in 0..d.n1 {
            if d.in_collar(ix, iy) {
                let k = d.node_index(ix, iy);
                let diff =
                    ((a1.a1[k] - a2.a1[k]).powi(2) + (a1.a2[k] - a2.a2[k]).powi(2)).sqrt();
                if diff > worst.0 {
                    worst = (diff, ix, iy);
                }
            }
        }
    }
    if worst.0 > 0.0 {
        return Err(Error::CollarViolation { max_diff: worst.0, ix: worst.1, iy: worst.2 });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d65() -> Domain2D {
        Domain2D::new(1.0, 1.0, 65, 65, 0.15).unwrap()
    }

    #[test]
    fn gradient_field_has_small_curl() {
        // curl grad p = 0 in the continuum; stencils leave O(h^2).
        let p = |x: f64, y: f64| (2.0 * x).sin() * (3.0 * y).cos();
        let d = d65();
        let gp = VectorField2D::from_fn(d, |x, y| {
            (2.0 * (2.0 * x).cos() * (3.0 * y).cos(), -3.0 * (2.0 * x).sin() * (3.0 * y).sin())
        });
        let c = curl(&gp);
        let _ = p;
        assert!(c.max_abs() < 2e-2, "curl of gradient {}", c.max_abs());
    }

    #[test]
    fn curl_second_order_refinement() {
        // Smooth field with known curl; error should fall ~4x per halving.
        let exact = |x: f64, y: f64| {
            // A = (-y g, x g), g = exp(-(x^2+y^2)): curl = 2g + (x dx g + y dy g) adjusted.
            let g = (-(x * x + y * y)).exp();
            // curl = d1(x g) - d2(-y g) = g + x gx + g + y gy = 2g - 2x^2 g - 2y^2 g.
            2.0 * g * (1.0 - x * x - y * y)
        };
        let build = |n: usize| {
            let d = Domain2D::new(1.0, 1.0, n, n, 0.1).unwrap();
            let f = VectorField2D::from_fn(d, |x, y| {
                let g = (-(x * x + y * y)).exp();
                (-y * g, x * g)
            });
            let c = curl(&f);
            let mut err = 0.0f64;
            for iy in 0..d.n2 {
                for ix in 0..d.n1 {
                    let p = d.pos(ix, iy);
                    err = err.max((c.at(ix, iy) - exact(p[0], p[1])).abs());
                }
            }
            err
        };
        let e33 = build(33);
        let e65 = build(65);
        let ratio = e33 / e65;
        assert!(
            ratio > 3.0 && ratio < 5.0,
            "expected ~4x decay, got {ratio} ({e33} -> {e65})"
        );
    }

    #[test]
    fn windowed_rotation_has_unit_curl_on_plateau() {
        // A = (-x2, x1)/2 inside the plateau of a smooth window: curl = 1 there.
        let d = d65();
        let f = VectorField2D::from_fn(d, |x, y| {
            let r = (x * x + y * y).sqrt();
            let w = crate::preset::smooth_step((0.30 - r) / 0.12);
            (-0.5 * y * w, 0.5 * x * w)
        });
        let c = curl(&f);
        for iy in 0..d.n2 {
            for ix in 0..d.n1 {
                let p = d.pos(ix, iy);
                let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                // The window is identically 1 for r <= 0.18; stay one stencil
                // width inside that plateau.
                if r < 0.18 - 2.0 * d.h_max() {
                    assert!(
                        (c.at(ix, iy) - 1.0).abs() < 1e-10,
                        "curl at r={r}: {}",
                        c.at(ix, iy)
                    );
                }
            }
        }
    }

    #[test]
    fn collar_check_flags_and_accepts() {
        let d = d65();
        let zero = VectorField2D::zeros(d);
        let interior = VectorField2D::from_fn(d, |x, y| {
            let r = ((x * x + y * y).sqrt() / 0.25).min(1.0);
            let b = crate::preset::bump(r);
            (b, -b)
        });
        assert!(check_collar(&zero, &interior).is_ok());
        let touching = VectorField2D::from_fn(d, |x, _| (x, 0.0));
        match check_collar(&zero, &touching) {
            Err(Error::CollarViolation { max_diff, .. }) => assert!(max_diff > 0.0),
            other => panic!("expected collar violation, got {other:?}"),
        }
    }
}
