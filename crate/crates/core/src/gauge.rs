//! Gauge functions and the boundary-data obstruction they create.
//!
//! For a curl-free, compactly supported difference of vector potentials the
//! radial line integral
//!
//!   p(x) = integral_0^1  x . A(t x)  dt
//!
//! is a primitive: `grad p = A`. Because `A` vanishes near the boundary, `p`
//! is constant outside the support hull, and after subtracting that constant
//! it vanishes on the whole collar. Shifting a vector potential by `grad p`
//! then amounts to conjugating the operator with the diagonal unitary
//! `e^{i p}`, which leaves the Dirichlet eigenvalues and the boundary traces
//! of eigenfunctions fixed — the classic non-uniqueness obstruction for
//! boundary spectral data. The discretization reproduces the covariance up to
//! `O(h^2)` (midpoint link phases vs. exact link integrals of `grad p`), and
//! [`obstruction_check`] measures exactly that defect.

use serde::Serialize;

use crate::domain::Domain2D;
use crate::error::{Error, Result};
use crate::field::{self, ScalarField, VectorField2D};
use crate::linalg::small::principal_angle_cosines;
use crate::operator::MagneticOperator;
use crate::preset::{APreset, APrimitive, VPreset, VPrimitive};
use crate::spectral::{clusters, eigensolve};

/// A scalar gauge function with its discrete gradient and a pointwise
/// certificate of how well that gradient reproduces the generating potential
/// difference.
#[derive(Clone)]
pub struct GaugeFunction {
    pub p: ScalarField,
    /// Central-difference gradient of `p` on the full node set.
    pub grad: VectorField2D,
    /// `p` along the boundary walk; zero up to quadrature error.
    pub trace: Vec<f64>,
    /// `max_x |grad_d p(x) - A(x)|` over all nodes.
    pub certificate: f64,
}

impl GaugeFunction {
    /// The inverse element: `-p` undoes the transform of `p`.
    pub fn negated(&self) -> GaugeFunction {
        let mut p = self.p.clone();
        for v in &mut p.values {
            *v = -*v;
        }
        let mut grad = self.grad.clone();
        for v in grad.a1.iter_mut().chain(grad.a2.iter_mut()) {
            *v = -*v;
        }
        GaugeFunction {
            p,
            grad,
            trace: self.trace.iter().map(|t| -t).collect(),
            certificate: self.certificate,
        }
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[0, 1]`,
/// by Newton iteration on the Legendre recurrence.
pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..60 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=n {
                let j = j as f64;
                let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        // map from [-1, 1]; the cosine seed walks roots right to left
        rule.push((0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule
}

/// `t in (0, 1)` where the ray `t -> t x` crosses a support circle; the
/// integrand is smooth inside each resulting segment.
fn support_crossings(x: [f64; 2], diff: &APreset, cuts: &mut Vec<f64>) {
    let a = x[0] * x[0] + x[1] * x[1];
    for prim in &diff.0 {
        let (c, r) = prim.support();
        let b = -2.0 * (x[0] * c[0] + x[1] * c[1]);
        let cc = c[0] * c[0] + c[1] * c[1] - r * r;
        let disc = b * b - 4.0 * a * cc;
        if disc <= 0.0 {
            continue;
        }
        let s = disc.sqrt();
        for t in [(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)] {
            if t > 0.0 && t < 1.0 {
                cuts.push(t);
            }
        }
    }
}

/// Radial primitive of a closed potential difference, normalized to vanish
/// outside the support hull.
///
/// Refuses a difference whose analytic curl does not vanish — the radial
/// formula produces a primitive only for closed forms. The certificate
/// compares the *discrete* gradient of the sampled `p` against the analytic
/// difference, so it carries the `O(h^2)` of the stencil, not the quadrature.
pub fn gauge_function(domain: Domain2D, diff: &APreset) -> Result<GaugeFunction> {
    let mut curl_max = 0.0f64;
    let mut a_max = 0.0f64;
    for iy in 0..domain.n2 {
        for ix in 0..domain.n1 {
            let x = domain.pos(ix, iy);
            curl_max = curl_max.max(diff.curl(x).abs());
            let a = diff.eval(x);
            a_max = a_max.max((a[0] * a[0] + a[1] * a[1]).sqrt());
        }
    }
    if curl_max > 1e-8 * (1.0 + a_max) {
        return Err(Error::Hypothesis(format!(
            "gauge function needs a closed difference; curl reaches {curl_max:.3e}"
        )));
    }

    let rule = gauss_legendre(16);
    let mut p = ScalarField::zeros(domain);
    let mut cuts = Vec::new();
    for iy in 0..domain.n2 {
        for ix in 0..domain.n1 {
            let x = domain.pos(ix, iy);
            if x[0] == 0.0 && x[1] == 0.0 {
                continue;
            }
            cuts.clear();
            cuts.push(0.0);
            cuts.push(1.0);
            support_crossings(x, diff, &mut cuts);
            cuts.sort_by(f64::total_cmp);
            let mut acc = 0.0;
            for seg in cuts.windows(2) {
                // four panels per smooth segment: the profile is flat to all
                // orders at the support edge, which starves a single rule
                let panel = (seg[1] - seg[0]) / 4.0;
                if panel <= 0.0 {
                    continue;
                }
                for q in 0..4 {
                    let left = seg[0] + panel * q as f64;
                    for &(t, w) in &rule {
                        let s = left + panel * t;
                        let a = diff.eval([s * x[0], s * x[1]]);
                        acc += panel * w * (x[0] * a[0] + x[1] * a[1]);
                    }
                }
            }
            p.values[domain.node_index(ix, iy)] = acc;
        }
    }

    // the exterior constant, read off the corners
    let c = 0.25
        * (p.at(0, 0) + p.at(domain.n1 - 1, 0) + p.at(0, domain.n2 - 1)
            + p.at(domain.n1 - 1, domain.n2 - 1));
    for v in &mut p.values {
        *v -= c;
    }

    let grad = field::grad(&p);
    let mut certificate = 0.0f64;
    for iy in 0..domain.n2 {
        for ix in 0..domain.n1 {
            let k = domain.node_index(ix, iy);
            let a = diff.eval(domain.pos(ix, iy));
            let gap = ((grad.a1[k] - a[0]).powi(2) + (grad.a2[k] - a[1]).powi(2)).sqrt();
            certificate = certificate.max(gap);
        }
    }
    let trace = domain.boundary_walk().iter().map(|b| p.at(b.ix, b.iy)).collect();
    Ok(GaugeFunction { p, grad, trace, certificate })
}

/// The gauge action on sampled potentials: `A -> A + grad p`, `V` untouched.
pub fn gauge_transform(
    a: &VectorField2D,
    v: &ScalarField,
    p: &GaugeFunction,
) -> (VectorField2D, ScalarField) {
    assert_eq!(a.domain, p.p.domain, "gauge function domain");
    let mut out = a.clone();
    for (o, g) in out.a1.iter_mut().zip(&p.grad.a1) {
        *o += g;
    }
    for (o, g) in out.a2.iter_mut().zip(&p.grad.a2) {
        *o += g;
    }
    (out, v.clone())
}

/// Eigenvalue and boundary-trace agreement for one cluster of the unprimed
/// spectrum.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClusterGap {
    /// First eigenvalue of the cluster.
    pub lambda: f64,
    pub dim: usize,
    /// `max |lambda_k - lambda'_k| / max(|lambda_k|, 1)` over the cluster.
    pub lambda_gap_rel: f64,
    /// `sin` of the largest principal angle between the flux-trace subspaces.
    pub trace_distance: f64,
}

/// What a gauge pocket does (and fails to do) to boundary spectral data.
#[derive(Clone, Debug, Serialize)]
pub struct ObstructionReport {
    pub k: usize,
    /// `sup |A' - A|`: the potentials differ pointwise by this much.
    pub potential_gap: f64,
    pub lambda_gap_max_rel: f64,
    pub trace_distance_max: f64,
    pub clusters: Vec<ClusterGap>,
}

/// Builds the gauge-shifted partner `A + grad p` for a scalar pocket
/// `p = amp rho(|x-c|/r)`, eigensolves both operators, and reports how close
/// the two boundary spectral data sets stay while the potentials visibly
/// differ. Degenerate clusters are compared by principal angles between their
/// flux-trace subspaces; the eigenvalue list is cut at `k`, so a cluster
/// straddling the cut is compared on its computed members only.
pub fn obstruction_check(
    domain: Domain2D,
    a: &APreset,
    v: &VPreset,
    pocket: &VPrimitive,
    k: usize,
    seed: u64,
) -> Result<ObstructionReport> {
    let &VPrimitive::VBump { center, radius, amplitude } = pocket else {
        return Err(Error::Hypothesis(
            "the gauge pocket must be a compactly supported bump".into(),
        ));
    };
    VPreset(vec![*pocket]).validate_interior_support(&domain)?;

    let mut shifted = a.clone();
    shifted.0.push(APrimitive::GradBump { center, radius, amplitude });
    let grad = APreset(vec![APrimitive::GradBump { center, radius, amplitude }]);
    let mut potential_gap = 0.0f64;
    for iy in 0..domain.n2 {
        for ix in 0..domain.n1 {
            let g = grad.eval(domain.pos(ix, iy));
            potential_gap = potential_gap.max((g[0] * g[0] + g[1] * g[1]).sqrt());
        }
    }

    let op1 = MagneticOperator::from_presets(domain, a, v);
    let op2 = MagneticOperator::from_presets(domain, &shifted, v);
    let (d1, _) = eigensolve(&op1, k, seed, false)?;
    let (d2, _) = eigensolve(&op2, k, seed, false)?;

    // exact boundary measure in the Gram: scale each trace by sqrt(sigma),
    // then orthonormalize so the cross-Gram singular values are angle cosines
    let sigma: Vec<f64> = domain.boundary_walk().iter().map(|b| b.weight).collect();
    let weigh = |tr: &crate::field::BoundaryFunction| -> Vec<crate::C64> {
        tr.values.iter().zip(&sigma).map(|(v, s)| v * s.sqrt()).collect()
    };

    let mut report = ObstructionReport {
        k,
        potential_gap,
        lambda_gap_max_rel: 0.0,
        trace_distance_max: 0.0,
        clusters: Vec::new(),
    };
    for range in clusters(&d1.lambdas, 1e-6) {
        let mut gap = 0.0f64;
        for i in range.clone() {
            gap = gap.max((d1.lambdas[i] - d2.lambdas[i]).abs() / d1.lambdas[i].abs().max(1.0));
        }
        let mut u: Vec<_> = range.clone().map(|i| weigh(&d1.flux[i])).collect();
        let mut w: Vec<_> = range.clone().map(|i| weigh(&d2.flux[i])).collect();
        orthonormalize(&mut u);
        orthonormalize(&mut w);
        let cosines = principal_angle_cosines(&u, &w, 1.0)?;
        let cos_min = cosines.iter().copied().fold(f64::INFINITY, f64::min);
        let dist = (1.0 - cos_min.min(1.0).powi(2)).max(0.0).sqrt();
        report.clusters.push(ClusterGap {
            lambda: d1.lambdas[range.start],
            dim: range.len(),
            lambda_gap_rel: gap,
            trace_distance: dist,
        });
        report.lambda_gap_max_rel = report.lambda_gap_max_rel.max(gap);
        report.trace_distance_max = report.trace_distance_max.max(dist);
    }
    Ok(report)
}

/// In-place modified Gram-Schmidt, two passes; cluster dimensions are tiny.
fn orthonormalize(vs: &mut [Vec<crate::C64>]) {
    for i in 0..vs.len() {
        for _ in 0..2 {
            for j in 0..i {
                let proj: crate::C64 =
                    vs[j].iter().zip(&vs[i]).map(|(a, b)| a.conj() * b).sum();
                let (head, tail) = vs.split_at_mut(i);
                for (a, b) in head[j].iter().zip(tail[0].iter_mut()) {
                    *b -= proj * a;
                }
            }
        }
        let norm: f64 = vs[i].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut vs[i] {
            *z /= norm;
        }
    }
}
