//! Scattering functionals of an operator pair and their exact term-by-term
//! representation.
//!
//! For one probing frame the functionals `S_j = (dtn_j Phi1, Phi2)` admit a
//! closed expansion into two volume integrals, a boundary integral, and one
//! resolvent correction; [`ScatteringContext::representation`] evaluates
//! every term and reports how far their sum sits from the directly computed
//! `S_j` (the residual is pure discretization, second order in `h`). On top
//! of that sit the large-`tau` probes: [`magnetic_limit_target`] and
//! [`electric_limit_target`] are the limits that expose `A1 - A2` and
//! `V1 - V2`, and [`tau_sweep`] measures the approach along a `tau` ladder,
//! either by direct solves or purely from boundary spectral data.

use std::cell::OnceCell;

use serde::Serialize;

use crate::ansatz::{limit_amplitude, limit_phase, Ansatz};
use crate::domain::{Domain2D, Face};
use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::frame::{dot, isozaki_params, IsozakiFrame};
use crate::mollify::{mollify, MollifiedPotential};
use crate::operator::MagneticOperator;
use crate::preset::{APreset, VPreset};
use crate::resolvent::{spectral_functional_difference, Resolvent};
use crate::spectral::SpectralData;
use crate::table::ConvergenceTable;
use crate::C64;

/// Two operators under comparison on a shared grid, kept with the presets
/// that built them (the limit targets and the smoothing need the analytic
/// fields, not just the assembled matrices).
pub struct OperatorPair {
    pub domain: Domain2D,
    pub a1: APreset,
    pub v1: VPreset,
    pub a2: APreset,
    pub v2: VPreset,
    pub op1: MagneticOperator,
    pub op2: MagneticOperator,
}

impl OperatorPair {
    /// Validates that every preset support stays out of the boundary collar
    /// before assembling the two operators.
    pub fn new(
        domain: Domain2D,
        a1: APreset,
        v1: VPreset,
        a2: APreset,
        v2: VPreset,
    ) -> Result<Self> {
        a1.validate_interior_support(&domain)?;
        a2.validate_interior_support(&domain)?;
        v1.validate_interior_support(&domain)?;
        v2.validate_interior_support(&domain)?;
        let op1 = MagneticOperator::from_presets(domain, &a1, &v1);
        let op2 = MagneticOperator::from_presets(domain, &a2, &v2);
        Ok(OperatorPair { domain, a1, v1, a2, v2, op1, op2 })
    }
}

/// Everything reusable at one `tau`: the smoothed potentials at scale
/// `delta = tau^{-1/3}` and (lazily, since the spectral route never needs
/// them) one factorization per operator at `lambda = (tau + i)^2`. A single
/// context serves every frequency `xi` probed at this `tau`.
pub struct ScatteringContext<'a> {
    pub pair: &'a OperatorPair,
    pub tau: f64,
    pub lambda: C64,
    pub moll1: MollifiedPotential,
    pub moll2: MollifiedPotential,
    res1: OnceCell<Resolvent<'a>>,
    res2: OnceCell<Resolvent<'a>>,
}

/// The evaluated right-hand side of one functional's representation,
/// alongside the directly computed value. `assembled` is by construction the
/// exact floating-point sum of the four stored terms, so the residual is
/// attributable to the terms themselves, never to bookkeeping.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SideTerms {
    /// `2 sqrt(lambda) int eta2.(A_j - A2#) b2 E P dx`
    pub volume_magnetic: C64,
    /// `int (V_j b2 - q_j2) E P dx`
    pub volume_electric: C64,
    /// `-i oint E P (b2 sqrt(lambda) eta2 + b2 grad psi2 + i grad b2 + b2 A_j) . nu`
    pub boundary: C64,
    /// `-int [R_j (2 sqrt(lambda) eta1.(A_j - A1#) + q_j1) Phi1] w_j dx`
    pub resolvent: C64,
    /// Cauchy-Schwarz cap on `|resolvent|`: `||source|| ||weight|| / (2 tau)`,
    /// valid because the discrete resolvent norm is at most `1/|Im lambda|`.
    pub resolvent_bound: f64,
    /// `S_j` from the solve: `(dtn_j Phi1 trace) paired with Phi2 trace`.
    pub direct: C64,
}

impl SideTerms {
    pub fn assembled(&self) -> C64 {
        self.volume_magnetic + self.volume_electric + self.boundary + self.resolvent
    }

    pub fn abs_residual(&self) -> f64 {
        (self.direct - self.assembled()).norm()
    }

    pub fn rel_residual(&self) -> f64 {
        let d = self.direct.norm();
        if d > 0.0 {
            self.abs_residual() / d
        } else {
            self.abs_residual()
        }
    }
}

/// Term-by-term evaluation of both functionals' representations at one
/// frame, with the multiplier fields kept for inspection.
#[derive(Serialize)]
pub struct RepresentationTerms {
    pub tau: f64,
    pub xi: [f64; 2],
    pub first: SideTerms,
    pub second: SideTerms,
    #[serde(skip)]
    pub q11: ComplexField,
    #[serde(skip)]
    pub q12: ComplexField,
    #[serde(skip)]
    pub q21: ComplexField,
    #[serde(skip)]
    pub q22: ComplexField,
}

impl<'a> ScatteringContext<'a> {
    pub fn new(pair: &'a OperatorPair, tau: f64) -> Result<Self> {
        let d = pair.domain;
        let h = d.h1().max(d.h2());
        if tau * h > 0.5 {
            return Err(Error::GridTooCoarse(format!(
                "tau {tau} is unresolved: tau * max(h1,h2) = {:.3} > 0.5 \
                 (about twelve nodes per oscillation); this grid admits tau <= {:.3}",
                tau * h,
                0.5 / h
            )));
        }
        let delta = tau.powf(-1.0 / 3.0);
        let moll1 = mollify(&pair.a1.sample(d), delta)?;
        let moll2 = mollify(&pair.a2.sample(d), delta)?;
        let s = C64::new(tau, 1.0);
        Ok(ScatteringContext {
            pair,
            tau,
            lambda: s * s,
            moll1,
            moll2,
            res1: OnceCell::new(),
            res2: OnceCell::new(),
        })
    }

    pub fn frame(&self, xi: [f64; 2]) -> Result<IsozakiFrame> {
        isozaki_params(xi, self.tau)
    }

    fn resolvent<'b>(
        &self,
        cell: &'b OnceCell<Resolvent<'a>>,
        op: &'a MagneticOperator,
    ) -> Result<&'b Resolvent<'a>> {
        if cell.get().is_none() {
            let r = Resolvent::new(op, self.lambda)?;
            let _ = cell.set(r);
        }
        Ok(cell.get().expect("just set"))
    }

    fn res1(&self) -> Result<&Resolvent<'a>> {
        self.resolvent(&self.res1, &self.pair.op1)
    }

    fn res2(&self) -> Result<&Resolvent<'a>> {
        self.resolvent(&self.res2, &self.pair.op2)
    }

    fn ansatz(&self, frame: &IsozakiFrame, electric: bool) -> Ansatz<'_> {
        assert_eq!(frame.tau, self.tau, "frame built for a different tau");
        Ansatz::new(*frame, &self.moll1, &self.moll2, electric)
    }

    /// Both functionals by direct solves: `S_j = (dtn_j Phi1, Phi2)` with the
    /// un-conjugated boundary pairing.
    pub fn scattering_pair(&self, frame: &IsozakiFrame, electric: bool) -> Result<(C64, C64)> {
        let a = self.ansatz(frame, electric);
        let f1 = a.phi1_trace();
        let f2 = a.phi2_trace();
        let s1 = self.res1()?.dtn(&f1)?.pair(&f2);
        let s2 = self.res2()?.dtn(&f1)?.pair(&f2);
        Ok((s1, s2))
    }

    /// `S1 - S2` from boundary spectral data alone (no solves): the deep-depth
    /// limit of the spectral functional applied to the probing traces.
    pub fn spectral_difference(
        &self,
        frame: &IsozakiFrame,
        electric: bool,
        data1: &SpectralData,
        data2: &SpectralData,
        mu_cut: Option<f64>,
    ) -> C64 {
        let a = self.ansatz(frame, electric);
        spectral_functional_difference(
            data1,
            data2,
            &a.phi1_trace(),
            &a.phi2_trace(),
            self.lambda,
            mu_cut,
        )
    }

    /// Evaluates every term of both representations and the direct values.
    ///
    /// The multiplier symbols are assembled from the analytic preset fields
    /// (`A_j`, `div A_j`, `V_j`), the smoothed potentials evaluated exactly at
    /// the nodes, and centered stencils of the transport phases and matched
    /// amplitude — the same stencils the operator's expansion carries, so the
    /// residual cancels consistently at second order.
    pub fn representation(
        &self,
        frame: &IsozakiFrame,
        electric: bool,
    ) -> Result<RepresentationTerms> {
        let d = self.pair.domain;
        let a = self.ansatz(frame, electric);
        let psi1 = a.psi1_field();
        let psi2 = a.psi2_field();
        let b2 = a.b2_field();
        let sl = frame.sqrt_lambda;
        let tau = self.tau;
        let (e1, e2) = (frame.eta1, frame.eta2);
        let i = C64::new(0.0, 1.0);

        let n = d.num_nodes();
        let mut src1 = vec![C64::new(0.0, 0.0); d.num_interior()];
        let mut src2 = src1.clone();
        let mut out1 = vec![C64::new(0.0, 0.0); n];
        let mut out2 = out1.clone();
        let mut q11 = ComplexField::zeros(d);
        let mut q12 = ComplexField::zeros(d);
        let mut q21 = ComplexField::zeros(d);
        let mut q22 = ComplexField::zeros(d);
        let mut va1 = C64::new(0.0, 0.0);
        let mut va2 = va1;
        let mut vv1 = va1;
        let mut vv2 = va1;

        for iy in 0..d.n2 {
            for ix in 0..d.n1 {
                let k = d.node_index(ix, iy);
                let x = d.pos(ix, iy);
                let aw = d.area_weight(ix, iy);

                let a1v = self.pair.a1.eval(x);
                let a2v = self.pair.a2.eval(x);
                let da1 = self.pair.a1.div(x);
                let da2 = self.pair.a2.div(x);
                let v1 = self.pair.v1.eval(x);
                let v2 = self.pair.v2.eval(x);
                let m1 = self.moll1.eval(x);
                let m2 = self.moll2.eval(x);

                let p1v = psi1.value(ix, iy);
                let g1 = psi1.grad(ix, iy);
                let l1 = psi1.laplacian(ix, iy);
                let p2v = psi2.value(ix, iy);
                let g2 = psi2.grad(ix, iy);
                let l2 = psi2.laplacian(ix, iy);
                let bv = b2.value(ix, iy);
                let bg = b2.grad(ix, iy);
                let bl = b2.laplacian(ix, iy);

                let q11v = -i * da1
                    + dot(a1v, a1v)
                    + v1
                    + 2.0 * dot(a1v, g1)
                    - i * l1
                    + dot(g1, g1);
                let q21v = -i * da2
                    + dot(a2v, a2v)
                    + v2
                    + 2.0 * dot(a2v, g1)
                    - i * l1
                    + dot(g1, g1);
                let qj2 = |av: [f64; 2], dav: f64| {
                    bl - 2.0 * i * (g2[0] * bg[0] + g2[1] * bg[1])
                        - 2.0 * i * (bg[0] * av[0] + bg[1] * av[1])
                        + (-i * l2
                            - dot(g2, g2)
                            - 2.0 * dot(g2, av)
                            - i * dav
                            - dot(av, av))
                            * bv
                };
                let q12v = qj2(a1v, da1);
                let q22v = qj2(a2v, da2);
                q11.values[k] = q11v;
                q12.values[k] = q12v;
                q21.values[k] = q21v;
                q22.values[k] = q22v;

                // E P = e^{i sqrt(lambda)(eta1-eta2).x} e^{i(psi1-psi2)};
                // with sqrt(lambda) = tau + i the modulus is e^{-g}
                let g = dot(e1, x) - dot(e2, x);
                let ep = C64::from_polar((-g).exp(), tau * g + (p1v - p2v));
                va1 += 2.0 * sl * dot(e2, [a1v[0] - m2[0], a1v[1] - m2[1]]) * bv * ep * aw;
                va2 += 2.0 * sl * dot(e2, [a2v[0] - m2[0], a2v[1] - m2[1]]) * bv * ep * aw;
                vv1 += (v1 * bv - q12v) * ep * aw;
                vv2 += (v2 * bv - q22v) * ep * aw;

                // e^{-i sqrt(lambda) eta2.x} e^{-i psi2}
                let s2x = dot(e2, x);
                let em2 = C64::from_polar(s2x.exp(), -(tau * s2x + p2v));
                out1[k] = (2.0 * sl * dot(e2, [a1v[0] - m2[0], a1v[1] - m2[1]]) * bv
                    + v1 * bv
                    - q12v)
                    * em2;
                out2[k] = (2.0 * sl * dot(e2, [a2v[0] - m2[0], a2v[1] - m2[1]]) * bv
                    + v2 * bv
                    - q22v)
                    * em2;

                if ix > 0 && ix + 1 < d.n1 && iy > 0 && iy + 1 < d.n2 {
                    let r1 = dot(e1, x);
                    let phi1 = C64::from_polar((-r1).exp(), tau * r1 + p1v);
                    let ki = d.interior_index(ix, iy);
                    src1[ki] =
                        (2.0 * sl * dot(e1, [a1v[0] - m1[0], a1v[1] - m1[1]]) + q11v) * phi1;
                    src2[ki] =
                        (2.0 * sl * dot(e1, [a2v[0] - m1[0], a2v[1] - m1[1]]) + q21v) * phi1;
                }
            }
        }

        // boundary integral; corners contribute to both adjacent faces with
        // that face's own normal and half arc weight
        let (h1, h2) = (d.h1(), d.h2());
        let mut bd1 = C64::new(0.0, 0.0);
        let mut bd2 = bd1;
        for node in d.boundary_walk() {
            let (ix, iy) = (node.ix, node.iy);
            let x = d.pos(ix, iy);
            let p1v = psi1.value(ix, iy);
            let p2v = psi2.value(ix, iy);
            let g2 = psi2.grad(ix, iy);
            let bv = b2.value(ix, iy);
            let bg = b2.grad(ix, iy);
            let a1v = self.pair.a1.eval(x);
            let a2v = self.pair.a2.eval(x);
            let g = dot(e1, x) - dot(e2, x);
            let ep = C64::from_polar((-g).exp(), tau * g + (p1v - p2v));

            let vec_j = |av: [f64; 2], c: usize| {
                bv * sl * e2[c] + bv * g2[c] + i * bg[c] + bv * av[c]
            };
            let mut faces: Vec<(Face, f64)> = Vec::with_capacity(2);
            if node.corner {
                let vert = if ix == 0 { Face::Left } else { Face::Right };
                let horz = if iy == 0 { Face::Bottom } else { Face::Top };
                faces.push((vert, 0.5 * h2));
                faces.push((horz, 0.5 * h1));
            } else {
                faces.push((node.face, node.weight));
            }
            for (face, w) in faces {
                let nu = face.normal();
                let flux1 = vec_j(a1v, 0) * nu[0] + vec_j(a1v, 1) * nu[1];
                let flux2 = vec_j(a2v, 0) * nu[0] + vec_j(a2v, 1) * nu[1];
                bd1 += -i * ep * flux1 * w;
                bd2 += -i * ep * flux2 * w;
            }
        }

        // resolvent corrections, one interior solve per side
        let cell = d.cell_area();
        let pair_term = |w: &ComplexField, out: &[C64]| {
            let mut acc = C64::new(0.0, 0.0);
            for iy in 0..d.n2 {
                for ix in 0..d.n1 {
                    let k = d.node_index(ix, iy);
                    acc += w.values[k] * out[k] * d.area_weight(ix, iy);
                }
            }
            -acc
        };
        let norm2 = |v: &[C64], weight: f64| -> f64 {
            v.iter().map(|z| z.norm_sqr()).sum::<f64>() * weight
        };
        let weight_norm = |out: &[C64]| -> f64 {
            let mut acc = 0.0;
            for iy in 0..d.n2 {
                for ix in 0..d.n1 {
                    acc += out[d.node_index(ix, iy)].norm_sqr() * d.area_weight(ix, iy);
                }
            }
            acc.sqrt()
        };
        let w1 = self.res1()?.solve_source(&src1)?;
        let w2 = self.res2()?.solve_source(&src2)?;
        let tr1 = pair_term(&w1, &out1);
        let tr2 = pair_term(&w2, &out2);
        let bound1 = norm2(&src1, cell).sqrt() * weight_norm(&out1) / (2.0 * tau);
        let bound2 = norm2(&src2, cell).sqrt() * weight_norm(&out2) / (2.0 * tau);

        let (s1, s2) = self.scattering_pair(frame, electric)?;

        Ok(RepresentationTerms {
            tau,
            xi: frame.xi,
            first: SideTerms {
                volume_magnetic: va1,
                volume_electric: vv1,
                boundary: bd1,
                resolvent: tr1,
                resolvent_bound: bound1,
                direct: s1,
            },
            second: SideTerms {
                volume_magnetic: va2,
                volume_electric: vv2,
                boundary: bd2,
                resolvent: tr2,
                resolvent_bound: bound2,
                direct: s2,
            },
            q11,
            q12,
            q21,
            q22,
        })
    }
}

/// The magnetic limit `2 int eta.(A1 - A2) e^{-i xi.x} b e^{i psi} dx` by
/// tensor-trapezoid quadrature with the unsmoothed limit amplitude and phase.
/// Only the frame's frequency axes enter, never `tau`.
pub fn magnetic_limit_target(
    domain: &Domain2D,
    a1: &APreset,
    a2: &APreset,
    frame: &IsozakiFrame,
) -> C64 {
    let eta = frame.eta;
    let mut acc = C64::new(0.0, 0.0);
    for iy in 0..domain.n2 {
        for ix in 0..domain.n1 {
            let x = domain.pos(ix, iy);
            let d1 = a1.eval(x);
            let d2 = a2.eval(x);
            let diff = dot(eta, [d1[0] - d2[0], d1[1] - d2[1]]);
            if diff == 0.0 {
                continue;
            }
            let b = limit_amplitude(a1, a2, frame, x);
            let psi = limit_phase(a1, a2, eta, x);
            let osc = C64::from_polar(1.0, psi - dot(frame.xi, x));
            acc += 2.0 * diff * b * osc * domain.area_weight(ix, iy);
        }
    }
    acc
}

/// The electric limit `int (V1 - V2) e^{-i xi.x} dx`, a plain Fourier
/// coefficient of the potential difference.
pub fn electric_limit_target(
    domain: &Domain2D,
    xi: [f64; 2],
    v1: &VPreset,
    v2: &VPreset,
) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for iy in 0..domain.n2 {
        for ix in 0..domain.n1 {
            let x = domain.pos(ix, iy);
            let diff = v1.eval(x) - v2.eval(x);
            if diff == 0.0 {
                continue;
            }
            acc += diff * C64::from_polar(1.0, -dot(xi, x)) * domain.area_weight(ix, iy);
        }
    }
    acc
}

/// Which difference the sweep normalizes and which target it is held against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// measured `(S1 - S2)/sqrt(lambda)` against the magnetic limit
    Magnetic,
    /// measured `S1 - S2` against the electric limit; requires `A1 = A2`
    Electric,
}

/// How each row's scattering difference is produced.
#[derive(Clone, Copy)]
pub enum SweepRoute<'d> {
    /// Dirichlet solves against both operators.
    Direct,
    /// Boundary spectral data only (eigenvalues and flux traces).
    Spectral { first: &'d SpectralData, second: &'d SpectralData },
}

/// Measures the approach to the limit target along a `tau` ladder, one table
/// per frequency. The ladder must be strictly increasing; every `tau` must
/// satisfy the resolution precondition. In electric mode the magnetic presets
/// must agree exactly. All frequencies at one `tau` share the factorizations.
pub fn tau_sweep_many(
    pair: &OperatorPair,
    xis: &[[f64; 2]],
    taus: &[f64],
    mode: SweepMode,
    route: SweepRoute,
) -> Result<Vec<ConvergenceTable>> {
    if xis.is_empty() {
        return Err(Error::Hypothesis("empty frequency list".into()));
    }
    if taus.is_empty() {
        return Err(Error::Hypothesis("empty tau ladder".into()));
    }
    if !taus.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Hypothesis(format!(
            "tau ladder must be strictly increasing, got {taus:?}"
        )));
    }
    let electric = mode == SweepMode::Electric;
    if electric && pair.a1 != pair.a2 {
        return Err(Error::Hypothesis(
            "the electric probe assumes identical magnetic potentials".into(),
        ));
    }
    let tau_last = taus[taus.len() - 1];
    let mut targets = Vec::with_capacity(xis.len());
    let mut tables = Vec::with_capacity(xis.len());
    for &xi in xis {
        let axes = isozaki_params(xi, tau_last)?;
        targets.push(match mode {
            SweepMode::Magnetic => magnetic_limit_target(&pair.domain, &pair.a1, &pair.a2, &axes),
            SweepMode::Electric => electric_limit_target(&pair.domain, xi, &pair.v1, &pair.v2),
        });
        tables.push(ConvergenceTable::with_frame(xi, axes.eta, axes.y));
    }
    for &tau in taus {
        let ctx = ScatteringContext::new(pair, tau)?;
        for (i, &xi) in xis.iter().enumerate() {
            let frame = ctx.frame(xi)?;
            let diff = match route {
                SweepRoute::Direct => {
                    let (s1, s2) = ctx.scattering_pair(&frame, electric)?;
                    s1 - s2
                }
                SweepRoute::Spectral { first, second } => {
                    ctx.spectral_difference(&frame, electric, first, second, None)
                }
            };
            let measured = match mode {
                SweepMode::Magnetic => diff / frame.sqrt_lambda,
                SweepMode::Electric => diff,
            };
            tables[i].push(tau, measured, targets[i]);
        }
    }
    Ok(tables)
}

/// Single-frequency convenience form of [`tau_sweep_many`].
pub fn tau_sweep(
    pair: &OperatorPair,
    xi: [f64; 2],
    taus: &[f64],
    mode: SweepMode,
    route: SweepRoute,
) -> Result<ConvergenceTable> {
    let mut tables = tau_sweep_many(pair, &[xi], taus, mode, route)?;
    Ok(tables.pop().expect("one table per frequency"))
}
