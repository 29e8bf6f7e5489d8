//! Boundary spectral data: Dirichlet eigenvalues together with two boundary
//! traces per eigenfunction.
//!
//! `traces` is the second-order one-sided normal derivative — the quantity a
//! measurement would export. `flux` is the discrete adjoint of the Dirichlet
//! lifting: with coefficients `<f, flux_k>` the eigenfunction expansion of a
//! boundary-value solve is an exact identity on the lattice, not an O(h)
//! approximation, which is what the series-based cross-checks rely on.

use num_complex::Complex64 as C64;

use crate::domain::{Domain2D, Face};
use crate::error::{Error, Result};
use crate::field::{BoundaryFunction, ComplexField};
use crate::linalg::{banded, dense, lanczos};
use crate::operator::MagneticOperator;

pub struct SpectralData {
    pub domain: Domain2D,
    /// Eigenvalues ascending.
    pub lambdas: Vec<f64>,
    /// Interior eigenvectors, orthonormal in the h1 h2 - weighted product,
    /// phase-fixed: the largest-magnitude entry is real positive.
    pub phis: Vec<Vec<C64>>,
    /// One-sided second-order normal derivative traces.
    pub traces: Vec<BoundaryFunction>,
    /// Adjoint-of-lifting traces (series-exact coefficients).
    pub flux: Vec<BoundaryFunction>,
}

pub struct EigenReport {
    /// max_k || H phi_k - lambda_k phi_k ||_2 (unit vectors).
    pub residual_max: f64,
    /// Largest eigenvalue shift between the run and the longer validation run.
    pub validation_gap_max: Option<f64>,
    pub steps_used: usize,
}

impl SpectralData {
    pub fn k(&self) -> usize {
        self.lambdas.len()
    }
}

/// Lowest-k spectral data via shift-invert Lanczos on the banded factor.
/// `validate` reruns with a longer Krylov sequence and reports the largest
/// eigenvalue movement (the longer run is the one returned).
pub fn eigensolve(
    op: &MagneticOperator,
    k: usize,
    seed: u64,
    validate: bool,
) -> Result<(SpectralData, EigenReport)> {
    let n = op.domain.num_interior();
    if k > n {
        return Err(Error::GridTooCoarse(format!("{k} eigenpairs requested, {n} interior nodes")));
    }
    // Pairs deep inside the requested slice converge slowly once k is a
    // sizable fraction of the grid, so the Krylov budget escalates until the
    // residual contract holds instead of pushing a tuning knob onto callers.
    // The ladder is fixed, so reruns walk the same path: determinism holds.
    let mut steps = (2 * k + 50).min(n);
    let mut eig = run_lanczos(op, k, steps, seed)?;
    let mut residual_max = worst_residual(op, &eig);
    while residual_max > 1e-8 && steps < n {
        steps = (2 * steps).min(n);
        eig = run_lanczos(op, k, steps, seed)?;
        residual_max = worst_residual(op, &eig);
    }
    if residual_max > 1e-8 {
        return Err(Error::EigenFailure(format!(
            "eigenpair residual {residual_max:.3e} exceeds 1e-8 at the full Krylov budget"
        )));
    }
    let gap = if validate {
        let longer = run_lanczos(op, k, (steps + 100).min(n), seed.wrapping_add(1))?;
        let gap = eig
            .values
            .iter()
            .zip(&longer.values)
            .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
            .fold(0.0f64, f64::max);
        let longer_residual = worst_residual(op, &longer);
        if longer_residual <= 1e-8 {
            eig = longer;
            residual_max = longer_residual;
        }
        Some(gap)
    } else {
        None
    };
    let report =
        EigenReport { residual_max, validation_gap_max: gap, steps_used: eig.steps_used };
    Ok((assemble_spectral_data(op, eig.values, eig.vectors), report))
}

/// `max_k || H phi_k - lambda_k phi_k || / max(1, |lambda_k|)` over unit vectors.
fn worst_residual(op: &MagneticOperator, eig: &lanczos::ShiftInvertEigen) -> f64 {
    let mut worst = 0.0f64;
    for (lam, phi) in eig.values.iter().zip(&eig.vectors) {
        let hphi = op.apply_interior(phi);
        let r: f64 =
            hphi.iter().zip(phi).map(|(h, p)| (h - p * *lam).norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(r / lam.abs().max(1.0));
    }
    worst
}

fn run_lanczos(
    op: &MagneticOperator,
    k: usize,
    steps: usize,
    seed: u64,
) -> Result<lanczos::ShiftInvertEigen> {
    let sigma = op.spectrum_floor() - 1.0;
    let band = op.to_band(C64::new(sigma, 0.0));
    let lu = banded::factor(band)?;
    lanczos::shift_invert_lowest(op.domain.num_interior(), sigma, k, steps, seed, |b| {
        lu.solve_in_place(b)
    })
}

/// Same spectral data through the dense Jacobi eigensolver. Exercises none of
/// the banded/Lanczos machinery, so it serves as the small-grid oracle.
pub fn eigensolve_dense(op: &MagneticOperator, k: usize) -> Result<SpectralData> {
    let n = op.domain.num_interior();
    assert!(k <= n);
    let (vals, vecs) = dense::hermitian_eigen(&op.dense_interior(), n)?;
    let values = vals[..k].to_vec();
    let vectors: Vec<Vec<C64>> = (0..k).map(|c| vecs[c * n..(c + 1) * n].to_vec()).collect();
    Ok(assemble_spectral_data(op, values, vectors))
}

/// Normalize in the lattice inner product, fix phases, and attach both
/// boundary traces.
fn assemble_spectral_data(
    op: &MagneticOperator,
    lambdas: Vec<f64>,
    mut phis: Vec<Vec<C64>>,
) -> SpectralData {
    let domain = op.domain;
    let scale = 1.0 / domain.cell_area().sqrt();
    for phi in &mut phis {
        // unit l2 -> unit weighted norm
        let mut best = 0usize;
        let mut best_mag = 0.0f64;
        for (i, z) in phi.iter().enumerate() {
            let m = z.norm_sqr();
            if m > best_mag {
                best_mag = m;
                best = i;
            }
        }
        let phase = phi[best] / phi[best].norm();
        let factor = phase.conj() * scale;
        for z in phi.iter_mut() {
            *z *= factor;
        }
    }
    let traces = phis.iter().map(|p| trace_of_interior(domain, p)).collect();
    let flux = phis.iter().map(|p| flux_trace(op, p)).collect();
    SpectralData { domain, lambdas, phis, traces, flux }
}

fn face_step(face: Face) -> (isize, isize) {
    // step from the boundary node towards the interior (opposite the normal)
    match face {
        Face::Bottom => (0, 1),
        Face::Right => (-1, 0),
        Face::Top => (0, -1),
        Face::Left => (1, 0),
    }
}

fn face_h(domain: &Domain2D, face: Face) -> f64 {
    match face {
        Face::Bottom | Face::Top => domain.h2(),
        Face::Left | Face::Right => domain.h1(),
    }
}

/// One-sided second-order outward normal derivative of an interior-indexed
/// vector (zero on the boundary by convention).
pub fn trace_of_interior(domain: Domain2D, phi: &[C64]) -> BoundaryFunction {
    let at = |ix: isize, iy: isize| -> C64 {
        let (ix, iy) = (ix as usize, iy as usize);
        if domain.is_interior(ix, iy) {
            phi[domain.interior_index(ix, iy)]
        } else {
            C64::new(0.0, 0.0)
        }
    };
    trace_with(domain, at)
}

/// One-sided second-order outward normal derivative of a full-grid field.
///
/// Corners hold the arc-weighted mix of the two adjacent faces' one-sided
/// stencils, so that `sigma * value` is the exact polygon-trapezoid corner
/// contribution. Those stencils run along the boundary rows: corner values
/// depend only on the field's own boundary data, never on the interior, so
/// operator differences under shared data are corner-blind.
pub fn normal_derivative_trace(u: &ComplexField) -> BoundaryFunction {
    let domain = u.domain;
    let at = |ix: isize, iy: isize| u.at(ix as usize, iy as usize);
    trace_with(domain, at)
}

fn one_sided(
    domain: &Domain2D,
    at: &impl Fn(isize, isize) -> C64,
    ix: usize,
    iy: usize,
    face: Face,
) -> C64 {
    let (sx, sy) = face_step(face);
    let h = face_h(domain, face);
    let (ix, iy) = (ix as isize, iy as isize);
    let u0 = at(ix, iy);
    let u1 = at(ix + sx, iy + sy);
    let u2 = at(ix + 2 * sx, iy + 2 * sy);
    // outward derivative = -(inward derivative)
    (u0 * 3.0 - u1 * 4.0 + u2) / (2.0 * h)
}

fn trace_with(domain: Domain2D, at: impl Fn(isize, isize) -> C64) -> BoundaryFunction {
    let mut out = BoundaryFunction::zeros(domain);
    let (h1, h2) = (domain.h1(), domain.h2());
    for (slot, b) in domain.boundary_walk().iter().enumerate() {
        out.values[slot] = if b.corner {
            let vert = if b.ix == 0 { Face::Left } else { Face::Right };
            let horz = if b.iy == 0 { Face::Bottom } else { Face::Top };
            let dv = one_sided(&domain, &at, b.ix, b.iy, vert);
            let dh = one_sided(&domain, &at, b.ix, b.iy, horz);
            (dv * h2 + dh * h1) / (h1 + h2)
        } else {
            one_sided(&domain, &at, b.ix, b.iy, b.face)
        };
    }
    out
}

/// Adjoint-of-lifting trace: the boundary function whose weighted pairing
/// with Dirichlet data reproduces `-<phi, lift(f)>` exactly. At a boundary
/// node q with (unique) interior neighbor p across spacing h:
/// `-(h1 h2 / (sigma_q h^2)) e^{-i theta(p->q)} phi(p)`; zero at corners.
pub fn flux_trace(op: &MagneticOperator, phi: &[C64]) -> BoundaryFunction {
    let domain = op.domain;
    let cell = domain.cell_area();
    let mut out = BoundaryFunction::zeros(domain);
    for (slot, b) in domain.boundary_walk().iter().enumerate() {
        let (sx, sy) = face_step(b.face);
        let h = face_h(&domain, b.face);
        let (px, py) = ((b.ix as isize + sx) as usize, (b.iy as isize + sy) as usize);
        if !domain.is_interior(px, py) {
            continue; // corners have no interior neighbor
        }
        let theta = op.link_phase((px, py), (b.ix, b.iy));
        let val = phi[domain.interior_index(px, py)];
        out.values[slot] =
            -(cell / (b.weight * h * h)) * C64::from_polar(1.0, -theta) * val;
    }
    out
}

/// Group indices of eigenvalues into clusters closer than `rel_tol` relative
/// to their magnitude (consecutive gaps only).
pub fn clusters(lambdas: &[f64], rel_tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0usize;
    for i in 1..=lambdas.len() {
        let split = i == lambdas.len() || {
            let gap = lambdas[i] - lambdas[i - 1];
            gap > rel_tol * lambdas[i].abs().max(1.0)
        };
        if split {
            out.push(start..i);
            start = i;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::free_dirichlet_spectrum;
    use crate::preset::{APreset, APrimitive, VPreset, VPrimitive};

    fn magnetic_op(n: usize) -> MagneticOperator {
        let d = Domain2D::new(1.0, 1.0, n, n, 0.15).unwrap();
        let a = APreset(vec![APrimitive::StreamBump {
            center: [0.08, -0.04],
            radius: 0.24,
            amplitude: 0.9,
        }]);
        let v = VPreset(vec![VPrimitive::VBump { center: [0.1, 0.0], radius: 0.22, amplitude: 1.0 }]);
        MagneticOperator::from_presets(d, &a, &v)
    }

    #[test]
    fn lanczos_matches_closed_form_free_spectrum() {
        let d = Domain2D::new(1.0, 1.0, 33, 33, 0.15).unwrap();
        let op = MagneticOperator::from_presets(d, &APreset::default(), &VPreset::default());
        let (data, report) = eigensolve(&op, 20, 42, true).unwrap();
        let exact = free_dirichlet_spectrum(d);
        for (got, want) in data.lambdas.iter().zip(&exact) {
            assert!((got - want).abs() < 1e-8 * want, "{got} vs {want}");
        }
        assert!(report.residual_max < 1e-8);
        assert!(report.validation_gap_max.unwrap() < 1e-10);
    }

    #[test]
    fn orthonormal_in_weighted_product_and_phase_fixed() {
        let op = magnetic_op(17);
        let (data, _) = eigensolve(&op, 12, 7, false).unwrap();
        let w = op.domain.cell_area();
        for i in 0..12 {
            for j in i..12 {
                let dot: C64 = data.phis[i]
                    .iter()
                    .zip(&data.phis[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum::<C64>()
                    * w;
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).norm() < 1e-7, "<phi{i}, phi{j}> = {dot}");
            }
            let big = data.phis[i].iter().max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()));
            let big = big.unwrap();
            assert!(big.im.abs() < 1e-10 * big.re.abs() && big.re > 0.0, "phase of {i}: {big}");
        }
    }

    #[test]
    fn traces_approximate_continuum_normal_derivative() {
        // Free operator on the unit square: phi_{11} ~ 2 sin(pi x') sin(pi y')
        // in corner coordinates; on the bottom edge the outward derivative is
        // -2 pi sin(pi x'). Compare at the edge midpoint, where x' = 1/2.
        let d = Domain2D::new(1.0, 1.0, 65, 65, 0.15).unwrap();
        let op = MagneticOperator::from_presets(d, &APreset::default(), &VPreset::default());
        let (data, _) = eigensolve(&op, 1, 3, false).unwrap();
        let walk = d.boundary_walk();
        let mid = walk
            .iter()
            .position(|b| b.face == Face::Bottom && b.ix == (d.n1 - 1) / 2)
            .unwrap();
        let got = data.traces[0].values[mid];
        // sign of the eigenvector is pinned by the phase convention: interior
        // maximum positive, so the ground state is the +sin sin mode.
        let want = -2.0 * std::f64::consts::PI;
        assert!(
            (got.re - want).abs() < 0.01 * want.abs() && got.im.abs() < 1e-9,
            "trace at bottom midpoint: {got} vs {want}"
        );
        // flux trace agrees with the stencil trace to first order
        let flux_mid = data.flux[0].values[mid];
        assert!(
            (flux_mid.re - want).abs() < 0.05 * want.abs(),
            "flux trace at midpoint: {flux_mid} vs {want}"
        );
    }

    #[test]
    fn dense_oracle_and_lanczos_agree_on_magnetic_operator() {
        let op = magnetic_op(10);
        let k = 12;
        let (data, _) = eigensolve(&op, k, 11, false).unwrap();
        let oracle = eigensolve_dense(&op, k).unwrap();
        for (got, want) in data.lambdas.iter().zip(&oracle.lambdas) {
            assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "{got} vs {want}");
        }
        // compare one-dimensional eigenspaces up to phase via |<.,.>|
        let w = op.domain.cell_area();
        let groups = clusters(&data.lambdas, 1e-6);
        for g in groups {
            if g.len() == 1 {
                let i = g.start;
                let dot: C64 = data.phis[i]
                    .iter()
                    .zip(&oracle.phis[i])
                    .map(|(a, b)| a.conj() * b)
                    .sum::<C64>()
                    * w;
                assert!((dot.norm() - 1.0).abs() < 1e-8, "overlap {i}: {}", dot.norm());
            } else {
                let cos = crate::linalg::small::principal_angle_cosines(
                    &data.phis[g.clone()].to_vec(),
                    &oracle.phis[g].to_vec(),
                    w,
                )
                .unwrap();
                assert!(cos.iter().all(|c| (c - 1.0).abs() < 1e-8), "{cos:?}");
            }
        }
    }

    #[test]
    fn cluster_grouping() {
        let l = [1.0, 1.0 + 1e-9, 2.0, 5.0, 5.0 + 1e-8, 5.0 + 2e-8];
        let g = clusters(&l, 1e-6);
        assert_eq!(g, vec![0..2, 2..3, 3..6]);
    }
}
