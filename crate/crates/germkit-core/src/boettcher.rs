//! Boettcher coordinates at superattracting fixed points.
//!
//! After rescaling the leading coefficient to 1, the coordinate is the
//! branch-tracked product psi(z) = z prod_j (g(w_j)/w_j^n)^{1/n^{j+1}} over
//! the orbit w_j = g^j(z). Every factor stays near 1 inside the immediate
//! basin, so each root is a principal branch; iterated n^k-th roots of g^k
//! itself would be numerically explosive.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{GermError, Result};
use crate::grid::PolarGrid;
use crate::koenigs::{
    classify_fixed_point, CoordinateGrid, FixedPointClass, FixedPointReport, LiftResult,
};
use crate::map::{EvalBudget, MapSpec};

/// A Boettcher coordinate psi of the rescaled map, the rescaling b with
/// b^{n-1} = a_n, and the local degree n.
#[derive(Debug, Clone)]
pub struct BoettcherResult {
    pub n: u32,
    pub b: Complex64,
    /// psi and residuals |psi(g(z)) - psi(z)^n| on the grid, for the
    /// rescaled map.
    pub psi: CoordinateGrid,
}

fn expect_superattracting(report: &FixedPointReport) -> Result<u32> {
    if report.class != FixedPointClass::Superattracting {
        return Err(GermError::WrongClass {
            expected: FixedPointClass::Superattracting,
            found: report.class,
        });
    }
    report.local_degree.ok_or(GermError::DegenerateInput {
        what: "superattracting report lacks a local degree",
    })
}

/// a_n = lim g(z)/z^n, direction-averaged at a small radius.
fn estimate_leading(g: &MapSpec, n: u32) -> Result<Complex64> {
    let s = 1e-3;
    let mut acc = Complex64::ZERO;
    for k in 0..16 {
        let z = Complex64::from_polar(s, std::f64::consts::TAU * k as f64 / 16.0);
        acc += g.evaluate(z)? / z.powu(n);
    }
    Ok(acc / 16.0)
}

/// Rescale so the leading coefficient becomes 1: returns b with
/// b^{n-1} = a_n (principal root) and g_tilde(z) = b g(z/b).
pub fn normalize_leading(g: &MapSpec, budget: &EvalBudget) -> Result<(Complex64, MapSpec)> {
    let report = classify_fixed_point(g, budget)?;
    let n = expect_superattracting(&report)?;
    normalize_with_degree(g, n)
}

fn normalize_with_degree(g: &MapSpec, n: u32) -> Result<(Complex64, MapSpec)> {
    if n < 2 {
        return Err(GermError::DegenerateInput {
            what: "boettcher normalization needs local degree >= 2",
        });
    }
    let a_n = estimate_leading(g, n)?;
    if a_n.norm() < 1e-12 {
        return Err(GermError::DegenerateLeading { modulus: a_n.norm() });
    }
    let b = (a_n.ln() / (n as f64 - 1.0)).exp();
    if (b - Complex64::ONE).norm() < 1e-14 {
        return Ok((Complex64::ONE, g.clone()));
    }
    // g_tilde(z) = b g(z/b), i.e. conjugation by z -> z/b.
    Ok((b, g.conjugate_by_scaling(1.0 / b)?))
}

/// Pointwise Boettcher coordinate of an already-rescaled map.
pub fn boettcher_psi_at(
    gt: &MapSpec,
    n: u32,
    z: Complex64,
    budget: &EvalBudget,
) -> Result<(Complex64, u32)> {
    let inv_n = 1.0 / n as f64;
    let mut acc = z;
    let mut w = z;
    let mut scale = inv_n;
    let mut last_delta = f64::INFINITY;
    for j in 0..budget.max_iterations {
        // Remaining factors are 1 + O(w); below this floor they are
        // indistinguishable from 1 and w^n would underflow.
        if w.norm() < 1e-30 {
            return Ok((acc, j as u32));
        }
        let gw = gt.evaluate(w)?;
        let factor = gw / w.powu(n);
        if !(factor.re > 0.0) {
            return Err(GermError::BranchAmbiguity {
                what: "product factor left the right half-plane (grid too large)",
            });
        }
        if (factor - Complex64::ONE).norm() >= 0.5 {
            return Err(GermError::BranchAmbiguity {
                what: "product factor strayed farther than 1/2 from 1",
            });
        }
        let log_term = factor.ln() * scale;
        acc *= log_term.exp();
        last_delta = log_term.norm();
        if last_delta < budget.tolerance {
            return Ok((acc, j as u32 + 1));
        }
        w = gw;
        scale *= inv_n;
    }
    Err(GermError::NoConvergence {
        context: "boettcher product",
        steps: budget.max_iterations,
        last_delta,
    })
}

/// Boettcher coordinate on a grid inside the immediate basin.
pub fn boettcher_coordinate(
    g: &MapSpec,
    grid: &PolarGrid,
    budget: &EvalBudget,
) -> Result<BoettcherResult> {
    budget.validate()?;
    grid.validate()?;
    let report = classify_fixed_point(g, budget)?;
    let n = expect_superattracting(&report)?;
    let (b, gt) = normalize_with_degree(g, n)?;

    for (_, _, z) in grid.nodes() {
        if gt.evaluate(z)?.norm() >= z.norm() {
            return Err(GermError::OutsideBasin { z });
        }
    }

    let raw = grid.par_map(|z| boettcher_psi_at(&gt, n, z, budget));
    let mut psi = Vec::with_capacity(grid.len());
    let mut depth = Vec::with_capacity(grid.len());
    for r in raw {
        let (p, d) = r?;
        psi.push(p);
        depth.push(d);
    }

    let raw_res: Vec<Result<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let z = grid.node_at(i);
            let gz = gt.evaluate(z)?;
            let (psi_gz, _) = boettcher_psi_at(&gt, n, gz, budget)?;
            Ok((psi_gz - psi[i].powu(n)).norm())
        })
        .collect();
    let mut residual = Vec::with_capacity(grid.len());
    for r in raw_res {
        residual.push(r?);
    }

    let max_residual = residual.iter().copied().fold(0.0, f64::max);
    let normalization_error = (0..grid.angles_per_ring)
        .map(|a| {
            let z = grid.node(0, a);
            (psi[a] / z - Complex64::ONE).norm()
        })
        .fold(0.0, f64::max);

    Ok(BoettcherResult {
        n,
        b,
        psi: CoordinateGrid {
            grid: grid.clone(),
            psi,
            depth,
            residual,
            multiplier: Complex64::ZERO,
            class: FixedPointClass::Superattracting,
            max_residual,
            normalization_error,
        },
    })
}

/// The covering lift h with g(h(w)) = w^n and h(w)/w -> 1, evaluated
/// pointwise: a near-1 fixed-point iteration tracks the branch, Newton
/// polishes the root.
pub fn covering_lift_h(gt: &MapSpec, n: u32, w: Complex64, budget: &EvalBudget) -> Result<Complex64> {
    if w.norm() < 1e-10 {
        return Ok(w);
    }
    let inv_n = 1.0 / n as f64;
    let mut psi = Complex64::ONE;
    for _ in 0..24 {
        let x = w * psi;
        let u = gt.evaluate(x)? / x.powu(n);
        if !u.re.is_finite() || !u.im.is_finite() || u.norm() < 1e-12 {
            return Err(GermError::BranchAmbiguity {
                what: "covering lift factor degenerated",
            });
        }
        let next = (-u.ln() * inv_n).exp();
        let step = (next - psi).norm();
        psi = next;
        if step < 1e-6 {
            break;
        }
    }

    let target = w.powu(n);
    let mut x = w * psi;
    let mut last_delta = f64::INFINITY;
    for _ in 0..budget.newton_max_steps {
        let fx = gt.evaluate(x)? - target;
        if fx.norm() <= budget.newton_tolerance {
            return Ok(x);
        }
        let d = gt.derivative_or_fd(x)?;
        if d.norm() < 1e-250 {
            return Err(GermError::DerivativeVanished { z: x });
        }
        let step = fx / d;
        x -= step;
        last_delta = step.norm();
    }
    let fx = gt.evaluate(x)? - target;
    if fx.norm() <= budget.newton_tolerance {
        return Ok(x);
    }
    Err(GermError::NoConvergence {
        context: "covering lift",
        steps: budget.newton_max_steps,
        last_delta,
    })
}

/// Extend a boundary map on A_{r,0} (bounded by S_r, |z| = r, and T_r,
/// |z| = r^{1/n}) ring by ring: on A_{r,j} the value solves
/// g(phi_j(z)) = phi_{j-1}(z^n), the branch matched by continuity with the
/// previous ring. Each z^n lands exactly on a node of the previous annulus,
/// so no interpolation enters.
pub fn covering_lift_phi<F>(
    g: &MapSpec,
    boundary_map: F,
    r: f64,
    k: usize,
    rings_per_annulus: usize,
    angles: usize,
    budget: &EvalBudget,
) -> Result<LiftResult>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    budget.validate()?;
    if !(r > 0.0 && r < 1.0) || rings_per_annulus == 0 {
        return Err(GermError::DegenerateInput {
            what: "covering lift needs 0 < r < 1 and rings_per_annulus > 0",
        });
    }
    let report = classify_fixed_point(g, budget)?;
    let n = expect_superattracting(&report)?;
    let (_, gt) = normalize_with_degree(g, n)?;
    let nf = n as f64;
    let rpa = rings_per_annulus;

    // Ring (j, t): |z| = r^y with y = n^{-(j+1)} (n - t (n-1)/rpa);
    // t = 0 is the inner edge (shared with annulus j-1), t = rpa the outer.
    let y_of = |j: usize, t: usize| -> f64 {
        nf.powi(-(j as i32 + 1)) * (nf - t as f64 * (nf - 1.0) / rpa as f64)
    };
    let mut ring_ids: Vec<(usize, usize)> = Vec::new();
    for t in 0..=rpa {
        ring_ids.push((0, t));
    }
    for j in 1..=k {
        for t in 1..=rpa {
            ring_ids.push((j, t));
        }
    }
    let radii: Vec<f64> = ring_ids.iter().map(|&(j, t)| r.powf(y_of(j, t))).collect();
    let grid = PolarGrid::new(Complex64::ZERO, radii, angles)?;

    let ring_index = |j: usize, t: usize| -> usize {
        if j == 0 {
            t
        } else {
            rpa + (j - 1) * rpa + t
        }
    };

    let mut phi = vec![Complex64::ZERO; grid.len()];
    let mut depth = vec![0u32; grid.len()];
    let mut residual = vec![0.0f64; grid.len()];
    let mut max_mismatch = 0.0f64;

    // Annulus 0: the boundary map itself.
    for t in 0..=rpa {
        let ring = ring_index(0, t);
        let values: Vec<Result<Complex64>> = (0..angles)
            .into_par_iter()
            .map(|a| boundary_map(grid.node(ring, a)))
            .collect();
        for (a, v) in values.into_iter().enumerate() {
            phi[ring * angles + a] = v?;
        }
    }

    // Lift annulus by annulus; within one, ring by ring outward.
    for j in 1..=k {
        // Shared inner circle: already valued from annulus j-1; measure how
        // far the lift equation strays from that stored value.
        let shared_ring = ring_index(j - 1, rpa);
        let shared_mismatch: Vec<Result<f64>> = (0..angles)
            .into_par_iter()
            .map(|a| {
                // z^n lands on ring (j-1, t=0) at angle n*a mod angles.
                let src_ring = ring_index(j - 1, 0);
                let src = phi[src_ring * angles + (n as usize * a) % angles];
                let seed = phi[shared_ring * angles + a];
                let lifted = gt.local_inverse(src, seed, budget)?;
                Ok((lifted - seed).norm())
            })
            .collect();
        for m in shared_mismatch {
            max_mismatch = max_mismatch.max(m?);
        }

        for t in 1..=rpa {
            let ring = ring_index(j, t);
            let below = if t == 1 { ring_index(j - 1, rpa) } else { ring_index(j, t - 1) };
            let values: Vec<Result<Complex64>> = (0..angles)
                .into_par_iter()
                .map(|a| {
                    let src_ring = ring_index(j - 1, t);
                    let src = phi[src_ring * angles + (n as usize * a) % angles];
                    let seed = phi[below * angles + a];
                    gt.local_inverse(src, seed, budget)
                })
                .collect();
            for (a, v) in values.into_iter().enumerate() {
                let idx = ring * angles + a;
                phi[idx] = v?;
                depth[idx] = j as u32;
            }
        }
    }

    if max_mismatch > 10.0 * 1e-6 {
        return Err(GermError::BranchAmbiguity {
            what: "lift jumped sheets: boundary mismatch beyond tolerance",
        });
    }

    // Conjugacy residual g(phi(z)) = phi(z^n) on the lifted annuli.
    let res: Vec<Result<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let ring = grid.ring_of(i);
            let (j, t) = ring_ids[ring];
            if j == 0 {
                return Ok(0.0);
            }
            let a = i % angles;
            let src_ring = ring_index(j - 1, t);
            let target = phi[src_ring * angles + (n as usize * a) % angles];
            Ok((gt.evaluate(phi[i])? - target).norm())
        })
        .collect();
    for (i, r) in res.into_iter().enumerate() {
        residual[i] = r?;
    }

    let max_residual = residual.iter().copied().fold(0.0, f64::max);
    Ok(LiftResult {
        grid: CoordinateGrid {
            grid,
            psi: phi,
            depth,
            residual,
            multiplier: Complex64::ZERO,
            class: FixedPointClass::Superattracting,
            max_residual,
            normalization_error: f64::NAN,
        },
        max_boundary_mismatch: max_mismatch,
    })
}

/// Find the (n-1)-th root of unity u minimizing sup |psi2 - u psi1|;
/// returns its index and that deviation.
pub fn boettcher_uniqueness(
    psi1: &CoordinateGrid,
    psi2: &CoordinateGrid,
    n: u32,
) -> Result<(usize, f64)> {
    if n < 2 {
        return Err(GermError::DegenerateInput {
            what: "boettcher uniqueness needs n >= 2",
        });
    }
    crate::koenigs::check_grids_match(&psi1.grid, &psi2.grid)?;
    let roots = n as usize - 1;
    let mut best = (0usize, f64::INFINITY);
    for k in 0..roots {
        let u = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / roots as f64);
        let dev = psi1
            .psi
            .iter()
            .zip(&psi2.psi)
            .map(|(a, b)| (b - u * a).norm())
            .fold(0.0, f64::max);
        if dev < best.1 {
            best = (k, dev);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn budget() -> EvalBudget {
        EvalBudget::default()
    }

    #[test]
    fn normalize_monomial_is_trivial() {
        let (b, gt) = normalize_leading(&MapSpec::monomial(2), &budget()).unwrap();
        assert_eq!(b, Complex64::ONE);
        assert_eq!(gt, MapSpec::monomial(2));
    }

    #[test]
    fn normalize_scales_quadratic_leading_coefficient() {
        // g = 4 z^2: b = 4 and the rescaled leading coefficient is 1.
        let g = MapSpec::power_series(vec![Complex64::ZERO, c(4.0, 0.0)], f64::INFINITY).unwrap();
        let (b, gt) = normalize_leading(&g, &budget()).unwrap();
        assert!((b - c(4.0, 0.0)).norm() < 1e-9, "b = {b}");
        let lead = estimate_leading(&gt, 2).unwrap();
        assert!((lead - Complex64::ONE).norm() < 1e-9, "lead = {lead}");
    }

    #[test]
    fn normalize_cubic_principal_square_root() {
        // g = -8 z^3: b^2 = -8, principal branch b = 2.828427...i.
        let g = MapSpec::power_series(
            vec![Complex64::ZERO, Complex64::ZERO, c(-8.0, 0.0)],
            f64::INFINITY,
        )
        .unwrap();
        let (b, gt) = normalize_leading(&g, &budget()).unwrap();
        assert!((b - c(0.0, 2.8284271247461903)).norm() < 1e-9, "b = {b}");
        let lead = estimate_leading(&gt, 3).unwrap();
        assert!((lead - Complex64::ONE).norm() < 1e-9, "lead = {lead}");
    }

    #[test]
    fn normalize_rejects_degenerate_leading() {
        // Multiplier 0 but the z^2 coefficient is 0 too: degree detection
        // reads 3, then a_3 is fine; instead force the failure via an
        // explicitly tiny leading coefficient at the detected degree.
        let g = MapSpec::power_series(vec![Complex64::ZERO, c(1e-13, 0.0)], f64::INFINITY);
        // degree detection cannot settle on n=2 for a 1e-13 coefficient, so
        // the classify step itself reports the inconsistency.
        assert!(g.is_ok());
        let g = g.unwrap();
        assert!(boettcher_coordinate(&g, &PolarGrid::log_spaced(1e-5, 1e-2, 8, 8).unwrap(), &budget()).is_err());
    }

    #[test]
    fn boettcher_of_monomial_is_identity() {
        let grid = PolarGrid::log_spaced(1e-5, 0.3, 10, 8).unwrap();
        for n in [2u32, 3, 5] {
            let res = boettcher_coordinate(&MapSpec::monomial(n), &grid, &budget()).unwrap();
            assert_eq!(res.n, n);
            for ((_, _, z), psi) in grid.nodes().zip(&res.psi.psi) {
                assert!((psi - z).norm() < 1e-14);
            }
            assert!(res.psi.max_residual < 1e-14);
        }
    }

    #[test]
    fn boettcher_of_conjugated_square_is_the_conjugator() {
        // g = M^{-1} o q_2 o M with M = z/(1+z): psi = M.
        let g = MapSpec::moebius_power(2, Complex64::ONE).unwrap();
        let (psi, _) = boettcher_psi_at(&g, 2, c(0.1, 0.0), &budget()).unwrap();
        let m01 = c(0.1, 0.0) / c(1.1, 0.0);
        assert!((psi - m01).norm() < 1e-8, "psi = {psi}, M(0.1) = {m01}");
    }

    #[test]
    fn factor_sequence_contracts_geometrically() {
        let g = MapSpec::moebius_power(2, Complex64::ONE).unwrap();
        let mut w = c(0.08, 0.04);
        let mut prev = f64::INFINITY;
        for _ in 0..6 {
            let gw = g.evaluate(w).unwrap();
            let factor = (gw / w.powu(2) - Complex64::ONE).norm();
            if prev.is_finite() {
                assert!(factor < 0.9 * prev, "factor {factor} vs prev {prev}");
            }
            prev = factor;
            w = gw;
            if w.norm() < 1e-25 {
                break;
            }
        }
    }

    #[test]
    fn local_degree_ratio_near_detection_radius() {
        for n in [2u32, 3, 4] {
            let g = MapSpec::moebius_power(n, c(0.5, 0.2)).unwrap();
            let s = 1e-4;
            let z = Complex64::from_polar(s, 0.7);
            let ratio = g.evaluate(z).unwrap().norm().ln() / s.ln();
            assert!((ratio - n as f64).abs() < 0.01, "n={n}: ratio {ratio}");
        }
    }

    #[test]
    fn covering_lift_h_of_monomial_is_identity() {
        let q3 = MapSpec::monomial(3);
        for &w in &[c(0.3, 0.1), c(-0.2, 0.4), c(0.05, -0.6)] {
            let h = covering_lift_h(&q3, 3, w, &budget()).unwrap();
            assert!((h - w).norm() < 1e-13);
        }
    }

    #[test]
    fn covering_lift_h_matches_moebius_closed_form() {
        // g(h) = w^2 with g = M^{-1} o q_2 o M gives h = M^{-1}(w/sqrt(1+w^2)).
        let g = MapSpec::moebius_power(2, Complex64::ONE).unwrap();
        for &w in &[c(0.3, 0.2), c(-0.4, 0.1), c(0.0, 0.55), c(0.9, 0.0)] {
            let h = covering_lift_h(&g, 2, w, &budget()).unwrap();
            let s = w / (Complex64::ONE + w * w).sqrt();
            let expect = s / (Complex64::ONE - s);
            assert!((h - expect).norm() < 1e-9, "w={w}: {h} vs {expect}");
        }
    }

    #[test]
    fn covering_lift_phi_identity_boundary_on_monomial() {
        let lift = covering_lift_phi(&MapSpec::monomial(2), |z| Ok(z), 0.01, 2, 4, 16, &budget())
            .unwrap();
        for ((_, _, z), phi) in lift.grid.grid.nodes().zip(&lift.grid.psi) {
            assert!((phi - z).norm() < 1e-10, "z = {z}, phi = {phi}");
        }
        assert!(lift.max_boundary_mismatch < 1e-10);
        assert!(lift.grid.max_residual < 1e-10);
    }

    #[test]
    fn covering_lift_phi_conformal_boundary_on_moebius_power() {
        // With the exact conformal boundary M^{-1}, every lifted annulus
        // stays M^{-1}; residual and mismatch measure only solver noise.
        let g = MapSpec::moebius_power(2, Complex64::ONE).unwrap();
        let minv = |z: Complex64| Ok(z / (Complex64::ONE - z));
        let lift = covering_lift_phi(&g, minv, 0.0001, 2, 4, 16, &budget()).unwrap();
        for ((_, _, z), phi) in lift.grid.grid.nodes().zip(&lift.grid.psi) {
            let expect = z / (Complex64::ONE - z);
            assert!((phi - expect).norm() < 1e-9, "z = {z}");
        }
        assert!(lift.max_boundary_mismatch < 1e-8);
        assert!(lift.grid.max_residual < 1e-8);
    }

    #[test]
    fn uniqueness_identity_and_sign_flip() {
        let grid = PolarGrid::log_spaced(1e-5, 0.2, 16, 8).unwrap();
        let res = boettcher_coordinate(&MapSpec::monomial(3), &grid, &budget()).unwrap();
        let (idx, dev) = boettcher_uniqueness(&res.psi, &res.psi, 3).unwrap();
        assert_eq!(idx, 0);
        assert!(dev < 1e-15);

        let mut flipped = res.psi.clone();
        for p in &mut flipped.psi {
            *p = -*p;
        }
        let (idx, dev) = boettcher_uniqueness(&res.psi, &flipped, 3).unwrap();
        assert_eq!(idx, 1, "-1 is the nontrivial square root of unity");
        assert!(dev < 1e-15);
    }
}
