//! Property-level invariants that cut across modules.

mod common;

use common::c;
use germkit_core::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn sample_maps() -> Vec<MapSpec> {
    vec![
        moebius_germ(c(0.5, 0.0), c(1.0, 0.0)),
        moebius_germ(c(0.0, 0.5), c(1.0, 0.0)),
        MapSpec::power_series(vec![c(0.5, 0.0), c(1.0, 0.0)], 0.4).unwrap(),
        MapSpec::moebius_power(2, Complex64::ONE).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// iterate(m, z, j+k) agrees entrywise with restarting from the j-th
    /// entry.
    #[test]
    fn orbit_splits_at_any_midpoint(
        re in -0.05f64..0.05, im in -0.05f64..0.05,
        j in 0usize..6, k in 0usize..6,
    ) {
        let budget = EvalBudget::default();
        let z = c(re, im);
        for m in sample_maps() {
            let full = m.iterate(z, j + k, &budget).unwrap();
            let tail = m.iterate(full[j], k, &budget).unwrap();
            for (a, b) in full[j..].iter().zip(&tail) {
                prop_assert!((a - b).norm() <= 1e-14);
            }
        }
    }

    /// local_inverse undoes evaluate to within the Newton tolerance.
    #[test]
    fn newton_inverse_round_trips(
        re in -0.08f64..0.08, im in -0.08f64..0.08,
    ) {
        let budget = EvalBudget::default();
        let z = c(re, im);
        prop_assume!(z.norm() > 1e-4);
        for m in sample_maps() {
            let w = m.evaluate(z).unwrap();
            let back = m.local_inverse(w, z, &budget).unwrap();
            prop_assert!(
                (m.evaluate(back).unwrap() - w).norm() <= budget.newton_tolerance,
                "map {m:?}"
            );
            prop_assert!((back - z).norm() < 1e-9);
        }
    }
}

/// Boettcher coordinates transform covariantly under rescaling the map.
#[test]
fn boettcher_rescaling_coherence() {
    let g = MapSpec::moebius_power(2, Complex64::ONE).unwrap();
    let budget = EvalBudget::default();
    let grid = PolarGrid::log_spaced(1e-3, 0.05, 10, 16).unwrap();

    let res = boettcher_coordinate(&g, &grid, &budget).unwrap();
    // g2 = s o g o s^{-1} with s(z) = 2z.
    let g2 = g.conjugate_by_scaling(c(0.5, 0.0)).unwrap();
    let res2 = boettcher_coordinate(&g2, &grid, &budget).unwrap();

    // Full coordinates Psi(z) = psi_tilde(b z) satisfy Psi2(2z) = u Psi(z)
    // for an (n-1)-th root of unity u; here n = 2 forces u = 1 and
    // b2 = b / 2.
    assert!((res2.b - res.b / 2.0).norm() < 1e-8, "b = {}, b2 = {}", res.b, res2.b);
    let (_, gt) = normalize_leading(&g, &budget).unwrap();
    let (_, gt2) = normalize_leading(&g2, &budget).unwrap();
    let mut worst = 0.0f64;
    for (_, _, z) in grid.nodes() {
        let a = boettcher_psi_at(&gt, 2, res.b * z, &budget).unwrap().0;
        let b = boettcher_psi_at(&gt2, 2, res2.b * 2.0 * z, &budget).unwrap().0;
        worst = worst.max((b - a).norm());
    }
    assert!(worst < 1e-8, "coherence deviation {worst}");
}

/// The summed-modulus inequality holds on a monotone curve that is not a
/// pure power law.
#[test]
fn summed_modulus_bound_on_mixed_curve() {
    let n = 1500;
    let (lo, hi) = (1e-5f64.ln(), 0.0f64);
    let ts: Vec<f64> = (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .collect();
    let ws: Vec<f64> = ts.iter().map(|t| (0.4 * t + 0.3 * t * t).min(0.99)).collect();
    let curve = ModulusCurve::from_samples(&ts, &ws).unwrap();
    for &cc in &[1.0, 2.0] {
        for &sigma in &[0.3, 0.5, 0.9] {
            for &t in &[0.3, 0.03, 0.003] {
                let (sum, bound) = tilde_omega(&curve, cc, sigma, t).unwrap();
                assert!(sum.is_finite());
                assert!(sum <= bound + 1e-12, "C={cc} sigma={sigma} t={t}: {sum} > {bound}");
            }
        }
    }
}

/// tilde_omega(t) -> 0: one decade down at least halves the sum for
/// omega ~ t^alpha with alpha >= 1.
#[test]
fn summed_modulus_vanishes_towards_zero() {
    let n = 1500;
    let (lo, hi) = (1e-6f64.ln(), 0.0f64);
    let ts: Vec<f64> = (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .collect();
    for &alpha in &[1.0, 1.5, 2.0] {
        let ws: Vec<f64> = ts.iter().map(|t| t.powf(alpha).min(0.99)).collect();
        let curve = ModulusCurve::from_samples(&ts, &ws).unwrap();
        for &t in &[0.2, 0.02] {
            let (sum, _) = tilde_omega(&curve, 1.0, 0.5, t).unwrap();
            let (sum10, _) = tilde_omega(&curve, 1.0, 0.5, t / 10.0).unwrap();
            assert!(sum10 < sum / 2.0, "alpha={alpha}, t={t}: {sum10} vs {sum}");
        }
    }
}

/// Koenigs normalization: psi(z)/z -> 1 at the smallest ring when the ring
/// is small enough to see the derivative.
#[test]
fn koenigs_normalization_error_scales_with_inner_ring() {
    let f = moebius_germ(c(0.5, 0.0), c(1.0, 0.0));
    let budget = EvalBudget::default();
    let fine = PolarGrid::log_spaced(1e-7, 0.05, 14, 8).unwrap();
    let cg = koenigs_forward(&f, &fine, &budget).unwrap();
    assert!(
        cg.normalization_error < 1e-6,
        "normalization error {} at inner radius 1e-7",
        cg.normalization_error
    );
}
