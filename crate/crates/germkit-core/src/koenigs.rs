//! Fixed-point classification and Koenigs linearization.
//!
//! The forward scheme computes psi(z) = lim f^k(z)/lambda^k with a per-node
//! adaptive depth; the repelling case runs the same scheme on the Newton
//! inverse branch fixing 0. The annulus lift extends a conjugacy given on a
//! fundamental annulus ring-by-ring via phi(z) = f^j(phi_0(lambda^{-j} z)).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{GermError, Result};
use crate::grid::PolarGrid;
use crate::map::{EvalBudget, MapSpec};

/// |multiplier| within this of 1 classifies as neutral (flagged inconclusive).
pub const NEUTRAL_BAND: f64 = 1e-9;
/// Symbolic multipliers below this modulus count as zero.
const SUPER_EPS_SYMBOLIC: f64 = 1e-12;
/// Orbit-ratio estimates below this modulus trigger local-degree detection.
const SUPER_EPS_ESTIMATED: f64 = 1e-6;
/// Ratios beyond 1e+-12 mean the control quotient degenerated.
const CONTROL_BLOWUP: f64 = 1e12;
/// Allowed mismatch across shared annulus boundaries.
const CONTINUITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointClass {
    Attracting,
    Repelling,
    Superattracting,
    Neutral,
}

impl fmt::Display for FixedPointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FixedPointClass::Attracting => "attracting",
            FixedPointClass::Repelling => "repelling",
            FixedPointClass::Superattracting => "superattracting",
            FixedPointClass::Neutral => "neutral",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimationMethod {
    Symbolic,
    FiniteDifference,
    OrbitRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    #[serde(with = "crate::cxserde")]
    pub multiplier: Complex64,
    pub class: FixedPointClass,
    /// Local degree, superattracting case only.
    pub local_degree: Option<u32>,
    pub method: EstimationMethod,
    /// Set when |multiplier| sits inside the neutral band but is not
    /// exactly 1, so the classification is numerically inconclusive.
    pub inconclusive_neutral: bool,
}

/// A computed normal-form coordinate on a polar grid.
#[derive(Debug, Clone)]
pub struct CoordinateGrid {
    pub grid: PolarGrid,
    /// The linearizer value per node.
    pub psi: Vec<Complex64>,
    /// Iteration depth used per node.
    pub depth: Vec<u32>,
    /// Conjugacy residual per node.
    pub residual: Vec<f64>,
    pub multiplier: Complex64,
    pub class: FixedPointClass,
    pub max_residual: f64,
    /// max |psi(z)/z - 1| on the smallest ring; NaN when the grid does not
    /// approach the fixed point (annulus lifts).
    pub normalization_error: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ControlReport {
    pub delta: f64,
    pub c_hat: f64,
    pub max_n_checked: usize,
    pub violated: bool,
}

/// Classify the fixed point at 0: symbolic multiplier when the map is
/// analytic, direction-averaged orbit ratio f(z)/z otherwise.
pub fn classify_fixed_point(m: &MapSpec, budget: &EvalBudget) -> Result<FixedPointReport> {
    budget.validate()?;
    match m.multiplier() {
        Ok(lam) => {
            if lam.norm() < SUPER_EPS_SYMBOLIC {
                let n = detect_local_degree(m)?;
                Ok(FixedPointReport {
                    multiplier: Complex64::ZERO,
                    class: FixedPointClass::Superattracting,
                    local_degree: Some(n),
                    method: EstimationMethod::Symbolic,
                    inconclusive_neutral: false,
                })
            } else {
                Ok(report_from_multiplier(lam, EstimationMethod::Symbolic))
            }
        }
        Err(GermError::NotAnalytic) => {
            let lam = orbit_ratio_multiplier(m)?;
            if lam.norm() < SUPER_EPS_ESTIMATED {
                let n = detect_local_degree(m)?;
                Ok(FixedPointReport {
                    multiplier: Complex64::ZERO,
                    class: FixedPointClass::Superattracting,
                    local_degree: Some(n),
                    method: EstimationMethod::OrbitRatio,
                    inconclusive_neutral: false,
                })
            } else {
                Ok(report_from_multiplier(lam, EstimationMethod::OrbitRatio))
            }
        }
        Err(e) => Err(e),
    }
}

fn report_from_multiplier(lam: Complex64, method: EstimationMethod) -> FixedPointReport {
    let dist = (lam.norm() - 1.0).abs();
    let class = if dist <= NEUTRAL_BAND {
        FixedPointClass::Neutral
    } else if lam.norm() < 1.0 {
        FixedPointClass::Attracting
    } else {
        FixedPointClass::Repelling
    };
    FixedPointReport {
        multiplier: lam,
        class,
        local_degree: None,
        method,
        inconclusive_neutral: class == FixedPointClass::Neutral && lam.norm() != 1.0,
    }
}

/// lim f(z)/z estimated at shrinking radii; the mean over equally spaced
/// directions cancels every angular term up to order 8.
fn orbit_ratio_multiplier(m: &MapSpec) -> Result<Complex64> {
    let mut est = Complex64::ZERO;
    for &s in &[1e-3, 1e-4, 1e-5, 1e-6] {
        let mut acc = Complex64::ZERO;
        for k in 0..8 {
            let z = Complex64::from_polar(s, std::f64::consts::TAU * k as f64 / 8.0);
            acc += m.evaluate(z)? / z;
        }
        est = acc / 8.0;
    }
    Ok(est)
}

/// Local degree from the slope of log|g(z)| against log|z| between small
/// radii; slopes cancel the leading coefficient that biases the plain
/// log-ratio.
fn detect_local_degree(m: &MapSpec) -> Result<u32> {
    let radii = [1e-3, 1e-4, 1e-5];
    let mut levels = Vec::new();
    for &s in &radii {
        let mut acc = 0.0;
        for k in 0..8 {
            let z = Complex64::from_polar(s, std::f64::consts::TAU * k as f64 / 8.0);
            let w = m.evaluate(z)?;
            if w.norm() < 1e-300 {
                return Err(GermError::DegenerateInput {
                    what: "map collapses to zero; local degree undefined",
                });
            }
            acc += w.norm().ln();
        }
        levels.push(acc / 8.0);
    }
    let slopes: Vec<f64> = levels
        .windows(2)
        .zip(radii.windows(2))
        .map(|(l, r)| (l[0] - l[1]) / (r[0].ln() - r[1].ln()))
        .collect();
    let n = slopes[1].round();
    if n < 2.0 || slopes.iter().any(|d| (d - n).abs() > 0.05) {
        return Err(GermError::DegenerateInput {
            what: "local degree detection inconsistent",
        });
    }
    Ok(n as u32)
}

/// Stopping threshold: scaled by the contraction factor so the truncated
/// tail stays below the configured tolerance.
fn stopping_threshold(tolerance: f64, contraction: f64) -> f64 {
    tolerance * (1.0 - contraction).max(1e-3) / 2.0
}

/// One forward pointwise evaluation of psi(z) = lim f^k(z)/lambda^k.
fn forward_psi_point(
    m: &MapSpec,
    lam: Complex64,
    z: Complex64,
    budget: &EvalBudget,
    threshold: f64,
) -> Result<(Complex64, u32)> {
    let mut w = z;
    let mut denom = Complex64::ONE;
    let mut psi_prev = z;
    let mut last_delta = f64::INFINITY;
    for k in 1..=budget.max_iterations {
        w = m.evaluate(w)?;
        denom *= lam;
        let psi = w / denom;
        last_delta = (psi - psi_prev).norm();
        if last_delta < threshold {
            return Ok((psi, k as u32));
        }
        psi_prev = psi;
    }
    Err(GermError::NoConvergence {
        context: "koenigs forward iteration",
        steps: budget.max_iterations,
        last_delta,
    })
}

/// Pointwise psi for the repelling case: psi(z) = lim lambda^k f^{-k}(z).
fn backward_psi_point(
    m: &MapSpec,
    lam: Complex64,
    z: Complex64,
    budget: &EvalBudget,
    threshold: f64,
) -> Result<(Complex64, u32)> {
    let mut w = z;
    let mut scale = Complex64::ONE;
    let mut psi_prev = z;
    let mut last_delta = f64::INFINITY;
    for k in 1..=budget.max_iterations {
        // Relative Newton tolerance: |lambda|^k rescaling amplifies absolute
        // inversion error by 2^j per step on e.g. lambda = 2.
        let tol = (1e-15 * w.norm()).max(f64::MIN_POSITIVE);
        w = m.local_inverse_tol(w, w / lam, tol, budget.newton_max_steps)?;
        scale *= lam;
        let psi = w * scale;
        last_delta = (psi - psi_prev).norm();
        if last_delta < threshold {
            return Ok((psi, k as u32));
        }
        psi_prev = psi;
    }
    Err(GermError::NoConvergence {
        context: "koenigs backward iteration",
        steps: budget.max_iterations,
        last_delta,
    })
}

/// Fixed-depth forward evaluation, for depth-monotonicity diagnostics.
pub fn forward_psi_at_depth(
    m: &MapSpec,
    lam: Complex64,
    z: Complex64,
    depth: usize,
) -> Result<Complex64> {
    let mut w = z;
    let mut denom = Complex64::ONE;
    for _ in 0..depth {
        w = m.evaluate(w)?;
        denom *= lam;
    }
    Ok(w / denom)
}

/// Evaluate the normalized Koenigs linearizer pointwise (attracting case).
pub fn koenigs_psi_at(m: &MapSpec, z: Complex64, budget: &EvalBudget) -> Result<(Complex64, u32)> {
    let report = classify_fixed_point(m, budget)?;
    expect_class(&report, FixedPointClass::Attracting)?;
    let lam = report.multiplier;
    let threshold = stopping_threshold(budget.tolerance, lam.norm());
    forward_psi_point(m, lam, z, budget, threshold)
}

fn expect_class(report: &FixedPointReport, expected: FixedPointClass) -> Result<()> {
    if report.class != expected {
        return Err(GermError::WrongClass {
            expected,
            found: report.class,
        });
    }
    Ok(())
}

fn collect_results<T>(raw: Vec<Result<T>>) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(raw.len());
    for r in raw {
        out.push(r?);
    }
    Ok(out)
}

fn assemble_grid(
    m: &MapSpec,
    grid: &PolarGrid,
    lam: Complex64,
    class: FixedPointClass,
    point: &(dyn Fn(Complex64) -> Result<(Complex64, u32)> + Sync),
) -> Result<CoordinateGrid> {
    let raw = grid.par_map(|z| point(z));
    let pairs = collect_results(raw)?;
    let psi: Vec<Complex64> = pairs.iter().map(|p| p.0).collect();
    let depth: Vec<u32> = pairs.iter().map(|p| p.1).collect();

    // Residual of the forward functional equation psi(f(z)) = lambda psi(z),
    // with psi(f(z)) recomputed by the same pointwise scheme.
    let raw_res: Vec<Result<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let z = grid.node_at(i);
            let fz = m.evaluate(z)?;
            let (psi_fz, _) = point(fz)?;
            Ok((psi_fz - lam * psi[i]).norm())
        })
        .collect();
    let residual = collect_results(raw_res)?;

    let max_residual = residual.iter().copied().fold(0.0, f64::max);
    let normalization_error = (0..grid.angles_per_ring)
        .map(|a| {
            let z = grid.node(0, a);
            (psi[a] / z - Complex64::ONE).norm()
        })
        .fold(0.0, f64::max);

    Ok(CoordinateGrid {
        grid: grid.clone(),
        psi,
        depth,
        residual,
        multiplier: lam,
        class,
        max_residual,
        normalization_error,
    })
}

/// Koenigs coordinate for an attracting fixed point, psi normalized by
/// psi'(0) = 1, adaptive depth per node.
pub fn koenigs_forward(m: &MapSpec, grid: &PolarGrid, budget: &EvalBudget) -> Result<CoordinateGrid> {
    budget.validate()?;
    grid.validate()?;
    let report = classify_fixed_point(m, budget)?;
    expect_class(&report, FixedPointClass::Attracting)?;
    let lam = report.multiplier;

    let control = control_condition(m, grid.outer_radius(), 40, 32)?;
    if control.violated {
        return Err(GermError::ControlViolated {
            ratio: control.c_hat,
            step: control.max_n_checked,
        });
    }

    let threshold = stopping_threshold(budget.tolerance, lam.norm());
    let point = |z: Complex64| forward_psi_point(m, lam, z, budget, threshold);
    assemble_grid(m, grid, lam, FixedPointClass::Attracting, &point)
}

/// Koenigs coordinate for a repelling fixed point via the inverse branch
/// fixing 0; satisfies psi(f(z)) = lambda psi(z) with |lambda| > 1.
pub fn koenigs_backward(m: &MapSpec, grid: &PolarGrid, budget: &EvalBudget) -> Result<CoordinateGrid> {
    budget.validate()?;
    grid.validate()?;
    let report = classify_fixed_point(m, budget)?;
    expect_class(&report, FixedPointClass::Repelling)?;
    let lam = report.multiplier;

    let threshold = stopping_threshold(budget.tolerance, 1.0 / lam.norm());
    let point = |z: Complex64| backward_psi_point(m, lam, z, budget, threshold);
    assemble_grid(m, grid, lam, FixedPointClass::Repelling, &point)
}

/// Check C^{-1} <= |f^n(z)/(lambda^n z)| <= C over sampled points of the
/// closed delta-disk and n = 0..n_max.
pub fn control_condition(
    m: &MapSpec,
    delta: f64,
    n_max: usize,
    samples: usize,
) -> Result<ControlReport> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(GermError::OutOfRange {
            what: "control condition delta",
            value: delta,
        });
    }
    let report = classify_fixed_point(m, &EvalBudget::default())?;
    expect_class(&report, FixedPointClass::Attracting)?;
    let lam = report.multiplier;

    let angles = (samples / 4).max(8);
    let mut points = Vec::new();
    for &scale in &[1.0, 0.75, 0.5, 0.25] {
        for a in 0..angles {
            let theta = std::f64::consts::TAU * a as f64 / angles as f64;
            points.push(Complex64::from_polar(delta * scale, theta));
        }
    }

    let per_point: Vec<Result<(f64, f64, bool)>> = points
        .par_iter()
        .map(|&z| {
            let mut sup = 1.0f64;
            let mut inf = 1.0f64;
            let mut violated = false;
            let mut w = z;
            let mut denom = z;
            for _ in 1..=n_max {
                w = m.evaluate(w)?;
                denom *= lam;
                let ratio = w.norm() / denom.norm();
                if !ratio.is_finite() || ratio > CONTROL_BLOWUP || ratio < 1.0 / CONTROL_BLOWUP {
                    violated = true;
                    break;
                }
                sup = sup.max(ratio);
                inf = inf.min(ratio);
            }
            Ok((sup, inf, violated))
        })
        .collect();

    let mut sup = 1.0f64;
    let mut inf = 1.0f64;
    let mut violated = false;
    for r in per_point {
        let (s, i, v) = r?;
        sup = sup.max(s);
        inf = inf.min(i);
        violated |= v;
    }
    Ok(ControlReport {
        delta,
        c_hat: sup.max(1.0 / inf),
        max_n_checked: n_max,
        violated,
    })
}

/// Result of extending a boundary conjugacy across annuli.
#[derive(Debug, Clone)]
pub struct LiftResult {
    pub grid: CoordinateGrid,
    pub max_boundary_mismatch: f64,
}

/// Extend `boundary_map`, given on the fundamental annulus
/// A_{r,0} = { |lambda| r <= |z| <= r }, to the annuli A_{r,j} for
/// j = -k_outer..=k_inner by phi(z) = f^j(boundary_map(lambda^{-j} z));
/// negative j runs through Newton inverse branches.
///
/// On A_{r,0} the boundary map must restrict to the identity on S_r and to
/// f(z/lambda) on T_r; the measured mismatch across shared ring boundaries
/// is reported.
pub fn annulus_lift_phi<F>(
    m: &MapSpec,
    boundary_map: F,
    r: f64,
    k_outer: usize,
    k_inner: usize,
    rings_per_annulus: usize,
    angles: usize,
    budget: &EvalBudget,
) -> Result<LiftResult>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    budget.validate()?;
    if !(r > 0.0) || rings_per_annulus == 0 {
        return Err(GermError::DegenerateInput {
            what: "annulus lift needs r > 0 and rings_per_annulus > 0",
        });
    }
    let report = classify_fixed_point(m, budget)?;
    expect_class(&report, FixedPointClass::Attracting)?;
    let lam = report.multiplier;
    let sigma = lam.norm();

    // Ring positions as exact rationals X = x_num / rings_per_annulus with
    // |z| = r sigma^X, X descending from k_inner+1 (innermost radius) to
    // -k_outer (outermost).
    let rpa = rings_per_annulus as i64;
    let x_top = (k_inner as i64 + 1) * rpa;
    let x_bot = -(k_outer as i64) * rpa;
    let ring_nums: Vec<i64> = (x_bot..=x_top).rev().collect();
    let radii: Vec<f64> = ring_nums
        .iter()
        .map(|&num| r * sigma.powf(num as f64 / rpa as f64))
        .collect();
    let grid = PolarGrid::new(Complex64::ZERO, radii, angles)?;

    let k_inner_i = k_inner as i64;
    let k_outer_i = k_outer as i64;

    // phi on annulus j evaluated at z.
    let value_via = |j: i64, z: Complex64| -> Result<Complex64> {
        let mut w = z;
        if j >= 0 {
            for _ in 0..j {
                w /= lam;
            }
        } else {
            for _ in 0..(-j) {
                w *= lam;
            }
        }
        let mut v = boundary_map(w)?;
        if j >= 0 {
            for _ in 0..j {
                v = m.evaluate(v)?;
            }
        } else {
            for _ in 0..(-j) {
                v = m.local_inverse(v, v / lam, budget)?;
            }
        }
        Ok(v)
    };
    let annulus_of = |x_num: i64| -> i64 { x_num.div_euclid(rpa).clamp(-k_outer_i, k_inner_i) };

    struct Node {
        phi: Complex64,
        depth: u32,
        residual: f64,
        mismatch: f64,
    }

    let raw: Vec<Result<Node>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let ring = grid.ring_of(i);
            let z = grid.node_at(i);
            let x_num = ring_nums[ring];
            let j = annulus_of(x_num);
            let phi = value_via(j, z)?;

            // Continuity across a shared circle: the same point computed
            // through the neighboring annulus.
            let mut mismatch = 0.0;
            if x_num % rpa == 0 {
                let j_raw = x_num / rpa;
                if j_raw > -k_outer_i && j_raw <= k_inner_i {
                    let other = value_via(j_raw - 1, z)?;
                    mismatch = (phi - other).norm();
                }
            }

            // Conjugacy residual f(phi(z)) = phi(lambda z), the right-hand
            // side rebuilt from its own annulus formula.
            let zl = lam * z;
            let j_next = (x_num + rpa).div_euclid(rpa).clamp(-k_outer_i, k_inner_i + 1);
            let phi_zl = value_via(j_next, zl)?;
            let residual = (m.evaluate(phi)? - phi_zl).norm();

            Ok(Node {
                phi,
                depth: j.unsigned_abs() as u32,
                residual,
                mismatch,
            })
        })
        .collect();
    let nodes = collect_results(raw)?;

    let max_boundary_mismatch = nodes.iter().map(|n| n.mismatch).fold(0.0, f64::max);
    if max_boundary_mismatch > CONTINUITY_TOL {
        let worst = nodes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.mismatch.partial_cmp(&b.1.mismatch).unwrap())
            .map(|(i, _)| grid.ring_of(i))
            .unwrap_or(0);
        return Err(GermError::ContinuityBreach {
            radius: grid.radii[worst],
            mismatch: max_boundary_mismatch,
        });
    }

    let max_residual = nodes.iter().map(|n| n.residual).fold(0.0, f64::max);
    let cg = CoordinateGrid {
        psi: nodes.iter().map(|n| n.phi).collect(),
        depth: nodes.iter().map(|n| n.depth).collect(),
        residual: nodes.iter().map(|n| n.residual).collect(),
        grid,
        multiplier: lam,
        class: FixedPointClass::Attracting,
        max_residual,
        normalization_error: f64::NAN,
    };
    Ok(LiftResult {
        grid: cg,
        max_boundary_mismatch,
    })
}

/// Ratio statistics psi2/psi1 over a shared grid; a small deviation
/// certifies the constant-multiple relation between two linearizers.
pub fn uniqueness_check(psi1: &CoordinateGrid, psi2: &CoordinateGrid) -> Result<(Complex64, f64)> {
    check_grids_match(&psi1.grid, &psi2.grid)?;
    let mut ratios = Vec::with_capacity(psi1.psi.len());
    for (a, b) in psi1.psi.iter().zip(&psi2.psi) {
        if a.norm() < 1e-300 {
            continue;
        }
        ratios.push(b / a);
    }
    if ratios.len() < 100 {
        return Err(GermError::GridMismatch {
            why: "fewer than 100 usable overlapping nodes",
        });
    }
    let mean = ratios.iter().sum::<Complex64>() / ratios.len() as f64;
    let dev = ratios.iter().map(|r| (r - mean).norm()).fold(0.0, f64::max);
    Ok((mean, dev))
}

pub(crate) fn check_grids_match(a: &PolarGrid, b: &PolarGrid) -> Result<()> {
    if a.angles_per_ring != b.angles_per_ring || a.radii.len() != b.radii.len() {
        return Err(GermError::GridMismatch {
            why: "node layout differs",
        });
    }
    if (a.center - b.center).norm() > 0.0 {
        return Err(GermError::GridMismatch {
            why: "grid centers differ",
        });
    }
    let close = a
        .radii
        .iter()
        .zip(&b.radii)
        .all(|(x, y)| (x - y).abs() <= 1e-12 * x.max(*y));
    if !close {
        return Err(GermError::GridMismatch {
            why: "ring radii differ",
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::moebius_germ;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn budget() -> EvalBudget {
        EvalBudget::default()
    }

    #[test]
    fn classify_moebius_attracting() {
        let f = moebius_germ(c(0.5, 0.0), c(1.0, 0.0));
        let r = classify_fixed_point(&f, &budget()).unwrap();
        assert_eq!(r.class, FixedPointClass::Attracting);
        assert_eq!(r.method, EstimationMethod::Symbolic);
        assert!((r.multiplier - c(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn classify_monomial_superattracting() {
        let r = classify_fixed_point(&MapSpec::monomial(3), &budget()).unwrap();
        assert_eq!(r.class, FixedPointClass::Superattracting);
        assert_eq!(r.local_degree, Some(3));
    }

    #[test]
    fn classify_quadratic_repelling() {
        let f = MapSpec::power_series(vec![c(2.0, 0.0), c(1.0, 0.0)], 1.0).unwrap();
        let r = classify_fixed_point(&f, &budget()).unwrap();
        assert_eq!(r.class, FixedPointClass::Repelling);
        assert!((r.multiplier - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn classify_neutral_with_flag_logic() {
        let f = MapSpec::linear(Complex64::ONE);
        let r = classify_fixed_point(&f, &budget()).unwrap();
        assert_eq!(r.class, FixedPointClass::Neutral);
        assert!(!r.inconclusive_neutral);

        let g = MapSpec::linear(c(1.0 + 5e-10, 0.0));
        let r = classify_fixed_point(&g, &budget()).unwrap();
        assert_eq!(r.class, FixedPointClass::Neutral);
        assert!(r.inconclusive_neutral);
    }

    #[test]
    fn classify_perturbed_by_orbit_ratio() {
        let m = MapSpec::perturbed(MapSpec::linear(c(0.5, 0.0)), c(0.1, 0.0), 0.5).unwrap();
        let r = classify_fixed_point(&m, &budget()).unwrap();
        assert_eq!(r.class, FixedPointClass::Attracting);
        assert_eq!(r.method, EstimationMethod::OrbitRatio);
        assert!((r.multiplier - c(0.5, 0.0)).norm() < 1e-9, "{}", r.multiplier);
    }

    #[test]
    fn classification_is_scale_invariant() {
        let f = moebius_germ(c(0.5, 0.0), c(1.0, 0.0));
        for &b in &[c(2.0, 0.0), c(0.1, 0.3), c(0.0, -3.0)] {
            let conj = f.conjugate_by_scaling(b).unwrap();
            let r = classify_fixed_point(&conj, &budget()).unwrap();
            assert_eq!(r.class, FixedPointClass::Attracting);
            assert!((r.multiplier - c(0.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn koenigs_of_exact_linear_map() {
        let f = MapSpec::linear(c(0.5, 0.0));
        let grid = PolarGrid::log_spaced(1e-3, 0.1, 8, 8).unwrap();
        let cg = koenigs_forward(&f, &grid, &budget()).unwrap();
        for ((_, _, z), psi) in grid.nodes().zip(&cg.psi) {
            assert!((psi - z).norm() < 1e-15);
        }
        assert!(cg.max_residual < 1e-15);
        assert!(cg.depth.iter().all(|&d| d == 1));
    }

    #[test]
    fn koenigs_moebius_matches_closed_form_pointwise() {
        // psi(z) = z/(1 - c z) with c = a/(lambda - 1) = -2.
        let f = moebius_germ(c(0.5, 0.0), c(1.0, 0.0));
        let (psi, _) = koenigs_psi_at(&f, c(0.1, 0.0), &budget()).unwrap();
        assert!((psi - c(0.1 / 1.2, 0.0)).norm() < 1e-9, "psi = {psi}");
    }

    #[test]
    fn koenigs_rejects_wrong_class() {
        let grid = PolarGrid::log_spaced(1e-3, 0.1, 8, 8).unwrap();
        let rep = MapSpec::linear(c(2.0, 0.0));
        assert!(matches!(
            koenigs_forward(&rep, &grid, &budget()),
            Err(GermError::WrongClass { .. })
        ));
        let att = MapSpec::linear(c(0.5, 0.0));
        assert!(matches!(
            koenigs_backward(&att, &grid, &budget()),
            Err(GermError::WrongClass { .. })
        ));
    }

    #[test]
    fn koenigs_backward_linear_is_identity() {
        let f = MapSpec::linear(c(2.0, 0.0));
        let grid = PolarGrid::log_spaced(1e-3, 0.1, 8, 8).unwrap();
        let cg = koenigs_backward(&f, &grid, &budget()).unwrap();
        for ((_, _, z), psi) in grid.nodes().zip(&cg.psi) {
            assert!((psi - z).norm() < 1e-12);
        }
    }

    #[test]
    fn koenigs_backward_moebius_closed_form() {
        // f = 2z/(1+z): psi(z) = z/(1-z).
        let f = moebius_germ(c(2.0, 0.0), c(1.0, 0.0));
        let grid = PolarGrid::log_spaced(1e-3, 0.1, 10, 8).unwrap();
        let cg = koenigs_backward(&f, &grid, &budget()).unwrap();
        for ((_, _, z), psi) in grid.nodes().zip(&cg.psi) {
            let expect = z / (Complex64::ONE - z);
            assert!((psi - expect).norm() < 1e-9, "z={z} psi={psi}");
        }
    }

    #[test]
    fn control_condition_linear_is_exactly_one() {
        let f = MapSpec::linear(c(0.5, 0.3));
        let rep = control_condition(&f, 0.1, 60, 64).unwrap();
        assert_eq!(rep.c_hat, 1.0);
        assert!(!rep.violated);
    }

    #[test]
    fn control_condition_moebius_bounded() {
        let f = moebius_germ(c(0.5, 0.0), c(1.0, 0.0));
        let rep = control_condition(&f, 0.1, 60, 64).unwrap();
        assert!(!rep.violated);
        assert!(rep.c_hat <= 1.3, "c_hat = {}", rep.c_hat);
        assert!(rep.c_hat >= 1.0);
    }

    #[test]
    fn control_condition_holds_for_c1alpha_perturbation() {
        let m = MapSpec::perturbed(MapSpec::linear(c(0.5, 0.0)), c(0.1, 0.0), 0.5).unwrap();
        let rep = control_condition(&m, 0.05, 40, 32).unwrap();
        assert!(!rep.violated);
        assert!(rep.c_hat.is_finite());
    }

    #[test]
    fn control_c_hat_nonincreasing_as_delta_shrinks() {
        let f = moebius_germ(c(0.5, 0.0), c(1.0, 0.0));
        let big = control_condition(&f, 0.1, 60, 64).unwrap();
        let small = control_condition(&f, 0.05, 60, 64).unwrap();
        assert!(small.c_hat <= big.c_hat + 1e-12);
    }

    #[test]
    fn annulus_lift_of_linear_map_is_identity() {
        let f = MapSpec::linear(c(0.5, 0.0));
        let lift = annulus_lift_phi(&f, |z| Ok(z), 0.01, 2, 3, 4, 16, &budget()).unwrap();
        for ((_, _, z), phi) in lift.grid.grid.nodes().zip(&lift.grid.psi) {
            assert!((phi - z).norm() < 1e-12 * z.norm().max(1e-3));
        }
        assert!(lift.max_boundary_mismatch < 1e-12);
        assert!(lift.grid.max_residual < 1e-12);
    }

    #[test]
    fn uniqueness_detects_constant_multiple() {
        let f = moebius_germ(c(0.5, 0.0), c(1.0, 0.0));
        let grid = PolarGrid::log_spaced(1e-3, 0.1, 16, 8).unwrap();
        let cg1 = koenigs_forward(&f, &grid, &budget()).unwrap();
        let mut cg2 = cg1.clone();
        for p in &mut cg2.psi {
            *p *= c(3.0, 0.0);
        }
        let (mean, dev) = uniqueness_check(&cg1, &cg2).unwrap();
        assert!((mean - c(3.0, 0.0)).norm() < 1e-12);
        assert!(dev < 1e-12);
    }

    #[test]
    fn uniqueness_across_budgets_is_tiny() {
        // Ratio deviation scales like psi-error / |z|, so keep the inner
        // ring away from 0 when comparing runs at different tolerances.
        let f = moebius_germ(c(0.5, 0.0), c(1.0, 0.0));
        let grid = PolarGrid::log_spaced(0.01, 0.1, 16, 8).unwrap();
        let cg1 = koenigs_forward(&f, &grid, &budget()).unwrap();
        let looser = EvalBudget::default().with_tolerance(1e-10);
        let cg2 = koenigs_forward(&f, &grid, &looser).unwrap();
        let (mean, dev) = uniqueness_check(&cg1, &cg2).unwrap();
        assert!((mean - Complex64::ONE).norm() < 1e-9);
        assert!(dev < 1e-8, "dev = {dev}");
    }

    #[test]
    fn depth_monotonicity_on_moebius() {
        let f = moebius_germ(c(0.5, 0.0), c(1.0, 0.0));
        let lam = c(0.5, 0.0);
        let z = c(0.08, 0.03);
        let exact = z / (Complex64::ONE + 2.0 * z);
        for k in [5usize, 10, 20, 40] {
            let a = (forward_psi_at_depth(&f, lam, z, k).unwrap() - exact).norm();
            let b = (forward_psi_at_depth(&f, lam, z, k + 5).unwrap() - exact).norm();
            assert!(b <= a + 1e-15, "depth {k}: {a} -> {b}");
        }
    }
}
