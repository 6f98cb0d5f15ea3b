//! Explicit holomorphic motions of E = S_r union T_r, their axiom checks,
//! and an explicit annulus extension with measured dilatation.
//!
//! The motions are the closed-form families from the linearization and
//! normal-form constructions: identity on S_r, a rescaled copy of the map
//! (respectively of the covering lift) on T_r, holomorphic in the disk
//! parameter c. The extension to the annulus between the circles is
//! log-radial interpolation of boundary logarithms, Fourier-interpolated in
//! angle; its dilatation is measured, never assumed, and reported next to
//! the (1+|c|)/(1-|c|) bound satisfied by the optimal extension.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;
use std::sync::Arc;

use crate::boettcher::covering_lift_h;
use crate::error::{GermError, Result};
use crate::grid::PolarGrid;
use crate::koenigs::{classify_fixed_point, FixedPointClass};
use crate::map::{EvalBudget, MapSpec};

/// CR residuals below this pass the holomorphy check.
pub const CR_TOL: f64 = 1e-6;
/// Stencil step for the holomorphy check in c.
const CR_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionKind {
    Koenig,
    Boettcher,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Circle {
    S,
    T,
}

/// How to evaluate h(c, z) for z on E at arbitrary c.
#[derive(Clone)]
pub enum MotionEval {
    Koenig {
        map: MapSpec,
        lambda: Complex64,
        delta: f64,
        r: f64,
        budget: EvalBudget,
    },
    Boettcher {
        gt: MapSpec,
        n: u32,
        r: f64,
        budget: EvalBudget,
    },
    /// A user-supplied motion (c, z) -> h(c, z).
    Closure(Arc<dyn Fn(Complex64, Complex64) -> Result<Complex64> + Send + Sync>),
}

impl std::fmt::Debug for MotionEval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MotionEval::Koenig { lambda, delta, r, .. } => f
                .debug_struct("Koenig")
                .field("lambda", lambda)
                .field("delta", delta)
                .field("r", r)
                .finish(),
            MotionEval::Boettcher { n, r, .. } => f
                .debug_struct("Boettcher")
                .field("n", n)
                .field("r", r)
                .finish(),
            MotionEval::Closure(_) => f.write_str("Closure(..)"),
        }
    }
}

/// A holomorphic motion sampled on E = S_r union T_r over parameters c.
///
/// `values[ci]` holds h(c_samples[ci], .) over s_points then t_points;
/// the c = 0 column is the identity bitwise.
#[derive(Debug, Clone)]
pub struct MotionSample {
    pub kind: MotionKind,
    pub r: f64,
    pub s_radius: f64,
    pub t_radius: f64,
    pub s_points: Vec<Complex64>,
    pub t_points: Vec<Complex64>,
    pub c_samples: Vec<Complex64>,
    pub values: Vec<Vec<Complex64>>,
    eval: MotionEval,
}

impl MotionSample {
    /// h(c, z) for z a point of E on the given circle.
    pub fn eval(&self, c: Complex64, z: Complex64, circle: Circle) -> Result<Complex64> {
        match &self.eval {
            MotionEval::Koenig {
                map,
                lambda,
                delta,
                r,
                ..
            } => match circle {
                Circle::S => Ok(z),
                Circle::T => {
                    if c == Complex64::ZERO {
                        return Ok(z);
                    }
                    let w = c * delta * z / (r * lambda);
                    if w.norm() > delta * (1.0 + 1e-9) {
                        return Err(GermError::OutsideDomain {
                            z: w,
                            radius: *delta,
                        });
                    }
                    Ok(r / (c * delta) * map.evaluate(w)?)
                }
            },
            MotionEval::Boettcher { gt, n, r, budget } => match circle {
                Circle::S => Ok(z),
                Circle::T => {
                    if c == Complex64::ZERO {
                        return Ok(z);
                    }
                    let root = r.powf(1.0 / *n as f64);
                    let w = c * z / root;
                    let h = covering_lift_h(gt, *n, w, budget)?;
                    Ok(root / c * h)
                }
            },
            MotionEval::Closure(f) => f(c, z),
        }
    }

    pub fn point_count(&self) -> usize {
        self.s_points.len() + self.t_points.len()
    }

    /// Points of E in value order, tagged with their circle.
    pub fn e_points(&self) -> impl Iterator<Item = (Circle, Complex64)> + '_ {
        self.s_points
            .iter()
            .map(|&z| (Circle::S, z))
            .chain(self.t_points.iter().map(|&z| (Circle::T, z)))
    }
}

fn circle_points(radius: f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|k| Complex64::from_polar(radius, TAU * k as f64 / count as f64))
        .collect()
}

/// c = 0 first, then six rings of eight angles filling the unit disk.
pub fn default_c_samples() -> Vec<Complex64> {
    let mut cs = vec![Complex64::ZERO];
    for &rho in &[0.05, 0.1, 0.2, 0.4, 0.6, 0.8] {
        for k in 0..8 {
            cs.push(Complex64::from_polar(rho, TAU * k as f64 / 8.0));
        }
    }
    cs
}

fn normalize_c_samples(c_samples: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut cs = vec![Complex64::ZERO];
    for &c in c_samples {
        if c.norm() >= 1.0 {
            return Err(GermError::OutOfRange {
                what: "motion parameter |c|",
                value: c.norm(),
            });
        }
        if c != Complex64::ZERO {
            cs.push(c);
        }
    }
    Ok(cs)
}

fn fill_values(ms: &mut MotionSample) -> Result<()> {
    let pts: Vec<(Circle, Complex64)> = ms.e_points().collect();
    let mut values = Vec::with_capacity(ms.c_samples.len());
    for &c in &ms.c_samples {
        if c == Complex64::ZERO {
            // Axiom (1) bitwise: the motion restricted to c = 0 is the
            // stored point set itself.
            values.push(pts.iter().map(|p| p.1).collect());
            continue;
        }
        let row: Vec<Result<Complex64>> = pts
            .par_iter()
            .map(|&(circle, z)| ms.eval(c, z, circle))
            .collect();
        let mut out = Vec::with_capacity(row.len());
        for v in row {
            out.push(v?);
        }
        values.push(out);
    }
    ms.values = values;
    Ok(())
}

/// The linearization-proof motion: identity on S_r and
/// (r/(c delta)) f(c delta z / (r lambda)) on T_r = |lambda| S_r.
pub fn build_motion_koenig(
    f: &MapSpec,
    r: f64,
    delta: f64,
    samples: usize,
    c_samples: &[Complex64],
    budget: &EvalBudget,
) -> Result<MotionSample> {
    budget.validate()?;
    if !(r > 0.0 && delta >= r) {
        return Err(GermError::OutOfRange {
            what: "motion radius r (needs 0 < r <= delta)",
            value: r,
        });
    }
    if samples < 8 {
        return Err(GermError::DegenerateInput {
            what: "motion needs at least 8 samples per circle",
        });
    }
    let report = classify_fixed_point(f, budget)?;
    if report.class != FixedPointClass::Attracting {
        return Err(GermError::WrongClass {
            expected: FixedPointClass::Attracting,
            found: report.class,
        });
    }
    let lambda = report.multiplier;

    // The proof needs |f(z)| < |z| on the closed delta-disk.
    for &rho in &[delta, delta * lambda.norm(), r] {
        for &z in &circle_points(rho, samples.max(16)) {
            if f.evaluate(z)?.norm() >= z.norm() {
                return Err(GermError::DegenerateInput {
                    what: "|f(z)| < |z| fails on the delta disk",
                });
            }
        }
    }

    let t_radius = lambda.norm() * r;
    let mut ms = MotionSample {
        kind: MotionKind::Koenig,
        r,
        s_radius: r,
        t_radius,
        s_points: circle_points(r, samples),
        t_points: circle_points(t_radius, samples),
        c_samples: normalize_c_samples(c_samples)?,
        values: Vec::new(),
        eval: MotionEval::Koenig {
            map: f.clone(),
            lambda,
            delta,
            r,
            budget: *budget,
        },
    };
    fill_values(&mut ms)?;
    Ok(ms)
}

/// The normal-form-proof motion: identity on S_r and
/// (r^{1/n}/c) h(c z / r^{1/n}) on T_r = { |z| = r^{1/n} }, where h is the
/// covering lift with g(h(z)) = z^n. The non-crossing bound |h_r(c,z)| > r
/// is checked on every sample.
pub fn build_motion_boettcher(
    g: &MapSpec,
    r: f64,
    samples: usize,
    c_samples: &[Complex64],
    budget: &EvalBudget,
) -> Result<MotionSample> {
    budget.validate()?;
    if samples < 8 {
        return Err(GermError::DegenerateInput {
            what: "motion needs at least 8 samples per circle",
        });
    }
    let report = classify_fixed_point(g, budget)?;
    if report.class != FixedPointClass::Superattracting {
        return Err(GermError::WrongClass {
            expected: FixedPointClass::Superattracting,
            found: report.class,
        });
    }
    let n = report.local_degree.unwrap();
    let r_cap = 0.5f64.powf(n as f64 / (n as f64 - 1.0));
    if !(r > 0.0 && r <= r_cap) {
        return Err(GermError::OutOfRange {
            what: "motion radius r (needs r <= (1/2)^{n/(n-1)})",
            value: r,
        });
    }
    let (_, gt) = crate::boettcher::normalize_leading(g, budget)?;

    let t_radius = r.powf(1.0 / n as f64);
    let mut ms = MotionSample {
        kind: MotionKind::Boettcher,
        r,
        s_radius: r,
        t_radius,
        s_points: circle_points(r, samples),
        t_points: circle_points(t_radius, samples),
        c_samples: normalize_c_samples(c_samples)?,
        values: Vec::new(),
        eval: MotionEval::Boettcher {
            gt,
            n,
            r,
            budget: *budget,
        },
    };
    fill_values(&mut ms)?;

    for (ci, row) in ms.values.iter().enumerate() {
        if ms.c_samples[ci] == Complex64::ZERO {
            continue;
        }
        let min_t = row[ms.s_points.len()..]
            .iter()
            .map(|v| v.norm())
            .fold(f64::INFINITY, f64::min);
        if min_t <= r {
            return Err(GermError::NonCrossingViolated { value: min_t, r });
        }
    }
    Ok(ms)
}

/// A motion from a closure, sampled like the built ones.
pub fn build_motion_custom(
    kind: MotionKind,
    r: f64,
    s_radius: f64,
    t_radius: f64,
    samples: usize,
    c_samples: &[Complex64],
    eval: Arc<dyn Fn(Complex64, Complex64) -> Result<Complex64> + Send + Sync>,
) -> Result<MotionSample> {
    let mut ms = MotionSample {
        kind,
        r,
        s_radius,
        t_radius,
        s_points: circle_points(s_radius, samples),
        t_points: circle_points(t_radius, samples),
        c_samples: normalize_c_samples(c_samples)?,
        values: Vec::new(),
        eval: MotionEval::Closure(eval),
    };
    fill_values(&mut ms)?;
    Ok(ms)
}

#[derive(Debug, Clone, Serialize)]
pub struct MotionAxiomReport {
    pub identity_exact: bool,
    pub injective: bool,
    pub min_pairwise_distance: f64,
    pub separation_ok: bool,
    /// Distance between the circle images: r - sup|h(T)| for the Koenig
    /// motion, inf|h(T)| - r for the Boettcher one.
    pub separation_margin: f64,
    pub cr_max_residual: f64,
    pub holomorphic: bool,
    pub failures: Vec<String>,
}

impl MotionAxiomReport {
    pub fn all_pass(&self) -> bool {
        self.identity_exact && self.injective && self.separation_ok && self.holomorphic
    }
}

/// Verify the three motion axioms numerically: identity at c = 0 exactly,
/// injectivity per fixed c (pairwise distances plus circle-image
/// separation), and holomorphy in c through a five-point Cauchy-Riemann
/// stencil at eight base points per sampled disk radius.
pub fn check_motion_axioms(ms: &MotionSample) -> Result<MotionAxiomReport> {
    let mut failures = Vec::new();

    // (1) identity at c = 0, bitwise.
    let pts: Vec<Complex64> = ms.e_points().map(|p| p.1).collect();
    let identity_exact = match ms.c_samples.iter().position(|&c| c == Complex64::ZERO) {
        Some(i) => ms.values[i] == pts,
        None => {
            failures.push("c = 0 missing from the sample set".to_string());
            false
        }
    };
    if !identity_exact {
        failures.push("h(0, .) differs from the identity".to_string());
    }

    // (2) injectivity per fixed c.
    let ns = ms.s_points.len();
    let mut min_pairwise = f64::INFINITY;
    for row in &ms.values {
        for circle in [&row[..ns], &row[ns..]] {
            for i in 0..circle.len() {
                for j in i + 1..circle.len() {
                    min_pairwise = min_pairwise.min((circle[i] - circle[j]).norm());
                }
            }
        }
    }
    let injective = min_pairwise > 0.0;
    if !injective {
        failures.push("two points of E collided under h(c, .)".to_string());
    }

    // Circle images must not cross; S_r stays put, so the margin is the gap
    // between r and the T_r image.
    let mut separation_margin = f64::INFINITY;
    for row in &ms.values {
        let margin = match ms.kind {
            MotionKind::Koenig => {
                let sup = row[ns..].iter().map(|v| v.norm()).fold(0.0, f64::max);
                ms.r - sup
            }
            MotionKind::Boettcher => {
                let inf = row[ns..]
                    .iter()
                    .map(|v| v.norm())
                    .fold(f64::INFINITY, f64::min);
                inf - ms.r
            }
        };
        separation_margin = separation_margin.min(margin);
    }
    let separation_ok = separation_margin > 0.0;
    if !separation_ok {
        failures.push(format!(
            "circle images cross: margin {separation_margin:.3e}"
        ));
    }

    // (3) holomorphy in c: |d h / d conj(c)| at base points away from the
    // sampled c values.
    let mut base_points = Vec::new();
    let mut radii: Vec<f64> = ms
        .c_samples
        .iter()
        .map(|c| c.norm())
        .filter(|r| *r > 0.0)
        .collect();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    radii.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    for &rho in &radii {
        for k in 0..8 {
            base_points.push(Complex64::from_polar(rho, TAU * (k as f64 + 0.5) / 8.0));
        }
    }

    let tasks: Vec<(Complex64, Circle, Complex64)> = base_points
        .iter()
        .flat_map(|&c| ms.e_points().map(move |(circle, z)| (c, circle, z)))
        .collect();
    let residuals: Vec<Result<f64>> = tasks
        .par_iter()
        .map(|&(c, circle, z)| {
            let i = Complex64::I;
            let hx = (ms.eval(c + CR_STEP, z, circle)? - ms.eval(c - CR_STEP, z, circle)?)
                / (2.0 * CR_STEP);
            let hy = (ms.eval(c + i * CR_STEP, z, circle)? - ms.eval(c - i * CR_STEP, z, circle)?)
                / (2.0 * CR_STEP);
            Ok(((hx + i * hy) / 2.0).norm())
        })
        .collect();
    let mut cr_max_residual = 0.0f64;
    for r in residuals {
        cr_max_residual = cr_max_residual.max(r?);
    }
    let holomorphic = cr_max_residual < CR_TOL;
    if !holomorphic {
        failures.push(format!(
            "Cauchy-Riemann residual {cr_max_residual:.3e} exceeds {CR_TOL:.0e}"
        ));
    }

    Ok(MotionAxiomReport {
        identity_exact,
        injective,
        min_pairwise_distance: min_pairwise,
        separation_ok,
        separation_margin,
        cr_max_residual,
        holomorphic,
        failures,
    })
}

/// One extension H(c, .) as an evaluable function on the closed annulus.
#[derive(Debug, Clone)]
pub struct RadialInterpolant {
    fourier_in: Fourier,
    fourier_out: Fourier,
    lo: f64,
    hi: f64,
}

impl RadialInterpolant {
    /// H(z) = z exp((1-s) L_in(theta) + s L_out(theta)); the log-radial
    /// position s is clamped to the annulus.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let s = ((z.norm().ln() - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0);
        let theta = z.arg();
        let l = self.fourier_in.eval(theta) * (1.0 - s) + self.fourier_out.eval(theta) * s;
        z * l.exp()
    }
}

/// A motion extended over the annulus between its two circles, with the
/// measured dilatation per parameter and the optimal-extension bound for
/// comparison.
#[derive(Debug, Clone)]
pub struct ExtendedMotion {
    pub base: MotionSample,
    pub grid: PolarGrid,
    /// H(c, node) per c sample, node order matching `grid`.
    pub values: Vec<Vec<Complex64>>,
    /// sup |mu_H| over interior nodes, per c sample.
    pub measured_k: Vec<f64>,
    /// (1 + |c|)/(1 - |c|) per c sample; displayed, never asserted.
    pub bound: Vec<f64>,
    /// The evaluable extension per c sample.
    pub interpolants: Vec<RadialInterpolant>,
}

impl ExtendedMotion {
    /// Evaluate H(c_samples[ci], z) anywhere on the annulus.
    pub fn eval(&self, ci: usize, z: Complex64) -> Complex64 {
        self.interpolants[ci].eval(z)
    }
}

/// Extend h(c, .) from the boundary circles to the annulus between them:
/// H(c, z) = z exp((1-s) L_in(theta) + s L_out(theta)) where L_* are
/// principal logarithms of h/id on the circles (Fourier-interpolated in
/// theta) and s is the log-radial position. Requires |h/z - 1| < 1/2 so the
/// principal branch is safe.
pub fn extend_motion_radial(ms: &MotionSample, rings: usize) -> Result<ExtendedMotion> {
    let samples = ms.s_points.len();
    if ms.t_points.len() != samples {
        return Err(GermError::DegenerateInput {
            what: "extension needs matching circle sample counts",
        });
    }
    let (rho_in, rho_out, inner_start, outer_start) = if ms.t_radius < ms.s_radius {
        (ms.t_radius, ms.s_radius, samples, 0)
    } else {
        (ms.s_radius, ms.t_radius, 0, samples)
    };

    // Radii with the boundary circles pinned exactly.
    let total = rings + 2;
    let (lo, hi) = (rho_in.ln(), rho_out.ln());
    let mut radii: Vec<f64> = (0..total)
        .map(|i| (lo + (hi - lo) * i as f64 / (total - 1) as f64).exp())
        .collect();
    radii[0] = rho_in;
    radii[total - 1] = rho_out;
    let grid = PolarGrid::new(Complex64::ZERO, radii, samples)?;

    let mut values = Vec::with_capacity(ms.c_samples.len());
    let mut measured_k = Vec::with_capacity(ms.c_samples.len());
    let mut bound = Vec::with_capacity(ms.c_samples.len());
    let mut interpolants = Vec::with_capacity(ms.c_samples.len());

    for (ci, row) in ms.values.iter().enumerate() {
        let c = ms.c_samples[ci];

        let log_ratio = |start: usize, pts: &[Complex64]| -> Result<Vec<Complex64>> {
            let mut logs = Vec::with_capacity(samples);
            for k in 0..samples {
                let ratio = row[start + k] / pts[k];
                let dev = (ratio - Complex64::ONE).norm();
                if dev >= 0.5 {
                    return Err(GermError::BranchFailure { deviation: dev });
                }
                logs.push(ratio.ln());
            }
            Ok(logs)
        };
        let (inner_pts, outer_pts) = if ms.t_radius < ms.s_radius {
            (&ms.t_points, &ms.s_points)
        } else {
            (&ms.s_points, &ms.t_points)
        };
        let interp = RadialInterpolant {
            fourier_in: Fourier::fit(&log_ratio(inner_start, inner_pts)?),
            fourier_out: Fourier::fit(&log_ratio(outer_start, outer_pts)?),
            lo,
            hi,
        };

        let node_values = grid.par_map(|z| interp.eval(z));

        // Dilatation of the interpolant, interior nodes only so the stencil
        // stays inside the annulus.
        let fd = 1e-6 * rho_in;
        let interior: Vec<usize> = (0..grid.len())
            .filter(|&i| {
                let ring = grid.ring_of(i);
                ring > 0 && ring + 1 < grid.rings()
            })
            .collect();
        let mus: Vec<f64> = interior
            .par_iter()
            .map(|&i| {
                let z = grid.node_at(i);
                let (fz, fzb) = wirtinger_exact(&|w| interp.eval(w), z, fd);
                if fz.norm() < 10.0 * fd {
                    return f64::NAN;
                }
                (fzb / fz).norm()
            })
            .collect();
        let sup_mu = mus.iter().copied().filter(|m| m.is_finite()).fold(0.0, f64::max);

        values.push(node_values);
        measured_k.push(sup_mu);
        bound.push((1.0 + c.norm()) / (1.0 - c.norm()));
        interpolants.push(interp);
    }

    Ok(ExtendedMotion {
        base: ms.clone(),
        grid,
        values,
        measured_k,
        bound,
        interpolants,
    })
}

fn wirtinger_exact<F: Fn(Complex64) -> Complex64>(
    f: &F,
    z: Complex64,
    h: f64,
) -> (Complex64, Complex64) {
    let i = Complex64::I;
    let fx = (f(z + h) - f(z - h)) / (2.0 * h);
    let fy = (f(z + i * h) - f(z - i * h)) / (2.0 * h);
    ((fx - i * fy) / 2.0, (fx + i * fy) / 2.0)
}

/// Theorem bound (1 + |c|)/(1 - |c|) for the optimal extension.
pub fn motion_dilatation_bound(c: Complex64) -> Result<f64> {
    if c.norm() >= 1.0 {
        return Err(GermError::OutOfRange {
            what: "motion parameter |c|",
            value: c.norm(),
        });
    }
    Ok((1.0 + c.norm()) / (1.0 - c.norm()))
}

/// Trigonometric interpolation of equally spaced complex samples.
#[derive(Debug, Clone)]
struct Fourier {
    coeffs: Vec<Complex64>,
}

impl Fourier {
    fn fit(samples: &[Complex64]) -> Fourier {
        let n = samples.len();
        let mut coeffs = Vec::with_capacity(n);
        for m in 0..n {
            let mut acc = Complex64::ZERO;
            for (k, &v) in samples.iter().enumerate() {
                let phase = -TAU * (m * k) as f64 / n as f64;
                acc += v * Complex64::from_polar(1.0, phase);
            }
            coeffs.push(acc / n as f64);
        }
        Fourier { coeffs }
    }

    fn eval(&self, theta: f64) -> Complex64 {
        let n = self.coeffs.len();
        let half = n / 2;
        let mut acc = Complex64::ZERO;
        for (m, &c) in self.coeffs.iter().enumerate() {
            // Map to symmetric frequencies; the Nyquist mode becomes a
            // cosine so interpolation at the sample angles stays exact.
            if 2 * m == n {
                acc += c * (half as f64 * theta).cos();
            } else {
                let freq = if m <= half { m as f64 } else { m as f64 - n as f64 };
                acc += c * Complex64::from_polar(1.0, freq * theta);
            }
        }
        acc
    }
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

    fn small_c_set() -> Vec<Complex64> {
        let mut cs = Vec::new();
        for &rho in &[0.1, 0.4, 0.8] {
            for k in 0..8 {
                cs.push(Complex64::from_polar(rho, TAU * k as f64 / 8.0));
            }
        }
        cs
    }

    #[test]
    fn trivial_motion_passes_all_axioms() {
        let ms = build_motion_custom(
            MotionKind::Koenig,
            0.01,
            0.01,
            0.005,
            16,
            &small_c_set(),
            Arc::new(|_, z| Ok(z)),
        )
        .unwrap();
        let report = check_motion_axioms(&ms).unwrap();
        assert!(report.all_pass(), "{:?}", report.failures);
        assert!(report.cr_max_residual < 1e-12);
    }

    #[test]
    fn non_holomorphic_motion_fails_cr_check() {
        let r = 0.01;
        let ms = build_motion_custom(
            MotionKind::Koenig,
            r,
            r,
            0.005,
            16,
            &small_c_set(),
            Arc::new(move |c: Complex64, z: Complex64| Ok(z + c.norm() * r / 10.0)),
        )
        .unwrap();
        let report = check_motion_axioms(&ms).unwrap();
        assert!(!report.holomorphic, "cr = {}", report.cr_max_residual);
        assert!(report.cr_max_residual > 1e-5);
    }

    #[test]
    fn koenig_motion_of_linear_map_is_identity() {
        let f = MapSpec::linear(c(0.5, 0.0));
        let ms = build_motion_koenig(&f, 0.01, 0.1, 16, &small_c_set(), &budget()).unwrap();
        for row in &ms.values {
            for (v, (_, z)) in row.iter().zip(ms.e_points()) {
                assert!((v - z).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn koenig_motion_identity_at_zero_is_bitwise() {
        let f = moebius_germ(c(0.5, 0.0), c(1.0, 0.0));
        let ms = build_motion_koenig(&f, 0.01, 0.1, 32, &small_c_set(), &budget()).unwrap();
        let pts: Vec<Complex64> = ms.e_points().map(|p| p.1).collect();
        assert_eq!(ms.values[0], pts);
    }

    #[test]
    fn koenig_motion_moebius_stays_inside_r() {
        // The proofs' strict bound |h(c,z)| < r on T_r.
        let f = moebius_germ(c(0.5, 0.0), c(1.0, 0.0));
        let ms = build_motion_koenig(&f, 0.01, 0.1, 64, &small_c_set(), &budget()).unwrap();
        let ns = ms.s_points.len();
        for (ci, row) in ms.values.iter().enumerate() {
            if ms.c_samples[ci] == Complex64::ZERO {
                continue;
            }
            for v in &row[ns..] {
                assert!(v.norm() < ms.r, "|h| = {} at c = {}", v.norm(), ms.c_samples[ci]);
            }
        }
        let report = check_motion_axioms(&ms).unwrap();
        assert!(report.all_pass(), "{:?}", report.failures);
        assert!(report.cr_max_residual < 1e-7);
    }

    #[test]
    fn boettcher_motion_monomial_is_identity() {
        let ms =
            build_motion_boettcher(&MapSpec::monomial(2), 0.01, 16, &small_c_set(), &budget())
                .unwrap();
        for row in &ms.values {
            for (v, (_, z)) in row.iter().zip(ms.e_points()) {
                assert!((v - z).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn boettcher_motion_moebius_power_stays_outside_r() {
        let g = MapSpec::moebius_power(2, Complex64::ONE).unwrap();
        let mut cs = small_c_set();
        for k in 0..8 {
            cs.push(Complex64::from_polar(0.9, TAU * k as f64 / 8.0));
        }
        let ms = build_motion_boettcher(&g, 0.01, 32, &cs, &budget()).unwrap();
        let ns = ms.s_points.len();
        for (ci, row) in ms.values.iter().enumerate() {
            if ms.c_samples[ci] == Complex64::ZERO {
                continue;
            }
            let min = row[ns..].iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
            assert!(min > ms.r, "min |h| = {min} at c = {}", ms.c_samples[ci]);
        }
    }

    #[test]
    fn motion_rejects_radius_beyond_proof_constraint() {
        let g = MapSpec::moebius_power(2, Complex64::ONE).unwrap();
        // (1/2)^{n/(n-1)} = 0.25 for n = 2.
        assert!(matches!(
            build_motion_boettcher(&g, 0.3, 16, &small_c_set(), &budget()),
            Err(GermError::OutOfRange { .. })
        ));
    }

    #[test]
    fn extension_of_identity_motion_is_identity() {
        let ms = build_motion_custom(
            MotionKind::Koenig,
            0.01,
            0.01,
            0.005,
            16,
            &small_c_set(),
            Arc::new(|_, z| Ok(z)),
        )
        .unwrap();
        let ext = extend_motion_radial(&ms, 8).unwrap();
        for row in &ext.values {
            for (v, (_, _, z)) in row.iter().zip(ext.grid.nodes()) {
                assert!((v - z).norm() < 1e-14);
            }
        }
        for &k in &ext.measured_k {
            assert!(k < 1e-9, "k = {k}");
        }
    }

    #[test]
    fn extension_reproduces_boundary_values() {
        let f = moebius_germ(c(0.5, 0.0), c(1.0, 0.0));
        let ms = build_motion_koenig(&f, 0.01, 0.1, 32, &small_c_set(), &budget()).unwrap();
        let ext = extend_motion_radial(&ms, 10).unwrap();
        let ns = ms.s_points.len();
        let last_ring = ext.grid.rings() - 1;
        for (ci, row) in ext.values.iter().enumerate() {
            for k in 0..ns {
                // Inner boundary is T_r (koenig), outer is S_r.
                let inner = row[k];
                assert!(
                    (inner - ms.values[ci][ns + k]).norm() < 1e-12,
                    "c index {ci}, angle {k}"
                );
                let outer = row[last_ring * ns + k];
                assert!((outer - ms.values[ci][k]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn extension_dilatation_scales_with_c() {
        let f = moebius_germ(c(0.5, 0.0), c(1.0, 0.0));
        let cs = vec![c(0.01, 0.0), c(0.1, 0.0)];
        let ms = build_motion_koenig(&f, 0.01, 0.1, 32, &cs, &budget()).unwrap();
        let ext = extend_motion_radial(&ms, 10).unwrap();
        let k_small = ext.measured_k[1];
        let k_big = ext.measured_k[2];
        assert!(k_small < k_big / 2.0, "k(0.01) = {k_small}, k(0.1) = {k_big}");
        for &k in &ext.measured_k {
            assert!(k < 1.0);
        }
    }

    #[test]
    fn dilatation_bound_values() {
        assert_eq!(motion_dilatation_bound(Complex64::ZERO).unwrap(), 1.0);
        assert_eq!(motion_dilatation_bound(c(0.5, 0.0)).unwrap(), 3.0);
        assert!((motion_dilatation_bound(c(0.0, 1.0 / 3.0)).unwrap() - 2.0).abs() < 1e-12);
        assert!(motion_dilatation_bound(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn fourier_interpolation_is_exact_at_samples() {
        let vals: Vec<Complex64> = (0..16)
            .map(|k| {
                let t = TAU * k as f64 / 16.0;
                c((2.0 * t).cos() * 0.3, (3.0 * t).sin() * 0.1)
            })
            .collect();
        let f = Fourier::fit(&vals);
        for (k, &v) in vals.iter().enumerate() {
            let t = TAU * k as f64 / 16.0;
            assert!((f.eval(t) - v).norm() < 1e-13);
        }
    }
}
