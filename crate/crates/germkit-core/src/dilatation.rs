//! Beltrami coefficients and asymptotic-conformality diagnostics: Wirtinger
//! finite differences, |mu| fields on polar grids, the modulus curve
//! omega(t) = sup of |mu| over the disk of radius t with its integrability
//! functional, the summed modulus bound, and the dilatation composition
//! formula.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GermError, Result};
use crate::grid::PolarGrid;
use crate::map::MapSpec;

/// |mu| below this is indistinguishable from finite-difference noise on an
/// analytic map (the stencil leaves ~1e-10 at the default step; 1e-6 gives
/// four orders of margin).
pub const MU_NOISE_FLOOR: f64 = 1e-6;

/// Head exponents at or below this flag the integrability functional as
/// divergent.
pub const DIVERGENCE_EXPONENT: f64 = 0.01;

/// Central-difference Wirtinger derivatives (f_z, f_zbar) at `z`.
///
/// Uses the four points z +- h, z +- ih; exact for maps quadratic in
/// (z, conj z), O(h^2) otherwise.
pub fn wirtinger<F>(f: F, z: Complex64, h: f64) -> Result<(Complex64, Complex64)>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if !(h > 0.0) {
        return Err(GermError::OutOfRange {
            what: "finite-difference step",
            value: h,
        });
    }
    let i = Complex64::I;
    let fx = (f(z + h)? - f(z - h)?) / (2.0 * h);
    let fy = (f(z + i * h)? - f(z - i * h)?) / (2.0 * h);
    Ok(((fx - i * fy) / 2.0, (fx + i * fy) / 2.0))
}

/// Complex dilatation samples mu = f_zbar / f_z on a polar grid.
///
/// `mu[i]` is `None` where the sample is unusable: |f_z| < 10 h (the stencil
/// cannot resolve the derivative) or |mu| >= 1 (not quasiconformal there).
#[derive(Debug, Clone)]
pub struct BeltramiField {
    pub grid: PolarGrid,
    pub mu: Vec<Option<Complex64>>,
    pub fd_step: f64,
}

impl BeltramiField {
    pub fn invalid_count(&self) -> usize {
        self.mu.iter().filter(|m| m.is_none()).count()
    }

    /// Supremum of |mu| over valid nodes, 0 when none are valid.
    pub fn sup_abs_mu(&self) -> f64 {
        self.mu
            .iter()
            .flatten()
            .map(|m| m.norm())
            .fold(0.0, f64::max)
    }

    fn ring_sup(&self, ring: usize) -> f64 {
        let a = self.grid.angles_per_ring;
        self.mu[ring * a..(ring + 1) * a]
            .iter()
            .flatten()
            .map(|m| m.norm())
            .fold(0.0, f64::max)
    }
}

/// Sample mu over a grid for any evaluable map.
pub fn beltrami_field_fn<F>(f: F, grid: &PolarGrid, h: f64) -> Result<BeltramiField>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    grid.validate()?;
    let raw: Vec<Result<Option<Complex64>>> = grid.par_map(|z| {
        let (fz, fzb) = wirtinger(&f, z, h)?;
        if fz.norm() < 10.0 * h {
            return Ok(None);
        }
        let mu = fzb / fz;
        Ok(if mu.norm() < 1.0 { Some(mu) } else { None })
    });
    let mut mu = Vec::with_capacity(raw.len());
    for r in raw {
        mu.push(r?);
    }
    let field = BeltramiField {
        grid: grid.clone(),
        mu,
        fd_step: h,
    };
    let invalid = field.invalid_count();
    if invalid * 100 > field.grid.len() {
        return Err(GermError::TooManyInvalidNodes {
            invalid,
            total: field.grid.len(),
        });
    }
    Ok(field)
}

/// Sample mu for a map spec.
pub fn beltrami_field(m: &MapSpec, grid: &PolarGrid, h: f64) -> Result<BeltramiField> {
    beltrami_field_fn(|z| m.evaluate(z), grid, h)
}

/// Fitted power law omega(t) ~ coeff * t^exponent near t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub coeff: f64,
    pub exponent: f64,
}

/// The nondecreasing curve omega(t) together with the value of
/// int_0^{t_max} omega(s)/s ds.
///
/// The head of the improper integral on [0, t_1] is estimated from a power
/// law fitted over the smallest sampled decade; a fitted exponent at or
/// below `DIVERGENCE_EXPONENT` flags the integral as divergent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModulusCurve {
    pub thresholds: Vec<f64>,
    pub omega: Vec<f64>,
    pub integral: f64,
    pub divergent: bool,
    pub head_fit: Option<PowerFit>,
}

impl ModulusCurve {
    /// Build from raw samples: enforces monotonicity by cumulative max (the
    /// definition is a sup over nested disks, so sampling noise must never
    /// break it), fits the head, and integrates.
    pub fn from_samples(thresholds: &[f64], omega_raw: &[f64]) -> Result<Self> {
        if thresholds.len() != omega_raw.len() || thresholds.len() < 2 {
            return Err(GermError::DegenerateInput {
                what: "modulus curve needs matching sample arrays of length >= 2",
            });
        }
        if !(thresholds[0] > 0.0) || !thresholds.windows(2).all(|w| w[0] < w[1]) {
            return Err(GermError::DegenerateInput {
                what: "modulus curve thresholds must be positive and increasing",
            });
        }
        if omega_raw.iter().any(|&w| !(0.0..1.0).contains(&w)) {
            return Err(GermError::DegenerateInput {
                what: "omega samples must lie in [0, 1)",
            });
        }

        let mut omega = Vec::with_capacity(omega_raw.len());
        let mut running = 0.0f64;
        for &w in omega_raw {
            running = running.max(w);
            omega.push(running);
        }

        let head_fit = fit_head(thresholds, &omega);
        let divergent = matches!(head_fit, Some(f) if f.exponent <= DIVERGENCE_EXPONENT);

        let mut curve = ModulusCurve {
            thresholds: thresholds.to_vec(),
            omega,
            integral: 0.0,
            divergent,
            head_fit,
        };
        curve.integral = if divergent {
            f64::INFINITY
        } else {
            curve.integral_to(curve.t_max())?
        };
        Ok(curve)
    }

    pub fn t_min(&self) -> f64 {
        self.thresholds[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.thresholds.last().unwrap()
    }

    /// omega interpolated log-linearly between samples; below the sampled
    /// range the fitted head power law extrapolates.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        if t > self.t_max() * (1.0 + 1e-12) {
            return Err(GermError::ExtrapolationNeeded {
                t,
                t_max: self.t_max(),
            });
        }
        if t >= self.t_max() {
            return Ok(*self.omega.last().unwrap());
        }
        if t < self.t_min() {
            return Ok(match self.head_fit {
                Some(f) => f.coeff * t.powf(f.exponent),
                None => 0.0,
            });
        }
        let i = match self
            .thresholds
            .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
        {
            Ok(i) => return Ok(self.omega[i]),
            Err(i) => i - 1,
        };
        let (t0, t1) = (self.thresholds[i], self.thresholds[i + 1]);
        let (w0, w1) = (self.omega[i], self.omega[i + 1]);
        let s = (t.ln() - t0.ln()) / (t1.ln() - t0.ln());
        if w0 > 0.0 && w1 > 0.0 {
            Ok((w0.ln() + s * (w1.ln() - w0.ln())).exp())
        } else {
            Ok(w0 + s * (w1 - w0))
        }
    }

    /// int_0^{t_end} omega(s)/s ds: fitted head plus trapezoid in log s.
    pub fn integral_to(&self, t_end: f64) -> Result<f64> {
        if t_end > self.t_max() * (1.0 + 1e-12) {
            return Err(GermError::ExtrapolationNeeded {
                t: t_end,
                t_max: self.t_max(),
            });
        }
        if self.divergent {
            return Ok(f64::INFINITY);
        }
        let head_to = |t: f64| -> f64 {
            match self.head_fit {
                Some(f) => f.coeff * t.powf(f.exponent) / f.exponent,
                None => 0.0,
            }
        };
        if t_end <= self.t_min() {
            return Ok(head_to(t_end));
        }
        let mut total = head_to(self.t_min());
        for i in 0..self.thresholds.len() - 1 {
            let (t0, t1) = (self.thresholds[i], self.thresholds[i + 1]);
            if t1 <= t_end {
                total += 0.5 * (self.omega[i] + self.omega[i + 1]) * (t1.ln() - t0.ln());
            } else if t0 < t_end {
                let w_end = self.value_at(t_end)?;
                total += 0.5 * (self.omega[i] + w_end) * (t_end.ln() - t0.ln());
                break;
            } else {
                break;
            }
        }
        Ok(total)
    }
}

/// Head fit over the smallest sampled decade. `None` when the head sits
/// below the noise floor (an analytic map: zero head, finite integral).
fn fit_head(thresholds: &[f64], omega: &[f64]) -> Option<PowerFit> {
    let t0 = thresholds[0];
    let decade: Vec<(f64, f64)> = thresholds
        .iter()
        .zip(omega)
        .take_while(|(t, _)| **t <= 10.0 * t0)
        .map(|(t, w)| (*t, *w))
        .collect();
    let peak = decade.iter().map(|p| p.1).fold(0.0, f64::max);
    if peak <= MU_NOISE_FLOOR {
        return None;
    }
    let pts: Vec<(f64, f64)> = decade
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|p| (p.0.ln(), p.1.ln()))
        .collect();
    if pts.len() < 2 || pts.first().map(|p| p.0) == pts.last().map(|p| p.0) {
        // A head above the noise floor that cannot be fitted gets the
        // conservative reading: no certified decay.
        return Some(PowerFit {
            coeff: peak,
            exponent: 0.0,
        });
    }
    let (slope, intercept) = linear_fit(&pts);
    Some(PowerFit {
        coeff: intercept.exp(),
        exponent: slope,
    })
}

/// Least-squares line through (x, y) pairs; returns (slope, intercept).
pub(crate) fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// omega(t_i) = sup of |mu| over sampled nodes with |z| <= t_i, one
/// threshold per grid ring, then the integrability functional.
pub fn omega_curve(field: &BeltramiField) -> Result<ModulusCurve> {
    let sups: Vec<f64> = (0..field.grid.rings())
        .map(|ring| field.ring_sup(ring))
        .collect();
    // Clamp just under 1: invalid nodes already dropped anything >= 1.
    let sups: Vec<f64> = sups.iter().map(|&s| s.min(1.0 - 1e-15)).collect();
    ModulusCurve::from_samples(&field.grid.radii, &sups)
}

/// Truncated sum tilde_omega(t) = sum_n omega(C sigma^n t) together with the
/// bound omega(Ct) + (1/-log sigma) int_0^{Ct} omega(s)/s ds.
pub fn tilde_omega(curve: &ModulusCurve, c: f64, sigma: f64, t: f64) -> Result<(f64, f64)> {
    if !(c > 0.0) {
        return Err(GermError::OutOfRange {
            what: "tilde_omega constant C",
            value: c,
        });
    }
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(GermError::OutOfRange {
            what: "tilde_omega ratio sigma",
            value: sigma,
        });
    }
    if !(t > 0.0) {
        return Err(GermError::OutOfRange {
            what: "tilde_omega argument t",
            value: t,
        });
    }
    if c * t > curve.t_max() * (1.0 + 1e-12) {
        return Err(GermError::ExtrapolationNeeded {
            t: c * t,
            t_max: curve.t_max(),
        });
    }
    if curve.divergent {
        return Ok((f64::INFINITY, f64::INFINITY));
    }

    const TERM_FLOOR: f64 = 1e-12;
    const MAX_TERMS: usize = 1_000_000;
    let mut sum = 0.0;
    let mut x = c * t;
    let mut converged = false;
    for _ in 0..MAX_TERMS {
        let term = curve.value_at(x)?;
        sum += term;
        if term < TERM_FLOOR {
            converged = true;
            break;
        }
        x *= sigma;
    }
    if !converged {
        sum = f64::INFINITY;
    }
    let bound = curve.value_at(c * t)? + curve.integral_to(c * t)? / (-sigma.ln());
    Ok((sum, bound))
}

/// Complex dilatation of G o F from mu_F, mu_G(F(z)) and F_z:
/// (mu_F + gamma mu_G o F) / (1 + conj(mu_F) gamma mu_G o F) with
/// gamma = conj(F_z)/F_z.
pub fn compose_dilatation(
    mu_f: Complex64,
    mu_g_at_fz: Complex64,
    f_z: Complex64,
) -> Result<Complex64> {
    if mu_f.norm() >= 1.0 {
        return Err(GermError::OutOfRange {
            what: "mu_F modulus",
            value: mu_f.norm(),
        });
    }
    if mu_g_at_fz.norm() >= 1.0 {
        return Err(GermError::OutOfRange {
            what: "mu_G modulus",
            value: mu_g_at_fz.norm(),
        });
    }
    if f_z.norm() < 1e-300 {
        return Err(GermError::DegenerateInput {
            what: "F_z must be nonzero",
        });
    }
    let gamma = f_z.conj() / f_z;
    let denom = Complex64::ONE + mu_f.conj() * gamma * mu_g_at_fz;
    if denom.norm() < 1e-12 {
        return Err(GermError::DegenerateInput {
            what: "composition denominator degenerate",
        });
    }
    Ok((mu_f + gamma * mu_g_at_fz) / denom)
}

/// K = (1 + k) / (1 - k) for 0 <= k < 1.
pub fn dilatation_k(k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(GermError::OutOfRange {
            what: "dilatation modulus k",
            value: k,
        });
    }
    Ok((1.0 + k) / (1.0 - k))
}

/// Fit |mu(z)| ~ C' |z|^alpha over the grid for a perturbed map and return
/// (C', alpha_fit). The caller compares alpha_fit against the declared
/// exponent.
pub fn holder_mu_bound_check(m: &MapSpec, grid: &PolarGrid) -> Result<(f64, f64)> {
    let alpha_declared = match m {
        MapSpec::Perturbed { alpha, .. } => *alpha,
        _ => {
            return Err(GermError::DegenerateInput {
                what: "holder_mu_bound_check requires a perturbed map",
            })
        }
    };
    let _ = alpha_declared;
    let field = beltrami_field(m, grid, grid.default_fd_step())?;
    let pts: Vec<(f64, f64)> = field
        .grid
        .nodes()
        .zip(&field.mu)
        .filter_map(|((_, _, z), mu)| mu.map(|m| (z, m)))
        .filter(|(_, mu)| mu.norm() > MU_NOISE_FLOOR)
        .map(|(z, mu)| (z.norm().ln(), mu.norm().ln()))
        .collect();
    if pts.len() < 2 {
        return Err(GermError::FitFailed {
            why: "|mu| below the noise floor everywhere",
        });
    }
    let (slope, intercept) = linear_fit(&pts);
    Ok((intercept.exp(), slope))
}
