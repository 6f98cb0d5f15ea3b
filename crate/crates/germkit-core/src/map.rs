//! Map germs fixing the origin: construction, evaluation, symbolic
//! derivatives, orbits, and local Newton inversion.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GermError, Result};

/// Absolute floor below which a denominator counts as vanished.
const DENOM_EPS: f64 = 1e-14;

/// A symbolic description of a planar map germ fixing 0.
///
/// Every variant evaluates to exactly 0 at the origin. Coefficient lists are
/// in ascending powers; `PowerSeries` starts at the linear term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum MapSpec {
    /// f(z) = a_1 z + a_2 z^2 + ... + a_J z^J, declared valid on |z| <= radius.
    PowerSeries {
        #[serde(with = "crate::cxserde::vec")]
        coeffs: Vec<Complex64>,
        radius: f64,
    },
    /// Ratio of two polynomials, constant terms first. The numerator has no
    /// constant term so that 0 stays fixed.
    Rational {
        #[serde(with = "crate::cxserde::vec")]
        numerator: Vec<Complex64>,
        #[serde(with = "crate::cxserde::vec")]
        denominator: Vec<Complex64>,
    },
    /// M^{-1} o q_n o M with M(z) = z/(1+cz) and q_n(z) = z^n.
    MoebiusPower {
        n: u32,
        #[serde(with = "crate::cxserde")]
        c: Complex64,
    },
    /// base(z) + eps * base'(0) * z * conj(z) * |z|^(alpha-1); a quasiconformal
    /// perturbation carried on the linear part so that its Beltrami
    /// coefficient has a closed form.
    Perturbed {
        base: Box<MapSpec>,
        #[serde(with = "crate::cxserde")]
        eps: Complex64,
        alpha: f64,
    },
    /// Composition, applied right to left: [f, g] means f(g(z)).
    Composite { maps: Vec<MapSpec> },
}

impl MapSpec {
    pub fn power_series(coeffs: Vec<Complex64>, radius: f64) -> Result<Self> {
        let m = MapSpec::PowerSeries { coeffs, radius };
        m.validate()?;
        Ok(m)
    }

    pub fn rational(numerator: Vec<Complex64>, denominator: Vec<Complex64>) -> Result<Self> {
        let m = MapSpec::Rational {
            numerator,
            denominator,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn moebius_power(n: u32, c: Complex64) -> Result<Self> {
        let m = MapSpec::MoebiusPower { n, c };
        m.validate()?;
        Ok(m)
    }

    pub fn perturbed(base: MapSpec, eps: Complex64, alpha: f64) -> Result<Self> {
        let m = MapSpec::Perturbed {
            base: Box::new(base),
            eps,
            alpha,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn composite(maps: Vec<MapSpec>) -> Result<Self> {
        let m = MapSpec::Composite { maps };
        m.validate()?;
        Ok(m)
    }

    /// z -> lambda z, valid everywhere.
    pub fn linear(lambda: Complex64) -> Self {
        MapSpec::PowerSeries {
            coeffs: vec![lambda],
            radius: f64::INFINITY,
        }
    }

    /// q_n(z) = z^n.
    pub fn monomial(n: u32) -> Self {
        let mut coeffs = vec![Complex64::ZERO; n as usize];
        coeffs[n as usize - 1] = Complex64::ONE;
        MapSpec::PowerSeries {
            coeffs,
            radius: f64::INFINITY,
        }
    }

    /// The conjugate s_b^{-1} o m o s_b where s_b(z) = b z.
    pub fn conjugate_by_scaling(&self, b: Complex64) -> Result<Self> {
        if b.norm() < DENOM_EPS {
            return Err(GermError::DegenerateInput {
                what: "scaling factor must be nonzero",
            });
        }
        MapSpec::composite(vec![
            MapSpec::linear(1.0 / b),
            self.clone(),
            MapSpec::linear(b),
        ])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MapSpec::PowerSeries { coeffs, radius } => {
                if coeffs.is_empty() {
                    return Err(GermError::DegenerateInput {
                        what: "power series needs at least one coefficient",
                    });
                }
                if !(*radius > 0.0) {
                    return Err(GermError::OutOfRange {
                        what: "power series radius",
                        value: *radius,
                    });
                }
            }
            MapSpec::Rational {
                numerator,
                denominator,
            } => {
                if numerator.is_empty() || denominator.is_empty() {
                    return Err(GermError::DegenerateInput {
                        what: "rational map needs numerator and denominator coefficients",
                    });
                }
                if numerator[0] != Complex64::ZERO {
                    return Err(GermError::DegenerateInput {
                        what: "rational numerator must have zero constant term (fixes 0)",
                    });
                }
                if denominator[0].norm() <= DENOM_EPS {
                    return Err(GermError::DegenerateInput {
                        what: "rational denominator vanishes at 0",
                    });
                }
            }
            MapSpec::MoebiusPower { n, .. } => {
                if *n < 1 {
                    return Err(GermError::OutOfRange {
                        what: "moebius power exponent",
                        value: *n as f64,
                    });
                }
            }
            MapSpec::Perturbed { base, alpha, .. } => {
                if !(*alpha > 0.0) {
                    return Err(GermError::OutOfRange {
                        what: "perturbation exponent alpha",
                        value: *alpha,
                    });
                }
                base.validate()?;
                // eps multiplies base'(0), so the base must be analytic.
                base.multiplier()?;
            }
            MapSpec::Composite { maps } => {
                if maps.is_empty() {
                    return Err(GermError::DegenerateInput {
                        what: "composite needs at least one map",
                    });
                }
                for m in maps {
                    m.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Radius of the disk on which the symbolic formula is trusted.
    ///
    /// Variants without a declared radius report infinity and rely on
    /// pointwise denominator guards during evaluation.
    pub fn validity_radius(&self) -> f64 {
        match self {
            MapSpec::PowerSeries { radius, .. } => *radius,
            MapSpec::Rational { .. } => f64::INFINITY,
            MapSpec::MoebiusPower { .. } => f64::INFINITY,
            MapSpec::Perturbed { base, .. } => base.validity_radius(),
            // Conservative: the first-applied map constrains the input.
            MapSpec::Composite { maps } => maps
                .last()
                .map(MapSpec::validity_radius)
                .unwrap_or(f64::INFINITY),
        }
    }

    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        match self {
            MapSpec::PowerSeries { coeffs, radius } => {
                check_radius(z, *radius)?;
                // Horner with an extra factor z keeps f(0) = 0 exact.
                Ok(eval_poly(coeffs, z) * z)
            }
            MapSpec::Rational {
                numerator,
                denominator,
            } => {
                let den = eval_poly(denominator, z);
                if den.norm() <= DENOM_EPS {
                    return Err(GermError::DenominatorVanished { z });
                }
                Ok(eval_poly_shifted(numerator, z) * z / den)
            }
            MapSpec::MoebiusPower { n, c } => {
                let dm = Complex64::ONE + c * z;
                if dm.norm() <= DENOM_EPS {
                    return Err(GermError::DenominatorVanished { z });
                }
                let w = z / dm;
                let u = w.powu(*n);
                let dinv = Complex64::ONE - c * u;
                if dinv.norm() <= DENOM_EPS {
                    return Err(GermError::DenominatorVanished { z });
                }
                Ok(u / dinv)
            }
            MapSpec::Perturbed { base, eps, alpha } => {
                let b = base.evaluate(z)?;
                if z == Complex64::ZERO {
                    return Ok(b);
                }
                let lam0 = base.multiplier()?;
                // z * conj(z) * |z|^(alpha-1) computed in polar form to avoid
                // overflow of |z|^(alpha-1) for tiny |z| and alpha < 1.
                let bump = Complex64::from_polar(z.norm().powf(*alpha), -z.arg()) * z;
                Ok(b + eps * lam0 * bump)
            }
            MapSpec::Composite { maps } => {
                let mut w = z;
                for m in maps.iter().rev() {
                    w = m.evaluate(w)?;
                }
                Ok(w)
            }
        }
    }

    /// Complex derivative, assembled symbolically per variant.
    ///
    /// `Perturbed` maps are not analytic; their Wirtinger derivatives come
    /// from the finite-difference estimator in the dilatation module.
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        match self {
            MapSpec::PowerSeries { coeffs, radius } => {
                check_radius(z, *radius)?;
                Ok(eval_poly_derivative_shifted(coeffs, z))
            }
            MapSpec::Rational {
                numerator,
                denominator,
            } => {
                let den = eval_poly(denominator, z);
                if den.norm() <= DENOM_EPS {
                    return Err(GermError::DenominatorVanished { z });
                }
                let num = eval_poly_shifted(numerator, z) * z;
                let dnum = eval_poly_derivative_full(numerator, z);
                let dden = eval_poly_derivative_full(denominator, z);
                Ok((dnum * den - num * dden) / (den * den))
            }
            MapSpec::MoebiusPower { n, c } => {
                let dm = Complex64::ONE + c * z;
                if dm.norm() <= DENOM_EPS {
                    return Err(GermError::DenominatorVanished { z });
                }
                let w = z / dm;
                let u = w.powu(*n);
                let dinv = Complex64::ONE - c * u;
                if dinv.norm() <= DENOM_EPS {
                    return Err(GermError::DenominatorVanished { z });
                }
                let d_m = 1.0 / (dm * dm);
                let d_q = Complex64::from(*n as f64) * w.powu(n - 1);
                let d_minv = 1.0 / (dinv * dinv);
                Ok(d_minv * d_q * d_m)
            }
            MapSpec::Perturbed { .. } => Err(GermError::NotAnalytic),
            MapSpec::Composite { maps } => {
                let mut w = z;
                let mut d = Complex64::ONE;
                for m in maps.iter().rev() {
                    d *= m.derivative(w)?;
                    w = m.evaluate(w)?;
                }
                Ok(d)
            }
        }
    }

    /// Symbolic multiplier f'(0).
    pub fn multiplier(&self) -> Result<Complex64> {
        self.derivative(Complex64::ZERO)
    }

    /// df/dz at `z`: symbolic when analytic, four-point Wirtinger stencil
    /// otherwise.
    pub fn derivative_or_fd(&self, z: Complex64) -> Result<Complex64> {
        match self.derivative(z) {
            Ok(d) => Ok(d),
            Err(GermError::NotAnalytic) => {
                let h = 1e-6 * (0.1 + z.norm());
                let (fz, _) = crate::dilatation::wirtinger(|w| self.evaluate(w), z, h)?;
                Ok(fz)
            }
            Err(e) => Err(e),
        }
    }

    /// Forward orbit [z, f(z), ..., f^k(z)].
    pub fn iterate(&self, z: Complex64, k: usize, budget: &EvalBudget) -> Result<Vec<Complex64>> {
        budget.validate()?;
        let radius = self.validity_radius();
        let mut orbit = Vec::with_capacity(k + 1);
        orbit.push(z);
        let mut w = z;
        for step in 0..k {
            if step > 0 && w.norm() > radius {
                return Err(GermError::OrbitEscape { step });
            }
            w = self.evaluate(w)?;
            orbit.push(w);
        }
        Ok(orbit)
    }

    /// Newton inversion: the z near `seed` with f(z) = w.
    pub fn local_inverse(&self, w: Complex64, seed: Complex64, budget: &EvalBudget) -> Result<Complex64> {
        budget.validate()?;
        self.local_inverse_tol(w, seed, budget.newton_tolerance, budget.newton_max_steps)
    }

    /// Newton inversion with an explicit residual tolerance. Deep inverse
    /// orbits need tolerances relative to |w|: absolute residuals get
    /// amplified by the multiplier when the Koenigs limit rescales them.
    pub(crate) fn local_inverse_tol(
        &self,
        w: Complex64,
        seed: Complex64,
        tolerance: f64,
        max_steps: usize,
    ) -> Result<Complex64> {
        let mut z = seed;
        let mut last_delta = f64::INFINITY;
        for _ in 0..max_steps {
            let fz = self.evaluate(z)?;
            let err = (fz - w).norm();
            if err <= tolerance {
                return Ok(z);
            }
            let d = self.derivative_or_fd(z)?;
            if d.norm() < 1e-14 {
                return Err(GermError::DerivativeVanished { z });
            }
            let step = (fz - w) / d;
            if !step.re.is_finite() || !step.im.is_finite() {
                return Err(GermError::DerivativeVanished { z });
            }
            z -= step;
            last_delta = step.norm();
        }
        let fz = self.evaluate(z)?;
        if (fz - w).norm() <= tolerance {
            return Ok(z);
        }
        Err(GermError::NoConvergence {
            context: "newton inversion",
            steps: max_steps,
            last_delta,
        })
    }
}

/// Finite budgets standing in for the limit arguments: iteration caps and
/// stopping tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalBudget {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub newton_max_steps: usize,
    pub newton_tolerance: f64,
}

impl Default for EvalBudget {
    fn default() -> Self {
        EvalBudget {
            max_iterations: 200,
            tolerance: 1e-12,
            newton_max_steps: 64,
            newton_tolerance: 1e-13,
        }
    }
}

impl EvalBudget {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 || self.newton_max_steps == 0 {
            return Err(GermError::DegenerateInput {
                what: "budget iteration counts must be positive",
            });
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(GermError::OutOfRange {
                what: "budget tolerance",
                value: self.tolerance,
            });
        }
        if !(self.newton_tolerance > 0.0) {
            return Err(GermError::OutOfRange {
                what: "newton tolerance",
                value: self.newton_tolerance,
            });
        }
        Ok(())
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_max_iterations(mut self, cap: usize) -> Self {
        self.max_iterations = cap;
        self
    }
}

fn check_radius(z: Complex64, radius: f64) -> Result<()> {
    if z.norm() > radius {
        return Err(GermError::OutsideDomain { z, radius });
    }
    Ok(())
}

/// Horner evaluation, coefficients in ascending powers starting at z^0.
fn eval_poly(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for &a in coeffs.iter().rev() {
        acc = acc * z + a;
    }
    acc
}

/// Horner evaluation of (p(z) - p(0)) / z for a polynomial with zero
/// constant term, i.e. the coefficients shifted down one power.
fn eval_poly_shifted(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    eval_poly(&coeffs[1..], z)
}

/// Derivative of z * q(z) where q's coefficients are `coeffs` (the power
/// series convention a_1..a_J): sum over j of j a_j z^{j-1}.
fn eval_poly_derivative_shifted(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for (j, &a) in coeffs.iter().enumerate().rev() {
        acc = acc * z + a * ((j + 1) as f64);
    }
    acc
}

/// Derivative of a full polynomial with constant term.
fn eval_poly_derivative_full(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for (j, &a) in coeffs.iter().enumerate().skip(1).rev() {
        acc = acc * z + a * (j as f64);
    }
    acc
}

/// f(z) = lambda z / (1 + a z) as a rational spec; the workhorse test germ.
pub fn moebius_germ(lambda: Complex64, a: Complex64) -> MapSpec {
    MapSpec::Rational {
        numerator: vec![Complex64::ZERO, lambda],
        denominator: vec![Complex64::ONE, a],
    }
}
