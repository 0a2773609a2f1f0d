//! Scalar special functions: the standard normal density and distribution,
//! the centered bivariate normal distribution with general covariance, the
//! incomplete Gaussian integral G_γ with two closed-form integrals of it
//! against Gaussian weights, and the gamma function.
//!
//! The public functions validate their arguments. The crate-internal `pdf`
//! and `cdf` skip validation and are what the closed-form density formulas
//! call in their inner loops.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::quad::Quadrature;

/// 1/√(2π)
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Relative determinant floor below which a [`Cov2`] is considered singular.
pub const COV2_SINGULAR_TOL: f64 = 1e-12;

// Below this the standard normal density underflows to zero.
const NORMAL_LOWER_CUTOFF: f64 = -38.5;

#[inline]
pub(crate) fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

#[inline]
pub(crate) fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density φ(x).
pub fn std_normal_pdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("std_normal_pdf requires finite x, got {x}")));
    }
    Ok(pdf(x))
}

/// Standard normal distribution function Φ(x) = P(X ≤ x).
///
/// Evaluated through the complementary error function so that the lower
/// tail keeps full relative precision; `±∞` map to 0 and 1.
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("std_normal_cdf of NaN"));
    }
    Ok(cdf(x))
}

/// A 2×2 symmetric positive-definite covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cov2 {
    s11: f64,
    s12: f64,
    s22: f64,
}

impl Cov2 {
    /// Validates positive variances and a strictly positive determinant.
    ///
    /// Matrices with `s11·s22 − s12² < 1e-12·s11·s22` are rejected as
    /// numerically singular instead of being regularized.
    pub fn new(s11: f64, s12: f64, s22: f64) -> Result<Self> {
        if !(s11.is_finite() && s12.is_finite() && s22.is_finite()) {
            return Err(Error::domain(format!(
                "covariance entries must be finite, got ({s11}, {s12}, {s22})"
            )));
        }
        if s11 <= 0.0 || s22 <= 0.0 {
            return Err(Error::domain(format!(
                "covariance variances must be positive, got s11 = {s11}, s22 = {s22}"
            )));
        }
        let det = s11 * s22 - s12 * s12;
        if det < COV2_SINGULAR_TOL * s11 * s22 {
            return Err(Error::domain(format!(
                "covariance [[{s11}, {s12}], [{s12}, {s22}]] is not positive definite (det = {det:e})"
            )));
        }
        Ok(Cov2 { s11, s12, s22 })
    }

    pub fn identity() -> Self {
        Cov2 {
            s11: 1.0,
            s12: 0.0,
            s22: 1.0,
        }
    }

    pub fn s11(&self) -> f64 {
        self.s11
    }

    pub fn s12(&self) -> f64 {
        self.s12
    }

    pub fn s22(&self) -> f64 {
        self.s22
    }

    pub fn correlation(&self) -> f64 {
        self.s12 / (self.s11 * self.s22).sqrt()
    }

    pub fn determinant(&self) -> f64 {
        self.s11 * self.s22 - self.s12 * self.s12
    }
}

/// P(X₁ ≤ x1, X₂ ≤ x2) for a centered bivariate normal with covariance `cov`.
///
/// The arguments are standardized to the correlation form Φ_r(h, k) and the
/// result is the integral of φ(t)·Φ((k − r t)/√(1 − r²)) over t ≤ h,
/// evaluated by adaptive Gauss–Kronrod quadrature to about 1e-14 absolute.
pub fn bivariate_normal_cdf(cov: &Cov2, x1: f64, x2: f64) -> Result<f64> {
    if x1.is_nan() || x2.is_nan() {
        return Err(Error::domain("bivariate_normal_cdf of NaN"));
    }
    let h = x1 / cov.s11.sqrt();
    let k = x2 / cov.s22.sqrt();
    Ok(standardized_bivariate_cdf(h, k, cov.correlation()))
}

pub(crate) fn standardized_bivariate_cdf(h: f64, k: f64, r: f64) -> f64 {
    if h == f64::NEG_INFINITY || k == f64::NEG_INFINITY {
        return 0.0;
    }
    if h == f64::INFINITY {
        return cdf(k);
    }
    if k == f64::INFINITY {
        return cdf(h);
    }
    if r == 0.0 {
        return cdf(h) * cdf(k);
    }
    // Integrate over the coordinate with the smaller upper limit; the
    // integrand then carries less mass and the absolute error shrinks.
    let (h, k) = if h <= k { (h, k) } else { (k, h) };
    if h <= NORMAL_LOWER_CUTOFF {
        return 0.0;
    }
    let s = (1.0 - r * r).sqrt();
    let quad = Quadrature::new(1e-13, 1e-13).with_max_subdivisions(400);
    let value = match quad.integrate(|t| pdf(t) * cdf((k - r * t) / s), NORMAL_LOWER_CUTOFF, h) {
        Ok(est) => est.value,
        // Only reachable for correlations within ~1e-6 of ±1; the partial
        // estimate is still accurate far beyond what those inputs warrant.
        Err(_) => quad
            .integrate_best_effort(|t| pdf(t) * cdf((k - r * t) / s), NORMAL_LOWER_CUTOFF, h)
            .value,
    };
    value.clamp(0.0, 1.0)
}

/// G_γ(x) = ∫_{−∞}^x e^{−γt²} dt, computed as √(π/γ)·Φ(√(2γ)·x).
pub fn gaussian_incomplete_integral(gamma: f64, x: f64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::domain(format!(
            "incomplete Gaussian integral requires gamma > 0, got {gamma}"
        )));
    }
    if x.is_nan() {
        return Err(Error::domain("incomplete Gaussian integral of NaN"));
    }
    Ok((PI / gamma).sqrt() * cdf((2.0 * gamma).sqrt() * x))
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::domain(format!("{name} must be finite and positive, got {v}")));
    }
    Ok(())
}

/// ∫ e^{−α(x−β)²}·G_γ(x) dx over ℝ, equal to (π/√(αγ))·Φ(β√(2αγ)/√(α+γ)).
pub fn weighted_incomplete_integral(alpha: f64, gamma: f64, beta: f64) -> Result<f64> {
    check_positive("alpha", alpha)?;
    check_positive("gamma", gamma)?;
    if !beta.is_finite() {
        return Err(Error::domain(format!("beta must be finite, got {beta}")));
    }
    Ok(PI / (alpha * gamma).sqrt() * cdf(beta * (2.0 * alpha * gamma / (alpha + gamma)).sqrt()))
}

/// The covariance Σ for which
/// ∫ e^{−α(y−β)²} ∫_{−∞}^y e^{−σx²}·G_γ(x) dx dy = π^{3/2}/√(ασγ)·Φ_Σ(0, β).
pub fn nested_incomplete_covariance(alpha: f64, sigma: f64, gamma: f64) -> Result<Cov2> {
    check_positive("alpha", alpha)?;
    check_positive("sigma", sigma)?;
    check_positive("gamma", gamma)?;
    Cov2::new(
        (sigma + gamma) / (2.0 * sigma * gamma),
        -1.0 / (2.0 * sigma),
        (sigma + alpha) / (2.0 * sigma * alpha),
    )
}

/// ∫ e^{−α(y−β)²} ∫_{−∞}^y e^{−σx²}·G_γ(x) dx dy over ℝ, in closed form.
pub fn nested_incomplete_integral(alpha: f64, sigma: f64, gamma: f64, beta: f64) -> Result<f64> {
    let cov = nested_incomplete_covariance(alpha, sigma, gamma)?;
    if !beta.is_finite() {
        return Err(Error::domain(format!("beta must be finite, got {beta}")));
    }
    Ok(PI.powf(1.5) / (alpha * sigma * gamma).sqrt() * bivariate_normal_cdf(&cov, 0.0, beta)?)
}

/// Γ(z) for real z > 0.
pub fn gamma_function(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::domain(format!(
            "gamma function requires finite z > 0, got {z}"
        )));
    }
    Ok(libm::tgamma(z))
}
