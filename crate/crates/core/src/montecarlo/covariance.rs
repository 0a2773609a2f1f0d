use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euclid::EuclideanModel;
use crate::sphere::SphereModel;

const UNIT_SUM_TOL: f64 = 1e-12;

/// Covariance of a simulable unit-variance isotropic field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceSpec {
    /// ρ(r²) = Σ wᵢ e^{−αᵢ r²} on ℝᴺ.
    GaussianMixture { weights: Vec<f64>, scales: Vec<f64> },
    /// C(cos θ) = Σₖ aₖ cos kθ on S¹, with `coefficients[k]` = aₖ.
    Circle { coefficients: Vec<f64> },
}

impl CovarianceSpec {
    /// Weights must be positive and sum to one; scales positive.
    pub fn gaussian_mixture(weights: Vec<f64>, scales: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.len() != scales.len() {
            return Err(Error::domain(
                "a Gaussian mixture needs equally many weights and scales, at least one",
            ));
        }
        if weights.iter().chain(&scales).any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::domain("mixture weights and scales must be finite and positive"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > UNIT_SUM_TOL {
            return Err(Error::domain(format!("mixture weights must sum to 1, got {total}")));
        }
        Ok(CovarianceSpec::GaussianMixture { weights, scales })
    }

    /// Coefficients must be nonnegative, sum to one, and put mass on some
    /// k ≥ 2 (otherwise C″(1) = 0 and the Hessian is degenerate).
    pub fn circle(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::domain("Fourier coefficients must be finite and nonnegative"));
        }
        let total: f64 = coefficients.iter().sum();
        if (total - 1.0).abs() > UNIT_SUM_TOL {
            return Err(Error::domain(format!("Fourier coefficients must sum to 1, got {total}")));
        }
        if coefficients.iter().skip(2).all(|&a| a == 0.0) {
            return Err(Error::domain(
                "degenerate Hessian: the spectrum needs mass at some frequency k >= 2",
            ));
        }
        Ok(CovarianceSpec::Circle { coefficients })
    }

    /// Re-runs the constructor checks, for specs built or deserialized directly.
    pub fn validate(&self) -> Result<()> {
        match self {
            CovarianceSpec::GaussianMixture { weights, scales } => {
                Self::gaussian_mixture(weights.clone(), scales.clone()).map(|_| ())
            }
            CovarianceSpec::Circle { coefficients } => Self::circle(coefficients.clone()).map(|_| ()),
        }
    }

    pub fn is_circle(&self) -> bool {
        matches!(self, CovarianceSpec::Circle { .. })
    }

    /// ρ(r²) for a mixture, C(cos θ) at θ = √r² for a circle spectrum.
    pub fn covariance(&self, r2: f64) -> f64 {
        match self {
            CovarianceSpec::GaussianMixture { weights, scales } => {
                weights.iter().zip(scales).map(|(w, a)| w * (-a * r2).exp()).sum()
            }
            CovarianceSpec::Circle { coefficients } => {
                let theta = r2.sqrt();
                coefficients
                    .iter()
                    .enumerate()
                    .map(|(k, a)| a * (k as f64 * theta).cos())
                    .sum()
            }
        }
    }

    /// Second spectral moment: Var(∂f/∂tᵢ) = −2ρ′(0) on ℝᴺ, C′(1) on S¹.
    pub fn lambda2(&self) -> f64 {
        match self {
            CovarianceSpec::GaussianMixture { weights, scales } => {
                2.0 * weights.iter().zip(scales).map(|(w, a)| w * a).sum::<f64>()
            }
            CovarianceSpec::Circle { .. } => self.circle_derivatives().0,
        }
    }

    /// 1/√λ₂.
    pub fn correlation_length(&self) -> f64 {
        1.0 / self.lambda2().sqrt()
    }

    /// (ρ′(0), ρ″(0)) of a mixture.
    pub fn rho_derivatives(&self) -> Result<(f64, f64)> {
        match self {
            CovarianceSpec::GaussianMixture { weights, scales } => {
                let rho1 = -weights.iter().zip(scales).map(|(w, a)| w * a).sum::<f64>();
                let rho2 = weights.iter().zip(scales).map(|(w, a)| w * a * a).sum::<f64>();
                Ok((rho1, rho2))
            }
            CovarianceSpec::Circle { .. } => Err(Error::domain("a circle spectrum has no Euclidean rho")),
        }
    }

    /// (C′(1), C″(1)) of a circle spectrum, from T_k′(1) = k² and
    /// T_k″(1) = k²(k² − 1)/3.
    fn circle_derivatives(&self) -> (f64, f64) {
        match self {
            CovarianceSpec::Circle { coefficients } => coefficients.iter().enumerate().fold(
                (0.0, 0.0),
                |(c1, c2), (k, a)| {
                    let k2 = (k * k) as f64;
                    (c1 + a * k2, c2 + a * k2 * (k2 - 1.0) / 3.0)
                },
            ),
            CovarianceSpec::GaussianMixture { .. } => (f64::NAN, f64::NAN),
        }
    }

    /// The closed-form model a mixture field realizes on ℝᴺ.
    pub fn euclidean_model(&self, dim: usize) -> Result<EuclideanModel> {
        let (rho1, rho2) = self.rho_derivatives()?;
        EuclideanModel::new(dim, rho1, rho2)
    }

    /// The closed-form N = 1 sphere model of a circle spectrum.
    pub fn sphere_model(&self) -> Result<SphereModel> {
        if !self.is_circle() {
            return Err(Error::domain("a Gaussian mixture does not define a field on the circle"));
        }
        let (c1, c2) = self.circle_derivatives();
        SphereModel::new(1, c1, c2)
    }
}
