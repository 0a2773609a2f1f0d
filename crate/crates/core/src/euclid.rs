//! Peak statistics of centered, unit-variance isotropic Gaussian fields on
//! ℝᴺ, N = 1, 2, 3.
//!
//! The covariance is written ρ(‖t − s‖²); only ρ′(0) < 0, ρ″(0) > 0 and the
//! shape parameter κ = −ρ′/√ρ″ enter. The height density depends on κ alone,
//! the expected count of maxima per unit volume also scales with
//! (−ρ″/ρ′)^{N/2}.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::goe::{goe_expectation_quadrature, scaled_expectation_quadrature, GoeQuery};
use crate::model::{check_dim, classify, Geometry, HeightDensity, PeakModel, Validity};
use crate::special::{cdf, gamma_function, pdf, standardized_bivariate_cdf, Cov2};

/// Isotropic field on ℝᴺ described by ρ′(0) and ρ″(0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuclideanModel {
    dim: usize,
    rho1: f64,
    rho2: f64,
}

impl EuclideanModel {
    /// Requires N ∈ {1, 2, 3}, ρ′ < 0 and ρ″ > 0. Regime validity is checked
    /// by the operations, not here.
    pub fn new(dim: usize, rho1: f64, rho2: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(rho1 < 0.0) || !rho1.is_finite() {
            return Err(Error::domain(format!("rho'(0) must be negative, got {rho1}")));
        }
        if !(rho2 > 0.0) || !rho2.is_finite() {
            return Err(Error::domain(format!("rho''(0) must be positive, got {rho2}")));
        }
        Ok(EuclideanModel { dim, rho1, rho2 })
    }

    /// A model with the given κ, synthesized as ρ′ = −κ, ρ″ = 1.
    ///
    /// κ = 0 is accepted as the limiting field whose maxima heights are
    /// standard normal; its expected number of maxima is infinite.
    pub fn from_kappa(dim: usize, kappa: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::domain(format!("kappa must be finite and >= 0, got {kappa}")));
        }
        Ok(EuclideanModel {
            dim,
            rho1: -kappa,
            rho2: 1.0,
        })
    }

    pub fn rho1(&self) -> f64 {
        self.rho1
    }

    pub fn rho2(&self) -> f64 {
        self.rho2
    }

    pub fn kappa(&self) -> f64 {
        -self.rho1 / self.rho2.sqrt()
    }

    /// −ρ″/ρ′, the squared inverse length scale of the maxima process.
    fn rate_scale(&self) -> Result<f64> {
        if self.rho1 == 0.0 {
            return Err(Error::domain(
                "expected number of maxima diverges for kappa = 0 (rho'(0) = 0)",
            ));
        }
        Ok(-self.rho2 / self.rho1)
    }

    /// E{M} from the Kac–Rice representation
    /// (2/π)^{(N+1)/2}·Γ((N+1)/2)·(−ρ″/ρ′)^{N/2}·E_GOE^{N+1}{e^{−λ²/2}},
    /// with the GOE expectation computed by quadrature instead of a closed form.
    pub fn expected_maxima_via_goe(&self, tol: f64) -> Result<f64> {
        self.check_validity()?;
        let n = self.dim as f64;
        let goe = goe_expectation_quadrature(&GoeQuery::new(self.dim, 1.0, 0.0)?, tol)?.value;
        Ok((2.0 / PI).powf((n + 1.0) / 2.0)
            * gamma_function((n + 1.0) / 2.0)?
            * self.rate_scale()?.powf(n / 2.0)
            * goe)
    }

    /// h(x) as the ratio φ(x)·(1 − κ²)^{−1/2}·E_GOE{…}/E_GOE{e^{−λ²/2}} with
    /// both expectations computed by quadrature. Defined for κ ≤ 1,
    /// including κ = 1 where the substituted form removes the singular factor.
    pub fn height_density_via_goe(&self, x: f64, tol: f64) -> Result<f64> {
        Ok(self.height_densities_via_goe(&[x], tol)?[0])
    }

    /// [`Self::height_density_via_goe`] at several points, sharing the
    /// denominator.
    pub fn height_densities_via_goe(&self, xs: &[f64], tol: f64) -> Result<Vec<f64>> {
        self.check_validity()?;
        if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
            return Err(Error::domain(format!("height density requires finite x, got {x}")));
        }
        let k = self.kappa();
        if k > 1.0 {
            return Err(Error::domain(format!(
                "GOE representation of the height density needs kappa <= 1, got {k}"
            )));
        }
        let denominator = goe_expectation_quadrature(&GoeQuery::new(self.dim, 1.0, 0.0)?, tol)?.value;
        xs.iter()
            .map(|&x| {
                let numerator = scaled_expectation_quadrature(self.dim, 1.0 - k * k, k * x / SQRT_2, tol)?.value;
                Ok(pdf(x) * numerator / denominator)
            })
            .collect()
    }
}

impl PeakModel for EuclideanModel {
    type Density = EuclideanDensity;

    fn geometry(&self) -> Geometry {
        Geometry::Euclidean
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn params(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("rho1".to_string(), self.rho1),
            ("rho2".to_string(), self.rho2),
            ("kappa".to_string(), self.kappa()),
        ])
    }

    fn validity(&self) -> Validity {
        self.check_validity().unwrap_or(Validity::Invalid)
    }

    fn check_validity(&self) -> Result<Validity> {
        let k = self.kappa();
        classify("κ²", k * k, self.dim)
    }

    fn expected_maxima(&self) -> Result<f64> {
        self.check_validity()?;
        let r = self.rate_scale()?;
        Ok(match self.dim {
            1 => 6f64.sqrt() / (2.0 * PI) * r.sqrt(),
            2 => r / (3f64.sqrt() * PI),
            _ => (29.0 * 6f64.sqrt() - 36.0) / (36.0 * PI * PI) * r.powf(1.5),
        })
    }

    fn density(&self) -> Result<EuclideanDensity> {
        self.check_validity()?;
        EuclideanDensity::new(self.dim, self.kappa())
    }
}

/// Explicit height density of local maxima on ℝᴺ for a given κ.
#[derive(Debug, Clone, Copy)]
pub struct EuclideanDensity {
    dim: usize,
    kappa: f64,
    // Correlations and scales of the two bivariate orthant terms for N = 3.
    orthants: Option<[(f64, f64, f64); 2]>,
}

impl EuclideanDensity {
    fn new(dim: usize, kappa: f64) -> Result<Self> {
        let k2 = kappa * kappa;
        let orthants = if dim == 3 {
            let s1 = Cov2::new(1.5, -1.0, (3.0 - k2) / 2.0)?;
            let s2 = Cov2::new(1.5, -0.5, (2.0 - k2) / 2.0)?;
            Some([
                (s1.correlation(), s1.s11().sqrt(), s1.s22().sqrt()),
                (s2.correlation(), s2.s11().sqrt(), s2.s22().sqrt()),
            ])
        } else {
            None
        };
        Ok(EuclideanDensity { dim, kappa, orthants })
    }
}

impl HeightDensity for EuclideanDensity {
    fn eval(&self, x: f64) -> f64 {
        let k = self.kappa;
        let k2 = k * k;
        let x2 = x * x;
        match self.dim {
            1 => {
                (3.0 - k2).sqrt() / (6.0 * PI).sqrt() * (-3.0 * x2 / (2.0 * (3.0 - k2))).exp()
                    + 2.0 * k * x * PI.sqrt() / 6f64.sqrt() * pdf(x) * cdf(k * x / (3.0 - k2).sqrt())
            }
            2 => {
                3f64.sqrt() * k2 * (x2 - 1.0) * pdf(x) * cdf(k * x / (2.0 - k2).sqrt())
                    + k * x * (3.0 * (2.0 - k2)).sqrt() / (2.0 * PI) * (-x2 / (2.0 - k2)).exp()
                    + 6f64.sqrt() / (PI * (3.0 - k2)).sqrt()
                        * (-3.0 * x2 / (2.0 * (3.0 - k2))).exp()
                        * cdf(k * x / ((3.0 - k2) * (2.0 - k2)).sqrt())
            }
            _ => {
                let d = 1.0 - k2;
                let first = (k2 * (d.powi(3) + 6.0 * d * d + 12.0 * d + 24.0) / (4.0 * (3.0 - k2).powi(2)) * x2
                    + (2.0 * d.powi(3) + 3.0 * d * d + 6.0 * d) / (4.0 * (3.0 - k2))
                    + 1.5)
                    * (-k2 * x2 / (2.0 * (3.0 - k2))).exp()
                    / (2.0 * (3.0 - k2)).sqrt()
                    * cdf(2.0 * k * x / ((3.0 - k2) * (5.0 - 3.0 * k2)).sqrt());
                let second = (k2 * (2.0 - k2) / 4.0 * x2 - k2 * (1.0 - k2) / 2.0 - 1.0)
                    * (-k2 * x2 / (2.0 * (2.0 - k2))).exp()
                    / (2.0 * (2.0 - k2)).sqrt()
                    * cdf(k * x / ((2.0 - k2) * (5.0 - 3.0 * k2)).sqrt());
                let third = (7.0 - k2 + d * (3.0 * d * d + 12.0 * d + 28.0) / (2.0 * (3.0 - k2))) * k * x
                    * (-3.0 * k2 * x2 / (2.0 * (5.0 - 3.0 * k2))).exp()
                    / (4.0 * PI.sqrt() * (3.0 - k2) * (5.0 - 3.0 * k2).sqrt());
                let fourth = if k == 0.0 {
                    0.0
                } else {
                    let upper = k * x / SQRT_2;
                    let orthants = self.orthants.expect("N = 3 density carries orthant terms");
                    let sum: f64 = orthants
                        .iter()
                        .map(|&(r, _, sd2)| standardized_bivariate_cdf(0.0, upper / sd2, r))
                        .sum();
                    PI.sqrt() * k.powi(3) / 4.0 * x * (x2 - 3.0) * sum
                };
                144.0 * pdf(x) / (29.0 * 6f64.sqrt() - 36.0) * (first + second + third + fourth)
            }
        }
    }
}
