//! Peak statistics of centered, unit-variance isotropic Gaussian fields on
//! the sphere Sᴺ, N = 1, 2, 3.
//!
//! The covariance is C(⟨t, s⟩); the model depends on C′(1) and C″(1)
//! through κ₁ = C′/C″ and κ₂ = C′²/C″. Expected counts are per geodesic
//! ball of unit area.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::goe::{goe_expectation_quadrature, scaled_expectation_quadrature, GoeQuery};
use crate::model::{check_dim, classify, Geometry, HeightDensity, PeakModel, Validity};
use crate::special::{cdf, gamma_function, pdf, standardized_bivariate_cdf, Cov2};

/// Isotropic field on Sᴺ described by C′(1) and C″(1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereModel {
    dim: usize,
    c1: f64,
    c2: f64,
}

impl SphereModel {
    /// Requires N ∈ {1, 2, 3}, C′ > 0 and C″ > 0.
    pub fn new(dim: usize, c1: f64, c2: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(c1 > 0.0) || !c1.is_finite() {
            return Err(Error::domain(format!("C'(1) must be positive, got {c1}")));
        }
        if !(c2 > 0.0) || !c2.is_finite() {
            return Err(Error::domain(format!("C''(1) must be positive, got {c2}")));
        }
        Ok(SphereModel { dim, c1, c2 })
    }

    /// A model with the given κ₁, κ₂, synthesized as C′ = κ₂/κ₁, C″ = κ₂/κ₁².
    pub fn from_kappas(dim: usize, kappa1: f64, kappa2: f64) -> Result<Self> {
        for (name, v) in [("kappa1", kappa1), ("kappa2", kappa2)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} must be finite and positive, got {v}")));
            }
        }
        SphereModel::new(dim, kappa2 / kappa1, kappa2 / (kappa1 * kappa1))
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn kappa1(&self) -> f64 {
        self.c1 / self.c2
    }

    pub fn kappa2(&self) -> f64 {
        self.c1 * self.c1 / self.c2
    }

    /// E{M} from the Kac–Rice representation with the GOE expectation
    /// computed by quadrature.
    pub fn expected_maxima_via_goe(&self, tol: f64) -> Result<f64> {
        self.check_validity()?;
        let n = self.dim as f64;
        let k1 = self.kappa1();
        let goe = goe_expectation_quadrature(&GoeQuery::new(self.dim, 1.0 / (1.0 + k1), 0.0)?, tol)?.value;
        Ok(SQRT_2 / (PI.powf((n + 1.0) / 2.0) * k1.powf(n / 2.0) * (1.0 + k1).sqrt())
            * gamma_function((n + 1.0) / 2.0)?
            * goe)
    }

    /// h(x) as a ratio of GOE expectations computed by quadrature. Defined
    /// for κ₂ − κ₁ ≤ 1, including the boundary.
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
        let (k1, k2) = (self.kappa1(), self.kappa2());
        let spread = 1.0 + k1 - k2;
        if spread < 0.0 {
            return Err(Error::domain(format!(
                "GOE representation of the height density needs kappa2 - kappa1 <= 1, got {}",
                k2 - k1
            )));
        }
        let denominator =
            goe_expectation_quadrature(&GoeQuery::new(self.dim, 1.0 / (1.0 + k1), 0.0)?, tol)?.value;
        xs.iter()
            .map(|&x| {
                let numerator = scaled_expectation_quadrature(self.dim, spread, k2.sqrt() * x / SQRT_2, tol)?.value;
                Ok(pdf(x) * (1.0 + k1).sqrt() * numerator / denominator)
            })
            .collect()
    }
}

impl PeakModel for SphereModel {
    type Density = SphereDensity;

    fn geometry(&self) -> Geometry {
        Geometry::Sphere
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn params(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("c1".to_string(), self.c1),
            ("c2".to_string(), self.c2),
            ("kappa1".to_string(), self.kappa1()),
            ("kappa2".to_string(), self.kappa2()),
        ])
    }

    fn validity(&self) -> Validity {
        self.check_validity().unwrap_or(Validity::Invalid)
    }

    fn check_validity(&self) -> Result<Validity> {
        classify("κ₂ − κ₁", self.kappa2() - self.kappa1(), self.dim)
    }

    fn expected_maxima(&self) -> Result<f64> {
        self.check_validity()?;
        let k = self.kappa1();
        Ok(match self.dim {
            1 => (3.0 + k).sqrt() / (2.0 * PI * k.sqrt()),
            2 => 1.0 / (4.0 * PI) + 1.0 / (2.0 * PI * k * (3.0 + k).sqrt()),
            _ => {
                let bracket = 1.5 + (1.0 + k) * (2.0 * k * k + 7.0 * k + 11.0) / (4.0 * (3.0 + k));
                (bracket / (2.0 * (3.0 + k).sqrt()) + (k - 1.0) * (k + 2.0) / (4.0 * (2.0 + k).sqrt()))
                    / (PI * PI * k.powf(1.5))
            }
        })
    }

    fn density(&self) -> Result<SphereDensity> {
        self.check_validity()?;
        SphereDensity::new(self.dim, self.kappa1(), self.kappa2())
    }
}

/// Explicit height density of local maxima on Sᴺ for given κ₁, κ₂.
#[derive(Debug, Clone, Copy)]
pub struct SphereDensity {
    dim: usize,
    kappa1: f64,
    kappa2: f64,
    norm: f64,
    // (correlation, sd of the second coordinate) of the two orthant terms for N = 3.
    orthants: Option<[(f64, f64); 2]>,
}

impl SphereDensity {
    fn new(dim: usize, kappa1: f64, kappa2: f64) -> Result<Self> {
        let k1 = kappa1;
        let e = 1.0 + k1 - kappa2;
        let (norm, orthants) = match dim {
            1 => (1.0 / (3.0 + k1).sqrt(), None),
            2 => (2.0 * (3.0 + k1).sqrt() / (2.0 + k1 * (3.0 + k1).sqrt()), None),
            _ => {
                let bracket = 1.5 + (1.0 + k1) * (2.0 * k1 * k1 + 7.0 * k1 + 11.0) / (4.0 * (3.0 + k1));
                let denom = bracket / (2.0 * (2.0 * (3.0 + k1)).sqrt())
                    + (k1 - 1.0) * (k1 + 2.0) / (4.0 * (2.0 * (2.0 + k1)).sqrt());
                let s1 = Cov2::new(1.5, -1.0, (e + 2.0) / 2.0)?;
                let s2 = Cov2::new(1.5, -0.5, (e + 1.0) / 2.0)?;
                (
                    1.0 / denom,
                    Some([
                        (s1.correlation(), s1.s22().sqrt()),
                        (s2.correlation(), s2.s22().sqrt()),
                    ]),
                )
            }
        };
        Ok(SphereDensity {
            dim,
            kappa1,
            kappa2,
            norm,
            orthants,
        })
    }
}

impl HeightDensity for SphereDensity {
    fn eval(&self, x: f64) -> f64 {
        let (k1, k2) = (self.kappa1, self.kappa2);
        let r2 = k2.sqrt();
        let x2 = x * x;
        // 1 + κ₁ − κ₂; the other recurring combinations are e + 1, e + 2, 3e + 2.
        let e = 1.0 + k1 - k2;
        let inner = match self.dim {
            1 => {
                (e + 2.0).sqrt() / (2.0 * PI).sqrt() * (-(3.0 + k1) * x2 / (2.0 * (e + 2.0))).exp()
                    + (2.0 * PI * k2).sqrt() * x * pdf(x) * cdf(r2 * x / (e + 2.0).sqrt())
            }
            2 => {
                (k1 + k2 * (x2 - 1.0)) * pdf(x) * cdf(r2 * x / (e + 1.0).sqrt())
                    + (k2 * (e + 1.0)).sqrt() / (2.0 * PI) * x * (-(2.0 + k1) * x2 / (2.0 * (e + 1.0))).exp()
                    + SQRT_2 / (PI * (e + 2.0)).sqrt()
                        * (-(3.0 + k1) * x2 / (2.0 * (e + 2.0))).exp()
                        * cdf(r2 * x / ((e + 1.0) * (e + 2.0)).sqrt())
            }
            _ => {
                let f = 3.0 * e + 2.0;
                let first = (k2 * (e.powi(3) + 6.0 * e * e + 12.0 * e + 24.0) / (4.0 * (e + 2.0).powi(2)) * x2
                    + (2.0 * e.powi(3) + 3.0 * e * e + 6.0 * e) / (4.0 * (e + 2.0))
                    + 1.5)
                    / (2.0 * (e + 2.0)).sqrt()
                    * (-k2 * x2 / (2.0 * (e + 2.0))).exp()
                    * cdf(2.0 * r2 * x / ((e + 2.0) * f).sqrt());
                let second = (k2 * (e + 1.0) / 4.0 * x2 + (k1 - k2) * e / 2.0 - 1.0)
                    / (2.0 * (e + 1.0)).sqrt()
                    * (-k2 * x2 / (2.0 * (e + 1.0))).exp()
                    * cdf(r2 * x / ((e + 1.0) * f).sqrt());
                let third = (7.0 + k1 - k2 + (3.0 * e.powi(3) + 12.0 * e * e + 28.0 * e) / (2.0 * (e + 2.0))) * r2
                    / (4.0 * PI.sqrt() * (e + 2.0) * f.sqrt())
                    * x
                    * (-3.0 * k2 * x2 / (2.0 * f)).exp();
                let upper = r2 * x / SQRT_2;
                let orthants = self.orthants.expect("N = 3 density carries orthant terms");
                let sum: f64 = orthants
                    .iter()
                    .map(|&(r, sd2)| standardized_bivariate_cdf(0.0, upper / sd2, r))
                    .sum();
                let fourth = (k2 * x2 + 3.0 * (k1 - k2)) * (PI * k2).sqrt() / 4.0 * x * sum;
                pdf(x) * (first + second + third + fourth)
            }
        };
        self.norm * inner
    }
}
