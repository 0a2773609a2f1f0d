//! Behaviour shared by the Euclidean and spherical peak models: validity
//! regimes, and the exceedance function obtained by integrating a height
//! density.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::Quadrature;

/// Beyond ±40 every height density is below the smallest positive double.
pub const HEIGHT_SUPPORT: f64 = 40.0;

const EXCEEDANCE_ABS_TOL: f64 = 1e-13;
const EXCEEDANCE_REL_TOL: f64 = 1e-11;

/// Where a parameter set sits relative to the conditions under which the
/// explicit formulas are known to hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Validity {
    /// Within the proved regime (κ ≤ 1, or κ₂ − κ₁ ≤ 1 on the sphere).
    Proved,
    /// Outside the proved regime but inside the non-degeneracy bound; the
    /// formulas are evaluated but only conjectured to hold.
    Conjectured,
    /// Outside every regime; no computation is performed.
    Invalid,
}

impl Validity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Validity::Proved => "proved",
            Validity::Conjectured => "conjectured",
            Validity::Invalid => "invalid",
        }
    }
}

/// Upper bound of the conjectured regime for dimension N (3, 2, 5/3).
pub fn nondegeneracy_bound(dim: usize) -> f64 {
    match dim {
        1 => 3.0,
        2 => 2.0,
        _ => 5.0 / 3.0,
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::domain(format!("dimension must be 1, 2 or 3, got {dim}")))
    }
}

/// Classifies `value` (κ² or κ₂ − κ₁) and returns an error carrying the
/// violated bound when it is invalid.
pub(crate) fn classify(quantity: &'static str, value: f64, dim: usize) -> Result<Validity> {
    let bound = nondegeneracy_bound(dim);
    if value <= 1.0 {
        Ok(Validity::Proved)
    } else if value < bound {
        Ok(Validity::Conjectured)
    } else {
        Err(Error::InvalidRegime {
            quantity,
            value,
            bound,
            dim,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Euclidean,
    Sphere,
}

/// A pointwise evaluator of a height density h.
pub trait HeightDensity {
    fn eval(&self, x: f64) -> f64;
}

/// Peak statistics of an isotropic Gaussian field.
pub trait PeakModel {
    type Density: HeightDensity;

    fn geometry(&self) -> Geometry;

    fn dim(&self) -> usize;

    /// Named parameters as supplied, for reports.
    fn params(&self) -> BTreeMap<String, f64>;

    fn validity(&self) -> Validity;

    /// Ok with the regime, or the error naming the violated bound.
    fn check_validity(&self) -> Result<Validity>;

    /// Expected number of local maxima per unit volume (or unit area ball).
    fn expected_maxima(&self) -> Result<f64>;

    /// A reusable evaluator of the height density.
    fn density(&self) -> Result<Self::Density>;

    fn height_density(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::domain(format!("height density requires finite x, got {x}")));
        }
        Ok(self.density()?.eval(x))
    }

    /// F(u) = P(height of a local maximum > u) = ∫_u^∞ h.
    fn exceedance(&self, u: f64) -> Result<f64> {
        exceedance(&self.density()?, u)
    }

    /// Expected number of local maxima above u: F(u)·E{M}.
    fn expected_maxima_above(&self, u: f64) -> Result<f64> {
        Ok(self.exceedance(u)? * self.expected_maxima()?)
    }

    /// F at every point of `xs` (which must be nondecreasing), assembled
    /// from adjacent integrals so the result is exactly nonincreasing.
    fn exceedance_sorted(&self, xs: &[f64]) -> Result<Vec<f64>> {
        exceedance_sorted(&self.density()?, xs)
    }
}

fn integrate_density<D: HeightDensity>(density: &D, lo: f64, hi: f64) -> Result<f64> {
    let lo = lo.max(-HEIGHT_SUPPORT);
    let hi = hi.min(HEIGHT_SUPPORT);
    if hi <= lo {
        return Ok(0.0);
    }
    let quad = Quadrature::new(EXCEEDANCE_ABS_TOL, EXCEEDANCE_REL_TOL).with_max_subdivisions(1000);
    Ok(quad.integrate(|x| density.eval(x), lo, hi)?.value)
}

/// ∫_u^∞ h, clamped to [0, 1]. `u` may be ±∞.
pub fn exceedance<D: HeightDensity>(density: &D, u: f64) -> Result<f64> {
    if u.is_nan() {
        return Err(Error::domain("exceedance threshold is NaN"));
    }
    if u == f64::NEG_INFINITY {
        return Ok(1.0);
    }
    if u >= HEIGHT_SUPPORT {
        return Ok(0.0);
    }
    if u <= -HEIGHT_SUPPORT {
        // The density integrates to one; skip the empty far-left tail.
        return Ok(integrate_density(density, -HEIGHT_SUPPORT, HEIGHT_SUPPORT)?.clamp(0.0, 1.0));
    }
    Ok(integrate_density(density, u, HEIGHT_SUPPORT)?.clamp(0.0, 1.0))
}

/// F at each point of a nondecreasing `xs`.
pub fn exceedance_sorted<D: HeightDensity>(density: &D, xs: &[f64]) -> Result<Vec<f64>> {
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::domain("exceedance threshold is NaN"));
    }
    if xs.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::domain("exceedance_sorted requires nondecreasing thresholds"));
    }
    let mut out = vec![0.0; xs.len()];
    let mut upper = f64::INFINITY;
    let mut acc = 0.0;
    for (i, &x) in xs.iter().enumerate().rev() {
        if x == f64::NEG_INFINITY {
            out[i] = 1.0;
            continue;
        }
        acc += integrate_density(density, x, upper)?.max(0.0);
        upper = x;
        out[i] = acc.min(1.0);
    }
    Ok(out)
}
