//! Sampled density and exceedance curves with CSV and JSON output.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Geometry, HeightDensity, PeakModel, Validity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Density,
    Exceedance,
}

/// h or F sampled on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveTable {
    pub geometry: Geometry,
    pub dim: usize,
    pub params: BTreeMap<String, f64>,
    pub kind: CurveKind,
    pub validity: Validity,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

/// The grid lo, lo + step, … up to hi inclusive (within 1e-9 steps).
pub fn sweep(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
        return Err(Error::domain("sweep bounds and step must be finite"));
    }
    if !(step > 0.0) {
        return Err(Error::domain(format!("sweep step must be positive, got {step}")));
    }
    if hi < lo {
        return Err(Error::domain(format!("sweep upper bound {hi} is below lower bound {lo}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > 10_000_000 {
        return Err(Error::domain(format!("sweep would produce {count} points")));
    }
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

impl CurveTable {
    /// h at each of `xs`.
    pub fn density<M>(model: &M, xs: Vec<f64>) -> Result<Self>
    where
        M: PeakModel,
        M::Density: Sync,
    {
        check_grid(&xs)?;
        let density = model.density()?;
        let values = xs.par_iter().map(|&x| density.eval(x)).collect();
        Self::assemble(model, CurveKind::Density, xs, values)
    }

    /// F at each of `xs`.
    pub fn exceedance<M: PeakModel>(model: &M, xs: Vec<f64>) -> Result<Self> {
        check_grid(&xs)?;
        let values = model.exceedance_sorted(&xs)?;
        Self::assemble(model, CurveKind::Exceedance, xs, values)
    }

    fn assemble<M: PeakModel>(model: &M, kind: CurveKind, xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let table = CurveTable {
            geometry: model.geometry(),
            dim: model.dim(),
            params: model.params(),
            kind,
            validity: model.check_validity()?,
            xs,
            values,
        };
        table.validate()?;
        Ok(table)
    }

    /// Checks the grid and value invariants for the curve kind.
    pub fn validate(&self) -> Result<()> {
        check_grid(&self.xs)?;
        if self.values.len() != self.xs.len() {
            return Err(Error::domain("curve has different numbers of xs and values"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("curve contains non-finite values"));
        }
        match self.kind {
            CurveKind::Density => {
                if let Some(v) = self.values.iter().find(|&&v| v < -1e-12) {
                    return Err(Error::domain(format!("density curve has negative value {v}")));
                }
            }
            CurveKind::Exceedance => {
                if self.values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::domain("exceedance curve leaves [0, 1]"));
                }
                if self.values.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::domain("exceedance curve is not nonincreasing"));
                }
            }
        }
        Ok(())
    }

    /// `x,value` header, then one row per point in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (x, v) in self.xs.iter().zip(&self.values) {
            writeln!(out, "{x},{v}").expect("writing to a String cannot fail");
        }
        out
    }

    /// Trapezoid-rule integral of the values over xs.
    pub fn trapezoid(&self) -> f64 {
        self.xs
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
            .sum()
    }
}

fn check_grid(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::domain("curve grid is empty"));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("curve grid contains non-finite points"));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("curve grid must be strictly increasing"));
    }
    Ok(())
}
