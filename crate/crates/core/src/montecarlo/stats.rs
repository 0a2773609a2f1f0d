use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::covariance::CovarianceSpec;
use super::field::{FieldSimulator, GridConfig};
use super::maxima::extract_local_maxima;
use crate::error::{Error, Result};

/// Fewest replicates accepted by [`estimate_peak_statistics`].
pub const MIN_REPLICATES: usize = 30;

/// Pooled local maxima of independent replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub replicate_count: usize,
    pub region_volume: f64,
    /// Heights in replicate order, grid order within a replicate.
    pub maxima_heights: Vec<f64>,
    pub maxima_count_per_replicate: Vec<usize>,
    pub seed: u64,
}

/// A [`SimResult`] together with diagnostics that are not part of it.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakStatistics {
    pub result: SimResult,
    /// Tied points excluded from the maxima, over all replicates.
    pub ties_excluded: usize,
}

/// Simulates `replicates` fields, each on its own random stream, and pools
/// their local maxima. The result does not depend on the thread count.
pub fn estimate_peak_statistics(
    spec: &CovarianceSpec,
    grid: GridConfig,
    replicates: usize,
    seed: u64,
) -> Result<PeakStatistics> {
    if replicates < MIN_REPLICATES {
        return Err(Error::domain(format!(
            "at least {MIN_REPLICATES} replicates are required, got {replicates}"
        )));
    }
    let sim = FieldSimulator::new(spec, grid, seed)?;
    let per_replicate: Vec<(Vec<f64>, usize)> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let found = extract_local_maxima(&sim.sample(r));
            (found.maxima.iter().map(|m| m.height).collect(), found.ties)
        })
        .collect();
    let mut result = SimResult {
        replicate_count: replicates,
        region_volume: grid.volume(),
        maxima_heights: Vec::new(),
        maxima_count_per_replicate: Vec::with_capacity(replicates),
        seed,
    };
    let mut ties_excluded = 0;
    for (heights, ties) in per_replicate {
        result.maxima_count_per_replicate.push(heights.len());
        result.maxima_heights.extend(heights);
        ties_excluded += ties;
    }
    Ok(PeakStatistics { result, ties_excluded })
}

impl SimResult {
    pub fn validate(&self) -> Result<()> {
        let total: usize = self.maxima_count_per_replicate.iter().sum();
        if total != self.maxima_heights.len() || self.maxima_count_per_replicate.len() != self.replicate_count {
            return Err(Error::domain("inconsistent simulation result"));
        }
        Ok(())
    }

    /// Mean number of maxima per unit volume.
    pub fn rate(&self) -> f64 {
        let total: usize = self.maxima_count_per_replicate.iter().sum();
        total as f64 / (self.replicate_count as f64 * self.region_volume)
    }

    /// Standard error of [`Self::rate`] from the spread of replicate counts.
    pub fn rate_standard_error(&self) -> f64 {
        let n = self.replicate_count as f64;
        let counts = self.maxima_count_per_replicate.iter().map(|&c| c as f64 / self.region_volume);
        let mean = self.rate();
        let var = counts.map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    }

    /// Heights grouped by replicate.
    pub fn replicate_heights(&self) -> Vec<&[f64]> {
        let mut start = 0;
        self.maxima_count_per_replicate
            .iter()
            .map(|&c| {
                let slice = &self.maxima_heights[start..start + c];
                start += c;
                slice
            })
            .collect()
    }

    /// Fraction of pooled heights above u, and its standard error treating
    /// replicates as independent clusters.
    pub fn exceedance(&self, u: f64) -> (f64, f64) {
        let groups = self.replicate_heights();
        let total = self.maxima_heights.len() as f64;
        let above: Vec<f64> = groups.iter().map(|g| g.iter().filter(|&&h| h > u).count() as f64).collect();
        let p = above.iter().sum::<f64>() / total;
        let n = groups.len() as f64;
        let resid: f64 = groups
            .iter()
            .zip(&above)
            .map(|(g, a)| (a - p * g.len() as f64).powi(2))
            .sum();
        (p, (resid * n / (n - 1.0)).sqrt() / total)
    }
}

/// Kolmogorov–Smirnov comparison of pooled heights with a model exceedance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsReport {
    /// sup |ECDF − (1 − F)| over the pooled heights.
    pub statistic: f64,
    /// The bootstrap quantile at `level`.
    pub critical_value: f64,
    pub level: f64,
    pub resamples: usize,
    pub passed: bool,
}

/// KS test whose critical value comes from resampling whole replicates,
/// which keeps the dependence between maxima of one field.
///
/// `exceedance` must map the sorted pooled heights to F at those heights.
pub fn ks_block_bootstrap<F>(result: &SimResult, exceedance: F, resamples: usize, level: f64, seed: u64) -> Result<KsReport>
where
    F: FnOnce(&[f64]) -> Result<Vec<f64>>,
{
    result.validate()?;
    if result.maxima_heights.is_empty() {
        return Err(Error::domain("no maxima to test"));
    }
    if !(0.0 < level && level < 1.0) || resamples < 10 {
        return Err(Error::domain("KS bootstrap needs 0 < level < 1 and at least 10 resamples"));
    }
    let mut sorted = result.maxima_heights.clone();
    sorted.sort_by(f64::total_cmp);
    let survival = exceedance(&sorted)?;
    let n = sorted.len() as f64;
    let mut statistic: f64 = 0.0;
    for (i, s) in survival.iter().enumerate() {
        let model = 1.0 - s;
        statistic = statistic.max((model - i as f64 / n).abs()).max(((i + 1) as f64 / n - model).abs());
    }

    let groups = result.replicate_heights();
    let mut boot: Vec<f64> = (0..resamples as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let mut sample = Vec::with_capacity(sorted.len());
            for _ in 0..groups.len() {
                sample.extend_from_slice(groups[rng.random_range(0..groups.len())]);
            }
            sample.sort_by(f64::total_cmp);
            ecdf_distance(&sorted, &sample)
        })
        .collect();
    boot.sort_by(f64::total_cmp);
    let rank = ((level * resamples as f64).ceil() as usize).clamp(1, resamples) - 1;
    let critical_value = boot[rank];
    Ok(KsReport {
        statistic,
        critical_value,
        level,
        resamples,
        passed: statistic <= critical_value,
    })
}

/// sup |ECDF_a − ECDF_b| for two sorted samples.
fn ecdf_distance(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    if b.is_empty() {
        return 1.0;
    }
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}
