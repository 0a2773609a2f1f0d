use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::covariance::CovarianceSpec;
use crate::error::{Error, Result};
use crate::model::check_dim;

/// Grid spacing may not exceed this fraction of the correlation length.
pub const MAX_SPACING_RATIO: f64 = 0.2;

/// Largest number of points per side accepted for three-dimensional grids.
pub const MAX_POINTS_3D: usize = 64;

// Eigenvalues more negative than this (relative to the largest) mean the
// periodized covariance is not positive semi-definite.
const NEGATIVE_EIGEN_TOL: f64 = 1e-10;

/// Periodic grid with `points_per_side` points along each of `dim` axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    dim: usize,
    points_per_side: usize,
    side_length: f64,
}

impl GridConfig {
    /// Torus [0, side_length)^dim.
    pub fn torus(dim: usize, points_per_side: usize, side_length: f64) -> Result<Self> {
        check_dim(dim)?;
        if points_per_side < 3 {
            return Err(Error::domain(format!(
                "grids need at least 3 points per side, got {points_per_side}"
            )));
        }
        if dim == 3 && points_per_side > MAX_POINTS_3D {
            return Err(Error::domain(format!(
                "three-dimensional grids are capped at {MAX_POINTS_3D} points per side, got {points_per_side}"
            )));
        }
        if !(side_length.is_finite() && side_length > 0.0) {
            return Err(Error::domain(format!("side length must be positive, got {side_length}")));
        }
        Ok(GridConfig {
            dim,
            points_per_side,
            side_length,
        })
    }

    /// The unit circle, parameterized by arc length.
    pub fn circle(points: usize) -> Result<Self> {
        Self::torus(1, points, 2.0 * PI)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_side(&self) -> usize {
        self.points_per_side
    }

    pub fn side_length(&self) -> f64 {
        self.side_length
    }

    pub fn spacing(&self) -> f64 {
        self.side_length / self.points_per_side as f64
    }

    pub fn volume(&self) -> f64 {
        self.side_length.powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.points_per_side.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Field values on a periodic grid, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: GridConfig,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: GridConfig, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain(format!(
                "grid of {} points given {} values",
                grid.len(),
                values.len()
            )));
        }
        Ok(GridField { grid, values })
    }

    /// Every `step`-th point along each axis; `step` must divide the side.
    pub fn subsample(&self, step: usize) -> Result<GridField> {
        let m = self.grid.points_per_side;
        if step == 0 || m % step != 0 {
            return Err(Error::domain(format!("subsampling step {step} must divide {m}")));
        }
        let coarse = GridConfig::torus(self.grid.dim, m / step, self.grid.side_length)?;
        let mc = coarse.points_per_side;
        let values = (0..coarse.len())
            .map(|i| {
                let mut fine = 0;
                let mut rest = i;
                let mut stride = 1;
                let mut fine_stride = 1;
                for _ in 0..self.grid.dim {
                    fine += (rest % mc) * step * fine_stride;
                    rest /= mc;
                    stride *= mc;
                    fine_stride *= m;
                }
                debug_assert!(stride == coarse.len());
                self.values[fine]
            })
            .collect();
        GridField::new(coarse, values)
    }
}

/// Exact sampler of a stationary Gaussian field on a periodic grid.
///
/// The covariance is periodized over the torus; its circulant eigenvalues
/// are computed once and each sample costs one d-dimensional FFT.
pub struct FieldSimulator {
    grid: GridConfig,
    amplitudes: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    seed: u64,
}

impl std::fmt::Debug for FieldSimulator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldSimulator")
            .field("grid", &self.grid)
            .field("seed", &self.seed)
            .finish()
    }
}

impl FieldSimulator {
    /// Checks the resolution (spacing ≤ 0.2 correlation lengths) and
    /// prepares the spectral amplitudes.
    pub fn new(spec: &CovarianceSpec, grid: GridConfig, seed: u64) -> Result<Self> {
        spec.validate()?;
        let limit = MAX_SPACING_RATIO * spec.correlation_length();
        if grid.spacing() > limit {
            return Err(Error::domain(format!(
                "grid spacing {} exceeds {limit} ({MAX_SPACING_RATIO} correlation lengths); use more points",
                grid.spacing()
            )));
        }
        let eigen = match spec {
            CovarianceSpec::GaussianMixture { weights, scales } => mixture_eigenvalues(weights, scales, &grid),
            CovarianceSpec::Circle { coefficients } => {
                if grid.dim != 1 || (grid.side_length - 2.0 * PI).abs() > 1e-12 {
                    return Err(Error::domain("circle spectra need a GridConfig::circle grid"));
                }
                circle_eigenvalues(coefficients, grid.points_per_side)?
            }
        };
        let top = eigen.iter().cloned().fold(0.0, f64::max);
        if let Some(low) = eigen.iter().find(|&&l| l < -NEGATIVE_EIGEN_TOL * top) {
            return Err(Error::domain(format!(
                "periodized covariance is not positive semi-definite (eigenvalue {low})"
            )));
        }
        let n = grid.len() as f64;
        let amplitudes = eigen.iter().map(|l| (l.max(0.0) / n).sqrt()).collect();
        let fft = FftPlanner::new().plan_fft_forward(grid.points_per_side);
        Ok(FieldSimulator {
            grid,
            amplitudes,
            fft,
            seed,
        })
    }

    pub fn grid(&self) -> GridConfig {
        self.grid
    }

    /// Replicate `index`, drawn from its own ChaCha stream of the seed.
    pub fn sample(&self, index: u64) -> GridField {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let mut data: Vec<Complex<f64>> = self
            .amplitudes
            .iter()
            .map(|&a| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(a * re, a * im)
            })
            .collect();
        fft_nd(&mut data, self.grid.dim, self.grid.points_per_side, self.fft.as_ref());
        GridField {
            grid: self.grid,
            values: data.iter().map(|c| c.re).collect(),
        }
    }
}

/// One sample of a mixture field on the torus [0, side_length)^dim.
pub fn simulate_field_euclidean(
    spec: &CovarianceSpec,
    dim: usize,
    grid_points_per_side: usize,
    side_length: f64,
    seed: u64,
) -> Result<GridField> {
    if spec.is_circle() {
        return Err(Error::domain("simulate_field_euclidean needs a Gaussian mixture"));
    }
    let grid = GridConfig::torus(dim, grid_points_per_side, side_length)?;
    Ok(FieldSimulator::new(spec, grid, seed)?.sample(0))
}

/// One sample of a circle-spectrum field at `grid_points` equally spaced angles.
pub fn simulate_circle_field(spec: &CovarianceSpec, grid_points: usize, seed: u64) -> Result<GridField> {
    if !spec.is_circle() {
        return Err(Error::domain("simulate_circle_field needs a circle spectrum"));
    }
    Ok(FieldSimulator::new(spec, GridConfig::circle(grid_points)?, seed)?.sample(0))
}

/// Circulant eigenvalues of a periodized Gaussian mixture. Each component is
/// separable, so its eigenvalues are products of one-dimensional ones.
fn mixture_eigenvalues(weights: &[f64], scales: &[f64], grid: &GridConfig) -> Vec<f64> {
    let m = grid.points_per_side;
    let fft = FftPlanner::new().plan_fft_forward(m);
    let mut eigen = vec![0.0; grid.len()];
    for (&w, &alpha) in weights.iter().zip(scales) {
        let factor = periodized_gaussian_eigenvalues(alpha, m, grid.side_length, fft.as_ref());
        for (i, e) in eigen.iter_mut().enumerate() {
            let mut prod = w;
            let mut rest = i;
            for _ in 0..grid.dim {
                prod *= factor[rest % m];
                rest /= m;
            }
            *e += prod;
        }
    }
    eigen
}

fn periodized_gaussian_eigenvalues(alpha: f64, m: usize, side: f64, fft: &dyn Fft<f64>) -> Vec<f64> {
    let spacing = side / m as f64;
    // Images beyond this many periods contribute below e^{−40}.
    let images = ((40.0 / alpha).sqrt() / side).ceil() as i64 + 1;
    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|j| {
            let x = j as f64 * spacing;
            let c: f64 = (-images..=images)
                .map(|n| (-alpha * (x + n as f64 * side).powi(2)).exp())
                .sum();
            Complex::new(c, 0.0)
        })
        .collect();
    fft.process(&mut row);
    row.iter().map(|c| c.re).collect()
}

/// Circulant eigenvalues of Σ aₖ cos kθ sampled at M angles: aₖ/2 at ±k
/// (aₖ at k = 0), scaled by M.
fn circle_eigenvalues(coefficients: &[f64], m: usize) -> Result<Vec<f64>> {
    let top = coefficients.iter().rposition(|&a| a > 0.0).unwrap_or(0);
    if 2 * top >= m {
        return Err(Error::domain(format!(
            "frequency {top} needs more than {} grid points on the circle",
            2 * top
        )));
    }
    let mut eigen = vec![0.0; m];
    for (k, &a) in coefficients.iter().enumerate().take(top + 1) {
        if k == 0 {
            eigen[0] += a * m as f64;
        } else {
            eigen[k] += 0.5 * a * m as f64;
            eigen[m - k] += 0.5 * a * m as f64;
        }
    }
    Ok(eigen)
}

/// In-place forward FFT of a row-major cube with side m.
fn fft_nd(data: &mut [Complex<f64>], dim: usize, m: usize, fft: &dyn Fft<f64>) {
    let mut line = vec![Complex::new(0.0, 0.0); m];
    for axis in 0..dim {
        let stride = m.pow((dim - 1 - axis) as u32);
        let block = stride * m;
        for start in 0..data.len() / m {
            let base = (start / stride) * block + start % stride;
            for (j, v) in line.iter_mut().enumerate() {
                *v = data[base + j * stride];
            }
            fft.process(&mut line);
            for (j, v) in line.iter().enumerate() {
                data[base + j * stride] = *v;
            }
        }
    }
}
