//! Shared inputs for the criterion benchmarks.

/// Evaluation points spanning the bulk of every height density.
pub fn density_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| -5.0 + 10.0 * i as f64 / (points.max(2) - 1) as f64)
        .collect()
}
