use std::f64::consts::PI;

use peakdist_core::montecarlo::*;
use peakdist_core::{PeakModel, Validity};

fn standard() -> CovarianceSpec {
    CovarianceSpec::gaussian_mixture(vec![1.0], vec![0.5]).unwrap()
}

/// aₖ ∝ e^{−k/3} for 2 ≤ k ≤ 38: κ₂ − κ₁ ≈ 0.79.
fn circle() -> CovarianceSpec {
    let mut a: Vec<f64> = (0..=38).map(|k| if k < 2 { 0.0 } else { (-(k as f64) / 3.0).exp() }).collect();
    let total: f64 = a.iter().sum();
    a.iter_mut().for_each(|v| *v /= total);
    CovarianceSpec::circle(a).unwrap()
}

fn within(label: &str, value: f64, target: f64, se: f64, k: f64) {
    let z = (value - target) / se;
    println!("{label}: {value} vs {target}, se {se}, z {z:.2}");
    assert!(z.abs() < k, "{label}: z = {z}");
}

#[test]
fn one_dimensional_rate_and_exceedance() {
    let spec = standard();
    let model = spec.euclidean_model(1).unwrap();
    let expected = model.expected_maxima().unwrap();
    assert!((expected - 3f64.sqrt() / (2.0 * PI)).abs() < 1e-14);
    let stats = estimate_peak_statistics(&spec, GridConfig::torus(1, 1000, 100.0).unwrap(), 200, 2024).unwrap();
    let r = &stats.result;
    r.validate().unwrap();
    within("1-D rate", r.rate(), expected, r.rate_standard_error(), 3.0);
    let (p, se) = r.exceedance(0.0);
    within("1-D F(0)", p, model.exceedance(0.0).unwrap(), se, 3.0);
    let report = ks_block_bootstrap(r, |xs| model.exceedance_sorted(xs), 400, 0.99, 7).unwrap();
    println!("{report:?}");
    assert!(report.passed);
}

#[test]
fn two_dimensional_rate_and_heights() {
    let spec = standard();
    let model = spec.euclidean_model(2).unwrap();
    let expected = model.expected_maxima().unwrap();
    assert!((expected - 1.0 / (2.0 * 3f64.sqrt() * PI)).abs() < 1e-14);
    let stats = estimate_peak_statistics(&spec, GridConfig::torus(2, 256, 25.6).unwrap(), 100, 1).unwrap();
    let r = &stats.result;
    within("2-D rate", r.rate(), expected, r.rate_standard_error(), 3.0);
    let (p, se) = r.exceedance(0.0);
    within("2-D F(0)", p, model.exceedance(0.0).unwrap(), se, 3.0);
    let report = ks_block_bootstrap(r, |xs| model.exceedance_sorted(xs), 400, 0.99, 8).unwrap();
    println!("{report:?}");
    assert!(report.passed);
}

/// Probability that a grid point beats its 8 neighbours, from direct
/// Cholesky draws of the 3×3 stencil, against the FFT simulator.
#[test]
fn two_dimensional_sampler_matches_stencil_oracle() {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let spec = standard();
    let h = 0.2;
    let pts: Vec<(f64, f64)> = (-1..=1).flat_map(|i| (-1..=1).map(move |j| (i as f64 * h, j as f64 * h))).collect();
    let mut l = [[0.0; 9]; 9];
    for i in 0..9 {
        for j in 0..=i {
            let (dx, dy) = (pts[i].0 - pts[j].0, pts[i].1 - pts[j].1);
            let s = spec.covariance(dx * dx + dy * dy) - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            l[i][j] = if i == j { s.sqrt() } else { s / l[j][j] };
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let draws = 10_000_000u64;
    let mut hits = 0u64;
    let (mut z, mut x) = ([0.0; 9], [0.0; 9]);
    for _ in 0..draws {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        for i in 0..9 {
            x[i] = (0..=i).map(|k| l[i][k] * z[k]).sum();
        }
        if (0..9).all(|i| i == 4 || x[i] < x[4]) {
            hits += 1;
        }
    }
    let p = hits as f64 / draws as f64;
    let oracle = p / (h * h);
    let oracle_se = (p * (1.0 - p) / draws as f64).sqrt() / (h * h);
    let stats = estimate_peak_statistics(&spec, GridConfig::torus(2, 128, 25.6).unwrap(), 400, 3).unwrap();
    let r = &stats.result;
    let se = (r.rate_standard_error().powi(2) + oracle_se.powi(2)).sqrt();
    within("2-D stencil oracle", r.rate(), oracle, se, 3.0);
}

#[test]
fn mixture_with_smaller_kappa() {
    let spec = CovarianceSpec::gaussian_mixture(vec![0.5, 0.5], vec![0.2, 5.0]).unwrap();
    let model = spec.euclidean_model(1).unwrap();
    assert!((model.kappa() - 0.7348).abs() < 1e-4);
    assert_eq!(model.validity(), Validity::Proved);
    let spacing = 0.1 * spec.correlation_length();
    let points = (100.0 / spacing).ceil() as usize;
    let stats = estimate_peak_statistics(&spec, GridConfig::torus(1, points, 100.0).unwrap(), 100, 5).unwrap();
    let r = &stats.result;
    within("mixture rate", r.rate(), model.expected_maxima().unwrap(), r.rate_standard_error(), 3.0);
    let report = ks_block_bootstrap(r, |xs| model.exceedance_sorted(xs), 400, 0.99, 9).unwrap();
    assert!(report.passed, "{report:?}");
}

#[test]
fn circle_rate_and_heights() {
    let spec = circle();
    let model = spec.sphere_model().unwrap();
    assert_eq!(model.validity(), Validity::Proved);
    let stats = estimate_peak_statistics(&spec, GridConfig::circle(1024).unwrap(), 500, 31).unwrap();
    let r = &stats.result;
    within("S1 rate", r.rate(), model.expected_maxima().unwrap(), r.rate_standard_error(), 3.0);
    let (p, se) = r.exceedance(1.0);
    within("S1 F(1)", p, model.exceedance(1.0).unwrap(), se, 3.0);
    let report = ks_block_bootstrap(r, |xs| model.exceedance_sorted(xs), 400, 0.99, 10).unwrap();
    println!("{report:?}");
    assert!(report.passed);
}

#[test]
fn single_mode_circle_has_two_maxima() {
    let spec = CovarianceSpec::circle(vec![0.0, 0.0, 1.0]).unwrap();
    let stats = estimate_peak_statistics(&spec, GridConfig::circle(256).unwrap(), 50, 3).unwrap();
    assert!(stats.result.maxima_count_per_replicate.iter().all(|&c| c == 2));
    // κ₂ − κ₁ = 3 lies outside every regime for N = 1.
    assert_eq!(spec.sphere_model().unwrap().validity(), Validity::Invalid);
}

#[test]
fn discretization_has_converged() {
    let spec = standard();
    let sim = FieldSimulator::new(&spec, GridConfig::torus(1, 2000, 100.0).unwrap(), 77).unwrap();
    let (mut fine, mut coarse) = (Vec::new(), Vec::new());
    for r in 0..200 {
        let field = sim.sample(r);
        fine.push(extract_local_maxima(&field).maxima.len() as f64);
        coarse.push(extract_local_maxima(&field.subsample(2).unwrap()).maxima.len() as f64);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let se = {
        let m = mean(&coarse);
        (coarse.iter().map(|c| (c - m).powi(2)).sum::<f64>() / 199.0 / 200.0).sqrt()
    };
    let shift = mean(&fine) - mean(&coarse);
    println!("fine {} coarse {} se {se}", mean(&fine), mean(&coarse));
    assert!(shift.abs() < se, "resolution shift {shift} vs se {se}");
}

#[test]
fn counts_scale_with_volume() {
    let spec = standard();
    for (dim, points, side) in [(1, 500, 50.0), (2, 128, 12.8)] {
        let small = estimate_peak_statistics(&spec, GridConfig::torus(dim, points, side).unwrap(), 100, 1).unwrap();
        let large =
            estimate_peak_statistics(&spec, GridConfig::torus(dim, 2 * points, 2.0 * side).unwrap(), 100, 2).unwrap();
        let count = |r: &SimResult| r.rate() * r.region_volume;
        let count_se = |r: &SimResult| r.rate_standard_error() * r.region_volume;
        let factor = 2f64.powi(dim as i32);
        let diff = count(&large.result) - factor * count(&small.result);
        let se = (count_se(&large.result).powi(2) + (factor * count_se(&small.result)).powi(2)).sqrt();
        assert!(diff.abs() < 3.0 * se, "dim {dim}: {diff} vs {se}");
    }
}

#[test]
fn independent_of_thread_count() {
    let spec = standard();
    let grid = GridConfig::torus(2, 64, 12.8).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_peak_statistics(&spec, grid, 40, 123).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one, four);
    assert_eq!(one.result.seed, 123);
    let json = serde_json::to_string(&one.result).unwrap();
    let back: SimResult = serde_json::from_str(&json).unwrap();
    assert_eq!(back, one.result);
}

#[test]
#[ignore = "slow: three-dimensional grids"]
fn three_dimensional_rate() {
    let spec = standard();
    let model = spec.euclidean_model(3).unwrap();
    let stats = estimate_peak_statistics(&spec, GridConfig::torus(3, 64, 12.8).unwrap(), 30, 4).unwrap();
    let r = &stats.result;
    within("3-D rate", r.rate(), model.expected_maxima().unwrap(), r.rate_standard_error(), 3.0);
}

