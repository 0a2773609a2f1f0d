//! Acceptance gate: runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion. Exits nonzero if any fails.

// Negated comparisons make NaN count as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::process::{Command, ExitCode, Output};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use peakdist_core::goe::{
    goe_density_mass_quadrature, goe_expectation_closed, goe_expectation_quadrature, selberg_constant,
};
use peakdist_core::montecarlo::{estimate_peak_statistics, ks_block_bootstrap, CovarianceSpec, GridConfig, SimResult};
use peakdist_core::special::{
    gaussian_incomplete_integral, nested_incomplete_integral, std_normal_pdf, weighted_incomplete_integral,
};
use peakdist_core::{EuclideanModel, GoeQuery, HeightDensity, PeakModel, Quadrature, SphereModel};

type Check = Result<String, String>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn fail<T>(msg: impl Into<String>) -> Result<T, String> {
    Err(msg.into())
}

fn core<T>(r: peakdist_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn goe_normalization() -> Check {
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        let mass = core(goe_density_mass_quadrature(n, 1e-9))?.value;
        if (mass - 1.0).abs() > 1e-6 {
            return fail(format!("n = {n}: mass {mass}"));
        }
        worst = worst.max((mass - 1.0).abs());
    }
    for (n, want) in [(2, 2.0 * PI.sqrt()), (3, 2f64.sqrt() * PI), (4, 2.0 * PI)] {
        let c = core(selberg_constant(n))?;
        if rel(c, want) > 1e-12 {
            return fail(format!("c{n} = {c}, expected {want}"));
        }
    }
    Ok(format!("max |mass − 1| = {worst:.1e}; c₂, c₃, c₄ match"))
}

fn weighted_by_quadrature(alpha: f64, gamma: f64, beta: f64) -> Result<f64, String> {
    let quad = Quadrature::new(1e-13, 1e-12);
    let g = |x: f64| gaussian_incomplete_integral(gamma, x).unwrap();
    Ok(core(quad.integrate(|x| (-alpha * (x - beta).powi(2)).exp() * g(x), f64::NEG_INFINITY, f64::INFINITY))?.value)
}

fn nested_by_quadrature(alpha: f64, sigma: f64, gamma: f64, beta: f64) -> Result<f64, String> {
    let outer = Quadrature::new(1e-12, 1e-11);
    let inner = Quadrature::new(1e-14, 1e-12);
    let integrand = |y: f64| {
        let w = (-alpha * (y - beta).powi(2)).exp();
        if w == 0.0 {
            return 0.0;
        }
        let g = |x: f64| (-sigma * x * x).exp() * gaussian_incomplete_integral(gamma, x).unwrap();
        w * inner.integrate(g, f64::NEG_INFINITY, y).map(|e| e.value).unwrap_or(f64::NAN)
    };
    Ok(core(outer.integrate(integrand, f64::NEG_INFINITY, f64::INFINITY))?.value)
}

fn gaussian_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut worst1, mut worst2): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let alpha = rng.random_range(0.1..5.0);
        let sigma = rng.random_range(0.1..5.0);
        let gamma = rng.random_range(0.1..5.0);
        let beta = rng.random_range(-3.0..3.0);
        let e1 = (core(weighted_incomplete_integral(alpha, gamma, beta))? - weighted_by_quadrature(alpha, gamma, beta)?).abs();
        let e2 = (core(nested_incomplete_integral(alpha, sigma, gamma, beta))?
            - nested_by_quadrature(alpha, sigma, gamma, beta)?)
        .abs();
        if !(e1 <= 1e-7 && e2 <= 1e-7) {
            return fail(format!("(α, σ, γ, β) = ({alpha}, {sigma}, {gamma}, {beta}): errors {e1:.1e}, {e2:.1e}"));
        }
        worst1 = worst1.max(e1);
        worst2 = worst2.max(e2);
    }
    Ok(format!("20 tuples; max abs error {worst1:.1e} (single), {worst2:.1e} (nested)"))
}

fn goe_closed_forms() -> Check {
    let mut worst = [0.0f64; 3];
    for n in 1..=3 {
        let (tol, quad_tol) = if n == 3 { (1e-3, 1e-4) } else { (1e-7, 1e-9) };
        for a in [0.6, 1.0, 2.0, 5.0, 0.5 + 1e-6, 0.8] {
            for b in [-2.0, -0.5, 0.0, 0.5, 2.0] {
                let q = core(GoeQuery::new(n, a, b))?;
                let closed = core(goe_expectation_closed(&q))?;
                let quad = core(goe_expectation_quadrature(&q, quad_tol))?.value;
                let r = rel(closed, quad);
                if !(r <= tol) {
                    return fail(format!("n = {n}, a = {a}, b = {b}: closed {closed}, quadrature {quad}"));
                }
                worst[n - 1] = worst[n - 1].max(r);
            }
        }
    }
    Ok(format!(
        "30 (a, b) points per n; max rel error {:.1e}, {:.1e}, {:.1e}",
        worst[0], worst[1], worst[2]
    ))
}

fn mass<D: HeightDensity>(d: &D) -> Result<f64, String> {
    Ok(core(Quadrature::new(1e-12, 1e-10).integrate(|x| d.eval(x), -40.0, 40.0))?.value)
}

fn density_normalization() -> Check {
    let mut worst: f64 = 0.0;
    let mut sets = 0;
    for dim in 1..=3 {
        for kappa in [0.01, 0.1, 0.5, 0.9, 1.0] {
            let m = mass(&core(core(EuclideanModel::from_kappa(dim, kappa))?.density())?)?;
            if (m - 1.0).abs() > 1e-6 {
                return fail(format!("euclidean N = {dim}, κ = {kappa}: mass {m}"));
            }
            worst = worst.max((m - 1.0).abs());
            sets += 1;
        }
        for (k1, k2) in [(0.1, 0.1), (1.0, 1.0), (1.0, 2.0)] {
            let m = mass(&core(core(SphereModel::from_kappas(dim, k1, k2))?.density())?)?;
            if (m - 1.0).abs() > 1e-6 {
                return fail(format!("sphere N = {dim}, (κ₁, κ₂) = ({k1}, {k2}): mass {m}"));
            }
            worst = worst.max((m - 1.0).abs());
            sets += 1;
        }
    }
    Ok(format!("{sets} parameter sets; max |∫h − 1| = {worst:.1e}"))
}

fn degeneration() -> Check {
    let xs: Vec<f64> = (0..50).map(|i| -5.0 + 10.0 * i as f64 / 49.0).collect();
    let mut worst_normal: f64 = 0.0;
    for kappa in [0.0, 1e-10] {
        let d = core(core(EuclideanModel::from_kappa(1, kappa))?.density())?;
        for &x in &xs {
            worst_normal = worst_normal.max((d.eval(x) - core(std_normal_pdf(x))?).abs());
        }
    }
    if worst_normal > 1e-9 {
        return fail(format!("N = 1, κ → 0: max deviation from φ {worst_normal:.1e}"));
    }
    let mut worst_sphere: f64 = 0.0;
    for dim in 1..=3 {
        for k2 in [0.04, 0.25, 0.81, 1.0] {
            let s = core(core(SphereModel::from_kappas(dim, 1e-12, k2))?.density())?;
            let e = core(core(EuclideanModel::from_kappa(dim, k2.sqrt()))?.density())?;
            for &x in &xs {
                worst_sphere = worst_sphere.max((s.eval(x) - e.eval(x)).abs());
            }
        }
    }
    if worst_sphere > 1e-9 {
        return fail(format!("κ₁ → 0: max deviation from the Euclidean density {worst_sphere:.1e}"));
    }
    Ok(format!("φ deviation {worst_normal:.1e}; sphere → Euclidean deviation {worst_sphere:.1e}"))
}

fn rice() -> Check {
    let (rho1, rho2) = (-0.5, 0.25);
    let m = core(EuclideanModel::new(1, rho1, rho2))?;
    let (lambda2, lambda4) = (-2.0 * rho1, 12.0 * rho2);
    let want = (lambda4 / lambda2).sqrt() / (2.0 * PI);
    let got = core(m.expected_maxima())?;
    if (got - want).abs() > 1e-12 || (want - 3f64.sqrt() / (2.0 * PI)).abs() > 1e-15 {
        return fail(format!("E{{M}} = {got}, Rice rate {want}"));
    }
    Ok(format!("E{{M}} = {got}, |diff| = {:.1e}", (got - want).abs()))
}

fn boundary_continuity() -> Check {
    let xs = [-1.0, 0.0, 2.0];
    let mut worst: f64 = 0.0;
    for dim in 1..=3 {
        let tol = if dim == 3 { 1e-7 } else { 1e-9 };
        let e = core(EuclideanModel::from_kappa(dim, 1.0))?;
        let s = core(SphereModel::from_kappas(dim, 1.0, 2.0))?;
        let quad_e = core(e.height_densities_via_goe(&xs, tol))?;
        let quad_s = core(s.height_densities_via_goe(&xs, tol))?;
        for (i, &x) in xs.iter().enumerate() {
            let de = (core(e.height_density(x))? - quad_e[i]).abs();
            let ds = (core(s.height_density(x))? - quad_s[i]).abs();
            if !(de <= 1e-5 && ds <= 1e-5) {
                return fail(format!("N = {dim}, x = {x}: euclidean gap {de:.1e}, sphere gap {ds:.1e}"));
            }
            worst = worst.max(de).max(ds);
        }
    }
    Ok(format!("κ = 1 and κ₂ − κ₁ = 1, N = 1–3; max gap {worst:.1e}"))
}

fn z_check(label: &str, r: &SimResult, target: f64) -> Result<String, String> {
    let z = (r.rate() - target) / r.rate_standard_error();
    if z.abs() >= 3.0 {
        return fail(format!("{label} rate {} vs {target}: z = {z:.2}", r.rate()));
    }
    Ok(format!("{label} z = {z:.2}"))
}

fn ks_check<M: PeakModel>(label: &str, r: &SimResult, model: &M, seed: u64) -> Result<String, String> {
    let report = core(ks_block_bootstrap(r, |xs| model.exceedance_sorted(xs), 400, 0.99, seed))?;
    if !report.passed {
        return fail(format!(
            "{label} KS D = {:.4} above 99% critical value {:.4}",
            report.statistic, report.critical_value
        ));
    }
    Ok(format!("{label} KS D = {:.4} < {:.4}", report.statistic, report.critical_value))
}

fn monte_carlo() -> Check {
    let standard = core(CovarianceSpec::gaussian_mixture(vec![1.0], vec![0.5]))?;
    let mut notes = Vec::new();
    for (dim, points, side, replicates, seed) in [(1, 1000, 100.0, 200, 2024), (2, 256, 25.6, 100, 1)] {
        let model = core(standard.euclidean_model(dim))?;
        let grid = core(GridConfig::torus(dim, points, side))?;
        let r = core(estimate_peak_statistics(&standard, grid, replicates, seed))?.result;
        let label = format!("{dim}-D");
        notes.push(z_check(&label, &r, core(model.expected_maxima())?)?);
        notes.push(ks_check(&label, &r, &model, seed + 1)?);
    }
    let mut a: Vec<f64> = (0..=38).map(|k| if k < 2 { 0.0 } else { (-(k as f64) / 3.0).exp() }).collect();
    let total: f64 = a.iter().sum();
    a.iter_mut().for_each(|v| *v /= total);
    let circle = core(CovarianceSpec::circle(a))?;
    let model = core(circle.sphere_model())?;
    let r = core(estimate_peak_statistics(&circle, core(GridConfig::circle(1024))?, 500, 31))?.result;
    notes.push(z_check("S¹", &r, core(model.expected_maxima())?)?);
    notes.push(ks_check("S¹", &r, &model, 32)?);
    Ok(notes.join("; "))
}

fn peakdist(args: &[&str]) -> Result<Output, String> {
    Command::new(env!("CARGO_BIN_EXE_peakdist"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())
}

fn check_csv(name: &str, text: &str) -> Result<usize, String> {
    let mut lines = text.lines();
    if lines.next() != Some("x,value") {
        return fail(format!("{name}: missing x,value header"));
    }
    let mut last = f64::NEG_INFINITY;
    let mut rows = 0;
    for line in lines {
        let parsed = line
            .split_once(',')
            .and_then(|(x, v)| Some((x.parse::<f64>().ok()?, v.parse::<f64>().ok()?)));
        let Some((x, v)) = parsed else {
            return fail(format!("{name}: malformed row {line:?}"));
        };
        if !(x > last) || !(v.is_finite() && v >= 0.0) {
            return fail(format!("{name}: bad row {line:?}"));
        }
        last = x;
        rows += 1;
    }
    Ok(rows)
}

fn cli_contract() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out_dir = dir.path().to_str().ok_or("non-UTF-8 temp dir")?;
    let mut files = 0;
    for preset in ["fig1", "fig2"] {
        let out = peakdist(&["density", "--preset", preset, "--out-dir", out_dir])?;
        if !out.status.success() {
            return fail(format!("preset {preset}: {}", String::from_utf8_lossy(&out.stderr)));
        }
    }
    for entry in std::fs::read_dir(dir.path()).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        check_csv(&path.display().to_string(), &text)?;
        files += 1;
    }
    if files != 18 {
        return fail(format!("expected 18 preset files, found {files}"));
    }
    for (args, bound) in [
        (&["density", "--geometry", "euclidean", "--dim", "1", "--kappa", "1.9"][..], "κ² < 3"),
        (&["density", "--geometry", "euclidean", "--dim", "3", "--kappa", "1.3"], "κ² < 1.6666"),
        (&["pvalue", "--geometry", "sphere", "--dim", "2", "--kappa1", "0.5", "--kappa2", "2.6", "--u", "0"], "κ₂ − κ₁ < 2"),
    ] {
        let out = peakdist(args)?;
        let stderr = String::from_utf8_lossy(&out.stderr);
        if out.status.code() != Some(3) || !stderr.contains(bound) {
            return fail(format!("{args:?}: exit {:?}, stderr {stderr:?}", out.status.code()));
        }
    }
    for args in [
        &["simulate", "--dim", "2", "--points", "128", "--side", "12.8", "--replicates", "30", "--seed", "5"][..],
        &["density", "--geometry", "sphere", "--dim", "3", "--kappa1", "0.4", "--kappa2", "1.1"],
    ] {
        let first = peakdist(args)?;
        let second = peakdist(args)?;
        if !first.status.success() || first.stdout != second.stdout {
            return fail(format!("{args:?}: repeated runs differ"));
        }
    }
    Ok(format!("{files} preset CSVs well formed; invalid regimes exit 3 naming the bound; reruns byte-identical"))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Check,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "GOE normalization and Selberg constants", budget: Some(Duration::from_secs(30)), run: goe_normalization },
        Criterion { id: 2, name: "Gaussian integral identities", budget: Some(Duration::from_secs(10)), run: gaussian_identities },
        Criterion { id: 3, name: "closed-form GOE expectations vs quadrature", budget: Some(Duration::from_secs(300)), run: goe_closed_forms },
        Criterion { id: 4, name: "height-density normalization", budget: Some(Duration::from_secs(60)), run: density_normalization },
        Criterion { id: 5, name: "degeneration anchors", budget: None, run: degeneration },
        Criterion { id: 6, name: "Rice formula cross-check", budget: None, run: rice },
        Criterion { id: 7, name: "boundary continuity", budget: None, run: boundary_continuity },
        Criterion { id: 8, name: "Monte Carlo agreement", budget: Some(Duration::from_secs(300)), run: monte_carlo },
        Criterion { id: 9, name: "CLI contract", budget: None, run: cli_contract },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let mut outcome = (c.run)();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(budget)) = (&outcome, c.budget) {
            if elapsed > budget {
                outcome = Err(format!("took {elapsed:.1?}, budget {budget:?}"));
            }
        }
        match outcome {
            Ok(detail) => println!("PASS  criterion {}: {} ({detail}; {elapsed:.1?})", c.id, c.name),
            Err(detail) => {
                failures += 1;
                println!("FAIL  criterion {}: {} ({detail}; {elapsed:.1?})", c.id, c.name);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
