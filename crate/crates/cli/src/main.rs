//! `peakdist`: height densities, exceedance curves, expected maxima counts,
//! GOE self-checks and Monte Carlo runs from the command line.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use peakdist_core::goe::{goe_expectation_closed, goe_expectation_quadrature};
use peakdist_core::montecarlo::{estimate_peak_statistics, CovarianceSpec, GridConfig, SimResult, MIN_REPLICATES};
use peakdist_core::{
    sweep, CurveTable, Error, EuclideanModel, Geometry, GoeQuery, PeakModel, SphereModel, Validity,
};

#[derive(Parser)]
#[command(name = "peakdist", version, about = "Peak height distributions of isotropic Gaussian random fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the height density h(x) of local maxima.
    Density(CurveArgs),
    /// Sample the exceedance F(u) = P(height > u).
    Exceedance(CurveArgs),
    /// Expected number of local maxima per unit volume (or unit-area ball).
    ExpectedMaxima(ModelArgs),
    /// F(u), E{M} and the expected number of maxima above u.
    Pvalue(PvalueArgs),
    /// Compare a closed-form GOE expectation with direct quadrature.
    GoeCheck(GoeArgs),
    /// Simulate fields on a periodic grid and compare peak rates with the closed forms.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GeometryArg {
    Euclidean,
    Sphere,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Euclidean, N ∈ {1, 2, 3} × κ ∈ {1, 0.5, 0.1}.
    Fig1,
    /// Sphere, N ∈ {1, 2, 3} × (κ₁, κ₂) ∈ {(1, 2), (1, 1), (0.1, 0.1)}.
    Fig2,
}

#[derive(Args, Default)]
struct ModelArgs {
    #[arg(long, value_enum)]
    geometry: Option<GeometryArg>,
    /// Dimension N (1, 2 or 3).
    #[arg(long)]
    dim: Option<usize>,
    /// Euclidean κ = −ρ′(0)/√ρ″(0).
    #[arg(long)]
    kappa: Option<f64>,
    /// Euclidean ρ′(0) (negative).
    #[arg(long, allow_negative_numbers = true)]
    rho1: Option<f64>,
    /// Euclidean ρ″(0) (positive).
    #[arg(long, allow_negative_numbers = true)]
    rho2: Option<f64>,
    /// Sphere κ₁ = C′(1)/C″(1).
    #[arg(long)]
    kappa1: Option<f64>,
    /// Sphere κ₂ = C′(1)²/C″(1).
    #[arg(long)]
    kappa2: Option<f64>,
    /// Sphere C′(1).
    #[arg(long, allow_negative_numbers = true)]
    c1: Option<f64>,
    /// Sphere C″(1).
    #[arg(long, allow_negative_numbers = true)]
    c2: Option<f64>,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Sample points as lo:hi:step.
    #[arg(long, default_value = "-4:6:0.01", allow_hyphen_values = true, value_parser = parse_range)]
    x: Range,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Sweep a fixed family of parameter sets instead of a single model.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Directory for preset output, one file per parameter set.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PvalueArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Threshold u.
    #[arg(long, allow_negative_numbers = true)]
    u: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GoeArgs {
    /// n, the expectation is over the (n+1)×(n+1) ensemble.
    #[arg(long)]
    n: usize,
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    /// Relative tolerance of the quadrature.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML covariance file: `weights` and `scales`, or `fourier`.
    /// Defaults to ρ(r²) = exp(−r²/2).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Dimension of the torus (mixture specs only).
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 200)]
    replicates: usize,
    /// Grid points per side (default 1000, 256, 64 for N = 1, 2, 3; 1024 on the circle).
    #[arg(long)]
    points: Option<usize>,
    /// Side length of the torus (default 100, 25.6, 12.8 for N = 1, 2, 3).
    #[arg(long)]
    side: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
    step: f64,
}

fn parse_range(s: &str) -> Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, step] = parts[..] else {
        return Err(format!("expected lo:hi:step, got {s:?}"));
    };
    let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
    let r = Range {
        lo: num(lo)?,
        hi: num(hi)?,
        step: num(step)?,
    };
    if !(r.lo.is_finite() && r.hi.is_finite()) || r.hi < r.lo {
        return Err(format!("need finite lo <= hi, got {s:?}"));
    }
    if !(r.step > 0.0 && r.step.is_finite()) {
        return Err(format!("step must be positive, got {}", r.step));
    }
    Ok(r)
}

enum CliError {
    Usage(String),
    Core(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn io_error(path: &Path, e: impl Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

type CliResult<T> = Result<T, CliError>;

enum Model {
    Euclidean(EuclideanModel),
    Sphere(SphereModel),
}

impl ModelArgs {
    fn build(&self) -> CliResult<Model> {
        let geometry = self.geometry.ok_or_else(|| usage("--geometry is required"))?;
        let dim = self.dim.ok_or_else(|| usage("--dim is required"))?;
        match geometry {
            GeometryArg::Euclidean => {
                if self.kappa1.is_some() || self.kappa2.is_some() || self.c1.is_some() || self.c2.is_some() {
                    return Err(usage("--kappa1/--kappa2/--c1/--c2 apply to the sphere only"));
                }
                let model = match (self.kappa, self.rho1, self.rho2) {
                    (Some(k), None, None) => EuclideanModel::from_kappa(dim, k)?,
                    (None, Some(r1), Some(r2)) => EuclideanModel::new(dim, r1, r2)?,
                    _ => return Err(usage("give either --kappa or both --rho1 and --rho2")),
                };
                Ok(Model::Euclidean(model))
            }
            GeometryArg::Sphere => {
                if self.kappa.is_some() || self.rho1.is_some() || self.rho2.is_some() {
                    return Err(usage("--kappa/--rho1/--rho2 apply to Euclidean space only"));
                }
                let model = match (self.kappa1, self.kappa2, self.c1, self.c2) {
                    (Some(k1), Some(k2), None, None) => SphereModel::from_kappas(dim, k1, k2)?,
                    (None, None, Some(c1), Some(c2)) => SphereModel::new(dim, c1, c2)?,
                    _ => return Err(usage("give either --kappa1 and --kappa2, or --c1 and --c2")),
                };
                Ok(Model::Sphere(model))
            }
        }
    }

    fn is_empty(&self) -> bool {
        self.geometry.is_none()
            && self.dim.is_none()
            && [self.kappa, self.rho1, self.rho2, self.kappa1, self.kappa2, self.c1, self.c2]
                .iter()
                .all(Option::is_none)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Density,
    Exceedance,
}

fn curve<M>(model: &M, kind: Kind, xs: Vec<f64>) -> CliResult<CurveTable>
where
    M: PeakModel,
    M::Density: Sync,
{
    let table = match kind {
        Kind::Density => CurveTable::density(model, xs)?,
        Kind::Exceedance => CurveTable::exceedance(model, xs)?,
    };
    warn_if_conjectured(table.validity);
    Ok(table)
}

fn model_curve(model: &Model, kind: Kind, xs: Vec<f64>) -> CliResult<CurveTable> {
    match model {
        Model::Euclidean(m) => curve(m, kind, xs),
        Model::Sphere(m) => curve(m, kind, xs),
    }
}

fn warn_if_conjectured(validity: Validity) {
    if validity == Validity::Conjectured {
        eprintln!("warning: parameters lie in the conjectured regime; the formulas are not proved there");
    }
}

fn render(table: &CurveTable, format: Format) -> CliResult<String> {
    match format {
        Format::Csv => Ok(table.to_csv()),
        Format::Json => to_json(table),
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn emit(text: &str, output: Option<&Path>) -> CliResult<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| io_error(path, e)),
        None => io::stdout().lock().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn cmd_curve(args: &CurveArgs, kind: Kind) -> CliResult<()> {
    let xs = sweep(args.x.lo, args.x.hi, args.x.step)?;
    let Some(preset) = args.preset else {
        if args.out_dir.is_some() {
            return Err(usage("--out-dir applies to --preset only"));
        }
        let table = model_curve(&args.model.build()?, kind, xs)?;
        return emit(&render(&table, args.format)?, args.output.as_deref());
    };
    if !args.model.is_empty() || args.output.is_some() {
        return Err(usage("--preset replaces the model flags and --output"));
    }
    let dir = args.out_dir.as_deref().ok_or_else(|| usage("--preset needs --out-dir"))?;
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let prefix = match kind {
        Kind::Density => "density",
        Kind::Exceedance => "exceedance",
    };
    let ext = match args.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    for (name, model) in preset_models(preset)? {
        let table = model_curve(&model, kind, xs.clone())?;
        let path = dir.join(format!("{prefix}_{name}.{ext}"));
        fs::write(&path, render(&table, args.format)?).map_err(|e| io_error(&path, e))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn preset_models(preset: Preset) -> CliResult<Vec<(String, Model)>> {
    let mut out = Vec::new();
    for dim in 1..=3 {
        match preset {
            Preset::Fig1 => {
                for kappa in [1.0, 0.5, 0.1] {
                    let model = EuclideanModel::from_kappa(dim, kappa)?;
                    out.push((format!("fig1_n{dim}_kappa{kappa}"), Model::Euclidean(model)));
                }
            }
            Preset::Fig2 => {
                for (k1, k2) in [(1.0, 2.0), (1.0, 1.0), (0.1, 0.1)] {
                    let model = SphereModel::from_kappas(dim, k1, k2)?;
                    out.push((format!("fig2_n{dim}_kappa1_{k1}_kappa2_{k2}"), Model::Sphere(model)));
                }
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct ModelReport {
    geometry: Geometry,
    dim: usize,
    params: BTreeMap<String, f64>,
    expected_maxima: f64,
    validity: Validity,
}

#[derive(Serialize)]
struct PvalueReport {
    geometry: Geometry,
    dim: usize,
    params: BTreeMap<String, f64>,
    u: f64,
    #[serde(rename = "F")]
    exceedance: f64,
    expected_maxima: f64,
    expected_maxima_above: f64,
    validity: Validity,
}

fn model_report<M: PeakModel>(m: &M) -> CliResult<ModelReport> {
    let validity = m.check_validity()?;
    warn_if_conjectured(validity);
    Ok(ModelReport {
        geometry: m.geometry(),
        dim: m.dim(),
        params: m.params(),
        expected_maxima: m.expected_maxima()?,
        validity,
    })
}

fn pvalue_report<M: PeakModel>(m: &M, u: f64) -> CliResult<PvalueReport> {
    let base = model_report(m)?;
    let exceedance = m.exceedance(u)?;
    Ok(PvalueReport {
        geometry: base.geometry,
        dim: base.dim,
        params: base.params,
        u,
        exceedance,
        expected_maxima: base.expected_maxima,
        expected_maxima_above: exceedance * base.expected_maxima,
        validity: base.validity,
    })
}

fn cmd_expected_maxima(args: &ModelArgs) -> CliResult<()> {
    let report = match args.build()? {
        Model::Euclidean(m) => model_report(&m)?,
        Model::Sphere(m) => model_report(&m)?,
    };
    emit(&to_json(&report)?, None)
}

fn cmd_pvalue(args: &PvalueArgs) -> CliResult<()> {
    if args.u.is_nan() {
        return Err(usage("--u must be a number"));
    }
    let report = match args.model.build()? {
        Model::Euclidean(m) => pvalue_report(&m, args.u)?,
        Model::Sphere(m) => pvalue_report(&m, args.u)?,
    };
    emit(&to_json(&report)?, args.output.as_deref())
}

#[derive(Serialize)]
struct GoeReport {
    n: usize,
    a: f64,
    b: f64,
    tol: f64,
    closed: f64,
    quadrature: f64,
    quadrature_error: f64,
    abs_error: f64,
    rel_error: f64,
}

fn cmd_goe_check(args: &GoeArgs) -> CliResult<()> {
    if !(1..=3).contains(&args.n) {
        return Err(usage(format!("--n must be 1, 2 or 3, got {}", args.n)));
    }
    if !(args.a > 0.0 && args.a.is_finite()) {
        return Err(usage(format!("--a must be > 0, got {}", args.a)));
    }
    if !args.b.is_finite() {
        return Err(usage("--b must be finite"));
    }
    if !(args.tol > 0.0 && args.tol < 1.0) {
        return Err(usage(format!("--tol must lie in (0, 1), got {}", args.tol)));
    }
    let q = GoeQuery::new(args.n, args.a, args.b)?;
    let closed = goe_expectation_closed(&q)?;
    let quad = goe_expectation_quadrature(&q, args.tol)?;
    let abs_error = (closed - quad.value).abs();
    let report = GoeReport {
        n: args.n,
        a: args.a,
        b: args.b,
        tol: args.tol,
        closed,
        quadrature: quad.value,
        quadrature_error: quad.error,
        abs_error,
        rel_error: abs_error / quad.value.abs(),
    };
    emit(&to_json(&report)?, args.output.as_deref())
}

/// Flat covariance file: `weights` + `scales` for ρ(r²) = Σ wᵢ e^{−αᵢ r²},
/// or `fourier` for C(cos θ) = Σ aₖ cos kθ on the circle.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    weights: Option<Vec<f64>>,
    scales: Option<Vec<f64>>,
    fourier: Option<Vec<f64>>,
}

fn read_spec(path: &Path) -> CliResult<CovarianceSpec> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let file: SpecFile = toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let spec = match file {
        SpecFile {
            weights: Some(w),
            scales: Some(s),
            fourier: None,
        } => CovarianceSpec::gaussian_mixture(w, s)?,
        SpecFile {
            weights: None,
            scales: None,
            fourier: Some(a),
        } => CovarianceSpec::circle(a)?,
        _ => {
            return Err(usage(format!(
                "{}: give either `weights` and `scales`, or `fourier`",
                path.display()
            )))
        }
    };
    Ok(spec)
}

#[derive(Serialize)]
struct Comparison {
    geometry: Geometry,
    dim: usize,
    empirical_rate: f64,
    standard_error: f64,
    closed_form_rate: f64,
    z_score: f64,
    ties_excluded: usize,
    validity: Validity,
}

#[derive(Serialize)]
struct SimulateReport {
    result: SimResult,
    comparison: Comparison,
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    if args.replicates < MIN_REPLICATES {
        return Err(usage(format!(
            "--replicates must be at least {MIN_REPLICATES}, got {}",
            args.replicates
        )));
    }
    let spec = match &args.spec {
        Some(path) => read_spec(path)?,
        None => CovarianceSpec::gaussian_mixture(vec![1.0], vec![0.5])?,
    };
    let (grid, geometry, dim, validity, closed_form_rate) = if spec.is_circle() {
        if args.dim != 1 || args.side.is_some() {
            return Err(usage("circle specs are one-dimensional with side 2π; drop --dim and --side"));
        }
        let model = spec.sphere_model()?;
        let grid = GridConfig::circle(args.points.unwrap_or(1024))?;
        (grid, Geometry::Sphere, 1, model.check_validity()?, model.expected_maxima()?)
    } else {
        let (points, side) = match args.dim {
            1 => (1000, 100.0),
            2 => (256, 25.6),
            3 => (64, 12.8),
            d => return Err(usage(format!("--dim must be 1, 2 or 3, got {d}"))),
        };
        let model = spec.euclidean_model(args.dim)?;
        let grid = GridConfig::torus(args.dim, args.points.unwrap_or(points), args.side.unwrap_or(side))?;
        (grid, Geometry::Euclidean, args.dim, model.check_validity()?, model.expected_maxima()?)
    };
    warn_if_conjectured(validity);
    let stats = estimate_peak_statistics(&spec, grid, args.replicates, args.seed)?;
    let result = stats.result;
    let empirical_rate = result.rate();
    let standard_error = result.rate_standard_error();
    let comparison = Comparison {
        geometry,
        dim,
        empirical_rate,
        standard_error,
        closed_form_rate,
        z_score: (empirical_rate - closed_form_rate) / standard_error,
        ties_excluded: stats.ties_excluded,
        validity,
    };
    if stats.ties_excluded > 0 {
        eprintln!("warning: {} tied grid points were excluded", stats.ties_excluded);
    }
    emit(&to_json(&SimulateReport { result, comparison })?, args.output.as_deref())
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Density(a) => cmd_curve(a, Kind::Density),
        Command::Exceedance(a) => cmd_curve(a, Kind::Exceedance),
        Command::ExpectedMaxima(a) => cmd_expected_maxima(a),
        Command::Pvalue(a) => cmd_pvalue(a),
        Command::GoeCheck(a) => cmd_goe_check(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Core(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Convergence { .. } => ExitCode::from(4),
                Error::Domain(_) | Error::InvalidRegime { .. } => ExitCode::from(3),
            }
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
