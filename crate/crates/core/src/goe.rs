//! Gaussian Orthogonal Ensemble expectations.
//!
//! The quantity of interest throughout is
//!
//! ```text
//! E_GOE^{n+1} { exp[ λ²/2 − a(λ − b)² ] },   λ = largest eigenvalue of an (n+1)×(n+1) GOE matrix,
//! ```
//!
//! available in closed form for n = 1, 2, 3 ([`goe_expectation_closed`]) and,
//! independently, by nested adaptive quadrature of the ordered-eigenvalue
//! density ([`goe_expectation_quadrature`]). The GOE here has Var(Mᵢᵢ) = 1 and
//! Var(Mᵢⱼ) = 1/2, so the ordered eigenvalues λ₁ ≤ … ≤ λₙ have density
//! c_n⁻¹ ∏ e^{−λᵢ²/2} ∏_{i<j} |λᵢ − λⱼ|.

use std::cell::{Cell, RefCell};
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::quad::{Estimate, Quadrature};
use crate::special::{bivariate_normal_cdf, cdf, gamma_function, Cov2};

/// Largest ensemble size accepted by [`selberg_constant`].
pub const MAX_SELBERG_N: usize = 8;

/// Tolerance used by [`goe_expectation_boundary`].
pub const BOUNDARY_TOL: f64 = 1e-9;

const MAX_LEVEL_SUBDIVISIONS: usize = 400;

/// Parameters (n, a, b) of the expectation over a GOE of size n + 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoeQuery {
    n: usize,
    a: f64,
    b: f64,
}

impl GoeQuery {
    /// Requires n ∈ {1, 2, 3}, a > 0 and b finite.
    pub fn new(n: usize, a: f64, b: f64) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::domain(format!("GOE query requires n in 1..=3, got {n}")));
        }
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::domain(format!("GOE query requires a > 0, got a = {a}")));
        }
        if !b.is_finite() {
            return Err(Error::domain(format!("GOE query requires finite b, got b = {b}")));
        }
        Ok(GoeQuery { n, a, b })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// Normalization constant c_n = (1/n!)(2√2)ⁿ ∏ᵢ Γ(1 + i/2) of the ordered
/// GOE eigenvalue density, for 1 ≤ n ≤ 8.
pub fn selberg_constant(n: usize) -> Result<f64> {
    if !(1..=MAX_SELBERG_N).contains(&n) {
        return Err(Error::domain(format!(
            "selberg_constant requires 1 <= n <= {MAX_SELBERG_N}, got {n}"
        )));
    }
    let mut c = 1.0;
    for i in 1..=n {
        c *= 2.0 * SQRT_2 * gamma_function(1.0 + i as f64 / 2.0)? / i as f64;
    }
    Ok(c)
}

/// Joint density of the ordered eigenvalues of an n×n GOE matrix.
///
/// Returns 0 when `lambdas` is not sorted nondecreasingly.
pub fn goe_eigen_density(n: usize, lambdas: &[f64]) -> Result<f64> {
    if !(1..=4).contains(&n) {
        return Err(Error::domain(format!("goe_eigen_density requires n in 1..=4, got {n}")));
    }
    if lambdas.len() != n {
        return Err(Error::domain(format!(
            "goe_eigen_density expects {n} eigenvalues, got {}",
            lambdas.len()
        )));
    }
    if lambdas.iter().any(|l| !l.is_finite()) {
        return Err(Error::domain("eigenvalues must be finite"));
    }
    if lambdas.windows(2).any(|w| w[0] > w[1]) {
        return Ok(0.0);
    }
    let mut value = 1.0 / selberg_constant(n)?;
    for (i, &li) in lambdas.iter().enumerate() {
        value *= (-0.5 * li * li).exp();
        for &lj in &lambdas[i + 1..] {
            value *= lj - li;
        }
    }
    Ok(value)
}

/// Closed-form value of E_GOE^{n+1}{exp[λ²_{n+1}/2 − a(λ_{n+1} − b)²]}.
pub fn goe_expectation_closed(q: &GoeQuery) -> Result<f64> {
    let (a, b) = (q.a, q.b);
    let value = match q.n {
        1 => {
            (4.0 * a + 2.0).sqrt() / (4.0 * a) * (-a * b * b / (2.0 * a + 1.0)).exp()
                + b * PI.sqrt() / (2.0 * a).sqrt() * cdf(b * (2.0 * a).sqrt() / (2.0 * a + 1.0).sqrt())
        }
        2 => {
            (1.0 / a + 2.0 * b * b - 1.0) / (2.0 * a).sqrt()
                * cdf(b * (2.0 * a).sqrt() / (a + 1.0).sqrt())
                + b * (a + 1.0).sqrt() / ((2.0 * PI).sqrt() * a) * (-a * b * b / (a + 1.0)).exp()
                + SQRT_2 / (2.0 * a + 1.0).sqrt()
                    * (-a * b * b / (2.0 * a + 1.0)).exp()
                    * cdf(SQRT_2 * a * b / ((2.0 * a + 1.0) * (a + 1.0)).sqrt())
        }
        3 => {
            let b2 = b * b;
            let p = 2.0 * a + 1.0;
            let first = ((24.0 * a.powi(3) + 12.0 * a * a + 6.0 * a + 1.0) / (2.0 * a * p * p) * b2
                + (6.0 * a * a + 3.0 * a + 2.0) / (4.0 * a * a * p)
                + 1.5)
                / (2.0 * p).sqrt()
                * (-a * b2 / p).exp()
                * cdf(2.0 * SQRT_2 * a * b / (p * (2.0 * a + 3.0)).sqrt());
            let second = ((a + 1.0) / (2.0 * a) * b2 + (1.0 - a) / (2.0 * a * a) - 1.0)
                / (2.0 * (a + 1.0)).sqrt()
                * (-a * b2 / (a + 1.0)).exp()
                * cdf(SQRT_2 * a * b / ((a + 1.0) * (2.0 * a + 3.0)).sqrt());
            let third = (6.0 * a + 1.0 + (28.0 * a * a + 12.0 * a + 3.0) / (2.0 * a * p)) * b
                / (2.0 * (2.0 * PI).sqrt() * p * (2.0 * a + 3.0).sqrt())
                * (-3.0 * a * b2 / (2.0 * a + 3.0)).exp();
            let sigma1 = Cov2::new(1.5, -0.5, (1.0 + a) / (2.0 * a))?;
            let sigma2 = Cov2::new(1.5, -1.0, (1.0 + 2.0 * a) / (2.0 * a))?;
            let orthants = bivariate_normal_cdf(&sigma1, 0.0, b)? + bivariate_normal_cdf(&sigma2, 0.0, b)?;
            let fourth = (b2 + 3.0 * (1.0 - a) / (2.0 * a)) * PI.sqrt() * b / (2.0 * a).sqrt() * orthants;
            first + second + third + fourth
        }
        _ => unreachable!("GoeQuery guarantees n in 1..=3"),
    };
    Ok(value)
}

/// Which extreme eigenvalue carries the weight in a chamber integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Largest,
    Smallest,
}

/// Iterated integration over the ordered chamber of the eigenvalues that
/// are not pinned by the outer weight.
///
/// Every integrand is nonnegative, so relative errors of nested levels add.
struct Chamber {
    free: usize,
    extreme: Extreme,
    cutoff: f64,
    level: Quadrature,
    failure: RefCell<Option<Error>>,
    worst_rel_error: Cell<f64>,
}

impl Chamber {
    fn new(free: usize, extreme: Extreme, cutoff: f64, level_rel_tol: f64) -> Self {
        Chamber {
            free,
            extreme,
            cutoff,
            level: Quadrature::new(0.0, level_rel_tol).with_max_subdivisions(MAX_LEVEL_SUBDIVISIONS),
            failure: RefCell::new(None),
            worst_rel_error: Cell::new(0.0),
        }
    }

    /// Integral over the remaining free eigenvalues of their Gaussian weights
    /// times all pairwise gaps, with the eigenvalues in `fixed[..len]` held
    /// in place. For [`Extreme::Largest`] the free ones lie below
    /// `fixed[len - 1]`, otherwise above.
    fn inner(&self, fixed: &[f64; 5], len: usize, remaining: usize) -> f64 {
        if remaining == 0 {
            return 1.0;
        }
        let edge = fixed[len - 1];
        let (lo, hi) = match self.extreme {
            Extreme::Largest => (-self.cutoff, edge),
            Extreme::Smallest => (edge, self.cutoff),
        };
        if hi <= lo {
            return 0.0;
        }
        let integrand = |lambda: f64| {
            let mut gaps = 1.0;
            for &f in &fixed[..len] {
                gaps *= (f - lambda).abs();
            }
            if gaps == 0.0 {
                return 0.0;
            }
            let mut next = *fixed;
            next[len] = lambda;
            (-0.5 * lambda * lambda).exp() * gaps * self.inner(&next, len + 1, remaining - 1)
        };
        let est = self.level.integrate_best_effort(integrand, lo, hi);
        self.record(&est);
        est.value
    }

    fn record(&self, est: &Estimate) {
        let tol = self.level.rel_tol * est.value.abs();
        if est.error > tol && est.value != 0.0 {
            let mut failure = self.failure.borrow_mut();
            if failure.is_none() {
                *failure = Some(Error::Convergence {
                    estimate: est.error,
                    tolerance: tol,
                    evaluations: est.evaluations,
                });
            }
        }
        if est.value > 0.0 {
            let rel = est.error / est.value;
            if rel > self.worst_rel_error.get() {
                self.worst_rel_error.set(rel);
            }
        }
    }

    /// ∫ weight(t)·inner(position(t)) dt over the real line.
    fn integrate<W, P>(&self, weight: W, position: P) -> Result<Estimate>
    where
        W: Fn(f64) -> f64,
        P: Fn(f64) -> f64,
    {
        let outer = Quadrature::new(0.0, self.level.rel_tol).with_max_subdivisions(MAX_LEVEL_SUBDIVISIONS);
        let est = outer.integrate_best_effort(
            |t| {
                let w = weight(t);
                if w == 0.0 {
                    return 0.0;
                }
                let mut fixed = [0.0; 5];
                fixed[0] = position(t);
                w * self.inner(&fixed, 1, self.free)
            },
            f64::NEG_INFINITY,
            f64::INFINITY,
        );
        self.finish(est, outer.rel_tol)
    }

    /// The pinned eigenvalue held at `position` (no outer integration).
    fn evaluate_at(&self, position: f64) -> Result<Estimate> {
        let mut fixed = [0.0; 5];
        fixed[0] = position;
        let value = self.inner(&fixed, 1, self.free);
        self.finish(
            Estimate {
                value,
                error: 0.0,
                evaluations: 0,
            },
            self.level.rel_tol,
        )
    }

    fn finish(&self, est: Estimate, outer_rel_tol: f64) -> Result<Estimate> {
        if let Some(err) = self.failure.borrow_mut().take() {
            return Err(err);
        }
        let outer_rel = if est.value != 0.0 { est.error / est.value.abs() } else { 0.0 };
        if outer_rel > outer_rel_tol {
            return Err(Error::Convergence {
                estimate: est.error,
                tolerance: outer_rel_tol * est.value.abs(),
                evaluations: est.evaluations,
            });
        }
        let rel = outer_rel + self.free as f64 * self.worst_rel_error.get();
        Ok(Estimate {
            value: est.value,
            error: rel * est.value.abs(),
            evaluations: est.evaluations,
        })
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(1e-10..=1e-2).contains(&tol) {
        return Err(Error::domain(format!("quadrature tolerance must lie in [1e-10, 1e-2], got {tol}")));
    }
    Ok(())
}

fn per_level_tol(tol: f64, levels: usize) -> f64 {
    tol / (2.0 * levels as f64)
}

/// E_GOE^{n+1}{exp[λ²/2 − a(λ − b)²]} by direct quadrature of the ordered
/// eigenvalue density, with λ the largest eigenvalue.
///
/// Independent of the closed forms: it integrates the density over the
/// ordered chamber in n + 1 dimensions by iterated adaptive Gauss–Kronrod
/// quadrature. The free eigenvalues are truncated below at −(10 + |b|), where
/// the Gaussian factor is below e⁻⁵⁰. `tol` bounds the estimated relative
/// error.
pub fn goe_expectation_quadrature(q: &GoeQuery, tol: f64) -> Result<Estimate> {
    extreme_eigenvalue_expectation(q.n, Extreme::Largest, q.a, q.b, tol)
}

/// E_GOE^{n+1}{exp[μ²/2 − a(μ − center)²]} where μ is the largest or the
/// smallest eigenvalue, by the same quadrature as
/// [`goe_expectation_quadrature`].
pub fn extreme_eigenvalue_expectation(
    n: usize,
    extreme: Extreme,
    a: f64,
    center: f64,
    tol: f64,
) -> Result<Estimate> {
    GoeQuery::new(n, a, center)?;
    check_tol(tol)?;
    let chamber = Chamber::new(n, extreme, 10.0 + center.abs(), per_level_tol(tol, n + 1));
    let c = selberg_constant(n + 1)?;
    let est = chamber.integrate(|t| (-a * (t - center) * (t - center)).exp(), |t| t)?;
    Ok(scale(est, 1.0 / c))
}

/// spread^{−1/2}·E_GOE^{n+1}{exp[λ²/2 − (λ − center)²/spread]} for spread ≥ 0.
///
/// Uses the substitution λ = √spread·t + center, which removes the
/// spread^{−1/2} factor and leaves a finite limit at spread = 0, where the
/// largest eigenvalue is pinned at `center` and the t-integral contributes √π.
pub fn scaled_expectation_quadrature(n: usize, spread: f64, center: f64, tol: f64) -> Result<Estimate> {
    if !(1..=3).contains(&n) {
        return Err(Error::domain(format!("n must lie in 1..=3, got {n}")));
    }
    if !(spread >= 0.0) || !spread.is_finite() {
        return Err(Error::domain(format!("spread must be finite and >= 0, got {spread}")));
    }
    if !center.is_finite() {
        return Err(Error::domain(format!("center must be finite, got {center}")));
    }
    check_tol(tol)?;
    let c = selberg_constant(n + 1)?;
    let root = spread.sqrt();
    let cutoff = 10.0 + center.abs();
    if spread == 0.0 {
        let chamber = Chamber::new(n, Extreme::Largest, cutoff, per_level_tol(tol, n));
        let est = chamber.evaluate_at(center)?;
        return Ok(scale(est, PI.sqrt() / c));
    }
    let chamber = Chamber::new(n, Extreme::Largest, cutoff, per_level_tol(tol, n + 1));
    let est = chamber.integrate(|t| (-t * t).exp(), |t| root * t + center)?;
    Ok(scale(est, 1.0 / c))
}

/// (1 − κ²)^{−1/2}·E_GOE^{n+1}{exp[λ²/2 − (λ − κx/√2)²/(1 − κ²)]} for
/// κ ∈ (0, 1], finite and continuous up to κ = 1.
pub fn goe_expectation_boundary(n: usize, kappa_eff: f64, x: f64) -> Result<f64> {
    if !(kappa_eff > 0.0 && kappa_eff <= 1.0) {
        return Err(Error::domain(format!("kappa_eff must lie in (0, 1], got {kappa_eff}")));
    }
    if !x.is_finite() {
        return Err(Error::domain(format!("x must be finite, got {x}")));
    }
    let spread = (1.0 - kappa_eff * kappa_eff).max(0.0);
    Ok(scaled_expectation_quadrature(n, spread, kappa_eff * x / SQRT_2, BOUNDARY_TOL)?.value)
}

/// ∫ over the ordered chamber of ∏ e^{−λᵢ²/2} ∏_{i<j} |λᵢ − λⱼ| for an n×n
/// ensemble, by quadrature. Equals [`selberg_constant`]`(n)`.
pub fn selberg_integral_quadrature(n: usize, tol: f64) -> Result<Estimate> {
    if !(1..=4).contains(&n) {
        return Err(Error::domain(format!("n must lie in 1..=4, got {n}")));
    }
    check_tol(tol)?;
    let chamber = Chamber::new(n - 1, Extreme::Largest, 12.0, per_level_tol(tol, n));
    chamber.integrate(|t| (-0.5 * t * t).exp(), |t| t)
}

/// Total mass of [`goe_eigen_density`] over the ordered chamber, by quadrature.
pub fn goe_density_mass_quadrature(n: usize, tol: f64) -> Result<Estimate> {
    let est = selberg_integral_quadrature(n, tol)?;
    Ok(scale(est, 1.0 / selberg_constant(n)?))
}

fn scale(est: Estimate, factor: f64) -> Estimate {
    Estimate {
        value: est.value * factor,
        error: est.error * factor.abs(),
        evaluations: est.evaluations,
    }
}
