//! Parametric univariate laws used as the fixed marginals of a coupling.
//!
//! Every family exposes its CDF, survival function, quantile (generalized
//! inverse CDF), density, mean and variance. Quantiles are closed-form where
//! one exists and otherwise found by a bracketed Newton iteration with a
//! bisection fallback.
//!
//! The channel-power parameterizations follow the usual fading conventions:
//!
//! | Family | Spec string | Parameters |
//! |--------|-------------|------------|
//! | Exponential | `exp:λ` | rate λ > 0 |
//! | Uniform | `unif:a,b` | a < b |
//! | Rayleigh | `rayleigh:σ` | scale σ > 0 |
//! | Nakagami-m | `nakagami:m,Ω` | shape m ≥ 0.5, spread Ω = E[R²] > 0 |
//! | Log-normal | `lognormal:μ,σ` | location μ, scale σ > 0 |
//! | Rician | `rician:K,Ω` | K-factor K ≥ 0, spread Ω = E[R²] > 0 |
//!
//! The Rician law is the envelope `R` with line-of-sight to scatter power
//! ratio `K` and mean power `Ω`; `K = 0` is Rayleigh with `σ² = Ω/2`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::quadrature;
use crate::sampler::RandomStream;
use crate::{Error, Result};

/// Poisson weights below this end the Rician mixture series.
const RICIAN_SERIES_CUTOFF: f64 = 1e-15;
/// Upper bound accepted for the Rician K-factor.
const RICIAN_MAX_K: f64 = 1e4;

/// The parameter set of one family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Exponential { rate: f64 },
    Uniform { low: f64, high: f64 },
    Rayleigh { scale: f64 },
    Nakagami { shape: f64, spread: f64 },
    LogNormal { location: f64, scale: f64 },
    Rician { k_factor: f64, spread: f64 },
}

/// A validated marginal distribution.
///
/// Build one through the named constructors or by parsing a spec string such
/// as `"nakagami:2,1"`; both reject invalid parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marginal(Family);

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(format!(
            "{name} must be finite and > 0, got {v}"
        )))
    }
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(format!("{name} must be finite, got {v}")))
    }
}

impl Marginal {
    pub fn exponential(rate: f64) -> Result<Self> {
        Ok(Self(Family::Exponential {
            rate: positive("exponential rate", rate)?,
        }))
    }

    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        let (low, high) = (finite("uniform low", low)?, finite("uniform high", high)?);
        if low >= high {
            return Err(Error::invalid(format!(
                "uniform bounds must satisfy a < b, got [{low}, {high}]"
            )));
        }
        Ok(Self(Family::Uniform { low, high }))
    }

    pub fn rayleigh(scale: f64) -> Result<Self> {
        Ok(Self(Family::Rayleigh {
            scale: positive("rayleigh scale", scale)?,
        }))
    }

    pub fn nakagami(shape: f64, spread: f64) -> Result<Self> {
        if !(shape.is_finite() && shape >= 0.5) {
            return Err(Error::invalid(format!(
                "nakagami shape must be >= 0.5, got {shape}"
            )));
        }
        Ok(Self(Family::Nakagami {
            shape,
            spread: positive("nakagami spread", spread)?,
        }))
    }

    pub fn lognormal(location: f64, scale: f64) -> Result<Self> {
        Ok(Self(Family::LogNormal {
            location: finite("lognormal location", location)?,
            scale: positive("lognormal scale", scale)?,
        }))
    }

    pub fn rician(k_factor: f64, spread: f64) -> Result<Self> {
        if !(k_factor.is_finite() && (0.0..=RICIAN_MAX_K).contains(&k_factor)) {
            return Err(Error::invalid(format!(
                "rician K-factor must lie in [0, {RICIAN_MAX_K}], got {k_factor}"
            )));
        }
        Ok(Self(Family::Rician {
            k_factor,
            spread: positive("rician spread", spread)?,
        }))
    }

    pub fn family(&self) -> &Family {
        &self.0
    }

    /// Closed support `[lower, upper]`; `upper` may be infinite.
    pub fn support(&self) -> (f64, f64) {
        match self.0 {
            Family::Uniform { low, high } => (low, high),
            _ => (0.0, f64::INFINITY),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        match self.0 {
            Family::Exponential { rate } => -(-rate * x).exp_m1(),
            Family::Uniform { low, high } => (x - low) / (high - low),
            Family::Rayleigh { scale } => -(-0.5 * (x / scale).powi(2)).exp_m1(),
            Family::Nakagami { shape, spread } => gamma_lr(shape, shape * x * x / spread),
            Family::LogNormal { location, scale } => {
                0.5 * erfc(-(x.ln() - location) / (scale * SQRT_2))
            }
            Family::Rician { k_factor, spread } => rician_series(k_factor, spread, x).0,
        }
    }

    /// Survival function `1 - cdf(x)`, computed without cancellation in the
    /// upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 1.0;
        }
        if x >= hi {
            return 0.0;
        }
        match self.0 {
            Family::Exponential { rate } => (-rate * x).exp(),
            Family::Uniform { low, high } => (high - x) / (high - low),
            Family::Rayleigh { scale } => (-0.5 * (x / scale).powi(2)).exp(),
            Family::Nakagami { shape, spread } => gamma_ur(shape, shape * x * x / spread),
            Family::LogNormal { location, scale } => {
                0.5 * erfc((x.ln() - location) / (scale * SQRT_2))
            }
            Family::Rician { k_factor, spread } => rician_series(k_factor, spread, x).1,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        match self.0 {
            Family::Exponential { rate } => rate * (-rate * x).exp(),
            Family::Uniform { low, high } => 1.0 / (high - low),
            Family::Rayleigh { scale } => {
                let s2 = scale * scale;
                x / s2 * (-0.5 * x * x / s2).exp()
            }
            Family::Nakagami { shape, spread } => {
                if x == 0.0 {
                    return if shape == 0.5 {
                        (2.0 / (PI * spread)).sqrt()
                    } else {
                        0.0
                    };
                }
                let ln = std::f64::consts::LN_2 + shape * (shape / spread).ln() - ln_gamma(shape)
                    + (2.0 * shape - 1.0) * x.ln()
                    - shape * x * x / spread;
                ln.exp()
            }
            Family::LogNormal { location, scale } => {
                if x == 0.0 {
                    return 0.0;
                }
                let z = (x.ln() - location) / scale;
                (-0.5 * z * z).exp() / (x * scale * (2.0 * PI).sqrt())
            }
            Family::Rician { k_factor, spread } => rician_pdf(k_factor, spread, x),
        }
    }

    /// Generalized inverse `inf { x : cdf(x) ≥ u }` for `u` strictly inside
    /// `(0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::ProbabilityDomain(u));
        }
        // Lower-tail inputs use u, upper-tail inputs use 1 - u so that both
        // tails keep full relative precision.
        let upper = u > 0.5;
        let tail = if upper { 1.0 - u } else { u };
        let x = match self.0 {
            Family::Exponential { rate } => -(-u).ln_1p() / rate,
            Family::Uniform { low, high } => low + u * (high - low),
            Family::Rayleigh { scale } => scale * (-2.0 * (-u).ln_1p()).sqrt(),
            Family::LogNormal { location, scale } => {
                let z = if upper {
                    SQRT_2 * erfc_inv(2.0 * tail)
                } else {
                    -SQRT_2 * erfc_inv(2.0 * tail)
                };
                (location + scale * z).exp()
            }
            Family::Nakagami { spread, .. } | Family::Rician { spread, .. } => {
                self.invert(u, spread.sqrt())
            }
        };
        Ok(x)
    }

    /// Solve `cdf(x) = u` on `[0, ∞)` by safeguarded Newton steps.
    fn invert(&self, u: f64, guess: f64) -> f64 {
        let upper = u > 0.5;
        let target = if upper { 1.0 - u } else { u };
        // residual is increasing in x in both branches
        let residual = |x: f64| {
            if upper {
                target - self.sf(x)
            } else {
                self.cdf(x) - target
            }
        };
        let tol = 1e-13 * target;

        let mut lo = 0.0;
        let mut hi = guess.max(f64::MIN_POSITIVE);
        while residual(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let r = residual(x);
            if r.abs() <= tol {
                return x;
            }
            if r < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
            let d = self.pdf(x);
            let newton = x - r / d;
            x = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        x
    }

    pub fn mean(&self) -> f64 {
        match self.0 {
            Family::Exponential { rate } => 1.0 / rate,
            Family::Uniform { low, high } => 0.5 * (low + high),
            Family::Rayleigh { scale } => scale * (PI / 2.0).sqrt(),
            Family::Nakagami { shape, spread } => {
                (ln_gamma(shape + 0.5) - ln_gamma(shape)).exp() * (spread / shape).sqrt()
            }
            Family::LogNormal { location, scale } => (location + 0.5 * scale * scale).exp(),
            Family::Rician { .. } => self.mean_by_quadrature(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self.0 {
            Family::Exponential { rate } => 1.0 / (rate * rate),
            Family::Uniform { low, high } => (high - low).powi(2) / 12.0,
            Family::Rayleigh { scale } => (4.0 - PI) / 2.0 * scale * scale,
            Family::Nakagami { spread, .. } | Family::Rician { spread, .. } => {
                spread - self.mean().powi(2)
            }
            Family::LogNormal { location, scale } => {
                let s2 = scale * scale;
                s2.exp_m1() * (2.0 * location + s2).exp()
            }
        }
    }

    /// `E[R] = ∫₀^∞ sf(r) dr` integrated up to where the tail is negligible.
    fn mean_by_quadrature(&self) -> f64 {
        let mut end = self.quantile(0.5).unwrap_or(1.0).max(1e-300);
        while self.sf(end) > 1e-17 {
            end *= 1.5;
        }
        quadrature::integrate(|r| self.sf(r), 0.0, end, 1e-13, 1e-15, 10_000)
            .map(|q| q.value)
            .unwrap_or(f64::NAN)
    }

    /// `n` i.i.d. draws by inverse transform of open-interval uniforms.
    pub fn sample(&self, stream: &mut RandomStream, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u = stream.uniform_open();
                self.quantile(u).expect("open uniform lies in (0, 1)")
            })
            .collect()
    }
}

/// Poisson(λ) probability mass at `k`, evaluated in log space.
fn poisson_weight(lambda: f64, k: usize) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let k = k as f64;
    (-lambda + k * lambda.ln() - ln_gamma(k + 1.0)).exp()
}

/// Rician `(cdf, sf)` at `r`.
///
/// `(R/σ)²` is noncentral χ² with two degrees of freedom and noncentrality
/// `2K`, i.e. a Poisson(K) mixture of Gamma(k + 1, 2) laws, so the CDF is
/// `Σ_k Pois(k; K) P(k + 1, r² / 2σ²)` with `P` the regularized lower
/// incomplete gamma function. This equals `1 - Q₁(ν/σ, r/σ)`.
fn rician_series(k_factor: f64, spread: f64, r: f64) -> (f64, f64) {
    let sigma2 = spread / (2.0 * (k_factor + 1.0));
    let w = r * r / (2.0 * sigma2);
    let max_terms = (k_factor + 40.0 * k_factor.sqrt() + 200.0) as usize;
    let (mut cdf, mut sf) = (0.0, 0.0);
    for k in 0..max_terms {
        let p = poisson_weight(k_factor, k);
        let a = k as f64 + 1.0;
        cdf += p * gamma_lr(a, w);
        sf += p * gamma_ur(a, w);
        if (k as f64) > k_factor && p < RICIAN_SERIES_CUTOFF {
            break;
        }
    }
    (cdf.clamp(0.0, 1.0), sf.clamp(0.0, 1.0))
}

/// Rician density `(r/σ²) Σ_k Pois(k; K) Pois(k; r²/2σ²)`, the same mixture
/// as [`rician_series`] differentiated term by term.
fn rician_pdf(k_factor: f64, spread: f64, r: f64) -> f64 {
    let sigma2 = spread / (2.0 * (k_factor + 1.0));
    let w = r * r / (2.0 * sigma2);
    let max_terms = (k_factor + w + 40.0 * (k_factor + w).sqrt() + 200.0) as usize;
    let mut sum = 0.0;
    for k in 0..max_terms {
        let p = poisson_weight(k_factor, k);
        sum += p * poisson_weight(w, k);
        if (k as f64) > k_factor && (k as f64) > w && p < RICIAN_SERIES_CUTOFF {
            break;
        }
    }
    r / sigma2 * sum
}

impl fmt::Display for Marginal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Family::Exponential { rate } => write!(f, "exp:{rate}"),
            Family::Uniform { low, high } => write!(f, "unif:{low},{high}"),
            Family::Rayleigh { scale } => write!(f, "rayleigh:{scale}"),
            Family::Nakagami { shape, spread } => write!(f, "nakagami:{shape},{spread}"),
            Family::LogNormal { location, scale } => write!(f, "lognormal:{location},{scale}"),
            Family::Rician { k_factor, spread } => write!(f, "rician:{k_factor},{spread}"),
        }
    }
}

impl FromStr for Marginal {
    type Err = Error;

    /// Parse `family:p1[,p2]`, family names case-insensitive.
    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(s, "expected `family:param[,param]`"))?;
        let params = rest
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::parse(s, format!("parameter `{p}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let want = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::parse(
                    s,
                    format!("expected {n} parameter(s), got {}", params.len()),
                ))
            }
        };
        match name.trim().to_ascii_lowercase().as_str() {
            "exp" | "exponential" => {
                want(1)?;
                Marginal::exponential(params[0])
            }
            "unif" | "uniform" => {
                want(2)?;
                Marginal::uniform(params[0], params[1])
            }
            "rayleigh" => {
                want(1)?;
                Marginal::rayleigh(params[0])
            }
            "nakagami" => {
                want(2)?;
                Marginal::nakagami(params[0], params[1])
            }
            "lognormal" | "lognorm" => {
                want(2)?;
                Marginal::lognormal(params[0], params[1])
            }
            "rician" | "rice" | "ricean" => {
                want(2)?;
                Marginal::rician(params[0], params[1])
            }
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }
}
