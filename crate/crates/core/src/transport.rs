//! Expectations of `c(X, Y)` under the extreme couplings and the resulting
//! sharp bounds.
//!
//! For a submodular cost, every joint law with marginals `F_X`, `F_Y`
//! satisfies
//!
//! ```text
//! ∫₀¹ c(F_X⁻¹(u), F_Y⁻¹(u)) du  ≤  E[c(X, Y)]  ≤  ∫₀¹ c(F_X⁻¹(u), F_Y⁻¹(1 − u)) du.
//! ```
//!
//! For a supermodular cost the inequalities hold for `−c`; negating back
//! makes the countermonotonic value the lower bound and the comonotonic
//! value the upper bound.
//!
//! The integrals are taken over `[ε, 1 − ε]` because quantiles of unbounded
//! laws diverge at 1. The dropped tails are estimated as
//! `2ε (|g(ε)| + |g(1 − ε)|)` for the integrand `g`, which covers the
//! `ε log(1/ε)` growth of exponential-type tails, and the estimate is added
//! to the reported error.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::costs::CostFunction;
use crate::marginals::Marginal;
use crate::monge::{self, Classification, MongeReport, Rect};
use crate::numfmt::{ser_sig, ser_sig_opt};
use crate::quadrature::try_integrate;
use crate::{Error, Result};

/// Probability mass left out of each side of the working domain used to
/// classify costs before computing bounds.
pub const DOMAIN_TAIL: f64 = 1e-3;
/// Grid size of the classification run by [`bounds_sweep`].
pub const SWEEP_GRID: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Width ε of the probability tails cut from `(0, 1)`.
    pub truncation: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            truncation: 1e-9,
            max_subdivisions: 100_000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.truncation > 0.0 && self.truncation < 1e-3) {
            return Err(Error::invalid(format!(
                "truncation must lie in (0, 1e-3), got {}",
                self.truncation
            )));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) || self.max_subdivisions == 0 {
            return Err(Error::invalid(
                "quadrature tolerances must be positive and max_subdivisions nonzero",
            ));
        }
        Ok(())
    }
}

/// One integral with its error budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expectation {
    pub value: f64,
    /// Quadrature error estimate on `[ε, 1 − ε]`.
    pub quad_error: f64,
    /// Estimated contribution of the cut tails.
    pub truncation_bound: f64,
}

impl Expectation {
    /// Quadrature error plus truncation bound.
    pub fn error(&self) -> f64 {
        self.quad_error + self.truncation_bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsResult {
    #[serde(serialize_with = "ser_sig")]
    pub lower: f64,
    #[serde(serialize_with = "ser_sig")]
    pub upper: f64,
    #[serde(
        serialize_with = "ser_sig_opt",
        skip_serializing_if = "Option::is_none",
        default
    )]
    pub independent: Option<f64>,
    #[serde(serialize_with = "ser_sig")]
    pub lower_err: f64,
    #[serde(serialize_with = "ser_sig")]
    pub upper_err: f64,
    #[serde(
        serialize_with = "ser_sig_opt",
        skip_serializing_if = "Option::is_none",
        default
    )]
    pub independent_err: Option<f64>,
    #[serde(serialize_with = "ser_sig")]
    pub truncation_bound: f64,
    pub classification_used: Classification,
}

fn check_support(fx: &Marginal, fy: &Marginal) -> Result<()> {
    if fx.support().0 < 0.0 || fy.support().0 < 0.0 {
        return Err(Error::invalid(format!(
            "costs are defined on x, y >= 0 but the marginals are {fx} and {fy}"
        )));
    }
    Ok(())
}

fn coupled(
    c: &CostFunction,
    fx: &Marginal,
    fy: &Marginal,
    cfg: &QuadratureConfig,
    counter: bool,
) -> Result<Expectation> {
    cfg.validate()?;
    check_support(fx, fy)?;
    let g = |u: f64| -> Result<f64> {
        let x = fx.quantile(u)?;
        let y = fy.quantile(if counter { 1.0 - u } else { u })?;
        Ok(c.eval(x, y))
    };
    let eps = cfg.truncation;
    let q = try_integrate(
        g,
        eps,
        1.0 - eps,
        cfg.rel_tol,
        cfg.abs_tol,
        cfg.max_subdivisions,
    )?;
    let truncation_bound = 2.0 * eps * (g(eps)?.abs() + g(1.0 - eps)?.abs());
    Ok(Expectation {
        value: q.value,
        quad_error: q.error,
        truncation_bound,
    })
}

/// `∫ c(F_X⁻¹(u), F_Y⁻¹(u)) du`.
pub fn comonotonic_expectation(
    c: &CostFunction,
    fx: &Marginal,
    fy: &Marginal,
    cfg: &QuadratureConfig,
) -> Result<Expectation> {
    coupled(c, fx, fy, cfg, false)
}

/// `∫ c(F_X⁻¹(u), F_Y⁻¹(1 − u)) du`.
pub fn countermonotonic_expectation(
    c: &CostFunction,
    fx: &Marginal,
    fy: &Marginal,
    cfg: &QuadratureConfig,
) -> Result<Expectation> {
    coupled(c, fx, fy, cfg, true)
}

/// `∫∫ c(F_X⁻¹(u), F_Y⁻¹(v)) du dv` by iterated adaptive quadrature, outer
/// in `u` and inner in `v`.
pub fn independent_expectation(
    c: &CostFunction,
    fx: &Marginal,
    fy: &Marginal,
    cfg: &QuadratureConfig,
) -> Result<Expectation> {
    cfg.validate()?;
    check_support(fx, fy)?;
    let eps = cfg.truncation;
    let (a, b) = (eps, 1.0 - eps);

    // inner panels land on the same dyadic nodes for most u
    let mut qy_cache: HashMap<u64, f64> = HashMap::new();
    let mut qy = |v: f64| -> Result<f64> {
        if let Some(&y) = qy_cache.get(&v.to_bits()) {
            return Ok(y);
        }
        let y = fy.quantile(v)?;
        qy_cache.insert(v.to_bits(), y);
        Ok(y)
    };

    let mut max_inner_err: f64 = 0.0;
    let mut inner = |x: f64, qy: &mut dyn FnMut(f64) -> Result<f64>| -> Result<f64> {
        let q = try_integrate(
            |v| Ok(c.eval(x, qy(v)?)),
            a,
            b,
            cfg.rel_tol,
            cfg.abs_tol,
            cfg.max_subdivisions,
        )?;
        max_inner_err = max_inner_err.max(q.error);
        Ok(q.value)
    };

    let outer = try_integrate(
        |u| {
            let x = fx.quantile(u)?;
            inner(x, &mut qy)
        },
        a,
        b,
        cfg.rel_tol,
        cfg.abs_tol,
        cfg.max_subdivisions,
    )?;
    let quad_error = outer.error + max_inner_err * (b - a);

    // tails: the four strips of width ε around the square
    let edge = |g: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        Ok(try_integrate(
            |t| Ok(g(t)?.abs()),
            a,
            b,
            cfg.rel_tol.max(1e-6),
            cfg.abs_tol,
            cfg.max_subdivisions,
        )?
        .value)
    };
    let (xa, xb) = (fx.quantile(a)?, fx.quantile(b)?);
    let (ya, yb) = (fy.quantile(a)?, fy.quantile(b)?);
    let strips = edge(&|v| Ok(c.eval(xa, fy.quantile(v)?)))?
        + edge(&|v| Ok(c.eval(xb, fy.quantile(v)?)))?
        + edge(&|u| Ok(c.eval(fx.quantile(u)?, ya)))?
        + edge(&|u| Ok(c.eval(fx.quantile(u)?, yb)))?;

    Ok(Expectation {
        value: outer.value,
        quad_error,
        truncation_bound: 2.0 * eps * strips,
    })
}

fn assemble(
    co: Expectation,
    counter: Expectation,
    classification: Classification,
) -> Result<BoundsResult> {
    let (lo, hi) = match classification {
        Classification::Submodular => (co, counter),
        // −UB(−c) ≤ E[c] ≤ −LB(−c)
        Classification::Supermodular => (counter, co),
        Classification::Modular => (co, co),
        other => return Err(Error::Inapplicable(other)),
    };
    Ok(BoundsResult {
        lower: lo.value,
        upper: hi.value,
        independent: None,
        lower_err: lo.error(),
        upper_err: hi.error(),
        independent_err: None,
        truncation_bound: lo.truncation_bound.max(hi.truncation_bound),
        classification_used: classification,
    })
}

/// Sharp lower and upper bounds on `E[c(X, Y)]` over all couplings of
/// `fx` and `fy`, given the modularity `report` for `c`.
///
/// Refuses with [`Error::Inapplicable`] when the report is `neither` or
/// `indeterminate`.
pub fn bounds(
    c: &CostFunction,
    fx: &Marginal,
    fy: &Marginal,
    cfg: &QuadratureConfig,
    report: &MongeReport,
) -> Result<BoundsResult> {
    let class = report.classification;
    if !class.admits_bounds() {
        return Err(Error::Inapplicable(class));
    }
    let co = comonotonic_expectation(c, fx, fy, cfg)?;
    let counter = if class == Classification::Modular {
        co
    } else {
        countermonotonic_expectation(c, fx, fy, cfg)?
    };
    assemble(co, counter, class)
}

/// [`bounds`] plus the independent-coupling baseline.
pub fn bounds_with_independent(
    c: &CostFunction,
    fx: &Marginal,
    fy: &Marginal,
    cfg: &QuadratureConfig,
    report: &MongeReport,
) -> Result<BoundsResult> {
    let mut r = bounds(c, fx, fy, cfg, report)?;
    let ind = independent_expectation(c, fx, fy, cfg)?;
    r.independent = Some(ind.value);
    r.independent_err = Some(ind.error());
    Ok(r)
}

/// Rectangle holding all but `DOMAIN_TAIL` of the mass of each marginal at
/// the upper end, starting from the lower end of the supports.
pub fn working_domain(fx: &Marginal, fy: &Marginal) -> Result<Rect> {
    check_support(fx, fy)?;
    let side = |d: &Marginal| -> Result<(f64, f64)> {
        let (lo, hi) = d.support();
        let top = if hi.is_finite() {
            hi
        } else {
            d.quantile(1.0 - DOMAIN_TAIL)?
        };
        Ok((lo, top))
    };
    let (x0, x1) = side(fx)?;
    let (y0, y1) = side(fy)?;
    Rect::new(x0, x1, y0, y1)
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(serialize_with = "ser_sig")]
    pub param: f64,
    #[serde(serialize_with = "ser_sig")]
    pub lower: f64,
    #[serde(serialize_with = "ser_sig")]
    pub upper: f64,
    #[serde(serialize_with = "ser_sig")]
    pub independent: f64,
    #[serde(serialize_with = "ser_sig")]
    pub lower_err: f64,
    #[serde(serialize_with = "ser_sig")]
    pub upper_err: f64,
}

/// Bounds and independent baseline for each cost `family(p)`, `p` in
/// `params`, with marginals fixed.
///
/// Each instance is classified by cross differences on `domain` first; rows
/// come back in the order of `params`.
pub fn bounds_sweep<F>(
    family: F,
    params: &[f64],
    fx: &Marginal,
    fy: &Marginal,
    cfg: &QuadratureConfig,
    domain: Rect,
) -> Result<Vec<SweepRow>>
where
    F: Fn(f64) -> Result<CostFunction> + Sync,
{
    params
        .par_iter()
        .map(|&p| {
            let c = family(p)?;
            let report = monge::check_cross_difference(&c, domain, SWEEP_GRID, monge::CROSS_TOL)?;
            let r = bounds_with_independent(&c, fx, fy, cfg, &report)?;
            Ok(SweepRow {
                param: p,
                lower: r.lower,
                upper: r.upper,
                independent: r.independent.unwrap_or(f64::NAN),
                lower_err: r.lower_err,
                upper_err: r.upper_err,
            })
        })
        .collect()
}
