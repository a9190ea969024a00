//! Grid checks of the Monge condition.
//!
//! A cost is *submodular* (satisfies the Monge condition) when
//!
//! ```text
//! c(x', y') + c(x, y) ≤ c(x, y') + c(x', y)   for all x' ≥ x, y' ≥ y,
//! ```
//!
//! and *supermodular* when `−c` is submodular. Two independent checks are
//! provided:
//!
//! * [`check_cross_difference`] evaluates the cross difference on every
//!   cell of an `n × n` grid. Checking adjacent cells suffices: the cross
//!   difference of any grid rectangle is the sum of the cross differences of
//!   the cells it covers, so a uniform sign on cells carries over to every
//!   pair of grid points.
//! * [`check_mixed_partial`] samples `∂²c/∂x∂y` (analytic when the cost has
//!   one, finite differences otherwise). For twice continuously
//!   differentiable costs a nonpositive mixed partial is equivalent to
//!   submodularity.
//!
//! A report only speaks for the rectangle it was computed on.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::costs::CostFunction;
use crate::numfmt::ser_sig;
use crate::{Error, Result};

/// Default tolerance for cross differences.
pub const CROSS_TOL: f64 = 1e-9;
/// Default tolerance for mixed partials.
pub const PARTIAL_TOL: f64 = 1e-6;
/// Finite-difference step relative to the domain scale.
pub const PARTIAL_REL_STEP: f64 = 1e-4;
/// Opposite-sign violations on fewer than this fraction of cells are
/// reported as `indeterminate` instead of `neither`.
const INDETERMINATE_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Submodular,
    Supermodular,
    Modular,
    Neither,
    Indeterminate,
}

impl Classification {
    /// True when the coupling bounds apply.
    pub fn admits_bounds(self) -> bool {
        matches!(
            self,
            Classification::Submodular | Classification::Supermodular | Classification::Modular
        )
    }

    /// Classification of `−c` given that of `c`.
    pub fn flipped(self) -> Self {
        match self {
            Classification::Submodular => Classification::Supermodular,
            Classification::Supermodular => Classification::Submodular,
            other => other,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Submodular => "submodular",
            Classification::Supermodular => "supermodular",
            Classification::Modular => "modular",
            Classification::Neither => "neither",
            Classification::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Cross,
    Partial,
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let r = Self { x0, x1, y0, y1 };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.x0, self.x1, self.y0, self.y1]
            .iter()
            .all(|v| v.is_finite())
            && self.x0 < self.x1
            && self.y0 < self.y1;
        if !ok {
            return Err(Error::invalid(format!(
                "domain must be finite with x0 < x1 and y0 < y1, got {self:?}"
            )));
        }
        if self.x0 < 0.0 || self.y0 < 0.0 {
            return Err(Error::invalid(format!(
                "costs are defined on x, y >= 0; domain {self:?} leaves it"
            )));
        }
        Ok(())
    }

    fn scale(&self) -> f64 {
        (self.x1 - self.x0).max(self.y1 - self.y0)
    }

    fn x(&self, i: usize, n: usize) -> f64 {
        lerp(self.x0, self.x1, i, n)
    }

    fn y(&self, j: usize, n: usize) -> f64 {
        lerp(self.y0, self.y1, j, n)
    }
}

impl std::str::FromStr for Rect {
    type Err = Error;

    /// Parse `x0,x1,y0,y1`.
    fn from_str(s: &str) -> Result<Self> {
        let v = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::parse(s, e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        if v.len() != 4 {
            return Err(Error::parse(s, "expected x0,x1,y0,y1"));
        }
        Rect::new(v[0], v[1], v[2], v[3])
    }
}

fn lerp(a: f64, b: f64, i: usize, n: usize) -> f64 {
    if i + 1 == n {
        b
    } else {
        a + (b - a) * i as f64 / (n - 1) as f64
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MongeReport {
    pub classification: Classification,
    /// Largest excursion in the direction opposite to the classification
    /// (largest `|value|` for `modular`); zero when none occurs.
    #[serde(serialize_with = "ser_sig")]
    pub max_violation: f64,
    /// Number of grid samples beyond `tolerance` against the
    /// classification.
    pub violation_count: usize,
    pub domain: Rect,
    pub grid: usize,
    #[serde(serialize_with = "ser_sig")]
    pub tolerance: f64,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    pos: usize,
    neg: usize,
    max: f64,
    min: f64,
    samples: usize,
}

impl Tally {
    fn add(mut self, v: f64, tol: f64) -> Self {
        if v > tol {
            self.pos += 1;
        } else if v < -tol {
            self.neg += 1;
        }
        self.max = self.max.max(v);
        self.min = self.min.min(v);
        self.samples += 1;
        self
    }

    fn merge(self, o: Self) -> Self {
        Self {
            pos: self.pos + o.pos,
            neg: self.neg + o.neg,
            max: self.max.max(o.max),
            min: self.min.min(o.min),
            samples: self.samples + o.samples,
        }
    }

    fn classify(self) -> (Classification, f64, usize) {
        let max_pos = self.max.max(0.0);
        let max_neg = (-self.min).max(0.0);
        match (self.pos, self.neg) {
            (0, 0) => (Classification::Modular, max_pos.max(max_neg), 0),
            (0, _) => (Classification::Submodular, max_pos, 0),
            (_, 0) => (Classification::Supermodular, max_neg, 0),
            (p, n) => {
                let (minority, worst) = if p <= n { (p, max_pos) } else { (n, max_neg) };
                let c = if (minority as f64) < INDETERMINATE_FRACTION * self.samples as f64 {
                    Classification::Indeterminate
                } else {
                    Classification::Neither
                };
                (c, worst, minority)
            }
        }
    }
}

fn check_grid(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::invalid(format!(
            "grid needs n >= 3 points per axis, got {n}"
        )));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::invalid(format!(
            "tolerance must be finite and >= 0, got {tol}"
        )));
    }
    Ok(())
}

/// Classify `c` from the cross differences
/// `Δ = c(x', y') + c(x, y) − c(x, y') − c(x', y)` of all `(n − 1)²`
/// adjacent grid cells of `domain`.
///
/// `submodular` means every `Δ ≤ tol`, `supermodular` every `Δ ≥ −tol`,
/// `modular` every `|Δ| ≤ tol`.
pub fn check_cross_difference(
    c: &CostFunction,
    domain: Rect,
    n: usize,
    tol: f64,
) -> Result<MongeReport> {
    domain.validate()?;
    check_grid(n)?;
    check_tol(tol)?;

    let tally = (0..n - 1)
        .into_par_iter()
        .map(|i| {
            let (x, xp) = (domain.x(i, n), domain.x(i + 1, n));
            let mut t = Tally::default();
            let mut lo_x = c.eval(x, domain.y0);
            let mut lo_xp = c.eval(xp, domain.y0);
            for j in 0..n - 1 {
                let yp = domain.y(j + 1, n);
                let hi_x = c.eval(x, yp);
                let hi_xp = c.eval(xp, yp);
                let delta = hi_xp + lo_x - hi_x - lo_xp;
                t = t.add(delta, tol);
                lo_x = hi_x;
                lo_xp = hi_xp;
            }
            t
        })
        .reduce(Tally::default, Tally::merge);

    let (classification, max_violation, violation_count) = tally.classify();
    Ok(MongeReport {
        classification,
        max_violation,
        violation_count,
        domain,
        grid: n,
        tolerance: tol,
        method: Method::Cross,
    })
}

/// Classify `c` from the sign of `∂²c/∂x∂y` at the `n × n` grid points of
/// `domain`.
///
/// Uses the cost's analytic mixed partial if it has one. Otherwise the
/// partial is a difference quotient with step `h`: central where the
/// stencil fits inside `domain`, one-sided on the edges.
pub fn check_mixed_partial(
    c: &CostFunction,
    domain: Rect,
    n: usize,
    h: f64,
    tol: f64,
) -> Result<MongeReport> {
    domain.validate()?;
    check_grid(n)?;
    check_tol(tol)?;
    if !(h.is_finite() && h > 0.0) || 2.0 * h > (domain.x1 - domain.x0).min(domain.y1 - domain.y0) {
        return Err(Error::invalid(format!(
            "finite-difference step must be positive and fit the domain, got {h}"
        )));
    }

    let stencil = |v: f64, lo: f64, hi: f64| ((v - h).max(lo), (v + h).min(hi));

    let tally = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = domain.x(i, n);
            let (xa, xb) = stencil(x, domain.x0, domain.x1);
            let mut t = Tally::default();
            for j in 0..n {
                let y = domain.y(j, n);
                let d = c.mixed_partial(x, y).unwrap_or_else(|| {
                    let (ya, yb) = stencil(y, domain.y0, domain.y1);
                    (c.eval(xb, yb) - c.eval(xb, ya) - c.eval(xa, yb) + c.eval(xa, ya))
                        / ((xb - xa) * (yb - ya))
                });
                t = t.add(d, tol);
            }
            t
        })
        .reduce(Tally::default, Tally::merge);

    let (classification, max_violation, violation_count) = tally.classify();
    Ok(MongeReport {
        classification,
        max_violation,
        violation_count,
        domain,
        grid: n,
        tolerance: tol,
        method: Method::Partial,
    })
}

/// [`check_mixed_partial`] with the default step `1e−4 · scale` and
/// tolerance.
pub fn check_mixed_partial_default(
    c: &CostFunction,
    domain: Rect,
    n: usize,
) -> Result<MongeReport> {
    domain.validate()?;
    check_mixed_partial(c, domain, n, PARTIAL_REL_STEP * domain.scale(), PARTIAL_TOL)
}

/// Run the chosen check with its default tolerance.
pub fn check(c: &CostFunction, domain: Rect, n: usize, method: Method) -> Result<MongeReport> {
    match method {
        Method::Cross => check_cross_difference(c, domain, n, CROSS_TOL),
        Method::Partial => check_mixed_partial_default(c, domain, n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::{builtin, BUILTIN_NAMES};

    fn square(a: f64) -> Rect {
        Rect::new(0.0, a, 0.0, a).unwrap()
    }

    #[test]
    fn sinr_is_submodular() {
        let c = builtin("sinr", &[]).unwrap();
        let r = check_cross_difference(&c, square(5.0), 64, 1e-12).unwrap();
        assert_eq!(r.classification, Classification::Submodular);
        assert_eq!(r.violation_count, 0);
    }

    #[test]
    fn prop_fair_is_supermodular() {
        let c = builtin("prop_fair", &[]).unwrap();
        let r = check_cross_difference(&c, square(5.0), 64, CROSS_TOL).unwrap();
        assert_eq!(r.classification, Classification::Supermodular);
    }

    #[test]
    fn additive_is_modular() {
        let c = builtin("additive", &[]).unwrap();
        for d in [square(1.0), Rect::new(2.0, 30.0, 0.5, 9.0).unwrap()] {
            let r = check_cross_difference(&c, d, 17, CROSS_TOL).unwrap();
            assert_eq!(r.classification, Classification::Modular);
        }
    }

    #[test]
    fn mixed_partial_examples() {
        let mac = builtin("mac_rate1", &[("s", 1.0)]).unwrap();
        let r = check_mixed_partial_default(&mac, square(10.0), 64).unwrap();
        assert_eq!(r.classification, Classification::Submodular);
        let prod = builtin("product", &[]).unwrap();
        let r = check_mixed_partial_default(&prod, square(10.0), 64).unwrap();
        assert_eq!(r.classification, Classification::Supermodular);
        let sum = builtin("sum_rate", &[]).unwrap();
        let r = check_mixed_partial_default(&sum, square(10.0), 64).unwrap();
        assert_eq!(r.classification, Classification::Submodular);
        // finite-difference path for the same function
        let sum_fd = CostFunction::new("sum_rate_fd", |x, y| (x + y).ln_1p() / 2f64.ln());
        let r = check_mixed_partial_default(&sum_fd, square(10.0), 64).unwrap();
        assert_eq!(r.classification, Classification::Submodular);
    }

    #[test]
    fn both_methods_agree_on_builtins() {
        for name in BUILTIN_NAMES {
            let c = builtin(name, &[]).unwrap();
            let a = check_cross_difference(&c, square(10.0), 64, CROSS_TOL).unwrap();
            let b = check_mixed_partial_default(&c, square(10.0), 64).unwrap();
            assert_eq!(a.classification, b.classification, "{name}");
        }
    }

    #[test]
    fn negation_flips_and_scaling_preserves() {
        for name in BUILTIN_NAMES {
            let c = builtin(name, &[]).unwrap();
            let base = check_cross_difference(&c, square(10.0), 32, CROSS_TOL).unwrap();
            let neg = check_cross_difference(&c.negated(), square(10.0), 32, CROSS_TOL).unwrap();
            assert_eq!(neg.classification, base.classification.flipped(), "{name}");
            let scaled =
                check_cross_difference(&c.scaled(7.5), square(10.0), 32, CROSS_TOL).unwrap();
            assert_eq!(scaled.classification, base.classification, "{name}");
        }
    }

    #[test]
    fn saddle_is_neither() {
        // ∂²c/∂x∂y = 2(x − 5): negative left of x = 5, positive right
        let c = CostFunction::new("saddle", |x, y| (x - 5.0).powi(2) * y);
        let r = check_cross_difference(&c, square(10.0), 64, CROSS_TOL).unwrap();
        assert_eq!(r.classification, Classification::Neither);
        assert!(r.violation_count > 0 && r.max_violation > 0.0);
        let r = check_mixed_partial_default(&c, square(10.0), 64).unwrap();
        assert_eq!(r.classification, Classification::Neither);
    }

    #[test]
    fn isolated_opposite_sign_is_indeterminate() {
        // submodular everywhere except a sliver near x = 9.99
        let c = CostFunction::new("sliver", |x: f64, y: f64| {
            -x * y
                + if x > 9.999 {
                    50.0 * (x - 9.999) * y
                } else {
                    0.0
                }
        });
        let r = check_cross_difference(&c, square(10.0), 2000, CROSS_TOL).unwrap();
        assert_eq!(r.classification, Classification::Indeterminate);
    }

    #[test]
    fn report_is_partition_independent() {
        let c = builtin("mac_rate1", &[("s", 0.1)]).unwrap();
        let a = check_cross_difference(&c, square(10.0), 64, CROSS_TOL).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| check_cross_difference(&c, square(10.0), 64, CROSS_TOL).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_domain_and_grid() {
        let c = builtin("sinr", &[]).unwrap();
        assert!(Rect::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(Rect::new(-1.0, 1.0, 0.0, 1.0).is_err());
        assert!(check_cross_difference(&c, square(1.0), 2, CROSS_TOL).is_err());
        assert!(check_mixed_partial(&c, square(1.0), 8, 0.0, PARTIAL_TOL).is_err());
        assert!(check_mixed_partial(&c, square(1.0), 8, 0.6, PARTIAL_TOL).is_err());
        assert!("0,1,0".parse::<Rect>().is_err());
        assert_eq!("0,5,0,5".parse::<Rect>().unwrap(), square(5.0));
    }
}
