//! Two users, two resource blocks, collision on a shared choice.
//!
//! User `i` picks block one with probability `p_i` (`M_i = 0`) and block two
//! otherwise (`M_i = 1`). A transmission succeeds when the users pick
//! different blocks. With the marginals fixed, the joint law is determined
//! by the single number `p11 = P(M₁ = 1, M₂ = 1)`:
//!
//! ```text
//! p10 = 1 − p1 − p11,   p01 = 1 − p2 − p11,   p00 = p1 + p2 + p11 − 1
//! U   = p01 + p10 = 2 − p1 − p2 − 2·p11
//! ρ   = (p11 − (1 − p1)(1 − p2)) / √(p1(1 − p1) p2(1 − p2))
//! ```
//!
//! `p11` ranges over the Fréchet interval
//! `[max(0, 1 − p1 − p2), min(1 − p1, 1 − p2)]`; `U` falls and `ρ` rises
//! along it.

use serde::{Deserialize, Serialize};

use crate::numfmt::{ser_sig, ser_sig_pair, ser_sig_pair_opt};
use crate::{Error, Result};

/// Slack allowed when checking `p11` against the Fréchet interval.
const RANGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionSpec {
    p1: f64,
    p2: f64,
}

impl CollisionSpec {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        for (name, p) in [("p1", p1), ("p2", p2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        Ok(Self { p1, p2 })
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    /// True when either user is deterministic, making ρ undefined.
    pub fn is_degenerate(&self) -> bool {
        [self.p1, self.p2].iter().any(|&p| p == 0.0 || p == 1.0)
    }

    /// Fréchet interval of `p11`.
    pub fn p11_range(&self) -> [f64; 2] {
        let (q1, q2) = (1.0 - self.p1, 1.0 - self.p2);
        [(q1 + q2 - 1.0).max(0.0), q1.min(q2)]
    }

    /// `p11` of independent access, `(1 − p1)(1 − p2)`.
    pub fn p11_independent(&self) -> f64 {
        (1.0 - self.p1) * (1.0 - self.p2)
    }

    fn check_p11(&self, p11: f64) -> Result<()> {
        let [lo, hi] = self.p11_range();
        if !(p11 >= lo - RANGE_SLACK && p11 <= hi + RANGE_SLACK) {
            return Err(Error::invalid(format!(
                "p11 = {p11} is outside the feasible range [{lo}, {hi}]"
            )));
        }
        Ok(())
    }
}

/// Success probability `p1(1 − p2) + (1 − p1)p2` of independent access.
pub fn success_independent(spec: &CollisionSpec) -> f64 {
    spec.p1 * (1.0 - spec.p2) + (1.0 - spec.p1) * spec.p2
}

/// Correlation of `M₁`, `M₂` at joint probability `p11`.
pub fn rho_from_p11(spec: &CollisionSpec, p11: f64) -> Result<f64> {
    if spec.is_degenerate() {
        return Err(Error::Degenerate(format!(
            "correlation undefined for deterministic access (p1 = {}, p2 = {})",
            spec.p1, spec.p2
        )));
    }
    spec.check_p11(p11)?;
    let (p1, p2) = (spec.p1, spec.p2);
    let denom = (p1 * (1.0 - p1) * p2 * (1.0 - p2)).sqrt();
    Ok((p11 - (1.0 - p1) * (1.0 - p2)) / denom)
}

/// Success probability `2 − p1 − p2 − 2·p11` at joint probability `p11`.
pub fn success_from_p11(spec: &CollisionSpec, p11: f64) -> Result<f64> {
    spec.check_p11(p11)?;
    Ok((2.0 - spec.p1 - spec.p2 - 2.0 * p11).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionResult {
    #[serde(serialize_with = "ser_sig")]
    pub p1: f64,
    #[serde(serialize_with = "ser_sig")]
    pub p2: f64,
    #[serde(serialize_with = "ser_sig")]
    pub u_independent: f64,
    #[serde(serialize_with = "ser_sig_pair")]
    pub p11_range: [f64; 2],
    /// `[u_min, u_max]`; `u_max` at the low end of `p11_range`.
    #[serde(serialize_with = "ser_sig_pair")]
    pub u_range: [f64; 2],
    /// `None` when either marginal is degenerate.
    #[serde(serialize_with = "ser_sig_pair_opt")]
    pub rho_range: Option<[f64; 2]>,
}

pub fn analyze(spec: &CollisionSpec) -> CollisionResult {
    let [lo, hi] = spec.p11_range();
    let u = |p11| success_from_p11(spec, p11).expect("endpoint is feasible");
    let rho_range = if spec.is_degenerate() {
        None
    } else {
        Some([
            rho_from_p11(spec, lo).expect("endpoint is feasible"),
            rho_from_p11(spec, hi).expect("endpoint is feasible"),
        ])
    };
    CollisionResult {
        p1: spec.p1,
        p2: spec.p2,
        u_independent: success_independent(spec),
        p11_range: [lo, hi],
        u_range: [u(hi), u(lo)],
        rho_range,
    }
}

/// Point values at a given `p11`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionPoint {
    #[serde(serialize_with = "ser_sig")]
    pub p11: f64,
    #[serde(serialize_with = "ser_sig")]
    pub u: f64,
    pub rho: Option<f64>,
}

pub fn point(spec: &CollisionSpec, p11: f64) -> Result<CollisionPoint> {
    let u = success_from_p11(spec, p11)?;
    let rho = if spec.is_degenerate() {
        None
    } else {
        Some(crate::numfmt::round_sig(rho_from_p11(spec, p11)?))
    };
    Ok(CollisionPoint { p11, u, rho })
}
