//! Seeded Monte Carlo estimates of `E[c(X, Y)]` under the comonotonic,
//! countermonotonic and independent couplings.
//!
//! Draws are produced in fixed-size batches. Batch `i` uses its own ChaCha8
//! stream seeded with [`split_seed`]`(root, i)`, so the estimate depends only
//! on `(seed, n)` and never on how batches are scheduled across threads.
//! Batch moments are merged in batch order with the pairwise (Chan) update.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::costs::CostFunction;
use crate::marginals::Marginal;
use crate::numfmt::ser_sig;
use crate::{Error, Result};

/// Samples per independent stream.
pub const BATCH: usize = 1 << 16;

/// Tag mixed into the seed of the second uniform stream of the independent
/// coupling.
const SECOND_STREAM_TAG: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `index` derived from `root`: `mix64(root ^ mix64(index))`.
pub fn split_seed(root: u64, index: u64) -> u64 {
    mix64(root ^ mix64(index))
}

/// A deterministic uniform source owned by one caller.
#[derive(Debug, Clone)]
pub struct RandomStream(ChaCha8Rng);

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Stream `index` of the family rooted at `root`.
    pub fn split(root: u64, index: u64) -> Self {
        Self::new(split_seed(root, index))
    }

    /// Uniform on the open interval `(0, 1)`: `(k + ½) · 2⁻⁵³` for a random
    /// 53-bit `k`.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        let k = self.0.next_u64() >> 11;
        (k as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    /// `(F_X⁻¹(U), F_Y⁻¹(U))`
    Comonotonic,
    /// `(F_X⁻¹(U), F_Y⁻¹(1 − U))`
    Countermonotonic,
    /// `(F_X⁻¹(U), F_Y⁻¹(V))` with `U`, `V` independent
    Independent,
}

impl std::str::FromStr for Coupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "co" | "comonotonic" => Ok(Coupling::Comonotonic),
            "counter" | "countermonotonic" => Ok(Coupling::Countermonotonic),
            "ind" | "independent" => Ok(Coupling::Independent),
            _ => Err(Error::parse(s, "expected co, counter or ind")),
        }
    }
}

impl std::fmt::Display for Coupling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Coupling::Comonotonic => "co",
            Coupling::Countermonotonic => "counter",
            Coupling::Independent => "ind",
        })
    }
}

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    /// Welford update.
    #[inline]
    pub fn push(&mut self, v: f64) {
        self.n += 1;
        let d = v - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (v - self.mean);
    }

    /// Pairwise combination of two disjoint samples.
    pub fn merge(self, o: Self) -> Self {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        let w = o.n as f64 / n as f64;
        Self {
            n,
            mean: self.mean + d * w,
            m2: self.m2 + o.m2 + d * d * self.n as f64 * w,
        }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    #[serde(serialize_with = "ser_sig")]
    pub value: f64,
    /// Sample standard deviation over `√n`.
    #[serde(serialize_with = "ser_sig")]
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
}

fn batch_moments(
    c: &CostFunction,
    fx: &Marginal,
    fy: &Marginal,
    coupling: Coupling,
    seed: u64,
    index: usize,
    len: usize,
) -> Result<Moments> {
    let mut us = RandomStream::split(seed, index as u64);
    let mut vs = (coupling == Coupling::Independent)
        .then(|| RandomStream::split(seed ^ SECOND_STREAM_TAG, index as u64));
    let mut m = Moments::default();
    for _ in 0..len {
        let u = us.uniform_open();
        let x = fx.quantile(u)?;
        let y = match (coupling, vs.as_mut()) {
            (Coupling::Comonotonic, _) => fy.quantile(u)?,
            (Coupling::Countermonotonic, _) => fy.quantile(1.0 - u)?,
            (Coupling::Independent, Some(v)) => fy.quantile(v.uniform_open())?,
            (Coupling::Independent, None) => unreachable!(),
        };
        let v = c.eval(x, y);
        if !v.is_finite() {
            return Err(Error::NonFiniteCost { x, y });
        }
        m.push(v);
    }
    Ok(m)
}

/// Monte Carlo estimate of `E[c(X, Y)]` under `coupling` with `n ≥ 100`
/// draws.
pub fn mc_expectation(
    c: &CostFunction,
    fx: &Marginal,
    fy: &Marginal,
    coupling: Coupling,
    n: usize,
    seed: u64,
) -> Result<McEstimate> {
    if n < 100 {
        return Err(Error::invalid(format!(
            "Monte Carlo needs n >= 100, got {n}"
        )));
    }
    let (lx, _) = fx.support();
    let (ly, _) = fy.support();
    if lx < 0.0 || ly < 0.0 {
        return Err(Error::invalid("costs need marginals supported on [0, ∞)"));
    }
    let batches = n.div_ceil(BATCH);
    let parts = (0..batches)
        .into_par_iter()
        .map(|i| {
            let len = BATCH.min(n - i * BATCH);
            batch_moments(c, fx, fy, coupling, seed, i, len)
        })
        .collect::<Result<Vec<_>>>()?;
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    Ok(McEstimate {
        value: m.mean,
        stderr: (m.variance() / m.n as f64).sqrt(),
        n: m.n,
        seed,
    })
}

/// Pearson product-moment correlation of `pairs`.
pub fn empirical_correlation(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(Error::Degenerate(format!(
            "correlation needs at least 2 pairs, got {}",
            pairs.len()
        )));
    }
    let n = pairs.len() as f64;
    let (sx, sy) = pairs
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    // relative threshold: constant inputs leave only rounding noise
    let floor = |s: f64, m: f64| s <= 1e-24 * n * m.abs().max(1e-300).powi(2);
    if floor(sxx, mx) || floor(syy, my) {
        return Err(Error::Degenerate(
            "correlation undefined: a coordinate has zero variance".into(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}
