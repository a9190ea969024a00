//! Two-ray propagation over a flat reflecting ground to two vertically
//! stacked receive antennas.
//!
//! Antenna `i` at height `h_i` and ground distance `d` sees a direct path and
//! a ground-reflected path. The reflected path length follows from the image
//! transmitter mirrored below the ground plane:
//!
//! ```text
//! s_los  = √(d² + (h_tx − h_i)²)
//! s_nlos = √(d² + (h_tx + h_i)²)
//! ```
//!
//! With delays `τ = s / c` and `ω = 2πf`, the squared envelope is
//!
//! ```text
//! X_i = A₁² + A₂² + 2 A₁ A₂ cos(ω (τ_los − τ_nlos)).
//! ```
//!
//! Amplitudes are constant; no reflection phase or distance attenuation is
//! applied.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::numfmt::ser_sig;
use crate::sampler::empirical_correlation;
use crate::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Antenna {
    /// At `h1`.
    Lower,
    /// At `h1 + dh`.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoRayGeometry {
    /// Direct-path amplitude.
    pub a1: f64,
    /// Reflected-path amplitude.
    pub a2: f64,
    /// Carrier frequency, Hz.
    pub f: f64,
    /// Transmitter height, m.
    pub h_tx: f64,
    /// Lower antenna height, m.
    pub h1: f64,
    /// Antenna spacing, m.
    pub dh: f64,
    pub propagation_speed: f64,
}

impl Default for TwoRayGeometry {
    /// `A₁ = 1`, `A₂ = 0.5`, `f = 2 GHz`, `h_tx = 10 m`, `h1 = 1 m`,
    /// `dh = 0.05 m`.
    fn default() -> Self {
        Self {
            a1: 1.0,
            a2: 0.5,
            f: 2e9,
            h_tx: 10.0,
            h1: 1.0,
            dh: 0.05,
            propagation_speed: SPEED_OF_LIGHT,
        }
    }
}

impl TwoRayGeometry {
    pub fn with_dh(self, dh: f64) -> Self {
        Self { dh, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let fin = [
            self.a1,
            self.a2,
            self.f,
            self.h_tx,
            self.h1,
            self.dh,
            self.propagation_speed,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !fin {
            return Err(Error::invalid("two-ray parameters must be finite"));
        }
        if self.h_tx <= 0.0 || self.h1 <= 0.0 || self.h1 + self.dh <= 0.0 {
            return Err(Error::invalid("antenna heights must be > 0"));
        }
        if self.f <= 0.0 || self.propagation_speed <= 0.0 {
            return Err(Error::invalid(
                "frequency and propagation speed must be > 0",
            ));
        }
        if self.a1 < 0.0 || self.a2 < 0.0 {
            return Err(Error::invalid("amplitudes must be >= 0"));
        }
        Ok(())
    }

    pub fn height(&self, antenna: Antenna) -> f64 {
        match antenna {
            Antenna::Lower => self.h1,
            Antenna::Upper => self.h1 + self.dh,
        }
    }

    /// `(s_los, s_nlos)` in metres.
    pub fn path_lengths(&self, d: f64, antenna: Antenna) -> Result<(f64, f64)> {
        check_distance(d)?;
        let h = self.height(antenna);
        Ok((d.hypot(self.h_tx - h), d.hypot(self.h_tx + h)))
    }

    /// Squared envelope `X_i` at ground distance `d`.
    pub fn envelope(&self, d: f64, antenna: Antenna) -> Result<f64> {
        let (s_los, s_nlos) = self.path_lengths(d, antenna)?;
        let h = self.height(antenna);
        // s_los − s_nlos = (s_los² − s_nlos²) / (s_los + s_nlos), without cancellation
        let diff = -4.0 * self.h_tx * h / (s_los + s_nlos);
        let omega = 2.0 * PI * self.f;
        let phase = omega * diff / self.propagation_speed;
        Ok(self.a1 * self.a1 + self.a2 * self.a2 + 2.0 * self.a1 * self.a2 * phase.cos())
    }

    /// Envelopes at both antennas for each distance of an increasing grid.
    pub fn envelope_trace(&self, d_grid: &[f64]) -> Result<Vec<EnvelopeRow>> {
        self.validate()?;
        if d_grid.is_empty() {
            return Err(Error::invalid("distance grid is empty"));
        }
        if d_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("distance grid must be strictly increasing"));
        }
        d_grid
            .iter()
            .map(|&d| {
                Ok(EnvelopeRow {
                    distance: d,
                    x1: self.envelope(d, Antenna::Lower)?,
                    x2: self.envelope(d, Antenna::Upper)?,
                })
            })
            .collect()
    }

    /// Pearson correlation of `(X₁, X₂)` over `n` evenly spaced distances
    /// spanning `[d_low, d_high]`.
    pub fn envelope_correlation(&self, d_low: f64, d_high: f64, n: usize) -> Result<f64> {
        if !(d_low > 0.0 && d_high > d_low && d_high.is_finite()) {
            return Err(Error::invalid(format!(
                "need 0 < d_low < d_high, got [{d_low}, {d_high}]"
            )));
        }
        if n < 100 {
            return Err(Error::invalid(format!(
                "correlation grid needs n >= 100, got {n}"
            )));
        }
        let rows = self.envelope_trace(&linspace(d_low, d_high, n))?;
        let pairs: Vec<_> = rows.iter().map(|r| (r.x1, r.x2)).collect();
        empirical_correlation(&pairs)
    }
}

fn check_distance(d: f64) -> Result<()> {
    if d.is_finite() && d > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "ground distance must be > 0, got {d}"
        )))
    }
}

/// `n ≥ 2` evenly spaced points from `a` to `b` inclusive; `[a]` for `n = 1`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    #[serde(serialize_with = "ser_sig")]
    pub distance: f64,
    #[serde(serialize_with = "ser_sig")]
    pub x1: f64,
    #[serde(serialize_with = "ser_sig")]
    pub x2: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_length_examples() {
        let g = TwoRayGeometry::default();
        let (los, nlos) = g.path_lengths(30.0, Antenna::Lower).unwrap();
        assert!((los - 981f64.sqrt()).abs() < 1e-12);
        assert!((nlos - 1021f64.sqrt()).abs() < 1e-12);
        assert!((los - 31.3209).abs() < 1e-4 && (nlos - 31.9531).abs() < 1e-4);

        let level = TwoRayGeometry { h1: 10.0, ..g };
        assert_eq!(level.path_lengths(25.0, Antenna::Lower).unwrap().0, 25.0);
        assert!(g.path_lengths(0.0, Antenna::Lower).is_err());
    }

    #[test]
    fn reflected_path_is_longer() {
        let g = TwoRayGeometry::default();
        for d in linspace(0.5, 500.0, 1000) {
            for a in [Antenna::Lower, Antenna::Upper] {
                let (los, nlos) = g.path_lengths(d, a).unwrap();
                assert!(nlos > los);
            }
        }
    }

    #[test]
    fn stable_difference_matches_direct_one() {
        let g = TwoRayGeometry::default();
        let (los, nlos) = g.path_lengths(37.0, Antenna::Upper).unwrap();
        let h = g.height(Antenna::Upper);
        let stable = -4.0 * g.h_tx * h / (los + nlos);
        assert!((stable - (los - nlos)).abs() < 1e-12);
    }

    #[test]
    fn single_path_is_flat() {
        let g = TwoRayGeometry {
            a2: 0.0,
            a1: 1.3,
            ..Default::default()
        };
        for d in linspace(20.0, 50.0, 101) {
            assert!((g.envelope(d, Antenna::Lower).unwrap() - 1.69).abs() < 1e-12);
        }
    }

    #[test]
    fn envelope_stays_in_cosine_range() {
        let g = TwoRayGeometry::default();
        let rows = g.envelope_trace(&linspace(20.0, 50.0, 5001)).unwrap();
        for r in &rows {
            for x in [r.x1, r.x2] {
                assert!((0.25 - 1e-12..=2.25 + 1e-12).contains(&x));
            }
        }
        // the curves actually oscillate over the range
        let max = rows.iter().map(|r| r.x1).fold(f64::MIN, f64::max);
        let min = rows.iter().map(|r| r.x1).fold(f64::MAX, f64::min);
        assert!(max > 2.2 && min < 0.3);
    }

    #[test]
    fn trace_rows() {
        let g = TwoRayGeometry::default();
        let rows = g.envelope_trace(&[33.0]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].x1, g.envelope(33.0, Antenna::Lower).unwrap());
        assert_eq!(rows[0].x2, g.envelope(33.0, Antenna::Upper).unwrap());

        let same = g.with_dh(0.0);
        for r in same.envelope_trace(&linspace(20.0, 50.0, 300)).unwrap() {
            assert_eq!(r.x1, r.x2);
        }
        assert!(g.envelope_trace(&[]).is_err());
        assert!(g.envelope_trace(&[30.0, 20.0]).is_err());
    }

    #[test]
    fn correlation_examples() {
        let g = TwoRayGeometry::default();
        let pos = g.envelope_correlation(20.0, 50.0, 100_000).unwrap();
        assert!((pos - 0.31).abs() < 0.05, "{pos}");
        let neg = g
            .with_dh(0.1)
            .envelope_correlation(20.0, 50.0, 100_000)
            .unwrap();
        assert!((neg + 0.64).abs() < 0.05, "{neg}");
        let one = g
            .with_dh(0.0)
            .envelope_correlation(20.0, 50.0, 1000)
            .unwrap();
        assert!((one - 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_grid_stability() {
        for dh in [0.05, 0.1] {
            let g = TwoRayGeometry::default().with_dh(dh);
            let a = g.envelope_correlation(20.0, 50.0, 50_000).unwrap();
            let b = g.envelope_correlation(20.0, 50.0, 100_000).unwrap();
            assert!((a - b).abs() < 0.01);
        }
    }

    #[test]
    fn correlation_errors() {
        let flat = TwoRayGeometry {
            a2: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            flat.envelope_correlation(20.0, 50.0, 1000),
            Err(Error::Degenerate(_))
        ));
        let g = TwoRayGeometry::default();
        assert!(g.envelope_correlation(50.0, 20.0, 1000).is_err());
        assert!(g.envelope_correlation(20.0, 50.0, 10).is_err());
    }
}
