//! Fixtures shared by the integration suites.

#![allow(dead_code)]

use depbound::costs::{self, CostFunction};
use depbound::marginals::Marginal;
use depbound::monge;
use depbound::sampler::{self, Coupling};
use depbound::transport::{self, QuadratureConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BATTERY_SEED: u64 = 0xB0A7;
pub const BATTERY_SIZE: usize = 20;

/// Costs that admit bounds, with their parameters drawn per combination.
const COSTS: [&str; 6] = [
    "sinr",
    "mac_rate1",
    "sum_rate",
    "secret_key",
    "prop_fair",
    "product",
];

pub struct Combo {
    pub cost: CostFunction,
    pub fx: Marginal,
    pub fy: Marginal,
}

impl Combo {
    pub fn label(&self) -> String {
        format!("{} {} {}", self.cost, self.fx, self.fy)
    }
}

fn random_marginal(rng: &mut ChaCha8Rng) -> Marginal {
    match rng.gen_range(0..5) {
        0 => Marginal::exponential(rng.gen_range(0.5..2.0)),
        1 => Marginal::rayleigh(rng.gen_range(0.5..1.5)),
        2 => {
            let low = rng.gen_range(0.0..1.0);
            Marginal::uniform(low, low + rng.gen_range(0.5..3.0))
        }
        3 => Marginal::nakagami(rng.gen_range(0.5..3.0), rng.gen_range(0.5..2.0)),
        _ => Marginal::lognormal(rng.gen_range(-0.5..0.5), rng.gen_range(0.2..0.8)),
    }
    .unwrap()
}

/// The randomized (cost, marginals) battery, fixed by [`BATTERY_SEED`].
pub fn battery() -> Vec<Combo> {
    let mut rng = ChaCha8Rng::seed_from_u64(BATTERY_SEED);
    (0..BATTERY_SIZE)
        .map(|i| {
            // every cost appears at least three times
            let name = COSTS[i % COSTS.len()];
            let cost = match name {
                "mac_rate1" => costs::builtin(name, &[("s", rng.gen_range(0.1..10.0))]),
                _ => costs::builtin(name, &[]),
            }
            .unwrap();
            Combo {
                cost,
                fx: random_marginal(&mut rng),
                fy: random_marginal(&mut rng),
            }
        })
        .collect()
}

pub fn battery_config() -> QuadratureConfig {
    QuadratureConfig {
        rel_tol: 1e-7,
        ..Default::default()
    }
}

pub struct ComboOutcome {
    pub label: String,
    pub ordered: bool,
    /// `|quadrature − mc| / combined stderr` for lower, independent, upper.
    pub z: [f64; 3],
}

impl ComboOutcome {
    pub fn agrees(&self, k: f64) -> bool {
        self.z.iter().all(|&z| z <= k)
    }
}

/// Bounds and independent value by quadrature, each against the sampler at
/// `n` draws.
pub fn evaluate(combo: &Combo, n: usize, seed: u64) -> ComboOutcome {
    let cfg = battery_config();
    let domain = transport::working_domain(&combo.fx, &combo.fy).unwrap();
    let report = monge::check_cross_difference(&combo.cost, domain, 64, monge::CROSS_TOL).unwrap();
    let r = transport::bounds_with_independent(&combo.cost, &combo.fx, &combo.fy, &cfg, &report)
        .unwrap_or_else(|e| panic!("{}: {e}", combo.label()));
    let ind = r.independent.unwrap();
    let ind_err = r.independent_err.unwrap();

    let (low_coupling, high_coupling) = match report.classification {
        monge::Classification::Supermodular => (Coupling::Countermonotonic, Coupling::Comonotonic),
        _ => (Coupling::Comonotonic, Coupling::Countermonotonic),
    };
    let mc = |coupling| {
        sampler::mc_expectation(&combo.cost, &combo.fx, &combo.fy, coupling, n, seed).unwrap()
    };
    let (ml, mi, mu) = (
        mc(low_coupling),
        mc(Coupling::Independent),
        mc(high_coupling),
    );

    let z = |q: f64, qe: f64, m: &sampler::McEstimate| {
        (q - m.value).abs() / (m.stderr.powi(2) + qe.powi(2)).sqrt()
    };
    ComboOutcome {
        label: combo.label(),
        ordered: r.lower <= ind + r.lower_err + ind_err && ind <= r.upper + r.upper_err + ind_err,
        z: [
            z(r.lower, r.lower_err, &ml),
            z(ind, ind_err, &mi),
            z(r.upper, r.upper_err, &mu),
        ],
    }
}

pub fn exp(rate: f64) -> Marginal {
    Marginal::exponential(rate).unwrap()
}
