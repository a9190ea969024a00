//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use depbound::collision::{self, CollisionSpec};
use depbound::costs;
use depbound::marginals::Marginal;
use depbound::monge::{self, Classification, Method, Rect};
use depbound::sampler::{self, Coupling};
use depbound::transport::{self, QuadratureConfig};
use depbound::tworay::TwoRayGeometry;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::exp;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_time(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(
        elapsed < limit,
        format!("took {:.2?}, limit {:.0?}", elapsed, limit),
    )
}

fn example1_bounds() -> transport::BoundsResult {
    let c = costs::builtin("sinr", &[]).unwrap();
    let (fx, fy) = (exp(1.0), exp(2.0));
    let report = monge::check_cross_difference(
        &c,
        transport::working_domain(&fx, &fy).unwrap(),
        64,
        monge::CROSS_TOL,
    )
    .unwrap();
    transport::bounds_with_independent(&c, &fx, &fy, &QuadratureConfig::default(), &report).unwrap()
}

fn example_quadrature() -> Outcome {
    let t = Instant::now();
    let r = example1_bounds();
    let elapsed = t.elapsed();
    let ind = r.independent.unwrap();
    let detail = format!(
        "lower={:.6} upper={:.6} independent={:.6} in {:.2?}",
        r.lower, r.upper, ind, elapsed
    );
    ensure(
        r.classification_used == Classification::Submodular,
        "sinr not submodular",
    )?;
    for (got, want) in [(r.lower, 0.555), (r.upper, 0.870), (ind, 0.723)] {
        ensure(
            (got - want).abs() <= 0.005,
            format!("{got} vs {want}: {detail}"),
        )?;
    }
    within_time(elapsed, Duration::from_secs(1))?;
    Ok(detail)
}

fn example_monte_carlo() -> Outcome {
    let r = example1_bounds();
    let c = costs::builtin("sinr", &[]).unwrap();
    let (fx, fy) = (exp(1.0), exp(2.0));
    let t = Instant::now();
    let mut parts = Vec::new();
    for (coupling, q) in [
        (Coupling::Comonotonic, r.lower),
        (Coupling::Independent, r.independent.unwrap()),
        (Coupling::Countermonotonic, r.upper),
    ] {
        let m = sampler::mc_expectation(&c, &fx, &fy, coupling, 10_000_000, 2020).unwrap();
        let z = (m.value - q).abs() / m.stderr;
        parts.push(format!("{coupling}={:.5}(z={z:.2})", m.value));
        ensure(
            z <= 4.0,
            format!("{coupling}: mc {} vs {q}, z={z:.2}", m.value),
        )?;
    }
    let elapsed = t.elapsed();
    within_time(elapsed, Duration::from_secs(30))?;
    Ok(format!("{} in {elapsed:.2?}", parts.join(" ")))
}

fn sweep_reproduction() -> Outcome {
    let t = Instant::now();
    let fx = exp(1.0);
    let snrs: Vec<f64> = (-5..=20).map(f64::from).collect();
    let rows = transport::bounds_sweep(
        |snr| costs::builtin("mac_rate1", &[("snr_db", snr)]),
        &snrs,
        &fx,
        &fx,
        &QuadratureConfig::default(),
        transport::working_domain(&fx, &fx).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    ensure(rows.len() == 26, "expected 26 rows")?;
    for r in &rows {
        ensure(
            r.lower < r.independent && r.independent < r.upper,
            format!("ordering fails at {} dB: {r:?}", r.param),
        )?;
    }
    for w in rows.windows(2) {
        ensure(
            w[1].lower > w[0].lower
                && w[1].independent > w[0].independent
                && w[1].upper > w[0].upper,
            format!("not increasing from {} to {} dB", w[0].param, w[1].param),
        )?;
    }
    let mut worst: f64 = 0.0;
    for snr in [-5.0, 5.0, 20.0] {
        let row = rows.iter().find(|r| r.param == snr).unwrap();
        let c = costs::builtin("mac_rate1", &[("snr_db", snr)]).unwrap();
        for (coupling, q) in [
            (Coupling::Comonotonic, row.lower),
            (Coupling::Independent, row.independent),
            (Coupling::Countermonotonic, row.upper),
        ] {
            let m = sampler::mc_expectation(&c, &fx, &fx, coupling, 1_000_000, 2020).unwrap();
            let z = (m.value - q).abs() / m.stderr;
            worst = worst.max(z);
            ensure(
                z <= 3.0,
                format!("{snr} dB {coupling}: mc {} vs {q}", m.value),
            )?;
        }
    }
    let elapsed = t.elapsed();
    within_time(elapsed, Duration::from_secs(60))?;
    let (first, last) = (&rows[0], &rows[25]);
    Ok(format!(
        "-5 dB [{:.4}, {:.4}, {:.4}] 20 dB [{:.4}, {:.4}, {:.4}] worst z={worst:.2} in {elapsed:.2?}",
        first.lower, first.independent, first.upper, last.lower, last.independent, last.upper
    ))
}

fn envelope_correlations() -> Outcome {
    let t = Instant::now();
    let g = TwoRayGeometry::default();
    let near = g
        .with_dh(0.05)
        .envelope_correlation(20.0, 50.0, 100_000)
        .map_err(|e| e.to_string())?;
    let far = g
        .with_dh(0.1)
        .envelope_correlation(20.0, 50.0, 100_000)
        .map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let detail = format!("rho(0.05)={near:.4} rho(0.1)={far:.4} in {elapsed:.2?}");
    ensure(
        (near - 0.31).abs() <= 0.05 && (far + 0.64).abs() <= 0.05,
        detail.clone(),
    )?;
    within_time(elapsed, Duration::from_secs(5))?;
    Ok(detail)
}

fn collision_channel() -> Outcome {
    let r = collision::analyze(&CollisionSpec::new(0.5, 0.5).unwrap());
    ensure(
        r.rho_range == Some([-1.0, 1.0]),
        format!("rho range {:?}", r.rho_range),
    )?;
    ensure(r.u_range == [0.0, 1.0], format!("U range {:?}", r.u_range))?;

    let mut rng = ChaCha8Rng::seed_from_u64(0xC011);
    for _ in 0..1000 {
        let s = CollisionSpec::new(rng.gen_range(0.01..0.99), rng.gen_range(0.01..0.99)).unwrap();
        let [lo, hi] = s.p11_range();
        let grid: Vec<f64> = (0..=20).map(|k| lo + (hi - lo) * k as f64 / 20.0).collect();
        for w in grid.windows(2) {
            let (u0, u1) = (
                collision::success_from_p11(&s, w[0]).unwrap(),
                collision::success_from_p11(&s, w[1]).unwrap(),
            );
            let (r0, r1) = (
                collision::rho_from_p11(&s, w[0]).unwrap(),
                collision::rho_from_p11(&s, w[1]).unwrap(),
            );
            ensure(
                u1 < u0 && r1 > r0,
                format!("not strictly monotone for {s:?}"),
            )?;
        }
        let at_ind = collision::success_from_p11(&s, s.p11_independent()).unwrap();
        ensure(
            (at_ind - collision::success_independent(&s)).abs() <= 1e-12,
            format!("independence mismatch for {s:?}"),
        )?;
    }
    Ok("exact ranges at (0.5, 0.5); 1000 random specs monotone and consistent".into())
}

fn monge_classes() -> Outcome {
    let domain = Rect::new(0.0, 10.0, 0.0, 10.0).unwrap();
    let mut cases = vec![
        (
            costs::builtin("sinr", &[]).unwrap(),
            Classification::Submodular,
        ),
        (
            costs::builtin("sum_rate", &[]).unwrap(),
            Classification::Submodular,
        ),
        (
            costs::builtin("secret_key", &[]).unwrap(),
            Classification::Submodular,
        ),
        (
            costs::builtin("prop_fair", &[]).unwrap(),
            Classification::Supermodular,
        ),
        (
            costs::builtin("product", &[]).unwrap(),
            Classification::Supermodular,
        ),
        (
            costs::builtin("additive", &[]).unwrap(),
            Classification::Modular,
        ),
    ];
    for s in [0.1, 1.0, 10.0] {
        cases.push((
            costs::builtin("mac_rate1", &[("s", s)]).unwrap(),
            Classification::Submodular,
        ));
    }
    for (c, want) in &cases {
        for method in [Method::Cross, Method::Partial] {
            let r = monge::check(c, domain, 64, method).map_err(|e| e.to_string())?;
            ensure(
                r.classification == *want && r.violation_count == 0,
                format!(
                    "{c} by {method:?}: {} with {} violations",
                    r.classification, r.violation_count
                ),
            )?;
        }
    }
    Ok(format!("{} costs agree under both methods", cases.len()))
}

fn product_constants() -> Outcome {
    let c = costs::builtin("product", &[]).unwrap();
    let fx = exp(1.0);
    let counter_exact = 2.0 - std::f64::consts::PI.powi(2) / 6.0;
    let mut parts = Vec::new();
    for (coupling, exact) in [
        (Coupling::Comonotonic, 2.0),
        (Coupling::Countermonotonic, counter_exact),
    ] {
        let m = sampler::mc_expectation(&c, &fx, &fx, coupling, 10_000_000, 2020).unwrap();
        let z = (m.value - exact).abs() / m.stderr;
        ensure(z <= 4.0, format!("{coupling}: mc {} vs {exact}", m.value))?;
        parts.push(format!("mc {coupling}={:.4}", m.value));
    }
    let cfg = QuadratureConfig::default();
    let co = transport::comonotonic_expectation(&c, &fx, &fx, &cfg).map_err(|e| e.to_string())?;
    let counter =
        transport::countermonotonic_expectation(&c, &fx, &fx, &cfg).map_err(|e| e.to_string())?;
    ensure(
        (co.value - 2.0).abs() <= 1e-3 && (counter.value - counter_exact).abs() <= 1e-3,
        format!("co={} counter={}", co.value, counter.value),
    )?;
    Ok(format!(
        "co={:.6} counter={:.6} ({})",
        co.value,
        counter.value,
        parts.join(" ")
    ))
}

fn round_trip_marginals() -> Vec<Marginal> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0A11);
    let mut out = Vec::new();
    for _ in 0..10 {
        out.extend([
            Marginal::exponential(rng.gen_range(0.1..10.0)).unwrap(),
            Marginal::rayleigh(rng.gen_range(0.1..5.0)).unwrap(),
            Marginal::uniform(rng.gen_range(0.0..2.0), rng.gen_range(2.5..9.0)).unwrap(),
            Marginal::nakagami(rng.gen_range(0.5..8.0), rng.gen_range(0.1..5.0)).unwrap(),
            Marginal::lognormal(rng.gen_range(-2.0..2.0), rng.gen_range(0.1..1.5)).unwrap(),
            Marginal::rician(rng.gen_range(0.0..20.0), rng.gen_range(0.1..5.0)).unwrap(),
        ]);
    }
    out
}

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_depbound"))
        .args(args)
        .env_remove("DEPBOUND_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(
        out.status.success(),
        format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)),
    )?;
    Ok(out.stdout)
}

fn property_suites() -> Outcome {
    let t = Instant::now();
    let marginals = round_trip_marginals();
    for d in &marginals {
        for i in 0..=200 {
            let u = 1e-6 + (1.0 - 2e-6) * i as f64 / 200.0;
            let x = d.quantile(u).map_err(|e| e.to_string())?;
            ensure(
                (d.cdf(x) - u).abs() <= 1e-9,
                format!("{d}: cdf(q({u})) = {}", d.cdf(x)),
            )?;
        }
    }

    let outcomes: Vec<_> = common::battery()
        .iter()
        .map(|c| common::evaluate(c, 1_000_000, 2020))
        .collect();
    for o in &outcomes {
        ensure(o.ordered, format!("ordering fails for {}", o.label))?;
        ensure(o.agrees(3.0), format!("{} z={:?}", o.label, o.z))?;
    }
    let worst = outcomes.iter().flat_map(|o| o.z).fold(0.0, f64::max);

    for args in [
        &[
            "mc",
            "--cost",
            "sinr",
            "--fx",
            "exp:1",
            "--fy",
            "exp:2",
            "--coupling",
            "ind",
            "--n",
            "200000",
        ][..],
        &["sweep", "--snr-db", "-5:20:5", "--format", "csv"][..],
        &["tworay", "corr", "--d", "20:50:20000"][..],
    ] {
        ensure(
            cli(args)? == cli(args)?,
            format!("reruns of {args:?} differ"),
        )?;
    }

    let elapsed = t.elapsed();
    Ok(format!(
        "{} marginals round-trip; {} battery combos, worst z={worst:.2}; CLI reruns identical; {elapsed:.2?}",
        marginals.len(),
        outcomes.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("example quadrature triple", example_quadrature),
        ("example Monte Carlo triple", example_monte_carlo),
        ("rate sweep over SNR", sweep_reproduction),
        ("two-ray envelope correlations", envelope_correlations),
        ("collision channel ranges", collision_channel),
        ("Monge classifications", monge_classes),
        ("product closed forms", product_constants),
        ("property suites", property_suites),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    let total = start.elapsed();
    println!(
        "acceptance: {} of {} passed in {total:.2?}",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
