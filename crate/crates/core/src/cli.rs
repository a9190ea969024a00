//! The `depbound` command line.
//!
//! Every subcommand writes one JSON document (default) or a CSV table to
//! standard output or `--out PATH`. Failures print a single line starting
//! with `error:` on standard error and exit with 1 for usage errors or 2
//! for numerical failures.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::collision::{self, CollisionSpec};
use crate::costs::{self, CostSpec};
use crate::marginals::Marginal;
use crate::monge::{self, Method, Rect};
use crate::numfmt::fmt_sig;
use crate::sampler::{self, Coupling};
use crate::transport::{self, QuadratureConfig, SweepRow};
use crate::tworay::{linspace, TwoRayGeometry};
use crate::{Error, Result};

/// Seed used by `mc` when neither `--seed` nor `DEPBOUND_SEED` is given.
pub const DEFAULT_SEED: u64 = 2020;
/// Environment variable overriding [`DEFAULT_SEED`].
pub const SEED_ENV: &str = "DEPBOUND_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "depbound",
    version,
    about = "Sharp bounds on E[c(X, Y)] for dependent channels with fixed marginals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write output to PATH instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lower and upper bounds (and optionally the independent value).
    Bounds(BoundsArgs),
    /// Bounds of `mac_rate1` (or another cost with noise `s`) over an SNR grid.
    Sweep(SweepArgs),
    /// Monte Carlo estimate under one coupling.
    Mc(McArgs),
    /// Classify a cost by the Monge condition on a rectangle.
    Monge(MongeArgs),
    /// Two-user collision channel ranges.
    Collision(CollisionArgs),
    /// Two-ray envelopes at two stacked antennas.
    Tworay {
        #[command(subcommand)]
        command: TworayCommand,
    },
    /// Regenerate the reference tables with their parameter presets.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
struct QuadArgs {
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
    /// Width of the probability tails cut from (0, 1).
    #[arg(long, default_value_t = 1e-9)]
    truncation: f64,
}

impl QuadArgs {
    fn config(&self) -> QuadratureConfig {
        QuadratureConfig {
            rel_tol: self.rel_tol,
            truncation: self.truncation,
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// Cost spec, e.g. `sinr` or `mac_rate1:s=0.1`.
    #[arg(long)]
    cost: String,
    /// Marginal of X, e.g. `exp:1`.
    #[arg(long)]
    fx: String,
    /// Marginal of Y.
    #[arg(long)]
    fy: String,
    /// Also compute the independent-coupling value.
    #[arg(long)]
    independent: bool,
    /// Classification rectangle x0,x1,y0,y1 (default: support up to the
    /// 0.999 quantiles).
    #[arg(long)]
    domain: Option<String>,
    /// Shorthand for `--format json`.
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// Shorthand for `--format csv`.
    #[arg(long)]
    csv: bool,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, default_value = "mac_rate1")]
    cost: String,
    #[arg(long, default_value = "exp:1")]
    fx: String,
    #[arg(long, default_value = "exp:1")]
    fy: String,
    /// SNR grid in dB as start:stop:step; noise is s = 10^(−snr/10).
    #[arg(long, default_value = "-5:20:1", allow_hyphen_values = true)]
    snr_db: String,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Debug, Args)]
struct McArgs {
    #[arg(long)]
    cost: String,
    #[arg(long)]
    fx: String,
    #[arg(long)]
    fy: String,
    /// co, counter or ind.
    #[arg(long)]
    coupling: String,
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    /// Root seed (default: $DEPBOUND_SEED, else 2020).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct MongeArgs {
    #[arg(long)]
    cost: String,
    /// x0,x1,y0,y1
    #[arg(long)]
    domain: String,
    /// Grid points per axis.
    #[arg(long, default_value_t = 64)]
    grid: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Cross)]
    method: MethodArg,
    /// Override the method's default tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Cross,
    Partial,
}

#[derive(Debug, Args)]
struct CollisionArgs {
    #[arg(long)]
    p1: f64,
    #[arg(long)]
    p2: f64,
    /// Evaluate U and ρ at this joint probability as well.
    #[arg(long)]
    p11: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum TworayCommand {
    /// CSV of distance, x1, x2.
    Trace(TworayArgs),
    /// Correlation of the two envelopes over the distance grid.
    Corr(TworayArgs),
}

#[derive(Debug, Args)]
struct TworayArgs {
    #[arg(long, default_value_t = 2e9)]
    f: f64,
    #[arg(long, default_value_t = 10.0)]
    htx: f64,
    #[arg(long, default_value_t = 1.0)]
    h1: f64,
    #[arg(long, default_value_t = 0.05)]
    dh: f64,
    #[arg(long, default_value_t = 1.0)]
    a1: f64,
    #[arg(long, default_value_t = 0.5)]
    a2: f64,
    /// Distance grid as start:stop:points.
    #[arg(long, default_value = "20:50:100000")]
    d: String,
}

impl TworayArgs {
    fn geometry(&self) -> TwoRayGeometry {
        TwoRayGeometry {
            a1: self.a1,
            a2: self.a2,
            f: self.f,
            h_tx: self.htx,
            h1: self.h1,
            dh: self.dh,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig1,
    Fig2,
    Example1,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    #[arg(value_enum)]
    figure: Figure,
    /// Directory receiving the generated files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

/// Parse `start:stop:step` into an inclusive grid.
fn parse_step_range(s: &str) -> Result<Vec<f64>> {
    let v = split3(s)?;
    let (start, stop, step) = (v[0], v[1], v[2]);
    if step.is_nan() || step <= 0.0 || stop < start {
        return Err(Error::parse(s, "expected start <= stop and step > 0"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(Error::parse(s, "too many grid points"));
    }
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

/// Parse `start:stop:points` into a linspace.
fn parse_point_range(s: &str) -> Result<Vec<f64>> {
    let v = split3(s)?;
    let n = v[2];
    if !(n >= 1.0 && n.fract() == 0.0 && n <= 1e8) || v[1] < v[0] {
        return Err(Error::parse(
            s,
            "expected start <= stop and a positive point count",
        ));
    }
    Ok(linspace(v[0], v[1], n as usize))
}

fn split3(s: &str) -> Result<[f64; 3]> {
    let v = s
        .split(':')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| Error::parse(s, e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    <[f64; 3]>::try_from(v).map_err(|_| Error::parse(s, "expected a:b:c"))
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("result types serialize");
    s.push('\n');
    s
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_default()
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|e| Error::parse(&v, format!("{SEED_ENV}: {e}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    csv(
        "snr,min,max,ind",
        rows.iter().map(|r| {
            vec![
                fmt_sig(r.param),
                fmt_sig(r.lower),
                fmt_sig(r.upper),
                fmt_sig(r.independent),
            ]
        }),
    )
}

fn trace_csv(geom: &TwoRayGeometry, grid: &[f64]) -> Result<String> {
    let rows = geom.envelope_trace(grid)?;
    Ok(csv(
        "distance,x1,x2",
        rows.iter()
            .map(|r| vec![fmt_sig(r.distance), fmt_sig(r.x1), fmt_sig(r.x2)]),
    ))
}

fn sweep(
    spec: &CostSpec,
    snrs: &[f64],
    fx: &Marginal,
    fy: &Marginal,
    cfg: &QuadratureConfig,
) -> Result<Vec<SweepRow>> {
    // the family must take a noise power
    spec.with("s", 1.0).build()?;
    let domain = transport::working_domain(fx, fy)?;
    transport::bounds_sweep(
        |snr| spec.with("s", costs::noise_from_snr_db(snr)).build(),
        snrs,
        fx,
        fy,
        cfg,
        domain,
    )
}

/// Envelope-table preset: distances 20–50 m.
const FIG1_GRID: usize = 3001;
const FIG1_SPACINGS: [f64; 2] = [0.05, 0.1];

fn example1() -> Result<transport::BoundsResult> {
    let c = costs::builtin("sinr", &[])?;
    let fx = Marginal::exponential(1.0)?;
    let fy = Marginal::exponential(2.0)?;
    let report = monge::check_cross_difference(
        &c,
        transport::working_domain(&fx, &fy)?,
        64,
        monge::CROSS_TOL,
    )?;
    transport::bounds_with_independent(&c, &fx, &fy, &QuadratureConfig::default(), &report)
}

#[derive(Serialize)]
struct ReproduceSummary {
    figure: &'static str,
    preset: serde_json::Value,
    files: Vec<String>,
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<String> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, body)?;
    Ok(path.display().to_string())
}

fn reproduce(args: &ReproduceArgs) -> Result<String> {
    let dir = &args.out_dir;
    let summary = match args.figure {
        Figure::Fig1 => {
            let grid = linspace(20.0, 50.0, FIG1_GRID);
            let base = TwoRayGeometry::default();
            let mut files = Vec::new();
            for dh in FIG1_SPACINGS {
                let body = trace_csv(&base.with_dh(dh), &grid)?;
                files.push(write_file(
                    dir,
                    &format!("fig1_envelopes_dh{dh}.csv"),
                    &body,
                )?);
            }
            ReproduceSummary {
                figure: "fig1",
                preset: serde_json::json!({
                    "a1": base.a1, "a2": base.a2, "f": base.f, "h_tx": base.h_tx,
                    "h1": base.h1, "dh": FIG1_SPACINGS, "d": [20.0, 50.0, FIG1_GRID],
                }),
                files,
            }
        }
        Figure::Fig2 => {
            let spec: CostSpec = "mac_rate1".parse()?;
            let fx = Marginal::exponential(1.0)?;
            let snrs = parse_step_range("-5:20:1")?;
            let rows = sweep(&spec, &snrs, &fx, &fx, &QuadratureConfig::default())?;
            let file = write_file(dir, "fig2_mac_rate_bounds.csv", &sweep_csv(&rows))?;
            ReproduceSummary {
                figure: "fig2",
                preset: serde_json::json!({
                    "cost": "mac_rate1", "fx": "exp:1", "fy": "exp:1", "snr_db": [-5, 20, 1],
                }),
                files: vec![file],
            }
        }
        Figure::Example1 => {
            let r = example1()?;
            let file = write_file(dir, "example1.json", &json(&r))?;
            ReproduceSummary {
                figure: "example1",
                preset: serde_json::json!({ "cost": "sinr", "fx": "exp:1", "fy": "exp:2" }),
                files: vec![file],
            }
        }
    };
    Ok(json(&summary))
}

fn execute(cli: &Cli) -> Result<String> {
    let format = cli.format;
    match &cli.command {
        Command::Bounds(a) => {
            let c = costs::parse(&a.cost)?;
            let fx: Marginal = a.fx.parse()?;
            let fy: Marginal = a.fy.parse()?;
            let domain = match &a.domain {
                Some(d) => d.parse::<Rect>()?,
                None => transport::working_domain(&fx, &fy)?,
            };
            let report = monge::check_cross_difference(&c, domain, 64, monge::CROSS_TOL)?;
            let cfg = a.quad.config();
            let r = if a.independent {
                transport::bounds_with_independent(&c, &fx, &fy, &cfg, &report)?
            } else {
                transport::bounds(&c, &fx, &fy, &cfg, &report)?
            };
            let format = if a.csv {
                Format::Csv
            } else if a.json {
                Format::Json
            } else {
                format
            };
            Ok(match format {
                Format::Json => json(&r),
                Format::Csv => csv(
                    "lower,upper,independent,lower_err,upper_err,classification",
                    [vec![
                        fmt_sig(r.lower),
                        fmt_sig(r.upper),
                        opt(r.independent),
                        fmt_sig(r.lower_err),
                        fmt_sig(r.upper_err),
                        r.classification_used.to_string(),
                    ]],
                ),
            })
        }
        Command::Sweep(a) => {
            let spec: CostSpec = a.cost.parse()?;
            let fx: Marginal = a.fx.parse()?;
            let fy: Marginal = a.fy.parse()?;
            let snrs = parse_step_range(&a.snr_db)?;
            let rows = sweep(&spec, &snrs, &fx, &fy, &a.quad.config())?;
            Ok(match format {
                Format::Json => json(&rows),
                Format::Csv => sweep_csv(&rows),
            })
        }
        Command::Mc(a) => {
            let c = costs::parse(&a.cost)?;
            let fx: Marginal = a.fx.parse()?;
            let fy: Marginal = a.fy.parse()?;
            let coupling: Coupling = a.coupling.parse()?;
            let seed = resolve_seed(a.seed)?;
            let e = sampler::mc_expectation(&c, &fx, &fy, coupling, a.n, seed)?;
            Ok(match format {
                Format::Json => json(&e),
                Format::Csv => csv(
                    "value,stderr,n,seed",
                    [vec![
                        fmt_sig(e.value),
                        fmt_sig(e.stderr),
                        e.n.to_string(),
                        e.seed.to_string(),
                    ]],
                ),
            })
        }
        Command::Monge(a) => {
            let c = costs::parse(&a.cost)?;
            let domain: Rect = a.domain.parse()?;
            let report = match (a.method, a.tol) {
                (MethodArg::Cross, None) => monge::check(&c, domain, a.grid, Method::Cross)?,
                (MethodArg::Partial, None) => monge::check(&c, domain, a.grid, Method::Partial)?,
                (MethodArg::Cross, Some(t)) => {
                    monge::check_cross_difference(&c, domain, a.grid, t)?
                }
                (MethodArg::Partial, Some(t)) => {
                    let scale = (domain.x1 - domain.x0).max(domain.y1 - domain.y0);
                    monge::check_mixed_partial(
                        &c,
                        domain,
                        a.grid,
                        monge::PARTIAL_REL_STEP * scale,
                        t,
                    )?
                }
            };
            Ok(match format {
                Format::Json => json(&report),
                Format::Csv => csv(
                    "classification,max_violation,violation_count",
                    [vec![
                        report.classification.to_string(),
                        fmt_sig(report.max_violation),
                        report.violation_count.to_string(),
                    ]],
                ),
            })
        }
        Command::Collision(a) => {
            let spec = CollisionSpec::new(a.p1, a.p2)?;
            let r = collision::analyze(&spec);
            let point = a.p11.map(|p| collision::point(&spec, p)).transpose()?;
            Ok(match format {
                Format::Json => {
                    let mut v = serde_json::to_value(&r).expect("serializable");
                    if let Some(p) = &point {
                        v["point"] = serde_json::to_value(p).expect("serializable");
                    }
                    let mut s = v.to_string();
                    s.push('\n');
                    s
                }
                Format::Csv => {
                    let rho = r.rho_range;
                    let mut header =
                        "p1,p2,u_independent,p11_min,p11_max,u_min,u_max,rho_min,rho_max"
                            .to_string();
                    let mut row = vec![
                        fmt_sig(r.p1),
                        fmt_sig(r.p2),
                        fmt_sig(r.u_independent),
                        fmt_sig(r.p11_range[0]),
                        fmt_sig(r.p11_range[1]),
                        fmt_sig(r.u_range[0]),
                        fmt_sig(r.u_range[1]),
                        opt(rho.map(|v| v[0])),
                        opt(rho.map(|v| v[1])),
                    ];
                    if let Some(p) = &point {
                        header.push_str(",p11,u,rho");
                        row.extend([fmt_sig(p.p11), fmt_sig(p.u), opt(p.rho)]);
                    }
                    csv(&header, [row])
                }
            })
        }
        Command::Tworay { command } => match command {
            TworayCommand::Trace(a) => {
                let grid = parse_point_range(&a.d)?;
                let geom = a.geometry();
                match format {
                    Format::Csv => trace_csv(&geom, &grid),
                    Format::Json => Ok(json(&geom.envelope_trace(&grid)?)),
                }
            }
            TworayCommand::Corr(a) => {
                let v = split3(&a.d)?;
                let n = v[2] as usize;
                let rho = a.geometry().envelope_correlation(v[0], v[1], n)?;
                Ok(match format {
                    Format::Json => json(&serde_json::json!({
                        "rho": crate::numfmt::round_sig(rho),
                        "n": n,
                    })),
                    Format::Csv => csv("rho,n", [vec![fmt_sig(rho), n.to_string()]]),
                })
            }
        },
        Command::Reproduce(a) => reproduce(a),
    }
}

/// Run with explicit output sinks; returns the process exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let first = e.to_string();
            let first = first
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            let _ = writeln!(err, "error: usage: {first}");
            return 1;
        }
    };
    let result = execute(&cli).and_then(|body| {
        match &cli.out {
            Some(path) => fs::write(path, body)?,
            None => out.write_all(body.as_bytes())?,
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.to_string().replace('\n', " "));
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

/// Run against the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}
