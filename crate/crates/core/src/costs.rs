//! Bivariate performance functions `c(x, y)` of two nonnegative channel
//! powers.
//!
//! | Name | `c(x, y)` | Parameters |
//! |------|-----------|------------|
//! | `sinr` | `x / (1 + y)` | none |
//! | `mac_rate1` | `log_b(1 + x / (s + y))` | noise `s > 0` (default 1), or `snr_db`; `base` |
//! | `sum_rate` | `log_b(1 + x + y)` | `base` |
//! | `secret_key` | `log_b((1 + x + y) / (1 + y))` | `base` |
//! | `prop_fair` | `log_b(1 + x) · log_b(1 + y)` | `base` (default e) |
//! | `product` | `x · y` | none |
//! | `additive` | `x + y` | none |
//!
//! Rates default to base-2 logarithms. `base` accepts `2`, `e` or `10`.
//! `mac_rate1` also accepts `snr_db`, which sets `s = 10^(−snr_db/10)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::{Error, Result};

type BiFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A named bivariate cost with optional analytic mixed partial.
#[derive(Clone)]
pub struct CostFunction {
    name: String,
    params: Vec<(String, f64)>,
    eval: BiFn,
    mixed_partial: Option<BiFn>,
}

impl fmt::Debug for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CostFunction")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("analytic_mixed_partial", &self.mixed_partial.is_some())
            .finish()
    }
}

impl fmt::Display for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        for (i, (k, v)) in self.params.iter().enumerate() {
            write!(f, "{}{k}={v}", if i == 0 { ':' } else { ',' })?;
        }
        Ok(())
    }
}

impl CostFunction {
    /// Wrap an arbitrary closure.
    pub fn new<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            params: Vec::new(),
            eval: Arc::new(eval),
            mixed_partial: None,
        }
    }

    pub fn with_mixed_partial<F>(mut self, d2: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        self.mixed_partial = Some(Arc::new(d2));
        self
    }

    pub fn with_param(mut self, key: impl Into<String>, value: f64) -> Self {
        self.params.push((key.into(), value));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    /// `c(x, y)`. Inputs are channel powers and must be nonnegative.
    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        debug_assert!(x >= 0.0 && y >= 0.0, "cost evaluated at ({x}, {y})");
        (self.eval)(x, y)
    }

    /// Analytic `∂²c/∂x∂y`, when the cost provides one.
    pub fn mixed_partial(&self, x: f64, y: f64) -> Option<f64> {
        self.mixed_partial.as_ref().map(|d| d(x, y))
    }

    pub fn has_mixed_partial(&self) -> bool {
        self.mixed_partial.is_some()
    }

    /// `−c`.
    pub fn negated(&self) -> Self {
        self.scaled(-1.0).renamed(format!("neg({})", self.name))
    }

    /// `k · c`.
    pub fn scaled(&self, k: f64) -> Self {
        let f = self.eval.clone();
        let d = self.mixed_partial.clone();
        Self {
            name: format!("{k}*{}", self.name),
            params: self.params.clone(),
            eval: Arc::new(move |x, y| k * f(x, y)),
            mixed_partial: d.map(|d| Arc::new(move |x: f64, y: f64| k * d(x, y)) as BiFn),
        }
    }

    /// `(x, y) ↦ c(y, x)`.
    pub fn swapped(&self) -> Self {
        let f = self.eval.clone();
        let d = self.mixed_partial.clone();
        Self {
            name: format!("swap({})", self.name),
            params: self.params.clone(),
            eval: Arc::new(move |x, y| f(y, x)),
            mixed_partial: d.map(|d| Arc::new(move |x: f64, y: f64| d(y, x)) as BiFn),
        }
    }

    fn renamed(mut self, name: String) -> Self {
        self.name = name;
        self
    }
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 7] = [
    "sinr",
    "mac_rate1",
    "sum_rate",
    "secret_key",
    "prop_fair",
    "product",
    "additive",
];

fn log_base(v: f64) -> Result<f64> {
    // the parser maps `e` to E before we get here
    if (v - 2.0).abs() < 1e-12 || (v - std::f64::consts::E).abs() < 1e-12 || v == 10.0 {
        Ok(v)
    } else {
        Err(Error::invalid(format!(
            "log base must be 2, e or 10, got {v}"
        )))
    }
}

/// Noise power for an SNR given in dB, `s = 10^(−snr_db/10)`.
pub fn noise_from_snr_db(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Instantiate a builtin cost by name.
pub fn builtin(name: &str, params: &[(&str, f64)]) -> Result<CostFunction> {
    let name = name.trim().to_ascii_lowercase();
    let mut base = None;
    let mut noise = None;
    for &(k, v) in params {
        match k {
            "base" | "b" => base = Some(log_base(v)?),
            "s" | "noise" if name == "mac_rate1" => {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::invalid(format!(
                        "noise power s must be > 0, got {v}"
                    )));
                }
                noise = Some(v)
            }
            "snr_db" if name == "mac_rate1" => {
                if !v.is_finite() {
                    return Err(Error::invalid(format!("snr_db must be finite, got {v}")));
                }
                noise = Some(noise_from_snr_db(v))
            }
            other => {
                return Err(Error::invalid(format!(
                    "cost `{name}` takes no parameter `{other}`"
                )))
            }
        }
    }
    let uses_base = matches!(
        name.as_str(),
        "mac_rate1" | "sum_rate" | "secret_key" | "prop_fair"
    );
    if base.is_some() && !uses_base {
        return Err(Error::invalid(format!("cost `{name}` takes no log base")));
    }

    let cost = match name.as_str() {
        "sinr" => CostFunction::new("sinr", |x, y| x / (1.0 + y)),
        "mac_rate1" => {
            let s = noise.unwrap_or(1.0);
            let b = base.unwrap_or(2.0);
            let lnb = b.ln();
            CostFunction::new("mac_rate1", move |x, y| (x / (s + y)).ln_1p() / lnb)
                .with_param("s", s)
                .with_param("base", b)
                .with_mixed_partial(move |x, y| -1.0 / ((s + x + y).powi(2) * lnb))
        }
        "sum_rate" => {
            let b = base.unwrap_or(2.0);
            let lnb = b.ln();
            CostFunction::new("sum_rate", move |x, y| (x + y).ln_1p() / lnb)
                .with_param("base", b)
                .with_mixed_partial(move |x, y| -1.0 / ((1.0 + x + y).powi(2) * lnb))
        }
        "secret_key" => {
            let b = base.unwrap_or(2.0);
            let lnb = b.ln();
            CostFunction::new("secret_key", move |x, y| {
                ((1.0 + x + y) / (1.0 + y)).ln() / lnb
            })
            .with_param("base", b)
        }
        "prop_fair" => {
            let b = base.unwrap_or(std::f64::consts::E);
            let lnb2 = b.ln().powi(2);
            CostFunction::new("prop_fair", move |x, y| x.ln_1p() * y.ln_1p() / lnb2)
                .with_param("base", b)
        }
        "product" => CostFunction::new("product", |x, y| x * y).with_mixed_partial(|_, _| 1.0),
        "additive" => CostFunction::new("additive", |x, y| x + y).with_mixed_partial(|_, _| 0.0),
        _ => return Err(Error::UnknownCost(name)),
    };
    Ok(cost)
}

/// Parsed `name[:key=value,...]` cost spec.
#[derive(Debug, Clone, PartialEq)]
pub struct CostSpec {
    pub name: String,
    pub params: Vec<(String, f64)>,
}

impl CostSpec {
    pub fn build(&self) -> Result<CostFunction> {
        let params: Vec<(&str, f64)> = self.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        builtin(&self.name, &params)
    }

    /// The same spec with `key` set to `value`, replacing earlier values.
    pub fn with(&self, key: &str, value: f64) -> Self {
        let mut params: Vec<_> = self
            .params
            .iter()
            .filter(|(k, _)| k != key && !(key == "s" && k == "snr_db"))
            .cloned()
            .collect();
        params.push((key.to_string(), value));
        Self {
            name: self.name.clone(),
            params,
        }
    }
}

impl FromStr for CostSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n, Some(r)),
            None => (s, None),
        };
        let name = name.trim().to_ascii_lowercase();
        if name.is_empty() {
            return Err(Error::parse(s, "empty cost name"));
        }
        let mut params = Vec::new();
        for kv in rest.into_iter().flat_map(|r| r.split(',')) {
            let kv = kv.trim();
            if kv.is_empty() {
                continue;
            }
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::parse(s, format!("expected key=value, got `{kv}`")))?;
            let v = match v.trim() {
                "e" | "E" => std::f64::consts::E,
                t => t
                    .parse::<f64>()
                    .map_err(|e| Error::parse(s, format!("parameter `{k}`: {e}")))?,
            };
            params.push((k.trim().to_ascii_lowercase(), v));
        }
        Ok(Self { name, params })
    }
}

/// Parse and build a cost spec string such as `mac_rate1:s=0.1`.
pub fn parse(spec: &str) -> Result<CostFunction> {
    spec.parse::<CostSpec>()?.build()
}
