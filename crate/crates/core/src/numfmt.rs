//! Fixed-precision number output shared by the CLI writers.

/// Significant digits kept in every emitted number.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Round `x` to [`SIGNIFICANT_DIGITS`] significant digits.
///
/// Non-finite values pass through unchanged.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

/// Shortest decimal text of `round_sig(x)`.
pub fn fmt_sig(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        // avoid "-0"
        return "0".to_string();
    }
    format!("{r}")
}

/// Serde adapter: serialize an `f64` rounded to [`SIGNIFICANT_DIGITS`].
pub fn ser_sig<S: serde::Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig(*x))
}

pub fn ser_sig_opt<S: serde::Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_some(&round_sig(*v)),
        None => s.serialize_none(),
    }
}

pub fn ser_sig_pair<S: serde::Serializer>(x: &[f64; 2], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&round_sig(x[0]))?;
    t.serialize_element(&round_sig(x[1]))?;
    t.end()
}

pub fn ser_sig_pair_opt<S: serde::Serializer>(
    x: &Option<[f64; 2]>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_some(&[round_sig(v[0]), round_sig(v[1])]),
        None => s.serialize_none(),
    }
}
