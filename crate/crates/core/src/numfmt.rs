//! Decimal formatting shared by every text output.
//!
//! Reals are written with 17 significant digits, which round-trips any `f64`
//! bit pattern through `str::parse`.

/// Formats `x` in scientific notation with 17 significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Joins `values` with `sep`, each formatted by [`real`].
pub fn reals(values: &[f64], sep: &str) -> String {
    let mut out = String::with_capacity(values.len() * 24);
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        out.push_str(&real(*v));
    }
    out
}
