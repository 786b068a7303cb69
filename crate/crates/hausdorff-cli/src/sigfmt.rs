//! Fixed-significant-digit formatting for numeric CLI output.

/// Format `v` with `sig` significant digits, choosing fixed or scientific
/// notation the way `%.{sig}g` does and trimming trailing zeros.
pub fn format_sig(v: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    // round to `sig` digits via scientific notation, then pick the layout
    let sci = format!("{:.*e}", sig - 1, v);
    let (_, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("valid exponent");
    if exp >= -4 && exp < sig as i32 {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, v))
    } else {
        let (mant, _) = sci.split_once('e').expect("scientific format");
        format!("{}e{}", trim_zeros(mant), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}
