//! Plain-text number formatting shared by the CSV and table writers.

/// `x` with 17 significant digits: positional for moderate magnitudes,
/// scientific otherwise.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..17).contains(&e) {
        let decimals = (16 - e).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.16e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        assert_eq!(format_f64(0.0), "0");
        assert_eq!(format_f64(2.0), "2");
        assert_eq!(format_f64(112.0 / 3.0), "37.333333333333336");
        assert_eq!(format_f64(-0.1), "-0.10000000000000001");
        assert_eq!(format_f64(1e20), "1.0000000000000000e20");
        assert_eq!(format_f64(1.5e-7), "1.4999999999999999e-7");
    }

    #[test]
    fn round_trips() {
        for x in [1.0 / 3.0, -2.5e-3, 6.02e23, 123456.789, f64::MIN_POSITIVE] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
