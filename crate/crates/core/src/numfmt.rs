//! Number formatting shared by the text, CSV and structured outputs.

/// `x` rounded to 12 significant digits, trailing zeros trimmed. Plain
/// notation for magnitudes in [1e-5, 1e15), scientific otherwise.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..15).contains(&e) {
        let decimals = (11 - e).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, exp) = s.split_once('e').expect("scientific format");
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

/// Parses back [`sig12`] so structured output carries the printed value.
pub fn round12(x: f64) -> f64 {
    sig12(x).parse().unwrap_or(x)
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(sig12(0.455_228_138_815_543_9), "0.455228138816");
        assert_eq!(sig12(5000.0), "5000");
        assert_eq!(sig12(-2.5), "-2.5");
        assert_eq!(sig12(4.553_586_727_144_452e-12), "4.55358672714e-12");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(20_867.919_004_335_693), "20867.9190043");
        assert_eq!(sig12(0.0), "0");
    }

    #[test]
    fn round_trip() {
        assert_eq!(round12(0.1 + 0.2), 0.3);
    }
}
