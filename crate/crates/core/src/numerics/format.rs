/// `x` with `digits` significant digits, trailing zeros trimmed.
///
/// Magnitudes in `[1e-5, 10^digits)` print in fixed notation, others in
/// scientific notation (`1.5e-7`).
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn trim(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::format_sig;

    #[test]
    fn examples() {
        assert_eq!(format_sig(2.0, 12), "2");
        assert_eq!(format_sig(0.0, 12), "0");
        assert_eq!(format_sig(-0.75, 12), "-0.75");
        assert_eq!(format_sig(2.0 * 2f64.sqrt(), 12), "2.82842712475");
        assert_eq!(format_sig(3.0 - 2.0 * 2f64.sqrt(), 12), "0.171572875254");
        assert_eq!(format_sig(1.5e-7, 12), "1.5e-7");
        assert_eq!(format_sig(123456789012345.0, 12), "1.23456789012e14");
    }
}
