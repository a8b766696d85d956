//! Number formatting for CSV and JSON output.

/// Format with 17 significant digits in the style of C's `%.17g`.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if neg { "-" } else { "" };
    if (-5..17).contains(&exp) {
        let s = if exp >= 0 {
            let split = (exp + 1) as usize;
            format!("{}.{}", &digits[..split], &digits[split..])
        } else {
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
        };
        let s = s.trim_end_matches('0').trim_end_matches('.');
        format!("{sign}{s}")
    } else {
        let frac = digits[1..].trim_end_matches('0');
        let m = if frac.is_empty() { digits[..1].to_string() } else { format!("{}.{}", &digits[..1], frac) };
        let es = if exp < 0 { '-' } else { '+' };
        format!("{sign}{m}e{es}{:02}", exp.abs())
    }
}

/// A JSON number carrying exactly the [`fmt17`] digits; non-finite values
/// become `null`.
pub fn json_f64(x: f64) -> serde_json::Value {
    if !x.is_finite() {
        return serde_json::Value::Null;
    }
    let n: serde_json::Number = fmt17(x).parse().expect("finite number");
    serde_json::Value::Number(n)
}

/// Join values into one CSV row.
pub fn csv_row(values: &[f64]) -> String {
    values.iter().map(|v| fmt17(*v)).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g17() {
        assert_eq!(fmt17((1.0f64 / 3.0).sqrt()), "0.57735026918962573");
        assert_eq!(fmt17(0.5), "0.5");
        assert_eq!(fmt17(-2.0), "-2");
        assert_eq!(fmt17(1e-7), "9.9999999999999995e-08");
        assert_eq!(fmt17(123456.0), "123456");
        assert_eq!(fmt17(1e20), "1e+20");
    }

    #[test]
    fn roundtrips_bit_exactly() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI, 1e-300, 6.02e23, -7.5e-9] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_numbers_keep_digits() {
        let v = json_f64(0.1);
        assert_eq!(v.to_string(), "0.10000000000000001");
        assert_eq!(json_f64(f64::NAN), serde_json::Value::Null);
    }
}
