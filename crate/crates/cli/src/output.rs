//! Human-readable formatting. JSON output never goes through here.

use choirt::linalg::{ComplexMatrix, C64};
use serde_json::Value;

/// Values this small print as `0` in human mode.
pub const DISPLAY_ZERO: f64 = 1e-10;

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// 12 significant digits, trailing zeros dropped.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x.abs() < DISPLAY_ZERO {
        return "0".into();
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..12).contains(&e) {
        let prec = (11 - e) as usize;
        trim(&format!("{x:.prec$}")).to_string()
    } else {
        let s = format!("{x:.11e}");
        let (m, exp) = s.split_once('e').expect("exponent form");
        format!("{}e{exp}", trim(m))
    }
}

pub fn complex(z: C64) -> String {
    let (re, im) = (z.re.abs() >= DISPLAY_ZERO, z.im.abs() >= DISPLAY_ZERO);
    match (re, im) {
        (_, false) => num(z.re),
        (false, true) => format!("{}i", num(z.im)),
        (true, true) => {
            let sign = if z.im < 0.0 { '-' } else { '+' };
            format!("{}{sign}{}i", num(z.re), num(z.im.abs()))
        }
    }
}

/// One bracketed row per line, each prefixed by `indent`.
pub fn matrix(m: &ComplexMatrix, indent: &str) -> String {
    (0..m.rows())
        .map(|r| {
            let row: Vec<String> = (0..m.cols()).map(|c| complex(m[(r, c)])).collect();
            format!("{indent}[{}]", row.join(", "))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn json(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(num(0.2), "0.2");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(-3.5e-11), "0");
        assert_eq!(num(1.0 / 3.0), "0.333333333333");
        assert_eq!(num(2.0 / 3.0 * 1e-7), "6.66666666667e-8");
        assert_eq!(num(123456789.123456789), "123456789.123");
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn complex_numbers() {
        assert_eq!(complex(C64::new(0.5, -0.5)), "0.5-0.5i");
        assert_eq!(complex(C64::new(0.0, 0.25)), "0.25i");
        assert_eq!(complex(C64::new(1e-12, 1e-12)), "0");
    }
}
