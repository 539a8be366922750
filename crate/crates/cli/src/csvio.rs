//! CSV trace output with full-precision floats, so re-runs diff cleanly.

use std::fmt::Write as _;

/// 17 significant decimal digits: enough to reproduce any f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Render a header plus rows of floats.
pub fn render_csv(columns: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            first = false;
            let _ = write!(out, "{}", fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_roundtrips_f64() {
        for &v in &[0.1, -1.0 / 3.0, std::f64::consts::PI, 1e-300, -2.5e17] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(v.to_bits(), back.to_bits(), "{s}");
        }
    }

    #[test]
    fn header_only_for_empty_rows() {
        let csv = render_csv(&["a".into(), "b".into()], &[]);
        assert_eq!(csv, "a,b\n");
    }
}
