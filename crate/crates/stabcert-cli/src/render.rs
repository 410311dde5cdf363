//! Output formatting helpers.

/// Formats a float with 12 significant digits, so printed tables and CSV
/// files carry enough precision to reproduce comparisons exactly.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let s = format!("{x:.11e}");
    // trim a bare exponent of zero for readability ("5.00000000000e0" → 5.0…)
    match s.strip_suffix("e0") {
        Some(head) => head.to_string(),
        None => s,
    }
}

#[cfg(test)]
mod tests {
    use super::fmt12;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt12(5.0), "5.00000000000");
        assert_eq!(fmt12(0.0), "0");
        assert!(fmt12(6.65685424949238).starts_with("6.6568542494"));
        assert!(fmt12(1.0e-9).contains("e-9"));
    }
}
