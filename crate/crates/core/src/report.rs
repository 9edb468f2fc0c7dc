//! Number formatting shared by the text exports.

/// Significant digits used in every numeric export.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Decimal rendering with [`SIGNIFICANT_DIGITS`] significant digits.
///
/// Magnitudes in `[1e-4, 1e12)` are written positionally, everything else in
/// scientific notation; trailing zeros are kept so columns line up.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", SIGNIFICANT_DIGITS - 1, 0.0);
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_sig(0.187_298_598_568_77), "0.187298598569");
        assert_eq!(format_sig(1.0), "1.00000000000");
        assert_eq!(format_sig(-2.5e-9), "-2.50000000000e-9");
        assert_eq!(format_sig(0.0), "0.00000000000");
        assert_eq!(format_sig(12345.678), "12345.6780000");
        assert_eq!(format_sig(f64::NAN), "NaN");
    }
}
