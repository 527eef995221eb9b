//! Stable number formatting shared by every report and CSV writer.

/// Twelve significant digits in fixed notation (scientific outside
/// `1e-5..1e15`), so identical inputs always print identical bytes.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.11e}")
    }
}

/// `re + im i` with both parts in [`fmt_num`] form.
pub fn fmt_complex(z: num_complex::Complex64) -> String {
    let sign = if z.im.is_sign_negative() && z.im != 0.0 { '-' } else { '+' };
    format!("{} {sign} {}i", fmt_num(z.re), fmt_num(z.im.abs()))
}

pub fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(",")
}
