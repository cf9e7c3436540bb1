//! Human-facing tables: six significant digits, markdown layout.

/// `x` rounded to six significant digits, without exponent notation.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = 5 - magnitude;
    if decimals >= 0 {
        let s = format!("{:.*}", decimals as usize, x);
        // a carry such as 9.999995 -> 10.00000 adds a digit; drop it
        let rounded: f64 = s.parse().unwrap_or(x);
        if rounded.abs() >= 10f64.powi(magnitude + 1) && decimals > 0 {
            format!("{:.*}", decimals as usize - 1, x)
        } else {
            s
        }
    } else {
        let scale = 10f64.powi(-decimals);
        format!("{:.0}", (x / scale).round() * scale)
    }
}

/// A markdown table with a header row.
pub fn markdown_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&format!("| {} |\n", headers.join(" | ")));
    out.push_str(&format!(
        "|{}\n",
        headers.iter().map(|_| "---|").collect::<String>()
    ));
    for row in rows {
        out.push_str(&format!("| {} |\n", row.join(" | ")));
    }
    out
}
