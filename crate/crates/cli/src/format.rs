//! Deterministic numeric and table formatting.

/// Shortest round-trip decimal representation; scientific notation for
/// magnitudes at or above 1e6 or below 1e-4.
pub fn fmt_num(x: f64) -> String {
    if x != 0.0 && (x.abs() >= 1e6 || x.abs() < 1e-4) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn fmt_bool(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

/// Joins already-formatted cells into one CSV row.
pub fn csv_row(cells: &[String]) -> String {
    cells.join(",")
}
