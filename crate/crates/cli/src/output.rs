//! Deterministic text output: CSV with `.` decimals, comma separators, LF line
//! endings and 17 significant digits.

use std::fmt::Write as _;

/// 17 significant digits in scientific notation, e.g. `1.0050000000000000e1`.
pub fn fmt_float(x: f64) -> String {
    // normalize -0 so sign noise does not leak into golden files
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.header.len(), "row width matches header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write!(out, "{}", fmt_float(*v)).expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }
}

/// File name of the scaled-quantity table for one scale value.
pub fn scaled_file_name(s: f64) -> String {
    format!("scaled_s{s}.csv")
}
