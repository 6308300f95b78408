//! Minimal CSV writer with fixed nine-significant-digit numbers.

use std::fmt::Write;

/// Formats `x` with nine significant digits. Plain notation is used for
/// decimal exponents in `-5..9`, scientific notation otherwise. Trailing
/// zeros are dropped, so `1.5` prints as `1.5` and `148033.0` as `148033`.
pub fn number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-5..9).contains(&exp) {
        let fixed = format!("{:.*}", (8 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub struct Table {
    out: String,
    columns: usize,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut out = header.join(",");
        out.push('\n');
        Self {
            out,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        debug_assert_eq!(cells.len(), self.columns);
        for (k, cell) in cells.iter().enumerate() {
            if k > 0 {
                self.out.push(',');
            }
            match cell {
                Cell::Text(t) => self.out.push_str(t),
                Cell::Int(v) => write!(self.out, "{v}").unwrap(),
                Cell::Num(v) => self.out.push_str(&number(*v)),
                Cell::Empty => {}
            }
        }
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}

pub enum Cell {
    Text(String),
    Int(i64),
    Num(f64),
    Empty,
}
