//! CSV output with nine significant digits.

use std::fmt::Write as _;

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `%.9g`-style formatting.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

pub fn opt9(x: Option<f64>) -> String {
    x.map(sig9).unwrap_or_default()
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    buf: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Self { buf }
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            let _ = write!(self.buf, "{}", c.as_ref());
        }
        self.buf.push('\n');
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.006097722255189393), "0.00609772226");
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(1500.0), "1500");
        assert_eq!(sig9(0.16333997346592444), "0.163339973");
        assert_eq!(sig9(-2.5), "-2.5");
        assert_eq!(sig9(1.23456789012e-7), "1.23456789e-7");
        assert_eq!(sig9(3.0e12), "3e12");
        assert_eq!(sig9(9.9999999999), "10");
        assert_eq!(sig9(0.0), "0");
        assert_eq!(opt9(None), "");
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new(&["a", "b"]);
        t.row(&["1", ""]);
        assert_eq!(t.into_string(), "a,b\n1,\n");
    }
}
