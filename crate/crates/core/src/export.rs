//! Plain-text tables with fixed float formatting, so repeated runs produce
//! byte-identical files.

use std::fmt::Write as _;

/// 17 significant digits: round-trips every `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.header.join(",")).unwrap();
        for row in &self.rows {
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        out
    }

    /// Parses text written by [`Self::to_csv`] (no quoting).
    pub fn from_csv(text: &str) -> Option<Self> {
        let mut lines = text.lines().filter(|l| !l.is_empty());
        let header: Vec<String> = lines.next()?.split(',').map(str::to_owned).collect();
        let mut rows = Vec::new();
        for line in lines {
            let row: Vec<String> = line.split(',').map(str::to_owned).collect();
            if row.len() != header.len() {
                return None;
            }
            rows.push(row);
        }
        Some(Self { header, rows })
    }
}

/// Columns `theta, n, k, g_k, m_k`.
pub fn schedule_table(rows: &[(f64, u32, u32, f64, u128)]) -> Table {
    let mut t = Table::new(["theta", "n", "k", "g_k", "m_k"]);
    for &(theta, n, k, g, m) in rows {
        t.push(vec![fmt_f64(theta), n.to_string(), k.to_string(), fmt_f64(g), m.to_string()]);
    }
    t
}

/// Columns `theta, n, r, norm`.
pub fn norm_table(rows: &[(f64, u32, f64, f64)]) -> Table {
    let mut t = Table::new(["theta", "n", "r", "norm"]);
    for &(theta, n, r, v) in rows {
        t.push(vec![fmt_f64(theta), n.to_string(), fmt_f64(r), fmt_f64(v)]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for &x in &[0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_round_trip() {
        let t = schedule_table(&[(0.5, 12, 9, 16.0, 13), (0.5, 12, 10, 22.627416997969522, 19)]);
        let text = t.to_csv();
        assert!(text.starts_with("theta,n,k,g_k,m_k\n"));
        assert_eq!(Table::from_csv(&text).unwrap(), t);
    }
}
