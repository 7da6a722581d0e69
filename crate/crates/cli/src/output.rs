use std::fmt::Write as _;

/// 17 significant digits, enough to read back the same `f64`.
pub fn real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Comma-separated table with a header row and LF line endings.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn trajectory_csv(labels: &[&str], ts: &[f64], states: &[Vec<f64>]) -> String {
    let mut header = vec!["t"];
    header.extend_from_slice(labels);
    let rows = ts.iter().zip(states).map(|(t, s)| {
        let mut row = vec![real(*t)];
        row.extend(s.iter().map(|v| real(*v)));
        row
    });
    csv(&header, rows)
}

pub fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

/// Left-aligned text table.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[&str]| {
        let parts: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(header);
    for row in rows {
        line(&row.iter().map(String::as_str).collect::<Vec<_>>());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for v in [2.0 * std::f64::consts::E, 1.0 / 3.0, -1e-300, 0.0, 123456789.0] {
            let s = real(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            assert_eq!(real(s.parse().unwrap()), s);
        }
        assert_eq!(real(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_layout() {
        let s = trajectory_csv(&["x", "y"], &[0.0], &[vec![1.0, -2.0]]);
        assert_eq!(s, "t,x,y\n0.0000000000000000e0,1.0000000000000000e0,-2.0000000000000000e0\n");
    }
}
