//! Diagnostics CSV: a fixed header followed by one row per record.
//!
//! Floats are written with 17 significant digits, so a re-read reproduces
//! every value bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use crate::diagnostics::{DiagRecord, SpinOrder};
use crate::error::{Error, Result};

const LEADING: [&str; 8] =
    ["t", "energy", "enstrophy", "helicity", "hhalf_plus", "hhalf_minus", "h3half_plus", "h3half_minus"];
const TRAILING: [&str; 8] = [
    "det_zero",
    "max_u",
    "max_omega",
    "q_dyn",
    "omega_lowpass_max",
    "momentum_x",
    "momentum_y",
    "momentum_z",
];

/// Number of columns for the given order and exponent lists.
pub fn column_count(n_list: &[u32], theta_list: &[f64]) -> usize {
    16 + 2 * n_list.len() + theta_list.len()
}

pub fn header(n_list: &[u32], theta_list: &[f64]) -> Vec<String> {
    let mut cols: Vec<String> = LEADING.iter().map(|s| s.to_string()).collect();
    for n in n_list {
        cols.push(format!("hs_plus_{n}"));
        cols.push(format!("hs_minus_{n}"));
    }
    for theta in theta_list {
        cols.push(format!("det_theta_{theta}"));
    }
    cols.extend(TRAILING.iter().map(|s| s.to_string()));
    cols
}

fn float(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.16e}");
}

pub fn row(r: &DiagRecord) -> String {
    let mut out = String::new();
    let lead = [r.t, r.energy, r.enstrophy, r.helicity, r.hhalf_plus, r.hhalf_minus, r.h3half_plus, r.h3half_minus];
    let mut first = true;
    let mut push = |out: &mut String, v: f64| {
        if !first {
            out.push(',');
        }
        first = false;
        float(out, v);
    };
    for v in lead {
        push(&mut out, v);
    }
    for s in &r.hs {
        push(&mut out, s.plus);
        push(&mut out, s.minus);
    }
    for (_, d) in &r.det_theta {
        push(&mut out, *d);
    }
    for v in [r.det_zero, r.max_u, r.max_omega] {
        push(&mut out, v);
    }
    let _ = write!(out, ",{}", r.q_dyn);
    for v in [r.omega_lowpass_max, r.momentum[0], r.momentum[1], r.momentum[2]] {
        out.push(',');
        float(&mut out, v);
    }
    out
}

/// Header plus rows as one string; the configuration is taken from the first record.
pub fn render(records: &[DiagRecord]) -> Result<String> {
    let first = records.first().ok_or(Error::EmptySeries)?;
    let n_list: Vec<u32> = first.hs.iter().map(|s| s.n).collect();
    let theta_list: Vec<f64> = first.det_theta.iter().map(|d| d.0).collect();
    let mut out = header(&n_list, &theta_list).join(",");
    out.push('\n');
    for r in records {
        out.push_str(&row(r));
        out.push('\n');
    }
    Ok(out)
}

pub fn emit_csv(records: &[DiagRecord], path: &Path) -> Result<()> {
    super::atomic_write(path, render(records)?.as_bytes())
}

pub fn parse(text: &str, path: &Path) -> Result<Vec<DiagRecord>> {
    let err = |line: usize, message: String| Error::Config { path: path.to_path_buf(), line, message };
    let mut lines = text.lines();
    let head: Vec<&str> = lines.next().ok_or(Error::EmptySeries)?.split(',').collect();
    let mut n_list = Vec::new();
    let mut theta_list = Vec::new();
    for col in &head {
        if let Some(n) = col.strip_prefix("hs_plus_") {
            n_list.push(n.parse::<u32>().map_err(|e| err(1, format!("column `{col}`: {e}")))?);
        } else if let Some(t) = col.strip_prefix("det_theta_") {
            theta_list.push(t.parse::<f64>().map_err(|e| err(1, format!("column `{col}`: {e}")))?);
        }
    }
    let expected = header(&n_list, &theta_list);
    if expected != head {
        return Err(err(1, format!("unexpected header, wanted {}", expected.join(","))));
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != head.len() {
            return Err(err(lineno, format!("{} cells, expected {}", cells.len(), head.len())));
        }
        let q_col = head.iter().position(|c| *c == "q_dyn").expect("q_dyn column");
        let mut vals = Vec::with_capacity(cells.len());
        for (j, c) in cells.iter().enumerate() {
            if j == q_col {
                vals.push(0.0);
            } else {
                vals.push(c.parse::<f64>().map_err(|e| err(lineno, format!("column `{}`: {e}", head[j])))?);
            }
        }
        let q_dyn = cells[q_col].parse::<u32>().map_err(|e| err(lineno, format!("column `q_dyn`: {e}")))?;
        let mut it = vals.into_iter();
        let mut next = || it.next().expect("cell count checked");
        let lead: Vec<f64> = (0..8).map(|_| next()).collect();
        let hs = n_list.iter().map(|&n| SpinOrder { n, plus: next(), minus: next() }).collect();
        let det_theta = theta_list.iter().map(|&t| (t, next())).collect();
        let det_zero = next();
        let max_u = next();
        let max_omega = next();
        next();
        let omega_lowpass_max = next();
        let momentum = [next(), next(), next()];
        records.push(DiagRecord {
            t: lead[0],
            energy: lead[1],
            enstrophy: lead[2],
            helicity: lead[3],
            hhalf_plus: lead[4],
            hhalf_minus: lead[5],
            h3half_plus: lead[6],
            h3half_minus: lead[7],
            hs,
            det_theta,
            det_zero,
            max_u,
            max_omega,
            q_dyn,
            omega_lowpass_max,
            momentum,
        });
    }
    Ok(records)
}

pub fn read_csv(path: &Path) -> Result<Vec<DiagRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn record(t: f64) -> DiagRecord {
        DiagRecord {
            t,
            energy: 1.0 / 3.0,
            enstrophy: std::f64::consts::PI,
            helicity: -1e-300,
            hhalf_plus: 0.1,
            hhalf_minus: 0.2,
            h3half_plus: 0.3,
            h3half_minus: 0.4,
            hs: vec![SpinOrder { n: 0, plus: 1.5, minus: 2.5 }, SpinOrder { n: 4, plus: 7.0, minus: 0.0 }],
            det_theta: vec![(0.5, -3.0), (1.3, 1e20)],
            det_zero: 0.0,
            max_u: 2.0,
            max_omega: 5.0,
            q_dyn: 3,
            omega_lowpass_max: 1.25,
            momentum: [0.0, -0.0, 1e-17],
        }
    }

    #[test]
    fn schema() {
        let h = header(&[0, 4], &[0.5, 1.3]);
        assert_eq!(h.len(), column_count(&[0, 4], &[0.5, 1.3]));
        assert_eq!(h[8], "hs_plus_0");
        assert_eq!(h[12], "det_theta_0.5");
        assert_eq!(h.last().unwrap(), "momentum_z");
        assert_eq!(header(&[], &[]).len(), 16);
    }

    #[test]
    fn one_record_two_lines() {
        let text = render(&[record(0.0)]).unwrap();
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn round_trip_is_exact() {
        let recs = vec![record(0.0), record(0.1)];
        let back = parse(&render(&recs).unwrap(), &PathBuf::from("mem")).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in recs.iter().zip(&back) {
            assert_eq!(row(a), row(b));
            assert_eq!(a.energy.to_bits(), b.energy.to_bits());
        }
    }

    #[test]
    fn rejects_ragged_rows() {
        let mut text = render(&[record(0.0)]).unwrap();
        text.push_str("1,2,3\n");
        assert!(parse(&text, &PathBuf::from("mem")).is_err());
        assert!(matches!(render(&[]), Err(Error::EmptySeries)));
    }
}
