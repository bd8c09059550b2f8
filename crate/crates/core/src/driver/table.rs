use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Column names of the results table, in file order.
pub const CSV_COLUMNS: [&str; 17] = [
    "step",
    "n_elements",
    "n_dofs",
    "i",
    "lambda_h",
    "rt_degree",
    "eta",
    "eta_sq",
    "lambda2_lower",
    "alpha",
    "fun_error_upper",
    "lambda_lower_guaranteed",
    "lambda_lower_asymptotic",
    "ref_error_a",
    "ref_lambda_gap",
    "solver_residual",
    "wall_time_s",
];

const NA: &str = "NA";

/// One result line: eigenpair `i` on refinement step `step` with the flux
/// computed in RT of degree `rt_degree`. `None` marks an inapplicable cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub step: usize,
    pub n_elements: usize,
    /// free primal degrees of freedom
    pub n_dofs: usize,
    pub i: usize,
    pub lambda_h: f64,
    pub rt_degree: usize,
    pub eta: f64,
    pub eta_sq: f64,
    /// lower bound of the eigenvalue following the guaranteed cluster
    pub lambda2_lower: Option<f64>,
    pub alpha: Option<f64>,
    pub fun_error_upper: Option<f64>,
    pub lambda_lower_guaranteed: Option<f64>,
    pub lambda_lower_asymptotic: f64,
    pub ref_error_a: Option<f64>,
    pub ref_lambda_gap: Option<f64>,
    pub solver_residual: f64,
    pub wall_time_s: f64,
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_string(), num)
}

impl Row {
    fn cells(&self) -> [String; 17] {
        [
            self.step.to_string(),
            self.n_elements.to_string(),
            self.n_dofs.to_string(),
            self.i.to_string(),
            num(self.lambda_h),
            self.rt_degree.to_string(),
            num(self.eta),
            num(self.eta_sq),
            opt(self.lambda2_lower),
            opt(self.alpha),
            opt(self.fun_error_upper),
            opt(self.lambda_lower_guaranteed),
            num(self.lambda_lower_asymptotic),
            opt(self.ref_error_a),
            opt(self.ref_lambda_gap),
            num(self.solver_residual),
            num(self.wall_time_s),
        ]
    }

    /// Numeric cells in column order, `None` for `NA`.
    pub fn values(&self) -> [Option<f64>; 17] {
        let c = |x: f64| Some(x);
        [
            c(self.step as f64),
            c(self.n_elements as f64),
            c(self.n_dofs as f64),
            c(self.i as f64),
            c(self.lambda_h),
            c(self.rt_degree as f64),
            c(self.eta),
            c(self.eta_sq),
            self.lambda2_lower,
            self.alpha,
            self.fun_error_upper,
            self.lambda_lower_guaranteed,
            c(self.lambda_lower_asymptotic),
            self.ref_error_a,
            self.ref_lambda_gap,
            c(self.solver_residual),
            c(self.wall_time_s),
        ]
    }
}

/// Writes `rows` as CSV; floats use the shortest representation that parses
/// back to the same value.
pub fn write_csv(rows: &[Row], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        other => Error::Numerical(format!("CSV encoding failed: {other:?}")),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for r in rows {
        w.write_record(r.cells()).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a table written by [`write_csv`].
pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<Row>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, path)
}

/// Parses CSV text; `origin` is used in error messages only.
pub fn parse_csv(text: &str, origin: &Path) -> Result<Vec<Row>> {
    let perr = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = rd.headers().map_err(|e| perr(1, e.to_string()))?.clone();
    if !header.iter().eq(CSV_COLUMNS.iter().copied()) {
        return Err(perr(
            1,
            format!("unexpected header, expected {}", CSV_COLUMNS.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| perr(line, e.to_string()))?;
        let cell = |j: usize| -> Result<Option<f64>> {
            let s = rec.get(j).unwrap_or("");
            if s == NA {
                return Ok(None);
            }
            s.parse::<f64>().map(Some).map_err(|_| {
                perr(
                    line,
                    format!("column {}: invalid number '{s}'", CSV_COLUMNS[j]),
                )
            })
        };
        let req = |j: usize| -> Result<f64> {
            cell(j)?.ok_or_else(|| perr(line, format!("column {} may not be NA", CSV_COLUMNS[j])))
        };
        let int = |j: usize| -> Result<usize> {
            let s = rec.get(j).unwrap_or("");
            s.parse().map_err(|_| {
                perr(
                    line,
                    format!("column {}: invalid integer '{s}'", CSV_COLUMNS[j]),
                )
            })
        };
        rows.push(Row {
            step: int(0)?,
            n_elements: int(1)?,
            n_dofs: int(2)?,
            i: int(3)?,
            lambda_h: req(4)?,
            rt_degree: int(5)?,
            eta: req(6)?,
            eta_sq: req(7)?,
            lambda2_lower: cell(8)?,
            alpha: cell(9)?,
            fun_error_upper: cell(10)?,
            lambda_lower_guaranteed: cell(11)?,
            lambda_lower_asymptotic: req(12)?,
            ref_error_a: cell(13)?,
            ref_lambda_gap: cell(14)?,
            solver_residual: req(15)?,
            wall_time_s: req(16)?,
        });
    }
    Ok(rows)
}

/// Convergence order in the mesh size from two eigenvalue errors, assuming
/// `h ~ n_elements^{-1/2}`.
pub fn observed_order(
    err_coarse: f64,
    n_coarse: usize,
    err_fine: f64,
    n_fine: usize,
) -> Option<f64> {
    if err_coarse > 0.0 && err_fine > 0.0 && n_fine > n_coarse {
        Some(2.0 * (err_coarse / err_fine).ln() / (n_fine as f64 / n_coarse as f64).ln())
    } else {
        None
    }
}

/// Plain-text overview: for every `(i, rt_degree)` the finest step with the
/// efficiency ratio `η² / (λ_h − λ)` and the observed order.
pub fn summarize(rows: &[Row]) -> String {
    let mut out = String::new();
    if rows.is_empty() {
        out.push_str("no rows\n");
        return out;
    }
    let steps = rows.iter().map(|r| r.step).max().unwrap_or(0) + 1;
    let _ = writeln!(out, "{} rows over {} steps", rows.len(), steps);
    let mut groups: BTreeMap<(usize, usize), Vec<&Row>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.i, r.rt_degree)).or_default().push(r);
    }
    let _ = writeln!(
        out,
        "{:>3} {:>3} {:>8} {:>10} {:>20} {:>12} {:>12} {:>9} {:>7} {:>20}",
        "i",
        "rt",
        "step",
        "n_dofs",
        "lambda_h",
        "eta_sq",
        "gap",
        "ratio",
        "order",
        "guaranteed_lower"
    );
    let fmt = |x: Option<f64>, w: usize, sci: bool| match x {
        Some(v) if sci => format!("{v:>w$.4e}"),
        Some(v) => format!("{v:>w$.4}"),
        None => format!("{NA:>w$}"),
    };
    for ((i, p), g) in &groups {
        let last = g[g.len() - 1];
        let order = if g.len() >= 2 {
            let prev = g[g.len() - 2];
            match (prev.ref_lambda_gap, last.ref_lambda_gap) {
                (Some(a), Some(b)) => observed_order(a, prev.n_elements, b, last.n_elements),
                _ => None,
            }
        } else {
            None
        };
        let ratio = last
            .ref_lambda_gap
            .filter(|&d| d > 0.0)
            .map(|d| last.eta_sq / d);
        let _ = writeln!(
            out,
            "{:>3} {:>3} {:>8} {:>10} {:>20.13} {} {} {} {} {}",
            i,
            p,
            last.step,
            last.n_dofs,
            last.lambda_h,
            fmt(Some(last.eta_sq), 12, true),
            fmt(last.ref_lambda_gap, 12, true),
            fmt(ratio, 9, false),
            fmt(order, 7, false),
            fmt(last.lambda_lower_guaranteed, 20, false),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(step: usize, gap: Option<f64>) -> Row {
        Row {
            step,
            n_elements: 8 << (2 * step),
            n_dofs: 3,
            i: 1,
            lambda_h: 20.8 + 1.0 / 3.0,
            rt_degree: 1,
            eta: 0.1,
            eta_sq: 0.1f64 * 0.1,
            lambda2_lower: None,
            alpha: Some(1.0 / 7.0),
            fun_error_upper: None,
            lambda_lower_guaranteed: Some(20.1),
            lambda_lower_asymptotic: 1e-300,
            ref_error_a: Some(f64::MIN_POSITIVE),
            ref_lambda_gap: gap,
            solver_residual: 3.0e-11,
            wall_time_s: 0.25,
        }
    }

    #[test]
    fn csv_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let rows = vec![row(0, Some(0.3)), row(1, None)];
        write_csv(&rows, &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back, rows);
        for (a, b) in back.iter().zip(&rows) {
            assert_eq!(a.lambda_h.to_bits(), b.lambda_h.to_bits());
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(&CSV_COLUMNS.join(",")));
        assert!(text.lines().nth(2).unwrap().contains(",NA,"));
    }

    #[test]
    fn header_only_and_bad_input() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        write_csv(&[], &path).unwrap();
        assert!(read_csv(&path).unwrap().is_empty());
        let bad = format!(
            "{}\n0,1,2,1,x,0,1,1,NA,NA,NA,NA,1,NA,NA,0,0\n",
            CSV_COLUMNS.join(",")
        );
        let e = parse_csv(&bad, Path::new("b.csv")).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        assert!(parse_csv("a,b\n", Path::new("b.csv")).is_err());
    }

    #[test]
    fn order_and_summary() {
        let o = observed_order(1e-2, 100, 1e-2 / 16.0, 400).unwrap();
        assert!((o - 4.0).abs() < 1e-12);
        assert!(observed_order(0.0, 1, 1.0, 4).is_none());
        let s = summarize(&[row(0, Some(0.04)), row(1, Some(0.01))]);
        assert!(s.contains("2 rows over 2 steps"));
        assert!(s.contains("2.0000"));
    }
}
