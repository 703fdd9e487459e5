//! CSV artifacts and JSON sidecars. Column layouts are fixed:
//! `lambda,n_hat,stderr` for IDS curves, `t,log_value,kind` for Laplace
//! curves, `t,log_s,stderr` for path estimates. Floats print with Rust's
//! shortest round-trip formatting, so identical runs emit identical bytes.

use crate::error::{Error, Result};
use crate::fit::TailCurve;
use crate::fk::PathEstimate;
use crate::ids::{IdsCurve, LaplaceCurve};
use std::fs;
use std::io::Write;
use std::path::Path;

pub fn write_ids_csv(path: &Path, curve: &IdsCurve) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "lambda,n_hat,stderr")?;
    for j in 0..curve.lambda_grid.len() {
        writeln!(
            f,
            "{},{},{}",
            curve.lambda_grid[j], curve.n_hat[j], curve.stderr[j]
        )?;
    }
    Ok(())
}

pub fn write_laplace_csv(path: &Path, curve: &LaplaceCurve) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "t,log_value,kind")?;
    for j in 0..curve.t_grid.len() {
        writeln!(
            f,
            "{},{},{}",
            curve.t_grid[j],
            curve.log_values[j],
            curve.kind.label()
        )?;
    }
    Ok(())
}

pub fn write_fk_csv(path: &Path, est: &PathEstimate) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "t,log_s,stderr")?;
    for j in 0..est.t_grid.len() {
        writeln!(f, "{},{},{}", est.t_grid[j], est.log_s[j], est.stderr[j])?;
    }
    Ok(())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)
        .map_err(|e| Error::resource(format!("json write: {e}")))?;
    writeln!(f)?;
    Ok(())
}

/// Read a curve back for fitting. Accepts the IDS layout
/// (`lambda,n_hat,stderr`, log taken here) and the Laplace layout
/// (`t,log_value,kind`).
pub fn read_curve_csv(path: &Path) -> Result<TailCurve> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::config(format!("{}: empty file", path.display())))?;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let mut xs = Vec::new();
    let mut lv = Vec::new();
    let mut se = Vec::new();
    let parse = |s: &str, line: usize| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::config(format!("{}:{line}: bad number {s:?}: {e}", path.display())))
    };
    match cols.as_slice() {
        ["lambda", "n_hat", "stderr"] => {
            for (i, line) in lines.enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let f: Vec<&str> = line.split(',').collect();
                if f.len() != 3 {
                    return Err(Error::config(format!(
                        "{}:{}: expected 3 columns",
                        path.display(),
                        i + 2
                    )));
                }
                let lam = parse(f[0], i + 2)?;
                let n = parse(f[1], i + 2)?;
                let s = parse(f[2], i + 2)?;
                if n > 0.0 {
                    xs.push(lam);
                    lv.push(n.ln());
                    se.push(s / n);
                }
            }
        }
        ["t", "log_value", "kind"] => {
            for (i, line) in lines.enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let f: Vec<&str> = line.split(',').collect();
                if f.len() != 3 {
                    return Err(Error::config(format!(
                        "{}:{}: expected 3 columns",
                        path.display(),
                        i + 2
                    )));
                }
                xs.push(parse(f[0], i + 2)?);
                lv.push(parse(f[1], i + 2)?);
                se.push(0.0);
            }
        }
        _ => {
            return Err(Error::config(format!(
                "{}: unrecognized header {header:?}",
                path.display()
            )))
        }
    }
    Ok(TailCurve::new(xs, lv, se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::CurveMeta;
    use crate::operator::{Bc, GridSpec};
    use crate::params::{ModelParams, PotentialSpec};

    fn dummy_curve() -> IdsCurve {
        IdsCurve {
            lambda_grid: vec![0.1, 0.2],
            n_hat: vec![0.001, 0.002],
            stderr: vec![1e-5, 2e-5],
            replicates: 4,
            meta: CurveMeta {
                params: ModelParams::new(1, 1.0, 1.0, 0),
                spec: PotentialSpec::decay(1.0, 2.0, 0.1, 1e6),
                grid: Some(GridSpec::new(1, 10.0, 100, Bc::Dirichlet)),
                margin: 3,
                tail_bound: 0.0,
            },
        }
    }

    #[test]
    fn ids_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ids.csv");
        let curve = dummy_curve();
        write_ids_csv(&path, &curve).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("lambda,n_hat,stderr\n"));
        let tail = read_curve_csv(&path).unwrap();
        assert_eq!(tail.x, curve.lambda_grid);
        assert!((tail.log_value[0] - curve.n_hat[0].ln()).abs() < 1e-14);
    }

    #[test]
    fn rejects_unknown_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(read_curve_csv(&path).is_err());
    }

    #[test]
    fn identical_curves_write_identical_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.csv");
        let p2 = dir.path().join("b.csv");
        write_ids_csv(&p1, &dummy_curve()).unwrap();
        write_ids_csv(&p2, &dummy_curve()).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }
}
