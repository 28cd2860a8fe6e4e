//! Plain CSV for matrices and vectors: row-major, no header, `%.17g` numbers.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Formats like C's `%.17g`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    const P: i32 = 17;
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn parse_rows(text: &str, path: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| Error::Parse {
                    path: path.to_string(),
                    line: i + 1,
                    msg: format!("{e}: {f:?}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn parse_matrix(text: &str, path: &str) -> Result<DMatrix<f64>> {
    let rows = parse_rows(text, path)?;
    let Some(first) = rows.first() else {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            msg: "empty matrix file".into(),
        });
    };
    let n = first.len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(Error::Parse {
                path: path.into(),
                line: i + 1,
                msg: format!("expected {n} columns, found {}", r.len()),
            });
        }
    }
    let flat: Vec<f64> = rows.concat();
    Ok(DMatrix::from_row_slice(rows.len(), n, &flat))
}

/// Vectors are accepted as one row or as one value per line.
pub fn parse_vector(text: &str, path: &str) -> Result<DVector<f64>> {
    let rows = parse_rows(text, path)?;
    let values: Vec<f64> = if rows.len() == 1 {
        rows.into_iter().next().unwrap()
    } else if rows.iter().all(|r| r.len() == 1) {
        rows.into_iter().map(|r| r[0]).collect()
    } else {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            msg: "vector file must be a single row or a single column".into(),
        });
    };
    Ok(DVector::from_vec(values))
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    parse_matrix(&fs::read_to_string(path)?, &path.display().to_string())
}

pub fn read_vector(path: &Path) -> Result<DVector<f64>> {
    parse_vector(&fs::read_to_string(path)?, &path.display().to_string())
}

pub fn write_matrix<W: Write>(mut w: W, a: &DMatrix<f64>) -> Result<()> {
    for i in 0..a.nrows() {
        let row: Vec<String> = a.row(i).iter().map(|&v| fmt_f64(v)).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// A vector as one dense CSV row.
pub fn write_vector<W: Write>(mut w: W, v: &DVector<f64>) -> Result<()> {
    let row: Vec<String> = v.iter().map(|&x| fmt_f64(x)).collect();
    writeln!(w, "{}", row.join(","))?;
    Ok(())
}

pub fn save_matrix(path: &Path, a: &DMatrix<f64>) -> Result<()> {
    write_matrix(fs::File::create(path)?, a)
}

pub fn save_vector(path: &Path, v: &DVector<f64>) -> Result<()> {
    write_vector(fs::File::create(path)?, v)
}
