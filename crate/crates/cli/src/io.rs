//! File ingestion: numeric CSV tables, paired samples, norm matrices, basis
//! files and joint-law documents.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use depcov::embed::{gram, BasisModel, QUAD_TOL};
use depcov::population::{DiscreteJoint, JointDocument};
use nalgebra::DMatrix;

use crate::error::{CliError, CliResult};

/// Numeric rows of a CSV file and the optional header.
#[derive(Debug)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::file(path, e))
}

/// Reads a CSV of numbers. A first row containing a non-numeric field is
/// taken as a header. With `rectangular`, every row must have the width of
/// the first.
pub fn read_rows(path: &Path, rectangular: bool) -> CliResult<Table> {
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut header = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let row = e.position().map_or(index + 1, |p| p.line() as usize);
            CliError::parse(path, row, None, e.to_string())
        })?;
        let row = record.position().map_or(index + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let parsed: Vec<Result<f64, usize>> = record
            .iter()
            .enumerate()
            .map(|(c, field)| match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(c + 1),
            })
            .collect();
        if index == 0 && parsed.iter().any(|p| p.is_err()) {
            if let Some(c) = record.iter().position(|f| f.is_empty()) {
                return Err(CliError::parse(path, row, Some(c + 1), "empty header field"));
            }
            header = Some(record.iter().map(str::to_string).collect());
            width = Some(record.len());
            continue;
        }
        if rectangular {
            match width {
                Some(w) if w != record.len() => {
                    return Err(CliError::parse(
                        path,
                        row,
                        None,
                        format!("expected {w} fields, found {}", record.len()),
                    ));
                }
                _ => width = Some(record.len()),
            }
        }
        let values = parsed
            .into_iter()
            .map(|p| {
                p.map_err(|c| {
                    CliError::parse(
                        path,
                        row,
                        Some(c),
                        format!("'{}' is not a finite number", &record[c - 1]),
                    )
                })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(CliError::parse(path, 1, None, "no data rows"));
    }
    Ok(Table { header, rows })
}

/// Splits a paired file into `x` and `y` rows. The split comes from an
/// `x1..xp,y1..yq` header or from `x_dim`.
type Rows = Vec<Vec<f64>>;

pub fn read_paired(path: &Path, x_dim: Option<usize>) -> CliResult<(Rows, Rows)> {
    let table = read_rows(path, true)?;
    let width = table.rows[0].len();
    let from_header = match &table.header {
        Some(h) => Some(header_split(path, h)?),
        None => None,
    };
    let p = match (from_header, x_dim) {
        (Some(p), Some(d)) if p != d => {
            return Err(CliError::Dimension(format!(
                "header of {} declares {p} x columns but --x-dim is {d}",
                path.display()
            )))
        }
        (Some(p), _) => p,
        (None, Some(d)) => d,
        (None, None) => {
            return Err(CliError::Config(format!(
                "{} has no x1..xp,y1..yq header; pass --x-dim",
                path.display()
            )))
        }
    };
    if p == 0 || p >= width {
        return Err(CliError::Dimension(format!(
            "cannot split {width} columns into {p} x columns and at least one y column"
        )));
    }
    Ok(table
        .rows
        .into_iter()
        .map(|mut r| {
            let y = r.split_off(p);
            (r, y)
        })
        .unzip())
}

fn header_split(path: &Path, header: &[String]) -> CliResult<usize> {
    let p = header.iter().take_while(|h| h.starts_with('x')).count();
    for (c, h) in header.iter().enumerate() {
        let expected = if c < p {
            format!("x{}", c + 1)
        } else {
            format!("y{}", c - p + 1)
        };
        if *h != expected {
            return Err(CliError::parse(
                path,
                1,
                Some(c + 1),
                format!("header field '{h}' should be '{expected}'"),
            ));
        }
    }
    Ok(p)
}

/// Plain rows without a header, as used for single-margin sample files.
pub fn read_sample(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    let table = read_rows(path, true)?;
    Ok(table.rows)
}

/// A square matrix stored one row per line.
pub fn read_matrix(path: &Path) -> CliResult<DMatrix<f64>> {
    let table = read_rows(path, true)?;
    if table.header.is_some() {
        return Err(CliError::parse(path, 1, None, "matrix files take no header"));
    }
    let rows = table.rows;
    let (r, c) = (rows.len(), rows[0].len());
    if r != c {
        return Err(depcov::Error::NotSquare { rows: r, cols: c }.into());
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

/// A basis file: the grid on the first row, the lambdas on the second, then
/// one tabulated basis function per row. The basis counts as orthonormal
/// when its Gram matrix is the identity within the quadrature tolerance.
pub fn read_basis(path: &Path) -> CliResult<BasisModel> {
    let table = read_rows(path, false)?;
    if table.header.is_some() {
        return Err(CliError::parse(path, 1, None, "basis files take no header"));
    }
    let mut rows = table.rows.into_iter();
    let grid = rows.next().unwrap_or_default();
    let lambdas = rows
        .next()
        .ok_or_else(|| CliError::parse(path, 2, None, "missing lambda row"))?;
    let basis: Vec<Vec<f64>> = rows.collect();
    if basis.len() != lambdas.len() {
        return Err(CliError::parse(
            path,
            2,
            None,
            format!("{} lambdas for {} basis rows", lambdas.len(), basis.len()),
        ));
    }
    if let Some(i) = basis.iter().position(|b| b.len() != grid.len()) {
        return Err(CliError::parse(
            path,
            i + 3,
            None,
            format!("expected {} grid values, found {}", grid.len(), basis[i].len()),
        ));
    }
    let id = path.display().to_string();
    let model = BasisModel::new(&id, grid.clone(), basis.clone(), lambdas.clone(), false)?;
    let orthonormal = gram(&model, model.m_full())?.deviation_from_identity() <= QUAD_TOL;
    if orthonormal {
        Ok(BasisModel::new(&id, grid, basis, lambdas, true)?)
    } else {
        Ok(model)
    }
}

pub fn read_joint(path: &Path) -> CliResult<DiscreteJoint> {
    let text = read_text(path)?;
    let doc: JointDocument = serde_json::from_str(&text).map_err(|e| {
        let column = (e.column() > 0).then_some(e.column());
        CliError::parse(path, e.line(), column, e.to_string())
    })?;
    Ok(DiscreteJoint::try_from(doc)?)
}

/// Destination of a report: a file, or standard output.
pub fn write_output(out: Option<&PathBuf>, content: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| CliError::file(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::file(Path::new("<stdout>"), e))
        }
    }
}

/// Rows of numbers as CSV text, using the shortest round-trip formatting.
pub fn format_rows<R: AsRef<[f64]>>(rows: &[R]) -> String {
    let mut out = String::new();
    for row in rows {
        let fields: Vec<String> = row.as_ref().iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}
