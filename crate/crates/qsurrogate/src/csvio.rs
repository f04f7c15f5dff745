//! Dataset CSV files: comma separated, one header row, UTF-8.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use qsurrogate_core::bench::{Dataset, DatasetMeta, Source};

use crate::error::{Error, Result};

/// Reads a dataset. Without explicit column names the last column is the
/// target and every other column is a feature.
pub fn load_csv_dataset(
    path: &Path,
    feature_columns: Option<&[String]>,
    target_column: Option<&str>,
) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::csv(path, format!("cannot read header: {e}")))?
        .iter()
        .map(str::to_owned)
        .collect();
    if headers.len() < 2 {
        return Err(Error::csv(
            path,
            format!("need at least 2 columns, header has {}", headers.len()),
        ));
    }
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::csv(path, format!("no column named '{name}' (have {})", headers.join(", "))))
    };
    let target = match target_column {
        Some(name) => find(name)?,
        None => headers.len() - 1,
    };
    let features: Vec<usize> = match feature_columns {
        Some(names) => names.iter().map(|n| find(n)).collect::<Result<_>>()?,
        None => (0..headers.len()).filter(|&j| j != target).collect(),
    };
    if features.is_empty() {
        return Err(Error::csv(path, "no feature columns selected"));
    }
    if features.contains(&target) {
        return Err(Error::csv(
            path,
            format!("column '{}' is both feature and target", headers[target]),
        ));
    }

    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(path, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |j: usize| -> Result<f64> {
            let raw = record
                .get(j)
                .ok_or_else(|| Error::csv(path, format!("line {line}: missing column '{}'", headers[j])))?;
            raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                Error::csv(
                    path,
                    format!("line {line}, column '{}': '{raw}' is not a finite number", headers[j]),
                )
            })
        };
        inputs.push(features.iter().map(|&j| cell(j)).collect::<Result<Vec<f64>>>()?);
        targets.push(cell(target)?);
    }
    if inputs.is_empty() {
        return Err(Error::csv(path, "no data rows"));
    }
    let meta = DatasetMeta {
        source: Source::File {
            path: path.display().to_string(),
        },
        noise: None,
    };
    Ok(Dataset::new(inputs, targets, meta)?)
}

/// Feature rows plus the target column when one is present.
pub type InputRows = (Vec<Vec<f64>>, Option<Vec<f64>>);

/// Reads a CSV holding exactly `d` feature columns, or `d` features followed by
/// a target. Returns the inputs and the targets if present.
pub fn load_inputs(path: &Path, d: usize) -> Result<InputRows> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let width = reader
        .headers()
        .map_err(|e| Error::csv(path, format!("cannot read header: {e}")))?
        .len();
    if width != d && width != d + 1 {
        return Err(Error::csv(
            path,
            format!(
                "model takes {d} features but the file has {width} columns (expected {d} or {})",
                d + 1
            ),
        ));
    }
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(path, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .map(|raw| {
                raw.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::csv(path, format!("line {line}: '{raw}' is not a finite number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if width == d + 1 {
            targets.push(row[d]);
        }
        inputs.push(row[..d].to_vec());
    }
    Ok((inputs, (width == d + 1).then_some(targets)))
}

/// Writes `x0..x{d-1},y`.
pub fn write_dataset_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let mut columns: Vec<String> = (0..ds.dim()).map(|j| format!("x{j}")).collect();
    columns.push("y".into());
    let rows = ds.inputs.iter().zip(&ds.targets).map(|(x, &y)| {
        let mut row = x.clone();
        row.push(y);
        row
    });
    write_table(path, &columns, rows)
}

/// Numbers are written with the shortest representation that parses back
/// to the same `f64`.
pub fn write_table<I>(path: &Path, columns: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut out = String::new();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(bytes).map_err(|e| Error::io(path, e))
}
