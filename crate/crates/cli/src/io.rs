//! Readers and writers for the file formats the commands use.
//!
//! * Data matrices: comma-separated decimal numbers, one sample per line, with
//!   an optional single header row. A first row is a header when none of its
//!   cells parses as a number.
//! * Pair files: two whitespace-separated numeric columns per line.
//! * Pair metadata: either `id,direction[,weight]` CSV rows with direction
//!   `1->2` or `2->1` (an optional header row is skipped), or the six-column
//!   whitespace layout `id cause_start cause_end effect_start effect_end
//!   weight`. Lines starting with `#` are ignored.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use kdep::apps::Direction;
use kdep::DataMatrix;
use ndarray::Array2;

use crate::error::{CliError, CliResult};

/// A parsed data matrix and its column names, if the file had a header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub data: DataMatrix,
    pub names: Option<Vec<String>>,
}

impl Table {
    pub fn column_names(&self, prefix: &str) -> Vec<String> {
        self.names
            .clone()
            .unwrap_or_else(|| (0..self.data.d()).map(|j| format!("{prefix}{j}")).collect())
    }
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok()
}

fn finite_number(cell: &str, source: &Path, line: u64, column: usize) -> CliResult<f64> {
    match parse_number(cell) {
        Some(v) if v.is_finite() => Ok(v),
        Some(_) => Err(CliError::at(source, line, format!("non-finite value {cell:?} in column {}", column + 1))),
        None => Err(CliError::at(source, line, format!("non-numeric cell {cell:?} in column {}", column + 1))),
    }
}

/// Parses a numeric CSV table. `source` only labels diagnostics.
pub fn parse_matrix(bytes: &[u8], source: &Path) -> CliResult<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut names = None;
    let mut width = None;
    let mut flat = Vec::new();
    let mut rows = 0usize;
    for (k, record) in reader.byte_records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::at(source, line, format!("unreadable CSV: {e}"))
        })?;
        let line = record.position().map_or(k as u64 + 1, |p| p.line());
        let cells: Vec<&str> = record
            .iter()
            .enumerate()
            .map(|(j, c)| {
                std::str::from_utf8(c)
                    .map_err(|_| CliError::at(source, line, format!("column {} is not valid UTF-8", j + 1)))
            })
            .collect::<CliResult<_>>()?;
        if cells.len() == 1 && cells[0].is_empty() {
            continue;
        }
        if k == 0 && cells.iter().all(|c| parse_number(c).is_none()) {
            names = Some(cells.iter().map(|c| c.to_string()).collect::<Vec<_>>());
            width = Some(cells.len());
            continue;
        }
        let expected = *width.get_or_insert(cells.len());
        if cells.len() != expected {
            return Err(CliError::at(
                source,
                line,
                format!("expected {expected} columns, found {}", cells.len()),
            ));
        }
        for (j, cell) in cells.iter().enumerate() {
            flat.push(finite_number(cell, source, line, j)?);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(CliError::Input(format!("{}: no data rows", source.display())));
    }
    let d = width.unwrap_or(0);
    let values = Array2::from_shape_vec((rows, d), flat).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(Table {
        data: DataMatrix::new(values)?,
        names,
    })
}

pub fn read_matrix(path: &Path) -> CliResult<Table> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_matrix(&bytes, path)
}

/// Parses a two-column whitespace-separated pair file.
pub fn parse_pair(bytes: &[u8], source: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let text = std::str::from_utf8(bytes).map_err(|_| CliError::Input(format!("{}: not valid UTF-8", source.display())))?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (k, raw) in text.lines().enumerate() {
        let line = k as u64 + 1;
        let fields: Vec<&str> = raw.split(|c: char| c.is_whitespace() || c == ',').filter(|f| !f.is_empty()).collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 2 {
            return Err(CliError::at(source, line, format!("expected 2 columns, found {}", fields.len())));
        }
        xs.push(finite_number(fields[0], source, line, 0)?);
        ys.push(finite_number(fields[1], source, line, 1)?);
    }
    if xs.is_empty() {
        return Err(CliError::Input(format!("{}: no data rows", source.display())));
    }
    Ok((xs, ys))
}

pub fn read_pair(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_pair(&bytes, path)
}

/// One metadata row. `truth` is `None` for pairs with multi-column variables,
/// which the causal command skips.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMeta {
    pub id: String,
    pub truth: Option<Direction>,
    pub weight: f64,
    pub line: u64,
}

fn parse_direction(s: &str) -> Option<Direction> {
    match s.trim() {
        "1->2" | "1→2" => Some(Direction::XcausesY),
        "2->1" | "2→1" => Some(Direction::YcausesX),
        _ => None,
    }
}

fn parse_weight(cell: &str, source: &Path, line: u64) -> CliResult<f64> {
    match parse_number(cell) {
        Some(w) if w.is_finite() && w > 0.0 => Ok(w),
        _ => Err(CliError::at(source, line, format!("weight {cell:?} must be a positive number"))),
    }
}

fn parse_index(cell: &str, source: &Path, line: u64) -> CliResult<u64> {
    cell.parse::<u64>()
        .map_err(|_| CliError::at(source, line, format!("column index {cell:?} is not a positive integer")))
}

/// Parses a metadata table in either supported layout.
pub fn parse_metadata(bytes: &[u8], source: &Path) -> CliResult<Vec<PairMeta>> {
    let text = std::str::from_utf8(bytes).map_err(|_| CliError::Input(format!("{}: not valid UTF-8", source.display())))?;
    let mut out = Vec::new();
    let mut seen_row = false;
    for (k, raw) in text.lines().enumerate() {
        let line = k as u64 + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = if trimmed.contains(',') {
            trimmed.split(',').map(str::trim).collect()
        } else {
            trimmed.split_whitespace().collect()
        };
        let first_row = !seen_row;
        seen_row = true;
        match fields.len() {
            6 => {
                let idx: Vec<u64> = fields[1..5]
                    .iter()
                    .map(|c| parse_index(c, source, line))
                    .collect::<CliResult<_>>()?;
                let truth = match (idx[0], idx[1], idx[2], idx[3]) {
                    (1, 1, 2, 2) => Some(Direction::XcausesY),
                    (2, 2, 1, 1) => Some(Direction::YcausesX),
                    _ => None,
                };
                out.push(PairMeta {
                    id: fields[0].to_string(),
                    truth,
                    weight: parse_weight(fields[5], source, line)?,
                    line,
                });
            }
            2 | 3 => {
                let Some(truth) = parse_direction(fields[1]) else {
                    if first_row {
                        continue;
                    }
                    return Err(CliError::at(
                        source,
                        line,
                        format!("direction {:?} must be 1->2 or 2->1", fields[1]),
                    ));
                };
                let weight = match fields.get(2) {
                    Some(cell) if !cell.is_empty() => parse_weight(cell, source, line)?,
                    _ => 1.0,
                };
                if fields[0].is_empty() {
                    return Err(CliError::at(source, line, "empty pair id"));
                }
                out.push(PairMeta {
                    id: fields[0].to_string(),
                    truth: Some(truth),
                    weight,
                    line,
                });
            }
            other => {
                return Err(CliError::at(
                    source,
                    line,
                    format!("expected 2, 3 or 6 fields, found {other}"),
                ))
            }
        }
    }
    Ok(out)
}

pub fn read_metadata(path: &Path) -> CliResult<Vec<PairMeta>> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_metadata(&bytes, path)
}

/// `<dir>/<id>.txt`, or `<dir>/pairNNNN.txt` for numeric ids.
pub fn resolve_pair_file(dir: &Path, meta: &PairMeta, metafile: &Path) -> CliResult<PathBuf> {
    let direct = dir.join(format!("{}.txt", meta.id));
    if direct.is_file() {
        return Ok(direct);
    }
    if let Ok(num) = meta.id.parse::<u64>() {
        let padded = dir.join(format!("pair{num:04}.txt"));
        if padded.is_file() {
            return Ok(padded);
        }
    }
    Err(CliError::at(
        metafile,
        meta.line,
        format!("no pair file for id {:?} in {}", meta.id, dir.display()),
    ))
}

/// Full-precision decimal form that re-parses to the same double. Negative
/// zero is written as zero.
pub fn fmt_float(v: f64) -> String {
    format!("{:.16e}", v + 0.0)
}

/// Writes a matrix as CSV with a header row.
pub fn write_matrix<W: Write>(out: &mut W, names: &[String], values: &Array2<f64>) -> std::io::Result<()> {
    writeln!(out, "{}", names.join(","))?;
    for row in values.rows() {
        let cells: Vec<String> = row.iter().map(|&v| fmt_float(v)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_file(path: &Path, body: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> CliResult<()> {
    let mut buf = Vec::new();
    body(&mut buf)?;
    fs::write(path, buf).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("in.csv")
    }

    #[test]
    fn headerless_and_header() {
        let t = parse_matrix(b"1,2\n3,4\n", p()).unwrap();
        assert_eq!(t.data.values(), &ndarray::array![[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(t.names, None);
        let t = parse_matrix(b"a, b\n1,2\n", p()).unwrap();
        assert_eq!(t.names, Some(vec!["a".into(), "b".into()]));
        assert_eq!(t.data.n(), 1);
    }

    #[test]
    fn diagnostics_name_line() {
        let e = parse_matrix(b"1,2\n3,x\n5,6\n", p()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("in.csv:2"), "{e}");
        let e = parse_matrix(b"1,2\n3\n", p()).unwrap_err();
        assert!(e.to_string().contains(":2:"), "{e}");
        let e = parse_matrix(b"1,2\n3,nan\n", p()).unwrap_err();
        assert!(e.to_string().contains("non-finite"), "{e}");
        assert!(parse_matrix(b"", p()).is_err());
        assert!(parse_matrix(b"a,b\n", p()).is_err());
    }

    #[test]
    fn mixed_first_row_is_data_error() {
        let e = parse_matrix(b"1,b\n1,2\n", p()).unwrap_err();
        assert!(e.to_string().contains(":1:"), "{e}");
    }

    #[test]
    fn pair_files() {
        let (x, y) = parse_pair(b"1.5 2\n\n3\t4e-1\n", p()).unwrap();
        assert_eq!(x, vec![1.5, 3.0]);
        assert_eq!(y, vec![2.0, 0.4]);
        let e = parse_pair(b"1 2 3\n", p()).unwrap_err();
        assert!(e.to_string().contains(":1:"));
    }

    #[test]
    fn metadata_layouts() {
        let m = parse_metadata(b"id,direction,weight\n1,1->2,0.5\npairA,2->1\n", p()).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].truth, Some(Direction::XcausesY));
        assert_eq!(m[0].weight, 0.5);
        assert_eq!(m[1].truth, Some(Direction::YcausesX));
        assert_eq!(m[1].weight, 1.0);
        let m = parse_metadata("0001 1 1 2 2 1\n0002 2 2 1 1 0.25\n0003 1 2 3 3 1\n".as_bytes(), p()).unwrap();
        assert_eq!(
            m.iter().map(|r| r.truth).collect::<Vec<_>>(),
            vec![Some(Direction::XcausesY), Some(Direction::YcausesX), None]
        );
        assert!(parse_metadata(b"1,1->2\n2,sideways\n", p()).is_err());
        assert!(parse_metadata(b"1,1->2,-1\n", p()).is_err());
        let m = parse_metadata("1,1→2\n".as_bytes(), p()).unwrap();
        assert_eq!(m[0].truth, Some(Direction::XcausesY));
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
        }
    }
}
