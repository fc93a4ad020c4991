//! CSV ingestion and export.
//!
//! Input follows RFC 4180 with a mandatory header row, `.` as the decimal
//! separator and UTF-8 text. The target column is mapped to `{0, 1}` by
//! sorted value order: the lexicographically smaller value becomes 0.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use locality_core::{Dataset, FeatureStats};

use crate::error::{AppError, Result};

/// Reads a binary-classification dataset from `path`.
///
/// Columns whose every cell parses as a finite number become features. A
/// column with any other cell is dropped when `drop_non_numeric` is set and
/// rejected otherwise.
pub fn load_csv(path: &Path, target_column: &str, drop_non_numeric: bool) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    let csv_err = |source| AppError::Csv { path: path.to_path_buf(), source };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    let target = header
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| AppError::MissingTarget(target_column.to_owned()))?;

    let mut records = Vec::new();
    for record in reader.records() {
        records.push(record.map_err(csv_err)?);
    }

    let classes: BTreeSet<&str> = records.iter().map(|r| r[target].trim()).collect();
    if classes.len() > 2 {
        return Err(AppError::MulticlassUnsupported(classes.len()));
    }
    let positive = classes.iter().nth(1).copied();

    let mut keep = Vec::new();
    for (j, name) in header.iter().enumerate() {
        if j == target {
            continue;
        }
        let bad = records.iter().enumerate().find(|(_, r)| parse_cell(&r[j]).is_none());
        match bad {
            None => keep.push(j),
            Some(_) if drop_non_numeric => {}
            Some((row, r)) => {
                return Err(AppError::UnparseableCell { row: row + 1, column: name.clone(), value: r[j].to_owned() })
            }
        }
    }
    if keep.is_empty() {
        return Err(AppError::NoFeatures);
    }

    let rows =
        records.iter().map(|r| keep.iter().map(|&j| parse_cell(&r[j]).expect("checked above")).collect()).collect();
    let labels = records.iter().map(|r| u8::from(Some(r[target].trim()) == positive)).collect();
    let names = keep.iter().map(|&j| header[j].clone()).collect();
    Ok(Dataset::new(rows, labels, names)?)
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Writes `data` with its feature columns followed by a `label` column.
pub fn write_dataset(data: &Dataset, path: &Path) -> Result<()> {
    let csv_err = |source| AppError::Csv { path: path.to_path_buf(), source };
    let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header: Vec<&str> = data.feature_names().iter().map(String::as_str).collect();
    header.push("label");
    writer.write_record(&header).map_err(csv_err)?;
    for (row, label) in data.rows().zip(data.labels()) {
        let mut record: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
        record.push(label.to_string());
        writer.write_record(&record).map_err(csv_err)?;
    }
    writer.flush().map_err(|e| AppError::io(path, e))
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}

/// Z-scores every column using the statistics of `reference`; constant
/// columns are only centred.
pub fn standardize(data: &Dataset, reference: &FeatureStats) -> Result<Dataset> {
    let rows = data
        .rows()
        .map(|r| {
            r.iter()
                .zip(reference.means.iter().zip(&reference.std_devs))
                .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { v - m })
                .collect()
        })
        .collect();
    Ok(Dataset::new(rows, data.labels().to_vec(), data.feature_names().to_vec())?)
}

/// Writes `bytes` to `path`, creating parent directories.
pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| AppError::io(parent, e))?;
    }
    let mut file = File::create(path).map_err(|e| AppError::io(path, e))?;
    file.write_all(bytes).map_err(|e| AppError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_simple_file() {
        let f = file("a,b,target\n1,2,yes\n3,4.5,no\n-1,0,yes\n");
        let d = load_csv(f.path(), "target", false).unwrap();
        assert_eq!((d.len(), d.dim()), (3, 2));
        assert_eq!(d.row(1), &[3.0, 4.5]);
        assert_eq!(d.labels(), &[1, 0, 1]);
    }

    #[test]
    fn drops_text_columns_on_request() {
        let f = file("a,city,target\n1,paris,0\n2,rome,1\n");
        let d = load_csv(f.path(), "target", true).unwrap();
        assert_eq!(d.feature_names(), &["a".to_string()]);
        assert!(matches!(load_csv(f.path(), "target", false), Err(AppError::UnparseableCell { row: 1, .. })));
    }

    #[test]
    fn distinct_errors() {
        let f = file("a,target\n1,x\n2,y\n3,z\n");
        assert!(matches!(load_csv(f.path(), "target", true), Err(AppError::MulticlassUnsupported(3))));
        assert!(matches!(load_csv(f.path(), "label", true), Err(AppError::MissingTarget(_))));
        let g = file("city,target\nparis,0\nrome,1\n");
        assert!(matches!(load_csv(g.path(), "target", true), Err(AppError::NoFeatures)));
        assert!(matches!(load_csv(Path::new("/definitely/not/here.csv"), "target", true), Err(AppError::Io { .. })));
    }

    #[test]
    fn export_round_trips() {
        let d = locality_core::data::generate_half_moons(20, 0.2, 4).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_dataset(&d, out.path()).unwrap();
        let back = load_csv(out.path(), "label", false).unwrap();
        assert_eq!(back, d);
    }
}
