//! UCI Human Activity Recognition (smartphone) dataset.
//!
//! The archive ships whitespace-separated text files with 561 features per
//! row (`train/X_train.txt`, `test/X_test.txt`) and activity labels `1..=6`
//! (`train/y_train.txt`, `test/y_test.txt`).

use std::path::Path;

use ndarray::Array2;

use super::LabeledData;
use crate::error::{HdcError, Result};

pub const UCIHAR_FEATURES: usize = 561;
pub const UCIHAR_CLASSES: usize = 6;

/// Loads `(train, test)` from the extracted archive root.
pub fn load_ucihar(dir: &Path) -> Result<(LabeledData, LabeledData)> {
    let train = load_split(dir, "train")?;
    let test = load_split(dir, "test")?;
    Ok((train, test))
}

fn load_split(dir: &Path, split: &str) -> Result<LabeledData> {
    let x_path = dir.join(split).join(format!("X_{split}.txt"));
    let y_path = dir.join(split).join(format!("y_{split}.txt"));
    let x_text = std::fs::read_to_string(&x_path).map_err(|e| HdcError::io(&x_path, e))?;
    let y_text = std::fs::read_to_string(&y_path).map_err(|e| HdcError::io(&y_path, e))?;
    let features = parse_features(&x_text, &x_path)?;
    let labels = parse_labels(&y_text, &y_path)?;
    if features.nrows() != labels.len() {
        return Err(HdcError::Parse {
            path: y_path,
            field: "count".into(),
            message: format!(
                "{} labels for {} feature rows",
                labels.len(),
                features.nrows()
            ),
        });
    }
    LabeledData::new(features, labels)
}

/// Parses a feature file; every non-empty line must carry 561 numbers.
pub fn parse_features(text: &str, path: &Path) -> Result<Array2<f64>> {
    let mut values = Vec::new();
    let mut rows = 0;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let before = values.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| HdcError::Parse {
                path: path.to_path_buf(),
                field: format!("row {}", lineno + 1),
                message: format!("not a number: {tok:?}"),
            })?;
            values.push(v);
        }
        let cols = values.len() - before;
        if cols != UCIHAR_FEATURES {
            return Err(HdcError::Parse {
                path: path.to_path_buf(),
                field: format!("row {}", lineno + 1),
                message: format!("expected {UCIHAR_FEATURES} columns, found {cols}"),
            });
        }
        rows += 1;
    }
    Ok(Array2::from_shape_vec((rows, UCIHAR_FEATURES), values).expect("row lengths checked"))
}

/// Parses a label file and maps activities `1..=6` to `0..=5`.
pub fn parse_labels(text: &str, path: &Path) -> Result<Vec<usize>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(lineno, l)| {
            let err = |message: String| HdcError::Parse {
                path: path.to_path_buf(),
                field: format!("row {}", lineno + 1),
                message,
            };
            let v: usize = l
                .trim()
                .parse()
                .map_err(|_| err(format!("not a label: {:?}", l.trim())))?;
            if !(1..=UCIHAR_CLASSES).contains(&v) {
                return Err(err(format!("label {v} outside 1..={UCIHAR_CLASSES}")));
            }
            Ok(v - 1)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, v: f64) -> String {
        vec![format!("{v:e}"); n].join(" ")
    }

    #[test]
    fn parses_rows_and_remaps_labels() {
        let text = format!("  {}\n{}\n", row(561, 0.25), row(561, -1.0));
        let x = parse_features(&text, Path::new("X")).unwrap();
        assert_eq!(x.dim(), (2, 561));
        assert_eq!(x[[0, 560]], 0.25);
        assert_eq!(x[[1, 0]], -1.0);
        assert_eq!(
            parse_labels("1\n6\n3\n", Path::new("y")).unwrap(),
            vec![0, 5, 2]
        );
    }

    #[test]
    fn short_row_names_its_row() {
        let text = format!("{}\n{}\n", row(561, 0.0), row(560, 0.0));
        let err = parse_features(&text, Path::new("X")).unwrap_err();
        assert!(
            matches!(err, HdcError::Parse { ref field, .. } if field == "row 2"),
            "{err}"
        );
    }

    #[test]
    fn label_out_of_range() {
        let err = parse_labels("1\n7\n", Path::new("y")).unwrap_err();
        assert!(matches!(err, HdcError::Parse { ref field, .. } if field == "row 2"));
        assert!(parse_labels("0\n", Path::new("y")).is_err());
    }

    #[test]
    fn loads_archive_layout() {
        let dir = tempfile::tempdir().unwrap();
        for split in ["train", "test"] {
            std::fs::create_dir(dir.path().join(split)).unwrap();
            std::fs::write(
                dir.path().join(split).join(format!("X_{split}.txt")),
                format!("{}\n{}\n", row(561, 0.5), row(561, 0.1)),
            )
            .unwrap();
            std::fs::write(
                dir.path().join(split).join(format!("y_{split}.txt")),
                "2\n5\n",
            )
            .unwrap();
        }
        let (train, test) = load_ucihar(dir.path()).unwrap();
        assert_eq!(train.len(), 2);
        assert_eq!(test.labels, vec![1, 4]);
    }
}
