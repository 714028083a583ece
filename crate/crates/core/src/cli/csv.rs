//! CSV output: `.` decimal separator, LF line endings, floats with 17
//! significant digits, and a leading `#` provenance comment.

use thiserror::Error;

/// Format a float with 17 significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// In-memory CSV document; written to disk only once complete.
#[derive(Debug, Clone)]
pub struct CsvDocument {
    text: String,
    columns: usize,
    rows: usize,
}

impl CsvDocument {
    pub fn new(provenance: &str, header: &[&str]) -> Self {
        let mut text = format!("# {provenance}\n");
        text.push_str(&header.join(","));
        text.push('\n');
        Self {
            text,
            columns: header.len(),
            rows: 0,
        }
    }

    pub fn push_row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "row width differs from header");
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("no header row")]
    MissingHeader,
    #[error("line {line}: cannot parse `{token}` as a number")]
    Parse { line: usize, token: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    Width {
        line: usize,
        expected: usize,
        found: usize,
    },
}

/// A numeric CSV table read back from disk. Empty fields become NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// `config=` value from the provenance comment, if present.
    pub digest: Option<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn values(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.column(name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

pub fn read_table(text: &str) -> Result<Table, TableError> {
    let mut digest = None;
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(d) = comment
                .split_whitespace()
                .find_map(|w| w.strip_prefix("config="))
            {
                digest = Some(d.to_string());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        match &header {
            None => header = Some(line.split(',').map(|s| s.trim().to_string()).collect()),
            Some(h) => {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != h.len() {
                    return Err(TableError::Width {
                        line: idx + 1,
                        expected: h.len(),
                        found: fields.len(),
                    });
                }
                let row = fields
                    .iter()
                    .map(|f| {
                        let f = f.trim();
                        if f.is_empty() {
                            Ok(f64::NAN)
                        } else {
                            f.parse().map_err(|_| TableError::Parse {
                                line: idx + 1,
                                token: f.to_string(),
                            })
                        }
                    })
                    .collect::<Result<Vec<f64>, _>>()?;
                rows.push(row);
            }
        }
    }
    Ok(Table {
        digest,
        header: header.ok_or(TableError::MissingHeader)?,
        rows,
    })
}
