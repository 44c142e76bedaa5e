//! CSV readers for tables, matrices, sample batches and point lists.
//!
//! Dialect: comma separated, `.` decimals, `#` starts a comment line, UTF-8.
//! Matrix files may hold several matrices separated by a line `---`.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::discrete::{CoordinateChannel, JointTable};

use super::CliError;

/// A non-comment CSV record with its 1-based line number.
struct Line {
    number: u64,
    fields: Vec<String>,
}

/// Raw bytes of an input file plus its digest.
pub struct InputFile {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

impl InputFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let bytes = fs::read(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Self {
            path: path.to_path_buf(),
            bytes,
        })
    }

    pub fn digest(&self) -> String {
        format!("sha256:{:x}", Sha256::digest(&self.bytes))
    }

    fn name(&self) -> String {
        self.path.display().to_string()
    }

    fn parse_error(&self, line: u64, msg: impl Into<String>) -> CliError {
        CliError::Parse {
            path: self.name(),
            line,
            msg: msg.into(),
        }
    }

    /// Comment (`#`) and blank lines are skipped; line numbers count every
    /// physical line of the file.
    fn lines(&self) -> Result<Vec<Line>, CliError> {
        let text = std::str::from_utf8(&self.bytes).map_err(|e| {
            let line = self.bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() as u64 + 1;
            self.parse_error(line, "invalid UTF-8")
        })?;
        Ok(text
            .lines()
            .enumerate()
            .filter_map(|(i, raw)| {
                let content = raw.trim();
                if content.is_empty() || content.starts_with('#') {
                    return None;
                }
                Some(Line {
                    number: i as u64 + 1,
                    fields: content.split(',').map(|f| f.trim().to_owned()).collect(),
                })
            })
            .collect())
    }

    fn parse_f64(&self, line: u64, field: &str) -> Result<f64, CliError> {
        let v: f64 = field
            .parse()
            .map_err(|_| self.parse_error(line, format!("not a number: {field:?}")))?;
        if !v.is_finite() {
            return Err(self.parse_error(line, format!("non-finite value {field:?}")));
        }
        Ok(v)
    }

    fn parse_usize(&self, line: u64, field: &str) -> Result<usize, CliError> {
        field
            .parse()
            .map_err(|_| self.parse_error(line, format!("not a nonnegative integer: {field:?}")))
    }

    /// `sizes,k1,k2,...` followed by `i1,i2,...,prob` lines; omitted cells are 0.
    pub fn joint_table(&self) -> Result<JointTable, CliError> {
        let lines = self.lines()?;
        let (header, cells) = lines
            .split_first()
            .ok_or_else(|| self.parse_error(1, "empty table file"))?;
        if header.fields.first().map(String::as_str) != Some("sizes") {
            return Err(self.parse_error(header.number, "first line must be `sizes,k1,k2,...`"));
        }
        let sizes = header.fields[1..]
            .iter()
            .map(|f| self.parse_usize(header.number, f))
            .collect::<Result<Vec<_>, _>>()?;
        let len = sizes
            .iter()
            .try_fold(1usize, |acc, &k| acc.checked_mul(k))
            .unwrap_or(usize::MAX);
        if sizes.len() < 2 || sizes.contains(&0) || len > 10_000_000 {
            return Err(self.parse_error(header.number, format!("unsupported alphabet sizes {sizes:?}")));
        }

        let mut probs = vec![0.0; len];
        let mut seen = vec![false; len];
        let shape = JointTable::point_mass(sizes.clone(), &vec![0; sizes.len()])?;
        for line in cells {
            if line.fields.len() != sizes.len() + 1 {
                return Err(self.parse_error(
                    line.number,
                    format!("expected {} indices and a probability", sizes.len()),
                ));
            }
            let cell = line.fields[..sizes.len()]
                .iter()
                .map(|f| self.parse_usize(line.number, f))
                .collect::<Result<Vec<_>, _>>()?;
            let idx = shape
                .flat_index(&cell)
                .map_err(|e| self.parse_error(line.number, e.to_string()))?;
            if std::mem::replace(&mut seen[idx], true) {
                return Err(self.parse_error(line.number, format!("cell {cell:?} listed twice")));
            }
            probs[idx] = self.parse_f64(line.number, &line.fields[sizes.len()])?;
        }
        Ok(JointTable::new(sizes, probs)?)
    }

    /// All matrices in the file, split on `---` lines.
    pub fn matrices(&self) -> Result<Vec<DMatrix<f64>>, CliError> {
        let mut out = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut start = 0;
        let flush = |rows: &mut Vec<Vec<f64>>, out: &mut Vec<DMatrix<f64>>, start: u64| -> Result<(), CliError> {
            if rows.is_empty() {
                return Ok(());
            }
            let width = rows[0].len();
            if let Some(bad) = rows.iter().position(|r| r.len() != width) {
                return Err(self.parse_error(start + bad as u64, format!("ragged row; expected {width} columns")));
            }
            let data: Vec<f64> = rows.iter().flatten().copied().collect();
            out.push(DMatrix::from_row_slice(rows.len(), width, &data));
            rows.clear();
            Ok(())
        };
        for line in self.lines()? {
            if line.fields.len() == 1 && line.fields[0] == "---" {
                flush(&mut rows, &mut out, start)?;
                continue;
            }
            if rows.is_empty() {
                start = line.number;
            }
            let row = line
                .fields
                .iter()
                .map(|f| self.parse_f64(line.number, f))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        flush(&mut rows, &mut out, start)?;
        if out.is_empty() {
            return Err(self.parse_error(1, "no matrix data"));
        }
        Ok(out)
    }

    pub fn matrix(&self) -> Result<DMatrix<f64>, CliError> {
        let mut all = self.matrices()?;
        if all.len() != 1 {
            return Err(self.parse_error(1, format!("expected one matrix, found {}", all.len())));
        }
        Ok(all.remove(0))
    }

    /// Every number in the file, in reading order.
    pub fn numbers(&self) -> Result<Vec<f64>, CliError> {
        let mut out = Vec::new();
        for line in self.lines()? {
            for f in &line.fields {
                out.push(self.parse_f64(line.number, f)?);
            }
        }
        Ok(out)
    }

    /// Integer-coded sample rows of equal width.
    pub fn integer_rows(&self) -> Result<Vec<Vec<usize>>, CliError> {
        let lines = self.lines()?;
        let width = lines.first().map(|l| l.fields.len()).unwrap_or(0);
        lines
            .iter()
            .map(|line| {
                if line.fields.len() != width {
                    return Err(self.parse_error(line.number, format!("ragged row; expected {width} columns")));
                }
                line.fields.iter().map(|f| self.parse_usize(line.number, f)).collect()
            })
            .collect()
    }

    /// `(R, value)` pairs.
    pub fn points(&self) -> Result<Vec<(f64, f64)>, CliError> {
        self.lines()?
            .iter()
            .map(|line| {
                if line.fields.len() != 2 {
                    return Err(self.parse_error(line.number, "expected `R,value`"));
                }
                Ok((
                    self.parse_f64(line.number, &line.fields[0])?,
                    self.parse_f64(line.number, &line.fields[1])?,
                ))
            })
            .collect()
    }

    /// One row-stochastic matrix per coordinate, in coordinate order.
    pub fn channels(&self) -> Result<Vec<CoordinateChannel>, CliError> {
        self.matrices()?
            .into_iter()
            .enumerate()
            .map(|(i, m)| CoordinateChannel::new(i, m).map_err(CliError::from))
            .collect()
    }
}
