//! Dense time-by-dimension trajectory matrices and their on-disk formats.
//!
//! Binary layout (`CTFMAT01`):
//!
//! | bytes      | content                                   |
//! |------------|-------------------------------------------|
//! | 0..8       | ASCII magic `CTFMAT01`                    |
//! | 8..16      | rows, little-endian `u64`                 |
//! | 16..24     | cols, little-endian `u64`                 |
//! | 24..       | `rows * cols` little-endian `f64`, row-major |

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, IoContext, Result};

pub const MAGIC: &[u8; 8] = b"CTFMAT01";
const HEADER_LEN: usize = 24;

/// Row-major matrix where row `i` is the system state at time step `i`.
#[derive(Clone, PartialEq)]
pub struct TimeMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl std::fmt::Debug for TimeMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TimeMatrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish_non_exhaustive()
    }
}

impl TimeMatrix {
    /// Builds a matrix whose every entry must be finite.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let m = Self::from_raw(rows, cols, data)?;
        if let Some((row, col)) = m.first_non_finite() {
            return Err(Error::NonFinite { row, col });
        }
        Ok(m)
    }

    /// Builds a matrix without the finiteness check. Used for untrusted
    /// submissions, which are validated separately.
    pub fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "matrix must have at least one row and column, got [{rows}, {cols}]"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidParameter(format!(
                "data length {} does not match shape [{rows}, {cols}]",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::from_raw(rows, cols, vec![0.0; rows * cols])
    }

    /// Matrix whose every row is `row`.
    pub fn repeat_row(row: &[f64], rows: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * row.len());
        for _ in 0..rows {
            data.extend_from_slice(row);
        }
        Self::new(rows, row.len(), data)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::InvalidParameter("ragged rows".into()));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.cols)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    /// Column `col` restricted to rows `start..end`.
    pub fn column(&self, col: usize, start: usize, end: usize) -> Vec<f64> {
        (start..end).map(|r| self.get(r, col)).collect()
    }

    /// Copy of rows `start..end`.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.rows {
            return Err(Error::InvalidParameter(format!(
                "row window {start}..{end} outside matrix with {} rows",
                self.rows
            )));
        }
        Self::from_raw(
            end - start,
            self.cols,
            self.data[start * self.cols..end * self.cols].to_vec(),
        )
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for row in self.iter_rows() {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums.iter().map(|s| s / self.rows as f64).collect()
    }

    /// Population standard deviation of each column.
    pub fn column_stds(&self) -> Vec<f64> {
        let means = self.column_means();
        let mut acc = vec![0.0; self.cols];
        for row in self.iter_rows() {
            for ((a, v), m) in acc.iter_mut().zip(row).zip(&means) {
                *a += (v - m) * (v - m);
            }
        }
        acc.iter().map(|a| (a / self.rows as f64).sqrt()).collect()
    }

    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|v| !v.is_finite())
            .map(|i| (i / self.cols, i % self.cols))
    }

    pub fn count_non_finite(&self) -> usize {
        self.data.iter().filter(|v| !v.is_finite()).count()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.rows as u64).to_le_bytes());
        out.extend_from_slice(&(self.cols as u64).to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Decodes a `CTFMAT01` buffer. The `origin` path is only used in error
    /// messages.
    pub fn from_bytes(bytes: &[u8], origin: &Path) -> Result<Self> {
        let malformed = |reason: String| Error::MalformedMatrix {
            path: origin.to_path_buf(),
            reason,
        };
        if bytes.len() < HEADER_LEN {
            return Err(malformed(format!("{} bytes is shorter than the header", bytes.len())));
        }
        if &bytes[..8] != MAGIC {
            return Err(malformed("bad magic".into()));
        }
        let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let cols = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
        let expected = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(8))
            .and_then(|n| usize::try_from(n).ok())
            .ok_or_else(|| malformed(format!("header shape [{rows}, {cols}] overflows")))?;
        let payload = &bytes[HEADER_LEN..];
        if payload.len() != expected {
            return Err(malformed(format!(
                "header declares [{rows}, {cols}] ({expected} payload bytes) but file has {} payload bytes",
                payload.len()
            )));
        }
        let data = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::from_raw(rows as usize, cols as usize, data)
            .map_err(|e| malformed(e.to_string()))
    }

    pub fn write_mat(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn read_mat(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).at(path)?;
        Self::from_bytes(&bytes, path)
    }

    /// One line per time step, comma separated, shortest round-trip decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.data.len() * 20);
        for row in self.iter_rows() {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str, origin: &Path) -> Result<Self> {
        let malformed = |reason: String| Error::MalformedMatrix {
            path: origin.to_path_buf(),
            reason,
        };
        let mut data = Vec::new();
        let mut rows = 0;
        let mut cols = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let before = data.len();
            for field in line.split(',') {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| malformed(format!("line {}: bad number {field:?}", lineno + 1)))?;
                data.push(v);
            }
            let width = data.len() - before;
            match cols {
                None => cols = Some(width),
                Some(c) if c != width => {
                    return Err(malformed(format!(
                        "line {} has {width} fields, expected {c}",
                        lineno + 1
                    )))
                }
                _ => {}
            }
            rows += 1;
        }
        Self::from_raw(rows, cols.unwrap_or(0), data).map_err(|e| malformed(e.to_string()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).at(path)?;
        Self::from_csv(&text, path)
    }

    /// Reads `.csv` files as CSV and everything else as `CTFMAT01`.
    pub fn read_any(path: &Path) -> Result<Self> {
        if path.extension().is_some_and(|e| e == "csv") {
            Self::read_csv(path)
        } else {
            Self::read_mat(path)
        }
    }
}

/// Writes `bytes` to a temporary sibling of `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).at(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).at(dir)?;
    tmp.write_all(bytes).at(path)?;
    tmp.as_file().sync_all().at(path)?;
    tmp.persist(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}
