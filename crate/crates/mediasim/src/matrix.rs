//! Symmetric outlet-by-outlet similarity scores in [0, 1].

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    labels: Vec<String>,
    values: Vec<f64>, // n*n row-major
}

impl SimilarityMatrix {
    /// Zero matrix over the given outlet labels (order is preserved).
    pub fn zeros(labels: Vec<String>) -> Self {
        let n = labels.len();
        SimilarityMatrix {
            labels,
            values: vec![0.0; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let n = self.n();
        self.values[i * n + j] = v;
    }

    /// Set both (i, j) and (j, i).
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.set(i, j, v);
        self.set(j, i, v);
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.n();
        (0..n).all(|i| (i + 1..n).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    pub fn min_entry(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// CSV export: header `outlet,<labels...>`, one row per outlet, values
    /// with 9 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "outlet")?;
        for l in &self.labels {
            write!(w, ",{l}")?;
        }
        writeln!(w)?;
        for (i, l) in self.labels.iter().enumerate() {
            write!(w, "{l}")?;
            for j in 0..self.n() {
                write!(w, ",{:.8e}", self.get(i, j))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty matrix file".into()))??;
        let labels: Vec<String> = header
            .split(',')
            .skip(1)
            .map(|s| s.trim().to_string())
            .collect();
        let n = labels.len();
        let mut m = SimilarityMatrix::zeros(labels);
        let mut rows = 0usize;
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let row_label = parts.next().unwrap_or_default().trim();
            if rows >= n || row_label != m.labels[rows] {
                return Err(Error::Parse(format!(
                    "matrix row {} label {:?} does not match header",
                    lineno + 2,
                    row_label
                )));
            }
            for j in 0..n {
                let cell = parts.next().ok_or_else(|| {
                    Error::Parse(format!("matrix row {} too short", lineno + 2))
                })?;
                let v: f64 = cell.trim().parse().map_err(|_| {
                    Error::Parse(format!("bad matrix value {cell:?} at row {}", lineno + 2))
                })?;
                m.set(rows, j, v);
            }
            rows += 1;
        }
        if rows != n {
            return Err(Error::Parse(format!("matrix has {rows} rows, expected {n}")));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_preserves_values() {
        let mut m = SimilarityMatrix::zeros(vec!["a".into(), "b".into()]);
        m.set_sym(0, 1, 0.336_097_435_1);
        m.set(0, 0, 1.0);
        m.set(1, 1, 1.0);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = SimilarityMatrix::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.labels(), m.labels());
        for i in 0..2 {
            for j in 0..2 {
                assert!((back.get(i, j) - m.get(i, j)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn nine_significant_digits() {
        let mut m = SimilarityMatrix::zeros(vec!["a".into()]);
        m.set(0, 0, 1.0 / 3.0);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("3.33333333e-1"), "{text}");
    }
}
