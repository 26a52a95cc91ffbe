//! Dense row-major matrix plus the GDM1 binary and headerless-CSV file formats.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// GDM1 on disk: 4 magic bytes `GDM1`, little-endian u64 rows, u64 cols, then
/// rows*cols little-endian f64 values row-major.
const GDM1_MAGIC: &[u8; 4] = b"GDM1";

/// Dense n x d matrix of f64 stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(format!(
                "expected {}x{}={} values, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Identity matrix.
    pub fn eye(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// self (r x k) * other (k x c).
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::shape(format!(
                "matmul {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = out.row_mut(i);
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        debug_assert_eq!(self.data.len(), other.data.len());
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn write_gdm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(GDM1_MAGIC)?;
        w.write_all(&(self.rows as u64).to_le_bytes())?;
        w.write_all(&(self.cols as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.data.len() * 8);
        for v in &self.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)
    }

    pub fn save_gdm(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        self.write_gdm(BufWriter::new(f))
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn read_gdm<R: Read>(mut r: R, origin: &str) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)
            .map_err(|e| Error::io(origin, e))?;
        if &magic != GDM1_MAGIC {
            return Err(Error::parse(origin, 0, "bad magic, expected GDM1"));
        }
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf).map_err(|e| Error::io(origin, e))?;
        let rows = u64::from_le_bytes(u64buf) as usize;
        r.read_exact(&mut u64buf).map_err(|e| Error::io(origin, e))?;
        let cols = u64::from_le_bytes(u64buf) as usize;
        let count = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::parse(origin, 0, "rows*cols overflows"))?;
        let mut data = vec![0.0f64; count];
        let mut raw = vec![0u8; count * 8];
        r.read_exact(&mut raw).map_err(|e| Error::io(origin, e))?;
        for (i, chunk) in raw.chunks_exact(8).enumerate() {
            data[i] = f64::from_le_bytes(chunk.try_into().unwrap());
        }
        Ok(Self { rows, cols, data })
    }

    pub fn load_gdm(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::read_gdm(BufReader::new(f), &path.display().to_string())
    }

    /// Headerless CSV, one row per line, comma-separated decimals.
    pub fn load_csv(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let origin = path.display().to_string();
        let mut data = Vec::new();
        let mut cols = None;
        let mut rows = 0usize;
        for (lineno, line) in BufReader::new(f).lines().enumerate() {
            let line = line.map_err(|e| Error::io(&*origin, e))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut width = 0usize;
            for cell in line.split(',') {
                let v: f64 = cell.trim().parse().map_err(|_| {
                    Error::parse(&*origin, lineno + 1, format!("bad number {cell:?}"))
                })?;
                data.push(v);
                width += 1;
            }
            match cols {
                None => cols = Some(width),
                Some(c) if c != width => {
                    return Err(Error::parse(
                        &*origin,
                        lineno + 1,
                        format!("row has {width} columns, expected {c}"),
                    ))
                }
                _ => {}
            }
            rows += 1;
        }
        let cols = cols.unwrap_or(0);
        Ok(Self { rows, cols, data })
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut w = BufWriter::new(f);
        for i in 0..self.rows {
            let row = self.row(i);
            let line = row
                .iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(",");
            writeln!(w, "{line}").map_err(|e| Error::io(path.display().to_string(), e))?;
        }
        Ok(())
    }

    /// Load either format, picking by extension (`.gdm` binary, anything else CSV).
    pub fn load_auto(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("gdm") | Some("gdm1") | Some("bin") => Self::load_gdm(path),
            _ => Self::load_csv(path),
        }
    }
}
