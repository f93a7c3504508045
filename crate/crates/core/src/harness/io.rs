//! Matrix Market text files and the raw `SQRM` binary format.
//!
//! `SQRM` layout: the magic bytes `SQRM`, rows and cols as little-endian `u32`,
//! a precision code byte (4 = binary32, 8 = binary64), then the column-major
//! payload in little-endian.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Matrix, Precision, Scalar};

pub const SQRM_MAGIC: &[u8; 4] = b"SQRM";

fn precision_code(p: Precision) -> u8 {
    match p {
        Precision::Binary32 => 4,
        Precision::Binary64 => 8,
    }
}

pub fn write_sqrm<W: Write>(mut w: W, m: &DenseMatrix) -> Result<()> {
    let (rows, cols) = m.shape();
    let dim = |d: usize| u32::try_from(d).map_err(|_| Error::Format(format!("dimension {d} exceeds u32")));
    w.write_all(SQRM_MAGIC)?;
    w.write_all(&dim(rows)?.to_le_bytes())?;
    w.write_all(&dim(cols)?.to_le_bytes())?;
    w.write_all(&[precision_code(m.precision())])?;
    let mut w = BufWriter::new(w);
    match m {
        DenseMatrix::F32(a) => a.as_slice().iter().try_for_each(|v| w.write_all(&v.to_le_bytes()))?,
        DenseMatrix::F64(a) => a.as_slice().iter().try_for_each(|v| w.write_all(&v.to_le_bytes()))?,
    }
    w.flush()?;
    Ok(())
}

pub fn read_sqrm<R: Read>(mut r: R) -> Result<DenseMatrix> {
    let mut head = [0u8; 13];
    r.read_exact(&mut head)
        .map_err(|_| Error::Format("truncated SQRM header".into()))?;
    if &head[..4] != SQRM_MAGIC {
        return Err(Error::Format("missing SQRM magic".into()));
    }
    let rows = u32::from_le_bytes(head[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
    let width = match head[12] {
        4 => 4,
        8 => 8,
        c => return Err(Error::Format(format!("unknown SQRM precision code {c}"))),
    };
    let len = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(width))
        .ok_or_else(|| Error::Format("SQRM dimensions overflow".into()))?;
    let mut buf = Vec::new();
    r.take(len as u64 + 1).read_to_end(&mut buf)?;
    if buf.len() != len {
        return Err(Error::Format(format!("SQRM payload has {} bytes, expected {len}", buf.len())));
    }
    Ok(if width == 4 {
        let data = buf.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        DenseMatrix::F32(Matrix::from_col_major(rows, cols, data)?)
    } else {
        let data = buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        DenseMatrix::F64(Matrix::from_col_major(rows, cols, data)?)
    })
}

/// Writes a dense Matrix Market `array real general` file. Values use the shortest
/// representation that parses back to the same number.
pub fn write_matrix_market<W: Write>(w: W, m: &DenseMatrix) -> Result<()> {
    let mut w = BufWriter::new(w);
    let (rows, cols) = m.shape();
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{rows} {cols}")?;
    match m {
        DenseMatrix::F32(a) => a.as_slice().iter().try_for_each(|v| writeln!(w, "{v:e}"))?,
        DenseMatrix::F64(a) => a.as_slice().iter().try_for_each(|v| writeln!(w, "{v:e}"))?,
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

/// Reads a Matrix Market file (`coordinate` or `array`; `real` or `integer`;
/// `general`, `symmetric` or `skew-symmetric`) into binary64.
pub fn read_matrix_market<R: Read>(r: R) -> Result<Matrix<f64>> {
    let mut lines = BufReader::new(r).lines().enumerate();
    let fmt_err = |line: usize, msg: String| Error::Format(format!("line {}: {msg}", line + 1));

    let (_, header) = lines.next().ok_or_else(|| Error::Format("empty Matrix Market file".into()))?;
    let header = header?;
    let words: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(fmt_err(0, format!("bad header `{header}`")));
    }
    let coordinate = match words[2].as_str() {
        "coordinate" => true,
        "array" => false,
        f => return Err(fmt_err(0, format!("unsupported format `{f}`"))),
    };
    if !matches!(words[3].as_str(), "real" | "integer" | "double") {
        return Err(fmt_err(0, format!("unsupported field `{}`", words[3])));
    }
    let sym = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        s => return Err(fmt_err(0, format!("unsupported symmetry `{s}`"))),
    };

    let mut body = lines.filter_map(|(i, l)| match l {
        Ok(l) => {
            let t = l.trim().to_string();
            (!t.is_empty() && !t.starts_with('%')).then_some(Ok((i, t)))
        }
        Err(e) => Some(Err(Error::from(e))),
    });
    let (size_line, size) = body.next().ok_or_else(|| Error::Format("missing size line".into()))??;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| fmt_err(size_line, format!("bad size `{t}`"))))
        .collect::<Result<_>>()?;
    let parse_f = |line: usize, t: &str| -> Result<f64> {
        t.parse::<f64>().map_err(|_| fmt_err(line, format!("bad value `{t}`")))
    };

    let (rows, cols) = match dims.as_slice() {
        [r, c] if !coordinate => (*r, *c),
        [r, c, _] if coordinate => (*r, *c),
        _ => return Err(fmt_err(size_line, format!("bad size line `{size}`"))),
    };
    if sym != Symmetry::General && rows != cols {
        return Err(fmt_err(size_line, "symmetric matrix must be square".into()));
    }
    let mut a = Matrix::<f64>::zeros(rows, cols);
    let mirror = |a: &mut Matrix<f64>, i: usize, j: usize, v: f64| {
        a.set(i, j, v);
        if i != j {
            match sym {
                Symmetry::General => {}
                Symmetry::Symmetric => a.set(j, i, v),
                Symmetry::SkewSymmetric => a.set(j, i, -v),
            }
        }
    };

    if coordinate {
        let nnz = dims[2];
        for _ in 0..nnz {
            let (ln, t) = body.next().ok_or_else(|| Error::Format("fewer entries than declared".into()))??;
            let f: Vec<&str> = t.split_whitespace().collect();
            if f.len() != 3 {
                return Err(fmt_err(ln, format!("expected `i j value`, got `{t}`")));
            }
            let idx = |s: &str, n: usize| -> Result<usize> {
                match s.parse::<usize>() {
                    Ok(k) if k >= 1 && k <= n => Ok(k - 1),
                    _ => Err(fmt_err(ln, format!("index `{s}` out of range 1..={n}"))),
                }
            };
            let (i, j) = (idx(f[0], rows)?, idx(f[1], cols)?);
            mirror(&mut a, i, j, parse_f(ln, f[2])?);
        }
    } else {
        for j in 0..cols {
            let start = match sym {
                Symmetry::General => 0,
                Symmetry::Symmetric => j,
                Symmetry::SkewSymmetric => j + 1,
            };
            for i in start..rows {
                let (ln, t) = body.next().ok_or_else(|| Error::Format("fewer entries than declared".into()))??;
                mirror(&mut a, i, j, parse_f(ln, &t)?);
            }
        }
    }
    if let Some(extra) = body.next() {
        let (ln, _) = extra?;
        return Err(fmt_err(ln, "more entries than declared".into()));
    }
    Ok(a)
}

/// On-disk matrix formats, chosen by file extension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFormat {
    MatrixMarket,
    Sqrm,
}

impl MatrixFormat {
    /// `.sqrm` and `.bin` are binary; everything else is Matrix Market.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("sqrm") | Some("bin") => MatrixFormat::Sqrm,
            _ => MatrixFormat::MatrixMarket,
        }
    }
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let f = File::open(path)?;
    match MatrixFormat::from_path(path) {
        MatrixFormat::Sqrm => read_sqrm(BufReader::new(f)),
        MatrixFormat::MatrixMarket => read_matrix_market(f).map(DenseMatrix::F64),
    }
}

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    let f = File::create(path)?;
    match MatrixFormat::from_path(path) {
        MatrixFormat::Sqrm => write_sqrm(f, m),
        MatrixFormat::MatrixMarket => write_matrix_market(f, m),
    }
}

/// Convenience for typed matrices.
pub fn write_typed<T: Scalar>(path: &Path, m: &Matrix<T>) -> Result<()> {
    let dense = match T::PRECISION {
        Precision::Binary32 => DenseMatrix::F32(m.cast()),
        Precision::Binary64 => DenseMatrix::F64(m.cast()),
    };
    write_matrix(path, &dense)
}
