//! Matrix Market exchange format, array and coordinate variants.
//!
//! Real, integer and pattern fields are read; general, symmetric and
//! skew-symmetric symmetries are expanded to a full dense matrix. Output is
//! always `real general`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmFormat {
    Array,
    Coordinate,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::MatrixMarket(msg.into())
}

pub fn read_matrix_market<R: Read>(reader: R) -> Result<DenseMatrix> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines.next().ok_or_else(|| bad("empty input"))??;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(bad(format!("unrecognized header: {header}")));
    }
    let format = match tokens[2].as_str() {
        "array" => MmFormat::Array,
        "coordinate" => MmFormat::Coordinate,
        other => return Err(bad(format!("unsupported format {other}"))),
    };
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(bad(format!("unsupported field {other}"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(bad(format!("unsupported symmetry {other}"))),
    };
    if field == Field::Pattern && format == MmFormat::Array {
        return Err(bad("pattern field requires coordinate format"));
    }

    let mut body = Vec::new();
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        body.push(line);
    }
    let mut rows_iter = body.iter();
    let size_line = rows_iter.next().ok_or_else(|| bad("missing size line"))?;
    let size: Vec<usize> = size_line
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| bad(format!("bad size line: {size_line}"))))
        .collect::<Result<_>>()?;

    let parse_value = |s: &str| -> Result<f64> {
        s.parse::<f64>().map_err(|_| bad(format!("bad value {s}")))
    };

    match format {
        MmFormat::Array => {
            let [rows, cols] = size[..] else {
                return Err(bad("array size line needs rows and cols"));
            };
            let mut m = DenseMatrix::zeros(rows, cols);
            let values: Vec<f64> = rows_iter
                .flat_map(|l| l.split_whitespace())
                .map(parse_value)
                .collect::<Result<_>>()?;
            match symmetry {
                Symmetry::General => {
                    if values.len() != rows * cols {
                        return Err(bad(format!(
                            "expected {} values, found {}",
                            rows * cols,
                            values.len()
                        )));
                    }
                    m.data_mut().copy_from_slice(&values);
                }
                _ => {
                    if rows != cols {
                        return Err(bad("symmetric array must be square"));
                    }
                    let skew = symmetry == Symmetry::SkewSymmetric;
                    let mut it = values.into_iter();
                    for j in 0..cols {
                        let start = if skew { j + 1 } else { j };
                        for i in start..rows {
                            let v = it.next().ok_or_else(|| bad("too few values"))?;
                            m[(i, j)] = v;
                            m[(j, i)] = if skew { -v } else { v };
                        }
                    }
                    if it.next().is_some() {
                        return Err(bad("too many values"));
                    }
                }
            }
            Ok(m)
        }
        MmFormat::Coordinate => {
            let [rows, cols, nnz] = size[..] else {
                return Err(bad("coordinate size line needs rows, cols and nnz"));
            };
            let mut m = DenseMatrix::zeros(rows, cols);
            let mut count = 0;
            for line in rows_iter {
                let parts: Vec<&str> = line.split_whitespace().collect();
                let want = if field == Field::Pattern { 2 } else { 3 };
                if parts.len() != want {
                    return Err(bad(format!("bad entry line: {line}")));
                }
                let i: usize = parts[0].parse().map_err(|_| bad(format!("bad index in {line}")))?;
                let j: usize = parts[1].parse().map_err(|_| bad(format!("bad index in {line}")))?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(bad(format!("index out of range: {line}")));
                }
                let v = if field == Field::Pattern { 1.0 } else { parse_value(parts[2])? };
                let (i, j) = (i - 1, j - 1);
                m[(i, j)] += v;
                if i != j {
                    match symmetry {
                        Symmetry::General => {}
                        Symmetry::Symmetric => m[(j, i)] += v,
                        Symmetry::SkewSymmetric => m[(j, i)] -= v,
                    }
                }
                count += 1;
            }
            if count != nnz {
                return Err(bad(format!("expected {nnz} entries, found {count}")));
            }
            Ok(m)
        }
    }
}

pub fn write_matrix_market<W: Write>(m: &DenseMatrix, format: MmFormat, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    let (rows, cols) = m.shape();
    match format {
        MmFormat::Array => {
            writeln!(w, "%%MatrixMarket matrix array real general")?;
            writeln!(w, "{rows} {cols}")?;
            for v in m.data() {
                writeln!(w, "{v:e}")?;
            }
        }
        MmFormat::Coordinate => {
            let nnz = m.data().iter().filter(|v| **v != 0.0).count();
            writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
            writeln!(w, "{rows} {cols} {nnz}")?;
            for j in 0..cols {
                for (i, v) in m.col(j).iter().enumerate() {
                    if *v != 0.0 {
                        writeln!(w, "{} {} {v:e}", i + 1, j + 1)?;
                    }
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_market_file(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    read_matrix_market(File::open(path)?)
}

pub fn write_matrix_market_file(
    path: impl AsRef<Path>,
    m: &DenseMatrix,
    format: MmFormat,
) -> Result<()> {
    write_matrix_market(m, format, File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(m: &DenseMatrix, format: MmFormat) -> DenseMatrix {
        let mut buf = Vec::new();
        write_matrix_market(m, format, &mut buf).unwrap();
        read_matrix_market(buf.as_slice()).unwrap()
    }

    #[test]
    fn both_formats_roundtrip_bitwise() {
        let m = DenseMatrix::from_rows(&[[1.0, 0.0, -2.5e-300], [0.0, 1.0 / 3.0, 7e12]]).unwrap();
        assert_eq!(roundtrip(&m, MmFormat::Array), m);
        assert_eq!(roundtrip(&m, MmFormat::Coordinate), m);
    }

    #[test]
    fn symmetric_coordinate_is_expanded() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 2\n1 1 4\n2 1 -1\n";
        let m = read_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(m, DenseMatrix::from_rows(&[[4.0, -1.0], [-1.0, 0.0]]).unwrap());
    }

    #[test]
    fn integer_array_and_errors() {
        let m = read_matrix_market("%%MatrixMarket matrix array integer general\n2 1\n3\n-4\n".as_bytes())
            .unwrap();
        assert_eq!(m.data(), &[3.0, -4.0]);
        assert!(read_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n".as_bytes()).is_err());
        assert!(read_matrix_market("not a header\n".as_bytes()).is_err());
        assert!(read_matrix_market(
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n".as_bytes()
        )
        .is_err());
    }
}
