//! MatrixMarket coordinate/array reading and writing.
//!
//! Block matrices are written as their expanded scalar system with an extra
//! comment line `% block_size: b` right after the banner.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::csr::{BlockCsrMatrix, BlockSparse, CsrMatrix};
use crate::error::{Result, SolverError};
use crate::scalar::Scalar;

const BLOCK_TAG: &str = "block_size:";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

/// Parsed coordinate file: the scalar matrix and the optional block size tag.
#[derive(Debug, Clone)]
pub struct MatrixMarketFile<T> {
    pub matrix: CsrMatrix<T>,
    pub block_size: Option<usize>,
}

fn parse_err(line: usize, message: impl Into<String>) -> SolverError {
    SolverError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_banner(line_no: usize, line: &str, want: &str) -> Result<Symmetry> {
    let toks: Vec<String> = line.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(parse_err(line_no, format!("malformed header: {line:?}")));
    }
    if toks[2] != want {
        return Err(parse_err(line_no, format!("expected {want} format, found {}", toks[2])));
    }
    if toks[3] != "real" && toks[3] != "integer" {
        return Err(parse_err(line_no, format!("unsupported field {:?}", toks[3])));
    }
    match toks[4].as_str() {
        "general" => Ok(Symmetry::General),
        "symmetric" => Ok(Symmetry::Symmetric),
        other => Err(parse_err(line_no, format!("unsupported symmetry {other:?}"))),
    }
}

fn parse_block_tag(line: &str) -> Option<usize> {
    let body = line.trim_start_matches('%').trim();
    body.strip_prefix(BLOCK_TAG)
        .and_then(|rest| rest.trim().parse().ok())
}

/// Parses a coordinate-format file from any reader.
pub fn parse_matrix_market<T: Scalar, R: BufRead>(reader: R) -> Result<MatrixMarketFile<T>> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (first_no, first) = match lines.next() {
        Some((n, l)) => (n, l?),
        None => return Err(parse_err(1, "empty file")),
    };
    let symmetry = parse_banner(first_no, &first, "coordinate")?;

    let mut block_size = None;
    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries: Vec<(usize, usize, T)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut last_line = first_no;
    let mut count = 0usize;

    for (no, line) in lines {
        let line = line?;
        last_line = no;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('%') {
            if let Some(b) = parse_block_tag(trimmed) {
                block_size = Some(b);
            }
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        let Some((nrows, ncols, nnz)) = size else {
            if toks.len() != 3 {
                return Err(parse_err(no, "size line must hold rows, columns and entry count"));
            }
            let p = |t: &str| {
                t.parse::<usize>()
                    .map_err(|_| parse_err(no, format!("invalid size value {t:?}")))
            };
            let (r, c, z) = (p(toks[0])?, p(toks[1])?, p(toks[2])?);
            if symmetry == Symmetry::Symmetric && r != c {
                return Err(parse_err(no, "symmetric matrix must be square"));
            }
            size = Some((r, c, z));
            continue;
        };
        if toks.len() != 3 {
            return Err(parse_err(no, format!("expected `row col value`, found {trimmed:?}")));
        }
        count += 1;
        if count > nnz {
            return Err(parse_err(no, format!("more than the declared {nnz} entries")));
        }
        let i: usize = toks[0]
            .parse()
            .map_err(|_| parse_err(no, format!("invalid row index {:?}", toks[0])))?;
        let j: usize = toks[1]
            .parse()
            .map_err(|_| parse_err(no, format!("invalid column index {:?}", toks[1])))?;
        let v: f64 = toks[2]
            .parse()
            .map_err(|_| parse_err(no, format!("invalid value {:?}", toks[2])))?;
        if i == 0 || j == 0 || i > nrows || j > ncols {
            return Err(parse_err(
                no,
                format!("index ({i}, {j}) outside {nrows}x{ncols} (indices are 1-based)"),
            ));
        }
        let (i, j) = (i - 1, j - 1);
        let value = T::from_f64(v).ok_or_else(|| parse_err(no, "value not representable"))?;
        let mut push = |r: usize, c: usize| -> Result<()> {
            if !seen.insert((r, c)) {
                return Err(parse_err(no, format!("duplicate entry ({}, {})", r + 1, c + 1)));
            }
            entries.push((r, c, value));
            Ok(())
        };
        push(i, j)?;
        if symmetry == Symmetry::Symmetric && i != j {
            push(j, i)?;
        }
    }

    let Some((nrows, ncols, nnz)) = size else {
        return Err(parse_err(last_line + 1, "missing size line"));
    };
    if count != nnz {
        return Err(parse_err(
            last_line + 1,
            format!("declared {nnz} entries but found {count}"),
        ));
    }
    let matrix = CsrMatrix::from_triplets(nrows, ncols, entries)?;
    if let Some(b) = block_size {
        if b == 0 || nrows % b != 0 || ncols % b != 0 {
            return Err(parse_err(1, format!("block size {b} does not divide {nrows}x{ncols}")));
        }
    }
    Ok(MatrixMarketFile { matrix, block_size })
}

pub fn read_matrix_market<T: Scalar>(path: impl AsRef<Path>) -> Result<CsrMatrix<T>> {
    Ok(read_matrix_market_file(path)?.matrix)
}

pub fn read_matrix_market_file<T: Scalar>(path: impl AsRef<Path>) -> Result<MatrixMarketFile<T>> {
    parse_matrix_market(BufReader::new(File::open(path)?))
}

/// Reads a coordinate file as a block matrix, using its block size tag (1 if absent).
pub fn read_block_matrix_market<T: Scalar>(path: impl AsRef<Path>) -> Result<BlockCsrMatrix<T>> {
    let f = read_matrix_market_file::<T>(path)?;
    BlockCsrMatrix::from_scalar(&f.matrix, f.block_size.unwrap_or(1))
}

/// Writes general coordinate format with 1-based indices.
pub fn write_matrix_market_to<T: Scalar, W: Write>(
    a: &CsrMatrix<T>,
    block_size: Option<usize>,
    mut w: W,
) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    if let Some(b) = block_size {
        writeln!(w, "% {BLOCK_TAG} {b}")?;
    }
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (i, j, v) in a.triplets() {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_matrix_market<T: Scalar>(a: &CsrMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    write_matrix_market_to(a, None, BufWriter::new(File::create(path)?))
}

pub fn write_block_matrix_market<T: Scalar>(
    a: &BlockCsrMatrix<T>,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_matrix_market_to(
        &a.to_scalar(),
        Some(a.block_size()),
        BufWriter::new(File::create(path)?),
    )
}

/// Writes a dense vector in MatrixMarket array format (one column).
pub fn write_vector<T: Scalar>(x: &[T], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} 1", x.len())?;
    for v in x {
        writeln!(w, "{v:e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_vector<T: Scalar, R: BufRead>(reader: R) -> Result<Vec<T>> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (first_no, first) = match lines.next() {
        Some((n, l)) => (n, l?),
        None => return Err(parse_err(1, "empty file")),
    };
    parse_banner(first_no, &first, "array")?;
    let mut len: Option<usize> = None;
    let mut out = Vec::new();
    let mut last_line = first_no;
    for (no, line) in lines {
        let line = line?;
        last_line = no;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        match len {
            None => {
                let toks: Vec<&str> = t.split_whitespace().collect();
                if toks.len() != 2 || toks[1] != "1" {
                    return Err(parse_err(no, "vector size line must be `n 1`"));
                }
                len = Some(
                    toks[0]
                        .parse()
                        .map_err(|_| parse_err(no, format!("invalid length {:?}", toks[0])))?,
                );
            }
            Some(n) => {
                if out.len() == n {
                    return Err(parse_err(no, format!("more than the declared {n} values")));
                }
                let v: f64 = t
                    .parse()
                    .map_err(|_| parse_err(no, format!("invalid value {t:?}")))?;
                out.push(T::from_f64(v).ok_or_else(|| parse_err(no, "value not representable"))?);
            }
        }
    }
    match len {
        Some(n) if n == out.len() => Ok(out),
        Some(n) => Err(parse_err(
            last_line + 1,
            format!("declared {n} values but found {}", out.len()),
        )),
        None => Err(parse_err(last_line + 1, "missing size line")),
    }
}

pub fn read_vector<T: Scalar>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    parse_vector(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<MatrixMarketFile<f64>> {
        parse_matrix_market(s.as_bytes())
    }

    #[test]
    fn diagonal_file() {
        let f = parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 2\n2 2 2\n").unwrap();
        assert_eq!(f.matrix.to_dense(), vec![2.0, 0.0, 0.0, 2.0]);
        assert_eq!(f.block_size, None);
    }

    #[test]
    fn symmetric_expansion() {
        let f = parse(
            "%%MatrixMarket matrix coordinate real symmetric\n% lower triangle\n2 2 3\n1 1 2\n2 1 -1\n2 2 2\n",
        )
        .unwrap();
        assert_eq!(f.matrix.nnz(), 4);
        assert_eq!(f.matrix.to_dense(), vec![2.0, -1.0, -1.0, 2.0]);
    }

    #[test]
    fn short_file_names_line() {
        let err = parse("%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 1\n2 2 1\n")
            .unwrap_err();
        match err {
            SolverError::Parse { line, message } => {
                assert_eq!(line, 5);
                assert!(message.contains("declared 3"));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn bad_header_out_of_range_and_duplicates() {
        assert!(matches!(
            parse("%%MatrixMarket tensor coordinate real general\n1 1 1\n1 1 1\n"),
            Err(SolverError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n"),
            Err(SolverError::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n1 1 4\n"),
            Err(SolverError::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn block_tag_round_trip() {
        let a = BlockCsrMatrix::from_block_triplets(
            2,
            2,
            2,
            vec![
                (0, 0, vec![4.0, 0.1, 0.0, 3.0]),
                (1, 0, vec![-1.0, 0.0, 0.0, 0.0]),
                (1, 1, vec![5.0, 0.0, 2.0, 6.0]),
            ],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.mtx");
        write_block_matrix_market(&a, &p).unwrap();
        let back: BlockCsrMatrix<f64> = read_block_matrix_market(&p).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn vector_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.mtx");
        let x = vec![0.1, -3.5e-9, 7.0];
        write_vector(&x, &p).unwrap();
        assert_eq!(read_vector::<f64>(&p).unwrap(), x);
    }
}
