//! Matrix Market reader for `coordinate real general|symmetric` files.

use std::path::Path;

use spla_core::{Dim, MatrixData};

use crate::CliError;

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<MatrixData, CliError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_matrix_market(&text, &path.display().to_string())
}

/// Parses file contents; `origin` only labels error messages.
pub fn parse_matrix_market(text: &str, origin: &str) -> Result<MatrixData, CliError> {
    let err = |line: usize, message: String| CliError::Parse {
        path: origin.to_owned(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let symmetric = parse_header(header).map_err(|e| match e {
        HeaderError::Malformed(m) => err(1, m),
        HeaderError::Unsupported(m) => CliError::Unsupported(m),
    })?;

    let mut body = lines.filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('%'));
    let (size_line, size) = body
        .next()
        .ok_or_else(|| err(1, "missing size line".into()))?;
    let fields = numbers::<usize>(size)
        .filter(|f| f.len() == 3)
        .ok_or_else(|| {
            err(
                size_line,
                format!("expected \"rows cols nnz\", got {size:?}"),
            )
        })?;
    let (rows, cols, nnz) = (fields[0], fields[1], fields[2]);
    if symmetric && rows != cols {
        return Err(err(size_line, "symmetric matrix must be square".into()));
    }

    let mut md = MatrixData::new(Dim::new(rows, cols));
    let mut count = 0;
    for (line, entry) in body {
        let parts: Vec<&str> = entry.split_whitespace().collect();
        let parsed = match parts.as_slice() {
            [i, j, v] => i
                .parse::<usize>()
                .ok()
                .zip(j.parse::<usize>().ok())
                .zip(v.parse::<f64>().ok()),
            _ => None,
        };
        let ((i, j), v) =
            parsed.ok_or_else(|| err(line, format!("expected \"i j value\", got {entry:?}")))?;
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(err(line, format!("index ({i}, {j}) outside {rows}x{cols}")));
        }
        md.add(i - 1, j - 1, v)?;
        if symmetric && i != j {
            md.add(j - 1, i - 1, v)?;
        }
        count += 1;
        if count > nnz {
            return Err(err(line, format!("more than the declared {nnz} entries")));
        }
    }
    if count != nnz {
        return Err(err(
            size_line,
            format!("declared {nnz} entries, found {count}"),
        ));
    }
    Ok(md)
}

enum HeaderError {
    Malformed(String),
    Unsupported(String),
}

/// Returns whether the matrix is symmetric.
fn parse_header(header: &str) -> Result<bool, HeaderError> {
    let tokens: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(HeaderError::Malformed(format!("bad header {header:?}")));
    }
    if tokens[2] != "coordinate" {
        return Err(HeaderError::Unsupported(format!("storage {:?}", tokens[2])));
    }
    match tokens[3].as_str() {
        "real" => {}
        other => return Err(HeaderError::Unsupported(format!("field {other:?}"))),
    }
    match tokens[4].as_str() {
        "general" => Ok(false),
        "symmetric" => Ok(true),
        other => Err(HeaderError::Unsupported(format!("symmetry {other:?}"))),
    }
}

fn numbers<T: std::str::FromStr>(line: &str) -> Option<Vec<T>> {
    line.split_whitespace().map(|t| t.parse().ok()).collect()
}
