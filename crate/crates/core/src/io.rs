//! Tab-separated edge lists and small tabular writers.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Reads a two-column tab-separated edge list. Blank lines and lines starting
/// with `#` are skipped; extra columns are ignored.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Vec<(String, String)>> {
    let mut edges = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut cols = trimmed.split('\t');
        match (cols.next(), cols.next()) {
            (Some(a), Some(b)) if !a.is_empty() && !b.is_empty() => {
                edges.push((a.to_owned(), b.to_owned()))
            }
            _ => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: "expected two tab-separated identifiers".into(),
                });
            }
        }
    }
    Ok(edges)
}

pub fn write_edge_list<'a, W, I>(mut w: W, edges: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    for (a, b) in edges {
        writeln!(w, "{a}\t{b}")?;
    }
    w.flush()?;
    Ok(())
}

/// Formats a percentage or share with two decimals.
pub fn fmt2(x: f64) -> String {
    format!("{x:.2}")
}

/// Formats a probability so that it parses back to the same `f64`.
pub fn fmt_exact(x: f64) -> String {
    format!("{x:e}")
}
