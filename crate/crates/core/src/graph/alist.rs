//! Reader and writer for the `alist` sparse parity-check matrix format.
//!
//! ```text
//! n m
//! max_col_weight max_row_weight
//! col_weight_1 .. col_weight_n
//! row_weight_1 .. row_weight_m
//! n lines: 1-based check indices of each column
//! m lines: 1-based variable indices of each row
//! ```
//!
//! Zero padding up to the maximum weight is accepted on read and never written.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::{FactorGraph, GraphError};

#[derive(Debug, Error)]
pub enum AlistError {
    #[error("reading alist file: {0}")]
    Io(#[from] std::io::Error),
    #[error("alist line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("alist column and row lists disagree: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>), AlistError> {
        for (idx, raw) in self.inner.by_ref() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| AlistError::Parse {
                        line: idx + 1,
                        msg: format!("invalid integer {tok:?} in {what}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Ok((idx + 1, nums));
        }
        Err(AlistError::Parse { line: 0, msg: format!("unexpected end of file, expected {what}") })
    }
}

fn expect_len(line: usize, nums: &[usize], len: usize, what: &str) -> Result<(), AlistError> {
    if nums.len() != len {
        return Err(AlistError::Parse {
            line,
            msg: format!("{what}: expected {len} values, found {}", nums.len()),
        });
    }
    Ok(())
}

/// Reads the list section, dropping zero padding and converting to 0-based indices.
fn read_lists(
    lines: &mut Lines<'_>,
    weights: &[usize],
    bound: usize,
    what: &str,
) -> Result<Vec<Vec<usize>>, AlistError> {
    let mut out = Vec::with_capacity(weights.len());
    for (i, &w) in weights.iter().enumerate() {
        let (line, nums) = lines.next_numbers(what)?;
        let entries: Vec<usize> = nums.into_iter().filter(|&x| x != 0).collect();
        if entries.len() != w {
            return Err(AlistError::Parse {
                line,
                msg: format!("{what} {}: weight {w} but {} entries", i + 1, entries.len()),
            });
        }
        if let Some(&bad) = entries.iter().find(|&&x| x > bound) {
            return Err(AlistError::Parse {
                line,
                msg: format!("{what} {}: index {bad} exceeds {bound}", i + 1),
            });
        }
        out.push(entries.into_iter().map(|x| x - 1).collect());
    }
    Ok(out)
}

pub fn parse(text: &str) -> Result<FactorGraph, AlistError> {
    let mut lines = Lines { inner: text.lines().enumerate() };
    let (l, dims) = lines.next_numbers("header")?;
    expect_len(l, &dims, 2, "header")?;
    let (n, m) = (dims[0], dims[1]);
    let (l, maxes) = lines.next_numbers("max weights")?;
    expect_len(l, &maxes, 2, "max weights")?;
    let (l, col_w) = lines.next_numbers("column weights")?;
    expect_len(l, &col_w, n, "column weights")?;
    let (l, row_w) = lines.next_numbers("row weights")?;
    expect_len(l, &row_w, m, "row weights")?;
    if col_w.iter().max().copied().unwrap_or(0) > maxes[0]
        || row_w.iter().max().copied().unwrap_or(0) > maxes[1]
    {
        return Err(AlistError::Inconsistent("weight exceeds declared maximum".into()));
    }

    let cols = read_lists(&mut lines, &col_w, m, "column")?;
    let rows = read_lists(&mut lines, &row_w, n, "row")?;

    let graph = FactorGraph::from_parity_rows(&rows, n)?;
    for (u, col) in cols.iter().enumerate() {
        let mut sorted = col.clone();
        sorted.sort_unstable();
        if sorted != graph.vn_neighbors(u) {
            return Err(AlistError::Inconsistent(format!(
                "column {} lists checks {:?}, rows imply {:?}",
                u + 1,
                sorted,
                graph.vn_neighbors(u)
            )));
        }
    }
    Ok(graph)
}

pub fn read(path: impl AsRef<Path>) -> Result<FactorGraph, AlistError> {
    parse(&std::fs::read_to_string(path)?)
}

fn join_one_based(out: &mut String, items: impl Iterator<Item = usize>) {
    let mut first = true;
    for x in items {
        if !first {
            out.push(' ');
        }
        first = false;
        let _ = write!(out, "{x}");
    }
    out.push('\n');
}

/// Serialises without zero padding.
pub fn to_string(g: &FactorGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", g.n(), g.m());
    let _ = writeln!(out, "{} {}", g.max_vn_degree(), g.max_cn_degree());
    join_one_based(&mut out, (0..g.n()).map(|u| g.vn_degree(u)));
    join_one_based(&mut out, (0..g.m()).map(|r| g.cn_degree(r)));
    for u in 0..g.n() {
        join_one_based(&mut out, g.vn_neighbors(u).iter().map(|r| r + 1));
    }
    for r in 0..g.m() {
        join_one_based(&mut out, g.cn_neighbors(r).iter().map(|u| u + 1));
    }
    out
}

pub fn write(g: &FactorGraph, path: impl AsRef<Path>) -> Result<(), AlistError> {
    std::fs::write(path, to_string(g))?;
    Ok(())
}
