//! Text matrix files: whitespace-separated numbers, one row per line, blocks
//! separated by blank lines, `#` starts a comment. Entries may be integers,
//! decimals or `p/q`; on the exact backend decimals are read as the rational
//! they spell.

use std::path::{Path, PathBuf};

use cayley_core::scalar::parse_scalar;
use cayley_core::Scalar;

use crate::error::{CliError, Result};

pub type Block<S> = Vec<Vec<S>>;

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Unreadable { path: path.to_path_buf(), source })
}

fn malformed(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Malformed { path: path.to_path_buf(), message: message.into() }
}

/// Split into blocks of rows; every row of a block must have the same length.
pub fn parse_blocks<S: Scalar>(text: &str, path: &Path) -> Result<Vec<Block<S>>> {
    let mut blocks: Vec<Block<S>> = Vec::new();
    let mut current: Block<S> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                parse_scalar::<S>(tok)
                    .ok_or_else(|| malformed(path, format!("line {}: `{tok}` is not a number", lineno + 1)))
            })
            .collect::<Result<Vec<S>>>()?;
        if let Some(first) = current.first() {
            if first.len() != row.len() {
                return Err(malformed(
                    path,
                    format!("line {}: {} entries, expected {}", lineno + 1, row.len(), first.len()),
                ));
            }
        }
        current.push(row);
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    if blocks.is_empty() {
        return Err(malformed(path, "no numbers found"));
    }
    Ok(blocks)
}

fn shape<S>(b: &Block<S>) -> (usize, usize) {
    (b.len(), b.first().map_or(0, Vec::len))
}

fn single_block<S: Scalar>(text: &str, path: &Path) -> Result<Block<S>> {
    let mut blocks = parse_blocks::<S>(text, path)?;
    if blocks.len() != 1 {
        return Err(malformed(path, format!("expected one block, found {}", blocks.len())));
    }
    Ok(blocks.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneMode {
    /// A 4-plane in ℝ⁸.
    Cayley,
    /// A `2p`-plane in ℂ^m ≅ ℝ^{2m} with `1 ≤ p ≤ m ≤ 4`; a 4×8 file is read as [`PlaneMode::Cayley`].
    Complex { m: usize, p: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneFile<S> {
    pub path: PathBuf,
    pub rows: Block<S>,
    pub mode: PlaneMode,
}

/// `4 × 8` is a Cayley-mode plane; any other `2p × 2m` with
/// `1 ≤ p ≤ m ≤ 4` is a complex-mode plane.
pub fn parse_plane<S: Scalar>(text: &str, path: &Path) -> Result<PlaneFile<S>> {
    let rows = single_block::<S>(text, path)?;
    let (r, c) = shape(&rows);
    let mode = match (r, c) {
        (4, 8) => PlaneMode::Cayley,
        (r, c) if r % 2 == 0 && c % 2 == 0 && r >= 2 && r <= c && c <= 8 => PlaneMode::Complex { m: c / 2, p: r / 2 },
        _ => return Err(malformed(path, format!("plane must be 4×8 or 2p×2m with 1 ≤ p ≤ m ≤ 4, found {r}×{c}"))),
    };
    Ok(PlaneFile { path: path.to_path_buf(), rows, mode })
}

/// `λ^j_i`: row `j = 1..4` (tangent), columns `i = 5..8` (normal).
pub fn parse_lambda<S: Scalar>(text: &str, path: &Path) -> Result<[[S; 4]; 4]> {
    let rows = single_block::<S>(text, path)?;
    if shape(&rows) != (4, 4) {
        let (r, c) = shape(&rows);
        return Err(malformed(path, format!("λ file must be 4×4, found {r}×{c}")));
    }
    Ok(std::array::from_fn(|j| std::array::from_fn(|i| rows[j][i].clone())))
}

/// A complex graph: the λ block and optionally the μ block, each `p` rows
/// of `2(m − p)` normal coefficients, ordered by the normal indices
/// `p+1..=m` then `m+p+1..=2m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGraphFile<S> {
    pub m: usize,
    pub p: usize,
    pub lambda: Block<S>,
    pub mu: Option<Block<S>>,
}

pub fn parse_complex_graph<S: Scalar>(text: &str, path: &Path) -> Result<ComplexGraphFile<S>> {
    let mut blocks = parse_blocks::<S>(text, path)?;
    if blocks.len() > 2 {
        return Err(malformed(path, format!("expected one or two blocks, found {}", blocks.len())));
    }
    let (p, cols) = shape(&blocks[0]);
    if cols == 0 || cols % 2 == 1 {
        return Err(malformed(path, format!("blocks need an even number of columns, found {cols}")));
    }
    let m = p + cols / 2;
    if m > 4 {
        return Err(malformed(path, format!("{p}×{cols} blocks give complex dimension {m} > 4")));
    }
    if blocks.len() == 2 && shape(&blocks[1]) != (p, cols) {
        let (r, c) = shape(&blocks[1]);
        return Err(malformed(path, format!("μ block is {r}×{c}, λ block is {p}×{cols}")));
    }
    let mu = (blocks.len() == 2).then(|| blocks.remove(1));
    Ok(ComplexGraphFile { m, p, lambda: blocks.remove(0), mu })
}

impl<S: Scalar> ComplexGraphFile<S> {
    /// Spread a normal-coefficient row into the `2m` coordinates expected by
    /// the core type (tangent entries zero).
    pub fn expand(&self, block: &Block<S>) -> Block<S> {
        let (m, p) = (self.m, self.p);
        let normal: Vec<usize> = (p + 1..=m).chain(m + p + 1..=2 * m).collect();
        block
            .iter()
            .map(|row| {
                let mut full = vec![S::zero(); 2 * m];
                for (x, &i) in row.iter().zip(&normal) {
                    full[i - 1] = x.clone();
                }
                full
            })
            .collect()
    }
}
