//! Tabulated cylinder functions: real functions of the first `depth`
//! coordinates of `Ω`, stored on the full grid `M^depth`.

use crate::alphabet::SymbolSource;
use crate::error::{Error, Result};

/// Hard cap on table sizes (`m^depth` entries).
pub const MAX_TABLE_LEN: usize = 1 << 22;

/// A function of the first `depth` coordinates, tabulated over words of
/// length `depth` in lexicographic order (first coordinate most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct DepthFunction {
    base: usize,
    depth: usize,
    table: Vec<f64>,
}

pub(crate) fn table_len(base: usize, depth: usize) -> Result<usize> {
    let mut len: usize = 1;
    for _ in 0..depth {
        len = len
            .checked_mul(base)
            .filter(|&l| l <= MAX_TABLE_LEN)
            .ok_or_else(|| {
                Error::ResourceLimit(format!(
                    "table of {base}^{depth} entries exceeds the cap of {MAX_TABLE_LEN}"
                ))
            })?;
    }
    Ok(len)
}

impl DepthFunction {
    /// Depth-0 constant.
    pub fn constant(base: usize, value: f64) -> Self {
        Self {
            base,
            depth: 0,
            table: vec![value],
        }
    }

    pub fn from_table(base: usize, depth: usize, table: Vec<f64>) -> Result<Self> {
        let len = table_len(base, depth)?;
        if table.len() != len {
            return Err(Error::invalid(format!(
                "table length {} does not match {base}^{depth} = {len}",
                table.len()
            )));
        }
        if table.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("table entries must be finite"));
        }
        Ok(Self { base, depth, table })
    }

    /// Tabulate `f` on every word of length `depth`.
    pub fn from_fn(base: usize, depth: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = table_len(base, depth)?;
        let mut word = vec![0usize; depth];
        let mut table = Vec::with_capacity(len);
        for idx in 0..len {
            word_of_index(base, depth, idx, &mut word);
            table.push(f(&word));
        }
        Self::from_table(base, depth, table)
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Value on any word with at least `depth` symbols (extra symbols are
    /// ignored).
    pub fn eval_word(&self, word: &[usize]) -> f64 {
        debug_assert!(word.len() >= self.depth, "word shorter than depth");
        self.table[index_of_word(self.base, &word[..self.depth])]
    }

    /// Value at a point of `Ω`.
    pub fn eval_seq(&self, x: &impl SymbolSource) -> f64 {
        let mut idx = 0usize;
        for i in 0..self.depth {
            idx = idx * self.base + x.coord(i);
        }
        self.table[idx]
    }

    /// Re-tabulate at a greater depth (exact: the function still reads only
    /// its original coordinates).
    pub fn align(&self, depth: usize) -> Result<Self> {
        if depth < self.depth {
            return Err(Error::invalid("align target shallower than the function"));
        }
        if depth == self.depth {
            return Ok(self.clone());
        }
        Self::from_fn(self.base, depth, |w| self.eval_word(w))
    }

    /// Pointwise product, tabulated at the deeper of the two depths.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Pointwise `self + t * other`.
    pub fn add_scaled(&self, other: &Self, t: f64) -> Result<Self> {
        self.zip_with(other, |a, b| a + t * b)
    }

    fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.base != other.base {
            return Err(Error::invalid("mismatched alphabets"));
        }
        let depth = self.depth.max(other.depth);
        Self::from_fn(self.base, depth, |w| {
            op(self.eval_word(w), other.eval_word(w))
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            base: self.base,
            depth: self.depth,
            table: self.table.iter().map(|v| c * v).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_table(
            self.base,
            self.depth,
            self.table.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn sup_norm(&self) -> f64 {
        self.table.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_value(&self) -> f64 {
        self.table.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn min_value(&self) -> f64 {
        self.table.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// `max - min` of the table; zero exactly for constants.
    pub fn flatness(&self) -> f64 {
        self.max_value() - self.min_value()
    }
}

/// Lexicographic index of a word (first symbol most significant).
pub fn index_of_word(base: usize, word: &[usize]) -> usize {
    word.iter().fold(0, |idx, &s| idx * base + s)
}

/// Inverse of [`index_of_word`]; fills `word` (length = depth).
pub fn word_of_index(base: usize, depth: usize, mut idx: usize, word: &mut [usize]) {
    debug_assert_eq!(word.len(), depth);
    for i in (0..depth).rev() {
        word[i] = idx % base;
        idx /= base;
    }
}
