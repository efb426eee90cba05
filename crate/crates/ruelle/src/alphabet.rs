//! Discretized compact alphabets `(M, d, μ)` and eventually-constant points
//! of the sequence space `Ω = M^ℕ`.
//!
//! The a-priori measure is a strictly positive weight vector summing to one;
//! the sequence metric is `d_Ω(x, y) = Σ_{n≥1} 2^{-n} d(x_n, y_n)`, summed in
//! closed form past the last prefix symbol.

use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use serde::{Deserialize, Serialize};

const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphabetKind {
    FiniteAtomic,
    IntervalUniform,
    CircleUniform,
}

/// A finite alphabet with node values, an a-priori weight per node and a
/// point metric determined by the kind.
#[derive(Debug, Clone, PartialEq)]
pub struct AprioriAlphabet {
    kind: AlphabetKind,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl AprioriAlphabet {
    /// The spin alphabet `{-1, +1}` with weights `(1/2, 1/2)`.
    pub fn two_point() -> Self {
        Self {
            kind: AlphabetKind::FiniteAtomic,
            nodes: vec![-1.0, 1.0],
            weights: vec![0.5, 0.5],
        }
    }

    /// `m` atoms spread uniformly over `[-1, 1]` with uniform weights.
    /// `m = 1` yields the degenerate one-letter alphabet `{0}`.
    pub fn finite_atomic(m: usize) -> Result<Self> {
        let nodes = match m {
            0 => return Err(Error::invalid("alphabet size m must be >= 1")),
            1 => vec![0.0],
            _ => (0..m)
                .map(|i| -1.0 + 2.0 * i as f64 / (m - 1) as f64)
                .collect(),
        };
        Self::from_nodes(AlphabetKind::FiniteAtomic, nodes)
    }

    /// Atoms at explicit positions with uniform weights.
    pub fn finite_atomic_nodes(nodes: Vec<f64>) -> Result<Self> {
        Self::from_nodes(AlphabetKind::FiniteAtomic, nodes)
    }

    /// Midpoint discretization of `([0,1], |.|, Lebesgue)`: nodes
    /// `(2i-1)/(2m)` with weights `1/m`.
    pub fn interval_uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("alphabet size m must be >= 1"));
        }
        let nodes = (1..=m)
            .map(|i| (2 * i - 1) as f64 / (2 * m) as f64)
            .collect();
        Self::from_nodes(AlphabetKind::IntervalUniform, nodes)
    }

    /// Equispaced angles on the circle with uniform weights and geodesic
    /// point metric.
    pub fn circle_uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("alphabet size m must be >= 1"));
        }
        let nodes = (0..m)
            .map(|i| 2.0 * std::f64::consts::PI * i as f64 / m as f64)
            .collect();
        Self::from_nodes(AlphabetKind::CircleUniform, nodes)
    }

    fn from_nodes(kind: AlphabetKind, nodes: Vec<f64>) -> Result<Self> {
        let m = nodes.len();
        if m == 0 {
            return Err(Error::invalid("alphabet size m must be >= 1"));
        }
        let alphabet = Self {
            kind,
            nodes,
            weights: vec![1.0 / m as f64; m],
        };
        alphabet.validate()?;
        Ok(alphabet)
    }

    /// Replace the uniform weights, keeping full support.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        self.weights = weights;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.weights.len() != self.nodes.len() {
            return Err(Error::invalid("one weight per node required"));
        }
        if self.weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::invalid("weights must be strictly positive"));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::invalid(format!(
                "weights must sum to 1 (got {sum:.17})"
            )));
        }
        for i in 0..self.nodes.len() {
            for j in (i + 1)..self.nodes.len() {
                if self.nodes[i] == self.nodes[j] {
                    return Err(Error::invalid("nodes must be pairwise distinct"));
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> AlphabetKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Point metric `d` on node indices.
    pub fn point_dist(&self, i: usize, j: usize) -> f64 {
        match self.kind {
            AlphabetKind::FiniteAtomic | AlphabetKind::IntervalUniform => {
                (self.nodes[i] - self.nodes[j]).abs()
            }
            AlphabetKind::CircleUniform => {
                let delta = (self.nodes[i] - self.nodes[j]).abs();
                delta.min(2.0 * std::f64::consts::PI - delta)
            }
        }
    }

    /// Smallest positive distance between distinct nodes (`+∞` for m = 1).
    pub fn min_node_gap(&self) -> f64 {
        let mut gap = f64::INFINITY;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                gap = gap.min(self.point_dist(i, j));
            }
        }
        gap
    }

    fn check_seq(&self, x: &PointSeq) -> Result<()> {
        let m = self.len();
        if x.tail >= m || x.prefix.iter().any(|&s| s >= m) {
            return Err(Error::invalid(
                "point sequence uses symbols outside this alphabet",
            ));
        }
        Ok(())
    }

    /// `d_Ω(x, y) = Σ_{n≥1} 2^{-n} d(x_n, y_n)`, with the eventually-constant
    /// tail summed as a geometric series.
    pub fn seq_dist(&self, x: &PointSeq, y: &PointSeq) -> Result<f64> {
        self.check_seq(x)?;
        self.check_seq(y)?;
        let n = x.prefix.len().max(y.prefix.len());
        let mut acc = KahanSum::new();
        let mut pow = 1.0;
        for i in 0..n {
            pow *= 0.5;
            acc.add(pow * self.point_dist(x.coord(i), y.coord(i)));
        }
        // Σ_{k>n} 2^{-k} = 2^{-n}
        acc.add(pow * self.point_dist(x.tail, y.tail));
        Ok(acc.value())
    }

    /// `d_n(x, y) = max_{0≤k<n} d_Ω(σ^k x, σ^k y)`.
    pub fn seq_dist_n(&self, x: &PointSeq, y: &PointSeq, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::invalid("d_n requires n >= 1"));
        }
        let mut best: f64 = 0.0;
        let mut xs = x.clone();
        let mut ys = y.clone();
        for k in 0..n {
            best = best.max(self.seq_dist(&xs, &ys)?);
            if xs.prefix.is_empty() && ys.prefix.is_empty() {
                break; // both constant from here on; further shifts repeat
            }
            if k + 1 < n {
                xs = xs.shifted(1);
                ys = ys.shifted(1);
            }
        }
        Ok(best)
    }
}

/// Source of symbol indices for coordinates `0, 1, 2, ...` of a point of `Ω`.
pub trait SymbolSource {
    fn coord(&self, i: usize) -> usize;
}

/// An eventually-constant point of `Ω`: a finite prefix of symbols followed
/// by one symbol repeated forever.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointSeq {
    prefix: Vec<usize>,
    tail: usize,
}

impl PointSeq {
    pub fn new(prefix: Vec<usize>, tail: usize) -> Self {
        Self { prefix, tail }
    }

    /// The constant sequence `(s, s, s, ...)`.
    pub fn constant(s: usize) -> Self {
        Self {
            prefix: Vec::new(),
            tail: s,
        }
    }

    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    pub fn tail_symbol(&self) -> usize {
        self.tail
    }

    /// The shift `σ^k`, dropping `k` leading symbols.
    pub fn shifted(&self, k: usize) -> Self {
        if k >= self.prefix.len() {
            Self::constant(self.tail)
        } else {
            Self {
                prefix: self.prefix[k..].to_vec(),
                tail: self.tail,
            }
        }
    }

    /// The concatenation `a x` for a finite word `a`.
    pub fn prepended(&self, word: &[usize]) -> Self {
        let mut prefix = Vec::with_capacity(word.len() + self.prefix.len());
        prefix.extend_from_slice(word);
        prefix.extend_from_slice(&self.prefix);
        Self {
            prefix,
            tail: self.tail,
        }
    }

    /// First `len` coordinates as a word.
    pub fn word(&self, len: usize) -> Vec<usize> {
        (0..len).map(|i| self.coord(i)).collect()
    }
}

impl SymbolSource for PointSeq {
    fn coord(&self, i: usize) -> usize {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.tail
        }
    }
}

/// View of `a x` (word `a` prepended to `x`) without materializing it.
pub struct Prefixed<'a> {
    pub word: &'a [usize],
    pub rest: &'a PointSeq,
}

impl SymbolSource for Prefixed<'_> {
    fn coord(&self, i: usize) -> usize {
        if i < self.word.len() {
            self.word[i]
        } else {
            self.rest.coord(i - self.word.len())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_alphabet() {
        let a = AprioriAlphabet::two_point();
        assert_eq!(a.nodes(), &[-1.0, 1.0]);
        assert_eq!(a.weights(), &[0.5, 0.5]);
        // the generic finite constructor reproduces it at m = 2
        let b = AprioriAlphabet::finite_atomic(2).unwrap();
        assert_eq!(b.nodes(), a.nodes());
        assert_eq!(b.weights(), a.weights());
    }

    #[test]
    fn interval_midpoints() {
        let a = AprioriAlphabet::interval_uniform(1).unwrap();
        assert_eq!(a.nodes(), &[0.5]);
        assert_eq!(a.weights(), &[1.0]);

        let a = AprioriAlphabet::interval_uniform(4).unwrap();
        assert_eq!(a.nodes(), &[0.125, 0.375, 0.625, 0.875]);
        assert!(a.weights().iter().all(|&w| w == 0.25));
    }

    #[test]
    fn zero_size_rejected() {
        assert!(AprioriAlphabet::finite_atomic(0).is_err());
        assert!(AprioriAlphabet::interval_uniform(0).is_err());
        assert!(AprioriAlphabet::circle_uniform(0).is_err());
    }

    #[test]
    fn bad_weights_rejected() {
        let a = AprioriAlphabet::two_point();
        assert!(a.clone().with_weights(vec![0.5, 0.6]).is_err());
        assert!(a.clone().with_weights(vec![1.0, 0.0]).is_err());
        assert!(a.with_weights(vec![0.25, 0.25, 0.5]).is_err());
    }

    #[test]
    fn duplicate_nodes_rejected() {
        assert!(AprioriAlphabet::finite_atomic_nodes(vec![0.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn seq_dist_identical_is_zero() {
        let a = AprioriAlphabet::two_point();
        let x = PointSeq::new(vec![0, 1, 0], 1);
        assert_eq!(a.seq_dist(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn seq_dist_opposite_spins() {
        // x = +1 everywhere, y = -1 everywhere: Σ 2^{-n} · 2 = 2
        let a = AprioriAlphabet::two_point();
        let x = PointSeq::constant(1);
        let y = PointSeq::constant(0);
        assert_eq!(a.seq_dist(&x, &y).unwrap(), 2.0);
    }

    #[test]
    fn seq_dist_constant_pair_on_interval() {
        // x = (c, c, ...), y = (c', c', ...): distance |c - c'| exactly
        let a = AprioriAlphabet::interval_uniform(8).unwrap();
        let x = PointSeq::constant(0);
        let y = PointSeq::constant(3);
        let eta = (a.node(3) - a.node(0)).abs();
        assert!((a.seq_dist(&x, &y).unwrap() - eta).abs() < 1e-15);
        // and d_n equals d_Ω for every n on constant pairs
        for n in 1..6 {
            assert!((a.seq_dist_n(&x, &y, n).unwrap() - eta).abs() < 1e-15);
        }
    }

    #[test]
    fn seq_dist_n_zero_rejected() {
        let a = AprioriAlphabet::two_point();
        let x = PointSeq::constant(0);
        assert!(a.seq_dist_n(&x, &x, 0).is_err());
    }

    #[test]
    fn seq_dist_rejects_foreign_symbols() {
        let a = AprioriAlphabet::two_point();
        let x = PointSeq::constant(5);
        assert!(a.seq_dist(&x, &x).is_err());
    }

    #[test]
    fn dn_dominates_domega() {
        let a = AprioriAlphabet::interval_uniform(5).unwrap();
        let x = PointSeq::new(vec![0, 2, 4, 1], 0);
        let y = PointSeq::new(vec![4, 0, 3], 2);
        let d1 = a.seq_dist(&x, &y).unwrap();
        let mut prev = 0.0;
        for n in 1..8 {
            let dn = a.seq_dist_n(&x, &y, n).unwrap();
            assert!(dn + 1e-15 >= d1, "k = 0 term is included in the max");
            assert!(dn + 1e-15 >= prev, "d_n is nondecreasing in n");
            prev = dn;
        }
        assert_eq!(a.seq_dist_n(&x, &y, 1).unwrap(), d1);
    }

    #[test]
    fn circle_metric_wraps() {
        let a = AprioriAlphabet::circle_uniform(8).unwrap();
        // nodes 0 and 7 are adjacent on the circle
        let gap = 2.0 * std::f64::consts::PI / 8.0;
        assert!((a.point_dist(0, 7) - gap).abs() < 1e-15);
    }
}
