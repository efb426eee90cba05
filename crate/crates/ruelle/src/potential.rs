//! Potential families on `Ω` and their Birkhoff sums.
//!
//! Every family evaluates pointwise from its closed form, so deep truncations
//! of the long-range family stay usable even when the full `m^depth` table
//! would not fit; [`Potential::tabulate`] materializes the table when it does.

use crate::alphabet::{AprioriAlphabet, SymbolSource};
use crate::cylinder::DepthFunction;
use crate::error::{Error, Result};
use crate::numeric::KahanSum;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialFamily {
    /// `f ≡ c`.
    Constant { value: f64 },
    /// `f(x) = β x₁ x₂` on node values.
    NnIsing { beta: f64 },
    /// `f(x) = -Σ_{n=2}^{d} x₁ x_n / n^α`, the depth-`d` truncation of the
    /// long-range Ising potential.
    LongRangeIsing { alpha: f64, truncation: usize },
    /// `f(x) = x₁`.
    FirstCoordinate,
    /// Arbitrary tabulated values.
    Tabulated,
}

#[derive(Debug, Clone)]
pub struct Potential {
    family: PotentialFamily,
    base: usize,
    depth: usize,
    node_values: Vec<f64>,
    table: Option<DepthFunction>,
    tail_bound: f64,
}

impl Potential {
    pub fn constant(alphabet: &AprioriAlphabet, value: f64) -> Self {
        Self {
            family: PotentialFamily::Constant { value },
            base: alphabet.len(),
            depth: 0,
            node_values: alphabet.nodes().to_vec(),
            table: None,
            tail_bound: 0.0,
        }
    }

    pub fn first_coordinate(alphabet: &AprioriAlphabet) -> Self {
        Self {
            family: PotentialFamily::FirstCoordinate,
            base: alphabet.len(),
            depth: 1,
            node_values: alphabet.nodes().to_vec(),
            table: None,
            tail_bound: 0.0,
        }
    }

    pub fn nn_ising(alphabet: &AprioriAlphabet, beta: f64) -> Self {
        Self {
            family: PotentialFamily::NnIsing { beta },
            base: alphabet.len(),
            depth: 2,
            node_values: alphabet.nodes().to_vec(),
            table: None,
            tail_bound: 0.0,
        }
    }

    /// Truncated long-range potential. Requires `alpha > 2` unless
    /// `allow_slow_decay` is set, in which case any `alpha > 1` is accepted
    /// and no decay claims apply; `alpha <= 1` is rejected (non-summable).
    ///
    /// The recorded tail bound is the integral majorant
    /// `Σ_{m>d} m^{-α} <= d^{1-α}/(α-1)`.
    pub fn long_range_ising(
        alphabet: &AprioriAlphabet,
        alpha: f64,
        truncation: usize,
        allow_slow_decay: bool,
    ) -> Result<Self> {
        if alpha <= 1.0 {
            return Err(Error::invalid(format!(
                "long-range exponent alpha = {alpha} is not summable (need alpha > 1)"
            )));
        }
        if alpha <= 2.0 && !allow_slow_decay {
            return Err(Error::invalid(format!(
                "alpha = {alpha} <= 2 requires the explicit no-decay-claims flag"
            )));
        }
        if truncation < 2 {
            return Err(Error::invalid("truncation depth d must be >= 2"));
        }
        let tail_bound = (truncation as f64).powf(1.0 - alpha) / (alpha - 1.0);
        Ok(Self {
            family: PotentialFamily::LongRangeIsing { alpha, truncation },
            base: alphabet.len(),
            depth: truncation,
            node_values: alphabet.nodes().to_vec(),
            table: None,
            tail_bound,
        })
    }

    pub fn tabulated(alphabet: &AprioriAlphabet, table: DepthFunction) -> Result<Self> {
        if table.base() != alphabet.len() {
            return Err(Error::invalid("table base does not match the alphabet"));
        }
        Ok(Self {
            family: PotentialFamily::Tabulated,
            base: alphabet.len(),
            depth: table.depth(),
            node_values: alphabet.nodes().to_vec(),
            table: Some(table),
            tail_bound: 0.0,
        })
    }

    /// Smallest truncation depth whose integral tail bound is at most `eps`.
    pub fn long_range_default_depth(alpha: f64, eps: f64) -> Result<usize> {
        if alpha <= 1.0 {
            return Err(Error::invalid("need alpha > 1"));
        }
        if !(eps > 0.0) {
            return Err(Error::invalid("need eps > 0"));
        }
        let mut d = 2usize;
        while (d as f64).powf(1.0 - alpha) / (alpha - 1.0) > eps {
            d += 1;
        }
        Ok(d)
    }

    pub fn family(&self) -> &PotentialFamily {
        &self.family
    }

    pub fn base(&self) -> usize {
        self.base
    }

    /// Number of coordinates the potential reads.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn node_values(&self) -> &[f64] {
        &self.node_values
    }

    /// Value on a word with at least `depth` symbols.
    pub fn eval_word(&self, word: &[usize]) -> f64 {
        debug_assert!(word.len() >= self.depth);
        match &self.family {
            PotentialFamily::Constant { value } => *value,
            PotentialFamily::FirstCoordinate => self.node_values[word[0]],
            PotentialFamily::NnIsing { beta } => {
                beta * self.node_values[word[0]] * self.node_values[word[1]]
            }
            PotentialFamily::LongRangeIsing { alpha, truncation } => {
                let x1 = self.node_values[word[0]];
                let mut acc = KahanSum::new();
                for n in 2..=*truncation {
                    acc.add(self.node_values[word[n - 1]] * (n as f64).powf(-alpha));
                }
                -x1 * acc.value()
            }
            PotentialFamily::Tabulated => self.table.as_ref().unwrap().eval_word(word),
        }
    }

    /// Value at a point of `Ω`.
    pub fn eval_seq(&self, x: &impl SymbolSource) -> f64 {
        match &self.family {
            PotentialFamily::Constant { value } => *value,
            PotentialFamily::FirstCoordinate => self.node_values[x.coord(0)],
            PotentialFamily::NnIsing { beta } => {
                beta * self.node_values[x.coord(0)] * self.node_values[x.coord(1)]
            }
            PotentialFamily::LongRangeIsing { alpha, truncation } => {
                let x1 = self.node_values[x.coord(0)];
                let mut acc = KahanSum::new();
                for n in 2..=*truncation {
                    acc.add(self.node_values[x.coord(n - 1)] * (n as f64).powf(-alpha));
                }
                -x1 * acc.value()
            }
            PotentialFamily::Tabulated => self.table.as_ref().unwrap().eval_seq(x),
        }
    }

    /// Materialize the table on `M^depth` (subject to the table cap).
    pub fn tabulate(&self) -> Result<DepthFunction> {
        match &self.table {
            Some(t) => Ok(t.clone()),
            None => DepthFunction::from_fn(self.base, self.depth, |w| self.eval_word(w)),
        }
    }

    /// `self + t * other`, tabulated at the deeper of the two depths.
    pub fn add_scaled(&self, other: &Potential, t: f64) -> Result<Potential> {
        if self.base != other.base || self.node_values != other.node_values {
            return Err(Error::invalid("potentials live on different alphabets"));
        }
        let table = self.tabulate()?.add_scaled(&other.tabulate()?, t)?;
        Ok(Potential {
            family: PotentialFamily::Tabulated,
            base: self.base,
            depth: table.depth(),
            node_values: self.node_values.clone(),
            table: Some(table),
            tail_bound: self.tail_bound + t.abs() * other.tail_bound,
        })
    }

    /// Pointwise product with another potential.
    pub fn product(&self, other: &Potential) -> Result<Potential> {
        if self.base != other.base || self.node_values != other.node_values {
            return Err(Error::invalid("potentials live on different alphabets"));
        }
        let table = self.tabulate()?.product(&other.tabulate()?)?;
        Ok(Potential {
            family: PotentialFamily::Tabulated,
            base: self.base,
            depth: table.depth(),
            node_values: self.node_values.clone(),
            table: Some(table),
            tail_bound: 0.0,
        })
    }

    /// Exact sup of `|f|` over the grid.
    pub fn sup_norm(&self) -> Result<f64> {
        match &self.family {
            PotentialFamily::Constant { value } => Ok(value.abs()),
            _ => Ok(self.tabulate()?.sup_norm()),
        }
    }
}

/// Birkhoff sum `S_n f(x) = Σ_{k=0}^{n-1} f(σ^k x)`; `n = 0` returns 0.
pub fn birkhoff_sum<S: SymbolSource + ?Sized>(f: &Potential, x: &S, n: usize) -> f64 {
    let mut acc = KahanSum::new();
    for k in 0..n {
        acc.add(f.eval_seq(&Shifted { inner: x, by: k }));
    }
    acc.value()
}

struct Shifted<'a, S: ?Sized> {
    inner: &'a S,
    by: usize,
}

impl<S: SymbolSource + ?Sized> SymbolSource for Shifted<'_, S> {
    fn coord(&self, i: usize) -> usize {
        self.inner.coord(i + self.by)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{AprioriAlphabet, PointSeq, Prefixed};

    #[test]
    fn constant_family() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::constant(&a, 0.3);
        assert_eq!(f.depth(), 0);
        assert_eq!(f.tabulate().unwrap().table(), &[0.3]);
    }

    #[test]
    fn nn_ising_table() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::nn_ising(&a, 1.0);
        let t = f.tabulate().unwrap();
        // words in lexicographic order: (-,-), (-,+), (+,-), (+,+)
        assert_eq!(t.table(), &[1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn nn_ising_values_scale_by_beta() {
        let a = AprioriAlphabet::interval_uniform(3).unwrap();
        let beta = 0.7;
        let f = Potential::nn_ising(&a, beta);
        for i in 0..3 {
            for j in 0..3 {
                let expect = beta * a.node(i) * a.node(j);
                assert!((f.eval_word(&[i, j]) - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn long_range_tail_bound() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::long_range_ising(&a, 3.0, 10, false).unwrap();
        assert!(f.tail_bound() <= 0.005 + 1e-15);
        assert!(f.tail_bound() >= crate::numeric::zeta_tail(3.0, 10));
    }

    #[test]
    fn long_range_validation() {
        let a = AprioriAlphabet::two_point();
        assert!(Potential::long_range_ising(&a, 1.0, 10, false).is_err());
        assert!(Potential::long_range_ising(&a, 0.5, 10, true).is_err());
        assert!(Potential::long_range_ising(&a, 1.5, 10, false).is_err());
        assert!(Potential::long_range_ising(&a, 1.5, 10, true).is_ok());
        assert!(Potential::long_range_ising(&a, 3.0, 1, false).is_err());
    }

    #[test]
    fn long_range_values() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::long_range_ising(&a, 3.0, 4, false).unwrap();
        // x = (+,+,+,+): f = -(1/8 + 1/27 + 1/64)
        let expect = -(1.0 / 8.0 + 1.0 / 27.0 + 1.0 / 64.0);
        assert!((f.eval_word(&[1, 1, 1, 1]) - expect).abs() < 1e-15);
        // flipping x1 flips the sign
        assert!((f.eval_word(&[0, 1, 1, 1]) + expect).abs() < 1e-15);
    }

    #[test]
    fn default_depth_matches_integral_bound() {
        let d = Potential::long_range_default_depth(3.0, 1e-6).unwrap();
        assert_eq!(d, 708);
        let a = AprioriAlphabet::two_point();
        // deep truncations evaluate pointwise even though no table fits
        let f = Potential::long_range_ising(&a, 3.0, d, false).unwrap();
        assert!(f.tail_bound() <= 1e-6);
        assert!(f.tabulate().is_err(), "2^708 table must be refused");
        let x = PointSeq::constant(1);
        assert!(f.eval_seq(&x).is_finite());
    }

    #[test]
    fn birkhoff_first_coordinate_constant_seq() {
        // S_n f(y) = n * eta for y = (eta, eta, ...), f = first coordinate
        let a = AprioriAlphabet::interval_uniform(4).unwrap();
        let f = Potential::first_coordinate(&a);
        let y = PointSeq::constant(2);
        let eta = a.node(2);
        for n in 0..20 {
            assert!((birkhoff_sum(&f, &y, n) - n as f64 * eta).abs() < 1e-13);
        }
    }

    #[test]
    fn birkhoff_constant() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::constant(&a, -0.7);
        let x = PointSeq::new(vec![0, 1, 1], 0);
        assert_eq!(birkhoff_sum(&f, &x, 0), 0.0);
        assert!((birkhoff_sum(&f, &x, 13) - 13.0 * -0.7).abs() < 1e-13);
    }

    #[test]
    fn birkhoff_cocycle() {
        let a = AprioriAlphabet::two_point();
        let potentials = [
            Potential::constant(&a, 0.4),
            Potential::first_coordinate(&a),
            Potential::nn_ising(&a, 1.3),
            Potential::long_range_ising(&a, 3.0, 6, false).unwrap(),
        ];
        let x = PointSeq::new(vec![1, 0, 0, 1, 0, 1, 1, 0], 1);
        for f in &potentials {
            for (n, m) in [(3usize, 4usize), (0, 5), (7, 2), (1, 1)] {
                let lhs = birkhoff_sum(f, &x, n + m);
                let rhs = birkhoff_sum(f, &x, n) + birkhoff_sum(f, &x.shifted(n), m);
                assert!((lhs - rhs).abs() < 1e-12, "cocycle failed: n={n} m={m}");
            }
        }
    }

    #[test]
    fn birkhoff_on_prefixed_view() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::nn_ising(&a, 1.0);
        let x = PointSeq::constant(1);
        let word = [0usize, 0, 1];
        let view = Prefixed {
            word: &word,
            rest: &x,
        };
        let direct = birkhoff_sum(&f, &x.prepended(&word), 3);
        assert_eq!(birkhoff_sum(&f, &view, 3), direct);
    }
}
