//! Exact finite-volume Gibbs measures of the long-range Ising ferromagnet
//! with `+1` boundary condition, and the GKS inequality audits built on them.
//!
//! Conventions: Boltzmann weight `exp(Σ_{ {i,j} ⊂ W } J_ij z_i z_j + Σ_i h_i z_i)`
//! with unordered pairs counted once and `J_ij = |i-j|^{-α} >= 0`; the `+1`
//! spins outside the window enter as site fields `h_i = Σ_{j∉W} J_ij`,
//! evaluated by partial sums plus an Euler-Maclaurin closure certified far
//! below the requested tail budget. This reproduces the single-bond
//! two-point value `tanh(n^{-α})` exactly.
//!
//! Configurations are enumerated in Gray-code order with O(|W|) incremental
//! energy updates (and periodic exact refresh); the partition function is a
//! streaming log-sum-exp. When the window is small enough the full table of
//! monomial expectations `⟨Π_{i∈A} z_i⟩` is materialized at once as the
//! Walsh-Hadamard transform of the probability vector, making every audit
//! query a table lookup.

use crate::error::{Error, Result};
use crate::numeric::{zeta_tail, KahanSum, LogSumExp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;

/// Enumeration cap: at most `2^24` configurations.
pub const ENUM_CAP: usize = 24;
/// Window size up to which the full expectation table is materialized.
const MOMENT_CAP: usize = 22;
/// Certified absolute error of the boundary-field tails.
const TAIL_CERT: f64 = 1e-13;

/// Inclusive integer interval of lattice sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::invalid("empty window"));
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, site: i64) -> bool {
        (self.lo..=self.hi).contains(&site)
    }

    pub fn index(&self, site: i64) -> Result<usize> {
        if self.contains(site) {
            Ok((site - self.lo) as usize)
        } else {
            Err(Error::invalid(format!(
                "site {site} outside window [{}, {}]",
                self.lo, self.hi
            )))
        }
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> + '_ {
        self.lo..=self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingKind {
    Zero,
    /// `J_ij = |i-j|^{-α}` for all distinct sites of `ℤ`.
    Full {
        alpha: f64,
    },
    /// Same, but only when both sites lie in `ℕ = {1, 2, ...}`.
    RestrictedNat {
        alpha: f64,
    },
    /// A single bond `{i, j}` of strength `K >= 0`.
    SingleBond {
        i: i64,
        j: i64,
        strength: f64,
    },
}

/// Pair couplings over a window, with closed-form boundary tails.
#[derive(Debug, Clone)]
pub struct CouplingField {
    window: Window,
    kind: CouplingKind,
    /// In-window unordered pairs as (bit index, bit index, J), i < j.
    pairs: Vec<(usize, usize, f64)>,
}

fn in_nat(site: i64) -> bool {
    site >= 1
}

pub fn make_couplings(kind: CouplingKind, window: Window) -> Result<CouplingField> {
    match kind {
        CouplingKind::Full { alpha } | CouplingKind::RestrictedNat { alpha } => {
            if alpha <= 1.0 {
                return Err(Error::invalid("coupling exponent must satisfy alpha > 1"));
            }
        }
        CouplingKind::SingleBond { i, j, strength } => {
            if i == j {
                return Err(Error::invalid("a bond needs two distinct sites"));
            }
            if strength < 0.0 {
                return Err(Error::invalid(
                    "negative couplings leave the GKS domain (need K >= 0)",
                ));
            }
        }
        CouplingKind::Zero => {}
    }
    let mut pairs = Vec::new();
    match kind {
        CouplingKind::Zero => {}
        CouplingKind::Full { alpha } => {
            for i in window.sites() {
                for j in (i + 1)..=window.hi {
                    let d = (j - i) as f64;
                    pairs.push((window.index(i)?, window.index(j)?, d.powf(-alpha)));
                }
            }
        }
        CouplingKind::RestrictedNat { alpha } => {
            for i in window.sites().filter(|&s| in_nat(s)) {
                for j in (i + 1)..=window.hi {
                    let d = (j - i) as f64;
                    pairs.push((window.index(i)?, window.index(j)?, d.powf(-alpha)));
                }
            }
        }
        CouplingKind::SingleBond { i, j, strength } => {
            if window.contains(i) && window.contains(j) {
                let (a, b) = (window.index(i)?, window.index(j)?);
                pairs.push((a.min(b), a.max(b), strength));
            }
        }
    }
    Ok(CouplingField {
        window,
        kind,
        pairs,
    })
}

impl CouplingField {
    pub fn window(&self) -> Window {
        self.window
    }

    pub fn kind(&self) -> CouplingKind {
        self.kind
    }

    pub fn pairs(&self) -> &[(usize, usize, f64)] {
        &self.pairs
    }

    /// `h_site = Σ_{j ∉ W} J_{site,j}` under the all-plus boundary.
    pub fn boundary_field(&self, site: i64) -> Result<f64> {
        let w = self.window;
        w.index(site)?;
        Ok(match self.kind {
            CouplingKind::Zero => 0.0,
            CouplingKind::Full { alpha } => {
                zeta_tail(alpha, (site - w.lo) as u64) + zeta_tail(alpha, (w.hi - site) as u64)
            }
            CouplingKind::RestrictedNat { alpha } => {
                if !in_nat(site) {
                    0.0
                } else {
                    // right exterior j > hi (all in ℕ since hi >= site >= 1)
                    let mut h = zeta_tail(alpha, (w.hi - site) as u64);
                    // left exterior 1 <= j <= lo-1
                    if w.lo > 1 {
                        h += zeta_tail(alpha, (site - w.lo) as u64)
                            - zeta_tail(alpha, (site - 1) as u64);
                    }
                    h
                }
            }
            CouplingKind::SingleBond { i, j, strength } => {
                if site == i && !w.contains(j) || site == j && !w.contains(i) {
                    strength
                } else {
                    0.0
                }
            }
        })
    }

    /// Copy with `delta` added to an in-window bond (creating it at strength
    /// `delta` if absent). Used by derivative and monotonicity probes; the
    /// boundary fields are untouched by construction.
    pub fn with_bond_delta(&self, bond: (i64, i64), delta: f64) -> Result<CouplingField> {
        let a = self.window.index(bond.0)?;
        let b = self.window.index(bond.1)?;
        if a == b {
            return Err(Error::invalid("a bond needs two distinct sites"));
        }
        let (a, b) = (a.min(b), a.max(b));
        let mut out = self.clone();
        if let Some(p) = out.pairs.iter_mut().find(|(i, j, _)| *i == a && *j == b) {
            p.2 += delta;
        } else {
            out.pairs.push((a, b, delta));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// `+1` spins outside the window, folded into site fields.
    PlusOne,
    /// No exterior influence (free boundary).
    Free,
}

/// The exact Boltzmann distribution on window configurations.
#[derive(Debug, Clone)]
pub struct FiniteVolumeGibbs {
    window: Window,
    couplings: CouplingField,
    boundary: Boundary,
    fields: Vec<f64>,
    neighbors: Vec<Vec<(usize, f64)>>,
    log_z: f64,
    /// `|Σ exp(E - logZ) - 1|`.
    prob_sum_error: f64,
    /// Walsh-Hadamard table of all monomial expectations, when materialized.
    moments: Option<Vec<f64>>,
}

fn wht_in_place(data: &mut [f64]) {
    let n = data.len();
    let mut h = 1;
    while h < n {
        let mut start = 0;
        while start < n {
            for i in start..start + h {
                let a = data[i];
                let b = data[i + h];
                data[i] = a + b;
                data[i + h] = a - b;
            }
            start += 2 * h;
        }
        h *= 2;
    }
}

/// Build the exact measure. `tail_eps` is the acceptable absolute error in
/// each boundary field; the tails are certified to `1e-13`, so anything in
/// `[1e-13, 1e-10]` is accepted.
pub fn gibbs_exact(
    couplings: &CouplingField,
    boundary: Boundary,
    tail_eps: f64,
) -> Result<FiniteVolumeGibbs> {
    let window = couplings.window();
    let n = window.len();
    if n > ENUM_CAP {
        return Err(Error::ResourceLimit(format!(
            "window of {n} sites exceeds the enumeration cap of {ENUM_CAP}"
        )));
    }
    if !(tail_eps <= 1e-10) {
        return Err(Error::invalid("tail_eps must be <= 1e-10"));
    }
    if tail_eps < TAIL_CERT {
        return Err(Error::PrecisionFailure(format!(
            "boundary tails are certified to {TAIL_CERT:.0e}, cannot promise {tail_eps:.0e}"
        )));
    }
    let fields: Vec<f64> = match boundary {
        Boundary::PlusOne => window
            .sites()
            .map(|s| couplings.boundary_field(s))
            .collect::<Result<_>>()?,
        Boundary::Free => vec![0.0; n],
    };
    let mut neighbors = vec![Vec::new(); n];
    for &(i, j, v) in couplings.pairs() {
        neighbors[i].push((j, v));
        neighbors[j].push((i, v));
    }
    let mut g = FiniteVolumeGibbs {
        window,
        couplings: couplings.clone(),
        boundary,
        fields,
        neighbors,
        log_z: 0.0,
        prob_sum_error: 0.0,
        moments: None,
    };
    let mut lse = LogSumExp::new();
    g.for_each_config(|_, e| lse.add(e));
    g.log_z = lse.value();

    if n <= MOMENT_CAP {
        let mut probs = vec![0.0f64; 1usize << n];
        let log_z = g.log_z;
        g.for_each_config(|bits, e| probs[bits as usize] = (e - log_z).exp());
        let mut sum = KahanSum::new();
        for &p in &probs {
            sum.add(p);
        }
        g.prob_sum_error = (sum.value() - 1.0).abs();
        wht_in_place(&mut probs);
        g.moments = Some(probs);
    } else {
        let log_z = g.log_z;
        let mut sum = KahanSum::new();
        g.for_each_config(|_, e| sum.add((e - log_z).exp()));
        g.prob_sum_error = (sum.value() - 1.0).abs();
    }
    Ok(g)
}

impl FiniteVolumeGibbs {
    pub fn window(&self) -> Window {
        self.window
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn prob_sum_error(&self) -> f64 {
        self.prob_sum_error
    }

    pub fn n_sites(&self) -> usize {
        self.window.len()
    }

    fn energy_of_bits(&self, bits: u64) -> f64 {
        let z = |i: usize| 1.0 - 2.0 * ((bits >> i) & 1) as f64;
        let mut acc = KahanSum::new();
        for &(i, j, v) in self.couplings.pairs() {
            acc.add(v * z(i) * z(j));
        }
        for (i, &h) in self.fields.iter().enumerate() {
            acc.add(h * z(i));
        }
        acc.value()
    }

    /// Visit all `2^n` configurations in Gray-code order with incremental
    /// energies (exactly refreshed every 4096 steps).
    fn for_each_config(&self, mut visit: impl FnMut(u64, f64)) {
        let n = self.n_sites();
        let total: u64 = 1 << n;
        let mut z: Vec<f64> = vec![1.0; n];
        let mut bits: u64 = 0;
        let mut energy = self.energy_of_bits(0);
        visit(0, energy);
        for step in 1..total {
            let flip = step.trailing_zeros() as usize;
            let mut local = self.fields[flip];
            for &(j, v) in &self.neighbors[flip] {
                local += v * z[j];
            }
            energy -= 2.0 * z[flip] * local;
            z[flip] = -z[flip];
            bits ^= 1 << flip;
            if step & 0xFFF == 0 {
                energy = self.energy_of_bits(bits);
            }
            visit(bits, energy);
        }
    }

    fn mask_of(&self, sites: &[i64]) -> Result<u64> {
        let mut mask = 0u64;
        for &s in sites {
            mask ^= 1u64 << self.window.index(s)?;
        }
        Ok(mask)
    }

    /// `⟨Π_{i∈A} z_i⟩` for a monomial given by a bit mask over the window
    /// (repeated sites cancel via `z² = 1`, which the XOR already encodes).
    pub fn expectation_mask(&self, mask: u64) -> f64 {
        debug_assert!(mask < (1u64 << self.n_sites()));
        if let Some(m) = &self.moments {
            return m[mask as usize];
        }
        let log_z = self.log_z;
        let mut acc = KahanSum::new();
        self.for_each_config(|bits, e| {
            let sign = if (bits & mask).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            acc.add(sign * (e - log_z).exp());
        });
        acc.value()
    }

    /// `⟨Π_{i∈A} z_i⟩` by exact enumeration; `A = ∅` integrates to 1.
    pub fn expectation(&self, sites: &[i64]) -> Result<f64> {
        Ok(self.expectation_mask(self.mask_of(sites)?))
    }

    /// `⟨z_A z_B⟩ - ⟨z_A⟩⟨z_B⟩` with the symmetric-difference simplification.
    pub fn covariance(&self, a: &[i64], b: &[i64]) -> Result<f64> {
        let ma = self.mask_of(a)?;
        let mb = self.mask_of(b)?;
        Ok(self.covariance_masks(ma, mb))
    }

    pub fn covariance_masks(&self, ma: u64, mb: u64) -> f64 {
        self.expectation_mask(ma ^ mb) - self.expectation_mask(ma) * self.expectation_mask(mb)
    }

    fn sites_of_mask(&self, mask: u64) -> Vec<i64> {
        (0..self.n_sites())
            .filter(|i| (mask >> i) & 1 == 1)
            .map(|i| self.window.lo + i as i64)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct GksAuditReport {
    pub checked: usize,
    pub min_value: f64,
    /// Every audited quantity as (subset label, value); GKS-II labels are
    /// `A|{i,j}`.
    pub rows: Vec<(String, f64)>,
    pub violations: Vec<(Vec<i64>, f64)>,
    pub tolerance: f64,
}

fn subset_label(sites: &[i64]) -> String {
    let inner = sites
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    format!("{{{inner}}}")
}

fn subsets_up_to(n: usize, cap: usize) -> Vec<u64> {
    let mut out = vec![0u64];
    let mut current: Vec<u64> = vec![0];
    for _ in 0..cap.min(n) {
        let mut next = Vec::new();
        for &mask in &current {
            let start = 64 - mask.leading_zeros() as usize; // lowest unused site
            let first = if mask == 0 { 0 } else { start };
            for b in first..n {
                next.push(mask | (1 << b));
            }
        }
        out.extend(&next);
        current = next;
    }
    out
}

fn random_masks(n: usize, count: usize, seed: u64) -> Vec<u64> {
    let total: u64 = 1 << n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let limit = count.min((total - 1) as usize);
    while seen.len() < limit {
        let m = rng.gen_range(1..total);
        seen.insert(m);
    }
    seen.into_iter().collect()
}

/// GKS-I audit: `⟨Π_A z⟩ >= -tol` for every monomial over all subsets up to
/// `max_size` plus `n_random` seeded subsets. Violations would indicate an
/// implementation bug since the hypotheses hold by construction.
pub fn gks1_audit(
    g: &FiniteVolumeGibbs,
    max_size: usize,
    n_random: usize,
    seed: u64,
    tol: f64,
) -> Result<GksAuditReport> {
    let n = g.n_sites();
    let mut masks = subsets_up_to(n, max_size);
    masks.extend(random_masks(n, n_random, seed));
    masks.sort_unstable();
    masks.dedup();
    let mut min_value = f64::INFINITY;
    let mut violations = Vec::new();
    let mut rows = Vec::with_capacity(masks.len());
    for &m in &masks {
        let v = g.expectation_mask(m);
        min_value = min_value.min(v);
        rows.push((subset_label(&g.sites_of_mask(m)), v));
        if v < -tol {
            violations.push((g.sites_of_mask(m), v));
        }
    }
    Ok(GksAuditReport {
        checked: masks.len(),
        min_value,
        rows,
        violations,
        tolerance: tol,
    })
}

/// GKS-II audit: `cov(Π_A z, z_i z_j) >= -tol` over all in-window pairs
/// `{i,j}` and the sampled subsets `A` (plus the empty set).
pub fn gks2_audit(
    g: &FiniteVolumeGibbs,
    n_random: usize,
    seed: u64,
    tol: f64,
) -> Result<GksAuditReport> {
    let n = g.n_sites();
    let mut a_masks = vec![0u64];
    a_masks.extend(random_masks(n, n_random, seed));
    let mut min_value = f64::INFINITY;
    let mut violations = Vec::new();
    let mut rows = Vec::new();
    let mut checked = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            let pair = (1u64 << i) | (1u64 << j);
            let pair_sites = [g.window.lo + i as i64, g.window.lo + j as i64];
            for &a in &a_masks {
                let v = g.covariance_masks(a, pair);
                checked += 1;
                min_value = min_value.min(v);
                rows.push((
                    format!(
                        "{}|{}",
                        subset_label(&g.sites_of_mask(a)),
                        subset_label(&pair_sites)
                    ),
                    v,
                ));
                if v < -tol {
                    let mut witness = g.sites_of_mask(a);
                    witness.extend_from_slice(&pair_sites);
                    violations.push((witness, v));
                }
            }
        }
    }
    Ok(GksAuditReport {
        checked,
        min_value,
        rows,
        violations,
        tolerance: tol,
    })
}

#[derive(Debug, Clone)]
pub struct DerivativeCheck {
    pub delta: f64,
    pub finite_difference: f64,
    pub covariance: f64,
    /// `|central difference - covariance|`; behaves as `O(δ²)`.
    pub residual: f64,
}

/// The coupling-derivative identity
/// `∂⟨z_A⟩ / ∂J_ij = cov(z_A, z_i z_j)`, checked against a central finite
/// difference at step `delta <= 1e-3`.
pub fn coupling_derivative_check(
    couplings: &CouplingField,
    boundary: Boundary,
    bond: (i64, i64),
    a_sites: &[i64],
    delta: f64,
) -> Result<DerivativeCheck> {
    if !(delta > 0.0 && delta <= 1e-3) {
        return Err(Error::invalid("need 0 < delta <= 1e-3"));
    }
    let base = gibbs_exact(couplings, boundary, 1e-12)?;
    let bond_sites = [bond.0, bond.1];
    let cov = base.covariance(a_sites, &bond_sites)?;
    let plus = gibbs_exact(&couplings.with_bond_delta(bond, delta)?, boundary, 1e-12)?;
    let minus = gibbs_exact(&couplings.with_bond_delta(bond, -delta)?, boundary, 1e-12)?;
    let fd = (plus.expectation(a_sites)? - minus.expectation(a_sites)?) / (2.0 * delta);
    Ok(DerivativeCheck {
        delta,
        finite_difference: fd,
        covariance: cov,
        residual: (fd - cov).abs(),
    })
}

#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    pub base: f64,
    pub bumped: f64,
    pub ok: bool,
}

/// GKS-II consequence: increasing any coupling cannot decrease a monomial
/// expectation (ferromagnetic monotonicity).
pub fn monotonicity_probe(
    couplings: &CouplingField,
    boundary: Boundary,
    bond: (i64, i64),
    a_sites: &[i64],
    delta: f64,
) -> Result<MonotonicityReport> {
    if !(delta >= 0.0) {
        return Err(Error::invalid("delta must be nonnegative"));
    }
    let base = gibbs_exact(couplings, boundary, 1e-12)?.expectation(a_sites)?;
    let bumped = gibbs_exact(&couplings.with_bond_delta(bond, delta)?, boundary, 1e-12)?
        .expectation(a_sites)?;
    Ok(MonotonicityReport {
        base,
        bumped,
        ok: bumped >= base - 1e-12,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoPointRow {
    pub n: usize,
    /// `⟨z₁ z_{1+n}⟩` under the full coupling with `+1` boundary.
    pub value: f64,
    /// `tanh(n^{-α})`, the single-bond lower bound.
    pub tanh_bound: f64,
    /// `n^{-α} (1 - n^{-2α}/3)`, the Taylor minorant of the tanh bound.
    pub taylor_bound: f64,
    /// `value - tanh_bound` (must be `>= -1e-12`).
    pub margin: f64,
}

#[derive(Debug, Clone)]
pub struct TwoPointSeries {
    pub alpha: f64,
    pub window: Window,
    pub rows: Vec<TwoPointRow>,
}

/// Two-point function `⟨z₁ z_{1+n}⟩` for each `n`, with the `tanh(n^{-α})`
/// lower-bound columns.
pub fn two_point_series(alpha: f64, n_list: &[usize], window: Window) -> Result<TwoPointSeries> {
    let max_n = *n_list
        .iter()
        .max()
        .ok_or_else(|| Error::invalid("empty n list"))?;
    if !window.contains(1) || !window.contains(1 + max_n as i64) {
        return Err(Error::invalid(
            "window must contain site 1 and site 1 + max(n)",
        ));
    }
    let field = make_couplings(CouplingKind::Full { alpha }, window)?;
    let g = gibbs_exact(&field, Boundary::PlusOne, 1e-12)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        if n == 0 {
            return Err(Error::invalid("two-point separation n must be >= 1"));
        }
        let value = g.expectation(&[1, 1 + n as i64])?;
        let x = (n as f64).powf(-alpha);
        let tanh_bound = x.tanh();
        rows.push(TwoPointRow {
            n,
            value,
            tanh_bound,
            taylor_bound: x * (1.0 - x * x / 3.0),
            margin: value - tanh_bound,
        });
    }
    Ok(TwoPointSeries {
        alpha,
        window,
        rows,
    })
}

/// Control configuration: only the bond `{1, n+1}` at strength `n^{-α}`,
/// whose two-point value is `tanh(n^{-α})` exactly.
pub fn single_bond_two_point(alpha: f64, n: usize, window: Window) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("separation n must be >= 1"));
    }
    let strength = (n as f64).powf(-alpha);
    let field = make_couplings(
        CouplingKind::SingleBond {
            i: 1,
            j: 1 + n as i64,
            strength,
        },
        window,
    )?;
    let g = gibbs_exact(&field, Boundary::PlusOne, 1e-12)?;
    g.expectation(&[1, 1 + n as i64])
}

#[derive(Debug, Clone)]
pub struct MarginalReport {
    pub n: usize,
    pub alpha: f64,
    pub checked: usize,
    pub max_discrepancy: f64,
}

/// The ℤ-window measure with `T^Φ` couplings (only ℕ-pairs interact) must
/// marginalize to the ℕ-window measure: spins at nonpositive sites are free
/// and cancel between numerator and partition function. Compares all
/// monomials over `{1..min(n,6)}` plus seeded random subsets of `{1..n}`.
pub fn marginal_equivalence(
    n: usize,
    alpha: f64,
    n_random: usize,
    seed: u64,
) -> Result<MarginalReport> {
    if n == 0 {
        return Err(Error::invalid("need n >= 1"));
    }
    let z_window = Window::new(-(n as i64), n as i64)?;
    if z_window.len() > ENUM_CAP {
        return Err(Error::ResourceLimit(format!(
            "ℤ-window of {} sites exceeds the enumeration cap",
            z_window.len()
        )));
    }
    let n_window = Window::new(1, n as i64)?;
    let z_measure = gibbs_exact(
        &make_couplings(CouplingKind::RestrictedNat { alpha }, z_window)?,
        Boundary::PlusOne,
        1e-12,
    )?;
    let n_measure = gibbs_exact(
        &make_couplings(CouplingKind::RestrictedNat { alpha }, n_window)?,
        Boundary::PlusOne,
        1e-12,
    )?;

    let mut subsets: Vec<Vec<i64>> = Vec::new();
    let small = n.min(6);
    for mask in 0u64..(1 << small) {
        subsets.push(
            (0..small)
                .filter(|b| (mask >> b) & 1 == 1)
                .map(|b| 1 + b as i64)
                .collect(),
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_random {
        let sites: Vec<i64> = (1..=n as i64).filter(|_| rng.gen_bool(0.5)).collect();
        subsets.push(sites);
    }

    let mut max_discrepancy = 0.0f64;
    for sites in &subsets {
        let on_z = z_measure.expectation(sites)?;
        let on_n = n_measure.expectation(sites)?;
        max_discrepancy = max_discrepancy.max((on_z - on_n).abs());
    }
    Ok(MarginalReport {
        n,
        alpha,
        checked: subsets.len(),
        max_discrepancy,
    })
}
