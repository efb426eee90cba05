//! The Ruelle operator `(L_f φ)(x) = Σ_a μ(a) e^{f(ax)} φ(ax)` on tabulated
//! cylinder functions: application, finite matrix assembly, the
//! Ruelle-Perron-Frobenius eigentriple by power iteration, topological
//! pressure, and normalization into the class `G₀` of positive potentials
//! whose operator fixes the constants.

use crate::alphabet::AprioriAlphabet;
use crate::cylinder::{index_of_word, table_len, word_of_index, DepthFunction};
use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use nalgebra::DMatrix;

/// One application of `L_f` to a tabulated function. The result depends on
/// `max(depth f, depth φ) - 1` coordinates.
pub fn apply(
    alphabet: &AprioriAlphabet,
    f: &crate::potential::Potential,
    phi: &DepthFunction,
) -> Result<DepthFunction> {
    if f.base() != alphabet.len() || phi.base() != alphabet.len() {
        return Err(Error::invalid("operator inputs on a different alphabet"));
    }
    let out_depth = f.depth().max(phi.depth()).saturating_sub(1);
    let m = alphabet.len();
    table_len(m, out_depth + 1)?; // the extended word grid must fit
    let mut aw = vec![0usize; out_depth + 1];
    DepthFunction::from_fn(m, out_depth, |w| {
        aw[1..].copy_from_slice(w);
        let mut acc = KahanSum::new();
        for a in 0..m {
            aw[0] = a;
            acc.add(alphabet.weight(a) * f.eval_word(&aw).exp() * phi.eval_word(&aw));
        }
        acc.value()
    })
}

/// Finite matrix of `L_f` acting on depth-`k` tables: row `w`, column
/// `w' = (a, w_1, ..., w_{k-1})` holds `μ(a) e^{f(a·w)}`.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    depth: usize,
    base: usize,
    matrix: DMatrix<f64>,
}

impl TransferMatrix {
    pub(crate) fn from_matrix_unchecked(depth: usize, base: usize, matrix: DMatrix<f64>) -> Self {
        Self {
            depth,
            base,
            matrix,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Matrix action on a depth-`k` table.
    pub fn apply_table(&self, v: &[f64]) -> Vec<f64> {
        let n = self.order();
        assert_eq!(v.len(), n);
        let mut out = vec![0.0; n];
        for r in 0..n {
            let mut acc = KahanSum::new();
            for c in 0..n {
                let e = self.matrix[(r, c)];
                if e != 0.0 {
                    acc.add(e * v[c]);
                }
            }
            out[r] = acc.value();
        }
        out
    }

    /// Left action `u^T L` on a weight vector.
    pub fn apply_left(&self, u: &[f64]) -> Vec<f64> {
        let n = self.order();
        assert_eq!(u.len(), n);
        let mut out = vec![KahanSum::new(); n];
        for r in 0..n {
            if u[r] == 0.0 {
                continue;
            }
            for c in 0..n {
                let e = self.matrix[(r, c)];
                if e != 0.0 {
                    out[c].add(u[r] * e);
                }
            }
        }
        out.into_iter().map(|k| k.value()).collect()
    }
}

/// Assemble the order-`m^k` transfer matrix of `f` at depth `k`.
/// Requires `k >= max(depth f - 1, 1)` so the matrix action is exact.
pub fn assemble(
    alphabet: &AprioriAlphabet,
    f: &crate::potential::Potential,
    k: usize,
) -> Result<TransferMatrix> {
    if f.base() != alphabet.len() {
        return Err(Error::invalid("potential on a different alphabet"));
    }
    if k < f.depth().saturating_sub(1).max(1) {
        return Err(Error::invalid(format!(
            "depth k = {k} too small for a potential reading {} coordinates",
            f.depth()
        )));
    }
    let m = alphabet.len();
    let n = table_len(m, k)?;
    table_len(m, k + 1)?;
    let mut matrix = DMatrix::<f64>::zeros(n, n);
    let mut w = vec![0usize; k];
    let mut aw = vec![0usize; k + 1];
    for row in 0..n {
        word_of_index(m, k, row, &mut w);
        aw[1..].copy_from_slice(&w);
        for a in 0..m {
            aw[0] = a;
            let col = index_of_word(m, &aw[..k]);
            matrix[(row, col)] += alphabet.weight(a) * f.eval_word(&aw).exp();
        }
    }
    Ok(TransferMatrix {
        depth: k,
        base: m,
        matrix,
    })
}

/// The Ruelle-Perron-Frobenius eigentriple `(λ, h, ν)` with
/// `ν(1) = 1`, `ν(h) = 1`, plus residual diagnostics.
#[derive(Debug, Clone)]
pub struct RpfData {
    pub lambda: f64,
    pub h: DepthFunction,
    pub nu: Vec<f64>,
    pub residual_h: f64,
    pub residual_nu: f64,
    pub iterations: usize,
}

impl RpfData {
    /// `ν(φ) = Σ_w ν_w φ(w)` for a function of at most `depth` coordinates.
    pub fn nu_pair(&self, phi: &DepthFunction) -> Result<f64> {
        if phi.depth() > self.h.depth() {
            return Err(Error::invalid(
                "observable deeper than the eigenmeasure grid",
            ));
        }
        let aligned = phi.align(self.h.depth())?;
        let mut acc = KahanSum::new();
        for (w, v) in self.nu.iter().zip(aligned.table()) {
            acc.add(w * v);
        }
        Ok(acc.value())
    }
}

/// Power iteration for the RPF data of `f` at depth `k`.
///
/// Right iteration starts from the constant `1`, left iteration from the
/// uniform weight vector; both are normalized in sup / l¹ norm respectively,
/// so runs are reproducible bit for bit. Stops when the eigenvalue estimate
/// and the normalized iterates are both stationary to within `tol`.
pub fn rpf_solve(
    alphabet: &AprioriAlphabet,
    f: &crate::potential::Potential,
    k: usize,
    tol: f64,
    itmax: usize,
) -> Result<RpfData> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let t = assemble(alphabet, f, k)?;
    let n = t.order();

    let mut v = vec![1.0; n];
    let mut u = vec![1.0 / n as f64; n];
    let mut lambda = 0.0;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < itmax {
        iterations += 1;
        let av = t.apply_table(&v);
        let ua = t.apply_left(&u);
        let lam_r = av.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        let lam_l: f64 = ua.iter().sum();
        if !(lam_r > 0.0) || !(lam_l > 0.0) {
            return Err(Error::NumericalFailure(
                "power iteration collapsed to zero".into(),
            ));
        }
        let mut dv = 0.0f64;
        for i in 0..n {
            let nv = av[i] / lam_r;
            dv = dv.max((nv - v[i]).abs());
            v[i] = nv;
        }
        for i in 0..n {
            u[i] = ua[i] / lam_l;
        }
        let dl = (lam_r - lambda).abs();
        lambda = lam_r;
        if dl <= tol * lambda && dv <= tol {
            converged = true;
            break;
        }
    }

    // Rayleigh quotient with both one-sided iterates sharpens λ.
    let av = t.apply_table(&v);
    let num: f64 = u.iter().zip(&av).map(|(a, b)| a * b).sum();
    let den: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
    if den > 0.0 && num > 0.0 {
        lambda = num / den;
    }

    if v.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::NumericalFailure(
            "eigenfunction is not strictly positive".into(),
        ));
    }

    // ν(1) = 1, then rescale h so that ν(h) = 1.
    let usum: f64 = u.iter().sum();
    let nu: Vec<f64> = u.iter().map(|x| x / usum).collect();
    let pairing: f64 = nu.iter().zip(&v).map(|(a, b)| a * b).sum();
    let h_table: Vec<f64> = v.iter().map(|x| x / pairing).collect();

    let residual_h = {
        let hv = t.apply_table(&h_table);
        hv.iter()
            .zip(&h_table)
            .fold(0.0f64, |m, (&a, &h)| m.max((a - lambda * h).abs()))
    };
    let residual_nu = {
        let nua = t.apply_left(&nu);
        nua.iter()
            .zip(&nu)
            .map(|(&a, &x)| (a - lambda * x).abs())
            .sum()
    };

    if !converged {
        return Err(Error::IterationLimit {
            iterations,
            residual_h,
            residual_nu,
        });
    }

    Ok(RpfData {
        lambda,
        h: DepthFunction::from_table(t.base(), k, h_table)?,
        nu,
        residual_h,
        residual_nu,
        iterations,
    })
}

/// One row of the pressure-limit consistency report.
#[derive(Debug, Clone)]
pub struct PressureProbe {
    /// Flat index of the grid word used as the base point `x`.
    pub word_index: usize,
    /// `(1/n) log (L^n 1)(x)`.
    pub value: f64,
    /// `value - log λ`.
    pub deviation: f64,
}

#[derive(Debug, Clone)]
pub struct PressureReport {
    pub pressure: f64,
    pub n_check: usize,
    pub probes: Vec<PressureProbe>,
}

/// Topological pressure `P(f) = log λ_f` together with the finite-`n`
/// limit consistency probes `(1/n) log (L^n 1)(x)` at `n = n_check`.
///
/// Iterates are renormalized in sup norm with the log-scale carried
/// separately, so large `n` and `λ != 1` cannot overflow.
pub fn pressure(
    alphabet: &AprioriAlphabet,
    f: &crate::potential::Potential,
    k: usize,
    n_check: usize,
    tol: f64,
    itmax: usize,
) -> Result<PressureReport> {
    let rpf = rpf_solve(alphabet, f, k, tol, itmax)?;
    let t = assemble(alphabet, f, k)?;
    let n = t.order();
    let log_lambda = rpf.lambda.ln();

    let mut v = vec![1.0; n];
    let mut log_scale = 0.0;
    for _ in 0..n_check {
        v = t.apply_table(&v);
        let norm = v.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        for x in &mut v {
            *x /= norm;
        }
        log_scale += norm.ln();
    }

    // up to 4 probes spread over the grid (all words on small grids)
    let count = n.min(4);
    let mut probes = Vec::with_capacity(count);
    for j in 0..count {
        let idx = if count == 1 {
            0
        } else {
            j * (n - 1) / (count - 1)
        };
        let value = (log_scale + v[idx].ln()) / n_check as f64;
        probes.push(PressureProbe {
            word_index: idx,
            value,
            deviation: value - log_lambda,
        });
    }
    Ok(PressureReport {
        pressure: log_lambda,
        n_check,
        probes,
    })
}

/// A potential `g > 0` with `∫ g(ax) dμ(a) = 1` for every grid point, as
/// produced by the normalization `g = e^f h / (λ h∘σ)`.
#[derive(Debug, Clone)]
pub struct NormalizedPotential {
    g: DepthFunction,
    certificate: f64,
}

pub const G0_CERTIFICATE_LIMIT: f64 = 1e-10;

impl NormalizedPotential {
    pub fn g(&self) -> &DepthFunction {
        &self.g
    }

    /// `sup_x |Σ_a μ(a) g(ax) - 1|` over the grid.
    pub fn certificate(&self) -> f64 {
        self.certificate
    }

    /// `log g` as a potential, ready for `L_{log g}`.
    pub fn log_potential(&self, alphabet: &AprioriAlphabet) -> Result<crate::potential::Potential> {
        crate::potential::Potential::tabulated(alphabet, self.g.map(|v| v.ln())?)
    }
}

/// Normalize `f` into `G₀`: `g(a·w) = e^{f(a·w)} h(a, w_1..w_{k-1}) / (λ h(w))`.
pub fn normalize_g0(
    alphabet: &AprioriAlphabet,
    f: &crate::potential::Potential,
    rpf: &RpfData,
) -> Result<NormalizedPotential> {
    let m = alphabet.len();
    let k = rpf.h.depth();
    if f.depth() > k + 1 {
        return Err(Error::invalid("eigendata too shallow for this potential"));
    }
    let g = DepthFunction::from_fn(m, k + 1, |aw| {
        f.eval_word(aw).exp() * rpf.h.eval_word(aw) / (rpf.lambda * rpf.h.eval_word(&aw[1..]))
    })?;

    let mut certificate = 0.0f64;
    let words = table_len(m, k)?;
    let mut w = vec![0usize; k];
    let mut aw = vec![0usize; k + 1];
    for idx in 0..words {
        word_of_index(m, k, idx, &mut w);
        aw[1..].copy_from_slice(&w);
        let mut acc = KahanSum::new();
        for a in 0..m {
            aw[0] = a;
            acc.add(alphabet.weight(a) * g.eval_word(&aw));
        }
        certificate = certificate.max((acc.value() - 1.0).abs());
    }
    if certificate > G0_CERTIFICATE_LIMIT {
        return Err(Error::NormalizationFailure {
            certificate,
            limit: G0_CERTIFICATE_LIMIT,
        });
    }
    Ok(NormalizedPotential { g, certificate })
}

/// Iterate `L_{log g}^n φ` and report the flatness (max - min) of the result.
/// For certified `g` the iterates converge to the constant `ν(φ)`.
pub fn pre_walters_iterate(
    alphabet: &AprioriAlphabet,
    g: &NormalizedPotential,
    phi: &DepthFunction,
    n: usize,
) -> Result<(DepthFunction, f64)> {
    let traj = pre_walters_trajectory(alphabet, g, phi, n)?;
    let last = traj.iterates.into_iter().last().unwrap();
    let flat = last.flatness();
    Ok((last, flat))
}

#[derive(Debug, Clone)]
pub struct PreWaltersTrajectory {
    /// `φ, Lφ, L²φ, ..., L^nφ`.
    pub iterates: Vec<DepthFunction>,
    /// Flatness of each iterate.
    pub flatness: Vec<f64>,
}

pub fn pre_walters_trajectory(
    alphabet: &AprioriAlphabet,
    g: &NormalizedPotential,
    phi: &DepthFunction,
    n: usize,
) -> Result<PreWaltersTrajectory> {
    let log_g = g.log_potential(alphabet)?;
    let mut iterates = vec![phi.clone()];
    let mut flatness = vec![phi.flatness()];
    let mut cur = phi.clone();
    for _ in 0..n {
        cur = apply(alphabet, &log_g, &cur)?;
        iterates.push(cur.clone());
        flatness.push(cur.flatness());
    }
    Ok(PreWaltersTrajectory { iterates, flatness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::AprioriAlphabet;
    use crate::potential::Potential;
    use approx::assert_relative_eq;

    const COSH1: f64 = 1.5430806348152437;
    const SINH1: f64 = 1.1752011936438014;
    const TANH1: f64 = 0.7615941559557649;

    #[test]
    fn apply_zero_potential_fixes_constants() {
        let a = AprioriAlphabet::interval_uniform(5).unwrap();
        let f = Potential::constant(&a, 0.0);
        let one = DepthFunction::constant(5, 1.0);
        let out = apply(&a, &f, &one).unwrap();
        assert_eq!(out.depth(), 0);
        assert_relative_eq!(out.table()[0], 1.0, max_relative = 1e-15);
    }

    #[test]
    fn apply_constant_potential() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::constant(&a, 0.3);
        let one = DepthFunction::constant(2, 1.0);
        let out = apply(&a, &f, &one).unwrap();
        assert_relative_eq!(out.table()[0], 0.3f64.exp(), max_relative = 1e-15);
    }

    #[test]
    fn apply_nn_ising_gives_sinh() {
        // f = β x1 x2 with β = 1, φ(a) = a:
        // (Lφ)(x1) = (1/2)(e^{x1} - e^{-x1}) = sinh(x1)
        let a = AprioriAlphabet::two_point();
        let f = Potential::nn_ising(&a, 1.0);
        let phi = DepthFunction::from_fn(2, 1, |w| a.node(w[0])).unwrap();
        let out = apply(&a, &f, &phi).unwrap();
        assert_eq!(out.depth(), 1);
        assert_relative_eq!(out.eval_word(&[1]), SINH1, epsilon = 1e-12);
        assert_relative_eq!(out.eval_word(&[0]), -SINH1, epsilon = 1e-12);
    }

    #[test]
    fn apply_is_positive_and_linear() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::nn_ising(&a, 0.8);
        let phi = DepthFunction::from_fn(2, 2, |w| (w[0] + 2 * w[1]) as f64 * 0.25).unwrap();
        let psi = DepthFunction::from_fn(2, 2, |w| 1.0 - (w[0] as f64) * 0.5).unwrap();
        let lp = apply(&a, &f, &phi).unwrap();
        let lq = apply(&a, &f, &psi).unwrap();
        assert!(lp.min_value() >= 0.0, "positive φ gives positive Lφ");
        let combo = phi.add_scaled(&psi, 2.5).unwrap();
        let lc = apply(&a, &f, &combo).unwrap();
        let expect = lp.add_scaled(&lq, 2.5).unwrap();
        for (x, y) in lc.table().iter().zip(expect.table()) {
            assert!((x - y).abs() <= 1e-13);
        }
    }

    #[test]
    fn assemble_zero_potential() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::constant(&a, 0.0);
        let t = assemble(&a, &f, 1).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert_relative_eq!(t.matrix()[(r, c)], 0.5, max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn assemble_nn_ising_entries() {
        let a = AprioriAlphabet::two_point();
        let beta = 0.9;
        let f = Potential::nn_ising(&a, beta);
        let t = assemble(&a, &f, 1).unwrap();
        // row w = (x1): entry at column (a) is (1/2) e^{β a x1}
        for (r, x1) in [(0usize, -1.0), (1usize, 1.0)] {
            for (c, av) in [(0usize, -1.0), (1usize, 1.0)] {
                assert_relative_eq!(
                    t.matrix()[(r, c)],
                    0.5 * (beta * av * x1).exp(),
                    max_relative = 1e-15
                );
            }
        }
    }

    #[test]
    fn assemble_action_matches_apply() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::nn_ising(&a, 1.2);
        for k in [1usize, 2, 3] {
            let t = assemble(&a, &f, k).unwrap();
            let phi = DepthFunction::from_fn(2, k, |w| w.iter().map(|&s| s as f64 + 0.3).product())
                .unwrap();
            let via_matrix = t.apply_table(phi.table());
            let via_apply = apply(&a, &f, &phi).unwrap().align(k).unwrap();
            for (x, y) in via_matrix.iter().zip(via_apply.table()) {
                assert!((x - y).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn assemble_depth_too_small_rejected() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::long_range_ising(&a, 3.0, 5, false).unwrap();
        assert!(assemble(&a, &f, 3).is_err());
        assert!(assemble(&a, &f, 4).is_ok());
    }

    #[test]
    fn rpf_zero_potential() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::constant(&a, 0.0);
        let rpf = rpf_solve(&a, &f, 1, 1e-14, 1000).unwrap();
        assert_eq!(rpf.lambda, 1.0);
        assert!(rpf.h.table().iter().all(|&x| (x - 1.0).abs() < 1e-14));
        for (w, &nu) in a.weights().iter().zip(&rpf.nu) {
            assert_relative_eq!(nu, *w, epsilon = 1e-14);
        }
    }

    #[test]
    fn rpf_constant_potential() {
        let a = AprioriAlphabet::interval_uniform(3).unwrap();
        let f = Potential::constant(&a, 0.7);
        let rpf = rpf_solve(&a, &f, 1, 1e-14, 1000).unwrap();
        assert_relative_eq!(rpf.lambda, 0.7f64.exp(), epsilon = 1e-12);
        assert!(rpf.h.flatness() < 1e-13);
    }

    #[test]
    fn rpf_nn_ising_cosh() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::nn_ising(&a, 1.0);
        let rpf = rpf_solve(&a, &f, 1, 1e-14, 10000).unwrap();
        assert_relative_eq!(rpf.lambda, COSH1, epsilon = 1e-10);
        let nu_sum: f64 = rpf.nu.iter().sum();
        assert!((nu_sum - 1.0).abs() < 1e-12);
        let nh = rpf.nu_pair(&rpf.h).unwrap();
        assert!((nh - 1.0).abs() < 1e-10);
        assert!(rpf.residual_h <= 1e-10);
        assert!(rpf.residual_nu <= 1e-10);
    }

    #[test]
    fn rpf_duality_at_fixed_point() {
        // |ν(Lφ) - λ ν(φ)| <= 1e-10 ||φ||_∞
        let a = AprioriAlphabet::two_point();
        let f = Potential::nn_ising(&a, 1.0);
        let rpf = rpf_solve(&a, &f, 2, 1e-14, 10000).unwrap();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for _ in 0..10 {
            let phi = DepthFunction::from_fn(2, 2, |_| next()).unwrap();
            let lphi = apply(&a, &f, &phi).unwrap();
            let lhs = rpf.nu_pair(&lphi).unwrap();
            let rhs = rpf.lambda * rpf.nu_pair(&phi).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * phi.sup_norm());
        }
    }

    #[test]
    fn rpf_iteration_limit_error() {
        // an asymmetric potential has a non-constant eigenfunction, so the
        // iteration cannot finish within a handful of steps at tol 1e-14
        let a = AprioriAlphabet::two_point();
        let table =
            DepthFunction::from_fn(2, 2, |w| a.node(w[0]) * a.node(w[1]) + 0.5 * a.node(w[0]))
                .unwrap();
        let f = Potential::tabulated(&a, table).unwrap();
        match rpf_solve(&a, &f, 1, 1e-14, 3) {
            Err(Error::IterationLimit { iterations, .. }) => assert_eq!(iterations, 3),
            other => panic!("expected iteration limit, got {other:?}"),
        }
    }

    #[test]
    fn pressure_closed_forms() {
        let a = AprioriAlphabet::two_point();
        let zero = Potential::constant(&a, 0.0);
        let r = pressure(&a, &zero, 1, 50, 1e-14, 1000).unwrap();
        assert_eq!(r.pressure, 0.0);
        for p in &r.probes {
            assert!(p.deviation.abs() < 1e-12);
        }

        let c = Potential::constant(&a, 0.45);
        let r = pressure(&a, &c, 1, 50, 1e-14, 1000).unwrap();
        assert_relative_eq!(r.pressure, 0.45, epsilon = 1e-12);

        let ising = Potential::nn_ising(&a, 1.0);
        let r = pressure(&a, &ising, 2, 200, 1e-14, 10000).unwrap();
        assert_relative_eq!(r.pressure, COSH1.ln(), epsilon = 1e-10);
        assert!(r.probes.len() >= 3);
        for p in &r.probes {
            assert!(p.deviation.abs() <= 1e-6, "deviation {}", p.deviation);
        }
    }

    #[test]
    fn normalize_zero_and_constant() {
        let a = AprioriAlphabet::two_point();
        for c in [0.0, 0.8] {
            let f = Potential::constant(&a, c);
            let rpf = rpf_solve(&a, &f, 1, 1e-14, 1000).unwrap();
            let g = normalize_g0(&a, &f, &rpf).unwrap();
            assert!(g.certificate() <= 1e-14);
            for &v in g.g().table() {
                assert!((v - 1.0).abs() < 1e-12, "constants normalize to g = 1");
            }
        }
    }

    #[test]
    fn normalize_nn_ising_rows_sum_to_one() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::nn_ising(&a, 1.0);
        let rpf = rpf_solve(&a, &f, 1, 1e-14, 10000).unwrap();
        let g = normalize_g0(&a, &f, &rpf).unwrap();
        assert!(g.certificate() <= 1e-12);
        // closed form: g(a, x1) = e^{a x1} / cosh(1) since h is constant
        for (aw, expect) in [
            ([0usize, 0usize], (1.0f64).exp() / COSH1),
            ([1, 0], (-1.0f64).exp() / COSH1),
            ([1, 1], (1.0f64).exp() / COSH1),
            ([0, 1], (-1.0f64).exp() / COSH1),
        ] {
            assert_relative_eq!(g.g().eval_word(&aw), expect, epsilon = 1e-10);
        }
        // and the μ-weighted row sums are 1
        for x1 in [0usize, 1] {
            let sum: f64 = (0..2)
                .map(|s| a.weight(s) * g.g().eval_word(&[s, x1]))
                .sum();
            assert!((sum - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn normalize_rejects_sloppy_eigendata() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::nn_ising(&a, 1.0);
        let mut rpf = rpf_solve(&a, &f, 1, 1e-14, 10000).unwrap();
        rpf.lambda *= 1.0 + 1e-6; // simulate an under-converged solve
        match normalize_g0(&a, &f, &rpf) {
            Err(Error::NormalizationFailure { .. }) => {}
            other => panic!("expected normalization failure, got {other:?}"),
        }
    }

    #[test]
    fn pre_walters_fixes_constants() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::nn_ising(&a, 1.0);
        let rpf = rpf_solve(&a, &f, 1, 1e-14, 10000).unwrap();
        let g = normalize_g0(&a, &f, &rpf).unwrap();
        let one = DepthFunction::constant(2, 1.0);
        for n in [1usize, 3, 10] {
            let (out, flat) = pre_walters_iterate(&a, &g, &one, n).unwrap();
            assert!(flat <= 1e-13);
            assert!((out.table()[0] - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn pre_walters_flatness_ratio_is_tanh() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::nn_ising(&a, 1.0);
        let rpf = rpf_solve(&a, &f, 1, 1e-14, 10000).unwrap();
        let g = normalize_g0(&a, &f, &rpf).unwrap();
        let spin = DepthFunction::from_fn(2, 1, |w| a.node(w[0])).unwrap();
        let traj = pre_walters_trajectory(&a, &g, &spin, 12).unwrap();
        for n in 1..=12 {
            let ratio = traj.flatness[n] / traj.flatness[n - 1];
            assert!((ratio - TANH1).abs() <= 1e-6, "ratio at n={n}: {ratio}");
        }
    }

    #[test]
    fn pre_walters_one_step_averaging() {
        // g ≡ 1 (f = 0): after one step any depth-1 φ becomes Σ μ(a) φ(a)
        let a = AprioriAlphabet::interval_uniform(4).unwrap();
        let f = Potential::constant(&a, 0.0);
        let rpf = rpf_solve(&a, &f, 1, 1e-14, 1000).unwrap();
        let g = normalize_g0(&a, &f, &rpf).unwrap();
        let phi = DepthFunction::from_fn(4, 1, |w| (w[0] as f64).sqrt()).unwrap();
        let mean: f64 = (0..4).map(|i| a.weight(i) * (i as f64).sqrt()).sum();
        let (out, flat) = pre_walters_iterate(&a, &g, &phi, 1).unwrap();
        assert!(flat <= 1e-14);
        assert!((out.table()[0] - mean).abs() <= 1e-13);
    }

    #[test]
    fn power_iterates_converge_at_the_gap_rate() {
        // ‖λ^{-n} L^n 1 - h‖_∞ decays geometrically at |λ₂|/λ₁ (within 2%);
        // needs a potential with non-constant h, so add a field term
        let a = AprioriAlphabet::two_point();
        let table =
            DepthFunction::from_fn(2, 2, |w| a.node(w[0]) * a.node(w[1]) + 0.4 * a.node(w[0]))
                .unwrap();
        let f = Potential::tabulated(&a, table).unwrap();
        let rpf = rpf_solve(&a, &f, 1, 1e-15, 100000).unwrap();
        let t = assemble(&a, &f, 1).unwrap();
        let spec = crate::spectral::spectrum(&t).unwrap();
        let mut v = vec![1.0; 2];
        let mut errors = Vec::new();
        for _ in 0..40 {
            v = t.apply_table(&v);
            for x in &mut v {
                *x /= rpf.lambda;
            }
            let err = v
                .iter()
                .zip(rpf.h.table())
                .fold(0.0f64, |m, (&x, &h)| m.max((x - h).abs()));
            errors.push(err);
        }
        let ratio = errors[30] / errors[29];
        assert!(
            (ratio - spec.tau).abs() <= 0.02 * spec.tau,
            "observed decay ratio {ratio} vs tau {}",
            spec.tau
        );
    }

    #[test]
    fn degenerate_one_letter_alphabet() {
        // m = 1 is the fully deterministic system: λ = e^{f(c,c,...)}
        let a = AprioriAlphabet::finite_atomic(1).unwrap();
        let f = Potential::nn_ising(&a, 0.7); // f ≡ 0.7 · 0 · 0 = 0 at node 0
        let rpf = rpf_solve(&a, &f, 1, 1e-14, 100).unwrap();
        assert_relative_eq!(rpf.lambda, 1.0, epsilon = 1e-14);

        let a = AprioriAlphabet::interval_uniform(1).unwrap();
        let f = Potential::first_coordinate(&a); // f ≡ 0.5 on the single node
        let rpf = rpf_solve(&a, &f, 1, 1e-14, 100).unwrap();
        assert_relative_eq!(rpf.lambda, 0.5f64.exp(), epsilon = 1e-13);
    }

    #[test]
    fn circle_alphabet_smoke() {
        let a = AprioriAlphabet::circle_uniform(5).unwrap();
        let f = Potential::constant(&a, 0.0);
        let rpf = rpf_solve(&a, &f, 1, 1e-14, 100).unwrap();
        assert_relative_eq!(rpf.lambda, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn g0_closure_preserves_nu_mean() {
        // L_{log g} maps nonnegative tables with ν-mean 1 to the same class
        let a = AprioriAlphabet::two_point();
        let f = Potential::nn_ising(&a, 1.0);
        let rpf = rpf_solve(&a, &f, 1, 1e-14, 10000).unwrap();
        let g = normalize_g0(&a, &f, &rpf).unwrap();
        // eigenmeasure of L_{log g} is ν_g with dν_g = h dν; here h ≡ 1
        let phi = DepthFunction::from_fn(2, 1, |w| if w[0] == 0 { 0.4 } else { 1.6 }).unwrap();
        let mean0 = rpf.nu_pair(&phi.product(&rpf.h).unwrap()).unwrap();
        let log_g = g.log_potential(&a).unwrap();
        let mut cur = phi;
        for _ in 0..6 {
            cur = apply(&a, &log_g, &cur).unwrap();
            assert!(cur.min_value() >= -1e-15);
            let mean = rpf.nu_pair(&cur.product(&rpf.h).unwrap()).unwrap();
            assert!((mean - mean0).abs() <= 1e-10);
        }
    }
}
