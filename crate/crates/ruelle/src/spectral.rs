//! Spectrum and spectral-gap diagnostics for transfer matrices: dense
//! eigenvalue lists, Riesz projectors by contour integration of the
//! resolvent, the eigenvalue quotient `⟨w, π(Av)⟩ / ⟨w, πv⟩`, power norms
//! `‖A^n‖^{1/n}` and rank stability under perturbation.

use crate::error::{Error, Result};
use crate::transfer::TransferMatrix;
use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense eigensolve cap (matrix order).
pub const DENSE_CAP: usize = 4096;

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// All eigenvalues sorted by descending modulus.
    pub eigenvalues: Vec<Complex<f64>>,
    pub lambda1: f64,
    pub mod_lambda2: f64,
    /// `|λ₂| / λ₁`.
    pub tau: f64,
    /// `λ₁ - |λ₂|`.
    pub gap: f64,
}

/// Full eigenvalue list of the transfer matrix (dense Schur), with the
/// dominant eigenvalue checked to be real, positive and numerically simple.
pub fn spectrum(t: &TransferMatrix) -> Result<SpectrumReport> {
    if t.order() > DENSE_CAP {
        return Err(Error::ResourceLimit(format!(
            "matrix order {} exceeds the dense eigensolve cap {DENSE_CAP}",
            t.order()
        )));
    }
    let mut eigenvalues: Vec<Complex<f64>> =
        t.matrix().complex_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
    let top = eigenvalues[0];
    if top.im.abs() > 1e-9 * top.norm() || top.re <= 0.0 {
        return Err(Error::NumericalFailure(format!(
            "dominant eigenvalue {top} is not real positive"
        )));
    }
    let lambda1 = top.re;
    let near_top = eigenvalues
        .iter()
        .filter(|z| (z.norm() - lambda1).abs() <= 1e-9 * lambda1)
        .count();
    if near_top != 1 {
        return Err(Error::NumericalFailure(format!(
            "dominant eigenvalue is not numerically simple ({near_top} matches)"
        )));
    }
    let mod_lambda2 = eigenvalues.get(1).map(|z| z.norm()).unwrap_or(0.0);
    Ok(SpectrumReport {
        lambda1,
        mod_lambda2,
        tau: mod_lambda2 / lambda1,
        gap: lambda1 - mod_lambda2,
        eigenvalues,
    })
}

#[derive(Debug, Clone)]
pub struct ProjectorData {
    pub pi: DMatrix<f64>,
    pub center: f64,
    pub radius: f64,
    pub nodes: usize,
    /// `‖π² - π‖` in the sup operator norm.
    pub idempotency: f64,
    /// `‖Aπ - πA‖` in the sup operator norm.
    pub commutation: f64,
    pub trace: f64,
    /// Largest imaginary part discarded when taking the real part.
    pub imag_norm: f64,
}

/// Max absolute row sum (the operator norm induced by the sup norm).
pub fn sup_operator_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Riesz projector `(1/2πi) ∮ (zI - A)^{-1} dz` over the circle
/// `|z - center| = radius`, by the trapezoid rule on `n_nodes` points.
/// Each node costs one dense complex inversion.
pub fn projector_contour(
    t: &TransferMatrix,
    center: f64,
    radius: f64,
    n_nodes: usize,
) -> Result<ProjectorData> {
    if n_nodes < 16 {
        return Err(Error::invalid("contour rule needs at least 16 nodes"));
    }
    if !(radius > 0.0) {
        return Err(Error::invalid("contour radius must be positive"));
    }
    let spec = spectrum(t)?;
    let min_dist = spec
        .eigenvalues
        .iter()
        .map(|z| ((z - Complex::new(center, 0.0)).norm() - radius).abs())
        .fold(f64::INFINITY, f64::min);
    if min_dist <= 1e-8 {
        return Err(Error::ContourCollision { distance: min_dist });
    }

    let n = t.order();
    let a_c: DMatrix<Complex<f64>> = t.matrix().map(|x| Complex::new(x, 0.0));
    let mut sum = DMatrix::<Complex<f64>>::zeros(n, n);
    for j in 0..n_nodes {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / n_nodes as f64;
        let phase = Complex::new(theta.cos(), theta.sin());
        let z = Complex::new(center, 0.0) + radius * phase;
        let mut zi_a = -a_c.clone();
        for d in 0..n {
            zi_a[(d, d)] += z;
        }
        let inv = zi_a.try_inverse().ok_or_else(|| {
            Error::NumericalFailure("resolvent solve failed on the contour".into())
        })?;
        // dz = i r e^{iθ} dθ; the 1/(2πi) cancels the i and leaves r/N
        sum += inv * (phase * (radius / n_nodes as f64));
    }

    let pi = sum.map(|z| z.re);
    let imag_norm = sum.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let pi2 = &pi * &pi;
    let idempotency = sup_operator_norm(&(&pi2 - &pi));
    let a_pi = t.matrix() * &pi;
    let pi_a = &pi * t.matrix();
    let commutation = sup_operator_norm(&(a_pi - pi_a));
    let trace = pi.trace();
    Ok(ProjectorData {
        pi,
        center,
        radius,
        nodes: n_nodes,
        idempotency,
        commutation,
        trace,
        imag_norm,
    })
}

/// Default dominant contour: circle centered at `λ₁` with radius
/// `(λ₁ - |λ₂|)/2` and 64 trapezoid nodes.
pub fn dominant_contour(spec: &SpectrumReport) -> (f64, f64, usize) {
    (spec.lambda1, spec.gap / 2.0, 64)
}

/// `⟨w, π(Av)⟩ / ⟨w, π v⟩`; equals the eigenvalue enclosed by the contour.
pub fn eigenvalue_quotient(
    t: &TransferMatrix,
    proj: &ProjectorData,
    v: &[f64],
    w: &[f64],
) -> Result<f64> {
    let n = t.order();
    if v.len() != n || w.len() != n {
        return Err(Error::invalid("vector length does not match matrix order"));
    }
    let v = nalgebra::DVector::from_column_slice(v);
    let w = nalgebra::DVector::from_column_slice(w);
    let pi_v = &proj.pi * &v;
    let den = w.dot(&pi_v);
    let scale = sup_operator_norm(&proj.pi) * w.amax().max(1e-300) * v.amax().max(1e-300);
    if den.abs() <= 1e-12 * scale.max(1e-300) {
        return Err(Error::DegeneratePairing {
            magnitude: den.abs(),
        });
    }
    let pi_av = &proj.pi * (t.matrix() * &v);
    Ok(w.dot(&pi_av) / den)
}

/// The sequence `‖A^n‖^{1/n}` for `n = 1..n_max`, computed with a running
/// sup-norm renormalization so that `λ > 1` and large `n` cannot overflow.
pub fn spectral_radius_seq(t: &TransferMatrix, n_max: usize) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Err(Error::invalid("n_max must be >= 1"));
    }
    let a = t.matrix();
    let mut m = a.clone();
    let mut log_scale = 0.0f64;
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let norm = sup_operator_norm(&m);
        if !(norm > 0.0) {
            return Err(Error::NumericalFailure(
                "power norm collapsed to zero".into(),
            ));
        }
        out.push(((log_scale + norm.ln()) / n as f64).exp());
        if n < n_max {
            m /= norm;
            log_scale += norm.ln();
            m = a * m;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RankStabilityReport {
    pub base_trace: f64,
    pub eps: f64,
    pub trials: usize,
    /// Per-trial rounded traces; `None` marks a contour collision.
    pub traces: Vec<Option<i64>>,
    pub collisions: usize,
    pub all_rank_stable: bool,
}

/// Perturb `A` by random matrices of sup operator norm `eps`, recompute the
/// projector on the same circle and check the rounded trace (the dimension of
/// the spectral subspace) is unchanged. Requires `eps < gap/4`.
pub fn rank_stability_probe(
    t: &TransferMatrix,
    center: f64,
    radius: f64,
    n_nodes: usize,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<RankStabilityReport> {
    let spec = spectrum(t)?;
    if !(eps >= 0.0) || eps >= spec.gap / 4.0 {
        return Err(Error::invalid(format!(
            "perturbation eps = {eps} must satisfy 0 <= eps < gap/4 = {}",
            spec.gap / 4.0
        )));
    }
    let base = projector_contour(t, center, radius, n_nodes)?;
    let base_trace = base.trace;
    let base_round = base_trace.round() as i64;
    let n = t.order();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut traces = Vec::with_capacity(trials);
    let mut collisions = 0usize;
    let mut all_rank_stable = true;
    for _ in 0..trials {
        let mut e = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
        let norm = sup_operator_norm(&e);
        if norm > 0.0 && eps > 0.0 {
            e *= eps / norm;
        } else {
            e *= 0.0;
        }
        let perturbed = TransferMatrix::from_matrix_unchecked(t.depth(), t.base(), t.matrix() + e);
        match projector_contour(&perturbed, center, radius, n_nodes) {
            Ok(p) => {
                let r = p.trace.round() as i64;
                if r != base_round {
                    all_rank_stable = false;
                }
                traces.push(Some(r));
            }
            Err(Error::ContourCollision { .. }) => {
                collisions += 1;
                traces.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(RankStabilityReport {
        base_trace,
        eps,
        trials,
        traces,
        collisions,
        all_rank_stable,
    })
}
