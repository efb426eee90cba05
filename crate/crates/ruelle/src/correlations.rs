//! Correlation functions of the Gibbs measure `μ_f = h_f dν_f` through the
//! pull-out identity `L^n((φ₁∘σⁿ) φ₂ h) = φ₁ L^n(φ₂ h)`, decay-model fits
//! and gap/decay consistency reports.

use crate::alphabet::AprioriAlphabet;
use crate::cylinder::{table_len, word_of_index, DepthFunction};
use crate::error::{Error, Result};
use crate::numeric::{fit_line, KahanSum};
use crate::potential::Potential;
use crate::spectral::SpectrumReport;
use crate::transfer::{apply, RpfData};
use serde::Serialize;

/// `C(n) = λ^{-n} ν(φ₁ · L^n(φ₂ h)) - ν(φ₁ h) ν(φ₂ h)`, the correlation of
/// `φ₁ ∘ σⁿ` and `φ₂` under `μ_f = h dν` (with `ν(h) = 1`).
pub fn correlation(
    alphabet: &AprioriAlphabet,
    rpf: &RpfData,
    f: &Potential,
    phi1: &DepthFunction,
    phi2: &DepthFunction,
    n: usize,
) -> Result<f64> {
    let k = rpf.h.depth();
    if phi1.depth() > k || phi2.depth() > k {
        return Err(Error::invalid(
            "observables deeper than the eigenmeasure grid",
        ));
    }
    let mut cur = phi2.product(&rpf.h)?;
    for _ in 0..n {
        cur = apply(alphabet, f, &cur)?;
    }
    let mixed = rpf.nu_pair(&phi1.product(&cur)?)? / rpf.lambda.powi(n as i32);
    let mean1 = rpf.nu_pair(&phi1.product(&rpf.h)?)?;
    let mean2 = rpf.nu_pair(&phi2.product(&rpf.h)?)?;
    Ok(mixed - mean1 * mean2)
}

/// Direct finite-chain enumeration of the same correlation: expands
/// `∫ (φ₁∘σⁿ) φ₂ dμ` over all words of length `n + k` with the exact
/// cylinder weights `λ^{-n} Π μ(a_i) e^{Σ_j f(σʲ(a x))} (φ₂ h)(a x) ν(x)`.
/// Independent of the matrix-power path; capped at `m^{n+k}` words.
pub fn correlation_enumeration(
    alphabet: &AprioriAlphabet,
    rpf: &RpfData,
    f: &Potential,
    phi1: &DepthFunction,
    phi2: &DepthFunction,
    n: usize,
) -> Result<f64> {
    let k = rpf.h.depth();
    if phi1.depth() > k || phi2.depth() > k {
        return Err(Error::invalid(
            "observables deeper than the eigenmeasure grid",
        ));
    }
    if f.depth() > k + 1 {
        return Err(Error::invalid("potential deeper than the grid allows"));
    }
    let m = alphabet.len();
    let total_len = n + k;
    let words = table_len(m, total_len)?;
    let k_words = table_len(m, k)?;

    let mixed = {
        let mut acc = KahanSum::new();
        let mut w = vec![0usize; total_len];
        for idx in 0..words {
            word_of_index(m, total_len, idx, &mut w);
            // a = w[0..n] carries the a-priori weights; x = w[n..] the ν mass
            let mut weight = rpf.nu[crate::cylinder::index_of_word(m, &w[n..])];
            for &s in &w[..n] {
                weight *= alphabet.weight(s);
            }
            if weight == 0.0 {
                continue;
            }
            let mut energy = KahanSum::new();
            for j in 0..n {
                energy.add(f.eval_word(&w[j..]));
            }
            acc.add(
                weight
                    * energy.value().exp()
                    * phi1.eval_word(&w[n..])
                    * phi2.eval_word(&w)
                    * rpf.h.eval_word(&w),
            );
        }
        acc.value() / rpf.lambda.powi(n as i32)
    };

    let mean = |phi: &DepthFunction| -> Result<f64> {
        let aligned = phi.product(&rpf.h)?.align(k)?;
        let mut acc = KahanSum::new();
        for idx in 0..k_words {
            acc.add(rpf.nu[idx] * aligned.table()[idx]);
        }
        Ok(acc.value())
    };
    Ok(mixed - mean(phi1)? * mean(phi2)?)
}

/// Sup-norm residual of the pull-out identity
/// `L^n((φ₁∘σⁿ) φ₂ h) - φ₁ L^n(φ₂ h)`; exact up to roundoff.
pub fn pullout_check(
    alphabet: &AprioriAlphabet,
    f: &Potential,
    phi1: &DepthFunction,
    phi2: &DepthFunction,
    h: &DepthFunction,
    n: usize,
) -> Result<f64> {
    let m = alphabet.len();
    // (φ₁∘σⁿ)·φ₂·h tabulated at depth n + max(depths)
    let inner_depth = phi2.depth().max(h.depth());
    let deep = n + phi1.depth().max(inner_depth);
    table_len(m, deep)?;
    let shifted_product = DepthFunction::from_fn(m, deep, |w| {
        phi1.eval_word(&w[n..]) * phi2.eval_word(w) * h.eval_word(w)
    })?;
    let mut lhs = shifted_product;
    let mut rhs = phi2.product(h)?;
    for _ in 0..n {
        lhs = apply(alphabet, f, &lhs)?;
        rhs = apply(alphabet, f, &rhs)?;
    }
    let residual = lhs.add_scaled(&phi1.product(&rhs)?, -1.0)?.sup_norm();
    Ok(residual)
}

#[derive(Debug, Clone)]
pub struct CorrelationSeries {
    pub entries: Vec<f64>,
    /// `operator` or `enumeration`.
    pub source: &'static str,
}

impl CorrelationSeries {
    pub fn from_values(entries: Vec<f64>) -> Self {
        Self {
            entries,
            source: "synthetic",
        }
    }
}

/// Correlation series `C(0..=n_max)` by the operator path. `C(0)` is
/// cross-checked against the directly computed `μ_f`-covariance.
pub fn correlation_series(
    alphabet: &AprioriAlphabet,
    rpf: &RpfData,
    f: &Potential,
    phi1: &DepthFunction,
    phi2: &DepthFunction,
    n_max: usize,
) -> Result<CorrelationSeries> {
    let mut entries = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        entries.push(correlation(alphabet, rpf, f, phi1, phi2, n)?);
    }
    // C(0) must equal the covariance ν((φ₁φ₂ - ν(φ₁h)φ₂... ) computed directly
    let direct = {
        let m12 = rpf.nu_pair(&phi1.product(phi2)?.product(&rpf.h)?)?;
        let m1 = rpf.nu_pair(&phi1.product(&rpf.h)?)?;
        let m2 = rpf.nu_pair(&phi2.product(&rpf.h)?)?;
        m12 - m1 * m2
    };
    if (entries[0] - direct).abs() > 1e-12 {
        return Err(Error::NumericalFailure(format!(
            "C(0) = {} disagrees with the direct covariance {}",
            entries[0], direct
        )));
    }
    Ok(CorrelationSeries {
        entries,
        source: "operator",
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayModel {
    Exponential,
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayVerdict {
    GapConsistent,
    NoExponentialDecayEvidence,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct DecayFit {
    pub model: DecayModel,
    /// Exponential: the fitted rate `τ̂` in `C(n) ≈ C τ̂ⁿ`.
    pub rate: f64,
    /// Polynomial: the fitted exponent `s` in `C(n) ≈ C n^{-s}`.
    pub exponent: f64,
    pub exp_residual: f64,
    pub poly_residual: f64,
    pub verdict: DecayVerdict,
}

/// Competing-model margin: the winner must beat the loser's RMS residual by
/// this factor, otherwise the verdict is inconclusive.
pub const MODEL_MARGIN: f64 = 2.0;

/// Fit `log |C(n)|` against `n` (exponential) and against `log n`
/// (polynomial) on the window `n_window` (inclusive), choosing the model by
/// residual with the declared margin.
pub fn decay_fit(series: &CorrelationSeries, n_window: (usize, usize)) -> Result<DecayFit> {
    let (lo, hi) = n_window;
    if lo == 0 || hi >= series.entries.len() || lo > hi {
        return Err(Error::invalid(
            "window must satisfy 1 <= lo <= hi < series length",
        ));
    }
    let mut ns = Vec::new();
    let mut logs = Vec::new();
    for n in lo..=hi {
        let c = series.entries[n].abs();
        if c > 0.0 {
            ns.push(n as f64);
            logs.push(c.ln());
        }
    }
    if ns.len() < 6 {
        return Err(Error::DegenerateSeries(format!(
            "only {} nonzero entries in the window (need 6)",
            ns.len()
        )));
    }
    let exp_fit = fit_line(&ns, &logs);
    let log_ns: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let poly_fit = fit_line(&log_ns, &logs);
    let (model, verdict) = if exp_fit.rms_residual * MODEL_MARGIN <= poly_fit.rms_residual {
        (DecayModel::Exponential, DecayVerdict::GapConsistent)
    } else if poly_fit.rms_residual * MODEL_MARGIN <= exp_fit.rms_residual {
        (
            DecayModel::Polynomial,
            DecayVerdict::NoExponentialDecayEvidence,
        )
    } else {
        // tie: keep the better model but refuse a verdict
        let m = if exp_fit.rms_residual <= poly_fit.rms_residual {
            DecayModel::Exponential
        } else {
            DecayModel::Polynomial
        };
        (m, DecayVerdict::Inconclusive)
    };
    Ok(DecayFit {
        model,
        rate: exp_fit.slope.exp(),
        exponent: -poly_fit.slope,
        exp_residual: exp_fit.rms_residual,
        poly_residual: poly_fit.rms_residual,
        verdict,
    })
}

#[derive(Debug, Clone)]
pub struct GapDecayReport {
    pub tau: f64,
    pub tau_tilde: f64,
    /// Smallest `C₁` with `|C(n)| <= C₁ τ̃ⁿ` over the series.
    pub c1: f64,
    /// Exponential fit rate over the window (`None` when the series has too
    /// few nonzero entries to fit).
    pub fit_rate: Option<f64>,
    pub pass: bool,
}

/// Check the spectral-gap decay bound `|C(n)| <= C₁ τ̃ⁿ` with
/// `τ̃ = τ + margin`: passes when the empirical `C₁` is finite and the
/// fitted rate does not exceed `τ̃`.
pub fn gap_decay_consistency(
    spectrum: &SpectrumReport,
    series: &CorrelationSeries,
    ttilde_margin: f64,
) -> Result<GapDecayReport> {
    if !(ttilde_margin >= 0.0) {
        return Err(Error::invalid("margin must be nonnegative"));
    }
    let tau_tilde = spectrum.tau + ttilde_margin;
    let mut c1 = 0.0f64;
    for (n, &c) in series.entries.iter().enumerate() {
        if c != 0.0 {
            if tau_tilde == 0.0 && n > 0 {
                c1 = f64::INFINITY;
            } else {
                c1 = c1.max(c.abs() / tau_tilde.powi(n as i32));
            }
        }
    }
    let hi = series.entries.len() - 1;
    let fit_rate = match decay_fit(series, (1, hi)) {
        Ok(fit) => Some(fit.rate),
        Err(Error::DegenerateSeries(_)) => None,
        Err(e) => return Err(e),
    };
    let rate_ok = fit_rate.map_or(true, |r| r <= tau_tilde);
    Ok(GapDecayReport {
        tau: spectrum.tau,
        tau_tilde,
        c1,
        fit_rate,
        pass: c1.is_finite() && rate_ok,
    })
}
