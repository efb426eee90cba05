//! Numerical certificates for the analytic dependence of the operator on the
//! potential: the derivative formula `D^k Θ(f)(h₁..h_k) φ = L_f(φ h₁ ⋯ h_k)`,
//! Taylor remainders with their explicit exponential majorant, the adjoint
//! first-order check, and divided-difference smoothness of the pressure.

use crate::alphabet::AprioriAlphabet;
use crate::cylinder::DepthFunction;
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::transfer::{apply, rpf_solve};

/// `D^k Θ(f)(h₁, ..., h_k) φ = L_f(φ · h₁ ⋯ h_k)`; an empty direction list
/// gives `L_f φ` itself.
pub fn directional_derivative(
    alphabet: &AprioriAlphabet,
    f: &Potential,
    directions: &[&Potential],
    phi: &DepthFunction,
) -> Result<DepthFunction> {
    let mut integrand = phi.clone();
    for h in directions {
        integrand = integrand.product(&h.tabulate()?)?;
    }
    apply(alphabet, f, &integrand)
}

#[derive(Debug, Clone)]
pub struct RemainderRow {
    pub t: f64,
    /// `‖L_{f+th}φ - Σ_{j<=p} (t^j/j!) L_f(φ h^j)‖_∞`.
    pub remainder: f64,
    /// `remainder / t^{p+1}`.
    pub ratio: f64,
    /// `‖L_f‖ ‖φ‖ (e^{t‖h‖} - Σ_{j<=p} (t‖h‖)^j / j!)`.
    pub majorant: f64,
}

#[derive(Debug, Clone)]
pub struct RemainderTable {
    pub order: usize,
    pub rows: Vec<RemainderRow>,
}

impl RemainderTable {
    /// Largest relative spread of `remainder / t^{p+1}` across the grid.
    pub fn ratio_spread(&self) -> f64 {
        let ratios: Vec<f64> = self.rows.iter().map(|r| r.ratio).collect();
        let max = ratios.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let min = ratios.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        if max <= 0.0 {
            0.0
        } else {
            (max - min) / max
        }
    }
}

/// Order-`p` Taylor remainder of `t ↦ L_{f+th} φ` at each step size, with the
/// normalized ratio and the explicit exponential majorant.
pub fn taylor_remainder(
    alphabet: &AprioriAlphabet,
    f: &Potential,
    h: &Potential,
    phi: &DepthFunction,
    order: usize,
    t_grid: &[f64],
) -> Result<RemainderTable> {
    if order == 0 {
        return Err(Error::invalid("remainder order p must be >= 1"));
    }
    if t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::invalid("step sizes must be positive"));
    }
    if t_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("step grid must be strictly decreasing"));
    }
    let h_table = h.tabulate()?;
    let out_depth = f.depth().max(h.depth()).max(phi.depth()).saturating_sub(1);

    // L_f(φ h^j) for j = 0..p
    let mut terms = Vec::with_capacity(order + 1);
    let mut integrand = phi.clone();
    for _ in 0..=order {
        terms.push(apply(alphabet, f, &integrand)?.align(out_depth)?);
        integrand = integrand.product(&h_table)?;
    }

    let op_norm = apply(alphabet, f, &DepthFunction::constant(alphabet.len(), 1.0))?.max_value();
    let h_norm = h_table.sup_norm();
    let phi_norm = phi.sup_norm();

    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let f_t = f.add_scaled(h, t)?;
        let lhs = apply(alphabet, &f_t, phi)?.align(out_depth)?;
        let mut partial =
            DepthFunction::from_table(alphabet.len(), out_depth, vec![0.0; terms[0].len()])?;
        let mut factorial = 1.0;
        for (j, term) in terms.iter().enumerate() {
            if j > 0 {
                factorial *= j as f64;
            }
            partial = partial.add_scaled(term, t.powi(j as i32) / factorial)?;
        }
        let remainder = lhs.add_scaled(&partial, -1.0)?.sup_norm();
        let x = t * h_norm;
        let mut tail = x.exp();
        let mut fac = 1.0;
        for j in 0..=order {
            if j > 0 {
                fac *= j as f64;
            }
            tail -= x.powi(j as i32) / fac;
        }
        rows.push(RemainderRow {
            t,
            remainder,
            ratio: remainder / t.powi(order as i32 + 1),
            majorant: op_norm * phi_norm * tail,
        });
    }
    Ok(RemainderTable { order, rows })
}

#[derive(Debug, Clone)]
pub struct DualDerivativeReport {
    pub t: f64,
    /// `⟨ℓ, L_f(g·h)⟩`, the adjoint first-order term.
    pub first_order: f64,
    /// `|⟨ℓ, L_{f+th} g⟩ - ⟨ℓ, L_f g⟩ - t ⟨ℓ, L_f(g h)⟩| / t²`.
    pub residual: f64,
}

/// First-order check of the adjoint derivative
/// `DΘ*(f)(h)(ℓ) = ℓ ∘ L_f((·) h)` against the finite difference in `t`.
pub fn dual_derivative_check(
    alphabet: &AprioriAlphabet,
    f: &Potential,
    h: &Potential,
    ell: &[f64],
    g: &DepthFunction,
    t: f64,
) -> Result<DualDerivativeReport> {
    if !(t > 0.0) {
        return Err(Error::invalid("step t must be positive"));
    }
    let out_depth = f.depth().max(h.depth()).max(g.depth()).saturating_sub(1);
    let len = crate::cylinder::table_len(alphabet.len(), out_depth)?;
    if ell.len() != len {
        return Err(Error::invalid(format!(
            "functional has {} weights but the result grid has {len} words",
            ell.len()
        )));
    }
    let pair = |psi: &DepthFunction| -> Result<f64> {
        let aligned = psi.align(out_depth)?;
        Ok(ell.iter().zip(aligned.table()).map(|(a, b)| a * b).sum())
    };
    let base = pair(&apply(alphabet, f, g)?)?;
    let shifted = pair(&apply(alphabet, &f.add_scaled(h, t)?, g)?)?;
    let first_order = pair(&apply(alphabet, f, &g.product(&h.tabulate()?)?)?)?;
    let residual = (shifted - base - t * first_order).abs() / (t * t);
    Ok(DualDerivativeReport {
        t,
        first_order,
        residual,
    })
}

#[derive(Debug, Clone)]
pub struct SmoothnessRow {
    pub t: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    /// Central first divided difference `(P(f+th) - P(f-th)) / 2t`.
    pub d1: f64,
    /// Central second divided difference `(P(f+th) - 2P(f) + P(f-th)) / t²`.
    pub d2: f64,
}

#[derive(Debug, Clone)]
pub struct SmoothnessReport {
    pub p0: f64,
    pub rows: Vec<SmoothnessRow>,
    /// Richardson extrapolation of `d1` from the two finest scales.
    pub d1_limit: f64,
    /// Richardson extrapolation of `d2` from the two finest scales.
    pub d2_limit: f64,
    /// Set when the divided differences fail to stabilize across scales.
    pub gap_warning: bool,
}

/// Divided-difference smoothness report for `t ↦ P(f + t h)`.
///
/// The default grid keeps `t >= 1e-4`; smaller steps are rejected because
/// cancellation in the second difference would dominate the estimate.
pub fn pressure_smoothness(
    alphabet: &AprioriAlphabet,
    f: &Potential,
    h: &Potential,
    k: usize,
    t_grid: &[f64],
    tol: f64,
    itmax: usize,
) -> Result<SmoothnessReport> {
    if t_grid.is_empty() {
        return Err(Error::invalid("empty step grid"));
    }
    if t_grid.windows(2).any(|w| w[1] >= w[0]) || t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::invalid("step grid must be positive and decreasing"));
    }
    if t_grid.iter().any(|&t| t < 1e-4) {
        return Err(Error::invalid(
            "steps below 1e-4 are rejected (cancellation would dominate)",
        ));
    }
    let pressure_at = |t: f64| -> Result<f64> {
        let ft = if t == 0.0 {
            f.clone()
        } else {
            f.add_scaled(h, t)?
        };
        Ok(rpf_solve(alphabet, &ft, k, tol, itmax)?.lambda.ln())
    };
    let p0 = pressure_at(0.0)?;
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let pp = pressure_at(t)?;
        let pm = pressure_at(-t)?;
        rows.push(SmoothnessRow {
            t,
            p_plus: pp,
            p_minus: pm,
            d1: (pp - pm) / (2.0 * t),
            d2: (pp - 2.0 * p0 + pm) / (t * t),
        });
    }
    let last = &rows[rows.len() - 1];
    let (d1_limit, d2_limit, gap_warning) = if rows.len() >= 2 {
        let prev = &rows[rows.len() - 2];
        let r = prev.t / last.t;
        let r2 = r * r;
        let d1_limit = (r2 * last.d1 - prev.d1) / (r2 - 1.0);
        let d2_limit = (r2 * last.d2 - prev.d2) / (r2 - 1.0);
        // the two finest central differences must already agree coarsely
        let scale = last.d2.abs().max(1.0);
        let warn = (last.d2 - prev.d2).abs() > 0.5 * scale;
        (d1_limit, d2_limit, warn)
    } else {
        (last.d1, last.d2, false)
    };
    Ok(SmoothnessReport {
        p0,
        rows,
        d1_limit,
        d2_limit,
        gap_warning,
    })
}

/// Default decreasing step grid `{1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4}`.
pub fn default_step_grid() -> Vec<f64> {
    vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::AprioriAlphabet;
    use crate::cylinder::DepthFunction;
    use crate::potential::Potential;
    use approx::assert_relative_eq;

    fn spin(a: &AprioriAlphabet) -> DepthFunction {
        DepthFunction::from_fn(a.len(), 1, |w| a.node(w[0])).unwrap()
    }

    fn lcg(state: &mut u64) -> f64 {
        *state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (*state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    #[test]
    fn derivative_zero_direction() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::nn_ising(&a, 1.0);
        let zero = Potential::constant(&a, 0.0);
        let phi = spin(&a);
        let d = directional_derivative(&a, &f, &[&zero], &phi).unwrap();
        assert!(d.sup_norm() <= 1e-15);
    }

    #[test]
    fn derivative_identity_direction() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::constant(&a, 0.0);
        let one = Potential::constant(&a, 1.0);
        let phi = DepthFunction::constant(2, 1.0);
        let d = directional_derivative(&a, &f, &[&one], &phi).unwrap();
        assert_relative_eq!(d.table()[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn derivative_odd_direction_averages_to_zero() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::constant(&a, 0.0);
        let h = Potential::first_coordinate(&a);
        let phi = DepthFunction::constant(2, 1.0);
        let d = directional_derivative(&a, &f, &[&h], &phi).unwrap();
        assert!(d.sup_norm() <= 1e-15);
    }

    #[test]
    fn derivative_is_symmetric_in_directions() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::nn_ising(&a, 0.7);
        let mut state = 31u64;
        let h1 = Potential::tabulated(
            &a,
            DepthFunction::from_fn(2, 2, |_| lcg(&mut state)).unwrap(),
        )
        .unwrap();
        let h2 = Potential::tabulated(
            &a,
            DepthFunction::from_fn(2, 1, |_| lcg(&mut state)).unwrap(),
        )
        .unwrap();
        let h3 = Potential::first_coordinate(&a);
        let phi = DepthFunction::from_fn(2, 2, |_| lcg(&mut state)).unwrap();
        let d123 = directional_derivative(&a, &f, &[&h1, &h2, &h3], &phi).unwrap();
        let d312 = directional_derivative(&a, &f, &[&h3, &h1, &h2], &phi).unwrap();
        let d231 = directional_derivative(&a, &f, &[&h2, &h3, &h1], &phi).unwrap();
        for (x, y) in d123.table().iter().zip(d312.table()) {
            assert!((x - y).abs() <= 1e-13);
        }
        for (x, y) in d123.table().iter().zip(d231.table()) {
            assert!((x - y).abs() <= 1e-13);
        }
    }

    #[test]
    fn remainder_zero_direction_vanishes() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::nn_ising(&a, 1.0);
        let zero = Potential::constant(&a, 0.0);
        let phi = spin(&a);
        let table = taylor_remainder(&a, &f, &zero, &phi, 2, &[1e-1, 1e-2]).unwrap();
        for row in &table.rows {
            assert!(row.remainder <= 1e-15);
        }
    }

    #[test]
    fn remainder_first_order_ratio_half() {
        // f = 0, h(a) = a, φ = 1, p = 1:
        // L_{th}1 = cosh(t), so remainder/t² → L_0(h²)/2 = 1/2
        let a = AprioriAlphabet::two_point();
        let f = Potential::constant(&a, 0.0);
        let h = Potential::first_coordinate(&a);
        let phi = DepthFunction::constant(2, 1.0);
        let table = taylor_remainder(&a, &f, &h, &phi, 1, &[1e-3]).unwrap();
        let ratio = table.rows[0].ratio;
        assert!((ratio - 0.5).abs() <= 0.05 * 0.5, "ratio {ratio}");
    }

    #[test]
    fn remainder_fourth_order_plateau() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::nn_ising(&a, 0.5);
        let h = Potential::first_coordinate(&a);
        let phi = spin(&a);
        // halving grid; below ~1e-2 the fourth-order remainder (~t⁴/24)
        // drops under the roundoff floor of the O(1) operator values, so the
        // ratio column is only meaningful on the resolvable scales
        let grid = [1e-1, 5e-2, 2.5e-2, 1.25e-2];
        let table = taylor_remainder(&a, &f, &h, &phi, 3, &grid).unwrap();
        assert!(
            table.ratio_spread() <= 0.10,
            "ratios {:?}",
            table.rows.iter().map(|r| r.ratio).collect::<Vec<_>>()
        );
    }

    #[test]
    fn remainder_majorant_holds_to_order_six() {
        let a = AprioriAlphabet::two_point();
        let mut state = 7u64;
        for trial in 0..8 {
            let f = Potential::tabulated(
                &a,
                DepthFunction::from_fn(2, 2, |_| lcg(&mut state)).unwrap(),
            )
            .unwrap();
            let h = Potential::tabulated(
                &a,
                DepthFunction::from_fn(2, 2, |_| lcg(&mut state)).unwrap(),
            )
            .unwrap();
            let phi = DepthFunction::from_fn(2, 2, |_| lcg(&mut state)).unwrap();
            for order in 1..=6 {
                let table = taylor_remainder(&a, &f, &h, &phi, order, &[1.0]).unwrap();
                let row = &table.rows[0];
                assert!(
                    row.remainder <= row.majorant + 1e-12,
                    "trial {trial} order {order}: {} > {}",
                    row.remainder,
                    row.majorant
                );
            }
        }
    }

    #[test]
    fn dual_check_zero_direction() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::nn_ising(&a, 1.0);
        let zero = Potential::constant(&a, 0.0);
        let g = spin(&a);
        let ell = vec![0.25; 2];
        let rep = dual_derivative_check(&a, &f, &zero, &ell, &g, 1e-3).unwrap();
        assert!(rep.residual <= 1e-12);
    }

    #[test]
    fn dual_check_second_order_term() {
        // f = 0, ℓ uniform, g = 1, h(a) = a: first-order term 0,
        // residual → ⟨ℓ, L_0(h²)⟩ / 2 = 1/2
        let a = AprioriAlphabet::two_point();
        let f = Potential::constant(&a, 0.0);
        let h = Potential::first_coordinate(&a);
        let g = DepthFunction::constant(2, 1.0);
        let ell = vec![1.0];
        let rep = dual_derivative_check(&a, &f, &h, &ell, &g, 1e-3).unwrap();
        assert!(rep.first_order.abs() <= 1e-15);
        assert!((rep.residual - 0.5).abs() <= 0.05 * 0.5);
    }

    #[test]
    fn dual_check_residual_bounded_as_t_shrinks() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::nn_ising(&a, 0.8);
        let h = Potential::first_coordinate(&a);
        let g = spin(&a);
        let ell = vec![0.3, 0.7];
        let mut residuals = Vec::new();
        for &t in &[1e-1, 1e-2, 1e-3] {
            residuals.push(
                dual_derivative_check(&a, &f, &h, &ell, &g, t)
                    .unwrap()
                    .residual,
            );
        }
        let max = residuals.iter().cloned().fold(0.0f64, f64::max);
        assert!(max <= 1.0, "residual/t² stays bounded: {residuals:?}");
    }

    #[test]
    fn dual_check_at_eigen_functional() {
        // ℓ = ν_f: ⟨ν, L_f(g h)⟩ must equal λ ν_g-weighted pairing of g·h
        let a = AprioriAlphabet::two_point();
        let f = Potential::nn_ising(&a, 1.0);
        let rpf = crate::transfer::rpf_solve(&a, &f, 1, 1e-14, 10000).unwrap();
        let h = Potential::first_coordinate(&a);
        let g = spin(&a);
        let rep = dual_derivative_check(&a, &f, &h, &rpf.nu, &g, 1e-3).unwrap();
        let gh = g.product(&h.tabulate().unwrap()).unwrap();
        let expect = rpf.lambda * rpf.nu_pair(&gh).unwrap();
        assert!((rep.first_order - expect).abs() <= 1e-10);
    }

    #[test]
    fn pressure_shift_by_constant() {
        // P(f + t·1) = P(f) + t exactly, so d1 = 1 at every scale
        let a = AprioriAlphabet::two_point();
        let f = Potential::nn_ising(&a, 1.0);
        let one = Potential::constant(&a, 1.0);
        let rep = pressure_smoothness(&a, &f, &one, 1, &[1e-1, 3e-2, 1e-2], 1e-14, 20000).unwrap();
        for row in &rep.rows {
            assert!((row.d1 - 1.0).abs() <= 1e-10, "d1 = {}", row.d1);
        }
        assert!(!rep.gap_warning);
    }

    #[test]
    fn pressure_log_cosh_curvature() {
        // P(t·x1x2) = log cosh t: second derivative 1 at t = 0
        let a = AprioriAlphabet::two_point();
        let f = Potential::constant(&a, 0.0);
        let h = Potential::nn_ising(&a, 1.0);
        let rep = pressure_smoothness(&a, &f, &h, 1, &[2e-2, 1e-2], 1e-15, 50000).unwrap();
        assert!((rep.d2_limit - 1.0).abs() <= 1e-4, "d2 = {}", rep.d2_limit);
        // odd direction: first derivative vanishes by spin-flip symmetry
        assert!(rep.d1_limit.abs() <= 1e-8);
    }

    #[test]
    fn step_grid_validation() {
        let a = AprioriAlphabet::two_point();
        let f = Potential::constant(&a, 0.0);
        let h = Potential::nn_ising(&a, 1.0);
        assert!(pressure_smoothness(&a, &f, &h, 1, &[1e-2, 1e-1], 1e-12, 1000).is_err());
        assert!(pressure_smoothness(&a, &f, &h, 1, &[1e-2, 1e-5], 1e-12, 1000).is_err());
        assert!(pressure_smoothness(&a, &f, &h, 1, &[], 1e-12, 1000).is_err());
    }
}
