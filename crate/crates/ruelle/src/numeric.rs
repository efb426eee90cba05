//! Small numeric kernels used across the crate: compensated summation,
//! streaming log-sum-exp, certified polynomial tails and least-squares lines.

/// Kahan-Babuska compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Streaming log(sum of exp(x_i)) with a running maximum.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
    comp: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
            comp: 0.0,
        }
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        if x <= self.max {
            let term = (x - self.max).exp();
            let t = self.sum + term;
            if self.sum.abs() >= term {
                self.comp += (self.sum - t) + term;
            } else {
                self.comp += (term - t) + self.sum;
            }
            self.sum = t;
        } else {
            // rescale the accumulator to the new maximum
            let scale = if self.max.is_finite() {
                (self.max - x).exp()
            } else {
                0.0
            };
            self.sum = (self.sum + self.comp) * scale + 1.0;
            self.comp = 0.0;
            self.max = x;
        }
    }

    pub fn value(&self) -> f64 {
        self.max + (self.sum + self.comp).ln()
    }
}

/// Tail sum `Σ_{m > n} m^{-alpha}` for `alpha > 1`.
///
/// Explicit partial sum up to `max(n, 256)` followed by an Euler-Maclaurin
/// closure; the first omitted correction is of order `a^{-alpha-7}` with
/// `a > 256`, so the absolute error is far below 1e-14.
pub fn zeta_tail(alpha: f64, n: u64) -> f64 {
    assert!(alpha > 1.0, "zeta_tail requires alpha > 1");
    let m = n.max(256);
    let mut acc = KahanSum::new();
    for k in (n + 1)..=m {
        acc.add((k as f64).powf(-alpha));
    }
    let a = (m + 1) as f64;
    let f = a.powf(-alpha);
    // Σ_{k=a}^∞ k^{-α} = a^{1-α}/(α-1) + a^{-α}/2 + α/12 a^{-α-1}
    //                    - α(α+1)(α+2)/720 a^{-α-3} + α⋯(α+4)/30240 a^{-α-5} - ...
    acc.add(f * a / (alpha - 1.0));
    acc.add(0.5 * f);
    acc.add(alpha / 12.0 * f / a);
    acc.add(-alpha * (alpha + 1.0) * (alpha + 2.0) / 720.0 * f / (a * a * a));
    acc.add(
        alpha * (alpha + 1.0) * (alpha + 2.0) * (alpha + 3.0) * (alpha + 4.0) / 30240.0 * f
            / (a * a * a * a * a),
    );
    acc.value()
}

/// Ordinary least squares line through `(x_i, y_i)`.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub rms_residual: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points for a line");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let r = y - (slope * x + intercept);
        ss += r * r;
    }
    LineFit {
        slope,
        intercept,
        rms_residual: (ss / n).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut s = KahanSum::new();
        s.add(1.0);
        for _ in 0..1_000_000 {
            s.add(1e-17);
        }
        assert!((s.value() - (1.0 + 1e-11)).abs() < 1e-15);
    }

    #[test]
    fn logsumexp_matches_direct() {
        let xs = [0.3, -2.0, 5.0, 4.9, -100.0];
        let mut lse = LogSumExp::new();
        for &x in &xs {
            lse.add(x);
        }
        let direct = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((lse.value() - direct).abs() < 1e-13);
    }

    #[test]
    fn logsumexp_handles_large_magnitudes() {
        let mut lse = LogSumExp::new();
        lse.add(1000.0);
        lse.add(1000.0 + (2.0f64).ln());
        // log(e^1000 + 2 e^1000) = 1000 + log 3
        assert!((lse.value() - (1000.0 + 3.0f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn zeta_tail_alpha2_closed_form() {
        // Σ_{m>n} m^{-2} = ψ'(n+1); for n = 1 this is π²/6 - 1.
        let expect = std::f64::consts::PI.powi(2) / 6.0 - 1.0;
        assert!((zeta_tail(2.0, 1) - expect).abs() < 1e-14);
    }

    #[test]
    fn zeta_tail_alpha3_example() {
        // ζ(3) - 1 - 1/8
        let zeta3 = 1.2020569031595943;
        assert!((zeta_tail(3.0, 2) - (zeta3 - 1.125)).abs() < 1e-14);
    }

    #[test]
    fn zeta_tail_consistency_across_cutoffs() {
        // tail(n) - tail(n+1) must equal (n+1)^{-α} exactly to roundoff
        for &alpha in &[2.1, 3.0, 4.0] {
            for &n in &[1u64, 10, 100, 1000] {
                let lhs = zeta_tail(alpha, n) - zeta_tail(alpha, n + 1);
                let rhs = ((n + 1) as f64).powf(-alpha);
                assert!((lhs - rhs).abs() < 1e-15, "alpha={alpha} n={n}");
            }
        }
    }

    #[test]
    fn line_fit_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let fit = fit_line(&xs, &ys);
        assert!((fit.slope - 2.0).abs() < 1e-14);
        assert!((fit.intercept - 1.0).abs() < 1e-14);
        assert!(fit.rms_residual < 1e-14);
    }
}
