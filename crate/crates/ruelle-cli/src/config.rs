//! Declarative experiment configs (TOML). Unknown keys are rejected so a
//! config diff is always meaningful.

use ruelle::alphabet::AprioriAlphabet;
use ruelle::ising::Window;
use ruelle::potential::Potential;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Rpf,
    Pressure,
    Spectrum,
    Projector,
    Analyticity,
    Regularity,
    Correlations,
    IsingGks,
    IsingDecay,
    MarginalCheck,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Rpf => "rpf",
            Self::Pressure => "pressure",
            Self::Spectrum => "spectrum",
            Self::Projector => "projector",
            Self::Analyticity => "analyticity",
            Self::Regularity => "regularity",
            Self::Correlations => "correlations",
            Self::IsingGks => "ising-gks",
            Self::IsingDecay => "ising-decay",
            Self::MarginalCheck => "marginal-check",
        }
    }

    pub fn all() -> &'static [ExperimentKind] {
        &[
            Self::Rpf,
            Self::Pressure,
            Self::Spectrum,
            Self::Projector,
            Self::Analyticity,
            Self::Regularity,
            Self::Correlations,
            Self::IsingGks,
            Self::IsingDecay,
            Self::MarginalCheck,
        ]
    }

    pub fn describe(&self) -> &'static str {
        match self {
            Self::Rpf => {
                "Power-iteration eigentriple (lambda, h, nu) of the transfer matrix.\n\
                 Criteria ids: rpf.lambda, rpf.pressure, rpf.residuals.\n\
                 Metrics: lambda, pressure, residual_h, residual_nu, iterations."
            }
            Self::Pressure => {
                "Topological pressure log(lambda) and the finite-n limit probes\n\
                 (1/n) log(L^n 1)(x) on grid points.\n\
                 Criteria ids: pressure.value, pressure.limit-deviation.\n\
                 Artifacts: probes.csv (word_index, value, deviation)."
            }
            Self::Spectrum => {
                "Dense eigenvalue list, tau = |lambda2|/lambda1, gap, and the\n\
                 cross-check against the power-iteration lambda.\n\
                 Criteria ids: spectrum.tau, spectrum.rpf-agreement.\n\
                 Artifacts: eigenvalues.csv (re, im, modulus)."
            }
            Self::Projector => {
                "Riesz projector on the dominant circle: idempotency, commutation\n\
                 and trace diagnostics, plus the eigenvalue quotient.\n\
                 Criteria ids: projector.idempotency, projector.commutation,\n\
                 projector.trace, projector.quotient."
            }
            Self::Analyticity => {
                "Taylor remainders of t -> L_{f+th} with the exponential majorant,\n\
                 and divided-difference smoothness of the pressure.\n\
                 Criteria ids: analyticity.ratio-plateau, analyticity.majorant,\n\
                 analyticity.d2.\n\
                 Artifacts: remainders.csv, smoothness.csv."
            }
            Self::Regularity => {
                "Holder / strong-Walters / weak-Walters / distortion / algebra /\n\
                 variation audits with certified witnesses.\n\
                 Criteria ids: regularity.verdict, regularity.slope.\n\
                 Artifacts: witnesses.csv (eta, n, d_xy, observed, bound, witness_id)."
            }
            Self::Correlations => {
                "Correlation series of the Gibbs eigen-data and competing decay\n\
                 fits (exponential vs polynomial).\n\
                 Criteria ids: correlations.rate, correlations.verdict,\n\
                 correlations.oracle-agreement.\n\
                 Artifacts: series.csv (n, c, abs_c)."
            }
            Self::IsingGks => {
                "Exact finite-volume Gibbs measure with +1 boundary and the\n\
                 GKS-I / GKS-II inequality audits.\n\
                 Criteria ids: ising.gks1, ising.gks2.\n\
                 Artifacts: audit.csv (kind, subset, value)."
            }
            Self::IsingDecay => {
                "Two-point series <z1 z(1+n)> with the tanh(n^-alpha) lower bound\n\
                 and the polynomial/exponential classifier.\n\
                 Criteria ids: ising.tanh-bound, ising.decay-class.\n\
                 Artifacts: two_point.csv (n, value, tanh_bound, taylor_bound, margin)."
            }
            Self::MarginalCheck => {
                "Equality of the Z-window measure under restricted couplings with\n\
                 the N-window measure on shared monomials.\n\
                 Criteria ids: marginal.discrepancy."
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub alphabet: Option<AlphabetSpec>,
    #[serde(default)]
    pub potential: Option<PotentialSpec>,
    /// Direction potential for analyticity experiments.
    #[serde(default)]
    pub direction: Option<PotentialSpec>,
    #[serde(default)]
    pub numerics: NumericsSpec,
    #[serde(default)]
    pub ising: Option<IsingSpec>,
    #[serde(default)]
    pub regularity: Option<RegularitySpec>,
    #[serde(default)]
    pub criteria: CriteriaSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct AlphabetSpec {
    pub kind: String,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub nodes: Option<Vec<f64>>,
}

impl AlphabetSpec {
    pub fn build(&self) -> Result<AprioriAlphabet, String> {
        match self.kind.as_str() {
            "two-point" => Ok(AprioriAlphabet::two_point()),
            "finite" => match (&self.nodes, self.m) {
                (Some(nodes), _) => {
                    AprioriAlphabet::finite_atomic_nodes(nodes.clone()).map_err(|e| e.to_string())
                }
                (None, Some(m)) => AprioriAlphabet::finite_atomic(m).map_err(|e| e.to_string()),
                _ => Err("finite alphabet needs `m` or `nodes`".into()),
            },
            "interval" => {
                AprioriAlphabet::interval_uniform(self.m.unwrap_or(8)).map_err(|e| e.to_string())
            }
            "circle" => {
                AprioriAlphabet::circle_uniform(self.m.unwrap_or(8)).map_err(|e| e.to_string())
            }
            other => Err(format!("unknown alphabet kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct PotentialSpec {
    pub family: String,
    #[serde(default)]
    pub value: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub truncation: Option<usize>,
    #[serde(default)]
    pub allow_slow_decay: bool,
}

impl PotentialSpec {
    pub fn build(&self, alphabet: &AprioriAlphabet) -> Result<Potential, String> {
        match self.family.as_str() {
            "constant" => Ok(Potential::constant(alphabet, self.value.unwrap_or(0.0))),
            "first-coordinate" => Ok(Potential::first_coordinate(alphabet)),
            "nn-ising" => Ok(Potential::nn_ising(alphabet, self.beta.unwrap_or(1.0))),
            "long-range-ising" => {
                let alpha = self.alpha.ok_or("long-range-ising needs `alpha`")?;
                let truncation = self
                    .truncation
                    .ok_or("long-range-ising needs `truncation`")?;
                Potential::long_range_ising(alphabet, alpha, truncation, self.allow_slow_decay)
                    .map_err(|e| e.to_string())
            }
            other => Err(format!("unknown potential family `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", default)]
pub struct NumericsSpec {
    pub depth: usize,
    pub tol: f64,
    pub itmax: usize,
    pub n_check: usize,
    pub n_max: usize,
    pub seed: u64,
    /// Contour nodes for projector experiments.
    pub contour_nodes: usize,
    /// Taylor order for analyticity experiments.
    pub order: usize,
    /// Step grid for analyticity experiments.
    pub steps: Vec<f64>,
}

impl Default for NumericsSpec {
    fn default() -> Self {
        Self {
            depth: 1,
            tol: 1e-13,
            itmax: 50_000,
            n_check: 200,
            n_max: 30,
            seed: 0,
            contour_nodes: 64,
            order: 1,
            steps: vec![1e-1, 1e-2, 1e-3, 1e-4],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct IsingSpec {
    pub alpha: f64,
    pub window_lo: i64,
    pub window_hi: i64,
    #[serde(default)]
    pub n_list: Option<Vec<usize>>,
    #[serde(default = "default_subset_cap")]
    pub subset_size_cap: usize,
    #[serde(default = "default_random_subsets")]
    pub random_subsets: usize,
    #[serde(default = "default_gks_tol")]
    pub tolerance: f64,
    /// Volume parameter for marginal-check.
    #[serde(default)]
    pub n: Option<usize>,
}

fn default_subset_cap() -> usize {
    3
}

fn default_random_subsets() -> usize {
    500
}

fn default_gks_tol() -> f64 {
    1e-12
}

impl IsingSpec {
    pub fn window(&self) -> Result<Window, String> {
        Window::new(self.window_lo, self.window_hi).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RegularitySpec {
    /// holder | strong-walters | weak-walters | distortion | algebra | variation
    pub audit: String,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub eta_list: Vec<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub p_grid: Vec<usize>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_gamma() -> f64 {
    1.0
}

fn default_samples() -> usize {
    500
}

/// Declared pass thresholds; `status` derives only from these.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct CriteriaSpec {
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub lambda_tol: Option<f64>,
    #[serde(default)]
    pub pressure: Option<f64>,
    #[serde(default)]
    pub pressure_tol: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub tau_tol: Option<f64>,
    #[serde(default)]
    pub rate: Option<f64>,
    #[serde(default)]
    pub rate_tol: Option<f64>,
    #[serde(default)]
    pub exponent: Option<f64>,
    #[serde(default)]
    pub exponent_tol: Option<f64>,
    #[serde(default)]
    pub slope: Option<f64>,
    #[serde(default)]
    pub slope_tol: Option<f64>,
    #[serde(default)]
    pub max_deviation: Option<f64>,
    #[serde(default)]
    pub d2: Option<f64>,
    #[serde(default)]
    pub d2_tol: Option<f64>,
    #[serde(default)]
    pub diag_tol: Option<f64>,
    #[serde(default)]
    pub verdict: Option<String>,
    #[serde(default)]
    pub max_discrepancy: Option<f64>,
}

pub fn parse_config(text: &str) -> Result<ConfigFile, String> {
    toml::from_str(text).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteFile {
    pub experiments: Vec<SuiteEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteEntry {
    pub name: String,
    pub config: String,
}

pub fn parse_suite(text: &str) -> Result<SuiteFile, String> {
    toml::from_str(text).map_err(|e| e.to_string())
}
