//! Self-checking suites behind `paircorr verify`.
//!
//! Each suite measures one property on deterministic inputs and reports
//! the numbers next to a pass/fail verdict.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::asymptotics::{fit_exponential_decay, geometric_sum_deviation, l1_to_limit, slice_prediction, GrowthParams};
use crate::correlation::{pair_correlation, BinLayout};
use crate::error::Result;
use crate::generators::{log_integers, synthetic_pa, SyntheticSpec};
use crate::oracle;
use crate::scaling::ScalingSpec;
use crate::spectrum::LengthSpectrum;

pub const GEOMETRIC_SUM_BASE: f64 = 1.1;
pub const GEOMETRIC_SUM_EXPONENTS: [f64; 3] = [-1.5, 0.0, 2.0];
pub const GEOMETRIC_SUM_SIZES: [u64; 3] = [100, 1_000, 10_000];
/// Accepted range of `r(10²) / r(10⁴)`: a `1/√M` decay (ratio 10) within a factor 3.
pub const GEOMETRIC_SUM_RATIO_RANGE: (f64, f64) = (10.0 / 3.0, 30.0);

pub const SLICE_T: f64 = 12.0;
pub const SLICE_ETAS: [f64; 3] = [0.3, 0.5, 1.0];
pub const SLICE_TOLERANCE: f64 = 0.01;

pub const RATE_CUTS: [f64; 4] = [8.0, 10.0, 12.0, 14.0];
pub const RATE_WINDOW: f64 = 5.0;
pub const RATE_BIN: f64 = 0.1;
pub const RATE_MIN_R2: f64 = 0.8;

pub const ORACLE_SPECTRA: usize = 50;
pub const ORACLE_MAX_POINTS: usize = 2000;
pub const ORACLE_REL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub measurements: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn new(suites: Vec<SuiteResult>) -> Self {
        Self {
            passed: suites.iter().all(|s| s.passed),
            suites,
        }
    }
}

/// Relative deviation `r(M)` of the geometric-type sum from its leading
/// term, and the decay ratio `r(10²)/r(10⁴)` for each exponent `b`.
pub fn geometric_sum_suite() -> Result<SuiteResult> {
    let mut rows = Vec::new();
    let mut passed = true;
    for &b in &GEOMETRIC_SUM_EXPONENTS {
        let rs: Vec<f64> = GEOMETRIC_SUM_SIZES
            .iter()
            .map(|&m| geometric_sum_deviation(b, GEOMETRIC_SUM_BASE, m).map(f64::abs))
            .collect::<Result<_>>()?;
        let ratio = rs[0] / rs[2];
        let ok = ratio >= GEOMETRIC_SUM_RATIO_RANGE.0 && ratio <= GEOMETRIC_SUM_RATIO_RANGE.1;
        passed &= ok;
        rows.push(json!({
            "b": b,
            "a": GEOMETRIC_SUM_BASE,
            "M": GEOMETRIC_SUM_SIZES,
            "relative_error": rs,
            "ratio_first_last": if ratio.is_finite() { json!(ratio) } else { json!("inf") },
            "passed": ok,
        }));
    }
    Ok(SuiteResult {
        name: "geometric-sum".into(),
        passed,
        measurements: json!({ "accepted_ratio": [GEOMETRIC_SUM_RATIO_RANGE.0, GEOMETRIC_SUM_RATIO_RANGE.1], "rows": rows }),
    })
}

/// Thin slices of two spectra with `c = 1, α = 0, δ = 1` against their leading term.
pub fn slice_suite() -> Result<SuiteResult> {
    let params = GrowthParams::new(1.0, 0.0, 1.0, 1.0)?;
    let synthetic = synthetic_pa(&SyntheticSpec::inverse_counting(params, SLICE_T))?;
    let logs = log_integers(SLICE_T)?;
    let mut rows = Vec::new();
    let mut passed = true;
    for (name, s) in [("synthetic_pa", &synthetic), ("log_integers", &logs)] {
        for &eta in &SLICE_ETAS {
            let actual = s.slice(SLICE_T, eta)?;
            let predicted = slice_prediction(&params, SLICE_T, eta)?;
            let err = (actual / predicted - 1.0).abs();
            let ok = err <= SLICE_TOLERANCE;
            passed &= ok;
            rows.push(json!({ "spectrum": name, "t": SLICE_T, "eta": eta, "slice": actual,
                              "prediction": predicted, "relative_error": err, "passed": ok }));
        }
    }
    Ok(SuiteResult {
        name: "slices".into(),
        passed,
        measurements: json!({ "tolerance": SLICE_TOLERANCE, "rows": rows }),
    })
}

/// L1 distances of the unit-scaling density of the log-integers to
/// `g_1` at each cut, and the fitted exponential decay rate.
pub fn l1_deviation_sweep(spectrum: &LengthSpectrum<f64>, cuts: &[f64], delta: f64) -> Result<Vec<f64>> {
    cuts.iter()
        .map(|&n| {
            let h = pair_correlation(spectrum, n, &ScalingSpec::unit(), RATE_WINDOW, RATE_BIN, true)?;
            Ok(l1_to_limit(&h, delta))
        })
        .collect()
}

pub fn rate_suite() -> Result<SuiteResult> {
    let top = RATE_CUTS.iter().copied().fold(0.0, f64::max);
    let spectrum = log_integers(top)?;
    let l1 = l1_deviation_sweep(&spectrum, &RATE_CUTS, 1.0)?;
    let fit = fit_exponential_decay(&RATE_CUTS, &l1)?;
    let passed = fit.lambda > 0.0 && fit.r_squared >= RATE_MIN_R2;
    Ok(SuiteResult {
        name: "rates".into(),
        passed,
        measurements: json!({ "n": RATE_CUTS, "l1": l1, "lambda": fit.lambda, "c": fit.c,
                              "r_squared": fit.r_squared, "min_r_squared": RATE_MIN_R2 }),
    })
}

/// Random spectrum for kernel cross-checks: up to `max_points` distinct
/// lengths in `[0, l_max]` with integer or real weights.
pub fn random_spectrum(rng: &mut ChaCha8Rng, max_points: usize) -> LengthSpectrum<f64> {
    let n = rng.gen_range(1..=max_points);
    let l_max = rng.gen_range(1.0..10.0);
    let integer_weights = rng.gen_bool(0.5);
    let pairs: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let x = rng.gen_range(0.0..=l_max);
            let w = if integer_weights {
                rng.gen_range(1..=5) as f64
            } else {
                rng.gen_range(0.1..3.0)
            };
            (x, w)
        })
        .collect();
    LengthSpectrum::from_raw(pairs, l_max, "random").expect("valid random spectrum")
}

/// Worst relative disagreement between the fast kernel and the all-pairs oracle.
pub fn oracle_disagreement(
    spectrum: &LengthSpectrum<f64>,
    scaling: &ScalingSpec<f64>,
    half_width: f64,
    bin_width: f64,
    include_diagonal: bool,
) -> Result<f64> {
    let n_cut = spectrum.l_max();
    let fast = pair_correlation(spectrum, n_cut, scaling, half_width, bin_width, include_diagonal)?;
    let layout = BinLayout::new(half_width, bin_width)?;
    let psi = scaling.eval(n_cut)?;
    let slow = oracle::pair_correlation_counts(spectrum.lengths(), spectrum.weights(), psi, &layout, include_diagonal);
    Ok(fast
        .counts
        .iter()
        .zip(&slow)
        .map(|(&f, &s)| (f - s).abs() / s.abs().max(1.0))
        .fold(0.0, f64::max))
}

pub fn oracle_suite(seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut sizes = Vec::with_capacity(ORACLE_SPECTRA);
    for _ in 0..ORACLE_SPECTRA {
        let s = random_spectrum(&mut rng, ORACLE_MAX_POINTS);
        sizes.push(s.len());
        let half_width = [1.0, 2.0, 5.0][rng.gen_range(0..3)];
        let bin_width = half_width / [5.0, 10.0, 25.0][rng.gen_range(0..3)];
        for scaling in [ScalingSpec::unit(), ScalingSpec::power(1.0)?] {
            for diag in [true, false] {
                worst = worst.max(oracle_disagreement(&s, &scaling, half_width, bin_width, diag)?);
            }
        }
    }
    Ok(SuiteResult {
        name: "oracle".into(),
        passed: worst <= ORACLE_REL_TOL,
        measurements: json!({ "spectra": ORACLE_SPECTRA, "sizes": sizes, "seed": seed,
                              "max_relative_error": worst, "tolerance": ORACLE_REL_TOL }),
    })
}

pub const SUITE_NAMES: [&str; 4] = ["geometric-sum", "slices", "rates", "oracle"];

pub fn run_suite(name: &str, seed: u64) -> Result<Option<SuiteResult>> {
    Ok(Some(match name {
        "geometric-sum" => geometric_sum_suite()?,
        "slices" => slice_suite()?,
        "rates" => rate_suite()?,
        "oracle" => oracle_suite(seed)?,
        _ => return Ok(None),
    }))
}

pub fn run_all(seed: u64) -> Result<VerifyReport> {
    let suites = SUITE_NAMES
        .iter()
        .map(|n| run_suite(n, seed).map(|s| s.expect("known suite")))
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport::new(suites))
}
