//! Limit laws, weighted geometric sums, error-rate shapes, plus estimation
//! of the growth constants `(c, α, δ, κ)` from a spectrum.

use serde::{Deserialize, Serialize};

use crate::correlation::PairCorrelationHistogram;
use crate::error::{Error, Result};
use crate::regression::{fit_line, least_squares};
use crate::scalar::{CompensatedSum, Real};
use crate::spectrum::LengthSpectrum;

/// Constants of the growth assumption `ω̃(t) = c t^α e^{δt} (1 + O(e^{−κt}))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: crate::scalar::Real"))]
pub struct GrowthParams<T> {
    pub c: T,
    pub alpha: T,
    pub delta: T,
    /// Error-term rate; `0` means unknown / not assumed.
    #[serde(default)]
    pub kappa: T,
}

impl<T: Real> GrowthParams<T> {
    pub fn new(c: T, alpha: T, delta: T, kappa: T) -> Result<Self> {
        let p = Self { c, alpha, delta, kappa };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > T::zero() && self.c.is_finite()) {
            return Err(Error::InvalidParameter(format!("c = {} must be positive", self.c)));
        }
        if !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha = {} must be finite",
                self.alpha
            )));
        }
        if !(self.delta > T::zero() && self.delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta = {} must be positive",
                self.delta
            )));
        }
        if !(self.kappa >= T::zero()) {
            return Err(Error::InvalidParameter(format!("kappa = {} must be >= 0", self.kappa)));
        }
        Ok(())
    }

    /// `min(κ, δ)`, the rate that enters the error terms.
    pub fn kappa_eff(&self) -> T {
        self.kappa.min(self.delta)
    }

    /// `ln(c t^α e^{δt})` for `t > 0` (or any `t` when `α = 0`).
    pub fn ln_counting(&self, t: T) -> T {
        let power = if self.alpha == T::zero() {
            T::zero()
        } else {
            self.alpha * t.ln()
        };
        self.c.ln() + power + self.delta * t
    }

    /// `c t^α e^{δt}`.
    pub fn counting(&self, t: T) -> T {
        self.ln_counting(t).exp()
    }
}

/// `g_δ(t) = (δ/2) e^{−δ|t|}`, the unit-scaling pair correlation function.
pub fn g_limit<T: Real>(params: &GrowthParams<T>, t: T) -> T {
    g_delta(params.delta, t)
}

pub fn g_delta<T: Real>(delta: T, t: T) -> T {
    delta / T::lit(2.0) * (-delta * t.abs()).exp()
}

/// Distribution function of `g_δ`.
fn g_cdf<T: Real>(delta: T, t: T) -> T {
    let half = T::lit(0.5);
    if t < T::zero() {
        half * (delta * t).exp()
    } else {
        T::one() - half * (-delta * t).exp()
    }
}

/// `∫_lo^hi g_δ(t) dt`, in closed form.
pub fn g_mass<T: Real>(delta: T, lo: T, hi: T) -> T {
    // Evaluate on the side where the cdf has no cancellation.
    if hi <= T::zero() {
        g_cdf(delta, hi) - g_cdf(delta, lo)
    } else if lo >= T::zero() {
        let half = T::lit(0.5);
        half * ((-delta * lo).exp() - (-delta * hi).exp())
    } else {
        g_cdf(delta, hi) - g_cdf(delta, lo)
    }
}

/// L1 distance on the histogram window between the renormalized empirical
/// density and the limit density `g_δ`, comparing bin masses:
/// `Σ_j |counts_j / ψ′(N) − ∫_{bin j} g_δ|`.
pub fn l1_to_limit<T: Real>(hist: &PairCorrelationHistogram<T>, delta: T) -> T {
    let edges = hist.layout.edges();
    hist.counts
        .iter()
        .enumerate()
        .map(|(j, &count)| {
            let empirical = if hist.renorm > T::zero() {
                count / hist.renorm
            } else {
                T::zero()
            };
            (empirical - g_mass(delta, edges[j], edges[j + 1])).abs()
        })
        .collect::<CompensatedSum<T>>()
        .value()
}

/// Largest deviation of any bin's renormalized density from the constant `level`.
pub fn max_deviation_from_constant<T: Real>(hist: &PairCorrelationHistogram<T>, level: T) -> T {
    hist.renormalized_density()
        .into_iter()
        .map(|(_, d)| (d - level).abs())
        .fold(T::zero(), T::max)
}

fn check_geometric_args<T: Real>(a: T, m: u64) -> Result<()> {
    if !(a > T::one()) {
        return Err(Error::InvalidParameter(format!("base a = {a} must exceed 1")));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    Ok(())
}

/// Log-space threshold beyond which the direct variants refuse to run.
fn log_range<T: Real>() -> T {
    T::max_value().ln() - T::lit(10.0)
}

/// `Σ_{k=1}^{M} k^b a^k`, summed directly.
pub fn geometric_sum<T: Real>(b: T, a: T, m: u64) -> Result<T> {
    check_geometric_args(a, m)?;
    let mf = T::from_u64(m).expect("M representable");
    if mf * a.ln() + b.max(T::zero()) * mf.ln() > log_range::<T>() {
        return Err(Error::Overflow);
    }
    let mut acc = CompensatedSum::new();
    let mut ak = T::one();
    for k in 1..=m {
        ak *= a;
        let kf = T::from_u64(k).expect("k representable");
        acc.add(kf.powf(b) * ak);
    }
    let s = acc.value();
    if s.is_finite() {
        Ok(s)
    } else {
        Err(Error::Overflow)
    }
}

/// `ln Σ_{k=1}^{M} k^b a^k`, without overflow for any `M`.
pub fn geometric_sum_ln<T: Real>(b: T, a: T, m: u64) -> Result<T> {
    check_geometric_args(a, m)?;
    let ln_a = a.ln();
    let term = |k: u64| {
        let kf = T::from_u64(k).expect("k representable");
        b * kf.ln() + kf * ln_a
    };
    let peak = (1..=m).map(term).fold(T::neg_infinity(), T::max);
    let sum: T = (1..=m)
        .map(|k| (term(k) - peak).exp())
        .collect::<CompensatedSum<T>>()
        .value();
    Ok(peak + sum.ln())
}

/// Leading term `(a / (a − 1)) M^b a^M`.
pub fn geometric_sum_leading<T: Real>(b: T, a: T, m: u64) -> Result<T> {
    let ln = geometric_sum_leading_ln(b, a, m)?;
    if ln > log_range::<T>() {
        return Err(Error::Overflow);
    }
    Ok(ln.exp())
}

pub fn geometric_sum_leading_ln<T: Real>(b: T, a: T, m: u64) -> Result<T> {
    check_geometric_args(a, m)?;
    let mf = T::from_u64(m).expect("M representable");
    Ok((a / (a - T::one())).ln() + b * mf.ln() + mf * a.ln())
}

/// `exact / approx − 1`, evaluated without cancellation.
///
/// With `k = M − j` the ratio is `(1 − 1/a) Σ_{j<M} (1 − j/M)^b a^{−j}`, and
/// the geometric part sums to `1 − a^{−M}`, which leaves
/// `−a^{−M} + (1 − 1/a) Σ_{j<M} a^{−j} ((1 − j/M)^b − 1)`.
pub fn geometric_sum_deviation<T: Real>(b: T, a: T, m: u64) -> Result<T> {
    check_geometric_args(a, m)?;
    let mf = T::from_u64(m).expect("M representable");
    let ln_a = a.ln();
    let mut acc = CompensatedSum::new();
    if b != T::zero() {
        for j in 0..m {
            let jf = T::from_u64(j).expect("j representable");
            let decay = (-jf * ln_a).exp();
            if decay == T::zero() {
                break;
            }
            acc.add(decay * (b * (-jf / mf).ln_1p()).exp_m1());
        }
    }
    Ok((T::one() - a.recip()) * acc.value() - (-mf * ln_a).exp())
}

/// Leading term of the `(t, η)`-slice: `c t^α e^{δt} (1 − e^{−δη})`.
pub fn slice_prediction<T: Real>(params: &GrowthParams<T>, t: T, eta: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::InvalidParameter(format!("t = {t} must be positive")));
    }
    if !(eta > T::zero()) {
        return Err(Error::InvalidEta(eta.as_f64()));
    }
    let band = -(-params.delta * eta).exp_m1();
    Ok((params.ln_counting(t) + band.ln()).exp())
}

/// The four regimes of the pair correlation error term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorCase {
    pub alpha_zero: bool,
    pub psi_unit: bool,
}

impl ErrorCase {
    pub fn new(alpha_zero: bool, psi_unit: bool) -> Self {
        Self { alpha_zero, psi_unit }
    }

    pub fn classify<T: Real>(params: &GrowthParams<T>, psi_unit: bool) -> Self {
        Self::new(params.alpha == T::zero(), psi_unit)
    }
}

/// Dominant error magnitude of the renormalized pair correlation, without
/// its unknown multiplicative constant. Only ratios of these values are
/// meaningful.
pub fn error_shape<T: Real>(case: ErrorCase, params: &GrowthParams<T>, n: T, window: T, psi_at_n: T) -> T {
    let k = params.kappa_eff();
    let a2 = window * window;
    match (case.alpha_zero, case.psi_unit) {
        (true, true) => window * (params.delta * window).exp() * (-k * n / T::lit(12.0)).exp(),
        (false, true) => a2 / n,
        (true, false) => a2 / psi_at_n + a2 * (-k * n / T::lit(4.0)).exp() * psi_at_n,
        (false, false) => a2 / n.min(psi_at_n),
    }
}

/// Result of fitting `ln ω̃(t) ≈ ln c + α ln t + δ t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: crate::scalar::Real"))]
pub struct FitReport<T> {
    pub params: GrowthParams<T>,
    /// RMS of the residuals of `ln ω̃`.
    pub residual_rms: T,
    pub sample_ts: Vec<T>,
    pub method: String,
}

/// Serialized form: `{c, alpha, delta, kappa, residual_rms, method}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReportJson {
    pub c: f64,
    pub alpha: f64,
    pub delta: f64,
    pub kappa: f64,
    pub residual_rms: f64,
    pub method: String,
}

impl<T: Real> FitReport<T> {
    pub fn to_json(&self) -> FitReportJson {
        FitReportJson {
            c: self.params.c.as_f64(),
            alpha: self.params.alpha.as_f64(),
            delta: self.params.delta.as_f64(),
            kappa: self.params.kappa.as_f64(),
            residual_rms: self.residual_rms.as_f64(),
            method: self.method.clone(),
        }
    }
}

pub const FIT_METHOD: &str = "ols-log-growth";

/// Minimum R² of the residual-decay regression for κ to be reported.
pub const KAPPA_MIN_R2: f64 = 0.9;

/// Default sample grid for [`fit_growth`]: the upper 70% of `[0, l_max]`.
pub const DEFAULT_FIT_LOWER_FRACTION: f64 = 0.3;
pub const DEFAULT_FIT_SAMPLES: usize = 2000;

pub fn default_fit_grid<T: Real>(l_max: T) -> Vec<T> {
    uniform_grid(T::lit(DEFAULT_FIT_LOWER_FRACTION) * l_max, l_max, DEFAULT_FIT_SAMPLES)
}

/// `count` evenly spaced points on `[lo, hi]`.
pub fn uniform_grid<T: Real>(lo: T, hi: T, count: usize) -> Vec<T> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / T::from_usize_lossy(count - 1);
            (0..count).map(|i| lo + step * T::from_usize_lossy(i)).collect()
        }
    }
}

/// Unweighted least-squares fit of the growth constants on the given
/// sample times. `κ` is estimated from the decay of the relative
/// residuals and reported as `0` unless that regression has
/// `R² >= 0.9` with a negative slope.
pub fn fit_growth<T: Real>(spectrum: &LengthSpectrum<T>, t_samples: &[T]) -> Result<FitReport<T>> {
    if t_samples.len() < 8 {
        return Err(Error::InvalidParameter(format!(
            "need at least 8 sample times, got {}",
            t_samples.len()
        )));
    }
    let l_max = spectrum.l_max();
    let (lo, hi) = t_samples
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &t| {
            (lo.min(t), hi.max(t))
        });
    if !(lo > T::zero()) {
        return Err(Error::InvalidParameter(format!("sample time {lo} must be positive")));
    }
    let mut ln_growth = Vec::with_capacity(t_samples.len());
    for &t in t_samples {
        let g = spectrum.growth(t)?;
        if !(g > T::zero()) {
            return Err(Error::InvalidParameter(format!("growth at t = {t} is zero")));
        }
        ln_growth.push(g.ln());
    }
    if hi - lo < T::lit(0.3) * l_max {
        // Identical samples are a rank problem rather than a coverage one.
        if hi == lo {
            return Err(Error::DegenerateFit("all sample times are equal".into()));
        }
        return Err(Error::InvalidParameter(format!(
            "samples span [{lo}, {hi}], less than 30% of [0, {l_max}]"
        )));
    }

    let ones = vec![T::one(); t_samples.len()];
    let ln_t: Vec<T> = t_samples.iter().map(|t| t.ln()).collect();
    let beta = least_squares(&[ones, ln_t.clone(), t_samples.to_vec()], &ln_growth)?;
    let (ln_c, alpha, delta) = (beta[0], beta[1], beta[2]);
    let c = ln_c.exp();
    if !(delta > T::zero()) || !c.is_finite() || c <= T::zero() {
        return Err(Error::DegenerateFit(format!("fitted c = {c}, delta = {delta}")));
    }

    let residuals: Vec<T> = ln_growth
        .iter()
        .zip(&ln_t)
        .zip(t_samples)
        .map(|((&y, &lt), &t)| y - (ln_c + alpha * lt + delta * t))
        .collect();
    let residual_rms = (residuals.iter().map(|&r| r * r).sum::<T>() / T::from_usize_lossy(residuals.len())).sqrt();

    let kappa = estimate_kappa(t_samples, &residuals).unwrap_or_else(T::zero);
    Ok(FitReport {
        params: GrowthParams { c, alpha, delta, kappa },
        residual_rms,
        sample_ts: t_samples.to_vec(),
        method: FIT_METHOD.to_string(),
    })
}

fn estimate_kappa<T: Real>(ts: &[T], residuals: &[T]) -> Option<T> {
    let (xs, ys): (Vec<T>, Vec<T>) = ts
        .iter()
        .zip(residuals)
        .filter_map(|(&t, &r)| {
            let rel = r.exp_m1().abs();
            (rel > T::zero()).then(|| (t, rel.ln()))
        })
        .unzip();
    if xs.len() < 4 {
        return None;
    }
    let line = fit_line(&xs, &ys).ok()?;
    (line.slope < T::zero() && line.r_squared >= T::lit(KAPPA_MIN_R2)).then(|| -line.slope)
}

/// Fit of `y ≈ C e^{−λ x}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit<T> {
    pub c: T,
    pub lambda: T,
    pub r_squared: T,
}

/// Log-linear regression of positive values `ys` against `xs`.
pub fn fit_exponential_decay<T: Real>(xs: &[T], ys: &[T]) -> Result<DecayFit<T>> {
    if ys.iter().any(|&y| !(y > T::zero())) {
        return Err(Error::DegenerateFit("decay fit needs positive values".into()));
    }
    let ln_y: Vec<T> = ys.iter().map(|y| y.ln()).collect();
    let line = fit_line(xs, &ln_y)?;
    Ok(DecayFit {
        c: line.intercept.exp(),
        lambda: -line.slope,
        r_squared: line.r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_params(delta: f64) -> GrowthParams<f64> {
        GrowthParams::new(1.0, 0.0, delta, delta).unwrap()
    }

    #[test]
    fn g_limit_values() {
        let p = unit_params(1.0);
        assert_eq!(g_limit(&p, 0.0), 0.5);
        assert!((g_limit(&p, 2f64.ln()) - 0.25).abs() < 1e-15);
        assert_eq!(g_limit(&p, 1.3), g_limit(&p, -1.3));
    }

    #[test]
    fn g_mass_is_normalized() {
        for delta in [0.5, 1.0, 2.0] {
            assert!((g_mass::<f64>(delta, -f64::INFINITY, f64::INFINITY) - 1.0).abs() < 1e-15);
            let split = g_mass::<f64>(delta, -1.0, 0.0) + g_mass::<f64>(delta, 0.0, 2.0);
            assert!((g_mass::<f64>(delta, -1.0, 2.0) - split).abs() < 1e-15);
        }
    }

    #[test]
    fn growth_params_validation() {
        assert!(GrowthParams::new(0.0, 0.0, 1.0, 0.0).is_err());
        assert!(GrowthParams::new(1.0, 0.0, -1.0, 0.0).is_err());
        assert!(GrowthParams::new(1.0, 0.0, 1.0, -0.1).is_err());
        let p = GrowthParams::new(1.0, 0.0, 1.0, 3.0).unwrap();
        assert_eq!(p.kappa_eff(), 1.0);
    }

    #[test]
    fn geometric_sum_small_cases() {
        assert_eq!(geometric_sum::<f64>(0.0, 2.0, 3).unwrap(), 14.0);
        assert_eq!(geometric_sum::<f64>(1.0, 2.0, 2).unwrap(), 10.0);
        assert_eq!(geometric_sum::<f64>(-1.0, 3.0, 1).unwrap(), 3.0);
        assert!((geometric_sum_leading::<f64>(0.0, 2.0, 3).unwrap() - 16.0).abs() < 1e-12);
        assert!(geometric_sum::<f64>(0.0, 1.0, 3).is_err());
        assert!(geometric_sum::<f64>(0.0, 2.0, 0).is_err());
    }

    #[test]
    fn geometric_sum_overflow_and_log_variants() {
        assert!(matches!(geometric_sum::<f64>(0.0, 2.0, 2000), Err(Error::Overflow)));
        assert!(matches!(
            geometric_sum_leading::<f64>(0.0, 2.0, 2000),
            Err(Error::Overflow)
        ));
        // Σ_{k≤M} 2^k = 2^{M+1} − 2
        let ln = geometric_sum_ln::<f64>(0.0, 2.0, 2000).unwrap();
        assert!((ln - 2001.0 * 2f64.ln()).abs() < 1e-12);
        let ln_small = geometric_sum_ln::<f64>(1.5, 1.3, 40).unwrap();
        assert!((ln_small - geometric_sum::<f64>(1.5, 1.3, 40).unwrap().ln()).abs() < 1e-12);
    }

    #[test]
    fn geometric_sum_deviation_matches_direct_ratio() {
        for &(b, a, m) in &[(0.0, 2.0, 3u64), (2.0, 1.1, 50), (-1.5, 1.1, 200), (1.0, 3.0, 10)] {
            let direct = geometric_sum::<f64>(b, a, m).unwrap() / geometric_sum_leading::<f64>(b, a, m).unwrap() - 1.0;
            let stable = geometric_sum_deviation::<f64>(b, a, m).unwrap();
            assert!((direct - stable).abs() < 1e-12, "{b} {a} {m}: {direct} vs {stable}");
        }
        assert!((geometric_sum_deviation::<f64>(0.0, 2.0, 3).unwrap() + 0.125).abs() < 1e-15);
    }

    #[test]
    fn geometric_sum_error_shrinks_with_m() {
        let mut prev = f64::INFINITY;
        for m in [3u64, 10, 30, 100, 1000, 100_000] {
            let r = geometric_sum_deviation::<f64>(0.0, 2.0, m).unwrap().abs();
            assert!(r <= prev);
            prev = r;
        }
        // With a fixed base and b != 0 the deviation decays like 1/M.
        let r1 = geometric_sum_deviation::<f64>(2.0, 1.1, 10_000).unwrap().abs();
        let r2 = geometric_sum_deviation::<f64>(2.0, 1.1, 1_000_000).unwrap().abs();
        assert!((r1 / r2 - 100.0).abs() < 5.0);
    }

    #[test]
    fn geometric_sum_root_rate_along_shrinking_bases() {
        // a_M = 1 + M^{-1/2} makes 1/ln a_M grow like √M, and the deviation then
        // decays like 1/√M: a hundredfold M gives a tenfold smaller error.
        let r = |m: u64| {
            let a = 1.0 + (m as f64).powf(-0.5);
            geometric_sum_deviation::<f64>(2.0, a, m).unwrap().abs()
        };
        let ratio = r(10_000) / r(1_000_000);
        assert!((ratio - 10.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn slice_prediction_limits() {
        let p = unit_params(1.0);
        let big_eta = slice_prediction(&p, 10.0, 60.0).unwrap();
        assert!((big_eta / 10f64.exp() - 1.0).abs() < 1e-14);
        let direct = ((12f64).exp().floor() - (11.5f64).exp().floor()) / slice_prediction(&p, 12.0, 0.5).unwrap();
        assert!((direct - 1.0).abs() <= 0.01);
        assert!(slice_prediction(&p, 0.0, 1.0).is_err());
        assert!(slice_prediction(&p, 1.0, 0.0).is_err());
    }

    #[test]
    fn error_shape_cases() {
        let p = unit_params(1.0);
        let case = ErrorCase::new(true, true);
        let ratio = error_shape(case, &p, 24.0, 1.0, 1.0) / error_shape(case, &p, 12.0, 1.0, 1.0);
        assert!((ratio - (-1f64).exp()).abs() < 1e-12);
        let q = GrowthParams::new(1.0, -1.0, 1.0, 1.0).unwrap();
        assert_eq!(error_shape(ErrorCase::new(false, true), &q, 8.0, 2.0, 1.0), 0.5);
        assert_eq!(error_shape(ErrorCase::new(false, false), &q, 8.0, 2.0, 3.0), 4.0 / 3.0);
        assert_eq!(ErrorCase::classify(&q, false), ErrorCase::new(false, false));
    }

    #[test]
    fn decay_fit_recovers_rate() {
        let xs = [8.0f64, 10.0, 12.0, 14.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * (-0.4 * x).exp()).collect();
        let f = fit_exponential_decay::<f64>(&xs, &ys).unwrap();
        assert!((f.lambda - 0.4).abs() < 1e-12);
        assert!((f.c - 3.0).abs() < 1e-10);
        assert!(fit_exponential_decay::<f64>(&xs, &[1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn uniform_grid_endpoints() {
        let g = uniform_grid(8.0, 14.0, 13);
        assert_eq!(g.len(), 13);
        assert_eq!(g[0], 8.0);
        assert_eq!(g[12], 14.0);
        assert!(uniform_grid(1.0, 2.0, 0).is_empty());
    }
}
