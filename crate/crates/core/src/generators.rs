//! Deterministic spectra whose counting function is known in closed form.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::GrowthParams;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectrum::LengthSpectrum;

/// Default cap on the number of generated points.
pub const DEFAULT_POINT_BUDGET: u64 = 100_000_000;

/// Bisection stops once the bracket is this narrow.
const ROOT_TOLERANCE: f64 = 1e-12;

/// Offset past the minimum of `F` when `α < 0`.
const ARGMIN_MARGIN: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
#[serde(bound(deserialize = "T: crate::scalar::Real"))]
pub enum SyntheticMode<T> {
    InverseCounting,
    /// Each point moves forward by a uniform fraction `< amplitude` of the gap to its successor.
    Jittered {
        seed: u64,
        amplitude: T,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: crate::scalar::Real"))]
pub struct SyntheticSpec<T> {
    pub params: GrowthParams<T>,
    pub l_max: T,
    pub mode: SyntheticMode<T>,
}

impl<T: Real> SyntheticSpec<T> {
    pub fn inverse_counting(params: GrowthParams<T>, l_max: T) -> Self {
        Self {
            params,
            l_max,
            mode: SyntheticMode::InverseCounting,
        }
    }

    pub fn jittered(params: GrowthParams<T>, l_max: T, seed: u64, amplitude: T) -> Self {
        Self {
            params,
            l_max,
            mode: SyntheticMode::Jittered { seed, amplitude },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.l_max > T::zero() && self.l_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "l_max = {} must be positive",
                self.l_max
            )));
        }
        if let SyntheticMode::Jittered { amplitude, .. } = self.mode {
            if !(amplitude >= T::zero() && amplitude < T::lit(0.5)) {
                return Err(Error::InvalidParameter(format!(
                    "jitter amplitude {amplitude} not in [0, 0.5)"
                )));
            }
        }
        Ok(())
    }

    /// Left end of the range on which `F(t) = c t^α e^{δt}` is increasing.
    pub fn t_start(&self) -> T {
        let p = &self.params;
        if p.alpha < T::zero() {
            -p.alpha / p.delta + T::lit(ARGMIN_MARGIN)
        } else {
            T::zero()
        }
    }
}

/// Generates the spectrum described by `spec` (either mode).
pub fn generate<T: Real>(spec: &SyntheticSpec<T>, budget: u64) -> Result<LengthSpectrum<T>> {
    match spec.mode {
        SyntheticMode::InverseCounting => synthetic_pa_budgeted(spec, budget),
        SyntheticMode::Jittered { .. } => jittered_budgeted(spec, budget),
    }
}

/// Points `x_k` with `F(x_k) = k`, `F(t) = c t^α e^{δt}`, so that the
/// counting function is `⌊F(t)⌋` on the increasing range of `F`.
///
/// The `k0 − 1` solutions that would lie before the start of that range
/// are collected into a single entry at its left end; every other entry
/// has unit weight.
pub fn synthetic_pa<T: Real>(spec: &SyntheticSpec<T>) -> Result<LengthSpectrum<T>> {
    synthetic_pa_budgeted(spec, DEFAULT_POINT_BUDGET)
}

pub fn synthetic_pa_budgeted<T: Real>(spec: &SyntheticSpec<T>, budget: u64) -> Result<LengthSpectrum<T>> {
    spec.validate()?;
    let p = spec.params;
    let t_lo = spec.t_start();
    let l_max = spec.l_max;
    if t_lo >= l_max {
        return Err(Error::NonMonotoneF {
            t_min: t_lo.as_f64(),
            l_max: l_max.as_f64(),
        });
    }
    let f_lo = p.counting(t_lo);
    let f_hi = p.counting(l_max);
    if !(f_hi > f_lo) || !f_hi.is_finite() {
        return Err(Error::NonMonotoneF {
            t_min: t_lo.as_f64(),
            l_max: l_max.as_f64(),
        });
    }
    if f_hi.as_f64() > budget as f64 {
        return Err(Error::BudgetExceeded { limit: budget });
    }
    let k0 = f_lo.ceil().max(T::one()).to_u64().expect("bounded by budget");
    let k_max = f_hi.floor().to_u64().expect("bounded by budget");

    let mut points: Vec<(T, T)> = (k0..=k_max)
        .into_par_iter()
        .map(|k| {
            let target = T::from_u64(k).expect("bounded by budget").ln();
            (invert_ln_counting(&p, target, t_lo, l_max), T::one())
        })
        .collect();
    if k0 > 1 {
        points.push((t_lo, T::from_u64(k0 - 1).expect("bounded")));
    }
    LengthSpectrum::from_raw(
        points,
        l_max,
        format!("synthetic_pa(c={}, alpha={}, delta={})", p.c, p.alpha, p.delta),
    )
}

/// Root of `ln F(x) = target` in `[lo, hi]`, to `ROOT_TOLERANCE`.
///
/// Safeguarded Newton: the bracket shrinks every step and a bisection step
/// replaces any Newton step that leaves it.
fn invert_ln_counting<T: Real>(p: &GrowthParams<T>, target: T, mut lo: T, mut hi: T) -> T {
    if p.ln_counting(lo) >= target {
        return lo;
    }
    let tol = T::lit(ROOT_TOLERANCE);
    let two = T::lit(2.0);
    let guess = ((target - p.c.ln()) / p.delta).max(lo).min(hi);
    let mut x = if guess > lo && guess < hi {
        guess
    } else {
        lo + (hi - lo) / two
    };
    for _ in 0..200 {
        let f = p.ln_counting(x) - target;
        if f >= T::zero() {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= tol {
            break;
        }
        let slope = p.alpha / x + p.delta;
        let newton = x - f / slope;
        if slope > T::zero() && (newton - x).abs() <= tol / T::lit(16.0) {
            return if f >= T::zero() { x } else { newton.min(hi) };
        }
        let next = if slope > T::zero() && newton > lo && newton < hi {
            newton
        } else {
            lo + (hi - lo) / two
        };
        if next <= lo || next >= hi {
            break;
        }
        x = next;
    }
    x
}

/// `{ln n : 1 <= n <= e^{l_max}}` with unit weights.
pub fn log_integers<T: Real>(l_max: T) -> Result<LengthSpectrum<T>> {
    log_integers_budgeted(l_max, DEFAULT_POINT_BUDGET)
}

pub fn log_integers_budgeted<T: Real>(l_max: T, budget: u64) -> Result<LengthSpectrum<T>> {
    if !(l_max >= T::zero() && l_max.is_finite()) {
        return Err(Error::InvalidParameter(format!("l_max = {l_max} must be >= 0")));
    }
    let top = l_max.exp().floor();
    if top.as_f64() > budget as f64 {
        return Err(Error::BudgetExceeded { limit: budget });
    }
    let top = top.to_u64().expect("bounded by budget");
    let lengths: Vec<T> = (1..=top)
        .map(|n| T::from_u64(n).expect("bounded").ln())
        .filter(|&x| x <= l_max)
        .collect();
    let weights = vec![T::one(); lengths.len()];
    LengthSpectrum::from_sorted(lengths, weights, l_max, "log_integers")
}

/// Inverse-counting points, each pushed forward by a seeded uniform
/// fraction (below `amplitude`) of the gap to the next point. The last
/// point uses the gap to `l_max`. The folded entry at the start of the
/// range stays in place.
pub fn jittered<T: Real>(spec: &SyntheticSpec<T>) -> Result<LengthSpectrum<T>> {
    jittered_budgeted(spec, DEFAULT_POINT_BUDGET)
}

pub fn jittered_budgeted<T: Real>(spec: &SyntheticSpec<T>, budget: u64) -> Result<LengthSpectrum<T>> {
    let SyntheticMode::Jittered { seed, amplitude } = spec.mode else {
        return Err(Error::InvalidParameter(
            "jittered generator needs a jittered spec".into(),
        ));
    };
    spec.validate()?;
    let base_spec = SyntheticSpec::inverse_counting(spec.params, spec.l_max);
    let base = synthetic_pa_budgeted(&base_spec, budget)?;
    if amplitude == T::zero() {
        return Ok(base);
    }
    let xs = base.lengths();
    let folded = base.weights().first().is_some_and(|&w| w > T::one());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let moved: Vec<T> = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let next = xs.get(i + 1).copied().unwrap_or(spec.l_max);
            let u = T::lit(rng.gen::<f64>());
            if i == 0 && folded {
                x
            } else {
                x + u * amplitude * (next - x)
            }
        })
        .collect();
    LengthSpectrum::from_sorted(
        moved,
        base.weights().to_vec(),
        spec.l_max,
        format!("jittered(seed={seed}, amplitude={amplitude})"),
    )
}
