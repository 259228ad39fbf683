//! Empirical pair correlation measures and interval pair counts.
//!
//! The histogram kernel never enumerates pairs. For each left point `x` it
//! keeps one pointer per bin edge `e_k` at the first `y` with
//! `ψ(N)(y − x) >= e_k`; pointers only move forward as `x` grows, and the
//! mass of bin `j` is read off the weight prefix sums between pointers
//! `j` and `j + 1`. Total cost is `O(n log n + n·B)` for `B` bins.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};
use crate::scaling::ScalingSpec;
use crate::spectrum::LengthSpectrum;

/// Left points handled per parallel task. Fixed so that results do not
/// depend on the thread count.
const CHUNK: usize = 8192;

/// Half-open bins `[e_k, e_{k+1})` covering `[-A, A)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinLayout<T> {
    half_width: T,
    edges: Vec<T>,
}

impl<T: Real> BinLayout<T> {
    /// `2A / bin_width` must be an integer within `1e-9`.
    pub fn new(half_width: T, bin_width: T) -> Result<Self> {
        if !(half_width >= T::one()) || !half_width.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "window half-width {half_width} must be >= 1"
            )));
        }
        if !(bin_width > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "bin width {bin_width} must be positive"
            )));
        }
        let ratio = (T::lit(2.0) * half_width / bin_width).as_f64();
        let bins = ratio.round();
        if (ratio - bins).abs() > 1e-9 * ratio.max(1.0) || bins < 1.0 {
            return Err(Error::BadBins {
                window: half_width.as_f64(),
                bin_width: bin_width.as_f64(),
            });
        }
        let bins = bins as usize;
        let b = T::from_usize_lossy(bins);
        // e_k = A (2k - B) / B is exactly antisymmetric: e_{B-k} = -e_k.
        let edges = (0..=bins)
            .map(|k| {
                let m = 2 * k as i64 - bins as i64;
                half_width * T::from_i64(m).expect("small integer") / b
            })
            .collect();
        Ok(Self { half_width, edges })
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn bins(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    pub fn bin_width(&self) -> T {
        T::lit(2.0) * self.half_width / T::from_usize_lossy(self.bins())
    }

    pub fn center(&self, j: usize) -> T {
        (self.edges[j] + self.edges[j + 1]) / T::lit(2.0)
    }

    /// Bin containing `d`, if any.
    pub fn index_of(&self, d: T) -> Option<usize> {
        let k = self.edges.partition_point(|&e| e <= d);
        (k >= 1 && k <= self.bins()).then(|| k - 1)
    }

    pub fn zero_bin(&self) -> Option<usize> {
        self.index_of(T::zero())
    }

    /// Index of the bin mirrored through 0.
    pub fn mirror(&self, j: usize) -> usize {
        self.bins() - 1 - j
    }
}

/// Binned pair correlation measure on `[-A, A)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairCorrelationHistogram<T> {
    pub layout: BinLayout<T>,
    pub counts: Vec<T>,
    pub n_cut: T,
    pub psi_at_n: T,
    /// `ω̃(N)² / ψ(N)`.
    pub renorm: T,
    pub include_diagonal: bool,
    pub total_mass_in_window: T,
}

impl<T: Real> PairCorrelationHistogram<T> {
    pub fn window_a(&self) -> T {
        -self.layout.half_width()
    }

    pub fn window_b(&self) -> T {
        self.layout.half_width()
    }

    pub fn bin_width(&self) -> T {
        self.layout.bin_width()
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Empirical pair correlation density: `counts[j] / (ψ′(N) · h)`.
    pub fn renormalized_density(&self) -> Vec<(T, T)> {
        let scale = self.renorm * self.bin_width();
        (0..self.bins())
            .map(|j| {
                let d = if scale > T::zero() {
                    self.counts[j] / scale
                } else {
                    T::zero()
                };
                (self.layout.center(j), d)
            })
            .collect()
    }

    pub fn to_json(&self) -> HistogramJson {
        let bins = self
            .renormalized_density()
            .into_iter()
            .zip(&self.counts)
            .map(|((center, density), &count)| BinJson {
                center: center.as_f64(),
                count: count.as_f64(),
                density: density.as_f64(),
            })
            .collect();
        HistogramJson {
            window_a: self.window_a().as_f64(),
            window_b: self.window_b().as_f64(),
            bin_width: self.bin_width().as_f64(),
            n_cut: self.n_cut.as_f64(),
            psi_at_n: self.psi_at_n.as_f64(),
            renorm: self.renorm.as_f64(),
            include_diagonal: self.include_diagonal,
            bins,
        }
    }
}

/// Serialized histogram.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramJson {
    pub window_a: f64,
    pub window_b: f64,
    pub bin_width: f64,
    pub n_cut: f64,
    pub psi_at_n: f64,
    pub renorm: f64,
    pub include_diagonal: bool,
    pub bins: Vec<BinJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinJson {
    pub center: f64,
    pub count: f64,
    pub density: f64,
}

/// Computes the binned pair correlation measure of `F_N = {x <= n_cut}`
/// at scaling `ψ(n_cut)` on the window `[-A, A)`.
pub fn pair_correlation<T: Real>(
    spectrum: &LengthSpectrum<T>,
    n_cut: T,
    scaling: &ScalingSpec<T>,
    half_width: T,
    bin_width: T,
    include_diagonal: bool,
) -> Result<PairCorrelationHistogram<T>> {
    let growth = spectrum.growth(n_cut)?;
    let layout = BinLayout::new(half_width, bin_width)?;
    let psi = scaling.eval(n_cut)?;
    let n = spectrum.count_upto(n_cut);
    let xs = &spectrum.lengths()[..n];
    let ws = &spectrum.weights()[..n];
    let prefix = &spectrum.prefix_weights()[..=n];
    let edges = layout.edges();
    let bins = layout.bins();

    let partials: Vec<Vec<CompensatedSum<T>>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(n);
            let x0 = xs[start];
            let mut ptr: Vec<usize> = edges
                .iter()
                .map(|&e| xs.partition_point(|&y| psi * (y - x0) < e))
                .collect();
            let mut acc = vec![CompensatedSum::new(); bins];
            for i in start..end {
                let x = xs[i];
                for (p, &e) in ptr.iter_mut().zip(edges) {
                    while *p < n && psi * (xs[*p] - x) < e {
                        *p += 1;
                    }
                }
                let w = ws[i];
                for (j, a) in acc.iter_mut().enumerate() {
                    let mass = prefix[ptr[j + 1]] - prefix[ptr[j]];
                    if mass != T::zero() {
                        a.add(w * mass);
                    }
                }
            }
            acc
        })
        .collect();

    let mut counts: Vec<T> = (0..bins)
        .map(|j| {
            partials
                .iter()
                .map(|p| p[j].value())
                .collect::<CompensatedSum<T>>()
                .value()
        })
        .collect();

    if !include_diagonal {
        if let Some(z) = layout.zero_bin() {
            let diag = spectrum.diagonal_mass(n_cut)?;
            counts[z] = (counts[z] - diag).max(T::zero());
        }
    }

    let total_mass_in_window = counts.iter().copied().collect::<CompensatedSum<T>>().value();
    Ok(PairCorrelationHistogram {
        layout,
        counts,
        n_cut,
        psi_at_n: psi,
        renorm: growth * growth / psi,
        include_diagonal,
        total_mass_in_window,
    })
}

/// Weighted number of ordered pairs `x, y <= n_cut` with `a <= y − x <= b`.
pub fn interval_pair_count<T: Real>(spectrum: &LengthSpectrum<T>, n_cut: T, a: T, b: T) -> Result<T> {
    if !(a <= b) {
        return Err(Error::InvalidParameter(format!("empty interval [{a}, {b}]")));
    }
    spectrum.growth(n_cut)?;
    let n = spectrum.count_upto(n_cut);
    let xs = &spectrum.lengths()[..n];
    let ws = &spectrum.weights()[..n];
    let prefix = spectrum.prefix_weights();
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut total = CompensatedSum::new();
    for (&x, &w) in xs.iter().zip(ws) {
        while lo < n && xs[lo] - x < a {
            lo += 1;
        }
        while hi < n && xs[hi] - x <= b {
            hi += 1;
        }
        if hi > lo {
            total.add(w * (prefix[hi] - prefix[lo]));
        }
    }
    Ok(total.value())
}
