//! Weighted length spectra `(E, ω)` truncated to `[0, l_max]`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};

/// Lengths closer than this (absolute) are merged into one entry when a
/// spectrum is built from raw values.
pub const MERGE_TOLERANCE: f64 = 1e-12;

pub const CSV_HEADER: &str = "length,weight";

/// Sorted weighted multiset of nonnegative lengths.
///
/// Lengths are strictly increasing; repeated values are represented by a
/// single entry whose weight is the multiplicity. Weight prefix sums are
/// precomputed with compensated summation so that growth queries and the
/// pair kernels are `O(log n)` / `O(1)` per lookup.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthSpectrum<T> {
    lengths: Vec<T>,
    weights: Vec<T>,
    /// `prefix[i]` is the total weight of the first `i` entries.
    prefix: Vec<T>,
    l_max: T,
    source_tag: String,
}

impl<T: Real> LengthSpectrum<T> {
    /// Builds a spectrum from already sorted, distinct lengths.
    pub fn from_sorted(lengths: Vec<T>, weights: Vec<T>, l_max: T, source_tag: impl Into<String>) -> Result<Self> {
        if lengths.len() != weights.len() {
            return Err(Error::InvalidSpectrum(format!(
                "{} lengths but {} weights",
                lengths.len(),
                weights.len()
            )));
        }
        if !l_max.is_finite() || l_max < T::zero() {
            return Err(Error::InvalidSpectrum(format!(
                "l_max = {l_max} is not a finite nonnegative number"
            )));
        }
        for (i, (&x, &w)) in lengths.iter().zip(&weights).enumerate() {
            if !x.is_finite() || x < T::zero() || x > l_max {
                return Err(Error::InvalidSpectrum(format!(
                    "length {x} at row {i} outside [0, {l_max}]"
                )));
            }
            if !w.is_finite() || w <= T::zero() {
                return Err(Error::InvalidSpectrum(format!("weight {w} at row {i} is not positive")));
            }
            if i > 0 && lengths[i - 1] >= x {
                return Err(Error::InvalidSpectrum(format!(
                    "lengths not strictly increasing at row {i} ({} then {x})",
                    lengths[i - 1]
                )));
            }
        }
        let prefix = prefix_sums(&weights);
        Ok(Self {
            lengths,
            weights,
            prefix,
            l_max,
            source_tag: source_tag.into(),
        })
    }

    /// Builds a spectrum from unsorted `(length, weight)` pairs, merging
    /// lengths equal within [`MERGE_TOLERANCE`] and summing their weights.
    pub fn from_raw<I>(pairs: I, l_max: T, source_tag: impl Into<String>) -> Result<Self>
    where
        I: IntoIterator<Item = (T, T)>,
    {
        let mut raw: Vec<(T, T)> = pairs.into_iter().collect();
        if raw.iter().any(|(x, _)| x.is_nan()) {
            return Err(Error::InvalidSpectrum("NaN length".into()));
        }
        raw.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("no NaN"));
        let tol = T::lit(MERGE_TOLERANCE);
        let mut lengths: Vec<T> = Vec::with_capacity(raw.len());
        let mut weights: Vec<CompensatedSum<T>> = Vec::with_capacity(raw.len());
        for (x, w) in raw {
            match lengths.last() {
                Some(&head) if x - head <= tol => weights.last_mut().expect("paired").add(w),
                _ => {
                    lengths.push(x);
                    let mut acc = CompensatedSum::new();
                    acc.add(w);
                    weights.push(acc);
                }
            }
        }
        let weights = weights.into_iter().map(|w| w.value()).collect();
        Self::from_sorted(lengths, weights, l_max, source_tag)
    }

    /// Unit-weight spectrum from raw lengths (multiplicities arise from merging).
    pub fn from_lengths<I>(lengths: I, l_max: T, source_tag: impl Into<String>) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
    {
        Self::from_raw(lengths.into_iter().map(|x| (x, T::one())), l_max, source_tag)
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn lengths(&self) -> &[T] {
        &self.lengths
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Cumulative weights; `prefix_weights()[i]` is the weight of the first `i` entries.
    pub fn prefix_weights(&self) -> &[T] {
        &self.prefix
    }

    pub fn l_max(&self) -> T {
        self.l_max
    }

    pub fn source_tag(&self) -> &str {
        &self.source_tag
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.lengths.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn total_weight(&self) -> T {
        *self.prefix.last().expect("prefix has n + 1 entries")
    }

    /// Number of entries with length `<= t`.
    pub fn count_upto(&self, t: T) -> usize {
        self.lengths.partition_point(|&x| x <= t)
    }

    fn check_truncation(&self, t: T) -> Result<()> {
        if t > self.l_max {
            Err(Error::TruncationExceeded {
                t: t.as_f64(),
                l_max: self.l_max.as_f64(),
            })
        } else {
            Ok(())
        }
    }

    /// The growth function: total weight of elements `<= t`.
    pub fn growth(&self, t: T) -> Result<T> {
        self.check_truncation(t)?;
        Ok(self.prefix[self.count_upto(t)])
    }

    /// Weight in the band `(t - eta, t]`.
    pub fn slice(&self, t: T, eta: T) -> Result<T> {
        if !(eta > T::zero()) {
            return Err(Error::InvalidEta(eta.as_f64()));
        }
        self.check_truncation(t)?;
        let hi = self.count_upto(t);
        let lo = self.count_upto(t - eta);
        Ok(self.prefix[hi] - self.prefix[lo])
    }

    /// Sum of squared weights of elements `<= n`: the diagonal mass of the
    /// pair correlation measure at cut `n`.
    pub fn diagonal_mass(&self, n: T) -> Result<T> {
        self.check_truncation(n)?;
        let k = self.count_upto(n);
        Ok(self.weights[..k]
            .iter()
            .map(|&w| w * w)
            .collect::<CompensatedSum<T>>()
            .value())
    }

    /// The spectrum of elements `<= n`, with truncation bound `n`.
    pub fn restrict(&self, n: T) -> Result<Self> {
        self.check_truncation(n)?;
        let k = self.count_upto(n);
        Ok(Self {
            lengths: self.lengths[..k].to_vec(),
            weights: self.weights[..k].to_vec(),
            prefix: self.prefix[..=k].to_vec(),
            l_max: n,
            source_tag: self.source_tag.clone(),
        })
    }

    /// Writes the spectrum as `length,weight` CSV with LF line endings.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for (x, w) in self.iter() {
            writeln!(out, "{x},{w}")?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a `length,weight` CSV.
    ///
    /// The file format carries no truncation bound; `l_max` defaults to the
    /// largest length present.
    pub fn read_csv<R: BufRead>(reader: R, l_max: Option<T>, source_tag: impl Into<String>) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::Parse("empty file".into()))?;
        if header.trim_end_matches('\r') != CSV_HEADER {
            return Err(Error::Parse(format!(
                "expected header `{CSV_HEADER}`, found `{header}`"
            )));
        }
        let mut lengths = Vec::new();
        let mut weights = Vec::new();
        for (row, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let (x, w) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("row {}: expected two fields", row + 1)))?;
            lengths.push(parse_field::<T>(x, row)?);
            weights.push(parse_field::<T>(w, row)?);
        }
        let l_max = match l_max {
            Some(l) => l,
            None => lengths.last().copied().unwrap_or_else(T::zero),
        };
        Self::from_sorted(lengths, weights, l_max, source_tag)
    }
}

fn parse_field<T: Real>(s: &str, row: usize) -> Result<T> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("row {}: `{s}` is not a number", row + 1)))?;
    T::from_f64(v).ok_or_else(|| Error::Parse(format!("row {}: `{s}` out of range", row + 1)))
}

fn prefix_sums<T: Real>(weights: &[T]) -> Vec<T> {
    let mut prefix = Vec::with_capacity(weights.len() + 1);
    let mut acc = CompensatedSum::new();
    prefix.push(T::zero());
    for &w in weights {
        acc.add(w);
        prefix.push(acc.value());
    }
    prefix
}
