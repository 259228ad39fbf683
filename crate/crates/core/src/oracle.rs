//! Direct all-pairs reference computations.
//!
//! Quadratic in the number of points; meant for cross-checking the fast
//! kernels on small inputs, both in tests and in the `verify` suites.

use crate::correlation::BinLayout;
use crate::scalar::{CompensatedSum, Real};

/// Bin counts of `ψ(y − x)` over all ordered pairs of `(lengths, weights)`.
pub fn pair_correlation_counts<T: Real>(
    lengths: &[T],
    weights: &[T],
    psi: T,
    layout: &BinLayout<T>,
    include_diagonal: bool,
) -> Vec<T> {
    let mut acc = vec![CompensatedSum::new(); layout.bins()];
    for (i, (&x, &wx)) in lengths.iter().zip(weights).enumerate() {
        for (j, (&y, &wy)) in lengths.iter().zip(weights).enumerate() {
            if i == j && !include_diagonal {
                continue;
            }
            if let Some(b) = layout.index_of(psi * (y - x)) {
                acc[b].add(wx * wy);
            }
        }
    }
    acc.into_iter().map(|a| a.value()).collect()
}

/// Weighted count of ordered pairs with `a <= y − x <= b`.
pub fn interval_pair_count<T: Real>(lengths: &[T], weights: &[T], a: T, b: T) -> T {
    let mut acc = CompensatedSum::new();
    for (&x, &wx) in lengths.iter().zip(weights) {
        for (&y, &wy) in lengths.iter().zip(weights) {
            let d = y - x;
            if a <= d && d <= b {
                acc.add(wx * wy);
            }
        }
    }
    acc.value()
}
