//! Critical exponent of a metric graph from its non-backtracking transfer operator.

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::MetricGraph;

/// Largest tolerance accepted by [`entropy`].
pub const ENTROPY_MAX_TOL: f64 = 1e-6;

const MAX_POWER_STEPS: usize = 200_000;

/// The dart-indexed matrix `M(s)` with `M(s)[d, d′] = e^{−s·len(d′)}` when
/// `d′` may follow `d` without backtracking, stored as successor lists.
#[derive(Clone, Debug)]
pub struct NonBacktrackingOperator<T> {
    successors: Vec<Vec<usize>>,
    lengths: Vec<T>,
}

impl<T: Real> NonBacktrackingOperator<T> {
    pub fn new(graph: &MetricGraph<T>) -> Self {
        Self {
            successors: (0..graph.darts().len())
                .map(|d| graph.successors(d).collect())
                .collect(),
            lengths: graph.darts().iter().map(|d| d.length).collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.lengths.len()
    }

    /// Dense `M(s)`, row-major.
    pub fn dense(&self, s: T) -> Vec<Vec<T>> {
        let n = self.dimension();
        let mut m = vec![vec![T::zero(); n]; n];
        for (d, succ) in self.successors.iter().enumerate() {
            for &e in succ {
                m[d][e] = (-s * self.lengths[e]).exp();
            }
        }
        m
    }

    /// Collatz-Wielandt bounds `lo <= ρ(M(s)) <= hi`, refined by power
    /// iteration on `M(s) + I` (aperiodic, same Perron vector) until
    /// `hi − lo <= tol` or the step limit is reached.
    pub fn spectral_radius_bounds(&self, s: T, tol: T) -> (T, T) {
        let n = self.dimension();
        let weights: Vec<T> = self.lengths.iter().map(|&l| (-s * l).exp()).collect();
        let mut x = vec![T::one(); n];
        let mut y = vec![T::zero(); n];
        let (mut lo, mut hi) = (T::zero(), T::infinity());
        for _ in 0..MAX_POWER_STEPS {
            for (d, succ) in self.successors.iter().enumerate() {
                y[d] = succ.iter().map(|&e| weights[e] * x[e]).sum::<T>();
            }
            let (mut step_lo, mut step_hi) = (T::infinity(), T::zero());
            for d in 0..n {
                let r = y[d] / x[d];
                step_lo = step_lo.min(r);
                step_hi = step_hi.max(r);
            }
            lo = lo.max(step_lo);
            hi = hi.min(step_hi);
            if hi - lo <= tol {
                break;
            }
            let norm = y.iter().zip(&x).map(|(&a, &b)| a + b).fold(T::zero(), T::max);
            for d in 0..n {
                x[d] = (y[d] + x[d]) / norm;
            }
        }
        (lo, hi)
    }
}

/// Bounds on the spectral radius of `M(s)` for `graph`.
pub fn spectral_radius_bounds<T: Real>(graph: &MetricGraph<T>, s: T, tol: T) -> (T, T) {
    NonBacktrackingOperator::new(graph).spectral_radius_bounds(s, tol)
}

/// The unique `s >= 0` with `ρ(M(s)) = 1`, found by bisection.
///
/// `ρ(M(s))` is strictly decreasing in `s`; its slope is bounded by the
/// longest dart, so the bracket is shrunk to `tol / (10 · max length)`,
/// which keeps `ρ` at the returned point within `tol` of 1.
pub fn entropy<T: Real>(graph: &MetricGraph<T>, tol: T) -> Result<T> {
    if !(tol > T::zero() && tol <= T::lit(ENTROPY_MAX_TOL)) {
        return Err(Error::InvalidParameter(format!(
            "tolerance {tol} not in (0, {ENTROPY_MAX_TOL}]"
        )));
    }
    let op = NonBacktrackingOperator::new(graph);
    let inner = tol / T::lit(10.0);
    let (_, rho0_hi) = op.spectral_radius_bounds(T::zero(), inner);
    if rho0_hi <= T::one() + inner {
        return Err(Error::NoGrowth { rho0: rho0_hi.as_f64() });
    }
    let max_out = (0..graph.vertex_count()).map(|v| graph.degree(v)).max().unwrap_or(1);
    let mut lo = T::zero();
    let mut hi = T::from_usize_lossy(max_out).ln() / graph.min_length() + T::one();
    let width = tol / (T::lit(10.0) * graph.max_length().max(T::one()));
    while hi - lo > width {
        let mid = lo + (hi - lo) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let (rlo, rhi) = op.spectral_radius_bounds(mid, inner);
        if rlo > T::one() {
            lo = mid;
        } else if rhi < T::one() {
            hi = mid;
        } else {
            return Ok(mid);
        }
    }
    Ok(lo + (hi - lo) / T::lit(2.0))
}

#[cfg(test)]
mod tests {
    use super::super::tests::theta;
    use super::*;

    #[test]
    fn unit_roses() {
        for r in 2..=5usize {
            let g = MetricGraph::rose(&vec![1.0; r]).unwrap();
            let s = entropy(&g, 1e-11).unwrap();
            assert!((s - ((2 * r - 1) as f64).ln()).abs() < 1e-9, "r = {r}: {s}");
        }
    }

    #[test]
    fn scaled_rose() {
        // Every length doubled halves the exponent.
        let g = MetricGraph::rose(&[2.0, 2.0]).unwrap();
        let s = entropy(&g, 1e-11).unwrap();
        assert!((s - 3f64.ln() / 2.0).abs() < 1e-9);
    }

    #[test]
    fn self_consistency() {
        let tol = 1e-8;
        for g in [
            MetricGraph::rose(&[1.0, 2f64.sqrt()]).unwrap(),
            MetricGraph::rose(&[0.3, 1.7, 2.9]).unwrap(),
            theta([1.0, 3f64.sqrt(), 2.5]),
        ] {
            let s = entropy(&g, tol).unwrap();
            let (lo, hi) = spectral_radius_bounds(&g, s, tol / 10.0);
            assert!(lo >= 1.0 - tol && hi <= 1.0 + tol, "{lo} {hi}");
        }
    }

    #[test]
    fn theta_graph_unit_lengths() {
        // Two vertices of degree 3: every dart has two successors, so ρ(M(s)) = 2e^{-s}.
        let s = entropy(&theta([1.0, 1.0, 1.0]), 1e-11).unwrap();
        assert!((s - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn circle_has_no_growth() {
        let g = MetricGraph::rose(&[1.0]).unwrap();
        assert!(matches!(entropy(&g, 1e-8), Err(Error::NoGrowth { .. })));
    }

    #[test]
    fn tolerance_is_checked() {
        let g = MetricGraph::rose(&[1.0, 1.0]).unwrap();
        assert!(entropy(&g, 1e-3).is_err());
        assert!(entropy(&g, 0.0).is_err());
    }

    #[test]
    fn dense_matrix_row_sums() {
        let g = MetricGraph::rose(&[1.0, 1.0]).unwrap();
        let m = NonBacktrackingOperator::new(&g).dense(0.0);
        for row in &m {
            assert_eq!(row.iter().sum::<f64>(), 3.0);
        }
    }
}
