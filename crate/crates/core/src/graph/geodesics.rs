//! Enumeration of closed geodesics and orbit distances on metric graphs.
//!
//! Closed geodesics are cyclic non-backtracking dart sequences. Each
//! oriented class is emitted once, from its lexicographically least
//! rotation; for primitive classes that rotation is a Lyndon word, so the
//! depth-first search keeps Duval's prefix state and prunes every prefix
//! that cannot extend to a Lyndon word.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectrum::LengthSpectrum;

use super::{entropy, MetricGraph};

/// Default cap on emitted classes / loops.
pub const DEFAULT_CLASS_BUDGET: u64 = 10_000_000;

/// A closed geodesic in canonical (least-rotation) form.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicClass<T> {
    pub dart_cycle: Vec<usize>,
    pub length: T,
    pub primitive: bool,
}

impl<T: Real> GeodesicClass<T> {
    /// Canonicalizes a closed non-backtracking dart cycle.
    pub fn from_cycle(graph: &MetricGraph<T>, cycle: &[usize]) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::InvalidParameter("empty cycle".into()));
        }
        for (i, &d) in cycle.iter().enumerate() {
            let e = cycle[(i + 1) % cycle.len()];
            if graph.dart(d).terminus != graph.dart(e).origin {
                return Err(Error::InvalidParameter(format!(
                    "darts {d} and {e} are not consecutive"
                )));
            }
            if graph.dart(d).reversal == e {
                return Err(Error::InvalidParameter(format!("cycle backtracks at dart {d}")));
            }
        }
        let dart_cycle = canonical_rotation(cycle);
        let length = dart_cycle.iter().map(|&d| graph.dart(d).length).sum();
        Ok(Self {
            primitive: minimal_period(&dart_cycle) == dart_cycle.len(),
            dart_cycle,
            length,
        })
    }
}

/// Lexicographically least rotation.
pub fn canonical_rotation(word: &[usize]) -> Vec<usize> {
    let n = word.len();
    let best = (0..n)
        .min_by(|&a, &b| {
            (0..n)
                .map(|i| word[(a + i) % n].cmp(&word[(b + i) % n]))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    (0..n).map(|i| word[(best + i) % n]).collect()
}

/// Smallest `p` dividing `len` such that the word is a power of its first `p` letters.
pub fn minimal_period(word: &[usize]) -> usize {
    let n = word.len();
    (1..=n)
        .find(|&p| n.is_multiple_of(p) && (p..n).all(|i| word[i] == word[i - p]))
        .unwrap_or(n)
}

/// True when the word is strictly smaller than each of its proper rotations.
pub fn is_lyndon(word: &[usize]) -> bool {
    if word.is_empty() {
        return false;
    }
    let mut k = 0;
    for j in 1..word.len() {
        match word[k].cmp(&word[j]) {
            std::cmp::Ordering::Less => k = 0,
            std::cmp::Ordering::Equal => k += 1,
            std::cmp::Ordering::Greater => return false,
        }
    }
    k == 0
}

/// Which length spectrum of the graph to enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Primitive closed geodesics, oriented, with multiplicity.
    Geodesics,
    /// Lengths of reduced loops at a base vertex, plus the trivial loop.
    OrbitDistances { base: usize },
}

struct Budget {
    limit: u64,
    used: AtomicU64,
    tripped: AtomicBool,
}

impl Budget {
    fn new(limit: u64) -> Self {
        Self {
            limit,
            used: AtomicU64::new(0),
            tripped: AtomicBool::new(false),
        }
    }

    /// Returns false once the limit is exceeded.
    fn take(&self) -> bool {
        if self.used.fetch_add(1, Ordering::Relaxed) >= self.limit {
            self.tripped.store(true, Ordering::Relaxed);
            false
        } else {
            true
        }
    }

    fn tripped(&self) -> bool {
        self.tripped.load(Ordering::Relaxed)
    }
}

struct GeodesicSearch<'a, T> {
    graph: &'a MetricGraph<T>,
    l_max: T,
    start: usize,
    path: Vec<usize>,
    out: Vec<T>,
    cycles: Option<Vec<Vec<usize>>>,
    budget: &'a Budget,
}

impl<T: Real> GeodesicSearch<'_, T> {
    /// `duval_k` is Duval's comparison index for the current prefix.
    fn extend(&mut self, length: T, duval_k: usize) {
        if self.budget.tripped() {
            return;
        }
        let last = *self.path.last().expect("nonempty path");
        let g = self.graph;
        let first = g.dart(self.start);
        if duval_k == 0 && g.dart(last).terminus == first.origin && first.reversal != last {
            debug_assert!(is_lyndon(&self.path));
            if !self.budget.take() {
                return;
            }
            self.out.push(length);
            if let Some(cycles) = &mut self.cycles {
                cycles.push(self.path.clone());
            }
        }
        let j = self.path.len();
        for next in g.successors(last) {
            let next_len = length + g.dart(next).length;
            if next_len > self.l_max {
                continue;
            }
            let k = match self.path[duval_k].cmp(&next) {
                std::cmp::Ordering::Less => 0,
                std::cmp::Ordering::Equal => duval_k + 1,
                std::cmp::Ordering::Greater => continue,
            };
            debug_assert!(k < j + 1);
            self.path.push(next);
            self.extend(next_len, k);
            self.path.pop();
        }
    }
}

/// Lengths found from one start dart, and optionally their dart cycles.
type PerStart<T> = (Vec<T>, Option<Vec<Vec<usize>>>);

fn search_geodesics<T: Real>(g: &MetricGraph<T>, l_max: T, budget: u64, keep_cycles: bool) -> Result<Vec<PerStart<T>>> {
    let budget = Budget::new(budget);
    let per_start = (0..g.darts().len())
        .into_par_iter()
        .map(|start| {
            let len = g.dart(start).length;
            let mut search = GeodesicSearch {
                graph: g,
                l_max,
                start,
                path: vec![start],
                out: Vec::new(),
                cycles: keep_cycles.then(Vec::new),
                budget: &budget,
            };
            if len <= l_max {
                search.extend(len, 0);
            }
            (search.out, search.cycles)
        })
        .collect();
    if budget.tripped() {
        return Err(Error::BudgetExceeded { limit: budget.limit });
    }
    Ok(per_start)
}

/// Lengths of all primitive oriented closed geodesics of length `<= l_max`.
///
/// Degree-2 vertices are collapsed first. The weight of each length is the
/// number of classes with that length (lengths merged within `1e-12`).
pub fn enumerate_closed_geodesics<T: Real>(graph: &MetricGraph<T>, l_max: T, budget: u64) -> Result<LengthSpectrum<T>> {
    let (g, _) = graph.collapse_degree_two(None);
    let per_start = search_geodesics(&g, l_max, budget, false)?;
    LengthSpectrum::from_lengths(per_start.into_iter().flat_map(|(l, _)| l), l_max, "closed_geodesics")
}

/// The classes behind [`enumerate_closed_geodesics`], as dart cycles of
/// the returned graph (the input with degree-2 vertices collapsed).
pub fn closed_geodesic_classes<T: Real>(
    graph: &MetricGraph<T>,
    l_max: T,
    budget: u64,
) -> Result<(MetricGraph<T>, Vec<GeodesicClass<T>>)> {
    let (g, _) = graph.collapse_degree_two(None);
    let per_start = search_geodesics(&g, l_max, budget, true)?;
    let classes = per_start
        .into_iter()
        .flat_map(|(_, c)| c.unwrap_or_default())
        .map(|cycle| GeodesicClass::from_cycle(&g, &cycle))
        .collect::<Result<Vec<_>>>()?;
    Ok((g, classes))
}

struct LoopSearch<'a, T> {
    graph: &'a MetricGraph<T>,
    l_max: T,
    base: usize,
    out: Vec<T>,
    budget: &'a Budget,
}

impl<T: Real> LoopSearch<'_, T> {
    fn extend(&mut self, last: usize, length: T) {
        if self.budget.tripped() {
            return;
        }
        let g = self.graph;
        if g.dart(last).terminus == self.base {
            if !self.budget.take() {
                return;
            }
            self.out.push(length);
        }
        for next in g.successors(last) {
            let next_len = length + g.dart(next).length;
            if next_len <= self.l_max {
                self.extend(next, next_len);
            }
        }
    }
}

/// Lengths of all reduced loops at `base` of length `<= l_max`, together
/// with the trivial loop (length 0, weight 1). These are the distances
/// `d(x, γx)` from a lift `x` of `base` to its deck-group translates.
pub fn enumerate_orbit_distances<T: Real>(
    graph: &MetricGraph<T>,
    base: usize,
    l_max: T,
    budget: u64,
) -> Result<LengthSpectrum<T>> {
    if base >= graph.vertex_count() {
        return Err(Error::InvalidParameter(format!("base vertex {base} out of range")));
    }
    let (g, map) = graph.collapse_degree_two(Some(base));
    let base = map[base].expect("base vertex is kept");
    let budget = Budget::new(budget);
    let per_start: Vec<Vec<T>> = g
        .outgoing(base)
        .par_iter()
        .map(|&d| {
            let len = g.dart(d).length;
            if len > l_max {
                return Vec::new();
            }
            let mut search = LoopSearch {
                graph: &g,
                l_max,
                base,
                out: Vec::new(),
                budget: &budget,
            };
            search.extend(d, len);
            search.out
        })
        .collect();
    if budget.tripped() {
        return Err(Error::BudgetExceeded { limit: budget.limit });
    }
    let identity = std::iter::once((T::zero(), T::one()));
    let loops = per_start.into_iter().flatten().map(|x| (x, T::one()));
    LengthSpectrum::from_raw(identity.chain(loops), l_max, format!("orbit_distances(base={base})"))
}

/// Largest prefix of `spectrum` whose total weight is at most `max_weight`,
/// truncated at its last length.
pub fn truncate_to_weight<T: Real>(spectrum: &LengthSpectrum<T>, max_weight: T) -> Result<LengthSpectrum<T>> {
    let k = spectrum.prefix_weights().partition_point(|&w| w <= max_weight) - 1;
    if k == 0 {
        return Err(Error::InvalidParameter(format!(
            "first entry already exceeds weight {max_weight}"
        )));
    }
    spectrum.restrict(spectrum.lengths()[k - 1])
}

/// Enumerates the chosen spectrum to the largest `l_max` holding at most
/// `max_count` total weight. The cutoff is grown geometrically using the
/// graph's exponent, then the result is truncated exactly.
pub fn enumerate_up_to_count<T: Real>(
    graph: &MetricGraph<T>,
    kind: SpectrumKind,
    max_count: u64,
    budget: u64,
) -> Result<LengthSpectrum<T>> {
    let delta = entropy(graph, T::lit(1e-8))?;
    let target = T::from_u64(max_count).expect("count representable");
    let run = |l: T| match kind {
        SpectrumKind::Geodesics => enumerate_closed_geodesics(graph, l, budget),
        SpectrumKind::OrbitDistances { base } => enumerate_orbit_distances(graph, base, l, budget),
    };
    let mut l = target.ln() / delta;
    loop {
        let s = run(l)?;
        let total = s.total_weight();
        if total > target {
            return truncate_to_weight(&s, target);
        }
        let step = if total > T::one() {
            (target / total).ln() / delta
        } else {
            T::one() / delta
        };
        l += step.max(T::lit(0.25) / delta) + T::lit(0.1);
    }
}
