//! Finite metric graphs presented by darts (directed half-edges).

mod entropy;
mod geodesics;

pub use entropy::{entropy, spectral_radius_bounds, NonBacktrackingOperator, ENTROPY_MAX_TOL};
pub use geodesics::{
    canonical_rotation, closed_geodesic_classes, enumerate_closed_geodesics, enumerate_orbit_distances,
    enumerate_up_to_count, is_lyndon, minimal_period, truncate_to_weight, GeodesicClass, SpectrumKind,
    DEFAULT_CLASS_BUDGET,
};

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dart<T> {
    pub origin: usize,
    pub terminus: usize,
    pub length: T,
    pub reversal: usize,
}

/// A finite connected metric graph. Every vertex has degree at least 2
/// (at least 3 unless degree-2 vertices are explicitly allowed), and dart
/// reversal is a fixed-point-free involution preserving lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricGraph<T> {
    vertices: usize,
    darts: Vec<Dart<T>>,
    allow_degree_two: bool,
    outgoing: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DartJson {
    pub from: usize,
    pub to: usize,
    pub length: f64,
    pub reversal_index: usize,
}

/// `{vertices, darts: [{from, to, length, reversal_index}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: usize,
    pub darts: Vec<DartJson>,
    #[serde(default)]
    pub allow_degree_two: bool,
}

impl<T: Real> MetricGraph<T> {
    pub fn new(vertices: usize, darts: Vec<Dart<T>>, allow_degree_two: bool) -> Result<Self> {
        let outgoing = validate(vertices, &darts, allow_degree_two)?;
        Ok(Self {
            vertices,
            darts,
            allow_degree_two,
            outgoing,
        })
    }

    /// One vertex with a loop of each given length. A single petal is a
    /// circle, which is admitted with the degree-2 flag.
    pub fn rose(lengths: &[T]) -> Result<Self> {
        let darts = lengths
            .iter()
            .enumerate()
            .flat_map(|(i, &length)| {
                [
                    Dart {
                        origin: 0,
                        terminus: 0,
                        length,
                        reversal: 2 * i + 1,
                    },
                    Dart {
                        origin: 0,
                        terminus: 0,
                        length,
                        reversal: 2 * i,
                    },
                ]
            })
            .collect();
        Self::new(1, darts, lengths.len() == 1)
    }

    pub fn from_json(json: &GraphJson) -> Result<Self> {
        let darts = json
            .darts
            .iter()
            .map(|d| {
                Ok(Dart {
                    origin: d.from,
                    terminus: d.to,
                    length: T::from_f64(d.length)
                        .ok_or_else(|| Error::InvalidGraph(format!("length {} not representable", d.length)))?,
                    reversal: d.reversal_index,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(json.vertices, darts, json.allow_degree_two)
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            vertices: self.vertices,
            darts: self
                .darts
                .iter()
                .map(|d| DartJson {
                    from: d.origin,
                    to: d.terminus,
                    length: d.length.as_f64(),
                    reversal_index: d.reversal,
                })
                .collect(),
            allow_degree_two: self.allow_degree_two,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn darts(&self) -> &[Dart<T>] {
        &self.darts
    }

    pub fn dart(&self, d: usize) -> &Dart<T> {
        &self.darts[d]
    }

    pub fn outgoing(&self, v: usize) -> &[usize] {
        &self.outgoing[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.outgoing[v].len()
    }

    /// Darts that may follow `d` on a non-backtracking path.
    pub fn successors(&self, d: usize) -> impl Iterator<Item = usize> + '_ {
        let rev = self.darts[d].reversal;
        self.outgoing[self.darts[d].terminus]
            .iter()
            .copied()
            .filter(move |&e| e != rev)
    }

    pub fn min_length(&self) -> T {
        self.darts.iter().map(|d| d.length).fold(T::infinity(), T::min)
    }

    pub fn max_length(&self) -> T {
        self.darts.iter().map(|d| d.length).fold(T::zero(), T::max)
    }

    /// Same graph with a different length on the edge carrying dart `d`.
    pub fn with_edge_length(&self, d: usize, length: T) -> Result<Self> {
        let mut darts = self.darts.clone();
        let r = darts[d].reversal;
        darts[d].length = length;
        darts[r].length = length;
        Self::new(self.vertices, darts, self.allow_degree_two)
    }

    /// True when every edge length is a rational multiple `p/q` (`q <= 1000`)
    /// of the first one, up to relative error `tol`.
    pub fn lengths_commensurable(&self, tol: T) -> bool {
        let base = self.darts[0].length;
        self.darts.iter().all(|d| {
            let r = d.length / base;
            (1..=1000).any(|q| {
                let q = T::from_usize_lossy(q);
                let rq = r * q;
                (rq - rq.round()).abs() <= tol * rq.max(T::one())
            })
        })
    }

    /// Merges chains through degree-2 vertices into single darts with
    /// summed lengths. Vertices in `keep` survive even at degree 2, and a
    /// component that is a bare circle is left alone. Returns the new graph
    /// and the new index of every surviving old vertex.
    pub fn collapse_degree_two(&self, keep: Option<usize>) -> (Self, Vec<Option<usize>>) {
        let mut darts: Vec<Option<Dart<T>>> = self.darts.iter().copied().map(Some).collect();
        let mut alive_vertex = vec![true; self.vertices];
        loop {
            let mut out = vec![Vec::new(); self.vertices];
            for (i, d) in darts.iter().enumerate() {
                if let Some(d) = d {
                    out[d.origin].push(i);
                }
            }
            let target = (0..self.vertices).find(|&v| {
                alive_vertex[v] && Some(v) != keep && out[v].len() == 2 && {
                    let (a, b) = (out[v][0], out[v][1]);
                    darts[a].expect("alive").reversal != b
                }
            });
            let Some(v) = target else { break };
            let (d1, d2) = (out[v][0], out[v][1]);
            let a = darts[d1].expect("alive");
            let b = darts[d2].expect("alive");
            let (r1, r2) = (a.reversal, b.reversal);
            let length = a.length + b.length;
            let f = darts.len();
            let g = f + 1;
            // f runs u1 -> v -> u2 along rev(d1), d2; g is its reverse.
            darts.push(Some(Dart {
                origin: a.terminus,
                terminus: b.terminus,
                length,
                reversal: g,
            }));
            darts.push(Some(Dart {
                origin: b.terminus,
                terminus: a.terminus,
                length,
                reversal: f,
            }));
            for i in [d1, d2, r1, r2] {
                darts[i] = None;
            }
            alive_vertex[v] = false;
        }

        let mut vertex_map = vec![None; self.vertices];
        let mut next = 0;
        for v in 0..self.vertices {
            if alive_vertex[v] {
                vertex_map[v] = Some(next);
                next += 1;
            }
        }
        let mut dart_map = vec![usize::MAX; darts.len()];
        let mut k = 0;
        for (i, d) in darts.iter().enumerate() {
            if d.is_some() {
                dart_map[i] = k;
                k += 1;
            }
        }
        let new_darts: Vec<Dart<T>> = darts
            .iter()
            .flatten()
            .map(|d| Dart {
                origin: vertex_map[d.origin].expect("endpoint alive"),
                terminus: vertex_map[d.terminus].expect("endpoint alive"),
                length: d.length,
                reversal: dart_map[d.reversal],
            })
            .collect();
        let graph = Self::new(next, new_darts, self.allow_degree_two).expect("collapse preserves validity");
        (graph, vertex_map)
    }
}

fn validate<T: Real>(vertices: usize, darts: &[Dart<T>], allow_degree_two: bool) -> Result<Vec<Vec<usize>>> {
    if vertices == 0 {
        return Err(Error::InvalidGraph("graph has no vertices".into()));
    }
    if darts.is_empty() {
        return Err(Error::InvalidGraph("graph has no darts".into()));
    }
    let n = darts.len();
    for (i, d) in darts.iter().enumerate() {
        if d.origin >= vertices || d.terminus >= vertices {
            return Err(Error::InvalidGraph(format!("dart {i}: endpoint out of range")));
        }
        if !(d.length > T::zero() && d.length.is_finite()) {
            return Err(Error::InvalidGraph(format!(
                "dart {i}: length must be positive and finite"
            )));
        }
        if d.reversal >= n {
            return Err(Error::InvalidGraph(format!("dart {i}: reversal index out of range")));
        }
        let r = &darts[d.reversal];
        if d.reversal == i {
            return Err(Error::InvalidGraph(format!("dart {i}: reversal has a fixed point")));
        }
        if r.reversal != i {
            return Err(Error::InvalidGraph(format!("dart {i}: reversal is not an involution")));
        }
        if r.origin != d.terminus || r.terminus != d.origin {
            return Err(Error::InvalidGraph(format!(
                "dart {i}: reversal does not swap endpoints"
            )));
        }
        if (r.length - d.length).abs() > T::lit(1e-12) * d.length.max(T::one()) {
            return Err(Error::InvalidGraph(format!(
                "dart {i}: reversal has a different length"
            )));
        }
    }
    let mut outgoing = vec![Vec::new(); vertices];
    for (i, d) in darts.iter().enumerate() {
        outgoing[d.origin].push(i);
    }
    let min_degree = if allow_degree_two { 2 } else { 3 };
    for (v, out) in outgoing.iter().enumerate() {
        if out.len() < min_degree {
            return Err(Error::InvalidGraph(format!(
                "vertex {v}: degree {} below the minimum {min_degree}",
                out.len()
            )));
        }
    }
    let mut seen = vec![false; vertices];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &d in &outgoing[v] {
            let w = darts[d].terminus;
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    if let Some(v) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidGraph(format!(
            "graph is not connected (vertex {v} unreachable)"
        )));
    }
    Ok(outgoing)
}
