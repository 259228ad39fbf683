//! Randomized invariants shared by the property and acceptance targets.

#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::test_runner::{TestCaseError, TestRunner};

use paircorr::asymptotics::{error_shape, uniform_grid, ErrorCase};
use paircorr::correlation::BinLayout;
use paircorr::generators::{jittered, synthetic_pa};
use paircorr::graph::{
    canonical_rotation, closed_geodesic_classes, is_lyndon, minimal_period, spectral_radius_bounds,
    DEFAULT_CLASS_BUDGET,
};
use paircorr::{
    entropy, enumerate_closed_geodesics, fit_growth, g_limit, interval_pair_count, oracle, pair_correlation, Graph,
    Params, Scaling, Spectrum, SyntheticSpec,
};

pub const CASES: u32 = 1000;

pub type Outcome = Result<(), String>;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: CASES,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn spectrum_strategy(max_points: usize, integer_weights: bool) -> impl Strategy<Value = Spectrum> {
    prop::collection::vec((0.0..20.0f64, 1u32..6, 0.1..5.0f64), 1..max_points).prop_map(move |pts| {
        let pairs = pts
            .into_iter()
            .map(|(x, k, w)| (x, if integer_weights { k as f64 } else { w }));
        Spectrum::from_raw(pairs, 20.0, "random").unwrap()
    })
}

fn scaling_strategy() -> impl Strategy<Value = Scaling> {
    prop_oneof![
        Just(Scaling::unit()),
        (0.0..1.5f64).prop_map(|b| Scaling::power(b).unwrap())
    ]
}

/// Window half-width and a bin width dividing the full window evenly.
fn bins_strategy() -> impl Strategy<Value = (f64, f64)> {
    (1.0..8.0f64, 1usize..80).prop_map(|(a, k)| (a, 2.0 * a / k as f64))
}

/// Odd bin counts, so that one bin is centred on 0.
fn centred_bins_strategy() -> impl Strategy<Value = (f64, f64)> {
    (1.0..8.0f64, 0usize..40).prop_map(|(a, k)| (a, 2.0 * a / (2 * k + 1) as f64))
}

fn relative_close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0)
}

fn rose_strategy() -> impl Strategy<Value = Graph> {
    prop::collection::vec(0.5..2.0f64, 2..5).prop_map(|l| Graph::rose(&l).unwrap())
}

/// Runs `test` on `CASES` inputs drawn from `strategy`.
fn run<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Outcome
where
    S::Value: std::fmt::Debug,
{
    TestRunner::new(config())
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

pub type Invariant = (&'static str, fn() -> Outcome);

pub const ALL: &[Invariant] = &[
    ("kernel_matches_oracle", kernel_matches_oracle),
    ("reflection_symmetry", reflection_symmetry),
    ("bins_sum_to_interval_count", bins_sum_to_interval_count),
    ("counting_monotonicity", counting_monotonicity),
    (
        "interval_count_monotone_under_inclusion",
        interval_count_monotone_under_inclusion,
    ),
    ("truncation_coherence", truncation_coherence),
    ("pair_correlation_is_deterministic", pair_correlation_is_deterministic),
    ("spectrum_construction_invariants", spectrum_construction_invariants),
    ("g_limit_shape", g_limit_shape),
    ("error_shape_decreasing_in_n", error_shape_decreasing_in_n),
    ("canonical_rotation_idempotent", canonical_rotation_idempotent),
    ("generated_growth_within_two", generated_growth_within_two),
    ("generators_deterministic", generators_deterministic),
    ("fit_round_trip", fit_round_trip),
    (
        "geodesic_classes_are_primitive_reduced_and_canonical",
        geodesic_classes_are_primitive_reduced_and_canonical,
    ),
    (
        "entropy_self_consistent_and_decreasing",
        entropy_self_consistent_and_decreasing,
    ),
];

pub fn kernel_matches_oracle() -> Outcome {
    run(
        (
            spectrum_strategy(300, false),
            scaling_strategy(),
            bins_strategy(),
            0.0..20.0f64,
            any::<bool>(),
        ),
        |(s, scaling, (a, h), n_cut, diag)| {
            let hist = pair_correlation(&s, n_cut, &scaling, a, h, diag).unwrap();
            let r = s.restrict(n_cut).unwrap();
            let layout = BinLayout::new(a, h).unwrap();
            let psi = scaling.eval(n_cut).unwrap();
            let expected = oracle::pair_correlation_counts(r.lengths(), r.weights(), psi, &layout, diag);
            for (got, want) in hist.counts.iter().zip(&expected) {
                prop_assert!(relative_close(*got, *want, 1e-9), "{got} vs {want}");
            }
            Ok(())
        },
    )
}

pub fn reflection_symmetry() -> Outcome {
    run(
        (
            spectrum_strategy(300, true),
            scaling_strategy(),
            centred_bins_strategy(),
            bins_strategy(),
        ),
        |(s, scaling, (a, h), (a2, h2))| {
            // With an even bin count 0 is an edge and the diagonal lands right of it.
            for (a, h, diag) in [(a, h, true), (a2, h2, false)] {
                let hist = pair_correlation(&s, 20.0, &scaling, a, h, diag).unwrap();
                let layout = BinLayout::new(a, h).unwrap();
                for j in 0..layout.bins() {
                    let (x, y) = (hist.counts[j], hist.counts[layout.mirror(j)]);
                    prop_assert!(relative_close(x, y, 1e-12), "bin {j}: {x} vs {y}");
                }
            }
            Ok(())
        },
    )
}

pub fn bins_sum_to_interval_count() -> Outcome {
    run(
        (spectrum_strategy(300, false), bins_strategy(), 0.0..20.0f64),
        |(s, (a, h), n_cut)| {
            let r = s.restrict(n_cut).unwrap();
            let xs = r.lengths();
            let on_edge = xs.iter().any(|x| xs.iter().any(|y| ((y - x).abs() - a).abs() < 1e-9));
            prop_assume!(!on_edge);
            let hist = pair_correlation(&s, n_cut, &Scaling::unit(), a, h, true).unwrap();
            let total: f64 = hist.counts.iter().sum();
            let closed = interval_pair_count(&s, n_cut, -a, a).unwrap();
            prop_assert!(relative_close(total, closed, 1e-9), "{total} vs {closed}");
            Ok(())
        },
    )
}

pub fn counting_monotonicity() -> Outcome {
    run(
        (
            spectrum_strategy(300, false),
            0.0..20.0f64,
            0.0..20.0f64,
            0.001..10.0f64,
        ),
        |(s, t1, t2, eta)| {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            prop_assert!(s.growth(lo).unwrap() <= s.growth(hi).unwrap());
            prop_assert!(s.slice(hi, eta).unwrap() >= 0.0);
            Ok(())
        },
    )
}

pub fn interval_count_monotone_under_inclusion() -> Outcome {
    run(
        (
            spectrum_strategy(300, false),
            -10.0..10.0f64,
            0.0..10.0f64,
            0.0..3.0f64,
            0.0..3.0f64,
            0.0..20.0f64,
        ),
        |(s, a, w, grow_lo, grow_hi, n_cut)| {
            let inner = interval_pair_count(&s, n_cut, a, a + w).unwrap();
            let outer = interval_pair_count(&s, n_cut, a - grow_lo, a + w + grow_hi).unwrap();
            prop_assert!(inner <= outer * (1.0 + 1e-12));
            let r = s.restrict(n_cut).unwrap();
            let brute = oracle::interval_pair_count(r.lengths(), r.weights(), a, a + w);
            prop_assert!(relative_close(inner, brute, 1e-9));
            Ok(())
        },
    )
}

pub fn truncation_coherence() -> Outcome {
    run(
        (
            spectrum_strategy(300, false),
            scaling_strategy(),
            bins_strategy(),
            0.0..20.0f64,
            any::<bool>(),
        ),
        |(s, scaling, (a, h), n_cut, diag)| {
            let full = pair_correlation(&s, n_cut, &scaling, a, h, diag).unwrap();
            let restricted = pair_correlation(&s.restrict(n_cut).unwrap(), n_cut, &scaling, a, h, diag).unwrap();
            prop_assert_eq!(&full.counts, &restricted.counts);
            prop_assert_eq!(full.renorm, restricted.renorm);
            Ok(())
        },
    )
}

pub fn pair_correlation_is_deterministic() -> Outcome {
    run(
        (spectrum_strategy(300, false), scaling_strategy(), bins_strategy()),
        |(s, scaling, (a, h))| {
            let x = pair_correlation(&s, 20.0, &scaling, a, h, true).unwrap();
            let y = pair_correlation(&s, 20.0, &scaling, a, h, true).unwrap();
            prop_assert_eq!(x, y);
            Ok(())
        },
    )
}

pub fn spectrum_construction_invariants() -> Outcome {
    run((prop::collection::vec((0.0..5.0f64, 0.1..3.0f64), 1..200),), |(raw,)| {
        // Snap some lengths onto a coarse grid so merging is exercised.
        let raw: Vec<(f64, f64)> = raw
            .into_iter()
            .enumerate()
            .map(|(i, (x, w))| {
                if i % 3 == 0 {
                    ((x * 4.0).round() / 4.0, w)
                } else {
                    (x, w)
                }
            })
            .collect();
        let total: f64 = raw.iter().map(|p| p.1).sum();
        let s = Spectrum::from_raw(raw.clone(), 5.0, "raw").unwrap();
        prop_assert!(s.lengths().windows(2).all(|w| w[1] - w[0] > 1e-12));
        prop_assert!(s.weights().iter().all(|&w| w > 0.0));
        prop_assert!(relative_close(s.total_weight(), total, 1e-12));
        let distinct: BTreeSet<u64> = raw.iter().map(|p| p.0.to_bits()).collect();
        prop_assert!(s.len() <= distinct.len());

        let mut csv = Vec::new();
        s.write_csv(&mut csv).unwrap();
        let back = Spectrum::read_csv(csv.as_slice(), Some(5.0), "raw").unwrap();
        prop_assert_eq!(back.lengths(), s.lengths());
        prop_assert_eq!(back.weights(), s.weights());
        Ok(())
    })
}

pub fn g_limit_shape() -> Outcome {
    run(
        (0.1..10.0f64, -2.0..2.0f64, 0.05..5.0f64, -50.0..50.0f64),
        |(c, alpha, delta, t)| {
            let p = Params::new(c, alpha, delta, 0.0).unwrap();
            let g = g_limit(&p, t);
            prop_assert!(g > 0.0 || (delta * t.abs()) > 700.0);
            prop_assert_eq!(g, g_limit(&p, -t));
            prop_assert!(g <= g_limit(&p, 0.0));
            prop_assert!(relative_close(g_limit(&p, 0.0), delta / 2.0, 1e-15));
            Ok(())
        },
    )
}

pub fn error_shape_decreasing_in_n() -> Outcome {
    run(
        (
            0.1..3.0f64,
            0.01..1.0f64,
            0.5..10.0f64,
            1.0..100.0f64,
            0.05..1.0f64,
            1.0..20.0f64,
            0.01..10.0f64,
        ),
        |(delta, kappa, window, psi, beta, n, step)| {
            let p = Params::new(1.0, 0.0, delta, kappa).unwrap();
            let m = n + step;
            for case in [
                ErrorCase::new(true, true),
                ErrorCase::new(false, true),
                ErrorCase::new(true, false),
            ] {
                let psi = if case.psi_unit { 1.0 } else { psi };
                prop_assert!(
                    error_shape(case, &p, m, window, psi) < error_shape(case, &p, n, window, psi),
                    "{case:?}"
                );
            }
            let case = ErrorCase::new(false, false);
            prop_assert!(
                error_shape(case, &p, m, window, m.powf(beta)) < error_shape(case, &p, n, window, n.powf(beta))
            );
            Ok(())
        },
    )
}

pub fn canonical_rotation_idempotent() -> Outcome {
    run(
        (prop::collection::vec(0usize..4, 1..24), 0usize..24),
        |(word, shift)| {
            let c = canonical_rotation(&word);
            prop_assert_eq!(&canonical_rotation(&c), &c);
            let k = shift % word.len();
            let rotated: Vec<usize> = word[k..].iter().chain(&word[..k]).copied().collect();
            prop_assert_eq!(&canonical_rotation(&rotated), &c);
            prop_assert_eq!(is_lyndon(&word), c == word && minimal_period(&word) == word.len());
            Ok(())
        },
    )
}

pub fn generated_growth_within_two() -> Outcome {
    run(
        (
            0.2..5.0f64,
            -1.5..1.5f64,
            0.3..2.0f64,
            2.0..10.0f64,
            any::<u64>(),
            0.0..0.49f64,
        ),
        |(c, alpha, delta, span, seed, amplitude)| {
            let p = Params::new(c, alpha, delta, 0.0).unwrap();
            let start = SyntheticSpec::inverse_counting(p, 1.0).t_start();
            let l_max = start + span;
            prop_assume!(p.counting(l_max) < 2e5);
            for s in [
                synthetic_pa(&SyntheticSpec::inverse_counting(p, l_max)).unwrap(),
                jittered(&SyntheticSpec::jittered(p, l_max, seed, amplitude)).unwrap(),
            ] {
                for i in 0..=40 {
                    let t = (start + 1.0 + (l_max - start - 1.0) * i as f64 / 40.0).min(l_max);
                    let f = p.counting(t);
                    let g = s.growth(t).unwrap();
                    prop_assert!((g / f - 1.0).abs() <= 2.0 / f, "t={t} growth={g} F={f}");
                }
            }
            Ok(())
        },
    )
}

pub fn generators_deterministic() -> Outcome {
    run(
        (0.3..2.0f64, -1.0..1.0f64, any::<u64>(), 0.0..0.49f64),
        |(delta, alpha, seed, amplitude)| {
            let p = Params::new(1.0, alpha, delta, 0.0).unwrap();
            let spec = SyntheticSpec::jittered(p, 8.0 / delta, seed, amplitude);
            let csv = |s: Spectrum| {
                let mut v = Vec::new();
                s.write_csv(&mut v).unwrap();
                v
            };
            prop_assert_eq!(csv(jittered(&spec).unwrap()), csv(jittered(&spec).unwrap()));
            Ok(())
        },
    )
}

pub fn fit_round_trip() -> Outcome {
    run(
        (0.5..3.0f64, -1.0..1.0f64, 0.5..2.0f64, 1e5..2e5f64),
        |(c, alpha, delta, target)| {
            let p = Params::new(c, alpha, delta, 0.0).unwrap();
            // Largest l_max with F(l_max) <= target.
            let (mut lo, mut hi) = (SyntheticSpec::inverse_counting(p, 1.0).t_start() + 1e-6, 100.0);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if p.counting(mid) <= target {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            let s = synthetic_pa(&SyntheticSpec::inverse_counting(p, lo)).unwrap();
            // Sampling where the count is large keeps the floor bias below the tolerance.
            let fit = fit_growth(&s, &uniform_grid(0.69 * lo, lo, 2000)).unwrap();
            prop_assert!(
                (fit.params.delta - delta).abs() <= 1e-3,
                "delta {} vs {delta}",
                fit.params.delta
            );
            prop_assert!(
                (fit.params.alpha - alpha).abs() <= 0.05,
                "alpha {} vs {alpha}",
                fit.params.alpha
            );
            Ok(())
        },
    )
}

pub fn geodesic_classes_are_primitive_reduced_and_canonical() -> Outcome {
    run((rose_strategy(), 1.0..5.0f64), |(g, words)| {
        let l_max = words * g.min_length();
        let (collapsed, classes) = closed_geodesic_classes(&g, l_max, DEFAULT_CLASS_BUDGET).unwrap();
        let mut seen = BTreeSet::new();
        for class in &classes {
            let cycle = &class.dart_cycle;
            for (i, &d) in cycle.iter().enumerate() {
                let e = cycle[(i + 1) % cycle.len()];
                prop_assert_eq!(collapsed.dart(d).terminus, collapsed.dart(e).origin);
                prop_assert_ne!(collapsed.dart(d).reversal, e, "backtracking in {:?}", cycle);
            }
            prop_assert!(class.primitive);
            prop_assert_eq!(minimal_period(cycle), cycle.len());
            prop_assert_eq!(&canonical_rotation(cycle), cycle);
            prop_assert!(class.length <= l_max);
            prop_assert!(seen.insert(cycle.clone()), "duplicate class {:?}", cycle);
        }
        let spectrum = enumerate_closed_geodesics(&g, l_max, DEFAULT_CLASS_BUDGET).unwrap();
        prop_assert_eq!(spectrum.total_weight(), classes.len() as f64);
        prop_assert_eq!(
            &spectrum,
            &enumerate_closed_geodesics(&g, l_max, DEFAULT_CLASS_BUDGET).unwrap()
        );
        Ok(())
    })
}

pub fn entropy_self_consistent_and_decreasing() -> Outcome {
    run((rose_strategy(), 0usize..4, 0.01..1.0f64), |(g, edge, extra)| {
        let tol = 1e-9;
        let d = entropy(&g, tol).unwrap();
        let (lo, hi) = spectral_radius_bounds(&g, d, tol);
        prop_assert!(lo >= 1.0 - tol && hi <= 1.0 + tol, "rho in [{lo}, {hi}]");

        let dart = 2 * (edge % (g.darts().len() / 2));
        let longer = g.with_edge_length(dart, g.dart(dart).length + extra).unwrap();
        prop_assert!(entropy(&longer, tol).unwrap() < d);
        Ok(())
    })
}
