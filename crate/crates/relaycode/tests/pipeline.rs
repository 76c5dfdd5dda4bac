//! Integration tests exercising the public API end to end: erasure
//! models feeding chains, chains feeding reports, reports agreeing
//! with the analytical formulas — the way a downstream user would
//! wire the pieces together.

use relaycode::analysis::{capacity_upper, loss_upper_bound, NetworkConfig, Rate};
use relaycode::channel::{
    derive_rng, enumerate_budgeted, sample_sliding_admissible, ErasurePattern,
};
use relaycode::field::FieldParams;
use relaycode::sim::{
    run_monte_carlo, run_trace, verify_exhaustive, verify_sliding, Scheme, SchemeConfig,
};

fn sdf(delay: usize, budgets: &[usize], field: FieldParams) -> SchemeConfig {
    let net = NetworkConfig::new(delay, budgets.to_vec()).expect("network");
    SchemeConfig::verify_grade(Scheme::Sdf, net, field).expect("config")
}

fn choose(n: u128, k: u128) -> u128 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Patterns with at most N_j erasures per link, counted per link as
/// sum of binomials and multiplied across links.
fn budgeted_count(horizon: u128, budgets: &[usize]) -> u128 {
    budgets
        .iter()
        .map(|&n| (0..=n as u128).map(|u| choose(horizon, u)).sum::<u128>())
        .product()
}

// ============================================================
// Field width is a free parameter
// ============================================================

/// The whole pipeline — code construction, relay state machine,
/// exhaustive verification — works over any supported symbol width,
/// not just the byte field.
#[test]
fn every_supported_field_width_carries_the_pipeline() {
    for bits in [2, 4, 8, 12] {
        let field = FieldParams::with_exponent(bits).expect("field");
        let report = verify_exhaustive(&sdf(3, &[1, 1], field), 5).expect("verification");
        assert_eq!(report.combinations, 100, "GF(2^{bits}) pattern count");
        assert!(report.passed(), "GF(2^{bits}): {:?}", report.examples);
    }
}

// ============================================================
// Erasure models
// ============================================================

#[test]
fn enumeration_counts_match_the_binomial_formula() {
    for (horizon, budgets) in [(9usize, vec![2]), (9, vec![1, 1]), (11, vec![2, 1])] {
        let patterns = enumerate_budgeted(horizon, &budgets).expect("enumeration");
        let expected = budgeted_count(horizon as u128, &budgets);
        assert_eq!(patterns.count_total(), expected);
        let mut seen = 0u128;
        for pattern in patterns {
            assert!(
                pattern.within_budgets(&budgets),
                "{}",
                pattern.to_ascii().join("/")
            );
            seen += 1;
        }
        assert_eq!(
            seen, expected,
            "iterator must yield exactly the counted patterns"
        );
    }
}

#[test]
fn sliding_window_sampler_only_emits_admissible_patterns() {
    let budgets = [2usize, 1];
    let window = 5;
    let mut rngs: Vec<_> = (1..=budgets.len() as u64)
        .map(|j| derive_rng(23, 0, j))
        .collect();
    for _ in 0..300 {
        let (pattern, _) =
            sample_sliding_admissible(12, &budgets, window, &mut rngs).expect("sample");
        assert!(pattern.is_sliding_admissible(&budgets, window));
    }

    // The sampler is a pure function of its RNG streams.
    let mut replay: Vec<_> = (1..=budgets.len() as u64)
        .map(|j| derive_rng(23, 0, j))
        .collect();
    let mut fresh: Vec<_> = (1..=budgets.len() as u64)
        .map(|j| derive_rng(23, 0, j))
        .collect();
    let (first, r1) = sample_sliding_admissible(12, &budgets, window, &mut replay).expect("a");
    let (second, r2) = sample_sliding_admissible(12, &budgets, window, &mut fresh).expect("b");
    assert_eq!(first, second);
    assert_eq!(r1, r2);
}

// ============================================================
// Reports agree with the analytical formulas
// ============================================================

#[test]
fn monte_carlo_reports_embed_the_matching_loss_bound() {
    let cfg = sdf(3, &[1, 1], FieldParams::gf256());
    let report = run_monte_carlo(&cfg, 0.05, 100_000, 11).expect("run");
    let expected = loss_upper_bound(2, &[1, 1], &[0.05, 0.05]).expect("bound");
    let bound = report.bound.expect("state-dependent runs carry a bound");
    assert!((bound - expected).abs() < 1e-15);
    assert!(
        report.loss_ratio() <= bound + 3.0 * report.ci95(),
        "loss {} should stay under bound {bound}",
        report.loss_ratio()
    );
}

#[test]
fn frozen_loss_bound_oracles_still_hold() {
    let three_hop = |alpha: f64| loss_upper_bound(4, &[2, 2, 2], &[alpha; 3]).expect("bound");
    assert!((three_hop(0.005) - 1.0329972037625726e-4).abs() < 1e-18);
    assert!((three_hop(0.01) - 7.959158841516522e-4).abs() < 1e-18);
    assert!((three_hop(0.02) - 5.905333276362975e-3).abs() < 1e-17);
    let single = loss_upper_bound(2, &[1], &[0.01]).expect("bound");
    assert!((single - 2.0310416349400002e-3).abs() < 1e-17);
}

/// The budget-exact configuration delivers exactly the chain capacity
/// whenever that capacity is positive.
#[test]
fn budget_exact_configurations_meet_the_capacity_bound() {
    for (delay, budgets) in [
        (3usize, vec![1usize, 1]),
        (4, vec![1, 1, 1]),
        (5, vec![2, 1]),
        (9, vec![2, 2, 2]),
    ] {
        let cfg = sdf(delay, &budgets, FieldParams::gf256());
        assert_eq!(
            cfg.rate(),
            capacity_upper(delay, &budgets),
            "T={delay}, N={budgets:?}"
        );
        assert!(cfg.rate() > Rate::new(0, 1));
    }
}

// ============================================================
// Tracing
// ============================================================

#[test]
fn traced_runs_complete_every_frame_by_its_deadline() {
    let cfg = sdf(4, &[1, 1, 1], FieldParams::gf256());
    let horizon = 18usize;
    let pattern =
        ErasurePattern::from_slots(3, horizon, &[(0, 6), (1, 8), (2, 11)]).expect("pattern");
    let trace = run_trace(&cfg, &pattern, horizon, 3).expect("trace");

    assert_eq!(trace.node_outputs.len(), 3, "source plus two relays emit");
    for outputs in &trace.node_outputs {
        assert_eq!(outputs.len(), horizon);
    }
    assert!(!trace.completions.is_empty());
    for (frame, done) in &trace.completions {
        let done = done.unwrap_or_else(|| panic!("frame {frame} never completed"));
        assert!(
            done <= frame + 4,
            "frame {frame} completed at {done}, past its deadline"
        );
    }
}

// ============================================================
// Determinism
// ============================================================

#[test]
fn equal_seeds_reproduce_reports_and_different_seeds_move_them() {
    let cfg = sdf(4, &[2, 1], FieldParams::gf256());
    let first = verify_sliding(&cfg, 5, 300, 29).expect("first");
    let second = verify_sliding(&cfg, 5, 300, 29).expect("second");
    assert_eq!(first.failures, second.failures);
    assert_eq!(first.rejections, second.rejections);
    assert!(first.passed());

    let a = run_monte_carlo(&cfg, 0.1, 200_000, 1).expect("a");
    let b = run_monte_carlo(&cfg, 0.1, 200_000, 1).expect("b");
    let c = run_monte_carlo(&cfg, 0.1, 200_000, 2).expect("c");
    assert_eq!(a.csv_row(), b.csv_row());
    assert_ne!(a.losses, c.losses, "reseeding should move a lossy estimate");
}
