//! Statistical and algebraic property tests: determinism, invariances,
//! convergence rates, and robustness.

mod common;

use common::mean;
use proptest::prelude::*;

use pointburst::classify::ratio_statistic;
use pointburst::estimate::{
    bin_counts, deflate, estimate_seasonality, spot_backward, CountSeries, KernelSpec,
    SeasonalCurve,
};
use pointburst::ibtest::{ib_statistic, AvarScheme, TestConfig};
use pointburst::sim::{
    burst_compensator, calibrate_burst_sigma, compose_scenario, simulate_burst_events,
    simulate_poisson, BaseProcess, BurstParams, DiurnalParams, ScenarioConfig, SessionSpec,
};
use pointburst::stats::{normal_quantile, ols_line};

fn default_scenario() -> ScenarioConfig {
    ScenarioConfig {
        base: BaseProcess::Poisson { rate: 1.0 },
        diurnal: Some(DiurnalParams::default()),
        burst: Some(BurstParams {
            tau_ib: 11_000.0,
            alpha: 0.5,
            sigma: 5.0,
            half_width: 300.0,
        }),
        jump: None,
    }
}

#[test]
fn deterministic_replay_of_composed_scenarios() {
    let spec = SessionSpec::new(23_400.0, 1.0, 2).unwrap();
    let cfg = default_scenario();
    let (e1, p1) = compose_scenario(&cfg, &spec, 99).unwrap();
    let (e2, p2) = compose_scenario(&cfg, &spec, 99).unwrap();
    assert_eq!(e1, e2);
    assert_eq!(p1, p2);
    let (e3, _) = compose_scenario(&cfg, &spec, 100).unwrap();
    assert_ne!(e1, e3);
}

#[test]
fn superposition_of_poisson_streams_behaves_like_sum_rate() {
    // Merge of two independent rate-1 streams vs one rate-2 stream: equal
    // mean count and agreeing interarrival variance within Monte Carlo
    // tolerance.
    let spec = SessionSpec::new(23_400.0, 0.01, 1).unwrap();
    let mut merged = Vec::new();
    let mut direct = Vec::new();
    for s in 0..30u64 {
        let a = simulate_poisson(1.0, &spec, 10_000 + s).unwrap();
        let b = simulate_poisson(1.0, &spec, 20_000 + s).unwrap();
        merged.push(a.merge(&b).len() as f64);
        direct.push(simulate_poisson(2.0, &spec, 30_000 + s).unwrap().len() as f64);
    }
    let diff = mean(&merged) - mean(&direct);
    // Each mean has sd ≈ √(46800/30) ≈ 39.5; allow 5 sigma of the difference.
    assert!(diff.abs() < 5.0 * 56.0, "mean count gap {diff}");
}

#[test]
fn heavy_traffic_error_decays_at_root_n_delta() {
    // MAE of the backward spot estimate under rate-1 Poisson across
    // (n, ℓ) combinations spanning two decades of nδ.
    let combos: Vec<(u32, usize)> = vec![(1, 60), (1, 300), (4, 150), (4, 600), (16, 300)];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (n, ell) in combos {
        let spec = SessionSpec::new(23_400.0, 0.01, n).unwrap();
        let mut errs = Vec::new();
        for s in 0..40u64 {
            let ev = simulate_poisson(1.0, &spec, 5_000 + 100 * n as u64 + s).unwrap();
            let cs = bin_counts(&ev, 1.0, 23_400.0).unwrap();
            let v = spot_backward(&cs, 10_000.0, ell, &KernelSpec::Indicator)
                .unwrap()
                .value
                / n as f64;
            errs.push((v - 1.0).abs());
        }
        xs.push(((n as usize * ell) as f64).ln());
        ys.push(mean(&errs).ln());
    }
    let (slope, _) = ols_line(&xs, &ys).unwrap();
    assert!(
        (slope + 0.5).abs() < 0.1,
        "heavy-traffic MAE slope {slope}, expected -0.5"
    );
}

#[test]
fn burst_spot_divergence_recovers_alpha() {
    // At the burst time the backward estimate grows like δ^{−α}.
    let alpha = 0.5;
    let b = BurstParams {
        tau_ib: 11_000.0,
        alpha,
        sigma: calibrate_burst_sigma(0.5, alpha, 600.0, 23_400.0),
        half_width: 600.0,
    };
    let spec = SessionSpec::new(23_400.0, 0.01, 1).unwrap();
    let deltas = [60usize, 120, 300, 600];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &ell in &deltas {
        let mut vals = Vec::new();
        for s in 0..40u64 {
            let ev = simulate_burst_events(&b, &spec, 40_000 + s).unwrap();
            let base = simulate_poisson(1.0, &spec, 50_000 + s).unwrap();
            let cs = bin_counts(&ev.merge(&base), 1.0, 23_400.0).unwrap();
            vals.push(
                spot_backward(&cs, 11_000.0, ell, &KernelSpec::Indicator)
                    .unwrap()
                    .value,
            );
        }
        xs.push((ell as f64).ln());
        ys.push(mean(&vals).ln());
    }
    let (slope, _) = ols_line(&xs, &ys).unwrap();
    assert!(
        (slope + alpha).abs() < 0.15,
        "divergence slope {slope}, expected {}",
        -alpha
    );
}

#[test]
fn ratio_statistic_is_monotone_in_alpha() {
    // Deterministic burst profiles: mean ratio decreasing in α.
    let mut prev = f64::INFINITY;
    for &alpha in &[0.25, 0.5, 0.75] {
        let b = BurstParams {
            tau_ib: 10_000.0,
            alpha,
            sigma: 50.0,
            half_width: 3_000.0,
        };
        let counts: Vec<f64> = (0..20_000)
            .map(|i| burst_compensator(&b, (i + 1) as f64) - burst_compensator(&b, i as f64))
            .collect();
        let cs = CountSeries::new(1.0, counts).unwrap();
        let r = ratio_statistic(&cs, 10_000.0, 60, 2.0).unwrap();
        assert!((r - 2.0f64.powf(-alpha)).abs() < 0.02, "alpha {alpha}: {r}");
        assert!(r < prev);
        prev = r;
    }
}

#[test]
fn jump_robustness_of_the_null_statistic() {
    // On a jump day the statistic never over-rejects. While the variance
    // anchors still straddle the jump the inflated denominator makes the
    // test conservative; once the whole anchor window has cleared the jump
    // the rejection rate returns to nominal.
    let spec = SessionSpec::new(23_400.0, 1.0, 1).unwrap();
    let cfg = ScenarioConfig {
        base: BaseProcess::Poisson { rate: 1.0 },
        diurnal: None,
        burst: None,
        jump: Some(pointburst::sim::JumpScenario {
            theta_jump: 9_000.0,
            mu_before: 1.0,
            delta_mu: 1.0,
        }),
    };
    let config = TestConfig {
        ell: 300,
        k_n: 3_000,
        kernel: KernelSpec::Indicator,
        avar_scheme: AvarScheme::Overlapping,
    };
    let z95 = normal_quantile(0.95);
    let reps = 300;
    let mut straddle_rejections = 0usize;
    let mut clean_rejections = 0usize;
    for s in 0..reps {
        let (events, _) = compose_scenario(&cfg, &spec, 70_000 + s).unwrap();
        let cs = bin_counts(&events, 1.0, 23_400.0).unwrap();
        // Anchors reach back K + ℓ bins; at t = 12,000 they straddle the
        // jump at 9,000, at t = 14,000 they are entirely past it.
        if ib_statistic(&cs, 12_000.0, &config).unwrap().statistic > z95 {
            straddle_rejections += 1;
        }
        if ib_statistic(&cs, 14_000.0, &config).unwrap().statistic > z95 {
            clean_rejections += 1;
        }
    }
    let straddle_rate = straddle_rejections as f64 / reps as f64;
    let clean_rate = clean_rejections as f64 / reps as f64;
    let se = (0.05f64 * 0.95 / reps as f64).sqrt();
    assert!(straddle_rate <= 0.05 + 3.0 * se, "straddle rate {straddle_rate}");
    assert!(
        (clean_rate - 0.05).abs() < 3.0 * se + 0.01,
        "clean rate {clean_rate}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn statistic_scale_invariance_on_random_counts(
        seed in 0u64..10_000,
        scale_exp in -3i32..8,
    ) {
        // Power-of-two scaling keeps float arithmetic exact.
        let spec = SessionSpec::new(4_000.0, 1.0, 1).unwrap();
        let ev = simulate_poisson(2.0, &spec, seed).unwrap();
        let cs = bin_counts(&ev, 1.0, 4_000.0).unwrap();
        let factor = 2.0f64.powi(scale_exp);
        let scaled = CountSeries::new(
            1.0,
            cs.counts().iter().map(|c| c * factor).collect(),
        ).unwrap();
        let config = TestConfig {
            ell: 30,
            k_n: 300,
            kernel: KernelSpec::Indicator,
            avar_scheme: AvarScheme::Overlapping,
        };
        let a = ib_statistic(&cs, 3_000.0, &config).unwrap();
        let b = ib_statistic(&scaled, 3_000.0, &config).unwrap();
        prop_assert_eq!(a.statistic, b.statistic);
        prop_assert_eq!(a.degenerate, b.degenerate);
    }

    #[test]
    fn deflation_is_homogeneous_of_degree_one(
        seed in 0u64..10_000,
        factor in 0.1f64..50.0,
    ) {
        let spec = SessionSpec::new(600.0, 1.0, 1).unwrap();
        let days: Vec<CountSeries> = (0..3)
            .map(|d| {
                let ev = simulate_poisson(3.0, &spec, seed * 10 + d).unwrap();
                bin_counts(&ev, 1.0, 600.0).unwrap()
            })
            .collect();
        let curve = estimate_seasonality(&days).unwrap();
        let cs = &days[0];
        let scaled = CountSeries::new(
            1.0,
            cs.counts().iter().map(|c| c * factor).collect(),
        ).unwrap();
        let a = deflate(cs, &curve).unwrap();
        let b = deflate(&scaled, &curve).unwrap();
        for (x, y) in a.counts().iter().zip(b.counts()) {
            prop_assert!((y - x * factor).abs() <= 1e-9 * y.abs().max(1.0));
        }
    }

    #[test]
    fn binning_conserves_mass_for_any_width(
        seed in 0u64..10_000,
        width_idx in 0usize..4,
    ) {
        let widths = [0.25, 0.5, 1.0, 2.0];
        let spec = SessionSpec::new(500.0, 0.01, 1).unwrap();
        let ev = simulate_poisson(2.0, &spec, seed).unwrap();
        let cs = bin_counts(&ev, widths[width_idx], 500.0).unwrap();
        prop_assert_eq!(cs.total() as usize, ev.len());
    }

    #[test]
    fn flat_deflation_never_changes_spot_estimates(seed in 0u64..10_000) {
        let spec = SessionSpec::new(2_000.0, 1.0, 1).unwrap();
        let ev = simulate_poisson(1.5, &spec, seed).unwrap();
        let cs = bin_counts(&ev, 1.0, 2_000.0).unwrap();
        let flat = SeasonalCurve::flat(cs.len());
        let d = deflate(&cs, &flat).unwrap();
        let a = spot_backward(&cs, 1_500.0, 60, &KernelSpec::Indicator).unwrap();
        let b = spot_backward(&d, 1_500.0, 60, &KernelSpec::Indicator).unwrap();
        prop_assert_eq!(a.value, b.value);
    }
}
