//! Statistical and shape properties of the simulator and the quadrature.

use collective_knapsack::analytic::{beta_opt, performance_two, QuadratureSpec, TwoProjectMethod, TwoProjectScenario};
use collective_knapsack::simulator::estimate_performance;
use collective_knapsack::{AggregationMethod, PerformanceEstimate, ScenarioConfig};

fn e2(method: TwoProjectMethod, beta: f64, n_groups: usize) -> f64 {
    let s = TwoProjectScenario::baseline(beta, n_groups).unwrap();
    performance_two(&s, method, &QuadratureSpec::default()).unwrap().value
}

fn z(a: &PerformanceEstimate, b: &PerformanceEstimate) -> f64 {
    (a.mean - b.mean) / a.std_error.hypot(b.std_error)
}

fn estimate(method: AggregationMethod, beta: f64, seed: u64) -> PerformanceEstimate {
    let cfg = ScenarioConfig { method, beta, samples: 4000, master_seed: seed, ..ScenarioConfig::default() };
    estimate_performance(&cfg).unwrap()
}

#[test]
fn individual_and_delegation_coincide_at_the_extremes() {
    for (beta, seed) in [(0.0, 1), (10.0, 3), (14.0, 5)] {
        let ind = estimate(AggregationMethod::Individual, beta, seed);
        let del = estimate(AggregationMethod::Delegation, beta, seed + 1);
        assert!(z(&ind, &del).abs() < 3.0, "β={beta}: {ind:?} {del:?}");
    }
}

#[test]
fn more_groups_help_the_mean() {
    let run = |n_groups, seed| {
        let cfg = ScenarioConfig {
            method: AggregationMethod::ArithmeticMean,
            n_groups,
            samples: 100_000,
            master_seed: seed,
            ..ScenarioConfig::two_project(1.0, 2.0)
        };
        estimate_performance(&cfg).unwrap()
    };
    let (e3, e5, e7) = (run(3, 31), run(5, 32), run(7, 33));
    assert!(z(&e5, &e3) > 3.0 && z(&e7, &e5) > 3.0, "{e3:?} {e5:?} {e7:?}");
}

#[test]
fn mean_performance_falls_with_breadth() {
    for n in [3, 5, 7] {
        let curve: Vec<f64> = (0..=20).map(|k| e2(TwoProjectMethod::Mean, k as f64 * 0.5, n)).collect();
        for w in curve.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "N_s={n}: {curve:?}");
        }
    }
}

#[test]
fn delegation_peaks_inside() {
    for n in [3, 5, 7] {
        let b = beta_opt(n, 5.0, 0.0, 10.0).unwrap();
        let top = e2(TwoProjectMethod::Delegation, b, n);
        assert!(top > e2(TwoProjectMethod::Delegation, 0.0, n));
        assert!(top > e2(TwoProjectMethod::Delegation, 2.0 * b, n));
    }
}

#[test]
fn ordering_at_zero_breadth() {
    let mean = e2(TwoProjectMethod::Mean, 0.0, 3);
    let median = e2(TwoProjectMethod::Median, 0.0, 3);
    let delegation = e2(TwoProjectMethod::Delegation, 0.0, 3);
    let individual = e2(TwoProjectMethod::Individual, 0.0, 3);
    assert!(mean > median && median > delegation, "{mean} {median} {delegation}");
    assert!((delegation - individual).abs() < 1e-12);
}

#[test]
fn median_quadrature_matches_monte_carlo() {
    let spec = QuadratureSpec::default();
    for (beta, seed) in [(0.0, 41), (5.0, 42)] {
        let exact = performance_two(&TwoProjectScenario::baseline(beta, 3).unwrap(), TwoProjectMethod::Median, &spec)
            .unwrap();
        let cfg = ScenarioConfig {
            method: AggregationMethod::Median,
            beta,
            samples: 100_000,
            master_seed: seed,
            ..ScenarioConfig::two_project(1.0, 2.0)
        };
        let mc = estimate_performance(&cfg).unwrap();
        let bound = 3.0 * mc.std_error + spec.tolerance;
        assert!((mc.mean - exact.value).abs() < bound, "β={beta}: {mc:?} vs {exact:?}");
    }
}
