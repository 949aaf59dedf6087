use noiseless_core::adversary::{
    bound_for_plan, independent_bound_compromised, worst_case_compromise, CompromisePlan,
};
use noiseless_core::dependent::{dependent_bound, DependentAggregate};
use noiseless_core::independent::{independent_bound, IndependentAggregate};
use noiseless_core::synergy::{eps_with_laplace, eps_with_noise};
use noiseless_core::{
    BerryEsseenConstant, BoundConstants, DataVectorSpec, DistributionSpec, SteinConstant,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Twelve single records with distinct variances, a few of them tied.
fn twelve() -> DataVectorSpec {
    let records = [0.5, 0.1, 0.3, 0.7, 0.5, 0.05, 0.9, 0.2, 0.45, 0.6, 0.15, 0.35]
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let hi = 1.0 + (i % 3) as f64;
            DistributionSpec::discrete(vec![(0.0, 1.0 - p), (hi, p)], 1).unwrap()
        })
        .collect();
    DataVectorSpec::independent(records, 3.0).unwrap()
}

fn subsets(n: u64, k: u32) -> impl Iterator<Item = Vec<u64>> {
    (0u32..1 << n)
        .filter(move |m| m.count_ones() == k)
        .map(move |m| (0..n).filter(|i| m >> i & 1 == 1).collect())
}

#[test]
fn greatest_variance_set_maximizes_epsilon() {
    let spec = twelve();
    let c = BoundConstants::default();
    for gamma in [0.25, 0.5] {
        let worst = worst_case_compromise(&spec, gamma).unwrap();
        let eps = independent_bound_compromised(&spec, &worst, c).unwrap().epsilon;
        let k = (gamma * 12.0f64).ceil() as u32;
        let mut checked = 0;
        for set in subsets(12, k) {
            let plan = CompromisePlan::explicit(&spec, gamma, &set).unwrap();
            let e = independent_bound_compromised(&spec, &plan, c).unwrap().epsilon;
            assert!(e <= eps, "γ={gamma} {set:?}: {e} > {eps}");
            checked += 1;
        }
        assert_eq!(checked, if k == 3 { 220 } else { 924 });
    }
}

#[test]
fn zero_gamma_matches_plain_bounds() {
    let spec = twelve();
    let plan = worst_case_compromise(&spec, 0.0).unwrap();
    for be in [BerryEsseenConstant::Rounded, BerryEsseenConstant::Tight] {
        let c = BoundConstants {
            berry_esseen: be,
            ..BoundConstants::default()
        };
        let plain = independent_bound(&IndependentAggregate::from_spec(&spec), be).unwrap();
        assert_eq!(independent_bound_compromised(&spec, &plan, c).unwrap(), plain);
    }

    let dep = DataVectorSpec::builder(spec.records().to_vec())
        .sensitivity(3.0)
        .dependency_bound(2)
        .total_variance(4.0)
        .build()
        .unwrap();
    let plan = worst_case_compromise(&dep, 0.0).unwrap();
    for k in [SteinConstant::K28, SteinConstant::K26] {
        let c = BoundConstants {
            stein: k,
            ..BoundConstants::default()
        };
        let plain = dependent_bound(&DependentAggregate::from_spec(&dep).unwrap(), k).unwrap();
        assert_eq!(bound_for_plan(&dep, &plan, c, None).unwrap(), plain);
    }
}

#[test]
fn zero_noise_matches_data_epsilon() {
    let spec = twelve();
    let agg = IndependentAggregate::from_spec(&spec);
    let b = independent_bound(&agg, BerryEsseenConstant::Rounded).unwrap();
    let e = eps_with_noise(agg.sensitivity, agg.n, agg.sum_variance(), 0.0).unwrap();
    assert_eq!(e.to_bits(), b.epsilon.to_bits());

    let dep = DependentAggregate {
        n: 500,
        total_variance: 321.0,
        sum_abs_third: 90.0,
        sum_fourth: 70.0,
        dependency_bound: 4,
        sensitivity: 2.5,
    };
    let d = dependent_bound(&dep, SteinConstant::K28).unwrap();
    let e = eps_with_noise(dep.sensitivity, dep.n, dep.total_variance, 0.0).unwrap();
    assert_eq!(e.to_bits(), d.epsilon.to_bits());
}

#[test]
fn laplace_composition_is_noise_with_laplace_variance() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let sens = rng.random_range(0.1..50.0);
        let n = rng.random_range(2..1_000_000u64);
        let var = rng.random_range(1e-3..1e6);
        let eps_lap = rng.random_range(0.01..5.0);
        let eps_data = eps_with_noise(sens, n, var, 0.0).unwrap();
        let lhs = eps_with_laplace(eps_data, eps_lap, n).unwrap();
        let rhs = eps_with_noise(sens, n, var, 2.0 * sens * sens / (eps_lap * eps_lap)).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0), "{lhs} vs {rhs}");
    }
}
