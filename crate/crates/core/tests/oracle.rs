use noiseless_core::oracle::mc::mc_estimate_delta;
use noiseless_core::oracle::postprocess::{postprocess_check, ValueMap};
use noiseless_core::oracle::{
    adjacent_pmfs, exact_np_delta, exact_sum_pmf, hockey_stick_delta, DiscretePmf, OracleConfig,
    DEFAULT_RESOLUTION,
};
use noiseless_core::{DataVectorSpec, DistributionSpec};

fn binomial_pmf(n: u64, p: f64) -> Vec<(f64, f64)> {
    // Independent of the oracle: products of exact integer coefficients.
    let mut out = Vec::new();
    let mut c = 1.0f64;
    for k in 0..=n {
        if k > 0 {
            c = c * (n - k + 1) as f64 / k as f64;
        }
        out.push((k as f64, c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)));
    }
    out
}

fn pmf(atoms: &[(f64, f64)]) -> DiscretePmf {
    DiscretePmf::from_atoms(atoms, DEFAULT_RESOLUTION).unwrap()
}

fn bern(p: f64, n: u64) -> DataVectorSpec {
    DataVectorSpec::independent(vec![DistributionSpec::bernoulli(p, n).unwrap()], 1.0).unwrap()
}

#[test]
fn shifted_binomial_golden() {
    let p = pmf(&binomial_pmf(10, 0.5));
    let q = p.shift(1.0).unwrap();
    let d = hockey_stick_delta(&p, &q, 1.0);
    assert!((d - 0.025_487_206_920_850_103).abs() < 1e-15, "{d}");
}

#[test]
fn identical_and_disjoint_laws() {
    let p = pmf(&binomial_pmf(20, 0.3));
    for eps in [0.0, 0.1, 2.0] {
        assert_eq!(hockey_stick_delta(&p, &p, eps), 0.0);
    }
    let a = pmf(&[(0.0, 1.0)]);
    let b = pmf(&[(1.0, 1.0)]);
    assert_eq!(hockey_stick_delta(&a, &b, 0.0), 1.0);
}

#[test]
fn zero_epsilon_is_total_variation() {
    let p = pmf(&binomial_pmf(15, 0.4));
    let q = pmf(&binomial_pmf(14, 0.4));
    let tv: f64 = (0..=15)
        .map(|k| (p.prob_at(k as f64) - q.prob_at(k as f64)).abs())
        .sum::<f64>()
        / 2.0;
    let d = hockey_stick_delta(&p, &q, 0.0).max(hockey_stick_delta(&q, &p, 0.0));
    assert!((d - tv).abs() < 1e-14);
}

#[test]
fn vanishes_beyond_max_log_ratio() {
    let p = pmf(&[(0.0, 0.2), (1.0, 0.5), (2.0, 0.3)]);
    let q = pmf(&[(0.0, 0.4), (1.0, 0.4), (2.0, 0.2)]);
    let cut = (0.5f64 / 0.4).ln().max((0.3f64 / 0.2).ln());
    assert!(hockey_stick_delta(&p, &q, cut * 0.99) > 0.0);
    assert_eq!(hockey_stick_delta(&p, &q, cut + 1e-12), 0.0);
}

#[test]
fn sum_matches_closed_form_binomial() {
    let got = exact_sum_pmf(&bern(0.3, 100)).unwrap();
    assert!((got.total_mass() - 1.0).abs() < 1e-10);
    for (v, q) in binomial_pmf(100, 0.3) {
        assert!((got.prob_at(v) - q).abs() < 1e-12, "k = {v}");
    }
}

#[test]
fn reordering_records_keeps_the_sum() {
    let recs = vec![
        DistributionSpec::discrete(vec![(0.0, 0.3), (2.0, 0.7)], 3).unwrap(),
        DistributionSpec::bernoulli(0.1, 5).unwrap(),
        DistributionSpec::discrete(vec![(-1.0, 0.5), (0.5, 0.25), (3.0, 0.25)], 2).unwrap(),
    ];
    let fwd = exact_sum_pmf(&DataVectorSpec::independent(recs.clone(), 3.0).unwrap()).unwrap();
    let rev: Vec<_> = recs.into_iter().rev().collect();
    let back = exact_sum_pmf(&DataVectorSpec::independent(rev, 3.0).unwrap()).unwrap();
    assert_eq!(fwd.len(), back.len());
    for ((v, a), (w, b)) in fwd.atoms().zip(back.atoms()) {
        assert_eq!(v, w);
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn exchangeable_removals_agree() {
    let nb = adjacent_pmfs(&bern(0.4, 30), None, &OracleConfig::default()).unwrap();
    // one removal and one insertion
    assert_eq!(nb.neighbours.len(), 2);
}

#[test]
fn too_large_instance_is_refused() {
    let cfg = OracleConfig {
        support_cap: 50,
        ..OracleConfig::default()
    };
    let err = noiseless_core::oracle::exact_sum_pmf_with(&bern(0.5, 100), &cfg).unwrap_err();
    assert!(err.to_string().contains("use mc_estimate"), "{err}");
}

#[test]
fn built_in_maps_never_increase_delta() {
    let maps = [
        ValueMap::Identity,
        ValueMap::Round { step: 10.0 },
        ValueMap::Bucket { width: 7.0 },
        ValueMap::Threshold { at: 50.0 },
        ValueMap::Constant { value: 1.0 },
    ];
    for spec in [bern(0.5, 100), bern(0.2, 60)] {
        for map in maps {
            assert!(postprocess_check(&spec, 0.5, map).unwrap(), "{map:?}");
        }
    }
}

#[test]
fn mc_interval_covers_exact_delta() {
    let spec = bern(0.5, 40);
    let eps = 0.3;
    let exact = exact_np_delta(&spec, eps, None).unwrap();
    let trials = 50;
    let covered = (0..trials)
        .filter(|&seed| {
            let m = mc_estimate_delta(&spec, eps, None, 20_000, seed).unwrap();
            (m.estimate - exact).abs() <= m.ci95
        })
        .count();
    assert!(covered * 10 >= trials as usize * 9, "{covered}/{trials} covered, exact {exact}");
}
