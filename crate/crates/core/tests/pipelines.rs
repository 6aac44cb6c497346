use quintlab_core::combinatorics::{
    double_factorial, min_unclogged, raw_summand_count, raw_summand_count_by_leaves,
};
use quintlab_core::manybody::{
    stability_check, BosonicState, ManyBodyConfig, ManyBodySystem, PotentialProfile,
};
use quintlab_core::nls::{evolve, utfl_probe, NlsConfig, UtflOutcome};
use quintlab_core::probes::{run_probe, LemmaId, ProbeSettings};
use quintlab_core::random::{random_band_limited, random_shell, rng_for};
use quintlab_core::GridSpec;

#[test]
fn unclogged_minimum_meets_the_lower_bound() {
    for k in 1..=6 {
        let r = min_unclogged(k).unwrap();
        assert!(r.min_count >= r.lower_bound, "k = {k}: {r:?}");
        assert!(r.inequality_holds);
        let expected = double_factorial(2 * k as i64 - 1) * (1u128 << k);
        assert_eq!(r.expansions_checked, expected);
    }
    assert!(min_unclogged(8).is_err());
}

#[test]
fn raw_counts_agree_between_methods() {
    for k in 1..=7 {
        let c = raw_summand_count(k).unwrap();
        assert_eq!(c.expanded, raw_summand_count_by_leaves(k));
        assert_eq!(c.expanded, double_factorial(2 * k as i64 - 1) << k);
        assert!(c.shifted_formula > c.expanded);
    }
}

#[test]
fn rough_data_is_not_localized() {
    let g = GridSpec::new(1, 32).unwrap();
    let f0 = random_shell(g, 10.0, 16.0, |_| 1.0, &mut rng_for(5, 0));
    let cfg = NlsConfig::new(g, 1.0, 0.01, false).unwrap();
    let traj = evolve(&f0, 0.1, &cfg, 5).unwrap();
    assert_eq!(utfl_probe(&traj, 1e-6).unwrap(), UtflOutcome::NotFound);
}

#[test]
fn stability_holds_for_small_constants() {
    let g = GridSpec::new(1, 8).unwrap();
    let system = ManyBodySystem::new(ManyBodyConfig::new(g, 3, 0.1, PotentialProfile::default()).unwrap()).unwrap();
    let mut rng = rng_for(3, 0);
    for _ in 0..5 {
        let psi = BosonicState::random_symmetric(g, 3, 4.0, &mut rng).unwrap().normalized().unwrap();
        for k in 1..=3 {
            let rec = stability_check(&system, &psi, k, 0.05).unwrap();
            assert!(rec.satisfied, "{rec:?}");
        }
    }
    let psi = BosonicState::product(&random_band_limited(g, 2.0, &mut rng), 3).unwrap();
    assert!(stability_check(&system, &psi, 4, 0.5).is_err());
    assert!(stability_check(&system, &psi, 1, 1.5).is_err());
}

#[test]
fn probe_reports_are_reproducible() {
    let settings = ProbeSettings {
        samples: 4,
        n: 8,
        nt: 32,
        cutoffs: vec![2.0],
        ..ProbeSettings::default_for(LemmaId::Strichartz)
    };
    let a = run_probe(&settings).unwrap();
    let b = run_probe(&settings).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.ratio_table.len(), 1);
    let other = run_probe(&ProbeSettings { seed: 1, ..settings }).unwrap();
    assert_ne!(a.max_ratio, other.max_ratio);
}
