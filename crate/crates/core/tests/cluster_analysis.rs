use proptest::prelude::*;
use qd_cluster::channel::{ideal_cycle_map, ProcessMap};
use qd_cluster::cluster::{
    analyze_field, fit_decay_length, le_length, localizable_entanglement,
    localizable_entanglement_profile, pulse_timing, steady_state, sweep_csv, sweep_field,
    witnesses, LeLength, SampleOptions, CSV_HEADER,
};
use qd_cluster::cycle::build_process_map;
use qd_cluster::params::{PhysicalParams, Species};
use qd_cluster::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn witness_examples() {
    let w = witnesses(&ideal_cycle_map()).unwrap();
    for (got, want) in w.as_array().iter().zip([1.0, 0.0, 1.0, 1.0]) {
        assert!((got - want).abs() < 1e-12);
    }
    let w = witnesses(&ProcessMap::fully_depolarizing()).unwrap();
    assert!(w.as_array().iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn steady_state_of_depolarizing_map_is_mixed() {
    assert!(steady_state(&ProcessMap::fully_depolarizing()).as_vector().norm() < 1e-15);
}

#[test]
fn le_length_examples() {
    let w1 = 0.8;
    match le_length(w1, w1 * (-0.1f64).exp()).unwrap() {
        LeLength::Finite(z) => assert!((z - 10.0).abs() < 1e-12),
        LeLength::Infinite => panic!("expected a finite length"),
    }
    assert_eq!(le_length(0.5, 0.5).unwrap(), LeLength::Infinite);
    assert!(matches!(le_length(0.5, 0.6), Err(Error::Domain(_))));
    assert!(matches!(le_length(0.0, 0.0), Err(Error::Domain(_))));
}

#[test]
fn localizable_entanglement_examples() {
    let ideal = localizable_entanglement_profile(&ideal_cycle_map(), 6).unwrap();
    let spread = ideal.iter().cloned().fold(f64::MIN, f64::max) - ideal.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 1e-9);
    assert!((ideal[0] - 0.5).abs() < 1e-12);
    assert!(localizable_entanglement(&ProcessMap::fully_depolarizing(), 1).unwrap().abs() < 1e-15);
    assert!(localizable_entanglement(&ideal_cycle_map(), 0).is_err());
}

#[test]
fn decay_fit_recovers_exponentials() {
    let values: Vec<f64> = (1..=6).map(|d| 0.4 * (-(d as f64) / 7.5).exp()).collect();
    assert!((fit_decay_length(&values).unwrap().value() - 7.5).abs() < 1e-9);
    assert_eq!(fit_decay_length(&[0.5; 6]).unwrap(), LeLength::Infinite);
    assert!(fit_decay_length(&[0.5]).is_err());
}

#[test]
fn timing_correction_vanishes_without_radiative_time() {
    let p = PhysicalParams {
        tau_photon: 1e-12,
        ..PhysicalParams::placeholder()
    };
    let t = pulse_timing(&p, 0.1, &SampleOptions::new(256, 4)).unwrap();
    let mut q = p.clone();
    q.b_ext = 0.1;
    let quarter = q.larmor_period(Species::HeavyHole) / 4.0;
    assert!((t.t_pulse - quarter).abs() < 1e-9, "{} vs {quarter}", t.t_pulse);
    assert!(matches!(pulse_timing(&p, 0.0, &SampleOptions::new(16, 1)), Err(Error::InfinitePeriod(_))));
}

#[test]
fn without_hyperfine_zeta_falls_with_field() {
    let p = PhysicalParams {
        a_hh: [0.0; 3],
        a_trion: [0.0; 3],
        ..PhysicalParams::placeholder()
    };
    let opts = SampleOptions::new(8, 1);
    let mut last = f64::INFINITY;
    for b in [0.05, 0.1, 0.2] {
        let point = analyze_field(&p, b, &opts, None).unwrap();
        // the sweep value agrees with a map built directly at the chosen timing
        let direct = build_process_map(&point.params, 8, 1, opts.n_time_steps).unwrap();
        let w = witnesses(&direct).unwrap();
        let zeta = le_length(w.w1, w.w3).unwrap().value();
        assert!((zeta - point.row.zeta_le).abs() <= 1e-9 * zeta.max(1.0));
        assert!(zeta < last, "zeta {zeta} at {b} T did not fall below {last}");
        last = zeta;
    }
}

#[test]
fn sweep_rows_are_deterministic_and_isolated() {
    let p = PhysicalParams::placeholder();
    let fields = [0.0, 0.06, 0.12];
    let opts = SampleOptions::new(2000, 9);
    let a = sweep_field(&p, &fields, &opts, None).unwrap();
    let b = sweep_field(&p, &fields, &opts, None).unwrap();
    assert_eq!(a, b);
    assert!(matches!(a[0], Err(Error::InfinitePeriod(_))));
    for row in a[1..].iter() {
        let row = row.as_ref().unwrap();
        assert_eq!(row.rate_ghz, 1000.0 / row.t_pulse_ps);
        assert!(row.zeta_le > 0.0);
    }
    let csv = sweep_csv(&fields, &a).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,ERR:infinite-period"));
    assert!(matches!(sweep_field(&p, &[], &opts, None), Err(Error::EmptyRequest(_))));
}

proptest! {
    #[test]
    fn le_length_depends_on_the_ratio(w1 in 0.01..1.0f64, r in 0.01..0.999f64, c in 0.01..100.0f64) {
        let a = le_length(w1, r * w1).unwrap().value();
        let b = le_length(c * w1, c * r * w1).unwrap().value();
        prop_assert!((a - b).abs() <= 1e-9 * a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn witnesses_of_physical_maps_are_bounded(seed in any::<u64>(), rank in 1usize..=8) {
        let map = ProcessMap::random_physical(&mut ChaCha8Rng::seed_from_u64(seed), rank);
        for w in witnesses(&map).unwrap().as_array() {
            prop_assert!(w.abs() <= 1.0 + 1e-9);
        }
    }
}
