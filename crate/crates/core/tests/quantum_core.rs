use nalgebra::DMatrix;
use proptest::prelude::*;
use qd_cluster::channel::{
    choi_of, ideal_cycle_map, process_fidelity, project_to_physical, PauliState, ProcessMap,
};
use qd_cluster::state::{
    bloch_to_density, density_to_bloch, negativity, state_fidelity, DensityMatrix, SpinVector,
};
use qd_cluster::linalg::C64;
use qd_cluster::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

#[derive(Deserialize)]
struct ChannelOracle {
    ideal_map: Vec<f64>,
    ideal_choi_rank: usize,
    fidelity_ideal_depolarizing: f64,
    perturbed_row: usize,
    perturbed_col: usize,
    perturbation: f64,
    nearest_physical_distance: f64,
}

fn oracle() -> ChannelOracle {
    serde_json::from_str(include_str!("oracles/channel.json")).unwrap()
}

fn ball_point() -> impl Strategy<Value = SpinVector> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.0..=1.0f64).prop_map(|(x, y, z, r)| {
        let n = (x * x + y * y + z * z).sqrt().max(1e-9);
        SpinVector::new(r * x / n, r * y / n, r * z / n).unwrap()
    })
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn bloch_density_examples() {
    let up = bloch_to_density(&SpinVector::new(0.0, 0.0, 1.0).unwrap());
    assert!((up.matrix()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
    assert!(up.matrix()[(1, 1)].norm() < 1e-15);
    let plus_x = bloch_to_density(&SpinVector::new(1.0, 0.0, 0.0).unwrap());
    for v in plus_x.matrix().iter() {
        assert!((v - c(0.5, 0.0)).norm() < 1e-15);
    }
    let plus_y = DensityMatrix::new(DMatrix::from_row_slice(
        2,
        2,
        &[c(0.5, 0.0), c(0.0, -0.5), c(0.0, 0.5), c(0.5, 0.0)],
    ))
    .unwrap();
    let s = density_to_bloch(&plus_y).unwrap();
    assert!((s.y() - 1.0).abs() < 1e-15 && s.x().abs() < 1e-15 && s.z().abs() < 1e-15);
    assert!(SpinVector::new(1.0, 1.0, 0.0).is_err());
}

#[test]
fn fidelity_examples() {
    let up = bloch_to_density(&SpinVector::new(0.0, 0.0, 1.0).unwrap());
    let down = bloch_to_density(&SpinVector::new(0.0, 0.0, -1.0).unwrap());
    let mixed = bloch_to_density(&SpinVector::zero());
    assert!((state_fidelity(&up, &up).unwrap() - 1.0).abs() < 1e-12);
    assert!(state_fidelity(&up, &down).unwrap().abs() < 1e-12);
    assert!((state_fidelity(&up, &mixed).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn bell_negativity_is_half() {
    let mut r = [0.0; 16];
    r[0] = 1.0;
    r[5] = 1.0;
    r[10] = -1.0;
    r[15] = 1.0;
    let bell = DensityMatrix::from_pauli_pair(&r).unwrap();
    assert!((negativity(&bell).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn ideal_map_matches_dense_oracle() {
    let o = oracle();
    let ideal = ideal_cycle_map();
    for (a, b) in ideal.data().iter().zip(&o.ideal_map) {
        assert!((a - b).abs() < 1e-12);
    }
    let choi = choi_of(&ideal);
    assert_eq!(choi.rank(1e-9), o.ideal_choi_rank);
    assert!(choi.is_psd());
}

#[test]
fn depolarizing_fidelity_matches_oracle() {
    let f = process_fidelity(&ideal_cycle_map(), &ProcessMap::fully_depolarizing()).unwrap();
    assert!((f - oracle().fidelity_ideal_depolarizing).abs() < 1e-12, "{f}");
}

#[test]
fn identity_with_photon_choi() {
    let map = ProcessMap::identity_with_photon([0.0, 0.0, 1.0]);
    let choi = choi_of(&map);
    // maximally entangled pair (unnormalized, trace 2) with the photon in |0>
    let mut expected = DMatrix::from_element(8, 8, c(0.0, 0.0));
    for a in [0usize, 3] {
        for b in [0usize, 3] {
            // index = 4 * input + 2 * spin + photon; |00> + |11> on (input, spin)
            let ia = if a == 0 { 0 } else { 4 + 2 };
            let ib = if b == 0 { 0 } else { 4 + 2 };
            expected[(ia, ib)] = c(1.0, 0.0);
        }
    }
    assert!((choi.matrix() - expected).norm() < 1e-12);
}

#[test]
fn broken_normalization_is_rejected() {
    let mut map = ideal_cycle_map();
    map.set(0, 0, 0, 0.9);
    assert!(!choi_of(&map).is_trace_preserving(1e-9));
    assert!(matches!(map.check_physical(), Err(Error::InvalidChannel(_))));
    assert!(process_fidelity(&map, &ideal_cycle_map()).is_err());
}

#[test]
fn projection_matches_semidefinite_oracle() {
    let o = oracle();
    let mut map = ideal_cycle_map();
    let (s, p) = (o.perturbed_row / 4, o.perturbed_row % 4);
    map.set(s, p, o.perturbed_col, map.get(s, p, o.perturbed_col) + o.perturbation);
    assert!(!map.is_physical());
    let projected = project_to_physical(&map).unwrap();
    assert!(projected.is_physical());
    let d = projected.frobenius_distance(&map);
    assert!((d - o.nearest_physical_distance).abs() < 1e-7, "{d} vs {}", o.nearest_physical_distance);
    assert!(d <= o.perturbation);
}

#[test]
fn projection_fixed_points() {
    let ideal = ideal_cycle_map();
    assert_eq!(project_to_physical(&ideal).unwrap(), ideal);
    let fixed = project_to_physical(&ProcessMap::zeros()).unwrap();
    assert!(fixed.is_physical());
    assert_eq!(fixed.row(0), [1.0, 0.0, 0.0, 0.0]);
}

#[test]
fn ideal_witness_contractions_are_exact() {
    let ideal = ideal_cycle_map();
    for s in [
        SpinVector::new(0.0, 0.0, 1.0).unwrap(),
        SpinVector::new(1.0, 0.0, 0.0).unwrap(),
        SpinVector::new(0.0, -1.0, 0.0).unwrap(),
    ] {
        let r1 = PauliState::from_spin(&s).apply_map(0, &ideal);
        let r2 = r1.apply_map(0, &ideal);
        let r3 = r2.apply_map(0, &ideal);
        assert!((r1.expectation(&[2, 3]) - 1.0).abs() < 1e-12);
        assert!(r2.expectation(&[0, 3, 3]).abs() < 1e-12);
        assert!((r2.expectation(&[3, 3, 1]) - 1.0).abs() < 1e-12);
        assert!((-r3.expectation(&[0, 3, 1, 3]) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn fidelity_of_random_maps_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let a = ProcessMap::random_physical(&mut rng, 3);
        let b = ProcessMap::random_physical(&mut rng, 2);
        let ab = process_fidelity(&a, &b).unwrap();
        let ba = process_fidelity(&b, &a).unwrap();
        assert!((ab - ba).abs() < 1e-9);
        assert!((process_fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn map_json_shape() {
    let json = serde_json::to_value(ideal_cycle_map()).unwrap();
    assert_eq!(json["rows"], 16);
    assert_eq!(json["cols"], 4);
    assert_eq!(json["data"].as_array().unwrap().len(), 64);
    let back: ProcessMap = serde_json::from_value(json).unwrap();
    assert_eq!(back, ideal_cycle_map());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn bloch_round_trip(s in ball_point()) {
        let rho = bloch_to_density(&s);
        let back = bloch_to_density(&density_to_bloch(&rho).unwrap());
        prop_assert!((rho.matrix() - back.matrix()).norm() < 1e-12);
    }

    #[test]
    fn state_fidelity_is_symmetric(a in ball_point(), b in ball_point()) {
        let (ra, rb) = (bloch_to_density(&a), bloch_to_density(&b));
        let f = state_fidelity(&ra, &rb).unwrap();
        prop_assert!((f - state_fidelity(&rb, &ra).unwrap()).abs() < 1e-9);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_is_idempotent(seed in any::<u64>(), scale in 0.01..0.5f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = ProcessMap::random_physical(&mut rng, 4);
        let noise = ProcessMap::random_physical(&mut rng, 1);
        let mut data = *base.data();
        for (d, (n, k)) in data.iter_mut().zip(noise.data().iter().zip(0..)) {
            *d += scale * n * if k % 3 == 0 { -1.0 } else { 1.0 };
        }
        let once = project_to_physical(&ProcessMap::from_data(data)).unwrap();
        prop_assert!(choi_of(&once).min_eigenvalue() >= -1e-9);
        prop_assert!(once.tp_deviation() < 1e-9);
        let twice = project_to_physical(&once).unwrap();
        prop_assert!(twice.frobenius_distance(&once) < 1e-10);
    }
}
