use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;
use qd_cluster::central_spin::{
    ensemble_evolution, ensemble_evolution_series, evolution_tensor, sample_overhauser,
    NuclearField,
};
use qd_cluster::params::{PhysicalParams, Species};

fn larmor_only(b: f64) -> PhysicalParams {
    PhysicalParams {
        a_hh: [0.0; 3],
        a_trion: [0.0; 3],
        g_hh: [0.3, 0.3, 0.3],
        b_ext: b,
        ..PhysicalParams::placeholder()
    }
}

fn zero_field_isotropic() -> PhysicalParams {
    PhysicalParams {
        b_ext: 0.0,
        a_hh: [0.5, 0.5, 0.5],
        ..PhysicalParams::placeholder()
    }
}

#[test]
fn overhauser_moments() {
    let n = 1_000_000;
    let s = sample_overhauser(5, n).unwrap();
    for axis in 0..3 {
        let mean = s.iter().map(|f| f.0[axis]).sum::<f64>() / n as f64;
        let var = s.iter().map(|f| (f.0[axis] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.004, "axis {axis} mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "axis {axis} variance {var}");
    }
    assert_eq!(sample_overhauser(5, 100).unwrap(), s[..100].to_vec());
    assert!(sample_overhauser(5, 0).is_err());
}

#[test]
fn zero_time_is_identity_for_any_ensemble() {
    let p = PhysicalParams::placeholder();
    let g = ensemble_evolution(&p, Species::HeavyHole, 0.0, 500, 9).unwrap();
    assert_eq!(*g.matrix(), Matrix3::identity());
}

#[test]
fn quarter_larmor_turn() {
    let p = larmor_only(0.1);
    let t = p.larmor_period(Species::HeavyHole) / 4.0;
    let g = evolution_tensor(&p, Species::HeavyHole, &NuclearField::zero(), t).unwrap();
    let out = g.apply(&Vector3::z());
    assert!((out - Vector3::new(0.0, -1.0, 0.0)).norm() < 1e-12, "{out}");
}

#[test]
fn no_field_no_motion() {
    let p = larmor_only(0.0);
    for t in [0.0, 10.0, 1e6] {
        let g = evolution_tensor(&p, Species::Trion, &NuclearField::zero(), t).unwrap();
        assert_eq!(*g.matrix(), Matrix3::identity());
    }
}

#[test]
fn no_hyperfine_has_no_variance() {
    let p = larmor_only(0.2);
    let single = evolution_tensor(&p, Species::HeavyHole, &NuclearField::zero(), 733.0).unwrap();
    let e = &ensemble_evolution_series(&p, Species::HeavyHole, &[733.0], 1000, 4).unwrap()[0];
    assert!((e.tensor.matrix() - single.matrix()).norm() < 1e-12);
    assert!(e.std_error.norm() < 1e-12);
}

#[test]
fn ensembles_are_contractions() {
    let p = PhysicalParams::placeholder();
    let times: Vec<f64> = (0..20).map(|k| 250.0 * k as f64).collect();
    for species in [Species::HeavyHole, Species::Trion] {
        for e in ensemble_evolution_series(&p, species, &times, 5000, 2).unwrap() {
            assert!(e.tensor.max_singular_value() <= 1.0 + 1e-9);
        }
    }
}

#[test]
fn seed_change_stays_within_sampling_error() {
    let p = zero_field_isotropic();
    let times = [1000.0, 3000.0, 20_000.0];
    let a = ensemble_evolution_series(&p, Species::HeavyHole, &times, 100_000, 1).unwrap();
    let b = ensemble_evolution_series(&p, Species::HeavyHole, &times, 100_000, 2).unwrap();
    for (x, y) in a.iter().zip(&b) {
        let diff = x.tensor.matrix()[(2, 2)] - y.tensor.matrix()[(2, 2)];
        let se = x.std_error[(2, 2)].hypot(y.std_error[(2, 2)]);
        assert!(diff.abs() < 2.0 * se, "diff {diff}, se {se}");
    }
}

#[test]
fn no_hyperfine_is_periodic() {
    let p = larmor_only(0.17);
    let period = p.larmor_period(Species::HeavyHole);
    for t in [0.0, 123.0, 4567.0] {
        let a = ensemble_evolution(&p, Species::HeavyHole, t, 10, 3).unwrap();
        let b = ensemble_evolution(&p, Species::HeavyHole, t + period, 10, 3).unwrap();
        assert!((a.matrix() - b.matrix()).norm() < 1e-12);
    }
}

#[test]
fn zero_field_approaches_one_third() {
    let p = zero_field_isotropic();
    let e = &ensemble_evolution_series(&p, Species::HeavyHole, &[200_000.0], 200_000, 8).unwrap()[0];
    let m = e.tensor.matrix();
    for i in 0..3 {
        assert!((m[(i, i)] - 1.0 / 3.0).abs() < 4.0 * e.std_error[(i, i)].max(1e-3));
    }
}

fn params_strategy() -> impl Strategy<Value = (PhysicalParams, NuclearField)> {
    (
        prop::array::uniform3(0.0..3.0f64),
        prop::array::uniform3(0.0..1.0f64),
        0.0..0.5f64,
        prop::array::uniform3(-3.0..3.0f64),
    )
        .prop_map(|(g, a, b, nf)| {
            let p = PhysicalParams {
                g_hh: g,
                a_hh: a,
                b_ext: b,
                ..PhysicalParams::placeholder()
            };
            (p, NuclearField(Vector3::from(nf)))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn single_realization_is_orthogonal((p, nf) in params_strategy(), t in 0.0..20_000.0f64) {
        let g = evolution_tensor(&p, Species::HeavyHole, &nf, t).unwrap();
        prop_assert!(g.orthogonality_error() < 1e-12);
    }

    #[test]
    fn evolution_composes((p, nf) in params_strategy(), t1 in 0.0..5000.0f64, t2 in 0.0..5000.0f64) {
        let g1 = evolution_tensor(&p, Species::HeavyHole, &nf, t1).unwrap();
        let g2 = evolution_tensor(&p, Species::HeavyHole, &nf, t2).unwrap();
        let g12 = evolution_tensor(&p, Species::HeavyHole, &nf, t1 + t2).unwrap();
        prop_assert!((g12.matrix() - g2.matrix() * g1.matrix()).norm() < 1e-12);
    }
}
