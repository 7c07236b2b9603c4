//! The ideal protocol cycle and the physical model in its ideal limit.
//!
//! `cargo run --release --example ideal_protocol`

use qd_cluster::channel::{choi_of, ideal_cycle_map, process_fidelity};
use qd_cluster::cluster::{localizable_entanglement_profile, witnesses};
use qd_cluster::cycle::build_process_map;
use qd_cluster::params::PhysicalParams;
use qd_cluster::state::SpinVector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ideal = ideal_cycle_map();
    println!("ideal map Choi rank: {}", choi_of(&ideal).rank(1e-9));

    let up = SpinVector::new(0.0, 0.0, 1.0)?;
    let r = ideal.apply(&up);
    println!("spin up -> photon <Z> = {:+.3}, spin = ({:+.3}, {:+.3}, {:+.3})", r[3], r[4], r[8], r[12]);

    let w = witnesses(&ideal)?;
    println!("witnesses: {:.3} {:.3} {:.3} {:.3}", w.w1, w.w2, w.w3, w.w4);
    println!("localizable entanglement d=1..6: {:.3?}", localizable_entanglement_profile(&ideal, 6)?);

    let params = PhysicalParams::ideal_limit(0.12);
    println!("\nideal-limit parameters:\n{}", params.to_config_string());
    let built = build_process_map(&params, 1_000, 1, 64)?;
    println!("fidelity of the modelled map to the ideal one: {:.9}", process_fidelity(&built, &ideal)?);
    Ok(())
}
