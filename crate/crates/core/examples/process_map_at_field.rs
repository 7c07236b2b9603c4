//! Builds the one-cycle process map at a chosen field with the pulse period
//! tuned for the best `w3`, and reports its quality.
//!
//! `cargo run --release --example process_map_at_field -- [b_tesla] [samples]`

use qd_cluster::channel::{ideal_cycle_map, process_fidelity};
use qd_cluster::cluster::{analyze_field, fit_decay_length, localizable_entanglement_profile, SampleOptions};
use qd_cluster::params::PhysicalParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let b: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.12);
    let samples: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100_000);

    let point = analyze_field(&PhysicalParams::placeholder(), b, &SampleOptions::new(samples, 7), None)?;
    let t = point.timing;
    println!("B = {b} T: T_h/4 = {:.1} ps, correction {:.1} ps, t_pulse = {:.1} ps", t.quarter_period, t.delta, t.t_pulse);
    println!(
        "projection moved the map by {:.2e} (largest element std error {:.2e})",
        point.built.displacement,
        point.built.max_std_error()
    );
    let map = &point.built.map;
    println!("fidelity to ideal: {:.4}", process_fidelity(map, &ideal_cycle_map())?);
    let w = point.row.witnesses;
    println!("witnesses: {:.4} {:.4} {:.4} {:.4}", w.w1, w.w2, w.w3, w.w4);
    println!("zeta from witnesses: {:.2}", point.row.zeta_le);
    let le = localizable_entanglement_profile(map, 6)?;
    println!("localizable entanglement d=1..6: {le:.4?}");
    println!("zeta from LE fit: {}", fit_decay_length(&le)?);
    println!("\nmap rows (spin, photon) x input O X Y Z:");
    let names = ["O", "X", "Y", "Z"];
    for s in 0..4 {
        for p in 0..4 {
            let r: Vec<String> = (0..4).map(|c| format!("{:+.4}", map.get(s, p, c))).collect();
            println!("  {}{}  {}", names[s], names[p], r.join(" "));
        }
    }
    Ok(())
}
