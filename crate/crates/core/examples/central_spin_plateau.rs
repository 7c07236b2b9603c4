//! Nuclear-field dephasing of a spin at zero external field: the ensemble
//! average of the z component decays to the one-third plateau.
//!
//! `cargo run --release --example central_spin_plateau -- [samples]`

use qd_cluster::central_spin::ensemble_evolution_series;
use qd_cluster::params::{PhysicalParams, Species};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let samples: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(200_000);
    let params = PhysicalParams {
        b_ext: 0.0,
        a_hh: [0.5, 0.5, 0.5],
        ..PhysicalParams::placeholder()
    };
    // dephasing time 1/a = 2 ns
    let times: Vec<f64> = [0.0, 500.0, 1000.0, 2000.0, 3500.0, 5000.0, 10_000.0, 50_000.0, 200_000.0].to_vec();
    let series = ensemble_evolution_series(&params, Species::HeavyHole, &times, samples, 3)?;
    println!("{:>10}  {:>9}  {:>9}", "t (ps)", "<Sz>/Sz0", "std err");
    for (t, e) in times.iter().zip(&series) {
        println!("{t:>10.0}  {:>9.5}  {:>9.5}", e.tensor.matrix()[(2, 2)], e.std_error[(2, 2)]);
    }
    println!("analytic long-time plateau: {:.5}", 1.0 / 3.0);
    Ok(())
}
