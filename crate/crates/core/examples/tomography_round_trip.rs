//! Generates a synthetic polarization-tomography dataset from a known map,
//! optionally with shot noise, and reconstructs the map from it.
//!
//! `cargo run --release --example tomography_round_trip -- [shots] [trials]`

use qd_cluster::channel::{ideal_cycle_map, process_fidelity, ProcessMap};
use qd_cluster::params::PhysicalParams;
use qd_cluster::tomography::{generate_dataset, reconstruct_map, TomographyMeta};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let shots: Option<u64> = args.next().map(|s| s.parse()).transpose()?.filter(|s| *s > 0);
    let trials: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);

    // readout needs visible trion precession inside the 3-lifetime window
    let params = PhysicalParams {
        g_trion: [0.45, 0.45, 0.45],
        ..PhysicalParams::placeholder()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..trials {
        let truth = if trial == 0 { ideal_cycle_map() } else { ProcessMap::random_physical(&mut rng, 4) };
        let mut meta = TomographyMeta::new(params.clone(), 100 + trial);
        meta.shots = shots;
        let data = generate_dataset(&truth, &meta)?;
        let report = reconstruct_map(&data)?;
        let f = process_fidelity(&report.map, &truth)?;
        println!(
            "trial {trial}: fidelity {f:.6}, residual {:.3e}, {} refinement steps",
            report.residual,
            report.iterations.len() - 1
        );
    }
    Ok(())
}
