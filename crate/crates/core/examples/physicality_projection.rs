//! Projects unphysical maps onto the completely positive, trace-preserving
//! set and reports how far they moved.
//!
//! `cargo run --release --example physicality_projection`

use qd_cluster::channel::{choi_of, ideal_cycle_map, project_to_physical, ProcessMap};

fn report(name: &str, m: &ProcessMap) -> Result<(), Box<dyn std::error::Error>> {
    let p = project_to_physical(m)?;
    println!(
        "{name:<28} min eig {:+.2e} -> {:+.2e}, TP dev {:.1e} -> {:.1e}, moved {:.3e}",
        choi_of(m).min_eigenvalue(),
        choi_of(&p).min_eigenvalue(),
        m.tp_deviation(),
        p.tp_deviation(),
        p.frobenius_distance(m)
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ideal = ideal_cycle_map();
    report("ideal (already physical)", &ideal)?;

    let mut bumped = ideal.clone();
    bumped.set(3, 3, 0, bumped.get(3, 3, 0) + 0.001);
    report("ideal, ZZ/O element +0.001", &bumped)?;

    let mut noisy = ideal.clone();
    for (k, v) in [(5usize, 0.05), (22, -0.04), (41, 0.03), (63, 0.1)] {
        let (s, p, c) = (k / 16, (k / 4) % 4, k % 4);
        noisy.set(s, p, c, noisy.get(s, p, c) + v);
    }
    report("ideal with assorted errors", &noisy)?;
    report("zero matrix", &ProcessMap::zeros())?;
    Ok(())
}
