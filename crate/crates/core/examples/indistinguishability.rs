//! Photon indistinguishability from emitter timescales, from HOM
//! coincidence areas, and from a measured field-dependence table.
//!
//! `cargo run --release --example indistinguishability`

use qd_cluster::indist::{hom_from_areas, indistinguishability, EmitterTimescales, IndTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let hh = EmitterTimescales::new(20.0, 400.0, f64::INFINITY)?;
    println!("HH-trion photons (20 ps jitter, 400 ps lifetime): {:.3}", indistinguishability(&hh)?);

    for tau_init in [0.0, 50.0, 200.0] {
        for tau_final in [f64::INFINITY, 1000.0, 100.0] {
            let t = EmitterTimescales::new(tau_init, 400.0, tau_final)?;
            println!("  tau_init {tau_init:>5} ps, tau_final {tau_final:>6} ps -> {:.3}", indistinguishability(&t)?);
        }
    }

    println!("HOM areas 5 : 100 -> {:.2}", hom_from_areas(5.0, 100.0)?);

    let table = IndTable::parse("b_tesla,i_nd\n0.0,0.95\n0.09,0.90\n0.3,0.5\n")?;
    for b in [0.0, 0.05, 0.12, 0.3] {
        println!("table I_nd({b} T) = {:.3}", table.at(b));
    }
    Ok(())
}
