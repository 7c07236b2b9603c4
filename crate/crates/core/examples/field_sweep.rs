//! Sweeps the external field with the placeholder parameters and prints the
//! witnesses, decay length, indistinguishability and repetition rate.
//!
//! `cargo run --release --example field_sweep -- [points] [samples]`

use qd_cluster::cluster::{sweep_csv, sweep_field, SampleOptions};
use qd_cluster::params::PhysicalParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let points: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(12);
    let samples: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20_000);

    let params = PhysicalParams::placeholder();
    let (lo, hi) = (0.03f64, 0.3f64);
    let fields: Vec<f64> = (0..points)
        .map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64))
        .collect();
    let rows = sweep_field(&params, &fields, &SampleOptions::new(samples, 2024), None)?;
    print!("{}", sweep_csv(&fields, &rows)?);
    Ok(())
}
