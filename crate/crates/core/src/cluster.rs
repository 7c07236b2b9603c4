//! Cluster-state figures of merit: witnesses, localizable entanglement and
//! field sweeps.
//!
//! Photon polarizations use the Stokes basis (`Z` circular, `X`/`Y`
//! linear). A spin-up HH emits a `-Z` photon, so correlators between a
//! photon and the spin that emitted it carry a minus sign relative to the
//! textbook cluster stabilizers; the witnesses below absorb it so the ideal
//! protocol gives `(1, 0, 1, 1)`.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{PauliState, ProcessMap};
use crate::cycle::{BuiltMap, CycleTensors};
use crate::error::{Error, Result};
use crate::indist::{indistinguishability, EmitterTimescales, IndTable};
use crate::params::{PhysicalParams, Species};
use crate::state::{negativity, SpinVector};

const O: usize = 0;
const X: usize = 1;
const Y: usize = 2;
const Z: usize = 3;

const STEADY_TOL: f64 = 1e-12;
const STEADY_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessSet {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
}

impl WitnessSet {
    pub fn as_array(&self) -> [f64; 4] {
        [self.w1, self.w2, self.w3, self.w4]
    }
}

/// Fixed point of the photon-traced spin map, by power iteration. Falls
/// back to a least-squares solve of `(I - A) s = b` for maps whose spin
/// part has a unimodular eigenvalue.
pub fn steady_state(map: &ProcessMap) -> SpinVector {
    let a = nalgebra::Matrix3::from_fn(|i, k| map.get(i + 1, O, k + 1));
    let b = nalgebra::Vector3::from_fn(|i, _| map.get(i + 1, O, 0));
    let mut s = nalgebra::Vector3::zeros();
    for _ in 0..STEADY_MAX_ITER {
        let next = a * s + b;
        let done = (next - s).norm() < STEADY_TOL;
        s = next;
        if done {
            return clamp(s);
        }
    }
    let lhs = nalgebra::Matrix3::identity() - a;
    match lhs.svd(true, true).solve(&b, 1e-9) {
        Ok(v) if v.norm() <= 1.0 + 1e-9 => clamp(v),
        _ => clamp(s),
    }
}

fn clamp(v: nalgebra::Vector3<f64>) -> SpinVector {
    let n = v.norm();
    SpinVector::from_vector(if n > 1.0 { v / n } else { v }).expect("clamped")
}

/// The four cluster-state witnesses for photons `n-1, n, n+1` and the spin,
/// starting from the steady state.
pub fn witnesses(map: &ProcessMap) -> Result<WitnessSet> {
    map.check_physical()?;
    let s = PauliState::from_spin(&steady_state(map));
    // qubits: spin, photon n-1
    let r1 = s.apply_map(0, map);
    let w1 = r1.expectation(&[Y, Z]);
    // spin, photon n-1, photon n
    let r2 = r1.apply_map(0, map);
    let w2 = r2.expectation(&[O, Z, Z]);
    let w3 = r2.expectation(&[Z, Z, X]);
    // spin, photon n-1, photon n, photon n+1
    let r3 = r2.apply_map(0, map);
    let w4 = -r3.expectation(&[O, Z, X, Z]);
    Ok(WitnessSet { w1, w2, w3, w4 })
}

/// Decay length in photons, or `Infinite` when there is no decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeLength {
    Finite(f64),
    Infinite,
}

impl LeLength {
    /// Finite value or `f64::INFINITY`.
    pub fn value(&self) -> f64 {
        match self {
            LeLength::Finite(v) => *v,
            LeLength::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for LeLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeLength::Finite(v) => write!(f, "{v}"),
            LeLength::Infinite => write!(f, "inf"),
        }
    }
}

/// `-1 / ln(w3 / w1)`.
pub fn le_length(w1: f64, w3: f64) -> Result<LeLength> {
    if !(w1 > 0.0) || !(w3 > 0.0) {
        return Err(Error::Domain(format!("witnesses must be positive, got w1={w1}, w3={w3}")));
    }
    if w3 > w1 {
        return Err(Error::Domain(format!("w3={w3} exceeds w1={w1}")));
    }
    if w3 == w1 {
        return Ok(LeLength::Infinite);
    }
    Ok(LeLength::Finite(-1.0 / (w3 / w1).ln()))
}

/// Outcome-averaged negativity between the photon of cycle `k` and the spin
/// after `distance` further cycles whose photons are measured in X.
///
/// The photon of cycle `k-1` is measured in Z first; from the mixed steady
/// state this heralds the pure spin that anchors the chain.
pub fn localizable_entanglement(map: &ProcessMap, distance: usize) -> Result<f64> {
    Ok(*localizable_entanglement_profile(map, distance)?.last().expect("distance >= 1"))
}

/// [`localizable_entanglement`] for every distance `1..=max_distance`.
pub fn localizable_entanglement_profile(map: &ProcessMap, max_distance: usize) -> Result<Vec<f64>> {
    if max_distance == 0 {
        return Err(Error::Domain("distance must be at least 1".into()));
    }
    map.check_physical()?;
    let start = PauliState::from_spin(&steady_state(map)).apply_map(0, map);
    // qubits: spin, photon k
    let mut branches: Vec<PauliState> = [1.0, -1.0]
        .iter()
        .map(|&sg| start.project(1, [0.0, 0.0, sg]).apply_map(0, map))
        .collect();
    let mut out = Vec::with_capacity(max_distance);
    for _ in 0..max_distance {
        let mut next = Vec::with_capacity(2 * branches.len());
        for b in &branches {
            let grown = b.apply_map(0, map);
            for sg in [1.0, -1.0] {
                let p = grown.project(2, [sg, 0.0, 0.0]);
                if p.probability() > 1e-14 {
                    next.push(p);
                }
            }
        }
        branches = next;
        let mut total = 0.0;
        for b in &branches {
            total += b.probability() * negativity(&b.to_density()?)?;
        }
        out.push(total);
    }
    Ok(out)
}

/// Decay length from a least-squares line through `ln(values[d-1])` vs `d`.
pub fn fit_decay_length(values: &[f64]) -> Result<LeLength> {
    if values.len() < 2 {
        return Err(Error::EmptyRequest("need at least two distances to fit".into()));
    }
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("entanglement must be positive to fit a decay".into()));
    }
    let n = values.len() as f64;
    let xs: Vec<f64> = (1..=values.len()).map(|d| d as f64).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    if slope >= 0.0 {
        return Ok(LeLength::Infinite);
    }
    Ok(LeLength::Finite(-1.0 / slope))
}

/// Monte-Carlo settings shared by the field-dependent analyses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOptions {
    pub n_samples: usize,
    pub seed: u64,
    pub n_time_steps: usize,
    /// Samples per evaluation inside the timing search.
    pub search_samples: usize,
}

impl SampleOptions {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            n_time_steps: crate::cycle::DEFAULT_TIME_STEPS,
            search_samples: n_samples.min(DEFAULT_SEARCH_SAMPLES),
        }
    }
}

pub const DEFAULT_SEARCH_SAMPLES: usize = 4096;
const GOLDEN_ITERATIONS: usize = 30;

/// Pulse period chosen for one field value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseTiming {
    pub quarter_period: f64,
    pub delta: f64,
    pub t_pulse: f64,
}

/// Quarter HH precession period plus the radiative correction `delta` that
/// maximizes `w3`. The correction is searched over
/// `[0, min(T_h/4, 8 tau_photon)]`, since emission is over well within
/// eight lifetimes.
pub fn pulse_timing(params: &PhysicalParams, b_ext: f64, opts: &SampleOptions) -> Result<PulseTiming> {
    let mut p = params.clone();
    p.b_ext = b_ext;
    let quarter = p.larmor_period(Species::HeavyHole) / 4.0;
    if !quarter.is_finite() {
        return Err(Error::InfinitePeriod(b_ext));
    }
    let upper = quarter.min(crate::cycle::TAIL_LIFETIMES * p.tau_photon);
    let n = opts.search_samples.max(1);
    let w3 = |delta: f64| -> Result<f64> {
        let mut q = p.clone();
        q.t_pulse = quarter + delta;
        let t = CycleTensors::compute(&q, n, opts.seed, opts.n_time_steps)?;
        Ok(witnesses(&BuiltMap::from_tensors(&t)?.map)?.w3)
    };
    let delta = golden_max(w3, 0.0, upper, GOLDEN_ITERATIONS)?;
    Ok(PulseTiming {
        quarter_period: quarter,
        delta,
        t_pulse: quarter + delta,
    })
}

fn golden_max(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, iters: usize) -> Result<f64> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// One field point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub b_tesla: f64,
    pub witnesses: WitnessSet,
    /// `inf` when `w3 >= w1`, zero when `w3 <= 0`.
    #[serde(serialize_with = "ser_maybe_inf")]
    pub zeta_le: f64,
    pub indistinguishability: f64,
    pub rate_ghz: f64,
    pub t_pulse_ps: f64,
}

fn ser_maybe_inf<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

/// Witness-ratio decay length with the sweep's edge conventions.
pub fn sweep_zeta(w: &WitnessSet) -> f64 {
    if w.w3 <= 0.0 || w.w1 <= 0.0 {
        0.0
    } else if w.w3 >= w.w1 {
        f64::INFINITY
    } else {
        le_length(w.w1, w.w3).map(|l| l.value()).unwrap_or(0.0)
    }
}

/// Everything computed at one field: timing, map and the sweep row.
#[derive(Debug, Clone)]
pub struct FieldPoint {
    pub timing: PulseTiming,
    pub params: PhysicalParams,
    pub built: BuiltMap,
    pub row: SweepRow,
}

pub fn analyze_field(
    params: &PhysicalParams,
    b_ext: f64,
    opts: &SampleOptions,
    table: Option<&IndTable>,
) -> Result<FieldPoint> {
    let timing = pulse_timing(params, b_ext, opts)?;
    let mut p = params.clone();
    p.b_ext = b_ext;
    p.t_pulse = timing.t_pulse;
    let t = CycleTensors::compute(&p, opts.n_samples, opts.seed, opts.n_time_steps)?;
    let built = BuiltMap::from_tensors(&t)?;
    let w = witnesses(&built.map)?;
    let ind = match table {
        Some(t) => t.at(b_ext),
        None => indistinguishability(&EmitterTimescales::from_params(&p))?,
    };
    let row = SweepRow {
        b_tesla: b_ext,
        witnesses: w,
        zeta_le: sweep_zeta(&w),
        indistinguishability: ind,
        rate_ghz: 1000.0 / timing.t_pulse,
        t_pulse_ps: timing.t_pulse,
    };
    Ok(FieldPoint { timing, params: p, built, row })
}

/// One row per field, in input order; failures are reported per row.
pub fn sweep_field(
    params: &PhysicalParams,
    b_values: &[f64],
    opts: &SampleOptions,
    table: Option<&IndTable>,
) -> Result<Vec<Result<SweepRow>>> {
    if b_values.is_empty() {
        return Err(Error::EmptyRequest("no field values to sweep".into()));
    }
    params.validate()?;
    Ok(b_values
        .par_iter()
        .map(|&b| analyze_field(params, b, opts, table).map(|f| f.row))
        .collect())
}

pub const CSV_HEADER: &str = "b_tesla,w1,w2,w3,w4,zeta_le,indistinguishability,rate_ghz";

fn error_marker(e: &Error) -> &'static str {
    match e {
        Error::InfinitePeriod(_) => "ERR:infinite-period",
        Error::DegenerateConditioning(_) => "ERR:degenerate-conditioning",
        Error::NoConvergence { .. } => "ERR:no-convergence",
        _ => "ERR:numerical",
    }
}

/// CSV text for sweep rows; failed rows keep their field and carry an
/// error marker in the first value column.
pub fn sweep_csv(b_values: &[f64], rows: &[Result<SweepRow>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER.split(',')).map_err(io)?;
    for (b, row) in b_values.iter().zip(rows) {
        match row {
            Ok(r) => {
                let ws = r.witnesses;
                let zeta = if r.zeta_le.is_infinite() { "inf".to_string() } else { r.zeta_le.to_string() };
                w.write_record([
                    r.b_tesla.to_string(),
                    ws.w1.to_string(),
                    ws.w2.to_string(),
                    ws.w3.to_string(),
                    ws.w4.to_string(),
                    zeta,
                    r.indistinguishability.to_string(),
                    r.rate_ghz.to_string(),
                ])
                .map_err(io)?;
            }
            Err(e) => {
                let mut rec = vec![b.to_string(), error_marker(e).to_string()];
                rec.extend(std::iter::repeat_n(String::new(), 6));
                w.write_record(rec).map_err(io)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Serialize)]
struct JsonRow<'a> {
    b_tesla: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    row: Option<&'a SweepRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// JSON mirror of [`sweep_csv`].
pub fn sweep_json(b_values: &[f64], rows: &[Result<SweepRow>]) -> Result<String> {
    let out: Vec<JsonRow> = b_values
        .iter()
        .zip(rows)
        .map(|(b, r)| match r {
            Ok(row) => JsonRow { b_tesla: *b, row: Some(row), error: None },
            Err(e) => JsonRow {
                b_tesla: *b,
                row: None,
                error: Some(format!("{}: {e}", error_marker(e))),
            },
        })
        .collect();
    Ok(serde_json::to_string_pretty(&out)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ideal_cycle_map;

    #[test]
    fn ideal_witnesses() {
        let w = witnesses(&ideal_cycle_map()).unwrap();
        for (a, b) in w.as_array().iter().zip([1.0, 0.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-12, "{w:?}");
        }
    }

    #[test]
    fn depolarizing_witnesses_vanish() {
        let w = witnesses(&ProcessMap::fully_depolarizing()).unwrap();
        assert!(w.as_array().iter().all(|v| v.abs() < 1e-15));
        assert_eq!(localizable_entanglement(&ProcessMap::fully_depolarizing(), 1).unwrap(), 0.0);
    }

    #[test]
    fn ideal_le_is_flat() {
        let le = localizable_entanglement_profile(&ideal_cycle_map(), 6).unwrap();
        for v in le {
            assert!((v - 0.5).abs() < 1e-12);
        }
        assert!(localizable_entanglement(&ideal_cycle_map(), 0).is_err());
    }

    #[test]
    fn le_length_cases() {
        let w1 = 0.8;
        assert!((le_length(w1, w1 * (-0.1f64).exp()).unwrap().value() - 10.0).abs() < 1e-12);
        assert_eq!(le_length(0.5, 0.5).unwrap(), LeLength::Infinite);
        assert!(le_length(0.5, 0.6).is_err());
        assert!(le_length(0.0, 0.0).is_err());
        assert!(le_length(0.5, -0.1).is_err());
    }

    #[test]
    fn decay_fit_recovers_length() {
        let v: Vec<f64> = (1..=6).map(|d| 0.4 * (-(d as f64) / 7.0).exp()).collect();
        assert!((fit_decay_length(&v).unwrap().value() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn zero_field_row_is_flagged() {
        let p = PhysicalParams::placeholder();
        let opts = SampleOptions::new(16, 1);
        let rows = sweep_field(&p, &[0.0], &opts, None).unwrap();
        assert!(matches!(rows[0], Err(Error::InfinitePeriod(_))));
        let csv = sweep_csv(&[0.0], &rows).unwrap();
        assert_eq!(csv.lines().nth(1).unwrap(), "0,ERR:infinite-period,,,,,,");
    }
}
