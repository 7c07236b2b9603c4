//! Synthetic polarization tomography of the one-cycle map.
//!
//! A known spin is fed through the map, the emitted photon is optionally
//! projected, and the remaining spin is read out by re-exciting it to the
//! trion and recording the time-resolved circular polarization of the
//! emission, `D_cp(t) = e_z . G_tr(t) R_a S`. Trion precession about the
//! in-plane field turns `S_y` into `S_z`; the `Y` analysis setting first
//! rotates the spin a quarter turn about the growth axis so `S_x` is
//! revealed as well.
//!
//! Each trace also carries the herald probability of its photon projection,
//! which fixes the photon-only rows of the map.

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector, Vector3};
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::central_spin::ensemble_evolution_series;
use crate::channel::{project_to_physical, ProcessMap};
use crate::error::{Error, Result};
use crate::mc;
use crate::params::{PhysicalParams, Species};
use crate::state::{SpinVector, StokesVector};

pub const DEFAULT_BINS: usize = 50;
pub const DEFAULT_WINDOW_LIFETIMES: f64 = 3.0;
pub const DEFAULT_SAMPLES: usize = 20_000;

/// Seed offset separating shot noise from the nuclear samples.
pub const NOISE_SEED_OFFSET: u64 = 0x5eed_0001;

const MIN_HERALD: f64 = 1e-12;
const MAX_REFINE_ITER: usize = 200;
const REFINE_REL_TOL: f64 = 1e-10;
/// Heralding probabilities are floored here when they divide a linearized
/// row, so nearly forbidden settings cannot swamp the design.
const MIN_LINEARIZATION_PROB: f64 = 0.05;

/// Per-equation residual treated as an exact fit.
const CHI2_FLOOR: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnalysisBasis {
    X,
    Y,
}

impl AnalysisBasis {
    /// Spin rotation applied before the trion readout.
    fn rotate(&self, s: &Vector3<f64>) -> Vector3<f64> {
        match self {
            AnalysisBasis::X => *s,
            AnalysisBasis::Y => Vector3::new(s.y, -s.x, s.z),
        }
    }
}

/// Identifies a trace: initial spin, photon projection (if any) and
/// analysis setting. States use the cardinal labels `+X ... -Z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraceLabel {
    pub init: String,
    pub photon: Option<String>,
    pub analysis: AnalysisBasis,
}

impl std::fmt::Display for TraceLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "init={},photon={},analysis={:?}",
            self.init,
            self.photon.as_deref().unwrap_or("none"),
            self.analysis
        )
    }
}

/// Time-binned circular-polarization trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcpTrace {
    pub label: TraceLabel,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Photons per bin when shot noise is emulated.
    pub counts: Option<Vec<u64>>,
    /// Estimated probability of the photon projection (1 without one).
    pub herald_prob: f64,
    /// Trials behind `herald_prob`; absent for exact traces.
    pub shots: Option<u64>,
}

/// Time binning of the readout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bins {
    pub n: usize,
    /// ps
    pub t_max: f64,
}

impl Bins {
    pub fn default_for(params: &PhysicalParams) -> Self {
        Self {
            n: DEFAULT_BINS,
            t_max: DEFAULT_WINDOW_LIFETIMES * params.tau_photon,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::EmptyRequest("at least one time bin is required".into()));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::InvalidParameter(format!("bin window must be positive, got {}", self.t_max)));
        }
        Ok(())
    }

    pub fn centers(&self) -> Vec<f64> {
        let w = self.t_max / self.n as f64;
        (0..self.n).map(|k| (k as f64 + 0.5) * w).collect()
    }

    /// Fraction of all photons emitted in each bin.
    pub fn emission_fractions(&self, tau: f64) -> Vec<f64> {
        let w = self.t_max / self.n as f64;
        (0..self.n)
            .map(|k| (-(k as f64) * w / tau).exp() - (-((k + 1) as f64) * w / tau).exp())
            .collect()
    }
}

/// Everything that fixes the forward model and the noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyMeta {
    pub params: PhysicalParams,
    pub seed: u64,
    pub n_samples: usize,
    pub bins: Bins,
    pub shots: Option<u64>,
}

impl TomographyMeta {
    pub fn new(params: PhysicalParams, seed: u64) -> Self {
        let bins = Bins::default_for(&params);
        Self {
            params,
            seed,
            n_samples: DEFAULT_SAMPLES,
            bins,
            shots: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographyDataset {
    pub meta: TomographyMeta,
    pub traces: Vec<DcpTrace>,
}

/// Ensemble-averaged `e_z^T G_tr(t)` at the bin centers.
#[derive(Debug, Clone)]
pub struct TrionResponse {
    pub times: Vec<f64>,
    rows: Vec<Vector3<f64>>,
}

impl TrionResponse {
    pub fn compute(meta: &TomographyMeta) -> Result<Self> {
        meta.params.validate()?;
        meta.bins.validate()?;
        let times = meta.bins.centers();
        let series = ensemble_evolution_series(&meta.params, Species::Trion, &times, meta.n_samples, meta.seed)?;
        let rows = series
            .iter()
            .map(|e| e.tensor.matrix().row(2).transpose())
            .collect();
        Ok(Self { times, rows })
    }

    /// Readout kernel `h_t` with `D(t) = h_t . S`.
    fn kernel(&self, basis: AnalysisBasis) -> Vec<Vector3<f64>> {
        // h . (R s) = (R^T h) . s
        self.rows
            .iter()
            .map(|h| match basis {
                AnalysisBasis::X => *h,
                AnalysisBasis::Y => Vector3::new(-h.y, h.x, h.z),
            })
            .collect()
    }

    pub fn dcp(&self, s: &Vector3<f64>, basis: AnalysisBasis) -> Vec<f64> {
        let r = basis.rotate(s);
        self.rows.iter().map(|h| h.dot(&r).clamp(-1.0, 1.0)).collect()
    }
}

fn cardinal_vector(label: &str) -> Result<Vector3<f64>> {
    StokesVector::cardinal(label)
        .map(|m| *m.as_vector())
        .ok_or_else(|| Error::Config(format!("unknown state label {label:?}")))
}

/// `(p, p S')` after one cycle from `init` with the photon projected on `m`
/// (`None` traces the photon out).
pub fn heralded_spin(map: &ProcessMap, init: &SpinVector, m: Option<&Vector3<f64>>) -> (f64, Vector3<f64>) {
    let r = map.apply(init);
    match m {
        None => (r[0], Vector3::new(r[4], r[8], r[12])),
        Some(m) => {
            let p = 0.5 * (r[0] + m.x * r[1] + m.y * r[2] + m.z * r[3]);
            let q = Vector3::from_fn(|i, _| {
                let b = 4 * (i + 1);
                0.5 * (r[b] + m.x * r[b + 1] + m.y * r[b + 2] + m.z * r[b + 3])
            });
            (p, q)
        }
    }
}

fn noiseless_trace(
    map: &ProcessMap,
    label: TraceLabel,
    response: &TrionResponse,
) -> Result<DcpTrace> {
    let init = SpinVector::from_vector(cardinal_vector(&label.init)?)?;
    let m = label.photon.as_deref().map(cardinal_vector).transpose()?;
    let (p, q) = heralded_spin(map, &init, m.as_ref());
    let values = if p < MIN_HERALD {
        vec![0.0; response.times.len()]
    } else {
        response.dcp(&(q / p), label.analysis)
    };
    Ok(DcpTrace {
        label,
        times: response.times.clone(),
        values,
        counts: None,
        herald_prob: p.clamp(0.0, 1.0),
        shots: None,
    })
}

fn add_shot_noise(trace: &mut DcpTrace, shots: u64, fractions: &[f64], seed: u64, index: u64) -> Result<()> {
    let mut rng = mc::sample_rng(seed.wrapping_add(NOISE_SEED_OFFSET), index);
    let bad = |e: rand_distr::BinomialError| Error::InvalidParameter(e.to_string());
    let heralded = Binomial::new(shots, trace.herald_prob).map_err(bad)?.sample(&mut rng);
    let mut counts = Vec::with_capacity(fractions.len());
    for (v, f) in trace.values.iter_mut().zip(fractions) {
        let n = (heralded as f64 * f).round() as u64;
        let plus = Binomial::new(n, (0.5 * (1.0 + *v)).clamp(0.0, 1.0)).map_err(bad)?.sample(&mut rng);
        *v = if n == 0 { 0.0 } else { 2.0 * plus as f64 / n as f64 - 1.0 };
        counts.push(n);
    }
    trace.herald_prob = heralded as f64 / shots as f64;
    trace.counts = Some(counts);
    trace.shots = Some(shots);
    Ok(())
}

/// Simulates one trace. `shots = None` gives the exact expectation values.
#[allow(clippy::too_many_arguments)]
pub fn simulate_dcp(
    params: &PhysicalParams,
    map: &ProcessMap,
    init: &str,
    photon_proj: Option<&str>,
    analysis: AnalysisBasis,
    bins: Bins,
    n_samples: usize,
    seed: u64,
    shots: Option<u64>,
) -> Result<DcpTrace> {
    map.check_physical()?;
    let meta = TomographyMeta {
        params: params.clone(),
        seed,
        n_samples,
        bins,
        shots,
    };
    let response = TrionResponse::compute(&meta)?;
    let label = TraceLabel {
        init: init.to_string(),
        photon: photon_proj.map(str::to_string),
        analysis,
    };
    let mut trace = noiseless_trace(map, label, &response)?;
    if let Some(n) = shots {
        add_shot_noise(&mut trace, n, &bins.emission_fractions(params.tau_photon), seed, 0)?;
    }
    Ok(trace)
}

const CARDINALS: [&str; 6] = ["+X", "-X", "+Y", "-Y", "+Z", "-Z"];

/// The 72 labels: 6 initial spins x 6 photon projections x 2 analyses.
pub fn design_labels() -> Vec<TraceLabel> {
    let mut out = Vec::with_capacity(72);
    for init in CARDINALS {
        for photon in CARDINALS {
            for analysis in [AnalysisBasis::X, AnalysisBasis::Y] {
                out.push(TraceLabel {
                    init: init.into(),
                    photon: Some(photon.into()),
                    analysis,
                });
            }
        }
    }
    out
}

/// Full synthetic dataset for `map`.
pub fn generate_dataset(map: &ProcessMap, meta: &TomographyMeta) -> Result<TomographyDataset> {
    map.check_physical()?;
    if meta.shots == Some(0) {
        return Err(Error::InvalidParameter("shots must be positive".into()));
    }
    let response = TrionResponse::compute(meta)?;
    let fractions = meta.bins.emission_fractions(meta.params.tau_photon);
    let traces = design_labels()
        .into_par_iter()
        .enumerate()
        .map(|(k, label)| {
            let mut t = noiseless_trace(map, label, &response)?;
            if let Some(n) = meta.shots {
                add_shot_noise(&mut t, n, &fractions, meta.seed, k as u64)?;
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TomographyDataset {
        meta: meta.clone(),
        traces,
    })
}

/// One optimizer step of the reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub chi2: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionReport {
    pub map: ProcessMap,
    /// Final weighted sum of squared residuals.
    pub residual: f64,
    pub iterations: Vec<IterationLog>,
    /// Standard error of each map element, row-major like the map.
    pub std_error: Vec<f64>,
    pub n_equations: usize,
}

/// Number of map elements left free once trace preservation fixes the
/// first row.
const N_FREE: usize = 60;

/// A trace prepared for fitting.
struct FitTrace {
    s: [f64; 4],
    m: Vector3<f64>,
    kernel: Vec<Vector3<f64>>,
    values: Vec<f64>,
    /// Per-bin weight on the D residual.
    w_d: Vec<f64>,
    /// Photons per bin; `None` for exact traces.
    counts: Option<Vec<f64>>,
    herald: f64,
    w_h: f64,
    shots: Option<f64>,
}

impl FitTrace {
    /// Coefficients of `p` and `q_i` over the 64 map elements.
    fn coefficients(&self) -> ([f64; 64], [[f64; 64]; 3]) {
        let mut pc = [0.0; 64];
        let mut qc = [[0.0; 64]; 3];
        let mw = [1.0, self.m.x, self.m.y, self.m.z];
        for c in 0..4 {
            for j in 0..4 {
                pc[4 * j + c] = 0.5 * mw[j] * self.s[c];
                for i in 0..3 {
                    qc[i][4 * (4 * (i + 1) + j) + c] = 0.5 * mw[j] * self.s[c];
                }
            }
        }
        (pc, qc)
    }

    fn model(&self, map: &ProcessMap) -> (f64, Vec<f64>) {
        let d = map.data();
        let (pc, qc) = self.coefficients();
        let dot = |c: &[f64; 64]| c.iter().zip(d.iter()).map(|(a, b)| a * b).sum::<f64>();
        let p = dot(&pc);
        let q = Vector3::new(dot(&qc[0]), dot(&qc[1]), dot(&qc[2]));
        let vals = if p < MIN_HERALD {
            vec![0.0; self.values.len()]
        } else {
            self.kernel.iter().map(|h| h.dot(&q) / p).collect()
        };
        (p, vals)
    }

    /// Inverse binomial variances evaluated at the predictions of `map`.
    fn reweight(&mut self, map: &ProcessMap) {
        let (Some(counts), Some(shots)) = (&self.counts, self.shots) else {
            return;
        };
        let (p, vals) = self.model(map);
        self.w_d = counts
            .iter()
            .zip(&vals)
            .map(|(&n, v)| if n == 0.0 { 0.0 } else { n / (1.0 - v * v).max(1.0 / n) })
            .collect();
        self.w_h = shots / (p * (1.0 - p)).max(1.0 / shots);
    }

    fn chi2(&self, map: &ProcessMap) -> f64 {
        let (p, vals) = self.model(map);
        let mut s = self.w_h * (p - self.herald).powi(2);
        for ((v, obs), w) in vals.iter().zip(&self.values).zip(&self.w_d) {
            s += w * (v - obs).powi(2);
        }
        s
    }
}

fn prepare(data: &TomographyDataset) -> Result<Vec<FitTrace>> {
    let present: HashSet<TraceLabel> = data.traces.iter().map(|t| t.label.clone()).collect();
    let missing: Vec<String> = design_labels()
        .into_iter()
        .filter(|l| !present.contains(l))
        .map(|l| l.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Identifiability { missing });
    }
    let response = TrionResponse::compute(&data.meta)?;
    let n_bins = response.times.len();
    let mut out = Vec::with_capacity(data.traces.len());
    for t in &data.traces {
        if t.values.len() != n_bins || t.times.len() != n_bins {
            return Err(Error::DimensionMismatch { left: t.values.len(), right: n_bins });
        }
        let s = cardinal_vector(&t.label.init)?;
        let m = match &t.label.photon {
            Some(l) => cardinal_vector(l)?,
            None => continue,
        };
        // start from count weights; variances come from the first estimate.
        // Exact traces weigh bins by the herald probability, the expected
        // photon number up to a constant.
        let counts = match (&t.counts, t.shots) {
            (Some(c), Some(_)) => Some(c.iter().map(|&n| n as f64).collect::<Vec<f64>>()),
            _ => None,
        };
        let w_d = counts.clone().unwrap_or_else(|| vec![t.herald_prob; n_bins]);
        let shots = t.shots.filter(|_| counts.is_some()).map(|n| n as f64);
        out.push(FitTrace {
            s: [1.0, s.x, s.y, s.z],
            m,
            kernel: response.kernel(t.label.analysis),
            values: t.values.clone(),
            w_d,
            counts,
            herald: t.herald_prob,
            w_h: shots.map_or(1.0, |n| 4.0 * n),
            shots,
        });
    }
    Ok(out)
}

/// Weighted normal equations of the linearized model around `current`
/// (`None` uses the measured herald probabilities).
fn normal_equations(traces: &[FitTrace], current: Option<&ProcessMap>) -> (DMatrix<f64>, DVector<f64>, usize) {
    let mut a = DMatrix::<f64>::zeros(N_FREE, N_FREE);
    let mut b = DVector::<f64>::zeros(N_FREE);
    let mut n_eq = 0;
    let mut add_row = |row: &[f64; 64], rhs: f64, w: f64| {
        if w == 0.0 {
            return;
        }
        // element 0 is fixed to 1, elements 1..3 to 0
        let r = &row[4..];
        let y = rhs - row[0];
        for i in 0..N_FREE {
            if r[i] == 0.0 {
                continue;
            }
            b[i] += w * r[i] * y;
            for j in 0..N_FREE {
                a[(i, j)] += w * r[i] * r[j];
            }
        }
    };
    for t in traces {
        let (pc, qc) = t.coefficients();
        add_row(&pc, t.herald, t.w_h);
        n_eq += 1;
        match current {
            None => {
                // p D = h . q, linear in the map
                let scale = 1.0 / t.herald.max(MIN_LINEARIZATION_PROB).powi(2);
                for ((h, v), w) in t.kernel.iter().zip(&t.values).zip(&t.w_d) {
                    let mut row = [0.0; 64];
                    for e in 0..64 {
                        row[e] = v * pc[e] - (h.x * qc[0][e] + h.y * qc[1][e] + h.z * qc[2][e]);
                    }
                    add_row(&row, 0.0, w * scale);
                    n_eq += 1;
                }
            }
            Some(m0) => {
                // Gauss-Newton on D = h . q / p around m0
                let (p0, f0) = t.model(m0);
                let p0 = p0.max(MIN_LINEARIZATION_PROB);
                for (((h, v), w), f) in t.kernel.iter().zip(&t.values).zip(&t.w_d).zip(&f0) {
                    let mut row = [0.0; 64];
                    let mut jm0 = 0.0;
                    for e in 0..64 {
                        row[e] = (h.x * qc[0][e] + h.y * qc[1][e] + h.z * qc[2][e] - f * pc[e]) / p0;
                        jm0 += row[e] * m0.data()[e];
                    }
                    add_row(&row, v - f + jm0, *w);
                    n_eq += 1;
                }
            }
        }
    }
    (a, b, n_eq)
}

fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(ProcessMap, DMatrix<f64>)> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * 1e-10;
    let rank = svd.singular_values.iter().filter(|s| **s > tol).count();
    if rank < N_FREE {
        return Err(Error::Identifiability {
            missing: vec![format!("design has rank {rank} of {N_FREE}")],
        });
    }
    let x = svd.solve(b, tol).map_err(|e| Error::Domain(e.to_string()))?;
    let inv = svd.pseudo_inverse(tol).map_err(|e| Error::Domain(e.to_string()))?;
    let mut data = [0.0; 64];
    data[0] = 1.0;
    data[4..].copy_from_slice(x.as_slice());
    Ok((ProcessMap::from_data(data), inv))
}

fn total_chi2(traces: &[FitTrace], map: &ProcessMap) -> f64 {
    traces.iter().map(|t| t.chi2(map)).sum()
}

fn blend(a: &ProcessMap, b: &ProcessMap, alpha: f64) -> ProcessMap {
    let mut d = *a.data();
    for (x, y) in d.iter_mut().zip(b.data()) {
        *x += alpha * (y - *x);
    }
    ProcessMap::from_data(d)
}

/// Physical map that best fits the dataset.
///
/// A weighted linear solve of the linearized forward model is projected onto
/// the CPTP set; the fit is then refined by re-linearizing around the
/// current estimate and taking backtracked steps toward each new projected
/// solution. Steps mix two physical maps, so every iterate stays physical,
/// and a step is only accepted if it lowers the residual.
pub fn reconstruct_map(data: &TomographyDataset) -> Result<ReconstructionReport> {
    let mut traces = prepare(data)?;
    let (a, b, n_eq) = normal_equations(&traces, None);
    let (raw, mut inv) = solve(&a, &b)?;
    let mut map = project_to_physical(&raw)?;
    for t in traces.iter_mut() {
        t.reweight(&map);
    }
    let mut chi2 = total_chi2(&traces, &map);
    let mut log = vec![IterationLog { iteration: 0, chi2, step: 1.0 }];
    let floor = CHI2_FLOOR * n_eq as f64;
    let mut converged = chi2 < floor;
    for it in 1..=MAX_REFINE_ITER {
        if converged {
            break;
        }
        let (a, b, _) = normal_equations(&traces, Some(&map));
        let (raw, next_inv) = solve(&a, &b)?;
        let target = project_to_physical(&raw)?;
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha > 1e-6 {
            let cand = blend(&map, &target, alpha);
            let c = total_chi2(&traces, &cand);
            if c < chi2 {
                accepted = Some((cand, c));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((cand, c)) => {
                let rel = (chi2 - c) / chi2.max(f64::MIN_POSITIVE);
                map = cand;
                chi2 = c;
                inv = next_inv;
                log.push(IterationLog { iteration: it, chi2, step: alpha });
                if rel < REFINE_REL_TOL || chi2 < floor {
                    converged = true;
                    break;
                }
            }
            None => {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { iterations: MAX_REFINE_ITER, residual: chi2 });
    }
    map.check_physical()?;
    // exact data carries no noise scale; use the residual variance
    let noisy = data.traces.iter().any(|t| t.shots.is_some());
    let scale = if noisy {
        1.0
    } else {
        chi2 / (n_eq.saturating_sub(N_FREE)).max(1) as f64
    };
    let mut std_error = vec![0.0; 64];
    for i in 0..N_FREE {
        std_error[i + 4] = (inv[(i, i)].max(0.0) * scale).sqrt();
    }
    Ok(ReconstructionReport {
        map,
        residual: chi2,
        iterations: log,
        std_error,
        n_equations: n_eq,
    })
}

#[derive(Serialize, Deserialize)]
struct MetaLine {
    metadata: TomographyMeta,
}

impl TomographyDataset {
    /// JSON lines: a metadata record followed by one trace per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer(&mut w, &MetaLine { metadata: self.meta.clone() })?;
        w.write_all(b"\n")?;
        for t in &self.traces {
            serde_json::to_writer(&mut w, t)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::Config("empty dataset file".into()))??;
        let meta: MetaLine = serde_json::from_str(&first)
            .map_err(|e| Error::Config(format!("dataset metadata line: {e}")))?;
        let mut traces = Vec::new();
        for (k, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let t: DcpTrace = serde_json::from_str(&line)
                .map_err(|e| Error::Config(format!("dataset line {}: {e}", k + 2)))?;
            if t.times.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::Config(format!("dataset line {}: times not increasing", k + 2)));
            }
            if t.values.iter().any(|v| !(v.abs() <= 1.0)) {
                return Err(Error::Config(format!("dataset line {}: |D_cp| > 1", k + 2)));
            }
            traces.push(t);
        }
        Ok(Self { meta: meta.metadata, traces })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_jsonl(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::read_jsonl(std::io::BufReader::new(f))
    }
}
