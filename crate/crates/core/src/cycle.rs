//! One protocol cycle: excitation, radiative decay with photon emission,
//! and HH precession until the next pulse.
//!
//! The trion precesses for the emission time `t'`, the emission acts as the
//! affine map `pS' = L S + c`, then the HH precesses for `t_pulse - t'`.
//! Everything is linear in the ensemble averages
//!
//! ```text
//! K0 = E[G_hh(tp - t') e_z]         g  = E[e_z^T G_tr(t')]
//! K1 = E[G_hh A1 G_tr]   K2 = E[G_hh A2 G_tr]   K3 = E[G_hh A3 G_tr]
//! ```
//!
//! with `A1 = diag(1,1,0)`, `A2` the in-plane quarter turn and
//! `A3 = e_z e_z^T`, so one pass over the nuclear samples serves every
//! input spin and photon projector.

use nalgebra::{Matrix3, Vector3};

use crate::central_spin::{overhauser_sample, Precession};
use crate::channel::{project_to_physical, ProcessMap};
use crate::error::{Error, Result};
use crate::mc::{self, CovEstimate};
use crate::params::{PhysicalParams, Species};
use crate::state::{SpinVector, StokesVector};

/// Default number of Gauss-Legendre nodes for the emission-time integral.
pub const DEFAULT_TIME_STEPS: usize = 64;

/// Emission windows longer than this many lifetimes are truncated.
pub const TAIL_LIFETIMES: f64 = 8.0;

/// Below this photon probability the conditional state is undefined.
pub const MIN_CONDITIONING_PROB: f64 = 1e-12;

/// Affine action of emitting a photon projected on `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionMap {
    pub linear: Matrix3<f64>,
    pub offset: Vector3<f64>,
    m3: f64,
}

impl EmissionMap {
    pub fn probability(&self, s: &SpinVector) -> f64 {
        0.5 * (1.0 - s.z() * self.m3)
    }

    /// Unnormalized `p S'`.
    pub fn weighted(&self, s: &SpinVector) -> Vector3<f64> {
        self.linear * s.as_vector() + self.offset
    }

    /// `(p, S')`; errors when the branch is forbidden.
    pub fn apply(&self, s: &SpinVector) -> Result<(f64, SpinVector)> {
        let p = self.probability(s);
        if p < MIN_CONDITIONING_PROB {
            return Err(Error::DegenerateConditioning(p));
        }
        Ok((p, clamp_spin(self.weighted(s) / p)))
    }
}

pub fn emission_map(m: &StokesVector) -> EmissionMap {
    let (m1, m2, m3) = (m.m1(), m.m2(), m.m3());
    EmissionMap {
        linear: Matrix3::new(
            0.5 * m1, -0.5 * m2, 0.0,
            0.5 * m2, 0.5 * m1, 0.0,
            0.0, 0.0, 0.5,
        ),
        offset: Vector3::new(0.0, 0.0, -0.5 * m3),
        m3,
    }
}

/// Conditional outcome of one cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleResult {
    pub prob: f64,
    pub spin_out: SpinVector,
    pub prob_std_error: f64,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Emission times (ps) and normalized weights `~ exp(-t/tau)` over the
/// truncated window `[0, min(t_pulse, 8 tau)]`.
pub fn emission_quadrature(params: &PhysicalParams, n: usize) -> (Vec<f64>, Vec<f64>) {
    let tau = params.tau_photon;
    let window = params.t_pulse.min(TAIL_LIFETIMES * tau);
    let (x, w) = gauss_legendre(n);
    let t: Vec<f64> = x.iter().map(|x| 0.5 * window * (x + 1.0)).collect();
    let mut wt: Vec<f64> = w.iter().zip(&t).map(|(w, t)| w * (-t / tau).exp()).collect();
    let s: f64 = wt.iter().sum();
    wt.iter_mut().for_each(|v| *v /= s);
    (t, wt)
}

const N_STATS: usize = 33;
const O_K0: usize = 0;
const O_G: usize = 3;
const O_K1: usize = 6;
const O_K2: usize = 15;
const O_K3: usize = 24;

/// Ensemble-averaged cycle tensors with their sampling covariance.
#[derive(Debug, Clone)]
pub struct CycleTensors {
    est: CovEstimate,
}

impl CycleTensors {
    pub fn compute(
        params: &PhysicalParams,
        n_samples: usize,
        seed: u64,
        n_time_steps: usize,
    ) -> Result<Self> {
        params.validate()?;
        if n_samples == 0 {
            return Err(Error::EmptyRequest("at least one nuclear sample is required".into()));
        }
        if n_time_steps == 0 {
            return Err(Error::EmptyRequest("at least one time step is required".into()));
        }
        let (nodes, weights) = emission_quadrature(params, n_time_steps);
        let tp = params.t_pulse;
        let est = mc::mean_cov_over(n_samples, N_STATS, |i, out| {
            let nf = overhauser_sample(seed, i);
            let hh = Precession::for_field(params, Species::HeavyHole, &nf);
            let tr = Precession::for_field(params, Species::Trion, &nf);
            out.fill(0.0);
            for (&t, &w) in nodes.iter().zip(&weights) {
                let gt = tr.at(t);
                let gh = hh.at(tp - t);
                for r in 0..3 {
                    out[O_K0 + r] += w * gh[(r, 2)];
                    out[O_G + r] += w * gt[(2, r)];
                    for c in 0..3 {
                        let a3 = gh[(r, 2)] * gt[(2, c)];
                        let a1 = gh[(r, 0)] * gt[(0, c)] + gh[(r, 1)] * gt[(1, c)];
                        let a2 = gh[(r, 1)] * gt[(0, c)] - gh[(r, 0)] * gt[(1, c)];
                        out[O_K1 + 3 * r + c] += w * a1;
                        out[O_K2 + 3 * r + c] += w * a2;
                        out[O_K3 + 3 * r + c] += w * a3;
                    }
                }
            }
        });
        Ok(Self { est })
    }

    pub fn n_samples(&self) -> usize {
        self.est.n_samples
    }

    fn mat(&self, off: usize) -> Matrix3<f64> {
        Matrix3::from_row_slice(&self.est.mean[off..off + 9])
    }

    fn se_at(&self, idx: usize) -> f64 {
        let d = N_STATS;
        self.est.cov[idx * d + idx].max(0.0).sqrt()
    }

    /// `E[G_hh(tp - t') e_z]`.
    pub fn k0(&self) -> Vector3<f64> {
        Vector3::from_row_slice(&self.est.mean[O_K0..O_K0 + 3])
    }

    /// `E[e_z^T G_tr(t')]`.
    pub fn g(&self) -> Vector3<f64> {
        Vector3::from_row_slice(&self.est.mean[O_G..O_G + 3])
    }

    pub fn k1(&self) -> Matrix3<f64> {
        self.mat(O_K1)
    }

    pub fn k2(&self) -> Matrix3<f64> {
        self.mat(O_K2)
    }

    pub fn k3(&self) -> Matrix3<f64> {
        self.mat(O_K3)
    }

    pub fn k0_std_error(&self) -> Vector3<f64> {
        Vector3::from_fn(|r, _| self.se_at(O_K0 + r))
    }

    pub fn g_std_error(&self) -> Vector3<f64> {
        Vector3::from_fn(|r, _| self.se_at(O_G + r))
    }

    pub fn k1_std_error(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|r, c| self.se_at(O_K1 + 3 * r + c))
    }

    pub fn k2_std_error(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|r, c| self.se_at(O_K2 + 3 * r + c))
    }

    pub fn k3_std_error(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|r, c| self.se_at(O_K3 + 3 * r + c))
    }

    /// Coefficient vectors `w` such that `p = w_p . stats` and
    /// `(p S')_i = w_i . stats`.
    fn contraction(s0: &SpinVector, m: &StokesVector) -> [[f64; N_STATS]; 4] {
        let s = s0.as_vector();
        let (m1, m2, m3) = (m.m1(), m.m2(), m.m3());
        let mut w = [[0.0; N_STATS]; 4];
        w[0][O_G..O_G + 3].copy_from_slice(&[-0.5 * m3 * s.x, -0.5 * m3 * s.y, -0.5 * m3 * s.z]);
        for i in 0..3 {
            let row = &mut w[i + 1];
            row[O_K0 + i] = -0.5 * m3;
            for c in 0..3 {
                row[O_K1 + 3 * i + c] = 0.5 * m1 * s[c];
                row[O_K2 + 3 * i + c] = 0.5 * m2 * s[c];
                row[O_K3 + 3 * i + c] = 0.5 * s[c];
            }
        }
        w
    }

    /// `(p, p S')` for input `s0` and photon projector `m`.
    pub fn weighted_branch(&self, s0: &SpinVector, m: &StokesVector) -> (f64, Vector3<f64>) {
        let w = Self::contraction(s0, m);
        let dot = |w: &[f64; N_STATS]| w.iter().zip(&self.est.mean).map(|(a, b)| a * b).sum::<f64>();
        (
            0.5 + dot(&w[0]),
            Vector3::new(dot(&w[1]), dot(&w[2]), dot(&w[3])),
        )
    }

    pub fn given_photon(&self, s0: &SpinVector, m: &StokesVector) -> Result<CycleResult> {
        let (p, ps) = self.weighted_branch(s0, m);
        if p < MIN_CONDITIONING_PROB {
            return Err(Error::DegenerateConditioning(p));
        }
        let w = Self::contraction(s0, m);
        Ok(CycleResult {
            prob: p.clamp(0.0, 1.0),
            spin_out: clamp_spin(ps / p),
            prob_std_error: self.est.linear_std_error(&w[0]),
        })
    }

    /// Unnormalized joint spin-photon Pauli vector `r_ij` for a pure
    /// input, from the six photon projections.
    fn joint_state(&self, s0: &SpinVector) -> [f64; 16] {
        let mut r = [0.0; 16];
        r[0] = 1.0;
        for j in 0..3 {
            let mut e = [0.0; 3];
            e[j] = 1.0;
            let plus = StokesVector::new(e[0], e[1], e[2]).expect("unit vector");
            let (pp, sp) = self.weighted_branch(s0, &plus);
            let (pm, sm) = self.weighted_branch(s0, &plus.opposite());
            r[j + 1] = pp - pm;
            for i in 0..3 {
                r[4 * (i + 1) + j + 1] = sp[i] - sm[i];
                r[4 * (i + 1)] += (sp[i] + sm[i]) / 3.0;
            }
        }
        r
    }

    /// Process map assembled from the six cardinal inputs, before any
    /// physicality projection.
    pub fn raw_map(&self) -> ProcessMap {
        let inputs = SpinVector::cardinal_states();
        let outs: Vec<[f64; 16]> = inputs.iter().map(|(_, s)| self.joint_state(s)).collect();
        let mut data = [0.0; 64];
        for row in 0..16 {
            let mean = outs.iter().map(|o| o[row]).sum::<f64>() / 6.0;
            data[4 * row] = mean;
            for k in 0..3 {
                // cardinal_states order: +X, -X, +Y, -Y, +Z, -Z
                data[4 * row + k + 1] = 0.5 * (outs[2 * k][row] - outs[2 * k + 1][row]);
            }
        }
        data[0] = 1.0;
        data[1] = 0.0;
        data[2] = 0.0;
        data[3] = 0.0;
        ProcessMap::from_data(data)
    }

    /// Standard error of each map element (row-major like the map).
    pub fn map_std_error(&self) -> [f64; 64] {
        // the map is linear in the statistics: probe it with unit vectors
        let mut jac = vec![[0.0; 64]; N_STATS];
        let base = Self { est: CovEstimate { mean: vec![0.0; N_STATS], cov: vec![], n_samples: 0 } };
        let zero = base.raw_map();
        for (k, col) in jac.iter_mut().enumerate() {
            let mut probe = base.clone();
            probe.est.mean[k] = 1.0;
            let m = probe.raw_map();
            for (e, (a, b)) in col.iter_mut().zip(m.data().iter().zip(zero.data())) {
                *e = a - b;
            }
        }
        let mut se = [0.0; 64];
        for (e, s) in se.iter_mut().enumerate() {
            let w: Vec<f64> = jac.iter().map(|c| c[e]).collect();
            *s = self.est.linear_std_error(&w);
        }
        se
    }
}

fn clamp_spin(v: Vector3<f64>) -> SpinVector {
    let n = v.norm();
    let v = if n > 1.0 { v / n } else { v };
    SpinVector::from_vector(v).expect("norm clamped to <= 1")
}

/// Conditional spin and photon probability after one cycle.
pub fn cycle_given_photon(
    params: &PhysicalParams,
    s0: &SpinVector,
    m: &StokesVector,
    n_samples: usize,
    seed: u64,
    n_time_steps: usize,
) -> Result<CycleResult> {
    CycleTensors::compute(params, n_samples, seed, n_time_steps)?.given_photon(s0, m)
}

/// Map together with its pre-projection form and sampling errors.
#[derive(Debug, Clone)]
pub struct BuiltMap {
    pub map: ProcessMap,
    pub raw: ProcessMap,
    pub std_error: [f64; 64],
    /// Frobenius distance moved by the physicality projection.
    pub displacement: f64,
}

impl BuiltMap {
    pub fn from_tensors(t: &CycleTensors) -> Result<Self> {
        let raw = t.raw_map();
        let map = project_to_physical(&raw)?;
        let std_error = t.map_std_error();
        let displacement = map.frobenius_distance(&raw);
        Ok(Self { map, raw, std_error, displacement })
    }

    /// Largest single-element standard error.
    pub fn max_std_error(&self) -> f64 {
        self.std_error.iter().cloned().fold(0.0, f64::max)
    }

    /// Frobenius norm of the standard-error vector.
    pub fn std_error_norm(&self) -> f64 {
        self.std_error.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub fn build_process_map_detailed(
    params: &PhysicalParams,
    n_samples: usize,
    seed: u64,
    n_time_steps: usize,
) -> Result<BuiltMap> {
    BuiltMap::from_tensors(&CycleTensors::compute(params, n_samples, seed, n_time_steps)?)
}

/// Physical one-cycle process map for `params`.
pub fn build_process_map(
    params: &PhysicalParams,
    n_samples: usize,
    seed: u64,
    n_time_steps: usize,
) -> Result<ProcessMap> {
    Ok(build_process_map_detailed(params, n_samples, seed, n_time_steps)?.map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ideal_cycle_map, process_fidelity};

    fn static_params() -> PhysicalParams {
        PhysicalParams {
            a_hh: [0.0; 3],
            a_trion: [0.0; 3],
            b_ext: 0.0,
            ..PhysicalParams::placeholder()
        }
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in [1, 2, 5, 64] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for k in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 0 { 2.0 / (k + 1) as f64 } else { 0.0 };
                assert!((q - exact).abs() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn emission_map_examples() {
        let z = StokesVector::new(0.0, 0.0, 1.0).unwrap();
        let e = emission_map(&z);
        let down = SpinVector::new(0.0, 0.0, -1.0).unwrap();
        let (p, s) = e.apply(&down).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(s, down);
        let up = SpinVector::new(0.0, 0.0, 1.0).unwrap();
        assert_eq!(e.probability(&up), 0.0);
        assert!(matches!(e.apply(&up), Err(Error::DegenerateConditioning(_))));
        let x = StokesVector::new(1.0, 0.0, 0.0).unwrap();
        let sx = SpinVector::new(1.0, 0.0, 0.0).unwrap();
        let (p, s) = emission_map(&x).apply(&sx).unwrap();
        assert_eq!(p, 0.5);
        assert_eq!(s, sx);
    }

    #[test]
    fn static_fields_examples() {
        let p = static_params();
        let up = SpinVector::new(0.0, 0.0, 1.0).unwrap();
        let z = StokesVector::new(0.0, 0.0, 1.0).unwrap();
        let t = CycleTensors::compute(&p, 10, 1, 8).unwrap();
        assert!(t.weighted_branch(&up, &z).0.abs() < 1e-15);
        let sx = SpinVector::new(1.0, 0.0, 0.0).unwrap();
        let x = StokesVector::new(1.0, 0.0, 0.0).unwrap();
        let r = cycle_given_photon(&p, &sx, &x, 10, 1, 8).unwrap();
        assert!((r.prob - 0.5).abs() < 1e-15);
        assert!((r.spin_out.as_vector() - sx.as_vector()).norm() < 1e-14);
    }

    #[test]
    fn zero_counts_rejected() {
        let p = PhysicalParams::placeholder();
        let s = SpinVector::zero();
        let m = StokesVector::new(0.0, 0.0, 1.0).unwrap();
        assert!(matches!(cycle_given_photon(&p, &s, &m, 0, 1, 8), Err(Error::EmptyRequest(_))));
        assert!(matches!(cycle_given_photon(&p, &s, &m, 8, 1, 0), Err(Error::EmptyRequest(_))));
    }

    #[test]
    fn ideal_limit_matches_ideal_map() {
        let p = PhysicalParams::ideal_limit(0.1);
        let built = build_process_map_detailed(&p, 16, 3, 16).unwrap();
        assert!(built.raw.frobenius_distance(&ideal_cycle_map()) < 1e-6);
        let f = process_fidelity(&built.map, &ideal_cycle_map()).unwrap();
        assert!(f > 1.0 - 1e-9, "{f}");
    }

    #[test]
    fn raw_map_matches_direct_tensor_layout() {
        let p = PhysicalParams::placeholder();
        let t = CycleTensors::compute(&p, 500, 4, 16).unwrap();
        let m = t.raw_map();
        let (k0, k1, k2, k3, g) = (t.k0(), t.k1(), t.k2(), t.k3(), t.g());
        for c in 0..3 {
            assert!((m.get(0, 3, c + 1) + g[c]).abs() < 1e-14);
        }
        for i in 0..3 {
            assert!((m.get(i + 1, 3, 0) + k0[i]).abs() < 1e-14);
            assert!(m.get(i + 1, 0, 0).abs() < 1e-14);
            for c in 0..3 {
                assert!((m.get(i + 1, 0, c + 1) - k3[(i, c)]).abs() < 1e-14);
                assert!((m.get(i + 1, 1, c + 1) - k1[(i, c)]).abs() < 1e-14);
                assert!((m.get(i + 1, 2, c + 1) - k2[(i, c)]).abs() < 1e-14);
            }
        }
    }
}
