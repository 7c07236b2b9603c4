//! One-cycle process maps: spin qubit in, spin (x) photon pair out.
//!
//! A map is stored as a 16x4 real matrix in the Pauli basis. An input spin
//! `rho = 1/2 sum_k s_k sigma_k` (with `s_0 = 1`) is sent to
//! `1/4 sum_{ij} r_{ij} sigma_i (x) sigma_j` where `r = M s`; the output row
//! index is `4 i + j` with `i` the spin Pauli and `j` the photon Pauli.

use std::sync::OnceLock;

use nalgebra::{DMatrix, Matrix2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::state::{DensityMatrix, SpinVector, PSD_EPS};

pub const MAP_ROWS: usize = 16;
pub const MAP_COLS: usize = 4;

/// Allowed deviation of the `O(x)O` row from `(1, 0, 0, 0)`.
pub const TP_EPS: f64 = 1e-9;

const PROJECTION_TOL: f64 = 1e-10;
const PROJECTION_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMap {
    data: [f64; MAP_ROWS * MAP_COLS],
}

/// Choi matrix `C = sum_ab |a><b| (x) Phi(|a><b|)`, input qubit first.
/// A trace-preserving map has `Tr C = 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix(DMatrix<C64>);

impl ChoiMatrix {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.0).min()
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -PSD_EPS
    }

    /// Trace over the output pair, a 2x2 matrix on the input side.
    pub fn partial_trace_output(&self) -> Matrix2<C64> {
        let mut out = Matrix2::zeros();
        for a in 0..2 {
            for b in 0..2 {
                for k in 0..4 {
                    out[(a, b)] += self.0[(a * 4 + k, b * 4 + k)];
                }
            }
        }
        out
    }

    /// Whether the output partial trace is the identity (trace preservation).
    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        (self.partial_trace_output() - Matrix2::identity()).norm() <= tol
    }

    pub fn rank(&self, tol: f64) -> usize {
        linalg::hermitian_eigenvalues(&self.0)
            .iter()
            .filter(|&&v| v > tol)
            .count()
    }
}

/// 3-qubit Pauli strings `sigma_k^T (x) sigma_i (x) sigma_j` indexed `16k + 4i + j`.
fn choi_basis() -> &'static [DMatrix<C64>] {
    static BASIS: OnceLock<Vec<DMatrix<C64>>> = OnceLock::new();
    BASIS.get_or_init(|| {
        (0..64)
            .map(|idx| {
                let sign = if idx / 16 == 2 { -1.0 } else { 1.0 };
                linalg::pauli_string(idx, 3) * C64::new(sign, 0.0)
            })
            .collect()
    })
}

impl ProcessMap {
    pub fn from_data(data: [f64; 64]) -> Self {
        Self { data }
    }

    pub fn from_slice(data: &[f64]) -> Result<Self> {
        let data: [f64; 64] = data.try_into().map_err(|_| {
            Error::InvalidChannel(format!("process map needs 64 elements, got {}", data.len()))
        })?;
        Ok(Self { data })
    }

    pub fn zeros() -> Self {
        Self { data: [0.0; 64] }
    }

    pub fn data(&self) -> &[f64; 64] {
        &self.data
    }

    /// Element for output Pauli pair `(spin, photon)` and input Pauli `input`.
    pub fn get(&self, spin: usize, photon: usize, input: usize) -> f64 {
        self.data[(4 * spin + photon) * MAP_COLS + input]
    }

    pub fn set(&mut self, spin: usize, photon: usize, input: usize, value: f64) {
        self.data[(4 * spin + photon) * MAP_COLS + input] = value;
    }

    pub fn row(&self, out: usize) -> [f64; 4] {
        let r = &self.data[out * MAP_COLS..(out + 1) * MAP_COLS];
        [r[0], r[1], r[2], r[3]]
    }

    /// Output pair coefficients `r = M (1, S)`.
    pub fn apply(&self, s: &SpinVector) -> [f64; 16] {
        let input = [1.0, s.x(), s.y(), s.z()];
        let mut out = [0.0; 16];
        for (o, slot) in out.iter_mut().enumerate() {
            *slot = (0..4).map(|k| self.data[o * 4 + k] * input[k]).sum();
        }
        out
    }

    pub fn frobenius_distance(&self, other: &ProcessMap) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest deviation of the `O(x)O` row from `(1, 0, 0, 0)`.
    pub fn tp_deviation(&self) -> f64 {
        let r = self.row(0);
        (r[0] - 1.0)
            .abs()
            .max(r[1].abs())
            .max(r[2].abs())
            .max(r[3].abs())
    }

    pub fn check_physical(&self) -> Result<()> {
        let tp = self.tp_deviation();
        if tp > TP_EPS {
            return Err(Error::InvalidChannel(format!(
                "not trace preserving (deviation {tp:e})"
            )));
        }
        let min = choi_of(self).min_eigenvalue();
        if min < -PSD_EPS {
            return Err(Error::InvalidChannel(format!(
                "not completely positive (Choi eigenvalue {min:e})"
            )));
        }
        Ok(())
    }

    pub fn is_physical(&self) -> bool {
        self.check_physical().is_ok()
    }

    /// Map with Kraus operators `K : C^2 -> C^2 (x) C^2` (4x2 matrices,
    /// spin first in the output).
    pub fn from_kraus(kraus: &[DMatrix<C64>]) -> Self {
        let mut map = Self::zeros();
        for k in 0..4 {
            let p = linalg::pauli(k);
            let sigma_k = DMatrix::from_fn(2, 2, |a, b| p[(a, b)]);
            let mut out = DMatrix::from_element(4, 4, C64::new(0.0, 0.0));
            for op in kraus {
                out += op * &sigma_k * op.adjoint();
            }
            let coeffs = linalg::pauli_coefficients(&out, 2);
            for (o, c) in coeffs.iter().enumerate() {
                map.data[o * 4 + k] = 0.5 * c;
            }
        }
        map
    }

    /// Inverse of [`choi_of`].
    pub fn from_choi(choi: &ChoiMatrix) -> Self {
        let mut data = [0.0; 64];
        let c = choi.matrix();
        for (idx, p) in choi_basis().iter().enumerate() {
            let (k, o) = (idx / 16, idx % 16);
            // Tr(C P), P is a signed permutation-like matrix
            let mut tr = C64::new(0.0, 0.0);
            for a in 0..8 {
                for b in 0..8 {
                    let pb = p[(b, a)];
                    if pb.re != 0.0 || pb.im != 0.0 {
                        tr += c[(a, b)] * pb;
                    }
                }
            }
            data[o * 4 + k] = 0.5 * tr.re;
        }
        Self { data }
    }

    /// Spin passes unchanged and the photon is left in the fixed state with
    /// Stokes vector `photon`.
    pub fn identity_with_photon(photon: [f64; 3]) -> Self {
        let mut map = Self::zeros();
        map.set(0, 0, 0, 1.0);
        for (j, m) in photon.iter().enumerate() {
            map.set(0, j + 1, 0, *m);
        }
        for i in 1..4 {
            map.set(i, 0, i, 1.0);
            for (j, m) in photon.iter().enumerate() {
                map.set(i, j + 1, i, *m);
            }
        }
        map
    }

    /// Sends every input to the maximally mixed spin-photon pair.
    pub fn fully_depolarizing() -> Self {
        let mut map = Self::zeros();
        map.set(0, 0, 0, 1.0);
        map
    }

    /// Random CPTP map with the given Kraus rank (1..=8), drawn from a
    /// Ginibre ensemble and normalized to be trace preserving.
    pub fn random_physical<R: Rng + ?Sized>(rng: &mut R, rank: usize) -> Self {
        let rank = rank.clamp(1, 8);
        let g = DMatrix::from_fn(8, rank, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let raw = &g * g.adjoint();
        let mut a = DMatrix::from_element(2, 2, C64::new(0.0, 0.0));
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..4 {
                    a[(i, j)] += raw[(i * 4 + k, j * 4 + k)];
                }
            }
        }
        let inv_sqrt = linalg::hermitian_map(&a, |v| 1.0 / v.sqrt());
        let w = linalg::kron(&inv_sqrt, &DMatrix::identity(4, 4));
        let choi = &w * raw * &w;
        Self::from_choi(&ChoiMatrix(choi))
    }
}

pub fn choi_of(map: &ProcessMap) -> ChoiMatrix {
    let mut c = DMatrix::from_element(8, 8, C64::new(0.0, 0.0));
    for (idx, p) in choi_basis().iter().enumerate() {
        let (k, o) = (idx / 16, idx % 16);
        let v = map.data[o * 4 + k];
        if v != 0.0 {
            c += p * C64::new(0.25 * v, 0.0);
        }
    }
    ChoiMatrix(c)
}

/// Unitary on the spin for a precession by `angle` about `+x`:
/// `exp(-i angle sigma_x / 2)`, which turns the Bloch vector `+z` toward `-y`.
pub fn spin_rotation_x(angle: f64) -> DMatrix<C64> {
    let (s, c) = (0.5 * angle).sin_cos();
    DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0)],
    )
}

/// Emission isometry from the optical selection rules:
/// `|up> -> |up>|-Z>` and `|down> -> |down>|+Z>`.
pub fn emission_isometry() -> DMatrix<C64> {
    let mut v = DMatrix::from_element(4, 2, C64::new(0.0, 0.0));
    v[(1, 0)] = C64::new(1.0, 0.0); // |0>_spin |1>_photon
    v[(2, 1)] = C64::new(1.0, 0.0); // |1>_spin |0>_photon
    v
}

/// Ideal protocol cycle: selection-rule emission (a CNOT onto a fresh photon)
/// followed by a quarter-period precession of the spin about the field axis.
pub fn ideal_cycle_map() -> ProcessMap {
    let rot = spin_rotation_x(std::f64::consts::FRAC_PI_2);
    let u = linalg::kron(&rot, &DMatrix::identity(2, 2)) * emission_isometry();
    ProcessMap::from_kraus(&[u])
}

/// Jozsa fidelity between the unit-trace Choi states of two physical maps.
pub fn process_fidelity(a: &ProcessMap, b: &ProcessMap) -> Result<f64> {
    a.check_physical()?;
    b.check_physical()?;
    let ca = choi_of(a).0 * C64::new(0.5, 0.0);
    let cb = choi_of(b).0 * C64::new(0.5, 0.0);
    Ok(linalg::jozsa_fidelity(&ca, &cb))
}

fn project_psd(map: &ProcessMap) -> ProcessMap {
    let c = choi_of(map);
    let clipped = linalg::hermitian_map(c.matrix(), |v| v.max(0.0));
    ProcessMap::from_choi(&ChoiMatrix(clipped))
}

fn project_tp(map: &ProcessMap) -> ProcessMap {
    let mut out = map.clone();
    out.data[0] = 1.0;
    out.data[1] = 0.0;
    out.data[2] = 0.0;
    out.data[3] = 0.0;
    out
}

fn add(a: &ProcessMap, b: &ProcessMap, scale: f64) -> ProcessMap {
    let mut out = a.clone();
    for (o, v) in out.data.iter_mut().zip(b.data.iter()) {
        *o += scale * v;
    }
    out
}

/// Nearest CPTP map in Frobenius norm.
///
/// Dykstra's alternating projections between the PSD cone of Choi matrices
/// (eigenvalue clipping) and the trace-preserving affine subspace. Any
/// residual negative eigenvalue below round-off is removed by mixing in the
/// fully depolarizing map, which keeps the map trace preserving. Maps that
/// already pass [`ProcessMap::check_physical`] are returned unchanged.
pub fn project_to_physical(map: &ProcessMap) -> Result<ProcessMap> {
    if map.is_physical() {
        return Ok(map.clone());
    }
    let mut x = map.clone();
    let mut p = ProcessMap::zeros();
    let mut q = ProcessMap::zeros();
    let mut converged = false;
    let mut residual = f64::INFINITY;
    for _ in 0..PROJECTION_MAX_ITER {
        let y = project_psd(&add(&x, &p, 1.0));
        p = add(&add(&x, &p, 1.0), &y, -1.0);
        let next = project_tp(&add(&y, &q, 1.0));
        q = add(&add(&y, &q, 1.0), &next, -1.0);
        residual = next.frobenius_distance(&x);
        x = next;
        if residual < PROJECTION_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: PROJECTION_MAX_ITER,
            residual,
        });
    }
    let min = choi_of(&x).min_eigenvalue();
    if min < 0.0 {
        // depolarizing Choi is I/4 with eigenvalue 1/4
        let eps = -min / (0.25 - min);
        let dep = ProcessMap::fully_depolarizing();
        for (o, d) in x.data.iter_mut().zip(dep.data.iter()) {
            *o = (1.0 - eps) * *o + eps * d;
        }
    }
    Ok(x)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct ProcessMapJson {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Serialize for ProcessMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ProcessMapJson {
            rows: MAP_ROWS,
            cols: MAP_COLS,
            data: self.data.to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProcessMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = ProcessMapJson::deserialize(d)?;
        if j.rows != MAP_ROWS || j.cols != MAP_COLS {
            return Err(serde::de::Error::custom(format!(
                "process map must be {MAP_ROWS}x{MAP_COLS}, got {}x{}",
                j.rows, j.cols
            )));
        }
        ProcessMap::from_slice(&j.data).map_err(serde::de::Error::custom)
    }
}

impl Serialize for ChoiMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::state::MatrixJson::from_matrix(&self.0).serialize(s)
    }
}

/// Multi-qubit state in Pauli-coefficient form,
/// `rho = 2^-n sum r_k P_k`, qubit 0 most significant.
///
/// Projections leave the state unnormalized; `coeffs[0]` is then the
/// probability of the recorded outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliState {
    n: usize,
    coeffs: Vec<f64>,
}

impl PauliState {
    pub fn from_spin(s: &SpinVector) -> Self {
        Self {
            n: 1,
            coeffs: vec![1.0, s.x(), s.y(), s.z()],
        }
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), 1 << (2 * n));
        Self { n, coeffs }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn probability(&self) -> f64 {
        self.coeffs[0]
    }

    fn digit(&self, index: usize, q: usize) -> usize {
        (index >> (2 * (self.n - 1 - q))) & 3
    }

    /// Runs one cycle on the spin at qubit `q`; the spin keeps position `q`
    /// and the new photon is appended as the last qubit.
    pub fn apply_map(&self, q: usize, map: &ProcessMap) -> PauliState {
        let n = self.n + 1;
        let mut out = vec![0.0; 1 << (2 * n)];
        let shift_old = 2 * (self.n - 1 - q);
        for (idx, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let b = self.digit(idx, q);
            let cleared = idx & !(3 << shift_old);
            for i in 0..4 {
                for j in 0..4 {
                    let m = map.get(i, j, b);
                    if m == 0.0 {
                        continue;
                    }
                    let with_spin = cleared | (i << shift_old);
                    let new_idx = (with_spin << 2) | j;
                    out[new_idx] += m * c;
                }
            }
        }
        PauliState { n, coeffs: out }
    }

    /// Projects qubit `q` onto the polarization with Stokes vector `m` and
    /// removes it.
    pub fn project(&self, q: usize, m: [f64; 3]) -> PauliState {
        self.contract(q, [0.5, 0.5 * m[0], 0.5 * m[1], 0.5 * m[2]])
    }

    pub fn trace_out(&self, q: usize) -> PauliState {
        self.contract(q, [1.0, 0.0, 0.0, 0.0])
    }

    fn contract(&self, q: usize, w: [f64; 4]) -> PauliState {
        let n = self.n - 1;
        let mut out = vec![0.0; 1 << (2 * n)];
        let shift = 2 * (self.n - 1 - q);
        for (idx, &c) in self.coeffs.iter().enumerate() {
            let d = (idx >> shift) & 3;
            if w[d] == 0.0 {
                continue;
            }
            let high = idx >> (shift + 2);
            let low = idx & ((1 << shift) - 1);
            out[(high << shift) | low] += w[d] * c;
        }
        PauliState { n, coeffs: out }
    }

    /// Normalized expectation of the Pauli string with one digit per qubit.
    pub fn expectation(&self, paulis: &[usize]) -> f64 {
        assert_eq!(paulis.len(), self.n);
        let idx = paulis.iter().fold(0usize, |acc, &p| (acc << 2) | p);
        self.coeffs[idx] / self.coeffs[0]
    }

    /// Normalized two-qubit density matrix.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        if self.n != 2 {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: 2,
            });
        }
        let p = self.coeffs[0];
        let mut r = [0.0; 16];
        for (slot, c) in r.iter_mut().zip(self.coeffs.iter()) {
            *slot = c / p;
        }
        DensityMatrix::from_pauli_pair(&r)
    }
}
