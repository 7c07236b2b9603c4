//! Spin and photon-polarization states.
//!
//! A qubit state is carried either as a Bloch/Stokes 3-vector or as a
//! density matrix. The spin qubit uses `|0> = |up>` (S_z = +1); the photon
//! qubit uses `|0> = +Z` (right circular), so the Stokes component `m3` is
//! the photon's `<sigma_z>`.

use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, C64};

/// Slack allowed on `|S| <= 1` and on density-matrix checks.
pub const STATE_EPS: f64 = 1e-12;
/// Most negative eigenvalue still accepted as positive semidefinite.
pub const PSD_EPS: f64 = 1e-9;

/// Bloch vector of the heavy-hole or trion spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinVector(Vector3<f64>);

impl SpinVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_vector(Vector3::new(x, y, z))
    }

    pub fn from_vector(v: Vector3<f64>) -> Result<Self> {
        if !v.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidState(format!("non-finite spin vector {v:?}")));
        }
        if v.norm_squared() > 1.0 + STATE_EPS {
            return Err(Error::InvalidState(format!(
                "spin vector length {} exceeds 1",
                v.norm()
            )));
        }
        Ok(Self(v))
    }

    pub fn zero() -> Self {
        Self(Vector3::zeros())
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }
    pub fn y(&self) -> f64 {
        self.0.y
    }
    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    /// The six pure states `+X, -X, +Y, -Y, +Z, -Z`, in that order.
    pub fn cardinal_states() -> [(&'static str, SpinVector); 6] {
        [
            ("+X", Self(Vector3::x())),
            ("-X", Self(-Vector3::x())),
            ("+Y", Self(Vector3::y())),
            ("-Y", Self(-Vector3::y())),
            ("+Z", Self(Vector3::z())),
            ("-Z", Self(-Vector3::z())),
        ]
    }
}

/// Normalized Stokes vector of the emitted photon on the Poincare sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesVector(Vector3<f64>);

impl StokesVector {
    pub fn new(m1: f64, m2: f64, m3: f64) -> Result<Self> {
        let v = Vector3::new(m1, m2, m3);
        if !v.iter().all(|c| c.is_finite()) || v.norm_squared() > 1.0 + STATE_EPS {
            return Err(Error::InvalidState(format!(
                "Stokes vector {v:?} outside the Poincare ball"
            )));
        }
        Ok(Self(v))
    }

    pub fn m1(&self) -> f64 {
        self.0.x
    }
    pub fn m2(&self) -> f64 {
        self.0.y
    }
    pub fn m3(&self) -> f64 {
        self.0.z
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    /// Orthogonal polarization (antipodal point).
    pub fn opposite(&self) -> Self {
        Self(-self.0)
    }

    pub fn cardinal(label: &str) -> Option<Self> {
        SpinVector::cardinal_states()
            .into_iter()
            .find(|(l, _)| *l == label)
            .map(|(_, s)| Self(s.0))
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix of dimension 2 or 4.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(DMatrix<C64>);

impl DensityMatrix {
    /// Validates and wraps a matrix.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        let d = m.nrows();
        if m.ncols() != d || !(d == 2 || d == 4) {
            return Err(Error::InvalidState(format!(
                "density matrix must be 2x2 or 4x4, got {}x{}",
                d,
                m.ncols()
            )));
        }
        check_density(&m)?;
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    /// Builds a two-qubit state from its Pauli coefficients
    /// `rho = 1/4 sum r[4a+b] sigma_a (x) sigma_b`.
    pub fn from_pauli_pair(r: &[f64; 16]) -> Result<Self> {
        Self::new(linalg::pauli_expand(r, 2))
    }
}

pub(crate) fn check_density(m: &DMatrix<C64>) -> Result<()> {
    let herm = (m - m.adjoint()).norm();
    if herm > STATE_EPS * 10.0 {
        return Err(Error::InvalidState(format!(
            "matrix is not Hermitian (deviation {herm:e})"
        )));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > STATE_EPS * 10.0 || tr.im.abs() > STATE_EPS * 10.0 {
        return Err(Error::InvalidState(format!("trace {tr} is not 1")));
    }
    let min = linalg::hermitian_eigenvalues(m).min();
    if min < -PSD_EPS {
        return Err(Error::InvalidState(format!(
            "negative eigenvalue {min:e}"
        )));
    }
    Ok(())
}

/// `rho = (sigma_0 + S . sigma) / 2`.
pub fn bloch_to_density(s: &SpinVector) -> DensityMatrix {
    let v = s.as_vector();
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(0.5 * (1.0 + v.z), 0.0),
            C64::new(0.5 * v.x, -0.5 * v.y),
            C64::new(0.5 * v.x, 0.5 * v.y),
            C64::new(0.5 * (1.0 - v.z), 0.0),
        ],
    );
    DensityMatrix(m)
}

/// Inverse of [`bloch_to_density`]: `S_i = Tr(rho sigma_i)`.
pub fn density_to_bloch(rho: &DensityMatrix) -> Result<SpinVector> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: 2,
        });
    }
    let m = rho.matrix();
    check_density(m)?;
    let x = 2.0 * m[(1, 0)].re;
    let y = 2.0 * m[(1, 0)].im;
    let z = (m[(0, 0)] - m[(1, 1)]).re;
    SpinVector::new(x, y, z)
}

/// Jozsa fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
pub fn state_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    Ok(linalg::jozsa_fidelity(rho.matrix(), sigma.matrix()))
}

/// Negativity of a two-qubit state: the summed magnitude of the negative
/// eigenvalues of the partial transpose. A Bell state gives 0.5.
pub fn negativity(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: 4,
        });
    }
    Ok(negativity_unchecked(rho.matrix()))
}

pub(crate) fn negativity_unchecked(m: &DMatrix<C64>) -> f64 {
    let pt = linalg::partial_transpose_second(m);
    linalg::hermitian_eigenvalues(&pt)
        .iter()
        .filter(|&&e| e < 0.0)
        .map(|e| -e)
        .sum()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixJson {
    pub fn from_matrix(m: &DMatrix<C64>) -> Self {
        let d = m.nrows();
        let mut re = Vec::with_capacity(d * d);
        let mut im = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        Self { dim: d, re, im }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<C64>> {
        let n = self.dim * self.dim;
        if self.re.len() != n || self.im.len() != n {
            return Err(Error::Config(format!(
                "matrix of dim {} needs {n} entries, got {}/{}",
                self.dim,
                self.re.len(),
                self.im.len()
            )));
        }
        Ok(DMatrix::from_fn(self.dim, self.dim, |i, j| {
            C64::new(self.re[i * self.dim + j], self.im[i * self.dim + j])
        }))
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        let m = j.to_matrix().map_err(serde::de::Error::custom)?;
        DensityMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dm(rows: &[[C64; 2]; 2]) -> DensityMatrix {
        DensityMatrix::new(DMatrix::from_fn(2, 2, |i, j| rows[i][j])).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn bloch_examples() {
        let up = bloch_to_density(&SpinVector::new(0.0, 0.0, 1.0).unwrap());
        assert_eq!(up.matrix()[(0, 0)], c(1.0, 0.0));
        assert_eq!(up.matrix()[(1, 1)], c(0.0, 0.0));

        let mixed = bloch_to_density(&SpinVector::zero());
        assert_eq!(mixed.matrix()[(0, 0)], c(0.5, 0.0));
        assert_eq!(mixed.matrix()[(0, 1)], c(0.0, 0.0));

        let plus_x = bloch_to_density(&SpinVector::new(1.0, 0.0, 0.0).unwrap());
        for v in plus_x.matrix().iter() {
            assert!((v - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn bloch_rejects_long_vectors() {
        assert!(matches!(
            SpinVector::new(1.0, 1.0, 0.0),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn density_to_bloch_examples() {
        let up = dm(&[[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]]);
        let s = density_to_bloch(&up).unwrap();
        assert_eq!((s.x(), s.y(), s.z()), (0.0, 0.0, 1.0));

        let plus_y = dm(&[[c(0.5, 0.0), c(0.0, -0.5)], [c(0.0, 0.5), c(0.5, 0.0)]]);
        let s = density_to_bloch(&plus_y).unwrap();
        assert!((s.y() - 1.0).abs() < 1e-15 && s.x().abs() < 1e-15 && s.z().abs() < 1e-15);
    }

    #[test]
    fn density_rejects_bad_input() {
        let bad_trace = DMatrix::from_element(2, 2, c(0.0, 0.0));
        assert!(DensityMatrix::new(bad_trace).is_err());
        let non_herm = DMatrix::from_row_slice(
            2,
            2,
            &[c(0.5, 0.0), c(0.3, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
        );
        assert!(DensityMatrix::new(non_herm).is_err());
        assert!(DensityMatrix::new(DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let up = bloch_to_density(&SpinVector::new(0.0, 0.0, 1.0).unwrap());
        let down = bloch_to_density(&SpinVector::new(0.0, 0.0, -1.0).unwrap());
        let mixed = bloch_to_density(&SpinVector::zero());
        assert!((state_fidelity(&up, &up).unwrap() - 1.0).abs() < 1e-12);
        assert!(state_fidelity(&up, &down).unwrap().abs() < 1e-12);
        assert!((state_fidelity(&up, &mixed).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let up = bloch_to_density(&SpinVector::new(0.0, 0.0, 1.0).unwrap());
        let mut r = [0.0; 16];
        r[0] = 1.0;
        let pair = DensityMatrix::from_pauli_pair(&r).unwrap();
        assert!(matches!(
            state_fidelity(&up, &pair),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bell_negativity() {
        // |Phi+> has <XX> = 1, <YY> = -1, <ZZ> = 1
        let mut r = [0.0; 16];
        r[0] = 1.0;
        r[5] = 1.0;
        r[10] = -1.0;
        r[15] = 1.0;
        let bell = DensityMatrix::from_pauli_pair(&r).unwrap();
        assert!((negativity(&bell).unwrap() - 0.5).abs() < 1e-12);
        let mut r = [0.0; 16];
        r[0] = 1.0;
        let mixed = DensityMatrix::from_pauli_pair(&r).unwrap();
        assert!(negativity(&mixed).unwrap().abs() < 1e-12);
    }
}
