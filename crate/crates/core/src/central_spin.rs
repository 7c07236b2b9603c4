//! Frozen-fluctuation central-spin dynamics.
//!
//! Each nuclear realization is a static Overhauser field. The carrier spin
//! precesses classically about the total Larmor vector
//! `Omega = prefactor * (g o B_ext) + a o B_nuc` and dephasing appears only
//! after averaging over the Gaussian nuclear-field distribution.

use nalgebra::{Matrix3, Vector3};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::mc;
use crate::params::{PhysicalParams, Species};

/// One realization of the normalized Overhauser field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuclearField(pub Vector3<f64>);

impl NuclearField {
    pub fn zero() -> Self {
        Self(Vector3::zeros())
    }
}

/// 3x3 map from the initial to the evolved spin vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionTensor(pub Matrix3<f64>);

impl EvolutionTensor {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn orthogonality_error(&self) -> f64 {
        (self.0.transpose() * self.0 - Matrix3::identity()).norm()
    }

    pub fn max_singular_value(&self) -> f64 {
        self.0.singular_values().max()
    }

    pub fn apply(&self, s: &Vector3<f64>) -> Vector3<f64> {
        self.0 * s
    }
}

/// `i`-th standard-normal nuclear field for `seed`; independent of how many
/// other samples are drawn or in which order.
pub fn overhauser_sample(seed: u64, index: u64) -> NuclearField {
    let mut rng = mc::sample_rng(seed, index);
    let x: f64 = StandardNormal.sample(&mut rng);
    let y: f64 = StandardNormal.sample(&mut rng);
    let z: f64 = StandardNormal.sample(&mut rng);
    NuclearField(Vector3::new(x, y, z))
}

pub fn sample_overhauser(seed: u64, n: usize) -> Result<Vec<NuclearField>> {
    if n == 0 {
        return Err(Error::EmptyRequest("at least one nuclear sample is required".into()));
    }
    Ok((0..n as u64).map(|i| overhauser_sample(seed, i)).collect())
}

/// Uniform precession about a fixed axis, with the Rodrigues generator
/// precomputed so evaluating many times is cheap.
#[derive(Debug, Clone, Copy)]
pub struct Precession {
    k: Matrix3<f64>,
    k2: Matrix3<f64>,
    /// rad/ps
    rate: f64,
}

impl Precession {
    /// `omega` in rad/ns.
    pub fn new(omega: Vector3<f64>) -> Self {
        let w = omega.norm();
        if w == 0.0 {
            return Self {
                k: Matrix3::zeros(),
                k2: Matrix3::zeros(),
                rate: 0.0,
            };
        }
        let n = omega / w;
        let k = Matrix3::new(0.0, -n.z, n.y, n.z, 0.0, -n.x, -n.y, n.x, 0.0);
        Self {
            k,
            k2: k * k,
            rate: w * 1e-3,
        }
    }

    pub fn for_field(params: &PhysicalParams, species: Species, nf: &NuclearField) -> Self {
        Self::new(larmor_vector(params, species, nf))
    }

    /// Rotation after `t` ps.
    #[inline]
    pub fn at(&self, t: f64) -> Matrix3<f64> {
        if self.rate == 0.0 {
            return Matrix3::identity();
        }
        let (s, c) = (self.rate * t).sin_cos();
        Matrix3::identity() + self.k * s + self.k2 * (1.0 - c)
    }
}

/// Total Larmor vector in rad/ns.
pub fn larmor_vector(params: &PhysicalParams, species: Species, nf: &NuclearField) -> Vector3<f64> {
    params.external_larmor(species) + params.hyperfine(species).component_mul(&nf.0)
}

/// Rotation of the spin for a single frozen nuclear field after `t` ps.
pub fn evolution_tensor(
    params: &PhysicalParams,
    species: Species,
    nf: &NuclearField,
    t: f64,
) -> Result<EvolutionTensor> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    Ok(EvolutionTensor(Precession::for_field(params, species, nf).at(t)))
}

/// Ensemble-averaged tensor with per-element standard errors (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleEvolution {
    pub tensor: EvolutionTensor,
    pub std_error: Matrix3<f64>,
}

/// Monte-Carlo average of [`evolution_tensor`] over the Overhauser
/// distribution at each of `times` (ps), sharing one set of samples.
pub fn ensemble_evolution_series(
    params: &PhysicalParams,
    species: Species,
    times: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<EnsembleEvolution>> {
    if n_samples == 0 {
        return Err(Error::EmptyRequest("at least one nuclear sample is required".into()));
    }
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    let est = mc::mean_over(n_samples, 9 * times.len(), |i, out| {
        let p = Precession::for_field(params, species, &overhauser_sample(seed, i));
        for (k, &t) in times.iter().enumerate() {
            let g = p.at(t);
            for r in 0..3 {
                for c in 0..3 {
                    out[9 * k + 3 * r + c] = g[(r, c)];
                }
            }
        }
    });
    Ok((0..times.len())
        .map(|k| EnsembleEvolution {
            tensor: EvolutionTensor(Matrix3::from_row_slice(&est.mean[9 * k..9 * k + 9])),
            std_error: Matrix3::from_row_slice(&est.std_error[9 * k..9 * k + 9]),
        })
        .collect())
}

pub fn ensemble_evolution(
    params: &PhysicalParams,
    species: Species,
    t: f64,
    n_samples: usize,
    seed: u64,
) -> Result<EvolutionTensor> {
    Ok(ensemble_evolution_series(params, species, &[t], n_samples, seed)?[0].tensor)
}
