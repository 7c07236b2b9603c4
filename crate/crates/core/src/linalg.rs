//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Matrix2};
pub use nalgebra::Complex;

pub type C64 = Complex<f64>;

/// Pauli matrix `sigma_k`, `k = 0..4` for `I, X, Y, Z`.
pub fn pauli(k: usize) -> Matrix2<C64> {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match k {
        0 => Matrix2::new(l, o, o, l),
        1 => Matrix2::new(o, l, l, o),
        2 => Matrix2::new(o, -i, i, o),
        3 => Matrix2::new(l, o, o, -l),
        _ => panic!("Pauli index {k} out of range"),
    }
}

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Tensor product of Pauli matrices for the base-4 digits of `index`,
/// first qubit most significant.
pub fn pauli_string(index: usize, n_qubits: usize) -> DMatrix<C64> {
    let mut out = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for q in 0..n_qubits {
        let digit = (index >> (2 * (n_qubits - 1 - q))) & 3;
        let p = pauli(digit);
        let p = DMatrix::from_fn(2, 2, |i, j| p[(i, j)]);
        out = kron(&out, &p);
    }
    out
}

/// `rho = 2^-n sum_k r_k P_k`.
pub fn pauli_expand(r: &[f64], n_qubits: usize) -> DMatrix<C64> {
    let d = 1usize << n_qubits;
    assert_eq!(r.len(), d * d);
    let scale = 1.0 / d as f64;
    let mut out = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
    for (k, &c) in r.iter().enumerate() {
        if c != 0.0 {
            out += pauli_string(k, n_qubits) * C64::new(c * scale, 0.0);
        }
    }
    out
}

/// `r_k = Tr(rho P_k)`, the inverse of [`pauli_expand`] for Hermitian input.
pub fn pauli_coefficients(m: &DMatrix<C64>, n_qubits: usize) -> Vec<f64> {
    let d = 1usize << n_qubits;
    (0..d * d)
        .map(|k| (m * pauli_string(k, n_qubits)).trace().re)
        .collect()
}

/// Eigen-decomposition of a Hermitian matrix (eigenvalues unsorted).
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (DVector<f64>, DMatrix<C64>) {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    (eig.eigenvalues, eig.eigenvectors)
}

pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> DVector<f64> {
    hermitian_eigen(m).0
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_map(m: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
    let (vals, vecs) = hermitian_eigen(m);
    let d = DMatrix::from_diagonal(&vals.map(|v| C64::new(f(v), 0.0)));
    &vecs * d * vecs.adjoint()
}

/// Jozsa fidelity between two (possibly unnormalized) positive matrices.
/// Eigenvalues below round-off relative to the largest are treated as zero
/// so rank-deficient inputs do not pick up `sqrt(eps)` contributions.
pub fn jozsa_fidelity(rho: &DMatrix<C64>, sigma: &DMatrix<C64>) -> f64 {
    let sqrt_psd = |vals: &DVector<f64>| {
        let floor = ROUNDOFF_FLOOR * vals.iter().fold(0.0f64, |a, v| a.max(*v));
        vals.map(|v| if v > floor { v.sqrt() } else { 0.0 })
    };
    let (vals, vecs) = hermitian_eigen(rho);
    let d = DMatrix::from_diagonal(&sqrt_psd(&vals).map(|v| C64::new(v, 0.0)));
    let sqrt_rho = &vecs * d * vecs.adjoint();
    let inner = &sqrt_rho * sigma * &sqrt_rho;
    let tr: f64 = sqrt_psd(&hermitian_eigenvalues(&inner)).sum();
    (tr * tr).clamp(0.0, 1.0)
}

const ROUNDOFF_FLOOR: f64 = 1e-13;

/// Partial transpose over the second qubit of a 4x4 matrix.
pub fn partial_transpose_second(m: &DMatrix<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |r, c| {
        let (a1, a2) = (r / 2, r % 2);
        let (b1, b2) = (c / 2, c % 2);
        m[(a1 * 2 + b2, b1 * 2 + a2)]
    })
}
