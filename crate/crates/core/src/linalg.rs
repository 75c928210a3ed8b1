// SPDX-License-Identifier: Apache-2.0

//! Small dense linear-algebra helpers shared by the other modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::CMatrix;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let d = m.nrows();
    max_abs_diff(&(m * m.adjoint()), &identity(d))
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(m: &CMatrix) -> Self {
        // Symmetrize first so rounding noise in the input cannot leak into the
        // eigenvalues as imaginary parts.
        let sym = (m + m.adjoint()) * c(0.5);
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMatrix::from_fn(m.nrows(), m.ncols(), |r, col| {
            eig.eigenvectors[(r, order[col])]
        });
        HermitianEigen { values, vectors }
    }

    /// `V f(Λ) V†`.
    pub fn map<F: Fn(f64) -> Complex64>(&self, f: F) -> CMatrix {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for col in 0..d {
            let w = f(self.values[col]);
            for r in 0..d {
                scaled[(r, col)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// `exp(-i t H)` for Hermitian `H`.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    HermitianEigen::new(h).map(|l| Complex64::from_polar(1.0, -l * t))
}

/// Moore–Penrose pseudoinverse; singular values below `rel_cutoff` times the
/// largest one are treated as zero.
pub fn pinv(m: &CMatrix, rel_cutoff: f64) -> CMatrix {
    // nalgebra's SVD loses accuracy on matrices with clustered singular
    // values, which is exactly the Kronecker-sum structure fed in here, so
    // everything goes through the Hermitian eigensolver instead.
    if m.is_square() && max_abs_diff(m, &m.adjoint()) <= 1e-14 * m.camax().max(1.0) {
        let eig = ((m + m.adjoint()) * c(0.5)).symmetric_eigen();
        let lmax = eig.eigenvalues.amax();
        if lmax == 0.0 {
            return CMatrix::zeros(m.ncols(), m.nrows());
        }
        let inv = eig
            .eigenvalues
            .map(|l| if l.abs() > rel_cutoff * lmax { c(1.0 / l) } else { c(0.0) });
        return &eig.eigenvectors * CMatrix::from_diagonal(&inv) * eig.eigenvectors.adjoint();
    }
    // Normal equations: eigenvalues of AᴴA are squared singular values. The
    // cutoff is floored so eigensolver noise (about eps·σ_max²) is never
    // mistaken for a genuine singular value.
    let gram = m.adjoint() * m;
    let eig = ((&gram + gram.adjoint()) * c(0.5)).symmetric_eigen();
    let lmax = eig.eigenvalues.amax();
    if lmax == 0.0 {
        return CMatrix::zeros(m.ncols(), m.nrows());
    }
    let cut = rel_cutoff.max(GRAM_CUTOFF_FLOOR);
    let inv = eig
        .eigenvalues
        .map(|l| if l > cut * cut * lmax { c(1.0 / l) } else { c(0.0) });
    &eig.eigenvectors * CMatrix::from_diagonal(&inv) * eig.eigenvectors.adjoint() * m.adjoint()
}

/// Relative singular-value floor when the pseudo-inverse goes through `AᴴA`.
const GRAM_CUTOFF_FLOOR: f64 = 1e-7;

/// Closest unitary in Frobenius norm (the unitary polar factor
/// `A (AᴴA)^{-1/2}`). Intended for nearly unitary input.
pub fn unitarize(m: &CMatrix) -> CMatrix {
    let gram = m.adjoint() * m;
    let eig = ((&gram + gram.adjoint()) * c(0.5)).symmetric_eigen();
    let inv_sqrt = eig.eigenvalues.map(|l| c(1.0 / l.max(f64::MIN_POSITIVE).sqrt()));
    m * &eig.eigenvectors * CMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.adjoint()
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut out = q;
    for col in 0..dim {
        let d = r[(col, col)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
        for row in 0..dim {
            out[(row, col)] *= phase;
        }
    }
    out
}

pub fn random_gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

/// Minimum eigenvalue of a real symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}
