// SPDX-License-Identifier: Apache-2.0

//! Pauli coordinates `x^σ = i tr(ln(U) σ) / 2^n` on the unitary group, the
//! column-stacking vectorization of superoperators, and the BCH
//! superoperator `ℰ_X = (e^{-i ad_X} - ℐ) / (-i ad_X)`.
//!
//! `ℰ_X` converts natural Pauli coordinates `y` of a tangent vector at
//! `exp(-i x·σ)` into natural adapted coordinates `ỹ` (the Hamiltonian):
//! `exp(-i(X + tY)) = exp(-i t Ỹ) exp(-iX) + O(t²)` with `Ỹ = ℰ_X(Y)`.

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::linalg::{self, c, HermitianEigen, I};
use crate::pauli::{self, BasisMode, HermitianOperator, PauliVector};
use crate::{CMatrix, Error, Result};

/// Relative gap below which eigenvalues share an eigenspace.
pub const EIGEN_CLUSTER_TOL: f64 = 1e-8;
/// Relative singular-value cutoff of the pseudoinverse.
pub const PINV_CUTOFF: f64 = 1e-10;
/// Eigenphase distance to `π` treated as lying on the branch cut.
pub const BRANCH_CUT_TOL: f64 = 1e-8;
/// Distance of an eigenvalue gap to a nonzero multiple of `2π` treated as
/// resonant.
pub const RESONANCE_TOL: f64 = 1e-8;

/// A dense `2^n × 2^n` unitary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct UnitaryOperator {
    n: usize,
    matrix: CMatrix,
}

impl UnitaryOperator {
    pub fn new(n: usize, matrix: CMatrix) -> Result<Self> {
        let dim = 1usize << n;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: matrix.nrows(),
            });
        }
        let deviation = linalg::unitarity_defect(&matrix);
        if deviation > 1e-10 {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(UnitaryOperator { n, matrix })
    }

    pub fn identity(n: usize) -> Self {
        UnitaryOperator {
            n,
            matrix: linalg::identity(1 << n),
        }
    }

    /// `exp(-i x·σ)`.
    pub fn from_pauli_coordinates(x: &PauliVector) -> Self {
        UnitaryOperator {
            n: x.n(),
            matrix: linalg::expm_hermitian(&x.matrix(), 1.0),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn determinant(&self) -> Complex64 {
        self.matrix.determinant()
    }

    /// Reject unitaries whose determinant is not 1 (for SU-mode use).
    pub fn check_special(&self) -> Result<()> {
        let d = self.determinant();
        if (d - c(1.0)).norm() >= 1e-8 {
            return Err(Error::InvalidArgument(format!(
                "determinant {:.3e}{:+.3e}i is not 1",
                d.re, d.im
            )));
        }
        Ok(())
    }
}

/// `{"n": int, "matrix": [[[re, im], ...], ...]}`, row-major.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    matrix: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<MatrixJson> for UnitaryOperator {
    type Error = Error;

    fn try_from(json: MatrixJson) -> Result<Self> {
        UnitaryOperator::new(json.n, matrix_from_rows(&json.matrix)?)
    }
}

impl From<UnitaryOperator> for MatrixJson {
    fn from(u: UnitaryOperator) -> Self {
        MatrixJson {
            n: u.n,
            matrix: matrix_to_rows(&u.matrix),
        }
    }
}

pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|k| [m[(r, k)].re, m[(r, k)].im]).collect())
        .collect()
}

pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch {
            expected: ncols,
            got: bad.len(),
        });
    }
    Ok(CMatrix::from_fn(nrows, ncols, |r, k| {
        Complex64::new(rows[r][k][0], rows[r][k][1])
    }))
}

/// Pauli coordinates of a unitary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliCoordinates {
    pub x: PauliVector,
}

impl PauliCoordinates {
    pub fn to_unitary(&self) -> UnitaryOperator {
        UnitaryOperator::from_pauli_coordinates(&self.x)
    }
}

/// A base point with the two coordinate descriptions of one tangent vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentPair {
    pub x: PauliCoordinates,
    pub y_pauli: PauliVector,
    pub y_adapted: PauliVector,
}

impl TangentPair {
    pub fn from_pauli(x: PauliVector, y_pauli: PauliVector) -> Result<Self> {
        let y_adapted = change_coords_forward(&x, &y_pauli)?;
        Ok(TangentPair {
            x: PauliCoordinates { x },
            y_pauli,
            y_adapted,
        })
    }

    pub fn from_adapted(x: PauliVector, y_adapted: PauliVector) -> Result<Self> {
        let y_pauli = change_coords_backward(&x, &y_adapted)?;
        Ok(TangentPair {
            x: PauliCoordinates { x },
            y_pauli,
            y_adapted,
        })
    }
}

/// Column-stacking vectorization.
pub fn vec(a: &CMatrix) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(a.as_slice())
}

pub fn unvec(v: &nalgebra::DVector<Complex64>, rows: usize, cols: usize) -> Result<CMatrix> {
    if v.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            expected: rows * cols,
            got: v.len(),
        });
    }
    Ok(CMatrix::from_column_slice(rows, cols, v.as_slice()))
}

/// A linear map on `D × D` matrices, stored as its `D² × D²` action on
/// column-stacked vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    pub vec_matrix: CMatrix,
}

impl Superoperator {
    pub fn identity(dim: usize) -> Self {
        Superoperator {
            vec_matrix: linalg::identity(dim * dim),
        }
    }

    /// Side `D` of the matrices acted on.
    pub fn dim(&self) -> usize {
        (self.vec_matrix.nrows() as f64).sqrt().round() as usize
    }

    pub fn apply(&self, z: &CMatrix) -> CMatrix {
        let d = self.dim();
        assert_eq!(z.shape(), (d, d), "superoperator acts on {d}x{d} matrices");
        let out = &self.vec_matrix * vec(z);
        CMatrix::from_column_slice(d, d, out.as_slice())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        Superoperator {
            vec_matrix: &self.vec_matrix * &other.vec_matrix,
        }
    }
}

/// `vec(ad_X) = I⊗X - Xᵀ⊗I`.
pub fn vec_ad(x: &CMatrix) -> Superoperator {
    let id = linalg::identity(x.nrows());
    Superoperator {
        vec_matrix: linalg::kron(&id, x) - linalg::kron(&x.transpose(), &id),
    }
}

/// Eigenvalue clusters: each entry lists eigenvector columns of one
/// eigenspace.
fn clusters(eig: &HermitianEigen) -> Vec<Vec<usize>> {
    let tol = EIGEN_CLUSTER_TOL * eig.spectral_radius();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (k, &v) in eig.values.iter().enumerate() {
        match out.last_mut() {
            Some(last) if v - eig.values[*last.last().unwrap()] <= tol => last.push(k),
            _ => out.push(vec![k]),
        }
    }
    out
}

fn projector_from(eig: &HermitianEigen) -> Superoperator {
    let d = eig.values.len();
    let mut vec_p = CMatrix::zeros(d * d, d * d);
    for cluster in clusters(eig) {
        let cols = eig.vectors.select_columns(&cluster);
        let p = &cols * cols.adjoint();
        vec_p += linalg::kron(&p.transpose(), &p);
    }
    Superoperator { vec_matrix: vec_p }
}

/// Projector onto `ker(ad_X)`: `𝒫(Z) = Σ_j P_j Z P_j` over the eigenprojectors
/// of the distinct eigenvalues of `X`.
pub fn kernel_projector(x: &HermitianOperator) -> Superoperator {
    projector_from(&HermitianEigen::new(x.matrix()))
}

/// `e^{-iλ} - 1` without cancellation for small `λ`.
fn expm1_neg_i(lambda: f64) -> Complex64 {
    let s = (0.5 * lambda).sin();
    Complex64::new(-2.0 * s * s, -lambda.sin())
}

/// `ℰ_X` via the vectorized formula with the Moore–Penrose inverse:
/// `vec(ℰ_X) = vec(𝒫) - i (U*⊗U - I)·pinv(X*⊗I - I⊗X)·(I - vec(𝒫))`.
///
/// `U*⊗U - I` is assembled as `E*⊗U + I⊗E` with `E = U - I` computed from the
/// eigenphases, which keeps full relative accuracy when `X` is small.
pub fn bch_e(x: &HermitianOperator) -> Superoperator {
    let eig = HermitianEigen::new(x.matrix());
    let d = eig.values.len();
    let id = linalg::identity(d);
    let id2 = linalg::identity(d * d);
    let u = eig.map(|l| Complex64::from_polar(1.0, -l));
    let e = eig.map(expm1_neg_i);
    let u_minus = linalg::kron(&e.conjugate(), &u) + linalg::kron(&id, &e);
    let xm = x.matrix();
    let gen = linalg::kron(&xm.conjugate(), &id) - linalg::kron(&id, xm);
    let vec_p = projector_from(&eig).vec_matrix;
    let complement = &id2 - &vec_p;
    let body = u_minus * linalg::pinv(&gen, PINV_CUTOFF) * complement;
    Superoperator {
        vec_matrix: vec_p - body * I,
    }
}

/// Truncated power series `Σ_{j<terms} (-i ad_X)^j / (j+1)!`; the test
/// oracle for [`bch_e`].
pub fn bch_e_series(x: &HermitianOperator, terms: usize) -> Superoperator {
    let ad = vec_ad(x.matrix()).vec_matrix * (-I);
    let d2 = ad.nrows();
    let mut power = linalg::identity(d2);
    let mut sum = CMatrix::zeros(d2, d2);
    let mut factorial = 1.0;
    for j in 0..terms {
        factorial *= (j + 1) as f64;
        sum += &power * c(1.0 / factorial);
        power = &ad * power;
    }
    Superoperator { vec_matrix: sum }
}

fn check_resonance(eig: &HermitianEigen) -> Result<()> {
    for (a, &la) in eig.values.iter().enumerate() {
        for &lb in &eig.values[a + 1..] {
            let gap = lb - la;
            let k = (gap / (2.0 * PI)).round();
            if k != 0.0 && (gap - 2.0 * PI * k).abs() < RESONANCE_TOL {
                return Err(Error::ResonantSpectrum { gap });
            }
        }
    }
    Ok(())
}

/// `ℰ_X^{-1}`: `vec(𝒫) + i (X*⊗I - I⊗X)·pinv(U*⊗U - I)·(I - vec(𝒫))`.
pub fn bch_e_inverse(x: &HermitianOperator) -> Result<Superoperator> {
    let eig = HermitianEigen::new(x.matrix());
    check_resonance(&eig)?;
    let d = eig.values.len();
    let id = linalg::identity(d);
    let id2 = linalg::identity(d * d);
    let u = eig.map(|l| Complex64::from_polar(1.0, -l));
    let e = eig.map(expm1_neg_i);
    let u_minus = linalg::kron(&e.conjugate(), &u) + linalg::kron(&id, &e);
    let xm = x.matrix();
    let gen = linalg::kron(&xm.conjugate(), &id) - linalg::kron(&id, xm);
    let vec_p = projector_from(&eig).vec_matrix;
    let complement = &id2 - &vec_p;
    let body = gen * linalg::pinv(&u_minus, PINV_CUTOFF) * complement;
    Ok(Superoperator {
        vec_matrix: vec_p + body * I,
    })
}

/// `(e^{-ia} - 1) / (-ia) = sinc(a) - i (a/2) sinc²(a/2)`: the eigenvalue of
/// `ℰ_X` on `|j⟩⟨k|` in the eigenbasis of `X`, with `a = λ_j - λ_k`.
pub fn bch_multiplier(a: f64) -> Complex64 {
    Complex64::new(sinc(a), -0.5 * a * sinc(0.5 * a).powi(2))
}

pub fn sinc(a: f64) -> f64 {
    if a.abs() < 1e-4 {
        let a2 = a * a;
        1.0 - a2 / 6.0 + a2 * a2 / 120.0
    } else {
        a.sin() / a
    }
}

/// `ℰ_X` and its inverse applied in the eigenbasis of `X`, where both are
/// entrywise multipliers. Equivalent to [`bch_e`] / [`bch_e_inverse`] and
/// much cheaper when many vectors share one base point.
#[derive(Clone, Debug)]
pub struct BchChart {
    n: usize,
    eig: HermitianEigen,
    multipliers: CMatrix,
}

impl BchChart {
    pub fn new(x: &PauliVector) -> Self {
        let eig = HermitianEigen::new(&x.matrix());
        let d = eig.values.len();
        let multipliers =
            CMatrix::from_fn(d, d, |j, k| bch_multiplier(eig.values[j] - eig.values[k]));
        BchChart {
            n: x.n(),
            eig,
            multipliers,
        }
    }

    fn to_eigenbasis(&self, z: &CMatrix) -> CMatrix {
        self.eig.vectors.adjoint() * z * &self.eig.vectors
    }

    fn from_eigenbasis(&self, z: &CMatrix) -> CMatrix {
        &self.eig.vectors * z * self.eig.vectors.adjoint()
    }

    pub fn forward(&self, z: &CMatrix) -> CMatrix {
        let b = self.to_eigenbasis(z).component_mul(&self.multipliers);
        self.from_eigenbasis(&b)
    }

    pub fn inverse(&self, z: &CMatrix) -> Result<CMatrix> {
        check_resonance(&self.eig)?;
        let b = self.to_eigenbasis(z).zip_map(&self.multipliers, |v, m| v / m);
        Ok(self.from_eigenbasis(&b))
    }

    /// Real matrix `M` with `ỹ = M y`: `M_{sr} = tr(σ_s ℰ_X(σ_r)) / 2^n`.
    pub fn coordinate_change_matrix(&self, mode: BasisMode) -> DMatrix<f64> {
        self.coordinate_change_matrix_in(&basis_matrices(self.n, mode))
    }

    /// As [`Self::coordinate_change_matrix`], with the basis matrices supplied
    /// by the caller (see [`basis_matrices`]).
    pub fn coordinate_change_matrix_in(&self, basis: &[CMatrix]) -> DMatrix<f64> {
        self.change_matrix(basis, |m| m)
    }

    /// `M^{-1}`, for `y = M^{-1} ỹ`.
    pub fn inverse_change_matrix(&self, mode: BasisMode) -> Result<DMatrix<f64>> {
        check_resonance(&self.eig)?;
        Ok(self.change_matrix(&basis_matrices(self.n, mode), |m| c(1.0) / m))
    }

    fn change_matrix<F: Fn(Complex64) -> Complex64>(&self, basis: &[CMatrix], f: F) -> DMatrix<f64> {
        let dim = 1usize << self.n;
        // Columns vec(V† σ_r V); M = Re(B† diag(φ) B) / 2^n.
        let mut b = CMatrix::zeros(dim * dim, basis.len());
        for (r, s) in basis.iter().enumerate() {
            b.set_column(r, &vec(&self.to_eigenbasis(s)));
        }
        let phi = vec(&self.multipliers.map(f));
        let mut scaled = b.clone();
        for (row, w) in phi.iter().enumerate() {
            for col in 0..basis.len() {
                scaled[(row, col)] *= w;
            }
        }
        (b.adjoint() * scaled).map(|z| z.re / dim as f64)
    }
}

/// Dense matrices of the basis strings, in canonical order.
pub fn basis_matrices(n: usize, mode: BasisMode) -> Vec<CMatrix> {
    pauli::basis(n, mode).map(|s| s.matrix()).collect()
}

fn check_pair(x: &PauliVector, y: &PauliVector) -> Result<()> {
    if x.n() != y.n() || x.mode() != y.mode() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    Ok(())
}

/// Natural Pauli coordinates `y` to natural adapted coordinates
/// `ỹ = ℰ_{x·σ}(y·σ)`.
pub fn change_coords_forward(x: &PauliVector, y_pauli: &PauliVector) -> Result<PauliVector> {
    check_pair(x, y_pauli)?;
    let out = BchChart::new(x).forward(&y_pauli.matrix());
    Ok(PauliVector::from_matrix_unchecked(x.n(), x.mode(), &out))
}

/// Inverse of [`change_coords_forward`].
pub fn change_coords_backward(x: &PauliVector, y_adapted: &PauliVector) -> Result<PauliVector> {
    check_pair(x, y_adapted)?;
    let out = BchChart::new(x).inverse(&y_adapted.matrix())?;
    Ok(PauliVector::from_matrix_unchecked(x.n(), x.mode(), &out))
}

/// The matrix `M(x)` with `ỹ = M(x) y`.
pub fn coordinate_change_matrix(x: &PauliVector) -> DMatrix<f64> {
    BchChart::new(x).coordinate_change_matrix(x.mode())
}

fn check_su2_patch(x: &Vector3<f64>) -> Result<f64> {
    let r = x.norm();
    if r >= PI {
        return Err(Error::OutsidePatch(format!("|x| = {r} >= pi")));
    }
    Ok(r)
}

fn split(x: &Vector3<f64>, v: &Vector3<f64>, r: f64) -> (Vector3<f64>, Vector3<f64>) {
    if r == 0.0 {
        return (Vector3::zeros(), *v);
    }
    let par = x * (x.dot(v) / (r * r));
    (par, v - par)
}

/// Single-qubit closed form of [`change_coords_backward`]:
/// `y = ỹ_∥ + |x| cot|x| ỹ_⊥ + ỹ × x`.
pub fn su2_adapted_to_pauli(x: &Vector3<f64>, y_tilde: &Vector3<f64>) -> Result<Vector3<f64>> {
    let r = check_su2_patch(x)?;
    let (par, perp) = split(x, y_tilde, r);
    let r_cot = if r < 1e-4 { 1.0 - r * r / 3.0 } else { r / r.tan() };
    Ok(par + perp * r_cot + y_tilde.cross(x))
}

/// Single-qubit closed form of [`change_coords_forward`]:
/// `ỹ = y_∥ + sinc(2|x|) y_⊥ + sinc²(|x|) x × y_⊥`.
pub fn su2_pauli_to_adapted(x: &Vector3<f64>, y: &Vector3<f64>) -> Result<Vector3<f64>> {
    let r = check_su2_patch(x)?;
    let (par, perp) = split(x, y, r);
    Ok(par + perp * sinc(2.0 * r) + x.cross(&perp) * sinc(r).powi(2))
}

/// Principal-branch Pauli coordinates `x` with `exp(-i x·σ) = U`.
///
/// In SU mode the eigenphases must sum to zero so that the logarithm is
/// traceless; unitaries whose principal logarithm has nonzero trace are
/// reported as outside the patch.
pub fn pauli_log(u: &UnitaryOperator, mode: BasisMode) -> Result<PauliCoordinates> {
    let schur = u.matrix.clone().schur();
    let (q, t) = schur.unpack();
    let d = t.nrows();
    let mut phases = Vec::with_capacity(d);
    for k in 0..d {
        let theta = t[(k, k)].arg();
        let distance = PI - theta.abs();
        if distance < BRANCH_CUT_TOL {
            return Err(Error::BranchCut { distance });
        }
        phases.push(theta);
    }
    // i ln U = Q diag(-θ) Q†
    let diag = nalgebra::DVector::from_iterator(d, phases.iter().map(|&t| c(-t)));
    let h = &q * CMatrix::from_diagonal(&diag) * q.adjoint();
    if mode == BasisMode::SU {
        let trace: f64 = phases.iter().sum();
        if trace.abs() > 1e-8 {
            return Err(Error::OutsidePatch(format!(
                "principal logarithm has trace {trace:.6} in SU mode"
            )));
        }
    }
    Ok(PauliCoordinates {
        x: PauliVector::from_matrix_unchecked(u.n, mode, &h),
    })
}

/// Unique solution of `X + X × A = B`:
/// `X = (B + A (A·B) + A × B) / (1 + |A|²)`.
pub fn solve_cross_equation(a: &Vector3<f64>, b: &Vector3<f64>) -> Vector3<f64> {
    (b + a * a.dot(b) + a.cross(b)) / (1.0 + a.norm_squared())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_complex(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> CMatrix {
        let re = linalg::random_gaussian_vector(rows * cols, r);
        let im = linalg::random_gaussian_vector(rows * cols, r);
        CMatrix::from_fn(rows, cols, |i, j| Complex64::new(re[i * cols + j], im[i * cols + j]))
    }

    fn random_pauli(n: usize, scale: f64, r: &mut ChaCha8Rng) -> PauliVector {
        let e = linalg::random_gaussian_vector(BasisMode::SU.dim(n), r);
        let norm = e.norm();
        PauliVector::from_entries(n, BasisMode::SU, e * (scale / norm)).unwrap()
    }

    fn herm(v: &PauliVector) -> HermitianOperator {
        v.to_matrix()
    }

    fn to3(v: &PauliVector) -> Vector3<f64> {
        Vector3::new(v.entries()[0], v.entries()[1], v.entries()[2])
    }

    fn from3(v: &Vector3<f64>) -> PauliVector {
        PauliVector::from_entries(1, BasisMode::SU, nalgebra::DVector::from_column_slice(v.as_slice()))
            .unwrap()
    }

    #[test]
    fn vec_is_column_stacking() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(3.0), c(4.0)]);
        let v = vec(&m);
        assert_eq!(v.as_slice(), &[c(1.0), c(3.0), c(2.0), c(4.0)]);
        assert_eq!(unvec(&v, 2, 2).unwrap(), m);
        assert!(matches!(unvec(&v, 3, 2), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn vec_of_outer_product() {
        // vec(|j⟩⟨k|) = |k⟩ ⊗ |j⟩
        let d = 3;
        for j in 0..d {
            for k in 0..d {
                let mut m = CMatrix::zeros(d, d);
                m[(j, k)] = c(1.0);
                let v = vec(&m);
                for idx in 0..d * d {
                    let expected = if idx == k * d + j { 1.0 } else { 0.0 };
                    assert_eq!(v[idx], c(expected));
                }
            }
        }
    }

    #[test]
    fn roth_lemma() {
        let mut r = rng(1);
        for (l, m, n, p) in [(2, 3, 4, 2), (3, 2, 2, 4), (4, 4, 3, 3), (2, 2, 2, 2)] {
            let a = random_complex(l, m, &mut r);
            let b = random_complex(m, n, &mut r);
            let cm = random_complex(n, p, &mut r);
            let lhs = vec(&(&a * &b * &cm));
            let rhs = linalg::kron(&cm.transpose(), &a) * vec(&b);
            assert!((lhs - rhs).iter().fold(0.0f64, |m, z| m.max(z.norm())) < 1e-12);
        }
    }

    #[test]
    fn vec_ad_matches_commutator() {
        let mut r = rng(2);
        let x = herm(&random_pauli(2, 1.5, &mut r));
        let z = random_complex(4, 4, &mut r);
        let direct = x.matrix() * &z - &z * x.matrix();
        let via = vec_ad(x.matrix()).apply(&z);
        assert!(linalg::max_abs_diff(&direct, &via) < 1e-12);
        // For Hermitian X the transpose is the conjugate.
        let alt = linalg::kron(&linalg::identity(4), x.matrix())
            - linalg::kron(&x.matrix().conjugate(), &linalg::identity(4));
        assert!(linalg::max_abs_diff(&alt, &vec_ad(x.matrix()).vec_matrix) < 1e-15);
    }

    #[test]
    fn vec_exp_ad_is_kron_of_unitaries() {
        let mut r = rng(3);
        let x = herm(&random_pauli(2, 2.0, &mut r));
        let u = linalg::expm_hermitian(x.matrix(), 1.0);
        let ad = vec_ad(x.matrix()).vec_matrix;
        // ad is Hermitian, so exp(-i ad) follows from its eigendecomposition.
        let exp_ad = linalg::expm_hermitian(&ad, 1.0);
        let kron = linalg::kron(&u.conjugate(), &u);
        assert!(linalg::max_abs_diff(&exp_ad, &kron) < 1e-10);
    }

    #[test]
    fn projector_of_z_keeps_diagonal() {
        let z = herm(&PauliVector::from_terms(1, BasisMode::SU, [("Z", 1.0)]).unwrap());
        let p = kernel_projector(&z);
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(3.0), c(4.0)]);
        let out = p.apply(&m);
        let expected = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(4.0)]);
        assert!(linalg::max_abs_diff(&out, &expected) < 1e-15);
    }

    #[test]
    fn projector_of_scalar_is_identity() {
        let x = HermitianOperator::new(2, linalg::identity(4) * c(0.7)).unwrap();
        let p = kernel_projector(&x);
        assert!(linalg::max_abs_diff(&p.vec_matrix, &linalg::identity(16)) < 1e-14);
    }

    #[test]
    fn projector_properties() {
        let mut r = rng(4);
        let x = herm(&random_pauli(2, 1.0, &mut r));
        let p = kernel_projector(&x);
        let z = random_complex(4, 4, &mut r);
        let pz = p.apply(&z);
        assert!(linalg::max_abs(&(x.matrix() * &pz - &pz * x.matrix())) < 1e-10);
        assert!(linalg::max_abs_diff(&p.compose(&p).vec_matrix, &p.vec_matrix) < 1e-12);
        assert!(linalg::hermiticity_defect(&p.vec_matrix) < 1e-12);
    }

    #[test]
    fn projector_merges_degenerate_eigenvalues() {
        // ZZ has two doubly degenerate eigenvalues; XX commutes with it but is
        // not diagonal in the computational basis.
        let zz = herm(&PauliVector::from_terms(2, BasisMode::SU, [("ZZ", 1.0)]).unwrap());
        let xx = "XX".parse::<PauliString>().unwrap().matrix();
        let p = kernel_projector(&zz);
        assert!(linalg::max_abs_diff(&p.apply(&xx), &xx) < 1e-12);
    }

    #[test]
    fn bch_e_at_zero_is_identity() {
        let x = herm(&PauliVector::zeros(2, BasisMode::SU));
        assert!(linalg::max_abs_diff(&bch_e(&x).vec_matrix, &linalg::identity(16)) < 1e-15);
        let inv = bch_e_inverse(&x).unwrap();
        assert!(linalg::max_abs_diff(&inv.vec_matrix, &linalg::identity(16)) < 1e-15);
    }

    #[test]
    fn bch_e_fixes_kernel() {
        let mut r = rng(5);
        let x = herm(&random_pauli(2, 1.3, &mut r));
        let z = x.matrix() * x.matrix() * c(0.4) + linalg::identity(4) * c(0.2);
        assert!(linalg::max_abs_diff(&bch_e(&x).apply(&z), &z) < 1e-12);
    }

    #[test]
    fn bch_e_matches_power_series() {
        let mut r = rng(6);
        for n in [1, 2] {
            for _ in 0..5 {
                let x = herm(&random_pauli(n, 1.0, &mut r));
                let exact = bch_e(&x);
                let series = bch_e_series(&x, 30);
                let z = random_complex(1 << n, 1 << n, &mut r);
                let dev = linalg::max_abs_diff(&exact.apply(&z), &series.apply(&z));
                assert!(dev < 1e-10, "n = {n}: {dev}");
            }
        }
    }

    #[test]
    fn eigenbasis_path_matches_vectorized() {
        let mut r = rng(7);
        let x = random_pauli(2, 2.5, &mut r);
        let chart = BchChart::new(&x);
        let z = random_complex(4, 4, &mut r);
        let fwd = bch_e(&herm(&x)).apply(&z);
        assert!(linalg::max_abs_diff(&chart.forward(&z), &fwd) < 1e-11);
        let inv = bch_e_inverse(&herm(&x)).unwrap().apply(&z);
        assert!(linalg::max_abs_diff(&chart.inverse(&z).unwrap(), &inv) < 1e-10);
    }

    #[test]
    fn inverse_composes_to_identity() {
        let mut r = rng(8);
        for scale in [0.1, 1.0, 2.5] {
            let x = herm(&random_pauli(2, scale, &mut r));
            let comp = bch_e_inverse(&x).unwrap().compose(&bch_e(&x));
            let z = random_complex(4, 4, &mut r);
            assert!(linalg::max_abs_diff(&comp.apply(&z), &z) < 1e-9);
        }
    }

    #[test]
    fn resonant_spectrum_rejected() {
        // x·σ = πZ has eigenvalues ±π: gap 2π.
        let x = herm(&PauliVector::from_terms(1, BasisMode::SU, [("Z", PI)]).unwrap());
        assert!(matches!(bch_e_inverse(&x), Err(Error::ResonantSpectrum { .. })));
    }

    #[test]
    fn bch_first_order_property() {
        let mut r = rng(9);
        let x = random_pauli(2, 1.2, &mut r);
        let y = random_pauli(2, 1.0, &mut r);
        let yt = change_coords_forward(&x, &y).unwrap();
        let err = |t: f64| {
            let lhs = linalg::expm_hermitian(&(x.matrix() + y.matrix() * c(t)), 1.0);
            let rhs = linalg::expm_hermitian(&yt.matrix(), t) * linalg::expm_hermitian(&x.matrix(), 1.0);
            linalg::max_abs_diff(&lhs, &rhs)
        };
        let (e1, e2) = (err(1e-3), err(5e-4));
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn forward_is_identity_at_origin_and_on_parallel_vectors() {
        let mut r = rng(10);
        let y = random_pauli(2, 1.0, &mut r);
        let out = change_coords_forward(&PauliVector::zeros(2, BasisMode::SU), &y).unwrap();
        assert!((out.entries() - y.entries()).amax() < 1e-15);
        let x = random_pauli(2, 1.7, &mut r);
        let par = x.scaled(0.37);
        let out = change_coords_forward(&x, &par).unwrap();
        assert!((out.entries() - par.entries()).amax() < 1e-12);
    }

    #[test]
    fn forward_backward_round_trip() {
        let mut r = rng(11);
        let x = random_pauli(2, 2.0, &mut r);
        let y = random_pauli(2, 1.0, &mut r);
        let back = change_coords_backward(&x, &change_coords_forward(&x, &y).unwrap()).unwrap();
        assert!((back.entries() - y.entries()).amax() < 1e-9);
    }

    #[test]
    fn change_matrix_matches_forward_map() {
        let mut r = rng(12);
        let x = random_pauli(2, 1.4, &mut r);
        let y = random_pauli(2, 1.0, &mut r);
        let m = coordinate_change_matrix(&x);
        let direct = change_coords_forward(&x, &y).unwrap();
        assert!((&m * y.entries() - direct.entries()).amax() < 1e-12);
        let inv = BchChart::new(&x).inverse_change_matrix(BasisMode::SU).unwrap();
        assert!((&inv * &m - DMatrix::identity(15, 15)).amax() < 1e-10);
    }

    #[test]
    fn su2_closed_form_matches_general() {
        let mut r = rng(13);
        for scale in [0.0, 1e-6, 0.4, 1.5, 3.0] {
            let x = random_pauli(1, scale, &mut r);
            let y = random_pauli(1, 1.0, &mut r);
            let general = change_coords_forward(&x, &y).unwrap();
            let closed = su2_pauli_to_adapted(&to3(&x), &to3(&y)).unwrap();
            assert!((to3(&general) - closed).amax() < 1e-10, "scale {scale}");
            let back = su2_adapted_to_pauli(&to3(&x), &closed).unwrap();
            assert!((back - to3(&y)).amax() < 1e-10, "scale {scale}");
        }
    }

    #[test]
    fn su2_closed_form_exponential_oracle() {
        let mut r = rng(14);
        let x = to3(&random_pauli(1, 0.9, &mut r));
        let yt = to3(&random_pauli(1, 1.0, &mut r));
        let y = su2_adapted_to_pauli(&x, &yt).unwrap();
        let err = |t: f64| {
            let lhs = linalg::expm_hermitian(&from3(&(x + y * t)).matrix(), 1.0);
            let rhs = linalg::expm_hermitian(&from3(&yt).matrix(), t)
                * linalg::expm_hermitian(&from3(&x).matrix(), 1.0);
            linalg::max_abs_diff(&lhs, &rhs)
        };
        let ratio = err(1e-3) / err(1e-4);
        assert!((ratio - 100.0).abs() < 2.0, "ratio {ratio}");
    }

    #[test]
    fn su2_parallel_and_origin() {
        let x = Vector3::new(0.3, -0.2, 0.5);
        let yt = x * 2.0;
        assert!((su2_adapted_to_pauli(&x, &yt).unwrap() - yt).amax() < 1e-15);
        let v = Vector3::new(1.0, 2.0, 3.0);
        assert_eq!(su2_adapted_to_pauli(&Vector3::zeros(), &v).unwrap(), v);
        assert_eq!(su2_pauli_to_adapted(&Vector3::zeros(), &v).unwrap(), v);
        assert!(matches!(
            su2_pauli_to_adapted(&Vector3::new(PI, 0.0, 0.0), &v),
            Err(Error::OutsidePatch(_))
        ));
    }

    #[test]
    fn pauli_log_examples() {
        let x = pauli_log(&UnitaryOperator::identity(2), BasisMode::SU).unwrap();
        assert!(x.x.entries().amax() < 1e-15);
        let zz = PauliVector::from_terms(2, BasisMode::SU, [("ZZ", 0.3)]).unwrap();
        let u = UnitaryOperator::from_pauli_coordinates(&zz);
        let x = pauli_log(&u, BasisMode::SU).unwrap();
        assert!((x.x.entries() - zz.entries()).amax() < 1e-14);
        let minus = UnitaryOperator::new(1, linalg::identity(2) * c(-1.0)).unwrap();
        assert!(matches!(pauli_log(&minus, BasisMode::U), Err(Error::BranchCut { .. })));
    }

    #[test]
    fn pauli_log_round_trip() {
        let mut r = rng(15);
        for n in [1, 2, 3] {
            // Coefficient norm 1 keeps every eigenvalue of x·σ inside (-π, π).
            let x = random_pauli(n, 1.0, &mut r);
            let u = UnitaryOperator::from_pauli_coordinates(&x);
            let back = pauli_log(&u, BasisMode::SU).unwrap();
            let u2 = back.to_unitary();
            assert!(linalg::max_abs_diff(u.matrix(), u2.matrix()) < 1e-9);
        }
        let u = UnitaryOperator::new(2, linalg::random_unitary(4, &mut r)).unwrap();
        let x = pauli_log(&u, BasisMode::U).unwrap();
        assert!(linalg::max_abs_diff(x.to_unitary().matrix(), u.matrix()) < 1e-9);
    }

    #[test]
    fn pauli_log_rejects_wrapped_su_logarithm() {
        // Eigenvalues {4, 0, -1, -3}: only 4 wraps, so the principal log has
        // trace -2π.
        let x = PauliVector::from_terms(2, BasisMode::SU, [("ZI", 2.0), ("IZ", 1.5), ("ZZ", 0.5)])
            .unwrap();
        let u = UnitaryOperator::from_pauli_coordinates(&x);
        assert!(matches!(pauli_log(&u, BasisMode::SU), Err(Error::OutsidePatch(_))));
        assert!(pauli_log(&u, BasisMode::U).is_ok());
    }

    #[test]
    fn unitary_json_round_trip() {
        let mut r = rng(16);
        let u = UnitaryOperator::new(1, linalg::random_unitary(2, &mut r)).unwrap();
        let text = serde_json::to_string(&u).unwrap();
        let back: UnitaryOperator = serde_json::from_str(&text).unwrap();
        assert_eq!(back, u);
        let bad = r#"{"n":1,"matrix":[[[2,0],[0,0]],[[0,0],[1,0]]]}"#;
        assert!(serde_json::from_str::<UnitaryOperator>(bad).is_err());
    }

    #[test]
    fn cross_equation_examples() {
        let b = Vector3::new(1.0, -2.0, 0.5);
        assert_eq!(solve_cross_equation(&Vector3::zeros(), &b), b);
        let a = Vector3::new(0.0, 0.0, 1.0);
        let b = Vector3::new(1.0, 0.0, 0.0);
        let x = solve_cross_equation(&a, &b);
        assert!((x + x.cross(&a) - b).amax() < 1e-14);
        assert!((x - Vector3::new(0.5, 0.5, 0.0)).amax() < 1e-15);
    }

    proptest! {
        #[test]
        fn cross_equation_residual(
            a in prop::array::uniform3(-5.0f64..5.0),
            b in prop::array::uniform3(-5.0f64..5.0),
        ) {
            let a = Vector3::from(a);
            let b = Vector3::from(b);
            let x = solve_cross_equation(&a, &b);
            prop_assert!((x + x.cross(&a) - b).amax() < 1e-12 * (1.0 + b.amax()));
        }

        #[test]
        fn su2_maps_are_inverse(
            x in prop::array::uniform3(-1.8f64..1.8),
            y in prop::array::uniform3(-3.0f64..3.0),
        ) {
            let x = Vector3::from(x);
            let y = Vector3::from(y);
            prop_assume!(x.norm() < 3.0);
            let yt = su2_pauli_to_adapted(&x, &y).unwrap();
            let back = su2_adapted_to_pauli(&x, &yt).unwrap();
            prop_assert!((back - y).amax() < 1e-9 * (1.0 + y.amax()));
        }
    }
}
