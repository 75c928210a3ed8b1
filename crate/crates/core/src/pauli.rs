// SPDX-License-Identifier: Apache-2.0

//! Generalized Pauli basis of `su(2^n)` / `u(2^n)`.
//!
//! Qubit 0 is the leftmost tensor factor and the most significant bit of a
//! computational-basis index. Strings are ordered lexicographically with
//! `I < X < Y < Z`, which is the same as ordering by the base-4 code returned
//! by [`PauliString::code`]. In [`BasisMode::SU`] the identity string is
//! dropped, so vector index = code - 1.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, c, I};
use crate::{CMatrix, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BasisMode {
    /// Traceless Hamiltonians, identity string excluded: dimension `4^n - 1`.
    #[serde(rename = "SU")]
    SU,
    /// Identity string included: dimension `4^n`.
    #[serde(rename = "U")]
    U,
}

impl BasisMode {
    pub fn dim(self, n: usize) -> usize {
        match self {
            BasisMode::SU => (1usize << (2 * n)) - 1,
            BasisMode::U => 1usize << (2 * n),
        }
    }

    fn offset(self) -> usize {
        match self {
            BasisMode::SU => 1,
            BasisMode::U => 0,
        }
    }
}

impl fmt::Display for BasisMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisMode::SU => write!(f, "SU"),
            BasisMode::U => write!(f, "U"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub fn code(self) -> usize {
        match self {
            Letter::I => 0,
            Letter::X => 1,
            Letter::Y => 2,
            Letter::Z => 3,
        }
    }

    pub fn from_code(code: usize) -> Self {
        match code & 3 {
            0 => Letter::I,
            1 => Letter::X,
            2 => Letter::Y,
            _ => Letter::Z,
        }
    }

    /// Symplectic `(x, z)` bits; `Y` carries both.
    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn matrix(self) -> CMatrix {
        let z = c(0.0);
        let o = c(1.0);
        let entries = match self {
            Letter::I => [o, z, z, o],
            Letter::X => [z, o, o, z],
            Letter::Y => [z, -I, I, z],
            Letter::Z => [o, z, z, -o],
        };
        CMatrix::from_row_slice(2, 2, &entries)
    }

    fn symbol(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// A tensor product of single-qubit Pauli matrices, without phase.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    letters: Vec<Letter>,
}

impl PauliString {
    pub fn new(letters: Vec<Letter>) -> Self {
        PauliString { letters }
    }

    pub fn identity(n: usize) -> Self {
        PauliString {
            letters: vec![Letter::I; n],
        }
    }

    /// Inverse of [`PauliString::code`].
    pub fn from_code(n: usize, code: usize) -> Self {
        let letters = (0..n)
            .map(|q| Letter::from_code(code >> (2 * (n - 1 - q))))
            .collect();
        PauliString { letters }
    }

    /// Base-4 code with qubit 0 as the most significant digit.
    pub fn code(&self) -> usize {
        self.letters.iter().fold(0, |acc, l| 4 * acc + l.code())
    }

    /// The Z/I string whose Z positions are the set bits of `mask`
    /// (qubit 0 = most significant bit).
    pub fn z_type(n: usize, mask: usize) -> Self {
        let letters = (0..n)
            .map(|q| {
                if mask >> (n - 1 - q) & 1 == 1 {
                    Letter::Z
                } else {
                    Letter::I
                }
            })
            .collect();
        PauliString { letters }
    }

    pub fn n(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&l| l != Letter::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    pub fn is_z_type(&self) -> bool {
        self.letters
            .iter()
            .all(|&l| l == Letter::I || l == Letter::Z)
    }

    /// Basis-state bit masks `(x, z)`: `σ|j⟩ = i^{#Y} (-1)^{|j & z|} |j ^ x⟩`.
    pub fn masks(&self) -> (usize, usize) {
        let n = self.n();
        let mut xm = 0;
        let mut zm = 0;
        for (q, l) in self.letters.iter().enumerate() {
            let (x, z) = l.bits();
            let bit = 1 << (n - 1 - q);
            if x {
                xm |= bit;
            }
            if z {
                zm |= bit;
            }
        }
        (xm, zm)
    }

    fn y_phase(&self) -> Complex64 {
        match self.letters.iter().filter(|&&l| l == Letter::Y).count() % 4 {
            0 => c(1.0),
            1 => I,
            2 => c(-1.0),
            _ => -I,
        }
    }

    /// `(row, value)` of the single nonzero entry in column `j`.
    #[inline]
    pub(crate) fn column_entry(&self, masks: (usize, usize), y_phase: Complex64, j: usize) -> (usize, Complex64) {
        let (xm, zm) = masks;
        let sign = if (j & zm).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        (j ^ xm, y_phase * sign)
    }

    /// Dense `2^n × 2^n` matrix as an explicit Kronecker product.
    pub fn matrix(&self) -> CMatrix {
        self.letters
            .iter()
            .fold(linalg::identity(1), |acc, l| linalg::kron(&acc, &l.matrix()))
    }

    /// Symbolic commutation test: strings commute iff they differ on an even
    /// number of positions where both are non-identity.
    pub fn commutes(&self, other: &PauliString) -> bool {
        assert_eq!(self.n(), other.n(), "Pauli strings on different qubit counts");
        let clashes = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| **a != Letter::I && **b != Letter::I && a != b)
            .count();
        clashes % 2 == 0
    }

    /// Letter pattern of the product `self · other`; the phase is dropped.
    pub fn product(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.n(), other.n(), "Pauli strings on different qubit counts");
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(a, b)| {
                let (ax, az) = a.bits();
                let (bx, bz) = b.bits();
                Letter::from_bits(ax ^ bx, az ^ bz)
            })
            .collect();
        PauliString { letters }
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &PauliString) -> PauliString {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        PauliString { letters }
    }

    fn symplectic(&self) -> u64 {
        let (xm, zm) = self.masks();
        (xm as u64) | ((zm as u64) << self.n())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidPauli(s.to_string()));
        }
        let letters = s
            .chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'I' => Ok(Letter::I),
                'X' => Ok(Letter::X),
                'Y' => Ok(Letter::Y),
                'Z' => Ok(Letter::Z),
                _ => Err(Error::InvalidPauli(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString { letters })
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Strings in canonical order for the given mode.
pub fn basis(n: usize, mode: BasisMode) -> impl Iterator<Item = PauliString> {
    (mode.offset()..(1usize << (2 * n))).map(move |code| PauliString::from_code(n, code))
}

pub fn index_of(s: &PauliString, mode: BasisMode) -> Option<usize> {
    let code = s.code();
    match mode {
        BasisMode::U => Some(code),
        BasisMode::SU if code == 0 => None,
        BasisMode::SU => Some(code - 1),
    }
}

/// Hamming weights of the basis strings, in vector order.
pub fn basis_weights(n: usize, mode: BasisMode) -> Vec<usize> {
    basis(n, mode).map(|s| s.weight()).collect()
}

/// A dense `2^n × 2^n` Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    n: usize,
    matrix: CMatrix,
}

impl HermitianOperator {
    pub fn new(n: usize, matrix: CMatrix) -> Result<Self> {
        let dim = 1usize << n;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: matrix.nrows(),
            });
        }
        let deviation = linalg::hermiticity_defect(&matrix);
        if deviation > 1e-12 * linalg::max_abs(&matrix).max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(HermitianOperator { n, matrix })
    }

    pub(crate) fn new_unchecked(n: usize, matrix: CMatrix) -> Self {
        HermitianOperator { n, matrix }
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

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }
}

/// Real coefficients over the Pauli basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PauliVectorJson", into = "PauliVectorJson")]
pub struct PauliVector {
    n: usize,
    mode: BasisMode,
    entries: DVector<f64>,
}

impl PauliVector {
    pub fn zeros(n: usize, mode: BasisMode) -> Self {
        PauliVector {
            n,
            mode,
            entries: DVector::zeros(mode.dim(n)),
        }
    }

    pub fn from_entries(n: usize, mode: BasisMode, entries: DVector<f64>) -> Result<Self> {
        if entries.len() != mode.dim(n) {
            return Err(Error::DimensionMismatch {
                expected: mode.dim(n),
                got: entries.len(),
            });
        }
        Ok(PauliVector { n, mode, entries })
    }

    /// Build from `(string, value)` pairs; unnamed strings are zero.
    pub fn from_terms<'a, I>(n: usize, mode: BasisMode, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut v = PauliVector::zeros(n, mode);
        for (label, value) in terms {
            let s: PauliString = label.parse()?;
            v.set(&s, value)?;
        }
        Ok(v)
    }

    pub fn unit(s: &PauliString, mode: BasisMode) -> Result<Self> {
        let mut v = PauliVector::zeros(s.n(), mode);
        v.set(s, 1.0)?;
        Ok(v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> BasisMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &DVector<f64> {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut DVector<f64> {
        &mut self.entries
    }

    pub fn into_entries(self) -> DVector<f64> {
        self.entries
    }

    pub fn string_at(&self, index: usize) -> PauliString {
        PauliString::from_code(self.n, index + self.mode.offset())
    }

    pub fn get(&self, s: &PauliString) -> f64 {
        if s.n() != self.n {
            return 0.0;
        }
        index_of(s, self.mode).map_or(0.0, |k| self.entries[k])
    }

    pub fn set(&mut self, s: &PauliString, value: f64) -> Result<()> {
        if s.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: s.n(),
            });
        }
        match index_of(s, self.mode) {
            Some(k) => {
                self.entries[k] = value;
                Ok(())
            }
            None => Err(Error::InvalidPauli(format!(
                "{s} has no coordinate in SU mode"
            ))),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        PauliVector {
            n: self.n,
            mode: self.mode,
            entries: &self.entries * alpha,
        }
    }

    pub fn with_entries(&self, entries: DVector<f64>) -> Self {
        assert_eq!(entries.len(), self.entries.len());
        PauliVector {
            n: self.n,
            mode: self.mode,
            entries,
        }
    }

    /// Nonzero `(string, value)` pairs in canonical order.
    pub fn terms(&self) -> Vec<(PauliString, f64)> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(k, &v)| (self.string_at(k), v))
            .collect()
    }

    /// `Σ_σ v[σ] σ` as a dense matrix.
    pub fn matrix(&self) -> CMatrix {
        let dim = 1usize << self.n;
        let mut m = CMatrix::zeros(dim, dim);
        for (k, &v) in self.entries.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let s = self.string_at(k);
            let masks = s.masks();
            let yp = s.y_phase();
            for j in 0..dim {
                let (row, val) = s.column_entry(masks, yp, j);
                m[(row, j)] += val * v;
            }
        }
        m
    }

    pub fn to_matrix(&self) -> HermitianOperator {
        HermitianOperator::new_unchecked(self.n, self.matrix())
    }

    /// Coefficients `tr(Hσ)/2^n` of an arbitrary square matrix; only the
    /// Hermitian part contributes. No trace check.
    pub fn from_matrix_unchecked(n: usize, mode: BasisMode, m: &CMatrix) -> Self {
        let dim = 1usize << n;
        let scale = 1.0 / dim as f64;
        let entries = DVector::from_iterator(
            mode.dim(n),
            basis(n, mode).map(|s| {
                let masks = s.masks();
                let yp = s.y_phase();
                let mut tr = Complex64::new(0.0, 0.0);
                for j in 0..dim {
                    let (row, val) = s.column_entry(masks, yp, j);
                    tr += m[(j, row)] * val;
                }
                tr.re * scale
            }),
        );
        PauliVector { n, mode, entries }
    }

    /// Re-express in another basis mode; going to SU drops the identity part.
    pub fn to_mode(&self, mode: BasisMode) -> Self {
        if mode == self.mode {
            return self.clone();
        }
        let mut out = PauliVector::zeros(self.n, mode);
        for k in 0..self.dim() {
            let s = self.string_at(k);
            if let Some(idx) = index_of(&s, mode) {
                out.entries[idx] = self.entries[k];
            }
        }
        out
    }
}

/// Pauli expansion of a Hermitian operator.
pub fn project_to_pauli(h: &HermitianOperator, mode: BasisMode) -> Result<PauliVector> {
    let dim = (1usize << h.n) as f64;
    if mode == BasisMode::SU {
        let trace = h.matrix.trace().norm();
        if trace > 1e-10 * dim {
            return Err(Error::NonTracelessInSUMode { trace });
        }
    }
    Ok(PauliVector::from_matrix_unchecked(h.n, mode, &h.matrix))
}

pub fn to_matrix(v: &PauliVector) -> HermitianOperator {
    v.to_matrix()
}

pub fn pauli_matrix(s: &PauliString) -> CMatrix {
    s.matrix()
}

pub fn commutes(a: &PauliString, b: &PauliString) -> bool {
    a.commutes(b)
}

#[derive(Serialize, Deserialize)]
struct PauliTermJson {
    pauli: PauliString,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct PauliVectorJson {
    n: usize,
    mode: BasisMode,
    entries: Vec<PauliTermJson>,
}

impl TryFrom<PauliVectorJson> for PauliVector {
    type Error = Error;

    fn try_from(json: PauliVectorJson) -> Result<Self> {
        let mut v = PauliVector::zeros(json.n, json.mode);
        for term in json.entries {
            v.set(&term.pauli, term.value)?;
        }
        Ok(v)
    }
}

impl From<PauliVector> for PauliVectorJson {
    fn from(v: PauliVector) -> Self {
        PauliVectorJson {
            n: v.n,
            mode: v.mode,
            entries: v
                .terms()
                .into_iter()
                .map(|(pauli, value)| PauliTermJson { pauli, value })
                .collect(),
        }
    }
}

/// Abelian group generated by independent commuting Pauli strings, with
/// signs discarded.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilizerSubgroup {
    n: usize,
    generators: Vec<PauliString>,
    elements: Vec<PauliString>,
}

impl StabilizerSubgroup {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// All `2^k` elements in canonical order; the identity comes first.
    pub fn elements(&self) -> &[PauliString] {
        &self.elements
    }

    pub fn contains(&self, s: &PauliString) -> bool {
        self.elements.binary_search(s).is_ok()
    }

    /// The `2^n` Z/I strings, generated by the single-qubit `Z`s.
    pub fn z_type(n: usize) -> Self {
        let gens = (0..n).map(|q| PauliString::z_type(n, 1 << (n - 1 - q))).collect();
        stabilizer_span(gens).expect("single-qubit Z generators are independent and commute")
    }
}

pub fn stabilizer_span(generators: Vec<PauliString>) -> Result<StabilizerSubgroup> {
    let n = generators.first().map_or(0, |g| g.n());
    for g in &generators {
        if g.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: g.n(),
            });
        }
    }
    for (a, ga) in generators.iter().enumerate() {
        for gb in &generators[a + 1..] {
            if !ga.commutes(gb) {
                return Err(Error::NotCommuting(ga.to_string(), gb.to_string()));
            }
        }
    }
    // Independence over GF(2) in the symplectic representation.
    let mut rows: Vec<u64> = generators.iter().map(|g| g.symplectic()).collect();
    let mut rank = 0;
    for bit in 0..(2 * n) {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] >> bit & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        for r in 0..rows.len() {
            if r != rank && rows[r] >> bit & 1 == 1 {
                rows[r] ^= rows[rank];
            }
        }
        rank += 1;
    }
    if rank < generators.len() {
        return Err(Error::NotIndependent);
    }
    let k = generators.len();
    let mut elements: Vec<PauliString> = (0..(1usize << k))
        .map(|subset| {
            generators
                .iter()
                .enumerate()
                .filter(|(g, _)| subset >> g & 1 == 1)
                .fold(PauliString::identity(n), |acc, (_, g)| acc.product(g))
        })
        .collect();
    elements.sort();
    Ok(StabilizerSubgroup {
        n,
        generators,
        elements,
    })
}
