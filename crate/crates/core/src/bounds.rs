// SPDX-License-Identifier: Apache-2.0

//! Gate count upper-bounds distance, and the isometries of the local metrics.
//!
//! A circuit of `m` gates `exp(-iα_j σ_j)` becomes a control curve by playing
//! `m r(t) H_j` on the `j`-th of `m` equal time slices, with a regularizer
//! `r` that vanishes at the slice boundaries and integrates to `1/m` on each.
//! Its length is `Σ_j F(H_j) ≤ m` whenever every gate Hamiltonian has norm
//! at most one.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geodesic;
use crate::linalg::{self, c, I};
use crate::metric::{self, Family, MetricSpec};
use crate::pauli::{self, BasisMode, HermitianOperator, Letter, PauliString, PauliVector};
use crate::{CMatrix, Error, Result};

/// Slack on `F(H) ≤ 1` for gate Hamiltonians.
pub const G_BOUNDING_TOL: f64 = 1e-12;
/// Invariance threshold for applicable isometries.
pub const ISOMETRY_TOL: f64 = 1e-10;
/// Deviation above which a counterexample is reported.
pub const COUNTEREXAMPLE_TOL: f64 = 1e-6;

/// `r(t) = 1 - cos(2πmt)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Regularizer {
    pub m: usize,
}

pub fn regularizer(m: usize) -> Result<Regularizer> {
    if m == 0 {
        return Err(Error::InvalidArgument("regularizer needs m >= 1".into()));
    }
    Ok(Regularizer { m })
}

impl Regularizer {
    pub fn value(&self, t: f64) -> f64 {
        1.0 - (2.0 * PI * self.m as f64 * t).cos()
    }

    /// `∫_a^b r(t) dt`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let w = 2.0 * PI * self.m as f64;
        (b - a) - ((w * b).sin() - (w * a).sin()) / w
    }
}

/// One gate `exp(-i α σ)`, `σ` acting on `qubits`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub pauli: String,
    pub alpha: f64,
    pub qubits: Vec<usize>,
}

impl Gate {
    /// The `n`-qubit Pauli string of the gate.
    pub fn string(&self, n: usize) -> Result<PauliString> {
        let local: PauliString = self.pauli.parse()?;
        if local.n() != self.qubits.len() {
            return Err(Error::InvalidArgument(format!(
                "gate {} names {} qubits",
                self.pauli,
                self.qubits.len()
            )));
        }
        let mut letters = vec![Letter::I; n];
        for (&q, &l) in self.qubits.iter().zip(local.letters()) {
            if q >= n {
                return Err(Error::InvalidArgument(format!("qubit {q} out of range for n = {n}")));
            }
            if letters[q] != Letter::I {
                return Err(Error::InvalidArgument(format!("qubit {q} repeated in gate {}", self.pauli)));
            }
            letters[q] = l;
        }
        let s = PauliString::new(letters);
        if !(1..=2).contains(&s.weight()) {
            return Err(Error::InvalidArgument(format!(
                "gate {} has weight {}, expected 1 or 2",
                self.pauli,
                s.weight()
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidArgument(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        Ok(s)
    }

    /// `α σ` in the given basis mode.
    pub fn hamiltonian(&self, n: usize, mode: BasisMode) -> Result<PauliVector> {
        Ok(PauliVector::unit(&self.string(n)?, mode)?.scaled(self.alpha))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn validate(&self) -> Result<()> {
        if self.gates.is_empty() {
            return Err(Error::InvalidArgument("circuit has no gates".into()));
        }
        for g in &self.gates {
            g.string(self.n)?;
        }
        Ok(())
    }

    /// `U_m ⋯ U_1`, the first gate acting first.
    pub fn unitary(&self) -> Result<CMatrix> {
        let mut u = linalg::identity(1 << self.n);
        for g in &self.gates {
            let s = g.string(self.n)?;
            u = linalg::expm_hermitian(&s.matrix(), g.alpha) * u;
        }
        Ok(u)
    }

    /// `m` gates on `n` qubits: uniform weight 1 or 2 support, uniform
    /// letters, `α` uniform on `[0, 1]`.
    pub fn random<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Self {
        let letters = ["X", "Y", "Z"];
        let gates = (0..m)
            .map(|_| {
                let weight = if n >= 2 { rng.random_range(1..=2) } else { 1 };
                let mut qubits: Vec<usize> = (0..n).collect();
                let (chosen, _) = qubits.partial_shuffle(rng, weight);
                let mut chosen = chosen.to_vec();
                chosen.sort_unstable();
                let pauli = (0..weight)
                    .map(|_| *letters.choose(rng).expect("nonempty"))
                    .collect::<String>();
                Gate {
                    pauli,
                    alpha: rng.random_range(0.0..=1.0),
                    qubits: chosen,
                }
            })
            .collect();
        Circuit { n, gates }
    }
}

/// Fail with `NotGBounding` unless every gate Hamiltonian has `F(H) ≤ 1`.
pub fn check_g_bounding(circuit: &Circuit, spec: &MetricSpec) -> Result<Vec<f64>> {
    circuit.validate()?;
    let norms = circuit
        .gates
        .iter()
        .map(|g| metric::norm(spec, &g.hamiltonian(circuit.n, spec.mode)?))
        .collect::<Result<Vec<f64>>>()?;
    if let Some(&value) = norms.iter().find(|&&v| v > 1.0 + G_BOUNDING_TOL) {
        return Err(Error::NotGBounding { value });
    }
    Ok(norms)
}

/// Sampled control curve `V(t)` built from a circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitCurve {
    pub times: Vec<f64>,
    pub unitaries: Vec<CMatrix>,
    /// `F(H(t))` at each sample.
    pub speeds: Vec<f64>,
    /// `∫ F(H(t)) dt` by quadrature.
    pub length: f64,
    /// `Σ_j F(H_j)`, the exact length.
    pub gate_norm_sum: f64,
    /// `max |V(1) - U|` against the circuit product.
    pub endpoint_error: f64,
    pub gate_count: usize,
}

impl CircuitCurve {
    pub fn bound_holds(&self, tol: f64) -> bool {
        self.length <= self.gate_count as f64 + tol
    }
}

/// Integrate `dV/dt = -i m r(t) H_j V` slice by slice with RK4, projecting
/// back to the unitary group after every step.
pub fn circuit_to_curve(circuit: &Circuit, spec: &MetricSpec, steps_per_gate: usize) -> Result<CircuitCurve> {
    let norms = check_g_bounding(circuit, spec)?;
    if steps_per_gate < 2 {
        return Err(Error::InvalidArgument("need at least 2 steps per gate".into()));
    }
    let m = circuit.gates.len();
    let reg = regularizer(m)?;
    let dim = 1usize << circuit.n;
    let scale = m as f64;
    let mut times = vec![0.0];
    let mut unitaries = vec![linalg::identity(dim)];
    let mut speeds = vec![0.0];
    let mut v = linalg::identity(dim);
    for (j, gate) in circuit.gates.iter().enumerate() {
        let h = gate.string(circuit.n)?.matrix() * c(gate.alpha);
        let t0 = j as f64 / scale;
        let dt = 1.0 / (scale * steps_per_gate as f64);
        let rhs = |t: f64, v: &CMatrix| -> CMatrix { &h * v * Complex64::new(0.0, -scale * reg.value(t)) };
        for k in 0..steps_per_gate {
            let t = t0 + k as f64 * dt;
            let k1 = rhs(t, &v);
            let k2 = rhs(t + dt / 2.0, &(&v + &k1 * c(dt / 2.0)));
            let k3 = rhs(t + dt / 2.0, &(&v + &k2 * c(dt / 2.0)));
            let k4 = rhs(t + dt, &(&v + &k3 * c(dt)));
            v = linalg::unitarize(&(&v + (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(dt / 6.0)));
            let t_next = if k + 1 == steps_per_gate { (j + 1) as f64 / scale } else { t + dt };
            times.push(t_next);
            unitaries.push(v.clone());
            // r vanishes at slice ends, so the speed there is 0 from either side
            let r = if k + 1 == steps_per_gate { 0.0 } else { reg.value(t_next) };
            speeds.push(scale * r * norms[j]);
        }
    }
    let length = geodesic::simpson(&times, &speeds);
    let endpoint_error = linalg::max_abs_diff(&v, &circuit.unitary()?);
    Ok(CircuitCurve {
        times,
        unitaries,
        speeds,
        length,
        gate_norm_sum: norms.iter().sum(),
        endpoint_error,
        gate_count: m,
    })
}

/// Clifford generators used by the isometry catalogue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CliffordGate {
    Cnot { control: usize, target: usize },
    Cz { a: usize, b: usize },
    Hadamard { qubit: usize },
    Phase { qubit: usize },
}

impl CliffordGate {
    pub fn matrix(&self, n: usize) -> Result<CMatrix> {
        let dim = 1usize << n;
        let bit = |z: usize, q: usize| (z >> (n - 1 - q)) & 1;
        let check = |qs: &[usize]| -> Result<()> {
            if qs.iter().any(|&q| q >= n) || (qs.len() == 2 && qs[0] == qs[1]) {
                return Err(Error::InvalidArgument(format!("bad qubits {qs:?} for n = {n}")));
            }
            Ok(())
        };
        match *self {
            CliffordGate::Cnot { control, target } => {
                check(&[control, target])?;
                let mut m = CMatrix::zeros(dim, dim);
                for z in 0..dim {
                    let out = if bit(z, control) == 1 { z ^ (1 << (n - 1 - target)) } else { z };
                    m[(out, z)] = c(1.0);
                }
                Ok(m)
            }
            CliffordGate::Cz { a, b } => {
                check(&[a, b])?;
                Ok(CMatrix::from_fn(dim, dim, |r, col| {
                    if r != col {
                        c(0.0)
                    } else if bit(r, a) & bit(r, b) == 1 {
                        c(-1.0)
                    } else {
                        c(1.0)
                    }
                }))
            }
            CliffordGate::Hadamard { qubit } => {
                check(&[qubit])?;
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let h = CMatrix::from_row_slice(2, 2, &[c(s), c(s), c(s), c(-s)]);
                Ok(single_qubit_embed(n, qubit, &h))
            }
            CliffordGate::Phase { qubit } => {
                check(&[qubit])?;
                let p = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), I]);
                Ok(single_qubit_embed(n, qubit, &p))
            }
        }
    }
}

impl FromStr for CliffordGate {
    type Err = Error;

    /// `cnot`, `cz`, `h`, `s`, optionally with qubits: `cnot:1,0`, `h:1`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let qs = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| a.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::InvalidArgument(format!("bad qubit list in {s:?}")))?
        };
        let get = |i: usize, default: usize| qs.get(i).copied().unwrap_or(default);
        Ok(match name.to_ascii_lowercase().as_str() {
            "cnot" | "cx" => CliffordGate::Cnot {
                control: get(0, 0),
                target: get(1, 1),
            },
            "cz" => CliffordGate::Cz { a: get(0, 0), b: get(1, 1) },
            "h" | "hadamard" => CliffordGate::Hadamard { qubit: get(0, 0) },
            "s" | "phase" => CliffordGate::Phase { qubit: get(0, 0) },
            other => return Err(Error::InvalidArgument(format!("unknown Clifford gate {other:?}"))),
        })
    }
}

fn single_qubit_embed(n: usize, qubit: usize, g: &CMatrix) -> CMatrix {
    (0..n).fold(CMatrix::identity(1, 1), |acc, q| {
        let factor = if q == qubit { g.clone() } else { linalg::identity(2) };
        linalg::kron(&acc, &factor)
    })
}

/// A map `h` on the unitary group, acting on Hamiltonians by its pushforward.
#[derive(Clone, Debug, PartialEq)]
pub enum IsometryMap {
    /// `H → σHσ†`.
    PauliConjugation(PauliString),
    /// `H → -H*`.
    ComplexConjugation,
    /// `H → WHW†`, `W = W_1 ⊗ … ⊗ W_n`.
    LocalUnitaryConjugation(Vec<CMatrix>),
    /// `H → gHg†` for a Clifford `g`.
    CliffordConjugation(CliffordGate),
    /// `H → WHW†` for an arbitrary unitary.
    UnitaryConjugation(CMatrix),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsometryKind {
    Pauli,
    ComplexConjugation,
    LocalUnitary,
    Clifford,
    Unitary,
}

impl IsometryKind {
    pub const ALL: [IsometryKind; 5] = [
        IsometryKind::Pauli,
        IsometryKind::ComplexConjugation,
        IsometryKind::LocalUnitary,
        IsometryKind::Clifford,
        IsometryKind::Unitary,
    ];

    /// Whether the map preserves every metric of the family: signed
    /// permutations for the `ℓ1` families, weight-preserving orthogonal maps
    /// for `Fq`, any orthogonal map for `F2`.
    pub fn applicable(self, family: Family) -> bool {
        match self {
            IsometryKind::Pauli | IsometryKind::ComplexConjugation => true,
            IsometryKind::Clifford => matches!(family, Family::F1 | Family::F1Delta | Family::F2),
            IsometryKind::LocalUnitary => matches!(family, Family::F2 | Family::Fq),
            IsometryKind::Unitary => family == Family::F2,
        }
    }
}

impl fmt::Display for IsometryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            IsometryKind::Pauli => "pauli",
            IsometryKind::ComplexConjugation => "complex-conjugation",
            IsometryKind::LocalUnitary => "local-unitary",
            IsometryKind::Clifford => "clifford",
            IsometryKind::Unitary => "unitary",
        };
        f.write_str(s)
    }
}

impl FromStr for IsometryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IsometryKind::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown isometry kind {s:?}")))
    }
}

impl IsometryMap {
    pub fn kind(&self) -> IsometryKind {
        match self {
            IsometryMap::PauliConjugation(_) => IsometryKind::Pauli,
            IsometryMap::ComplexConjugation => IsometryKind::ComplexConjugation,
            IsometryMap::LocalUnitaryConjugation(_) => IsometryKind::LocalUnitary,
            IsometryMap::CliffordConjugation(_) => IsometryKind::Clifford,
            IsometryMap::UnitaryConjugation(_) => IsometryKind::Unitary,
        }
    }

    /// Haar-random local or global unitary maps for the sampled kinds.
    pub fn random_local<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        IsometryMap::LocalUnitaryConjugation((0..n).map(|_| linalg::random_unitary(2, rng)).collect())
    }

    pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        IsometryMap::UnitaryConjugation(linalg::random_unitary(1 << n, rng))
    }

    fn conjugator(&self, n: usize) -> Result<Option<CMatrix>> {
        let dim = 1usize << n;
        let w = match self {
            IsometryMap::PauliConjugation(s) => {
                if s.n() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: s.n() });
                }
                s.matrix()
            }
            IsometryMap::ComplexConjugation => return Ok(None),
            IsometryMap::LocalUnitaryConjugation(ws) => {
                if ws.len() != n || ws.iter().any(|w| w.shape() != (2, 2)) {
                    return Err(Error::DimensionMismatch { expected: n, got: ws.len() });
                }
                ws.iter().fold(CMatrix::identity(1, 1), |acc, w| linalg::kron(&acc, w))
            }
            IsometryMap::CliffordConjugation(g) => g.matrix(n)?,
            IsometryMap::UnitaryConjugation(w) => {
                if w.shape() != (dim, dim) {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: w.nrows(),
                    });
                }
                w.clone()
            }
        };
        let defect = linalg::unitarity_defect(&w);
        if defect > 1e-10 {
            return Err(Error::NotUnitary { deviation: defect });
        }
        Ok(Some(w))
    }

    /// Pushforward `h_*(H)` of a Pauli vector.
    pub fn push(&self, h: &PauliVector) -> Result<PauliVector> {
        let m = h.matrix();
        let pushed = match self.conjugator(h.n())? {
            Some(w) => &w * m * w.adjoint(),
            None => -m.conjugate(),
        };
        // Hermitian up to rounding of the product
        let herm = (&pushed + pushed.adjoint()) * c(0.5);
        pauli::project_to_pauli(&HermitianOperator::new(h.n(), herm)?, h.mode())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsometryReport {
    pub kind: IsometryKind,
    pub family: Family,
    pub applicable: bool,
    /// `max |F(h_* H) - F(H)|` over the samples.
    pub max_deviation: f64,
    /// The worst sampled Hamiltonian when the deviation exceeds
    /// [`COUNTEREXAMPLE_TOL`].
    pub counterexample: Option<PauliVector>,
    pub samples: usize,
}

impl IsometryReport {
    /// Applicable pairs must be invariant; the others pass either way.
    pub fn passes(&self) -> bool {
        !self.applicable || self.max_deviation < ISOMETRY_TOL
    }
}

/// Sample Gaussian Hamiltonians and compare norms before and after the map.
pub fn isometry_check<R: Rng + ?Sized>(
    map: &IsometryMap,
    spec: &MetricSpec,
    n: usize,
    samples: usize,
    rng: &mut R,
) -> Result<IsometryReport> {
    let dim = spec.mode.dim(n);
    let draws: Vec<PauliVector> = (0..samples)
        .map(|_| PauliVector::from_entries(n, spec.mode, linalg::random_gaussian_vector(dim, rng)))
        .collect::<Result<_>>()?;
    let devs = draws
        .par_iter()
        .map(|h| Ok((metric::norm(spec, &map.push(h)?)? - metric::norm(spec, h)?).abs()))
        .collect::<Result<Vec<f64>>>()?;
    let (worst, max_deviation) = devs
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    Ok(IsometryReport {
        kind: map.kind(),
        family: spec.family,
        applicable: map.kind().applicable(spec.family),
        max_deviation,
        counterexample: (max_deviation > COUNTEREXAMPLE_TOL).then(|| draws[worst].clone()),
        samples,
    })
}

/// Largest `|F(D H) - F(H)|` over random diagonal sign flips `D`.
pub fn pauli_symmetric_deviation<R: Rng + ?Sized>(
    spec: &MetricSpec,
    n: usize,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let dim = spec.mode.dim(n);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let y = PauliVector::from_entries(n, spec.mode, linalg::random_gaussian_vector(dim, rng))?;
        let flipped = y.with_entries(y.entries().map(|v| if rng.random_bool(0.5) { -v } else { v }));
        worst = worst.max((metric::norm(spec, &flipped)? - metric::norm(spec, &y)?).abs());
    }
    Ok(worst)
}

/// Norm invariance under random coefficient sign flips, at [`ISOMETRY_TOL`].
pub fn pauli_symmetric_check<R: Rng + ?Sized>(spec: &MetricSpec, n: usize, samples: usize, rng: &mut R) -> Result<bool> {
    Ok(pauli_symmetric_deviation(spec, n, samples, rng)? < ISOMETRY_TOL)
}

/// Largest `|F(O y) - F(y)|` for a random orthogonal `O` on the coefficients.
pub fn orthogonal_deviation<R: Rng + ?Sized>(spec: &MetricSpec, n: usize, samples: usize, rng: &mut R) -> Result<f64> {
    let dim = spec.mode.dim(n);
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
    let q = g.qr().q();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let y = PauliVector::from_entries(n, spec.mode, linalg::random_gaussian_vector(dim, rng))?;
        let rotated = y.with_entries(&q * y.entries());
        worst = worst.max((metric::norm(spec, &rotated)? - metric::norm(spec, &y)?).abs());
    }
    Ok(worst)
}

/// For `σH₀σ† = H₀`, the largest `|σU(t)σ† - U(t)|` over the given times,
/// `U(t) = exp(-iH₀t)`.
pub fn fixed_point_deviation(sigma: &PauliString, h0: &PauliVector, times: &[f64]) -> Result<f64> {
    let s = sigma.matrix();
    let h = h0.matrix();
    let moved = linalg::max_abs_diff(&(&s * &h * s.adjoint()), &h);
    if moved > 1e-12 * linalg::max_abs(&h).max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "{sigma} does not fix the Hamiltonian (moved by {moved:.3e})"
        )));
    }
    Ok(times
        .iter()
        .map(|&t| {
            let u = linalg::expm_hermitian(&h, t);
            linalg::max_abs_diff(&(&s * &u * s.adjoint()), &u)
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::PenaltyFunction;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gate(p: &str, alpha: f64, qubits: &[usize]) -> Gate {
        Gate {
            pauli: p.into(),
            alpha,
            qubits: qubits.to_vec(),
        }
    }

    #[test]
    fn regularizer_conditions() {
        let r1 = regularizer(1).unwrap();
        assert!(r1.value(0.0).abs() < 1e-15 && r1.value(1.0).abs() < 1e-15);
        assert!((r1.integral(0.0, 1.0) - 1.0).abs() < 1e-15);
        let r4 = regularizer(4).unwrap();
        for j in 0..=4 {
            assert!(r4.value(j as f64 / 4.0).abs() < 1e-14);
        }
        let r7 = regularizer(7).unwrap();
        for j in 0..7 {
            let (a, b) = (j as f64 / 7.0, (j + 1) as f64 / 7.0);
            let t: Vec<f64> = (0..=400).map(|k| a + (b - a) * k as f64 / 400.0).collect();
            let f: Vec<f64> = t.iter().map(|&x| r7.value(x)).collect();
            assert!((geodesic::simpson(&t, &f) - 1.0 / 7.0).abs() < 1e-12);
            assert!((r7.integral(a, b) - 1.0 / 7.0).abs() < 1e-14);
        }
        assert!(regularizer(0).is_err());
    }

    #[test]
    fn gate_parsing() {
        let s = gate("ZX", 0.5, &[2, 0]).string(3).unwrap();
        assert_eq!(s.to_string(), "XIZ");
        assert!(gate("ZZZ", 0.5, &[0, 1, 2]).string(3).is_err());
        assert!(gate("Z", 1.5, &[0]).string(1).is_err());
        assert!(gate("ZZ", 0.5, &[1, 1]).string(2).is_err());
        assert!(gate("Z", 0.5, &[3]).string(2).is_err());
        let c: Circuit =
            serde_json::from_str(r#"{"n":2,"gates":[{"pauli":"ZZ","alpha":0.7,"qubits":[0,1]}]}"#).unwrap();
        assert_eq!(c.gates[0].alpha, 0.7);
    }

    #[test]
    fn single_gate_curve() {
        let circuit = Circuit {
            n: 2,
            gates: vec![gate("ZZ", 0.7, &[0, 1])],
        };
        let curve = circuit_to_curve(&circuit, &MetricSpec::f1(BasisMode::SU), 400).unwrap();
        assert!((curve.length - 0.7).abs() < 1e-10);
        assert!(curve.endpoint_error < 1e-10);
    }

    #[test]
    fn saturated_circuit_has_length_m() {
        let gates = ["XI", "IZ", "YY", "ZX", "IY"]
            .iter()
            .map(|p| gate(p, 1.0, &[0, 1]))
            .collect();
        let circuit = Circuit { n: 2, gates };
        let curve = circuit_to_curve(&circuit, &MetricSpec::f1(BasisMode::SU), 400).unwrap();
        assert!((curve.length - 5.0).abs() < 1e-9);
        assert!((curve.gate_norm_sum - 5.0).abs() < 1e-12);
        assert!(curve.endpoint_error < 1e-9);
        assert!(curve.bound_holds(1e-6));
    }

    #[test]
    fn g_bounding_is_enforced() {
        let circuit = Circuit {
            n: 2,
            gates: vec![gate("ZZ", 0.9, &[0, 1])],
        };
        let fq = MetricSpec::fq(PenaltyFunction::table(vec![1.0, 1.0, 4.0]), BasisMode::SU);
        assert!(matches!(
            circuit_to_curve(&circuit, &fq, 100),
            Err(Error::NotGBounding { .. })
        ));
    }

    #[test]
    fn random_circuits_meet_the_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for m in [1, 4, 8] {
            let circuit = Circuit::random(2, m, &mut rng);
            for spec in [MetricSpec::f2(BasisMode::SU), MetricSpec::fq(PenaltyFunction::step(5.0), BasisMode::SU)] {
                let curve = circuit_to_curve(&circuit, &spec, 1000).unwrap();
                assert!(curve.endpoint_error < 1e-8, "{}", curve.endpoint_error);
                assert!(curve.bound_holds(1e-6));
                assert!(linalg::unitarity_defect(curve.unitaries.last().unwrap()) < 1e-12);
            }
        }
    }

    #[test]
    fn clifford_gates_permute_paulis() {
        let cnot = CliffordGate::from_str("cnot").unwrap().matrix(2).unwrap();
        let xi = PauliString::from_str("XI").unwrap().matrix();
        let xx = PauliString::from_str("XX").unwrap().matrix();
        assert!(linalg::max_abs_diff(&(&cnot * xi * cnot.adjoint()), &xx) < 1e-14);
        for g in ["h:1", "s", "cz", "cnot:1,0"] {
            let u = CliffordGate::from_str(g).unwrap().matrix(2).unwrap();
            assert!(linalg::unitarity_defect(&u) < 1e-14);
        }
        assert!(CliffordGate::from_str("t").is_err());
    }

    #[test]
    fn pauli_and_complex_conjugation_are_isometries() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let fq = MetricSpec::fq(PenaltyFunction::table(vec![1.0, 1.0, 4.0]), BasisMode::SU);
        let xx = IsometryMap::PauliConjugation("XX".parse().unwrap());
        let r = isometry_check(&xx, &MetricSpec::f1(BasisMode::SU), 2, 50, &mut rng).unwrap();
        assert!(r.max_deviation < 1e-12 && r.passes());
        let r = isometry_check(&IsometryMap::ComplexConjugation, &fq, 2, 50, &mut rng).unwrap();
        assert!(r.max_deviation < 1e-12);
    }

    #[test]
    fn counterexamples_for_inapplicable_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let fq = MetricSpec::fq(PenaltyFunction::table(vec![1.0, 1.0, 4.0]), BasisMode::SU);
        let cnot = IsometryMap::CliffordConjugation(CliffordGate::from_str("cnot").unwrap());
        let r = isometry_check(&cnot, &fq, 2, 20, &mut rng).unwrap();
        assert!(!r.applicable && r.counterexample.is_some());
        let w = IsometryMap::random_unitary(2, &mut rng);
        let r = isometry_check(&w, &MetricSpec::f1(BasisMode::SU), 2, 20, &mut rng).unwrap();
        assert!(r.counterexample.is_some());
        // but the same maps preserve F2
        let r = isometry_check(&w, &MetricSpec::f2(BasisMode::SU), 2, 20, &mut rng).unwrap();
        assert!(r.max_deviation < 1e-12);
    }

    #[test]
    fn sign_flips_and_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let table = PenaltyFunction::table(vec![1.0, 1.0, 4.0]);
        for spec in [
            MetricSpec::f1(BasisMode::SU),
            MetricSpec::f2(BasisMode::SU),
            MetricSpec::fp(table.clone(), BasisMode::SU),
            MetricSpec::fq(table.clone(), BasisMode::SU),
            MetricSpec::f1_delta(1e-4 / 15.0, BasisMode::SU),
            MetricSpec::fp_delta(table, 1e-5, BasisMode::SU),
        ] {
            assert!(pauli_symmetric_check(&spec, 2, 20, &mut rng).unwrap(), "{:?}", spec.family);
        }
        assert!(orthogonal_deviation(&MetricSpec::f2(BasisMode::SU), 2, 20, &mut rng).unwrap() < 1e-12);
        assert!(orthogonal_deviation(&MetricSpec::f1(BasisMode::SU), 2, 20, &mut rng).unwrap() > 1e-3);
    }

    #[test]
    fn fixed_points_stay_fixed() {
        let h0 = PauliVector::from_terms(2, BasisMode::SU, [("ZZ", 0.8), ("XX", -0.3)]).unwrap();
        let sigma: PauliString = "YY".parse().unwrap();
        let times: Vec<f64> = (0..20).map(|k| k as f64 * 0.37).collect();
        assert!(fixed_point_deviation(&sigma, &h0, &times).unwrap() < 1e-13);
        assert!(fixed_point_deviation(&"XI".parse().unwrap(), &h0, &times).is_err());
    }
}
