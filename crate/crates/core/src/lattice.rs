// SPDX-License-Identifier: Apache-2.0

//! Minimal Pauli geodesics through diagonal unitaries.
//!
//! A diagonal unitary `U = Σ_z e^{-iθ_z}|z⟩⟨z|` is reached by every
//! `exp(-i(H - J)t)` at `t = 1`, where `H = diag(h)` with `h ≡ θ` and `J` runs
//! over the lattice of `2π`-integer diagonal matrices. The shortest such
//! Pauli geodesic is the closest lattice vector to `H` under the local norm.
//! Everything happens in Walsh space: the Pauli coefficients of a diagonal
//! operator are its Walsh–Hadamard transform divided by `2^n`.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::metric::{Family, MetricSpec};
use crate::pauli::{self, BasisMode, PauliString, PauliVector};
use crate::{CMatrix, Error, Result};

/// Tolerance on `Σθ ≡ 0 (mod 2π)` for SU-mode diagonal unitaries.
pub const SU_PHASE_TOL: f64 = 1e-9;
/// Default enumeration half-width.
pub const DEFAULT_WINDOW: usize = 2;
/// Windows larger than this are not certified by the window rule anyway.
pub const MAX_WINDOW: usize = 4;
/// Window enumeration is skipped above this many candidates.
const WINDOW_ENUMERATION_LIMIT: u128 = 50_000_000;
/// Node budget of the exact certifier.
const NODE_BUDGET: u64 = 2_000_000_000;
/// Largest qubit count for Monte Carlo coverage.
pub const MONTE_CARLO_MAX_N: usize = 2;

/// `U = Σ_z e^{-iθ_z}|z⟩⟨z|`, qubit 0 the most significant bit of `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDiagonal")]
pub struct DiagonalUnitary {
    n: usize,
    #[serde(rename = "theta")]
    phases: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDiagonal {
    n: usize,
    theta: Vec<f64>,
}

impl TryFrom<RawDiagonal> for DiagonalUnitary {
    type Error = Error;

    fn try_from(raw: RawDiagonal) -> Result<Self> {
        DiagonalUnitary::new(raw.n, raw.theta)
    }
}

impl DiagonalUnitary {
    pub fn new(n: usize, phases: Vec<f64>) -> Result<Self> {
        if phases.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                got: phases.len(),
            });
        }
        if let Some(v) = phases.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("phase {v} is not finite")));
        }
        Ok(DiagonalUnitary { n, phases })
    }

    pub fn identity(n: usize) -> Self {
        DiagonalUnitary {
            n,
            phases: vec![0.0; 1 << n],
        }
    }

    /// `U_f = Σ_z e^{-iπ f(z)}|z⟩⟨z|` for a boolean function `f`.
    pub fn from_boolean<F: Fn(usize) -> bool>(n: usize, f: F) -> Self {
        let phases = (0..1usize << n).map(|z| if f(z) { PI } else { 0.0 }).collect();
        DiagonalUnitary { n, phases }
    }

    /// `U_f` for `f(z) = z₁z₂…z_n`.
    pub fn and_function(n: usize) -> Self {
        let all = (1usize << n) - 1;
        Self::from_boolean(n, |z| z == all)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Phases moved into `(-π, π]`.
    pub fn reduced_phases(&self) -> Vec<f64> {
        self.phases.iter().map(|&t| reduce_phase(t)).collect()
    }

    pub fn matrix(&self) -> CMatrix {
        let d = self.phases.len();
        CMatrix::from_diagonal(&DVector::from_iterator(
            d,
            self.phases.iter().map(|&t| Complex64::from_polar(1.0, -t)),
        ))
    }

    /// Check the SU-mode determinant condition.
    pub fn check_mode(&self, mode: BasisMode) -> Result<()> {
        if mode == BasisMode::SU {
            let total: f64 = self.phases.iter().sum();
            let off = total - 2.0 * PI * (total / (2.0 * PI)).round();
            if off.abs() > SU_PHASE_TOL {
                return Err(Error::NonTracelessInSUMode { trace: off });
            }
        }
        Ok(())
    }
}

fn reduce_phase(t: f64) -> f64 {
    let r = t - 2.0 * PI * (t / (2.0 * PI)).round();
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

/// Unnormalized in-place Walsh–Hadamard transform:
/// `v_s ← Σ_z (-1)^{s·z} v_z`.
pub fn walsh_hadamard(v: &mut [f64]) {
    let len = v.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for start in (0..len).step_by(2 * h) {
            for j in start..start + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if !len.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "diagonal of length {len} is not a power of two"
        )));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Pauli expansion of `diag(h)`: `y_s = 2^{-n} Σ_z (-1)^{s·z} h_z` on the
/// Z-type strings, in U mode.
pub fn diagonal_to_pauli(h: &[f64]) -> Result<PauliVector> {
    let n = qubits_for_len(h.len())?;
    Ok(z_type_vector(n, BasisMode::U, &walsh_coefficients(h)))
}

fn walsh_coefficients(h: &[f64]) -> Vec<f64> {
    let mut c = h.to_vec();
    walsh_hadamard(&mut c);
    let scale = 1.0 / h.len() as f64;
    c.iter_mut().for_each(|v| *v *= scale);
    c
}

/// Place Walsh coefficients (indexed by Z mask) in a Pauli vector; the
/// identity coefficient is dropped in SU mode.
fn z_type_vector(n: usize, mode: BasisMode, coeffs: &[f64]) -> PauliVector {
    let mut out = PauliVector::zeros(n, mode);
    for (s, &v) in coeffs.iter().enumerate() {
        if let Some(idx) = pauli::index_of(&PauliString::z_type(n, s), mode) {
            out.entries_mut()[idx] = v;
        }
    }
    out
}

/// The lattice `𝒥` of `2π`-integer diagonal matrices (traceless in SU
/// mode), in Z-type Pauli coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseLattice {
    pub n: usize,
    pub mode: BasisMode,
}

impl PhaseLattice {
    pub fn new(n: usize, mode: BasisMode) -> Self {
        PhaseLattice { n, mode }
    }

    pub fn rank(&self) -> usize {
        match self.mode {
            BasisMode::U => 1 << self.n,
            BasisMode::SU => (1 << self.n) - 1,
        }
    }

    /// Columns are basis vectors: `2π|z⟩⟨z|` in U mode,
    /// `2π(|z⟩⟨z| - |0⟩⟨0|)` for `z ≠ 0` in SU mode. Rows are Z masks
    /// (the identity row omitted in SU mode).
    pub fn basis_matrix(&self) -> DMatrix<f64> {
        let d = 1usize << self.n;
        let skip = usize::from(self.mode == BasisMode::SU);
        let mut m = DMatrix::zeros(d - skip, d - skip);
        for (col, z) in (skip..d).enumerate() {
            let mut h = vec![0.0; d];
            h[z] += 2.0 * PI;
            if skip == 1 {
                h[0] -= 2.0 * PI;
            }
            let c = walsh_coefficients(&h);
            for (row, s) in (skip..d).enumerate() {
                m[(row, col)] = c[s];
            }
        }
        m
    }

    /// `ln |det M|`, the log-volume of a unit cell.
    pub fn log_cell_volume(&self) -> f64 {
        match self.mode {
            BasisMode::U => {
                let d = (1usize << self.n) as f64;
                d * ((2.0 * PI).ln() - 0.5 * self.n as f64 * 2f64.ln())
            }
            BasisMode::SU => self.basis_matrix().determinant().abs().ln(),
        }
    }

    /// `diag(2π m)` (with the trace constraint in SU mode).
    pub fn element(&self, m: &[i64]) -> Result<Vec<f64>> {
        let d = 1usize << self.n;
        if m.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: m.len(),
            });
        }
        if self.mode == BasisMode::SU && m.iter().sum::<i64>() != 0 {
            return Err(Error::NonTracelessInSUMode {
                trace: 2.0 * PI * m.iter().sum::<i64>() as f64,
            });
        }
        Ok(m.iter().map(|&k| 2.0 * PI * k as f64).collect())
    }

    pub fn contains(&self, diagonal: &[f64], tol: f64) -> bool {
        if diagonal.len() != 1 << self.n {
            return false;
        }
        let ks: Vec<f64> = diagonal.iter().map(|v| v / (2.0 * PI)).collect();
        let integral = ks.iter().all(|k| (k - k.round()).abs() <= tol);
        let traceless = self.mode == BasisMode::U || ks.iter().map(|k| k.round()).sum::<f64>() == 0.0;
        integral && traceless
    }
}

/// How the optimum was certified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certificate {
    /// No point outside the window can beat the incumbent.
    WindowBound,
    /// Exhaustive branch and bound over the whole lattice.
    BranchAndBound,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CvpResult {
    /// `J = 2π diag(m)`.
    pub minimizer: Vec<i64>,
    /// `F(H - J)`.
    pub value: f64,
    pub geodesic_hamiltonian: PauliVector,
    pub certified: bool,
    pub certificate: Certificate,
    pub window: usize,
    /// Whether the optimum lies inside the enumeration window.
    pub in_window: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    /// `Σ w |c|`.
    L1,
    /// `Σ w c²`, reported as its square root.
    L2,
}

#[derive(Clone, Debug)]
struct Objective {
    n: usize,
    mode: BasisMode,
    shape: Shape,
    /// Reported weights per Z mask (identity weight 0 in SU mode).
    weights: Vec<f64>,
    /// Weights used by the search; in SU mode the identity carries a penalty
    /// large enough to make nonzero trace infeasible.
    search_weights: Vec<f64>,
    h: Vec<f64>,
    /// Required `Σ m` in SU mode.
    trace_target: i64,
}

impl Objective {
    fn new(spec: &MetricSpec, u: &DiagonalUnitary) -> Result<Self> {
        u.check_mode(spec.mode)?;
        let n = u.n();
        let spec = spec.unsmoothed();
        // validates the penalty table against n
        spec.compile(n)?;
        let shape = if spec.family.is_quadratic() { Shape::L2 } else { Shape::L1 };
        let d = 1usize << n;
        let mut weights: Vec<f64> = (0..d)
            .map(|s| spec.penalty_value(s.count_ones() as usize))
            .collect();
        if spec.mode == BasisMode::SU {
            weights[0] = 0.0;
        }
        let h = u.reduced_phases();
        let trace_target = (h.iter().sum::<f64>() / (2.0 * PI)).round() as i64;
        let mut obj = Objective {
            n,
            mode: spec.mode,
            shape,
            search_weights: weights.clone(),
            weights,
            h,
            trace_target,
        };
        if obj.mode == BasisMode::SU {
            let v0 = obj.value(&obj.babai());
            let cell = 2.0 * PI / d as f64;
            obj.search_weights[0] = match shape {
                Shape::L1 => 2.0 * v0 / cell + 1.0,
                Shape::L2 => 2.0 * (v0 / cell).powi(2) + 1.0,
            };
        }
        Ok(obj)
    }

    fn dim(&self) -> usize {
        self.h.len()
    }

    /// Rounded point, with the trace fixed on coordinate 0 in SU mode.
    fn babai(&self) -> Vec<i64> {
        let mut m: Vec<i64> = self.h.iter().map(|v| (v / (2.0 * PI)).round() as i64).collect();
        if self.mode == BasisMode::SU {
            let sum: i64 = m.iter().sum();
            m[0] += self.trace_target - sum;
        }
        m
    }

    fn feasible(&self, m: &[i64]) -> bool {
        self.mode == BasisMode::U || m.iter().sum::<i64>() == self.trace_target
    }

    fn coefficients(&self, m: &[i64]) -> Vec<f64> {
        let e: Vec<f64> = self
            .h
            .iter()
            .zip(m)
            .map(|(h, &k)| h - 2.0 * PI * k as f64)
            .collect();
        walsh_coefficients(&e)
    }

    fn value(&self, m: &[i64]) -> f64 {
        let c = self.coefficients(m);
        finish(self.shape, additive(self.shape, &self.weights, &c))
    }

    fn result(&self, m: Vec<i64>, certificate: Certificate, window: usize, in_window: bool) -> CvpResult {
        let c = self.coefficients(&m);
        CvpResult {
            value: finish(self.shape, additive(self.shape, &self.weights, &c)),
            geodesic_hamiltonian: z_type_vector(self.n, self.mode, &c),
            minimizer: m,
            certified: true,
            certificate,
            window,
            in_window,
        }
    }

    /// Lower bound on the value of any point with a coordinate outside the
    /// window: such a point has `max_z |e_z| ≥ 2πw`.
    fn window_threshold(&self, window: usize) -> f64 {
        let d = self.dim() as f64;
        let w_min = self.weights[1..]
            .iter()
            .chain(if self.mode == BasisMode::U { &self.weights[..1] } else { &[] })
            .fold(f64::INFINITY, |a, &b| a.min(b));
        let reach = 2.0 * PI * window as f64;
        match self.shape {
            Shape::L1 => reach * w_min / d,
            Shape::L2 => reach * (w_min / d).min(w_min.sqrt() / d.sqrt()),
        }
    }
}

fn additive(shape: Shape, weights: &[f64], c: &[f64]) -> f64 {
    match shape {
        Shape::L1 => weights.iter().zip(c).map(|(w, v)| w * v.abs()).sum(),
        Shape::L2 => weights.iter().zip(c).map(|(w, v)| w * v * v).sum(),
    }
}

fn finish(shape: Shape, additive: f64) -> f64 {
    match shape {
        Shape::L1 => additive,
        Shape::L2 => additive.max(0.0).sqrt(),
    }
}

/// `(value, m)` ordered by value, ties broken lexicographically on `m`.
fn better(a: &(f64, Vec<i64>), b: &(f64, Vec<i64>)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

fn pick(a: Option<(f64, Vec<i64>)>, b: Option<(f64, Vec<i64>)>) -> Option<(f64, Vec<i64>)> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if better(&b, &a) { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

/// Exhaustive enumeration of `m_z ∈ [round(h_z/2π) ± w]`.
fn enumerate_window(obj: &Objective, window: usize) -> Option<(f64, Vec<i64>)> {
    let d = obj.dim();
    let base = 2 * window as u128 + 1;
    let total = base.checked_pow(d as u32)?;
    if total > WINDOW_ENUMERATION_LIMIT {
        return None;
    }
    let center = {
        let mut c = obj.babai();
        if obj.mode == BasisMode::SU {
            c = obj.h.iter().map(|v| (v / (2.0 * PI)).round() as i64).collect();
        }
        c
    };
    (0..total as u64)
        .into_par_iter()
        .fold(
            || None,
            |best: Option<(f64, Vec<i64>)>, idx| {
                let mut rest = idx;
                let m: Vec<i64> = center
                    .iter()
                    .rev()
                    .map(|&c0| {
                        let digit = (rest % base as u64) as i64;
                        rest /= base as u64;
                        c0 + digit - window as i64
                    })
                    .collect::<Vec<_>>()
                    .into_iter()
                    .rev()
                    .collect();
                if !obj.feasible(&m) {
                    return best;
                }
                let v = obj.value(&m);
                pick(best, Some((v, m)))
            },
        )
        .reduce(|| None, pick)
}

struct Budget {
    nodes: AtomicU64,
    aborted: AtomicBool,
}

impl Budget {
    fn tick(&self) -> bool {
        if self.nodes.fetch_add(1, Ordering::Relaxed) > NODE_BUDGET {
            self.aborted.store(true, Ordering::Relaxed);
        }
        !self.aborted.load(Ordering::Relaxed)
    }
}

/// Exact minimizer of `Σ_s w_s φ((W(t - L a))_s / den)` over `a ∈ ℤ^d`
/// (`φ = |·|` or `(·)²`).
///
/// With `e = (e₀, e₁)` split on the leading qubit, the transform separates
/// into `W(e₀ + e₁)` and `W(e₀ - e₁)`; integer `(a₀, a₁)` correspond to
/// pairs `(a₀ + a₁, a₀ - a₁)` of equal parity. Each parity class gives two
/// independent problems of half the size on a lattice twice as coarse.
fn solve_exact(
    shape: Shape,
    t: &[f64],
    weights: &[f64],
    spacing: f64,
    den: f64,
    budget: &Budget,
    parallel: bool,
) -> Option<(f64, Vec<i64>)> {
    let d = t.len();
    if d <= 4 {
        return Enumerator::run(shape, t, weights, spacing, den, budget);
    }
    let half = d / 2;
    let (t0, t1) = t.split_at(half);
    let (w0, w1) = weights.split_at(half);
    let class = |bits: u64| -> Option<(f64, Vec<i64>)> {
        let pi: Vec<f64> = (0..half).map(|i| ((bits >> i) & 1) as f64).collect();
        let tf: Vec<f64> = (0..half).map(|i| t0[i] + t1[i] - spacing * pi[i]).collect();
        let tg: Vec<f64> = (0..half).map(|i| t0[i] - t1[i] - spacing * pi[i]).collect();
        let (vf, af) = solve_exact(shape, &tf, w0, 2.0 * spacing, den, budget, false)?;
        let (vg, ag) = solve_exact(shape, &tg, w1, 2.0 * spacing, den, budget, false)?;
        let mut a = vec![0i64; d];
        for i in 0..half {
            let p = (bits >> i & 1) as i64;
            a[i] = p + af[i] + ag[i];
            a[half + i] = af[i] - ag[i];
        }
        Some((vf + vg, a))
    };
    let classes = 1u64 << half;
    let best = if parallel {
        (0..classes)
            .into_par_iter()
            .map(|b| class(b).map(Some).ok_or(()))
            .try_reduce(|| None, |x, y| Ok(pick(x, y)))
            .ok()?
    } else {
        let mut best = None;
        for b in 0..classes {
            best = pick(best, Some(class(b)?));
        }
        best
    };
    if budget.aborted.load(Ordering::Relaxed) {
        return None;
    }
    best
}

/// Schnorr–Euchner enumeration over the ellipsoid `Q(t - L a) ≤ bound`
/// where `Q` is a quadratic lower bound on the objective.
struct Enumerator<'a> {
    shape: Shape,
    t: &'a [f64],
    weights: &'a [f64],
    spacing: f64,
    den: f64,
    /// Upper-triangular factor of `Q` scaled by the spacing.
    b: DMatrix<f64>,
    tau: Vec<f64>,
    best: f64,
    best_a: Vec<i64>,
    budget: &'a Budget,
}

impl<'a> Enumerator<'a> {
    fn run(
        shape: Shape,
        t: &'a [f64],
        weights: &'a [f64],
        spacing: f64,
        den: f64,
        budget: &'a Budget,
    ) -> Option<(f64, Vec<i64>)> {
        let d = t.len();
        let walsh = DMatrix::from_fn(d, d, |s, z| if (s & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 });
        let diag = DVector::from_iterator(
            d,
            weights.iter().map(|&w| match shape {
                Shape::L1 => w * w,
                Shape::L2 => w,
            } / (den * den)),
        );
        let q = walsh.transpose() * DMatrix::from_diagonal(&diag) * &walsh;
        let chol = nalgebra::Cholesky::new(q)?;
        let b = chol.l().transpose() * spacing;
        let mut e = Enumerator {
            shape,
            t,
            weights,
            spacing,
            den,
            b,
            tau: t.iter().map(|v| v / spacing).collect(),
            best: f64::INFINITY,
            best_a: Vec::new(),
            budget,
        };
        let mut a = vec![0i64; d];
        e.descend(d, &mut a, 0.0);
        if budget.aborted.load(Ordering::Relaxed) || e.best_a.is_empty() {
            return None;
        }
        Some((e.best, e.best_a))
    }

    fn bound(&self) -> f64 {
        let b = match self.shape {
            Shape::L1 => self.best * self.best,
            Shape::L2 => self.best,
        };
        b * (1.0 + 1e-9) + 1e-12
    }

    fn leaf(&mut self, a: &[i64]) {
        let mut x: Vec<f64> = self
            .t
            .iter()
            .zip(a)
            .map(|(t, &k)| t - self.spacing * k as f64)
            .collect();
        walsh_hadamard(&mut x);
        x.iter_mut().for_each(|v| *v /= self.den);
        let v = additive(self.shape, self.weights, &x);
        if v < self.best || (v == self.best && a < self.best_a.as_slice()) {
            self.best = v;
            self.best_a = a.to_vec();
        }
    }

    /// Fix coordinate `level - 1` given coordinates `level..d`.
    fn descend(&mut self, level: usize, a: &mut [i64], rho: f64) {
        if !self.budget.tick() {
            return;
        }
        if level == 0 {
            self.leaf(a);
            return;
        }
        let i = level - 1;
        let d = a.len();
        let bii = self.b[(i, i)];
        let center = self.tau[i]
            + ((i + 1)..d)
                .map(|j| self.b[(i, j)] / bii * (self.tau[j] - a[j] as f64))
                .sum::<f64>();
        let k0 = center.round() as i64;
        let up_first = center >= k0 as f64;
        for step in 0i64.. {
            if step > 0 {
                let gap = step as f64 - 0.5;
                if rho + bii * bii * gap * gap > self.bound() {
                    break;
                }
            }
            let candidates = if step == 0 {
                [Some(k0), None]
            } else if up_first {
                [Some(k0 + step), Some(k0 - step)]
            } else {
                [Some(k0 - step), Some(k0 + step)]
            };
            for k in candidates.into_iter().flatten() {
                let r = rho + (bii * (center - k as f64)).powi(2);
                if r <= self.bound() {
                    a[i] = k;
                    self.descend(i, a, r);
                    if self.budget.aborted.load(Ordering::Relaxed) {
                        return;
                    }
                }
            }
        }
    }
}

fn branch_and_bound(obj: &Objective) -> Option<Vec<i64>> {
    let budget = Budget {
        nodes: AtomicU64::new(0),
        aborted: AtomicBool::new(false),
    };
    let den = obj.dim() as f64;
    let (_, m) = solve_exact(obj.shape, &obj.h, &obj.search_weights, 2.0 * PI, den, &budget, true)?;
    obj.feasible(&m).then_some(m)
}

/// Shortest Pauli geodesic `exp(-i(H - J)t)` through a diagonal unitary.
///
/// The window around the rounded point is enumerated first. If the window
/// rule cannot certify the incumbent, the exact branch and bound decides;
/// its optimum is returned even when it lies outside the window.
pub fn cvp_minimal_pauli_geodesic(spec: &MetricSpec, u: &DiagonalUnitary, window: usize) -> Result<CvpResult> {
    if window == 0 {
        return Err(Error::WindowTooSmall { window: 0 });
    }
    let obj = Objective::new(spec, u)?;
    if let Some((v, m)) = enumerate_window(&obj, window) {
        if v < obj.window_threshold(window) {
            return Ok(obj.result(m, Certificate::WindowBound, window, true));
        }
    }
    let m = branch_and_bound(&obj).ok_or(Error::WindowTooSmall {
        window: window as i64,
    })?;
    let center: Vec<i64> = obj.h.iter().map(|v| (v / (2.0 * PI)).round() as i64).collect();
    let in_window = m.iter().zip(&center).all(|(a, c)| (a - c).unsigned_abs() as usize <= window);
    Ok(obj.result(m, Certificate::BranchAndBound, window, in_window))
}

/// Window enumeration alone, with the window-rule certificate flag and no
/// fallback.
pub fn cvp_window_search(spec: &MetricSpec, u: &DiagonalUnitary, window: usize) -> Result<CvpResult> {
    if window == 0 {
        return Err(Error::WindowTooSmall { window: 0 });
    }
    let obj = Objective::new(spec, u)?;
    let (v, m) = enumerate_window(&obj, window).ok_or(Error::WindowTooSmall {
        window: window as i64,
    })?;
    let mut out = obj.result(m, Certificate::WindowBound, window, true);
    out.certified = v < obj.window_threshold(window);
    Ok(out)
}

/// `F(H - 2π round(h/2π))` with the trace repaired on coordinate 0 in SU
/// mode.
pub fn babai_value(spec: &MetricSpec, u: &DiagonalUnitary) -> Result<f64> {
    let obj = Objective::new(spec, u)?;
    Ok(obj.value(&obj.babai()))
}

/// `F(H - 2π diag(m))` for an explicit lattice point.
pub fn lattice_point_value(spec: &MetricSpec, u: &DiagonalUnitary, m: &[i64]) -> Result<f64> {
    let obj = Objective::new(spec, u)?;
    if m.len() != obj.dim() {
        return Err(Error::DimensionMismatch {
            expected: obj.dim(),
            got: m.len(),
        });
    }
    if !obj.feasible(m) {
        let excess = m.iter().sum::<i64>() - obj.trace_target;
        return Err(Error::NonTracelessInSUMode {
            trace: -2.0 * PI * excess as f64,
        });
    }
    Ok(obj.value(m))
}

/// `π(k - (2 + n + n²)(k - 1)/2^{n+1})`, the minimal Pauli geodesic length
/// of the AND-function unitary under `Fp` with the step penalty.
pub fn and_function_length(n: usize, k: f64) -> f64 {
    let n_f = n as f64;
    PI * (k - (2.0 + n_f + n_f * n_f) / 2f64.powi(n as i32 + 1) * (k - 1.0))
}

fn lattice_dim(n: usize) -> f64 {
    (1usize << n) as f64
}

/// `ln V_F(r)` on the `2^n`-dimensional diagonal subspace.
pub fn log_unit_ball_volume(spec: &MetricSpec, r: f64, n: usize) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("radius {r} must be finite and nonnegative")));
    }
    let d = lattice_dim(n);
    match spec.family {
        Family::F1 | Family::F1Delta => Ok(d * (2.0 * r).ln() - ln_gamma(d + 1.0)),
        Family::F2 => Ok(d * (PI.sqrt() * r).ln() - ln_gamma(d / 2.0 + 1.0)),
        Family::Fq => {
            spec.compile(n)?;
            Ok(d * (PI.sqrt() * r).ln() - ln_gamma(d / 2.0 + 1.0) - 0.5 * log_penalty_product(spec, n))
        }
        Family::Fp | Family::FpDelta => Err(Error::UnsupportedSpec(format!(
            "no closed-form ball volume for {}",
            spec.family
        ))),
    }
}

/// `Σ_s ln q(wt s)` over the Z-type strings, identity included.
fn log_penalty_product(spec: &MetricSpec, n: usize) -> f64 {
    (0..1usize << n)
        .map(|s| spec.penalty_value(s.count_ones() as usize).ln())
        .sum()
}

pub fn unit_ball_volume(spec: &MetricSpec, r: f64, n: usize) -> Result<f64> {
    log_unit_ball_volume(spec, r, n).map(f64::exp)
}

/// Smallest `r` with `f det(M) ≤ V_F(r)`: if a fraction `f` of diagonal
/// Hamiltonians lie within `r` of the lattice then `r` is at least this.
///
/// `Fp`/`FpΔ` dominate `F1` when `p ≥ 1`, so they get the `F1` bound.
pub fn coverage_bound(spec: &MetricSpec, f_fraction: f64, n: usize) -> Result<f64> {
    if !(f_fraction > 0.0 && f_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("fraction {f_fraction} must be in (0, 1]")));
    }
    let d = lattice_dim(n);
    let rhs = f_fraction.ln() + PhaseLattice::new(n, BasisMode::U).log_cell_volume();
    let ln_r = match spec.family {
        Family::F1 | Family::F1Delta | Family::Fp | Family::FpDelta => (rhs + ln_gamma(d + 1.0)) / d - 2f64.ln(),
        Family::F2 => (rhs + ln_gamma(d / 2.0 + 1.0)) / d - 0.5 * PI.ln(),
        Family::Fq => {
            spec.compile(n)?;
            (rhs + ln_gamma(d / 2.0 + 1.0) + 0.5 * log_penalty_product(spec, n)) / d - 0.5 * PI.ln()
        }
    };
    Ok(ln_r.exp())
}

/// Stirling form of [`coverage_bound`]: `(π/e) 2^{n/2} f^{1/2^n}` for the
/// `ℓ1` families, `f^{1/2^n} √(2π/e) (Π q)^{1/2^{n+1}}` for `F2`/`Fq`.
pub fn coverage_bound_stirling(spec: &MetricSpec, f_fraction: f64, n: usize) -> Result<f64> {
    let d = lattice_dim(n);
    let root_f = f_fraction.powf(1.0 / d);
    Ok(match spec.family {
        Family::F1 | Family::F1Delta | Family::Fp | Family::FpDelta => {
            PI / std::f64::consts::E * 2f64.powf(n as f64 / 2.0) * root_f
        }
        Family::F2 => root_f * (2.0 * PI / std::f64::consts::E).sqrt(),
        Family::Fq => {
            spec.compile(n)?;
            root_f * (2.0 * PI / std::f64::consts::E).sqrt() * (0.5 * log_penalty_product(spec, n) / d).exp()
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageEstimate {
    pub fraction: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl CoverageEstimate {
    /// `((f - 3σ) det M, V_F(r))` for the volume inequality. Lowering the
    /// fraction by three standard errors makes the check one-sided at 3σ.
    pub fn volume_inequality(&self, spec: &MetricSpec, r: f64, n: usize) -> Result<(f64, f64)> {
        let cell = PhaseLattice::new(n, BasisMode::U).log_cell_volume().exp();
        let lhs = (self.fraction - 3.0 * self.stderr).max(0.0) * cell;
        Ok((lhs, unit_ball_volume(spec, r, n)?))
    }
}

/// Fraction of diagonal Hamiltonians, uniform on the fundamental cell
/// `[-π, π)^{2^n}`, whose minimal Pauli geodesic has length at most `r`.
/// Always evaluated in U mode.
pub fn monte_carlo_coverage<R: Rng + ?Sized>(
    spec: &MetricSpec,
    r: f64,
    n: usize,
    samples: usize,
    rng: &mut R,
) -> Result<CoverageEstimate> {
    if n > MONTE_CARLO_MAX_N {
        return Err(Error::DimensionLimit {
            n,
            cap: MONTE_CARLO_MAX_N,
        });
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    let spec_u = MetricSpec {
        mode: BasisMode::U,
        ..spec.clone()
    };
    let d = 1usize << n;
    let draws: Vec<Vec<f64>> = (0..samples)
        .map(|_| (0..d).map(|_| rng.random_range(-PI..PI)).collect())
        .collect();
    let hits = draws
        .into_par_iter()
        .map(|theta| -> Result<usize> {
            let u = DiagonalUnitary::new(n, theta)?;
            let obj = Objective::new(&spec_u, &u)?;
            let m = branch_and_bound(&obj).ok_or(Error::WindowTooSmall { window: 0 })?;
            Ok(usize::from(obj.value(&m) <= r))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();
    let fraction = hits as f64 / samples as f64;
    Ok(CoverageEstimate {
        fraction,
        stderr: (fraction * (1.0 - fraction) / samples as f64).sqrt(),
        samples,
    })
}
