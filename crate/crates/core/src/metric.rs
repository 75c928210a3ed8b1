// SPDX-License-Identifier: Apache-2.0

//! Right-invariant local metrics as norms on the Pauli coefficients of the
//! control Hamiltonian.
//!
//! `F1` and `Fp` are weighted ℓ1 norms and are not smooth on the coordinate
//! hyperplanes. `F1Δ` and `FpΔ` replace them by the norm `N` implicitly
//! defined by `g(y / N(y)) = 1` with `g(y) = Σ p(wt σ) sqrt(Δ² + y_σ²)`; this
//! norm is smooth, strongly convex, and satisfies
//! `Fp(y) ≤ FpΔ(y) ≤ Fp(y) / (1 - PΔ)` with `P = Σ p(wt σ)`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::pauli::{self, BasisMode, PauliVector};
use crate::{Error, Result};

fn default_cutoff() -> usize {
    2
}

/// Weight-dependent penalty `p(wt σ)` or `q(wt σ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PenaltyFunction {
    /// `1` for weights up to `low_weight_cutoff` (including the identity),
    /// `k` above.
    Step {
        #[serde(default = "default_cutoff")]
        low_weight_cutoff: usize,
        k: f64,
    },
    /// Explicit values for weights `0..=n`.
    Table { values: Vec<f64> },
}

impl PenaltyFunction {
    pub fn step(k: f64) -> Self {
        PenaltyFunction::Step {
            low_weight_cutoff: 2,
            k,
        }
    }

    pub fn table(values: Vec<f64>) -> Self {
        PenaltyFunction::Table { values }
    }

    pub fn value(&self, weight: usize) -> f64 {
        match self {
            PenaltyFunction::Step {
                low_weight_cutoff,
                k,
            } => {
                if weight <= *low_weight_cutoff {
                    1.0
                } else {
                    *k
                }
            }
            PenaltyFunction::Table { values } => values[weight],
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            PenaltyFunction::Step { k, .. } => {
                if !(*k >= 1.0) || !k.is_finite() {
                    return Err(Error::InvalidPenalty(format!("k = {k} must be finite and >= 1")));
                }
            }
            PenaltyFunction::Table { values } => {
                if values.len() <= n {
                    return Err(Error::InvalidPenalty(format!(
                        "table has {} entries, needs weights 0..={n}",
                        values.len()
                    )));
                }
                if let Some(v) = values.iter().find(|v| !(**v >= 1.0) || !v.is_finite()) {
                    return Err(Error::InvalidPenalty(format!("value {v} must be finite and >= 1")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    F1,
    F2,
    Fp,
    Fq,
    F1Delta,
    FpDelta,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::F1,
        Family::F2,
        Family::Fp,
        Family::Fq,
        Family::F1Delta,
        Family::FpDelta,
    ];

    pub fn is_smooth(self) -> bool {
        !matches!(self, Family::F1 | Family::Fp)
    }

    pub fn uses_penalty(self) -> bool {
        matches!(self, Family::Fp | Family::Fq | Family::FpDelta)
    }

    pub fn uses_delta(self) -> bool {
        matches!(self, Family::F1Delta | Family::FpDelta)
    }

    /// ℓ2-type families (quadratic `F²`).
    pub fn is_quadratic(self) -> bool {
        matches!(self, Family::F2 | Family::Fq)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Which metric, with its penalty, smoothing width and basis mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<PenaltyFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub mode: BasisMode,
}

impl MetricSpec {
    pub fn f1(mode: BasisMode) -> Self {
        MetricSpec {
            family: Family::F1,
            penalty: None,
            delta: None,
            mode,
        }
    }

    pub fn f2(mode: BasisMode) -> Self {
        MetricSpec {
            family: Family::F2,
            penalty: None,
            delta: None,
            mode,
        }
    }

    pub fn fp(penalty: PenaltyFunction, mode: BasisMode) -> Self {
        MetricSpec {
            family: Family::Fp,
            penalty: Some(penalty),
            delta: None,
            mode,
        }
    }

    pub fn fq(penalty: PenaltyFunction, mode: BasisMode) -> Self {
        MetricSpec {
            family: Family::Fq,
            penalty: Some(penalty),
            delta: None,
            mode,
        }
    }

    pub fn f1_delta(delta: f64, mode: BasisMode) -> Self {
        MetricSpec {
            family: Family::F1Delta,
            penalty: None,
            delta: Some(delta),
            mode,
        }
    }

    pub fn fp_delta(penalty: PenaltyFunction, delta: f64, mode: BasisMode) -> Self {
        MetricSpec {
            family: Family::FpDelta,
            penalty: Some(penalty),
            delta: Some(delta),
            mode,
        }
    }

    /// Per-weight penalty; `1` for the unpenalized families.
    pub fn penalty_value(&self, weight: usize) -> f64 {
        match (&self.penalty, self.family.uses_penalty()) {
            (Some(p), true) => p.value(weight),
            _ => 1.0,
        }
    }

    /// Same metric with the smoothing removed (`F1Δ → F1`, `FpΔ → Fp`).
    pub fn unsmoothed(&self) -> MetricSpec {
        let family = match self.family {
            Family::F1Delta => Family::F1,
            Family::FpDelta => Family::Fp,
            other => other,
        };
        MetricSpec {
            family,
            delta: None,
            ..self.clone()
        }
    }

    /// Validate against a qubit count and precompute per-coordinate weights.
    pub fn compile(&self, n: usize) -> Result<LocalNorm> {
        if self.family.uses_penalty() {
            match &self.penalty {
                Some(p) => p.validate(n)?,
                None => {
                    return Err(Error::InvalidPenalty(format!(
                        "{} requires a penalty function",
                        self.family
                    )))
                }
            }
        }
        let weights = DVector::from_iterator(
            self.mode.dim(n),
            pauli::basis_weights(n, self.mode)
                .into_iter()
                .map(|w| self.penalty_value(w)),
        );
        let p_total = weights.sum();
        let delta = if self.family.uses_delta() {
            let delta = self
                .delta
                .ok_or_else(|| Error::InvalidArgument(format!("{} requires delta", self.family)))?;
            if !(delta > 0.0) {
                return Err(Error::InvalidArgument(format!("delta = {delta} must be positive")));
            }
            if p_total * delta >= 1.0 {
                return Err(Error::DeltaTooLarge {
                    p_delta: p_total * delta,
                });
            }
            delta
        } else {
            0.0
        };
        Ok(LocalNorm {
            family: self.family,
            mode: self.mode,
            n,
            weights,
            delta,
            p_total,
        })
    }
}

/// A [`MetricSpec`] bound to a qubit count, evaluated on raw coefficient
/// vectors in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalNorm {
    family: Family,
    mode: BasisMode,
    n: usize,
    weights: DVector<f64>,
    delta: f64,
    p_total: f64,
}

impl LocalNorm {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn mode(&self) -> BasisMode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `p(wt σ)` (or `q`) per coordinate.
    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// `P = Σ_σ p(wt σ)`.
    pub fn p_total(&self) -> f64 {
        self.p_total
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn check_dim(&self, y: &DVector<f64>) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: y.len(),
            });
        }
        Ok(())
    }

    fn weighted_l1(&self, y: &DVector<f64>) -> f64 {
        y.iter().zip(self.weights.iter()).map(|(v, p)| p * v.abs()).sum()
    }

    fn weighted_l2(&self, y: &DVector<f64>) -> f64 {
        y.iter()
            .zip(self.weights.iter())
            .map(|(v, q)| q * v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn value(&self, y: &DVector<f64>) -> Result<f64> {
        self.check_dim(y)?;
        Ok(match self.family {
            Family::F1 | Family::Fp => self.weighted_l1(y),
            Family::F2 | Family::Fq => self.weighted_l2(y),
            Family::F1Delta | Family::FpDelta => self.implicit_value(y),
        })
    }

    /// `g(y) = Σ p sqrt(Δ² + y²)`.
    pub fn indicatrix_function(&self, y: &DVector<f64>) -> f64 {
        let d2 = self.delta * self.delta;
        y.iter()
            .zip(self.weights.iter())
            .map(|(v, p)| p * (d2 + v * v).sqrt())
            .sum()
    }

    /// Root of `g(y/N) = 1`, solved for `s = 1/N`.
    ///
    /// `s ↦ g(s·y)` is convex and increasing, and the sandwich bound puts the
    /// root in `[(1 - PΔ)/N_p, 1/N_p]`. Newton started at the upper end
    /// decreases monotonically onto the root; bisection takes over if a step
    /// ever leaves the bracket.
    fn implicit_value(&self, y: &DVector<f64>) -> f64 {
        let np = self.weighted_l1(y);
        if np == 0.0 {
            return 0.0;
        }
        let d2 = self.delta * self.delta;
        let phi = |s: f64| -> (f64, f64) {
            let mut val = 0.0;
            let mut der = 0.0;
            for (v, p) in y.iter().zip(self.weights.iter()) {
                let a = (d2 + s * s * v * v).sqrt();
                val += p * a;
                if a > 0.0 {
                    der += p * s * v * v / a;
                }
            }
            (val, der)
        };
        let mut lo = (1.0 - self.p_total * self.delta) / np;
        let mut hi = 1.0 / np;
        let mut s = hi;
        for _ in 0..200 {
            let (val, der) = phi(s);
            let resid = val - 1.0;
            if resid.abs() < 1e-14 {
                break;
            }
            if resid > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let newton = if der > 0.0 { s - resid / der } else { f64::NAN };
            let next = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - s).abs() <= 1e-17 * s {
                s = next;
                break;
            }
            s = next;
        }
        1.0 / s
    }

    /// `∂(F²)/∂y`. For `F1`/`Fp` this is the almost-everywhere gradient.
    pub fn gradient_sq(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(y)?;
        Ok(match self.family {
            Family::F2 | Family::Fq => y.component_mul(&self.weights) * 2.0,
            Family::F1 | Family::Fp => {
                let f = self.weighted_l1(y);
                DVector::from_iterator(
                    y.len(),
                    y.iter()
                        .zip(self.weights.iter())
                        .map(|(v, p)| 2.0 * f * p * v.signum() * (*v != 0.0) as u8 as f64),
                )
            }
            Family::F1Delta | Family::FpDelta => {
                let n = self.implicit_value(y);
                if n == 0.0 {
                    return Ok(DVector::zeros(y.len()));
                }
                let parts = self.implicit_parts(y, n);
                parts.g1 * (2.0 * n * n / parts.dot)
            }
        })
    }

    fn implicit_parts(&self, y: &DVector<f64>, n: f64) -> ImplicitParts {
        let d2 = self.delta * self.delta;
        let mut g1 = DVector::zeros(y.len());
        let mut g2 = DVector::zeros(y.len());
        for k in 0..y.len() {
            let yh = y[k] / n;
            let a = (d2 + yh * yh).sqrt();
            g1[k] = self.weights[k] * yh / a;
            g2[k] = self.weights[k] * d2 / (a * a * a);
        }
        let dot = g1.dot(y);
        ImplicitParts { g1, g2, dot }
    }

    /// `H_{jk} = ½ ∂²(F²)/∂y^j∂y^k`.
    pub fn hessian(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_dim(y)?;
        if !self.family.is_smooth() {
            return Err(Error::NotSmoothMetric(self.family.to_string()));
        }
        if y.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(match self.family {
            Family::F2 | Family::Fq => DMatrix::from_diagonal(&self.weights),
            _ => {
                let n = self.implicit_value(y);
                let ImplicitParts { g1, g2, dot } = self.implicit_parts(y, n);
                let quad: f64 = g2.iter().zip(y.iter()).map(|(g, v)| g * v * v).sum();
                let d = y.len();
                let outer = (quad + n * dot) * n / dot.powi(3);
                DMatrix::from_fn(d, d, |j, k| {
                    let mut h = outer * g1[j] * g1[k]
                        - n * (g1[j] * g2[k] * y[k] + g1[k] * g2[j] * y[j]) / (dot * dot);
                    if j == k {
                        h += n * g2[j] / dot;
                    }
                    h
                })
            }
        })
    }
}

struct ImplicitParts {
    /// `∂g/∂y` at `y/N`.
    g1: DVector<f64>,
    /// Diagonal of `∂²g/∂y²` at `y/N`.
    g2: DVector<f64>,
    /// `∇g(y/N) · y`.
    dot: f64,
}

fn compiled(spec: &MetricSpec, y: &PauliVector) -> Result<LocalNorm> {
    if y.mode() != spec.mode {
        return Err(Error::DimensionMismatch {
            expected: spec.mode.dim(y.n()),
            got: y.dim(),
        });
    }
    spec.compile(y.n())
}

pub fn norm(spec: &MetricSpec, y: &PauliVector) -> Result<f64> {
    compiled(spec, y)?.value(y.entries())
}

pub fn implicit_norm(spec: &MetricSpec, y: &PauliVector) -> Result<f64> {
    if !spec.family.uses_delta() {
        return Err(Error::UnsupportedSpec(spec.family.to_string()));
    }
    norm(spec, y)
}

pub fn hessian(spec: &MetricSpec, y: &PauliVector) -> Result<DMatrix<f64>> {
    compiled(spec, y)?.hessian(y.entries())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EulerResiduals {
    /// `|Σ_j ∂_j F² y^j - 2F²|`.
    pub first: f64,
    /// `|Σ_jk ∂²_jk F² y^j y^k - 2F²|`.
    pub second: f64,
    /// `max_kl |Σ_j ∂³_jkl F² y^j|`, by central differences.
    pub third: f64,
}

impl EulerResiduals {
    pub fn max(&self) -> f64 {
        self.first.max(self.second).max(self.third)
    }
}

pub fn euler_identities_check(spec: &MetricSpec, y: &PauliVector) -> Result<EulerResiduals> {
    let local = compiled(spec, y)?;
    let v = y.entries();
    let h = local.hessian(v)?;
    let f = local.value(v)?;
    let f2 = f * f;
    let grad = local.gradient_sq(v)?;
    let first = (grad.dot(v) - 2.0 * f2).abs();
    let second = ((v.transpose() * &h * v)[(0, 0)] * 2.0 - 2.0 * f2).abs();

    let len = v.norm();
    let step = 1e-4 * len;
    let dir = v / len;
    let plus = local.hessian(&(v + &dir * step))?;
    let minus = local.hessian(&(v - &dir * step))?;
    // D_y(∂²F²) = |y| · d/dτ (2H)(y + τ ŷ)
    let third = ((plus - minus) * (len / step)).amax();
    Ok(EulerResiduals {
        first,
        second,
        third,
    })
}

/// Empirical `(min, max)` of `F_B(y) / F_A(y)` over Gaussian samples.
pub fn metric_equivalence_constants<R: Rng + ?Sized>(
    spec_a: &MetricSpec,
    spec_b: &MetricSpec,
    n: usize,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if spec_a.mode != spec_b.mode {
        return Err(Error::InvalidArgument("metrics use different basis modes".into()));
    }
    let a = spec_a.compile(n)?;
    let b = spec_b.compile(n)?;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for _ in 0..samples {
        let y = linalg::random_gaussian_vector(a.dim(), rng);
        let ratio = b.value(&y)? / a.value(&y)?;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok((lo, hi))
}
