// SPDX-License-Identifier: Apache-2.0

//! Geodesics of right-invariant metrics in Pauli coordinates.
//!
//! A right-invariant metric is constant in adapted coordinates, so in the
//! Pauli chart it reads `F(x, y) = N(M(x) y)` where `M(x)` is the BCH
//! coordinate-change matrix and `N` the local norm. The fundamental tensor is
//! `g(x, y) = M(x)ᵀ H_N(M(x) y) M(x)` with the analytic Hessian of `N`, and
//! its `x`-derivatives are taken by central differences.
//!
//! The geodesic equation `ẍ^j + Γ^j_kl ẋ^k ẋ^l = 0` is integrated with RK4.
//! Only the contraction `Γ^j_kl y^k y^l` is needed, which reduces to
//! `g^{jm} (A_m - B_m / 2)` with `A = (D_y g) y` (one directional
//! difference) and `B = ∂_x F²`. When the base point nears the branch cut
//! of the logarithm the integration restarts in a chart centered at the
//! current unitary; right-invariance makes the metric functions identical
//! there.

use std::f64::consts::PI;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coords::{self, BchChart, UnitaryOperator};
use crate::linalg::{self, HermitianEigen};
use crate::metric::{LocalNorm, MetricSpec};
use crate::pauli::{self, PauliString, PauliVector, StabilizerSubgroup};
use crate::{CMatrix, Error, Result};

/// Central-difference step for `x`-derivatives.
pub const DEFAULT_FD_STEP: f64 = 1e-5;
/// Minimum eigenvalue of `g` below which it is treated as singular.
pub const SINGULAR_TOL: f64 = 1e-10;

/// A point of the tangent bundle in Pauli coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinslerPoint {
    pub x: PauliVector,
    pub y: PauliVector,
}

/// Right-invariant metric expressed in one Pauli chart.
#[derive(Clone, Debug)]
pub struct ChartMetric {
    spec: MetricSpec,
    local: LocalNorm,
    basis: Vec<CMatrix>,
    fd_step: f64,
}

impl ChartMetric {
    pub fn new(spec: &MetricSpec, n: usize) -> Result<Self> {
        Ok(ChartMetric {
            spec: spec.clone(),
            local: spec.compile(n)?,
            basis: coords::basis_matrices(n, spec.mode),
            fd_step: DEFAULT_FD_STEP,
        })
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    pub fn spec(&self) -> &MetricSpec {
        &self.spec
    }

    pub fn local(&self) -> &LocalNorm {
        &self.local
    }

    pub fn n(&self) -> usize {
        self.local.n()
    }

    pub fn dim(&self) -> usize {
        self.local.dim()
    }

    fn vector(&self, x: &DVector<f64>) -> PauliVector {
        PauliVector::from_entries(self.n(), self.spec.mode, x.clone())
            .expect("chart vectors have the basis dimension")
    }

    fn check(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// `M(x)`, with `ỹ = M(x) y`.
    pub fn change_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        BchChart::new(&self.vector(x)).coordinate_change_matrix_in(&self.basis)
    }

    /// `F(x, y)`.
    pub fn speed(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        self.local.value(&(self.change_matrix(x) * y))
    }

    /// `g_jk(x, y) = ½ ∂²F²/∂y^j∂y^k`.
    pub fn tensor(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check(x)?;
        self.check(y)?;
        let m = self.change_matrix(x);
        self.tensor_with(&m, y)
    }

    fn tensor_with(&self, m: &DMatrix<f64>, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        let h = self.local.hessian(&(m * y))?;
        Ok(m.transpose() * h * m)
    }

    /// `∂F²/∂y^j`.
    pub fn grad_y_sq(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        let m = self.change_matrix(x);
        Ok(m.transpose() * self.local.gradient_sq(&(&m * y))?)
    }

    /// `∂F²/∂x^j` by central differences.
    pub fn grad_x_sq(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        let h = self.fd_step;
        let parts: Result<Vec<f64>> = (0..self.dim())
            .into_par_iter()
            .map(|m| {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[m] += h;
                xm[m] -= h;
                let fp = self.speed(&xp, y)?;
                let fm = self.speed(&xm, y)?;
                Ok((fp * fp - fm * fm) / (2.0 * h))
            })
            .collect();
        Ok(DVector::from_vec(parts?))
    }

    fn factor(&self, g: DMatrix<f64>) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
        let min_eigenvalue = linalg::min_eigenvalue(&g);
        if !(min_eigenvalue >= SINGULAR_TOL) {
            return Err(Error::SingularHessian { min_eigenvalue });
        }
        g.cholesky().ok_or(Error::SingularHessian { min_eigenvalue })
    }

    /// Geodesic acceleration `ẍ = -Γ^j_kl(x, y) y^k y^l`.
    pub fn spray(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(x)?;
        self.check(y)?;
        let len = y.norm();
        if len == 0.0 {
            return Err(Error::ZeroVector);
        }
        let g = self.tensor(x, y)?;
        let chol = self.factor(g)?;
        // A_m = g_{mk,l} y^k y^l, the derivative of g along y contracted with y.
        let h = self.fd_step;
        let dir = y / len;
        let gp = self.tensor(&(x + &dir * h), y)?;
        let gm = self.tensor(&(x - &dir * h), y)?;
        let a = (gp - gm) * y * (len / (2.0 * h));
        // B_m = g_{kl,m} y^k y^l = ∂_m F²(x, y) since yᵀ g(x, y) y = F²(x, y).
        let b = self.grad_x_sq(x, y)?;
        Ok(-chol.solve(&(a - b * 0.5)))
    }

    /// Full `Γ^j_kl(x, y)`.
    pub fn christoffel(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<ChristoffelField> {
        self.check(x)?;
        self.check(y)?;
        let d = self.dim();
        let g = self.tensor(x, y)?;
        let chol = self.factor(g)?;
        let h = self.fd_step;
        // dg[l] = ∂g/∂x^l
        let dg: Result<Vec<DMatrix<f64>>> = (0..d)
            .into_par_iter()
            .map(|l| {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[l] += h;
                xm[l] -= h;
                Ok((self.tensor(&xp, y)? - self.tensor(&xm, y)?) / (2.0 * h))
            })
            .collect();
        let dg = dg?;
        let mut gammas = vec![0.0; d * d * d];
        let mut lowered = DVector::zeros(d);
        for k in 0..d {
            for l in 0..d {
                for m in 0..d {
                    lowered[m] = 0.5 * (dg[l][(m, k)] + dg[k][(m, l)] - dg[m][(k, l)]);
                }
                let raised = chol.solve(&lowered);
                for j in 0..d {
                    gammas[(j * d + k) * d + l] = raised[j];
                }
            }
        }
        Ok(ChristoffelField { dim: d, gammas })
    }
}

/// `Γ^j_kl` at one point of the tangent bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct ChristoffelField {
    pub dim: usize,
    pub gammas: Vec<f64>,
}

impl ChristoffelField {
    pub fn get(&self, j: usize, k: usize, l: usize) -> f64 {
        self.gammas[(j * self.dim + k) * self.dim + l]
    }

    /// `Γ^j_kl y^k y^l`.
    pub fn contract(&self, y: &DVector<f64>) -> DVector<f64> {
        let d = self.dim;
        DVector::from_fn(d, |j, _| {
            let mut s = 0.0;
            for k in 0..d {
                for l in 0..d {
                    s += self.get(j, k, l) * y[k] * y[l];
                }
            }
            s
        })
    }

    /// `max |Γ^j_kl - Γ^j_lk|`.
    pub fn asymmetry(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for j in 0..d {
            for k in 0..d {
                for l in 0..k {
                    worst = worst.max((self.get(j, k, l) - self.get(j, l, k)).abs());
                }
            }
        }
        worst
    }
}

fn check_point(x: &PauliVector, y: &PauliVector) -> Result<()> {
    if x.n() != y.n() || x.mode() != y.mode() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    Ok(())
}

/// Largest `|λ|` over the eigenvalues of `x·σ`.
pub fn spectral_radius(x: &PauliVector) -> f64 {
    HermitianEigen::new(&x.matrix()).spectral_radius()
}

/// `F(x, y) = N(ℰ_{x·σ}(y·σ))`.
pub fn metric_in_pauli_coords(spec: &MetricSpec, x: &PauliVector, y: &PauliVector) -> Result<f64> {
    check_point(x, y)?;
    let distance = PI - spectral_radius(x);
    if distance.abs() < coords::BRANCH_CUT_TOL {
        return Err(Error::BranchCut { distance });
    }
    let adapted = coords::change_coords_forward(x, y)?;
    crate::metric::norm(spec, &adapted)
}

pub fn christoffel(spec: &MetricSpec, x: &PauliVector, y: &PauliVector) -> Result<ChristoffelField> {
    check_point(x, y)?;
    ChartMetric::new(spec, x.n())?.christoffel(x.entries(), y.entries())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub t: f64,
    pub x: PauliVector,
    pub y: PauliVector,
    pub speed: f64,
    /// Index into [`Curve::anchors`]; chart 0 is the identity chart when no
    /// anchors are recorded.
    #[serde(default)]
    pub chart: usize,
}

/// A sampled curve. Sample `i` is the unitary
/// `exp(-i x_i·σ) · anchors[chart_i]`. At a change of chart the boundary
/// time appears twice, once in each chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub metric: MetricSpec,
    pub samples: Vec<CurveSample>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub anchors: Vec<UnitaryOperator>,
}

impl Curve {
    pub fn n(&self) -> usize {
        self.samples.first().map_or(0, |s| s.x.n())
    }

    pub fn anchor(&self, chart: usize) -> CMatrix {
        match self.anchors.get(chart) {
            Some(u) => u.matrix().clone(),
            None => linalg::identity(1 << self.n()),
        }
    }

    pub fn unitary_at(&self, index: usize) -> CMatrix {
        let s = &self.samples[index];
        linalg::expm_hermitian(&s.x.matrix(), 1.0) * self.anchor(s.chart)
    }

    pub fn end_unitary(&self) -> CMatrix {
        self.unitary_at(self.samples.len() - 1)
    }

    /// Maximal runs of samples sharing one chart.
    pub fn segments(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.samples.len() {
            if i == self.samples.len() || self.samples[i].chart != self.samples[start].chart {
                out.push(start..i);
                start = i;
            }
        }
        out
    }

    pub fn speed_drift(&self) -> f64 {
        let first = self.samples.first().map_or(0.0, |s| s.speed);
        self.samples
            .iter()
            .fold(0.0, |acc, s| acc.max((s.speed - first).abs()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShootOptions {
    /// Allowed `|F(x(t), y(t)) - F(x0, y0)|`, relative to `max(1, F(x0, y0))`.
    pub speed_tol: f64,
    /// Re-anchor when an eigenphase of the chart point exceeds `π - margin`.
    pub reanchor_margin: f64,
    pub max_steps: usize,
    pub max_n: usize,
    pub fd_step: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            speed_tol: 1e-5,
            reanchor_margin: 0.2,
            max_steps: 1_000_000,
            max_n: 2,
            fd_step: DEFAULT_FD_STEP,
        }
    }
}

pub fn shoot_geodesic(
    spec: &MetricSpec,
    x0: &PauliVector,
    y0: &PauliVector,
    t_end: f64,
    steps: usize,
) -> Result<Curve> {
    shoot_geodesic_with(spec, x0, y0, t_end, steps, &ShootOptions::default())
}

/// RK4 integration of `ẋ = y`, `ẏ = -Γ(x, y) y y` with re-anchoring.
pub fn shoot_geodesic_with(
    spec: &MetricSpec,
    x0: &PauliVector,
    y0: &PauliVector,
    t_end: f64,
    steps: usize,
    opts: &ShootOptions,
) -> Result<Curve> {
    check_point(x0, y0)?;
    let n = x0.n();
    if n > opts.max_n {
        return Err(Error::DimensionLimit { n, cap: opts.max_n });
    }
    if steps > opts.max_steps {
        return Err(Error::StepLimitExceeded {
            requested: steps,
            limit: opts.max_steps,
        });
    }
    if steps == 0 || !(t_end > 0.0) {
        return Err(Error::InvalidArgument("need steps > 0 and t_end > 0".into()));
    }
    if y0.is_zero() {
        return Err(Error::ZeroVector);
    }
    let chart = ChartMetric::new(spec, n)?.with_fd_step(opts.fd_step);
    let dt = t_end / steps as f64;
    let mut x = x0.entries().clone();
    let mut y = y0.entries().clone();
    let speed0 = chart.speed(&x, &y)?;
    let tol = opts.speed_tol * speed0.max(1.0);
    let mut anchors = vec![UnitaryOperator::identity(n)];
    let mut current = 0usize;
    let sample = |t: f64, x: &DVector<f64>, y: &DVector<f64>, speed: f64, chart_id: usize| CurveSample {
        t,
        x: chart.vector(x),
        y: chart.vector(y),
        speed,
        chart: chart_id,
    };
    let mut samples = vec![sample(0.0, &x, &y, speed0, 0)];

    for step in 1..=steps {
        let k1x = y.clone();
        let k1y = chart.spray(&x, &y)?;
        let x2 = &x + &k1x * (0.5 * dt);
        let y2 = &y + &k1y * (0.5 * dt);
        let k2y = chart.spray(&x2, &y2)?;
        let x3 = &x + &y2 * (0.5 * dt);
        let y3 = &y + &k2y * (0.5 * dt);
        let k3y = chart.spray(&x3, &y3)?;
        let x4 = &x + &y3 * dt;
        let y4 = &y + &k3y * dt;
        let k4y = chart.spray(&x4, &y4)?;
        x += (k1x + &y2 * 2.0 + &y3 * 2.0 + &y4) * (dt / 6.0);
        y += (k1y + k2y * 2.0 + k3y * 2.0 + k4y) * (dt / 6.0);

        let t = step as f64 * dt;
        let speed = chart.speed(&x, &y)?;
        let drift = (speed - speed0).abs();
        if drift > tol {
            return Err(Error::SpeedDrift {
                drift,
                tolerance: tol,
            });
        }
        samples.push(sample(t, &x, &y, speed, current));

        let xv = chart.vector(&x);
        if step < steps && spectral_radius(&xv) > PI - opts.reanchor_margin {
            // New origin at the current unitary; tangent becomes its
            // Hamiltonian, which is the Pauli coordinate at x = 0.
            let u = linalg::expm_hermitian(&xv.matrix(), 1.0) * anchors[current].matrix();
            y = chart.change_matrix(&x) * &y;
            x = DVector::zeros(x.len());
            anchors.push(UnitaryOperator::new(n, linalg::unitarize(&u))?);
            current += 1;
            let speed = chart.speed(&x, &y)?;
            samples.push(sample(t, &x, &y, speed, current));
        }
    }
    if current == 0 {
        anchors.clear();
    }
    Ok(Curve {
        metric: spec.clone(),
        samples,
        anchors,
    })
}

/// Which form of the Euler–Lagrange equations [`el_residual_with`] checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LagrangianForm {
    /// `d/dt ∂F²/∂y = ∂F²/∂x`.
    Squared,
    /// `d/dt ∂F/∂y = ∂F/∂x`.
    Unsquared,
}

/// Euler–Lagrange residual of the `F²` Lagrangian along a sampled curve.
pub fn el_residual(spec: &MetricSpec, curve: &Curve) -> Result<f64> {
    el_residual_with(spec, curve, LagrangianForm::Squared)
}

/// `max_{j,t} |d/dt ∂L/∂y^j - ∂L/∂x^j| / (max_{j,t} |∂L/∂x^j| + 1)`, with
/// `d/dt` by central differences between neighbouring samples of one chart.
pub fn el_residual_with(spec: &MetricSpec, curve: &Curve, form: LagrangianForm) -> Result<f64> {
    let n = curve.n();
    let chart = ChartMetric::new(spec, n)?;
    let scale = |x: &DVector<f64>, y: &DVector<f64>| -> Result<f64> {
        Ok(match form {
            LagrangianForm::Squared => 1.0,
            LagrangianForm::Unsquared => 0.5 / chart.speed(x, y)?,
        })
    };
    let momentum = |i: usize| -> Result<DVector<f64>> {
        let s = &curve.samples[i];
        let (x, y) = (s.x.entries(), s.y.entries());
        Ok(chart.grad_y_sq(x, y)? * scale(x, y)?)
    };
    let mut interior = Vec::new();
    for seg in curve.segments() {
        if seg.len() >= 3 {
            interior.extend(seg.start + 1..seg.end - 1);
        }
    }
    if interior.is_empty() {
        return Err(Error::InvalidArgument("curve has no interior samples".into()));
    }
    let rows: Result<Vec<(f64, f64)>> = interior
        .par_iter()
        .map(|&i| {
            let s = &curve.samples[i];
            let (x, y) = (s.x.entries(), s.y.entries());
            let force = chart.grad_x_sq(x, y)? * scale(x, y)?;
            let dt = curve.samples[i + 1].t - curve.samples[i - 1].t;
            let dp = (momentum(i + 1)? - momentum(i - 1)?) / dt;
            Ok(((dp - &force).amax(), force.amax()))
        })
        .collect();
    let (worst, force_max) = rows?
        .into_iter()
        .fold((0.0f64, 0.0f64), |(a, b), (r, f)| (a.max(r), b.max(f)));
    Ok(worst / (force_max + 1.0))
}

/// `∫ f dt` for samples on an arbitrary increasing grid: composite Simpson
/// over pairs of intervals, with a quadratic end correction for an odd count.
pub fn simpson(t: &[f64], f: &[f64]) -> f64 {
    let m = t.len();
    if m < 2 {
        return 0.0;
    }
    if m == 2 {
        return 0.5 * (t[1] - t[0]) * (f[0] + f[1]);
    }
    let mut total = 0.0;
    let mut i = 0;
    while i + 2 < m {
        let h0 = t[i + 1] - t[i];
        let h1 = t[i + 2] - t[i + 1];
        let hs = h0 + h1;
        total += hs / 6.0
            * ((2.0 - h1 / h0) * f[i] + hs * hs / (h0 * h1) * f[i + 1] + (2.0 - h0 / h1) * f[i + 2]);
        i += 2;
    }
    if i + 1 < m {
        // Last interval from the parabola through the final three points.
        let h0 = t[m - 2] - t[m - 3];
        let h1 = t[m - 1] - t[m - 2];
        let alpha = (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1));
        let beta = (h1 * h1 + 3.0 * h1 * h0) / (6.0 * h0);
        let eta = h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
        total += alpha * f[m - 1] + beta * f[m - 2] - eta * f[m - 3];
    }
    total
}

/// `∫ F(x(t), y(t)) dt` by composite Simpson, chart by chart.
pub fn curve_length(spec: &MetricSpec, curve: &Curve) -> Result<f64> {
    let chart = ChartMetric::new(spec, curve.n())?;
    let mut total = 0.0;
    for seg in curve.segments() {
        let samples = &curve.samples[seg];
        let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
        let f: Result<Vec<f64>> = samples
            .iter()
            .map(|s| chart.speed(s.x.entries(), s.y.entries()))
            .collect();
        total += simpson(&t, &f?);
    }
    Ok(total)
}

/// `t ↦ exp(-i h·σ t)` on `[0, t_end]`, which is the straight line `x = h t`
/// in each chart, re-anchored before the branch cut.
pub fn one_parameter_curve(
    spec: &MetricSpec,
    h: &PauliVector,
    t_end: f64,
    steps: usize,
) -> Result<Curve> {
    if steps == 0 || !(t_end > 0.0) {
        return Err(Error::InvalidArgument("need steps > 0 and t_end > 0".into()));
    }
    let n = h.n();
    let chart = ChartMetric::new(spec, n)?;
    let radius = spectral_radius(h);
    let speed = chart.local().value(h.entries())?;
    let dt = t_end / steps as f64;
    let hm = h.matrix();
    let mut samples = Vec::with_capacity(steps + 1);
    let mut anchors = vec![UnitaryOperator::identity(n)];
    let mut chart_start = 0.0;
    for step in 0..=steps {
        let t = step as f64 * dt;
        let local_t = t - chart_start;
        samples.push(CurveSample {
            t,
            x: h.scaled(local_t),
            y: h.clone(),
            speed,
            chart: anchors.len() - 1,
        });
        if step < steps && radius * (local_t + dt) > PI - 0.2 {
            let u = linalg::expm_hermitian(&hm, t);
            anchors.push(UnitaryOperator::new(n, linalg::unitarize(&u))?);
            chart_start = t;
            samples.push(CurveSample {
                t,
                x: PauliVector::zeros(n, h.mode()),
                y: h.clone(),
                speed,
                chart: anchors.len() - 1,
            });
        }
    }
    if anchors.len() == 1 {
        anchors.clear();
    }
    Ok(Curve {
        metric: spec.clone(),
        samples,
        anchors,
    })
}

fn check_support(group: &StabilizerSubgroup, coeffs: &PauliVector) -> Result<()> {
    if group.n() != coeffs.n() {
        return Err(Error::DimensionMismatch {
            expected: group.n(),
            got: coeffs.n(),
        });
    }
    for (s, v) in coeffs.terms() {
        if v != 0.0 && !group.contains(&s) {
            return Err(Error::UnsupportedCoefficient(s.to_string()));
        }
    }
    Ok(())
}

/// `exp(-i H₀ t)` with `H₀ = Σ_{σ ∈ S} h^σ σ`.
pub fn pauli_geodesic(
    group: &StabilizerSubgroup,
    coeffs: &PauliVector,
    t: f64,
) -> Result<UnitaryOperator> {
    check_support(group, coeffs)?;
    UnitaryOperator::new(coeffs.n(), linalg::expm_hermitian(&coeffs.matrix(), t))
}

/// The sampled Pauli geodesic, length `t_end · N(h)`.
pub fn pauli_geodesic_curve(
    spec: &MetricSpec,
    group: &StabilizerSubgroup,
    coeffs: &PauliVector,
    t_end: f64,
    steps: usize,
) -> Result<Curve> {
    check_support(group, coeffs)?;
    one_parameter_curve(spec, coeffs, t_end, steps)
}

/// Embed `A`-system coordinates as `σ_A ⊗ I` (or `I ⊗ σ_B` with `left =
/// false`) in the joint system.
pub fn embed(v: &PauliVector, other_n: usize, left: bool) -> PauliVector {
    let n = v.n() + other_n;
    let mut out = PauliVector::zeros(n, v.mode());
    let id = PauliString::identity(other_n);
    for (s, value) in v.terms() {
        let joint = if left { s.tensor(&id) } else { id.tensor(&s) };
        let idx = pauli::index_of(&joint, v.mode()).expect("non-identity string stays non-identity");
        out.entries_mut()[idx] = value;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TripleReport {
    /// `max |F²_AB(H_A + H_B) - F²_A(H_A) - F²_B(H_B)| / (1 + F²_A + F²_B)`
    /// over the sampled tangents.
    pub identity_residual: f64,
    /// [`el_residual`] of the product curve `U(t) ⊗ V(t)` under `F_AB`.
    pub product_residual: f64,
    pub a_residual: f64,
    /// `None` when the `B` curve is constant.
    pub b_residual: Option<f64>,
}

fn check_triple(a: &MetricSpec, b: &MetricSpec, ab: &MetricSpec, na: usize, nb: usize) -> Result<()> {
    if a.family != ab.family || b.family != ab.family {
        return Err(Error::InconsistentPenalties(format!(
            "families {}, {}, {} differ",
            a.family, b.family, ab.family
        )));
    }
    if a.mode != ab.mode || b.mode != ab.mode {
        return Err(Error::InconsistentPenalties("basis modes differ".into()));
    }
    for (side, spec, len) in [("A", a, na), ("B", b, nb)] {
        for w in 0..=len {
            let (pa, pab) = (spec.penalty_value(w), ab.penalty_value(w));
            if (pa - pab).abs() > 1e-12 * pab {
                return Err(Error::InconsistentPenalties(format!(
                    "weight {w}: {side} has {pa}, joint has {pab}"
                )));
            }
        }
    }
    Ok(())
}

/// Check that `(F_A, F_B, F_AB)` is an additive triple along two curves and
/// that their tensor product satisfies the joint geodesic equation.
pub fn additive_triple_check(
    spec_a: &MetricSpec,
    spec_b: &MetricSpec,
    spec_ab: &MetricSpec,
    curve_a: &Curve,
    curve_b: &Curve,
) -> Result<TripleReport> {
    let (na, nb) = (curve_a.n(), curve_b.n());
    check_triple(spec_a, spec_b, spec_ab, na, nb)?;
    if curve_a.samples.len() != curve_b.samples.len()
        || curve_a
            .samples
            .iter()
            .zip(&curve_b.samples)
            .any(|(p, q)| (p.t - q.t).abs() > 1e-12 || p.chart != 0 || q.chart != 0)
    {
        return Err(Error::InvalidArgument(
            "curves must share one time grid and stay in the identity chart".into(),
        ));
    }
    let chart_a = ChartMetric::new(spec_a, na)?;
    let chart_b = ChartMetric::new(spec_b, nb)?;
    let joint = spec_ab.compile(na + nb)?;

    let mut identity_residual = 0.0f64;
    let mut product = Vec::with_capacity(curve_a.samples.len());
    for (p, q) in curve_a.samples.iter().zip(&curve_b.samples) {
        let ha = PauliVector::from_entries(na, spec_a.mode, chart_a.change_matrix(p.x.entries()) * p.y.entries())?;
        let hb = PauliVector::from_entries(nb, spec_b.mode, chart_b.change_matrix(q.x.entries()) * q.y.entries())?;
        let fa = chart_a.local().value(ha.entries())?;
        let fb = chart_b.local().value(hb.entries())?;
        let hab = embed(&ha, nb, true).entries() + embed(&hb, na, false).entries();
        let fab = joint.value(&hab)?;
        let (sa, sb) = (fa * fa, fb * fb);
        identity_residual = identity_residual.max((fab * fab - sa - sb).abs() / (1.0 + sa + sb));

        let x = embed(&p.x, nb, true).entries() + embed(&q.x, na, false).entries();
        let y = embed(&p.y, nb, true).entries() + embed(&q.y, na, false).entries();
        product.push(CurveSample {
            t: p.t,
            x: PauliVector::from_entries(na + nb, spec_ab.mode, x)?,
            y: PauliVector::from_entries(na + nb, spec_ab.mode, y)?,
            speed: (fa * fa + fb * fb).sqrt(),
            chart: 0,
        });
    }
    let product = Curve {
        metric: spec_ab.clone(),
        samples: product,
        anchors: Vec::new(),
    };
    let b_constant = curve_b.samples.iter().all(|s| s.y.is_zero());
    Ok(TripleReport {
        identity_residual,
        product_residual: el_residual(spec_ab, &product)?,
        a_residual: el_residual(spec_a, curve_a)?,
        b_residual: if b_constant {
            None
        } else {
            Some(el_residual(spec_b, curve_b)?)
        },
    })
}

/// A curve that stays at the identity, sampled on `steps + 1` points.
pub fn constant_curve(spec: &MetricSpec, n: usize, t_end: f64, steps: usize) -> Curve {
    let zero = PauliVector::zeros(n, spec.mode);
    Curve {
        metric: spec.clone(),
        samples: (0..=steps)
            .map(|k| CurveSample {
                t: t_end * k as f64 / steps as f64,
                x: zero.clone(),
                y: zero.clone(),
                speed: 0.0,
                chart: 0,
            })
            .collect(),
        anchors: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{self, PenaltyFunction};
    use crate::pauli::{stabilizer_span, BasisMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_pauli(n: usize, scale: f64, r: &mut ChaCha8Rng) -> PauliVector {
        let e = linalg::random_gaussian_vector(BasisMode::SU.dim(n), r);
        let norm = e.norm();
        PauliVector::from_entries(n, BasisMode::SU, e * (scale / norm)).unwrap()
    }

    fn fq_spec() -> MetricSpec {
        MetricSpec::fq(PenaltyFunction::table(vec![1.0, 1.0, 4.0]), BasisMode::SU)
    }

    fn fpd_spec() -> MetricSpec {
        MetricSpec::fp_delta(PenaltyFunction::table(vec![1.0, 1.0, 4.0]), 1e-3, BasisMode::SU)
    }

    fn z_stabilizer_vector() -> PauliVector {
        PauliVector::from_terms(2, BasisMode::SU, [("ZI", 0.4), ("IZ", -0.3), ("ZZ", 0.5)]).unwrap()
    }

    #[test]
    fn metric_at_origin_is_norm() {
        let mut r = rng(1);
        let y = random_pauli(2, 1.0, &mut r);
        let spec = fq_spec();
        let f = metric_in_pauli_coords(&spec, &PauliVector::zeros(2, BasisMode::SU), &y).unwrap();
        assert!((f - metric::norm(&spec, &y).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn metric_homogeneous_and_right_invariant() {
        let mut r = rng(2);
        let spec = fpd_spec();
        let x = random_pauli(2, 1.1, &mut r);
        let y = random_pauli(2, 1.0, &mut r);
        let f1 = metric_in_pauli_coords(&spec, &x, &y).unwrap();
        let f2 = metric_in_pauli_coords(&spec, &x, &y.scaled(2.0)).unwrap();
        assert!((f2 - 2.0 * f1).abs() < 1e-10 * f1);
        // Tangent with Hamiltonian H at any base point has length N(H).
        let h = random_pauli(2, 1.0, &mut r);
        let y = coords::change_coords_backward(&x, &h).unwrap();
        let f = metric_in_pauli_coords(&spec, &x, &y).unwrap();
        assert!((f - metric::norm(&spec, &h).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn commuting_tangent_keeps_norm() {
        let spec = MetricSpec::f2(BasisMode::SU);
        let x = z_stabilizer_vector();
        let y = PauliVector::from_terms(2, BasisMode::SU, [("ZZ", 1.0), ("IZ", 2.0)]).unwrap();
        let f = metric_in_pauli_coords(&spec, &x, &y).unwrap();
        assert!((f - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn tensor_contracts_to_speed_squared() {
        let mut r = rng(3);
        let chart = ChartMetric::new(&fpd_spec(), 2).unwrap();
        let x = random_pauli(2, 0.8, &mut r).into_entries();
        let y = random_pauli(2, 1.0, &mut r).into_entries();
        let g = chart.tensor(&x, &y).unwrap();
        let f = chart.speed(&x, &y).unwrap();
        assert!(((y.transpose() * g * &y)[(0, 0)] - f * f).abs() < 1e-8 * f * f);
    }

    #[test]
    fn christoffel_symmetric_and_matches_spray() {
        let mut r = rng(4);
        let chart = ChartMetric::new(&fq_spec(), 2).unwrap();
        let x = random_pauli(2, 0.7, &mut r).into_entries();
        let y = random_pauli(2, 1.0, &mut r).into_entries();
        let gamma = chart.christoffel(&x, &y).unwrap();
        assert!(gamma.asymmetry() < 1e-6, "{}", gamma.asymmetry());
        let spray = chart.spray(&x, &y).unwrap();
        assert!((gamma.contract(&y) + spray).amax() < 1e-6);
    }

    #[test]
    fn christoffel_vanishes_on_stabilizer_directions() {
        let y = z_stabilizer_vector();
        let gamma = christoffel(&fq_spec(), &PauliVector::zeros(2, BasisMode::SU), &y).unwrap();
        assert!(gamma.contract(y.entries()).amax() < 1e-6);
    }

    #[test]
    fn f2_geodesic_is_straight_line() {
        let mut r = rng(5);
        let y0 = random_pauli(2, 1.0, &mut r);
        let spec = MetricSpec::f2(BasisMode::SU);
        let curve = shoot_geodesic(&spec, &PauliVector::zeros(2, BasisMode::SU), &y0, 1.0, 1000).unwrap();
        let end = curve.samples.last().unwrap();
        assert!((end.x.entries() - y0.entries()).amax() < 1e-6);
        assert!(curve.speed_drift() < 1e-5);
    }

    #[test]
    fn fpdelta_stabilizer_geodesic_is_straight_line() {
        let y0 = z_stabilizer_vector();
        let curve = shoot_geodesic(&fpd_spec(), &PauliVector::zeros(2, BasisMode::SU), &y0, 1.0, 1000).unwrap();
        let end = curve.samples.last().unwrap();
        assert!((end.x.entries() - y0.entries()).amax() < 1e-5);
    }

    #[test]
    fn shot_geodesic_satisfies_euler_lagrange() {
        let mut r = rng(6);
        let spec = fq_spec();
        let x0 = random_pauli(2, 0.3, &mut r);
        let y0 = random_pauli(2, 1.0, &mut r);
        let curve = shoot_geodesic(&spec, &x0, &y0, 0.5, 500).unwrap();
        assert!(curve.speed_drift() < 1e-5);
        let res = el_residual(&spec, &curve).unwrap();
        assert!(res < 1e-4, "{res}");
        let res = el_residual_with(&spec, &curve, LagrangianForm::Unsquared).unwrap();
        assert!(res < 1e-4, "{res}");
    }

    #[test]
    fn reanchoring_preserves_unitary_and_speed() {
        let spec = MetricSpec::f2(BasisMode::SU);
        let y0 = PauliVector::from_terms(1, BasisMode::SU, [("X", 1.0), ("Z", 0.5)]).unwrap();
        let curve = shoot_geodesic(&spec, &PauliVector::zeros(1, BasisMode::SU), &y0, 4.0, 4000).unwrap();
        assert!(!curve.anchors.is_empty());
        let exact = linalg::expm_hermitian(&y0.matrix(), 4.0);
        assert!(linalg::max_abs_diff(&curve.end_unitary(), &exact) < 1e-6);
        assert!(curve.speed_drift() < 1e-5);
        let len = curve_length(&spec, &curve).unwrap();
        assert!((len - 4.0 * 1.25f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn pauli_geodesic_examples() {
        let group = StabilizerSubgroup::z_type(2);
        let zero = PauliVector::zeros(2, BasisMode::SU);
        let u = pauli_geodesic(&group, &zero, 3.0).unwrap();
        assert!(linalg::max_abs_diff(u.matrix(), &linalg::identity(4)) < 1e-15);
        let h = PauliVector::from_terms(2, BasisMode::SU, [("ZZ", 0.3)]).unwrap();
        let curve = pauli_geodesic_curve(&MetricSpec::f1(BasisMode::SU), &group, &h, 1.0, 10).unwrap();
        assert!((curve_length(&MetricSpec::f1(BasisMode::SU), &curve).unwrap() - 0.3).abs() < 1e-12);
        let bad = PauliVector::from_terms(2, BasisMode::SU, [("XZ", 0.3)]).unwrap();
        assert!(matches!(
            pauli_geodesic(&group, &bad, 1.0),
            Err(Error::UnsupportedCoefficient(_))
        ));
    }

    #[test]
    fn long_pauli_geodesic_reaches_target_at_m() {
        let group = StabilizerSubgroup::z_type(2);
        let m = 5.0;
        let h = PauliVector::from_terms(2, BasisMode::SU, [("ZZ", PI / 2.0), ("ZI", 2.0 * PI / m)]).unwrap();
        let target = linalg::expm_hermitian(
            &PauliVector::from_terms(2, BasisMode::SU, [("ZZ", PI / 2.0)]).unwrap().matrix(),
            1.0,
        );
        let u = pauli_geodesic(&group, &h, m).unwrap();
        assert!(linalg::max_abs_diff(u.matrix(), &target) < 1e-12);
        for k in 1..5 {
            let u = pauli_geodesic(&group, &h, k as f64).unwrap();
            assert!(linalg::max_abs_diff(u.matrix(), &target) > 1e-3);
        }
    }

    #[test]
    fn pauli_geodesic_el_residual_small_and_generic_large() {
        let spec = MetricSpec::fp_delta(PenaltyFunction::table(vec![1.0, 1.0, 10.0]), 1e-3, BasisMode::SU);
        let group = stabilizer_span(vec!["ZI".parse().unwrap(), "IZ".parse().unwrap()]).unwrap();
        let curve = pauli_geodesic_curve(&spec, &group, &z_stabilizer_vector(), 1.0, 1000).unwrap();
        let res = el_residual(&spec, &curve).unwrap();
        assert!(res < 1e-4, "{res}");
        let generic = PauliVector::from_terms(
            2,
            BasisMode::SU,
            [("XI", 0.5), ("IY", 0.4), ("ZZ", 0.3), ("XY", 0.2)],
        )
        .unwrap();
        let curve = one_parameter_curve(&spec, &generic, 1.0, 1000).unwrap();
        let res = el_residual(&spec, &curve).unwrap();
        assert!(res > 1e-2, "{res}");
    }

    #[test]
    fn lengths_and_reparameterization() {
        let mut r = rng(7);
        let spec = MetricSpec::f2(BasisMode::SU);
        let h = random_pauli(2, 0.9, &mut r);
        let curve = one_parameter_curve(&spec, &h, 1.0, 200).unwrap();
        let len = curve_length(&spec, &curve).unwrap();
        let hm = h.matrix();
        let expected = ((&hm * &hm).trace().re / 4.0).sqrt();
        assert!((len - expected).abs() < 1e-10);
        // Same path with t = s²: x = h s², y = 2 s h.
        let chart = ChartMetric::new(&spec, 2).unwrap();
        let steps = 400;
        let samples = (0..=steps)
            .map(|k| {
                let s = k as f64 / steps as f64;
                let x = h.scaled(s * s);
                let y = h.scaled(2.0 * s);
                let speed = chart.speed(x.entries(), y.entries()).unwrap();
                CurveSample { t: s, x, y, speed, chart: 0 }
            })
            .collect();
        let re = Curve { metric: spec.clone(), samples, anchors: Vec::new() };
        assert!((curve_length(&spec, &re).unwrap() - len).abs() < 1e-6);
    }

    #[test]
    fn simpson_exact_on_cubics_with_odd_intervals() {
        let t: Vec<f64> = vec![0.0, 0.1, 0.35, 0.5, 0.9, 1.0];
        let f: Vec<f64> = t.iter().map(|v| 1.0 + v * v).collect();
        assert!((simpson(&t, &f) - (1.0 + 1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn additive_triple_fq() {
        let q = PenaltyFunction::table(vec![1.0, 1.0, 3.0]);
        let a = MetricSpec::fq(PenaltyFunction::table(vec![1.0, 1.0]), BasisMode::SU);
        let ab = MetricSpec::fq(q, BasisMode::SU);
        let ya = PauliVector::from_terms(1, BasisMode::SU, [("X", 0.6), ("Z", 0.2)]).unwrap();
        let yb = PauliVector::from_terms(1, BasisMode::SU, [("Y", -0.4), ("Z", 0.5)]).unwrap();
        let zero = PauliVector::zeros(1, BasisMode::SU);
        let ca = shoot_geodesic(&a, &zero, &ya, 0.5, 200).unwrap();
        let cb = shoot_geodesic(&a, &zero, &yb, 0.5, 200).unwrap();
        let report = additive_triple_check(&a, &a, &ab, &ca, &cb).unwrap();
        assert!(report.identity_residual < 1e-10, "{report:?}");
        assert!(report.product_residual < 1e-4, "{report:?}");
        // Ancilla: V constant at the identity.
        let cb = constant_curve(&a, 1, 0.5, 200);
        let report = additive_triple_check(&a, &a, &ab, &ca, &cb).unwrap();
        assert!(report.b_residual.is_none());
        assert!(report.product_residual < 1e-4, "{report:?}");
    }

    #[test]
    fn additive_triple_rejections() {
        let a = MetricSpec::fq(PenaltyFunction::table(vec![1.0, 2.0]), BasisMode::SU);
        let ab = MetricSpec::fq(PenaltyFunction::table(vec![1.0, 1.0, 3.0]), BasisMode::SU);
        let c = constant_curve(&a, 1, 1.0, 4);
        assert!(matches!(
            additive_triple_check(&a, &a, &ab, &c, &c),
            Err(Error::InconsistentPenalties(_))
        ));
    }

    #[test]
    fn f1_triple_is_not_additive() {
        let f1 = MetricSpec::f1(BasisMode::SU);
        let ya = PauliVector::from_terms(1, BasisMode::SU, [("X", 0.6)]).unwrap();
        let yb = PauliVector::from_terms(1, BasisMode::SU, [("Z", 0.5)]).unwrap();
        let ca = one_parameter_curve(&f1, &ya, 0.5, 20).unwrap();
        let cb = one_parameter_curve(&f1, &yb, 0.5, 20).unwrap();
        // (|a| + |b|)² - a² - b² = 2|a||b| = 0.6 at unit speed, relative 0.6/1.61.
        let report = additive_triple_check(&f1, &f1, &f1, &ca, &cb).unwrap();
        assert!(report.identity_residual > 0.3, "{report:?}");
    }

    #[test]
    fn curve_json_round_trip() {
        let spec = MetricSpec::f2(BasisMode::SU);
        let h = PauliVector::from_terms(1, BasisMode::SU, [("X", 2.0)]).unwrap();
        let curve = one_parameter_curve(&spec, &h, 3.0, 30).unwrap();
        assert!(!curve.anchors.is_empty());
        let text = serde_json::to_string(&curve).unwrap();
        let back: Curve = serde_json::from_str(&text).unwrap();
        assert_eq!(back.samples.len(), curve.samples.len());
        assert!(linalg::max_abs_diff(&back.end_unitary(), &curve.end_unitary()) < 1e-12);
    }

    #[test]
    fn step_limit_and_dimension_cap() {
        let y = PauliVector::from_terms(1, BasisMode::SU, [("X", 1.0)]).unwrap();
        let zero = PauliVector::zeros(1, BasisMode::SU);
        let opts = ShootOptions { max_steps: 10, ..ShootOptions::default() };
        assert!(matches!(
            shoot_geodesic_with(&MetricSpec::f2(BasisMode::SU), &zero, &y, 1.0, 11, &opts),
            Err(Error::StepLimitExceeded { .. })
        ));
        let y3 = PauliVector::from_terms(3, BasisMode::SU, [("XII", 1.0)]).unwrap();
        assert!(matches!(
            shoot_geodesic(&MetricSpec::f2(BasisMode::SU), &PauliVector::zeros(3, BasisMode::SU), &y3, 1.0, 10),
            Err(Error::DimensionLimit { .. })
        ));
    }

    #[test]
    fn rk4_is_fourth_order() {
        // Generic Fq geodesic: compare coarse runs against a fine reference.
        let spec = MetricSpec::fq(PenaltyFunction::table(vec![1.0, 3.0]), BasisMode::SU);
        let x0 = PauliVector::from_terms(1, BasisMode::SU, [("X", 0.3)]).unwrap();
        let y0 = PauliVector::from_terms(1, BasisMode::SU, [("X", 0.2), ("Y", 1.0), ("Z", -0.5)]).unwrap();
        let end = |steps| {
            shoot_geodesic(&spec, &x0, &y0, 1.0, steps).unwrap().samples.last().unwrap().x.entries().clone()
        };
        let reference = end(800);
        let e1 = (end(20) - &reference).amax();
        let e2 = (end(40) - &reference).amax();
        let ratio = e1 / e2;
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
    }
}
