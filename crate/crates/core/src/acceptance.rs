// SPDX-License-Identifier: Apache-2.0

//! End-to-end checks with fixed tolerances, shared by the `reproduce`
//! command and the acceptance test target.
//!
//! Every criterion draws from its own `ChaCha8Rng` seeded with
//! `seed_from_u64(seed + id)`, so a single criterion can be rerun alone with
//! identical numbers.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{self, Circuit, CliffordGate, IsometryKind, IsometryMap};
use crate::coords;
use crate::geodesic;
use crate::lattice::{self, DiagonalUnitary};
use crate::linalg::{self, HermitianEigen};
use crate::metric::{self, Family, MetricSpec, PenaltyFunction};
use crate::pauli::{self, stabilizer_span, BasisMode, HermitianOperator, PauliString, PauliVector};
use crate::{Error, Result};

/// One line of the acceptance summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub id: u8,
    pub suite: &'static str,
    pub name: &'static str,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
    pub seconds: f64,
}

impl Row {
    pub fn line(&self) -> String {
        format!(
            "[{}] #{:<2} {:<22} expected {} | observed {} ({:.2}s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.suite,
            self.expected,
            self.observed,
            self.seconds
        )
    }
}

type Check = fn(&mut ChaCha8Rng) -> Result<(String, String, bool)>;

/// `(id, suite, name, check)`.
pub const CRITERIA: [(u8, &str, &str, Check); 11] = [
    (1, "and-cvp", "AND-function minimal Pauli geodesic", and_cvp),
    (2, "long-geodesic", "long Pauli geodesic first passage", long_geodesic),
    (3, "pauli-geodesic-el", "Pauli geodesics solve the geodesic equation", pauli_geodesic_el),
    (4, "f2-straight-line", "F2 geodesics are straight lines", f2_straight_line),
    (5, "gate-bound", "circuit length bounded by gate count", gate_bound),
    (6, "coordinate-change", "closed-form vs BCH coordinate change", coordinate_change),
    (7, "smoothing", "smoothed metric sandwich, Hessian and Euler identities", smoothing),
    (8, "isometry-table", "isometry catalogue", isometry_table),
    (9, "volume-bounds", "volume bounds and Monte Carlo coverage", volume_bounds),
    (10, "f2-distance", "F2 length of one-parameter curves", f2_distance),
    (11, "direct-sum", "additive triples and tensor-product geodesics", direct_sum),
];

pub fn suites() -> impl Iterator<Item = &'static str> {
    CRITERIA.iter().map(|c| c.1)
}

fn run_one(index: usize, seed: u64) -> Row {
    let (id, suite, name, check) = CRITERIA[index];
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(id as u64));
    let start = Instant::now();
    let (expected, observed, pass) = match check(&mut rng) {
        Ok(r) => r,
        Err(e) => ("no error".into(), format!("{}: {e}", e.name()), false),
    };
    Row {
        id,
        suite,
        name,
        expected,
        observed,
        pass,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_criterion(id: u8, seed: u64) -> Result<Row> {
    let index = CRITERIA
        .iter()
        .position(|c| c.0 == id)
        .ok_or_else(|| Error::InvalidArgument(format!("no criterion {id}")))?;
    Ok(run_one(index, seed))
}

/// Run the named suite, or all of them for `"all"`.
pub fn run_suite(suite: &str, seed: u64) -> Result<Vec<Row>> {
    if suite == "all" {
        return Ok(run_all(seed));
    }
    let index = CRITERIA
        .iter()
        .position(|c| c.1 == suite || c.0.to_string() == suite)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {suite:?}")))?;
    Ok(vec![run_one(index, seed)])
}

pub fn run_all(seed: u64) -> Vec<Row> {
    (0..CRITERIA.len()).map(|i| run_one(i, seed)).collect()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `criterion,expected,observed,pass`; timings are left out so the output
/// is reproducible byte for byte.
pub fn to_csv(rows: &[Row]) -> String {
    let mut out = String::from("criterion,suite,expected,observed,pass\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.id,
            r.suite,
            csv_field(&r.expected),
            csv_field(&r.observed),
            r.pass
        ));
    }
    out
}

fn su_vector(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> PauliVector {
    let e = linalg::random_gaussian_vector(BasisMode::SU.dim(n), rng);
    let norm = e.norm();
    PauliVector::from_entries(n, BasisMode::SU, e * (scale / norm)).expect("dimension matches")
}

/// Penalty `(1, 1, k)`: weight-2 strings cost `k` on two qubits.
fn two_qubit_table(k: f64) -> PenaltyFunction {
    PenaltyFunction::table(vec![1.0, 1.0, k])
}

fn and_cvp(_: &mut ChaCha8Rng) -> Result<(String, String, bool)> {
    let mut worst = 0.0f64;
    let mut n3_seconds = 0.0f64;
    for n in [2, 3] {
        for k in [4.0, 16.0, 100.0] {
            let spec = MetricSpec::fp(PenaltyFunction::step(k), BasisMode::U);
            let start = Instant::now();
            let r = lattice::cvp_minimal_pauli_geodesic(&spec, &DiagonalUnitary::and_function(n), 2)?;
            if n == 3 {
                n3_seconds = n3_seconds.max(start.elapsed().as_secs_f64());
            }
            let want = lattice::and_function_length(n, k);
            worst = worst.max(((r.value - want) / want).abs());
        }
    }
    Ok((
        "rel err < 1e-9, n=3 time < 60s".into(),
        format!("max rel err {worst:.2e}, n=3 time {}", if n3_seconds < 60.0 { "< 60s" } else { ">= 60s" }),
        worst < 1e-9 && n3_seconds < 60.0,
    ))
}

fn long_geodesic(_: &mut ChaCha8Rng) -> Result<(String, String, bool)> {
    let group = stabilizer_span(vec!["ZZ".parse()?, "ZI".parse()?])?;
    let target = linalg::expm_hermitian(&PauliVector::from_terms(2, BasisMode::SU, [("ZZ", PI / 2.0)])?.matrix(), 1.0);
    let mut hit = 0.0f64;
    let mut miss = f64::INFINITY;
    for m in [5usize, 9] {
        let h0 = PauliVector::from_terms(2, BasisMode::SU, [("ZZ", PI / 2.0), ("ZI", 2.0 * PI / m as f64)])?;
        hit = hit.max(linalg::max_abs_diff(
            geodesic::pauli_geodesic(&group, &h0, m as f64)?.matrix(),
            &target,
        ));
        for t in 1..m {
            let d = linalg::max_abs_diff(geodesic::pauli_geodesic(&group, &h0, t as f64)?.matrix(), &target);
            miss = miss.min(d);
        }
    }
    Ok((
        "dist < 1e-8 at t=M, > 1e-2 before".into(),
        format!("dist at M {hit:.2e}, min before {miss:.3}"),
        hit < 1e-8 && miss > 1e-2,
    ))
}

/// Two commuting, independent, non-identity strings on two qubits.
fn random_stabilizer(rng: &mut ChaCha8Rng) -> Result<pauli::StabilizerSubgroup> {
    loop {
        let a = PauliString::from_code(2, rng.random_range(1..16));
        let b = PauliString::from_code(2, rng.random_range(1..16));
        if a != b && a.commutes(&b) {
            return stabilizer_span(vec![a, b]);
        }
    }
}

fn pauli_geodesic_el(rng: &mut ChaCha8Rng) -> Result<(String, String, bool)> {
    let specs = [
        MetricSpec::fp_delta(two_qubit_table(4.0), 1e-4, BasisMode::SU),
        MetricSpec::fq(two_qubit_table(4.0), BasisMode::SU),
    ];
    let mut cases = Vec::new();
    for _ in 0..10 {
        let group = random_stabilizer(rng)?;
        let mut h0 = PauliVector::zeros(2, BasisMode::SU);
        for s in group.elements().iter().filter(|s| !s.is_identity()) {
            h0.set(s, rng.random_range(-0.6..0.6))?;
        }
        cases.push((group, h0));
    }
    let worst = cases
        .par_iter()
        .flat_map(|(g, h0)| specs.par_iter().map(move |spec| (g, h0, spec)))
        .map(|(g, h0, spec)| geodesic::el_residual(spec, &geodesic::pauli_geodesic_curve(spec, g, h0, 1.0, 1000)?))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let control_spec = MetricSpec::fq(two_qubit_table(100.0), BasisMode::SU);
    let generic = su_vector(2, 1.0, rng);
    let control = geodesic::el_residual(&control_spec, &geodesic::one_parameter_curve(&control_spec, &generic, 1.0, 1000)?)?;
    Ok((
        "residual < 1e-4, control > 1e-2".into(),
        format!("max residual {worst:.2e}, control {control:.3e}"),
        worst < 1e-4 && control > 1e-2,
    ))
}

fn f2_straight_line(rng: &mut ChaCha8Rng) -> Result<(String, String, bool)> {
    let spec = MetricSpec::f2(BasisMode::SU);
    let mut end_err = 0.0f64;
    let mut drift = 0.0f64;
    for _ in 0..3 {
        let y0 = su_vector(2, rng.random_range(0.5..1.5), rng);
        let curve = geodesic::shoot_geodesic(&spec, &PauliVector::zeros(2, BasisMode::SU), &y0, 1.0, 1000)?;
        let end = curve.samples.last().expect("nonempty curve");
        end_err = end_err.max((end.x.entries() - y0.entries()).amax());
        drift = drift.max(curve.speed_drift() / curve.samples[0].speed);
    }
    Ok((
        "endpoint < 1e-6, speed drift < 1e-6".into(),
        format!("endpoint {end_err:.2e}, drift {drift:.2e}"),
        end_err < 1e-6 && drift < 1e-6,
    ))
}

/// Specs whose gate Hamiltonians all have norm at most one.
pub fn g_bounding_specs() -> Vec<MetricSpec> {
    vec![
        MetricSpec::f1(BasisMode::SU),
        MetricSpec::f2(BasisMode::SU),
        MetricSpec::fp(PenaltyFunction::step(4.0), BasisMode::SU),
        MetricSpec::fq(PenaltyFunction::step(4.0), BasisMode::SU),
    ]
}

fn gate_bound(rng: &mut ChaCha8Rng) -> Result<(String, String, bool)> {
    let circuits: Vec<Circuit> = (0..50).map(|i| Circuit::random(2, 1 + i % 8, rng)).collect();
    let specs = g_bounding_specs();
    let results = circuits
        .par_iter()
        .flat_map(|c| specs.par_iter().map(move |s| (c, s)))
        .map(|(c, s)| {
            let curve = bounds::circuit_to_curve(c, s, 1000)?;
            Ok((curve.endpoint_error, curve.length - curve.gate_count as f64))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let err = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let excess = results.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    Ok((
        "endpoint < 1e-8, length - m <= 1e-6".into(),
        format!("{} curves, endpoint {err:.2e}, max length - m {excess:.3}", results.len()),
        err < 1e-8 && excess <= 1e-6,
    ))
}

fn to3(v: &PauliVector) -> Vector3<f64> {
    Vector3::new(v.entries()[0], v.entries()[1], v.entries()[2])
}

fn coordinate_change(rng: &mut ChaCha8Rng) -> Result<(String, String, bool)> {
    let mut su2 = 0.0f64;
    for _ in 0..1000 {
        let x = su_vector(1, rng.random_range(0.0..PI - 0.1), rng);
        let y = su_vector(1, rng.random_range(0.1..2.0), rng);
        let general = coords::change_coords_forward(&x, &y)?;
        let closed = coords::su2_pauli_to_adapted(&to3(&x), &to3(&y))?;
        su2 = su2.max((to3(&general) - closed).amax());
    }
    let mut series = 0.0f64;
    for n in [1, 2] {
        for _ in 0..10 {
            let x = su_vector(n, 1.0, rng);
            // scale to operator norm in (0, 1]
            let x = x.scaled(rng.random_range(0.05..1.0) / geodesic::spectral_radius(&x));
            let op = x.to_matrix();
            let exact = coords::bch_e(&op);
            let power = coords::bch_e_series(&op, 30);
            let d = 1usize << n;
            let z = crate::CMatrix::from_fn(d, d, |_, _| {
                num_complex::Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            series = series.max(linalg::max_abs_diff(&exact.apply(&z), &power.apply(&z)));
        }
    }
    Ok((
        "SU(2) closed form < 1e-10, series < 1e-10".into(),
        format!("closed form {su2:.2e}, series {series:.2e}"),
        su2 < 1e-10 && series < 1e-10,
    ))
}

fn fd_hessian(local: &metric::LocalNorm, y: &DVector<f64>, h: f64) -> Result<DMatrix<f64>> {
    let d = y.len();
    let mut out = DMatrix::zeros(d, d);
    for k in 0..d {
        let mut plus = y.clone();
        let mut minus = y.clone();
        plus[k] += h;
        minus[k] -= h;
        out.set_column(k, &((local.gradient_sq(&plus)? - local.gradient_sq(&minus)?) / (4.0 * h)));
    }
    Ok(out)
}

fn smoothing(rng: &mut ChaCha8Rng) -> Result<(String, String, bool)> {
    let mut sandwich_violation = 0.0f64;
    let mut min_eig = f64::INFINITY;
    let mut hess_rel = 0.0f64;
    let mut euler = 0.0f64;
    for n in [1, 2] {
        for penalty in [None, Some(two_qubit_table(3.0))] {
            let base = match &penalty {
                None => MetricSpec::f1(BasisMode::SU),
                Some(p) => MetricSpec::fp(p.clone(), BasisMode::SU),
            };
            let p_total = base.compile(n)?.p_total();
            let delta = 1e-4 / p_total;
            let smooth = match &penalty {
                None => MetricSpec::f1_delta(delta, BasisMode::SU),
                Some(p) => MetricSpec::fp_delta(p.clone(), delta, BasisMode::SU),
            };
            let local = smooth.compile(n)?;
            for i in 0..250 {
                let y = su_vector(n, rng.random_range(0.1..3.0), rng);
                let fp = metric::norm(&base, &y)?;
                let fd = metric::norm(&smooth, &y)?;
                let upper = fp / (1.0 - p_total * delta);
                let slack = 1e-12 * fp.max(1.0);
                sandwich_violation = sandwich_violation.max(fp - fd - slack).max(fd - upper - slack);
                if i % 10 == 0 {
                    let h = local.hessian(y.entries())?;
                    min_eig = min_eig.min(linalg::min_eigenvalue(&h));
                    let fd_h = fd_hessian(&local, y.entries(), 1e-6)?;
                    hess_rel = hess_rel.max((&h - fd_h).amax() / h.amax());
                    euler = euler.max(metric::euler_identities_check(&smooth, &y)?.max() / fd.powi(2).max(1.0));
                }
            }
        }
    }
    Ok((
        "sandwich holds, min eig > 0, Hessian FD < 1e-5, Euler < 1e-5".into(),
        format!(
            "sandwich excess {:.1e}, min eig {min_eig:.2e}, Hessian FD {hess_rel:.2e}, Euler {euler:.2e}",
            sandwich_violation.max(0.0)
        ),
        sandwich_violation <= 0.0 && min_eig > 0.0 && hess_rel < 1e-5 && euler < 1e-5,
    ))
}

/// The six families at `n = 2`, penalties `(1, 1, 4)`, `Δ = 1e-4 / P`.
pub fn family_specs() -> Result<Vec<MetricSpec>> {
    let table = two_qubit_table(4.0);
    let p1 = MetricSpec::f1(BasisMode::SU).compile(2)?.p_total();
    let pp = MetricSpec::fp(table.clone(), BasisMode::SU).compile(2)?.p_total();
    Ok(vec![
        MetricSpec::f1(BasisMode::SU),
        MetricSpec::f2(BasisMode::SU),
        MetricSpec::fp(table.clone(), BasisMode::SU),
        MetricSpec::fq(table.clone(), BasisMode::SU),
        MetricSpec::f1_delta(1e-4 / p1, BasisMode::SU),
        MetricSpec::fp_delta(table, 1e-4 / pp, BasisMode::SU),
    ])
}

pub fn sample_map(kind: IsometryKind, n: usize, rng: &mut ChaCha8Rng) -> IsometryMap {
    match kind {
        IsometryKind::Pauli => IsometryMap::PauliConjugation(PauliString::from_code(n, rng.random_range(1..1 << (2 * n)))),
        IsometryKind::ComplexConjugation => IsometryMap::ComplexConjugation,
        IsometryKind::LocalUnitary => IsometryMap::random_local(n, rng),
        IsometryKind::Clifford => IsometryMap::CliffordConjugation(CliffordGate::Cnot { control: 0, target: 1 }),
        IsometryKind::Unitary => IsometryMap::random_unitary(n, rng),
    }
}

fn isometry_table(rng: &mut ChaCha8Rng) -> Result<(String, String, bool)> {
    let specs = family_specs()?;
    let mut worst_applicable = 0.0f64;
    let mut pairs = 0;
    let mut failures = Vec::new();
    for kind in IsometryKind::ALL {
        let map = sample_map(kind, 2, rng);
        for spec in &specs {
            if !kind.applicable(spec.family) {
                continue;
            }
            let r = bounds::isometry_check(&map, spec, 2, 200, rng)?;
            pairs += 1;
            worst_applicable = worst_applicable.max(r.max_deviation);
            if !r.passes() {
                failures.push(format!("{kind}/{}", spec.family));
            }
        }
    }
    let fq4 = MetricSpec::fq(two_qubit_table(4.0), BasisMode::SU);
    let cnot = bounds::isometry_check(&sample_map(IsometryKind::Clifford, 2, rng), &fq4, 2, 200, rng)?;
    let generic = bounds::isometry_check(
        &sample_map(IsometryKind::Unitary, 2, rng),
        &MetricSpec::f1(BasisMode::SU),
        2,
        200,
        rng,
    )?;
    let counterexamples = cnot.counterexample.is_some() && generic.counterexample.is_some();
    Ok((
        "applicable pairs < 1e-10; counterexamples for cnot/Fq and unitary/F1".into(),
        format!(
            "{pairs} pairs, max dev {worst_applicable:.2e}{}; cnot/Fq dev {:.3}, unitary/F1 dev {:.3}",
            if failures.is_empty() { String::new() } else { format!(" (failing {})", failures.join(" ")) },
            cnot.max_deviation,
            generic.max_deviation
        ),
        failures.is_empty() && worst_applicable < 1e-10 && counterexamples,
    ))
}

fn volume_bounds(rng: &mut ChaCha8Rng) -> Result<(String, String, bool)> {
    let f2 = MetricSpec::f2(BasisMode::U);
    let target = (2.0 * PI / std::f64::consts::E).sqrt();
    let mut stirling_ok = true;
    let mut ratios = Vec::new();
    for n in 1..=3 {
        let d = (1usize << n) as f64;
        let r = lattice::coverage_bound(&f2, 1.0, n)?;
        // (d/2)! = √(πd) (d/2e)^{d/2} e^ε with 0 < ε < 1/(6d)
        let ratio = r / target / (PI * d).powf(0.5 / d);
        stirling_ok &= (1.0..=(1.0 / (6.0 * d * d)).exp()).contains(&ratio);
        ratios.push(format!("{r:.4}"));
    }
    let mut mc_ok = true;
    let mut mc = Vec::new();
    for (spec, r) in [(MetricSpec::f1(BasisMode::U), PI / 2.0), (f2.clone(), 1.5)] {
        let est = lattice::monte_carlo_coverage(&spec, r, 1, 10_000, rng)?;
        let (lhs, rhs) = est.volume_inequality(&spec, r, 1)?;
        mc_ok &= lhs <= rhs;
        mc.push(format!("{}: f={:.4} ({lhs:.3} <= {rhs:.3})", spec.family, est.fraction));
    }
    Ok((
        format!("F2 r = √(2π/e)={target:.4} up to Stirling factor; f det M <= V(r) at 3σ"),
        format!("r(n=1..3) = {}; {}", ratios.join(" "), mc.join("; ")),
        stirling_ok && mc_ok,
    ))
}

fn f2_distance(rng: &mut ChaCha8Rng) -> Result<(String, String, bool)> {
    let spec = MetricSpec::f2(BasisMode::SU);
    let mut err = 0.0f64;
    for n in [1, 2] {
        for _ in 0..4 {
            let h = su_vector(n, rng.random_range(0.3..1.5), rng);
            let curve = geodesic::one_parameter_curve(&spec, &h, 1.0, 400)?;
            let len = geodesic::curve_length(&spec, &curve)?;
            let hm = h.matrix();
            let want = ((&hm * &hm).trace().re / (1usize << n) as f64).sqrt();
            err = err.max((len - want).abs());
        }
    }
    let f2u = MetricSpec::f2(BasisMode::U);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let w = linalg::random_unitary(4, rng);
        let eig: Vec<f64> = (0..4).map(|_| rng.random_range(-5.0..5.0f64).clamp(-PI, PI)).collect();
        let d = DVector::from_iterator(4, eig.iter().map(|&e| linalg::c(e)));
        let h = &w * crate::CMatrix::from_diagonal(&d) * w.adjoint();
        let h = (&h + h.adjoint()) * linalg::c(0.5);
        debug_assert!(HermitianEigen::new(&h).spectral_radius() <= PI + 1e-12);
        let y = pauli::project_to_pauli(&HermitianOperator::new(2, h)?, BasisMode::U)?;
        worst = worst.max(metric::norm(&f2u, &y)?);
    }
    Ok((
        "length = sqrt(tr H²/2^n) < 1e-8; clamped spectrum length <= π".into(),
        format!("max error {err:.2e}; max clamped length {worst:.4}"),
        err < 1e-8 && worst <= PI + 1e-12,
    ))
}

fn direct_sum(rng: &mut ChaCha8Rng) -> Result<(String, String, bool)> {
    let a = MetricSpec::fq(PenaltyFunction::table(vec![1.0, 1.0]), BasisMode::SU);
    let ab = MetricSpec::fq(two_qubit_table(3.0), BasisMode::SU);
    let zero = PauliVector::zeros(1, BasisMode::SU);
    let mut identity = 0.0f64;
    let mut product = 0.0f64;
    for _ in 0..3 {
        let ya = su_vector(1, rng.random_range(0.3..1.0), rng);
        let yb = su_vector(1, rng.random_range(0.3..1.0), rng);
        let ca = geodesic::shoot_geodesic(&a, &zero, &ya, 0.5, 200)?;
        let cb = geodesic::shoot_geodesic(&a, &zero, &yb, 0.5, 200)?;
        let report = geodesic::additive_triple_check(&a, &a, &ab, &ca, &cb)?;
        identity = identity.max(report.identity_residual);
        product = product.max(report.product_residual);
    }
    // additive identity on unrelated random Hamiltonians as well
    let (la, lab) = (a.compile(1)?, ab.compile(2)?);
    for _ in 0..100 {
        let ha = su_vector(1, rng.random_range(0.1..3.0), rng);
        let hb = su_vector(1, rng.random_range(0.1..3.0), rng);
        let joint = geodesic::embed(&ha, 1, true).entries() + geodesic::embed(&hb, 1, false).entries();
        let fa = la.value(ha.entries())?.powi(2);
        let fb = la.value(hb.entries())?.powi(2);
        let fab = lab.value(&joint)?.powi(2);
        identity = identity.max((fab - fa - fb).abs() / (1.0 + fa + fb));
    }
    Ok((
        "identity < 1e-10, product residual < 1e-4".into(),
        format!("identity {identity:.2e}, product residual {product:.2e}"),
        identity < 1e-10 && product < 1e-4,
    ))
}

/// Families whose isometry check is expected to pass for each map kind.
pub fn applicability_table() -> Vec<(IsometryKind, Family, bool)> {
    IsometryKind::ALL
        .into_iter()
        .flat_map(|k| Family::ALL.into_iter().map(move |f| (k, f, k.applicable(f))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_are_unique_and_named() {
        let names: Vec<_> = suites().collect();
        let mut dedup = names.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(names.len(), dedup.len());
        assert!(run_suite("nope", 1).is_err());
        assert!(run_criterion(12, 1).is_err());
    }

    #[test]
    fn csv_quotes_commas() {
        let row = Row {
            id: 1,
            suite: "x",
            name: "y",
            expected: "a, b".into(),
            observed: "c".into(),
            pass: true,
            seconds: 0.0,
        };
        let csv = to_csv(&[row]);
        assert!(csv.ends_with("1,x,\"a, b\",c,true\n"));
    }

    #[test]
    fn cheap_criteria_pass() {
        for id in [2, 10] {
            let row = run_criterion(id, 7).unwrap();
            assert!(row.pass, "{}", row.line());
        }
    }

    #[test]
    fn table_matches_catalogue() {
        let t = applicability_table();
        assert_eq!(t.len(), 30);
        assert!(t.contains(&(IsometryKind::Clifford, Family::F1Delta, true)));
        assert!(t.contains(&(IsometryKind::Clifford, Family::Fq, false)));
        assert!(t.contains(&(IsometryKind::Unitary, Family::F1, false)));
    }
}
