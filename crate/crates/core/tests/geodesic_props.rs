// SPDX-License-Identifier: Apache-2.0

use nalgebra::DVector;
use proptest::prelude::*;

use sugeo_core::coords;
use sugeo_core::geodesic::{self, ChartMetric};
use sugeo_core::linalg::{self, c, I};
use sugeo_core::metric::{self, MetricSpec, PenaltyFunction};
use sugeo_core::pauli::{self, BasisMode, HermitianOperator, PauliVector};

const N: usize = 2;

fn smooth_specs() -> Vec<MetricSpec> {
    let pen = PenaltyFunction::table(vec![1.0, 1.0, 4.0]);
    vec![
        MetricSpec::f2(BasisMode::SU),
        MetricSpec::fq(pen.clone(), BasisMode::SU),
        MetricSpec::f1_delta(1e-3 / 15.0, BasisMode::SU),
        MetricSpec::fp_delta(pen, 1e-3 / 36.0, BasisMode::SU),
    ]
}

/// Points inside the chart: spectral radius at most `r`.
fn point(r: f64) -> impl Strategy<Value = PauliVector> {
    prop::collection::vec(-1.0f64..1.0, BasisMode::SU.dim(N)).prop_map(move |e| {
        let v = PauliVector::from_entries(N, BasisMode::SU, DVector::from_vec(e)).unwrap();
        let rho = geodesic::spectral_radius(&v);
        if rho > r {
            v.scaled(r / rho)
        } else {
            v
        }
    })
}

fn tangent() -> impl Strategy<Value = PauliVector> {
    prop::collection::vec(-1.0f64..1.0, BasisMode::SU.dim(N))
        .prop_map(|e| PauliVector::from_entries(N, BasisMode::SU, DVector::from_vec(e)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn tensor_contracts_to_squared_speed(x in point(2.0), y in tangent()) {
        prop_assume!(y.entries().amax() > 1e-2);
        for spec in smooth_specs() {
            let chart = ChartMetric::new(&spec, N).unwrap();
            let g = chart.tensor(x.entries(), y.entries()).unwrap();
            let f = chart.speed(x.entries(), y.entries()).unwrap();
            let gyy = (y.entries().transpose() * &g * y.entries())[(0, 0)];
            prop_assert!((gyy - f * f).abs() <= 1e-8 * (f * f).max(1.0), "{}", spec.family);
        }
    }

    /// The chart speed equals the norm of the Hamiltonian `i U̇ U†` obtained
    /// by differentiating `exp(-i (x + t y)·σ)` numerically.
    #[test]
    fn chart_speed_is_right_invariant(x in point(2.0), y in tangent()) {
        let h = 1e-6;
        let u = |t: f64| linalg::expm_hermitian(&x.with_entries(x.entries() + y.entries() * t).matrix(), 1.0);
        let du = (u(h) - u(-h)) * c(0.5 / h);
        let ham = (du * u(0.0).adjoint()) * I;
        let ham = (&ham + ham.adjoint()) * c(0.5);
        // Finite differencing leaves a trace of order 1e-10.
        let ham = &ham - linalg::identity(1 << N) * (ham.trace() / c((1 << N) as f64));
        let hv = pauli::project_to_pauli(&HermitianOperator::new(N, ham).unwrap(), BasisMode::SU).unwrap();
        for spec in smooth_specs().into_iter().chain([MetricSpec::f1(BasisMode::SU)]) {
            let chart = geodesic::metric_in_pauli_coords(&spec, &x, &y).unwrap();
            let direct = metric::norm(&spec, &hv).unwrap();
            prop_assert!((chart - direct).abs() < 1e-7 * direct.max(1.0), "{} {chart} {direct}", spec.family);
        }
    }

    #[test]
    fn coordinate_change_round_trip(x in point(2.5), y in tangent()) {
        let ya = coords::change_coords_forward(&x, &y).unwrap();
        let back = coords::change_coords_backward(&x, &ya).unwrap();
        prop_assert!((back.entries() - y.entries()).amax() < 1e-9);
    }

    #[test]
    fn f2_geodesics_keep_constant_speed(x in point(0.5), y in tangent()) {
        prop_assume!(y.entries().amax() > 1e-2);
        let spec = MetricSpec::f2(BasisMode::SU);
        let curve = geodesic::shoot_geodesic(&spec, &x, &y, 0.5, 200).unwrap();
        let speed = curve.samples[0].speed;
        prop_assert!(curve.speed_drift() < 1e-6 * speed.max(1.0));
        prop_assert!(geodesic::el_residual(&spec, &curve).unwrap() < 1e-4);
    }
}

#[test]
fn rk4_error_drops_sixteenfold_on_step_halving() {
    let spec = MetricSpec::f2(BasisMode::SU);
    let x0 = PauliVector::from_terms(N, BasisMode::SU, [("XY", 0.3), ("ZI", -0.2)]).unwrap();
    let y0 = PauliVector::from_terms(N, BasisMode::SU, [("IZ", 0.8), ("XX", 0.5)]).unwrap();
    let reference = geodesic::shoot_geodesic(&spec, &x0, &y0, 1.0, 640).unwrap().end_unitary();
    let err = |steps: usize| {
        let u = geodesic::shoot_geodesic(&spec, &x0, &y0, 1.0, steps).unwrap().end_unitary();
        linalg::max_abs_diff(&u, &reference)
    };
    let (coarse, fine) = (err(10), err(20));
    let ratio = coarse / fine;
    assert!((10.0..24.0).contains(&ratio), "ratio {ratio} ({coarse:.3e} / {fine:.3e})");
}
