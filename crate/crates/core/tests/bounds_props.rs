// SPDX-License-Identifier: Apache-2.0

use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sugeo_core::bounds::{self, Circuit, CliffordGate, IsometryKind, IsometryMap};
use sugeo_core::metric::{self, Family, MetricSpec, PenaltyFunction};
use sugeo_core::pauli::{BasisMode, PauliString, PauliVector, StabilizerSubgroup};

fn g_bounding_specs() -> Vec<MetricSpec> {
    let pen = PenaltyFunction::table(vec![1.0, 1.0, 1.0]);
    vec![
        MetricSpec::f1(BasisMode::SU),
        MetricSpec::f2(BasisMode::SU),
        MetricSpec::fp(pen.clone(), BasisMode::SU),
        MetricSpec::fq(pen, BasisMode::SU),
    ]
}

fn all_specs() -> Vec<MetricSpec> {
    let pen = PenaltyFunction::table(vec![1.0, 1.0, 4.0]);
    vec![
        MetricSpec::f1(BasisMode::SU),
        MetricSpec::f2(BasisMode::SU),
        MetricSpec::fp(pen.clone(), BasisMode::SU),
        MetricSpec::fq(pen.clone(), BasisMode::SU),
        MetricSpec::f1_delta(1e-4 / 15.0, BasisMode::SU),
        MetricSpec::fp_delta(pen, 1e-4 / 36.0, BasisMode::SU),
    ]
}

fn vector(n: usize) -> impl Strategy<Value = PauliVector> {
    prop::collection::vec(-2.0f64..2.0, BasisMode::SU.dim(n))
        .prop_map(move |e| PauliVector::from_entries(n, BasisMode::SU, DVector::from_vec(e)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn circuit_curve_length_bounded_by_gate_count(seed in any::<u64>(), m in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let circuit = Circuit::random(2, m, &mut rng);
        for spec in g_bounding_specs() {
            let curve = bounds::circuit_to_curve(&circuit, &spec, 200).unwrap();
            prop_assert!(curve.endpoint_error < 1e-8, "{} {}", spec.family, curve.endpoint_error);
            prop_assert!(curve.bound_holds(1e-6), "{} {} > {m}", spec.family, curve.length);
            prop_assert!(curve.length <= curve.gate_norm_sum + 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pauli_conjugation_preserves_every_metric(code in 1usize..16, h in vector(2)) {
        let map = IsometryMap::PauliConjugation(PauliString::from_code(2, code));
        let moved = map.push(&h).unwrap();
        for spec in all_specs() {
            let (a, b) = (metric::norm(&spec, &h).unwrap(), metric::norm(&spec, &moved).unwrap());
            prop_assert!((a - b).abs() < 1e-10 * a.max(1.0), "{}", spec.family);
        }
    }

    #[test]
    fn complex_conjugation_preserves_every_metric(h in vector(2)) {
        let moved = IsometryMap::ComplexConjugation.push(&h).unwrap();
        for spec in all_specs() {
            let (a, b) = (metric::norm(&spec, &h).unwrap(), metric::norm(&spec, &moved).unwrap());
            prop_assert!((a - b).abs() < 1e-10 * a.max(1.0), "{}", spec.family);
        }
    }

    #[test]
    fn clifford_preserves_f1_and_f2(h in vector(2), which in 0usize..4) {
        let gate = [
            CliffordGate::Cnot { control: 0, target: 1 },
            CliffordGate::Cz { a: 0, b: 1 },
            CliffordGate::Hadamard { qubit: 1 },
            CliffordGate::Phase { qubit: 0 },
        ][which];
        let moved = IsometryMap::CliffordConjugation(gate).push(&h).unwrap();
        for spec in [MetricSpec::f1(BasisMode::SU), MetricSpec::f2(BasisMode::SU)] {
            let (a, b) = (metric::norm(&spec, &h).unwrap(), metric::norm(&spec, &moved).unwrap());
            prop_assert!((a - b).abs() < 1e-10 * a.max(1.0));
        }
    }

    #[test]
    fn stabilizer_fixed_points(coeffs in prop::collection::vec(-2.0f64..2.0, 3), sigma in 0usize..4) {
        let group = StabilizerSubgroup::z_type(2);
        let mut h = PauliVector::zeros(2, BasisMode::SU);
        for (s, c) in group.elements().iter().filter(|s| !s.is_identity()).zip(&coeffs) {
            h.set(s, *c).unwrap();
        }
        let sigma = PauliString::z_type(2, sigma);
        let dev = bounds::fixed_point_deviation(&sigma, &h, &[0.1, 0.7, 2.3, 9.0]).unwrap();
        prop_assert!(dev < 1e-12);
    }
}

#[test]
fn applicability_table_is_seed_independent() {
    for seed in [1u64, 2, 3] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for spec in all_specs() {
            for kind in IsometryKind::ALL {
                let map = match kind {
                    IsometryKind::Pauli => IsometryMap::PauliConjugation("XZ".parse().unwrap()),
                    IsometryKind::ComplexConjugation => IsometryMap::ComplexConjugation,
                    IsometryKind::LocalUnitary => IsometryMap::random_local(2, &mut rng),
                    IsometryKind::Clifford => IsometryMap::CliffordConjugation(CliffordGate::Cnot { control: 0, target: 1 }),
                    IsometryKind::Unitary => IsometryMap::random_unitary(2, &mut rng),
                };
                let report = bounds::isometry_check(&map, &spec, 2, 40, &mut rng).unwrap();
                assert!(report.passes(), "{kind} on {} deviates {}", spec.family, report.max_deviation);
            }
        }
    }
}

#[test]
fn expected_counterexamples_exist() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let fq = MetricSpec::fq(PenaltyFunction::table(vec![1.0, 1.0, 4.0]), BasisMode::SU);
    let cnot = IsometryMap::CliffordConjugation(CliffordGate::Cnot { control: 0, target: 1 });
    let r = bounds::isometry_check(&cnot, &fq, 2, 50, &mut rng).unwrap();
    assert!(!r.applicable && r.counterexample.is_some());
    let f1 = MetricSpec::f1(BasisMode::SU);
    let r = bounds::isometry_check(&IsometryMap::random_unitary(2, &mut rng), &f1, 2, 50, &mut rng).unwrap();
    assert_eq!(r.family, Family::F1);
    assert!(!r.applicable && r.counterexample.is_some());
}
