use std::f64::consts::PI;

use hhllab_core::linalg::{c64, ComplexMatrix};
use hhllab_core::qpe::{build_inverse_qpe, build_iqft, build_qft, build_qpe, QpeSpec};
use hhllab_core::statevector::{run_from, run_ideal, state_fidelity};
use hhllab_core::{circuit_unitary, StateVector};
use proptest::prelude::*;

fn dft(n: usize) -> ComplexMatrix {
    let dim = 1usize << n;
    let norm = (dim as f64).sqrt().recip();
    let entries = (0..dim * dim)
        .map(|i| {
            let (k, j) = (i / dim, i % dim);
            let angle = 2.0 * PI * (j * k) as f64 / dim as f64;
            c64(angle.cos() * norm, angle.sin() * norm)
        })
        .collect();
    ComplexMatrix::from_vec(dim, dim, entries).unwrap()
}

fn phase_gate(theta: f64) -> ComplexMatrix {
    let (s, c) = (2.0 * PI * theta).sin_cos();
    ComplexMatrix::from_rows(&[[c64(c, s), c64(0.0, 0.0)], [c64(0.0, 0.0), c64(1.0, 0.0)]])
}

/// Clock distribution after QPE on `|0⟩`, the `e^{2πiθ}` eigenvector of `phase_gate`.
fn readout(n: usize, theta: f64) -> Vec<f64> {
    let spec = QpeSpec::from_unitary(n, &phase_gate(theta)).unwrap();
    let (state, _) = run_ideal(&build_qpe(&spec).unwrap()).unwrap();
    let clock: Vec<usize> = (0..n).rev().collect();
    state.marginal(&clock)
}

fn random_state(num_qubits: usize, raw: &[(f64, f64)]) -> StateVector {
    let amps: Vec<_> = raw.iter().map(|&(re, im)| c64(re, im)).collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|z| z / norm).collect())
        .unwrap_or_else(|_| panic!("{num_qubits}-qubit state did not normalize"))
}

#[test]
fn qft_matches_dft() {
    for n in 1..=5 {
        let u = circuit_unitary(&build_qft(n)).unwrap();
        assert!(u.max_abs_diff(&dft(n)) <= 1e-11, "n = {n}");
        let v = circuit_unitary(&build_iqft(n)).unwrap();
        assert!(u.matmul(&v).max_abs_diff(&ComplexMatrix::identity(1 << n)) <= 1e-11);
        assert!(v.max_abs_diff(&dft(n).adjoint()) <= 1e-11);
    }
}

#[test]
fn exact_phases_read_exactly() {
    for n in 1..=4 {
        for k in 0..1usize << n {
            let p = readout(n, k as f64 / (1u64 << n) as f64);
            assert!(p[k] >= 1.0 - 1e-9, "n = {n}, k = {k}, p = {}", p[k]);
        }
    }
}

#[test]
fn three_eighths() {
    let p = readout(3, 3.0 / 8.0);
    assert!((p[3] - 1.0).abs() < 1e-12);
}

#[test]
fn non_representable_phase_peaks_at_nearest() {
    // 0.3 · 8 = 2.4, nearest integer 2.
    let p = readout(3, 0.3);
    let best = (0..8).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
    assert_eq!(best, 2);
    assert!(p[2] >= 4.0 / (PI * PI));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn nearest_estimate_beats_bound(n in 1usize..=4, theta in 0.0..1.0f64) {
        let p = readout(n, theta);
        let scaled = theta * (1u64 << n) as f64;
        let nearest = scaled.round() as usize % (1 << n);
        prop_assert!(p[nearest] >= 4.0 / (PI * PI) - 1e-12);
    }

    #[test]
    fn inverse_undoes_qpe(
        n in 1usize..=3,
        theta in 0.0..1.0f64,
        raw in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 16),
    ) {
        let spec = QpeSpec::from_unitary(n, &phase_gate(theta)).unwrap();
        let mut c = build_qpe(&spec).unwrap();
        c.extend(&build_inverse_qpe(&spec).unwrap()).unwrap();
        let width = n + 1;
        let start = random_state(width, &raw[..1 << width]);
        let end = run_from(&c, start.clone(), 0).unwrap().state;
        prop_assert!(state_fidelity(&start, &end).unwrap() >= 1.0 - 1e-9);
    }
}
