//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hhllab_core::complexity::{crossover_table, measured_ops};
use hhllab_core::hhl::{
    build_hhl_circuit, preprocess_with, random_exact_instance, run_hhl, verify_solution, Overrides,
};
use hhllab_core::linalg::{c64, gaussian_elimination, ComplexMatrix, ComplexVector};
use hhllab_core::noise::{apply_readout_error, linear_grid, noise_sweep, run_noisy, SweepMode};
use hhllab_core::qpe::{build_iqft, build_qft, build_qpe, QpeSpec};
use hhllab_core::statevector::run_ideal;
use hhllab_core::{
    circuit_unitary, gate_matrix, Circuit, HhlProblem, NoiseModel, RunMode, StateVector,
};
use num_complex::Complex64;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(
        elapsed.as_secs_f64() < limit_s,
        format!("took {:.3} s, limit {limit_s} s", elapsed.as_secs_f64()),
    )
}

/// `max_i |a_i − e^{iφ} e_i|` for the best global phase `φ`.
fn phase_free_diff(actual: &[Complex64], expected: &[Complex64]) -> f64 {
    let overlap: Complex64 = expected.iter().zip(actual).map(|(e, a)| e.conj() * a).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        c64(1.0, 0.0)
    };
    actual
        .iter()
        .zip(expected)
        .map(|(a, e)| (a - phase * e).norm())
        .fold(0.0, f64::max)
}

/// `b`-register amplitudes with ancilla 1 and clock 0, for the 4-qubit worked example.
fn postselected_b(s: &StateVector) -> [Complex64; 2] {
    let a = s.amplitudes();
    [a[0b0001], a[0b1001]]
}

fn worked_example_direction() -> Check {
    let start = Instant::now();
    let p = HhlProblem::worked_example();
    let r = run_hhl(&p, &RunMode::Statevector).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let target = [
        c64(-10f64.sqrt() / 10.0, 0.0),
        c64(3.0 * 10f64.sqrt() / 10.0, 0.0),
    ];
    let norm: f64 = target.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let target = ComplexVector::new(target.iter().map(|z| z / norm).collect());
    let fidelity = r.direction.inner(&target).norm_sqr();
    ensure(
        fidelity >= 1.0 - 1e-9,
        format!("direction fidelity {fidelity}"),
    )?;

    let phi9 = r
        .snapshots
        .as_ref()
        .and_then(|s| s.get("phi9"))
        .ok_or("no phi9 snapshot")?;
    let reg = postselected_b(phi9);
    let reg = ComplexVector::new(reg.to_vec());
    let f9 = reg.inner(&target).norm_sqr() / reg.norm_sqr();
    ensure(f9 >= 1.0 - 1e-9, format!("phi9 fidelity {f9}"))?;
    within(elapsed, 1.0)?;
    Ok(format!("fidelity {:.3e} from 1", 1.0 - fidelity.min(f9)))
}

fn solution_recovery() -> Check {
    let p = HhlProblem::worked_example();
    let r = run_hhl(&p, &RunMode::Statevector).map_err(|e| e.to_string())?;
    let x = r.rescaled_solution.clone().ok_or("no rescaled solution")?;
    let diff = x.max_abs_diff(&ComplexVector::from_real(&[-0.25, 0.75]));
    ensure(diff <= 1e-9, format!("x = {:?}", x.as_slice()))?;
    let v = verify_solution(&p, &r).map_err(|e| e.to_string())?;
    let residual = v.residual.ok_or("no residual")?;
    ensure(residual <= 1e-9, format!("residual {residual}"))?;
    Ok(format!("max error {diff:.1e}, residual {residual:.1e}"))
}

fn ratio_reproduction() -> Check {
    let start = Instant::now();
    let p = HhlProblem::worked_example();
    let exact = run_hhl(&p, &RunMode::Statevector).map_err(|e| e.to_string())?;
    let ratio = exact.ratio_11_01.ok_or("no ratio")?;
    ensure(
        (ratio - 9.0).abs() <= 1e-9,
        format!("statevector ratio {ratio}"),
    )?;
    let shots = run_hhl(
        &p,
        &RunMode::Shots {
            shots: 4096,
            seed: 42,
        },
    )
    .map_err(|e| e.to_string())?;
    let h = shots.histogram.as_ref().ok_or("no histogram")?;
    let (n11, n01) = (h.count("11"), h.count("01"));
    let sampled = n11 as f64 / n01 as f64;
    ensure(
        (7.5..=10.5).contains(&sampled),
        format!("sampled ratio {sampled}"),
    )?;
    within(start.elapsed(), 5.0)?;
    Ok(format!(
        "exact {ratio:.12}, sampled {n11}/{n01} = {sampled:.3}"
    ))
}

fn intermediate_states() -> Check {
    let p = HhlProblem::worked_example();
    let (_, snaps) =
        run_ideal(&build_hhl_circuit(&p).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    // Layout: ancilla bit 0, clock bits 1–2, b bit 3. Eigenpairs of A: 1 ↔ u1, 2 ↔ u2.
    let h = FRAC_1_SQRT_2;
    let u1 = [c64(h, 0.0), c64(-h, 0.0)];
    let u2 = [c64(h, 0.0), c64(h, 0.0)];
    let index = |clock: usize, b: usize| (clock << 1) | (b << 3);
    let mut phi2 = vec![c64(0.0, 0.0); 16];
    let mut phi3 = phi2.clone();
    let mut phi4 = phi2.clone();
    for clock in 0..4 {
        phi2[index(clock, 1)] = c64(0.5, 0.0);
        // U^c |b⟩ with |b⟩ = (u2 − u1)/√2 and U = e^{iAπ/2}.
        let e1 = Complex64::from_polar(1.0, PI / 2.0 * clock as f64);
        let e2 = Complex64::from_polar(1.0, PI * clock as f64);
        for b in 0..2 {
            phi3[index(clock, b)] = 0.5 * h * (e2 * u2[b] - e1 * u1[b]);
        }
    }
    for b in 0..2 {
        phi4[index(1, b)] = -h * u1[b];
        phi4[index(2, b)] = h * u2[b];
    }
    let mut worst = 0.0f64;
    for (label, expected) in [("phi2", phi2), ("phi3", phi3), ("phi4", phi4)] {
        let s = snaps.get(label).ok_or(format!("no {label} snapshot"))?;
        let d = phase_free_diff(s.amplitudes(), &expected);
        ensure(d <= 1e-9, format!("{label} differs by {d}"))?;
        worst = worst.max(d);
    }
    Ok(format!("worst deviation {worst:.1e}"))
}

fn dft(n: usize) -> ComplexMatrix {
    let dim = 1usize << n;
    let entries = (0..dim * dim)
        .map(|i| {
            Complex64::from_polar(
                (dim as f64).sqrt().recip(),
                2.0 * PI * ((i / dim) * (i % dim)) as f64 / dim as f64,
            )
        })
        .collect();
    ComplexMatrix::from_vec(dim, dim, entries).expect("square")
}

fn qft_correctness() -> Check {
    let mut worst = 0.0f64;
    for n in 1..=5 {
        let q = circuit_unitary(&build_qft(n)).map_err(|e| e.to_string())?;
        let qi = circuit_unitary(&build_iqft(n)).map_err(|e| e.to_string())?;
        let d = q.max_abs_diff(&dft(n));
        let i = q.matmul(&qi).max_abs_diff(&ComplexMatrix::identity(1 << n));
        let j = q
            .matmul(&q.adjoint())
            .max_abs_diff(&ComplexMatrix::identity(1 << n));
        ensure(
            d <= 1e-11 && i <= 1e-11 && j <= 1e-11,
            format!("n = {n}: dft {d}, inverse {i}"),
        )?;
        worst = worst.max(d).max(i).max(j);
    }
    Ok(format!("worst deviation {worst:.1e}"))
}

fn qpe_exactness() -> Check {
    let mut worst = 1.0f64;
    let mut cases = 0;
    for n in 1..=4usize {
        for k in 0..1usize << n {
            let theta = k as f64 / (1u64 << n) as f64;
            let zero = c64(0.0, 0.0);
            let u = ComplexMatrix::from_rows(&[
                [Complex64::from_polar(1.0, 2.0 * PI * theta), zero],
                [zero, c64(1.0, 0.0)],
            ]);
            let spec = QpeSpec::from_unitary(n, &u).map_err(|e| e.to_string())?;
            let (s, _) = run_ideal(&build_qpe(&spec).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let clock: Vec<usize> = (0..n).rev().collect();
            let pk = s.marginal(&clock)[k];
            ensure(pk >= 1.0 - 1e-9, format!("n = {n}, k = {k}: p = {pk}"))?;
            worst = worst.min(pk);
            cases += 1;
        }
    }
    Ok(format!("{cases} phases, min probability {worst:.12}"))
}

fn randomized_oracle() -> Check {
    let start = Instant::now();
    let n_clock = 3;
    let ov = Overrides {
        n_clock: Some(n_clock),
        t: Some(2.0 * PI / 8.0),
        c: Some(1.0),
    };
    let mut worst_cos = 1.0f64;
    let mut worst_p = 0.0f64;
    for seed in 0..100u64 {
        let dim = if seed % 2 == 0 { 2 } else { 4 };
        let inst = random_exact_instance(dim, n_clock, 1000 + seed);
        let p = preprocess_with(&inst.a, &inst.b, &ov).map_err(|e| e.to_string())?;
        let r = run_hhl(&p, &RunMode::Statevector).map_err(|e| e.to_string())?;
        let x = gaussian_elimination(&inst.a, &inst.b)
            .map_err(|e| e.to_string())?
            .solution;
        let cos = r.direction.inner(&x).norm() / x.norm();
        let oracle: f64 = inst
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(j, l)| (inst.eigenvectors.column(j).inner(&inst.b).norm() / l).powi(2))
            .sum();
        let dp = (r.success_probability - oracle).abs();
        ensure(cos >= 0.999, format!("seed {seed}: cosine {cos}"))?;
        ensure(
            dp <= 1e-9,
            format!("seed {seed}: success probability off by {dp}"),
        )?;
        worst_cos = worst_cos.min(cos);
        worst_p = worst_p.max(dp);
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!(
        "min cosine {worst_cos:.12}, max probability error {worst_p:.1e}"
    ))
}

fn noise_reproduction() -> Check {
    let start = Instant::now();
    let p = HhlProblem::worked_example();
    let grid = linear_grid(0.0, 0.15, 0.025).map_err(|e| e.to_string())?;
    let base = NoiseModel::reference_device(0.0);
    let sweep = noise_sweep(
        &p,
        &grid,
        &[SweepMode::TwoQOnly, SweepMode::Full],
        &base,
        None,
        0,
    )
    .map_err(|e| e.to_string())?;
    let curve = |mode, label| -> Vec<f64> {
        sweep
            .rows_for(mode)
            .map(|r| sweep.probability(r, label))
            .collect()
    };
    let (two11, full11) = (
        curve(SweepMode::TwoQOnly, "11"),
        curve(SweepMode::Full, "11"),
    );
    for (name, c) in [("2q_only", &two11), ("full", &full11)] {
        ensure(
            c.windows(2).all(|w| w[1] <= w[0]),
            format!("{name} P11 increases: {c:?}"),
        )?;
    }
    ensure(
        full11.iter().zip(&two11).all(|(f, t)| f <= t),
        "full curve above 2q_only curve",
    )?;
    for mode in [SweepMode::TwoQOnly, SweepMode::Full] {
        let p01 = *curve(mode, "01").last().ok_or("empty grid")?;
        ensure(
            p01 > 1.0 / 16.0,
            format!("{} P01 at 0.15 is {p01}", mode.label()),
        )?;
    }
    let first = sweep
        .rows_for(SweepMode::TwoQOnly)
        .next()
        .ok_or("empty sweep")?;
    let d0 = first
        .probabilities
        .iter()
        .zip(&sweep.ideal)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(d0 <= 1e-9, format!("2q_only at p = 0 off ideal by {d0}"))?;

    // Full mode at p = 0 with relaxation off leaves only readout error.
    let readout_only = NoiseModel {
        t1: None,
        t2: None,
        ..SweepMode::Full.model(&base, 0.0)
    };
    let measured = p.measured_qubits();
    let rho = run_noisy(
        &build_hhl_circuit(&p).map_err(|e| e.to_string())?,
        &readout_only,
    )
    .map_err(|e| e.to_string())?;
    let got = apply_readout_error(&rho.marginal(&measured), &readout_only, &measured);
    let flip = 0.05;
    let m = |t: usize, o: usize| if t == o { 1.0 - flip } else { flip };
    let closed: Vec<f64> = (0..4)
        .map(|o| {
            (0..4)
                .map(|t| sweep.ideal[t] * m(t >> 1, o >> 1) * m(t & 1, o & 1))
                .sum()
        })
        .collect();
    let dr = got
        .iter()
        .zip(&closed)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(dr <= 1e-9, format!("readout closed form off by {dr}"))?;
    let full0 = sweep
        .rows_for(SweepMode::Full)
        .next()
        .ok_or("empty sweep")?;
    let relax = full0
        .probabilities
        .iter()
        .zip(&closed)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    within(start.elapsed(), 60.0)?;
    Ok(format!(
        "P11 {:.4} → {:.4} (2q) / {:.4} (full); T1/T2 shift at p = 0 {relax:.2e}",
        two11[0],
        two11.last().unwrap_or(&0.0),
        full11.last().unwrap_or(&0.0)
    ))
}

fn all_gates(circuits: &[Circuit]) -> f64 {
    circuits
        .iter()
        .flat_map(|c| {
            c.gates()
                .map(|(g, _, _)| gate_matrix(g).unitarity_error())
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

fn physicality() -> Check {
    let p = HhlProblem::worked_example();
    let circuit = build_hhl_circuit(&p).map_err(|e| e.to_string())?;
    let grid = linear_grid(0.0, 0.15, 0.025).map_err(|e| e.to_string())?;
    let base = NoiseModel::reference_device(0.0);
    let widths: Vec<usize> = circuit.gates().map(|(g, _, _)| g.width()).collect();
    let mut kraus = 0.0f64;
    for &x in &grid {
        for mode in [SweepMode::TwoQOnly, SweepMode::Full] {
            for &w in &widths {
                for (ch, _) in mode.model(&base, x).channels_after_gate(w) {
                    kraus = kraus.max(ch.completeness_error());
                }
            }
        }
    }
    ensure(kraus <= 1e-12, format!("Kraus completeness error {kraus}"))?;

    let sweep = noise_sweep(
        &p,
        &grid,
        &[SweepMode::TwoQOnly, SweepMode::Full],
        &base,
        None,
        0,
    )
    .map_err(|e| e.to_string())?;
    let trace = sweep
        .rows
        .iter()
        .map(|r| r.max_trace_error)
        .fold(0.0, f64::max);
    ensure(trace <= 1e-10, format!("trace drift {trace}"))?;

    let inst = random_exact_instance(4, 3, 1);
    let big =
        preprocess_with(&inst.a, &inst.b, &Overrides::default()).map_err(|e| e.to_string())?;
    let mut circuits = vec![circuit, build_hhl_circuit(&big).map_err(|e| e.to_string())?];
    circuits.extend((1..=5).flat_map(|n| [build_qft(n), build_iqft(n)]));
    let unitarity = all_gates(&circuits);
    ensure(
        unitarity <= 1e-12,
        format!("gate unitarity error {unitarity}"),
    )?;
    Ok(format!(
        "Kraus {kraus:.1e}, trace {trace:.1e}, unitarity {unitarity:.1e}"
    ))
}

fn complexity_tables() -> Check {
    let grid: Vec<u64> = (4..=20).map(|e| 1u64 << e).collect();
    let t = crossover_table(2, 2.0, 0.1, &grid).map_err(|e| e.to_string())?;
    ensure(
        t.rows
            .windows(2)
            .all(|w| w[1].cg_over_hhl > w[0].cg_over_hhl),
        "cg/hhl ratio not strictly increasing",
    )?;
    let ops: Vec<f64> = [16usize, 32, 64]
        .iter()
        .map(|&n| {
            let a = ComplexMatrix::from_vec(
                n,
                n,
                (0..n * n)
                    .map(|i| {
                        c64(
                            if i / n == i % n {
                                n as f64
                            } else {
                                1.0 / (1 + i / n + i % n) as f64
                            },
                            0.0,
                        )
                    })
                    .collect(),
            )
            .expect("square");
            let b = ComplexVector::from_real(&vec![1.0; n]);
            gaussian_elimination(&a, &b).map(|r| measured_ops(&r) as f64)
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = ops.windows(2).map(|w| w[1] / w[0]).collect();
    ensure(
        ratios.iter().all(|r| (6.0..=10.0).contains(r)),
        format!("doubling ratios {ratios:?}"),
    )?;
    Ok(format!(
        "doubling ratios {:.3}, {:.3}",
        ratios[0], ratios[1]
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("worked-example direction", worked_example_direction),
        ("solution recovery", solution_recovery),
        ("1:9 ratio", ratio_reproduction),
        ("intermediate states", intermediate_states),
        ("QFT correctness", qft_correctness),
        ("QPE exactness", qpe_exactness),
        ("randomized oracle equivalence", randomized_oracle),
        ("noise sweep behaviour", noise_reproduction),
        ("physicality", physicality),
        ("complexity tables", complexity_tables),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let ms = start.elapsed().as_secs_f64() * 1e3;
        match outcome {
            Ok(detail) => println!("[{:>2}] PASS {name} ({ms:.1} ms): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("[{:>2}] FAIL {name} ({ms:.1} ms): {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
