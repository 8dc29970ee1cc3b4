//! The HHL pipeline: preprocessing, circuit assembly, execution and solution
//! extraction.
//!
//! Register layout: ancilla on qubit 0, clock on qubits `1..=n_clock`
//! (little-endian), then the `b` register. Clbit 0 records the ancilla and
//! clbit `1 + i` records `b` qubit `i`. Outcome strings list the `b` register
//! most significant bit first, followed by the ancilla, so for a one-qubit `b`
//! the string `"11"` means `b = 1`, ancilla `= 1`.

mod instance;
mod rotations;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use instance::{random_exact_instance, random_unitary, RandomInstance};
pub use rotations::{
    build_eigeninversion, build_eigeninversion_encoded, inversion_angle, multiplexed_ry,
    multiplexed_rz, prepare_state, ClockEncoding,
};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::linalg::{
    c64, hermitian_eigendecompose, hermitian_embedding, matrix_power_via_eigen,
    solve_linear_reference, ComplexMatrix, ComplexVector, EigenDecomposition, JACOBI_TOL, ZERO,
};
use crate::noise::{apply_readout_error, run_noisy, NoiseModel};
use crate::qpe::{eigenvalue_to_clock, inverse_qpe_stages, qpe_stages, QpeSpec};
use crate::round_sig;
use crate::statevector::{
    render_outcome, run_ideal, sample, sample_distribution, ShotHistogram, SnapshotSet, StateVector,
};

/// Largest clock searched when choosing parameters automatically.
pub const MAX_AUTO_CLOCK: usize = 8;
/// Largest clock accepted from a caller.
pub const MAX_CLOCK: usize = 16;
/// Clock size used when no exact encoding exists.
pub const APPROXIMATE_CLOCK: usize = 4;
/// `|λ|_min ≤ SINGULAR_RTOL·|λ|_max` counts as singular.
pub const SINGULAR_RTOL: f64 = 1e-12;
/// How close a rescaled eigenvalue must be to an integer to count as exact.
pub const INTEGRALITY_TOL: f64 = 1e-9;
pub const MIN_SUCCESS_PROBABILITY: f64 = 1e-12;

/// Optional caller choices for the clock size, evolution time and `C`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub n_clock: Option<usize>,
    pub t: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
}

/// The system as the caller supplied it.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSystem {
    pub a: ComplexMatrix,
    pub b: ComplexVector,
    /// `A` was not Hermitian and was replaced by `[[0, A], [A†, 0]]`.
    pub embedded: bool,
}

/// A preprocessed HHL instance.
#[derive(Debug, Clone, PartialEq)]
pub struct HhlProblem {
    /// Hermitian operator of dimension `2^{n_b}`, after any embedding and padding.
    pub a: ComplexMatrix,
    /// Unit-norm right-hand side matching `a`.
    pub b: ComplexVector,
    pub n_clock: usize,
    pub t: f64,
    pub c: f64,
    pub encoding: ClockEncoding,
    /// Some rescaled eigenvalue is not an integer in the clock range.
    pub approximate: bool,
    pub eigen: EigenDecomposition,
    pub b_norm: f64,
    pub source: SourceSystem,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn is_integral(x: f64) -> bool {
    (x - x.round()).abs() <= INTEGRALITY_TOL * x.abs().max(1.0)
}

/// Largest `g` such that every `λ/g` is an integer below `2^MAX_AUTO_CLOCK`.
/// `g` is recovered from `trace = Σλ`, which is exact in the input, rather
/// than from the computed eigenvalues.
fn rational_unit(values: &[f64], trace: f64) -> Option<f64> {
    let base = values.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
    let limit = (1u64 << MAX_AUTO_CLOCK) as f64;
    for q in 1..=1u64 << MAX_AUTO_CLOCK {
        let ks: Vec<f64> = values.iter().map(|l| l / base * q as f64).collect();
        if ks.iter().any(|k| k.abs() >= limit) {
            return None;
        }
        if ks.iter().all(|&k| is_integral(k)) {
            let ints: Vec<i64> = ks.iter().map(|k| k.round() as i64).collect();
            let g = ints.iter().fold(0, |acc, k| gcd(acc, k.unsigned_abs()));
            let sum: i64 = ints.iter().sum::<i64>() / g as i64;
            let abs_sum: u64 = ints.iter().map(|k| k.unsigned_abs()).sum::<u64>() / g;
            return Some(if sum != 0 {
                trace / sum as f64
            } else {
                values.iter().map(|l| l.abs()).sum::<f64>() / abs_sum as f64
            });
        }
    }
    None
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, l| m.max(l.abs()))
}

fn clock_values(values: &[f64], t: f64, n: usize) -> Vec<f64> {
    values
        .iter()
        .map(|&l| eigenvalue_to_clock(l, t, n))
        .collect()
}

fn exact_for(values: &[f64], t: f64, n: usize, enc: ClockEncoding) -> bool {
    clock_values(values, t, n)
        .iter()
        .all(|&m| is_integral(m) && m.round() != 0.0 && m.round().abs() < enc.capacity(n))
}

/// `t` placing the largest `|λ̃|` on the top usable clock value.
fn fallback_t(values: &[f64], n: usize, enc: ClockEncoding) -> f64 {
    2.0 * PI * (enc.capacity(n) - 1.0) / ((1u64 << n) as f64 * max_abs(values))
}

/// Picks `(n_clock, t, approximate)`.
fn choose_clock(
    values: &[f64],
    trace: f64,
    enc: ClockEncoding,
    ov: &Overrides,
) -> (usize, f64, bool) {
    let unit = rational_unit(values, trace);
    let exact_t = |n: usize| {
        unit.filter(|g| (max_abs(values) / g).round() < enc.capacity(n))
            .map(|g| 2.0 * PI / (g * (1u64 << n) as f64))
    };
    match (ov.n_clock, ov.t) {
        (Some(n), Some(t)) => (n, t, !exact_for(values, t, n, enc)),
        (None, Some(t)) => (1..=MAX_AUTO_CLOCK)
            .find(|&n| exact_for(values, t, n, enc))
            .map_or((APPROXIMATE_CLOCK, t, true), |n| (n, t, false)),
        (Some(n), None) => {
            exact_t(n).map_or((n, fallback_t(values, n, enc), true), |t| (n, t, false))
        }
        (None, None) => (1..=MAX_AUTO_CLOCK)
            .find_map(|n| exact_t(n).map(|t| (n, t, false)))
            .unwrap_or_else(|| {
                let n = APPROXIMATE_CLOCK;
                (n, fallback_t(values, n, enc), true)
            }),
    }
}

/// Checks `A`, `b` and builds the instance with automatically chosen parameters.
pub fn preprocess(a_raw: &ComplexMatrix, b_raw: &ComplexVector) -> Result<HhlProblem> {
    preprocess_with(a_raw, b_raw, &Overrides::default())
}

/// As [`preprocess`], honouring any caller-fixed parameters.
///
/// Non-Hermitian `A` is embedded as `[[0, A], [A†, 0]]` with `b` padded by
/// zeros; the solution is then the second block. A dimension that is not a
/// power of two is padded with a diagonal block repeating the eigenvalue of
/// smallest magnitude, which leaves the spectrum's scale unchanged.
pub fn preprocess_with(
    a_raw: &ComplexMatrix,
    b_raw: &ComplexVector,
    ov: &Overrides,
) -> Result<HhlProblem> {
    let n = a_raw.require_square()?;
    if b_raw.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b_raw.dim(),
        });
    }
    let b_norm = b_raw.norm();
    if !b_norm.is_finite() {
        return Err(Error::InvalidParameter("b has non-finite entries".into()));
    }
    if b_norm == 0.0 {
        return Err(Error::ZeroRhs);
    }
    let embedded = !a_raw.is_hermitian();
    let (a_h, mut b_h) = if embedded {
        let mut b = b_raw.clone().into_vec();
        b.resize(2 * n, ZERO);
        (hermitian_embedding(a_raw)?, b)
    } else {
        (a_raw.clone(), b_raw.clone().into_vec())
    };
    let eig = hermitian_eigendecompose(&a_h, JACOBI_TOL)?;
    let smallest = eig
        .values
        .iter()
        .copied()
        .min_by(|x, y| x.abs().total_cmp(&y.abs()))
        .expect("non-empty spectrum");
    if smallest.abs() <= SINGULAR_RTOL * max_abs(&eig.values) {
        return Err(Error::SingularMatrix);
    }

    let d = a_h.rows();
    let dim = d.next_power_of_two().max(2);
    let (a, eigen) = if dim == d {
        (a_h, eig)
    } else {
        let mut a = ComplexMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                a[(r, c)] = if r < d && c < d {
                    a_h[(r, c)]
                } else if r == c {
                    c64(smallest, 0.0)
                } else {
                    ZERO
                };
            }
        }
        b_h.resize(dim, ZERO);
        let eigen = hermitian_eigendecompose(&a, JACOBI_TOL)?;
        (a, eigen)
    };
    let b = ComplexVector::new(b_h).scale(c64(1.0 / b_norm, 0.0));

    let encoding = if eigen.values.iter().any(|&l| l < 0.0) {
        ClockEncoding::Signed
    } else {
        ClockEncoding::Unsigned
    };
    if let Some(nc) = ov.n_clock {
        if nc == 0 || nc > MAX_CLOCK {
            return Err(Error::TooLarge {
                what: "clock register",
                size: nc,
                limit: MAX_CLOCK,
            });
        }
    }
    if let Some(t) = ov.t {
        if !t.is_finite() || t <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "evolution time t = {t} must be positive"
            )));
        }
    }
    let (n_clock, t, approximate) = choose_clock(&eigen.values, a.trace().re, encoding, ov);
    let lambda_tilde = clock_values(&eigen.values, t, n_clock);
    let c_max = if approximate {
        1.0
    } else {
        lambda_tilde
            .iter()
            .fold(f64::INFINITY, |m, l| m.min(l.round().abs()))
    };
    let c = match ov.c {
        None => c_max,
        Some(c) if c > 0.0 && c <= c_max * (1.0 + INTEGRALITY_TOL) => c,
        Some(c) => return Err(Error::InvalidC(c)),
    };

    Ok(HhlProblem {
        a,
        b,
        n_clock,
        t,
        c,
        encoding,
        approximate,
        eigen,
        b_norm,
        source: SourceSystem {
            a: a_raw.clone(),
            b: b_raw.clone(),
            embedded,
        },
    })
}

/// Problem file: `{"A": matrix, "b": vector, "n_clock"?, "t"?, "C"?}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    #[serde(rename = "A")]
    pub a: ComplexMatrix,
    pub b: ComplexVector,
    #[serde(flatten)]
    pub overrides: Overrides,
}

impl ProblemFile {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem JSON is infallible")
    }

    pub fn preprocess(&self) -> Result<HhlProblem> {
        preprocess_with(&self.a, &self.b, &self.overrides)
    }
}

/// `A = [[3/2, 1/2], [1/2, 3/2]]`, `b = (0, 1)`.
pub fn worked_example_system() -> (ComplexMatrix, ComplexVector) {
    (
        ComplexMatrix::from_real_rows(&[[1.5, 0.5], [0.5, 1.5]]),
        ComplexVector::from_real(&[0.0, 1.0]),
    )
}

impl HhlProblem {
    /// The two-qubit-clock worked example: `t = π/2`, `C = 1`.
    pub fn worked_example() -> Self {
        let (a, b) = worked_example_system();
        preprocess(&a, &b).expect("worked example is well posed")
    }

    pub fn num_b_qubits(&self) -> usize {
        self.a.rows().trailing_zeros() as usize
    }

    pub fn num_qubits(&self) -> usize {
        1 + self.n_clock + self.num_b_qubits()
    }

    pub fn ancilla(&self) -> usize {
        0
    }

    pub fn clock_qubits(&self) -> Vec<usize> {
        (1..=self.n_clock).collect()
    }

    pub fn b_qubits(&self) -> Vec<usize> {
        (self.n_clock + 1..self.num_qubits()).collect()
    }

    /// `b` qubits most significant first, then the ancilla.
    pub fn measured_qubits(&self) -> Vec<usize> {
        let mut m: Vec<usize> = self.b_qubits().into_iter().rev().collect();
        m.push(self.ancilla());
        m
    }

    /// `λ̃_j = 2^n λ_j t / 2π` in eigenvalue order.
    pub fn lambda_tilde(&self) -> Vec<f64> {
        clock_values(&self.eigen.values, self.t, self.n_clock)
    }

    pub fn qpe_spec(&self) -> Result<QpeSpec> {
        QpeSpec::from_supplier(self.n_clock, |l| {
            matrix_power_via_eigen(&self.eigen, self.t, l)
        })
    }

    /// Maps a vector over the padded register back to the caller's coordinates.
    pub fn extract(&self, register: &ComplexVector) -> ComplexVector {
        let n = self.source.a.rows();
        let start = if self.source.embedded { n } else { 0 };
        ComplexVector::new(register.as_slice()[start..start + n].to_vec())
    }

    /// Scalar `s` minimising `‖A(s·d) − b‖` over the caller's system, applied to `d`.
    pub fn rescale(&self, direction: &ComplexVector) -> ComplexVector {
        let ad = self.source.a.mul_vec(direction);
        let denom = ad.norm_sqr();
        if denom == 0.0 {
            return direction.clone();
        }
        direction.scale(ad.inner(&self.source.b) / denom)
    }
}

/// Assembles state preparation, QPE, eigenvalue inversion, inverse QPE and
/// terminal measurements, with barriers `phi1`…`phi9` between stages.
/// `phi5` and `phi6` coincide: the ancilla measurement is deferred to the end.
pub fn build_hhl_circuit(p: &HhlProblem) -> Result<Circuit> {
    let n = p.n_clock;
    let nb = p.num_b_qubits();
    let total = p.num_qubits();
    let mut c = Circuit::new(total, 1 + nb);
    c.add_register("ancilla", vec![p.ancilla()])?;
    c.add_register("clock", p.clock_qubits())?;
    c.add_register("b", p.b_qubits())?;

    c.extend_mapped(&prepare_state(&p.b)?, &p.b_qubits(), &[])?;
    c.barrier("phi1");

    let spec = p.qpe_spec()?;
    let shifted: Vec<usize> = (1..total).collect();
    let labels = [["phi2", "phi3", "phi4"], ["phi7", "phi8", "phi9"]];
    let [forward, inverse] = [qpe_stages(&spec)?, inverse_qpe_stages(&spec)?];

    for (stage, label) in forward.iter().zip(labels[0]) {
        c.extend_mapped(stage, &shifted, &[])?;
        c.barrier(label);
    }
    c.extend(&build_eigeninversion_encoded(n, p.c, p.encoding)?)?;
    c.barrier("phi5");
    c.barrier("phi6");
    for (stage, label) in inverse.iter().zip(labels[1]) {
        c.extend_mapped(stage, &shifted, &[])?;
        c.barrier(label);
    }

    c.measure(p.ancilla(), 0)?;
    for (i, q) in p.b_qubits().into_iter().enumerate() {
        c.measure(q, 1 + i)?;
    }
    Ok(c)
}

/// Execution backend for [`run_hhl`].
#[derive(Debug, Clone, PartialEq)]
pub enum RunMode {
    Statevector,
    Shots {
        shots: u64,
        seed: u64,
    },
    /// Density-matrix execution. `shots = None` reads exact probabilities.
    Noisy {
        model: NoiseModel,
        shots: Option<u64>,
        seed: u64,
    },
}

impl RunMode {
    pub fn label(&self) -> &'static str {
        match self {
            RunMode::Statevector => "statevector",
            RunMode::Shots { .. } => "shots",
            RunMode::Noisy { .. } => "noisy",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HhlResult {
    pub mode: &'static str,
    /// Probability of reading the ancilla as 1.
    pub success_probability: f64,
    /// Unit-norm solution direction in the caller's coordinates. Only
    /// magnitudes are meaningful when `phases_known` is false.
    pub direction: ComplexVector,
    pub phases_known: bool,
    /// `direction` scaled to best satisfy `A·x = b` (statevector mode only).
    pub rescaled_solution: Option<ComplexVector>,
    /// Distribution over the measured bits, indexed like the outcome strings.
    pub outcome_probabilities: Vec<f64>,
    pub histogram: Option<ShotHistogram>,
    /// `P("11") / P("01")` for a one-qubit `b` register.
    pub ratio_11_01: Option<f64>,
    /// Postselected mass left outside clock value 0.
    pub clock_leakage: f64,
    pub snapshots: Option<SnapshotSet>,
}

impl HhlResult {
    pub fn outcome_labels(&self) -> Vec<String> {
        let width = self.outcome_probabilities.len().trailing_zeros() as usize;
        (0..self.outcome_probabilities.len())
            .map(|o| render_outcome(o, width))
            .collect()
    }

    pub fn probability(&self, label: &str) -> f64 {
        usize::from_str_radix(label, 2)
            .ok()
            .and_then(|o| self.outcome_probabilities.get(o).copied())
            .unwrap_or(0.0)
    }
}

fn ratio(p11: f64, p01: f64) -> Option<f64> {
    (p01 > 0.0).then(|| p11 / p01)
}

/// Success probability and `b`-register magnitudes from an outcome distribution.
fn from_distribution(p: &HhlProblem, dist: &[f64]) -> Result<(f64, ComplexVector)> {
    let success: f64 = dist.iter().skip(1).step_by(2).sum();
    if success < MIN_SUCCESS_PROBABILITY {
        return Err(Error::PostselectionFailed(success));
    }
    let register = ComplexVector::new(
        dist.iter()
            .skip(1)
            .step_by(2)
            .map(|q| c64((q / success).max(0.0).sqrt(), 0.0))
            .collect(),
    );
    let direction = p
        .extract(&register)
        .normalized()
        .ok_or(Error::PostselectionFailed(0.0))?;
    Ok((success, direction))
}

fn histogram_distribution(h: &ShotHistogram, width: usize) -> Vec<f64> {
    (0..1usize << width)
        .map(|o| h.frequency(&render_outcome(o, width)))
        .collect()
}

/// Runs the HHL circuit of `p` in the given mode.
pub fn run_hhl(p: &HhlProblem, mode: &RunMode) -> Result<HhlResult> {
    let circuit = build_hhl_circuit(p)?;
    let measured = p.measured_qubits();
    let width = measured.len();
    let one_bit = p.num_b_qubits() == 1;
    match mode {
        RunMode::Statevector => {
            let (state, snapshots) = run_ideal(&circuit)?;
            let dist = state.marginal(&measured);
            let success = state.probability_of(p.ancilla(), true);
            if success < MIN_SUCCESS_PROBABILITY {
                return Err(Error::PostselectionFailed(success));
            }
            let (register, leakage) = postselected_register(p, &state, success);
            let direction = p
                .extract(&register)
                .normalized()
                .ok_or(Error::PostselectionFailed(success))?;
            Ok(HhlResult {
                mode: mode.label(),
                success_probability: success,
                rescaled_solution: Some(p.rescale(&direction)),
                direction,
                phases_known: true,
                ratio_11_01: if one_bit {
                    ratio(dist[0b11], dist[0b01])
                } else {
                    None
                },
                outcome_probabilities: dist,
                histogram: None,
                clock_leakage: leakage,
                snapshots: Some(snapshots),
            })
        }
        RunMode::Shots { shots, seed } => {
            let (state, _) = run_ideal(&circuit)?;
            let hist = sample(&state, &measured, *shots, *seed)?;
            let (success, direction) = from_distribution(p, &histogram_distribution(&hist, width))?;
            Ok(HhlResult {
                mode: mode.label(),
                success_probability: success,
                direction,
                phases_known: false,
                rescaled_solution: None,
                ratio_11_01: if one_bit {
                    ratio(hist.count("11") as f64, hist.count("01") as f64)
                } else {
                    None
                },
                outcome_probabilities: state.marginal(&measured),
                histogram: Some(hist),
                clock_leakage: 0.0,
                snapshots: None,
            })
        }
        RunMode::Noisy { model, shots, seed } => {
            let rho = run_noisy(&circuit, model)?;
            let dist = apply_readout_error(&rho.marginal(&measured), model, &measured);
            let hist = shots.map(|s| sample_distribution(&dist, width, s, *seed));
            let observed = hist
                .as_ref()
                .map_or_else(|| dist.clone(), |h| histogram_distribution(h, width));
            let (success, direction) = from_distribution(p, &observed)?;
            Ok(HhlResult {
                mode: mode.label(),
                success_probability: success,
                direction,
                phases_known: false,
                rescaled_solution: None,
                ratio_11_01: if one_bit {
                    ratio(observed[0b11], observed[0b01])
                } else {
                    None
                },
                outcome_probabilities: dist,
                histogram: hist,
                clock_leakage: 0.0,
                snapshots: None,
            })
        }
    }
}

/// Ancilla-1, clock-0 amplitudes of the `b` register, and the postselected
/// mass outside clock 0.
fn postselected_register(
    p: &HhlProblem,
    state: &StateVector,
    success: f64,
) -> (ComplexVector, f64) {
    let amps = state.amplitudes();
    let shift = 1 + p.n_clock;
    let scale = 1.0 / success.sqrt();
    let register: Vec<Complex64> = (0..1usize << p.num_b_qubits())
        .map(|j| amps[1 | (j << shift)] * scale)
        .collect();
    let kept: f64 = register.iter().map(|z| z.norm_sqr()).sum();
    (ComplexVector::new(register), (1.0 - kept).max(0.0))
}

/// Comparison of an HHL result with the classical solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub classical_solution: ComplexVector,
    /// `‖A x − b‖ / ‖b‖` for the rescaled solution, when there is one.
    pub residual: Option<f64>,
    /// `|⟨d, x_c/‖x_c‖⟩|`; magnitudes only when phases are unknown.
    pub cosine_similarity: f64,
}

pub fn verify_solution(p: &HhlProblem, r: &HhlResult) -> Result<Verification> {
    let classical = solve_linear_reference(&p.source.a, &p.source.b)?;
    let unit = classical.normalized().ok_or(Error::ZeroRhs)?;
    let cosine = if r.phases_known {
        r.direction.inner(&unit).norm()
    } else {
        r.direction
            .iter()
            .zip(unit.iter())
            .map(|(a, b)| a.norm() * b.norm())
            .sum()
    };
    let residual = r
        .rescaled_solution
        .as_ref()
        .map(|x| p.source.a.mul_vec(x).sub(&p.source.b).norm() / p.source.b.norm());
    Ok(Verification {
        classical_solution: classical,
        residual,
        cosine_similarity: cosine,
    })
}

fn vector_json(v: &ComplexVector) -> serde_json::Value {
    json!({
        "rows": v.dim(),
        "cols": 1,
        "re": v.iter().map(|z| round_sig(z.re)).collect::<Vec<_>>(),
        "im": v.iter().map(|z| round_sig(z.im)).collect::<Vec<_>>(),
    })
}

/// Result file: every [`HhlResult`] field plus the problem parameters, the
/// classical solution and the verification report. Numbers carry 12
/// significant digits.
pub fn result_json(p: &HhlProblem, r: &HhlResult, v: Option<&Verification>) -> serde_json::Value {
    let probs: serde_json::Map<String, serde_json::Value> = r
        .outcome_labels()
        .into_iter()
        .zip(&r.outcome_probabilities)
        .map(|(l, &q)| (l, json!(round_sig(q))))
        .collect();
    json!({
        "problem": {
            "n_clock": p.n_clock,
            "t": round_sig(p.t),
            "C": round_sig(p.c),
            "encoding": p.encoding,
            "approximate": p.approximate,
            "embedded": p.source.embedded,
            "b_norm": round_sig(p.b_norm),
            "eigenvalues": p.eigen.values.iter().map(|&l| round_sig(l)).collect::<Vec<_>>(),
            "lambda_tilde": p.lambda_tilde().into_iter().map(round_sig).collect::<Vec<_>>(),
        },
        "mode": r.mode,
        "success_probability": round_sig(r.success_probability),
        "direction": vector_json(&r.direction),
        "phases_known": r.phases_known,
        "rescaled_solution": r.rescaled_solution.as_ref().map(vector_json),
        "outcome_probabilities": probs,
        "histogram": r.histogram.as_ref().map(|h| json!({
            "shots": h.shots,
            "seed": h.seed,
            "counts": h.counts,
        })),
        "ratio_11_01": r.ratio_11_01.map(round_sig),
        "clock_leakage": round_sig(r.clock_leakage),
        "classical_solution": v.map(|v| vector_json(&v.classical_solution)),
        "residual": v.and_then(|v| v.residual).map(round_sig),
        "cosine_similarity": v.map(|v| round_sig(v.cosine_similarity)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::circuit_unitary;
    use crate::statevector::state_fidelity;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn worked_example_parameters() {
        let p = HhlProblem::worked_example();
        assert_eq!(p.n_clock, 2);
        assert!((p.t - FRAC_PI_2).abs() < 1e-15);
        assert!((p.c - 1.0).abs() < 1e-12);
        assert!(!p.approximate);
        assert_eq!(p.encoding, ClockEncoding::Unsigned);
        let lt = p.lambda_tilde();
        assert!((lt[0] - 1.0).abs() < 1e-12 && (lt[1] - 2.0).abs() < 1e-12);
        assert_eq!(p.num_qubits(), 4);
        assert_eq!(p.measured_qubits(), vec![3, 0]);
    }

    #[test]
    fn zero_rhs_and_singular() {
        let (a, _) = worked_example_system();
        assert!(matches!(
            preprocess(&a, &ComplexVector::zeros(2)),
            Err(Error::ZeroRhs)
        ));
        let singular = ComplexMatrix::from_real_rows(&[[1.0, 1.0], [1.0, 1.0]]);
        assert!(matches!(
            preprocess(&singular, &ComplexVector::from_real(&[1.0, 0.0])),
            Err(Error::SingularMatrix)
        ));
        // Nilpotent: its embedding has a zero singular value.
        let nilpotent = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        assert!(matches!(
            preprocess(&nilpotent, &ComplexVector::from_real(&[1.0, 0.0])),
            Err(Error::SingularMatrix)
        ));
    }

    #[test]
    fn clock_search() {
        let values = [0.5, 1.5, 2.0];
        assert!((rational_unit(&values, 4.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(rational_unit(&[1.0, 2f64.sqrt()], 1.0 + 2f64.sqrt()).is_none());
        let (n, t, approx) = choose_clock(
            &[2.0, 4.0, 6.0],
            12.0,
            ClockEncoding::Unsigned,
            &Overrides::default(),
        );
        // λ̃ = 1, 2, 3 fits two clock qubits.
        assert_eq!(n, 2);
        assert!(!approx);
        assert!((eigenvalue_to_clock(6.0, t, n) - 3.0).abs() < 1e-12);
        let (n, _, approx) = choose_clock(
            &[-2.0, 1.0, 2.0],
            1.0,
            ClockEncoding::Signed,
            &Overrides::default(),
        );
        assert_eq!(n, 3);
        assert!(!approx);
        let (n, t, approx) = choose_clock(
            &[1.0, 2f64.sqrt()],
            1.0 + 2f64.sqrt(),
            ClockEncoding::Unsigned,
            &Overrides::default(),
        );
        assert_eq!(n, APPROXIMATE_CLOCK);
        assert!(approx);
        assert!((eigenvalue_to_clock(2f64.sqrt(), t, n) - 15.0).abs() < 1e-12);
    }

    #[test]
    fn overrides_are_respected() {
        let (a, b) = worked_example_system();
        let ov = Overrides {
            n_clock: Some(3),
            t: None,
            c: Some(0.5),
        };
        let p = preprocess_with(&a, &b, &ov).unwrap();
        assert_eq!(p.n_clock, 3);
        assert!((p.t - PI / 4.0).abs() < 1e-15);
        assert_eq!(p.c, 0.5);
        let too_big = Overrides {
            c: Some(1.5),
            ..Overrides::default()
        };
        assert!(matches!(
            preprocess_with(&a, &b, &too_big),
            Err(Error::InvalidC(_))
        ));
    }

    #[test]
    fn circuit_layout_and_barriers() {
        let p = HhlProblem::worked_example();
        let c = build_hhl_circuit(&p).unwrap();
        let labels: Vec<String> = c
            .ops()
            .iter()
            .filter_map(|op| match op {
                crate::circuit::Op::Barrier(l) => Some(l.clone()),
                _ => None,
            })
            .collect();
        let expected: Vec<String> = (1..=9).map(|i| format!("phi{i}")).collect();
        assert_eq!(labels, expected);
        assert_eq!(c.register("clock"), Some(&[1, 2][..]));
        assert_eq!(c.register("b"), Some(&[3][..]));
    }

    #[test]
    fn per_qubit_rotations_agree_on_one_hot_clock_values() {
        // Two controlled RYs, one per clock qubit, suffice when the clock only
        // ever holds 1 or 2.
        let p = HhlProblem::worked_example();
        let full = build_hhl_circuit(&p).unwrap();
        let (_, snaps) = run_ideal(&full).unwrap();

        let mut literal = Circuit::new(4, 0);
        literal.x(3).unwrap();
        let spec = p.qpe_spec().unwrap();
        for stage in qpe_stages(&spec).unwrap() {
            literal.extend_mapped(&stage, &[1, 2, 3], &[]).unwrap();
        }
        literal.cry(PI, 1, 0).unwrap();
        literal.cry(PI / 3.0, 2, 0).unwrap();
        let (s, _) = run_ideal(&literal).unwrap();
        let phi5 = snaps.get("phi5").unwrap();
        let diff = s
            .amplitudes()
            .iter()
            .zip(phi5.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn controlled_powers_against_hand_angles() {
        // FromMatrix powers equal the U-gate parametrisation with φ = π/2, λ = −π/2
        // for U and φ = 0, λ = π for U².
        use crate::circuit::GateKind;
        let p = HhlProblem::worked_example();
        let spec = p.qpe_spec().unwrap();
        let u = GateKind::U {
            theta: FRAC_PI_2,
            phi: FRAC_PI_2,
            lambda: -FRAC_PI_2,
            gamma: 3.0 * PI / 4.0,
        }
        .matrix();
        let u2 = GateKind::U {
            theta: PI,
            phi: 0.0,
            lambda: PI,
            gamma: 0.0,
        }
        .matrix();
        assert!(spec.powers[0].max_abs_diff(&u) < 1e-12);
        assert!(spec.powers[1].max_abs_diff(&u2) < 1e-12);
        // The angle set with φ and λ exchanged is Z·U·Z.
        let swapped = GateKind::U {
            theta: FRAC_PI_2,
            phi: -FRAC_PI_2,
            lambda: FRAC_PI_2,
            gamma: 3.0 * PI / 4.0,
        }
        .matrix();
        let z = ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, -1.0]]);
        assert!(z.matmul(&u).matmul(&z).max_abs_diff(&swapped) < 1e-12);
        assert!(spec.powers[0].max_abs_diff(&swapped) > 0.5);
    }

    #[test]
    fn statevector_solution_for_worked_example() {
        let p = HhlProblem::worked_example();
        let r = run_hhl(&p, &RunMode::Statevector).unwrap();
        let x = r.rescaled_solution.as_ref().unwrap();
        assert!((x[0] - c64(-0.25, 0.0)).norm() < 1e-9);
        assert!((x[1] - c64(0.75, 0.0)).norm() < 1e-9);
        assert!((r.success_probability - 0.625).abs() < 1e-12);
        assert!((r.ratio_11_01.unwrap() - 9.0).abs() < 1e-9);
        assert!(r.clock_leakage < 1e-12);
        let v = verify_solution(&p, &r).unwrap();
        assert!(v.residual.unwrap() < 1e-9);
        assert!(v.cosine_similarity > 1.0 - 1e-9);
    }

    #[test]
    fn clock_returns_to_zero() {
        let p = HhlProblem::worked_example();
        let (_, snaps) = run_ideal(&build_hhl_circuit(&p).unwrap()).unwrap();
        let s = snaps.get("phi9").unwrap();
        let off: f64 = s
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(i, _)| (i >> 1) & 0b11 != 0)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        assert!(off < 1e-9);
    }

    #[test]
    fn identity_system() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexVector::new(vec![c64(0.6, 0.0), c64(0.0, 0.8)]);
        let p = preprocess(&a, &b).unwrap();
        let r = run_hhl(&p, &RunMode::Statevector).unwrap();
        let got = StateVector::from_amplitudes(r.direction.clone().into_vec()).unwrap();
        let want = StateVector::from_amplitudes(b.clone().into_vec()).unwrap();
        assert!(state_fidelity(&got, &want).unwrap() >= 1.0 - 1e-9);
        let v = verify_solution(&p, &r).unwrap();
        assert!(v.residual.unwrap() < 1e-10);
    }

    #[test]
    fn non_hermitian_input_is_embedded() {
        let a = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [2.0, 0.0]]);
        let b = ComplexVector::from_real(&[1.0, 1.0]);
        let p = preprocess(&a, &b).unwrap();
        assert!(p.source.embedded);
        assert_eq!(p.a.rows(), 4);
        assert_eq!(p.encoding, ClockEncoding::Signed);
        assert!(!p.approximate);
        let r = run_hhl(&p, &RunMode::Statevector).unwrap();
        let x = r.rescaled_solution.unwrap();
        assert_eq!(x.dim(), 2);
        let oracle = solve_linear_reference(&a, &b).unwrap();
        assert!(x.max_abs_diff(&oracle) < 1e-9);
    }

    #[test]
    fn odd_dimension_is_padded() {
        let a = ComplexMatrix::from_real_rows(&[[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 3.0]]);
        let b = ComplexVector::from_real(&[1.0, 1.0, 1.0]);
        let p = preprocess(&a, &b).unwrap();
        assert_eq!(p.a.rows(), 4);
        let r = run_hhl(&p, &RunMode::Statevector).unwrap();
        let oracle = solve_linear_reference(&a, &b).unwrap();
        assert!(r.rescaled_solution.unwrap().max_abs_diff(&oracle) < 1e-9);
    }

    #[test]
    fn shot_mode_is_seed_deterministic() {
        let p = HhlProblem::worked_example();
        let mode = RunMode::Shots {
            shots: 4096,
            seed: 42,
        };
        let a = run_hhl(&p, &mode).unwrap();
        let b = run_hhl(&p, &mode).unwrap();
        assert_eq!(a.histogram, b.histogram);
        let r = a.ratio_11_01.unwrap();
        assert!((7.5..=10.5).contains(&r), "ratio {r}");
        assert!(a.rescaled_solution.is_none());
    }

    #[test]
    fn noisy_zero_model_matches_statevector() {
        let p = HhlProblem::worked_example();
        let ideal = run_hhl(&p, &RunMode::Statevector).unwrap();
        let noisy = run_hhl(
            &p,
            &RunMode::Noisy {
                model: NoiseModel::ideal(),
                shots: None,
                seed: 0,
            },
        )
        .unwrap();
        for (a, b) in ideal
            .outcome_probabilities
            .iter()
            .zip(&noisy.outcome_probabilities)
        {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn hhl_circuit_is_unitary_apart_from_measurements() {
        let p = HhlProblem::worked_example();
        let mut c = build_hhl_circuit(&p).unwrap();
        c = Circuit::from_json(&c.to_json()).unwrap();
        let gates_only = {
            let mut g = Circuit::new(c.num_qubits(), 0);
            for (gate, controls, targets) in c.gates() {
                let qubits: Vec<usize> = controls.iter().chain(targets).copied().collect();
                g.push_gate(gate.clone(), &qubits).unwrap();
            }
            g
        };
        assert!(circuit_unitary(&gates_only).unwrap().unitarity_error() < 1e-12);
    }

    #[test]
    fn problem_file_round_trip() {
        let (a, b) = worked_example_system();
        let f = ProblemFile {
            a,
            b,
            overrides: Overrides {
                n_clock: Some(2),
                t: Some(FRAC_PI_2),
                c: Some(1.0),
            },
        };
        let back = ProblemFile::from_json(&f.to_json()).unwrap();
        assert_eq!(back.preprocess().unwrap(), HhlProblem::worked_example());
        let minimal = r#"{"A":{"rows":1,"cols":1,"re":[2.0]},"b":{"rows":1,"cols":1,"re":[1.0]}}"#;
        let p = ProblemFile::from_json(minimal)
            .unwrap()
            .preprocess()
            .unwrap();
        let r = run_hhl(&p, &RunMode::Statevector).unwrap();
        assert!((r.rescaled_solution.unwrap()[0] - c64(0.5, 0.0)).norm() < 1e-9);
    }
}
