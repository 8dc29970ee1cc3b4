//! Mixed-state execution with Kraus noise.
//!
//! A density matrix on `n` qubits is stored as a vector over `2n` qubits,
//! `data[(row << n) | col]`. A gate `U` then acts as `U` on the row qubits and
//! `conj(U)` on the column qubits, reusing the statevector kernel.
//!
//! After every gate touching two or more qubits a depolarizing channel acts on
//! exactly those qubits. After every gate each participating qubit decays for
//! the gate duration: amplitude damping with `γ = 1 − e^{−Δt/T1}` and pure
//! dephasing with `λ = 1 − e^{−2Δt/T_φ}`, `1/T_φ = 1/T2 − 1/(2·T1)`.

mod channels;

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use channels::{amplitude_damping, depolarizing, phase_damping, KrausChannel};

use crate::circuit::{Circuit, Op};
use crate::error::{Error, Result};
use crate::format_number;
use crate::hhl::{build_hhl_circuit, HhlProblem};
use crate::kernel;
use crate::linalg::{hermitian_eigendecompose, ComplexMatrix, JACOBI_TOL, ZERO};
use crate::statevector::{
    outcome_index, render_outcome, run_ideal, sample_distribution, StateVector,
};

/// Density matrices hold `4^n` entries; 8 qubits is 65 536.
pub const MAX_DENSITY_QUBITS: usize = 8;
pub const CONFUSION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn zero(num_qubits: usize) -> Self {
        let mut data = vec![ZERO; 1 << (2 * num_qubits)];
        data[0] = Complex64::new(1.0, 0.0);
        Self { num_qubits, data }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_state(s: &StateVector) -> Self {
        let amps = s.amplitudes();
        let dim = amps.len();
        let mut data = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = amps[r] * amps[c].conj();
            }
        }
        Self {
            num_qubits: s.num_qubits(),
            data,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.entry(i, i)).sum()
    }

    /// Diagonal of `ρ`: computational-basis outcome probabilities.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entry(i, i).re).collect()
    }

    /// Marginal over `measured`, `measured[0]` most significant.
    pub fn marginal(&self, measured: &[usize]) -> Vec<f64> {
        let mut dist = vec![0.0; 1 << measured.len()];
        for (i, p) in self.probabilities().into_iter().enumerate() {
            dist[outcome_index(i, measured)] += p;
        }
        dist
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_vec(self.dim(), self.dim(), self.data.clone())
            .expect("density data is dim × dim")
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.to_matrix().hermiticity_error()
    }

    /// Smallest eigenvalue of the Hermitian part of `ρ`.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let m = self.to_matrix();
        let h = m.add(&m.adjoint()).scale(Complex64::new(0.5, 0.0));
        let eig = hermitian_eigendecompose(&h, JACOBI_TOL)?;
        Ok(eig.values[0])
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with(&self, s: &StateVector) -> f64 {
        let a = s.amplitudes();
        let dim = self.dim();
        let mut acc = ZERO;
        for r in 0..dim {
            for c in 0..dim {
                acc += a[r].conj() * self.data[r * dim + c] * a[c];
            }
        }
        acc.re
    }

    fn apply_unitary(&mut self, m: &ComplexMatrix, controls: &[usize], targets: &[usize]) {
        let n = self.num_qubits;
        let shift = |qs: &[usize]| qs.iter().map(|q| q + n).collect::<Vec<_>>();
        kernel::apply_controlled(&mut self.data, m, &shift(controls), &shift(targets));
        kernel::apply_controlled(&mut self.data, &m.conj(), controls, targets);
    }

    /// `ρ ↦ Σ K ρ K†` with the channel acting on `qubits` (first = least significant).
    pub fn apply_channel(&mut self, ch: &KrausChannel, qubits: &[usize]) {
        let n = self.num_qubits;
        let rows: Vec<usize> = qubits.iter().map(|q| q + n).collect();
        let mut acc = vec![ZERO; self.data.len()];
        for k in &ch.ops {
            let mut term = self.data.clone();
            kernel::apply_controlled(&mut term, k, &[], &rows);
            kernel::apply_controlled(&mut term, &k.conj(), &[], qubits);
            for (a, t) in acc.iter_mut().zip(term) {
                *a += t;
            }
        }
        self.data = acc;
    }
}

/// Row-stochastic readout confusion: `m[true][observed]`.
pub type Confusion = [[f64; 2]; 2];

pub const PERFECT_READOUT: Confusion = [[1.0, 0.0], [0.0, 1.0]];

pub fn symmetric_confusion(flip: f64) -> Confusion {
    [[1.0 - flip, flip], [flip, 1.0 - flip]]
}

/// Noise parameters. Times are in microseconds; `None` disables that process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    #[serde(default)]
    pub p_2q: f64,
    #[serde(default)]
    pub t1: Option<f64>,
    #[serde(default)]
    pub t2: Option<f64>,
    #[serde(default = "default_gate_time_1q")]
    pub gate_time_1q: f64,
    #[serde(default = "default_gate_time_2q")]
    pub gate_time_2q: f64,
    /// Per-qubit confusion matrices indexed by qubit. Empty means perfect
    /// readout; a single entry applies to every qubit.
    #[serde(default, deserialize_with = "readout_json::deserialize")]
    pub readout: Vec<Confusion>,
}

fn default_gate_time_1q() -> f64 {
    0.05
}

fn default_gate_time_2q() -> f64 {
    0.3
}

mod readout_json {
    use super::{symmetric_confusion, Confusion};
    use serde::{Deserialize, Deserializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Readout {
        Flip(f64),
        One(Confusion),
        PerQubit(Vec<Confusion>),
    }

    /// Accepts a flip probability, one confusion matrix, or a list of them.
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Confusion>, D::Error> {
        Ok(match Readout::deserialize(d)? {
            Readout::Flip(p) => vec![symmetric_confusion(p)],
            Readout::One(m) => vec![m],
            Readout::PerQubit(v) => v,
        })
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl NoiseModel {
    /// No noise at all.
    pub fn ideal() -> Self {
        Self {
            p_2q: 0.0,
            t1: None,
            t2: None,
            gate_time_1q: default_gate_time_1q(),
            gate_time_2q: default_gate_time_2q(),
            readout: Vec::new(),
        }
    }

    /// T1 = 50 µs, T2 = 70 µs, 5 % symmetric readout error.
    pub fn reference_device(p_2q: f64) -> Self {
        Self {
            p_2q,
            t1: Some(50.0),
            t2: Some(70.0),
            readout: vec![symmetric_confusion(0.05)],
            ..Self::ideal()
        }
    }

    /// Keeps only the two-qubit depolarizing term.
    pub fn two_qubit_only(&self) -> Self {
        Self {
            p_2q: self.p_2q,
            ..Self::ideal()
        }
        .with_gate_times(self.gate_time_1q, self.gate_time_2q)
    }

    fn with_gate_times(mut self, t1q: f64, t2q: f64) -> Self {
        self.gate_time_1q = t1q;
        self.gate_time_2q = t2q;
        self
    }

    pub fn with_p_2q(&self, p_2q: f64) -> Self {
        Self {
            p_2q,
            ..self.clone()
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("noise model JSON is infallible")
    }

    pub fn confusion(&self, qubit: usize) -> Confusion {
        match self.readout.len() {
            0 => PERFECT_READOUT,
            1 => self.readout[0],
            _ => self.readout.get(qubit).copied().unwrap_or(PERFECT_READOUT),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::UnphysicalModel(msg));
        if !(0.0..1.0).contains(&self.p_2q) {
            return bad(format!("p_2q = {} is outside [0, 1)", self.p_2q));
        }
        for (name, t) in [("t1", self.t1), ("t2", self.t2)] {
            if let Some(t) = t {
                if t.is_nan() || t <= 0.0 {
                    return bad(format!("{name} = {t} must be positive"));
                }
            }
        }
        if let (Some(t1), Some(t2)) = (self.t1, self.t2) {
            if t2 > 2.0 * t1 {
                return bad(format!("t2 = {t2} exceeds 2·t1 = {}", 2.0 * t1));
            }
        }
        if !(self.gate_time_1q >= 0.0 && self.gate_time_2q >= 0.0) {
            return bad("gate times must be non-negative".into());
        }
        for m in &self.readout {
            for row in m {
                if row.iter().any(|&x| !(0.0..=1.0).contains(&x))
                    || (row[0] + row[1] - 1.0).abs() > CONFUSION_TOL
                {
                    return bad(format!("confusion row {row:?} is not a probability vector"));
                }
            }
        }
        Ok(())
    }

    /// Relaxation channels for one qubit idling through a gate of length `dt`.
    pub fn relaxation_channels(&self, dt: f64) -> Vec<KrausChannel> {
        let mut out = Vec::new();
        if let Some(t1) = self.t1 {
            let gamma = 1.0 - (-dt / t1).exp();
            if gamma > 0.0 {
                out.push(amplitude_damping(gamma));
            }
        }
        let rate_phi = self.t2.map_or(0.0, |t2| 1.0 / t2) - self.t1.map_or(0.0, |t1| 0.5 / t1);
        if rate_phi > 0.0 && self.t2.is_some() {
            let lambda = 1.0 - (-2.0 * dt * rate_phi).exp();
            if lambda > 0.0 {
                out.push(phase_damping(lambda));
            }
        }
        out
    }

    /// Every channel instance that follows a gate on `width` qubits, paired
    /// with the positions (within the gate's qubit list) it acts on.
    pub fn channels_after_gate(&self, width: usize) -> Vec<(KrausChannel, Vec<usize>)> {
        let mut out = Vec::new();
        if width >= 2 && self.p_2q > 0.0 {
            out.push((depolarizing(width, self.p_2q), (0..width).collect()));
        }
        let dt = if width == 1 {
            self.gate_time_1q
        } else {
            self.gate_time_2q
        };
        for ch in self.relaxation_channels(dt) {
            for q in 0..width {
                out.push((ch.clone(), vec![q]));
            }
        }
        out
    }
}

/// Runs `c` from `|0…0⟩` under `model`. Barriers are ignored and
/// measurements must be terminal.
pub fn run_noisy(c: &Circuit, model: &NoiseModel) -> Result<DensityMatrix> {
    run_noisy_observed(c, model, |_| {})
}

/// As [`run_noisy`], calling `observe` after every gate and every channel.
pub fn run_noisy_observed(
    c: &Circuit,
    model: &NoiseModel,
    mut observe: impl FnMut(&DensityMatrix),
) -> Result<DensityMatrix> {
    model.validate()?;
    let n = c.num_qubits();
    if n > MAX_DENSITY_QUBITS {
        return Err(Error::TooLarge {
            what: "density-matrix circuit",
            size: n,
            limit: MAX_DENSITY_QUBITS,
        });
    }
    let mut measured = vec![false; n];
    let mut rho = DensityMatrix::zero(n);
    for op in c.ops() {
        match op {
            Op::Gate {
                gate,
                controls,
                targets,
            } => {
                let qubits: Vec<usize> = targets.iter().chain(controls).copied().collect();
                if qubits.iter().any(|&q| measured[q]) {
                    return Err(Error::ContainsMeasurement);
                }
                rho.apply_unitary(&gate.kind.matrix(), controls, targets);
                observe(&rho);
                for (ch, positions) in model.channels_after_gate(qubits.len()) {
                    let on: Vec<usize> = positions.iter().map(|&i| qubits[i]).collect();
                    rho.apply_channel(&ch, &on);
                    observe(&rho);
                }
            }
            Op::Measure { qubit, .. } => measured[*qubit] = true,
            Op::Barrier(_) => {}
        }
    }
    Ok(rho)
}

/// Applies each measured qubit's confusion matrix to a distribution indexed
/// with `measured[0]` as the most significant bit.
pub fn apply_readout_error(probs: &[f64], model: &NoiseModel, measured: &[usize]) -> Vec<f64> {
    let k = measured.len();
    let mut dist = probs.to_vec();
    for (j, &q) in measured.iter().enumerate() {
        let m = model.confusion(q);
        let bit = 1usize << (k - 1 - j);
        let mut next = vec![0.0; dist.len()];
        for (o, p) in dist.iter().enumerate() {
            let truth = usize::from(o & bit != 0);
            next[o & !bit] += p * m[truth][0];
            next[o | bit] += p * m[truth][1];
        }
        dist = next;
    }
    dist
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepMode {
    /// Two-qubit depolarizing only.
    #[serde(rename = "2q_only")]
    TwoQOnly,
    /// Depolarizing plus T1/T2 relaxation and readout error.
    #[serde(rename = "full")]
    Full,
}

impl SweepMode {
    pub fn label(self) -> &'static str {
        match self {
            SweepMode::TwoQOnly => "2q_only",
            SweepMode::Full => "full",
        }
    }

    pub fn model(self, base: &NoiseModel, p_2q: f64) -> NoiseModel {
        match self {
            SweepMode::TwoQOnly => base.with_p_2q(p_2q).two_qubit_only(),
            SweepMode::Full => base.with_p_2q(p_2q),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p_2q: f64,
    pub mode: SweepMode,
    /// Outcome probabilities in the order of [`SweepResult::labels`].
    pub probabilities: Vec<f64>,
    /// Largest `|tr ρ − 1|` seen after any gate or channel of this run.
    pub max_trace_error: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    /// Outcome bitstrings: b register (most significant first), then ancilla.
    pub labels: Vec<String>,
    pub ideal: Vec<f64>,
    pub rows: Vec<SweepRow>,
    pub model: NoiseModel,
    /// `None` when probabilities are read exactly from the density matrix.
    pub shots: Option<u64>,
}

impl SweepResult {
    pub fn probability(&self, row: &SweepRow, label: &str) -> f64 {
        self.labels
            .iter()
            .position(|l| l == label)
            .map_or(0.0, |i| row.probabilities[i])
    }

    pub fn rows_for(&self, mode: SweepMode) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.mode == mode)
    }

    /// CSV with a `# ideal …` line holding the noiseless ancilla-1 probabilities.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# ideal ");
        let ideal: Vec<String> = self
            .labels
            .iter()
            .zip(&self.ideal)
            .filter(|(l, _)| l.ends_with('1'))
            .map(|(l, p)| format!("P_{l}={}", format_number(*p)))
            .collect();
        out.push_str(&ideal.join(","));
        out.push('\n');
        let opt = |t: Option<f64>| t.map_or("none".to_string(), format_number);
        let _ = writeln!(
            out,
            "# gate_time_1q={},gate_time_2q={},t1={},t2={},shots={}",
            format_number(self.model.gate_time_1q),
            format_number(self.model.gate_time_2q),
            opt(self.model.t1),
            opt(self.model.t2),
            self.shots.map_or("exact".to_string(), |s| s.to_string()),
        );
        out.push_str("p_2q,mode");
        for l in &self.labels {
            let _ = write!(out, ",P_{l}");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{}", format_number(r.p_2q), r.mode.label());
            for p in &r.probabilities {
                let _ = write!(out, ",{}", format_number(*p));
            }
            out.push('\n');
        }
        out
    }
}

/// Runs the HHL circuit of `problem` under `base` with `p_2q` replaced by
/// each grid value, once per mode. Rows are ordered by grid point, then mode.
pub fn noise_sweep(
    problem: &HhlProblem,
    grid: &[f64],
    modes: &[SweepMode],
    base: &NoiseModel,
    shots: Option<u64>,
    seed: u64,
) -> Result<SweepResult> {
    base.validate()?;
    let circuit = build_hhl_circuit(problem)?;
    let measured = problem.measured_qubits();
    let width = measured.len();
    let (ideal_state, _) = run_ideal(&circuit)?;
    let ideal = ideal_state.marginal(&measured);
    let labels = (0..1usize << width)
        .map(|o| render_outcome(o, width))
        .collect();
    let mut rows = Vec::with_capacity(grid.len() * modes.len());
    for &p in grid {
        for &mode in modes {
            let model = mode.model(base, p);
            let mut max_trace_error = 0.0f64;
            let rho = run_noisy_observed(&circuit, &model, |r| {
                max_trace_error = max_trace_error.max((r.trace() - 1.0).norm());
            })?;
            let dist = apply_readout_error(&rho.marginal(&measured), &model, &measured);
            let probabilities = match shots {
                None => dist,
                Some(s) => {
                    let h = sample_distribution(&dist, width, s, seed);
                    (0..dist.len())
                        .map(|o| h.frequency(&render_outcome(o, width)))
                        .collect()
                }
            };
            rows.push(SweepRow {
                p_2q: p,
                mode,
                probabilities,
                max_trace_error,
                min_eigenvalue: rho.min_eigenvalue()?,
            });
        }
    }
    Ok(SweepResult {
        labels,
        ideal,
        rows,
        model: base.clone(),
        shots,
    })
}

/// `start, start + step, …` up to and including `stop`.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || stop < start {
        return Err(Error::InvalidParameter(format!(
            "grid {start}:{stop}:{step} is empty"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}
