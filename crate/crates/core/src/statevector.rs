//! Ideal pure-state execution.
//!
//! Gates update amplitudes in place through bit-mask indexing. Barriers record
//! snapshot copies. Measurements are deferred unless a later gate touches the
//! measured qubit, in which case the branch is sampled and collapsed.
//!
//! Sampling uses PCG-64 (`rand_pcg::Pcg64`, XSL-RR 128/64) seeded with
//! `seed_from_u64`, so histograms are identical across platforms for a given
//! seed.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use crate::circuit::{Circuit, Op};
use crate::error::{Error, Result};
use crate::format_number;
use crate::kernel;
use crate::linalg::{ComplexVector, ONE, ZERO};

pub const NORM_TOL: f64 = 1e-10;
/// Branches lighter than this cannot be postselected.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-14;

/// Seeded generator used for every stochastic step.
pub fn rng_from_seed(seed: u64) -> Pcg64 {
    Pcg64::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    num_qubits: usize,
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero(num_qubits: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[0] = ONE;
        Self {
            amplitudes,
            num_qubits,
        }
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[index] = ONE;
        Self {
            amplitudes,
            num_qubits,
        }
    }

    /// Wraps amplitudes, checking the length is a power of two and the norm is one.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            amplitudes,
            num_qubits: len.trailing_zeros() as usize,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn to_vector(&self) -> ComplexVector {
        ComplexVector::new(self.amplitudes.clone())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub(crate) fn apply(
        &mut self,
        matrix: &crate::linalg::ComplexMatrix,
        controls: &[usize],
        targets: &[usize],
    ) {
        kernel::apply_controlled(&mut self.amplitudes, matrix, controls, targets);
    }

    /// Probability that `qubit` reads `outcome`.
    pub fn probability_of(&self, qubit: usize, outcome: bool) -> f64 {
        let bit = 1usize << qubit;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| (i & bit != 0) == outcome)
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }

    /// Marginal distribution over `measured`, indexed so that `measured[0]`
    /// is the most significant bit (see [`render_outcome`]).
    pub fn marginal(&self, measured: &[usize]) -> Vec<f64> {
        let k = measured.len();
        let mut dist = vec![0.0; 1 << k];
        for (i, z) in self.amplitudes.iter().enumerate() {
            dist[outcome_index(i, measured)] += z.norm_sqr();
        }
        dist
    }

    fn collapse(&mut self, qubit: usize, outcome: bool) -> Result<f64> {
        let p = self.probability_of(qubit, outcome);
        if p <= MIN_BRANCH_PROBABILITY {
            return Err(Error::ZeroProbabilityBranch(p));
        }
        let bit = 1usize << qubit;
        let scale = 1.0 / p.sqrt();
        for (i, z) in self.amplitudes.iter_mut().enumerate() {
            if (i & bit != 0) == outcome {
                *z *= scale;
            } else {
                *z = ZERO;
            }
        }
        Ok(p)
    }
}

/// Outcome index over `measured` with `measured[0]` as the most significant bit.
pub fn outcome_index(basis_index: usize, measured: &[usize]) -> usize {
    measured
        .iter()
        .fold(0, |acc, &q| (acc << 1) | (basis_index >> q & 1))
}

/// Bitstring for an outcome index: character `j` is the bit of `measured[j]`.
pub fn render_outcome(outcome: usize, width: usize) -> String {
    format!("{outcome:0width$b}")
}

/// Barrier label → state at that barrier, in circuit order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SnapshotSet {
    entries: Vec<(String, StateVector)>,
}

impl SnapshotSet {
    pub fn get(&self, label: &str) -> Option<&StateVector> {
        self.entries
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, s)| s)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(l, _)| l.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &StateVector)> {
        self.entries.iter().map(|(l, s)| (l.as_str(), s))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Outcome of [`run_ideal_seeded`].
#[derive(Debug, Clone)]
pub struct IdealRun {
    pub state: StateVector,
    pub snapshots: SnapshotSet,
    /// Classical bits written by mid-circuit measurements; terminal
    /// measurements leave their bit `None` and the state uncollapsed.
    pub clbits: Vec<Option<bool>>,
}

/// Runs `c` from `|0…0⟩` with seed 0 for any mid-circuit collapse.
pub fn run_ideal(c: &Circuit) -> Result<(StateVector, SnapshotSet)> {
    run_ideal_seeded(c, 0).map(|r| (r.state, r.snapshots))
}

pub fn run_ideal_seeded(c: &Circuit, seed: u64) -> Result<IdealRun> {
    run_from(c, StateVector::zero(c.num_qubits()), seed)
}

/// Runs `c` starting from `initial` instead of `|0…0⟩`.
pub fn run_from(c: &Circuit, initial: StateVector, seed: u64) -> Result<IdealRun> {
    if initial.num_qubits() != c.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: c.num_qubits(),
            got: initial.num_qubits(),
        });
    }
    let mid_circuit = mid_circuit_measurements(c);
    let mut rng = rng_from_seed(seed);
    let mut state = initial;
    let mut snapshots = SnapshotSet::default();
    let mut clbits = vec![None; c.num_clbits()];
    for (pos, op) in c.ops().iter().enumerate() {
        match op {
            Op::Gate {
                gate,
                controls,
                targets,
            } => state.apply(&gate.kind.matrix(), controls, targets),
            Op::Barrier(label) => snapshots.entries.push((label.clone(), state.clone())),
            Op::Measure { qubit, clbit } => {
                if mid_circuit[pos] {
                    let p1 = state.probability_of(*qubit, true);
                    let outcome = rng.gen::<f64>() < p1;
                    state.collapse(*qubit, outcome)?;
                    clbits[*clbit] = Some(outcome);
                }
            }
        }
    }
    Ok(IdealRun {
        state,
        snapshots,
        clbits,
    })
}

/// Flags each op position holding a measurement that a later gate depends on.
fn mid_circuit_measurements(c: &Circuit) -> Vec<bool> {
    let ops = c.ops();
    let mut flags = vec![false; ops.len()];
    let mut touched_later = vec![false; c.num_qubits()];
    for (pos, op) in ops.iter().enumerate().rev() {
        match op {
            Op::Gate {
                controls, targets, ..
            } => {
                for &q in controls.iter().chain(targets) {
                    touched_later[q] = true;
                }
            }
            Op::Measure { qubit, .. } => flags[pos] = touched_later[*qubit],
            Op::Barrier(_) => {}
        }
    }
    flags
}

/// Counts per rendered bitstring.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotHistogram {
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
    pub seed: u64,
}

impl ShotHistogram {
    pub fn count(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn frequency(&self, key: &str) -> f64 {
        self.count(key) as f64 / self.shots as f64
    }

    /// `bitstring,count,probability`, one row per observed outcome.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bitstring,count,probability\n");
        for (key, &n) in &self.counts {
            let _ = writeln!(
                out,
                "{key},{n},{}",
                format_number(n as f64 / self.shots as f64)
            );
        }
        out
    }
}

/// Draws `shots` samples from `dist` (indexed by outcome) by inverse CDF.
pub fn sample_distribution(dist: &[f64], width: usize, shots: u64, seed: u64) -> ShotHistogram {
    let mut cumulative = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for &p in dist {
        acc += p.max(0.0);
        cumulative.push(acc);
    }
    let total = acc;
    let last_nonzero = dist.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut tallies = vec![0u64; dist.len()];
    let mut rng = rng_from_seed(seed);
    for _ in 0..shots {
        let u = rng.gen::<f64>() * total;
        let idx = cumulative.partition_point(|&c| c <= u).min(last_nonzero);
        tallies[idx] += 1;
    }
    let counts = tallies
        .into_iter()
        .enumerate()
        .filter(|(_, n)| *n > 0)
        .map(|(i, n)| (render_outcome(i, width), n))
        .collect();
    ShotHistogram {
        counts,
        shots,
        seed,
    }
}

/// Samples the marginal over `measured`. Bitstring character `j` is the bit
/// of qubit `measured[j]`.
pub fn sample(s: &StateVector, measured: &[usize], shots: u64, seed: u64) -> Result<ShotHistogram> {
    if measured.is_empty() {
        return Err(Error::EmptyMeasurementSet);
    }
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    for &q in measured {
        if q >= s.num_qubits() {
            return Err(Error::IndexOutOfRange {
                index: q,
                len: s.num_qubits(),
            });
        }
    }
    Ok(sample_distribution(
        &s.marginal(measured),
        measured.len(),
        shots,
        seed,
    ))
}

/// Projects `qubit` onto `outcome` and renormalizes. Returns the state and the
/// pre-selection probability of that outcome.
pub fn postselect(s: &StateVector, qubit: usize, outcome: bool) -> Result<(StateVector, f64)> {
    if qubit >= s.num_qubits() {
        return Err(Error::IndexOutOfRange {
            index: qubit,
            len: s.num_qubits(),
        });
    }
    let mut out = s.clone();
    let p = out.collapse(qubit, outcome)?;
    Ok((out, p))
}

/// `|⟨a|b⟩|²`.
pub fn state_fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.amplitudes.len() != b.amplitudes.len() {
        return Err(Error::DimensionMismatch {
            expected: a.amplitudes.len(),
            got: b.amplitudes.len(),
        });
    }
    let overlap: Complex64 = a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(overlap.norm_sqr().clamp(0.0, 1.0))
}
