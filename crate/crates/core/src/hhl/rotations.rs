//! Uniformly controlled rotations, amplitude encoding and eigenvalue inversion.
//!
//! A multiplexed rotation applies `R(α_m)` to a target for every value `m` of
//! its control register. It is expanded recursively into single-qubit
//! rotations and CNOTs, so no gate ever touches more than two qubits.

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::linalg::ComplexVector;
use crate::statevector::NORM_TOL;

/// Angles below this are dropped from the emitted circuit.
const ANGLE_EPS: f64 = 1e-15;

#[derive(Clone, Copy)]
enum Axis {
    Y,
    Z,
}

/// Appends a rotation of `target` by `angles[m]`, where bit `i` of `m` is the
/// value of `controls[i]`.
fn multiplexed(
    c: &mut Circuit,
    axis: Axis,
    controls: &[usize],
    target: usize,
    angles: &[f64],
) -> Result<()> {
    debug_assert_eq!(angles.len(), 1 << controls.len());
    if angles.iter().all(|a| a.abs() < ANGLE_EPS) {
        return Ok(());
    }
    let Some((&top, lower)) = controls.split_last() else {
        return match axis {
            Axis::Y => c.ry(angles[0], target),
            Axis::Z => c.rz(angles[0], target),
        };
    };
    let half = angles.len() / 2;
    let (lo, hi) = angles.split_at(half);
    let sum: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| (a + b) / 2.0).collect();
    let diff: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| (a - b) / 2.0).collect();
    multiplexed(c, axis, lower, target, &sum)?;
    if diff.iter().any(|a| a.abs() >= ANGLE_EPS) {
        // X R(β) X = R(−β) for both axes.
        c.cx(top, target)?;
        multiplexed(c, axis, lower, target, &diff)?;
        c.cx(top, target)?;
    }
    Ok(())
}

/// Uniformly controlled `RY`.
pub fn multiplexed_ry(
    c: &mut Circuit,
    controls: &[usize],
    target: usize,
    angles: &[f64],
) -> Result<()> {
    multiplexed(c, Axis::Y, controls, target, angles)
}

/// Uniformly controlled `RZ`.
pub fn multiplexed_rz(
    c: &mut Circuit,
    controls: &[usize],
    target: usize,
    angles: &[f64],
) -> Result<()> {
    multiplexed(c, Axis::Z, controls, target, angles)
}

fn check_amplitudes(v: &ComplexVector) -> Result<usize> {
    let dim = v.dim();
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    let norm = v.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Circuit on `log2(dim)` qubits mapping `|0…0⟩` to `v` up to global phase.
///
/// Magnitudes are loaded top-down: the most significant qubit first, then each
/// lower qubit with an `RY` multiplexed on the qubits above it. Relative phases
/// are then fixed bottom-up with multiplexed `RZ`s. A basis state is emitted
/// as plain `X` gates.
pub fn prepare_state(v: &ComplexVector) -> Result<Circuit> {
    let k = check_amplitudes(v)?;
    let mut c = Circuit::new(k, 0);
    let amps = v.as_slice();

    if let Some(idx) = amps.iter().position(|z| (z.norm() - 1.0).abs() <= NORM_TOL) {
        for q in 0..k {
            if idx >> q & 1 == 1 {
                c.x(q)?;
            }
        }
        return Ok(c);
    }

    // weights[p] = squared norm of the amplitudes whose bits above `q` equal p.
    let probs: Vec<f64> = amps.iter().map(|z| z.norm_sqr()).collect();
    for q in (0..k).rev() {
        let controls: Vec<usize> = (q + 1..k).collect();
        let groups = 1usize << controls.len();
        let mut angles = vec![0.0; groups];
        for (p, angle) in angles.iter_mut().enumerate() {
            let (mut w0, mut w1) = (0.0, 0.0);
            for low in 0..1usize << q {
                w0 += probs[(p << (q + 1)) | low];
                w1 += probs[(p << (q + 1)) | (1 << q) | low];
            }
            *angle = 2.0 * w1.sqrt().atan2(w0.sqrt());
        }
        multiplexed_ry(&mut c, &controls, q, &angles)?;
    }

    let mut phases: Vec<f64> = amps.iter().map(|z| z.arg()).collect();
    for q in 0..k {
        let controls: Vec<usize> = (q + 1..k).collect();
        let angles: Vec<f64> = phases.chunks(2).map(|p| p[1] - p[0]).collect();
        multiplexed_rz(&mut c, &controls, q, &angles)?;
        phases = phases.chunks(2).map(|p| (p[0] + p[1]) / 2.0).collect();
    }
    Ok(c)
}

/// How clock values are read as eigenvalue estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockEncoding {
    /// `m ∈ [0, 2^n)`.
    Unsigned,
    /// Two's complement, `m ∈ [−2^{n−1}, 2^{n−1})`, for indefinite spectra.
    Signed,
}

impl ClockEncoding {
    pub fn decode(self, value: usize, n_clock: usize) -> i64 {
        let v = value as i64;
        match self {
            ClockEncoding::Unsigned => v,
            ClockEncoding::Signed if v >= 1 << (n_clock - 1) => v - (1 << n_clock),
            ClockEncoding::Signed => v,
        }
    }

    /// Exclusive bound on `|λ̃|` for an `n`-qubit clock.
    pub fn capacity(self, n_clock: usize) -> f64 {
        match self {
            ClockEncoding::Unsigned => (1u64 << n_clock) as f64,
            ClockEncoding::Signed => (1u64 << (n_clock - 1)) as f64,
        }
    }
}

/// Ancilla angle for clock value `m`: `2·arcsin(C/m)`, or no rotation when
/// `m = 0` or `|C/m| > 1`.
pub fn inversion_angle(m: i64, c: f64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let ratio = c / m as f64;
    if ratio.abs() > 1.0 + 1e-12 {
        return 0.0;
    }
    2.0 * ratio.clamp(-1.0, 1.0).asin()
}

/// Eigenvalue inversion on `1 + n_clock` qubits: ancilla on qubit 0, clock
/// value `m` on qubits `1..=n_clock` (little-endian). Maps
/// `|m⟩|0⟩ ↦ |m⟩(√(1−C²/m²)|0⟩ + (C/m)|1⟩)`.
pub fn build_eigeninversion(n_clock: usize, c: f64) -> Result<Circuit> {
    build_eigeninversion_encoded(n_clock, c, ClockEncoding::Unsigned)
}

pub fn build_eigeninversion_encoded(
    n_clock: usize,
    c: f64,
    encoding: ClockEncoding,
) -> Result<Circuit> {
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::InvalidC(c));
    }
    if n_clock == 0 {
        return Err(Error::InvalidParameter(
            "eigenvalue inversion needs a clock".into(),
        ));
    }
    let angles: Vec<f64> = (0..1usize << n_clock)
        .map(|v| inversion_angle(encoding.decode(v, n_clock), c))
        .collect();
    let mut circ = Circuit::new(n_clock + 1, 0);
    let controls: Vec<usize> = (1..=n_clock).collect();
    multiplexed_ry(&mut circ, &controls, 0, &angles)?;
    Ok(circ)
}
