//! In-place amplitude updates shared by the statevector and density-matrix
//! backends. A gate touches only the amplitude groups selected by its
//! control/target bit masks; no `2^n × 2^n` matrix is ever formed.

use num_complex::Complex64;

use crate::linalg::{ComplexMatrix, ZERO};

/// Applies `m` (acting on `targets`, first target = least significant bit of
/// `m`'s index) to every amplitude group whose control bits are all set.
pub(crate) fn apply_controlled(
    amps: &mut [Complex64],
    m: &ComplexMatrix,
    controls: &[usize],
    targets: &[usize],
) {
    let ctrl_mask = controls.iter().fold(0usize, |acc, &q| acc | (1 << q));
    if targets.len() == 1 {
        apply_single(amps, m, ctrl_mask, targets[0]);
        return;
    }
    let tgt_mask = targets.iter().fold(0usize, |acc, &q| acc | (1 << q));
    let block = 1usize << targets.len();
    let offsets: Vec<usize> = (0..block)
        .map(|j| {
            targets
                .iter()
                .enumerate()
                .filter(|(b, _)| j >> b & 1 == 1)
                .fold(0, |acc, (_, &q)| acc | (1 << q))
        })
        .collect();
    let mut gathered = vec![ZERO; block];
    for base in 0..amps.len() {
        if base & tgt_mask != 0 || base & ctrl_mask != ctrl_mask {
            continue;
        }
        for (g, off) in gathered.iter_mut().zip(&offsets) {
            *g = amps[base | off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (c, g) in gathered.iter().enumerate() {
                acc += m[(r, c)] * g;
            }
            amps[base | off] = acc;
        }
    }
}

fn apply_single(amps: &mut [Complex64], m: &ComplexMatrix, ctrl_mask: usize, target: usize) {
    let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let bit = 1usize << target;
    for i0 in 0..amps.len() {
        if i0 & bit != 0 || i0 & ctrl_mask != ctrl_mask {
            continue;
        }
        let i1 = i0 | bit;
        let a0 = amps[i0];
        let a1 = amps[i1];
        amps[i0] = m00 * a0 + m01 * a1;
        amps[i1] = m10 * a0 + m11 * a1;
    }
}
