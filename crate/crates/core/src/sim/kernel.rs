//! In-place gate application on row-major complex buffers.
//!
//! A buffer holds `dim` rows of `ncols` entries. Left-multiplying by a gate
//! mixes rows; a statevector is the `ncols == 1` case.

use super::{single_qubit_matrix, Matrix2, C64};
use crate::circuit::{Gate, GateKind};
use crate::error::Result;

/// `data <- (m on bit) · data`.
pub fn apply_matrix2_rows(data: &mut [C64], ncols: usize, bit: usize, m: &Matrix2) {
    let dim = data.len() / ncols;
    let stride = 1usize << bit;
    for base in 0..dim {
        if base & stride != 0 {
            continue;
        }
        let r0 = base * ncols;
        let r1 = (base | stride) * ncols;
        for c in 0..ncols {
            let a = data[r0 + c];
            let b = data[r1 + c];
            data[r0 + c] = m[0][0] * a + m[0][1] * b;
            data[r1 + c] = m[1][0] * a + m[1][1] * b;
        }
    }
}

/// `data <- data · (m on bit)` for a square `dim x dim` buffer.
pub fn apply_matrix2_cols(data: &mut [C64], dim: usize, bit: usize, m: &Matrix2) {
    let stride = 1usize << bit;
    for r in 0..dim {
        let row = &mut data[r * dim..(r + 1) * dim];
        for c0 in 0..dim {
            if c0 & stride != 0 {
                continue;
            }
            let c1 = c0 | stride;
            let a = row[c0];
            let b = row[c1];
            row[c0] = a * m[0][0] + b * m[1][0];
            row[c1] = a * m[0][1] + b * m[1][1];
        }
    }
}

fn swap_rows(data: &mut [C64], ncols: usize, i: usize, j: usize) {
    for c in 0..ncols {
        data.swap(i * ncols + c, j * ncols + c);
    }
}

pub(crate) fn apply_cnot_rows(data: &mut [C64], ncols: usize, control: usize, target: usize) {
    let dim = data.len() / ncols;
    let (cm, tm) = (1usize << control, 1usize << target);
    for i in 0..dim {
        if i & cm != 0 && i & tm == 0 {
            swap_rows(data, ncols, i, i | tm);
        }
    }
}

pub(crate) fn apply_cnot_cols(data: &mut [C64], dim: usize, control: usize, target: usize) {
    let (cm, tm) = (1usize << control, 1usize << target);
    for r in 0..dim {
        let row = &mut data[r * dim..(r + 1) * dim];
        for c in 0..dim {
            if c & cm != 0 && c & tm == 0 {
                row.swap(c, c | tm);
            }
        }
    }
}

fn apply_swap_rows(data: &mut [C64], ncols: usize, a: usize, b: usize) {
    let dim = data.len() / ncols;
    let (am, bm) = (1usize << a, 1usize << b);
    for i in 0..dim {
        if i & am != 0 && i & bm == 0 {
            swap_rows(data, ncols, i, (i & !am) | bm);
        }
    }
}

/// Applies a unitary gate whose qubits have already been mapped to bit
/// positions through `bit_of`.
pub fn apply_gate_rows(
    data: &mut [C64],
    ncols: usize,
    gate: &Gate,
    bit_of: impl Fn(usize) -> usize,
) -> Result<()> {
    match gate.kind {
        GateKind::Cnot => {
            apply_cnot_rows(data, ncols, bit_of(gate.qubits[0]), bit_of(gate.qubits[1]))
        }
        GateKind::Swap => {
            apply_swap_rows(data, ncols, bit_of(gate.qubits[0]), bit_of(gate.qubits[1]))
        }
        _ => {
            let m = single_qubit_matrix(gate)?;
            apply_matrix2_rows(data, ncols, bit_of(gate.qubits[0]), &m);
        }
    }
    Ok(())
}
