//! Dense unitary and statevector kernels.
//!
//! Axis convention, used everywhere in the crate: basis index bit `i`
//! belongs to the qubit at sorted position `i` (qubit 0 is the least
//! significant bit). Two-qubit gate matrices are written in the
//! control-major basis `2*b(qubits[0]) + b(qubits[1])`.

mod kernel;
mod state;
mod unitary;

pub(crate) use kernel::{apply_cnot_cols, apply_cnot_rows};
pub use kernel::{apply_gate_rows, apply_matrix2_cols, apply_matrix2_rows};
pub use state::{simulate, state_infidelity, StateVector, MAX_SIM_QUBITS};
pub use unitary::{
    block_unitary, circuit_unitary, distance, gates_unitary, UnitaryMatrix, MAX_UNITARY_QUBITS,
};

use num_complex::Complex64;

use crate::circuit::{Gate, GateKind};
use crate::error::{QgoError, Result};

pub type C64 = Complex64;
pub type Matrix2 = [[C64; 2]; 2];

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> Matrix2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [C64::new(c, 0.0), -C64::from_polar(s, lambda)],
        [C64::from_polar(s, phi), C64::from_polar(c, phi + lambda)],
    ]
}

/// 2x2 matrix of a single-qubit gate.
pub fn single_qubit_matrix(g: &Gate) -> Result<Matrix2> {
    let p = &g.params;
    let m = match g.kind {
        GateKind::Rx => {
            let (s, c) = (p[0] / 2.0).sin_cos();
            [
                [C64::new(c, 0.0), C64::new(0.0, -s)],
                [C64::new(0.0, -s), C64::new(c, 0.0)],
            ]
        }
        GateKind::Ry => {
            let (s, c) = (p[0] / 2.0).sin_cos();
            [
                [C64::new(c, 0.0), C64::new(-s, 0.0)],
                [C64::new(s, 0.0), C64::new(c, 0.0)],
            ]
        }
        GateKind::Rz => [
            [C64::from_polar(1.0, -p[0] / 2.0), ZERO],
            [ZERO, C64::from_polar(1.0, p[0] / 2.0)],
        ],
        GateKind::U3 => u3_matrix(p[0], p[1], p[2]),
        GateKind::H => {
            let r = std::f64::consts::FRAC_1_SQRT_2;
            [
                [C64::new(r, 0.0), C64::new(r, 0.0)],
                [C64::new(r, 0.0), C64::new(-r, 0.0)],
            ]
        }
        GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
        other => {
            return Err(QgoError::InvalidGate(format!(
                "{} is not a single-qubit unitary",
                other.name()
            )))
        }
    };
    Ok(m)
}

pub fn matmul2(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Matrix of a unitary gate: 2x2 for one qubit, 4x4 for two.
pub fn gate_matrix(g: &Gate) -> Result<UnitaryMatrix> {
    match g.kind {
        GateKind::Measure | GateKind::Barrier => Err(QgoError::InvalidGate(format!(
            "{} has no matrix",
            g.kind.name()
        ))),
        GateKind::Cnot | GateKind::Swap => {
            let mut m = UnitaryMatrix::zeros(4);
            let perm: [usize; 4] = if g.kind == GateKind::Cnot {
                [0, 1, 3, 2]
            } else {
                [0, 2, 1, 3]
            };
            for (row, &col) in perm.iter().enumerate() {
                m.set(row, col, ONE);
            }
            Ok(m)
        }
        _ => {
            let m = single_qubit_matrix(g)?;
            Ok(UnitaryMatrix::from_rows(
                2,
                m.iter().flatten().copied().collect(),
            ))
        }
    }
}
