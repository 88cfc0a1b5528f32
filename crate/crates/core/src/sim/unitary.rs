use super::kernel::apply_gate_rows;
use super::{C64, ONE, ZERO};
use crate::circuit::{Circuit, Gate};
use crate::error::{QgoError, Result};
use crate::partition::Block;

/// Largest register for which a full unitary is materialized.
pub const MAX_UNITARY_QUBITS: usize = 12;

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl UnitaryMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn zeros(dim: usize) -> Self {
        UnitaryMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    /// Panics if `data.len() != dim * dim`.
    pub fn from_rows(dim: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), dim * dim, "matrix data has wrong length");
        UnitaryMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: C64) {
        self.data[row * self.dim + col] = v;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.data[c * self.dim + r] = self.data[r * self.dim + c].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(QgoError::DimensionMismatch(self.dim, other.dim));
        }
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> Self {
        UnitaryMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Frobenius norm of `U†U - I`.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.adjoint().matmul(self).expect("square");
        let mut err = 0.0;
        for r in 0..self.dim {
            for c in 0..self.dim {
                let target = if r == c { ONE } else { ZERO };
                err += (p.data[r * self.dim + c] - target).norm_sqr();
            }
        }
        err.sqrt()
    }

    /// Entrywise comparison.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| (a - b).norm() <= tol)
    }

    /// Left-multiplies by `gate`, with circuit qubits mapped to bit positions.
    pub fn apply_gate(&mut self, gate: &Gate, bit_of: impl Fn(usize) -> usize) -> Result<()> {
        let d = self.dim;
        apply_gate_rows(&mut self.data, d, gate, bit_of)
    }
}

/// Phase-invariant distance `1 - |Tr(U†V)| / dim`, clamped to `[0, 1]`.
pub fn distance(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    if u.dim != v.dim {
        return Err(QgoError::DimensionMismatch(u.dim, v.dim));
    }
    // Tr(U†V) = Σ conj(U_ij) V_ij
    let tr: C64 = u.data.iter().zip(&v.data).map(|(a, b)| a.conj() * b).sum();
    Ok((1.0 - tr.norm() / u.dim as f64).clamp(0.0, 1.0))
}

/// Unitary of `gates` acting on `num_qubits` local qubits, with circuit qubits
/// mapped through `bit_of`.
pub fn gates_unitary<'a>(
    num_qubits: usize,
    gates: impl IntoIterator<Item = &'a Gate>,
    bit_of: impl Fn(usize) -> usize,
) -> Result<UnitaryMatrix> {
    if num_qubits > MAX_UNITARY_QUBITS {
        return Err(QgoError::TooManyQubits(num_qubits, MAX_UNITARY_QUBITS));
    }
    let mut u = UnitaryMatrix::identity(1 << num_qubits);
    for g in gates {
        u.apply_gate(g, &bit_of)?;
    }
    Ok(u)
}

/// Full unitary of a (small) circuit; measurements are ignored.
pub fn circuit_unitary(c: &Circuit) -> Result<UnitaryMatrix> {
    gates_unitary(c.num_qubits, &c.gates, |q| q)
}

/// Unitary of a block on its group, qubit at sorted position 0 being the
/// least significant axis.
pub fn block_unitary(block: &Block, source: &Circuit) -> Result<UnitaryMatrix> {
    let group = block.group.qubits();
    let pos = |q: usize| {
        group
            .binary_search(&q)
            .expect("block gate outside its qubit group")
    };
    gates_unitary(
        group.len(),
        block.gates.iter().map(|&i| &source.gates[i]),
        pos,
    )
}
