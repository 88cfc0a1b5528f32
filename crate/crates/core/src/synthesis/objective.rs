//! Distance objective `1 - |Tr(T† U(params))| / d` for a template.
//!
//! Finite-difference gradients perturb one slot at a time. Only that slot's
//! 2x2 gate changes, so with the prefix product `P` (ops before the slot) and
//! suffix `Q = T† · (ops after the slot)` the trace is
//! `Tr(g · R)` where `R` is the partial trace of `P·Q` onto the slot's qubit.
//! Each perturbed evaluation then costs a 2x2 contraction.

use super::template::{Op, Template};
use crate::sim::{
    apply_cnot_cols, apply_cnot_rows, apply_matrix2_cols, apply_matrix2_rows, u3_matrix, Matrix2,
    UnitaryMatrix, C64,
};

pub const FD_STEP: f64 = 1e-7;

pub(crate) struct Objective {
    ops: Vec<Op>,
    dim: usize,
    target_adj: Vec<C64>,
}

impl Objective {
    pub fn new(template: &Template, target: &UnitaryMatrix) -> Self {
        Objective {
            ops: template.ops(),
            dim: target.dim(),
            target_adj: target.adjoint().as_slice().to_vec(),
        }
    }

    fn identity(&self) -> Vec<C64> {
        let d = self.dim;
        let mut m = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            m[i * d + i] = C64::new(1.0, 0.0);
        }
        m
    }

    fn slot_matrix(params: &[f64], slot: usize) -> Matrix2 {
        u3_matrix(params[3 * slot], params[3 * slot + 1], params[3 * slot + 2])
    }

    fn finish(&self, tr: C64) -> f64 {
        (1.0 - tr.norm() / self.dim as f64).max(0.0)
    }

    pub fn value(&self, params: &[f64]) -> f64 {
        let d = self.dim;
        let mut u = self.identity();
        for op in &self.ops {
            match *op {
                Op::U3 { qubit, slot } => {
                    apply_matrix2_rows(&mut u, d, qubit, &Self::slot_matrix(params, slot))
                }
                Op::Cnot { control, target } => apply_cnot_rows(&mut u, d, control, target),
            }
        }
        // Tr(T† U) = Σ_ij (T†)_ij U_ji
        let mut tr = C64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                tr += self.target_adj[i * d + j] * u[j * d + i];
            }
        }
        self.finish(tr)
    }

    /// Objective and its central-difference gradient.
    pub fn value_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let d = self.dim;
        let m = self.ops.len();
        // prefixes[j] = product of ops before j (only kept for U3 ops)
        let mut prefixes: Vec<Option<Vec<C64>>> = vec![None; m];
        let mut p = self.identity();
        for (j, op) in self.ops.iter().enumerate() {
            match *op {
                Op::U3 { qubit, slot } => {
                    prefixes[j] = Some(p.clone());
                    apply_matrix2_rows(&mut p, d, qubit, &Self::slot_matrix(params, slot));
                }
                Op::Cnot { control, target } => apply_cnot_rows(&mut p, d, control, target),
            }
        }
        let mut tr_full = C64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                tr_full += self.target_adj[i * d + j] * p[j * d + i];
            }
        }
        let value = self.finish(tr_full);

        let mut grad = vec![0.0; params.len()];
        let mut q = self.target_adj.clone();
        let mut probe = params.to_vec();
        for j in (0..m).rev() {
            match self.ops[j] {
                Op::Cnot { control, target } => apply_cnot_cols(&mut q, d, control, target),
                Op::U3 { qubit, slot } => {
                    let pre = prefixes[j].as_ref().expect("prefix stored for slot");
                    let r = reduced(pre, &q, d, qubit);
                    for a in 0..3 {
                        let idx = 3 * slot + a;
                        let x = params[idx];
                        probe[idx] = x + FD_STEP;
                        let fp = self.finish(contract(&Self::slot_matrix(&probe, slot), &r));
                        probe[idx] = x - FD_STEP;
                        let fm = self.finish(contract(&Self::slot_matrix(&probe, slot), &r));
                        probe[idx] = x;
                        grad[idx] = (fp - fm) / (2.0 * FD_STEP);
                    }
                    apply_matrix2_cols(&mut q, d, qubit, &Self::slot_matrix(params, slot));
                }
            }
        }
        (value, grad)
    }
}

/// `R[b][a] = Σ_rest (P·Q)[(b,rest), (a,rest)]` on `bit`.
fn reduced(p: &[C64], q: &[C64], d: usize, bit: usize) -> Matrix2 {
    let stride = 1usize << bit;
    let mut r = [[C64::new(0.0, 0.0); 2]; 2];
    for base in 0..d {
        if base & stride != 0 {
            continue;
        }
        let rows = [base, base | stride];
        for (b, &row) in rows.iter().enumerate() {
            let prow = &p[row * d..(row + 1) * d];
            for (a, &col) in rows.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (s, &pv) in prow.iter().enumerate() {
                    acc += pv * q[s * d + col];
                }
                r[b][a] += acc;
            }
        }
    }
    r
}

/// `Tr(g · R) = Σ_ab g[a][b] R[b][a]`.
fn contract(g: &Matrix2, r: &Matrix2) -> C64 {
    g[0][0] * r[0][0] + g[0][1] * r[1][0] + g[1][0] * r[0][1] + g[1][1] * r[1][1]
}
