use super::{Circuit, Gate, GateKind};
use crate::sim::{matmul2, single_qubit_matrix, Matrix2, C64};

/// Runs whose product is within this distance of the identity are dropped.
const IDENTITY_TOL: f64 = 1e-12;

/// U3 angles `(theta, phi, lambda)` reproducing `m` up to global phase.
pub fn u3_from_matrix(m: &Matrix2) -> (f64, f64, f64) {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let theta = 2.0 * c.norm().atan2(a.norm());
    let eps = 1e-14;
    if c.norm() < eps || b.norm() < eps {
        // diagonal: only phi + lambda is defined
        (theta, 0.0, (d * a.conj()).arg())
    } else if a.norm() < eps || d.norm() < eps {
        // anti-diagonal: only phi - lambda is defined
        (theta, (c * (-b).conj()).arg(), 0.0)
    } else {
        // fix the global phase so that the top-left entry is real
        (theta, (c * a.conj()).arg(), (-b * a.conj()).arg())
    }
}

fn distance_to_identity(m: &Matrix2) -> f64 {
    let tr: C64 = m[0][0] + m[1][1];
    (1.0 - tr.norm() / 2.0).max(0.0)
}

#[derive(Default)]
struct Run {
    gates: Vec<Gate>,
    product: Option<Matrix2>,
}

impl Run {
    fn push(&mut self, g: &Gate) {
        let m = single_qubit_matrix(g).expect("single-qubit gate");
        self.product = Some(match self.product {
            Some(p) => matmul2(&m, &p),
            None => m,
        });
        self.gates.push(g.clone());
    }

    fn flush(&mut self, qubit: usize, out: &mut Vec<Gate>) {
        let Some(p) = self.product.take() else {
            return;
        };
        let gates = std::mem::take(&mut self.gates);
        if distance_to_identity(&p) <= IDENTITY_TOL {
            return;
        }
        if gates.len() == 1 && gates[0].kind == GateKind::U3 {
            out.push(gates.into_iter().next().unwrap());
            return;
        }
        let (t, ph, l) = u3_from_matrix(&p);
        out.push(Gate::u3(qubit, t, ph, l));
    }
}

/// Replaces each maximal run of single-qubit gates on one qubit by at most one
/// U3, dropping runs that multiply to the identity up to global phase.
/// Two-qubit gates are left untouched and in order.
pub fn merge_single_qubit_runs(c: &Circuit) -> Circuit {
    let mut runs: Vec<Run> = (0..c.num_qubits).map(|_| Run::default()).collect();
    let mut gates = Vec::with_capacity(c.gates.len());
    for g in &c.gates {
        if g.is_single_qubit() {
            runs[g.qubits[0]].push(g);
        } else {
            for &q in &g.qubits {
                runs[q].flush(q, &mut gates);
            }
            gates.push(g.clone());
        }
    }
    for (q, run) in runs.iter_mut().enumerate() {
        run.flush(q, &mut gates);
    }
    Circuit {
        num_qubits: c.num_qubits,
        num_clbits: c.num_clbits,
        gates,
        measurements: c.measurements.clone(),
    }
}
