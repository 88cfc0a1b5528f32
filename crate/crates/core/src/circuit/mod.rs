//! Circuit intermediate representation.
//!
//! A [`Circuit`] is an ordered list of unitary [`Gate`]s over `num_qubits`
//! qubits followed by a terminal measurement layer. Gate order is always a
//! valid topological order of the circuit's own dependency DAG.

mod dag;
mod merge;
mod qasm;

pub use dag::{build_dag, DagEdge, DependencyDag};
pub use merge::{merge_single_qubit_runs, u3_from_matrix};
pub use qasm::{parse_qasm, write_qasm};

use serde::{Deserialize, Serialize};

use crate::error::{QgoError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    U3,
    H,
    X,
    Cnot,
    Swap,
    Measure,
    Barrier,
}

impl GateKind {
    pub fn param_arity(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            GateKind::U3 => 3,
            _ => 0,
        }
    }

    /// Number of qubits, or `None` for barriers which take any number.
    pub fn qubit_arity(self) -> Option<usize> {
        match self {
            GateKind::Cnot | GateKind::Swap => Some(2),
            GateKind::Barrier => None,
            _ => Some(1),
        }
    }

    pub fn is_unitary(self) -> bool {
        !matches!(self, GateKind::Measure | GateKind::Barrier)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::U3 => "u3",
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Cnot => "cx",
            GateKind::Swap => "swap",
            GateKind::Measure => "measure",
            GateKind::Barrier => "barrier",
        }
    }
}

/// A single operation. For CNOT the qubits are ordered `(control, target)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub params: Vec<f64>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        let gate = Gate {
            kind,
            qubits,
            params,
        };
        gate.check_shape()?;
        Ok(gate)
    }

    pub fn rx(q: usize, theta: f64) -> Self {
        Self::one(GateKind::Rx, q, vec![theta])
    }

    pub fn ry(q: usize, theta: f64) -> Self {
        Self::one(GateKind::Ry, q, vec![theta])
    }

    pub fn rz(q: usize, theta: f64) -> Self {
        Self::one(GateKind::Rz, q, vec![theta])
    }

    pub fn u3(q: usize, theta: f64, phi: f64, lambda: f64) -> Self {
        Self::one(GateKind::U3, q, vec![theta, phi, lambda])
    }

    pub fn h(q: usize) -> Self {
        Self::one(GateKind::H, q, Vec::new())
    }

    pub fn x(q: usize) -> Self {
        Self::one(GateKind::X, q, Vec::new())
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate {
            kind: GateKind::Cnot,
            qubits: vec![control, target],
            params: Vec::new(),
        }
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Gate {
            kind: GateKind::Swap,
            qubits: vec![a, b],
            params: Vec::new(),
        }
    }

    fn one(kind: GateKind, q: usize, params: Vec<f64>) -> Self {
        Gate {
            kind,
            qubits: vec![q],
            params,
        }
    }

    pub fn is_single_qubit(&self) -> bool {
        self.kind.is_unitary() && self.qubits.len() == 1
    }

    pub fn is_two_qubit(&self) -> bool {
        self.kind.is_unitary() && self.qubits.len() == 2
    }

    /// CNOT-equivalent cost: a SWAP is three CNOTs.
    pub fn cnot_cost(&self) -> usize {
        match self.kind {
            GateKind::Cnot => 1,
            GateKind::Swap => 3,
            _ => 0,
        }
    }

    /// Same gate with qubits renamed through `map`.
    pub fn relabeled(&self, map: impl Fn(usize) -> usize) -> Gate {
        Gate {
            kind: self.kind,
            qubits: self.qubits.iter().map(|&q| map(q)).collect(),
            params: self.params.clone(),
        }
    }

    fn check_shape(&self) -> Result<()> {
        if self.params.len() != self.kind.param_arity() {
            return Err(QgoError::InvalidGate(format!(
                "{} takes {} parameter(s), got {}",
                self.kind.name(),
                self.kind.param_arity(),
                self.params.len()
            )));
        }
        if let Some(arity) = self.kind.qubit_arity() {
            if self.qubits.len() != arity {
                return Err(QgoError::InvalidGate(format!(
                    "{} acts on {} qubit(s), got {}",
                    self.kind.name(),
                    arity,
                    self.qubits.len()
                )));
            }
        }
        for (i, q) in self.qubits.iter().enumerate() {
            if self.qubits[..i].contains(q) {
                return Err(QgoError::InvalidGate(format!(
                    "{} repeats qubit {q}",
                    self.kind.name()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measurement {
    pub qubit: usize,
    pub clbit: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub num_clbits: usize,
    pub gates: Vec<Gate>,
    pub measurements: Vec<Measurement>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            num_clbits: 0,
            gates: Vec::new(),
            measurements: Vec::new(),
        }
    }

    /// Builds a circuit from unitary gates, validating each.
    pub fn from_gates(num_qubits: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut c = Circuit::new(num_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    /// Appends a gate. Barriers are dropped and measurements go to the
    /// measurement layer, allocating a classical bit equal to the qubit index.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.check_shape()?;
        for &q in &gate.qubits {
            if q >= self.num_qubits {
                return Err(QgoError::InvalidGate(format!(
                    "qubit {q} out of range for {} qubits",
                    self.num_qubits
                )));
            }
        }
        match gate.kind {
            GateKind::Barrier => Ok(()),
            GateKind::Measure => {
                let q = gate.qubits[0];
                self.measure(q, q)
            }
            _ => {
                if let Some(&q) = gate.qubits.iter().find(|&&q| self.is_measured(q)) {
                    return Err(QgoError::GateAfterMeasurement { line: 0, qubit: q });
                }
                self.gates.push(gate);
                Ok(())
            }
        }
    }

    pub fn measure(&mut self, qubit: usize, clbit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(QgoError::InvalidGate(format!(
                "measured qubit {qubit} out of range"
            )));
        }
        self.num_clbits = self.num_clbits.max(clbit + 1);
        self.measurements.push(Measurement { qubit, clbit });
        Ok(())
    }

    pub fn is_measured(&self, qubit: usize) -> bool {
        self.measurements.iter().any(|m| m.qubit == qubit)
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// CNOT count, with SWAPs counted as three.
    pub fn cnot_count(&self) -> usize {
        self.gates.iter().map(Gate::cnot_cost).sum()
    }

    pub fn single_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_single_qubit()).count()
    }

    /// Longest chain of gates sharing qubits.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.num_qubits];
        for g in &self.gates {
            let d = g.qubits.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
            for &q in &g.qubits {
                level[q] = d;
            }
        }
        level.into_iter().max().unwrap_or(0)
    }

    /// Replaces each SWAP by three CNOTs.
    pub fn lower_swaps(&self) -> Circuit {
        let mut out = Circuit {
            gates: Vec::with_capacity(self.gates.len()),
            ..self.clone()
        };
        for g in &self.gates {
            if g.kind == GateKind::Swap {
                let (a, b) = (g.qubits[0], g.qubits[1]);
                out.gates.push(Gate::cnot(a, b));
                out.gates.push(Gate::cnot(b, a));
                out.gates.push(Gate::cnot(a, b));
            } else {
                out.gates.push(g.clone());
            }
        }
        out
    }

    /// The same circuit without its measurement layer.
    pub fn without_measurements(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            num_clbits: 0,
            gates: self.gates.clone(),
            measurements: Vec::new(),
        }
    }

    /// Per-qubit sequence of gate indices.
    pub fn qubit_chains(&self) -> Vec<Vec<usize>> {
        let mut chains = vec![Vec::new(); self.num_qubits];
        for (i, g) in self.gates.iter().enumerate() {
            for &q in &g.qubits {
                chains[q].push(i);
            }
        }
        chains
    }

    pub fn validate(&self) -> Result<()> {
        for (i, g) in self.gates.iter().enumerate() {
            g.check_shape()?;
            if !g.kind.is_unitary() {
                return Err(QgoError::InvalidGate(format!(
                    "gate {i} ({}) is not unitary",
                    g.kind.name()
                )));
            }
            if let Some(&q) = g.qubits.iter().find(|&&q| q >= self.num_qubits) {
                return Err(QgoError::InvalidGate(format!(
                    "gate {i} uses qubit {q} out of {}",
                    self.num_qubits
                )));
            }
        }
        for m in &self.measurements {
            if m.qubit >= self.num_qubits || m.clbit >= self.num_clbits {
                return Err(QgoError::InvalidGate(format!(
                    "measurement {m:?} out of range"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_shape_is_checked() {
        assert!(Gate::new(GateKind::Rz, vec![0], vec![]).is_err());
        assert!(Gate::new(GateKind::Cnot, vec![1, 1], vec![]).is_err());
        assert!(Gate::new(GateKind::U3, vec![0], vec![0.0, 0.1, 0.2]).is_ok());
    }

    #[test]
    fn gate_after_measurement_is_rejected() {
        let mut c = Circuit::new(2);
        c.measure(0, 0).unwrap();
        assert!(c.push(Gate::h(1)).is_ok());
        assert!(matches!(
            c.push(Gate::cnot(1, 0)),
            Err(QgoError::GateAfterMeasurement { qubit: 0, .. })
        ));
    }

    #[test]
    fn swaps_lower_to_three_cnots() {
        let c = Circuit::from_gates(3, [Gate::swap(0, 2), Gate::h(1)]).unwrap();
        assert_eq!(c.cnot_count(), 3);
        let lowered = c.lower_swaps();
        assert_eq!(lowered.len(), 4);
        assert!(lowered.gates[..3].iter().all(|g| g.kind == GateKind::Cnot));
        assert_eq!(lowered.cnot_count(), 3);
    }

    #[test]
    fn depth_counts_longest_chain() {
        let c =
            Circuit::from_gates(3, [Gate::h(0), Gate::h(1), Gate::cnot(0, 1), Gate::x(2)]).unwrap();
        assert_eq!(c.depth(), 2);
    }
}
