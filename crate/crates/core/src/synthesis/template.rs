use crate::circuit::{Circuit, Gate};
use crate::error::{QgoError, Result};

/// A CNOT skeleton on `k` local qubits with a three-angle single-qubit gate on
/// every qubit up front and on both endpoints after every CNOT.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Template {
    k: usize,
    cnots: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Op {
    /// Single-qubit slot; its angles are `params[3*slot..3*slot+3]`.
    U3 {
        qubit: usize,
        slot: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
}

impl Template {
    pub fn new(k: usize, cnots: Vec<(usize, usize)>) -> Result<Self> {
        for &(c, t) in &cnots {
            if c >= k || t >= k || c == t {
                return Err(QgoError::InvalidArgument(format!(
                    "template CNOT ({c}, {t}) invalid for {k} qubits"
                )));
            }
        }
        Ok(Template { k, cnots })
    }

    /// Zero-CNOT template.
    pub fn root(k: usize) -> Self {
        Template {
            k,
            cnots: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.k
    }

    pub fn cnots(&self) -> &[(usize, usize)] {
        &self.cnots
    }

    pub fn cnot_count(&self) -> usize {
        self.cnots.len()
    }

    pub fn num_slots(&self) -> usize {
        self.k + 2 * self.cnots.len()
    }

    pub fn num_params(&self) -> usize {
        3 * self.num_slots()
    }

    /// The template with one more CNOT at the end.
    pub fn extended(&self, edge: (usize, usize)) -> Template {
        let mut cnots = self.cnots.clone();
        cnots.push(edge);
        Template { k: self.k, cnots }
    }

    pub(crate) fn ops(&self) -> Vec<Op> {
        let mut ops: Vec<Op> = (0..self.k).map(|q| Op::U3 { qubit: q, slot: q }).collect();
        let mut slot = self.k;
        for &(control, target) in &self.cnots {
            ops.push(Op::Cnot { control, target });
            ops.push(Op::U3 {
                qubit: control,
                slot,
            });
            ops.push(Op::U3 {
                qubit: target,
                slot: slot + 1,
            });
            slot += 2;
        }
        ops
    }

    /// Realizes every slot as a U3 gate.
    pub fn instantiate(&self, params: &[f64]) -> Result<Circuit> {
        if params.len() != self.num_params() {
            return Err(QgoError::ParamLength {
                expected: self.num_params(),
                got: params.len(),
            });
        }
        let mut c = Circuit::new(self.k);
        for op in self.ops() {
            let g = match op {
                Op::U3 { qubit, slot } => {
                    let p = &params[3 * slot..3 * slot + 3];
                    Gate::u3(qubit, p[0], p[1], p[2])
                }
                Op::Cnot { control, target } => Gate::cnot(control, target),
            };
            c.push(g)?;
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{merge_single_qubit_runs, GateKind};

    #[test]
    fn zero_cnot_zero_params_is_identity_u3s() {
        let t = Template::root(3);
        let c = t.instantiate(&vec![0.0; t.num_params()]).unwrap();
        assert_eq!(c.len(), 3);
        assert!(c.gates.iter().all(|g| g.kind == GateKind::U3));
        assert!(merge_single_qubit_runs(&c).is_empty());
    }

    #[test]
    fn one_cnot_layout() {
        let t = Template::new(2, vec![(0, 1)]).unwrap();
        assert_eq!(t.num_params(), 3 * 2 + 6);
        let c = t.instantiate(&vec![0.1; t.num_params()]).unwrap();
        assert_eq!(c.cnot_count(), 1);
        assert_eq!(c.single_qubit_count(), 4);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Template::new(2, vec![(0, 2)]).is_err());
        assert!(Template::new(2, vec![(1, 1)]).is_err());
        let t = Template::root(2);
        assert!(matches!(
            t.instantiate(&[0.0; 5]),
            Err(QgoError::ParamLength {
                expected: 6,
                got: 5
            })
        ));
    }
}
