use super::Circuit;

/// `from` is the previous gate on `qubit` before `to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DagEdge {
    pub from: usize,
    pub to: usize,
    pub qubit: usize,
}

/// Gate dependency graph: one node per gate, one edge per qubit hand-off.
#[derive(Clone, Debug)]
pub struct DependencyDag {
    num_gates: usize,
    preds: Vec<Vec<DagEdge>>,
    succs: Vec<Vec<DagEdge>>,
}

impl DependencyDag {
    pub fn build(c: &Circuit) -> Self {
        let n = c.gates.len();
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        let mut last: Vec<Option<usize>> = vec![None; c.num_qubits];
        for (i, g) in c.gates.iter().enumerate() {
            for &q in &g.qubits {
                if let Some(p) = last[q] {
                    let e = DagEdge {
                        from: p,
                        to: i,
                        qubit: q,
                    };
                    preds[i].push(e);
                    succs[p].push(e);
                }
                last[q] = Some(i);
            }
        }
        DependencyDag {
            num_gates: n,
            preds,
            succs,
        }
    }

    pub fn num_gates(&self) -> usize {
        self.num_gates
    }

    pub fn predecessors(&self, gate: usize) -> &[DagEdge] {
        &self.preds[gate]
    }

    pub fn successors(&self, gate: usize) -> &[DagEdge] {
        &self.succs[gate]
    }

    pub fn edges(&self) -> impl Iterator<Item = DagEdge> + '_ {
        self.succs.iter().flatten().copied()
    }

    /// Gates with no incoming edges.
    pub fn frontier(&self) -> Vec<usize> {
        (0..self.num_gates)
            .filter(|&i| self.preds[i].is_empty())
            .collect()
    }

    /// Kahn's algorithm, always taking the smallest ready index.
    pub fn topological_order(&self) -> Vec<usize> {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;
        let mut indeg: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut ready: BinaryHeap<Reverse<usize>> =
            self.frontier().into_iter().map(Reverse).collect();
        let mut order = Vec::with_capacity(self.num_gates);
        while let Some(Reverse(g)) = ready.pop() {
            order.push(g);
            for e in &self.succs[g] {
                indeg[e.to] -= 1;
                if indeg[e.to] == 0 {
                    ready.push(Reverse(e.to));
                }
            }
        }
        order
    }
}

/// Builds the dependency DAG of `c` (measurements are not nodes).
pub fn build_dag(c: &Circuit) -> DependencyDag {
    DependencyDag::build(c)
}
