//! Greedy block partitioning of a mapped circuit.
//!
//! Repeatedly picks the valid qubit group whose executable gate set holds the
//! most CNOTs, emits that set as a block and removes it from the remaining
//! circuit, until nothing is left.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{QgoError, Result};
use crate::router::check_mapped;
use crate::topology::{QubitGroup, Topology};

pub const MIN_BLOCK_QUBITS: usize = 2;
pub const MAX_BLOCK_QUBITS: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub group: QubitGroup,
    /// Indices into the source circuit, in source order.
    pub gates: Vec<usize>,
    pub cnot_count: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub blocks: Vec<Block>,
    pub mapping: Vec<QubitGroup>,
}

/// Number of CNOTs among `gates` (a SWAP counts three).
pub fn score<'a>(gates: impl IntoIterator<Item = &'a Gate>) -> usize {
    gates.into_iter().map(Gate::cnot_cost).sum()
}

/// The not-yet-partitioned remainder of a circuit. Removing an executable
/// set only ever strips a prefix from each qubit's gate chain, so the
/// remainder is a head pointer per qubit.
#[derive(Clone, Debug)]
pub struct PartitionState<'a> {
    circuit: &'a Circuit,
    chains: Vec<Vec<usize>>,
    head: Vec<usize>,
    removed: Vec<bool>,
    remaining: usize,
}

impl<'a> PartitionState<'a> {
    pub fn new(circuit: &'a Circuit) -> Self {
        PartitionState {
            circuit,
            chains: circuit.qubit_chains(),
            head: vec![0; circuit.num_qubits],
            removed: vec![false; circuit.gates.len()],
            remaining: circuit.gates.len(),
        }
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }

    pub fn is_removed(&self, gate: usize) -> bool {
        self.removed[gate]
    }

    /// The largest set of remaining gates executable on `group`: a gate is
    /// included iff all its qubits are in the group and the preceding
    /// remaining gate on each of its qubits is included. Source order.
    pub fn executable_gates(&self, group: &QubitGroup) -> Vec<usize> {
        let qs = group.qubits();
        let mut ptr: Vec<usize> = qs
            .iter()
            .map(|&q| if q < self.head.len() { self.head[q] } else { 0 })
            .collect();
        let chain = |i: usize| -> &[usize] {
            let q = qs[i];
            if q < self.chains.len() {
                &self.chains[q]
            } else {
                &[]
            }
        };
        let mut out = Vec::new();
        loop {
            let mut progress = false;
            for i in 0..qs.len() {
                while let Some(&g) = chain(i).get(ptr[i]) {
                    let gate = &self.circuit.gates[g];
                    if gate.qubits.len() == 1 {
                        out.push(g);
                        ptr[i] += 1;
                        progress = true;
                        continue;
                    }
                    let other = if gate.qubits[0] == qs[i] {
                        gate.qubits[1]
                    } else {
                        gate.qubits[0]
                    };
                    let Some(j) = group.position(other) else {
                        break;
                    };
                    if chain(j).get(ptr[j]) != Some(&g) {
                        break;
                    }
                    out.push(g);
                    ptr[i] += 1;
                    ptr[j] += 1;
                    progress = true;
                }
            }
            if !progress {
                break;
            }
        }
        out.sort_unstable();
        out
    }

    /// Removes an executable set previously returned by `executable_gates`.
    pub fn remove(&mut self, gates: &[usize]) {
        for &g in gates {
            debug_assert!(!self.removed[g]);
            self.removed[g] = true;
            self.remaining -= 1;
            for &q in &self.circuit.gates[g].qubits {
                while self.chains[q]
                    .get(self.head[q])
                    .is_some_and(|&h| self.removed[h])
                {
                    self.head[q] += 1;
                }
            }
        }
    }
}

#[derive(Clone)]
struct Candidate {
    cnots: usize,
    total: usize,
    gates: Vec<usize>,
}

/// Partitions a mapped circuit into blocks of at most `k` qubits.
///
/// Ties on CNOT count are broken by total executable gates and then by the
/// lexicographically smallest group.
pub fn partition(c: &Circuit, t: &Topology, k: usize) -> Result<Partition> {
    if !(MIN_BLOCK_QUBITS..=MAX_BLOCK_QUBITS).contains(&k) {
        return Err(QgoError::Partition(format!(
            "block size {k} outside {MIN_BLOCK_QUBITS}..={MAX_BLOCK_QUBITS}"
        )));
    }
    if c.num_qubits > t.num_qubits() {
        return Err(QgoError::Partition(format!(
            "circuit has {} qubits but topology only {}",
            c.num_qubits,
            t.num_qubits()
        )));
    }
    check_mapped_strict(c, t)?;
    let region = t.restrict(c.num_qubits);
    if c.is_empty() {
        return Ok(Partition::default());
    }
    if k > region.largest_component() {
        return Err(QgoError::Partition(format!(
            "block size {k} exceeds the largest connected component ({})",
            region.largest_component()
        )));
    }
    let groups = region.enumerate_valid_groups(k);
    let mut groups_of_qubit: Vec<Vec<usize>> = vec![Vec::new(); c.num_qubits];
    for (i, g) in groups.iter().enumerate() {
        for &q in g.qubits() {
            groups_of_qubit[q].push(i);
        }
    }

    let mut state = PartitionState::new(c);
    let mut cache: Vec<Option<Candidate>> = vec![None; groups.len()];
    let mut out = Partition::default();

    while state.remaining() > 0 {
        let mut best: Option<(usize, (usize, usize))> = None;
        for (i, group) in groups.iter().enumerate() {
            let cand = cache[i].get_or_insert_with(|| {
                let gates = state.executable_gates(group);
                Candidate {
                    cnots: score(gates.iter().map(|&g| &c.gates[g])),
                    total: gates.len(),
                    gates,
                }
            });
            if cand.total == 0 {
                continue;
            }
            let key = (cand.cnots, cand.total);
            if best.is_none_or(|(_, k)| key > k) {
                best = Some((i, key));
            }
        }
        let Some((b, _)) = best else {
            let stuck = (0..c.gates.len())
                .find(|&g| !state.is_removed(g))
                .unwrap_or(0);
            return Err(QgoError::Partition(format!(
                "gate {stuck} cannot be placed in any connected {k}-qubit group"
            )));
        };
        let chosen = cache[b].take().expect("cached");
        state.remove(&chosen.gates);
        for &q in groups[b].qubits() {
            for &gi in &groups_of_qubit[q] {
                cache[gi] = None;
            }
        }
        out.blocks.push(Block {
            group: groups[b].clone(),
            gates: chosen.gates,
            cnot_count: chosen.cnots,
        });
        out.mapping.push(groups[b].clone());
    }
    Ok(out)
}

fn check_mapped_strict(c: &Circuit, t: &Topology) -> Result<()> {
    if check_mapped(c, t) {
        return Ok(());
    }
    let (i, g) = c
        .gates
        .iter()
        .enumerate()
        .find(|(_, g)| g.is_two_qubit() && !t.has_edge(g.qubits[0], g.qubits[1]))
        .expect("check_mapped failed on some gate");
    Err(QgoError::Unmapped {
        gate: i,
        a: g.qubits[0],
        b: g.qubits[1],
    })
}

impl Partition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Checks coverage, dependency order and group validity against the
    /// source circuit.
    pub fn validate(&self, c: &Circuit, t: &Topology) -> Result<()> {
        let fail = |m: String| Err(QgoError::Invariant(format!("partition: {m}")));
        if self.blocks.len() != self.mapping.len() {
            return fail("mapping length differs from block count".into());
        }
        let mut seen = vec![false; c.gates.len()];
        let mut order = Vec::with_capacity(c.gates.len());
        for (bi, (b, m)) in self.blocks.iter().zip(&self.mapping).enumerate() {
            if &b.group != m {
                return fail(format!("block {bi} group differs from mapping"));
            }
            if !t.is_valid_group(b.group.qubits()) {
                return fail(format!("block {bi} group {:?} is not connected", b.group));
            }
            if b.gates.windows(2).any(|w| w[0] >= w[1]) {
                return fail(format!("block {bi} gates out of source order"));
            }
            if b.cnot_count != score(b.gates.iter().map(|&g| &c.gates[g])) {
                return fail(format!("block {bi} cnot count mismatch"));
            }
            for &g in &b.gates {
                if g >= c.gates.len() || seen[g] {
                    return fail(format!("gate {g} duplicated or out of range"));
                }
                seen[g] = true;
                let gate = &c.gates[g];
                if !gate.qubits.iter().all(|&q| b.group.contains(q)) {
                    return fail(format!("gate {g} leaves block {bi}'s group"));
                }
                if gate.is_two_qubit() && !t.has_edge(gate.qubits[0], gate.qubits[1]) {
                    return fail(format!("gate {g} is not on a topology edge"));
                }
                order.push(g);
            }
        }
        if let Some(g) = seen.iter().position(|s| !s) {
            return fail(format!("gate {g} not covered"));
        }
        let mut projected = vec![Vec::new(); c.num_qubits];
        for &g in &order {
            for &q in &c.gates[g].qubits {
                projected[q].push(g);
            }
        }
        if projected != c.qubit_chains() {
            return fail("per-qubit gate order changed".into());
        }
        Ok(())
    }
}
