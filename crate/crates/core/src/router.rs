//! Deterministic SWAP-insertion router.
//!
//! Logical qubit `i` starts on physical qubit `initial_layout[i]`. Whenever a
//! two-qubit gate is not on a coupling edge, a SWAP is chosen among the edges
//! touching the gate's physical qubits: only SWAPs that bring the pair closer
//! are considered, and among those the one minimizing the summed distance of
//! the next [`LOOKAHEAD`] two-qubit gates wins (ties by edge index). SWAPs are
//! emitted as three CNOTs.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, Measurement};
use crate::error::{QgoError, Result};
use crate::topology::Topology;

pub const LOOKAHEAD: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub logical_to_physical: Vec<usize>,
}

impl Layout {
    pub fn identity(n: usize) -> Self {
        Layout {
            logical_to_physical: (0..n).collect(),
        }
    }

    pub fn physical(&self, logical: usize) -> usize {
        self.logical_to_physical[logical]
    }

    pub fn is_identity(&self) -> bool {
        self.logical_to_physical
            .iter()
            .enumerate()
            .all(|(i, &p)| i == p)
    }

    fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.logical_to_physical.len()];
        self.logical_to_physical
            .iter()
            .all(|&p| p < seen.len() && !std::mem::replace(&mut seen[p], true))
    }
}

#[derive(Clone, Debug)]
pub struct RoutedCircuit {
    /// Acts on physical qubits `0..n` of the topology.
    pub circuit: Circuit,
    pub initial_layout: Layout,
    pub final_layout: Layout,
    pub swaps: usize,
}

/// True iff every two-qubit gate acts on a coupling edge.
pub fn check_mapped(c: &Circuit, t: &Topology) -> bool {
    c.gates
        .iter()
        .filter(|g| g.is_two_qubit())
        .all(|g| t.has_edge(g.qubits[0], g.qubits[1]))
}

/// Routes `c` onto the physical qubits `0..c.num_qubits` of `t`.
///
/// The result is a pure function of `(c, t)`; `seed` is accepted for
/// interface stability and does not influence the outcome.
pub fn route(c: &Circuit, t: &Topology, _seed: u64) -> Result<RoutedCircuit> {
    let n = c.num_qubits;
    if n > t.num_qubits() {
        return Err(QgoError::Routing(format!(
            "circuit needs {n} qubits, topology has {}",
            t.num_qubits()
        )));
    }
    let region = t.restrict(n);
    let lowered = c.lower_swaps();
    if check_mapped(&lowered, &region) {
        return Ok(RoutedCircuit {
            circuit: lowered,
            initial_layout: Layout::identity(n),
            final_layout: Layout::identity(n),
            swaps: 0,
        });
    }
    if !region.is_connected() {
        return Err(QgoError::Routing(format!(
            "physical qubits 0..{n} do not form a connected region"
        )));
    }
    let dist = region.distance_matrix();
    let gates = &lowered.gates;

    let plain = route_pass(gates, &region, &dist, Layout::identity(n));

    let reversed: Vec<Gate> = gates.iter().rev().cloned().collect();
    let backward = route_pass(&reversed, &region, &dist, Layout::identity(n));
    let refined = route_pass(gates, &region, &dist, backward.final_layout);

    let best = if refined.cnots < plain.cnots {
        refined
    } else {
        plain
    };

    let mut out = Circuit::new(n);
    out.gates = best.gates;
    out.num_clbits = lowered.num_clbits;
    out.measurements = lowered
        .measurements
        .iter()
        .map(|m| Measurement {
            qubit: best.final_layout.physical(m.qubit),
            clbit: m.clbit,
        })
        .collect();
    debug_assert!(best.initial_layout.is_permutation());
    Ok(RoutedCircuit {
        circuit: out,
        initial_layout: best.initial_layout,
        final_layout: best.final_layout,
        swaps: best.swaps,
    })
}

struct Pass {
    gates: Vec<Gate>,
    initial_layout: Layout,
    final_layout: Layout,
    swaps: usize,
    cnots: usize,
}

fn route_pass(gates: &[Gate], t: &Topology, dist: &[Vec<usize>], initial: Layout) -> Pass {
    let n = initial.logical_to_physical.len();
    let mut l2p = initial.logical_to_physical.clone();
    let mut p2l = vec![0; n];
    for (l, &p) in l2p.iter().enumerate() {
        p2l[p] = l;
    }
    let two_qubit: Vec<(usize, usize)> = gates
        .iter()
        .filter(|g| g.is_two_qubit())
        .map(|g| (g.qubits[0], g.qubits[1]))
        .collect();
    let mut next_2q = 0;
    let mut out = Vec::with_capacity(gates.len());
    let mut swaps = 0;

    for g in gates {
        if !g.is_two_qubit() {
            out.push(g.relabeled(|q| l2p[q]));
            continue;
        }
        let (a, b) = (g.qubits[0], g.qubits[1]);
        let window = &two_qubit[next_2q..(next_2q + LOOKAHEAD).min(two_qubit.len())];
        while dist[l2p[a]][l2p[b]] > 1 {
            let (pa, pb) = (l2p[a], l2p[b]);
            let current = dist[pa][pb];
            let mut best: Option<(usize, usize)> = None;
            for (ei, &(x, y)) in t.edges().iter().enumerate() {
                if ![x, y].iter().any(|&v| v == pa || v == pb) {
                    continue;
                }
                let moved = |p: usize| {
                    if p == x {
                        y
                    } else if p == y {
                        x
                    } else {
                        p
                    }
                };
                if dist[moved(pa)][moved(pb)] >= current {
                    continue;
                }
                let cost: usize = window
                    .iter()
                    .map(|&(u, v)| dist[moved(l2p[u])][moved(l2p[v])])
                    .sum();
                if best.is_none_or(|(c, _)| cost < c) {
                    best = Some((cost, ei));
                }
            }
            let (_, ei) = best.expect("a shortest-path neighbour edge always exists");
            let (x, y) = t.edges()[ei];
            out.push(Gate::cnot(x, y));
            out.push(Gate::cnot(y, x));
            out.push(Gate::cnot(x, y));
            swaps += 1;
            let (lx, ly) = (p2l[x], p2l[y]);
            p2l.swap(x, y);
            l2p[lx] = y;
            l2p[ly] = x;
        }
        out.push(g.relabeled(|q| l2p[q]));
        next_2q += 1;
    }
    let cnots = out.iter().map(Gate::cnot_cost).sum();
    Pass {
        gates: out,
        initial_layout: initial,
        final_layout: Layout {
            logical_to_physical: l2p,
        },
        swaps,
        cnots,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{simulate, state_infidelity, StateVector};

    fn check_equivalent(c: &Circuit, r: &RoutedCircuit, input: &StateVector) {
        let want = simulate(c, input).unwrap();
        let start = input.permuted(&r.initial_layout.logical_to_physical);
        let got = simulate(&r.circuit, &start).unwrap();
        // physical -> logical: bit at physical p belongs to logical final^-1(p)
        let n = c.num_qubits;
        let mut inv = vec![0; n];
        for (l, &p) in r.final_layout.logical_to_physical.iter().enumerate() {
            inv[p] = l;
        }
        let back = got.permuted(&inv);
        assert!(state_infidelity(&want, &back).unwrap() < 1e-12);
    }

    #[test]
    fn compliant_circuit_unchanged() {
        let t = Topology::line(3);
        let c = Circuit::from_gates(3, [Gate::h(0), Gate::cnot(0, 1), Gate::cnot(2, 1)]).unwrap();
        let r = route(&c, &t, 0).unwrap();
        assert_eq!(r.circuit, c);
        assert!(r.initial_layout.is_identity());
        assert!(r.final_layout.is_identity());
    }

    #[test]
    fn distant_cnot_gets_one_swap() {
        let t = Topology::line(3);
        let c = Circuit::from_gates(3, [Gate::cnot(0, 2)]).unwrap();
        assert!(!check_mapped(&c, &t));
        let r = route(&c, &t, 0).unwrap();
        // the refined initial layout makes the pair adjacent up front
        assert!(r.swaps <= 1);
        assert_eq!(r.circuit.cnot_count(), 1 + 3 * r.swaps);
        assert!(check_mapped(&r.circuit, &t));
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(9);
        for _ in 0..5 {
            check_equivalent(&c, &r, &StateVector::random(3, &mut rng));
        }
    }

    #[test]
    fn check_mapped_cases() {
        let t = Topology::line(3);
        assert!(check_mapped(&Circuit::new(3), &t));
        assert!(!check_mapped(
            &Circuit::from_gates(3, [Gate::cnot(0, 2)]).unwrap(),
            &t
        ));
    }

    #[test]
    fn errors_on_small_or_disconnected_devices() {
        let c = Circuit::from_gates(3, [Gate::cnot(0, 2)]).unwrap();
        assert!(route(&c, &Topology::line(2), 0).is_err());
        let split = Topology::new(3, [(0, 1)]).unwrap();
        assert!(route(&c, &split, 0).is_err());
    }

    #[test]
    fn measurements_follow_final_layout() {
        let t = Topology::line(3);
        let mut c = Circuit::from_gates(3, [Gate::cnot(0, 2)]).unwrap();
        for q in 0..3 {
            c.measure(q, q).unwrap();
        }
        let r = route(&c, &t, 0).unwrap();
        for m in &r.circuit.measurements {
            assert_eq!(r.final_layout.physical(m.clbit), m.qubit);
        }
    }
}
