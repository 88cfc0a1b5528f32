//! Best-first search over CNOT skeletons with numerically fitted single-qubit
//! gates.

mod objective;
mod optimize;
mod template;

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use objective::FD_STEP;
pub use optimize::{
    optimize_params, optimize_params_with, OptimizeConfig, GRAD_TOL, MAX_ITERS, RESTARTS,
};
pub use template::Template;

use crate::circuit::{merge_single_qubit_runs, Circuit};
use crate::error::{QgoError, Result};
use crate::seed::{derive_seed, splitmix};
use crate::sim::{circuit_unitary, distance, UnitaryMatrix};
use crate::topology::{QubitGroup, Topology};

pub const DEFAULT_THRESHOLD: f64 = 1e-10;
pub const DEFAULT_TIME_BUDGET: Duration = Duration::from_secs(60);
pub const DEFAULT_MAX_NODES: usize = 200;

#[derive(Clone, Debug)]
pub struct SynthesisConfig {
    pub threshold: f64,
    /// Largest CNOT count worth exploring. `None` means unbounded.
    pub cnot_budget: Option<usize>,
    pub time_budget: Duration,
    /// Cap on templates optimized. Unlike the time budget this is
    /// deterministic.
    pub max_nodes: usize,
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            threshold: DEFAULT_THRESHOLD,
            cnot_budget: None,
            time_budget: DEFAULT_TIME_BUDGET,
            max_nodes: DEFAULT_MAX_NODES,
            seed: 0,
            restarts: RESTARTS,
            max_iters: MAX_ITERS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SynthesisStatus {
    Solved,
    FellBackToOriginal,
    BudgetExceeded,
}

impl SynthesisStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SynthesisStatus::Solved => "Solved",
            SynthesisStatus::FellBackToOriginal => "FellBackToOriginal",
            SynthesisStatus::BudgetExceeded => "BudgetExceeded",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisResult {
    /// Circuit on the block's local qubits.
    pub circuit: Circuit,
    pub distance: f64,
    pub cnot_count: usize,
    pub status: SynthesisStatus,
    pub nodes_expanded: usize,
}

impl SynthesisResult {
    /// Result standing for "use the original gates".
    pub fn fallback(original: Circuit) -> Self {
        SynthesisResult {
            cnot_count: original.cnot_count(),
            circuit: original,
            distance: 0.0,
            status: SynthesisStatus::FellBackToOriginal,
            nodes_expanded: 0,
        }
    }

    pub fn is_solved(&self) -> bool {
        self.status == SynthesisStatus::Solved
    }
}

struct Node {
    distance: f64,
    cnots: usize,
    order: usize,
    template: Template,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap is a max-heap; reverse so the smallest key pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .distance
            .total_cmp(&self.distance)
            .then(other.cnots.cmp(&self.cnots))
            .then(other.order.cmp(&self.order))
    }
}

/// Seed for block `index` under a global seed.
pub fn block_seed(global: u64, index: usize) -> u64 {
    derive_seed(global, index as u64)
}

fn template_seed(seed: u64, tpl: &Template) -> u64 {
    let mut h = splitmix(seed);
    for &(c, t) in tpl.cnots() {
        h = splitmix(h ^ ((c as u64) << 32 | t as u64));
    }
    h
}

struct Evaluated {
    params: Vec<f64>,
    distance: f64,
}

/// Searches for the shortest CNOT skeleton on the group's induced edges that
/// reproduces `target` within `cfg.threshold`.
pub fn synthesize(
    target: &UnitaryMatrix,
    group: &QubitGroup,
    t: &Topology,
    cfg: &SynthesisConfig,
) -> Result<SynthesisResult> {
    let k = group.len();
    if k == 0 || target.dim() != 1usize << k {
        return Err(QgoError::DimensionMismatch(target.dim(), 1usize << k));
    }
    if !t.is_valid_group(group.qubits()) {
        return Err(QgoError::InvalidArgument(format!(
            "group {:?} is not connected on the topology",
            group.qubits()
        )));
    }
    let mut edges = Vec::new();
    for (a, b) in group.local_edges(t) {
        edges.push((a, b));
        edges.push((b, a));
    }
    let opt = OptimizeConfig {
        restarts: cfg.restarts,
        max_iters: cfg.max_iters,
        good_enough: cfg.threshold,
    };
    let start = Instant::now();
    let evaluate = |tpl: &Template| -> Result<Evaluated> {
        let (params, distance) =
            optimize_params_with(tpl, target, template_seed(cfg.seed, tpl), &opt)?;
        Ok(Evaluated { params, distance })
    };
    // Independent re-check of a candidate that claims to meet the threshold.
    let verify = |tpl: &Template, ev: &Evaluated| -> Result<Option<(Circuit, f64)>> {
        let circuit = tpl.instantiate(&ev.params)?;
        let d = distance(target, &circuit_unitary(&circuit)?)?;
        if d <= cfg.threshold {
            let merged = merge_single_qubit_runs(&circuit);
            let dm = distance(target, &circuit_unitary(&merged)?)?;
            if dm <= cfg.threshold {
                return Ok(Some((merged, dm)));
            }
            return Ok(Some((circuit, d)));
        }
        Ok(None)
    };

    let root = Template::root(k);
    let ev = evaluate(&root)?;
    let mut nodes = 1usize;
    let mut best = (ev.distance, root.clone(), ev.params.clone());
    if ev.distance <= cfg.threshold {
        if let Some((circuit, d)) = verify(&root, &ev)? {
            return Ok(solved(circuit, d, nodes));
        }
    }
    let mut heap = BinaryHeap::new();
    let mut visited: HashSet<Vec<(usize, usize)>> = HashSet::new();
    visited.insert(Vec::new());
    let mut order = 0usize;
    heap.push(Node {
        distance: ev.distance,
        cnots: 0,
        order,
        template: root,
    });
    let budget = cfg.cnot_budget.unwrap_or(usize::MAX);

    while let Some(node) = heap.pop() {
        if node.cnots >= budget {
            continue;
        }
        let mut solved_children: Vec<(f64, usize, Circuit)> = Vec::new();
        for &edge in &edges {
            if node.template.cnots().last() == Some(&edge) {
                continue;
            }
            if nodes >= cfg.max_nodes || start.elapsed() >= cfg.time_budget {
                return Ok(exceeded(best, nodes));
            }
            let child = node.template.extended(edge);
            if !visited.insert(child.cnots().to_vec()) {
                continue;
            }
            let ev = evaluate(&child)?;
            nodes += 1;
            order += 1;
            if ev.distance < best.0 {
                best = (ev.distance, child.clone(), ev.params.clone());
            }
            if ev.distance <= cfg.threshold {
                if let Some((circuit, d)) = verify(&child, &ev)? {
                    solved_children.push((d, order, circuit));
                    continue;
                }
            }
            heap.push(Node {
                distance: ev.distance,
                cnots: child.cnot_count(),
                order,
                template: child,
            });
        }
        if let Some((d, _, circuit)) = solved_children
            .into_iter()
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        {
            return Ok(solved(circuit, d, nodes));
        }
    }
    Ok(exceeded(best, nodes))
}

fn solved(circuit: Circuit, d: f64, nodes: usize) -> SynthesisResult {
    SynthesisResult {
        cnot_count: circuit.cnot_count(),
        circuit,
        distance: d,
        status: SynthesisStatus::Solved,
        nodes_expanded: nodes,
    }
}

fn exceeded(best: (f64, Template, Vec<f64>), nodes: usize) -> SynthesisResult {
    let (d, tpl, params) = best;
    let circuit = tpl
        .instantiate(&params)
        .expect("params come from the same template");
    SynthesisResult {
        cnot_count: circuit.cnot_count(),
        circuit,
        distance: d,
        status: SynthesisStatus::BudgetExceeded,
        nodes_expanded: nodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unitary(k: usize, gates: Vec<Gate>) -> UnitaryMatrix {
        circuit_unitary(&Circuit::from_gates(k, gates).unwrap()).unwrap()
    }

    fn random_two_qubit(rng: &mut ChaCha8Rng) -> UnitaryMatrix {
        let mut gates = Vec::new();
        for layer in 0..4 {
            for q in 0..2 {
                gates.push(Gate::u3(
                    q,
                    rng.gen_range(-3.1..3.1),
                    rng.gen_range(-3.1..3.1),
                    rng.gen_range(-3.1..3.1),
                ));
            }
            if layer < 3 {
                gates.push(Gate::cnot(layer % 2, 1 - layer % 2));
            }
        }
        unitary(2, gates)
    }

    fn line_group(k: usize) -> (QubitGroup, Topology) {
        (QubitGroup::new((0..k).collect()), Topology::line(k))
    }

    #[test]
    fn identity_needs_no_cnots() {
        let (g, t) = line_group(3);
        let r = synthesize(
            &UnitaryMatrix::identity(8),
            &g,
            &t,
            &SynthesisConfig::default(),
        )
        .unwrap();
        assert_eq!(r.status, SynthesisStatus::Solved);
        assert_eq!(r.cnot_count, 0);
        assert!(r.distance <= 1e-10);
    }

    #[test]
    fn four_cnot_identity_collapses() {
        let (g, t) = line_group(2);
        let target = unitary(
            2,
            vec![
                Gate::cnot(0, 1),
                Gate::cnot(0, 1),
                Gate::cnot(0, 1),
                Gate::cnot(0, 1),
            ],
        );
        let cfg = SynthesisConfig {
            cnot_budget: Some(3),
            ..Default::default()
        };
        let r = synthesize(&target, &g, &t, &cfg).unwrap();
        assert_eq!(r.status, SynthesisStatus::Solved);
        assert_eq!(r.cnot_count, 0);
    }

    #[test]
    fn one_cnot_target_gets_exactly_one() {
        let (g, t) = line_group(2);
        let mut twos = 0;
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let target = unitary(
                2,
                vec![
                    Gate::u3(0, rng.gen(), rng.gen(), rng.gen()),
                    Gate::u3(1, rng.gen(), rng.gen(), rng.gen()),
                    Gate::cnot(1, 0),
                    Gate::u3(0, rng.gen(), rng.gen(), rng.gen()),
                ],
            );
            let cfg = SynthesisConfig {
                seed,
                ..Default::default()
            };
            let r = synthesize(&target, &g, &t, &cfg).unwrap();
            assert_eq!(r.status, SynthesisStatus::Solved);
            assert!(r.cnot_count >= 1);
            if r.cnot_count >= 2 {
                twos += 1;
            }
        }
        assert_eq!(twos, 0);
    }

    #[test]
    fn random_two_qubit_at_most_three() {
        let (g, t) = line_group(2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let target = random_two_qubit(&mut rng);
            let r = synthesize(&target, &g, &t, &SynthesisConfig::default()).unwrap();
            assert_eq!(r.status, SynthesisStatus::Solved);
            assert!(r.cnot_count <= 3);
            let d = distance(&target, &circuit_unitary(&r.circuit).unwrap()).unwrap();
            assert!(d <= 1e-10);
        }
    }

    #[test]
    fn cnots_follow_group_edges() {
        // group {0,1,2} on a line: no direct 0-2 edge
        let (g, t) = line_group(3);
        let target = unitary(3, vec![Gate::cnot(0, 1), Gate::cnot(1, 2)]);
        let r = synthesize(&target, &g, &t, &SynthesisConfig::default()).unwrap();
        assert_eq!(r.status, SynthesisStatus::Solved);
        assert_eq!(r.cnot_count, 2);
        for gate in r.circuit.gates.iter().filter(|g| g.is_two_qubit()) {
            assert!(t.has_edge(gate.qubits[0], gate.qubits[1]));
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let (g, t) = line_group(2);
        let target = unitary(2, vec![Gate::h(0), Gate::cnot(0, 1)]);
        let cfg = SynthesisConfig {
            cnot_budget: Some(0),
            ..Default::default()
        };
        let r = synthesize(&target, &g, &t, &cfg).unwrap();
        assert_eq!(r.status, SynthesisStatus::BudgetExceeded);
        assert!(r.distance > 1e-3);
    }

    #[test]
    fn node_cap_is_reported() {
        let (g, t) = line_group(2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let target = random_two_qubit(&mut rng);
        let cfg = SynthesisConfig {
            max_nodes: 2,
            ..Default::default()
        };
        let r = synthesize(&target, &g, &t, &cfg).unwrap();
        assert_eq!(r.status, SynthesisStatus::BudgetExceeded);
        assert_eq!(r.nodes_expanded, 2);
    }

    #[test]
    fn same_seed_same_result() {
        let (g, t) = line_group(2);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let target = random_two_qubit(&mut rng);
        let cfg = SynthesisConfig {
            seed: 77,
            ..Default::default()
        };
        let a = synthesize(&target, &g, &t, &cfg).unwrap();
        let b = synthesize(&target, &g, &t, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_inputs() {
        let t = Topology::line(4);
        let cfg = SynthesisConfig::default();
        let g = QubitGroup::new(vec![0, 2]);
        assert!(synthesize(&UnitaryMatrix::identity(4), &g, &t, &cfg).is_err());
        let g = QubitGroup::new(vec![0, 1]);
        assert!(synthesize(&UnitaryMatrix::identity(8), &g, &t, &cfg).is_err());
    }

    #[test]
    fn block_seeds_differ() {
        assert_ne!(block_seed(1, 0), block_seed(1, 1));
        assert_eq!(block_seed(3, 4), block_seed(3, 4));
    }
}
