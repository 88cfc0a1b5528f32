//! End-to-end flow: route, partition, synthesize blocks in parallel, compose.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{merge_single_qubit_runs, Circuit};
use crate::compose::{accepts, cnot_reduction, compose};
use crate::error::{QgoError, Result};
use crate::partition::{partition, Block, Partition, MIN_BLOCK_QUBITS};
use crate::router::{check_mapped, route, Layout};
use crate::sim::{block_unitary, simulate, state_infidelity, StateVector, MAX_SIM_QUBITS};
use crate::synthesis::{
    block_seed, synthesize, SynthesisConfig, SynthesisResult, SynthesisStatus, DEFAULT_MAX_NODES,
    DEFAULT_THRESHOLD, DEFAULT_TIME_BUDGET,
};
use crate::topology::Topology;

pub const REPORT_SCHEMA: u32 = 1;
pub const DEFAULT_K: usize = 3;

#[derive(Clone, Debug)]
pub struct OptimizeOptions {
    pub k: usize,
    pub threshold: f64,
    pub time_budget: Duration,
    pub max_nodes: usize,
    /// Worker threads for block synthesis; `None` uses all cores.
    pub jobs: Option<usize>,
    pub seed: u64,
    pub assume_mapped: bool,
    /// Include per-stage wall times in the report. Off by default so that
    /// reports are reproducible byte for byte.
    pub record_timings: bool,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            k: DEFAULT_K,
            threshold: DEFAULT_THRESHOLD,
            time_budget: DEFAULT_TIME_BUDGET,
            max_nodes: DEFAULT_MAX_NODES,
            jobs: None,
            seed: 0,
            assume_mapped: false,
            record_timings: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub group: Vec<usize>,
    pub cnot_before: usize,
    pub cnot_after: usize,
    /// Distance of the circuit actually used for this block.
    pub distance: f64,
    pub status: SynthesisStatus,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WallTimes {
    pub route: f64,
    pub partition: f64,
    pub synthesis: f64,
    pub compose: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    /// CNOTs of the circuit as given, SWAPs counted as three.
    pub cnot_input: usize,
    /// CNOTs of the routed circuit handed to the partitioner.
    pub cnot_before: usize,
    pub cnot_after: usize,
    pub reduction_rate: f64,
    pub swaps_inserted: usize,
    pub initial_layout: Vec<usize>,
    pub final_layout: Vec<usize>,
    pub blocks: Vec<BlockReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_times: Option<WallTimes>,
    pub seed: u64,
    pub k: usize,
    pub threshold: f64,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

#[derive(Clone, Debug)]
pub struct OptimizeOutput {
    pub routed: Circuit,
    pub optimized: Circuit,
    pub partition: Partition,
    pub report: Report,
}

impl OptimizeOutput {
    pub fn initial_layout(&self) -> Layout {
        Layout {
            logical_to_physical: self.report.initial_layout.clone(),
        }
    }

    pub fn final_layout(&self) -> Layout {
        Layout {
            logical_to_physical: self.report.final_layout.clone(),
        }
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Block gates relabeled onto the block's sorted-position qubits.
pub fn local_block_circuit(block: &Block, source: &Circuit) -> Result<Circuit> {
    let group = &block.group;
    Circuit::from_gates(
        group.len(),
        block.gates.iter().map(|&g| {
            source.gates[g].relabeled(|q| group.position(q).expect("gate inside its group"))
        }),
    )
}

fn synthesize_block(
    i: usize,
    block: &Block,
    source: &Circuit,
    t: &Topology,
    opts: &OptimizeOptions,
) -> Result<SynthesisResult> {
    let local = local_block_circuit(block, source)?;
    if block.cnot_count == 0 {
        return Ok(SynthesisResult::fallback(local));
    }
    let target = block_unitary(block, source)?;
    let cfg = SynthesisConfig {
        threshold: opts.threshold,
        cnot_budget: Some(block.cnot_count - 1),
        time_budget: opts.time_budget,
        max_nodes: opts.max_nodes,
        seed: block_seed(opts.seed, i),
        ..Default::default()
    };
    synthesize(&target, &block.group, t, &cfg)
}

/// Runs the whole optimization flow on `input`.
pub fn run_optimize(
    input: &Circuit,
    t: &Topology,
    opts: &OptimizeOptions,
) -> Result<OptimizeOutput> {
    input.validate()?;
    if !(opts.threshold > 0.0) {
        return Err(QgoError::InvalidArgument(format!(
            "threshold must be positive, got {}",
            opts.threshold
        )));
    }
    let n = input.num_qubits;
    if n > t.num_qubits() {
        return Err(QgoError::Topology(format!(
            "circuit needs {n} qubits, topology has {}",
            t.num_qubits()
        )));
    }
    let mut times = WallTimes::default();

    let clock = Instant::now();
    let (routed, initial, fin, swaps) = if opts.assume_mapped {
        let lowered = input.lower_swaps();
        if !check_mapped(&lowered, t) {
            let (gate, g) = lowered
                .gates
                .iter()
                .enumerate()
                .find(|(_, g)| g.is_two_qubit() && !t.has_edge(g.qubits[0], g.qubits[1]))
                .expect("unmapped gate exists");
            return Err(QgoError::Unmapped {
                gate,
                a: g.qubits[0],
                b: g.qubits[1],
            });
        }
        (lowered, Layout::identity(n), Layout::identity(n), 0)
    } else {
        let r = route(input, t, opts.seed)?;
        (r.circuit, r.initial_layout, r.final_layout, r.swaps)
    };
    times.route = secs(clock.elapsed());

    let clock = Instant::now();
    let region = t.restrict(n);
    let k = opts.k.min(n);
    let part = if k < MIN_BLOCK_QUBITS || routed.is_empty() {
        // nothing two-qubit can exist; treat the whole circuit as one
        // CNOT-free pass-through
        None
    } else {
        let p = partition(&routed, &region, k)?;
        p.validate(&routed, &region)?;
        Some(p)
    };
    times.partition = secs(clock.elapsed());

    let clock = Instant::now();
    let results: Vec<SynthesisResult> = match &part {
        None => Vec::new(),
        Some(p) => {
            let work = || -> Result<Vec<SynthesisResult>> {
                p.blocks
                    .par_iter()
                    .enumerate()
                    .map(|(i, b)| synthesize_block(i, b, &routed, &region, opts))
                    .collect()
            };
            match opts.jobs {
                Some(j) => rayon::ThreadPoolBuilder::new()
                    .num_threads(j.max(1))
                    .build()
                    .map_err(|e| QgoError::InvalidArgument(format!("thread pool: {e}")))?
                    .install(work)?,
                None => work()?,
            }
        }
    };
    times.synthesis = secs(clock.elapsed());

    let clock = Instant::now();
    let (optimized, part) = match part {
        None => (merge_single_qubit_runs(&routed), Partition::default()),
        Some(p) => (compose(&p, &results, &routed)?, p),
    };
    times.compose = secs(clock.elapsed());

    if optimized.cnot_count() > routed.cnot_count() {
        return Err(QgoError::Invariant(format!(
            "optimized circuit has {} CNOTs, more than the {} it started with",
            optimized.cnot_count(),
            routed.cnot_count()
        )));
    }
    if !check_mapped(&optimized, t) {
        return Err(QgoError::Invariant(
            "optimized circuit uses a non-topology edge".into(),
        ));
    }

    let blocks: Vec<BlockReport> = part
        .blocks
        .iter()
        .zip(&results)
        .map(|(b, r)| {
            let taken = accepts(b, r);
            BlockReport {
                group: b.group.qubits().to_vec(),
                cnot_before: b.cnot_count,
                cnot_after: if taken { r.cnot_count } else { b.cnot_count },
                distance: if taken { r.distance } else { 0.0 },
                status: r.status,
            }
        })
        .collect();
    let block_total: usize = blocks.iter().map(|b| b.cnot_after).sum();
    if !part.blocks.is_empty() && block_total != optimized.cnot_count() {
        return Err(QgoError::Invariant(format!(
            "block CNOT totals {block_total} disagree with the composed circuit's {}",
            optimized.cnot_count()
        )));
    }

    let report = Report {
        schema: REPORT_SCHEMA,
        cnot_input: input.cnot_count(),
        cnot_before: routed.cnot_count(),
        cnot_after: optimized.cnot_count(),
        reduction_rate: cnot_reduction(&routed, &optimized),
        swaps_inserted: swaps,
        initial_layout: initial.logical_to_physical,
        final_layout: fin.logical_to_physical,
        blocks,
        wall_times: opts.record_timings.then_some(times),
        seed: opts.seed,
        k: opts.k,
        threshold: opts.threshold,
    };
    Ok(OptimizeOutput {
        routed,
        optimized,
        partition: part,
        report,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub num_qubits: usize,
    /// Infidelity of the two outputs on `|0...0>`.
    pub infidelity: f64,
    /// Worst infidelity over random inputs, for small circuits.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_random_infidelity: Option<f64>,
}

impl VerifyReport {
    pub fn worst(&self) -> f64 {
        self.infidelity
            .max(self.max_random_infidelity.unwrap_or(0.0))
    }
}

pub const VERIFY_FULL_LIMIT: usize = 16;
pub const VERIFY_RANDOM_LIMIT: usize = 6;
pub const VERIFY_RANDOM_STATES: usize = 10;

fn is_permutation(p: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    p.len() == n
        && p.iter()
            .all(|&x| x < n && !std::mem::replace(&mut seen[x], true))
}

/// Compares `original` (logical qubits) with `optimized` (physical qubits
/// reached through `initial` and left in `fin`).
pub fn run_verify(
    original: &Circuit,
    optimized: &Circuit,
    layouts: Option<(&Layout, &Layout)>,
    seed: u64,
) -> Result<VerifyReport> {
    let n = original.num_qubits;
    if optimized.num_qubits != n {
        return Err(QgoError::DimensionMismatch(n, optimized.num_qubits));
    }
    if n > VERIFY_FULL_LIMIT.min(MAX_SIM_QUBITS) {
        return Err(QgoError::TooManyQubits(n, VERIFY_FULL_LIMIT));
    }
    let ident = Layout::identity(n);
    let (init, fin) = layouts.unwrap_or((&ident, &ident));
    for l in [init, fin] {
        if !is_permutation(&l.logical_to_physical, n) {
            return Err(QgoError::InvalidArgument(format!(
                "layout {:?} is not a permutation of {n} qubits",
                l.logical_to_physical
            )));
        }
    }
    let compare = |psi: &StateVector| -> Result<f64> {
        let want = simulate(original, psi)?.permuted(&fin.logical_to_physical);
        let got = simulate(optimized, &psi.permuted(&init.logical_to_physical))?;
        state_infidelity(&want, &got)
    };
    let infidelity = compare(&StateVector::zero(n))?;
    let max_random_infidelity = if n <= VERIFY_RANDOM_LIMIT {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..VERIFY_RANDOM_STATES {
            worst = worst.max(compare(&StateVector::random(n, &mut rng))?);
        }
        Some(worst)
    } else {
        None
    };
    Ok(VerifyReport {
        num_qubits: n,
        infidelity,
        max_random_infidelity,
    })
}
