use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qgo_core::bench::{gen_adder, gen_qaoa_maxcut, gen_qft, gen_tfim};
use qgo_core::circuit::{parse_qasm, write_qasm, Circuit};
use qgo_core::noise::{ideal_distribution, sample_noisy, success_rate, tvd, NoiseSpec};
use qgo_core::partition::partition;
use qgo_core::pipeline::{run_optimize, run_verify, OptimizeOptions, Report, DEFAULT_K};
use qgo_core::router::{route, Layout};
use qgo_core::sim::circuit_unitary;
use qgo_core::synthesis::{synthesize, SynthesisConfig, DEFAULT_MAX_NODES, DEFAULT_THRESHOLD};
use qgo_core::topology::{load_topology, QubitGroup, Topology};
use qgo_core::QgoError;

const EXIT_INPUT: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "qgo",
    version,
    about = "Topology-aware CNOT optimizer for quantum circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Route, partition, resynthesize and recompose a circuit.
    Optimize(OptimizeArgs),
    /// Print the greedy block partition as JSON.
    Partition(PartitionArgs),
    /// Resynthesize a small circuit as a single block.
    Synth(SynthArgs),
    /// Compare an optimized circuit against the original by simulation.
    Verify(VerifyArgs),
    /// Sample measurement outcomes, optionally under CNOT noise.
    Simulate(SimulateArgs),
    /// Emit a benchmark circuit as QASM.
    Bench(BenchArgs),
    /// Print gate counts.
    Stats(StatsArgs),
}

#[derive(Args)]
struct TopologyArg {
    /// `line-N`, `grid-RxC`, or a JSON file with `num_qubits` and `edges`.
    #[arg(long)]
    topology: String,
}

#[derive(Args)]
struct OptimizeArgs {
    input: PathBuf,
    #[command(flatten)]
    topology: TopologyArg,
    /// Largest block size.
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Per-block synthesis distance threshold.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Per-block synthesis time limit in seconds.
    #[arg(long, default_value_t = 60.0)]
    time_budget: f64,
    /// Per-block limit on templates tried.
    #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
    max_nodes: usize,
    /// Synthesis worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip routing; fail if a CNOT is off the topology.
    #[arg(long)]
    assume_mapped: bool,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Include per-stage wall times in the report.
    #[arg(long)]
    timings: bool,
    /// Also write the routed, pre-optimization circuit.
    #[arg(long)]
    routed_out: Option<PathBuf>,
    /// Output QASM (default: stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PartitionArgs {
    input: PathBuf,
    #[command(flatten)]
    topology: TopologyArg,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    #[arg(long)]
    assume_mapped: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    input: PathBuf,
    /// Connectivity among the circuit's qubits (default: a line).
    #[arg(long)]
    topology: Option<String>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = 60.0)]
    time_budget: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
    max_nodes: usize,
    /// Largest CNOT count to try.
    #[arg(long)]
    cnot_budget: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    original: PathBuf,
    optimized: PathBuf,
    /// Report from `optimize`; its layouts relate the two circuits' qubits.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    input: PathBuf,
    /// Probability of a random two-qubit Pauli after each CNOT.
    #[arg(long, default_value_t = 0.0)]
    noise_p: f64,
    #[arg(long, default_value_t = 0.0)]
    noise_p1: f64,
    #[arg(long, default_value_t = 8192)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Qft,
    Tfim,
    Qaoa,
    Adder,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Qubit count, or operand bits for the adder.
    #[arg(long)]
    n: usize,
    /// Trotter steps (tfim).
    #[arg(long, default_value_t = 1)]
    steps: usize,
    /// Trotter time step (tfim).
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
    /// Ansatz layers (qaoa).
    #[arg(long, default_value_t = 1)]
    layers: usize,
    /// Graph and angle seed (qaoa).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    input: PathBuf,
}

fn read_circuit(path: &Path) -> Result<Circuit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_qasm(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_topology(spec: &str) -> Result<Topology> {
    let path = Path::new(spec);
    let source = if path.is_file() {
        fs::read_to_string(path).with_context(|| format!("reading {spec}"))?
    } else {
        spec.to_string()
    };
    load_topology(&source).with_context(|| format!("loading topology {spec}"))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes") + "\n"
}

fn duration(secs: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(secs).map_err(|_| {
        QgoError::InvalidArgument(format!("time budget {secs} is not a valid duration")).into()
    })
}

fn optimize(a: OptimizeArgs) -> Result<()> {
    let c = read_circuit(&a.input)?;
    let t = read_topology(&a.topology.topology)?;
    let opts = OptimizeOptions {
        k: a.k,
        threshold: a.threshold,
        time_budget: duration(a.time_budget)?,
        max_nodes: a.max_nodes,
        jobs: a.jobs,
        seed: a.seed,
        assume_mapped: a.assume_mapped,
        record_timings: a.timings,
    };
    let out = run_optimize(&c, &t, &opts).context("optimize")?;
    if let Some(p) = &a.routed_out {
        emit(Some(p), &write_qasm(&out.routed))?;
    }
    if let Some(p) = &a.report {
        emit(Some(p), &out.report.to_json())?;
    }
    emit(a.output.as_deref(), &write_qasm(&out.optimized))
}

fn partition_cmd(a: PartitionArgs) -> Result<()> {
    let c = read_circuit(&a.input)?;
    let t = read_topology(&a.topology.topology)?;
    let mapped = if a.assume_mapped {
        c.lower_swaps()
    } else {
        route(&c, &t, 0).context("route")?.circuit
    };
    let region = t.restrict(mapped.num_qubits);
    let p = partition(&mapped, &region, a.k.min(mapped.num_qubits)).context("partition")?;
    let blocks: Vec<_> = p
        .blocks
        .iter()
        .map(|b| json!({"group": b.group, "gates": b.gates, "cnot_count": b.cnot_count}))
        .collect();
    let v = json!({
        "num_blocks": p.blocks.len(),
        "cnot_count": mapped.cnot_count(),
        "blocks": blocks,
    });
    emit(a.output.as_deref(), &pretty(&v))
}

fn synth(a: SynthArgs) -> Result<()> {
    let c = read_circuit(&a.input)?;
    let k = c.num_qubits;
    let t = match &a.topology {
        Some(s) => read_topology(s)?.restrict(k),
        None => Topology::line(k),
    };
    let target = circuit_unitary(&c).context("block unitary")?;
    let cfg = SynthesisConfig {
        threshold: a.threshold,
        cnot_budget: a.cnot_budget,
        time_budget: duration(a.time_budget)?,
        max_nodes: a.max_nodes,
        seed: a.seed,
        ..Default::default()
    };
    let group = QubitGroup::new((0..k).collect());
    let r = synthesize(&target, &group, &t, &cfg).context("synthesize")?;
    let summary = json!({
        "cnot_before": c.cnot_count(),
        "cnot_after": r.cnot_count,
        "distance": r.distance,
        "status": r.status,
        "nodes": r.nodes_expanded,
    });
    match &a.report {
        Some(p) => emit(Some(p), &pretty(&summary))?,
        None => eprint!("{}", pretty(&summary)),
    }
    emit(a.output.as_deref(), &write_qasm(&r.circuit))
}

fn verify(a: VerifyArgs) -> Result<()> {
    let original = read_circuit(&a.original)?;
    let optimized = read_circuit(&a.optimized)?;
    let layouts = match &a.report {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let r: Report = serde_json::from_str(&text)
                .map_err(|e| QgoError::InvalidArgument(format!("report: {e}")))?;
            Some((
                Layout {
                    logical_to_physical: r.initial_layout,
                },
                Layout {
                    logical_to_physical: r.final_layout,
                },
            ))
        }
        None => None,
    };
    let v = run_verify(
        &original,
        &optimized,
        layouts.as_ref().map(|(i, f)| (i, f)),
        a.seed,
    )
    .context("verify")?;
    emit(None, &pretty(&serde_json::to_value(&v)?))
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let c = read_circuit(&a.input)?;
    let noise = NoiseSpec::new(a.noise_p, a.noise_p1)?;
    let ideal = ideal_distribution(&c).context("simulate")?;
    let sampled = sample_noisy(&c, &noise, a.shots, a.seed).context("simulate")?;
    let v = json!({
        "shots": a.shots,
        "noise_p": a.noise_p,
        "distribution": sampled,
        "tvd_to_ideal": tvd(&sampled, &ideal),
        "success_rate": success_rate(&c, &noise),
    });
    emit(None, &pretty(&v))
}

fn bench(a: BenchArgs) -> Result<()> {
    let min = match a.family {
        Family::Qft | Family::Adder => 1,
        Family::Tfim | Family::Qaoa => 2,
    };
    if a.n < min {
        return Err(QgoError::InvalidArgument(format!("--n must be at least {min}")).into());
    }
    let c = match a.family {
        Family::Qft => gen_qft(a.n),
        Family::Tfim => gen_tfim(a.n, a.steps, a.dt),
        Family::Qaoa => gen_qaoa_maxcut(a.n, a.layers, a.seed),
        Family::Adder => gen_adder(a.n),
    };
    emit(a.output.as_deref(), &write_qasm(&c))
}

fn stats(a: StatsArgs) -> Result<()> {
    let c = read_circuit(&a.input)?;
    let v = json!({
        "qubits": c.num_qubits,
        "gates": c.len(),
        "cnots": c.cnot_count(),
        "single_qubit": c.single_qubit_count(),
        "depth": c.depth(),
        "measurements": c.measurements.len(),
    });
    emit(None, &pretty(&v))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<QgoError>()) {
        Some(e) if !e.is_input_error() => EXIT_INVARIANT,
        _ => EXIT_INPUT,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Optimize(a) => optimize(a),
        Command::Partition(a) => partition_cmd(a),
        Command::Synth(a) => synth(a),
        Command::Verify(a) => verify(a),
        Command::Simulate(a) => simulate(a),
        Command::Bench(a) => bench(a),
        Command::Stats(a) => stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
