//! Outcome distributions, Monte-Carlo Pauli noise and the product-of-success
//! fidelity estimate.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{QgoError, Result};
use crate::seed::derive_seed;
use crate::sim::{apply_gate_rows, apply_matrix2_rows, simulate, Matrix2, StateVector, C64};

pub const MAX_NOISY_QUBITS: usize = 16;

/// Probability per measured bitstring. Bitstrings are written with the
/// highest qubit first.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutcomeDistribution(BTreeMap<String, f64>);

impl OutcomeDistribution {
    pub fn new(probs: BTreeMap<String, f64>) -> Result<Self> {
        if probs.values().any(|&p| !(p >= 0.0)) {
            return Err(QgoError::InvalidArgument("negative probability".into()));
        }
        let total: f64 = probs.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(QgoError::InvalidArgument(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(OutcomeDistribution(probs))
    }

    /// Frequencies of `counts` over `shots` samples.
    pub fn from_counts(counts: &BTreeMap<String, u64>, shots: u64) -> Self {
        OutcomeDistribution(
            counts
                .iter()
                .map(|(k, &c)| (k.clone(), c as f64 / shots as f64))
                .collect(),
        )
    }

    /// Born probabilities of a state, dropping outcomes below `1e-15`.
    pub fn from_state(s: &StateVector) -> Self {
        let n = s.num_qubits();
        OutcomeDistribution(
            s.probabilities()
                .into_iter()
                .enumerate()
                .filter(|&(_, p)| p > 1e-15)
                .map(|(i, p)| (bitstring(i, n), p))
                .collect(),
        )
    }

    pub fn get(&self, outcome: &str) -> f64 {
        self.0.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn bitstring(index: usize, n: usize) -> String {
    (0..n)
        .rev()
        .map(|q| if (index >> q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub two_qubit_error_p: f64,
    #[serde(default)]
    pub single_qubit_error_p: f64,
}

impl NoiseSpec {
    pub fn new(two_qubit_error_p: f64, single_qubit_error_p: f64) -> Result<Self> {
        for p in [two_qubit_error_p, single_qubit_error_p] {
            if !(0.0..=1.0).contains(&p) {
                return Err(QgoError::InvalidArgument(format!(
                    "error probability {p} outside [0, 1]"
                )));
            }
        }
        Ok(NoiseSpec {
            two_qubit_error_p,
            single_qubit_error_p,
        })
    }

    pub fn cnot_only(p: f64) -> Result<Self> {
        Self::new(p, 0.0)
    }
}

/// Total variation distance over the union of supports.
pub fn tvd(p: &OutcomeDistribution, q: &OutcomeDistribution) -> f64 {
    let mut sum = 0.0;
    for (k, &a) in &p.0 {
        sum += (a - q.get(k)).abs();
    }
    for (k, &b) in &q.0 {
        if !p.0.contains_key(k) {
            sum += b;
        }
    }
    (0.5 * sum).min(1.0)
}

/// Product over gates of their success probability; a SWAP counts as three
/// CNOTs.
pub fn success_rate(c: &Circuit, noise: &NoiseSpec) -> f64 {
    c.gates
        .iter()
        .map(|g| {
            if g.is_single_qubit() {
                1.0 - noise.single_qubit_error_p
            } else {
                (1.0 - noise.two_qubit_error_p).powi(g.cnot_cost() as i32)
            }
        })
        .product()
}

/// Noise-free outcome distribution from `|0...0>`.
pub fn ideal_distribution(c: &Circuit) -> Result<OutcomeDistribution> {
    let s = simulate(c, &StateVector::zero(c.num_qubits))?;
    Ok(OutcomeDistribution::from_state(&s))
}

fn pauli(index: usize) -> Option<Matrix2> {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match index {
        1 => Some([[z, o], [o, z]]),
        2 => Some([[z, -i], [i, z]]),
        3 => Some([[o, z], [z, -o]]),
        _ => None,
    }
}

struct Fault {
    /// Index of the gate the Pauli follows.
    after: usize,
    /// Pauli index per gate qubit: 0..4 = I, X, Y, Z.
    paulis: [usize; 2],
}

fn draw_faults(gates: &[Gate], noise: &NoiseSpec, rng: &mut ChaCha8Rng) -> Vec<Fault> {
    let mut faults = Vec::new();
    for (i, g) in gates.iter().enumerate() {
        if g.is_two_qubit() {
            // a SWAP is three CNOTs on the same pair; the Paulis compose onto it
            for _ in 0..g.cnot_cost() {
                if noise.two_qubit_error_p > 0.0 && rng.gen::<f64>() < noise.two_qubit_error_p {
                    let r = rng.gen_range(1..16);
                    faults.push(Fault {
                        after: i,
                        paulis: [r / 4, r % 4],
                    });
                }
            }
        } else if noise.single_qubit_error_p > 0.0 && rng.gen::<f64>() < noise.single_qubit_error_p
        {
            faults.push(Fault {
                after: i,
                paulis: [rng.gen_range(1..4), 0],
            });
        }
    }
    faults
}

fn sample_index(cdf: &[f64], u: f64) -> usize {
    let total = *cdf.last().expect("non-empty cdf");
    cdf.partition_point(|&c| c <= u * total).min(cdf.len() - 1)
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

/// Monte-Carlo sampling under stochastic Pauli noise; every qubit is
/// measured at the end. Shots are independent and seeded by their index.
pub fn sample_noisy(
    c: &Circuit,
    noise: &NoiseSpec,
    shots: u64,
    seed: u64,
) -> Result<OutcomeDistribution> {
    if shots == 0 {
        return Err(QgoError::InvalidArgument("shots must be positive".into()));
    }
    let n = c.num_qubits;
    if n > MAX_NOISY_QUBITS {
        return Err(QgoError::TooManyQubits(n, MAX_NOISY_QUBITS));
    }
    let ideal = simulate(c, &StateVector::zero(n))?;
    let ideal_cdf = cumulative(&ideal.probabilities());

    let outcomes: Vec<usize> = (0..shots)
        .into_par_iter()
        .map(|shot| -> Result<usize> {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, shot));
            let faults = draw_faults(&c.gates, noise, &mut rng);
            if faults.is_empty() {
                return Ok(sample_index(&ideal_cdf, rng.gen()));
            }
            let mut state = StateVector::zero(n);
            let amps = state.amplitudes_mut();
            let mut next = 0;
            for (i, g) in c.gates.iter().enumerate() {
                apply_gate_rows(amps, 1, g, |q| q)?;
                while next < faults.len() && faults[next].after == i {
                    for (slot, &q) in g.qubits.iter().enumerate() {
                        if let Some(m) = pauli(faults[next].paulis[slot]) {
                            apply_matrix2_rows(amps, 1, q, &m);
                        }
                    }
                    next += 1;
                }
            }
            Ok(sample_index(&cumulative(&state.probabilities()), rng.gen()))
        })
        .collect::<Result<_>>()?;

    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for o in outcomes {
        *counts.entry(bitstring(o, n)).or_default() += 1;
    }
    Ok(OutcomeDistribution::from_counts(&counts, shots))
}
