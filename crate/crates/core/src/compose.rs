//! Stitches synthesized blocks back into a full circuit.

use crate::circuit::{merge_single_qubit_runs, Circuit};
use crate::error::{QgoError, Result};
use crate::partition::{Block, Partition};
use crate::synthesis::SynthesisResult;

/// Whether `result` replaces the original gates of `block`.
pub fn accepts(block: &Block, result: &SynthesisResult) -> bool {
    result.is_solved() && result.cnot_count < block.cnot_count
}

/// Rebuilds the circuit from per-block results, keeping a block's original
/// gates unless its synthesis solved with strictly fewer CNOTs.
pub fn compose(p: &Partition, results: &[SynthesisResult], source: &Circuit) -> Result<Circuit> {
    if results.len() != p.blocks.len() || p.mapping.len() != p.blocks.len() {
        return Err(QgoError::Compose(format!(
            "{} blocks, {} mappings, {} results",
            p.blocks.len(),
            p.mapping.len(),
            results.len()
        )));
    }
    let mut out = Circuit::new(source.num_qubits);
    for (i, (block, result)) in p.blocks.iter().zip(results).enumerate() {
        if accepts(block, result) {
            let group = p.mapping[i].qubits();
            if result.circuit.num_qubits != group.len() {
                return Err(QgoError::Compose(format!(
                    "block {i}: result has {} qubits, group has {}",
                    result.circuit.num_qubits,
                    group.len()
                )));
            }
            for g in &result.circuit.gates {
                out.gates.push(g.relabeled(|q| group[q]));
            }
        } else {
            for &gi in &block.gates {
                let g = source.gates.get(gi).ok_or_else(|| {
                    QgoError::Compose(format!("block {i} refers to missing gate {gi}"))
                })?;
                out.gates.push(g.clone());
            }
        }
    }
    let mut merged = merge_single_qubit_runs(&out);
    merged.num_clbits = source.num_clbits;
    merged.measurements = source.measurements.clone();
    Ok(merged)
}

/// Fraction of CNOTs removed; 0 when `before` has none.
pub fn cnot_reduction(before: &Circuit, after: &Circuit) -> f64 {
    let b = before.cnot_count();
    if b == 0 {
        return 0.0;
    }
    (b as f64 - after.cnot_count() as f64) / b as f64
}
