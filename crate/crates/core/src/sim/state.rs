use rand::Rng;
use rand_distr::StandardNormal;

use super::kernel::apply_gate_rows;
use super::{C64, ONE, ZERO};
use crate::circuit::Circuit;
use crate::error::{QgoError, Result};

/// Memory guard for statevector simulation.
pub const MAX_SIM_QUBITS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0...0>` on `n` qubits.
    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        StateVector { amps }
    }

    /// Gaussian-random normalized state.
    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        let mut amps: Vec<C64> = (0..1usize << n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = amps.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        StateVector { amps }
    }

    /// Panics unless the length is a power of two.
    pub fn from_amplitudes(amps: Vec<C64>) -> Self {
        assert!(
            amps.len().is_power_of_two(),
            "length must be a power of two"
        );
        StateVector { amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(C64::norm_sqr).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(C64::norm_sqr).collect()
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.amps.len() != other.amps.len() {
            return Err(QgoError::DimensionMismatch(
                self.amps.len(),
                other.amps.len(),
            ));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Relabels qubits: amplitude at basis `x` moves to the index whose bit
    /// `perm[q]` equals bit `q` of `x`.
    pub fn permuted(&self, perm: &[usize]) -> StateVector {
        let mut out = vec![ZERO; self.amps.len()];
        for (x, &a) in self.amps.iter().enumerate() {
            let mut y = 0;
            for (q, &p) in perm.iter().enumerate() {
                y |= ((x >> q) & 1) << p;
            }
            out[y] = a;
        }
        StateVector { amps: out }
    }
}

/// Applies every unitary gate of `c` to `input`; measurements are ignored.
pub fn simulate(c: &Circuit, input: &StateVector) -> Result<StateVector> {
    if c.num_qubits > MAX_SIM_QUBITS {
        return Err(QgoError::TooManyQubits(c.num_qubits, MAX_SIM_QUBITS));
    }
    if input.amps.len() != 1 << c.num_qubits {
        return Err(QgoError::DimensionMismatch(
            input.amps.len(),
            1 << c.num_qubits,
        ));
    }
    let mut state = input.clone();
    for g in &c.gates {
        apply_gate_rows(&mut state.amps, 1, g, |q| q)?;
    }
    Ok(state)
}

/// `1 - |<a|b>|^2`.
pub fn state_infidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok((1.0 - a.inner(b)?.norm_sqr()).max(0.0))
}
