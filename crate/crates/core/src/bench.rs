//! Benchmark circuit families: QFT, transverse-field Ising Trotter steps,
//! QAOA MaxCut and a ripple-carry adder.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, Gate};

fn build(n: usize, gates: Vec<Gate>) -> Circuit {
    Circuit::from_gates(n, gates).expect("generator emits valid gates")
}

/// Controlled phase `diag(1, 1, 1, e^{iθ})` up to global phase.
fn cphase(out: &mut Vec<Gate>, c: usize, t: usize, theta: f64) {
    out.push(Gate::rz(c, theta / 2.0));
    out.push(Gate::cnot(c, t));
    out.push(Gate::rz(t, -theta / 2.0));
    out.push(Gate::cnot(c, t));
    out.push(Gate::rz(t, theta / 2.0));
}

/// `exp(-i θ/2 Z⊗Z)`.
fn rzz(out: &mut Vec<Gate>, a: usize, b: usize, theta: f64) {
    out.push(Gate::cnot(a, b));
    out.push(Gate::rz(b, theta));
    out.push(Gate::cnot(a, b));
}

fn swap3(out: &mut Vec<Gate>, a: usize, b: usize) {
    out.push(Gate::cnot(a, b));
    out.push(Gate::cnot(b, a));
    out.push(Gate::cnot(a, b));
}

/// Quantum Fourier transform on `n` qubits, qubit 0 least significant.
pub fn gen_qft(n: usize) -> Circuit {
    let mut g = Vec::new();
    for j in (0..n).rev() {
        g.push(Gate::h(j));
        for k in (0..j).rev() {
            cphase(&mut g, k, j, PI / (1u64 << (j - k)) as f64);
        }
    }
    for i in 0..n / 2 {
        swap3(&mut g, i, n - 1 - i);
    }
    build(n, g)
}

/// First-order Trotterization of the 1D transverse-field Ising model with
/// unit couplings.
pub fn gen_tfim(n: usize, steps: usize, dt: f64) -> Circuit {
    let mut g = Vec::new();
    for _ in 0..steps {
        for i in 0..n.saturating_sub(1) {
            rzz(&mut g, i, i + 1, 2.0 * dt);
        }
        for q in 0..n {
            g.push(Gate::rx(q, 2.0 * dt));
        }
    }
    build(n, g)
}

/// Ring plus a random matching of chords, so most vertices have degree 3.
pub fn qaoa_graph(n: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let add = |a: usize, b: usize, edges: &mut Vec<(usize, usize)>| {
        let e = (a.min(b), a.max(b));
        if a != b && !edges.contains(&e) {
            edges.push(e);
        }
    };
    for i in 0..n {
        add(i, (i + 1) % n, &mut edges);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for pair in order.chunks_exact(2) {
        add(pair[0], pair[1], &mut edges);
    }
    edges.sort_unstable();
    edges
}

/// QAOA MaxCut ansatz on [`qaoa_graph`] with seeded angles.
pub fn gen_qaoa_maxcut(n: usize, layers: usize, graph_seed: u64) -> Circuit {
    let edges = qaoa_graph(n, graph_seed);
    let mut rng = ChaCha8Rng::seed_from_u64(graph_seed ^ 0x5eed);
    let mut g: Vec<Gate> = (0..n).map(Gate::h).collect();
    for _ in 0..layers {
        let gamma: f64 = rng.gen_range(0.0..PI);
        let beta: f64 = rng.gen_range(0.0..PI);
        for &(a, b) in &edges {
            rzz(&mut g, a, b, gamma);
        }
        for q in 0..n {
            g.push(Gate::rx(q, 2.0 * beta));
        }
    }
    build(n, g)
}

/// Toffoli with six CNOTs.
fn ccx(out: &mut Vec<Gate>, a: usize, b: usize, c: usize) {
    let t = PI / 4.0;
    out.extend([
        Gate::h(c),
        Gate::cnot(b, c),
        Gate::rz(c, -t),
        Gate::cnot(a, c),
        Gate::rz(c, t),
        Gate::cnot(b, c),
        Gate::rz(c, -t),
        Gate::cnot(a, c),
        Gate::rz(b, t),
        Gate::rz(c, t),
        Gate::h(c),
        Gate::cnot(a, b),
        Gate::rz(a, t),
        Gate::rz(b, -t),
        Gate::cnot(a, b),
    ]);
}

fn maj(out: &mut Vec<Gate>, c: usize, b: usize, a: usize) {
    out.push(Gate::cnot(a, b));
    out.push(Gate::cnot(a, c));
    ccx(out, c, b, a);
}

fn uma(out: &mut Vec<Gate>, c: usize, b: usize, a: usize) {
    ccx(out, c, b, a);
    out.push(Gate::cnot(a, c));
    out.push(Gate::cnot(c, b));
}

/// Qubit indices of the adder registers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdderLayout {
    pub carry_in: usize,
    pub a: Vec<usize>,
    /// Holds `a + b` afterwards.
    pub b: Vec<usize>,
    pub carry_out: usize,
}

pub fn adder_layout(bits: usize) -> AdderLayout {
    AdderLayout {
        carry_in: 0,
        a: (0..bits).map(|i| 2 + 2 * i).collect(),
        b: (0..bits).map(|i| 1 + 2 * i).collect(),
        carry_out: 2 * bits + 1,
    }
}

/// In-place ripple-carry adder `b <- a + b` on `2*bits + 2` qubits.
pub fn gen_adder(bits: usize) -> Circuit {
    let l = adder_layout(bits);
    let mut g = Vec::new();
    maj(&mut g, l.carry_in, l.b[0], l.a[0]);
    for i in 1..bits {
        maj(&mut g, l.a[i - 1], l.b[i], l.a[i]);
    }
    g.push(Gate::cnot(l.a[bits - 1], l.carry_out));
    for i in (1..bits).rev() {
        uma(&mut g, l.a[i - 1], l.b[i], l.a[i]);
    }
    uma(&mut g, l.carry_in, l.b[0], l.a[0]);
    build(2 * bits + 2, g)
}
