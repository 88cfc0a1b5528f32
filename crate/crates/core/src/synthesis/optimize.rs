use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::objective::Objective;
use super::template::Template;
use crate::error::{QgoError, Result};
use crate::sim::UnitaryMatrix;

pub const RESTARTS: usize = 8;
pub const MAX_ITERS: usize = 400;
pub const GRAD_TOL: f64 = 1e-10;

/// Below this the objective is at rounding level and further steps are noise.
const F_FLOOR: f64 = 4.0 * f64::EPSILON;
const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 50;
const STALL_WINDOW: usize = 20;
const STALL_TOL: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct OptimizeConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Skip the remaining restarts once a start reaches this distance.
    pub good_enough: f64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            restarts: RESTARTS,
            max_iters: MAX_ITERS,
            good_enough: 0.0,
        }
    }
}

/// Multi-start quasi-Newton fit of the template's angles to `target`.
pub fn optimize_params(
    tpl: &Template,
    target: &UnitaryMatrix,
    seed: u64,
) -> Result<(Vec<f64>, f64)> {
    optimize_params_with(tpl, target, seed, &OptimizeConfig::default())
}

pub fn optimize_params_with(
    tpl: &Template,
    target: &UnitaryMatrix,
    seed: u64,
    cfg: &OptimizeConfig,
) -> Result<(Vec<f64>, f64)> {
    if target.dim() != 1usize << tpl.num_qubits() {
        return Err(QgoError::DimensionMismatch(
            target.dim(),
            1usize << tpl.num_qubits(),
        ));
    }
    let obj = Objective::new(tpl, target);
    let n = tpl.num_params();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for r in 0..cfg.restarts.max(1) {
        let x0: Vec<f64> = if r == 0 {
            vec![0.0; n]
        } else {
            (0..n).map(|_| rng.gen_range(-PI..PI)).collect()
        };
        let (x, f) = bfgs(&obj, x0, cfg.max_iters);
        if best.as_ref().is_none_or(|(_, bf)| f < *bf) {
            best = Some((x, f));
        }
        if best.as_ref().is_some_and(|(_, bf)| *bf <= cfg.good_enough) {
            break;
        }
    }
    Ok(best.expect("at least one restart"))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn bfgs(obj: &Objective, mut x: Vec<f64>, max_iters: usize) -> (Vec<f64>, f64) {
    let n = x.len();
    if n == 0 {
        return (x, obj.value(&[]));
    }
    // inverse Hessian approximation, row-major
    let mut h = identity(n);
    let (mut f, mut g) = obj.value_and_gradient(&x);
    let mut history = vec![f];
    for _ in 0..max_iters {
        if f <= F_FLOOR || dot(&g, &g).sqrt() < GRAD_TOL {
            break;
        }
        let mut d: Vec<f64> = (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            h = identity(n);
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
            let fnew = obj.value(&xn);
            if fnew <= f + ARMIJO_C1 * alpha * slope {
                accepted = Some((xn, fnew));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, _)) = accepted else { break };
        let (fn_, gn) = obj.value_and_gradient(&xn);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-20 {
            bfgs_update(&mut h, &s, &y, sy);
        }
        x = xn;
        f = fn_;
        g = gn;
        history.push(f);
        if history.len() > STALL_WINDOW {
            let old = history[history.len() - 1 - STALL_WINDOW];
            if old - f < STALL_TOL {
                break;
            }
        }
    }
    (x, f)
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

/// H ← (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], y)).collect();
    let yhy = dot(y, &hy);
    let coef = (1.0 + rho * yhy) * rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}
