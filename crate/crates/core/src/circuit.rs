//! State-vector simulation of the layered matchgate ansatz and a seeded,
//! parallel Monte-Carlo estimator of the loss mean and variance.
//!
//! Each layer applies `e^{−iθZ_q}` for `q = 1..n`, then `e^{−iθX_qX_{q+1}}` for
//! `q = 1..n−1`, every gate with its own angle drawn uniformly from `[0, 2π)`.
//! Sample `k` draws its angles from ChaCha stream `k` of the master seed, so
//! estimates do not depend on how samples are scheduled across threads.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dense::{self, c, CMatrix};
use crate::error::{BpError, Result};
use crate::operator::PauliSumOperator;
use crate::pauli::{Pauli1, PauliTerm};

/// Largest qubit count for state-vector simulation.
pub const SIMULATION_LIMIT: usize = 20;

/// Minimum sample count accepted by the variance estimator.
pub const MIN_SAMPLES: usize = 100;

const NORM_TOL: f64 = 1e-8;
const IMAG_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    /// `Z_q`, 1-based qubit.
    Z(usize),
    /// `X_q X_{q+1}`, 1-based qubit.
    XX(usize),
}

impl Gate {
    pub fn generator(&self, n: usize) -> Result<PauliTerm> {
        match *self {
            Gate::Z(q) => PauliTerm::single(n, q, Pauli1::Z),
            Gate::XX(q) => {
                let a = PauliTerm::single(n, q, Pauli1::X)?;
                let b = PauliTerm::single(n, q + 1, Pauli1::X)?;
                Ok(a.mul_unchecked(&b))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CircuitSpec {
    pub n: usize,
    pub layers: usize,
    pub seed: u64,
}

impl CircuitSpec {
    /// `layers = None` selects `n²`.
    pub fn new(n: usize, layers: Option<usize>, seed: u64) -> Result<Self> {
        if n == 0 || n > SIMULATION_LIMIT {
            return Err(BpError::OutOfRange(format!("simulation needs 1 <= n <= {SIMULATION_LIMIT}, got {n}")));
        }
        Ok(Self { n, layers: layers.unwrap_or(n * n), seed })
    }

    pub fn gates_per_layer(&self) -> usize {
        2 * self.n - 1
    }

    pub fn parameter_count(&self) -> usize {
        self.layers * self.gates_per_layer()
    }

    /// Gate sequence in application order.
    pub fn gates(&self) -> Vec<Gate> {
        let one: Vec<Gate> = (1..=self.n).map(Gate::Z).chain((1..self.n).map(Gate::XX)).collect();
        one.iter().copied().cycle().take(self.parameter_count()).collect()
    }

    /// Angles for sample `index`.
    pub fn draw_angles(&self, index: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        (0..self.parameter_count()).map(|_| rng.random_range(0.0..TAU)).collect()
    }
}

fn bit_of(n: usize, qubit: usize) -> usize {
    1 << (n - qubit)
}

fn apply_z(psi: &mut [Complex64], n: usize, qubit: usize, theta: f64) {
    let bit = bit_of(n, qubit);
    let down = Complex64::from_polar(1.0, -theta);
    let up = down.conj();
    for (b, amp) in psi.iter_mut().enumerate() {
        *amp *= if b & bit == 0 { down } else { up };
    }
}

fn apply_xx(psi: &mut [Complex64], n: usize, qubit: usize, theta: f64) {
    let flip = bit_of(n, qubit) | bit_of(n, qubit + 1);
    let low = bit_of(n, qubit + 1);
    let (s, co) = theta.sin_cos();
    let mix = c(0.0, -s);
    for b in 0..psi.len() {
        // Visit each pair once, from the member with qubit q+1 cleared.
        if b & low != 0 {
            continue;
        }
        let partner = b ^ flip;
        let (a0, a1) = (psi[b], psi[partner]);
        psi[b] = a0 * co + a1 * mix;
        psi[partner] = a1 * co + a0 * mix;
    }
}

fn check_vector(n: usize, psi: &[Complex64]) -> Result<()> {
    if psi.len() != 1 << n {
        return Err(BpError::InvalidInput(format!("state has {} amplitudes, expected {}", psi.len(), 1usize << n)));
    }
    Ok(())
}

/// Applies `U(θ)` in place; `angles` must have one entry per gate.
pub fn apply_circuit_in_place(psi: &mut [Complex64], spec: &CircuitSpec, angles: &[f64]) -> Result<()> {
    let n = spec.n;
    check_vector(n, psi)?;
    if angles.len() != spec.parameter_count() {
        return Err(BpError::InvalidInput(format!(
            "expected {} angles, got {}",
            spec.parameter_count(),
            angles.len()
        )));
    }
    for (gate, &theta) in spec.gates().iter().zip(angles) {
        match *gate {
            Gate::Z(q) => apply_z(psi, n, q, theta),
            Gate::XX(q) => apply_xx(psi, n, q, theta),
        }
    }
    Ok(())
}

pub fn apply_circuit(psi: &[Complex64], spec: &CircuitSpec, angles: &[f64]) -> Result<Vec<Complex64>> {
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(BpError::InvalidInput(format!("state has squared norm {norm}, expected 1")));
    }
    let mut out = psi.to_vec();
    apply_circuit_in_place(&mut out, spec, angles)?;
    Ok(out)
}

/// Dense `U(θ)`, built column by column.
pub fn circuit_unitary(spec: &CircuitSpec, angles: &[f64]) -> Result<CMatrix> {
    dense::check_dense("circuit unitary", spec.n)?;
    let d = 1usize << spec.n;
    let mut u = CMatrix::zeros(d, d);
    let mut col = vec![c(0.0, 0.0); d];
    for j in 0..d {
        col.iter_mut().for_each(|z| *z = c(0.0, 0.0));
        col[j] = c(1.0, 0.0);
        apply_circuit_in_place(&mut col, spec, angles)?;
        u.set_column(j, &nalgebra::DVector::from_column_slice(&col));
    }
    Ok(u)
}

/// `⟨ψ|O|ψ⟩` from the Pauli expansion of `O`.
pub fn expectation(psi: &[Complex64], o: &PauliSumOperator) -> Complex64 {
    let mut acc = c(0.0, 0.0);
    for (term, coef) in o.iter() {
        let mut inner = c(0.0, 0.0);
        for (b, amp) in psi.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let (row, factor) = term.act_on_basis(b);
            inner += psi[row].conj() * factor * amp;
        }
        acc += coef * inner;
    }
    acc
}

/// Input state as a mixture of pure branches.
#[derive(Clone, Debug)]
pub enum InputState {
    Pure(Vec<Complex64>),
    Mixed(Vec<(f64, Vec<Complex64>)>),
}

impl InputState {
    pub fn pure(psi: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(BpError::InvalidInput(format!("state has squared norm {norm}, expected 1")));
        }
        Ok(Self::Pure(psi))
    }

    /// Eigen-branches of a density operator; branches below `1e−14` weight are dropped.
    pub fn from_density(rho: &PauliSumOperator) -> Result<Self> {
        dense::check_dense("density eigendecomposition", rho.n())?;
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > NORM_TOL {
            return Err(BpError::InvalidInput(format!("state has trace {tr}, expected 1")));
        }
        let (values, vectors) = dense::hermitian_eigen(&rho.to_dense()?);
        let mut branches = Vec::new();
        for (k, &w) in values.iter().enumerate() {
            if w < -1e-10 {
                return Err(BpError::InvalidInput(format!("state is not positive (eigenvalue {w:.3e})")));
            }
            if w > 1e-14 {
                branches.push((w, vectors.column(k).iter().copied().collect()));
            }
        }
        if branches.len() == 1 {
            let (_, psi) = branches.pop().expect("one branch");
            return Ok(Self::Pure(psi));
        }
        Ok(Self::Mixed(branches))
    }

    pub fn n(&self) -> usize {
        let len = match self {
            Self::Pure(psi) => psi.len(),
            Self::Mixed(b) => b.first().map_or(1, |(_, psi)| psi.len()),
        };
        len.trailing_zeros() as usize
    }

    fn branches(&self) -> Vec<(f64, &[Complex64])> {
        match self {
            Self::Pure(psi) => vec![(1.0, psi.as_slice())],
            Self::Mixed(b) => b.iter().map(|(w, psi)| (*w, psi.as_slice())).collect(),
        }
    }
}

fn check_observable(n: usize, o: &PauliSumOperator) -> Result<()> {
    crate::error::ensure_same_n(n, o.n())?;
    let defect = o.hermiticity_defect();
    if defect > IMAG_TOL {
        return Err(BpError::Precondition(format!("observable is not Hermitian (defect {defect:.3e})")));
    }
    Ok(())
}

fn losses_for_angles(input: &InputState, observables: &[PauliSumOperator], spec: &CircuitSpec, angles: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; observables.len()];
    let mut psi = Vec::new();
    for (w, branch) in input.branches() {
        psi.clear();
        psi.extend_from_slice(branch);
        apply_circuit_in_place(&mut psi, spec, angles)?;
        for (slot, o) in out.iter_mut().zip(observables) {
            let v = expectation(&psi, o);
            if v.im.abs() > IMAG_TOL {
                return Err(BpError::Tolerance(format!("loss has imaginary part {:.3e}", v.im)));
            }
            *slot += w * v.re;
        }
    }
    Ok(out)
}

/// Loss of sample `index` for each observable, sharing one angle draw.
pub fn sample_losses(input: &InputState, observables: &[PauliSumOperator], spec: &CircuitSpec, index: u64) -> Result<Vec<f64>> {
    losses_for_angles(input, observables, spec, &spec.draw_angles(index))
}

pub fn sample_loss(input: &InputState, o: &PauliSumOperator, spec: &CircuitSpec, index: u64) -> Result<f64> {
    check_observable(spec.n, o)?;
    Ok(sample_losses(input, std::slice::from_ref(o), spec, index)?[0])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub samples: usize,
    pub mean_hat: f64,
    pub var_hat: f64,
    pub stderr_var: f64,
    pub seed: u64,
    pub layers: usize,
}

/// Sum by recursive halving; the split points depend only on the length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean, `N−1` sample variance, and its standard error from the
/// central second and fourth moments.
pub fn summarize(xs: &[f64], spec: &CircuitSpec) -> McEstimate {
    let count = xs.len() as f64;
    let mean = pairwise_sum(xs) / count;
    let dev2: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let m2 = pairwise_sum(&dev2) / count;
    let dev4: Vec<f64> = dev2.iter().map(|v| v * v).collect();
    let m4 = pairwise_sum(&dev4) / count;
    McEstimate {
        samples: xs.len(),
        mean_hat: mean,
        var_hat: if xs.len() > 1 { m2 * count / (count - 1.0) } else { 0.0 },
        stderr_var: ((m4 - m2 * m2).max(0.0) / count).sqrt(),
        seed: spec.seed,
        layers: spec.layers,
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| BpError::InvalidInput(format!("cannot build worker pool: {e}")))
}

/// Estimates for several observables from the same angle draws.
///
/// `workers = 0` uses the default thread count. Per-sample losses are collected
/// in sample order before reduction, so results are identical for any `workers`.
pub fn estimate_variance_multi(
    input: &InputState,
    observables: &[PauliSumOperator],
    spec: &CircuitSpec,
    samples: usize,
    workers: usize,
) -> Result<Vec<McEstimate>> {
    if samples < MIN_SAMPLES {
        return Err(BpError::InvalidInput(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    crate::error::ensure_same_n(spec.n, input.n())?;
    for o in observables {
        check_observable(spec.n, o)?;
    }
    let rows: Vec<Vec<f64>> = pool(workers)?.install(|| {
        (0..samples as u64)
            .into_par_iter()
            .map(|k| sample_losses(input, observables, spec, k))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok((0..observables.len())
        .map(|j| {
            let column: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            summarize(&column, spec)
        })
        .collect())
}

pub fn estimate_variance(
    input: &InputState,
    o: &PauliSumOperator,
    spec: &CircuitSpec,
    samples: usize,
    workers: usize,
) -> Result<McEstimate> {
    Ok(estimate_variance_multi(input, std::slice::from_ref(o), spec, samples, workers)?.remove(0))
}
