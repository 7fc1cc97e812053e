//! Dense statevector simulation of the QAOA layers.
//!
//! Basis convention: bit `q` of a basis index is the spin of `register[q]`,
//! with bit 0 meaning +1 and bit 1 meaning -1. Correlation signs depend on it.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::ising::{IsingModel, SpinAssignment, Vertex};

/// Largest register the dense simulator accepts.
pub const DEFAULT_QUBIT_CAP: usize = 24;

/// Registers at or above this size split amplitude loops across threads.
const PARALLEL_QUBITS: usize = 14;

/// Fixed block size for reductions, so sums do not depend on thread count.
const REDUCE_BLOCK: usize = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("register of {qubits} qubits is outside 1..={cap}")]
    SizeLimit { qubits: usize, cap: usize },
    #[error("register does not match the model: {0}")]
    Registration(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(Vertex),
    #[error("correlation needs two distinct vertices, got {0} twice")]
    SamePair(Vertex),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    amplitudes: Vec<Complex64>,
    qubit_order: Vec<Vertex>,
}

impl Statevector {
    /// Uniform superposition on qubits labelled `0..n`.
    pub fn plus(n: usize) -> Result<Self, SimError> {
        Self::plus_on((0..n).collect())
    }

    /// Uniform superposition with `register[q]` the vertex of qubit `q`.
    pub fn plus_on(register: Vec<Vertex>) -> Result<Self, SimError> {
        let n = register.len();
        check_size(n)?;
        let amp = Complex64::new((0.5f64).powf(n as f64 / 2.0), 0.0);
        Ok(Self {
            amplitudes: vec![amp; 1 << n],
            qubit_order: register,
        })
    }

    /// Computational basis state for `x` over `register`.
    pub fn basis(register: Vec<Vertex>, x: &SpinAssignment) -> Result<Self, SimError> {
        check_size(register.len())?;
        let idx = x
            .basis_index(&register)
            .map_err(|e| SimError::Registration(e.to_string()))?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << register.len()];
        amplitudes[idx as usize] = Complex64::new(1.0, 0.0);
        Ok(Self {
            amplitudes,
            qubit_order: register,
        })
    }

    /// Wraps raw amplitudes; the caller is responsible for normalization.
    pub fn from_amplitudes(
        register: Vec<Vertex>,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self, SimError> {
        check_size(register.len())?;
        if amplitudes.len() != 1 << register.len() {
            return Err(SimError::Registration(format!(
                "{} amplitudes for {} qubits",
                amplitudes.len(),
                register.len()
            )));
        }
        Ok(Self {
            amplitudes,
            qubit_order: register,
        })
    }

    pub fn qubits(&self) -> usize {
        self.qubit_order.len()
    }

    pub fn register(&self) -> &[Vertex] {
        &self.qubit_order
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        blocked_sum(&self.amplitudes, |_, a| a.norm_sqr()).sqrt()
    }

    fn position(&self, v: Vertex) -> Result<usize, SimError> {
        self.qubit_order
            .iter()
            .position(|&u| u == v)
            .ok_or(SimError::UnknownVertex(v))
    }

    /// Multiplies each amplitude by `exp(-i γ d(x))` for a precomputed
    /// diagonal `d`.
    pub fn apply_diagonal_phase(&mut self, diagonal: &CostDiagonal, gamma: f64) {
        assert_eq!(diagonal.values.len(), self.amplitudes.len());
        let apply = |(a, &e): (&mut Complex64, &f64)| {
            *a *= Complex64::from_polar(1.0, -gamma * e);
        };
        if self.qubits() >= PARALLEL_QUBITS {
            self.amplitudes
                .par_iter_mut()
                .zip(diagonal.values.par_iter())
                .for_each(apply);
        } else {
            self.amplitudes
                .iter_mut()
                .zip(&diagonal.values)
                .for_each(apply);
        }
    }

    /// Applies `exp(-i γ Σ J_ij Z_i Z_j)`; the offset only contributes a
    /// global phase and is left out.
    pub fn apply_phase_layer(&mut self, model: &IsingModel, gamma: f64) -> Result<(), SimError> {
        let diag = CostDiagonal::new(model, &self.qubit_order)?;
        self.apply_diagonal_phase(&diag, gamma);
        Ok(())
    }

    /// Applies `exp(-i β X)` to every qubit.
    pub fn apply_mixer_layer(&mut self, beta: f64) {
        let c = Complex64::new(beta.cos(), 0.0);
        let s = Complex64::new(0.0, -beta.sin());
        let rotate = move |(a0, a1): (&mut Complex64, &mut Complex64)| {
            let (x0, x1) = (*a0, *a1);
            *a0 = c * x0 + s * x1;
            *a1 = s * x0 + c * x1;
        };
        let parallel = self.qubits() >= PARALLEL_QUBITS;
        for q in 0..self.qubits() {
            let half = 1usize << q;
            let pass = |chunk: &mut [Complex64]| {
                let (lo, hi) = chunk.split_at_mut(half);
                lo.iter_mut().zip(hi.iter_mut()).for_each(rotate);
            };
            if parallel {
                self.amplitudes.par_chunks_mut(2 * half).for_each(pass);
            } else {
                self.amplitudes.chunks_mut(2 * half).for_each(pass);
            }
        }
    }

    /// `offset + Σ J_ij <Z_i Z_j>`.
    pub fn expectation_energy(&self, model: &IsingModel) -> Result<f64, SimError> {
        let diag = CostDiagonal::new(model, &self.qubit_order)?;
        Ok(self.expectation_diagonal(&diag))
    }

    pub fn expectation_diagonal(&self, diagonal: &CostDiagonal) -> f64 {
        diagonal.offset + blocked_sum(&self.amplitudes, |x, a| a.norm_sqr() * diagonal.values[x])
    }

    /// `<Z_i Z_j>` for two registered vertices.
    pub fn correlation(&self, i: Vertex, j: Vertex) -> Result<f64, SimError> {
        if i == j {
            return Err(SimError::SamePair(i));
        }
        let mask = (1usize << self.position(i)?) | (1usize << self.position(j)?);
        Ok(blocked_sum(&self.amplitudes, |x, a| {
            let p = a.norm_sqr();
            if (x & mask).count_ones() == 1 {
                -p
            } else {
                p
            }
        }))
    }

    /// Correlations for each pair, sharing one pass over the probabilities.
    pub fn correlations(&self, pairs: &[(Vertex, Vertex)]) -> Result<Vec<f64>, SimError> {
        let masks = pairs
            .iter()
            .map(|&(i, j)| {
                if i == j {
                    return Err(SimError::SamePair(i));
                }
                Ok((1usize << self.position(i)?) | (1usize << self.position(j)?))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let probs: Vec<f64> = self.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        Ok(masks
            .iter()
            .map(|&mask| {
                blocked_sum(
                    &probs,
                    |x, &p| {
                        if (x & mask).count_ones() == 1 {
                            -p
                        } else {
                            p
                        }
                    },
                )
            })
            .collect())
    }
}

fn check_size(n: usize) -> Result<(), SimError> {
    if n == 0 || n > DEFAULT_QUBIT_CAP {
        return Err(SimError::SizeLimit {
            qubits: n,
            cap: DEFAULT_QUBIT_CAP,
        });
    }
    Ok(())
}

/// Sum of `f(index, item)` over fixed-size blocks, added in block order.
fn blocked_sum<T: Sync>(items: &[T], f: impl Fn(usize, &T) -> f64 + Sync) -> f64 {
    let block = |(b, chunk): (usize, &[T])| {
        chunk
            .iter()
            .enumerate()
            .map(|(k, t)| f(b * REDUCE_BLOCK + k, t))
            .sum::<f64>()
    };
    let partials: Vec<f64> = if items.len() >= 1 << PARALLEL_QUBITS {
        items
            .par_chunks(REDUCE_BLOCK)
            .enumerate()
            .map(block)
            .collect()
    } else {
        items.chunks(REDUCE_BLOCK).enumerate().map(block).collect()
    };
    partials.iter().sum()
}

/// Diagonal of `Σ J_ij Z_i Z_j` over a register, plus the model offset.
#[derive(Debug, Clone, PartialEq)]
pub struct CostDiagonal {
    values: Vec<f64>,
    offset: f64,
}

impl CostDiagonal {
    /// Every vertex of the model must be registered and vice versa.
    pub fn new(model: &IsingModel, register: &[Vertex]) -> Result<Self, SimError> {
        check_size(register.len())?;
        let expected = model.register();
        let mut sorted = register.to_vec();
        sorted.sort_unstable();
        if sorted != expected {
            return Err(SimError::Registration(format!(
                "register {register:?} vs model vertices {expected:?}"
            )));
        }
        let pos = |v: Vertex| register.iter().position(|&u| u == v).unwrap();
        let terms: Vec<(usize, f64)> = model
            .couplings()
            .map(|((i, j), c)| ((1usize << pos(i)) | (1usize << pos(j)), c))
            .collect();
        let eval = |x: usize| {
            terms
                .iter()
                .map(|&(mask, c)| if (x & mask).count_ones() == 1 { -c } else { c })
                .sum::<f64>()
        };
        let dim = 1usize << register.len();
        let values = if register.len() >= PARALLEL_QUBITS {
            (0..dim).into_par_iter().map(eval).collect()
        } else {
            (0..dim).map(eval).collect()
        };
        Ok(Self {
            values,
            offset: model.offset(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}
