//! Level-p QAOA on top of the dense simulator, and the classical outer loop
//! that picks its angles.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ising::{IsingModel, Vertex};
use crate::optimize::{golden_section_max, nelder_mead_max, SimplexSettings};
use crate::statevector::{CostDiagonal, SimError, Statevector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QaoaError {
    #[error("level must be at least 1")]
    ZeroLevel,
    #[error("schedule has {gammas} gammas and {betas} betas")]
    LengthMismatch { gammas: usize, betas: usize },
    #[error("schedule level {schedule} does not match requested level {requested}")]
    LevelMismatch { schedule: usize, requested: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Angles `(γ_1, β_1), …, (γ_p, β_p)` in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSchedule {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl ParameterSchedule {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self, QaoaError> {
        if gammas.len() != betas.len() {
            return Err(QaoaError::LengthMismatch {
                gammas: gammas.len(),
                betas: betas.len(),
            });
        }
        if gammas.is_empty() {
            return Err(QaoaError::ZeroLevel);
        }
        Ok(Self { gammas, betas })
    }

    pub fn single(gamma: f64, beta: f64) -> Self {
        Self {
            gammas: vec![gamma],
            betas: vec![beta],
        }
    }

    /// Interleaved `[γ_1, β_1, γ_2, β_2, …]`.
    pub fn from_flat(params: &[f64]) -> Self {
        Self {
            gammas: params.iter().step_by(2).copied().collect(),
            betas: params.iter().skip(1).step_by(2).copied().collect(),
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas
            .iter()
            .zip(&self.betas)
            .flat_map(|(&g, &b)| [g, b])
            .collect()
    }

    pub fn level(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }
}

/// A model compiled for repeated QAOA evaluation: register plus cost
/// diagonal.
#[derive(Debug, Clone)]
pub struct QaoaInstance {
    register: Vec<Vertex>,
    diagonal: CostDiagonal,
}

impl QaoaInstance {
    pub fn new(model: &IsingModel) -> Result<Self, QaoaError> {
        let register = model.register();
        let diagonal = CostDiagonal::new(model, &register)?;
        Ok(Self { register, diagonal })
    }

    pub fn register(&self) -> &[Vertex] {
        &self.register
    }

    /// `|ψ⟩ = Π_k e^{-iβ_k B} e^{-iγ_k C} |+⟩^n`, layers applied in order.
    pub fn state(&self, schedule: &ParameterSchedule) -> Statevector {
        let mut state =
            Statevector::plus_on(self.register.clone()).expect("register size checked at compile");
        for (&g, &b) in schedule.gammas.iter().zip(&schedule.betas) {
            state.apply_diagonal_phase(&self.diagonal, g);
            state.apply_mixer_layer(b);
        }
        state
    }

    pub fn expectation(&self, schedule: &ParameterSchedule) -> f64 {
        self.state(schedule).expectation_diagonal(&self.diagonal)
    }

    pub fn expectation_of(&self, state: &Statevector) -> f64 {
        state.expectation_diagonal(&self.diagonal)
    }
}

pub fn qaoa_state(
    model: &IsingModel,
    schedule: &ParameterSchedule,
) -> Result<Statevector, QaoaError> {
    Ok(QaoaInstance::new(model)?.state(schedule))
}

pub fn expectation_energy(state: &Statevector, model: &IsingModel) -> Result<f64, QaoaError> {
    Ok(state.expectation_energy(model)?)
}

pub fn correlation(state: &Statevector, i: Vertex, j: Vertex) -> Result<f64, QaoaError> {
    Ok(state.correlation(i, j)?)
}

/// Settings for [`optimize_schedule`].
///
/// Level 1 scans a `gamma_steps × beta_steps` grid over γ ∈ [0, 2π),
/// β ∈ [0, π) and refines the best point with coordinate-wise golden
/// section. Higher levels run Nelder–Mead from a ramp start and
/// `multistarts` seeded random starts.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub gamma_steps: usize,
    pub beta_steps: usize,
    pub tolerance: f64,
    pub max_cycles: usize,
    pub multistarts: usize,
    pub seed: u64,
    pub simplex: SimplexSettings,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            gamma_steps: 64,
            beta_steps: 64,
            tolerance: 1e-9,
            max_cycles: 200,
            multistarts: 8,
            seed: 0,
            simplex: SimplexSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Strategy {
    GridGolden {
        gamma_steps: usize,
        beta_steps: usize,
        cycles: usize,
    },
    MultistartSimplex {
        starts: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub best_schedule: ParameterSchedule,
    pub best_value: f64,
    pub evaluations: usize,
    pub strategy: Strategy,
}

/// Tracks the best evaluated point; ties keep the earlier one.
struct Incumbent {
    params: Vec<f64>,
    value: f64,
    evaluations: usize,
}

impl Incumbent {
    fn offer(&mut self, params: &[f64], value: f64) {
        self.evaluations += 1;
        if value > self.value {
            self.value = value;
            self.params = params.to_vec();
        }
    }
}

/// Maximizes the QAOA expectation over level-`level` schedules.
pub fn optimize_schedule(
    model: &IsingModel,
    level: usize,
    config: &OptimizerConfig,
) -> Result<OptimizationReport, QaoaError> {
    let instance = QaoaInstance::new(model)?;
    optimize_instance(&instance, level, config)
}

pub fn optimize_instance(
    instance: &QaoaInstance,
    level: usize,
    config: &OptimizerConfig,
) -> Result<OptimizationReport, QaoaError> {
    if level == 0 {
        return Err(QaoaError::ZeroLevel);
    }
    let (mut inc, p1_cycles) = level_one(instance, config);
    if level == 1 {
        return Ok(OptimizationReport {
            best_schedule: ParameterSchedule::from_flat(&inc.params),
            best_value: inc.value,
            evaluations: inc.evaluations,
            strategy: Strategy::GridGolden {
                gamma_steps: config.gamma_steps,
                beta_steps: config.beta_steps,
                cycles: p1_cycles,
            },
        });
    }

    let (g1, b1) = (inc.params[0], inc.params[1]);
    let mut starts = Vec::with_capacity(config.multistarts + 1);
    // linear ramp built from the level-1 optimum
    starts.push(
        (0..level)
            .flat_map(|k| {
                let t = (k as f64 + 0.5) / level as f64;
                [2.0 * t * g1, 2.0 * (1.0 - t) * b1]
            })
            .collect::<Vec<_>>(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.multistarts {
        starts.push(
            (0..level)
                .flat_map(|_| [rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..PI)])
                .collect(),
        );
    }
    let results: Vec<(Vec<f64>, f64, usize)> = starts
        .par_iter()
        .map(|start| {
            let mut local = Incumbent {
                params: start.clone(),
                value: f64::NEG_INFINITY,
                evaluations: 0,
            };
            let r = nelder_mead_max(
                |x| {
                    let v = instance.expectation(&ParameterSchedule::from_flat(x));
                    local.offer(x, v);
                    v
                },
                start,
                &config.simplex,
            );
            debug_assert_eq!(r.evaluations, local.evaluations);
            (local.params, local.value, local.evaluations)
        })
        .collect();
    inc = Incumbent {
        params: Vec::new(),
        value: f64::NEG_INFINITY,
        evaluations: inc.evaluations,
    };
    for (params, value, evals) in results {
        inc.evaluations += evals - 1;
        inc.offer(&params, value);
    }
    Ok(OptimizationReport {
        best_schedule: ParameterSchedule::from_flat(&inc.params),
        best_value: inc.value,
        evaluations: inc.evaluations,
        strategy: Strategy::MultistartSimplex {
            starts: starts.len(),
            seed: config.seed,
        },
    })
}

fn level_one(instance: &QaoaInstance, config: &OptimizerConfig) -> (Incumbent, usize) {
    let gs = config.gamma_steps.max(1);
    let bs = config.beta_steps.max(1);
    let dg = 2.0 * PI / gs as f64;
    let db = PI / bs as f64;
    let eval = |g: f64, b: f64| instance.expectation(&ParameterSchedule::single(g, b));

    let values: Vec<f64> = (0..gs * bs)
        .into_par_iter()
        .map(|k| eval((k / bs) as f64 * dg, (k % bs) as f64 * db))
        .collect();
    let mut inc = Incumbent {
        params: vec![0.0, 0.0],
        value: f64::NEG_INFINITY,
        evaluations: 0,
    };
    for (k, &v) in values.iter().enumerate() {
        inc.offer(&[(k / bs) as f64 * dg, (k % bs) as f64 * db], v);
    }

    let tol = config.tolerance;
    let (mut hg, mut hb) = (dg, db);
    let mut cycles = 0;
    while cycles < config.max_cycles {
        cycles += 1;
        let (g0, b0) = (inc.params[0], inc.params[1]);
        let line = |inc: &mut Incumbent, along_gamma: bool| {
            let (g, b) = (inc.params[0], inc.params[1]);
            let mut probes = Vec::new();
            let (lo, hi) = if along_gamma {
                (g - hg, g + hg)
            } else {
                (b - hb, b + hb)
            };
            golden_section_max(
                |t| {
                    let v = if along_gamma { eval(t, b) } else { eval(g, t) };
                    probes.push((t, v));
                    v
                },
                lo,
                hi,
                tol,
            );
            for (t, v) in probes {
                let p = if along_gamma { [t, b] } else { [g, t] };
                inc.offer(&p, v);
            }
        };
        line(&mut inc, true);
        line(&mut inc, false);
        let (mg, mb) = ((inc.params[0] - g0).abs(), (inc.params[1] - b0).abs());
        if mg.max(mb) <= tol {
            break;
        }
        // pattern step along this cycle's displacement
        let (dgc, dbc) = (inc.params[0] - g0, inc.params[1] - b0);
        let (gp, bp) = (inc.params[0], inc.params[1]);
        let mut probes = Vec::new();
        golden_section_max(
            |t| {
                let v = eval(gp + t * dgc, bp + t * dbc);
                probes.push((t, v));
                v
            },
            -1.0,
            4.0,
            tol / mg.max(mb),
        );
        for (t, v) in probes {
            inc.offer(&[gp + t * dgc, bp + t * dbc], v);
        }
        hg = (4.0 * mg).clamp(10.0 * tol, dg);
        hb = (4.0 * mb).clamp(10.0 * tol, db);
    }
    (inc, cycles)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_validation() {
        assert_eq!(
            ParameterSchedule::new(vec![0.1], vec![]),
            Err(QaoaError::LengthMismatch {
                gammas: 1,
                betas: 0
            })
        );
        assert_eq!(
            ParameterSchedule::new(vec![], vec![]),
            Err(QaoaError::ZeroLevel)
        );
        let s = ParameterSchedule::new(vec![0.1, 0.2], vec![0.3, 0.4]).unwrap();
        assert_eq!(s.level(), 2);
        assert_eq!(ParameterSchedule::from_flat(&s.to_flat()), s);
    }

    #[test]
    fn zero_schedule_is_plus_state() {
        let model = IsingModel::complete(4).unwrap();
        let s = qaoa_state(&model, &ParameterSchedule::single(0.0, 0.0)).unwrap();
        assert_eq!(s, Statevector::plus(4).unwrap());
    }

    #[test]
    fn identity_layers_extend_schedules() {
        let model = IsingModel::complete(5).unwrap();
        let one = qaoa_state(&model, &ParameterSchedule::single(0.7, 0.3)).unwrap();
        let two = qaoa_state(
            &model,
            &ParameterSchedule::new(vec![0.7, 0.0], vec![0.3, 0.0]).unwrap(),
        )
        .unwrap();
        for (a, b) in one.amplitudes().iter().zip(two.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn complete_graph_correlations_are_symmetric() {
        let model = IsingModel::complete(4).unwrap();
        let pairs: Vec<_> = model.couplings().map(|(p, _)| p).collect();
        for (g, b) in [(0.4, 0.2), (1.9, 2.7), (5.0, 0.05)] {
            let s = qaoa_state(&model, &ParameterSchedule::single(g, b)).unwrap();
            let m = s.correlations(&pairs).unwrap();
            assert!(m.iter().all(|&v| (v - m[0]).abs() <= 1e-12));
        }
        let s = qaoa_state(
            &model,
            &ParameterSchedule::new(vec![0.4, 1.1], vec![0.9, 0.2]).unwrap(),
        )
        .unwrap();
        let m = s.correlations(&pairs).unwrap();
        assert!(m.iter().all(|&v| (v - m[0]).abs() <= 1e-12));
    }

    #[test]
    fn single_edge_is_solved_at_level_one() {
        let model = IsingModel::complete(2).unwrap();
        let r = optimize_schedule(&model, 1, &OptimizerConfig::default()).unwrap();
        assert!((r.best_value - 1.0).abs() < 1e-6);
        let inst = QaoaInstance::new(&model).unwrap();
        assert!((inst.expectation(&r.best_schedule) - r.best_value).abs() <= 1e-9);
    }

    #[test]
    fn k4_level_one_below_optimum() {
        let model = IsingModel::complete(4).unwrap();
        let r = optimize_schedule(&model, 1, &OptimizerConfig::default()).unwrap();
        assert!(r.best_value / 4.0 < 1.0);
        assert!(r.best_value > 3.0);
    }

    #[test]
    fn grid_includes_plus_baseline() {
        let model = IsingModel::maxcut(&[(0, 1, 1.0), (1, 2, 3.0), (0, 3, -1.0)]).unwrap();
        let r = optimize_schedule(&model, 1, &OptimizerConfig::default()).unwrap();
        assert!(r.best_value >= model.offset());
    }

    #[test]
    fn level_two_beats_level_one() {
        let model = IsingModel::complete(5).unwrap();
        let config = OptimizerConfig {
            multistarts: 3,
            ..OptimizerConfig::default()
        };
        let r1 = optimize_schedule(&model, 1, &config).unwrap();
        let r2 = optimize_schedule(&model, 2, &config).unwrap();
        assert!(r2.best_value >= r1.best_value - 1e-9);
        assert_eq!(r2.best_schedule.level(), 2);
        let inst = QaoaInstance::new(&model).unwrap();
        assert!((inst.expectation(&r2.best_schedule) - r2.best_value).abs() <= 1e-9);
        assert!(matches!(
            r2.strategy,
            Strategy::MultistartSimplex { starts: 4, .. }
        ));
    }

    #[test]
    fn optimizer_is_deterministic() {
        let model =
            IsingModel::maxcut(&[(0, 1, 1.0), (1, 2, 0.5), (2, 3, 2.0), (3, 0, 1.0)]).unwrap();
        let a = optimize_schedule(&model, 2, &OptimizerConfig::default()).unwrap();
        let b = optimize_schedule(&model, 2, &OptimizerConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_level_rejected() {
        let model = IsingModel::complete(3).unwrap();
        assert_eq!(
            optimize_schedule(&model, 0, &OptimizerConfig::default()),
            Err(QaoaError::ZeroLevel)
        );
    }
}
