//! Recursive QAOA: optimize, round the strongest correlation into a sign
//! constraint, contract, repeat; brute-force the residual and lift back.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::CompleteParams;
use crate::ising::{
    ConstraintRecord, ConstraintStack, IsingError, IsingModel, Sign, SpinAssignment, Vertex,
    DEFAULT_BRUTE_FORCE_CAP,
};
use crate::qaoa::{optimize_instance, OptimizerConfig, ParameterSchedule, QaoaError, QaoaInstance};

/// Relative tolerance for uniform-weight detection.
const UNIFORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RqaoaError {
    #[error("model has no couplings left to contract")]
    NothingToContract,
    #[error("all correlations are below {tolerance:e} (largest |M| = {largest:e})")]
    DegenerateCorrelations { largest: f64, tolerance: f64 },
    #[error("analytic correlations unavailable: {0}")]
    AnalyticUnavailable(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(
        "offset bookkeeping mismatch: residual optimum {residual} vs re-evaluated {reevaluated}"
    )]
    OffsetMismatch { residual: f64, reevaluated: f64 },
    #[error(transparent)]
    Ising(#[from] IsingError),
    #[error(transparent)]
    Qaoa(#[from] QaoaError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrelationSource {
    Statevector,
    /// Closed-form `K_2n` formulas; only for uniform antiferromagnetic
    /// complete graphs at level 1.
    Analytic,
    /// Analytic where it applies, statevector otherwise.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TieBreak {
    Lexicographic,
    SeededRandom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RqaoaConfig {
    pub level: usize,
    /// Stop once at most this many vertices carry couplings.
    pub threshold: usize,
    pub correlation_source: CorrelationSource,
    pub tie_break: TieBreak,
    pub seed: u64,
    /// Below this largest |M| the round refuses to round.
    pub degenerate_tolerance: f64,
    /// Correlations within this of the largest |M| count as tied.
    pub tie_tolerance: f64,
    pub optimizer: OptimizerConfig,
    /// Use this schedule instead of optimizing (statevector only).
    pub fixed_schedule: Option<ParameterSchedule>,
    pub brute_force_cap: usize,
    /// Compute the exact optimum of the input by brute force up to this
    /// many vertices.
    pub optimum_cap: usize,
}

impl Default for RqaoaConfig {
    fn default() -> Self {
        Self {
            level: 1,
            threshold: 8,
            correlation_source: CorrelationSource::Auto,
            tie_break: TieBreak::Lexicographic,
            seed: 0,
            degenerate_tolerance: 1e-12,
            tie_tolerance: 1e-9,
            optimizer: OptimizerConfig::default(),
            fixed_schedule: None,
            brute_force_cap: DEFAULT_BRUTE_FORCE_CAP,
            optimum_cap: 22,
        }
    }
}

impl RqaoaConfig {
    fn validate(&self) -> Result<(), RqaoaError> {
        if self.level == 0 {
            return Err(RqaoaError::Config("level must be at least 1".into()));
        }
        if self.threshold < 2 {
            return Err(RqaoaError::Config(format!(
                "threshold {} is below 2",
                self.threshold
            )));
        }
        if self.threshold > self.brute_force_cap {
            return Err(RqaoaError::Config(format!(
                "threshold {} exceeds the brute-force cap {}",
                self.threshold, self.brute_force_cap
            )));
        }
        if self.degenerate_tolerance.is_nan()
            || self.degenerate_tolerance <= 0.0
            || self.tie_tolerance.is_nan()
            || self.tie_tolerance < 0.0
        {
            return Err(RqaoaError::Config("tolerances must be positive".into()));
        }
        if let Some(s) = &self.fixed_schedule {
            if s.level() != self.level {
                return Err(QaoaError::LevelMismatch {
                    schedule: s.level(),
                    requested: self.level,
                }
                .into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provider {
    Statevector,
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub round: usize,
    /// Eliminated vertex.
    pub eliminated: Vertex,
    /// Surviving vertex.
    pub surviving: Vertex,
    pub correlation: f64,
    pub sign: Sign,
    pub active_before: usize,
    pub active_after: usize,
    pub schedule: ParameterSchedule,
    pub expectation: f64,
    pub provider: Provider,
    /// Largest |M| over all couplings this round.
    pub max_abs_correlation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RqaoaSolution {
    pub assignment: SpinAssignment,
    pub value: f64,
    pub optimum: Option<f64>,
    pub ratio: Option<f64>,
    pub traces: Vec<RoundTrace>,
    pub constraints: ConstraintStack,
    /// Brute-force optimum of the final contracted model.
    pub residual_value: f64,
}

impl RqaoaSolution {
    /// Attaches an optimum known from elsewhere (e.g. `n²` for `K_2n`).
    pub fn with_optimum(mut self, optimum: f64) -> Self {
        self.optimum = Some(optimum);
        self.ratio = Some(self.value / optimum);
        self
    }
}

/// Correlations for every coupling of a model, in canonical pair order.
struct RoundCorrelations {
    pairs: Vec<(Vertex, Vertex)>,
    values: Vec<f64>,
    schedule: ParameterSchedule,
    expectation: f64,
    provider: Provider,
}

/// Active vertex set and shared coupling value when the couplings form a
/// complete graph with equal coefficients on the active vertices.
pub fn is_uniform_complete(model: &IsingModel) -> Option<(BTreeSet<Vertex>, f64)> {
    let active = model.active_vertices();
    let m = active.len();
    if m < 2 || model.coupling_count() != m * (m - 1) / 2 {
        return None;
    }
    let mut couplings = model.couplings();
    let (_, first) = couplings.next()?;
    let tol = UNIFORM_TOLERANCE * first.abs().max(1.0);
    couplings
        .all(|(_, c)| (c - first).abs() <= tol)
        .then_some((active, first))
}

/// Why the closed-form provider cannot serve this model, if it cannot.
fn analytic_obstacle(model: &IsingModel, level: usize) -> Result<(CompleteParams, f64), String> {
    if level != 1 {
        return Err(format!("closed form covers level 1 only, not {level}"));
    }
    let (active, weight) =
        is_uniform_complete(model).ok_or("couplings are not a uniform complete graph")?;
    if weight >= 0.0 {
        return Err(format!("coupling {weight} is not antiferromagnetic"));
    }
    if active.len() % 2 != 0 || active.len() < 4 {
        return Err(format!(
            "closed form needs an even complete graph of at least 4 vertices, got {}",
            active.len()
        ));
    }
    let params = CompleteParams::new(active.len() / 2).map_err(|e| e.to_string())?;
    Ok((params, weight))
}

fn analytic_correlations(
    model: &IsingModel,
    params: CompleteParams,
    weight: f64,
) -> RoundCorrelations {
    // J = -a/2 is the unit MAX-CUT model with γ rescaled by a, so the optimum
    // sits at γ*/a with the same β* and the same correlations.
    let scale = -2.0 * weight;
    let profile = params.maximize_f();
    let m = params.edge_correlation(profile.gamma, profile.beta_star);
    let pairs: Vec<_> = model.couplings().map(|(p, _)| p).collect();
    RoundCorrelations {
        values: vec![m; pairs.len()],
        expectation: model.offset() + weight * pairs.len() as f64 * m,
        pairs,
        schedule: ParameterSchedule::single(profile.gamma / scale, profile.beta_star),
        provider: Provider::Analytic,
    }
}

fn statevector_correlations(
    model: &IsingModel,
    config: &RqaoaConfig,
) -> Result<RoundCorrelations, RqaoaError> {
    let active = model.without_isolated();
    let instance = QaoaInstance::new(&active)?;
    let (schedule, expectation) = match &config.fixed_schedule {
        Some(s) => (s.clone(), instance.expectation(s)),
        None => {
            let report = optimize_instance(&instance, config.level, &config.optimizer)?;
            (report.best_schedule, report.best_value)
        }
    };
    let state = instance.state(&schedule);
    let pairs: Vec<_> = model.couplings().map(|(p, _)| p).collect();
    let values = state
        .correlations(&pairs)
        .map_err(|e| RqaoaError::Qaoa(e.into()))?;
    Ok(RoundCorrelations {
        pairs,
        values,
        schedule,
        expectation,
        provider: Provider::Statevector,
    })
}

fn round_correlations(
    model: &IsingModel,
    config: &RqaoaConfig,
) -> Result<RoundCorrelations, RqaoaError> {
    let forced = config.fixed_schedule.is_some();
    match config.correlation_source {
        CorrelationSource::Statevector => statevector_correlations(model, config),
        CorrelationSource::Analytic => {
            if forced {
                return Err(RqaoaError::AnalyticUnavailable(
                    "a fixed schedule needs the statevector provider".into(),
                ));
            }
            let (params, weight) =
                analytic_obstacle(model, config.level).map_err(RqaoaError::AnalyticUnavailable)?;
            Ok(analytic_correlations(model, params, weight))
        }
        CorrelationSource::Auto => match analytic_obstacle(model, config.level) {
            Ok((params, weight)) if !forced => Ok(analytic_correlations(model, params, weight)),
            _ => statevector_correlations(model, config),
        },
    }
}

/// One elimination round. `round` seeds the random tie-break.
pub fn rqaoa_round(
    model: &IsingModel,
    config: &RqaoaConfig,
    round: usize,
) -> Result<(IsingModel, ConstraintRecord, RoundTrace), RqaoaError> {
    if model.coupling_count() == 0 {
        return Err(RqaoaError::NothingToContract);
    }
    let corr = round_correlations(model, config)?;
    let largest = corr.values.iter().map(|m| m.abs()).fold(0.0, f64::max);
    if largest < config.degenerate_tolerance {
        return Err(RqaoaError::DegenerateCorrelations {
            largest,
            tolerance: config.degenerate_tolerance,
        });
    }
    let tied: Vec<usize> = (0..corr.values.len())
        .filter(|&k| corr.values[k].abs() >= largest - config.tie_tolerance)
        .collect();
    let pick = match config.tie_break {
        TieBreak::Lexicographic => tied[0],
        TieBreak::SeededRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(
                config.seed ^ (round as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            );
            tied[rng.gen_range(0..tied.len())]
        }
    };
    let (i, j) = corr.pairs[pick];
    let m = corr.values[pick];
    let sign = Sign::of(m);
    // higher id is eliminated
    let (reduced, record) = model.contract(j, i, sign)?;
    let trace = RoundTrace {
        round,
        eliminated: j,
        surviving: i,
        correlation: m,
        sign,
        active_before: model.active_vertices().len(),
        active_after: reduced.active_vertices().len(),
        schedule: corr.schedule,
        expectation: corr.expectation,
        provider: corr.provider,
        max_abs_correlation: largest,
    };
    Ok((reduced, record, trace))
}

/// Runs rounds until at most `threshold` vertices carry couplings, solves
/// the rest exactly and lifts the solution back to the input vertices.
pub fn run_rqaoa(model: &IsingModel, config: &RqaoaConfig) -> Result<RqaoaSolution, RqaoaError> {
    config.validate()?;
    let mut current = model.clone();
    let mut stack = ConstraintStack::new();
    let mut traces = Vec::new();
    while current.active_vertices().len() > config.threshold {
        let (next, record, trace) = rqaoa_round(&current, config, traces.len())?;
        stack.push(record)?;
        traces.push(trace);
        current = next;
    }

    let residual = current.without_isolated();
    let (residual_x, residual_value) = residual.brute_force_max_with_cap(config.brute_force_cap)?;
    let mut base = residual_x;
    for v in current.vertices() {
        if base.get(v).is_none() {
            base.set(v, Sign::Plus);
        }
    }
    let assignment = stack.reconstruct(&base)?;
    let value = model.energy(&assignment)?;
    let scale = 1.0 + model.couplings().map(|(_, c)| c.abs()).sum::<f64>() + model.offset().abs();
    if (value - residual_value).abs() > 1e-9 * scale {
        return Err(RqaoaError::OffsetMismatch {
            residual: residual_value,
            reevaluated: value,
        });
    }

    let optimum = if model.vertex_count() <= config.optimum_cap.min(config.brute_force_cap) {
        Some(model.brute_force_max_with_cap(config.brute_force_cap)?.1)
    } else {
        None
    };
    Ok(RqaoaSolution {
        ratio: optimum.map(|o| value / o),
        assignment,
        value,
        optimum,
        traces,
        constraints: stack,
        residual_value,
    })
}
