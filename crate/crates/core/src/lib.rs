//! Classical simulation of QAOA and recursive QAOA for MAX-CUT.
//!
//! - [`ising`]: weighted Ising models, exhaustive maximization, contraction
//!   and solution reconstruction.
//! - [`statevector`] and [`qaoa`]: exact dense simulation of the level-p
//!   circuit and optimization of its angles.
//! - [`analytic`]: closed-form level-1 quantities on complete graphs `K_2n`.
//! - [`rqaoa`]: the recursive elimination loop.

pub mod analytic;
pub mod ising;
pub mod optimize;
pub mod qaoa;
pub mod rqaoa;
pub mod statevector;

pub use analytic::{AnalyticError, CompleteParams, GammaProfile, PositivityReport};
pub use ising::{
    parse_edge_list, serialize_edge_list, ConstraintRecord, ConstraintStack, IsingError,
    IsingModel, Sign, SpinAssignment, Vertex,
};
pub use qaoa::{
    optimize_schedule, OptimizationReport, OptimizerConfig, ParameterSchedule, QaoaError,
    QaoaInstance,
};
pub use rqaoa::{
    is_uniform_complete, rqaoa_round, run_rqaoa, CorrelationSource, RoundTrace, RqaoaConfig,
    RqaoaError, RqaoaSolution, TieBreak,
};
pub use statevector::{SimError, Statevector};
