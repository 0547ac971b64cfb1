use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("bath specification must contain at least one bath")]
    NoBaths,

    #[error("no positive effective temperature: Γ₊ = {gamma_plus} must exceed Γ₋ = {gamma_minus}")]
    NoPositiveTemperature { gamma_plus: f64, gamma_minus: f64 },

    #[error("generator has no unique steady state (condition number {condition:.3e})")]
    DegenerateSteadyState { condition: f64 },

    #[error("time step {dt} exceeds the limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("jump probability {probability} per step is too large for the linearized jump process")]
    JumpProbabilityTooLarge { probability: f64 },

    #[error("conditional state trace collapsed to {trace} during a no-detection step")]
    TraceCollapse { trace: f64 },

    #[error("unknown bath index {index} (system has {count} baths)")]
    UnknownBath { index: usize, count: usize },

    #[error("coefficient of performance undefined: J_h + J_c = 0")]
    UndefinedCop,

    #[error("θ_m = {theta_m} is outside the near-edge regime of the closed-form zero-flow curve")]
    OutsideEdgeRegime { theta_m: f64 },

    #[error("energy flow does not change sign on the search interval")]
    NoSignChange,

    #[error("transient did not settle by t = {t_max}; remaining tail estimated at {tail:.3e}")]
    NotConverged { t_max: f64, tail: f64 },

    #[error("Fano factor diverges: Q_jump = 0")]
    FanoDivergent,

    #[error("record window of {available} bins is shorter than the requested {requested} lags")]
    WindowTooShort { available: usize, requested: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
