//! Crate-wide error type.

use crate::components::ComponentId;

/// Errors produced by simulation, validation, parsing and the analytic models.
///
/// Parse-time problems are split into distinct variants (syntax, schema,
/// duplicate id, dangling reference) so callers can react to each separately.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Both processing and transfer time were zero; the apparent-time formula
    /// is undefined for an event that neither computes nor moves.
    #[error("degenerate input: processing and transfer time are both zero")]
    DegenerateApparentTime,

    /// An event was scheduled before the simulation's current time.
    #[error("cannot schedule event at t={time}, simulation already at t={now}")]
    ScheduleInPast { time: f64, now: f64 },

    /// The component graph contains a cycle with zero total delay, which
    /// would livelock the event loop. The offending component ids are listed
    /// in traversal order.
    #[error("zero-delay dependency cycle: {0:?}")]
    ZeroDelayCycle(Vec<ComponentId>),

    /// A component id was referenced that does not exist in the scenario.
    #[error("unknown component id {0}")]
    UnknownComponent(ComponentId),

    /// Payload fraction is undefined when nothing ever happened.
    #[error("makespan is zero; payload fraction is undefined")]
    ZeroMakespan,

    /// A scenario failed validation for a reason other than the dedicated
    /// variants below.
    #[error("invalid scenario: {0}")]
    Scenario(String),

    /// A gate received more input signals than its arity allows.
    #[error("gate {gate} received more than {arity} inputs")]
    ExtraGateInput { gate: ComponentId, arity: u32 },

    /// A signal of a kind the destination cannot handle was delivered.
    #[error("component {dest} cannot handle a '{kind}' signal")]
    UnexpectedSignal { dest: ComponentId, kind: String },

    /// The scenario document is not well-formed JSON.
    #[error("syntax error: {0}")]
    Syntax(String),

    /// The document is valid JSON but violates the scenario schema.
    #[error("schema violation: {0}")]
    Schema(String),

    /// Two components (or two stimuli) share an id, or two components share
    /// a name.
    #[error("duplicate id: {0}")]
    DuplicateId(String),

    /// A stimulus or component parameter references an id that is not
    /// declared in the component list.
    #[error("dangling reference to component id {0}")]
    DanglingReference(ComponentId),

    /// Underlying file-system failure while reading or writing.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
