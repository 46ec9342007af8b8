//! Deterministic simulator and analytic toolkit for the temporal behavior of
//! computing components.
//!
//! Components (gates, processing units, buses, caches, coordinators, neurons)
//! live at positions expressed in *time units*: a spatial coordinate is the
//! time a signal needs to traverse it at the scenario's interaction speed.
//! On top of that coordinate system the crate provides:
//!
//! * [`timespace`] — closed-form arithmetic: coordinate conversion, transfer
//!   times between positions, and the apparent-time formula
//!   `T_A = sqrt(T_t^2 + (2*T_p + T_t)^2)`.
//! * [`engine`] — a deterministic discrete-event kernel with finite-speed
//!   signal propagation and exhaustive interval accounting (payload /
//!   transfer / arbitration / blocked / idle) that tiles every component's
//!   lifetime exactly.
//! * [`components`] — behavioral models: logic gates, shared bus with FIFO
//!   arbitration, cache memory, coordinator/worker dispatch.
//! * [`scenarios`] — ready-to-run builders for six case studies: observer
//!   chain, one-bit adder, shared bus, distributed coordinator, on-chip
//!   cache, and an ANN layer firing over a shared medium.
//! * [`analytic`] — closed-form performance models: operand-length speedup
//!   and the parallel-efficiency surface over (N, 1-alpha).
//! * [`io`] — JSON scenario files, CSV trace export, SVG timing diagrams.

pub mod analytic;
pub mod components;
pub mod engine;
pub mod error;
pub mod io;
pub mod scenarios;
pub mod timespace;

pub use components::{ComponentId, ComponentKind, ComponentSpec, GateKind};
pub use engine::{
    IntervalState, SignalEvent, SignalKind, SimulationResult, TraceInterval, TransferRecord,
};
pub use error::Error;
pub use scenarios::Scenario;
pub use timespace::{ApparentTime, SpeedFactor, TimePoint};
