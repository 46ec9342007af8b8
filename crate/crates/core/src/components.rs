//! Behavioral models for the component kinds: logic gates, processing units,
//! shared bus with FIFO arbitration, cache memory, coordinator/worker pairs
//! and neurons.
//!
//! The pure functions here ([`gate_evaluate`], [`gate_settle`],
//! [`bus_transfer`], [`cache_access`]) are closed forms that the event-driven
//! engine is cross-validated against in tests.

use serde::{Deserialize, Serialize};

use crate::engine::{SignalEvent, SimulationResult};
use crate::error::{Error, Result};
use crate::timespace::{transfer_time, SpeedFactor, TimePoint};

/// Identifier of a component within one scenario.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct ComponentId(pub u32);

impl std::fmt::Display for ComponentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Boolean operator of a logic gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    And,
    Or,
    Xor,
    Not,
}

impl GateKind {
    /// Number of inputs the gate waits for before it can settle.
    pub fn arity(&self) -> u32 {
        match self {
            GateKind::Not => 1,
            _ => 2,
        }
    }
}

impl std::fmt::Display for GateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GateKind::And => "and",
            GateKind::Or => "or",
            GateKind::Xor => "xor",
            GateKind::Not => "not",
        };
        f.write_str(s)
    }
}

/// What a component is and how it behaves, with kind-specific parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ComponentKind {
    /// Pure stimulus emitter. With `t_p > 0` it processes once at scenario
    /// start before its stimuli leave.
    Source,
    /// Logic gate; fires once when all inputs arrived and forwards its
    /// boolean result to every listed output.
    Gate {
        op: GateKind,
        outputs: Vec<ComponentId>,
    },
    /// Generic unit: gathers `inputs_required` arrivals into a batch,
    /// processes it for `t_p`, forwards to `outputs`, repeats.
    ProcessingUnit {
        #[serde(default = "default_one")]
        inputs_required: u32,
        #[serde(default)]
        outputs: Vec<ComponentId>,
    },
    /// Owner of a shared medium; queues requests in arrival order and issues
    /// grants one at a time.
    BusArbiter,
    /// Serves requests FIFO (ties broken by lower requester id), one at a
    /// time, and sends the result back to the requester.
    Cache,
    /// Organizing unit of parallelized-sequential processing: dispatches one
    /// task per worker strictly sequentially, then collects results in
    /// arrival order.
    Coordinator {
        workers: Vec<ComponentId>,
        t_dispatch: f64,
        t_recv: f64,
    },
    /// Processes one task for `t_p` and sends the result back.
    Worker { reply_to: ComponentId },
    /// Computes for `t_p` starting at scenario start, then transmits its
    /// result to `dest`: directly over a dedicated link, or through the
    /// shared medium when `arbiter` is set. Serializing the message onto the
    /// wire takes `t_msg`.
    Neuron {
        dest: ComponentId,
        #[serde(default)]
        arbiter: Option<ComponentId>,
        #[serde(default)]
        t_msg: f64,
    },
    /// Terminal consumer; latches each delivery for `t_p`.
    Sink,
}

fn default_one() -> u32 {
    1
}

impl ComponentKind {
    /// Stable lowercase name of the kind, used in traces and diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            ComponentKind::Source => "source",
            ComponentKind::Gate { .. } => "gate",
            ComponentKind::ProcessingUnit { .. } => "processing_unit",
            ComponentKind::BusArbiter => "bus_arbiter",
            ComponentKind::Cache => "cache",
            ComponentKind::Coordinator { .. } => "coordinator",
            ComponentKind::Worker { .. } => "worker",
            ComponentKind::Neuron { .. } => "neuron",
            ComponentKind::Sink => "sink",
        }
    }
}

/// A simulated element: identity, behavior, position (in time units) and
/// physical processing time `t_p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub id: ComponentId,
    pub name: String,
    pub kind: ComponentKind,
    pub position: TimePoint,
    pub t_p: f64,
}

impl ComponentSpec {
    pub fn new(
        id: u32,
        name: impl Into<String>,
        kind: ComponentKind,
        position: TimePoint,
        t_p: f64,
    ) -> Self {
        Self {
            id: ComponentId(id),
            name: name.into(),
            kind,
            position,
            t_p,
        }
    }
}

/// Evaluates a gate's truth table.
pub fn gate_evaluate(kind: GateKind, inputs: &[bool]) -> Result<bool> {
    if inputs.len() != kind.arity() as usize {
        return Err(Error::Domain(format!(
            "{kind} gate takes {} inputs, got {}",
            kind.arity(),
            inputs.len()
        )));
    }
    Ok(match kind {
        GateKind::And => inputs[0] && inputs[1],
        GateKind::Or => inputs[0] || inputs[1],
        GateKind::Xor => inputs[0] ^ inputs[1],
        GateKind::Not => !inputs[0],
    })
}

/// When and what a gate outputs, given the arrival times and values of its
/// inputs. Before the last input arrives the output is undefined; the gate
/// settles at `max(arrival times) + t_p`.
pub fn gate_settle(gate: &ComponentSpec, input_arrivals: &[(f64, bool)]) -> Result<(f64, bool)> {
    let op = match &gate.kind {
        ComponentKind::Gate { op, .. } => *op,
        other => {
            return Err(Error::Domain(format!(
                "gate_settle needs a gate, got a {}",
                other.name()
            )))
        }
    };
    if input_arrivals.len() != op.arity() as usize {
        return Err(Error::Domain(format!(
            "{op} gate at {} expects {} inputs, got {}",
            gate.id,
            op.arity(),
            input_arrivals.len()
        )));
    }
    let last_arrival = input_arrivals
        .iter()
        .map(|(t, _)| *t)
        .fold(f64::NEG_INFINITY, f64::max);
    let values: Vec<bool> = input_arrivals.iter().map(|(_, v)| *v).collect();
    let value = gate_evaluate(op, &values)?;
    Ok((last_arrival + gate.t_p, value))
}

/// Closed-form model of the shared medium: arbiter position, current
/// occupancy and the request queue.
///
/// At most one transfer occupies the bus at any instant; requests are served
/// in arrival order.
#[derive(Clone, Debug)]
pub struct BusProtocolState {
    arbiter_pos: TimePoint,
    speed: SpeedFactor,
    /// Request ids in arrival order that have entered but not yet completed.
    pub queue: Vec<u64>,
    /// Time until which the medium is occupied by the current transfer.
    pub busy_until: f64,
    /// Number of grants issued so far.
    pub grants_issued: u64,
}

impl BusProtocolState {
    pub fn new(arbiter_pos: TimePoint, speed: SpeedFactor) -> Self {
        Self {
            arbiter_pos,
            speed,
            queue: Vec::new(),
            busy_until: 0.0,
            grants_issued: 0,
        }
    }
}

/// Resolves one bus request to completion and returns the delivery time.
///
/// Protocol: the request propagates sender -> arbiter; when the bus is free a
/// grant propagates arbiter -> sender; the bus is occupied from grant
/// issuance until the message (serialization `t_msg` plus sender ->
/// destination propagation) fully arrives.
///
/// Callers submit requests in arrival order (ties broken by lower sender id);
/// each call advances the state by one grant.
pub fn bus_transfer(
    bus: &mut BusProtocolState,
    request: &SignalEvent,
    sender_pos: &TimePoint,
    dest_pos: &TimePoint,
    t_msg: f64,
) -> Result<f64> {
    if !(t_msg.is_finite() && t_msg >= 0.0) {
        return Err(Error::Domain(format!(
            "message duration must be non-negative, got {t_msg}"
        )));
    }
    let request_leg = transfer_time(sender_pos, &bus.arbiter_pos, bus.speed);
    let arrival = request.emit_time + request_leg;
    bus.queue.push(request.id);
    let granted_at = bus.busy_until.max(arrival);
    let grant_leg = transfer_time(&bus.arbiter_pos, sender_pos, bus.speed);
    let message_leg = transfer_time(sender_pos, dest_pos, bus.speed);
    let delivery = granted_at + grant_leg + t_msg + message_leg;
    bus.busy_until = delivery;
    bus.grants_issued += 1;
    bus.queue.retain(|&id| id != request.id);
    Ok(delivery)
}

/// Uncontended cache access at unit speed: the response arrives at
/// `request_time + T_t + cache.t_p + T_t` with
/// `T_t = transfer_time(core, cache)`.
pub fn cache_access(core: &ComponentSpec, cache: &ComponentSpec, request_time: f64) -> Result<f64> {
    let mut queue = CacheQueue::new(SpeedFactor::UNIT);
    queue.access(core, cache, request_time)
}

/// FIFO queueing model of a cache serving one request at a time; use for
/// contended access sequences (submit requests in arrival order, ties broken
/// by lower core id).
#[derive(Clone, Debug)]
pub struct CacheQueue {
    speed: SpeedFactor,
    busy_until: f64,
}

impl CacheQueue {
    pub fn new(speed: SpeedFactor) -> Self {
        Self {
            speed,
            busy_until: 0.0,
        }
    }

    /// Response time of the next request in FIFO order.
    pub fn access(
        &mut self,
        core: &ComponentSpec,
        cache: &ComponentSpec,
        request_time: f64,
    ) -> Result<f64> {
        if !(request_time.is_finite() && request_time >= 0.0) {
            return Err(Error::Domain(format!(
                "request time must be non-negative, got {request_time}"
            )));
        }
        let t_t = transfer_time(&core.position, &cache.position, self.speed);
        let arrival = request_time + t_t;
        let service_start = self.busy_until.max(arrival);
        self.busy_until = service_start + cache.t_p;
        Ok(service_start + cache.t_p + t_t)
    }
}

/// Runs the parallelized-sequential pattern: the coordinator dispatches one
/// task per worker strictly sequentially (`t_dispatch` each), workers process
/// for `t_work`, and results are collected in arrival order (`t_recv` each).
///
/// The returned result carries the full trace plus `makespan`, `efficiency`
/// (total worker payload over `(N+1) * makespan`) and `coordinator_idle`
/// metrics.
pub fn dispatch_and_collect(
    coordinator: &ComponentSpec,
    workers: &[ComponentSpec],
    t_dispatch: f64,
    t_work: f64,
    t_recv: f64,
) -> Result<SimulationResult> {
    if workers.is_empty() {
        return Err(Error::Domain("worker list must not be empty".into()));
    }
    for t in [t_dispatch, t_work, t_recv] {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain(format!(
                "dispatch/work/recv times must be non-negative, got {t}"
            )));
        }
    }
    let worker_ids: Vec<ComponentId> = workers.iter().map(|w| w.id).collect();
    let mut specs = Vec::with_capacity(workers.len() + 1);
    specs.push(ComponentSpec {
        kind: ComponentKind::Coordinator {
            workers: worker_ids,
            t_dispatch,
            t_recv,
        },
        t_p: 0.0,
        ..coordinator.clone()
    });
    for w in workers {
        specs.push(ComponentSpec {
            kind: ComponentKind::Worker {
                reply_to: coordinator.id,
            },
            t_p: t_work,
            ..w.clone()
        });
    }
    let scenario = crate::scenarios::Scenario::new("distributed", specs, Vec::new());
    scenario.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::SignalKind;
    use approx::assert_abs_diff_eq;

    fn gate(id: u32, op: GateKind, pos: TimePoint, t_p: f64) -> ComponentSpec {
        ComponentSpec::new(
            id,
            format!("g{id}"),
            ComponentKind::Gate {
                op,
                outputs: vec![],
            },
            pos,
            t_p,
        )
    }

    #[test]
    fn truth_tables() {
        assert!(!gate_evaluate(GateKind::Xor, &[true, true]).unwrap());
        assert!(!gate_evaluate(GateKind::And, &[true, false]).unwrap());
        assert!(gate_evaluate(GateKind::Or, &[false, true]).unwrap());
        assert!(gate_evaluate(GateKind::Not, &[false]).unwrap());
        assert!(gate_evaluate(GateKind::Not, &[true, false]).is_err());
        assert!(gate_evaluate(GateKind::And, &[true]).is_err());
    }

    /// The Listing-1 netlist, evaluated purely through the truth tables,
    /// must agree with binary addition on all eight input combinations.
    #[test]
    fn full_adder_matches_arithmetic() {
        for bits in 0..8u8 {
            let a = bits & 1 != 0;
            let b = bits & 2 != 0;
            let cin = bits & 4 != 0;
            let a_xor_b = gate_evaluate(GateKind::Xor, &[a, b]).unwrap();
            let a_and_b = gate_evaluate(GateKind::And, &[a, b]).unwrap();
            let cin_and = gate_evaluate(GateKind::And, &[cin, a_xor_b]).unwrap();
            let sum = gate_evaluate(GateKind::Xor, &[a_xor_b, cin]).unwrap();
            let cout = gate_evaluate(GateKind::Or, &[a_and_b, cin_and]).unwrap();
            let expected = a as u8 + b as u8 + cin as u8;
            assert_eq!(sum as u8 + 2 * (cout as u8), expected, "inputs {bits:03b}");
        }
    }

    #[test]
    fn settle_times() {
        let xor1 = gate(0, GateKind::Xor, TimePoint::ORIGIN, 1.0);
        let (t, _) = gate_settle(&xor1, &[(2.0, true), (2.2361, false)]).unwrap();
        assert_abs_diff_eq!(t, 3.2361, epsilon = 1e-9);

        let not = gate(1, GateKind::Not, TimePoint::ORIGIN, 1.0);
        let (t, v) = gate_settle(&not, &[(5.0, false)]).unwrap();
        assert_eq!((t, v), (6.0, true));

        let and = gate(2, GateKind::And, TimePoint::ORIGIN, 0.25);
        let (t, _) = gate_settle(&and, &[(3.0, true), (3.0, true)]).unwrap();
        assert_eq!(t, 3.25);

        assert!(gate_settle(&xor1, &[(1.0, true)]).is_err());
        let src = ComponentSpec::new(3, "s", ComponentKind::Source, TimePoint::ORIGIN, 0.0);
        assert!(gate_settle(&src, &[(1.0, true)]).is_err());
    }

    fn request(id: u64, source: u32, dest: u32, emit: f64) -> SignalEvent {
        SignalEvent {
            id,
            source: ComponentId(source),
            dest: ComponentId(dest),
            emit_time: emit,
            kind: SignalKind::Request,
            payload_bits: None,
        }
    }

    #[test]
    fn bus_two_competing_senders() {
        let origin = TimePoint::ORIGIN;
        let mut bus = BusProtocolState::new(origin, SpeedFactor::UNIT);
        let s1 = TimePoint::new(1.0, 0.0);
        let s2 = TimePoint::new(2.0, 0.0);
        let d1 = bus_transfer(&mut bus, &request(0, 1, 0, 0.0), &s1, &origin, 0.1).unwrap();
        let d2 = bus_transfer(&mut bus, &request(1, 2, 0, 0.0), &s2, &origin, 0.1).unwrap();
        assert_abs_diff_eq!(d1, 3.1, epsilon = 1e-9);
        assert_abs_diff_eq!(d2, 7.2, epsilon = 1e-9);
        assert_eq!(bus.grants_issued, 2);
        // payload is only the serialization windows
        assert_abs_diff_eq!(2.0 * 0.1 / d2, 0.0278, epsilon = 1e-4);
    }

    #[test]
    fn bus_single_sender_free_bus() {
        let origin = TimePoint::ORIGIN;
        let mut bus = BusProtocolState::new(origin, SpeedFactor::UNIT);
        let s = TimePoint::new(1.0, 0.0);
        let d = bus_transfer(&mut bus, &request(0, 1, 0, 0.0), &s, &origin, 0.1).unwrap();
        // request leg + grant leg + serialization + message leg
        assert_abs_diff_eq!(d, 3.1, epsilon = 1e-9);
    }

    #[test]
    fn bus_degenerate_zero_everything() {
        let origin = TimePoint::ORIGIN;
        let mut bus = BusProtocolState::new(origin, SpeedFactor::UNIT);
        let d = bus_transfer(&mut bus, &request(0, 1, 0, 2.5), &origin, &origin, 0.0).unwrap();
        assert_eq!(d, 2.5);
        assert!(bus_transfer(&mut bus, &request(1, 1, 0, 0.0), &origin, &origin, -1.0).is_err());
    }

    fn cache_pair(t_p: f64, y: f64) -> (ComponentSpec, ComponentSpec) {
        let core = ComponentSpec::new(
            0,
            "core0",
            ComponentKind::ProcessingUnit {
                inputs_required: 1,
                outputs: vec![],
            },
            TimePoint::new(-0.5, 0.0),
            0.0,
        );
        let cache = ComponentSpec::new(
            2,
            "cache",
            ComponentKind::Cache,
            TimePoint::new(0.0, y),
            t_p,
        );
        (core, cache)
    }

    #[test]
    fn cache_fig5_geometry() {
        let (core, cache) = cache_pair(1.0, 0.5);
        let resp = cache_access(&core, &cache, 0.0).unwrap();
        assert_abs_diff_eq!(resp, 2.4142136, epsilon = 1e-7);

        let (core, cache) = cache_pair(0.1, 0.5);
        let fast = cache_access(&core, &cache, 0.0).unwrap();
        assert_abs_diff_eq!(fast, 1.5142136, epsilon = 1e-7);
        assert_abs_diff_eq!(resp / fast, 1.5944, epsilon = 1e-4);

        // zero-processing limit: the distance alone bounds the access time
        let (core, cache) = cache_pair(0.0, 0.5);
        let lower = cache_access(&core, &cache, 0.0).unwrap();
        assert_abs_diff_eq!(lower, 2.0 * 0.7071067811865476, epsilon = 1e-12);
    }

    #[test]
    fn cache_queueing_respects_lower_bound() {
        let (core, cache) = cache_pair(1.0, 0.5);
        let mut q = CacheQueue::new(SpeedFactor::UNIT);
        let t_t = transfer_time(&core.position, &cache.position, SpeedFactor::UNIT);
        let mut last = 0.0f64;
        for k in 0..10 {
            let req = 0.05 * k as f64;
            let resp = q.access(&core, &cache, req).unwrap();
            assert!(resp - req >= 2.0 * t_t - 1e-12, "request {k} beat the wire");
            assert!(resp >= last, "FIFO order violated");
            last = resp;
        }
    }

    #[test]
    fn dispatch_and_collect_reference_traces() {
        let coordinator =
            ComponentSpec::new(0, "coordinator", ComponentKind::Sink, TimePoint::ORIGIN, 0.0);
        let workers: Vec<ComponentSpec> = (1..=2)
            .map(|k| {
                ComponentSpec::new(
                    k,
                    format!("worker_{k}"),
                    ComponentKind::Sink,
                    TimePoint::new(k as f64, 0.0),
                    0.0,
                )
            })
            .collect();
        let result = dispatch_and_collect(&coordinator, &workers, 0.1, 1.0, 0.1).unwrap();
        assert_abs_diff_eq!(result.makespan, 5.3, epsilon = 1e-9);
        assert_abs_diff_eq!(result.metrics["efficiency"], 0.1258, epsilon = 1e-4);
        assert_abs_diff_eq!(result.metrics["coordinator_idle"], 4.9, epsilon = 1e-9);

        let one = dispatch_and_collect(&coordinator, &workers[..1], 0.1, 1.0, 0.1).unwrap();
        assert_abs_diff_eq!(one.makespan, 3.2, epsilon = 1e-9);

        // zero-overhead, zero-distance: only one of two components does payload
        let co_located = vec![ComponentSpec::new(
            1,
            "worker_1",
            ComponentKind::Sink,
            TimePoint::ORIGIN,
            0.0,
        )];
        let degenerate = dispatch_and_collect(&coordinator, &co_located, 0.0, 1.0, 0.0).unwrap();
        assert_abs_diff_eq!(degenerate.makespan, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(degenerate.metrics["efficiency"], 0.5, epsilon = 1e-12);

        assert!(dispatch_and_collect(&coordinator, &[], 0.1, 1.0, 0.1).is_err());
    }

    #[test]
    fn coordinator_idle_grows_with_worker_count() {
        let coordinator =
            ComponentSpec::new(0, "coordinator", ComponentKind::Sink, TimePoint::ORIGIN, 0.0);
        let mut previous_idle = -1.0;
        for n in [1u32, 2, 4, 8, 16] {
            let workers: Vec<ComponentSpec> = (1..=n)
                .map(|k| {
                    ComponentSpec::new(
                        k,
                        format!("worker_{k}"),
                        ComponentKind::Sink,
                        TimePoint::new(k as f64, 0.0),
                        0.0,
                    )
                })
                .collect();
            let result = dispatch_and_collect(&coordinator, &workers, 0.1, 1.0, 0.1).unwrap();
            let idle = result.metrics["coordinator_idle"];
            assert!(idle > previous_idle, "idle not increasing at N={n}");
            previous_idle = idle;
        }
    }
}
