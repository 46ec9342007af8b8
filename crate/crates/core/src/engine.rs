//! Deterministic discrete-event kernel.
//!
//! Signals propagate at the scenario's finite interaction speed; a
//! computation starts only after all its required inputs have physically
//! arrived, and an output leaves only after the producing computation
//! completed. Every component's lifetime is tiled exactly by trace intervals
//! (payload / transfer_wait / arbitration / blocked / idle); signal flights
//! are recorded separately as [`TransferRecord`]s.
//!
//! Two runs of the same scenario produce bit-identical results: the event
//! queue is ordered by `(time, event id)` and all collections iterate in a
//! deterministic order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::components::{gate_evaluate, ComponentId, ComponentKind, ComponentSpec};
use crate::error::{Error, Result};
use crate::scenarios::Scenario;
use crate::timespace::{transfer_time, TimePoint};

/// What a signal means to its receiver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    Data,
    Request,
    Grant,
    Result,
}

impl std::fmt::Display for SignalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SignalKind::Data => "data",
            SignalKind::Request => "request",
            SignalKind::Grant => "grant",
            SignalKind::Result => "result",
        };
        f.write_str(s)
    }
}

/// A timed message between two components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalEvent {
    pub id: u64,
    pub source: ComponentId,
    pub dest: ComponentId,
    pub emit_time: f64,
    pub kind: SignalKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload_bits: Option<Vec<bool>>,
}

/// Accounting state of a component over one interval of its life.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalState {
    /// Useful computation.
    Payload,
    /// Occupied by a transfer of its own output: serializing onto a medium,
    /// or (for the medium itself) carrying a message in flight.
    TransferWait,
    /// Protocol or organizational housekeeping: competing for a shared
    /// medium, granting, dispatching, collecting.
    Arbitration,
    /// Some, but not all, required inputs have arrived.
    Blocked,
    /// Powered and ready, doing nothing.
    Idle,
}

impl std::fmt::Display for IntervalState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            IntervalState::Payload => "payload",
            IntervalState::TransferWait => "transfer_wait",
            IntervalState::Arbitration => "arbitration",
            IntervalState::Blocked => "blocked",
            IntervalState::Idle => "idle",
        };
        f.write_str(s)
    }
}

/// One accounted interval of a component's life.
///
/// Per component, intervals are non-overlapping and tile `[0, makespan]`
/// exactly. Zero-length payload intervals mark instantaneous latches.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceInterval {
    pub component: ComponentId,
    pub start: f64,
    pub end: f64,
    pub state: IntervalState,
    pub detail: String,
}

/// A delivered signal flight: emission at the source position, arrival at the
/// destination position, `arrival - emit == transfer_time` always.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferRecord {
    pub signal: u64,
    pub source: ComponentId,
    pub dest: ComponentId,
    pub kind: SignalKind,
    pub emit_time: f64,
    pub arrival_time: f64,
    pub payload_bits: Option<Vec<bool>>,
}

/// Position and identity of a component, kept with the result so traces and
/// diagrams can be rendered without the original scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentMeta {
    pub id: ComponentId,
    pub name: String,
    pub kind: String,
    pub position: TimePoint,
}

/// Everything a finished run produced.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationResult {
    pub makespan: f64,
    /// Component intervals, grouped by component in scenario order,
    /// chronological within each component.
    pub trace: Vec<TraceInterval>,
    /// Signal flights in emission order.
    pub transfers: Vec<TransferRecord>,
    /// Exact per-component aggregation of trace intervals by state.
    pub utilization: BTreeMap<ComponentId, BTreeMap<IntervalState, f64>>,
    /// Scenario-specific named numbers.
    pub metrics: BTreeMap<String, f64>,
    pub components: Vec<ComponentMeta>,
}

impl SimulationResult {
    /// Per-state time totals of one component.
    pub fn component_utilization(
        &self,
        component: ComponentId,
    ) -> Result<&BTreeMap<IntervalState, f64>> {
        self.utilization
            .get(&component)
            .ok_or(Error::UnknownComponent(component))
    }

    /// Total payload time over all components divided by
    /// `component count * makespan`. Errors when the makespan is zero.
    pub fn payload_fraction(&self) -> Result<f64> {
        if self.makespan <= 0.0 || self.components.is_empty() {
            return Err(Error::ZeroMakespan);
        }
        let payload: f64 = self
            .utilization
            .values()
            .filter_map(|per_state| per_state.get(&IntervalState::Payload))
            .sum();
        Ok(payload / (self.components.len() as f64 * self.makespan))
    }
}

/// Per-state time totals of one component (operation form of
/// [`SimulationResult::component_utilization`]).
pub fn utilization(
    result: &SimulationResult,
    component: ComponentId,
) -> Result<&BTreeMap<IntervalState, f64>> {
    result.component_utilization(component)
}

/// Operation form of [`SimulationResult::payload_fraction`].
pub fn payload_fraction(result: &SimulationResult) -> Result<f64> {
    result.payload_fraction()
}

enum EventPayload {
    /// A signal leaves its source position.
    Emit(SignalEvent),
    /// A signal physically reaches its destination.
    Arrival(SignalEvent),
    /// Internal bookkeeping for a component.
    Control(ComponentId, Control),
}

#[derive(Clone, Copy, Debug)]
enum Control {
    /// The current computation of the component finishes.
    Complete,
    /// The shared medium becomes free again.
    BusFree,
    /// The coordinator finishes the dispatch slot with this worker index.
    DispatchDone(u32),
    /// The coordinator finishes collecting one result.
    RecvDone,
}

struct QueuedEvent {
    time: f64,
    id: u64,
    payload: EventPayload,
}

impl PartialEq for QueuedEvent {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}
impl Eq for QueuedEvent {}
impl PartialOrd for QueuedEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueuedEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap, we want (time, id) ascending
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Interval accounting for one component. `accounted_until` advances
/// monotonically; gaps are filled with a residual state, busy intervals are
/// pushed explicitly. Zero-length busy intervals are kept (instantaneous
/// latches), zero-length gaps are not.
struct Account {
    component: ComponentId,
    accounted_until: f64,
    intervals: Vec<TraceInterval>,
}

impl Account {
    fn new(component: ComponentId) -> Self {
        Self {
            component,
            accounted_until: 0.0,
            intervals: Vec::new(),
        }
    }

    fn fill_gap(&mut self, until: f64, state: IntervalState, detail: &str) {
        if until > self.accounted_until {
            self.intervals.push(TraceInterval {
                component: self.component,
                start: self.accounted_until,
                end: until,
                state,
                detail: detail.to_string(),
            });
            self.accounted_until = until;
        }
    }

    fn push_busy(&mut self, start: f64, end: f64, state: IntervalState, detail: String) {
        debug_assert!(
            start >= self.accounted_until,
            "busy interval starts inside accounted time: {} < {}",
            start,
            self.accounted_until
        );
        self.intervals.push(TraceInterval {
            component: self.component,
            start,
            end,
            state,
            detail,
        });
        self.accounted_until = end;
    }
}

/// Runtime state machine of one component, driven by the event loop.
enum Runtime {
    Source,
    Gate {
        arrivals: Vec<(f64, bool)>,
        fired: bool,
        value: Option<bool>,
    },
    /// Generic batch processor: observers, workers, sinks, cache cores.
    Unit {
        required: u32,
        outputs: Vec<ComponentId>,
        out_kind: SignalKind,
        pending: Vec<(f64, u64, Option<Vec<bool>>)>,
        busy: bool,
        batch_bits: Option<Vec<bool>>,
    },
    Arbiter {
        queue: Vec<(f64, ComponentId)>,
        busy: bool,
    },
    Cache {
        queue: Vec<(f64, ComponentId)>,
        serving: Option<ComponentId>,
    },
    Coordinator {
        results: Vec<(f64, ComponentId)>,
        busy: bool,
    },
    Neuron {
        awaiting_grant: bool,
    },
}

impl Runtime {
    fn for_kind(kind: &ComponentKind) -> Runtime {
        match kind {
            ComponentKind::Source => Runtime::Source,
            ComponentKind::Gate { .. } => Runtime::Gate {
                arrivals: Vec::new(),
                fired: false,
                value: None,
            },
            ComponentKind::ProcessingUnit {
                inputs_required,
                outputs,
            } => Runtime::Unit {
                required: *inputs_required,
                outputs: outputs.clone(),
                out_kind: SignalKind::Data,
                pending: Vec::new(),
                busy: false,
                batch_bits: None,
            },
            ComponentKind::BusArbiter => Runtime::Arbiter {
                queue: Vec::new(),
                busy: false,
            },
            ComponentKind::Cache => Runtime::Cache {
                queue: Vec::new(),
                serving: None,
            },
            ComponentKind::Coordinator { .. } => Runtime::Coordinator {
                results: Vec::new(),
                busy: false,
            },
            ComponentKind::Worker { reply_to } => Runtime::Unit {
                required: 1,
                outputs: vec![*reply_to],
                out_kind: SignalKind::Result,
                pending: Vec::new(),
                busy: false,
                batch_bits: None,
            },
            ComponentKind::Neuron { .. } => Runtime::Neuron {
                awaiting_grant: false,
            },
            ComponentKind::Sink => Runtime::Unit {
                required: 1,
                outputs: Vec::new(),
                out_kind: SignalKind::Data,
                pending: Vec::new(),
                busy: false,
                batch_bits: None,
            },
        }
    }
}

fn insert_by_arrival(queue: &mut Vec<(f64, ComponentId)>, entry: (f64, ComponentId)) {
    let pos = queue
        .binary_search_by(|(t, s)| t.total_cmp(&entry.0).then(s.cmp(&entry.1)))
        .unwrap_or_else(|e| e);
    queue.insert(pos, entry);
}

/// A configured simulation: schedule extra signals, then [`Simulation::run`].
pub struct Simulation {
    scenario: Scenario,
    index: BTreeMap<ComponentId, usize>,
    queue: BinaryHeap<QueuedEvent>,
    next_id: u64,
    now: f64,
    max_time: f64,
    runtimes: Vec<Runtime>,
    accounts: Vec<Account>,
    transfers: Vec<TransferRecord>,
    emitted: u64,
}

/// Validates and runs a scenario. Metrics are left empty; use
/// [`Scenario::run`] for named scenario metrics.
pub fn run(scenario: &Scenario) -> Result<SimulationResult> {
    Simulation::new(scenario)?.run()
}

impl Simulation {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let index: BTreeMap<ComponentId, usize> = scenario
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id, i))
            .collect();
        let runtimes = scenario
            .components
            .iter()
            .map(|c| Runtime::for_kind(&c.kind))
            .collect();
        let accounts = scenario
            .components
            .iter()
            .map(|c| Account::new(c.id))
            .collect();
        Ok(Self {
            scenario: scenario.clone(),
            index,
            queue: BinaryHeap::new(),
            next_id: 0,
            now: 0.0,
            max_time: 0.0,
            runtimes,
            accounts,
            transfers: Vec::new(),
            emitted: 0,
        })
    }

    /// Enqueues a signal at its emission time and returns the event id under
    /// which it was queued. Ties on time are processed in ascending id
    /// order; scheduling before the simulation's current time is an error.
    pub fn schedule(&mut self, event: SignalEvent) -> Result<u64> {
        if !event.emit_time.is_finite() {
            return Err(Error::Domain(format!(
                "emit time must be finite, got {}",
                event.emit_time
            )));
        }
        if event.emit_time < self.now {
            return Err(Error::ScheduleInPast {
                time: event.emit_time,
                now: self.now,
            });
        }
        if !self.index.contains_key(&event.source) {
            return Err(Error::UnknownComponent(event.source));
        }
        if !self.index.contains_key(&event.dest) {
            return Err(Error::UnknownComponent(event.dest));
        }
        Ok(self.push_emit(
            event.source,
            event.dest,
            event.emit_time,
            event.kind,
            event.payload_bits,
        ))
    }

    fn push(&mut self, time: f64, payload: EventPayload) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        self.queue.push(QueuedEvent { time, id, payload });
        id
    }

    fn push_emit(
        &mut self,
        source: ComponentId,
        dest: ComponentId,
        emit_time: f64,
        kind: SignalKind,
        payload_bits: Option<Vec<bool>>,
    ) -> u64 {
        self.emitted += 1;
        let signal = SignalEvent {
            id: self.next_id,
            source,
            dest,
            emit_time,
            kind,
            payload_bits,
        };
        self.push(emit_time, EventPayload::Emit(signal))
    }

    fn spec(&self, id: ComponentId) -> &ComponentSpec {
        &self.scenario.components[self.index[&id]]
    }

    fn flight_time(&self, a: ComponentId, b: ComponentId) -> f64 {
        transfer_time(
            &self.spec(a).position,
            &self.spec(b).position,
            self.scenario.speed,
        )
    }

    fn startup(&mut self) -> Result<()> {
        for i in 0..self.scenario.components.len() {
            let (id, t_p, kind) = {
                let spec = &self.scenario.components[i];
                (spec.id, spec.t_p, spec.kind.clone())
            };
            match kind {
                ComponentKind::Source => {
                    if t_p > 0.0 {
                        self.accounts[i].push_busy(
                            0.0,
                            t_p,
                            IntervalState::Payload,
                            "stimulus".into(),
                        );
                    }
                }
                ComponentKind::Neuron { .. } => {
                    self.accounts[i].push_busy(0.0, t_p, IntervalState::Payload, "compute".into());
                    self.push(t_p, EventPayload::Control(id, Control::Complete));
                }
                ComponentKind::Coordinator {
                    workers,
                    t_dispatch,
                    ..
                } => {
                    if !workers.is_empty() {
                        let detail = format!("dispatch {}", self.spec(workers[0]).name);
                        self.accounts[i].push_busy(
                            0.0,
                            t_dispatch,
                            IntervalState::Arbitration,
                            detail,
                        );
                        if let Runtime::Coordinator { busy, .. } = &mut self.runtimes[i] {
                            *busy = true;
                        }
                        self.push(
                            t_dispatch,
                            EventPayload::Control(id, Control::DispatchDone(0)),
                        );
                    }
                }
                _ => {}
            }
        }
        let stimuli = self.scenario.stimuli.clone();
        for stim in stimuli {
            self.schedule(stim)?;
        }
        Ok(())
    }

    pub fn run(&mut self) -> Result<SimulationResult> {
        self.startup()?;
        while let Some(event) = self.queue.pop() {
            debug_assert!(event.time >= self.now, "time ran backwards");
            self.now = event.time;
            self.max_time = self.max_time.max(event.time);
            match event.payload {
                EventPayload::Emit(signal) => self.handle_emit(signal),
                EventPayload::Arrival(signal) => self.handle_arrival(signal)?,
                EventPayload::Control(component, control) => {
                    self.handle_control(component, control)?
                }
            }
        }
        Ok(self.finalize())
    }

    fn handle_emit(&mut self, signal: SignalEvent) {
        let arrival_time = signal.emit_time + self.flight_time(signal.source, signal.dest);
        self.transfers.push(TransferRecord {
            signal: signal.id,
            source: signal.source,
            dest: signal.dest,
            kind: signal.kind,
            emit_time: signal.emit_time,
            arrival_time,
            payload_bits: signal.payload_bits.clone(),
        });
        self.push(arrival_time, EventPayload::Arrival(signal));
    }

    fn handle_arrival(&mut self, signal: SignalEvent) -> Result<()> {
        let i = self.index[&signal.dest];
        match &self.runtimes[i] {
            Runtime::Source => Err(Error::UnexpectedSignal {
                dest: signal.dest,
                kind: signal.kind.to_string(),
            }),
            Runtime::Gate { .. } => self.gate_arrival(i, signal),
            Runtime::Unit { .. } => self.unit_arrival(i, signal),
            Runtime::Arbiter { .. } => self.arbiter_arrival(i, signal),
            Runtime::Cache { .. } => self.cache_arrival(i, signal),
            Runtime::Coordinator { .. } => self.coordinator_arrival(i, signal),
            Runtime::Neuron { .. } => self.neuron_grant_arrival(i, signal),
        }
    }

    fn handle_control(&mut self, component: ComponentId, control: Control) -> Result<()> {
        let i = self.index[&component];
        match control {
            Control::Complete => match &self.runtimes[i] {
                Runtime::Gate { .. } => {
                    self.gate_complete(i);
                    Ok(())
                }
                Runtime::Unit { .. } => {
                    self.unit_complete(i);
                    Ok(())
                }
                Runtime::Cache { .. } => {
                    self.cache_complete(i);
                    Ok(())
                }
                Runtime::Neuron { .. } => {
                    self.neuron_compute_done(i);
                    Ok(())
                }
                _ => unreachable!("completion sent to a component that never computes"),
            },
            Control::BusFree => {
                if let Runtime::Arbiter { busy, .. } = &mut self.runtimes[i] {
                    *busy = false;
                }
                self.arbiter_try_grant(i)
            }
            Control::DispatchDone(idx) => {
                self.coordinator_dispatch_done(i, idx);
                Ok(())
            }
            Control::RecvDone => {
                if let Runtime::Coordinator { busy, .. } = &mut self.runtimes[i] {
                    *busy = false;
                }
                self.coordinator_try_recv(i);
                Ok(())
            }
        }
    }

    fn gate_arrival(&mut self, i: usize, signal: SignalEvent) -> Result<()> {
        let now = self.now;
        let bit = match signal.payload_bits.as_ref().and_then(|b| b.first()) {
            Some(bit) => *bit,
            None => {
                return Err(Error::UnexpectedSignal {
                    dest: signal.dest,
                    kind: format!("{} without payload bit", signal.kind),
                })
            }
        };
        let op = match &self.scenario.components[i].kind {
            ComponentKind::Gate { op, .. } => *op,
            _ => unreachable!(),
        };
        let t_p = self.scenario.components[i].t_p;
        let fired_batch = {
            let Runtime::Gate {
                arrivals,
                fired,
                value,
            } = &mut self.runtimes[i]
            else {
                unreachable!()
            };
            let arity = op.arity();
            if *fired || arrivals.len() as u32 >= arity {
                return Err(Error::ExtraGateInput {
                    gate: signal.dest,
                    arity,
                });
            }
            arrivals.push((now, bit));
            if arrivals.len() as u32 == arity {
                let inputs: Vec<bool> = arrivals.iter().map(|(_, v)| *v).collect();
                *value = Some(gate_evaluate(op, &inputs)?);
                *fired = true;
                Some(arrivals[0].0)
            } else {
                None
            }
        };
        if let Some(first_arrival) = fired_batch {
            let account = &mut self.accounts[i];
            account.fill_gap(first_arrival, IntervalState::Idle, "");
            account.fill_gap(now, IntervalState::Blocked, "");
            account.push_busy(now, now + t_p, IntervalState::Payload, "settle".into());
            self.push(
                now + t_p,
                EventPayload::Control(signal.dest, Control::Complete),
            );
        }
        Ok(())
    }

    fn gate_complete(&mut self, i: usize) {
        let me = self.scenario.components[i].id;
        let outputs = match &self.scenario.components[i].kind {
            ComponentKind::Gate { outputs, .. } => outputs.clone(),
            _ => unreachable!(),
        };
        let bits = {
            let Runtime::Gate { value, .. } = &self.runtimes[i] else {
                unreachable!()
            };
            value.map(|v| vec![v])
        };
        let now = self.now;
        for out in outputs {
            self.push_emit(me, out, now, SignalKind::Data, bits.clone());
        }
    }

    fn unit_arrival(&mut self, i: usize, signal: SignalEvent) -> Result<()> {
        match signal.kind {
            SignalKind::Data | SignalKind::Result => {}
            other => {
                return Err(Error::UnexpectedSignal {
                    dest: signal.dest,
                    kind: other.to_string(),
                })
            }
        }
        let now = self.now;
        if let Runtime::Unit { pending, .. } = &mut self.runtimes[i] {
            pending.push((now, signal.id, signal.payload_bits));
        }
        self.unit_try_start(i);
        Ok(())
    }

    fn unit_try_start(&mut self, i: usize) {
        let now = self.now;
        let t_p = self.scenario.components[i].t_p;
        let id = self.scenario.components[i].id;
        let first_arrival = {
            let Runtime::Unit {
                required,
                pending,
                busy,
                batch_bits,
                ..
            } = &mut self.runtimes[i]
            else {
                return;
            };
            if *busy || (pending.len() as u32) < *required {
                return;
            }
            let batch: Vec<_> = pending.drain(..*required as usize).collect();
            *busy = true;
            *batch_bits = batch[0].2.clone();
            batch[0].0
        };
        let account = &mut self.accounts[i];
        account.fill_gap(first_arrival, IntervalState::Idle, "");
        account.fill_gap(now, IntervalState::Blocked, "");
        account.push_busy(now, now + t_p, IntervalState::Payload, "process".into());
        self.push(now + t_p, EventPayload::Control(id, Control::Complete));
    }

    fn unit_complete(&mut self, i: usize) {
        let me = self.scenario.components[i].id;
        let (outputs, out_kind, bits) = {
            let Runtime::Unit {
                outputs,
                out_kind,
                busy,
                batch_bits,
                ..
            } = &mut self.runtimes[i]
            else {
                unreachable!()
            };
            *busy = false;
            (outputs.clone(), *out_kind, batch_bits.take())
        };
        let now = self.now;
        for out in outputs {
            self.push_emit(me, out, now, out_kind, bits.clone());
        }
        self.unit_try_start(i);
    }

    fn arbiter_arrival(&mut self, i: usize, signal: SignalEvent) -> Result<()> {
        if signal.kind != SignalKind::Request {
            return Err(Error::UnexpectedSignal {
                dest: signal.dest,
                kind: signal.kind.to_string(),
            });
        }
        let now = self.now;
        if let Runtime::Arbiter { queue, .. } = &mut self.runtimes[i] {
            insert_by_arrival(queue, (now, signal.source));
        }
        self.arbiter_try_grant(i)
    }

    fn arbiter_try_grant(&mut self, i: usize) -> Result<()> {
        let now = self.now;
        let arbiter_id = self.scenario.components[i].id;
        let sender = {
            let Runtime::Arbiter { queue, busy } = &mut self.runtimes[i] else {
                unreachable!()
            };
            if *busy || queue.is_empty() {
                return Ok(());
            }
            let (_, sender) = queue.remove(0);
            *busy = true;
            sender
        };
        let (dest, t_msg) = match self.spec(sender).kind {
            ComponentKind::Neuron { dest, t_msg, .. } => (dest, t_msg),
            _ => {
                return Err(Error::Scenario(format!(
                    "bus request from component {sender}, which has no message to send"
                )))
            }
        };
        let sender_name = self.spec(sender).name.clone();
        let grant_leg = self.flight_time(arbiter_id, sender);
        let message_leg = self.flight_time(sender, dest);
        let delivery = now + grant_leg + t_msg + message_leg;
        let account = &mut self.accounts[i];
        account.fill_gap(now, IntervalState::Idle, "");
        account.push_busy(
            now,
            now + grant_leg,
            IntervalState::Arbitration,
            format!("grant {sender_name}"),
        );
        account.push_busy(
            now + grant_leg,
            now + grant_leg + t_msg,
            IntervalState::Payload,
            format!("message {sender_name}"),
        );
        account.push_busy(
            now + grant_leg + t_msg,
            delivery,
            IntervalState::TransferWait,
            format!("message {sender_name} in flight"),
        );
        self.push_emit(arbiter_id, sender, now, SignalKind::Grant, None);
        self.push(delivery, EventPayload::Control(arbiter_id, Control::BusFree));
        Ok(())
    }

    fn cache_arrival(&mut self, i: usize, signal: SignalEvent) -> Result<()> {
        if signal.kind != SignalKind::Request {
            return Err(Error::UnexpectedSignal {
                dest: signal.dest,
                kind: signal.kind.to_string(),
            });
        }
        let now = self.now;
        if let Runtime::Cache { queue, .. } = &mut self.runtimes[i] {
            insert_by_arrival(queue, (now, signal.source));
        }
        self.cache_try_serve(i);
        Ok(())
    }

    fn cache_try_serve(&mut self, i: usize) {
        let now = self.now;
        let t_p = self.scenario.components[i].t_p;
        let id = self.scenario.components[i].id;
        let requester = {
            let Runtime::Cache { queue, serving } = &mut self.runtimes[i] else {
                unreachable!()
            };
            if serving.is_some() || queue.is_empty() {
                return;
            }
            let (_, requester) = queue.remove(0);
            *serving = Some(requester);
            requester
        };
        let detail = format!("serve {}", self.spec(requester).name);
        let account = &mut self.accounts[i];
        account.fill_gap(now, IntervalState::Idle, "");
        account.push_busy(now, now + t_p, IntervalState::Payload, detail);
        self.push(now + t_p, EventPayload::Control(id, Control::Complete));
    }

    fn cache_complete(&mut self, i: usize) {
        let me = self.scenario.components[i].id;
        let requester = {
            let Runtime::Cache { serving, .. } = &mut self.runtimes[i] else {
                unreachable!()
            };
            serving.take().expect("cache completion without a request")
        };
        let now = self.now;
        self.push_emit(me, requester, now, SignalKind::Result, None);
        self.cache_try_serve(i);
    }

    fn coordinator_arrival(&mut self, i: usize, signal: SignalEvent) -> Result<()> {
        if signal.kind != SignalKind::Result && signal.kind != SignalKind::Data {
            return Err(Error::UnexpectedSignal {
                dest: signal.dest,
                kind: signal.kind.to_string(),
            });
        }
        let now = self.now;
        if let Runtime::Coordinator { results, .. } = &mut self.runtimes[i] {
            insert_by_arrival(results, (now, signal.source));
        }
        self.coordinator_try_recv(i);
        Ok(())
    }

    fn coordinator_dispatch_done(&mut self, i: usize, idx: u32) {
        let me = self.scenario.components[i].id;
        let (workers, t_dispatch) = match &self.scenario.components[i].kind {
            ComponentKind::Coordinator {
                workers,
                t_dispatch,
                ..
            } => (workers.clone(), *t_dispatch),
            _ => unreachable!(),
        };
        let now = self.now;
        let worker = workers[idx as usize];
        // the task leaves when its dispatch slot ends
        self.push_emit(me, worker, now, SignalKind::Data, None);
        let next = idx as usize + 1;
        if next < workers.len() {
            let detail = format!("dispatch {}", self.spec(workers[next]).name);
            self.accounts[i].push_busy(now, now + t_dispatch, IntervalState::Arbitration, detail);
            self.push(
                now + t_dispatch,
                EventPayload::Control(me, Control::DispatchDone(next as u32)),
            );
        } else {
            if let Runtime::Coordinator { busy, .. } = &mut self.runtimes[i] {
                *busy = false;
            }
            self.coordinator_try_recv(i);
        }
    }

    fn coordinator_try_recv(&mut self, i: usize) {
        let now = self.now;
        let me = self.scenario.components[i].id;
        let t_recv = match &self.scenario.components[i].kind {
            ComponentKind::Coordinator { t_recv, .. } => *t_recv,
            _ => unreachable!(),
        };
        let worker = {
            let Runtime::Coordinator { results, busy } = &mut self.runtimes[i] else {
                unreachable!()
            };
            if *busy || results.is_empty() {
                return;
            }
            let (_, worker) = results.remove(0);
            *busy = true;
            worker
        };
        let detail = format!("collect {}", self.spec(worker).name);
        let account = &mut self.accounts[i];
        account.fill_gap(now, IntervalState::Idle, "");
        account.push_busy(now, now + t_recv, IntervalState::Arbitration, detail);
        self.push(now + t_recv, EventPayload::Control(me, Control::RecvDone));
    }

    fn neuron_compute_done(&mut self, i: usize) {
        let me = self.scenario.components[i].id;
        let (dest, arbiter, t_msg) = match &self.scenario.components[i].kind {
            ComponentKind::Neuron {
                dest,
                arbiter,
                t_msg,
            } => (*dest, *arbiter, *t_msg),
            _ => unreachable!(),
        };
        let now = self.now;
        match arbiter {
            Some(arbiter_id) => {
                if let Runtime::Neuron { awaiting_grant } = &mut self.runtimes[i] {
                    *awaiting_grant = true;
                }
                self.push_emit(me, arbiter_id, now, SignalKind::Request, None);
            }
            None => {
                self.accounts[i].push_busy(
                    now,
                    now + t_msg,
                    IntervalState::TransferWait,
                    "transmit".into(),
                );
                self.push_emit(me, dest, now + t_msg, SignalKind::Result, None);
            }
        }
    }

    fn neuron_grant_arrival(&mut self, i: usize, signal: SignalEvent) -> Result<()> {
        if signal.kind != SignalKind::Grant {
            return Err(Error::UnexpectedSignal {
                dest: signal.dest,
                kind: signal.kind.to_string(),
            });
        }
        let (dest, t_msg) = match &self.scenario.components[i].kind {
            ComponentKind::Neuron { dest, t_msg, .. } => (*dest, *t_msg),
            _ => unreachable!(),
        };
        {
            let Runtime::Neuron { awaiting_grant } = &mut self.runtimes[i] else {
                unreachable!()
            };
            if !*awaiting_grant {
                return Err(Error::UnexpectedSignal {
                    dest: signal.dest,
                    kind: "grant without pending request".into(),
                });
            }
            *awaiting_grant = false;
        }
        let now = self.now;
        let me = signal.dest;
        let account = &mut self.accounts[i];
        account.fill_gap(now, IntervalState::Arbitration, "await grant");
        account.push_busy(
            now,
            now + t_msg,
            IntervalState::TransferWait,
            "transmit".into(),
        );
        self.push_emit(me, dest, now + t_msg, SignalKind::Result, None);
        Ok(())
    }

    fn finalize(&mut self) -> SimulationResult {
        let makespan = self.max_time;
        debug_assert_eq!(
            self.transfers.len() as u64,
            self.emitted,
            "an emitted signal was not delivered"
        );
        if makespan > 0.0 {
            for (i, account) in self.accounts.iter_mut().enumerate() {
                match &self.runtimes[i] {
                    Runtime::Gate {
                        arrivals, fired, ..
                    } if !fired && !arrivals.is_empty() => {
                        account.fill_gap(arrivals[0].0, IntervalState::Idle, "");
                        account.fill_gap(makespan, IntervalState::Blocked, "");
                    }
                    Runtime::Unit { pending, .. } if !pending.is_empty() => {
                        account.fill_gap(pending[0].0, IntervalState::Idle, "");
                        account.fill_gap(makespan, IntervalState::Blocked, "");
                    }
                    Runtime::Neuron {
                        awaiting_grant: true,
                    } => {
                        account.fill_gap(makespan, IntervalState::Arbitration, "await grant");
                    }
                    _ => account.fill_gap(makespan, IntervalState::Idle, ""),
                }
            }
        }
        let mut trace = Vec::new();
        let mut utilization = BTreeMap::new();
        for account in &self.accounts {
            let per_state: &mut BTreeMap<IntervalState, f64> =
                utilization.entry(account.component).or_default();
            for interval in &account.intervals {
                *per_state.entry(interval.state).or_insert(0.0) += interval.end - interval.start;
            }
            trace.extend(account.intervals.iter().cloned());
        }
        let components = self
            .scenario
            .components
            .iter()
            .map(|c| ComponentMeta {
                id: c.id,
                name: c.name.clone(),
                kind: c.kind.name().to_string(),
                position: c.position,
            })
            .collect();
        SimulationResult {
            makespan,
            trace,
            transfers: std::mem::take(&mut self.transfers),
            utilization,
            metrics: BTreeMap::new(),
            components,
        }
    }
}

/// Checks that `trace` tiles `[0, makespan]` for every component: intervals
/// in order, no gaps, no overlaps. Used by tests and the acceptance suite.
pub fn check_tiling(result: &SimulationResult) -> Result<()> {
    for meta in &result.components {
        let mut cursor = 0.0;
        for interval in result.trace.iter().filter(|iv| iv.component == meta.id) {
            if interval.start != cursor {
                return Err(Error::Scenario(format!(
                    "component {} has a gap or overlap at t={} (expected {})",
                    meta.name, interval.start, cursor
                )));
            }
            if interval.end < interval.start {
                return Err(Error::Scenario(format!(
                    "component {} has a negative interval at t={}",
                    meta.name, interval.start
                )));
            }
            cursor = interval.end;
        }
        if cursor != result.makespan {
            return Err(Error::Scenario(format!(
                "component {} accounts until {} but makespan is {}",
                meta.name, cursor, result.makespan
            )));
        }
    }
    Ok(())
}
