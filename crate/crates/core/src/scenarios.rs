//! Ready-to-run builders for the six case studies, plus scenario validation
//! and named-metric extraction.
//!
//! Scenario names are stable identifiers (`observer`, `adder`, `bus`,
//! `distributed`, `cache`, `ann`); running a scenario under one of these
//! names attaches the corresponding metrics to the result. Builders also fill
//! `expected_metrics` with closed-form values where an independent route
//! exists, so engine and formula can be cross-checked.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::components::{
    bus_transfer, gate_settle, BusProtocolState, CacheQueue, ComponentId, ComponentKind,
    ComponentSpec, GateKind,
};
use crate::engine::{self, SignalEvent, SignalKind, SimulationResult};
use crate::error::{Error, Result};
use crate::timespace::{apparent_time, transfer_time, SpeedFactor, TimePoint};

/// A complete, immutable description of one simulation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub speed: SpeedFactor,
    pub components: Vec<ComponentSpec>,
    pub stimuli: Vec<SignalEvent>,
    /// Closed-form values for golden tests, keyed like the result metrics.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expected_metrics: BTreeMap<String, f64>,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        components: Vec<ComponentSpec>,
        stimuli: Vec<SignalEvent>,
    ) -> Self {
        Self {
            name: name.into(),
            speed: SpeedFactor::UNIT,
            components,
            stimuli,
            expected_metrics: BTreeMap::new(),
        }
    }

    /// Checks ids, names, references, numeric ranges and the absence of
    /// zero-delay dependency cycles.
    pub fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        let mut names = BTreeSet::new();
        for c in &self.components {
            if !ids.insert(c.id) {
                return Err(Error::DuplicateId(format!("component id {}", c.id)));
            }
            if c.name.is_empty() {
                return Err(Error::Scenario(format!("component {} has an empty name", c.id)));
            }
            if !names.insert(c.name.clone()) {
                return Err(Error::DuplicateId(format!("component name '{}'", c.name)));
            }
            if !c.position.is_finite() {
                return Err(Error::Scenario(format!(
                    "component {} has a non-finite position",
                    c.name
                )));
            }
            if !(c.t_p.is_finite() && c.t_p >= 0.0) {
                return Err(Error::Scenario(format!(
                    "component {} has invalid t_p {}",
                    c.name, c.t_p
                )));
            }
        }
        let exists = |id: &ComponentId| ids.contains(id);
        for c in &self.components {
            let check_ref = |target: &ComponentId| -> Result<()> {
                if !exists(target) {
                    return Err(Error::DanglingReference(*target));
                }
                if *target == c.id {
                    return Err(Error::Scenario(format!(
                        "component {} forwards to itself",
                        c.name
                    )));
                }
                Ok(())
            };
            match &c.kind {
                ComponentKind::Gate { outputs, .. } => {
                    outputs.iter().try_for_each(check_ref)?;
                }
                ComponentKind::ProcessingUnit {
                    inputs_required,
                    outputs,
                } => {
                    if *inputs_required == 0 {
                        return Err(Error::Scenario(format!(
                            "component {} requires zero inputs",
                            c.name
                        )));
                    }
                    outputs.iter().try_for_each(check_ref)?;
                }
                ComponentKind::Coordinator {
                    workers,
                    t_dispatch,
                    t_recv,
                } => {
                    workers.iter().try_for_each(check_ref)?;
                    for t in [*t_dispatch, *t_recv] {
                        if !(t.is_finite() && t >= 0.0) {
                            return Err(Error::Scenario(format!(
                                "coordinator {} has invalid dispatch/recv time {t}",
                                c.name
                            )));
                        }
                    }
                }
                ComponentKind::Worker { reply_to } => check_ref(reply_to)?,
                ComponentKind::Neuron {
                    dest,
                    arbiter,
                    t_msg,
                } => {
                    check_ref(dest)?;
                    if !(t_msg.is_finite() && *t_msg >= 0.0) {
                        return Err(Error::Scenario(format!(
                            "neuron {} has invalid t_msg {t_msg}",
                            c.name
                        )));
                    }
                    if let Some(arbiter) = arbiter {
                        check_ref(arbiter)?;
                        let target = self.components.iter().find(|x| x.id == *arbiter);
                        if !matches!(target.map(|t| &t.kind), Some(ComponentKind::BusArbiter)) {
                            return Err(Error::Scenario(format!(
                                "neuron {} names {} as its arbiter, which is not a bus arbiter",
                                c.name, arbiter
                            )));
                        }
                    }
                }
                _ => {}
            }
        }
        let mut stim_ids = BTreeSet::new();
        for s in &self.stimuli {
            if !stim_ids.insert(s.id) {
                return Err(Error::DuplicateId(format!("stimulus id {}", s.id)));
            }
            if !(s.emit_time.is_finite() && s.emit_time >= 0.0) {
                return Err(Error::Scenario(format!(
                    "stimulus {} has invalid emit time {}",
                    s.id, s.emit_time
                )));
            }
            if !exists(&s.source) {
                return Err(Error::DanglingReference(s.source));
            }
            if !exists(&s.dest) {
                return Err(Error::DanglingReference(s.dest));
            }
            if s.source == s.dest {
                return Err(Error::Scenario(format!(
                    "stimulus {} sends component {} a signal to itself",
                    s.id, s.source
                )));
            }
        }
        if let Some(cycle) = self.zero_delay_cycle() {
            return Err(Error::ZeroDelayCycle(cycle));
        }
        Ok(())
    }

    /// Finds a dependency cycle in which every hop has zero transfer time and
    /// every participant zero processing time; such a cycle would make the
    /// event loop live forever at one instant.
    fn zero_delay_cycle(&self) -> Option<Vec<ComponentId>> {
        let index: BTreeMap<ComponentId, usize> = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id, i))
            .collect();
        let n = self.components.len();
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, c) in self.components.iter().enumerate() {
            if c.t_p != 0.0 {
                continue;
            }
            let targets: &[ComponentId] = match &c.kind {
                ComponentKind::Gate { outputs, .. } => outputs,
                ComponentKind::ProcessingUnit { outputs, .. } => outputs,
                ComponentKind::Worker { reply_to } => std::slice::from_ref(reply_to),
                _ => continue,
            };
            for target in targets {
                let j = match index.get(target) {
                    Some(j) => *j,
                    None => continue, // dangling refs reported elsewhere
                };
                let t = &self.components[j];
                if t.t_p == 0.0 && c.position.distance_to(&t.position) == 0.0 {
                    adjacency[i].push(j);
                }
            }
        }
        // colors: 0 unvisited, 1 on stack, 2 done
        let mut color = vec![0u8; n];
        let mut stack: Vec<usize> = Vec::new();
        fn dfs(
            v: usize,
            adjacency: &[Vec<usize>],
            color: &mut [u8],
            stack: &mut Vec<usize>,
        ) -> Option<Vec<usize>> {
            color[v] = 1;
            stack.push(v);
            for &w in &adjacency[v] {
                match color[w] {
                    0 => {
                        if let Some(cycle) = dfs(w, adjacency, color, stack) {
                            return Some(cycle);
                        }
                    }
                    1 => {
                        let start = stack.iter().position(|&x| x == w).unwrap();
                        return Some(stack[start..].to_vec());
                    }
                    _ => {}
                }
            }
            stack.pop();
            color[v] = 2;
            None
        }
        for v in 0..n {
            if color[v] == 0 {
                if let Some(cycle) = dfs(v, &adjacency, &mut color, &mut stack) {
                    return Some(cycle.iter().map(|&i| self.components[i].id).collect());
                }
            }
        }
        None
    }

    /// Runs the scenario and attaches the metrics its name stands for.
    pub fn run(&self) -> Result<SimulationResult> {
        let mut result = engine::run(self)?;
        attach_metrics(self, &mut result);
        Ok(result)
    }
}

/// One source plus one observer per speed factor; each observer's metric is
/// its simulated apparent time, which must equal the closed form.
///
/// Per-observer speed factors are realized as per-observer distances
/// (`distance / speed`) under a unit scenario speed; the transfer time, and
/// with it the apparent time, is identical.
pub fn build_observer_chain(t_p: f64, distance: f64, speed_factors: &[f64]) -> Result<Scenario> {
    if !(t_p.is_finite() && t_p > 0.0) {
        return Err(Error::Domain(format!(
            "observer processing time must be positive, got {t_p}"
        )));
    }
    if !(distance.is_finite() && distance > 0.0) {
        return Err(Error::Domain(format!(
            "distance must be positive, got {distance}"
        )));
    }
    if speed_factors.is_empty() {
        return Err(Error::Domain("speed factor list must not be empty".into()));
    }
    let mut components = vec![ComponentSpec::new(
        0,
        "source",
        ComponentKind::Source,
        TimePoint::ORIGIN,
        t_p,
    )];
    let mut stimuli = Vec::new();
    let mut expected = BTreeMap::new();
    for (k, speed) in speed_factors.iter().enumerate() {
        if !(speed.is_finite() && *speed > 0.0) {
            return Err(Error::Domain(format!("invalid speed factor {speed}")));
        }
        let idx = k as u32 + 1;
        let t_t = distance / speed;
        components.push(ComponentSpec::new(
            idx,
            format!("observer_{idx}"),
            ComponentKind::ProcessingUnit {
                inputs_required: 1,
                outputs: vec![],
            },
            TimePoint::new(t_t, 0.0),
            t_p,
        ));
        stimuli.push(SignalEvent {
            id: k as u64,
            source: ComponentId(0),
            dest: ComponentId(idx),
            emit_time: t_p,
            kind: SignalKind::Data,
            payload_bits: None,
        });
        expected.insert(
            format!("apparent_time_{idx}"),
            apparent_time(t_p, t_t)?.t_a,
        );
    }
    let mut scenario = Scenario::new("observer", components, stimuli);
    scenario.expected_metrics = expected;
    Ok(scenario)
}

/// Canonical one-bit adder layout with the inputs of the worked example,
/// `(a, b, cin) = (1, 0, 1)`. Only the position of the second XOR gate is
/// free; moving it changes timings, never values.
pub fn build_one_bit_adder(xor2_position: TimePoint) -> Result<Scenario> {
    build_one_bit_adder_with_inputs(xor2_position, true, false, true)
}

/// Canonical adder layout with explicit input bits.
pub fn build_one_bit_adder_with_inputs(
    xor2_position: TimePoint,
    a: bool,
    b: bool,
    cin: bool,
) -> Result<Scenario> {
    if !xor2_position.is_finite() {
        return Err(Error::Domain(
            "xor2 position must have finite coordinates".into(),
        ));
    }
    let a_pos = TimePoint::new(-2.0, 0.0);
    let b_pos = TimePoint::new(-2.0, 1.0);
    let cin_pos = TimePoint::new(-2.0, -1.0);
    let xor1_pos = TimePoint::new(0.0, 0.0);
    let and1_pos = TimePoint::new(0.0, 1.0);
    let and2_pos = TimePoint::new(1.0, 1.0);
    let or1_pos = TimePoint::new(2.0, 1.0);
    let sum_pos = TimePoint::new(3.0, 0.0);
    let cout_pos = TimePoint::new(3.0, 1.0);

    let id = |n: u32| ComponentId(n);
    let gate = |n: u32, name: &str, op: GateKind, outputs: Vec<ComponentId>, pos: TimePoint| {
        ComponentSpec::new(n, name, ComponentKind::Gate { op, outputs }, pos, 1.0)
    };
    let components = vec![
        ComponentSpec::new(0, "a", ComponentKind::Source, a_pos, 0.0),
        ComponentSpec::new(1, "b", ComponentKind::Source, b_pos, 0.0),
        ComponentSpec::new(2, "cin", ComponentKind::Source, cin_pos, 0.0),
        gate(3, "xor1", GateKind::Xor, vec![id(5), id(6)], xor1_pos),
        gate(4, "and1", GateKind::And, vec![id(7)], and1_pos),
        gate(5, "and2", GateKind::And, vec![id(7)], and2_pos),
        gate(6, "xor2", GateKind::Xor, vec![id(8)], xor2_position),
        gate(7, "or1", GateKind::Or, vec![id(9)], or1_pos),
        ComponentSpec::new(8, "sum_out", ComponentKind::Sink, sum_pos, 0.0),
        ComponentSpec::new(9, "cout_out", ComponentKind::Sink, cout_pos, 0.0),
    ];
    let bit = |v: bool| Some(vec![v]);
    let stimuli = vec![
        SignalEvent { id: 0, source: id(0), dest: id(3), emit_time: 0.0, kind: SignalKind::Data, payload_bits: bit(a) },
        SignalEvent { id: 1, source: id(0), dest: id(4), emit_time: 0.0, kind: SignalKind::Data, payload_bits: bit(a) },
        SignalEvent { id: 2, source: id(1), dest: id(3), emit_time: 0.0, kind: SignalKind::Data, payload_bits: bit(b) },
        SignalEvent { id: 3, source: id(1), dest: id(4), emit_time: 0.0, kind: SignalKind::Data, payload_bits: bit(b) },
        SignalEvent { id: 4, source: id(2), dest: id(5), emit_time: 0.0, kind: SignalKind::Data, payload_bits: bit(cin) },
        SignalEvent { id: 5, source: id(2), dest: id(6), emit_time: 0.0, kind: SignalKind::Data, payload_bits: bit(cin) },
    ];

    // independent settle cascade: expected values straight from gate_settle
    let unit = SpeedFactor::UNIT;
    let d = |p: &TimePoint, q: &TimePoint| transfer_time(p, q, unit);
    let mut expected = BTreeMap::new();
    let settle = |spec: &ComponentSpec,
                      arrivals: &[(f64, bool)],
                      expected: &mut BTreeMap<String, f64>|
     -> Result<(f64, bool)> {
        let (valid, value) = gate_settle(spec, arrivals)?;
        let started = arrivals.iter().map(|(t, _)| *t).fold(f64::MIN, f64::max);
        expected.insert(format!("output_valid_{}", spec.name), valid);
        expected.insert(format!("idle_wait_{}", spec.name), started);
        Ok((valid, value))
    };
    let (xor1_t, xor1_v) = settle(
        &components[3],
        &[(d(&a_pos, &xor1_pos), a), (d(&b_pos, &xor1_pos), b)],
        &mut expected,
    )?;
    let (and1_t, and1_v) = settle(
        &components[4],
        &[(d(&a_pos, &and1_pos), a), (d(&b_pos, &and1_pos), b)],
        &mut expected,
    )?;
    let (and2_t, and2_v) = settle(
        &components[5],
        &[
            (d(&cin_pos, &and2_pos), cin),
            (xor1_t + d(&xor1_pos, &and2_pos), xor1_v),
        ],
        &mut expected,
    )?;
    let (xor2_t, xor2_v) = settle(
        &components[6],
        &[
            (d(&cin_pos, &xor2_position), cin),
            (xor1_t + d(&xor1_pos, &xor2_position), xor1_v),
        ],
        &mut expected,
    )?;
    let (or1_t, or1_v) = settle(
        &components[7],
        &[
            (and1_t + d(&and1_pos, &or1_pos), and1_v),
            (and2_t + d(&and2_pos, &or1_pos), and2_v),
        ],
        &mut expected,
    )?;
    expected.insert("sum_delivery".into(), xor2_t + d(&xor2_position, &sum_pos));
    expected.insert("cout_delivery".into(), or1_t + d(&or1_pos, &cout_pos));
    expected.insert("sum_value".into(), xor2_v as u8 as f64);
    expected.insert("cout_value".into(), or1_v as u8 as f64);

    let mut scenario = Scenario::new("adder", components, stimuli);
    scenario.expected_metrics = expected;
    Ok(scenario)
}

/// `n_senders` senders at `x = spacing * k` all requesting the shared medium
/// at t = 0; arbiter and destination sit at the origin.
pub fn build_bus_scenario(n_senders: u32, t_msg: f64, spacing: f64) -> Result<Scenario> {
    if n_senders == 0 {
        return Err(Error::Domain("bus scenario needs at least one sender".into()));
    }
    if !(t_msg.is_finite() && t_msg >= 0.0) {
        return Err(Error::Domain(format!("invalid message duration {t_msg}")));
    }
    if !(spacing.is_finite() && spacing >= 0.0) {
        return Err(Error::Domain(format!("invalid spacing {spacing}")));
    }
    let arbiter = ComponentId(0);
    let dest = ComponentId(n_senders + 1);
    let mut components = vec![ComponentSpec::new(
        0,
        "bus",
        ComponentKind::BusArbiter,
        TimePoint::ORIGIN,
        0.0,
    )];
    for k in 1..=n_senders {
        components.push(ComponentSpec::new(
            k,
            format!("sender_{k}"),
            ComponentKind::Neuron {
                dest,
                arbiter: Some(arbiter),
                t_msg,
            },
            TimePoint::new(spacing * k as f64, 0.0),
            0.0,
        ));
    }
    components.push(ComponentSpec::new(
        n_senders + 1,
        "dest",
        ComponentKind::Sink,
        TimePoint::ORIGIN,
        0.0,
    ));

    let mut expected = BTreeMap::new();
    let mut bus = BusProtocolState::new(TimePoint::ORIGIN, SpeedFactor::UNIT);
    for k in 1..=n_senders {
        let sender_pos = TimePoint::new(spacing * k as f64, 0.0);
        let request = SignalEvent {
            id: k as u64,
            source: ComponentId(k),
            dest: arbiter,
            emit_time: 0.0,
            kind: SignalKind::Request,
            payload_bits: None,
        };
        let delivery = bus_transfer(&mut bus, &request, &sender_pos, &TimePoint::ORIGIN, t_msg)?;
        expected.insert(format!("delivery_{k}"), delivery);
    }

    let mut scenario = Scenario::new("bus", components, Vec::new());
    scenario.expected_metrics = expected;
    Ok(scenario)
}

/// Coordinator at the origin dispatching to `n_workers` workers at
/// `x = spacing * k`.
pub fn build_distributed_scenario(
    n_workers: u32,
    t_dispatch: f64,
    t_work: f64,
    t_recv: f64,
    spacing: f64,
) -> Result<Scenario> {
    if n_workers == 0 {
        return Err(Error::Domain("distributed scenario needs at least one worker".into()));
    }
    for t in [t_dispatch, t_work, t_recv, spacing] {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain(format!("invalid time parameter {t}")));
        }
    }
    let coordinator = ComponentId(0);
    let worker_ids: Vec<ComponentId> = (1..=n_workers).map(ComponentId).collect();
    let mut components = vec![ComponentSpec::new(
        0,
        "coordinator",
        ComponentKind::Coordinator {
            workers: worker_ids,
            t_dispatch,
            t_recv,
        },
        TimePoint::ORIGIN,
        0.0,
    )];
    for k in 1..=n_workers {
        components.push(ComponentSpec::new(
            k,
            format!("worker_{k}"),
            ComponentKind::Worker {
                reply_to: coordinator,
            },
            TimePoint::new(spacing * k as f64, 0.0),
            t_work,
        ));
    }
    Ok(Scenario::new("distributed", components, Vec::new()))
}

/// Two cores at (±0.5, 0) requesting one cache at (0, cache_y) at t = 0.
pub fn build_cache_scenario(cache_y: f64, cache_t_p: f64) -> Result<Scenario> {
    if !(cache_y.is_finite() && cache_y > 0.0) {
        return Err(Error::Domain(format!(
            "cache must sit off the core row, got y = {cache_y}"
        )));
    }
    if !(cache_t_p.is_finite() && cache_t_p >= 0.0) {
        return Err(Error::Domain(format!("invalid cache t_p {cache_t_p}")));
    }
    let core = |k: u32, x: f64| {
        ComponentSpec::new(
            k,
            format!("core{k}"),
            ComponentKind::ProcessingUnit {
                inputs_required: 1,
                outputs: vec![],
            },
            TimePoint::new(x, 0.0),
            0.0,
        )
    };
    let components = vec![
        core(0, -0.5),
        core(1, 0.5),
        ComponentSpec::new(
            2,
            "cache",
            ComponentKind::Cache,
            TimePoint::new(0.0, cache_y),
            cache_t_p,
        ),
    ];
    let stimuli = (0..2)
        .map(|k| SignalEvent {
            id: k as u64,
            source: ComponentId(k),
            dest: ComponentId(2),
            emit_time: 0.0,
            kind: SignalKind::Request,
            payload_bits: None,
        })
        .collect();

    let mut expected = BTreeMap::new();
    let mut queue = CacheQueue::new(SpeedFactor::UNIT);
    for k in 0..2usize {
        let response = queue.access(&components[k], &components[2], 0.0)?;
        expected.insert(format!("apparent_access_core{k}"), response);
    }

    let mut scenario = Scenario::new("cache", components, stimuli);
    scenario.expected_metrics = expected;
    Ok(scenario)
}

/// `n_neurons` neurons at `(k, 1)` finishing their computation at `t_p` and
/// sending results to a collector at the start of the row, over a shared
/// medium (`dedicated_links = false`) or private point-to-point links.
pub fn build_ann_layer_scenario(
    n_neurons: u32,
    t_p: f64,
    t_msg: f64,
    dedicated_links: bool,
) -> Result<Scenario> {
    if n_neurons == 0 {
        return Err(Error::Domain("layer needs at least one neuron".into()));
    }
    if !(t_p.is_finite() && t_p >= 0.0) {
        return Err(Error::Domain(format!("invalid neuron t_p {t_p}")));
    }
    if !(t_msg.is_finite() && t_msg >= 0.0) {
        return Err(Error::Domain(format!("invalid message duration {t_msg}")));
    }
    let row = 1.0;
    let collector = ComponentId(0);
    let collector_pos = TimePoint::new(0.0, row);
    let mut components = vec![ComponentSpec::new(
        0,
        "collector",
        ComponentKind::Sink,
        collector_pos,
        0.0,
    )];
    let arbiter = if dedicated_links {
        None
    } else {
        components.push(ComponentSpec::new(
            n_neurons + 1,
            "bus",
            ComponentKind::BusArbiter,
            collector_pos,
            0.0,
        ));
        Some(ComponentId(n_neurons + 1))
    };
    for k in 1..=n_neurons {
        components.push(ComponentSpec::new(
            k,
            format!("neuron_{k}"),
            ComponentKind::Neuron {
                dest: collector,
                arbiter,
                t_msg,
            },
            TimePoint::new(k as f64, row),
            t_p,
        ));
    }

    let mut expected = BTreeMap::new();
    if dedicated_links {
        for k in 1..=n_neurons {
            expected.insert(format!("arrival_{k}"), t_p + t_msg + k as f64);
        }
    } else {
        let mut bus = BusProtocolState::new(collector_pos, SpeedFactor::UNIT);
        for k in 1..=n_neurons {
            let neuron_pos = TimePoint::new(k as f64, row);
            let request = SignalEvent {
                id: k as u64,
                source: ComponentId(k),
                dest: arbiter.unwrap(),
                emit_time: t_p,
                kind: SignalKind::Request,
                payload_bits: None,
            };
            let delivery = bus_transfer(&mut bus, &request, &neuron_pos, &collector_pos, t_msg)?;
            expected.insert(format!("arrival_{k}"), delivery);
        }
    }
    let arrivals: Vec<f64> = expected.values().copied().collect();
    let first = arrivals.iter().copied().fold(f64::INFINITY, f64::min);
    let last = arrivals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    expected.insert("skew".into(), last - first);

    let mut scenario = Scenario::new("ann", components, Vec::new());
    scenario.expected_metrics = expected;
    Ok(scenario)
}

/// Attaches the metrics a named scenario stands for. Unknown names get the
/// makespan only.
fn attach_metrics(scenario: &Scenario, result: &mut SimulationResult) {
    let mut metrics = BTreeMap::new();
    metrics.insert("makespan".to_string(), result.makespan);
    match scenario.name.as_str() {
        "observer" => observer_metrics(scenario, result, &mut metrics),
        "adder" => adder_metrics(result, &mut metrics),
        "bus" => bus_metrics(result, &mut metrics),
        "distributed" => distributed_metrics(result, &mut metrics),
        "cache" => cache_metrics(scenario, result, &mut metrics),
        "ann" => ann_metrics(scenario, result, &mut metrics),
        _ => {}
    }
    result.metrics = metrics;
}

fn last_payload(result: &SimulationResult, component: ComponentId) -> Option<(f64, f64)> {
    result
        .trace
        .iter()
        .filter(|iv| iv.component == component && iv.state == crate::engine::IntervalState::Payload)
        .map(|iv| (iv.start, iv.end))
        .last()
}

fn observer_metrics(
    scenario: &Scenario,
    result: &SimulationResult,
    metrics: &mut BTreeMap<String, f64>,
) {
    let source_pos = result
        .components
        .iter()
        .find(|c| c.name == "source")
        .map(|c| c.position)
        .unwrap_or(TimePoint::ORIGIN);
    for meta in &result.components {
        let Some(suffix) = meta.name.strip_prefix("observer_") else {
            continue;
        };
        let Some((_, light_on)) = last_payload(result, meta.id) else {
            continue;
        };
        let t_t = transfer_time(&source_pos, &meta.position, scenario.speed);
        let apparent = (t_t * t_t + light_on * light_on).sqrt();
        metrics.insert(format!("apparent_time_{suffix}"), apparent);
    }
}

fn adder_metrics(result: &SimulationResult, metrics: &mut BTreeMap<String, f64>) {
    for meta in &result.components {
        if meta.kind != "gate" {
            continue;
        }
        if let Some((start, end)) = last_payload(result, meta.id) {
            metrics.insert(format!("output_valid_{}", meta.name), end);
            metrics.insert(format!("idle_wait_{}", meta.name), start);
        }
    }
    for (pin, delivery_key, value_key) in [
        ("sum_out", "sum_delivery", "sum_value"),
        ("cout_out", "cout_delivery", "cout_value"),
    ] {
        let Some(pin_id) = result
            .components
            .iter()
            .find(|c| c.name == pin)
            .map(|c| c.id)
        else {
            continue;
        };
        if let Some(flight) = result.transfers.iter().find(|t| t.dest == pin_id) {
            metrics.insert(delivery_key.into(), flight.arrival_time);
            if let Some(bit) = flight.payload_bits.as_ref().and_then(|b| b.first()) {
                metrics.insert(value_key.into(), *bit as u8 as f64);
            }
        }
    }
}

fn bus_metrics(result: &SimulationResult, metrics: &mut BTreeMap<String, f64>) {
    let name_of = |id: ComponentId| {
        result
            .components
            .iter()
            .find(|c| c.id == id)
            .map(|c| c.name.as_str())
    };
    let dest = result.components.iter().find(|c| c.name == "dest");
    if let Some(dest) = dest {
        for flight in result
            .transfers
            .iter()
            .filter(|t| t.dest == dest.id && t.kind == SignalKind::Result)
        {
            if let Some(suffix) = name_of(flight.source).and_then(|n| n.strip_prefix("sender_")) {
                metrics.insert(format!("delivery_{suffix}"), flight.arrival_time);
            }
        }
    }
    if result.makespan > 0.0 {
        if let Some(bus) = result.components.iter().find(|c| c.kind == "bus_arbiter") {
            let payload = result
                .utilization
                .get(&bus.id)
                .and_then(|per_state| per_state.get(&crate::engine::IntervalState::Payload))
                .copied()
                .unwrap_or(0.0);
            metrics.insert("bus_payload_fraction".into(), payload / result.makespan);
        }
    }
}

fn distributed_metrics(result: &SimulationResult, metrics: &mut BTreeMap<String, f64>) {
    let worker_payload: f64 = result
        .components
        .iter()
        .filter(|c| c.kind == "worker")
        .filter_map(|c| result.utilization.get(&c.id))
        .filter_map(|per_state| per_state.get(&crate::engine::IntervalState::Payload))
        .sum();
    if result.makespan > 0.0 && !result.components.is_empty() {
        metrics.insert(
            "efficiency".into(),
            worker_payload / (result.components.len() as f64 * result.makespan),
        );
    }
    if let Some(coordinator) = result.components.iter().find(|c| c.kind == "coordinator") {
        let idle = result
            .utilization
            .get(&coordinator.id)
            .and_then(|per_state| per_state.get(&crate::engine::IntervalState::Idle))
            .copied()
            .unwrap_or(0.0);
        metrics.insert("coordinator_idle".into(), idle);
    }
}

fn cache_metrics(
    scenario: &Scenario,
    result: &SimulationResult,
    metrics: &mut BTreeMap<String, f64>,
) {
    for meta in &result.components {
        if !meta.name.starts_with("core") {
            continue;
        }
        let Some(request_emit) = scenario
            .stimuli
            .iter()
            .find(|s| s.source == meta.id)
            .map(|s| s.emit_time)
        else {
            continue;
        };
        let Some(response) = result
            .transfers
            .iter()
            .find(|t| t.dest == meta.id && t.kind == SignalKind::Result)
        else {
            continue;
        };
        metrics.insert(
            format!("apparent_access_{}", meta.name),
            response.arrival_time - request_emit,
        );
    }
}

fn ann_metrics(
    scenario: &Scenario,
    result: &SimulationResult,
    metrics: &mut BTreeMap<String, f64>,
) {
    let Some(collector) = result.components.iter().find(|c| c.name == "collector") else {
        return;
    };
    let mut first = f64::INFINITY;
    let mut last = f64::NEG_INFINITY;
    let mut seen = false;
    for flight in result
        .transfers
        .iter()
        .filter(|t| t.dest == collector.id && t.kind == SignalKind::Result)
    {
        let sender = result
            .components
            .iter()
            .find(|c| c.id == flight.source)
            .map(|c| c.name.as_str());
        if let Some(suffix) = sender.and_then(|n| n.strip_prefix("neuron_")) {
            metrics.insert(format!("arrival_{suffix}"), flight.arrival_time);
            first = first.min(flight.arrival_time);
            last = last.max(flight.arrival_time);
            seen = true;
        }
    }
    if !seen {
        return;
    }
    metrics.insert("skew".into(), last - first);
    // the collector polls every t_p of the layer; reads strictly before the
    // last arrival see an incomplete input vector
    let period = scenario
        .components
        .iter()
        .find(|c| matches!(c.kind, ComponentKind::Neuron { .. }))
        .map(|c| c.t_p)
        .unwrap_or(0.0);
    let stale = if period > 0.0 {
        let polls = (last / period).floor();
        if polls * period < last {
            polls
        } else {
            (polls - 1.0).max(0.0)
        }
    } else {
        0.0
    };
    metrics.insert("stale_reads".into(), stale);
}
