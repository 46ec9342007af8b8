//! Scenario files, trace export and temporal-dependence diagrams.
//!
//! Scenarios are JSON documents (see `docs/scenario_schema.md`); traces
//! export as CSV with one row per accounted interval plus one row per signal
//! flight; diagrams render as SVG 1.1 with component position on the x axis
//! and simulation time on the y axis, increasing upward.
//!
//! All output is deterministic byte-for-byte: times print with nine decimal
//! places (round-half-even) and every collection is emitted in a fixed
//! order.

use std::fmt::Write as _;

use crate::analytic::EfficiencyPoint;
use crate::engine::{IntervalState, SimulationResult};
use crate::error::{Error, Result};
use crate::scenarios::Scenario;

/// Parses and validates a JSON scenario document.
///
/// Syntax errors, schema violations, duplicate ids and dangling references
/// are reported as distinct error variants; syntax and schema errors carry
/// the line and column of the first violation.
pub fn parse_scenario(document: &str) -> Result<Scenario> {
    let scenario: Scenario = serde_json::from_str(document).map_err(|e| {
        let at = format!("line {}, column {}", e.line(), e.column());
        match e.classify() {
            serde_json::error::Category::Syntax | serde_json::error::Category::Eof => {
                Error::Syntax(format!("{e} ({at})"))
            }
            _ => Error::Schema(format!("{e} ({at})")),
        }
    })?;
    scenario.validate()?;
    Ok(scenario)
}

/// Serializes a scenario as a pretty-printed JSON document that
/// [`parse_scenario`] round-trips.
pub fn write_scenario_json(scenario: &Scenario) -> Result<String> {
    serde_json::to_string_pretty(scenario)
        .map_err(|e| Error::Schema(format!("serialization failed: {e}")))
}

/// Formats a time with nine decimal places, round-half-even, never `-0`.
pub fn format_time(value: f64) -> String {
    let value = if value == 0.0 { 0.0 } else { value };
    format!("{value:.9}")
}

fn csv_field(raw: &str) -> String {
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

/// Renders a trace as CSV.
///
/// Header `component,start,end,state,detail`; one row per component interval
/// (these tile `[0, makespan]` per component) plus one row per signal flight
/// with component label `signal:<id>` and state `transfer`. Rows are sorted
/// by (component, start).
pub fn write_trace_csv(result: &SimulationResult) -> String {
    let name_of = |id| {
        result
            .components
            .iter()
            .find(|c| c.id == id)
            .map(|c| c.name.as_str())
            .unwrap_or("?")
    };
    struct Row {
        component: String,
        start: f64,
        end: f64,
        state: String,
        detail: String,
    }
    let mut rows: Vec<Row> = Vec::with_capacity(result.trace.len() + result.transfers.len());
    for interval in &result.trace {
        rows.push(Row {
            component: name_of(interval.component).to_string(),
            start: interval.start,
            end: interval.end,
            state: interval.state.to_string(),
            detail: interval.detail.clone(),
        });
    }
    for flight in &result.transfers {
        rows.push(Row {
            component: format!("signal:{}", flight.signal),
            start: flight.emit_time,
            end: flight.arrival_time,
            state: "transfer".to_string(),
            detail: format!(
                "{}->{} {}",
                name_of(flight.source),
                name_of(flight.dest),
                flight.kind
            ),
        });
    }
    rows.sort_by(|a, b| {
        a.component
            .cmp(&b.component)
            .then(a.start.total_cmp(&b.start))
            .then(a.end.total_cmp(&b.end))
            .then(a.state.cmp(&b.state))
            .then(a.detail.cmp(&b.detail))
    });
    let mut out = String::from("component,start,end,state,detail\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            csv_field(&row.component),
            format_time(row.start),
            format_time(row.end),
            row.state,
            csv_field(&row.detail)
        );
    }
    out
}

/// Renders an efficiency-surface grid as CSV with columns
/// `n,one_minus_alpha,efficiency`, row-major in evaluation order.
pub fn write_efficiency_csv(grid: &[EfficiencyPoint]) -> String {
    let mut out = String::from("n,one_minus_alpha,efficiency\n");
    for point in grid {
        let _ = writeln!(
            out,
            "{},{},{}",
            point.n,
            format_time(point.one_minus_alpha),
            format_time(point.e)
        );
    }
    out
}

/// Stroke appearance of one element class in the diagram.
#[derive(Clone, Debug, PartialEq)]
pub struct StrokeStyle {
    pub color: String,
    pub dasharray: Option<String>,
    pub width: f64,
}

impl StrokeStyle {
    fn solid(color: &str, width: f64) -> Self {
        Self {
            color: color.to_string(),
            dasharray: None,
            width,
        }
    }

    fn dashed(color: &str, width: f64, dash: &str) -> Self {
        Self {
            color: color.to_string(),
            dasharray: Some(dash.to_string()),
            width,
        }
    }

    fn attrs(&self) -> String {
        let mut s = format!("stroke=\"{}\" stroke-width=\"{}\"", self.color, self.width);
        if let Some(dash) = &self.dasharray {
            let _ = write!(s, " stroke-dasharray=\"{dash}\"");
        }
        s
    }
}

/// Stroke styles of the diagram: payload is a solid green vertical, transfers
/// are dotted green slanted lines, idle is solid orange, the apparent-time
/// vector is solid red. `apparent_vectors` lists overlay endpoints
/// `(position.x, completion time)` to draw red vectors from the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagramStyle {
    pub payload: StrokeStyle,
    pub transfer: StrokeStyle,
    pub idle: StrokeStyle,
    pub blocked: StrokeStyle,
    pub arbitration: StrokeStyle,
    pub apparent: StrokeStyle,
    pub apparent_vectors: Vec<(f64, f64)>,
}

impl Default for DiagramStyle {
    fn default() -> Self {
        Self {
            payload: StrokeStyle::solid("#1a9c46", 3.0),
            transfer: StrokeStyle::dashed("#1a9c46", 1.5, "2 4"),
            idle: StrokeStyle::solid("#e08a00", 2.0),
            blocked: StrokeStyle::dashed("#e08a00", 2.0, "6 3"),
            arbitration: StrokeStyle::dashed("#7a7a7a", 2.0, "4 3"),
            apparent: StrokeStyle::solid("#d22d2d", 2.0),
            apparent_vectors: Vec::new(),
        }
    }
}

impl DiagramStyle {
    /// All stroke styles must be pairwise distinct so states stay readable.
    pub fn styles_distinct(&self) -> bool {
        let all = [
            &self.payload,
            &self.transfer,
            &self.idle,
            &self.blocked,
            &self.arbitration,
            &self.apparent,
        ];
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                if a == b {
                    return false;
                }
            }
        }
        true
    }
}

fn fmt_coord(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.3}")
}

/// Renders a temporal-dependence diagram as an SVG 1.1 document.
///
/// x axis: component position (time units); y axis: simulation time,
/// increasing upward. One vertical line per payload interval (a small circle
/// when the interval is instantaneous), a slanted dotted line per signal
/// flight, vertical lines for idle / blocked / arbitration / transfer_wait
/// intervals. Output is deterministic byte-for-byte.
pub fn write_svg_diagram(result: &SimulationResult, style: &DiagramStyle) -> String {
    const W: f64 = 720.0;
    const H: f64 = 480.0;
    const ML: f64 = 64.0;
    const MR: f64 = 24.0;
    const MT: f64 = 24.0;
    const MB: f64 = 56.0;

    let mut x_min = 0.0f64;
    let mut x_max = 0.0f64;
    for c in &result.components {
        x_min = x_min.min(c.position.x);
        x_max = x_max.max(c.position.x);
    }
    for (x, _) in &style.apparent_vectors {
        x_min = x_min.min(*x);
        x_max = x_max.max(*x);
    }
    if x_max - x_min < 1e-12 {
        x_min -= 1.0;
        x_max += 1.0;
    }
    let t_max = if result.makespan > 0.0 {
        result.makespan
    } else {
        1.0
    };
    let sx = |x: f64| ML + (x - x_min) * (W - ML - MR) / (x_max - x_min);
    let sy = |t: f64| H - MB - t * (H - MT - MB) / t_max;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(
        svg,
        "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"#ffffff\"/>"
    );
    // axes
    let axis = StrokeStyle::solid("#222222", 1.0);
    let _ = writeln!(
        svg,
        "<g class=\"axes\"><line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {}/><line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {}/></g>",
        fmt_coord(ML), fmt_coord(H - MB), fmt_coord(W - MR), fmt_coord(H - MB), axis.attrs(),
        fmt_coord(ML), fmt_coord(H - MB), fmt_coord(ML), fmt_coord(MT), axis.attrs(),
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">position (time units)</text>",
        fmt_coord((ML + W - MR) / 2.0),
        fmt_coord(H - 12.0)
    );
    let _ = writeln!(
        svg,
        "<text x=\"14\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">time</text>",
        fmt_coord((MT + H - MB) / 2.0),
        fmt_coord((MT + H - MB) / 2.0)
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">0.00</text>",
        fmt_coord(ML - 6.0),
        fmt_coord(sy(0.0) + 3.0)
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{:.2}</text>",
        fmt_coord(ML - 6.0),
        fmt_coord(sy(t_max) + 3.0),
        t_max
    );

    // component intervals, scenario order, chronological per component
    for meta in &result.components {
        let x = sx(meta.position.x);
        for interval in result.trace.iter().filter(|iv| iv.component == meta.id) {
            let (class, stroke) = match interval.state {
                IntervalState::Payload => ("payload", &style.payload),
                IntervalState::TransferWait => ("transfer_wait", &style.transfer),
                IntervalState::Arbitration => ("arbitration", &style.arbitration),
                IntervalState::Blocked => ("blocked", &style.blocked),
                IntervalState::Idle => ("idle", &style.idle),
            };
            if interval.state == IntervalState::Payload && interval.end == interval.start {
                let _ = writeln!(
                    svg,
                    "<circle class=\"payload\" cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"{}\"/>",
                    fmt_coord(x),
                    fmt_coord(sy(interval.start)),
                    style.payload.color
                );
            } else {
                let _ = writeln!(
                    svg,
                    "<line class=\"{}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {}/>",
                    class,
                    fmt_coord(x),
                    fmt_coord(sy(interval.start)),
                    fmt_coord(x),
                    fmt_coord(sy(interval.end)),
                    stroke.attrs()
                );
            }
        }
    }

    // signal flights: slanted from source position at emit to destination at
    // arrival
    let position_of = |id| {
        result
            .components
            .iter()
            .find(|c| c.id == id)
            .map(|c| c.position)
    };
    for flight in &result.transfers {
        let (Some(from), Some(to)) = (position_of(flight.source), position_of(flight.dest)) else {
            continue;
        };
        let _ = writeln!(
            svg,
            "<line class=\"transfer\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {}/>",
            fmt_coord(sx(from.x)),
            fmt_coord(sy(flight.emit_time)),
            fmt_coord(sx(to.x)),
            fmt_coord(sy(flight.arrival_time)),
            style.transfer.attrs()
        );
    }

    // apparent-time vectors from the origin
    for (x, t) in &style.apparent_vectors {
        let _ = writeln!(
            svg,
            "<line class=\"apparent\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {}/>",
            fmt_coord(sx(0.0)),
            fmt_coord(sy(0.0)),
            fmt_coord(sx(*x)),
            fmt_coord(sy(*t)),
            style.apparent.attrs()
        );
    }

    // component name ticks
    for meta in &result.components {
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">{}</text>",
            fmt_coord(sx(meta.position.x)),
            fmt_coord(H - MB + 14.0),
            xml_escape(&meta.name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(raw: &str) -> String {
    raw.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::{ComponentId, ComponentKind, ComponentSpec};
    use crate::engine::{self, SignalEvent, SignalKind};
    use crate::scenarios::{
        build_ann_layer_scenario, build_bus_scenario, build_cache_scenario,
        build_distributed_scenario, build_observer_chain, build_one_bit_adder,
    };
    use crate::timespace::TimePoint;
    use approx::assert_abs_diff_eq;
    use std::collections::BTreeMap;

    const MINIMAL: &str = r#"{
        "name": "minimal",
        "speed": 1.0,
        "components": [
            {"id": 0, "name": "src", "kind": "source", "position": {"x": 0.0, "y": 0.0}, "t_p": 0.0},
            {"id": 1, "name": "sink", "kind": "sink", "position": {"x": 1.0, "y": 0.0}, "t_p": 1.0}
        ],
        "stimuli": [
            {"id": 0, "source": 0, "dest": 1, "emit_time": 0.0, "kind": "data"}
        ]
    }"#;

    #[test]
    fn parse_minimal_document() {
        let scenario = parse_scenario(MINIMAL).unwrap();
        assert_eq!(scenario.components.len(), 2);
        assert_eq!(scenario.stimuli.len(), 1);
        let result = scenario.run().unwrap();
        assert_eq!(result.makespan, 2.0);
    }

    #[test]
    fn parse_errors_are_distinguished() {
        // malformed syntax
        let err = parse_scenario("{ not json").unwrap_err();
        assert!(matches!(err, Error::Syntax(_)), "{err:?}");

        // schema violation: unknown key
        let unknown = MINIMAL.replace("\"name\": \"minimal\"", "\"name\": \"m\", \"bogus\": 1");
        let err = parse_scenario(&unknown).unwrap_err();
        assert!(matches!(err, Error::Schema(_)), "{err:?}");

        // schema violation: wrong type
        let wrong = MINIMAL.replace("\"t_p\": 1.0", "\"t_p\": \"fast\"");
        let err = parse_scenario(&wrong).unwrap_err();
        assert!(matches!(err, Error::Schema(_)), "{err:?}");

        // schema violation: unknown key inside a kind payload
        let payload = MINIMAL.replace(
            "\"kind\": \"sink\"",
            "\"kind\": {\"gate\": {\"op\": \"xor\", \"outputs\": [], \"hack\": 1}}",
        );
        let err = parse_scenario(&payload).unwrap_err();
        assert!(matches!(err, Error::Schema(_)), "{err:?}");

        // duplicate component id, named in the message
        let dup = MINIMAL.replace("\"id\": 1, \"name\": \"sink\"", "\"id\": 0, \"name\": \"sink\"");
        let err = parse_scenario(&dup).unwrap_err();
        match err {
            Error::DuplicateId(msg) => assert!(msg.contains('0')),
            other => panic!("expected duplicate id, got {other:?}"),
        }

        // dangling reference
        let dangling = MINIMAL.replace("\"dest\": 1", "\"dest\": 7");
        let err = parse_scenario(&dangling).unwrap_err();
        assert!(matches!(err, Error::DanglingReference(ComponentId(7))), "{err:?}");
    }

    #[test]
    fn builders_round_trip_through_json() {
        let scenarios = vec![
            build_observer_chain(1.0, 1.0, &[0.5, 1.0, 2.0]).unwrap(),
            build_one_bit_adder(TimePoint::new(1.0, 0.0)).unwrap(),
            build_bus_scenario(3, 0.1, 1.0).unwrap(),
            build_distributed_scenario(2, 0.1, 1.0, 0.1, 1.0).unwrap(),
            build_cache_scenario(0.5, 1.0).unwrap(),
            build_ann_layer_scenario(3, 1.0, 0.1, false).unwrap(),
        ];
        for scenario in scenarios {
            let json = write_scenario_json(&scenario).unwrap();
            let back = parse_scenario(&json).unwrap();
            assert_eq!(back, scenario, "{} did not round-trip", scenario.name);
            // equivalent behavior, not just equal fields
            let a = write_trace_csv(&scenario.run().unwrap());
            let b = write_trace_csv(&back.run().unwrap());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn parsed_cache_document_reproduces_access_time() {
        let scenario = build_cache_scenario(0.5, 1.0).unwrap();
        let json = write_scenario_json(&scenario).unwrap();
        let result = parse_scenario(&json).unwrap().run().unwrap();
        assert_abs_diff_eq!(
            result.metrics["apparent_access_core0"],
            2.4142136,
            epsilon = 1e-7
        );
    }

    fn empty_result() -> SimulationResult {
        SimulationResult {
            makespan: 0.0,
            trace: vec![],
            transfers: vec![],
            utilization: BTreeMap::new(),
            metrics: BTreeMap::new(),
            components: vec![],
        }
    }

    #[test]
    fn csv_empty_trace_is_header_only() {
        assert_eq!(write_trace_csv(&empty_result()), "component,start,end,state,detail\n");
    }

    #[test]
    fn csv_single_interval_two_lines() {
        let mut result = empty_result();
        result.components.push(crate::engine::ComponentMeta {
            id: ComponentId(1),
            name: "sink".into(),
            kind: "sink".into(),
            position: TimePoint::new(1.0, 0.0),
        });
        result.makespan = 2.0;
        result.trace.push(crate::engine::TraceInterval {
            component: ComponentId(1),
            start: 1.0,
            end: 2.0,
            state: IntervalState::Payload,
            detail: String::new(),
        });
        let csv = write_trace_csv(&result);
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "sink,1.000000000,2.000000000,payload,"
        );
    }

    fn chain_scenario() -> Scenario {
        Scenario::new(
            "chain",
            vec![
                ComponentSpec::new(0, "source", ComponentKind::Source, TimePoint::ORIGIN, 1.0),
                ComponentSpec::new(
                    1,
                    "observer",
                    ComponentKind::ProcessingUnit {
                        inputs_required: 1,
                        outputs: vec![],
                    },
                    TimePoint::new(1.0, 0.0),
                    1.0,
                ),
            ],
            vec![SignalEvent {
                id: 0,
                source: ComponentId(0),
                dest: ComponentId(1),
                emit_time: 1.0,
                kind: SignalKind::Data,
                payload_bits: None,
            }],
        )
    }

    #[test]
    fn csv_observer_chain_has_five_rows() {
        let result = engine::run(&chain_scenario()).unwrap();
        let csv = write_trace_csv(&result);
        let lines: Vec<&str> = csv.lines().collect();
        // header + source payload/idle + observer idle/payload + one flight
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "component,start,end,state,detail");
        assert_eq!(lines[1], "observer,0.000000000,2.000000000,idle,");
        assert_eq!(lines[2], "observer,2.000000000,3.000000000,payload,process");
        assert_eq!(lines[3], "signal:0,1.000000000,2.000000000,transfer,source->observer data");
        assert_eq!(lines[4], "source,0.000000000,1.000000000,payload,stimulus");
        assert_eq!(lines[5], "source,1.000000000,3.000000000,idle,");
    }

    /// The tiling must be re-checkable from the CSV text alone.
    #[test]
    fn csv_rows_tile_each_component() {
        for scenario in [
            build_bus_scenario(4, 0.1, 1.0).unwrap(),
            build_cache_scenario(0.5, 1.0).unwrap(),
            build_distributed_scenario(3, 0.1, 1.0, 0.1, 1.0).unwrap(),
        ] {
            let result = scenario.run().unwrap();
            let csv = write_trace_csv(&result);
            let mut per_component: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
            let mut makespan = 0.0f64;
            for line in csv.lines().skip(1) {
                let fields: Vec<&str> = line.split(',').collect();
                let (component, start, end, state) = (
                    fields[0],
                    fields[1].parse::<f64>().unwrap(),
                    fields[2].parse::<f64>().unwrap(),
                    fields[3],
                );
                makespan = makespan.max(end);
                if state != "transfer" {
                    per_component.entry(component).or_default().push((start, end));
                }
            }
            for (component, intervals) in per_component {
                let mut cursor = 0.0;
                for (start, end) in intervals {
                    assert_eq!(start, cursor, "gap at {component}");
                    cursor = end;
                }
                assert_eq!(cursor, makespan, "{component} does not reach makespan");
            }
        }
    }

    #[test]
    fn svg_empty_result_is_axes_only() {
        let svg = write_svg_diagram(&empty_result(), &DiagramStyle::default());
        assert!(svg.starts_with("<svg xmlns"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("class=\"axes\""));
        assert!(!svg.contains("class=\"payload\""));
    }

    #[test]
    fn svg_adder_has_seven_payload_marks() {
        let result = build_one_bit_adder(TimePoint::new(1.0, 0.0))
            .unwrap()
            .run()
            .unwrap();
        let svg = write_svg_diagram(&result, &DiagramStyle::default());
        // five gates settle, two output pins latch
        assert_eq!(svg.matches("class=\"payload\"").count(), 7);
    }

    #[test]
    fn svg_is_deterministic() {
        let scenario = build_bus_scenario(3, 0.1, 1.0).unwrap();
        let a = write_svg_diagram(&scenario.run().unwrap(), &DiagramStyle::default());
        let b = write_svg_diagram(&scenario.run().unwrap(), &DiagramStyle::default());
        assert_eq!(a, b);
    }

    #[test]
    fn svg_adder_matches_golden_file() {
        let result = build_one_bit_adder(TimePoint::new(1.0, 0.0))
            .unwrap()
            .run()
            .unwrap();
        let svg = write_svg_diagram(&result, &DiagramStyle::default());
        assert_eq!(svg, include_str!("../tests/golden/adder_plus.svg"));
    }

    #[test]
    fn default_styles_are_distinct()
    {
        assert!(DiagramStyle::default().styles_distinct());
    }

    #[test]
    fn nine_decimal_formatting() {
        assert_eq!(format_time(0.0), "0.000000000");
        assert_eq!(format_time(-0.0), "0.000000000");
        assert_eq!(format_time(2.0_f64.sqrt()), "1.414213562");
        assert_eq!(format_time(7.2), "7.200000000");
    }
}
