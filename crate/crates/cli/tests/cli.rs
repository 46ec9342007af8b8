//! End-to-end tests against the compiled binary.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn tempora(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tempora"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn parse_metrics(text: &str) -> BTreeMap<String, f64> {
    text.lines()
        .filter_map(|line| {
            let (key, value) = line.split_once(" = ")?;
            Some((key.to_string(), value.parse().ok()?))
        })
        .collect()
}

#[test]
fn ratio_prints_apparent_time_inflation() {
    let output = tempora(&["ratio", "--r", "1"]);
    assert!(output.status.success());
    let metrics = parse_metrics(&stdout(&output));
    assert!((metrics["ratio_1"] - 3.1622777).abs() < 1e-6);

    let output = tempora(&["ratio", "--r", "0.5,1,2"]);
    let metrics = parse_metrics(&stdout(&output));
    assert_eq!(metrics.len(), 3);
    assert!((metrics["ratio_0.5"] - 2.5495098).abs() < 1e-6);
    assert!((metrics["ratio_2"] - 4.4721360).abs() < 1e-6);
}

#[test]
fn cache_metrics_match_library_values() {
    let output = tempora(&["cache", "--y", "0.5", "--tp", "1.0", "--metrics"]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.contains("apparent_access_core0 = 2.414213562"), "{text}");
    let metrics = parse_metrics(&text);
    let expected = tempora_core::scenarios::build_cache_scenario(0.5, 1.0)
        .unwrap()
        .run()
        .unwrap();
    for (key, value) in &expected.metrics {
        assert_eq!(metrics[key], format!("{value:.9}").parse::<f64>().unwrap());
    }
}

#[test]
fn missing_scenario_file_exits_two() {
    let output = tempora(&["run", "definitely-not-there.json"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_flag_exits_one() {
    let output = tempora(&["bus", "--bogus"]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn invalid_scenario_file_exits_two() {
    let dir = std::env::temp_dir().join("tempora-cli-test-bad");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.json");
    std::fs::write(&path, "{ this is not json").unwrap();
    let output = tempora(&["run", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn run_round_trips_a_builder_scenario() {
    let scenario = tempora_core::scenarios::build_bus_scenario(2, 0.1, 1.0).unwrap();
    let dir = std::env::temp_dir().join("tempora-cli-test-run");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bus.json");
    std::fs::write(
        &path,
        tempora_core::io::write_scenario_json(&scenario).unwrap(),
    )
    .unwrap();
    let output = tempora(&["run", path.to_str().unwrap(), "--metrics"]);
    assert!(output.status.success());
    let metrics = parse_metrics(&stdout(&output));
    assert!((metrics["delivery_1"] - 3.1).abs() < 1e-9);
    assert!((metrics["delivery_2"] - 7.2).abs() < 1e-9);
}

#[test]
fn sweep_writes_the_golden_surface() {
    let dir = std::env::temp_dir().join("tempora-cli-test-sweep");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("surface.csv");
    let output = tempora(&[
        "sweep",
        "--n",
        "1,10,100,1000",
        "--one-minus-alpha",
        "1e-7,1e-4,1e-2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let written = std::fs::read_to_string(&path).unwrap();
    let golden = include_str!("../../core/tests/golden/sweep_4x3.csv");
    assert_eq!(written, golden);
}

#[test]
fn trace_and_svg_files_are_written_and_deterministic() {
    let dir = std::env::temp_dir().join("tempora-cli-test-out");
    std::fs::create_dir_all(&dir).unwrap();
    let trace_a = dir.join("a.csv");
    let svg_a = dir.join("a.svg");
    let trace_b = dir.join("b.csv");
    let svg_b = dir.join("b.svg");
    for (trace, svg) in [(&trace_a, &svg_a), (&trace_b, &svg_b)] {
        let output = tempora(&[
            "adder",
            "--xor2",
            "1,0",
            "--out-trace",
            trace.to_str().unwrap(),
            "--out-svg",
            svg.to_str().unwrap(),
        ]);
        assert!(output.status.success());
    }
    assert_eq!(read(&trace_a), read(&trace_b));
    assert_eq!(read(&svg_a), read(&svg_b));
    assert!(read(&trace_a).starts_with("component,start,end,state,detail"));
    assert!(read(&svg_a).starts_with("<svg"));
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn observer_chain_metrics() {
    let output = tempora(&[
        "observer",
        "--tp",
        "1",
        "--distance",
        "1",
        "--speeds",
        "0.5,1,2",
        "--metrics",
    ]);
    assert!(output.status.success());
    let metrics = parse_metrics(&stdout(&output));
    assert!((metrics["apparent_time_1"] - 4.4721360).abs() < 1e-6);
    assert!((metrics["apparent_time_2"] - 3.1622777).abs() < 1e-6);
    assert!((metrics["apparent_time_3"] - 2.5495098).abs() < 1e-6);
}
