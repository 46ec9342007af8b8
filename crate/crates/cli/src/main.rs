//! Command-line front end: scenario builders, the simulation engine,
//! analytic sweeps and the exporters.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on simulation, parse or
//! file errors. All metric output is printed as machine-parsable
//! `key = value` lines with nine decimal places.

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use tempora_core::analytic::efficiency_surface;
use tempora_core::io::{
    format_time, parse_scenario, write_efficiency_csv, write_svg_diagram, write_trace_csv,
    DiagramStyle,
};
use tempora_core::scenarios::{
    build_ann_layer_scenario, build_bus_scenario, build_cache_scenario,
    build_distributed_scenario, build_observer_chain, build_one_bit_adder_with_inputs, Scenario,
};
use tempora_core::{IntervalState, SimulationResult, TimePoint};

#[derive(Parser)]
#[command(
    name = "tempora",
    version,
    about = "Deterministic time-space simulator for computing components"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the interval trace as CSV
    #[arg(long = "out-trace", value_name = "PATH")]
    out_trace: Option<PathBuf>,
    /// Write the temporal dependence diagram as SVG
    #[arg(long = "out-svg", value_name = "PATH")]
    out_svg: Option<PathBuf>,
    /// Print scenario metrics as `key = value` lines
    #[arg(long)]
    metrics: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario JSON file
    Run {
        file: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Source plus observers at several transmission speeds
    Observer {
        /// Processing time of source and observers
        #[arg(long, default_value_t = 1.0)]
        tp: f64,
        /// Source-observer distance in time units
        #[arg(long, default_value_t = 1.0)]
        distance: f64,
        /// Comma-separated speed factors, one observer each
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        speeds: Vec<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// One-bit adder with a movable second XOR gate
    Adder {
        /// Position of the second XOR gate, as `x,y`
        #[arg(long, value_parser = parse_point, default_value = "1,0")]
        xor2: TimePoint,
        /// Input bits `a,b,cin`
        #[arg(long, value_parser = parse_bits, default_value = "1,0,1")]
        inputs: AdderInputs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Senders competing for one shared bus
    Bus {
        /// Number of senders
        #[arg(long, default_value_t = 8)]
        n: u32,
        /// Message serialization time
        #[arg(long = "t-msg", default_value_t = 0.1)]
        t_msg: f64,
        /// Distance between neighboring senders
        #[arg(long, default_value_t = 1.0)]
        spacing: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Two cores sharing one on-chip cache
    Cache {
        /// Cache position above the core row
        #[arg(long, default_value_t = 0.5)]
        y: f64,
        /// Physical cache operating time
        #[arg(long, default_value_t = 1.0)]
        tp: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Coordinator dispatching to sequential workers
    Distributed {
        /// Number of workers
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long = "t-dispatch", default_value_t = 0.1)]
        t_dispatch: f64,
        #[arg(long = "t-work", default_value_t = 1.0)]
        t_work: f64,
        #[arg(long = "t-recv", default_value_t = 0.1)]
        t_recv: f64,
        #[arg(long, default_value_t = 1.0)]
        spacing: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// A neuron layer firing its results toward a collector
    Ann {
        /// Number of neurons
        #[arg(long, default_value_t = 3)]
        n: u32,
        /// Neuron computation time (also the collector's polling period)
        #[arg(long, default_value_t = 1.0)]
        tp: f64,
        #[arg(long = "t-msg", default_value_t = 0.1)]
        t_msg: f64,
        /// Point-to-point links instead of the shared bus
        #[arg(long)]
        dedicated: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Evaluate the efficiency surface over (n, 1-alpha) and write it as CSV
    Sweep {
        /// Comma-separated processor counts
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        /// Comma-separated non-payload portions
        #[arg(long = "one-minus-alpha", value_delimiter = ',', required = true)]
        one_minus_alpha: Vec<f64>,
        /// Output CSV path
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
    /// Print apparent-time ratios T_A/T_p for given R = T_t/T_p values
    Ratio {
        /// Comma-separated R values
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<f64>,
    },
}

#[derive(Clone, Copy)]
struct AdderInputs {
    a: bool,
    b: bool,
    cin: bool,
}

fn parse_point(raw: &str) -> Result<TimePoint, String> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected `x,y`, got `{raw}`"));
    }
    let x: f64 = parts[0].trim().parse().map_err(|e| format!("bad x: {e}"))?;
    let y: f64 = parts[1].trim().parse().map_err(|e| format!("bad y: {e}"))?;
    Ok(TimePoint::new(x, y))
}

fn parse_bits(raw: &str) -> Result<AdderInputs, String> {
    let bits: Vec<bool> = raw
        .split(',')
        .map(|part| match part.trim() {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(format!("expected 0 or 1, got `{other}`")),
        })
        .collect::<Result<_, _>>()?;
    if bits.len() != 3 {
        return Err(format!("expected `a,b,cin`, got `{raw}`"));
    }
    Ok(AdderInputs {
        a: bits[0],
        b: bits[1],
        cin: bits[2],
    })
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help and version print to stdout and exit 0; real usage errors
            // exit 1
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = dispatch(cli.command) {
        eprintln!("error: {err:#}");
        std::process::exit(2);
    }
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Run { file, out } => {
            let text = std::fs::read_to_string(&file)
                .with_context(|| format!("cannot read {}", file.display()))?;
            let scenario = parse_scenario(&text)?;
            simulate(&scenario, &out)
        }
        Command::Observer {
            tp,
            distance,
            speeds,
            out,
        } => {
            let scenario = build_observer_chain(tp, distance, &speeds)?;
            simulate(&scenario, &out)
        }
        Command::Adder { xor2, inputs, out } => {
            let scenario = build_one_bit_adder_with_inputs(xor2, inputs.a, inputs.b, inputs.cin)?;
            simulate(&scenario, &out)
        }
        Command::Bus {
            n,
            t_msg,
            spacing,
            out,
        } => simulate(&build_bus_scenario(n, t_msg, spacing)?, &out),
        Command::Cache { y, tp, out } => simulate(&build_cache_scenario(y, tp)?, &out),
        Command::Distributed {
            n,
            t_dispatch,
            t_work,
            t_recv,
            spacing,
            out,
        } => simulate(
            &build_distributed_scenario(n, t_dispatch, t_work, t_recv, spacing)?,
            &out,
        ),
        Command::Ann {
            n,
            tp,
            t_msg,
            dedicated,
            out,
        } => simulate(&build_ann_layer_scenario(n, tp, t_msg, dedicated)?, &out),
        Command::Sweep {
            n,
            one_minus_alpha,
            out,
        } => {
            let grid = efficiency_surface(&n, &one_minus_alpha)?;
            std::fs::write(&out, write_efficiency_csv(&grid))
                .with_context(|| format!("cannot write {}", out.display()))?;
            Ok(())
        }
        Command::Ratio { r } => {
            for r in r {
                let ratio = tempora_core::timespace::apparent_time_ratio(r)?;
                println!("ratio_{r} = {}", format_time(ratio));
            }
            Ok(())
        }
    }
}

fn simulate(scenario: &Scenario, out: &OutputArgs) -> anyhow::Result<()> {
    let result = scenario.run()?;
    if out.metrics {
        for (key, value) in &result.metrics {
            println!("{key} = {}", format_time(*value));
        }
    }
    if let Some(path) = &out.out_trace {
        std::fs::write(path, write_trace_csv(&result))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(path) = &out.out_svg {
        let mut style = DiagramStyle::default();
        style.apparent_vectors = apparent_vectors(&result);
        std::fs::write(path, write_svg_diagram(&result, &style))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

/// Red apparent-time overlay for observer-style scenarios: one vector from
/// the origin to each observer's completion point.
fn apparent_vectors(result: &SimulationResult) -> Vec<(f64, f64)> {
    let mut vectors = Vec::new();
    for meta in &result.components {
        if !meta.name.starts_with("observer_") {
            continue;
        }
        let light_on = result
            .trace
            .iter()
            .filter(|iv| iv.component == meta.id && iv.state == IntervalState::Payload)
            .map(|iv| iv.end)
            .last();
        if let Some(t) = light_on {
            vectors.push((meta.position.x, t));
        }
    }
    vectors
}
