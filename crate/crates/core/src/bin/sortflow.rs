use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use sortflow::dimacs::{parse_dimacs, write_dimacs};
use sortflow::engine::{run, RunLimits, Termination};
use sortflow::generators::Instance;
use sortflow::harness::{
    bench_csv_row, bench_one, parse_gen_spec, render_jsonl, summarize, verify,
    write_counterexamples, SweepFamily, BENCH_CSV_HEADER,
};
use sortflow::network::recovered_flow;
use sortflow::oracle::max_flow_reference;
use sortflow::restore::restore_flow;

#[derive(Parser)]
#[command(name = "sortflow", version, about = "Sorting-flow maximum flow solver and claim harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    SortingFlow,
    Reference,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Metrics {
    Plain,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Random,
    Line,
    Layered,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance from a DIMACS file or a generator spec.
    Solve {
        /// DIMACS max-flow file.
        input: Option<PathBuf>,
        /// Generator spec, e.g. `line:k=3,cap=3` or `two-iteration`.
        #[arg(long, conflicts_with = "input")]
        gen: Option<String>,
        #[arg(long, value_enum, default_value = "sorting-flow")]
        algorithm: Algorithm,
        /// Defaults to 10 n.
        #[arg(long)]
        max_iterations: Option<usize>,
        #[arg(long, value_enum, default_value = "plain")]
        metrics: Metrics,
        /// Return stranded excess to the source before reporting.
        #[arg(long)]
        restore_flow: bool,
    },
    /// Check hard invariants and measure claims over a family of instances.
    Verify {
        #[arg(long, value_enum, default_value = "random")]
        family: Family,
        /// First seed of a random sweep.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of instances (random), largest k (line) or largest L (layered).
        #[arg(long, default_value_t = 1000)]
        count: u64,
        /// Largest vertex count of a random sweep.
        #[arg(long, default_value_t = 40)]
        n: usize,
        /// Largest arc count of a random sweep.
        #[arg(long, default_value_t = 200)]
        m: usize,
        /// Largest capacity (random) or the line capacity.
        #[arg(long, default_value_t = 20)]
        max_cap: u64,
        /// Layer width for the layered family.
        #[arg(long, default_value_t = 1)]
        width: usize,
        #[arg(long)]
        max_iterations: Option<usize>,
        /// Directory for verdicts.jsonl, summary.json and counterexamples.
        #[arg(long, default_value = "verify-out")]
        out: PathBuf,
    },
    /// Measure rounds and work over a size sweep.
    Bench {
        #[arg(long, value_enum, default_value = "line")]
        family: Family,
        /// Comma-separated sizes: k (line), L (layered) or n (random).
        #[arg(long, value_delimiter = ',', default_values_t = vec![10usize, 100, 1000])]
        sizes: Vec<usize>,
        /// Layer width for the layered family.
        #[arg(long, default_value_t = 1)]
        width: usize,
        /// Arcs per vertex for the random family.
        #[arg(long, default_value_t = 4)]
        density: usize,
        #[arg(long, default_value_t = 20)]
        max_cap: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        metrics: Metrics,
    },
    /// Print a generated instance in DIMACS format.
    Gen {
        /// Generator spec, e.g. `layered:L=4,W=2` or `random:n=10,m=30,seed=3`.
        spec: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(input: Option<PathBuf>, gen: Option<String>) -> Result<Instance> {
    match (input, gen) {
        (_, Some(spec)) => Ok(parse_gen_spec(&spec)?),
        (Some(path), None) => {
            let text = fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            let mut inst =
                parse_dimacs(&text).with_context(|| format!("parsing {}", path.display()))?;
            inst.label = path.display().to_string();
            Ok(inst)
        }
        (None, None) => bail!("give an input file or --gen <spec>"),
    }
}

fn solve(
    inst: Instance,
    algorithm: Algorithm,
    max_iterations: Option<usize>,
    metrics: Metrics,
    restore: bool,
) -> Result<ExitCode> {
    let net = inst.build().context("building network")?;
    if algorithm == Algorithm::Reference {
        let result = max_flow_reference(&net);
        match metrics {
            Metrics::Plain => println!("flow {}", result.value),
            Metrics::Json => println!(
                "{}",
                json!({"instance": inst.label, "algorithm": "reference", "flow_value": result.value,
                       "cut": result.cut, "flow": result.flow})
            ),
            Metrics::Csv => println!("instance,flow_value\n\"{}\",{}", inst.label, result.value),
        }
        return Ok(ExitCode::SUCCESS);
    }

    let mut limits = RunLimits::for_network(&net);
    if let Some(cap) = max_iterations {
        limits.max_iterations = cap;
    }
    let (mut state, report) = run(&net, limits)?;
    if restore {
        if report.terminated_by != Termination::Converged {
            bail!("--restore-flow needs a converged run");
        }
        state = restore_flow(&net, &state)?;
    }
    match metrics {
        Metrics::Plain => {
            println!("flow {}", report.flow_value);
            println!("iterations {}", report.iterations);
            println!("total_augments {}", report.total_augments);
            println!("terminated_by {}", serde_json::to_value(report.terminated_by)?.as_str().unwrap_or("?"));
        }
        Metrics::Json => {
            let mut value = json!({"instance": inst.label, "algorithm": "sorting-flow", "report": report});
            if restore {
                value["flow"] = json!(recovered_flow(&net, &state));
            }
            println!("{value}");
        }
        Metrics::Csv => {
            println!("instance,n,m,flow_value,iterations,total_augments,total_arc_touches,terminated_by");
            println!(
                "\"{}\",{},{},{},{},{},{},{}",
                inst.label,
                inst.vertex_count,
                inst.arc_count(),
                report.flow_value,
                report.iterations,
                report.total_augments,
                report.total_arc_touches,
                serde_json::to_value(report.terminated_by)?.as_str().unwrap_or("?")
            );
        }
    }
    Ok(match report.terminated_by {
        Termination::Converged => ExitCode::SUCCESS,
        Termination::IterationCap => ExitCode::from(2),
    })
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Solve {
            input,
            gen,
            algorithm,
            max_iterations,
            metrics,
            restore_flow,
        } => solve(load(input, gen)?, algorithm, max_iterations, metrics, restore_flow),
        Command::Verify {
            family,
            seed,
            count,
            n,
            m,
            max_cap,
            width,
            max_iterations,
            out,
        } => {
            let sweep = match family {
                Family::Random => SweepFamily::Random {
                    start: seed,
                    count,
                    max_n: n,
                    max_m: m,
                    max_cap,
                },
                Family::Line => SweepFamily::Line {
                    max_k: count as usize,
                    cap: max_cap,
                },
                Family::Layered => SweepFamily::Layered {
                    max_layers: count as usize,
                    width,
                },
            };
            let items = sweep.instances()?;
            let verdicts = verify(&items, max_iterations);
            let written = write_counterexamples(&out.join("counterexamples"), &items, &verdicts)?;
            let summary = summarize(
                &verdicts,
                written.iter().map(|p| p.display().to_string()).collect(),
            );
            let stream = render_jsonl(&verdicts, &summary);
            fs::create_dir_all(&out)?;
            fs::write(out.join("verdicts.jsonl"), &stream)?;
            fs::write(
                out.join("summary.json"),
                serde_json::to_string_pretty(&summary)? + "\n",
            )?;
            print!("{stream}");
            Ok(if summary.hard_invariants_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Bench {
            family,
            sizes,
            width,
            density,
            max_cap,
            seed,
            metrics,
        } => {
            let mut rows = Vec::new();
            for &size in &sizes {
                let spec = match family {
                    Family::Line => format!("line:k={size},cap={max_cap}"),
                    Family::Layered => format!("layered:L={size},W={width}"),
                    Family::Random => format!(
                        "random:n={size},m={},max_cap={max_cap},seed={seed}",
                        size * density
                    ),
                };
                rows.push(bench_one(&parse_gen_spec(&spec)?)?);
            }
            match metrics {
                Metrics::Json => {
                    for row in &rows {
                        println!("{}", serde_json::to_string(row)?);
                    }
                }
                Metrics::Csv | Metrics::Plain => {
                    println!("{BENCH_CSV_HEADER}");
                    for row in &rows {
                        println!("{}", bench_csv_row(row));
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen { spec, out } => {
            let inst = parse_gen_spec(&spec)?;
            let text = write_dimacs(&inst);
            match out {
                Some(path) => fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
