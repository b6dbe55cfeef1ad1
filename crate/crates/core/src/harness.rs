//! Claim verification and benchmarking over families of instances.
//!
//! Every instance is checked against two kinds of properties. Hard
//! invariants follow from preflow theory alone and decide the exit status
//! of a sweep. Claims about the algorithm (optimality, per-round progress,
//! the per-pass augment bound, the square-root round bound) are measured
//! and reported with agreement rates; a failing claim never fails a sweep.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dimacs::write_dimacs;
use crate::engine::{run, sqrt_iteration_bound, RunLimits, RunReport, Termination};
use crate::generators::{
    descending_profile, gen_layered_blocking, gen_line, gen_random, gen_sweep_instance,
    gen_two_iteration, GeneratorError, Instance,
};
use crate::network::{validate_preflow, Capacity, Excess};
use crate::oracle::{certify_cut, max_flow_reference};
use crate::restore::restore_flow;

pub const CLAIMS: [&str; 5] = [
    "matches_oracle",
    "sink_gain_monotone",
    "saturate_or_discharge",
    "augments_linear",
    "iterations_sqrt_bound",
];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error("invalid generator spec `{spec}`: {reason}")]
    InvalidSpec { spec: String, reason: String },
}

/// Parses a generator description such as `line:k=3,cap=3`,
/// `two-iteration`, `layered:L=2,W=2,profile=4-2-1` or
/// `random:n=10,m=30,max_cap=20,seed=7`.
pub fn parse_gen_spec(spec: &str) -> Result<Instance, HarnessError> {
    let invalid = |reason: &str| HarnessError::InvalidSpec {
        spec: spec.to_string(),
        reason: reason.to_string(),
    };
    let (family, params) = spec.split_once(':').unwrap_or((spec, ""));
    let mut kv = BTreeMap::new();
    for pair in params.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| invalid("parameters must be key=value"))?;
        kv.insert(k.trim(), v.trim());
    }
    let int = |key: &str, default: Option<u64>| -> Result<u64, HarnessError> {
        match kv.get(key) {
            Some(v) => v
                .parse()
                .map_err(|_| invalid(&format!("`{key}` must be a nonnegative integer"))),
            None => default.ok_or_else(|| invalid(&format!("missing `{key}`"))),
        }
    };
    let inst = match family {
        "line" => gen_line(int("k", None)? as usize, int("cap", Some(1))?)?,
        "two-iteration" => gen_two_iteration(),
        "layered" => {
            let layers = int("L", None)? as usize;
            let width = int("W", Some(1))? as usize;
            let profile = match kv.get("profile") {
                Some(p) => p
                    .split('-')
                    .map(|c| c.parse::<Capacity>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| invalid("profile must be dash-separated integers"))?,
                None => descending_profile(layers),
            };
            gen_layered_blocking(layers, width, &profile)?
        }
        "random" => gen_random(
            int("n", None)? as usize,
            int("m", None)? as usize,
            int("max_cap", Some(20))?,
            int("seed", Some(0))?,
        )?,
        _ => return Err(invalid("unknown family")),
    };
    Ok(inst)
}

/// One instance of a sweep, tagged with the seed that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepItem {
    pub seed: Option<u64>,
    pub instance: Instance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepFamily {
    /// Seeds `start..start + count`, each through [`gen_sweep_instance`].
    Random {
        start: u64,
        count: u64,
        max_n: usize,
        max_m: usize,
        max_cap: Capacity,
    },
    /// `gen_line(k, cap)` for `k` in `1..=max_k`.
    Line { max_k: usize, cap: Capacity },
    /// `gen_layered_blocking(L, width, descending)` for `L` in `1..=max_layers`.
    Layered { max_layers: usize, width: usize },
}

impl SweepFamily {
    pub fn instances(&self) -> Result<Vec<SweepItem>, GeneratorError> {
        match *self {
            SweepFamily::Random {
                start,
                count,
                max_n,
                max_m,
                max_cap,
            } => (start..start + count)
                .map(|seed| {
                    gen_sweep_instance(seed, max_n, max_m, max_cap).map(|instance| SweepItem {
                        seed: Some(seed),
                        instance,
                    })
                })
                .collect(),
            SweepFamily::Line { max_k, cap } => (1..=max_k)
                .map(|k| {
                    gen_line(k, cap).map(|instance| SweepItem {
                        seed: None,
                        instance,
                    })
                })
                .collect(),
            SweepFamily::Layered { max_layers, width } => (1..=max_layers)
                .map(|l| {
                    gen_layered_blocking(l, width, &descending_profile(l)).map(|instance| {
                        SweepItem {
                            seed: None,
                            instance,
                        }
                    })
                })
                .collect(),
        }
    }
}

/// Invariants that must hold for every instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardVerdicts {
    /// The engine finished without an internal error.
    pub engine_ok: bool,
    /// Preflow validity (pair conservation, residual range, `e(v) >= 0`,
    /// excess identity) after every push pass and at the end.
    pub preflow_valid: bool,
    pub sink_bound: bool,
    pub core_acyclic: bool,
    /// Every BFSS pass inspected each arc at most twice.
    pub arc_touches_bounded: bool,
    /// A second run produced a byte-identical report.
    pub deterministic: bool,
    /// The final cut separates `s` from `t` and its capacity is at least the
    /// reference value. Only checked on converged runs.
    pub certificate_sound: bool,
    /// Returning stranded excess leaves a strict flow of the same value.
    /// Only checked on converged runs.
    pub restoration: bool,
}

impl HardVerdicts {
    pub fn all(&self) -> bool {
        self.engine_ok
            && self.preflow_valid
            && self.sink_bound
            && self.core_acyclic
            && self.arc_touches_bounded
            && self.deterministic
            && self.certificate_sound
            && self.restoration
    }

    fn named(&self) -> [(&'static str, bool); 8] {
        [
            ("engine_ok", self.engine_ok),
            ("preflow_valid", self.preflow_valid),
            ("sink_bound", self.sink_bound),
            ("core_acyclic", self.core_acyclic),
            ("arc_touches_bounded", self.arc_touches_bounded),
            ("deterministic", self.deterministic),
            ("certificate_sound", self.certificate_sound),
            ("restoration", self.restoration),
        ]
    }
}

/// One line of the verdict stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceVerdict {
    pub instance: String,
    pub seed: Option<u64>,
    pub n: usize,
    pub m: usize,
    pub flow_value: Capacity,
    pub oracle_value: Capacity,
    pub iterations: usize,
    pub total_augments: u64,
    pub max_augments_per_pass: u64,
    pub terminated_by: Option<Termination>,
    /// Claim verdicts keyed by [`CLAIMS`].
    pub verdicts: BTreeMap<String, bool>,
    pub hard: HardVerdicts,
    pub error: Option<String>,
}

impl InstanceVerdict {
    pub fn counterexample_name(&self, index: usize) -> String {
        match self.seed {
            Some(seed) => format!("seed_{seed}.max"),
            None => format!("instance_{index:04}.max"),
        }
    }

    pub fn any_false(&self) -> bool {
        !self.hard.all() || self.verdicts.values().any(|&v| !v)
    }
}

fn restoration_holds(
    net: &crate::network::Network,
    state: &crate::network::FlowState,
) -> bool {
    let Ok(restored) = restore_flow(net, state) else {
        return false;
    };
    let (s, t) = (net.source(), net.sink());
    restored.flow_value() == state.flow_value()
        && validate_preflow(net, &restored).is_empty()
        && (0..net.vertex_count())
            .filter(|&v| v != s && v != t)
            .all(|v| restored.excess(v) == Excess::Finite(0))
}

/// Runs the engine and the reference oracle on one instance and evaluates
/// every hard invariant and claim.
pub fn evaluate(inst: &Instance, seed: Option<u64>, max_iterations: Option<usize>) -> InstanceVerdict {
    let mut verdict = InstanceVerdict {
        instance: inst.label.clone(),
        seed,
        n: inst.vertex_count,
        m: inst.arc_count(),
        flow_value: 0,
        oracle_value: 0,
        iterations: 0,
        total_augments: 0,
        max_augments_per_pass: 0,
        terminated_by: None,
        verdicts: BTreeMap::new(),
        hard: HardVerdicts {
            engine_ok: false,
            preflow_valid: false,
            sink_bound: false,
            core_acyclic: false,
            arc_touches_bounded: false,
            deterministic: false,
            certificate_sound: false,
            restoration: false,
        },
        error: None,
    };
    let net = match inst.build() {
        Ok(net) => net,
        Err(e) => {
            verdict.error = Some(e.to_string());
            return verdict;
        }
    };
    let oracle = max_flow_reference(&net).value;
    verdict.oracle_value = oracle;

    let mut limits = RunLimits::for_network(&net);
    if let Some(cap) = max_iterations {
        limits.max_iterations = cap;
    }
    let (state, report) = match run(&net, limits) {
        Ok(out) => out,
        Err(e) => {
            verdict.error = Some(e.to_string());
            return verdict;
        }
    };
    let replay = run(&net, limits).ok().map(|(_, r)| r);
    let deterministic = replay.is_some_and(|r| {
        serde_json::to_vec(&r).ok() == serde_json::to_vec(&report).ok()
    });

    let converged = report.terminated_by == Termination::Converged;
    let certificate_sound = !converged
        || certify_cut(&net, &state).is_ok_and(|cut| cut.value >= oracle);
    let restoration = !converged || restoration_holds(&net, &state);

    verdict.flow_value = report.flow_value;
    verdict.iterations = report.iterations;
    verdict.total_augments = report.total_augments;
    verdict.max_augments_per_pass = report
        .per_iteration
        .iter()
        .map(|it| it.push.augments)
        .max()
        .unwrap_or(0);
    verdict.terminated_by = Some(report.terminated_by);
    verdict.hard = HardVerdicts {
        engine_ok: true,
        preflow_valid: report.hard.preflow_valid_each_pass && report.hard.final_preflow_valid,
        sink_bound: report.flow_value <= oracle,
        core_acyclic: report.hard.core_acyclic_each_iteration,
        arc_touches_bounded: report.hard.arc_touches_bounded,
        deterministic,
        certificate_sound,
        restoration,
    };
    let claims = &report.claims;
    for (name, holds) in [
        ("matches_oracle", report.flow_value == oracle),
        ("sink_gain_monotone", claims.sink_gain_monotone),
        ("saturate_or_discharge", claims.saturate_or_discharge),
        ("augments_linear", claims.augments_bounded),
        ("iterations_sqrt_bound", claims.iterations_sqrt_bound),
    ] {
        verdict.verdicts.insert(name.to_string(), holds);
    }
    verdict
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub holds: usize,
    pub total: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub summary: bool,
    pub instances: usize,
    pub hard_invariants_pass: bool,
    /// Instances failing each hard invariant.
    pub hard_failures: BTreeMap<String, usize>,
    pub claims: BTreeMap<String, Agreement>,
    pub max_iterations_observed: usize,
    pub counterexamples: Vec<String>,
}

pub fn summarize(verdicts: &[InstanceVerdict], counterexamples: Vec<String>) -> VerifySummary {
    let total = verdicts.len();
    let mut claims = BTreeMap::new();
    for name in CLAIMS {
        let holds = verdicts
            .iter()
            .filter(|v| v.verdicts.get(name).copied().unwrap_or(false))
            .count();
        let rate = if total == 0 { 1.0 } else { holds as f64 / total as f64 };
        claims.insert(name.to_string(), Agreement { holds, total, rate });
    }
    let mut hard_failures = BTreeMap::new();
    for v in verdicts {
        for (name, holds) in v.hard.named() {
            let entry = hard_failures.entry(name.to_string()).or_insert(0);
            if !holds {
                *entry += 1;
            }
        }
    }
    VerifySummary {
        summary: true,
        instances: total,
        hard_invariants_pass: verdicts.iter().all(|v| v.hard.all()),
        hard_failures,
        claims,
        max_iterations_observed: verdicts.iter().map(|v| v.iterations).max().unwrap_or(0),
        counterexamples,
    }
}

/// Evaluates a sweep in parallel; results come back in sweep order.
pub fn verify(items: &[SweepItem], max_iterations: Option<usize>) -> Vec<InstanceVerdict> {
    items
        .par_iter()
        .map(|item| evaluate(&item.instance, item.seed, max_iterations))
        .collect()
}

/// Writes a DIMACS file into `dir` for every instance with a false verdict
/// and returns the written paths.
pub fn write_counterexamples(
    dir: &Path,
    items: &[SweepItem],
    verdicts: &[InstanceVerdict],
) -> io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (index, (item, verdict)) in items.iter().zip(verdicts).enumerate() {
        if !verdict.any_false() {
            continue;
        }
        fs::create_dir_all(dir)?;
        let path = dir.join(verdict.counterexample_name(index));
        let mut text = format!("c {}\n", item.instance.label);
        text.push_str(&write_dimacs(&item.instance));
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}

/// Verdict stream: one JSON object per instance followed by the summary.
pub fn render_jsonl(verdicts: &[InstanceVerdict], summary: &VerifySummary) -> String {
    let mut out = String::new();
    for v in verdicts {
        out.push_str(&serde_json::to_string(v).expect("verdict serializes"));
        out.push('\n');
    }
    out.push_str(&serde_json::to_string(summary).expect("summary serializes"));
    out.push('\n');
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance: String,
    pub n: usize,
    pub m: usize,
    pub flow_value: Capacity,
    pub iterations: usize,
    pub total_augments: u64,
    pub total_arc_touches: u64,
    pub sqrt_n: usize,
    /// `iterations / ceil(sqrt n)`.
    pub ratio: f64,
    pub wall_ms: f64,
}

pub fn bench_one(inst: &Instance) -> Result<BenchRow, HarnessError> {
    let net = inst.build().map_err(|e| HarnessError::InvalidSpec {
        spec: inst.label.clone(),
        reason: e.to_string(),
    })?;
    let limits = RunLimits {
        validate_each_pass: false,
        ..RunLimits::for_network(&net)
    };
    let start = Instant::now();
    let (_, report): (_, RunReport) = run(&net, limits).map_err(|e| HarnessError::InvalidSpec {
        spec: inst.label.clone(),
        reason: e.to_string(),
    })?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let sqrt_n = sqrt_iteration_bound(inst.vertex_count) / 4;
    Ok(BenchRow {
        instance: inst.label.clone(),
        n: inst.vertex_count,
        m: inst.arc_count(),
        flow_value: report.flow_value,
        iterations: report.iterations,
        total_augments: report.total_augments,
        total_arc_touches: report.total_arc_touches,
        sqrt_n,
        ratio: report.iterations as f64 / sqrt_n as f64,
        wall_ms,
    })
}

pub const BENCH_CSV_HEADER: &str =
    "instance,n,m,flow_value,iterations,total_augments,total_arc_touches,sqrt_n,ratio,wall_ms";

pub fn bench_csv_row(row: &BenchRow) -> String {
    format!(
        "\"{}\",{},{},{},{},{},{},{},{:.4},{:.3}",
        row.instance,
        row.n,
        row.m,
        row.flow_value,
        row.iterations,
        row.total_augments,
        row.total_arc_touches,
        row.sqrt_n,
        row.ratio,
        row.wall_ms
    )
}
