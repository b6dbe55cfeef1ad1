//! The sorting-flow engine: alternate a reverse breadth-first arc sort with
//! a global push until no excess vertex can reach the sink.
//!
//! Each round has two linear passes:
//!
//! 1. [`bfss`] runs a BFS from the sink over ingoing residual arcs. Every
//!    vertex `u` records, in order, the residual arcs `(u, v)` to vertices
//!    dequeued before it. The union of these lists is acyclic. Excess
//!    vertices (and the source) are collected in dequeue order.
//! 2. [`push`] drains that worklist front to back, augmenting only along the
//!    recorded arcs. A vertex whose excess turns positive is put at the front
//!    so that it is discharged next.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{validate_preflow, ArcId, Capacity, FlowError, FlowState, Network, VertexId};

/// Distance of a vertex the reverse BFS did not reach.
pub const UNREACHED: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("push performed more than {bound} augments in one pass")]
    NonTerminatingPush { bound: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexState {
    NotFound = 0,
    Found = 1,
    Used = 2,
}

/// Output of one [`bfss`] pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOrder {
    /// `order[v]`: residual arcs out of `v` in the order they were recorded.
    pub order: Vec<Vec<ArcId>>,
    pub dist: Vec<usize>,
    pub state: Vec<VertexState>,
    /// Vertices to discharge, initially in BFS dequeue order.
    pub priority: VecDeque<VertexId>,
    /// Position of each vertex in BFS dequeue order, [`UNREACHED`] if never dequeued.
    pub dequeue_rank: Vec<usize>,
    /// Total arc inspections made by the pass.
    pub arc_touches: u64,
    /// Largest number of inspections any single arc received.
    pub max_touches_per_arc: u32,
}

impl SearchOrder {
    /// Number of arcs in the core.
    pub fn core_size(&self) -> usize {
        self.order.iter().map(Vec::len).sum()
    }

    /// Checks that every recorded arc leaves its owner, had positive residual
    /// in `state` and points to a vertex dequeued strictly earlier. Since
    /// ranks strictly decrease along each arc, this implies acyclicity.
    pub fn core_is_ordered(&self, net: &Network, state: &FlowState) -> bool {
        self.order.iter().enumerate().all(|(v, arcs)| {
            arcs.iter().all(|&a| {
                let arc = net.arc(a);
                arc.tail == v
                    && state.residual(a) > 0
                    && self.dequeue_rank[v] != UNREACHED
                    && self.dequeue_rank[arc.head] < self.dequeue_rank[v]
            })
        })
    }
}

/// Reverse BFS from the sink that sorts residual arcs by distance.
///
/// Returns the search order and whether any collected vertex can still
/// push: a non-source vertex with positive excess, or the source with at
/// least one recorded arc.
pub fn bfss(net: &Network, state: &FlowState) -> (SearchOrder, bool) {
    let n = net.vertex_count();
    let (s, t) = (net.source(), net.sink());
    let mut order = vec![Vec::new(); n];
    let mut dist = vec![UNREACHED; n];
    let mut vstate = vec![VertexState::NotFound; n];
    let mut dequeue_rank = vec![UNREACHED; n];
    let mut touches = vec![0u32; net.arc_count()];
    let mut priority = VecDeque::new();
    let mut queue = VecDeque::new();

    dist[t] = 0;
    vstate[t] = VertexState::Found;
    queue.push_back(t);
    let mut rank = 0;
    while let Some(v) = queue.pop_front() {
        dequeue_rank[v] = rank;
        rank += 1;
        vstate[v] = VertexState::Used;
        if v != t && (v == s || state.finite_excess(v) > 0) {
            priority.push_back(v);
        }
        for a in net.incoming(v) {
            touches[a] += 1;
            if state.residual(a) == 0 {
                continue;
            }
            let u = net.arc(a).tail;
            if vstate[u] == VertexState::Used {
                continue;
            }
            order[u].push(a);
            touches[a] += 1;
            if vstate[u] == VertexState::NotFound {
                vstate[u] = VertexState::Found;
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }

    let can_push = priority.iter().any(|&v| {
        if v == s {
            !order[s].is_empty()
        } else {
            state.finite_excess(v) > 0
        }
    });
    let search = SearchOrder {
        order,
        dist,
        state: vstate,
        priority,
        dequeue_rank,
        arc_touches: touches.iter().map(|&c| c as u64).sum(),
        max_touches_per_arc: touches.into_iter().max().unwrap_or(0),
    };
    (search, can_push)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PushStats {
    pub augments: u64,
    pub saturating_augments: u64,
    /// Vertices put at the front of the worklist on a zero-to-positive
    /// excess transition.
    pub reactivations: u64,
    /// Augments that left a non-source vertex with zero excess.
    pub discharges: u64,
    pub sink_gain_delta: Capacity,
}

/// Hard cap on augments in one push pass: `2 (m + n) n`.
pub fn push_bound(net: &Network) -> u64 {
    let n = net.vertex_count() as u64;
    let m = net.input_arc_count() as u64;
    2 * (m + n) * n
}

/// Discharges the worklist of `order` along its recorded arcs.
///
/// Each vertex keeps a cursor into its arc list; an arc is passed over once
/// it is saturated, and a reactivated vertex resumes from its cursor.
pub fn push(
    net: &Network,
    state: &mut FlowState,
    order: &mut SearchOrder,
) -> Result<PushStats, EngineError> {
    let (s, t) = (net.source(), net.sink());
    let bound = push_bound(net);
    let mut cursor = vec![0usize; net.vertex_count()];
    let mut stats = PushStats::default();

    while let Some(v) = order.priority.pop_front() {
        let arcs = &order.order[v];
        while cursor[v] < arcs.len() {
            let excess = state.finite_excess(v);
            if v != s && excess == 0 {
                break;
            }
            let a = arcs[cursor[v]];
            let residual = state.residual(a);
            if residual == 0 {
                cursor[v] += 1;
                continue;
            }
            let delta = if v == s { residual } else { excess.min(residual) };
            let w = net.arc(a).head;
            if w != s && w != t && state.finite_excess(w) == 0 {
                order.priority.push_front(w);
                stats.reactivations += 1;
            }
            state.augment(net, a, delta)?;

            stats.augments += 1;
            if stats.augments > bound {
                return Err(EngineError::NonTerminatingPush { bound });
            }
            if delta == residual {
                stats.saturating_augments += 1;
                cursor[v] += 1;
            }
            if v != s && delta == excess {
                stats.discharges += 1;
            }
            if w == t {
                stats.sink_gain_delta += delta;
            }
        }
    }
    Ok(stats)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLimits {
    pub max_iterations: usize,
    /// Run [`validate_preflow`] after every push pass.
    pub validate_each_pass: bool,
}

impl RunLimits {
    /// `10 n` iterations with per-pass validation.
    pub fn for_network(net: &Network) -> Self {
        RunLimits {
            max_iterations: 10 * net.vertex_count(),
            validate_each_pass: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    IterationCap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub push: PushStats,
    pub bfss_arc_touches: u64,
    pub max_touches_per_arc: u32,
    pub core_size: usize,
    pub core_acyclic: bool,
    /// `None` when per-pass validation is disabled.
    pub preflow_valid: Option<bool>,
}

/// Outcomes of the falsifiable claims about the algorithm, evaluated on one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimVerdicts {
    /// Every round delivered at least one unit to the sink.
    pub sink_gain_monotone: bool,
    /// Every round saturated an arc or emptied a vertex.
    pub saturate_or_discharge: bool,
    /// Every push pass made at most `2 (m + n)` augments.
    pub augments_bounded: bool,
    /// At most `4 ceil(sqrt n)` rounds.
    pub iterations_sqrt_bound: bool,
    /// Filled in by the harness when a reference value is available.
    pub matches_oracle: Option<bool>,
}

/// Invariants that must hold for any correct preflow engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardChecks {
    pub core_acyclic_each_iteration: bool,
    /// `true` when validation was skipped.
    pub preflow_valid_each_pass: bool,
    pub final_preflow_valid: bool,
    /// No arc inspected more than twice in any BFSS pass.
    pub arc_touches_bounded: bool,
}

impl HardChecks {
    pub fn all(&self) -> bool {
        self.core_acyclic_each_iteration
            && self.preflow_valid_each_pass
            && self.final_preflow_valid
            && self.arc_touches_bounded
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub flow_value: Capacity,
    pub iterations: usize,
    pub total_augments: u64,
    pub total_arc_touches: u64,
    pub per_iteration: Vec<IterationRecord>,
    pub terminated_by: Termination,
    pub claims: ClaimVerdicts,
    pub hard: HardChecks,
}

pub fn initialize(net: &Network) -> FlowState {
    FlowState::new(net)
}

/// Rounds allowed by the square-root claim: `4 ceil(sqrt n)`.
pub fn sqrt_iteration_bound(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r < n {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= n {
        r -= 1;
    }
    4 * r
}

/// Alternates [`bfss`] and [`push`] until no excess can reach the sink or
/// `limits.max_iterations` rounds have been pushed.
///
/// The cap is checked after a BFSS pass, so a run whose preflow is already
/// maximal reports [`Termination::Converged`] even with a cap of zero.
pub fn run(net: &Network, limits: RunLimits) -> Result<(FlowState, RunReport), EngineError> {
    let mut state = initialize(net);
    let mut per_iteration = Vec::new();
    let mut total_arc_touches = 0;

    let terminated_by = loop {
        let (mut order, can_push) = bfss(net, &state);
        total_arc_touches += order.arc_touches;
        if !can_push {
            break Termination::Converged;
        }
        if per_iteration.len() >= limits.max_iterations {
            break Termination::IterationCap;
        }
        let core_acyclic = order.core_is_ordered(net, &state);
        let core_size = order.core_size();
        let push_stats = push(net, &mut state, &mut order)?;
        let preflow_valid = limits
            .validate_each_pass
            .then(|| validate_preflow(net, &state).is_empty());
        per_iteration.push(IterationRecord {
            push: push_stats,
            bfss_arc_touches: order.arc_touches,
            max_touches_per_arc: order.max_touches_per_arc,
            core_size,
            core_acyclic,
            preflow_valid,
        });
    };

    let m = net.input_arc_count() as u64;
    let n = net.vertex_count();
    let per_pass_bound = 2 * (m + n as u64);
    let claims = ClaimVerdicts {
        sink_gain_monotone: per_iteration.iter().all(|it| it.push.sink_gain_delta >= 1),
        saturate_or_discharge: per_iteration
            .iter()
            .all(|it| it.push.saturating_augments >= 1 || it.push.discharges >= 1),
        augments_bounded: per_iteration.iter().all(|it| it.push.augments <= per_pass_bound),
        iterations_sqrt_bound: per_iteration.len() <= sqrt_iteration_bound(n),
        matches_oracle: None,
    };
    let hard = HardChecks {
        core_acyclic_each_iteration: per_iteration.iter().all(|it| it.core_acyclic),
        preflow_valid_each_pass: per_iteration.iter().all(|it| it.preflow_valid != Some(false)),
        final_preflow_valid: validate_preflow(net, &state).is_empty(),
        arc_touches_bounded: per_iteration.iter().all(|it| it.max_touches_per_arc <= 2),
    };
    let report = RunReport {
        flow_value: state.flow_value(),
        iterations: per_iteration.len(),
        total_augments: per_iteration.iter().map(|it| it.push.augments).sum(),
        total_arc_touches,
        per_iteration,
        terminated_by,
        claims,
        hard,
    };
    Ok((state, report))
}
