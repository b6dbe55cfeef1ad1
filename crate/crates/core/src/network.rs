//! Flow networks with paired arcs and preflow bookkeeping.
//!
//! Every input arc `a` is stored at an even id and immediately followed by
//! its zero-capacity reverse companion at `a ^ 1`. A [`FlowState`] keeps only
//! residual capacities and vertex excesses; the flow on an input arc is
//! recovered as `capacity - residual`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = usize;
pub type ArcId = usize;
pub type Capacity = u64;

/// Largest total capacity a network may carry. Kept within `i64` so that
/// signed recomputation of excesses during validation cannot overflow.
pub const MAX_TOTAL_CAPACITY: Capacity = i64::MAX as Capacity;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("vertex {vertex} is out of range for a network with {n} vertices")]
    InvalidVertex { vertex: VertexId, n: usize },
    #[error("source and sink are both vertex {0}")]
    SourceEqualsSink(VertexId),
    #[error("arc {index} is a self-loop on vertex {vertex}")]
    SelfLoop { index: usize, vertex: VertexId },
    #[error("total capacity exceeds {MAX_TOTAL_CAPACITY}")]
    CapacityOverflow,
    #[error("a network needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("augment of {delta} on arc {arc} exceeds residual capacity {residual}")]
    ResidualExceeded {
        arc: ArcId,
        delta: Capacity,
        residual: Capacity,
    },
    #[error("augment on arc {0} with a zero amount")]
    ZeroDelta(ArcId),
    #[error("augment of {delta} on arc {arc} exceeds the excess {excess} of its tail")]
    ExcessExceeded {
        arc: ArcId,
        delta: Capacity,
        excess: Capacity,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arc {
    pub tail: VertexId,
    pub head: VertexId,
    pub capacity: Capacity,
    pub is_reverse: bool,
}

/// Immutable directed network. Safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    n: usize,
    arcs: Vec<Arc>,
    adjacency: Vec<Vec<ArcId>>,
    source: VertexId,
    sink: VertexId,
}

#[inline]
pub fn companion(a: ArcId) -> ArcId {
    a ^ 1
}

impl Network {
    /// Builds a network from `(tail, head, capacity)` triples.
    ///
    /// Zero-capacity and parallel arcs are accepted; self-loops are not.
    pub fn build(
        n: usize,
        arc_list: &[(VertexId, VertexId, Capacity)],
        source: VertexId,
        sink: VertexId,
    ) -> Result<Self, NetworkError> {
        if n < 2 {
            return Err(NetworkError::TooFewVertices(n));
        }
        for v in [source, sink] {
            if v >= n {
                return Err(NetworkError::InvalidVertex { vertex: v, n });
            }
        }
        if source == sink {
            return Err(NetworkError::SourceEqualsSink(source));
        }

        let mut total: Capacity = 0;
        let mut arcs = Vec::with_capacity(2 * arc_list.len());
        let mut adjacency = vec![Vec::new(); n];
        for (index, &(tail, head, capacity)) in arc_list.iter().enumerate() {
            for v in [tail, head] {
                if v >= n {
                    return Err(NetworkError::InvalidVertex { vertex: v, n });
                }
            }
            if tail == head {
                return Err(NetworkError::SelfLoop {
                    index,
                    vertex: tail,
                });
            }
            total = total
                .checked_add(capacity)
                .filter(|&t| t <= MAX_TOTAL_CAPACITY)
                .ok_or(NetworkError::CapacityOverflow)?;

            let id = arcs.len();
            arcs.push(Arc {
                tail,
                head,
                capacity,
                is_reverse: false,
            });
            arcs.push(Arc {
                tail: head,
                head: tail,
                capacity: 0,
                is_reverse: true,
            });
            adjacency[tail].push(id);
            adjacency[head].push(id + 1);
        }

        Ok(Network {
            n,
            arcs,
            adjacency,
            source,
            sink,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Number of stored arcs, companions included.
    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    /// Number of arcs given at build time.
    pub fn input_arc_count(&self) -> usize {
        self.arcs.len() / 2
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn sink(&self) -> VertexId {
        self.sink
    }

    pub fn arc(&self, a: ArcId) -> &Arc {
        &self.arcs[a]
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Outgoing arc ids of `v` in creation order, companions included.
    pub fn outgoing(&self, v: VertexId) -> &[ArcId] {
        &self.adjacency[v]
    }

    /// Incoming arcs of `v`, derived from its outgoing companions, in
    /// adjacency order.
    pub fn incoming(&self, v: VertexId) -> impl Iterator<Item = ArcId> + '_ {
        self.adjacency[v].iter().map(|&a| companion(a))
    }

    /// Capacity of the pair `{a, a^R}`; conserved by every augment.
    pub fn pair_total(&self, a: ArcId) -> Capacity {
        self.arcs[a].capacity + self.arcs[companion(a)].capacity
    }

    /// Input arcs as `(tail, head, capacity)` in their original order.
    pub fn input_arcs(&self) -> impl Iterator<Item = (VertexId, VertexId, Capacity)> + '_ {
        self.arcs
            .iter()
            .step_by(2)
            .map(|a| (a.tail, a.head, a.capacity))
    }
}

/// Excess of a vertex. The source holds an unbounded supply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Excess {
    Finite(Capacity),
    Unbounded,
}

impl Excess {
    pub fn is_positive(self) -> bool {
        !matches!(self, Excess::Finite(0))
    }
}

impl fmt::Display for Excess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Excess::Finite(x) => write!(f, "{x}"),
            Excess::Unbounded => f.write_str("inf"),
        }
    }
}

/// Residual capacities and excesses of a preflow on one network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowState {
    source: VertexId,
    sink: VertexId,
    residual: Vec<Capacity>,
    // The source slot is unused; its excess is `Excess::Unbounded`.
    excess: Vec<Capacity>,
    sink_gain: Capacity,
}

impl FlowState {
    /// Zero flow: residuals equal capacities, every excess is zero.
    pub fn new(net: &Network) -> Self {
        FlowState {
            source: net.source,
            sink: net.sink,
            residual: net.arcs.iter().map(|a| a.capacity).collect(),
            excess: vec![0; net.n],
            sink_gain: 0,
        }
    }

    #[inline]
    pub fn residual(&self, a: ArcId) -> Capacity {
        self.residual[a]
    }

    pub fn residuals(&self) -> &[Capacity] {
        &self.residual
    }

    pub fn excess(&self, v: VertexId) -> Excess {
        if v == self.source {
            Excess::Unbounded
        } else {
            Excess::Finite(self.excess[v])
        }
    }

    /// Finite excess of `v`; zero for the source.
    #[inline]
    pub(crate) fn finite_excess(&self, v: VertexId) -> Capacity {
        if v == self.source {
            0
        } else {
            self.excess[v]
        }
    }

    /// Net flow delivered to the sink.
    pub fn flow_value(&self) -> Capacity {
        self.sink_gain
    }

    /// Moves `delta` units along arc `a`.
    ///
    /// The tail must hold at least `delta` excess unless it is the source.
    /// Flow entering the source is absorbed.
    pub fn augment(&mut self, net: &Network, a: ArcId, delta: Capacity) -> Result<(), FlowError> {
        if delta == 0 {
            return Err(FlowError::ZeroDelta(a));
        }
        let residual = self.residual[a];
        if delta > residual {
            return Err(FlowError::ResidualExceeded {
                arc: a,
                delta,
                residual,
            });
        }
        let Arc { tail, head, .. } = net.arcs[a];
        if tail != self.source {
            let excess = self.excess[tail];
            if delta > excess {
                return Err(FlowError::ExcessExceeded {
                    arc: a,
                    delta,
                    excess,
                });
            }
            self.excess[tail] = excess - delta;
            if tail == self.sink {
                self.sink_gain -= delta;
            }
        }
        self.residual[a] = residual - delta;
        self.residual[companion(a)] += delta;
        if head != self.source {
            self.excess[head] += delta;
            if head == self.sink {
                self.sink_gain += delta;
            }
        }
        Ok(())
    }

    /// Overwrites a residual without any bookkeeping. Test hook for
    /// constructing corrupted states.
    #[doc(hidden)]
    pub fn set_residual_unchecked(&mut self, a: ArcId, value: Capacity) {
        self.residual[a] = value;
    }

    #[doc(hidden)]
    pub fn set_excess_unchecked(&mut self, v: VertexId, value: Capacity) {
        self.excess[v] = value;
        if v == self.sink {
            self.sink_gain = value;
        }
    }
}

/// Net flow on the pair rooted at input arc `a`, before anti-parallel
/// cancellation.
fn pair_flow(net: &Network, state: &FlowState, a: ArcId) -> i128 {
    net.arcs[a].capacity as i128 - state.residual[a] as i128
}

/// Flow on each input arc recovered from residuals, indexed by input order.
///
/// When anti-parallel input arcs both carry flow, the smaller direction is
/// cancelled against the larger one so that at most one direction between
/// any two vertices carries flow.
pub fn recovered_flow(net: &Network, state: &FlowState) -> Vec<Capacity> {
    let mut flow: Vec<Capacity> = (0..net.input_arc_count())
        .map(|i| pair_flow(net, state, 2 * i).clamp(0, Capacity::MAX as i128) as Capacity)
        .collect();

    let mut groups: HashMap<(VertexId, VertexId), Vec<usize>> = HashMap::new();
    for (i, (tail, head, _)) in net.input_arcs().enumerate() {
        groups.entry((tail.min(head), tail.max(head))).or_default().push(i);
    }
    for ((lo, _), members) in groups {
        let (fwd, bwd): (Vec<usize>, Vec<usize>) =
            members.into_iter().partition(|&i| net.arcs[2 * i].tail == lo);
        let fwd_total: Capacity = fwd.iter().map(|&i| flow[i]).sum();
        let bwd_total: Capacity = bwd.iter().map(|&i| flow[i]).sum();
        let cancel = fwd_total.min(bwd_total);
        for side in [&fwd, &bwd] {
            let mut left = cancel;
            for &i in side {
                let take = left.min(flow[i]);
                flow[i] -= take;
                left -= take;
            }
        }
    }
    flow
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    PairConservation {
        arc: ArcId,
        residual_sum: Capacity,
        pair_total: Capacity,
    },
    ResidualOutOfRange {
        arc: ArcId,
        residual: Capacity,
        bound: Capacity,
    },
    NegativeExcess {
        vertex: VertexId,
        recomputed: i128,
    },
    ExcessMismatch {
        vertex: VertexId,
        stored: Capacity,
        recomputed: i128,
    },
    SinkGainMismatch {
        stored: Capacity,
        recomputed: i128,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PairConservation {
                arc,
                residual_sum,
                pair_total,
            } => write!(
                f,
                "arc {arc}: residual(a) + residual(a^R) = {residual_sum}, pair total is {pair_total}"
            ),
            Violation::ResidualOutOfRange {
                arc,
                residual,
                bound,
            } => write!(f, "arc {arc}: residual {residual} outside [0, {bound}]"),
            Violation::NegativeExcess { vertex, recomputed } => {
                write!(f, "vertex {vertex}: recomputed excess {recomputed} < 0")
            }
            Violation::ExcessMismatch {
                vertex,
                stored,
                recomputed,
            } => write!(
                f,
                "vertex {vertex}: stored excess {stored} != inflow - outflow {recomputed}"
            ),
            Violation::SinkGainMismatch { stored, recomputed } => write!(
                f,
                "sink gain {stored} != net inflow of sink {recomputed}"
            ),
        }
    }
}

/// Checks every preflow invariant of `state` by recomputation from residuals.
/// An empty result means the state is a valid preflow.
pub fn validate_preflow(net: &Network, state: &FlowState) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut residual_ok = true;
    for a in 0..net.arc_count() {
        let bound = net.pair_total(a);
        let residual = state.residual[a];
        if residual > bound {
            residual_ok = false;
            violations.push(Violation::ResidualOutOfRange {
                arc: a,
                residual,
                bound,
            });
        }
        if a % 2 == 0 {
            let residual_sum = residual + state.residual[companion(a)];
            if residual_sum != bound {
                residual_ok = false;
                violations.push(Violation::PairConservation {
                    arc: a,
                    residual_sum,
                    pair_total: bound,
                });
            }
        }
    }
    if !residual_ok {
        return violations;
    }

    let mut balance = vec![0i128; net.n];
    for a in (0..net.arc_count()).step_by(2) {
        let f = pair_flow(net, state, a);
        let Arc { tail, head, .. } = net.arcs[a];
        balance[tail] -= f;
        balance[head] += f;
    }
    for (v, &recomputed) in balance.iter().enumerate() {
        if v == net.source {
            continue;
        }
        if recomputed < 0 {
            violations.push(Violation::NegativeExcess { vertex: v, recomputed });
        } else if recomputed != state.excess[v] as i128 {
            violations.push(Violation::ExcessMismatch {
                vertex: v,
                stored: state.excess[v],
                recomputed,
            });
        }
    }
    let sink_net = balance[net.sink];
    if sink_net != state.sink_gain as i128 {
        violations.push(Violation::SinkGainMismatch {
            stored: state.sink_gain,
            recomputed: sink_net,
        });
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single() -> Network {
        Network::build(2, &[(0, 1, 5)], 0, 1).unwrap()
    }

    #[test]
    fn single_arc_pairing() {
        let net = single();
        assert_eq!(net.arc_count(), 2);
        assert_eq!(
            *net.arc(0),
            Arc {
                tail: 0,
                head: 1,
                capacity: 5,
                is_reverse: false
            }
        );
        assert_eq!(
            *net.arc(1),
            Arc {
                tail: 1,
                head: 0,
                capacity: 0,
                is_reverse: true
            }
        );
    }

    #[test]
    fn line_pairing() {
        let net = Network::build(3, &[(0, 1, 2), (1, 2, 2)], 0, 2).unwrap();
        assert_eq!(net.arc_count(), 4);
        assert_eq!(companion(0), 1);
        assert_eq!(companion(2), 3);
        assert_eq!(net.arc(2).tail, 1);
        assert_eq!(net.arc(3).tail, 2);
        assert_eq!(net.outgoing(1), &[1, 2]);
    }

    #[test]
    fn build_errors() {
        assert_eq!(
            Network::build(2, &[(0, 0, 1)], 0, 1),
            Err(NetworkError::SelfLoop { index: 0, vertex: 0 })
        );
        assert_eq!(
            Network::build(2, &[(0, 1, 1)], 1, 1),
            Err(NetworkError::SourceEqualsSink(1))
        );
        assert_eq!(
            Network::build(2, &[(0, 2, 1)], 0, 1),
            Err(NetworkError::InvalidVertex { vertex: 2, n: 2 })
        );
        assert_eq!(
            Network::build(3, &[(0, 1, MAX_TOTAL_CAPACITY), (1, 2, 1)], 0, 2),
            Err(NetworkError::CapacityOverflow)
        );
        assert_eq!(
            Network::build(1, &[], 0, 0),
            Err(NetworkError::TooFewVertices(1))
        );
    }

    #[test]
    fn degenerate_arcs_accepted() {
        let net = Network::build(3, &[(0, 1, 0), (0, 1, 3), (1, 0, 2), (1, 2, 1)], 0, 2).unwrap();
        assert_eq!(net.arc_count(), 8);
        assert_eq!(net.outgoing(0), &[0, 2, 5]);
    }

    #[test]
    fn residual_arithmetic() {
        let net = single();
        let mut st = FlowState::new(&net);
        assert_eq!(st.residual(0), 5);
        st.augment(&net, 0, 2).unwrap();
        assert_eq!((st.residual(0), st.residual(1)), (3, 2));

        let mut st = FlowState::new(&net);
        st.augment(&net, 0, 5).unwrap();
        st.augment(&net, 1, 1).unwrap();
        // u - f + f^R = 5 - 5 + 1
        assert_eq!(st.residual(0), 1);
        assert_eq!(st.flow_value(), 4);
    }

    #[test]
    fn augment_moves_excess() {
        let net = Network::build(3, &[(0, 1, 5), (1, 2, 5)], 0, 2).unwrap();
        let mut st = FlowState::new(&net);
        st.augment(&net, 0, 3).unwrap();
        assert_eq!(st.excess(0), Excess::Unbounded);
        assert_eq!(st.excess(1), Excess::Finite(3));
        st.augment(&net, 2, 3).unwrap();
        assert_eq!(st.residual(2), 2);
        assert_eq!(st.excess(1), Excess::Finite(0));
        assert_eq!(st.excess(2), Excess::Finite(3));
        assert_eq!(st.flow_value(), 3);
        assert!(validate_preflow(&net, &st).is_empty());
    }

    #[test]
    fn augment_rejects_bad_amounts() {
        let net = single();
        let mut st = FlowState::new(&net);
        assert_eq!(st.augment(&net, 0, 0), Err(FlowError::ZeroDelta(0)));
        assert_eq!(
            st.augment(&net, 0, 6),
            Err(FlowError::ResidualExceeded {
                arc: 0,
                delta: 6,
                residual: 5
            })
        );
        assert_eq!(st, FlowState::new(&net));
    }

    #[test]
    fn sink_bookkeeping() {
        let net = Network::build(2, &[(0, 1, 9)], 0, 1).unwrap();
        let mut st = FlowState::new(&net);
        assert_eq!(st.excess(1), Excess::Finite(0));
        assert_eq!(st.flow_value(), 0);
        st.augment(&net, 0, 4).unwrap();
        assert_eq!(st.excess(1), Excess::Finite(4));
        assert_eq!(st.flow_value(), 4);
    }

    #[test]
    fn corrupted_residual_is_reported() {
        let net = single();
        let mut st = FlowState::new(&net);
        assert!(validate_preflow(&net, &st).is_empty());
        st.set_residual_unchecked(0, 4);
        let report = validate_preflow(&net, &st);
        assert!(report.contains(&Violation::PairConservation {
            arc: 0,
            residual_sum: 4,
            pair_total: 5
        }));
    }

    #[test]
    fn corrupted_excess_is_reported() {
        let net = Network::build(3, &[(0, 1, 5), (1, 2, 5)], 0, 2).unwrap();
        let mut st = FlowState::new(&net);
        st.augment(&net, 0, 2).unwrap();
        st.set_excess_unchecked(1, 1);
        assert_eq!(
            validate_preflow(&net, &st),
            vec![Violation::ExcessMismatch {
                vertex: 1,
                stored: 1,
                recomputed: 2
            }]
        );
    }

    #[test]
    fn antiparallel_flows_cancel() {
        let net = Network::build(3, &[(0, 1, 5), (1, 0, 4), (1, 2, 5)], 0, 2).unwrap();
        let mut st = FlowState::new(&net);
        st.augment(&net, 0, 5).unwrap();
        // u pushes 3 back to s on its own input arc
        st.augment(&net, 2, 3).unwrap();
        assert_eq!(recovered_flow(&net, &st), vec![2, 0, 0]);
        assert!(validate_preflow(&net, &st).is_empty());
    }
}
