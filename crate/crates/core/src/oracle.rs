//! Independent max-flow and min-cut computations used to check the engine.
//!
//! Nothing here calls into [`crate::engine`]; the oracles only share the
//! [`Network`] representation.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{companion, Capacity, FlowState, Network, VertexId};

/// Largest network [`min_cut_brute_force`] will enumerate.
pub const BRUTE_FORCE_MAX_VERTICES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("brute-force enumeration needs at most {BRUTE_FORCE_MAX_VERTICES} vertices, got {0}")]
    TooLarge(usize),
    #[error("the source can still reach the sink in the residual network")]
    SourceReachedSink,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    pub value: Capacity,
    /// Source side of a minimum cut.
    pub cut: Option<Vec<VertexId>>,
    /// Flow on each input arc.
    pub flow: Option<Vec<Capacity>>,
}

/// Capacity of the input arcs leaving `source_side`.
pub fn cut_capacity(net: &Network, source_side: &[bool]) -> Capacity {
    net.input_arcs()
        .filter(|&(u, v, _)| source_side[u] && !source_side[v])
        .map(|(_, _, c)| c)
        .sum()
}

fn members(mask: &[bool]) -> Vec<VertexId> {
    mask.iter()
        .enumerate()
        .filter_map(|(v, &inside)| inside.then_some(v))
        .collect()
}

/// Exact maximum flow by shortest augmenting paths.
pub fn max_flow_reference(net: &Network) -> OracleResult {
    let n = net.vertex_count();
    let (s, t) = (net.source(), net.sink());
    let mut residual: Vec<Capacity> = net.arcs().iter().map(|a| a.capacity).collect();
    let mut value: Capacity = 0;
    let mut pred = vec![usize::MAX; n];

    loop {
        pred.iter_mut().for_each(|p| *p = usize::MAX);
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        'bfs: while let Some(u) = queue.pop_front() {
            for &a in net.outgoing(u) {
                let v = net.arc(a).head;
                if !seen[v] && residual[a] > 0 {
                    seen[v] = true;
                    pred[v] = a;
                    if v == t {
                        break 'bfs;
                    }
                    queue.push_back(v);
                }
            }
        }
        if !seen[t] {
            let flow = (0..net.input_arc_count())
                .map(|i| net.arc(2 * i).capacity - residual[2 * i])
                .collect();
            return OracleResult {
                value,
                cut: Some(members(&seen)),
                flow: Some(flow),
            };
        }

        let mut bottleneck = Capacity::MAX;
        let mut v = t;
        while v != s {
            let a = pred[v];
            bottleneck = bottleneck.min(residual[a]);
            v = net.arc(a).tail;
        }
        let mut v = t;
        while v != s {
            let a = pred[v];
            residual[a] -= bottleneck;
            residual[companion(a)] += bottleneck;
            v = net.arc(a).tail;
        }
        value += bottleneck;
    }
}

/// Minimum s-t cut by enumerating every vertex subset containing the source
/// and not the sink.
pub fn min_cut_brute_force(net: &Network) -> Result<OracleResult, OracleError> {
    let n = net.vertex_count();
    if n > BRUTE_FORCE_MAX_VERTICES {
        return Err(OracleError::TooLarge(n));
    }
    let (s, t) = (net.source(), net.sink());
    let mut best: Option<(Capacity, u32)> = None;
    for mask in 0u32..(1 << n) {
        if mask & (1 << s) == 0 || mask & (1 << t) != 0 {
            continue;
        }
        let value: Capacity = net
            .input_arcs()
            .filter(|&(u, v, _)| mask & (1 << u) != 0 && mask & (1 << v) == 0)
            .map(|(_, _, c)| c)
            .sum();
        if best.is_none_or(|(b, _)| value < b) {
            best = Some((value, mask));
        }
    }
    let (value, mask) = best.expect("at least the subset {s} qualifies");
    Ok(OracleResult {
        value,
        cut: Some((0..n).filter(|&v| mask & (1 << v) != 0).collect()),
        flow: None,
    })
}

/// Extracts the cut left by a converged run: the source side is every
/// vertex the reverse residual search from the sink cannot reach.
///
/// The returned capacity equals the flow value exactly when the run found a
/// maximum flow.
pub fn certify_cut(net: &Network, state: &FlowState) -> Result<OracleResult, OracleError> {
    let n = net.vertex_count();
    let (s, t) = (net.source(), net.sink());
    let mut reached = vec![false; n];
    reached[t] = true;
    let mut queue = VecDeque::from([t]);
    while let Some(v) = queue.pop_front() {
        for &b in net.outgoing(v) {
            let a = companion(b);
            let u = net.arc(a).tail;
            if !reached[u] && state.residual(a) > 0 {
                reached[u] = true;
                queue.push_back(u);
            }
        }
    }
    if reached[s] {
        return Err(OracleError::SourceReachedSink);
    }
    let source_side: Vec<bool> = reached.iter().map(|r| !r).collect();
    Ok(OracleResult {
        value: cut_capacity(net, &source_side),
        cut: Some(members(&source_side)),
        flow: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_iteration() -> Network {
        Network::build(4, &[(0, 1, 2), (1, 3, 1), (1, 2, 1), (2, 3, 1)], 0, 3).unwrap()
    }

    #[test]
    fn single_arc() {
        let net = Network::build(2, &[(0, 1, 5)], 0, 1).unwrap();
        assert_eq!(max_flow_reference(&net).value, 5);
        let bf = min_cut_brute_force(&net).unwrap();
        assert_eq!(bf.value, 5);
        assert_eq!(bf.cut, Some(vec![0]));
    }

    #[test]
    fn parallel_arcs() {
        let net = Network::build(2, &[(0, 1, 3), (0, 1, 4)], 0, 1).unwrap();
        assert_eq!(min_cut_brute_force(&net).unwrap().value, 7);
        assert_eq!(max_flow_reference(&net).value, 7);
    }

    #[test]
    fn two_iteration_family() {
        let net = two_iteration();
        assert_eq!(min_cut_brute_force(&net).unwrap().value, 2);
        let r = max_flow_reference(&net);
        assert_eq!(r.value, 2);
        assert_eq!(r.flow, Some(vec![2, 1, 1, 1]));
    }

    #[test]
    fn disconnected() {
        let net = Network::build(4, &[(0, 1, 3), (2, 3, 3)], 0, 3).unwrap();
        let r = max_flow_reference(&net);
        assert_eq!(r.value, 0);
        assert_eq!(r.cut, Some(vec![0, 1]));
        assert_eq!(min_cut_brute_force(&net).unwrap().value, 0);
    }

    #[test]
    fn brute_force_rejects_large() {
        let arcs: Vec<_> = (0..16).map(|i| (i, i + 1, 1)).collect();
        let net = Network::build(17, &arcs, 0, 16).unwrap();
        assert_eq!(min_cut_brute_force(&net), Err(OracleError::TooLarge(17)));
    }

    #[test]
    fn certify_requires_convergence() {
        let net = Network::build(2, &[(0, 1, 5)], 0, 1).unwrap();
        let mut st = FlowState::new(&net);
        assert_eq!(certify_cut(&net, &st), Err(OracleError::SourceReachedSink));
        st.augment(&net, 0, 5).unwrap();
        let cut = certify_cut(&net, &st).unwrap();
        assert_eq!(cut.value, 5);
        assert_eq!(cut.cut, Some(vec![0]));
    }

    #[test]
    fn certify_is_an_upper_bound_on_partial_flows() {
        // A flow that is stuck but not maximal still yields a valid cut
        // whenever s is cut off; its capacity can only exceed the flow.
        let net = Network::build(3, &[(0, 1, 3), (1, 2, 1)], 0, 2).unwrap();
        let mut st = FlowState::new(&net);
        st.augment(&net, 0, 3).unwrap();
        let cut = certify_cut(&net, &st).unwrap();
        assert_eq!(cut.value, 3);
        assert!(cut.value >= max_flow_reference(&net).value);
    }
}
