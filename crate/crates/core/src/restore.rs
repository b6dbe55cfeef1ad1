//! Turns a converged preflow into a flow by sending stranded excess back to
//! the source.

use std::collections::VecDeque;

use thiserror::Error;

use crate::network::{companion, ArcId, FlowError, FlowState, Network, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RestoreError {
    #[error("vertex {0} holds excess but no flow-carrying path leads back to the source")]
    RestorationFailed(VertexId),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Flow currently carried by arc `a`, i.e. how far `a` can be undone by
/// augmenting its companion.
fn carried(net: &Network, state: &FlowState, a: ArcId) -> u64 {
    net.arc(a).capacity.saturating_sub(state.residual(a))
}

/// Returns every non-terminal excess to the source along paths of
/// flow-carrying arcs, leaving the flow value unchanged.
pub fn restore_flow(net: &Network, state: &FlowState) -> Result<FlowState, RestoreError> {
    let (s, t) = (net.source(), net.sink());
    let n = net.vertex_count();
    let mut state = state.clone();
    let mut parent: Vec<Option<ArcId>> = vec![None; n];

    for x in 0..n {
        if x == s || x == t {
            continue;
        }
        while state.finite_excess(x) > 0 {
            // BFS from x walking flow-carrying arcs backwards. `parent[y]`
            // is the companion arc used to step from the x-side toward y.
            parent.iter_mut().for_each(|p| *p = None);
            let mut seen = vec![false; n];
            seen[x] = true;
            let mut queue = VecDeque::from([x]);
            while let Some(y) = queue.pop_front() {
                if y == s {
                    break;
                }
                for a in net.incoming(y) {
                    let z = net.arc(a).tail;
                    if seen[z] || z == t || carried(net, &state, a) == 0 {
                        continue;
                    }
                    seen[z] = true;
                    parent[z] = Some(companion(a));
                    queue.push_back(z);
                }
            }
            if !seen[s] {
                return Err(RestoreError::RestorationFailed(x));
            }

            let mut path = Vec::new();
            let mut y = s;
            while y != x {
                let back = parent[y].expect("BFS tree reaches x");
                path.push(back);
                y = net.arc(back).tail;
            }
            path.reverse();
            let delta = path
                .iter()
                .map(|&b| carried(net, &state, companion(b)))
                .fold(state.finite_excess(x), u64::min);
            for &b in &path {
                state.augment(net, b, delta)?;
            }
        }
    }
    Ok(state)
}
