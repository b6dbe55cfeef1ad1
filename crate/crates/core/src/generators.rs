//! Problem instances: the worst-case families and seeded random networks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Capacity, Network, NetworkError, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub vertex_count: usize,
    pub arcs: Vec<(VertexId, VertexId, Capacity)>,
    pub source: VertexId,
    pub sink: VertexId,
    pub label: String,
}

impl Instance {
    pub fn build(&self) -> Result<Network, NetworkError> {
        Network::build(self.vertex_count, &self.arcs, self.source, self.sink)
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("capacity profile must have {expected} entries, got {got}")]
    InvalidProfileLength { expected: usize, got: usize },
    #[error("capacity profile must be positive and strictly decreasing toward the sink: {0:?}")]
    InvalidProfile(Vec<Capacity>),
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Path `s = v0 -> v1 -> ... -> vk = t` with uniform capacity.
pub fn gen_line(k: usize, cap: Capacity) -> Result<Instance, GeneratorError> {
    if k == 0 {
        return Err(GeneratorError::InvalidParameter("line length must be at least 1"));
    }
    Ok(Instance {
        vertex_count: k + 1,
        arcs: (0..k).map(|i| (i, i + 1, cap)).collect(),
        source: 0,
        sink: k,
        label: format!("line(k={k},cap={cap})"),
    })
}

/// Smallest network that needs two rounds: `s=0, u=1, v=2, t=3` with
/// `s->u: 2, u->t: 1, u->v: 1, v->t: 1`.
///
/// In the first round `v` is as close to the sink as `u` but dequeued after
/// it, so `u->v` stays out of the core and one unit is stranded at `u`.
pub fn gen_two_iteration() -> Instance {
    Instance {
        vertex_count: 4,
        arcs: vec![(0, 1, 2), (1, 3, 1), (1, 2, 1), (2, 3, 1)],
        source: 0,
        sink: 3,
        label: "two-iteration".to_string(),
    }
}

/// Layered network `s -> layer 1 -> ... -> layer L -> t`, `width` vertices
/// per layer.
///
/// `profile[0]` is the capacity of every `s -> layer 1` arc, `profile[i]`
/// the capacity of every arc from layer `i` to layer `i + 1` (complete
/// bipartite between consecutive layers), and `profile[L]` the capacity of
/// every `layer L -> t` arc. Every vertex of layers `1..L` also gets a unit
/// exit arc to `t`, created before its forward arcs so that all layers sit
/// at distance one and are dequeued in layer order. Flow then advances one
/// layer per round.
///
/// Vertex ids: `s = 0`, layer `i` (1-based) vertex `j` is
/// `1 + (i - 1) * width + j`, `t = 1 + layers * width`.
pub fn gen_layered_blocking(
    layers: usize,
    width: usize,
    profile: &[Capacity],
) -> Result<Instance, GeneratorError> {
    if layers == 0 {
        return Err(GeneratorError::InvalidParameter("need at least one layer"));
    }
    if width == 0 {
        return Err(GeneratorError::InvalidParameter("width must be at least 1"));
    }
    if profile.len() != layers + 1 {
        return Err(GeneratorError::InvalidProfileLength {
            expected: layers + 1,
            got: profile.len(),
        });
    }
    if profile.contains(&0) || profile.windows(2).any(|w| w[0] <= w[1]) {
        return Err(GeneratorError::InvalidProfile(profile.to_vec()));
    }

    let s = 0;
    let t = 1 + layers * width;
    let vertex = |layer: usize, j: usize| 1 + (layer - 1) * width + j;
    let mut arcs = Vec::new();
    for j in 0..width {
        arcs.push((s, vertex(1, j), profile[0]));
    }
    for layer in 1..=layers {
        for j in 0..width {
            let v = vertex(layer, j);
            if layer == layers {
                arcs.push((v, t, profile[layers]));
            } else {
                arcs.push((v, t, 1));
                for k in 0..width {
                    arcs.push((v, vertex(layer + 1, k), profile[layer]));
                }
            }
        }
    }
    let profile_text: Vec<String> = profile.iter().map(|c| c.to_string()).collect();
    Ok(Instance {
        vertex_count: t + 1,
        arcs,
        source: s,
        sink: t,
        label: format!(
            "layered(L={layers},W={width},profile={})",
            profile_text.join("-")
        ),
    })
}

/// The default profile for [`gen_layered_blocking`]: `L + 1, L, ..., 1`.
pub fn descending_profile(layers: usize) -> Vec<Capacity> {
    (1..=layers as Capacity + 1).rev().collect()
}

/// Seeded random network with `s = 0` and `t = n - 1`.
///
/// Generator: ChaCha8 seeded from `seed` via `seed_from_u64`; each arc draws
/// its tail, then its head (re-drawn until different from the tail), then its
/// capacity, all with `gen_range`. Arc 0 is forced to leave `s` and arc 1 to
/// enter `t`; with `m = 1` the single arc is `s -> t`.
pub fn gen_random(
    n: usize,
    m: usize,
    max_cap: Capacity,
    seed: u64,
) -> Result<Instance, GeneratorError> {
    if n < 2 {
        return Err(GeneratorError::InvalidParameter("need at least 2 vertices"));
    }
    if m == 0 {
        return Err(GeneratorError::InvalidParameter("need at least 1 arc"));
    }
    if max_cap == 0 {
        return Err(GeneratorError::InvalidParameter("max_cap must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (s, t) = (0, n - 1);
    let other_than = |rng: &mut ChaCha8Rng, x: VertexId| loop {
        let v = rng.gen_range(0..n);
        if v != x {
            break v;
        }
    };

    let mut arcs = Vec::with_capacity(m);
    for i in 0..m {
        let (tail, head) = match (i, m) {
            (0, 1) => (s, t),
            (0, _) => (s, other_than(&mut rng, s)),
            (1, _) => (other_than(&mut rng, t), t),
            _ => {
                let tail = rng.gen_range(0..n);
                (tail, other_than(&mut rng, tail))
            }
        };
        let cap = rng.gen_range(1..=max_cap);
        arcs.push((tail, head, cap));
    }
    Ok(Instance {
        vertex_count: n,
        arcs,
        source: s,
        sink: t,
        label: format!("random(n={n},m={m},max_cap={max_cap},seed={seed})"),
    })
}

/// Instance `index` of a seeded sweep: `n` uniform in `[2, max_n]`, `m`
/// uniform in `[1, max_m]`, then [`gen_random`] with seed `seed`.
pub fn gen_sweep_instance(
    seed: u64,
    max_n: usize,
    max_m: usize,
    max_cap: Capacity,
) -> Result<Instance, GeneratorError> {
    if max_n < 2 || max_m == 0 {
        return Err(GeneratorError::InvalidParameter("sweep bounds too small"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed_5eed_5eed);
    let n = rng.gen_range(2..=max_n);
    let m = rng.gen_range(1..=max_m);
    gen_random(n, m, max_cap, seed)
}
