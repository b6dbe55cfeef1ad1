use std::collections::VecDeque;

use proptest::prelude::*;

use sortflow::dimacs::{parse_dimacs, write_dimacs};
use sortflow::engine::{bfss, push, run, RunLimits, SearchOrder, UNREACHED};
use sortflow::generators::{descending_profile, gen_layered_blocking, gen_random, Instance};
use sortflow::network::{validate_preflow, Excess, FlowState, Network};
use sortflow::oracle::{certify_cut, max_flow_reference, min_cut_brute_force};

fn small_instance() -> impl Strategy<Value = Instance> {
    (2usize..=8, 1usize..=24, 1u64..=20, any::<u64>())
        .prop_map(|(n, m, cap, seed)| gen_random(n, m, cap, seed).unwrap())
}

fn medium_instance() -> impl Strategy<Value = Instance> {
    (2usize..=40, 1usize..=200, 1u64..=20, any::<u64>())
        .prop_map(|(n, m, cap, seed)| gen_random(n, m, cap, seed).unwrap())
}

/// Kahn's algorithm over the core arcs; independent of dequeue ranks.
fn core_is_dag(net: &Network, order: &SearchOrder) -> bool {
    let n = net.vertex_count();
    let mut indegree = vec![0usize; n];
    for arcs in &order.order {
        for &a in arcs {
            indegree[net.arc(a).head] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut removed = 0;
    while let Some(v) = queue.pop_front() {
        removed += 1;
        for &a in &order.order[v] {
            let w = net.arc(a).head;
            indegree[w] -= 1;
            if indegree[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    removed == n
}

fn check_search_order(net: &Network, state: &FlowState, order: &SearchOrder) -> Result<(), TestCaseError> {
    let (s, t) = (net.source(), net.sink());
    prop_assert!(order.order[t].is_empty());
    prop_assert!(core_is_dag(net, order));
    prop_assert!(order.max_touches_per_arc <= 2);
    for (v, arcs) in order.order.iter().enumerate() {
        for &a in arcs {
            let arc = net.arc(a);
            prop_assert_eq!(arc.tail, v);
            prop_assert!(state.residual(a) > 0);
            prop_assert!(order.dequeue_rank[arc.head] < order.dequeue_rank[v]);
            let (du, dv) = (order.dist[v], order.dist[arc.head]);
            prop_assert!(dv <= du && du <= dv + 1, "dist({}) = {}, dist({}) = {}", v, du, arc.head, dv);
        }
    }
    let mut expected: Vec<usize> = (0..net.vertex_count())
        .filter(|&v| v != t && order.dequeue_rank[v] != UNREACHED)
        .filter(|&v| v == s || state.excess(v) != Excess::Finite(0))
        .collect();
    expected.sort_by_key(|&v| order.dequeue_rank[v]);
    prop_assert_eq!(order.priority.iter().copied().collect::<Vec<_>>(), expected);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn arbitrary_augments_keep_a_valid_preflow(
        inst in medium_instance(),
        steps in prop::collection::vec((any::<prop::sample::Index>(), 1u64..=20), 1..60),
    ) {
        let net = inst.build().unwrap();
        let mut state = FlowState::new(&net);
        for (pick, want) in steps {
            let a = pick.index(net.arc_count());
            let tail = net.arc(a).tail;
            let available = match state.excess(tail) {
                Excess::Unbounded => state.residual(a),
                Excess::Finite(e) => e.min(state.residual(a)),
            };
            let delta = want.min(available);
            if delta == 0 {
                prop_assert!(state.augment(&net, a, 1).is_err());
                continue;
            }
            state.augment(&net, a, delta).unwrap();
            let violations = validate_preflow(&net, &state);
            prop_assert!(violations.is_empty(), "{:?}", violations);
        }
    }

    #[test]
    fn every_round_respects_core_and_preflow_invariants(inst in medium_instance()) {
        let net = inst.build().unwrap();
        let oracle = max_flow_reference(&net).value;
        let mut state = FlowState::new(&net);
        let mut rounds = 0;
        loop {
            let (mut order, ok) = bfss(&net, &state);
            check_search_order(&net, &state, &order)?;
            if !ok {
                break;
            }
            let before = state.flow_value();
            let stats = push(&net, &mut state, &mut order).unwrap();
            prop_assert!(stats.saturating_augments <= stats.augments);
            prop_assert_eq!(state.flow_value() - before, stats.sink_gain_delta);
            prop_assert!(validate_preflow(&net, &state).is_empty());
            prop_assert!(state.flow_value() <= oracle);
            rounds += 1;
            prop_assert!(rounds <= 10 * net.vertex_count());
        }
        let cut = certify_cut(&net, &state).unwrap();
        prop_assert!(cut.value >= oracle);
        prop_assert_eq!(cut.value, state.flow_value());
    }

    #[test]
    fn engine_matches_brute_force_on_small_nets(inst in small_instance()) {
        let net = inst.build().unwrap();
        let (_, report) = run(&net, RunLimits::for_network(&net)).unwrap();
        let brute = min_cut_brute_force(&net).unwrap().value;
        prop_assert_eq!(report.flow_value, brute);
        prop_assert_eq!(max_flow_reference(&net).value, brute);
    }

    #[test]
    fn runs_are_deterministic(inst in medium_instance()) {
        let net = inst.build().unwrap();
        let again = inst.build().unwrap();
        prop_assert_eq!(&net, &again);
        let limits = RunLimits::for_network(&net);
        let (s1, r1) = run(&net, limits).unwrap();
        let (s2, r2) = run(&again, limits).unwrap();
        prop_assert_eq!(s1, s2);
        prop_assert_eq!(serde_json::to_string(&r1).unwrap(), serde_json::to_string(&r2).unwrap());
    }

    #[test]
    fn reference_flow_is_a_certified_flow(inst in medium_instance()) {
        let net = inst.build().unwrap();
        let r = max_flow_reference(&net);
        let flow = r.flow.unwrap();
        let mut balance = vec![0i128; net.vertex_count()];
        for ((u, v, cap), &f) in net.input_arcs().zip(&flow) {
            prop_assert!(f <= cap);
            balance[u] -= f as i128;
            balance[v] += f as i128;
        }
        for v in 0..net.vertex_count() {
            if v != net.source() && v != net.sink() {
                prop_assert_eq!(balance[v], 0);
            }
        }
        prop_assert_eq!(balance[net.sink()], r.value as i128);
        let side = r.cut.unwrap();
        let mut mask = vec![false; net.vertex_count()];
        side.iter().for_each(|&v| mask[v] = true);
        prop_assert_eq!(sortflow::oracle::cut_capacity(&net, &mask), r.value);
    }

    #[test]
    fn dimacs_round_trips(
        n in 2usize..60,
        arcs in prop::collection::vec((0usize..60, 0usize..60, 0u64..1_000_000), 0..80),
    ) {
        let inst = Instance {
            vertex_count: n,
            arcs: arcs.into_iter().map(|(u, v, c)| (u % n, v % n, c)).collect(),
            source: 0,
            sink: n - 1,
            label: String::new(),
        };
        let text = write_dimacs(&inst);
        prop_assert_eq!(parse_dimacs(&text).unwrap(), inst);
    }
}

#[test]
fn layered_single_layer_is_blocked_line() {
    let net = gen_layered_blocking(1, 1, &[2, 1]).unwrap().build().unwrap();
    assert_eq!(min_cut_brute_force(&net).unwrap().value, 1);
    let (_, report) = run(&net, RunLimits::for_network(&net)).unwrap();
    assert_eq!((report.flow_value, report.iterations), (1, 1));
}

#[test]
fn layered_two_by_two_golden() {
    let net = gen_layered_blocking(2, 2, &[4, 2, 1]).unwrap().build().unwrap();
    assert_eq!(min_cut_brute_force(&net).unwrap().value, 4);
    let (_, report) = run(&net, RunLimits::for_network(&net)).unwrap();
    assert_eq!((report.flow_value, report.iterations), (4, 2));
    let deltas: Vec<_> = report.per_iteration.iter().map(|it| it.push.sink_gain_delta).collect();
    assert_eq!(deltas, vec![2, 2]);
}

#[test]
fn width_one_layers_take_one_round_each() {
    for layers in 1..=30 {
        let net = gen_layered_blocking(layers, 1, &descending_profile(layers))
            .unwrap()
            .build()
            .unwrap();
        let (_, report) = run(&net, RunLimits::for_network(&net)).unwrap();
        assert_eq!(report.flow_value, max_flow_reference(&net).value);
        assert_eq!(report.iterations, layers, "L = {layers}");
        assert!(report.claims.sink_gain_monotone);
    }
}
