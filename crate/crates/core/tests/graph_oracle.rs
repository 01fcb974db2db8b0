mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{brute_reach, digraph, random_adj, to_graph};
use syncnet::graph::{
    check_uniform_joint_connectivity, is_leader_connected, is_strongly_connected, Extension,
    LeaderEdge, LeaderGraph, Segment, SwitchingSignal, Topology, UniformMode,
};

#[test]
fn strong_connectivity_agrees_with_path_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=4);
        let adj = random_adj(&mut rng, n);
        let reach = brute_reach(n, &adj);
        let want = reach.iter().all(|row| row.iter().all(|&r| r));
        assert_eq!(is_strongly_connected(&to_graph(&adj)), want, "{adj:?}");
    }
}

#[test]
fn leader_connectivity_agrees_with_path_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=4);
        let followers = random_adj(&mut rng, n);
        let leader_to: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        // node n is the leader
        let mut adj = vec![vec![false; n + 1]; n + 1];
        for i in 0..n {
            adj[i][..n].copy_from_slice(&followers[i]);
            adj[n][i] = leader_to[i];
        }
        let want = brute_reach(n + 1, &adj)[n].iter().all(|&r| r);
        let lg = LeaderGraph::new(
            to_graph(&followers),
            (0..n).filter(|&i| leader_to[i]).map(|i| LeaderEdge {
                target: i,
                weight: 1.0,
            }),
        )
        .unwrap();
        assert_eq!(is_leader_connected(&lg), want, "{adj:?} leader -> {leader_to:?}");
    }
}

fn edge_set(t: &Topology) -> Vec<(usize, usize)> {
    t.followers().edges().iter().map(|e| (e.source, e.target)).collect()
}

fn signal_strategy() -> impl Strategy<Value = SwitchingSignal> {
    let n = 3usize;
    let segment = (
        prop::collection::vec(any::<bool>(), n * n),
        0.2f64..2.0,
    )
        .prop_map(move |(bits, duration)| {
            let edges: Vec<_> = (0..n * n)
                .filter(|&k| bits[k] && k / n != k % n)
                .map(|k| (k / n, k % n, 1.0))
                .collect();
            Segment {
                topology: digraph(n, &edges).into(),
                duration,
            }
        });
    (
        prop::collection::vec(segment, 1..6),
        -5.0f64..5.0,
        any::<bool>(),
    )
        .prop_map(|(segments, start, periodic)| {
            let ext = if periodic {
                Extension::Periodic
            } else {
                Extension::HoldLast
            };
            SwitchingSignal::new(segments, start, ext).unwrap()
        })
}

proptest! {
    #[test]
    fn union_is_monotone(s in signal_strategy(), a in 0.0f64..10.0, b in 0.01f64..5.0, c in 0.0f64..5.0) {
        let t1 = s.start_time() + a;
        let small = edge_set(&s.union_graph(t1, t1 + b).unwrap());
        let large = edge_set(&s.union_graph(t1, t1 + b + c).unwrap());
        for e in &small {
            prop_assert!(large.contains(e), "{e:?} missing from the longer union");
        }
    }

    #[test]
    fn union_inside_one_segment_is_that_segment(s in signal_strategy(), k in 0usize..6, lo in 0.0f64..1.0, hi in 0.0f64..1.0) {
        let k = k % s.segments().len();
        let begin = s.start_time() + s.segments()[..k].iter().map(|g| g.duration).sum::<f64>();
        let d = s.segments()[k].duration;
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        prop_assume!(hi - lo > 1e-3);
        let u = s.union_graph(begin + lo * d, begin + hi * d).unwrap();
        prop_assert_eq!(edge_set(&u), edge_set(&s.segments()[k].topology));
    }

    #[test]
    fn graph_at_is_right_continuous(s in signal_strategy()) {
        let mut t = s.start_time();
        for (k, seg) in s.segments().iter().enumerate() {
            prop_assert_eq!(s.segment_index_at(t).unwrap(), k);
            prop_assert_eq!(edge_set(s.graph_at(t).unwrap()), edge_set(&seg.topology));
            t += seg.duration;
        }
        if s.extension() == Extension::Periodic {
            prop_assert_eq!(s.segment_index_at(t).unwrap(), 0);
        }
    }

    #[test]
    fn period_union_decides_full_period_window(s in signal_strategy()) {
        prop_assume!(s.extension() == Extension::Periodic);
        let t0 = s.start_time();
        let period = s.period();
        let union = s.union_graph(t0, t0 + period).unwrap();
        if is_strongly_connected(union.followers()) {
            prop_assert!(check_uniform_joint_connectivity(&s, period, UniformMode::Strong).unwrap());
        }
    }
}
