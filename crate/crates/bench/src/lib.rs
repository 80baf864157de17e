//! Input builders shared by the benchmarks.

use hyperset::{build_graph, ApGraph, NodeId, NodeKind};
use rand::Rng;

/// A random accessible graph with exactly `n` set nodes and `m` edges. A
/// chain from the root keeps every node reachable and the last node is left
/// childless so minimization has real classes to separate.
pub fn large_graph(n: u32, m: usize, seed: u64) -> ApGraph {
    assert!(m >= n as usize - 1);
    let mut rng = hyperset_testutil::rng(seed);
    let mut edges: Vec<(NodeId, NodeId)> = Vec::with_capacity(m);
    for v in 0..n - 1 {
        edges.push((NodeId(v), NodeId(v + 1)));
    }
    while edges.len() < m {
        let v = rng.gen_range(0..n - 1);
        let w = rng.gen_range(0..n);
        edges.push((NodeId(v), NodeId(w)));
    }
    build_graph(vec![NodeKind::SetNode; n as usize], &edges, NodeId(0)).unwrap()
}
