//! Bisimulation over membership graphs.
//!
//! A bisimulation matches set nodes whose children can be paired off with
//! each other, and matches an atom leaf only with leaves carrying the same
//! atom. Two pointed graphs picture the same set exactly when their roots
//! are bisimilar, so everything here funnels toward one primitive:
//! [`coarsest_bisimulation`], the partition of nodes into maximal classes of
//! mutually bisimilar nodes.
//!
//! The partition is computed with the Paige and Tarjan three-way refinement
//! scheme, which runs in O(m log n) by always detaching the smaller half of
//! a compound splitter and keeping per-source edge counts into each
//! splitter. [`quotient`] collapses every class to one node, producing the
//! unique minimal picture. [`canonical_code`] then serializes that minimal
//! graph in a node order derived only from structure and atom names, so the
//! bytes are identical for any two presentations of the same set, in any
//! process.

use std::fmt;

use crate::graph::{ApGraph, NodeId, NodeKind, RawGraph};

/// A partition of a graph's nodes into bisimilarity classes. Block ids are
/// dense, starting at zero.
#[derive(Clone, Debug)]
pub struct Partition {
    block_of: Vec<u32>,
    blocks: u32,
}

impl Partition {
    pub fn num_blocks(&self) -> usize {
        self.blocks as usize
    }

    pub fn block_of(&self, node: NodeId) -> u32 {
        self.block_of[node.index()]
    }

    pub fn same_class(&self, a: NodeId, b: NodeId) -> bool {
        self.block_of[a.index()] == self.block_of[b.index()]
    }

    pub(crate) fn raw_block_of(&self, v: u32) -> u32 {
        self.block_of[v as usize]
    }
}

/// The refinable partition: blocks are contiguous runs of `elems`, and each
/// block keeps a count of marked elements, held at the front of its run.
struct Blocks {
    elems: Vec<u32>,
    pos: Vec<u32>,
    blk: Vec<u32>,
    start: Vec<u32>,
    end: Vec<u32>,
    marked: Vec<u32>,
}

impl Blocks {
    fn from_keys(keys: &[u64]) -> Blocks {
        let n = keys.len();
        let mut elems: Vec<u32> = (0..n as u32).collect();
        elems.sort_unstable_by_key(|&v| keys[v as usize]);
        let mut pos = vec![0u32; n];
        let mut blk = vec![0u32; n];
        let mut start = Vec::new();
        let mut end = Vec::new();
        let mut i = 0;
        while i < n {
            let b = start.len() as u32;
            let key = keys[elems[i] as usize];
            start.push(i as u32);
            while i < n && keys[elems[i] as usize] == key {
                let v = elems[i];
                pos[v as usize] = i as u32;
                blk[v as usize] = b;
                i += 1;
            }
            end.push(i as u32);
        }
        let marked = vec![0; start.len()];
        Blocks {
            elems,
            pos,
            blk,
            start,
            end,
            marked,
        }
    }

    fn count(&self) -> u32 {
        self.start.len() as u32
    }

    fn size(&self, b: u32) -> u32 {
        self.end[b as usize] - self.start[b as usize]
    }

    /// Moves `v` into the marked prefix of its block and returns the block.
    fn mark(&mut self, v: u32) -> u32 {
        let b = self.blk[v as usize];
        let p = self.pos[v as usize] as usize;
        let m = (self.start[b as usize] + self.marked[b as usize]) as usize;
        if p < m {
            return b;
        }
        if p != m {
            let u = self.elems[m];
            self.elems.swap(p, m);
            self.pos[u as usize] = p as u32;
            self.pos[v as usize] = m as u32;
        }
        self.marked[b as usize] += 1;
        b
    }

    /// Detaches the marked prefix of `b` as a new block and clears the
    /// marks. No split happens when nothing or everything was marked.
    fn split_marked(&mut self, b: u32) -> Option<u32> {
        let m = self.marked[b as usize];
        self.marked[b as usize] = 0;
        if m == 0 || m == self.size(b) {
            return None;
        }
        let nb = self.start.len() as u32;
        let s = self.start[b as usize];
        self.start.push(s);
        self.end.push(s + m);
        self.marked.push(0);
        self.start[b as usize] = s + m;
        for i in s..s + m {
            self.blk[self.elems[i as usize] as usize] = nb;
        }
        Some(nb)
    }
}

/// Computes the coarsest bisimulation partition of `raw`.
///
/// The initial partition groups atom leaves by their atom and set nodes by
/// whether they have any child at all; the second distinction keeps the
/// partition stable with respect to the universe, the sole initial
/// splitter. Refinement then follows Paige and Tarjan: detach the smaller
/// member block B of a compound splitter S, split every block by "has an
/// edge into B", then split the survivors by "has an edge into S beyond B",
/// which the per-edge count slots answer without touching S.
pub(crate) fn refine_raw(raw: &RawGraph) -> Partition {
    let n = raw.len();
    if n == 0 {
        return Partition {
            block_of: Vec::new(),
            blocks: 0,
        };
    }
    let keys: Vec<u64> = (0..n)
        .map(|v| match raw.kinds[v] {
            NodeKind::SetNode => {
                if raw.children[v].is_empty() {
                    0
                } else {
                    1
                }
            }
            NodeKind::AtomLeaf(a) => 2 + a.uid() as u64,
        })
        .collect();
    let mut p = Blocks::from_keys(&keys);

    // Incoming edges in CSR form. Every edge carries a slot index into
    // `counts`; all edges from one source x into the current splitter S
    // share the slot holding count(x, S). Slot x starts as (x, universe),
    // whose count is x's outdegree.
    let m = raw.edge_count();
    let mut pre_start = vec![0u32; n + 1];
    for ch in &raw.children {
        for &w in ch {
            pre_start[w as usize + 1] += 1;
        }
    }
    for i in 0..n {
        pre_start[i + 1] += pre_start[i];
    }
    let mut cursor = pre_start.clone();
    let mut pre_src = vec![0u32; m];
    let mut pre_slot = vec![0u32; m];
    let mut counts: Vec<u32> = raw.children.iter().map(|ch| ch.len() as u32).collect();
    for x in 0..n {
        for &w in &raw.children[x] {
            let e = cursor[w as usize] as usize;
            cursor[w as usize] += 1;
            pre_src[e] = x as u32;
            pre_slot[e] = x as u32;
        }
    }

    // Splitter partition: xof maps each block to its splitter, xblocks lists
    // each splitter's member blocks. Compound splitters sit on the worklist.
    let mut xof: Vec<u32> = vec![0; p.count() as usize];
    let mut xblocks: Vec<Vec<u32>> = vec![(0..p.count()).collect()];
    let mut on_work = vec![false];
    let mut work: Vec<u32> = Vec::new();
    if p.count() >= 2 {
        work.push(0);
        on_work[0] = true;
    }

    let mut cnt_b = vec![0u32; n];
    let mut slot_s = vec![u32::MAX; n];
    let mut new_slot = vec![u32::MAX; n];
    let mut preb: Vec<u32> = Vec::new();
    let mut edges_b: Vec<u32> = Vec::new();
    let mut touched: Vec<u32> = Vec::new();

    while let Some(sx) = work.pop() {
        on_work[sx as usize] = false;
        if xblocks[sx as usize].len() < 2 {
            continue;
        }
        // Detach the smaller of two member blocks; it is at most half of S.
        let pick = {
            let list = &xblocks[sx as usize];
            usize::from(p.size(list[0]) > p.size(list[1]))
        };
        let b = xblocks[sx as usize].swap_remove(pick);
        let nx = xblocks.len() as u32;
        xblocks.push(vec![b]);
        on_work.push(false);
        xof[b as usize] = nx;
        if xblocks[sx as usize].len() >= 2 && !on_work[sx as usize] {
            work.push(sx);
            on_work[sx as usize] = true;
        }

        // Gather pre(B) once, before any split moves B's elements.
        for i in p.start[b as usize]..p.end[b as usize] {
            let y = p.elems[i as usize] as usize;
            for e in pre_start[y]..pre_start[y + 1] {
                let x = pre_src[e as usize] as usize;
                if cnt_b[x] == 0 {
                    preb.push(x as u32);
                    slot_s[x] = pre_slot[e as usize];
                }
                cnt_b[x] += 1;
                edges_b.push(e);
            }
        }

        // First split: sources with an edge into B leave their block.
        touched.clear();
        for &x in &preb {
            let d = p.mark(x);
            if p.marked[d as usize] == 1 {
                touched.push(d);
            }
        }
        for &d in &touched {
            if let Some(nd) = p.split_marked(d) {
                debug_assert_eq!(nd as usize, xof.len());
                let x = xof[d as usize];
                xof.push(x);
                xblocks[x as usize].push(nd);
                if xblocks[x as usize].len() >= 2 && !on_work[x as usize] {
                    work.push(x);
                    on_work[x as usize] = true;
                }
            }
        }

        // Second split: among sources reaching B, those with no edge into
        // the rest of S leave. count(x, S) still holds the pre-detach value.
        touched.clear();
        for &x in &preb {
            if counts[slot_s[x as usize] as usize] == cnt_b[x as usize] {
                let d = p.mark(x);
                if p.marked[d as usize] == 1 {
                    touched.push(d);
                }
            }
        }
        for &d in &touched {
            if let Some(nd) = p.split_marked(d) {
                debug_assert_eq!(nd as usize, xof.len());
                let x = xof[d as usize];
                xof.push(x);
                xblocks[x as usize].push(nd);
                if xblocks[x as usize].len() >= 2 && !on_work[x as usize] {
                    work.push(x);
                    on_work[x as usize] = true;
                }
            }
        }

        // Move the counted edges from slot (x, S) to a fresh slot (x, B).
        for &e in &edges_b {
            let x = pre_src[e as usize] as usize;
            let ns = if new_slot[x] == u32::MAX {
                let id = counts.len() as u32;
                counts.push(0);
                new_slot[x] = id;
                id
            } else {
                new_slot[x]
            };
            counts[pre_slot[e as usize] as usize] -= 1;
            counts[ns as usize] += 1;
            pre_slot[e as usize] = ns;
        }

        for &x in &preb {
            cnt_b[x as usize] = 0;
            slot_s[x as usize] = u32::MAX;
            new_slot[x as usize] = u32::MAX;
        }
        preb.clear();
        edges_b.clear();
    }

    Partition {
        blocks: p.count(),
        block_of: p.blk,
    }
}

/// Coarsest bisimulation partition of the graph's nodes.
pub fn coarsest_bisimulation(g: &ApGraph) -> Partition {
    refine_raw(g.raw())
}

/// Side-by-side union of two raw graphs; returns the id offset of `b`.
pub(crate) fn union_raw(a: &RawGraph, b: &RawGraph) -> (RawGraph, u32) {
    let off = a.len() as u32;
    let mut kinds = a.kinds.clone();
    kinds.extend_from_slice(&b.kinds);
    let mut children = a.children.clone();
    children.extend(
        b.children
            .iter()
            .map(|ch| ch.iter().map(|&w| w + off).collect::<Vec<_>>()),
    );
    (RawGraph { kinds, children }, off)
}

/// True when the two graphs picture the same set: their roots are bisimilar
/// in the side-by-side union.
pub fn bisimilar(a: &ApGraph, b: &ApGraph) -> bool {
    let (u, off) = union_raw(a.raw(), b.raw());
    let p = refine_raw(&u);
    p.raw_block_of(a.root().0) == p.raw_block_of(off + b.root().0)
}

/// Collapses each bisimilarity class of `raw` to one node. Returns the
/// quotient and the class of each original node.
pub(crate) fn quotient_raw(raw: &RawGraph) -> (RawGraph, Vec<u32>) {
    let p = refine_raw(raw);
    let k = p.blocks as usize;
    let mut kinds = vec![NodeKind::SetNode; k];
    let mut children: Vec<Vec<u32>> = vec![Vec::new(); k];
    for v in 0..raw.len() {
        let b = p.block_of[v] as usize;
        kinds[b] = raw.kinds[v];
        for &w in &raw.children[v] {
            children[b].push(p.block_of[w as usize]);
        }
    }
    let mut q = RawGraph { kinds, children };
    q.normalize();
    (q, p.block_of)
}

/// The minimal picture of the same set: every bisimilarity class collapsed
/// to a single node. Applying it twice changes nothing beyond node ids.
pub fn quotient(g: &ApGraph) -> ApGraph {
    let (q, block_of) = quotient_raw(g.raw());
    let root_block = block_of[g.root().index()];
    let (trimmed, new_root, _) = q.trim(root_block);
    ApGraph::from_parts(trimmed, new_root)
}

/// Orders the nodes of a minimal graph by structure alone.
///
/// Iterated partition refinement with exact signatures: each round sorts
/// nodes by (previous color, sorted child colors) and reassigns dense color
/// ids in that order. Atom names seed the first round, so the result only
/// depends on the isomorphism class of the graph. On a minimal graph the
/// stable coloring separates every node pair, since a stable coloring
/// matches child colors and therefore is a bisimulation. The returned
/// vector maps each node to its rank.
fn canonical_order(raw: &RawGraph) -> Vec<u32> {
    let n = raw.len();
    if n == 0 {
        return Vec::new();
    }
    let mut names: Vec<(std::sync::Arc<str>, u32)> = raw
        .kinds
        .iter()
        .filter_map(|k| match k {
            NodeKind::AtomLeaf(a) => Some((a.name(), a.uid())),
            NodeKind::SetNode => None,
        })
        .collect();
    names.sort();
    names.dedup();
    let name_rank: std::collections::HashMap<u32, u32> = names
        .iter()
        .enumerate()
        .map(|(i, &(_, uid))| (uid, i as u32))
        .collect();

    // Round zero: sets first, then atoms in name order.
    let init: Vec<u32> = raw
        .kinds
        .iter()
        .map(|k| match k {
            NodeKind::SetNode => 0,
            NodeKind::AtomLeaf(a) => 1 + name_rank[&a.uid()],
        })
        .collect();
    let mut order: Vec<u32> = (0..n as u32).collect();
    let mut color = vec![0u32; n];
    let mut distinct = assign_dense(&mut color, &mut order, &init);

    loop {
        let sigs: Vec<(u32, Vec<u32>)> = (0..n)
            .map(|v| {
                let mut kids: Vec<u32> =
                    raw.children[v].iter().map(|&w| color[w as usize]).collect();
                kids.sort_unstable();
                (color[v], kids)
            })
            .collect();
        let next = assign_dense(&mut color, &mut order, &sigs);
        if next == distinct {
            break;
        }
        distinct = next;
    }
    assert_eq!(
        distinct as usize, n,
        "refinement of a minimal graph must separate all nodes"
    );
    color
}

/// Sorts `order` by each node's signature and writes dense rank ids into
/// `color`. Returns how many distinct signatures appeared.
fn assign_dense<S: Ord>(color: &mut [u32], order: &mut [u32], sigs: &[S]) -> u32 {
    order.sort_by(|&a, &b| sigs[a as usize].cmp(&sigs[b as usize]));
    let mut next = 0u32;
    for i in 0..order.len() {
        if i > 0 && sigs[order[i] as usize] != sigs[order[i - 1] as usize] {
            next += 1;
        }
        color[order[i] as usize] = next;
    }
    next + 1
}

/// Applies a node ranking, renumbering nodes so node i is the rank-i node.
fn relabel(raw: &RawGraph, rank: &[u32], root: u32) -> (RawGraph, u32) {
    let n = raw.len();
    let mut node_at = vec![0u32; n];
    for v in 0..n {
        node_at[rank[v] as usize] = v as u32;
    }
    let kinds = node_at.iter().map(|&v| raw.kinds[v as usize]).collect();
    let children = node_at
        .iter()
        .map(|&v| {
            raw.children[v as usize]
                .iter()
                .map(|&w| rank[w as usize])
                .collect()
        })
        .collect();
    let mut out = RawGraph { kinds, children };
    out.normalize();
    (out, rank[root as usize])
}

const CODE_VERSION: u8 = 1;

/// Minimizes and canonically labels the graph under `root`, returning the
/// relabeled minimal graph, its root, and the serialized code.
pub(crate) fn canonical_parts(raw: &RawGraph, root: u32) -> (RawGraph, u32, CanonicalCode) {
    let (reachable, root1, _) = raw.trim(root);
    let (q, block_of) = quotient_raw(&reachable);
    let qroot = block_of[root1 as usize];
    let rank = canonical_order(&q);
    let (canon, root2) = relabel(&q, &rank, qroot);
    let code = encode(&canon, root2);
    (canon, root2, code)
}

fn encode(raw: &RawGraph, root: u32) -> CanonicalCode {
    let mut bytes = Vec::new();
    bytes.push(CODE_VERSION);
    bytes.extend_from_slice(&(raw.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&root.to_le_bytes());
    for v in 0..raw.len() {
        match raw.kinds[v] {
            NodeKind::SetNode => {
                bytes.push(0);
                bytes.extend_from_slice(&(raw.children[v].len() as u32).to_le_bytes());
                for &w in &raw.children[v] {
                    bytes.extend_from_slice(&w.to_le_bytes());
                }
            }
            NodeKind::AtomLeaf(a) => {
                let name = a.name();
                assert!(name.len() <= u16::MAX as usize);
                bytes.push(1);
                bytes.extend_from_slice(&(name.len() as u16).to_le_bytes());
                bytes.extend_from_slice(name.as_bytes());
            }
        }
    }
    CanonicalCode {
        bytes: bytes.into_boxed_slice(),
    }
}

/// A canonical byte serialization of the minimal picture of a set.
///
/// Codes of two graphs are equal exactly when the graphs picture the same
/// set, and the bytes are stable across processes: atom identity enters the
/// code through names only. The first byte is a layout version.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode {
    bytes: Box<[u8]>,
}

impl CanonicalCode {
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn to_hex(&self) -> String {
        self.bytes.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalCode({})", self.to_hex())
    }
}

/// Canonical code of the set the graph pictures.
pub fn canonical_code(g: &ApGraph) -> CanonicalCode {
    canonical_parts(g.raw(), g.root().0).2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::Atom;
    use crate::graph::build_graph;

    fn sets(n: usize) -> Vec<NodeKind> {
        vec![NodeKind::SetNode; n]
    }

    fn g(kinds: Vec<NodeKind>, edges: &[(u32, u32)], root: u32) -> ApGraph {
        let edges: Vec<_> = edges
            .iter()
            .map(|&(a, b)| (NodeId(a), NodeId(b)))
            .collect();
        build_graph(kinds, &edges, NodeId(root)).unwrap()
    }

    #[test]
    fn self_loop_and_two_cycle_carry_the_same_code() {
        let one = g(sets(1), &[(0, 0)], 0);
        let two = g(sets(2), &[(0, 1), (1, 0)], 0);
        assert!(bisimilar(&one, &two));
        assert_eq!(canonical_code(&one), canonical_code(&two));
        assert_eq!(quotient(&two).node_count(), 1);
    }

    #[test]
    fn duplicate_members_collapse() {
        let bare = g(sets(1), &[], 0);
        // A root with two empty children pictures the singleton of the
        // empty set, not a two-element set.
        let padded = g(sets(3), &[(0, 1), (0, 2)], 0);
        let singleton = g(sets(2), &[(0, 1)], 0);
        assert_eq!(quotient(&padded).node_count(), 2);
        assert_eq!(canonical_code(&padded), canonical_code(&singleton));
        // Rooting at a child trims the parent away entirely.
        assert_eq!(
            canonical_code(&g(sets(2), &[(0, 1)], 1)),
            canonical_code(&bare)
        );
    }

    #[test]
    fn distinct_atoms_are_not_bisimilar() {
        let p = Atom::intern("bq_p").unwrap();
        let q = Atom::intern("bq_q").unwrap();
        let gp = g(vec![NodeKind::SetNode, NodeKind::AtomLeaf(p)], &[(0, 1)], 0);
        let gq = g(vec![NodeKind::SetNode, NodeKind::AtomLeaf(q)], &[(0, 1)], 0);
        let gp2 = g(vec![NodeKind::SetNode, NodeKind::AtomLeaf(p)], &[(0, 1)], 0);
        assert!(!bisimilar(&gp, &gq));
        assert!(bisimilar(&gp, &gp2));
        assert_ne!(canonical_code(&gp), canonical_code(&gq));
    }

    #[test]
    fn empty_and_nonempty_sets_never_merge() {
        let empty = g(sets(1), &[], 0);
        let loopy = g(sets(1), &[(0, 0)], 0);
        assert!(!bisimilar(&empty, &loopy));
    }

    #[test]
    fn unfolded_ordinal_collapses() {
        // {{}, {{}}} presented twice: shared and fully unfolded.
        let shared = g(sets(3), &[(0, 1), (0, 2), (1, 2)], 0);
        let unfolded = g(sets(4), &[(0, 1), (0, 3), (1, 2)], 0);
        assert!(bisimilar(&shared, &unfolded));
        assert_eq!(canonical_code(&shared), canonical_code(&unfolded));
        assert_eq!(quotient(&unfolded).node_count(), 3);
    }

    #[test]
    fn quotient_is_idempotent_up_to_codes() {
        let noisy = g(
            sets(6),
            &[(0, 1), (0, 2), (1, 3), (2, 4), (3, 5), (4, 5), (0, 5)],
            0,
        );
        let q1 = quotient(&noisy);
        let q2 = quotient(&q1);
        assert_eq!(q1.node_count(), q2.node_count());
        assert_eq!(canonical_code(&q1), canonical_code(&q2));
        assert_eq!(canonical_code(&q1), canonical_code(&noisy));
    }

    #[test]
    fn partition_separates_by_depth() {
        // A chain 0 -> 1 -> 2: three distinct classes.
        let chain = g(sets(3), &[(0, 1), (1, 2)], 0);
        let p = coarsest_bisimulation(&chain);
        assert_eq!(p.num_blocks(), 3);
        assert!(!p.same_class(NodeId(0), NodeId(1)));
        assert!(!p.same_class(NodeId(1), NodeId(2)));
    }

    #[test]
    fn codes_differ_between_loop_and_empty() {
        let empty = g(sets(1), &[], 0);
        let loopy = g(sets(1), &[(0, 0)], 0);
        assert_ne!(canonical_code(&empty), canonical_code(&loopy));
    }

    #[test]
    fn code_layout_is_versioned_and_stable() {
        // {} has one childless set node rooted at 0.
        let empty = g(sets(1), &[], 0);
        let code = canonical_code(&empty);
        assert_eq!(
            code.as_bytes(),
            [1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]
        );
        assert_eq!(code.to_hex(), "0101000000000000000000000000");
    }

    #[test]
    fn mirrored_presentations_share_a_code() {
        // The same four-node diamond built with two different id layouts.
        let a = g(sets(4), &[(0, 1), (0, 2), (1, 3), (2, 3), (1, 2)], 0);
        let b = g(sets(4), &[(3, 2), (3, 1), (2, 0), (1, 0), (2, 1)], 3);
        assert_eq!(canonical_code(&a), canonical_code(&b));
    }
}
