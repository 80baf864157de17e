//! Membership graphs. A node stands for a set (its out-edges point at its
//! members) or for an atom (a leaf carrying an ur-element). An [`ApGraph`]
//! additionally fixes a root from which every node is reachable, so it
//! pictures one set: the one the root denotes.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::atom::Atom;
use crate::limits;

/// Index of a node within one graph. Ids are dense, starting at zero, and
/// are private to the graph that issued them.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// What a node stands for.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum NodeKind {
    /// A set; the node's children are its members.
    SetNode,
    /// An ur-element; the node never has children.
    AtomLeaf(Atom),
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("node id {id} is out of range (the graph has {len} nodes)")]
    BadIndex { id: u32, len: u32 },
    #[error("node {node} is an atom leaf and cannot have outgoing edges")]
    EdgeFromAtom { node: u32 },
    #[error("graph needs {required} nodes, over the budget of {budget}")]
    NodeBudget { required: u64, budget: u64 },
}

/// Node kinds plus adjacency, with no distinguished root. Children are kept
/// sorted and deduplicated; atom leaves have empty child lists.
#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) struct RawGraph {
    pub(crate) kinds: Vec<NodeKind>,
    pub(crate) children: Vec<Vec<u32>>,
}

impl RawGraph {
    pub(crate) fn len(&self) -> usize {
        self.kinds.len()
    }

    pub(crate) fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    /// Sorts and deduplicates every child list.
    pub(crate) fn normalize(&mut self) {
        for ch in &mut self.children {
            ch.sort_unstable();
            ch.dedup();
        }
    }

    /// Keeps exactly the nodes reachable from `start`, renumbering them in
    /// ascending order of their old ids. Returns the renumbered graph, the
    /// new id of `start`, and the old id of each kept node.
    pub(crate) fn trim(&self, start: u32) -> (RawGraph, u32, Vec<u32>) {
        let n = self.len();
        let mut seen = vec![false; n];
        seen[start as usize] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.children[v as usize] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push_back(w);
                }
            }
        }
        let mut kept = Vec::new();
        let mut new_id = vec![u32::MAX; n];
        for v in 0..n {
            if seen[v] {
                new_id[v] = kept.len() as u32;
                kept.push(v as u32);
            }
        }
        let kinds = kept.iter().map(|&v| self.kinds[v as usize]).collect();
        let children = kept
            .iter()
            .map(|&v| {
                self.children[v as usize]
                    .iter()
                    .map(|&w| new_id[w as usize])
                    .collect()
            })
            .collect();
        let trimmed = RawGraph { kinds, children };
        (trimmed, new_id[start as usize], kept)
    }

    /// True when no membership chain descends forever: every walk along
    /// edges bottoms out, equivalently the graph has no directed cycle.
    pub(crate) fn is_well_founded(&self) -> bool {
        #[derive(Clone, Copy, PartialEq)]
        enum Color {
            White,
            Gray,
            Black,
        }
        let n = self.len();
        let mut color = vec![Color::White; n];
        // Iterative DFS; a stack frame is (node, next child position).
        let mut stack: Vec<(u32, usize)> = Vec::new();
        for s in 0..n as u32 {
            if color[s as usize] != Color::White {
                continue;
            }
            color[s as usize] = Color::Gray;
            stack.push((s, 0));
            while let Some(&mut (v, ref mut i)) = stack.last_mut() {
                if let Some(&w) = self.children[v as usize].get(*i) {
                    *i += 1;
                    match color[w as usize] {
                        Color::Gray => return false,
                        Color::White => {
                            color[w as usize] = Color::Gray;
                            stack.push((w, 0));
                        }
                        Color::Black => {}
                    }
                } else {
                    color[v as usize] = Color::Black;
                    stack.pop();
                }
            }
        }
        true
    }
}

/// An accessible pointed graph: a membership graph together with a root from
/// which every node is reachable.
///
/// Build one with [`build_graph`], which validates, trims, and normalizes.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ApGraph {
    raw: RawGraph,
    root: u32,
}

impl ApGraph {
    pub fn node_count(&self) -> usize {
        self.raw.len()
    }

    pub fn edge_count(&self) -> usize {
        self.raw.edge_count()
    }

    pub fn root(&self) -> NodeId {
        NodeId(self.root)
    }

    pub fn kind(&self, node: NodeId) -> NodeKind {
        self.raw.kinds[node.index()]
    }

    /// Children of `node`, in ascending id order, without duplicates.
    pub fn children(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.raw.children[node.index()].iter().map(|&w| NodeId(w))
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.raw.len() as u32).map(NodeId)
    }

    pub(crate) fn raw(&self) -> &RawGraph {
        &self.raw
    }

    pub(crate) fn raw_children(&self, v: u32) -> &[u32] {
        &self.raw.children[v as usize]
    }

    pub(crate) fn from_parts(raw: RawGraph, root: u32) -> ApGraph {
        debug_assert!((root as usize) < raw.len());
        ApGraph { raw, root }
    }
}

/// Builds an accessible pointed graph from explicit parts.
///
/// Nodes unreachable from `root` are dropped and the survivors renumbered in
/// ascending order of their old ids; edge lists come out sorted and
/// deduplicated. Fails if an edge leaves an atom leaf, an id is out of
/// range, or the node count exceeds the budget in [`limits`].
pub fn build_graph(
    kinds: Vec<NodeKind>,
    edges: &[(NodeId, NodeId)],
    root: NodeId,
) -> Result<ApGraph, GraphError> {
    let n = kinds.len();
    let budget = limits::node_budget();
    if n > budget {
        return Err(GraphError::NodeBudget {
            required: n as u64,
            budget: budget as u64,
        });
    }
    let check = |id: NodeId| {
        if id.index() < n {
            Ok(())
        } else {
            Err(GraphError::BadIndex {
                id: id.0,
                len: n as u32,
            })
        }
    };
    check(root)?;
    let mut children: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(from, to) in edges {
        check(from)?;
        check(to)?;
        if let NodeKind::AtomLeaf(_) = kinds[from.index()] {
            return Err(GraphError::EdgeFromAtom { node: from.0 });
        }
        children[from.index()].push(to.0);
    }
    let mut raw = RawGraph { kinds, children };
    raw.normalize();
    let (trimmed, new_root, _) = raw.trim(root.0);
    Ok(ApGraph {
        raw: trimmed,
        root: new_root,
    })
}

/// True when the graph contains no directed cycle, so every membership chain
/// out of every node is finite.
pub fn is_well_founded_graph(g: &ApGraph) -> bool {
    g.raw.is_well_founded()
}
