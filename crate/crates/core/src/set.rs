//! Hyperset values. An [`HSet`] owns the canonical minimal picture of a
//! set, interned process-wide by canonical code, so equality between sets
//! (including self-membered ones) is a pointer comparison.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use thiserror::Error;

use crate::atom::Atom;
use crate::bisim::{self, CanonicalCode};
use crate::graph::{is_well_founded_graph, ApGraph, NodeId, NodeKind, RawGraph};
use crate::limits;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SetError {
    #[error("{what} exceeded: needs {required}, limit is {limit}")]
    SizeLimit {
        what: &'static str,
        required: u64,
        limit: u64,
    },
    #[error("not a Kuratowski pair")]
    NotAPair,
    #[error("a member is not a Kuratowski pair, so the set is not a relation")]
    NotARelation,
    #[error("not a von Neumann numeral")]
    NotANatural,
    #[error("the root is an atom leaf, which pictures no set")]
    AtomRoot,
}

impl SetError {
    /// True for errors that mean "the result would be too large", as
    /// opposed to a malformed or mistyped argument.
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, SetError::SizeLimit { .. })
    }
}

fn node_budget_error(required: u64) -> SetError {
    SetError::SizeLimit {
        what: "node budget",
        required,
        limit: limits::node_budget() as u64,
    }
}

struct Entry {
    graph: ApGraph,
    code: CanonicalCode,
}

fn intern_table() -> &'static RwLock<HashMap<CanonicalCode, Arc<Entry>>> {
    static TABLE: OnceLock<RwLock<HashMap<CanonicalCode, Arc<Entry>>>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// A hyperset: a set built from atoms by (possibly circular) membership.
///
/// The value is the canonical minimal graph of the set, shared through an
/// intern table keyed by canonical code. Cloning is cheap and equality is
/// constant time. Values live for the rest of the process once interned.
#[derive(Clone)]
pub struct HSet(Arc<Entry>);

/// A member of a hyperset: either another set or an atom.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Element {
    Set(HSet),
    Atom(Atom),
}

impl Element {
    pub fn as_set(&self) -> Option<&HSet> {
        match self {
            Element::Set(s) => Some(s),
            Element::Atom(_) => None,
        }
    }

    pub fn as_atom(&self) -> Option<Atom> {
        match self {
            Element::Set(_) => None,
            Element::Atom(a) => Some(*a),
        }
    }

    /// Atoms count as well-founded; a set answers for its own graph.
    pub fn is_well_founded(&self) -> bool {
        match self {
            Element::Set(s) => s.is_well_founded(),
            Element::Atom(_) => true,
        }
    }
}

impl From<HSet> for Element {
    fn from(s: HSet) -> Element {
        Element::Set(s)
    }
}

impl From<Atom> for Element {
    fn from(a: Atom) -> Element {
        Element::Atom(a)
    }
}

/// Canonicalizes and interns the set pictured by `root` in `raw`.
///
/// The root must be a set node. Never fails: the input graph already fit in
/// memory, and canonicalization only shrinks it.
pub(crate) fn canonicalize(mut raw: RawGraph, root: u32) -> HSet {
    debug_assert!(matches!(raw.kinds[root as usize], NodeKind::SetNode));
    raw.normalize();
    let (canon, croot, code) = bisim::canonical_parts(&raw, root);
    if let Some(hit) = intern_table().read().unwrap().get(&code) {
        return HSet(hit.clone());
    }
    let mut table = intern_table().write().unwrap();
    if let Some(hit) = table.get(&code) {
        return HSet(hit.clone());
    }
    let entry = Arc::new(Entry {
        graph: ApGraph::from_parts(canon, croot),
        code: code.clone(),
    });
    table.insert(code, entry.clone());
    HSet(entry)
}

/// Incrementally assembles a membership graph under the node budget.
pub(crate) struct Builder {
    kinds: Vec<NodeKind>,
    children: Vec<Vec<u32>>,
}

impl Builder {
    pub(crate) fn new() -> Builder {
        Builder {
            kinds: Vec::new(),
            children: Vec::new(),
        }
    }

    fn grow(&mut self, kind: NodeKind) -> Result<u32, SetError> {
        // Node ids are u32, so that is a hard ceiling under any budget.
        let budget = limits::node_budget().min(u32::MAX as usize);
        if self.kinds.len() >= budget {
            return Err(node_budget_error(self.kinds.len() as u64 + 1));
        }
        let id = self.kinds.len() as u32;
        self.kinds.push(kind);
        self.children.push(Vec::new());
        Ok(id)
    }

    pub(crate) fn set_node(&mut self) -> Result<u32, SetError> {
        self.grow(NodeKind::SetNode)
    }

    pub(crate) fn atom_node(&mut self, a: Atom) -> Result<u32, SetError> {
        self.grow(NodeKind::AtomLeaf(a))
    }

    pub(crate) fn set_children(&mut self, v: u32, kids: Vec<u32>) {
        debug_assert!(matches!(self.kinds[v as usize], NodeKind::SetNode));
        self.children[v as usize] = kids;
    }

    /// Copies the whole picture of `h` in and returns its root's new id.
    pub(crate) fn splice(&mut self, h: &HSet) -> Result<u32, SetError> {
        let g = h.picture();
        let off = self.kinds.len() as u32;
        let total = self.kinds.len() as u64 + g.node_count() as u64;
        if total > limits::node_budget().min(u32::MAX as usize) as u64 {
            return Err(node_budget_error(total));
        }
        let raw = g.raw();
        self.kinds.extend_from_slice(&raw.kinds);
        self.children.extend(
            raw.children
                .iter()
                .map(|ch| ch.iter().map(|&w| w + off).collect::<Vec<_>>()),
        );
        Ok(off + g.root().0)
    }

    pub(crate) fn splice_element(&mut self, e: &Element) -> Result<u32, SetError> {
        match e {
            Element::Set(s) => self.splice(s),
            Element::Atom(a) => self.atom_node(*a),
        }
    }

    pub(crate) fn finish(self, root: u32) -> HSet {
        canonicalize(
            RawGraph {
                kinds: self.kinds,
                children: self.children,
            },
            root,
        )
    }
}

impl HSet {
    /// The empty set.
    pub fn empty() -> HSet {
        let mut b = Builder::new();
        let root = b.set_node().expect("one node fits any budget");
        b.finish(root)
    }

    /// The set whose members are exactly `elements` (duplicates collapse).
    pub fn set_of(elements: &[Element]) -> Result<HSet, SetError> {
        let mut b = Builder::new();
        let root = b.set_node()?;
        let mut kids = Vec::new();
        let mut seen: Vec<&Element> = Vec::new();
        for e in elements {
            if seen.contains(&e) {
                continue;
            }
            seen.push(e);
            kids.push(b.splice_element(e)?);
        }
        b.set_children(root, kids);
        Ok(b.finish(root))
    }

    /// The set pictured by `g`, whose root must be a set node.
    pub fn from_graph(g: &ApGraph) -> Result<HSet, SetError> {
        match g.kind(g.root()) {
            NodeKind::AtomLeaf(_) => Err(SetError::AtomRoot),
            NodeKind::SetNode => Ok(canonicalize(g.raw().clone(), g.root().0)),
        }
    }

    /// The unique set equal to its own singleton: the solution of x = {x}.
    pub fn omega() -> HSet {
        let raw = RawGraph {
            kinds: vec![NodeKind::SetNode],
            children: vec![vec![0]],
        };
        canonicalize(raw, 0)
    }

    /// The von Neumann numeral n = {0, 1, ..., n-1}.
    pub fn natural(n: u64) -> Result<HSet, SetError> {
        let bound = limits::natural_bound();
        if n > bound {
            return Err(SetError::SizeLimit {
                what: "numeral bound",
                required: n,
                limit: bound,
            });
        }
        let budget = limits::node_budget().min(u32::MAX as usize) as u64;
        if n + 1 > budget {
            return Err(node_budget_error(n + 1));
        }
        let n = n as u32;
        let kinds = vec![NodeKind::SetNode; n as usize + 1];
        let children = (0..=n).map(|i| (0..i).collect()).collect();
        Ok(canonicalize(RawGraph { kinds, children }, n))
    }

    /// The Kuratowski pair {{a}, {a, b}}.
    pub fn kpair(a: &Element, b: &Element) -> Result<HSet, SetError> {
        let mut bld = Builder::new();
        let root = bld.set_node()?;
        let first = bld.set_node()?;
        let second = bld.set_node()?;
        let ra = bld.splice_element(a)?;
        let rb = bld.splice_element(b)?;
        bld.set_children(first, vec![ra]);
        bld.set_children(second, vec![ra, rb]);
        bld.set_children(root, vec![first, second]);
        Ok(bld.finish(root))
    }

    /// The canonical minimal picture of this set.
    pub fn picture(&self) -> &ApGraph {
        &self.0.graph
    }

    /// The canonical byte code; equal codes mean equal sets, in any process.
    pub fn code(&self) -> &CanonicalCode {
        &self.0.code
    }

    pub fn node_count(&self) -> usize {
        self.0.graph.node_count()
    }

    /// Number of distinct members.
    pub fn cardinality(&self) -> usize {
        let g = self.picture();
        g.children(g.root()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.cardinality() == 0
    }

    /// The members, in the canonical node order of the picture (set members
    /// first, then atom members in name order). No member appears twice.
    pub fn elements(&self) -> Vec<Element> {
        let g = self.picture();
        g.children(g.root()).map(|c| extract(g, c)).collect()
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.elements().iter().any(|m| m == e)
    }

    /// True when no infinite descending membership chain leaves this set.
    pub fn is_well_founded(&self) -> bool {
        is_well_founded_graph(self.picture())
    }

    /// True when no atom occurs anywhere in the membership structure.
    pub fn is_pure(&self) -> bool {
        self.picture()
            .nodes()
            .all(|v| matches!(self.picture().kind(v), NodeKind::SetNode))
    }

    /// Atoms occurring anywhere in the membership structure, in name order.
    pub fn support(&self) -> Vec<Atom> {
        let g = self.picture();
        let mut atoms: Vec<Atom> = g
            .nodes()
            .filter_map(|v| match g.kind(v) {
                NodeKind::AtomLeaf(a) => Some(a),
                NodeKind::SetNode => None,
            })
            .collect();
        atoms.sort();
        atoms.dedup();
        atoms
    }

    /// True when this set lives in the universe built over `atoms`: its
    /// support is contained in that list.
    pub fn in_v_afa(&self, atoms: &[Atom]) -> bool {
        self.support().iter().all(|a| atoms.contains(a))
    }

    /// Reads a von Neumann numeral back, if this set is one.
    pub fn as_natural(&self) -> Result<u64, SetError> {
        let k = self.cardinality() as u64;
        let bound = limits::natural_bound();
        if k > bound {
            return Err(SetError::SizeLimit {
                what: "numeral bound",
                required: k,
                limit: bound,
            });
        }
        if *self == HSet::natural(k)? {
            Ok(k)
        } else {
            Err(SetError::NotANatural)
        }
    }

    /// Binary union of two sets.
    pub fn union(&self, other: &HSet) -> Result<HSet, SetError> {
        let mut members = self.elements();
        members.extend(other.elements());
        HSet::set_of(&members)
    }

    /// Union over the members of this set. Atom members contribute nothing,
    /// since an ur-element has no members.
    pub fn union_all(&self) -> Result<HSet, SetError> {
        let mut members = Vec::new();
        for e in self.elements() {
            if let Element::Set(s) = e {
                members.extend(s.elements());
            }
        }
        HSet::set_of(&members)
    }

    /// The set of all subsets. With circular members, a subset can be a
    /// member of itself; the construction never unfolds members, so this
    /// works the same on well-founded and circular sets.
    pub fn power_set(&self) -> Result<HSet, SetError> {
        let elems = self.elements();
        let n = elems.len();
        let bound = limits::power_set_bound();
        if n > bound {
            return Err(SetError::SizeLimit {
                what: "power set bound",
                required: n as u64,
                limit: bound as u64,
            });
        }
        let mut b = Builder::new();
        let root = b.set_node()?;
        let member_ids: Vec<u32> = elems
            .iter()
            .map(|e| b.splice_element(e))
            .collect::<Result<_, _>>()?;
        let mut subset_ids = Vec::with_capacity(1 << n);
        for mask in 0..(1usize << n) {
            let subset = b.set_node()?;
            let kids = member_ids
                .iter()
                .enumerate()
                .filter(|&(i, _)| mask >> i & 1 == 1)
                .map(|(_, &id)| id)
                .collect();
            b.set_children(subset, kids);
            subset_ids.push(subset);
        }
        b.set_children(root, subset_ids);
        Ok(b.finish(root))
    }

    /// Decodes a Kuratowski pair into its two components.
    pub fn pair_components(&self) -> Result<(Element, Element), SetError> {
        let members = self.elements();
        let sides: Vec<Vec<Element>> = members
            .iter()
            .map(|m| match m {
                Element::Set(s) => Ok(s.elements()),
                Element::Atom(_) => Err(SetError::NotAPair),
            })
            .collect::<Result<_, _>>()?;
        let (a, b) = match (members.len(), sides.as_slice()) {
            // {{a}} encodes the pair (a, a); note {omega} is omega itself.
            (1, [inner]) if inner.len() == 1 => (inner[0].clone(), inner[0].clone()),
            (2, [m1, m2]) => {
                let (single, double) = match (m1.len(), m2.len()) {
                    (1, 2) => (m1, m2),
                    (2, 1) => (m2, m1),
                    _ => return Err(SetError::NotAPair),
                };
                let a = single[0].clone();
                if double[0] == a {
                    (a, double[1].clone())
                } else if double[1] == a {
                    (a, double[0].clone())
                } else {
                    return Err(SetError::NotAPair);
                }
            }
            _ => return Err(SetError::NotAPair),
        };
        debug_assert_eq!(HSet::kpair(&a, &b).as_ref(), Ok(self));
        Ok((a, b))
    }

    /// Domain and range of a set of pairs.
    pub fn dom_rng(&self) -> Result<(HSet, HSet), SetError> {
        let mut doms = Vec::new();
        let mut rngs = Vec::new();
        for m in self.elements() {
            let Element::Set(p) = m else {
                return Err(SetError::NotARelation);
            };
            let (a, b) = p.pair_components().map_err(|_| SetError::NotARelation)?;
            doms.push(a);
            rngs.push(b);
        }
        Ok((HSet::set_of(&doms)?, HSet::set_of(&rngs)?))
    }

    /// True when this set is a relation assigning at most one value to each
    /// point of its domain. Non-relations simply fail the test.
    pub fn is_function(&self) -> bool {
        let mut pairs: Vec<(Element, Element)> = Vec::new();
        for m in self.elements() {
            let Element::Set(p) = m else {
                return false;
            };
            let Ok(ab) = p.pair_components() else {
                return false;
            };
            pairs.push(ab);
        }
        for i in 0..pairs.len() {
            for j in i + 1..pairs.len() {
                if pairs[i].0 == pairs[j].0 && pairs[i].1 != pairs[j].1 {
                    return false;
                }
            }
        }
        true
    }

    /// Pairs of this set crossed with `other`, in order.
    pub fn cartesian_product(&self, other: &HSet) -> Result<HSet, SetError> {
        let mut pairs = Vec::new();
        for a in self.elements() {
            for b in other.elements() {
                pairs.push(Element::Set(HSet::kpair(&a, &b)?));
            }
        }
        HSet::set_of(&pairs)
    }

    /// Tagged sum: members of `self` tagged with 0, members of `other`
    /// tagged with 1, each as a (tag, member) pair.
    pub fn disjoint_union(&self, other: &HSet) -> Result<HSet, SetError> {
        let zero = Element::Set(HSet::natural(0)?);
        let one = Element::Set(HSet::natural(1)?);
        let mut members = Vec::new();
        for e in self.elements() {
            members.push(Element::Set(HSet::kpair(&zero, &e)?));
        }
        for e in other.elements() {
            members.push(Element::Set(HSet::kpair(&one, &e)?));
        }
        HSet::set_of(&members)
    }

    /// Transitive closure: members, members of members, and so on. The
    /// result is the smallest transitive set with this set as a subset.
    pub fn tc(&self) -> Result<HSet, SetError> {
        let g = self.picture();
        // Every node except possibly the root is a member at some depth;
        // the root joins in exactly when some edge leads back to it.
        let mut reached = vec![false; g.node_count()];
        let mut stack: Vec<NodeId> = g.children(g.root()).collect();
        for &c in &stack {
            reached[c.index()] = true;
        }
        while let Some(v) = stack.pop() {
            for w in g.children(v) {
                if !reached[w.index()] {
                    reached[w.index()] = true;
                    stack.push(w);
                }
            }
        }
        let members: Vec<Element> = g
            .nodes()
            .filter(|v| reached[v.index()])
            .map(|v| extract(g, v))
            .collect();
        HSet::set_of(&members)
    }

    /// The smallest transitive set containing `e` as a member.
    pub fn tc_of_element(e: &Element) -> Result<HSet, SetError> {
        let mut members = vec![e.clone()];
        if let Element::Set(s) = e {
            members.extend(s.tc()?.elements());
        }
        HSet::set_of(&members)
    }

    /// Stage n of nesting `a` into itself by braces: stage 1 is {a}, and
    /// stage n+1 adds the tower {a, {a, {a, ...}}} of depth n+1 to stage n.
    /// Stage 0 is `a` itself, which is why the result is an [`Element`].
    pub fn cumulative_brace_stage(a: &Element, n: u64) -> Result<Element, SetError> {
        if n == 0 {
            return Ok(a.clone());
        }
        let mut tower = HSet::set_of(std::slice::from_ref(a))?;
        let mut stage = tower.clone();
        for _ in 2..=n {
            tower = HSet::set_of(&[a.clone(), Element::Set(tower)])?;
            stage = stage.union(&tower)?;
        }
        Ok(Element::Set(stage))
    }
}

fn extract(g: &ApGraph, node: NodeId) -> Element {
    match g.kind(node) {
        NodeKind::AtomLeaf(a) => Element::Atom(a),
        NodeKind::SetNode => Element::Set(canonicalize(g.raw().clone(), node.0)),
    }
}

/// The set (or atom) each node of `g` stands for. Bisimilar nodes get the
/// same value, and each set node's value has exactly its children's values
/// as members; this assignment is the only one with that property.
pub fn decorate(g: &ApGraph) -> Vec<Element> {
    decorate_raw(g.raw())
}

/// Decoration over a rootless graph; nodes need not all be reachable from
/// anywhere in particular.
pub(crate) fn decorate_raw(raw: &RawGraph) -> Vec<Element> {
    let (q, block_of) = bisim::quotient_raw(raw);
    let per_block: Vec<Element> = (0..q.len())
        .map(|b| match q.kinds[b] {
            NodeKind::AtomLeaf(a) => Element::Atom(a),
            NodeKind::SetNode => Element::Set(canonicalize(q.clone(), b as u32)),
        })
        .collect();
    (0..raw.len())
        .map(|v| per_block[block_of[v] as usize].clone())
        .collect()
}

impl PartialEq for HSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for HSet {}

impl std::hash::Hash for HSet {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.code.as_bytes().hash(state);
    }
}

impl PartialOrd for HSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.code.cmp(&other.0.code)
    }
}

impl fmt::Debug for HSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HSet({})", crate::dsl::print_canonical(self))
    }
}

impl fmt::Display for HSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::dsl::print_canonical(self))
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Set(s) => write!(f, "{s}"),
            Element::Atom(a) => write!(f, "{a}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(name: &str) -> Element {
        Element::Atom(Atom::intern(name).unwrap())
    }

    fn set(elements: &[Element]) -> Element {
        Element::Set(HSet::set_of(elements).unwrap())
    }

    #[test]
    fn empty_set_is_unique_and_empty() {
        assert_eq!(HSet::empty(), HSet::empty());
        assert!(HSet::empty().is_empty());
        assert_eq!(HSet::empty().elements(), Vec::new());
        assert_eq!(HSet::empty().node_count(), 1);
    }

    #[test]
    fn membership_ignores_order_and_repetition() {
        let p = atom("mem_p");
        let q = atom("mem_q");
        let a = HSet::set_of(&[p.clone(), q.clone(), p.clone()]).unwrap();
        let b = HSet::set_of(&[q.clone(), p.clone()]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cardinality(), 2);
        assert!(a.contains(&p));
        assert!(a.contains(&q));
        assert!(!a.contains(&atom("mem_r")));
    }

    #[test]
    fn omega_is_its_own_singleton() {
        let o = HSet::omega();
        assert_eq!(o.cardinality(), 1);
        assert_eq!(o.elements(), vec![Element::Set(o.clone())]);
        assert!(o.contains(&Element::Set(o.clone())));
        assert!(!o.is_well_founded());
        assert!(o.is_pure());
        assert_eq!(o.node_count(), 1);
    }

    #[test]
    fn naturals_are_nested_ordinals() {
        let two = HSet::natural(2).unwrap();
        let zero = Element::Set(HSet::natural(0).unwrap());
        let one = Element::Set(HSet::natural(1).unwrap());
        assert_eq!(HSet::natural(0).unwrap(), HSet::empty());
        assert_eq!(two.elements(), vec![zero.clone(), one.clone()]);
        assert_eq!(two, HSet::set_of(&[zero, one]).unwrap());
        assert_eq!(two.as_natural(), Ok(2));
        assert!(two.is_pure());
        assert!(two.is_well_founded());
    }

    #[test]
    fn as_natural_rejects_impostors() {
        // {0, {1}} has the right cardinality for 2 but the wrong members.
        let zero = Element::Set(HSet::natural(0).unwrap());
        let one = Element::Set(HSet::natural(1).unwrap());
        let fake = HSet::set_of(&[zero, set(&[one])]).unwrap();
        assert_eq!(fake.as_natural(), Err(SetError::NotANatural));
        assert_eq!(HSet::omega().as_natural(), Err(SetError::NotANatural));
    }

    #[test]
    fn numeral_bound_is_enforced() {
        let tight = limits::Limits {
            natural_bound: 8,
            ..Default::default()
        };
        limits::scoped(tight, || {
            assert!(HSet::natural(8).is_ok());
            let err = HSet::natural(9).unwrap_err();
            assert!(err.is_resource_limit());
        });
    }

    #[test]
    fn kuratowski_pairs_round_trip() {
        let cases = [
            (atom("kp_a"), atom("kp_b")),
            (atom("kp_a"), atom("kp_a")),
            (set(&[]), atom("kp_b")),
            (set(&[atom("kp_a")]), set(&[])),
            (
                Element::Set(HSet::omega()),
                Element::Set(HSet::natural(3).unwrap()),
            ),
        ];
        for (a, b) in cases {
            let p = HSet::kpair(&a, &b).unwrap();
            assert_eq!(p.pair_components().unwrap(), (a, b));
        }
    }

    #[test]
    fn omega_decodes_as_the_pair_of_itself() {
        // omega = {omega} = {{omega}, {omega, omega}} = kpair(omega, omega).
        let o = Element::Set(HSet::omega());
        assert_eq!(HSet::kpair(&o, &o).unwrap(), HSet::omega());
        assert_eq!(
            HSet::omega().pair_components().unwrap(),
            (o.clone(), o.clone())
        );
    }

    #[test]
    fn non_pairs_are_rejected() {
        let a = atom("np_a");
        let b = atom("np_b");
        let c = atom("np_c");
        for bad in [
            HSet::empty(),
            HSet::set_of(std::slice::from_ref(&a)).unwrap(),
            HSet::set_of(&[set(&[a.clone(), b.clone()])]).unwrap(),
            HSet::set_of(&[set(std::slice::from_ref(&a)), set(std::slice::from_ref(&b))]).unwrap(),
            HSet::set_of(&[set(std::slice::from_ref(&a)), set(&[b.clone(), c.clone()])]).unwrap(),
        ] {
            assert_eq!(bad.pair_components(), Err(SetError::NotAPair), "{bad:?}");
        }
    }

    #[test]
    fn relations_expose_domain_and_range() {
        let a = atom("dr_a");
        let b = atom("dr_b");
        let c = atom("dr_c");
        let r = HSet::set_of(&[
            Element::Set(HSet::kpair(&a, &b).unwrap()),
            Element::Set(HSet::kpair(&a, &c).unwrap()),
        ])
        .unwrap();
        let (dom, rng) = r.dom_rng().unwrap();
        assert_eq!(dom, HSet::set_of(std::slice::from_ref(&a)).unwrap());
        assert_eq!(rng, HSet::set_of(&[b.clone(), c.clone()]).unwrap());
        assert!(!r.is_function());

        let f = HSet::set_of(&[
            Element::Set(HSet::kpair(&a, &b).unwrap()),
            Element::Set(HSet::kpair(&b, &b).unwrap()),
        ])
        .unwrap();
        assert!(f.is_function());

        let junk = HSet::set_of(std::slice::from_ref(&a)).unwrap();
        assert_eq!(junk.dom_rng(), Err(SetError::NotARelation));
        assert!(!junk.is_function());
        assert!(HSet::empty().is_function());
    }

    #[test]
    fn union_and_union_all_agree() {
        let p = atom("ua_p");
        let q = atom("ua_q");
        let x = HSet::set_of(std::slice::from_ref(&p)).unwrap();
        let y = HSet::set_of(&[q.clone(), p.clone()]).unwrap();
        let both = x.union(&y).unwrap();
        assert_eq!(both, HSet::set_of(&[p.clone(), q.clone()]).unwrap());
        let nested = HSet::set_of(&[Element::Set(x), Element::Set(y), p.clone()]).unwrap();
        // The atom member contributes no members of its own.
        assert_eq!(nested.union_all().unwrap(), both);
    }

    #[test]
    fn power_set_of_small_sets() {
        let two = HSet::natural(2).unwrap();
        let ps = two.power_set().unwrap();
        assert_eq!(ps.cardinality(), 4);
        assert!(ps.contains(&Element::Set(HSet::empty())));
        assert!(ps.contains(&Element::Set(two.clone())));
        assert_eq!(HSet::empty().power_set().unwrap().cardinality(), 1);
    }

    #[test]
    fn power_set_of_omega_contains_omega() {
        // Subsets of {omega}: the empty set and {omega} = omega itself.
        let ps = HSet::omega().power_set().unwrap();
        assert_eq!(ps.cardinality(), 2);
        assert!(ps.contains(&Element::Set(HSet::empty())));
        assert!(ps.contains(&Element::Set(HSet::omega())));
    }

    #[test]
    fn power_set_bound_is_enforced() {
        let tight = limits::Limits {
            power_set_bound: 2,
            ..Default::default()
        };
        limits::scoped(tight, || {
            assert!(HSet::natural(2).unwrap().power_set().is_ok());
            let err = HSet::natural(3).unwrap().power_set().unwrap_err();
            assert!(err.is_resource_limit());
        });
    }

    #[test]
    fn transitive_closure_of_an_ordinal_is_itself() {
        let three = HSet::natural(3).unwrap();
        assert_eq!(three.tc().unwrap(), three);
    }

    #[test]
    fn transitive_closure_reaches_through_layers() {
        let p = atom("tcx_p");
        let inner = set(std::slice::from_ref(&p));
        let outer = HSet::set_of(&[set(std::slice::from_ref(&inner))]).unwrap();
        let closure = outer.tc().unwrap();
        assert_eq!(
            closure,
            HSet::set_of(&[set(std::slice::from_ref(&inner)), inner.clone(), p.clone()]).unwrap()
        );
        // tc of omega is {omega}: the loop re-enters the root.
        assert_eq!(HSet::omega().tc().unwrap(), HSet::omega());
    }

    #[test]
    fn singleton_closure_is_transitive_and_minimal() {
        let p = atom("tcs_p");
        let e = set(std::slice::from_ref(&p));
        let t = HSet::tc_of_element(&e).unwrap();
        assert_eq!(t, HSet::set_of(&[e.clone(), p.clone()]).unwrap());
        // For an atom the singleton itself is already transitive.
        assert_eq!(
            HSet::tc_of_element(&p).unwrap(),
            HSet::set_of(std::slice::from_ref(&p)).unwrap()
        );
    }

    #[test]
    fn support_collects_atoms_in_name_order() {
        let p = Atom::intern("sup_p").unwrap();
        let q = Atom::intern("sup_a").unwrap();
        let x = HSet::set_of(&[
            Element::Atom(p),
            set(&[Element::Atom(q), Element::Atom(p)]),
        ])
        .unwrap();
        assert_eq!(x.support(), vec![q, p]);
        assert!(!x.is_pure());
        assert!(x.in_v_afa(&[p, q]));
        assert!(!x.in_v_afa(&[p]));
        assert!(HSet::empty().in_v_afa(&[]));
    }

    #[test]
    fn disjoint_union_tags_sides() {
        let p = atom("du_p");
        let x = HSet::set_of(std::slice::from_ref(&p)).unwrap();
        let d = x.disjoint_union(&x).unwrap();
        assert_eq!(d.cardinality(), 2);
        let zero = Element::Set(HSet::natural(0).unwrap());
        let one = Element::Set(HSet::natural(1).unwrap());
        assert!(d.contains(&Element::Set(HSet::kpair(&zero, &p).unwrap())));
        assert!(d.contains(&Element::Set(HSet::kpair(&one, &p).unwrap())));
    }

    #[test]
    fn cartesian_product_counts_pairs() {
        let two = HSet::natural(2).unwrap();
        let prod = two.cartesian_product(&two).unwrap();
        assert_eq!(prod.cardinality(), 4);
        let zero = Element::Set(HSet::natural(0).unwrap());
        let one = Element::Set(HSet::natural(1).unwrap());
        assert!(prod.contains(&Element::Set(HSet::kpair(&zero, &one).unwrap())));
        assert_eq!(
            HSet::empty().cartesian_product(&two).unwrap(),
            HSet::empty()
        );
    }

    #[test]
    fn brace_stages_grow_one_tower_at_a_time() {
        let a = atom("br_a");
        assert_eq!(HSet::cumulative_brace_stage(&a, 0).unwrap(), a);
        let s1 = HSet::cumulative_brace_stage(&a, 1).unwrap();
        assert_eq!(s1, set(std::slice::from_ref(&a)));
        let s2 = HSet::cumulative_brace_stage(&a, 2).unwrap();
        assert_eq!(s2, set(&[a.clone(), set(std::slice::from_ref(&a))]));
        let s3 = HSet::cumulative_brace_stage(&a, 3).unwrap();
        let t2 = set(&[a.clone(), set(std::slice::from_ref(&a))]);
        assert_eq!(s3, set(&[a.clone(), set(std::slice::from_ref(&a)), t2]));
    }

    #[test]
    fn brace_stages_are_increasing_under_membership() {
        let a = atom("bi_a");
        for n in 1..6u64 {
            let lo = HSet::cumulative_brace_stage(&a, n).unwrap();
            let hi = HSet::cumulative_brace_stage(&a, n + 1).unwrap();
            let (Element::Set(lo), Element::Set(hi)) = (lo, hi) else {
                panic!("stages past 0 are sets");
            };
            for m in lo.elements() {
                assert!(hi.contains(&m), "stage {n} not below stage {}", n + 1);
            }
        }
    }

    #[test]
    fn from_graph_rejects_atom_roots() {
        let a = Atom::intern("fg_a").unwrap();
        let g = crate::graph::build_graph(vec![NodeKind::AtomLeaf(a)], &[], NodeId(0)).unwrap();
        assert_eq!(HSet::from_graph(&g), Err(SetError::AtomRoot));
    }

    #[test]
    fn decorate_assigns_members_from_children() {
        // 0 -> 1 -> 2 with 2 empty: the chain {{{}}}, {{}}, {}.
        let g = crate::graph::build_graph(
            vec![NodeKind::SetNode; 3],
            &[(NodeId(0), NodeId(1)), (NodeId(1), NodeId(2))],
            NodeId(0),
        )
        .unwrap();
        let dec = decorate(&g);
        assert_eq!(dec[2], Element::Set(HSet::empty()));
        assert_eq!(dec[1], set(&[dec[2].clone()]));
        assert_eq!(dec[0], set(&[dec[1].clone()]));
    }

    #[test]
    fn decorate_finds_omega_in_any_loop() {
        let g = crate::graph::build_graph(
            vec![NodeKind::SetNode; 2],
            &[(NodeId(0), NodeId(1)), (NodeId(1), NodeId(0))],
            NodeId(0),
        )
        .unwrap();
        let dec = decorate(&g);
        assert_eq!(dec[0], Element::Set(HSet::omega()));
        assert_eq!(dec[1], Element::Set(HSet::omega()));
    }

    #[test]
    fn node_budget_stops_builders() {
        let tight = limits::Limits {
            node_budget: 4,
            ..Default::default()
        };
        limits::scoped(tight, || {
            let a = atom("nb_a");
            let b = atom("nb_b");
            let c = atom("nb_c");
            // Root plus three atoms fits exactly.
            assert!(HSet::set_of(&[a.clone(), b.clone(), c.clone()]).is_ok());
            let d = atom("nb_d");
            let err = HSet::set_of(&[a, b, c, d]).unwrap_err();
            assert!(err.is_resource_limit());
        });
    }

    #[test]
    fn extensionality_for_nested_structures() {
        let p = atom("ext_p");
        let lhs = set(&[set(std::slice::from_ref(&p)), p.clone()]);
        let rhs = set(&[p.clone(), set(std::slice::from_ref(&p))]);
        assert_eq!(lhs, rhs);
        assert_ne!(lhs, set(std::slice::from_ref(&p)));
    }
}
