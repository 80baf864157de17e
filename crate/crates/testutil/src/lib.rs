//! Reference oracles and input generators shared by the hyperset test
//! suites.
//!
//! The oracles here deliberately use the slowest, most literal algorithms:
//! fixpoint partition refinement straight from the definition of
//! bisimulation, and bottom-up evaluation of well-founded graphs into a
//! plain tree representation. Tests compare the production code against
//! these, so nothing in this crate may call back into the clever paths it
//! is checking.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hyperset::{
    build_graph, ApGraph, Atom, Element, FlatSystem, HSet, NodeId, NodeKind,
};

/// Deterministic generator for a test, seeded per call site.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Coarsest bisimulation by naive fixpoint refinement.
///
/// Start from the partition separating atoms (by identity) from set nodes,
/// then repeatedly split classes by the set of classes their members fall
/// in, until nothing moves. Runs in roughly quadratic time, which is the
/// point: it is too simple to be wrong in the same way as the fast path.
/// Returns one class id per node; ids are dense but otherwise arbitrary.
pub fn naive_partition(g: &ApGraph) -> Vec<u32> {
    let n = g.node_count();
    let mut class: Vec<u32> = {
        let mut keys: BTreeMap<Option<String>, u32> = BTreeMap::new();
        (0..n)
            .map(|v| {
                let key = match g.kind(NodeId(v as u32)) {
                    NodeKind::AtomLeaf(a) => Some(a.name().to_string()),
                    NodeKind::SetNode => None,
                };
                let next = keys.len() as u32;
                *keys.entry(key).or_insert(next)
            })
            .collect()
    };
    loop {
        let mut sigs: BTreeMap<(u32, Option<BTreeSet<u32>>), u32> = BTreeMap::new();
        let mut next: Vec<u32> = Vec::with_capacity(n);
        for v in 0..n {
            let node = NodeId(v as u32);
            let members: Option<BTreeSet<u32>> = match g.kind(node) {
                NodeKind::AtomLeaf(_) => None,
                NodeKind::SetNode => {
                    Some(g.children(node).map(|w| class[w.index()]).collect())
                }
            };
            let id = sigs.len() as u32;
            next.push(*sigs.entry((class[v], members)).or_insert(id));
        }
        if next == class {
            return class;
        }
        class = next;
    }
}

/// Whether the roots of two graphs are bisimilar, by the naive oracle.
///
/// The graphs are laid side by side under a fresh umbrella root. Extra
/// parents never affect bisimilarity, which only looks downward.
pub fn naive_bisimilar(a: &ApGraph, b: &ApGraph) -> bool {
    let (kinds, edges, roots) = combine(&[a, b]);
    let g = build_graph(kinds, &edges, NodeId(0)).expect("combined graph is valid");
    let class = naive_partition(&g);
    class[roots[0] as usize] == class[roots[1] as usize]
}

/// Concatenates graphs under a new umbrella root node 0 pointing at every
/// node of every graph. Returns kinds, edges, and each graph's root id in
/// the combined numbering.
pub fn combine(graphs: &[&ApGraph]) -> (Vec<NodeKind>, Vec<(NodeId, NodeId)>, Vec<u32>) {
    let total: usize = 1 + graphs.iter().map(|g| g.node_count()).sum::<usize>();
    let mut kinds: Vec<NodeKind> = Vec::with_capacity(total);
    kinds.push(NodeKind::SetNode);
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    let mut roots = Vec::with_capacity(graphs.len());
    let mut offset = 1u32;
    for g in graphs {
        roots.push(offset + g.root().0);
        for v in g.nodes() {
            kinds.push(g.kind(v));
            edges.push((NodeId(0), NodeId(offset + v.0)));
            for w in g.children(v) {
                edges.push((NodeId(offset + v.0), NodeId(offset + w.0)));
            }
        }
        offset += g.node_count() as u32;
    }
    (kinds, edges, roots)
}

/// Plain tree-shaped value of a well-founded set: the ground truth that a
/// decoration of an acyclic graph must match.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Val {
    Atom(String),
    Set(BTreeSet<Val>),
}

/// Evaluates every node of an acyclic graph bottom-up: leaves to their
/// atoms, set nodes to the set of their children's values. Returns None if
/// the graph has a cycle.
pub fn decorate_wf(g: &ApGraph) -> Option<Vec<Val>> {
    let n = g.node_count();
    // Kahn's algorithm over reversed edges: a node is ready once all its
    // children are evaluated.
    let mut remaining: Vec<usize> = vec![0; n];
    let mut parents: Vec<Vec<u32>> = vec![Vec::new(); n];
    for v in g.nodes() {
        for w in g.children(v) {
            remaining[v.index()] += 1;
            parents[w.index()].push(v.0);
        }
    }
    let mut vals: Vec<Option<Val>> = vec![None; n];
    let mut ready: VecDeque<u32> = (0..n as u32)
        .filter(|&v| remaining[v as usize] == 0)
        .collect();
    let mut done = 0usize;
    while let Some(v) = ready.pop_front() {
        let node = NodeId(v);
        let val = match g.kind(node) {
            NodeKind::AtomLeaf(a) => Val::Atom(a.name().to_string()),
            NodeKind::SetNode => Val::Set(
                g.children(node)
                    .map(|w| vals[w.index()].clone().expect("children are done"))
                    .collect(),
            ),
        };
        vals[v as usize] = Some(val);
        done += 1;
        for &p in &parents[v as usize] {
            remaining[p as usize] -= 1;
            if remaining[p as usize] == 0 {
                ready.push_back(p);
            }
        }
    }
    if done < n {
        return None;
    }
    Some(vals.into_iter().map(|v| v.unwrap()).collect())
}

/// Tree value of a well-founded element; None if it hides a cycle.
pub fn element_val(e: &Element) -> Option<Val> {
    match e {
        Element::Atom(a) => Some(Val::Atom(a.name().to_string())),
        Element::Set(h) => {
            let g = h.picture();
            let vals = decorate_wf(g)?;
            Some(vals[g.root().index()].clone())
        }
    }
}

/// Every total function from the members of `dom` to the members of `cod`,
/// as a set of ordered pairs. Brute force, intended for small sets.
pub fn func_space(dom: &HSet, cod: &HSet) -> Vec<HSet> {
    let d = dom.elements();
    let c = cod.elements();
    if d.is_empty() {
        return vec![HSet::empty()];
    }
    if c.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut choice = vec![0usize; d.len()];
    loop {
        let pairs: Vec<Element> = d
            .iter()
            .zip(&choice)
            .map(|(x, &i)| Element::Set(HSet::kpair(x, &c[i]).expect("small pair")))
            .collect();
        out.push(HSet::set_of(&pairs).expect("small set"));
        let mut k = 0;
        loop {
            if k == choice.len() {
                return out;
            }
            choice[k] += 1;
            if choice[k] < c.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Membership picture of the von Neumann numeral `k` with every smaller
/// numeral shared: nodes 0..=k, an edge j -> i for each i < j, root k.
/// Node i denotes the numeral i.
pub fn numeral_graph(k: u32) -> ApGraph {
    let kinds = vec![NodeKind::SetNode; (k + 1) as usize];
    let mut edges = Vec::new();
    for j in 0..=k {
        for i in 0..j {
            edges.push((NodeId(j), NodeId(i)));
        }
    }
    build_graph(kinds, &edges, NodeId(k)).expect("numeral graph is valid")
}

/// All digraphs on `n` set nodes (every one of the 2^(n*n) adjacency
/// matrices), each made accessible by an umbrella root pointing at every
/// node. Practical for n <= 4.
pub fn exhaustive_digraphs(n: u32) -> impl Iterator<Item = ApGraph> {
    assert!(n <= 4, "2^(n*n) graphs is too many beyond n = 4");
    let bits = n * n;
    (0u64..1u64 << bits).map(move |mask| {
        let mut kinds = vec![NodeKind::SetNode; (n + 1) as usize];
        kinds[n as usize] = NodeKind::SetNode;
        let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
        for i in 0..n {
            edges.push((NodeId(n), NodeId(i)));
            for j in 0..n {
                if mask >> (i * n + j) & 1 == 1 {
                    edges.push((NodeId(i), NodeId(j)));
                }
            }
        }
        build_graph(kinds, &edges, NodeId(n)).expect("exhaustive graph is valid")
    })
}

fn atom_pool(n_atoms: u32) -> Vec<Atom> {
    (0..n_atoms)
        .map(|i| Atom::intern(&format!("u{i}")).expect("pool name"))
        .collect()
}

/// Random digraph over `n_sets` set nodes and `n_atoms` atom leaves, every
/// possible set-to-anything edge drawn with probability `density`, all made
/// accessible by an umbrella root. May contain cycles.
pub fn random_digraph(rng: &mut ChaCha8Rng, n_sets: u32, n_atoms: u32, density: f64) -> ApGraph {
    let atoms = atom_pool(n_atoms);
    let total = n_sets + n_atoms;
    let mut kinds = vec![NodeKind::SetNode; (total + 1) as usize];
    for (i, &a) in atoms.iter().enumerate() {
        kinds[(n_sets + i as u32) as usize] = NodeKind::AtomLeaf(a);
    }
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for v in 0..total {
        edges.push((NodeId(total), NodeId(v)));
    }
    for v in 0..n_sets {
        for w in 0..total {
            if rng.gen_bool(density) {
                edges.push((NodeId(v), NodeId(w)));
            }
        }
    }
    build_graph(kinds, &edges, NodeId(total)).expect("random digraph is valid")
}

/// Random acyclic graph: set nodes only point at strictly larger ids, with
/// atoms sitting past the end as sinks. Rooted at node 0, which points at
/// everything, so the whole graph is kept.
///
/// Sharing makes the tree expansion of a dag exponential in the worst
/// case, and the bottom-up oracle materializes that expansion. `cap`
/// bounds each non-root node's expansion size, keeping oracle runs on
/// these graphs linear in `n_sets * cap`.
pub fn random_dag(
    rng: &mut ChaCha8Rng,
    n_sets: u32,
    n_atoms: u32,
    density: f64,
    cap: u64,
) -> ApGraph {
    let atoms = atom_pool(n_atoms);
    let total = 1 + n_sets + n_atoms;
    let mut kinds = vec![NodeKind::SetNode; total as usize];
    for (i, &a) in atoms.iter().enumerate() {
        kinds[(1 + n_sets + i as u32) as usize] = NodeKind::AtomLeaf(a);
    }
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for v in 1..total {
        edges.push((NodeId(0), NodeId(v)));
    }
    // Expansion sizes grow from the sinks up; an edge is only kept if the
    // child's expansion still fits under the parent's budget.
    let mut size: Vec<u64> = vec![1; total as usize];
    for v in (1..=n_sets).rev() {
        for w in v + 1..total {
            if rng.gen_bool(density) && size[v as usize] + size[w as usize] <= cap {
                size[v as usize] += size[w as usize];
                edges.push((NodeId(v), NodeId(w)));
            }
        }
    }
    build_graph(kinds, &edges, NodeId(0)).expect("random dag is valid")
}

/// All acyclic graphs on `n` set nodes (edges run from lower to higher id,
/// every one of the 2^(n(n-1)/2) upper-triangular matrices), each made
/// accessible by an umbrella root. Practical for n <= 6.
pub fn exhaustive_dags(n: u32) -> impl Iterator<Item = ApGraph> {
    assert!(n <= 6, "2^(n(n-1)/2) graphs is too many beyond n = 6");
    let pairs: Vec<(u32, u32)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    (0u64..1u64 << pairs.len()).map(move |mask| {
        let kinds = vec![NodeKind::SetNode; (n + 1) as usize];
        let mut edges: Vec<(NodeId, NodeId)> = (0..n).map(|i| (NodeId(n), NodeId(i))).collect();
        for (t, &(i, j)) in pairs.iter().enumerate() {
            if mask >> t & 1 == 1 {
                edges.push((NodeId(i), NodeId(j)));
            }
        }
        build_graph(kinds, &edges, NodeId(n)).expect("exhaustive dag is valid")
    })
}

/// All acyclic graphs on `n_sets` set nodes and `n_atoms` atom sinks,
/// umbrella-rooted. The edge set ranges over set-to-set pairs (lower id to
/// higher) and set-to-atom pairs, so keep `n_sets` and `n_atoms` tiny.
pub fn exhaustive_dags_with_atoms(n_sets: u32, n_atoms: u32) -> impl Iterator<Item = ApGraph> {
    let atoms = atom_pool(n_atoms);
    let mut slots: Vec<(u32, u32)> = (0..n_sets)
        .flat_map(|i| (i + 1..n_sets).map(move |j| (i, j)))
        .collect();
    for i in 0..n_sets {
        for a in 0..n_atoms {
            slots.push((i, n_sets + a));
        }
    }
    assert!(slots.len() <= 16, "exhaustive family too large");
    let total = n_sets + n_atoms;
    (0u64..1u64 << slots.len()).map(move |mask| {
        let mut kinds = vec![NodeKind::SetNode; (total + 1) as usize];
        for (i, &a) in atoms.iter().enumerate() {
            kinds[(n_sets + i as u32) as usize] = NodeKind::AtomLeaf(a);
        }
        let mut edges: Vec<(NodeId, NodeId)> =
            (0..total).map(|i| (NodeId(total), NodeId(i))).collect();
        for (t, &(i, j)) in slots.iter().enumerate() {
            if mask >> t & 1 == 1 {
                edges.push((NodeId(i), NodeId(j)));
            }
        }
        build_graph(kinds, &edges, NodeId(total)).expect("exhaustive dag is valid")
    })
}

/// The directed cycle 0 -> 1 -> ... -> n-1 -> 0, rooted at 0.
pub fn cycle_graph(n: u32) -> ApGraph {
    assert!(n > 0);
    let kinds = vec![NodeKind::SetNode; n as usize];
    let edges: Vec<(NodeId, NodeId)> = (0..n).map(|i| (NodeId(i), NodeId((i + 1) % n))).collect();
    build_graph(kinds, &edges, NodeId(0)).expect("cycle is valid")
}

/// The chain 0 -> 1 -> ... -> n-1, rooted at 0.
pub fn chain_graph(n: u32) -> ApGraph {
    assert!(n > 0);
    let kinds = vec![NodeKind::SetNode; n as usize];
    let edges: Vec<(NodeId, NodeId)> = (1..n).map(|i| (NodeId(i - 1), NodeId(i))).collect();
    build_graph(kinds, &edges, NodeId(0)).expect("chain is valid")
}

/// The complete digraph on n nodes, self-loops included, rooted at 0.
pub fn complete_graph(n: u32) -> ApGraph {
    assert!(n > 0);
    let kinds = vec![NodeKind::SetNode; n as usize];
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            edges.push((NodeId(i), NodeId(j)));
        }
    }
    build_graph(kinds, &edges, NodeId(0)).expect("complete graph is valid")
}

/// Random flat system over `n_vars` indeterminates named x0, x1, ... and a
/// pool of `n_atoms` atoms; each right-hand side is a random subset of the
/// variables and atoms.
pub fn random_flat_system(rng: &mut ChaCha8Rng, n_vars: u32, n_atoms: u32) -> FlatSystem {
    let names: Vec<String> = (0..n_vars).map(|i| format!("x{i}")).collect();
    let atoms = atom_pool(n_atoms);
    let atom_names: Vec<String> = atoms.iter().map(|a| a.name().to_string()).collect();
    let mut eqs: Vec<(&str, Vec<&str>)> = Vec::new();
    for name in &names {
        let mut rhs: Vec<&str> = Vec::new();
        for v in &names {
            if rng.gen_bool(0.4) {
                rhs.push(v);
            }
        }
        for a in &atom_names {
            if rng.gen_bool(0.3) {
                rhs.push(a);
            }
        }
        eqs.push((name, rhs));
    }
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    FlatSystem::new(&name_refs, &atoms, &eqs).expect("random system is valid")
}

/// Random hereditarily finite (possibly circular) set, built by mixing the
/// public constructors. `fuel` bounds the recursion.
pub fn random_hset(rng: &mut ChaCha8Rng, fuel: u32) -> HSet {
    if fuel == 0 {
        return match rng.gen_range(0..3) {
            0 => HSet::empty(),
            1 => HSet::omega(),
            _ => HSet::natural(rng.gen_range(0..4)).expect("small numeral"),
        };
    }
    match rng.gen_range(0..8) {
        0 => HSet::empty(),
        1 => HSet::omega(),
        2 => HSet::natural(rng.gen_range(0..6)).expect("small numeral"),
        3 => {
            let k = rng.gen_range(0..4);
            let members: Vec<Element> = (0..k).map(|_| random_element(rng, fuel - 1)).collect();
            HSet::set_of(&members).expect("small set")
        }
        4 => {
            let a = random_element(rng, fuel - 1);
            let b = random_element(rng, fuel - 1);
            HSet::kpair(&a, &b).expect("small pair")
        }
        5 => {
            let a = random_hset(rng, fuel - 1);
            let b = random_hset(rng, fuel - 1);
            a.union(&b).expect("small union")
        }
        6 => {
            // Power sets blow up fast; keep the base tiny.
            let base = HSet::natural(rng.gen_range(0..3)).expect("small numeral");
            base.power_set().expect("small power set")
        }
        _ => {
            let n_vars = rng.gen_range(1..5);
            let n_atoms = rng.gen_range(0..3);
            let sys = random_flat_system(rng, n_vars, n_atoms);
            let sol = sys.solve().expect("random system solves");
            let pick = rng.gen_range(0..sol.len());
            let value = sol.iter().nth(pick).expect("nonempty solution").1.clone();
            value
        }
    }
}

/// Random member for [`random_hset`]: mostly sets, sometimes an atom.
pub fn random_element(rng: &mut ChaCha8Rng, fuel: u32) -> Element {
    if rng.gen_bool(0.25) {
        let pool = atom_pool(4);
        Element::Atom(pool[rng.gen_range(0..pool.len())])
    } else {
        Element::Set(random_hset(rng, fuel))
    }
}
