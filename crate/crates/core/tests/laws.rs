//! Algebraic laws the set operations must satisfy, checked on randomized
//! inputs. Each generator is seeded through proptest so failures replay.

use proptest::prelude::*;

use hyperset::{
    bisimilar, canonical_code, canonical_system, eval_expr, from_dot, parse_expr, parse_system,
    print_canonical, quotient, to_dot, ApGraph, Atom, Element, HSet,
};
use hyperset_testutil::{random_digraph, random_element, random_flat_system, random_hset, rng};

fn hset() -> impl Strategy<Value = HSet> {
    any::<u64>().prop_map(|seed| random_hset(&mut rng(seed), 3))
}

fn wf_hset() -> impl Strategy<Value = HSet> {
    hset().prop_filter("well-founded inputs only", HSet::is_well_founded)
}

fn element() -> impl Strategy<Value = Element> {
    any::<u64>().prop_map(|seed| random_element(&mut rng(seed), 2))
}

fn graph() -> impl Strategy<Value = ApGraph> {
    any::<u64>().prop_map(|seed| {
        let mut r = rng(seed);
        random_digraph(&mut r, 6, 2, 0.3)
    })
}

proptest! {
    #[test]
    fn extensionality_ignores_order_and_repetition(elems in prop::collection::vec(element(), 0..6), seed in any::<u64>()) {
        let forward = HSet::set_of(&elems).unwrap();
        let mut shuffled = elems.clone();
        // Deterministic shuffle from the seed.
        let mut state = seed | 1;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        if let Some(first) = elems.first() {
            shuffled.push(first.clone());
        }
        let backward = HSet::set_of(&shuffled).unwrap();
        prop_assert_eq!(&forward, &backward);
        prop_assert_eq!(forward.code(), backward.code());
    }

    #[test]
    fn equal_sets_have_equal_members_and_vice_versa(a in hset(), b in hset()) {
        let same_members = {
            let ea = a.elements();
            let eb = b.elements();
            ea.len() == eb.len() && ea.iter().all(|e| b.contains(e))
        };
        prop_assert_eq!(a == b, same_members);
    }

    #[test]
    fn membership_reports_exactly_the_elements(a in hset(), x in element()) {
        let listed = a.elements().contains(&x);
        prop_assert_eq!(a.contains(&x), listed);
    }

    #[test]
    fn pairs_are_injective(a in element(), b in element(), c in element(), d in element()) {
        let p = HSet::kpair(&a, &b).unwrap();
        let q = HSet::kpair(&c, &d).unwrap();
        prop_assert_eq!(p == q, a == c && b == d);
        let (x, y) = p.pair_components().unwrap();
        prop_assert_eq!(x, a);
        prop_assert_eq!(y, b);
    }

    #[test]
    fn union_is_idempotent_commutative_associative(a in hset(), b in hset(), c in hset()) {
        prop_assert_eq!(a.union(&a).unwrap(), a.clone());
        prop_assert_eq!(a.union(&b).unwrap(), b.union(&a).unwrap());
        let left = a.union(&b).unwrap().union(&c).unwrap();
        let right = a.union(&b.union(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn union_all_pools_the_set_members(a in hset()) {
        let mut acc = HSet::empty();
        for e in a.elements() {
            if let Element::Set(m) = e {
                acc = acc.union(&m).unwrap();
            }
        }
        prop_assert_eq!(a.union_all().unwrap(), acc);
    }

    #[test]
    fn transitive_closure_satisfies_its_recursion(x in hset()) {
        let t = x.tc().unwrap();
        // tc(x) = x joined with the closures of x's set members.
        let mut acc = x.clone();
        for e in x.elements() {
            if let Element::Set(m) = e {
                acc = acc.union(&m.tc().unwrap()).unwrap();
            }
        }
        prop_assert_eq!(&t, &acc);
        // And it is transitive: members of members are members.
        for e in t.elements() {
            if let Element::Set(m) = e {
                for inner in m.elements() {
                    prop_assert!(t.contains(&inner));
                }
            }
        }
    }

    #[test]
    fn power_set_lists_exactly_the_subsets(x in hset()) {
        prop_assume!(x.cardinality() <= 8);
        let p = x.power_set().unwrap();
        prop_assert_eq!(p.cardinality(), 1usize << x.cardinality());
        for e in p.elements() {
            let s = e.as_set().expect("power set members are sets");
            for inner in s.elements() {
                prop_assert!(x.contains(&inner));
            }
        }
        prop_assert!(p.contains(&Element::Set(HSet::empty())));
        prop_assert!(p.contains(&Element::Set(x.clone())));
    }

    #[test]
    fn products_and_tagged_sums_count_correctly(a in hset(), b in hset()) {
        prop_assume!(a.cardinality() * b.cardinality() <= 64);
        let prod = a.cartesian_product(&b).unwrap();
        prop_assert_eq!(prod.cardinality(), a.cardinality() * b.cardinality());
        let sum = a.disjoint_union(&b).unwrap();
        prop_assert_eq!(sum.cardinality(), a.cardinality() + b.cardinality());
    }

    #[test]
    fn domains_and_ranges_come_from_the_pairs(xs in prop::collection::vec((element(), element()), 0..6)) {
        let pairs: Vec<Element> = xs
            .iter()
            .map(|(x, y)| Element::Set(HSet::kpair(x, y).unwrap()))
            .collect();
        let rel = HSet::set_of(&pairs).unwrap();
        let (dom, rng_) = rel.dom_rng().unwrap();
        let expect_dom = HSet::set_of(&xs.iter().map(|(x, _)| x.clone()).collect::<Vec<_>>()).unwrap();
        let expect_rng = HSet::set_of(&xs.iter().map(|(_, y)| y.clone()).collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(dom, expect_dom);
        prop_assert_eq!(rng_, expect_rng);
    }

    #[test]
    fn naturals_grow_by_self_adjunction(n in 0u64..30) {
        let cur = HSet::natural(n).unwrap();
        let next = HSet::natural(n + 1).unwrap();
        let grown = cur.union(&HSet::set_of(&[Element::Set(cur.clone())]).unwrap()).unwrap();
        prop_assert_eq!(&next, &grown);
        prop_assert_eq!(cur.as_natural().unwrap(), n);
        prop_assert_eq!(cur.cardinality() as u64, n);
    }

    #[test]
    fn brace_stages_increase_by_membership(seed in any::<u64>(), n in 1u64..7) {
        let a = random_element(&mut rng(seed), 1);
        let cur = HSet::cumulative_brace_stage(&a, n).unwrap();
        let next = HSet::cumulative_brace_stage(&a, n + 1).unwrap();
        if let (Element::Set(c), Element::Set(nx)) = (&cur, &next) {
            for e in c.elements() {
                prop_assert!(nx.contains(&e), "stage {n} not below stage {}", n + 1);
            }
        } else {
            prop_assert!(n == 0, "stages past zero are sets");
        }
    }

    #[test]
    fn no_well_founded_set_is_a_product_with_itself(x in wf_hset()) {
        prop_assume!(!x.is_empty());
        let a = HSet::set_of(&[Element::Atom(Atom::intern("p").unwrap())]).unwrap();
        let prod = a.cartesian_product(&x).unwrap();
        prop_assert_ne!(&prod, &x);
    }

    #[test]
    fn quotient_preserves_the_set_and_is_idempotent(g in graph()) {
        let q = quotient(&g);
        prop_assert!(bisimilar(&g, &q));
        prop_assert!(q.node_count() <= g.node_count());
        let qq = quotient(&q);
        prop_assert_eq!(canonical_code(&q), canonical_code(&qq));
        prop_assert_eq!(canonical_code(&g), canonical_code(&q));
    }

    #[test]
    fn graph_equality_of_sets_is_bisimilarity(g in graph(), h in graph()) {
        let a = HSet::from_graph(&g).unwrap();
        let b = HSet::from_graph(&h).unwrap();
        prop_assert_eq!(a == b, bisimilar(&g, &h));
    }

    #[test]
    fn dot_round_trips_exactly(g in graph()) {
        let text = to_dot(&g);
        let back = from_dot(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(to_dot(&back), text);
    }

    #[test]
    fn printing_parses_back_to_the_same_set(x in hset()) {
        let text = print_canonical(&x);
        let back = eval_expr(&text).unwrap();
        prop_assert_eq!(back, Element::Set(x));
    }

    #[test]
    fn display_is_deterministic(x in hset()) {
        prop_assert_eq!(print_canonical(&x), print_canonical(&x));
        prop_assert_eq!(format!("{x}"), print_canonical(&x));
    }

    #[test]
    fn canonical_systems_solve_back_to_their_set(x in hset()) {
        let (sys, root) = canonical_system(&x).unwrap();
        let sol = sys.solve().unwrap();
        prop_assert_eq!(sol.get(root.name()).unwrap(), &x);
    }

    #[test]
    fn flat_solutions_satisfy_their_equations(seed in any::<u64>(), n in 1u32..7, k in 0u32..3) {
        let sys = random_flat_system(&mut rng(seed), n, k);
        let sol = sys.solve().unwrap();
        for x in sys.indeterminates() {
            let members: Vec<Element> = sys
                .rhs(x.name())
                .unwrap()
                .iter()
                .map(|t| match t {
                    hyperset::Term::Var(v) => Element::Set(sol.get(v.name()).unwrap().clone()),
                    hyperset::Term::Atom(a) => Element::Atom(*a),
                })
                .collect();
            let rebuilt = HSet::set_of(&members).unwrap();
            prop_assert_eq!(sol.get(x.name()).unwrap(), &rebuilt);
        }
        // The joint solution set pools every value's members and atoms.
        let pooled = sys.solution_set(&sol).unwrap();
        let mut acc = HSet::empty();
        for (_, v) in sol.iter() {
            acc = acc.union(v).unwrap();
        }
        prop_assert_eq!(pooled, acc);
        // Well-foundedness of the system matches its values.
        let all_wf = sol.iter().all(|(_, v)| v.is_well_founded());
        prop_assert_eq!(sys.is_well_founded(), all_wf);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn parser_never_panics_on_token_soup(parts in prop::collection::vec(
        prop::sample::select(vec![
            "{", "}", "<", ">", ",", ";", "=", "#", "atoms", "let", "in",
            "p", "q", "x0", "0", "12", " ", "\n", "é", "\"",
        ]),
        0..40,
    )) {
        let src = parts.join(" ");
        if let Ok(ast) = parse_system(&src) {
            if let Ok(sys) = ast.to_system() {
                let _ = sys.solve();
            }
        }
        if let Ok(_expr) = parse_expr(&src) {
            let _ = eval_expr(&src);
        }
    }

    #[test]
    fn parser_never_panics_on_raw_bytes(src in "\\PC*") {
        let _ = parse_system(&src);
        let _ = parse_expr(&src);
    }
}
