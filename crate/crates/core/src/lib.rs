//! Hypersets: finitely presented sets that may contain themselves.
//!
//! Drop the demand that membership chains bottom out and a set may be a
//! member of itself, of one of its members, and so on around a cycle. Such
//! sets are pictured by [`ApGraph`]s, directed graphs with a root node whose
//! edges point from each set to its members and whose leaves may carry
//! ur-element [`Atom`]s. Two pictures denote the same set exactly when they
//! are bisimilar, so equality, canonical forms, and byte-level
//! [`CanonicalCode`]s all reduce to partition refinement ([`bisimilar`],
//! [`quotient`], [`canonical_code`]).
//!
//! The [`HSet`] type interns the canonical picture per set, making equality
//! a pointer comparison while supporting the usual constructions: pairing,
//! naturals, unions, power sets, transitive closures, relations, and
//! functions, all closed under circularity.
//!
//! Systems of set equations always have a unique solution, no matter how
//! self-referential. [`FlatSystem`] solves systems in the flat shape
//! `x = {y, z, a}`; [`GenSystem`] allows arbitrary set templates with
//! placeholders and flattens them internally. [`decorate`] recovers the set
//! each node of a graph denotes.
//!
//! A small language (see [`dsl`]) describes sets and systems textually, and
//! [`dot`] exchanges pictures with Graphviz tooling. Resource ceilings for
//! all of this live in [`limits`].

pub mod atom;
pub mod bisim;
pub mod dot;
pub mod dsl;
pub mod graph;
pub mod limits;
pub mod set;
pub mod system;

pub use atom::{fresh, is_valid_name, Atom, NameError};
pub use bisim::{
    bisimilar, canonical_code, coarsest_bisimulation, quotient, CanonicalCode, Partition,
};
pub use dot::{from_dot, from_dot_with_names, to_dot, DotError};
pub use dsl::{
    eval_expr, parse_expr, parse_system, print_canonical, print_element, DslError, SystemAst,
};
pub use graph::{
    build_graph, is_well_founded_graph, ApGraph, GraphError, NodeId, NodeKind,
};
pub use limits::Limits;
pub use set::{decorate, Element, HSet, SetError};
pub use system::{
    canonical_system, FlatSystem, GenSystem, Indeterminate, Solution, SystemError, Term,
};
