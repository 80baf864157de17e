//! Systems of set equations and their unique solutions.
//!
//! A flat system binds each indeterminate to a set of indeterminates and
//! atoms, as in x = {x, y, p}. Reading the equations as a membership graph
//! and decorating it produces the single assignment of hypersets satisfying
//! every equation; circular dependencies are as solvable as straight-line
//! ones. A generalized system allows arbitrary set expressions on the right
//! (with atoms standing in for the indeterminates) and is solved by
//! flattening into the simple form first.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::atom::{is_valid_name, Atom, NameError};
use crate::graph::{NodeKind, RawGraph};
use crate::limits;
use crate::set::{self, Element, HSet, SetError};

/// The name of an unknown in a system of equations.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Indeterminate(String);

impl Indeterminate {
    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Indeterminate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One symbol on the right-hand side of a flat equation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Var(Indeterminate),
    Atom(Atom),
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("{name:?} is declared both as an indeterminate and as an atom")]
    NameClash { name: String },
    #[error("unknown name {name:?}: not an indeterminate or a declared atom")]
    UnboundName { name: String },
    #[error("no equation for indeterminate {name:?}")]
    MissingEquation { name: String },
    #[error("two equations for {name:?}")]
    DuplicateEquation { name: String },
    #[error(transparent)]
    Name(#[from] NameError),
    #[error(transparent)]
    Set(#[from] SetError),
}

impl SystemError {
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, SystemError::Set(e) if e.is_resource_limit())
    }
}

/// A flat system: every right-hand side is a set of indeterminates and
/// declared atoms. Construction validates, so a held value is always
/// solvable.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FlatSystem {
    atoms: BTreeMap<String, Atom>,
    eqs: BTreeMap<Indeterminate, BTreeSet<Term>>,
}

impl FlatSystem {
    /// Builds and validates a flat system. Every indeterminate needs
    /// exactly one equation, no name may be both an indeterminate and an
    /// atom, and right-hand sides may only mention declared names.
    pub fn new(
        indeterminates: &[&str],
        atoms: &[Atom],
        equations: &[(&str, Vec<&str>)],
    ) -> Result<FlatSystem, SystemError> {
        let (vars, atom_map) = check_names(indeterminates, atoms)?;
        let mut eqs: BTreeMap<Indeterminate, BTreeSet<Term>> = BTreeMap::new();
        for (lhs, rhs) in equations {
            if !vars.contains(*lhs) {
                return Err(SystemError::UnboundName {
                    name: lhs.to_string(),
                });
            }
            let mut terms = BTreeSet::new();
            for name in rhs {
                terms.insert(resolve(name, &vars, &atom_map)?);
            }
            if eqs.insert(Indeterminate(lhs.to_string()), terms).is_some() {
                return Err(SystemError::DuplicateEquation {
                    name: lhs.to_string(),
                });
            }
        }
        for x in &vars {
            if !eqs.contains_key(&Indeterminate(x.clone())) {
                return Err(SystemError::MissingEquation { name: x.clone() });
            }
        }
        Ok(FlatSystem {
            atoms: atom_map,
            eqs,
        })
    }

    pub(crate) fn from_parts(
        atoms: BTreeMap<String, Atom>,
        eqs: BTreeMap<Indeterminate, BTreeSet<Term>>,
    ) -> FlatSystem {
        FlatSystem { atoms, eqs }
    }

    pub fn indeterminates(&self) -> impl Iterator<Item = &Indeterminate> {
        self.eqs.keys()
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        self.atoms.values().copied()
    }

    pub fn len(&self) -> usize {
        self.eqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eqs.is_empty()
    }

    /// Right-hand side of the equation for `name`, if declared.
    pub fn rhs(&self, name: &str) -> Option<&BTreeSet<Term>> {
        self.eqs.get(&Indeterminate(name.to_string()))
    }

    /// Solves the system. Each indeterminate becomes a node whose children
    /// are its right-hand symbols; decorating that graph yields the unique
    /// solution.
    pub fn solve(&self) -> Result<Solution, SystemError> {
        let var_id: BTreeMap<&Indeterminate, u32> = self
            .eqs
            .keys()
            .enumerate()
            .map(|(i, x)| (x, i as u32))
            .collect();
        let mut atom_id: BTreeMap<Atom, u32> = BTreeMap::new();
        let mut kinds = vec![NodeKind::SetNode; self.eqs.len()];
        for terms in self.eqs.values() {
            for t in terms {
                if let Term::Atom(a) = t {
                    atom_id.entry(*a).or_insert_with(|| {
                        let id = kinds.len() as u32;
                        kinds.push(NodeKind::AtomLeaf(*a));
                        id
                    });
                }
            }
        }
        let budget = limits::current().node_budget.min(u32::MAX as usize);
        if kinds.len() > budget {
            return Err(SystemError::Set(SetError::SizeLimit {
                what: "node budget",
                required: kinds.len() as u64,
                limit: budget as u64,
            }));
        }
        let mut children: Vec<Vec<u32>> = vec![Vec::new(); kinds.len()];
        for (x, terms) in &self.eqs {
            let v = var_id[x] as usize;
            children[v] = terms
                .iter()
                .map(|t| match t {
                    Term::Var(w) => var_id[w],
                    Term::Atom(a) => atom_id[a],
                })
                .collect();
        }
        let mut raw = RawGraph { kinds, children };
        raw.normalize();
        let values = set::decorate_raw(&raw);
        let assignment = self
            .eqs
            .keys()
            .map(|x| {
                let Element::Set(s) = values[var_id[x] as usize].clone() else {
                    unreachable!("indeterminate nodes are set nodes");
                };
                (x.clone(), s)
            })
            .collect();
        Ok(Solution { values: assignment })
    }

    /// The set of everything the solution values are made of at the first
    /// level: every value mentioned by a right-hand side and every atom
    /// mentioned by one. Equals the union of all solution values.
    pub fn solution_set(&self, sol: &Solution) -> Result<HSet, SystemError> {
        let mut members = Vec::new();
        for terms in self.eqs.values() {
            for t in terms {
                members.push(match t {
                    Term::Var(w) => {
                        let s = sol.get(w.name()).ok_or_else(|| SystemError::UnboundName {
                            name: w.name().to_string(),
                        })?;
                        Element::Set(s.clone())
                    }
                    Term::Atom(a) => Element::Atom(*a),
                });
            }
        }
        Ok(HSet::set_of(&members)?)
    }

    /// True when no indeterminate depends on itself through the equations,
    /// equivalently when every solution value is well-founded.
    pub fn is_well_founded(&self) -> bool {
        #[derive(Clone, Copy, PartialEq)]
        enum Color {
            White,
            Gray,
            Black,
        }
        let names: Vec<&Indeterminate> = self.eqs.keys().collect();
        let index: BTreeMap<&Indeterminate, usize> =
            names.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let deps: Vec<Vec<usize>> = names
            .iter()
            .map(|x| {
                self.eqs[x]
                    .iter()
                    .filter_map(|t| match t {
                        Term::Var(w) => Some(index[w]),
                        Term::Atom(_) => None,
                    })
                    .collect()
            })
            .collect();
        let mut color = vec![Color::White; names.len()];
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for s in 0..names.len() {
            if color[s] != Color::White {
                continue;
            }
            color[s] = Color::Gray;
            stack.push((s, 0));
            while let Some(&mut (v, ref mut i)) = stack.last_mut() {
                if let Some(&w) = deps[v].get(*i) {
                    *i += 1;
                    match color[w] {
                        Color::Gray => return false,
                        Color::White => {
                            color[w] = Color::Gray;
                            stack.push((w, 0));
                        }
                        Color::Black => {}
                    }
                } else {
                    color[v] = Color::Black;
                    stack.pop();
                }
            }
        }
        true
    }
}

fn check_names(
    indeterminates: &[&str],
    atoms: &[Atom],
) -> Result<(BTreeSet<String>, BTreeMap<String, Atom>), SystemError> {
    let mut vars = BTreeSet::new();
    for x in indeterminates {
        if !is_valid_name(x) {
            return Err(NameError::InvalidName {
                name: x.to_string(),
            }
            .into());
        }
        vars.insert(x.to_string());
    }
    let mut atom_map = BTreeMap::new();
    for a in atoms {
        atom_map.insert(a.name().to_string(), *a);
    }
    for x in &vars {
        if atom_map.contains_key(x) {
            return Err(SystemError::NameClash { name: x.clone() });
        }
    }
    Ok((vars, atom_map))
}

fn resolve(
    name: &str,
    vars: &BTreeSet<String>,
    atoms: &BTreeMap<String, Atom>,
) -> Result<Term, SystemError> {
    if vars.contains(name) {
        Ok(Term::Var(Indeterminate(name.to_string())))
    } else if let Some(a) = atoms.get(name) {
        Ok(Term::Atom(*a))
    } else {
        Err(SystemError::UnboundName {
            name: name.to_string(),
        })
    }
}

/// The unique solution of a system: one hyperset per indeterminate.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Solution {
    values: BTreeMap<Indeterminate, HSet>,
}

impl Solution {
    pub fn get(&self, name: &str) -> Option<&HSet> {
        self.values.get(&Indeterminate(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Indeterminate, &HSet)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A generalized system: each indeterminate is bound to an arbitrary set
/// template in which placeholder atoms (named like the indeterminates)
/// stand for the unknowns.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GenSystem {
    atoms: BTreeMap<String, Atom>,
    eqs: BTreeMap<Indeterminate, HSet>,
}

impl GenSystem {
    /// The atom standing for indeterminate `name` inside templates.
    pub fn placeholder(name: &str) -> Result<Atom, NameError> {
        Atom::intern(name)
    }

    /// Builds and validates a generalized system. Templates may mention
    /// placeholder atoms for the indeterminates and the declared atoms,
    /// nothing else.
    pub fn new(
        indeterminates: &[&str],
        atoms: &[Atom],
        equations: &[(&str, HSet)],
    ) -> Result<GenSystem, SystemError> {
        let (vars, atom_map) = check_names(indeterminates, atoms)?;
        let mut eqs: BTreeMap<Indeterminate, HSet> = BTreeMap::new();
        for (lhs, template) in equations {
            if !vars.contains(*lhs) {
                return Err(SystemError::UnboundName {
                    name: lhs.to_string(),
                });
            }
            for a in template.support() {
                let name = a.name();
                if !vars.contains(&*name) && !atom_map.contains_key(&*name) {
                    return Err(SystemError::UnboundName {
                        name: name.to_string(),
                    });
                }
            }
            if eqs
                .insert(Indeterminate(lhs.to_string()), template.clone())
                .is_some()
            {
                return Err(SystemError::DuplicateEquation {
                    name: lhs.to_string(),
                });
            }
        }
        for x in &vars {
            if !eqs.contains_key(&Indeterminate(x.clone())) {
                return Err(SystemError::MissingEquation { name: x.clone() });
            }
        }
        Ok(GenSystem {
            atoms: atom_map,
            eqs,
        })
    }

    pub fn indeterminates(&self) -> impl Iterator<Item = &Indeterminate> {
        self.eqs.keys()
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        self.atoms.values().copied()
    }

    pub fn len(&self) -> usize {
        self.eqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eqs.is_empty()
    }

    pub fn template(&self, name: &str) -> Option<&HSet> {
        self.eqs.get(&Indeterminate(name.to_string()))
    }

    /// Rewrites every template into flat equations by naming each inner set
    /// node with an internal indeterminate. Original indeterminates keep
    /// their names; internal ones look like `_0`, `_1` and never collide
    /// with declared names.
    pub fn flatten(&self) -> FlatSystem {
        let mut used: BTreeSet<String> = self.eqs.keys().map(|x| x.0.clone()).collect();
        used.extend(self.atoms.keys().cloned());
        let mut counter = 0usize;
        let mut fresh = || loop {
            let candidate = format!("_{counter}");
            counter += 1;
            if !used.contains(&candidate) {
                used.insert(candidate.clone());
                return candidate;
            }
        };
        let mut eqs: BTreeMap<Indeterminate, BTreeSet<Term>> = BTreeMap::new();
        for (x, template) in &self.eqs {
            let g = template.picture();
            let term_of: Vec<Term> = g
                .nodes()
                .map(|v| match g.kind(v) {
                    NodeKind::AtomLeaf(a) => {
                        if self.eqs.contains_key(&Indeterminate(a.name().to_string())) {
                            Term::Var(Indeterminate(a.name().to_string()))
                        } else {
                            Term::Atom(a)
                        }
                    }
                    NodeKind::SetNode => {
                        if v == g.root() {
                            Term::Var(x.clone())
                        } else {
                            Term::Var(Indeterminate(fresh()))
                        }
                    }
                })
                .collect();
            for v in g.nodes() {
                if let Term::Var(name) = &term_of[v.index()] {
                    if matches!(g.kind(v), NodeKind::SetNode) {
                        let rhs = g.children(v).map(|w| term_of[w.index()].clone()).collect();
                        eqs.insert(name.clone(), rhs);
                    }
                }
            }
        }
        FlatSystem::from_parts(self.atoms.clone(), eqs)
    }

    /// Solves by flattening, then restricts the assignment to the declared
    /// indeterminates.
    pub fn solve(&self) -> Result<Solution, SystemError> {
        let full = self.flatten().solve()?;
        Ok(Solution {
            values: full
                .values
                .into_iter()
                .filter(|(x, _)| self.eqs.contains_key(x))
                .collect(),
        })
    }

    /// True when the flattened dependency graph has no cycle.
    pub fn is_well_founded(&self) -> bool {
        self.flatten().is_well_founded()
    }
}

/// A system whose solution at the returned indeterminate is exactly `a`:
/// one equation per node of the canonical picture, each binding the node's
/// name to the set of its children's names. Indeterminates are named after
/// node ids with a prefix chosen to miss every atom in the support.
pub fn canonical_system(a: &HSet) -> Result<(GenSystem, Indeterminate), SystemError> {
    let g = a.picture();
    let support = a.support();
    let mut prefix = String::from("v");
    let numbered = |prefix: &str, name: &str| {
        name.strip_prefix(prefix)
            .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
    };
    while support.iter().any(|at| numbered(&prefix, &at.name())) {
        prefix.push('v');
    }
    let var_name = |v: u32| format!("{prefix}{v}");

    let mut names: Vec<String> = Vec::new();
    let mut equations: Vec<(String, HSet)> = Vec::new();
    for v in g.nodes() {
        if !matches!(g.kind(v), NodeKind::SetNode) {
            continue;
        }
        let name = var_name(v.0);
        let members: Vec<Element> = g
            .children(v)
            .map(|w| match g.kind(w) {
                NodeKind::SetNode => Ok(Element::Atom(Atom::intern(&var_name(w.0))?)),
                NodeKind::AtomLeaf(at) => Ok(Element::Atom(at)),
            })
            .collect::<Result<_, NameError>>()?;
        equations.push((name.clone(), HSet::set_of(&members)?));
        names.push(name);
    }
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let eq_refs: Vec<(&str, HSet)> = equations
        .iter()
        .map(|(n, t)| (n.as_str(), t.clone()))
        .collect();
    let system = GenSystem::new(&name_refs, &support, &eq_refs)?;
    Ok((system, Indeterminate(var_name(g.root().0))))
}
