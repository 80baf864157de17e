//! Ur-elements. An [`Atom`] is an interned name: two atoms are the same
//! object exactly when their names are equal, across every graph and set in
//! the process.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use thiserror::Error;

/// Names that the textual set language reserves as keywords. Atoms (and
/// system indeterminates) may not use them, so every value prints back in.
pub const RESERVED_NAMES: [&str; 3] = ["atoms", "let", "in"];

/// True when `s` is a usable name: a letter or underscore followed by
/// letters, digits, or underscores, and not a reserved keyword.
pub fn is_valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    let head_ok = chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
    head_ok
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED_NAMES.contains(&s)
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum NameError {
    #[error("{name:?} is not a valid name (want a letter or underscore, then letters, digits, or underscores, and no keyword)")]
    InvalidName { name: String },
}

struct Table {
    by_name: HashMap<Arc<str>, u32>,
    names: Vec<Arc<str>>,
    fresh_counter: u64,
}

fn table() -> &'static RwLock<Table> {
    static TABLE: OnceLock<RwLock<Table>> = OnceLock::new();
    TABLE.get_or_init(|| {
        RwLock::new(Table {
            by_name: HashMap::new(),
            names: Vec::new(),
            fresh_counter: 0,
        })
    })
}

/// An ur-element, identified by name.
///
/// Copyable and cheap to compare; the name lives in a process-wide intern
/// table. Ordering follows the name, not creation order.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Atom(u32);

impl Atom {
    /// Interns `name`, returning the atom that carries it.
    pub fn intern(name: &str) -> Result<Atom, NameError> {
        if !is_valid_name(name) {
            return Err(NameError::InvalidName {
                name: name.to_string(),
            });
        }
        if let Some(&id) = table().read().unwrap().by_name.get(name) {
            return Ok(Atom(id));
        }
        let mut t = table().write().unwrap();
        if let Some(&id) = t.by_name.get(name) {
            return Ok(Atom(id));
        }
        let id = t.names.len() as u32;
        let shared: Arc<str> = Arc::from(name);
        t.names.push(shared.clone());
        t.by_name.insert(shared, id);
        Ok(Atom(id))
    }

    /// The interned name.
    pub fn name(self) -> Arc<str> {
        table().read().unwrap().names[self.0 as usize].clone()
    }

    pub(crate) fn uid(self) -> u32 {
        self.0
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if self.0 == other.0 {
            std::cmp::Ordering::Equal
        } else {
            self.name().cmp(&other.name())
        }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Atom({})", self.name())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Returns an atom whose name has never been interned before and is distinct
/// from every atom in `avoid`.
///
/// The name is built from `hint` (sanitized to name shape) plus a counter
/// suffix, so `fresh("x", &[])` yields `x_0`, `x_1`, and so on as calls
/// accumulate over the life of the process.
pub fn fresh(hint: &str, avoid: &[Atom]) -> Atom {
    let mut base: String = hint
        .chars()
        .filter(|c| c.is_ascii_alphanumeric() || *c == '_')
        .collect();
    if !base.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
        base.insert(0, '_');
    }
    let mut t = table().write().unwrap();
    loop {
        let n = t.fresh_counter;
        t.fresh_counter += 1;
        let candidate = format!("{base}_{n}");
        if t.by_name.contains_key(candidate.as_str()) {
            continue;
        }
        debug_assert!(is_valid_name(&candidate));
        let id = t.names.len() as u32;
        let shared: Arc<str> = Arc::from(candidate.as_str());
        t.names.push(shared.clone());
        t.by_name.insert(shared, id);
        let atom = Atom(id);
        // A never-before-interned name cannot collide with interned atoms.
        debug_assert!(!avoid.contains(&atom));
        return atom;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_by_name() {
        let a = Atom::intern("p").unwrap();
        let b = Atom::intern("p").unwrap();
        let c = Atom::intern("q").unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(&*a.name(), "p");
    }

    #[test]
    fn ordering_follows_names() {
        let z = Atom::intern("zed").unwrap();
        let a = Atom::intern("aleph").unwrap();
        assert!(a < z);
        assert_eq!(a.cmp(&a), std::cmp::Ordering::Equal);
    }

    #[test]
    fn bad_names_are_rejected() {
        for bad in ["", "1x", "a-b", "a b", "let", "in", "atoms", "æther"] {
            assert!(Atom::intern(bad).is_err(), "{bad:?} should be rejected");
        }
        for good in ["x", "_", "_0", "Zig2", "snake_case"] {
            assert!(Atom::intern(good).is_ok(), "{good:?} should be accepted");
        }
    }

    #[test]
    fn fresh_avoids_existing_names() {
        let taken = Atom::intern("f_0").unwrap();
        let got = fresh("f", &[taken]);
        assert_ne!(got, taken);
        assert_ne!(got.name(), taken.name());
        let again = fresh("f", &[]);
        assert_ne!(again, got);
    }

    #[test]
    fn fresh_sanitizes_hints() {
        let a = fresh("weird hint!", &[]);
        assert!(is_valid_name(&a.name()));
        let b = fresh("", &[]);
        assert!(is_valid_name(&b.name()));
        let c = fresh("9lives", &[]);
        assert!(is_valid_name(&c.name()));
    }
}
