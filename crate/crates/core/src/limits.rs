//! Per-thread resource bounds for graph construction.
//!
//! Every operation that can grow a membership graph checks these bounds and
//! fails with a structured error instead of exhausting memory. The bounds are
//! thread-local so concurrent callers (including parallel test runners) can
//! tighten them independently.

use std::cell::Cell;

/// Default ceiling on the node count of any single membership graph.
pub const DEFAULT_NODE_BUDGET: usize = 1 << 22;

/// Default ceiling on the member count accepted by the power-set operation.
pub const DEFAULT_POWER_SET_BOUND: usize = 20;

/// Default ceiling on the argument of the von Neumann numeral constructor.
pub const DEFAULT_NATURAL_BOUND: u64 = 64;

/// One snapshot of all bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub node_budget: usize,
    pub power_set_bound: usize,
    pub natural_bound: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            node_budget: DEFAULT_NODE_BUDGET,
            power_set_bound: DEFAULT_POWER_SET_BOUND,
            natural_bound: DEFAULT_NATURAL_BOUND,
        }
    }
}

thread_local! {
    static CURRENT: Cell<Limits> = Cell::new(Limits::default());
}

/// Returns the bounds in effect on this thread.
pub fn current() -> Limits {
    CURRENT.with(Cell::get)
}

/// Replaces the bounds on this thread.
pub fn install(limits: Limits) {
    CURRENT.with(|c| c.set(limits));
}

/// Runs `f` with `limits` in effect, restoring the previous bounds afterwards.
pub fn scoped<T>(limits: Limits, f: impl FnOnce() -> T) -> T {
    let previous = current();
    install(limits);
    let out = f();
    install(previous);
    out
}

pub(crate) fn node_budget() -> usize {
    current().node_budget
}

pub(crate) fn power_set_bound() -> usize {
    current().power_set_bound
}

pub(crate) fn natural_bound() -> u64 {
    current().natural_bound
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_apply() {
        let l = current();
        assert_eq!(l.node_budget, DEFAULT_NODE_BUDGET);
        assert_eq!(l.power_set_bound, DEFAULT_POWER_SET_BOUND);
        assert_eq!(l.natural_bound, DEFAULT_NATURAL_BOUND);
    }

    #[test]
    fn scoped_restores() {
        let before = current();
        let tight = Limits {
            node_budget: 10,
            ..before
        };
        let seen = scoped(tight, || current().node_budget);
        assert_eq!(seen, 10);
        assert_eq!(current(), before);
    }
}
