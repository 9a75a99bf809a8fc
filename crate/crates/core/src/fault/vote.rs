/// Outcome of a two-of-three vote.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vote<V> {
    pub value: V,
    /// All three inputs differed; `value` is the third one.
    pub unresolved: bool,
}

/// Returns the value held by at least two inputs. When all three differ the
/// third input wins (it is the most recent recomputation) and the vote is
/// flagged unresolved.
pub fn majority_vote<V: Copy + Eq>(a: V, b: V, c: V) -> Vote<V> {
    if a == b || a == c {
        Vote { value: a, unresolved: false }
    } else if b == c {
        Vote { value: b, unresolved: false }
    } else {
        Vote { value: c, unresolved: true }
    }
}
