use std::fmt;

use super::Port;

/// Switch-allocation result for one output port: the input port granted the
/// crossbar connection, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Grant(pub Option<Port>);

impl Grant {
    pub const NONE: Grant = Grant(None);

    /// Every encodable grant: none, or one of the seven inputs.
    pub const ALL: [Grant; 8] = [
        Grant(None),
        Grant(Some(Port::Local)),
        Grant(Some(Port::East)),
        Grant(Some(Port::West)),
        Grant(Some(Port::North)),
        Grant(Some(Port::South)),
        Grant(Some(Port::Up)),
        Grant(Some(Port::Down)),
    ];

    pub fn to(input: Port) -> Grant {
        Grant(Some(input))
    }
}

impl fmt::Display for Grant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(p) => write!(f, "{p}"),
            None => f.write_str("NONE"),
        }
    }
}

/// Round-robin pick: the first requesting input at or after `pointer`,
/// wrapping around.
pub fn round_robin(requesting: [bool; Port::COUNT], pointer: usize) -> Grant {
    (0..Port::COUNT)
        .map(|k| (pointer + k) % Port::COUNT)
        .find(|&i| requesting[i])
        .map_or(Grant::NONE, |i| Grant::to(Port::from_index(i)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_first_at_or_after_pointer() {
        let mut req = [false; 7];
        assert_eq!(round_robin(req, 3), Grant::NONE);
        req[Port::East.index()] = true;
        req[Port::Up.index()] = true;
        assert_eq!(round_robin(req, 0), Grant::to(Port::East));
        assert_eq!(round_robin(req, 2), Grant::to(Port::Up));
        assert_eq!(round_robin(req, 6), Grant::to(Port::East));
    }

    /// Two inputs contending with the pointer advanced past each winner: the
    /// loser always wins the next round, from every starting pointer.
    #[test]
    fn two_requesters_alternate_from_any_state() {
        for a in 0..7 {
            for b in (0..7).filter(|&b| b != a) {
                for start in 0..7 {
                    let mut req = [false; 7];
                    req[a] = true;
                    req[b] = true;
                    let first = round_robin(req, start).0.unwrap().index();
                    assert!(first == a || first == b);
                    let second = round_robin(req, first + 1).0.unwrap().index();
                    assert_ne!(first, second);
                }
            }
        }
    }
}
