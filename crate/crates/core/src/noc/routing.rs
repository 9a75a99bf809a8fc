//! Dimension-order (X, then Y, then Z) routing and its look-ahead form.

use super::{Coord, Dims, Port, SimError};

/// Output port at `at` for a packet headed to `dest`.
pub fn compute_next_port(at: Coord, dest: Coord) -> Port {
    use std::cmp::Ordering::*;
    match (dest.x.cmp(&at.x), dest.y.cmp(&at.y), dest.z.cmp(&at.z)) {
        (Greater, _, _) => Port::East,
        (Less, _, _) => Port::West,
        (Equal, Greater, _) => Port::North,
        (Equal, Less, _) => Port::South,
        (Equal, Equal, Greater) => Port::Up,
        (Equal, Equal, Less) => Port::Down,
        (Equal, Equal, Equal) => Port::Local,
    }
}

/// Routing decision the downstream router will need: the port to take at the
/// neighbor reached through `out` from `at`. Leaving through `Local` hands the
/// flit to the core, so the answer is `Local`.
pub fn lookahead_npc(dims: Dims, at: Coord, out: Port, dest: Coord) -> Result<Port, SimError> {
    if out == Port::Local {
        return Ok(Port::Local);
    }
    let next = dims.neighbor(at, out).ok_or(SimError::OffMesh { at, port: out })?;
    Ok(compute_next_port(next, dest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn local_when_arrived() {
        assert_eq!(compute_next_port(Coord::new(1, 2, 0), Coord::new(1, 2, 0)), Port::Local);
    }

    #[test]
    fn x_resolved_first() {
        assert_eq!(compute_next_port(Coord::new(0, 0, 0), Coord::new(2, 0, 0)), Port::East);
        assert_eq!(compute_next_port(Coord::new(2, 3, 3), Coord::new(0, 0, 0)), Port::West);
    }

    #[test]
    fn y_before_z() {
        assert_eq!(compute_next_port(Coord::new(3, 1, 0), Coord::new(3, 0, 2)), Port::South);
        assert_eq!(compute_next_port(Coord::new(3, 0, 0), Coord::new(3, 0, 2)), Port::Up);
    }

    #[test]
    fn lookahead_examples() {
        let dims = Dims::new(4, 4, 4);
        let origin = Coord::new(0, 0, 0);
        assert_eq!(lookahead_npc(dims, origin, Port::East, Coord::new(1, 1, 0)), Ok(Port::North));
        assert_eq!(lookahead_npc(dims, origin, Port::Local, origin), Ok(Port::Local));
        let edge = Coord::new(3, 0, 0);
        assert_eq!(
            lookahead_npc(dims, edge, Port::East, origin),
            Err(SimError::OffMesh { at: edge, port: Port::East })
        );
    }

    fn coord_in(dims: Dims) -> impl Strategy<Value = Coord> {
        (0..dims.x, 0..dims.y, 0..dims.z).prop_map(|(x, y, z)| Coord::new(x, y, z))
    }

    proptest! {
        #[test]
        fn following_routes_takes_manhattan_hops(
            (dims, src, dest) in (1u16..6, 1u16..6, 1u16..6)
                .prop_map(|(x, y, z)| Dims::new(x, y, z))
                .prop_flat_map(|d| (Just(d), coord_in(d), coord_in(d)))
        ) {
            let mut at = src;
            let mut hops = 0;
            loop {
                let port = compute_next_port(at, dest);
                if port == Port::Local {
                    break;
                }
                at = dims.neighbor(at, port).expect("minimal route stays on mesh");
                hops += 1;
            }
            prop_assert_eq!(at, dest);
            prop_assert_eq!(hops, src.manhattan(dest));
        }
    }
}
