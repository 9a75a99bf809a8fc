use std::fmt;

use super::{Coord, Port};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlitKind {
    Head,
    Body,
    Tail,
    /// One-flit packet: head and tail at once.
    Single,
}

impl FlitKind {
    /// Carries routing information and goes through switch allocation.
    pub fn is_head(self) -> bool {
        matches!(self, FlitKind::Head | FlitKind::Single)
    }

    /// Releases the wormhole reservation.
    pub fn is_tail(self) -> bool {
        matches!(self, FlitKind::Tail | FlitKind::Single)
    }

    pub fn name(self) -> &'static str {
        match self {
            FlitKind::Head => "HEAD",
            FlitKind::Body => "BODY",
            FlitKind::Tail => "TAIL",
            FlitKind::Single => "SINGLE",
        }
    }
}

impl fmt::Display for FlitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Flow-control unit.
///
/// `next_port` is the look-ahead routing field: on a head flit arriving at a
/// router it names the output port to take there. It was computed by the
/// upstream router (or the source network interface).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Flit {
    pub kind: FlitKind,
    pub dest: Coord,
    pub next_port: Port,
    pub payload: u32,
    pub packet_id: u64,
    pub seq: u16,
    /// Cycle the packet was created at its source.
    pub inject_cycle: u64,
}

impl Flit {
    /// Flits of one packet: HEAD, BODY.., TAIL, or a lone SINGLE when
    /// `length == 1`. Payload words are filled from `payload`.
    pub fn packet(
        packet_id: u64,
        dest: Coord,
        first_port: Port,
        length: u16,
        inject_cycle: u64,
        mut payload: impl FnMut(u16) -> u32,
    ) -> Vec<Flit> {
        assert!(length >= 1, "packet length must be at least one flit");
        (0..length)
            .map(|seq| {
                let kind = match (seq, length) {
                    (_, 1) => FlitKind::Single,
                    (0, _) => FlitKind::Head,
                    (s, l) if s + 1 == l => FlitKind::Tail,
                    _ => FlitKind::Body,
                };
                Flit { kind, dest, next_port: first_port, payload: payload(seq), packet_id, seq, inject_cycle }
            })
            .collect()
    }
}
