use std::fmt;

use super::{Coord, Flit, Port};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceKind {
    /// Flit written into an input buffer.
    BufferWrite,
    /// Head flit won switch allocation for an output.
    Grant,
    /// Flit left through an output port.
    Traverse,
    /// Flit handed to the local core.
    Eject,
    /// Head arrived asking for a port that disagrees with the route.
    Misroute,
    /// Allocator granted an input that was not requesting the output.
    Misforward,
    /// Flit sent off the edge of the mesh.
    Drop,
}

impl TraceKind {
    pub fn name(self) -> &'static str {
        match self {
            TraceKind::BufferWrite => "BW",
            TraceKind::Grant => "GRANT",
            TraceKind::Traverse => "CT",
            TraceKind::Eject => "EJECT",
            TraceKind::Misroute => "MISROUTE",
            TraceKind::Misforward => "MISFORWARD",
            TraceKind::Drop => "DROP",
        }
    }
}

/// One trace line: `cycle,router,event,port,packet_id,seq`. The router is
/// written `x:y:z`. Misforward lines carry no flit and leave the last two
/// fields empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub cycle: u64,
    pub router: Coord,
    pub kind: TraceKind,
    pub port: Port,
    pub flit: Option<(u64, u16)>,
}

impl TraceEvent {
    pub fn new(cycle: u64, router: Coord, kind: TraceKind, port: Port, flit: Option<&Flit>) -> Self {
        Self { cycle, router, kind, port, flit: flit.map(|f| (f.packet_id, f.seq)) }
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{},", self.cycle, self.router, self.kind.name(), self.port)?;
        match self.flit {
            Some((id, seq)) => write!(f, "{id},{seq}"),
            None => f.write_str(","),
        }
    }
}
