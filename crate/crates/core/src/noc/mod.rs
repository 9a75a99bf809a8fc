//! Cycle-level 3D-mesh network: seven-port routers with a BW, NPC/SA, CT
//! pipeline, look-ahead XYZ routing, stall-go flow control and wormhole
//! switching.

mod alloc;
mod flit;
mod geometry;
mod mesh;
mod router;
mod routing;
mod trace;

pub use alloc::{round_robin, Grant};
pub use flit::{Flit, FlitKind};
pub use geometry::{Coord, Dims, Port};
pub use mesh::{Mesh, MeshConfig, MeshStats, StepOutput};
pub use router::{CycleContext, InputState, RouterState, STALL_THRESHOLD};
pub use routing::{compute_next_port, lookahead_npc};
pub use trace::{TraceEvent, TraceKind};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("port {port} at router {at} leads off the mesh")]
    OffMesh { at: Coord, port: Port },
    #[error("input buffer {port} at router {at} overflowed its {capacity} slots")]
    BufferOverflow { at: Coord, port: Port, capacity: usize },
    #[error("flit injected at router {at} while its local port is stalled")]
    StallViolation { at: Coord },
    #[error("more than one flit injected at router {at} in one cycle")]
    DuplicateInjection { at: Coord },
    #[error("coordinate {at} is outside the {dims} mesh")]
    OutOfBounds { at: Coord, dims: Dims },
    #[error("invalid mesh configuration: {0}")]
    InvalidConfig(String),
}
