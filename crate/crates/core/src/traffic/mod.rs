//! Benchmark traffic and the metrics of one simulation run.

mod metrics;
mod run;

pub use metrics::{RunMetrics, CSV_HEADER};
pub use run::{run_benchmark, run_benchmark_with, PacketOutcome, PacketStatus, RunOptions, RunOutput, TraceSink};

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::noc::{Coord, Dims, SimError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrafficError {
    #[error("a 1x1x1 mesh has no destination other than the source")]
    DegenerateMesh,
    #[error("invalid traffic spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    Uniform,
    Transpose,
    /// Operand exchange of a blocked matrix multiply: each node talks to the
    /// nodes sharing its row or column in its XY layer, in turn.
    Matmul,
}

impl Pattern {
    pub const ALL: [Pattern; 3] = [Pattern::Transpose, Pattern::Uniform, Pattern::Matmul];

    pub fn name(self) -> &'static str {
        match self {
            Pattern::Uniform => "UNIFORM",
            Pattern::Transpose => "TRANSPOSE",
            Pattern::Matmul => "MATMUL",
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "UNIFORM" => Ok(Pattern::Uniform),
            "TRANSPOSE" => Ok(Pattern::Transpose),
            "MATMUL" | "MATRIX" => Ok(Pattern::Matmul),
            _ => Err(format!("unknown traffic pattern `{s}` (UNIFORM, TRANSPOSE, MATMUL)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrafficSpec {
    pub pattern: Pattern,
    /// Zero is allowed and gives an empty run.
    pub packets_per_node: u32,
    /// Flits per packet.
    pub packet_length: u16,
    /// Cycles between packet creations at each node.
    pub injection_interval: u64,
}

impl Default for TrafficSpec {
    fn default() -> Self {
        Self { pattern: Pattern::Uniform, packets_per_node: 100, packet_length: 5, injection_interval: 20 }
    }
}

impl TrafficSpec {
    pub fn validate(&self) -> Result<(), TrafficError> {
        if self.packet_length == 0 {
            return Err(TrafficError::InvalidSpec("packet_length must be at least 1".into()));
        }
        if self.injection_interval == 0 {
            return Err(TrafficError::InvalidSpec("injection_interval must be at least 1".into()));
        }
        Ok(())
    }
}

fn uniform_other<R: Rng + ?Sized>(src: Coord, dims: Dims, rng: &mut R) -> Coord {
    let n = dims.nodes();
    let k = rng.random_range(0..n - 1);
    let s = dims.index(src);
    dims.coord(if k >= s { k + 1 } else { k })
}

/// Nodes sharing `src`'s row or column within its XY layer.
pub fn matmul_partners(src: Coord, dims: Dims) -> Vec<Coord> {
    let row = (0..dims.x).filter(|&x| x != src.x).map(|x| Coord::new(x, src.y, src.z));
    let col = (0..dims.y).filter(|&y| y != src.y).map(|y| Coord::new(src.x, y, src.z));
    row.chain(col).collect()
}

/// Destination of the `index`-th packet sent by `src`.
///
/// TRANSPOSE maps (x, y, z) to (y, x, z); nodes on the diagonal, and nodes
/// whose image falls outside a non-square layer, pick a uniform destination
/// instead. MATMUL cycles through the row and column partners and falls
/// back to uniform when the layer is a single node.
pub fn gen_destination<R: Rng + ?Sized>(
    pattern: Pattern,
    src: Coord,
    dims: Dims,
    index: u64,
    rng: &mut R,
) -> Result<Coord, TrafficError> {
    if dims.nodes() < 2 {
        return Err(TrafficError::DegenerateMesh);
    }
    Ok(match pattern {
        Pattern::Uniform => uniform_other(src, dims, rng),
        Pattern::Transpose => {
            let t = Coord::new(src.y, src.x, src.z);
            if t != src && dims.contains(t) {
                t
            } else {
                uniform_other(src, dims, rng)
            }
        }
        Pattern::Matmul => {
            let partners = matmul_partners(src, dims);
            if partners.is_empty() {
                uniform_other(src, dims, rng)
            } else {
                partners[(index % partners.len() as u64) as usize]
            }
        }
    })
}

/// Destination stream of one node: independent of every other node and of
/// network timing, so all protection modes see the same traffic per seed.
#[derive(Debug, Clone)]
pub struct DestinationStream {
    pattern: Pattern,
    src: Coord,
    dims: Dims,
    next: u64,
    rng: ChaCha8Rng,
}

impl DestinationStream {
    pub fn new(pattern: Pattern, src: Coord, dims: Dims, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(dims.index(src) as u64);
        Self { pattern, src, dims, next: 0, rng }
    }

    pub fn next_destination(&mut self) -> Result<Coord, TrafficError> {
        let d = gen_destination(self.pattern, self.src, self.dims, self.next, &mut self.rng)?;
        self.next += 1;
        Ok(d)
    }
}
