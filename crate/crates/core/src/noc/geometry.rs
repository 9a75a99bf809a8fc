use std::fmt;
use std::str::FromStr;

/// Router coordinate in a 3D mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coord {
    pub x: u16,
    pub y: u16,
    pub z: u16,
}

impl Coord {
    pub const fn new(x: u16, y: u16, z: u16) -> Self {
        Self { x, y, z }
    }

    pub fn manhattan(self, other: Coord) -> u32 {
        let d = |a: u16, b: u16| u32::from(a.abs_diff(b));
        d(self.x, other.x) + d(self.y, other.y) + d(self.z, other.z)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.x, self.y, self.z)
    }
}

/// Mesh extent along each axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub x: u16,
    pub y: u16,
    pub z: u16,
}

impl Dims {
    pub const fn new(x: u16, y: u16, z: u16) -> Self {
        Self { x, y, z }
    }

    pub fn nodes(self) -> usize {
        usize::from(self.x) * usize::from(self.y) * usize::from(self.z)
    }

    pub fn contains(self, c: Coord) -> bool {
        c.x < self.x && c.y < self.y && c.z < self.z
    }

    /// Linear router index, x fastest.
    pub fn index(self, c: Coord) -> usize {
        debug_assert!(self.contains(c));
        usize::from(c.x) + usize::from(self.x) * (usize::from(c.y) + usize::from(self.y) * usize::from(c.z))
    }

    pub fn coord(self, index: usize) -> Coord {
        let (x, y) = (usize::from(self.x), usize::from(self.y));
        Coord::new((index % x) as u16, ((index / x) % y) as u16, (index / (x * y)) as u16)
    }

    pub fn coords(self) -> impl Iterator<Item = Coord> {
        (0..self.nodes()).map(move |i| self.coord(i))
    }

    /// Neighbor across `port`, or `None` at the mesh edge. `Local` maps to
    /// the router itself.
    pub fn neighbor(self, at: Coord, port: Port) -> Option<Coord> {
        let step = |v: u16, up: bool, limit: u16| -> Option<u16> {
            if up {
                (v + 1 < limit).then_some(v + 1)
            } else {
                v.checked_sub(1)
            }
        };
        let Coord { x, y, z } = at;
        Some(match port {
            Port::Local => at,
            Port::East => Coord::new(step(x, true, self.x)?, y, z),
            Port::West => Coord::new(step(x, false, self.x)?, y, z),
            Port::North => Coord::new(x, step(y, true, self.y)?, z),
            Port::South => Coord::new(x, step(y, false, self.y)?, z),
            Port::Up => Coord::new(x, y, step(z, true, self.z)?),
            Port::Down => Coord::new(x, y, step(z, false, self.z)?),
        })
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.x, self.y, self.z)
    }
}

/// Parses `XxYxZ`, e.g. `4x4x4`.
impl FromStr for Dims {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split(['x', 'X']).collect();
        let bad = || format!("expected mesh dimensions like `4x4x4`, got `{s}`");
        if parts.len() != 3 {
            return Err(bad());
        }
        let n: Vec<u16> = parts.iter().map(|p| p.trim().parse()).collect::<Result<_, _>>().map_err(|_| bad())?;
        Ok(Dims::new(n[0], n[1], n[2]))
    }
}

/// The seven router ports: local core plus six mesh directions.
///
/// East/West move along x, North/South along y, Up/Down along z (between
/// layers).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Port {
    Local = 0,
    East = 1,
    West = 2,
    North = 3,
    South = 4,
    Up = 5,
    Down = 6,
}

impl Port {
    pub const COUNT: usize = 7;
    pub const ALL: [Port; 7] = [Port::Local, Port::East, Port::West, Port::North, Port::South, Port::Up, Port::Down];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Port {
        Self::ALL[i]
    }

    /// Port on the neighbor that receives what leaves through `self`.
    pub fn opposite(self) -> Port {
        match self {
            Port::Local => Port::Local,
            Port::East => Port::West,
            Port::West => Port::East,
            Port::North => Port::South,
            Port::South => Port::North,
            Port::Up => Port::Down,
            Port::Down => Port::Up,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Port::Local => "LOCAL",
            Port::East => "EAST",
            Port::West => "WEST",
            Port::North => "NORTH",
            Port::South => "SOUTH",
            Port::Up => "UP",
            Port::Down => "DOWN",
        }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Port {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Port::ALL.into_iter().find(|p| p.name().eq_ignore_ascii_case(s)).ok_or_else(|| format!("unknown port `{s}`"))
    }
}
