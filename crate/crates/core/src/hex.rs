//! Axial hex coordinates and the cell → AO → VO layout.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Axial offsets for headings 0..5, anticlockwise starting east.
pub const DIRECTIONS: [(i32, i32); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct HexCoord {
    pub q: i32,
    pub r: i32,
}

impl HexCoord {
    pub const fn new(q: i32, r: i32) -> Self {
        Self { q, r }
    }

    /// Adjacent cell along `heading`, taken modulo 6.
    pub fn neighbor(self, heading: u8) -> Self {
        let (dq, dr) = DIRECTIONS[(heading % 6) as usize];
        Self::new(self.q + dq, self.r + dr)
    }

    pub fn distance(self, other: Self) -> u32 {
        let dq = self.q - other.q;
        let dr = self.r - other.r;
        let ds = -dq - dr;
        dq.unsigned_abs()
            .max(dr.unsigned_abs())
            .max(ds.unsigned_abs())
    }

    pub fn is_adjacent(self, other: Self) -> bool {
        self.distance(other) == 1
    }

    fn add(self, other: Self) -> Self {
        Self::new(self.q + other.q, self.r + other.r)
    }

    fn scale(self, k: i32) -> Self {
        Self::new(self.q * k, self.r * k)
    }
}

impl fmt::Display for HexCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.q, self.r)
    }
}

/// Every cell within `radius` of `center`, in (q, r) order.
pub fn hex_cluster(center: HexCoord, radius: u32) -> Vec<HexCoord> {
    let n = radius as i32;
    let mut cells = Vec::new();
    for dq in -n..=n {
        for dr in (-n).max(-dq - n)..=n.min(-dq + n) {
            cells.push(HexCoord::new(center.q + dq, center.r + dr));
        }
    }
    cells
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AoId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VoId(pub u32);

impl fmt::Display for AoId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for VoId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Where a station currently sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Location {
    pub cell: HexCoord,
    pub ao: AoId,
    pub vo: VoId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveClass {
    SameAo,
    IntraVo,
    InterVo,
    OutOfCoverage,
}

impl MoveClass {
    pub fn as_str(self) -> &'static str {
        match self {
            MoveClass::SameAo => "same_ao",
            MoveClass::IntraVo => "intra_vo",
            MoveClass::InterVo => "inter_vo",
            MoveClass::OutOfCoverage => "out_of_coverage",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "same_ao" => MoveClass::SameAo,
            "intra_vo" => MoveClass::IntraVo,
            "inter_vo" => MoveClass::InterVo,
            "out_of_coverage" => MoveClass::OutOfCoverage,
            _ => return None,
        })
    }

    /// Handovers abort the station's running sub jobs.
    pub fn is_handover(self) -> bool {
        matches!(self, MoveClass::InterVo | MoveClass::OutOfCoverage)
    }
}

/// Immutable layout of `vo_count · aos_per_vo` AOs, each a hex cluster.
///
/// VO `v` occupies one row of `aos_per_vo` clusters; rows are stacked so the
/// whole map is a contiguous parallelogram of clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyMap {
    cells: BTreeMap<HexCoord, AoId>,
    aos: Vec<VoId>,
    vo_count: u32,
    aos_per_vo: u32,
    ao_radius: u32,
}

impl TopologyMap {
    pub fn build(vo_count: u32, aos_per_vo: u32, ao_radius: u32) -> Result<Self> {
        if vo_count == 0 || aos_per_vo == 0 {
            return Err(Error::InvalidTopology(format!(
                "need at least one VO and one AO per VO (got m={vo_count}, c={aos_per_vo})"
            )));
        }
        let r = ao_radius as i32;
        // Translation basis of the tiling by radius-r hexagons.
        let along = HexCoord::new(2 * r + 1, -r);
        let across = HexCoord::new(r, r + 1);

        let mut cells = BTreeMap::new();
        let mut aos = Vec::with_capacity((vo_count * aos_per_vo) as usize);
        for vo in 0..vo_count {
            for j in 0..aos_per_vo {
                let ao = AoId(aos.len() as u32);
                aos.push(VoId(vo));
                let center = along.scale(j as i32).add(across.scale(vo as i32));
                for cell in hex_cluster(center, ao_radius) {
                    let prev = cells.insert(cell, ao);
                    debug_assert!(prev.is_none(), "AO clusters overlap at {cell}");
                }
            }
        }
        Ok(Self {
            cells,
            aos,
            vo_count,
            aos_per_vo,
            ao_radius,
        })
    }

    pub fn vo_count(&self) -> u32 {
        self.vo_count
    }

    pub fn aos_per_vo(&self) -> u32 {
        self.aos_per_vo
    }

    pub fn ao_radius(&self) -> u32 {
        self.ao_radius
    }

    pub fn ao_count(&self) -> usize {
        self.aos.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Coverage cells in a fixed (q, r) order.
    pub fn cells(&self) -> impl Iterator<Item = (HexCoord, AoId)> + '_ {
        self.cells.iter().map(|(c, a)| (*c, *a))
    }

    pub fn ao_of(&self, cell: HexCoord) -> Option<AoId> {
        self.cells.get(&cell).copied()
    }

    pub fn vo_of(&self, ao: AoId) -> VoId {
        self.aos[ao.0 as usize]
    }

    pub fn locate(&self, cell: HexCoord) -> Option<Location> {
        self.ao_of(cell).map(|ao| Location {
            cell,
            ao,
            vo: self.vo_of(ao),
        })
    }

    pub fn aos_in_vo(&self, vo: VoId) -> impl Iterator<Item = AoId> + '_ {
        self.aos
            .iter()
            .enumerate()
            .filter(move |(_, v)| **v == vo)
            .map(|(i, _)| AoId(i as u32))
    }

    pub fn classify_transition(&self, from: HexCoord, to: HexCoord) -> Result<MoveClass> {
        let from_ao = self.ao_of(from).ok_or(Error::OutOfCoverage {
            q: from.q,
            r: from.r,
        })?;
        let Some(to_ao) = self.ao_of(to) else {
            return Ok(MoveClass::OutOfCoverage);
        };
        Ok(if from_ao == to_ao {
            MoveClass::SameAo
        } else if self.vo_of(from_ao) == self.vo_of(to_ao) {
            MoveClass::IntraVo
        } else {
            MoveClass::InterVo
        })
    }
}
