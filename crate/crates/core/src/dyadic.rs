//! Two shifted dyadic grids on the circle, interval covering, ancestor chains and the
//! heap layout used by tree-aggregated operators.
//!
//! Grid D^b (b in {0, 1/3}) at generation j >= 0 consists of the 2^j arcs
//! [2pi k/2^j + 2pi b, 2pi (k+1)/2^j + 2pi b) mod 2pi. Generation 0 is the full circle,
//! each interval splits into two children, and the across-grid offset of the two cut-point
//! lattices at every scale is h/3 or 2h/3 (h = scale), which is what makes the two grids
//! jointly cover every arc with at most a factor-6 length loss.

use crate::error::{HardyError, Result};
use crate::geometry::ArcInterval;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

pub const MAX_GENERATION: u32 = 52;

/// Which of the two shifted grids an interval belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GridShift {
    Zero,
    Third,
}

impl GridShift {
    pub const BOTH: [GridShift; 2] = [GridShift::Zero, GridShift::Third];

    /// Angular offset 2pi*b of the grid.
    pub fn offset(self) -> f64 {
        match self {
            GridShift::Zero => 0.0,
            GridShift::Third => TAU / 3.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            GridShift::Zero => "0",
            GridShift::Third => "1/3",
        }
    }
}

/// Interval (shift, generation j, index k), k in [0, 2^j).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicInterval {
    shift: GridShift,
    generation: u32,
    index: u64,
}

impl DyadicInterval {
    pub fn new(shift: GridShift, generation: u32, index: u64) -> Result<Self> {
        if generation > MAX_GENERATION {
            return Err(HardyError::InvalidConfig(format!(
                "generation {generation} exceeds the supported maximum {MAX_GENERATION}"
            )));
        }
        if index >= 1u64 << generation {
            return Err(HardyError::InvalidConfig(format!(
                "index {index} out of range for generation {generation}"
            )));
        }
        Ok(Self { shift, generation, index })
    }

    pub fn shift(&self) -> GridShift {
        self.shift
    }

    pub fn generation(&self) -> u32 {
        self.generation
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Concrete arc. The step 2pi/2^j is an exact binary scaling, and the parent/child
    /// starts agree bit-for-bit because k*(2pi/2^j) and (k/2)*(2pi/2^(j-1)) round the
    /// same exact rational once.
    pub fn materialize(&self) -> ArcInterval {
        let step = TAU / (1u64 << self.generation) as f64;
        let start = (self.shift.offset() + self.index as f64 * step).rem_euclid(TAU);
        ArcInterval::new(start, step).expect("dyadic arcs are valid")
    }

    pub fn parent(&self) -> Option<DyadicInterval> {
        (self.generation > 0).then(|| DyadicInterval {
            shift: self.shift,
            generation: self.generation - 1,
            index: self.index >> 1,
        })
    }

    pub fn children(&self) -> Result<[DyadicInterval; 2]> {
        if self.generation >= MAX_GENERATION {
            return Err(HardyError::InvalidConfig("children below the maximum generation".into()));
        }
        let j = self.generation + 1;
        Ok([
            DyadicInterval { shift: self.shift, generation: j, index: self.index << 1 },
            DyadicInterval { shift: self.shift, generation: j, index: (self.index << 1) | 1 },
        ])
    }
}

/// Index of the generation-j interval of `shift` containing angle `theta`.
pub fn angular_index(theta: f64, shift: GridShift, generation: u32) -> u64 {
    let n = 1u64 << generation;
    let frac = (theta - shift.offset()).rem_euclid(TAU) / TAU;
    ((frac * n as f64) as u64).min(n - 1)
}

/// Deepest generation j <= j_max whose boxes radially admit modulus `m`, i.e. the largest
/// j with 1 - 2^(1-j) < m (strict, matching box membership). Returns 0 for m = 0.
pub fn radial_depth(m: f64, j_max: u32) -> u32 {
    let mut j = 0u32;
    while j < j_max {
        let h = 2f64.powi(-(j as i32)); // |I| at generation j+1
        if 1.0 - h < m {
            j += 1;
        } else {
            break;
        }
    }
    j
}

/// All intervals of one grid whose box contains the point (modulus, theta), ordered by
/// generation from 0. For m = 0 only generation 0 qualifies.
pub fn ancestor_chain(modulus: f64, theta: f64, shift: GridShift, j_max: u32) -> Vec<DyadicInterval> {
    if modulus >= 1.0 {
        return Vec::new();
    }
    let deepest = if modulus == 0.0 { 0 } else { radial_depth(modulus, j_max) };
    (0..=deepest)
        .map(|j| DyadicInterval {
            shift,
            generation: j,
            index: angular_index(theta, shift, j),
        })
        .collect()
}

/// Smallest-interval two-grid cover of an arc: the deepest interval of either grid that
/// contains `arc`, preferring shift 0 and then the smaller index on ties. Guaranteed to
/// satisfy |J| <= 6 |I|: at the largest scale h >= 3|I| the two cut-point lattices are
/// h/3 apart, so an arc of length <= h/3 misses one of them entirely.
pub fn cover(arc: &ArcInterval) -> DyadicInterval {
    let mut j_hi = 0u32;
    while j_hi < MAX_GENERATION && TAU / (1u64 << (j_hi + 1)) as f64 >= arc.len_rad() {
        j_hi += 1;
    }
    for j in (0..=j_hi).rev() {
        for shift in GridShift::BOTH {
            let k = angular_index(arc.start(), shift, j);
            let cand = DyadicInterval { shift, generation: j, index: k };
            if cand.materialize().contains_arc(arc) {
                return cand;
            }
        }
    }
    DyadicInterval { shift: GridShift::Zero, generation: 0, index: 0 }
}

/// Heap layout for one grid truncated at j_max: node (j, k) at index 2^j - 1 + k.
pub fn node_index(generation: u32, index: u64) -> usize {
    ((1u64 << generation) - 1 + index) as usize
}

/// Total nodes across generations 0..=j_max: 2^(j_max+1) - 1.
pub fn node_count(j_max: u32) -> usize {
    ((1u64 << (j_max + 1)) - 1) as usize
}
