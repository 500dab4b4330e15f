//! Lifetime-optimal speculative partial redundancy elimination.
//!
//! Given the vertices that use an expression (`U`) and those that destroy
//! its value (`I`), choose a life set `L` for a temporary holding it so that
//! the cost of the computations to insert plus the cost of keeping the
//! temporary alive is minimal.

mod dp;
mod instance;

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Sub};

use crate::cost::{format_rational, rational_from_json, rational_to_json, Rational};
use crate::spl::{Boundary, EdgeKey, SplGraph, VertexId};

pub use dp::{solve, DpRow, LospreDp, LospreError, LospreSolution};
pub use instance::{derive_instance, InstanceError, LospreInstance};

/// Lexicographically ordered pair; scalar costs leave `secondary` at zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CostK {
    pub primary: Rational,
    pub secondary: Rational,
}

impl CostK {
    pub const ZERO: CostK = CostK { primary: Rational::new_raw(0, 1), secondary: Rational::new_raw(0, 1) };

    pub fn new(primary: Rational, secondary: Rational) -> CostK {
        CostK { primary, secondary }
    }

    pub fn scalar(value: Rational) -> CostK {
        CostK::new(value, Rational::from_integer(0))
    }

    pub fn ints(primary: i64, secondary: i64) -> CostK {
        CostK::new(Rational::from_integer(primary), Rational::from_integer(secondary))
    }

    /// `[primary, secondary]`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!([rational_to_json(&self.primary), rational_to_json(&self.secondary)])
    }

    /// Accepts `[p, s]` or a bare number (secondary zero).
    pub fn from_json(value: &serde_json::Value) -> Option<CostK> {
        match value {
            serde_json::Value::Array(parts) if parts.len() == 2 => {
                Some(CostK::new(rational_from_json(&parts[0])?, rational_from_json(&parts[1])?))
            }
            serde_json::Value::Array(_) => None,
            other => rational_from_json(other).map(CostK::scalar),
        }
    }
}

impl Add for CostK {
    type Output = CostK;

    fn add(self, rhs: CostK) -> CostK {
        CostK::new(self.primary + rhs.primary, self.secondary + rhs.secondary)
    }
}

impl Sub for CostK {
    type Output = CostK;

    fn sub(self, rhs: CostK) -> CostK {
        CostK::new(self.primary - rhs.primary, self.secondary - rhs.secondary)
    }
}

impl std::iter::Sum for CostK {
    fn sum<I: Iterator<Item = CostK>>(iter: I) -> CostK {
        iter.fold(CostK::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for CostK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", format_rational(&self.primary), format_rational(&self.secondary))
    }
}

/// Subset of a node's distinguished vertices, one bit per role.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mask(pub u8);

impl Mask {
    pub const S: u8 = 1;
    pub const T: u8 = 2;
    pub const B: u8 = 4;
    pub const C: u8 = 8;
    pub const EMPTY: Mask = Mask(0);

    pub fn all() -> impl Iterator<Item = Mask> {
        (0..16u8).map(Mask)
    }

    pub fn has(self, bit: u8) -> bool {
        self.0 & bit != 0
    }

    /// Mask of `set` on `boundary`.
    pub fn of(boundary: Boundary, set: &BTreeSet<VertexId>) -> Mask {
        let bits = [Mask::S, Mask::T, Mask::B, Mask::C];
        Mask(boundary.as_array().iter().zip(bits).filter(|(v, _)| set.contains(v)).map(|(_, b)| b).sum())
    }

    /// The distinguished vertices selected by this mask.
    pub fn vertices(self, boundary: Boundary) -> impl Iterator<Item = VertexId> {
        let bits = [Mask::S, Mask::T, Mask::B, Mask::C];
        boundary.as_array().into_iter().zip(bits).filter(move |(_, b)| self.has(*b)).map(|(v, _)| v)
    }
}

impl fmt::Display for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [(Mask::S, "S"), (Mask::T, "T"), (Mask::B, "B"), (Mask::C, "C")]
            .iter()
            .filter(|(b, _)| self.has(*b))
            .map(|(_, n)| *n)
            .collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

/// Which pair of masks a compatibility check relates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaskRelation {
    /// Node mask against its first series operand: `S`, `B`, `C` agree.
    SeriesLeft,
    /// Node mask against its second series operand: `T`, `B`, `C` agree.
    SeriesRight,
    /// First operand against second: `T_v` agrees with `S_w`.
    SeriesCross,
    /// Any two of node and operands: all four bits agree.
    Parallel,
    /// A loop shares no distinguished vertex with its body.
    Loop,
}

pub fn masks_compatible(relation: MaskRelation, a: Mask, b: Mask) -> bool {
    let same = |bits: u8| a.0 & bits == b.0 & bits;
    match relation {
        MaskRelation::SeriesLeft => same(Mask::S | Mask::B | Mask::C),
        MaskRelation::SeriesRight => same(Mask::T | Mask::B | Mask::C),
        MaskRelation::SeriesCross => a.has(Mask::T) == b.has(Mask::S),
        MaskRelation::Parallel => a == b,
        MaskRelation::Loop => true,
    }
}

/// Edges where the temporary must be computed:
/// `{(x, y) ∈ E | x ∉ L ∖ I ∧ y ∈ U ∪ L}`.
pub fn calculating_set(
    graph: &SplGraph,
    uses: &BTreeSet<VertexId>,
    life: &BTreeSet<VertexId>,
    invalidating: &BTreeSet<VertexId>,
) -> BTreeSet<EdgeKey> {
    graph
        .edges()
        .iter()
        .map(|e| e.key())
        .filter(|&(x, y)| is_calculating(x, y, |v| life.contains(&v), uses, invalidating))
        .collect()
}

pub(crate) fn is_calculating(
    x: VertexId,
    y: VertexId,
    in_life: impl Fn(VertexId) -> bool,
    uses: &BTreeSet<VertexId>,
    invalidating: &BTreeSet<VertexId>,
) -> bool {
    let source_holds = in_life(x) && !invalidating.contains(&x);
    !source_holds && (uses.contains(&y) || in_life(y))
}

/// `Σ_{e ∈ C(U, L, I)} c(e) + Σ_{v ∈ L} l(v)`.
pub fn total_cost(graph: &SplGraph, inst: &LospreInstance, life: &BTreeSet<VertexId>) -> CostK {
    let computations: CostK =
        calculating_set(graph, &inst.uses, life, &inst.invalidating).into_iter().map(|e| inst.edge_cost(e)).sum();
    computations + life.iter().map(|v| inst.vertex_cost(*v)).sum()
}
