//! Minimum-cost register allocation by dynamic programming over the
//! decomposition, with a spill-free specialisation.

mod cost_model;
mod dp;

use std::collections::HashMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::liveness::{InterferenceGraph, VarId, VarTable};

pub use cost_model::{CostFileError, CostModel, SpillFree, SpillWeights, ZeroCost};
pub use dp::{
    min_cost_allocation, min_cost_allocation_with, min_registers, spill_free, spill_free_with, Feasibility, OptEntry,
    OptTable, RaDp, RaOptions, RaProblem, RaResult, RaStats,
};

/// Where a variable lives: a register or memory. Spills order first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Spill,
    Reg(u32),
}

impl Slot {
    pub fn is_spill(self) -> bool {
        self == Slot::Spill
    }

    pub fn register(self) -> Option<u32> {
        match self {
            Slot::Reg(r) => Some(r),
            Slot::Spill => None,
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Spill => f.write_str("⊥"),
            Slot::Reg(r) => write!(f, "r{r}"),
        }
    }
}

impl Serialize for Slot {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Slot::Spill => serializer.serialize_str("spill"),
            Slot::Reg(r) => serializer.serialize_u32(*r),
        }
    }
}

/// A map from a finite set of variables to slots, kept sorted by variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialAssignment {
    entries: Vec<(VarId, Slot)>,
}

impl PartialAssignment {
    pub fn new() -> PartialAssignment {
        PartialAssignment::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (VarId, Slot)>>(pairs: I) -> PartialAssignment {
        let mut entries: Vec<(VarId, Slot)> = pairs.into_iter().collect();
        entries.sort_by_key(|(v, _)| *v);
        entries.dedup_by_key(|(v, _)| *v);
        PartialAssignment { entries }
    }

    pub(crate) fn from_sorted(domain: &[VarId], slots: &[Slot]) -> PartialAssignment {
        PartialAssignment { entries: domain.iter().copied().zip(slots.iter().copied()).collect() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn domain(&self) -> impl Iterator<Item = VarId> + '_ {
        self.entries.iter().map(|(v, _)| *v)
    }

    pub fn slots(&self) -> impl Iterator<Item = Slot> + '_ {
        self.entries.iter().map(|(_, s)| *s)
    }

    pub fn pairs(&self) -> &[(VarId, Slot)] {
        &self.entries
    }

    pub fn get(&self, var: VarId) -> Option<Slot> {
        self.entries.binary_search_by_key(&var, |(v, _)| *v).ok().map(|i| self.entries[i].1)
    }

    /// Agreement on every shared variable. A spill is a decision like any other.
    pub fn compatible(&self, other: &PartialAssignment) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() && j < other.entries.len() {
            let (a, b) = (self.entries[i], other.entries[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    if a.1 != b.1 {
                        return false;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        true
    }

    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a VarId>) -> PartialAssignment {
        PartialAssignment::from_pairs(vars.into_iter().filter_map(|v| self.get(*v).map(|s| (*v, s))))
    }

    /// No two interfering variables share a register.
    pub fn is_valid(&self, ig: &InterferenceGraph) -> bool {
        self.entries.iter().enumerate().all(|(i, (u, su))| {
            su.is_spill() || self.entries[i + 1..].iter().all(|(v, sv)| su != sv || !ig.interferes(*u, *v))
        })
    }

    /// Registers relabelled by first use in variable order.
    pub fn canonicalize(&self) -> PartialAssignment {
        let order: Vec<VarId> = self.domain().collect();
        self.canonicalize_with_order(&order)
    }

    /// Registers relabelled so that, scanning `order`, they first appear as
    /// 0, 1, 2, and so on. Variables outside `order` are relabelled through
    /// the same renaming after those in it.
    pub fn canonicalize_with_order(&self, order: &[VarId]) -> PartialAssignment {
        let mut renaming: HashMap<u32, u32> = HashMap::new();
        let scan = order.iter().copied().chain(self.domain().filter(|v| !order.contains(v)));
        for var in scan {
            if let Some(Slot::Reg(r)) = self.get(var) {
                let next = renaming.len() as u32;
                renaming.entry(r).or_insert(next);
            }
        }
        PartialAssignment {
            entries: self
                .entries
                .iter()
                .map(|&(v, s)| (v, s.register().map_or(Slot::Spill, |r| Slot::Reg(renaming[&r]))))
                .collect(),
        }
    }

    pub fn to_json(&self, vars: &VarTable) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (v, s) in &self.entries {
            map.insert(vars.name(*v).to_string(), serde_json::to_value(s).expect("slot serialises"));
        }
        serde_json::Value::Object(map)
    }
}

impl fmt::Display for PartialAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, s)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "v{}→{s}", v.0)?;
        }
        f.write_str("}")
    }
}

/// Depth-first enumeration of slot vectors for `vars` (sorted), first
/// variable most significant, `⊥` before register 0 before register 1.
///
/// `fixed` holds already-decided variables that the new ones must not clash
/// with. With `fresh = Some(k)` registers `0..k` count as used and new
/// registers are only opened in increasing order, which enumerates one
/// representative per register renaming that fixes the used ones.
pub(crate) struct SlotEnumerator<'a> {
    pub vars: &'a [VarId],
    pub fixed: &'a [(VarId, Slot)],
    pub registers: u32,
    pub allow_spill: bool,
    pub fresh: Option<u32>,
    pub ig: &'a InterferenceGraph,
}

impl SlotEnumerator<'_> {
    pub fn for_each(&self, mut visit: impl FnMut(&[Slot])) {
        let mut current = Vec::with_capacity(self.vars.len());
        self.step(&mut current, self.fresh, &mut visit);
    }

    fn clashes(&self, idx: usize, slot: Slot, current: &[Slot]) -> bool {
        let var = self.vars[idx];
        if slot.is_spill() {
            return false;
        }
        self.fixed.iter().any(|(v, s)| *s == slot && self.ig.interferes(var, *v))
            || current.iter().zip(self.vars).any(|(s, v)| *s == slot && self.ig.interferes(var, *v))
    }

    fn step(&self, current: &mut Vec<Slot>, fresh: Option<u32>, visit: &mut impl FnMut(&[Slot])) {
        let idx = current.len();
        if idx == self.vars.len() {
            visit(current);
            return;
        }
        let limit = match fresh {
            Some(next) => (next + 1).min(self.registers),
            None => self.registers,
        };
        let candidates = self.allow_spill.then_some(Slot::Spill).into_iter().chain((0..limit).map(Slot::Reg));
        for slot in candidates {
            if self.clashes(idx, slot, current) {
                continue;
            }
            let next_fresh = match (fresh, slot) {
                (Some(next), Slot::Reg(r)) if r == next => Some(next + 1),
                _ => fresh,
            };
            current.push(slot);
            self.step(current, next_fresh, visit);
            current.pop();
        }
    }
}

/// Every valid map from `vars` to `[r] ∪ {⊥}`, in deterministic order.
pub fn enumerate_boundary_assignments(vars: &[VarId], r: u32, ig: &InterferenceGraph) -> Vec<PartialAssignment> {
    let mut sorted = vars.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut out = Vec::new();
    let enumerator = SlotEnumerator { vars: &sorted, fixed: &[], registers: r, allow_spill: true, fresh: None, ig };
    enumerator.for_each(|slots| out.push(PartialAssignment::from_sorted(&sorted, slots)));
    out
}

/// Free function form of [`PartialAssignment::compatible`].
pub fn compatible(f1: &PartialAssignment, f2: &PartialAssignment) -> bool {
    f1.compatible(f2)
}

/// Free function form of [`PartialAssignment::canonicalize_with_order`].
pub fn canonicalize(f: &PartialAssignment, order: &[VarId]) -> PartialAssignment {
    f.canonicalize_with_order(order)
}
