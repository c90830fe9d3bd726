//! Non-dominated archive maintenance, the GROUP/RANK grid and leader sampling.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::Rng;

use crate::configuration::Configuration;
use crate::mobafs::position::Position;
use crate::objectives::{ObjectiveVector, NUM_OBJECTIVES};

/// Grid cells per objective are `0..=sp`, written in base 255.
pub const GROUP_BASE: u64 = 255;
pub const MAX_SECTIONS: u32 = 254;

pub trait HasObjectives {
    fn objectives(&self) -> &ObjectiveVector;
}

impl HasObjectives for ObjectiveVector {
    fn objectives(&self) -> &ObjectiveVector {
        self
    }
}

#[derive(Debug, Clone)]
pub struct ArchiveEntry {
    pub position: Position,
    pub config: Configuration,
    pub objectives: ObjectiveVector,
    pub group: u64,
    pub rank: u64,
}

impl HasObjectives for ArchiveEntry {
    fn objectives(&self) -> &ObjectiveVector {
        &self.objectives
    }
}

/// Grid coordinates of one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridCell {
    pub bins: [u32; NUM_OBJECTIVES],
    pub group: u64,
    pub rank: u64,
}

/// Group id from per-objective bins, least significant objective first.
pub fn group_id(bins: &[u32; NUM_OBJECTIVES]) -> u64 {
    bins.iter().rev().fold(0u64, |acc, &b| acc * GROUP_BASE + b as u64)
}

/// `∏ (sp + 1 − bin)`; at least 1 because bins never exceed `sp`.
pub fn rank_of(bins: &[u32; NUM_OBJECTIVES], sp: u32) -> u64 {
    bins.iter().map(|&b| (sp + 1 - b) as u64).product()
}

/// Bins every point into `sp` sections per objective spanning the set's own
/// range: `floor(sp·(x − min)/(max − min))`, 0 on a degenerate range, capped at `sp`.
pub fn grid_cells<T: HasObjectives>(items: &[T], sp: u32) -> Vec<GridCell> {
    let mut lo = [f64::INFINITY; NUM_OBJECTIVES];
    let mut hi = [f64::NEG_INFINITY; NUM_OBJECTIVES];
    for item in items {
        for (o, v) in item.objectives().to_array().into_iter().enumerate() {
            lo[o] = lo[o].min(v);
            hi[o] = hi[o].max(v);
        }
    }
    items
        .iter()
        .map(|item| {
            let values = item.objectives().to_array();
            let mut bins = [0u32; NUM_OBJECTIVES];
            for o in 0..NUM_OBJECTIVES {
                let range = hi[o] - lo[o];
                if range > 0.0 {
                    let b = (sp as f64 * (values[o] - lo[o]) / range).floor();
                    bins[o] = (b.max(0.0) as u32).min(sp);
                }
            }
            GridCell {
                bins,
                group: group_id(&bins),
                rank: rank_of(&bins, sp),
            }
        })
        .collect()
}

/// Recomputes `group` and `rank` of every entry.
pub fn assign_cells(entries: &mut [ArchiveEntry], sp: u32) {
    let cells = grid_cells(entries, sp);
    for (e, cell) in entries.iter_mut().zip(cells) {
        e.group = cell.group;
        e.rank = cell.rank;
    }
}

fn dominated_or_equal(by: &ObjectiveVector, x: &ObjectiveVector) -> bool {
    by == x || by.dominates(x)
}

/// Merges `candidates` into `archive`, keeping only mutually non-dominated
/// entries. Equal objective vectors collapse onto the entry seen first, so
/// old entries win ties and candidates are taken in order.
pub fn update_archive<A, C>(archive: &mut Vec<A>, candidates: &[C], mut convert: impl FnMut(&C) -> A)
where
    A: HasObjectives + Sync,
    C: HasObjectives + Sync,
{
    let keep = |c: &C| {
        !archive
            .iter()
            .any(|a| dominated_or_equal(a.objectives(), c.objectives()))
    };
    #[cfg(feature = "parallel")]
    let survivors: Vec<usize> = {
        use rayon::prelude::*;
        (0..candidates.len())
            .into_par_iter()
            .filter(|&i| keep(&candidates[i]))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let survivors: Vec<usize> = (0..candidates.len()).filter(|&i| keep(&candidates[i])).collect();

    for i in survivors {
        let c = &candidates[i];
        if archive
            .iter()
            .any(|a| dominated_or_equal(a.objectives(), c.objectives()))
        {
            continue;
        }
        archive.retain(|a| !c.objectives().dominates(a.objectives()));
        archive.push(convert(c));
    }
}

/// Thins an oversized archive by grid cell: each group keeps at most its rank
/// many members, chosen uniformly, and if that still exceeds `arch_size` the
/// largest groups lose random members until it fits. Survivors stay in their
/// original order. An archive within `arch_size` is returned as is.
pub fn truncate_archive<T: HasObjectives, R: Rng + ?Sized>(
    items: Vec<T>,
    sp: u32,
    arch_size: usize,
    rng: &mut R,
) -> Vec<T> {
    if items.len() <= arch_size {
        return items;
    }
    let cells = grid_cells(&items, sp);
    let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, cell) in cells.iter().enumerate() {
        groups.entry(cell.group).or_default().push(i);
    }

    let mut kept_groups: Vec<(u64, Vec<usize>)> = Vec::with_capacity(groups.len());
    for (gid, members) in groups {
        let rank = cells[members[0]].rank as usize;
        let members = if members.len() > rank {
            index::sample(rng, members.len(), rank)
                .into_iter()
                .map(|k| members[k])
                .collect()
        } else {
            members
        };
        kept_groups.push((gid, members));
    }

    let mut total: usize = kept_groups.iter().map(|(_, m)| m.len()).sum();
    if total > arch_size {
        let mut heap: BinaryHeap<(usize, Reverse<u64>, usize)> = kept_groups
            .iter()
            .enumerate()
            .map(|(slot, (gid, m))| (m.len(), Reverse(*gid), slot))
            .collect();
        while total > arch_size {
            let (size, gid, slot) = heap.pop().expect("non-empty while over capacity");
            let members = &mut kept_groups[slot].1;
            let k = rng.random_range(0..members.len());
            members.swap_remove(k);
            total -= 1;
            if size > 1 {
                heap.push((size - 1, gid, slot));
            }
        }
    }

    let mut keep = vec![false; items.len()];
    for (_, members) in &kept_groups {
        for &i in members {
            keep[i] = true;
        }
    }
    items
        .into_iter()
        .zip(keep)
        .filter_map(|(item, k)| k.then_some(item))
        .collect()
}

/// Draws archive indices with probability proportional to rank.
#[derive(Debug, Clone)]
pub struct LeaderSampler {
    dist: Option<WeightedIndex<u64>>,
    len: usize,
}

impl LeaderSampler {
    pub fn new(archive: &[ArchiveEntry]) -> Self {
        Self::from_ranks(archive.iter().map(|e| e.rank))
    }

    pub fn from_ranks(ranks: impl IntoIterator<Item = u64>) -> Self {
        let ranks: Vec<u64> = ranks.into_iter().collect();
        let len = ranks.len();
        let dist = if len > 1 {
            WeightedIndex::new(&ranks).ok()
        } else {
            None
        };
        LeaderSampler { dist, len }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        assert!(self.len > 0, "leader selection needs a non-empty archive");
        match &self.dist {
            Some(d) => d.sample(rng),
            None if self.len == 1 => 0,
            // all-zero weights cannot occur with ranks >= 1; fall back to uniform
            None => rng.random_range(0..self.len),
        }
    }
}

/// Rank-proportional leader draw.
pub fn select_leader<'a, R: Rng + ?Sized>(archive: &'a [ArchiveEntry], rng: &mut R) -> &'a ArchiveEntry {
    &archive[LeaderSampler::new(archive).sample(rng)]
}
