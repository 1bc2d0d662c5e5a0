//! Exhaustive ground truth for small instances.
//!
//! Partitions are enumerated outright (full mode) or by branching on the
//! smallest uncovered element over the feasible sets containing it (family
//! mode). The local-maximizer test here works on closure sums
//! `g(S) = Σ_{C ∈ F, C ⊆ S} μ(C)` rather than on the multilinear extension,
//! so it is an independent check of the solvers' own test.

use crate::approx::enumerate_partitions;
use crate::cover::Partition;
use crate::error::{Error, Result};
use crate::setfn::{Mode, SetFunction, Subset};

pub const MAX_ORACLE_FULL_N: usize = 10;
pub const MAX_ORACLE_NODES: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub best_partition: Partition,
    pub best_weight: f64,
    pub worst_partition: Partition,
    pub worst_weight: f64,
    pub all_local_maximizers: Vec<Partition>,
    pub count_enumerated: u64,
}

impl OracleReport {
    pub fn is_local_maximizer(&self, p: &Partition) -> bool {
        self.all_local_maximizers.binary_search(p).is_ok()
    }
}

/// Visits every partition whose blocks are all feasible.
pub fn for_each_partition(w: &SetFunction, mut visit: impl FnMut(&Partition)) -> Result<u64> {
    let n = w.n();
    match w.mode() {
        Mode::Full => {
            if n > MAX_ORACLE_FULL_N {
                return Err(Error::OracleGuard(format!(
                    "full-mode enumeration limited to n <= {MAX_ORACLE_FULL_N}, got {n}"
                )));
            }
            let mut count = 0;
            for p in enumerate_partitions(n)? {
                visit(&p);
                count += 1;
            }
            Ok(count)
        }
        Mode::Family => {
            let mut search = Branching {
                w,
                blocks: Vec::with_capacity(n),
                nodes: 0,
                count: 0,
            };
            search.run(Subset::full(n), &mut visit)?;
            Ok(search.count)
        }
    }
}

struct Branching<'a> {
    w: &'a SetFunction,
    blocks: Vec<Subset>,
    nodes: u64,
    count: u64,
}

impl Branching<'_> {
    fn run(&mut self, uncovered: Subset, visit: &mut impl FnMut(&Partition)) -> Result<()> {
        self.nodes += 1;
        if self.nodes > MAX_ORACLE_NODES {
            return Err(Error::OracleGuard(format!(
                "more than {MAX_ORACLE_NODES} search nodes"
            )));
        }
        let Some(i) = uncovered.min_element() else {
            let p = Partition::new(self.w.n(), self.blocks.clone())?;
            visit(&p);
            self.count += 1;
            return Ok(());
        };
        let family = self.w.family();
        for &a in family.containing(i) {
            let b = family.member(a);
            if b.is_subset_of(uncovered) {
                self.blocks.push(b);
                self.run(uncovered.difference(b), visit)?;
                self.blocks.pop();
            }
        }
        Ok(())
    }
}

/// All partitions with feasible blocks, in enumeration order.
pub fn feasible_partitions(w: &SetFunction) -> Result<Vec<Partition>> {
    let mut all = Vec::new();
    for_each_partition(w, |p| all.push(p.clone()))?;
    Ok(all)
}

/// Local-maximizer test for the vertex profile of `p`.
///
/// If `i` sits in block `K` and moves to another feasible `B ∋ i`, column `K`
/// loses `i` and column `B` (not a block, since it meets `K` in `i`) gains
/// exactly `i`. The worth changes by `g(K \ i) + g({i}) - g(K)`.
pub fn closure_local_maximizer(w: &SetFunction, p: &Partition, tol: f64) -> bool {
    p.blocks().iter().all(|&k| {
        k.elements().all(|i| {
            w.closure_sum(k.without(i)) + w.closure_sum(Subset::singleton(i))
                <= w.closure_sum(k) + tol
        })
    })
}

/// Enumerates every feasible-block partition and reports the extremes of the
/// partition weight together with the set of local maximizers.
pub fn oracle_best_partition(w: &SetFunction, tol: f64) -> Result<OracleReport> {
    let mut best: Option<(Partition, f64)> = None;
    let mut worst: Option<(Partition, f64)> = None;
    let mut maximizers = Vec::new();
    let count = for_each_partition(w, |p| {
        let weight = p.weight(w).expect("enumerated blocks are feasible");
        // strict comparisons keep the first partition in enumeration order
        if best.as_ref().is_none_or(|(_, b)| weight > *b + tol) {
            best = Some((p.clone(), weight));
        }
        if worst.as_ref().is_none_or(|(_, b)| weight < *b - tol) {
            worst = Some((p.clone(), weight));
        }
        if closure_local_maximizer(w, p, tol) {
            maximizers.push(p.clone());
        }
    })?;
    maximizers.sort();
    let (best_partition, best_weight) = best.expect("the finest partition is always feasible");
    let (worst_partition, worst_weight) = worst.expect("the finest partition is always feasible");
    Ok(OracleReport {
        best_partition,
        best_weight,
        worst_partition,
        worst_weight,
        all_local_maximizers: maximizers,
        count_enumerated: count,
    })
}
