use std::sync::Arc;

use super::{Family, SetFunction, Subset};
use crate::error::Result;

/// Conflict counts `c(A)`: the number of active nonempty members meeting `A`,
/// `A` itself included.
///
/// The active flags live here rather than on [`Family`] so the family layout
/// can stay shared and immutable while a cost-aware search retires members.
#[derive(Clone, Debug, PartialEq)]
pub struct CostFunction {
    active: Vec<bool>,
    cost: Vec<u32>,
}

impl CostFunction {
    /// Costs with every member active.
    pub fn compute(family: &Family) -> CostFunction {
        let mut c = CostFunction {
            active: vec![true; family.len()],
            cost: vec![0; family.len()],
        };
        c.recount(family, |_| true);
        c
    }

    fn recount(&mut self, family: &Family, mut touch: impl FnMut(Subset) -> bool) {
        let members = family.members();
        for a in 1..members.len() {
            if !self.active[a] || !touch(members[a]) {
                continue;
            }
            let m = members[a];
            self.cost[a] = (1..members.len())
                .filter(|&b| self.active[b] && members[b].intersects(m))
                .count() as u32;
        }
    }

    /// Retires every member meeting `block` and recounts the costs of the
    /// members that remain. Costs never increase.
    pub fn update_after_block(&mut self, family: &Family, block: Subset) {
        if block.is_empty() {
            return;
        }
        let members = family.members();
        for (a, m) in members.iter().enumerate() {
            if m.intersects(block) {
                self.active[a] = false;
            }
        }
        self.recount(family, |m| !m.intersects(block));
    }

    #[inline]
    pub fn cost(&self, a: usize) -> u32 {
        self.cost[a]
    }

    pub fn costs(&self) -> &[u32] {
        &self.cost
    }

    #[inline]
    pub fn is_active(&self, a: usize) -> bool {
        self.active[a]
    }

    /// `ŵ = w / c`, with `ŵ(∅) = 0`.
    pub fn adjusted(&self, w: &SetFunction) -> Result<SetFunction> {
        let weights = w
            .weights()
            .iter()
            .zip(&self.cost)
            .map(|(&x, &c)| if c == 0 { 0.0 } else { x / c as f64 })
            .collect();
        SetFunction::over(Arc::clone(w.family_arc()), weights)
    }
}

/// Initial conflict counts over the whole family.
pub fn compute_costs(family: &Family) -> CostFunction {
    CostFunction::compute(family)
}
