use std::sync::Arc;

use super::{
    is_local_maximizer, packing_of, Selection, SolveResult, SolverConfig, TieBreaker, TraceEvent,
    TraceKind,
};
use crate::cover::{
    conditional_weight_at, first_support_violation, induced_partition, worth, MembershipProfile,
    Partition,
};
use crate::error::{Error, Result};
use crate::setfn::{compute_costs, CostFunction, Family, Mode, SetFunction, Subset};

/// Gradient-based local search over the full power set.
///
/// The input must satisfy the support requirement: every set is supported
/// by none or all of its members. The output is a partition that is a local
/// maximizer of the worth.
pub fn local_search(
    w: &SetFunction,
    q0: &MembershipProfile,
    config: &SolverConfig,
) -> Result<SolveResult> {
    if w.mode() != Mode::Full {
        return Err(Error::Unsupported(
            "local search needs a full-mode instance; use the cost-aware search".into(),
        ));
    }
    Search::new(w, q0, config, None)?.run()
}

/// Local search over a feasible family driven by cost-adjusted weights
/// `w(A) / c(A)`, retiring every set that meets a committed block.
///
/// The support requirement is only imposed on sets of positive weight.
pub fn ls_with_cost(
    w: &SetFunction,
    q0: &MembershipProfile,
    config: &SolverConfig,
) -> Result<SolveResult> {
    let costs = compute_costs(w.family());
    Search::new(w, q0, config, Some(costs))?.run()
}

struct Search<'a> {
    w: &'a SetFunction,
    family: Arc<Family>,
    config: &'a SolverConfig,
    q: MembershipProfile,
    costs: Option<CostFunction>,
    // sets that may receive redistributed mass: subsets of a set supported in q0
    admissible: Vec<bool>,
    ties: TieBreaker,
    t: usize,
    worth_trace: Vec<f64>,
    trace: Vec<TraceEvent>,
}

impl<'a> Search<'a> {
    fn new(
        w: &'a SetFunction,
        q0: &MembershipProfile,
        config: &'a SolverConfig,
        costs: Option<CostFunction>,
    ) -> Result<Self> {
        config.validate(w.n())?;
        let family = Arc::clone(w.family_arc());
        if q0.family().members() != family.members() {
            return Err(Error::InvalidProfile(
                "initial profile references sets outside the feasible family".into(),
            ));
        }
        let tol = config.tolerance;
        let q = q0.clone();

        match &costs {
            None => {
                if let Some((a, k)) = first_support_violation(&q, tol) {
                    return Err(support_error(&family, a, k));
                }
            }
            Some(_) => {
                // only sets of positive (cost-adjusted) weight are constrained
                for a in 1..family.len() {
                    if w.weight_at(a) <= 0.0 {
                        continue;
                    }
                    let k = q.column_support(a, tol).len();
                    if k != 0 && k != family.member(a).len() {
                        return Err(support_error(&family, a, k));
                    }
                }
            }
        }

        let admissible = admissible_sets(&family, &q, tol);
        let worth_trace = vec![worth(w, &q)];
        Ok(Search {
            w,
            family,
            config,
            q,
            costs,
            admissible,
            ties: TieBreaker::new(config),
            t: 0,
            worth_trace,
            trace: Vec::new(),
        })
    }

    fn run(mut self) -> Result<SolveResult> {
        self.first_loop()?;
        let blocks = self.committed_blocks()?;
        let partition = self.second_loop(blocks)?;
        let (packing, total_weight) = packing_of(self.w, &partition);
        let local_maximizer = is_local_maximizer(self.w, &partition, self.config.tolerance)?;
        Ok(SolveResult {
            profile: self.q,
            partition,
            packing,
            total_weight,
            worth_trace: self.worth_trace,
            iterations: self.t,
            local_maximizer,
            trace: self.trace,
        })
    }

    fn step(&mut self) -> Result<()> {
        if self.t >= self.config.max_iterations {
            return Err(Error::IterationLimit(self.config.max_iterations));
        }
        self.t += 1;
        Ok(())
    }

    fn record(&mut self, loop_id: u8, selected: Option<Subset>, kind: TraceKind) {
        let wt = worth(self.w, &self.q);
        if kind != TraceKind::FallbackSingleton {
            self.worth_trace.push(wt);
        }
        self.trace.push(TraceEvent {
            t: self.t,
            loop_id,
            selected,
            worth: wt,
            kind,
        });
    }

    /// Sets whose members hold strictly between none and all of the mass.
    fn partially_supported(&self) -> Vec<usize> {
        let tol = self.config.tolerance;
        (1..self.family.len())
            .filter(|&a| {
                let size = self.family.member(a).len() as f64;
                let total = self.q.column_sum(a);
                total > tol && total < size - tol
            })
            .collect()
    }

    fn first_loop(&mut self) -> Result<()> {
        let selection = match self.costs {
            None => Selection::Sum,
            Some(_) => self.config.selection,
        };
        loop {
            let candidates = self.partially_supported();
            if candidates.is_empty() {
                return Ok(());
            }
            self.step()?;
            let search_w = match &self.costs {
                Some(c) => c.adjusted(self.w)?,
                None => self.w.clone(),
            };
            let scored: Vec<(usize, f64)> = candidates
                .iter()
                .map(|&a| {
                    let derivs = self
                        .family
                        .member(a)
                        .elements()
                        .map(|i| conditional_weight_at(&search_w, &self.q, i, a));
                    let score = match selection {
                        Selection::Sum => derivs.sum(),
                        Selection::Min => derivs.fold(f64::INFINITY, f64::min),
                    };
                    (a, score)
                })
                .collect();
            let chosen = self.ties.best(&scored, true).expect("candidates nonempty");
            let block = self.family.member(chosen);

            for i in block.elements() {
                self.q.concentrate(i, chosen);
            }
            let fallbacks = self.redistribute(&search_w, block);
            // sets meeting a committed block never receive mass again
            for a in 1..self.family.len() {
                if self.family.member(a).intersects(block) {
                    self.admissible[a] = false;
                }
            }
            if let Some(c) = &mut self.costs {
                c.update_after_block(&self.family, block);
            }
            self.record(1, Some(block), TraceKind::Select);
            for j in fallbacks {
                self.record(1, Some(Subset::singleton(j)), TraceKind::FallbackSingleton);
            }
        }
    }

    /// Moves each outside element's mass off the sets meeting `block` onto
    /// the admissible sets disjoint from it, in proportion to their weight.
    /// Returns the elements whose mass went to their singleton because every
    /// disjoint target had zero weight.
    fn redistribute(&mut self, search_w: &SetFunction, block: Subset) -> Vec<usize> {
        let family = Arc::clone(&self.family);
        let mut fallbacks = Vec::new();
        for j in self.family.ground().difference(block).elements() {
            let members = family.containing(j);
            let row = self.q.row_mut(j);
            let mut freed = 0.0;
            let mut denom = 0.0;
            for (slot, &a) in members.iter().enumerate() {
                if family.member(a).intersects(block) {
                    freed += row[slot];
                    row[slot] = 0.0;
                } else if self.admissible[a] {
                    denom += search_w.weight_at(a);
                }
            }
            if freed == 0.0 {
                continue;
            }
            if denom > 0.0 {
                for (slot, &a) in members.iter().enumerate() {
                    if !family.member(a).intersects(block) && self.admissible[a] {
                        row[slot] += freed * search_w.weight_at(a) / denom;
                    }
                }
            } else {
                let single = family
                    .index_of(Subset::singleton(j))
                    .expect("singletons are feasible");
                row[family.slot(single, j)] += freed;
                fallbacks.push(j);
            }
        }
        fallbacks
    }

    /// Blocks of the vertex profile left by the first loop.
    fn committed_blocks(&self) -> Result<Vec<Subset>> {
        let tol = self.config.tolerance;
        let p = induced_partition(&self.q, tol).map_err(|e| {
            Error::InvalidProfile(format!("first loop ended on a fractional profile: {e}"))
        })?;
        for &b in p.blocks() {
            if !self.family.contains(b) {
                return Err(Error::InvalidProfile(format!(
                    "first loop ended with block {b} supported on a larger set"
                )));
            }
        }
        Ok(p.blocks().to_vec())
    }

    /// Splits element `i` off block `A` while `w(A) < w({i}) + Σ_{B ∈ F, B ⊆ A\i} μ(B)`.
    /// When several elements qualify, the one whose removal gains most goes first.
    fn second_loop(&mut self, mut blocks: Vec<Subset>) -> Result<Partition> {
        let tol = self.config.tolerance;
        let family = Arc::clone(&self.family);
        loop {
            blocks.sort_unstable();
            // among all violations take the largest gain, then the first block and element
            let mut found: Option<(usize, usize, f64)> = None;
            for (k, &a) in blocks.iter().enumerate().filter(|(_, a)| a.len() > 1) {
                let wa = self.w.weight(a).expect("blocks are feasible");
                for i in a.elements() {
                    let single = self.w.weight(Subset::singleton(i)).unwrap_or(0.0);
                    let gain = single + self.w.closure_sum(a.without(i)) - wa;
                    if gain > tol && found.is_none_or(|(_, _, g)| gain > g + tol) {
                        found = Some((k, i, gain));
                    }
                }
            }
            let found = found.map(|(k, i, _)| (k, i));
            let Some((k, i)) = found else {
                break;
            };
            self.step()?;
            let a = blocks.swap_remove(k);
            let rest = a.without(i);
            let single = family.index_of(Subset::singleton(i)).unwrap();
            self.q.concentrate(i, single);
            blocks.push(Subset::singleton(i));
            match family.index_of(rest) {
                Some(r) => {
                    for j in rest.elements() {
                        self.q.concentrate(j, r);
                    }
                    blocks.push(rest);
                    self.record(2, Some(Subset::singleton(i)), TraceKind::Extract);
                }
                None => {
                    for j in rest.elements() {
                        let s = family.index_of(Subset::singleton(j)).unwrap();
                        self.q.concentrate(j, s);
                        blocks.push(Subset::singleton(j));
                    }
                    self.record(2, Some(Subset::singleton(i)), TraceKind::Extract);
                    self.record(2, Some(rest), TraceKind::FallbackSingleton);
                }
            }
        }
        Partition::new(self.w.n(), blocks)
    }
}

fn support_error(family: &Family, a: usize, k: usize) -> Error {
    Error::SupportRequirement {
        set: family.member(a).to_string(),
        supported: k,
        size: family.member(a).len(),
    }
}

/// Members contained in some set that carries mass in `q`.
fn admissible_sets(family: &Family, q: &MembershipProfile, tol: f64) -> Vec<bool> {
    let supported: Vec<usize> = (1..family.len())
        .filter(|&a| !q.column_support(a, tol).is_empty())
        .collect();
    match family.mode() {
        Mode::Full => {
            // downward closure by a superset-or transform
            let mut mark = vec![false; family.len()];
            for &a in &supported {
                mark[a] = true;
            }
            for bit in 0..family.n() {
                let step = 1usize << bit;
                for a in 0..mark.len() {
                    if a & step == 0 && mark[a | step] {
                        mark[a] = true;
                    }
                }
            }
            mark
        }
        Mode::Family => {
            let sets: Vec<Subset> = supported.iter().map(|&a| family.member(a)).collect();
            family
                .members()
                .iter()
                .map(|m| sets.iter().any(|s| m.is_subset_of(*s)))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{make_initial_profile, InitKind};

    fn s(e: &[usize]) -> Subset {
        Subset::from_elements(e.iter().map(|i| i - 1))
    }

    fn three_element() -> SetFunction {
        SetFunction::full(3, vec![0.0, 0.2, 0.2, 0.8, 0.2, 0.3, 0.6, 0.7]).unwrap()
    }

    fn small_family() -> SetFunction {
        let sets = [
            s(&[1, 2, 3, 4]),
            s(&[4]),
            s(&[1, 2]),
            s(&[1, 3]),
            s(&[2, 3]),
        ];
        SetFunction::from_family(4, &sets, &[3.0, 2.0, 1.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn finest_partition_is_returned_unchanged() {
        let w = three_element();
        let q = MembershipProfile::vertex(Arc::clone(w.family_arc()), &[1, 2, 4]).unwrap();
        let r = local_search(&w, &q, &SolverConfig::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.partition, Partition::finest(3));
        assert_eq!(r.profile, q);
    }

    #[test]
    fn three_element_weight_proportional() {
        let w = three_element();
        let q = make_initial_profile(&w, &InitKind::WeightProportional)
            .unwrap()
            .profile;
        let r = local_search(&w, &q, &SolverConfig::default()).unwrap();
        assert_eq!(r.partition.blocks(), &[s(&[1, 2]), s(&[3])]);
        assert!((r.total_weight - 1.0).abs() < 1e-12);
        assert!(r.local_maximizer);
    }

    #[test]
    fn second_loop_extracts_element() {
        // w(N) = 0.5 < w({3}) + w({1,2}) = 0.7
        let mut wv = vec![0.0; 8];
        wv[0b111] = 0.5;
        wv[0b100] = 0.4;
        wv[0b011] = 0.3;
        let w = SetFunction::full(3, wv).unwrap();
        // everything on N: the first loop has nothing to do
        let q = MembershipProfile::vertex(Arc::clone(w.family_arc()), &[0b111; 3]).unwrap();
        let r = local_search(&w, &q, &SolverConfig::default()).unwrap();
        assert_eq!(r.trace[0].kind, TraceKind::Extract);
        assert!(r
            .trace
            .iter()
            .any(|e| e.kind == TraceKind::Extract && e.selected == Some(s(&[3]))));
        assert_eq!(r.partition.blocks(), &[s(&[1, 2]), s(&[3])]);
        assert!((r.total_weight - 0.7).abs() < 1e-12);
        assert!(r.local_maximizer);
    }

    #[test]
    fn support_requirement_enforced() {
        let w = three_element();
        let mut rows = vec![vec![0.0; 4]; 3];
        rows[0][w.family().slot(0b011, 0)] = 0.5;
        rows[0][w.family().slot(0b001, 0)] = 0.5;
        rows[1][w.family().slot(0b010, 1)] = 1.0;
        rows[2][w.family().slot(0b100, 2)] = 1.0;
        let q = MembershipProfile::new(Arc::clone(w.family_arc()), rows).unwrap();
        assert!(matches!(
            local_search(&w, &q, &SolverConfig::default()),
            Err(Error::SupportRequirement { .. })
        ));
    }

    #[test]
    fn local_search_rejects_family_mode() {
        let w = small_family();
        let q = MembershipProfile::uniform(Arc::clone(w.family_arc()));
        assert!(matches!(
            local_search(&w, &q, &SolverConfig::default()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn restriction_to_initial_support() {
        // support on {1,2} and {3,4} only: output blocks stay inside them
        let wv: Vec<f64> = (0..16)
            .map(|a: u32| {
                if a == 0 {
                    0.0
                } else {
                    1.0 + a.count_ones() as f64
                }
            })
            .collect();
        let w = SetFunction::full(4, wv).unwrap();
        let f = w.family();
        let mut rows = vec![vec![0.0; 8]; 4];
        for (i, a, b) in [
            (0, 0b0011, 0b0001),
            (1, 0b0011, 0b0010),
            (2, 0b1100, 0b0100),
            (3, 0b1100, 0b1000),
        ] {
            rows[i][f.slot(a, i)] = 0.6;
            rows[i][f.slot(b, i)] = 0.4;
        }
        let q = MembershipProfile::new(Arc::clone(w.family_arc()), rows).unwrap();
        let r = local_search(&w, &q, &SolverConfig::default()).unwrap();
        for b in r.partition.blocks() {
            assert!(
                b.is_subset_of(s(&[1, 2])) || b.is_subset_of(s(&[3, 4])),
                "{b}"
            );
        }
    }

    #[test]
    fn cost_search_on_small_family() {
        let w = small_family();
        let costs = compute_costs(w.family());
        let q = make_initial_profile(&costs.adjusted(&w).unwrap(), &InitKind::WeightProportional)
            .unwrap()
            .profile;
        let r = ls_with_cost(&w, &q, &SolverConfig::default()).unwrap();
        assert!((r.total_weight - 3.0).abs() < 1e-12);
        assert!(r.local_maximizer);
        assert!(r.packing.contains(&s(&[4])));
    }

    #[test]
    fn single_nontrivial_member() {
        let w = SetFunction::from_family(3, &[s(&[1, 2])], &[1.0]).unwrap();
        let q = MembershipProfile::uniform(Arc::clone(w.family_arc()));
        let r = ls_with_cost(&w, &q, &SolverConfig::default()).unwrap();
        assert_eq!(r.partition.blocks(), &[s(&[1, 2]), s(&[3])]);
        assert_eq!(r.packing, vec![s(&[1, 2])]);
        assert!((r.total_weight - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k_uniform_never_extracts() {
        // all pairs of {1..4}, unit weight
        let sets: Vec<Subset> = (0..4)
            .flat_map(|i| ((i + 1)..4).map(move |j| Subset::from_elements([i, j])))
            .collect();
        let w = SetFunction::from_family(4, &sets, &vec![1.0; sets.len()]).unwrap();
        let costs = compute_costs(w.family());
        let hat = costs.adjusted(&w).unwrap();
        for &a in &sets {
            let idx = w.family().index_of(a).unwrap();
            assert!((hat.mobius()[idx] - 1.0 / costs.cost(idx) as f64).abs() < 1e-12);
        }
        let q = make_initial_profile(&hat, &InitKind::WeightProportional)
            .unwrap()
            .profile;
        let r = ls_with_cost(&w, &q, &SolverConfig::default()).unwrap();
        assert!(r.trace.iter().all(|e| e.loop_id == 1));
        assert!((r.total_weight - 2.0).abs() < 1e-12);
    }

    #[test]
    fn odd_pair_family_terminates() {
        // the leftover element must not drift back onto sets meeting a committed pair
        let sets: Vec<Subset> = (0..5)
            .flat_map(|i| ((i + 1)..5).map(move |j| Subset::from_elements([i, j])))
            .collect();
        let w = SetFunction::from_family(5, &sets, &vec![1.0; sets.len()]).unwrap();
        let hat = compute_costs(w.family()).adjusted(&w).unwrap();
        let q = make_initial_profile(&hat, &InitKind::WeightProportional)
            .unwrap()
            .profile;
        let r = ls_with_cost(&w, &q, &SolverConfig::default()).unwrap();
        assert_eq!(r.partition.blocks().len(), 3);
        assert!((r.total_weight - 2.0).abs() < 1e-12);
    }

    #[test]
    fn redistribution_keeps_rows_normalized() {
        let w = three_element();
        let q = MembershipProfile::uniform(Arc::clone(w.family_arc()));
        let r = local_search(&w, &q, &SolverConfig::default()).unwrap();
        for i in 0..3 {
            assert!((r.profile.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(r.local_maximizer);
    }
}
