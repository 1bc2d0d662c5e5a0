//! Search procedures over fuzzy covers.
//!
//! * [`round_up`] moves one fractional row at a time onto a best extreme
//!   point, never decreasing the worth.
//! * [`local_search`] (full mode) repeatedly commits the partially supported
//!   set with the largest summed derivative, then splits off elements whose
//!   presence lowers the worth of their block.
//! * [`ls_with_cost`] is the same skeleton driven by cost-adjusted weights
//!   `w / c`, retiring conflicting sets as blocks are committed.
//!
//! All of them end on a partition of the ground set.

mod init;
mod local;
mod roundup;
mod trace;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use init::{make_initial_profile, InitKind, InitialProfile};
pub use local::{local_search, ls_with_cost};
pub use roundup::round_up;
pub use trace::{TraceEvent, TraceKind};

use crate::cover::{conditional_weight, MembershipProfile, Partition};
use crate::error::{Error, Result};
use crate::setfn::{Mode, SetFunction, Subset, DEFAULT_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    RoundUp,
    Local,
    LocalCost,
}

/// Which extreme point `round_up` moves towards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Extremum {
    #[default]
    Max,
    Min,
}

/// How a candidate block is scored from the derivatives of its members.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Selection {
    /// Smallest member derivative (the cost-aware default).
    #[default]
    Min,
    /// Sum of member derivatives.
    Sum,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub init: InitKind,
    pub tolerance: f64,
    /// Seed for randomized tie-breaking; unused unless `randomize_ties`.
    pub seed: u64,
    pub randomize_ties: bool,
    pub max_iterations: usize,
    /// Block scoring rule in `ls_with_cost`; `local_search` always sums.
    pub selection: Selection,
    /// Direction for `round_up`.
    pub extremum: Extremum,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            algorithm: Algorithm::Local,
            init: InitKind::WeightProportional,
            tolerance: DEFAULT_TOLERANCE,
            seed: 0,
            randomize_ties: false,
            max_iterations: 10_000,
            selection: Selection::Min,
            extremum: Extremum::Max,
        }
    }
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        SolverConfig {
            algorithm,
            ..SolverConfig::default()
        }
    }

    pub fn with_init(mut self, init: InitKind) -> Self {
        self.init = init;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations < n {
            return Err(Error::InvalidArgument(format!(
                "max_iterations {} is below the ground set size {n}",
                self.max_iterations
            )));
        }
        Ok(())
    }
}

/// Outcome of a search.
#[derive(Clone, Debug)]
pub struct SolveResult {
    /// Final profile; every row is an extreme point.
    pub profile: MembershipProfile,
    pub partition: Partition,
    /// Blocks kept as the packing (synthetic members dropped).
    pub packing: Vec<Subset>,
    pub total_weight: f64,
    /// Worth of the initial profile followed by the worth after every step.
    pub worth_trace: Vec<f64>,
    pub iterations: usize,
    pub local_maximizer: bool,
    pub trace: Vec<TraceEvent>,
}

/// Runs the configured algorithm from the configured initial profile.
pub fn solve(w: &SetFunction, config: &SolverConfig) -> Result<SolveResult> {
    config.validate(w.n())?;
    match config.algorithm {
        Algorithm::Local if w.mode() != Mode::Full => {
            return Err(Error::Unsupported(
                "local search needs a full-mode instance; use the cost-aware search".into(),
            ))
        }
        _ => {}
    }
    let init = match &config.init {
        InitKind::Explicit(q) => InitialProfile {
            profile: q.clone(),
            singleton_fallbacks: Vec::new(),
        },
        kind => {
            if config.algorithm == Algorithm::LocalCost {
                let costs = crate::setfn::compute_costs(w.family());
                make_initial_profile(&costs.adjusted(w)?, kind)?
            } else {
                make_initial_profile(w, kind)?
            }
        }
    };
    let mut result = match config.algorithm {
        Algorithm::RoundUp => round_up(w, &init.profile, config)?,
        Algorithm::Local => local_search(w, &init.profile, config)?,
        Algorithm::LocalCost => ls_with_cost(w, &init.profile, config)?,
    };
    if !init.singleton_fallbacks.is_empty() {
        let w0 = result.worth_trace.first().copied().unwrap_or(0.0);
        let mut events: Vec<TraceEvent> = init
            .singleton_fallbacks
            .iter()
            .map(|&i| TraceEvent {
                t: 0,
                loop_id: 1,
                selected: Some(Subset::singleton(i)),
                worth: w0,
                kind: TraceKind::FallbackSingleton,
            })
            .collect();
        events.append(&mut result.trace);
        result.trace = events;
    }
    Ok(result)
}

/// True iff no single element can raise the worth of the partition by more
/// than `tol` by moving its whole mass onto another feasible set.
///
/// Moving to extreme rows suffices: the worth is linear in each row.
pub fn is_local_maximizer(w: &SetFunction, p: &Partition, tol: f64) -> Result<bool> {
    let q = MembershipProfile::from_partition(Arc::clone(w.family_arc()), p)?;
    Ok(is_local_maximizer_profile(w, &q, tol))
}

/// Vertex-profile form of [`is_local_maximizer`]: compares, for each `i`,
/// the derivative at the chosen set against every alternative in `F_i`.
pub fn is_local_maximizer_profile(w: &SetFunction, q: &MembershipProfile, tol: f64) -> bool {
    (0..q.n()).all(|i| {
        let grad = conditional_weight(w, q, i);
        let current: f64 = q.row(i).iter().zip(&grad.values).map(|(x, g)| x * g).sum();
        grad.values.iter().all(|&g| g <= current + tol)
    })
}

/// Picks among scored candidates: the best score, ties (within `tol`)
/// resolved by iteration order unless randomized.
pub(crate) struct TieBreaker {
    rng: Option<ChaCha8Rng>,
    tol: f64,
}

impl TieBreaker {
    pub(crate) fn new(config: &SolverConfig) -> Self {
        TieBreaker {
            rng: config
                .randomize_ties
                .then(|| ChaCha8Rng::seed_from_u64(config.seed)),
            tol: config.tolerance,
        }
    }

    pub(crate) fn best<K: Copy>(&mut self, scored: &[(K, f64)], maximize: bool) -> Option<K> {
        let sign = if maximize { 1.0 } else { -1.0 };
        let top = scored
            .iter()
            .map(|&(_, v)| sign * v)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut ties = scored
            .iter()
            .filter(|&&(_, v)| sign * v >= top - self.tol)
            .map(|&(k, _)| k);
        match &mut self.rng {
            None => ties.next(),
            Some(rng) => {
                let all: Vec<K> = ties.collect();
                (!all.is_empty()).then(|| all[rng.gen_range(0..all.len())])
            }
        }
    }
}

/// Packing and total weight of a partition: non-synthetic blocks.
pub(crate) fn packing_of(w: &SetFunction, p: &Partition) -> (Vec<Subset>, f64) {
    let family = w.family();
    let mut packing = Vec::new();
    let mut total = 0.0;
    for &b in p.blocks() {
        if let Some(a) = family.index_of(b) {
            if !family.is_synthetic(a) {
                packing.push(b);
                total += w.weight_at(a);
            }
        }
    }
    (packing, total)
}
