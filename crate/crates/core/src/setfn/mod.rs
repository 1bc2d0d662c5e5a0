//! Subsets, set functions over a feasible family, and their Möbius/zeta
//! transforms.
//!
//! A [`SetFunction`] owns its weights and shares the (immutable) [`Family`]
//! layout through an `Arc`, so cost-adjusted copies of a weight vector can
//! be built cheaply over the same family.

mod cost;
mod family;
mod subset;

use std::sync::{Arc, OnceLock};

pub use cost::{compute_costs, CostFunction};
pub use family::{Family, Mode, MAX_FAMILY_N, MAX_FAMILY_SIZE, MAX_FULL_N};
pub use subset::{Elements, Subset, Subsets};

use crate::error::{Error, Result};

/// Default tolerance for floating point comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Weights on the members of a feasible family, with a lazily computed
/// Möbius inversion.
#[derive(Debug)]
pub struct SetFunction {
    family: Arc<Family>,
    weights: Vec<f64>,
    mobius: OnceLock<Vec<f64>>,
}

impl Clone for SetFunction {
    fn clone(&self) -> Self {
        SetFunction {
            family: Arc::clone(&self.family),
            weights: self.weights.clone(),
            mobius: self.mobius.clone(),
        }
    }
}

impl SetFunction {
    /// Dense set function on all of `2^N`; `weights[bits]` is the weight of
    /// the subset with those bits.
    pub fn full(n: usize, weights: Vec<f64>) -> Result<SetFunction> {
        let family = Family::full(n)?;
        if weights.len() != family.len() {
            return Err(Error::InvalidInstance(format!(
                "full mode needs 2^{n} = {} weights, got {}",
                family.len(),
                weights.len()
            )));
        }
        SetFunction::over(Arc::new(family), weights)
    }

    /// Set function on the closure of `sets`. Synthetic members (empty set,
    /// missing singletons) get weight 0.
    pub fn from_family(n: usize, sets: &[Subset], weights: &[f64]) -> Result<SetFunction> {
        if sets.len() != weights.len() {
            return Err(Error::InvalidInstance(format!(
                "{} sets but {} weights",
                sets.len(),
                weights.len()
            )));
        }
        let (family, index) = Family::from_sets(n, sets)?;
        let mut dense = vec![0.0; family.len()];
        let mut seen = vec![false; family.len()];
        for (&a, &w) in index.iter().zip(weights) {
            if seen[a] && dense[a] != w {
                return Err(Error::InvalidInstance(format!(
                    "set {} listed twice with different weights",
                    family.member(a)
                )));
            }
            seen[a] = true;
            dense[a] = w;
        }
        SetFunction::over(Arc::new(family), dense)
    }

    /// Weights indexed by member position of an existing family.
    pub fn over(family: Arc<Family>, weights: Vec<f64>) -> Result<SetFunction> {
        if weights.len() != family.len() {
            return Err(Error::InvalidInstance(format!(
                "family has {} members, got {} weights",
                family.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidInstance(format!("non-finite weight {w}")));
        }
        if weights[0] != 0.0 {
            return Err(Error::NonZeroEmptyWeight(weights[0]));
        }
        if let Some((a, &w)) = weights.iter().enumerate().find(|(_, w)| **w < 0.0) {
            return Err(Error::NegativeWeight {
                set: family.member(a).to_string(),
                weight: w,
            });
        }
        Ok(SetFunction {
            family,
            weights,
            mobius: OnceLock::new(),
        })
    }

    /// Rebuilds a set function from Möbius coefficients over `family`.
    pub fn from_mobius(family: Arc<Family>, mu: &[f64]) -> Result<SetFunction> {
        let weights = zeta_transform(&family, mu)?;
        SetFunction::over(family, weights)
    }

    #[inline]
    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn family_arc(&self) -> &Arc<Family> {
        &self.family
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.family.n()
    }

    #[inline]
    pub fn mode(&self) -> Mode {
        self.family.mode()
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn weight_at(&self, a: usize) -> f64 {
        self.weights[a]
    }

    /// Weight of a feasible subset, `None` if it is not a member.
    pub fn weight(&self, s: Subset) -> Option<f64> {
        self.family.index_of(s).map(|a| self.weights[a])
    }

    /// Overwrites the weight of member `a` and drops the cached inversion.
    pub fn set_weight(&mut self, a: usize, value: f64) -> Result<()> {
        if a == 0 && value != 0.0 {
            return Err(Error::NonZeroEmptyWeight(value));
        }
        if !value.is_finite() || value < 0.0 {
            return Err(Error::NegativeWeight {
                set: self.family.member(a).to_string(),
                weight: value,
            });
        }
        self.weights[a] = value;
        self.mobius = OnceLock::new();
        Ok(())
    }

    /// Möbius inversion indexed like the weights; computed on first use.
    pub fn mobius(&self) -> &[f64] {
        self.mobius.get_or_init(|| mobius_inversion(self))
    }

    pub fn mobius_of(&self, s: Subset) -> Option<f64> {
        self.family.index_of(s).map(|a| self.mobius()[a])
    }

    /// `Σ μ(B)` over the feasible nonempty `B ⊆ s`. Equals `w(s)` whenever
    /// `s` is feasible; for infeasible `s` it is the worth of a column whose
    /// support is exactly `s`.
    pub fn closure_sum(&self, s: Subset) -> f64 {
        match self.mode() {
            Mode::Full => self.weights[s.bits() as usize],
            Mode::Family => {
                if let Some(a) = self.family.index_of(s) {
                    return self.weights[a];
                }
                let mu = self.mobius();
                self.family
                    .members_within(s)
                    .into_iter()
                    .map(|b| mu[b])
                    .sum()
            }
        }
    }

    /// Total weight of a collection of feasible blocks.
    pub fn total_weight(&self, blocks: &[Subset]) -> Option<f64> {
        blocks.iter().map(|b| self.weight(*b)).sum()
    }
}

/// Möbius inversion `μ^w` of `w` over its feasible family.
///
/// Full mode uses the in-place fast subset-sum inversion over all of `2^N`;
/// family mode runs `μ(A) = w(A) - Σ_{B ∈ F, B ⊂ A} μ(B)` in increasing
/// member order (every proper subset of a member precedes it).
pub fn mobius_inversion(w: &SetFunction) -> Vec<f64> {
    let family = w.family();
    let mut mu = w.weights().to_vec();
    match family.mode() {
        Mode::Full => {
            let n = family.n();
            for bit in 0..n {
                let step = 1usize << bit;
                for a in 0..mu.len() {
                    if a & step != 0 {
                        mu[a] -= mu[a ^ step];
                    }
                }
            }
        }
        Mode::Family => {
            for a in 1..mu.len() {
                let below = family.members_below(a);
                let lower: f64 = below[..below.len() - 1].iter().map(|&b| mu[b]).sum();
                mu[a] = w.weight_at(a) - lower;
            }
        }
    }
    mu
}

/// Inverse of [`mobius_inversion`]: `w(A) = Σ_{B ∈ F, B ⊆ A} μ(B)`.
pub fn zeta_transform(family: &Family, mu: &[f64]) -> Result<Vec<f64>> {
    if mu.len() != family.len() {
        return Err(Error::InvalidInstance(format!(
            "family has {} members, got {} coefficients",
            family.len(),
            mu.len()
        )));
    }
    let mut w = mu.to_vec();
    match family.mode() {
        Mode::Full => {
            for bit in 0..family.n() {
                let step = 1usize << bit;
                for a in 0..w.len() {
                    if a & step != 0 {
                        w[a] += w[a ^ step];
                    }
                }
            }
        }
        Mode::Family => {
            for (a, slot) in w.iter_mut().enumerate().skip(1) {
                *slot = family.members_below(a).iter().map(|&b| mu[b]).sum();
            }
        }
    }
    w[0] = mu[0];
    Ok(w)
}
