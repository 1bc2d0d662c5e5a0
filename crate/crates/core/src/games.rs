//! Near-Boolean games on vertex profiles.
//!
//! Each element is a player whose strategy is its row of the profile. At a
//! vertex profile the worth `F(q)` is shared out either by the Shapley value
//! of each coalition (the elements concentrating on a common set) or in fixed
//! proportions `ω_i / Σ ω`.

use crate::cover::{induced_partition, worth, worth_of_rows, MembershipProfile};
use crate::error::{Error, Result};
use crate::setfn::{Mode, SetFunction, Subset};

/// One payoff per element.
#[derive(Clone, Debug, PartialEq)]
pub struct PayoffVector(pub Vec<f64>);

impl PayoffVector {
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn check_vertex(q: &MembershipProfile, tol: f64) -> Result<()> {
    match (0..q.n()).find(|&i| q.vertex_choice(i, tol).is_none()) {
        Some(i) => Err(Error::NotVertex(i + 1)),
        None => Ok(()),
    }
}

/// Shapley payoffs: element `i` in coalition `A` receives
/// `Σ_{B ⊆ A, i ∈ B} μ(B) / |B|`.
///
/// A coalition is the set of elements concentrating on the same feasible
/// set, so the coalition payoffs add up to the column worths and the vector
/// is efficient.
pub fn shapley_payoffs(w: &SetFunction, q: &MembershipProfile, tol: f64) -> Result<PayoffVector> {
    if w.mode() != Mode::Full {
        return Err(Error::Unsupported(
            "Shapley payoffs need a full-mode instance".into(),
        ));
    }
    check_vertex(q, tol)?;
    let partition = induced_partition(q, tol)?;
    let mu = w.mobius();
    let mut pay = vec![0.0; w.n()];
    for &block in partition.blocks() {
        for b in block.subsets().filter(|b| !b.is_empty()) {
            let share = mu[b.bits() as usize] / b.len() as f64;
            for i in b.elements() {
                pay[i] += share;
            }
        }
    }
    Ok(PayoffVector(pay))
}

/// `π_i = ω_i F(q) / Σ_j ω_j`.
pub fn proportional_payoffs(
    w: &SetFunction,
    q: &MembershipProfile,
    omega: &[f64],
) -> Result<PayoffVector> {
    check_omega(omega, q.n())?;
    let f = worth(w, q);
    let total: f64 = omega.iter().sum();
    Ok(PayoffVector(omega.iter().map(|o| o * f / total).collect()))
}

fn check_omega(omega: &[f64], n: usize) -> Result<()> {
    if omega.len() != n {
        return Err(Error::InvalidArgument(format!(
            "expected {n} weights omega, got {}",
            omega.len()
        )));
    }
    if let Some(o) = omega.iter().find(|o| !(o.is_finite() && **o > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "omega must be positive, got {o}"
        )));
    }
    Ok(())
}

/// True iff no player can strictly raise its proportional payoff by moving
/// its whole row onto another feasible set containing it.
///
/// Deviations are evaluated by recomputing the worth of the deviated profile
/// and scaling by the player's share; the answer does not depend on `ω`.
pub fn is_equilibrium(
    w: &SetFunction,
    q: &MembershipProfile,
    omega: &[f64],
    tol: f64,
) -> Result<bool> {
    check_omega(omega, q.n())?;
    check_vertex(q, tol)?;
    let family = w.family();
    let total: f64 = omega.iter().sum();
    let base = worth(w, q);
    let mut rows = q.rows().to_vec();
    for i in 0..q.n() {
        let share = omega[i] / total;
        let own = share * base;
        let saved = rows[i].clone();
        for (slot, _) in family.containing(i).iter().enumerate() {
            rows[i].iter_mut().for_each(|x| *x = 0.0);
            rows[i][slot] = 1.0;
            if share * worth_of_rows(w, &rows) > own + share * tol {
                return Ok(false);
            }
        }
        rows[i] = saved;
    }
    Ok(true)
}

/// Coalition payoff shares of `Subset`s, summed: `Σ_{i ∈ s} π_i`.
pub fn coalition_payoff(pay: &PayoffVector, s: Subset) -> f64 {
    s.elements().map(|i| pay.0[i]).sum()
}
