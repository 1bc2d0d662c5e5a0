//! Seeded random instances and profiles for tests and benchmarks.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::cover::MembershipProfile;
use crate::setfn::{Family, SetFunction, Subset};

/// Weights drawn uniformly from `[0, max_weight)` on every nonempty subset.
pub fn random_full<R: Rng>(rng: &mut R, n: usize, max_weight: f64) -> SetFunction {
    let mut weights: Vec<f64> = (0..1usize << n)
        .map(|_| rng.gen_range(0.0..max_weight))
        .collect();
    weights[0] = 0.0;
    SetFunction::full(n, weights).expect("generated weights are valid")
}

/// `sets` distinct random subsets of size at least 2 (fewer if the ground set
/// is too small), weights uniform in `[0, max_weight)`.
pub fn random_family<R: Rng>(rng: &mut R, n: usize, sets: usize, max_weight: f64) -> SetFunction {
    let available = (1usize << n) - n - 1;
    let target = sets.min(available);
    let mut chosen: Vec<Subset> = Vec::with_capacity(target);
    while chosen.len() < target {
        let s = Subset(rng.gen_range(1..1u64 << n));
        if s.len() >= 2 && !chosen.contains(&s) {
            chosen.push(s);
        }
    }
    // occasionally give a singleton positive weight too
    if n > 0 && rng.gen_bool(0.5) {
        chosen.push(Subset::singleton(rng.gen_range(0..n)));
    }
    let weights: Vec<f64> = chosen
        .iter()
        .map(|_| rng.gen_range(0.0..max_weight))
        .collect();
    SetFunction::from_family(n, &chosen, &weights).expect("generated family is valid")
}

/// `w(A) = Σ_{i ∈ A} w({i})` with random singleton weights.
pub fn modular<R: Rng>(rng: &mut R, n: usize, max_weight: f64) -> SetFunction {
    let singles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..max_weight)).collect();
    let weights = (0..1u64 << n)
        .map(|bits| Subset(bits).elements().map(|i| singles[i]).sum())
        .collect();
    SetFunction::full(n, weights).expect("modular weights are valid")
}

/// Family of all `k`-subsets of an `n`-set, each of weight 1.
pub fn k_uniform(n: usize, k: usize) -> SetFunction {
    let sets: Vec<Subset> = Subset::full(n).subsets().filter(|s| s.len() == k).collect();
    SetFunction::from_family(n, &sets, &vec![1.0; sets.len()]).expect("k-uniform family is valid")
}

/// Rows drawn uniformly from the simplex (normalized exponentials).
pub fn random_profile<R: Rng>(rng: &mut R, family: &Arc<Family>) -> MembershipProfile {
    let rows = (0..family.n())
        .map(|i| {
            let raw: Vec<f64> = family
                .containing(i)
                .iter()
                .map(|_| -(1.0 - rng.gen::<f64>()).ln())
                .collect();
            let total: f64 = raw.iter().sum();
            raw.iter().map(|x| x / total).collect()
        })
        .collect();
    MembershipProfile::new(Arc::clone(family), rows).expect("normalized rows")
}

/// Every row concentrated on a uniformly chosen member of `F_i`.
pub fn random_vertex_profile<R: Rng>(rng: &mut R, family: &Arc<Family>) -> MembershipProfile {
    let choices: Vec<usize> = (0..family.n())
        .map(|i| {
            *family
                .containing(i)
                .choose(rng)
                .expect("F_i is never empty")
        })
        .collect();
    MembershipProfile::vertex(Arc::clone(family), &choices).expect("choices contain their element")
}
