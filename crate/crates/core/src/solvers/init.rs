use std::sync::Arc;

use crate::cover::MembershipProfile;
use crate::error::Result;
use crate::setfn::SetFunction;

#[derive(Clone, Debug)]
pub enum InitKind {
    /// `q_i^A = 1 / |F_i|`.
    Uniform,
    /// `q_i^A = w(A) / Σ_{B ∈ F_i} w(B)`.
    WeightProportional,
    Explicit(MembershipProfile),
}

#[derive(Clone, Debug)]
pub struct InitialProfile {
    pub profile: MembershipProfile,
    /// Elements whose weights over `F_i` were all zero; they start
    /// concentrated on their singleton.
    pub singleton_fallbacks: Vec<usize>,
}

/// Builds a starting profile from `w` (pass the cost-adjusted weights for
/// the cost-aware search).
pub fn make_initial_profile(w: &SetFunction, kind: &InitKind) -> Result<InitialProfile> {
    let family = w.family_arc();
    match kind {
        InitKind::Uniform => Ok(InitialProfile {
            profile: MembershipProfile::uniform(Arc::clone(family)),
            singleton_fallbacks: Vec::new(),
        }),
        InitKind::Explicit(q) => Ok(InitialProfile {
            profile: q.clone(),
            singleton_fallbacks: Vec::new(),
        }),
        InitKind::WeightProportional => {
            let mut fallbacks = Vec::new();
            let rows = (0..w.n())
                .map(|i| {
                    let members = family.containing(i);
                    let total: f64 = members.iter().map(|&a| w.weight_at(a)).sum();
                    if total > 0.0 {
                        members.iter().map(|&a| w.weight_at(a) / total).collect()
                    } else {
                        fallbacks.push(i);
                        let mut row = vec![0.0; members.len()];
                        // the singleton is the smallest member containing i
                        let single = family.index_of(crate::Subset::singleton(i)).unwrap();
                        row[family.slot(single, i)] = 1.0;
                        row
                    }
                })
                .collect();
            Ok(InitialProfile {
                profile: MembershipProfile::new(Arc::clone(family), rows)?,
                singleton_fallbacks: fallbacks,
            })
        }
    }
}
