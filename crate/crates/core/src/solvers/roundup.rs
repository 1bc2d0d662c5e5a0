use std::sync::Arc;

use super::{
    is_local_maximizer, packing_of, Extremum, SolveResult, SolverConfig, TieBreaker, TraceEvent,
    TraceKind,
};
use crate::cover::{conditional_weight, induced_partition, worth, MembershipProfile, Partition};
use crate::error::{Error, Result};
use crate::setfn::{SetFunction, Subset};

/// Rounds `q0` to a vertex profile one row at a time.
///
/// The lowest-indexed fractional row is moved onto a member of `F_i` with the
/// largest (or, for [`Extremum::Min`], smallest) value of `w_{q_{-i}}`. Since
/// the worth is linear in each row, every step is monotone in the chosen
/// direction, and at most `n` steps are taken.
///
/// In family mode an element group whose common set is not itself feasible
/// cannot be reported as a block; such groups are split into singletons in
/// the reported partition (the profile is left as rounded).
pub fn round_up(
    w: &SetFunction,
    q0: &MembershipProfile,
    config: &SolverConfig,
) -> Result<SolveResult> {
    config.validate(w.n())?;
    let tol = config.tolerance;
    let family = Arc::clone(w.family_arc());
    let maximize = config.extremum == Extremum::Max;
    let mut q = q0.clone();
    let mut ties = TieBreaker::new(config);

    // rows already at a vertex (within tolerance) are snapped exactly
    for i in 0..q.n() {
        if let Some(a) = q.vertex_choice(i, tol) {
            q.concentrate(i, a);
        }
    }

    let mut worth_trace = vec![worth(w, &q)];
    let mut trace = Vec::new();
    let mut t = 0;
    while let Some(i) = (0..q.n()).find(|&i| q.vertex_choice(i, tol).is_none()) {
        if t >= config.max_iterations {
            return Err(Error::IterationLimit(config.max_iterations));
        }
        let grad = conditional_weight(w, &q, i);
        let scored: Vec<(usize, f64)> = family
            .containing(i)
            .iter()
            .copied()
            .zip(grad.values.iter().copied())
            .collect();
        let a = ties.best(&scored, maximize).expect("F_i is never empty");
        q.concentrate(i, a);
        t += 1;
        let wt = worth(w, &q);
        worth_trace.push(wt);
        trace.push(TraceEvent {
            t,
            loop_id: 1,
            selected: Some(family.member(a)),
            worth: wt,
            kind: TraceKind::Select,
        });
    }

    let induced = induced_partition(&q, tol)?;
    let mut blocks = Vec::with_capacity(induced.blocks().len());
    for &b in induced.blocks() {
        if family.contains(b) {
            blocks.push(b);
        } else {
            trace.push(TraceEvent {
                t,
                loop_id: 1,
                selected: Some(b),
                worth: *worth_trace.last().unwrap(),
                kind: TraceKind::FallbackSingleton,
            });
            blocks.extend(b.elements().map(Subset::singleton));
        }
    }
    let partition = Partition::new(w.n(), blocks)?;
    let (packing, total_weight) = packing_of(w, &partition);
    let local_maximizer = is_local_maximizer(w, &partition, tol)?;
    Ok(SolveResult {
        profile: q,
        partition,
        packing,
        total_weight,
        worth_trace,
        iterations: t,
        local_maximizer,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_element() -> SetFunction {
        SetFunction::full(3, vec![0.0, 0.2, 0.2, 0.8, 0.2, 0.3, 0.6, 0.7]).unwrap()
    }

    #[test]
    fn vertex_input_is_a_fixed_point() {
        let w = three_element();
        let q = MembershipProfile::vertex(Arc::clone(w.family_arc()), &[3, 3, 4]).unwrap();
        let r = round_up(&w, &q, &SolverConfig::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.profile, q);
        assert_eq!(r.worth_trace.len(), 1);
    }

    #[test]
    fn uniform_rounds_to_global_max() {
        let w = three_element();
        let q = MembershipProfile::uniform(Arc::clone(w.family_arc()));
        let r = round_up(&w, &q, &SolverConfig::default()).unwrap();
        assert!((r.worth_trace.last().unwrap() - 1.0).abs() < 1e-12);
        assert!((r.total_weight - 1.0).abs() < 1e-12);
        assert!(r.worth_trace.windows(2).all(|p| p[1] >= p[0] - 1e-12));
        assert!(r.iterations <= 3);
        assert!(r.profile.is_vertex(1e-12));
    }

    #[test]
    fn minimizing_variant_never_increases() {
        let w = three_element();
        let q = MembershipProfile::uniform(Arc::clone(w.family_arc()));
        let w0 = crate::cover::worth(&w, &q);
        let cfg = SolverConfig {
            extremum: Extremum::Min,
            ..SolverConfig::default()
        };
        let r = round_up(&w, &q, &cfg).unwrap();
        assert!(r.worth_trace.windows(2).all(|p| p[1] <= p[0] + 1e-12));
        let last = *r.worth_trace.last().unwrap();
        assert!(last <= w0 + 1e-12);
        assert!(last <= 1.0);
        // the lightest partition is {1,3},{2} with weight 0.5
        assert!(last >= 0.5 - 1e-12);
    }
}
