//! JSON formats for instances, profiles and results.
//!
//! Elements are 1-based on the wire and 0-based in memory. Sets are written
//! as sorted element lists.

use std::sync::Arc;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::approx::ApproxResult;
use crate::cover::{MembershipProfile, Partition};
use crate::error::{Error, Result};
use crate::oracle::OracleReport;
use crate::setfn::{Family, Mode, SetFunction, Subset};
use crate::solvers::SolveResult;

/// Profile rows whose masses sum to within this distance of 1 are rescaled.
pub const RENORMALIZE_SLACK: f64 = 1e-6;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n: usize,
    mode: String,
    #[serde(default)]
    family: Option<Vec<Vec<usize>>>,
    weights: Vec<f64>,
}

fn malformed(e: serde_json::Error) -> Error {
    Error::InvalidInstance(e.to_string())
}

/// Converts a 1-based element list.
pub fn subset_from_one_based(n: usize, elements: &[usize]) -> Result<Subset> {
    let mut s = Subset::EMPTY;
    for &e in elements {
        if e == 0 || e > n {
            return Err(Error::InvalidInstance(format!(
                "element {e} outside 1..={n}"
            )));
        }
        if s.contains(e - 1) {
            return Err(Error::InvalidInstance(format!(
                "element {e} repeated in a set"
            )));
        }
        s = s.with(e - 1);
    }
    Ok(s)
}

/// Parses `{"n", "mode": "full"|"family", "family"?, "weights"}`.
pub fn parse_instance(text: &str) -> Result<SetFunction> {
    let raw: InstanceFile = serde_json::from_str(text).map_err(malformed)?;
    match raw.mode.as_str() {
        "full" => {
            if raw.family.is_some() {
                return Err(Error::InvalidInstance(
                    "full mode takes no \"family\"".into(),
                ));
            }
            SetFunction::full(raw.n, raw.weights)
        }
        "family" => {
            let lists = raw
                .family
                .ok_or_else(|| Error::InvalidInstance("family mode needs \"family\"".into()))?;
            if lists.len() != raw.weights.len() {
                return Err(Error::InvalidInstance(format!(
                    "{} sets but {} weights",
                    lists.len(),
                    raw.weights.len()
                )));
            }
            if raw.n == 0 {
                return Err(Error::InvalidInstance("n must be positive".into()));
            }
            let sets = lists
                .iter()
                .map(|l| subset_from_one_based(raw.n, l))
                .collect::<Result<Vec<_>>>()?;
            SetFunction::from_family(raw.n, &sets, &raw.weights)
        }
        other => Err(Error::InvalidInstance(format!("unknown mode {other:?}"))),
    }
}

/// Inverse of [`parse_instance`]. Family mode writes the declared
/// (non-synthetic) members only.
pub fn instance_to_json(w: &SetFunction) -> Value {
    match w.mode() {
        Mode::Full => json!({ "n": w.n(), "mode": "full", "weights": w.weights() }),
        Mode::Family => {
            let family = w.family();
            let declared: Vec<usize> = (1..family.len())
                .filter(|&a| !family.is_synthetic(a))
                .collect();
            json!({
                "n": w.n(),
                "mode": "family",
                "family": declared.iter().map(|&a| family.member(a).to_one_based()).collect::<Vec<_>>(),
                "weights": declared.iter().map(|&a| w.weight_at(a)).collect::<Vec<_>>(),
            })
        }
    }
}

#[derive(Deserialize)]
struct ProfileFile {
    rows: Vec<RowFile>,
}

#[derive(Deserialize)]
struct RowFile {
    element: usize,
    memberships: Vec<MassFile>,
}

#[derive(Deserialize)]
struct MassFile {
    set: Vec<usize>,
    mass: f64,
}

/// Parses `{"rows": [{"element", "memberships": [{"set", "mass"}]}]}`.
///
/// Unlisted sets get mass 0. A row summing to within
/// [`RENORMALIZE_SLACK`] of 1 is rescaled; anything further off is rejected.
pub fn parse_profile(family: Arc<Family>, text: &str) -> Result<MembershipProfile> {
    let raw: ProfileFile =
        serde_json::from_str(text).map_err(|e| Error::InvalidProfile(e.to_string()))?;
    let n = family.n();
    let mut rows: Vec<Option<Vec<f64>>> = vec![None; n];
    for r in raw.rows {
        if r.element == 0 || r.element > n {
            return Err(Error::InvalidProfile(format!(
                "element {} outside 1..={n}",
                r.element
            )));
        }
        let i = r.element - 1;
        if rows[i].is_some() {
            return Err(Error::InvalidProfile(format!(
                "element {} listed twice",
                r.element
            )));
        }
        let mut row = vec![0.0; family.containing(i).len()];
        for m in r.memberships {
            let set = subset_from_one_based(n, &m.set)
                .map_err(|e| Error::InvalidProfile(e.to_string()))?;
            let a = family
                .index_of(set)
                .filter(|_| set.contains(i))
                .ok_or_else(|| {
                    Error::InvalidProfile(format!(
                        "{set} is not a feasible set containing {}",
                        r.element
                    ))
                })?;
            if !m.mass.is_finite() || m.mass < 0.0 {
                return Err(Error::InvalidProfile(format!("mass {} on {set}", m.mass)));
            }
            row[family.slot(a, i)] += m.mass;
        }
        let total: f64 = row.iter().sum();
        if (total - 1.0).abs() > RENORMALIZE_SLACK {
            return Err(Error::InvalidProfile(format!(
                "row of element {} sums to {total}",
                r.element
            )));
        }
        row.iter_mut().for_each(|x| *x /= total);
        rows[i] = Some(row);
    }
    let rows = rows
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.ok_or_else(|| Error::InvalidProfile(format!("no row for element {}", i + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    MembershipProfile::new(family, rows)
}

/// Profile JSON listing the nonzero masses only.
pub fn profile_to_json(q: &MembershipProfile) -> Value {
    let family = q.family();
    let rows: Vec<Value> = (0..q.n())
        .map(|i| {
            let memberships: Vec<Value> = family
                .containing(i)
                .iter()
                .zip(q.row(i))
                .filter(|(_, &x)| x != 0.0)
                .map(|(&a, &x)| json!({ "set": family.member(a).to_one_based(), "mass": x }))
                .collect();
            json!({ "element": i + 1, "memberships": memberships })
        })
        .collect();
    json!({ "rows": rows })
}

pub fn partition_to_json(p: &Partition) -> Value {
    Value::from(
        p.blocks()
            .iter()
            .map(|b| b.to_one_based())
            .collect::<Vec<_>>(),
    )
}

/// Parses a list of 1-based blocks.
pub fn parse_partition(n: usize, text: &str) -> Result<Partition> {
    let lists: Vec<Vec<usize>> =
        serde_json::from_str(text).map_err(|e| Error::InvalidPartition(e.to_string()))?;
    let blocks = lists
        .iter()
        .map(|l| subset_from_one_based(n, l))
        .collect::<Result<Vec<_>>>()?;
    Partition::new(n, blocks)
}

pub fn solve_result_to_json(r: &SolveResult) -> Value {
    json!({
        "partition": partition_to_json(&r.partition),
        "packing": r.packing.iter().map(|b| b.to_one_based()).collect::<Vec<_>>(),
        "total_weight": r.total_weight,
        "worth_trace": r.worth_trace,
        "iterations": r.iterations,
        "local_maximizer": r.local_maximizer,
        "final_profile": profile_to_json(&r.profile),
    })
}

/// `[{"set", "value"}]` over the nonempty feasible sets.
pub fn mobius_to_json(w: &SetFunction) -> Value {
    let family = w.family();
    let mu = w.mobius();
    Value::from(
        (1..family.len())
            .map(|a| json!({ "set": family.member(a).to_one_based(), "value": mu[a] }))
            .collect::<Vec<_>>(),
    )
}

pub fn oracle_report_to_json(r: &OracleReport) -> Value {
    json!({
        "best_partition": partition_to_json(&r.best_partition),
        "best_weight": r.best_weight,
        "worst_partition": partition_to_json(&r.worst_partition),
        "worst_weight": r.worst_weight,
        "all_local_maximizers": r.all_local_maximizers.iter().map(partition_to_json).collect::<Vec<_>>(),
        "count_enumerated": r.count_enumerated,
    })
}

/// Number of partitions echoed in the approximation output.
pub const APPROX_SAMPLE: usize = 20;

pub fn approx_to_json(r: &ApproxResult) -> Value {
    let mu: Vec<Value> = r
        .support
        .iter()
        .zip(&r.mu)
        .map(|(s, v)| json!({ "set": s.to_one_based(), "value": v }))
        .collect();
    let samples: Vec<Value> = r
        .partitions
        .iter()
        .zip(r.targets.iter().zip(&r.values))
        .take(APPROX_SAMPLE)
        .map(|(p, (f, fk))| json!({ "partition": partition_to_json(p), "F": f, "F_k": fk }))
        .collect();
    json!({ "k": r.k, "residual": r.residual, "mu": mu, "sample_values": samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE_ELEMENTS: &str =
        r#"{"n": 3, "mode": "full", "weights": [0, 0.2, 0.2, 0.8, 0.2, 0.3, 0.6, 0.7]}"#;

    #[test]
    fn parses_both_modes() {
        let w = parse_instance(THREE_ELEMENTS).unwrap();
        assert_eq!(w.weight(Subset(0b011)), Some(0.8));
        let w = parse_instance(
            r#"{"n": 3, "mode": "family", "family": [[1, 2], [3]], "weights": [1.5, 0.5]}"#,
        )
        .unwrap();
        assert_eq!(w.weight(Subset(0b011)), Some(1.5));
        assert_eq!(w.weight(Subset(0b001)), Some(0.0));
        assert_eq!(w.weight(Subset(0b101)), None);
    }

    #[test]
    fn rejects_malformed_instances() {
        for bad in [
            r#"{"n": 3, "mode": "full"}"#,
            r#"{"n": 2, "mode": "full", "weights": [0, 1, 1]}"#,
            r#"{"n": 2, "mode": "full", "weights": [1, 1, 1, 1]}"#,
            r#"{"n": 2, "mode": "family", "family": [[1, 3]], "weights": [1]}"#,
            r#"{"n": 2, "mode": "family", "family": [[1, 1]], "weights": [1]}"#,
            r#"{"n": 2, "mode": "family", "family": [[1, 2]], "weights": [-1]}"#,
            r#"{"n": 2, "mode": "family", "family": [[1, 2]], "weights": [1, 2]}"#,
            r#"{"n": 2, "mode": "cube", "weights": [0, 1, 1, 1]}"#,
            r#"not json"#,
        ] {
            assert!(parse_instance(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn instance_roundtrip() {
        let w = parse_instance(r#"{"n": 4, "mode": "family", "family": [[1, 2], [4], [1, 2, 3, 4]], "weights": [1, 2, 3]}"#).unwrap();
        let again = parse_instance(&instance_to_json(&w).to_string()).unwrap();
        assert_eq!(again.weights(), w.weights());
        let w = parse_instance(THREE_ELEMENTS).unwrap();
        let again = parse_instance(&instance_to_json(&w).to_string()).unwrap();
        assert_eq!(again.weights(), w.weights());
    }

    #[test]
    fn profile_renormalization() {
        let w = parse_instance(THREE_ELEMENTS).unwrap();
        let fam = Arc::clone(w.family_arc());
        let text = r#"{"rows": [
            {"element": 1, "memberships": [{"set": [1, 2], "mass": 0.5000004}, {"set": [1], "mass": 0.5}]},
            {"element": 2, "memberships": [{"set": [1, 2], "mass": 1}]},
            {"element": 3, "memberships": [{"set": [3], "mass": 1}]}
        ]}"#;
        let q = parse_profile(Arc::clone(&fam), text).unwrap();
        let row: f64 = q.row(0).iter().sum();
        assert!((row - 1.0).abs() < 1e-15);
        let again = parse_profile(Arc::clone(&fam), &profile_to_json(&q).to_string()).unwrap();
        assert_eq!(again, q);

        let off = text.replace("0.5000004", "0.6");
        assert!(matches!(
            parse_profile(Arc::clone(&fam), &off),
            Err(Error::InvalidProfile(_))
        ));
        let wrong_set = text.replace(r#""set": [3]"#, r#""set": [1]"#);
        assert!(parse_profile(Arc::clone(&fam), &wrong_set).is_err());
        let missing = r#"{"rows": [{"element": 1, "memberships": [{"set": [1], "mass": 1}]}]}"#;
        assert!(parse_profile(fam, missing).is_err());
    }

    #[test]
    fn partitions_roundtrip() {
        let p = Partition::new(3, vec![Subset(0b011), Subset(0b100)]).unwrap();
        let text = partition_to_json(&p).to_string();
        assert_eq!(text, "[[1,2],[3]]");
        assert_eq!(parse_partition(3, &text).unwrap(), p);
        assert!(parse_partition(3, "[[1,2],[2,3]]").is_err());
    }

    #[test]
    fn mobius_table() {
        let w = parse_instance(THREE_ELEMENTS).unwrap();
        let table = mobius_to_json(&w);
        let entry = table
            .as_array()
            .unwrap()
            .iter()
            .find(|e| e["set"] == json!([1, 2]))
            .unwrap();
        assert!((entry["value"].as_f64().unwrap() - 0.4).abs() < 1e-12);
    }
}
