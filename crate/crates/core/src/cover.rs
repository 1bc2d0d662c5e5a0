//! Fuzzy covers and the global worth `W(q)`.
//!
//! A [`MembershipProfile`] gives every element `i` a probability vector over
//! `F_i`, the feasible sets containing it. Reading the profile column-wise,
//! each feasible `A` gets the point `q^A` of the unit hypercube, and the
//! worth of the profile is the sum over all columns of the multilinear
//! extension `f^w(q^A) = Σ_{B ∈ F, B ⊆ A} (Π_{i ∈ B} q_i^A) μ(B)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::setfn::{Family, Mode, SetFunction, Subset, DEFAULT_TOLERANCE};

/// A point of the product of the simplices over the `F_i`.
#[derive(Clone, Debug)]
pub struct MembershipProfile {
    family: Arc<Family>,
    rows: Vec<Vec<f64>>,
}

impl PartialEq for MembershipProfile {
    fn eq(&self, other: &Self) -> bool {
        same_family(&self.family, &other.family) && self.rows == other.rows
    }
}

fn same_family(a: &Arc<Family>, b: &Arc<Family>) -> bool {
    Arc::ptr_eq(a, b) || (a.n() == b.n() && a.members() == b.members())
}

impl MembershipProfile {
    /// Validates `rows` (row `i` is indexed like `family.containing(i)`).
    pub fn new(family: Arc<Family>, rows: Vec<Vec<f64>>) -> Result<MembershipProfile> {
        MembershipProfile::with_tolerance(family, rows, DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(
        family: Arc<Family>,
        rows: Vec<Vec<f64>>,
        tol: f64,
    ) -> Result<MembershipProfile> {
        if rows.len() != family.n() {
            return Err(Error::InvalidProfile(format!(
                "expected {} rows, got {}",
                family.n(),
                rows.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            let expected = family.containing(i).len();
            if row.len() != expected {
                return Err(Error::InvalidProfile(format!(
                    "row of element {} has {} entries, expected {expected}",
                    i + 1,
                    row.len()
                )));
            }
            if let Some(x) = row.iter().find(|x| !x.is_finite() || **x < -tol) {
                return Err(Error::InvalidProfile(format!(
                    "row of element {} has entry {x}",
                    i + 1
                )));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > tol {
                return Err(Error::InvalidProfile(format!(
                    "row of element {} sums to {total}",
                    i + 1
                )));
            }
        }
        Ok(MembershipProfile { family, rows })
    }

    /// Every element spreads its mass evenly over `F_i`.
    pub fn uniform(family: Arc<Family>) -> MembershipProfile {
        let rows = (0..family.n())
            .map(|i| {
                let k = family.containing(i).len();
                vec![1.0 / k as f64; k]
            })
            .collect();
        MembershipProfile { family, rows }
    }

    /// The vertex profile where element `i` puts its whole mass on member
    /// `choices[i]`.
    pub fn vertex(family: Arc<Family>, choices: &[usize]) -> Result<MembershipProfile> {
        if choices.len() != family.n() {
            return Err(Error::InvalidProfile(format!(
                "expected {} choices, got {}",
                family.n(),
                choices.len()
            )));
        }
        let mut rows = Vec::with_capacity(family.n());
        for (i, &a) in choices.iter().enumerate() {
            if a >= family.len() || !family.member(a).contains(i) {
                return Err(Error::InvalidProfile(format!(
                    "element {} cannot choose member #{a}",
                    i + 1
                )));
            }
            let mut row = vec![0.0; family.containing(i).len()];
            row[family.slot(a, i)] = 1.0;
            rows.push(row);
        }
        Ok(MembershipProfile { family, rows })
    }

    /// The vertex profile of a partition whose blocks are all feasible.
    pub fn from_partition(family: Arc<Family>, p: &Partition) -> Result<MembershipProfile> {
        if p.n() != family.n() {
            return Err(Error::InvalidPartition(format!(
                "partition of {} elements for a family over {}",
                p.n(),
                family.n()
            )));
        }
        let mut choices = vec![0; family.n()];
        for &block in p.blocks() {
            let a = family
                .index_of(block)
                .ok_or_else(|| Error::InvalidPartition(format!("block {block} is not feasible")))?;
            for i in block.elements() {
                choices[i] = a;
            }
        }
        MembershipProfile::vertex(family, &choices)
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
        self.rows.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.rows[i]
    }

    /// `q_i^A` for member `a`; zero when `i ∉ A`.
    #[inline]
    pub fn mass(&self, i: usize, a: usize) -> f64 {
        if self.family.member(a).contains(i) {
            self.rows[i][self.family.slot(a, i)]
        } else {
            0.0
        }
    }

    /// Replaces row `i`, checking it lies in the simplex.
    pub fn set_row(&mut self, i: usize, row: Vec<f64>) -> Result<()> {
        let mut rows = std::mem::take(&mut self.rows);
        rows[i] = row;
        let checked = MembershipProfile::new(Arc::clone(&self.family), rows);
        match checked {
            Ok(p) => {
                self.rows = p.rows;
                Ok(())
            }
            Err(e) => Err(e),
        }
    }

    /// Puts element `i`'s whole mass on member `a` (which must contain `i`).
    pub fn concentrate(&mut self, i: usize, a: usize) {
        let slot = self.family.slot(a, i);
        let row = &mut self.rows[i];
        row.iter_mut().for_each(|x| *x = 0.0);
        row[slot] = 1.0;
    }

    /// The member row `i` is concentrated on, if the row is an extreme point
    /// of its simplex.
    pub fn vertex_choice(&self, i: usize, tol: f64) -> Option<usize> {
        let row = &self.rows[i];
        let (slot, &top) = row.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
        (top >= 1.0 - tol).then(|| self.family.containing(i)[slot])
    }

    pub fn is_vertex(&self, tol: f64) -> bool {
        (0..self.n()).all(|i| self.vertex_choice(i, tol).is_some())
    }

    /// `Σ_{i ∈ A} q_i^A` for member `a`.
    pub fn column_sum(&self, a: usize) -> f64 {
        self.family
            .member(a)
            .elements()
            .map(|i| self.rows[i][self.family.slot(a, i)])
            .sum()
    }

    /// Members of `A` with mass above `tol` on `A`.
    pub fn column_support(&self, a: usize, tol: f64) -> Subset {
        Subset::from_elements(
            self.family
                .member(a)
                .elements()
                .filter(|&i| self.rows[i][self.family.slot(a, i)] > tol),
        )
    }
}

/// A partition of the ground set into pairwise disjoint nonempty blocks,
/// stored in increasing bit order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    n: usize,
    blocks: Vec<Subset>,
}

impl Partition {
    pub fn new(n: usize, mut blocks: Vec<Subset>) -> Result<Partition> {
        let ground = Subset::full(n);
        let mut seen = Subset::EMPTY;
        for &b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            if !b.is_subset_of(ground) {
                return Err(Error::InvalidPartition(format!(
                    "block {b} outside 1..={n}"
                )));
            }
            if b.intersects(seen) {
                return Err(Error::InvalidPartition(format!(
                    "block {b} overlaps another block"
                )));
            }
            seen = seen.union(b);
        }
        if seen != ground {
            return Err(Error::InvalidPartition(format!(
                "blocks do not cover {}",
                ground.difference(seen)
            )));
        }
        blocks.sort_unstable();
        Ok(Partition { n, blocks })
    }

    /// All singletons.
    pub fn finest(n: usize) -> Partition {
        Partition {
            n,
            blocks: (0..n).map(Subset::singleton).collect(),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn blocks(&self) -> &[Subset] {
        &self.blocks
    }

    pub fn block_of(&self, i: usize) -> Subset {
        *self
            .blocks
            .iter()
            .find(|b| b.contains(i))
            .expect("partition covers the ground set")
    }

    /// `Σ w(A)` over the blocks; `None` if a block is not feasible.
    pub fn weight(&self, w: &SetFunction) -> Option<f64> {
        w.total_weight(&self.blocks)
    }
}

/// Values of `w_{q_{-i}}` (the `i`-gradient), one per member of `F_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientRow {
    pub element: usize,
    pub values: Vec<f64>,
}

impl GradientRow {
    /// Value at member `a` (which must contain the row's element).
    pub fn at(&self, family: &Family, a: usize) -> f64 {
        self.values[family.slot(a, self.element)]
    }
}

fn check_family(w: &SetFunction, q: &MembershipProfile) {
    assert!(
        same_family(w.family_arc(), q.family_arc()),
        "set function and profile live on different families"
    );
}

/// Scratch space for full-mode submask products.
struct Products {
    prod: Vec<f64>,
    bits: Vec<u64>,
}

impl Products {
    fn new() -> Self {
        Products {
            prod: Vec::new(),
            bits: Vec::new(),
        }
    }

    /// Fills `prod[s]` with `Π q_j^A` over the elements of `support` picked by
    /// the compressed mask `s`, and `bits[s]` with the matching subset.
    fn fill(&mut self, family: &Family, rows: &[Vec<f64>], a: usize, support: Subset) {
        let m = support.len();
        let size = 1usize << m;
        self.prod.clear();
        self.prod.resize(size, 0.0);
        self.bits.clear();
        self.bits.resize(size, 0);
        self.prod[0] = 1.0;
        let elems: Vec<usize> = support.elements().collect();
        let vals: Vec<f64> = elems.iter().map(|&j| rows[j][family.slot(a, j)]).collect();
        for s in 1..size {
            let low = s.trailing_zeros() as usize;
            let rest = s & (s - 1);
            self.prod[s] = self.prod[rest] * vals[low];
            self.bits[s] = self.bits[rest] | 1u64 << elems[low];
        }
    }
}

/// `Σ_{B ∈ F, B ⊆ A, B ∩ skip = ∅} (Π_{j ∈ B} q_j^A) μ(B)`.
fn column_value(
    w: &SetFunction,
    rows: &[Vec<f64>],
    a: usize,
    skip: Subset,
    scratch: &mut Products,
) -> f64 {
    let family = w.family();
    let mu = w.mobius();
    let set = family.member(a).difference(skip);
    match family.mode() {
        Mode::Full => {
            scratch.fill(family, rows, a, set);
            scratch
                .prod
                .iter()
                .zip(&scratch.bits)
                .skip(1)
                .map(|(p, &b)| p * mu[b as usize])
                .sum()
        }
        Mode::Family => family
            .members_below(a)
            .iter()
            .filter(|&&b| family.member(b).is_subset_of(set))
            .map(|&b| {
                let prod: f64 = family
                    .member(b)
                    .elements()
                    .map(|j| rows[j][family.slot(a, j)])
                    .product();
                prod * mu[b]
            })
            .sum(),
    }
}

/// `w_{q_{-i}}(A) = Σ_{B ∈ F_i, B ⊆ A} (Π_{j ∈ B \ i} q_j^A) μ(B)`.
fn conditional_value(
    w: &SetFunction,
    rows: &[Vec<f64>],
    i: usize,
    a: usize,
    scratch: &mut Products,
) -> f64 {
    let family = w.family();
    let mu = w.mobius();
    let set = family.member(a);
    match family.mode() {
        Mode::Full => {
            let rest = set.without(i);
            scratch.fill(family, rows, a, rest);
            let bit_i = 1u64 << i;
            scratch
                .prod
                .iter()
                .zip(&scratch.bits)
                .map(|(p, &b)| p * mu[(b | bit_i) as usize])
                .sum()
        }
        Mode::Family => family
            .members_below(a)
            .iter()
            .filter(|&&b| family.member(b).contains(i))
            .map(|&b| {
                let prod: f64 = family
                    .member(b)
                    .without(i)
                    .elements()
                    .map(|j| rows[j][family.slot(a, j)])
                    .product();
                prod * mu[b]
            })
            .sum(),
    }
}

pub(crate) fn worth_of_rows(w: &SetFunction, rows: &[Vec<f64>]) -> f64 {
    let mut scratch = Products::new();
    (1..w.family().len())
        .map(|a| column_value(w, rows, a, Subset::EMPTY, &mut scratch))
        .sum()
}

/// Global worth `W(q)`: the multilinear extension of `w` summed over the
/// columns `q^A` of the profile.
pub fn worth(w: &SetFunction, q: &MembershipProfile) -> f64 {
    check_family(w, q);
    worth_of_rows(w, &q.rows)
}

/// Worth of a single column `q^A`.
pub fn column_worth(w: &SetFunction, q: &MembershipProfile, a: usize) -> f64 {
    check_family(w, q);
    column_value(w, &q.rows, a, Subset::EMPTY, &mut Products::new())
}

/// The `i`-gradient `w_{q_{-i}}` over `F_i`. Row `i` itself is not read.
pub fn conditional_weight(w: &SetFunction, q: &MembershipProfile, i: usize) -> GradientRow {
    check_family(w, q);
    let mut scratch = Products::new();
    let values = w
        .family()
        .containing(i)
        .iter()
        .map(|&a| conditional_value(w, &q.rows, i, a, &mut scratch))
        .collect();
    GradientRow { element: i, values }
}

/// `w_{q_{-i}}(A)` for a single member `a ∋ i`.
pub fn conditional_weight_at(w: &SetFunction, q: &MembershipProfile, i: usize, a: usize) -> f64 {
    check_family(w, q);
    conditional_value(w, &q.rows, i, a, &mut Products::new())
}

/// Splits `W(q)` into the part linear in row `i` and the part independent
/// of it: `W = W_i + W_{-i}` with `W_i = <q_i, w_{q_{-i}}>`.
///
/// `W_{-i}` is evaluated directly as the sum over columns of the terms not
/// involving `i`, so the identity is a genuine check.
pub fn worth_decomposition(w: &SetFunction, q: &MembershipProfile, i: usize) -> (f64, f64) {
    let grad = conditional_weight(w, q, i);
    let w_i: f64 = q.rows[i].iter().zip(&grad.values).map(|(x, g)| x * g).sum();
    let skip = Subset::singleton(i);
    let mut scratch = Products::new();
    let w_minus_i = (1..w.family().len())
        .map(|a| column_value(w, &q.rows, a, skip, &mut scratch))
        .sum();
    (w_i, w_minus_i)
}

/// The `(i, A)`-derivative: worth with row `i` concentrated on `A` minus
/// worth with row `i` zeroed out. Evaluated through two worth computations.
pub fn derivative(w: &SetFunction, q: &MembershipProfile, i: usize, set: Subset) -> Result<f64> {
    check_family(w, q);
    let family = w.family();
    let a = family
        .index_of(set)
        .filter(|_| set.contains(i))
        .ok_or_else(|| {
            Error::InvalidArgument(format!("{set} is not a feasible set containing {}", i + 1))
        })?;
    let mut rows = q.rows.clone();
    rows[i].iter_mut().for_each(|x| *x = 0.0);
    let lower = worth_of_rows(w, &rows);
    rows[i][family.slot(a, i)] = 1.0;
    let upper = worth_of_rows(w, &rows);
    Ok(upper - lower)
}

/// Support condition for exactness: every feasible set is supported by
/// none or all of its members.
pub fn is_exact_support(q: &MembershipProfile, tol: f64) -> bool {
    first_support_violation(q, tol).is_none()
}

/// First member (in increasing order) supported by some but not all of its
/// elements, with the number of supporting elements.
pub fn first_support_violation(q: &MembershipProfile, tol: f64) -> Option<(usize, usize)> {
    (1..q.family.len()).find_map(|a| {
        let k = q.column_support(a, tol).len();
        (k != 0 && k != q.family.member(a).len()).then_some((a, k))
    })
}

/// The partition induced by a vertex profile: elements concentrating on the
/// same feasible set form one block.
pub fn induced_partition(q: &MembershipProfile, tol: f64) -> Result<Partition> {
    let choices = vertex_choices(q, tol)?;
    let mut groups: Vec<(usize, Subset)> = Vec::new();
    for (i, &a) in choices.iter().enumerate() {
        match groups.iter_mut().find(|(c, _)| *c == a) {
            Some((_, s)) => *s = s.with(i),
            None => groups.push((a, Subset::singleton(i))),
        }
    }
    Partition::new(q.n(), groups.into_iter().map(|(_, s)| s).collect())
}

/// The member each row is concentrated on; errors on the first fractional row.
pub fn vertex_choices(q: &MembershipProfile, tol: f64) -> Result<Vec<usize>> {
    (0..q.n())
        .map(|i| q.vertex_choice(i, tol).ok_or(Error::NotVertex(i + 1)))
        .collect()
}
