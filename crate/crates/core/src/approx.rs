//! Best `k`-degree approximation of a partition function.
//!
//! A set function `w` induces the partition function `F(P) = Σ_{A ∈ P} w(A)`.
//! The degree-`k` approximation `F_k` is the least-squares fit of `F` over
//! all partitions by partition functions whose set function has Möbius
//! inversion supported on sets of size at most `k`. Since every singleton
//! lies inside some block of every partition, the singleton coefficients only
//! enter through their sum: the coefficients are determined up to a gauge,
//! the fitted values are not.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::cover::Partition;
use crate::error::{Error, Result};
use crate::setfn::{Mode, SetFunction, Subset};

/// Largest ground set for which the approximation is computed (`B_8 = 4140`
/// partitions).
pub const MAX_APPROX_N: usize = 8;
/// Largest ground set accepted by the enumeration helpers.
pub const MAX_ENUM_N: usize = 12;

/// `B_n`, via the Bell triangle.
pub fn bell(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &x in &row {
            let last = *next.last().unwrap();
            next.push(last + x);
        }
        row = next;
    }
    row[0]
}

/// Partitions of `{0, .., n-1}` as restricted growth strings in
/// lexicographic order: `a[0] = 0` and `a[k] <= 1 + max(a[..k])`.
#[derive(Clone, Debug)]
pub struct Partitions {
    rgs: Vec<usize>,
    // prefix maxima of rgs
    max: Vec<usize>,
    done: bool,
}

impl Partitions {
    fn current(&self) -> Partition {
        let n = self.rgs.len();
        let count = self.max.last().map_or(0, |m| m + 1);
        let mut blocks = vec![Subset::EMPTY; count];
        for (i, &b) in self.rgs.iter().enumerate() {
            blocks[b] = blocks[b].with(i);
        }
        Partition::new(n, blocks).expect("restricted growth strings encode partitions")
    }

    fn advance(&mut self) {
        let n = self.rgs.len();
        for k in (1..n).rev() {
            if self.rgs[k] <= self.max[k - 1] {
                self.rgs[k] += 1;
                self.max[k] = self.max[k - 1].max(self.rgs[k]);
                for l in k + 1..n {
                    self.rgs[l] = 0;
                    self.max[l] = self.max[k];
                }
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for Partitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        let p = self.current();
        self.advance();
        Some(p)
    }
}

/// All `B_n` partitions of an `n`-set, each exactly once.
pub fn enumerate_partitions(n: usize) -> Result<Partitions> {
    if n == 0 || n > MAX_ENUM_N {
        return Err(Error::TooLarge {
            what: "ground set size for partition enumeration",
            got: n,
            limit: MAX_ENUM_N,
        });
    }
    Ok(Partitions {
        rgs: vec![0; n],
        max: vec![0; n],
        done: false,
    })
}

#[derive(Clone, Debug)]
pub struct ApproxResult {
    pub k: usize,
    /// Nonempty subsets of size at most `k`, in increasing bit order.
    pub support: Vec<Subset>,
    /// Möbius coefficients of the fitted set function, parallel to `support`.
    pub mu: Vec<f64>,
    /// Partitions in enumeration order.
    pub partitions: Vec<Partition>,
    /// `F(P)` for each partition.
    pub targets: Vec<f64>,
    /// `F_k(P)` for each partition.
    pub values: Vec<f64>,
    /// `Σ (F - F_k)^2`.
    pub residual: f64,
}

/// How the rank-deficient least-squares problem is resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Gauge {
    /// Minimum-norm least-squares solution.
    #[default]
    MinimumNorm,
    /// Singleton coefficients of elements `2..n` pinned to zero.
    PinnedSingletons,
}

struct Design {
    support: Vec<Subset>,
    partitions: Vec<Partition>,
    matrix: DMatrix<f64>,
    targets: DVector<f64>,
}

fn design(w: &SetFunction, k: usize) -> Result<Design> {
    let n = w.n();
    if w.mode() != Mode::Full {
        return Err(Error::Unsupported(
            "degree-k approximation is defined for full-mode instances".into(),
        ));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "degree k must lie in 1..={n}, got {k}"
        )));
    }
    if n > MAX_APPROX_N {
        return Err(Error::TooLarge {
            what: "ground set size for approximation",
            got: n,
            limit: MAX_APPROX_N,
        });
    }
    let support: Vec<Subset> = Subset::full(n)
        .subsets()
        .filter(|s| !s.is_empty() && s.len() <= k)
        .collect();
    let partitions: Vec<Partition> = enumerate_partitions(n)?.collect();
    let mut matrix = DMatrix::zeros(partitions.len(), support.len());
    let mut targets = DVector::zeros(partitions.len());
    for (r, p) in partitions.iter().enumerate() {
        targets[r] = p.weight(w).expect("full mode: every block is feasible");
        for (c, &a) in support.iter().enumerate() {
            if p.blocks().iter().any(|&b| a.is_subset_of(b)) {
                matrix[(r, c)] = 1.0;
            }
        }
    }
    Ok(Design {
        support,
        partitions,
        matrix,
        targets,
    })
}

/// Least-squares degree-`k` approximation with the default gauge.
pub fn k_degree_approx(w: &SetFunction, k: usize) -> Result<ApproxResult> {
    k_degree_approx_with(w, k, Gauge::MinimumNorm)
}

pub fn k_degree_approx_with(w: &SetFunction, k: usize, gauge: Gauge) -> Result<ApproxResult> {
    let d = design(w, k)?;
    let mu = match gauge {
        Gauge::MinimumNorm => minimum_norm(&d.matrix, &d.targets),
        Gauge::PinnedSingletons => pinned(&d, w.n())?,
    };
    let fitted = &d.matrix * &mu;
    let residual = (&d.targets - &fitted).norm_squared();
    Ok(ApproxResult {
        k,
        support: d.support,
        mu: mu.iter().copied().collect(),
        partitions: d.partitions,
        targets: d.targets.iter().copied().collect(),
        values: fitted.iter().copied().collect(),
        residual,
    })
}

/// Eigenvalues of the Gram matrix below this fraction of the largest are
/// treated as zero.
const RANK_CUTOFF: f64 = 1e-10;

/// Minimum-norm solution of the normal equations `XᵀX μ = Xᵀy`, through the
/// eigendecomposition of `XᵀX`, followed by one step of iterative refinement.
fn minimum_norm(x: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let eig = SymmetricEigen::new(x.transpose() * x);
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let inverse = eig.eigenvalues.map(|l| {
        if l.abs() > top * RANK_CUTOFF {
            1.0 / l
        } else {
            0.0
        }
    });
    let apply = |rhs: DVector<f64>| {
        let coords = eig.eigenvectors.transpose() * rhs;
        &eig.eigenvectors * coords.component_mul(&inverse)
    };
    let mu = apply(x.transpose() * y);
    let correction = apply(x.transpose() * (y - x * &mu));
    mu + correction
}

/// Least squares with the singleton coefficients of elements `2..n` fixed
/// at zero. The remaining columns have full rank, so a thin QR solves it.
fn pinned(d: &Design, n: usize) -> Result<DVector<f64>> {
    let keep: Vec<usize> = d
        .support
        .iter()
        .enumerate()
        .filter(|(_, s)| s.len() != 1 || s.contains(0))
        .map(|(c, _)| c)
        .collect();
    debug_assert_eq!(d.support.len() - keep.len(), n - 1);
    let (q, r) = d.matrix.select_columns(keep.iter()).qr().unpack();
    let sol = r
        .solve_upper_triangular(&(q.transpose() * &d.targets))
        .ok_or_else(|| Error::InvalidArgument("pinned design matrix is rank deficient".into()))?;
    let mut mu = DVector::zeros(d.support.len());
    for (pos, &c) in keep.iter().enumerate() {
        mu[c] = sol[pos];
    }
    Ok(mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let expect = [1u64, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975];
        for (n, &b) in expect.iter().enumerate() {
            assert_eq!(bell(n), b);
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_partitions(1).unwrap().count(), 1);
        assert_eq!(enumerate_partitions(3).unwrap().count(), 5);
        assert_eq!(enumerate_partitions(8).unwrap().count(), 4140);
        assert!(enumerate_partitions(0).is_err());
        assert!(enumerate_partitions(13).is_err());
    }

    #[test]
    fn enumeration_order_and_uniqueness() {
        let all: Vec<Partition> = enumerate_partitions(3).unwrap().collect();
        // rgs 000, 001, 010, 011, 012
        let shown: Vec<Vec<u64>> = all
            .iter()
            .map(|p| p.blocks().iter().map(|b| b.bits()).collect())
            .collect();
        assert_eq!(
            shown,
            vec![
                vec![0b111],
                vec![0b011, 0b100],
                vec![0b010, 0b101],
                vec![0b001, 0b110],
                vec![0b001, 0b010, 0b100]
            ]
        );
        let mut six: Vec<Partition> = enumerate_partitions(6).unwrap().collect();
        six.sort();
        six.dedup();
        assert_eq!(six.len(), 203);
    }

    #[test]
    fn k_equals_n_is_exact() {
        let w = SetFunction::full(3, vec![0.0, 0.2, 0.2, 0.8, 0.2, 0.3, 0.6, 0.7]).unwrap();
        let r = k_degree_approx(&w, 3).unwrap();
        assert!(r.residual < 1e-12);
        for (f, fk) in r.targets.iter().zip(&r.values) {
            assert!((f - fk).abs() < 1e-9);
        }
    }

    #[test]
    fn degree_one_is_the_mean() {
        let w = SetFunction::full(3, vec![0.0, 0.2, 0.2, 0.8, 0.2, 0.3, 0.6, 0.7]).unwrap();
        let r = k_degree_approx(&w, 1).unwrap();
        let mean = r.targets.iter().sum::<f64>() / r.targets.len() as f64;
        for v in &r.values {
            assert!((v - mean).abs() < 1e-9);
        }
        assert!(r.support.iter().all(|s| s.len() == 1));
    }

    #[test]
    fn gauges_agree_on_fitted_values() {
        let weights: Vec<f64> = (0..16)
            .map(|b| {
                if b == 0 {
                    0.0
                } else {
                    ((b * 7) % 11) as f64 / 3.0
                }
            })
            .collect();
        let w = SetFunction::full(4, weights).unwrap();
        for k in 1..=4 {
            let a = k_degree_approx_with(&w, k, Gauge::MinimumNorm).unwrap();
            let b = k_degree_approx_with(&w, k, Gauge::PinnedSingletons).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-9, "k={k}: {x} vs {y}");
            }
            assert!(b
                .mu
                .iter()
                .zip(&b.support)
                .all(|(m, s)| s.len() != 1 || s.contains(0) || *m == 0.0));
        }
    }

    #[test]
    fn rejects_bad_degree() {
        let w = SetFunction::full(3, vec![0.0; 8]).unwrap();
        assert!(matches!(
            k_degree_approx(&w, 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            k_degree_approx(&w, 4),
            Err(Error::InvalidArgument(_))
        ));
        let big = SetFunction::full(9, vec![0.0; 512]).unwrap();
        assert!(matches!(
            k_degree_approx(&big, 1),
            Err(Error::TooLarge { .. })
        ));
    }
}
