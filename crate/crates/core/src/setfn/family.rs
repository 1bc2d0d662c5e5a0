use super::Subset;
use crate::error::{Error, Result};

/// Largest ground set handled densely over all of `2^N`.
pub const MAX_FULL_N: usize = 16;
/// Largest ground set in family mode (one machine word per subset).
pub const MAX_FAMILY_N: usize = 64;
/// Largest feasible family accepted in family mode, before closure.
pub const MAX_FAMILY_SIZE: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Every subset of the ground set is feasible.
    Full,
    /// Only the listed subsets (plus the empty set and singletons) are feasible.
    Family,
}

/// The feasible family `F`, closed under the empty set and all singletons.
///
/// Members are kept sorted by their bit pattern, so the empty set always sits
/// at index 0 and every proper subset of a member comes before it. In full
/// mode member `k` is exactly the subset with bits `k`.
#[derive(Clone, Debug)]
pub struct Family {
    n: usize,
    mode: Mode,
    members: Vec<Subset>,
    synthetic: Vec<bool>,
    per_element: Vec<Vec<usize>>,
    // family mode only: slots[a][r] = position of the r-th element of member a in its row
    slots: Vec<Vec<u32>>,
    // family mode only: nonempty members that are subsets of member a (a itself last)
    below: Vec<Vec<usize>>,
}

impl Family {
    /// The full power set `2^N`.
    pub fn full(n: usize) -> Result<Family> {
        if n == 0 {
            return Err(Error::InvalidInstance("ground set must be nonempty".into()));
        }
        if n > MAX_FULL_N {
            return Err(Error::TooLarge {
                what: "ground set size in full mode",
                got: n,
                limit: MAX_FULL_N,
            });
        }
        let size = 1usize << n;
        let members = (0..size as u64).map(Subset).collect();
        let per_element = (0..n)
            .map(|i| (0..size).filter(|a| a >> i & 1 == 1).collect())
            .collect();
        Ok(Family {
            n,
            mode: Mode::Full,
            members,
            synthetic: vec![false; size],
            per_element,
            slots: Vec::new(),
            below: Vec::new(),
        })
    }

    /// Builds a family from `sets`, adding the empty set and any missing
    /// singletons as synthetic members. Duplicates are collapsed.
    ///
    /// Returns the family together with, for each input set, its member index.
    pub fn from_sets(n: usize, sets: &[Subset]) -> Result<(Family, Vec<usize>)> {
        if n == 0 {
            return Err(Error::InvalidInstance("ground set must be nonempty".into()));
        }
        if n > MAX_FAMILY_N {
            return Err(Error::TooLarge {
                what: "ground set size in family mode",
                got: n,
                limit: MAX_FAMILY_N,
            });
        }
        if sets.len() > MAX_FAMILY_SIZE {
            return Err(Error::TooLarge {
                what: "feasible family size",
                got: sets.len(),
                limit: MAX_FAMILY_SIZE,
            });
        }
        let ground = Subset::full(n);
        for s in sets {
            if !s.is_subset_of(ground) {
                return Err(Error::InvalidInstance(format!(
                    "set {s} has elements outside 1..={n}"
                )));
            }
        }

        let mut given: Vec<Subset> = sets.to_vec();
        given.sort_unstable();
        given.dedup();

        let mut members = given.clone();
        members.push(Subset::EMPTY);
        members.extend((0..n).map(Subset::singleton));
        members.sort_unstable();
        members.dedup();
        let synthetic = members
            .iter()
            .map(|m| given.binary_search(m).is_err() || m.is_empty())
            .collect();

        let mut per_element = vec![Vec::new(); n];
        for (a, m) in members.iter().enumerate() {
            for i in m.elements() {
                per_element[i].push(a);
            }
        }
        let mut slots: Vec<Vec<u32>> = members
            .iter()
            .map(|m| Vec::with_capacity(m.len()))
            .collect();
        for row in &per_element {
            for (pos, &a) in row.iter().enumerate() {
                slots[a].push(pos as u32);
            }
        }
        let below = members
            .iter()
            .enumerate()
            .map(|(a, m)| {
                (1..=a)
                    .filter(|&b| members[b].is_subset_of(*m))
                    .collect::<Vec<_>>()
            })
            .collect();

        let family = Family {
            n,
            mode: Mode::Family,
            members,
            synthetic,
            per_element,
            slots,
            below,
        };
        let index = sets
            .iter()
            .map(|s| family.index_of(*s).expect("input set is a member"))
            .collect();
        Ok((family, index))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn mode(&self) -> Mode {
        self.mode
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn ground(&self) -> Subset {
        Subset::full(self.n)
    }

    #[inline]
    pub fn members(&self) -> &[Subset] {
        &self.members
    }

    #[inline]
    pub fn member(&self, a: usize) -> Subset {
        self.members[a]
    }

    /// True for members added by closure (the empty set and singletons that
    /// were not part of the input family).
    #[inline]
    pub fn is_synthetic(&self, a: usize) -> bool {
        self.synthetic[a]
    }

    pub fn index_of(&self, s: Subset) -> Option<usize> {
        match self.mode {
            Mode::Full => s.is_subset_of(self.ground()).then_some(s.bits() as usize),
            Mode::Family => self.members.binary_search(&s).ok(),
        }
    }

    pub fn contains(&self, s: Subset) -> bool {
        self.index_of(s).is_some()
    }

    /// `F_i`: member indices of the feasible sets containing element `i`,
    /// in increasing order.
    #[inline]
    pub fn containing(&self, i: usize) -> &[usize] {
        &self.per_element[i]
    }

    /// Position of member `a` inside row `i` of a membership profile.
    /// `a` must contain `i`.
    #[inline]
    pub fn slot(&self, a: usize, i: usize) -> usize {
        match self.mode {
            Mode::Full => {
                // drop bit i: sets containing i map monotonically onto 0..2^(n-1)
                let low = a & ((1usize << i) - 1);
                low | ((a >> (i + 1)) << i)
            }
            Mode::Family => self.slots[a][self.members[a].rank_of(i)] as usize,
        }
    }

    /// Nonempty members contained in member `a` (including `a`), in
    /// increasing order. Family mode only; full mode enumerates submasks.
    pub(crate) fn members_below(&self, a: usize) -> &[usize] {
        debug_assert_eq!(self.mode, Mode::Family);
        &self.below[a]
    }

    /// Nonempty members contained in an arbitrary subset `s`.
    pub fn members_within(&self, s: Subset) -> Vec<usize> {
        match self.mode {
            Mode::Full => s.subsets().skip(1).map(|b| b.bits() as usize).collect(),
            Mode::Family => (1..self.len())
                .filter(|&b| self.members[b].is_subset_of(s))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_adds_empty_and_singletons() {
        let sets = [Subset::from_elements([0, 1]), Subset::from_elements([2])];
        let (f, idx) = Family::from_sets(3, &sets).unwrap();
        let got: Vec<u64> = f.members().iter().map(|s| s.bits()).collect();
        assert_eq!(got, vec![0b000, 0b001, 0b010, 0b011, 0b100]);
        assert!(f.is_synthetic(0));
        assert!(f.is_synthetic(1));
        assert!(!f.is_synthetic(3));
        assert!(!f.is_synthetic(4));
        assert_eq!(idx, vec![3, 4]);
        for i in 0..3 {
            assert!(!f.containing(i).is_empty());
        }
    }

    #[test]
    fn duplicates_collapse() {
        let s = Subset::from_elements([0, 1]);
        let (f, idx) = Family::from_sets(2, &[s, s]).unwrap();
        assert_eq!(f.len(), 4);
        assert_eq!(idx[0], idx[1]);
    }

    #[test]
    fn full_slots_are_row_positions() {
        let f = Family::full(4).unwrap();
        for i in 0..4 {
            for (pos, &a) in f.containing(i).iter().enumerate() {
                assert_eq!(f.slot(a, i), pos);
            }
        }
    }

    #[test]
    fn family_slots_are_row_positions() {
        let sets = [
            Subset::from_elements([0, 1, 2, 3]),
            Subset::from_elements([3]),
            Subset::from_elements([0, 1]),
            Subset::from_elements([0, 2]),
            Subset::from_elements([1, 2]),
        ];
        let (f, _) = Family::from_sets(4, &sets).unwrap();
        for i in 0..4 {
            for (pos, &a) in f.containing(i).iter().enumerate() {
                assert_eq!(f.slot(a, i), pos);
            }
        }
        let top = f.index_of(Subset::full(4)).unwrap();
        // {1},{2},{1,2},{3},{1,3},{2,3},{4},N
        assert_eq!(f.members_below(top).len(), 8);
    }

    #[test]
    fn size_guards() {
        assert!(matches!(Family::full(17), Err(Error::TooLarge { .. })));
        assert!(matches!(Family::full(0), Err(Error::InvalidInstance(_))));
        assert!(Family::from_sets(3, &[Subset::from_elements([5])]).is_err());
    }
}
