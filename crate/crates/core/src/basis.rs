//! Fermion configurations on a momentum grid and their lexicographic
//! ranking.
//!
//! A configuration is a strictly increasing tuple of grid indices. Inside
//! the crate it is a bitmask (bit `i` set when grid index `i` is occupied);
//! the same representation is used for subsets of lattice sites, with bit
//! `j - 1` standing for site `j`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::MomentumGrid;

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k as u64 {
        acc = acc * (n as u64 - i) / (i + 1);
    }
    acc as usize
}

/// Binomial coefficients `C(a, b)` for `a, b ≤ n`.
#[derive(Clone, Debug)]
pub(crate) struct Binomials {
    n: usize,
    table: Vec<usize>,
}

impl Binomials {
    pub(crate) fn new(n: usize) -> Self {
        let mut table = alloc::vec![0usize; (n + 1) * (n + 1)];
        for a in 0..=n {
            table[a * (n + 1)] = 1;
            for b in 1..=a {
                let above = table[(a - 1) * (n + 1) + b - 1];
                let left = if b < a {
                    table[(a - 1) * (n + 1) + b]
                } else {
                    0
                };
                table[a * (n + 1) + b] = above + left;
            }
        }
        Self { n, table }
    }

    #[inline]
    pub(crate) fn get(&self, a: usize, b: usize) -> usize {
        if b > a {
            0
        } else {
            self.table[a * (self.n + 1) + b]
        }
    }
}

/// All size-`size` subsets of `{0, …, n-1}` in lexicographic order of their
/// increasing tuples, with O(n) ranking.
#[derive(Clone, Debug)]
pub struct ConfigSpace {
    n: usize,
    size: usize,
    masks: Vec<u32>,
    binom: Binomials,
}

impl ConfigSpace {
    pub fn new(n: usize, size: usize) -> Self {
        assert!(n <= 31, "configuration masks hold at most 31 modes");
        let binom = Binomials::new(n);
        let count = binom.get(n, size);
        let mut masks = Vec::with_capacity(count);
        if size <= n {
            let mut tuple: Vec<usize> = (0..size).collect();
            loop {
                masks.push(tuple.iter().fold(0u32, |m, &i| m | (1 << i)));
                // advance to the next increasing tuple
                let mut pos = size;
                loop {
                    if pos == 0 {
                        return Self {
                            n,
                            size,
                            masks,
                            binom,
                        };
                    }
                    pos -= 1;
                    if tuple[pos] < n - size + pos {
                        break;
                    }
                }
                tuple[pos] += 1;
                for q in pos + 1..size {
                    tuple[q] = tuple[q - 1] + 1;
                }
            }
        }
        Self {
            n,
            size,
            masks,
            binom,
        }
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn mask(&self, index: usize) -> u32 {
        self.masks[index]
    }

    pub fn masks(&self) -> &[u32] {
        &self.masks
    }

    /// Lexicographic rank of a mask with `size` bits set below `n`.
    pub fn rank_of(&self, mask: u32) -> usize {
        debug_assert_eq!(mask.count_ones() as usize, self.size);
        let mut rank = 0;
        let mut prev: isize = -1;
        let mut placed = 0;
        let mut rest = mask;
        while rest != 0 {
            let c = rest.trailing_zeros() as isize;
            rest &= rest - 1;
            let remaining = self.size - placed - 1;
            for v in (prev + 1)..c {
                rank += self.binom.get(self.n - 1 - v as usize, remaining);
            }
            prev = c;
            placed += 1;
        }
        rank
    }
}

/// Indices of the set bits of `mask`, ascending.
pub(crate) fn bits(mask: u32) -> impl Iterator<Item = usize> {
    let mut rest = mask;
    core::iter::from_fn(move || {
        (rest != 0).then(|| {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            i
        })
    })
}

/// A Slater-state label: occupied wavenumbers of one grid, ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FermionConfig {
    grid: MomentumGrid,
    mask: u32,
}

impl FermionConfig {
    /// Configuration from grid indices; they must be strictly increasing.
    pub fn new(grid: MomentumGrid, modes: &[usize]) -> Result<Self> {
        if !modes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!(
                "grid indices must be strictly increasing, got {modes:?}"
            )));
        }
        if let Some(&bad) = modes.iter().find(|&&i| i >= grid.len()) {
            return Err(Error::InvalidArgument(format!(
                "grid index {bad} out of range for N = {}",
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            mask: modes.iter().fold(0, |m, &i| m | (1 << i)),
        })
    }

    /// Configuration from wavenumber numerators `q` (`k = qπ/N`), which must
    /// lie on `grid` and be strictly increasing.
    pub fn from_numerators(grid: MomentumGrid, numerators: &[i64]) -> Result<Self> {
        let modes = numerators
            .iter()
            .map(|&q| {
                grid.index_of_numerator(q).ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "wavenumber {q}π/{} is not on the {:?} grid",
                        grid.n_sites(),
                        grid.parity()
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, &modes)
    }

    pub(crate) fn from_mask(grid: MomentumGrid, mask: u32) -> Self {
        Self { grid, mask }
    }

    pub fn grid(&self) -> MomentumGrid {
        self.grid
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn modes(&self) -> Vec<usize> {
        bits(self.mask).collect()
    }

    pub fn numerators(&self) -> Vec<i64> {
        bits(self.mask).map(|i| self.grid.numerator(i)).collect()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        bits(self.mask).map(|i| self.grid.wavenumber(i)).collect()
    }

    /// Sum of the numerators, i.e. total momentum in units of `π/N`.
    pub fn total_numerator(&self) -> i64 {
        bits(self.mask).map(|i| self.grid.numerator(i)).sum()
    }

    pub fn rank(&self) -> usize {
        ConfigSpace::new(self.grid.len(), self.len()).rank_of(self.mask)
    }
}

/// All size-`n` configurations of `grid`, in lexicographic order.
pub fn enumerate_configs(grid: MomentumGrid, n: usize) -> Result<Vec<FermionConfig>> {
    if n > grid.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot place {n} fermions on {} modes",
            grid.len()
        )));
    }
    Ok(ConfigSpace::new(grid.len(), n)
        .masks()
        .iter()
        .map(|&m| FermionConfig::from_mask(grid, m))
        .collect())
}

pub fn rank(config: &FermionConfig) -> usize {
    config.rank()
}

pub fn unrank(grid: MomentumGrid, n: usize, index: usize) -> Result<FermionConfig> {
    let total = binomial(grid.len(), n);
    if n > grid.len() || index >= total {
        return Err(Error::InvalidArgument(format!(
            "index {index} out of range for C({}, {n}) = {total}",
            grid.len()
        )));
    }
    // greedy: choose each element as small as the remaining rank allows
    let binom = Binomials::new(grid.len());
    let mut rest = index;
    let mut mask = 0u32;
    let mut next = 0usize;
    for placed in 0..n {
        let remaining = n - placed - 1;
        let mut v = next;
        loop {
            let block = binom.get(grid.len() - 1 - v, remaining);
            if rest < block {
                break;
            }
            rest -= block;
            v += 1;
        }
        mask |= 1 << v;
        next = v + 1;
    }
    Ok(FermionConfig::from_mask(grid, mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{momentum_grid, Parity};

    #[test]
    fn four_choose_two() {
        let g = momentum_grid(4, Parity::Even).unwrap();
        let all = enumerate_configs(g, 2).unwrap();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0].modes(), [0, 1]);
        assert_eq!(all[0].rank(), 0);
        assert_eq!(all[5].modes(), [2, 3]);
        let tuples: Vec<_> = all.iter().map(|c| c.modes()).collect();
        let mut sorted = tuples.clone();
        sorted.sort();
        assert_eq!(tuples, sorted);
    }

    #[test]
    fn rank_unrank_round_trip() {
        let g = momentum_grid(8, Parity::Odd).unwrap();
        for (i, c) in enumerate_configs(g, 4).unwrap().iter().enumerate() {
            assert_eq!(rank(c), i);
            assert_eq!(&unrank(g, 4, i).unwrap(), c);
        }
    }

    #[test]
    fn unrank_out_of_range() {
        let g = momentum_grid(6, Parity::Even).unwrap();
        assert!(unrank(g, 3, 20).is_err());
        assert!(unrank(g, 7, 0).is_err());
        assert!(unrank(g, 0, 0).unwrap().is_empty());
    }

    #[test]
    fn invalid_configs() {
        let g = momentum_grid(6, Parity::Even).unwrap();
        assert!(FermionConfig::new(g, &[2, 1]).is_err());
        assert!(FermionConfig::new(g, &[1, 6]).is_err());
        assert!(FermionConfig::from_numerators(g, &[0]).is_err());
        assert_eq!(
            FermionConfig::from_numerators(g, &[-5, 1]).unwrap().modes(),
            [0, 3]
        );
    }

    #[test]
    fn binomials_agree() {
        let b = Binomials::new(20);
        for n in 0..=20 {
            for k in 0..=n + 1 {
                assert_eq!(b.get(n, k), binomial(n, k));
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn unrank_then_rank_is_identity(n in 1usize..=16, size_seed in 0usize..100, idx_seed in 0usize..100_000) {
            let n = 2 * ((n + 1) / 2);
            let size = size_seed % (n + 1);
            let g = momentum_grid(n, Parity::Even).unwrap();
            let total = binomial(n, size);
            let idx = idx_seed % total;
            let c = unrank(g, size, idx).unwrap();
            proptest::prop_assert_eq!(c.len(), size);
            proptest::prop_assert_eq!(rank(&c), idx);
        }
    }
}
