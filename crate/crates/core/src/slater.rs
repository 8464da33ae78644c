//! Plane-wave Slater determinants and the f-function tables that couple
//! adjacent fermion-number sectors.
//!
//! For a configuration `K` of `s` wavenumbers and a set `J` of `s` sites,
//! `S(K; J) = N^{-s/2} det[e^{i k_a j_b}]`. The f-function
//!
//! ```text
//! f̃(K'; P) = Σ_{J' ⊂ sites, |J'| = m+1} S(K'; J') Σ_l g_{j_l} S*(P; J' \ j_l)
//! ```
//!
//! with `|K'| = m + 1` and `|P| = m` is the matrix element
//! `⟨P| Σ_j g_j σ_j^- |K'⟩`: the lowering operator carries no Jordan-Wigner
//! sign in the spin basis, which is why the removed-site sum has none.
//!
//! Tables are built from the compound matrices `S_s[K][J]` of all minors.
//! Level `s` is obtained from level `s - 1` by Laplace expansion along the
//! lowest wavenumber, reusing the memoized sub-determinants, and the table
//! is the contraction of the level-`m+1` compound with the removed-site sums
//! of the level-`m` compound.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::basis::{bits, ConfigSpace, FermionConfig};
use crate::error::{Error, Result};
use crate::math::{self, PI};
use crate::model::{check_sites, Coupling, MomentumGrid};
use crate::par;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Entries with `|f| < ZERO_RELATIVE · max|f|` are structural zeros.
pub const ZERO_RELATIVE: f64 = 1e-13;

/// `S(ks; js) = N^{-m/2} det[e^{i k_a j_b}]` by LU factorization with partial
/// pivoting. Sites are 1-based.
pub fn slater(n_sites: usize, ks: &[f64], js: &[usize]) -> Result<Complex64> {
    if ks.len() != js.len() {
        return Err(Error::InvalidArgument(format!(
            "slater needs equal-length tuples, got {} wavenumbers and {} sites",
            ks.len(),
            js.len()
        )));
    }
    if let Some(&bad) = js.iter().find(|&&j| j == 0 || j > n_sites) {
        return Err(Error::InvalidArgument(format!(
            "site {bad} outside 1..={n_sites}"
        )));
    }
    let m = ks.len();
    let mut a: Vec<Complex64> = Vec::with_capacity(m * m);
    for &k in ks {
        for &j in js {
            a.push(math::cis(k * j as f64));
        }
    }
    let norm = math::sqrt(n_sites as f64);
    Ok(determinant(&mut a, m) / libm::pow(norm, m as f64))
}

/// Determinant of a row-major `m × m` matrix, destroyed in place.
pub(crate) fn determinant(a: &mut [Complex64], m: usize) -> Complex64 {
    let mut det = ONE;
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&x, &y| a[x * m + col].norm().total_cmp(&a[y * m + col].norm()))
            .unwrap();
        if a[pivot * m + col].norm() == 0.0 {
            return ZERO;
        }
        if pivot != col {
            for c in 0..m {
                a.swap(pivot * m + c, col * m + c);
            }
            det = -det;
        }
        let p = a[col * m + col];
        det *= p;
        for r in col + 1..m {
            let factor = a[r * m + col] / p;
            if factor == ZERO {
                continue;
            }
            for c in col + 1..m {
                let v = a[col * m + c];
                a[r * m + c] -= factor * v;
            }
        }
    }
    det
}

/// `e^{i k j} / √N` for every grid index and site, with the phase reduced
/// modulo `2π` in exact integer arithmetic.
fn plane_waves(grid: MomentumGrid) -> Vec<Complex64> {
    let n = grid.n_sites();
    let two_n = 2 * n as i64;
    let inv_sqrt = 1.0 / math::sqrt(n as f64);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let q = grid.numerator(i);
        for j in 1..=n as i64 {
            let reduced = (q * j).rem_euclid(two_n);
            out.push(math::cis(reduced as f64 * PI / n as f64) * inv_sqrt);
        }
    }
    out
}

/// Matrix of all `size × size` minors `S(K; J)`: rows are mode subsets of
/// `grid`, columns site subsets, both in lexicographic order.
pub(crate) struct Compound {
    pub(crate) space: ConfigSpace,
    pub(crate) values: Vec<Complex64>,
}

impl Compound {
    #[inline]
    pub(crate) fn get(&self, row: usize, col: usize) -> Complex64 {
        self.values[row * self.space.len() + col]
    }

    pub(crate) fn build(grid: MomentumGrid, size: usize) -> Self {
        let n = grid.n_sites();
        let waves = plane_waves(grid);
        let mut prev_space = ConfigSpace::new(n, 0);
        let mut prev = vec![ONE];
        for s in 1..=size {
            let space = ConfigSpace::new(n, s);
            let width = space.len();
            let prev_width = prev_space.len();
            // for each site subset: (site bit, rank of the subset without it)
            let removals: Vec<(usize, usize)> = space
                .masks()
                .iter()
                .flat_map(|&mask| {
                    let ps = &prev_space;
                    bits(mask).map(move |b| (b, ps.rank_of(mask & !(1 << b))))
                })
                .collect();
            let rows = par::map_range(width, |r| {
                let mask = space.mask(r);
                let lowest = mask.trailing_zeros() as usize;
                let rest = prev_space.rank_of(mask & (mask - 1));
                let sub = &prev[rest * prev_width..(rest + 1) * prev_width];
                let wave = &waves[lowest * n..(lowest + 1) * n];
                let mut row = Vec::with_capacity(width);
                for c in 0..width {
                    let mut acc = ZERO;
                    for (b, &(site, minor)) in removals[c * s..(c + 1) * s].iter().enumerate() {
                        let term = wave[site] * sub[minor];
                        if b % 2 == 0 {
                            acc += term;
                        } else {
                            acc -= term;
                        }
                    }
                    row.push(acc);
                }
                row
            });
            prev = rows.into_iter().flatten().collect();
            prev_space = space;
        }
        Self {
            space: prev_space,
            values: prev,
        }
    }
}

/// Knobs for table construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableBuildOptions {
    /// Refuse to build when the working-set estimate exceeds this many bytes.
    pub memory_cap_bytes: u64,
}

impl Default for TableBuildOptions {
    fn default() -> Self {
        Self {
            memory_cap_bytes: 4 << 30,
        }
    }
}

/// Precomputed f-function values for one pair of adjacent sectors.
///
/// Rows are configurations of `m + 1` fermions (grid of parity `m + 1`),
/// columns configurations of `m` fermions (grid of parity `m`). For a
/// uniform coupling the stored values are the coupling-independent `f` and
/// `f̃ = g f`; for a per-site profile the stored values are `f̃` itself.
#[derive(Clone, Debug, PartialEq)]
pub struct FTable {
    n_sites: usize,
    m: usize,
    coupling: Coupling,
    rows: usize,
    cols: usize,
    values: Vec<Complex64>,
    threshold: f64,
}

/// Estimated peak working set of [`FTable::build`], in bytes.
pub fn table_memory_estimate(n_sites: usize, m: usize) -> u64 {
    let hi = crate::basis::binomial(n_sites, m + 1) as u64;
    let lo = crate::basis::binomial(n_sites, m) as u64;
    16 * (hi * hi + lo * lo + 2 * hi * lo)
}

impl FTable {
    pub fn build(n_sites: usize, m: usize, coupling: &Coupling, opts: &TableBuildOptions) -> Result<Self> {
        check_sites(n_sites)?;
        if m + 1 > n_sites {
            return Err(Error::InvalidArgument(format!(
                "f-table needs m + 1 <= N, got m = {m}, N = {n_sites}"
            )));
        }
        if let Coupling::PerSite(gs) = coupling {
            if gs.len() != n_sites {
                return Err(Error::param("g", "per-site profile length differs from N"));
            }
        }
        let estimate = table_memory_estimate(n_sites, m);
        if estimate > opts.memory_cap_bytes {
            return Err(Error::Resource {
                n_sites,
                m,
                estimate,
                cap: opts.memory_cap_bytes,
            });
        }
        let profile: Vec<f64> = match coupling {
            Coupling::Uniform(_) => vec![1.0; n_sites],
            Coupling::PerSite(gs) => gs.clone(),
        };

        let hi = Compound::build(MomentumGrid::for_count_unchecked(n_sites, m + 1), m + 1);
        let lo = Compound::build(MomentumGrid::for_count_unchecked(n_sites, m), m);
        let sites_hi = &hi.space;
        let rows = sites_hi.len();
        let cols = lo.space.len();

        // removed-site sums G[P][J'] = Σ_l g_{j_l} S*(P; J' \ j_l)
        let removals: Vec<(usize, usize)> = sites_hi
            .masks()
            .iter()
            .flat_map(|&mask| {
                let lo_space = &lo.space;
                bits(mask).map(move |b| (b, lo_space.rank_of(mask & !(1 << b))))
            })
            .collect();
        let width = m + 1;
        let removed = par::map_range(cols, |p| {
            (0..rows)
                .map(|c| {
                    removals[c * width..(c + 1) * width]
                        .iter()
                        .fold(ZERO, |acc, &(site, minor)| {
                            acc + lo.get(p, minor).conj() * profile[site]
                        })
                })
                .collect::<Vec<_>>()
        });

        let values: Vec<Complex64> = par::map_range(rows, |k| {
            let s_row = &hi.values[k * rows..(k + 1) * rows];
            removed
                .iter()
                .map(|g_row| {
                    s_row
                        .iter()
                        .zip(g_row)
                        .fold(ZERO, |acc, (s, g)| acc + s * g)
                })
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect();

        Self::from_values(n_sites, m, coupling.clone(), values)
    }

    /// Wraps precomputed values (row-major, profile units), e.g. from a cache.
    pub fn from_values(n_sites: usize, m: usize, coupling: Coupling, values: Vec<Complex64>) -> Result<Self> {
        check_sites(n_sites)?;
        let rows = crate::basis::binomial(n_sites, m + 1);
        let cols = crate::basis::binomial(n_sites, m);
        if values.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "f-table for N = {n_sites}, m = {m} needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        let max = values.iter().fold(0.0f64, |acc, v| acc.max(v.norm()));
        Ok(Self {
            n_sites,
            m,
            coupling,
            rows,
            cols,
            values,
            threshold: ZERO_RELATIVE * max,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    /// Grid of the row configurations (`m + 1` fermions).
    pub fn row_grid(&self) -> MomentumGrid {
        MomentumGrid::for_count_unchecked(self.n_sites, self.m + 1)
    }

    /// Grid of the column configurations (`m` fermions).
    pub fn col_grid(&self) -> MomentumGrid {
        MomentumGrid::for_count_unchecked(self.n_sites, self.m)
    }

    /// `g` for a uniform profile, `1` otherwise.
    pub fn scale(&self) -> f64 {
        match self.coupling {
            Coupling::Uniform(g) => g,
            Coupling::PerSite(_) => 1.0,
        }
    }

    /// Stored values in profile units, row-major.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Stored (profile-unit) value; the coupling-independent `f` for a
    /// uniform profile.
    pub fn unit_value(&self, row: usize, col: usize) -> Complex64 {
        self.values[row * self.cols + col]
    }

    /// `f̃(row; col)` including the coupling.
    pub fn value(&self, row: usize, col: usize) -> Complex64 {
        self.unit_value(row, col) * self.scale()
    }

    pub fn is_structural_zero(&self, row: usize, col: usize) -> bool {
        self.unit_value(row, col).norm() < self.threshold
    }

    pub fn zero_fraction(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let zeros = self.values.iter().filter(|v| v.norm() < self.threshold).count();
        zeros as f64 / self.values.len() as f64
    }

    /// Nonzero entries of one row as `(col, f̃)`, ascending in `col`.
    pub fn row_nonzeros(&self, row: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let scale = self.scale();
        self.values[row * self.cols..(row + 1) * self.cols]
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm() >= self.threshold)
            .map(move |(c, v)| (c, v * scale))
    }

    /// `f̃(ks; ps)` for wavenumber numerators in any order; permutations are
    /// sorted with sign tracking, repeated wavenumbers give zero.
    pub fn lookup(&self, ks: &[i64], ps: &[i64]) -> Result<Complex64> {
        if ks.len() != self.m + 1 || ps.len() != self.m {
            return Err(Error::InvalidArgument(format!(
                "table m = {} takes {} and {} wavenumbers, got {} and {}",
                self.m,
                self.m + 1,
                self.m,
                ks.len(),
                ps.len()
            )));
        }
        let (row_mask, s1) = canonical_mask(self.row_grid(), ks)?;
        let (col_mask, s2) = canonical_mask(self.col_grid(), ps)?;
        let (Some(row_mask), Some(col_mask)) = (row_mask, col_mask) else {
            return Ok(ZERO);
        };
        let row = ConfigSpace::new(self.n_sites, self.m + 1).rank_of(row_mask);
        let col = ConfigSpace::new(self.n_sites, self.m).rank_of(col_mask);
        Ok(self.value(row, col) * (s1 * s2))
    }

    pub fn row_config(&self, row: usize) -> FermionConfig {
        let mask = ConfigSpace::new(self.n_sites, self.m + 1).mask(row);
        FermionConfig::from_mask(self.row_grid(), mask)
    }

    pub fn col_config(&self, col: usize) -> FermionConfig {
        let mask = ConfigSpace::new(self.n_sites, self.m).mask(col);
        FermionConfig::from_mask(self.col_grid(), mask)
    }
}

/// Sorts numerators into a mask, returning the permutation sign. `None`
/// when a wavenumber repeats.
fn canonical_mask(grid: MomentumGrid, numerators: &[i64]) -> Result<(Option<u32>, f64)> {
    let mut idx = numerators
        .iter()
        .map(|&q| {
            grid.index_of_numerator(q).ok_or_else(|| {
                Error::InvalidArgument(format!("wavenumber {q}π/{} is not on the grid", grid.n_sites()))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sign = 1.0;
    // insertion sort, counting transpositions
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        return Ok((None, 0.0));
    }
    Ok((Some(idx.iter().fold(0, |m, &i| m | (1 << i))), sign))
}

/// `build_f_table(N, m, g)`.
pub fn build_f_table(n_sites: usize, m: usize, coupling: &Coupling) -> Result<FTable> {
    FTable::build(n_sites, m, coupling, &TableBuildOptions::default())
}

/// Direct evaluation of `f̃(ks; ps)` by summing over all ordered site
/// subsets with LU determinants. Slow; used as a reference.
pub fn f_function(ks: &FermionConfig, ps: &FermionConfig, coupling: &Coupling) -> Result<Complex64> {
    let n_sites = ks.grid().n_sites();
    if ps.grid().n_sites() != n_sites {
        return Err(Error::InvalidArgument("configurations from different chains".into()));
    }
    if ks.grid().parity() == ps.grid().parity() {
        return Err(Error::InvalidArgument(
            "f-function arguments must come from different parity grids".into(),
        ));
    }
    if ks.len() != ps.len() + 1 {
        return Err(Error::InvalidArgument(format!(
            "f-function needs |ks| = |ps| + 1, got {} and {}",
            ks.len(),
            ps.len()
        )));
    }
    let kw = ks.wavenumbers();
    let pw = ps.wavenumbers();
    let mut total = ZERO;
    for &mask in ConfigSpace::new(n_sites, ks.len()).masks() {
        let sites: Vec<usize> = bits(mask).map(|b| b + 1).collect();
        let s_k = slater(n_sites, &kw, &sites)?;
        let mut inner = ZERO;
        for l in 0..sites.len() {
            let mut rest = sites.clone();
            let removed = rest.remove(l);
            inner += slater(n_sites, &pw, &rest)?.conj() * coupling.site(removed);
        }
        total += s_k * inner;
    }
    Ok(total)
}

/// Dicke-state amplitudes `B(K; 0) = C(N,n)^{-1/2} Σ_J S*(K; J)` over the
/// size-`n` configurations of the grid of parity `n`, lexicographic order.
pub fn dicke_initial_amplitudes(n_sites: usize, n: usize) -> Result<Vec<Complex64>> {
    check_sites(n_sites)?;
    if n > n_sites {
        return Err(Error::InvalidArgument(format!("n = {n} exceeds N = {n_sites}")));
    }
    let compound = Compound::build(MomentumGrid::for_count_unchecked(n_sites, n), n);
    let width = compound.space.len();
    let norm = 1.0 / math::sqrt(width as f64);
    Ok((0..width)
        .map(|r| {
            compound.values[r * width..(r + 1) * width]
                .iter()
                .fold(ZERO, |acc, v| acc + v.conj())
                * norm
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::enumerate_configs;
    use crate::model::{momentum_grid, Parity};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Cofactor expansion along the first row.
    fn cofactor_det(a: &[Complex64], m: usize) -> Complex64 {
        if m == 0 {
            return ONE;
        }
        let mut total = ZERO;
        for c in 0..m {
            let minor: Vec<Complex64> = (1..m)
                .flat_map(|r| (0..m).filter(move |&cc| cc != c).map(move |cc| (r, cc)))
                .map(|(r, cc)| a[r * m + cc])
                .collect();
            let term = a[c] * cofactor_det(&minor, m - 1);
            total += if c % 2 == 0 { term } else { -term };
        }
        total
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn single_wave() {
        let k = 0.7;
        let v = slater(5, &[k], &[3]).unwrap();
        assert!(close(v, math::cis(3.0 * k) / math::sqrt(5.0), 1e-15));
    }

    #[test]
    fn two_by_two_by_hand() {
        let v = slater(4, &[-PI / 4.0, 3.0 * PI / 4.0], &[1, 2]).unwrap();
        let expected = (math::cis(-PI / 4.0) * math::cis(3.0 * PI / 2.0)
            - math::cis(3.0 * PI / 4.0) * math::cis(-PI / 2.0))
            * 0.25;
        assert!(close(v, expected, 1e-15));
    }

    #[test]
    fn swapping_wavenumbers_negates() {
        let a = slater(6, &[0.1, 1.3, -2.0], &[1, 4, 6]).unwrap();
        let b = slater(6, &[1.3, 0.1, -2.0], &[1, 4, 6]).unwrap();
        assert!(close(a, -b, 1e-14));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(slater(4, &[0.1, 0.2], &[1]).is_err());
        assert!(slater(4, &[0.1], &[5]).is_err());
    }

    #[test]
    fn lu_matches_cofactor_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in 1..=4 {
            for _ in 0..20 {
                let a: Vec<Complex64> = (0..m * m)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                let reference = cofactor_det(&a, m);
                let lu = determinant(&mut a.clone(), m);
                assert!(close(lu, reference, 1e-12), "m = {m}");
            }
        }
    }

    #[test]
    fn compound_matches_direct_determinants() {
        for parity in [Parity::Even, Parity::Odd] {
            let grid = momentum_grid(6, parity).unwrap();
            for size in 0..=4 {
                let compound = Compound::build(grid, size);
                let configs = enumerate_configs(grid, size).unwrap();
                let sites = ConfigSpace::new(6, size);
                for (r, c) in configs.iter().enumerate() {
                    for (col, &mask) in sites.masks().iter().enumerate() {
                        let js: Vec<usize> = bits(mask).map(|b| b + 1).collect();
                        let direct = slater(6, &c.wavenumbers(), &js).unwrap();
                        assert!(close(compound.get(r, col), direct, 1e-13));
                    }
                }
            }
        }
    }

    #[test]
    fn orthonormality_sum_rule() {
        for n in [2usize, 4, 6] {
            for size in 0..=3.min(n) {
                let grid = MomentumGrid::for_count(n, size).unwrap();
                let compound = Compound::build(grid, size);
                let w = compound.space.len();
                for a in 0..w {
                    for b in 0..w {
                        let overlap = (0..w).fold(ZERO, |acc, j| {
                            acc + compound.get(a, j).conj() * compound.get(b, j)
                        });
                        let expected = if a == b { ONE } else { ZERO };
                        assert!(close(overlap, expected, 1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn single_fermion_f_is_zero_momentum_projection() {
        let n = 10;
        let grid = momentum_grid(n, Parity::Odd).unwrap();
        let empty = FermionConfig::from_mask(momentum_grid(n, Parity::Even).unwrap(), 0);
        for c in enumerate_configs(grid, 1).unwrap() {
            let f = f_function(&c, &empty, &Coupling::Uniform(1.0)).unwrap();
            let expected = if c.numerators() == [0] {
                math::sqrt(n as f64)
            } else {
                0.0
            };
            assert!(close(f, Complex64::new(expected, 0.0), 1e-12));
        }
    }

    #[test]
    fn f_function_rejects_same_parity() {
        let g = momentum_grid(4, Parity::Even).unwrap();
        let a = FermionConfig::new(g, &[0, 1]).unwrap();
        let b = FermionConfig::new(g, &[2]).unwrap();
        assert!(f_function(&a, &b, &Coupling::Uniform(1.0)).is_err());
    }

    #[test]
    fn uniform_coupling_factorizes() {
        let n = 6;
        let hi = momentum_grid(n, Parity::Odd).unwrap();
        let lo = momentum_grid(n, Parity::Even).unwrap();
        let ks = FermionConfig::new(hi, &[1, 2, 4]).unwrap();
        let ps = FermionConfig::new(lo, &[0, 5]).unwrap();
        let unit = f_function(&ks, &ps, &Coupling::Uniform(1.0)).unwrap();
        let scaled = f_function(&ks, &ps, &Coupling::Uniform(2.5)).unwrap();
        assert!(close(scaled, unit * 2.5, 1e-13));
    }

    #[test]
    fn small_table_matches_direct_calls() {
        let coupling = Coupling::Uniform(1.0);
        let table = build_f_table(4, 0, &coupling).unwrap();
        assert_eq!((table.rows(), table.cols()), (4, 1));
        for r in 0..4 {
            let direct = f_function(&table.row_config(r), &table.col_config(0), &coupling).unwrap();
            assert!(close(table.value(r, 0), direct, 1e-13));
        }
    }

    #[test]
    fn table_matches_direct_sum_at_random_entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let profiles = [
            Coupling::Uniform(0.8),
            Coupling::PerSite(alloc::vec![0.3, -1.1, 0.7, 2.0, 0.05, 1.4]),
        ];
        for coupling in &profiles {
            let table = build_f_table(6, 2, coupling).unwrap();
            for _ in 0..20 {
                let r = rng.gen_range(0..table.rows());
                let c = rng.gen_range(0..table.cols());
                let direct = f_function(&table.row_config(r), &table.col_config(c), coupling).unwrap();
                assert!(close(table.value(r, c), direct, 1e-12));
            }
        }
    }

    #[test]
    fn lookup_tracks_permutation_sign() {
        let table = build_f_table(6, 2, &Coupling::Uniform(1.0)).unwrap();
        let (r, c) = (0..table.rows())
            .flat_map(|r| (0..table.cols()).map(move |c| (r, c)))
            .find(|&(r, c)| !table.is_structural_zero(r, c))
            .unwrap();
        let ks = table.row_config(r).numerators();
        let ps = table.col_config(c).numerators();
        let v = table.lookup(&ks, &ps).unwrap();
        assert_eq!(v, table.value(r, c));
        let swapped = [ks[1], ks[0], ks[2]];
        assert_eq!(table.lookup(&swapped, &ps).unwrap(), -v);
        let cycled = [ks[1], ks[2], ks[0]];
        assert_eq!(table.lookup(&cycled, &ps).unwrap(), v);
        let repeated = [ks[0], ks[0], ks[2]];
        assert_eq!(table.lookup(&repeated, &ps).unwrap(), ZERO);
    }

    #[test]
    fn zeros_follow_momentum_conservation() {
        // measured: for a uniform profile every entry either conserves total
        // momentum mod 2π or is a structural zero
        let n = 6i64;
        for m in 0..6 {
            let table = build_f_table(6, m, &Coupling::Uniform(1.0)).unwrap();
            let mut conserving = 0;
            for r in 0..table.rows() {
                for c in 0..table.cols() {
                    let dq = table.row_config(r).total_numerator() - table.col_config(c).total_numerator();
                    let conserves = dq.rem_euclid(2 * n) == 0;
                    assert_eq!(!table.is_structural_zero(r, c), conserves, "m = {m}, ({r}, {c})");
                    conserving += conserves as usize;
                }
            }
            let fraction = 1.0 - conserving as f64 / (table.rows() * table.cols()) as f64;
            assert_abs_diff_eq!(table.zero_fraction(), fraction, epsilon = 1e-15);
        }
    }

    #[test]
    fn builds_are_bit_identical() {
        let coupling = Coupling::Uniform(1.0);
        let a = build_f_table(8, 3, &coupling).unwrap();
        let b = build_f_table(8, 3, &coupling).unwrap();
        let bytes = |t: &FTable| {
            t.values()
                .iter()
                .flat_map(|v| [v.re.to_bits(), v.im.to_bits()])
                .collect::<Vec<_>>()
        };
        assert_eq!(bytes(&a), bytes(&b));
    }

    #[test]
    fn memory_cap_is_enforced() {
        let opts = TableBuildOptions {
            memory_cap_bytes: 1024,
        };
        match FTable::build(10, 4, &Coupling::Uniform(1.0), &opts) {
            Err(Error::Resource { estimate, .. }) => {
                assert_eq!(estimate, table_memory_estimate(10, 4))
            }
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn dicke_amplitudes() {
        assert_eq!(dicke_initial_amplitudes(6, 0).unwrap(), [ONE]);
        for n in [2usize, 4, 8] {
            let amps = dicke_initial_amplitudes(n, 1).unwrap();
            let grid = MomentumGrid::for_count(n, 1).unwrap();
            for (i, a) in amps.iter().enumerate() {
                let expected = if grid.numerator(i) == 0 { ONE } else { ZERO };
                assert!(close(*a, expected, 1e-13));
            }
        }
        let amps = dicke_initial_amplitudes(10, 5).unwrap();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
    }
}
