//! Model parameters, momentum grids, the XX dispersion, spin-coherent bath
//! states, and the ground-state structure of the periodic XX chain.
//!
//! Wavenumbers are kept as integer numerators `q` of `k = q·π/N`; radians
//! are produced only where a trigonometric function needs them.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::basis::FermionConfig;
use crate::error::{Error, Result};
use crate::math::{self, PI};

/// Fermion-number parity of a bath sector.
///
/// Even fermion number means antiperiodic fermions and the grid `K+`; odd
/// fermion number means periodic fermions and the grid `K-`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(count: usize) -> Self {
        if count % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// One of the two momentum grids of an `N`-site periodic chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MomentumGrid {
    n_sites: usize,
    parity: Parity,
}

fn check_even_sites(n_sites: usize) -> Result<()> {
    if n_sites < 2 || n_sites % 2 != 0 {
        return Err(Error::param(
            "N",
            format!("site count must be even and at least 2, got {n_sites}"),
        ));
    }
    Ok(())
}

/// Site counts with momentum grids: even, `2..=30` (configurations are
/// `u32` masks).
pub(crate) fn check_sites(n_sites: usize) -> Result<()> {
    check_even_sites(n_sites)?;
    if n_sites > 30 {
        return Err(Error::param(
            "N",
            format!("site count {n_sites} exceeds the supported maximum of 30"),
        ));
    }
    Ok(())
}

impl MomentumGrid {
    pub fn new(n_sites: usize, parity: Parity) -> Result<Self> {
        check_sites(n_sites)?;
        Ok(Self { n_sites, parity })
    }

    /// Grid hosting configurations of `count` fermions.
    pub fn for_count(n_sites: usize, count: usize) -> Result<Self> {
        Self::new(n_sites, Parity::of(count))
    }

    pub(crate) fn for_count_unchecked(n_sites: usize, count: usize) -> Self {
        Self {
            n_sites,
            parity: Parity::of(count),
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn len(&self) -> usize {
        self.n_sites
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Numerator `q` of the `index`-th wavenumber `q·π/N` (ascending order).
    pub fn numerator(&self, index: usize) -> i64 {
        let n = self.n_sites as i64;
        let i = index as i64;
        match self.parity {
            Parity::Even => -n + 1 + 2 * i,
            Parity::Odd => -n + 2 * i,
        }
    }

    pub fn wavenumber(&self, index: usize) -> f64 {
        self.numerator(index) as f64 * PI / self.n_sites as f64
    }

    pub fn numerators(&self) -> Vec<i64> {
        (0..self.n_sites).map(|i| self.numerator(i)).collect()
    }

    pub fn ks(&self) -> Vec<f64> {
        (0..self.n_sites).map(|i| self.wavenumber(i)).collect()
    }

    /// Grid index of the wavenumber `q·π/N`, with `q` taken modulo `2N`.
    pub fn index_of_numerator(&self, q: i64) -> Option<usize> {
        let n = self.n_sites as i64;
        // fold into [-N, N)
        let q = (q + n).rem_euclid(2 * n) - n;
        let offset = match self.parity {
            Parity::Even => q + n - 1,
            Parity::Odd => q + n,
        };
        (offset % 2 == 0).then_some((offset / 2) as usize)
    }

    /// `cos k` at the `index`-th wavenumber, evaluated from the reduced
    /// numerator so that equal wavenumbers give bit-identical values.
    pub(crate) fn cos_at(&self, index: usize) -> f64 {
        math::cos(self.wavenumber(index))
    }
}

/// `momentum_grid(N, parity)`: `K+` for even fermion parity, `K-` for odd.
pub fn momentum_grid(n_sites: usize, parity: Parity) -> Result<MomentumGrid> {
    MomentumGrid::new(n_sites, parity)
}

/// Single-particle energy `J cos k - h`.
pub fn dispersion(k: f64, j: f64, h: f64) -> f64 {
    j * math::cos(k) - h
}

/// Qubit-bath coupling profile.
#[derive(Clone, Debug, PartialEq)]
pub enum Coupling {
    /// Same coupling `g` on every site.
    Uniform(f64),
    /// One coupling per site, site 1 first.
    PerSite(Vec<f64>),
}

impl Coupling {
    pub fn site(&self, j: usize) -> f64 {
        match self {
            Coupling::Uniform(g) => *g,
            Coupling::PerSite(gs) => gs[j - 1],
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, Coupling::Uniform(_))
    }

    /// Largest `|g_j|`.
    pub fn max_abs(&self) -> f64 {
        match self {
            Coupling::Uniform(g) => math::abs(*g),
            Coupling::PerSite(gs) => gs.iter().fold(0.0, |acc, g| acc.max(math::abs(*g))),
        }
    }

    pub fn to_sites(&self, n_sites: usize) -> Vec<f64> {
        (1..=n_sites).map(|j| self.site(j)).collect()
    }
}

/// Parameters of the qubit + periodic XX bath Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub n_sites: usize,
    /// Intrabath flip-flop coupling `J`.
    pub j: f64,
    /// Bath field `h`.
    pub h: f64,
    /// Qubit splitting `ω`.
    pub omega: f64,
    pub coupling: Coupling,
}

impl ModelParams {
    /// Any even `N ≥ 2`; grids and tables further need `N ≤ 30`.
    pub fn new(n_sites: usize, j: f64, h: f64, omega: f64, coupling: Coupling) -> Result<Self> {
        check_even_sites(n_sites)?;
        for (name, v) in [("J", j), ("h", h), ("omega", omega)] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        match &coupling {
            Coupling::Uniform(g) if !g.is_finite() => {
                return Err(Error::param("g", "must be finite"))
            }
            Coupling::PerSite(gs) => {
                if gs.len() != n_sites {
                    return Err(Error::param(
                        "g",
                        format!("expected {n_sites} per-site couplings, got {}", gs.len()),
                    ));
                }
                if gs.iter().any(|g| !g.is_finite()) {
                    return Err(Error::param("g", "all couplings must be finite"));
                }
            }
            _ => {}
        }
        Ok(Self {
            n_sites,
            j,
            h,
            omega,
            coupling,
        })
    }

    pub fn uniform(n_sites: usize, j: f64, h: f64, omega: f64, g: f64) -> Result<Self> {
        Self::new(n_sites, j, h, omega, Coupling::Uniform(g))
    }

    /// The detuning `h + ω`, the only combination of `h` and `ω` that enters
    /// the sector equations of motion.
    pub fn detuning(&self) -> f64 {
        self.h + self.omega
    }
}

/// Critical fields `h_m`, `m = N/2 … N-1`, of the periodic XX chain with
/// `J = -1`. The last entry is exactly `1`.
pub fn critical_fields(n_sites: usize) -> Result<Vec<(usize, f64)>> {
    check_sites(n_sites)?;
    let n = n_sites as f64;
    let denom = math::cos(0.5 * PI / n);
    Ok((n_sites / 2..n_sites)
        .map(|m| {
            let h = if m == n_sites - 1 {
                1.0
            } else {
                -math::cos((m as f64 + 0.5) * PI / n) / denom
            };
            (m, h)
        })
        .collect())
}

/// Which fermion species fills the ground state: `Odd` for even `N_f`
/// (`c`-fermions on `K+`, odd `m`), `Even` for odd `N_f` (`d`-fermions on
/// `K-`, even `m`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Odd,
    Even,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::Odd => "o",
            Branch::Even => "e",
        }
    }
}

/// Ground state `|g_m⟩` of the bath: `m + 1` fermions occupying the
/// wavenumbers `-mπ/N, -(m-2)π/N, …, mπ/N`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundStateSpec {
    pub m: usize,
    pub branch: Branch,
    pub config: FermionConfig,
    pub energy: f64,
}

impl GroundStateSpec {
    fn with_filling(n_sites: usize, m: usize, j: f64, h: f64) -> Self {
        let grid = MomentumGrid::for_count_unchecked(n_sites, m + 1);
        let m_i = m as i64;
        let numerators: Vec<i64> = (0..=m_i).map(|l| -m_i + 2 * l).collect();
        let config = FermionConfig::from_numerators(grid, &numerators)
            .expect("ground-state wavenumbers lie on the grid of matching parity");
        let energy = config
            .wavenumbers()
            .iter()
            .map(|&k| dispersion(k, j, h))
            .sum();
        let branch = if m % 2 == 1 { Branch::Odd } else { Branch::Even };
        Self {
            m,
            branch,
            config,
            energy,
        }
    }

    /// Number of fermions, `m + 1`.
    pub fn filling(&self) -> usize {
        self.m + 1
    }
}

const CROSSING_TOLERANCE: f64 = 1e-12;

/// Ground state of the bath for `J = -1` and field `h ≥ 0`.
pub fn ground_state(n_sites: usize, h: f64) -> Result<GroundStateSpec> {
    let m = ground_filling(n_sites, h)?;
    Ok(GroundStateSpec::with_filling(n_sites, m, -1.0, h))
}

fn ground_filling(n_sites: usize, h: f64) -> Result<usize> {
    check_sites(n_sites)?;
    if !(h.is_finite() && h >= 0.0) {
        return Err(Error::param("h", format!("field must be finite and >= 0, got {h}")));
    }
    let fields = critical_fields(n_sites)?;
    for &(m, hm) in &fields[..fields.len() - 1] {
        if math::abs(h - hm) < CROSSING_TOLERANCE {
            return Err(Error::DegenerateGroundState { h, m, critical: hm });
        }
    }
    if h >= 1.0 {
        return Ok(n_sites - 1);
    }
    let below = fields.iter().filter(|&&(_, hm)| hm <= h).count();
    Ok(n_sites / 2 - 1 + below)
}

/// Ground state for general `J ≤ 0`: the filling is set by `h/|J|`, the
/// energy by the actual `(J, h)`. `J = 0` with `h > 0` is fully polarized.
pub fn ground_state_for(n_sites: usize, j: f64, h: f64) -> Result<GroundStateSpec> {
    check_sites(n_sites)?;
    if j > 0.0 {
        return Err(Error::param(
            "J",
            "the ground-state branch is defined for J <= 0 (ferromagnetic convention J = -1)",
        ));
    }
    let m = if j == 0.0 {
        if !(h > 0.0) {
            return Err(Error::param(
                "h",
                "J = 0 requires h > 0 for a nondegenerate bath ground state",
            ));
        }
        n_sites - 1
    } else {
        ground_filling(n_sites, h / -j)?
    };
    Ok(GroundStateSpec::with_filling(n_sites, m, j, h))
}

/// Spin-coherent bath state `Σ_n C_n |D_n⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentSpec {
    pub z: Complex64,
    pub coefficients: Vec<Complex64>,
}

impl CoherentSpec {
    /// Builds the state from polar angles via `z = cot(θ/2) e^{-iφ}`.
    pub fn from_angles(n_sites: usize, theta: f64, phi: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= PI) || !phi.is_finite() {
            return Err(Error::param("theta", "need 0 < theta <= pi and finite phi"));
        }
        let z = math::cis(-phi) * (math::cos(theta / 2.0) / math::sin(theta / 2.0));
        coherent_coefficients(n_sites, z)
    }

    pub fn n_sites(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn weights(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// `C_n = z^n √C(N,n) / (1+|z|²)^{N/2}`, evaluated in log space.
pub fn coherent_coefficients(n_sites: usize, z: Complex64) -> Result<CoherentSpec> {
    if n_sites == 0 {
        return Err(Error::param("N", "site count must be positive"));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::param("z", "must be finite"));
    }
    let mut coefficients = Vec::with_capacity(n_sites + 1);
    if z.norm_sqr() == 0.0 {
        coefficients.push(Complex64::new(1.0, 0.0));
        coefficients.resize(n_sites + 1, Complex64::new(0.0, 0.0));
    } else {
        let ln_abs = math::ln(z.norm());
        let arg = z.arg();
        let ln_norm = 0.5 * n_sites as f64 * math::ln(1.0 + z.norm_sqr());
        for n in 0..=n_sites {
            let ln_mag = 0.5 * math::ln_binomial(n_sites, n) + n as f64 * ln_abs - ln_norm;
            coefficients.push(math::cis(n as f64 * arg) * math::exp(ln_mag));
        }
    }
    Ok(CoherentSpec { z, coefficients })
}
