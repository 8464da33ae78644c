//! Independent references: dense exact diagonalization of the full spin
//! Hamiltonian, the `J = 0` and `N = 2` closed forms, and second-order
//! perturbation theory for the decoherence factor.
//!
//! Dense basis: index bit `N` is the qubit, bit `N - j` is bath site `j`
//! (site 1 is the next-highest bit); a set bit means spin up (`|1⟩`).
//!
//! ```text
//! H = ω (σ_z + 1)/2 + (J/2) Σ_j (σ⁺_j σ⁻_{j+1} + h.c.) - h Σ_j (σᶻ_j + 1)/2
//!     + Σ_j g_j (σ⁺_j σ_- + σ⁻_j σ_+),   site N + 1 ≡ 1
//! ```

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::basis::{bits, ConfigSpace, FermionConfig};
use crate::error::{Error, Result};
use crate::math;
use crate::model::{coherent_coefficients, dispersion, Coupling, GroundStateSpec, ModelParams, MomentumGrid};
use crate::observables::BlochPoint;
use crate::slater::{slater, FTable, TableBuildOptions};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest bath the dense oracle accepts.
pub const MAX_SITES: usize = 8;

fn check_size(n_sites: usize) -> Result<()> {
    if n_sites > MAX_SITES {
        return Err(Error::OracleSize {
            n_sites,
            max: MAX_SITES,
        });
    }
    Ok(())
}

/// Bath bit of site `j` (1-based).
#[inline]
fn site_bit(n_sites: usize, j: usize) -> usize {
    n_sites - j
}

/// Bath basis index of a site mask in the engine convention (bit `j - 1`
/// for site `j`).
pub fn bath_index(n_sites: usize, site_mask: u32) -> usize {
    bits(site_mask).fold(0, |acc, b| acc | 1 << site_bit(n_sites, b + 1))
}

/// Full Hamiltonian, dimension `2^(N+1)`; real symmetric.
pub fn hamiltonian(params: &ModelParams) -> Result<DMatrix<f64>> {
    let n = params.n_sites;
    check_size(n)?;
    let dim = 1usize << (n + 1);
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let qubit = 1usize << n;
    for s in 0..dim {
        let ups = (s & (qubit - 1)).count_ones() as f64;
        let q = if s & qubit != 0 { 1.0 } else { 0.0 };
        h[(s, s)] += params.omega * q - params.h * ups;
        for j in 1..=n {
            let a = 1 << site_bit(n, j);
            let b = 1 << site_bit(n, j % n + 1);
            // σ⁺_j σ⁻_{j+1} + σ⁺_{j+1} σ⁻_j
            if (s & a != 0) != (s & b != 0) {
                let t = s ^ a ^ b;
                h[(t, s)] += 0.5 * params.j;
            }
            // σ⁺_j σ_-
            if s & qubit != 0 && s & a == 0 {
                let t = s ^ qubit ^ a;
                let g = params.coupling.site(j);
                h[(t, s)] += g;
                h[(s, t)] += g;
            }
        }
    }
    Ok(h)
}

/// Total magnetization `σ_z/2 + Σ σᶻ_j/2` of a basis index.
pub fn magnetization_of(n_sites: usize, index: usize) -> f64 {
    index.count_ones() as f64 - 0.5 * (n_sites + 1) as f64
}

/// A dense state in the qubit ⊗ bath basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    pub n_sites: usize,
    pub amplitudes: Vec<Complex64>,
}

impl DenseState {
    /// `(down |1̄⟩ + up |1⟩) ⊗ bath`, with `bath` of length `2^N`.
    pub fn product(n_sites: usize, down: Complex64, up: Complex64, bath: &[Complex64]) -> Result<Self> {
        check_size(n_sites)?;
        if bath.len() != 1 << n_sites {
            return Err(Error::InvalidArgument(format!(
                "bath vector needs {} entries, got {}",
                1usize << n_sites,
                bath.len()
            )));
        }
        let amplitudes = bath
            .iter()
            .map(|b| down * b)
            .chain(bath.iter().map(|b| up * b))
            .collect();
        Ok(Self {
            n_sites,
            amplitudes,
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn magnetization(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * magnetization_of(self.n_sites, i))
            .sum()
    }

    /// Reduced qubit density matrix `[[ρ_11, ρ_11̄], [ρ_1̄1, ρ_1̄1̄]]`.
    pub fn qubit_rho(&self) -> [[Complex64; 2]; 2] {
        let half = 1 << self.n_sites;
        let (down, up) = self.amplitudes.split_at(half);
        let p_up: f64 = up.iter().map(|a| a.norm_sqr()).sum();
        let p_down: f64 = down.iter().map(|a| a.norm_sqr()).sum();
        let coherence = up.iter().zip(down).fold(ZERO, |acc, (u, d)| acc + u * d.conj());
        [
            [Complex64::new(p_up, 0.0), coherence],
            [coherence.conj(), Complex64::new(p_down, 0.0)],
        ]
    }

    pub fn bloch(&self) -> BlochPoint {
        let rho = self.qubit_rho();
        BlochPoint::from_coherence(rho[0][0].re - rho[1][1].re, rho[0][1])
    }

    /// `⟨q, K|ψ⟩` for a qubit state `q` (true = up) and a fermion
    /// configuration `K`, with `|K⟩ = Σ_J S(K; J) |J⟩` in the spin basis.
    pub fn config_amplitude(&self, up: bool, config: &FermionConfig) -> Result<Complex64> {
        let bath = fermion_bath_state(config)?;
        let offset = if up { 1 << self.n_sites } else { 0 };
        Ok(bath
            .iter()
            .enumerate()
            .fold(ZERO, |acc, (i, b)| acc + b.conj() * self.amplitudes[offset + i]))
    }
}

struct Block {
    indices: Vec<usize>,
    eigenvalues: Vec<f64>,
    vectors: DMatrix<f64>,
}

/// Hamiltonian diagonalized block by block in total magnetization.
pub struct DenseModel {
    n_sites: usize,
    blocks: Vec<Block>,
}

impl DenseModel {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let h = hamiltonian(params)?;
        let n = params.n_sites;
        let dim = h.nrows();
        let blocks = (0..=n + 1)
            .map(|ups| {
                let indices: Vec<usize> = (0..dim).filter(|s| s.count_ones() as usize == ups).collect();
                let sub = DMatrix::from_fn(indices.len(), indices.len(), |a, b| h[(indices[a], indices[b])]);
                let eig = SymmetricEigen::new(sub);
                Block {
                    indices,
                    eigenvalues: eig.eigenvalues.iter().copied().collect(),
                    vectors: eig.eigenvectors,
                }
            })
            .collect();
        Ok(Self { n_sites: n, blocks })
    }

    /// All eigenvalues, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.blocks.iter().flat_map(|b| b.eigenvalues.iter().copied()).collect();
        e.sort_by(f64::total_cmp);
        e
    }

    /// `e^{-iHt} ψ`.
    pub fn propagate(&self, state: &DenseState, t: f64) -> DenseState {
        let mut out = vec![ZERO; state.amplitudes.len()];
        for block in &self.blocks {
            let size = block.indices.len();
            let psi: Vec<Complex64> = block.indices.iter().map(|&i| state.amplitudes[i]).collect();
            for e in 0..size {
                let overlap = (0..size).fold(ZERO, |acc, a| acc + psi[a] * block.vectors[(a, e)]);
                if overlap == ZERO {
                    continue;
                }
                let c = overlap * math::cis(-block.eigenvalues[e] * t);
                for (a, &i) in block.indices.iter().enumerate() {
                    out[i] += c * block.vectors[(a, e)];
                }
            }
        }
        DenseState {
            n_sites: self.n_sites,
            amplitudes: out,
        }
    }
}

/// `ψ(t) = e^{-iHt} ψ(0)` at each requested time (Schrödinger picture).
pub fn exact_propagate(params: &ModelParams, initial: &DenseState, times: &[f64]) -> Result<Vec<DenseState>> {
    if initial.n_sites != params.n_sites {
        return Err(Error::InvalidArgument("state and model have different N".into()));
    }
    let model = DenseModel::new(params)?;
    Ok(times.iter().map(|&t| model.propagate(initial, t)).collect())
}

/// Spin-coherent bath state as the product `⊗_j (|↓⟩ + z|↑⟩)/√(1+|z|²)`.
pub fn coherent_bath(n_sites: usize, z: Complex64) -> Result<Vec<Complex64>> {
    check_size(n_sites)?;
    let norm = 1.0 / math::sqrt(1.0 + z.norm_sqr());
    Ok((0..1usize << n_sites)
        .map(|i| {
            let ups = i.count_ones() as i32;
            z.powi(ups) * libm::pow(norm, n_sites as f64)
        })
        .collect())
}

/// Dicke state with `n` up spins.
pub fn dicke_bath(n_sites: usize, n: usize) -> Result<Vec<Complex64>> {
    check_size(n_sites)?;
    let count = crate::basis::binomial(n_sites, n);
    let amp = Complex64::new(1.0 / math::sqrt(count as f64), 0.0);
    Ok((0..1usize << n_sites)
        .map(|i| if i.count_ones() as usize == n { amp } else { ZERO })
        .collect())
}

/// `|K⟩ = Σ_J S(K; J) |J⟩` in the spin basis.
pub fn fermion_bath_state(config: &FermionConfig) -> Result<Vec<Complex64>> {
    let n_sites = config.grid().n_sites();
    check_size(n_sites)?;
    let ks = config.wavenumbers();
    let mut out = vec![ZERO; 1 << n_sites];
    for &mask in ConfigSpace::new(n_sites, config.len()).masks() {
        let js: Vec<usize> = bits(mask).map(|b| b + 1).collect();
        out[bath_index(n_sites, mask)] = slater(n_sites, &ks, &js)?;
    }
    Ok(out)
}

/// Bath-only Hamiltonian `H_B` (`g = 0`, `ω = 0`) restricted to `ups` up
/// spins, in ascending bath-index order.
fn bath_block(n_sites: usize, j: f64, h: f64, ups: usize) -> Result<(Vec<usize>, DMatrix<f64>)> {
    let params = ModelParams::uniform(n_sites, j, h, 0.0, 0.0)?;
    let full = hamiltonian(&params)?;
    let indices: Vec<usize> = (0..1usize << n_sites)
        .filter(|s| s.count_ones() as usize == ups)
        .collect();
    let block = DMatrix::from_fn(indices.len(), indices.len(), |a, b| full[(indices[a], indices[b])]);
    Ok((indices, block))
}

/// Lowest eigenpair of `H_B` with `ups` up spins, by dense diagonalization.
/// Also returns the gap to the next level in the same block.
pub fn dense_bath_ground(n_sites: usize, j: f64, h: f64, ups: usize) -> Result<(f64, Vec<Complex64>, f64)> {
    let (indices, block) = bath_block(n_sites, j, h, ups)?;
    let eig = SymmetricEigen::new(block);
    let mut order: Vec<usize> = (0..indices.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lowest = order[0];
    let gap = order
        .get(1)
        .map_or(f64::INFINITY, |&i| eig.eigenvalues[i] - eig.eigenvalues[lowest]);
    let mut state = vec![ZERO; 1 << n_sites];
    for (a, &i) in indices.iter().enumerate() {
        state[i] = Complex64::new(eig.eigenvectors[(a, lowest)], 0.0);
    }
    Ok((eig.eigenvalues[lowest], state, gap))
}

/// Full spectrum of `H_B`, ascending.
pub fn bath_spectrum(n_sites: usize, j: f64, h: f64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for ups in 0..=n_sites {
        let (_, block) = bath_block(n_sites, j, h, ups)?;
        out.extend(SymmetricEigen::new(block).eigenvalues.iter().copied());
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Free-fermion spectrum: every filling `n` of the grid of parity `n`,
/// energy `Σ (J cos k - h)`, ascending.
pub fn free_fermion_spectrum(n_sites: usize, j: f64, h: f64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for n in 0..=n_sites {
        let grid = MomentumGrid::for_count(n_sites, n)?;
        for &mask in ConfigSpace::new(n_sites, n).masks() {
            out.push(bits(mask).map(|i| dispersion(grid.wavenumber(i), j, h)).sum());
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// `J = 0`, uniform `g`: Bloch vector and purity in closed form, any `N`.
pub fn analytic_j0(n_sites: usize, z: Complex64, g: f64, h: f64, omega: f64, times: &[f64]) -> Result<Vec<BlochPoint>> {
    let coeffs = coherent_coefficients(n_sites, z)?.coefficients;
    let detuning = h + omega;
    let n_f = n_sites as f64;
    let couplings: Vec<f64> = (0..=n_sites)
        .map(|n| g * math::sqrt((n as f64 + 1.0) * (n_f - n as f64)))
        .collect();
    Ok(times
        .iter()
        .map(|&t| {
            let amps: Vec<(Complex64, Complex64)> = couplings
                .iter()
                .map(|&gn| j0_amplitudes(gn, detuning, t))
                .collect();
            let sz = coeffs
                .iter()
                .zip(&amps)
                .map(|(c, (a, b))| c.norm_sqr() * (a.norm_sqr() - b.norm_sqr()))
                .sum();
            let z_t = (1..=n_sites).fold(ZERO, |acc, n| {
                acc + coeffs[n - 1].conj() * coeffs[n] * amps[n - 1].1.conj() * amps[n].0
            });
            BlochPoint::from_coherence(sz, math::cis(-omega * t) * z_t)
        })
        .collect())
}

/// `(a_n(t), b_n(t))` of the two-level sector problem with coupling
/// `g̃_n` and detuning `Δ = h + ω`.
fn j0_amplitudes(gn: f64, detuning: f64, t: f64) -> (Complex64, Complex64) {
    let rabi = math::sqrt(4.0 * gn * gn + detuning * detuning);
    let x = 0.5 * rabi * t;
    // sin(Ω t/2) / Ω, finite as Ω → 0
    let sinc = if rabi * t == 0.0 {
        0.5 * t
    } else if x.abs() < 1e-8 {
        0.5 * t * (1.0 - x * x / 6.0)
    } else {
        math::sin(x) / rabi
    };
    let a = math::cis(0.5 * detuning * t) * Complex64::new(math::cos(x), -detuning * sinc);
    let b = math::cis(-0.5 * detuning * t) * Complex64::new(0.0, -2.0 * gn * sinc);
    (a, b)
}

/// `N = 2`, uniform `g`: `⟨σ_z⟩` from the three-term closed form with
/// `J± = h + ω ± J`.
pub fn analytic_n2(z: Complex64, g: f64, j: f64, h: f64, omega: f64, times: &[f64]) -> Result<Vec<f64>> {
    let c = coherent_coefficients(2, z)?.weights();
    let term = |jd: f64, t: f64| {
        let d = 8.0 * g * g + jd * jd;
        if d == 0.0 {
            return 1.0;
        }
        (8.0 * g * g * math::cos(t * math::sqrt(d)) + jd * jd) / d
    };
    let jm = h + omega - j;
    let jp = h + omega + j;
    Ok(times
        .iter()
        .map(|&t| c[0] * term(jm, t) + c[1] * term(jp, t) + c[2])
        .collect())
}

fn unit_tables(n_sites: usize, m: usize) -> Result<(FTable, Option<FTable>)> {
    let opts = TableBuildOptions::default();
    let lower = FTable::build(n_sites, m, &Coupling::Uniform(1.0), &opts)?;
    let upper = if m + 2 <= n_sites {
        Some(FTable::build(n_sites, m + 1, &Coupling::Uniform(1.0), &opts)?)
    } else {
        None
    };
    Ok((lower, upper))
}

/// `α = Σ_P |f(K; P)|² + Σ_{P'} |f(P'; K)|²` for the ground configuration
/// `K`, with `P` over `m`-fermion and `P'` over `(m+2)`-fermion
/// configurations and `f` the coupling-independent table.
pub fn perturbative_alpha(n_sites: usize, ground: &GroundStateSpec) -> Result<f64> {
    let (lower, upper) = unit_tables(n_sites, ground.m)?;
    let k = ground.config.rank();
    let removal: f64 = (0..lower.cols()).map(|p| lower.unit_value(k, p).norm_sqr()).sum();
    let addition: f64 = upper.map_or(0.0, |t| (0..t.rows()).map(|p| t.unit_value(p, k).norm_sqr()).sum());
    Ok(removal + addition)
}

/// Second-order `|r(t)|²` for the ground-state run of `params` (uniform
/// coupling): `1 + 2g² Σ |f|² (cos Δt - 1)/Δ²` over removal and addition
/// channels, `Δ = h + ω + ε̂(smaller) - ε̂(larger)`.
pub fn second_order_r2(params: &ModelParams, ground: &GroundStateSpec, times: &[f64]) -> Result<Vec<f64>> {
    let Coupling::Uniform(g) = params.coupling else {
        return Err(Error::InvalidArgument("second-order |r|² needs a uniform coupling".into()));
    };
    let n_sites = params.n_sites;
    let m = ground.m;
    let (lower, upper) = unit_tables(n_sites, m)?;
    let energy = |config: &FermionConfig| -> f64 {
        params.j * config.wavenumbers().iter().map(|&k| math::cos(k)).sum::<f64>()
    };
    let k = ground.config.rank();
    let e_k = energy(&ground.config);
    let mut terms: Vec<(f64, f64)> = Vec::new();
    for p in 0..lower.cols() {
        let w = lower.unit_value(k, p).norm_sqr();
        if w > 0.0 {
            terms.push((w, params.detuning() + energy(&lower.col_config(p)) - e_k));
        }
    }
    if let Some(t) = &upper {
        for p in 0..t.rows() {
            let w = t.unit_value(p, k).norm_sqr();
            if w > 0.0 {
                terms.push((w, params.detuning() + e_k - energy(&t.row_config(p))));
            }
        }
    }
    Ok(times
        .iter()
        .map(|&t| {
            1.0 + 2.0
                * g
                * g
                * terms
                    .iter()
                    .map(|&(w, d)| {
                        let x = d * t;
                        // (cos x - 1)/Δ², with the Δ → 0 limit -t²/2
                        let ratio = if x.abs() < 1e-4 {
                            -0.5 * t * t * (1.0 - x * x / 12.0)
                        } else {
                            (math::cos(x) - 1.0) / (d * d)
                        };
                        w * ratio
                    })
                    .sum::<f64>()
        })
        .collect())
}
