//! Interaction-picture equations of motion for one magnetization sector and
//! their fixed-step RK4 integration.
//!
//! Sector `n` pairs the qubit-up block `B` over `n`-fermion configurations
//! with the qubit-down block `D` over `(n+1)`-fermion configurations:
//!
//! ```text
//! i dB(P)/dt = e^{i(h+ω)t} e^{i ε̂_P t} Σ_K f̃(K; P)  e^{-i ε̂_K t} D(K)
//! i dD(K)/dt = e^{-i(h+ω)t} e^{i ε̂_K t} Σ_P f̃*(K; P) e^{-i ε̂_P t} B(P)
//! ```
//!
//! with `ε̂_K = J Σ_{k∈K} cos k`. The field contributions `-h·n` of the
//! configuration energies combine with `ω` into the detuning `h + ω`, which
//! is the only way `h` and `ω` reach the right-hand side.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::basis::{bits, ConfigSpace};
use crate::error::{Error, Result};
use crate::math;
use crate::model::{CoherentSpec, Coupling, GroundStateSpec, ModelParams, MomentumGrid};
use crate::par;
use crate::slater::{dicke_initial_amplitudes, FTable, TableBuildOptions};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest bath for numerically integrated spin-coherent runs.
pub const MAX_COHERENT_SITES: usize = 12;

/// Default hard limit on the norm drift of any sector.
pub const DEFAULT_NORM_TOLERANCE: f64 = 1e-8;

/// Amplitudes of one sector: `upper` over `n`-fermion configurations (qubit
/// up), `lower` over `(n+1)`-fermion configurations (qubit down), both in
/// lexicographic order on their grids.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorState {
    pub upper: Vec<Complex64>,
    pub lower: Vec<Complex64>,
}

impl SectorState {
    pub fn zeros(n_sites: usize, n: usize) -> Self {
        Self {
            upper: vec![ZERO; crate::basis::binomial(n_sites, n)],
            lower: vec![ZERO; crate::basis::binomial(n_sites, n + 1)],
        }
    }

    pub fn upper_weight(&self) -> f64 {
        self.upper.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn lower_weight(&self) -> f64 {
        self.lower.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.upper_weight() + self.lower_weight()
    }
}

/// Stored states of one sector at the plan's output times.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorTrajectory {
    pub n: usize,
    pub times: Vec<f64>,
    pub states: Vec<SectorState>,
    /// Largest `|‖ψ(t)‖² - ‖ψ(0)‖²|` over the output times.
    pub max_norm_drift: f64,
}

/// Time grid and step control. Times are physical (`t`, not `gt`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionPlan {
    pub t_max: f64,
    /// Requested step; the grid uses `t_max / steps()`, which is never
    /// larger.
    pub dt: f64,
    /// Steps between stored outputs.
    pub stride: usize,
    pub norm_tolerance: f64,
}

impl EvolutionPlan {
    pub fn new(t_max: f64, dt: f64, stride: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max >= 0.0) {
            return Err(Error::param("gt_max", "must be finite and >= 0"));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::param("dt", "must be finite and > 0"));
        }
        if stride == 0 {
            return Err(Error::param("stride", "must be at least 1"));
        }
        Ok(Self {
            t_max,
            dt,
            stride,
            norm_tolerance: DEFAULT_NORM_TOLERANCE,
        })
    }

    /// `min(1e-3/g, 0.05 / max(|h+ω|, |J|·N, g√N))`, with `g` the largest
    /// coupling magnitude.
    pub fn default_step(params: &ModelParams) -> f64 {
        let g = params.coupling.max_abs();
        let rate = math::abs(params.detuning())
            .max(math::abs(params.j) * params.n_sites as f64)
            .max(g * math::sqrt(params.n_sites as f64));
        let mut dt = if g > 0.0 { 1e-3 / g } else { 1e-3 };
        if rate > 0.0 {
            dt = dt.min(0.05 / rate);
        }
        dt
    }

    pub fn with_default_step(params: &ModelParams, t_max: f64, stride: usize) -> Result<Self> {
        Self::new(t_max, Self::default_step(params), stride)
    }

    pub fn steps(&self) -> usize {
        let ratio = self.t_max / self.dt;
        let steps = libm::ceil(ratio - 1e-9 * ratio.max(1.0)) as usize;
        steps.max(1)
    }

    pub fn step_size(&self) -> f64 {
        self.t_max / self.steps() as f64
    }

    pub fn output_count(&self) -> usize {
        self.steps() / self.stride + 1
    }

    pub fn output_times(&self) -> Vec<f64> {
        let h = self.step_size();
        (0..self.output_count())
            .map(|i| (i * self.stride) as f64 * h)
            .collect()
    }
}

/// The f-tables one run needs, keyed by lower sector size `m`.
#[derive(Clone, Debug, Default)]
pub struct FTableSet {
    tables: BTreeMap<usize, FTable>,
}

impl FTableSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, table: FTable) {
        self.tables.insert(table.m(), table);
    }

    pub fn get(&self, m: usize) -> Option<&FTable> {
        self.tables.get(&m)
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &FTable> {
        self.tables.values()
    }

    /// Builds the tables for the given `m` values.
    pub fn build(params: &ModelParams, ms: &[usize], opts: &TableBuildOptions) -> Result<Self> {
        let mut set = Self::new();
        for &m in ms {
            set.insert(FTable::build(params.n_sites, m, &params.coupling, opts)?);
        }
        Ok(set)
    }

    /// Lower sector sizes a spin-coherent run needs: `0 … N-1`.
    pub fn coherent_sizes(n_sites: usize) -> Vec<usize> {
        (0..n_sites).collect()
    }

    /// Lower sector sizes a ground-state run with filling `m` needs.
    pub fn ground_sizes(n_sites: usize, m: usize) -> Vec<usize> {
        (m..=m + 1).filter(|&s| s < n_sites).collect()
    }
}

/// Row `r` couples to the contiguous column range
/// `starts[r] .. starts[r] + lens[r]` with coefficients
/// `vals[offsets[r] ..]`, zeros inside the range stored explicitly. The
/// coefficients are mirrored into split real and imaginary parts for the
/// inner loop.
#[derive(Clone, Debug)]
struct BlockRows {
    starts: Vec<usize>,
    lens: Vec<usize>,
    offsets: Vec<usize>,
    vals: Vec<Complex64>,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl BlockRows {
    fn empty(rows: usize) -> Self {
        Self {
            starts: vec![0; rows],
            lens: vec![0; rows],
            offsets: vec![0; rows],
            vals: Vec::new(),
            re: Vec::new(),
            im: Vec::new(),
        }
    }

    fn finish(mut self) -> Self {
        self.re = self.vals.iter().map(|v| v.re).collect();
        self.im = self.vals.iter().map(|v| v.im).collect();
        self
    }

    #[cfg(test)]
    fn row(&self, row: usize) -> (usize, &[Complex64]) {
        let o = self.offsets[row];
        (self.starts[row], &self.vals[o..o + self.lens[row]])
    }

    #[inline]
    fn row_dot(&self, row: usize, x: &Split) -> Complex64 {
        let (o, len, start) = (self.offsets[row], self.lens[row], self.starts[row]);
        dot(
            &self.re[o..o + len],
            &self.im[o..o + len],
            &x.re[start..start + len],
            &x.im[start..start + len],
        )
    }
}

/// A complex vector stored as separate real and imaginary parts.
#[derive(Clone, Debug)]
struct Split {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Split {
    fn zeros(len: usize) -> Self {
        Self {
            re: vec![0.0; len],
            im: vec![0.0; len],
        }
    }

    fn set(&mut self, i: usize, v: Complex64) {
        self.re[i] = v.re;
        self.im[i] = v.im;
    }
}

const LANES: usize = 4;

/// `Σ a_i x_i` over split parts, with `LANES` partial sums combined in a
/// fixed order.
#[inline]
fn dot(ar: &[f64], ai: &[f64], xr: &[f64], xi: &[f64]) -> Complex64 {
    let mut sr = [0.0; LANES];
    let mut si = [0.0; LANES];
    let chunks = ar
        .chunks_exact(LANES)
        .zip(ai.chunks_exact(LANES))
        .zip(xr.chunks_exact(LANES).zip(xi.chunks_exact(LANES)));
    for ((a_r, a_i), (x_r, x_i)) in chunks {
        for l in 0..LANES {
            sr[l] += a_r[l] * x_r[l] - a_i[l] * x_i[l];
            si[l] += a_r[l] * x_i[l] + a_i[l] * x_r[l];
        }
    }
    let whole = ar.len() - ar.len() % LANES;
    let mut tr = 0.0;
    let mut ti = 0.0;
    for i in whole..ar.len() {
        tr += ar[i] * xr[i] - ai[i] * xi[i];
        ti += ar[i] * xi[i] + ai[i] * xr[i];
    }
    Complex64::new(
        ((sr[0] + sr[1]) + (sr[2] + sr[3])) + tr,
        ((si[0] + si[1]) + (si[2] + si[3])) + ti,
    )
}

/// Total momentum numerator mod `2N` of every configuration of `size`
/// fermions on `grid`; all zero when `uniform` is false.
fn momentum_classes(grid: MomentumGrid, size: usize, uniform: bool) -> Vec<usize> {
    let two_n = 2 * grid.n_sites() as i64;
    ConfigSpace::new(grid.n_sites(), size)
        .masks()
        .iter()
        .map(|&mask| {
            if uniform {
                bits(mask).map(|i| grid.numerator(i)).sum::<i64>().rem_euclid(two_n) as usize
            } else {
                0
            }
        })
        .collect()
}

/// Stable ordering of configurations by class, and the position range of
/// each class in that ordering.
fn class_order(classes: &[usize]) -> (Vec<usize>, BTreeMap<usize, (usize, usize)>) {
    let mut order: Vec<usize> = (0..classes.len()).collect();
    order.sort_by_key(|&i| classes[i]);
    let mut ranges = BTreeMap::new();
    for (pos, &i) in order.iter().enumerate() {
        ranges.entry(classes[i]).or_insert((pos, pos)).1 = pos + 1;
    }
    (order, ranges)
}

/// `J Σ cos k` for every configuration of `size` fermions on `grid`.
fn config_energies(grid: MomentumGrid, size: usize, j: f64) -> Vec<f64> {
    let cos: Vec<f64> = (0..grid.len()).map(|i| grid.cos_at(i)).collect();
    ConfigSpace::new(grid.n_sites(), size)
        .masks()
        .iter()
        .map(|&mask| j * bits(mask).map(|i| cos[i]).sum::<f64>())
        .collect()
}

/// Right-hand side of one sector.
#[derive(Clone, Debug)]
pub(crate) struct SectorSystem {
    detuning: f64,
    /// Internal position → lexicographic index. Configurations are grouped
    /// by total momentum, which a uniform coupling conserves, so each row of
    /// the coupling is one dense block.
    upper_order: Vec<usize>,
    lower_order: Vec<usize>,
    /// Energies in internal order.
    upper_energy: Vec<f64>,
    lower_energy: Vec<f64>,
    /// Rows `P` (upper), entries `f̃(K; P)`.
    to_upper: BlockRows,
    /// Rows `K` (lower), entries `f̃*(K; P)`.
    to_lower: BlockRows,
}

/// Factor turning stored table values into `f̃` for `coupling`.
fn table_scale(table: &FTable, coupling: &Coupling) -> Result<f64> {
    match (table.coupling(), coupling) {
        (Coupling::Uniform(_), Coupling::Uniform(g)) => Ok(*g),
        (Coupling::PerSite(a), Coupling::PerSite(b)) if a == b => Ok(1.0),
        _ => Err(Error::Precondition(format!(
            "f-table m = {} was built for a different coupling profile",
            table.m()
        ))),
    }
}

impl SectorSystem {
    pub(crate) fn new(params: &ModelParams, n: usize, tables: &FTableSet) -> Result<Self> {
        let n_sites = params.n_sites;
        if n > n_sites {
            return Err(Error::InvalidArgument(format!("sector n = {n} exceeds N = {n_sites}")));
        }
        let upper_grid = MomentumGrid::for_count_unchecked(n_sites, n);
        let lower_grid = MomentumGrid::for_count_unchecked(n_sites, n + 1);
        let upper_energy = config_energies(upper_grid, n, params.j);
        if n == n_sites {
            return Ok(Self {
                detuning: params.detuning(),
                upper_order: vec![0],
                lower_order: Vec::new(),
                upper_energy,
                lower_energy: Vec::new(),
                to_upper: BlockRows::empty(1),
                to_lower: BlockRows::empty(0),
            });
        }
        let lower_energy = config_energies(lower_grid, n + 1, params.j);
        let table = tables.get(n).ok_or(Error::MissingTable(n))?;
        if table.n_sites() != n_sites {
            return Err(Error::Precondition(format!(
                "f-table m = {n} was built for N = {}, run has N = {n_sites}",
                table.n_sites()
            )));
        }
        let scale = table_scale(table, &params.coupling)?;
        let nonzeros: usize = (0..table.rows()).map(|k| table.row_nonzeros(k).count()).sum();
        let uniform = params.coupling.is_uniform();
        let blocked = Self::blocked(table, scale, upper_grid, lower_grid, n, uniform);
        // a table breaking momentum conservation falls back to one dense block
        let (upper_order, lower_order, to_upper, to_lower) = match blocked {
            (placed, parts) if placed == nonzeros => parts,
            _ => Self::blocked(table, scale, upper_grid, lower_grid, n, false).1,
        };
        Ok(Self {
            detuning: params.detuning(),
            upper_energy: upper_order.iter().map(|&i| upper_energy[i]).collect(),
            lower_energy: lower_order.iter().map(|&i| lower_energy[i]).collect(),
            upper_order,
            lower_order,
            to_upper,
            to_lower,
        })
    }

    /// Block rows for the class assignment; also returns how many table
    /// nonzeros landed inside the blocks.
    #[allow(clippy::type_complexity)]
    fn blocked(
        table: &FTable,
        scale: f64,
        upper_grid: MomentumGrid,
        lower_grid: MomentumGrid,
        n: usize,
        uniform: bool,
    ) -> (usize, (Vec<usize>, Vec<usize>, BlockRows, BlockRows)) {
        let upper_classes = momentum_classes(upper_grid, n, uniform);
        let lower_classes = momentum_classes(lower_grid, n + 1, uniform);
        let (upper_order, upper_ranges) = class_order(&upper_classes);
        let (lower_order, lower_ranges) = class_order(&lower_classes);
        let f = |k: usize, p: usize| {
            if table.is_structural_zero(k, p) {
                ZERO
            } else {
                table.unit_value(k, p) * scale
            }
        };
        let build = |order: &[usize], classes: &[usize], ranges: &BTreeMap<usize, (usize, usize)>, other: &[usize], entry: &dyn Fn(usize, usize) -> Complex64| {
            let mut rows = BlockRows::empty(order.len());
            for (r, &i) in order.iter().enumerate() {
                let (a, b) = ranges.get(&classes[i]).copied().unwrap_or((0, 0));
                rows.starts[r] = a;
                rows.lens[r] = b - a;
                rows.offsets[r] = rows.vals.len();
                rows.vals.extend(other[a..b].iter().map(|&j| entry(i, j)));
            }
            rows.finish()
        };
        let to_upper = build(&upper_order, &upper_classes, &lower_ranges, &lower_order, &|p, k| f(k, p));
        let placed = to_upper.vals.iter().filter(|v| **v != ZERO).count();
        let to_lower = build(&lower_order, &lower_classes, &upper_ranges, &upper_order, &|k, p| f(k, p).conj());
        (placed, (upper_order, lower_order, to_upper, to_lower))
    }

    fn upper_len(&self) -> usize {
        self.upper_energy.len()
    }

    /// `dy/dt` at time `t`, with `y = [upper, lower]`. `phases` holds
    /// `e^{i ε̂ t}` for upper then lower configurations.
    fn derivative(&self, t: f64, phases: &[Complex64], y: &[Complex64], dy: &mut [Complex64], tmp: &mut [Split; 2]) {
        let nu = self.upper_len();
        let [tmp_upper, tmp_lower] = tmp;
        for (i, (p, v)) in phases.iter().zip(y).enumerate() {
            let x = p.conj() * v;
            if i < nu {
                tmp_upper.set(i, x);
            } else {
                tmp_lower.set(i - nu, x);
            }
        }
        let (dy_upper, dy_lower) = dy.split_at_mut(nu);
        let w = math::cis(self.detuning * t);
        // -i · e^{i(h+ω)t}
        let wu = Complex64::new(w.im, -w.re);
        // -i · e^{-i(h+ω)t}
        let wl = Complex64::new(-w.im, -w.re);
        for (p, out) in dy_upper.iter_mut().enumerate() {
            *out = wu * phases[p] * self.to_upper.row_dot(p, tmp_lower);
        }
        for (k, out) in dy_lower.iter_mut().enumerate() {
            *out = wl * phases[nu + k] * self.to_lower.row_dot(k, tmp_upper);
        }
    }

    fn fill_phases(&self, t: f64, phases: &mut [Complex64]) {
        for (out, e) in phases
            .iter_mut()
            .zip(self.upper_energy.iter().chain(&self.lower_energy))
        {
            *out = math::cis(e * t);
        }
    }
}

/// RK4 integrator state for one sector.
#[derive(Clone, Debug)]
pub(crate) struct Stepper {
    system: SectorSystem,
    y: Vec<Complex64>,
    h: f64,
    step: usize,
    initial_norm: f64,
    max_drift: f64,
    k: [Vec<Complex64>; 4],
    stage: Vec<Complex64>,
    tmp: [Split; 2],
    phases: [Vec<Complex64>; 3],
}

impl Stepper {
    pub(crate) fn new(system: SectorSystem, initial: &SectorState, h: f64) -> Result<Self> {
        if initial.upper.len() != system.upper_energy.len() || initial.lower.len() != system.lower_energy.len() {
            return Err(Error::Precondition(format!(
                "initial state has blocks of {} and {} amplitudes, sector needs {} and {}",
                initial.upper.len(),
                initial.lower.len(),
                system.upper_energy.len(),
                system.lower_energy.len()
            )));
        }
        let y: Vec<Complex64> = system
            .upper_order
            .iter()
            .map(|&i| initial.upper[i])
            .chain(system.lower_order.iter().map(|&i| initial.lower[i]))
            .collect();
        let len = y.len();
        let nu = system.upper_len();
        let initial_norm = initial.norm_sqr();
        Ok(Self {
            system,
            y,
            h,
            step: 0,
            initial_norm,
            max_drift: 0.0,
            k: [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]],
            stage: vec![ZERO; len],
            tmp: [Split::zeros(nu), Split::zeros(len - nu)],
            phases: [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]],
        })
    }

    fn time(&self) -> f64 {
        self.step as f64 * self.h
    }

    fn advance(&mut self) {
        let h = self.h;
        let t0 = self.time();
        let t_half = (self.step as f64 + 0.5) * h;
        let t1 = (self.step + 1) as f64 * h;
        let sys = &self.system;
        sys.fill_phases(t0, &mut self.phases[0]);
        sys.fill_phases(t_half, &mut self.phases[1]);
        sys.fill_phases(t1, &mut self.phases[2]);
        let [k1, k2, k3, k4] = &mut self.k;

        sys.derivative(t0, &self.phases[0], &self.y, k1, &mut self.tmp);
        for ((s, y), d) in self.stage.iter_mut().zip(&self.y).zip(k1.iter()) {
            *s = y + d * (0.5 * h);
        }
        sys.derivative(t_half, &self.phases[1], &self.stage, k2, &mut self.tmp);
        for ((s, y), d) in self.stage.iter_mut().zip(&self.y).zip(k2.iter()) {
            *s = y + d * (0.5 * h);
        }
        sys.derivative(t_half, &self.phases[1], &self.stage, k3, &mut self.tmp);
        for ((s, y), d) in self.stage.iter_mut().zip(&self.y).zip(k3.iter()) {
            *s = y + d * h;
        }
        sys.derivative(t1, &self.phases[2], &self.stage, k4, &mut self.tmp);
        let w = h / 6.0;
        for (i, y) in self.y.iter_mut().enumerate() {
            *y += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
        self.step += 1;
    }

    pub(crate) fn advance_by(&mut self, steps: usize) {
        for _ in 0..steps {
            self.advance();
        }
    }

    fn check_norm(&mut self, tolerance: f64) -> Result<()> {
        let norm: f64 = self.y.iter().map(|a| a.norm_sqr()).sum();
        let drift = math::abs(norm - self.initial_norm);
        self.max_drift = self.max_drift.max(drift);
        if !(drift <= tolerance) {
            return Err(Error::IntegrationFailure { drift, tolerance });
        }
        Ok(())
    }

    /// Upper amplitudes in internal order.
    fn upper(&self) -> &[Complex64] {
        &self.y[..self.system.upper_len()]
    }

    /// Lower amplitudes in internal order.
    fn lower(&self) -> &[Complex64] {
        &self.y[self.system.upper_len()..]
    }

    /// State in lexicographic order.
    fn state(&self) -> SectorState {
        let mut out = SectorState {
            upper: vec![ZERO; self.system.upper_order.len()],
            lower: vec![ZERO; self.system.lower_order.len()],
        };
        for (&i, a) in self.system.upper_order.iter().zip(self.upper()) {
            out.upper[i] = *a;
        }
        for (&i, a) in self.system.lower_order.iter().zip(self.lower()) {
            out.lower[i] = *a;
        }
        out
    }
}

fn check_normalized(state: &SectorState) -> Result<()> {
    let norm = state.norm_sqr();
    if math::abs(norm - 1.0) > 1e-10 {
        return Err(Error::Precondition(format!(
            "initial sector state must be normalized, has norm² {norm}"
        )));
    }
    Ok(())
}

/// Integrates sector `n` from `initial`, storing the full state at every
/// output time.
pub fn evolve_sector(
    params: &ModelParams,
    n: usize,
    initial: &SectorState,
    plan: &EvolutionPlan,
    tables: &FTableSet,
) -> Result<SectorTrajectory> {
    check_normalized(initial)?;
    let system = SectorSystem::new(params, n, tables)?;
    let mut stepper = Stepper::new(system, initial, plan.step_size())?;
    let times = plan.output_times();
    let mut states = Vec::with_capacity(times.len());
    states.push(stepper.state());
    for _ in 1..times.len() {
        stepper.advance_by(plan.stride);
        stepper.check_norm(plan.norm_tolerance)?;
        states.push(stepper.state());
    }
    Ok(SectorTrajectory {
        n,
        times,
        states,
        max_norm_drift: stepper.max_drift,
    })
}

/// Reduced record of a spin-coherent run: per output time and sector, the
/// block weights and the overlaps that enter the qubit coherence.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentRun {
    pub n_sites: usize,
    pub omega: f64,
    pub coefficients: Vec<Complex64>,
    pub times: Vec<f64>,
    /// `[time][n]`: `Σ|B⁽ⁿ⁾|²`.
    pub upper_weights: Vec<Vec<f64>>,
    /// `[time][n]`: `Σ|D⁽ⁿ⁾|²`.
    pub lower_weights: Vec<Vec<f64>>,
    /// `[time][n-1]` for `n = 1 … N`: `Σ_K B⁽ⁿ⁾(K) D⁽ⁿ⁻¹⁾*(K)`.
    pub overlaps: Vec<Vec<Complex64>>,
    pub max_norm_drift: f64,
}

impl CoherentRun {
    /// `Z(t) = Σ_n C*_{n-1} C_n Σ_K D⁽ⁿ⁻¹⁾*(K) B⁽ⁿ⁾(K)`.
    pub fn coherence(&self, index: usize) -> Complex64 {
        self.overlaps[index]
            .iter()
            .enumerate()
            .fold(ZERO, |acc, (i, o)| {
                acc + self.coefficients[i].conj() * self.coefficients[i + 1] * o
            })
    }

    /// `⟨σ_z⟩` at one output time.
    pub fn sz(&self, index: usize) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(n, c)| c.norm_sqr() * (self.upper_weights[index][n] - self.lower_weights[index][n]))
            .sum()
    }
}

/// Evolves every sector `n = 0 … N` of `|1⟩ ⊗ Σ_n C_n |D_n⟩`.
pub fn evolve_coherent(
    params: &ModelParams,
    spec: &CoherentSpec,
    plan: &EvolutionPlan,
    tables: &FTableSet,
) -> Result<CoherentRun> {
    let n_sites = params.n_sites;
    if n_sites > MAX_COHERENT_SITES {
        return Err(Error::param(
            "N",
            format!(
                "numerical spin-coherent runs support N <= {MAX_COHERENT_SITES}, got {n_sites}; J = 0 runs use the closed form"
            ),
        ));
    }
    if spec.n_sites() != n_sites {
        return Err(Error::InvalidArgument(format!(
            "coherent state has {} coefficients, N = {n_sites} needs {}",
            spec.coefficients.len(),
            n_sites + 1
        )));
    }
    let h = plan.step_size();
    let mut steppers = (0..=n_sites)
        .map(|n| {
            let mut initial = SectorState::zeros(n_sites, n);
            initial.upper = dicke_initial_amplitudes(n_sites, n)?;
            Stepper::new(SectorSystem::new(params, n, tables)?, &initial, h)
        })
        .collect::<Result<Vec<_>>>()?;
    // overlaps pair sector n's upper block with sector n-1's lower block
    // position by position, so both must use the same internal order
    if steppers
        .windows(2)
        .any(|w| w[1].system.upper_order != w[0].system.lower_order)
    {
        return Err(Error::Precondition("adjacent sectors order their shared configurations differently".into()));
    }

    let times = plan.output_times();
    let mut run = CoherentRun {
        n_sites,
        omega: params.omega,
        coefficients: spec.coefficients.clone(),
        times: times.clone(),
        upper_weights: Vec::with_capacity(times.len()),
        lower_weights: Vec::with_capacity(times.len()),
        overlaps: Vec::with_capacity(times.len()),
        max_norm_drift: 0.0,
    };
    let record = |steppers: &[Stepper], run: &mut CoherentRun| {
        run.upper_weights.push(
            steppers
                .iter()
                .map(|s| s.upper().iter().map(|a| a.norm_sqr()).sum())
                .collect(),
        );
        run.lower_weights.push(
            steppers
                .iter()
                .map(|s| s.lower().iter().map(|a| a.norm_sqr()).sum())
                .collect(),
        );
        run.overlaps.push(
            steppers
                .windows(2)
                .map(|w| {
                    w[1].upper()
                        .iter()
                        .zip(w[0].lower())
                        .fold(ZERO, |acc, (b, d)| acc + b * d.conj())
                })
                .collect(),
        );
    };
    record(&steppers, &mut run);
    for _ in 1..times.len() {
        par::for_each_mut(&mut steppers, |s| s.advance_by(plan.stride));
        for s in steppers.iter_mut() {
            s.check_norm(plan.norm_tolerance)?;
        }
        record(&steppers, &mut run);
    }
    run.max_norm_drift = steppers.iter().fold(0.0, |acc, s| acc.max(s.max_drift));
    Ok(run)
}

/// Initial qubit amplitudes `(a_{1̄}, a_1)` of a ground-state run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitAmplitudes {
    /// `a_{1̄}`, qubit down.
    pub down: Complex64,
    /// `a_1`, qubit up.
    pub up: Complex64,
}

impl QubitAmplitudes {
    pub fn new(down: Complex64, up: Complex64) -> Result<Self> {
        let norm = down.norm_sqr() + up.norm_sqr();
        if !(math::abs(norm - 1.0) <= 1e-12) {
            return Err(Error::param(
                "a1",
                format!("qubit amplitudes must satisfy |a_down|² + |a_up|² = 1, got {norm}"),
            ));
        }
        Ok(Self { down, up })
    }

    /// `(|1̄⟩ + |1⟩)/√2`.
    pub fn equal() -> Self {
        let a = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { down: a, up: a }
    }
}

/// Channel trajectories of a ground-state run.
///
/// The down channel (`|1̄⟩|g_m⟩`) is sector `m`: `upper` holds `C` over `m`
/// fermions, `lower` holds `A` over `m + 1`. The up channel (`|1⟩|g_m⟩`) is
/// sector `m + 1`: `upper` holds `B` over `m + 1` fermions, `lower` holds
/// `D` over `m + 2`. Channels with a zero initial amplitude are not evolved.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundRun {
    pub ground: GroundStateSpec,
    pub amplitudes: QubitAmplitudes,
    pub omega: f64,
    pub times: Vec<f64>,
    pub down: Option<SectorTrajectory>,
    pub up: Option<SectorTrajectory>,
    pub max_norm_drift: f64,
}

pub fn evolve_ground(
    params: &ModelParams,
    ground: &GroundStateSpec,
    amplitudes: QubitAmplitudes,
    plan: &EvolutionPlan,
    tables: &FTableSet,
) -> Result<GroundRun> {
    let n_sites = params.n_sites;
    if ground.config.grid().n_sites() != n_sites {
        return Err(Error::InvalidArgument(format!(
            "ground state is for N = {}, run has N = {n_sites}",
            ground.config.grid().n_sites()
        )));
    }
    let m = ground.m;
    let slot = ground.config.rank();
    let mut channels: Vec<(usize, SectorState)> = Vec::new();
    if amplitudes.down != ZERO {
        let mut s = SectorState::zeros(n_sites, m);
        s.lower[slot] = ONE;
        channels.push((m, s));
    }
    if amplitudes.up != ZERO {
        let mut s = SectorState::zeros(n_sites, m + 1);
        s.upper[slot] = ONE;
        channels.push((m + 1, s));
    }
    let results = par::map_range(channels.len(), |i| {
        let (n, state) = &channels[i];
        evolve_sector(params, *n, state, plan, tables)
    });
    let mut down = None;
    let mut up = None;
    for (traj, (n, _)) in results.into_iter().zip(&channels) {
        let traj = traj?;
        if *n == m {
            down = Some(traj);
        } else {
            up = Some(traj);
        }
    }
    let max_norm_drift = down
        .iter()
        .chain(up.iter())
        .fold(0.0, |acc: f64, t| acc.max(t.max_norm_drift));
    Ok(GroundRun {
        ground: ground.clone(),
        amplitudes,
        omega: params.omega,
        times: plan.output_times(),
        down,
        up,
        max_norm_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{coherent_coefficients, ground_state_for};
    use approx::assert_abs_diff_eq;

    fn uniform(n: usize, j: f64, h: f64, omega: f64, g: f64) -> ModelParams {
        ModelParams::uniform(n, j, h, omega, g).unwrap()
    }

    fn tables_for(params: &ModelParams, ms: &[usize]) -> FTableSet {
        FTableSet::build(params, ms, &TableBuildOptions::default()).unwrap()
    }

    #[test]
    fn plan_grid() {
        let plan = EvolutionPlan::new(1.0, 0.1, 2).unwrap();
        assert_eq!(plan.steps(), 10);
        assert_eq!(plan.output_times().len(), 6);
        assert_abs_diff_eq!(*plan.output_times().last().unwrap(), 1.0, epsilon = 1e-15);
        let plan = EvolutionPlan::new(1.0, 0.3, 1).unwrap();
        assert_eq!(plan.steps(), 4);
        assert!(plan.step_size() <= 0.3);
        assert!(EvolutionPlan::new(1.0, 0.0, 1).is_err());
        assert!(EvolutionPlan::new(1.0, 0.1, 0).is_err());
    }

    #[test]
    fn default_step_guard() {
        let p = uniform(10, 0.0, 15.0, 0.0, 0.01);
        assert_abs_diff_eq!(EvolutionPlan::default_step(&p), 0.05 / 15.0);
        let p = uniform(10, 0.0, 15.0, 0.0, 1.0);
        assert_abs_diff_eq!(EvolutionPlan::default_step(&p), 1e-3);
        let p = uniform(10, 0.0, 0.0, 0.0, 1.0);
        assert_abs_diff_eq!(EvolutionPlan::default_step(&p), 1e-3);
        let p = uniform(10, -60.0, 10.0, 0.0, 0.01);
        assert_abs_diff_eq!(EvolutionPlan::default_step(&p), 0.05 / 600.0);
    }

    #[test]
    fn time_zero_returns_initial_state() {
        let params = uniform(6, 0.7, 0.3, 0.1, 1.0);
        let tables = tables_for(&params, &[2]);
        let mut init = SectorState::zeros(6, 2);
        init.upper = dicke_initial_amplitudes(6, 2).unwrap();
        let traj = evolve_sector(&params, 2, &init, &EvolutionPlan::new(0.5, 0.01, 10).unwrap(), &tables).unwrap();
        assert_eq!(traj.states[0], init);
        assert_eq!(traj.times[0], 0.0);
    }

    #[test]
    fn rabi_sector_at_resonance() {
        // J = 0: the Dicke state couples only to the next Dicke state with
        // strength g√((n+1)(N-n))
        let n_sites = 8;
        let g = 0.7;
        let params = uniform(n_sites, 0.0, 0.4, -0.4, g);
        let tables = tables_for(&params, &[0, 1, 2, 3, 4]);
        let plan = EvolutionPlan::new(3.0, 1e-3, 100).unwrap();
        for n in 0..5 {
            let mut init = SectorState::zeros(n_sites, n);
            init.upper = dicke_initial_amplitudes(n_sites, n).unwrap();
            let traj = evolve_sector(&params, n, &init, &plan, &tables).unwrap();
            let gn = g * math::sqrt(((n + 1) * (n_sites - n)) as f64);
            for (t, s) in traj.times.iter().zip(&traj.states) {
                let up = math::cos(gn * t);
                assert_abs_diff_eq!(s.upper_weight(), up * up, epsilon = 1e-10);
                assert_abs_diff_eq!(s.lower_weight(), 1.0 - up * up, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn missing_table_is_reported() {
        let params = uniform(4, 0.5, 0.0, 0.0, 1.0);
        let init = SectorState {
            upper: vec![ONE],
            lower: vec![ZERO; 4],
        };
        let err = evolve_sector(&params, 0, &init, &EvolutionPlan::new(0.1, 0.01, 1).unwrap(), &FTableSet::new());
        assert_eq!(err.unwrap_err(), Error::MissingTable(0));
    }

    #[test]
    fn norm_drift_beyond_tolerance_fails() {
        let params = uniform(4, 0.0, 0.0, 0.0, 1.0);
        let tables = tables_for(&params, &[0]);
        let mut plan = EvolutionPlan::new(20.0, 0.5, 1).unwrap();
        plan.norm_tolerance = 1e-12;
        let init = SectorState {
            upper: vec![ONE],
            lower: vec![ZERO; 4],
        };
        match evolve_sector(&params, 0, &init, &plan, &tables) {
            Err(Error::IntegrationFailure { drift, .. }) => assert!(drift > 1e-12),
            other => panic!("expected integration failure, got {other:?}"),
        }
    }

    #[test]
    fn hermiticity_pairing() {
        for coupling in [Coupling::Uniform(1.3), Coupling::PerSite(vec![1.0, 0.2, 0.7, 1.1, 0.4, 0.9])] {
            let params = ModelParams::new(6, 0.3, 0.0, 0.0, coupling).unwrap();
            let tables = tables_for(&params, &[2]);
            let sys = SectorSystem::new(&params, 2, &tables).unwrap();
            let mut pairs = 0;
            for k in 0..sys.lower_order.len() {
                let (start, vals) = sys.to_lower.row(k);
                for (j, v) in vals.iter().enumerate() {
                    let (back_start, back) = sys.to_upper.row(start + j);
                    assert_eq!(back[k - back_start], v.conj());
                    pairs += 1;
                }
            }
            let dense = sys.to_upper.vals.len();
            assert_eq!(pairs, dense);
            // momentum blocks only for the uniform profile
            assert_eq!(dense < 15 * 20, params.coupling.is_uniform());
        }
    }

    #[test]
    fn blocked_rows_hold_every_table_entry() {
        let params = uniform(8, 0.6, 0.2, 0.0, 0.9);
        let tables = tables_for(&params, &[3]);
        let table = tables.get(3).unwrap();
        let sys = SectorSystem::new(&params, 3, &tables).unwrap();
        for (r, &p) in sys.upper_order.iter().enumerate() {
            let (start, vals) = sys.to_upper.row(r);
            let mut seen = vec![ZERO; table.rows()];
            for (j, v) in vals.iter().enumerate() {
                seen[sys.lower_order[start + j]] = *v;
            }
            for (k, s) in seen.iter().enumerate() {
                assert_eq!(*s, if table.is_structural_zero(k, p) { ZERO } else { table.value(k, p) });
            }
        }
    }

    #[test]
    fn decoupled_ground_state_only_picks_up_phases() {
        let params = uniform(6, -1.0, 0.4, 0.3, 0.0);
        let ground = ground_state_for(6, -1.0, 0.4).unwrap();
        let tables = tables_for(&params, &FTableSet::ground_sizes(6, ground.m));
        let run = evolve_ground(&params, &ground, QubitAmplitudes::equal(), &EvolutionPlan::new(2.0, 0.01, 20).unwrap(), &tables).unwrap();
        let slot = ground.config.rank();
        for (down, up) in run.down.unwrap().states.iter().zip(&run.up.unwrap().states) {
            assert_abs_diff_eq!(down.lower[slot].norm(), 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(up.upper[slot].norm(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn unpopulated_channel_is_skipped() {
        let params = uniform(4, -1.0, 0.5, 0.0, 1.0);
        let ground = ground_state_for(4, -1.0, 0.5).unwrap();
        let tables = tables_for(&params, &FTableSet::ground_sizes(4, ground.m));
        let amps = QubitAmplitudes::new(ZERO, ONE).unwrap();
        let run = evolve_ground(&params, &ground, amps, &EvolutionPlan::new(1.0, 0.01, 10).unwrap(), &tables).unwrap();
        assert!(run.down.is_none());
        assert!(run.up.is_some());
        assert!(QubitAmplitudes::new(ONE, ONE).is_err());
    }

    #[test]
    fn coherent_run_with_z_zero_is_single_sector_rabi() {
        let n_sites = 6;
        // the k = 0 mode costs J, so h = J puts the vacuum sector on resonance
        let params = uniform(n_sites, 0.8, 0.8, 0.0, 1.0);
        let tables = tables_for(&params, &FTableSet::coherent_sizes(n_sites));
        let spec = coherent_coefficients(n_sites, ZERO).unwrap();
        let run = evolve_coherent(&params, &spec, &EvolutionPlan::new(2.0, 1e-3, 50).unwrap(), &tables).unwrap();
        let g0 = math::sqrt(n_sites as f64);
        for (i, t) in run.times.iter().enumerate() {
            assert_abs_diff_eq!(run.sz(i), math::cos(2.0 * g0 * t), epsilon = 1e-10);
        }
    }

    #[test]
    fn sector_results_do_not_depend_on_scheduling() {
        let n_sites = 6;
        let params = uniform(n_sites, 0.5, 1.0, 0.0, 1.0);
        let tables = tables_for(&params, &FTableSet::coherent_sizes(n_sites));
        let spec = coherent_coefficients(n_sites, Complex64::new(1.0, 0.0)).unwrap();
        let plan = EvolutionPlan::new(1.0, 1e-3, 100).unwrap();
        let run = evolve_coherent(&params, &spec, &plan, &tables).unwrap();
        for n in (0..=n_sites).rev() {
            let mut init = SectorState::zeros(n_sites, n);
            init.upper = dicke_initial_amplitudes(n_sites, n).unwrap();
            let traj = evolve_sector(&params, n, &init, &plan, &tables).unwrap();
            for (i, s) in traj.states.iter().enumerate() {
                assert_eq!(s.upper_weight(), run.upper_weights[i][n]);
                assert_eq!(s.lower_weight(), run.lower_weights[i][n]);
            }
        }
    }
}
