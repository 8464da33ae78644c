//! Qubit observables from sector trajectories: Bloch vector and purity,
//! W-factors and the decoherence factor, the two-qubit X-state and its
//! concurrence, and scalar metrics of the resulting time series.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::dynamics::{CoherentRun, GroundRun};
use crate::error::{Error, Result};
use crate::math;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Bloch vector and purity of the qubit at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochPoint {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    pub purity: f64,
}

impl BlochPoint {
    /// From `⟨σ_z⟩` and the Schrödinger-picture coherence `ρ_{1 1̄}`.
    pub fn from_coherence(sz: f64, rho_up_down: Complex64) -> Self {
        let sx = 2.0 * rho_up_down.re;
        let sy = -2.0 * rho_up_down.im;
        Self {
            sx,
            sy,
            sz,
            purity: 0.5 * (1.0 + sx * sx + sy * sy + sz * sz),
        }
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.sx * self.sx + self.sy * self.sy + self.sz * self.sz)
    }
}

/// `⟨σ_x⟩ = 2 Re[e^{-iωt} Z]`, `⟨σ_y⟩ = -2 Im[e^{-iωt} Z]`, `⟨σ_z⟩` from the
/// sector weights, and `P = (1 + |⟨σ⟩|²)/2`.
pub fn bloch_and_purity(run: &CoherentRun) -> Result<Vec<BlochPoint>> {
    let sectors = run.n_sites + 1;
    if run.coefficients.len() != sectors
        || run.upper_weights.iter().any(|w| w.len() != sectors)
        || run.lower_weights.iter().any(|w| w.len() != sectors)
        || run.overlaps.iter().any(|o| o.len() != run.n_sites)
    {
        return Err(Error::Precondition(format!(
            "coherent run must carry all {sectors} sectors"
        )));
    }
    Ok(run
        .times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let rho = math::cis(-run.omega * t) * run.coherence(i);
            BlochPoint::from_coherence(run.sz(i), rho)
        })
        .collect())
}

/// Single-qubit process coefficients `ρ_ab(t) = Σ_cd W_abcd(t) ρ_cd(0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WFactors {
    pub times: Vec<f64>,
    /// `W_{1111} = Σ|B|²`.
    pub up_up: Vec<f64>,
    /// `W_{1̄1̄11} = Σ|D|²`.
    pub down_from_up: Vec<f64>,
    /// `W_{1̄1̄1̄1̄} = Σ|A|²`.
    pub down_down: Vec<f64>,
    /// `W_{111̄1̄} = Σ|C|²`.
    pub up_from_down: Vec<f64>,
    /// `W_{11̄11̄} = e^{-iωt} Σ A* B`, the decoherence factor `r(t)`.
    pub coherence: Vec<Complex64>,
}

impl WFactors {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `W_{1̄11̄1} = W*_{11̄11̄}`.
    pub fn coherence_conj(&self, index: usize) -> Complex64 {
        self.coherence[index].conj()
    }

    /// Single-qubit reduced density matrix at one time for initial qubit
    /// amplitudes `(a_{1̄}, a_1)`, as `[[ρ_11, ρ_11̄], [ρ_1̄1, ρ_1̄1̄]]`.
    pub fn qubit_rho(&self, index: usize, down: Complex64, up: Complex64) -> [[Complex64; 2]; 2] {
        let pu = up.norm_sqr();
        let pd = down.norm_sqr();
        let r11 = pu * self.up_up[index] + pd * self.up_from_down[index];
        let r22 = pu * self.down_from_up[index] + pd * self.down_down[index];
        let off = up * down.conj() * self.coherence[index];
        [
            [Complex64::new(r11, 0.0), off],
            [off.conj(), Complex64::new(r22, 0.0)],
        ]
    }
}

/// W-factors of a ground-state run; both channels must have been evolved.
pub fn w_factors(run: &GroundRun) -> Result<WFactors> {
    let (Some(down), Some(up)) = (&run.down, &run.up) else {
        return Err(Error::Precondition(
            "W-factors need both the qubit-up and qubit-down channels".into(),
        ));
    };
    let mut w = WFactors {
        times: run.times.clone(),
        up_up: Vec::with_capacity(run.times.len()),
        down_from_up: Vec::with_capacity(run.times.len()),
        down_down: Vec::with_capacity(run.times.len()),
        up_from_down: Vec::with_capacity(run.times.len()),
        coherence: Vec::with_capacity(run.times.len()),
    };
    for ((t, d), u) in run.times.iter().zip(&down.states).zip(&up.states) {
        w.up_up.push(u.upper_weight());
        w.down_from_up.push(u.lower_weight());
        w.down_down.push(d.lower_weight());
        w.up_from_down.push(d.upper_weight());
        let overlap = u
            .upper
            .iter()
            .zip(&d.lower)
            .fold(ZERO, |acc, (b, a)| acc + b * a.conj());
        w.coherence.push(math::cis(-run.omega * t) * overlap);
    }
    Ok(w)
}

/// `r(t) = W_{11̄11̄}(t)`.
pub fn decoherence_factor(w: &WFactors) -> Vec<Complex64> {
    w.coherence.clone()
}

/// Two-qubit initial state `α|1̄1⟩ + β|11̄⟩` with `α` real.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellState {
    pub alpha: f64,
    pub beta: Complex64,
}

impl BellState {
    pub fn new(alpha: f64, beta: Complex64) -> Result<Self> {
        let norm = alpha * alpha + beta.norm_sqr();
        if !(math::abs(norm - 1.0) <= 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "Bell-state amplitudes need alpha² + |beta|² = 1, got {norm}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// `(|1̄1⟩ + |11̄⟩)/√2`.
    pub fn maximal() -> Self {
        let a = core::f64::consts::FRAC_1_SQRT_2;
        Self {
            alpha: a,
            beta: Complex64::new(a, 0.0),
        }
    }
}

/// Two-qubit density matrix in the basis `{|11⟩, |11̄⟩, |1̄1⟩, |1̄1̄⟩}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitRho {
    pub matrix: Matrix4<Complex64>,
}

impl TwoQubitRho {
    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.matrix[(i, i)].re).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.matrix - self.matrix.adjoint())
            .iter()
            .fold(0.0, |acc, v| acc.max(v.norm()))
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let herm = (self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let e = SymmetricEigen::new(herm).eigenvalues;
        let mut out = [e[0], e[1], e[2], e[3]];
        out.sort_by(f64::total_cmp);
        out
    }

    /// Checks Hermiticity, unit trace (1e-10) and positivity (-1e-10).
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > 1e-12 {
            return Err(Error::Precondition(format!("ρ is not Hermitian (error {herm:e})")));
        }
        let trace = self.trace();
        if math::abs(trace - 1.0) > 1e-10 {
            return Err(Error::Precondition(format!("ρ has trace {trace}")));
        }
        let min = self.eigenvalues()[0];
        if min < -1e-10 {
            return Err(Error::Precondition(format!("ρ has eigenvalue {min:e}")));
        }
        Ok(())
    }
}

/// `ρ(t)` for two identical copies started from `bell`, at output `index`.
pub fn two_qubit_rho(w: &WFactors, index: usize, bell: &BellState) -> TwoQubitRho {
    let a2 = bell.alpha * bell.alpha;
    let b2 = bell.beta.norm_sqr();
    let (uu, du, dd, ud) = (
        w.up_up[index],
        w.down_from_up[index],
        w.down_down[index],
        w.up_from_down[index],
    );
    let r = w.coherence[index];
    let mut m = Matrix4::<Complex64>::zeros();
    m[(0, 0)] = Complex64::new(ud * uu, 0.0);
    m[(1, 1)] = Complex64::new(a2 * ud * du + b2 * uu * dd, 0.0);
    m[(2, 2)] = Complex64::new(a2 * dd * uu + b2 * du * ud, 0.0);
    m[(3, 3)] = Complex64::new(dd * du, 0.0);
    let off = bell.beta * bell.alpha * r * r.conj();
    m[(1, 2)] = off;
    m[(2, 1)] = off.conj();
    TwoQubitRho { matrix: m }
}

/// Concurrence of an X-state,
/// `2 max(0, |ρ_{11̄,1̄1}| - √(ρ_{11,11} ρ_{1̄1̄,1̄1̄}), |ρ_{11,1̄1̄}| - √(ρ_{11̄,11̄} ρ_{1̄1,1̄1}))`.
pub fn concurrence(rho: &TwoQubitRho) -> f64 {
    let m = &rho.matrix;
    let inner = m[(1, 2)].norm() - math::sqrt((m[(0, 0)].re * m[(3, 3)].re).max(0.0));
    let outer = m[(0, 3)].norm() - math::sqrt((m[(1, 1)].re * m[(2, 2)].re).max(0.0));
    2.0 * inner.max(outer).max(0.0)
}

/// Wootters concurrence `max(0, λ₁ - λ₂ - λ₃ - λ₄)`, with `λᵢ` the
/// decreasing square roots of the eigenvalues of `√ρ ρ̃ √ρ` and
/// `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
pub fn wootters_concurrence(rho: &Matrix4<Complex64>) -> f64 {
    let herm = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let sqrt_diag = Matrix4::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(math::sqrt(l.max(0.0)), 0.0)));
    let sqrt_rho = eig.eigenvectors * sqrt_diag * eig.eigenvectors.adjoint();
    // σ_y ⊗ σ_y in the basis {|11⟩, |11̄⟩, |1̄1⟩, |1̄1̄⟩}
    let mut yy = Matrix4::<Complex64>::zeros();
    yy[(0, 3)] = Complex64::new(-1.0, 0.0);
    yy[(3, 0)] = Complex64::new(-1.0, 0.0);
    yy[(1, 2)] = Complex64::new(1.0, 0.0);
    yy[(2, 1)] = Complex64::new(1.0, 0.0);
    let tilde = yy * herm.conjugate() * yy;
    let r = sqrt_rho * tilde * sqrt_rho;
    let r = (r + r.adjoint()) * Complex64::new(0.5, 0.0);
    let mut lambdas: Vec<f64> = SymmetricEigen::new(r)
        .eigenvalues
        .iter()
        .map(|&l| math::sqrt(l.max(0.0)))
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0)
}

/// `2|αβ||r|² - 2√(ρ_{11,11} ρ_{1̄1̄,1̄1̄})` before clamping at zero.
pub fn concurrence_unclamped(w: &WFactors, index: usize, bell: &BellState) -> f64 {
    let rho11 = w.up_from_down[index] * w.up_up[index];
    let rho44 = w.down_down[index] * w.down_from_up[index];
    2.0 * math::abs(bell.alpha) * bell.beta.norm() * w.coherence[index].norm_sqr()
        - 2.0 * math::sqrt((rho11 * rho44).max(0.0))
}

/// `C(t)` over all output times.
pub fn concurrence_series(w: &WFactors, bell: &BellState) -> Vec<f64> {
    (0..w.len())
        .map(|i| concurrence_unclamped(w, i, bell).max(0.0))
        .collect()
}

/// Default fit window for the Gaussian rate, in units of `gt`.
pub const DEFAULT_ALPHA_WINDOW: f64 = 0.02;

/// Fewest samples the Gaussian fit accepts inside its window.
pub const MIN_FIT_POINTS: usize = 20;

/// Scalar summaries of `|r(t)|²` and `C(t)`. Absent metrics are `None`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MetricReport {
    pub alpha: Option<f64>,
    pub r2_max: Option<f64>,
    pub t_first_min: Option<f64>,
    pub t_esd: Option<f64>,
}

/// Least-squares `α` of `-ln|r|² ≈ α (gt)²` through the origin on
/// `gt ∈ [0, window]`.
pub fn fit_gaussian_rate(gt: &[f64], r2: &[f64], window: f64) -> Result<f64> {
    let points: Vec<(f64, f64)> = gt
        .iter()
        .zip(r2)
        .filter(|(t, _)| **t <= window * (1.0 + 1e-12))
        .map(|(&t, &r)| (t * t, -math::ln(r)))
        .collect();
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::Precondition(format!(
            "Gaussian fit needs at least {MIN_FIT_POINTS} samples in gt <= {window}, got {}",
            points.len()
        )));
    }
    let (sxy, sxx) = points
        .iter()
        .fold((0.0, 0.0), |(sxy, sxx), (x, y)| (sxy + x * y, sxx + x * x));
    if sxx == 0.0 {
        return Err(Error::Precondition("Gaussian fit window has no nonzero times".into()));
    }
    Ok(sxy / sxx)
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Max,
    Min,
}

/// First interior extremum after the initial point: three-point test,
/// plateaus resolve to their earliest sample, quadratic refinement when the
/// extremum is a single sample.
fn first_extremum(t: &[f64], v: &[f64], kind: Kind) -> Option<(f64, f64)> {
    let s = if kind == Kind::Max { 1.0 } else { -1.0 };
    let n = v.len();
    let mut i = 1;
    while i + 1 < n {
        if s * v[i] > s * v[i - 1] {
            let mut j = i;
            while j + 1 < n && v[j + 1] == v[i] {
                j += 1;
            }
            if j + 1 < n && s * v[j + 1] < s * v[i] {
                if j > i {
                    return Some((t[i], v[i]));
                }
                let (a, b, c) = (v[i - 1], v[i], v[i + 1]);
                let curvature = a - 2.0 * b + c;
                if curvature == 0.0 {
                    return Some((t[i], b));
                }
                let delta = 0.5 * (a - c) / curvature;
                let step = if delta >= 0.0 { t[i + 1] - t[i] } else { t[i] - t[i - 1] };
                return Some((t[i] + delta * step, b - 0.25 * (a - c) * delta));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    None
}

/// First post-initial local maximum `(gt, value)`.
pub fn first_maximum(gt: &[f64], values: &[f64]) -> Option<(f64, f64)> {
    first_extremum(gt, values, Kind::Max)
}

/// First local minimum `(gt, value)`.
pub fn first_minimum(gt: &[f64], values: &[f64]) -> Option<(f64, f64)> {
    first_extremum(gt, values, Kind::Min)
}

/// First time the unclamped concurrence expression reaches zero. The root
/// is taken from the cubic through the four samples around the sign change
/// (the chord when fewer exist).
pub fn esd_time(gt: &[f64], unclamped: &[f64]) -> Option<f64> {
    if unclamped.first().is_some_and(|&c| c <= 0.0) {
        return Some(gt[0]);
    }
    let i = (1..unclamped.len()).find(|&i| unclamped[i] <= 0.0)?;
    let (a, b) = (unclamped[i - 1], unclamped[i]);
    let chord = gt[i - 1] + (gt[i] - gt[i - 1]) * a / (a - b);
    if i < 2 || i + 1 >= unclamped.len() || b == 0.0 {
        return Some(chord);
    }
    let xs = &gt[i - 2..i + 2];
    let ys = &unclamped[i - 2..i + 2];
    let cubic = |t: f64| {
        (0..4)
            .map(|k| {
                let basis: f64 = (0..4).filter(|&l| l != k).map(|l| (t - xs[l]) / (xs[k] - xs[l])).product();
                ys[k] * basis
            })
            .sum::<f64>()
    };
    let (mut lo, mut hi) = (gt[i - 1], gt[i]);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if cubic(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Metrics of `|r(t)|²` (and of `C(t)` when its unclamped expression is
/// given). The Gaussian rate is absent when the window holds too few
/// samples.
pub fn metrics(gt: &[f64], r2: &[f64], unclamped_concurrence: Option<&[f64]>, alpha_window: f64) -> MetricReport {
    MetricReport {
        alpha: fit_gaussian_rate(gt, r2, alpha_window).ok(),
        r2_max: first_maximum(gt, r2).map(|(_, v)| v.clamp(0.0, 1.0)),
        t_first_min: first_minimum(gt, r2).map(|(t, _)| t),
        t_esd: unclamped_concurrence.and_then(|c| esd_time(gt, c)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn identity_w(len: usize) -> WFactors {
        WFactors {
            times: (0..len).map(|i| i as f64).collect(),
            up_up: alloc::vec![1.0; len],
            down_from_up: alloc::vec![0.0; len],
            down_down: alloc::vec![1.0; len],
            up_from_down: alloc::vec![0.0; len],
            coherence: alloc::vec![c(1.0, 0.0); len],
        }
    }

    fn random_x_state(rng: &mut ChaCha8Rng) -> Matrix4<Complex64> {
        let mut p: [f64; 4] = core::array::from_fn(|_| rng.gen_range(0.0..1.0));
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        let bound = math::sqrt(p[1] * p[2]);
        let mag = rng.gen_range(0.0..1.0) * bound;
        let phase = rng.gen_range(-3.0..3.0);
        let mut m = Matrix4::zeros();
        for (i, x) in p.iter().enumerate() {
            m[(i, i)] = c(*x, 0.0);
        }
        m[(1, 2)] = math::cis(phase) * mag;
        m[(2, 1)] = m[(1, 2)].conj();
        m
    }

    #[test]
    fn bell_state_at_time_zero() {
        let w = identity_w(1);
        let rho = two_qubit_rho(&w, 0, &BellState::maximal());
        let expected = [[0.0, 0.0, 0.0, 0.0], [0.0, 0.5, 0.5, 0.0], [0.0, 0.5, 0.5, 0.0], [0.0, 0.0, 0.0, 0.0]];
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(rho.matrix[(i, j)].re, expected[i][j], epsilon = 1e-15);
                assert_abs_diff_eq!(rho.matrix[(i, j)].im, 0.0, epsilon = 1e-15);
            }
        }
        assert!(rho.validate().is_ok());
        assert_abs_diff_eq!(concurrence(&rho), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(wootters_concurrence(&rho.matrix), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn product_state_has_no_concurrence() {
        // |1⟩|1̄⟩
        let mut m = Matrix4::zeros();
        m[(1, 1)] = c(1.0, 0.0);
        assert_eq!(concurrence(&TwoQubitRho { matrix: m }), 0.0);
        assert_abs_diff_eq!(wootters_concurrence(&m), 0.0, epsilon = 1e-12);
        let w = identity_w(1);
        let bell = BellState::new(1.0, c(0.0, 0.0)).unwrap();
        assert_eq!(concurrence(&two_qubit_rho(&w, 0, &bell)), 0.0);
    }

    #[test]
    fn closed_form_matches_wootters_on_random_x_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let m = random_x_state(&mut rng);
            let rho = TwoQubitRho { matrix: m };
            assert!(rho.validate().is_ok());
            assert_abs_diff_eq!(concurrence(&rho), wootters_concurrence(&m), epsilon = 1e-10);
        }
    }

    #[test]
    fn bell_state_normalization_is_checked() {
        assert!(BellState::new(0.6, c(0.0, 0.8)).is_ok());
        assert!(matches!(BellState::new(0.6, c(0.6, 0.0)), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn rho_trace_follows_w_sum_rules() {
        let w = WFactors {
            times: alloc::vec![0.0],
            up_up: alloc::vec![0.7],
            down_from_up: alloc::vec![0.3],
            down_down: alloc::vec![0.9],
            up_from_down: alloc::vec![0.1],
            coherence: alloc::vec![c(0.5, -0.2)],
        };
        let bell = BellState::new(0.6, c(0.0, 0.8)).unwrap();
        let rho = two_qubit_rho(&w, 0, &bell);
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(concurrence(&rho), concurrence_unclamped(&w, 0, &bell).max(0.0), epsilon = 1e-15);
    }

    #[test]
    fn gaussian_rate_of_synthetic_series() {
        let gt: Vec<f64> = (0..=200).map(|i| i as f64 * 1e-4).collect();
        let r2: Vec<f64> = gt.iter().map(|t| math::exp(-3.0 * t * t)).collect();
        let alpha = fit_gaussian_rate(&gt, &r2, DEFAULT_ALPHA_WINDOW).unwrap();
        assert_abs_diff_eq!(alpha, 3.0, epsilon = 1e-6);
        assert!(fit_gaussian_rate(&gt[..10], &r2[..10], DEFAULT_ALPHA_WINDOW).is_err());
    }

    #[test]
    fn extrema_of_a_cosine() {
        let gt: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.01).collect();
        let v: Vec<f64> = gt.iter().map(|t| 0.5 + 0.5 * math::cos(1.3 * t)).collect();
        let (tmin, vmin) = first_minimum(&gt, &v).unwrap();
        assert_abs_diff_eq!(tmin, core::f64::consts::PI / 1.3, epsilon = 1e-5);
        assert_abs_diff_eq!(vmin, 0.0, epsilon = 1e-8);
        let (tmax, vmax) = first_maximum(&gt, &v).unwrap();
        assert_abs_diff_eq!(tmax, 2.0 * core::f64::consts::PI / 1.3, epsilon = 1e-5);
        assert_abs_diff_eq!(vmax, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn plateaus_resolve_to_their_start() {
        let gt = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let v = [1.0, 0.5, 0.2, 0.2, 0.2, 0.6];
        assert_eq!(first_minimum(&gt, &v), Some((2.0, 0.2)));
        let monotone = [1.0, 0.9, 0.8, 0.7, 0.6, 0.5];
        assert_eq!(first_minimum(&gt, &monotone), None);
        assert_eq!(first_maximum(&gt, &monotone), None);
    }

    #[test]
    fn esd_interpolates_the_crossing() {
        let gt = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(esd_time(&gt[..3], &[1.0, 0.5, -0.5]), Some(1.5));
        // a cubic is recovered exactly
        let f = |t: f64| (1.3 - t) * (t + 2.0) * (t + 3.0);
        let ys: Vec<f64> = gt.iter().map(|&t| f(t)).collect();
        assert_abs_diff_eq!(esd_time(&gt, &ys).unwrap(), 1.3, epsilon = 1e-12);
        assert_eq!(esd_time(&gt, &[1.0, 0.5, 0.4, 0.2]), None);
        let report = metrics(&gt, &[1.0, 0.9, 0.95, 0.9], Some(&[1.0, 0.5, 0.4, 0.2]), 0.02);
        assert_eq!(report.alpha, None);
        assert_eq!(report.t_esd, None);
        assert!(report.r2_max.is_some());
    }

    #[test]
    fn bloch_point_purity() {
        let p = BlochPoint::from_coherence(1.0, c(0.0, 0.0));
        assert_eq!((p.sx, p.sy, p.sz, p.purity), (0.0, 0.0, 1.0, 1.0));
        let p = BlochPoint::from_coherence(0.0, c(0.5, 0.0));
        assert_eq!((p.sx, p.purity), (1.0, 1.0));
        let p = BlochPoint::from_coherence(0.0, c(0.0, 0.5));
        assert_eq!(p.sy, -1.0);
    }
}
