//! Experiment orchestration: one task per sweep point, results in sweep
//! order.

use rayon::prelude::*;
use xxbath::observables::{self, concurrence_series, concurrence_unclamped, fit_gaussian_rate, MetricReport, MIN_FIT_POINTS};
use xxbath::oracle::{analytic_j0, perturbative_alpha};
use xxbath::{
    bloch_and_purity, decoherence_factor, evolve_coherent, evolve_ground, ground_state_for, two_qubit_rho, w_factors,
    BellState, BlochPoint, Complex64, EvolutionPlan, FTableSet, GroundStateSpec, ModelParams, QubitAmplitudes, WFactors,
};

use crate::cache::TableCache;
use crate::config::{Experiment, ExperimentKind, Initial, SweepPoint};
use crate::error::CliError;
use crate::verify::{self, Verification};

#[derive(Clone, Debug)]
pub enum PointData {
    Rabi {
        bloch: Vec<BlochPoint>,
        /// Evaluated with the `J = 0` closed form rather than integrated.
        analytic: bool,
    },
    Ground {
        ground: GroundStateSpec,
        w: WFactors,
        r: Vec<Complex64>,
        r2: Vec<f64>,
        /// Clamped and unclamped concurrence, for Bell-state runs.
        concurrence: Option<(Vec<f64>, Vec<f64>)>,
    },
}

#[derive(Clone, Debug)]
pub struct PointResult {
    pub point: SweepPoint,
    pub gt: Vec<f64>,
    pub data: PointData,
    pub metrics: Option<MetricReport>,
    pub alpha_perturbative: Option<f64>,
    pub max_norm_drift: f64,
    pub verification: Option<Verification>,
}

impl PointResult {
    pub fn bloch(&self) -> Option<&[BlochPoint]> {
        match &self.data {
            PointData::Rabi { bloch, .. } => Some(bloch),
            PointData::Ground { .. } => None,
        }
    }

    pub fn r2(&self) -> Option<&[f64]> {
        match &self.data {
            PointData::Ground { r2, .. } => Some(r2),
            PointData::Rabi { .. } => None,
        }
    }

    pub fn concurrence(&self) -> Option<&[f64]> {
        match &self.data {
            PointData::Ground { concurrence: Some((c, _)), .. } => Some(c),
            _ => None,
        }
    }

    pub fn ground(&self) -> Option<&GroundStateSpec> {
        match &self.data {
            PointData::Ground { ground, .. } => Some(ground),
            PointData::Rabi { .. } => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub experiment: Experiment,
    pub points: Vec<PointResult>,
}

impl RunResult {
    pub fn max_norm_drift(&self) -> f64 {
        self.points.iter().map(|p| p.max_norm_drift).fold(0.0, f64::max)
    }

    pub fn verification_failures(&self) -> Vec<&PointResult> {
        self.points
            .iter()
            .filter(|p| p.verification.as_ref().is_some_and(|v| !v.passed()))
            .collect()
    }
}

/// Runs every sweep point, on a dedicated pool of `threads` workers when
/// given. Output does not depend on the thread count.
pub fn run(exp: &Experiment, cache: &TableCache, threads: Option<usize>) -> Result<RunResult, CliError> {
    let work = || -> Result<RunResult, CliError> {
        let points = exp
            .points
            .par_iter()
            .map(|p| run_point(exp, p, cache))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RunResult {
            experiment: exp.clone(),
            points,
        })
    };
    match threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::Resource(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

fn params_for(exp: &Experiment, point: &SweepPoint) -> Result<ModelParams, CliError> {
    Ok(ModelParams::new(exp.n_sites, point.j, point.h, exp.omega, exp.coupling.clone())?)
}

/// Plan in engine time units from the `gt`-based settings of `exp`.
fn plan_for(exp: &Experiment, params: &ModelParams, gt_max: f64, dt_gt: Option<f64>, stride: usize) -> Result<EvolutionPlan, CliError> {
    let g = exp.g_scale();
    let dt = match dt_gt {
        Some(dt) => dt / g,
        None => EvolutionPlan::default_step(params),
    };
    Ok(EvolutionPlan::new(gt_max / g, dt, stride)?)
}

fn run_point(exp: &Experiment, point: &SweepPoint, cache: &TableCache) -> Result<PointResult, CliError> {
    let params = params_for(exp, point)?;
    match &exp.initial {
        Initial::Coherent { z } => run_rabi(exp, point, &params, *z, cache),
        Initial::GroundState { down, up } => run_ground(exp, point, &params, *down, *up, None, cache),
        Initial::Bell(bell) => {
            let half = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            run_ground(exp, point, &params, half, half, Some(bell), cache)
        }
    }
}

fn run_rabi(exp: &Experiment, point: &SweepPoint, params: &ModelParams, z: Complex64, cache: &TableCache) -> Result<PointResult, CliError> {
    let g = exp.g_scale();
    let plan = plan_for(exp, params, exp.gt_max, exp.dt, exp.stride)?;
    let analytic = params.j == 0.0 && params.coupling.is_uniform();
    let (times, bloch, drift) = if analytic {
        let times = plan.output_times();
        let bloch = analytic_j0(params.n_sites, z, g, params.h, params.omega, &times)?;
        (times, bloch, 0.0)
    } else {
        let spec = xxbath::coherent_coefficients(params.n_sites, z)?;
        if params.n_sites > xxbath::dynamics::MAX_COHERENT_SITES {
            return Err(CliError::Resource(format!(
                "numerical spin-coherent runs support N <= {}, got N = {} (J = 0 with uniform g uses the closed form)",
                xxbath::dynamics::MAX_COHERENT_SITES,
                params.n_sites
            )));
        }
        let tables = cache.table_set(params.n_sites, &params.coupling, &FTableSet::coherent_sizes(params.n_sites))?;
        let run = evolve_coherent(params, &spec, &plan, &tables)?;
        let bloch = bloch_and_purity(&run)?;
        (run.times, bloch, run.max_norm_drift)
    };
    let verification = if exp.verify {
        Some(verify::verify_coherent(params, z, &times, &bloch)?)
    } else {
        None
    };
    Ok(PointResult {
        point: *point,
        gt: times.iter().map(|t| g * t).collect(),
        data: PointData::Rabi { bloch, analytic },
        metrics: None,
        alpha_perturbative: None,
        max_norm_drift: drift,
        verification,
    })
}

fn ground_run(exp: &Experiment, params: &ModelParams, ground: &GroundStateSpec, plan: &EvolutionPlan, cache: &TableCache) -> Result<(WFactors, f64), CliError> {
    let tables = cache.table_set(params.n_sites, &params.coupling, &FTableSet::ground_sizes(exp.n_sites, ground.m))?;
    // both channels are needed for r(t), whatever the qubit amplitudes
    let run = evolve_ground(params, ground, QubitAmplitudes::equal(), plan, &tables)?;
    Ok((w_factors(&run)?, run.max_norm_drift))
}

fn squared(r: &[Complex64]) -> Vec<f64> {
    r.iter().map(|r| r.norm_sqr()).collect()
}

fn run_ground(
    exp: &Experiment,
    point: &SweepPoint,
    params: &ModelParams,
    down: Complex64,
    up: Complex64,
    bell: Option<&BellState>,
    cache: &TableCache,
) -> Result<PointResult, CliError> {
    let g = exp.g_scale();
    let ground = ground_state_for(params.n_sites, params.j, params.h)?;
    let plan = plan_for(exp, params, exp.gt_max, exp.dt, exp.stride)?;
    let (w, mut drift) = ground_run(exp, params, &ground, &plan, cache)?;
    let gt: Vec<f64> = w.times.iter().map(|t| g * t).collect();
    let r = decoherence_factor(&w);
    let r2 = squared(&r);

    let concurrence = match bell {
        Some(bell) => {
            for i in 0..w.len() {
                two_qubit_rho(&w, i, bell)
                    .validate()
                    .map_err(|e| CliError::Verification(format!("gt = {}: {e}", gt[i])))?;
            }
            let unclamped: Vec<f64> = (0..w.len()).map(|i| concurrence_unclamped(&w, i, bell)).collect();
            Some((concurrence_series(&w, bell), unclamped))
        }
        None => None,
    };

    let mut metrics = observables::metrics(&gt, &r2, concurrence.as_ref().map(|(_, u)| u.as_slice()), exp.alpha_window);
    if metrics.alpha.is_none() {
        let (alpha, aux_drift) = fine_alpha(exp, params, &ground, cache)?;
        metrics.alpha = alpha;
        drift = drift.max(aux_drift);
    }
    let alpha_perturbative = if params.coupling.is_uniform() {
        Some(perturbative_alpha(params.n_sites, &ground)?)
    } else {
        None
    };

    let verification = if exp.verify {
        Some(verify::verify_ground(params, &ground, down, up, &w)?)
    } else {
        None
    };

    Ok(PointResult {
        point: *point,
        gt,
        data: PointData::Ground {
            ground,
            w,
            r,
            r2,
            concurrence,
        },
        metrics: Some(metrics),
        alpha_perturbative,
        max_norm_drift: drift,
        verification,
    })
}

/// α from an auxiliary run resolving the fit window, for runs whose stored
/// series is too coarse.
fn fine_alpha(exp: &Experiment, params: &ModelParams, ground: &GroundStateSpec, cache: &TableCache) -> Result<(Option<f64>, f64), CliError> {
    let g = exp.g_scale();
    let window = exp.alpha_window;
    let resolved = window / (5 * MIN_FIT_POINTS) as f64;
    let dt_gt = (EvolutionPlan::default_step(params) * g).min(resolved);
    let plan = plan_for(exp, params, 1.25 * window, Some(dt_gt), 1)?;
    let (w, drift) = ground_run(exp, params, ground, &plan, cache)?;
    let gt: Vec<f64> = w.times.iter().map(|t| g * t).collect();
    Ok((fit_gaussian_rate(&gt, &squared(&decoherence_factor(&w)), window).ok(), drift))
}

pub fn kind_has_summary(kind: ExperimentKind) -> bool {
    kind != ExperimentKind::Rabi
}
