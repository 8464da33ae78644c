use approx::assert_abs_diff_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xxbath::observables::{fit_gaussian_rate, DEFAULT_ALPHA_WINDOW};
use xxbath::oracle::{coherent_bath, exact_propagate, fermion_bath_state, perturbative_alpha, second_order_r2, DenseState};
use xxbath::{
    bloch_and_purity, coherent_coefficients, decoherence_factor, evolve_coherent, evolve_ground, ground_state_for,
    w_factors, Complex64, Coupling, EvolutionPlan, FTableSet, ModelParams, QubitAmplitudes, TableBuildOptions,
};

fn tables(params: &ModelParams, ms: &[usize]) -> FTableSet {
    FTableSet::build(params, ms, &TableBuildOptions::default()).unwrap()
}

fn coherent_max_deviation(params: &ModelParams, z: Complex64, gt_max: f64) -> f64 {
    let n = params.n_sites;
    let spec = coherent_coefficients(n, z).unwrap();
    let plan = EvolutionPlan::with_default_step(params, gt_max, 200).unwrap();
    let run = evolve_coherent(params, &spec, &plan, &tables(params, &FTableSet::coherent_sizes(n))).unwrap();
    let engine = bloch_and_purity(&run).unwrap();
    let s0 = DenseState::product(n, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), &coherent_bath(n, z).unwrap())
        .unwrap();
    let dense = exact_propagate(params, &s0, &run.times).unwrap();
    engine.iter().zip(&dense).fold(0.0f64, |acc, (e, d)| {
        let d = d.bloch();
        acc.max((e.sx - d.sx).abs())
            .max((e.sy - d.sy).abs())
            .max((e.sz - d.sz).abs())
            .max((e.purity - d.purity).abs())
    })
}

#[test]
fn coherent_dynamics_match_dense_propagation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [4usize, 6] {
        for z in [0.6, 1.0, 1.6] {
            let params = ModelParams::uniform(n, rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), 1.0)
                .unwrap();
            let dev = coherent_max_deviation(&params, Complex64::new(z, 0.0), 10.0);
            assert!(dev < 1e-8, "N={n} z={z} {params:?}: deviation {dev:e}");
        }
    }
}

#[test]
fn complex_z_and_per_site_coupling_match_dense() {
    let params = ModelParams::new(6, 0.9, -0.4, 0.7, Coupling::PerSite(vec![1.0, 0.6, 1.3, 0.8, 1.1, 0.5])).unwrap();
    let dev = coherent_max_deviation(&params, Complex64::new(0.5, -0.8), 6.0);
    assert!(dev < 1e-8, "deviation {dev:e}");
}

#[test]
fn ground_state_channels_match_dense_propagation() {
    let cases = [(6usize, -1.3, 0.4, 0.3), (6, -0.2, 1.5, -0.8), (4, -1.0, 0.9, 1.2), (8, -0.7, 0.3, 0.0)];
    for (n, j, h, omega) in cases {
        let params = ModelParams::uniform(n, j, h, omega, 1.0).unwrap();
        let ground = ground_state_for(n, j, h).unwrap();
        let amps = QubitAmplitudes::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).unwrap();
        let plan = EvolutionPlan::with_default_step(&params, 8.0, 400).unwrap();
        let run = evolve_ground(&params, &ground, amps, &plan, &tables(&params, &FTableSet::ground_sizes(n, ground.m)))
            .unwrap();
        let w = w_factors(&run).unwrap();
        let bath = fermion_bath_state(&ground.config).unwrap();
        let s0 = DenseState::product(n, amps.down, amps.up, &bath).unwrap();
        let dense = exact_propagate(&params, &s0, &w.times).unwrap();
        for (i, d) in dense.iter().enumerate() {
            let rho = w.qubit_rho(i, amps.down, amps.up);
            let exact = d.qubit_rho();
            for a in 0..2 {
                for b in 0..2 {
                    assert!((rho[a][b] - exact[a][b]).norm() < 1e-8, "N={n} t={} entry ({a},{b})", w.times[i]);
                }
            }
        }
    }
}

#[test]
fn second_order_decoherence_is_accurate_at_short_times() {
    for j_over_h in [-0.5, -1.5] {
        let params = ModelParams::uniform(10, 10.0 * j_over_h, 10.0, 0.0, 1.0).unwrap();
        let ground = ground_state_for(10, params.j, params.h).unwrap();
        let plan = EvolutionPlan::new(0.05, 2.5e-5, 20).unwrap();
        let run = evolve_ground(&params, &ground, QubitAmplitudes::equal(), &plan, &tables(&params, &FTableSet::ground_sizes(10, ground.m)))
            .unwrap();
        let w = w_factors(&run).unwrap();
        let exact: Vec<f64> = decoherence_factor(&w).iter().map(|r| r.norm_sqr()).collect();
        let approx = second_order_r2(&params, &ground, &w.times).unwrap();
        for (e, a) in exact.iter().zip(&approx) {
            assert!(((e - a) / e).abs() < 0.02, "J/h={j_over_h}: {e} vs {a}");
        }
    }
}

#[test]
fn fitted_rate_does_not_depend_on_coupling_scale() {
    let ground = ground_state_for(8, -4.0, 4.0).unwrap();
    let alpha = perturbative_alpha(8, &ground).unwrap();
    for g in [0.5, 1.0] {
        let params = ModelParams::uniform(8, -4.0, 4.0, 0.0, g).unwrap();
        let plan = EvolutionPlan::new(0.02 / g, 1e-5 / g, 4).unwrap();
        let run = evolve_ground(&params, &ground, QubitAmplitudes::equal(), &plan, &tables(&params, &FTableSet::ground_sizes(8, ground.m)))
            .unwrap();
        let w = w_factors(&run).unwrap();
        let gt: Vec<f64> = w.times.iter().map(|t| g * t).collect();
        let r2: Vec<f64> = decoherence_factor(&w).iter().map(|r| r.norm_sqr()).collect();
        let fit = fit_gaussian_rate(&gt, &r2, DEFAULT_ALPHA_WINDOW).unwrap();
        assert_abs_diff_eq!(fit / alpha, 1.0, epsilon = 0.05);
    }
}
