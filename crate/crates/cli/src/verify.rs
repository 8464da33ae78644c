//! `--verify`: replay a run with the dense oracle and report the largest
//! deviation of the reduced qubit state.

use xxbath::oracle::{self, coherent_bath, exact_propagate, fermion_bath_state, DenseState};
use xxbath::{BlochPoint, Complex64, GroundStateSpec, ModelParams, WFactors};

/// Largest accepted deviation between engine and oracle.
pub const VERIFY_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub enum Verification {
    Checked { max_deviation: f64 },
    Skipped(String),
}

impl Verification {
    pub fn passed(&self) -> bool {
        match self {
            Verification::Checked { max_deviation } => *max_deviation < VERIFY_TOLERANCE,
            Verification::Skipped(_) => true,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Verification::Checked { max_deviation } => format!(
                "max deviation {max_deviation:.3e} (tolerance {VERIFY_TOLERANCE:.0e}) {}",
                if self.passed() { "PASS" } else { "FAIL" }
            ),
            Verification::Skipped(why) => format!("skipped: {why}"),
        }
    }
}

fn skip_large(n_sites: usize) -> Option<Verification> {
    (n_sites > oracle::MAX_SITES).then(|| Verification::Skipped(format!("dense oracle needs N <= {}", oracle::MAX_SITES)))
}

/// Bloch vector and purity against the dense propagation of the product
/// state `|1⟩ ⊗ |z⟩`.
pub fn verify_coherent(params: &ModelParams, z: Complex64, times: &[f64], bloch: &[BlochPoint]) -> xxbath::Result<Verification> {
    if let Some(skip) = skip_large(params.n_sites) {
        return Ok(skip);
    }
    let n = params.n_sites;
    let s0 = DenseState::product(n, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), &coherent_bath(n, z)?)?;
    let dense = exact_propagate(params, &s0, times)?;
    let max_deviation = dense.iter().zip(bloch).fold(0.0f64, |acc, (d, e)| {
        let d = d.bloch();
        acc.max((d.sx - e.sx).abs())
            .max((d.sy - e.sy).abs())
            .max((d.sz - e.sz).abs())
            .max((d.purity - e.purity).abs())
    });
    Ok(Verification::Checked { max_deviation })
}

/// Reduced qubit density matrix from the W-factors against the dense
/// propagation of `(down |1̄⟩ + up |1⟩) ⊗ |g⟩`.
pub fn verify_ground(
    params: &ModelParams,
    ground: &GroundStateSpec,
    down: Complex64,
    up: Complex64,
    w: &WFactors,
) -> xxbath::Result<Verification> {
    if let Some(skip) = skip_large(params.n_sites) {
        return Ok(skip);
    }
    let s0 = DenseState::product(params.n_sites, down, up, &fermion_bath_state(&ground.config)?)?;
    let dense = exact_propagate(params, &s0, &w.times)?;
    let mut max_deviation = 0.0f64;
    for (i, d) in dense.iter().enumerate() {
        let exact = d.qubit_rho();
        let engine = w.qubit_rho(i, down, up);
        for a in 0..2 {
            for b in 0..2 {
                max_deviation = max_deviation.max((exact[a][b] - engine[a][b]).norm());
            }
        }
    }
    Ok(Verification::Checked { max_deviation })
}
