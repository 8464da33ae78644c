use num_complex::Complex64;

pub(crate) use libm::{cos, exp, fabs as abs, log as ln, sin, sqrt};

pub(crate) const PI: f64 = core::f64::consts::PI;

#[inline]
pub(crate) fn cis(theta: f64) -> Complex64 {
    let (s, c) = libm::sincos(theta);
    Complex64::new(c, s)
}

/// `ln C(n, k)`, accumulated as a product of ratios so it stays finite for
/// large `n`.
pub(crate) fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (1..=k).map(|i| ln((n - k + i) as f64 / i as f64)).sum()
}
