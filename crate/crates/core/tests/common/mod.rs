//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use choirt::linalg::{inv_sqrt_pd, max_eigenvalue, ComplexMatrix};

/// min over a grid on the real qubit Bloch disk of f(σ), refined around the
/// best point until the cell is below 1e-5.
pub fn real_disk_min(f: impl Fn(&ComplexMatrix) -> f64) -> f64 {
    let sigma = |x: f64, z: f64| ComplexMatrix::from_real(2, 2, &[0.5 * (1.0 + z), 0.5 * x, 0.5 * x, 0.5 * (1.0 - z)]);
    let (mut cx, mut cz, mut h) = (0.0, 0.0, 1.0);
    let mut best = f64::INFINITY;
    while h > 1e-5 {
        let (mut bx, mut bz) = (cx, cz);
        for i in -20..=20 {
            for j in -20..=20 {
                let (x, z) = (cx + h * i as f64 / 20.0, cz + h * j as f64 / 20.0);
                if x * x + z * z > 1.0 - 1e-12 {
                    continue;
                }
                let v = f(&sigma(x, z));
                if v < best {
                    best = v;
                    (bx, bz) = (x, z);
                }
            }
        }
        (cx, cz, h) = (bx, bz, h / 8.0);
    }
    best
}

/// Smallest λ with ρ ≤ λσ for full-rank σ: λ_max(σ^{-1/2} ρ σ^{-1/2}).
pub fn dmax_ratio(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
    let s = inv_sqrt_pd(sigma).unwrap();
    max_eigenvalue(&(&(&s * rho) * &s).hermitize()).unwrap()
}

pub fn oracle_dmax_imaginarity(rho: &ComplexMatrix) -> f64 {
    real_disk_min(|s| dmax_ratio(rho, s)).log2()
}

