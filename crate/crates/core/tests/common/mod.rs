//! Independent reference values shared by the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};

pub const OMEGA_C: f64 = 0.75;
pub const KAPPA: f64 = 0.25;

/// Critical coupling of a two-level emergent Rabi model with gap `delta`
/// and coupling modifier `eta`.
pub fn rabi_gc(n_atoms: usize, delta: f64, eta: f64, omega_c: f64, kappa: f64) -> f64 {
    let n = n_atoms as f64;
    (n * delta.abs() / 2.0 * (omega_c * omega_c + kappa * kappa) / omega_c).sqrt() / (2.0 * eta)
}

/// Energy of the symmetric `n`-excitation state under a constant exchange `v`.
pub fn symmetric_energy(n_atoms: usize, n: usize, v: f64) -> f64 {
    let (nn, k) = (n_atoms as f64, n as f64);
    -(nn / 2.0 - k) + k * (nn - k) * v
}

pub fn symmetric_eta(n_atoms: usize, n: usize) -> f64 {
    (((n_atoms - n) * (n + 1)) as f64).sqrt()
}

/// Mean-field threshold from the static `S^x` susceptibility of a
/// non-degenerate ground state:
/// `G_c² = N (ω_c² + κ²) / (16 ω_c χ)`, `χ = 2 Σ_e |<e|S^x|g>|² / (E_e - E_g)`.
pub fn linear_response_gc(h: &DMatrix<f64>, sx: &DMatrix<f64>, n_atoms: usize, omega_c: f64, kappa: f64) -> f64 {
    let eig = SymmetricEigen::new(h.clone());
    let g = (0..eig.eigenvalues.len())
        .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
        .unwrap();
    let vg = eig.eigenvectors.column(g);
    let sxg = sx * vg;
    let mut chi = 0.0;
    for e in 0..eig.eigenvalues.len() {
        if e == g {
            continue;
        }
        let gap = eig.eigenvalues[e] - eig.eigenvalues[g];
        let m = eig.eigenvectors.column(e).dot(&sxg);
        if m.abs() > 1e-14 {
            chi += 2.0 * m * m / gap;
        }
    }
    (n_atoms as f64 * (omega_c * omega_c + kappa * kappa) / (16.0 * omega_c * chi)).sqrt()
}

/// `n` evenly spaced points on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}
