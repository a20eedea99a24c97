//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use nalgebra::DMatrix;
use stlb_core::Potential;

/// Eigenvalues of `-u'' + q u` for a real cosine series, from the
/// `(2N+1)`-dimensional truncation in the exponential basis. Periodic uses
/// frequencies `2 pi m`, antiperiodic `(2m+1) pi`.
pub fn hill_matrix_eigenvalues(p: &Potential, antiperiodic: bool, half_size: usize) -> Vec<f64> {
    assert!(p.samples().is_none() && p.is_real());
    let n = 2 * half_size + 1;
    let freq = |i: usize| {
        let m = i as f64 - half_size as f64;
        if antiperiodic {
            (2.0 * m + 1.0) * std::f64::consts::PI
        } else {
            2.0 * m * std::f64::consts::PI
        }
    };
    let mut h = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = freq(i) * freq(i);
    }
    for t in p.terms() {
        let k = t.k as usize;
        if k == 0 {
            for i in 0..n {
                h[(i, i)] += t.coeff.re;
            }
            continue;
        }
        for i in 0..n.saturating_sub(k) {
            h[(i, i + k)] += 0.5 * t.coeff.re;
            h[(i + k, i)] += 0.5 * t.coeff.re;
        }
    }
    let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
