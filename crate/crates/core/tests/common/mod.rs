//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use nalgebra::DMatrix;
use stlb_core::{Complex64, Potential};

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

/// Classical fixed-step RK4 for `u'' = (q - mu^2) u` on `[0, 1]`, returning
/// `(u, u')` at every step.
pub fn rk4(p: &Potential, mu: Complex64, u0: Complex64, du0: Complex64, steps: usize) -> Vec<(Complex64, Complex64)> {
    let h = 1.0 / steps as f64;
    let f = |x: f64, y: [Complex64; 2]| [y[1], (p.value(x) - mu * mu) * y[0]];
    let mut y = [u0, du0];
    let mut out = vec![(u0, du0)];
    for i in 0..steps {
        let x = i as f64 * h;
        let k1 = f(x, y);
        let k2 = f(x + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = f(x + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = f(x + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for j in 0..2 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        out.push((y[0], y[1]));
    }
    out
}
