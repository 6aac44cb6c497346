//! Lanczos approximation of `e^{−itH} v` for Hermitian `H` given as a
//! matrix-free operator.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrylovOptions {
    /// Krylov subspace dimension.
    pub dim: usize,
    /// Largest `‖H‖·dt` allowed in one substep.
    pub max_phase: f64,
    /// Per-substep error estimate tolerated, relative to `‖v‖`.
    pub tolerance: f64,
    /// How many times a failing substep may be halved.
    pub max_halvings: u32,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            dim: 20,
            max_phase: 5.0,
            tolerance: 1e-12,
            max_halvings: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KrylovReport {
    pub substeps: usize,
    pub max_error_estimate: f64,
    pub tolerance_met: bool,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// One Lanczos step `v ↦ e^{−i dt H} v`. Returns the result and an
/// a-posteriori error estimate (absolute).
pub fn lanczos_step(
    apply: &dyn Fn(&[Complex64], &mut [Complex64]),
    v: &[Complex64],
    dt: f64,
    dim: usize,
) -> (Vec<Complex64>, f64) {
    let beta0 = norm(v);
    if beta0 == 0.0 || dt == 0.0 {
        return (v.to_vec(), 0.0);
    }
    let len = v.len();
    let mut basis: Vec<Vec<Complex64>> = vec![v.iter().map(|x| x / beta0).collect()];
    let mut alpha = Vec::with_capacity(dim);
    let mut beta: Vec<f64> = Vec::with_capacity(dim);
    let mut w = vec![Complex64::default(); len];
    let mut residual_beta = 0.0;
    for j in 0..dim {
        apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        for (wi, qi) in w.iter_mut().zip(&basis[j]) {
            *wi -= qi * a;
        }
        if j > 0 {
            let b = beta[j - 1];
            for (wi, qi) in w.iter_mut().zip(&basis[j - 1]) {
                *wi -= qi * b;
            }
        }
        for q in &basis {
            let c = dot(q, &w);
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= qi * c;
            }
        }
        let b = norm(&w);
        if b <= 1e-13 * (a.abs() + beta.last().copied().unwrap_or(0.0)).max(1.0) {
            residual_beta = 0.0;
            break;
        }
        if j + 1 == dim {
            residual_beta = b;
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let coeffs: Vec<Complex64> = (0..m)
        .map(|r| {
            (0..m)
                .map(|c| {
                    let q = eig.eigenvectors[(r, c)];
                    let q0 = eig.eigenvectors[(0, c)];
                    Complex64::from_polar(q * q0, -dt * eig.eigenvalues[c])
                })
                .sum::<Complex64>()
                * beta0
        })
        .collect();
    let mut out = vec![Complex64::default(); len];
    for (q, c) in basis.iter().zip(&coeffs) {
        for (o, qi) in out.iter_mut().zip(q) {
            *o += qi * c;
        }
    }
    (out, residual_beta * coeffs[m - 1].norm())
}

/// `e^{−itH} v` with substeps `dt ≤ max_phase/‖H‖`, halving any substep whose
/// error estimate exceeds the tolerance.
pub fn expm_apply(
    apply: &dyn Fn(&[Complex64], &mut [Complex64]),
    v: &[Complex64],
    t: f64,
    norm_bound: f64,
    min_steps: usize,
    opts: &KrylovOptions,
) -> (Vec<Complex64>, KrylovReport) {
    let mut report = KrylovReport {
        tolerance_met: true,
        ..Default::default()
    };
    if t == 0.0 {
        return (v.to_vec(), report);
    }
    let by_norm = (norm_bound * t.abs() / opts.max_phase).ceil() as usize;
    let steps = min_steps.max(by_norm).max(1);
    let dt = t / steps as f64;
    let scale = norm(v).max(f64::MIN_POSITIVE);
    let mut state = v.to_vec();
    for _ in 0..steps {
        state = advance(apply, state, dt, 0, scale, opts, &mut report);
    }
    (state, report)
}

fn advance(
    apply: &dyn Fn(&[Complex64], &mut [Complex64]),
    state: Vec<Complex64>,
    dt: f64,
    depth: u32,
    scale: f64,
    opts: &KrylovOptions,
    report: &mut KrylovReport,
) -> Vec<Complex64> {
    let (next, err) = lanczos_step(apply, &state, dt, opts.dim);
    let rel = err / scale;
    if rel <= opts.tolerance || depth >= opts.max_halvings {
        report.substeps += 1;
        report.max_error_estimate = report.max_error_estimate.max(rel);
        if rel > opts.tolerance {
            report.tolerance_met = false;
        }
        return next;
    }
    let half = advance(apply, state, dt / 2.0, depth + 1, scale, opts, report);
    advance(apply, half, dt / 2.0, depth + 1, scale, opts, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_operator_is_exact() {
        let diag: Vec<f64> = (0..50).map(|i| (i as f64 * 0.7).sin() * 3.0).collect();
        let apply = |x: &[Complex64], y: &mut [Complex64]| {
            for ((yi, xi), d) in y.iter_mut().zip(x).zip(&diag) {
                *yi = xi * d;
            }
        };
        let v: Vec<Complex64> = (0..50).map(|i| Complex64::new(1.0, i as f64 * 0.01)).collect();
        let (out, report) = expm_apply(&apply, &v, 1.3, 3.0, 1, &KrylovOptions::default());
        assert!(report.tolerance_met);
        for ((o, x), d) in out.iter().zip(&v).zip(&diag) {
            let expect = x * Complex64::from_polar(1.0, -1.3 * d);
            assert!((o - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn small_invariant_subspace_breaks_down_cleanly() {
        let apply = |x: &[Complex64], y: &mut [Complex64]| {
            y.copy_from_slice(x);
            for yi in y.iter_mut() {
                *yi *= 2.0;
            }
        };
        let v = vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let (out, err) = lanczos_step(&apply, &v, 0.5, 20);
        assert_eq!(err, 0.0);
        let phase = Complex64::from_polar(1.0, -1.0);
        assert!((out[0] - v[0] * phase).norm() < 1e-14);
        assert!((out[1] - v[1] * phase).norm() < 1e-14);
    }
}
