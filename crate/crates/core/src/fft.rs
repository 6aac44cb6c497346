//! Multi-axis complex transforms on row-major hypercubic arrays.
//!
//! Forward transforms produce Fourier coefficients of
//! `f(x) = Σ_ξ f̂(ξ) e^{iξ·x}`, i.e. they are normalised by `1/n^axes`. The
//! inverse is the plain synthesis sum.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

type PlanCache = (FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>);

thread_local! {
    static PLANS: RefCell<PlanCache> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let (planner, cache) = &mut *cell.borrow_mut();
        cache
            .entry((n, forward))
            .or_insert_with(|| {
                let dir = if forward {
                    FftDirection::Forward
                } else {
                    FftDirection::Inverse
                };
                planner.plan_fft(n, dir)
            })
            .clone()
    })
}

fn transform(data: &mut [Complex64], n: usize, axes: usize, forward: bool) {
    debug_assert_eq!(data.len(), n.pow(axes as u32));
    let fft = plan(n, forward);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut line = vec![Complex64::default(); n];
    for axis in 0..axes {
        let stride = n.pow((axes - 1 - axis) as u32);
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        let block = n * stride;
        for chunk in data.chunks_mut(block) {
            for offset in 0..stride {
                for (j, v) in line.iter_mut().enumerate() {
                    *v = chunk[offset + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    chunk[offset + j * stride] = *v;
                }
            }
        }
    }
}

/// Physical values to Fourier coefficients, in place.
pub fn forward(data: &mut [Complex64], n: usize, axes: usize) {
    transform(data, n, axes, true);
    let scale = 1.0 / data.len() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Fourier coefficients to physical values, in place.
pub fn inverse(data: &mut [Complex64], n: usize, axes: usize) {
    transform(data, n, axes, false);
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn matches_direct_dft_in_two_axes() {
        let n = 6;
        let data: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut fast = data.clone();
        forward(&mut fast, n, 2);
        for k0 in 0..n {
            for k1 in 0..n {
                let mut acc = Complex64::default();
                for j0 in 0..n {
                    for j1 in 0..n {
                        let phase = -2.0 * PI * ((k0 * j0 + k1 * j1) as f64) / n as f64;
                        acc += data[j0 * n + j1] * Complex64::from_polar(1.0, phase);
                    }
                }
                acc /= (n * n) as f64;
                assert!((acc - fast[k0 * n + k1]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn roundtrip_many_axes() {
        let n: usize = 4;
        let axes = 5;
        let data: Vec<Complex64> = (0..n.pow(axes as u32))
            .map(|i| Complex64::new(i as f64, -(i as f64).sqrt()))
            .collect();
        let mut work = data.clone();
        forward(&mut work, n, axes);
        inverse(&mut work, n, axes);
        for (a, b) in work.iter().zip(&data) {
            assert!((a - b).norm() < 1e-10);
        }
    }
}
