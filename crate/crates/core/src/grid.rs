use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Largest supported number of spatial dimensions.
pub const MAX_DIM: usize = 3;

/// Uniform collocation grid on the torus `T^d = [0, 2π)^d` with `n` points per
/// axis.
///
/// Fourier coefficients are stored in transform order: index `i` along an axis
/// carries frequency `i` for `i ≤ n/2` and `i − n` otherwise, so the
/// represented frequencies are `{−n/2+1, …, n/2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    n: usize,
}

impl GridSpec {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(LabError::InvalidGrid(format!(
                "dimension must be in 1..={MAX_DIM}, got {dim}"
            )));
        }
        if n < 4 || !n.is_multiple_of(2) {
            return Err(LabError::InvalidGrid(format!(
                "points per axis must be even and at least 4, got {n}"
            )));
        }
        if n.checked_pow(dim as u32).is_none_or(|len| len > 1 << 26) {
            return Err(LabError::InvalidGrid(format!(
                "{n}^{dim} points exceeds the supported grid size"
            )));
        }
        Ok(Self { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of grid points, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Quadrature weight of one cell, `(2π/n)^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Volume of the torus, `(2π)^d`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.dim as i32)
    }

    /// Largest represented frequency along one axis.
    pub fn nyquist(&self) -> usize {
        self.n / 2
    }

    /// Signed frequency carried by transform index `i` along one axis.
    pub fn axis_frequency(&self, i: usize) -> i64 {
        axis_frequency(self.n, i)
    }

    /// Transform index of the signed frequency `k`, if it is represented.
    pub fn axis_index(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k > half || k <= -half {
            return None;
        }
        Some(if k >= 0 { k as usize } else { (k + self.n as i64) as usize })
    }

    /// Per-axis indices of a flat (row-major) index. Unused axes are zero.
    pub fn unflatten(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx[..self.dim].iter().fold(0, |acc, &i| acc * self.n + i)
    }

    /// Frequency vector of a flat spectral index. Unused axes are zero.
    pub fn frequency(&self, flat: usize) -> [i64; MAX_DIM] {
        let idx = self.unflatten(flat);
        let mut xi = [0; MAX_DIM];
        for axis in 0..self.dim {
            xi[axis] = self.axis_frequency(idx[axis]);
        }
        xi
    }

    /// Flat spectral index of a frequency vector, if it is represented.
    pub fn frequency_index(&self, xi: &[i64]) -> Option<usize> {
        let mut flat = 0;
        for &k in &xi[..self.dim] {
            flat = flat * self.n + self.axis_index(k)?;
        }
        Some(flat)
    }

    /// Coordinates of a flat physical index.
    pub fn point(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.unflatten(flat);
        let h = self.spacing();
        let mut x = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            x[axis] = idx[axis] as f64 * h;
        }
        x
    }

    /// Flat index of the point `a − b` (componentwise modulo `n`).
    pub fn difference(&self, a: usize, b: usize) -> usize {
        let ia = self.unflatten(a);
        let ib = self.unflatten(b);
        let mut out = [0; MAX_DIM];
        for axis in 0..self.dim {
            out[axis] = (ia[axis] + self.n - ib[axis]) % self.n;
        }
        self.flatten(&out)
    }

    /// `|ξ|²` for every flat spectral index.
    pub fn laplacian_symbol(&self) -> Vec<f64> {
        (0..self.len())
            .map(|flat| {
                self.frequency(flat)
                    .iter()
                    .map(|&k| (k * k) as f64)
                    .sum()
            })
            .collect()
    }

    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(LabError::GridMismatch(format!(
                "d={} n={} vs d={} n={}",
                self.dim, self.n, other.dim, other.n
            )));
        }
        Ok(())
    }
}

pub(crate) fn axis_frequency(n: usize, i: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// `max_j |ξ_j|`.
pub fn sup_norm(xi: &[i64]) -> i64 {
    xi.iter().map(|k| k.abs()).max().unwrap_or(0)
}

/// `⟨ξ⟩ = (1 + |ξ|²)^{1/2}`.
pub fn japanese_bracket(xi: &[i64]) -> f64 {
    (1.0 + xi.iter().map(|&k| (k * k) as f64).sum::<f64>()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(GridSpec::new(0, 8).is_err());
        assert!(GridSpec::new(4, 8).is_err());
        assert!(GridSpec::new(2, 7).is_err());
        assert!(GridSpec::new(1, 2).is_err());
        assert!(GridSpec::new(3, 16).is_ok());
    }

    #[test]
    fn frequency_ordering_covers_symmetric_range() {
        let g = GridSpec::new(1, 8).unwrap();
        let freqs: Vec<i64> = (0..8).map(|i| g.axis_frequency(i)).collect();
        assert_eq!(freqs, vec![0, 1, 2, 3, 4, -3, -2, -1]);
        for k in -3..=4 {
            assert_eq!(g.axis_frequency(g.axis_index(k).unwrap()), k);
        }
        assert_eq!(g.axis_index(-4), None);
    }

    #[test]
    fn flatten_roundtrip() {
        let g = GridSpec::new(3, 6).unwrap();
        for flat in 0..g.len() {
            assert_eq!(g.flatten(&g.unflatten(flat)), flat);
            assert_eq!(g.frequency_index(&g.frequency(flat)), Some(flat));
        }
    }

    #[test]
    fn difference_is_modular() {
        let g = GridSpec::new(2, 4).unwrap();
        let a = g.flatten(&[0, 3]);
        let b = g.flatten(&[1, 1]);
        assert_eq!(g.unflatten(g.difference(a, b))[..2], [3, 2]);
    }
}
