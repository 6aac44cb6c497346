use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::fft;
use crate::grid::{GridSpec, MAX_DIM};

/// Complex field sampled on a [`GridSpec`], stored in physical space.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

/// Fourier coefficients of a field in transform order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl TorusField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn constant(grid: GridSpec, value: Complex64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every grid point. Unused coordinates are zero.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64; MAX_DIM]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self { grid, values }
    }

    /// `amplitude · e^{iξ·x}`.
    pub fn plane_wave(grid: GridSpec, xi: &[i64], amplitude: Complex64) -> Result<Self> {
        let flat = grid
            .frequency_index(xi)
            .ok_or_else(|| LabError::param("xi", format!("{xi:?} is not represented")))?;
        let mut spec = Spectrum::zeros(grid);
        spec.coeffs[flat] = amplitude;
        Ok(spec.to_field())
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn spectrum(&self) -> Spectrum {
        let mut coeffs = self.values.clone();
        fft::forward(&mut coeffs, self.grid.n(), self.grid.dim());
        Spectrum {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise product.
    pub fn pointwise(&self, other: &TorusField) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// `∫ f dx` by the trapezoidal (spectrally exact) rule.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.cell_volume()
    }

    /// `⟨self, other⟩ = ∫ conj(self) · other dx`.
    pub fn inner(&self, other: &TorusField) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.cell_volume())
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    /// `‖f‖_{L^p}` by grid quadrature; `p = ∞` gives the maximum modulus.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm(&self.values, self.grid.cell_volume(), p)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        self.map(|v| v * s)
    }

    /// Rescales to unit `L²` norm.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.l2_norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(LabError::param("field", "cannot normalise a zero field"));
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    /// Spectral interpolation onto a grid with `n` points per axis. Modes that
    /// the target grid cannot represent are dropped.
    pub fn resample(&self, n: usize) -> Result<Self> {
        if n == self.grid.n() {
            return Ok(self.clone());
        }
        let target = GridSpec::new(self.grid.dim(), n)?;
        Ok(self.spectrum().resample(target).to_field())
    }
}

pub(crate) fn lp_norm(values: &[Complex64], cell: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    }
    let max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let sum: f64 = values.iter().map(|v| (v.norm() / max).powf(p)).sum();
    max * (sum * cell).powf(1.0 / p)
}

impl Add for &TorusField {
    type Output = TorusField;

    fn add(self, rhs: &TorusField) -> TorusField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        TorusField {
            grid: self.grid,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &TorusField {
    type Output = TorusField;

    fn sub(self, rhs: &TorusField) -> TorusField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        TorusField {
            grid: self.grid,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<Complex64> for &TorusField {
    type Output = TorusField;

    fn mul(self, rhs: Complex64) -> TorusField {
        self.scaled(rhs)
    }
}

impl Spectrum {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(LabError::GridMismatch(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, xi: &[i64]) -> Option<Complex64> {
        self.grid.frequency_index(xi).map(|i| self.coeffs[i])
    }

    pub fn to_field(&self) -> TorusField {
        let mut values = self.coeffs.clone();
        fft::inverse(&mut values, self.grid.n(), self.grid.dim());
        TorusField {
            grid: self.grid,
            values,
        }
    }

    /// Multiplies each coefficient by `symbol(ξ)`.
    pub fn apply(&mut self, symbol: impl Fn(&[i64; MAX_DIM]) -> Complex64) {
        for (flat, c) in self.coeffs.iter_mut().enumerate() {
            *c *= symbol(&self.grid.frequency(flat));
        }
    }

    /// Multiplies each coefficient by a real `weight(ξ)`.
    pub fn apply_real(&mut self, weight: impl Fn(&[i64; MAX_DIM]) -> f64) {
        for (flat, c) in self.coeffs.iter_mut().enumerate() {
            *c *= weight(&self.grid.frequency(flat));
        }
    }

    /// `(2π)^d Σ_ξ w(ξ) |f̂(ξ)|²`, the Parseval form of a weighted `L²` norm
    /// squared.
    pub fn weighted_mass(&self, weight: impl Fn(&[i64; MAX_DIM]) -> f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(flat, c)| weight(&self.grid.frequency(flat)) * c.norm_sqr())
            .sum::<f64>()
            * self.grid.volume()
    }

    /// Copies coefficients onto another grid of the same dimension.
    pub fn resample(&self, target: GridSpec) -> Spectrum {
        let mut out = Spectrum::zeros(target);
        for (flat, c) in self.coeffs.iter().enumerate() {
            if let Some(j) = target.frequency_index(&self.grid.frequency(flat)) {
                out.coeffs[j] = *c;
            }
        }
        out
    }

    /// Largest `|ξ_j|` carrying a coefficient above `tol` times the peak.
    pub fn support_radius(&self, tol: f64) -> i64 {
        let peak = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0;
        }
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > tol * peak)
            .map(|(flat, _)| crate::grid::sup_norm(&self.grid.frequency(flat)[..self.grid.dim()]))
            .max()
            .unwrap_or(0)
    }
}
