//! Sharp frequency projectors, Sobolev weights, Dirichlet kernels and
//! Bernstein ratios on periodic grids.
//!
//! All cutoffs use the `∞`-ball geometry: a frequency `ξ` lies in the ball of
//! radius `M` when `|ξ_j| ≤ M` for every component.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::TorusField;
use crate::grid::{japanese_bracket, sup_norm, GridSpec, MAX_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BandMode {
    /// Frequencies with `|ξ|_∞ ≤ M`.
    Leq,
    /// Frequencies with `|ξ|_∞ > M`.
    Gt,
    /// Frequencies with `M/2 < |ξ|_∞ ≤ M`.
    Band,
}

/// Sharp Fourier-support selector of a ball, its complement or a dyadic shell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicBand {
    pub cutoff: f64,
    pub mode: BandMode,
}

impl DyadicBand {
    pub fn new(cutoff: f64, mode: BandMode) -> Result<Self> {
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(LabError::param("cutoff", format!("must be positive, got {cutoff}")));
        }
        if mode == BandMode::Band && cutoff < 2.0 {
            return Err(LabError::param(
                "cutoff",
                format!("dyadic shells need M >= 2, got {cutoff}"),
            ));
        }
        Ok(Self { cutoff, mode })
    }

    pub fn contains(&self, xi: &[i64]) -> bool {
        let r = sup_norm(xi) as f64;
        match self.mode {
            BandMode::Leq => r <= self.cutoff,
            BandMode::Gt => r > self.cutoff,
            BandMode::Band => r <= self.cutoff && r > self.cutoff / 2.0,
        }
    }

    pub fn apply(&self, f: &TorusField) -> TorusField {
        mask(f, |xi| self.contains(xi))
    }
}

/// Axis-aligned cube `{ξ : |ξ_j − center_j| ≤ radius}` in frequency space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyCube {
    pub center: Vec<i64>,
    pub radius: f64,
}

impl FrequencyCube {
    pub fn new(center: Vec<i64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(LabError::param("radius", format!("must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, xi: &[i64]) -> bool {
        xi.iter()
            .zip(&self.center)
            .all(|(k, c)| ((k - c).abs() as f64) <= self.radius)
    }
}

fn mask(f: &TorusField, keep: impl Fn(&[i64]) -> bool) -> TorusField {
    let grid = f.grid();
    let d = grid.dim();
    let mut spec = f.spectrum();
    spec.apply_real(|xi| if keep(&xi[..d]) { 1.0 } else { 0.0 });
    spec.to_field()
}

/// `P_{≤M}`.
pub fn project_leq(f: &TorusField, m: f64) -> TorusField {
    mask(f, |xi| sup_norm(xi) as f64 <= m)
}

/// `P_{>M} = 1 − P_{≤M}`.
pub fn project_gt(f: &TorusField, m: f64) -> TorusField {
    mask(f, |xi| sup_norm(xi) as f64 > m)
}

/// `P_{<R}`, the strict ball.
pub fn project_lt(f: &TorusField, r: f64) -> TorusField {
    mask(f, |xi| (sup_norm(xi) as f64) < r)
}

/// `P_{M<•<R} = P_{<R} P_{>M}`.
pub fn project_between(f: &TorusField, m: f64, r: f64) -> TorusField {
    mask(f, |xi| {
        let s = sup_norm(xi) as f64;
        s > m && s < r
    })
}

/// `P_M = P_{≤M} − P_{≤M/2}` for `M ≥ 2`.
pub fn dyadic_project(f: &TorusField, m: f64) -> Result<TorusField> {
    Ok(DyadicBand::new(m, BandMode::Band)?.apply(f))
}

pub fn cube_project(f: &TorusField, cube: &FrequencyCube) -> Result<TorusField> {
    let d = f.grid().dim();
    if cube.center.len() != d {
        return Err(LabError::param(
            "center",
            format!("expected {d} components, got {}", cube.center.len()),
        ));
    }
    Ok(mask(f, |xi| cube.contains(xi)))
}

/// Multiplies by `e^{iξ₀·x}`.
pub fn modulate(f: &TorusField, xi0: &[i64]) -> TorusField {
    let grid = f.grid();
    let d = grid.dim();
    let mut out = f.clone();
    for (flat, v) in out.values_mut().iter_mut().enumerate() {
        let x = grid.point(flat);
        let phase: f64 = (0..d).map(|j| xi0[j] as f64 * x[j]).sum();
        *v *= Complex64::from_polar(1.0, phase);
    }
    out
}

/// `K_M(x) = Π_j Σ_{|ξ_j| ≤ M} e^{i x_j ξ_j}` sampled by direct summation.
/// At `M = n/2` both `±n/2` alias to the Nyquist mode, so convolution with
/// the kernel reproduces `P_{≤M}` only for `M < n/2`.
pub fn dirichlet_kernel(grid: GridSpec, m: f64) -> Result<TorusField> {
    if !(m > 0.0) || m > grid.nyquist() as f64 {
        return Err(LabError::param(
            "M",
            format!("must lie in (0, {}], got {m}", grid.nyquist()),
        ));
    }
    let mi = m.floor() as i64;
    let n = grid.n();
    let h = grid.spacing();
    let axis: Vec<f64> = (0..n)
        .map(|i| {
            let x = i as f64 * h;
            (-mi..=mi).map(|k| (k as f64 * x).cos()).sum()
        })
        .collect();
    let d = grid.dim();
    TorusField::from_values(
        grid,
        (0..grid.len())
            .map(|flat| {
                let idx = grid.unflatten(flat);
                Complex64::new(idx[..d].iter().map(|&i| axis[i]).product(), 0.0)
            })
            .collect(),
    )
}

/// One-dimensional closed form `sin((M+½)x) / sin(x/2)` with its limit at 0.
pub fn dirichlet_closed_form(x: f64, m: u32) -> f64 {
    let s = (x / 2.0).sin();
    if s.abs() < 1e-12 {
        return (2 * m + 1) as f64;
    }
    ((m as f64 + 0.5) * x).sin() / s
}

/// One-dimensional form `sin((M+1)x) / sin(x)`, which differs from the direct sum.
pub fn dirichlet_shifted_form(x: f64, m: u32) -> f64 {
    let s = x.sin();
    if s.abs() < 1e-12 {
        return (m + 1) as f64;
    }
    ((m as f64 + 1.0) * x).sin() / s
}

/// Periodic convolution `(2π)^{−d} ∫ K(x−y) f(y) dy` by direct quadrature.
pub fn convolve_direct(kernel: &TorusField, f: &TorusField) -> Result<TorusField> {
    let grid = f.grid();
    grid.ensure_same(&kernel.grid())?;
    let w = 1.0 / grid.len() as f64;
    let k = kernel.values();
    let fv = f.values();
    let values = (0..grid.len())
        .map(|x| {
            (0..grid.len())
                .map(|y| k[grid.difference(x, y)] * fv[y])
                .sum::<Complex64>()
                * w
        })
        .collect();
    TorusField::from_values(grid, values)
}

/// `((2π)^d Σ_ξ (1+|ξ|²)^s |f̂(ξ)|²)^{1/2}`.
pub fn sobolev_norm(f: &TorusField, s: f64) -> f64 {
    let d = f.grid().dim();
    f.spectrum()
        .weighted_mass(|xi| japanese_bracket(&xi[..d]).powf(2.0 * s))
        .sqrt()
}

/// `‖∇f‖_{L²}`.
pub fn gradient_norm(f: &TorusField) -> f64 {
    f.spectrum()
        .weighted_mass(|xi| xi.iter().map(|&k| (k * k) as f64).sum())
        .sqrt()
}

/// Multiplies coefficients by `⟨ξ⟩^s`.
pub fn apply_s(f: &TorusField, s: f64) -> TorusField {
    let d = f.grid().dim();
    let mut spec = f.spectrum();
    spec.apply_real(|xi| japanese_bracket(&xi[..d]).powf(s));
    spec.to_field()
}

/// Multiplies coefficients by `|ξ|^s`; the zero mode is annihilated for `s > 0`.
pub fn apply_r(f: &TorusField, s: f64) -> TorusField {
    let mut spec = f.spectrum();
    spec.apply_real(|xi| homogeneous_weight(xi, s));
    spec.to_field()
}

fn homogeneous_weight(xi: &[i64; MAX_DIM], s: f64) -> f64 {
    let r2: f64 = xi.iter().map(|&k| (k * k) as f64).sum();
    if r2 == 0.0 {
        if s > 0.0 {
            0.0
        } else if s == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        r2.powf(s / 2.0)
    }
}

/// Gradient components `∂_j f`, one field per axis.
pub fn gradient(f: &TorusField) -> Vec<TorusField> {
    let spec = f.spectrum();
    (0..f.grid().dim())
        .map(|axis| {
            let mut s = spec.clone();
            s.apply(|xi| Complex64::new(0.0, xi[axis] as f64));
            s.to_field()
        })
        .collect()
}

/// `‖P_{≤M} f‖_{L^q} / (M^{d(1/p − 1/q)} ‖f‖_{L^p})`; zero for a zero field.
pub fn bernstein_ratio(f: &TorusField, m: f64, p: f64, q: f64) -> Result<f64> {
    if !(p >= 1.0) || !(q >= p) {
        return Err(LabError::param("p,q", format!("need 1 <= p <= q, got p={p}, q={q}")));
    }
    if !(m > 0.0) {
        return Err(LabError::param("M", format!("must be positive, got {m}")));
    }
    let denom_norm = f.lp_norm(p);
    if denom_norm == 0.0 {
        return Ok(0.0);
    }
    let d = f.grid().dim() as f64;
    let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
    let num = project_leq(f, m).lp_norm(q);
    Ok(num / (m.powf(d * (1.0 / p - inv_q)) * denom_norm))
}
