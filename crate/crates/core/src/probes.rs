//! Empirical constants for the dispersive and multilinear inequalities:
//! each probe returns the ratio of a left side to the inequality's right side
//! with the implicit constant set to one.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fft;
use crate::field::{Spectrum, TorusField};
use crate::grid::{japanese_bracket, sup_norm, GridSpec};
use crate::random::{random_power_law, random_shell, rng_for};
use crate::spectral::{
    cube_project, dyadic_project, gradient_norm, project_between, project_gt, project_leq,
    sobolev_norm, FrequencyCube,
};

/// Smallest even integer `≥ min` whose only prime factors are 2, 3 and 5.
pub fn smooth_size(min: usize) -> usize {
    let mut m = min.max(4);
    loop {
        if m.is_multiple_of(2) {
            let mut r = m;
            for p in [2, 3, 5] {
                while r.is_multiple_of(p) {
                    r /= p;
                }
            }
            if r == 1 {
                return m;
            }
        }
        m += 1;
    }
}

/// Trapezoidal nodes and weights on `[0, T]`.
fn time_nodes(total: f64, nt: usize) -> Vec<(f64, f64)> {
    let h = total / (nt - 1) as f64;
    (0..nt)
        .map(|i| {
            let w = if i == 0 || i + 1 == nt { h / 2.0 } else { h };
            (i as f64 * h, w)
        })
        .collect()
}

/// Free evolutions `e^{itΔ}f` sampled on a (possibly finer) evaluation grid.
struct FreeFlow {
    spec: Spectrum,
    symbol: Vec<f64>,
}

impl FreeFlow {
    fn new(f: &TorusField, eval_n: usize) -> Result<Self> {
        let target = GridSpec::new(f.grid().dim(), eval_n.max(f.grid().n()))?;
        let spec = f.spectrum().resample(target);
        Ok(Self {
            symbol: target.laplacian_symbol(),
            spec,
        })
    }

    fn grid(&self) -> GridSpec {
        self.spec.grid()
    }

    fn at(&self, t: f64) -> Vec<Complex64> {
        let grid = self.spec.grid();
        let mut v: Vec<Complex64> = self
            .spec
            .coeffs()
            .iter()
            .zip(&self.symbol)
            .map(|(c, k2)| c * Complex64::from_polar(1.0, -t * k2))
            .collect();
        fft::inverse(&mut v, grid.n(), grid.dim());
        v
    }
}

fn check_time(total: f64, nt: usize, min_nt: usize) -> Result<()> {
    if !(total > 0.0 && total.is_finite()) {
        return Err(LabError::param("T", format!("must be positive, got {total}")));
    }
    if nt < min_nt {
        return Err(LabError::param("nt", format!("need at least {min_nt} time nodes, got {nt}")));
    }
    Ok(())
}

fn require_3d(grid: GridSpec) -> Result<()> {
    if grid.dim() != 3 {
        return Err(LabError::param("d", "this inequality is stated on T^3"));
    }
    Ok(())
}

fn spacetime_lp(flow: &FreeFlow, p: f64, total: f64, nt: usize) -> f64 {
    let cell = flow.grid().cell_volume();
    let integral: f64 = time_nodes(total, nt)
        .into_iter()
        .map(|(t, w)| w * flow.at(t).iter().map(|v| v.norm().powf(p)).sum::<f64>() * cell)
        .sum();
    integral.powf(1.0 / p)
}

fn strichartz_core(projected: &TorusField, m: f64, p: f64, total: f64, nt: usize, band: f64) -> Result<f64> {
    let denom = m.powf(1.5 - 5.0 / p) * projected.l2_norm();
    if denom == 0.0 {
        return Ok(0.0);
    }
    let eval_n = smooth_size((p.ceil() * band) as usize + 2);
    let flow = FreeFlow::new(projected, eval_n)?;
    Ok(spacetime_lp(&flow, p, total, nt) / denom)
}

/// `‖P_{≤M} e^{itΔ} f‖_{L^p_{t,x}([0,T]×T³)} / (M^{3/2−5/p} ‖P_{≤M} f‖_{L²})`.
pub fn strichartz_ratio(f: &TorusField, m: f64, p: f64, total: f64, nt: usize) -> Result<f64> {
    require_3d(f.grid())?;
    if !(p > 10.0 / 3.0) {
        return Err(LabError::param("p", format!("must exceed 10/3, got {p}")));
    }
    if !(m > 0.0) {
        return Err(LabError::param("M", format!("must be positive, got {m}")));
    }
    check_time(total, nt, 32)?;
    let projected = project_leq(f, m);
    strichartz_core(&projected, m, p, total, nt, m.floor())
}

/// Strichartz ratio with `P_{≤M}` replaced by the cube projector `P_Q` of
/// radius `M`.
pub fn strichartz_ratio_cube(f: &TorusField, cube: &FrequencyCube, p: f64, total: f64, nt: usize) -> Result<f64> {
    require_3d(f.grid())?;
    if !(p > 10.0 / 3.0) {
        return Err(LabError::param("p", format!("must exceed 10/3, got {p}")));
    }
    check_time(total, nt, 32)?;
    let projected = cube_project(f, cube)?;
    let reach = cube.center.iter().map(|c| c.abs()).max().unwrap_or(0) as f64 + cube.radius.floor();
    let band = reach.max(cube.radius.floor());
    strichartz_core(&projected, cube.radius, p, total, nt, band)
}

/// `‖P_{M₁}e^{itΔ}f₁ · P_{M₂}e^{itΔ}f₂‖_{L²_{t,x}} /
/// (M₂^{1/2}(M₂/M₁ + 1/M₂)^δ ‖P_{M₁}f₁‖ ‖P_{M₂}f₂‖)`.
pub fn bilinear_strichartz_ratio(
    f1: &TorusField,
    f2: &TorusField,
    m1: f64,
    m2: f64,
    delta: f64,
    total: f64,
    nt: usize,
) -> Result<f64> {
    require_3d(f1.grid())?;
    f1.grid().ensure_same(&f2.grid())?;
    if m2 > m1 {
        return Err(LabError::param("M2", format!("must not exceed M1 = {m1}, got {m2}")));
    }
    if !(delta > 0.0 && delta <= 1.0 / 22.0) {
        return Err(LabError::param("delta", format!("must lie in (0, 1/22], got {delta}")));
    }
    check_time(total, nt, 2)?;
    let p1 = dyadic_project(f1, m1)?;
    let p2 = dyadic_project(f2, m2)?;
    let denom = m2.sqrt() * (m2 / m1 + 1.0 / m2).powf(delta) * p1.l2_norm() * p2.l2_norm();
    if denom == 0.0 {
        return Ok(0.0);
    }
    let eval_n = smooth_size(2 * (m1.floor() + m2.floor()) as usize + 2);
    let a = FreeFlow::new(&p1, eval_n)?;
    let b = FreeFlow::new(&p2, eval_n)?;
    let cell = a.grid().cell_volume();
    let integral: f64 = time_nodes(total, nt)
        .into_iter()
        .map(|(t, w)| {
            let (u, v) = (a.at(t), b.at(t));
            w * u.iter().zip(&v).map(|(x, y)| (x * y).norm_sqr()).sum::<f64>() * cell
        })
        .sum();
    Ok(integral.sqrt() / denom)
}

/// Which refined Sobolev inequality: `1, 2, 3` put `3, 2, 1` low factors
/// against `3, 4, 5` high factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SobolevVariant {
    ThreeLow = 1,
    TwoLow = 2,
    OneLow = 3,
}

impl SobolevVariant {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Self::ThreeLow),
            2 => Ok(Self::TwoLow),
            3 => Ok(Self::OneLow),
            _ => Err(LabError::param("which", format!("must be 1, 2 or 3, got {i}"))),
        }
    }

    fn low_factors(self) -> i32 {
        4 - self as i32
    }
}

/// `|∫ (P_Hφ)^{6−m} (P_Lφ)^m dx|` over the matching right side built from
/// `‖∇φ‖`, `‖∇φ_{M<•<R}‖`, `‖∇P_Hφ‖` and a power of `M/R`.
pub fn refined_sobolev_ratio(phi: &TorusField, m: f64, r: f64, which: SobolevVariant) -> Result<f64> {
    require_3d(phi.grid())?;
    if !(m > 0.0 && r >= m) {
        return Err(LabError::param("M,R", format!("need 0 < M <= R, got M={m}, R={r}")));
    }
    let low = project_leq(phi, m);
    let high = project_gt(phi, m);
    let mid = project_between(phi, m, r);
    let g = gradient_norm(phi);
    let gh = gradient_norm(&high);
    let gm = gradient_norm(&mid);
    let q = m / r;
    let rhs = match which {
        SobolevVariant::ThreeLow => g.powi(3) * (gm * gm * gh + q.powf(1.5) * gh.powi(3)),
        SobolevVariant::TwoLow => g.powi(2) * (gm * gm * gh * gh + q * gh.powi(4)),
        SobolevVariant::OneLow => g * (gm * gm * gh.powi(3) + q.sqrt() * gh.powi(5)),
    };
    if rhs == 0.0 {
        return Ok(0.0);
    }
    let band = phi.spectrum().support_radius(0.0) as usize;
    let eval_n = smooth_size(6 * band + 2);
    let low = low.resample(eval_n.max(phi.grid().n()))?;
    let high = high.resample(eval_n.max(phi.grid().n()))?;
    let ml = which.low_factors();
    let cell = low.grid().cell_volume();
    let lhs = low
        .values()
        .iter()
        .zip(high.values())
        .map(|(l, h)| h.powi(6 - ml) * l.powi(ml))
        .sum::<Complex64>()
        * cell;
    Ok(lhs.norm() / rhs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultilinearVariant {
    Mlfl1,
    Mlfl2,
    Old1,
    Old2,
}

impl MultilinearVariant {
    pub const ALL: [MultilinearVariant; 4] = [Self::Mlfl1, Self::Mlfl2, Self::Old1, Self::Old2];

    /// Regularity of the `L¹_T H^s_x` norm on the left.
    pub fn regularity(self) -> f64 {
        match self {
            Self::Mlfl1 | Self::Old1 => -1.0,
            Self::Mlfl2 | Self::Old2 => 1.0,
        }
    }

    pub fn uses_cutoff(self) -> bool {
        matches!(self, Self::Mlfl1 | Self::Mlfl2)
    }
}

/// `∫₀^T ‖Π_j e^{itΔ}f_j‖_{H^{±1}} dt` for both signs, by trapezoidal time
/// quadrature and an alias-free product grid.
fn quintic_time_norms(fs: &[TorusField], total: f64, nt: usize) -> Result<(f64, f64)> {
    let band = fs
        .iter()
        .map(|f| f.spectrum().support_radius(0.0))
        .max()
        .unwrap_or(0) as usize;
    let eval_n = smooth_size(10 * band + 2);
    let flows: Vec<FreeFlow> = fs.iter().map(|f| FreeFlow::new(f, eval_n)).collect::<Result<_>>()?;
    let grid = flows[0].grid();
    let d = grid.dim();
    let weights: Vec<f64> = (0..grid.len())
        .map(|i| japanese_bracket(&grid.frequency(i)[..d]).powi(2))
        .collect();
    let mut neg = 0.0;
    let mut pos = 0.0;
    for (t, w) in time_nodes(total, nt) {
        let mut prod = flows[0].at(t);
        for flow in &flows[1..] {
            for (p, v) in prod.iter_mut().zip(flow.at(t)) {
                *p *= v;
            }
        }
        fft::forward(&mut prod, grid.n(), d);
        let (mut sn, mut sp) = (0.0, 0.0);
        for (c, wt) in prod.iter().zip(&weights) {
            sn += c.norm_sqr() / wt;
            sp += c.norm_sqr() * wt;
        }
        neg += w * (sn * grid.volume()).sqrt();
        pos += w * (sp * grid.volume()).sqrt();
    }
    Ok((neg, pos))
}

fn multilinear_rhs(fs: &[TorusField], m0: f64, total: f64, variant: MultilinearVariant) -> f64 {
    let h1: Vec<f64> = fs.iter().map(|f| sobolev_norm(f, 1.0)).collect();
    let localized = |f: &TorusField, h: f64| {
        total.powf(5.0 / 22.0) * m0.powf(5.0 / 11.0) * h + sobolev_norm(&project_gt(f, m0), 1.0)
    };
    match variant {
        MultilinearVariant::Mlfl1 => {
            sobolev_norm(&fs[0], -1.0) * localized(&fs[1], h1[1]) * h1[2..].iter().product::<f64>()
        }
        MultilinearVariant::Mlfl2 => localized(&fs[0], h1[0]) * h1[1..].iter().product::<f64>(),
        MultilinearVariant::Old1 => sobolev_norm(&fs[0], -1.0) * h1[1..].iter().product::<f64>(),
        MultilinearVariant::Old2 => h1.iter().product(),
    }
}

fn check_quintuple(fs: &[TorusField]) -> Result<()> {
    if fs.len() != 5 {
        return Err(LabError::param("f", format!("need five fields, got {}", fs.len())));
    }
    require_3d(fs[0].grid())?;
    for f in &fs[1..] {
        fs[0].grid().ensure_same(&f.grid())?;
    }
    Ok(())
}

/// `‖Π_{j≤5} e^{itΔ}f_j‖_{L¹_T H^{±1}_x}` over the right side of the
/// chosen variant. `M₀` is ignored by the unlocalised variants.
pub fn multilinear_ratio(
    fs: &[TorusField],
    m0: f64,
    total: f64,
    nt: usize,
    variant: MultilinearVariant,
) -> Result<f64> {
    check_quintuple(fs)?;
    check_time(total, nt, 2)?;
    if !(m0 >= 0.0) {
        return Err(LabError::param("M0", format!("must be >= 0, got {m0}")));
    }
    let m0 = if variant.uses_cutoff() { m0 } else { 0.0 };
    let rhs = multilinear_rhs(fs, m0, total, variant);
    if rhs == 0.0 {
        return Ok(0.0);
    }
    let (neg, pos) = quintic_time_norms(fs, total, nt)?;
    let lhs = if variant.regularity() < 0.0 { neg } else { pos };
    Ok(lhs / rhs)
}

/// Rank-one test operator `J = |left⟩⟨right|`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOneKernel {
    pub left: TorusField,
    pub right: TorusField,
}

/// Smooth compactly supported bump `exp(−1/(1−|x|²))` on the unit ball.
fn bump(r2: f64) -> f64 {
    if r2 < 1.0 {
        (-1.0 / (1.0 - r2)).exp()
    } else {
        0.0
    }
}

/// `η_α`, the bump rescaled to radius `α`, with unit discrete mass.
pub fn mollifier(grid: GridSpec, alpha: f64) -> Result<TorusField> {
    if !(alpha >= 4.0 * grid.spacing()) {
        return Err(LabError::UnderResolved(format!(
            "alpha = {alpha} is below four grid spacings ({})",
            4.0 * grid.spacing()
        )));
    }
    if alpha >= std::f64::consts::PI {
        return Err(LabError::param("alpha", format!("must be below π, got {alpha}")));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let f = TorusField::from_fn(grid, |x| {
        let r2: f64 = x[..grid.dim()]
            .iter()
            .map(|&xi| {
                let y = if xi > std::f64::consts::PI { xi - two_pi } else { xi };
                (y / alpha).powi(2)
            })
            .sum();
        Complex64::new(bump(r2), 0.0)
    });
    let mass = f.integral().re;
    Ok(f.scaled(Complex64::new(1.0 / mass, 0.0)))
}

/// Periodic convolution `Σ_y a(x−y) b(y) dx^d` via transforms.
pub fn convolve(a: &TorusField, b: &TorusField) -> Result<TorusField> {
    let grid = a.grid();
    grid.ensure_same(&b.grid())?;
    let sa = a.spectrum();
    let sb = b.spectrum();
    let scale = grid.len() as f64 * grid.cell_volume();
    let coeffs = sa.coeffs().iter().zip(sb.coeffs()).map(|(x, y)| x * y * scale).collect();
    Ok(Spectrum::from_coeffs(grid, coeffs)?.to_field())
}

/// `|Tr J (ρ_α(x₁−x₂, x₁−x₃) − δδ) (|φ⟩⟨φ|)^{⊗3}|` with
/// `ρ_α(x, y) = η_α(x) η_α(y)`.
pub fn approx_identity_error(phi: &TorusField, kernel: &RankOneKernel, alpha: f64) -> Result<f64> {
    let grid = phi.grid();
    grid.ensure_same(&kernel.left.grid())?;
    grid.ensure_same(&kernel.right.grid())?;
    let eta = mollifier(grid, alpha)?;
    let density = phi.map(|v| Complex64::new(v.norm_sqr(), 0.0));
    let smoothed = convolve(&eta, &density)?;
    let cell = grid.cell_volume();
    let bracket: Complex64 = phi
        .values()
        .iter()
        .zip(smoothed.values())
        .zip(kernel.right.values())
        .map(|((p, s), b)| {
            let d = s.re * s.re - p.norm_sqr().powi(2);
            b.conj() * p * d
        })
        .sum::<Complex64>()
        * cell;
    let overlap = phi.inner(&kernel.left)?;
    Ok((overlap * bracket).norm())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxIdentityFit {
    pub alphas: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log α`.
    pub slope: f64,
}

pub fn approx_identity_rate(phi: &TorusField, kernel: &RankOneKernel, alphas: &[f64]) -> Result<ApproxIdentityFit> {
    if alphas.len() < 2 {
        return Err(LabError::param("alphas", "need at least two values"));
    }
    let errors: Vec<f64> = alphas
        .iter()
        .map(|&a| approx_identity_error(phi, kernel, a))
        .collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = alphas
        .iter()
        .zip(&errors)
        .filter(|(_, e)| **e > 0.0)
        .map(|(a, e)| (a.ln(), e.ln()))
        .collect();
    let slope = if pts.len() < 2 {
        0.0
    } else {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    };
    Ok(ApproxIdentityFit {
        alphas: alphas.to_vec(),
        errors,
        slope,
    })
}

/// Approximation-of-identity error over `α^{1/2} ‖left‖ ‖right‖ ‖φ‖_{H¹}^6`.
pub fn approx_identity_ratio(phi: &TorusField, kernel: &RankOneKernel, alpha: f64) -> Result<f64> {
    let err = approx_identity_error(phi, kernel, alpha)?;
    let rhs = alpha.sqrt() * kernel.left.l2_norm() * kernel.right.l2_norm() * sobolev_norm(phi, 1.0).powi(6);
    Ok(if rhs == 0.0 { 0.0 } else { err / rhs })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaId {
    Strichartz,
    Bilinear,
    RefinedSobolev,
    Multilinear,
    ApproxIdentity,
}

impl LemmaId {
    pub const ALL: [LemmaId; 5] = [
        Self::Strichartz,
        Self::Bilinear,
        Self::RefinedSobolev,
        Self::Multilinear,
        Self::ApproxIdentity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Strichartz => "strichartz",
            Self::Bilinear => "bilinear",
            Self::RefinedSobolev => "refined-sobolev",
            Self::Multilinear => "multilinear",
            Self::ApproxIdentity => "approx-identity",
        }
    }
}

/// Sampling schedule of one probe run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSettings {
    pub lemma: LemmaId,
    pub samples: usize,
    pub seed: u64,
    /// Points per axis of the sampling grid.
    pub n: usize,
    /// Time-quadrature nodes.
    pub nt: usize,
    /// Length of the time interval.
    pub time: f64,
    /// Strichartz exponent.
    pub exponent: f64,
    /// Bilinear gain exponent.
    pub delta: f64,
    /// `M` (Strichartz, refined Sobolev), `M₂` (bilinear) or `M₀` (multilinear).
    pub cutoffs: Vec<f64>,
    /// `R` (refined Sobolev) or `M₁` (bilinear).
    pub upper: Vec<f64>,
    /// Mollifier radii (approximation of identity).
    pub alphas: Vec<f64>,
}

impl ProbeSettings {
    pub fn default_for(lemma: LemmaId) -> Self {
        let base = Self {
            lemma,
            samples: 100,
            seed: 0,
            n: 16,
            nt: 64,
            time: 1.0,
            exponent: 4.0,
            delta: 0.02,
            cutoffs: vec![],
            upper: vec![],
            alphas: vec![],
        };
        match lemma {
            LemmaId::Strichartz => Self {
                cutoffs: vec![2.0, 4.0, 8.0],
                ..base
            },
            LemmaId::Bilinear => Self {
                samples: 40,
                n: 32,
                nt: 32,
                cutoffs: vec![2.0, 4.0],
                upper: vec![4.0, 8.0, 16.0],
                ..base
            },
            LemmaId::RefinedSobolev => Self {
                samples: 200,
                cutoffs: vec![2.0, 4.0],
                upper: vec![8.0],
                ..base
            },
            LemmaId::Multilinear => Self {
                samples: 50,
                n: 8,
                cutoffs: vec![1.0, 2.0],
                ..base
            },
            LemmaId::ApproxIdentity => Self {
                samples: 40,
                n: 512,
                alphas: vec![0.25, 0.125, 0.0625],
                ..base
            },
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(LabError::param("samples", "need at least two samples"));
        }
        let needs = |v: &Vec<f64>, name: &'static str| {
            if v.is_empty() || v.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                Err(LabError::param(name, "must be a nonempty list of positive numbers"))
            } else {
                Ok(())
            }
        };
        match self.lemma {
            LemmaId::Strichartz => needs(&self.cutoffs, "cutoffs"),
            LemmaId::Bilinear | LemmaId::RefinedSobolev => {
                needs(&self.cutoffs, "cutoffs")?;
                needs(&self.upper, "upper")
            }
            LemmaId::Multilinear => {
                if self.cutoffs.iter().any(|x| !(*x >= 0.0)) {
                    return Err(LabError::param("cutoffs", "must be >= 0"));
                }
                Ok(())
            }
            LemmaId::ApproxIdentity => needs(&self.alphas, "alphas"),
        }
    }

    /// Parameter tuples swept by the run, in report order.
    pub fn parameter_grid(&self) -> Vec<BTreeMap<String, f64>> {
        let tuple = |pairs: &[(&str, f64)]| -> BTreeMap<String, f64> {
            pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
        };
        match self.lemma {
            LemmaId::Strichartz => self
                .cutoffs
                .iter()
                .map(|&m| tuple(&[("M", m), ("p", self.exponent), ("T", self.time)]))
                .collect(),
            LemmaId::Bilinear => {
                let mut out = Vec::new();
                for &m2 in &self.cutoffs {
                    for &m1 in self.upper.iter().filter(|&&m1| m1 >= m2) {
                        out.push(tuple(&[("M1", m1), ("M2", m2), ("delta", self.delta), ("T", self.time)]));
                    }
                }
                out
            }
            LemmaId::RefinedSobolev => {
                let mut out = Vec::new();
                for &m in &self.cutoffs {
                    for &r in self.upper.iter().filter(|&&r| r >= m) {
                        for which in 1..=3 {
                            out.push(tuple(&[("M", m), ("R", r), ("which", which as f64)]));
                        }
                    }
                }
                out
            }
            LemmaId::Multilinear => {
                let mut out = Vec::new();
                for (code, v) in MultilinearVariant::ALL.iter().enumerate() {
                    if v.uses_cutoff() {
                        for &m0 in &self.cutoffs {
                            out.push(tuple(&[("variant", code as f64 + 1.0), ("M0", m0), ("T", self.time)]));
                        }
                    } else {
                        out.push(tuple(&[("variant", code as f64 + 1.0), ("M0", 0.0), ("T", self.time)]));
                    }
                }
                out
            }
            LemmaId::ApproxIdentity => self.alphas.iter().map(|&a| tuple(&[("alpha", a)])).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub params: BTreeMap<String, f64>,
    pub max_ratio: f64,
    /// Maximum over the first half of the samples.
    pub half_max_ratio: f64,
    pub growth: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub lemma_id: LemmaId,
    pub samples: usize,
    pub seed: u64,
    pub parameter_grid: Vec<BTreeMap<String, f64>>,
    pub ratio_table: Vec<RatioRow>,
    pub max_ratio: f64,
    /// Every row grew by less than [`STABILITY_GROWTH`] from half to full.
    pub stable: bool,
    /// Lemma-specific extras (e.g. fitted slopes).
    pub summary: BTreeMap<String, f64>,
}

/// Largest tolerated growth of a running maximum from half to full sample.
pub const STABILITY_GROWTH: f64 = 1.5;

fn grid3(n: usize) -> Result<GridSpec> {
    GridSpec::new(3, n)
}

/// Ratios of one sample for every tuple, plus optional per-sample extras.
fn sample_ratios(settings: &ProbeSettings, tuples: &[BTreeMap<String, f64>], index: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rng = rng_for(settings.seed, index as u64);
    let flat = |g: GridSpec, band: f64, rng: &mut rand_chacha::ChaCha8Rng| {
        let f = random_shell(g, -1.0, band, |_| 1.0, rng);
        f.normalized().unwrap_or(f)
    };
    match settings.lemma {
        LemmaId::Strichartz => {
            let g = grid3(settings.n)?;
            let f = flat(g, g.nyquist() as f64, &mut rng);
            let ratios = tuples
                .iter()
                .map(|t| strichartz_ratio(&f, t["M"], settings.exponent, settings.time, settings.nt))
                .collect::<Result<_>>()?;
            Ok((ratios, vec![]))
        }
        LemmaId::Bilinear => {
            let g = grid3(settings.n)?;
            let f1 = flat(g, g.nyquist() as f64, &mut rng);
            let f2 = flat(g, g.nyquist() as f64, &mut rng);
            let ratios = tuples
                .iter()
                .map(|t| bilinear_strichartz_ratio(&f1, &f2, t["M1"], t["M2"], settings.delta, settings.time, settings.nt))
                .collect::<Result<_>>()?;
            Ok((ratios, vec![]))
        }
        LemmaId::RefinedSobolev => {
            let g = grid3(settings.n)?;
            let phi = random_power_law(g, g.nyquist() as f64, 2.0, &mut rng);
            let ratios = tuples
                .iter()
                .map(|t| {
                    refined_sobolev_ratio(&phi, t["M"], t["R"], SobolevVariant::from_index(t["which"] as u8)?)
                })
                .collect::<Result<_>>()?;
            Ok((ratios, vec![]))
        }
        LemmaId::Multilinear => {
            let g = grid3(settings.n)?;
            let band = (settings.n / 4) as f64;
            let fs: Vec<TorusField> = (0..5).map(|_| flat(g, band, &mut rng)).collect();
            let (neg, pos) = quintic_time_norms(&fs, settings.time, settings.nt)?;
            let ratios = tuples
                .iter()
                .map(|t| {
                    let v = MultilinearVariant::ALL[t["variant"] as usize - 1];
                    let rhs = multilinear_rhs(&fs, t["M0"], settings.time, v);
                    let lhs = if v.regularity() < 0.0 { neg } else { pos };
                    if rhs == 0.0 { 0.0 } else { lhs / rhs }
                })
                .collect();
            Ok((ratios, vec![]))
        }
        LemmaId::ApproxIdentity => {
            let g = GridSpec::new(1, settings.n)?;
            let phi = flat(g, 4.0, &mut rng);
            let left = flat(g, 4.0, &mut rng);
            let right = flat(g, 4.0, &mut rng);
            let kernel = RankOneKernel { left, right };
            let ratios = tuples
                .iter()
                .map(|t| approx_identity_ratio(&phi, &kernel, t["alpha"]))
                .collect::<Result<_>>()?;
            let fit = approx_identity_rate(&phi, &kernel, &settings.alphas)?;
            Ok((ratios, vec![fit.slope]))
        }
    }
}

/// Samples the chosen inequality and reports running maxima per tuple.
pub fn run_probe(settings: &ProbeSettings) -> Result<ProbeReport> {
    settings.validate()?;
    let tuples = settings.parameter_grid();
    let per_sample: Vec<(Vec<f64>, Vec<f64>)> = (0..settings.samples)
        .into_par_iter()
        .map(|i| sample_ratios(settings, &tuples, i))
        .collect::<Result<_>>()?;
    let half = settings.samples.div_ceil(2);
    let mut table = Vec::with_capacity(tuples.len());
    for (j, params) in tuples.iter().enumerate() {
        let col: Vec<f64> = per_sample.iter().map(|(r, _)| r[j]).collect();
        let max_ratio = col.iter().cloned().fold(0.0, f64::max);
        let half_max_ratio = col[..half].iter().cloned().fold(0.0, f64::max);
        let growth = if half_max_ratio > 0.0 {
            max_ratio / half_max_ratio
        } else if max_ratio == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
        table.push(RatioRow {
            params: params.clone(),
            max_ratio,
            half_max_ratio,
            growth,
        });
    }
    let max_ratio = table.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    let stable = table.iter().all(|r| r.growth < STABILITY_GROWTH && r.max_ratio.is_finite());
    let mut summary = BTreeMap::new();
    if settings.lemma == LemmaId::ApproxIdentity {
        let slopes: Vec<f64> = per_sample.iter().map(|(_, e)| e[0]).collect();
        summary.insert("min_slope".into(), slopes.iter().cloned().fold(f64::INFINITY, f64::min));
        summary.insert("mean_slope".into(), slopes.iter().sum::<f64>() / slopes.len() as f64);
    }
    Ok(ProbeReport {
        lemma_id: settings.lemma,
        samples: settings.samples,
        seed: settings.seed,
        parameter_grid: tuples,
        ratio_table: table,
        max_ratio,
        stable,
        summary,
    })
}

/// Draws `f` with Gaussian coefficients in `M/2 < |ξ|_∞ ≤ M`, for tests and
/// benchmarks.
pub fn random_in_band(grid: GridSpec, m: f64, rng: &mut impl Rng) -> TorusField {
    random_shell(grid, m / 2.0, m, |_| 1.0, rng)
}

/// Largest `|ξ|_∞` of a field's support.
pub fn band_of(f: &TorusField) -> i64 {
    let spec = f.spectrum();
    (0..spec.coeffs().len())
        .filter(|&i| spec.coeffs()[i].norm() > 0.0)
        .map(|i| sup_norm(&spec.grid().frequency(i)))
        .max()
        .unwrap_or(0)
}
