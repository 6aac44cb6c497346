//! Exact dynamics of `N` bosons on `T^d` with a rescaled three-body
//! interaction:
//!
//! `H_N = Σ_j (−Δ_{x_j}) + N^{−2} Σ_{i<j<l} U(x_i, x_j, x_l)`,
//!
//! where `U` is the permutation-symmetric form of
//! `W(x_i − x_j, x_i − x_l)` and `W` is the periodised rescaling of the
//! profile `V`.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fft;
use crate::field::TorusField;
use crate::grid::{GridSpec, MAX_DIM};
use crate::krylov::{expm_apply, KrylovOptions, KrylovReport};

/// Largest dense state, in complex amplitudes.
pub const STATE_BUDGET: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum PotentialProfile {
    /// `V(x,y) ∝ exp(−(|x|²+|y|²)/2σ²)` on `|x|, |y| ≤ 3σ`, scaled so the
    /// discrete integral of the rescaled table equals `mass`.
    TruncatedGaussian { sigma: f64, mass: f64 },
    /// `W ≡ value` on the torus, independent of `N` and `β`.
    Constant { value: f64 },
    Zero,
}

impl Default for PotentialProfile {
    fn default() -> Self {
        PotentialProfile::TruncatedGaussian {
            sigma: 0.5,
            mass: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManyBodyConfig {
    pub grid: GridSpec,
    pub particles: usize,
    pub beta: f64,
    pub potential: PotentialProfile,
}

impl ManyBodyConfig {
    pub fn new(grid: GridSpec, particles: usize, beta: f64, potential: PotentialProfile) -> Result<Self> {
        if particles == 0 {
            return Err(LabError::param("N", "need at least one particle"));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(LabError::param("beta", format!("must be >= 0, got {beta}")));
        }
        match potential {
            PotentialProfile::TruncatedGaussian { sigma, mass } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(LabError::param("sigma", format!("must be positive, got {sigma}")));
                }
                if !(mass >= 0.0 && mass.is_finite()) {
                    return Err(LabError::param("mass", format!("must be >= 0, got {mass}")));
                }
            }
            PotentialProfile::Constant { value } => {
                if !(value >= 0.0 && value.is_finite()) {
                    return Err(LabError::param("value", format!("must be >= 0, got {value}")));
                }
            }
            PotentialProfile::Zero => {}
        }
        let entries = (grid.len() as u128).pow(particles as u32);
        if entries > STATE_BUDGET as u128 {
            return Err(LabError::MemoryBudget {
                entries,
                budget: STATE_BUDGET,
            });
        }
        Ok(Self {
            grid,
            particles,
            beta,
            potential,
        })
    }

    /// Amplitudes in a state, `(n^d)^N`.
    pub fn state_len(&self) -> usize {
        self.grid.len().pow(self.particles as u32)
    }
}

/// Rescaled periodised pair table `W(a, b)` on relative coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PairPotential {
    grid: GridSpec,
    values: Vec<f64>,
}

impl PairPotential {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// `W(a, b)` for flat relative-coordinate indices.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.grid.len() + b]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `∫∫ W da db` by grid quadrature; this is the coupling `b₀`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume().powi(2)
    }
}

/// Periodisation of `x ↦ g(s·x)` on one grid, with `g` the radial truncated
/// Gaussian of width `sigma` and support radius `3σ`.
fn periodised_bump(grid: GridSpec, sigma: f64, s: f64) -> Vec<f64> {
    let radius = 3.0 * sigma / s;
    let two_pi = 2.0 * std::f64::consts::PI;
    let reach = (radius / two_pi).ceil() as i64 + 1;
    let d = grid.dim();
    (0..grid.len())
        .map(|flat| {
            let x = grid.point(flat);
            let mut total = 0.0;
            let mut shift = [-reach; MAX_DIM];
            loop {
                let r2: f64 = (0..d)
                    .map(|j| {
                        let y = s * (x[j] + two_pi * shift[j] as f64);
                        y * y
                    })
                    .sum();
                if r2 <= (3.0 * sigma).powi(2) {
                    total += (-r2 / (2.0 * sigma * sigma)).exp();
                }
                let mut axis = 0;
                loop {
                    if axis == d {
                        return total;
                    }
                    shift[axis] += 1;
                    if shift[axis] <= reach {
                        break;
                    }
                    shift[axis] = -reach;
                    axis += 1;
                }
            }
        })
        .collect()
}

/// Tabulates `W(a,b) = N^{2dβ} Σ_{m,m'} V(N^β(a+2πm), N^β(b+2πm'))`.
pub fn build_potential(cfg: &ManyBodyConfig) -> Result<PairPotential> {
    let grid = cfg.grid;
    let len = grid.len();
    let values = match cfg.potential {
        PotentialProfile::Zero => vec![0.0; len * len],
        PotentialProfile::Constant { value } => vec![value; len * len],
        PotentialProfile::TruncatedGaussian { sigma, mass } => {
            let s = (cfg.particles as f64).powf(cfg.beta);
            let support = 3.0 * sigma / s;
            if support < grid.spacing() / 2.0 {
                return Err(LabError::UnderResolved(format!(
                    "rescaled support radius {support:.3e} is below half the grid spacing {:.3e}",
                    grid.spacing() / 2.0
                )));
            }
            let bump = periodised_bump(grid, sigma, s);
            let mass_1d: f64 = bump.iter().sum::<f64>() * grid.cell_volume();
            let scale = mass / (mass_1d * mass_1d);
            let mut values = Vec::with_capacity(len * len);
            for a in &bump {
                for b in &bump {
                    values.push(scale * a * b);
                }
            }
            values
        }
    };
    Ok(PairPotential { grid, values })
}

/// A configured system: pair table, symmetric three-body diagonal and
/// kinetic symbol, ready for repeated Hamiltonian applications.
#[derive(Clone, Debug)]
pub struct ManyBodySystem {
    cfg: ManyBodyConfig,
    pair: PairPotential,
    differences: Vec<u32>,
    kinetic: Vec<f64>,
    potential: Vec<f64>,
}

impl ManyBodySystem {
    pub fn new(cfg: ManyBodyConfig) -> Result<Self> {
        let pair = build_potential(&cfg)?;
        let grid = cfg.grid;
        let len = grid.len();
        let differences: Vec<u32> = (0..len * len)
            .map(|ab| grid.difference(ab / len, ab % len) as u32)
            .collect();
        let axes = cfg.particles * grid.dim();
        let n = grid.n();
        let axis_sq: Vec<f64> = (0..n).map(|i| (grid.axis_frequency(i).pow(2)) as f64).collect();
        let total = cfg.state_len();
        let kinetic: Vec<f64> = (0..total)
            .into_par_iter()
            .map(|mut flat| {
                let mut acc = 0.0;
                for _ in 0..axes {
                    acc += axis_sq[flat % n];
                    flat /= n;
                }
                acc
            })
            .collect();
        let mut system = Self {
            cfg,
            pair,
            differences,
            kinetic,
            potential: Vec::new(),
        };
        system.potential = system.potential_diagonal();
        Ok(system)
    }

    pub fn config(&self) -> &ManyBodyConfig {
        &self.cfg
    }

    pub fn pair(&self) -> &PairPotential {
        &self.pair
    }

    pub fn b0(&self) -> f64 {
        self.pair.integral()
    }

    /// Mean-field coupling `b₀/2` of the quintic equation matching this
    /// Hamiltonian: the energy per particle of `φ^{⊗N}` tends to
    /// `∫|∇φ|² + (b₀/6)∫|φ|⁶`.
    pub fn mean_field_coupling(&self) -> f64 {
        self.b0() / 2.0
    }

    fn diff(&self, a: usize, b: usize) -> usize {
        self.differences[a * self.cfg.grid.len() + b] as usize
    }

    /// Symmetric three-body interaction `U(a, b, c)` on absolute positions.
    pub fn three_body(&self, a: usize, b: usize, c: usize) -> f64 {
        (self.pair.get(self.diff(a, b), self.diff(a, c))
            + self.pair.get(self.diff(b, a), self.diff(b, c))
            + self.pair.get(self.diff(c, a), self.diff(c, b)))
            / 3.0
    }

    fn potential_diagonal(&self) -> Vec<f64> {
        let n_particles = self.cfg.particles;
        let len = self.cfg.grid.len();
        let total = self.cfg.state_len();
        if n_particles < 3 || matches!(self.cfg.potential, PotentialProfile::Zero) {
            return vec![0.0; total];
        }
        let prefactor = 1.0 / (n_particles * n_particles) as f64;
        (0..total)
            .into_par_iter()
            .map(|flat| {
                let slots = unflatten_slots(flat, len, n_particles);
                let mut acc = 0.0;
                for i in 0..n_particles {
                    for j in i + 1..n_particles {
                        for l in j + 1..n_particles {
                            acc += self.three_body(slots[i], slots[j], slots[l]);
                        }
                    }
                }
                acc * prefactor
            })
            .collect()
    }

    pub fn potential_values(&self) -> &[f64] {
        &self.potential
    }

    /// Upper bound on the spectral radius of `H`.
    pub fn norm_bound(&self) -> f64 {
        let k = self.kinetic.iter().cloned().fold(0.0, f64::max);
        let v = self.potential.iter().cloned().fold(0.0, f64::max);
        k + v
    }

    fn fft_shape(&self) -> (usize, usize) {
        (self.cfg.grid.n(), self.cfg.particles * self.cfg.grid.dim())
    }

    /// `out = H x` on raw amplitude vectors.
    pub fn apply_raw(&self, x: &[Complex64], out: &mut [Complex64]) {
        let (n, axes) = self.fft_shape();
        out.copy_from_slice(x);
        fft::forward(out, n, axes);
        out.par_iter_mut()
            .zip(self.kinetic.par_iter())
            .for_each(|(o, k)| *o *= k);
        fft::inverse(out, n, axes);
        out.par_iter_mut()
            .zip(x.par_iter().zip(self.potential.par_iter()))
            .for_each(|(o, (xi, v))| *o += xi * v);
    }

    pub fn apply_hamiltonian(&self, psi: &BosonicState) -> Result<BosonicState> {
        self.check(psi)?;
        let mut out = vec![Complex64::default(); psi.amplitudes.len()];
        self.apply_raw(&psi.amplitudes, &mut out);
        Ok(BosonicState {
            grid: psi.grid,
            particles: psi.particles,
            amplitudes: out,
        })
    }

    fn check(&self, psi: &BosonicState) -> Result<()> {
        self.cfg.grid.ensure_same(&psi.grid)?;
        if psi.particles != self.cfg.particles {
            return Err(LabError::param(
                "psi",
                format!("state has {} particles, system has {}", psi.particles, self.cfg.particles),
            ));
        }
        Ok(())
    }

    /// `⟨ψ, Hψ⟩` (quadrature-weighted).
    pub fn energy(&self, psi: &BosonicState) -> Result<f64> {
        let h = self.apply_hamiltonian(psi)?;
        Ok(psi.inner(&h)?.re)
    }
}

fn unflatten_slots(mut flat: usize, len: usize, particles: usize) -> Vec<usize> {
    let mut slots = vec![0; particles];
    for s in slots.iter_mut().rev() {
        *s = flat % len;
        flat /= len;
    }
    slots
}

/// Symmetric `N`-particle wave function on `(grid)^N`, position basis.
#[derive(Clone, Debug, PartialEq)]
pub struct BosonicState {
    pub grid: GridSpec,
    pub particles: usize,
    pub amplitudes: Vec<Complex64>,
}

impl BosonicState {
    pub fn from_amplitudes(grid: GridSpec, particles: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let expected = (grid.len() as u128).pow(particles as u32);
        if amplitudes.len() as u128 != expected {
            return Err(LabError::GridMismatch(format!(
                "expected {expected} amplitudes, got {}",
                amplitudes.len()
            )));
        }
        Ok(Self {
            grid,
            particles,
            amplitudes,
        })
    }

    /// `φ^{⊗N}`, normalised.
    pub fn product(phi: &TorusField, particles: usize) -> Result<Self> {
        let grid = phi.grid();
        let entries = (grid.len() as u128).pow(particles as u32);
        if entries > STATE_BUDGET as u128 {
            return Err(LabError::MemoryBudget {
                entries,
                budget: STATE_BUDGET,
            });
        }
        let phi = phi.normalized()?;
        let mut amps = vec![Complex64::new(1.0, 0.0)];
        for _ in 0..particles {
            amps = amps
                .iter()
                .flat_map(|a| phi.values().iter().map(move |v| a * v))
                .collect();
        }
        Self::from_amplitudes(grid, particles, amps)
    }

    /// Random symmetric state with Gaussian coefficients on `|ξ|_∞ ≤ band`
    /// in every slot, normalised.
    pub fn random_symmetric(grid: GridSpec, particles: usize, band: f64, rng: &mut impl Rng) -> Result<Self> {
        let total = (grid.len() as u128).pow(particles as u32);
        if total > STATE_BUDGET as u128 {
            return Err(LabError::MemoryBudget {
                entries: total,
                budget: STATE_BUDGET,
            });
        }
        let n = grid.n();
        let axes = particles * grid.dim();
        let mut coeffs = vec![Complex64::default(); total as usize];
        for (flat, c) in coeffs.iter_mut().enumerate() {
            let re: f64 = rng.sample(rand_distr::StandardNormal);
            let im: f64 = rng.sample(rand_distr::StandardNormal);
            let mut rest = flat;
            let mut inside = true;
            for _ in 0..axes {
                if (grid.axis_frequency(rest % n).abs() as f64) > band {
                    inside = false;
                }
                rest /= n;
            }
            if inside {
                *c = Complex64::new(re, im);
            }
        }
        fft::inverse(&mut coeffs, n, axes);
        let state = Self::from_amplitudes(grid, particles, coeffs)?.symmetrized();
        state.normalized()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Quadrature weight of one cell of `(T^d)^N`.
    pub fn cell_volume(&self) -> f64 {
        self.grid.cell_volume().powi(self.particles as i32)
    }

    pub fn norm(&self) -> f64 {
        (self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.cell_volume()).sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(LabError::param("psi", "cannot normalise a zero state"));
        }
        Ok(Self {
            amplitudes: self.amplitudes.iter().map(|a| a / norm).collect(),
            ..self.clone()
        })
    }

    /// `⟨self, other⟩` with quadrature weights.
    pub fn inner(&self, other: &BosonicState) -> Result<Complex64> {
        if self.grid != other.grid || self.particles != other.particles {
            return Err(LabError::GridMismatch("states live on different spaces".into()));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.cell_volume())
    }

    /// Amplitudes with slots permuted: slot `i` of the result is slot
    /// `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let len = self.grid.len();
        let np = self.particles;
        let amplitudes = (0..self.amplitudes.len())
            .map(|flat| {
                let slots = unflatten_slots(flat, len, np);
                let mut src = vec![0; np];
                for i in 0..np {
                    src[perm[i]] = slots[i];
                }
                self.amplitudes[src.iter().fold(0, |acc, &s| acc * len + s)]
            })
            .collect();
        Self {
            amplitudes,
            ..self.clone()
        }
    }

    /// Average over all slot permutations.
    pub fn symmetrized(&self) -> Self {
        let perms = permutations(self.particles);
        let mut acc = vec![Complex64::default(); self.amplitudes.len()];
        for p in &perms {
            for (a, b) in acc.iter_mut().zip(&self.permuted(p).amplitudes) {
                *a += b;
            }
        }
        let w = 1.0 / perms.len() as f64;
        Self {
            amplitudes: acc.into_iter().map(|a| a * w).collect(),
            ..self.clone()
        }
    }

    /// Largest deviation under a transposition of two slots.
    pub fn symmetry_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.particles {
            for j in i + 1..self.particles {
                let mut perm: Vec<usize> = (0..self.particles).collect();
                perm.swap(i, j);
                let swapped = self.permuted(&perm);
                for (a, b) in self.amplitudes.iter().zip(&swapped.amplitudes) {
                    worst = worst.max((a - b).norm());
                }
            }
        }
        worst
    }
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Propagator {
    /// Lanczos exponential per substep.
    #[default]
    Krylov,
    /// Kinetic/potential Strang splitting.
    Strang,
}

#[derive(Clone, Debug)]
pub struct Propagation {
    pub state: BosonicState,
    pub report: KrylovReport,
}

/// `e^{−itH} ψ` with at least `steps` substeps.
pub fn propagate(
    system: &ManyBodySystem,
    psi: &BosonicState,
    t: f64,
    steps: usize,
    method: Propagator,
    opts: &KrylovOptions,
) -> Result<Propagation> {
    system.check(psi)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(LabError::param("t", format!("must be >= 0, got {t}")));
    }
    let (amplitudes, report) = match method {
        Propagator::Krylov => {
            let apply = |x: &[Complex64], y: &mut [Complex64]| system.apply_raw(x, y);
            expm_apply(&apply, &psi.amplitudes, t, system.norm_bound(), steps, opts)
        }
        Propagator::Strang => (strang(system, &psi.amplitudes, t, steps.max(1)), KrylovReport {
            substeps: steps.max(1),
            max_error_estimate: 0.0,
            tolerance_met: true,
        }),
    };
    if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(LabError::BlowUp { step: 0, time: t });
    }
    Ok(Propagation {
        state: BosonicState {
            amplitudes,
            ..psi.clone()
        },
        report,
    })
}

fn strang(system: &ManyBodySystem, x: &[Complex64], t: f64, steps: usize) -> Vec<Complex64> {
    let dt = t / steps as f64;
    let (n, axes) = system.fft_shape();
    let half: Vec<Complex64> = system
        .potential
        .iter()
        .map(|v| Complex64::from_polar(1.0, -v * dt / 2.0))
        .collect();
    let kin: Vec<Complex64> = system
        .kinetic
        .iter()
        .map(|k| Complex64::from_polar(1.0, -k * dt))
        .collect();
    let mut state = x.to_vec();
    for _ in 0..steps {
        state.par_iter_mut().zip(half.par_iter()).for_each(|(s, h)| *s *= h);
        fft::forward(&mut state, n, axes);
        state.par_iter_mut().zip(kin.par_iter()).for_each(|(s, k)| *s *= k);
        fft::inverse(&mut state, n, axes);
        state.par_iter_mut().zip(half.par_iter()).for_each(|(s, h)| *s *= h);
    }
    state
}

/// `⟨ψ, (H/N + 1)^k ψ⟩`, returned with its (round-off) imaginary part.
pub fn energy_moment_complex(system: &ManyBodySystem, psi: &BosonicState, k: u32) -> Result<Complex64> {
    system.check(psi)?;
    let inv_n = 1.0 / system.cfg.particles as f64;
    let step = |x: &[Complex64]| {
        let mut y = vec![Complex64::default(); x.len()];
        system.apply_raw(x, &mut y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = *yi * inv_n + xi;
        }
        y
    };
    let mut left = psi.amplitudes.clone();
    for _ in 0..k / 2 {
        left = step(&left);
    }
    let right = if k % 2 == 1 { step(&left) } else { left.clone() };
    let raw: Complex64 = left.iter().zip(&right).map(|(a, b)| a.conj() * b).sum();
    Ok(raw * psi.cell_volume())
}

/// `⟨ψ, (H/N + 1)^k ψ⟩`.
pub fn energy_moment(system: &ManyBodySystem, psi: &BosonicState, k: u32) -> Result<f64> {
    Ok(energy_moment_complex(system, psi, k)?.re)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub k: u32,
    pub c1: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// `‖Π_j ⟨∇_{x_j}⟩^{powers[j]} ψ‖²` evaluated spectrally.
pub fn mixed_sobolev_norm_sq(psi: &BosonicState, powers: &[u32]) -> f64 {
    let grid = psi.grid;
    let (n, d, len) = (grid.n(), grid.dim(), grid.len());
    let axes = psi.particles * d;
    let mut coeffs = psi.amplitudes.clone();
    fft::forward(&mut coeffs, n, axes);
    let bracket_sq: Vec<f64> = (0..len)
        .map(|p| 1.0 + grid.frequency(p).iter().map(|&k| (k * k) as f64).sum::<f64>())
        .collect();
    let total: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(flat, c)| {
            let slots = unflatten_slots(flat, len, psi.particles);
            let w: f64 = powers
                .iter()
                .enumerate()
                .map(|(j, &p)| bracket_sq[slots[j]].powi(p as i32))
                .product();
            w * c.norm_sqr()
        })
        .sum();
    total * (2.0 * std::f64::consts::PI).powi((axes) as i32)
}

/// Compares `⟨ψ,(H/N+1)^k ψ⟩` with `c₁^k(‖S^{(1,k)}ψ‖² + N^{−1}‖S₁S^{(1,k−1)}ψ‖²)`;
/// for `k = 1` the right side is `c₁‖S₁ψ‖²`.
pub fn stability_check(system: &ManyBodySystem, psi: &BosonicState, k: u32, c1: f64) -> Result<StabilityRecord> {
    if !(0.0..=1.0).contains(&c1) {
        return Err(LabError::param("c1", format!("must lie in [0, 1], got {c1}")));
    }
    if k == 0 || k as usize > psi.particles {
        return Err(LabError::param("k", format!("must lie in 1..={}, got {k}", psi.particles)));
    }
    let lhs = energy_moment(system, psi, k)?;
    let rhs = if k == 1 {
        c1 * mixed_sobolev_norm_sq(psi, &[1])
    } else {
        let full = vec![1; k as usize];
        let mut extra = vec![1; k as usize - 1];
        extra[0] = 2;
        c1.powi(k as i32)
            * (mixed_sobolev_norm_sq(psi, &full)
                + mixed_sobolev_norm_sq(psi, &extra) / psi.particles as f64)
    };
    Ok(StabilityRecord {
        k,
        c1,
        lhs,
        rhs,
        satisfied: lhs >= rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng_for;

    fn sys(d: usize, n: usize, np: usize, beta: f64, pot: PotentialProfile) -> ManyBodySystem {
        let g = GridSpec::new(d, n).unwrap();
        ManyBodySystem::new(ManyBodyConfig::new(g, np, beta, pot).unwrap()).unwrap()
    }

    #[test]
    fn single_particle_plane_wave_is_eigenvector() {
        let s = sys(2, 8, 1, 0.1, PotentialProfile::default());
        let g = s.config().grid;
        let phi = TorusField::plane_wave(g, &[2, -1], Complex64::new(1.0, 0.0)).unwrap();
        let psi = BosonicState::product(&phi, 1).unwrap();
        let h = s.apply_hamiltonian(&psi).unwrap();
        for (a, b) in h.amplitudes.iter().zip(&psi.amplitudes) {
            assert!((a - b * 5.0).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_potential_three_particles() {
        let s = sys(1, 8, 3, 0.0, PotentialProfile::Constant { value: 2.0 });
        assert!(s.potential_values().iter().all(|v| (v - 2.0 / 9.0).abs() < 1e-15));
    }

    #[test]
    fn discrete_mass_is_independent_of_scaling() {
        for (np, beta) in [(2, 0.0), (3, 0.05), (5, 0.1)] {
            let s = sys(1, 16, np, beta, PotentialProfile::default());
            assert!((s.b0() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sub_grid_support_is_rejected() {
        let g = GridSpec::new(1, 8).unwrap();
        let cfg = ManyBodyConfig::new(g, 4, 3.0, PotentialProfile::default()).unwrap();
        assert!(matches!(build_potential(&cfg), Err(LabError::UnderResolved(_))));
    }

    #[test]
    fn memory_budget_is_enforced() {
        let g = GridSpec::new(3, 16).unwrap();
        assert!(matches!(
            ManyBodyConfig::new(g, 3, 0.1, PotentialProfile::Zero),
            Err(LabError::MemoryBudget { .. })
        ));
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let s = sys(1, 8, 3, 0.05, PotentialProfile::default());
        let g = s.config().grid;
        let a = BosonicState::random_symmetric(g, 3, 3.0, &mut rng_for(1, 0)).unwrap();
        let b = BosonicState::random_symmetric(g, 3, 3.0, &mut rng_for(1, 1)).unwrap();
        let hab = a.inner(&s.apply_hamiltonian(&b).unwrap()).unwrap();
        let hba = b.inner(&s.apply_hamiltonian(&a).unwrap()).unwrap();
        assert!((hab - hba.conj()).norm() < 1e-11 * hab.norm().max(1.0));
        assert!(a.symmetry_residual() < 1e-13);
    }

    #[test]
    fn moments_of_plane_wave() {
        let s = sys(1, 8, 1, 0.0, PotentialProfile::Zero);
        let phi = TorusField::plane_wave(s.config().grid, &[3], Complex64::new(1.0, 0.0)).unwrap();
        let psi = BosonicState::product(&phi, 1).unwrap();
        for k in 0..4 {
            let m = energy_moment(&s, &psi, k).unwrap();
            assert!((m - 10f64.powi(k as i32)).abs() < 1e-9 * 10f64.powi(k as i32));
        }
        let rec = stability_check(&s, &psi, 1, 1.0).unwrap();
        assert!((rec.lhs - rec.rhs).abs() < 1e-10);
    }

    #[test]
    fn permutation_enumeration() {
        let p = permutations(4);
        assert_eq!(p.len(), 24);
        let mut sorted = p.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 24);
    }
}
