//! Split-step solver for the defocusing quintic NLS
//! `i∂ₜφ = −Δφ + b₀|φ|⁴φ` on `T^d`, with its conserved quantities and
//! frequency-localization diagnostics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::TorusField;
use crate::grid::{sup_norm, GridSpec};
use crate::spectral::{gradient_norm, project_gt, project_leq};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NlsConfig {
    pub grid: GridSpec,
    pub b0: f64,
    pub dt: f64,
    /// Truncate modes with `|ξ_j| > n/3` after every nonlinear substep.
    pub dealias: bool,
}

impl NlsConfig {
    pub fn new(grid: GridSpec, b0: f64, dt: f64, dealias: bool) -> Result<Self> {
        if !(b0 >= 0.0 && b0.is_finite()) {
            return Err(LabError::param("b0", format!("must be finite and >= 0, got {b0}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(LabError::param("dt", format!("must be positive, got {dt}")));
        }
        Ok(Self { grid, b0, dt, dealias })
    }

    /// Number of steps covering `total`, which must be an integer multiple of `dt`.
    pub fn steps_for(&self, total: f64) -> Result<usize> {
        if !(total >= 0.0 && total.is_finite()) {
            return Err(LabError::param("T", format!("must be >= 0, got {total}")));
        }
        let k = (total / self.dt).round();
        if (k * self.dt - total).abs() > 1e-9 * total.max(1.0) {
            return Err(LabError::param(
                "T",
                format!("{total} is not an integer multiple of dt = {}", self.dt),
            ));
        }
        Ok(k as usize)
    }
}

/// `e^{itΔ}`: multiplies coefficients by `e^{−it|ξ|²}`.
pub fn free_propagate(f: &TorusField, t: f64) -> TorusField {
    let mut spec = f.spectrum();
    spec.apply(|xi| {
        let k2: i64 = xi.iter().map(|k| k * k).sum();
        Complex64::from_polar(1.0, -t * k2 as f64)
    });
    spec.to_field()
}

/// Reusable Strang integrator with a precomputed linear propagator.
#[derive(Clone, Debug)]
pub struct StrangStepper {
    cfg: NlsConfig,
    linear: Vec<Complex64>,
    keep: Vec<f64>,
}

impl StrangStepper {
    pub fn new(cfg: NlsConfig) -> Self {
        let grid = cfg.grid;
        let linear = grid
            .laplacian_symbol()
            .into_iter()
            .map(|k2| Complex64::from_polar(1.0, -cfg.dt * k2))
            .collect();
        let limit = grid.n() as i64 / 3;
        let keep = (0..grid.len())
            .map(|flat| {
                if !cfg.dealias || sup_norm(&grid.frequency(flat)) <= limit {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        Self { cfg, linear, keep }
    }

    pub fn config(&self) -> &NlsConfig {
        &self.cfg
    }

    fn nonlinear_half(&self, values: &mut [Complex64]) {
        let theta = self.cfg.b0 * self.cfg.dt / 2.0;
        if theta == 0.0 {
            return;
        }
        for v in values.iter_mut() {
            let r2 = v.norm_sqr();
            *v *= Complex64::from_polar(1.0, -theta * r2 * r2);
        }
    }

    /// Advances `values` (physical samples) by one step in place.
    pub fn step_in_place(&self, values: &mut [Complex64]) {
        let grid = self.cfg.grid;
        let (n, d) = (grid.n(), grid.dim());
        self.nonlinear_half(values);
        crate::fft::forward(values, n, d);
        for ((v, l), k) in values.iter_mut().zip(&self.linear).zip(&self.keep) {
            *v *= l * k;
        }
        crate::fft::inverse(values, n, d);
        self.nonlinear_half(values);
        if self.cfg.dealias {
            crate::fft::forward(values, n, d);
            for (v, k) in values.iter_mut().zip(&self.keep) {
                *v *= k;
            }
            crate::fft::inverse(values, n, d);
        }
    }

    pub fn step(&self, f: &TorusField) -> TorusField {
        let mut out = f.clone();
        self.step_in_place(out.values_mut());
        out
    }
}

/// One Strang step: half nonlinear phase, full free flow, half nonlinear phase.
pub fn strang_step(f: &TorusField, cfg: &NlsConfig) -> Result<TorusField> {
    f.grid().ensure_same(&cfg.grid)?;
    Ok(StrangStepper::new(*cfg).step(f))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<TorusField>,
    pub config: NlsConfig,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &TorusField {
        self.states.last().expect("trajectories hold at least one snapshot")
    }
}

/// Integrates to time `total`, recording every `snapshot_every` steps (plus the
/// initial datum and, if not already included, the final state).
pub fn evolve(
    f0: &TorusField,
    total: f64,
    cfg: &NlsConfig,
    snapshot_every: usize,
) -> Result<Trajectory> {
    f0.grid().ensure_same(&cfg.grid)?;
    if snapshot_every == 0 {
        return Err(LabError::param("snapshot_every", "must be positive"));
    }
    let steps = cfg.steps_for(total)?;
    let stepper = StrangStepper::new(*cfg);
    let mut state = f0.clone();
    let mut times = vec![0.0];
    let mut states = vec![f0.clone()];
    for step in 1..=steps {
        stepper.step_in_place(state.values_mut());
        if !state.is_finite() {
            return Err(LabError::BlowUp {
                step,
                time: step as f64 * cfg.dt,
            });
        }
        if step % snapshot_every == 0 || step == steps {
            times.push(step as f64 * cfg.dt);
            states.push(state.clone());
        }
    }
    Ok(Trajectory {
        times,
        states,
        config: *cfg,
    })
}

/// `∫|∇φ|²`.
pub fn kinetic_energy(f: &TorusField) -> f64 {
    gradient_norm(f).powi(2)
}

/// `∫|∇φ|² + (b₀/3)∫|φ|⁶`.
pub fn energy_nls(f: &TorusField, b0: f64) -> f64 {
    let cell = f.grid().cell_volume();
    let sextic: f64 = f.values().iter().map(|v| v.norm_sqr().powi(3)).sum::<f64>() * cell;
    kinetic_energy(f) + b0 / 3.0 * sextic
}

/// Which gradient term belongs to the low-frequency energy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum KineticAssignment {
    /// `∫|∇φ_L|²`, so that the high part starts with `‖P_H∇φ‖²`.
    #[default]
    LowGradient,
    /// `∫|∇φ_H|²` inside the low part.
    HighGradient,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergySplit {
    pub low: f64,
    pub high: f64,
}

/// Low/high split of [`energy_nls`] at cutoff `M`. The low part holds the
/// sextic monomials with at most two high-frequency factors.
pub fn energy_split(f: &TorusField, m: f64, b0: f64) -> EnergySplit {
    energy_split_with(f, m, b0, KineticAssignment::LowGradient)
}

pub fn energy_split_with(
    f: &TorusField,
    m: f64,
    b0: f64,
    assignment: KineticAssignment,
) -> EnergySplit {
    let low = project_leq(f, m);
    let high = project_gt(f, m);
    let cell = f.grid().cell_volume();
    let interaction: f64 = low
        .values()
        .iter()
        .zip(high.values())
        .map(|(&l, &h)| {
            let l2 = l.norm_sqr();
            let one_high = 2.0 * (l2 * l2 * (l.conj() * h)).re * 3.0;
            let two_high = 2.0 * (3.0 * h * h * l.conj() * l.conj() * l2).re;
            l2 * l2 * l2 + one_high + two_high + 9.0 * h.norm_sqr() * l2 * l2
        })
        .sum::<f64>()
        * cell;
    let kinetic = match assignment {
        KineticAssignment::LowGradient => kinetic_energy(&low),
        KineticAssignment::HighGradient => kinetic_energy(&high),
    };
    let e_low = kinetic + b0 / 3.0 * interaction;
    EnergySplit {
        low: e_low,
        high: energy_nls(f, b0) - e_low,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyDiagnostics {
    /// `‖P_{>M}∇f‖²`.
    pub high_kinetic: f64,
    /// `‖∇P_{<R}P_{>M}f‖²`.
    pub intermediate_kinetic: f64,
}

pub fn frequency_diagnostics(f: &TorusField, m: f64, r: f64) -> Result<FrequencyDiagnostics> {
    if !(m > 0.0 && m <= r) {
        return Err(LabError::param("M,R", format!("need 0 < M <= R, got M={m}, R={r}")));
    }
    let spec = f.spectrum();
    let d = f.grid().dim();
    let weight = |xi: &[i64], keep: bool| {
        if keep {
            xi.iter().map(|&k| (k * k) as f64).sum()
        } else {
            0.0
        }
    };
    let high_kinetic = spec.weighted_mass(|xi| weight(&xi[..d], sup_norm(xi) as f64 > m));
    let intermediate_kinetic = spec.weighted_mass(|xi| {
        let s = sup_norm(xi) as f64;
        weight(&xi[..d], s > m && s < r)
    });
    Ok(FrequencyDiagnostics {
        high_kinetic,
        intermediate_kinetic,
    })
}

/// `‖P_{>M}∇f‖` for each cutoff, from a single transform.
pub fn high_gradient_norms(f: &TorusField, cutoffs: &[f64]) -> Vec<f64> {
    let spec = f.spectrum();
    let grid = f.grid();
    let mut shells: Vec<(i64, f64)> = spec
        .coeffs()
        .iter()
        .enumerate()
        .map(|(flat, c)| {
            let xi = grid.frequency(flat);
            let k2: i64 = xi.iter().map(|k| k * k).sum();
            (sup_norm(&xi), k2 as f64 * c.norm_sqr())
        })
        .collect();
    shells.sort_by_key(|s| s.0);
    cutoffs
        .iter()
        .map(|&m| {
            let tail: f64 = shells
                .iter()
                .filter(|(r, _)| *r as f64 > m)
                .map(|(_, w)| w)
                .sum();
            (tail * grid.volume()).sqrt()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UtflOutcome {
    /// Smallest dyadic cutoff meeting the tolerance.
    Localized(u64),
    /// No dyadic cutoff below the Nyquist frequency meets the tolerance.
    NotFound,
}

/// Dyadic cutoffs `1, 2, 4, …` strictly below the Nyquist frequency.
pub fn dyadic_cutoffs(grid: GridSpec) -> Vec<u64> {
    let nyq = grid.nyquist() as u64;
    std::iter::successors(Some(1u64), |m| Some(m * 2))
        .take_while(|&m| m < nyq)
        .collect()
}

/// Smallest dyadic `M` with `max_t ‖P_{>M}∇u(t)‖ ≤ eps`.
pub fn utfl_probe(traj: &Trajectory, eps: f64) -> Result<UtflOutcome> {
    if traj.is_empty() {
        return Err(LabError::param("trajectory", "must hold at least one snapshot"));
    }
    if !(eps > 0.0) {
        return Err(LabError::param("eps", format!("must be positive, got {eps}")));
    }
    let cutoffs = dyadic_cutoffs(traj.config.grid);
    let as_f64: Vec<f64> = cutoffs.iter().map(|&m| m as f64).collect();
    let mut worst = vec![0.0f64; cutoffs.len()];
    for state in &traj.states {
        for (w, v) in worst.iter_mut().zip(high_gradient_norms(state, &as_f64)) {
            *w = w.max(v);
        }
    }
    Ok(cutoffs
        .iter()
        .zip(&worst)
        .find(|(_, &w)| w <= eps)
        .map_or(UtflOutcome::NotFound, |(&m, _)| UtflOutcome::Localized(m)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowEnergyDrift {
    pub max_rate: f64,
    pub fitted_c: f64,
    pub c1: f64,
}

/// Largest centered-difference rate of change of the low energy, normalised
/// by `C₁^{10} M²` with `C₁ = max(sup_t ‖∇u‖, 1)`.
pub fn energy_low_drift(traj: &Trajectory, m: f64) -> Result<LowEnergyDrift> {
    if traj.len() < 3 {
        return Err(LabError::param("trajectory", "needs at least 3 snapshots"));
    }
    if !(m > 0.0) {
        return Err(LabError::param("M", format!("must be positive, got {m}")));
    }
    let b0 = traj.config.b0;
    let lows: Vec<f64> = traj.states.iter().map(|s| energy_split(s, m, b0).low).collect();
    let c1 = traj
        .states
        .iter()
        .map(gradient_norm)
        .fold(1.0f64, f64::max);
    let mut max_rate = 0.0f64;
    for i in 1..traj.len() - 1 {
        let span = traj.times[i + 1] - traj.times[i - 1];
        max_rate = max_rate.max(((lows[i + 1] - lows[i - 1]) / span).abs());
    }
    Ok(LowEnergyDrift {
        max_rate,
        fitted_c: max_rate / (c1.powi(10) * m * m),
        c1,
    })
}
