//! Reduced density matrices, trace distance, hierarchy residuals, the HUFL
//! check and the propagation-of-chaos experiment.
//!
//! A `k`-particle marginal is stored as the matrix `γ(x, x')·dx^k` over the
//! grid basis of `(T^d)^k`, so matrix traces equal kernel traces. Kernels use
//! the convention `γ(x, x') = ∫ ψ(x, y) conj(ψ(x', y)) dy`, i.e. a pure state
//! is `|ψ⟩⟨ψ|`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fft;
use crate::field::TorusField;
use crate::grid::{japanese_bracket, sup_norm, GridSpec};
use crate::krylov::KrylovOptions;
use crate::manybody::{
    permutations, propagate, BosonicState, ManyBodyConfig, ManyBodySystem, PotentialProfile,
    Propagator,
};
use crate::nls::{evolve, NlsConfig, Trajectory};

/// Largest marginal dimension handled densely.
pub const MATRIX_BUDGET: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct KthMarginal {
    pub k: usize,
    pub grid: GridSpec,
    pub matrix: DMatrix<Complex64>,
}

fn matrix_dim(grid: GridSpec, k: usize) -> Result<usize> {
    let dim = (grid.len() as u128).pow(k as u32);
    if dim > MATRIX_BUDGET as u128 {
        return Err(LabError::MemoryBudget {
            entries: dim * dim,
            budget: MATRIX_BUDGET * MATRIX_BUDGET,
        });
    }
    Ok(dim as usize)
}

impl KthMarginal {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `max |γ − γ^*|`.
    pub fn hermiticity_residual(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Largest deviation under a simultaneous permutation of row and column
    /// slots.
    pub fn symmetry_residual(&self) -> f64 {
        let len = self.grid.len();
        let dim = self.dim();
        let mut worst = 0.0f64;
        for perm in permutations(self.k) {
            let map: Vec<usize> = (0..dim).map(|i| permute_index(i, len, &perm)).collect();
            for r in 0..dim {
                for c in 0..dim {
                    let d = self.matrix[(r, c)] - self.matrix[(map[r], map[c])];
                    worst = worst.max(d.norm());
                }
            }
        }
        worst
    }

    /// `Tr_k γ^{(k)}`, tracing out the last slot.
    pub fn partial_trace(&self) -> Result<KthMarginal> {
        if self.k < 2 {
            return Err(LabError::param("k", "cannot trace out the only slot"));
        }
        let len = self.grid.len();
        let dim = self.dim() / len;
        let m = DMatrix::from_fn(dim, dim, |r, c| {
            (0..len).map(|y| self.matrix[(r * len + y, c * len + y)]).sum()
        });
        Ok(KthMarginal {
            k: self.k - 1,
            grid: self.grid,
            matrix: m,
        })
    }
}

fn permute_index(mut flat: usize, len: usize, perm: &[usize]) -> usize {
    let k = perm.len();
    let mut slots = vec![0; k];
    for s in slots.iter_mut().rev() {
        *s = flat % len;
        flat /= len;
    }
    (0..k).fold(0, |acc, i| acc * len + slots[perm[i]])
}

/// `γ_N^{(k)}` of a many-body state.
pub fn marginal(psi: &BosonicState, k: usize) -> Result<KthMarginal> {
    if k == 0 || k > psi.particles {
        return Err(LabError::param("k", format!("must lie in 1..={}, got {k}", psi.particles)));
    }
    let rows = matrix_dim(psi.grid, k)?;
    let cols = psi.amplitudes.len() / rows;
    let a = DMatrix::from_row_slice(rows, cols, &psi.amplitudes);
    let w = Complex64::new(psi.cell_volume(), 0.0);
    Ok(KthMarginal {
        k,
        grid: psi.grid,
        matrix: (&a * a.adjoint()) * w,
    })
}

/// `|φ⟩⟨φ|^{⊗k}` (no normalisation applied).
pub fn product_marginal(phi: &TorusField, k: usize) -> Result<KthMarginal> {
    let grid = phi.grid();
    let dim = matrix_dim(grid, k)?;
    let mut v = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..k {
        v = v.iter().flat_map(|a| phi.values().iter().map(move |p| a * p)).collect();
    }
    let col = DMatrix::from_column_slice(dim, 1, &v);
    let w = Complex64::new(grid.cell_volume().powi(k as i32), 0.0);
    Ok(KthMarginal {
        k,
        grid,
        matrix: (&col * col.adjoint()) * w,
    })
}

/// `Tr|a − b|`.
pub fn trace_distance(a: &KthMarginal, b: &KthMarginal) -> Result<f64> {
    if a.k != b.k || a.grid != b.grid {
        return Err(LabError::GridMismatch("marginals have different shapes".into()));
    }
    let diff = &a.matrix - &b.matrix;
    Ok(diff.singular_values().iter().sum())
}

/// Read access to a `k`-particle kernel in matrix normalisation.
pub trait DensityKernel {
    fn grid(&self) -> GridSpec;
    fn order(&self) -> usize;
    /// Matrix entry at row slots `row` and column slots `col`.
    fn entry(&self, row: &[usize], col: &[usize]) -> Complex64;
}

impl DensityKernel for KthMarginal {
    fn grid(&self) -> GridSpec {
        self.grid
    }

    fn order(&self) -> usize {
        self.k
    }

    fn entry(&self, row: &[usize], col: &[usize]) -> Complex64 {
        let len = self.grid.len();
        let r = row.iter().fold(0, |acc, &s| acc * len + s);
        let c = col.iter().fold(0, |acc, &s| acc * len + s);
        self.matrix[(r, c)]
    }
}

/// `|φ⟩⟨φ|^{⊗k}` evaluated lazily.
#[derive(Clone, Debug)]
pub struct ProductKernel<'a> {
    pub phi: &'a TorusField,
    pub k: usize,
}

impl DensityKernel for ProductKernel<'_> {
    fn grid(&self) -> GridSpec {
        self.phi.grid()
    }

    fn order(&self) -> usize {
        self.k
    }

    fn entry(&self, row: &[usize], col: &[usize]) -> Complex64 {
        let v = self.phi.values();
        let w = self.phi.grid().cell_volume().powi(self.k as i32);
        row.iter()
            .zip(col)
            .map(|(&r, &c)| v[r] * v[c].conj())
            .product::<Complex64>()
            * w
    }
}

fn dense<K: DensityKernel + ?Sized>(kernel: &K) -> Result<DMatrix<Complex64>> {
    let grid = kernel.grid();
    let k = kernel.order();
    let dim = matrix_dim(grid, k)?;
    let len = grid.len();
    let slots = |flat: usize| {
        let mut s = vec![0; k];
        let mut f = flat;
        for x in s.iter_mut().rev() {
            *x = f % len;
            f /= len;
        }
        s
    };
    let idx: Vec<Vec<usize>> = (0..dim).map(slots).collect();
    Ok(DMatrix::from_fn(dim, dim, |r, c| kernel.entry(&idx[r], &idx[c])))
}

/// One-particle `−Δ` as a dense matrix on the grid basis.
fn laplacian_matrix(grid: GridSpec) -> DMatrix<Complex64> {
    let len = grid.len();
    let symbol = grid.laplacian_symbol();
    let mut m = DMatrix::zeros(len, len);
    for c in 0..len {
        let mut col = vec![Complex64::default(); len];
        col[c] = Complex64::new(1.0, 0.0);
        fft::forward(&mut col, grid.n(), grid.dim());
        for (v, s) in col.iter_mut().zip(&symbol) {
            *v *= s;
        }
        fft::inverse(&mut col, grid.n(), grid.dim());
        for r in 0..len {
            m[(r, c)] = col[r];
        }
    }
    m
}

/// `(A applied to slot j on the row index) · γ`.
fn left_slot(op: &DMatrix<Complex64>, gamma: &DMatrix<Complex64>, slot: usize, k: usize) -> DMatrix<Complex64> {
    let len = op.nrows();
    let dim = gamma.nrows();
    let inner = len.pow((k - 1 - slot) as u32);
    let mut out = DMatrix::zeros(dim, dim);
    for r in 0..dim {
        let digit = (r / inner) % len;
        let base = r - digit * inner;
        for s in 0..len {
            let a = op[(digit, s)];
            if a == Complex64::default() {
                continue;
            }
            let src = base + s * inner;
            for c in 0..dim {
                out[(r, c)] += a * gamma[(src, c)];
            }
        }
    }
    out
}

/// `Σ_j [−Δ_{x_j}, γ]`.
fn kinetic_commutator(gamma: &DMatrix<Complex64>, lap: &DMatrix<Complex64>, k: usize) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(gamma.nrows(), gamma.ncols());
    for j in 0..k {
        let left = left_slot(lap, gamma, j, k);
        // γ Δ_j = (Δ_j γ^*)^*, with Δ_j Hermitian.
        let right = left_slot(lap, &gamma.adjoint(), j, k).adjoint();
        out += left - right;
    }
    out
}

/// Right side of the GP hierarchy at level `k`:
/// `Σ_j [−Δ_j, γ^{(k)}] + b₀ Σ_j (B⁺_j − B⁻_j) γ^{(k+2)}`, where the
/// contractions place both new particles on `x_j` (resp. `x'_j`).
pub fn gp_right_side<A, B>(gamma_k: &A, gamma_k2: &B, b0: f64) -> Result<DMatrix<Complex64>>
where
    A: DensityKernel + ?Sized,
    B: DensityKernel + ?Sized,
{
    let grid = gamma_k.grid();
    grid.ensure_same(&gamma_k2.grid())?;
    let k = gamma_k.order();
    if gamma_k2.order() != k + 2 {
        return Err(LabError::param("gamma", "second kernel must have order k + 2"));
    }
    let len = grid.len();
    let g = dense(gamma_k)?;
    let mut out = kinetic_commutator(&g, &laplacian_matrix(grid), k);
    let dim = g.nrows();
    let inv_cell2 = 1.0 / grid.cell_volume().powi(2);
    let slots = |flat: usize| {
        let mut s = vec![0; k + 2];
        let mut f = flat;
        for x in s[..k].iter_mut().rev() {
            *x = f % len;
            f /= len;
        }
        s
    };
    let idx: Vec<Vec<usize>> = (0..dim).map(slots).collect();
    for r in 0..dim {
        for c in 0..dim {
            let mut acc = Complex64::default();
            for j in 0..k {
                let (mut row, mut col) = (idx[r].clone(), idx[c].clone());
                row[k] = idx[r][j];
                row[k + 1] = idx[r][j];
                col[k] = idx[r][j];
                col[k + 1] = idx[r][j];
                acc += gamma_k2.entry(&row, &col);
                col[k] = idx[c][j];
                col[k + 1] = idx[c][j];
                row[k] = idx[c][j];
                row[k + 1] = idx[c][j];
                acc -= gamma_k2.entry(&row, &col);
            }
            out[(r, c)] += acc * (b0 * inv_cell2);
        }
    }
    Ok(out)
}

fn uniform_spacing(times: &[f64]) -> Result<f64> {
    if times.len() < 3 {
        return Err(LabError::param("snapshots", "need at least 3 snapshots"));
    }
    let h = times[1] - times[0];
    for w in times.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0) {
            return Err(LabError::param("snapshots", "snapshots must be uniformly spaced"));
        }
    }
    if !(h > 0.0) {
        return Err(LabError::param("snapshots", "times must increase"));
    }
    Ok(h)
}

fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest Frobenius residual of the GP hierarchy at level `k` along the
/// factorised trajectory `|φ(t)⟩⟨φ(t)|^{⊗j}`, with `∂ₜ` by centered
/// differences.
pub fn gp_residual(traj: &Trajectory, k: usize, b0: f64) -> Result<f64> {
    let h = uniform_spacing(&traj.times)?;
    if k == 0 {
        return Err(LabError::param("k", "must be at least 1"));
    }
    let mut worst = 0.0f64;
    for i in 1..traj.len() - 1 {
        let plus = dense(&ProductKernel { phi: &traj.states[i + 1], k })?;
        let minus = dense(&ProductKernel { phi: &traj.states[i - 1], k })?;
        let rhs = gp_right_side(
            &ProductKernel { phi: &traj.states[i], k },
            &ProductKernel { phi: &traj.states[i], k: k + 2 },
            b0,
        )?;
        let lhs = (plus - minus) * Complex64::new(0.0, 1.0 / (2.0 * h));
        worst = worst.max(frobenius(&(lhs - rhs)));
    }
    Ok(worst)
}

/// The one-particle NLS residual `i∂ₜφ − (−Δφ + b₀|φ|⁴φ)` lifted to the
/// rank-one form `i∂ₜ(φφ^*) − (N(φ)φ^* − φN(φ)^*)`, largest Frobenius norm
/// over interior snapshots.
pub fn lifted_nls_residual(traj: &Trajectory, b0: f64) -> Result<f64> {
    let h = uniform_spacing(&traj.times)?;
    let grid = traj.config.grid;
    let cell = grid.cell_volume();
    let col = |f: &TorusField| DMatrix::from_column_slice(grid.len(), 1, f.values());
    let mut worst = 0.0f64;
    for i in 1..traj.len() - 1 {
        let phi = &traj.states[i];
        let lap = crate::spectral::apply_r(phi, 2.0);
        let nonlinear: Vec<Complex64> = phi
            .values()
            .iter()
            .zip(lap.values())
            .map(|(p, l)| l + p * (b0 * p.norm_sqr().powi(2)))
            .collect();
        let n_col = DMatrix::from_column_slice(grid.len(), 1, &nonlinear);
        let p0 = col(phi);
        let pp = col(&traj.states[i + 1]);
        let pm = col(&traj.states[i - 1]);
        let dt_part = (&pp * pp.adjoint() - &pm * pm.adjoint()) * Complex64::new(0.0, 1.0 / (2.0 * h));
        let rhs = &n_col * p0.adjoint() - &p0 * n_col.adjoint();
        worst = worst.max(frobenius(&((dt_part - rhs) * Complex64::new(cell, 0.0))));
    }
    Ok(worst)
}

/// `Σ_rest ψ(a, w, rest) conj(ψ(b, w, rest)) f(a, b, w)` over the `m`
/// contracted slots `w`, times the quadrature weight.
fn contracted<F>(psi: &BosonicState, k: usize, m: usize, weight: F) -> DMatrix<Complex64>
where
    F: Fn(&[usize], &[usize], &[usize]) -> f64 + Sync,
{
    let len = psi.grid.len();
    let rows = len.pow(k as u32);
    let cols = psi.amplitudes.len() / rows;
    let rest = cols / len.pow(m as u32);
    let decode = |mut flat: usize, count: usize| {
        let mut s = vec![0; count];
        for x in s.iter_mut().rev() {
            *x = flat % len;
            flat /= len;
        }
        s
    };
    let row_slots: Vec<Vec<usize>> = (0..rows).map(|r| decode(r, k)).collect();
    let w_slots: Vec<Vec<usize>> = (0..len.pow(m as u32)).map(|w| decode(w, m)).collect();
    let cell = psi.cell_volume();
    let amps = &psi.amplitudes;
    let entries: Vec<Complex64> = (0..rows * rows)
        .into_par_iter()
        .map(|rc| {
            let (a, b) = (rc / rows, rc % rows);
            let mut acc = Complex64::default();
            for (w, ws) in w_slots.iter().enumerate() {
                let f = weight(&row_slots[a], &row_slots[b], ws);
                if f == 0.0 {
                    continue;
                }
                let mut inner = Complex64::default();
                for t in 0..rest {
                    let col = w * rest + t;
                    inner += amps[a * cols + col] * amps[b * cols + col].conj();
                }
                acc += inner * f;
            }
            acc * cell
        })
        .collect();
    DMatrix::from_row_slice(rows, rows, &entries)
}

/// Right side of the BBGKY hierarchy at level `k` for the configured
/// Hamiltonian, evaluated on `ψ`.
pub fn bbgky_right_side(system: &ManyBodySystem, psi: &BosonicState, k: usize) -> Result<DMatrix<Complex64>> {
    let np = psi.particles;
    if k == 0 || k + 2 > np {
        return Err(LabError::param("k", format!("must lie in 1..={}, got {k}", np.saturating_sub(2))));
    }
    let grid = psi.grid;
    let gamma = marginal(psi, k)?;
    let mut out = kinetic_commutator(&gamma.matrix, &laplacian_matrix(grid), k);
    let nf = np as f64;
    let u = |a: usize, b: usize, c: usize| system.three_body(a, b, c);
    if k >= 3 {
        let intra = contracted(psi, k, 0, |a, b, _| {
            let mut acc = 0.0;
            for i in 0..k {
                for j in i + 1..k {
                    for l in j + 1..k {
                        acc += u(a[i], a[j], a[l]) - u(b[i], b[j], b[l]);
                    }
                }
            }
            acc
        });
        out += intra * Complex64::new(1.0 / (nf * nf), 0.0);
    }
    if k >= 2 {
        let one = contracted(psi, k, 1, |a, b, w| {
            let mut acc = 0.0;
            for i in 0..k {
                for j in i + 1..k {
                    acc += u(a[i], a[j], w[0]) - u(b[i], b[j], w[0]);
                }
            }
            acc
        });
        out += one * Complex64::new((nf - k as f64) / (nf * nf), 0.0);
    }
    let two = contracted(psi, k, 2, |a, b, w| {
        (0..k).map(|j| u(a[j], w[0], w[1]) - u(b[j], w[0], w[1])).sum()
    });
    let coeff = (nf - k as f64) * (nf - k as f64 - 1.0) / (2.0 * nf * nf);
    out += two * Complex64::new(coeff, 0.0);
    Ok(out)
}

/// Largest Frobenius residual of the BBGKY hierarchy at level `k` over the
/// interior of uniformly spaced snapshots `h` apart.
pub fn bbgky_residual(system: &ManyBodySystem, snapshots: &[BosonicState], h: f64, k: usize) -> Result<f64> {
    if snapshots.len() < 3 {
        return Err(LabError::param("snapshots", "need at least 3 snapshots"));
    }
    if !(h > 0.0) {
        return Err(LabError::param("h", format!("spacing must be positive, got {h}")));
    }
    let mut worst = 0.0f64;
    for i in 1..snapshots.len() - 1 {
        let plus = marginal(&snapshots[i + 1], k)?;
        let minus = marginal(&snapshots[i - 1], k)?;
        let rhs = bbgky_right_side(system, &snapshots[i], k)?;
        let lhs = (plus.matrix - minus.matrix) * Complex64::new(0.0, 1.0 / (2.0 * h));
        worst = worst.max(frobenius(&(lhs - rhs)));
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HuflEntry {
    pub k: usize,
    pub lhs: f64,
    pub threshold: f64,
    pub holds: bool,
}

/// `Tr S^{(1,k)} P^{(k)}_{>M} γ P^{(k)}_{>M} S^{(1,k)}`, computed from the
/// diagonal of `γ` in the Fourier basis.
pub fn hufl_lhs(gamma: &KthMarginal, m: f64) -> f64 {
    let grid = gamma.grid;
    let (n, d, len, k) = (grid.n(), grid.dim(), grid.len(), gamma.k);
    let dim = gamma.dim();
    let axes = k * d;
    let unitary = 1.0 / (dim as f64).sqrt();
    let transform_columns = |m: &DMatrix<Complex64>| {
        let mut out = DMatrix::zeros(dim, dim);
        for c in 0..dim {
            let mut col: Vec<Complex64> = m.column(c).iter().copied().collect();
            fft::forward(&mut col, n, axes);
            for (r, v) in col.into_iter().enumerate() {
                out[(r, c)] = v * (dim as f64) * unitary;
            }
        }
        out
    };
    let v = transform_columns(&gamma.matrix);
    let w = transform_columns(&v.adjoint());
    let weight: Vec<f64> = (0..len)
        .map(|p| {
            let xi = grid.frequency(p);
            if sup_norm(&xi) as f64 > m {
                japanese_bracket(&xi[..d]).powi(2)
            } else {
                0.0
            }
        })
        .collect();
    (0..dim)
        .map(|i| {
            let mut f = i;
            let mut wgt = 1.0;
            for _ in 0..k {
                wgt *= weight[f % len];
                f /= len;
            }
            wgt * w[(i, i)].re
        })
        .sum()
}

/// HUFL left sides against `ε^{2k}` for each supplied marginal.
pub fn hufl_check(gammas: &[KthMarginal], m: f64, eps: f64) -> Vec<HuflEntry> {
    gammas
        .iter()
        .map(|g| {
            let lhs = hufl_lhs(g, m);
            let threshold = eps.powi(2 * g.k as i32);
            HuflEntry {
                k: g.k,
                lhs,
                threshold,
                holds: lhs <= threshold,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChaosParams {
    pub grid: GridSpec,
    pub particles: Vec<usize>,
    pub beta: f64,
    pub potential: PotentialProfile,
    pub phi0: TorusField,
    /// Increasing report times, starting at or after 0.
    pub times: Vec<f64>,
    /// Minimum Krylov substeps per unit time.
    pub steps_per_unit: usize,
    /// Largest NLS time step.
    pub nls_dt: f64,
    /// NLS coupling; the mean-field value `b₀/2` when `None`.
    pub coupling: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChaosRow {
    pub particles: usize,
    pub time: f64,
    pub trace_distance: f64,
    pub energy_per_particle: f64,
    pub tolerance_met: bool,
}

/// For each `N`, propagates `φ₀^{⊗N}` and compares its one-particle marginal
/// with `|φ(t)⟩⟨φ(t)|` from the quintic NLS.
pub fn chaos_experiment(params: &ChaosParams) -> Result<Vec<ChaosRow>> {
    let phi0 = params.phi0.normalized()?;
    params.grid.ensure_same(&phi0.grid())?;
    if params.times.iter().any(|t| !(*t >= 0.0)) || params.times.windows(2).any(|w| w[1] < w[0]) {
        return Err(LabError::param("times", "must be nonnegative and nondecreasing"));
    }
    if !(params.nls_dt > 0.0) {
        return Err(LabError::param("nls_dt", "must be positive"));
    }
    let mut rows = Vec::new();
    for &np in &params.particles {
        let cfg = ManyBodyConfig::new(params.grid, np, params.beta, params.potential)?;
        let system = ManyBodySystem::new(cfg)?;
        let coupling = params.coupling.unwrap_or_else(|| system.mean_field_coupling());
        let mut psi = BosonicState::product(&phi0, np)?;
        let mut phi = phi0.clone();
        let mut now = 0.0;
        for &t in &params.times {
            let span = t - now;
            let mut met = true;
            if span > 0.0 {
                let steps = (span * params.steps_per_unit as f64).ceil() as usize;
                let out = propagate(&system, &psi, span, steps, Propagator::Krylov, &KrylovOptions::default())?;
                met = out.report.tolerance_met;
                psi = out.state;
                let nls_steps = (span / params.nls_dt).ceil().max(1.0);
                let ncfg = NlsConfig::new(params.grid, coupling, span / nls_steps, false)?;
                phi = evolve(&phi, span, &ncfg, usize::MAX)?.last().clone();
            }
            now = t;
            let gamma = marginal(&psi, 1)?;
            let target = product_marginal(&phi, 1)?;
            rows.push(ChaosRow {
                particles: np,
                time: t,
                trace_distance: trace_distance(&gamma, &target)?,
                energy_per_particle: system.energy(&psi)? / np as f64,
                tolerance_met: met,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_band_limited, rng_for};

    fn unit(grid: GridSpec, seed: u64) -> TorusField {
        random_band_limited(grid, 3.0, &mut rng_for(seed, 0))
    }

    #[test]
    fn product_state_marginals_are_tensor_powers() {
        let g = GridSpec::new(1, 8).unwrap();
        let phi = unit(g, 1);
        let psi = BosonicState::product(&phi, 3).unwrap();
        for k in 1..=2 {
            let a = marginal(&psi, k).unwrap();
            let b = product_marginal(&phi, k).unwrap();
            assert!((&a.matrix - &b.matrix).iter().all(|z| z.norm() < 1e-12));
        }
        assert!(marginal(&psi, 4).is_err());
    }

    #[test]
    fn orthogonal_pure_states_are_two_apart() {
        let g = GridSpec::new(1, 8).unwrap();
        let a = TorusField::plane_wave(g, &[1], Complex64::new(1.0, 0.0)).unwrap().normalized().unwrap();
        let b = TorusField::plane_wave(g, &[2], Complex64::new(1.0, 0.0)).unwrap().normalized().unwrap();
        let d = trace_distance(&product_marginal(&a, 1).unwrap(), &product_marginal(&b, 1).unwrap()).unwrap();
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn laplacian_matrix_matches_symbol() {
        let g = GridSpec::new(1, 8).unwrap();
        let lap = laplacian_matrix(g);
        let phi = TorusField::plane_wave(g, &[3], Complex64::new(1.0, 0.0)).unwrap();
        let v = DMatrix::from_column_slice(8, 1, phi.values());
        let out = &lap * &v;
        for i in 0..8 {
            assert!((out[(i, 0)] - phi.values()[i] * 9.0).norm() < 1e-12);
        }
    }

    #[test]
    fn hufl_of_plane_wave_is_power() {
        let g = GridSpec::new(1, 16).unwrap();
        let phi = TorusField::plane_wave(g, &[5], Complex64::new(1.0, 0.0)).unwrap().normalized().unwrap();
        for k in 1..=2 {
            let gamma = product_marginal(&phi, k).unwrap();
            assert!((hufl_lhs(&gamma, 2.0) - 26f64.powi(k as i32)).abs() < 1e-9);
            assert!(hufl_lhs(&gamma, 8.0).abs() < 1e-12);
        }
    }
}
