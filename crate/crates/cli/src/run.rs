//! Runners: one per experiment kind, each producing metrics, tables and
//! binary artifacts from a validated configuration.

use std::collections::BTreeMap;

use quintlab_core::combinatorics::{
    board_game_bound, double_factorial, min_unclogged, raw_summand_count, CollapseMap,
};
use quintlab_core::io::{write_field, write_state, Layout};
use quintlab_core::krylov::KrylovOptions;
use quintlab_core::manybody::{
    energy_moment, propagate, stability_check, BosonicState, ManyBodyConfig, ManyBodySystem,
};
use quintlab_core::marginals::{
    bbgky_residual, chaos_experiment, gp_residual, hufl_check, lifted_nls_residual, marginal,
    product_marginal, ChaosParams, KthMarginal,
};
use quintlab_core::nls::{energy_nls, energy_split, evolve, utfl_probe, NlsConfig, UtflOutcome};
use quintlab_core::probes::{run_probe, LemmaId, ProbeReport};
use quintlab_core::random::{random_band_limited, random_power_law, rng_for};
use quintlab_core::spectral::{project_gt, sobolev_norm};
use quintlab_core::{GridSpec, Result, TorusField, C64};
use serde_json::json;

use crate::config::{
    ChaosSection, CouplingsSection, DatumKind, DatumSection, ExperimentConfig, ExperimentKind,
    HuflSection, ManyBodySection, MarginalSource, NlsSection, ResidualsSection, MIN_SLOPE,
};
use crate::report::Table;

/// Everything a runner hands back to the orchestrator.
#[derive(Debug, Default)]
pub struct Outcome {
    pub config: serde_json::Value,
    pub metrics: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub passed: bool,
    pub tables: Vec<Table>,
    pub details: BTreeMap<String, serde_json::Value>,
    pub binaries: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }

    fn tolerance(&mut self, name: &str, value: f64) {
        self.tolerances.insert(name.to_string(), value);
    }
}

fn table_with(name: &str, columns: Vec<String>) -> Table {
    Table {
        name: name.to_string(),
        columns,
        rows: Vec::new(),
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub fn dispatch(kind: ExperimentKind, cfg: &ExperimentConfig, lemma: Option<LemmaId>) -> Result<Outcome> {
    match kind {
        ExperimentKind::NlsRun => nls_run(&cfg.nls, cfg.seed),
        ExperimentKind::ManybodyRun => manybody_run(&cfg.manybody, cfg.seed),
        ExperimentKind::Chaos => chaos(&cfg.chaos, cfg.seed),
        ExperimentKind::Residuals => residuals(&cfg.residuals, cfg.seed),
        ExperimentKind::Hufl => hufl(&cfg.hufl, cfg.seed),
        ExperimentKind::Couplings => couplings(&cfg.couplings),
        ExperimentKind::Probe => {
            let lemma = lemma.expect("lemma is resolved before dispatch");
            probe(cfg.probe.resolve(lemma, cfg.seed), cfg.probe.min_slope.unwrap_or(MIN_SLOPE))
        }
    }
}

fn build_datum(grid: GridSpec, d: &DatumSection, seed: u64) -> Result<TorusField> {
    let mut rng = rng_for(seed, 0);
    let raw = match d.kind {
        DatumKind::BandLimited => random_band_limited(grid, d.band, &mut rng),
        DatumKind::PowerLaw => random_power_law(grid, d.band, d.decay, &mut rng),
        DatumKind::PlaneWave => {
            return TorusField::plane_wave(grid, &d.frequency[..grid.dim()], C64::new(d.rms, 0.0));
        }
    };
    let rms = raw.l2_norm() / grid.volume().sqrt();
    Ok(if rms > 0.0 { raw.scaled(C64::new(d.rms / rms, 0.0)) } else { raw })
}

fn nls_run(s: &NlsSection, seed: u64) -> Result<Outcome> {
    let grid = GridSpec::new(s.dim, s.n)?;
    let f0 = build_datum(grid, &s.datum, seed)?;
    let cfg = NlsConfig::new(grid, s.b0, s.dt, s.dealias)?;
    let traj = evolve(&f0, s.time, &cfg, s.snapshot_every)?;
    let mut columns: Vec<String> = ["time", "mass", "energy"].iter().map(|c| c.to_string()).collect();
    for m in &s.cutoffs {
        columns.push(format!("low_energy_M{m}"));
        columns.push(format!("high_energy_M{m}"));
    }
    let mut table = table_with("snapshots", columns);
    let (m0, e0) = (f0.mass(), energy_nls(&f0, s.b0));
    let (mut mass_drift, mut energy_drift) = (0.0f64, 0.0f64);
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let (mass, energy) = (state.mass(), energy_nls(state, s.b0));
        mass_drift = mass_drift.max((mass - m0).abs() / m0.max(f64::MIN_POSITIVE));
        energy_drift = energy_drift.max((energy - e0).abs() / e0.abs().max(f64::MIN_POSITIVE));
        let mut row = vec![*t, mass, energy];
        for &m in &s.cutoffs {
            let split = energy_split(state, m, s.b0);
            row.push(split.low);
            row.push(split.high);
        }
        table.push(row);
    }
    let mut out = Outcome {
        config: json!(s),
        ..Outcome::default()
    };
    out.metric("snapshots", traj.len() as f64);
    out.metric("mass_drift", mass_drift);
    out.metric("energy_drift", energy_drift);
    let utfl = utfl_probe(&traj, s.utfl_eps)?;
    out.metric(
        "utfl_cutoff",
        match utfl {
            UtflOutcome::Localized(m) => m as f64,
            UtflOutcome::NotFound => 0.0,
        },
    );
    out.details.insert("utfl".into(), json!(utfl));
    out.tolerance("mass_drift", s.mass_tolerance);
    out.passed = mass_drift < s.mass_tolerance;
    out.tables.push(table);
    let mut bytes = Vec::new();
    write_field(&mut bytes, traj.last(), Layout::Physical)?;
    out.binaries.push(("final_state.bin".into(), bytes));
    Ok(out)
}

fn manybody_run(s: &ManyBodySection, seed: u64) -> Result<Outcome> {
    let grid = GridSpec::new(s.dim, s.n)?;
    let system = ManyBodySystem::new(ManyBodyConfig::new(grid, s.particles, s.beta, s.potential)?)?;
    let mut rng = rng_for(seed, 0);
    let psi0 = if s.product {
        BosonicState::product(&random_band_limited(grid, s.band, &mut rng), s.particles)?
    } else {
        BosonicState::random_symmetric(grid, s.particles, s.band, &mut rng)?.normalized()?
    };
    let run = propagate(&system, &psi0, s.time, s.steps, s.propagator, &KrylovOptions::default())?;
    let psi = &run.state;
    let norm_drift = (psi.norm() - psi0.norm()).abs();
    let mut table = Table::new(
        "moments",
        &["k", "moment_initial", "moment_final", "stability_lhs", "stability_rhs", "stability_holds"],
    );
    for k in 1..=s.particles.min(3) as u32 {
        let rec = stability_check(&system, psi, k, s.stability_c1)?;
        table.push(vec![
            k as f64,
            energy_moment(&system, &psi0, k)?,
            energy_moment(&system, psi, k)?,
            rec.lhs,
            rec.rhs,
            flag(rec.satisfied),
        ]);
    }
    let mut out = Outcome {
        config: json!(s),
        ..Outcome::default()
    };
    let np = s.particles as f64;
    out.metric("norm_drift", norm_drift);
    out.metric("energy_per_particle_initial", system.energy(&psi0)? / np);
    out.metric("energy_per_particle_final", system.energy(psi)? / np);
    out.metric("substeps", run.report.substeps as f64);
    out.metric("krylov_error_estimate", run.report.max_error_estimate);
    out.metric("krylov_tolerance_met", flag(run.report.tolerance_met));
    out.metric("symmetry_residual", psi.symmetry_residual());
    out.tolerance("norm_drift", s.norm_tolerance);
    out.tolerance("krylov", KrylovOptions::default().tolerance);
    out.passed = norm_drift < s.norm_tolerance && run.report.tolerance_met;
    out.tables.push(table);
    let mut bytes = Vec::new();
    write_state(&mut bytes, grid, s.particles, &psi.amplitudes)?;
    out.binaries.push(("final_state.bin".into(), bytes));
    Ok(out)
}

fn chaos(s: &ChaosSection, seed: u64) -> Result<Outcome> {
    let grid = GridSpec::new(s.dim, s.n)?;
    let phi0 = random_band_limited(grid, s.band, &mut rng_for(seed, 0));
    let rows = chaos_experiment(&ChaosParams {
        grid,
        particles: s.particles.clone(),
        beta: s.beta,
        potential: s.potential,
        phi0,
        times: s.times.clone(),
        steps_per_unit: s.steps_per_unit,
        nls_dt: s.nls_dt,
        coupling: s.coupling,
    })?;
    let mut full = Table::new("chaos", &["N", "time", "trace_distance", "energy_per_particle"]);
    let mut last = Table::new("chaos_final", &["N", "trace_distance"]);
    let final_time = s.times.last().copied().unwrap_or(0.0);
    let mut out = Outcome {
        config: json!(s),
        ..Outcome::default()
    };
    for r in &rows {
        full.push(vec![r.particles as f64, r.time, r.trace_distance, r.energy_per_particle]);
        if r.time == final_time {
            last.push(vec![r.particles as f64, r.trace_distance]);
            out.metric(&format!("trace_distance_N{}", r.particles), r.trace_distance);
        }
    }
    out.tolerance("krylov", KrylovOptions::default().tolerance);
    out.passed = rows.iter().all(|r| r.tolerance_met);
    out.tables.push(full);
    out.tables.push(last);
    Ok(out)
}

fn residuals(s: &ResidualsSection, seed: u64) -> Result<Outcome> {
    let grid = GridSpec::new(1, s.n)?;
    let system = ManyBodySystem::new(ManyBodyConfig::new(grid, s.particles, s.beta, s.potential)?)?;
    let mut rng = rng_for(seed, 0);
    let psi0 = BosonicState::random_symmetric(grid, s.particles, s.band, &mut rng)?.normalized()?;
    let phi0 = random_band_limited(grid, s.band, &mut rng);
    let opts = KrylovOptions::default();
    let steps = 10;
    let centre = propagate(&system, &psi0, s.warmup, steps, Default::default(), &opts)?.state;
    let mut table = Table::new("residuals", &["spacing", "bbgky", "gp", "lifted_nls"]);
    let mut lift_gap = 0.0f64;
    for &h in &s.spacings {
        let ahead = propagate(&system, &centre, h, 1, Default::default(), &opts)?.state;
        let behind = propagate(&system, &psi0, s.warmup - h, steps, Default::default(), &opts)?.state;
        let bbgky = bbgky_residual(&system, &[behind, centre.clone(), ahead], h, s.k)?;
        let ncfg = NlsConfig::new(grid, s.b0, h / 20.0, false)?;
        let traj = evolve(&phi0, 2.0 * h, &ncfg, 20)?;
        let gp = gp_residual(&traj, s.k, s.b0)?;
        let lifted = lifted_nls_residual(&traj, s.b0)?;
        if s.k == 1 {
            lift_gap = lift_gap.max((gp - lifted).abs());
        }
        table.push(vec![h, bbgky, gp, lifted]);
    }
    let mut out = Outcome {
        config: json!(s),
        ..Outcome::default()
    };
    let mut ok = true;
    let range = s.ratio_min..=s.ratio_max;
    for (i, w) in table.rows.windows(2).enumerate() {
        let (rb, rg) = (w[0][1] / w[1][1], w[0][2] / w[1][2]);
        out.metric(&format!("bbgky_ratio_{i}"), rb);
        out.metric(&format!("gp_ratio_{i}"), rg);
        ok &= range.contains(&rb) && range.contains(&rg);
    }
    if s.k == 1 {
        out.metric("gp_lift_gap", lift_gap);
        ok &= lift_gap < s.lift_tolerance;
        out.tolerance("gp_lift_gap", s.lift_tolerance);
    }
    out.tolerance("ratio_min", s.ratio_min);
    out.tolerance("ratio_max", s.ratio_max);
    out.passed = ok;
    out.tables.push(table);
    Ok(out)
}

fn hufl(s: &HuflSection, seed: u64) -> Result<Outcome> {
    let grid = GridSpec::new(s.dim, s.n)?;
    let mut rng = rng_for(seed, 0);
    let phi = random_band_limited(grid, s.band, &mut rng);
    let gammas: Vec<KthMarginal> = match s.source {
        MarginalSource::Product => (1..=s.max_k).map(|k| product_marginal(&phi, k)).collect::<Result<_>>()?,
        MarginalSource::ManyBody => {
            let system = ManyBodySystem::new(ManyBodyConfig::new(grid, s.particles, s.beta, Default::default())?)?;
            let psi0 = BosonicState::product(&phi, s.particles)?;
            let psi = propagate(&system, &psi0, s.time, 10, Default::default(), &KrylovOptions::default())?.state;
            (1..=s.max_k).map(|k| marginal(&psi, k)).collect::<Result<_>>()?
        }
    };
    let entries = hufl_check(&gammas, s.cutoff, s.eps);
    let tail = sobolev_norm(&project_gt(&phi, s.cutoff), 1.0).powi(2);
    let mut table = Table::new("hufl", &["k", "lhs", "threshold", "holds", "tail_power"]);
    let mut worst = 0.0f64;
    for e in &entries {
        let power = tail.powi(e.k as i32);
        if s.source == MarginalSource::Product {
            worst = worst.max((e.lhs - power).abs() / power.max(f64::MIN_POSITIVE));
        }
        table.push(vec![e.k as f64, e.lhs, e.threshold, flag(e.holds), power]);
    }
    let mut out = Outcome {
        config: json!(s),
        ..Outcome::default()
    };
    out.metric("tail_norm_sq", tail);
    out.passed = true;
    if s.source == MarginalSource::Product {
        out.metric("power_law_error", worst);
        out.tolerance("power_law", s.power_law_tolerance);
        out.passed = worst < s.power_law_tolerance;
    }
    out.tables.push(table);
    Ok(out)
}

fn couplings(s: &CouplingsSection) -> Result<Outcome> {
    let k = s.k;
    let mut out = Outcome {
        config: json!(s),
        ..Outcome::default()
    };
    let map_count = CollapseMap::count(k);
    out.metric("map_count", map_count as f64);
    out.metric("double_factorial", double_factorial(2 * k as i64 - 1) as f64);
    out.metric("board_game_bound", board_game_bound(k) as f64);
    let raw = raw_summand_count(k)?;
    out.metric("raw_summands", raw.expanded as f64);
    out.metric("raw_summands_shifted_formula", raw.shifted_formula as f64);
    let mut table = Table::new("levels", &["k", "map_count", "board_game_bound", "min_unclogged", "lower_bound"]);
    let mut ok = map_count <= board_game_bound(k);
    for j in 1..=k.min(7) {
        let r = min_unclogged(j)?;
        table.push(vec![
            j as f64,
            CollapseMap::count(j) as f64,
            board_game_bound(j) as f64,
            r.min_count as f64,
            r.lower_bound as f64,
        ]);
        ok &= r.min_count >= r.lower_bound;
        if j == k {
            out.metric("min_unclogged", r.min_count as f64);
            out.metric("lower_bound", r.lower_bound as f64);
            out.metric("max_congested", r.max_congested as f64);
            out.metric("expansions_checked", r.expansions_checked as f64);
            out.details.insert("witness".into(), json!(r.witness));
        }
    }
    out.passed = ok;
    out.tables.push(table);
    Ok(out)
}

fn probe_table(report: &ProbeReport) -> Table {
    let mut keys: Vec<String> = report
        .parameter_grid
        .iter()
        .flat_map(|p| p.keys().cloned())
        .collect();
    keys.sort();
    keys.dedup();
    let mut columns = keys.clone();
    columns.extend(["max_ratio", "half_max_ratio", "growth"].map(String::from));
    let mut table = table_with(&format!("ratios_{}", report.lemma_id.name()), columns);
    for row in &report.ratio_table {
        let mut cells: Vec<f64> = keys.iter().map(|k| row.params.get(k).copied().unwrap_or(0.0)).collect();
        cells.extend([row.max_ratio, row.half_max_ratio, row.growth]);
        table.push(cells);
    }
    table
}

fn probe(settings: quintlab_core::probes::ProbeSettings, min_slope: f64) -> Result<Outcome> {
    let report = run_probe(&settings)?;
    let mut out = Outcome {
        config: json!(settings),
        ..Outcome::default()
    };
    out.metric("max_ratio", report.max_ratio);
    out.metric("stable", flag(report.stable));
    for (k, v) in &report.summary {
        out.metric(k, *v);
    }
    out.tolerance("growth", quintlab_core::probes::STABILITY_GROWTH);
    let mut ok = report.stable;
    if settings.lemma == LemmaId::ApproxIdentity {
        out.tolerance("min_slope", min_slope);
        ok &= report.summary.get("min_slope").is_some_and(|s| *s >= min_slope);
    }
    out.passed = ok;
    out.tables.push(probe_table(&report));
    Ok(out)
}
