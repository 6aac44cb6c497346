//! TOML experiment configuration. Every experiment kind reads its own section;
//! missing sections fall back to defaults and unknown keys are rejected.

use std::path::{Path, PathBuf};

use quintlab_core::manybody::{PotentialProfile, Propagator};
use quintlab_core::probes::{LemmaId, ProbeSettings};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    NlsRun,
    ManybodyRun,
    Chaos,
    Residuals,
    Hufl,
    Couplings,
    Probe,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::NlsRun => "nls-run",
            Self::ManybodyRun => "manybody-run",
            Self::Chaos => "chaos",
            Self::Residuals => "residuals",
            Self::Hufl => "hufl",
            Self::Couplings => "couplings",
            Self::Probe => "probe",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub nls: NlsSection,
    #[serde(default)]
    pub manybody: ManyBodySection,
    #[serde(default)]
    pub chaos: ChaosSection,
    #[serde(default)]
    pub residuals: ResidualsSection,
    #[serde(default)]
    pub hufl: HuflSection,
    #[serde(default)]
    pub couplings: CouplingsSection,
    #[serde(default)]
    pub probe: ProbeSection,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatumKind {
    #[default]
    BandLimited,
    PowerLaw,
    PlaneWave,
}

/// Initial one-particle datum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatumSection {
    pub kind: DatumKind,
    /// Largest `|ξ|_∞` carried by random data.
    pub band: f64,
    /// `⟨ξ⟩^{−decay}` weight of power-law data.
    pub decay: f64,
    /// Root-mean-square amplitude.
    pub rms: f64,
    /// Frequency of the plane wave.
    pub frequency: Vec<i64>,
}

impl Default for DatumSection {
    fn default() -> Self {
        Self {
            kind: DatumKind::BandLimited,
            band: 2.0,
            decay: 1.0,
            rms: 0.5,
            frequency: vec![1, 0, 0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NlsSection {
    pub dim: usize,
    pub n: usize,
    pub b0: f64,
    pub dt: f64,
    pub time: f64,
    pub snapshot_every: usize,
    pub dealias: bool,
    /// Cutoffs of the energy-split columns.
    pub cutoffs: Vec<f64>,
    pub utfl_eps: f64,
    pub mass_tolerance: f64,
    pub datum: DatumSection,
}

impl Default for NlsSection {
    fn default() -> Self {
        Self {
            dim: 3,
            n: 16,
            b0: 1.0,
            dt: 0.005,
            time: 0.5,
            snapshot_every: 10,
            dealias: false,
            cutoffs: vec![2.0, 4.0],
            utfl_eps: 1e-3,
            mass_tolerance: 1e-11,
            datum: DatumSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ManyBodySection {
    pub dim: usize,
    pub n: usize,
    pub particles: usize,
    pub beta: f64,
    pub potential: PotentialProfile,
    pub time: f64,
    pub steps: usize,
    pub propagator: Propagator,
    /// Band of the initial data.
    pub band: f64,
    /// Start from `φ^{⊗N}` instead of a random symmetric state.
    pub product: bool,
    /// Constant of the stability check.
    pub stability_c1: f64,
    pub norm_tolerance: f64,
}

impl Default for ManyBodySection {
    fn default() -> Self {
        Self {
            dim: 1,
            n: 8,
            particles: 3,
            beta: 0.1,
            potential: PotentialProfile::default(),
            time: 0.2,
            steps: 20,
            propagator: Propagator::Krylov,
            band: 2.0,
            product: true,
            stability_c1: 0.05,
            norm_tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChaosSection {
    pub dim: usize,
    pub n: usize,
    pub particles: Vec<usize>,
    pub beta: f64,
    pub potential: PotentialProfile,
    pub times: Vec<f64>,
    pub band: f64,
    pub steps_per_unit: usize,
    pub nls_dt: f64,
    /// NLS coupling; the mean-field value when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
}

impl Default for ChaosSection {
    fn default() -> Self {
        Self {
            dim: 1,
            n: 8,
            particles: vec![2, 3, 4],
            beta: 0.1,
            potential: PotentialProfile::default(),
            times: vec![0.1, 0.2],
            band: 2.0,
            steps_per_unit: 50,
            nls_dt: 1e-3,
            coupling: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResidualsSection {
    pub n: usize,
    pub particles: usize,
    pub beta: f64,
    pub potential: PotentialProfile,
    pub k: usize,
    pub b0: f64,
    /// Snapshot spacings, each refining the previous one.
    pub spacings: Vec<f64>,
    pub band: f64,
    /// Many-body evolution time before the residual is sampled.
    pub warmup: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// Largest gap between the product GP residual and the lifted NLS residual.
    pub lift_tolerance: f64,
}

impl Default for ResidualsSection {
    fn default() -> Self {
        Self {
            n: 8,
            particles: 3,
            beta: 0.05,
            potential: PotentialProfile::default(),
            k: 1,
            b0: 1.0,
            spacings: vec![0.004, 0.002],
            band: 2.0,
            warmup: 0.1,
            ratio_min: 3.0,
            ratio_max: 5.0,
            lift_tolerance: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarginalSource {
    /// `|φ⟩⟨φ|^{⊗k}`.
    #[default]
    Product,
    /// Marginals of an evolved many-body state.
    ManyBody,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HuflSection {
    pub dim: usize,
    pub n: usize,
    pub band: f64,
    pub max_k: usize,
    pub cutoff: f64,
    pub eps: f64,
    pub source: MarginalSource,
    pub particles: usize,
    pub beta: f64,
    pub time: f64,
    pub power_law_tolerance: f64,
}

impl Default for HuflSection {
    fn default() -> Self {
        Self {
            dim: 1,
            n: 8,
            band: 4.0,
            max_k: 3,
            cutoff: 2.0,
            eps: 0.5,
            source: MarginalSource::Product,
            particles: 3,
            beta: 0.1,
            time: 0.1,
            power_law_tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingsSection {
    pub k: usize,
}

impl Default for CouplingsSection {
    fn default() -> Self {
        Self { k: 3 }
    }
}

/// Overrides on top of the defaults of the chosen lemma.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma: Option<LemmaId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nt: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_slope: Option<f64>,
}

/// Default lower bound on the fitted approximation-of-identity rate.
pub const MIN_SLOPE: f64 = 0.35;

impl ProbeSection {
    pub fn resolve(&self, lemma: LemmaId, seed: u64) -> ProbeSettings {
        let base = ProbeSettings::default_for(lemma);
        ProbeSettings {
            lemma,
            seed,
            samples: self.samples.unwrap_or(base.samples),
            n: self.n.unwrap_or(base.n),
            nt: self.nt.unwrap_or(base.nt),
            time: self.time.unwrap_or(base.time),
            exponent: self.exponent.unwrap_or(base.exponent),
            delta: self.delta.unwrap_or(base.delta),
            cutoffs: self.cutoffs.clone().unwrap_or(base.cutoffs),
            upper: self.upper.clone().unwrap_or(base.upper),
            alphas: self.alphas.clone().unwrap_or(base.alphas),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(vec![e.message().to_string()]))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(vec![format!("config {}: {e}", path.display())]))?;
        Self::parse(&text)
    }

    pub fn emit(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    /// Every offending field of the section used by `kind`.
    pub fn validate(&self, kind: ExperimentKind) -> Vec<String> {
        let mut v = Checks::default();
        match kind {
            ExperimentKind::NlsRun => {
                let s = &self.nls;
                v.grid("nls", s.dim, s.n);
                v.nonneg("nls.b0", s.b0);
                v.positive("nls.dt", s.dt);
                v.nonneg("nls.time", s.time);
                if s.dt > 0.0 && s.time >= 0.0 {
                    let steps = s.time / s.dt;
                    if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
                        v.fail("nls.time", "must be a whole number of steps dt");
                    }
                }
                v.at_least("nls.snapshot_every", s.snapshot_every, 1);
                v.all_positive("nls.cutoffs", &s.cutoffs, false);
                v.positive("nls.utfl_eps", s.utfl_eps);
                v.positive("nls.mass_tolerance", s.mass_tolerance);
                v.datum("nls.datum", &s.datum, s.dim, s.n);
            }
            ExperimentKind::ManybodyRun => {
                let s = &self.manybody;
                v.grid("manybody", s.dim, s.n);
                v.at_least("manybody.particles", s.particles, 1);
                v.unit_interval("manybody.beta", s.beta, false);
                v.potential("manybody.potential", &s.potential);
                v.nonneg("manybody.time", s.time);
                v.at_least("manybody.steps", s.steps, 1);
                v.positive("manybody.band", s.band);
                v.unit_interval("manybody.stability_c1", s.stability_c1, true);
                v.positive("manybody.norm_tolerance", s.norm_tolerance);
            }
            ExperimentKind::Chaos => {
                let s = &self.chaos;
                v.grid("chaos", s.dim, s.n);
                if s.particles.is_empty() || s.particles.contains(&0) {
                    v.fail("chaos.particles", "must be a nonempty list of positive counts");
                }
                v.unit_interval("chaos.beta", s.beta, false);
                v.potential("chaos.potential", &s.potential);
                if s.times.is_empty()
                    || s.times.iter().any(|t| !(*t >= 0.0))
                    || s.times.windows(2).any(|w| w[1] < w[0])
                {
                    v.fail("chaos.times", "must be a nonempty nondecreasing list of times >= 0");
                }
                v.positive("chaos.band", s.band);
                v.at_least("chaos.steps_per_unit", s.steps_per_unit, 1);
                v.positive("chaos.nls_dt", s.nls_dt);
                if let Some(c) = s.coupling {
                    v.nonneg("chaos.coupling", c);
                }
            }
            ExperimentKind::Residuals => {
                let s = &self.residuals;
                v.grid("residuals", 1, s.n);
                v.at_least("residuals.particles", s.particles, 1);
                v.unit_interval("residuals.beta", s.beta, false);
                v.potential("residuals.potential", &s.potential);
                v.at_least("residuals.k", s.k, 1);
                if s.k > s.particles {
                    v.fail("residuals.k", "must not exceed residuals.particles");
                }
                v.nonneg("residuals.b0", s.b0);
                v.all_positive("residuals.spacings", &s.spacings, false);
                if s.spacings.len() < 2 {
                    v.fail("residuals.spacings", "need at least two spacings");
                }
                v.positive("residuals.band", s.band);
                v.nonneg("residuals.warmup", s.warmup);
                if s.spacings.iter().any(|h| *h > s.warmup) {
                    v.fail("residuals.warmup", "must be at least the largest spacing");
                }
                if !(s.ratio_min > 0.0 && s.ratio_min < s.ratio_max) {
                    v.fail("residuals.ratio_min", "need 0 < ratio_min < ratio_max");
                }
                v.positive("residuals.lift_tolerance", s.lift_tolerance);
            }
            ExperimentKind::Hufl => {
                let s = &self.hufl;
                v.grid("hufl", s.dim, s.n);
                v.positive("hufl.band", s.band);
                v.at_least("hufl.max_k", s.max_k, 1);
                v.nonneg("hufl.cutoff", s.cutoff);
                v.positive("hufl.eps", s.eps);
                v.positive("hufl.power_law_tolerance", s.power_law_tolerance);
                if s.source == MarginalSource::ManyBody {
                    v.at_least("hufl.particles", s.particles, 1);
                    if s.max_k > s.particles {
                        v.fail("hufl.max_k", "must not exceed hufl.particles");
                    }
                    v.unit_interval("hufl.beta", s.beta, false);
                    v.nonneg("hufl.time", s.time);
                }
            }
            ExperimentKind::Couplings => {
                let k = self.couplings.k;
                if !(1..=10).contains(&k) {
                    v.fail("couplings.k", format!("must lie in 1..=10, got {k}"));
                }
            }
            ExperimentKind::Probe => {
                let p = &self.probe;
                if let Some(s) = p.samples {
                    v.at_least("probe.samples", s, 2);
                }
                if let Some(n) = p.n {
                    if n < 4 || n % 2 == 1 {
                        v.fail("probe.n", format!("must be even and >= 4, got {n}"));
                    }
                }
                if let Some(nt) = p.nt {
                    v.at_least("probe.nt", nt, 2);
                }
                if let Some(t) = p.time {
                    v.positive("probe.time", t);
                }
                if let Some(a) = &p.alphas {
                    v.all_positive("probe.alphas", a, false);
                }
                if let Some(c) = &p.cutoffs {
                    v.all_positive("probe.cutoffs", c, true);
                }
                if let Some(u) = &p.upper {
                    v.all_positive("probe.upper", u, false);
                }
            }
        }
        v.errors
    }
}

#[derive(Default)]
struct Checks {
    errors: Vec<String>,
}

impl Checks {
    fn fail(&mut self, field: &str, reason: impl std::fmt::Display) {
        self.errors.push(format!("{field}: {reason}"));
    }

    fn grid(&mut self, section: &str, dim: usize, n: usize) {
        if !(1..=3).contains(&dim) {
            self.fail(&format!("{section}.dim"), format!("must be 1, 2 or 3, got {dim}"));
        }
        if n < 4 || n % 2 == 1 {
            self.fail(&format!("{section}.n"), format!("must be even and >= 4, got {n}"));
        }
    }

    fn positive(&mut self, field: &str, x: f64) {
        if !(x > 0.0 && x.is_finite()) {
            self.fail(field, format!("must be positive, got {x}"));
        }
    }

    fn nonneg(&mut self, field: &str, x: f64) {
        if !(x >= 0.0 && x.is_finite()) {
            self.fail(field, format!("must be >= 0, got {x}"));
        }
    }

    fn unit_interval(&mut self, field: &str, x: f64, closed: bool) {
        let ok = if closed { (0.0..=1.0).contains(&x) } else { (0.0..1.0).contains(&x) };
        if !ok {
            let hi = if closed { "]" } else { ")" };
            self.fail(field, format!("must lie in [0, 1{hi}, got {x}"));
        }
    }

    fn at_least(&mut self, field: &str, x: usize, min: usize) {
        if x < min {
            self.fail(field, format!("must be >= {min}, got {x}"));
        }
    }

    fn all_positive(&mut self, field: &str, xs: &[f64], allow_zero: bool) {
        if xs.is_empty() {
            self.fail(field, "must not be empty");
        } else if xs.iter().any(|x| !(x.is_finite() && (*x > 0.0 || (allow_zero && *x == 0.0)))) {
            self.fail(field, "entries must be positive");
        }
    }

    fn potential(&mut self, field: &str, p: &PotentialProfile) {
        match *p {
            PotentialProfile::TruncatedGaussian { sigma, mass } => {
                self.positive(&format!("{field}.sigma"), sigma);
                self.nonneg(&format!("{field}.mass"), mass);
            }
            PotentialProfile::Constant { value } => self.nonneg(&format!("{field}.value"), value),
            PotentialProfile::Zero => {}
        }
    }

    fn datum(&mut self, field: &str, d: &DatumSection, dim: usize, n: usize) {
        self.positive(&format!("{field}.rms"), d.rms);
        match d.kind {
            DatumKind::BandLimited | DatumKind::PowerLaw => {
                self.positive(&format!("{field}.band"), d.band);
                if d.band > (n / 2) as f64 {
                    self.fail(&format!("{field}.band"), format!("must not exceed n/2 = {}", n / 2));
                }
                if d.kind == DatumKind::PowerLaw {
                    self.nonneg(&format!("{field}.decay"), d.decay);
                }
            }
            DatumKind::PlaneWave => {
                if d.frequency.len() < dim {
                    self.fail(&format!("{field}.frequency"), format!("needs {dim} components"));
                } else if d.frequency.iter().any(|k| k.unsigned_abs() as usize >= n / 2) {
                    self.fail(&format!("{field}.frequency"), "components must stay below n/2");
                }
            }
        }
    }
}
