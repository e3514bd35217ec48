use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fbm::{GeneratorTag, HurstParam, TimeGrid};
use crate::limit::EpsilonLadder;
use crate::sde::SdeSpec;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "SFBM_OUTPUT_DIR";
/// Used when neither the config nor the environment names a directory.
pub const DEFAULT_OUTPUT_DIR: &str = "sfbm-output";

/// Identifier of one verification check, used as the report key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    Ordering,
    Nesting,
    UpperBound,
    MeasureDecay,
    Nonnegativity,
    Compensator,
    Contraction,
    EpsContinuity,
    EndpointLimits,
    InitialIdentity,
    RestartRefinement,
}

impl CheckId {
    pub const ALL: [CheckId; 11] = [
        CheckId::Ordering,
        CheckId::Nesting,
        CheckId::UpperBound,
        CheckId::MeasureDecay,
        CheckId::Nonnegativity,
        CheckId::Compensator,
        CheckId::Contraction,
        CheckId::EpsContinuity,
        CheckId::EndpointLimits,
        CheckId::InitialIdentity,
        CheckId::RestartRefinement,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckId::Ordering => "ordering",
            CheckId::Nesting => "nesting",
            CheckId::UpperBound => "upper_bound",
            CheckId::MeasureDecay => "measure_decay",
            CheckId::Nonnegativity => "nonnegativity",
            CheckId::Compensator => "compensator",
            CheckId::Contraction => "contraction",
            CheckId::EpsContinuity => "eps_continuity",
            CheckId::EndpointLimits => "endpoint_limits",
            CheckId::InitialIdentity => "initial_identity",
            CheckId::RestartRefinement => "restart_refinement",
        }
    }

    /// One-line statement of what the check asserts.
    pub fn description(self) -> &'static str {
        match self {
            CheckId::Ordering => "ladder levels increase as epsilon decreases (shared noise)",
            CheckId::Nesting => "nonpositive node sets shrink down the ladder",
            CheckId::UpperBound => "every level stays below X0 + a T^2H/(H X0) + 2 sigma max|B|",
            CheckId::MeasureDecay => "time spent at or below zero is nonincreasing down the ladder",
            CheckId::Nonnegativity => "the limit estimate is nonnegative up to the Cauchy gap",
            CheckId::Compensator => {
                "the reflection compensator is nonnegative (zero without noise)"
            }
            CheckId::Contraction => "Picard iteration contracts at the certified rate near t = 0",
            CheckId::EpsContinuity => "solutions depend continuously on epsilon",
            CheckId::EndpointLimits => "the limit path vanishes at excursion endpoints",
            CheckId::InitialIdentity => "the integral identity holds on the first excursion",
            CheckId::RestartRefinement => "restart residuals shrink under nested grid refinement",
        }
    }

    /// Fraction of paths allowed to fail when the config gives none.
    pub fn default_allowance(self) -> f64 {
        match self {
            CheckId::Compensator => 0.05,
            _ => 0.0,
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    pub x0: f64,
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
    pub hurst: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub horizon: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderConfig {
    pub base: f64,
    pub ratio: f64,
    pub depth: usize,
}

impl LadderConfig {
    pub fn build(&self) -> Result<EpsilonLadder<f64>> {
        EpsilonLadder::new(self.base, self.ratio, self.depth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedConfig {
    pub master_seed: u64,
    pub paths: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub tol_mono: f64,
    pub tol_bound: f64,
    /// Added to the Cauchy gap for the nonnegativity check.
    pub tol_nonneg: f64,
    /// Added to `2·gap + truncation` for the compensator sign check.
    pub tol_compensator: f64,
    /// Added to the Cauchy gap at excursion endpoints.
    pub tol_endpoint: f64,
    pub picard: f64,
    /// Allowed excess of measured Picard ratios over `q`.
    pub picard_slack: f64,
    /// Largest admissible last-level nonpositive measure, as a fraction of `T`.
    pub measure_threshold: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_mono: 1e-12,
            tol_bound: 1e-9,
            tol_nonneg: 1e-9,
            tol_compensator: 1e-6,
            tol_endpoint: 1e-6,
            picard: 1e-10,
            picard_slack: 0.05,
            measure_threshold: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuityConfig {
    pub eps_star: f64,
    pub steps: Vec<f64>,
}

impl Default for ContinuityConfig {
    fn default() -> Self {
        Self {
            eps_star: 0.05,
            steps: vec![0.025, 0.0125, 0.00625, 0.003125],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExcursionConfig {
    /// Retreat from each zero, in grid steps.
    pub margin: usize,
    /// Nodes inspected next to each zero.
    pub approach: usize,
    /// Windows with fewer interior nodes are skipped by the refinement study.
    pub min_interior: usize,
}

impl Default for ExcursionConfig {
    fn default() -> Self {
        Self {
            margin: crate::excursion::DEFAULT_MARGIN,
            approach: crate::excursion::DEFAULT_APPROACH,
            min_interior: 20,
        }
    }
}

fn default_generator() -> GeneratorTag {
    GeneratorTag::Circulant
}

fn default_checks() -> Vec<CheckId> {
    CheckId::ALL.to_vec()
}

fn default_true() -> bool {
    true
}

/// Everything a campaign depends on. Parsing rejects unknown keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec: SpecConfig,
    pub grid: GridConfig,
    pub ladder: LadderConfig,
    pub seeds: SeedConfig,
    /// Circulant falls back to Cholesky if the embedding fails.
    #[serde(default = "default_generator")]
    pub generator: GeneratorTag,
    /// Replace the noise by zero (deterministic mode).
    #[serde(default)]
    pub zero_noise: bool,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_checks")]
    pub checks: Vec<CheckId>,
    /// Per-check ladder used instead of `ladder`.
    #[serde(default)]
    pub ladder_overrides: BTreeMap<CheckId, LadderConfig>,
    /// Fraction of paths allowed to fail, per check.
    #[serde(default)]
    pub allowances: BTreeMap<CheckId, f64>,
    #[serde(default)]
    pub continuity: ContinuityConfig,
    #[serde(default)]
    pub excursions: ExcursionConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Write per-path CSVs next to the report.
    #[serde(default = "default_true")]
    pub write_paths: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.sde_spec()?;
        self.time_grid()?;
        self.ladder.build()?;
        for (id, l) in &self.ladder_overrides {
            l.build()
                .map_err(|e| Error::Config(format!("ladder override for {id}: {e}")))?;
        }
        if self.seeds.paths == 0 {
            return bad("path count must be at least 1".into());
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tol_mono", t.tol_mono),
            ("tol_bound", t.tol_bound),
            ("tol_nonneg", t.tol_nonneg),
            ("tol_compensator", t.tol_compensator),
            ("tol_endpoint", t.tol_endpoint),
            ("picard_slack", t.picard_slack),
            ("measure_threshold", t.measure_threshold),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!(
                    "tolerance {name} must be finite and nonnegative, got {v}"
                ));
            }
        }
        if !(t.picard > 0.0 && t.picard.is_finite()) {
            return bad(format!(
                "picard tolerance must be positive, got {}",
                t.picard
            ));
        }
        for (id, &f) in &self.allowances {
            if !(0.0..=1.0).contains(&f) {
                return bad(format!("allowance for {id} must lie in [0, 1], got {f}"));
            }
        }
        let c = &self.continuity;
        if !(c.eps_star > 0.0)
            || c.steps.is_empty()
            || c.steps.iter().any(|&h| !(h > 0.0 && h < c.eps_star))
            || c.steps.windows(2).any(|w| !(w[1] < w[0]))
        {
            return bad(
                "continuity needs eps_star > 0 and decreasing steps in (0, eps_star)".into(),
            );
        }
        let mut seen = std::collections::BTreeSet::new();
        if let Some(id) = self.checks.iter().find(|id| !seen.insert(**id)) {
            return bad(format!("check {id} listed twice"));
        }
        Ok(())
    }

    pub fn sde_spec(&self) -> Result<SdeSpec<f64>> {
        let s = &self.spec;
        SdeSpec::new(s.x0, s.a, s.b, s.sigma, HurstParam::new(s.hurst)?)
    }

    pub fn time_grid(&self) -> Result<TimeGrid<f64>> {
        TimeGrid::new(self.grid.horizon, self.grid.steps)
    }

    pub fn ladder_for(&self, id: CheckId) -> LadderConfig {
        self.ladder_overrides
            .get(&id)
            .copied()
            .unwrap_or(self.ladder)
    }

    pub fn allowance(&self, id: CheckId) -> f64 {
        self.allowances
            .get(&id)
            .copied()
            .unwrap_or(id.default_allowance())
    }

    /// Hex SHA-256 of the canonical JSON serialisation.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        let digest = Sha256::digest(bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Config value, then the environment variable, then the fallback.
    pub fn resolve_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }

    /// The deterministic smoke campaign: zero noise, one path, every check.
    pub fn deterministic_preset() -> Self {
        Self {
            spec: SpecConfig {
                x0: 1.0,
                a: 1.0,
                b: 0.0,
                sigma: 1.0,
                hurst: 0.25,
            },
            grid: GridConfig {
                horizon: 1.0,
                steps: 1024,
            },
            ladder: LadderConfig {
                base: 0.1,
                ratio: 0.25,
                depth: 10,
            },
            seeds: SeedConfig {
                master_seed: 0,
                paths: 1,
            },
            generator: GeneratorTag::Circulant,
            zero_noise: true,
            tolerances: Tolerances::default(),
            checks: default_checks(),
            ladder_overrides: BTreeMap::new(),
            allowances: BTreeMap::new(),
            continuity: ContinuityConfig::default(),
            excursions: ExcursionConfig::default(),
            output_dir: None,
            write_paths: true,
        }
    }
}
