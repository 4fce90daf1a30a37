//! Strict TOML run configuration: unknown keys are rejected, the
//! physics-relevant keys (d, n, band, q, n_list, …) have no silent
//! defaults, and a config echoed into a result record re-parses to an
//! equal value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const EXPERIMENTS: &[&str] = &[
    "identity_suite",
    "scaling_study",
    "schatten_study",
    "extremizer_search",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: String,
    /// master seed; every cell derives its own stream from it
    #[serde(default)]
    pub seed: u64,
    pub grid: GridConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<IdentityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schatten: Option<SchattenConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extremizer: Option<ExtremizerConfig>,
    #[serde(default, skip_serializing_if = "GatesConfig::is_empty")]
    pub gates: GatesConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub d: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// default: runs/<experiment>
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    /// main | triangle | lorentz | interpolated | lieb_sob
    pub variant: String,
    pub n_list: Vec<usize>,
    /// norm order: q of the negative Sobolev norm, or p of the L^p norm for
    /// the triangle baseline
    pub q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// ascent steps for the certified dual lower bound (d >= 3, main)
    #[serde(default)]
    pub dual_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    /// semiclassical_pair | one_sided | random_pair | h1_modes
    pub recipe: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// auto | same_index | shifted | quarter_turn (auto: quarter_turn in
    /// d = 2, shifted in d >= 3)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairing: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_mode: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityConfig {
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// field/symbol band; default keeps triple products exactly integrable
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<f64>,
}

fn default_trials() -> usize {
    20
}

impl Default for IdentityConfig {
    fn default() -> Self {
        Self {
            trials: default_trials(),
            band: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchattenConfig {
    /// commutator | cwikel
    pub which: String,
    pub band: f64,
    /// weak-Schatten order
    pub p: f64,
    pub u_recipes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtremizerConfig {
    pub members: usize,
    pub pool: usize,
    pub q: f64,
    pub steps: usize,
    #[serde(default = "default_step_size")]
    pub step_size: f64,
}

fn default_step_size() -> f64 {
    0.2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GatesConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_ratio_spread: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_identity_deviation: Option<f64>,
    /// tail-slope target and tolerance, gated together
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_tol: Option<f64>,
}

impl GatesConfig {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

/// Parse and validate; either a usable config or the full list of
/// violations, each with its key path.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig =
        toml::from_str(text).map_err(|e| Error::Config(vec![format!("parse error: {e}")]))?;
    let violations = validate(&config);
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(Error::Config(violations))
    }
}

pub fn validate(config: &RunConfig) -> Vec<String> {
    let mut v = Vec::new();
    let d = config.grid.d;
    if d < 2 {
        v.push(format!("grid.d: d >= 2 is required (got {d})"));
    }
    if config.grid.n < 4 || !config.grid.n.is_multiple_of(2) {
        v.push(format!(
            "grid.n: an even n >= 4 is required (got {})",
            config.grid.n
        ));
    }
    match config.experiment.as_str() {
        "identity_suite" => {
            if let Some(id) = &config.identity {
                if id.trials == 0 {
                    v.push("identity.trials: at least one trial".into());
                }
            }
        }
        "scaling_study" => {
            let Some(study) = &config.study else {
                v.push("study: section required for scaling_study".into());
                return v;
            };
            if study.n_list.is_empty() {
                v.push("study.n_list: must be nonempty".into());
            }
            if study.n_list.windows(2).any(|w| w[1] <= w[0]) {
                v.push("study.n_list: must be strictly increasing".into());
            }
            let dd = d.max(2) as f64;
            match study.variant.as_str() {
                "main" => {
                    if !(study.q > 1.0) {
                        v.push(format!("study.q: q > 1 required (got {})", study.q));
                    }
                }
                "triangle" => {
                    if !(study.q >= 1.0) {
                        v.push(format!("study.q: p >= 1 required (got {})", study.q));
                    }
                }
                "lorentz" => {
                    if study.weights.is_none() {
                        v.push("study.weights: the lorentz variant needs weights".into());
                    }
                    if !(study.q > 1.0) {
                        v.push(format!("study.q: q > 1 required (got {})", study.q));
                    }
                }
                "interpolated" => {
                    if !(study.q > 1.0 && study.q < dd / (dd - 1.0)) {
                        v.push(format!(
                            "study.q: 1 < q < d/(d-1) = {} required (got {})",
                            dd / (dd - 1.0),
                            study.q
                        ));
                    }
                }
                "lieb_sob" => {
                    if d < 3 {
                        v.push(format!(
                            "study.variant: lieb_sob needs d >= 3 (grid.d = {d})"
                        ));
                    }
                }
                other => v.push(format!("study.variant: unknown variant `{other}`")),
            }
            if let Some(w) = &study.weights {
                if let Some(max_n) = study.n_list.last() {
                    if w.len() < *max_n {
                        v.push(format!(
                            "study.weights: need at least {} entries (got {})",
                            max_n,
                            w.len()
                        ));
                    }
                }
                if w.iter().any(|x| *x < 0.0) {
                    v.push("study.weights: entries must be nonnegative".into());
                }
            }
            let Some(family) = &config.family else {
                v.push("family: section required for scaling_study".into());
                return v;
            };
            match family.recipe.as_str() {
                "semiclassical_pair" => {
                    if family.radius.is_none() {
                        v.push("family.radius: required for semiclassical_pair".into());
                    }
                    if let Some(p) = &family.pairing {
                        if !["auto", "same_index", "shifted", "quarter_turn"]
                            .contains(&p.as_str())
                        {
                            v.push(format!("family.pairing: unknown rule `{p}`"));
                        }
                        if p == "quarter_turn" && d != 2 {
                            v.push("family.pairing: quarter_turn needs d = 2".into());
                        }
                    }
                }
                "one_sided" => {
                    if family.radius.is_none() {
                        v.push("family.radius: required for one_sided".into());
                    }
                    if family.e_mode.is_none() {
                        v.push("family.e_mode: required for one_sided".into());
                    } else if family.e_mode.as_ref().map(|m| m.len()) != Some(d) {
                        v.push("family.e_mode: must have d components".into());
                    }
                }
                "random_pair" => {
                    if family.count.is_none() {
                        v.push("family.count: required for random_pair".into());
                    }
                    if family.band.is_none() {
                        v.push("family.band: required for random_pair".into());
                    }
                }
                "h1_modes" => {
                    if family.radius.is_none() {
                        v.push("family.radius: required for h1_modes".into());
                    }
                    if family.m.is_none() {
                        v.push("family.m: required for h1_modes".into());
                    }
                    if study.variant != "lieb_sob" {
                        v.push("family.recipe: h1_modes pairs with variant lieb_sob".into());
                    }
                }
                other => v.push(format!("family.recipe: unknown recipe `{other}`")),
            }
            if study.variant == "lieb_sob" && family.recipe != "h1_modes" {
                v.push("study.variant: lieb_sob needs family.recipe = h1_modes".into());
            }
        }
        "schatten_study" => {
            let Some(sch) = &config.schatten else {
                v.push("schatten: section required for schatten_study".into());
                return v;
            };
            match sch.which.as_str() {
                "commutator" => {}
                "cwikel" => {
                    if d < 3 {
                        v.push(format!(
                            "schatten.which: the cwikel study needs d >= 3 (grid.d = {d})"
                        ));
                    }
                }
                other => v.push(format!("schatten.which: unknown operator `{other}`")),
            }
            if !(sch.band >= 1.0) {
                v.push(format!("schatten.band: band >= 1 required (got {})", sch.band));
            }
            if config.grid.n >= 4 && sch.band > (config.grid.n / 2 - 1) as f64 {
                v.push(format!(
                    "schatten.band: band {} exceeds the lattice limit {} for n = {}",
                    sch.band,
                    config.grid.n / 2 - 1,
                    config.grid.n
                ));
            }
            if !(sch.p > 0.0) {
                v.push(format!("schatten.p: p > 0 required (got {})", sch.p));
            }
            if sch.u_recipes.is_empty() {
                v.push("schatten.u_recipes: at least one symbol recipe".into());
            }
        }
        "extremizer_search" => {
            let Some(ext) = &config.extremizer else {
                v.push("extremizer: section required for extremizer_search".into());
                return v;
            };
            if ext.members == 0 {
                v.push("extremizer.members: at least one pair".into());
            }
            if 2 * ext.pool < ext.members {
                v.push(format!(
                    "extremizer.pool: pool of {} modes is smaller than {} members",
                    ext.pool, ext.members
                ));
            }
            if !(ext.q > 1.0) {
                v.push(format!("extremizer.q: q > 1 required (got {})", ext.q));
            }
            if !(ext.step_size > 0.0) {
                v.push("extremizer.step_size: must be positive".into());
            }
        }
        other => v.push(format!("experiment: unknown experiment `{other}`")),
    }
    if let (Some(_), None) | (None, Some(_)) = (config.gates.slope, config.gates.slope_tol) {
        v.push("gates: slope and slope_tol must be given together".into());
    }
    v
}

/// Canonical echo used inside result records.
pub fn canonical_toml(config: &RunConfig) -> String {
    toml::to_string_pretty(config).expect("config serializes")
}
