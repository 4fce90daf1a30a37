//! Experiment dispatch and deterministic result emission: one run produces
//! record.json, series.csv, and summary.txt in its output directory, plus a
//! directory-level report aggregator. Identical config and seed give
//! byte-identical record.json and series.csv; wall clock appears only in
//! the summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

use crate::config::{canonical_toml, RunConfig, EXPERIMENTS};
use crate::error::{Error, Result};
use crate::experiment::{
    extremizer_search, identity_suite, scaling_study, schatten_study, ExperimentRecord,
    ExtremizerInputs, FamilyRecipe, GateResult, IdentityParams, Pairing, ScalingInputs,
    ScalingVariant, SchattenInputs, SchattenKind,
};
use crate::grid::Grid;
use crate::norms::SequenceWeights;

pub fn list_experiments() -> &'static [&'static str] {
    EXPERIMENTS
}

pub struct RunOutcome {
    pub record: ExperimentRecord,
    pub gates_passed: bool,
    pub out_dir: PathBuf,
}

fn resolve_variant(name: &str) -> Result<ScalingVariant> {
    Ok(match name {
        "main" => ScalingVariant::Main,
        "triangle" => ScalingVariant::Triangle,
        "lorentz" => ScalingVariant::Lorentz,
        "interpolated" => ScalingVariant::Interpolated,
        "lieb_sob" => ScalingVariant::LiebSob,
        other => return Err(Error::UnknownExperiment(format!("variant `{other}`"))),
    })
}

fn resolve_recipe(config: &RunConfig) -> Result<FamilyRecipe> {
    let family = config
        .family
        .as_ref()
        .ok_or_else(|| Error::Config(vec!["family: section required".into()]))?;
    let missing = |key: &str| Error::Config(vec![format!("family.{key}: required")]);
    Ok(match family.recipe.as_str() {
        "semiclassical_pair" => {
            let pairing = match family.pairing.as_deref().unwrap_or("auto") {
                "auto" => {
                    if config.grid.d == 2 {
                        Pairing::QuarterTurn
                    } else {
                        Pairing::Shifted(family.shift.unwrap_or(1))
                    }
                }
                "same_index" => Pairing::SameIndex,
                "shifted" => Pairing::Shifted(family.shift.unwrap_or(1)),
                "quarter_turn" => Pairing::QuarterTurn,
                other => {
                    return Err(Error::Config(vec![format!(
                        "family.pairing: unknown rule `{other}`"
                    )]))
                }
            };
            FamilyRecipe::SemiclassicalPair {
                radius: family.radius.ok_or_else(|| missing("radius"))?,
                pairing,
            }
        }
        "one_sided" => FamilyRecipe::OneSided {
            radius: family.radius.ok_or_else(|| missing("radius"))?,
            e_mode: family.e_mode.clone().ok_or_else(|| missing("e_mode"))?,
        },
        "random_pair" => FamilyRecipe::RandomPair {
            count: family.count.ok_or_else(|| missing("count"))?,
            band: family.band.ok_or_else(|| missing("band"))?,
        },
        "h1_modes" => FamilyRecipe::H1Modes {
            radius: family.radius.ok_or_else(|| missing("radius"))?,
            m: family.m.ok_or_else(|| missing("m"))?,
        },
        other => {
            return Err(Error::Config(vec![format!(
                "family.recipe: unknown recipe `{other}`"
            )]))
        }
    })
}

fn dispatch(config: &RunConfig) -> Result<ExperimentRecord> {
    let grid = Grid::new(config.grid.d, config.grid.n)?;
    match config.experiment.as_str() {
        "identity_suite" => {
            let id = config.identity.unwrap_or_default();
            identity_suite(
                grid,
                config.seed,
                IdentityParams {
                    trials: id.trials,
                    band: id.band,
                },
            )
        }
        "scaling_study" => {
            let study = config
                .study
                .as_ref()
                .ok_or_else(|| Error::Config(vec!["study: section required".into()]))?;
            let weights = study
                .weights
                .as_ref()
                .map(|w| SequenceWeights::new(w.clone()))
                .transpose()?;
            let inputs = ScalingInputs {
                variant: resolve_variant(&study.variant)?,
                recipe: resolve_recipe(config)?,
                n_list: study.n_list.clone(),
                q: study.q,
                weights,
                dual_steps: study.dual_steps,
            };
            scaling_study(grid, &inputs, config.seed)
        }
        "schatten_study" => {
            let sch = config
                .schatten
                .as_ref()
                .ok_or_else(|| Error::Config(vec!["schatten: section required".into()]))?;
            let which = match sch.which.as_str() {
                "commutator" => SchattenKind::Commutator,
                "cwikel" => SchattenKind::Cwikel,
                other => {
                    return Err(Error::Config(vec![format!(
                        "schatten.which: unknown operator `{other}`"
                    )]))
                }
            };
            let inputs = SchattenInputs {
                which,
                band: sch.band,
                p: sch.p,
                u_recipes: sch.u_recipes.clone(),
            };
            schatten_study(grid, &inputs, config.seed)
        }
        "extremizer_search" => {
            let ext = config
                .extremizer
                .ok_or_else(|| Error::Config(vec!["extremizer: section required".into()]))?;
            let inputs = ExtremizerInputs {
                members: ext.members,
                pool: ext.pool,
                q: ext.q,
                steps: ext.steps,
                step_size: ext.step_size,
            };
            extremizer_search(grid, &inputs, config.seed)
        }
        other => Err(Error::UnknownExperiment(other.to_string())),
    }
}

fn evaluate_gates(config: &RunConfig, record: &ExperimentRecord) -> Vec<GateResult> {
    let gates = &config.gates;
    let mut out = Vec::new();
    if let Some(threshold) = gates.max_exponent {
        let value = record.fitted_exponent;
        out.push(GateResult {
            name: "max_exponent".into(),
            value,
            threshold,
            passed: value.map(|v| v <= threshold).unwrap_or(false),
        });
    }
    if let Some(threshold) = gates.min_exponent {
        let value = record.fitted_exponent;
        out.push(GateResult {
            name: "min_exponent".into(),
            value,
            threshold,
            passed: value.map(|v| v >= threshold).unwrap_or(false),
        });
    }
    if let Some(threshold) = gates.max_ratio_spread {
        let value = record.stability.as_ref().map(|s| s.spread);
        out.push(GateResult {
            name: "max_ratio_spread".into(),
            value,
            threshold,
            passed: value.map(|v| v <= threshold).unwrap_or(false),
        });
    }
    if let Some(threshold) = gates.max_identity_deviation {
        let value = record
            .identities
            .iter()
            .map(|i| i.max_deviation)
            .fold(None, |acc: Option<f64>, x| {
                Some(acc.map_or(x, |a| a.max(x)))
            });
        out.push(GateResult {
            name: "max_identity_deviation".into(),
            value,
            threshold,
            passed: value.map(|v| v <= threshold).unwrap_or(false),
        });
    }
    if let (Some(target), Some(tol)) = (gates.slope, gates.slope_tol) {
        // worst deviation of the recorded tail slopes from the target,
        // over recipes that have a nontrivial spectrum
        let deviations: Vec<f64> = record
            .recipes
            .iter()
            .filter(|r| r.ratio.is_some())
            .filter_map(|r| r.tail_slope.map(|s| (s - target).abs()))
            .collect();
        let value = deviations.iter().cloned().fold(None, |acc: Option<f64>, x| {
            Some(acc.map_or(x, |a| a.max(x)))
        });
        out.push(GateResult {
            name: "tail_slope".into(),
            value,
            threshold: tol,
            passed: value.map(|v| v <= tol).unwrap_or(false),
        });
    }
    out
}

fn series_csv(record: &ExperimentRecord) -> String {
    let mut csv = String::from("control,measured,predictor,ratio\n");
    for p in &record.series {
        csv.push_str(&format!(
            "{:?},{:?},{:?},{:?}\n",
            p.control, p.measured, p.predictor, p.ratio
        ));
    }
    csv
}

fn summary_text(record: &ExperimentRecord, gates_passed: bool) -> String {
    let mut s = String::new();
    s.push_str(&format!("experiment: {}\n", record.name));
    s.push_str(&format!(
        "grid: d={} n={}\nseed: {}\n",
        record.dim, record.points_per_axis, record.seed
    ));
    s.push_str(&format!("series points: {}\n", record.series.len()));
    if let Some(e) = record.fitted_exponent {
        s.push_str(&format!(
            "fitted exponent: {:.4} (residual {:.2e})\n",
            e,
            record.fit_residual.unwrap_or(f64::NAN)
        ));
    } else {
        s.push_str("fitted exponent: absent (needs >= 3 positive points)\n");
    }
    if let Some(e) = record.predictor_exponent {
        s.push_str(&format!("predictor exponent: {e:.4}\n"));
    }
    if let Some(st) = &record.stability {
        s.push_str(&format!(
            "constant-stability ratio: min {:.4e} max {:.4e} spread {:.3}\n",
            st.min_ratio, st.max_ratio, st.spread
        ));
    }
    for id in &record.identities {
        s.push_str(&format!("identity {}: {:.3e}\n", id.name, id.max_deviation));
    }
    for r in &record.recipes {
        s.push_str(&format!(
            "recipe {}: weak {:.4e} rhs {:.4e} ratio {} slope {} truncated {:.1e}\n",
            r.name,
            r.weak_norm,
            r.rhs_norm,
            r.ratio.map_or("n/a".into(), |x| format!("{x:.4}")),
            r.tail_slope.map_or("n/a".into(), |x| format!("{x:.3}")),
            r.truncated_mass,
        ));
    }
    if !record.dual_lower_bounds.is_empty() {
        s.push_str(&format!(
            "dual lower bounds: {}\n",
            record
                .dual_lower_bounds
                .iter()
                .map(|x| format!("{x:.4e}"))
                .collect::<Vec<_>>()
                .join(" ")
        ));
    }
    if !record.trace.is_empty() {
        s.push_str(&format!(
            "ascent: initial {:.6e} final {:.6e} over {} steps\n",
            record.trace.first().unwrap(),
            record.trace.last().unwrap(),
            record.trace.len() - 1
        ));
    }
    if record.gates.is_empty() {
        s.push_str("gates: none configured\n");
    } else {
        s.push_str("gates:\n");
        for g in &record.gates {
            s.push_str(&format!(
                "  {} {}: value {} threshold {:?}\n",
                if g.passed { "PASS" } else { "FAIL" },
                g.name,
                g.value.map_or("absent".into(), |v| format!("{v:.6}")),
                g.threshold
            ));
        }
    }
    s.push_str(&format!("wall clock: {} ms\n", record.wall_clock_ms));
    s.push_str(&format!(
        "overall: {}\n",
        if gates_passed { "PASS" } else { "FAIL" }
    ));
    s
}

fn sha256_hex(data: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(data.as_bytes());
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Run one validated config and write record.json, series.csv, summary.txt
/// into the output directory. Exit-status semantics live in the caller: the
/// outcome says whether every configured gate passed.
pub fn run_config(
    config: &RunConfig,
    out_override: Option<&Path>,
    seed_override: Option<u64>,
) -> Result<RunOutcome> {
    let violations = crate::config::validate(config);
    if !violations.is_empty() {
        return Err(Error::Config(violations));
    }
    let mut effective = config.clone();
    if let Some(seed) = seed_override {
        effective.seed = seed;
    }
    let out_dir: PathBuf = match out_override {
        Some(p) => p.to_path_buf(),
        None => match &effective.output.dir {
            Some(d) => PathBuf::from(d),
            None => PathBuf::from("runs").join(&effective.experiment),
        },
    };

    let started = Instant::now();
    let mut record = dispatch(&effective)?;
    record.wall_clock_ms = started.elapsed().as_millis();
    record.config_toml = canonical_toml(&effective);
    record.gates = evaluate_gates(&effective, &record);
    let gates_passed = record.gates.iter().all(|g| g.passed);

    let csv = series_csv(&record);
    record.series_sha256 = sha256_hex(&csv);

    fs::create_dir_all(&out_dir)?;
    fs::write(out_dir.join("series.csv"), &csv)?;
    for (i, recipe) in record.recipes.iter().enumerate() {
        if !recipe.singular_values.is_empty() {
            let name = recipe.name.replace(':', "_");
            fs::write(
                out_dir.join(format!("singular_values_{i}_{name}.csv")),
                crate::spectral::singular_values_csv(&recipe.singular_values),
            )?;
        }
    }
    fs::write(
        out_dir.join("record.json"),
        serde_json::to_string_pretty(&record)? + "\n",
    )?;
    fs::write(
        out_dir.join("summary.txt"),
        summary_text(&record, gates_passed),
    )?;
    Ok(RunOutcome {
        record,
        gates_passed,
        out_dir,
    })
}

fn collect_json_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if path.is_dir() {
            collect_json_files(&path, out)?;
        } else if path.extension().map(|e| e == "json").unwrap_or(false) {
            out.push(path);
        }
    }
    Ok(())
}

/// Aggregate a directory tree of record.json files into one CSV table with
/// deterministic row order; malformed records are flagged, not fatal.
pub fn report(dir: &Path) -> Result<String> {
    let mut files = Vec::new();
    collect_json_files(dir, &mut files)?;
    files.sort();
    let mut rows: Vec<(String, usize, usize, String)> = Vec::new();
    for file in files {
        let text = fs::read_to_string(&file)?;
        match serde_json::from_str::<ExperimentRecord>(&text) {
            Ok(record) => {
                let exponent = record
                    .fitted_exponent
                    .map_or(String::new(), |e| format!("{e:?}"));
                let predictor = record
                    .predictor_exponent
                    .map_or(String::new(), |e| format!("{e:?}"));
                let spread = record
                    .stability
                    .as_ref()
                    .map_or(String::new(), |s| format!("{:?}", s.spread));
                let max_dev = record
                    .identities
                    .iter()
                    .map(|i| i.max_deviation)
                    .fold(f64::NAN, f64::max);
                let max_dev = if max_dev.is_nan() {
                    String::new()
                } else {
                    format!("{max_dev:?}")
                };
                rows.push((
                    record.name.clone(),
                    record.dim,
                    record.points_per_axis,
                    format!(
                        "{},{},{},{},{},{},{},",
                        record.name,
                        record.dim,
                        record.points_per_axis,
                        exponent,
                        predictor,
                        spread,
                        max_dev
                    ),
                ));
            }
            Err(_) => {
                rows.push((
                    format!("~{}", file.display()),
                    usize::MAX,
                    usize::MAX,
                    format!(",,,,,,,malformed:{}", file.display()),
                ));
            }
        }
    }
    rows.sort();
    let mut csv = String::from(
        "experiment,d,n,exponent,predictor_exponent,ratio_spread,max_identity_deviation,flag\n",
    );
    for (_, _, _, row) in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    Ok(csv)
}
