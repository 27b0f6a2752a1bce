use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Serialize};

use wlbayes::data::{read_dataset_csv, write_dataset_csv, OutcomeKindHint, Standardizer};
use wlbayes::diagnostics::Diagnostics;
use wlbayes::metrics::{
    adjacent_binary_collapse, binary_report, ordinal_overall_report, render_comparison,
    CollapseOrientation, MetricsReport,
};
use wlbayes::predict::{fit, loo_validate, ClassifyRule, LooOptions, LooResult};
use wlbayes::sampler::ChainStats;
use wlbayes::simdata::{simulate, SimConfig};
use wlbayes::{
    Dataset, Error as CoreError, ModelFamily, ModelSpec, OutcomeKind, SamplerConfig, WeightingMode,
};

use crate::args::{CompareArgs, FitArgs, LooArgs, ModelArgs, SimulateArgs};
use crate::manifest::{
    sha256_hex, write_artifact, write_manifest, InputRecord, LooRecord, RunManifest,
};

const RHAT_WARN: f64 = 1.05;
pub const EXIT_SOFT_FAIL: i32 = 4;

/// Everything the fit/loo diagnostics JSON records, including the
/// standardization transform needed to replay predictions.
#[derive(Debug, Serialize, Deserialize)]
struct DiagnosticsDocument {
    diagnostics: Diagnostics,
    chain_stats: Vec<ChainStats>,
    mean_accept_rate: f64,
    standardizer: Option<Standardizer>,
    warnings: Vec<String>,
}

/// metrics.json: the report(s) plus enough run identity for `compare` to
/// refuse mismatched inputs.
#[derive(Debug, Serialize, Deserialize)]
pub struct MetricsDocument {
    pub dataset_sha256: String,
    pub n_obs: usize,
    pub outcome_kind: OutcomeKind,
    pub weighting: WeightingMode,
    pub threshold: f64,
    pub rule: ClassifyRule,
    pub overall: MetricsReport,
    pub collapses: Vec<MetricsReport>,
    pub warnings: Vec<String>,
}

pub fn cmd_simulate(args: &SimulateArgs) -> anyhow::Result<i32> {
    let proportions = parse_f64_list(&args.proportions, "--proportions")?;
    let family = match args.family.as_str() {
        "binary" => {
            if proportions.len() != 2 {
                bail!(CoreError::InvalidConfig(
                    "binary simulation needs exactly 2 proportions".into()
                ));
            }
            ModelFamily::BinaryLogit
        }
        "ordinal" => ModelFamily::OrderedLogit {
            categories: args.categories.unwrap_or(proportions.len()),
        },
        other => bail!(CoreError::InvalidConfig(format!(
            "unknown family '{other}'"
        ))),
    };
    let true_beta = match &args.beta {
        Some(s) => parse_f64_list(s, "--beta")?,
        None => vec![1.5, -1.5],
    };
    let config = SimConfig {
        n: args.n,
        family,
        true_beta,
        true_cutpoints: None,
        target_proportions: Some(proportions),
        seed: args.seed,
    };
    let sim = simulate(&config)?;

    let mut csv_bytes = Vec::new();
    write_dataset_csv(&mut csv_bytes, &sim.data)?;

    let mut manifest = RunManifest::new("simulate");
    manifest.sim = Some(config);
    write_artifact(&mut manifest, &args.out_dir, "dataset.csv", &csv_bytes)?;
    write_manifest(&manifest, &args.out_dir)?;
    println!(
        "wrote {} rows to {}",
        sim.data.n_obs(),
        args.out_dir.join("dataset.csv").display()
    );
    Ok(0)
}

pub fn cmd_fit(args: &FitArgs) -> anyhow::Result<i32> {
    let loaded = load_input(&args.model)?;
    let spec = build_spec(&args.model, &loaded.data)?;
    let weighting = build_weighting(&args.model)?;
    let sampler_config = build_sampler_config(&args.model);

    let fitted = fit(&spec, &loaded.data, &weighting, &sampler_config)?;

    let mut draws_csv = Vec::new();
    fitted.draws.write_csv(&mut draws_csv)?;

    let warnings = rhat_warnings(&fitted.draws.diagnostics);
    let diag = DiagnosticsDocument {
        diagnostics: fitted.draws.diagnostics.clone(),
        chain_stats: fitted.draws.chain_stats.clone(),
        mean_accept_rate: fitted.draws.mean_accept_rate(),
        standardizer: fitted.standardizer.clone(),
        warnings: warnings.clone(),
    };

    let mut manifest = RunManifest::new("fit");
    manifest.input = Some(loaded.record);
    manifest.model = Some(spec);
    manifest.weighting = Some(weighting);
    manifest.sampler = Some(sampler_config);
    write_artifact(&mut manifest, &args.model.out_dir, "draws.csv", &draws_csv)?;
    write_artifact(
        &mut manifest,
        &args.model.out_dir,
        "diagnostics.json",
        &to_json_bytes(&diag)?,
    )?;
    write_manifest(&manifest, &args.model.out_dir)?;

    for w in &warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "fit complete: {} draws x {} parameters -> {}",
        fitted.draws.n_total(),
        fitted.draws.n_params(),
        args.model.out_dir.display()
    );
    Ok(if warnings.is_empty() {
        0
    } else {
        EXIT_SOFT_FAIL
    })
}

pub fn cmd_loo(args: &LooArgs) -> anyhow::Result<i32> {
    let loaded = load_input(&args.model)?;
    let spec = build_spec(&args.model, &loaded.data)?;
    let weighting = build_weighting(&args.model)?;
    let sampler_config = build_sampler_config(&args.model);
    let options = LooOptions {
        recompute_weights: !args.fixed_weights,
        reuse_step_size: !args.no_reuse_step_size,
    };
    if !(args.threshold > 0.0 && args.threshold < 1.0) {
        bail!(CoreError::InvalidConfig(format!(
            "threshold must lie in (0, 1), got {}",
            args.threshold
        )));
    }
    let rule = resolve_rule(args.rule.as_deref(), &spec)?;

    let result = loo_validate(&spec, &loaded.data, &weighting, &sampler_config, &options)?;

    let mut predictions_csv = Vec::new();
    result.write_csv(&mut predictions_csv)?;

    let truth = result.true_labels();
    let mut warnings: Vec<String> = result
        .folds
        .iter()
        .filter(|f| f.diagnostics_flagged)
        .map(|f| {
            format!(
                "fold {} diagnostics flagged (max R-hat {:?}, min ESS {:?})",
                f.index, f.max_rhat, f.min_ess
            )
        })
        .collect();
    for f in result.folds.iter().filter(|f| f.class_dropped) {
        warnings.push(format!(
            "fold {} training data lost an entire class; weights computed over the remaining classes",
            f.index
        ));
    }

    let (overall, collapses) = loo_reports(&result, &truth, args.threshold, rule)?;
    let doc = MetricsDocument {
        dataset_sha256: loaded.record.sha256.clone(),
        n_obs: result.n_obs(),
        outcome_kind: result.outcome_kind,
        weighting: weighting.clone(),
        threshold: args.threshold,
        rule,
        overall,
        collapses,
        warnings: warnings.clone(),
    };

    let mut manifest = RunManifest::new("loo");
    manifest.input = Some(loaded.record);
    manifest.model = Some(spec);
    manifest.weighting = Some(weighting);
    manifest.sampler = Some(sampler_config);
    manifest.loo = Some(LooRecord {
        threshold: args.threshold,
        rule,
        options,
    });
    write_artifact(
        &mut manifest,
        &args.model.out_dir,
        "predictions.csv",
        &predictions_csv,
    )?;
    write_artifact(
        &mut manifest,
        &args.model.out_dir,
        "metrics.json",
        &to_json_bytes(&doc)?,
    )?;
    write_manifest(&manifest, &args.model.out_dir)?;

    let soft_fail = result.folds.iter().any(|f| f.diagnostics_flagged);
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "leave-one-out complete: {} folds -> {}",
        result.n_obs(),
        args.model.out_dir.display()
    );
    Ok(if soft_fail { EXIT_SOFT_FAIL } else { 0 })
}

fn loo_reports(
    result: &LooResult,
    truth: &[u32],
    threshold: f64,
    rule: ClassifyRule,
) -> anyhow::Result<(MetricsReport, Vec<MetricsReport>)> {
    match result.outcome_kind {
        OutcomeKind::Binary => {
            let pred = result.predictive();
            let probs: Vec<f64> = match rule {
                ClassifyRule::BinaryMean => pred.rows.iter().map(|r| r.class_probs[1]).collect(),
                _ => pred.median_probs(),
            };
            Ok((binary_report(&probs, truth, threshold)?, Vec::new()))
        }
        OutcomeKind::Ordinal { categories } => {
            let pred = result.predictive();
            let labels = result.classify(threshold, rule)?;
            let masses = pred.mean_masses();
            let overall = ordinal_overall_report(&masses, &labels, truth)?;
            let collapses = (1..categories)
                .map(|split| {
                    adjacent_binary_collapse(
                        &masses,
                        truth,
                        split,
                        CollapseOrientation::HigherPositive,
                    )
                })
                .collect::<wlbayes::Result<Vec<_>>>()?;
            Ok((overall, collapses))
        }
    }
}

pub fn cmd_compare(args: &CompareArgs) -> anyhow::Result<i32> {
    let (doc_a, bytes_a) = read_metrics(&args.a)?;
    let (doc_b, bytes_b) = read_metrics(&args.b)?;

    if doc_a.dataset_sha256 != doc_b.dataset_sha256 {
        bail!(CoreError::InvalidData(
            "dataset checksums differ between the two runs; refusing to compare".into()
        ));
    }
    if doc_a.outcome_kind != doc_b.outcome_kind
        || doc_a.threshold != doc_b.threshold
        || doc_a.n_obs != doc_b.n_obs
    {
        bail!(CoreError::InvalidData(
            "runs have different outcome kind, threshold, or fold structure".into()
        ));
    }

    let label_a = args
        .label_a
        .clone()
        .unwrap_or_else(|| weighting_label(&doc_a.weighting));
    let label_b = args
        .label_b
        .clone()
        .unwrap_or_else(|| weighting_label(&doc_b.weighting));

    let mut table = String::new();
    table.push_str("== overall ==\n");
    table.push_str(&render_comparison(
        &label_a,
        &doc_a.overall,
        &label_b,
        &doc_b.overall,
    ));
    for ca in &doc_a.collapses {
        let name = ca.collapse.clone().unwrap_or_default();
        if let Some(cb) = doc_b
            .collapses
            .iter()
            .find(|c| c.collapse.as_deref() == Some(name.as_str()))
        {
            table.push_str(&format!("\n== collapse {name} ==\n"));
            table.push_str(&render_comparison(&label_a, ca, &label_b, cb));
        }
    }

    let preds_a = read_predictions(&args.a.join("predictions.csv"))?;
    let preds_b = read_predictions(&args.b.join("predictions.csv"))?;
    let diffs_csv = per_observation_differences(&doc_a, &preds_a, &preds_b, &label_a, &label_b)?;

    let mut manifest = RunManifest::new("compare");
    manifest.compared = Some(vec![
        (label_a.clone(), sha256_hex(&bytes_a)),
        (label_b.clone(), sha256_hex(&bytes_b)),
    ]);
    write_artifact(
        &mut manifest,
        &args.out_dir,
        "comparison.txt",
        table.as_bytes(),
    )?;
    write_artifact(&mut manifest, &args.out_dir, "differences.csv", &diffs_csv)?;
    write_manifest(&manifest, &args.out_dir)?;

    print!("{table}");
    Ok(0)
}

fn weighting_label(mode: &WeightingMode) -> String {
    match mode {
        WeightingMode::None => "unweighted".into(),
        WeightingMode::InverseProportion => "weighted".into(),
        WeightingMode::ExplicitProportions(_) => "weighted_explicit".into(),
    }
}

struct PredRow {
    index: usize,
    true_label: u32,
    probs: Vec<f64>,
    median: f64,
}

fn read_predictions(path: &Path) -> anyhow::Result<Vec<PredRow>> {
    let mut rdr =
        csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    let prob_cols: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("p_"))
        .map(|(i, _)| i)
        .collect();
    let col = |name: &str| -> anyhow::Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("predictions.csv missing column {name}"))
    };
    let (idx_col, label_col, median_col) = (col("index")?, col("true_label")?, col("median")?);
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        rows.push(PredRow {
            index: record[idx_col].parse()?,
            true_label: record[label_col].parse()?,
            probs: prob_cols
                .iter()
                .map(|&i| record[i].parse::<f64>())
                .collect::<Result<_, _>>()?,
            median: record[median_col].parse()?,
        });
    }
    Ok(rows)
}

/// Per-observation difference export: predicted-probability and squared-error
/// differences for binary runs; true-category-mass and RPS differences for
/// ordinal runs. Differences are first-minus-second.
fn per_observation_differences(
    doc: &MetricsDocument,
    a: &[PredRow],
    b: &[PredRow],
    label_a: &str,
    label_b: &str,
) -> anyhow::Result<Vec<u8>> {
    if a.len() != b.len() {
        bail!(CoreError::InvalidData(
            "prediction row counts differ".into()
        ));
    }
    let mut wtr = csv::Writer::from_writer(Vec::new());
    match doc.outcome_kind {
        OutcomeKind::Binary => {
            wtr.write_record([
                "index",
                "true_label",
                &format!("prob_{label_a}"),
                &format!("prob_{label_b}"),
                "prob_diff",
                &format!("sqerr_{label_a}"),
                &format!("sqerr_{label_b}"),
                "sqerr_diff",
            ])?;
            for (ra, rb) in a.iter().zip(b) {
                check_aligned(ra, rb)?;
                let o = f64::from(ra.true_label);
                let (ea, eb) = ((ra.median - o).powi(2), (rb.median - o).powi(2));
                wtr.write_record([
                    ra.index.to_string(),
                    ra.true_label.to_string(),
                    ra.median.to_string(),
                    rb.median.to_string(),
                    (ra.median - rb.median).to_string(),
                    ea.to_string(),
                    eb.to_string(),
                    (ea - eb).to_string(),
                ])?;
            }
        }
        OutcomeKind::Ordinal { .. } => {
            let masses_a: Vec<Vec<f64>> = a.iter().map(|r| r.probs.clone()).collect();
            let masses_b: Vec<Vec<f64>> = b.iter().map(|r| r.probs.clone()).collect();
            let truth: Vec<u32> = a.iter().map(|r| r.true_label).collect();
            let (_, rps_a) = wlbayes::metrics::rps(&masses_a, &truth, false)?;
            let (_, rps_b) = wlbayes::metrics::rps(&masses_b, &truth, false)?;
            wtr.write_record([
                "index",
                "true_label",
                &format!("true_mass_{label_a}"),
                &format!("true_mass_{label_b}"),
                "true_mass_diff",
                &format!("rps_{label_a}"),
                &format!("rps_{label_b}"),
                "rps_diff",
            ])?;
            for (i, (ra, rb)) in a.iter().zip(b).enumerate() {
                check_aligned(ra, rb)?;
                let k = ra.true_label as usize - 1;
                let (ma, mb) = (ra.probs[k], rb.probs[k]);
                wtr.write_record([
                    ra.index.to_string(),
                    ra.true_label.to_string(),
                    ma.to_string(),
                    mb.to_string(),
                    (ma - mb).to_string(),
                    rps_a[i].to_string(),
                    rps_b[i].to_string(),
                    (rps_a[i] - rps_b[i]).to_string(),
                ])?;
            }
        }
    }
    Ok(wtr.into_inner()?)
}

fn check_aligned(a: &PredRow, b: &PredRow) -> anyhow::Result<()> {
    if a.index != b.index || a.true_label != b.true_label {
        bail!(CoreError::InvalidData(format!(
            "prediction rows misaligned at index {}",
            a.index
        )));
    }
    Ok(())
}

fn read_metrics(dir: &Path) -> anyhow::Result<(MetricsDocument, Vec<u8>)> {
    let path = dir.join("metrics.json");
    let bytes = std::fs::read(&path).with_context(|| format!("cannot read {}", path.display()))?;
    let doc = serde_json::from_slice(&bytes)
        .with_context(|| format!("cannot parse {}", path.display()))?;
    Ok((doc, bytes))
}

struct LoadedInput {
    data: Dataset,
    record: InputRecord,
}

fn load_input(args: &ModelArgs) -> anyhow::Result<LoadedInput> {
    let bytes = std::fs::read(&args.input)
        .with_context(|| format!("cannot read {}", args.input.display()))?;
    let predictors: Option<Vec<String>> = args
        .predictors
        .as_ref()
        .map(|s| s.split(',').map(|p| p.trim().to_string()).collect());
    let hint = match args.family.as_str() {
        "binary" => OutcomeKindHint::Binary,
        "ordinal" => OutcomeKindHint::Ordinal {
            categories: args.categories,
        },
        other => bail!(CoreError::InvalidConfig(format!(
            "unknown family '{other}'"
        ))),
    };
    let data = read_dataset_csv(bytes.as_slice(), &args.outcome, predictors.as_deref(), hint)?;
    Ok(LoadedInput {
        record: InputRecord {
            path: args.input.display().to_string(),
            sha256: sha256_hex(&bytes),
            outcome_column: args.outcome.clone(),
            predictors,
        },
        data,
    })
}

fn build_spec(args: &ModelArgs, data: &Dataset) -> anyhow::Result<ModelSpec> {
    let mut spec = match data.outcome_kind {
        OutcomeKind::Binary => ModelSpec::binary(),
        OutcomeKind::Ordinal { categories } => ModelSpec::ordinal(categories),
    };
    spec.prior_sd = args.prior_sd;
    spec.cutpoint_prior_sd = args.cutpoint_prior_sd;
    spec.standardize = !args.no_standardize;
    if args.no_intercept {
        spec.include_intercept = false;
    }
    spec.validate()?;
    Ok(spec)
}

fn build_weighting(args: &ModelArgs) -> anyhow::Result<WeightingMode> {
    match args.weighting.as_str() {
        "none" => Ok(WeightingMode::None),
        "inverse" => Ok(WeightingMode::InverseProportion),
        "explicit" => {
            let raw = args.class_proportions.as_ref().ok_or_else(|| {
                CoreError::InvalidConfig("--weighting explicit requires --class-proportions".into())
            })?;
            let mut map = BTreeMap::new();
            for pair in raw.split(',') {
                let (label, prop) = pair.split_once('=').ok_or_else(|| {
                    CoreError::InvalidConfig(format!("expected label=proportion, got '{pair}'"))
                })?;
                map.insert(
                    label.trim().parse::<i64>().map_err(|_| {
                        CoreError::InvalidConfig(format!("bad class label '{label}'"))
                    })?,
                    prop.trim().parse::<f64>().map_err(|_| {
                        CoreError::InvalidConfig(format!("bad proportion '{prop}'"))
                    })?,
                );
            }
            Ok(WeightingMode::ExplicitProportions(map))
        }
        other => bail!(CoreError::InvalidConfig(format!(
            "unknown weighting mode '{other}'"
        ))),
    }
}

fn build_sampler_config(args: &ModelArgs) -> SamplerConfig {
    let mut config = SamplerConfig::new(args.seed);
    config.n_chains = args.chains;
    config.n_warmup = args.warmup;
    config.n_draws = args.draws;
    config.target_accept = args.target_accept;
    config.algorithm = match args.algorithm.as_str() {
        "random-walk" => wlbayes::Algorithm::AdaptiveRandomWalk,
        _ => wlbayes::Algorithm::GradientHmc,
    };
    config
}

fn resolve_rule(rule: Option<&str>, spec: &ModelSpec) -> anyhow::Result<ClassifyRule> {
    let is_binary = matches!(spec.family, ModelFamily::BinaryLogit);
    let resolved = match rule {
        None => {
            return Ok(if is_binary {
                ClassifyRule::BinaryMedian
            } else {
                ClassifyRule::OrdinalArgmax
            })
        }
        Some("median") => ClassifyRule::BinaryMedian,
        Some("mean") => ClassifyRule::BinaryMean,
        Some("argmax") => ClassifyRule::OrdinalArgmax,
        Some("latent-median") => ClassifyRule::OrdinalLatentMedian,
        Some(other) => bail!(CoreError::InvalidConfig(format!(
            "unknown classification rule '{other}'"
        ))),
    };
    let rule_is_binary = matches!(
        resolved,
        ClassifyRule::BinaryMedian | ClassifyRule::BinaryMean
    );
    if rule_is_binary != is_binary {
        bail!(CoreError::InvalidConfig(format!(
            "rule '{}' does not apply to the {} family",
            rule.unwrap_or_default(),
            if is_binary { "binary" } else { "ordinal" }
        )));
    }
    Ok(resolved)
}

fn rhat_warnings(diag: &Diagnostics) -> Vec<String> {
    diag.parameter_names
        .iter()
        .zip(&diag.rhat)
        .filter_map(|(name, r)| match r {
            Some(v) if *v > RHAT_WARN => Some(format!(
                "R-hat {v:.3} for parameter {name} exceeds {RHAT_WARN}; chains may not have converged"
            )),
            _ => None,
        })
        .collect()
}

fn to_json_bytes<T: Serialize>(value: &T) -> anyhow::Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn parse_f64_list(raw: &str, flag: &str) -> anyhow::Result<Vec<f64>> {
    raw.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| {
                anyhow!(CoreError::InvalidConfig(format!(
                    "{flag}: '{s}' is not a number"
                )))
            })
        })
        .collect()
}
