//! Command-line driver: `gen-data`, `train`, `extract`, `cca`, `curve`,
//! `fuse` and `similarity` subcommands over a shared output directory.
//!
//! Every subcommand takes `--seed`, `--config` and `--out`; the master seed
//! comes from the config unless overridden, and every randomized step
//! derives its own seed from it, so a fixed seed reproduces every artifact
//! byte for byte. Exit codes: 0 success, 1 usage or configuration problems,
//! 2 data errors, 3 numerical failures.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::cca::{fit_cca, CcaBasis, Side};
use crate::error::{Error, Result};
use crate::experiments::{run_curve, CurveContext, CurveResult, CurveSpec, SensorData};
use crate::fusion::{equivalence_test, SensorRef};
use crate::heads::{LabeledFeatures, LinearHead};
use crate::io::feature_file::{self, FeatureFile};
use crate::io::{self, report, svg, RunConfig};
use crate::linalg::fit_pca;
use crate::nets::{extract_features, generate, train_mlp, SensorSplit};
use crate::projectors::Method;
use crate::seed::{derive, tag};
use crate::similarity::SimilarityReport;

#[derive(Parser)]
#[command(
    name = "ccaprobe",
    version,
    about = "Probe what CCA finds in classifier features: projection curves, fusion equivalence, similarity scores"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Master seed (overrides the config's seed).
    #[arg(long)]
    seed: Option<u64>,
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for all artifacts.
    #[arg(long, default_value = "ccaprobe-out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the multi-sensor dataset and write raw feature files.
    GenData {
        #[command(flatten)]
        common: Common,
    },
    /// Train per-sensor MLPs (plus partner initializations); write models,
    /// penultimate features and heads.
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Extract features and the head from a saved model and a raw data file.
    Extract {
        #[command(flatten)]
        common: Common,
        /// Trained model (JSON).
        #[arg(long)]
        model: PathBuf,
        /// Raw input feature file.
        #[arg(long)]
        data: PathBuf,
        /// Output path for the penultimate features.
        #[arg(long)]
        features_out: Option<PathBuf>,
        /// Output path for the extracted head.
        #[arg(long)]
        head_out: Option<PathBuf>,
    },
    /// Fit CCA between two feature files; print rho and save the basis.
    Cca {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        features_a: PathBuf,
        #[arg(long)]
        features_b: PathBuf,
        /// Cumulative variance kept by the PCA pre-step.
        #[arg(long)]
        variance_keep: Option<f64>,
    },
    /// Run projection-performance curves (same-sensor methods and the
    /// cross-sensor grid); emit one CSV and one SVG per sensor pair.
    Curve {
        #[command(flatten)]
        common: Common,
    },
    /// Run the fusion-equivalence comparison on the first two sensors.
    Fuse {
        #[command(flatten)]
        common: Common,
    },
    /// Compute similarity scores between two feature files.
    Similarity {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        features_a: PathBuf,
        #[arg(long)]
        features_b: PathBuf,
    },
}

/// Entry point used by the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ccaprobe: {e}");
            e.exit_code()
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::GenData { common } => {
            let (cfg, out) = setup(&common)?;
            cmd_gen_data(&cfg, &out)
        }
        Command::Train { common } => {
            let (cfg, out) = setup(&common)?;
            cmd_train(&cfg, &out)
        }
        Command::Extract {
            common,
            model,
            data,
            features_out,
            head_out,
        } => {
            let out = ensure_out_dir(&common.out)?;
            cmd_extract(&model, &data, &out, features_out, head_out)
        }
        Command::Cca {
            common,
            features_a,
            features_b,
            variance_keep,
        } => {
            let out = ensure_out_dir(&common.out)?;
            let vk = match (&common.config, variance_keep) {
                (_, Some(vk)) => vk,
                (Some(path), None) => RunConfig::load(path)?.variance_keep,
                (None, None) => crate::cca::DEFAULT_VARIANCE_KEEP,
            };
            cmd_cca(&features_a, &features_b, vk, &out)
        }
        Command::Curve { common } => {
            let (cfg, out) = setup(&common)?;
            cmd_curve(&cfg, &out)
        }
        Command::Fuse { common } => {
            let (cfg, out) = setup(&common)?;
            cmd_fuse(&cfg, &out)
        }
        Command::Similarity {
            common,
            features_a,
            features_b,
        } => {
            let out = ensure_out_dir(&common.out)?;
            cmd_similarity(&features_a, &features_b, &out)
        }
    }
}

fn setup(common: &Common) -> Result<(RunConfig, PathBuf)> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => match common.seed {
            Some(seed) => RunConfig::with_seed(seed),
            None => {
                return Err(Error::Config(
                    "a master seed is mandatory: pass --seed or a --config with a seed".into(),
                ))
            }
        },
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let out = ensure_out_dir(&common.out)?;
    Ok((cfg, out))
}

fn ensure_out_dir(out: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(out)?;
    Ok(out.to_path_buf())
}

// ---- artifact paths ------------------------------------------------------

pub fn raw_path(out: &Path, sensor: &str, split: &str) -> PathBuf {
    out.join(format!("raw_{sensor}_{split}.bin"))
}

pub fn model_path(out: &Path, sensor: &str) -> PathBuf {
    out.join(format!("model_{sensor}.json"))
}

pub fn partner_model_path(out: &Path, sensor: &str, r: usize) -> PathBuf {
    out.join(format!("model_{sensor}_partner{r}.json"))
}

pub fn feat_path(out: &Path, sensor: &str, split: &str) -> PathBuf {
    out.join(format!("feat_{sensor}_{split}.bin"))
}

pub fn partner_feat_path(out: &Path, sensor: &str, r: usize) -> PathBuf {
    out.join(format!("feat_{sensor}_partner{r}_train.bin"))
}

pub fn head_path(out: &Path, sensor: &str) -> PathBuf {
    out.join(format!("head_{sensor}.bin"))
}

pub fn curve_csv_path(out: &Path, basis: &str, evaluated: &str) -> PathBuf {
    out.join(format!("curve_{basis}_{evaluated}.csv"))
}

pub fn curve_svg_path(out: &Path, basis: &str, evaluated: &str) -> PathBuf {
    out.join(format!("curve_{basis}_{evaluated}.svg"))
}

pub fn fusion_csv_path(out: &Path, a: &str, b: &str) -> PathBuf {
    out.join(format!("fusion_{a}_{b}.csv"))
}

pub fn fusion_txt_path(out: &Path, a: &str, b: &str) -> PathBuf {
    out.join(format!("fusion_{a}_{b}.txt"))
}

// ---- subcommand bodies (also the programmatic pipeline API) ---------------

/// Synthesizes the dataset and writes one raw feature file per sensor and
/// split.
pub fn cmd_gen_data(cfg: &RunConfig, out: &Path) -> Result<()> {
    let sensors = generate(&cfg.dataset_with_seed())?;
    for sensor in &sensors {
        for (split, data) in [("train", &sensor.train), ("val", &sensor.val)] {
            let ff = FeatureFile::new(data.features.clone(), sensor.name.clone())
                .with_labels(data.labels.iter().map(|&l| l as u32).collect())
                .with_seed(cfg.seed);
            let path = raw_path(out, &sensor.name, split);
            feature_file::save(&ff, &path)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn load_labeled(path: &Path) -> Result<LabeledFeatures> {
    let ff = feature_file::load(path)?;
    let labels = ff.labels_usize().ok_or_else(|| Error::Corrupt {
        path: path.display().to_string(),
        reason: "expected a labeled feature file".into(),
    })?;
    LabeledFeatures::new(ff.matrix, labels)
}

fn load_raw_sensors(cfg: &RunConfig, out: &Path) -> Result<Vec<SensorSplit>> {
    let spec = cfg.dataset_with_seed();
    let names: Vec<String> = (0..spec.n_sensors).map(|m| format!("s{m}")).collect();
    let all_present = names.iter().all(|name| {
        raw_path(out, name, "train").exists() && raw_path(out, name, "val").exists()
    });
    if !all_present {
        // Generation is seed-driven, so building in memory matches what
        // `gen-data` would have written.
        return generate(&spec);
    }
    names
        .into_iter()
        .map(|name| {
            Ok(SensorSplit {
                train: load_labeled(&raw_path(out, &name, "train"))?,
                val: load_labeled(&raw_path(out, &name, "val"))?,
                name,
            })
        })
        .collect()
}

/// Trains the per-sensor networks plus partner initializations and writes
/// models, penultimate features and heads.
pub fn cmd_train(cfg: &RunConfig, out: &Path) -> Result<()> {
    let sensors = load_raw_sensors(cfg, out)?;
    let n_classes = cfg.dataset.n_classes;
    for (m, sensor) in sensors.iter().enumerate() {
        let hyper = cfg
            .trainer
            .hyper(derive(cfg.seed, &[tag("train"), m as u64]));
        let model = train_mlp(&sensor.train, &cfg.hidden, n_classes, &hyper)?;
        io::save_model(&model, &model_path(out, &sensor.name))?;

        let (train_feats, head) = extract_features(&model, &sensor.train.features)?;
        let (val_feats, _) = extract_features(&model, &sensor.val.features)?;
        for (split, feats, labels) in [
            ("train", train_feats, &sensor.train.labels),
            ("val", val_feats, &sensor.val.labels),
        ] {
            let ff = FeatureFile::new(feats, sensor.name.clone())
                .with_labels(labels.iter().map(|&l| l as u32).collect())
                .with_seed(cfg.seed);
            feature_file::save(&ff, &feat_path(out, &sensor.name, split))?;
        }
        feature_file::save_head(&head, &head_path(out, &sensor.name))?;

        for r in 0..cfg.partner_count() {
            let hyper = cfg
                .trainer
                .hyper(derive(cfg.seed, &[tag("partner"), m as u64, r as u64]));
            let partner = train_mlp(&sensor.train, &cfg.hidden, n_classes, &hyper)?;
            io::save_model(&partner, &partner_model_path(out, &sensor.name, r))?;
            let (feats, _) = extract_features(&partner, &sensor.train.features)?;
            let ff = FeatureFile::new(feats, format!("{}_partner{r}", sensor.name))
                .with_seed(cfg.seed);
            feature_file::save(&ff, &partner_feat_path(out, &sensor.name, r))?;
        }
        println!(
            "trained {} ({} partners), wrote features and head",
            sensor.name,
            cfg.partner_count()
        );
    }
    Ok(())
}

/// Extracts features and the head from a saved model over a raw data file.
pub fn cmd_extract(
    model_file: &Path,
    data_file: &Path,
    out: &Path,
    features_out: Option<PathBuf>,
    head_out: Option<PathBuf>,
) -> Result<()> {
    let model = io::load_model(model_file)?;
    let raw = feature_file::load(data_file)?;
    let (feats, head) = extract_features(&model, &raw.matrix)?;
    let mut ff = FeatureFile::new(feats, raw.sensor.clone());
    if let Some(labels) = raw.labels {
        ff = ff.with_labels(labels);
    }
    if let Some(seed) = raw.seed {
        ff = ff.with_seed(seed);
    }
    let features_path = features_out.unwrap_or_else(|| out.join("extract_features.bin"));
    let head_path = head_out.unwrap_or_else(|| out.join("extract_head.bin"));
    feature_file::save(&ff, &features_path)?;
    feature_file::save_head(&head, &head_path)?;
    println!("wrote {}", features_path.display());
    println!("wrote {}", head_path.display());
    Ok(())
}

/// Fits CCA between two feature files, prints rho, saves the basis.
pub fn cmd_cca(features_a: &Path, features_b: &Path, variance_keep: f64, out: &Path) -> Result<()> {
    let a = feature_file::load(features_a)?;
    let b = feature_file::load(features_b)?;
    let basis = fit_cca(&a.matrix, &b.matrix, variance_keep)?;
    let rho: Vec<String> = basis.rho.iter().map(|r| format!("{r:.4}")).collect();
    println!("k = {}, rho = [{}]", basis.k, rho.join(", "));
    let path = out.join(format!(
        "basis_{}_{}.json",
        stem(features_a),
        stem(features_b)
    ));
    io::save_basis(&basis, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "features".into())
}

/// Trained artifacts of one sensor, as written by `cmd_train`.
pub struct SensorArtifacts {
    pub name: String,
    pub train: LabeledFeatures,
    pub val: LabeledFeatures,
    pub head: LinearHead,
    pub partner_train: Vec<crate::Matrix>,
}

/// Loads the artifacts `cmd_train` wrote for every sensor in the config.
pub fn load_sensor_artifacts(cfg: &RunConfig, out: &Path) -> Result<Vec<SensorArtifacts>> {
    let spec = &cfg.dataset;
    (0..spec.n_sensors)
        .map(|m| {
            let name = format!("s{m}");
            let train_path = feat_path(out, &name, "train");
            if !train_path.exists() {
                return Err(Error::InvalidArgument(format!(
                    "{} not found; run `ccaprobe train` first",
                    train_path.display()
                )));
            }
            let train = load_labeled(&train_path)?;
            let val = load_labeled(&feat_path(out, &name, "val"))?;
            let head = feature_file::load_head(&head_path(out, &name))?;
            let mut partner_train = Vec::new();
            for r in 0..cfg.partner_count() {
                let p = partner_feat_path(out, &name, r);
                if !p.exists() {
                    break;
                }
                partner_train.push(feature_file::load(&p)?.matrix);
            }
            Ok(SensorArtifacts {
                name,
                train,
                val,
                head,
                partner_train,
            })
        })
        .collect()
}

fn write_pair_outputs(
    out: &Path,
    basis_sensor: &str,
    evaluated_sensor: &str,
    curves: &[CurveResult],
    n_c: usize,
) -> Result<()> {
    let csv = report::curves_to_csv(curves);
    let csv_path = curve_csv_path(out, basis_sensor, evaluated_sensor);
    report::write_text(&csv_path, &csv)?;
    let title = format!("basis {basis_sensor} -> evaluated {evaluated_sensor}");
    let svg_text = svg::curves_to_svg(curves, n_c, &title)?;
    let svg_path = curve_svg_path(out, basis_sensor, evaluated_sensor);
    report::write_text(&svg_path, &svg_text)?;
    println!("wrote {}", csv_path.display());
    println!("wrote {}", svg_path.display());
    Ok(())
}

/// Runs the projection-curve sweeps: every configured method on each sensor
/// (CCA basis from fresh initializations of the same sensor), plus
/// `cca_highest` for every ordered cross-sensor pair. One CSV and one SVG
/// per sensor pair.
pub fn cmd_curve(cfg: &RunConfig, out: &Path) -> Result<()> {
    let sensors = load_sensor_artifacts(cfg, out)?;
    let retrain = cfg
        .retrain_config()
        .hyper(0 /* reseeded per job inside run_curve */);
    let n_c = cfg.dataset.n_classes;

    for evaluated in &sensors {
        if evaluated.partner_train.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "no partner features for {}; run `ccaprobe train` first",
                evaluated.name
            )));
        }
        let bases: Vec<CcaBasis> = (0..cfg.repeats)
            .map(|r| {
                let p = &evaluated.partner_train[r % evaluated.partner_train.len()];
                fit_cca(&evaluated.train.features, p, cfg.variance_keep)
            })
            .collect::<Result<_>>()?;
        let pca = fit_pca(&evaluated.train.features, 1.0)?;
        let ctx = CurveContext {
            cca: Some((&bases, Side::One)),
            pca: Some(&pca),
            reference: Some(&evaluated.train.features),
        };
        let curves: Vec<CurveResult> = cfg
            .methods
            .iter()
            .map(|&method| {
                run_curve(
                    &evaluated.train,
                    &evaluated.val,
                    &evaluated.head,
                    &ctx,
                    &CurveSpec {
                        method,
                        repeats: cfg.repeats,
                        retrain: &retrain,
                        master_seed: derive(
                            cfg.seed,
                            &[tag("grid"), tag(&evaluated.name), tag(&evaluated.name)],
                        ),
                        metric: cfg.metric,
                        sensor_pair: (evaluated.name.clone(), evaluated.name.clone()),
                        schedule_override: cfg.schedule_override.as_deref(),
                    },
                )
            })
            .collect::<Result<_>>()?;
        write_pair_outputs(out, &evaluated.name, &evaluated.name, &curves, n_c)?;
    }

    // Cross-sensor grid: cca_highest with the basis fitted against the
    // partner sensor's features.
    if sensors.len() >= 2 && cfg.methods.contains(&Method::CcaHighest) {
        for evaluated in &sensors {
            for partner in &sensors {
                if partner.name == evaluated.name {
                    continue;
                }
                let basis = fit_cca(
                    &evaluated.train.features,
                    &partner.train.features,
                    cfg.variance_keep,
                )?;
                let bases = vec![basis];
                let ctx = CurveContext {
                    cca: Some((&bases, Side::One)),
                    ..Default::default()
                };
                let curve = run_curve(
                    &evaluated.train,
                    &evaluated.val,
                    &evaluated.head,
                    &ctx,
                    &CurveSpec {
                        method: Method::CcaHighest,
                        repeats: cfg.repeats,
                        retrain: &retrain,
                        master_seed: derive(
                            cfg.seed,
                            &[tag("grid"), tag(&partner.name), tag(&evaluated.name)],
                        ),
                        metric: cfg.metric,
                        sensor_pair: (partner.name.clone(), evaluated.name.clone()),
                        schedule_override: cfg.schedule_override.as_deref(),
                    },
                )?;
                write_pair_outputs(out, &partner.name, &evaluated.name, &[curve], n_c)?;
            }
        }
    }
    Ok(())
}

/// Runs the fusion-equivalence comparison on the first two sensors.
pub fn cmd_fuse(cfg: &RunConfig, out: &Path) -> Result<()> {
    let sensors = load_sensor_artifacts(cfg, out)?;
    if sensors.len() < 2 {
        return Err(Error::InvalidArgument(
            "fuse needs at least two sensors".into(),
        ));
    }
    let (a, b) = (&sensors[0], &sensors[1]);
    let basis = fit_cca(&a.train.features, &b.train.features, cfg.variance_keep)?;
    let hyper = cfg
        .retrain_config()
        .hyper(derive(cfg.seed, &[tag("fuse")]));
    let report_data = equivalence_test(
        &basis,
        SensorRef {
            name: &a.name,
            train: &a.train,
            val: &a.val,
            head: &a.head,
        },
        SensorRef {
            name: &b.name,
            train: &b.train,
            val: &b.val,
            head: &b.head,
        },
        cfg.fusion_k,
        &hyper,
    )?;
    let text = report::fusion_to_text(&report_data);
    print!("{text}");
    let csv_path = fusion_csv_path(out, &a.name, &b.name);
    report::write_text(&csv_path, &report::fusion_to_csv(&report_data))?;
    report::write_text(&fusion_txt_path(out, &a.name, &b.name), &text)?;
    println!("wrote {}", csv_path.display());
    Ok(())
}

/// Computes similarity scores between two feature files and writes the
/// report next to the other artifacts.
pub fn cmd_similarity(features_a: &Path, features_b: &Path, out: &Path) -> Result<()> {
    let a = feature_file::load(features_a)?;
    let b = feature_file::load(features_b)?;
    let report_data = SimilarityReport::compute(&a.matrix, &b.matrix)?;
    let text = report::similarity_to_text(&report_data);
    print!("{text}");
    let base = format!("similarity_{}_{}", stem(features_a), stem(features_b));
    let csv_path = out.join(format!("{base}.csv"));
    report::write_text(&csv_path, &report::similarity_to_csv(&report_data))?;
    report::write_text(&out.join(format!("{base}.txt")), &text)?;
    println!("wrote {}", csv_path.display());
    Ok(())
}

/// Convenience used by tests and examples: the whole pipeline in one call
/// (generate, train, curves, fusion) against a fresh output directory.
pub fn run_full_pipeline(cfg: &RunConfig, out: &Path) -> Result<()> {
    cfg.validate()?;
    let out = ensure_out_dir(out)?;
    cmd_gen_data(cfg, &out)?;
    cmd_train(cfg, &out)?;
    cmd_curve(cfg, &out)?;
    cmd_fuse(cfg, &out)?;
    Ok(())
}

/// Sensor artifacts in the shape the grid API wants.
pub fn to_sensor_data(artifacts: Vec<SensorArtifacts>) -> Vec<SensorData> {
    artifacts
        .into_iter()
        .map(|a| SensorData {
            name: a.name,
            train: a.train,
            val: a.val,
            head: a.head,
            partner_train: a.partner_train,
        })
        .collect()
}
