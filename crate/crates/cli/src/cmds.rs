//! Implementations behind each subcommand: argument unpacking, file plumbing
//! and report assembly around the gdw-core calls.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use gdw_core::error::{Error, Result};
use gdw_core::fp::{self, FeatureMask, ImputeMethod};
use gdw_core::homophily::{self, LabelVector};
use gdw_core::learn::{self, accuracy, train, ImputeChoice, SplitSpec, TrainConfig};
use gdw_core::normalize::NormScheme;
use gdw_core::operators::{precompute_sign_features, FeatureBank, OperatorSpec};
use gdw_core::spectral;
use gdw_core::synth;
use gdw_core::wl::{self, RefineMode};
use gdw_core::{DenseMatrix, Graph};

use crate::args::*;
use crate::report::{emit, Report};

fn load_graph(path: &Path, directed: bool, nodes: Option<usize>) -> Result<Graph> {
    Graph::load_edge_list(path, directed, nodes)
}

pub fn precompute(args: &PrecomputeArgs) -> Result<()> {
    let started = Instant::now();
    let g = load_graph(&args.graph, args.directed, args.nodes)?;
    let x = DenseMatrix::load_auto(&args.features)?;
    let specs = OperatorSpec::parse_list(&args.spec)?;
    let bank = precompute_sign_features(&g, &x, &specs)?;
    bank.save(&args.out)?;
    let nnz_applied: usize = g.arc_count();
    let report = Report::new(
        "precompute",
        json!({
            "graph": args.graph.display().to_string(),
            "features": args.features.display().to_string(),
            "spec": args.spec,
            "directed": args.directed,
            "out": args.out.display().to_string(),
        }),
        json!({
            "nodes": g.n(),
            "arcs": nnz_applied,
            "feature_dim": x.cols(),
            "blocks": bank.blocks().len(),
            "block_files": (0..bank.blocks().len())
                .map(|k| format!("block_{k}.gdm"))
                .collect::<Vec<_>>(),
            "throughput_edges_per_second":
                (nnz_applied * specs.len()) as f64 / started.elapsed().as_secs_f64().max(1e-9),
        }),
        started,
    );
    emit(&report, args.report.as_deref()).map_err(|e| Error::io("report", e))
}

pub fn impute(args: &ImputeArgs) -> Result<()> {
    let started = Instant::now();
    let g = load_graph(&args.graph, args.directed, args.nodes)?;
    let x = DenseMatrix::load_auto(&args.features)?;
    let mask = match (&args.mask, args.missing_rate) {
        (Some(path), None) => FeatureMask::load_csv(path)?,
        (None, Some(rate)) => {
            let seed = args
                .seed
                .ok_or_else(|| Error::invalid("--missing-rate needs an explicit --seed"))?;
            synth::random_mask(x.rows(), x.cols(), rate, seed)?
        }
        _ => {
            return Err(Error::invalid(
                "provide exactly one of --mask or --missing-rate",
            ))
        }
    };
    let norm = parse_fp_norm(&args.norm)?;
    let before = {
        // Energy of the zero-filled initialization state.
        let zeroed = fp::impute(&g, &x, &mask, ImputeMethod::Zero)?;
        fp::dirichlet_energy(&g, &zeroed.matrix, norm)?
    };
    let result = match args.method.as_str() {
        "fp" => fp::feature_propagate(&g, &x, &mask, args.iters, args.tol, norm)?,
        "zero" => fp::impute(&g, &x, &mask, ImputeMethod::Zero)?,
        "random" => {
            let seed = args
                .seed
                .ok_or_else(|| Error::invalid("method random needs an explicit --seed"))?;
            fp::impute(&g, &x, &mask, ImputeMethod::Random { seed })?
        }
        "global_mean" => fp::impute(&g, &x, &mask, ImputeMethod::GlobalMean)?,
        "neighbor_mean" => fp::impute(&g, &x, &mask, ImputeMethod::NeighborMean)?,
        other => {
            return Err(Error::invalid(format!(
                "unknown method {other:?} (fp|zero|random|global_mean|neighbor_mean)"
            )))
        }
    };
    let after = fp::dirichlet_energy(&g, &result.matrix, norm)?;
    result.matrix.save_gdm(&args.out)?;
    let report = Report::new(
        "impute",
        json!({
            "graph": args.graph.display().to_string(),
            "features": args.features.display().to_string(),
            "method": args.method,
            "iters": args.iters,
            "tol": args.tol,
            "norm": args.norm,
            "missing_rate": args.missing_rate,
            "seed": args.seed,
            "out": args.out.display().to_string(),
        }),
        json!({
            "iterations": result.iterations,
            "residual": result.residual,
            "observed_entries": mask.observed_count(),
            "total_entries": mask.rows() * mask.cols(),
            "dirichlet_energy_before": before,
            "dirichlet_energy_after": after,
            "boundary_free_warnings": result.boundary_free_warnings,
        }),
        started,
    );
    emit(&report, args.report.as_deref()).map_err(|e| Error::io("report", e))
}

fn parse_fp_norm(s: &str) -> Result<NormScheme> {
    match s {
        "sym" => Ok(NormScheme::Sym),
        "sym_selfloop" => Ok(NormScheme::SymSelfloop),
        other => Err(Error::invalid(format!(
            "imputation norm must be sym or sym_selfloop, got {other:?}"
        ))),
    }
}

pub fn homophily_cmd(args: &HomophilyArgs) -> Result<()> {
    let started = Instant::now();
    let g = load_graph(&args.graph, args.directed, args.nodes)?;
    let y = LabelVector::load_csv(&args.labels, g.n())?;
    let report_body = homophily::effective_homophily(&g, &y)?;
    let compat = homophily::compatibility_matrix(&g, &y)?;
    let report = Report::new(
        "homophily",
        json!({
            "graph": args.graph.display().to_string(),
            "labels": args.labels.display().to_string(),
            "directed": args.directed,
        }),
        json!({
            "node_homophily": report_body.node_homophily,
            "compatibility": compat,
            "operators": report_body.operators,
            "h_eff_undirected": report_body.h_eff_undirected,
            "h_eff_directed": report_body.h_eff_directed,
            "gain": report_body.gain,
            "h_eff_undirected_with_diag": report_body.h_eff_undirected_with_diag,
            "h_eff_directed_with_diag": report_body.h_eff_directed_with_diag,
            "gain_with_diag": report_body.gain_with_diag,
        }),
        started,
    );
    emit(&report, args.out.as_deref()).map_err(|e| Error::io("report", e))
}

pub fn wl_cmd(args: &WlArgs) -> Result<()> {
    let started = Instant::now();
    let mode: RefineMode = args.mode.parse()?;
    let g1 = load_graph(&args.graph, !args.undirected, args.nodes)?;
    let metrics = match &args.graph2 {
        Some(path2) => {
            let g2 = load_graph(path2, !args.undirected, args.nodes)?;
            let cmp = wl::compare(&g1, &g2, mode);
            json!({
                "distinguishable": cmp.distinguishable,
                "iterations": cmp.iterations,
                "histograms": {
                    "graph": cmp.histogram_left,
                    "graph2": cmp.histogram_right,
                },
            })
        }
        None => {
            let coloring = wl::color_refine(&g1, mode, g1.n() + 1);
            json!({
                "iterations": coloring.stable_iteration,
                "color_classes": coloring.num_classes(),
                "histogram": coloring.histogram,
            })
        }
    };
    let report = Report::new(
        "wl",
        json!({
            "graph": args.graph.display().to_string(),
            "graph2": args.graph2.as_ref().map(|p| p.display().to_string()),
            "mode": args.mode,
            "undirected": args.undirected,
        }),
        metrics,
        started,
    );
    emit(&report, args.out.as_deref()).map_err(|e| Error::io("report", e))
}

pub fn spectral_cmd(args: &SpectralArgs) -> Result<()> {
    let started = Instant::now();
    let g = load_graph(&args.graph, false, args.nodes)?;
    let metrics = match &args.features {
        Some(fpath) => {
            // Fourier analysis: CSV rows of eigenvalue, mean magnitude over
            // channels, and the same after per-channel normalization (the two
            // averaging conventions).
            let x = DenseMatrix::load_auto(fpath)?;
            let (eigenvalues, mags) = spectral::graph_fourier_coefficients(&g, &x)?;
            let d = mags.cols();
            let mut channel_mass = vec![0.0f64; d];
            for c in 0..d {
                for r in 0..mags.rows() {
                    channel_mass[c] += mags.get(r, c);
                }
            }
            let mut lines = String::new();
            lines.push_str("eigenvalue,mean_magnitude,mean_normalized_magnitude\n");
            for r in 0..mags.rows() {
                let mean: f64 = (0..d).map(|c| mags.get(r, c)).sum::<f64>() / d as f64;
                let mean_norm: f64 = (0..d)
                    .map(|c| {
                        if channel_mass[c] > 0.0 {
                            mags.get(r, c) / channel_mass[c]
                        } else {
                            0.0
                        }
                    })
                    .sum::<f64>()
                    / d as f64;
                lines.push_str(&format!("{},{},{}\n", eigenvalues[r], mean, mean_norm));
            }
            std::fs::write(&args.out, lines)
                .map_err(|e| Error::io(args.out.display().to_string(), e))?;
            json!({ "rows": g.n(), "channels": d, "wrote": "spectrum_csv" })
        }
        None => {
            let pe = spectral::laplacian_eigenvectors(&g, args.k)?;
            match args.out.extension().and_then(|e| e.to_str()) {
                Some("csv") => pe.save_csv(&args.out)?,
                _ => pe.save_gdm(&args.out)?,
            }
            json!({ "rows": g.n(), "eigenvectors": args.k, "wrote": "positional_encodings" })
        }
    };
    let report = Report::new(
        "spectral",
        json!({
            "graph": args.graph.display().to_string(),
            "features": args.features.as_ref().map(|p| p.display().to_string()),
            "k": args.k,
            "out": args.out.display().to_string(),
        }),
        metrics,
        started,
    );
    emit(&report, args.report.as_deref()).map_err(|e| Error::io("report", e))
}

pub fn synth_cmd(args: &SynthCmd) -> Result<()> {
    let started = Instant::now();
    match args {
        SynthCmd::Er(a) => {
            let g = synth::gen_erdos_renyi(a.n, a.p, a.directed, a.seed)?;
            g.write_edge_list(&a.out_graph)?;
            let report = Report::new(
                "synth er",
                json!({ "n": a.n, "p": a.p, "directed": a.directed, "seed": a.seed }),
                json!({ "arcs": g.arc_count() }),
                started,
            );
            emit(&report, None).map_err(|e| Error::io("report", e))
        }
        SynthCmd::Pa(a) => {
            let h = synth::target_homophily_compat(a.classes, a.homophily)?;
            let (g, y) = synth::gen_pa_labeled(a.n, a.classes, a.attach, &h, a.seed)?;
            g.write_edge_list(&a.out_graph)?;
            y.save_csv(&a.out_labels)?;
            let report = Report::new(
                "synth pa",
                json!({
                    "n": a.n, "classes": a.classes, "attach": a.attach,
                    "homophily": a.homophily, "seed": a.seed,
                }),
                json!({ "arcs": g.arc_count() }),
                started,
            );
            emit(&report, None).map_err(|e| Error::io("report", e))
        }
        SynthCmd::Dirtask(a) => {
            let (g, x, y) = synth::gen_directed_task(a.n, a.p, a.seed)?;
            g.write_edge_list(&a.out_graph)?;
            x.save_gdm(&a.out_features)?;
            y.save_csv(&a.out_labels)?;
            let ones = (0..y.len()).filter(|&i| y.get(i) == Some(1)).count();
            let report = Report::new(
                "synth dirtask",
                json!({ "n": a.n, "p": a.p, "seed": a.seed }),
                json!({ "arcs": g.arc_count(), "positive_fraction": ones as f64 / a.n as f64 }),
                started,
            );
            emit(&report, None).map_err(|e| Error::io("report", e))
        }
        SynthCmd::Features(a) => {
            let y = LabelVector::load_csv(&a.labels, a.nodes)?;
            let x = synth::gen_class_features(&y, a.dim, a.sep, a.noise, a.seed)?;
            x.save_gdm(&a.out)?;
            let report = Report::new(
                "synth features",
                json!({
                    "labels": a.labels.display().to_string(), "nodes": a.nodes,
                    "dim": a.dim, "sep": a.sep, "noise": a.noise, "seed": a.seed,
                }),
                json!({ "rows": x.rows(), "cols": x.cols() }),
                started,
            );
            emit(&report, None).map_err(|e| Error::io("report", e))
        }
        SynthCmd::Mask(a) => {
            let mask = synth::random_mask(a.n, a.dim, a.missing_rate, a.seed)?;
            mask.save_csv(&a.out)?;
            let report = Report::new(
                "synth mask",
                json!({ "n": a.n, "dim": a.dim, "missing_rate": a.missing_rate, "seed": a.seed }),
                json!({ "observed": mask.observed_count(), "total": a.n * a.dim }),
                started,
            );
            emit(&report, None).map_err(|e| Error::io("report", e))
        }
    }
}

pub fn train_cmd(args: &TrainArgs) -> Result<()> {
    let started = Instant::now();
    let bank = FeatureBank::load(&args.bank)?;
    let y = LabelVector::load_csv(&args.labels, bank.n())?;
    // --split takes either a seed (integer) or a path to a split JSON file.
    let split: SplitSpec = match args.split.parse::<u64>() {
        Ok(seed) => SplitSpec::stratified(&y, args.train_per_class, args.val_fraction, seed)?,
        Err(_) => {
            let raw = std::fs::read_to_string(&args.split)
                .map_err(|e| Error::io(args.split.clone(), e))?;
            let s: SplitSpec = serde_json::from_str(&raw)
                .map_err(|e| Error::parse(args.split.clone(), 0, e.to_string()))?;
            SplitSpec::new(s.train, s.val, s.test, bank.n())?
        }
    };
    let cfg = TrainConfig {
        learning_rate: args.lr,
        max_epochs: args.epochs,
        patience: args.patience,
        seed: args.seed,
        hidden: args.hidden,
        weight_decay: args.weight_decay,
    };
    let (model, history) = train(&bank, &y, &split, &cfg)?;
    if let Some(out) = &args.out {
        std::fs::write(out, model.to_json()?).map_err(|e| Error::io(out.display().to_string(), e))?;
    }
    let test_accuracy = accuracy(&model, &bank, &y, &split.test)?;
    let report = Report::new(
        "train",
        json!({
            "bank": args.bank.display().to_string(),
            "labels": args.labels.display().to_string(),
            "split": args.split,
            "lr": args.lr,
            "epochs": args.epochs,
            "patience": args.patience,
            "hidden": args.hidden,
            "weight_decay": args.weight_decay,
            "seed": args.seed,
        }),
        json!({
            "architecture": "precomputed-bank linear readout (relu, softmax)",
            "epochs_run": history.epochs.len(),
            "best_epoch": history.best_epoch,
            "best_val_accuracy": history.best_val_accuracy,
            "test_accuracy": test_accuracy,
            "train_nodes": split.train.len(),
            "val_nodes": split.val.len(),
            "test_nodes": split.test.len(),
        }),
        started,
    );
    emit(&report, args.report.as_deref()).map_err(|e| Error::io("report", e))
}

#[derive(Debug, Deserialize)]
#[serde(default)]
pub struct TrainParams {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub hidden: usize,
    pub weight_decay: f64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.005,
            max_epochs: 10_000,
            patience: 200,
            hidden: 64,
            weight_decay: 0.0,
        }
    }
}

impl TrainParams {
    fn to_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            max_epochs: self.max_epochs,
            patience: self.patience,
            seed,
            hidden: self.hidden,
            weight_decay: self.weight_decay,
        }
    }
}

/// Config for `experiment fp`. Either point at files (graph/features/labels)
/// or let the driver generate a labeled preferential-attachment instance with
/// class-conditioned Gaussian features.
#[derive(Debug, Deserialize)]
pub struct FpExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    pub missing_rates: Vec<f64>,
    #[serde(default = "default_methods")]
    pub methods: Vec<String>,
    #[serde(default = "default_specs")]
    pub specs: String,
    #[serde(default)]
    pub train: TrainParams,
    // file mode
    pub graph: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    #[serde(default)]
    pub directed: bool,
    // synthetic mode
    pub n: Option<usize>,
    pub classes: Option<usize>,
    pub attach: Option<usize>,
    pub target_homophily: Option<f64>,
    pub feature_dim: Option<usize>,
    pub separation: Option<f64>,
    pub noise: Option<f64>,
}

fn default_methods() -> Vec<String> {
    ImputeChoice::all().iter().map(|m| m.name().to_string()).collect()
}

fn default_specs() -> String {
    "sym_selfloop^1,sym_selfloop^2".to_string()
}

#[derive(Debug, Deserialize)]
pub struct DirExperimentConfig {
    pub n: usize,
    pub p: f64,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub train: TrainParams,
}

#[derive(Debug, Serialize)]
struct DirSummary {
    runs: Vec<learn::DirExperimentReport>,
    majority_both_at_least: f64,
    mean_undirected: f64,
    mean_fwd_only: f64,
    mean_bwd_only: f64,
    mean_both: f64,
}

pub fn experiment_cmd(args: &ExperimentArgs) -> Result<()> {
    let started = Instant::now();
    let raw = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::io(args.config.display().to_string(), e))?;
    match args.kind.as_str() {
        "fp" => {
            let cfg: FpExperimentConfig = serde_json::from_str(&raw)
                .map_err(|e| Error::parse(args.config.display().to_string(), 0, e.to_string()))?;
            let (g, x, y) = load_fp_instance(&cfg)?;
            let methods: Vec<ImputeChoice> = cfg
                .methods
                .iter()
                .map(|m| m.parse())
                .collect::<Result<_>>()?;
            let specs = OperatorSpec::parse_list(&cfg.specs)?;
            let report_body = learn::run_fp_experiment(
                &g,
                &x,
                &y,
                &cfg.missing_rates,
                &methods,
                &specs,
                &cfg.train.to_config(cfg.seed),
                cfg.trials,
            )?;
            let report = Report::new(
                "experiment fp",
                serde_json::from_str(&raw).unwrap_or(json!({})),
                report_body,
                started,
            );
            emit(&report, args.out.as_deref()).map_err(|e| Error::io("report", e))
        }
        "dir" => {
            let cfg: DirExperimentConfig = serde_json::from_str(&raw)
                .map_err(|e| Error::parse(args.config.display().to_string(), 0, e.to_string()))?;
            let mut runs = Vec::new();
            for &seed in &cfg.seeds {
                runs.push(learn::run_dir_experiment(
                    cfg.n,
                    cfg.p,
                    seed,
                    &cfg.train.to_config(seed),
                )?);
            }
            let mean = |f: fn(&learn::DirExperimentReport) -> f64| -> f64 {
                runs.iter().map(f).sum::<f64>() / runs.len() as f64
            };
            let both_sorted = {
                let mut v: Vec<f64> = runs.iter().map(|r| r.accuracy_both).collect();
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                v
            };
            let summary = DirSummary {
                majority_both_at_least: both_sorted[both_sorted.len() / 2],
                mean_undirected: mean(|r| r.accuracy_undirected),
                mean_fwd_only: mean(|r| r.accuracy_fwd_only),
                mean_bwd_only: mean(|r| r.accuracy_bwd_only),
                mean_both: mean(|r| r.accuracy_both),
                runs,
            };
            let report = Report::new(
                "experiment dir",
                serde_json::from_str(&raw).unwrap_or(json!({})),
                summary,
                started,
            );
            emit(&report, args.out.as_deref()).map_err(|e| Error::io("report", e))
        }
        other => Err(Error::invalid(format!("unknown experiment {other:?} (fp|dir)"))),
    }
}

fn load_fp_instance(cfg: &FpExperimentConfig) -> Result<(Graph, DenseMatrix, LabelVector)> {
    if let (Some(gp), Some(fp_), Some(lp)) = (&cfg.graph, &cfg.features, &cfg.labels) {
        let g = Graph::load_edge_list(gp, cfg.directed, None)?;
        let x = DenseMatrix::load_auto(fp_)?;
        let y = LabelVector::load_csv(lp, g.n())?;
        return Ok((g, x, y));
    }
    let n = cfg.n.ok_or_else(|| Error::invalid("fp config needs n (or graph/features/labels paths)"))?;
    let classes = cfg.classes.unwrap_or(5);
    let attach = cfg.attach.unwrap_or(2);
    let h = synth::target_homophily_compat(classes, cfg.target_homophily.unwrap_or(0.8))?;
    let (g, y) = synth::gen_pa_labeled(n, classes, attach, &h, cfg.seed)?;
    let x = synth::gen_class_features(
        &y,
        cfg.feature_dim.unwrap_or(16),
        cfg.separation.unwrap_or(3.0),
        cfg.noise.unwrap_or(1.0),
        cfg.seed ^ 0xfea7,
    )?;
    Ok((g, x, y))
}

/// Exit-code mapping: invalid usage 1, bad data 2, numerical trouble 3.
pub fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Invalid(_) => 1,
        Error::Io { .. } | Error::Parse { .. } | Error::Shape(_) => 2,
        Error::Numerical(_) => 3,
    }
}
