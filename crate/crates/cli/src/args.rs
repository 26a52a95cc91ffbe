//! clap argument structs for every subcommand.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "gdw",
    version,
    about = "Sparse-graph diffusion workbench: operator banks, feature propagation, homophily analytics, WL refinement, synthetic graphs and a trainable readout"
)]
pub struct Cli {
    /// Worker threads (default: all cores; 1 selects the bit-exact reference path).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Precompute a diffusion-operator feature bank from a graph and features.
    Precompute(PrecomputeArgs),
    /// Impute missing features (feature propagation or baselines).
    Impute(ImputeArgs),
    /// Homophily analytics: node homophily, compatibility, effective homophily.
    Homophily(HomophilyArgs),
    /// Color refinement and graph-pair distinguishability.
    Wl(WlArgs),
    /// Laplacian eigenvectors or graph Fourier spectra.
    Spectral(SpectralArgs),
    /// Seeded synthetic graphs, features and masks.
    #[command(subcommand)]
    Synth(SynthCmd),
    /// Train the bank readout with early stopping.
    Train(TrainArgs),
    /// Run a configured experiment (fp robustness or directionality ablation).
    Experiment(ExperimentArgs),
}

#[derive(Args, Debug)]
pub struct PrecomputeArgs {
    /// Edge list, "src<TAB>dst" per line, '#' comments.
    #[arg(long)]
    pub graph: PathBuf,
    /// Dense features (.gdm binary or headerless CSV).
    #[arg(long)]
    pub features: PathBuf,
    /// Comma-separated operator specs, e.g.
    /// "sym_selfloop^1,sym_selfloop^2,ppr(0.05,64,1e-4)^1,triangle^1".
    #[arg(long)]
    pub spec: String,
    /// Output bank directory (block_k.gdm files plus manifest.json).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub directed: bool,
    /// Fix the node count instead of inferring 1 + max id.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Optional report destination (stdout otherwise).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ImputeArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    /// Observation mask CSV (0/1 per entry); mutually exclusive with --missing-rate.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Draw a random mask with this missing probability (needs --seed).
    #[arg(long)]
    pub missing_rate: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// fp | zero | random | global_mean | neighbor_mean
    #[arg(long, default_value = "fp")]
    pub method: String,
    #[arg(long, default_value_t = 40)]
    pub iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// sym | sym_selfloop
    #[arg(long, default_value = "sym")]
    pub norm: String,
    #[arg(long)]
    pub directed: bool,
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Imputed matrix destination (GDM1).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct HomophilyArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Labels CSV, "node_id,label_id" per line.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub directed: bool,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct WlArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Second graph; when present the report compares the two.
    #[arg(long)]
    pub graph2: Option<PathBuf>,
    /// dwl | uwl | wl1 | out | in
    #[arg(long, default_value = "dwl")]
    pub mode: String,
    /// Load the edge lists as undirected graphs.
    #[arg(long)]
    pub undirected: bool,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SpectralArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// With features: write the Fourier spectrum CSV. Without: write the k
    /// smallest Laplacian eigenvectors (gdm, or csv by extension).
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum SynthCmd {
    /// Erdos-Renyi graph.
    Er(SynthErArgs),
    /// Labeled directed preferential-attachment graph.
    Pa(SynthPaArgs),
    /// Directed in-vs-out-mean classification task.
    Dirtask(SynthDirtaskArgs),
    /// Class-conditioned Gaussian features for given labels.
    Features(SynthFeaturesArgs),
    /// Random observation mask.
    Mask(SynthMaskArgs),
}

#[derive(Args, Debug)]
pub struct SynthErArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub directed: bool,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out_graph: PathBuf,
}

#[derive(Args, Debug)]
pub struct SynthPaArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub classes: usize,
    /// Out-edges added per new node.
    #[arg(long)]
    pub attach: usize,
    /// Target homophily level in [0,1] for the compatibility matrix.
    #[arg(long)]
    pub homophily: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out_graph: PathBuf,
    #[arg(long)]
    pub out_labels: PathBuf,
}

#[derive(Args, Debug)]
pub struct SynthDirtaskArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out_graph: PathBuf,
    #[arg(long)]
    pub out_features: PathBuf,
    #[arg(long)]
    pub out_labels: PathBuf,
}

#[derive(Args, Debug)]
pub struct SynthFeaturesArgs {
    #[arg(long)]
    pub labels: PathBuf,
    /// Node count the labels cover.
    #[arg(long)]
    pub nodes: usize,
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value_t = 3.0)]
    pub sep: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SynthMaskArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub missing_rate: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Bank directory written by `precompute`.
    #[arg(long)]
    pub bank: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Split seed (integer) or path to a split JSON file with train/val/test arrays.
    #[arg(long)]
    pub split: String,
    /// Training nodes per class for seed-based splits.
    #[arg(long, default_value_t = 20)]
    pub train_per_class: usize,
    /// Validation fraction of the non-training nodes for seed-based splits.
    #[arg(long, default_value_t = 0.15)]
    pub val_fraction: f64,
    #[arg(long, default_value_t = 0.005)]
    pub lr: f64,
    #[arg(long, default_value_t = 10_000)]
    pub epochs: usize,
    #[arg(long, default_value_t = 200)]
    pub patience: usize,
    #[arg(long, default_value_t = 64)]
    pub hidden: usize,
    #[arg(long, default_value_t = 0.0)]
    pub weight_decay: f64,
    /// Parameter-initialization seed.
    #[arg(long)]
    pub seed: u64,
    /// Model JSON destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// fp | dir
    pub kind: String,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
