//! Linear readout over a precomputed feature bank with manual gradients,
//! full-batch adaptive-moment training with early stopping, and the two
//! experiment drivers (missing-features robustness, directionality ablation).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::fp::{feature_propagate, impute, FeatureMask, ImputeMethod};
use crate::graph::Graph;
use crate::homophily::LabelVector;
use crate::normalize::NormScheme;
use crate::operators::{precompute_sign_features, FeatureBank, OperatorSpec};
use crate::synth::{gen_directed_task, random_mask};

/// Per-block linear maps plus a linear readout over their rectified
/// concatenation; probabilities by row softmax.
#[derive(Debug, Clone)]
pub struct SignModel {
    pub block_weights: Vec<DenseMatrix>,
    pub block_biases: Vec<Vec<f64>>,
    pub readout_weight: DenseMatrix,
    pub readout_bias: Vec<f64>,
    pub hidden: usize,
    pub classes: usize,
}

impl SignModel {
    /// Seeded initialization: weights drawn standard-normal scaled by
    /// 1/sqrt(fan_in), biases zero.
    pub fn init(blocks: usize, block_dim: usize, hidden: usize, classes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |rows: usize, cols: usize, fan_in: usize| -> DenseMatrix {
            let scale = 1.0 / (fan_in as f64).sqrt();
            let mut m = DenseMatrix::zeros(rows, cols);
            for v in m.data_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v = z * scale;
            }
            m
        };
        let block_weights: Vec<DenseMatrix> = (0..blocks)
            .map(|_| draw(block_dim, hidden, block_dim))
            .collect();
        let block_biases = vec![vec![0.0; hidden]; blocks];
        let readout_weight = draw(blocks * hidden, classes, blocks * hidden);
        let readout_bias = vec![0.0; classes];
        Self {
            block_weights,
            block_biases,
            readout_weight,
            readout_bias,
            hidden,
            classes,
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.block_weights.len()
    }

    fn zeros_like(&self) -> SignModel {
        SignModel {
            block_weights: self
                .block_weights
                .iter()
                .map(|w| DenseMatrix::zeros(w.rows(), w.cols()))
                .collect(),
            block_biases: self.block_biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            readout_weight: DenseMatrix::zeros(
                self.readout_weight.rows(),
                self.readout_weight.cols(),
            ),
            readout_bias: vec![0.0; self.readout_bias.len()],
            hidden: self.hidden,
            classes: self.classes,
        }
    }

    #[cfg(test)]
    fn for_each_param<F: FnMut(f64) -> f64>(&mut self, mut f: F) {
        for w in &mut self.block_weights {
            for v in w.data_mut() {
                *v = f(*v);
            }
        }
        for b in &mut self.block_biases {
            for v in b {
                *v = f(*v);
            }
        }
        for v in self.readout_weight.data_mut() {
            *v = f(*v);
        }
        for v in &mut self.readout_bias {
            *v = f(*v);
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelJson {
    hidden: usize,
    classes: usize,
    block_weights: Vec<MatrixJson>,
    block_biases: Vec<Vec<f64>>,
    readout_weight: MatrixJson,
    readout_bias: Vec<f64>,
}

fn to_json_matrix(m: &DenseMatrix) -> MatrixJson {
    MatrixJson {
        rows: m.rows(),
        cols: m.cols(),
        data: m.data().to_vec(),
    }
}

fn from_json_matrix(m: MatrixJson) -> Result<DenseMatrix> {
    DenseMatrix::from_vec(m.rows, m.cols, m.data)
}

impl SignModel {
    pub fn to_json(&self) -> Result<String> {
        let j = ModelJson {
            hidden: self.hidden,
            classes: self.classes,
            block_weights: self.block_weights.iter().map(to_json_matrix).collect(),
            block_biases: self.block_biases.clone(),
            readout_weight: to_json_matrix(&self.readout_weight),
            readout_bias: self.readout_bias.clone(),
        };
        serde_json::to_string_pretty(&j).map_err(|e| Error::invalid(format!("model json: {e}")))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: ModelJson =
            serde_json::from_str(s).map_err(|e| Error::parse("model json", 0, e.to_string()))?;
        Ok(SignModel {
            block_weights: j
                .block_weights
                .into_iter()
                .map(from_json_matrix)
                .collect::<Result<_>>()?,
            block_biases: j.block_biases,
            readout_weight: from_json_matrix(j.readout_weight)?,
            readout_bias: j.readout_bias,
            hidden: j.hidden,
            classes: j.classes,
        })
    }
}

/// Disjoint train/validation/test node sets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitSpec {
    pub fn new(train: Vec<usize>, val: Vec<usize>, test: Vec<usize>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for idx in train.iter().chain(&val).chain(&test) {
            if *idx >= n {
                return Err(Error::invalid(format!("split index {idx} >= n={n}")));
            }
            if seen[*idx] {
                return Err(Error::invalid(format!("split sets overlap at node {idx}")));
            }
            seen[*idx] = true;
        }
        Ok(Self { train, val, test })
    }

    /// Class-stratified split: `per_class` labeled nodes per class for
    /// training, `val_frac` of the remainder for validation, rest test.
    pub fn stratified(
        y: &LabelVector,
        per_class: usize,
        val_frac: f64,
        seed: u64,
    ) -> Result<Self> {
        let n = y.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..n).filter(|&i| y.is_known(i)).collect();
        shuffle(&mut order, &mut rng);
        let c = y.num_classes();
        let mut train = Vec::new();
        let mut taken = vec![0usize; c];
        let mut rest = Vec::new();
        for &i in &order {
            let class = y.get(i).unwrap() as usize;
            if taken[class] < per_class {
                taken[class] += 1;
                train.push(i);
            } else {
                rest.push(i);
            }
        }
        if train.is_empty() {
            return Err(Error::invalid("no labeled nodes to build a split from"));
        }
        let val_count = ((rest.len() as f64) * val_frac).round() as usize;
        let val: Vec<usize> = rest[..val_count].to_vec();
        let test: Vec<usize> = rest[val_count..].to_vec();
        SplitSpec::new(train, val, test, n)
    }

    /// Unstratified random split by fractions (train_frac, val_frac, rest test).
    pub fn random_fractions(n: usize, train_frac: f64, val_frac: f64, seed: u64) -> Result<Self> {
        if train_frac + val_frac >= 1.0 {
            return Err(Error::invalid("train and validation fractions must leave room for test"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..n).collect();
        shuffle(&mut order, &mut rng);
        let n_train = ((n as f64) * train_frac).round() as usize;
        let n_val = ((n as f64) * val_frac).round() as usize;
        SplitSpec::new(
            order[..n_train].to_vec(),
            order[n_train..n_train + n_val].to_vec(),
            order[n_train + n_val..].to_vec(),
            n,
        )
    }
}

/// Fisher-Yates on our own stream, keeping split draws platform-stable.
fn shuffle(xs: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..xs.len()).rev() {
        let j = rng.gen_range(0..=i);
        xs.swap(i, j);
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub hidden: usize,
    pub weight_decay: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.005,
            max_epochs: 10_000,
            patience: 200,
            seed: 0,
            hidden: 64,
            weight_decay: 0.0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.learning_rate < 0.0 {
            return Err(Error::invalid("learning rate must be nonnegative"));
        }
        if self.patience == 0 {
            return Err(Error::invalid("patience must be >= 1"));
        }
        if self.hidden == 0 {
            return Err(Error::invalid("hidden width must be >= 1"));
        }
        Ok(())
    }
}

/// Rows of each bank block restricted to an index set, gathered once.
fn gather_blocks(bank: &FeatureBank, idx: &[usize]) -> Vec<DenseMatrix> {
    bank.blocks()
        .iter()
        .map(|block| {
            let mut out = DenseMatrix::zeros(idx.len(), block.cols());
            for (row, &i) in idx.iter().enumerate() {
                out.row_mut(row).copy_from_slice(block.row(i));
            }
            out
        })
        .collect()
}

struct ForwardPass {
    /// Rectified concatenation, rows = batch, cols = blocks*hidden.
    hidden: DenseMatrix,
    /// Pre-activation of the same, for the rectifier gradient.
    pre: DenseMatrix,
    /// Row-softmax probabilities.
    probs: DenseMatrix,
}

fn forward_on(model: &SignModel, blocks: &[DenseMatrix]) -> Result<ForwardPass> {
    if blocks.len() != model.num_blocks() {
        return Err(Error::shape(format!(
            "model has {} blocks, bank supplies {}",
            model.num_blocks(),
            blocks.len()
        )));
    }
    let batch = blocks[0].rows();
    let h = model.hidden;
    let mut pre = DenseMatrix::zeros(batch, blocks.len() * h);
    for (k, block) in blocks.iter().enumerate() {
        if block.cols() != model.block_weights[k].rows() {
            return Err(Error::shape(format!(
                "block {k} has {} columns, weight expects {}",
                block.cols(),
                model.block_weights[k].rows()
            )));
        }
        let z = block.matmul(&model.block_weights[k])?;
        for row in 0..batch {
            for col in 0..h {
                pre.set(row, k * h + col, z.get(row, col) + model.block_biases[k][col]);
            }
        }
    }
    let mut hidden = pre.clone();
    for v in hidden.data_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let mut logits = hidden.matmul(&model.readout_weight)?;
    for row in 0..batch {
        for c in 0..model.classes {
            let v = logits.get(row, c) + model.readout_bias[c];
            logits.set(row, c, v);
        }
    }
    // Row softmax with max subtraction.
    let mut probs = logits;
    for row in 0..batch {
        let r = probs.row_mut(row);
        let max = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in r.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in r.iter_mut() {
            *v /= sum;
        }
    }
    Ok(ForwardPass { hidden, pre, probs })
}

/// Class probabilities for the nodes in `idx` (rows sum to 1).
pub fn forward(model: &SignModel, bank: &FeatureBank, idx: &[usize]) -> Result<DenseMatrix> {
    let blocks = gather_blocks(bank, idx);
    Ok(forward_on(model, &blocks)?.probs)
}

/// Mean cross-entropy over `idx` plus 0.5*weight_decay*(sum of squared
/// weights), with gradients for every parameter group by manual
/// backpropagation through softmax, readout, concatenation, rectifier and the
/// per-block linears. Biases are not decayed.
pub fn loss_and_grads(
    model: &SignModel,
    bank: &FeatureBank,
    y: &LabelVector,
    idx: &[usize],
    weight_decay: f64,
) -> Result<(f64, SignModel)> {
    let blocks = gather_blocks(bank, idx);
    loss_and_grads_on(model, &blocks, y, idx, weight_decay)
}

fn loss_and_grads_on(
    model: &SignModel,
    blocks: &[DenseMatrix],
    y: &LabelVector,
    idx: &[usize],
    weight_decay: f64,
) -> Result<(f64, SignModel)> {
    let batch = idx.len();
    if batch == 0 {
        return Err(Error::invalid("empty index set"));
    }
    for &i in idx {
        if !y.is_known(i) {
            return Err(Error::invalid(format!("node {i} in the loss set has no label")));
        }
    }
    let pass = forward_on(model, blocks)?;
    let mut loss = 0.0;
    for (row, &i) in idx.iter().enumerate() {
        let p = pass.probs.get(row, y.get(i).unwrap() as usize);
        loss -= p.max(1e-300).ln();
    }
    loss /= batch as f64;

    let mut decay_term = 0.0;
    for w in &model.block_weights {
        decay_term += w.data().iter().map(|v| v * v).sum::<f64>();
    }
    decay_term += model.readout_weight.data().iter().map(|v| v * v).sum::<f64>();
    loss += 0.5 * weight_decay * decay_term;

    // dL/dlogits = (P - onehot) / batch
    let mut dlogits = pass.probs.clone();
    for (row, &i) in idx.iter().enumerate() {
        let class = y.get(i).unwrap() as usize;
        dlogits.set(row, class, dlogits.get(row, class) - 1.0);
    }
    for v in dlogits.data_mut() {
        *v /= batch as f64;
    }

    let mut grads = model.zeros_like();
    // Readout: dOmega = hidden^T dlogits + decay, dbias = column sums.
    grads.readout_weight = pass.hidden.transpose().matmul(&dlogits)?;
    for (g, w) in grads
        .readout_weight
        .data_mut()
        .iter_mut()
        .zip(model.readout_weight.data())
    {
        *g += weight_decay * w;
    }
    for row in 0..batch {
        for c in 0..model.classes {
            grads.readout_bias[c] += dlogits.get(row, c);
        }
    }
    // Back through readout and rectifier.
    let mut dhidden = dlogits.matmul(&model.readout_weight.transpose())?;
    for (dv, pre) in dhidden.data_mut().iter_mut().zip(pass.pre.data()) {
        if *pre <= 0.0 {
            *dv = 0.0;
        }
    }
    // Per-block linears.
    let h = model.hidden;
    for k in 0..model.num_blocks() {
        let mut dpre_k = DenseMatrix::zeros(batch, h);
        for row in 0..batch {
            for col in 0..h {
                dpre_k.set(row, col, dhidden.get(row, k * h + col));
            }
        }
        grads.block_weights[k] = blocks[k].transpose().matmul(&dpre_k)?;
        for (g, w) in grads.block_weights[k]
            .data_mut()
            .iter_mut()
            .zip(model.block_weights[k].data())
        {
            *g += weight_decay * w;
        }
        for row in 0..batch {
            for col in 0..h {
                grads.block_biases[k][col] += dpre_k.get(row, col);
            }
        }
    }
    Ok((loss, grads))
}

/// Fraction of `idx` whose argmax prediction (ties to the lowest class id)
/// matches the label.
pub fn accuracy(model: &SignModel, bank: &FeatureBank, y: &LabelVector, idx: &[usize]) -> Result<f64> {
    if idx.is_empty() {
        return Ok(0.0);
    }
    let probs = forward(model, bank, idx)?;
    let mut correct = 0usize;
    for (row, &i) in idx.iter().enumerate() {
        let r = probs.row(row);
        let mut best = 0usize;
        for c in 1..r.len() {
            if r[c] > r[best] {
                best = c;
            }
        }
        if y.get(i) == Some(best as u32) {
            correct += 1;
        }
    }
    Ok(correct as f64 / idx.len() as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
}

struct AdamState {
    m: SignModel,
    v: SignModel,
    t: usize,
}

/// Full-batch training with per-parameter adaptive moments (bias-corrected
/// first/second moment accumulators). Tracks validation accuracy, keeps the
/// earliest best epoch on ties, stops after `patience` epochs without
/// improvement and returns the best-validation parameters. Bit-reproducible
/// for a fixed seed and thread count.
pub fn train(
    bank: &FeatureBank,
    y: &LabelVector,
    split: &SplitSpec,
    cfg: &TrainConfig,
) -> Result<(SignModel, TrainHistory)> {
    cfg.validate()?;
    if split.train.is_empty() || split.val.is_empty() {
        return Err(Error::invalid("train and validation sets must be nonempty"));
    }
    let classes = y.num_classes();
    let mut model = SignModel::init(
        bank.blocks().len(),
        bank.block_dim(),
        cfg.hidden,
        classes,
        cfg.seed,
    );
    let train_blocks = gather_blocks(bank, &split.train);

    let beta1: f64 = 0.9;
    let beta2: f64 = 0.999;
    let eps = 1e-8;
    let mut adam = AdamState {
        m: model.zeros_like(),
        v: model.zeros_like(),
        t: 0,
    };

    let mut history = Vec::new();
    let mut best_model = model.clone();
    let mut best_val = f64::NEG_INFINITY;
    let mut best_epoch = 0usize;
    let mut since_best = 0usize;

    for epoch in 1..=cfg.max_epochs {
        let (loss, grads) =
            loss_and_grads_on(&model, &train_blocks, y, &split.train, cfg.weight_decay)?;
        adam.t += 1;
        let t = adam.t as f64;
        let bc1 = 1.0 - beta1.powf(t);
        let bc2 = 1.0 - beta2.powf(t);
        update_group(
            model.block_weights.iter_mut().flat_map(|w| w.data_mut().iter_mut()),
            grads.block_weights.iter().flat_map(|w| w.data().iter()),
            adam.m.block_weights.iter_mut().flat_map(|w| w.data_mut().iter_mut()),
            adam.v.block_weights.iter_mut().flat_map(|w| w.data_mut().iter_mut()),
            cfg.learning_rate,
            beta1,
            beta2,
            eps,
            bc1,
            bc2,
        );
        update_group(
            model.block_biases.iter_mut().flatten(),
            grads.block_biases.iter().flatten(),
            adam.m.block_biases.iter_mut().flatten(),
            adam.v.block_biases.iter_mut().flatten(),
            cfg.learning_rate,
            beta1,
            beta2,
            eps,
            bc1,
            bc2,
        );
        update_group(
            model.readout_weight.data_mut().iter_mut(),
            grads.readout_weight.data().iter(),
            adam.m.readout_weight.data_mut().iter_mut(),
            adam.v.readout_weight.data_mut().iter_mut(),
            cfg.learning_rate,
            beta1,
            beta2,
            eps,
            bc1,
            bc2,
        );
        update_group(
            model.readout_bias.iter_mut(),
            grads.readout_bias.iter(),
            adam.m.readout_bias.iter_mut(),
            adam.v.readout_bias.iter_mut(),
            cfg.learning_rate,
            beta1,
            beta2,
            eps,
            bc1,
            bc2,
        );

        let val_acc = accuracy(&model, bank, y, &split.val)?;
        history.push(EpochStats {
            epoch,
            train_loss: loss,
            val_accuracy: val_acc,
        });
        if val_acc > best_val {
            best_val = val_acc;
            best_epoch = epoch;
            best_model = model.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    Ok((
        best_model,
        TrainHistory {
            epochs: history,
            best_epoch,
            best_val_accuracy: best_val,
        },
    ))
}

#[allow(clippy::too_many_arguments)]
fn update_group<'a>(
    params: impl Iterator<Item = &'a mut f64>,
    grads: impl Iterator<Item = &'a f64>,
    ms: impl Iterator<Item = &'a mut f64>,
    vs: impl Iterator<Item = &'a mut f64>,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    bc1: f64,
    bc2: f64,
) {
    for (((p, g), m), v) in params.zip(grads).zip(ms).zip(vs) {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let mhat = *m / bc1;
        let vhat = *v / bc2;
        *p -= lr * mhat / (vhat.sqrt() + eps);
    }
}

/// Label attached to every experiment report naming the classifier family.
pub const ARCHITECTURE_TAG: &str = "precomputed-bank linear readout (relu, softmax)";

/// Imputation method selector for the missing-features experiment; the seed
/// for the random baseline is supplied per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImputeChoice {
    Fp,
    Zero,
    Random,
    GlobalMean,
    NeighborMean,
}

impl ImputeChoice {
    pub fn name(self) -> &'static str {
        match self {
            ImputeChoice::Fp => "fp",
            ImputeChoice::Zero => "zero",
            ImputeChoice::Random => "random",
            ImputeChoice::GlobalMean => "global_mean",
            ImputeChoice::NeighborMean => "neighbor_mean",
        }
    }

    pub fn all() -> [ImputeChoice; 5] {
        [
            ImputeChoice::Fp,
            ImputeChoice::Zero,
            ImputeChoice::Random,
            ImputeChoice::GlobalMean,
            ImputeChoice::NeighborMean,
        ]
    }
}

impl std::str::FromStr for ImputeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fp" => Ok(ImputeChoice::Fp),
            "zero" => Ok(ImputeChoice::Zero),
            "random" => Ok(ImputeChoice::Random),
            "global_mean" => Ok(ImputeChoice::GlobalMean),
            "neighbor_mean" => Ok(ImputeChoice::NeighborMean),
            other => Err(Error::invalid(format!("unknown imputation method {other:?}"))),
        }
    }
}

fn run_impute(
    g: &Graph,
    x: &DenseMatrix,
    mask: &FeatureMask,
    choice: ImputeChoice,
    seed: u64,
    fp_iters: usize,
    fp_tol: f64,
) -> Result<DenseMatrix> {
    let r = match choice {
        ImputeChoice::Fp => feature_propagate(g, x, mask, fp_iters, fp_tol, NormScheme::Sym)?,
        ImputeChoice::Zero => impute(g, x, mask, ImputeMethod::Zero)?,
        ImputeChoice::Random => impute(g, x, mask, ImputeMethod::Random { seed })?,
        ImputeChoice::GlobalMean => impute(g, x, mask, ImputeMethod::GlobalMean)?,
        ImputeChoice::NeighborMean => impute(g, x, mask, ImputeMethod::NeighborMean)?,
    };
    Ok(r.matrix)
}

#[derive(Debug, Clone, Serialize)]
pub struct FpCell {
    pub missing_rate: f64,
    pub method: String,
    pub mean_accuracy: f64,
    pub std_error: f64,
    pub accuracies: Vec<f64>,
    /// (full_features_mean - mean) / full_features_mean.
    pub relative_drop: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FpExperimentReport {
    /// Classifier family the accuracies were produced with.
    pub architecture: &'static str,
    pub trials: usize,
    pub full_feature_accuracy_mean: f64,
    pub full_feature_accuracies: Vec<f64>,
    pub cells: Vec<FpCell>,
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Missing-features robustness driver. Works on the undirected view of the
/// graph (the imputation setting assumes symmetric diffusion). Per trial:
/// draw a stratified split (20 per class train, 15% of the rest validation),
/// a mask per missing rate, impute with every method, precompute the bank,
/// train, and record test accuracy. The full-features run (rate 0) is the
/// per-trial reference for relative drops.
#[allow(clippy::too_many_arguments)]
pub fn run_fp_experiment(
    g: &Graph,
    x: &DenseMatrix,
    y: &LabelVector,
    missing_rates: &[f64],
    methods: &[ImputeChoice],
    specs: &[OperatorSpec],
    cfg: &TrainConfig,
    trials: usize,
) -> Result<FpExperimentReport> {
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let g = &g.symmetrize();
    let mut full_accs = Vec::with_capacity(trials);
    let mut acc_table: Vec<Vec<Vec<f64>>> =
        vec![vec![Vec::with_capacity(trials); methods.len()]; missing_rates.len()];
    for trial in 0..trials {
        let trial_seed = cfg.seed.wrapping_add(1_000_003u64.wrapping_mul(trial as u64));
        let split = SplitSpec::stratified(y, 20, 0.15, trial_seed)?;
        let trial_cfg = TrainConfig {
            seed: trial_seed ^ 0xabcd,
            ..cfg.clone()
        };

        let full_bank = precompute_sign_features(g, x, specs)?;
        let (model, _) = train(&full_bank, y, &split, &trial_cfg)?;
        full_accs.push(accuracy(&model, &full_bank, y, &split.test)?);

        for (ri, &rate) in missing_rates.iter().enumerate() {
            let mask = random_mask(x.rows(), x.cols(), rate, trial_seed ^ 0x5eed)?;
            for (mi, &method) in methods.iter().enumerate() {
                let imputed = run_impute(g, x, &mask, method, trial_seed ^ 0xf111, 40, 1e-6)?;
                let bank = precompute_sign_features(g, &imputed, specs)?;
                let (model, _) = train(&bank, y, &split, &trial_cfg)?;
                acc_table[ri][mi].push(accuracy(&model, &bank, y, &split.test)?);
            }
        }
    }
    let (full_mean, _) = mean_and_stderr(&full_accs);
    let mut cells = Vec::new();
    for (ri, &rate) in missing_rates.iter().enumerate() {
        for (mi, &method) in methods.iter().enumerate() {
            let accs = &acc_table[ri][mi];
            let (mean, se) = mean_and_stderr(accs);
            cells.push(FpCell {
                missing_rate: rate,
                method: method.name().to_string(),
                mean_accuracy: mean,
                std_error: se,
                accuracies: accs.clone(),
                relative_drop: if full_mean > 0.0 {
                    (full_mean - mean) / full_mean
                } else {
                    0.0
                },
            });
        }
    }
    Ok(FpExperimentReport {
        architecture: ARCHITECTURE_TAG,
        trials,
        full_feature_accuracy_mean: full_mean,
        full_feature_accuracies: full_accs,
        cells,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DirExperimentReport {
    pub architecture: &'static str,
    pub seed: u64,
    pub accuracy_undirected: f64,
    pub accuracy_fwd_only: f64,
    pub accuracy_bwd_only: f64,
    pub accuracy_both: f64,
    /// Raised when the two-direction bank trails the forward-only bank by
    /// more than five points; a diagnostics flag, not a failure.
    pub both_underperforms_fwd: bool,
}

/// Directionality ablation on the in-vs-out-mean task: four banks (undirected
/// two-hop, forward-only, backward-only, both directions), one training run
/// each, test accuracy per bank.
pub fn run_dir_experiment(n: usize, p: f64, seed: u64, cfg: &TrainConfig) -> Result<DirExperimentReport> {
    let (g, x, y) = gen_directed_task(n, p, seed)?;
    let undirected = g.symmetrize();

    let split = SplitSpec::random_fractions(n, 0.5, 0.25, seed ^ 0x5f17)?;
    let undirected_bank = precompute_sign_features(
        &undirected,
        &x,
        &OperatorSpec::parse_list("sym_selfloop^1,sym_selfloop^2")?,
    )?;
    let fwd_bank = precompute_sign_features(&g, &x, &OperatorSpec::parse_list("row_fwd^1")?)?;
    let bwd_bank = precompute_sign_features(&g, &x, &OperatorSpec::parse_list("row_bwd^1")?)?;
    let both_bank =
        precompute_sign_features(&g, &x, &OperatorSpec::parse_list("row_fwd^1,row_bwd^1")?)?;

    let run = |bank: &FeatureBank, tag: u64| -> Result<f64> {
        let run_cfg = TrainConfig {
            seed: cfg.seed ^ tag,
            ..cfg.clone()
        };
        let (model, _) = train(bank, &y, &split, &run_cfg)?;
        accuracy(&model, bank, &y, &split.test)
    };
    let accuracy_undirected = run(&undirected_bank, 1)?;
    let accuracy_fwd_only = run(&fwd_bank, 2)?;
    let accuracy_bwd_only = run(&bwd_bank, 3)?;
    let accuracy_both = run(&both_bank, 4)?;

    Ok(DirExperimentReport {
        architecture: ARCHITECTURE_TAG,
        seed,
        accuracy_undirected,
        accuracy_fwd_only,
        accuracy_bwd_only,
        accuracy_both,
        both_underperforms_fwd: accuracy_both < accuracy_fwd_only - 0.05,
    })
}
