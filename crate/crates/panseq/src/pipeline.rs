//! End-to-end orchestration shared by the CLI and the test suites:
//! labeling with noise reduction, and the incremental-mutant benchmark
//! loop (featurize, train, evaluate per checkpoint).

use std::collections::BTreeMap;

use crate::bench::{
    encode_cksaap_pair_sparse, encode_onehot_pair_sparse, evaluate_scores, train_logreg,
    train_mlp, Encoding, EvalMetrics, SparseRow, SplitPlan, TrainConfig, CKSAAP_DIM, ONEHOT_DIM,
};
use crate::error::{Error, Result};
use crate::labeler::{aggregate_and_label, Label, LabeledPair, LabelingConfig};
use crate::noise::{nc_lookup, reduce_noise, NoiseDecision};
use crate::seqio::{CountTable, NC_TARGET_ID};
use crate::sim::SimulatedExperiment;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Full labeling: per-pair z-tests with min-p aggregation, then the
/// negative-control noise filter. The returned rows cover the real
/// targets only (negative-control rows exist solely to drive the
/// filter); the decision log covers every provisional binder.
pub fn label_experiment(
    mothers: &[CountTable],
    subs: &[CountTable],
    mother_of: &BTreeMap<String, String>,
    antigens: &BTreeMap<String, String>,
    cfg: &LabelingConfig,
) -> Result<(Vec<LabeledPair>, Vec<NoiseDecision>)> {
    let provisional = aggregate_and_label(mothers, subs, mother_of, antigens, cfg)?;
    let (nc_rows, target_rows): (Vec<LabeledPair>, Vec<LabeledPair>) = provisional
        .into_iter()
        .partition(|row| row.target_id == NC_TARGET_ID);
    let nc = nc_lookup(&nc_rows);
    reduce_noise(target_rows, &nc, cfg)
}

/// Label a simulated experiment, optionally removing singletons first
/// (the real pipeline always does).
pub fn label_simulated(
    experiment: &SimulatedExperiment,
    cfg: &LabelingConfig,
    remove_singletons: bool,
) -> Result<(Vec<LabeledPair>, Vec<NoiseDecision>)> {
    let prune = |tables: &[CountTable]| -> Vec<CountTable> {
        if remove_singletons {
            tables.iter().map(CountTable::remove_singletons).collect()
        } else {
            tables.to_vec()
        }
    };
    let mothers = prune(&experiment.mothers);
    let subs = prune(&experiment.subs);
    label_experiment(
        &mothers,
        &subs,
        &experiment.manifest.mother_map(),
        &experiment.manifest.antigens,
        cfg,
    )
}

/// One supervised example: a (VHH, antigen) pair with a binary label.
/// Only binder and non-binder rows become supervised pairs.
#[derive(Debug, Clone)]
pub struct BenchmarkPair {
    pub vhh: String,
    pub antigen_id: String,
    pub antigen_seq: String,
    pub is_binder: bool,
}

/// Extract the supervised dataset from labeled rows. Rows without an
/// antigen sequence are rejected (featurization needs one).
pub fn supervised_pairs(rows: &[LabeledPair]) -> Result<Vec<BenchmarkPair>> {
    let mut pairs = Vec::new();
    for row in rows {
        let is_binder = match row.label {
            Label::Binder => true,
            Label::NonBinder => false,
            Label::NonSignificant | Label::Noise => continue,
        };
        if row.antigen_sequence.is_empty() {
            return Err(Error::Config(format!(
                "row ({}, {}) has no antigen sequence; cannot featurize",
                row.vhh_sequence, row.target_id
            )));
        }
        pairs.push(BenchmarkPair {
            vhh: row.vhh_sequence.clone(),
            antigen_id: row.target_id.clone(),
            antigen_seq: row.antigen_sequence.clone(),
            is_binder,
        });
    }
    Ok(pairs)
}

/// Baseline model choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Lr,
    Mlp,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Lr => "lr",
            ModelKind::Mlp => "mlp",
        }
    }
}

/// Feature width for an encoding (pair input).
pub fn encoding_width(encoding: Encoding) -> usize {
    match encoding {
        Encoding::OnehotPair => ONEHOT_DIM,
        Encoding::Cksaap => 2 * CKSAAP_DIM,
    }
}

/// Encode pairs under the chosen encoding.
pub fn encode_pairs(pairs: &[BenchmarkPair], encoding: Encoding) -> Result<Vec<SparseRow>> {
    pairs
        .iter()
        .map(|p| match encoding {
            Encoding::OnehotPair => encode_onehot_pair_sparse(&p.vhh, &p.antigen_seq),
            Encoding::Cksaap => encode_cksaap_pair_sparse(&p.vhh, &p.antigen_seq),
        })
        .collect()
}

/// Metrics for one (run, checkpoint) cell of the benchmark grid.
#[derive(Debug, Clone)]
pub struct CheckpointResult {
    pub run: usize,
    pub checkpoint: usize,
    pub n_antigens: usize,
    pub model: ModelKind,
    pub metrics: EvalMetrics,
}

/// Train on the given pairs (after carving out the seeded validation
/// fraction) and score the test pairs.
pub fn train_and_evaluate(
    train_pairs: &[BenchmarkPair],
    test_pairs: &[BenchmarkPair],
    model: ModelKind,
    encoding: Encoding,
    cfg: &TrainConfig,
) -> Result<EvalMetrics> {
    cfg.validate()?;
    if train_pairs.is_empty() || test_pairs.is_empty() {
        return Err(Error::DegenerateData(
            "empty train or test set".to_string(),
        ));
    }
    let train_rows = encode_pairs(train_pairs, encoding)?;
    let test_rows = encode_pairs(test_pairs, encoding)?;
    let n_features = encoding_width(encoding);

    // Seeded uniform validation split at the pair level.
    let mut order: Vec<usize> = (0..train_pairs.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    order.shuffle(&mut rng);
    let n_val = ((train_pairs.len() as f64) * cfg.validation_fraction).floor() as usize;
    let (val_idx, fit_idx) = order.split_at(n_val);

    let gather_rows = |idx: &[usize]| -> Vec<SparseRow> {
        idx.iter().map(|&i| train_rows[i].clone()).collect()
    };
    let gather_labels =
        |idx: &[usize]| -> Vec<bool> { idx.iter().map(|&i| train_pairs[i].is_binder).collect() };
    let fit_rows = gather_rows(fit_idx);
    let fit_labels = gather_labels(fit_idx);
    let val_rows = gather_rows(val_idx);
    let val_labels = gather_labels(val_idx);

    let scores: Vec<f64> = match model {
        ModelKind::Lr => {
            let lr = train_logreg(&fit_rows, &fit_labels, n_features, cfg)?;
            test_rows.iter().map(|r| lr.predict_proba(r)).collect()
        }
        ModelKind::Mlp => {
            let (mlp, _log) =
                train_mlp(&fit_rows, &fit_labels, &val_rows, &val_labels, n_features, cfg)?;
            test_rows.iter().map(|r| mlp.predict_proba(r)).collect()
        }
    };
    let labels: Vec<bool> = test_pairs.iter().map(|p| p.is_binder).collect();
    evaluate_scores(&scores, &labels)
}

/// Run the incremental-antigen benchmark over the plan's schedule (or a
/// subset of checkpoints).
pub fn run_benchmark(
    pairs: &[BenchmarkPair],
    plan: &SplitPlan,
    checkpoints: &[usize],
    run: usize,
    model: ModelKind,
    encoding: Encoding,
    cfg: &TrainConfig,
) -> Result<Vec<CheckpointResult>> {
    let test_pairs: Vec<BenchmarkPair> = pairs
        .iter()
        .filter(|p| plan.test_antigens.contains(&p.antigen_id))
        .cloned()
        .collect();
    if test_pairs.is_empty() {
        return Err(Error::DegenerateData(
            "no test pairs for the plan's test antigens".to_string(),
        ));
    }
    let mut results = Vec::new();
    for &checkpoint in checkpoints {
        let train_antigens = plan.train_antigens_at(checkpoint)?;
        let train_pairs: Vec<BenchmarkPair> = pairs
            .iter()
            .filter(|p| train_antigens.contains(&p.antigen_id))
            .cloned()
            .collect();
        let metrics = train_and_evaluate(&train_pairs, &test_pairs, model, encoding, cfg)?;
        results.push(CheckpointResult {
            run,
            checkpoint,
            n_antigens: train_antigens.len(),
            model,
            metrics,
        });
    }
    Ok(results)
}
