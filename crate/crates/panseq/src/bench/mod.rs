//! Benchmark machinery: incremental-mutant split plans, sequence
//! featurization, from-scratch LR and MLP baselines, and
//! precision/recall/PR-AUC evaluation, plus dataset statistics.

mod features;
mod identity;
mod logreg;
mod metrics;
mod mlp;
mod split;
mod summary;

pub use features::{
    encode_cksaap, encode_cksaap_pair_sparse, encode_onehot_pair, encode_onehot_pair_sparse,
    Encoding, FeatureVector, SparseRow, AMINO_ACIDS, ANTIGEN_MAX_LEN, CKSAAP_DIM, CKSAAP_MAX_GAP,
    ONEHOT_DIM, VHH_MAX_LEN,
};
pub use identity::{identity_histogram, pairwise_identity, sample_identity_histogram};
pub use logreg::{train_logreg, LinearModel};
pub use metrics::{evaluate_scores, EvalMetrics};
pub use mlp::{train_mlp, EpochLog, MlpGrads, MlpModel};
pub use split::{make_split_plan, SplitPlan, DEFAULT_CHECKPOINTS};
pub use summary::{dataset_stats, DatasetSummary, PerAntigenCounts};

/// Training hyperparameters for both baselines.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    /// MLP training epochs.
    pub epochs: usize,
    pub batch_size: usize,
    /// Adam learning rate (MLP).
    pub learning_rate: f64,
    /// Fraction of the training pairs held out for validation.
    pub validation_fraction: f64,
    /// Hidden-layer width (MLP).
    pub hidden_units: usize,
    /// L2 coefficient on the LR weights (mean-loss scale).
    pub l2_penalty: f64,
    /// LR optimizer iteration cap.
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 256,
            learning_rate: 1e-4,
            validation_fraction: 0.10,
            hidden_units: 512,
            l2_penalty: 1e-4,
            max_iterations: 1000,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if self.epochs == 0
            || self.batch_size == 0
            || self.hidden_units == 0
            || self.max_iterations == 0
        {
            return Err(crate::Error::Config(
                "epochs, batch_size, hidden_units, and max_iterations must be positive"
                    .to_string(),
            ));
        }
        let rates_ok = self.learning_rate.is_finite()
            && self.learning_rate > 0.0
            && self.l2_penalty.is_finite()
            && self.l2_penalty >= 0.0;
        if !rates_ok {
            return Err(crate::Error::Config(
                "learning_rate must be positive and l2_penalty non-negative".to_string(),
            ));
        }
        let fraction_ok = self.validation_fraction.is_finite()
            && self.validation_fraction > 0.0
            && self.validation_fraction < 1.0;
        if !fraction_ok {
            return Err(crate::Error::Config(format!(
                "validation_fraction must be in (0, 1), got {}",
                self.validation_fraction
            )));
        }
        Ok(())
    }
}
