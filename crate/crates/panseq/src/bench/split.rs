//! Incremental-mutant train/test split plans.
//!
//! The test antigens are fixed; the remaining mutants enter the training
//! set one or two at a time in a seeded shuffled order, always starting
//! from the wild type alone. Checkpoint k means "wild type plus the
//! first k-1 shuffled mutants".

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Canonical cumulative antigen-count checkpoints for the benchmark.
pub const DEFAULT_CHECKPOINTS: [usize; 11] = [1, 2, 3, 4, 5, 6, 8, 10, 12, 14, 16];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub wild_type: String,
    /// Fixed held-out mutants.
    pub test_antigens: Vec<String>,
    /// Seeded permutation of the training mutants.
    pub train_order: Vec<String>,
    /// Strictly increasing antigen counts; the last equals
    /// 1 + train_order.len().
    pub schedule: Vec<usize>,
    pub seed: u64,
}

impl SplitPlan {
    /// Training antigens at a checkpoint: wild type plus the first
    /// `checkpoint - 1` shuffled mutants.
    pub fn train_antigens_at(&self, checkpoint: usize) -> Result<Vec<String>> {
        if checkpoint == 0 || checkpoint > self.train_order.len() + 1 {
            return Err(Error::Config(format!(
                "checkpoint {checkpoint} outside 1..={}",
                self.train_order.len() + 1
            )));
        }
        let mut antigens = vec![self.wild_type.clone()];
        antigens.extend(self.train_order[..checkpoint - 1].iter().cloned());
        Ok(antigens)
    }
}

/// Build a split plan from disjoint train/test mutant sets.
///
/// The schedule is the canonical checkpoint list truncated to the
/// available antigens, with the full set appended when it is not already
/// a checkpoint (so the final checkpoint always uses every training
/// antigen).
pub fn make_split_plan(
    wild_type: &str,
    train_mutants: &[String],
    test_mutants: &[String],
    seed: u64,
) -> Result<SplitPlan> {
    let train_set: BTreeSet<&str> = train_mutants.iter().map(String::as_str).collect();
    let test_set: BTreeSet<&str> = test_mutants.iter().map(String::as_str).collect();
    if train_set.len() != train_mutants.len() || test_set.len() != test_mutants.len() {
        return Err(Error::Config("duplicate mutant in split sets".to_string()));
    }
    if let Some(overlap) = train_set.intersection(&test_set).next() {
        return Err(Error::Config(format!(
            "mutant '{overlap}' appears in both train and test sets"
        )));
    }
    if train_set.contains(wild_type) || test_set.contains(wild_type) {
        return Err(Error::Config(format!(
            "wild type '{wild_type}' must not appear among the mutants"
        )));
    }

    let mut train_order: Vec<String> = train_mutants.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    train_order.shuffle(&mut rng);

    let max_antigens = train_order.len() + 1;
    let mut schedule: Vec<usize> = DEFAULT_CHECKPOINTS
        .iter()
        .copied()
        .filter(|&c| c <= max_antigens)
        .collect();
    if schedule.last() != Some(&max_antigens) {
        schedule.push(max_antigens);
    }

    Ok(SplitPlan {
        wild_type: wild_type.to_string(),
        test_antigens: test_mutants.to_vec(),
        train_order,
        schedule,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i:02}A")).collect()
    }

    #[test]
    fn full_sized_plan_has_the_canonical_schedule() {
        let plan = make_split_plan("WT", &names("T", 15), &names("E", 15), 7).unwrap();
        assert_eq!(plan.schedule, DEFAULT_CHECKPOINTS.to_vec());
        assert_eq!(plan.train_order.len(), 15);
        assert_eq!(plan.test_antigens.len(), 15);
    }

    #[test]
    fn checkpoint_one_is_wild_type_only() {
        let plan = make_split_plan("WT", &names("T", 15), &names("E", 15), 7).unwrap();
        assert_eq!(plan.train_antigens_at(1).unwrap(), vec!["WT".to_string()]);
        let at4 = plan.train_antigens_at(4).unwrap();
        assert_eq!(at4.len(), 4);
        assert_eq!(at4[0], "WT");
        assert_eq!(&at4[1..], &plan.train_order[..3]);
    }

    #[test]
    fn equal_seeds_give_identical_orders() {
        let a = make_split_plan("WT", &names("T", 15), &names("E", 15), 42).unwrap();
        let b = make_split_plan("WT", &names("T", 15), &names("E", 15), 42).unwrap();
        assert_eq!(a, b);
        let c = make_split_plan("WT", &names("T", 15), &names("E", 15), 43).unwrap();
        assert_ne!(a.train_order, c.train_order);
    }

    #[test]
    fn overlap_and_wild_type_misuse_are_errors() {
        let mut train = names("T", 15);
        let test = names("E", 15);
        assert!(make_split_plan("WT", &train, &train, 1).is_err());
        train[0] = "E00A".to_string();
        assert!(make_split_plan("WT", &train, &test, 1).is_err());
        let mut with_wt = names("T", 14);
        with_wt.push("WT".to_string());
        assert!(make_split_plan("WT", &with_wt, &test, 1).is_err());
    }

    #[test]
    fn short_mutant_lists_truncate_the_schedule() {
        let plan = make_split_plan("WT", &names("T", 6), &names("E", 6), 3).unwrap();
        assert_eq!(plan.schedule, vec![1, 2, 3, 4, 5, 6, 7]);
        let plan = make_split_plan("WT", &names("T", 9), &names("E", 9), 3).unwrap();
        assert_eq!(plan.schedule, vec![1, 2, 3, 4, 5, 6, 8, 10]);
    }

    #[test]
    fn schedule_is_strictly_increasing_and_disjointness_holds() {
        for seed in 0..20 {
            let plan = make_split_plan("WT", &names("T", 15), &names("E", 15), seed).unwrap();
            for w in plan.schedule.windows(2) {
                assert!(w[0] < w[1]);
            }
            assert_eq!(*plan.schedule.last().unwrap(), 16);
            for t in &plan.train_order {
                assert!(!plan.test_antigens.contains(t));
            }
        }
    }
}
