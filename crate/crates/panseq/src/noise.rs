//! Negative-control noise reduction.
//!
//! Every provisional binder is re-examined against the same VHH's result
//! versus the negative-control libraries:
//!
//! 1. NC non-binder            -> the binder label stands.
//! 2. NC binder                -> reassigned to noise (nonspecific binding).
//! 3. NC non-significant       -> compare p_NC / p_target to 10^threshold:
//!    3a. ratio below the threshold  -> reassigned to non-significant.
//!    3b. ratio at or above it       -> the binder label stands.
//!
//! A VHH absent from every negative-control result is treated as NC
//! non-significant with p = 1 (log10 p = 0), which feeds branch 3. All
//! ratio arithmetic happens in log10 space, so p-values far below f64
//! underflow behave identically to representable ones.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::labeler::{Label, LabeledPair, LabelingConfig};

/// The VHH's provisional status against the negative control.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcStatus {
    Binder,
    NonBinder,
    NonSignificant,
    Absent,
}

impl NcStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            NcStatus::Binder => "binder",
            NcStatus::NonBinder => "non_binder",
            NcStatus::NonSignificant => "non_significant",
            NcStatus::Absent => "absent",
        }
    }
}

/// What happened to a provisional binder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseOutcome {
    KeepBinder,
    ToNoise,
    ToNonSignificant,
}

/// Which branch of the algorithm fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseBranch {
    /// 1: NC non-binder, binder kept.
    NcNonBinder,
    /// 2: NC binder, reassigned to noise.
    NcBinder,
    /// 3a: ratio below threshold, reassigned to non-significant.
    RatioBelow,
    /// 3b: ratio at or above threshold, binder kept.
    RatioAtLeast,
}

impl NoiseBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseBranch::NcNonBinder => "1",
            NoiseBranch::NcBinder => "2",
            NoiseBranch::RatioBelow => "3a",
            NoiseBranch::RatioAtLeast => "3b",
        }
    }
}

/// Audit record for one re-examined binder.
#[derive(Debug, Clone)]
pub struct NoiseDecision {
    pub vhh_sequence: String,
    pub target_id: String,
    /// log10 p of the binder's winning test against the target.
    pub target_log10_p: f64,
    pub nc_status: NcStatus,
    /// log10 p against the negative control; None when absent.
    pub nc_log10_p: Option<f64>,
    pub outcome: NoiseOutcome,
    pub branch: NoiseBranch,
}

/// Provisional negative-control result for one VHH.
#[derive(Debug, Clone, Copy)]
pub struct NcResult {
    pub label: Label,
    pub log10_p: f64,
}

/// Build the NC lookup from the labeled rows of the reserved NC target.
pub fn nc_lookup(nc_rows: &[LabeledPair]) -> BTreeMap<String, NcResult> {
    nc_rows
        .iter()
        .map(|row| {
            (
                row.vhh_sequence.clone(),
                NcResult {
                    label: row.label,
                    log10_p: row.best_log10_p,
                },
            )
        })
        .collect()
}

/// Apply the noise-reduction algorithm to provisional labels.
///
/// Non-binder and non-significant rows pass through untouched; every
/// binder row yields exactly one [`NoiseDecision`]. Returns the final
/// rows (same order) and the decision log.
pub fn reduce_noise(
    pairs: Vec<LabeledPair>,
    nc_results: &BTreeMap<String, NcResult>,
    cfg: &LabelingConfig,
) -> Result<(Vec<LabeledPair>, Vec<NoiseDecision>)> {
    cfg.validate()?;
    let mut decisions = Vec::new();
    let mut out = Vec::with_capacity(pairs.len());
    for mut row in pairs {
        if row.label != Label::Binder {
            out.push(row);
            continue;
        }
        let (nc_status, nc_log10_p) = match nc_results.get(&row.vhh_sequence) {
            Some(nc) => match nc.label {
                Label::Binder => (NcStatus::Binder, Some(nc.log10_p)),
                Label::NonBinder => (NcStatus::NonBinder, Some(nc.log10_p)),
                Label::NonSignificant => (NcStatus::NonSignificant, Some(nc.log10_p)),
                Label::Noise => {
                    return Err(Error::Config(format!(
                        "negative-control result for '{}' carries a noise label; \
                         NC results must be provisional",
                        row.vhh_sequence
                    )))
                }
            },
            None => (NcStatus::Absent, None),
        };
        let (outcome, branch) = match nc_status {
            NcStatus::NonBinder => (NoiseOutcome::KeepBinder, NoiseBranch::NcNonBinder),
            NcStatus::Binder => (NoiseOutcome::ToNoise, NoiseBranch::NcBinder),
            NcStatus::NonSignificant | NcStatus::Absent => {
                // Absent feeds branch 3 with p_NC = 1.
                let nc_p = nc_log10_p.unwrap_or(0.0);
                let log_ratio = nc_p - row.best_log10_p;
                if log_ratio >= cfg.log10_ratio_threshold {
                    (NoiseOutcome::KeepBinder, NoiseBranch::RatioAtLeast)
                } else {
                    (NoiseOutcome::ToNonSignificant, NoiseBranch::RatioBelow)
                }
            }
        };
        row.label = match outcome {
            NoiseOutcome::KeepBinder => Label::Binder,
            NoiseOutcome::ToNoise => Label::Noise,
            NoiseOutcome::ToNonSignificant => Label::NonSignificant,
        };
        decisions.push(NoiseDecision {
            vhh_sequence: row.vhh_sequence.clone(),
            target_id: row.target_id.clone(),
            target_log10_p: row.best_log10_p,
            nc_status,
            nc_log10_p,
            outcome,
            branch,
        });
        out.push(row);
    }
    Ok((out, decisions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Direction;

    fn binder(vhh: &str, log10_p: f64) -> LabeledPair {
        LabeledPair {
            vhh_sequence: vhh.to_string(),
            target_id: "WT".to_string(),
            antigen_sequence: String::new(),
            label: Label::Binder,
            best_log10_p: log10_p,
            best_direction: Direction::Increased,
            source_library_id: "s1".to_string(),
        }
    }

    fn nc(label: Label, log10_p: f64) -> NcResult {
        NcResult { label, log10_p }
    }

    fn run(
        pairs: Vec<LabeledPair>,
        ncs: &[(&str, NcResult)],
    ) -> (Vec<LabeledPair>, Vec<NoiseDecision>) {
        let map: BTreeMap<String, NcResult> =
            ncs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        reduce_noise(pairs, &map, &LabelingConfig::default()).unwrap()
    }

    #[test]
    fn branch_1_nc_non_binder_keeps_binder() {
        let (rows, log) = run(
            vec![binder("V", -10.0)],
            &[("V", nc(Label::NonBinder, -6.0))],
        );
        assert_eq!(rows[0].label, Label::Binder);
        assert_eq!(log[0].branch, NoiseBranch::NcNonBinder);
        assert_eq!(log[0].outcome, NoiseOutcome::KeepBinder);
    }

    #[test]
    fn branch_2_nc_binder_becomes_noise() {
        let (rows, log) = run(vec![binder("V", -10.0)], &[("V", nc(Label::Binder, -8.0))]);
        assert_eq!(rows[0].label, Label::Noise);
        assert_eq!(log[0].branch, NoiseBranch::NcBinder);
    }

    #[test]
    fn branch_3b_large_ratio_keeps_binder() {
        // p_target = 1e-8, p_NC = 1e-4: ratio 10^4 >= 10^2.5.
        let (rows, log) = run(
            vec![binder("V", -8.0)],
            &[("V", nc(Label::NonSignificant, -4.0))],
        );
        assert_eq!(rows[0].label, Label::Binder);
        assert_eq!(log[0].branch, NoiseBranch::RatioAtLeast);
    }

    #[test]
    fn branch_3a_small_ratio_demotes() {
        // p_target = 1e-5, p_NC = 1e-4: ratio 10^1 < 10^2.5.
        let (rows, log) = run(
            vec![binder("V", -5.0)],
            &[("V", nc(Label::NonSignificant, -4.0))],
        );
        assert_eq!(rows[0].label, Label::NonSignificant);
        assert_eq!(log[0].branch, NoiseBranch::RatioBelow);
    }

    #[test]
    fn ratio_exactly_at_threshold_keeps_binder() {
        let (rows, log) = run(
            vec![binder("V", -6.5)],
            &[("V", nc(Label::NonSignificant, -4.0))],
        );
        assert_eq!(rows[0].label, Label::Binder);
        assert_eq!(log[0].branch, NoiseBranch::RatioAtLeast);
    }

    #[test]
    fn absent_from_nc_feeds_branch_3_with_p_one() {
        // log ratio = 0 - (-8) = 8 >= 2.5 -> keep.
        let (rows, log) = run(vec![binder("V", -8.0)], &[]);
        assert_eq!(rows[0].label, Label::Binder);
        assert_eq!(log[0].nc_status, NcStatus::Absent);
        assert_eq!(log[0].nc_log10_p, None);
        assert_eq!(log[0].branch, NoiseBranch::RatioAtLeast);

        // Weak binder (p = 0.04): log ratio = 1.4 < 2.5 -> demote.
        let (rows, log) = run(vec![binder("V", 0.04f64.log10())], &[]);
        assert_eq!(rows[0].label, Label::NonSignificant);
        assert_eq!(log[0].branch, NoiseBranch::RatioBelow);
    }

    #[test]
    fn deep_log_space_values_behave_identically() {
        // Both p-values are far below f64 underflow; only the log10
        // difference matters.
        let (rows, log) = run(
            vec![binder("V", -300.0)],
            &[("V", nc(Label::NonSignificant, -297.6))],
        );
        assert_eq!(log[0].branch, NoiseBranch::RatioBelow);
        assert_eq!(rows[0].label, Label::NonSignificant);

        let (rows, log) = run(
            vec![binder("V", -300.0)],
            &[("V", nc(Label::NonSignificant, -297.5))],
        );
        assert_eq!(log[0].branch, NoiseBranch::RatioAtLeast);
        assert_eq!(rows[0].label, Label::Binder);
    }

    #[test]
    fn non_binders_pass_through_untouched() {
        let mut non_binder = binder("V", -9.0);
        non_binder.label = Label::NonBinder;
        non_binder.best_direction = Direction::Decreased;
        let mut nonsig = binder("W", -0.5);
        nonsig.label = Label::NonSignificant;
        let input = vec![non_binder.clone(), nonsig.clone()];
        let (rows, log) = run(input.clone(), &[("V", nc(Label::Binder, -9.0))]);
        assert_eq!(rows, input);
        assert!(log.is_empty());
    }

    #[test]
    fn every_binder_gets_exactly_one_decision() {
        let pairs: Vec<LabeledPair> = (0..40)
            .map(|i| binder(&format!("V{i:02}"), -(i as f64) / 4.0 - 1.5))
            .collect();
        let ncs: Vec<(String, NcResult)> = (0..40)
            .map(|i| {
                let label = match i % 4 {
                    0 => Label::Binder,
                    1 => Label::NonBinder,
                    _ => Label::NonSignificant,
                };
                (format!("V{i:02}"), nc(label, -(i as f64) / 8.0))
            })
            .collect();
        let map: BTreeMap<String, NcResult> = ncs.into_iter().collect();
        let (rows, log) = reduce_noise(pairs, &map, &LabelingConfig::default()).unwrap();
        assert_eq!(log.len(), 40);
        // The decision log partitions the binder set: one decision per
        // binder, and outcome/branch always correspond.
        for d in &log {
            match d.branch {
                NoiseBranch::NcNonBinder | NoiseBranch::RatioAtLeast => {
                    assert_eq!(d.outcome, NoiseOutcome::KeepBinder)
                }
                NoiseBranch::NcBinder => assert_eq!(d.outcome, NoiseOutcome::ToNoise),
                NoiseBranch::RatioBelow => {
                    assert_eq!(d.outcome, NoiseOutcome::ToNonSignificant)
                }
            }
        }
        // Noise rows in the output only arise from prior binders.
        for row in &rows {
            if row.label == Label::Noise {
                assert!(log
                    .iter()
                    .any(|d| d.vhh_sequence == row.vhh_sequence
                        && d.outcome == NoiseOutcome::ToNoise));
            }
        }
    }

    #[test]
    fn lowering_target_p_never_flips_keep_to_demote() {
        // Monotonicity: with fixed p_NC, a more significant target p can
        // only move a decision toward keeping the binder.
        let nc_p = -3.0;
        let mut prev_kept = false;
        for target_p in [-1.5, -2.0, -4.0, -5.5, -7.0, -20.0, -200.0] {
            let (_, log) = run(
                vec![binder("V", target_p)],
                &[("V", nc(Label::NonSignificant, nc_p))],
            );
            let kept = log[0].outcome == NoiseOutcome::KeepBinder;
            assert!(!prev_kept || kept, "keep flipped back at p = {target_p}");
            prev_kept = kept;
        }
    }
}
