//! Statistical labeling of (VHH, target) pairs.
//!
//! Each sublibrary is tested against its own mother library with the
//! two-proportion z-test; replicate tests for the same (VHH, target) are
//! aggregated by minimum p-value, and the winning test decides the
//! provisional label: binder, non-binder, or non-significant.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::seqio::{CountTable, Stage};
use crate::stats::{two_proportion_z, Direction, ProportionTest};

/// Labeling outcome for one (VHH, target) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Label {
    Binder,
    NonBinder,
    NonSignificant,
    Noise,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Binder => "binder",
            Label::NonBinder => "non_binder",
            Label::NonSignificant => "non_significant",
            Label::Noise => "noise",
        }
    }

    pub fn parse(s: &str) -> Result<Label> {
        match s {
            "binder" | "1" => Ok(Label::Binder),
            "non_binder" | "non-binder" | "0" => Ok(Label::NonBinder),
            "non_significant" | "non-significant" => Ok(Label::NonSignificant),
            "noise" => Ok(Label::Noise),
            other => Err(Error::Parse {
                line: 0,
                msg: format!("unknown label '{other}'"),
            }),
        }
    }
}

/// Thresholds for labeling and noise reduction.
#[derive(Debug, Clone)]
pub struct LabelingConfig {
    /// Significance level on the two-sided p-value.
    pub alpha: f64,
    /// Noise-filter ratio threshold, in log10 (the ratio is compared to
    /// 10^threshold).
    pub log10_ratio_threshold: f64,
    /// Reject libraries with fewer total reads than this.
    pub min_library_size: u64,
}

impl Default for LabelingConfig {
    fn default() -> Self {
        LabelingConfig {
            alpha: 0.05,
            log10_ratio_threshold: 2.5,
            min_library_size: 0,
        }
    }
}

impl LabelingConfig {
    pub fn validate(&self) -> Result<()> {
        let alpha_ok = self.alpha.is_finite() && self.alpha > 0.0 && self.alpha < 1.0;
        if !alpha_ok {
            return Err(Error::Config(format!(
                "alpha must be in (0, 1), got {}",
                self.alpha
            )));
        }
        let threshold_ok =
            self.log10_ratio_threshold.is_finite() && self.log10_ratio_threshold > 0.0;
        if !threshold_ok {
            return Err(Error::Config(format!(
                "log10 ratio threshold must be positive and finite, got {}",
                self.log10_ratio_threshold
            )));
        }
        Ok(())
    }
}

/// One labeled dataset row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPair {
    pub vhh_sequence: String,
    pub target_id: String,
    /// Amino-acid sequence of the antigen; empty for the negative control.
    pub antigen_sequence: String,
    pub label: Label,
    /// log10 p-value of the winning (minimum-p) replicate test.
    pub best_log10_p: f64,
    pub best_direction: Direction,
    /// Sublibrary id of the winning test.
    pub source_library_id: String,
}

/// Provisional label from the winning test.
pub fn label_one(test: &ProportionTest, cfg: &LabelingConfig) -> Label {
    let log10_alpha = cfg.alpha.log10();
    if test.log10_p <= log10_alpha {
        match test.direction {
            Direction::Increased => Label::Binder,
            Direction::Decreased => Label::NonBinder,
            Direction::Unchanged => Label::NonSignificant,
        }
    } else {
        Label::NonSignificant
    }
}

/// Run every (VHH, target) test and aggregate replicates by minimum p.
///
/// Each sublibrary is paired with its mother via `mother_of`
/// (sublibrary id -> mother id). A VHH absent from one side of a pairing
/// counts as x = 0 against that library's full total; VHHs absent from
/// both sides of a pairing contribute no test there, and VHHs never
/// observed for a target produce no row at all.
///
/// Ties on log10 p are broken toward direction `increased`, then by the
/// lexicographically smallest sublibrary id, so output is deterministic.
///
/// `antigens` supplies the antigen sequence column (targets without an
/// entry, such as the negative control, get an empty sequence). Rows are
/// ordered by (target, VHH).
pub fn aggregate_and_label(
    mothers: &[CountTable],
    subs: &[CountTable],
    mother_of: &BTreeMap<String, String>,
    antigens: &BTreeMap<String, String>,
    cfg: &LabelingConfig,
) -> Result<Vec<LabeledPair>> {
    cfg.validate()?;
    let mut mother_index: HashMap<&str, &CountTable> = HashMap::new();
    for m in mothers {
        if m.stage != Stage::Mother {
            return Err(Error::Config(format!(
                "library '{}' passed as a mother but has stage {}",
                m.library_id,
                m.stage.as_str()
            )));
        }
        if mother_index.insert(m.library_id.as_str(), m).is_some() {
            return Err(Error::Config(format!(
                "duplicate mother library id '{}'",
                m.library_id
            )));
        }
    }
    for t in mothers.iter().chain(subs.iter()) {
        if t.total_reads() < cfg.min_library_size {
            return Err(Error::InvalidLibrary(format!(
                "library '{}' has {} reads, below the configured minimum {}",
                t.library_id,
                t.total_reads(),
                cfg.min_library_size
            )));
        }
    }

    // Group sublibraries by target, each with its mother.
    let mut by_target: BTreeMap<&str, Vec<(&CountTable, &CountTable)>> = BTreeMap::new();
    for sub in subs {
        if sub.stage == Stage::Mother {
            return Err(Error::Config(format!(
                "library '{}' passed as a sublibrary but has stage mother",
                sub.library_id
            )));
        }
        let mother_id = mother_of.get(&sub.library_id).ok_or_else(|| {
            Error::Config(format!(
                "sublibrary '{}' has no mother mapping",
                sub.library_id
            ))
        })?;
        let mother = mother_index.get(mother_id.as_str()).ok_or_else(|| {
            Error::Config(format!(
                "sublibrary '{}' references unknown mother '{}'",
                sub.library_id, mother_id
            ))
        })?;
        let target = sub
            .target_id
            .as_deref()
            .expect("sublibrary stages always carry a target");
        by_target.entry(target).or_default().push((mother, sub));
    }

    let mut rows = Vec::new();
    for (target, pairings) in &by_target {
        // Universe of VHHs observed for this target: any sequence present
        // in a sublibrary or in a mother that was panned against it.
        let mut universe: BTreeSet<&str> = BTreeSet::new();
        for (mother, sub) in pairings {
            universe.extend(mother.entries().map(|(s, _)| s));
            universe.extend(sub.entries().map(|(s, _)| s));
        }
        let antigen_sequence = antigens.get(*target).cloned().unwrap_or_default();
        for vhh in universe {
            let mut best: Option<(ProportionTest, &str)> = None;
            for (mother, sub) in pairings {
                let x1 = mother.get(vhh);
                let x2 = sub.get(vhh);
                if x1 == 0 && x2 == 0 {
                    continue;
                }
                // A library emptied by singleton removal offers no test.
                if mother.total_reads() == 0 || sub.total_reads() == 0 {
                    continue;
                }
                let test = two_proportion_z(x1, mother.total_reads(), x2, sub.total_reads())?;
                let replace = match &best {
                    None => true,
                    Some((cur, cur_id)) => {
                        better_test(&test, sub.library_id.as_str(), cur, cur_id)
                    }
                };
                if replace {
                    best = Some((test, sub.library_id.as_str()));
                }
            }
            if let Some((test, source)) = best {
                let label = label_one(&test, cfg);
                rows.push(LabeledPair {
                    vhh_sequence: vhh.to_string(),
                    target_id: target.to_string(),
                    antigen_sequence: antigen_sequence.clone(),
                    label,
                    best_log10_p: test.log10_p,
                    best_direction: test.direction,
                    source_library_id: source.to_string(),
                });
            }
        }
    }
    Ok(rows)
}

/// Minimum log10 p wins; ties prefer `increased`, then the smaller
/// sublibrary id.
fn better_test(
    candidate: &ProportionTest,
    candidate_id: &str,
    current: &ProportionTest,
    current_id: &str,
) -> bool {
    if candidate.log10_p != current.log10_p {
        return candidate.log10_p < current.log10_p;
    }
    let rank = |d: Direction| match d {
        Direction::Increased => 0u8,
        Direction::Decreased => 1,
        Direction::Unchanged => 2,
    };
    if rank(candidate.direction) != rank(current.direction) {
        return rank(candidate.direction) < rank(current.direction);
    }
    candidate_id < current_id
}
