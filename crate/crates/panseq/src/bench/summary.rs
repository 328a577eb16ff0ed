//! Dataset statistics over labeled rows: totals per label, per-antigen
//! sample counts, unique-VHH tallies, and differential binders (VHHs
//! that bind some antigens but not others).

use std::collections::{BTreeMap, HashMap};

use crate::labeler::{Label, LabeledPair};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PerAntigenCounts {
    pub rows: u64,
    pub binders: u64,
    pub non_binders: u64,
    pub non_significant: u64,
    pub noise: u64,
}

#[derive(Debug, Clone, Default)]
pub struct DatasetSummary {
    pub total_rows: u64,
    pub binders: u64,
    pub non_binders: u64,
    pub non_significant: u64,
    pub noise: u64,
    pub unique_vhhs: u64,
    /// VHHs with at least one binder row.
    pub binder_vhhs: u64,
    /// VHHs with at least one binder row and at least one non-binder row.
    pub differential_vhhs: u64,
    pub per_antigen: BTreeMap<String, PerAntigenCounts>,
}

pub fn dataset_stats<'a, I>(rows: I) -> DatasetSummary
where
    I: IntoIterator<Item = &'a LabeledPair>,
{
    let mut summary = DatasetSummary::default();
    // Per VHH: (has binder row, has non-binder row).
    let mut vhh_flags: HashMap<&str, (bool, bool)> = HashMap::new();
    for row in rows {
        summary.total_rows += 1;
        let per = summary.per_antigen.entry(row.target_id.clone()).or_default();
        per.rows += 1;
        let flags = vhh_flags.entry(row.vhh_sequence.as_str()).or_default();
        match row.label {
            Label::Binder => {
                summary.binders += 1;
                per.binders += 1;
                flags.0 = true;
            }
            Label::NonBinder => {
                summary.non_binders += 1;
                per.non_binders += 1;
                flags.1 = true;
            }
            Label::NonSignificant => {
                summary.non_significant += 1;
                per.non_significant += 1;
            }
            Label::Noise => {
                summary.noise += 1;
                per.noise += 1;
            }
        }
    }
    summary.unique_vhhs = vhh_flags.len() as u64;
    summary.binder_vhhs = vhh_flags.values().filter(|f| f.0).count() as u64;
    summary.differential_vhhs = vhh_flags.values().filter(|f| f.0 && f.1).count() as u64;
    summary
}
