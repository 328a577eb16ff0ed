//! Deduplicated read-count tables for sequencing libraries.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Reserved target id for negative-control panning runs.
pub const NC_TARGET_ID: &str = "NC";

/// Library stage within a panning experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Pre-panning phage library.
    Mother,
    /// Post-panning library enriched against one target.
    Sublibrary,
    /// Post-panning library with no target protein.
    NegativeControl,
}

impl Stage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Mother => "mother",
            Stage::Sublibrary => "sublibrary",
            Stage::NegativeControl => "negative_control",
        }
    }

    pub fn parse(s: &str) -> Result<Stage> {
        match s {
            "mother" => Ok(Stage::Mother),
            "sublibrary" => Ok(Stage::Sublibrary),
            "negative_control" => Ok(Stage::NegativeControl),
            other => Err(Error::Config(format!("unknown stage '{other}'"))),
        }
    }
}

/// A library snapshot: unique amino-acid sequences with read counts.
///
/// Mother libraries carry no target; sublibraries and negative controls
/// must name one (negative controls use the reserved id `NC`). All counts
/// are >= 1 and `total_reads` always equals their sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub library_id: String,
    pub stage: Stage,
    pub target_id: Option<String>,
    entries: BTreeMap<String, u64>,
    total_reads: u64,
}

impl CountTable {
    /// Build a table from raw (already translated) sequences by exact
    /// string deduplication. `total_reads` equals the input length.
    pub fn from_sequences<I, S>(
        library_id: impl Into<String>,
        stage: Stage,
        target_id: Option<String>,
        seqs: I,
    ) -> Result<CountTable>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut entries: BTreeMap<String, u64> = BTreeMap::new();
        let mut total = 0u64;
        for seq in seqs {
            let seq = seq.as_ref();
            if seq.is_empty() {
                return Err(Error::InvalidLibrary(
                    "empty sequence in count-table input".to_string(),
                ));
            }
            *entries.entry(seq.to_string()).or_insert(0) += 1;
            total += 1;
        }
        Self::from_entries(library_id, stage, target_id, entries)
            .inspect(|t| debug_assert_eq!(t.total_reads, total))
    }

    /// Assemble a table from pre-counted entries, validating invariants.
    pub fn from_entries(
        library_id: impl Into<String>,
        stage: Stage,
        target_id: Option<String>,
        entries: BTreeMap<String, u64>,
    ) -> Result<CountTable> {
        let library_id = library_id.into();
        match (stage, &target_id) {
            (Stage::Mother, Some(t)) => {
                return Err(Error::InvalidLibrary(format!(
                    "mother library '{library_id}' must not have a target (got '{t}')"
                )))
            }
            (Stage::Sublibrary, None) | (Stage::NegativeControl, None) => {
                return Err(Error::InvalidLibrary(format!(
                    "library '{library_id}' requires a target id"
                )))
            }
            (Stage::NegativeControl, Some(t)) if t != NC_TARGET_ID => {
                return Err(Error::InvalidLibrary(format!(
                    "negative-control library '{library_id}' must use target '{NC_TARGET_ID}'"
                )))
            }
            (Stage::Sublibrary, Some(t)) if t == NC_TARGET_ID => {
                return Err(Error::InvalidLibrary(format!(
                    "sublibrary '{library_id}' may not use the reserved target '{NC_TARGET_ID}'"
                )))
            }
            _ => {}
        }
        if let Some((seq, _)) = entries.iter().find(|(_, &c)| c == 0) {
            return Err(Error::InconsistentCounts(format!(
                "zero count for sequence '{seq}' in '{library_id}'"
            )));
        }
        let total_reads = entries.values().sum();
        Ok(CountTable {
            library_id,
            stage,
            target_id,
            entries,
            total_reads,
        })
    }

    /// Count for one sequence (0 when absent).
    pub fn get(&self, seq: &str) -> u64 {
        self.entries.get(seq).copied().unwrap_or(0)
    }

    pub fn total_reads(&self) -> u64 {
        self.total_reads
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in lexicographic sequence order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().map(|(s, &c)| (s.as_str(), c))
    }

    /// Drop every sequence observed exactly once; `total_reads` is
    /// recomputed from the survivors.
    pub fn remove_singletons(&self) -> CountTable {
        let entries: BTreeMap<String, u64> = self
            .entries
            .iter()
            .filter(|(_, &c)| c > 1)
            .map(|(s, &c)| (s.clone(), c))
            .collect();
        let total_reads = entries.values().sum();
        CountTable {
            library_id: self.library_id.clone(),
            stage: self.stage,
            target_id: self.target_id.clone(),
            entries,
            total_reads,
        }
    }
}

/// Write a count table as TSV: header `sequence\tcount`, rows ordered by
/// descending count then lexicographic sequence, counts base 10.
pub fn write_count_tsv<W: Write>(table: &CountTable, mut writer: W) -> Result<()> {
    let mut rows: Vec<(&str, u64)> = table.entries().collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    writeln!(writer, "sequence\tcount")?;
    for (seq, count) in rows {
        writeln!(writer, "{seq}\t{count}")?;
    }
    Ok(())
}

/// Read count-table entries from TSV (metadata comes from the manifest).
pub fn read_count_tsv<R: BufRead>(reader: R) -> Result<BTreeMap<String, u64>> {
    let mut entries = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line_no == 1 {
            if line.trim() != "sequence\tcount" {
                return Err(Error::Parse {
                    line: 1,
                    msg: "expected header 'sequence\\tcount'".to_string(),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.splitn(2, '\t');
        let seq = parts.next().unwrap_or("");
        let count = parts.next().ok_or_else(|| Error::Parse {
            line: line_no,
            msg: "missing count column".to_string(),
        })?;
        let count: u64 = count.trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("bad count '{count}'"),
        })?;
        if seq.is_empty() || count == 0 {
            return Err(Error::Parse {
                line: line_no,
                msg: "empty sequence or zero count".to_string(),
            });
        }
        if entries.insert(seq.to_string(), count).is_some() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("duplicate sequence '{seq}'"),
            });
        }
    }
    Ok(entries)
}
