//! Labeled-dataset CSV and noise-audit TSV formats.
//!
//! The labeled CSV schema is
//! `VHH_sequence,Ag_label,Ag_sequence,label,log10_p,direction,source_library`.
//! The reader is header-driven and accepts column reorderings and the
//! common external variants: `label` may be `1`/`0` for binder/non-binder
//! and hyphenated label spellings are accepted; missing optional columns
//! (everything except `VHH_sequence`, `Ag_label`, `label`) default to
//! empty/zero values, so externally produced datasets import cleanly.

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::labeler::{Label, LabeledPair};
use crate::noise::NoiseDecision;
use crate::stats::Direction;

pub const LABELED_HEADER: [&str; 7] = [
    "VHH_sequence",
    "Ag_label",
    "Ag_sequence",
    "label",
    "log10_p",
    "direction",
    "source_library",
];

/// Write labeled rows in the canonical column order.
pub fn write_labeled_csv<W: Write>(rows: &[LabeledPair], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(LABELED_HEADER)?;
    for row in rows {
        w.write_record([
            row.vhh_sequence.as_str(),
            row.target_id.as_str(),
            row.antigen_sequence.as_str(),
            row.label.as_str(),
            &format_log10_p(row.best_log10_p),
            row.best_direction.as_str(),
            row.source_library_id.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn format_log10_p(v: f64) -> String {
    // `{}` on f64 is the shortest representation that round-trips.
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

/// Read a labeled CSV (canonical or imported external schema).
pub fn read_labeled_csv<R: Read>(reader: R) -> Result<Vec<LabeledPair>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    let index: HashMap<&str, usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| (h.trim(), i))
        .collect();
    let required = |name: &str| -> Result<usize> {
        index.get(name).copied().ok_or_else(|| Error::Parse {
            line: 1,
            msg: format!("labeled CSV is missing the '{name}' column"),
        })
    };
    let vhh_col = required("VHH_sequence")?;
    let ag_col = required("Ag_label")?;
    let label_col = required("label")?;
    let seq_col = index.get("Ag_sequence").copied();
    let p_col = index.get("log10_p").copied();
    let dir_col = index.get("direction").copied();
    let src_col = index.get("source_library").copied();

    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let get = |col: usize| -> Result<&str> {
            record.get(col).ok_or(Error::Parse {
                line,
                msg: "short record".to_string(),
            })
        };
        let label = Label::parse(get(label_col)?).map_err(|_| Error::Parse {
            line,
            msg: format!("bad label '{}'", get(label_col).unwrap_or("")),
        })?;
        let log10_p = match p_col {
            Some(c) => {
                let raw = get(c)?;
                if raw.is_empty() {
                    0.0
                } else {
                    raw.parse().map_err(|_| Error::Parse {
                        line,
                        msg: format!("bad log10_p '{raw}'"),
                    })?
                }
            }
            None => 0.0,
        };
        let direction = match dir_col {
            Some(c) => {
                let raw = get(c)?;
                if raw.is_empty() {
                    Direction::Unchanged
                } else {
                    Direction::parse(raw).map_err(|_| Error::Parse {
                        line,
                        msg: format!("bad direction '{raw}'"),
                    })?
                }
            }
            None => Direction::Unchanged,
        };
        rows.push(LabeledPair {
            vhh_sequence: get(vhh_col)?.to_string(),
            target_id: get(ag_col)?.to_string(),
            antigen_sequence: seq_col.map(|c| get(c).map(str::to_string)).transpose()?.unwrap_or_default(),
            label,
            best_log10_p: log10_p,
            best_direction: direction,
            source_library_id: src_col
                .map(|c| get(c).map(str::to_string))
                .transpose()?
                .unwrap_or_default(),
        });
    }
    Ok(rows)
}

/// Write the noise-decision audit log as TSV.
pub fn write_audit_tsv<W: Write>(decisions: &[NoiseDecision], mut writer: W) -> Result<()> {
    writeln!(
        writer,
        "vhh_sequence\ttarget_id\ttarget_log10_p\tnc_status\tnc_log10_p\tbranch\toutcome"
    )?;
    for d in decisions {
        writeln!(
            writer,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            d.vhh_sequence,
            d.target_id,
            format_log10_p(d.target_log10_p),
            d.nc_status.as_str(),
            d.nc_log10_p
                .map(format_log10_p)
                .unwrap_or_else(|| "-".to_string()),
            d.branch.as_str(),
            match d.outcome {
                crate::noise::NoiseOutcome::KeepBinder => "keep_binder",
                crate::noise::NoiseOutcome::ToNoise => "to_noise",
                crate::noise::NoiseOutcome::ToNonSignificant => "to_non_significant",
            },
        )?;
    }
    Ok(())
}
