//! Minimal FASTA reader/writer.
//!
//! Headers start with '>'; sequence lines may wrap and are concatenated.
//! Sequences are uppercase-normalized on input. Record order is preserved.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// One FASTA record. `id` is the header text up to the first whitespace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceRecord {
    pub id: String,
    pub sequence: String,
}

impl SequenceRecord {
    pub fn new(id: impl Into<String>, sequence: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            sequence: sequence.into(),
        }
    }
}

/// Parse FASTA text into records.
///
/// Errors on sequence data before the first header, on empty record
/// bodies, and on duplicate ids, each with the offending line number.
pub fn parse_fasta<R: BufRead>(reader: R) -> Result<Vec<SequenceRecord>> {
    let mut records: Vec<SequenceRecord> = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    let mut current: Option<(String, String, usize)> = None; // id, seq, header line

    let finish = |cur: Option<(String, String, usize)>,
                  records: &mut Vec<SequenceRecord>|
     -> Result<()> {
        if let Some((id, seq, header_line)) = cur {
            if seq.is_empty() {
                return Err(Error::Parse {
                    line: header_line,
                    msg: format!("record '{id}' has an empty sequence body"),
                });
            }
            records.push(SequenceRecord { id, sequence: seq });
        }
        Ok(())
    };

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(header) = trimmed.strip_prefix('>') {
            let id = header.split_whitespace().next().unwrap_or("").to_string();
            if id.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "empty FASTA header".to_string(),
                });
            }
            if !seen_ids.insert(id.clone()) {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("duplicate record id '{id}'"),
                });
            }
            finish(current.take(), &mut records)?;
            current = Some((id, String::new(), line_no));
        } else {
            match current.as_mut() {
                Some((_, seq, _)) => seq.push_str(&trimmed.to_ascii_uppercase()),
                None => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "sequence data before the first '>' header".to_string(),
                    })
                }
            }
        }
    }
    finish(current, &mut records)?;
    Ok(records)
}

/// Write records as FASTA, one sequence line per record.
pub fn write_fasta<W: Write>(records: &[SequenceRecord], mut writer: W) -> Result<()> {
    for rec in records {
        writeln!(writer, ">{}", rec.id)?;
        writeln!(writer, "{}", rec.sequence)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_record() {
        let recs = parse_fasta(">r1\nATGAAA\n".as_bytes()).unwrap();
        assert_eq!(recs, vec![SequenceRecord::new("r1", "ATGAAA")]);
    }

    #[test]
    fn wrapped_lines_concatenate() {
        let recs = parse_fasta(">r1\nATG\nAAA\n>r2\nTTT\n".as_bytes()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].sequence, "ATGAAA");
        assert_eq!(recs[1].sequence, "TTT");
    }

    #[test]
    fn lowercase_is_normalized() {
        let recs = parse_fasta(">r1\natgaaa\n".as_bytes()).unwrap();
        assert_eq!(recs[0].sequence, "ATGAAA");
    }

    #[test]
    fn missing_header_is_an_error() {
        let err = parse_fasta("ATG\n".as_bytes()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn empty_body_is_an_error() {
        assert!(parse_fasta(">r1\n>r2\nAAA\n".as_bytes()).is_err());
        assert!(parse_fasta(">r1\n".as_bytes()).is_err());
    }

    #[test]
    fn duplicate_id_is_an_error() {
        assert!(parse_fasta(">r1\nAAA\n>r1\nTTT\n".as_bytes()).is_err());
    }

    proptest! {
        // write_fasta then parse_fasta is the identity on record lists.
        #[test]
        fn roundtrip(ids in proptest::collection::hash_set("[a-zA-Z0-9_.-]{1,12}", 0..8),
                     seqs in proptest::collection::vec("[ACGTN]{1,60}", 8)) {
            let records: Vec<SequenceRecord> = ids
                .into_iter()
                .zip(seqs)
                .map(|(id, seq)| SequenceRecord::new(id, seq))
                .collect();
            let mut buf = Vec::new();
            write_fasta(&records, &mut buf).unwrap();
            let back = parse_fasta(buf.as_slice()).unwrap();
            prop_assert_eq!(back, records);
        }
    }
}
