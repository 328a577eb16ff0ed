//! Sequence ingestion: FASTA parsing, ORF translation, and deduplicated
//! read-count tables.

mod count;
mod fasta;
mod translate;

pub use count::{read_count_tsv, write_count_tsv, CountTable, Stage, NC_TARGET_ID};
pub use fasta::{parse_fasta, write_fasta, SequenceRecord};
pub use translate::{translate_codon, translate_orf};
