//! DNA-to-protein translation with first-ORF cropping.

use crate::error::{Error, Result};

/// Translate one codon with the standard genetic code. Codons containing
/// N translate to 'X'; stop codons return '*'.
pub fn translate_codon(codon: &[u8]) -> Result<u8> {
    debug_assert_eq!(codon.len(), 3);
    for &b in codon {
        match b {
            b'A' | b'C' | b'G' | b'T' => {}
            b'N' => return Ok(b'X'),
            other => return Err(Error::InvalidBase(other as char)),
        }
    }
    let aa = match codon {
        b"TTT" | b"TTC" => b'F',
        b"TTA" | b"TTG" | b"CTT" | b"CTC" | b"CTA" | b"CTG" => b'L',
        b"ATT" | b"ATC" | b"ATA" => b'I',
        b"ATG" => b'M',
        b"GTT" | b"GTC" | b"GTA" | b"GTG" => b'V',
        b"TCT" | b"TCC" | b"TCA" | b"TCG" | b"AGT" | b"AGC" => b'S',
        b"CCT" | b"CCC" | b"CCA" | b"CCG" => b'P',
        b"ACT" | b"ACC" | b"ACA" | b"ACG" => b'T',
        b"GCT" | b"GCC" | b"GCA" | b"GCG" => b'A',
        b"TAT" | b"TAC" => b'Y',
        b"TAA" | b"TAG" | b"TGA" => b'*',
        b"CAT" | b"CAC" => b'H',
        b"CAA" | b"CAG" => b'Q',
        b"AAT" | b"AAC" => b'N',
        b"AAA" | b"AAG" => b'K',
        b"GAT" | b"GAC" => b'D',
        b"GAA" | b"GAG" => b'E',
        b"TGT" | b"TGC" => b'C',
        b"TGG" => b'W',
        b"CGT" | b"CGC" | b"CGA" | b"CGG" | b"AGA" | b"AGG" => b'R',
        b"GGT" | b"GGC" | b"GGA" | b"GGG" => b'G',
        _ => unreachable!("all ACGT codons covered"),
    };
    Ok(aa)
}

/// Crop and translate the first open reading frame.
///
/// Finds the first ATG, translates consecutive codons until the first
/// in-frame stop codon, and returns the residues from the start codon
/// (inclusive, as 'M') to the stop (exclusive). Reads lacking an ATG
/// yield [`Error::NoOrf`]; reads with no in-frame stop before the end
/// yield [`Error::NoStop`].
pub fn translate_orf(dna: &str) -> Result<String> {
    let bytes = dna.as_bytes();
    for &b in bytes {
        if !matches!(b, b'A' | b'C' | b'G' | b'T' | b'N') {
            return Err(Error::InvalidBase(b as char));
        }
    }
    let start = find_atg(bytes).ok_or(Error::NoOrf)?;
    let mut protein = Vec::new();
    let mut pos = start;
    while pos + 3 <= bytes.len() {
        let aa = translate_codon(&bytes[pos..pos + 3])?;
        if aa == b'*' {
            return Ok(String::from_utf8(protein).expect("ASCII residues"));
        }
        protein.push(aa);
        pos += 3;
    }
    Err(Error::NoStop)
}

fn find_atg(bytes: &[u8]) -> Option<usize> {
    bytes.windows(3).position(|w| w == b"ATG")
}
