//! Fixed-length sequence encodings for the baseline models.
//!
//! Two encodings are supported:
//!
//! * one-hot pair: 400 positions x 20 channels = 8000 entries. The VHH
//!   occupies positions 0-151 and the antigen positions 152-369, each
//!   zero-padded to its maximum length; positions 370-399 stay zero.
//! * CKSAAP: counts of ordered residue pairs (s[i], s[i+k+1]) for gaps
//!   k = 0..3 over a fixed 400-slot pair index per gap, 1600 entries per
//!   sequence. Pair inputs concatenate the two CKSAAP vectors.
//!
//! 'X' (unknown residue from an N-containing codon) contributes nothing
//! to either encoding; any other letter outside the 20-residue alphabet
//! is an error.

use crate::error::{Error, Result};

pub const AMINO_ACIDS: [u8; 20] = *b"ACDEFGHIKLMNPQRSTVWY";
pub const VHH_MAX_LEN: usize = 152;
pub const ANTIGEN_MAX_LEN: usize = 218;
const ONEHOT_POSITIONS: usize = 400;
pub const ONEHOT_DIM: usize = ONEHOT_POSITIONS * 20;
pub const CKSAAP_MAX_GAP: usize = 3;
pub const CKSAAP_DIM: usize = 20 * 20 * (CKSAAP_MAX_GAP + 1);

/// Which encoder produced a vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    /// 8000-dimensional one-hot of a (VHH, antigen) pair.
    OnehotPair,
    /// 1600-dimensional CKSAAP of a single sequence.
    Cksaap,
}

/// A dense feature vector tagged with its encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub encoding: Encoding,
}

/// Sparse row: sorted (index, value) pairs. The baselines train on these;
/// scattering into a dense vector reproduces the dense encoders exactly.
pub type SparseRow = Vec<(u32, f64)>;

/// Residue channel, or None for 'X'.
fn residue_index(b: u8, what: &str) -> Result<Option<usize>> {
    match b {
        b'A' => Ok(Some(0)),
        b'C' => Ok(Some(1)),
        b'D' => Ok(Some(2)),
        b'E' => Ok(Some(3)),
        b'F' => Ok(Some(4)),
        b'G' => Ok(Some(5)),
        b'H' => Ok(Some(6)),
        b'I' => Ok(Some(7)),
        b'K' => Ok(Some(8)),
        b'L' => Ok(Some(9)),
        b'M' => Ok(Some(10)),
        b'N' => Ok(Some(11)),
        b'P' => Ok(Some(12)),
        b'Q' => Ok(Some(13)),
        b'R' => Ok(Some(14)),
        b'S' => Ok(Some(15)),
        b'T' => Ok(Some(16)),
        b'V' => Ok(Some(17)),
        b'W' => Ok(Some(18)),
        b'Y' => Ok(Some(19)),
        b'X' => Ok(None),
        other => Err(Error::Encoding(format!(
            "unknown residue '{}' in {what}",
            other as char
        ))),
    }
}

fn check_pair_lengths(vhh: &str, antigen: &str) -> Result<()> {
    if vhh.is_empty() || antigen.is_empty() {
        return Err(Error::Encoding("empty sequence".to_string()));
    }
    if vhh.len() > VHH_MAX_LEN {
        return Err(Error::Encoding(format!(
            "VHH length {} exceeds {VHH_MAX_LEN}",
            vhh.len()
        )));
    }
    if antigen.len() > ANTIGEN_MAX_LEN {
        return Err(Error::Encoding(format!(
            "antigen length {} exceeds {ANTIGEN_MAX_LEN}",
            antigen.len()
        )));
    }
    Ok(())
}

/// One-hot encode a (VHH, antigen) pair into 8000 entries.
pub fn encode_onehot_pair(vhh: &str, antigen: &str) -> Result<FeatureVector> {
    let sparse = encode_onehot_pair_sparse(vhh, antigen)?;
    let mut values = vec![0.0; ONEHOT_DIM];
    for &(idx, v) in &sparse {
        values[idx as usize] = v;
    }
    Ok(FeatureVector {
        values,
        encoding: Encoding::OnehotPair,
    })
}

/// Sparse indices of the one-hot pair encoding (one 1.0 per non-X
/// residue).
pub fn encode_onehot_pair_sparse(vhh: &str, antigen: &str) -> Result<SparseRow> {
    check_pair_lengths(vhh, antigen)?;
    let mut row = SparseRow::with_capacity(vhh.len() + antigen.len());
    for (pos, &b) in vhh.as_bytes().iter().enumerate() {
        if let Some(ch) = residue_index(b, "VHH")? {
            row.push(((pos * 20 + ch) as u32, 1.0));
        }
    }
    for (pos, &b) in antigen.as_bytes().iter().enumerate() {
        if let Some(ch) = residue_index(b, "antigen")? {
            row.push((((VHH_MAX_LEN + pos) * 20 + ch) as u32, 1.0));
        }
    }
    Ok(row)
}

/// CKSAAP encode one sequence: for each gap k = 0..3, counts of ordered
/// pairs (s[i], s[i+k+1]) in a 400-slot block; blocks are concatenated.
pub fn encode_cksaap(seq: &str) -> Result<FeatureVector> {
    if seq.is_empty() {
        return Err(Error::Encoding("empty sequence".to_string()));
    }
    let bytes = seq.as_bytes();
    let mut values = vec![0.0; CKSAAP_DIM];
    for k in 0..=CKSAAP_MAX_GAP {
        let block = k * 400;
        if bytes.len() < k + 2 {
            continue;
        }
        for i in 0..bytes.len() - k - 1 {
            let a = residue_index(bytes[i], "sequence")?;
            let b = residue_index(bytes[i + k + 1], "sequence")?;
            if let (Some(a), Some(b)) = (a, b) {
                values[block + a * 20 + b] += 1.0;
            }
        }
    }
    Ok(FeatureVector {
        values,
        encoding: Encoding::Cksaap,
    })
}

/// Sparse concatenation of the two CKSAAP vectors of a pair
/// (VHH block first), 3200 columns total.
pub fn encode_cksaap_pair_sparse(vhh: &str, antigen: &str) -> Result<SparseRow> {
    let v = encode_cksaap(vhh)?;
    let a = encode_cksaap(antigen)?;
    let mut row = SparseRow::new();
    for (i, &x) in v.values.iter().enumerate() {
        if x != 0.0 {
            row.push((i as u32, x));
        }
    }
    for (i, &x) in a.values.iter().enumerate() {
        if x != 0.0 {
            row.push(((CKSAAP_DIM + i) as u32, x));
        }
    }
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dimensions_are_fixed() {
        assert_eq!(ONEHOT_DIM, 8000);
        assert_eq!(CKSAAP_DIM, 1600);
        let v = encode_onehot_pair("M", "M").unwrap();
        assert_eq!(v.values.len(), 8000);
        let c = encode_cksaap("ACA").unwrap();
        assert_eq!(c.values.len(), 1600);
    }

    #[test]
    fn minimal_pair_sets_two_ones() {
        let v = encode_onehot_pair("M", "M").unwrap();
        let ones: Vec<usize> = v
            .values
            .iter()
            .enumerate()
            .filter(|(_, &x)| x == 1.0)
            .map(|(i, _)| i)
            .collect();
        // M channel (index 10) at position 0 and at position 152.
        assert_eq!(ones, vec![10, 152 * 20 + 10]);
    }

    #[test]
    fn ones_count_is_sum_of_lengths() {
        let vhh = "QVQLQESGGGLVQPG";
        let antigen = "MNSFSTSAFGPVAFSLGLLL";
        let v = encode_onehot_pair(vhh, antigen).unwrap();
        let ones = v.values.iter().filter(|&&x| x == 1.0).count();
        assert_eq!(ones, vhh.len() + antigen.len());
    }

    #[test]
    fn maximum_length_pair_fills_370_positions() {
        // A full-length antigen (218) with a full-length VHH (152) sets
        // exactly 370 ones; the last 30 positions stay zero.
        let vhh: String = "KLV".chars().cycle().take(152).collect();
        let antigen: String = "MNSFST".chars().cycle().take(218).collect();
        let v = encode_onehot_pair(&vhh, &antigen).unwrap();
        let ones = v.values.iter().filter(|&&x| x == 1.0).count();
        assert_eq!(ones, 152 + 218);
        assert!(v.values[370 * 20..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn x_residue_gives_zero_column() {
        let v = encode_onehot_pair("MXM", "M").unwrap();
        let ones = v.values.iter().filter(|&&x| x == 1.0).count();
        assert_eq!(ones, 3);
        // Position 1 (the X) has no channel set.
        assert!(v.values[20..40].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn onehot_errors() {
        assert!(encode_onehot_pair("", "M").is_err());
        assert!(encode_onehot_pair("M", &"M".repeat(219)).is_err());
        assert!(encode_onehot_pair(&"M".repeat(153), "M").is_err());
        assert!(encode_onehot_pair("MBZ", "M").is_err());
        assert!(encode_onehot_pair("M*", "M").is_err());
    }

    #[test]
    fn cksaap_hand_worked_example() {
        // "ACA": k=0 pairs AC, CA; k=1 pair AA; k in {2,3} empty.
        let v = encode_cksaap("ACA").unwrap().values;
        let idx = |k: usize, a: usize, b: usize| k * 400 + a * 20 + b;
        assert_eq!(v[idx(0, 0, 1)], 1.0); // AC
        assert_eq!(v[idx(0, 1, 0)], 1.0); // CA
        assert_eq!(v[idx(1, 0, 0)], 1.0); // A_A
        assert_eq!(v.iter().sum::<f64>(), 3.0);
        assert!(v[800..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn cksaap_two_residues() {
        let v = encode_cksaap("AA").unwrap().values;
        assert_eq!(v[0], 1.0); // AA at k=0
        assert_eq!(v.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn cksaap_rejects_unknown_residues() {
        assert!(encode_cksaap("AB").is_err());
        assert!(encode_cksaap("").is_err());
    }

    #[test]
    fn sparse_and_dense_encoders_agree() {
        let vhh = "MKVLQESGG";
        let antigen = "MNSFSTS";
        let dense = encode_onehot_pair(vhh, antigen).unwrap().values;
        let mut scattered = vec![0.0; ONEHOT_DIM];
        for (i, v) in encode_onehot_pair_sparse(vhh, antigen).unwrap() {
            scattered[i as usize] = v;
        }
        assert_eq!(dense, scattered);

        let pair = encode_cksaap_pair_sparse(vhh, antigen).unwrap();
        let dense_v = encode_cksaap(vhh).unwrap().values;
        let dense_a = encode_cksaap(antigen).unwrap().values;
        let mut scattered = vec![0.0; 2 * CKSAAP_DIM];
        for (i, v) in pair {
            scattered[i as usize] = v;
        }
        assert_eq!(&scattered[..CKSAAP_DIM], dense_v.as_slice());
        assert_eq!(&scattered[CKSAAP_DIM..], dense_a.as_slice());
    }

    proptest! {
        // Block-sum identity: block k sums to max(0, L - k - 1).
        #[test]
        fn cksaap_block_sums(seq in "[ACDEFGHIKLMNPQRSTVWY]{1,60}") {
            let v = encode_cksaap(&seq).unwrap().values;
            for k in 0..=CKSAAP_MAX_GAP {
                let want = seq.len().saturating_sub(k + 1) as f64;
                let got: f64 = v[k * 400..(k + 1) * 400].iter().sum();
                prop_assert_eq!(got, want);
            }
        }

        // Injectivity at fixed lengths: distinct pairs give distinct
        // one-hot vectors.
        #[test]
        fn onehot_injective(a in "[ACDEFGHIKLMNPQRSTVWY]{5}",
                            b in "[ACDEFGHIKLMNPQRSTVWY]{5}",
                            ag in "[ACDEFGHIKLMNPQRSTVWY]{7}") {
            let va = encode_onehot_pair(&a, &ag).unwrap();
            let vb = encode_onehot_pair(&b, &ag).unwrap();
            if a != b {
                prop_assert_ne!(va.values, vb.values);
            } else {
                prop_assert_eq!(va.values, vb.values);
            }
        }
    }
}
