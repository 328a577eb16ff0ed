//! In-silico panning: synthetic mother/sublibrary/negative-control count
//! tables drawn from a known ground-truth binding matrix, so labeling
//! sensitivity and specificity can be measured against the truth.
//!
//! Generation is deterministic: every library draws from its own RNG
//! stream keyed by the experiment seed and the library id, so libraries
//! can be generated in any order (or in parallel) without changing a
//! single count.

use std::collections::BTreeMap;
use std::io::Write;

use rand::distr::Uniform;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, LogNormal};

use crate::error::{Error, Result};
use crate::labeler::{Label, LabeledPair};
use crate::manifest::{LibraryEntry, Manifest};
use crate::seqio::{CountTable, Stage, NC_TARGET_ID};

const AMINO_ACIDS: &[u8; 20] = b"ACDEFGHIKLMNPQRSTVWY";

/// VHH framework segments; CDR loops between them are randomized.
const FRAMEWORK_1: &str = "QVQLQESGGGLVQPGGSLRLSCAAS";
const FRAMEWORK_2: &str = "WFRQAPGKEREFVA";
const FRAMEWORK_3: &str = "RFTISRDNAKNTVYLQMNSLKPEDTAVYYC";
const FRAMEWORK_4: &str = "WGQGTQVTVSS";

/// Length of the synthetic wild-type antigen.
const ANTIGEN_LEN: usize = 218;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub seed: u64,
    /// Unique synthetic VHHs in the repertoire.
    pub n_vhh: usize,
    /// Antigen count: one wild type plus (n_targets - 1) point mutants.
    /// A negative control is always added on top.
    pub n_targets: usize,
    /// Reads drawn per library.
    pub read_depth: u64,
    /// Multiplicative retention for a true binder during panning.
    pub enrichment_factor: f64,
    /// Retention for everything else.
    pub background_retention: f64,
    /// Fraction of VHHs that bind everything, including the NC.
    pub nonspecific_fraction: f64,
    /// Fraction of VHHs that bind at least one target.
    pub binder_fraction: f64,
    /// Log-normal sigma of the abundance distribution.
    pub abundance_shape: f64,
    /// Replicate (mother, sublibrary-set) pairs.
    pub n_replicates: usize,
    /// Epitope-position binding: each binder gets a contiguous antigen
    /// window, and a mutant abolishes binding when its mutated position
    /// falls inside the window. Off: random target subsets.
    pub epitope_mode: bool,
    /// Window width for epitope mode.
    pub epitope_width: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            n_vhh: 2_000,
            n_targets: 4,
            read_depth: 100_000,
            enrichment_factor: 100.0,
            background_retention: 0.01,
            nonspecific_fraction: 0.05,
            binder_fraction: 0.10,
            abundance_shape: 1.0,
            n_replicates: 1,
            epitope_mode: false,
            epitope_width: 9,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_vhh == 0 {
            return Err(Error::Config("n_vhh must be positive".to_string()));
        }
        if self.n_targets == 0 {
            return Err(Error::Config("n_targets must be positive".to_string()));
        }
        if self.read_depth == 0 {
            return Err(Error::Config("read_depth must be positive".to_string()));
        }
        if self.n_replicates == 0 {
            return Err(Error::Config("n_replicates must be positive".to_string()));
        }
        // Equality is allowed: it models uninformative panning, where
        // labeling should find nothing beyond the false-positive rate.
        let retention_ok = self.background_retention.is_finite()
            && self.enrichment_factor.is_finite()
            && self.background_retention > 0.0
            && self.background_retention <= self.enrichment_factor;
        if !retention_ok {
            return Err(Error::Config(format!(
                "need 0 < background_retention <= enrichment_factor (got {} and {})",
                self.background_retention, self.enrichment_factor
            )));
        }
        for (name, f) in [
            ("nonspecific_fraction", self.nonspecific_fraction),
            ("binder_fraction", self.binder_fraction),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::Config(format!("{name} must be in [0, 1], got {f}")));
            }
        }
        if self.nonspecific_fraction + self.binder_fraction > 1.0 {
            return Err(Error::Config(
                "nonspecific_fraction + binder_fraction must not exceed 1".to_string(),
            ));
        }
        let shape_ok = self.abundance_shape.is_finite() && self.abundance_shape > 0.0;
        if !shape_ok {
            return Err(Error::Config("abundance_shape must be positive".to_string()));
        }
        if self.epitope_mode && (self.epitope_width == 0 || self.epitope_width >= ANTIGEN_LEN) {
            return Err(Error::Config(format!(
                "epitope_width must be in [1, {ANTIGEN_LEN}), got {}",
                self.epitope_width
            )));
        }
        // Mutation positions are spaced 3..=6 apart starting near the
        // N-terminus, so the antigen length bounds the mutant count.
        let max_mutants = (ANTIGEN_LEN - 10) / 3;
        if self.n_targets - 1 > max_mutants {
            return Err(Error::Config(format!(
                "at most {max_mutants} mutants fit the antigen, requested {}",
                self.n_targets - 1
            )));
        }
        Ok(())
    }
}

/// The truth the libraries were drawn from.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub vhh_sequences: Vec<String>,
    /// Per-VHH repertoire weight.
    pub abundance: Vec<f64>,
    /// Target ids, wild type first; the NC column is implicit at the end
    /// of each `binding` row.
    pub target_ids: Vec<String>,
    /// (target_id, amino-acid sequence) for every real target.
    pub antigens: Vec<(String, String)>,
    /// n_vhh rows of n_targets + 1 columns (last column = NC).
    pub binding: Vec<Vec<bool>>,
    pub nonspecific: Vec<bool>,
}

impl GroundTruth {
    pub fn nc_column(&self) -> usize {
        self.target_ids.len()
    }

    pub fn binds(&self, vhh_idx: usize, column: usize) -> bool {
        self.binding[vhh_idx][column]
    }
}

/// Synthetic libraries plus the manifest tying them together.
#[derive(Debug, Clone)]
pub struct SimulatedExperiment {
    pub mothers: Vec<CountTable>,
    pub subs: Vec<CountTable>,
    pub manifest: Manifest,
}

/// Generate a full synthetic experiment. Identical configs (including
/// the seed) produce identical output.
pub fn generate_experiment(cfg: &SimConfig) -> Result<(GroundTruth, SimulatedExperiment)> {
    cfg.validate()?;

    let truth = generate_truth(cfg)?;

    let mut mothers = Vec::new();
    let mut subs = Vec::new();
    let mut libraries = Vec::new();
    let nc_col = truth.nc_column();

    for rep in 0..cfg.n_replicates {
        let mother_id = format!("M{}", rep + 1);
        let mother_counts = draw_library(cfg, &mother_id, &truth.abundance);
        mothers.push(to_table(&mother_id, Stage::Mother, None, &truth, mother_counts)?);
        libraries.push(LibraryEntry {
            library_id: mother_id.clone(),
            stage: Stage::Mother,
            path: format!("{mother_id}.tsv").into(),
            mother_id: None,
            target_id: None,
        });

        for (col, target_id) in truth
            .target_ids
            .iter()
            .map(String::as_str)
            .chain(std::iter::once(NC_TARGET_ID))
            .enumerate()
        {
            let column = if target_id == NC_TARGET_ID { nc_col } else { col };
            let library_id = format!("{mother_id}-{target_id}");
            let weights: Vec<f64> = truth
                .abundance
                .iter()
                .enumerate()
                .map(|(i, &a)| {
                    a * if truth.binds(i, column) {
                        cfg.enrichment_factor
                    } else {
                        cfg.background_retention
                    }
                })
                .collect();
            let counts = draw_library(cfg, &library_id, &weights);
            let stage = if target_id == NC_TARGET_ID {
                Stage::NegativeControl
            } else {
                Stage::Sublibrary
            };
            subs.push(to_table(
                &library_id,
                stage,
                Some(target_id.to_string()),
                &truth,
                counts,
            )?);
            libraries.push(LibraryEntry {
                library_id: library_id.clone(),
                stage,
                path: format!("{library_id}.tsv").into(),
                mother_id: Some(mother_id.clone()),
                target_id: Some(target_id.to_string()),
            });
        }
    }

    let manifest = Manifest {
        libraries,
        antigens: truth.antigens.iter().cloned().collect(),
    };
    manifest.validate()?;

    Ok((truth, SimulatedExperiment { mothers, subs, manifest }))
}

fn generate_truth(cfg: &SimConfig) -> Result<GroundTruth> {
    let vhh_sequences = generate_vhh_sequences(cfg);
    let (target_ids, antigens) = generate_antigens(cfg);

    let mut rng = stream_rng(cfg.seed, "ground-truth");
    let lognormal = LogNormal::new(0.0, cfg.abundance_shape)
        .map_err(|e| Error::Config(format!("bad abundance shape: {e}")))?;
    let abundance: Vec<f64> = (0..cfg.n_vhh).map(|_| lognormal.sample(&mut rng)).collect();

    // Assign roles by seeded shuffle: nonspecific first, then binders.
    let mut order: Vec<usize> = (0..cfg.n_vhh).collect();
    order.shuffle(&mut rng);
    let n_nonspecific = (cfg.nonspecific_fraction * cfg.n_vhh as f64).round() as usize;
    let n_binders = (cfg.binder_fraction * cfg.n_vhh as f64).round() as usize;
    let mut nonspecific = vec![false; cfg.n_vhh];
    let mut binding = vec![vec![false; cfg.n_targets + 1]; cfg.n_vhh];

    for &i in order.iter().take(n_nonspecific) {
        nonspecific[i] = true;
        binding[i].iter_mut().for_each(|b| *b = true);
    }
    let mutant_positions: Vec<usize> = antigens
        .iter()
        .skip(1)
        .map(|(id, _)| parse_mutant_position(id))
        .collect::<Result<_>>()?;
    for &i in order.iter().skip(n_nonspecific).take(n_binders) {
        if cfg.epitope_mode {
            // Contiguous epitope window; a mutant inside it abolishes
            // binding. The wild type is always bound.
            let start = rng.random_range(0..=ANTIGEN_LEN - cfg.epitope_width);
            let window = start..start + cfg.epitope_width;
            binding[i][0] = true;
            for (cell, &pos) in binding[i][1..=mutant_positions.len()]
                .iter_mut()
                .zip(&mutant_positions)
            {
                *cell = !window.contains(&pos);
            }
        } else {
            // Random nonempty target subset.
            let mut any = false;
            for cell in binding[i][..cfg.n_targets].iter_mut() {
                *cell = rng.random_bool(0.5);
                any |= *cell;
            }
            if !any {
                let t = rng.random_range(0..cfg.n_targets);
                binding[i][t] = true;
            }
        }
    }

    Ok(GroundTruth {
        vhh_sequences,
        abundance,
        target_ids,
        antigens,
        binding,
        nonspecific,
    })
}

fn generate_vhh_sequences(cfg: &SimConfig) -> Vec<String> {
    let mut rng = stream_rng(cfg.seed, "vhh-sequences");
    let mut seen = std::collections::HashSet::with_capacity(cfg.n_vhh);
    let mut out = Vec::with_capacity(cfg.n_vhh);
    while out.len() < cfg.n_vhh {
        let cdr1 = random_peptide(&mut rng, 5, 8);
        let cdr2 = random_peptide(&mut rng, 6, 10);
        let cdr3 = random_peptide(&mut rng, 6, 16);
        let seq = format!(
            "{FRAMEWORK_1}{cdr1}{FRAMEWORK_2}{cdr2}{FRAMEWORK_3}{cdr3}{FRAMEWORK_4}"
        );
        debug_assert!(seq.len() <= 152);
        if seen.insert(seq.clone()) {
            out.push(seq);
        }
    }
    out
}

fn random_peptide(rng: &mut ChaCha8Rng, min_len: usize, max_len: usize) -> String {
    let len = rng.random_range(min_len..=max_len);
    (0..len)
        .map(|_| AMINO_ACIDS[rng.random_range(0..AMINO_ACIDS.len())] as char)
        .collect()
}

/// Wild type plus alanine point mutants at positions spaced 3..=6 apart,
/// mimicking an alanine scan. Mutant ids follow the {orig}{pos}A pattern
/// with 1-based positions.
fn generate_antigens(cfg: &SimConfig) -> (Vec<String>, Vec<(String, String)>) {
    let mut rng = stream_rng(cfg.seed, "antigens");
    let step = Uniform::new_inclusive(3usize, 6).expect("static range");
    let mut positions = Vec::with_capacity(cfg.n_targets - 1);
    let mut pos = rng.random_range(4..10);
    while positions.len() < cfg.n_targets - 1 {
        positions.push(pos);
        pos += step.sample(&mut rng);
    }
    let mut wild_type: Vec<u8> = (0..ANTIGEN_LEN)
        .map(|_| AMINO_ACIDS[rng.random_range(0..AMINO_ACIDS.len())])
        .collect();
    // Mutated positions must not already hold alanine.
    for &p in &positions {
        while wild_type[p] == b'A' {
            wild_type[p] = AMINO_ACIDS[rng.random_range(0..AMINO_ACIDS.len())];
        }
    }
    let wt_string = String::from_utf8(wild_type.clone()).expect("ASCII");
    let mut target_ids = vec!["WT".to_string()];
    let mut antigens = vec![("WT".to_string(), wt_string)];
    for &p in &positions {
        let id = format!("{}{}A", wild_type[p] as char, p + 1);
        let mut mutant = wild_type.clone();
        mutant[p] = b'A';
        target_ids.push(id.clone());
        antigens.push((id, String::from_utf8(mutant).expect("ASCII")));
    }
    (target_ids, antigens)
}

fn parse_mutant_position(id: &str) -> Result<usize> {
    let digits: String = id.chars().filter(char::is_ascii_digit).collect();
    let pos: usize = digits
        .parse()
        .map_err(|_| Error::Config(format!("bad mutant id '{id}'")))?;
    Ok(pos - 1)
}

/// Draw one library's counts: multinomial sampling of `read_depth` reads
/// over the given weights, via conditional binomials.
fn draw_library(cfg: &SimConfig, library_id: &str, weights: &[f64]) -> Vec<u64> {
    let mut rng = stream_rng(cfg.seed, &format!("lib:{library_id}"));
    multinomial(&mut rng, cfg.read_depth, weights)
}

fn multinomial(rng: &mut ChaCha8Rng, n: u64, weights: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; weights.len()];
    let mut remaining = n;
    let mut weight_left: f64 = weights.iter().sum();
    for (i, &w) in weights.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i == weights.len() - 1 {
            counts[i] = remaining;
            break;
        }
        let p = (w / weight_left).clamp(0.0, 1.0);
        let c = Binomial::new(remaining, p)
            .expect("p clamped to [0, 1]")
            .sample(rng);
        counts[i] = c;
        remaining -= c;
        weight_left = (weight_left - w).max(0.0);
        if weight_left == 0.0 && remaining > 0 {
            // Numerically exhausted weights: dump the tail here.
            counts[i] += remaining;
            break;
        }
    }
    counts
}

fn to_table(
    library_id: &str,
    stage: Stage,
    target_id: Option<String>,
    truth: &GroundTruth,
    counts: Vec<u64>,
) -> Result<CountTable> {
    let entries: BTreeMap<String, u64> = counts
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c > 0)
        .map(|(i, c)| (truth.vhh_sequences[i].clone(), c))
        .collect();
    CountTable::from_entries(library_id, stage, target_id, entries)
}

/// Deterministic per-stream RNG: FNV-1a over the stream name, mixed with
/// the seed, expanded through splitmix64 into a ChaCha key.
fn stream_rng(seed: u64, stream: &str) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in stream.as_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut state = seed ^ h;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

// ---------------------------------------------------------------------
// Evaluation against the truth
// ---------------------------------------------------------------------

/// Confusion counts for one target (or pooled).
#[derive(Debug, Clone, Copy, Default)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
    /// Rows labeled non-significant (reported, not counted as predictions).
    pub non_significant: u64,
    /// Rows labeled noise (reported separately as well).
    pub noise: u64,
}

impl ConfusionCounts {
    pub fn sensitivity(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn false_binder_rate(&self) -> f64 {
        ratio(self.fp, self.fp + self.tn)
    }

    pub fn predictions(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    fn add(&mut self, other: &ConfusionCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.tn += other.tn;
        self.fn_ += other.fn_;
        self.non_significant += other.non_significant;
        self.noise += other.noise;
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Labels compared against the generating truth.
#[derive(Debug, Clone)]
pub struct ConfusionSummary {
    pub per_target: BTreeMap<String, ConfusionCounts>,
    pub overall: ConfusionCounts,
    /// Rows (vs real targets) whose VHH is truth-nonspecific.
    pub nonspecific_rows: u64,
    /// Of those, how many ended up labeled noise.
    pub nonspecific_noise: u64,
}

impl ConfusionSummary {
    pub fn nonspecific_noise_rate(&self) -> f64 {
        ratio(self.nonspecific_noise, self.nonspecific_rows)
    }
}

/// Score predicted labels against the truth. Truth positive means the
/// binding matrix is true for the (VHH, target) cell; predicted positive
/// means label binder. Non-significant and noise rows are tallied
/// separately rather than counted as predictions.
pub fn evaluate_labels(pairs: &[LabeledPair], truth: &GroundTruth) -> Result<ConfusionSummary> {
    let vhh_index: BTreeMap<&str, usize> = truth
        .vhh_sequences
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let target_index: BTreeMap<&str, usize> = truth
        .target_ids
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();

    let mut per_target: BTreeMap<String, ConfusionCounts> = BTreeMap::new();
    let mut nonspecific_rows = 0u64;
    let mut nonspecific_noise = 0u64;
    for pair in pairs {
        let &vhh = vhh_index.get(pair.vhh_sequence.as_str()).ok_or_else(|| {
            Error::Evaluation(format!("unknown VHH '{}'", pair.vhh_sequence))
        })?;
        let column = if pair.target_id == NC_TARGET_ID {
            truth.nc_column()
        } else {
            *target_index.get(pair.target_id.as_str()).ok_or_else(|| {
                Error::Evaluation(format!("unknown target '{}'", pair.target_id))
            })?
        };
        let truth_pos = truth.binds(vhh, column);
        let counts = per_target.entry(pair.target_id.clone()).or_default();
        match pair.label {
            Label::Binder => {
                if truth_pos {
                    counts.tp += 1;
                } else {
                    counts.fp += 1;
                }
            }
            Label::NonBinder => {
                if truth_pos {
                    counts.fn_ += 1;
                } else {
                    counts.tn += 1;
                }
            }
            Label::NonSignificant => counts.non_significant += 1,
            Label::Noise => counts.noise += 1,
        }
        if pair.target_id != NC_TARGET_ID && truth.nonspecific[vhh] {
            nonspecific_rows += 1;
            if pair.label == Label::Noise {
                nonspecific_noise += 1;
            }
        }
    }
    let mut overall = ConfusionCounts::default();
    for counts in per_target.values() {
        overall.add(counts);
    }
    Ok(ConfusionSummary {
        per_target,
        overall,
        nonspecific_rows,
        nonspecific_noise,
    })
}

/// Load a ground-truth CSV back as a (vhh, target) -> bound lookup.
pub fn read_ground_truth_csv<R: std::io::Read>(
    reader: R,
) -> Result<BTreeMap<(String, String), bool>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["vhh_sequence", "target_id", "bound"] {
        return Err(Error::Parse {
            line: 1,
            msg: "expected header vhh_sequence,target_id,bound".to_string(),
        });
    }
    let mut map = BTreeMap::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let bound = match record.get(2) {
            Some("1") => true,
            Some("0") => false,
            other => {
                return Err(Error::Parse {
                    line: i + 2,
                    msg: format!("bad bound value {other:?}"),
                })
            }
        };
        map.insert(
            (
                record.get(0).unwrap_or_default().to_string(),
                record.get(1).unwrap_or_default().to_string(),
            ),
            bound,
        );
    }
    Ok(map)
}

/// Ground truth as CSV: `vhh_sequence,target_id,bound` over every target
/// plus the NC column.
pub fn write_ground_truth_csv<W: Write>(truth: &GroundTruth, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["vhh_sequence", "target_id", "bound"])?;
    for (i, vhh) in truth.vhh_sequences.iter().enumerate() {
        for (col, target) in truth
            .target_ids
            .iter()
            .map(String::as_str)
            .chain(std::iter::once(NC_TARGET_ID))
            .enumerate()
        {
            w.write_record([
                vhh.as_str(),
                target,
                if truth.binding[i][col] { "1" } else { "0" },
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SimConfig {
        SimConfig {
            n_vhh: 200,
            read_depth: 20_000,
            n_targets: 3,
            seed: 11,
            ..SimConfig::default()
        }
    }

    #[test]
    fn config_validation_rejects_infeasible() {
        let mut cfg = small_cfg();
        cfg.n_vhh = 0;
        assert!(cfg.validate().is_err());
        cfg = small_cfg();
        cfg.background_retention = 200.0;
        assert!(cfg.validate().is_err());
        cfg = small_cfg();
        cfg.binder_fraction = 0.7;
        cfg.nonspecific_fraction = 0.5;
        assert!(cfg.validate().is_err());
        cfg = small_cfg();
        cfg.n_targets = 100;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn every_library_conserves_read_depth() {
        let cfg = small_cfg();
        let (_, exp) = generate_experiment(&cfg).unwrap();
        assert_eq!(exp.mothers.len(), 1);
        // n_targets sublibraries + 1 NC.
        assert_eq!(exp.subs.len(), cfg.n_targets + 1);
        for table in exp.mothers.iter().chain(exp.subs.iter()) {
            assert_eq!(
                table.total_reads(),
                cfg.read_depth,
                "library {} lost reads",
                table.library_id
            );
        }
    }

    #[test]
    fn same_seed_means_identical_experiments() {
        let cfg = small_cfg();
        let (t1, e1) = generate_experiment(&cfg).unwrap();
        let (t2, e2) = generate_experiment(&cfg).unwrap();
        assert_eq!(t1.vhh_sequences, t2.vhh_sequences);
        assert_eq!(t1.binding, t2.binding);
        assert_eq!(t1.abundance, t2.abundance);
        assert_eq!(e1.mothers, e2.mothers);
        assert_eq!(e1.subs, e2.subs);

        let different = SimConfig { seed: 12, ..cfg };
        let (_, e3) = generate_experiment(&different).unwrap();
        assert_ne!(e1.subs, e3.subs);
    }

    #[test]
    fn vhh_sequences_fit_the_featurizer_bound() {
        let (truth, _) = generate_experiment(&small_cfg()).unwrap();
        for seq in &truth.vhh_sequences {
            assert!(seq.len() <= 152);
            assert!(seq.bytes().all(|b| AMINO_ACIDS.contains(&b)));
        }
    }

    #[test]
    fn antigens_are_point_mutants_of_the_wild_type() {
        let (truth, _) = generate_experiment(&small_cfg()).unwrap();
        let wt = &truth.antigens[0].1;
        assert_eq!(wt.len(), ANTIGEN_LEN);
        for (id, seq) in truth.antigens.iter().skip(1) {
            let diffs: Vec<usize> = wt
                .bytes()
                .zip(seq.bytes())
                .enumerate()
                .filter(|(_, (a, b))| a != b)
                .map(|(i, _)| i)
                .collect();
            assert_eq!(diffs.len(), 1, "mutant {id} must differ at one position");
            let pos = diffs[0];
            assert_eq!(seq.as_bytes()[pos], b'A');
            assert_eq!(parse_mutant_position(id).unwrap(), pos);
        }
    }

    #[test]
    fn nonspecific_vhhs_bind_everything() {
        let (truth, _) = generate_experiment(&small_cfg()).unwrap();
        let n_nonspecific = truth.nonspecific.iter().filter(|&&b| b).count();
        assert_eq!(n_nonspecific, 10); // 5% of 200
        for (i, &ns) in truth.nonspecific.iter().enumerate() {
            if ns {
                assert!(truth.binding[i].iter().all(|&b| b));
            } else {
                assert!(!truth.binding[i][truth.nc_column()]);
            }
        }
    }

    #[test]
    fn epitope_mode_gives_mutation_sensitive_binders() {
        let cfg = SimConfig {
            epitope_mode: true,
            n_targets: 20,
            n_vhh: 300,
            seed: 5,
            ..SimConfig::default()
        };
        let (truth, _) = generate_experiment(&cfg).unwrap();
        let mut differential = 0;
        for (i, row) in truth.binding.iter().enumerate() {
            if truth.nonspecific[i] || !row[0] {
                continue;
            }
            let bound = row[..cfg.n_targets].iter().filter(|&&b| b).count();
            if bound < cfg.n_targets {
                differential += 1;
            }
        }
        assert!(
            differential > 0,
            "epitope mode must produce mutation-sensitive binders"
        );
    }

    #[test]
    fn enrichment_direction_holds_on_average() {
        // For true binders the expected sublibrary proportion exceeds the
        // mother proportion; check empirically across seeds.
        let mut wins = 0u32;
        let mut comparisons = 0u32;
        for seed in 0..5 {
            let cfg = SimConfig {
                seed,
                n_vhh: 150,
                read_depth: 30_000,
                n_targets: 2,
                ..SimConfig::default()
            };
            let (truth, exp) = generate_experiment(&cfg).unwrap();
            let mother = &exp.mothers[0];
            let sub = exp
                .subs
                .iter()
                .find(|s| s.target_id.as_deref() == Some("WT"))
                .unwrap();
            for (i, vhh) in truth.vhh_sequences.iter().enumerate() {
                if truth.binding[i][0] && mother.get(vhh) >= 20 {
                    comparisons += 1;
                    let p1 = mother.get(vhh) as f64 / mother.total_reads() as f64;
                    let p2 = sub.get(vhh) as f64 / sub.total_reads() as f64;
                    if p2 > p1 {
                        wins += 1;
                    }
                }
            }
        }
        assert!(comparisons > 20);
        assert!(
            wins as f64 >= 0.95 * comparisons as f64,
            "enrichment direction violated: {wins}/{comparisons}"
        );
    }

    #[test]
    fn uninformative_panning_labels_almost_nothing() {
        // enrichment == retention makes every sublibrary a fresh draw
        // from the mother distribution; binders should not exceed the
        // false-positive budget.
        use crate::labeler::{Label, LabelingConfig};
        use crate::pipeline::label_simulated;
        let cfg = SimConfig {
            seed: 8,
            n_vhh: 500,
            n_targets: 3,
            read_depth: 50_000,
            enrichment_factor: 0.01,
            background_retention: 0.01,
            ..SimConfig::default()
        };
        let (_, exp) = generate_experiment(&cfg).unwrap();
        let (rows, _) = label_simulated(&exp, &LabelingConfig::default(), true).unwrap();
        let binders = rows.iter().filter(|r| r.label == Label::Binder).count();
        assert!(
            (binders as f64) <= 0.05 * rows.len() as f64,
            "uninformative panning produced {binders} binders in {} rows",
            rows.len()
        );
    }

    #[test]
    fn deeper_sequencing_never_hurts_sensitivity() {
        // Same seed (fixed ground truth), 10x the read depth: measured
        // labeling sensitivity must be non-decreasing.
        use crate::labeler::LabelingConfig;
        use crate::pipeline::label_simulated;
        let mut sensitivities = Vec::new();
        for depth in [5_000u64, 50_000] {
            let cfg = SimConfig {
                seed: 17,
                n_vhh: 400,
                n_targets: 3,
                read_depth: depth,
                ..SimConfig::default()
            };
            let (truth, exp) = generate_experiment(&cfg).unwrap();
            let (rows, _) = label_simulated(&exp, &LabelingConfig::default(), true).unwrap();
            let summary = evaluate_labels(&rows, &truth).unwrap();
            sensitivities.push(summary.overall.sensitivity());
        }
        assert!(
            sensitivities[1] >= sensitivities[0],
            "sensitivity dropped with depth: {sensitivities:?}"
        );
    }

    #[test]
    fn ground_truth_csv_roundtrip() {
        let (truth, _) = generate_experiment(&small_cfg()).unwrap();
        let mut buf = Vec::new();
        write_ground_truth_csv(&truth, &mut buf).unwrap();
        let map = read_ground_truth_csv(buf.as_slice()).unwrap();
        assert_eq!(map.len(), truth.vhh_sequences.len() * (truth.target_ids.len() + 1));
        for (i, vhh) in truth.vhh_sequences.iter().enumerate() {
            assert_eq!(
                map[&(vhh.clone(), "NC".to_string())],
                truth.binding[i][truth.nc_column()]
            );
        }
    }

    #[test]
    fn evaluation_counts_match_hand_classification() {
        use crate::stats::Direction;
        let truth = GroundTruth {
            vhh_sequences: vec!["AAA".into(), "CCC".into()],
            abundance: vec![1.0, 1.0],
            target_ids: vec!["WT".into()],
            antigens: vec![("WT".into(), "MKL".into())],
            binding: vec![vec![true, false], vec![false, true]],
            nonspecific: vec![false, true],
        };
        let row = |vhh: &str, label: Label| LabeledPair {
            vhh_sequence: vhh.to_string(),
            target_id: "WT".to_string(),
            antigen_sequence: "MKL".to_string(),
            label,
            best_log10_p: -3.0,
            best_direction: Direction::Increased,
            source_library_id: "s".to_string(),
        };
        let summary = evaluate_labels(
            &[row("AAA", Label::Binder), row("CCC", Label::Noise)],
            &truth,
        )
        .unwrap();
        assert_eq!(summary.overall.tp, 1);
        assert_eq!(summary.overall.noise, 1);
        assert_eq!(summary.nonspecific_rows, 1);
        assert_eq!(summary.nonspecific_noise, 1);
        assert_eq!(summary.overall.sensitivity(), 1.0);

        // All non-significant rows: no predictions at all.
        let nonsig = evaluate_labels(
            &[row("AAA", Label::NonSignificant), row("CCC", Label::NonSignificant)],
            &truth,
        )
        .unwrap();
        assert_eq!(nonsig.overall.predictions(), 0);
        assert_eq!(nonsig.overall.non_significant, 2);
        assert_eq!(nonsig.overall.sensitivity(), 0.0);

        let err = evaluate_labels(&[row("ZZZ", Label::Binder)], &truth);
        assert!(matches!(err, Err(Error::Evaluation(_))));
    }
}
