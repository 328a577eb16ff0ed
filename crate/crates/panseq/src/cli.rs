//! Subcommand implementations for the `panseq` binary.
//!
//! Every subcommand is deterministic given identical inputs, flags, and
//! seeds, and all output files are written atomically (temp file plus
//! rename).

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{
    dataset_stats, make_split_plan, sample_identity_histogram, Encoding, TrainConfig,
};
use crate::dataset::{read_labeled_csv, write_audit_tsv, write_labeled_csv};
use crate::error::{Error, Result};
use crate::io_util::atomic_write;
use crate::labeler::{Label, LabeledPair, LabelingConfig};
use crate::manifest::Manifest;
use crate::pipeline::{label_experiment, supervised_pairs, CheckpointResult, ModelKind};
use crate::seqio::{
    parse_fasta, translate_orf, write_count_tsv, write_fasta, CountTable, SequenceRecord, Stage,
};
use crate::sim::{generate_experiment, write_ground_truth_csv, SimConfig};

/// Phage-display panning analysis toolkit.
#[derive(Parser)]
#[command(name = "panseq", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Translate DNA FASTA to cropped amino-acid FASTA (first ATG to the
    /// first in-frame stop). Untranslatable reads are skipped and counted.
    Translate {
        input: PathBuf,
        output: PathBuf,
    },
    /// Build a deduplicated read-count TSV from an amino-acid FASTA.
    /// Singletons are removed unless --keep-singletons is given.
    Count {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        keep_singletons: bool,
    },
    /// Label every (VHH, target) pair from a library manifest: z-tests,
    /// min-p replicate aggregation, and negative-control noise reduction.
    Label {
        manifest: PathBuf,
        output: PathBuf,
        /// Significance level on the two-sided p-value.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Noise-filter threshold in log10 (ratio compared to 10^t).
        #[arg(long, default_value_t = 2.5)]
        ratio_threshold: f64,
        /// Reject libraries smaller than this many reads.
        #[arg(long, default_value_t = 0)]
        min_library_size: u64,
        /// Remove singletons from every library before testing.
        #[arg(long)]
        remove_singletons: bool,
        /// Where to write the noise-decision audit TSV.
        #[arg(long)]
        audit: Option<PathBuf>,
    },
    /// Generate a synthetic panning experiment with known ground truth:
    /// count tables, a manifest, and a ground-truth CSV.
    Simulate(SimulateArgs),
    /// Emit per-run, per-checkpoint train/test CSVs from a labeled
    /// dataset (binder and non-binder rows only).
    Split {
        labeled: PathBuf,
        out_dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Shuffled-order repetitions.
        #[arg(long, default_value_t = 5)]
        runs: usize,
        /// Comma-separated test antigens; default: seeded random half of
        /// the mutants.
        #[arg(long, value_delimiter = ',')]
        test_antigens: Option<Vec<String>>,
        /// Wild-type antigen id (always first in training).
        #[arg(long, default_value = "WT")]
        wild_type: String,
        /// Restrict the emitted checkpoints (default: the full schedule).
        #[arg(long, value_delimiter = ',')]
        checkpoints: Option<Vec<usize>>,
    },
    /// Train a baseline on each split checkpoint and report metrics.
    TrainEval(TrainEvalArgs),
    /// Dataset statistics and the pairwise-identity histogram.
    Stats {
        labeled: PathBuf,
        report: PathBuf,
        /// Unique binder VHHs sampled for the identity histogram.
        #[arg(long, default_value_t = 700)]
        identity_sample: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Skip the (quadratic) identity histogram.
        #[arg(long)]
        no_identity: bool,
    },
}

#[derive(Args)]
pub struct SimulateArgs {
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub n_vhh: usize,
    /// Antigen count (wild type plus mutants); the NC is added on top.
    #[arg(long, default_value_t = 4)]
    pub n_targets: usize,
    #[arg(long, default_value_t = 100_000)]
    pub read_depth: u64,
    #[arg(long, default_value_t = 100.0)]
    pub enrichment_factor: f64,
    #[arg(long, default_value_t = 0.01)]
    pub background_retention: f64,
    #[arg(long, default_value_t = 0.05)]
    pub nonspecific_fraction: f64,
    #[arg(long, default_value_t = 0.10)]
    pub binder_fraction: f64,
    #[arg(long, default_value_t = 1.0)]
    pub abundance_shape: f64,
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    /// Epitope-position binding structure (mutation-sensitive binders).
    #[arg(long)]
    pub epitope_mode: bool,
    #[arg(long, default_value_t = 9)]
    pub epitope_width: usize,
    /// Keep singletons in the emitted tables (the real pipeline drops
    /// them during sequence analysis).
    #[arg(long)]
    pub keep_singletons: bool,
}

#[derive(Args)]
pub struct TrainEvalArgs {
    pub split_dir: PathBuf,
    pub metrics: PathBuf,
    #[arg(long, value_enum, default_value_t = ModelArg::Lr)]
    pub model: ModelArg,
    #[arg(long, value_enum, default_value_t = EncodingArg::Onehot)]
    pub encoding: EncodingArg,
    /// Directory for PR-curve TSVs (one per run and checkpoint).
    #[arg(long)]
    pub pr_curves: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 256)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 512)]
    pub hidden_units: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub l2_penalty: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 0.10)]
    pub validation_fraction: f64,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Lr,
    Mlp,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum EncodingArg {
    Onehot,
    Cksaap,
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Translate { input, output } => cmd_translate(&input, &output),
        Command::Count {
            input,
            output,
            keep_singletons,
        } => cmd_count(&input, &output, keep_singletons),
        Command::Label {
            manifest,
            output,
            alpha,
            ratio_threshold,
            min_library_size,
            remove_singletons,
            audit,
        } => cmd_label(
            &manifest,
            &output,
            LabelingConfig {
                alpha,
                log10_ratio_threshold: ratio_threshold,
                min_library_size,
            },
            remove_singletons,
            audit.as_deref(),
        ),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Split {
            labeled,
            out_dir,
            seed,
            runs,
            test_antigens,
            wild_type,
            checkpoints,
        } => cmd_split(
            &labeled,
            &out_dir,
            seed,
            runs,
            test_antigens,
            &wild_type,
            checkpoints,
        ),
        Command::TrainEval(args) => cmd_train_eval(&args),
        Command::Stats {
            labeled,
            report,
            identity_sample,
            seed,
            no_identity,
        } => cmd_stats(&labeled, &report, identity_sample, seed, no_identity),
    }
}

fn cmd_translate(input: &Path, output: &Path) -> Result<()> {
    let records = parse_fasta(BufReader::new(File::open(input)?))?;
    let mut translated = Vec::new();
    let mut no_orf = 0u64;
    let mut no_stop = 0u64;
    let mut bad_base = 0u64;
    for rec in &records {
        match translate_orf(&rec.sequence) {
            Ok(protein) => translated.push(SequenceRecord::new(rec.id.clone(), protein)),
            Err(Error::NoOrf) => no_orf += 1,
            Err(Error::NoStop) => no_stop += 1,
            Err(Error::InvalidBase(_)) => bad_base += 1,
            Err(e) => return Err(e),
        }
    }
    atomic_write(output, |w| write_fasta(&translated, w))?;
    eprintln!(
        "translate: {} reads in, {} translated, {} without ATG, {} without stop, {} with invalid bases",
        records.len(),
        translated.len(),
        no_orf,
        no_stop,
        bad_base
    );
    Ok(())
}

fn cmd_count(input: &Path, output: &Path, keep_singletons: bool) -> Result<()> {
    let records = parse_fasta(BufReader::new(File::open(input)?))?;
    let table = CountTable::from_sequences(
        "cli",
        Stage::Mother,
        None,
        records.iter().map(|r| r.sequence.as_str()),
    )?;
    let table = if keep_singletons {
        table
    } else {
        table.remove_singletons()
    };
    atomic_write(output, |w| write_count_tsv(&table, w))?;
    eprintln!(
        "count: {} reads, {} unique sequences written",
        records.len(),
        table.len()
    );
    Ok(())
}

fn cmd_label(
    manifest_path: &Path,
    output: &Path,
    cfg: LabelingConfig,
    remove_singletons: bool,
    audit: Option<&Path>,
) -> Result<()> {
    let manifest = Manifest::load(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let (mut mothers, mut subs) = manifest.load_tables(base)?;
    if remove_singletons {
        mothers = mothers.iter().map(CountTable::remove_singletons).collect();
        subs = subs.iter().map(CountTable::remove_singletons).collect();
    }
    for table in mothers.iter().chain(subs.iter()) {
        if table.total_reads() < 1_000 {
            eprintln!(
                "warning: library '{}' has only {} reads; the normal approximation \
                 behind the z-test may be poor",
                table.library_id,
                table.total_reads()
            );
        }
    }
    let (rows, decisions) = label_experiment(
        &mothers,
        &subs,
        &manifest.mother_map(),
        &manifest.antigens,
        &cfg,
    )?;
    atomic_write(output, |w| write_labeled_csv(&rows, w))?;
    if let Some(audit_path) = audit {
        atomic_write(audit_path, |w| write_audit_tsv(&decisions, w))?;
    }
    eprintln!(
        "label: {} rows written ({} binder re-examinations logged)",
        rows.len(),
        decisions.len()
    );
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let cfg = SimConfig {
        seed: args.seed,
        n_vhh: args.n_vhh,
        n_targets: args.n_targets,
        read_depth: args.read_depth,
        enrichment_factor: args.enrichment_factor,
        background_retention: args.background_retention,
        nonspecific_fraction: args.nonspecific_fraction,
        binder_fraction: args.binder_fraction,
        abundance_shape: args.abundance_shape,
        n_replicates: args.replicates,
        epitope_mode: args.epitope_mode,
        epitope_width: args.epitope_width,
    };
    let (truth, experiment) = generate_experiment(&cfg)?;
    std::fs::create_dir_all(&args.out_dir)?;
    for table in experiment.mothers.iter().chain(experiment.subs.iter()) {
        let written = if args.keep_singletons {
            table.clone()
        } else {
            table.remove_singletons()
        };
        let path = args.out_dir.join(format!("{}.tsv", table.library_id));
        atomic_write(&path, |w| write_count_tsv(&written, w))?;
    }
    atomic_write(&args.out_dir.join("manifest.txt"), |w| {
        experiment.manifest.write(w)
    })?;
    atomic_write(&args.out_dir.join("ground_truth.csv"), |w| {
        write_ground_truth_csv(&truth, w)
    })?;
    eprintln!(
        "simulate: {} libraries written to {}",
        experiment.mothers.len() + experiment.subs.len(),
        args.out_dir.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_split(
    labeled: &Path,
    out_dir: &Path,
    seed: u64,
    runs: usize,
    test_antigens: Option<Vec<String>>,
    wild_type: &str,
    checkpoints: Option<Vec<usize>>,
) -> Result<()> {
    if runs == 0 {
        return Err(Error::Config("--runs must be positive".to_string()));
    }
    let rows = read_labeled_csv(BufReader::new(File::open(labeled)?))?;
    let supervised: Vec<&LabeledPair> = rows
        .iter()
        .filter(|r| matches!(r.label, Label::Binder | Label::NonBinder))
        .collect();
    if supervised.is_empty() {
        return Err(Error::DegenerateData(
            "labeled file has no binder/non-binder rows".to_string(),
        ));
    }
    let mut antigens: Vec<String> = supervised
        .iter()
        .map(|r| r.target_id.clone())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    if !antigens.iter().any(|a| a == wild_type) {
        return Err(Error::Config(format!(
            "wild type '{wild_type}' not present in the labeled data"
        )));
    }
    antigens.retain(|a| a != wild_type);

    let test_set: Vec<String> = match test_antigens {
        Some(list) => {
            for t in &list {
                if !antigens.contains(t) {
                    return Err(Error::Config(format!(
                        "test antigen '{t}' not present in the labeled data"
                    )));
                }
            }
            list
        }
        None => {
            // Seeded random half of the mutants.
            use rand::prelude::*;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut shuffled = antigens.clone();
            shuffled.shuffle(&mut rng);
            let n_test = shuffled.len() / 2;
            let mut test: Vec<String> = shuffled[..n_test].to_vec();
            test.sort();
            test
        }
    };
    let train_set: Vec<String> = antigens
        .iter()
        .filter(|a| !test_set.contains(a))
        .cloned()
        .collect();
    if train_set.is_empty() || test_set.is_empty() {
        return Err(Error::Config(
            "need at least one train mutant and one test mutant".to_string(),
        ));
    }

    std::fs::create_dir_all(out_dir)?;
    let test_rows: Vec<LabeledPair> = supervised
        .iter()
        .filter(|r| test_set.contains(&r.target_id))
        .map(|r| (*r).clone())
        .collect();
    atomic_write(&out_dir.join("test.csv"), |w| {
        write_labeled_csv(&test_rows, w)
    })?;

    let mut plan_writer_rows: Vec<(usize, usize, usize, String)> = Vec::new();
    for run in 1..=runs {
        let plan = make_split_plan(wild_type, &train_set, &test_set, seed + run as u64 - 1)?;
        let selected: Vec<usize> = match &checkpoints {
            Some(list) => {
                for c in list {
                    if !plan.schedule.contains(c) {
                        return Err(Error::Config(format!(
                            "checkpoint {c} is not in the schedule {:?}",
                            plan.schedule
                        )));
                    }
                }
                list.clone()
            }
            None => plan.schedule.clone(),
        };
        for checkpoint in selected {
            let train_antigens = plan.train_antigens_at(checkpoint)?;
            let ckpt_rows: Vec<LabeledPair> = supervised
                .iter()
                .filter(|r| train_antigens.contains(&r.target_id))
                .map(|r| (*r).clone())
                .collect();
            let path = out_dir
                .join(format!("run{run}"))
                .join(format!("ckpt{checkpoint:02}_train.csv"));
            atomic_write(&path, |w| write_labeled_csv(&ckpt_rows, w))?;
            plan_writer_rows.push((
                run,
                checkpoint,
                train_antigens.len(),
                train_antigens.join(";"),
            ));
        }
    }
    atomic_write(&out_dir.join("plan.csv"), |w| {
        writeln!(w, "run,checkpoint,n_antigens,train_antigens")?;
        for (run, ckpt, n, antigens) in &plan_writer_rows {
            writeln!(w, "{run},{ckpt},{n},{antigens}")?;
        }
        Ok(())
    })?;
    eprintln!(
        "split: {} runs x {} checkpoints written to {}",
        runs,
        plan_writer_rows.len() / runs,
        out_dir.display()
    );
    Ok(())
}

fn cmd_train_eval(args: &TrainEvalArgs) -> Result<()> {
    let model = match args.model {
        ModelArg::Lr => ModelKind::Lr,
        ModelArg::Mlp => ModelKind::Mlp,
    };
    let encoding = match args.encoding {
        EncodingArg::Onehot => Encoding::OnehotPair,
        EncodingArg::Cksaap => Encoding::Cksaap,
    };
    let test_rows = read_labeled_csv(BufReader::new(File::open(
        args.split_dir.join("test.csv"),
    )?))?;
    let test_pairs = supervised_pairs(&test_rows)?;

    // plan.csv drives which train files exist.
    let plan_file = File::open(args.split_dir.join("plan.csv"))?;
    let mut grid: Vec<(usize, usize, usize)> = Vec::new();
    for (i, line) in BufReader::new(plan_file).lines().enumerate() {
        let line = line?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.splitn(4, ',').collect();
        if fields.len() < 3 {
            return Err(Error::Parse {
                line: i + 1,
                msg: "bad plan.csv row".to_string(),
            });
        }
        let parse = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("bad number '{s}' in plan.csv"),
            })
        };
        grid.push((parse(fields[0])?, parse(fields[1])?, parse(fields[2])?));
    }

    let mut results: Vec<CheckpointResult> = Vec::new();
    for &(run, checkpoint, n_antigens) in &grid {
        let train_path = args
            .split_dir
            .join(format!("run{run}"))
            .join(format!("ckpt{checkpoint:02}_train.csv"));
        let train_rows = read_labeled_csv(BufReader::new(File::open(&train_path)?))?;
        let train_pairs = supervised_pairs(&train_rows)?;
        let cfg = TrainConfig {
            epochs: args.epochs,
            batch_size: args.batch_size,
            learning_rate: args.learning_rate,
            validation_fraction: args.validation_fraction,
            hidden_units: args.hidden_units,
            l2_penalty: args.l2_penalty,
            max_iterations: args.max_iterations,
            // Every (run, checkpoint) trains from its own stream.
            seed: args
                .seed
                .wrapping_add(run as u64 * 1_000)
                .wrapping_add(checkpoint as u64),
        };
        let metrics =
            crate::pipeline::train_and_evaluate(&train_pairs, &test_pairs, model, encoding, &cfg)?;
        eprintln!(
            "train-eval: run {run} checkpoint {checkpoint}: P = {:.4}, R = {:.4}, F1 = {:.4}, PR-AUC = {:.4}",
            metrics.precision, metrics.recall, metrics.f1, metrics.pr_auc
        );
        results.push(CheckpointResult {
            run,
            checkpoint,
            n_antigens,
            model,
            metrics,
        });
    }

    atomic_write(&args.metrics, |w| {
        writeln!(w, "run,checkpoint,n_antigens,model,precision,recall,f1,pr_auc")?;
        for r in &results {
            writeln!(
                w,
                "{},{},{},{},{:.6},{:.6},{:.6},{:.6}",
                r.run,
                r.checkpoint,
                r.n_antigens,
                r.model.as_str(),
                r.metrics.precision,
                r.metrics.recall,
                r.metrics.f1,
                r.metrics.pr_auc
            )?;
        }
        Ok(())
    })?;

    if let Some(dir) = &args.pr_curves {
        for r in &results {
            let path = dir.join(format!("pr_run{}_ckpt{:02}.tsv", r.run, r.checkpoint));
            atomic_write(&path, |w| {
                writeln!(w, "recall\tprecision")?;
                for (recall, precision) in &r.metrics.pr_curve {
                    writeln!(w, "{recall}\t{precision}")?;
                }
                Ok(())
            })?;
        }
    }
    Ok(())
}

fn cmd_stats(
    labeled: &Path,
    report: &Path,
    identity_sample: usize,
    seed: u64,
    no_identity: bool,
) -> Result<()> {
    let rows = read_labeled_csv(BufReader::new(File::open(labeled)?))?;
    let summary = dataset_stats(rows.iter());

    // Identity histogram over unique binder VHH sequences.
    let histogram = if no_identity {
        None
    } else {
        let binder_vhhs: Vec<String> = rows
            .iter()
            .filter(|r| r.label == Label::Binder)
            .map(|r| r.vhh_sequence.clone())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        if binder_vhhs.len() >= 2 {
            Some(sample_identity_histogram(
                &binder_vhhs,
                identity_sample,
                seed,
            )?)
        } else {
            None
        }
    };

    atomic_write(report, |w| {
        writeln!(w, "total_rows\t{}", summary.total_rows)?;
        writeln!(w, "binders\t{}", summary.binders)?;
        writeln!(w, "non_binders\t{}", summary.non_binders)?;
        writeln!(w, "non_significant\t{}", summary.non_significant)?;
        writeln!(w, "noise\t{}", summary.noise)?;
        writeln!(w, "unique_vhhs\t{}", summary.unique_vhhs)?;
        writeln!(w, "binder_vhhs\t{}", summary.binder_vhhs)?;
        writeln!(w, "differential_vhhs\t{}", summary.differential_vhhs)?;
        writeln!(w)?;
        writeln!(w, "[per_antigen]")?;
        writeln!(w, "antigen\trows\tbinders\tnon_binders\tnon_significant\tnoise")?;
        for (antigen, c) in &summary.per_antigen {
            writeln!(
                w,
                "{antigen}\t{}\t{}\t{}\t{}\t{}",
                c.rows, c.binders, c.non_binders, c.non_significant, c.noise
            )?;
        }
        if let Some(bins) = &histogram {
            writeln!(w)?;
            writeln!(
                w,
                "[identity_histogram] (binder VHHs, sample up to {identity_sample}, seed {seed})"
            )?;
            writeln!(w, "bin_low\tbin_high\tcount")?;
            for (i, count) in bins.iter().enumerate() {
                writeln!(
                    w,
                    "{:.2}\t{:.2}\t{count}",
                    i as f64 / 100.0,
                    (i + 1) as f64 / 100.0
                )?;
            }
        }
        Ok(())
    })?;
    eprintln!("stats: report written to {}", report.display());
    Ok(())
}
