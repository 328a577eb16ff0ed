//! Library manifest: the mother/sublibrary/target topology plus the
//! antigen sequence table.
//!
//! Format (tab-separated, versioned by the first line):
//!
//! ```text
//! #panseq-manifest v1
//! [libraries]
//! library_id  stage  path  mother_id  target_id
//! M1  mother  m1.tsv  -  -
//! S1  sublibrary  s1.tsv  M1  WT
//! N1  negative_control  n1.tsv  M1  NC
//! [antigens]
//! target_id  sequence
//! WT  MNSF...
//! ```
//!
//! `-` marks an absent field. Paths are resolved relative to the
//! manifest file's directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::seqio::{read_count_tsv, CountTable, Stage, NC_TARGET_ID};

pub const MANIFEST_TAG: &str = "#panseq-manifest v1";

#[derive(Debug, Clone)]
pub struct LibraryEntry {
    pub library_id: String,
    pub stage: Stage,
    pub path: PathBuf,
    pub mother_id: Option<String>,
    pub target_id: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pub libraries: Vec<LibraryEntry>,
    /// target_id -> amino-acid sequence (the reserved NC id has no entry).
    pub antigens: BTreeMap<String, String>,
}

impl Manifest {
    pub fn parse<R: BufRead>(reader: R) -> Result<Manifest> {
        #[derive(PartialEq)]
        enum Section {
            Preamble,
            Libraries,
            Antigens,
        }
        let mut section = Section::Preamble;
        let mut saw_tag = false;
        let mut header_seen = false;
        let mut manifest = Manifest::default();

        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if line_no == 1 {
                if trimmed != MANIFEST_TAG {
                    return Err(Error::Parse {
                        line: 1,
                        msg: format!("expected manifest tag '{MANIFEST_TAG}'"),
                    });
                }
                saw_tag = true;
                continue;
            }
            match trimmed {
                "[libraries]" => {
                    section = Section::Libraries;
                    header_seen = false;
                    continue;
                }
                "[antigens]" => {
                    section = Section::Antigens;
                    header_seen = false;
                    continue;
                }
                _ => {}
            }
            let fields: Vec<&str> = trimmed.split('\t').collect();
            match section {
                Section::Preamble => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "content before the [libraries] section".to_string(),
                    })
                }
                Section::Libraries => {
                    if !header_seen {
                        header_seen = true;
                        if fields != ["library_id", "stage", "path", "mother_id", "target_id"] {
                            return Err(Error::Parse {
                                line: line_no,
                                msg: "bad [libraries] header".to_string(),
                            });
                        }
                        continue;
                    }
                    if fields.len() != 5 {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("expected 5 fields, got {}", fields.len()),
                        });
                    }
                    let opt = |s: &str| {
                        if s == "-" {
                            None
                        } else {
                            Some(s.to_string())
                        }
                    };
                    manifest.libraries.push(LibraryEntry {
                        library_id: fields[0].to_string(),
                        stage: Stage::parse(fields[1])?,
                        path: PathBuf::from(fields[2]),
                        mother_id: opt(fields[3]),
                        target_id: opt(fields[4]),
                    });
                }
                Section::Antigens => {
                    if !header_seen {
                        header_seen = true;
                        if fields != ["target_id", "sequence"] {
                            return Err(Error::Parse {
                                line: line_no,
                                msg: "bad [antigens] header".to_string(),
                            });
                        }
                        continue;
                    }
                    if fields.len() != 2 {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("expected 2 fields, got {}", fields.len()),
                        });
                    }
                    if manifest
                        .antigens
                        .insert(fields[0].to_string(), fields[1].to_string())
                        .is_some()
                    {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("duplicate antigen '{}'", fields[0]),
                        });
                    }
                }
            }
        }
        if !saw_tag {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected manifest tag '{MANIFEST_TAG}'"),
            });
        }
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn load(path: &Path) -> Result<Manifest> {
        Manifest::parse(BufReader::new(File::open(path)?))
    }

    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "{MANIFEST_TAG}")?;
        writeln!(writer, "[libraries]")?;
        writeln!(writer, "library_id\tstage\tpath\tmother_id\ttarget_id")?;
        for lib in &self.libraries {
            writeln!(
                writer,
                "{}\t{}\t{}\t{}\t{}",
                lib.library_id,
                lib.stage.as_str(),
                lib.path.display(),
                lib.mother_id.as_deref().unwrap_or("-"),
                lib.target_id.as_deref().unwrap_or("-"),
            )?;
        }
        writeln!(writer, "[antigens]")?;
        writeln!(writer, "target_id\tsequence")?;
        for (target, seq) in &self.antigens {
            writeln!(writer, "{target}\t{seq}")?;
        }
        Ok(())
    }

    /// Structural validation: unique ids, resolvable mothers, antigen
    /// sequences for every real target, and NC reserved correctly.
    pub fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        let mothers: BTreeSet<&str> = self
            .libraries
            .iter()
            .filter(|l| l.stage == Stage::Mother)
            .map(|l| l.library_id.as_str())
            .collect();
        for lib in &self.libraries {
            if !ids.insert(lib.library_id.as_str()) {
                return Err(Error::Config(format!(
                    "duplicate library id '{}'",
                    lib.library_id
                )));
            }
            match lib.stage {
                Stage::Mother => {
                    if lib.mother_id.is_some() || lib.target_id.is_some() {
                        return Err(Error::Config(format!(
                            "mother library '{}' must not set mother_id or target_id",
                            lib.library_id
                        )));
                    }
                }
                Stage::Sublibrary | Stage::NegativeControl => {
                    let mother = lib.mother_id.as_deref().ok_or_else(|| {
                        Error::Config(format!(
                            "library '{}' is missing its mother_id",
                            lib.library_id
                        ))
                    })?;
                    if !mothers.contains(mother) {
                        return Err(Error::Config(format!(
                            "library '{}' references unknown mother '{mother}'",
                            lib.library_id
                        )));
                    }
                    let target = lib.target_id.as_deref().ok_or_else(|| {
                        Error::Config(format!(
                            "library '{}' is missing its target_id",
                            lib.library_id
                        ))
                    })?;
                    if lib.stage == Stage::NegativeControl {
                        if target != NC_TARGET_ID {
                            return Err(Error::Config(format!(
                                "negative-control library '{}' must use target '{NC_TARGET_ID}'",
                                lib.library_id
                            )));
                        }
                    } else {
                        if target == NC_TARGET_ID {
                            return Err(Error::Config(format!(
                                "sublibrary '{}' may not use the reserved target '{NC_TARGET_ID}'",
                                lib.library_id
                            )));
                        }
                        if !self.antigens.contains_key(target) {
                            return Err(Error::Config(format!(
                                "target '{target}' has no antigen sequence"
                            )));
                        }
                    }
                }
            }
        }
        if self.antigens.contains_key(NC_TARGET_ID) {
            return Err(Error::Config(format!(
                "the reserved target '{NC_TARGET_ID}' must not have an antigen sequence"
            )));
        }
        Ok(())
    }

    /// Load every referenced count table, resolving paths against
    /// `base_dir`. Returns (mothers, sublibraries-and-negative-controls).
    pub fn load_tables(&self, base_dir: &Path) -> Result<(Vec<CountTable>, Vec<CountTable>)> {
        let mut mothers = Vec::new();
        let mut subs = Vec::new();
        for lib in &self.libraries {
            let path = if lib.path.is_absolute() {
                lib.path.clone()
            } else {
                base_dir.join(&lib.path)
            };
            let file = File::open(&path).map_err(|e| {
                Error::Config(format!(
                    "cannot open count table '{}' for library '{}': {e}",
                    path.display(),
                    lib.library_id
                ))
            })?;
            let entries = read_count_tsv(BufReader::new(file))?;
            let table = CountTable::from_entries(
                lib.library_id.clone(),
                lib.stage,
                lib.target_id.clone(),
                entries,
            )?;
            match lib.stage {
                Stage::Mother => mothers.push(table),
                _ => subs.push(table),
            }
        }
        Ok((mothers, subs))
    }

    /// sublibrary id -> mother id, for the labeler.
    pub fn mother_map(&self) -> BTreeMap<String, String> {
        self.libraries
            .iter()
            .filter_map(|l| {
                l.mother_id
                    .as_ref()
                    .map(|m| (l.library_id.clone(), m.clone()))
            })
            .collect()
    }
}
