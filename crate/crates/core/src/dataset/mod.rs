//! Dataset construction: generate, dedupe, shard, manifest and split.
//!
//! A dataset directory holds `manifest.json` plus shard files
//! `shard-00000.tsv`, `shard-00001.tsv`, ... Each shard starts with a one-line
//! JSON header followed by one record per line (see [`InstanceRecord::to_line`]).
//! Instance `i` of the kind mix is generated from `derive_seed(master_seed, i)`,
//! so the content does not depend on the worker count.

mod record;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::index;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::codec::problem_id;
use crate::maze::{generate_instance, generate_instance_with, GenConfig, GenError, GenParams, GeneratorKind};
use crate::rng::{derive_seed, rng_from_seed};
use crate::search::{validate_plan, Verdict};

pub use record::InstanceRecord;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const DEFAULT_SHARD_SIZE: usize = 50_000;
/// Environment variable overriding the default worker count.
pub const WORKERS_ENV: &str = "MAZETRACE_WORKERS";

const SHARD_FORMAT: &str = "mazetrace-shard";
const DATASET_FORMAT: &str = "mazetrace-dataset";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("invalid dataset config: {0}")]
    Config(String),
    #[error("instance {index}")]
    Generate { index: u64, source: GenError },
    #[error("{}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: digest mismatch (expected {expected}, got {actual})", path.display())]
    DigestMismatch {
        path: PathBuf,
        expected: String,
        actual: String,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("record {id}: {reason}")]
    InvalidRecord { id: String, reason: String },
    #[error("kind {kind}: requested {requested} held-out instances but only {available} exist")]
    InsufficientInstances {
        kind: GeneratorKind,
        requested: usize,
        available: usize,
    },
    #[error("invalid manifest")]
    Manifest(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KindCount {
    pub kind: GeneratorKind,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub kinds: Vec<KindCount>,
    pub width: usize,
    pub height: usize,
    pub master_seed: u64,
    pub shard_size: usize,
    pub params: GenParams,
}

impl DatasetConfig {
    pub fn new(kinds: Vec<KindCount>, size: usize, master_seed: u64) -> Self {
        Self {
            kinds,
            width: size,
            height: size,
            master_seed,
            shard_size: DEFAULT_SHARD_SIZE,
            params: GenParams::default(),
        }
    }

    pub fn total(&self) -> usize {
        self.kinds.iter().map(|k| k.count).sum()
    }

    fn gen_config(&self, kind: GeneratorKind, seed: u64) -> GenConfig {
        GenConfig {
            kind,
            width: self.width,
            height: self.height,
            seed,
            params: self.params.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.kinds.is_empty() || self.total() == 0 {
            return Err(DatasetError::Config("no instances requested".into()));
        }
        if self.shard_size == 0 {
            return Err(DatasetError::Config("shard size must be positive".into()));
        }
        for k in &self.kinds {
            self.gen_config(k.kind, 0)
                .validate()
                .map_err(|e| DatasetError::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Kind of the instance at global position `index` in the kind mix.
    fn kind_at(&self, index: usize) -> GeneratorKind {
        let mut rest = index;
        for k in &self.kinds {
            if rest < k.count {
                return k.kind;
            }
            rest -= k.count;
        }
        unreachable!("index {index} beyond the configured total")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardEntry {
    pub file: String,
    pub records: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub seed: u64,
    pub per_kind: usize,
    pub train: usize,
    /// Held-out ids per kind, in dataset order.
    pub holdout: BTreeMap<GeneratorKind, Vec<String>>,
}

impl Split {
    pub fn holdout_ids(&self) -> HashSet<&str> {
        self.holdout.values().flatten().map(String::as_str).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: String,
    pub version: u32,
    pub config: DatasetConfig,
    pub records: usize,
    pub duplicates_dropped: usize,
    pub records_per_kind: BTreeMap<GeneratorKind, usize>,
    pub shards: Vec<ShardEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

impl DatasetManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn load(dir: &Path) -> Result<Self, DatasetError> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, dir: &Path) -> Result<(), DatasetError> {
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, self.to_json()).map_err(io_err(&path))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct ShardHeader {
    format: String,
    version: u32,
    shard: usize,
    width: usize,
    height: usize,
    records: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// SHA-256 of the manifest file of the dataset in `dir`.
pub fn manifest_digest(dir: &Path) -> Result<String, DatasetError> {
    let path = dir.join(MANIFEST_FILE);
    let bytes = fs::read(&path).map_err(io_err(&path))?;
    Ok(sha256_hex(&bytes))
}

/// Worker count: explicit value, else the environment override, else the
/// available parallelism.
pub fn resolve_workers(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()))
        .filter(|n| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn shard_name(i: usize) -> String {
    format!("shard-{i:05}.tsv")
}

/// Renders a shard file.
pub fn render_shard(index: usize, width: usize, height: usize, records: &[InstanceRecord]) -> String {
    let header = ShardHeader {
        format: SHARD_FORMAT.into(),
        version: 1,
        shard: index,
        width,
        height,
        records: records.len(),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for r in records {
        out.push_str(&r.to_line());
        out.push('\n');
    }
    out
}

fn write_shard(
    dir: &Path,
    index: usize,
    cfg: &DatasetConfig,
    records: &[InstanceRecord],
) -> Result<ShardEntry, DatasetError> {
    let file = shard_name(index);
    let path = dir.join(&file);
    let body = render_shard(index, cfg.width, cfg.height, records);
    let f = fs::File::create(&path).map_err(io_err(&path))?;
    let mut w = BufWriter::new(f);
    w.write_all(body.as_bytes()).map_err(io_err(&path))?;
    w.flush().map_err(io_err(&path))?;
    Ok(ShardEntry {
        file,
        records: records.len(),
        sha256: sha256_hex(body.as_bytes()),
    })
}

/// Reads a shard, checking its digest when `expected_sha256` is given.
pub fn read_shard(path: &Path, expected_sha256: Option<&str>) -> Result<Vec<InstanceRecord>, DatasetError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    if let Some(expected) = expected_sha256 {
        let actual = sha256_hex(&bytes);
        if actual != expected {
            return Err(DatasetError::DigestMismatch {
                path: path.to_path_buf(),
                expected: expected.to_string(),
                actual,
            });
        }
    }
    let parse_err = |line: usize, message: String| DatasetError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let text = String::from_utf8(bytes).map_err(|e| parse_err(0, e.to_string()))?;
    let mut lines = text.split_inclusive('\n').enumerate();
    let header: ShardHeader = match lines.next() {
        Some((_, l)) if l.ends_with('\n') => {
            serde_json::from_str(l.trim_end()).map_err(|e| parse_err(1, format!("bad header: {e}")))?
        }
        _ => return Err(parse_err(1, "missing header".into())),
    };
    if header.format != SHARD_FORMAT {
        return Err(parse_err(1, format!("unknown format `{}`", header.format)));
    }
    let mut records = Vec::with_capacity(header.records);
    for (i, line) in lines {
        let Some(body) = line.strip_suffix('\n') else {
            return Err(parse_err(i + 1, "truncated record (no line terminator)".into()));
        };
        records.push(InstanceRecord::parse_line(body, header.width, header.height).map_err(|m| parse_err(i + 1, m))?);
    }
    if records.len() != header.records {
        return Err(parse_err(
            records.len() + 1,
            format!("header announces {} records, found {}", header.records, records.len()),
        ));
    }
    Ok(records)
}

/// Loads the manifest and every shard, verifying digests.
pub fn read_dataset(dir: &Path) -> Result<(DatasetManifest, Vec<InstanceRecord>), DatasetError> {
    let manifest = DatasetManifest::load(dir)?;
    let mut records = Vec::with_capacity(manifest.records);
    for shard in &manifest.shards {
        records.extend(read_shard(&dir.join(&shard.file), Some(&shard.sha256))?);
    }
    Ok((manifest, records))
}

/// Re-validates a whole dataset: digests, record counts, unique ids, length
/// laws and ValidOptimal plans.
pub fn verify_dataset(dir: &Path) -> Result<DatasetManifest, DatasetError> {
    let (manifest, records) = read_dataset(dir)?;
    if records.len() != manifest.records {
        return Err(DatasetError::Config(format!(
            "manifest lists {} records, shards hold {}",
            manifest.records,
            records.len()
        )));
    }
    let mut seen = HashSet::new();
    for r in &records {
        if !seen.insert(r.id.as_str()) {
            return Err(r_invalid(r, "duplicate id"));
        }
        let grid = r.grid()?;
        let plan = r.decoded_plan()?;
        if r.decoded_trace()?.len() != r.difficulty || plan.len() != r.plan_len {
            return Err(r_invalid(r, "length law violated"));
        }
        if validate_plan(&grid, &plan) != Verdict::ValidOptimal {
            return Err(r_invalid(r, "stored plan is not optimal"));
        }
    }
    if let Some(split) = &manifest.split {
        let held = split.holdout_ids();
        if held.len() + split.train != records.len() || !held.iter().all(|id| seen.contains(id)) {
            return Err(DatasetError::Config("split does not partition the records".into()));
        }
    }
    Ok(manifest)
}

fn r_invalid(r: &InstanceRecord, reason: &str) -> DatasetError {
    DatasetError::InvalidRecord {
        id: r.id.clone(),
        reason: reason.into(),
    }
}

fn generate_chunk(
    cfg: &DatasetConfig,
    range: std::ops::Range<usize>,
    workers: usize,
) -> Result<Vec<InstanceRecord>, DatasetError> {
    let one = |i: usize| {
        let seed = derive_seed(cfg.master_seed, i as u64);
        generate_instance(&cfg.gen_config(cfg.kind_at(i), seed))
            .map(|inst| InstanceRecord::from_instance(&inst))
            .map_err(|source| DatasetError::Generate {
                index: i as u64,
                source,
            })
    };
    #[cfg(feature = "parallel")]
    if workers > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| DatasetError::Config(e.to_string()))?;
        return pool.install(|| range.into_par_iter().map(one).collect());
    }
    let _ = workers;
    range.map(one).collect()
}

/// Builds a dataset into `out_dir`. On error every file written so far is
/// removed.
pub fn build_dataset(cfg: &DatasetConfig, out_dir: &Path, workers: usize) -> Result<DatasetManifest, DatasetError> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut written: Vec<PathBuf> = Vec::new();
    let result = build_into(cfg, out_dir, workers.max(1), &mut written);
    if result.is_err() {
        for path in written {
            let _ = fs::remove_file(path);
        }
    }
    result
}

fn build_into(
    cfg: &DatasetConfig,
    dir: &Path,
    workers: usize,
    written: &mut Vec<PathBuf>,
) -> Result<DatasetManifest, DatasetError> {
    let total = cfg.total();
    let mut seen: HashSet<String> = HashSet::new();
    let mut pending: Vec<InstanceRecord> = Vec::new();
    let mut shards = Vec::new();
    let mut per_kind: BTreeMap<GeneratorKind, usize> = BTreeMap::new();
    let mut dropped = 0;

    let mut flush =
        |pending: &mut Vec<InstanceRecord>, shards: &mut Vec<ShardEntry>, all: bool| -> Result<(), DatasetError> {
            while pending.len() >= cfg.shard_size || (all && !pending.is_empty()) {
                let take = pending.len().min(cfg.shard_size);
                let chunk: Vec<_> = pending.drain(..take).collect();
                let index = shards.len();
                written.push(dir.join(shard_name(index)));
                shards.push(write_shard(dir, index, cfg, &chunk)?);
            }
            Ok(())
        };

    let mut next = 0;
    while next < total {
        let end = (next + cfg.shard_size).min(total);
        for (offset, mut rec) in generate_chunk(cfg, next..end, workers)?.into_iter().enumerate() {
            if seen.contains(&rec.id) {
                if rec.kind != GeneratorKind::SearchformerStyle {
                    dropped += 1;
                    continue;
                }
                rec = resample_unique(cfg, (next + offset) as u64, &seen)?;
            }
            seen.insert(rec.id.clone());
            *per_kind.entry(rec.kind).or_default() += 1;
            pending.push(rec);
        }
        flush(&mut pending, &mut shards, false)?;
        next = end;
    }
    flush(&mut pending, &mut shards, true)?;

    let manifest = DatasetManifest {
        format: DATASET_FORMAT.into(),
        version: 1,
        config: cfg.clone(),
        records: seen.len(),
        duplicates_dropped: dropped,
        records_per_kind: per_kind,
        shards,
        split: None,
    };
    written.push(dir.join(MANIFEST_FILE));
    manifest.save(dir)?;
    Ok(manifest)
}

/// Searchformer-style collisions are redrawn from a sub-stream of the
/// instance seed until the problem is new to the batch.
fn resample_unique(cfg: &DatasetConfig, index: u64, seen: &HashSet<String>) -> Result<InstanceRecord, DatasetError> {
    let seed = derive_seed(derive_seed(cfg.master_seed, index), 1);
    let gc = cfg.gen_config(GeneratorKind::SearchformerStyle, seed);
    generate_instance_with(&gc, &mut |g| seen.contains(&problem_id(g)))
        .map(|inst| InstanceRecord::from_instance(&inst))
        .map_err(|source| DatasetError::Generate { index, source })
}

/// Picks `per_kind` held-out records of every kind uniformly without
/// replacement. `records` must be in dataset order.
pub fn assign_holdout(records: &[InstanceRecord], per_kind: usize, seed: u64) -> Result<Split, DatasetError> {
    let mut by_kind: BTreeMap<GeneratorKind, Vec<&str>> = BTreeMap::new();
    for r in records {
        by_kind.entry(r.kind).or_default().push(&r.id);
    }
    let mut holdout = BTreeMap::new();
    for (kind, ids) in by_kind {
        if per_kind > ids.len() {
            return Err(DatasetError::InsufficientInstances {
                kind,
                requested: per_kind,
                available: ids.len(),
            });
        }
        let mut rng = rng_from_seed(derive_seed(seed, kind as u64));
        let mut picked = index::sample(&mut rng, ids.len(), per_kind).into_vec();
        picked.sort_unstable();
        holdout.insert(kind, picked.into_iter().map(|i| ids[i].to_string()).collect::<Vec<_>>());
    }
    let held: usize = holdout.values().map(Vec::len).sum();
    Ok(Split {
        seed,
        per_kind,
        train: records.len() - held,
        holdout,
    })
}

/// Assigns a held-out split to the dataset in `dir` and rewrites its manifest.
pub fn split_holdout(dir: &Path, per_kind: usize, seed: u64) -> Result<DatasetManifest, DatasetError> {
    let (mut manifest, records) = read_dataset(dir)?;
    manifest.split = Some(assign_holdout(&records, per_kind, seed)?);
    manifest.save(dir)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(kind: GeneratorKind, count: usize) -> DatasetConfig {
        let mut cfg = DatasetConfig::new(vec![KindCount { kind, count }], 10, 7);
        cfg.shard_size = 40;
        cfg
    }

    #[test]
    fn build_then_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let m = build_dataset(&small_cfg(GeneratorKind::Wilson, 100), dir.path(), 2).unwrap();
        assert_eq!(
            m.shards.iter().map(|s| s.records).collect::<Vec<_>>(),
            vec![40, 40, m.records - 80]
        );
        let (_, records) = read_dataset(dir.path()).unwrap();
        assert_eq!(records.len(), m.records);
        assert_eq!(m.records + m.duplicates_dropped, 100);
        verify_dataset(dir.path()).unwrap();
    }

    #[test]
    fn holdout_split() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_cfg(GeneratorKind::Wilson, 1000);
        cfg.width = 30;
        cfg.height = 30;
        cfg.shard_size = 300;
        build_dataset(&cfg, dir.path(), 4).unwrap();
        let m = split_holdout(dir.path(), 100, 3).unwrap();
        let split = m.split.as_ref().unwrap();
        assert_eq!(split.holdout[&GeneratorKind::Wilson].len(), 100);
        assert_eq!(split.train, 900);
        let again = split_holdout(dir.path(), 100, 3).unwrap();
        assert_eq!(again.split, m.split);
        verify_dataset(dir.path()).unwrap();
        assert!(matches!(
            split_holdout(dir.path(), 1001, 3),
            Err(DatasetError::InsufficientInstances { available: 1000, .. })
        ));
    }

    #[test]
    fn shard_corruption_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let m = build_dataset(&small_cfg(GeneratorKind::Kruskal, 20), dir.path(), 1).unwrap();
        let path = dir.path().join(&m.shards[0].file);
        let mut bytes = fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x01;
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            read_shard(&path, Some(&m.shards[0].sha256)),
            Err(DatasetError::DigestMismatch { .. })
        ));
    }

    #[test]
    fn truncated_last_line() {
        let dir = tempfile::tempdir().unwrap();
        let m = build_dataset(&small_cfg(GeneratorKind::Kruskal, 20), dir.path(), 1).unwrap();
        let path = dir.path().join(&m.shards[0].file);
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, &text[..text.len() - 10]).unwrap();
        match read_shard(&path, None) {
            Err(DatasetError::Parse { line, .. }) => assert_eq!(line, 21),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn failed_build_cleans_up() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_cfg(GeneratorKind::Wilson, 10);
        cfg.kinds.push(KindCount {
            kind: GeneratorKind::SearchformerStyle,
            count: 5,
        });
        cfg.shard_size = 5;
        cfg.params.min_difficulty = 1_000_000;
        cfg.params.max_attempts = 3;
        let err = build_dataset(&cfg, dir.path(), 1).unwrap_err();
        assert!(matches!(err, DatasetError::Generate { index: 10, .. }));
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn mixed_kinds_keep_order() {
        let cfg = DatasetConfig {
            kinds: vec![
                KindCount {
                    kind: GeneratorKind::FreeSpace,
                    count: 3,
                },
                KindCount {
                    kind: GeneratorKind::Drunkard,
                    count: 2,
                },
            ],
            ..small_cfg(GeneratorKind::Wilson, 1)
        };
        let kinds: Vec<_> = (0..5).map(|i| cfg.kind_at(i)).collect();
        assert_eq!(kinds[2], GeneratorKind::FreeSpace);
        assert_eq!(kinds[3], GeneratorKind::Drunkard);
    }
}
