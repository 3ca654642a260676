//! JSON-lines feature cache.
//!
//! The first line is a header carrying the layout and the feature-config
//! hash; each following line is `{task, frame, side, mode, values}`. A cache
//! whose hash or mode differs from the current run is ignored.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::extract::{extract_task, FeatureTable, MaskTally};
use super::{short_hash, FeatureConfig, Layout};
use crate::corpus::{annotations_to_csv, detections_to_jsonl, Corpus, Mode, Side, Task};
use crate::error::{Error, Result};
use crate::par::Execution;

const FORMAT: &str = "handuse-features";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub format: String,
    pub version: u32,
    pub mode: Mode,
    pub config_hash: String,
    pub layout: Layout,
    pub masks: MaskTally,
}

#[derive(Serialize, Deserialize)]
struct CacheRow {
    task: String,
    frame: usize,
    side: Side,
    mode: Mode,
    values: Vec<f64>,
}

pub fn write_cache(path: &Path, config_hash: &str, table: &FeatureTable) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let header = CacheHeader {
        format: FORMAT.into(),
        version: VERSION,
        mode: table.layout.mode,
        config_hash: config_hash.into(),
        layout: (*table.layout).clone(),
        masks: table.masks,
    };
    let io = |e| Error::io(path, e);
    writeln!(out, "{}", serde_json::to_string(&header).expect("header serializes")).map_err(io)?;
    for ((task, frame, side), values) in &table.rows {
        let row = CacheRow {
            task: task.clone(),
            frame: *frame,
            side: *side,
            mode: table.layout.mode,
            values: values.clone(),
        };
        writeln!(out, "{}", serde_json::to_string(&row).expect("row serializes")).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_header(path: &Path) -> Result<CacheHeader> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut line = String::new();
    BufReader::new(file)
        .read_line(&mut line)
        .map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&line).map_err(|e| Error::parse(format!("{}:1", path.display()), e.to_string()))
}

pub fn read_cache(path: &Path) -> Result<(CacheHeader, FeatureTable)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let loc = |n: usize| format!("{}:{n}", path.display());
    let first = lines
        .next()
        .ok_or_else(|| Error::parse(loc(1), "empty cache"))?
        .map_err(|e| Error::io(path, e))?;
    let header: CacheHeader = serde_json::from_str(&first).map_err(|e| Error::parse(loc(1), e.to_string()))?;
    if header.format != FORMAT || header.version != VERSION {
        return Err(Error::parse(loc(1), "not a feature cache of this version"));
    }
    let len = header.layout.len();
    let mut rows = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: CacheRow = serde_json::from_str(&line).map_err(|e| Error::parse(loc(i + 2), e.to_string()))?;
        if row.values.len() != len || row.mode != header.mode {
            return Err(Error::parse(loc(i + 2), "row does not match header layout"));
        }
        rows.insert((row.task, row.frame, row.side), row.values);
    }
    let table = FeatureTable {
        layout: Arc::new(header.layout.clone()),
        rows,
        masks: header.masks,
    };
    Ok((header, table))
}

/// Returns the cached table when `path` holds a cache for the same config
/// hash and mode.
pub fn load_if_fresh(path: &Path, config_hash: &str, mode: Mode) -> Result<Option<FeatureTable>> {
    if !path.is_file() {
        return Ok(None);
    }
    let header = match read_header(path) {
        Ok(h) => h,
        Err(e) => {
            log::warn!("ignoring unreadable feature cache: {e}");
            return Ok(None);
        }
    };
    if header.config_hash != config_hash || header.mode != mode {
        log::info!(
            "feature cache {} is stale (hash {} vs {}), recomputing",
            path.display(),
            header.config_hash,
            config_hash
        );
        return Ok(None);
    }
    Ok(Some(read_cache(path)?.1))
}

/// Fingerprint of everything one task's cached features depend on: the
/// feature parameters, the mode, the task geometry and its loaded
/// detections and labels. Frame pixels and mask files are not hashed.
pub fn task_fingerprint(corpus: &Corpus, task: &Task, config: &FeatureConfig, mode: Mode) -> Result<String> {
    let data = corpus
        .task_data(&task.id)
        .ok_or_else(|| Error::invalid(format!("task {}: data not loaded", task.id)))?;
    let text = format!(
        "{}|{}|{}|{}|{}x{}|{}|{}",
        config.hash(),
        mode.as_str(),
        task.id,
        task.frame_count,
        task.resolution.0,
        task.resolution.1,
        detections_to_jsonl(&data.detections),
        annotations_to_csv(&data.labels)
    );
    Ok(short_hash(&text))
}

pub fn task_cache_path(dir: &Path, task: &Task, mode: Mode) -> std::path::PathBuf {
    dir.join(format!("{}.{}.features.jsonl", task.id, mode.as_str()))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub reused: usize,
    pub computed: usize,
}

/// Extracts `tasks`, reusing per-task cache files under `cache_dir` whose
/// fingerprint still matches and writing fresh ones for the rest.
pub fn load_or_extract(
    corpus: &Corpus,
    tasks: &[&Task],
    config: &FeatureConfig,
    mode: Mode,
    cache_dir: Option<&Path>,
    exec: Execution,
) -> Result<(FeatureTable, CacheStats)> {
    if let Some(d) = cache_dir {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let mut table = FeatureTable {
        layout: Arc::new(config.layout(mode)),
        rows: BTreeMap::new(),
        masks: MaskTally::default(),
    };
    let mut stats = CacheStats::default();
    for task in tasks {
        let cached = match cache_dir {
            Some(d) => {
                let fp = task_fingerprint(corpus, task, config, mode)?;
                let path = task_cache_path(d, task, mode);
                let hit = match load_if_fresh(&path, &fp, mode) {
                    Ok(hit) => hit,
                    Err(e) => {
                        log::warn!("ignoring corrupt feature cache: {e}");
                        None
                    }
                };
                Some((fp, path, hit))
            }
            None => None,
        };
        let t = match cached {
            Some((_, _, Some(hit))) if *hit.layout == *table.layout => {
                stats.reused += 1;
                hit
            }
            other => {
                log::info!("extracting {} ({} frames)", task.id, task.frame_count);
                let t = extract_task(corpus, task, config, mode, exec)?;
                if let Some((fp, path, _)) = other {
                    write_cache(&path, &fp, &t)?;
                }
                stats.computed += 1;
                t
            }
        };
        table.masks.merge(&t.masks);
        table.rows.extend(t.rows);
    }
    Ok((table, stats))
}
