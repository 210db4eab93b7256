//! Corpus acquisition and indexing.
//!
//! A corpus directory holds one canonical BLT file per election under
//! `blt/` plus a `manifest.json` with content hashes, so re-runs are
//! idempotent and any corruption is detected and repaired. Raw inputs may
//! be `.blt` files (the published dialect with plain name lines is
//! accepted) or the corpus CSV layout; the published archive carries each
//! election in up to three copies, which are deduplicated by file stem with
//! the original `.blt` preferred.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::formats::{csv_to_election, parse_blt, parse_blt_dialect, write_blt};
use crate::model::Election;

/// Where the Scottish ballot data is published.
pub const SCOT_ELEX_URL: &str =
    "https://codeload.github.com/mggg/scot-elex/tar.gz/refs/heads/main";

#[derive(Debug, Error)]
pub enum CorpusFault {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("download failed: {0}")]
    Download(String),
    #[error("corpus directory {0} has no manifest and no .blt files")]
    Empty(PathBuf),
}

/// A per-file problem recorded without aborting the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusError {
    pub id: String,
    pub error: String,
}

/// One indexed election.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    pub file: String,
    pub sha256: String,
    pub title: String,
    pub candidates: usize,
    pub seats: usize,
    pub voters: u64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CorpusIndex {
    pub entries: Vec<CorpusEntry>,
}

impl CorpusIndex {
    /// Elections with more than one seat, the multiwinner experiment set.
    pub fn multiwinner(&self) -> impl Iterator<Item = &CorpusEntry> {
        self.entries.iter().filter(|e| e.seats > 1)
    }

    /// Hash over entry hashes, identifying the corpus content.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for e in &self.entries {
            hasher.update(e.id.as_bytes());
            hasher.update(e.sha256.as_bytes());
        }
        hex(&hasher.finalize())
    }
}

/// Where raw election files come from.
pub enum FetchSource {
    /// Download a gzipped tarball over HTTPS.
    Https(String),
    /// Read a local gzipped tarball.
    Archive(PathBuf),
    /// Walk a local directory.
    Dir(PathBuf),
}

/// The cache directory: `$PROPMETER_CACHE` or `.propmeter-cache`.
pub fn cache_dir() -> PathBuf {
    std::env::var_os("PROPMETER_CACHE")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(".propmeter-cache"))
}

/// Fetches raw election files, converts them to BLT under `dest/blt/`, and
/// writes `dest/manifest.json`. Idempotent: files whose recorded hash still
/// matches are not rewritten; mismatching files are reconverted. Per-file
/// conversion failures land in the error list, never abort the run.
pub fn fetch_scot(
    dest: &Path,
    source: FetchSource,
) -> Result<(CorpusIndex, Vec<CorpusError>), CorpusFault> {
    let raw_files = dedupe_by_id(gather_raw(source)?);
    let blt_dir = dest.join("blt");
    fs::create_dir_all(&blt_dir).map_err(|e| io_fault(&blt_dir, e))?;

    let previous = read_manifest(dest).unwrap_or_default();
    let known: BTreeMap<&str, &CorpusEntry> =
        previous.entries.iter().map(|e| (e.id.as_str(), e)).collect();

    let mut entries = Vec::new();
    let mut errors = Vec::new();
    for (name, bytes) in raw_files {
        let id = election_id(&name);
        let out_path = blt_dir.join(format!("{id}.blt"));
        // skip work when the cached conversion is intact
        if let Some(entry) = known.get(id.as_str()) {
            if let Ok(existing) = fs::read(&out_path) {
                if hex(&Sha256::digest(&existing)) == entry.sha256 {
                    entries.push((*entry).clone());
                    continue;
                }
            }
        }
        match convert_raw(&name, &bytes) {
            Ok(election) => {
                let blt = write_blt(&election);
                if let Err(e) = fs::write(&out_path, &blt) {
                    return Err(io_fault(&out_path, e));
                }
                entries.push(CorpusEntry {
                    id: id.clone(),
                    file: format!("blt/{id}.blt"),
                    sha256: hex(&Sha256::digest(blt.as_bytes())),
                    title: election.title.clone(),
                    candidates: election.num_candidates(),
                    seats: election.seats(),
                    voters: election.total_voters(),
                });
            }
            Err(message) => errors.push(CorpusError { id, error: message }),
        }
    }
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    let index = CorpusIndex { entries };
    write_manifest(dest, &index)?;
    Ok((index, errors))
}

/// Loads an existing corpus directory: the manifest when present (verifying
/// hashes and repairing the index for missing files), otherwise a scan for
/// `.blt` files.
pub fn load_corpus(dir: &Path) -> Result<(CorpusIndex, Vec<CorpusError>), CorpusFault> {
    let mut errors = Vec::new();
    if let Some(manifest) = read_manifest(dir) {
        let mut entries = Vec::new();
        for entry in manifest.entries {
            let path = dir.join(&entry.file);
            match fs::read(&path) {
                Ok(bytes) if hex(&Sha256::digest(&bytes)) == entry.sha256 => entries.push(entry),
                Ok(_) => errors.push(CorpusError {
                    id: entry.id.clone(),
                    error: format!("{} does not match its recorded hash", entry.file),
                }),
                Err(e) => errors.push(CorpusError {
                    id: entry.id.clone(),
                    error: format!("{}: {e}", entry.file),
                }),
            }
        }
        return Ok((CorpusIndex { entries }, errors));
    }

    // no manifest: index every .blt under the directory
    let mut entries = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(current) = stack.pop() {
        let read = fs::read_dir(&current).map_err(|e| io_fault(&current, e))?;
        for item in read.flatten() {
            let path = item.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|x| x == "blt") {
                let id = election_id(&path.file_name().unwrap().to_string_lossy());
                match fs::read_to_string(&path).map_err(|e| e.to_string()).and_then(|text| {
                    parse_blt(&text).map_err(|e| e.to_string()).map(|e| (text, e))
                }) {
                    Ok((text, election)) => entries.push(CorpusEntry {
                        id,
                        file: path
                            .strip_prefix(dir)
                            .unwrap_or(&path)
                            .to_string_lossy()
                            .into_owned(),
                        sha256: hex(&Sha256::digest(text.as_bytes())),
                        title: election.title.clone(),
                        candidates: election.num_candidates(),
                        seats: election.seats(),
                        voters: election.total_voters(),
                    }),
                    Err(error) => errors.push(CorpusError { id, error }),
                }
            }
        }
    }
    if entries.is_empty() {
        return Err(CorpusFault::Empty(dir.to_path_buf()));
    }
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    Ok((CorpusIndex { entries }, errors))
}

/// Reads one indexed election.
pub fn read_election(dir: &Path, entry: &CorpusEntry) -> Result<Election, String> {
    let path = dir.join(&entry.file);
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_blt(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Ballot-level statistics over the multiwinner elections, the subset the
/// published totals refer to; used to sanity-check a converted corpus.
#[derive(Debug, Clone, Serialize)]
pub struct CorpusStats {
    pub elections: usize,
    pub multiwinner_elections: usize,
    /// Ballots across the multiwinner elections.
    pub total_ballots: u64,
    pub rank_one_share: f64,
    pub fewer_than_seats_share: f64,
    pub complete_share: f64,
}

pub fn corpus_stats(dir: &Path, index: &CorpusIndex) -> Result<CorpusStats, String> {
    let mut total: u64 = 0;
    let mut rank_one: u64 = 0;
    let mut fewer_than_k: u64 = 0;
    let mut complete: u64 = 0;
    for entry in index.multiwinner() {
        let e = read_election(dir, entry)?;
        let m = e.num_candidates();
        for b in e.ballots() {
            total += b.weight;
            if b.prefix.len() == 1 {
                rank_one += b.weight;
            }
            if b.prefix.len() < e.seats() {
                fewer_than_k += b.weight;
            }
            if b.prefix.len() >= m - 1 {
                complete += b.weight;
            }
        }
    }
    Ok(CorpusStats {
        elections: index.entries.len(),
        multiwinner_elections: index.multiwinner().count(),
        total_ballots: total,
        rank_one_share: rank_one as f64 / total as f64,
        fewer_than_seats_share: fewer_than_k as f64 / total as f64,
        complete_share: complete as f64 / total as f64,
    })
}

fn gather_raw(source: FetchSource) -> Result<Vec<(String, Vec<u8>)>, CorpusFault> {
    match source {
        FetchSource::Https(url) => {
            let response = ureq::get(&url)
                .call()
                .map_err(|e| CorpusFault::Download(e.to_string()))?;
            let mut bytes = Vec::new();
            response
                .into_reader()
                .read_to_end(&mut bytes)
                .map_err(|e| CorpusFault::Download(e.to_string()))?;
            untar(&bytes[..])
        }
        FetchSource::Archive(path) => {
            let bytes = fs::read(&path).map_err(|e| io_fault(&path, e))?;
            untar(&bytes[..])
        }
        FetchSource::Dir(path) => {
            let mut files = Vec::new();
            let mut stack = vec![path.clone()];
            while let Some(current) = stack.pop() {
                let read = fs::read_dir(&current).map_err(|e| io_fault(&current, e))?;
                for item in read.flatten() {
                    let p = item.path();
                    if p.is_dir() {
                        stack.push(p);
                    } else if is_raw_election_file(&p.to_string_lossy()) {
                        let bytes = fs::read(&p).map_err(|e| io_fault(&p, e))?;
                        files.push((p.to_string_lossy().into_owned(), bytes));
                    }
                }
            }
            files.sort();
            Ok(files)
        }
    }
}

fn untar(bytes: &[u8]) -> Result<Vec<(String, Vec<u8>)>, CorpusFault> {
    let decoder = flate2::read::GzDecoder::new(bytes);
    let mut archive = tar::Archive::new(decoder);
    let mut files = Vec::new();
    let entries = archive
        .entries()
        .map_err(|e| CorpusFault::Download(format!("bad archive: {e}")))?;
    for entry in entries {
        let mut entry = entry.map_err(|e| CorpusFault::Download(format!("bad archive: {e}")))?;
        let path = entry
            .path()
            .map_err(|e| CorpusFault::Download(format!("bad archive: {e}")))?
            .to_string_lossy()
            .into_owned();
        if entry.header().entry_type().is_file() && is_raw_election_file(&path) {
            let mut bytes = Vec::new();
            entry
                .read_to_end(&mut bytes)
                .map_err(|e| CorpusFault::Download(format!("bad archive: {e}")))?;
            files.push((path, bytes));
        }
    }
    files.sort();
    Ok(files)
}

fn is_raw_election_file(name: &str) -> bool {
    name.ends_with(".blt") || name.ends_with(".csv")
}

/// The published archive lists each election under several directories
/// (original ballot files plus CSV copies grouped by candidate and seat
/// counts); keep one file per stem, preferring the `.blt` original.
fn dedupe_by_id(files: Vec<(String, Vec<u8>)>) -> Vec<(String, Vec<u8>)> {
    let mut chosen: BTreeMap<String, (String, Vec<u8>)> = BTreeMap::new();
    for (name, bytes) in files {
        let id = election_id(&name);
        match chosen.get(&id) {
            Some((existing, _)) if existing.ends_with(".blt") => {}
            Some(_) if !name.ends_with(".blt") => {}
            _ => {
                chosen.insert(id, (name, bytes));
            }
        }
    }
    chosen.into_values().collect()
}

fn convert_raw(name: &str, bytes: &[u8]) -> Result<Election, String> {
    let text = std::str::from_utf8(bytes).map_err(|e| format!("not UTF-8: {e}"))?;
    if name.ends_with(".blt") {
        return parse_blt(text)
            .or_else(|_| parse_blt_dialect(text))
            .map_err(|e| e.to_string());
    }
    csv_to_election(text).map_err(|e| e.to_string())
}

fn election_id(name: &str) -> String {
    let base = name.rsplit('/').next().unwrap_or(name);
    let stem = base
        .strip_suffix(".blt")
        .or_else(|| base.strip_suffix(".csv"))
        .unwrap_or(base);
    stem.replace([' ', '\t'], "_")
}

fn read_manifest(dir: &Path) -> Option<CorpusIndex> {
    let text = fs::read_to_string(dir.join("manifest.json")).ok()?;
    serde_json::from_str(&text).ok()
}

fn write_manifest(dir: &Path, index: &CorpusIndex) -> Result<(), CorpusFault> {
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(index).expect("manifest serialises");
    fs::write(&path, text).map_err(|e| io_fault(&path, e))
}

fn io_fault(path: &Path, source: std::io::Error) -> CorpusFault {
    CorpusFault::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
