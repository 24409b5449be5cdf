use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use cgso::cgnn::Split;
use cgso::graph::{largest_component, parse_edge_list, Graph};
use cgso::linalg::DenseMatrix;
use cgso::partition::Partition;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Bad arguments or unreadable inputs; mapped to exit code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

/// A graph ready for computation, with the file id of every working node.
pub struct LoadedGraph {
    pub graph: Graph,
    pub ids: Vec<u64>,
    pub total_nodes: usize,
    pub self_loops_dropped: usize,
}

impl LoadedGraph {
    pub fn nodes_dropped(&self) -> usize {
        self.total_nodes - self.graph.node_count()
    }

    /// Working index of each file id.
    pub fn index(&self) -> HashMap<u64, usize> {
        self.ids.iter().enumerate().map(|(i, &id)| (id, i)).collect()
    }
}

/// Parse an edge list and, unless `whole` is set, keep only its largest
/// connected component.
pub fn load_graph(path: &Path, whole: bool) -> Result<LoadedGraph> {
    let text = read_text(path)?;
    let parsed = parse_edge_list(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let total_nodes = parsed.graph.node_count();
    if whole {
        return Ok(LoadedGraph {
            graph: parsed.graph,
            ids: parsed.original_ids,
            total_nodes,
            self_loops_dropped: parsed.self_loops_dropped,
        });
    }
    let sub = largest_component(&parsed.graph).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let ids = sub.new_to_old.iter().map(|&old| parsed.original_ids[old]).collect();
    Ok(LoadedGraph {
        graph: sub.graph,
        ids,
        total_nodes,
        self_loops_dropped: parsed.self_loops_dropped,
    })
}

fn csv_records(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| usage(format!("{}: {e}", path.display())))?;
        // a first row whose node column is not an id is a header
        if k == 0 && rec.get(0).is_some_and(|s| s.parse::<u64>().is_err()) {
            continue;
        }
        out.push(rec);
    }
    Ok(out)
}

/// `node,value` rows mapped onto working nodes; nodes outside the working
/// graph are ignored, missing nodes are an error.
fn keyed_column(path: &Path, g: &LoadedGraph) -> Result<Vec<String>> {
    let index = g.index();
    let mut out: Vec<Option<String>> = vec![None; g.graph.node_count()];
    for rec in csv_records(path)? {
        if rec.len() < 2 {
            return Err(usage(format!("{}: expected 'node,value' rows", path.display())));
        }
        let id: u64 = rec[0]
            .parse()
            .map_err(|_| usage(format!("{}: invalid node id '{}'", path.display(), &rec[0])))?;
        if let Some(&i) = index.get(&id) {
            out[i] = Some(rec[1].to_string());
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| usage(format!("{}: no entry for node {}", path.display(), g.ids[i]))))
        .collect()
}

/// Ground-truth labels (any strings) as a partition of the working nodes.
pub fn read_labels(path: &Path, g: &LoadedGraph) -> Result<Partition> {
    let raw = keyed_column(path, g)?;
    Ok(Partition::from_raw(&raw.iter().map(String::as_str).collect::<Vec<_>>()))
}

pub fn read_split(path: &Path, g: &LoadedGraph) -> Result<Split> {
    let raw = keyed_column(path, g)?;
    let n = raw.len();
    let (mut train, mut val, mut test) = (vec![false; n], vec![false; n], vec![false; n]);
    for (i, s) in raw.iter().enumerate() {
        match s.as_str() {
            "train" => train[i] = true,
            "val" => val[i] = true,
            "test" => test[i] = true,
            "" | "none" => {}
            other => {
                return Err(usage(format!(
                    "{}: split '{other}' for node {} (expected train, val or test)",
                    path.display(),
                    g.ids[i]
                )))
            }
        }
    }
    Split::new(train, val, test).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// `node,x1,...,xd` rows.
pub fn read_features(path: &Path, g: &LoadedGraph) -> Result<DenseMatrix> {
    let index = g.index();
    let n = g.graph.node_count();
    let mut rows: Vec<Option<Vec<f64>>> = vec![None; n];
    let mut width = None;
    for rec in csv_records(path)? {
        let id: u64 = rec[0]
            .parse()
            .map_err(|_| usage(format!("{}: invalid node id '{}'", path.display(), &rec[0])))?;
        let values = rec
            .iter()
            .skip(1)
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| usage(format!("{}: node {id}: {e}", path.display())))?;
        if *width.get_or_insert(values.len()) != values.len() || values.is_empty() {
            return Err(usage(format!("{}: ragged feature rows at node {id}", path.display())));
        }
        if let Some(&i) = index.get(&id) {
            rows[i] = Some(values);
        }
    }
    let d = width.unwrap_or(0);
    let mut data = Vec::with_capacity(n * d);
    for (i, row) in rows.into_iter().enumerate() {
        let row = row.ok_or_else(|| usage(format!("{}: no features for node {}", path.display(), g.ids[i])))?;
        data.extend(row);
    }
    DenseMatrix::from_vec(n, d, data).map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to rerun a command.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub version: &'static str,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<InputHash>,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

/// Write via a temporary sibling and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    fs::write(&tmp, bytes).with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("cannot move {} into place", tmp.display()))?;
    Ok(())
}

pub fn write_outputs(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut written = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let path = dir.join(name);
        write_atomic(&path, bytes)?;
        written.push(path);
    }
    Ok(written)
}
