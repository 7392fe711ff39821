//! Dataset file formats and ingestion.
//!
//! Formats:
//! - edge list: UTF-8 text, one edge per line as two whitespace-separated
//!   node IDs; lines starting with `#` are comments.
//! - opinions: CSV with header `node,opinion`.
//! - susceptibility: CSV with header `node,lambda`.
//! - influence: CSV with header `src,dst,sign`, one row per undirected
//!   edge, sign in {-1, 1}; edges without a row default to +1.
//!
//! Node IDs in files are arbitrary strings. Ingestion builds an ID-to-index
//! map and preserves the original IDs in every output. When an opinions
//! file is loaded, its row order is the index authority (so writing a
//! generated instance and re-ingesting it reproduces the in-memory objects
//! exactly); otherwise indices follow first appearance in the edge list.
//! Floating-point output is printed with 17 significant digits, which
//! round-trips f64 exactly and makes outputs byte-comparable.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::graph::{
    validate_influence, Graph, GraphError, InfluenceMatrix, InfluenceViolation, OpinionVector,
    SusceptibilityProfile,
};

/// Format a float with 17 significant digits (exact f64 round-trip).
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Bidirectional node-ID map: external string IDs to dense indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdMap {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl IdMap {
    pub fn new() -> IdMap {
        IdMap { ids: Vec::new(), index: HashMap::new() }
    }

    /// IDs "0".."n-1", the layout used for generated instances.
    pub fn numeric(n: usize) -> IdMap {
        let mut map = IdMap::new();
        for i in 0..n {
            map.intern(&i.to_string());
        }
        map
    }

    /// Index of `id`, interning it if unseen.
    pub fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        i
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

impl Default for IdMap {
    fn default() -> Self {
        IdMap::new()
    }
}

#[derive(Debug)]
pub enum IoError {
    Io { path: PathBuf, source: std::io::Error },
    Csv { path: PathBuf, source: csv::Error },
    Parse { path: PathBuf, line: usize, msg: String },
    Domain(GraphError),
    UnknownNode { path: PathBuf, id: String },
    DuplicateEntry { path: PathBuf, id: String },
    MissingEntry { what: &'static str, id: String },
    InvalidInfluence { violations: Vec<InfluenceViolation> },
}

impl fmt::Display for IoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IoError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            IoError::Csv { path, source } => write!(f, "{}: {source}", path.display()),
            IoError::Parse { path, line, msg } => {
                write!(f, "{}:{line}: {msg}", path.display())
            }
            IoError::Domain(e) => write!(f, "{e}"),
            IoError::UnknownNode { path, id } => {
                write!(f, "{}: node '{id}' not declared by the opinions file", path.display())
            }
            IoError::DuplicateEntry { path, id } => {
                write!(f, "{}: duplicate entry for '{id}'", path.display())
            }
            IoError::MissingEntry { what, id } => {
                write!(f, "missing {what} entry for node '{id}'")
            }
            IoError::InvalidInfluence { violations } => {
                write!(f, "influence file invalid for graph:")?;
                for v in violations.iter().take(5) {
                    write!(f, " [{v}]")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for IoError {}

impl From<GraphError> for IoError {
    fn from(e: GraphError) -> Self {
        IoError::Domain(e)
    }
}

fn open(path: &Path) -> Result<BufReader<File>, IoError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

fn create(path: &Path) -> Result<BufWriter<File>, IoError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.to_path_buf(), source }
}

/// Read raw edge rows as string-ID pairs.
pub fn read_edge_list(path: &Path) -> Result<Vec<(String, String)>, IoError> {
    let reader = open(path)?;
    let mut pairs = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (a, b) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(IoError::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    msg: "expected exactly two whitespace-separated node IDs".into(),
                })
            }
        };
        pairs.push((a.to_string(), b.to_string()));
    }
    Ok(pairs)
}

pub fn write_edge_list(path: &Path, g: &Graph, ids: &IdMap) -> Result<(), IoError> {
    let mut out = create(path)?;
    writeln!(out, "# source target").map_err(io_err(path))?;
    for &(i, j) in g.edges() {
        writeln!(out, "{} {}", ids.id(i), ids.id(j)).map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

fn read_csv_rows(
    path: &Path,
    expected_headers: &[&str],
) -> Result<Vec<Vec<String>>, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|source| IoError::Csv { path: path.to_path_buf(), source })?;
    let headers = reader
        .headers()
        .map_err(|source| IoError::Csv { path: path.to_path_buf(), source })?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected_headers {
        return Err(IoError::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("expected header {expected_headers:?}, found {got:?}"),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|source| IoError::Csv { path: path.to_path_buf(), source })?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(rows)
}

fn parse_f64(path: &Path, line: usize, field: &str) -> Result<f64, IoError> {
    field.trim().parse::<f64>().map_err(|_| IoError::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("invalid number '{field}'"),
    })
}

/// Read `(node, value)` rows from a `node,opinion` CSV.
pub fn read_opinions(path: &Path) -> Result<Vec<(String, f64)>, IoError> {
    let rows = read_csv_rows(path, &["node", "opinion"])?;
    rows.into_iter()
        .enumerate()
        .map(|(i, row)| Ok((row[0].clone(), parse_f64(path, i + 2, &row[1])?)))
        .collect()
}

pub fn write_opinions(path: &Path, values: &[f64], ids: &IdMap) -> Result<(), IoError> {
    write_value_csv(path, &["node", "opinion"], values, ids)
}

/// Read `(node, lambda)` rows from a `node,lambda` CSV.
pub fn read_susceptibility(path: &Path) -> Result<Vec<(String, f64)>, IoError> {
    let rows = read_csv_rows(path, &["node", "lambda"])?;
    rows.into_iter()
        .enumerate()
        .map(|(i, row)| Ok((row[0].clone(), parse_f64(path, i + 2, &row[1])?)))
        .collect()
}

pub fn write_susceptibility(
    path: &Path,
    values: &[f64],
    ids: &IdMap,
) -> Result<(), IoError> {
    write_value_csv(path, &["node", "lambda"], values, ids)
}

fn write_value_csv(
    path: &Path,
    headers: &[&str],
    values: &[f64],
    ids: &IdMap,
) -> Result<(), IoError> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|source| IoError::Csv { path: path.to_path_buf(), source })?;
    let wrap = |source| IoError::Csv { path: path.to_path_buf(), source };
    writer.write_record(headers).map_err(wrap)?;
    for (i, &v) in values.iter().enumerate() {
        writer
            .write_record([ids.id(i), &format_float(v)])
            .map_err(wrap)?;
    }
    writer.flush().map_err(io_err(path))
}

/// Read `(src, dst, sign)` rows from a `src,dst,sign` CSV.
pub fn read_influence(path: &Path) -> Result<Vec<(String, String, i8)>, IoError> {
    let rows = read_csv_rows(path, &["src", "dst", "sign"])?;
    rows.into_iter()
        .enumerate()
        .map(|(i, row)| {
            let sign: i8 = row[2].trim().parse().map_err(|_| IoError::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                msg: format!("invalid sign '{}'", row[2]),
            })?;
            if sign != 1 && sign != -1 {
                return Err(IoError::Parse {
                    path: path.to_path_buf(),
                    line: i + 2,
                    msg: format!("sign must be -1 or 1, got {sign}"),
                });
            }
            Ok((row[0].clone(), row[1].clone(), sign))
        })
        .collect()
}

pub fn write_influence(
    path: &Path,
    g: &Graph,
    w: &InfluenceMatrix,
    ids: &IdMap,
) -> Result<(), IoError> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|source| IoError::Csv { path: path.to_path_buf(), source })?;
    let wrap = |source| IoError::Csv { path: path.to_path_buf(), source };
    writer.write_record(["src", "dst", "sign"]).map_err(wrap)?;
    for &(i, j) in g.edges() {
        writer
            .write_record([ids.id(i), ids.id(j), &w.get(i, j).to_string()])
            .map_err(wrap)?;
    }
    writer.flush().map_err(io_err(path))
}

/// A fully ingested dataset with its ID map.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub ids: IdMap,
    pub graph: Graph,
    pub opinions: OpinionVector,
    pub susceptibility: Option<SusceptibilityProfile>,
    pub influence: Option<InfluenceMatrix>,
}

/// Load a dataset from an edge list plus an opinions file, with optional
/// susceptibility and influence files.
///
/// The opinions file defines the node universe and index order; it must
/// cover every endpoint in the edge list (opinion-only rows become isolated
/// nodes). A susceptibility file must cover every node. An influence file
/// may omit edges, which default to +1; entries off the edge set, repeated
/// pairs, or asymmetric signs are rejected.
pub fn load_dataset(
    edges_path: &Path,
    opinions_path: &Path,
    susceptibility_path: Option<&Path>,
    influence_path: Option<&Path>,
) -> Result<Dataset, IoError> {
    let opinion_rows = read_opinions(opinions_path)?;
    let mut ids = IdMap::new();
    let mut opinion_values = Vec::with_capacity(opinion_rows.len());
    for (id, value) in &opinion_rows {
        if ids.index_of(id).is_some() {
            return Err(IoError::DuplicateEntry {
                path: opinions_path.to_path_buf(),
                id: id.clone(),
            });
        }
        ids.intern(id);
        opinion_values.push(*value);
    }
    let opinions = OpinionVector::new(opinion_values)?;

    let resolve = |path: &Path, id: &str| -> Result<usize, IoError> {
        ids.index_of(id).ok_or_else(|| IoError::UnknownNode {
            path: path.to_path_buf(),
            id: id.to_string(),
        })
    };

    let edge_rows = read_edge_list(edges_path)?;
    let mut edges = Vec::with_capacity(edge_rows.len());
    for (a, b) in &edge_rows {
        edges.push((resolve(edges_path, a)?, resolve(edges_path, b)?));
    }
    let graph = Graph::build(ids.len(), &edges)?;

    let susceptibility = match susceptibility_path {
        None => None,
        Some(path) => {
            let rows = read_susceptibility(path)?;
            let mut values = vec![None; ids.len()];
            for (id, value) in &rows {
                let i = resolve(path, id)?;
                if values[i].is_some() {
                    return Err(IoError::DuplicateEntry {
                        path: path.to_path_buf(),
                        id: id.clone(),
                    });
                }
                values[i] = Some(*value);
            }
            let complete: Vec<f64> = values
                .into_iter()
                .enumerate()
                .map(|(i, v)| {
                    v.ok_or_else(|| IoError::MissingEntry {
                        what: "susceptibility",
                        id: ids.id(i).to_string(),
                    })
                })
                .collect::<Result<_, _>>()?;
            Some(SusceptibilityProfile::new(complete)?)
        }
    };

    let influence = match influence_path {
        None => None,
        Some(path) => {
            let rows = read_influence(path)?;
            let mut w = InfluenceMatrix::new(ids.len());
            for (src, dst, sign) in &rows {
                let i = resolve(path, src)?;
                let j = resolve(path, dst)?;
                if w.get(i, j) != 0 {
                    return Err(IoError::DuplicateEntry {
                        path: path.to_path_buf(),
                        id: format!("{src},{dst}"),
                    });
                }
                w.set(i, j, *sign)?;
            }
            // Edges without a row default to +1.
            for &(i, j) in graph.edges() {
                if w.get(i, j) == 0 {
                    w.set(i, j, 1)?;
                }
            }
            let violations = validate_influence(&graph, &w);
            if !violations.is_empty() {
                return Err(IoError::InvalidInfluence { violations });
            }
            Some(w)
        }
    };

    Ok(Dataset { ids, graph, opinions, susceptibility, influence })
}
