//! Sattestation headers and trust-store files.
//!
//! Headers are JSON in the layout below. `labels` is always an array, even
//! for a single label.
//!
//! ```text
//! { "sattestation": {
//!     "sattestation_version": 1,
//!     "sattestor_domain": "gsa.gov",
//!     "sattestor_onion": "onion1",
//!     "sattestor_refresh_rate": "7 days",
//!     "sattestees": [ { "domain": "justice.gov", "onion": "onion2",
//!                       "labels": ["USG:DOJ", "sattestor*(USG:DOJ)"],
//!                       "issued": "2023-12-08", "refreshed_on": "2024-01-25" } ] },
//!   "signature": "sig-gsa-1" }
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::engine::{SchemaInstance, SchemaParseError, StoreError, TrustStore};
use crate::labels::{GenLabel, LabelError};
use crate::lang::{BdLPair, Form, Principal, SataId};

pub const SUPPORTED_VERSION: u64 = 1;

/// Name of the signature table looked up next to the headers.
pub const SIGNATURE_TABLE: &str = "signatures.txt";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sattestee {
    pub domain: String,
    pub onion: String,
    pub labels: Vec<GenLabel>,
    pub issued: String,
    pub refreshed_on: String,
}

impl Sattestee {
    pub fn id(&self) -> SataId {
        SataId::new(&self.domain, &self.onion)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sattestation {
    pub sattestation_version: u64,
    pub sattestor_domain: String,
    pub sattestor_onion: String,
    pub sattestor_refresh_rate: String,
    pub sattestees: Vec<Sattestee>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SattestationHeader {
    pub sattestation: Sattestation,
    pub signature: String,
}

impl SattestationHeader {
    pub fn sattestor(&self) -> SataId {
        SataId::new(&self.sattestation.sattestor_domain, &self.sattestation.sattestor_onion)
    }

    /// The signed part of the header, in canonical form.
    pub fn payload(&self) -> Vec<u8> {
        serde_json::to_vec(&self.sattestation).expect("header serializes")
    }

    /// Canonical pretty-printed form, newline terminated.
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("header serializes");
        s.push('\n');
        s
    }

    pub fn statement_count(&self) -> usize {
        self.sattestation.sattestees.iter().map(|s| s.labels.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("unsupported sattestation version {0}")]
    UnsupportedVersion(u64),
    #[error("bad label at {position}: {source}")]
    BadLabel {
        position: String,
        #[source]
        source: LabelError,
    },
    #[error("missing or empty field `{0}`")]
    MissingField(String),
    #[error("signature rejected for sattestor {0}")]
    SignatureRejected(SataId),
}

fn field<'a>(obj: &'a Value, path: &str, name: &str) -> Result<&'a Value, IngestError> {
    obj.get(name)
        .ok_or_else(|| IngestError::MissingField(format!("{path}{name}")))
}

fn text(obj: &Value, path: &str, name: &str) -> Result<String, IngestError> {
    match field(obj, path, name)? {
        Value::String(s) if !s.is_empty() => Ok(s.clone()),
        Value::String(_) => Err(IngestError::MissingField(format!("{path}{name}"))),
        other => Err(IngestError::MalformedJson(format!(
            "`{path}{name}` must be a string, found {other}"
        ))),
    }
}

fn array<'a>(obj: &'a Value, path: &str, name: &str) -> Result<&'a [Value], IngestError> {
    match field(obj, path, name)? {
        Value::Array(items) if !items.is_empty() => Ok(items),
        Value::Array(_) => Err(IngestError::MissingField(format!("{path}{name}"))),
        other => Err(IngestError::MalformedJson(format!(
            "`{path}{name}` must be an array, found {other}"
        ))),
    }
}

pub fn parse_header(bytes: &[u8]) -> Result<SattestationHeader, IngestError> {
    let root: Value =
        serde_json::from_slice(bytes).map_err(|e| IngestError::MalformedJson(e.to_string()))?;
    if !root.is_object() {
        return Err(IngestError::MalformedJson("top level must be an object".into()));
    }
    let body = field(&root, "", "sattestation")?;
    let p = "sattestation.";
    let version = field(body, p, "sattestation_version")?
        .as_u64()
        .ok_or_else(|| IngestError::MalformedJson("version must be an integer".into()))?;
    if version != SUPPORTED_VERSION {
        return Err(IngestError::UnsupportedVersion(version));
    }

    let mut sattestees = Vec::new();
    for (i, entry) in array(body, p, "sattestees")?.iter().enumerate() {
        let ep = format!("{p}sattestees[{i}].");
        let mut labels = Vec::new();
        for (j, l) in array(entry, &ep, "labels")?.iter().enumerate() {
            let position = format!("{ep}labels[{j}]");
            let s = l.as_str().ok_or_else(|| {
                IngestError::MalformedJson(format!("`{position}` must be a string"))
            })?;
            let g = GenLabel::parse(s).map_err(|source| IngestError::BadLabel { position, source })?;
            labels.push(g);
        }
        sattestees.push(Sattestee {
            domain: text(entry, &ep, "domain")?,
            onion: text(entry, &ep, "onion")?,
            labels,
            issued: text(entry, &ep, "issued")?,
            refreshed_on: text(entry, &ep, "refreshed_on")?,
        });
    }

    Ok(SattestationHeader {
        sattestation: Sattestation {
            sattestation_version: version,
            sattestor_domain: text(body, p, "sattestor_domain")?,
            sattestor_onion: text(body, p, "sattestor_onion")?,
            sattestor_refresh_rate: text(body, p, "sattestor_refresh_rate")?,
            sattestees,
        },
        signature: text(&root, "", "signature")?,
    })
}

/// Decides whether a header's signature is acceptable. Implementations must
/// not have side effects.
pub trait SignatureVerifier {
    fn verify(&self, payload: &[u8], signature: &str, sattestor: &SataId) -> bool;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AcceptAll;

impl SignatureVerifier for AcceptAll {
    fn verify(&self, _: &[u8], _: &str, _: &SataId) -> bool {
        true
    }
}

/// Accepts exactly the (sattestor, signature) pairs listed in a table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FixtureTable {
    entries: BTreeMap<SataId, BTreeSet<String>>,
}

impl FixtureTable {
    pub fn insert(&mut self, sattestor: SataId, signature: impl Into<String>) {
        self.entries.entry(sattestor).or_default().insert(signature.into());
    }

    /// One `domain onion signature` triple per line; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<FixtureTable, (usize, String)> {
        let mut table = FixtureTable::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [domain, onion, sig] = parts[..] else {
                return Err((n + 1, format!("expected `domain onion signature`, found `{line}`")));
            };
            table.insert(SataId::new(domain, onion), sig);
        }
        Ok(table)
    }
}

impl SignatureVerifier for FixtureTable {
    fn verify(&self, _: &[u8], signature: &str, sattestor: &SataId) -> bool {
        self.entries
            .get(sattestor)
            .is_some_and(|sigs| sigs.contains(signature))
    }
}

/// One says-statement per (sattestee, label), in header order.
pub fn header_to_statements(
    header: &SattestationHeader,
    verifier: &dyn SignatureVerifier,
) -> Result<Vec<Form>, IngestError> {
    let sattestor = header.sattestor();
    if !verifier.verify(&header.payload(), &header.signature, &sattestor) {
        return Err(IngestError::SignatureRejected(sattestor));
    }
    let mut out = Vec::with_capacity(header.statement_count());
    for s in &header.sattestation.sattestees {
        for g in &s.labels {
            out.push(Form::says(sattestor.clone(), BdLPair::new(s.id(), g.clone())));
        }
    }
    Ok(out)
}

#[derive(Debug, Error)]
pub enum LoadErrorKind {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Statement(#[from] StoreError),
    #[error(transparent)]
    Schema(#[from] SchemaParseError),
    #[error(transparent)]
    Header(#[from] IngestError),
    #[error("{0}")]
    Table(String),
}

#[derive(Debug, Error)]
#[error("{}{}: {kind}", file.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
pub struct LoadError {
    pub file: PathBuf,
    pub line: Option<usize>,
    pub kind: LoadErrorKind,
}

impl LoadError {
    fn new(file: &Path, line: Option<usize>, kind: impl Into<LoadErrorKind>) -> Self {
        LoadError {
            file: file.to_path_buf(),
            line,
            kind: kind.into(),
        }
    }

    pub fn is_signature_rejection(&self) -> bool {
        matches!(self.kind, LoadErrorKind::Header(IngestError::SignatureRejected(_)))
    }
}

fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|e| LoadError::new(path, None, e))
}

/// Non-blank, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Sorted `*.json` files of a header directory.
pub fn header_files(dir: &Path) -> Result<Vec<PathBuf>, LoadError> {
    let entries = fs::read_dir(dir).map_err(|e| LoadError::new(dir, None, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| LoadError::new(dir, None, e))?.path();
        if path.extension().is_some_and(|x| x == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn load_signature_table(path: &Path) -> Result<FixtureTable, LoadError> {
    FixtureTable::parse(&read(path)?)
        .map_err(|(line, msg)| LoadError::new(path, Some(line), LoadErrorKind::Table(msg)))
}

/// Builds a store from an itrust file, an las file and a directory of headers.
/// Any of them may be absent. The principal is taken from the first itrust
/// statement and defaults to `P`.
pub fn load_store(
    itrust: Option<&Path>,
    las: Option<&Path>,
    headers: Option<&Path>,
    verifier: &dyn SignatureVerifier,
) -> Result<TrustStore, LoadError> {
    let mut trusts = Vec::new();
    if let Some(path) = itrust {
        for (n, line) in content_lines(&read(path)?) {
            let f = Form::parse(line).map_err(|e| LoadError::new(path, Some(n), StoreError::from(e)))?;
            trusts.push((n, f));
        }
    }
    let principal = match trusts.first() {
        Some((_, Form::Trusts { who, .. })) => who.clone(),
        _ => Principal::client("P"),
    };
    let mut store = TrustStore::new(principal);
    let path = itrust.unwrap_or(Path::new(""));
    for (n, f) in trusts {
        store.add_itrust(f).map_err(|e| LoadError::new(path, Some(n), e))?;
    }

    if let Some(path) = las {
        for (n, line) in content_lines(&read(path)?) {
            let s: SchemaInstance = line.parse().map_err(|e| LoadError::new(path, Some(n), e))?;
            store.add_las(s);
        }
    }

    if let Some(dir) = headers {
        for file in header_files(dir)? {
            let bytes = fs::read(&file).map_err(|e| LoadError::new(&file, None, e))?;
            let header = parse_header(&bytes).map_err(|e| LoadError::new(&file, None, e))?;
            for f in header_to_statements(&header, verifier).map_err(|e| LoadError::new(&file, None, e))? {
                store.add_says(f).map_err(|e| LoadError::new(&file, None, e))?;
            }
        }
    }
    Ok(store)
}
