//! JSON poset documents and Graphviz export.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::poset::Poset;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetDocument {
    #[serde(default)]
    pub name: String,
    pub elements: Vec<String>,
    pub covers: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, thiserror::Error)]
pub enum DocumentError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Poset(#[from] Error),
}

impl PosetDocument {
    /// Document for `p` with covers in position order.
    pub fn from_poset(name: &str, p: &Poset) -> PosetDocument {
        PosetDocument {
            name: name.to_string(),
            elements: p.labels().to_vec(),
            covers: p.cover_labels(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn to_poset(&self) -> Result<Poset, Error> {
        Poset::new(&self.elements, &self.covers)
    }

    /// Same document with covers recomputed as the transitive reduction.
    pub fn canonicalized(&self) -> Result<PosetDocument, Error> {
        let p = self.to_poset()?;
        Ok(PosetDocument {
            covers: p.cover_labels(),
            ..self.clone()
        })
    }

    pub fn with_metadata(mut self, key: &str, value: serde_json::Value) -> PosetDocument {
        self.metadata.insert(key.to_string(), value);
        self
    }
}

/// Parses a document and checks it describes a poset.
pub fn parse_poset(text: &str) -> Result<PosetDocument, DocumentError> {
    let doc: PosetDocument = serde_json::from_str(text).map_err(|e| DocumentError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    doc.to_poset()?;
    Ok(doc)
}

/// Parses every non-blank line as one document.
pub fn parse_poset_lines(text: &str) -> Result<Vec<PosetDocument>, DocumentError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') && serde_json::from_str::<serde_json::Value>(text).is_ok() {
        return Ok(vec![parse_poset(text)?]);
    }
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            parse_poset(l).map_err(|e| match e {
                DocumentError::Syntax { column, message, .. } => DocumentError::Syntax {
                    line: i + 1,
                    column,
                    message,
                },
                other => other,
            })
        })
        .collect()
}

pub fn emit_poset(doc: &PosetDocument) -> String {
    serde_json::to_string_pretty(doc).expect("documents serialize")
}

/// One-line form for streams of documents.
pub fn emit_poset_line(doc: &PosetDocument) -> String {
    serde_json::to_string(doc).expect("documents serialize")
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Hasse diagram as a Graphviz digraph, drawn bottom to top. Ranked posets get
/// one `rank=same` group per level.
pub fn emit_dot(p: &Poset, name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(if name.is_empty() { "poset" } else { name }));
    out.push_str("  rankdir=BT;\n");
    for l in p.labels() {
        let _ = writeln!(out, "  {};", quote(l));
    }
    for (a, b) in p.covers() {
        let _ = writeln!(out, "  {} -> {};", quote(p.label(a)), quote(p.label(b)));
    }
    if !p.is_empty() {
        if let Ok(profile) = p.rank_structure() {
            if profile.is_ranked {
                for level in &profile.levels {
                    let members: Vec<String> = level.iter().map(|&e| quote(p.label(e))).collect();
                    let _ = writeln!(out, "  {{ rank=same; {}; }}", members.join("; "));
                }
            }
        }
    }
    out.push_str("}\n");
    out
}
