use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::KgError;

pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const OASIS_NS: &str = "https://www.dmi.unict.it/santamaria/projects/oasis/oasis.owl#";
pub const EX_NS: &str = "http://example.org/";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// A fully expanded IRI.
///
/// Equality and ordering are on the expanded string, so two `Iri`s are equal
/// exactly when their codepoints are. Cloning is cheap.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Iri(Arc<str>);

impl Iri {
    pub fn new(value: impl AsRef<str>) -> Result<Self, KgError> {
        let value = value.as_ref();
        if !is_valid_iri(value) {
            return Err(KgError::InvalidIri(value.to_string()));
        }
        Ok(Iri(Arc::from(value)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The part after the last `#` or `/`.
    pub fn local_name(&self) -> &str {
        let s = self.as_str();
        match s.rfind(['#', '/']) {
            Some(i) if i + 1 < s.len() => &s[i + 1..],
            _ => s,
        }
    }

    pub fn is_oasis(&self) -> bool {
        self.0.starts_with(OASIS_NS)
    }
}

fn is_valid_iri(value: &str) -> bool {
    if value.is_empty() || value.chars().any(|c| c.is_whitespace() || matches!(c, '<' | '>' | '"')) {
        return false;
    }
    // scheme ":" rest
    match value.find(':') {
        Some(i) if i > 0 => {
            let scheme = &value[..i];
            scheme.starts_with(|c: char| c.is_ascii_alphabetic())
                && scheme.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
                && i + 1 < value.len()
        }
        _ => false,
    }
}

/// Local names accepted by [`PrefixTable::mint`]: letters, digits, `_`, `-`, `.`,
/// not starting or ending with `.`.
pub fn is_valid_local_name(local: &str) -> bool {
    !local.is_empty()
        && !local.starts_with('.')
        && !local.ends_with('.')
        && local.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl Serialize for Iri {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Iri {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Iri::new(s).map_err(serde::de::Error::custom)
    }
}

/// Prefix name to namespace IRI.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixTable {
    entries: BTreeMap<String, String>,
}

impl Default for PrefixTable {
    fn default() -> Self {
        let mut entries = BTreeMap::new();
        entries.insert("oasis".to_string(), OASIS_NS.to_string());
        entries.insert("rdf".to_string(), RDF_NS.to_string());
        entries.insert("ex".to_string(), EX_NS.to_string());
        PrefixTable { entries }
    }
}

impl PrefixTable {
    pub fn empty() -> Self {
        PrefixTable { entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, prefix: impl Into<String>, namespace: impl Into<String>) {
        self.entries.insert(prefix.into(), namespace.into());
    }

    pub fn get(&self, prefix: &str) -> Option<&str> {
        self.entries.get(prefix).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn mint(&self, prefix: &str, local: &str) -> Result<Iri, KgError> {
        let ns = self.get(prefix).ok_or_else(|| KgError::UnknownPrefix(prefix.to_string()))?;
        if !is_valid_local_name(local) {
            return Err(KgError::InvalidLocalName(local.to_string()));
        }
        Iri::new(format!("{ns}{local}"))
    }

    /// Resolves `<iri>`, an absolute IRI (`scheme://…` or `urn:…`) or a prefixed name.
    pub fn resolve(&self, text: &str) -> Result<Iri, KgError> {
        let text = text.trim();
        if let Some(inner) = text.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
            return Iri::new(inner);
        }
        if text.contains("://") || text.starts_with("urn:") {
            return Iri::new(text);
        }
        match text.split_once(':') {
            Some((prefix, local)) => {
                let ns = self.get(prefix).ok_or_else(|| KgError::UnknownPrefix(prefix.to_string()))?;
                Iri::new(format!("{ns}{local}"))
            }
            None => Err(KgError::InvalidIri(text.to_string())),
        }
    }
}
