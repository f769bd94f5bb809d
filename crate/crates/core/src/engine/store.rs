use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::labels::GenLabel;
use crate::lang::{Form, ParseError, Principal, SataId};

/// An instance of one of the local axiom schemata.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchemaInstance {
    /// `P trusts ⟨D,O,from⟩ → P trusts ⟨D,O,to⟩` for every identity.
    LasDel { from: GenLabel, to: GenLabel },
    /// `P trusts ⟨D,O,sattestor(ℓ)⟩` for every label.
    LasSatt(SataId),
    /// `P trusts ⟨D,O,sattestor*(ℓ)⟩` for every label.
    LasSattDel(SataId),
}

impl SchemaInstance {
    pub fn labels(&self) -> Vec<&GenLabel> {
        match self {
            SchemaInstance::LasDel { from, to } => vec![from, to],
            _ => Vec::new(),
        }
    }

    pub fn name(&self) -> Option<&SataId> {
        match self {
            SchemaInstance::LasSatt(id) | SchemaInstance::LasSattDel(id) => Some(id),
            SchemaInstance::LasDel { .. } => None,
        }
    }
}

impl fmt::Display for SchemaInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemaInstance::LasDel { from, to } => write!(f, "LAS-Del({from}, {to})"),
            SchemaInstance::LasSatt(id) => write!(f, "LAS-Satt({}, {})", id.domain, id.onion),
            SchemaInstance::LasSattDel(id) => {
                write!(f, "LAS-SattDel({}, {})", id.domain, id.onion)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaParseError {
    #[error("unknown local axiom schema `{0}`")]
    UnknownSchema(String),
    #[error("expected two comma-separated arguments in `{0}`")]
    Arity(String),
    #[error("bad label in `{text}`: {source}")]
    Label {
        text: String,
        #[source]
        source: crate::labels::LabelError,
    },
}

/// Splits `a, b` at the first top-level comma.
fn split_args(args: &str) -> Option<(&str, &str)> {
    let mut depth = 0usize;
    for (i, c) in args.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                let (a, b) = (args[..i].trim(), args[i + 1..].trim());
                if a.is_empty() || b.is_empty() || split_args(b).is_some() {
                    return None;
                }
                return Some((a, b));
            }
            _ => {}
        }
    }
    None
}

impl FromStr for SchemaInstance {
    type Err = SchemaParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let text = text.trim();
        let unknown = || SchemaParseError::UnknownSchema(text.to_string());
        let (head, rest) = text.split_once('(').ok_or_else(unknown)?;
        let args = rest.strip_suffix(')').ok_or_else(unknown)?;
        let (a, b) = split_args(args).ok_or_else(|| SchemaParseError::Arity(text.to_string()))?;
        let label = |s: &str| {
            GenLabel::parse(s).map_err(|source| SchemaParseError::Label {
                text: text.to_string(),
                source,
            })
        };
        match head.trim() {
            "LAS-Del" => Ok(SchemaInstance::LasDel {
                from: label(a)?,
                to: label(b)?,
            }),
            "LAS-Satt" => Ok(SchemaInstance::LasSatt(SataId::new(a, b))),
            "LAS-SattDel" => Ok(SchemaInstance::LasSattDel(SataId::new(a, b))),
            _ => Err(unknown()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("`{0}` is not a trust statement")]
    NotTrust(String),
    #[error("`{statement}` belongs to {found}, not to the store's principal {expected}")]
    WrongPrincipal {
        statement: String,
        expected: String,
        found: String,
    },
    #[error("`{0}` is not a says-statement")]
    NotSays(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// A principal's initial trust, local schema instances and the observed says-statements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrustStore {
    principal: Principal,
    itrust: BTreeSet<Form>,
    las: BTreeSet<SchemaInstance>,
    ts: BTreeSet<Form>,
}

impl TrustStore {
    pub fn new(principal: Principal) -> Self {
        TrustStore {
            principal,
            itrust: BTreeSet::new(),
            las: BTreeSet::new(),
            ts: BTreeSet::new(),
        }
    }

    pub fn principal(&self) -> &Principal {
        &self.principal
    }

    pub fn itrust(&self) -> &BTreeSet<Form> {
        &self.itrust
    }

    pub fn las(&self) -> &BTreeSet<SchemaInstance> {
        &self.las
    }

    pub fn ts(&self) -> &BTreeSet<Form> {
        &self.ts
    }

    pub fn is_empty(&self) -> bool {
        self.itrust.is_empty() && self.las.is_empty() && self.ts.is_empty()
    }

    pub fn add_itrust(&mut self, form: Form) -> Result<(), StoreError> {
        match &form {
            Form::Trusts { who, .. } if *who == self.principal => {
                self.itrust.insert(form);
                Ok(())
            }
            Form::Trusts { who, .. } => Err(StoreError::WrongPrincipal {
                statement: form.to_string(),
                expected: self.principal.to_string(),
                found: who.to_string(),
            }),
            _ => Err(StoreError::NotTrust(form.to_string())),
        }
    }

    pub fn add_las(&mut self, schema: SchemaInstance) {
        self.las.insert(schema);
    }

    pub fn add_says(&mut self, form: Form) -> Result<(), StoreError> {
        if !matches!(form, Form::Says { .. }) {
            return Err(StoreError::NotSays(form.to_string()));
        }
        self.ts.insert(form);
        Ok(())
    }

    /// `itrust ∪ ts`, the statements saturation starts from.
    pub fn assumptions(&self) -> impl Iterator<Item = &Form> {
        self.itrust.iter().chain(self.ts.iter())
    }

    /// Convenience: parse each line of text and add it to `itrust`.
    pub fn with_itrust(mut self, lines: &[&str]) -> Result<Self, StoreError> {
        for line in lines {
            self.add_itrust(Form::parse(line)?)?;
        }
        Ok(self)
    }

    pub fn with_says(mut self, lines: &[&str]) -> Result<Self, StoreError> {
        for line in lines {
            self.add_says(Form::parse(line)?)?;
        }
        Ok(self)
    }
}
