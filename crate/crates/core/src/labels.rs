//! Hierarchical property labels.
//!
//! A [`Label`] is either the distinguished atom `bound` or a colon-separated
//! path of segments such as `USG:DOJ:FBI`. A label *broadens* every label it
//! is a proper path-prefix of; `bound` is incomparable to everything else.
//! [`GenLabel`] wraps a label once in the sattestor (`sattestor(λ)`) or
//! delegatable-sattestor (`sattestor*(λ)`) operator.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const BOUND: &str = "bound";
const SATT_PREFIX: &str = "sattestor(";
const SATTDEL_PREFIX: &str = "sattestor*(";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("empty label")]
    EmptyInput,
    #[error("empty segment at index {0}")]
    EmptySegment(usize),
    #[error("segment `{0}` appears more than once")]
    RepeatedSegment(String),
    #[error("`bound` cannot be a segment of a compound label")]
    BoundInCompound,
    #[error("unbalanced sattestor wrapper in `{0}`")]
    BadWrapper(String),
}

/// A canonical label: `bound`, or a non-empty path of distinct segments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Bound,
    Path(Vec<String>),
}

/// Result of comparing two labels under the narrowing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    Equal,
    /// The left label is strictly narrower (more specific).
    Narrows,
    /// The left label is strictly broader.
    Broadens,
    Incomparable,
}

impl Label {
    pub fn parse(text: &str) -> Result<Label, LabelError> {
        if text.is_empty() {
            return Err(LabelError::EmptyInput);
        }
        if text == BOUND {
            return Ok(Label::Bound);
        }
        let segments: Vec<&str> = text.split(':').collect();
        let mut seen = BTreeSet::new();
        for (i, seg) in segments.iter().enumerate() {
            if seg.is_empty() {
                return Err(LabelError::EmptySegment(i));
            }
            if *seg == BOUND {
                return Err(LabelError::BoundInCompound);
            }
            if !seen.insert(*seg) {
                return Err(LabelError::RepeatedSegment(seg.to_string()));
            }
        }
        Ok(Label::Path(segments.into_iter().map(String::from).collect()))
    }

    pub fn is_bound(&self) -> bool {
        matches!(self, Label::Bound)
    }

    /// Segments of a path label; empty for `bound`.
    pub fn segments(&self) -> &[String] {
        match self {
            Label::Bound => &[],
            Label::Path(s) => s,
        }
    }

    /// Number of elements in the upward closure.
    pub fn depth(&self) -> usize {
        match self {
            Label::Bound => 1,
            Label::Path(s) => s.len(),
        }
    }

    pub fn compare(&self, other: &Label) -> Ordering {
        match (self, other) {
            (Label::Bound, Label::Bound) => Ordering::Equal,
            (Label::Bound, _) | (_, Label::Bound) => Ordering::Incomparable,
            (Label::Path(a), Label::Path(b)) => {
                if a == b {
                    Ordering::Equal
                } else if a.len() < b.len() && b.starts_with(a) {
                    Ordering::Broadens
                } else if b.len() < a.len() && a.starts_with(b) {
                    Ordering::Narrows
                } else {
                    Ordering::Incomparable
                }
            }
        }
    }

    /// `self` is equal to or broader than `other`.
    pub fn weakly_broadens(&self, other: &Label) -> bool {
        matches!(self.compare(other), Ordering::Equal | Ordering::Broadens)
    }

    /// `self` is equal to or narrower than `other`.
    pub fn weakly_narrows(&self, other: &Label) -> bool {
        other.weakly_broadens(self)
    }

    /// Every label weakly broader than `self`, broadest first.
    pub fn up_closure(&self) -> Vec<Label> {
        match self {
            Label::Bound => vec![Label::Bound],
            Label::Path(s) => (1..=s.len()).map(|n| Label::Path(s[..n].to_vec())).collect(),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Bound => f.write_str(BOUND),
            Label::Path(s) => f.write_str(&s.join(":")),
        }
    }
}

impl FromStr for Label {
    type Err = LabelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::parse(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LabelKind {
    Plain,
    Satt,
    SattDel,
}

impl LabelKind {
    pub const ALL: [LabelKind; 3] = [LabelKind::Plain, LabelKind::Satt, LabelKind::SattDel];
}

/// A general label: a base label, optionally wrapped once in a sattestor operator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GenLabel {
    pub kind: LabelKind,
    pub base: Label,
}

impl GenLabel {
    pub fn new(kind: LabelKind, base: Label) -> Self {
        GenLabel { kind, base }
    }

    pub fn plain(base: Label) -> Self {
        GenLabel::new(LabelKind::Plain, base)
    }

    pub fn satt(base: Label) -> Self {
        GenLabel::new(LabelKind::Satt, base)
    }

    pub fn sattdel(base: Label) -> Self {
        GenLabel::new(LabelKind::SattDel, base)
    }

    pub fn bound() -> Self {
        GenLabel::plain(Label::Bound)
    }

    pub fn is_plain_bound(&self) -> bool {
        self.kind == LabelKind::Plain && self.base.is_bound()
    }

    pub fn is_sattestor_free(&self) -> bool {
        self.kind == LabelKind::Plain
    }

    /// Strips the sattestor wrapper.
    pub fn blabel(&self) -> &Label {
        &self.base
    }

    pub fn parse(text: &str) -> Result<GenLabel, LabelError> {
        let text = text.trim();
        let (kind, inner) = if let Some(rest) = text.strip_prefix(SATTDEL_PREFIX) {
            (LabelKind::SattDel, rest)
        } else if let Some(rest) = text.strip_prefix(SATT_PREFIX) {
            (LabelKind::Satt, rest)
        } else {
            return Ok(GenLabel::plain(Label::parse(text)?));
        };
        let inner = inner
            .strip_suffix(')')
            .ok_or_else(|| LabelError::BadWrapper(text.to_string()))?;
        if inner.starts_with(SATT_PREFIX) || inner.starts_with(SATTDEL_PREFIX) {
            // single application only
            return Err(LabelError::BadWrapper(text.to_string()));
        }
        Ok(GenLabel::new(kind, Label::parse(inner)?))
    }
}

impl fmt::Display for GenLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LabelKind::Plain => write!(f, "{}", self.base),
            LabelKind::Satt => write!(f, "{SATT_PREFIX}{})", self.base),
            LabelKind::SattDel => write!(f, "{SATTDEL_PREFIX}{})", self.base),
        }
    }
}

impl FromStr for GenLabel {
    type Err = LabelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GenLabel::parse(s)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Label::parse(&text).map_err(serde::de::Error::custom)
    }
}

impl Serialize for GenLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GenLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        GenLabel::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Closes a set of general labels upward on their bases and across all three kinds.
pub fn label_closure<'a, I>(labels: I) -> BTreeSet<GenLabel>
where
    I: IntoIterator<Item = &'a GenLabel>,
{
    let mut out = BTreeSet::new();
    for g in labels {
        for base in g.base.up_closure() {
            for kind in LabelKind::ALL {
                out.insert(GenLabel::new(kind, base.clone()));
            }
        }
    }
    out
}
