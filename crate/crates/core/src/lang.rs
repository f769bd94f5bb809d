//! Statement language: identities, labeled pairs, says/trusts statements,
//! label orderings and the two connectives, with a line-oriented text syntax.
//!
//! ```text
//! (d, o)                      unlabeled pair, same as (d, o, bound)
//! (d, o, USG:DOJ)             labeled pair
//! (d, o) says (d2, o2, λ)     says-statement
//! P trusts (d, o, λ)          trust in a labeled pair
//! P trusts (d, o) says (...)  trust in a says-statement
//! USG:DOJ >= USG              (narrower >= broader)
//! φ & ψ,  φ -> ψ              conjunction, implication
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labels::{GenLabel, Label, LabelError};

/// A self-authenticating traditional address: a domain paired with an onion address.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SataId {
    pub domain: String,
    pub onion: String,
}

impl SataId {
    pub fn new(domain: impl Into<String>, onion: impl Into<String>) -> Self {
        SataId {
            domain: domain.into(),
            onion: onion.into(),
        }
    }
}

impl fmt::Display for SataId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.domain, self.onion)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Principal {
    Client(String),
    Sata(SataId),
}

impl Principal {
    pub fn client(name: impl Into<String>) -> Self {
        Principal::Client(name.into())
    }
}

impl fmt::Display for Principal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Principal::Client(name) => f.write_str(name),
            Principal::Sata(id) => write!(f, "{id}"),
        }
    }
}

/// `⟨D, O, g⟩`. The unlabeled pair is stored with label `bound`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BdLPair {
    pub id: SataId,
    pub label: GenLabel,
}

impl BdLPair {
    pub fn new(id: SataId, label: GenLabel) -> Self {
        BdLPair { id, label }
    }

    pub fn bound(id: SataId) -> Self {
        BdLPair::new(id, GenLabel::bound())
    }
}

impl fmt::Display for BdLPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.id.domain, self.id.onion, self.label)
    }
}

/// What a principal may trust: a labeled pair or a says-statement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Trustable {
    BdL(BdLPair),
    Says { speaker: SataId, body: BdLPair },
}

impl fmt::Display for Trustable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trustable::BdL(p) => write!(f, "{p}"),
            Trustable::Says { speaker, body } => write!(f, "{speaker} says {body}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Form {
    BdL(BdLPair),
    Says { speaker: SataId, body: BdLPair },
    Trusts { who: Principal, what: Trustable },
    /// `narrower >= broader`
    WkOrder { narrower: Label, broader: Label },
    Implies(Box<Form>, Box<Form>),
    And(Box<Form>, Box<Form>),
}

impl Form {
    pub fn says(speaker: SataId, body: BdLPair) -> Form {
        Form::Says { speaker, body }
    }

    pub fn trusts_bdl(who: Principal, pair: BdLPair) -> Form {
        Form::Trusts {
            who,
            what: Trustable::BdL(pair),
        }
    }

    pub fn trusts_says(who: Principal, speaker: SataId, body: BdLPair) -> Form {
        Form::Trusts {
            who,
            what: Trustable::Says { speaker, body },
        }
    }

    pub fn implies(a: Form, b: Form) -> Form {
        Form::Implies(Box::new(a), Box::new(b))
    }

    pub fn and(a: Form, b: Form) -> Form {
        Form::And(Box::new(a), Box::new(b))
    }

    pub fn parse(text: &str) -> Result<Form, ParseError> {
        parse_form(text)
    }

    /// True iff no label anywhere in the form is a sattestor label.
    pub fn is_sattestor_free(&self) -> bool {
        let mut free = true;
        self.visit_labels(&mut |g| free &= g.is_sattestor_free());
        free
    }

    /// True for the atomic statements a trust store can contain.
    pub fn is_atomic_statement(&self) -> bool {
        matches!(self, Form::Says { .. } | Form::Trusts { .. })
    }

    pub fn visit_labels(&self, f: &mut impl FnMut(&GenLabel)) {
        match self {
            Form::BdL(p) => f(&p.label),
            Form::Says { body, .. } => f(&body.label),
            Form::Trusts { what, .. } => match what {
                Trustable::BdL(p) => f(&p.label),
                Trustable::Says { body, .. } => f(&body.label),
            },
            Form::WkOrder { narrower, broader } => {
                f(&GenLabel::plain(narrower.clone()));
                f(&GenLabel::plain(broader.clone()));
            }
            Form::Implies(a, b) | Form::And(a, b) => {
                a.visit_labels(f);
                b.visit_labels(f);
            }
        }
    }

    pub fn visit_names(&self, f: &mut impl FnMut(&SataId)) {
        match self {
            Form::BdL(p) => f(&p.id),
            Form::Says { speaker, body } => {
                f(speaker);
                f(&body.id);
            }
            Form::Trusts { who, what } => {
                if let Principal::Sata(id) = who {
                    f(id);
                }
                match what {
                    Trustable::BdL(p) => f(&p.id),
                    Trustable::Says { speaker, body } => {
                        f(speaker);
                        f(&body.id);
                    }
                }
            }
            Form::WkOrder { .. } => {}
            Form::Implies(a, b) | Form::And(a, b) => {
                a.visit_names(f);
                b.visit_names(f);
            }
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Form::BdL(p) => write!(f, "{p}"),
            Form::Says { speaker, body } => write!(f, "{speaker} says {body}"),
            Form::Trusts { who, what } => write!(f, "{who} trusts {what}"),
            Form::WkOrder { narrower, broader } => write!(f, "{narrower} >= {broader}"),
            Form::And(a, b) => {
                // `&` is left-associative and binds tighter than `->`
                write_child(f, a, matches!(**a, Form::Implies(..)))?;
                f.write_str(" & ")?;
                write_child(f, b, matches!(**b, Form::Implies(..) | Form::And(..)))
            }
            Form::Implies(a, b) => {
                write_child(f, a, matches!(**a, Form::Implies(..)))?;
                f.write_str(" -> ")?;
                write_child(f, b, false)
            }
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Form, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

pub fn render_form(form: &Form) -> String {
    form.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("ill-formed statement at byte {position}: {message}")]
    IllFormed { position: usize, message: String },
    #[error("bad label at byte {position}: {source}")]
    Label {
        position: usize,
        #[source]
        source: LabelError,
    },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { position, .. }
            | ParseError::IllFormed { position, .. }
            | ParseError::Label { position, .. } => *position,
        }
    }
}

pub fn parse_form(text: &str) -> Result<Form, ParseError> {
    let mut p = Parser { src: text, pos: 0 };
    let form = p.form()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(form)
}

/// Parses a bare `(d, o)` or `(d, o, λ)`.
pub fn parse_bdl_pair(text: &str) -> Result<BdLPair, ParseError> {
    let mut p = Parser { src: text, pos: 0 };
    let tuple = p.tuple()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(tuple.into_pair())
}

struct Tuple {
    id: SataId,
    label: Option<GenLabel>,
}

impl Tuple {
    fn into_pair(self) -> BdLPair {
        BdLPair::new(self.id, self.label.unwrap_or_else(GenLabel::bound))
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn syntax(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn ill_formed(&self, position: usize, message: &str) -> ParseError {
        ParseError::IllFormed {
            position,
            message: message.to_string(),
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), ParseError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.syntax(&format!("expected `{token}`")))
        }
    }

    fn peek_keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        let rest = self.rest();
        rest.starts_with(kw)
            && rest[kw.len()..]
                .chars()
                .next()
                .is_none_or(|c| c.is_whitespace() || c == '(')
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.peek_keyword(kw) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    /// A run of characters up to whitespace, a delimiter, `->` or `>=`.
    fn word(&mut self) -> Result<&'a str, ParseError> {
        self.skip_ws();
        let rest = self.rest();
        let bytes = rest.as_bytes();
        let mut end = 0;
        for (i, c) in rest.char_indices() {
            let next = bytes.get(i + 1).copied();
            let stop = c.is_whitespace()
                || matches!(c, '(' | ')' | ',' | '&')
                || (c == '-' && next == Some(b'>'))
                || (c == '>' && next == Some(b'='));
            if stop {
                break;
            }
            end = i + c.len_utf8();
        }
        if end == 0 {
            return Err(self.syntax("expected a name"));
        }
        self.pos += end;
        Ok(&rest[..end])
    }

    fn form(&mut self) -> Result<Form, ParseError> {
        let lhs = self.conj()?;
        if self.eat("->") {
            let rhs = self.form()?;
            return Ok(Form::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<Form, ParseError> {
        let mut acc = self.atom()?;
        while self.eat("&") {
            let rhs = self.atom()?;
            acc = Form::and(acc, rhs);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Form, ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.rest().starts_with('(') {
            match self.tuple() {
                Ok(tuple) => return self.after_tuple(start, tuple),
                // a bad label means the tuple itself was structurally fine
                Err(e @ ParseError::Label { .. }) => return Err(e),
                Err(_) => {
                    self.pos = start;
                    self.expect("(")?;
                    let inner = self.form()?;
                    self.expect(")")?;
                    return Ok(inner);
                }
            }
        }
        let first = self.word()?;
        if self.eat_keyword("trusts") {
            let what = self.trustable()?;
            return Ok(Form::Trusts {
                who: Principal::client(first),
                what,
            });
        }
        if self.eat(">=") {
            let broader_pos = {
                self.skip_ws();
                self.pos
            };
            let broader = self.word()?;
            let narrower = Label::parse(first).map_err(|source| ParseError::Label {
                position: start,
                source,
            })?;
            let broader = Label::parse(broader).map_err(|source| ParseError::Label {
                position: broader_pos,
                source,
            })?;
            return Ok(Form::WkOrder { narrower, broader });
        }
        Err(self.syntax("expected `trusts` or `>=`"))
    }

    fn after_tuple(&mut self, start: usize, tuple: Tuple) -> Result<Form, ParseError> {
        if self.peek_keyword("says") {
            if tuple.label.is_some() {
                return Err(self.ill_formed(start, "the speaker of `says` must be an unlabeled pair"));
            }
            self.eat_keyword("says");
            let body = self.bdl_pair()?;
            return Ok(Form::Says {
                speaker: tuple.id,
                body,
            });
        }
        if self.peek_keyword("trusts") {
            if tuple.label.is_some() {
                return Err(self.ill_formed(start, "a trusting principal must be an unlabeled pair"));
            }
            self.eat_keyword("trusts");
            let what = self.trustable()?;
            return Ok(Form::Trusts {
                who: Principal::Sata(tuple.id),
                what,
            });
        }
        Ok(Form::BdL(tuple.into_pair()))
    }

    fn trustable(&mut self) -> Result<Trustable, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let form = self.atom()?;
        match form {
            Form::BdL(p) => Ok(Trustable::BdL(p)),
            Form::Says { speaker, body } => Ok(Trustable::Says { speaker, body }),
            _ => Err(self.ill_formed(
                start,
                "only a labeled pair or a says-statement can be trusted",
            )),
        }
    }

    fn bdl_pair(&mut self) -> Result<BdLPair, ParseError> {
        self.skip_ws();
        let start = self.pos;
        if !self.rest().starts_with('(') {
            return Err(self.syntax("expected `(`"));
        }
        let tuple = self.tuple()?;
        if self.peek_keyword("says") || self.peek_keyword("trusts") {
            return Err(self.ill_formed(start, "a says-statement can only carry a labeled pair"));
        }
        Ok(tuple.into_pair())
    }

    fn tuple(&mut self) -> Result<Tuple, ParseError> {
        self.expect("(")?;
        self.skip_ws();
        if self.rest().starts_with('(') {
            return Err(self.syntax("expected a domain"));
        }
        let domain = self.word()?.to_string();
        self.expect(",")?;
        let onion = self.word()?.to_string();
        let label = if self.eat(",") {
            self.skip_ws();
            let start = self.pos;
            let text = self.label_text()?;
            let label = GenLabel::parse(text).map_err(|source| ParseError::Label {
                position: start,
                source,
            })?;
            Some(label)
        } else {
            None
        };
        self.expect(")")?;
        Ok(Tuple {
            id: SataId::new(domain, onion),
            label,
        })
    }

    /// Raw label text up to the `)` closing the enclosing tuple.
    fn label_text(&mut self) -> Result<&'a str, ParseError> {
        let rest = self.rest();
        let mut depth = 0usize;
        for (i, c) in rest.char_indices() {
            match c {
                '(' => depth += 1,
                ')' if depth == 0 => {
                    self.pos += i;
                    return Ok(rest[..i].trim_end());
                }
                ')' => depth -= 1,
                ',' if depth == 0 => break,
                _ => {}
            }
        }
        Err(self.syntax("unterminated labeled pair"))
    }
}
