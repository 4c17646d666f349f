use std::fmt;

use thiserror::Error;

use crate::kg::{vocabulary, Assertion, Iri, KnowledgeBase, PrefixTable, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedToken,
    UnterminatedIri,
    UnterminatedString,
    UnknownPrefixName,
    BadDirective,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// The first syntax error, located at its first offending character
/// (1-based line and column, columns counted in characters).
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind} at `{found}`")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
    pub found: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Iri(Iri),
    PName { prefix: String, local: String },
    Literal(String),
    A,
    Directive(String),
    Dot,
    Semicolon,
    Comma,
    Eof,
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    column: usize,
    offset: usize,
}

struct Lexer<'a> {
    text: &'a str,
    chars: Vec<(usize, char)>,
    i: usize,
    line: usize,
    column: usize,
}

const EXCERPT: usize = 24;

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, ';' | ',' | '#' | '<' | '"')
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { text, chars: text.char_indices().collect(), i: 0, line: 1, column: 1 }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).map(|(_, c)| *c)
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).map(|(_, c)| *c)
    }

    fn pos(&self) -> Pos {
        let offset = self.chars.get(self.i).map_or(self.text.len(), |(o, _)| *o);
        Pos { line: self.line, column: self.column, offset }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn excerpt(&self, at: Pos) -> String {
        let rest = &self.text[at.offset..];
        let line = rest.split(['\n', '\r']).next().unwrap_or("");
        let mut end = 0;
        for (n, (i, c)) in line.char_indices().enumerate() {
            if n >= EXCERPT || (n > 0 && c.is_whitespace()) {
                break;
            }
            end = i + c.len_utf8();
        }
        if end == 0 && line.is_empty() {
            return "<end of input>".to_string();
        }
        line[..end].to_string()
    }

    fn error(&self, at: Pos, kind: ParseErrorKind) -> ParseError {
        ParseError { line: at.line, column: at.column, kind, found: self.excerpt(at) }
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn next(&mut self, prefixes: &PrefixTable) -> Result<(Pos, Tok), ParseError> {
        self.skip_trivia();
        let start = self.pos();
        let Some(c) = self.peek() else { return Ok((start, Tok::Eof)) };
        let tok = match c {
            '.' => {
                self.bump();
                Tok::Dot
            }
            ';' => {
                self.bump();
                Tok::Semicolon
            }
            ',' => {
                self.bump();
                Tok::Comma
            }
            '<' => Tok::Iri(self.iri_ref(start)?),
            '"' => Tok::Literal(self.string(start)?),
            '@' => {
                self.bump();
                let mut word = String::new();
                while let Some(c) = self.peek().filter(|c| c.is_ascii_alphabetic()) {
                    word.push(c);
                    self.bump();
                }
                Tok::Directive(word)
            }
            c if c.is_alphabetic() || c == ':' || c == '_' => self.name(start, prefixes)?,
            _ => return Err(self.error(start, ParseErrorKind::UnexpectedToken)),
        };
        Ok((start, tok))
    }

    fn iri_ref(&mut self, start: Pos) -> Result<Iri, ParseError> {
        self.bump();
        let mut value = String::new();
        loop {
            match self.peek() {
                Some('>') => {
                    self.bump();
                    break;
                }
                None | Some('\n') | Some('\r') => return Err(self.error(start, ParseErrorKind::UnterminatedIri)),
                Some(c) => {
                    value.push(c);
                    self.bump();
                }
            }
        }
        Iri::new(&value).map_err(|_| self.error(start, ParseErrorKind::UnexpectedToken))
    }

    fn string(&mut self, start: Pos) -> Result<String, ParseError> {
        self.bump();
        let mut value = String::new();
        loop {
            let here = self.pos();
            match self.peek() {
                Some('"') => {
                    self.bump();
                    return Ok(value);
                }
                Some('\\') => {
                    self.bump();
                    let escaped = match self.peek() {
                        Some('"') => '"',
                        Some('\\') => '\\',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('t') => '\t',
                        None | Some('\n') | Some('\r') => {
                            return Err(self.error(start, ParseErrorKind::UnterminatedString))
                        }
                        Some(_) => return Err(self.error(here, ParseErrorKind::UnexpectedToken)),
                    };
                    self.bump();
                    value.push(escaped);
                }
                None | Some('\n') | Some('\r') => return Err(self.error(start, ParseErrorKind::UnterminatedString)),
                Some(c) => {
                    value.push(c);
                    self.bump();
                }
            }
        }
    }

    /// A prefixed name, the keyword `a`, or an error.
    fn name(&mut self, start: Pos, prefixes: &PrefixTable) -> Result<Tok, ParseError> {
        let mut prefix = String::new();
        while let Some(c) = self.peek().filter(|c| c.is_alphanumeric() || matches!(c, '_' | '-')) {
            prefix.push(c);
            self.bump();
        }
        if self.peek() != Some(':') {
            if prefix == "a" && self.peek().is_none_or(|c| is_delimiter(c) || c == '.') {
                return Ok(Tok::A);
            }
            return Err(self.error(start, ParseErrorKind::UnexpectedToken));
        }
        if prefix == "_" {
            return Err(self.error(start, ParseErrorKind::UnexpectedToken));
        }
        self.bump();
        let mut local = String::new();
        // Local names may contain dots but not end with one: the final dot
        // terminates the statement.
        while let Some(c) = self.peek() {
            let continues = c.is_alphanumeric()
                || matches!(c, '_' | '-')
                || (c == '.' && self.peek_at(1).is_some_and(|n| n.is_alphanumeric() || matches!(n, '_' | '-')));
            if !continues {
                break;
            }
            local.push(c);
            self.bump();
        }
        if let Some(c) = self.peek() {
            if !is_delimiter(c) && c != '.' {
                return Err(self.error(self.pos(), ParseErrorKind::UnexpectedToken));
            }
        }
        if !local.is_empty() && prefixes.get(&prefix).is_none() {
            return Err(self.error(start, ParseErrorKind::UnknownPrefixName));
        }
        Ok(Tok::PName { prefix, local })
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    prefixes: PrefixTable,
    lookahead: Option<(Pos, Tok)>,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Result<&(Pos, Tok), ParseError> {
        if self.lookahead.is_none() {
            let next = self.lexer.next(&self.prefixes)?;
            self.lookahead = Some(next);
        }
        Ok(self.lookahead.as_ref().expect("filled"))
    }

    fn take(&mut self) -> Result<(Pos, Tok), ParseError> {
        self.peek()?;
        Ok(self.lookahead.take().expect("filled"))
    }

    fn unexpected(&self, at: Pos) -> ParseError {
        self.lexer.error(at, ParseErrorKind::UnexpectedToken)
    }

    fn expect_dot(&mut self) -> Result<(), ParseError> {
        match self.take()? {
            (_, Tok::Dot) => Ok(()),
            (at, _) => Err(self.unexpected(at)),
        }
    }

    fn resolve(&self, at: Pos, prefix: &str, local: &str) -> Result<Iri, ParseError> {
        let ns = self.prefixes.get(prefix).ok_or_else(|| self.lexer.error(at, ParseErrorKind::UnknownPrefixName))?;
        Iri::new(format!("{ns}{local}")).map_err(|_| self.unexpected(at))
    }

    fn iri_term(&mut self) -> Result<Iri, ParseError> {
        match self.take()? {
            (_, Tok::Iri(i)) => Ok(i),
            (at, Tok::PName { prefix, local }) => self.resolve(at, &prefix, &local),
            (at, _) => Err(self.unexpected(at)),
        }
    }

    fn directive(&mut self, at: Pos, word: &str) -> Result<(), ParseError> {
        if word != "prefix" {
            return Err(self.lexer.error(at, ParseErrorKind::BadDirective));
        }
        // `NAME:` — lexed as a prefixed name with an empty local part.
        let prefix = match self.take()? {
            (_, Tok::PName { prefix, local }) if local.is_empty() => prefix,
            (bad, _) => return Err(self.lexer.error(bad, ParseErrorKind::BadDirective)),
        };
        let namespace = match self.take()? {
            (_, Tok::Iri(i)) => i,
            (bad, _) => return Err(self.lexer.error(bad, ParseErrorKind::BadDirective)),
        };
        match self.take()? {
            (_, Tok::Dot) => {}
            (bad, _) => return Err(self.lexer.error(bad, ParseErrorKind::BadDirective)),
        }
        self.prefixes.insert(prefix, namespace.as_str());
        Ok(())
    }

    fn statements(&mut self, out: &mut Vec<Assertion>) -> Result<(), ParseError> {
        loop {
            let (at, tok) = self.take()?;
            match tok {
                Tok::Eof => return Ok(()),
                Tok::Directive(word) => self.directive(at, &word)?,
                Tok::Iri(subject) => self.triples(subject, out)?,
                Tok::PName { prefix, local } => {
                    let subject = self.resolve(at, &prefix, &local)?;
                    self.triples(subject, out)?;
                }
                _ => return Err(self.unexpected(at)),
            }
        }
    }

    fn triples(&mut self, subject: Iri, out: &mut Vec<Assertion>) -> Result<(), ParseError> {
        loop {
            let predicate = match self.peek()? {
                (_, Tok::A) => {
                    self.take()?;
                    vocabulary().rdf_type().clone()
                }
                _ => self.iri_term()?,
            };
            loop {
                let object = match self.take()? {
                    (_, Tok::Iri(i)) => Term::Iri(i),
                    (at, Tok::PName { prefix, local }) => Term::Iri(self.resolve(at, &prefix, &local)?),
                    (_, Tok::Literal(l)) => Term::Literal(l),
                    (at, _) => return Err(self.unexpected(at)),
                };
                out.push(Assertion::new(subject.clone(), predicate.clone(), object));
                if matches!(self.peek()?, (_, Tok::Comma)) {
                    self.take()?;
                } else {
                    break;
                }
            }
            if matches!(self.peek()?, (_, Tok::Semicolon)) {
                self.take()?;
                // A trailing `;` before the final dot is allowed.
                while matches!(self.peek()?, (_, Tok::Semicolon)) {
                    self.take()?;
                }
                if matches!(self.peek()?, (_, Tok::Dot)) {
                    return self.expect_dot();
                }
            } else {
                return self.expect_dot();
            }
        }
    }
}

/// Parses Turtle text with the default prefix table (`oasis:`, `rdf:`, `ex:`)
/// pre-registered.
pub fn import_turtle(text: &str) -> Result<KnowledgeBase, ParseError> {
    import_turtle_with(text, &PrefixTable::default())
}

/// Parses Turtle text with `prefixes` pre-registered. `@prefix` directives
/// add to (or override) them and are kept in the resulting kb's table.
pub fn import_turtle_with(text: &str, prefixes: &PrefixTable) -> Result<KnowledgeBase, ParseError> {
    let mut parser = Parser { lexer: Lexer::new(text), prefixes: prefixes.clone(), lookahead: None };
    let mut assertions = Vec::new();
    parser.statements(&mut assertions)?;
    let mut kb = KnowledgeBase::new();
    *kb.prefixes_mut() = parser.prefixes;
    for a in assertions {
        kb.insert_raw(a);
    }
    Ok(kb)
}

/// Reads a prefix table from lines of `prefix namespace-IRI`; blank lines and
/// `#` comments are skipped. Entries extend the default table.
pub fn parse_prefix_map(text: &str) -> Result<PrefixTable, String> {
    let mut table = PrefixTable::default();
    for (n, raw) in text.lines().enumerate() {
        // `#` opens a comment at line start or after whitespace; inside an
        // IRI it is part of the namespace.
        let line = match raw.find(" #").or_else(|| raw.find("\t#")) {
            Some(i) => &raw[..i],
            None => raw,
        };
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(prefix), Some(ns), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(format!("line {}: expected `prefix namespace`", n + 1));
        };
        let prefix = prefix.trim_end_matches(':');
        let ns = ns.trim_start_matches('<').trim_end_matches('>');
        Iri::new(ns).map_err(|e| format!("line {}: {e}", n + 1))?;
        table.insert(prefix, ns);
    }
    Ok(table)
}
