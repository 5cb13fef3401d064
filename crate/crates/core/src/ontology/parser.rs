//! Line-based ontology text format.
//!
//! ```text
//! concept  := "Thing" | "Nothing" | NAME | "{" NAME "}" | concept "and" concept
//!           | NAME "some" concept | NAME "every" concept | "(" concept ")"
//! axiom    := concept "SubClassOf" concept
//!           | NAME ("o" NAME)* "SubPropertyOf" NAME
//!           | NAME "(" NAME ")" | NAME "(" NAME "," NAME ")"
//! NAME     := [A-Za-z_][A-Za-z0-9_.-]*
//! ```
//!
//! One axiom per line, `#` starts a comment. `and` is left-associative and
//! binds looser than `some`. `every` is the internal "related to every
//! member" restriction; it parses so that enhanced ontologies round-trip, but
//! [`super::validate_el`] reports it in user input.

use thiserror::Error;

use super::{Axiom, ConceptExpr, NameClash, Ontology};

pub(crate) const KEYWORDS: &[&str] = &[
    "and",
    "some",
    "every",
    "o",
    "SubClassOf",
    "SubPropertyOf",
    "Thing",
    "Nothing",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}: {source}")]
    NameClash {
        line: usize,
        #[source]
        source: NameClash,
    },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::Syntax { line, .. } | ParseError::NameClash { line, .. } => *line,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    column: usize,
}

fn is_name_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-')
}

fn tokenize(line: &str, line_no: usize) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            tokens.push(Token { tok, column });
            i += 1;
        } else if c == '#' {
            break;
        } else if c.is_whitespace() {
            i += 1;
        } else if is_name_start(c) {
            let start = i;
            while i < chars.len() && is_name_char(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            tokens.push(Token { tok: Tok::Word(word), column });
        } else {
            return Err(ParseError::Syntax {
                line: line_no,
                column,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(tokens)
}

struct LineParser<'a> {
    tokens: &'a [Token],
    pos: usize,
    line: usize,
    end_column: usize,
}

impl<'a> LineParser<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek_word(&self) -> Option<&'a str> {
        match self.peek() {
            Some(Tok::Word(w)) => Some(w.as_str()),
            _ => None,
        }
    }

    fn column(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end_column, |t| t.column)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { line: self.line, column: self.column(), message: message.into() })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.peek_word() == Some(kw) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected `{kw}`"))
        }
    }

    fn name(&mut self) -> Result<String, ParseError> {
        match self.peek_word() {
            Some(w) if !KEYWORDS.contains(&w) => {
                self.pos += 1;
                Ok(w.to_string())
            }
            Some(w) => self.error(format!("keyword `{w}` cannot be used as a name")),
            None => self.error("expected a name"),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn concept(&mut self) -> Result<ConceptExpr, ParseError> {
        let mut acc = self.unary()?;
        while self.peek_word() == Some("and") {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = ConceptExpr::and([acc, rhs]);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<ConceptExpr, ParseError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.concept()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::LBrace) => {
                self.pos += 1;
                let name = self.name()?;
                self.expect(Tok::RBrace, "`}`")?;
                Ok(ConceptExpr::Nominal(name))
            }
            Some(Tok::Word(w)) if w == "Thing" => {
                self.pos += 1;
                Ok(ConceptExpr::Top)
            }
            Some(Tok::Word(w)) if w == "Nothing" => {
                self.pos += 1;
                Ok(ConceptExpr::Bottom)
            }
            Some(Tok::Word(_)) => {
                let name = self.name()?;
                match self.peek_word() {
                    Some("some") => {
                        self.pos += 1;
                        Ok(ConceptExpr::exists(name, self.unary()?))
                    }
                    Some("every") => {
                        self.pos += 1;
                        Ok(ConceptExpr::exists_all(name, self.unary()?))
                    }
                    _ => Ok(ConceptExpr::Atomic(name)),
                }
            }
            _ => self.error("expected a concept"),
        }
    }

    fn axiom(&mut self) -> Result<Axiom, ParseError> {
        let is_assertion = matches!(
            (self.tokens.first().map(|t| &t.tok), self.tokens.get(1).map(|t| &t.tok)),
            (Some(Tok::Word(_)), Some(Tok::LParen))
        );
        let is_role_axiom = self
            .tokens
            .iter()
            .any(|t| matches!(&t.tok, Tok::Word(w) if w == "SubPropertyOf"));

        let axiom = if is_assertion {
            let head = self.name()?;
            self.expect(Tok::LParen, "`(`")?;
            let first = self.name()?;
            let axiom = if self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                let second = self.name()?;
                Axiom::RoleAssertion { role: head, subject: first, object: second }
            } else {
                Axiom::ConceptAssertion { concept: head, individual: first }
            };
            self.expect(Tok::RParen, "`)`")?;
            axiom
        } else if is_role_axiom {
            let mut chain = vec![self.name()?];
            while self.peek_word() == Some("o") {
                self.pos += 1;
                chain.push(self.name()?);
            }
            self.expect_keyword("SubPropertyOf")?;
            let sup = self.name()?;
            if chain.len() == 1 {
                Axiom::RoleInclusion { sub: chain.pop().unwrap(), sup }
            } else {
                Axiom::RoleChain { chain, sup }
            }
        } else {
            let lhs = self.concept()?;
            self.expect_keyword("SubClassOf")?;
            let rhs = self.concept()?;
            Axiom::Gci { lhs, rhs }
        };
        if !self.at_end() {
            return self.error("unexpected trailing input");
        }
        Ok(axiom)
    }
}

/// Parses one axiom from a single line of text. Returns `Ok(None)` for blank
/// and comment-only lines.
pub(crate) fn parse_axiom_line(line: &str, line_no: usize) -> Result<Option<Axiom>, ParseError> {
    let tokens = tokenize(line, line_no)?;
    if tokens.is_empty() {
        return Ok(None);
    }
    let mut p = LineParser {
        tokens: &tokens,
        pos: 0,
        line: line_no,
        end_column: line.chars().count() + 1,
    };
    p.axiom().map(Some)
}

/// Parses a whole document.
pub(crate) fn parse_axioms(text: &str) -> Result<Vec<(usize, Axiom)>, ParseError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if let Some(axiom) = parse_axiom_line(line, idx + 1)? {
            out.push((idx + 1, axiom));
        }
    }
    Ok(out)
}

/// Parses an ontology document.
pub fn parse_ontology(text: &str) -> Result<Ontology, ParseError> {
    let axioms = parse_axioms(text)?;
    let mut signature = super::Signature::default();
    let mut kept = Vec::with_capacity(axioms.len());
    for (line, axiom) in axioms {
        signature
            .extend_from_axiom(&axiom)
            .map_err(|source| ParseError::NameClash { line, source })?;
        kept.push(axiom);
    }
    Ok(Ontology::with_signature(kept, signature).expect("signature already checked"))
}

/// Parses a single concept expression, e.g. a query side given on the
/// command line.
pub fn parse_concept(text: &str) -> Result<ConceptExpr, ParseError> {
    let tokens = tokenize(text, 1)?;
    let mut p = LineParser {
        tokens: &tokens,
        pos: 0,
        line: 1,
        end_column: text.chars().count() + 1,
    };
    let c = p.concept()?;
    if !p.at_end() {
        return p.error("unexpected trailing input");
    }
    Ok(c)
}
