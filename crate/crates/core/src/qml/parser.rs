//! Recursive-descent parser from tokens to declarations. Errors are
//! collected and the parser resynchronises on the next top-level keyword
//! that starts a line.

use crate::catalog::{EntityKind, RelationKind};
use crate::diagnostic::{Diagnostic, SourceSpan, Subject};
use crate::model::Scalar;
use crate::rules;

use super::lexer::{Token, TokenKind};

pub const TOP_LEVEL: &[&str] = &[
    "model",
    "process",
    "customer",
    "supplier",
    "requirement",
    "observation",
    "measurement",
    "test",
    "nonconformity",
    "conformity",
    "cause",
    "action",
    "entity",
    "link",
];

const OTHER_RESERVED: &[&str] = &[
    "input",
    "output",
    "product",
    "part",
    "receives",
    "supplies",
    "on",
    "characteristic",
    "checks",
    "proof",
    "detected",
    "by",
    "of",
    "treats",
    "shape",
    "space",
    "time",
    "machine",
    "method",
    "material",
    "manpower",
    "environment",
    "corrective",
    "scheduled",
    "conditional",
    "predictive",
    "true",
    "false",
];

pub fn is_reserved(word: &str) -> bool {
    TOP_LEVEL.contains(&word) || OTHER_RESERVED.contains(&word)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ident {
    pub text: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttrAssign {
    pub key: Ident,
    pub value: Scalar,
}

/// A name together with attribute assignments written next to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Mention {
    pub name: Ident,
    pub attrs: Vec<AttrAssign>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decl {
    Model(Ident),
    Process {
        head: Mention,
        inputs: Vec<Mention>,
        outputs: Vec<Mention>,
        parts: Vec<Ident>,
    },
    Customer {
        head: Mention,
        receives: Vec<Ident>,
    },
    Supplier {
        head: Mention,
        supplies: Vec<Ident>,
    },
    Requirement {
        kind: EntityKind,
        head: Mention,
        owners: Vec<Ident>,
        characteristics: Vec<Mention>,
    },
    Check {
        kind: EntityKind,
        head: Mention,
        checks: Vec<Ident>,
        proofs: Vec<Mention>,
    },
    Determination {
        kind: EntityKind,
        head: Mention,
        on: Vec<Ident>,
        detected_by: Vec<Ident>,
    },
    Cause {
        kind: EntityKind,
        head: Mention,
        of: Vec<Ident>,
    },
    Action {
        kind: EntityKind,
        head: Mention,
        treats: Vec<Ident>,
    },
    Entity {
        kind: EntityKind,
        head: Mention,
    },
    Link {
        relation: RelationKind,
        source: (EntityKind, Ident),
        target: (EntityKind, Ident),
    },
}

struct SyntaxError {
    span: SourceSpan,
    message: String,
    unknown_kind: bool,
}

type PResult<T> = Result<T, SyntaxError>;

pub struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    file: &'a str,
    pub diagnostics: Vec<Diagnostic>,
}

impl<'a> Parser<'a> {
    pub fn new(tokens: &'a [Token], file: &'a str) -> Self {
        Parser {
            tokens,
            pos: 0,
            file,
            diagnostics: Vec::new(),
        }
    }

    pub fn parse_file(mut self) -> (Vec<Decl>, Vec<Diagnostic>) {
        let mut decls = Vec::new();
        while self.pos < self.tokens.len() {
            let start = self.pos;
            match self.declaration() {
                Ok(d) => decls.push(d),
                Err(e) => {
                    let rule = if e.unknown_kind {
                        &rules::Q_UNKNOWN_KIND
                    } else {
                        &rules::Q_SYNTAX
                    };
                    self.diagnostics.push(rule.diag(Subject::Span(e.span), e.message));
                    if self.pos == start {
                        self.pos += 1;
                    }
                    self.recover();
                }
            }
        }
        (decls, self.diagnostics)
    }

    fn recover(&mut self) {
        while let Some(t) = self.tokens.get(self.pos) {
            if t.line_start {
                if let TokenKind::Word(w) = &t.kind {
                    if TOP_LEVEL.contains(&w.as_str()) {
                        return;
                    }
                }
            }
            self.pos += 1;
        }
    }

    fn span_of(&self, t: &Token) -> SourceSpan {
        SourceSpan {
            file: self.file.to_string(),
            line: t.line,
            column: t.column,
            length: t.length,
        }
    }

    fn here(&self) -> SourceSpan {
        match self.tokens.get(self.pos).or(self.tokens.last()) {
            Some(t) => self.span_of(t),
            None => SourceSpan {
                file: self.file.to_string(),
                line: 1,
                column: 1,
                length: 0,
            },
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let found = match self.tokens.get(self.pos).map(|t| &t.kind) {
            None => "end of input".to_string(),
            Some(TokenKind::Word(w)) => format!("`{w}`"),
            Some(TokenKind::Str(s)) => format!("string {s:?}"),
            Some(TokenKind::Number(n)) => format!("number {n}"),
            Some(TokenKind::Invalid(c)) => format!("unexpected character {c:?}"),
            Some(TokenKind::Unterminated(_)) => "unterminated string".to_string(),
            Some(other) => format!("{other:?}").to_lowercase(),
        };
        Err(SyntaxError {
            span: self.here(),
            message: format!("{}, found {found}", message.into()),
            unknown_kind: false,
        })
    }

    fn peek_word(&self) -> Option<&str> {
        match self.tokens.get(self.pos).map(|t| &t.kind) {
            Some(TokenKind::Word(w)) => Some(w.as_str()),
            _ => None,
        }
    }

    fn peek_is(&self, kind: &TokenKind) -> bool {
        self.tokens.get(self.pos).map(|t| &t.kind) == Some(kind)
    }

    fn eat_word(&mut self, word: &str) -> bool {
        if self.peek_word() == Some(word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, word: &str) -> PResult<()> {
        if self.eat_word(word) {
            Ok(())
        } else {
            self.error(format!("expected `{word}`"))
        }
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek_is(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> PResult<()> {
        if self.eat(&kind) {
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn name(&mut self) -> PResult<Ident> {
        let Some(t) = self.tokens.get(self.pos) else {
            return self.error("expected a name");
        };
        let text = match &t.kind {
            TokenKind::Word(w) if !is_reserved(w) => w.clone(),
            TokenKind::Word(w) => {
                return self.error(format!("expected a name (quote `{w}` to use a keyword as a name)"))
            }
            TokenKind::Str(s) if !s.is_empty() => s.clone(),
            _ => return self.error("expected a name"),
        };
        let span = self.span_of(t);
        self.pos += 1;
        Ok(Ident { text, span })
    }

    fn name_list(&mut self) -> PResult<Vec<Ident>> {
        let mut out = vec![self.name()?];
        while self.eat(&TokenKind::Comma) {
            out.push(self.name()?);
        }
        Ok(out)
    }

    fn value(&mut self) -> PResult<Scalar> {
        let v = match self.tokens.get(self.pos).map(|t| &t.kind) {
            Some(TokenKind::Number(n)) => Scalar::Number(*n),
            Some(TokenKind::Str(s)) => Scalar::Text(s.clone()),
            Some(TokenKind::Word(w)) if w == "true" => Scalar::Bool(true),
            Some(TokenKind::Word(w)) if w == "false" => Scalar::Bool(false),
            _ => return self.error("expected a value (number, string, true or false)"),
        };
        self.pos += 1;
        Ok(v)
    }

    fn attr_list(&mut self) -> PResult<Vec<AttrAssign>> {
        let mut out = Vec::new();
        if !self.eat(&TokenKind::LBracket) {
            return Ok(out);
        }
        if self.eat(&TokenKind::RBracket) {
            return Ok(out);
        }
        loop {
            let Some(t) = self.tokens.get(self.pos) else {
                return self.error("expected an attribute name");
            };
            let key = match &t.kind {
                TokenKind::Word(w) => w.clone(),
                TokenKind::Str(s) if !s.is_empty() => s.clone(),
                _ => return self.error("expected an attribute name"),
            };
            let span = self.span_of(t);
            self.pos += 1;
            self.expect(TokenKind::Equals, "`=`")?;
            let value = self.value()?;
            out.push(AttrAssign {
                key: Ident { text: key, span },
                value,
            });
            if self.eat(&TokenKind::RBracket) {
                return Ok(out);
            }
            self.expect(TokenKind::Comma, "`,` or `]`")?;
        }
    }

    fn mention(&mut self) -> PResult<Mention> {
        let name = self.name()?;
        let attrs = self.attr_list()?;
        Ok(Mention { name, attrs })
    }

    /// `[, name]*` lists after an optional keyword.
    fn optional_list(&mut self, keyword: &str) -> PResult<Vec<Ident>> {
        if self.eat_word(keyword) {
            self.name_list()
        } else {
            Ok(Vec::new())
        }
    }

    fn kind_word(&mut self, choices: &[(&str, EntityKind)], what: &str) -> PResult<EntityKind> {
        if let Some(w) = self.peek_word() {
            if let Some((_, k)) = choices.iter().find(|(kw, _)| *kw == w) {
                self.pos += 1;
                return Ok(*k);
            }
        }
        let list: Vec<_> = choices.iter().map(|(w, _)| *w).collect();
        self.error(format!("expected {what} ({})", list.join("|")))
    }

    fn declaration(&mut self) -> PResult<Decl> {
        let Some(word) = self.peek_word().map(str::to_string) else {
            return self.error("expected a declaration");
        };
        if !TOP_LEVEL.contains(&word.as_str()) {
            return self.error("expected a declaration");
        }
        self.pos += 1;
        match word.as_str() {
            "model" => Ok(Decl::Model(self.name()?)),
            "process" => self.process(),
            "customer" => {
                let head = self.mention()?;
                let receives = self.optional_list("receives")?;
                Ok(Decl::Customer { head, receives })
            }
            "supplier" => {
                let head = self.mention()?;
                let supplies = self.optional_list("supplies")?;
                Ok(Decl::Supplier { head, supplies })
            }
            "requirement" => self.requirement(),
            "observation" | "measurement" | "test" => {
                let kind = match word.as_str() {
                    "observation" => EntityKind::Observation,
                    "measurement" => EntityKind::Measurement,
                    _ => EntityKind::Test,
                };
                let head = self.mention()?;
                let checks = self.optional_list("checks")?;
                let mut proofs = Vec::new();
                if self.eat_word("proof") {
                    proofs.push(self.mention()?);
                    while self.eat(&TokenKind::Comma) {
                        proofs.push(self.mention()?);
                    }
                }
                Ok(Decl::Check {
                    kind,
                    head,
                    checks,
                    proofs,
                })
            }
            "nonconformity" | "conformity" => {
                let kind = if word == "nonconformity" {
                    EntityKind::Nonconformity
                } else {
                    EntityKind::Conformity
                };
                let head = self.mention()?;
                let on = self.optional_list("on")?;
                let mut detected_by = Vec::new();
                if self.eat_word("detected") {
                    self.expect_word("by")?;
                    detected_by = self.name_list()?;
                }
                Ok(Decl::Determination {
                    kind,
                    head,
                    on,
                    detected_by,
                })
            }
            "cause" => {
                let kind = self.kind_word(
                    &[
                        ("machine", EntityKind::MachineCause),
                        ("method", EntityKind::MethodCause),
                        ("material", EntityKind::MaterialCause),
                        ("manpower", EntityKind::ManpowerCause),
                        ("environment", EntityKind::EnvironmentCause),
                    ],
                    "a cause category",
                )?;
                let head = self.mention()?;
                let of = self.optional_list("of")?;
                Ok(Decl::Cause { kind, head, of })
            }
            "action" => {
                let kind = self.kind_word(
                    &[
                        ("corrective", EntityKind::CorrectiveAction),
                        ("scheduled", EntityKind::ScheduledPreventiveAction),
                        ("conditional", EntityKind::ConditionalPreventiveAction),
                        ("predictive", EntityKind::PredictivePreventiveAction),
                    ],
                    "an action category",
                )?;
                let head = self.mention()?;
                let treats = self.optional_list("treats")?;
                Ok(Decl::Action { kind, head, treats })
            }
            "entity" => {
                let kind = self.catalog_kind()?;
                let head = self.mention()?;
                Ok(Decl::Entity { kind, head })
            }
            "link" => self.link(),
            _ => unreachable!("checked against TOP_LEVEL"),
        }
    }

    fn process(&mut self) -> PResult<Decl> {
        let head = self.mention()?;
        let (mut inputs, mut outputs, mut parts) = (Vec::new(), Vec::new(), Vec::new());
        if self.eat(&TokenKind::LBrace) {
            loop {
                if self.eat(&TokenKind::RBrace) {
                    break;
                }
                match self.peek_word() {
                    Some("input") => {
                        self.pos += 1;
                        self.expect_word("product")?;
                        inputs.push(self.mention()?);
                    }
                    Some("output") => {
                        self.pos += 1;
                        self.expect_word("product")?;
                        outputs.push(self.mention()?);
                    }
                    Some("part") => {
                        self.pos += 1;
                        parts.push(self.name()?);
                    }
                    _ => return self.error("expected `input product`, `output product`, `part` or `}`"),
                }
            }
        }
        Ok(Decl::Process {
            head,
            inputs,
            outputs,
            parts,
        })
    }

    fn requirement(&mut self) -> PResult<Decl> {
        let kind = self.kind_word(
            &[
                ("shape", EntityKind::ShapeRequirement),
                ("space", EntityKind::SpaceRequirement),
                ("time", EntityKind::TimeRequirement),
                ("process", EntityKind::ProcessRequirement),
            ],
            "a requirement category",
        )?;
        let head = self.mention()?;
        let owners = self.optional_list("on")?;
        let mut characteristics = Vec::new();
        if self.eat(&TokenKind::LBrace) {
            loop {
                if self.eat(&TokenKind::RBrace) {
                    break;
                }
                if !self.eat_word("characteristic") {
                    return self.error("expected `characteristic` or `}`");
                }
                let mut m = self.mention()?;
                if self.eat(&TokenKind::Equals) {
                    let span = self.here();
                    let value = self.value()?;
                    m.attrs.push(AttrAssign {
                        key: Ident {
                            text: "value".to_string(),
                            span,
                        },
                        value,
                    });
                }
                characteristics.push(m);
            }
        }
        Ok(Decl::Requirement {
            kind,
            head,
            owners,
            characteristics,
        })
    }

    fn catalog_kind(&mut self) -> PResult<EntityKind> {
        let Some(w) = self.peek_word().map(str::to_string) else {
            return self.error("expected an entity kind");
        };
        match w.parse::<EntityKind>() {
            Ok(k) => {
                self.pos += 1;
                Ok(k)
            }
            Err(_) => Err(SyntaxError {
                span: self.here(),
                message: format!("unknown entity kind `{w}`"),
                unknown_kind: true,
            }),
        }
    }

    fn qualified(&mut self) -> PResult<(EntityKind, Ident)> {
        let kind = self.catalog_kind()?;
        self.expect(TokenKind::Colon, "`:`")?;
        Ok((kind, self.name()?))
    }

    fn link(&mut self) -> PResult<Decl> {
        let Some(w) = self.peek_word().map(str::to_string) else {
            return self.error("expected a relation name");
        };
        let relation = match w.parse::<RelationKind>() {
            Ok(r) => r,
            Err(_) => {
                return Err(SyntaxError {
                    span: self.here(),
                    message: format!("unknown relation `{w}`"),
                    unknown_kind: true,
                })
            }
        };
        self.pos += 1;
        let source = self.qualified()?;
        self.expect(TokenKind::Arrow, "`->`")?;
        let target = self.qualified()?;
        Ok(Decl::Link {
            relation,
            source,
            target,
        })
    }
}
