//! Concrete syntax: lexer, recursive-descent parser and printer.
//!
//! ```text
//! type  ::= { x : B | expr } | type -> type | ( type )
//! expr  ::= \x:type. expr | fix f:type. expr | if expr then expr else expr
//!         | let x = expr; expr | let rec f : type = expr; expr | or
//! unary ::= < type => type @ label > unary | - unary | app
//! ```
//!
//! Operators, loosest first: `||`, `&&`, `not`, comparisons (non-assoc),
//! `+ -`, `* mod div`, prefix forms, application. A `-` glued to a digit in
//! operand position is a negative literal.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::syntax::{
    subst, Annotation, BaseType, Coercion, Const, Label, Name, Op, RefinementList, Status, Term,
    TermKind, Type, TypeKind, TypeSet,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// A top-level `let` or `let rec`.
#[derive(Debug, Clone)]
pub struct Decl {
    pub name: Name,
    pub annot: Option<Type>,
    /// Already elaborated: a `Fix` for `let rec`.
    pub body: Term,
    pub recursive: bool,
}

/// A parsed `.lh` file: declarations followed by the main expression.
#[derive(Debug, Clone)]
pub struct SourceFile {
    pub decls: Vec<Decl>,
    pub main: Term,
}

impl SourceFile {
    /// Declarations with earlier declarations substituted in.
    pub fn closed_decls(&self) -> Vec<Decl> {
        let mut done: Vec<Decl> = Vec::new();
        for d in &self.decls {
            let mut body = d.body.clone();
            for prev in done.iter().rev() {
                body = subst(&body, &prev.name, &prev.body);
            }
            done.push(Decl { body, ..d.clone() });
        }
        done
    }

    /// The whole file as one term, `let`s elaborated by substitution.
    pub fn to_term(&self) -> Term {
        let mut main = self.main.clone();
        for d in self.closed_decls().iter().rev() {
            main = subst(&main, &d.name, &d.body);
        }
        main
    }
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Kw(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
    start: usize,
    end: usize,
}

const KEYWORDS: &[&str] = &[
    "true", "false", "not", "mod", "div", "if", "then", "else", "let", "rec", "fix", "Int", "Bool",
    "blame", "check", "stack",
];

const SYMBOLS: &[&str] = &[
    "->", "=>", "<>", "<=", ">=", "&&", "||", "{", "}", "(", ")", ":", "|", "<", ">", "@", "\\",
    ".", ";", "=", "+", "-", "*", ",", "[", "]", "^", "?",
];

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut toks = Vec::new();
    let bytes: Vec<(usize, char)> = src.char_indices().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let at = |i: usize| bytes.get(i).map(|&(_, c)| c);
    let offset = |i: usize| bytes.get(i).map_or(src.len(), |&(o, _)| o);
    while i < bytes.len() {
        let c = bytes[i].1;
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' && at(i + 1) == Some('-') {
            while i < bytes.len() && bytes[i].1 != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col, start) = (line, col, offset(i));
        let tok = if c.is_ascii_digit() {
            let mut j = i;
            while at(j).is_some_and(|c| c.is_ascii_digit()) {
                j += 1;
            }
            let text = &src[offset(i)..offset(j)];
            let n = text.parse::<i64>().map_err(|_| ParseError {
                line,
                col,
                message: format!("integer literal `{text}` out of range"),
            })?;
            col += j - i;
            i = j;
            Tok::Int(n)
        } else if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while at(j).is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '\'') {
                j += 1;
            }
            let text = &src[offset(i)..offset(j)];
            col += j - i;
            i = j;
            match KEYWORDS.iter().find(|k| **k == text) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(text.to_owned()),
            }
        } else if c == 'λ' {
            i += 1;
            col += 1;
            Tok::Sym("\\")
        } else {
            let rest = &src[offset(i)..];
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    i += s.len();
                    col += s.len();
                    Tok::Sym(s)
                }
                None => {
                    return Err(ParseError { line, col, message: format!("unexpected character `{c}`") })
                }
            }
        };
        toks.push(Token { tok, line: start_line, col: start_col, start, end: offset(i) });
    }
    toks.push(Token { tok: Tok::Eof, line, col, start: src.len(), end: src.len() });
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// (source name, resolved name), innermost last.
    scope: Vec<(String, Name)>,
    idents: HashSet<String>,
    /// Accept the forms that only arise during evaluation.
    runtime: bool,
}

type PResult<T> = Result<T, ParseError>;

pub fn parse(src: &str) -> Result<Term, ParseError> {
    Ok(parse_file(src)?.to_term())
}

pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.ty()?;
    p.expect_eof()?;
    Ok(t)
}

/// Parses a term that may contain runtime-only forms: annotated casts,
/// empty labels, active checks, coercion stacks and blame. Accepts exactly
/// what [`print`] produces.
pub fn parse_runtime(src: &str) -> Result<Term, ParseError> {
    Ok(parse_file_with(src, true)?.to_term())
}

pub fn parse_file(src: &str) -> Result<SourceFile, ParseError> {
    parse_file_with(src, false)
}

/// [`parse_file`] with the runtime-only forms of [`parse_runtime`] allowed.
pub fn parse_runtime_file(src: &str) -> Result<SourceFile, ParseError> {
    parse_file_with(src, true)
}

fn parse_file_with(src: &str, runtime: bool) -> Result<SourceFile, ParseError> {
    let mut p = Parser::new(src)?;
    p.runtime = runtime;
    let mut decls = Vec::new();
    let mut names: HashSet<String> = HashSet::new();
    while p.peek() == &Tok::Kw("let") {
        let tok = p.next();
        let recursive = p.eat_kw("rec");
        let name = p.ident()?;
        if !names.insert(name.clone()) {
            return Err(p.error_at(&tok, format!("duplicate declaration `{name}`")));
        }
        let annot = if p.eat_sym(":") { Some(p.ty()?) } else { None };
        p.expect_sym("=")?;
        let body = if recursive {
            let annot = annot.clone().ok_or_else(|| {
                p.error_at(&tok, "`let rec` needs a type annotation".to_owned())
            })?;
            p.scope.push((name.clone(), Arc::from(name.as_str())));
            let body = p.expr()?;
            p.scope.pop();
            Term::fix(&name, annot, body)
        } else {
            p.expr()?
        };
        p.expect_sym(";")?;
        p.scope.push((name.clone(), Arc::from(name.as_str())));
        decls.push(Decl { name: Arc::from(name.as_str()), annot, body, recursive });
    }
    let main = p.expr()?;
    p.expect_eof()?;
    Ok(SourceFile { decls, main })
}

impl Parser {
    fn new(src: &str) -> PResult<Parser> {
        let toks = lex(src)?;
        let idents = toks
            .iter()
            .filter_map(|t| match &t.tok {
                Tok::Ident(s) => Some(s.clone()),
                _ => None,
            })
            .collect();
        Ok(Parser { toks, pos: 0, scope: Vec::new(), idents, runtime: false })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, t: &Token, message: String) -> ParseError {
        ParseError { line: t.line, col: t.col, message }
    }

    fn error(&self, message: String) -> ParseError {
        self.error_at(&self.toks[self.pos], message)
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Sym(s) | Tok::Kw(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_owned(),
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.error(format!("expected {wanted}, found {}", Self::describe(self.peek())))
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(x) if *x == s) {
            self.next();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Tok::Kw(x) if *x == s) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{s}`")))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{s}`")))
        }
    }

    fn expect_eof(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    /// Binds a term variable, renaming it if it would shadow.
    fn bind(&mut self, name: &str) -> Name {
        let shadows = self.scope.iter().any(|(src, actual)| src == name || &**actual == name);
        let actual: Name = if shadows {
            let mut candidate = format!("{name}'");
            while self.idents.contains(&candidate)
                || self.scope.iter().any(|(_, a)| **a == *candidate)
            {
                candidate.push('\'');
            }
            self.idents.insert(candidate.clone());
            Arc::from(candidate)
        } else {
            Arc::from(name)
        };
        self.scope.push((name.to_owned(), actual.clone()));
        actual
    }

    fn resolve(&self, name: &str) -> Name {
        self.scope
            .iter()
            .rev()
            .find(|(src, _)| src == name)
            .map_or_else(|| Arc::from(name), |(_, actual)| actual.clone())
    }

    // types

    fn ty(&mut self) -> PResult<Type> {
        let dom = self.ty_atom()?;
        if self.eat_sym("->") {
            let cod = self.ty()?;
            Ok(Type::fun(dom, cod))
        } else {
            Ok(dom)
        }
    }

    fn ty_atom(&mut self) -> PResult<Type> {
        if self.eat_sym("(") {
            let t = self.ty()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        self.expect_sym("{")?;
        let binder = self.ident()?;
        self.expect_sym(":")?;
        let base = if self.eat_kw("Int") {
            BaseType::Int
        } else if self.eat_kw("Bool") {
            BaseType::Bool
        } else {
            return Err(self.unexpected("base type `Int` or `Bool`"));
        };
        self.expect_sym("|")?;
        self.scope.push((binder.clone(), Arc::from(binder.as_str())));
        let pred = self.expr();
        self.scope.pop();
        let pred = pred?;
        self.expect_sym("}")?;
        Ok(Type::refine(&binder, base, pred))
    }

    // terms

    fn expr(&mut self) -> PResult<Term> {
        match self.peek() {
            Tok::Sym("\\") => {
                self.next();
                let name = self.ident()?;
                self.expect_sym(":")?;
                let annot = self.ty()?;
                self.expect_sym(".")?;
                let binder = self.bind(&name);
                let body = self.expr();
                self.scope.pop();
                Ok(Term::new(TermKind::Abs { binder, annot, body: body? }))
            }
            Tok::Kw("fix") => {
                self.next();
                let name = self.ident()?;
                self.expect_sym(":")?;
                let annot = self.ty()?;
                self.expect_sym(".")?;
                let binder = self.bind(&name);
                let body = self.expr();
                self.scope.pop();
                Ok(Term::new(TermKind::Fix { binder, annot, body: body? }))
            }
            Tok::Kw("if") => {
                self.next();
                let guard = self.expr()?;
                self.expect_kw("then")?;
                let then_branch = self.expr()?;
                self.expect_kw("else")?;
                let else_branch = self.expr()?;
                Ok(Term::cond(guard, then_branch, else_branch))
            }
            Tok::Kw("let") => {
                let tok = self.next();
                let recursive = self.eat_kw("rec");
                let name = self.ident()?;
                let annot = if self.eat_sym(":") { Some(self.ty()?) } else { None };
                self.expect_sym("=")?;
                let bound = if recursive {
                    let annot = annot.ok_or_else(|| {
                        self.error_at(&tok, "`let rec` needs a type annotation".to_owned())
                    })?;
                    let binder = self.bind(&name);
                    let body = self.expr();
                    self.scope.pop();
                    Term::new(TermKind::Fix { binder, annot, body: body? })
                } else {
                    self.expr()?
                };
                self.expect_sym(";")?;
                let actual = self.bind(&name);
                let rest = self.expr();
                self.scope.pop();
                Ok(subst(&rest?, &actual, &bound))
            }
            _ => self.or(),
        }
    }

    fn or(&mut self) -> PResult<Term> {
        let mut l = self.and()?;
        while self.eat_sym("||") {
            let r = self.and()?;
            l = Term::binop(Op::Or, l, r);
        }
        Ok(l)
    }

    fn and(&mut self) -> PResult<Term> {
        let mut l = self.not()?;
        while self.eat_sym("&&") {
            let r = self.not()?;
            l = Term::binop(Op::And, l, r);
        }
        Ok(l)
    }

    fn not(&mut self) -> PResult<Term> {
        if self.eat_kw("not") {
            let e = self.not()?;
            return Ok(Term::op(Op::Not, vec![e]));
        }
        self.cmp()
    }

    fn cmp(&mut self) -> PResult<Term> {
        let l = self.add()?;
        let op = match self.peek() {
            Tok::Sym("=") => Op::Eq,
            Tok::Sym("<>") => Op::Neq,
            Tok::Sym("<") => Op::Lt,
            Tok::Sym("<=") => Op::Le,
            Tok::Sym(">") => Op::Gt,
            Tok::Sym(">=") => Op::Ge,
            _ => return Ok(l),
        };
        self.next();
        let r = self.add()?;
        if matches!(self.peek(), Tok::Sym("=" | "<>" | "<" | "<=" | ">" | ">=")) {
            return Err(self.error("comparisons do not chain; add parentheses".to_owned()));
        }
        Ok(Term::binop(op, l, r))
    }

    fn add(&mut self) -> PResult<Term> {
        let mut l = self.mul()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => Op::Add,
                Tok::Sym("-") => Op::Sub,
                _ => return Ok(l),
            };
            self.next();
            let r = self.mul()?;
            l = Term::binop(op, l, r);
        }
    }

    fn mul(&mut self) -> PResult<Term> {
        let mut l = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => Op::Mul,
                Tok::Kw("mod") => Op::Mod,
                Tok::Kw("div") => Op::Div,
                _ => return Ok(l),
            };
            self.next();
            let r = self.unary()?;
            l = Term::binop(op, l, r);
        }
    }

    fn glued_negative(&self) -> Option<i64> {
        let (minus, next) = (&self.toks[self.pos], self.toks.get(self.pos + 1)?);
        match (&minus.tok, &next.tok) {
            (Tok::Sym("-"), Tok::Int(n)) if minus.end == next.start => Some(-n),
            _ => None,
        }
    }

    fn unary(&mut self) -> PResult<Term> {
        match self.peek() {
            Tok::Sym("<") => {
                self.next();
                let src = self.ty()?;
                let ann = if self.eat_sym("=") {
                    if !self.runtime {
                        return Err(self.error("annotated casts are runtime-only forms".to_owned()));
                    }
                    let ann = self.annotation()?;
                    self.expect_sym("=>")?;
                    ann
                } else {
                    self.expect_sym("=>")?;
                    Annotation::Empty
                };
                let tgt = self.ty()?;
                self.expect_sym("@")?;
                let label = self.label()?;
                self.expect_sym(">")?;
                let subject = self.unary()?;
                Ok(Term::cast(src, ann, tgt, label, subject))
            }
            Tok::Kw("blame") if self.runtime => {
                self.next();
                Ok(Term::blame(self.label()?))
            }
            Tok::Sym("-") if self.glued_negative().is_none() => {
                self.next();
                let e = self.unary()?;
                Ok(Term::binop(Op::Sub, Term::int(0), e))
            }
            Tok::Kw(k @ ("blame" | "check" | "stack")) if !self.runtime => {
                Err(self.error(format!("`{k}` is a runtime-only form and cannot appear in programs")))
            }
            _ => self.app(),
        }
    }

    fn label(&mut self) -> PResult<Label> {
        let label = match self.peek().clone() {
            Tok::Ident(s) => Label::named(&s),
            Tok::Int(n) => Label::named(&n.to_string()),
            Tok::Sym("*") if self.runtime => Label::Empty,
            Tok::Sym("*") => return Err(self.error("empty blame labels are runtime-only".to_owned())),
            _ => return Err(self.unexpected("blame label")),
        };
        self.next();
        Ok(label)
    }

    fn constant(&mut self) -> PResult<Const> {
        let tok = self.toks[self.pos].clone();
        match self.app()?.as_const() {
            Some(k) => Ok(k),
            None => Err(self.error_at(&tok, "expected a constant".to_owned())),
        }
    }

    fn annotation(&mut self) -> PResult<Annotation> {
        match self.peek() {
            Tok::Sym("{") if matches!(self.peek_at(1), Tok::Sym("{" | "(" | "}")) => {
                self.next();
                let mut set = TypeSet::new();
                if !self.eat_sym("}") {
                    loop {
                        set.insert(self.ty()?);
                        if self.eat_sym("}") {
                            break;
                        }
                        self.expect_sym(",")?;
                    }
                }
                Ok(Annotation::Types(set))
            }
            _ => Ok(Annotation::Coerce(self.coercion()?)),
        }
    }

    fn coercion(&mut self) -> PResult<Coercion> {
        if self.eat_sym("(") {
            let d = self.coercion()?;
            self.expect_sym("|")?;
            self.expect_sym("->")?;
            let c = self.coercion()?;
            self.expect_sym(")")?;
            return Ok(Coercion::fun(d, c));
        }
        Ok(Coercion::Refs(self.ref_list()?))
    }

    fn ref_list(&mut self) -> PResult<RefinementList> {
        self.expect_sym("[")?;
        let mut entries = Vec::new();
        if !self.eat_sym("]") {
            loop {
                let t = self.ty()?;
                self.expect_sym("^")?;
                let l = self.label()?;
                entries.push((t, l));
                if self.eat_sym("]") {
                    break;
                }
                self.expect_sym(",")?;
            }
        }
        Ok(RefinementList::from_entries(entries))
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_) | Tok::Int(_) | Tok::Kw("true" | "false") | Tok::Sym("("))
            || (self.runtime && matches!(self.peek(), Tok::Kw("check" | "stack")))
    }

    fn app(&mut self) -> PResult<Term> {
        let mut f = if let Some(n) = self.glued_negative() {
            self.next();
            self.next();
            Term::int(n)
        } else {
            self.atom()?
        };
        while self.starts_atom() {
            let a = self.atom()?;
            f = Term::app(f, a);
        }
        Ok(f)
    }

    fn atom(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(Term::new(TermKind::Var(self.resolve(&s))))
            }
            Tok::Int(n) => {
                self.next();
                Ok(Term::int(n))
            }
            Tok::Kw("true") => {
                self.next();
                Ok(Term::bool(true))
            }
            Tok::Kw("false") => {
                self.next();
                Ok(Term::bool(false))
            }
            Tok::Sym("(") => {
                self.next();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Kw("check") if self.runtime => {
                self.next();
                self.expect_sym("<")?;
                let tgt = self.ty()?;
                self.expect_sym(",")?;
                let current = self.expr()?;
                self.expect_sym(",")?;
                let k = self.constant()?;
                self.expect_sym("@")?;
                let label = self.label()?;
                self.expect_sym(">")?;
                Ok(Term::check(tgt, current, k, label))
            }
            Tok::Kw("stack") if self.runtime => {
                self.next();
                self.expect_sym("<")?;
                let tgt = self.ty()?;
                self.expect_sym(",")?;
                let status = if self.eat_sym("?") {
                    Status::Unchecked
                } else if matches!(self.peek(), Tok::Ident(s) if s == "ok") {
                    self.next();
                    Status::Checked
                } else {
                    return Err(self.unexpected("status `ok` or `?`"));
                };
                self.expect_sym(",")?;
                let pending = self.ref_list()?;
                self.expect_sym(",")?;
                let k = self.constant()?;
                self.expect_sym(",")?;
                // a comparison here would swallow the closing `>`
                let current = self.unary()?;
                self.expect_sym(">")?;
                Ok(Term::stack(tgt, status, pending, k, current))
            }
            Tok::Kw(k @ ("blame" | "check" | "stack")) => {
                Err(self.error(format!("`{k}` is a runtime-only form and cannot appear in programs")))
            }
            _ => Err(self.unexpected("expression")),
        }
    }
}

// ---------------------------------------------------------------------------
// Printer

/// Precedence levels, loosest first.
const P_EXPR: u8 = 0;
const P_OR: u8 = 1;
const P_AND: u8 = 2;
const P_NOT: u8 = 3;
const P_CMP: u8 = 4;
const P_ADD: u8 = 5;
const P_MUL: u8 = 6;
const P_UNARY: u8 = 7;
const P_APP: u8 = 8;
const P_ATOM: u8 = 9;

struct Printer {
    /// Rename binders to `%n` (alpha-normal form).
    canonical: bool,
    env: Vec<(Name, String)>,
    out: String,
}

pub fn print(e: &Term) -> String {
    let mut p = Printer { canonical: false, env: Vec::new(), out: String::new() };
    p.term(e, P_EXPR);
    p.out
}

pub fn print_type(t: &Type) -> String {
    let mut p = Printer { canonical: false, env: Vec::new(), out: String::new() };
    p.ty(t);
    p.out
}

/// Alpha-normal printed form of a type; binders become `%0`, `%1`, ...
pub fn canonical_type(t: &Type) -> String {
    let mut p = Printer { canonical: true, env: Vec::new(), out: String::new() };
    p.ty_uncached(t);
    p.out
}

pub fn print_annotation(a: &Annotation) -> String {
    let mut p = Printer { canonical: false, env: Vec::new(), out: String::new() };
    p.ann(a);
    p.out
}

pub fn print_coercion(c: &Coercion) -> String {
    let mut p = Printer { canonical: false, env: Vec::new(), out: String::new() };
    p.coercion(c);
    p.out
}

pub fn print_list(r: &RefinementList) -> String {
    let mut p = Printer { canonical: false, env: Vec::new(), out: String::new() };
    p.list(r);
    p.out
}

impl Printer {
    fn binder(&mut self, name: &Name) -> String {
        let shown = if self.canonical { format!("%{}", self.env.len()) } else { name.to_string() };
        self.env.push((name.clone(), shown.clone()));
        shown
    }

    fn var(&mut self, name: &Name) {
        match self.env.iter().rev().find(|(n, _)| n == name) {
            Some((_, shown)) => self.out.push_str(shown),
            None => self.out.push_str(name),
        }
    }

    fn ty(&mut self, t: &Type) {
        if self.canonical && t.is_closed() {
            // a closed type's key is independent of the enclosing binders
            self.out.push_str(t.key());
            return;
        }
        self.ty_uncached(t);
    }

    fn ty_uncached(&mut self, t: &Type) {
        match t.kind() {
            TypeKind::Refine { binder, base, pred } => {
                let depth = self.env.len();
                let shown = self.binder(binder);
                let _ = write!(self.out, "{{{shown}:{base}|");
                self.term(pred, P_EXPR);
                self.env.truncate(depth);
                self.out.push('}');
            }
            TypeKind::Fun(d, c) => {
                if d.arrow().is_some() {
                    self.out.push('(');
                    self.ty(d);
                    self.out.push(')');
                } else {
                    self.ty(d);
                }
                self.out.push_str(" -> ");
                self.ty(c);
            }
        }
    }

    fn label(&mut self, l: &Label) {
        let _ = write!(self.out, "{l}");
    }

    fn list(&mut self, r: &RefinementList) {
        self.out.push('[');
        for (i, entry) in r.entries().iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            self.ty(&entry.ty);
            self.out.push('^');
            self.label(&entry.label);
        }
        self.out.push(']');
    }

    fn coercion(&mut self, c: &Coercion) {
        match c {
            Coercion::Refs(r) => self.list(r),
            Coercion::Fun(d, k) => {
                self.out.push('(');
                self.coercion(d);
                self.out.push_str(" |-> ");
                self.coercion(k);
                self.out.push(')');
            }
        }
    }

    fn ann(&mut self, a: &Annotation) {
        match a {
            Annotation::Empty => {}
            Annotation::Types(s) => {
                self.out.push('{');
                for (i, t) in s.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(", ");
                    }
                    self.ty(t);
                }
                self.out.push('}');
            }
            Annotation::Coerce(c) => self.coercion(c),
        }
    }

    fn term(&mut self, e: &Term, ctx: u8) {
        let prec = precedence(e);
        let paren = prec < ctx;
        if paren {
            self.out.push('(');
        }
        self.term_inner(e);
        if paren {
            self.out.push(')');
        }
    }

    fn term_inner(&mut self, e: &Term) {
        match e.kind() {
            TermKind::Var(x) => self.var(x),
            TermKind::Const(k) => {
                let _ = write!(self.out, "{k}");
            }
            TermKind::Abs { binder, annot, body } | TermKind::Fix { binder, annot, body } => {
                self.out.push_str(if matches!(e.kind(), TermKind::Abs { .. }) { "\\" } else { "fix " });
                // the annotation is outside the binder's scope
                let shown =
                    if self.canonical { format!("%{}", self.env.len()) } else { binder.to_string() };
                let _ = write!(self.out, "{shown}:");
                self.ty(annot);
                self.out.push_str(". ");
                let depth = self.env.len();
                self.env.push((binder.clone(), shown));
                self.term(body, P_EXPR);
                self.env.truncate(depth);
            }
            TermKind::App(f, a) => {
                self.term(f, P_APP);
                self.out.push(' ');
                self.term(a, P_ATOM);
            }
            TermKind::Op { op, args } => match (op, args.as_slice()) {
                (Op::Not, [a]) => {
                    self.out.push_str("not ");
                    self.term(a, P_NOT);
                }
                (_, [l, r]) => {
                    let level = binop_level(*op);
                    let (lctx, rctx) =
                        if level == P_CMP { (level + 1, level + 1) } else { (level, level + 1) };
                    self.term(l, lctx);
                    let _ = write!(self.out, " {op} ");
                    self.term(r, rctx);
                }
                _ => {
                    let _ = write!(self.out, "{op}(");
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            self.out.push_str(", ");
                        }
                        self.term(a, P_EXPR);
                    }
                    self.out.push(')');
                }
            },
            TermKind::Cast { src, ann, tgt, label, subject } => {
                self.out.push('<');
                self.ty(src);
                if matches!(ann, Annotation::Empty) {
                    self.out.push_str(" => ");
                } else {
                    self.out.push_str(" =");
                    self.ann(ann);
                    self.out.push_str("=> ");
                }
                self.ty(tgt);
                self.out.push_str(" @ ");
                self.label(label);
                self.out.push_str("> ");
                self.term(subject, P_UNARY);
            }
            TermKind::Check { tgt, current, scrutinee, label } => {
                self.out.push_str("check<");
                self.ty(tgt);
                self.out.push_str(", ");
                self.term(current, P_EXPR);
                let _ = write!(self.out, ", {scrutinee} @ ");
                self.label(label);
                self.out.push('>');
            }
            TermKind::Blame(l) => {
                self.out.push_str("blame ");
                self.label(l);
            }
            TermKind::Stack { tgt, status, pending, scrutinee, current } => {
                self.out.push_str("stack<");
                self.ty(tgt);
                let _ = write!(self.out, ", {status}, ");
                self.list(pending);
                let _ = write!(self.out, ", {scrutinee}, ");
                self.term(current, P_UNARY);
                self.out.push('>');
            }
            TermKind::Cond { guard, then_branch, else_branch } => {
                self.out.push_str("if ");
                self.term(guard, P_EXPR);
                self.out.push_str(" then ");
                self.term(then_branch, P_EXPR);
                self.out.push_str(" else ");
                self.term(else_branch, P_EXPR);
            }
        }
    }
}

fn binop_level(op: Op) -> u8 {
    match op {
        Op::Or => P_OR,
        Op::And => P_AND,
        Op::Not => P_NOT,
        Op::Eq | Op::Neq | Op::Lt | Op::Le | Op::Gt | Op::Ge => P_CMP,
        Op::Add | Op::Sub => P_ADD,
        Op::Mul | Op::Mod | Op::Div => P_MUL,
    }
}

fn precedence(e: &Term) -> u8 {
    match e.kind() {
        TermKind::Var(_) | TermKind::Check { .. } | TermKind::Stack { .. } => P_ATOM,
        // negative literals would read as subtraction in argument position
        TermKind::Const(Const::Int(n)) if *n < 0 => P_APP,
        TermKind::Const(_) => P_ATOM,
        TermKind::Abs { .. } | TermKind::Fix { .. } | TermKind::Cond { .. } => P_EXPR,
        TermKind::App(..) => P_APP,
        TermKind::Op { op, args } => match (op, args.len()) {
            (Op::Not, 1) => P_NOT,
            (_, 2) => binop_level(*op),
            _ => P_ATOM,
        },
        TermKind::Cast { .. } | TermKind::Blame(_) => P_UNARY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::alpha_eq;

    const E3: &str = "<{x:Int|x mod 2 = 0} => {x:Int|x <> 0} @ l3> \
                      (<{x:Int|x >= 0} => {x:Int|x mod 2 = 0} @ l2> \
                      (<{x:Int|true} => {x:Int|x >= 0} @ l1> (-1)))";

    #[test]
    fn literals_and_casts() {
        assert_eq!(parse("(-1)").unwrap().as_const(), Some(Const::Int(-1)));
        let e = parse("<{x:Int|true} => {x:Int|x >= 0} @ l1> (-1)").unwrap();
        match e.kind() {
            TermKind::Cast { ann: Annotation::Empty, label, subject, .. } => {
                assert_eq!(label, &Label::named("l1"));
                assert_eq!(subject.as_const(), Some(Const::Int(-1)));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(print(&Term::bool(true)), "true");
    }

    #[test]
    fn unary_minus_is_subtraction() {
        let e = parse("- x").unwrap();
        assert_eq!(print(&e), "0 - x");
        assert_eq!(parse("3 -1").unwrap().to_string(), "3 - 1");
        assert_eq!(parse("f -1").unwrap().to_string(), "f - 1");
        assert_eq!(parse("f (-1)").unwrap().to_string(), "f (-1)");
    }

    #[test]
    fn running_example_round_trips() {
        let e = parse(E3).unwrap();
        let again = parse(&print(&e)).unwrap();
        assert!(alpha_eq(&e, &again));
    }

    #[test]
    fn runtime_forms_rejected_by_source_parser() {
        let b = Term::blame(Label::named("l1"));
        assert_eq!(print(&b), "blame l1");
        assert!(parse("blame l1").is_err());
        assert!(parse("check<{x:Int|x >= 0}, true, 1 @ l>").is_err());
        assert!(parse("<{x:Int|true} =[]=> {x:Int|true} @ l> 1").is_err());
        assert!(parse("<{x:Int|true} => {x:Int|true} @ *> 1").is_err());
        assert!(parse_runtime("blame l1").unwrap().as_blame().is_some());
    }

    #[test]
    fn runtime_forms_round_trip() {
        let nat = parse_type("{x:Int|x >= 0}").unwrap();
        let nz = parse_type("{x:Int|x <> 0}").unwrap();
        let r = RefinementList::from_entries([(nat.clone(), Label::named("l1")), (nz.clone(), Label::named("l3"))]);
        let check = Term::check(nat.clone(), parse("-1 >= 0").unwrap(), Const::Int(-1), Label::named("l1"));
        let stack = Term::stack(nz.clone(), Status::Unchecked, r.clone(), Const::Int(-1), check.clone());
        let set: TypeSet = [nat.clone(), nz.clone()].into_iter().collect();
        let typed = Term::cast(nat.clone(), Annotation::Types(set), nz.clone(), Label::named("l"), Term::int(3));
        let fun = Coercion::fun(Coercion::Refs(r.clone()), Coercion::Refs(RefinementList::nil()));
        let arrow = Type::fun(nat.clone(), nz.clone());
        let proxy = Term::cast(
            arrow.clone(),
            Annotation::Coerce(fun),
            arrow,
            Label::Empty,
            parse(r"\y:{x:Int|x >= 0}. y").unwrap(),
        );
        let empty = Term::cast(nat.clone(), Annotation::Types(TypeSet::new()), nz, Label::Empty, Term::int(2));
        for t in [check, stack, typed, proxy, empty, Term::blame(Label::Empty)] {
            let text = print(&t);
            let back = parse_runtime(&text).unwrap_or_else(|e| panic!("{text}: {e}"));
            assert!(alpha_eq(&t, &back), "{text}");
            assert_eq!(print(&back), text);
        }
    }

    #[test]
    fn shadowing_binders_are_renamed() {
        let e = parse(r"\x:{x:Int|true}. \x:{x:Int|true}. x").unwrap();
        assert_eq!(print(&e), r"\x:{x:Int|true}. \x':{x:Int|true}. x'");
    }

    #[test]
    fn files_elaborate_lets() {
        let src = "-- comment\nlet one : {x:Int|true} = 1;\nlet rec f : {x:Int|true} -> {x:Int|true} = \\n:{x:Int|true}. n;\nf one";
        let file = parse_file(src).unwrap();
        assert_eq!(file.decls.len(), 2);
        assert!(file.decls[1].recursive);
        assert!(matches!(file.decls[1].body.kind(), TermKind::Fix { .. }));
        assert!(parse_file("let rec f = 1; f").is_err());
        assert!(parse_file("let a = 1; let a = 2; a").is_err());
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse("1 +\n  )").unwrap_err();
        assert_eq!((err.line, err.col), (2, 3));
    }
}
