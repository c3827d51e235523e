//! The text format for declarations: lexer, resolving parser, checker and
//! pretty-printer.
//!
//! ```text
//! type T;
//! fn init : 1 -> T;
//! shape Moore = Id ^ T _ T;
//! def store = <theta, id>;
//! sys Delay : Moore = lift(init)(mu(lift(store) . beta . alpha . lift(pi2) . omega));
//! ```
//!
//! Declarations resolve in order: a name must be declared before it is
//! used. `def` bodies and `shape` aliases are expanded at their use sites.
//! Derived combinators (`**`, `++`, `swapP`, `swapC`, `d2`) are expanded
//! to primitives while parsing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::comb::{self, desugar, CombExpr, Derived, TypeError, Unifier};
use crate::shapes::Shape;
use crate::system::{self, type_system_full, DeclaredSystem, LoopExpr, SystemError, SystemExpr, SystemTyping};
use crate::types::{CompositeType, OpaqueTypeId, SymbolTable};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DslError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{line}:{col}: {message}")]
    Resolution { line: usize, col: usize, message: String },
}

impl DslError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            DslError::Syntax { line, col, .. } | DslError::Resolution { line, col, .. } => (*line, *col),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Type(String),
    Fn {
        name: String,
        domain: CompositeType,
        codomain: CompositeType,
    },
    Shape {
        name: String,
        shape: Shape,
    },
    Def {
        name: String,
        body: CombExpr,
    },
    Sys {
        name: String,
        system: DeclaredSystem,
    },
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Type(n) => n,
            Decl::Fn { name, .. } | Decl::Shape { name, .. } | Decl::Def { name, .. } | Decl::Sys { name, .. } => name,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpecFile {
    pub decls: Vec<Decl>,
    pub symbols: SymbolTable,
}

#[derive(Clone, Debug)]
pub enum Checked {
    Def { name: String, ty: String },
    Sys { name: String, typing: Box<SystemTyping> },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("def `{name}`: {source}")]
    Def { name: String, source: TypeError },
    #[error("sys `{name}`: {source}")]
    Sys { name: String, source: SystemError },
}

impl SpecFile {
    pub fn system(&self, name: &str) -> Option<&DeclaredSystem> {
        self.decls.iter().find_map(|d| match d {
            Decl::Sys { name: n, system } if n == name => Some(system),
            _ => None,
        })
    }

    pub fn systems(&self) -> impl Iterator<Item = (&str, &DeclaredSystem)> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Sys { name, system } => Some((name.as_str(), system)),
            _ => None,
        })
    }

    pub fn shape(&self, name: &str) -> Option<&Shape> {
        self.decls.iter().find_map(|d| match d {
            Decl::Shape { name: n, shape } if n == name => Some(shape),
            _ => None,
        })
    }

    /// Typecheck every `def` (at its most general type) and every `sys`
    /// (against its declared shape), in declaration order.
    pub fn check(&self) -> Vec<Result<Checked, CheckError>> {
        let mut out = vec![];
        for d in &self.decls {
            match d {
                Decl::Def { name, body } => {
                    let mut u = Unifier::new();
                    let dom = u.fresh();
                    out.push(
                        comb::infer_annotated(&self.symbols, body, &dom, &mut u)
                            .map(|a| Checked::Def {
                                name: name.clone(),
                                ty: format!("{} -> {}", u.render(&a.dom), u.render(&a.cod)),
                            })
                            .map_err(|source| CheckError::Def {
                                name: name.clone(),
                                source,
                            }),
                    );
                }
                Decl::Sys { name, system } => out.push(
                    type_system_full(&self.symbols, &system.expr, &system.shape, system.param.as_ref())
                        .map(|typing| Checked::Sys {
                            name: name.clone(),
                            typing: Box::new(typing),
                        })
                        .map_err(|source| CheckError::Sys {
                            name: name.clone(),
                            source,
                        }),
                ),
                _ => {}
            }
        }
        out
    }

    /// ASCII rendering; `parse(&f.to_source()) == Ok(f)`.
    pub fn to_source(&self) -> String {
        self.render(false)
    }

    /// Mathematical notation for combinators and systems. Display only.
    pub fn to_unicode(&self) -> String {
        self.render(true)
    }

    fn render(&self, unicode: bool) -> String {
        let mut s = String::new();
        for d in &self.decls {
            s.push_str(&render_decl(d, unicode));
            s.push('\n');
        }
        s
    }
}

pub fn render_decl(d: &Decl, unicode: bool) -> String {
    let comb = |e: &CombExpr| {
        if unicode {
            comb::render_expr_unicode(e)
        } else {
            comb::render_expr(e)
        }
    };
    match d {
        Decl::Type(n) => format!("type {n};"),
        Decl::Fn { name, domain, codomain } => format!("fn {name} : {domain} -> {codomain};"),
        Decl::Shape { name, shape } => format!("shape {name} = {shape};"),
        Decl::Def { name, body } => format!("def {name} = {};", comb(body)),
        Decl::Sys { name, system } => {
            let param = match &system.param {
                Some(p) => format!(" @ {p}"),
                None => String::new(),
            };
            let body = if unicode {
                system::render_system_unicode(&system.expr)
            } else {
                system::render_system(&system.expr)
            };
            format!("sys {name} : {}{param} = {body};", system.shape)
        }
    }
}

impl fmt::Display for SpecFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_source())
    }
}

// ---------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    One,
    Semi,
    Colon,
    Arrow,
    Eq,
    LParen,
    RParen,
    Lt,
    Gt,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Star,
    StarStar,
    Plus,
    PlusPlus,
    Caret,
    Under,
    /// `(+)`
    ShapeSum,
    /// `(x)`
    Tensor,
    /// `(o)`
    Oplus,
    At,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(n) => return write!(f, "`{n}`"),
            Tok::One => "`1`",
            Tok::Semi => "`;`",
            Tok::Colon => "`:`",
            Tok::Arrow => "`->`",
            Tok::Eq => "`=`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::Lt => "`<`",
            Tok::Gt => "`>`",
            Tok::LBrack => "`[`",
            Tok::RBrack => "`]`",
            Tok::Comma => "`,`",
            Tok::Dot => "`.`",
            Tok::Star => "`*`",
            Tok::StarStar => "`**`",
            Tok::Plus => "`+`",
            Tok::PlusPlus => "`++`",
            Tok::Caret => "`^`",
            Tok::Under => "`_`",
            Tok::ShapeSum => "`(+)`",
            Tok::Tensor => "`(x)`",
            Tok::Oplus => "`(o)`",
            Tok::At => "`@`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, DslError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = vec![];
    let (mut i, mut line, mut col) = (0, 1, 1);
    let at = |i: usize| chars.get(i).copied();
    while i < chars.len() {
        let c = chars[i];
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
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = (line, col);
        let (tok, len) = if c.is_ascii_alphabetic() {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                j += 1;
            }
            (Tok::Ident(chars[i..j].iter().collect()), j - i)
        } else {
            match (c, at(i + 1), at(i + 2)) {
                ('(', Some('+'), Some(')')) => (Tok::ShapeSum, 3),
                ('(', Some('x'), Some(')')) => (Tok::Tensor, 3),
                ('(', Some('o'), Some(')')) => (Tok::Oplus, 3),
                ('-', Some('>'), _) => (Tok::Arrow, 2),
                ('*', Some('*'), _) => (Tok::StarStar, 2),
                ('+', Some('+'), _) => (Tok::PlusPlus, 2),
                ('1', next, _) if !next.is_some_and(|n| n.is_ascii_alphanumeric()) => (Tok::One, 1),
                ('(', ..) => (Tok::LParen, 1),
                (')', ..) => (Tok::RParen, 1),
                ('<', ..) => (Tok::Lt, 1),
                ('>', ..) => (Tok::Gt, 1),
                ('[', ..) => (Tok::LBrack, 1),
                (']', ..) => (Tok::RBrack, 1),
                (',', ..) => (Tok::Comma, 1),
                ('.', ..) => (Tok::Dot, 1),
                (';', ..) => (Tok::Semi, 1),
                (':', ..) => (Tok::Colon, 1),
                ('=', ..) => (Tok::Eq, 1),
                ('*', ..) => (Tok::Star, 1),
                ('+', ..) => (Tok::Plus, 1),
                ('^', ..) => (Tok::Caret, 1),
                ('_', ..) => (Tok::Under, 1),
                ('@', ..) => (Tok::At, 1),
                _ => {
                    return Err(DslError::Syntax {
                        line,
                        col,
                        message: format!("unexpected character {c:?}"),
                    })
                }
            }
        };
        out.push(Spanned {
            tok,
            line: start.0,
            col: start.1,
        });
        i += len;
        col += len;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

// ---------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------

const RESERVED: &[&str] = &[
    "type", "fn", "shape", "def", "sys", "Id", "x", "o", "id", "theta", "pi1", "pi2", "k1", "k2", "d1", "d2", "swapP",
    "swapC", "lift", "mu", "omega", "alpha", "beta",
];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    file: SpecFile,
    shapes: BTreeMap<String, Shape>,
    defs: BTreeMap<String, CombExpr>,
    systems: BTreeSet<String>,
}

type PResult<T> = Result<T, DslError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_ident(&self) -> Option<&str> {
        match self.peek() {
            Tok::Ident(n) => Some(n),
            _ => None,
        }
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, message: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(DslError::Syntax {
            line: t.line,
            col: t.col,
            message: message.into(),
        })
    }

    fn resolution<T>(at: &Spanned, message: impl Into<String>) -> PResult<T> {
        Err(DslError::Resolution {
            line: at.line,
            col: at.col,
            message: message.into(),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.syntax(format!("expected {t}, found {}", self.peek()))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.peek_ident() == Some(kw) {
            self.bump();
            Ok(())
        } else {
            self.syntax(format!("expected `{kw}`, found {}", self.peek()))
        }
    }

    /// A fresh (non-reserved) name for a declaration.
    fn binder(&mut self) -> PResult<(String, Spanned)> {
        let t = self.bump();
        match &t.tok {
            Tok::Ident(n) if RESERVED.contains(&n.as_str()) => Self::resolution(&t, format!("`{n}` is reserved")),
            Tok::Ident(n) => Ok((n.clone(), t.clone())),
            other => {
                self.pos -= 1;
                self.syntax(format!("expected a name, found {other}"))
            }
        }
    }

    fn file(mut self) -> PResult<SpecFile> {
        while *self.peek() != Tok::Eof {
            let d = self.decl()?;
            self.expect(Tok::Semi)?;
            self.file.decls.push(d);
        }
        Ok(self.file)
    }

    fn decl(&mut self) -> PResult<Decl> {
        let kw = self.peek_ident().map(str::to_string);
        match kw.as_deref() {
            Some("type") => {
                self.bump();
                let (name, at) = self.binder()?;
                if self.file.symbols.declare_type(&name).is_err() {
                    return Self::resolution(&at, format!("duplicate type `{name}`"));
                }
                Ok(Decl::Type(name))
            }
            Some("fn") => {
                self.bump();
                let (name, at) = self.binder()?;
                self.expect(Tok::Colon)?;
                let domain = self.ty()?;
                self.expect(Tok::Arrow)?;
                let codomain = self.ty()?;
                if self.defs.contains_key(&name) || self.file.symbols.function(&name).is_some() {
                    return Self::resolution(&at, format!("duplicate function `{name}`"));
                }
                self.file
                    .symbols
                    .declare_function(&name, domain.clone(), codomain.clone())
                    .expect("types resolved while parsing");
                Ok(Decl::Fn { name, domain, codomain })
            }
            Some("shape") => {
                self.bump();
                let (name, at) = self.binder()?;
                self.expect(Tok::Eq)?;
                let shape = self.shape()?;
                if self.shapes.insert(name.clone(), shape.clone()).is_some() {
                    return Self::resolution(&at, format!("duplicate shape `{name}`"));
                }
                Ok(Decl::Shape { name, shape })
            }
            Some("def") => {
                self.bump();
                let (name, at) = self.binder()?;
                self.expect(Tok::Eq)?;
                let body = self.comb()?;
                if self.defs.contains_key(&name) || self.file.symbols.function(&name).is_some() {
                    return Self::resolution(&at, format!("duplicate function `{name}`"));
                }
                self.defs.insert(name.clone(), body.clone());
                Ok(Decl::Def { name, body })
            }
            Some("sys") => {
                self.bump();
                let (name, at) = self.binder()?;
                self.expect(Tok::Colon)?;
                let shape = self.shape()?;
                let param = if self.eat(&Tok::At) { Some(self.ty()?) } else { None };
                self.expect(Tok::Eq)?;
                let expr = self.system()?;
                if !self.systems.insert(name.clone()) {
                    return Self::resolution(&at, format!("duplicate system `{name}`"));
                }
                Ok(Decl::Sys {
                    name,
                    system: DeclaredSystem { shape, param, expr },
                })
            }
            _ => self.syntax(format!(
                "expected a declaration (type, fn, shape, def, sys), found {}",
                self.peek()
            )),
        }
    }

    // types: sum := prod ('+' prod)* ; prod := atom ('*' atom)*

    fn ty(&mut self) -> PResult<CompositeType> {
        let mut t = self.ty_prod()?;
        while self.eat(&Tok::Plus) {
            t = CompositeType::coproduct(t, self.ty_prod()?);
        }
        Ok(t)
    }

    fn ty_prod(&mut self) -> PResult<CompositeType> {
        let mut t = self.ty_atom()?;
        while self.eat(&Tok::Star) {
            t = CompositeType::product(t, self.ty_atom()?);
        }
        Ok(t)
    }

    fn ty_atom(&mut self) -> PResult<CompositeType> {
        let t = self.bump();
        match &t.tok {
            Tok::One => Ok(CompositeType::One),
            Tok::LParen => {
                let inner = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(n) => {
                if self.file.symbols.has_type(&OpaqueTypeId::new(n.as_str())) {
                    Ok(CompositeType::opaque(n.as_str()))
                } else {
                    Self::resolution(&t, format!("undeclared type `{n}`"))
                }
            }
            other => {
                self.pos -= 1;
                self.syntax(format!("expected a type, found {other}"))
            }
        }
    }

    // shapes: sum := prod ('(+)' prod)* ; prod := post ('x' post)* ;
    // post := atom (('^' | '_') type-atom)*

    fn shape(&mut self) -> PResult<Shape> {
        let mut s = self.shape_prod()?;
        while self.eat(&Tok::ShapeSum) {
            s = Shape::coprod(s, self.shape_prod()?);
        }
        Ok(s)
    }

    fn shape_prod(&mut self) -> PResult<Shape> {
        let mut s = self.shape_post()?;
        while self.peek_ident() == Some("x") {
            self.bump();
            s = Shape::prod(s, self.shape_post()?);
        }
        Ok(s)
    }

    fn shape_post(&mut self) -> PResult<Shape> {
        let mut s = self.shape_atom()?;
        loop {
            if self.eat(&Tok::Caret) {
                s = Shape::input(s, self.ty_atom()?);
            } else if self.eat(&Tok::Under) {
                s = Shape::output(s, self.ty_atom()?);
            } else {
                return Ok(s);
            }
        }
    }

    fn shape_atom(&mut self) -> PResult<Shape> {
        let t = self.bump();
        match &t.tok {
            Tok::Ident(n) if n == "Id" => Ok(Shape::Id),
            Tok::Ident(n) => match self.shapes.get(n) {
                Some(s) => Ok(s.clone()),
                None => Self::resolution(&t, format!("undeclared shape `{n}`")),
            },
            Tok::LParen => {
                let inner = self.shape()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            other => {
                self.pos -= 1;
                self.syntax(format!("expected a shape, found {other}"))
            }
        }
    }

    // comb: chain := sum ('.' chain)? ; sum := prod ('++' prod)* ;
    // prod := atom ('**' atom)*

    fn comb(&mut self) -> PResult<CombExpr> {
        let head = self.comb_sum()?;
        if self.eat(&Tok::Dot) {
            Ok(CombExpr::compose(head, self.comb()?))
        } else {
            Ok(head)
        }
    }

    fn comb_sum(&mut self) -> PResult<CombExpr> {
        let mut e = self.comb_prod()?;
        while self.eat(&Tok::PlusPlus) {
            e = comb::sum_map(e, self.comb_prod()?);
        }
        Ok(e)
    }

    fn comb_prod(&mut self) -> PResult<CombExpr> {
        let mut e = self.comb_atom()?;
        while self.eat(&Tok::StarStar) {
            e = comb::product_map(e, self.comb_atom()?);
        }
        Ok(e)
    }

    fn comb_atom(&mut self) -> PResult<CombExpr> {
        let t = self.bump();
        let derived = |d: Derived| desugar(d, &[]).expect("nullary");
        match &t.tok {
            Tok::Ident(n) => Ok(match n.as_str() {
                "id" => CombExpr::Identity,
                "theta" => CombExpr::Theta,
                "pi1" => CombExpr::Pi1,
                "pi2" => CombExpr::Pi2,
                "k1" => CombExpr::Kappa1,
                "k2" => CombExpr::Kappa2,
                "d1" => CombExpr::Delta1,
                "d2" => derived(Derived::Delta2),
                "swapP" => derived(Derived::SwapProduct),
                "swapC" => derived(Derived::SwapCoproduct),
                _ if RESERVED.contains(&n.as_str()) => {
                    self.pos -= 1;
                    return self.syntax(format!("`{n}` cannot appear in a combinational expression"));
                }
                _ => {
                    if let Some(body) = self.defs.get(n) {
                        body.clone()
                    } else if self.file.symbols.function(n).is_some() {
                        CombExpr::opaque(n.as_str())
                    } else {
                        return Self::resolution(&t, format!("undeclared function `{n}`"));
                    }
                }
            }),
            Tok::Lt => {
                let l = self.comb()?;
                self.expect(Tok::Comma)?;
                let r = self.comb()?;
                self.expect(Tok::Gt)?;
                Ok(CombExpr::pair(l, r))
            }
            Tok::LBrack => {
                let l = self.comb()?;
                self.expect(Tok::Comma)?;
                let r = self.comb()?;
                self.expect(Tok::RBrack)?;
                Ok(CombExpr::case(l, r))
            }
            Tok::LParen => {
                let inner = self.comb()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            other => {
                self.pos -= 1;
                self.syntax(format!("expected a combinational expression, found {other}"))
            }
        }
    }

    fn lift(&mut self) -> PResult<CombExpr> {
        self.expect_keyword("lift")?;
        self.expect(Tok::LParen)?;
        let f = self.comb()?;
        self.expect(Tok::RParen)?;
        Ok(f)
    }

    // system := 'mu' '(' loop ')' | lift '(' 'mu' '(' loop ')' ')'

    fn system(&mut self) -> PResult<SystemExpr> {
        if self.peek_ident() == Some("lift") {
            let init = self.lift()?;
            self.expect(Tok::LParen)?;
            let l = self.mu()?;
            self.expect(Tok::RParen)?;
            Ok(SystemExpr::new(init, l))
        } else {
            Ok(SystemExpr::new(CombExpr::Identity, self.mu()?))
        }
    }

    fn mu(&mut self) -> PResult<LoopExpr> {
        self.expect_keyword("mu")?;
        self.expect(Tok::LParen)?;
        let l = self.loop_expr()?;
        self.expect(Tok::RParen)?;
        Ok(l)
    }

    fn loop_expr(&mut self) -> PResult<LoopExpr> {
        if self.peek_ident() == Some("alpha") {
            self.bump();
            self.expect(Tok::Dot)?;
            return Ok(LoopExpr::alpha(self.loop_expr()?));
        }
        self.after_lift(CombExpr::Identity)
    }

    /// The part of a loop that follows `lift(f) .`; `f` is `id` when the
    /// lift was omitted. Consecutive lifts fuse contravariantly:
    /// `lift(f) . lift(g) = lift(g . f)`.
    fn after_lift(&mut self, f: CombExpr) -> PResult<LoopExpr> {
        match self.peek().clone() {
            Tok::Ident(n) if n == "omega" => {
                self.bump();
                Ok(LoopExpr::omega(f))
            }
            Tok::Ident(n) if n == "beta" => {
                self.bump();
                self.expect(Tok::Dot)?;
                Ok(LoopExpr::beta(f, self.loop_expr()?))
            }
            Tok::Ident(n) if n == "alpha" => {
                if f != CombExpr::Identity {
                    return self.syntax("`alpha` cannot follow a lift");
                }
                self.loop_expr()
            }
            Tok::Ident(n) if n == "lift" => {
                let g = self.lift()?;
                self.expect(Tok::Dot)?;
                let fused = if f == CombExpr::Identity {
                    g
                } else {
                    CombExpr::compose(g, f)
                };
                self.after_lift(fused)
            }
            Tok::LParen => {
                self.bump();
                let l = self.loop_expr()?;
                if self.eat(&Tok::RParen) {
                    return self.prepend_lift(f, l);
                }
                let tensor = match self.peek() {
                    Tok::Tensor => true,
                    Tok::Oplus => false,
                    other => return self.syntax(format!("expected `(x)` or `(o)`, found {other}")),
                };
                self.bump();
                let r = self.loop_expr()?;
                self.expect(Tok::RParen)?;
                Ok(if tensor {
                    LoopExpr::tensor(f, l, r)
                } else {
                    LoopExpr::oplus(f, l, r)
                })
            }
            other => self.syntax(format!(
                "expected `omega`, `alpha`, `beta`, `lift` or `(`, found {other}"
            )),
        }
    }
}

impl Parser {
    /// `lift(f) . (L)`
    fn prepend_lift(&self, f: CombExpr, l: LoopExpr) -> PResult<LoopExpr> {
        if f == CombExpr::Identity {
            return Ok(l);
        }
        let fuse = |g: CombExpr| {
            if g == CombExpr::Identity {
                f.clone()
            } else {
                CombExpr::compose(g, f.clone())
            }
        };
        Ok(match l {
            LoopExpr::LiftOmega(g) => LoopExpr::LiftOmega(fuse(g)),
            LoopExpr::LiftBeta(g, i) => LoopExpr::LiftBeta(fuse(g), i),
            LoopExpr::LiftTensor(g, a, b) => LoopExpr::LiftTensor(fuse(g), a, b),
            LoopExpr::LiftOplus(g, a, b) => LoopExpr::LiftOplus(fuse(g), a, b),
            LoopExpr::Alpha(_) => return self.syntax("`alpha` cannot follow a lift"),
        })
    }
}

pub fn parse(src: &str) -> Result<SpecFile, DslError> {
    Parser {
        toks: lex(src)?,
        pos: 0,
        file: SpecFile::default(),
        shapes: BTreeMap::new(),
        defs: BTreeMap::new(),
        systems: BTreeSet::new(),
    }
    .file()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::complement;
    use crate::system::SystemType;
    use crate::types::CompositeType as C;

    const DELAY: &str = "
        type T;
        fn init : 1 -> T;
        -- stores the input, emits the previous one
        sys Delay : Id ^ T _ T =
            lift(init)(mu(lift(<theta, id>) . beta . alpha . lift(pi2) . omega));
    ";

    #[test]
    fn empty_file() {
        assert_eq!(parse("").unwrap(), SpecFile::default());
        assert_eq!(parse("  -- nothing\n").unwrap(), SpecFile::default());
    }

    #[test]
    fn delay_types() {
        let f = parse(DELAY).unwrap();
        let checked = f.check();
        let Ok(Checked::Sys { typing, .. }) = &checked[0] else {
            panic!("{checked:?}")
        };
        let t = C::opaque("T");
        let moore = Shape::output(Shape::input(Shape::Id, t.clone()), t.clone());
        assert_eq!(
            typing.system_type,
            SystemType::new(moore.clone(), moore, C::One).unwrap()
        );
        assert_eq!(typing.loop_state, t);
    }

    #[test]
    fn round_trip() {
        let f = parse(DELAY).unwrap();
        let printed = f.to_source();
        assert_eq!(parse(&printed).unwrap(), f);
        assert!(printed.contains(
            "sys Delay : Id ^ T _ T = lift(init)(mu(lift(<theta, id>) . beta . alpha . lift(pi2) . omega));"
        ));
        assert!(f.to_unicode().contains("⌈init⌉(μ(⌈⟨θ, id⟩⌉ ∘ β ∘ α ∘ ⌈π2⌉ ∘ ω))"));
    }

    #[test]
    fn precedence() {
        let f = parse("type A; type B; shape S = Id ^ A x Id _ (A + B) (+) Id; fn f : A * B + 1 -> A;").unwrap();
        let (a, b) = (C::opaque("A"), C::opaque("B"));
        assert_eq!(
            f.shape("S").unwrap(),
            &Shape::coprod(
                Shape::prod(
                    Shape::input(Shape::Id, a.clone()),
                    Shape::output(Shape::Id, C::coproduct(a.clone(), b.clone()))
                ),
                Shape::Id
            )
        );
        let Decl::Fn { domain, .. } = &f.decls[3] else { panic!() };
        assert_eq!(domain, &C::coproduct(C::product(a, b), C::One));
    }

    #[test]
    fn compose_is_right_associative_and_defs_expand() {
        let f = parse("type A; fn f : A -> A; fn g : A -> A; def h = g . f . pi1; def k = h ** id;").unwrap();
        let Decl::Def { body, .. } = &f.decls[3] else { panic!() };
        let h = CombExpr::compose(
            CombExpr::opaque("g"),
            CombExpr::compose(CombExpr::opaque("f"), CombExpr::Pi1),
        );
        assert_eq!(body, &h);
        let Decl::Def { body, .. } = &f.decls[4] else { panic!() };
        assert_eq!(body, &comb::product_map(h, CombExpr::Identity));
        assert_eq!(parse(&f.to_source()).unwrap(), f);
    }

    #[test]
    fn lifts_fuse_contravariantly() {
        let f = parse("type A; fn f : A -> A; fn g : A -> A; sys S : Id = mu(lift(f) . lift(g) . omega);").unwrap();
        let s = f.system("S").unwrap();
        assert_eq!(
            s.expr.loop_expr,
            LoopExpr::omega(CombExpr::compose(CombExpr::opaque("g"), CombExpr::opaque("f")))
        );
    }

    #[test]
    fn parenthesised_loops() {
        let f = parse("type A; fn f : A -> A; fn g : A -> A; sys S : Id = mu(lift(f) . (lift(g) . omega));").unwrap();
        let g = parse("type A; fn f : A -> A; fn g : A -> A; sys S : Id = mu(lift(f) . lift(g) . omega);").unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("type T;\nfn f : T -> U;").unwrap_err();
        assert!(matches!(e, DslError::Resolution { line: 2, col: 13, .. }), "{e}");
        let e = parse("type T;\ntype T;").unwrap_err();
        assert!(matches!(e, DslError::Resolution { line: 2, .. }), "{e}");
        let e = parse("type T\nfn").unwrap_err();
        assert!(matches!(e, DslError::Syntax { line: 2, col: 1, .. }), "{e}");
        let e = parse("type id;").unwrap_err();
        assert!(matches!(e, DslError::Resolution { .. }), "{e}");
        let e = parse("sys S : Id = mu(lift(nope) . omega);").unwrap_err();
        assert!(e.to_string().contains("nope"));
        let e = parse("type T; $").unwrap_err();
        assert!(matches!(e, DslError::Syntax { line: 1, col: 9, .. }), "{e}");
    }

    #[test]
    fn shape_mismatch_names_the_rule() {
        let f = parse("type T; sys Bad : Id = mu(alpha . omega);").unwrap();
        let r = &f.check()[0];
        let Err(CheckError::Sys { source, .. }) = r else {
            panic!("{r:?}")
        };
        assert!(
            matches!(source, SystemError::ShapeMismatch { rule, .. } if rule.starts_with("α")),
            "{source}"
        );
    }

    #[test]
    fn complement_of_parsed_shapes() {
        let f = parse("type M; shape P = Id ^ M x Id _ (M + 1); shape C = Id _ M (+) Id ^ (M + 1);").unwrap();
        assert_eq!(&complement(f.shape("P").unwrap()), f.shape("C").unwrap());
    }
}
