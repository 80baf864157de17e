//! A small textual language for sets and systems of set equations.
//!
//! ```text
//! system   ::= decl* binding+
//! decl     ::= "atoms" NAME ("," NAME)* ";"
//! binding  ::= NAME "=" expr ";"
//! expr     ::= "{" (expr ("," expr)*)? "}"
//!            | "<" expr "," expr ">"              pair
//!            | NAT                                 von Neumann numeral
//!            | NAME                                atom or indeterminate
//!            | "let" NAME "=" expr
//!              (";" NAME "=" expr)* "in" NAME      local system, solved
//! NAME     ::= [A-Za-z_][A-Za-z0-9_]*
//! ```
//!
//! `#` starts a comment running to end of line. In a system file every free
//! name must be a binding or a declared atom; in a bare expression (the
//! command-line case) free names simply denote atoms. A let expression is a
//! little system of its own: its bindings may be circular, the whole thing
//! is solved on the spot, and its value is the value of the binding named
//! after `in`. Bindings at either level must be set expressions, not bare
//! names.
//!
//! [`print_canonical`] renders any set back into this language: well
//! founded sets of reasonable size as nested braces with members in
//! canonical order, everything else as one let expression over the
//! canonical picture. Parsing the output always reproduces the set.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::atom::Atom;
use crate::graph::NodeKind;
use crate::set::{Element, HSet, SetError};
use crate::system::{GenSystem, SystemError};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum DslError {
    #[error("{line}:{col}: expected {expected}, found {found}")]
    Parse {
        line: u32,
        col: u32,
        expected: String,
        found: String,
    },
    #[error("{line}:{col}: duplicate binding for {name:?}")]
    DuplicateBinding { line: u32, col: u32, name: String },
    #[error("{line}:{col}: atom {name:?} is declared twice")]
    DuplicateAtom { line: u32, col: u32, name: String },
    #[error("{line}:{col}: {name:?} is declared both as an atom and as a binding")]
    NameClash { line: u32, col: u32, name: String },
    #[error("{line}:{col}: unknown name {name:?}")]
    UnknownName { line: u32, col: u32, name: String },
    #[error("{line}:{col}: the body of a let must name one of its own bindings, and {name:?} does not")]
    LetBodyNotLocal { line: u32, col: u32, name: String },
    #[error("{line}:{col}: a binding cannot be a bare name; write a set expression")]
    BareNameBinding { line: u32, col: u32 },
    #[error(transparent)]
    Value(#[from] SetError),
    #[error(transparent)]
    System(#[from] SystemError),
}

impl DslError {
    pub fn is_resource_limit(&self) -> bool {
        match self {
            DslError::Value(e) => e.is_resource_limit(),
            DslError::System(e) => e.is_resource_limit(),
            _ => false,
        }
    }
}

/// Nesting depth cap for expressions, bounding parser and evaluator stacks.
const MAX_DEPTH: usize = 128;

/// Brace output longer than this falls back to the let form.
const BRACE_PRINT_LIMIT: u64 = 1 << 16;

/// Brace output nested deeper than this falls back to the let form, which
/// keeps every printed set parseable within [`MAX_DEPTH`].
const BRACE_PRINT_DEPTH: u32 = 64;

/// In the let form, a brace expansion this small is inlined even when the
/// node is shared by several parents; larger shared nodes get a binding so
/// their text is not duplicated.
const BRACE_INLINE_SHARED: u64 = 64;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Nat(u64),
    LBrace,
    RBrace,
    Lt,
    Gt,
    Comma,
    Semi,
    Equals,
    KwAtoms,
    KwLet,
    KwIn,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Name(s) => format!("{s:?}"),
            Tok::Nat(n) => n.to_string(),
            Tok::LBrace => "\"{\"".to_string(),
            Tok::RBrace => "\"}\"".to_string(),
            Tok::Lt => "\"<\"".to_string(),
            Tok::Gt => "\">\"".to_string(),
            Tok::Comma => "\",\"".to_string(),
            Tok::Semi => "\";\"".to_string(),
            Tok::Equals => "\"=\"".to_string(),
            Tok::KwAtoms => "\"atoms\"".to_string(),
            Tok::KwLet => "\"let\"".to_string(),
            Tok::KwIn => "\"in\"".to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

/// One expression of the language, tagged with its source position.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    kind: ExprKind,
    pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
enum ExprKind {
    Braces(Vec<Expr>),
    Pair(Box<Expr>, Box<Expr>),
    Nat(u64),
    Name(String),
    Let {
        bindings: Vec<(String, Expr, Pos)>,
        body: String,
    },
}

/// A parsed system file: atom declarations plus named bindings, checked for
/// duplicate names, clashes, bare-name bindings, and unknown names.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemAst {
    atoms: Vec<(String, Pos)>,
    bindings: Vec<(String, Expr, Pos)>,
}

impl SystemAst {
    pub fn atom_names(&self) -> impl Iterator<Item = &str> {
        self.atoms.iter().map(|(n, _)| n.as_str())
    }

    pub fn binding_names(&self) -> impl Iterator<Item = &str> {
        self.bindings.iter().map(|(n, _, _)| n.as_str())
    }

    /// True when every binding is a brace list of plain names, the form
    /// that maps straight onto flat equations.
    pub fn is_flat(&self) -> bool {
        self.bindings.iter().all(|(_, e, _)| match &e.kind {
            ExprKind::Braces(items) => items
                .iter()
                .all(|item| matches!(item.kind, ExprKind::Name(_))),
            _ => false,
        })
    }

    /// Evaluates every binding into a template and assembles the system.
    pub fn to_system(&self) -> Result<GenSystem, DslError> {
        let atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|(n, _)| Atom::intern(n).expect("lexer names are valid atom names"))
            .collect();
        let atom_names: BTreeSet<&str> = self.atoms.iter().map(|(n, _)| n.as_str()).collect();
        let mut frames: Vec<BTreeSet<String>> = vec![self
            .bindings
            .iter()
            .map(|(n, _, _)| n.clone())
            .collect()];
        let mut equations: Vec<(&str, HSet)> = Vec::new();
        for (name, expr, pos) in &self.bindings {
            let value = eval(expr, &mut frames, &Mode::Declared(&atom_names))?;
            let Element::Set(template) = value else {
                return Err(DslError::BareNameBinding {
                    line: pos.line,
                    col: pos.col,
                });
            };
            equations.push((name.as_str(), template));
        }
        let names: Vec<&str> = self.bindings.iter().map(|(n, _, _)| n.as_str()).collect();
        Ok(GenSystem::new(&names, &atoms, &equations)?)
    }
}

enum Mode<'a> {
    /// Free names must be declared atoms (system files).
    Declared(&'a BTreeSet<&'a str>),
    /// Free names become atoms on sight (command-line expressions).
    Auto,
}

fn eval(
    expr: &Expr,
    frames: &mut Vec<BTreeSet<String>>,
    mode: &Mode<'_>,
) -> Result<Element, DslError> {
    match &expr.kind {
        ExprKind::Name(name) => {
            let bound = frames.iter().rev().any(|f| f.contains(name));
            if bound {
                // Placeholder for an indeterminate of an enclosing system.
                return Ok(Element::Atom(
                    GenSystem::placeholder(name).expect("lexer names are valid"),
                ));
            }
            match mode {
                Mode::Declared(atoms) => {
                    if atoms.contains(name.as_str()) {
                        Ok(Element::Atom(Atom::intern(name).expect("declared atom")))
                    } else {
                        Err(DslError::UnknownName {
                            line: expr.pos.line,
                            col: expr.pos.col,
                            name: name.clone(),
                        })
                    }
                }
                Mode::Auto => Ok(Element::Atom(
                    Atom::intern(name).expect("lexer names are valid"),
                )),
            }
        }
        ExprKind::Nat(n) => Ok(Element::Set(HSet::natural(*n)?)),
        ExprKind::Braces(items) => {
            let members: Vec<Element> = items
                .iter()
                .map(|e| eval(e, frames, mode))
                .collect::<Result<_, _>>()?;
            Ok(Element::Set(HSet::set_of(&members)?))
        }
        ExprKind::Pair(a, b) => {
            let a = eval(a, frames, mode)?;
            let b = eval(b, frames, mode)?;
            Ok(Element::Set(HSet::kpair(&a, &b)?))
        }
        ExprKind::Let { bindings, body } => {
            let frame: BTreeSet<String> = bindings.iter().map(|(n, _, _)| n.clone()).collect();
            frames.push(frame);
            let mut equations: Vec<(&str, HSet)> = Vec::new();
            let mut outcome = Ok(());
            for (name, rhs, pos) in bindings {
                match eval(rhs, frames, mode) {
                    Ok(Element::Set(template)) => equations.push((name.as_str(), template)),
                    Ok(Element::Atom(_)) => {
                        outcome = Err(DslError::BareNameBinding {
                            line: pos.line,
                            col: pos.col,
                        });
                        break;
                    }
                    Err(e) => {
                        outcome = Err(e);
                        break;
                    }
                }
            }
            frames.pop();
            outcome?;
            // Everything in a template that is not bound right here passes
            // through the local solve as an ordinary atom.
            let names: Vec<&str> = bindings.iter().map(|(n, _, _)| n.as_str()).collect();
            let mut passthrough: BTreeSet<Atom> = BTreeSet::new();
            for (_, t) in &equations {
                for a in t.support() {
                    if !names.contains(&&*a.name()) {
                        passthrough.insert(a);
                    }
                }
            }
            let atom_list: Vec<Atom> = passthrough.into_iter().collect();
            let system = GenSystem::new(&names, &atom_list, &equations)?;
            let solution = system.solve()?;
            let value = solution
                .get(body)
                .expect("parser checked the body is a local binding")
                .clone();
            Ok(Element::Set(value))
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    at: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer {
            src: src.as_bytes(),
            at: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let b = *self.src.get(self.at)?;
        self.at += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.at).copied()
    }

    fn next_tok(&mut self) -> Result<(Tok, Pos), DslError> {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'#') => {
                    while let Some(b) = self.bump() {
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
        let pos = Pos {
            line: self.line,
            col: self.col,
        };
        let Some(b) = self.peek() else {
            return Ok((Tok::Eof, pos));
        };
        let tok = match b {
            b'{' => {
                self.bump();
                Tok::LBrace
            }
            b'}' => {
                self.bump();
                Tok::RBrace
            }
            b'<' => {
                self.bump();
                Tok::Lt
            }
            b'>' => {
                self.bump();
                Tok::Gt
            }
            b',' => {
                self.bump();
                Tok::Comma
            }
            b';' => {
                self.bump();
                Tok::Semi
            }
            b'=' => {
                self.bump();
                Tok::Equals
            }
            c if c.is_ascii_digit() => {
                let mut n: u64 = 0;
                while let Some(c) = self.peek() {
                    if c.is_ascii_digit() {
                        n = n
                            .checked_mul(10)
                            .and_then(|n| n.checked_add((c - b'0') as u64))
                            .ok_or(DslError::Parse {
                                line: pos.line,
                                col: pos.col,
                                expected: "a smaller number".to_string(),
                                found: "a numeral beyond 64 bits".to_string(),
                            })?;
                        self.bump();
                    } else {
                        break;
                    }
                }
                if self
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphabetic() || c == b'_')
                {
                    return Err(DslError::Parse {
                        line: pos.line,
                        col: pos.col,
                        expected: "a number or a name".to_string(),
                        found: "a name starting with a digit".to_string(),
                    });
                }
                Tok::Nat(n)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut s = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == b'_' {
                        s.push(c as char);
                        self.bump();
                    } else {
                        break;
                    }
                }
                match s.as_str() {
                    "atoms" => Tok::KwAtoms,
                    "let" => Tok::KwLet,
                    "in" => Tok::KwIn,
                    _ => Tok::Name(s),
                }
            }
            other => {
                return Err(DslError::Parse {
                    line: pos.line,
                    col: pos.col,
                    expected: "a token".to_string(),
                    found: format!("{:?}", other as char),
                })
            }
        };
        Ok((tok, pos))
    }
}

struct Parser<'a> {
    lx: Lexer<'a>,
    tok: Tok,
    pos: Pos,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Parser<'a>, DslError> {
        let mut lx = Lexer::new(src);
        let (tok, pos) = lx.next_tok()?;
        Ok(Parser { lx, tok, pos })
    }

    fn advance(&mut self) -> Result<(), DslError> {
        let (tok, pos) = self.lx.next_tok()?;
        self.tok = tok;
        self.pos = pos;
        Ok(())
    }

    fn err(&self, expected: &str) -> DslError {
        DslError::Parse {
            line: self.pos.line,
            col: self.pos.col,
            expected: expected.to_string(),
            found: self.tok.describe(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), DslError> {
        if self.tok == want {
            self.advance()
        } else {
            Err(self.err(what))
        }
    }

    fn name(&mut self, what: &str) -> Result<(String, Pos), DslError> {
        if let Tok::Name(s) = &self.tok {
            let out = (s.clone(), self.pos);
            self.advance()?;
            Ok(out)
        } else {
            Err(self.err(what))
        }
    }

    fn expr(&mut self, depth: usize) -> Result<Expr, DslError> {
        if depth > MAX_DEPTH {
            return Err(DslError::Parse {
                line: self.pos.line,
                col: self.pos.col,
                expected: format!("nesting no deeper than {MAX_DEPTH}"),
                found: "a deeper expression".to_string(),
            });
        }
        let pos = self.pos;
        match self.tok.clone() {
            Tok::LBrace => {
                self.advance()?;
                let mut items = Vec::new();
                if self.tok != Tok::RBrace {
                    loop {
                        items.push(self.expr(depth + 1)?);
                        match self.tok {
                            Tok::Comma => self.advance()?,
                            Tok::RBrace => break,
                            _ => return Err(self.err("\",\" or \"}\"")),
                        }
                    }
                }
                self.advance()?;
                Ok(Expr {
                    kind: ExprKind::Braces(items),
                    pos,
                })
            }
            Tok::Lt => {
                self.advance()?;
                let a = self.expr(depth + 1)?;
                self.expect(Tok::Comma, "\",\"")?;
                let b = self.expr(depth + 1)?;
                self.expect(Tok::Gt, "\">\"")?;
                Ok(Expr {
                    kind: ExprKind::Pair(Box::new(a), Box::new(b)),
                    pos,
                })
            }
            Tok::Nat(n) => {
                self.advance()?;
                Ok(Expr {
                    kind: ExprKind::Nat(n),
                    pos,
                })
            }
            Tok::Name(s) => {
                self.advance()?;
                Ok(Expr {
                    kind: ExprKind::Name(s),
                    pos,
                })
            }
            Tok::KwLet => {
                self.advance()?;
                let mut bindings: Vec<(String, Expr, Pos)> = Vec::new();
                loop {
                    let (name, npos) = self.name("a binding name")?;
                    if bindings.iter().any(|(n, _, _)| *n == name) {
                        return Err(DslError::DuplicateBinding {
                            line: npos.line,
                            col: npos.col,
                            name,
                        });
                    }
                    self.expect(Tok::Equals, "\"=\"")?;
                    let rhs = self.expr(depth + 1)?;
                    if let ExprKind::Name(_) = rhs.kind {
                        return Err(DslError::BareNameBinding {
                            line: rhs.pos.line,
                            col: rhs.pos.col,
                        });
                    }
                    bindings.push((name, rhs, npos));
                    match self.tok {
                        Tok::Semi => self.advance()?,
                        Tok::KwIn => break,
                        _ => return Err(self.err("\";\" or \"in\"")),
                    }
                }
                self.advance()?;
                let (body, bpos) = self.name("the name of one of the let's bindings")?;
                if !bindings.iter().any(|(n, _, _)| *n == body) {
                    return Err(DslError::LetBodyNotLocal {
                        line: bpos.line,
                        col: bpos.col,
                        name: body,
                    });
                }
                Ok(Expr {
                    kind: ExprKind::Let { bindings, body },
                    pos,
                })
            }
            _ => Err(self.err("an expression")),
        }
    }
}

/// Parses a system file: atom declarations, then one binding per equation.
pub fn parse_system(src: &str) -> Result<SystemAst, DslError> {
    let mut p = Parser::new(src)?;
    let mut atoms: Vec<(String, Pos)> = Vec::new();
    while p.tok == Tok::KwAtoms {
        p.advance()?;
        loop {
            let (name, pos) = p.name("an atom name")?;
            if atoms.iter().any(|(n, _)| *n == name) {
                return Err(DslError::DuplicateAtom {
                    line: pos.line,
                    col: pos.col,
                    name,
                });
            }
            atoms.push((name, pos));
            match p.tok {
                Tok::Comma => p.advance()?,
                Tok::Semi => break,
                _ => return Err(p.err("\",\" or \";\"")),
            }
        }
        p.advance()?;
    }
    let mut bindings: Vec<(String, Expr, Pos)> = Vec::new();
    while p.tok != Tok::Eof {
        let (name, pos) = p.name("a binding or end of file")?;
        if bindings.iter().any(|(n, _, _)| *n == name) {
            return Err(DslError::DuplicateBinding {
                line: pos.line,
                col: pos.col,
                name,
            });
        }
        if atoms.iter().any(|(n, _)| *n == name) {
            return Err(DslError::NameClash {
                line: pos.line,
                col: pos.col,
                name,
            });
        }
        p.expect(Tok::Equals, "\"=\"")?;
        let rhs = p.expr(0)?;
        if let ExprKind::Name(_) = rhs.kind {
            return Err(DslError::BareNameBinding {
                line: rhs.pos.line,
                col: rhs.pos.col,
            });
        }
        p.expect(Tok::Semi, "\";\"")?;
        bindings.push((name, rhs, pos));
    }
    if bindings.is_empty() {
        return Err(p.err("at least one binding"));
    }
    let ast = SystemAst { atoms, bindings };
    resolve_free_names(&ast)?;
    Ok(ast)
}

/// Every name must bottom out at a binding, an enclosing let binding, or a
/// declared atom.
fn resolve_free_names(ast: &SystemAst) -> Result<(), DslError> {
    let atoms: BTreeSet<&str> = ast.atoms.iter().map(|(n, _)| n.as_str()).collect();
    let mut scope: Vec<BTreeSet<&str>> =
        vec![ast.bindings.iter().map(|(n, _, _)| n.as_str()).collect()];

    fn walk<'a>(
        expr: &'a Expr,
        scope: &mut Vec<BTreeSet<&'a str>>,
        atoms: &BTreeSet<&str>,
    ) -> Result<(), DslError> {
        match &expr.kind {
            ExprKind::Name(name) => {
                let known = scope.iter().rev().any(|f| f.contains(name.as_str()))
                    || atoms.contains(name.as_str());
                if known {
                    Ok(())
                } else {
                    Err(DslError::UnknownName {
                        line: expr.pos.line,
                        col: expr.pos.col,
                        name: name.clone(),
                    })
                }
            }
            ExprKind::Nat(_) => Ok(()),
            ExprKind::Braces(items) => items.iter().try_for_each(|e| walk(e, scope, atoms)),
            ExprKind::Pair(a, b) => {
                walk(a, scope, atoms)?;
                walk(b, scope, atoms)
            }
            ExprKind::Let { bindings, .. } => {
                scope.push(bindings.iter().map(|(n, _, _)| n.as_str()).collect());
                let out = bindings
                    .iter()
                    .try_for_each(|(_, e, _)| walk(e, scope, atoms));
                scope.pop();
                out
            }
        }
    }

    for (_, expr, _) in &ast.bindings {
        walk(expr, &mut scope, &atoms)?;
    }
    Ok(())
}

/// Parses a single expression (trailing input is an error).
pub fn parse_expr(src: &str) -> Result<Expr, DslError> {
    let mut p = Parser::new(src)?;
    let e = p.expr(0)?;
    if p.tok != Tok::Eof {
        return Err(p.err("end of input"));
    }
    Ok(e)
}

/// Parses and evaluates an expression; free names denote atoms.
pub fn eval_expr(src: &str) -> Result<Element, DslError> {
    let e = parse_expr(src)?;
    eval(&e, &mut Vec::new(), &Mode::Auto)
}

/// Renders a set in the language: deterministic, canonical, and parseable
/// back to the same set.
///
/// A well-founded set of reasonable extent prints as nested braces with
/// members in canonical order. Anything else prints as one let expression
/// whose bindings, named v0, v1, ... in canonical order, cover exactly the
/// nodes that cannot be written as braces: those with a cycle below them,
/// expansions past the size or depth limits, or large expansions shared by
/// several parents. Well-founded parts below a binding still appear as
/// braces.
pub fn print_canonical(a: &HSet) -> String {
    let g = a.picture();
    let n = g.node_count();
    let root = g.root().index();
    let (finite, parents) = finite_expansion(g);
    let (sizes, depths) = brace_extent(g, &finite);
    let braceable =
        |v: usize| finite[v] && sizes[v] <= BRACE_PRINT_LIMIT && depths[v] <= BRACE_PRINT_DEPTH;
    if braceable(root) {
        let mut out = String::new();
        write_expansion(g, g.root().0, &vec![None; n], &mut out);
        return out;
    }
    // Inline a node only when duplication is harmless: tiny, or not shared.
    let inline: Vec<bool> = (0..n)
        .map(|v| {
            braceable(v)
                && matches!(g.kind(crate::graph::NodeId(v as u32)), NodeKind::SetNode)
                && (sizes[v] <= BRACE_INLINE_SHARED || parents[v] <= 1)
        })
        .collect();
    let_print(g, &inline)
}

/// Prints a member the way the language spells it: sets canonically, atoms
/// by name.
pub fn print_element(e: &Element) -> String {
    match e {
        Element::Set(s) => print_canonical(s),
        Element::Atom(a) => a.name().to_string(),
    }
}

/// Which nodes have a finite brace expansion (no cycle anywhere below
/// them), plus each node's number of distinct parents.
///
/// Peels the graph from its sinks: a node is finite once all its children
/// are, and nodes on or above cycles are never peeled.
fn finite_expansion(g: &crate::graph::ApGraph) -> (Vec<bool>, Vec<u32>) {
    let n = g.node_count();
    let mut parents: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut pending: Vec<usize> = vec![0; n];
    for v in 0..n as u32 {
        let kids = g.raw_children(v);
        pending[v as usize] = kids.len();
        for &w in kids {
            parents[w as usize].push(v);
        }
    }
    let mut finite = vec![false; n];
    let mut queue: Vec<u32> = (0..n as u32).filter(|&v| pending[v as usize] == 0).collect();
    while let Some(v) = queue.pop() {
        finite[v as usize] = true;
        for &p in &parents[v as usize] {
            pending[p as usize] -= 1;
            if pending[p as usize] == 0 {
                queue.push(p);
            }
        }
    }
    let parent_counts = parents.iter().map(|p| p.len() as u32).collect();
    (finite, parent_counts)
}

/// Rendered length and brace nesting depth of each finite node's expansion,
/// saturating far above their limits. Entries for non-finite nodes are
/// meaningless.
fn brace_extent(g: &crate::graph::ApGraph, finite: &[bool]) -> (Vec<u64>, Vec<u32>) {
    // Children precede parents in the finish order of an iterative DFS,
    // whenever the nodes involved have no cycle below them.
    let n = g.node_count();
    let mut order: Vec<u32> = Vec::with_capacity(n);
    let mut state = vec![0u8; n];
    for s in 0..n as u32 {
        if state[s as usize] != 0 {
            continue;
        }
        let mut stack = vec![(s, 0usize)];
        state[s as usize] = 1;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            let kids = g.raw_children(v);
            if let Some(&w) = kids.get(*i) {
                *i += 1;
                if state[w as usize] == 0 {
                    state[w as usize] = 1;
                    stack.push((w, 0));
                }
            } else {
                state[v as usize] = 2;
                order.push(v);
                stack.pop();
            }
        }
    }
    let mut sizes = vec![0u64; n];
    let mut depths = vec![0u32; n];
    for &v in &order {
        if !finite[v as usize] {
            continue;
        }
        let node = crate::graph::NodeId(v);
        match g.kind(node) {
            NodeKind::AtomLeaf(a) => sizes[v as usize] = a.name().len() as u64,
            NodeKind::SetNode => {
                let kids = g.raw_children(v);
                let k = kids.len() as u64;
                let inner: u64 = kids
                    .iter()
                    .map(|&w| sizes[w as usize])
                    .fold(0u64, u64::saturating_add);
                let seps = if k > 1 { 2 * (k - 1) } else { 0 };
                sizes[v as usize] = 2u64.saturating_add(inner).saturating_add(seps);
                let below = kids.iter().map(|&w| depths[w as usize]).max().unwrap_or(0);
                depths[v as usize] = below.saturating_add(1);
            }
        };
    }
    (sizes, depths)
}

/// Writes the expression for `start` into `out`: nested braces, except that
/// a node with an entry in `bound` is spelled by that name instead of being
/// expanded. `start` itself is always expanded, so the caller must not pass
/// a bound node.
fn write_expansion(
    g: &crate::graph::ApGraph,
    start: u32,
    bound: &[Option<String>],
    out: &mut String,
) {
    // Frames hold a set node being expanded and the next child position.
    let mut stack: Vec<(u32, usize)> = Vec::new();
    let emit = |out: &mut String, stack: &mut Vec<(u32, usize)>, v: u32, expand: bool| {
        if !expand {
            if let Some(name) = &bound[v as usize] {
                out.push_str(name);
                return;
            }
        }
        match g.kind(crate::graph::NodeId(v)) {
            NodeKind::AtomLeaf(a) => out.push_str(&a.name()),
            NodeKind::SetNode => {
                out.push('{');
                stack.push((v, 0));
            }
        }
    };
    emit(out, &mut stack, start, true);
    while let Some(&mut (v, ref mut i)) = stack.last_mut() {
        let kids = g.raw_children(v);
        if let Some(&w) = kids.get(*i) {
            if *i > 0 {
                out.push_str(", ");
            }
            *i += 1;
            emit(out, &mut stack, w, false);
        } else {
            out.push('}');
            stack.pop();
        }
    }
}

/// Let form: one binding per non-inlined set node, in canonical id order
/// with dense machine-chosen names; inlined well-founded parts appear as
/// braces at their use sites.
fn let_print(g: &crate::graph::ApGraph, inline: &[bool]) -> String {
    let mut prefix = String::from("v");
    let numbered = |prefix: &str, name: &str| {
        name.strip_prefix(prefix)
            .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
    };
    let atom_names: Vec<String> = g
        .nodes()
        .filter_map(|v| match g.kind(v) {
            NodeKind::AtomLeaf(a) => Some(a.name().to_string()),
            NodeKind::SetNode => None,
        })
        .collect();
    while atom_names.iter().any(|n| numbered(&prefix, n)) {
        prefix.push('v');
    }
    let mut bound: Vec<Option<String>> = vec![None; g.node_count()];
    let mut counter = 0u32;
    for v in g.nodes() {
        if matches!(g.kind(v), NodeKind::SetNode) && !inline[v.index()] {
            bound[v.index()] = Some(format!("{prefix}{counter}"));
            counter += 1;
        }
    }
    let mut bindings = Vec::new();
    for v in g.nodes() {
        let Some(name) = &bound[v.index()] else {
            continue;
        };
        let mut rhs = String::new();
        rhs.push('{');
        for (i, w) in g.children(v).enumerate() {
            if i > 0 {
                rhs.push_str(", ");
            }
            match (&bound[w.index()], g.kind(w)) {
                (Some(child), _) => rhs.push_str(child),
                (None, NodeKind::AtomLeaf(a)) => rhs.push_str(&a.name()),
                (None, NodeKind::SetNode) => write_expansion(g, w.0, &bound, &mut rhs),
            }
        }
        rhs.push('}');
        bindings.push(format!("{name} = {rhs}"));
    }
    let body = bound[g.root().index()]
        .as_ref()
        .expect("an unbraceable root is always bound")
        .clone();
    format!("let {} in {}", bindings.join("; "), body)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expr_set(src: &str) -> HSet {
        match eval_expr(src).unwrap() {
            Element::Set(s) => s,
            Element::Atom(a) => panic!("{src} evaluated to atom {a}"),
        }
    }

    #[test]
    fn braces_numerals_and_pairs_evaluate() {
        assert_eq!(expr_set("{}"), HSet::empty());
        assert_eq!(expr_set("2"), HSet::natural(2).unwrap());
        assert_eq!(expr_set("{{}, {{}}}"), HSet::natural(2).unwrap());
        let p = Element::Atom(Atom::intern("p").unwrap());
        let q = Element::Atom(Atom::intern("q").unwrap());
        assert_eq!(expr_set("<p, q>"), HSet::kpair(&p, &q).unwrap());
        assert_eq!(eval_expr("p").unwrap(), p);
    }

    #[test]
    fn comments_and_whitespace_are_skipped() {
        let src = "{ # a comment\n  p , # another\n  {} }\n";
        let p = Element::Atom(Atom::intern("p").unwrap());
        assert_eq!(
            expr_set(src),
            HSet::set_of(&[p, Element::Set(HSet::empty())]).unwrap()
        );
    }

    #[test]
    fn systems_solve_through_the_language() {
        let ast = parse_system("atoms p, q;\nx = {x, y};\ny = {p, q, y, z};\nz = {p, x, y};\n")
            .unwrap();
        assert!(ast.is_flat());
        let sys = ast.to_system().unwrap();
        let sol = sys.solve().unwrap();
        let x = sol.get("x").unwrap();
        let y = sol.get("y").unwrap();
        assert_eq!(
            *x,
            HSet::set_of(&[Element::Set(x.clone()), Element::Set(y.clone())]).unwrap()
        );
    }

    #[test]
    fn omega_system_prints_as_the_golden_let() {
        let ast = parse_system("x = {x};").unwrap();
        let sol = ast.to_system().unwrap().solve().unwrap();
        let x = sol.get("x").unwrap();
        assert_eq!(*x, HSet::omega());
        assert_eq!(print_canonical(x), "let v0 = {v0} in v0");
    }

    #[test]
    fn nested_sets_are_not_flat() {
        let ast = parse_system("x = {{x}};").unwrap();
        assert!(!ast.is_flat());
        let ast = parse_system("x = {y}; y = {};").unwrap();
        assert!(ast.is_flat());
    }

    #[test]
    fn let_expressions_solve_locally() {
        assert_eq!(expr_set("let u = {} in u"), HSet::empty());
        assert_eq!(expr_set("let u = {u} in u"), HSet::omega());
        // Mutual recursion inside one let.
        let two_cycle = expr_set("let u = {w}; w = {u, p} in u");
        assert!(!two_cycle.is_well_founded());
        assert_eq!(two_cycle.cardinality(), 1);
    }

    #[test]
    fn let_bindings_shadow_outer_names() {
        // The inner a is the let's own; the outer binding never enters.
        let ast = parse_system("a = {}; x = let a = {a} in a;").unwrap();
        let sol = ast.to_system().unwrap().solve().unwrap();
        assert_eq!(sol.get("x").unwrap(), &HSet::omega());
        assert_eq!(sol.get("a").unwrap(), &HSet::empty());
    }

    #[test]
    fn let_values_can_reference_outer_bindings() {
        // y = {x} via a let that mentions the outer x: x = {y} and
        // y = {x} makes both omega.
        let ast = parse_system("x = {y}; y = let u = {x} in u;").unwrap();
        let sol = ast.to_system().unwrap().solve().unwrap();
        assert_eq!(sol.get("x").unwrap(), &HSet::omega());
        assert_eq!(sol.get("y").unwrap(), &HSet::omega());
    }

    #[test]
    fn undeclared_names_fail_in_system_files() {
        let err = parse_system("x = {p};").unwrap_err();
        assert_eq!(
            err,
            DslError::UnknownName {
                line: 1,
                col: 6,
                name: "p".to_string()
            }
        );
        assert!(parse_system("atoms p;\nx = {p};").is_ok());
    }

    #[test]
    fn structural_mistakes_are_caught() {
        assert!(matches!(
            parse_system("x = {}; x = {};").unwrap_err(),
            DslError::DuplicateBinding { name, .. } if name == "x"
        ));
        assert!(matches!(
            parse_system("atoms p, p; x = {};").unwrap_err(),
            DslError::DuplicateAtom { name, .. } if name == "p"
        ));
        assert!(matches!(
            parse_system("atoms x; x = {};").unwrap_err(),
            DslError::NameClash { name, .. } if name == "x"
        ));
        assert!(matches!(
            parse_system("x = {}; y = x;").unwrap_err(),
            DslError::BareNameBinding { .. }
        ));
        assert!(matches!(
            parse_system("x = let u = {} in w;").unwrap_err(),
            DslError::LetBodyNotLocal { name, .. } if name == "w"
        ));
        assert!(matches!(
            parse_system("x = let u = {}; u = {} in u;").unwrap_err(),
            DslError::DuplicateBinding { name, .. } if name == "u"
        ));
        assert!(matches!(parse_system("").unwrap_err(), DslError::Parse { .. }));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_expr("{p, }").unwrap_err();
        assert_eq!(
            err,
            DslError::Parse {
                line: 1,
                col: 5,
                expected: "an expression".to_string(),
                found: "\"}\"".to_string()
            }
        );
        let DslError::Parse { line, col, .. } = parse_expr("{\n  p q\n}").unwrap_err() else {
            panic!("expected parse error");
        };
        assert_eq!((line, col), (2, 5));
    }

    #[test]
    fn deep_nesting_is_rejected_not_fatal() {
        let depth = 2000;
        let src = format!("{}{}", "{".repeat(depth), "}".repeat(depth));
        assert!(matches!(parse_expr(&src), Err(DslError::Parse { .. })));
    }

    #[test]
    fn golden_prints() {
        assert_eq!(print_canonical(&HSet::empty()), "{}");
        assert_eq!(
            print_canonical(&HSet::natural(2).unwrap()),
            "{{}, {{}}}"
        );
        assert_eq!(print_canonical(&HSet::omega()), "let v0 = {v0} in v0");
    }

    #[test]
    fn printing_round_trips() {
        let p = Element::Atom(Atom::intern("p").unwrap());
        let q = Element::Atom(Atom::intern("q").unwrap());
        let samples = vec![
            HSet::empty(),
            HSet::omega(),
            HSet::natural(4).unwrap(),
            HSet::set_of(&[p.clone(), Element::Set(HSet::omega())]).unwrap(),
            HSet::kpair(&p, &q).unwrap(),
            expr_set("let u = {w, p}; w = {u, {}} in w"),
            HSet::natural(3).unwrap().power_set().unwrap(),
        ];
        for s in samples {
            let text = print_canonical(&s);
            assert_eq!(expr_set(&text), s, "{text}");
        }
    }

    #[test]
    fn mixed_values_inline_their_well_founded_parts() {
        let mixed = HSet::set_of(&[Element::Set(HSet::omega()), Element::Set(HSet::empty())])
            .unwrap();
        let text = print_canonical(&mixed);
        assert_eq!(text, "let v0 = {v0}; v1 = {{}, v0} in v1");
        assert_eq!(expr_set(&text), mixed);
    }

    #[test]
    fn deeply_nested_sets_print_as_lets_and_round_trip() {
        let mut chain = HSet::empty();
        for _ in 0..300 {
            chain = HSet::set_of(&[Element::Set(chain)]).unwrap();
        }
        let text = print_canonical(&chain);
        assert!(text.starts_with("let "), "brace depth would defeat parsing");
        assert_eq!(expr_set(&text), chain);
    }

    #[test]
    fn huge_well_founded_sets_fall_back_to_let_form() {
        let big = HSet::natural(40).unwrap();
        let text = print_canonical(&big);
        assert!(text.starts_with("let "), "brace form would be astronomic");
        assert_eq!(expr_set(&text), big);
    }

    #[test]
    fn let_print_dodges_colliding_atom_names() {
        let v0 = Element::Atom(Atom::intern("v0").unwrap());
        let sys = parse_system("atoms v0;\nx = {x, v0};").unwrap();
        let sol = sys.to_system().unwrap().solve().unwrap();
        let x = sol.get("x").unwrap();
        let text = print_canonical(x);
        assert!(text.starts_with("let vv"), "{text}");
        let back = expr_set(&text);
        assert_eq!(&back, x);
        assert!(back.contains(&v0));
    }

    #[test]
    fn canonical_order_puts_members_sets_first() {
        let p = Element::Atom(Atom::intern("p").unwrap());
        let s = HSet::set_of(&[p.clone(), Element::Set(HSet::empty())]).unwrap();
        assert_eq!(print_canonical(&s), "{{}, p}");
    }
}
