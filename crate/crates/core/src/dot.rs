//! DOT interchange for membership graphs, covering a small digraph subset.
//!
//! Set nodes are circles named `n0, n1, ...`, atom leaves are boxes named
//! `a0, a1, ...` with the atom in `label`, and exactly one node carries
//! `root=true`:
//!
//! ```text
//! digraph H {
//!   n0 [shape=circle, root=true];
//!   a0 [shape=box, label="p"];
//!   n0 -> a0;
//! }
//! ```
//!
//! [`to_dot`] writes nodes in id order with the two name counters running
//! independently, and [`from_dot`] assigns ids in declaration order, so a
//! graph round-trips through DOT unchanged, ids included.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::atom::Atom;
use crate::graph::{build_graph, ApGraph, GraphError, NodeId, NodeKind};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum DotError {
    #[error("{line}:{col}: expected {expected}, found {found}")]
    Parse {
        line: u32,
        col: u32,
        expected: String,
        found: String,
    },
    #[error("{line}:{col}: node {name:?} is declared twice")]
    DuplicateNode { line: u32, col: u32, name: String },
    #[error("{line}:{col}: edge endpoint {name:?} is not a declared node")]
    UndeclaredNode { line: u32, col: u32, name: String },
    #[error("{line}:{col}: {name:?} is an atom box and cannot have outgoing edges")]
    EdgeFromAtom { line: u32, col: u32, name: String },
    #[error("{line}:{col}: bad atom label {label:?}")]
    BadLabel { line: u32, col: u32, label: String },
    #[error("no node carries root=true")]
    MissingRoot,
    #[error("{line}:{col}: root=true appears on more than one node")]
    AmbiguousRoot { line: u32, col: u32 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Renders the graph in the DOT subset. Deterministic: nodes in id order,
/// edges grouped by source in child order.
pub fn to_dot(g: &ApGraph) -> String {
    let names: Vec<String> = node_names(g);
    let mut out = String::from("digraph H {\n");
    for v in g.nodes() {
        let mut attrs = match g.kind(v) {
            NodeKind::SetNode => "shape=circle".to_string(),
            NodeKind::AtomLeaf(a) => format!("shape=box, label=\"{}\"", a.name()),
        };
        if v == g.root() {
            attrs.push_str(", root=true");
        }
        let _ = writeln!(out, "  {} [{}];", names[v.index()], attrs);
    }
    for v in g.nodes() {
        for w in g.children(v) {
            let _ = writeln!(out, "  {} -> {};", names[v.index()], names[w.index()]);
        }
    }
    out.push_str("}\n");
    out
}

fn node_names(g: &ApGraph) -> Vec<String> {
    let mut names = Vec::with_capacity(g.node_count());
    let mut set_count = 0usize;
    let mut atom_count = 0usize;
    for v in g.nodes() {
        names.push(match g.kind(v) {
            NodeKind::SetNode => {
                set_count += 1;
                format!("n{}", set_count - 1)
            }
            NodeKind::AtomLeaf(_) => {
                atom_count += 1;
                format!("a{}", atom_count - 1)
            }
        });
    }
    names
}

#[derive(Debug, PartialEq, Clone)]
enum Tok {
    Ident(String),
    Str(String),
    Arrow,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Equals,
    Comma,
    Semi,
    Eof,
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

    /// Next token plus the position where it starts.
    fn next_tok(&mut self) -> Result<(Tok, u32, u32), DotError> {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'/') if self.src.get(self.at + 1) == Some(&b'/') => {
                    while let Some(b) = self.bump() {
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
        let (line, col) = (self.line, self.col);
        let Some(b) = self.peek() else {
            return Ok((Tok::Eof, line, col));
        };
        let tok = match b {
            b'[' => {
                self.bump();
                Tok::LBracket
            }
            b']' => {
                self.bump();
                Tok::RBracket
            }
            b'{' => {
                self.bump();
                Tok::LBrace
            }
            b'}' => {
                self.bump();
                Tok::RBrace
            }
            b'=' => {
                self.bump();
                Tok::Equals
            }
            b',' => {
                self.bump();
                Tok::Comma
            }
            b';' => {
                self.bump();
                Tok::Semi
            }
            b'-' => {
                self.bump();
                if self.peek() == Some(b'>') {
                    self.bump();
                    Tok::Arrow
                } else {
                    return Err(DotError::Parse {
                        line,
                        col,
                        expected: "\"->\"".to_string(),
                        found: "\"-\"".to_string(),
                    });
                }
            }
            b'"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        Some(b'"') => break,
                        Some(c) => s.push(c as char),
                        None => {
                            return Err(DotError::Parse {
                                line,
                                col,
                                expected: "closing quote".to_string(),
                                found: "end of input".to_string(),
                            })
                        }
                    }
                }
                Tok::Str(s)
            }
            c if c.is_ascii_alphanumeric() || c == b'_' => {
                let mut s = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == b'_' {
                        s.push(c as char);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            other => {
                return Err(DotError::Parse {
                    line,
                    col,
                    expected: "a token".to_string(),
                    found: format!("{:?}", other as char),
                })
            }
        };
        Ok((tok, line, col))
    }
}

struct Parser<'a> {
    lx: Lexer<'a>,
    tok: Tok,
    line: u32,
    col: u32,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Parser<'a>, DotError> {
        let mut lx = Lexer::new(src);
        let (tok, line, col) = lx.next_tok()?;
        Ok(Parser { lx, tok, line, col })
    }

    fn advance(&mut self) -> Result<Tok, DotError> {
        let (tok, line, col) = self.lx.next_tok()?;
        self.line = line;
        self.col = col;
        Ok(std::mem::replace(&mut self.tok, tok))
    }

    fn err(&self, expected: &str) -> DotError {
        DotError::Parse {
            line: self.line,
            col: self.col,
            expected: expected.to_string(),
            found: match &self.tok {
                Tok::Ident(s) => format!("{s:?}"),
                Tok::Str(s) => format!("\"{s}\""),
                Tok::Eof => "end of input".to_string(),
                t => format!("{t:?}"),
            },
        }
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), DotError> {
        if &self.tok == want {
            self.advance()?;
            Ok(())
        } else {
            Err(self.err(what))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, DotError> {
        if let Tok::Ident(s) = &self.tok {
            let s = s.clone();
            self.advance()?;
            Ok(s)
        } else {
            Err(self.err(what))
        }
    }
}

#[derive(Default)]
struct NodeAttrs {
    shape: Option<String>,
    label: Option<String>,
    root: bool,
}

/// Parses the DOT subset back into a graph. Ids follow declaration order,
/// and the graph is validated and trimmed by [`build_graph`].
pub fn from_dot(src: &str) -> Result<ApGraph, DotError> {
    Ok(from_dot_with_names(src)?.0)
}

/// Like [`from_dot`], but also returns the source file's name for each node
/// of the parsed graph, index-aligned with the graph's ids. Nodes dropped
/// by trimming lose their names along with everything else.
pub fn from_dot_with_names(src: &str) -> Result<(ApGraph, Vec<String>), DotError> {
    let (kinds, edges, root, names) = parse_statements(src)?;
    // Mirror the trim: reachable nodes keep their declaration order.
    let mut reach = vec![false; kinds.len()];
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); kinds.len()];
    for &(from, to) in &edges {
        adj[from.index()].push(to.0);
    }
    reach[root as usize] = true;
    let mut queue = vec![root];
    while let Some(v) = queue.pop() {
        for &w in &adj[v as usize] {
            if !reach[w as usize] {
                reach[w as usize] = true;
                queue.push(w);
            }
        }
    }
    let kept_names: Vec<String> = names
        .into_iter()
        .enumerate()
        .filter(|(i, _)| reach[*i])
        .map(|(_, n)| n)
        .collect();
    let g = build_graph(kinds, &edges, NodeId(root))?;
    debug_assert_eq!(kept_names.len(), g.node_count());
    Ok((g, kept_names))
}

type Statements = (Vec<NodeKind>, Vec<(NodeId, NodeId)>, u32, Vec<String>);

fn parse_statements(src: &str) -> Result<Statements, DotError> {
    let mut p = Parser::new(src)?;
    match &p.tok {
        Tok::Ident(kw) if kw == "digraph" => {
            p.advance()?;
        }
        _ => return Err(p.err("\"digraph\"")),
    }
    if matches!(p.tok, Tok::Ident(_)) {
        p.advance()?;
    }
    p.expect(&Tok::LBrace, "\"{\"")?;

    let mut kinds: Vec<NodeKind> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, u32> = HashMap::new();
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    let mut root: Option<u32> = None;

    while p.tok != Tok::RBrace {
        let (stmt_line, stmt_col) = (p.line, p.col);
        let name = p.ident("a node name or \"}\"")?;
        match &p.tok {
            Tok::LBracket => {
                p.advance()?;
                let attrs = parse_attrs(&mut p)?;
                p.expect(&Tok::Semi, "\";\"")?;
                if index.contains_key(&name) {
                    return Err(DotError::DuplicateNode {
                        line: stmt_line,
                        col: stmt_col,
                        name,
                    });
                }
                let kind = match attrs.shape.as_deref() {
                    Some("circle") => NodeKind::SetNode,
                    Some("box") => {
                        let label = attrs.label.clone().ok_or_else(|| DotError::Parse {
                            line: stmt_line,
                            col: stmt_col,
                            expected: "a label on the box node".to_string(),
                            found: "none".to_string(),
                        })?;
                        let atom = Atom::intern(&label).map_err(|_| DotError::BadLabel {
                            line: stmt_line,
                            col: stmt_col,
                            label: label.clone(),
                        })?;
                        NodeKind::AtomLeaf(atom)
                    }
                    _ => {
                        return Err(DotError::Parse {
                            line: stmt_line,
                            col: stmt_col,
                            expected: "shape=circle or shape=box".to_string(),
                            found: attrs.shape.unwrap_or_else(|| "no shape".to_string()),
                        })
                    }
                };
                if attrs.root {
                    if root.is_some() {
                        return Err(DotError::AmbiguousRoot {
                            line: stmt_line,
                            col: stmt_col,
                        });
                    }
                    root = Some(kinds.len() as u32);
                }
                index.insert(name.clone(), kinds.len() as u32);
                names.push(name);
                kinds.push(kind);
            }
            Tok::Arrow => {
                p.advance()?;
                let to = p.ident("a target node name")?;
                p.expect(&Tok::Semi, "\";\"")?;
                let lookup = |n: &str| {
                    index.get(n).copied().ok_or_else(|| DotError::UndeclaredNode {
                        line: stmt_line,
                        col: stmt_col,
                        name: n.to_string(),
                    })
                };
                let from_id = lookup(&name)?;
                let to_id = lookup(&to)?;
                if matches!(kinds[from_id as usize], NodeKind::AtomLeaf(_)) {
                    return Err(DotError::EdgeFromAtom {
                        line: stmt_line,
                        col: stmt_col,
                        name,
                    });
                }
                edges.push((NodeId(from_id), NodeId(to_id)));
            }
            _ => return Err(p.err("\"[\" or \"->\"")),
        }
    }
    let root = root.ok_or(DotError::MissingRoot)?;
    Ok((kinds, edges, root, names))
}

fn parse_attrs(p: &mut Parser<'_>) -> Result<NodeAttrs, DotError> {
    let mut attrs = NodeAttrs::default();
    loop {
        let key = p.ident("an attribute name")?;
        p.expect(&Tok::Equals, "\"=\"")?;
        let value = match &p.tok {
            Tok::Ident(s) => {
                let s = s.clone();
                p.advance()?;
                s
            }
            Tok::Str(s) => {
                let s = s.clone();
                p.advance()?;
                s
            }
            _ => return Err(p.err("an attribute value")),
        };
        match key.as_str() {
            "shape" => attrs.shape = Some(value),
            "label" => attrs.label = Some(value),
            "root" => attrs.root = value == "true",
            _ => {}
        }
        match p.tok {
            Tok::Comma => {
                p.advance()?;
            }
            Tok::RBracket => {
                p.advance()?;
                return Ok(attrs);
            }
            _ => return Err(p.err("\",\" or \"]\"")),
        }
    }
}
