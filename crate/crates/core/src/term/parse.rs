//! Surface syntax for recursion schemes.
//!
//! ```text
//! program   := (decl | def)* "start" term
//! decl      := "symbol" NAME ":" NAT
//! def       := NAME ":" sort "=" term
//! sort      := "o" | sort "->" sort | "(" sort ")"
//! term      := "\" NAME ":" sort "." term | term atom | atom
//! atom      := NAME | "(" term ")"
//! ```
//!
//! Names resolve to the innermost binder, then to a nonterminal, then to a
//! symbol. Symbols must be applied to exactly as many arguments as their rank.
//! As a small convenience an abstraction may also appear as the last argument
//! of an application without parentheses.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::sort::Sort;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{pos}: syntax error: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: symbol `{name}` has rank {rank} but is applied to {found} argument(s)")]
    RankMismatch {
        pos: Pos,
        name: String,
        rank: usize,
        found: usize,
    },
    #[error("{pos}: sort mismatch: {message}")]
    SortMismatch { pos: Pos, message: String },
    #[error("{pos}: unknown name `{name}`")]
    UnknownName { pos: Pos, name: String },
    #[error("{pos}: `{name}` is declared more than once")]
    DuplicateName { pos: Pos, name: String },
    #[error("nonterminal `{name}` is only an alias of itself (unguarded recursion)")]
    UnguardedRecursion { name: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId(pub u32);

/// The nondeterministic choice symbol, always present with rank 2.
pub const BR: SymbolId = SymbolId(0);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    pub name: String,
    pub rank: usize,
}

/// A resolved, sort-checked term. Variables carry de Bruijn indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Var { index: u32, name: String, sort: Sort },
    Nonterminal(usize),
    Symbol { symbol: SymbolId, args: Vec<Expr> },
    App(Box<Expr>, Box<Expr>),
    Abs { name: String, sort: Sort, body: Box<Expr> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nonterminal {
    pub name: String,
    pub sort: Sort,
    pub body: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub symbols: Vec<Symbol>,
    pub nonterminals: Vec<Nonterminal>,
    pub start: Expr,
}

impl Program {
    pub fn symbol(&self, id: SymbolId) -> &Symbol {
        &self.symbols[id.0 as usize]
    }

    pub fn symbol_id(&self, name: &str) -> Option<SymbolId> {
        self.symbols
            .iter()
            .position(|s| s.name == name)
            .map(|i| SymbolId(i as u32))
    }

    pub fn nonterminal_index(&self, name: &str) -> Option<usize> {
        self.nonterminals.iter().position(|n| n.name == name)
    }

    /// Follows nonterminals whose body is just another nonterminal.
    pub fn resolve_alias(&self, mut index: usize) -> usize {
        for _ in 0..=self.nonterminals.len() {
            match self.nonterminals[index].body {
                Expr::Nonterminal(next) => index = next,
                _ => return index,
            }
        }
        index
    }
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, at: 0 };
    let surface = parser.program()?;
    resolve(surface)
}

// ---------------------------------------------------------------------------
// Lexing

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Name(String),
    Nat(usize),
    Colon,
    Equals,
    Arrow,
    LParen,
    RParen,
    Backslash,
    Dot,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Name(n) => write!(f, "`{n}`"),
            Tok::Nat(n) => write!(f, "`{n}`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Equals => write!(f, "`=`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Backslash => write!(f, "`\\`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
            }
            c if c.is_whitespace() => {
                bump(&mut chars);
            }
            ':' => {
                bump(&mut chars);
                out.push((Tok::Colon, pos));
            }
            '=' => {
                bump(&mut chars);
                out.push((Tok::Equals, pos));
            }
            '(' => {
                bump(&mut chars);
                out.push((Tok::LParen, pos));
            }
            ')' => {
                bump(&mut chars);
                out.push((Tok::RParen, pos));
            }
            '\\' | 'λ' => {
                bump(&mut chars);
                out.push((Tok::Backslash, pos));
            }
            '.' => {
                bump(&mut chars);
                out.push((Tok::Dot, pos));
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    out.push((Tok::Arrow, pos));
                } else {
                    return Err(ParseError::Syntax {
                        pos,
                        message: "expected `->`".into(),
                    });
                }
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if !c.is_ascii_digit() {
                        break;
                    }
                    s.push(c);
                    bump(&mut chars);
                }
                let n = s.parse().map_err(|_| ParseError::Syntax {
                    pos,
                    message: format!("number `{s}` is too large"),
                })?;
                out.push((Tok::Nat(n), pos));
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if !(c.is_alphanumeric() || c == '_' || c == '\'') {
                        break;
                    }
                    s.push(c);
                    bump(&mut chars);
                }
                out.push((Tok::Name(s), pos));
            }
            other => {
                return Err(ParseError::Syntax {
                    pos,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parsing to an unresolved tree

#[derive(Clone, Debug)]
enum Surface {
    Name(String, Pos),
    App(Box<Surface>, Box<Surface>, Pos),
    Abs(String, Sort, Box<Surface>, Pos),
}

impl Surface {
    fn pos(&self) -> Pos {
        match self {
            Surface::Name(_, p) | Surface::App(_, _, p) | Surface::Abs(_, _, _, p) => *p,
        }
    }
}

struct SurfaceProgram {
    symbols: Vec<(String, usize, Pos)>,
    defs: Vec<(String, Sort, Surface, Pos)>,
    start: Surface,
}

struct Parser {
    tokens: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].0
    }

    fn peek2(&self) -> &Tok {
        let i = (self.at + 1).min(self.tokens.len() - 1);
        &self.tokens[i].0
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, ParseError> {
        if *self.peek() == tok {
            Ok(self.next().1)
        } else {
            self.error(format!("expected {tok}, found {}", self.peek()))
        }
    }

    fn name(&mut self) -> Result<(String, Pos), ParseError> {
        match self.next() {
            (Tok::Name(n), p) => Ok((n, p)),
            (t, p) => Err(ParseError::Syntax {
                pos: p,
                message: format!("expected a name, found {t}"),
            }),
        }
    }

    fn program(&mut self) -> Result<SurfaceProgram, ParseError> {
        let mut symbols = Vec::new();
        let mut defs = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Name(n) if n == "start" => {
                    self.next();
                    let start = self.term()?;
                    if *self.peek() != Tok::Eof {
                        return self.error(format!("unexpected {} after start term", self.peek()));
                    }
                    return Ok(SurfaceProgram {
                        symbols,
                        defs,
                        start,
                    });
                }
                Tok::Name(n) if n == "symbol" => {
                    self.next();
                    let (name, pos) = self.name()?;
                    self.expect(Tok::Colon)?;
                    let rank = match self.next() {
                        (Tok::Nat(r), _) => r,
                        (t, p) => {
                            return Err(ParseError::Syntax {
                                pos: p,
                                message: format!("expected a rank, found {t}"),
                            })
                        }
                    };
                    symbols.push((name, rank, pos));
                }
                Tok::Name(_) => {
                    let (name, pos) = self.name()?;
                    self.expect(Tok::Colon)?;
                    let sort = self.sort()?;
                    self.expect(Tok::Equals)?;
                    let body = self.term()?;
                    defs.push((name, sort, body, pos));
                }
                Tok::Eof => return self.error("missing `start` term"),
                other => return self.error(format!("unexpected {other}")),
            }
        }
    }

    fn sort(&mut self) -> Result<Sort, ParseError> {
        let left = match self.next() {
            (Tok::Name(n), _) if n == "o" => Sort::Ground,
            (Tok::LParen, _) => {
                let s = self.sort()?;
                self.expect(Tok::RParen)?;
                s
            }
            (t, p) => {
                return Err(ParseError::Syntax {
                    pos: p,
                    message: format!("expected a sort, found {t}"),
                })
            }
        };
        if *self.peek() == Tok::Arrow {
            self.next();
            Ok(Sort::arrow(left, self.sort()?))
        } else {
            Ok(left)
        }
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Name(n) => n != "start" && n != "symbol" && *self.peek2() != Tok::Colon,
            Tok::LParen | Tok::Backslash => true,
            _ => false,
        }
    }

    fn term(&mut self) -> Result<Surface, ParseError> {
        if *self.peek() == Tok::Backslash {
            return self.abstraction();
        }
        if !self.starts_atom() {
            return self.error(format!("expected a term, found {}", self.peek()));
        }
        let mut head = self.atom()?;
        while self.starts_atom() {
            let pos = self.pos();
            if *self.peek() == Tok::Backslash {
                let arg = self.abstraction()?;
                return Ok(Surface::App(Box::new(head), Box::new(arg), pos));
            }
            let arg = self.atom()?;
            head = Surface::App(Box::new(head), Box::new(arg), pos);
        }
        Ok(head)
    }

    fn abstraction(&mut self) -> Result<Surface, ParseError> {
        let pos = self.expect(Tok::Backslash)?;
        let (name, _) = self.name()?;
        self.expect(Tok::Colon)?;
        let sort = self.sort()?;
        self.expect(Tok::Dot)?;
        let body = self.term()?;
        Ok(Surface::Abs(name, sort, Box::new(body), pos))
    }

    fn atom(&mut self) -> Result<Surface, ParseError> {
        match self.next() {
            (Tok::Name(n), p) => Ok(Surface::Name(n, p)),
            (Tok::LParen, _) => {
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            (t, p) => Err(ParseError::Syntax {
                pos: p,
                message: format!("expected a term, found {t}"),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Name resolution and sort checking

struct Resolver<'a> {
    symbols: &'a [Symbol],
    symbol_index: HashMap<&'a str, usize>,
    nonterminal_index: HashMap<&'a str, usize>,
    nonterminal_sorts: Vec<Sort>,
}

fn resolve(surface: SurfaceProgram) -> Result<Program, ParseError> {
    let mut symbols = vec![Symbol {
        name: "br".into(),
        rank: 2,
    }];
    let mut seen: HashMap<String, Pos> = HashMap::new();
    for (name, rank, pos) in &surface.symbols {
        if name == "br" {
            if *rank != 2 {
                return Err(ParseError::RankMismatch {
                    pos: *pos,
                    name: name.clone(),
                    rank: 2,
                    found: *rank,
                });
            }
            continue;
        }
        if seen.insert(name.clone(), *pos).is_some() {
            return Err(ParseError::DuplicateName {
                pos: *pos,
                name: name.clone(),
            });
        }
        symbols.push(Symbol {
            name: name.clone(),
            rank: *rank,
        });
    }
    for (name, _, _, pos) in &surface.defs {
        if name == "br" || seen.insert(name.clone(), *pos).is_some() {
            return Err(ParseError::DuplicateName {
                pos: *pos,
                name: name.clone(),
            });
        }
    }

    let resolver = Resolver {
        symbols: &symbols,
        symbol_index: symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (s.name.as_str(), i))
            .collect(),
        nonterminal_index: surface
            .defs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.0.as_str(), i))
            .collect(),
        nonterminal_sorts: surface.defs.iter().map(|d| d.1.clone()).collect(),
    };

    let mut nonterminals = Vec::with_capacity(surface.defs.len());
    for (name, sort, body, _) in &surface.defs {
        let (expr, found) = resolver.term(body, &mut Vec::new())?;
        if &found != sort {
            return Err(ParseError::SortMismatch {
                pos: body.pos(),
                message: format!("`{name}` is declared with sort {sort} but its body has sort {found}"),
            });
        }
        nonterminals.push(Nonterminal {
            name: name.clone(),
            sort: sort.clone(),
            body: expr,
        });
    }
    let (start, sort) = resolver.term(&surface.start, &mut Vec::new())?;
    if !sort.is_ground() {
        return Err(ParseError::SortMismatch {
            pos: surface.start.pos(),
            message: format!("the start term must have sort o, found {sort}"),
        });
    }
    let program = Program {
        symbols,
        nonterminals,
        start,
    };
    for i in 0..program.nonterminals.len() {
        let target = program.resolve_alias(i);
        if matches!(program.nonterminals[target].body, Expr::Nonterminal(_)) {
            return Err(ParseError::UnguardedRecursion {
                name: program.nonterminals[i].name.clone(),
            });
        }
    }
    Ok(program)
}

impl Resolver<'_> {
    fn term(
        &self,
        term: &Surface,
        binders: &mut Vec<(String, Sort)>,
    ) -> Result<(Expr, Sort), ParseError> {
        match term {
            Surface::Abs(name, sort, body, _) => {
                binders.push((name.clone(), sort.clone()));
                let inner = self.term(body, binders);
                binders.pop();
                let (body, result) = inner?;
                Ok((
                    Expr::Abs {
                        name: name.clone(),
                        sort: sort.clone(),
                        body: Box::new(body),
                    },
                    Sort::arrow(sort.clone(), result),
                ))
            }
            Surface::Name(..) | Surface::App(..) => {
                let mut args = Vec::new();
                let mut head = term;
                while let Surface::App(f, a, _) = head {
                    args.push(a.as_ref());
                    head = f;
                }
                args.reverse();
                let Surface::Name(name, pos) = head else {
                    // abstraction in head position
                    let (mut expr, mut sort) = self.term(head, binders)?;
                    for arg in args {
                        (expr, sort) = self.apply(expr, sort, arg, binders)?;
                    }
                    return Ok((expr, sort));
                };
                let (mut expr, mut sort) = match self.lookup(name, binders) {
                    Some(Lookup::Var(index, sort)) => (
                        Expr::Var {
                            index,
                            name: name.clone(),
                            sort: sort.clone(),
                        },
                        sort,
                    ),
                    Some(Lookup::Nonterminal(i)) => {
                        (Expr::Nonterminal(i), self.nonterminal_sorts[i].clone())
                    }
                    Some(Lookup::Symbol(i)) => {
                        let rank = self.symbols[i].rank;
                        if args.len() != rank {
                            return Err(ParseError::RankMismatch {
                                pos: *pos,
                                name: name.clone(),
                                rank,
                                found: args.len(),
                            });
                        }
                        let mut resolved = Vec::with_capacity(rank);
                        for arg in args {
                            let (e, s) = self.term(arg, binders)?;
                            if !s.is_ground() {
                                return Err(ParseError::SortMismatch {
                                    pos: arg.pos(),
                                    message: format!(
                                        "argument of symbol `{name}` must have sort o, found {s}"
                                    ),
                                });
                            }
                            resolved.push(e);
                        }
                        return Ok((
                            Expr::Symbol {
                                symbol: SymbolId(i as u32),
                                args: resolved,
                            },
                            Sort::Ground,
                        ));
                    }
                    None => {
                        return Err(ParseError::UnknownName {
                            pos: *pos,
                            name: name.clone(),
                        })
                    }
                };
                for arg in args {
                    (expr, sort) = self.apply(expr, sort, arg, binders)?;
                }
                Ok((expr, sort))
            }
        }
    }

    fn apply(
        &self,
        fun: Expr,
        fun_sort: Sort,
        arg: &Surface,
        binders: &mut Vec<(String, Sort)>,
    ) -> Result<(Expr, Sort), ParseError> {
        let (arg_expr, arg_sort) = self.term(arg, binders)?;
        match fun_sort.split_arrow() {
            Some((expected, result)) if *expected == arg_sort => {
                let result = result.clone();
                Ok((Expr::App(Box::new(fun), Box::new(arg_expr)), result))
            }
            Some((expected, _)) => Err(ParseError::SortMismatch {
                pos: arg.pos(),
                message: format!("expected an argument of sort {expected}, found {arg_sort}"),
            }),
            None => Err(ParseError::SortMismatch {
                pos: arg.pos(),
                message: "a term of sort o cannot be applied".into(),
            }),
        }
    }

    fn lookup(&self, name: &str, binders: &[(String, Sort)]) -> Option<Lookup> {
        if let Some(depth) = binders.iter().rev().position(|(n, _)| n == name) {
            let sort = binders[binders.len() - 1 - depth].1.clone();
            return Some(Lookup::Var(depth as u32, sort));
        }
        if let Some(&i) = self.nonterminal_index.get(name) {
            return Some(Lookup::Nonterminal(i));
        }
        self.symbol_index.get(name).map(|&i| Lookup::Symbol(i))
    }
}

enum Lookup {
    Var(u32, Sort),
    Nonterminal(usize),
    Symbol(usize),
}
