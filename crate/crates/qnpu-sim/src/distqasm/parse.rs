use std::collections::BTreeMap;

use thiserror::Error;

use super::ast::{CircuitIr, GateKind, NodeId, QubitRef, RegDecl, Stmt};
use super::SourceProgram;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseError {
    #[error("{origin}:{line}:{col}: {msg}")]
    Syntax { origin: String, line: usize, col: usize, msg: String },
    #[error("{origin}: empty program")]
    EmptyProgram { origin: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Int(usize),
    Punct(char),
    Arrow,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    col: usize,
}

struct Lexer<'a> {
    origin: &'a str,
}

impl<'a> Lexer<'a> {
    /// Tokenize one physical line with its comment stripped.
    fn lex_line(&self, text: &str, line_no: usize) -> Result<Vec<Spanned>, ParseError> {
        let mut toks = Vec::new();
        let bytes = text.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            let col = i + 1;
            match c {
                ' ' | '\t' | '\r' => i += 1,
                '-' if i + 1 < bytes.len() && bytes[i + 1] == b'>' => {
                    toks.push(Spanned { tok: Tok::Arrow, col });
                    i += 2;
                }
                '[' | ']' | '(' | ')' | ',' | ';' | '@' | '*' | '/' | '+' | '-' => {
                    toks.push(Spanned { tok: Tok::Punct(c), col });
                    i += 1;
                }
                c if c.is_ascii_digit() || c == '.' => {
                    let start = i;
                    while i < bytes.len()
                        && ((bytes[i] as char).is_ascii_digit()
                            || bytes[i] == b'.'
                            || bytes[i] == b'e'
                            || bytes[i] == b'E'
                            || ((bytes[i] == b'-' || bytes[i] == b'+')
                                && i > start
                                && (bytes[i - 1] == b'e' || bytes[i - 1] == b'E')))
                    {
                        i += 1;
                    }
                    let text = &text[start..i];
                    if text.contains(['.', 'e', 'E']) {
                        let v: f64 = text.parse().map_err(|_| self.err(line_no, col, format!("malformed number `{text}`")))?;
                        toks.push(Spanned { tok: Tok::Number(v), col });
                    } else {
                        let v: usize = text.parse().map_err(|_| self.err(line_no, col, format!("malformed integer `{text}`")))?;
                        toks.push(Spanned { tok: Tok::Int(v), col });
                    }
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = i;
                    while i < bytes.len()
                        && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                    {
                        i += 1;
                    }
                    toks.push(Spanned { tok: Tok::Ident(text[start..i].to_string()), col });
                }
                other => {
                    return Err(self.err(line_no, col, format!("unexpected character `{other}`")));
                }
            }
        }
        Ok(toks)
    }

    fn err(&self, line: usize, col: usize, msg: String) -> ParseError {
        ParseError::Syntax { origin: self.origin.to_string(), line, col, msg }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    nodes: Vec<NodeId>,
    node_index: BTreeMap<String, usize>,
    qregs: Vec<RegDecl>,
    cregs: Vec<(String, usize)>,
}

/// Parse DistQASM source text into a circuit IR.
///
/// Accepts the OpenQASM 2 subset `qreg`/`creg`/`h`/`x`/`y`/`z`/`rx`/`ry`/
/// `rz`/`cnot`/`cp`/`swap`/`measure` plus `teleport`, `cat_ent`, `cat_disent`
/// and the `pragma remote_begin <node>` / `pragma remote_end` markers.
pub fn parse(src: &SourceProgram) -> Result<CircuitIr, ParseError> {
    let lexer = Lexer { origin: &src.origin };
    let mut p = Parser {
        lexer,
        nodes: Vec::new(),
        node_index: BTreeMap::new(),
        qregs: Vec::new(),
        cregs: Vec::new(),
    };

    // Stack of statement lists: the base program plus any open remote blocks.
    let mut stack: Vec<(Option<usize>, Vec<Stmt>)> = vec![(None, Vec::new())];
    let mut saw_content = false;

    for (idx, raw_line) in src.text.lines().enumerate() {
        let line_no = idx + 1;
        let code = match raw_line.find("//") {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        if code.trim().is_empty() {
            continue;
        }
        let toks = p.lexer.lex_line(code, line_no)?;
        if toks.is_empty() {
            continue;
        }
        saw_content = true;

        if matches!(&toks[0].tok, Tok::Ident(w) if w == "pragma") {
            p.parse_pragma(&toks, line_no, &mut stack)?;
            continue;
        }

        // Non-pragma lines may hold several `;`-separated statements.
        for chunk in split_statements(&toks) {
            if chunk.is_empty() {
                continue;
            }
            if let Some(stmt) = p.parse_stmt(chunk, line_no)? {
                stack.last_mut().expect("statement stack").1.push(stmt);
            }
        }
    }

    if !saw_content {
        return Err(ParseError::EmptyProgram { origin: src.origin.clone() });
    }
    if stack.len() != 1 {
        return Err(p.lexer.err(
            src.text.lines().count(),
            1,
            "unterminated remote block: missing `pragma remote_end`".into(),
        ));
    }
    let (_, stmts) = stack.pop().expect("base statement list");
    if p.qregs.is_empty() {
        return Err(ParseError::EmptyProgram { origin: src.origin.clone() });
    }

    Ok(CircuitIr { nodes: p.nodes, qregs: p.qregs, cregs: p.cregs, stmts })
}

/// Split a token line into `;`-separated statements; a trailing statement
/// without `;` is rejected later by the statement parsers that require it.
fn split_statements<'t>(toks: &'t [Spanned]) -> Vec<&'t [Spanned]> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, t) in toks.iter().enumerate() {
        if matches!(t.tok, Tok::Punct(';')) {
            out.push(&toks[start..i]);
            start = i + 1;
        }
    }
    if start < toks.len() {
        out.push(&toks[start..]);
    }
    out
}

impl<'a> Parser<'a> {
    fn parse_pragma(
        &mut self,
        toks: &[Spanned],
        line: usize,
        stack: &mut Vec<(Option<usize>, Vec<Stmt>)>,
    ) -> Result<(), ParseError> {
        // Allow an optional trailing `;`.
        let toks: Vec<&Spanned> = toks
            .iter()
            .filter(|t| !matches!(t.tok, Tok::Punct(';')))
            .collect();
        let word = |i: usize| -> Option<&str> {
            toks.get(i).and_then(|t| match &t.tok {
                Tok::Ident(w) => Some(w.as_str()),
                _ => None,
            })
        };
        match word(1) {
            Some("remote_begin") => {
                let node_name = word(2).ok_or_else(|| {
                    self.lexer.err(line, 1, "malformed pragma: expected `pragma remote_begin <node>`".into())
                })?;
                if toks.len() != 3 {
                    return Err(self.lexer.err(line, 1, "malformed pragma: trailing tokens after node name".into()));
                }
                let node = self.intern_node(node_name);
                stack.push((Some(node), Vec::new()));
                Ok(())
            }
            Some("remote_end") => {
                if toks.len() != 2 {
                    return Err(self.lexer.err(line, 1, "malformed pragma: trailing tokens after `remote_end`".into()));
                }
                if stack.len() < 2 {
                    return Err(self.lexer.err(line, 1, "`pragma remote_end` without matching `remote_begin`".into()));
                }
                let (node, body) = stack.pop().expect("open remote block");
                let node = node.expect("remote block node");
                stack
                    .last_mut()
                    .expect("statement stack")
                    .1
                    .push(Stmt::RemoteBlock { node, body });
                Ok(())
            }
            _ => Err(self.lexer.err(line, 1, "malformed pragma: expected `remote_begin` or `remote_end`".into())),
        }
    }

    fn parse_stmt(&mut self, toks: &[Spanned], line: usize) -> Result<Option<Stmt>, ParseError> {
        let head = match &toks[0].tok {
            Tok::Ident(w) => w.clone(),
            _ => return Err(self.lexer.err(line, toks[0].col, "expected statement keyword".into())),
        };
        match head.as_str() {
            // Optional OpenQASM 2 header line, ignored.
            "OPENQASM" => Ok(None),
            "qreg" => {
                let (name, size, rest) = self.parse_reg_decl(&toks[1..], line)?;
                let node_name = match rest {
                    [Spanned { tok: Tok::Punct('@'), .. }, Spanned { tok: Tok::Ident(n), .. }] => n.clone(),
                    _ => {
                        return Err(self.lexer.err(line, toks[0].col, "qreg requires a host node: `qreg q[2] @nodeA;`".into()))
                    }
                };
                if self.qregs.iter().any(|r| r.name == name) {
                    return Err(self.lexer.err(line, toks[0].col, format!("duplicate register `{name}`")));
                }
                let node = self.intern_node(&node_name);
                self.qregs.push(RegDecl { name, size, node });
                Ok(None)
            }
            "creg" => {
                let (name, size, rest) = self.parse_reg_decl(&toks[1..], line)?;
                if !rest.is_empty() {
                    return Err(self.lexer.err(line, toks[0].col, "creg takes no node annotation".into()));
                }
                if self.cregs.iter().any(|(n, _)| *n == name) {
                    return Err(self.lexer.err(line, toks[0].col, format!("duplicate register `{name}`")));
                }
                self.cregs.push((name, size));
                Ok(None)
            }
            "measure" => {
                let (q, rest) = self.parse_qubit(&toks[1..], line)?;
                let rest = match rest {
                    [Spanned { tok: Tok::Arrow, .. }, tail @ ..] => tail,
                    _ => return Err(self.lexer.err(line, toks[0].col, "measure requires `-> c[i]`".into())),
                };
                let (bit, rest) = self.parse_bit(rest, line)?;
                if !rest.is_empty() {
                    return Err(self.lexer.err(line, toks[0].col, "trailing tokens after measure".into()));
                }
                Ok(Some(Stmt::Measure { qubit: q, bit }))
            }
            "teleport" | "cat_ent" | "cat_disent" => {
                let (a, rest) = self.parse_qubit(&toks[1..], line)?;
                let rest = expect_comma(rest).ok_or_else(|| {
                    self.lexer.err(line, toks[0].col, format!("{head} requires two qubit operands"))
                })?;
                let (b, rest) = self.parse_qubit(rest, line)?;
                if !rest.is_empty() {
                    return Err(self.lexer.err(line, toks[0].col, format!("trailing tokens after {head}")));
                }
                Ok(Some(match head.as_str() {
                    "teleport" => Stmt::Teleport { src: a, dst: b },
                    "cat_ent" => Stmt::CatEnt { src: a, dst: b },
                    _ => Stmt::CatDisent { remote: a, home: b },
                }))
            }
            name => {
                let gate = GateKind::from_name(name).ok_or_else(|| {
                    self.lexer.err(line, toks[0].col, format!("unknown gate `{name}`"))
                })?;
                let mut rest = &toks[1..];
                let mut params = Vec::new();
                if matches!(rest.first().map(|t| &t.tok), Some(Tok::Punct('('))) {
                    let close = rest
                        .iter()
                        .position(|t| matches!(t.tok, Tok::Punct(')')))
                        .ok_or_else(|| self.lexer.err(line, toks[0].col, "unterminated parameter list".into()))?;
                    for group in rest[1..close].split(|t| matches!(t.tok, Tok::Punct(','))) {
                        params.push(self.parse_expr(group, line)?);
                    }
                    rest = &rest[close + 1..];
                }
                if params.len() != gate.param_count() {
                    return Err(self.lexer.err(
                        line,
                        toks[0].col,
                        format!("gate `{name}` expects {} parameter(s), got {}", gate.param_count(), params.len()),
                    ));
                }
                let mut qubits = Vec::new();
                loop {
                    let (q, tail) = self.parse_qubit(rest, line)?;
                    qubits.push(q);
                    match expect_comma(tail) {
                        Some(tail) => rest = tail,
                        None => {
                            rest = tail;
                            break;
                        }
                    }
                }
                if !rest.is_empty() {
                    return Err(self.lexer.err(line, toks[0].col, format!("trailing tokens after {name}")));
                }
                if qubits.len() != gate.arity() {
                    return Err(self.lexer.err(
                        line,
                        toks[0].col,
                        format!("gate `{name}` expects {} qubit(s), got {}", gate.arity(), qubits.len()),
                    ));
                }
                Ok(Some(Stmt::LocalGate { gate, params, qubits }))
            }
        }
    }

    fn parse_reg_decl<'t>(
        &mut self,
        toks: &'t [Spanned],
        line: usize,
    ) -> Result<(String, usize, &'t [Spanned]), ParseError> {
        match toks {
            [Spanned { tok: Tok::Ident(name), .. }, Spanned { tok: Tok::Punct('['), .. }, Spanned { tok: Tok::Int(size), .. }, Spanned { tok: Tok::Punct(']'), .. }, rest @ ..] => {
                Ok((name.clone(), *size, rest))
            }
            _ => Err(self.lexer.err(line, toks.first().map_or(1, |t| t.col), "malformed register declaration".into())),
        }
    }

    fn parse_qubit<'t>(
        &mut self,
        toks: &'t [Spanned],
        line: usize,
    ) -> Result<(QubitRef, &'t [Spanned]), ParseError> {
        match toks {
            [Spanned { tok: Tok::Ident(reg), col, .. }, Spanned { tok: Tok::Punct('['), .. }, Spanned { tok: Tok::Int(off), .. }, Spanned { tok: Tok::Punct(']'), .. }, rest @ ..] => {
                let decl = self.qregs.iter().find(|r| r.name == *reg).ok_or_else(|| {
                    self.lexer.err(line, *col, format!("qubit register `{reg}` used before declaration"))
                })?;
                if *off >= decl.size {
                    return Err(self.lexer.err(line, *col, format!("index {off} out of range for `{reg}[{}]`", decl.size)));
                }
                Ok((QubitRef { register: reg.clone(), offset: *off, home_node: decl.node }, rest))
            }
            _ => Err(self.lexer.err(line, toks.first().map_or(1, |t| t.col), "expected qubit operand `reg[i]`".into())),
        }
    }

    fn parse_bit<'t>(
        &mut self,
        toks: &'t [Spanned],
        line: usize,
    ) -> Result<((String, usize), &'t [Spanned]), ParseError> {
        match toks {
            [Spanned { tok: Tok::Ident(reg), col, .. }, Spanned { tok: Tok::Punct('['), .. }, Spanned { tok: Tok::Int(off), .. }, Spanned { tok: Tok::Punct(']'), .. }, rest @ ..] => {
                let decl = self.cregs.iter().find(|(n, _)| n == reg).ok_or_else(|| {
                    self.lexer.err(line, *col, format!("classical register `{reg}` used before declaration"))
                })?;
                if *off >= decl.1 {
                    return Err(self.lexer.err(line, *col, format!("index {off} out of range for `{reg}[{}]`", decl.1)));
                }
                Ok(((reg.clone(), *off), rest))
            }
            _ => Err(self.lexer.err(line, toks.first().map_or(1, |t| t.col), "expected classical bit `reg[i]`".into())),
        }
    }

    /// Angle expressions in radians: numbers, `pi`, `+ - * /` and parens.
    fn parse_expr(&self, toks: &[Spanned], line: usize) -> Result<f64, ParseError> {
        let mut pos = 0;
        let v = self.expr_add(toks, &mut pos, line)?;
        if pos != toks.len() {
            return Err(self.lexer.err(line, toks[pos].col, "trailing tokens in expression".into()));
        }
        Ok(v)
    }

    fn expr_add(&self, toks: &[Spanned], pos: &mut usize, line: usize) -> Result<f64, ParseError> {
        let mut acc = self.expr_mul(toks, pos, line)?;
        while let Some(Spanned { tok: Tok::Punct(op @ ('+' | '-')), .. }) = toks.get(*pos) {
            let op = *op;
            *pos += 1;
            let rhs = self.expr_mul(toks, pos, line)?;
            acc = if op == '+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn expr_mul(&self, toks: &[Spanned], pos: &mut usize, line: usize) -> Result<f64, ParseError> {
        let mut acc = self.expr_atom(toks, pos, line)?;
        while let Some(Spanned { tok: Tok::Punct(op @ ('*' | '/')), .. }) = toks.get(*pos) {
            let op = *op;
            *pos += 1;
            let rhs = self.expr_atom(toks, pos, line)?;
            acc = if op == '*' { acc * rhs } else { acc / rhs };
        }
        Ok(acc)
    }

    fn expr_atom(&self, toks: &[Spanned], pos: &mut usize, line: usize) -> Result<f64, ParseError> {
        match toks.get(*pos) {
            Some(Spanned { tok: Tok::Number(v), .. }) => {
                *pos += 1;
                Ok(*v)
            }
            Some(Spanned { tok: Tok::Int(v), .. }) => {
                *pos += 1;
                Ok(*v as f64)
            }
            Some(Spanned { tok: Tok::Ident(w), col, .. }) => {
                if w == "pi" {
                    *pos += 1;
                    Ok(std::f64::consts::PI)
                } else {
                    Err(self.lexer.err(line, *col, format!("unknown symbol `{w}` in expression")))
                }
            }
            Some(Spanned { tok: Tok::Punct('-'), .. }) => {
                *pos += 1;
                Ok(-self.expr_atom(toks, pos, line)?)
            }
            Some(Spanned { tok: Tok::Punct('('), .. }) => {
                *pos += 1;
                let v = self.expr_add(toks, pos, line)?;
                match toks.get(*pos) {
                    Some(Spanned { tok: Tok::Punct(')'), .. }) => {
                        *pos += 1;
                        Ok(v)
                    }
                    _ => Err(self.lexer.err(line, 1, "expected `)`".into())),
                }
            }
            other => Err(self.lexer.err(line, other.map_or(1, |t| t.col), "expected expression".into())),
        }
    }

    fn intern_node(&mut self, name: &str) -> usize {
        if let Some(&i) = self.node_index.get(name) {
            return i;
        }
        let index = self.nodes.len();
        self.nodes.push(NodeId { name: name.to_string(), index });
        self.node_index.insert(name.to_string(), index);
        index
    }
}

fn expect_comma(toks: &[Spanned]) -> Option<&[Spanned]> {
    match toks {
        [Spanned { tok: Tok::Punct(','), .. }, rest @ ..] => Some(rest),
        _ => None,
    }
}
