//! OpenQASM 2.0 subset: one quantum register, at most one classical register,
//! the gates of [`GateKind`] under their `qelib1.inc` names, and terminal
//! `measure` statements.
//!
//! Two comment forms carry extra information and are otherwise ignored by
//! other tools: `// basis x` (or `y`) after a `measure` records the logical
//! measurement basis, and a line `// @stage` marks a stage boundary for
//! multi-stage programs.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Basis, Circuit, CircuitBuilder, CircuitError, Gate, GateKind, Op};

pub const STAGE_MARKER: &str = "// @stage";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QasmError {
    #[error("line {line}, column {col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("cannot export to QASM: {0}")]
    Export(String),
}

/// Renders a circuit. Circuits containing `Initialize` are rejected.
pub fn to_qasm(circuit: &Circuit) -> Result<String, QasmError> {
    to_qasm_with_marks(circuit, &[])
}

/// Renders a circuit with `// @stage` lines before the given op indices.
pub fn to_qasm_with_marks(circuit: &Circuit, marks: &[usize]) -> Result<String, QasmError> {
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{}];", circuit.num_qubits());
    let measures = circuit.measurements();
    if let Some(max_c) = measures.iter().map(|m| m.2).max() {
        let _ = writeln!(out, "creg c[{}];", max_c + 1);
    }
    for (i, op) in circuit.ops().iter().enumerate() {
        for _ in marks.iter().filter(|&&m| m == i) {
            let _ = writeln!(out, "{STAGE_MARKER}");
        }
        match op {
            Op::Gate(g) => {
                out.push_str(g.kind().qasm_name());
                if !g.params().is_empty() {
                    let ps: Vec<String> = g.params().iter().map(|p| format!("{p:?}")).collect();
                    let _ = write!(out, "({})", ps.join(","));
                }
                let qs: Vec<String> = g.qubits().iter().map(|q| format!("q[{q}]")).collect();
                let _ = writeln!(out, " {};", qs.join(","));
            }
            Op::Measure { qubit, basis, clbit } => {
                let _ = write!(out, "measure q[{qubit}] -> c[{clbit}];");
                if *basis != Basis::Z {
                    let _ = write!(out, " // basis {}", basis.as_char());
                }
                out.push('\n');
            }
            Op::Initialize { .. } => {
                return Err(QasmError::Export(
                    "initialize has no QASM 2.0 equivalent".into(),
                ))
            }
        }
    }
    for _ in marks.iter().filter(|&&m| m == circuit.len()) {
        let _ = writeln!(out, "{STAGE_MARKER}");
    }
    Ok(out)
}

pub fn from_qasm(text: &str) -> Result<Circuit, QasmError> {
    parse_qasm_program(text).map(|p| p.circuit)
}

/// A parsed circuit plus the op indices at which `// @stage` markers appeared.
#[derive(Debug, Clone)]
pub struct ParsedQasm {
    pub circuit: Circuit,
    pub stage_marks: Vec<usize>,
}

pub fn parse_qasm_program(text: &str) -> Result<ParsedQasm, QasmError> {
    let tokens = tokenize(text)?;
    Parser {
        tokens,
        pos: 0,
        eof: eof_position(text),
    }
    .program()
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Real(f64),
    Int(u64),
    Str(String),
    Sym(char),
    Arrow,
    /// a recognised comment: basis tag or stage marker
    BasisNote(Basis),
    StageMark,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn eof_position(text: &str) -> (usize, usize) {
    let line = text.lines().count().max(1);
    let col = text.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1);
    (line, col)
}

fn tokenize(text: &str) -> Result<Vec<Token>, QasmError> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let ch = chars[i];
            let col = i + 1;
            let at = |tok| Token {
                tok,
                line: li + 1,
                col,
            };
            if ch.is_whitespace() {
                i += 1;
            } else if ch == '/' && chars.get(i + 1) == Some(&'/') {
                let comment: String = chars[i + 2..].iter().collect();
                let body = comment.trim();
                if line.trim() == STAGE_MARKER {
                    out.push(at(Tok::StageMark));
                } else if let Some(rest) = body.strip_prefix("basis") {
                    let rest = rest.trim();
                    let mut cs = rest.chars();
                    if let (Some(c), None) = (cs.next(), cs.next()) {
                        if let Some(b) = Basis::from_char(c) {
                            out.push(at(Tok::BasisNote(b)));
                        }
                    }
                }
                break;
            } else if ch.is_ascii_alphabetic() || ch == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(at(Tok::Ident(chars[start..i].iter().collect())));
            } else if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())) {
                let start = i;
                let mut real = false;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    real |= chars[i] == '.';
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        real = true;
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let tok = if real {
                    Tok::Real(s.parse().map_err(|_| perr(li + 1, col, format!("bad number '{s}'")))?)
                } else {
                    Tok::Int(s.parse().map_err(|_| perr(li + 1, col, format!("bad integer '{s}'")))?)
                };
                out.push(at(tok));
            } else if ch == '"' {
                let start = i + 1;
                i += 1;
                while i < chars.len() && chars[i] != '"' {
                    i += 1;
                }
                if i >= chars.len() {
                    return Err(perr(li + 1, col, "unterminated string".into()));
                }
                out.push(at(Tok::Str(chars[start..i].iter().collect())));
                i += 1;
            } else if ch == '-' && chars.get(i + 1) == Some(&'>') {
                out.push(at(Tok::Arrow));
                i += 2;
            } else if "()[];,+-*/^".contains(ch) {
                out.push(at(Tok::Sym(ch)));
                i += 1;
            } else {
                return Err(perr(li + 1, col, format!("unexpected character '{ch}'")));
            }
        }
    }
    Ok(out)
}

fn perr(line: usize, col: usize, message: String) -> QasmError {
    QasmError::Parse { line, col, message }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map(|t| (t.line, t.col)).unwrap_or(self.eof)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, QasmError> {
        let (line, col) = self.here();
        Err(perr(line, col, message.into()))
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<(), QasmError> {
        match self.peek() {
            Some(Token { tok: Tok::Sym(s), .. }) if *s == c => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected '{c}'")),
        }
    }

    fn is_sym(&self, c: char) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Sym(s), .. }) if *s == c)
    }

    fn ident(&mut self) -> Result<String, QasmError> {
        match self.peek() {
            Some(Token { tok: Tok::Ident(s), .. }) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn int(&mut self) -> Result<u64, QasmError> {
        match self.peek() {
            Some(Token { tok: Tok::Int(v), .. }) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            _ => self.err("expected integer"),
        }
    }

    fn skip_notes(&mut self) -> Option<Basis> {
        let mut basis = None;
        while let Some(Token { tok: Tok::BasisNote(b), .. }) = self.peek() {
            basis = Some(*b);
            self.pos += 1;
        }
        basis
    }

    fn program(mut self) -> Result<ParsedQasm, QasmError> {
        self.skip_notes();
        match self.next() {
            Some(Token { tok: Tok::Ident(s), .. }) if s == "OPENQASM" => {}
            _ => {
                self.pos = self.pos.saturating_sub(1);
                return self.err("expected 'OPENQASM 2.0;' header");
            }
        }
        match self.next() {
            Some(Token { tok: Tok::Real(2.0), .. }) => {}
            _ => {
                self.pos -= 1;
                return self.err("only OPENQASM 2.0 is supported");
            }
        }
        self.expect_sym(';')?;

        let mut qreg: Option<(String, usize)> = None;
        let mut creg: Option<(String, usize)> = None;
        let mut builder: Option<CircuitBuilder> = None;
        let mut marks = Vec::new();
        let mut pending_marks = 0usize;

        while let Some(tok) = self.peek().cloned() {
            match tok.tok {
                Tok::StageMark => {
                    self.pos += 1;
                    match &builder {
                        Some(b) => marks.push(b.clone().build().len()),
                        None => pending_marks += 1,
                    }
                    continue;
                }
                Tok::BasisNote(_) => {
                    self.pos += 1;
                    continue;
                }
                Tok::Ident(ref word) => {
                    let word = word.clone();
                    match word.as_str() {
                        "include" => {
                            self.pos += 1;
                            match self.next() {
                                Some(Token { tok: Tok::Str(_), .. }) => {}
                                _ => {
                                    self.pos -= 1;
                                    return self.err("expected include file name");
                                }
                            }
                            self.expect_sym(';')?;
                        }
                        "qreg" | "creg" => {
                            self.pos += 1;
                            let name = self.ident()?;
                            self.expect_sym('[')?;
                            let size = self.int()? as usize;
                            self.expect_sym(']')?;
                            self.expect_sym(';')?;
                            if word == "qreg" {
                                if qreg.is_some() {
                                    return Err(perr(tok.line, tok.col, "only one quantum register is supported".into()));
                                }
                                let b = CircuitBuilder::new(size).map_err(|e| perr(tok.line, tok.col, e.to_string()))?;
                                builder = Some(b);
                                marks.extend(std::iter::repeat_n(0, pending_marks));
                                qreg = Some((name, size));
                            } else {
                                if creg.is_some() {
                                    return Err(perr(tok.line, tok.col, "only one classical register is supported".into()));
                                }
                                creg = Some((name, size));
                            }
                        }
                        "measure" => {
                            self.pos += 1;
                            let (qname, qsize) = qreg.clone().ok_or_else(|| perr(tok.line, tok.col, "measure before qreg".into()))?;
                            let q = self.reg_index(&qname, qsize)?;
                            match self.next() {
                                Some(Token { tok: Tok::Arrow, .. }) => {}
                                _ => {
                                    self.pos -= 1;
                                    return self.err("expected '->'");
                                }
                            }
                            let (cname, csize) = creg.clone().ok_or_else(|| perr(tok.line, tok.col, "measure without creg".into()))?;
                            let c = self.reg_index(&cname, csize)?;
                            self.expect_sym(';')?;
                            let basis = self.skip_notes().unwrap_or(Basis::Z);
                            let b = builder.as_mut().expect("qreg present");
                            // basis rotations were emitted as gates already
                            b.measure_raw(q, basis, c).map_err(|e| perr(tok.line, tok.col, e.to_string()))?;
                        }
                        "barrier" | "reset" | "if" | "gate" | "opaque" => {
                            return Err(perr(tok.line, tok.col, format!("'{word}' is not supported")));
                        }
                        _ => {
                            let gate = self.gate_statement(&qreg)?;
                            let b = builder.as_mut().expect("checked in gate_statement");
                            b.gate(gate).map_err(|e| perr(tok.line, tok.col, e.to_string()))?;
                        }
                    }
                }
                _ => return self.err("expected a statement"),
            }
        }
        let circuit = builder
            .map(CircuitBuilder::build)
            .ok_or_else(|| perr(self.eof.0, self.eof.1, "missing qreg declaration".into()))?;
        Ok(ParsedQasm {
            circuit,
            stage_marks: marks,
        })
    }

    fn reg_index(&mut self, name: &str, size: usize) -> Result<usize, QasmError> {
        let (line, col) = self.here();
        let got = self.ident()?;
        if got != name {
            return Err(perr(line, col, format!("unknown register '{got}'")));
        }
        self.expect_sym('[')?;
        let (il, ic) = self.here();
        let idx = self.int()? as usize;
        self.expect_sym(']')?;
        if idx >= size {
            return Err(perr(il, ic, format!("index {idx} out of range for register '{name}' of size {size}")));
        }
        Ok(idx)
    }

    fn gate_statement(&mut self, qreg: &Option<(String, usize)>) -> Result<Gate, QasmError> {
        let (line, col) = self.here();
        let name = self.ident()?;
        let kind = GateKind::from_qasm_name(&name).ok_or_else(|| perr(line, col, format!("unsupported gate '{name}'")))?;
        let (qname, qsize) = qreg.clone().ok_or_else(|| perr(line, col, "gate before qreg".into()))?;
        let mut params = Vec::new();
        if self.is_sym('(') {
            self.pos += 1;
            if !self.is_sym(')') {
                loop {
                    params.push(self.expr()?);
                    if self.is_sym(',') {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
            }
            self.expect_sym(')')?;
        }
        let mut qubits = Vec::new();
        loop {
            qubits.push(self.reg_index(&qname, qsize)?);
            if self.is_sym(',') {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.expect_sym(';')?;
        Gate::new(kind, params, qubits).map_err(|e| perr(line, col, e.to_string()))
    }

    fn expr(&mut self) -> Result<f64, QasmError> {
        let mut v = self.term()?;
        loop {
            if self.is_sym('+') {
                self.pos += 1;
                v += self.term()?;
            } else if self.is_sym('-') {
                self.pos += 1;
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64, QasmError> {
        let mut v = self.unary()?;
        loop {
            if self.is_sym('*') {
                self.pos += 1;
                v *= self.unary()?;
            } else if self.is_sym('/') {
                self.pos += 1;
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64, QasmError> {
        if self.is_sym('-') {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        if self.is_sym('+') {
            self.pos += 1;
            return self.unary();
        }
        let base = self.atom()?;
        if self.is_sym('^') {
            self.pos += 1;
            let e = self.unary()?;
            return Ok(base.powf(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<f64, QasmError> {
        match self.peek().cloned() {
            Some(Token { tok: Tok::Real(v), .. }) => {
                self.pos += 1;
                Ok(v)
            }
            Some(Token { tok: Tok::Int(v), .. }) => {
                self.pos += 1;
                Ok(v as f64)
            }
            Some(Token { tok: Tok::Ident(s), .. }) if s == "pi" => {
                self.pos += 1;
                Ok(std::f64::consts::PI)
            }
            Some(Token { tok: Tok::Sym('('), .. }) => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            _ => self.err("expected expression"),
        }
    }
}

impl CircuitBuilder {
    /// Adds a measurement without emitting basis-change gates.
    pub(crate) fn measure_raw(&mut self, qubit: usize, basis: Basis, clbit: usize) -> Result<&mut Self, CircuitError> {
        self.circuit.push_measure(qubit, basis, clbit)?;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_lowering() {
        let c = Circuit::from_gates(2, [Gate::h(0), Gate::cx(0, 1)]).unwrap();
        let text = to_qasm(&c).unwrap();
        assert!(text.contains("h q[0];\ncx q[0],q[1];"), "{text}");
        assert_eq!(from_qasm(&text).unwrap().canonical_hash(), c.canonical_hash());
    }

    #[test]
    fn out_of_range_index_is_located() {
        let text = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\nh q[2];\n";
        match from_qasm(text) {
            Err(QasmError::Parse { line, col, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(col, 5);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn expressions_and_aliases() {
        let text = "OPENQASM 2.0;\nqreg q[2];\nu1(pi/2) q[0];\ncp(-pi*0.5) q[0],q[1];\nu3(1e-3,2,-(1+1)) q[1];\n";
        let c = from_qasm(text).unwrap();
        let gates: Vec<_> = c.gates().cloned().collect();
        assert_eq!(gates[0].kind(), GateKind::P);
        assert!((gates[0].params()[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(gates[1].kind(), GateKind::CP);
        assert_eq!(gates[2].params(), &[1e-3, 2.0, -2.0]);
    }

    #[test]
    fn measurement_basis_round_trip() {
        let c = Circuit::from_gates(2, [Gate::h(0)])
            .unwrap()
            .measure(0, Basis::Y, 1)
            .unwrap()
            .measure(1, Basis::Z, 0)
            .unwrap();
        let text = to_qasm(&c).unwrap();
        assert!(text.contains("creg c[2];"));
        assert!(text.contains("// basis y"));
        assert_eq!(from_qasm(&text).unwrap().canonical_hash(), c.canonical_hash());
    }

    #[test]
    fn initialize_is_rejected() {
        let sv = crate::state::StateVector::basis(1, 1);
        let c = Circuit::new(1).unwrap().initialize(&sv, &[0]).unwrap();
        assert!(matches!(to_qasm(&c), Err(QasmError::Export(_))));
    }

    #[test]
    fn stage_marks_survive() {
        let c = Circuit::from_gates(1, [Gate::h(0), Gate::x(0), Gate::z(0)]).unwrap();
        let text = to_qasm_with_marks(&c, &[1, 3]).unwrap();
        let parsed = parse_qasm_program(&text).unwrap();
        assert_eq!(parsed.stage_marks, vec![1, 3]);
        assert_eq!(parsed.circuit, c);
    }

    #[test]
    fn errors() {
        assert!(from_qasm("qreg q[1];").is_err());
        assert!(from_qasm("OPENQASM 2.0;\nqreg q[1];\nfoo q[0];").is_err());
        assert!(from_qasm("OPENQASM 2.0;\nqreg q[1];\nh q[0]").is_err());
        assert!(from_qasm("OPENQASM 2.0;\nqreg q[2];\ncx q[0],q[0];").is_err());
        assert!(from_qasm("OPENQASM 2.0;\nqreg q[1];\nqreg r[1];").is_err());
    }
}
