//! OpenQASM 2.0 subset parser.
//!
//! Accepts a single quantum register, at most one classical register, and the
//! fixed gate vocabulary of [`GateKind`]. The `OPENQASM 2.0;` header and
//! `include "qelib1.inc";` are accepted and ignored (all gates are built in).
//! Angle expressions support `pi`, numeric literals, parentheses, unary
//! minus, and `+ - * /`.

use crate::circuit::{Circuit, GateKind, GateOp};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unsupported gate '{0}'")]
    UnsupportedGate(String),
    #[error("register error at {line}:{col}: {msg}")]
    Register { line: usize, col: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Str(String),
    Sym(char),
    Arrow,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn bump(&mut self) -> Option<u8> {
        let b = *self.src.get(self.pos)?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line, col: self.col, msg: msg.into() }
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        while let Some(b) = self.peek() {
            let (line, col) = (self.line, self.col);
            match b {
                b' ' | b'\t' | b'\r' | b'\n' => {
                    self.bump();
                }
                b'/' if self.src.get(self.pos + 1) == Some(&b'/') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    let mut s = String::new();
                    while let Some(c) = self.peek() {
                        if c.is_ascii_alphanumeric() || c == b'_' {
                            s.push(c as char);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    out.push(Spanned { tok: Tok::Ident(s), line, col });
                }
                b'0'..=b'9' | b'.' => {
                    let mut s = String::new();
                    let mut seen_e = false;
                    while let Some(c) = self.peek() {
                        if c.is_ascii_digit() || c == b'.' {
                            s.push(c as char);
                            self.bump();
                        } else if (c == b'e' || c == b'E') && !seen_e {
                            seen_e = true;
                            s.push(c as char);
                            self.bump();
                            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                                s.push(self.bump().unwrap() as char);
                            }
                        } else {
                            break;
                        }
                    }
                    let v: f64 = s
                        .parse()
                        .map_err(|_| ParseError::Syntax { line, col, msg: format!("bad number '{s}'") })?;
                    out.push(Spanned { tok: Tok::Number(v), line, col });
                }
                b'"' => {
                    self.bump();
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            Some(b'"') => break,
                            Some(c) => s.push(c as char),
                            None => return Err(self.err("unterminated string")),
                        }
                    }
                    out.push(Spanned { tok: Tok::Str(s), line, col });
                }
                b'-' if self.src.get(self.pos + 1) == Some(&b'>') => {
                    self.bump();
                    self.bump();
                    out.push(Spanned { tok: Tok::Arrow, line, col });
                }
                b';' | b',' | b'(' | b')' | b'[' | b']' | b'+' | b'-' | b'*' | b'/' => {
                    self.bump();
                    out.push(Spanned { tok: Tok::Sym(b as char), line, col });
                }
                other => return Err(self.err(format!("unexpected character '{}'", other as char))),
            }
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    qreg: Option<(String, usize)>,
    creg: Option<(String, usize)>,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1))
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::Syntax { line, col, msg: msg.into() }
    }

    fn register(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::Register { line, col, msg: msg.into() }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        match self.next() {
            Some(Spanned { tok: Tok::Sym(s), .. }) if s == c => Ok(()),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.syntax(format!("expected '{c}'")))
            }
        }
    }

    fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.next() {
            Some(Spanned { tok: Tok::Ident(s), .. }) => Ok(s),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.syntax("expected identifier"))
            }
        }
    }

    fn expect_index(&mut self) -> Result<usize, ParseError> {
        self.expect_sym('[')?;
        let n = match self.next() {
            Some(Spanned { tok: Tok::Number(v), line, col }) => {
                if v.fract() != 0.0 || v < 0.0 {
                    return Err(ParseError::Syntax { line, col, msg: "expected integer index".into() });
                }
                v as usize
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                return Err(self.syntax("expected integer index"));
            }
        };
        self.expect_sym(']')?;
        Ok(n)
    }

    /// Register argument: `name[idx]` or bare `name` (whole register).
    fn reg_arg(&mut self) -> Result<(String, Option<usize>), ParseError> {
        let name = self.expect_ident()?;
        if matches!(self.peek(), Some(Spanned { tok: Tok::Sym('['), .. })) {
            let idx = self.expect_index()?;
            Ok((name, Some(idx)))
        } else {
            Ok((name, None))
        }
    }

    // Precedence-climbing angle expression evaluator.
    fn expr(&mut self) -> Result<f64, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Spanned { tok: Tok::Sym('+'), .. }) => {
                    self.next();
                    acc += self.term()?;
                }
                Some(Spanned { tok: Tok::Sym('-'), .. }) => {
                    self.next();
                    acc -= self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<f64, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Spanned { tok: Tok::Sym('*'), .. }) => {
                    self.next();
                    acc *= self.factor()?;
                }
                Some(Spanned { tok: Tok::Sym('/'), .. }) => {
                    self.next();
                    let d = self.factor()?;
                    acc /= d;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<f64, ParseError> {
        match self.next() {
            Some(Spanned { tok: Tok::Sym('-'), .. }) => Ok(-self.factor()?),
            Some(Spanned { tok: Tok::Sym('+'), .. }) => self.factor(),
            Some(Spanned { tok: Tok::Number(v), .. }) => Ok(v),
            Some(Spanned { tok: Tok::Ident(name), line, col }) => {
                if name == "pi" {
                    Ok(PI)
                } else {
                    Err(ParseError::Syntax { line, col, msg: format!("unknown symbol '{name}' in expression") })
                }
            }
            Some(Spanned { tok: Tok::Sym('('), .. }) => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.syntax("expected expression"))
            }
        }
    }

    fn qubit_of(&self, arg: &(String, Option<usize>)) -> Result<Vec<usize>, ParseError> {
        let (qname, qsize) = self
            .qreg
            .as_ref()
            .ok_or_else(|| self.register("quantum register used before qreg declaration"))?;
        if &arg.0 != qname {
            return Err(self.register(format!("unknown quantum register '{}'", arg.0)));
        }
        match arg.1 {
            Some(i) if i < *qsize => Ok(vec![i]),
            Some(i) => Err(self.register(format!("qubit index {i} out of range for q[{qsize}]"))),
            None => Ok((0..*qsize).collect()),
        }
    }

    fn clbit_of(&self, arg: &(String, Option<usize>)) -> Result<Vec<usize>, ParseError> {
        let (cname, csize) = self
            .creg
            .as_ref()
            .ok_or_else(|| self.register("classical register used before creg declaration"))?;
        if &arg.0 != cname {
            return Err(self.register(format!("unknown classical register '{}'", arg.0)));
        }
        match arg.1 {
            Some(i) if i < *csize => Ok(vec![i]),
            Some(i) => Err(self.register(format!("clbit index {i} out of range for c[{csize}]"))),
            None => Ok((0..*csize).collect()),
        }
    }
}

/// Parse OpenQASM 2.0 source into a [`Circuit`]. `source_name` labels the
/// circuit (typically the file stem) and doubles as its cache identity.
pub fn parse_qasm(text: &str, source_name: &str) -> Result<Circuit, ParseError> {
    let toks = Lexer::new(text).tokenize()?;
    let mut p = Parser { toks, pos: 0, qreg: None, creg: None };
    let mut ops: Vec<GateOp> = Vec::new();

    while let Some(spanned) = p.peek().cloned() {
        let Tok::Ident(word) = spanned.tok.clone() else {
            return Err(ParseError::Syntax {
                line: spanned.line,
                col: spanned.col,
                msg: "expected statement".into(),
            });
        };
        match word.as_str() {
            "OPENQASM" => {
                p.next();
                match p.next() {
                    Some(Spanned { tok: Tok::Number(v), line, col }) => {
                        if (v - 2.0).abs() > 0.5 {
                            return Err(ParseError::Syntax {
                                line,
                                col,
                                msg: format!("unsupported OPENQASM version {v}"),
                            });
                        }
                    }
                    _ => return Err(p.syntax("expected version number")),
                }
                p.expect_sym(';')?;
            }
            "include" => {
                p.next();
                match p.next() {
                    Some(Spanned { tok: Tok::Str(_), .. }) => {}
                    _ => return Err(p.syntax("expected include path string")),
                }
                p.expect_sym(';')?;
            }
            "qreg" => {
                p.next();
                if p.qreg.is_some() {
                    return Err(p.register("multiple quantum registers are not supported"));
                }
                let name = p.expect_ident()?;
                let size = p.expect_index()?;
                p.expect_sym(';')?;
                p.qreg = Some((name, size));
            }
            "creg" => {
                p.next();
                if p.creg.is_some() {
                    return Err(p.register("multiple classical registers are not supported"));
                }
                let name = p.expect_ident()?;
                let size = p.expect_index()?;
                p.expect_sym(';')?;
                p.creg = Some((name, size));
            }
            "measure" => {
                p.next();
                let qarg = p.reg_arg()?;
                match p.next() {
                    Some(Spanned { tok: Tok::Arrow, .. }) => {}
                    _ => return Err(p.syntax("expected '->' in measure")),
                }
                let carg = p.reg_arg()?;
                p.expect_sym(';')?;
                let qs = p.qubit_of(&qarg)?;
                let cs = p.clbit_of(&carg)?;
                if qs.len() != cs.len() {
                    return Err(p.register("measure register sizes differ"));
                }
                for (q, c) in qs.into_iter().zip(cs) {
                    ops.push(GateOp::measure(q, c));
                }
            }
            "barrier" => {
                p.next();
                let mut qubits = Vec::new();
                loop {
                    let arg = p.reg_arg()?;
                    qubits.extend(p.qubit_of(&arg)?);
                    match p.peek() {
                        Some(Spanned { tok: Tok::Sym(','), .. }) => {
                            p.next();
                        }
                        _ => break,
                    }
                }
                p.expect_sym(';')?;
                ops.push(GateOp::barrier(qubits));
            }
            name => {
                let Some(kind) = GateKind::parse(name) else {
                    return Err(ParseError::UnsupportedGate(name.to_string()));
                };
                p.next();
                let mut params = Vec::new();
                if matches!(p.peek(), Some(Spanned { tok: Tok::Sym('('), .. })) {
                    p.next();
                    if !matches!(p.peek(), Some(Spanned { tok: Tok::Sym(')'), .. })) {
                        loop {
                            params.push(p.expr()?);
                            match p.peek() {
                                Some(Spanned { tok: Tok::Sym(','), .. }) => {
                                    p.next();
                                }
                                _ => break,
                            }
                        }
                    }
                    p.expect_sym(')')?;
                }
                if params.len() != kind.param_arity() {
                    return Err(p.syntax(format!(
                        "{} expects {} parameter(s), got {}",
                        kind,
                        kind.param_arity(),
                        params.len()
                    )));
                }
                let mut args = Vec::new();
                loop {
                    args.push(p.reg_arg()?);
                    match p.peek() {
                        Some(Spanned { tok: Tok::Sym(','), .. }) => {
                            p.next();
                        }
                        _ => break,
                    }
                }
                p.expect_sym(';')?;

                let arity = kind.qubit_arity().expect("barrier handled above");
                if args.len() == 1 && args[0].1.is_none() && arity == 1 {
                    // Whole-register broadcast of a one-qubit gate.
                    for q in p.qubit_of(&args[0])? {
                        ops.push(GateOp::gate_with_params(kind, params.clone(), vec![q]));
                    }
                } else {
                    if args.len() != arity {
                        return Err(p.syntax(format!(
                            "{kind} expects {arity} qubit argument(s), got {}",
                            args.len()
                        )));
                    }
                    let mut qubits = Vec::with_capacity(arity);
                    for a in &args {
                        let qs = p.qubit_of(a)?;
                        if qs.len() != 1 {
                            return Err(p.syntax("whole-register operand in multi-qubit gate"));
                        }
                        qubits.push(qs[0]);
                    }
                    let mut distinct = qubits.clone();
                    distinct.sort_unstable();
                    distinct.dedup();
                    if distinct.len() != qubits.len() {
                        return Err(p.register(format!("{kind} operands must be distinct qubits")));
                    }
                    ops.push(GateOp::gate_with_params(kind, params, qubits));
                }
            }
        }
    }

    let (num_qubits, num_clbits) = match (&p.qreg, &p.creg) {
        (Some((_, q)), Some((_, c))) => (*q, *c),
        (Some((_, q)), None) => (*q, 0),
        (None, _) => {
            return Err(ParseError::Register { line: 1, col: 1, msg: "no quantum register declared".into() })
        }
    };
    Ok(Circuit { source_name: source_name.to_string(), num_qubits, num_clbits, ops })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn parses_basic_program() {
        let c = parse_qasm(
            "qreg q[2]; creg c[2]; h q[0]; cx q[0],q[1]; measure q[0]->c[0];",
            "basic",
        )
        .unwrap();
        assert_eq!(c.num_qubits, 2);
        assert_eq!(c.ops.len(), 3);
        assert_eq!(c.ops[0].kind, GateKind::H);
        assert_eq!(c.ops[1].qubits, vec![0, 1]);
        assert_eq!(c.ops[2].kind, GateKind::Measure);
        assert_eq!(c.ops[2].clbits, vec![0]);
    }

    #[test]
    fn evaluates_pi_fractions() {
        let c = parse_qasm("qreg q[1]; rz(pi/2) q[0];", "rz").unwrap();
        assert!((c.ops[0].params[0] - PI / 2.0).abs() < 1e-15);
        let c = parse_qasm("qreg q[1]; rz(-3*pi/4) q[0];", "rz2").unwrap();
        assert!((c.ops[0].params[0] + 3.0 * PI / 4.0).abs() < 1e-15);
        let c = parse_qasm("qreg q[1]; u(pi/2,0.1+0.2,(1-2)*pi) q[0];", "u").unwrap();
        assert!((c.ops[0].params[2] + PI).abs() < 1e-15);
    }

    #[test]
    fn rejects_unsupported_gate() {
        let err = parse_qasm("qreg q[1]; mygate q[0];", "bad").unwrap_err();
        assert_eq!(err, ParseError::UnsupportedGate("mygate".into()));
    }

    #[test]
    fn rejects_multiple_qregs() {
        let err = parse_qasm("qreg q[1]; qreg r[1];", "bad").unwrap_err();
        assert!(matches!(err, ParseError::Register { .. }));
    }

    #[test]
    fn rejects_out_of_range_index() {
        let err = parse_qasm("qreg q[2]; h q[2];", "bad").unwrap_err();
        assert!(matches!(err, ParseError::Register { .. }));
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_qasm("qreg q[2];\nh q[0]", "bad").unwrap_err();
        match err {
            ParseError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn accepts_header_and_include() {
        let c = parse_qasm(
            "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[1];\nx q[0];\n",
            "hdr",
        )
        .unwrap();
        assert_eq!(c.ops.len(), 1);
    }

    #[test]
    fn broadcasts_whole_register() {
        let c = parse_qasm("qreg q[3]; creg c[3]; h q; barrier q; measure q -> c;", "bcast").unwrap();
        assert_eq!(c.ops.len(), 3 + 1 + 3);
        assert_eq!(c.ops[3].kind, GateKind::Barrier);
        assert_eq!(c.ops[3].qubits, vec![0, 1, 2]);
    }

    #[test]
    fn rejects_duplicate_operands() {
        let err = parse_qasm("qreg q[2]; cx q[0],q[0];", "dup").unwrap_err();
        assert!(matches!(err, ParseError::Register { .. }));
    }

    #[test]
    fn roundtrip_through_serializer() {
        let src = "qreg q[3]; creg c[2]; h q[0]; rz(pi/4) q[1]; cx q[0],q[2]; ccx q[0],q[1],q[2]; barrier q[0],q[1]; measure q[2] -> c[1];";
        let a = parse_qasm(src, "rt").unwrap();
        let b = parse_qasm(&a.to_qasm(), "rt").unwrap();
        assert_eq!(a, b);
    }
}
