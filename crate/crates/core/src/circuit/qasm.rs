//! OpenQASM 2.0 subset reader and writer.
//!
//! Accepted: one `qreg`, at most one `creg`, the native gates (`rx ry rz u3
//! h x cx swap measure barrier`) and a handful of aliases that are rewritten
//! into native gates on input (up to global phase).

use std::f64::consts::PI;
use std::fmt::Write as _;

use super::{Circuit, Gate, GateKind};
use crate::error::{QgoError, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Str(String),
    Sym(char),
    Arrow,
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Str(s) => s.clone(),
            Tok::Num(v) => v.to_string(),
            Tok::Sym(c) => c.to_string(),
            Tok::Arrow => "->".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let mut toks = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut line = 1;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push((Tok::Ident(chars[start..i].iter().collect()), line));
        } else if c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit))
        {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse::<f64>().map_err(|_| QgoError::Syntax {
                line,
                token: s.clone(),
                message: "malformed number".into(),
            })?;
            toks.push((Tok::Num(v), line));
        } else if c == '"' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && chars[i] != '"' {
                if chars[i] == '\n' {
                    line += 1;
                }
                i += 1;
            }
            if i >= chars.len() {
                return Err(QgoError::Syntax {
                    line,
                    token: "\"".into(),
                    message: "unterminated string".into(),
                });
            }
            toks.push((Tok::Str(chars[start..i].iter().collect()), line));
            i += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            toks.push((Tok::Arrow, line));
            i += 2;
        } else if "()[],;+-*/^{}".contains(c) {
            toks.push((Tok::Sym(c), line));
            i += 1;
        } else {
            return Err(QgoError::Syntax {
                line,
                token: c.to_string(),
                message: "unexpected character".into(),
            });
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    qreg: Option<(String, usize)>,
    creg: Option<(String, usize)>,
}

/// Qubit operand: a single index or a whole register.
enum Operand {
    One(usize),
    All,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(1, |(_, l)| *l)
    }

    fn err(&self, message: &str) -> QgoError {
        QgoError::Syntax {
            line: self.line(),
            token: self.peek().map_or_else(|| "<eof>".into(), Tok::text),
            message: message.into(),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err("expected identifier")),
        }
    }

    fn index(&mut self) -> Result<usize> {
        match self.peek() {
            Some(Tok::Num(v)) if v.fract() == 0.0 && *v >= 0.0 => {
                let v = *v as usize;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.err("expected non-negative integer")),
        }
    }

    fn expr(&mut self) -> Result<f64> {
        let mut v = self.term()?;
        loop {
            if self.eat_sym('+') {
                v += self.term()?;
            } else if self.eat_sym('-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64> {
        let mut v = self.power()?;
        loop {
            if self.eat_sym('*') {
                v *= self.power()?;
            } else if self.eat_sym('/') {
                v /= self.power()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn power(&mut self) -> Result<f64> {
        let base = self.unary()?;
        if self.eat_sym('^') {
            Ok(base.powf(self.power()?))
        } else {
            Ok(base)
        }
    }

    fn unary(&mut self) -> Result<f64> {
        if self.eat_sym('-') {
            return Ok(-self.unary()?);
        }
        if self.eat_sym('+') {
            return self.unary();
        }
        match self.next() {
            Some(Tok::Num(v)) => Ok(v),
            Some(Tok::Sym('(')) => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            Some(Tok::Ident(name)) => {
                if name == "pi" {
                    return Ok(PI);
                }
                let f: fn(f64) -> f64 = match name.as_str() {
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "exp" => f64::exp,
                    "ln" => f64::ln,
                    "sqrt" => f64::sqrt,
                    _ => {
                        self.pos -= 1;
                        return Err(self.err("unknown identifier in expression"));
                    }
                };
                self.expect_sym('(')?;
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(f(v))
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.err("expected expression"))
            }
        }
    }

    fn qubit_operand(&mut self) -> Result<Operand> {
        let line = self.line();
        let name = self.ident()?;
        let (reg, size) = self
            .qreg
            .clone()
            .ok_or_else(|| self.err("qubit used before qreg declaration"))?;
        if name != reg {
            self.pos -= 1;
            return Err(self.err("unknown quantum register"));
        }
        if self.eat_sym('[') {
            let idx = self.index()?;
            self.expect_sym(']')?;
            if idx >= size {
                return Err(QgoError::QubitOutOfRange {
                    line,
                    index: idx,
                    size,
                });
            }
            Ok(Operand::One(idx))
        } else {
            Ok(Operand::All)
        }
    }

    fn clbit_operand(&mut self) -> Result<Operand> {
        let line = self.line();
        let name = self.ident()?;
        // Without a creg declaration the first register named in a measure
        // becomes an implicit, unbounded classical register.
        let (reg, size) = match self.creg.clone() {
            Some(r) => r,
            None => {
                self.creg = Some((name.clone(), usize::MAX));
                (name.clone(), usize::MAX)
            }
        };
        if name != reg {
            self.pos -= 1;
            return Err(self.err("unknown classical register"));
        }
        if self.eat_sym('[') {
            let idx = self.index()?;
            self.expect_sym(']')?;
            if idx >= size {
                return Err(QgoError::Syntax {
                    line,
                    token: idx.to_string(),
                    message: format!("classical bit out of range for creg of size {size}"),
                });
            }
            Ok(Operand::One(idx))
        } else {
            Ok(Operand::All)
        }
    }

    fn register_decl(&mut self) -> Result<(String, usize)> {
        let name = self.ident()?;
        self.expect_sym('[')?;
        let size = self.index()?;
        self.expect_sym(']')?;
        self.expect_sym(';')?;
        Ok((name, size))
    }
}

/// Parses the supported OpenQASM 2.0 subset.
pub fn parse_qasm(text: &str) -> Result<Circuit> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
        qreg: None,
        creg: None,
    };
    let mut circuit: Option<Circuit> = None;

    while p.peek().is_some() {
        let line = p.line();
        let word = p.ident()?;
        match word.as_str() {
            "OPENQASM" => {
                match p.next() {
                    Some(Tok::Num(v)) if v == 2.0 => {}
                    _ => {
                        p.pos -= 1;
                        return Err(p.err("only OPENQASM 2.0 is supported"));
                    }
                }
                p.expect_sym(';')?;
            }
            "include" => {
                match p.next() {
                    Some(Tok::Str(_)) => {}
                    _ => {
                        p.pos -= 1;
                        return Err(p.err("expected include file name"));
                    }
                }
                p.expect_sym(';')?;
            }
            "qreg" => {
                if p.qreg.is_some() {
                    return Err(QgoError::Syntax {
                        line,
                        token: "qreg".into(),
                        message: "only one quantum register is supported".into(),
                    });
                }
                let (name, size) = p.register_decl()?;
                circuit = Some(Circuit::new(size));
                p.qreg = Some((name, size));
            }
            "creg" => {
                if p.creg.is_some() {
                    return Err(QgoError::Syntax {
                        line,
                        token: "creg".into(),
                        message: "only one classical register is supported".into(),
                    });
                }
                let (name, size) = p.register_decl()?;
                if let Some(c) = circuit.as_mut() {
                    c.num_clbits = size;
                }
                p.creg = Some((name, size));
            }
            "measure" => {
                let q = p.qubit_operand()?;
                if p.next() != Some(Tok::Arrow) {
                    p.pos -= 1;
                    return Err(p.err("expected `->`"));
                }
                let cb = p.clbit_operand()?;
                p.expect_sym(';')?;
                let c = circuit
                    .as_mut()
                    .ok_or_else(|| p.err("measure before qreg"))?;
                let pairs: Vec<(usize, usize)> = match (q, cb) {
                    (Operand::One(q), Operand::One(b)) => vec![(q, b)],
                    (Operand::All, Operand::All) => (0..c.num_qubits).map(|q| (q, q)).collect(),
                    _ => {
                        return Err(QgoError::Syntax {
                            line,
                            token: "measure".into(),
                            message: "register/bit shape mismatch".into(),
                        })
                    }
                };
                for (q, b) in pairs {
                    c.measure(q, b)?;
                }
            }
            "barrier" => {
                loop {
                    p.qubit_operand()?;
                    if !p.eat_sym(',') {
                        break;
                    }
                }
                p.expect_sym(';')?;
            }
            "gate" | "opaque" | "if" | "reset" => {
                return Err(QgoError::Syntax {
                    line,
                    token: word,
                    message: "statement not supported".into(),
                });
            }
            _ => {
                let mut params = Vec::new();
                if p.eat_sym('(') && !p.eat_sym(')') {
                    loop {
                        params.push(p.expr()?);
                        if p.eat_sym(')') {
                            break;
                        }
                        p.expect_sym(',')?;
                    }
                }
                let mut operands = Vec::new();
                loop {
                    operands.push(p.qubit_operand()?);
                    if !p.eat_sym(',') {
                        break;
                    }
                }
                p.expect_sym(';')?;
                let c = circuit.as_mut().ok_or_else(|| QgoError::Syntax {
                    line,
                    token: word.clone(),
                    message: "gate before qreg".into(),
                })?;
                let expansion = expand_alias(&word, &params, line)?;
                let arity = expansion.arity;
                if operands.len() != arity {
                    return Err(QgoError::Syntax {
                        line,
                        token: word,
                        message: format!("expected {arity} operand(s), got {}", operands.len()),
                    });
                }
                let targets: Vec<Vec<usize>> = match (arity, operands.as_slice()) {
                    (1, [Operand::All]) => (0..c.num_qubits).map(|q| vec![q]).collect(),
                    _ => {
                        let mut qs = Vec::with_capacity(arity);
                        for o in &operands {
                            match o {
                                Operand::One(q) => qs.push(*q),
                                Operand::All => {
                                    return Err(QgoError::Syntax {
                                        line,
                                        token: word,
                                        message: "register broadcast only for one-qubit gates"
                                            .into(),
                                    })
                                }
                            }
                        }
                        vec![qs]
                    }
                };
                for qs in targets {
                    for (kind, slots, ps) in &expansion.gates {
                        let gate =
                            Gate::new(*kind, slots.iter().map(|&s| qs[s]).collect(), ps.clone())
                                .map_err(|e| QgoError::Syntax {
                                    line,
                                    token: word.clone(),
                                    message: e.to_string(),
                                })?;
                        c.push(gate).map_err(|e| match e {
                            QgoError::GateAfterMeasurement { qubit, .. } => {
                                QgoError::GateAfterMeasurement { line, qubit }
                            }
                            other => other,
                        })?;
                    }
                }
            }
        }
    }
    circuit.ok_or_else(|| QgoError::Syntax {
        line: 1,
        token: "<eof>".into(),
        message: "missing qreg declaration".into(),
    })
}

struct Expansion {
    arity: usize,
    /// (kind, operand slots, params)
    gates: Vec<(GateKind, Vec<usize>, Vec<f64>)>,
}

fn expand_alias(name: &str, params: &[f64], line: usize) -> Result<Expansion> {
    let want = |n: usize| -> Result<()> {
        if params.len() == n {
            Ok(())
        } else {
            Err(QgoError::Syntax {
                line,
                token: name.to_string(),
                message: format!("expected {n} parameter(s), got {}", params.len()),
            })
        }
    };
    let one = |kind: GateKind, ps: Vec<f64>| Expansion {
        arity: 1,
        gates: vec![(kind, vec![0], ps)],
    };
    let e = match name {
        "rx" | "ry" | "rz" | "u1" | "p" => {
            want(1)?;
            let kind = match name {
                "rx" => GateKind::Rx,
                "ry" => GateKind::Ry,
                _ => GateKind::Rz,
            };
            one(kind, params.to_vec())
        }
        "u3" | "u" | "U" => {
            want(3)?;
            one(GateKind::U3, params.to_vec())
        }
        "u2" => {
            want(2)?;
            one(GateKind::U3, vec![PI / 2.0, params[0], params[1]])
        }
        "h" | "x" | "y" | "z" | "s" | "sdg" | "t" | "tdg" | "sx" | "sxdg" | "id" | "u0" => {
            want(if name == "u0" { params.len() } else { 0 })?;
            match name {
                "h" => one(GateKind::H, vec![]),
                "x" => one(GateKind::X, vec![]),
                "y" => one(GateKind::U3, vec![PI, PI / 2.0, PI / 2.0]),
                "z" => one(GateKind::Rz, vec![PI]),
                "s" => one(GateKind::Rz, vec![PI / 2.0]),
                "sdg" => one(GateKind::Rz, vec![-PI / 2.0]),
                "t" => one(GateKind::Rz, vec![PI / 4.0]),
                "tdg" => one(GateKind::Rz, vec![-PI / 4.0]),
                "sx" => one(GateKind::Rx, vec![PI / 2.0]),
                "sxdg" => one(GateKind::Rx, vec![-PI / 2.0]),
                _ => Expansion {
                    arity: 1,
                    gates: vec![],
                },
            }
        }
        "cx" | "CX" | "swap" => {
            want(0)?;
            let kind = if name == "swap" {
                GateKind::Swap
            } else {
                GateKind::Cnot
            };
            Expansion {
                arity: 2,
                gates: vec![(kind, vec![0, 1], vec![])],
            }
        }
        "cz" => {
            want(0)?;
            Expansion {
                arity: 2,
                gates: vec![
                    (GateKind::H, vec![1], vec![]),
                    (GateKind::Cnot, vec![0, 1], vec![]),
                    (GateKind::H, vec![1], vec![]),
                ],
            }
        }
        _ => {
            return Err(QgoError::UnsupportedGate {
                line,
                token: name.to_string(),
            })
        }
    };
    Ok(e)
}

fn fmt_angle(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serializes a circuit; angles carry 17 significant digits so that
/// `parse_qasm(write_qasm(c)) == c`.
pub fn write_qasm(c: &Circuit) -> String {
    let mut s = String::new();
    s.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(s, "qreg q[{}];", c.num_qubits);
    if c.num_clbits > 0 {
        let _ = writeln!(s, "creg c[{}];", c.num_clbits);
    }
    for g in &c.gates {
        s.push_str(g.kind.name());
        if !g.params.is_empty() {
            let ps: Vec<String> = g.params.iter().map(|&v| fmt_angle(v)).collect();
            let _ = write!(s, "({})", ps.join(","));
        }
        let qs: Vec<String> = g.qubits.iter().map(|q| format!("q[{q}]")).collect();
        let _ = writeln!(s, " {};", qs.join(","));
    }
    for m in &c.measurements {
        let _ = writeln!(s, "measure q[{}] -> c[{}];", m.qubit, m.clbit);
    }
    s
}
