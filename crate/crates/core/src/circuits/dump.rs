//! Plain-text circuit listing.
//!
//! One gate per line, `#` starts a comment. Controls are written as the qubit
//! index, prefixed with `!` when the control fires on 0.
//!
//! ```text
//! qubits 11
//! load 0+6 : 0.125 0.125 ...
//! h 7
//! x 3
//! mcx 5 | 7 !8 9
//! mch 2 | 0 !1
//! swap 1 2
//! cdiag 0+10 | !10 : 1,0 0.5,0.8660254037844386 ...
//! ```
//!
//! Spans are `start+len`; complex numbers are `re,im`. Floats use Rust's
//! shortest round-trip formatting, so parsing a dump reproduces the circuit
//! bit for bit.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::pipeline::Circuit;
use crate::error::{Error, Result};
use crate::quantum::{Control, GateOp, QubitSpan};

fn control(c: &Control) -> String {
    if c.value {
        c.qubit.to_string()
    } else {
        format!("!{}", c.qubit)
    }
}

fn controls(cs: &[Control]) -> String {
    cs.iter().map(control).collect::<Vec<_>>().join(" ")
}

/// Renders one gate as a single line (no trailing newline).
pub fn format_gate(g: &GateOp) -> String {
    let mut s = String::new();
    match g {
        GateOp::Hadamard { target } => write!(s, "h {target}"),
        GateOp::PauliX { target } => write!(s, "x {target}"),
        GateOp::MultiControlledX {
            controls: cs,
            target,
        } => write!(s, "mcx {target} | {}", controls(cs)),
        GateOp::MultiControlledHadamard {
            controls: cs,
            target,
        } => {
            write!(s, "mch {target} | {}", controls(cs))
        }
        GateOp::Swap { a, b } => write!(s, "swap {a} {b}"),
        GateOp::ControlledDiagonal {
            control: c,
            span,
            diagonal,
        } => {
            let entries: Vec<String> = diagonal
                .iter()
                .map(|z| format!("{:?},{:?}", z.re, z.im))
                .collect();
            write!(
                s,
                "cdiag {}+{} | {} : {}",
                span.start,
                span.len,
                control(c),
                entries.join(" ")
            )
        }
        GateOp::AmplitudeLoad { span, values } => {
            let entries: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
            write!(
                s,
                "load {}+{} : {}",
                span.start,
                span.len,
                entries.join(" ")
            )
        }
    }
    .expect("writing to a String");
    s
}

pub fn dump_circuit(c: &Circuit) -> String {
    let mut out = format!("qubits {}\n", c.n_qubits());
    for g in c.gates() {
        out.push_str(&format_gate(g));
        out.push('\n');
    }
    out
}

fn err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("circuit line {line}: {msg}"))
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| err(line, format!("expected a qubit index, got {tok:?}")))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse()
        .map_err(|_| err(line, format!("expected a number, got {tok:?}")))
}

fn parse_control(tok: &str, line: usize) -> Result<Control> {
    match tok.strip_prefix('!') {
        Some(q) => Ok(Control::zero(parse_usize(q, line)?)),
        None => Ok(Control::one(parse_usize(tok, line)?)),
    }
}

fn parse_span(tok: &str, line: usize) -> Result<QubitSpan> {
    let (a, b) = tok
        .split_once('+')
        .ok_or_else(|| err(line, format!("expected start+len, got {tok:?}")))?;
    Ok(QubitSpan::new(parse_usize(a, line)?, parse_usize(b, line)?))
}

/// Parses one gate line.
pub fn parse_gate(text: &str, line: usize) -> Result<GateOp> {
    let (head, payload) = match text.split_once(':') {
        Some((h, p)) => (h, Some(p)),
        None => (text, None),
    };
    let (lhs, ctrl) = match head.split_once('|') {
        Some((l, c)) => (l, Some(c)),
        None => (head, None),
    };
    let mut toks = lhs.split_whitespace();
    let name = toks.next().ok_or_else(|| err(line, "empty gate"))?;
    let args: Vec<&str> = toks.collect();
    let ctrls = ctrl
        .map(|c| {
            c.split_whitespace()
                .map(|t| parse_control(t, line))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    let one_arg = |what: &str| -> Result<&str> {
        match args.as_slice() {
            [a] => Ok(*a),
            _ => Err(err(line, format!("{name} takes one {what}"))),
        }
    };
    let gate = match name {
        "h" => GateOp::Hadamard {
            target: parse_usize(one_arg("target")?, line)?,
        },
        "x" => GateOp::PauliX {
            target: parse_usize(one_arg("target")?, line)?,
        },
        "mcx" | "mch" => {
            let target = parse_usize(one_arg("target")?, line)?;
            let controls = ctrls.ok_or_else(|| err(line, format!("{name} needs '| controls'")))?;
            if name == "mcx" {
                GateOp::MultiControlledX { controls, target }
            } else {
                GateOp::MultiControlledHadamard { controls, target }
            }
        }
        "swap" => match args.as_slice() {
            [a, b] => GateOp::Swap {
                a: parse_usize(a, line)?,
                b: parse_usize(b, line)?,
            },
            _ => return Err(err(line, "swap takes two qubits")),
        },
        "cdiag" => {
            let span = parse_span(one_arg("span")?, line)?;
            let c = match ctrls.as_deref() {
                Some([c]) => *c,
                _ => return Err(err(line, "cdiag takes exactly one control")),
            };
            let payload = payload.ok_or_else(|| err(line, "cdiag needs ': entries'"))?;
            let diagonal = payload
                .split_whitespace()
                .map(|t| {
                    let (re, im) = t
                        .split_once(',')
                        .ok_or_else(|| err(line, format!("expected re,im, got {t:?}")))?;
                    Ok(Complex64::new(parse_f64(re, line)?, parse_f64(im, line)?))
                })
                .collect::<Result<Vec<_>>>()?;
            GateOp::ControlledDiagonal {
                control: c,
                span,
                diagonal,
            }
        }
        "load" => {
            let span = parse_span(one_arg("span")?, line)?;
            let payload = payload.ok_or_else(|| err(line, "load needs ': values'"))?;
            let values = payload
                .split_whitespace()
                .map(|t| parse_f64(t, line))
                .collect::<Result<Vec<_>>>()?;
            GateOp::AmplitudeLoad { span, values }
        }
        other => return Err(err(line, format!("unknown gate {other:?}"))),
    };
    Ok(gate)
}

/// Parses a listing produced by [`dump_circuit`].
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut n_qubits = None;
    let mut gates = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(n) = body.strip_prefix("qubits ") {
            if n_qubits.is_some() {
                return Err(err(line, "duplicate qubits header"));
            }
            n_qubits = Some(parse_usize(n.trim(), line)?);
            continue;
        }
        gates.push(parse_gate(body, line)?);
    }
    let n =
        n_qubits.ok_or_else(|| Error::Parse("circuit listing lacks a 'qubits N' header".into()))?;
    Circuit::from_gates(n, gates)
}
