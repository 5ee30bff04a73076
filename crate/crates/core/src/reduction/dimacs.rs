//! DIMACS CNF text: `c` comment lines, a `p cnf <vars> <clauses>` header,
//! then clauses as whitespace-separated signed literals ended by `0`.

use std::fmt::Write as _;

use super::cnf::{CnfFormula, Literal};
use super::ReductionError;

pub fn parse_dimacs(text: &str) -> Result<CnfFormula, ReductionError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<[Literal; 3]> = Vec::new();
    let mut pending: Vec<Literal> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(parse_err(line_no, "duplicate header"));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let parsed = match parts.as_slice() {
                ["p", "cnf", n, m] => n.parse().ok().zip(m.parse().ok()),
                _ => None,
            };
            header = Some(parsed.ok_or_else(|| parse_err(line_no, "expected `p cnf <vars> <clauses>`"))?);
            continue;
        }
        let (num_vars, _) = header.ok_or_else(|| parse_err(line_no, "clause before header"))?;
        for tok in line.split_whitespace() {
            let x: i64 = tok
                .parse()
                .map_err(|_| parse_err(line_no, &format!("bad literal `{tok}`")))?;
            match Literal::from_dimacs(x) {
                None => {
                    let clause = std::mem::take(&mut pending);
                    let arr: [Literal; 3] = clause.try_into().map_err(|c: Vec<Literal>| ReductionError::Not3Cnf {
                        clause: clauses.len(),
                        len: c.len(),
                    })?;
                    clauses.push(arr);
                }
                Some(lit) => {
                    if lit.var >= num_vars {
                        return Err(parse_err(line_no, &format!("literal {x} exceeds {num_vars} variables")));
                    }
                    pending.push(lit);
                }
            }
        }
    }

    let (num_vars, num_clauses) = header.ok_or_else(|| parse_err(last_line, "missing `p cnf` header"))?;
    if !pending.is_empty() {
        return Err(parse_err(last_line, "last clause is not terminated by 0"));
    }
    if clauses.len() != num_clauses {
        return Err(parse_err(
            last_line,
            &format!("header declares {num_clauses} clauses, found {}", clauses.len()),
        ));
    }
    CnfFormula::new(num_vars, clauses)
}

fn parse_err(line: usize, msg: &str) -> ReductionError {
    ReductionError::ParseError {
        line,
        msg: msg.to_string(),
    }
}

/// Canonical text: header line, then one clause per line.
pub fn emit_dimacs(f: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", f.num_vars(), f.num_clauses());
    for [a, b, c] in f.clauses() {
        let _ = writeln!(out, "{a} {b} {c} 0");
    }
    out
}
