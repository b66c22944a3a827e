//! DIMACS CNF reading and writing.

use std::fmt::Write;

use super::{Clause, CnfFormula, Literal};
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parse a DIMACS CNF document whose clauses all have exactly three literals.
///
/// Comment lines (`c ...`) are skipped and a SATLIB-style `%` line ends the
/// clause section. Clauses may span lines; errors report the line on which
/// the offending clause terminates.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<Literal> = Vec::with_capacity(3);

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(parse_err(lineno, "duplicate problem line"));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parsed = match fields.as_slice() {
                ["p", "cnf", n, m] => n.parse::<u32>().ok().zip(m.parse::<usize>().ok()),
                _ => None,
            };
            match parsed {
                Some((n, m)) if n > 0 => header = Some((n, m)),
                _ => return Err(parse_err(lineno, format!("malformed header `{line}`"))),
            }
            continue;
        }
        let Some((n, _)) = header else {
            return Err(parse_err(lineno, "clause before `p cnf` header"));
        };
        for token in line.split_whitespace() {
            let value: i64 = token
                .parse()
                .map_err(|_| parse_err(lineno, format!("invalid literal `{token}`")))?;
            if value == 0 {
                if current.len() != 3 {
                    return Err(parse_err(
                        lineno,
                        format!("clause of length {} at line {lineno}", current.len()),
                    ));
                }
                clauses.push([current[0], current[1], current[2]]);
                current.clear();
                continue;
            }
            let var = value.unsigned_abs();
            if var > u64::from(n) {
                return Err(parse_err(
                    lineno,
                    format!("variable {var} out of range 1..={n}"),
                ));
            }
            current.push(Literal::new((var - 1) as u32, value < 0));
        }
    }

    let Some((n, m)) = header else {
        return Err(parse_err(text.lines().count().max(1), "missing `p cnf` header"));
    };
    if !current.is_empty() {
        return Err(parse_err(text.lines().count(), "unterminated clause at end of input"));
    }
    if clauses.len() != m {
        return Err(parse_err(
            1,
            format!("header declares {m} clauses but {} were read", clauses.len()),
        ));
    }
    CnfFormula::new(n, clauses).map_err(|e| parse_err(0, e.to_string()))
}

/// Canonical DIMACS text: header line, then one `a b c 0` line per clause.
pub fn emit_dimacs(formula: &CnfFormula) -> String {
    let mut out = String::with_capacity(16 + formula.num_clauses() * 16);
    let _ = writeln!(out, "p cnf {} {}", formula.num_vars(), formula.num_clauses());
    for clause in formula.clauses() {
        let _ = writeln!(
            out,
            "{} {} {} 0",
            clause[0].to_dimacs(),
            clause[1].to_dimacs(),
            clause[2].to_dimacs()
        );
    }
    out
}
