//! DIMACS CNF reading and writing.

use crate::error::{Error, Result};
use crate::formula::{Clause, ClauseGroup, CnfFormula, Literal};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parses DIMACS CNF. Every clause gets weight 1 and group `PuzzleSpecific`.
///
/// Clauses may span lines. A `%` line (SATLIB convention) ends the input.
pub fn parse_dimacs(text: &[u8]) -> Result<CnfFormula> {
    let text = std::str::from_utf8(text).map_err(|e| parse_err(0, e.to_string()))?;
    let mut header: Option<(u32, usize)> = None;
    let mut formula = CnfFormula::new(0);
    let mut pending: Vec<Literal> = Vec::new();
    let mut pending_line = 0;

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
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
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(parse_err(line_no, "malformed header, expected `p cnf <vars> <clauses>`"));
            }
            let vars: u32 =
                fields[2].parse().map_err(|_| parse_err(line_no, format!("invalid variable count `{}`", fields[2])))?;
            let clauses: usize =
                fields[3].parse().map_err(|_| parse_err(line_no, format!("invalid clause count `{}`", fields[3])))?;
            if vars > i32::MAX as u32 {
                return Err(parse_err(line_no, "variable count too large"));
            }
            formula = CnfFormula::new(vars);
            header = Some((vars, clauses));
            continue;
        }
        let Some((vars, _)) = header else {
            return Err(parse_err(line_no, "clause before `p cnf` header"));
        };
        for tok in line.split_whitespace() {
            let v: i64 = tok.parse().map_err(|_| parse_err(line_no, format!("invalid literal `{tok}`")))?;
            if v == 0 {
                let clause = Clause::new(pending.drain(..)).map_err(|l| {
                    parse_err(line_no, format!("tautological clause (contains {l} and {})", l.negate()))
                })?;
                formula.push(clause, 1, ClauseGroup::PuzzleSpecific);
                continue;
            }
            if v.unsigned_abs() > vars as u64 {
                return Err(parse_err(line_no, format!("literal {v} exceeds declared variable count {vars}")));
            }
            if pending.is_empty() {
                pending_line = line_no;
            }
            pending.push(Literal::from_dimacs(v as i32).expect("nonzero"));
        }
    }

    let Some((_, declared)) = header else {
        return Err(parse_err(0, "missing `p cnf` header"));
    };
    if !pending.is_empty() {
        return Err(parse_err(pending_line, "clause is missing its terminating 0"));
    }
    if formula.len() != declared {
        return Err(parse_err(0, format!("header declares {declared} clauses but {} were read", formula.len())));
    }
    Ok(formula)
}

/// Serializes a formula as DIMACS CNF (weights and groups are not represented).
pub fn write_dimacs(formula: &CnfFormula) -> String {
    formula.to_dimacs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_simple_formula() {
        let f = parse_dimacs(b"p cnf 2 2\n1 2 0\n-1 0\n").unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.atom_count(), 2);
        let lits: Vec<i32> = f.clause(0).literals().iter().map(|l| l.to_dimacs()).collect();
        assert_eq!(lits, vec![1, 2]);
        assert_eq!(f.clause(1).literals()[0].to_dimacs(), -1);
        assert_eq!(f.weight(1), 1);
        assert_eq!(f.group(0), ClauseGroup::PuzzleSpecific);
    }

    #[test]
    fn empty_formula() {
        let f = parse_dimacs(b"p cnf 1 0\n").unwrap();
        assert!(f.is_empty());
        assert_eq!(f.atom_count(), 1);
    }

    #[test]
    fn comments_and_multiline_clauses() {
        let f = parse_dimacs(b"c hello\np cnf 3 1\n1 -2\n 3 0\n").unwrap();
        assert_eq!(f.clause(0).len(), 3);
    }

    #[test]
    fn errors_name_lines() {
        let err = |s: &str| match parse_dimacs(s.as_bytes()) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(err("p cnf 1 1\n1 -1 0\n"), 2);
        assert_eq!(err("c x\np cnf x 1\n"), 2);
        assert_eq!(err("p cnf 1 1\n2 0\n"), 2);
        assert_eq!(err("p cnf 2 1\n\n1 2\n"), 3);
        assert_eq!(err("1 0\n"), 1);
    }

    fn arb_formula() -> impl Strategy<Value = CnfFormula> {
        (1u32..8).prop_flat_map(|vars| {
            prop::collection::vec(prop::collection::btree_map(1..=vars, any::<bool>(), 0..4), 0..10).prop_map(
                move |clauses| {
                    let mut f = CnfFormula::new(vars);
                    for c in clauses {
                        let lits = c.into_iter().map(|(a, s)| Literal::new(a, s));
                        f.push(Clause::new(lits).unwrap(), 1, ClauseGroup::PuzzleSpecific);
                    }
                    f
                },
            )
        })
    }

    proptest! {
        #[test]
        fn round_trip_is_index_identical(f in arb_formula()) {
            let back = parse_dimacs(write_dimacs(&f).as_bytes()).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
