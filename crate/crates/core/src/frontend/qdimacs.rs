//! QDIMACS reader.
//!
//! Accepted prefixes are `∀Y ∃X` shapes: zero or more `a` lines followed by
//! zero or more `e` lines. The innermost `e` block becomes `X`; every other
//! variable in `1..=V` is free. Each clause becomes one factor.

use std::collections::HashSet;

use super::{Cnf, FactoredSpec, ParseError};
use crate::aig::{AigManager, NodeRef, VarId};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Quant {
    Forall,
    Exists,
}

struct Scanned {
    num_vars: u32,
    blocks: Vec<(Quant, Vec<VarId>)>,
    clauses: Vec<Vec<i32>>,
}

fn scan(text: &str) -> Result<Scanned, ParseError> {
    let mut header: Option<(u32, usize)> = None;
    let mut blocks: Vec<(Quant, Vec<VarId>)> = Vec::new();
    let mut quantified = HashSet::new();
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut pending: Vec<i32> = Vec::new();
    let mut in_matrix = false;
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let Some((num_vars, _)) = header else {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 || f[0] != "p" || f[1] != "cnf" {
                return Err(ParseError::at(line_no, None, "expected header `p cnf <vars> <clauses>`"));
            }
            let v = f[2]
                .parse::<u32>()
                .map_err(|_| ParseError::at(line_no, None, "invalid variable count"))?;
            let c = f[3]
                .parse::<usize>()
                .map_err(|_| ParseError::at(line_no, None, "invalid clause count"))?;
            header = Some((v, c));
            continue;
        };
        let first = line.split_whitespace().next().unwrap_or("");
        if first == "a" || first == "e" {
            if in_matrix {
                return Err(ParseError::at(line_no, None, "quantifier line after the first clause"));
            }
            let q = if first == "a" { Quant::Forall } else { Quant::Exists };
            let mut vars = Vec::new();
            let mut terminated = false;
            for tok in line.split_whitespace().skip(1) {
                if terminated {
                    return Err(ParseError::at(line_no, None, "tokens after terminating 0"));
                }
                let v: i64 = tok
                    .parse()
                    .map_err(|_| ParseError::at(line_no, None, format!("invalid variable `{}`", tok)))?;
                if v == 0 {
                    terminated = true;
                    continue;
                }
                if v < 0 || v > num_vars as i64 {
                    return Err(ParseError::at(line_no, None, format!("variable {} out of range 1..={}", v, num_vars)));
                }
                let var = VarId(v as u32);
                if !quantified.insert(var) {
                    return Err(ParseError::at(line_no, None, format!("variable {} quantified twice", v)));
                }
                vars.push(var);
            }
            if !terminated {
                return Err(ParseError::at(line_no, None, "quantifier line not terminated by 0"));
            }
            match blocks.last_mut() {
                Some((last, vs)) if *last == q => vs.extend(vars),
                _ => blocks.push((q, vars)),
            }
            continue;
        }
        in_matrix = true;
        for tok in line.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| ParseError::at(line_no, None, format!("invalid literal `{}`", tok)))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut pending));
            } else if lit.unsigned_abs() > num_vars as u64 {
                return Err(ParseError::at(line_no, None, format!("literal {} out of range 1..={}", lit, num_vars)));
            } else {
                pending.push(lit as i32);
            }
        }
    }

    let (num_vars, num_clauses) = header.ok_or_else(|| ParseError::at(last_line.max(1), None, "missing `p cnf` header"))?;
    if !pending.is_empty() {
        return Err(ParseError::at(last_line, None, "last clause is not terminated by 0"));
    }
    if clauses.len() != num_clauses {
        return Err(ParseError::at(
            last_line.max(1),
            None,
            format!("header declares {} clauses, found {}", num_clauses, clauses.len()),
        ));
    }

    Ok(Scanned { num_vars, blocks, clauses })
}

/// Plain DIMACS CNF. Quantifier lines are rejected.
pub fn parse_dimacs(text: &str) -> Result<Cnf, ParseError> {
    let Scanned { num_vars, blocks, clauses } = scan(text)?;
    if !blocks.is_empty() {
        return Err(ParseError::at(1, None, "quantifier lines are not allowed in plain CNF"));
    }
    Ok(Cnf { num_vars, clauses })
}

pub fn parse_qdimacs(text: &str) -> Result<FactoredSpec, ParseError> {
    let Scanned { num_vars, mut blocks, clauses } = scan(text)?;
    let shape: Vec<Quant> = blocks.iter().map(|(q, _)| *q).collect();
    let x_order = match shape.as_slice() {
        [] | [Quant::Forall] => Vec::new(),
        [Quant::Exists] | [Quant::Forall, Quant::Exists] => blocks.pop().map(|(_, v)| v).unwrap_or_default(),
        _ => {
            return Err(ParseError::at(
                1,
                None,
                "unsupported quantifier prefix: expected `a ... e ...` with a single innermost existential block",
            ))
        }
    };

    let mut manager = AigManager::new();
    for v in 1..=num_vars {
        manager.set_name(VarId(v), v.to_string());
    }
    let xs: HashSet<VarId> = x_order.iter().copied().collect();
    let y_vars: Vec<VarId> = (1..=num_vars).map(VarId).filter(|v| !xs.contains(v)).collect();
    let factors = clauses
        .iter()
        .map(|c| {
            let lits: Vec<NodeRef> = c
                .iter()
                .map(|&l| {
                    let leaf = manager.mk_var(VarId(l.unsigned_abs()));
                    if l < 0 {
                        !leaf
                    } else {
                        leaf
                    }
                })
                .collect();
            manager.mk_big_or(lits)
        })
        .collect();
    Ok(FactoredSpec { manager, factors, x_order, y_vars })
}
