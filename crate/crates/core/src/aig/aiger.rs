//! ASCII AIGER (`aag`) export and import of combinational functions.
//!
//! Only the combinational subset is supported: `L` must be 0 on input.
//! Inputs and outputs carry symbol-table names so a vector of Skolem
//! functions can be matched back to the variables of a problem instance.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{AigManager, Node, NodeRef, VarId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AigerError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("latches are not supported (L = {0})")]
    Latches(usize),
    #[error("output depends on variable {0} which is not a declared input")]
    UndeclaredInput(String),
    #[error("input `{0}` does not match any known variable")]
    UnknownInput(String),
    #[error("literal {0} is used before it is defined")]
    Undefined(u32),
}

/// Serialises `outputs` over the declared `inputs` as an `aag` file.
pub fn write_aag(
    mgr: &AigManager,
    inputs: &[(String, VarId)],
    outputs: &[(String, NodeRef)],
) -> Result<String, AigerError> {
    let roots: Vec<NodeRef> = outputs.iter().map(|(_, r)| *r).collect();
    let cone = mgr.cone(&roots);
    let mut lit_of: HashMap<u32, u32> = HashMap::new();
    lit_of.insert(0, 0);
    let input_pos: HashMap<VarId, usize> =
        inputs.iter().enumerate().map(|(i, (_, v))| (*v, i)).collect();
    for &idx in &cone {
        if let Node::Var(v) = mgr.nodes[idx as usize] {
            let pos = *input_pos
                .get(&v)
                .ok_or_else(|| AigerError::UndeclaredInput(mgr.display_name(v)))?;
            lit_of.insert(idx, 2 * (pos as u32 + 1));
        }
    }
    let num_inputs = inputs.len() as u32;
    let mut ands = Vec::new();
    for &idx in &cone {
        if let Node::And(a, b) = mgr.nodes[idx as usize] {
            let lhs = 2 * (num_inputs + ands.len() as u32 + 1);
            lit_of.insert(idx, lhs);
            let la = lit_of[&a.index()] ^ a.is_complemented() as u32;
            let lb = lit_of[&b.index()] ^ b.is_complemented() as u32;
            // aag convention: rhs0 >= rhs1
            ands.push((lhs, la.max(lb), la.min(lb)));
        }
    }
    let max_var = num_inputs + ands.len() as u32;
    let mut out = String::new();
    let _ = writeln!(out, "aag {} {} 0 {} {}", max_var, num_inputs, outputs.len(), ands.len());
    for i in 0..num_inputs {
        let _ = writeln!(out, "{}", 2 * (i + 1));
    }
    for (_, r) in outputs {
        let _ = writeln!(out, "{}", lit_of[&r.index()] ^ r.is_complemented() as u32);
    }
    for (lhs, a, b) in &ands {
        let _ = writeln!(out, "{} {} {}", lhs, a, b);
    }
    for (i, (name, _)) in inputs.iter().enumerate() {
        let _ = writeln!(out, "i{} {}", i, name);
    }
    for (i, (name, _)) in outputs.iter().enumerate() {
        let _ = writeln!(out, "o{} {}", i, name);
    }
    Ok(out)
}

/// A parsed combinational `aag` file.
#[derive(Debug, Clone)]
pub struct AagFile {
    pub inputs: Vec<(u32, Option<String>)>,
    pub outputs: Vec<(u32, Option<String>)>,
    pub ands: Vec<(u32, u32, u32)>,
}

impl AagFile {
    pub fn parse(text: &str) -> Result<AagFile, AigerError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let syntax = |line: usize, msg: &str| AigerError::Syntax { line, msg: msg.to_owned() };
        let (hline, header) = lines.next().ok_or_else(|| syntax(1, "empty file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 || fields[0] != "aag" {
            return Err(syntax(hline, "expected header `aag M I L O A`"));
        }
        let nums: Vec<usize> = fields[1..]
            .iter()
            .map(|f| f.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| syntax(hline, "non-numeric header field"))?;
        let (num_in, num_latch, num_out, num_and) = (nums[1], nums[2], nums[3], nums[4]);
        if num_latch != 0 {
            return Err(AigerError::Latches(num_latch));
        }
        let mut next_nums = |count: usize| -> Result<(usize, Vec<u32>), AigerError> {
            let (ln, l) = lines.next().ok_or_else(|| syntax(0, "unexpected end of file"))?;
            let v: Vec<u32> = l
                .split_whitespace()
                .map(|t| t.parse::<u32>())
                .collect::<Result<_, _>>()
                .map_err(|_| syntax(ln, "expected unsigned literals"))?;
            if v.len() != count {
                return Err(syntax(ln, &format!("expected {} literal(s)", count)));
            }
            Ok((ln, v))
        };
        let mut inputs = Vec::with_capacity(num_in);
        for _ in 0..num_in {
            let (ln, v) = next_nums(1)?;
            if v[0] < 2 || v[0] & 1 == 1 {
                return Err(syntax(ln, "input literal must be even and non-constant"));
            }
            inputs.push((v[0], None));
        }
        let mut outputs = Vec::with_capacity(num_out);
        for _ in 0..num_out {
            outputs.push((next_nums(1)?.1[0], None));
        }
        let mut ands = Vec::with_capacity(num_and);
        for _ in 0..num_and {
            let (ln, v) = next_nums(3)?;
            if v[0] & 1 == 1 {
                return Err(syntax(ln, "AND lhs must be even"));
            }
            ands.push((v[0], v[1], v[2]));
        }
        for (ln, l) in lines {
            if l == "c" || l.starts_with("c ") {
                break;
            }
            let (kind, rest) = l.split_at(1.min(l.len()));
            let (pos, name) = rest.split_once(' ').ok_or_else(|| syntax(ln, "bad symbol line"))?;
            let pos: usize = pos.parse().map_err(|_| syntax(ln, "bad symbol index"))?;
            let table = match kind {
                "i" => &mut inputs,
                "o" => &mut outputs,
                _ => return Err(syntax(ln, "unsupported symbol kind")),
            };
            let entry = table.get_mut(pos).ok_or_else(|| syntax(ln, "symbol index out of range"))?;
            entry.1 = Some(name.to_owned());
        }
        Ok(AagFile { inputs, outputs, ands })
    }

    /// Rebuilds the outputs inside `mgr`, resolving each named input through
    /// `resolve`. Unnamed inputs and outputs are named `i<k>` / `o<k>`.
    pub fn build(
        &self,
        mgr: &mut AigManager,
        mut resolve: impl FnMut(&str) -> Option<NodeRef>,
    ) -> Result<Vec<(String, NodeRef)>, AigerError> {
        let mut defined: HashMap<u32, NodeRef> = HashMap::new();
        defined.insert(0, NodeRef::FALSE);
        for (k, (lit, name)) in self.inputs.iter().enumerate() {
            let name = name.clone().unwrap_or_else(|| format!("i{}", k));
            let r = resolve(&name).ok_or(AigerError::UnknownInput(name))?;
            defined.insert(lit >> 1, r);
        }
        let get = |defined: &HashMap<u32, NodeRef>, lit: u32| -> Result<NodeRef, AigerError> {
            let r = *defined.get(&(lit >> 1)).ok_or(AigerError::Undefined(lit))?;
            Ok(if lit & 1 == 1 { !r } else { r })
        };
        for &(lhs, a, b) in &self.ands {
            let ra = get(&defined, a)?;
            let rb = get(&defined, b)?;
            let r = mgr.mk_and(ra, rb);
            defined.insert(lhs >> 1, r);
        }
        self.outputs
            .iter()
            .enumerate()
            .map(|(k, (lit, name))| {
                let name = name.clone().unwrap_or_else(|| format!("o{}", k));
                Ok((name, get(&defined, *lit)?))
            })
            .collect()
    }
}
