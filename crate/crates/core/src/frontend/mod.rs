//! Problem instances: parsing, variable ordering and CNF encoding.

mod fctr;
mod qdimacs;
pub mod tseitin;

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::aig::{AigManager, NodeRef, VarId};

pub use fctr::parse_factored;
pub use qdimacs::{parse_dimacs, parse_qdimacs};
pub use tseitin::{tseitin_cnf, Cnf, TseitinEncoder};

/// Parse failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: Option<usize>,
    pub message: String,
}

impl ParseError {
    pub(crate) fn at(line: usize, column: Option<usize>, message: impl Into<String>) -> ParseError {
        ParseError { line, column, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.column {
            Some(c) => write!(f, "line {}, column {}: {}", self.line, c, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("variable {0} is both existential and free")]
    Overlap(VarId),
    #[error("existential variable {0} is listed twice")]
    DuplicateX(VarId),
    #[error("factor {factor} mentions undeclared variable {var}")]
    Undeclared { factor: usize, var: VarId },
}

/// `∃X. f¹ ∧ … ∧ fʳ` over free variables `Y`, with `X` in elimination order.
#[derive(Debug)]
pub struct FactoredSpec {
    pub manager: AigManager,
    pub factors: Vec<NodeRef>,
    pub x_order: Vec<VarId>,
    pub y_vars: Vec<VarId>,
}

impl FactoredSpec {
    pub fn new(manager: AigManager, factors: Vec<NodeRef>, x_order: Vec<VarId>, y_vars: Vec<VarId>) -> FactoredSpec {
        FactoredSpec { manager, factors, x_order, y_vars }
    }

    /// Number of existential variables.
    pub fn n(&self) -> usize {
        self.x_order.len()
    }

    /// Number of free variables.
    pub fn m(&self) -> usize {
        self.y_vars.len()
    }

    /// Number of factors.
    pub fn r(&self) -> usize {
        self.factors.len()
    }

    /// The conjunction of all factors as a single AIG.
    pub fn conjunction(&mut self) -> NodeRef {
        let factors = self.factors.clone();
        self.manager.mk_big_and(factors)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let mut xs = HashSet::new();
        for &x in &self.x_order {
            if !xs.insert(x) {
                return Err(SpecError::DuplicateX(x));
            }
        }
        let ys: HashSet<VarId> = self.y_vars.iter().copied().collect();
        if let Some(&v) = self.x_order.iter().find(|v| ys.contains(v)) {
            return Err(SpecError::Overlap(v));
        }
        for (j, &f) in self.factors.iter().enumerate() {
            for &v in self.manager.support(f).iter() {
                if !xs.contains(&v) && !ys.contains(&v) {
                    return Err(SpecError::Undeclared { factor: j, var: v });
                }
            }
        }
        Ok(())
    }

    pub fn var_name(&self, v: VarId) -> String {
        self.manager.display_name(v)
    }

    /// Number of factors whose support contains `v`.
    pub fn occurrences(&self, v: VarId) -> usize {
        self.factors.iter().filter(|&&f| self.manager.depends_on(f, v)).count()
    }

    /// Whether some factor is the constant FALSE, making `F ≡ FALSE`.
    pub fn has_false_factor(&self) -> bool {
        self.factors.contains(&NodeRef::FALSE)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum VarOrder {
    /// Keep the order of the input file.
    Given,
    /// Fewest occurrences first, see [`order_variables`].
    #[default]
    Occurrence,
}

pub fn apply_order(spec: FactoredSpec, order: VarOrder) -> FactoredSpec {
    match order {
        VarOrder::Given => spec,
        VarOrder::Occurrence => order_variables(spec),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    Qdimacs,
    Factored,
}

impl InputFormat {
    /// `.fctr` selects the factored format; anything else is QDIMACS.
    pub fn from_path(path: &Path) -> InputFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("fctr") => InputFormat::Factored,
            _ => InputFormat::Qdimacs,
        }
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("{path}: {source}")]
    Spec { path: String, source: SpecError },
}

pub fn parse_spec(text: &str, format: InputFormat) -> Result<FactoredSpec, ParseError> {
    match format {
        InputFormat::Qdimacs => parse_qdimacs(text),
        InputFormat::Factored => parse_factored(text),
    }
}

/// Reads, parses and validates an instance file.
pub fn load_spec(path: &Path, format: Option<InputFormat>) -> Result<FactoredSpec, LoadError> {
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io { path: shown.clone(), source })?;
    let spec = parse_spec(&text, format.unwrap_or_else(|| InputFormat::from_path(path)))
        .map_err(|source| LoadError::Parse { path: shown.clone(), source })?;
    spec.validate().map_err(|source| LoadError::Spec { path: shown, source })?;
    Ok(spec)
}

/// Reorders `x_order` so variables occurring in fewer factors come first.
/// The sort is stable, so ties keep their original relative order.
pub fn order_variables(mut spec: FactoredSpec) -> FactoredSpec {
    let counts: Vec<usize> = spec.x_order.iter().map(|&x| spec.occurrences(x)).collect();
    let mut idx: Vec<usize> = (0..spec.x_order.len()).collect();
    idx.sort_by_key(|&i| counts[i]);
    spec.x_order = idx.into_iter().map(|i| spec.x_order[i]).collect();
    spec
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "p cnf 5 3\na 3 4 5 0\ne 1 2 0\n-1 -2 -3 0\n2 -5 -4 0\n1 -2 5 0\n";

    #[test]
    fn occurrence_order_on_example() {
        let spec = parse_qdimacs(EXAMPLE).unwrap();
        assert_eq!(spec.occurrences(VarId(1)), 2);
        assert_eq!(spec.occurrences(VarId(2)), 3);
        let spec = order_variables(spec);
        assert_eq!(spec.x_order, vec![VarId(1), VarId(2)]);
    }

    #[test]
    fn occurrence_order_moves_rare_vars_first() {
        let spec = parse_qdimacs("p cnf 4 3\ne 1 2 3 0\n1 2 4 0\n1 -2 0\n1 4 0\n").unwrap();
        // x1: 3 factors, x2: 2, x3: 0
        let spec = order_variables(spec);
        assert_eq!(spec.x_order, vec![VarId(3), VarId(2), VarId(1)]);
    }

    #[test]
    fn ties_keep_original_order() {
        let spec = parse_qdimacs("p cnf 3 1\ne 3 1 2 0\n1 2 3 0\n").unwrap();
        let spec = order_variables(spec);
        assert_eq!(spec.x_order, vec![VarId(3), VarId(1), VarId(2)]);
    }

    #[test]
    fn validate_rejects_overlap() {
        let mut spec = parse_qdimacs(EXAMPLE).unwrap();
        spec.y_vars.push(VarId(1));
        assert_eq!(spec.validate(), Err(SpecError::Overlap(VarId(1))));
    }
}
