//! SAT oracle with a bundled solver and an external-process backend.

mod external;

use std::time::{Duration, Instant};

use batsat::{lbool, Callbacks, Lit, SolverInterface, SolverOpts};
use thiserror::Error;

use crate::frontend::Cnf;

pub use crate::assignment::Assignment;
pub use external::parse_competition_output;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("solver executable `{0}` not found")]
    MissingExecutable(String),
    #[error("failed to run solver: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver protocol violation: {0}")]
    Protocol(String),
    #[error("solver timed out")]
    Timeout,
    #[error("solver model falsifies clause {clause} ({diag})")]
    BadModel { clause: usize, diag: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum Backend {
    /// Bundled CDCL solver (MiniSat 2.2 lineage).
    #[default]
    Internal,
    /// Child process given a DIMACS file path as its last argument and
    /// answering with `s SATISFIABLE` / `s UNSATISFIABLE` and `v` lines.
    External { program: String, args: Vec<String> },
}

impl Backend {
    /// Splits a shell-like command line on whitespace.
    pub fn external(command: &str) -> Backend {
        let mut parts = command.split_whitespace().map(str::to_owned);
        let program = parts.next().unwrap_or_default();
        Backend::External { program, args: parts.collect() }
    }
}

/// Outcome of a query. `Sat` holds a total model indexed by CNF variable
/// (index 0 unused); variables the solver left open are completed with 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat(Vec<bool>),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn model(&self) -> Option<&[bool]> {
        match self {
            SatResult::Sat(m) => Some(m),
            SatResult::Unsat => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct OracleStats {
    pub calls: u64,
    pub time: Duration,
}

/// One query at a time; independent oracles may run on different threads.
#[derive(Debug, Default)]
pub struct SatOracle {
    backend: Backend,
    deadline: Option<Instant>,
    stats: OracleStats,
}

impl SatOracle {
    pub fn new() -> SatOracle {
        SatOracle::default()
    }

    pub fn with_backend(backend: Backend) -> SatOracle {
        SatOracle { backend, ..SatOracle::default() }
    }

    pub fn set_backend(&mut self, backend: Backend) {
        self.backend = backend;
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    /// Queries still running at `deadline` fail with [`OracleError::Timeout`].
    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    pub fn stats(&self) -> OracleStats {
        self.stats
    }

    pub fn solve(&mut self, cnf: &Cnf) -> Result<SatResult, OracleError> {
        let start = Instant::now();
        let res = match &self.backend {
            Backend::Internal => solve_internal(cnf, self.deadline),
            Backend::External { program, args } => external::solve(program, args, cnf, self.deadline),
        };
        self.stats.calls += 1;
        self.stats.time += start.elapsed();
        let res = res?;
        if let SatResult::Sat(model) = &res {
            check_model(cnf, model)?;
        }
        Ok(res)
    }
}

fn check_model(cnf: &Cnf, model: &[bool]) -> Result<(), OracleError> {
    if model.len() != cnf.num_vars as usize + 1 {
        return Err(OracleError::Protocol(format!(
            "model has {} variables, expected {}",
            model.len().saturating_sub(1),
            cnf.num_vars
        )));
    }
    for (i, c) in cnf.clauses.iter().enumerate() {
        if !c.iter().any(|&l| model[l.unsigned_abs() as usize] == (l > 0)) {
            return Err(OracleError::BadModel { clause: i, diag: format!("{:?}", c) });
        }
    }
    Ok(())
}

struct Deadline(Option<Instant>);

impl Callbacks for Deadline {
    fn stop(&self) -> bool {
        self.0.is_some_and(|d| Instant::now() >= d)
    }
}

fn solve_internal(cnf: &Cnf, deadline: Option<Instant>) -> Result<SatResult, OracleError> {
    if cnf.clauses.iter().any(|c| c.is_empty()) {
        return Ok(SatResult::Unsat);
    }
    if deadline.is_some_and(|d| Instant::now() >= d) {
        return Err(OracleError::Timeout);
    }
    let mut solver = batsat::Solver::new(SolverOpts::default(), Deadline(deadline));
    let vars: Vec<batsat::Var> = (0..cnf.num_vars).map(|_| solver.new_var_default()).collect();
    let lit = |l: i32| Lit::new(vars[l.unsigned_abs() as usize - 1], l > 0);
    let mut buf = Vec::new();
    for c in &cnf.clauses {
        buf.clear();
        buf.extend(c.iter().map(|&l| lit(l)));
        if !solver.add_clause_reuse(&mut buf) {
            return Ok(SatResult::Unsat);
        }
    }
    let r = solver.solve_limited(&[]);
    if r == lbool::TRUE {
        let mut model = vec![false; cnf.num_vars as usize + 1];
        for (i, &v) in vars.iter().enumerate() {
            model[i + 1] = solver.value_var(v) == lbool::TRUE;
        }
        Ok(SatResult::Sat(model))
    } else if r == lbool::FALSE {
        Ok(SatResult::Unsat)
    } else {
        Err(OracleError::Timeout)
    }
}
