//! Skolem function synthesis engines.
//!
//! Both engines produce one function ψᵢ per existential variable, first in
//! *chained* form (ψᵢ may mention later existentials xᵢ₊₁…xₙ) and then, after
//! [`reverse_substitute`], in *final* form over the free variables only.

mod cb_state;
mod cegar;
mod error_formula;
mod generalize;
mod mono;

use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::aig::{AigManager, NodeRef, VarId};
use crate::frontend::FactoredSpec;
use crate::sat::OracleError;

pub use cb_state::{CbSet, CbState};
pub use cegar::{
    cegar_skolem, cegar_skolem_observed, init_abs_ref, update_abs_ref, CegarConfig, CegarObserver, CegarOutcome,
    RefinementCube, UpdateTrace,
};
pub use error_formula::{build_error_formula, ErrorFormula, ErrorQuery};
pub use generalize::{generalize, GeneralizeStrategy};
pub use mono::mono_skolem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Engine {
    Mono,
    Cegar,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Mono => "mono",
            Engine::Cegar => "cegar",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Runs `engine` on `spec`. The monolithic engine only reads the budget
/// from `cfg`.
pub fn synthesize(
    spec: &mut FactoredSpec,
    engine: Engine,
    cfg: &CegarConfig,
) -> Result<(SkolemVector, RunStats), SynthError> {
    match engine {
        Engine::Mono => mono_skolem(spec, &cfg.budget),
        Engine::Cegar => cegar_skolem(spec, cfg).map(|o| (o.vector, o.stats)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    /// Supp(ψᵢ) ⊆ {xᵢ₊₁,…,xₙ} ∪ Y.
    Chained,
    /// Supp(ψᵢ) ⊆ Y.
    Final,
}

/// ψ₁…ψₙ, indexed by position in the elimination order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkolemVector {
    pub psi: Vec<NodeRef>,
    pub phase: Phase,
}

impl SkolemVector {
    pub fn new(psi: Vec<NodeRef>, phase: Phase) -> SkolemVector {
        SkolemVector { psi, phase }
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    /// Checks the support invariant of the recorded phase.
    pub fn respects_phase(&self, mgr: &AigManager, x_order: &[VarId]) -> bool {
        self.psi.iter().enumerate().all(|(i, &f)| {
            let allowed_from = match self.phase {
                Phase::Chained => i + 1,
                Phase::Final => x_order.len(),
            };
            let supp = mgr.support(f);
            x_order[..allowed_from].iter().all(|x| supp.binary_search(x).is_err())
        })
    }

    /// Average and maximum AND-node count over the components.
    pub fn sizes(&self, mgr: &AigManager) -> (f64, usize) {
        if self.psi.is_empty() {
            return (0.0, 0);
        }
        let counts: Vec<usize> = self.psi.iter().map(|&f| mgr.node_count(f)).collect();
        let max = counts.iter().copied().max().unwrap_or(0);
        (counts.iter().sum::<usize>() as f64 / counts.len() as f64, max)
    }
}

/// Substitutes ψₙ, then ψₙ₋₁, … back into the earlier components so every
/// ψᵢ ends up over Y only.
pub fn reverse_substitute(mgr: &mut AigManager, x_order: &[VarId], v: SkolemVector) -> SkolemVector {
    let mut meter = Meter::unlimited();
    reverse_substitute_metered(mgr, x_order, v, &mut meter).expect("unlimited meter never trips")
}

fn reverse_substitute_metered(
    mgr: &mut AigManager,
    x_order: &[VarId],
    v: SkolemVector,
    meter: &mut Meter,
) -> Result<SkolemVector, BudgetKind> {
    debug_assert!(v.respects_phase(mgr, x_order), "reverse substitution needs a chained vector");
    let mut psi = v.psi;
    for i in (1..psi.len()).rev() {
        for k in (0..i).rev() {
            psi[k] = mgr.compose(psi[k], x_order[i], psi[i]);
        }
        meter.check(mgr)?;
    }
    Ok(SkolemVector::new(psi, Phase::Final))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BudgetKind {
    Iterations,
    Nodes,
    Time,
}

impl fmt::Display for BudgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BudgetKind::Iterations => "iteration-budget",
            BudgetKind::Nodes => "node-budget",
            BudgetKind::Time => "timeout",
        })
    }
}

/// Resource limits for one engine run.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub max_iterations: u64,
    /// Cap on the manager's node table; stands in for a memory limit.
    pub max_nodes: usize,
    pub time_limit: Option<Duration>,
}

impl Default for Budget {
    fn default() -> Budget {
        Budget { max_iterations: 1_000_000, max_nodes: 50_000_000, time_limit: None }
    }
}

/// Counters reported by both engines.
#[derive(Clone, Debug, Default)]
pub struct RunStats {
    pub refinements: u64,
    pub sat_calls: u64,
    pub sat_time: Duration,
    pub total_time: Duration,
    pub avg_size: f64,
    pub max_size: usize,
    pub manager_nodes: usize,
}

impl RunStats {
    pub fn sat_time_frac(&self) -> f64 {
        if self.total_time.is_zero() {
            0.0
        } else {
            self.sat_time.as_secs_f64() / self.total_time.as_secs_f64()
        }
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("{kind} exceeded after {} refinements", stats.refinements)]
    Budget { kind: BudgetKind, stats: Box<RunStats> },
    #[error("SAT oracle failed: {0}")]
    Oracle(OracleError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl SynthError {
    pub fn reason(&self) -> String {
        match self {
            SynthError::Budget { kind, .. } => kind.to_string(),
            SynthError::Oracle(OracleError::Timeout) => "timeout".into(),
            SynthError::Oracle(_) => "oracle-error".into(),
            SynthError::Internal(_) => "internal-error".into(),
        }
    }
}

pub(crate) struct Meter {
    start: Instant,
    deadline: Option<Instant>,
    budget: Budget,
}

impl Meter {
    pub(crate) fn new(budget: Budget) -> Meter {
        let start = Instant::now();
        Meter { start, deadline: budget.time_limit.map(|t| start + t), budget }
    }

    fn unlimited() -> Meter {
        Meter::new(Budget { max_iterations: u64::MAX, max_nodes: usize::MAX, time_limit: None })
    }

    pub(crate) fn deadline(&self) -> Option<Instant> {
        self.deadline
    }

    pub(crate) fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    pub(crate) fn check(&self, mgr: &AigManager) -> Result<(), BudgetKind> {
        if mgr.len() > self.budget.max_nodes {
            return Err(BudgetKind::Nodes);
        }
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(BudgetKind::Time);
        }
        Ok(())
    }

    pub(crate) fn check_iterations(&self, done: u64) -> Result<(), BudgetKind> {
        if done >= self.budget.max_iterations {
            Err(BudgetKind::Iterations)
        } else {
            Ok(())
        }
    }
}
