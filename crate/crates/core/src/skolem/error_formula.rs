//! The error formula `F(X′,Y) ∧ ⋀ᵢ(xᵢ ⇔ ψᵢ) ∧ ¬F(X,Y)`, which is
//! unsatisfiable exactly when ψ is a Skolem function vector.

use std::collections::HashMap;

use crate::aig::{AigManager, NodeRef, VarId};
use crate::assignment::Assignment;
use crate::frontend::{FactoredSpec, TseitinEncoder};
use crate::sat::{OracleError, SatOracle, SatResult};

use super::SkolemVector;

/// The error formula as a single AIG over X′ ∪ X ∪ Y.
#[derive(Clone, Debug)]
pub struct ErrorFormula {
    pub root: NodeRef,
    /// x′ᵢ for each position of the elimination order.
    pub primed: Vec<VarId>,
}

fn primed_copy(spec: &mut FactoredSpec) -> (Vec<VarId>, NodeRef, NodeRef) {
    let f = spec.conjunction();
    let mgr = &mut spec.manager;
    let primed: Vec<VarId> = spec
        .x_order
        .iter()
        .map(|&x| {
            let name = format!("{}'", mgr.display_name(x));
            mgr.fresh_var(name)
        })
        .collect();
    let rename: HashMap<VarId, NodeRef> =
        spec.x_order.iter().zip(&primed).map(|(&x, &p)| (x, mgr.mk_var(p))).collect();
    let f_primed = mgr.substitute(f, &rename);
    (primed, f_primed, f)
}

fn consistency(mgr: &mut AigManager, x_order: &[VarId], psi: &[NodeRef]) -> Vec<NodeRef> {
    x_order
        .iter()
        .zip(psi)
        .map(|(&x, &p)| {
            let leaf = mgr.mk_var(x);
            mgr.mk_iff(leaf, p)
        })
        .collect()
}

/// Builds ε for `psi`. Fresh primed variables are allocated on every call.
pub fn build_error_formula(spec: &mut FactoredSpec, psi: &SkolemVector) -> ErrorFormula {
    let (primed, f_primed, f) = primed_copy(spec);
    let iffs = consistency(&mut spec.manager, &spec.x_order, &psi.psi);
    let mgr = &mut spec.manager;
    let mut parts = vec![f_primed];
    parts.extend(iffs);
    parts.push(!f);
    let root = mgr.mk_big_and(parts);
    ErrorFormula { root, primed }
}

/// Repeated satisfiability checks of ε for changing ψ.
///
/// `F(X′,Y) ∧ ¬F(X,Y)` is Tseitin-encoded once; each [`ErrorQuery::check`]
/// clones that encoding and adds only the `xᵢ ⇔ ψᵢ` constraints.
#[derive(Clone, Debug)]
pub struct ErrorQuery {
    primed: Vec<VarId>,
    core: TseitinEncoder,
    domain: Vec<VarId>,
}

impl ErrorQuery {
    pub fn new(spec: &mut FactoredSpec) -> ErrorQuery {
        let (primed, f_primed, f) = primed_copy(spec);
        let mgr = &spec.manager;
        let mut core = TseitinEncoder::new();
        core.assert_root(mgr, f_primed);
        core.assert_root(mgr, !f);
        let mut domain: Vec<VarId> = spec.x_order.iter().chain(&primed).chain(&spec.y_vars).copied().collect();
        domain.sort_unstable();
        for &v in &domain {
            core.declare_input(v);
        }
        ErrorQuery { primed, core, domain }
    }

    pub fn primed(&self) -> &[VarId] {
        &self.primed
    }

    /// Returns a counterexample π, total over X′ ∪ X ∪ Y, or `None` when ε is
    /// unsatisfiable.
    pub fn check(
        &self,
        mgr: &mut AigManager,
        x_order: &[VarId],
        psi: &[NodeRef],
        oracle: &mut SatOracle,
    ) -> Result<Option<Assignment>, OracleError> {
        let iffs = consistency(mgr, x_order, psi);
        let mut enc = self.core.clone();
        for r in iffs {
            enc.assert_root(mgr, r);
        }
        for v in psi.iter().flat_map(|&p| mgr.support(p).to_vec()) {
            enc.declare_input(v);
        }
        match oracle.solve(enc.cnf())? {
            SatResult::Unsat => Ok(None),
            SatResult::Sat(model) => {
                let mut pi = Assignment::new();
                for (&v, &lit) in enc.inputs() {
                    pi.set(v, model[lit as usize]);
                }
                debug_assert!(self.domain.iter().all(|&v| pi.is_assigned(v)));
                Ok(Some(pi))
            }
        }
    }
}
