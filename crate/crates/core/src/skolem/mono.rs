use super::{reverse_substitute_metered, Budget, BudgetKind, Meter, Phase, RunStats, SkolemVector, SynthError};
use crate::aig::NodeRef;
use crate::frontend::FactoredSpec;

fn budget_error(kind: BudgetKind, meter: &Meter, mgr_nodes: usize) -> SynthError {
    let stats = RunStats { total_time: meter.elapsed(), manager_nodes: mgr_nodes, ..RunStats::default() };
    SynthError::Budget { kind, stats: Box::new(stats) }
}

/// Eliminates x₁…xₙ one at a time by cofactoring the conjunction of the
/// factors that mention each, then back-substitutes.
///
/// Factors that do not mention the current variable are never conjoined.
pub fn mono_skolem(spec: &mut FactoredSpec, budget: &Budget) -> Result<(SkolemVector, RunStats), SynthError> {
    let meter = Meter::new(*budget);
    let n = spec.n();
    if spec.has_false_factor() {
        let v = SkolemVector::new(vec![NodeRef::FALSE; n], Phase::Final);
        let stats = RunStats { total_time: meter.elapsed(), manager_nodes: spec.manager.len(), ..RunStats::default() };
        return Ok((v, stats));
    }
    let mgr = &mut spec.manager;
    let mut factors: Vec<NodeRef> = spec.factors.iter().copied().filter(|&f| f != NodeRef::TRUE).collect();
    let mut psi = Vec::with_capacity(n);
    for &x in &spec.x_order {
        let (touching, rest): (Vec<NodeRef>, Vec<NodeRef>) = factors.iter().partition(|&&f| mgr.depends_on(f, x));
        if touching.is_empty() {
            psi.push(NodeRef::TRUE);
            continue;
        }
        let fi = mgr.mk_big_and(touching);
        let p = mgr.cofactor(fi, x, true);
        let projected = mgr.compose(fi, x, p);
        psi.push(p);
        factors = rest;
        if projected != NodeRef::TRUE {
            factors.push(projected);
        }
        meter.check(mgr).map_err(|k| budget_error(k, &meter, mgr.len()))?;
    }
    mgr.flush_caches();
    let chained = SkolemVector::new(psi, Phase::Chained);
    let v = reverse_substitute_metered(mgr, &spec.x_order, chained, &mut Meter::new(*budget))
        .map_err(|k| budget_error(k, &meter, mgr.len()))?;
    let (avg, max) = v.sizes(mgr);
    let stats = RunStats {
        total_time: meter.elapsed(),
        avg_size: avg,
        max_size: max,
        manager_nodes: mgr.len(),
        ..RunStats::default()
    };
    Ok((v, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::VarId;
    use crate::frontend::{parse_factored, parse_qdimacs};
    use crate::Assignment;

    const EXAMPLE: &str = "p cnf 5 3\na 3 4 5 0\ne 1 2 0\n-1 -2 -3 0\n2 -5 -4 0\n1 -2 5 0\n";

    #[test]
    fn example_vector_is_a_skolem_vector() {
        let mut spec = parse_qdimacs(EXAMPLE).unwrap();
        let f = spec.conjunction();
        let (v, stats) = mono_skolem(&mut spec, &Budget::default()).unwrap();
        assert_eq!(v.phase, Phase::Final);
        assert!(v.respects_phase(&spec.manager, &spec.x_order));
        assert_eq!(stats.sat_calls, 0);
        let m = &mut spec.manager;
        for row in 0..8u32 {
            let ys = [(VarId(3), row & 1 == 1), (VarId(4), row & 2 == 2), (VarId(5), row & 4 == 4)];
            let realizable = (0..4u32).any(|xs| {
                let pi = Assignment::from_pairs(ys.iter().copied().chain([(VarId(1), xs & 1 == 1), (VarId(2), xs & 2 == 2)]));
                m.eval(f, &pi).unwrap()
            });
            let base = Assignment::from_pairs(ys);
            let x1 = m.eval(v.psi[0], &base).unwrap();
            let x2 = m.eval(v.psi[1], &base).unwrap();
            let pi = Assignment::from_pairs(ys.iter().copied().chain([(VarId(1), x1), (VarId(2), x2)]));
            assert_eq!(m.eval(f, &pi).unwrap(), realizable, "row {}", row);
        }
    }

    #[test]
    fn absent_variable_gets_true() {
        let mut spec = parse_factored("var x1:x; var x2:x; var y1:y; x1 | y1;").unwrap();
        let (v, _) = mono_skolem(&mut spec, &Budget::default()).unwrap();
        assert_eq!(v.psi[1], NodeRef::TRUE);
        assert_eq!(v.psi[0], NodeRef::TRUE);
    }

    #[test]
    fn false_factor_gives_false_vector() {
        let mut spec = parse_factored("var x1:x; var y1:y; x1 | y1; 0;").unwrap();
        let (v, _) = mono_skolem(&mut spec, &Budget::default()).unwrap();
        assert_eq!(v.psi, vec![NodeRef::FALSE]);
    }

    #[test]
    fn node_budget_trips() {
        let mut spec = parse_qdimacs(EXAMPLE).unwrap();
        let budget = Budget { max_nodes: 1, ..Budget::default() };
        let err = mono_skolem(&mut spec, &budget).unwrap_err();
        assert_eq!(err.reason(), "node-budget");
    }
}
