use log::debug;

use super::{
    generalize, reverse_substitute_metered, Budget, BudgetKind, CbState, ErrorQuery, GeneralizeStrategy, Meter,
    Phase, RunStats, SkolemVector, SynthError,
};
use crate::aig::{AigManager, NodeRef, VarId};
use crate::assignment::Assignment;
use crate::frontend::FactoredSpec;
use crate::sat::{Backend, OracleError, SatOracle};

#[derive(Clone, Debug, Default)]
pub struct CegarConfig {
    pub generalize: GeneralizeStrategy,
    pub budget: Budget,
    pub backend: Backend,
}

/// The conflict cube carried forward by one refinement step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RefinementCube {
    pub k: usize,
    /// Scan position the cube was last updated at.
    pub l: usize,
    pub mu0: NodeRef,
    pub mu1: NodeRef,
    pub mu: NodeRef,
}

/// What one refinement step did.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpdateTrace {
    /// Largest position m with π ⊨ cbr0[m] ∧ cbr1[m].
    pub pivot: usize,
    /// The cube as first built at the pivot.
    pub cube: RefinementCube,
    /// Positions whose cbr1 set grew.
    pub refined: Vec<usize>,
    /// Every inserted function as (position, bit, function).
    pub added: Vec<(usize, bool, NodeRef)>,
}

#[derive(Debug)]
pub struct CegarOutcome {
    pub vector: SkolemVector,
    pub state: CbState,
    pub stats: RunStats,
}

/// Hooks into the refinement loop. Both calls see the state as it is at
/// that moment.
pub trait CegarObserver {
    fn on_counterexample(&mut self, _mgr: &mut AigManager, _state: &CbState, _pi: &Assignment) {}
    fn on_refined(&mut self, _mgr: &mut AigManager, _state: &CbState, _pi: &Assignment, _trace: &UpdateTrace) {}
}

struct NoObserver;

impl CegarObserver for NoObserver {}

/// Seeds every cbr0/cbr1 set from the factors one at a time and returns the
/// state with its abstract (chained) vector.
pub fn init_abs_ref(spec: &mut FactoredSpec) -> (CbState, SkolemVector) {
    let n = spec.n();
    let mut state = CbState::new(n);
    let mgr = &mut spec.manager;
    for &factor in &spec.factors {
        let mut f = factor;
        for (i, &x) in spec.x_order.iter().enumerate() {
            if !mgr.depends_on(f, x) {
                continue;
            }
            let f0 = mgr.cofactor(f, x, false);
            let f1 = mgr.cofactor(f, x, true);
            state.cbr0[i].insert(mgr, !f0);
            state.cbr1[i].insert(mgr, !f1);
            f = mgr.compose(f, x, f1);
        }
    }
    let v = state.abstract_vector();
    (state, v)
}

fn holds(mgr: &AigManager, f: NodeRef, pi: &Assignment) -> Result<bool, SynthError> {
    mgr.eval(f, pi).map_err(|e| SynthError::Internal(format!("evaluating under counterexample: {}", e)))
}

/// Refines `state` with counterexample `pi` by locating the deepest
/// position where both sets hold and pushing the conflict forward.
pub fn update_abs_ref(
    mgr: &mut AigManager,
    x_order: &[VarId],
    state: &mut CbState,
    pi: &Assignment,
    strategy: GeneralizeStrategy,
) -> Result<UpdateTrace, SynthError> {
    let n = x_order.len();
    let mut pivot = None;
    for m in (0..n).rev() {
        if holds(mgr, state.cbr0[m].function(), pi)? && holds(mgr, state.cbr1[m].function(), pi)? {
            pivot = Some(m);
            break;
        }
    }
    let k = pivot.ok_or_else(|| SynthError::Internal("no position where both cb sets hold".into()))?;
    let mut mu0 = generalize(mgr, pi, &state.cbr0[k], NodeRef::TRUE, strategy)?;
    let mut mu1 = generalize(mgr, pi, &state.cbr1[k], mu0, strategy)?;
    let mut mu = mgr.mk_and(mu0, mu1);
    let cube = RefinementCube { k, l: k, mu0, mu1, mu };
    let mut trace = UpdateTrace { pivot: k, cube, refined: Vec::new(), added: Vec::new() };
    for l in k + 1..n {
        let x = x_order[l];
        if !mgr.depends_on(mu, x) {
            continue;
        }
        if pi.value(x) {
            mu1 = mgr.cofactor(mu, x, true);
            if state.cbr1[l].insert(mgr, mu1) {
                trace.refined.push(l);
                trace.added.push((l, true, mu1));
            }
            if !holds(mgr, state.cbr0[l].function(), pi)? {
                break;
            }
            mu0 = generalize(mgr, pi, &state.cbr0[l], mu1, strategy)?;
        } else {
            mu0 = mgr.cofactor(mu, x, false);
            if state.cbr0[l].insert(mgr, mu0) {
                trace.added.push((l, false, mu0));
            }
            if !holds(mgr, state.cbr1[l].function(), pi)? {
                return Err(SynthError::Internal(format!(
                    "counterexample sets {} to 0 but cbr1 does not hold there",
                    mgr.display_name(x)
                )));
            }
            mu1 = generalize(mgr, pi, &state.cbr1[l], mu0, strategy)?;
        }
        mu = mgr.mk_and(mu0, mu1);
    }
    Ok(trace)
}

pub fn cegar_skolem(spec: &mut FactoredSpec, cfg: &CegarConfig) -> Result<CegarOutcome, SynthError> {
    cegar_skolem_observed(spec, cfg, &mut NoObserver)
}

/// Starts from the factor-wise abstraction and refines it with
/// counterexamples from the error formula until that formula is
/// unsatisfiable, then back-substitutes ¬cbr1.
pub fn cegar_skolem_observed(
    spec: &mut FactoredSpec,
    cfg: &CegarConfig,
    observer: &mut dyn CegarObserver,
) -> Result<CegarOutcome, SynthError> {
    let meter = Meter::new(cfg.budget);
    let n = spec.n();
    if spec.has_false_factor() {
        let stats = RunStats { total_time: meter.elapsed(), manager_nodes: spec.manager.len(), ..RunStats::default() };
        return Ok(CegarOutcome {
            vector: SkolemVector::new(vec![NodeRef::FALSE; n], Phase::Final),
            state: CbState::new(n),
            stats,
        });
    }
    let (mut state, _) = init_abs_ref(spec);
    spec.manager.flush_caches();
    let query = ErrorQuery::new(spec);
    let mut oracle = SatOracle::with_backend(cfg.backend.clone());
    oracle.set_deadline(meter.deadline());
    let mut refinements = 0u64;

    let snapshot = |refinements: u64, oracle: &SatOracle, mgr: &AigManager| {
        let s = oracle.stats();
        RunStats {
            refinements,
            sat_calls: s.calls,
            sat_time: s.time,
            total_time: meter.elapsed(),
            manager_nodes: mgr.len(),
            ..RunStats::default()
        }
    };
    let budget_err = |kind: BudgetKind, stats: RunStats| SynthError::Budget { kind, stats: Box::new(stats) };

    loop {
        let mgr = &mut spec.manager;
        if let Err(kind) = meter.check(mgr) {
            return Err(budget_err(kind, snapshot(refinements, &oracle, mgr)));
        }
        let psi: Vec<NodeRef> = (0..n).map(|i| state.abstract_psi(i)).collect();
        let pi = match query.check(mgr, &spec.x_order, &psi, &mut oracle) {
            Ok(Some(pi)) => pi,
            Ok(None) => break,
            Err(OracleError::Timeout) => return Err(budget_err(BudgetKind::Time, snapshot(refinements, &oracle, mgr))),
            Err(e) => return Err(SynthError::Oracle(e)),
        };
        if let Err(kind) = meter.check_iterations(refinements) {
            return Err(budget_err(kind, snapshot(refinements, &oracle, mgr)));
        }
        observer.on_counterexample(mgr, &state, &pi);
        let trace = update_abs_ref(mgr, &spec.x_order, &mut state, &pi, cfg.generalize)?;
        refinements += 1;
        debug!("refinement {}: pivot {}, refined {:?}", refinements, trace.pivot, trace.refined);
        observer.on_refined(mgr, &state, &pi, &trace);
    }
    spec.manager.flush_caches();

    let mgr = &mut spec.manager;
    let chained = state.abstract_vector();
    let mut rs_meter = Meter::new(cfg.budget);
    let vector = reverse_substitute_metered(mgr, &spec.x_order, chained, &mut rs_meter)
        .map_err(|k| budget_err(k, snapshot(refinements, &oracle, mgr)))?;
    let mut stats = snapshot(refinements, &oracle, mgr);
    let (avg, max) = vector.sizes(mgr);
    stats.avg_size = avg;
    stats.max_size = max;
    Ok(CegarOutcome { vector, state, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_factored, parse_qdimacs};

    const EXAMPLE: &str = "p cnf 5 3\na 3 4 5 0\ne 1 2 0\n-1 -2 -3 0\n2 -5 -4 0\n1 -2 5 0\n";

    fn var(m: &mut AigManager, v: u32) -> NodeRef {
        m.mk_var(VarId(v))
    }

    fn equivalent(m: &AigManager, a: NodeRef, b: NodeRef, vars: &[VarId]) -> bool {
        (0..1u32 << vars.len()).all(|row| {
            let pi = Assignment::from_pairs(vars.iter().enumerate().map(|(i, &v)| (v, row >> i & 1 == 1)));
            m.eval(a, &pi) == m.eval(b, &pi)
        })
    }

    #[test]
    fn example_initial_state() {
        let mut spec = parse_qdimacs(EXAMPLE).unwrap();
        let (st, v) = init_abs_ref(&mut spec);
        let m = &mut spec.manager;
        let (x2, y1, y2, y3) = (var(m, 2), var(m, 3), var(m, 4), var(m, 5));
        let c11 = m.mk_and(x2, y1);
        let c01 = m.mk_and(x2, !y3);
        let c02 = m.mk_and(y2, y3);
        assert_eq!(st.cbr1[0].elements(), &[c11]);
        assert_eq!(st.cbr0[0].elements(), &[c01]);
        assert!(st.cbr1[1].is_empty());
        assert_eq!(st.cbr0[1].elements(), &[c02]);
        let psi1 = m.mk_or(!x2, !y1);
        assert_eq!(v.psi, vec![psi1, NodeRef::TRUE]);
        assert_eq!(v.phase, Phase::Chained);
    }

    #[test]
    fn example_refinement_step() {
        let mut spec = parse_qdimacs(EXAMPLE).unwrap();
        let (mut st, _) = init_abs_ref(&mut spec);
        let pi = Assignment::from_pairs([
            (VarId(3), true),
            (VarId(4), true),
            (VarId(5), false),
            (VarId(1), false),
            (VarId(2), true),
        ]);
        let trace =
            update_abs_ref(&mut spec.manager, &spec.x_order, &mut st, &pi, GeneralizeStrategy::Element).unwrap();
        let m = &mut spec.manager;
        let (y1, y3) = (var(m, 3), var(m, 5));
        let added = m.mk_and(y1, !y3);
        assert_eq!(trace.pivot, 0);
        let (x2, y1c, y3c) = (var(m, 2), var(m, 3), var(m, 5));
        let mu0 = m.mk_and(x2, !y3c);
        let mu1 = m.mk_and(x2, y1c);
        assert_eq!((trace.cube.mu0, trace.cube.mu1), (mu0, mu1));
        let cube_mu = m.mk_and(mu0, mu1);
        assert_eq!(trace.cube.mu, cube_mu);
        assert_eq!(trace.refined, vec![1]);
        assert_eq!(trace.added, vec![(1, true, added)]);
        assert_eq!(st.cbr1[1].elements(), &[added]);
        let psi2 = m.mk_or(!y1, y3);
        assert_eq!(st.abstract_psi(1), psi2);
    }

    #[test]
    fn example_end_to_end() {
        for strategy in [GeneralizeStrategy::Element, GeneralizeStrategy::Cube, GeneralizeStrategy::Whole] {
            let mut spec = parse_qdimacs(EXAMPLE).unwrap();
            let cfg = CegarConfig { generalize: strategy, ..CegarConfig::default() };
            let out = cegar_skolem(&mut spec, &cfg).unwrap();
            assert_eq!(out.stats.refinements, 1, "{:?}", strategy);
            assert_eq!(out.stats.sat_calls, 2);
            let m = &mut spec.manager;
            let (y1, y3) = (var(m, 3), var(m, 5));
            let e1 = m.mk_or(!y1, !y3);
            let e2 = m.mk_or(!y1, y3);
            let ys = [VarId(3), VarId(4), VarId(5)];
            assert!(equivalent(m, out.vector.psi[0], e1, &ys));
            assert!(equivalent(m, out.vector.psi[1], e2, &ys));
            assert_eq!(out.vector.phase, Phase::Final);
        }
    }

    #[test]
    fn false_factor_short_circuits() {
        let mut spec = parse_factored("var x1:x; var x2:x; var y1:y; x1 | y1; 0;").unwrap();
        let out = cegar_skolem(&mut spec, &CegarConfig::default()).unwrap();
        assert_eq!(out.vector.psi, vec![NodeRef::FALSE; 2]);
        assert_eq!(out.stats.sat_calls, 0);
    }

    #[test]
    fn iteration_budget_trips() {
        let mut spec = parse_qdimacs(EXAMPLE).unwrap();
        let cfg = CegarConfig { budget: Budget { max_iterations: 0, ..Budget::default() }, ..CegarConfig::default() };
        let err = cegar_skolem(&mut spec, &cfg).unwrap_err();
        assert_eq!(err.reason(), "iteration-budget");
    }

    #[test]
    fn observer_sees_each_counterexample() {
        #[derive(Default)]
        struct Count(usize, usize);
        impl CegarObserver for Count {
            fn on_counterexample(&mut self, _: &mut AigManager, _: &CbState, _: &Assignment) {
                self.0 += 1;
            }
            fn on_refined(&mut self, _: &mut AigManager, _: &CbState, _: &Assignment, t: &UpdateTrace) {
                assert!(!t.refined.is_empty());
                self.1 += 1;
            }
        }
        let mut spec = parse_qdimacs(EXAMPLE).unwrap();
        let mut obs = Count::default();
        cegar_skolem_observed(&mut spec, &CegarConfig::default(), &mut obs).unwrap();
        assert_eq!((obs.0, obs.1), (1, 1));
    }
}
