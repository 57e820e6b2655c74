//! Independent checks of synthesized vectors: the error-formula check, a
//! brute-force check over all free-variable valuations, and exact
//! can't-be tables for small instances.

mod table;

use std::collections::HashMap;

use thiserror::Error;

use crate::aig::{NodeRef, Simulator, VarId};
use crate::frontend::{FactoredSpec, TseitinEncoder};
use crate::sat::{OracleError, SatOracle};
use crate::skolem::{ErrorQuery, Phase, SkolemVector};

pub use table::{TruthTable, MAX_TABLE_VARS};

use table::enum_pattern;

/// Variable bound for [`exact_cb`] and the other full-table checks.
pub const EXACT_BOUND: usize = 16;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("{what}: {actual} exceeds the bound {limit}")]
    Bound { what: &'static str, limit: usize, actual: usize },
    #[error("vector is not in final phase")]
    NotFinal,
    #[error("vector has {actual} components, expected {expected}")]
    Length { expected: usize, actual: usize },
    #[error("variable {0} is outside the allowed support")]
    Unbound(VarId),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Limits for [`certify_exhaustive_with`].
#[derive(Clone, Copy, Debug)]
pub struct ExhaustiveBounds {
    pub max_y: usize,
    /// Above this the inner `∃X` is decided by SAT instead of enumeration.
    pub max_x: usize,
}

impl Default for ExhaustiveBounds {
    fn default() -> ExhaustiveBounds {
        ExhaustiveBounds { max_y: 20, max_x: 20 }
    }
}

/// True iff the error formula for `psi` is unsatisfiable. Accepts chained
/// and final vectors.
pub fn certify_sat(spec: &mut FactoredSpec, psi: &SkolemVector) -> Result<bool, VerifyError> {
    certify_sat_with(spec, psi, &mut SatOracle::new())
}

pub fn certify_sat_with(
    spec: &mut FactoredSpec,
    psi: &SkolemVector,
    oracle: &mut SatOracle,
) -> Result<bool, VerifyError> {
    check_len(spec, psi)?;
    let q = ErrorQuery::new(spec);
    Ok(q.check(&mut spec.manager, &spec.x_order, &psi.psi, oracle)?.is_none())
}

pub fn certify_exhaustive(spec: &FactoredSpec, psi: &SkolemVector) -> Result<bool, VerifyError> {
    certify_exhaustive_with(spec, psi, ExhaustiveBounds::default())
}

/// For every valuation of Y, checks `F(Ψ(Y),Y) = ∃X. F(X,Y)`.
pub fn certify_exhaustive_with(
    spec: &FactoredSpec,
    psi: &SkolemVector,
    bounds: ExhaustiveBounds,
) -> Result<bool, VerifyError> {
    check_len(spec, psi)?;
    if psi.phase != Phase::Final {
        return Err(VerifyError::NotFinal);
    }
    let (n, m) = (spec.n(), spec.m());
    if m > bounds.max_y {
        return Err(VerifyError::Bound { what: "free variables", limit: bounds.max_y, actual: m });
    }
    let mgr = &spec.manager;
    let ypos: HashMap<VarId, usize> = spec.y_vars.iter().enumerate().map(|(j, &v)| (v, j)).collect();
    let xpos: HashMap<VarId, usize> = spec.x_order.iter().enumerate().map(|(j, &v)| (v, j)).collect();
    let mut sim_psi = Simulator::new(mgr, &psi.psi);
    if let Some(&v) = sim_psi.inputs().iter().find(|v| !ypos.contains_key(v)) {
        return Err(VerifyError::Unbound(v));
    }
    let mut sim_f = Simulator::new(mgr, &spec.factors);
    if let Some(&v) = sim_f.inputs().iter().find(|v| !ypos.contains_key(v) && !xpos.contains_key(v)) {
        return Err(VerifyError::Unbound(v));
    }
    let mut sat = if n > bounds.max_x {
        let mut enc = TseitinEncoder::new();
        for &f in &spec.factors {
            enc.assert_root(mgr, f);
        }
        Some((enc, SatOracle::new()))
    } else {
        None
    };

    let mask = if m >= 6 { u64::MAX } else { (1u64 << (1 << m)) - 1 };
    let blocks = if m <= 6 { 1 } else { 1usize << (m - 6) };
    for b in 0..blocks {
        let ypat = |v: VarId| enum_pattern(ypos[&v], b);
        let psi_words = sim_psi.run(ypat);
        let lhs = sim_f
            .run(|v| match xpos.get(&v) {
                Some(&i) => psi_words[i],
                None => ypat(v),
            })
            .into_iter()
            .fold(mask, |acc, w| acc & w);
        let bad = !lhs & mask;
        if bad == 0 {
            continue;
        }
        match sat.as_mut() {
            None => {
                for xs in 0..1u64 << n {
                    let w = sim_f
                        .run(|v| match xpos.get(&v) {
                            Some(&i) => 0u64.wrapping_sub(xs >> i & 1),
                            None => ypat(v),
                        })
                        .into_iter()
                        .fold(u64::MAX, |acc, w| acc & w);
                    if w & bad != 0 {
                        return Ok(false);
                    }
                }
            }
            Some((enc, oracle)) => {
                for bit in (0..64).filter(|k| bad >> k & 1 == 1) {
                    let row = b * 64 + bit;
                    let mut e = enc.clone();
                    let units: Vec<i32> = spec
                        .y_vars
                        .iter()
                        .enumerate()
                        .map(|(j, &y)| {
                            let l = e.declare_input(y);
                            if row >> j & 1 == 1 {
                                l
                            } else {
                                -l
                            }
                        })
                        .collect();
                    let mut cnf = e.into_cnf();
                    for u in units {
                        cnf.add_clause([u]);
                    }
                    if oracle.solve(&cnf)?.is_sat() {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

fn check_len(spec: &FactoredSpec, psi: &SkolemVector) -> Result<(), VerifyError> {
    if psi.len() != spec.n() {
        return Err(VerifyError::Length { expected: spec.n(), actual: psi.len() });
    }
    Ok(())
}

/// The conjunction of the factors tabulated over `x_order ++ y_vars`.
fn full_table(spec: &FactoredSpec) -> Result<TruthTable, VerifyError> {
    let total = spec.n() + spec.m();
    if total > EXACT_BOUND {
        return Err(VerifyError::Bound { what: "existential plus free variables", limit: EXACT_BOUND, actual: total });
    }
    let vars: Vec<VarId> = spec.x_order.iter().chain(&spec.y_vars).copied().collect();
    TruthTable::of_conjunction(&spec.manager, &spec.factors, &vars)
}

/// `∃` over the first `i` existentials of `full` with position `i` fixed to
/// `bit`; `rest` holds the bits of positions `i+1..` followed by Y.
fn exists_prefix(full: &TruthTable, i: usize, bit: bool, rest: usize) -> bool {
    let base = (bit as usize) << i | rest << (i + 1);
    (0..1usize << i).any(|p| full.get(base | p))
}

/// Tabulates `(¬∃x₁…xᵢ₋₁. F)[xᵢ↦bit]` over `x_order[i+1..] ++ y_vars`,
/// with `i` 0-based.
pub fn exact_cb(spec: &FactoredSpec, i: usize, bit: bool) -> Result<TruthTable, VerifyError> {
    let full = full_table(spec)?;
    let vars: Vec<VarId> = spec.x_order[i + 1..].iter().chain(&spec.y_vars).copied().collect();
    TruthTable::from_fn(&vars, |r| !exists_prefix(&full, i, bit, r))
}

/// Checks `F′[xᵢ↦1] ∧ ¬F′[xᵢ↦0] ⇒ ψ ⇒ F′[xᵢ↦1] ∨ ¬F′[xᵢ↦0]` for
/// `F′ = ∃x₁…xᵢ₋₁. F`, where `psi` may mention `x_order[i+1..]` and Y.
pub fn check_prop1(spec: &FactoredSpec, i: usize, psi: NodeRef) -> Result<bool, VerifyError> {
    let cb0 = exact_cb(spec, i, false)?;
    let cb1 = exact_cb(spec, i, true)?;
    let f = TruthTable::of(&spec.manager, psi, cb0.vars())?;
    Ok((0..f.rows()).all(|r| {
        let (c0, c1, v) = (cb0.get(r), cb1.get(r), f.get(r));
        let lower = !c1 && c0;
        let upper = !c1 || c0;
        (!lower || v) && (!v || upper)
    }))
}

/// The sandwich for every component of a final vector, with the later
/// existentials bound to their own components.
pub fn check_prop1_final(spec: &FactoredSpec, psi: &SkolemVector) -> Result<bool, VerifyError> {
    check_len(spec, psi)?;
    if psi.phase != Phase::Final {
        return Err(VerifyError::NotFinal);
    }
    let full = full_table(spec)?;
    let n = spec.n();
    let tables = psi
        .psi
        .iter()
        .map(|&p| TruthTable::of(&spec.manager, p, &spec.y_vars))
        .collect::<Result<Vec<_>, _>>()?;
    for y in 0..1usize << spec.m() {
        let vals: Vec<bool> = tables.iter().map(|t| t.get(y)).collect();
        for i in 0..n {
            let later = (i + 1..n).fold(0, |acc, j| acc | (vals[j] as usize) << (j - i - 1));
            let rest = later | y << (n - i - 1);
            let a1 = exists_prefix(&full, i, true, rest);
            let a0 = exists_prefix(&full, i, false, rest);
            let v = vals[i];
            if (a1 && !a0 && !v) || (v && !a1 && a0) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether `∀Y ∃X. F` holds, by enumeration.
pub fn forall_exists_holds(spec: &FactoredSpec) -> Result<bool, VerifyError> {
    let full = full_table(spec)?;
    let n = spec.n();
    Ok((0..1usize << spec.m()).all(|y| (0..1usize << n).any(|x| full.get(x | y << n))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::AigManager;
    use crate::frontend::{parse_factored, parse_qdimacs};
    use crate::skolem::{cegar_skolem, init_abs_ref, mono_skolem, reverse_substitute, Budget, CegarConfig};

    const EXAMPLE: &str = "p cnf 5 3\na 3 4 5 0\ne 1 2 0\n-1 -2 -3 0\n2 -5 -4 0\n1 -2 5 0\n";

    fn var(m: &mut AigManager, v: u32) -> NodeRef {
        m.mk_var(VarId(v))
    }

    fn example_final(spec: &mut FactoredSpec) -> SkolemVector {
        let m = &mut spec.manager;
        let (y1, y3) = (var(m, 3), var(m, 5));
        let p1 = m.mk_or(!y1, !y3);
        let p2 = m.mk_or(!y1, y3);
        SkolemVector::new(vec![p1, p2], Phase::Final)
    }

    #[test]
    fn example_final_vector_certifies_both_ways() {
        let mut spec = parse_qdimacs(EXAMPLE).unwrap();
        let v = example_final(&mut spec);
        assert!(certify_sat(&mut spec, &v).unwrap());
        assert!(certify_exhaustive(&spec, &v).unwrap());
        assert!(check_prop1_final(&spec, &v).unwrap());
        assert!(forall_exists_holds(&spec).unwrap());
        let forced_sat = ExhaustiveBounds { max_y: 20, max_x: 0 };
        assert!(certify_exhaustive_with(&spec, &v, forced_sat).unwrap());
    }

    #[test]
    fn example_initial_abstraction_fails() {
        let mut spec = parse_qdimacs(EXAMPLE).unwrap();
        let (_, psi_a) = init_abs_ref(&mut spec);
        assert!(!certify_sat(&mut spec, &psi_a).unwrap());
        assert!(matches!(certify_exhaustive(&spec, &psi_a), Err(VerifyError::NotFinal)));
        let fin = reverse_substitute(&mut spec.manager, &spec.x_order, psi_a);
        assert!(!certify_exhaustive(&spec, &fin).unwrap());
        let forced_sat = ExhaustiveBounds { max_y: 20, max_x: 0 };
        assert!(!certify_exhaustive_with(&spec, &fin, forced_sat).unwrap());
    }

    #[test]
    fn corrupted_component_fails() {
        let mut spec = parse_qdimacs(EXAMPLE).unwrap();
        let mut v = example_final(&mut spec);
        v.psi[1] = NodeRef::TRUE;
        assert!(!certify_sat(&mut spec, &v).unwrap());
        assert!(!certify_exhaustive(&spec, &v).unwrap());
        assert!(!check_prop1_final(&spec, &v).unwrap());
    }

    #[test]
    fn all_true_against_negative_unit() {
        let mut spec = parse_factored("var x1:x; var y1:y; !x1;").unwrap();
        let v = SkolemVector::new(vec![NodeRef::TRUE], Phase::Final);
        assert!(!certify_sat(&mut spec, &v).unwrap());
        assert!(!certify_exhaustive(&spec, &v).unwrap());
    }

    #[test]
    fn false_spec_certifies_anything() {
        let mut spec = parse_factored("var x1:x; var y1:y; x1; !x1;").unwrap();
        let y1 = var(&mut spec.manager, 2);
        let v = SkolemVector::new(vec![y1], Phase::Final);
        assert!(certify_sat(&mut spec, &v).unwrap());
        assert!(certify_exhaustive(&spec, &v).unwrap());
        assert!(!forall_exists_holds(&spec).unwrap());
    }

    #[test]
    fn exact_cb_on_example() {
        let mut spec = parse_qdimacs(EXAMPLE).unwrap();
        let cb = exact_cb(&spec, 1, true).unwrap();
        let m = &mut spec.manager;
        let (y1, y3) = (var(m, 3), var(m, 5));
        let expected = m.mk_and(y1, !y3);
        assert_eq!(cb, TruthTable::of(m, expected, cb.vars()).unwrap());
        // i = 1 (first position): no prefix, Cb = ¬F[x₁↦bit]
        for bit in [false, true] {
            let cb = exact_cb(&spec, 0, bit).unwrap();
            let f = spec.conjunction();
            let fb = spec.manager.cofactor(f, VarId(1), bit);
            let t = TruthTable::of(&spec.manager, !fb, cb.vars()).unwrap();
            assert_eq!(cb, t);
        }
        for x in &spec.x_order {
            assert!(!exact_cb(&spec, 1, false).unwrap().depends_on(*x));
        }
    }

    #[test]
    fn exact_cb_of_true_spec_is_false() {
        let spec = parse_factored("var x1:x; var x2:x; var y1:y; 1;").unwrap();
        for i in 0..2 {
            for bit in [false, true] {
                assert!(exact_cb(&spec, i, bit).unwrap().is_false());
            }
        }
    }

    #[test]
    fn prop1_on_negated_cb1_and_flipped_constant() {
        let mut spec = parse_qdimacs(EXAMPLE).unwrap();
        for i in 0..2 {
            let cb1 = exact_cb(&spec, i, true).unwrap();
            // rebuild ¬Cb1 as an AIG by minterms
            let vars = cb1.vars().to_vec();
            let mut terms = Vec::new();
            for r in (0..cb1.rows()).filter(|&r| !cb1.get(r)) {
                let lits: Vec<NodeRef> = vars
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let l = spec.manager.mk_var(v);
                        if r >> j & 1 == 1 {
                            l
                        } else {
                            !l
                        }
                    })
                    .collect();
                let t = spec.manager.mk_big_and(lits);
                terms.push(t);
            }
            let psi = spec.manager.mk_big_or(terms);
            assert!(check_prop1(&spec, i, psi).unwrap());
        }
        let mut spec = parse_factored("var x1:x; var y1:y; x1 ^ !y1;").unwrap();
        let y1 = var(&mut spec.manager, 2);
        assert!(check_prop1(&spec, 0, y1).unwrap());
        assert!(!check_prop1(&spec, 0, !y1).unwrap());
        assert!(!check_prop1(&spec, 0, NodeRef::TRUE).unwrap());
    }

    #[test]
    fn engines_pass_every_check_on_example() {
        let mut spec = parse_qdimacs(EXAMPLE).unwrap();
        let (v, _) = mono_skolem(&mut spec, &Budget::default()).unwrap();
        assert!(certify_exhaustive(&spec, &v).unwrap());
        assert!(check_prop1_final(&spec, &v).unwrap());
        let mut spec = parse_qdimacs(EXAMPLE).unwrap();
        let out = cegar_skolem(&mut spec, &CegarConfig::default()).unwrap();
        assert!(certify_exhaustive(&spec, &out.vector).unwrap());
        assert!(certify_sat(&mut spec, &out.vector).unwrap());
        assert!(check_prop1_final(&spec, &out.vector).unwrap());
    }

    #[test]
    fn bounds_are_enforced() {
        let text: String = (1..=18).map(|i| format!("var y{}:y; ", i)).collect::<String>() + "var x1:x; x1 | y1;";
        let spec = parse_factored(&text).unwrap();
        assert!(matches!(exact_cb(&spec, 0, true), Err(VerifyError::Bound { .. })));
        let v = SkolemVector::new(vec![NodeRef::TRUE], Phase::Final);
        let tight = ExhaustiveBounds { max_y: 10, max_x: 20 };
        assert!(matches!(certify_exhaustive_with(&spec, &v, tight), Err(VerifyError::Bound { .. })));
        assert!(certify_exhaustive(&spec, &v).unwrap());
    }
}
