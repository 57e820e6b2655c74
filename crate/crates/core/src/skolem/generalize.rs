use crate::aig::{AigManager, NodeRef};
use crate::assignment::Assignment;

use super::{CbSet, SynthError};

/// How a counterexample is widened into a refinement cube.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GeneralizeStrategy {
    /// The literals of π over the support of the set's disjunction.
    Cube,
    /// The disjunction itself.
    Whole,
    /// One member true under π, chosen to keep the support of the combined
    /// cube small.
    #[default]
    Element,
}

/// Returns ξ with π ⊨ ξ, ξ ⇒ ∨set and Supp(ξ) ⊆ Supp(∨set).
///
/// For [`GeneralizeStrategy::Element`] the member minimising
/// |Supp(e) ∪ Supp(other)| wins; ties go to the smaller AND-node count and
/// then to the earlier insertion.
pub fn generalize(
    mgr: &mut AigManager,
    pi: &Assignment,
    set: &CbSet,
    other: NodeRef,
    strategy: GeneralizeStrategy,
) -> Result<NodeRef, SynthError> {
    let holds = |mgr: &AigManager, f: NodeRef| {
        mgr.eval(f, pi).map_err(|e| SynthError::Internal(format!("generalize: {}", e)))
    };
    if !holds(mgr, set.function())? {
        return Err(SynthError::Internal("generalize: assignment does not satisfy the set".into()));
    }
    match strategy {
        GeneralizeStrategy::Whole => Ok(set.function()),
        GeneralizeStrategy::Cube => {
            let supp = mgr.support(set.function());
            let lits: Vec<NodeRef> = supp
                .iter()
                .map(|&v| {
                    let leaf = mgr.mk_var(v);
                    if pi.value(v) {
                        leaf
                    } else {
                        !leaf
                    }
                })
                .collect();
            Ok(mgr.mk_big_and(lits))
        }
        GeneralizeStrategy::Element => {
            let other_supp = mgr.support(other);
            let mut best: Option<((usize, usize), NodeRef)> = None;
            for &e in set.elements() {
                if !holds(mgr, e)? {
                    continue;
                }
                let supp = mgr.support(e);
                let extra = supp.iter().filter(|v| other_supp.binary_search(v).is_err()).count();
                let key = (other_supp.len() + extra, mgr.node_count(e));
                if best.is_none_or(|(k, _)| key < k) {
                    best = Some((key, e));
                }
            }
            best.map(|(_, e)| e)
                .ok_or_else(|| SynthError::Internal("generalize: no member holds under the assignment".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::VarId;

    fn setup() -> (AigManager, NodeRef, NodeRef, NodeRef, NodeRef) {
        let mut m = AigManager::new();
        let x2 = m.mk_var(VarId(2));
        let y1 = m.mk_var(VarId(3));
        let y2 = m.mk_var(VarId(4));
        let y3 = m.mk_var(VarId(5));
        (m, x2, y1, y2, y3)
    }

    #[test]
    fn single_member_under_all_strategies() {
        let (mut m, x2, y1, _, _) = setup();
        let xy = m.mk_and(x2, y1);
        let mut set = CbSet::default();
        set.insert(&mut m, xy);
        let pi = Assignment::from_pairs([(VarId(2), true), (VarId(3), true)]);
        for s in [GeneralizeStrategy::Cube, GeneralizeStrategy::Whole, GeneralizeStrategy::Element] {
            assert_eq!(generalize(&mut m, &pi, &set, NodeRef::TRUE, s).unwrap(), xy);
        }
    }

    #[test]
    fn true_member() {
        let (mut m, ..) = setup();
        let mut set = CbSet::default();
        set.insert(&mut m, NodeRef::TRUE);
        let pi = Assignment::new();
        assert_eq!(generalize(&mut m, &pi, &set, NodeRef::TRUE, GeneralizeStrategy::Element).unwrap(), NodeRef::TRUE);
        assert_eq!(generalize(&mut m, &pi, &set, NodeRef::TRUE, GeneralizeStrategy::Cube).unwrap(), NodeRef::TRUE);
    }

    #[test]
    fn element_minimises_support() {
        let (mut m, _, y1, y2, y3) = setup();
        let a = m.mk_and(y1, !y3);
        let mut set = CbSet::default();
        set.insert(&mut m, a);
        set.insert(&mut m, y2);
        let pi = Assignment::from_pairs([(VarId(3), true), (VarId(4), true), (VarId(5), false)]);
        assert_eq!(generalize(&mut m, &pi, &set, NodeRef::TRUE, GeneralizeStrategy::Element).unwrap(), y2);
        // a's support is already covered by the other conjunct
        assert_eq!(generalize(&mut m, &pi, &set, a, GeneralizeStrategy::Element).unwrap(), a);
        // equal support cost: the smaller AIG wins, regardless of insertion order
        let all = m.mk_big_and([y1, y2, y3]);
        assert_eq!(generalize(&mut m, &pi, &set, all, GeneralizeStrategy::Element).unwrap(), y2);
    }

    #[test]
    fn violated_precondition_is_internal_error() {
        let (mut m, x2, ..) = setup();
        let mut set = CbSet::default();
        set.insert(&mut m, x2);
        let pi = Assignment::from_pairs([(VarId(2), false)]);
        assert!(matches!(
            generalize(&mut m, &pi, &set, NodeRef::TRUE, GeneralizeStrategy::Element),
            Err(SynthError::Internal(_))
        ));
        let empty = CbSet::default();
        assert!(generalize(&mut m, &pi, &empty, NodeRef::TRUE, GeneralizeStrategy::Whole).is_err());
    }

    #[test]
    fn cube_is_over_set_support() {
        let (mut m, x2, y1, y2, _) = setup();
        let f = m.mk_or(x2, y1);
        let mut set = CbSet::default();
        set.insert(&mut m, f);
        let pi = Assignment::from_pairs([(VarId(2), false), (VarId(3), true), (VarId(4), true)]);
        let c = generalize(&mut m, &pi, &set, y2, GeneralizeStrategy::Cube).unwrap();
        let expected = m.mk_and(!x2, y1);
        assert_eq!(c, expected);
    }
}
