use crate::aig::{AigManager, NodeRef};

use super::{Phase, SkolemVector};

/// A set of functions read as their disjunction. The member list and the
/// disjunction AIG are updated together.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CbSet {
    elems: Vec<NodeRef>,
    disj: NodeRef,
}

impl Default for CbSet {
    fn default() -> CbSet {
        CbSet { elems: Vec::new(), disj: NodeRef::FALSE }
    }
}

impl CbSet {
    pub fn elements(&self) -> &[NodeRef] {
        &self.elems
    }

    /// The set read as a function; FALSE when empty.
    pub fn function(&self) -> NodeRef {
        self.disj
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// Adds `g` unless it is FALSE or already a member. Returns whether the
    /// set changed.
    pub fn insert(&mut self, mgr: &mut AigManager, g: NodeRef) -> bool {
        if g == NodeRef::FALSE || self.elems.contains(&g) {
            return false;
        }
        self.elems.push(g);
        self.disj = mgr.mk_or(self.disj, g);
        true
    }
}

/// Under-approximations of the can't-be-0 / can't-be-1 functions of every
/// existential variable, indexed by position in the elimination order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CbState {
    pub cbr0: Vec<CbSet>,
    pub cbr1: Vec<CbSet>,
}

impl CbState {
    pub fn new(n: usize) -> CbState {
        CbState { cbr0: vec![CbSet::default(); n], cbr1: vec![CbSet::default(); n] }
    }

    pub fn len(&self) -> usize {
        self.cbr0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cbr0.is_empty()
    }

    pub fn set(&self, i: usize, bit: bool) -> &CbSet {
        if bit {
            &self.cbr1[i]
        } else {
            &self.cbr0[i]
        }
    }

    pub fn set_mut(&mut self, i: usize, bit: bool) -> &mut CbSet {
        if bit {
            &mut self.cbr1[i]
        } else {
            &mut self.cbr0[i]
        }
    }

    /// ψᵢᴬ = ¬(∨ cbr1[i]).
    pub fn abstract_psi(&self, i: usize) -> NodeRef {
        !self.cbr1[i].function()
    }

    pub fn abstract_vector(&self) -> SkolemVector {
        SkolemVector::new((0..self.len()).map(|i| self.abstract_psi(i)).collect(), Phase::Chained)
    }
}
