use std::fmt;

use crate::aig::VarId;

/// A valuation of propositional variables, stored densely by variable id.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (VarId, bool)>>(pairs: I) -> Assignment {
        let mut a = Assignment::new();
        for (v, b) in pairs {
            a.set(v, b);
        }
        a
    }

    pub fn set(&mut self, v: VarId, value: bool) {
        let i = v.0 as usize;
        if i >= self.values.len() {
            self.values.resize(i + 1, None);
        }
        self.values[i] = Some(value);
    }

    pub fn get(&self, v: VarId) -> Option<bool> {
        self.values.get(v.0 as usize).copied().flatten()
    }

    /// Value of `v`, or `false` when unassigned.
    pub fn value(&self, v: VarId) -> bool {
        self.get(v).unwrap_or(false)
    }

    pub fn is_assigned(&self, v: VarId) -> bool {
        self.get(v).is_some()
    }

    /// Assigned variables in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = (VarId, bool)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|b| (VarId(i as u32), b)))
    }

    pub fn len(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The valuation restricted to `vars`.
    pub fn restrict(&self, vars: &[VarId]) -> Assignment {
        Assignment::from_pairs(vars.iter().filter_map(|&v| self.get(v).map(|b| (v, b))))
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.iter().map(|(v, b)| (v.0, b as u8)))
            .finish()
    }
}
