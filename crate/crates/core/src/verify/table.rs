use std::collections::HashMap;
use std::fmt;

use crate::aig::{block_pattern, AigManager, NodeRef, Simulator, VarId};
use crate::assignment::Assignment;

use super::VerifyError;

/// Largest variable count a [`TruthTable`] may span.
pub const MAX_TABLE_VARS: usize = 24;

/// A Boolean function tabulated over an ordered variable list. Row `r`
/// assigns `vars[j]` the value of bit `j` of `r`.
#[derive(Clone, PartialEq, Eq)]
pub struct TruthTable {
    vars: Vec<VarId>,
    words: Vec<u64>,
}

fn words_for(nvars: usize) -> usize {
    if nvars <= 6 {
        1
    } else {
        1 << (nvars - 6)
    }
}

fn row_mask(nvars: usize) -> u64 {
    if nvars >= 6 {
        u64::MAX
    } else {
        (1u64 << (1 << nvars)) - 1
    }
}

/// Input pattern of the `j`-th enumerated variable in block `b`.
pub(crate) fn enum_pattern(j: usize, b: usize) -> u64 {
    if j < 6 {
        block_pattern(j)
    } else if (b >> (j - 6)) & 1 == 1 {
        u64::MAX
    } else {
        0
    }
}

impl TruthTable {
    pub fn from_fn(vars: &[VarId], mut f: impl FnMut(usize) -> bool) -> Result<TruthTable, VerifyError> {
        check_width(vars.len())?;
        let mut t = TruthTable { vars: vars.to_vec(), words: vec![0; words_for(vars.len())] };
        for r in 0..t.rows() {
            if f(r) {
                t.words[r / 64] |= 1 << (r % 64);
            }
        }
        Ok(t)
    }

    /// Tabulates `f` by 64-way simulation. Every support variable of `f`
    /// must be in `vars`.
    pub fn of(mgr: &AigManager, f: NodeRef, vars: &[VarId]) -> Result<TruthTable, VerifyError> {
        TruthTable::of_conjunction(mgr, &[f], vars)
    }

    /// Tabulates the conjunction of `roots`.
    pub fn of_conjunction(mgr: &AigManager, roots: &[NodeRef], vars: &[VarId]) -> Result<TruthTable, VerifyError> {
        check_width(vars.len())?;
        let pos: HashMap<VarId, usize> = vars.iter().enumerate().map(|(j, &v)| (v, j)).collect();
        let mut sim = Simulator::new(mgr, roots);
        if let Some(&v) = sim.inputs().iter().find(|v| !pos.contains_key(v)) {
            return Err(VerifyError::Unbound(v));
        }
        let mask = row_mask(vars.len());
        let words = (0..words_for(vars.len()))
            .map(|b| sim.run(|v| enum_pattern(pos[&v], b)).into_iter().fold(mask, |acc, w| acc & w))
            .collect();
        Ok(TruthTable { vars: vars.to_vec(), words })
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn rows(&self) -> usize {
        1 << self.vars.len()
    }

    pub fn get(&self, row: usize) -> bool {
        self.words[row / 64] >> (row % 64) & 1 == 1
    }

    /// Value at the row selected by `pi`; unassigned variables read as 0.
    pub fn value(&self, pi: &Assignment) -> bool {
        let row = self.vars.iter().enumerate().fold(0, |r, (j, &v)| r | (pi.value(v) as usize) << j);
        self.get(row)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_false(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Whether flipping `v` changes the value on some row.
    pub fn depends_on(&self, v: VarId) -> bool {
        let Some(j) = self.vars.iter().position(|&u| u == v) else {
            return false;
        };
        (0..self.rows()).any(|r| r >> j & 1 == 0 && self.get(r) != self.get(r | 1 << j))
    }

    /// Row-wise implication. Both tables must share the variable list.
    pub fn implies(&self, other: &TruthTable) -> bool {
        assert_eq!(self.vars, other.vars, "tables over different variables");
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }
}

fn check_width(n: usize) -> Result<(), VerifyError> {
    if n > MAX_TABLE_VARS {
        Err(VerifyError::Bound { what: "table variables", limit: MAX_TABLE_VARS, actual: n })
    } else {
        Ok(())
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits: String = (0..self.rows()).map(|r| if self.get(r) { '1' } else { '0' }).collect();
        write!(f, "TruthTable({:?}: {})", self.vars, bits)
    }
}
